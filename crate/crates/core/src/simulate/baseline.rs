//! Sliding-window empirical quantiles: the dynamic comparator for EWGH.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::oracle::EmpiricalDistribution;

/// Keeps the last `window` observations and answers quantiles with the
/// order-statistic rule. Memory and query cost grow with the window, not
/// with the stream.
#[derive(Debug, Clone)]
pub struct SlidingWindow {
    window: usize,
    buf: VecDeque<f64>,
}

impl SlidingWindow {
    pub fn new(window: usize) -> Result<Self> {
        if window == 0 {
            return Err(Error::Config("window must hold at least one value".into()));
        }
        Ok(Self {
            window,
            buf: VecDeque::with_capacity(window),
        })
    }

    pub fn observe(&mut self, x: f64) -> Result<()> {
        if !x.is_finite() {
            return Err(Error::NonFinite(x));
        }
        if self.buf.len() == self.window {
            self.buf.pop_front();
        }
        self.buf.push_back(x);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.buf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buf.is_empty()
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        let (a, b) = self.buf.as_slices();
        let values: Vec<f64> = a.iter().chain(b).copied().collect();
        EmpiricalDistribution::new(&values)?.quantile(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forgets_old_values() {
        let mut w = SlidingWindow::new(3).unwrap();
        assert!(w.quantile(0.5).is_err());
        for x in [100.0, 1.0, 2.0, 3.0] {
            w.observe(x).unwrap();
        }
        assert_eq!(w.len(), 3);
        assert_eq!(w.quantile(1.0).unwrap(), 3.0);
        assert_eq!(w.quantile(0.5).unwrap(), 2.0);
        assert!(SlidingWindow::new(0).is_err());
        assert!(w.observe(f64::NAN).is_err());
    }
}
