//! Gauss-Hermite coefficient estimates.
//!
//! Each observation `x` contributes the term `α_k Z(x) H_k(x)` to coefficient
//! `k`, with `α_k = √π / (2^{k-1} k!)`. The static rule keeps a running mean
//! of those terms; the exponentially weighted rule blends the newest term in
//! with weight `λ`. Both seed the vector with the first observation's terms.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::special::{hermite_fill, ln_factorial, normal_pdf};

/// Largest truncation order `N` accepted anywhere in the crate.
pub const MAX_ORDER: usize = 32;

/// How a [`CoefficientVector`] absorbs observations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Running average over every observation.
    #[default]
    Static,
    /// Exponentially weighted moving average.
    Ewgh,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Static => "static",
            Mode::Ewgh => "ewgh",
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "static" | "gh" => Ok(Mode::Static),
            "ewgh" | "dynamic" => Ok(Mode::Ewgh),
            other => Err(Error::Config(format!("unknown mode {other:?}"))),
        }
    }
}

/// `α_0 ..= α_order`, built in log space so large orders do not overflow.
pub fn alphas(order: usize) -> Vec<f64> {
    let half_ln_pi = 0.5 * std::f64::consts::PI.ln();
    (0..=order)
        .map(|k| (half_ln_pi - (k as f64 - 1.0) * std::f64::consts::LN_2 - ln_factorial(k)).exp())
        .collect()
}

/// Single-observation summands `α_k Z(x) H_k(x)` for `k = 0..=order`.
pub fn term(x: f64, order: usize) -> Result<Vec<f64>> {
    if !x.is_finite() {
        return Err(Error::NonFinite(x));
    }
    if order > MAX_ORDER {
        return Err(domain(format!("order {order} exceeds {MAX_ORDER}")));
    }
    let alpha = alphas(order);
    let mut out = vec![0.0; order + 1];
    fill_terms(x, &alpha, &mut out);
    Ok(out)
}

pub(crate) fn fill_terms(x: f64, alpha: &[f64], out: &mut [f64]) {
    let z = normal_pdf(x);
    if z == 0.0 {
        // H_k(x) may overflow where the Gaussian factor has already underflowed
        out.fill(0.0);
        return;
    }
    hermite_fill(x, out);
    for (o, a) in out.iter_mut().zip(alpha) {
        *o *= a * z;
    }
}

/// The estimated coefficients `â_0 ..= â_N` together with the update state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CoefficientRecord", into = "CoefficientRecord")]
pub struct CoefficientVector {
    a_hat: Vec<f64>,
    count: u64,
    mode: Mode,
    lambda: Option<f64>,
    alpha: Vec<f64>,
}

impl CoefficientVector {
    /// Empty running-average vector of truncation order `order`.
    pub fn new_static(order: usize) -> Result<Self> {
        check_order(order)?;
        Ok(Self {
            a_hat: vec![0.0; order + 1],
            count: 0,
            mode: Mode::Static,
            lambda: None,
            alpha: alphas(order),
        })
    }

    /// Empty exponentially weighted vector with weight `lambda` in `(0, 1]`.
    pub fn new_ewgh(order: usize, lambda: f64) -> Result<Self> {
        check_order(order)?;
        check_lambda(lambda)?;
        Ok(Self {
            a_hat: vec![0.0; order + 1],
            count: 0,
            mode: Mode::Ewgh,
            lambda: Some(lambda),
            alpha: alphas(order),
        })
    }

    pub fn new(order: usize, mode: Mode, lambda: f64) -> Result<Self> {
        match mode {
            Mode::Static => Self::new_static(order),
            Mode::Ewgh => Self::new_ewgh(order, lambda),
        }
    }

    /// Builds a vector from explicit coefficients, e.g. `(1, 0, …, 0)` for
    /// the exact standard normal.
    pub fn from_parts(
        mode: Mode,
        lambda: Option<f64>,
        count: u64,
        a_hat: Vec<f64>,
    ) -> Result<Self> {
        CoefficientRecord {
            mode,
            lambda,
            count,
            a_hat,
        }
        .try_into()
    }

    pub fn a_hat(&self) -> &[f64] {
        &self.a_hat
    }

    /// Truncation order `N` (there are `N + 1` coefficients).
    pub fn order(&self) -> usize {
        self.a_hat.len() - 1
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn lambda(&self) -> Option<f64> {
        self.lambda
    }

    /// Applies whichever update rule the vector was built with.
    pub fn update(&mut self, x: f64) -> Result<()> {
        match self.mode {
            Mode::Static => self.update_static(x),
            Mode::Ewgh => self.update_ewgh(x),
        }
    }

    /// `â_k ← ((i-1) â_k + α_k Z(x) H_k(x)) / i`, with `i` the new count.
    pub fn update_static(&mut self, x: f64) -> Result<()> {
        self.expect_mode(Mode::Static)?;
        let terms = self.terms_for(x)?;
        self.count += 1;
        let i = self.count as f64;
        for (a, t) in self.a_hat.iter_mut().zip(&terms) {
            *a = ((i - 1.0) * *a + t) / i;
        }
        Ok(())
    }

    /// `â_k ← λ α_k Z(x) H_k(x) + (1-λ) â_k`; the first observation sets
    /// `â_k` to its own terms.
    pub fn update_ewgh(&mut self, x: f64) -> Result<()> {
        self.expect_mode(Mode::Ewgh)?;
        let lambda = self.lambda.expect("ewgh vectors always carry lambda");
        let terms = self.terms_for(x)?;
        if self.count == 0 {
            let n = self.a_hat.len();
            self.a_hat.copy_from_slice(&terms[..n]);
        } else {
            for (a, t) in self.a_hat.iter_mut().zip(&terms) {
                *a = lambda * t + (1.0 - lambda) * *a;
            }
        }
        self.count += 1;
        Ok(())
    }

    fn terms_for(&self, x: f64) -> Result<[f64; MAX_ORDER + 1]> {
        if !x.is_finite() {
            return Err(Error::NonFinite(x));
        }
        let mut buf = [0.0; MAX_ORDER + 1];
        fill_terms(x, &self.alpha, &mut buf[..self.a_hat.len()]);
        Ok(buf)
    }

    fn expect_mode(&self, requested: Mode) -> Result<()> {
        if self.mode == requested {
            Ok(())
        } else {
            Err(Error::ModeMismatch {
                expected: self.mode.as_str(),
                requested: requested.as_str(),
            })
        }
    }
}

/// Non-sequential fit: the mean of per-observation terms. The data are
/// summed in sorted order, so any permutation gives identical output.
pub fn fit_batch(data: &[f64], order: usize) -> Result<CoefficientVector> {
    if data.is_empty() {
        return Err(Error::Empty);
    }
    let mut cv = CoefficientVector::new_static(order)?;
    if let Some(bad) = data.iter().find(|x| !x.is_finite()) {
        return Err(Error::NonFinite(*bad));
    }
    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut sums = vec![0.0; order + 1];
    let mut buf = vec![0.0; order + 1];
    for &x in &sorted {
        fill_terms(x, &cv.alpha, &mut buf);
        for (s, t) in sums.iter_mut().zip(&buf) {
            *s += t;
        }
    }
    let n = data.len() as f64;
    for (a, s) in cv.a_hat.iter_mut().zip(&sums) {
        *a = s / n;
    }
    cv.count = data.len() as u64;
    Ok(cv)
}

fn check_order(order: usize) -> Result<()> {
    if order > MAX_ORDER {
        Err(Error::Config(format!(
            "truncation order {order} exceeds the maximum of {MAX_ORDER}"
        )))
    } else {
        Ok(())
    }
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda <= 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "lambda must lie in (0, 1], got {lambda}"
        )))
    }
}

/// Wire form: `{"mode", "lambda", "count", "a_hat"}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct CoefficientRecord {
    mode: Mode,
    lambda: Option<f64>,
    count: u64,
    a_hat: Vec<f64>,
}

impl TryFrom<CoefficientRecord> for CoefficientVector {
    type Error = Error;

    fn try_from(r: CoefficientRecord) -> Result<Self> {
        if r.a_hat.is_empty() {
            return Err(Error::Snapshot(
                "a_hat must hold at least one coefficient".into(),
            ));
        }
        let order = r.a_hat.len() - 1;
        check_order(order)?;
        if let Some(bad) = r.a_hat.iter().find(|a| !a.is_finite()) {
            return Err(Error::Snapshot(format!("non-finite coefficient {bad}")));
        }
        match (r.mode, r.lambda) {
            (Mode::Static, None) => {}
            (Mode::Ewgh, Some(l)) => check_lambda(l)?,
            (Mode::Static, Some(_)) => {
                return Err(Error::Snapshot(
                    "static coefficients carry no lambda".into(),
                ))
            }
            (Mode::Ewgh, None) => {
                return Err(Error::Snapshot("ewgh coefficients need a lambda".into()))
            }
        }
        Ok(Self {
            alpha: alphas(order),
            a_hat: r.a_hat,
            count: r.count,
            mode: r.mode,
            lambda: r.lambda,
        })
    }
}

impl From<CoefficientVector> for CoefficientRecord {
    fn from(cv: CoefficientVector) -> Self {
        Self {
            mode: cv.mode,
            lambda: cv.lambda,
            count: cv.count,
            a_hat: cv.a_hat,
        }
    }
}
