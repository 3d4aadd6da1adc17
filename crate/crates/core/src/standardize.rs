//! Online location/scale estimates used to standardize a stream before it
//! reaches the coefficient update.

use serde::{Deserialize, Serialize};

use crate::coefficients::check_lambda;
use crate::error::{domain, Error, Result};

/// Smallest scale ever divided by.
pub const SIGMA_FLOOR: f64 = 1e-12;

/// Welford running mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RunningMoments {
    count: u64,
    m: f64,
    s: f64,
}

impl RunningMoments {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn update(&mut self, x: f64) -> Result<()> {
        if !x.is_finite() {
            return Err(Error::NonFinite(x));
        }
        self.count += 1;
        if self.count == 1 {
            self.m = x;
            self.s = 0.0;
            return Ok(());
        }
        let prev = self.m;
        self.m = prev + (x - prev) / self.count as f64;
        self.s += (x - prev) * (x - self.m);
        Ok(())
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> Option<f64> {
        (self.count > 0).then_some(self.m)
    }

    /// Sum of squared deviations `S_k`.
    pub fn sum_sq(&self) -> f64 {
        self.s
    }

    /// Sample variance `S_k / (k - 1)`; undefined below two observations.
    pub fn variance(&self) -> Option<f64> {
        (self.count >= 2).then(|| self.s / (self.count - 1) as f64)
    }

    pub fn std_dev(&self) -> Option<f64> {
        self.variance().map(f64::sqrt)
    }
}

/// Exponentially weighted mean and variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpMoments {
    lambda: f64,
    count: u64,
    mu: f64,
    v: f64,
}

impl ExpMoments {
    pub fn new(lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        Ok(Self {
            lambda,
            count: 0,
            mu: 0.0,
            v: 1.0,
        })
    }

    /// The first observation sets `μ̂ = x`, `V̂ = 1`. Afterwards the variance
    /// update uses the freshly updated mean.
    pub fn update(&mut self, x: f64) -> Result<()> {
        if !x.is_finite() {
            return Err(Error::NonFinite(x));
        }
        self.count += 1;
        if self.count == 1 {
            self.mu = x;
            self.v = 1.0;
            return Ok(());
        }
        let l = self.lambda;
        self.mu = (1.0 - l) * self.mu + l * x;
        let d = x - self.mu;
        self.v = (1.0 - l) * self.v + l * d * d;
        Ok(())
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> Option<f64> {
        (self.count > 0).then_some(self.mu)
    }

    pub fn variance(&self) -> Option<f64> {
        (self.count > 0).then_some(self.v)
    }

    pub fn std_dev(&self) -> Option<f64> {
        self.variance().map(f64::sqrt)
    }
}

/// Location and scale used to map between data units and standardized units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scale {
    pub mu: f64,
    pub sigma: f64,
}

impl Scale {
    pub const IDENTITY: Scale = Scale {
        mu: 0.0,
        sigma: 1.0,
    };

    pub fn standardize(&self, x: f64) -> f64 {
        (x - self.mu) / self.sigma
    }

    pub fn destandardize(&self, z: f64) -> f64 {
        self.sigma * z + self.mu
    }
}

/// `(x - μ) / σ`.
pub fn standardize(x: f64, mu: f64, sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    Ok((x - mu) / sigma)
}

/// `σ z + μ`.
pub fn destandardize(z: f64, mu: f64, sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    Ok(sigma * z + mu)
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("scale must be positive, got {sigma}")))
    }
}
