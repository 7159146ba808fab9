//! Zero-temperature Lorentzian environment and its single-exponential
//! correlation function `C(t) = alpha exp(-beta t)`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exchange statistics of the environmental modes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistics {
    Bose,
    Fermi,
}

impl fmt::Display for Statistics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Statistics::Bose => "bose",
            Statistics::Fermi => "fermi",
        })
    }
}

impl FromStr for Statistics {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bose" | "boson" | "bosonic" => Ok(Statistics::Bose),
            "fermi" | "fermion" | "fermionic" => Ok(Statistics::Fermi),
            other => Err(Error::InvalidParameter(format!(
                "unknown statistics {other:?} (expected bose or fermi)"
            ))),
        }
    }
}

/// Lorentzian bath
/// `J(w) = gamma0 lambda^2 / (2 pi ((w - epsilon + delta)^2 + lambda^2))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BathModel {
    /// Qubit transition frequency.
    pub epsilon: f64,
    /// Spectral width.
    pub lambda: f64,
    /// Coupling strength.
    pub gamma0: f64,
    /// Detuning of the spectral peak below `epsilon`.
    pub delta: f64,
    pub statistics: Statistics,
}

impl BathModel {
    pub fn new(
        epsilon: f64,
        lambda: f64,
        gamma0: f64,
        delta: f64,
        statistics: Statistics,
    ) -> Result<Self> {
        let bath = BathModel {
            epsilon,
            lambda,
            gamma0,
            delta,
            statistics,
        };
        bath.validate()?;
        Ok(bath)
    }

    /// Bosonic bath with the baseline parameters `epsilon = 2`, `lambda = 0.1`,
    /// `gamma0 = 0.02`, `delta = 0`.
    pub fn baseline() -> Self {
        BathModel {
            epsilon: 2.0,
            lambda: 0.1,
            gamma0: 0.02,
            delta: 0.0,
            statistics: Statistics::Bose,
        }
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_gamma0(mut self, gamma0: f64) -> Self {
        self.gamma0 = gamma0;
        self
    }

    pub fn with_statistics(mut self, statistics: Statistics) -> Self {
        self.statistics = statistics;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.epsilon, self.lambda, self.gamma0, self.delta]
            .iter()
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::InvalidParameter(
                "bath parameters must be finite".into(),
            ));
        }
        if self.lambda <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "lambda must be positive, got {}",
                self.lambda
            )));
        }
        if self.gamma0 < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "gamma0 must be non-negative, got {}",
                self.gamma0
            )));
        }
        Ok(())
    }

    /// Amplitude `alpha = gamma0 lambda / 2` of the correlation function.
    pub fn alpha(&self) -> C64 {
        C64::new(0.5 * self.gamma0 * self.lambda, 0.0)
    }

    /// Decay rate `beta = lambda + i (epsilon - delta)`.
    pub fn beta(&self) -> C64 {
        C64::new(self.lambda, self.epsilon - self.delta)
    }

    /// Centre of the Lorentzian, `epsilon - delta`.
    pub fn peak_frequency(&self) -> f64 {
        self.epsilon - self.delta
    }

    pub fn correlation(&self, t: f64) -> Result<C64> {
        if t < 0.0 || t.is_nan() {
            return Err(Error::NegativeTime(t));
        }
        Ok(self.alpha() * (-self.beta() * t).exp())
    }

    pub fn spectral_density(&self, omega: f64) -> f64 {
        let x = omega - self.peak_frequency();
        self.gamma0 * self.lambda * self.lambda / (2.0 * PI * (x * x + self.lambda * self.lambda))
    }
}
