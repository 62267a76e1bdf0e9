//! Rate parameters of the two-stream queue.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The four rates that define the system.
///
/// Stream 1 (ordinary) arrives at `lambda1` and is served FCFS at `mu1`.
/// Stream 2 (priority) arrives at `lambda2` and is served at `mu2`, preempting
/// whatever is in service. `lambda2 = 0` is accepted and reduces the model to
/// an M/M/1 queue for stream 1; the other three rates must be strictly
/// positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    lambda1: f64,
    lambda2: f64,
    mu1: f64,
    mu2: f64,
}

fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidRate { name, value })
    }
}

impl ModelParams {
    pub fn new(lambda1: f64, lambda2: f64, mu1: f64, mu2: f64) -> Result<Self> {
        if !(lambda2.is_finite() && lambda2 >= 0.0) {
            return Err(Error::InvalidRate {
                name: "lambda2",
                value: lambda2,
            });
        }
        Ok(Self {
            lambda1: positive("lambda1", lambda1)?,
            lambda2,
            mu1: positive("mu1", mu1)?,
            mu2: positive("mu2", mu2)?,
        })
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }

    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }

    pub fn mu1(&self) -> f64 {
        self.mu1
    }

    pub fn mu2(&self) -> f64 {
        self.mu2
    }

    /// Total arrival rate.
    pub fn lambda(&self) -> f64 {
        self.lambda1 + self.lambda2
    }

    /// Fraction of arrivals that belong to stream 1.
    pub fn p1(&self) -> f64 {
        self.lambda1 / self.lambda()
    }

    pub fn p2(&self) -> f64 {
        1.0 - self.p1()
    }

    /// Returns a copy with one rate replaced, validating the result.
    pub fn with(&self, rate: Rate, value: f64) -> Result<Self> {
        let mut out = *self;
        match rate {
            Rate::Lambda1 => out.lambda1 = value,
            Rate::Lambda2 => out.lambda2 = value,
            Rate::Mu1 => out.mu1 = value,
            Rate::Mu2 => out.mu2 = value,
        }
        Self::new(out.lambda1, out.lambda2, out.mu1, out.mu2)
    }

    pub fn get(&self, rate: Rate) -> f64 {
        match rate {
            Rate::Lambda1 => self.lambda1,
            Rate::Lambda2 => self.lambda2,
            Rate::Mu1 => self.mu1,
            Rate::Mu2 => self.mu2,
        }
    }
}

/// Names one of the four rates, used by sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rate {
    Lambda1,
    Lambda2,
    Mu1,
    Mu2,
}

impl Rate {
    pub fn as_str(&self) -> &'static str {
        match self {
            Rate::Lambda1 => "l1",
            Rate::Lambda2 => "l2",
            Rate::Mu1 => "m1",
            Rate::Mu2 => "m2",
        }
    }
}

impl std::str::FromStr for Rate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l1" | "lambda1" => Ok(Rate::Lambda1),
            "l2" | "lambda2" => Ok(Rate::Lambda2),
            "m1" | "mu1" => Ok(Rate::Mu1),
            "m2" | "mu2" => Ok(Rate::Mu2),
            other => Err(Error::InvalidConfig(format!("unknown rate name `{other}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accessors() {
        let p = ModelParams::new(2.0, 5.0, 10.0, 5.0).unwrap();
        assert_eq!(p.lambda(), 7.0);
        assert_eq!(p.p1() + p.p2(), 1.0);
        assert!((p.p1() - 2.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_rates() {
        assert!(ModelParams::new(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(ModelParams::new(1.0, -1.0, 1.0, 1.0).is_err());
        assert!(ModelParams::new(1.0, 1.0, f64::NAN, 1.0).is_err());
        assert!(ModelParams::new(1.0, 1.0, 1.0, f64::INFINITY).is_err());
        assert!(ModelParams::new(1.0, 0.0, 2.0, 1.0).is_ok());
    }

    #[test]
    fn with_replaces_one_rate() {
        let p = ModelParams::new(2.0, 5.0, 10.0, 5.0).unwrap();
        let q = p.with(Rate::Lambda2, 7.5).unwrap();
        assert_eq!(q.lambda2(), 7.5);
        assert_eq!(q.mu1(), 10.0);
        assert!(p.with(Rate::Mu1, 0.0).is_err());
        assert_eq!("m2".parse::<Rate>().unwrap(), Rate::Mu2);
    }
}
