use crate::error::PadicError;
use serde::{Deserialize, Serialize};
use std::convert::TryFrom;
use std::fmt;

/// A validated prime modulus. Inputs are desk-scale, so trial division is
/// enough and keeps construction dependency-free.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct Prime(u64);

impl Prime {
    pub fn new(p: u64) -> Result<Self, PadicError> {
        if is_prime(p) {
            Ok(Prime(p))
        } else {
            Err(PadicError::NotPrime(p))
        }
    }

    pub fn get(self) -> u64 {
        self.0
    }

    /// Exponent d of the convergence domain p^d Zp for exp/log/cos/sin:
    /// 2 when p = 2, otherwise 1.
    pub fn series_domain(self) -> i64 {
        if self.0 == 2 {
            2
        } else {
            1
        }
    }
}

impl TryFrom<u64> for Prime {
    type Error = PadicError;
    fn try_from(p: u64) -> Result<Self, Self::Error> {
        Prime::new(p)
    }
}

impl From<Prime> for u64 {
    fn from(p: Prime) -> u64 {
        p.0
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Debug for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Prime({})", self.0)
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}
