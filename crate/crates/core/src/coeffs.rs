//! Scheme coefficients `A(N,k)` and `B(N,k)`.
//!
//! For `2 <= k <= N-1`,
//!
//! ```text
//! A(N,k) = -(k-1) (N-k-1)! / (N-1)!
//! B(N,k) =        (N-k-1)! / (N-2)!
//! ```
//!
//! and the "tilde" variants multiply both by `k!`. Everything here is exact.

use num_bigint::BigInt;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::{self, binomial, factorial, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoeffPair {
    pub a: Rational,
    pub b: Rational,
    pub n_pop: usize,
    pub k: usize,
}

impl CoeffPair {
    pub fn tilde_a(&self) -> Rational {
        &self.a * Rational::from_integer(factorial(self.k as u64))
    }

    pub fn tilde_b(&self) -> Rational {
        &self.b * Rational::from_integer(factorial(self.k as u64))
    }

    /// `-A/B = (k-1)/(N-1)`.
    pub fn threshold(&self) -> Rational {
        rational::ratio(self.k as i64 - 1, self.n_pop as i64 - 1)
    }

    /// `A + B s`.
    pub fn affine(&self, s: &Rational) -> Rational {
        &self.a + &self.b * s
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (rational::to_f64(&self.a), rational::to_f64(&self.b))
    }
}

pub fn coeff_pair(n_pop: usize, k: usize) -> Result<CoeffPair> {
    if n_pop < 3 {
        return Err(Error::domain(format!(
            "population size N = {n_pop} must be at least 3"
        )));
    }
    if k < 2 || k > n_pop - 1 {
        return Err(Error::domain(format!(
            "k = {k} must satisfy 2 <= k <= N-1 = {}",
            n_pop - 1
        )));
    }
    let (n, k64) = (n_pop as u64, k as u64);
    let tail = factorial(n - k64 - 1);
    let a = -Rational::new(BigInt::from(k64 - 1) * &tail, factorial(n - 1));
    let b = Rational::new(tail, factorial(n - 2));
    Ok(CoeffPair { a, b, n_pop, k })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IdentityCheck {
    Holds,
    Fails,
    NotApplicable,
}

impl IdentityCheck {
    fn of(ok: bool) -> Self {
        if ok {
            IdentityCheck::Holds
        } else {
            IdentityCheck::Fails
        }
    }

    pub fn is_ok(self) -> bool {
        self != IdentityCheck::Fails
    }
}

/// Checks the five coefficient identities at `(N, k)` in exact arithmetic:
///
/// 1. `Ã C(N,k) + B̃ C(N-1,k-1) = 1`
/// 2. `Ã C(N-1,k-1) + B̃ C(N-2,k-2) = 0`
/// 3. `B̃ C(N-2,k-1) = k`
/// 4. `B(N,k) (N-k) = B(N,k-1)` (needs `k >= 3`)
/// 5. `A(N,k) (N-k+1) + B(N,k) = A(N,k-1)` (needs `k >= 3`)
pub fn verify_identities(n_pop: usize, k: usize) -> Result<[IdentityCheck; 5]> {
    let c = coeff_pair(n_pop, k)?;
    let (n, k64) = (n_pop as u64, k as u64);
    let choose = |a: u64, b: u64| Rational::from_integer(binomial(a, b));
    let (ta, tb) = (c.tilde_a(), c.tilde_b());

    let id1 = &ta * choose(n, k64) + &tb * choose(n - 1, k64 - 1) == rational::int(1);
    let id2 = (&ta * choose(n - 1, k64 - 1) + &tb * choose(n - 2, k64 - 2)).is_zero();
    let id3 = &tb * choose(n - 2, k64 - 1) == rational::int(k as i64);

    let (id4, id5) = if k >= 3 {
        let prev = coeff_pair(n_pop, k - 1)?;
        let gap = rational::int((n_pop - k) as i64);
        (
            IdentityCheck::of(&c.b * &gap == prev.b),
            IdentityCheck::of(&c.a * (gap + rational::int(1)) + &c.b == prev.a),
        )
    } else {
        (IdentityCheck::NotApplicable, IdentityCheck::NotApplicable)
    };
    Ok([
        IdentityCheck::of(id1),
        IdentityCheck::of(id2),
        IdentityCheck::of(id3),
        id4,
        id5,
    ])
}
