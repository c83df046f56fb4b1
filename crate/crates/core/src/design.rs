//! Affine sampling-without-replacement designs.
//!
//! A design over labels `0..N` with sample size `n` gives every ordered
//! `n`-tuple of distinct labels the probability `A(N,n) + B(N,n) * Σ p`, and
//! every tuple with a repeated label probability zero. It exists exactly when
//! the `n` smallest weights sum to at least `(n-1)/(N-1)`.
//!
//! The types here are generic over [`Scalar`]: [`Rational`] gives exact
//! answers for small populations, `f64` is the fast mode used by the sampler.
//! Labels are zero based.

use std::fmt::Debug;

use num_traits::Num;
use serde::Serialize;

use crate::coeffs::{coeff_pair, CoeffPair};
use crate::combinatorics::{binomial_u128, next_permutation, Combinations};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};

pub type Label = usize;

/// Normalization tolerance for floating point probability vectors.
pub const FLOAT_SUM_TOL: f64 = 1e-12;
/// Float pmf values in `[-FLOAT_CLAMP_TOL, 0)` are clamped to zero.
pub const FLOAT_CLAMP_TOL: f64 = 1e-10;
/// Default cap on the number of ordered tuples `enumerate_support` will visit.
pub const DEFAULT_SUPPORT_CAP: u128 = 10_000_000;

/// Arithmetic used by designs: exact rationals or doubles.
pub trait Scalar: Clone + Debug + PartialOrd + Num + Send + Sync + 'static {
    const EXACT: bool;

    fn from_rational(r: &Rational) -> Self;
    fn to_f64(&self) -> f64;

    fn from_usize(v: usize) -> Self {
        Self::from_rational(&rational::int(v as i64))
    }

    /// Whether `sum` counts as 1 for a probability vector.
    fn is_unit(sum: &Self) -> bool;

    /// `a >= b`, with float slack at the feasibility boundary.
    fn at_least(a: &Self, b: &Self) -> bool;

    /// Maps float round-off below zero back to zero.
    fn clamp_probability(v: Self) -> Self {
        v
    }

    fn is_negative_value(&self) -> bool {
        *self < Self::zero()
    }

    fn describe(&self) -> String;
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn to_f64(&self) -> f64 {
        rational::to_f64(self)
    }

    fn is_unit(sum: &Self) -> bool {
        *sum == rational::int(1)
    }

    fn at_least(a: &Self, b: &Self) -> bool {
        a >= b
    }

    fn describe(&self) -> String {
        rational::format(self)
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_rational(r: &Rational) -> Self {
        rational::to_f64(r)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn is_unit(sum: &Self) -> bool {
        (sum - 1.0).abs() <= FLOAT_SUM_TOL
    }

    fn at_least(a: &Self, b: &Self) -> bool {
        *a >= *b - FLOAT_SUM_TOL
    }

    fn clamp_probability(v: Self) -> Self {
        if (-FLOAT_CLAMP_TOL..0.0).contains(&v) {
            0.0
        } else {
            v
        }
    }

    fn describe(&self) -> String {
        format!("{self}")
    }
}

/// Nonnegative weights summing to one over a population of size `N >= 3`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector<T> {
    weights: Vec<T>,
}

impl<T: Scalar> ProbabilityVector<T> {
    pub fn new(weights: Vec<T>) -> Result<Self> {
        if weights.len() < 3 {
            return Err(Error::InvalidProbabilities(format!(
                "population size {} is below 3",
                weights.len()
            )));
        }
        if let Some(i) = weights
            .iter()
            .position(|w| w.is_negative_value() || !w.to_f64().is_finite())
        {
            return Err(Error::InvalidProbabilities(format!(
                "weight at label {i} is {}",
                weights[i].describe()
            )));
        }
        let sum = weights.iter().fold(T::zero(), |acc, w| acc + w.clone());
        if !T::is_unit(&sum) {
            return Err(Error::InvalidProbabilities(format!(
                "weights sum to {}, not 1",
                sum.describe()
            )));
        }
        Ok(ProbabilityVector { weights })
    }

    pub fn uniform(n_pop: usize) -> Result<Self> {
        let w = T::from_rational(&rational::ratio(1, n_pop.max(1) as i64));
        Self::new(vec![w; n_pop])
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn get(&self, label: Label) -> Result<&T> {
        self.weights.get(label).ok_or(Error::LabelOutOfRange {
            label,
            n_pop: self.len(),
        })
    }

    /// Labels ordered by weight, ties broken by label.
    pub fn ascending_labels(&self) -> Vec<Label> {
        let mut labels: Vec<Label> = (0..self.len()).collect();
        labels.sort_by(|&i, &j| {
            self.weights[i]
                .partial_cmp(&self.weights[j])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(i.cmp(&j))
        });
        labels
    }

    pub fn to_float(&self) -> ProbabilityVector<f64> {
        ProbabilityVector {
            weights: self.weights.iter().map(Scalar::to_f64).collect(),
        }
    }

    /// Sum of the weights at `labels`.
    pub fn sum_over(&self, labels: &[Label]) -> T {
        labels
            .iter()
            .fold(T::zero(), |acc, &l| acc + self.weights[l].clone())
    }

    /// Relabels so that `perm[i]` becomes label `i`.
    pub fn permuted(&self, perm: &[Label]) -> Self {
        ProbabilityVector {
            weights: perm.iter().map(|&i| self.weights[i].clone()).collect(),
        }
    }
}

impl ProbabilityVector<Rational> {
    pub fn from_ratios(pairs: &[(i64, i64)]) -> Result<Self> {
        Self::new(pairs.iter().map(|&(a, b)| rational::ratio(a, b)).collect())
    }
}

/// Outcome of the feasibility test `p_(1) + ... + p_(n) >= (n-1)/(N-1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Feasibility<T> {
    pub feasible: bool,
    /// Sum of the `n` smallest weights.
    pub sum: T,
    pub threshold: T,
    /// `sum - threshold`.
    pub margin: T,
    /// The labels realising the minimum (ascending by weight, then label).
    pub subset: Vec<Label>,
}

fn check_sample_size(n_pop: usize, n: usize) -> Result<()> {
    if n < 2 || n >= n_pop {
        return Err(Error::domain(format!(
            "sample size n = {n} must satisfy 2 <= n < N = {n_pop}"
        )));
    }
    Ok(())
}

pub fn existence_check<T: Scalar>(p: &ProbabilityVector<T>, n: usize) -> Result<Feasibility<T>> {
    check_sample_size(p.len(), n)?;
    let mut subset: Vec<Label> = p.ascending_labels().into_iter().take(n).collect();
    let sum = p.sum_over(&subset);
    let threshold = T::from_rational(&rational::ratio(n as i64 - 1, p.len() as i64 - 1));
    let feasible = T::at_least(&sum, &threshold);
    let margin = sum.clone() - threshold.clone();
    subset.sort_unstable();
    Ok(Feasibility {
        feasible,
        sum,
        threshold,
        margin,
        subset,
    })
}

/// Probability `q` of drawing the unordered set `subset`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubsetWeight<T> {
    pub subset: Vec<Label>,
    pub q: T,
}

/// A validated `(p, n)` pair with its coefficients.
#[derive(Debug, Clone)]
pub struct AffineDesign<T> {
    p: ProbabilityVector<T>,
    n_sample: usize,
    coeffs: CoeffPair,
    a: T,
    b: T,
    pair_a: T,
    pair_b: T,
}

impl<T: Scalar> AffineDesign<T> {
    pub fn new(p: ProbabilityVector<T>, n_sample: usize) -> Result<Self> {
        let check = existence_check(&p, n_sample)?;
        if !check.feasible {
            return Err(Error::InfeasibleDesign {
                n: n_sample,
                sum: check.sum.describe(),
                threshold: check.threshold.describe(),
                subset: check.subset,
            });
        }
        let coeffs = coeff_pair(p.len(), n_sample)?;
        let pair = coeff_pair(p.len(), 2)?;
        Ok(AffineDesign {
            a: T::from_rational(&coeffs.a),
            b: T::from_rational(&coeffs.b),
            pair_a: T::from_rational(&pair.a),
            pair_b: T::from_rational(&pair.b),
            p,
            n_sample,
            coeffs,
        })
    }

    pub fn p(&self) -> &ProbabilityVector<T> {
        &self.p
    }

    pub fn n_pop(&self) -> usize {
        self.p.len()
    }

    pub fn n_sample(&self) -> usize {
        self.n_sample
    }

    pub fn coeffs(&self) -> &CoeffPair {
        &self.coeffs
    }

    fn check_labels(&self, labels: &[Label]) -> Result<()> {
        match labels.iter().find(|&&l| l >= self.n_pop()) {
            Some(&label) => Err(Error::LabelOutOfRange {
                label,
                n_pop: self.n_pop(),
            }),
            None => Ok(()),
        }
    }

    fn affine(&self, a: &T, b: &T, labels: &[Label]) -> T {
        if has_repeat(labels) {
            return T::zero();
        }
        T::clamp_probability(a.clone() + b.clone() * self.p.sum_over(labels))
    }

    /// Probability of the ordered draw `(I_1, ..., I_n) = indices`.
    pub fn joint_pmf(&self, indices: &[Label]) -> Result<T> {
        if indices.len() != self.n_sample {
            return Err(Error::domain(format!(
                "expected a tuple of {} labels, got {}",
                self.n_sample,
                indices.len()
            )));
        }
        self.check_labels(indices)?;
        Ok(self.affine(&self.a, &self.b, indices))
    }

    /// `Q(F) = n! * joint_pmf` for every `n`-subset `F`, in lexicographic order.
    pub fn subset_weights(&self) -> Vec<SubsetWeight<T>> {
        let (ta, tb) = (
            T::from_rational(&self.coeffs.tilde_a()),
            T::from_rational(&self.coeffs.tilde_b()),
        );
        Combinations::new(self.n_pop(), self.n_sample)
            .map(|subset| {
                let q = T::clamp_probability(ta.clone() + tb.clone() * self.p.sum_over(&subset));
                SubsetWeight { subset, q }
            })
            .collect()
    }

    /// `P[I_i = u, I_j = v]` for `i != j`; uses the `(N, 2)` coefficients for every `n`.
    pub fn bivariate_marginal(&self, u: Label, v: Label) -> Result<T> {
        self.check_labels(&[u, v])?;
        Ok(self.affine(&self.pair_a, &self.pair_b, &[u, v]))
    }

    /// Full `N x N` matrix of bivariate marginals.
    pub fn bivariate_matrix(&self) -> Vec<Vec<T>> {
        (0..self.n_pop())
            .map(|u| {
                (0..self.n_pop())
                    .map(|v| self.affine(&self.pair_a, &self.pair_b, &[u, v]))
                    .collect()
            })
            .collect()
    }

    /// Joint law of any `k` of the `n` draws, `1 <= k <= n`.
    ///
    /// For `k >= 2` this is the closed form with `A(N,k)`, `B(N,k)`. For
    /// `k = 1` it sums the bivariate marginal over the second label, which
    /// gives back `p_u`.
    pub fn k_marginal(&self, k: usize, indices: &[Label]) -> Result<T> {
        if k < 1 || k > self.n_sample {
            return Err(Error::domain(format!(
                "k = {k} must satisfy 1 <= k <= n = {}",
                self.n_sample
            )));
        }
        if indices.len() != k {
            return Err(Error::domain(format!(
                "expected {k} labels, got {}",
                indices.len()
            )));
        }
        self.check_labels(indices)?;
        if k == 1 {
            let u = indices[0];
            return Ok((0..self.n_pop()).fold(T::zero(), |acc, v| {
                acc + self.affine(&self.pair_a, &self.pair_b, &[u, v])
            }));
        }
        if k == self.n_sample {
            return Ok(self.affine(&self.a, &self.b, indices));
        }
        let c = coeff_pair(self.n_pop(), k)?;
        Ok(self.affine(
            &T::from_rational(&c.a),
            &T::from_rational(&c.b),
            indices,
        ))
    }

    /// Sums `joint_pmf` over all completions of the prefix `indices`.
    /// Brute force; meant as an oracle for [`AffineDesign::k_marginal`].
    pub fn marginal_by_summation(&self, indices: &[Label]) -> Result<T> {
        if indices.is_empty() || indices.len() > self.n_sample {
            return Err(Error::domain("prefix length must be in 1..=n"));
        }
        self.check_labels(indices)?;
        let mut tuple = indices.to_vec();
        let mut total = T::zero();
        self.sum_completions(&mut tuple, &mut total);
        Ok(total)
    }

    fn sum_completions(&self, tuple: &mut Vec<Label>, total: &mut T) {
        if tuple.len() == self.n_sample {
            *total = total.clone() + self.affine(&self.a, &self.b, tuple);
            return;
        }
        for u in 0..self.n_pop() {
            tuple.push(u);
            self.sum_completions(tuple, total);
            tuple.pop();
        }
    }

    pub fn support_size(&self) -> u128 {
        let perms: u128 = (1..=self.n_sample as u128).product();
        binomial_u128(self.n_pop(), self.n_sample).saturating_mul(perms)
    }

    /// All ordered tuples with positive probability, subsets in lexicographic
    /// order and permutations within each subset in lexicographic order.
    pub fn enumerate_support(&self, cap: u128) -> Result<SupportIter<'_, T>> {
        let needed = self.support_size();
        if needed > cap {
            return Err(Error::CapExceeded { needed, cap });
        }
        Ok(SupportIter {
            design: self,
            subsets: Combinations::new(self.n_pop(), self.n_sample),
            current: None,
        })
    }
}

/// Iterator returned by [`AffineDesign::enumerate_support`].
pub struct SupportIter<'a, T> {
    design: &'a AffineDesign<T>,
    subsets: Combinations,
    current: Option<(Vec<Label>, T)>,
}

impl<T: Scalar> Iterator for SupportIter<'_, T> {
    type Item = (Vec<Label>, T);

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            if let Some((tuple, prob)) = self.current.as_mut() {
                let out = (tuple.clone(), prob.clone());
                if !next_permutation(tuple) {
                    self.current = None;
                }
                return Some(out);
            }
            let subset = self.subsets.next()?;
            let prob = self.design.affine(&self.design.a, &self.design.b, &subset);
            if prob > T::zero() {
                self.current = Some((subset, prob));
            }
        }
    }
}

fn has_repeat(labels: &[Label]) -> bool {
    labels
        .iter()
        .enumerate()
        .any(|(i, l)| labels[..i].contains(l))
}

/// Convenience: exact design from `(num, den)` pairs.
pub fn exact_design(pairs: &[(i64, i64)], n: usize) -> Result<AffineDesign<Rational>> {
    AffineDesign::new(ProbabilityVector::from_ratios(pairs)?, n)
}
