//! Horvitz-Thompson variance under the affine scheme versus sampling with
//! replacement.
//!
//! With bivariate marginals `δ_uv`, the two variances differ by
//!
//! ```text
//! Var_without = Var_with - (n-1)/n * 1/N² * xᵀ Ψ x,   Ψ_uv = 1 - δ_uv / (p_u p_v)
//! ```
//!
//! so sampling without replacement never loses, whatever `x` is, exactly when
//! Ψ is positive semidefinite. Ψ needs `p > 0`; the reduced matrix Γ of size
//! `N-1` is polynomial in `p` and carries the same PSD verdict, so boundary
//! points with a zero weight are analysed through Γ.

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::design::{AffineDesign, Label, ProbabilityVector, Scalar, DEFAULT_SUPPORT_CAP};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// Relative PSD tolerance: eigenvalues `>= -PSD_TOL * max(1, ‖M‖∞)` count as nonnegative.
pub const PSD_TOL: f64 = 1e-9;
/// Jacobi sweep budget.
pub const MAX_SWEEPS: usize = 50;
/// Off-diagonal Frobenius norm target, relative to ‖M‖_F.
pub const JACOBI_TOL: f64 = 1e-15;

/// Attribute values `x` paired with the selection probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationValues {
    x: Vec<f64>,
    p: ProbabilityVector<f64>,
}

impl PopulationValues {
    pub fn new(x: Vec<f64>, p: ProbabilityVector<f64>) -> Result<Self> {
        if x.len() != p.len() {
            return Err(Error::domain(format!(
                "{} attribute values for a population of size {}",
                x.len(),
                p.len()
            )));
        }
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::domain(format!("attribute value at label {i} is not finite")));
        }
        Ok(PopulationValues { x, p })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn p(&self) -> &ProbabilityVector<f64> {
        &self.p
    }

    pub fn n_pop(&self) -> usize {
        self.x.len()
    }

    pub fn mean(&self) -> f64 {
        self.x.iter().sum::<f64>() / self.n_pop() as f64
    }

    /// `x_i / (N p_i)`; fails if a label with nonzero `x` has zero probability.
    fn scaled(&self, i: Label) -> Result<f64> {
        let p = self.p.weights()[i];
        if p > 0.0 {
            Ok(self.x[i] / (self.n_pop() as f64 * p))
        } else if self.x[i] == 0.0 {
            Ok(0.0)
        } else {
            Err(Error::ZeroProbability(i))
        }
    }
}

/// `(1/n) Σ x_{I_i} / (N p_{I_i})` for a realised sample.
pub fn ht_estimate(pv: &PopulationValues, sample: &[Label]) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::domain("empty sample"));
    }
    let mut total = 0.0;
    for &label in sample {
        if label >= pv.n_pop() {
            return Err(Error::LabelOutOfRange {
                label,
                n_pop: pv.n_pop(),
            });
        }
        if pv.p.weights()[label] <= 0.0 {
            return Err(Error::ZeroProbability(label));
        }
        total += pv.scaled(label)?;
    }
    Ok(total / sample.len() as f64)
}

/// Variance of the HT estimator for `n` independent draws from `p`.
pub fn variance_with_replacement(pv: &PopulationValues, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("sample size must be positive"));
    }
    let (mut first, mut second) = (0.0, 0.0);
    for (i, &p) in pv.p.weights().iter().enumerate() {
        let y = pv.scaled(i)?;
        first += p * y;
        second += p * y * y;
    }
    Ok((second - first * first).max(0.0) / n as f64)
}

/// Variance of the HT estimator under `design`, via the Ψ quadratic form.
pub fn variance_without_replacement(pv: &PopulationValues, design: &AffineDesign<f64>) -> Result<f64> {
    let n = design.n_sample() as f64;
    let big_n = pv.n_pop() as f64;
    let psi = psi_matrix(design.p())?;
    let with = variance_with_replacement(pv, design.n_sample())?;
    Ok(with - (n - 1.0) / n / (big_n * big_n) * psi.quadratic_form(&pv.x))
}

/// Same variance by direct expectation over every ordered tuple in the
/// support. Independent of Ψ; used to cross-check the matrix form.
pub fn variance_without_replacement_enumerated<T: Scalar>(
    pv: &PopulationValues,
    design: &AffineDesign<T>,
) -> Result<f64> {
    let mut outcomes = Vec::new();
    for (tuple, prob) in design.enumerate_support(DEFAULT_SUPPORT_CAP)? {
        outcomes.push((prob.to_f64(), ht_estimate(pv, &tuple)?));
    }
    let mean: f64 = outcomes.iter().map(|(w, v)| w * v).sum();
    Ok(outcomes.iter().map(|(w, v)| w * (v - mean).powi(2)).sum())
}

/// Dense symmetric matrix stored as its lower triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    dim: usize,
    lower: Vec<f64>,
}

impl SymmetricMatrix {
    pub fn zeros(dim: usize) -> Self {
        SymmetricMatrix {
            dim,
            lower: vec![0.0; dim * (dim + 1) / 2],
        }
    }

    /// Builds from `f(i, j)` evaluated for `j <= i`.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..=i {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Fails if `rows` is not square and symmetric.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::domain("matrix is not square"));
        }
        for i in 0..dim {
            for j in 0..i {
                if rows[i][j] != rows[j][i] {
                    return Err(Error::domain(format!("matrix is not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self::from_fn(dim, |i, j| rows[i][j]))
    }

    fn index(i: usize, j: usize) -> usize {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        hi * (hi + 1) / 2 + lo
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.lower[Self::index(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.lower[Self::index(i, j)] = v;
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j)).collect())
            .collect()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        x.iter().zip(self.mul_vec(x)).map(|(a, b)| a * b).sum()
    }

    /// `xᵀMx` evaluated exactly on the stored doubles.
    pub fn quadratic_form_exact(&self, x: &[f64]) -> Option<Rational> {
        let xs: Option<Vec<Rational>> = x.iter().map(|&v| rational::from_f64(v)).collect();
        let xs = xs?;
        let mut total = Rational::zero();
        for i in 0..self.dim {
            for j in 0..self.dim {
                total += rational::from_f64(self.get(i, j))? * &xs[i] * &xs[j];
            }
        }
        Some(total)
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn norm_frobenius(&self) -> f64 {
        (0..self.dim)
            .flat_map(|i| (0..self.dim).map(move |j| (i, j)))
            .map(|(i, j)| self.get(i, j).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Psd,
    Indefinite,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralReport {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Unit eigenvectors, `eigenvectors[k]` belongs to `eigenvalues[k]`.
    #[serde(skip)]
    pub eigenvectors: Vec<Vec<f64>>,
    pub min_eigenvalue: f64,
    /// Absolute threshold actually applied, `tol * max(1, ‖M‖∞)`.
    pub tolerance: f64,
    pub verdict: Verdict,
    /// Eigenvector of the most negative eigenvalue when the verdict is not PSD.
    pub witness: Option<Vec<f64>>,
    pub witness_quadratic_form: Option<f64>,
    pub sweeps: usize,
}

/// Cyclic Jacobi eigen-decomposition followed by a PSD verdict at relative
/// tolerance `tol`.
pub fn symmetric_eigenvalues(m: &SymmetricMatrix, tol: f64) -> Result<SpectralReport> {
    if m.lower.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("matrix has non-finite entries"));
    }
    let n = m.dim;
    let mut a = m.to_rows();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let scale = m.norm_frobenius();
    let off = |a: &Vec<Vec<f64>>| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[i][j] * a[i][j];
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    while off(&a) > JACOBI_TOL * scale {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence(MAX_SWEEPS));
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vkp, vkq) = (row[p], row[q]);
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i][i].total_cmp(&a[j][j]));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| a[k][k]).collect();
    let eigenvectors: Vec<Vec<f64>> = order
        .iter()
        .map(|&k| v.iter().map(|row| row[k]).collect())
        .collect();
    let min_eigenvalue = eigenvalues.first().copied().unwrap_or(0.0);
    let tolerance = tol * m.norm_inf().max(1.0);

    let (verdict, witness, witness_quadratic_form) = if min_eigenvalue >= -tolerance {
        (Verdict::Psd, None, None)
    } else {
        let w = eigenvectors[0].clone();
        let exact = m.quadratic_form_exact(&w);
        let negative = exact.as_ref().is_some_and(|q| q.is_negative());
        let verdict = if negative {
            Verdict::Indefinite
        } else {
            Verdict::Inconclusive
        };
        let q = exact.map(|q| rational::to_f64(&q));
        (verdict, Some(w), q)
    };
    Ok(SpectralReport {
        eigenvalues,
        eigenvectors,
        min_eigenvalue,
        tolerance,
        verdict,
        witness,
        witness_quadratic_form,
        sweeps,
    })
}

/// `Ψ_uv = 1 - δ_uv / (p_u p_v)` with the `(N, 2)` affine bivariate marginals.
pub fn psi_matrix<T: Scalar>(p: &ProbabilityVector<T>) -> Result<SymmetricMatrix> {
    let w: Vec<f64> = p.weights().iter().map(Scalar::to_f64).collect();
    if let Some(i) = w.iter().position(|&v| v <= 0.0) {
        return Err(Error::ZeroProbability(i));
    }
    let big_n = w.len() as f64;
    let (a, b) = (-1.0 / ((big_n - 1.0) * (big_n - 2.0)), 1.0 / (big_n - 2.0));
    Ok(SymmetricMatrix::from_fn(w.len(), |i, j| {
        if i == j {
            1.0
        } else {
            1.0 - (a + b * (w[i] + w[j])) / (w[i] * w[j])
        }
    }))
}

/// Entries of Ω, the matrix with `xᵀΨx = yᵀΩy` for `y = x/p`.
pub fn omega_entries<T: Scalar>(p: &ProbabilityVector<T>) -> Vec<Vec<T>> {
    let n = p.len();
    let w = p.weights();
    let (inv_nm, inv_m) = pair_constants::<T>(n);
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let prod = w[i].clone() * w[j].clone();
                    if i == j {
                        prod
                    } else {
                        prod + inv_nm.clone() - (w[i].clone() + w[j].clone()) * inv_m.clone()
                    }
                })
                .collect()
        })
        .collect()
}

pub fn omega_matrix<T: Scalar>(p: &ProbabilityVector<T>) -> SymmetricMatrix {
    to_symmetric(&omega_entries(p))
}

/// `1/((N-1)(N-2))` and `1/(N-2)`.
fn pair_constants<T: Scalar>(n: usize) -> (T, T) {
    let n = n as i64;
    (
        T::from_rational(&rational::ratio(1, (n - 1) * (n - 2))),
        T::from_rational(&rational::ratio(1, n - 2)),
    )
}

/// Entries of the `(N-1) x (N-1)` matrix Γ, with the last label as reference.
pub fn gamma_entries<T: Scalar>(p: &ProbabilityVector<T>) -> Vec<Vec<T>> {
    let n = p.len();
    let w = p.weights();
    let last = w[n - 1].clone();
    let (inv_nm, inv_m) = pair_constants::<T>(n);
    let two = T::from_usize(2);
    (0..n - 1)
        .map(|i| {
            (0..n - 1)
                .map(|j| {
                    let di = w[i].clone() - last.clone();
                    let dj = w[j].clone() - last.clone();
                    if i == j {
                        di.clone() * di - two.clone() * inv_nm.clone()
                            + two.clone() * (w[i].clone() + last.clone()) * inv_m.clone()
                    } else {
                        di * dj - inv_nm.clone() + two.clone() * last.clone() * inv_m.clone()
                    }
                })
                .collect()
        })
        .collect()
}

pub fn gamma_matrix<T: Scalar>(p: &ProbabilityVector<T>) -> SymmetricMatrix {
    to_symmetric(&gamma_entries(p))
}

fn to_symmetric<T: Scalar>(rows: &[Vec<T>]) -> SymmetricMatrix {
    SymmetricMatrix::from_fn(rows.len(), |i, j| rows[i][j].to_f64())
}

/// Closed form of det Γ for `N = 3`: `18 (p1 - 1/2)(p2 - 1/2)(p1 + p2 - 1/2)`.
pub fn gamma_det_n3<T: Scalar>(p: &ProbabilityVector<T>) -> Result<T> {
    if p.len() != 3 {
        return Err(Error::domain("closed-form determinant needs N = 3"));
    }
    let half = T::from_rational(&rational::ratio(1, 2));
    let (p1, p2) = (p.weights()[0].clone(), p.weights()[1].clone());
    Ok(T::from_usize(18)
        * (p1.clone() - half.clone())
        * (p2.clone() - half.clone())
        * (p1 + p2 - half))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Guarantee {
    GuaranteedPsd,
    /// The sufficient condition does not apply; Ψ may still be PSD.
    Undecided,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SufficientCondition<T> {
    pub guarantee: Guarantee,
    pub two_smallest_sum: T,
    pub threshold: T,
}

/// Two-smallest-weights test: `>= 1/2` for `N = 3`, `>= (3N-2)/(2N(N-1))` for `N > 3`.
pub fn sufficient_condition<T: Scalar>(p: &ProbabilityVector<T>) -> SufficientCondition<T> {
    let n = p.len() as i64;
    let threshold = if n == 3 {
        rational::ratio(1, 2)
    } else {
        rational::ratio(3 * n - 2, 2 * n * (n - 1))
    };
    let threshold = T::from_rational(&threshold);
    let labels = p.ascending_labels();
    let two_smallest_sum = p.sum_over(&labels[..2]);
    let guarantee = if two_smallest_sum >= threshold {
        Guarantee::GuaranteedPsd
    } else {
        Guarantee::Undecided
    };
    SufficientCondition {
        guarantee,
        two_smallest_sum,
        threshold,
    }
}

/// PSD analysis of a probability vector: Ψ when every weight is positive,
/// otherwise Γ.
pub fn analyze_psd<T: Scalar>(p: &ProbabilityVector<T>, tol: f64) -> Result<SpectralReport> {
    match psi_matrix(p) {
        Ok(psi) => symmetric_eigenvalues(&psi, tol),
        Err(Error::ZeroProbability(_)) => symmetric_eigenvalues(&gamma_matrix(p), tol),
        Err(e) => Err(e),
    }
}

/// Scales a witness so its largest-magnitude entry is `+1`.
pub fn normalize_witness(x: &[f64]) -> Vec<f64> {
    let pivot = x
        .iter()
        .copied()
        .max_by(|a, b| a.abs().total_cmp(&b.abs()))
        .unwrap_or(1.0);
    if pivot == 0.0 {
        return x.to_vec();
    }
    x.iter().map(|v| v / pivot).collect()
}

/// Ψ with exact entries; only for strictly positive rational weights.
pub fn psi_entries_exact(p: &ProbabilityVector<Rational>) -> Result<Vec<Vec<Rational>>> {
    let w = p.weights();
    if let Some(i) = w.iter().position(|v| !v.is_positive()) {
        return Err(Error::ZeroProbability(i));
    }
    let (inv_nm, inv_m) = pair_constants::<Rational>(w.len());
    let one = rational::int(1);
    Ok((0..w.len())
        .map(|i| {
            (0..w.len())
                .map(|j| {
                    if i == j {
                        one.clone()
                    } else {
                        let delta = -&inv_nm + (&w[i] + &w[j]) * &inv_m;
                        &one - delta / (&w[i] * &w[j])
                    }
                })
                .collect()
        })
        .collect())
}
