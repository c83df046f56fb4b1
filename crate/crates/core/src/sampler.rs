//! Sampling from the affine design on a stratified population.
//!
//! When the `N` labels fall into `K` strata of sizes `N_j` sharing a common
//! weight `p_j`, the stratum counts `M` of an affine sample of size `n` have
//! pmf
//!
//! ```text
//! f(m) = n! Π C(N_j, m_j) (A(N,n) + B(N,n) Σ m_j p_j)
//! ```
//!
//! and, given `M = m`, the labels are simple random samples of size `m_j`
//! from each stratum in uniformly random order. `M` is drawn by rejection
//! from the multinomial proposal `g` with cell probabilities `N_j / N`,
//! accepting when `U <= f(M) / (C g(M))` with the bound `C >= f/g` below.
//!
//! Labels are zero based; stratum `j` owns the contiguous range
//! `offset_j .. offset_j + N_j`.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::coeffs::coeff_pair;
use crate::design::{existence_check, Label, ProbabilityVector};
use crate::error::{Error, Result};
use crate::rational::{self, binomial, factorial, ratio, Rational};

/// Normalization tolerance for `Σ N_j p_j = 1`.
pub const STRATA_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct StratifiedPopulation {
    probs: Vec<Rational>,
    sizes: Vec<usize>,
    offsets: Vec<usize>,
    n_pop: usize,
}

impl StratifiedPopulation {
    pub fn new(probs: Vec<Rational>, sizes: Vec<usize>) -> Result<Self> {
        if probs.is_empty() || probs.len() != sizes.len() {
            return Err(Error::Precondition(format!(
                "{} stratum probabilities for {} stratum sizes",
                probs.len(),
                sizes.len()
            )));
        }
        if let Some(j) = sizes.iter().position(|&s| s == 0) {
            return Err(Error::Precondition(format!("stratum {j} is empty")));
        }
        if let Some(j) = probs.iter().position(|p| !p.is_positive()) {
            return Err(Error::Precondition(format!(
                "stratum {j} has non-positive probability {}",
                rational::format(&probs[j])
            )));
        }
        let total: Rational = probs
            .iter()
            .zip(&sizes)
            .map(|(p, &s)| p * rational::int(s as i64))
            .sum();
        if (rational::to_f64(&total) - 1.0).abs() > STRATA_SUM_TOL {
            return Err(Error::Precondition(format!(
                "Σ N_j p_j = {} differs from 1",
                rational::to_f64(&total)
            )));
        }
        let mut offsets = Vec::with_capacity(sizes.len());
        let mut acc = 0;
        for &s in &sizes {
            offsets.push(acc);
            acc += s;
        }
        if acc < 3 {
            return Err(Error::Precondition("population size must be at least 3".into()));
        }
        Ok(StratifiedPopulation {
            probs,
            sizes,
            offsets,
            n_pop: acc,
        })
    }

    pub fn from_ratios(probs: &[(i64, i64)], sizes: &[usize]) -> Result<Self> {
        Self::new(probs.iter().map(|&(a, b)| ratio(a, b)).collect(), sizes.to_vec())
    }

    pub fn strata(&self) -> usize {
        self.sizes.len()
    }

    pub fn n_pop(&self) -> usize {
        self.n_pop
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn probs(&self) -> &[Rational] {
        &self.probs
    }

    /// Whether `Σ N_j p_j` is exactly one.
    pub fn is_exact(&self) -> bool {
        let total: Rational = self
            .probs
            .iter()
            .zip(&self.sizes)
            .map(|(p, &s)| p * rational::int(s as i64))
            .sum();
        total == rational::int(1)
    }

    pub fn stratum_of(&self, label: Label) -> Option<usize> {
        if label >= self.n_pop {
            return None;
        }
        Some(self.offsets.partition_point(|&o| o <= label) - 1)
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    /// The full per-label probability vector, exact.
    pub fn expanded(&self) -> Result<ProbabilityVector<Rational>> {
        let w = self
            .probs
            .iter()
            .zip(&self.sizes)
            .flat_map(|(p, &s)| std::iter::repeat_n(p.clone(), s))
            .collect();
        ProbabilityVector::new(w)
    }

    /// Float view of the expanded probabilities.
    pub fn expanded_f64(&self) -> Vec<f64> {
        self.probs
            .iter()
            .zip(&self.sizes)
            .flat_map(|(p, &s)| std::iter::repeat_n(rational::to_f64(p), s))
            .collect()
    }

    /// Checks `n <= min N_j`, `2 <= n < N` and the feasibility condition.
    pub fn check_sample_size(&self, n: usize) -> Result<()> {
        let min = *self.sizes.iter().min().unwrap();
        if n > min {
            return Err(Error::Precondition(format!(
                "sample size n = {n} exceeds the smallest stratum size {min}"
            )));
        }
        if n < 2 || n >= self.n_pop {
            return Err(Error::Precondition(format!(
                "sample size n = {n} must satisfy 2 <= n < N = {}",
                self.n_pop
            )));
        }
        // the n smallest entries all come from the cheapest strata
        let mut order: Vec<usize> = (0..self.strata()).collect();
        order.sort_by(|&a, &b| self.probs[a].cmp(&self.probs[b]));
        let mut left = n;
        let mut sum = Rational::zero();
        let mut subset = Vec::with_capacity(n);
        for j in order {
            let take = left.min(self.sizes[j]);
            sum += &self.probs[j] * rational::int(take as i64);
            subset.extend(self.offsets[j]..self.offsets[j] + take);
            left -= take;
            if left == 0 {
                break;
            }
        }
        let threshold = ratio(n as i64 - 1, self.n_pop as i64 - 1);
        let ok = if self.is_exact() {
            sum >= threshold
        } else {
            rational::to_f64(&sum) >= rational::to_f64(&threshold) - STRATA_SUM_TOL
        };
        if !ok {
            return Err(Error::InfeasibleDesign {
                n,
                sum: rational::format(&sum),
                threshold: rational::format(&threshold),
                subset: {
                    subset.sort_unstable();
                    subset
                },
            });
        }
        Ok(())
    }
}

/// Stratum counts `m`, with `Σ m_j = n` and `m_j <= N_j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct StratumCounts(pub Vec<usize>);

impl StratumCounts {
    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    fn validate(&self, pop: &StratifiedPopulation, n: usize) -> Result<()> {
        if self.0.len() != pop.strata() {
            return Err(Error::InvalidCounts(format!(
                "{} counts for {} strata",
                self.0.len(),
                pop.strata()
            )));
        }
        if self.total() != n {
            return Err(Error::InvalidCounts(format!(
                "counts sum to {}, expected {n}",
                self.total()
            )));
        }
        if let Some(j) = (0..self.0.len()).find(|&j| self.0[j] > pop.sizes[j]) {
            return Err(Error::InvalidCounts(format!(
                "count {} exceeds stratum {j} size {}",
                self.0[j], pop.sizes[j]
            )));
        }
        Ok(())
    }
}

/// Every valid count vector for sample size `n`, lexicographic.
pub fn all_counts(pop: &StratifiedPopulation, n: usize) -> Vec<StratumCounts> {
    fn rec(sizes: &[usize], left: usize, cur: &mut Vec<usize>, out: &mut Vec<StratumCounts>) {
        if cur.len() + 1 == sizes.len() {
            if left <= sizes[cur.len()] {
                cur.push(left);
                out.push(StratumCounts(cur.clone()));
                cur.pop();
            }
            return;
        }
        for m in 0..=left.min(sizes[cur.len()]) {
            cur.push(m);
            rec(sizes, left - m, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(&pop.sizes, n, &mut Vec::new(), &mut out);
    out
}

/// `ln k!` for `k = 0..=max` by cumulative summation.
#[derive(Debug, Clone)]
pub struct LogFactorials(Vec<f64>);

impl LogFactorials {
    pub fn new(max: usize) -> Self {
        let mut table = Vec::with_capacity(max + 1);
        let mut acc = 0.0;
        table.push(0.0);
        for k in 1..=max {
            acc += (k as f64).ln();
            table.push(acc);
        }
        LogFactorials(table)
    }

    pub fn get(&self, k: usize) -> f64 {
        self.0[k]
    }

    pub fn ln_choose(&self, n: usize, k: usize) -> f64 {
        self.get(n) - self.get(k) - self.get(n - k)
    }
}

/// Precomputed pieces of `f`, `g` and `C` for one `(population, n)`.
#[derive(Debug, Clone)]
pub struct StratumModel {
    pop: StratifiedPopulation,
    n: usize,
    lf: LogFactorials,
    // p_j = numer_j / den and (n-1)/(N-1) = thr / den
    numer: Vec<BigInt>,
    thr: BigInt,
    den: BigInt,
    ln_b: f64,
    ln_lambda: Vec<f64>,
}

impl StratumModel {
    pub fn new(pop: &StratifiedPopulation, n: usize) -> Result<Self> {
        pop.check_sample_size(n)?;
        let threshold = ratio(n as i64 - 1, pop.n_pop as i64 - 1);
        let den = rational::lcm_of_denominators(pop.probs.iter().chain([&threshold]));
        let scale = |r: &Rational| r.numer() * (&den / r.denom());
        let b = coeff_pair(pop.n_pop, n)?.b;
        let nf = pop.n_pop as f64;
        Ok(StratumModel {
            numer: pop.probs.iter().map(scale).collect(),
            thr: scale(&threshold),
            ln_b: rational::to_f64(&b).ln(),
            ln_lambda: pop.sizes.iter().map(|&s| (s as f64 / nf).ln()).collect(),
            lf: LogFactorials::new(pop.n_pop),
            den,
            pop: pop.clone(),
            n,
        })
    }

    pub fn population(&self) -> &StratifiedPopulation {
        &self.pop
    }

    pub fn sample_size(&self) -> usize {
        self.n
    }

    /// `Σ m_j p_j - (n-1)/(N-1)`, exact.
    fn excess(&self, m: &StratumCounts) -> Rational {
        let total: BigInt = m
            .0
            .iter()
            .zip(&self.numer)
            .map(|(&c, num)| num * BigInt::from(c))
            .sum();
        Rational::new(total - &self.thr, self.den.clone())
    }

    /// `ln f(m)`; `-inf` where `f` vanishes.
    pub fn ln_f(&self, m: &StratumCounts) -> Result<f64> {
        m.validate(&self.pop, self.n)?;
        let excess = self.excess(m);
        if !excess.is_positive() {
            return Ok(f64::NEG_INFINITY);
        }
        let choose: f64 = m
            .0
            .iter()
            .zip(&self.pop.sizes)
            .map(|(&c, &s)| self.lf.ln_choose(s, c))
            .sum();
        Ok(self.lf.get(self.n) + choose + self.ln_b + ln_rational(&excess))
    }

    /// `ln g(m)` under the multinomial proposal.
    pub fn ln_g(&self, m: &StratumCounts) -> Result<f64> {
        m.validate(&self.pop, self.n)?;
        let mut acc = self.lf.get(self.n);
        for (&c, ln_l) in m.0.iter().zip(&self.ln_lambda) {
            acc += c as f64 * ln_l - self.lf.get(c);
        }
        Ok(acc)
    }

    pub fn f(&self, m: &StratumCounts) -> Result<f64> {
        Ok(self.ln_f(m)?.exp())
    }

    pub fn g(&self, m: &StratumCounts) -> Result<f64> {
        Ok(self.ln_g(m)?.exp())
    }

    /// `h(m) = f(m) / g(m)`.
    pub fn h(&self, m: &StratumCounts) -> Result<f64> {
        Ok((self.ln_f(m)? - self.ln_g(m)?).exp())
    }

    /// Exact `f(m)`.
    pub fn f_exact(&self, m: &StratumCounts) -> Result<Rational> {
        m.validate(&self.pop, self.n)?;
        let c = coeff_pair(self.pop.n_pop, self.n)?;
        let mut count = Rational::from_integer(factorial(self.n as u64));
        for (&k, &s) in m.0.iter().zip(&self.pop.sizes) {
            count *= Rational::from_integer(binomial(s as u64, k as u64));
        }
        Ok(count * &c.b * self.excess(m))
    }

    /// Exact `g(m)`.
    pub fn g_exact(&self, m: &StratumCounts) -> Result<Rational> {
        m.validate(&self.pop, self.n)?;
        let mut acc = Rational::from_integer(factorial(self.n as u64));
        for (&k, &s) in m.0.iter().zip(&self.pop.sizes) {
            let lambda = ratio(s as i64, self.pop.n_pop as i64);
            acc = acc * num_traits::pow(lambda, k) / Rational::from_integer(factorial(k as u64));
        }
        Ok(acc)
    }
}

fn ln_rational(r: &Rational) -> f64 {
    let (n, d) = (r.numer(), r.denom());
    let ln_big = |b: &BigInt| -> f64 {
        let bits = b.bits();
        if bits < 1000 {
            b.to_f64().unwrap().ln()
        } else {
            let shift = bits - 64;
            (b >> shift).to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
        }
    };
    ln_big(n) - ln_big(d)
}

pub fn f_pmf(pop: &StratifiedPopulation, n: usize, m: &StratumCounts) -> Result<f64> {
    StratumModel::new(pop, n)?.f(m)
}

pub fn g_pmf(pop: &StratifiedPopulation, n: usize, m: &StratumCounts) -> Result<f64> {
    StratumModel::new(pop, n)?.g(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RejectionBound {
    /// Upper bound on `h = f/g`.
    pub c: f64,
    pub ln_c: f64,
    /// `n ω e^{n²/N}` with `ω = max p_j / min p_j`.
    pub approx: f64,
}

/// Uniform bound on `f/g`:
///
/// ```text
/// C = exp(Σ_j [n³/(N_j(N_j-n)) + n/(N_j-n) + 1/(144 N_j²)])
///   · exp((n² + 1/12)/(N-n-2) + (3/2) n/(N-2))
///   · N (n max p_j - (n-1)/(N-1))
/// ```
///
/// Requires `n < N_j` for every stratum and `n < N - 2`.
pub fn bound_c(pop: &StratifiedPopulation, n: usize) -> Result<RejectionBound> {
    if let Some(j) = pop.sizes.iter().position(|&s| s <= n) {
        return Err(Error::Domain(format!(
            "the bound needs N_j > n, but stratum {j} has N_j = {} <= n = {n}",
            pop.sizes[j]
        )));
    }
    if pop.n_pop <= n + 2 {
        return Err(Error::Domain(format!(
            "the bound needs N > n + 2, got N = {} and n = {n}",
            pop.n_pop
        )));
    }
    let (nf, big) = (n as f64, pop.n_pop as f64);
    let strata: f64 = pop
        .sizes
        .iter()
        .map(|&s| {
            let s = s as f64;
            nf.powi(3) / (s * (s - nf)) + nf / (s - nf) + 1.0 / (144.0 * s * s)
        })
        .sum();
    let global = (nf * nf + 1.0 / 12.0) / (big - nf - 2.0) + 1.5 * nf / (big - 2.0);
    let max_p = pop.probs.iter().max().unwrap();
    let min_p = pop.probs.iter().min().unwrap();
    let last = big * (nf * rational::to_f64(max_p) - (nf - 1.0) / (big - 1.0));
    let ln_c = strata + global + last.ln();
    let omega = rational::to_f64(&(max_p / min_p));
    Ok(RejectionBound {
        c: ln_c.exp(),
        ln_c,
        approx: nf * omega * (nf * nf / big).exp(),
    })
}

/// Log-space bracket `ln lower <= ln((s-r)!/s!) <= ln upper`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorialRatioBounds {
    pub ln_lower: f64,
    pub ln_upper: f64,
}

impl FactorialRatioBounds {
    pub fn lower(&self) -> f64 {
        self.ln_lower.exp()
    }

    pub fn upper(&self) -> f64 {
        self.ln_upper.exp()
    }
}

/// Stirling-type bounds on `(s-r)!/s!` for `1 <= r <= s`:
///
/// ```text
/// s^{-r} exp(-r³/(s(s-r)) - r/(2(s-r)) - 1/(144 s²))
///     <= (s-r)!/s! <=
/// s^{-r} exp((r² + 1/12)/(s-r) - r/(2s))
/// ```
///
/// At `r = s` the bracket degenerates to `[0, ∞)`.
pub fn factorial_ratio_bounds(r: u64, s: u64) -> Result<FactorialRatioBounds> {
    if r < 1 || r > s {
        return Err(Error::domain(format!("need 1 <= r <= s, got r = {r}, s = {s}")));
    }
    let (r, s) = (r as f64, s as f64);
    let base = -r * s.ln();
    let gap = s - r;
    let (ln_lower, ln_upper) = if gap == 0.0 {
        (f64::NEG_INFINITY, f64::INFINITY)
    } else {
        (
            base - r.powi(3) / (s * gap) - 0.5 * r / gap - 1.0 / (144.0 * s * s),
            base + (r * r + 1.0 / 12.0) / gap - 0.5 * r / s,
        )
    };
    Ok(FactorialRatioBounds { ln_lower, ln_upper })
}

/// `ln((s-r)!/s!) = -Σ_{k=s-r+1}^{s} ln k`.
pub fn ln_factorial_ratio(r: u64, s: u64) -> f64 {
    -((s - r + 1)..=s).map(|k| (k as f64).ln()).sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RejectionStats {
    pub accepted: u64,
    pub proposals: u64,
    pub bound_c: f64,
    pub empirical_iterations_per_accept: f64,
}

impl RejectionStats {
    fn new(bound_c: f64) -> Self {
        RejectionStats {
            accepted: 0,
            proposals: 0,
            bound_c,
            empirical_iterations_per_accept: f64::NAN,
        }
    }

    fn record(&mut self, proposals: u64) {
        self.accepted += 1;
        self.proposals += proposals;
        self.empirical_iterations_per_accept = self.proposals as f64 / self.accepted as f64;
    }
}

/// Multinomial proposal: `n` labels drawn uniformly, counted by stratum.
fn propose<R: Rng + ?Sized>(pop: &StratifiedPopulation, n: usize, rng: &mut R) -> StratumCounts {
    let mut m = vec![0; pop.strata()];
    for _ in 0..n {
        let label = rng.gen_range(0..pop.n_pop);
        m[pop.stratum_of(label).unwrap()] += 1;
    }
    StratumCounts(m)
}

/// Rejection loop: returns the accepted counts and the number of proposals used.
pub fn draw_stratum_counts<R: Rng + ?Sized>(
    model: &StratumModel,
    bound: &RejectionBound,
    rng: &mut R,
) -> Result<(StratumCounts, u64)> {
    // one stratum: f = g = 1 at the only admissible m
    if model.pop.strata() == 1 {
        return Ok((StratumCounts(vec![model.n]), 1));
    }
    let cap = (1e6 * bound.c.max(1.0)).min(u64::MAX as f64) as u64;
    for proposals in 1..=cap {
        let m = propose(&model.pop, model.n, rng);
        if m.0.iter().zip(&model.pop.sizes).any(|(&c, &s)| c > s) {
            continue;
        }
        let ln_ratio = model.ln_f(&m)? - model.ln_g(&m)? - bound.ln_c;
        let u: f64 = rng.gen();
        if u.ln() <= ln_ratio {
            return Ok((m, proposals));
        }
    }
    Err(Error::IterationCap(cap))
}

/// Simple random sample of size `m_j` inside each stratum, concatenated and
/// uniformly permuted.
pub fn expand_sample<R: Rng + ?Sized>(
    pop: &StratifiedPopulation,
    counts: &StratumCounts,
    rng: &mut R,
) -> Result<Vec<Label>> {
    counts.validate(pop, counts.total())?;
    let mut out = Vec::with_capacity(counts.total());
    for (j, &m) in counts.0.iter().enumerate() {
        out.extend(
            index::sample(rng, pop.sizes[j], m)
                .into_iter()
                .map(|k| pop.offsets[j] + k),
        );
    }
    out.shuffle(rng);
    Ok(out)
}

/// Reproducible sampler. Draw `k` (counting from zero) uses its own ChaCha8
/// stream: the generator seeded with `seed`, switched to stream `k`.
#[derive(Debug, Clone)]
pub struct Sampler {
    model: StratumModel,
    bound: RejectionBound,
    seed: u64,
    draws: u64,
    stats: RejectionStats,
}

impl Sampler {
    pub fn new(pop: &StratifiedPopulation, n: usize, seed: u64) -> Result<Self> {
        let model = StratumModel::new(pop, n)?;
        // with a single stratum h is identically 1, so C = 1 is exact
        let bound = if pop.strata() == 1 {
            RejectionBound {
                c: 1.0,
                ln_c: 0.0,
                approx: n as f64 * (n as f64 * n as f64 / pop.n_pop as f64).exp(),
            }
        } else {
            bound_c(pop, n)?
        };
        Ok(Sampler {
            model,
            stats: RejectionStats::new(bound.c),
            bound,
            seed,
            draws: 0,
        })
    }

    pub fn bound(&self) -> &RejectionBound {
        &self.bound
    }

    pub fn stats(&self) -> &RejectionStats {
        &self.stats
    }

    pub fn model(&self) -> &StratumModel {
        &self.model
    }

    fn next_stream(&mut self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.draws);
        self.draws += 1;
        rng
    }

    /// Stratum counts only.
    pub fn draw_counts(&mut self) -> Result<StratumCounts> {
        let mut rng = self.next_stream();
        let (m, proposals) = draw_stratum_counts(&self.model, &self.bound, &mut rng)?;
        self.stats.record(proposals);
        Ok(m)
    }

    /// A full ordered sample of distinct labels.
    pub fn draw(&mut self) -> Result<Vec<Label>> {
        let mut rng = self.next_stream();
        let (m, proposals) = draw_stratum_counts(&self.model, &self.bound, &mut rng)?;
        self.stats.record(proposals);
        expand_sample(&self.model.pop, &m, &mut rng)
    }
}

/// Feasibility margin of the expanded population.
pub fn expanded_margin(pop: &StratifiedPopulation, n: usize) -> Result<Rational> {
    Ok(existence_check(&pop.expanded()?, n)?.margin)
}
