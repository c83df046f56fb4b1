//! Self-check suites run by `swor verify`.
//!
//! Each suite compares a fast or closed-form computation with an independent
//! one (exact arithmetic, brute-force enumeration, exhaustive scans) and
//! counts checks per property. Everything is seeded, so reruns are identical.

use std::collections::BTreeSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::coeffs::verify_identities;
use crate::design::{existence_check, AffineDesign, ProbabilityVector};
use crate::error::Result;
use crate::polytope::{
    adjacency_edges, adjacency_from_incidence, brute_force_vertices, facets,
    predicted_facet_vertices, vertices,
};
use crate::rational::{self, ratio, Rational};
use crate::sampler::{all_counts, bound_c, factorial_ratio_bounds, LogFactorials, StratifiedPopulation, StratumModel};
use crate::variance::{variance_without_replacement, variance_without_replacement_enumerated, PopulationValues};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Identities,
    VarianceOracle,
    PolytopeOracle,
    FactorialBounds,
    RejectionBound,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::Identities,
        Suite::VarianceOracle,
        Suite::PolytopeOracle,
        Suite::FactorialBounds,
        Suite::RejectionBound,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Identities => "identities",
            Suite::VarianceOracle => "variance-oracle",
            Suite::PolytopeOracle => "polytope-oracle",
            Suite::FactorialBounds => "factorial-bounds",
            Suite::RejectionBound => "rejection-bound",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PropertyCount {
    pub property: String,
    pub checked: u64,
    pub passed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub properties: Vec<PropertyCount>,
}

impl SuiteReport {
    fn new(suite: Suite) -> Self {
        SuiteReport {
            suite,
            properties: Vec::new(),
        }
    }

    fn record(&mut self, property: &str, ok: bool) {
        let idx = match self.properties.iter().position(|p| p.property == property) {
            Some(i) => i,
            None => {
                self.properties.push(PropertyCount {
                    property: property.to_owned(),
                    checked: 0,
                    passed: 0,
                });
                self.properties.len() - 1
            }
        };
        let entry = &mut self.properties[idx];
        entry.checked += 1;
        entry.passed += ok as u64;
    }

    pub fn passed(&self) -> bool {
        self.properties.iter().all(|p| p.checked == p.passed)
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        writeln!(f, "{status} {}", self.suite.name())?;
        for p in &self.properties {
            writeln!(f, "  {:<28} {}/{}", p.property, p.passed, p.checked)?;
        }
        Ok(())
    }
}

pub fn run(suite: Suite, seed: u64) -> Result<SuiteReport> {
    match suite {
        Suite::Identities => identities(),
        Suite::VarianceOracle => variance_oracle(seed, 50, 10),
        Suite::PolytopeOracle => polytope_oracle(),
        Suite::FactorialBounds => factorial_bounds(500),
        Suite::RejectionBound => rejection_bound(),
    }
}

pub fn identities() -> Result<SuiteReport> {
    let mut report = SuiteReport::new(Suite::Identities);
    for n_pop in 3..=12 {
        for k in 2..n_pop {
            for (i, check) in verify_identities(n_pop, k)?.iter().enumerate() {
                if *check != crate::coeffs::IdentityCheck::NotApplicable {
                    report.record(&format!("identity {}", i + 1), check.is_ok());
                }
            }
        }
    }
    Ok(report)
}

/// A random rational probability vector in `T(N,n)`: a random rational point
/// of the simplex mixed with the uniform vector, pulled toward the uniform
/// vector until feasible.
pub fn random_feasible<R: Rng + ?Sized>(
    n_pop: usize,
    n: usize,
    rng: &mut R,
) -> Result<ProbabilityVector<Rational>> {
    let raw: Vec<i64> = (0..n_pop).map(|_| rng.gen_range(1..=40)).collect();
    let total: i64 = raw.iter().sum();
    let uniform = ratio(1, n_pop as i64);
    let mut t = ratio(rng.gen_range(1..=10), 10);
    loop {
        let w: Vec<Rational> = raw
            .iter()
            .map(|&r| (rational::int(1) - &t) * &uniform + &t * ratio(r, total))
            .collect();
        let p = ProbabilityVector::new(w)?;
        if existence_check(&p, n)?.feasible {
            return Ok(p);
        }
        t /= rational::int(2);
    }
}

pub fn variance_oracle(seed: u64, vectors: usize, values: usize) -> Result<SuiteReport> {
    let mut report = SuiteReport::new(Suite::VarianceOracle);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for n_pop in 4..=6 {
        for n in 2..=3 {
            for _ in 0..vectors {
                let p = random_feasible(n_pop, n, &mut rng)?;
                let exact = AffineDesign::new(p.clone(), n)?;
                let float = AffineDesign::new(p.to_float(), n)?;
                for u in 0..n_pop {
                    let m = exact.k_marginal(1, &[u])?;
                    report.record("first-order marginal = p", m == p.weights()[u]);
                }
                for _ in 0..values {
                    let x: Vec<f64> = (0..n_pop).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    let pv = PopulationValues::new(x, p.to_float())?;
                    let brute = variance_without_replacement_enumerated(&pv, &exact)?;
                    let matrix = variance_without_replacement(&pv, &float)?;
                    report.record("enumeration = matrix form", (brute - matrix).abs() <= 1e-10);
                }
            }
        }
    }
    Ok(report)
}

pub fn polytope_oracle() -> Result<SuiteReport> {
    let mut report = SuiteReport::new(Suite::PolytopeOracle);
    for n_pop in 4..=6 {
        for n in 2..n_pop {
            let verts = vertices(n_pop, n)?;
            let expected = if n == n_pop - 1 { n_pop } else { 2 * n_pop };
            report.record("vertex count", verts.len() == expected);

            let listed: BTreeSet<Vec<Rational>> =
                verts.iter().map(|v| v.coords.weights().to_vec()).collect();
            let brute: BTreeSet<Vec<Rational>> = brute_force_vertices(n_pop, n)?.into_iter().collect();
            report.record("vertices = brute force", listed == brute);

            let fs = facets(n_pop, n)?;
            let count = crate::rational::binomial(n_pop as u64, n as u64);
            report.record("facet count", num_bigint::BigInt::from(fs.len()) == count);
            if n < n_pop - 1 {
                for f in &fs {
                    report.record(
                        "facet incidence",
                        f.vertex_set == predicted_facet_vertices(n_pop, &f.subset),
                    );
                }
                report.record(
                    "adjacency = incidence",
                    adjacency_edges(n_pop, n)? == adjacency_from_incidence(n_pop, n)?,
                );
            }
        }
    }
    Ok(report)
}

pub fn factorial_bounds(max_s: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport::new(Suite::FactorialBounds);
    let lf = LogFactorials::new(max_s as usize);
    for s in 1..=max_s {
        for r in 1..=s {
            let b = factorial_ratio_bounds(r, s)?;
            let exact = lf.get((s - r) as usize) - lf.get(s as usize);
            report.record("lower <= exact", b.ln_lower < exact);
            report.record("exact <= upper", exact < b.ln_upper);
        }
    }
    Ok(report)
}

/// Stratified populations with `K <= 3`, `N <= max_n`, `n <= max_sample`,
/// strata sizes `> n` and weights drawn from a small grid.
pub fn rejection_grid(max_n: usize, max_sample: usize) -> Vec<(StratifiedPopulation, usize)> {
    const WEIGHTS: [i64; 3] = [1, 2, 3];
    let mut out = Vec::new();
    for n in 2..=max_sample {
        for k in 1..=3usize {
            let mut sizes = vec![n + 1; k];
            loop {
                let total: usize = sizes.iter().sum();
                if total <= max_n && total > n + 2 {
                    let mut w = vec![0usize; k];
                    loop {
                        let weights: Vec<i64> = w.iter().map(|&i| WEIGHTS[i]).collect();
                        let mass: i64 = weights.iter().zip(&sizes).map(|(&a, &s)| a * s as i64).sum();
                        let probs: Vec<Rational> = weights.iter().map(|&a| ratio(a, mass)).collect();
                        if let Ok(pop) = StratifiedPopulation::new(probs, sizes.clone()) {
                            if pop.check_sample_size(n).is_ok() {
                                out.push((pop, n));
                            }
                        }
                        if !advance(&mut w, WEIGHTS.len() - 1) {
                            break;
                        }
                    }
                }
                if !advance_sizes(&mut sizes, n + 1, max_n) {
                    break;
                }
            }
        }
    }
    out
}

// odometer over 0..=max per digit
fn advance(digits: &mut [usize], max: usize) -> bool {
    for d in digits.iter_mut().rev() {
        if *d < max {
            *d += 1;
            return true;
        }
        *d = 0;
    }
    false
}

// nondecreasing size vectors, each >= min, total <= max_total
fn advance_sizes(sizes: &mut [usize], min: usize, max_total: usize) -> bool {
    let k = sizes.len();
    for i in (0..k).rev() {
        sizes[i] += 1;
        let v = sizes[i];
        sizes[i + 1..].fill(v);
        if sizes.iter().sum::<usize>() <= max_total {
            return true;
        }
        sizes[i..].fill(min);
    }
    false
}

pub fn rejection_bound() -> Result<SuiteReport> {
    let mut report = SuiteReport::new(Suite::RejectionBound);
    for (pop, n) in rejection_grid(30, 5) {
        let bound = bound_c(&pop, n)?;
        report.record("C finite", bound.c.is_finite());
        let model = StratumModel::new(&pop, n)?;
        for m in all_counts(&pop, n) {
            let h = model.h(&m)?;
            report.record("h(m) <= C", h <= bound.c * (1.0 + 1e-12));
        }
    }
    Ok(report)
}
