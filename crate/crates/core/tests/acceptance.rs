//! Acceptance checks, one line per criterion. Runs without the libtest
//! harness so the PASS/FAIL lines always reach stdout; exits nonzero if any
//! criterion fails.
//!
//! Reference values are computed here from first principles (factorials,
//! direct enumeration, hand-built matrices) rather than through the library
//! paths they check.

// 0.318 is a variance, not 1/pi
#![allow(clippy::approx_constant)]

use std::collections::{BTreeMap, BTreeSet};
use std::process::{Command, ExitCode};
use std::time::Instant;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use swor_core::design::{AffineDesign, ProbabilityVector};
use swor_core::polytope::{
    adjacency_edges, boundary_counterexample, brute_force_vertices, facets, vertex_spectral,
    vertex_spectrum_closed_form, vertices, VertexKind,
};
use swor_core::rational::{self, ratio, Rational};
use swor_core::sampler::{all_counts, bound_c, factorial_ratio_bounds, StratifiedPopulation, StratumModel};
use swor_core::variance::{
    gamma_det_n3, gamma_entries, normalize_witness, psi_matrix, symmetric_eigenvalues,
    variance_with_replacement, variance_without_replacement, PopulationValues, PSD_TOL,
};
use swor_core::verify::{random_feasible, rejection_grid};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fact(k: usize) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

fn choose(n: usize, k: usize) -> Rational {
    if k > n {
        return Rational::zero();
    }
    Rational::new(fact(n), fact(k) * fact(n - k))
}

/// `(A, B)` straight from the factorial definitions.
fn coefficients(n_pop: usize, k: usize) -> (Rational, Rational) {
    let a = -Rational::new(BigInt::from(k - 1) * fact(n_pop - k - 1), fact(n_pop - 1));
    let b = Rational::new(fact(n_pop - k - 1), fact(n_pop - 2));
    (a, b)
}

fn example_p() -> Vec<Rational> {
    vec![ratio(415, 1000), ratio(25, 100), ratio(25, 100), ratio(85, 1000)]
}

/// Ordered tuples of distinct labels of length `n` from `0..big`.
fn ordered_tuples(big: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(big: usize, n: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for u in 0..big {
            if !cur.contains(&u) {
                cur.push(u);
                rec(big, n, cur, out);
                cur.pop();
            }
        }
    }
    rec(big, n, &mut cur, &mut out);
    out
}

/// HT variance by direct expectation over ordered tuples, pmf from the
/// definition.
fn brute_variance(p: &[Rational], n: usize, x: &[f64]) -> f64 {
    let big = p.len();
    let (a, b) = coefficients(big, n);
    let pf: Vec<f64> = p.iter().map(rational::to_f64).collect();
    let mut outcomes = Vec::new();
    for t in ordered_tuples(big, n) {
        let s: Rational = t.iter().map(|&i| p[i].clone()).sum();
        let prob = rational::to_f64(&(&a + &b * s));
        let est = t.iter().map(|&i| x[i] / (big as f64 * pf[i])).sum::<f64>() / n as f64;
        outcomes.push((prob, est));
    }
    let mean: f64 = outcomes.iter().map(|(w, v)| w * v).sum();
    outcomes.iter().map(|(w, v)| w * (v - mean).powi(2)).sum()
}

fn criterion_1() -> Check {
    let d = AffineDesign::new(ProbabilityVector::new(example_p()).unwrap(), 2).unwrap();
    let expected = [[0, 199, 199, 100], [199, 0, 100, 1], [199, 100, 0, 1], [100, 1, 1, 0]];
    // pairwise pmf from the ordered tuples of the joint pmf
    for (u, row) in expected.iter().enumerate() {
        for (v, &e) in row.iter().enumerate() {
            let got = if u == v { Rational::zero() } else { d.joint_pmf(&[u, v]).unwrap() };
            ensure(got == ratio(e, 1200), || format!("pmf[{u}][{v}] = {got}"))?;
        }
    }
    let p = ProbabilityVector::new(example_p()).unwrap().to_float();
    let fd = AffineDesign::new(p.clone(), 2).unwrap();
    let psi = psi_matrix(&p).unwrap();
    let spec = symmetric_eigenvalues(&psi, PSD_TOL).unwrap();
    let witness = normalize_witness(&spec.eigenvectors[0]);
    let mut line = Vec::new();
    for (x, want_without, want_with) in [(witness, 0.485, 0.450), (vec![1.0, 0.0, 0.0, 1.0], 0.341, 0.318)] {
        let pv = PopulationValues::new(x, p.clone()).unwrap();
        let with = variance_with_replacement(&pv, 2).unwrap();
        let without = variance_without_replacement(&pv, &fd).unwrap();
        ensure((without - want_without).abs() < 5e-4 && (with - want_with).abs() < 5e-4, || {
            format!("variances {without:.4}/{with:.4}, expected {want_without}/{want_with}")
        })?;
        line.push(format!("{without:.3}/{with:.3}"));
    }
    Ok(format!("pmf matrix exact, variances {}", line.join(", ")))
}

fn criterion_2() -> Check {
    let p = ProbabilityVector::new(example_p()).unwrap();
    let r = symmetric_eigenvalues(&psi_matrix(&p).unwrap(), PSD_TOL).unwrap();
    let want = 4.0 / 3.0 - 22.0 * 15890f64.sqrt() / 1411.0;
    ensure((r.min_eigenvalue - want).abs() < 1e-9, || {
        format!("min eigenvalue {} vs {want}", r.min_eigenvalue)
    })?;
    Ok(format!("min eigenvalue {:.12}", r.min_eigenvalue))
}

fn criterion_3() -> Check {
    let mut count = 0;
    for big in 3..=12usize {
        for k in 2..big {
            let (a, b) = coefficients(big, k);
            let kf = Rational::from_integer(fact(k));
            let (ta, tb) = (&a * &kf, &b * &kf);
            let kr = Rational::from_integer(BigInt::from(k));
            let mut checks = vec![
                &ta * choose(big, k) + &tb * choose(big - 1, k - 1) == Rational::one(),
                &ta * choose(big - 1, k - 1) + &tb * choose(big - 2, k - 2) == Rational::zero(),
                &tb * choose(big - 2, k - 1) == kr,
            ];
            if k >= 3 {
                let (a1, b1) = coefficients(big, k - 1);
                let nk = Rational::from_integer(BigInt::from(big - k));
                checks.push(&b * &nk == b1);
                checks.push(&a * (nk + Rational::one()) + &b == a1);
            }
            // the library must agree with the definitions
            let lib = swor_core::verify_identities(big, k).unwrap();
            let lib_pair = swor_core::coeff_pair(big, k).unwrap();
            checks.push(lib.iter().all(|c| c.is_ok()) && lib_pair.a == a && lib_pair.b == b);
            ensure(checks.iter().all(|&c| c), || format!("failure at N = {big}, k = {k}"))?;
            count += checks.len();
        }
    }
    Ok(format!("{count} exact identity checks"))
}

fn criterion_4() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for big in 4..=6 {
        for n in 2..=3 {
            for _ in 0..50 {
                let p = random_feasible(big, n, &mut rng).unwrap();
                let design = AffineDesign::new(p.to_float(), n).unwrap();
                for _ in 0..10 {
                    let x: Vec<f64> = (0..big).map(|_| rng.gen_range(-5.0..5.0)).collect();
                    let brute = brute_variance(p.weights(), n, &x);
                    let pv = PopulationValues::new(x, p.to_float()).unwrap();
                    let matrix = variance_without_replacement(&pv, &design).unwrap();
                    worst = worst.max((brute - matrix).abs());
                    count += 1;
                }
            }
        }
    }
    ensure(worst <= 1e-10, || format!("max discrepancy {worst:e}"))?;
    Ok(format!("{count} cases, max discrepancy {worst:.1e}"))
}

/// Random rational `p` whose two smallest entries sum to at least the
/// guarantee threshold.
fn random_guaranteed(big: usize, rng: &mut ChaCha8Rng) -> ProbabilityVector<Rational> {
    let bigi = big as i64;
    let threshold = ratio(3 * bigi - 2, 2 * bigi * (bigi - 1));
    let uniform = ratio(1, bigi);
    let raw: Vec<i64> = (0..big).map(|_| rng.gen_range(0..=60)).collect();
    let total = raw.iter().sum::<i64>().max(1);
    let mut t = ratio(rng.gen_range(1..=20), 20);
    loop {
        let w: Vec<Rational> = raw
            .iter()
            .map(|&r| (Rational::one() - &t) * &uniform + &t * ratio(r, total))
            .collect();
        let mut sorted = w.clone();
        sorted.sort();
        if &sorted[0] + &sorted[1] >= threshold {
            return ProbabilityVector::new(w).unwrap();
        }
        t *= ratio(9, 10);
    }
}

fn criterion_5() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut lowest = f64::INFINITY;
    for big in 4..=8 {
        for _ in 0..1000 {
            let p = random_guaranteed(big, &mut rng);
            let r = symmetric_eigenvalues(&psi_matrix(&p).unwrap(), PSD_TOL).unwrap();
            ensure(r.min_eigenvalue >= -1e-9, || format!("N = {big}: {}", r.min_eigenvalue))?;
            lowest = lowest.min(r.min_eigenvalue);
        }
    }
    // N = 3: closed-form determinant against the determinant of Γ's entries,
    // and PSD exactly when the two smallest weights reach 1/2
    let mut agree = 0;
    for _ in 0..500 {
        let raw: Vec<i64> = (0..3).map(|_| rng.gen_range(1..=50)).collect();
        let total: i64 = raw.iter().sum();
        let p = ProbabilityVector::new(raw.iter().map(|&r| ratio(r, total)).collect()).unwrap();
        let g = gamma_entries(&p);
        let det = &g[0][0] * &g[1][1] - &g[0][1] * &g[1][0];
        ensure(gamma_det_n3(&p).unwrap() == det, || format!("det mismatch at {raw:?}"))?;
        let mut s = p.weights().to_vec();
        s.sort();
        let condition = &s[0] + &s[1] >= ratio(1, 2);
        let trace = &g[0][0] + &g[1][1];
        let psd = !det.is_negative() && !trace.is_negative();
        ensure(psd == condition, || format!("N = 3 PSD mismatch at {raw:?}"))?;
        agree += 1;
    }
    Ok(format!("5000 guaranteed vectors, min eigenvalue {lowest:.3e}; {agree} N=3 determinant checks"))
}

fn cube_isomorphic(edges: &[(usize, usize)]) -> bool {
    let target: BTreeSet<(usize, usize)> = (0..8usize)
        .flat_map(|v| (0..3).map(move |b| (v, v ^ (1 << b))))
        .filter(|(a, b)| a < b)
        .collect();
    let mut perm: Vec<usize> = (0..8).collect();
    loop {
        let mapped: BTreeSet<(usize, usize)> = edges
            .iter()
            .map(|&(a, b)| {
                let (x, y) = (perm[a], perm[b]);
                (x.min(y), x.max(y))
            })
            .collect();
        if mapped == target {
            return true;
        }
        // next lexicographic permutation
        let Some(i) = (0..7).rev().find(|&i| perm[i] < perm[i + 1]) else {
            return false;
        };
        let j = (i + 1..8).rev().find(|&j| perm[j] > perm[i]).unwrap();
        perm.swap(i, j);
        perm[i + 1..].reverse();
    }
}

fn criterion_6() -> Check {
    for big in 4..=8usize {
        for n in 2..big {
            let verts = vertices(big, n).unwrap();
            let count = if n == big - 1 { big } else { 2 * big };
            ensure(verts.len() == count, || format!("N = {big}, n = {n}: {} vertices", verts.len()))?;
            for v in &verts {
                let (at, off) = match v.kind {
                    VertexKind::Zero => (Rational::zero(), ratio(1, big as i64 - 1)),
                    VertexKind::OneOverN => (ratio(1, n as i64), ratio(n as i64 - 1, (n * (big - 1)) as i64)),
                };
                for (i, c) in v.coords.weights().iter().enumerate() {
                    let want = if i == v.pivot { &at } else { &off };
                    ensure(c == want, || format!("N = {big}, n = {n}: coordinate mismatch"))?;
                }
            }
            if big <= 6 {
                let listed: BTreeSet<Vec<Rational>> = verts.iter().map(|v| v.coords.weights().to_vec()).collect();
                let brute: BTreeSet<Vec<Rational>> = brute_force_vertices(big, n).unwrap().into_iter().collect();
                ensure(listed == brute, || format!("brute force disagrees at N = {big}, n = {n}"))?;
            }
            let fs = facets(big, n).unwrap();
            ensure(Rational::from_integer(fact(big)) / (Rational::from_integer(fact(n)) * Rational::from_integer(fact(big - n))) == Rational::from_integer(BigInt::from(fs.len())), || "facet count".into())?;
            if n < big - 1 {
                for f in &fs {
                    let mut want: Vec<usize> = f.subset.clone();
                    want.extend((0..big).filter(|i| !f.subset.contains(i)).map(|i| big + i));
                    want.sort_unstable();
                    ensure(f.vertex_set == want, || format!("facet {:?} incidence", f.subset))?;
                }
            }
            for v in &verts {
                let got = vertex_spectral(big, n, v).unwrap().eigenvalues;
                let want = vertex_spectrum_closed_form(big, n, v.kind);
                ensure(got.iter().zip(&want).all(|(a, b)| (a - b).abs() < 1e-10), || {
                    format!("spectrum at N = {big}, n = {n}: {got:?} vs {want:?}")
                })?;
            }
        }
    }
    let edges = adjacency_edges(4, 2).unwrap();
    ensure(edges.len() == 12 && cube_isomorphic(&edges), || "T(4,2) is not a cube".into())?;
    let mut worst: f64 = 0.0;
    for big in 4..=12 {
        let c = boundary_counterexample(big).unwrap();
        ensure(c.gamma.min_eigenvalue < 0.0, || format!("N = {big}: not negative"))?;
        worst = worst.max((c.gamma.min_eigenvalue - c.closed_form_lambda).abs());
    }
    ensure(worst < 1e-9, || format!("counterexample mismatch {worst:e}"))?;
    Ok(format!("vertices, facets, spectra for 4 <= N <= 8; cube; counterexample error {worst:.1e}"))
}

fn criterion_7() -> Check {
    const DRAWS: usize = 100_000;
    let pop = StratifiedPopulation::from_ratios(&[(3, 100), (1, 50)], &[20, 20]).unwrap();
    let n = 2;
    let big = pop.n_pop();
    let p = pop.expanded().unwrap();
    let design = AffineDesign::new(p.clone(), n).unwrap();
    let model = StratumModel::new(&pop, n).unwrap();
    let bound = bound_c(&pop, n).unwrap();

    let mut sampler = swor_core::Sampler::new(&pop, n, 99).unwrap();
    let mut by_m: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    let mut first = vec![0usize; big];
    let mut pairs = vec![vec![0usize; big]; big];
    for _ in 0..DRAWS {
        let s = sampler.draw().unwrap();
        let mut m = vec![0; 2];
        for &l in &s {
            m[pop.stratum_of(l).unwrap()] += 1;
        }
        *by_m.entry(m).or_default() += 1;
        first[s[0]] += 1;
        let (u, v) = (s[0].min(s[1]), s[0].max(s[1]));
        pairs[u][v] += 1;
    }
    let within = |count: usize, prob: f64| {
        let freq = count as f64 / DRAWS as f64;
        let se = (prob * (1.0 - prob) / DRAWS as f64).sqrt();
        (freq - prob).abs() <= 4.0 * se
    };
    for m in all_counts(&pop, n) {
        let f = rational::to_f64(&model.f_exact(&m).unwrap());
        let c = by_m.get(&m.0).copied().unwrap_or(0);
        ensure(within(c, f), || format!("m = {:?}: {c} vs f = {f}", m.0))?;
    }
    for (i, &c) in first.iter().enumerate() {
        let pi = rational::to_f64(&p.weights()[i]);
        ensure(within(c, pi), || format!("label {i}: {c} vs p = {pi}"))?;
    }
    let mut tested = 0;
    for (u, row) in pairs.iter().enumerate() {
        for (v, &count) in row.iter().enumerate().skip(u + 1) {
            let delta = rational::to_f64(&design.bivariate_marginal(u, v).unwrap());
            ensure(within(count, 2.0 * delta), || format!("pair ({u},{v})"))?;
            tested += 1;
        }
    }
    let stats = sampler.stats();
    let c = bound.c;
    let se = (c * (c - 1.0) / stats.accepted as f64).sqrt();
    ensure(stats.empirical_iterations_per_accept <= c + 4.0 * se, || {
        format!("{} iterations per accept vs C = {c}", stats.empirical_iterations_per_accept)
    })?;

    let mut h_checks = 0;
    for (pop, n) in rejection_grid(30, 5) {
        let bound = bound_c(&pop, n).unwrap();
        let model = StratumModel::new(&pop, n).unwrap();
        for m in all_counts(&pop, n) {
            let h = model.h(&m).unwrap();
            ensure(h <= bound.c * (1.0 + 1e-12), || format!("h = {h} > C = {}", bound.c))?;
            h_checks += 1;
        }
    }

    // ln((s-r)!/s!) by summation against the bracket
    let mut ln_fact = vec![0.0f64; 501];
    for k in 1..=500 {
        ln_fact[k] = ln_fact[k - 1] + (k as f64).ln();
    }
    let mut brackets = 0;
    for s in 1..=500u64 {
        for r in 1..=s {
            let b = factorial_ratio_bounds(r, s).unwrap();
            let exact = ln_fact[(s - r) as usize] - ln_fact[s as usize];
            ensure(b.ln_lower < exact && exact < b.ln_upper, || format!("bracket fails at r = {r}, s = {s}"))?;
            brackets += 1;
        }
    }
    Ok(format!(
        "{DRAWS} draws ({tested} pairs), {:.4} iterations/accept vs C = {c:.4}; {h_checks} h <= C checks; {brackets} bracket checks",
        stats.empirical_iterations_per_accept
    ))
}

fn criterion_8() -> Check {
    let file = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/strata_k2.json");
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_swor"))
            .args(["sample", file, "--draws", "2000", "--seed", "17", "--stats"])
            .output()
            .expect("swor runs")
    };
    let (a, b) = (run(), run());
    ensure(a.status.success() && b.status.success(), || "sample failed".into())?;
    ensure(a.stdout == b.stdout && a.stderr == b.stderr, || "outputs differ".into())?;
    ensure(a.stdout.iter().filter(|&&c| c == b'\n').count() == 2000, || "wrong line count".into())?;
    Ok(format!("{} identical bytes", a.stdout.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("N=4 worked example", criterion_1),
        ("negative eigenvalue", criterion_2),
        ("coefficient identities", criterion_3),
        ("variance oracle", criterion_4),
        ("sufficient condition soundness", criterion_5),
        ("polytope", criterion_6),
        ("sampler correctness", criterion_7),
        ("sample determinism", criterion_8),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS criterion {}: {name} ({secs:.2}s) {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {}: {name} ({secs:.2}s) {detail}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
