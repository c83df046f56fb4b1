//! The feasibility polytope `T(N,n)`: probability vectors whose `n` smallest
//! entries sum to at least `(n-1)/(N-1)`.
//!
//! For `n < N-1` it has `2N` vertices, `p(i,0)` (zero at `i`, `1/(N-1)`
//! elsewhere) and `p(i,1/n)` (`1/n` at `i`, `(n-1)/(n(N-1))` elsewhere), and
//! one facet per `n`-subset. For `n = N-1` only the `N` vertices `p(i,0)`
//! remain and the polytope is a simplex.
//!
//! Vertex, facet and adjacency computations are exact; spectra are floating
//! point.

use std::collections::BTreeSet;

use num_rational::Ratio;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::combinatorics::{next_permutation, Combinations};
use crate::design::{existence_check, Label, ProbabilityVector, Scalar};
use crate::error::{Error, Result};
use crate::rational::{self, ratio, Rational};
use crate::variance::{analyze_psd, gamma_matrix, symmetric_eigenvalues, SpectralReport, PSD_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum VertexKind {
    /// `p(i,0)`.
    Zero,
    /// `p(i,1/n)`.
    OneOverN,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolytopeVertex {
    pub kind: VertexKind,
    pub pivot: Label,
    pub coords: ProbabilityVector<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Facet {
    pub subset: Vec<Label>,
    /// Indices into the list returned by [`vertices`].
    pub vertex_set: Vec<usize>,
}

/// Vertex `w(j)` of the ordered cone `0 <= x_1 <= ... <= x_N` intersected
/// with `T(N,n)`: `j` copies of `a` followed by `N-j` copies of `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeVertex {
    pub j: usize,
    pub a: Rational,
    pub b: Rational,
    pub coords: Vec<Rational>,
}

fn check_params(n_pop: usize, n: usize) -> Result<()> {
    if n_pop < 3 || n < 2 || n >= n_pop {
        return Err(Error::domain(format!(
            "need 2 <= n < N with N >= 3, got N = {n_pop}, n = {n}"
        )));
    }
    Ok(())
}

pub fn membership<T: Scalar>(p: &ProbabilityVector<T>, n: usize) -> Result<bool> {
    Ok(existence_check(p, n)?.feasible)
}

/// The point `p(pivot, 0)` or `p(pivot, 1/n)`.
pub fn vertex_point(n_pop: usize, n: usize, kind: VertexKind, pivot: Label) -> Result<PolytopeVertex> {
    check_params(n_pop, n)?;
    if pivot >= n_pop {
        return Err(Error::LabelOutOfRange { label: pivot, n_pop });
    }
    let (big, small) = match kind {
        VertexKind::Zero => (Rational::zero(), ratio(1, n_pop as i64 - 1)),
        VertexKind::OneOverN => (
            ratio(1, n as i64),
            ratio(n as i64 - 1, (n * (n_pop - 1)) as i64),
        ),
    };
    let coords = (0..n_pop)
        .map(|j| if j == pivot { big.clone() } else { small.clone() })
        .collect();
    Ok(PolytopeVertex {
        kind,
        pivot,
        coords: ProbabilityVector::new(coords)?,
    })
}

/// All vertices: `p(0,0), ..., p(N-1,0)` then, when `n < N-1`,
/// `p(0,1/n), ..., p(N-1,1/n)`.
pub fn vertices(n_pop: usize, n: usize) -> Result<Vec<PolytopeVertex>> {
    check_params(n_pop, n)?;
    let mut kinds = vec![VertexKind::Zero];
    if n < n_pop - 1 {
        kinds.push(VertexKind::OneOverN);
    }
    kinds
        .into_iter()
        .flat_map(|kind| (0..n_pop).map(move |i| (kind, i)))
        .map(|(kind, i)| vertex_point(n_pop, n, kind, i))
        .collect()
}

/// Whether `point` satisfies the facet inequality of `subset` with equality.
pub fn saturates(point: &[Rational], subset: &[Label], n_pop: usize, n: usize) -> bool {
    let sum: Rational = subset.iter().map(|&i| &point[i]).sum();
    sum == ratio(n as i64 - 1, n_pop as i64 - 1)
}

/// One facet per `n`-subset, lexicographic, with vertex sets found by exact
/// saturation.
pub fn facets(n_pop: usize, n: usize) -> Result<Vec<Facet>> {
    let verts = vertices(n_pop, n)?;
    Ok(Combinations::new(n_pop, n)
        .map(|subset| {
            let vertex_set = verts
                .iter()
                .enumerate()
                .filter(|(_, v)| saturates(v.coords.weights(), &subset, n_pop, n))
                .map(|(k, _)| k)
                .collect();
            Facet { subset, vertex_set }
        })
        .collect())
}

/// Vertex set predicted for the facet of `subset` when `n < N-1`:
/// `p(i,0)` for `i` in the subset and `p(i,1/n)` for `i` outside it.
pub fn predicted_facet_vertices(n_pop: usize, subset: &[Label]) -> Vec<usize> {
    let zero = subset.iter().copied();
    let one = (0..n_pop).filter(|i| !subset.contains(i)).map(|i| n_pop + i);
    let mut out: Vec<usize> = zero.chain(one).collect();
    out.sort_unstable();
    out
}

/// Whether two vertices span an edge of `T(N,n)`.
pub fn adjacent(v1: &PolytopeVertex, v2: &PolytopeVertex, n_pop: usize, n: usize) -> Result<bool> {
    check_params(n_pop, n)?;
    if n == n_pop - 1 {
        if v1.kind == VertexKind::OneOverN || v2.kind == VertexKind::OneOverN {
            return Err(Error::domain("p(i,1/n) is not a vertex when n = N-1"));
        }
        return Ok(v1.pivot != v2.pivot);
    }
    if v1.pivot == v2.pivot {
        return Ok(false);
    }
    Ok(match (v1.kind, v2.kind) {
        (VertexKind::Zero, VertexKind::Zero) => n > 2,
        (VertexKind::OneOverN, VertexKind::OneOverN) => n < n_pop - 2,
        _ => true,
    })
}

/// Edge list over the indices of [`vertices`], pairs `(i, j)` with `i < j`.
pub fn adjacency_edges(n_pop: usize, n: usize) -> Result<Vec<(usize, usize)>> {
    let verts = vertices(n_pop, n)?;
    let mut edges = Vec::new();
    for i in 0..verts.len() {
        for j in i + 1..verts.len() {
            if adjacent(&verts[i], &verts[j], n_pop, n)? {
                edges.push((i, j));
            }
        }
    }
    Ok(edges)
}

/// Edges derived from facet incidence alone: two vertices are adjacent when
/// the intersection of all facets containing both has exactly those two
/// vertices. Independent of the rule set in [`adjacent`].
pub fn adjacency_from_incidence(n_pop: usize, n: usize) -> Result<Vec<(usize, usize)>> {
    let count = vertices(n_pop, n)?.len();
    let facet_sets: Vec<BTreeSet<usize>> = facets(n_pop, n)?
        .into_iter()
        .map(|f| f.vertex_set.into_iter().collect())
        .collect();
    let mut edges = Vec::new();
    for i in 0..count {
        for j in i + 1..count {
            let mut common: BTreeSet<usize> = (0..count).collect();
            let mut any = false;
            for f in facet_sets.iter().filter(|f| f.contains(&i) && f.contains(&j)) {
                common = common.intersection(f).copied().collect();
                any = true;
            }
            if any && common.len() == 2 {
                edges.push((i, j));
            }
        }
    }
    Ok(edges)
}

/// Γ spectrum at a vertex, with the pivot moved to the last coordinate.
pub fn vertex_spectral(n_pop: usize, n: usize, v: &PolytopeVertex) -> Result<SpectralReport> {
    if n_pop <= 3 {
        return Err(Error::domain("vertex spectra need N > 3"));
    }
    check_params(n_pop, n)?;
    let mut perm: Vec<Label> = (0..n_pop).filter(|&i| i != v.pivot).collect();
    perm.push(v.pivot);
    let moved = v.coords.permuted(&perm);
    symmetric_eigenvalues(&gamma_matrix(&moved), PSD_TOL)
}

/// Closed-form Γ spectrum at a vertex (pivot last), ascending.
pub fn vertex_spectrum_closed_form(n_pop: usize, n: usize, kind: VertexKind) -> Vec<f64> {
    let (nf, kf) = (n_pop as f64, n as f64);
    let (single, repeated) = match kind {
        VertexKind::Zero => (0.0, 1.0 / ((nf - 1.0) * (nf - 2.0))),
        VertexKind::OneOverN => (
            nf * nf / ((nf - 1.0) * kf * kf),
            (kf - 2.0) / ((nf - 2.0) * (nf - 1.0) * kf),
        ),
    };
    let mut out = vec![repeated; n_pop - 2];
    out.push(single);
    out.sort_by(f64::total_cmp);
    out
}

/// Midpoint of `p(0,1/2)` and `p(N-1,0)` on the boundary of `T(N,2)`,
/// where Ψ stops being PSD.
#[derive(Debug, Clone)]
pub struct Counterexample {
    pub p: ProbabilityVector<Rational>,
    pub gamma: SpectralReport,
    pub psi: SpectralReport,
    /// Closed-form negative eigenvalue of Γ.
    pub closed_form_lambda: f64,
}

pub fn boundary_counterexample(n_pop: usize) -> Result<Counterexample> {
    if n_pop <= 3 {
        return Err(Error::domain(format!(
            "the boundary counterexample needs N > 3, got {n_pop}"
        )));
    }
    let a = vertex_point(n_pop, 2, VertexKind::OneOverN, 0)?;
    let b = vertex_point(n_pop, 2, VertexKind::Zero, n_pop - 1)?;
    let half = ratio(1, 2);
    let mid: Vec<Rational> = a
        .coords
        .weights()
        .iter()
        .zip(b.coords.weights())
        .map(|(x, y)| (x + y) * &half)
        .collect();
    let p = ProbabilityVector::new(mid)?;
    let gamma = symmetric_eigenvalues(&gamma_matrix(&p), PSD_TOL)?;
    let psi = analyze_psd(&p, PSD_TOL)?;
    Ok(Counterexample {
        p,
        gamma,
        psi,
        closed_form_lambda: counterexample_lambda(n_pop),
    })
}

/// Coefficients `(A, B, C)` of the quadratic whose root gives the Γ
/// eigenvector `(x, 1, ..., 1)` at the boundary counterexample.
pub fn counterexample_quadratic(n_pop: usize) -> (Rational, Rational, Rational) {
    let n = n_pop as i64;
    let (m1, m2) = (n - 1, n - 2);
    let a = ratio(n, 8 * m1 * m1) - ratio(1, 2 * m1 * m2);
    let b = (ratio(m2, 4 * m1 * m1) - ratio(n - 3, 2 * m1 * m2))
        - (ratio(n * n, 16 * m1 * m1) + ratio(1, 2 * m1));
    let c = -(ratio(n * m2, 8 * m1 * m1) - ratio(1, 2 * m1));
    (a, b, c)
}

/// Discriminant as a single rational function of `N`.
pub fn counterexample_discriminant(n_pop: usize) -> Rational {
    let n = n_pop as i64;
    let num = n.pow(6) + 36 * n.pow(5) - 204 * n.pow(4) + 336 * n.pow(3) - 96 * n * n - 128 * n + 64;
    ratio(num, 256 * (n - 2).pow(2) * (n - 1).pow(4))
}

/// `λ = (1/32) (1 + 8/(N-2) - 3/(N-1)² - 2/(N-1) - sqrt(256 D))`.
pub fn counterexample_lambda(n_pop: usize) -> f64 {
    let n = n_pop as f64;
    let d = rational::to_f64(&counterexample_discriminant(n_pop));
    (1.0 + 8.0 / (n - 2.0) - 3.0 / (n - 1.0).powi(2) - 2.0 / (n - 1.0) - (256.0 * d).sqrt()) / 32.0
}

/// The `N` vertices `w(1..=N)` of the ordered cone section.
pub fn cone_vertices(n_pop: usize, n: usize) -> Result<Vec<ConeVertex>> {
    check_params(n_pop, n)?;
    let (big, k) = (n_pop as i64, n as i64);
    Ok((1..=n_pop)
        .map(|j| {
            let jj = j as i64;
            let (a, b) = if j == n_pop {
                (ratio(1, big), ratio(1, big))
            } else if j <= n {
                (ratio(jj - 1, jj * (big - 1)), ratio(1, big - 1))
            } else {
                (
                    ratio(k - 1, k * (big - 1)),
                    ratio(k * (big - 1) - jj * (k - 1), k * (big - jj) * (big - 1)),
                )
            };
            let coords = (0..n_pop)
                .map(|i| if i < j { a.clone() } else { b.clone() })
                .collect();
            ConeVertex { j, a, b, coords }
        })
        .collect())
}

/// Rebuilds `w(j)` as an average of permutations of `w(1)` (for `j <= n`
/// and `j = N`) or of `w(N-1)` (for `n <= j <= N-1`).
pub fn cone_vertex_by_averaging(n_pop: usize, n: usize, j: usize) -> Result<Vec<Rational>> {
    check_params(n_pop, n)?;
    if j == 0 || j > n_pop {
        return Err(Error::domain(format!("j = {j} outside 1..=N")));
    }
    let cone = cone_vertices(n_pop, n)?;
    let (first, second_last) = (&cone[0], &cone[n_pop - 2]);
    // u(k): w(1) with its single `a` moved to position k; v(k): w(N-1) with
    // its single `b` moved to position k
    let (base, positions): (&ConeVertex, Vec<usize>) = if j <= n || j == n_pop {
        (first, (0..j).collect())
    } else {
        (second_last, (j..n_pop).collect())
    };
    let (odd, common) = if j <= n || j == n_pop {
        (base.a.clone(), base.b.clone())
    } else {
        (base.b.clone(), base.a.clone())
    };
    let count = rational::int(positions.len() as i64);
    Ok((0..n_pop)
        .map(|i| {
            let total: Rational = positions
                .iter()
                .map(|&k| if k == i { odd.clone() } else { common.clone() })
                .sum();
            total / &count
        })
        .collect())
}

/// Distinct permutations of `point`, sorted.
pub fn distinct_permutations(point: &[Rational]) -> Vec<Vec<Rational>> {
    let mut idx: Vec<usize> = (0..point.len()).collect();
    let mut seen = BTreeSet::new();
    loop {
        seen.insert(idx.iter().map(|&i| point[i].clone()).collect::<Vec<_>>());
        if !next_permutation(&mut idx) {
            break;
        }
    }
    seen.into_iter().collect()
}

type Small = Ratio<i64>;

/// Vertices of `T(N,n)` found by brute force: every choice of `N-1` tight
/// inequalities (facets and nonnegativity) plus the simplex equality is
/// solved exactly, and feasible solutions of full rank are kept. Returns the
/// distinct points, sorted.
pub fn brute_force_vertices(n_pop: usize, n: usize) -> Result<Vec<Vec<Rational>>> {
    check_params(n_pop, n)?;
    if n_pop > 8 {
        return Err(Error::domain("brute-force vertex search is limited to N <= 8"));
    }
    // y = (N-1) x keeps every coefficient integral
    let mut rows: Vec<(Vec<i64>, i64)> = Combinations::new(n_pop, n)
        .map(|f| {
            let mut row = vec![0; n_pop];
            for i in f {
                row[i] = 1;
            }
            (row, n as i64 - 1)
        })
        .collect();
    for i in 0..n_pop {
        let mut row = vec![0; n_pop];
        row[i] = 1;
        rows.push((row, 0));
    }
    let equality = (vec![1; n_pop], n_pop as i64 - 1);

    let mut found = BTreeSet::new();
    for chosen in Combinations::new(rows.len(), n_pop - 1) {
        let mut system: Vec<(Vec<i64>, i64)> = chosen.iter().map(|&r| rows[r].clone()).collect();
        system.push(equality.clone());
        let Some(y) = solve_exact(&system) else {
            continue;
        };
        let feasible = rows.iter().all(|(row, rhs)| {
            let lhs: Small = row.iter().zip(&y).map(|(&c, v)| *v * c).sum();
            lhs >= Small::from_integer(*rhs)
        });
        if feasible {
            found.insert(y);
        }
    }
    let scale = n_pop as i64 - 1;
    Ok(found
        .into_iter()
        .map(|y| {
            y.into_iter()
                .map(|v| ratio(*v.numer(), *v.denom() * scale))
                .collect()
        })
        .collect())
}

/// Gaussian elimination over small rationals; `None` when singular.
fn solve_exact(system: &[(Vec<i64>, i64)]) -> Option<Vec<Small>> {
    let n = system.len();
    let mut m: Vec<Vec<Small>> = system
        .iter()
        .map(|(row, rhs)| {
            row.iter()
                .map(|&c| Small::from_integer(c))
                .chain(std::iter::once(Small::from_integer(*rhs)))
                .collect()
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, pivot);
        let inv = m[col][col].recip();
        for c in col..=n {
            m[col][c] *= inv;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let factor = m[r][col];
                for c in col..=n {
                    let delta = factor * m[col][c];
                    m[r][c] -= delta;
                }
            }
        }
    }
    Some(m.into_iter().map(|row| row[n]).collect())
}

/// Samples rational points around the simplex centre and checks that
/// membership in `T(N,k+1)` always implies membership in `T(N,k)`.
pub fn nesting_check(n_pop: usize, samples: usize, seed: u64) -> Result<bool> {
    if n_pop < 4 {
        return Err(Error::domain("nesting check needs N >= 4"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let uniform = ratio(1, n_pop as i64);
    for _ in 0..samples {
        let raw: Vec<i64> = (0..n_pop).map(|_| rng.gen_range(0..1000)).collect();
        let total: i64 = raw.iter().sum::<i64>().max(1);
        // mixing weight toward a random simplex point, in tenths
        let t = ratio(rng.gen_range(0..=10), 10);
        let weights: Vec<Rational> = raw
            .iter()
            .map(|&w| {
                let point = if raw.iter().all(|&v| v == 0) {
                    uniform.clone()
                } else {
                    ratio(w, total)
                };
                (Rational::one() - &t) * &uniform + &t * point
            })
            .collect();
        let p = ProbabilityVector::new(weights)?;
        let members: Vec<bool> = (2..n_pop)
            .map(|k| membership(&p, k))
            .collect::<Result<_>>()?;
        if members.windows(2).any(|w| w[1] && !w[0]) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Smallest slack `Σ_F p - (n-1)/(N-1)` over facets; zero on the boundary.
pub fn boundary_slack(p: &ProbabilityVector<Rational>, n: usize) -> Result<Rational> {
    let f = existence_check(p, n)?;
    Ok(f.margin)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Signed;

    fn is_nonnegative_point(p: &[Rational]) -> bool {
        p.iter().all(|v| !v.is_negative())
    }
    use crate::variance::Verdict;

    #[test]
    fn vertex_examples() {
        let v = vertices(4, 2).unwrap();
        assert_eq!(v.len(), 8);
        assert_eq!(
            v[0].coords.weights(),
            &[ratio(0, 1), ratio(1, 3), ratio(1, 3), ratio(1, 3)]
        );
        assert_eq!(
            v[4].coords.weights(),
            &[ratio(1, 2), ratio(1, 6), ratio(1, 6), ratio(1, 6)]
        );
        assert_eq!(vertices(5, 4).unwrap().len(), 5);
        assert!(vertices(4, 4).is_err());
    }

    #[test]
    fn vertices_lie_on_a_facet() {
        for n_pop in 4..=7 {
            for n in 2..n_pop {
                for v in vertices(n_pop, n).unwrap() {
                    assert!(membership(&v.coords, n).unwrap());
                    assert_eq!(boundary_slack(&v.coords, n).unwrap(), Rational::zero());
                    assert!(is_nonnegative_point(v.coords.weights()));
                }
            }
        }
    }

    #[test]
    fn facet_examples() {
        let f = facets(4, 2).unwrap();
        assert_eq!(f.len(), 6);
        for facet in &f {
            assert_eq!(facet.vertex_set.len(), 4);
            assert_eq!(facet.vertex_set, predicted_facet_vertices(4, &facet.subset));
        }
        // strict inequality for p(i,1/n), i in F
        let verts = vertices(6, 3).unwrap();
        let subset = [0, 2, 4];
        let threshold = ratio(2, 5);
        for i in 0..6 {
            let s: Rational = subset.iter().map(|&j| &verts[6 + i].coords.weights()[j]).sum();
            if subset.contains(&i) {
                assert!(s > threshold);
            } else {
                assert_eq!(s, threshold);
            }
        }
        assert_eq!(facets(5, 4).unwrap().len(), 5);
    }

    #[test]
    fn adjacency_rules() {
        let v = |kind, i| vertex_point(6, 3, kind, i).unwrap();
        assert!(adjacent(&v(VertexKind::Zero, 0), &v(VertexKind::Zero, 1), 6, 3).unwrap());
        for n_pop in 4..8 {
            for n in 2..n_pop - 1 {
                let a = vertex_point(n_pop, n, VertexKind::Zero, 2).unwrap();
                let b = vertex_point(n_pop, n, VertexKind::OneOverN, 2).unwrap();
                assert!(!adjacent(&a, &b, n_pop, n).unwrap());
            }
        }
        let zero = |i| vertex_point(5, 4, VertexKind::Zero, i).unwrap();
        assert!(adjacent(&zero(0), &zero(3), 5, 4).unwrap());
        let one = vertex_point(5, 4, VertexKind::OneOverN, 1).unwrap();
        assert!(adjacent(&zero(0), &one, 5, 4).is_err());
    }

    #[test]
    fn cube_edge_count() {
        let edges = adjacency_edges(4, 2).unwrap();
        assert_eq!(edges.len(), 12);
        let mut degree = [0; 8];
        for (a, b) in &edges {
            degree[*a] += 1;
            degree[*b] += 1;
        }
        assert!(degree.iter().all(|&d| d == 3));
    }

    #[test]
    fn adjacency_matches_incidence_oracle() {
        for n_pop in 4..=7 {
            for n in 2..n_pop {
                assert_eq!(
                    adjacency_edges(n_pop, n).unwrap(),
                    adjacency_from_incidence(n_pop, n).unwrap(),
                    "N={n_pop} n={n}"
                );
            }
        }
    }

    #[test]
    fn vertex_spectra() {
        let z = vertex_point(5, 2, VertexKind::Zero, 4).unwrap();
        let r = vertex_spectral(5, 2, &z).unwrap();
        let want = [0.0, 1.0 / 12.0, 1.0 / 12.0, 1.0 / 12.0];
        for (a, b) in r.eigenvalues.iter().zip(want) {
            assert!((a - b).abs() < 1e-10);
        }
        let o = vertex_point(5, 2, VertexKind::OneOverN, 1).unwrap();
        let r = vertex_spectral(5, 2, &o).unwrap();
        assert!((r.eigenvalues[3] - 25.0 / 16.0).abs() < 1e-10);
        assert!(r.eigenvalues[0].abs() < 1e-10);
        let o = vertex_point(6, 3, VertexKind::OneOverN, 0).unwrap();
        let r = vertex_spectral(6, 3, &o).unwrap();
        assert!((r.eigenvalues[4] - 0.8).abs() < 1e-10);
        for e in &r.eigenvalues[..4] {
            assert!((e - 1.0 / 60.0).abs() < 1e-10);
        }
        assert_eq!(r.verdict, Verdict::Psd);
    }

    #[test]
    fn counterexample_small() {
        let c = boundary_counterexample(4).unwrap();
        assert_eq!(
            c.p.weights(),
            &[ratio(5, 12), ratio(1, 4), ratio(1, 4), ratio(1, 12)]
        );
        assert!(c.gamma.min_eigenvalue < 0.0);
        assert!((c.gamma.min_eigenvalue - c.closed_form_lambda).abs() < 1e-9);
        assert_eq!(c.psi.verdict, Verdict::Indefinite);
        let (_, b, _) = counterexample_quadratic(4);
        assert_eq!(b, ratio(-(64 + 160 - 160 + 24), 16 * 2 * 9));
        assert!(boundary_counterexample(3).is_err());
    }

    #[test]
    fn quadratic_discriminant_agrees() {
        for n_pop in 4..=12 {
            let (a, b, c) = counterexample_quadratic(n_pop);
            assert_eq!(&b * &b - rational::int(4) * a * c, counterexample_discriminant(n_pop));
            let n = n_pop as i64;
            assert_eq!(b, ratio(-(n.pow(3) + 10 * n * n - 40 * n + 24), 16 * (n - 2) * (n - 1).pow(2)));
        }
    }

    #[test]
    fn cone_vertex_examples() {
        let cone = cone_vertices(6, 3).unwrap();
        assert_eq!(cone[0].coords[0], Rational::zero());
        assert!(cone[0].coords[1..].iter().all(|v| *v == ratio(1, 5)));
        assert!(cone[5].coords.iter().all(|v| *v == ratio(1, 6)));
        assert_eq!(cone[4].a, ratio(2, 15));
        assert_eq!(cone[4].b, ratio(1, 3));
        for w in &cone {
            assert_eq!(w.coords.iter().sum::<Rational>(), Rational::one());
            assert!(w.coords.windows(2).all(|p| p[0] <= p[1]));
            if w.j < 6 {
                assert_eq!(w.coords[..3].iter().sum::<Rational>(), ratio(2, 5));
            }
        }
    }

    #[test]
    fn nesting_small() {
        assert!(nesting_check(4, 1000, 7).unwrap());
        assert!(nesting_check(5, 1000, 8).unwrap());
        assert!(nesting_check(3, 10, 0).is_err());
    }

    #[test]
    fn brute_force_small() {
        let found = brute_force_vertices(4, 2).unwrap();
        let mut expected: Vec<Vec<Rational>> = vertices(4, 2)
            .unwrap()
            .into_iter()
            .map(|v| v.coords.weights().to_vec())
            .collect();
        expected.sort();
        assert_eq!(found, expected);
    }
}
