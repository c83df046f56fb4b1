//! The analysis report behind `swor analyze`.
//!
//! JSON is the canonical form; CSV and plain text are flat views of the same
//! data. Exact quantities are written as `"num/den"` strings. Labels in the
//! report are one based.

use std::fmt::Write as _;

use serde::Serialize;

use crate::design::{existence_check, AffineDesign, ProbabilityVector};
use crate::error::Result;
use crate::input::PopulationFile;
use crate::rational::{self, Rational};
use crate::variance::{
    gamma_matrix, normalize_witness, psi_matrix, sufficient_condition, symmetric_eigenvalues,
    variance_with_replacement, variance_without_replacement, Guarantee, PopulationValues,
    SpectralReport, Verdict,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputEcho {
    pub p: Vec<String>,
    pub n: usize,
    pub x: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Arithmetic {
    /// Feasibility, coefficients and pmfs.
    pub design: &'static str,
    /// Eigenvalues and variances.
    pub spectra: &'static str,
    /// Relative PSD tolerance as requested.
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilitySection {
    pub feasible: bool,
    pub smallest_sum: String,
    pub threshold: String,
    pub margin: String,
    pub subset: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SufficientSection {
    pub guarantee: Guarantee,
    pub two_smallest_sum: String,
    pub threshold: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MatrixKind {
    Psi,
    Gamma,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsdSection {
    /// Ψ when every weight is positive, otherwise Γ.
    pub matrix: MatrixKind,
    pub verdict: Verdict,
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Variances {
    pub with_replacement: f64,
    pub without_replacement: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    /// Eigenvector of Ψ's most negative eigenvalue, largest entry scaled to 1.
    pub x: Vec<f64>,
    /// Present when the design exists.
    pub variances: Option<Variances>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub input: InputEcho,
    pub arithmetic: Arithmetic,
    pub feasibility: FeasibilitySection,
    pub sufficient_condition: SufficientSection,
    /// `P[I_i = u, I_j = v]`, present when the design exists.
    pub bivariate_marginals: Option<Vec<Vec<String>>>,
    pub psi: Option<SpectralReport>,
    pub gamma: SpectralReport,
    pub psd: PsdSection,
    /// For the supplied `x`, when the design exists and every weight is positive.
    pub variances: Option<Variances>,
    pub witness: Option<Witness>,
}

fn variances(x: &[f64], design: &AffineDesign<f64>) -> Result<Variances> {
    let pv = PopulationValues::new(x.to_vec(), design.p().clone())?;
    Ok(Variances {
        with_replacement: variance_with_replacement(&pv, design.n_sample())?,
        without_replacement: variance_without_replacement(&pv, design)?,
    })
}

/// Builds the report. An infeasible design is not an error: the report says
/// so and omits the design-dependent sections.
pub fn analyze(p: &[Rational], n: usize, x: Option<Vec<f64>>, tol: f64) -> Result<AnalysisReport> {
    let pv = ProbabilityVector::new(p.to_vec())?;
    let check = existence_check(&pv, n)?;
    let sufficient = sufficient_condition(&pv);
    let positive = p.iter().all(|w| *w > Rational::from_integer(0.into()));

    let exact_design = if check.feasible {
        Some(AffineDesign::new(pv.clone(), n)?)
    } else {
        None
    };
    let float_design = match &exact_design {
        Some(_) => Some(AffineDesign::new(pv.to_float(), n)?),
        None => None,
    };

    let psi = if positive {
        Some(symmetric_eigenvalues(&psi_matrix(&pv)?, tol)?)
    } else {
        None
    };
    let gamma = symmetric_eigenvalues(&gamma_matrix(&pv), tol)?;
    let governing = psi.as_ref().unwrap_or(&gamma);
    let psd = PsdSection {
        matrix: if psi.is_some() { MatrixKind::Psi } else { MatrixKind::Gamma },
        verdict: governing.verdict,
        min_eigenvalue: governing.min_eigenvalue,
    };

    let supplied = match (&x, &float_design, positive) {
        (Some(x), Some(d), true) => Some(variances(x, d)?),
        _ => None,
    };
    let witness = match psi.as_ref().and_then(|r| r.witness.as_ref()) {
        Some(w) if psd.verdict == Verdict::Indefinite => {
            let x = normalize_witness(w);
            let variances = match &float_design {
                Some(d) => Some(variances(&x, d)?),
                None => None,
            };
            Some(Witness { x, variances })
        }
        _ => None,
    };

    Ok(AnalysisReport {
        input: InputEcho {
            p: p.iter().map(rational::format).collect(),
            n,
            x,
        },
        arithmetic: Arithmetic {
            design: "exact-rational",
            spectra: "f64",
            tolerance: tol,
        },
        feasibility: FeasibilitySection {
            feasible: check.feasible,
            smallest_sum: rational::format(&check.sum),
            threshold: rational::format(&check.threshold),
            margin: rational::format(&check.margin),
            subset: check.subset.iter().map(|l| l + 1).collect(),
        },
        sufficient_condition: SufficientSection {
            guarantee: sufficient.guarantee,
            two_smallest_sum: rational::format(&sufficient.two_smallest_sum),
            threshold: rational::format(&sufficient.threshold),
        },
        bivariate_marginals: exact_design.map(|d| {
            d.bivariate_matrix()
                .iter()
                .map(|row| row.iter().map(rational::format).collect())
                .collect()
        }),
        psi,
        gamma,
        psd,
        variances: supplied,
        witness,
    })
}

/// Convenience wrapper over a parsed file; `n` and `x` from the command line
/// take precedence over the file.
pub fn analyze_file(
    file: &PopulationFile,
    n: Option<usize>,
    x: Option<Vec<f64>>,
    tol: f64,
) -> Result<AnalysisReport> {
    let n = n.or(file.n).ok_or_else(|| crate::error::Error::Parse {
        field: "n".into(),
        message: "sample size missing from both the file and the command line".into(),
    })?;
    analyze(&file.p, n, x.or_else(|| file.x.clone()), tol)
}

fn join<T: ToString>(v: &[T], sep: &str) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(sep)
}

fn label(v: impl Serialize) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default()
}

impl AnalysisReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Flat `key,value` rows; vectors are `;` separated.
    pub fn to_csv(&self) -> String {
        let mut rows: Vec<(String, String)> = vec![
            ("p".into(), join(&self.input.p, ";")),
            ("n".into(), self.input.n.to_string()),
            ("design_arithmetic".into(), self.arithmetic.design.into()),
            ("spectra_arithmetic".into(), self.arithmetic.spectra.into()),
            ("tolerance".into(), self.arithmetic.tolerance.to_string()),
            ("feasible".into(), self.feasibility.feasible.to_string()),
            ("smallest_sum".into(), self.feasibility.smallest_sum.clone()),
            ("threshold".into(), self.feasibility.threshold.clone()),
            ("margin".into(), self.feasibility.margin.clone()),
            ("subset".into(), join(&self.feasibility.subset, ";")),
            ("sufficient_condition".into(), label(self.sufficient_condition.guarantee)),
            ("psd_matrix".into(), label(self.psd.matrix)),
            ("psd_verdict".into(), label(self.psd.verdict)),
            ("min_eigenvalue".into(), self.psd.min_eigenvalue.to_string()),
            ("gamma_eigenvalues".into(), join(&self.gamma.eigenvalues, ";")),
        ];
        if let Some(psi) = &self.psi {
            rows.push(("psi_eigenvalues".into(), join(&psi.eigenvalues, ";")));
        }
        if let Some(m) = &self.bivariate_marginals {
            let flat: Vec<String> = m.iter().map(|r| join(r, " ")).collect();
            rows.push(("bivariate_marginals".into(), flat.join(";")));
        }
        if let Some(v) = &self.variances {
            rows.push(("var_with".into(), v.with_replacement.to_string()));
            rows.push(("var_without".into(), v.without_replacement.to_string()));
        }
        if let Some(w) = &self.witness {
            rows.push(("witness_x".into(), join(&w.x, ";")));
            if let Some(v) = &w.variances {
                rows.push(("witness_var_with".into(), v.with_replacement.to_string()));
                rows.push(("witness_var_without".into(), v.without_replacement.to_string()));
            }
        }
        let mut out = String::from("key,value\n");
        for (k, v) in rows {
            let _ = writeln!(out, "{k},{v}");
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let f = &self.feasibility;
        let _ = writeln!(out, "population size  {}", self.input.p.len());
        let _ = writeln!(out, "sample size      {}", self.input.n);
        let _ = writeln!(
            out,
            "arithmetic       design {}, spectra {}, tolerance {}",
            self.arithmetic.design, self.arithmetic.spectra, self.arithmetic.tolerance
        );
        let _ = writeln!(
            out,
            "feasible         {} (smallest sum {} vs threshold {}, margin {}, labels {})",
            f.feasible,
            f.smallest_sum,
            f.threshold,
            f.margin,
            join(&f.subset, " ")
        );
        let _ = writeln!(
            out,
            "sufficient       {} (two smallest {} vs {})",
            label(self.sufficient_condition.guarantee),
            self.sufficient_condition.two_smallest_sum,
            self.sufficient_condition.threshold
        );
        if let Some(psi) = &self.psi {
            let _ = writeln!(out, "psi spectrum     {}", join(&psi.eigenvalues, " "));
        }
        let _ = writeln!(out, "gamma spectrum   {}", join(&self.gamma.eigenvalues, " "));
        let _ = writeln!(
            out,
            "verdict          {} on {} (min eigenvalue {})",
            label(self.psd.verdict),
            label(self.psd.matrix),
            self.psd.min_eigenvalue
        );
        if let Some(m) = &self.bivariate_marginals {
            let _ = writeln!(out, "bivariate marginals");
            for row in m {
                let _ = writeln!(out, "  {}", join(row, "  "));
            }
        }
        if let Some(v) = &self.variances {
            let _ = writeln!(
                out,
                "variance         with {}  without {}",
                v.with_replacement, v.without_replacement
            );
        }
        if let Some(w) = &self.witness {
            let _ = writeln!(out, "witness x        {}", join(&w.x, " "));
            if let Some(v) = &w.variances {
                let _ = writeln!(
                    out,
                    "witness variance with {}  without {}",
                    v.with_replacement, v.without_replacement
                );
            }
        }
        out
    }
}
