//! Executable criteria for compactness, compact differences, and connected
//! components of composition operators.
//!
//! Everything here returns a [`Verdict`] carrying a machine-checkable
//! certificate: a boundary point with derivative values, an essential-norm
//! lower bound, or the sampled ratio tables behind a sufficiency check.
//! Classes the theory leaves open come back as [`Verdict::Undecided`], never
//! as a guess.

mod angular;
mod boundary;
mod estimator;
mod forms;
mod verdicts;

pub use angular::{angular_derivative, characteristic_separation, essential_lower_bound_difference, AngularData};
pub use boundary::{
    boundary_data, contact_order, gamma_set, same_boundary_data, BoundaryData, BoundaryPoint,
    ContactOrder, ContactReport,
};
pub use estimator::{empirical_essential_norm, estimator_value, EssentialNormEstimate};
pub use forms::{boundary_forms, quadratic_sweep_is_nonzero, BoundaryForms};
pub use verdicts::{
    compact_difference_check, compactness_verdict, lincomb_obstruction, lincomb_verdict,
    same_component_check, LincombObstruction,
};

use num_complex::Complex64;
use serde::Serialize;

/// Tolerance and sampling configuration, echoed into every report so a run
/// can be reproduced bit for bit.
#[derive(Debug, Clone, Serialize)]
pub struct Config {
    /// Membership threshold for the boundary contact set Γ.
    pub gamma_tol: f64,
    /// Relative tolerance for comparing boundary data.
    pub eq_tol: f64,
    /// Finest-level ceiling for the vanishing-ratio (little-o) verdict.
    pub o_tol: f64,
    /// Contact tolerance for finite angular derivatives.
    pub nt_tol: f64,
    /// Value tolerance of the torus descent refinement.
    pub refine_tol: f64,
    /// Grid resolution per angle; `None` picks the per-dimension default.
    pub resolution: Option<usize>,
    /// Seed for the deterministic direction samples.
    pub seed: u64,
    /// Largest contact order probed before reporting "higher than checked".
    pub max_contact_order: u32,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            gamma_tol: 1e-8,
            eq_tol: 1e-9,
            o_tol: 1e-2,
            nt_tol: 1e-7,
            refine_tol: 1e-9,
            resolution: None,
            seed: 0x5EED_D1CE,
            max_contact_order: 8,
        }
    }
}

/// Complex numbers are relatively close when their difference is small
/// against 1 and against both magnitudes.
pub(crate) fn close(a: Complex64, b: Complex64, eq_tol: f64) -> bool {
    (a - b).norm() <= eq_tol * 1.0f64.max(a.norm()).max(b.norm())
}

/// Certificate for a plain compactness verdict: the range analysis that
/// matched the criterion.
#[derive(Debug, Clone, Serialize)]
pub struct RangeCertificate {
    pub infimum: f64,
    pub threshold: f64,
    pub restricted: bool,
    pub marginal: bool,
    pub class: crate::symbols::SymbolClass,
}

/// Certificate for an essential-norm obstruction between two operators.
#[derive(Debug, Clone, Serialize)]
pub struct AngularCertificate {
    pub primes: Vec<u64>,
    pub alpha: f64,
    pub base: AngularData,
    pub other: AngularData,
    pub reason: String,
    /// `φ₀'(iα)^{-d/2}` when the constant is known (positive characteristic);
    /// otherwise `None` and `scale` carries `φ₀'(iα)^{-1/2}` with the
    /// multiplicative constant left symbolic.
    pub bound: Option<f64>,
    pub scale: f64,
    pub constant_known: bool,
}

/// Certificate for a linear-combination obstruction at a boundary point.
#[derive(Debug, Clone, Serialize)]
pub struct ObstructionCertificate {
    pub theta: Vec<f64>,
    pub j_set: Vec<usize>,
    pub lambda_sum: Complex64,
    pub generators: Vec<u64>,
}

/// Why a difference fails to be compact: a concrete boundary point with
/// mismatched data, or membership in a class where the difference is compact
/// only when each term is.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "type")]
pub enum DifferenceObstruction {
    BoundaryPoint(ObstructionCertificate),
    TheoremClass { class: String, noncompact_terms: Vec<usize> },
}

/// Per-level maxima backing a sufficiency or vanishing-ratio verdict.
#[derive(Debug, Clone, Serialize)]
pub struct RatioTable {
    /// Level labels: σ values or min-Re decades, smallest last.
    pub levels: Vec<f64>,
    pub max_ratio: Vec<f64>,
    pub samples: Vec<usize>,
}

/// Certificate for a same-component sufficiency verdict.
#[derive(Debug, Clone, Serialize)]
pub struct ComponentCertificate {
    pub constant: f64,
    pub sup_psi: f64,
    pub sup_derivative_difference: f64,
    pub ratio_by_sigma: RatioTable,
}

/// Certificate for a compact-difference verdict.
#[derive(Debug, Clone, Serialize)]
pub struct DifferenceCertificate {
    /// Ratio maxima binned by decades of the boundary-distance functional.
    pub ratio_by_level: Option<RatioTable>,
    pub derivative_by_level: Option<RatioTable>,
    pub gamma_points: Vec<Vec<f64>>,
    pub contact_orders: Vec<String>,
    pub note: String,
}

/// Structured outcome of a compactness / component / difference decision.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind")]
pub enum Verdict {
    Compact { criterion: String, certificate: RangeCertificate },
    NotCompact { criterion: String, certificate: RangeCertificate },
    CompactDifference { criterion: String, certificate: DifferenceCertificate },
    NotCompactDifference { criterion: String, certificate: DifferenceObstruction },
    SameComponentSufficient { criterion: String, certificate: ComponentCertificate },
    ObstructedComponent { criterion: String, certificate: AngularCertificate },
    Undecided { why: String },
}

impl Verdict {
    pub fn kind(&self) -> &'static str {
        match self {
            Verdict::Compact { .. } => "compact",
            Verdict::NotCompact { .. } => "not_compact",
            Verdict::CompactDifference { .. } => "compact_difference",
            Verdict::NotCompactDifference { .. } => "not_compact_difference",
            Verdict::SameComponentSufficient { .. } => "same_component_sufficient",
            Verdict::ObstructedComponent { .. } => "obstructed_component",
            Verdict::Undecided { .. } => "undecided",
        }
    }

    pub fn criterion(&self) -> &str {
        match self {
            Verdict::Compact { criterion, .. }
            | Verdict::NotCompact { criterion, .. }
            | Verdict::CompactDifference { criterion, .. }
            | Verdict::NotCompactDifference { criterion, .. }
            | Verdict::SameComponentSufficient { criterion, .. }
            | Verdict::ObstructedComponent { criterion, .. } => criterion,
            Verdict::Undecided { why } => why,
        }
    }

    fn certificate_json(&self) -> serde_json::Value {
        match self {
            Verdict::Compact { certificate, .. } | Verdict::NotCompact { certificate, .. } => {
                serde_json::to_value(certificate).expect("serializable certificate")
            }
            Verdict::CompactDifference { certificate, .. } => {
                serde_json::to_value(certificate).expect("serializable certificate")
            }
            Verdict::NotCompactDifference { certificate, .. } => {
                serde_json::to_value(certificate).expect("serializable certificate")
            }
            Verdict::SameComponentSufficient { certificate, .. } => {
                serde_json::to_value(certificate).expect("serializable certificate")
            }
            Verdict::ObstructedComponent { certificate, .. } => {
                serde_json::to_value(certificate).expect("serializable certificate")
            }
            Verdict::Undecided { why } => serde_json::json!({ "why": why }),
        }
    }

    /// The published report shape: verdict kind, matched criterion, the
    /// certificate, and the tolerances it was decided under.
    pub fn to_report_json(&self, config: &Config) -> serde_json::Value {
        serde_json::json!({
            "verdict": self.kind(),
            "criterion": self.criterion(),
            "certificate": self.certificate_json(),
            "tolerances": serde_json::to_value(config).expect("serializable config"),
        })
    }
}
