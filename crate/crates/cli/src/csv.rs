//! Deterministic CSV emission with ten significant digits and `\n` endings.

use std::fmt::Write as _;

use dircomp_core::analysis::estimator_value;
use dircomp_core::kernels::{kernel_sequence, sequence_ratio, KernelSequencePlan};
use dircomp_core::symbols::Symbol;
use dircomp_core::Result;

/// Ten significant digits in scientific notation.
pub fn sig10(x: f64) -> String {
    format!("{x:.9e}")
}

/// Norm table: `k, Re s_k, norm², norm²·σ^d`.
pub fn kernel_table(plan: &KernelSequencePlan) -> Result<String> {
    let mut out = String::from("k,re_s,norm_sq,ratio\n");
    for row in kernel_sequence(plan)? {
        let sigma = plan.path.point(row.k).re;
        let ratio = sequence_ratio(plan, row.k, row.norm_sq);
        let _ = writeln!(out, "{},{},{},{}", row.k, sig10(sigma), sig10(row.norm_sq), sig10(ratio));
    }
    Ok(out)
}

/// Estimator table: `k, Re s_k, norm², estimator value` for a symbol pair.
pub fn estimator_table(
    plan: &KernelSequencePlan,
    phi0: &Symbol,
    phi1: &Symbol,
) -> Result<String> {
    let mut out = String::from("k,re_s,norm_sq,estimate\n");
    for k in plan.points() {
        let (norm_sq, value) = estimator_value(phi0, phi1, plan, k)?;
        let sigma = plan.path.point(k).re;
        let _ = writeln!(out, "{k},{},{},{}", sig10(sigma), sig10(norm_sq), sig10(value));
    }
    Ok(out)
}
