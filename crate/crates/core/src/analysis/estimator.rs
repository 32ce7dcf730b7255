//! Empirical essential-norm estimation along kernel test sequences.
//!
//! For normalized kernels `k_w = K_w/‖K_w‖` marching to the boundary, the
//! squared distance `‖C*_{φ₀}k_w - C*_{φ₁}k_w‖²` expands into closed-form
//! norms and inner products of the adjoint images, and its limsup lower-
//! bounds the squared essential norm of the difference.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{adjoint_image, kernel_inner, kernel_norm_sq, KernelSequencePlan};
use crate::symbols::Symbol;

/// One estimator evaluation.
#[derive(Debug, Clone, Serialize)]
pub struct EstimatorRow {
    pub k: u64,
    pub re_s: f64,
    pub norm_sq: f64,
    pub value: f64,
}

/// Estimator summary: a subsampled table plus the tail average.
#[derive(Debug, Clone, Serialize)]
pub struct EssentialNormEstimate {
    pub table: Vec<EstimatorRow>,
    /// Average of the values over the last tenth of the sequence.
    pub limit_estimate: f64,
    pub tail_start_k: u64,
    pub count: usize,
}

/// The squared normalized adjoint distance at a single sequence index.
pub fn estimator_value(
    phi0: &Symbol,
    phi1: &Symbol,
    plan: &KernelSequencePlan,
    k: u64,
) -> Result<(f64, f64)> {
    let source = plan.family.with_w(plan.w_at(k));
    let source_norm_sq = kernel_norm_sq(&source)?;
    let img0 = adjoint_image(phi0, &source)?;
    let img1 = adjoint_image(phi1, &source)?;
    let n0 = kernel_norm_sq(&img0)?;
    let n1 = kernel_norm_sq(&img1)?;
    let cross = kernel_inner(&img0, &img1).map_err(|e| match e {
        Error::FamilyMismatch => Error::UnsupportedPairing(
            "adjoint images live in different kernel families".into(),
        ),
        other => other,
    })?;
    let value = ((n0 + n1 - 2.0 * cross.re) / source_norm_sq).max(0.0);
    Ok((source_norm_sq, value))
}

/// Runs the whole plan and reports a subsampled table (at most 256 rows,
/// geometrically spaced) together with the tail average as the limit
/// estimate.
pub fn empirical_essential_norm(
    phi0: &Symbol,
    phi1: &Symbol,
    plan: &KernelSequencePlan,
) -> Result<EssentialNormEstimate> {
    if phi0.characteristic() != phi1.characteristic() {
        return Err(Error::CharacteristicMismatch(
            phi0.characteristic(),
            phi1.characteristic(),
        ));
    }
    let ks: Vec<u64> = plan.points().collect();
    if ks.is_empty() {
        return Ok(EssentialNormEstimate {
            table: Vec::new(),
            limit_estimate: 0.0,
            tail_start_k: 0,
            count: 0,
        });
    }
    let tail_len = (ks.len() / 10).max(1);
    let tail_start = ks.len() - tail_len;

    // Geometric subsampling for the table; every index still contributes to
    // the tail average.
    let mut keep: Vec<u64> = Vec::new();
    let mut next = ks[0] as f64;
    for &k in &ks {
        if k as f64 >= next {
            keep.push(k);
            next = (k as f64 * 1.05).max(k as f64 + 1.0);
        }
    }
    if *keep.last().unwrap() != *ks.last().unwrap() {
        keep.push(*ks.last().unwrap());
    }

    let mut table = Vec::with_capacity(keep.len().min(256));
    let mut tail_sum = 0.0;
    let mut kept_iter = keep.iter().peekable();
    for (i, &k) in ks.iter().enumerate() {
        let needed_for_table = kept_iter.peek() == Some(&&k);
        let in_tail = i >= tail_start;
        if !needed_for_table && !in_tail {
            continue;
        }
        let (norm_sq, value) = estimator_value(phi0, phi1, plan, k)?;
        if in_tail {
            tail_sum += value;
        }
        if needed_for_table {
            kept_iter.next();
            if table.len() < 256 {
                table.push(EstimatorRow { k, re_s: plan.path.point(k).re, norm_sq, value });
            }
        }
    }
    Ok(EssentialNormEstimate {
        table,
        limit_estimate: tail_sum / tail_len as f64,
        tail_start_k: ks[tail_start],
        count: ks.len(),
    })
}
