//! Compactness, linear-combination, connected-component and compact-
//! difference verdicts.
//!
//! The decision trees follow the settled classification: restricted range
//! always gives compactness; positive-characteristic polynomial symbols are
//! compact only with restricted range; zero-characteristic linear symbols
//! need restricted range or at least two generators; and among
//! zero-characteristic symbols of degree at most two only the single-prime
//! forms `c₁ + e q^{-s} + f q^{-2s}` (and single-generator linear symbols)
//! stay noncompact with unrestricted range. Everything else zero-
//! characteristic of higher degree is undecided.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::Serialize;

use crate::bohr::GeneratorSet;
use crate::error::{Error, Result};
use crate::numtheory;
use crate::symbols::{Symbol, SymbolClass, MAX_TORUS_DIM};

use super::boundary::{contact_order, gamma_set, same_boundary_data, BoundaryPoint, ContactOrder};
use super::{
    Config, ComponentCertificate, DifferenceCertificate, DifferenceObstruction,
    ObstructionCertificate, RangeCertificate, RatioTable, Verdict,
};

/// Outcome of the boundary-data comparison of a linear combination at one
/// contact point of the reference symbol.
#[derive(Debug, Clone, Serialize)]
pub struct LincombObstruction {
    pub theta: Vec<f64>,
    /// Indices whose lifts share second-order boundary data with index 0.
    pub j_set: Vec<usize>,
    pub lambda_sum: Complex64,
    pub obstructed: bool,
    pub generators: Vec<u64>,
}

/// The sorted primes dividing any supported index of any of the symbols.
pub(crate) fn union_prime_generators(symbols: &[Symbol]) -> Result<GeneratorSet> {
    let mut support = Vec::new();
    for s in symbols {
        support.extend(s.psi().support().into_iter().filter(|&n| n > 1));
    }
    let basis = numtheory::prime_basis(&support)?;
    GeneratorSet::new(basis)
}

/// Compactness of a single composition operator.
pub fn compactness_verdict(phi: &Symbol, config: &Config) -> Result<Verdict> {
    phi.require_membership()?;
    let range = phi.range_infimum(config.resolution, config.refine_tol)?;
    let class = phi.classify();
    let certificate = RangeCertificate {
        infimum: range.infimum,
        threshold: range.threshold,
        restricted: range.restricted,
        marginal: range.marginal,
        class: class.clone(),
    };
    if range.restricted {
        return Ok(Verdict::Compact { criterion: "restricted range".into(), certificate });
    }
    if phi.characteristic() >= 1 {
        return Ok(Verdict::NotCompact {
            criterion: "positive characteristic with unrestricted range".into(),
            certificate,
        });
    }
    match class {
        SymbolClass::Linear { ref generators } => {
            if generators.len() >= 2 {
                Ok(Verdict::Compact {
                    criterion: "zero characteristic, linear symbol with at least two generators"
                        .into(),
                    certificate,
                })
            } else {
                Ok(Verdict::NotCompact {
                    criterion:
                        "zero characteristic, linear symbol with one generator and unrestricted \
                         range"
                            .into(),
                    certificate,
                })
            }
        }
        SymbolClass::PolynomialDegreeLe2 => {
            if single_prime_power_support(phi) {
                Ok(Verdict::NotCompact {
                    criterion: "zero characteristic, degree-two symbol on powers of one prime \
                                with unrestricted range"
                        .into(),
                    certificate,
                })
            } else {
                Ok(Verdict::Compact {
                    criterion: "zero characteristic, degree at most two, support spread over \
                                several primes"
                        .into(),
                    certificate,
                })
            }
        }
        SymbolClass::GeneralPolynomial { .. } => Ok(Verdict::Undecided {
            why: "zero characteristic with degree at least three and unrestricted range is \
                  outside the settled classes"
                .into(),
        }),
    }
}

/// True iff the nonconstant support lies in `{q, q²}` for a single prime q.
fn single_prime_power_support(phi: &Symbol) -> bool {
    let support: Vec<u64> = phi.psi().support().into_iter().filter(|&n| n > 1).collect();
    if support.is_empty() {
        return false;
    }
    let Ok(basis) = numtheory::prime_basis(&support) else {
        return false;
    };
    basis.len() == 1
}

/// Second-order boundary-data comparison of `Σ λ_j C_{φ_j}` at a contact
/// point of the first symbol's lift. A nonzero coefficient sum over the
/// matching set rules out compactness of the combination.
pub fn lincomb_obstruction(
    symbols: &[Symbol],
    lambdas: &[Complex64],
    theta: &[f64],
    config: &Config,
) -> Result<LincombObstruction> {
    if symbols.is_empty() || symbols.len() != lambdas.len() {
        return Err(Error::Precondition("need matching nonempty symbols and coefficients".into()));
    }
    if symbols[0].characteristic() == 0 {
        return Err(Error::Precondition(
            "the reference symbol must have positive characteristic".into(),
        ));
    }
    let gens = union_prime_generators(symbols)?;
    if theta.len() != gens.dim() {
        return Err(Error::DimensionMismatch { expected: gens.dim(), got: theta.len() });
    }
    let lift0 = symbols[0].lift(&gens)?;
    let j0 = lift0.eval_torus(theta)?.re;
    if j0.abs() >= config.gamma_tol {
        return Err(Error::NotOnBoundary(j0));
    }
    let point = BoundaryPoint::from_theta(theta.to_vec(), &gens, j0);
    let mut j_set = Vec::new();
    for (j, s) in symbols.iter().enumerate() {
        if same_boundary_data(&symbols[0], s, &point, 2, &gens, config.eq_tol)? {
            j_set.push(j);
        }
    }
    let lambda_sum: Complex64 = j_set.iter().map(|&j| lambdas[j]).sum();
    Ok(LincombObstruction {
        theta: theta.to_vec(),
        obstructed: lambda_sum.norm() > config.eq_tol,
        j_set,
        lambda_sum,
        generators: gens.generators().to_vec(),
    })
}

/// Compactness of `Σ λ_j C_{φ_j}` for the settled symbol classes: all
/// polynomial of degree at most two, or all linear. In these classes the
/// combination is compact exactly when every single operator is.
pub fn lincomb_verdict(
    symbols: &[Symbol],
    lambdas: &[Complex64],
    config: &Config,
) -> Result<Verdict> {
    if symbols.is_empty() || symbols.len() != lambdas.len() {
        return Err(Error::Precondition("need matching nonempty symbols and coefficients".into()));
    }
    if lambdas.iter().any(|l| l.norm() == 0.0) {
        return Err(Error::ZeroCoefficient);
    }
    for i in 0..symbols.len() {
        for j in (i + 1)..symbols.len() {
            if symbols[i] == symbols[j] {
                return Err(Error::DuplicateSymbol);
            }
        }
    }
    for s in symbols {
        s.require_membership()?;
    }

    let all_deg2 = symbols.iter().all(|s| s.degree() <= 2);
    let all_linear = symbols
        .iter()
        .all(|s| matches!(s.classify(), SymbolClass::Linear { .. }));
    let any_positive = symbols.iter().any(|s| s.characteristic() >= 1);
    let theorem = if all_deg2 {
        Some("combination of polynomial symbols of degree at most two")
    } else if all_linear && any_positive {
        Some("combination of linear symbols with a positive characteristic present")
    } else if all_linear {
        Some("combination of linear symbols with zero characteristic")
    } else {
        None
    };
    let Some(theorem) = theorem else {
        return Ok(Verdict::Undecided {
            why: "some symbol is neither linear nor of degree at most two; the combination \
                  criteria do not apply"
                .into(),
        });
    };

    let mut first_certificate = None;
    for (j, s) in symbols.iter().enumerate() {
        match compactness_verdict(s, config)? {
            Verdict::Compact { certificate, .. } => {
                first_certificate.get_or_insert(certificate);
            }
            Verdict::NotCompact { certificate, .. } => {
                return Ok(Verdict::NotCompact {
                    criterion: format!("{theorem}: term {j} is not compact"),
                    certificate,
                });
            }
            _ => {
                return Ok(Verdict::Undecided {
                    why: format!("compactness of term {j} is undecided"),
                });
            }
        }
    }
    Ok(Verdict::Compact {
        criterion: format!("{theorem}: every term is compact"),
        certificate: first_certificate.expect("nonempty symbol list"),
    })
}

/// Per-sample statistics for a pair of symbols approaching the boundary.
struct PairSamples {
    sigma_levels: Vec<f64>,
    sigma_ratio_max: Vec<f64>,
    sigma_count: Vec<usize>,
    level_bounds: Vec<f64>,
    level_ratio_max: Vec<f64>,
    level_deriv_max: Vec<f64>,
    level_count: Vec<usize>,
    sup_psi: f64,
    sup_deriv_diff: f64,
    ratio_max: f64,
}

fn sample_resolution(d: usize) -> usize {
    match d {
        0 | 1 => 64,
        2 => 32,
        3 => 12,
        _ => 6,
    }
}

/// Evaluates the comparison functionals on a deterministic sample of the
/// polydisc shells `z(θ, σ) = (p_1^{-σ}e^{iθ_1}, …)`: a coarse θ-grid per σ
/// plus shells of radius `O(√σ)` around every boundary contact point, where
/// the suprema live.
fn sample_pair(phi0: &Symbol, phi1: &Symbol, config: &Config) -> Result<PairSamples> {
    let gens = union_prime_generators(&[phi0.clone(), phi1.clone()])?;
    let d = gens.dim();
    if d > MAX_TORUS_DIM {
        return Err(Error::DimensionGuard(d, MAX_TORUS_DIM));
    }
    let char0 = phi0.characteristic() == 0;
    let c0 = phi0.characteristic() as f64;
    let lift0 = phi0.lift(&gens)?;
    let lift1 = phi1.lift(&gens)?;
    let dlift0 = Symbol::new(phi0.characteristic(), phi0.psi().derivative()).lift(&gens)?;
    let dlift1 = Symbol::new(phi1.characteristic(), phi1.psi().derivative()).lift(&gens)?;

    let sigma_levels: Vec<f64> = (0..=12).map(|i| 10f64.powf(-(i as f64) * 0.5)).collect();
    let level_bounds: Vec<f64> = (1..=5).map(|i| 10f64.powf(-(i as f64))).collect();

    let mut gamma_points: Vec<Vec<f64>> = Vec::new();
    for phi in [phi0, phi1] {
        for pt in gamma_set(phi, &gens, config)? {
            gamma_points.push(pt.theta);
        }
    }
    let directions = super::boundary::sample_directions_pub(d, config.seed);
    let logs: Vec<f64> = gens.generators().iter().map(|&q| (q as f64).ln()).collect();

    let mut out = PairSamples {
        sigma_ratio_max: vec![0.0; sigma_levels.len()],
        sigma_count: vec![0; sigma_levels.len()],
        level_ratio_max: vec![0.0; level_bounds.len()],
        level_deriv_max: vec![0.0; level_bounds.len()],
        level_count: vec![0; level_bounds.len()],
        sigma_levels,
        level_bounds,
        sup_psi: 0.0,
        sup_deriv_diff: 0.0,
        ratio_max: 0.0,
    };

    let visit = |theta: &[f64], sigma: f64, sigma_idx: usize, out: &mut PairSamples| {
        let z: Vec<Complex64> = theta
            .iter()
            .zip(&logs)
            .map(|(&t, &lg)| Complex64::from_polar((-sigma * lg).exp(), t))
            .collect();
        let a0 = lift0.eval_polydisc(&z).expect("dim checked");
        let a1 = lift1.eval_polydisc(&z).expect("dim checked");
        let d0 = dlift0.eval_polydisc(&z).expect("dim checked");
        let d1 = dlift1.eval_polydisc(&z).expect("dim checked");
        out.sup_psi = out.sup_psi.max(a0.norm()).max(a1.norm());
        let deriv_diff = (d0 - d1).norm();
        out.sup_deriv_diff = out.sup_deriv_diff.max(deriv_diff);
        let denom = if char0 {
            let g0 = (a0.re - 0.5) / (a0 + 1.0).norm_sqr();
            let g1 = (a1.re - 0.5) / (a1 + 1.0).norm_sqr();
            g0.min(g1)
        } else {
            (c0 * sigma + a0.re).min(c0 * sigma + a1.re)
        };
        if denom <= 1e-15 {
            return;
        }
        let ratio = (a0 - a1).norm() / denom;
        out.ratio_max = out.ratio_max.max(ratio);
        out.sigma_ratio_max[sigma_idx] = out.sigma_ratio_max[sigma_idx].max(ratio);
        out.sigma_count[sigma_idx] += 1;
        for (i, &bound) in out.level_bounds.iter().enumerate() {
            if denom <= bound && denom > bound / 10.0 {
                out.level_ratio_max[i] = out.level_ratio_max[i].max(ratio);
                out.level_deriv_max[i] = out.level_deriv_max[i].max(deriv_diff);
                out.level_count[i] += 1;
                break;
            }
        }
    };

    let res = sample_resolution(d);
    let step = TAU / res as f64;
    let sigmas = out.sigma_levels.clone();
    for (si, &sigma) in sigmas.iter().enumerate() {
        // Coarse grid.
        let mut idx = vec![0usize; d.max(1)];
        if d == 0 {
            visit(&[], sigma, si, &mut out);
            continue;
        }
        'grid: loop {
            let theta: Vec<f64> = idx.iter().map(|&k| k as f64 * step).collect();
            visit(&theta, sigma, si, &mut out);
            let mut l = d;
            while l > 0 {
                l -= 1;
                idx[l] += 1;
                if idx[l] < res {
                    continue 'grid;
                }
                idx[l] = 0;
            }
            break;
        }
        // Shrinking shells around the contact points.
        let root = sigma.sqrt();
        for theta0 in &gamma_points {
            for mult in [0.5, 1.0, 2.0, 4.0] {
                let r = (mult * root).min(std::f64::consts::PI);
                for u in &directions {
                    let theta: Vec<f64> = theta0
                        .iter()
                        .zip(u)
                        .map(|(&t, &du)| (t + r * du).rem_euclid(TAU))
                        .collect();
                    visit(&theta, sigma, si, &mut out);
                }
            }
        }
    }
    Ok(out)
}

fn ratio_table(levels: &[f64], maxima: &[f64], counts: &[usize]) -> RatioTable {
    RatioTable {
        levels: levels.to_vec(),
        max_ratio: maxima.to_vec(),
        samples: counts.to_vec(),
    }
}

/// Sufficient condition for `C_{φ₀}` and `C_{φ₁}` to share a connected
/// component: the difference stays dominated by the distance to the boundary
/// (measured by `min Re φ` for positive characteristic and by
/// `min (Re φ - 1/2)/|1 + φ|²` for characteristic zero) with `ψ` and the
/// derivative difference bounded. Boundedness is certified by the sampled
/// suprema staying flat across two decades of σ; growth means no verdict.
pub fn same_component_check(phi0: &Symbol, phi1: &Symbol, config: &Config) -> Result<Verdict> {
    if phi0.characteristic() != phi1.characteristic() {
        return Err(Error::CharacteristicMismatch(
            phi0.characteristic(),
            phi1.characteristic(),
        ));
    }
    phi0.require_membership()?;
    phi1.require_membership()?;
    let samples = sample_pair(phi0, phi1, config)?;
    let table = ratio_table(&samples.sigma_levels, &samples.sigma_ratio_max, &samples.sigma_count);
    let constant = samples
        .ratio_max
        .max(samples.sup_psi)
        .max(samples.sup_deriv_diff);
    let at = |target: f64| -> f64 {
        samples
            .sigma_levels
            .iter()
            .position(|&s| (s - target).abs() < target * 0.01)
            .map(|i| samples.sigma_ratio_max[i])
            .unwrap_or(0.0)
    };
    let fine = at(1e-6);
    let mid = at(1e-4);
    if fine <= 1.25 * mid + 1e-9 {
        Ok(Verdict::SameComponentSufficient {
            criterion: "difference dominated by the boundary distance with bounded symbol and \
                        derivative data"
                .into(),
            certificate: ComponentCertificate {
                constant,
                sup_psi: samples.sup_psi,
                sup_derivative_difference: samples.sup_deriv_diff,
                ratio_by_sigma: table,
            },
        })
    } else {
        Ok(Verdict::Undecided {
            why: format!(
                "domination ratio grows toward the boundary: max {fine:.6} at sigma 1e-6 \
                 vs {mid:.6} at 1e-4"
            ),
        })
    }
}

/// Decides compactness of `C_{φ₀} - C_{φ₁}`.
///
/// Order of attack: identical symbols; both (or exactly one) compact; the
/// settled combination classes; then, for positive characteristic, the
/// boundary-data obstruction over the contact sets, contact orders, and the
/// vanishing-ratio sufficiency test.
pub fn compact_difference_check(phi0: &Symbol, phi1: &Symbol, config: &Config) -> Result<Verdict> {
    if phi0.characteristic() != phi1.characteristic() {
        return Err(Error::CharacteristicMismatch(
            phi0.characteristic(),
            phi1.characteristic(),
        ));
    }
    phi0.require_membership()?;
    phi1.require_membership()?;
    if phi0 == phi1 {
        return Ok(Verdict::CompactDifference {
            criterion: "identical symbols give the zero operator".into(),
            certificate: DifferenceCertificate {
                ratio_by_level: None,
                derivative_by_level: None,
                gamma_points: Vec::new(),
                contact_orders: Vec::new(),
                note: "trivial difference".into(),
            },
        });
    }

    let v0 = compactness_verdict(phi0, config)?;
    let v1 = compactness_verdict(phi1, config)?;
    let compact0 = matches!(v0, Verdict::Compact { .. });
    let compact1 = matches!(v1, Verdict::Compact { .. });
    let noncompact0 = matches!(v0, Verdict::NotCompact { .. });
    let noncompact1 = matches!(v1, Verdict::NotCompact { .. });
    if compact0 && compact1 {
        return Ok(Verdict::CompactDifference {
            criterion: "both operators are compact".into(),
            certificate: DifferenceCertificate {
                ratio_by_level: None,
                derivative_by_level: None,
                gamma_points: Vec::new(),
                contact_orders: Vec::new(),
                note: format!("criteria: {} / {}", v0.criterion(), v1.criterion()),
            },
        });
    }
    if (compact0 && noncompact1) || (compact1 && noncompact0) {
        let odd = if compact0 { 1 } else { 0 };
        return Ok(Verdict::NotCompactDifference {
            criterion: "exactly one operator is compact".into(),
            certificate: DifferenceObstruction::TheoremClass {
                class: "difference against a compact operator".into(),
                noncompact_terms: vec![odd],
            },
        });
    }

    // Settled combination classes decide the difference outright.
    let all_deg2 = phi0.degree() <= 2 && phi1.degree() <= 2;
    let all_linear = matches!(phi0.classify(), SymbolClass::Linear { .. })
        && matches!(phi1.classify(), SymbolClass::Linear { .. });
    if (all_deg2 || all_linear) && (noncompact0 || noncompact1) {
        let class = if all_deg2 {
            "difference of degree-at-most-two symbols"
        } else {
            "difference of linear symbols"
        };
        let mut terms = Vec::new();
        if noncompact0 {
            terms.push(0);
        }
        if noncompact1 {
            terms.push(1);
        }
        return Ok(Verdict::NotCompactDifference {
            criterion: format!("{class}: compact only when every term is compact"),
            certificate: DifferenceObstruction::TheoremClass {
                class: class.into(),
                noncompact_terms: terms,
            },
        });
    }

    let char_positive = phi0.characteristic() >= 1;
    let gens = union_prime_generators(&[phi0.clone(), phi1.clone()])?;

    let mut gamma_points: Vec<BoundaryPoint> = Vec::new();
    let mut contact_orders: Vec<String> = Vec::new();
    let mut all_order_two = true;
    if char_positive {
        let gamma0 = gamma_set(phi0, &gens, config)?;
        let gamma1 = gamma_set(phi1, &gens, config)?;

        // The boundary-data obstruction: reference symbol first.
        for pt in &gamma0 {
            let obs = lincomb_obstruction(
                &[phi0.clone(), phi1.clone()],
                &[Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)],
                &pt.theta,
                config,
            )?;
            if obs.obstructed {
                return Ok(not_compact_from_obstruction(obs));
            }
        }
        for pt in &gamma1 {
            let obs = lincomb_obstruction(
                &[phi1.clone(), phi0.clone()],
                &[Complex64::new(-1.0, 0.0), Complex64::new(1.0, 0.0)],
                &pt.theta,
                config,
            )?;
            if obs.obstructed {
                return Ok(not_compact_from_obstruction(obs));
            }
        }

        for (phi, gamma) in [(phi0, &gamma0), (phi1, &gamma1)] {
            for pt in gamma.iter() {
                let report = contact_order(phi, pt, &gens, config)?;
                if report.order != ContactOrder::Even(2) {
                    all_order_two = false;
                }
                contact_orders.push(report.order.to_string());
            }
        }
        gamma_points = gamma0;
        gamma_points.extend(gamma1);
    }

    // Vanishing-ratio test on nested sublevel samples.
    let samples = sample_pair(phi0, phi1, config)?;
    let nonempty: Vec<usize> = (0..samples.level_bounds.len())
        .filter(|&i| samples.level_count[i] > 0)
        .collect();
    let o_pass = if nonempty.len() < 3 {
        false
    } else {
        let coarsest = samples.level_ratio_max[nonempty[0]];
        let finest = samples.level_ratio_max[*nonempty.last().unwrap()];
        let deriv_coarse = samples.level_deriv_max[nonempty[0]];
        let deriv_fine = samples.level_deriv_max[*nonempty.last().unwrap()];
        let ratio_ok = finest <= config.o_tol && (finest <= 0.5 * coarsest || coarsest < 1e-12);
        let deriv_ok = deriv_fine <= (0.5 * deriv_coarse).max(1e-9);
        ratio_ok && deriv_ok
    };

    let certificate = DifferenceCertificate {
        ratio_by_level: Some(ratio_table(
            &samples.level_bounds,
            &samples.level_ratio_max,
            &samples.level_count,
        )),
        derivative_by_level: Some(ratio_table(
            &samples.level_bounds,
            &samples.level_deriv_max,
            &samples.level_count,
        )),
        gamma_points: gamma_points.iter().map(|p| p.theta.clone()).collect(),
        contact_orders,
        note: if all_order_two && char_positive {
            "order-2 contact everywhere; boundary data agree through order 2 on the sampled \
             contact set"
                .into()
        } else {
            "contact orders above 2 present or zero characteristic; verdict rests on the \
             sampled vanishing ratio"
                .into()
        },
    };

    if o_pass {
        Ok(Verdict::CompactDifference {
            criterion: if all_order_two && char_positive {
                "order-2 contact with matching second-order boundary data and vanishing \
                 domination ratio"
                    .into()
            } else {
                "difference vanishes against the boundary-distance functional on all sampled \
                 sublevels"
                    .into()
            },
            certificate,
        })
    } else {
        Ok(Verdict::Undecided {
            why: format!(
                "no obstruction found, but the sampled ratio does not certify vanishing: \
                 levels {:?} maxima {:?}",
                samples.level_bounds, samples.level_ratio_max
            ),
        })
    }
}

fn not_compact_from_obstruction(obs: LincombObstruction) -> Verdict {
    Verdict::NotCompactDifference {
        criterion: "second-order boundary data differ at a shared contact point".into(),
        certificate: DifferenceObstruction::BoundaryPoint(ObstructionCertificate {
            theta: obs.theta,
            j_set: obs.j_set,
            lambda_sum: obs.lambda_sum,
            generators: obs.generators,
        }),
    }
}
