//! Boundary contact sets, boundary data, and contact orders.
//!
//! For a symbol with positive characteristic the contact set of the lift
//! `F = ℬψ` is `Γ(F) = {z ∈ 𝕋^d : Re F(z) = 0}`; for characteristic zero the
//! defect is measured against the threshold 1/2 instead, so reports stay
//! meaningful across both cases.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::Serialize;

use crate::bohr::{GeneratorSet, MultivariatePolynomial};
use crate::error::{Error, Result};
use crate::symbols::{default_resolution, Symbol, MAX_TORUS_DIM};
use crate::util::{symmetric_eigenvalues, SplitMix64};

use super::{close, Config};

/// A torus point in (or near) the boundary contact set of a lift.
#[derive(Debug, Clone, Serialize)]
pub struct BoundaryPoint {
    pub theta: Vec<f64>,
    pub z: Vec<Complex64>,
    pub generators: Vec<u64>,
    /// `Re ℬψ(z) - threshold` at the point.
    pub defect: f64,
}

impl BoundaryPoint {
    pub fn from_theta(theta: Vec<f64>, generators: &GeneratorSet, defect: f64) -> Self {
        let z = theta.iter().map(|&t| Complex64::from_polar(1.0, t)).collect();
        Self { theta, z, generators: generators.generators().to_vec(), defect }
    }
}

/// Value and partial derivatives of a lift at a torus point.
#[derive(Debug, Clone, Serialize)]
pub struct BoundaryData {
    pub value: Complex64,
    /// `∂_α ℬψ(z)` for every multi-index with `1 ≤ |α| ≤ order`.
    pub partials: BTreeMap<Vec<u32>, Complex64>,
    pub order: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ContactOrder {
    Even(u32),
    HigherThanChecked,
}

impl std::fmt::Display for ContactOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ContactOrder::Even(n) => write!(f, "{n}"),
            ContactOrder::HigherThanChecked => write!(f, "higher-than-checked"),
        }
    }
}

/// Certified vanishing rate `J_φ(θ) ≥ c‖θ - θ⁰‖^{2n}` near a contact point.
#[derive(Debug, Clone, Serialize)]
pub struct ContactReport {
    pub point: BoundaryPoint,
    pub order: ContactOrder,
    pub constant: f64,
    pub neighborhood_radius: f64,
    /// Hessian of `J_φ` at the point, with its eigenvalues; present whenever
    /// the dimension allows the exact order-2 certificate.
    pub hessian: Vec<Vec<f64>>,
    pub hessian_eigenvalues: Vec<f64>,
}

fn torus_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = (x - y).rem_euclid(TAU);
            d.min(TAU - d).powi(2)
        })
        .sum::<f64>()
        .sqrt()
}

fn normalize_angle(t: f64) -> f64 {
    let mut t = t.rem_euclid(TAU);
    if TAU - t < 1e-9 {
        t = 0.0;
    }
    t
}

/// `J(θ) = Re ℬψ(e^{iθ}) - threshold`, the boundary defect of the lift.
fn defect(lift: &MultivariatePolynomial, threshold: f64, theta: &[f64]) -> f64 {
    lift.eval_torus(theta).expect("dimension checked").re - threshold
}

/// The boundary contact set of `ℬψ` over the given generators: clustered
/// global minima of the defect, each refined by descent and kept when the
/// refined defect clears `gamma_tol`. Continuous contact families collapse
/// to their lexicographically smallest sampled representative.
pub fn gamma_set(
    phi: &Symbol,
    generators: &GeneratorSet,
    config: &Config,
) -> Result<Vec<BoundaryPoint>> {
    let lift = phi.lift(generators)?;
    let d = lift.dim();
    if d > MAX_TORUS_DIM {
        return Err(Error::DimensionGuard(d, MAX_TORUS_DIM));
    }
    let threshold = phi.threshold();
    if d == 0 {
        let j = defect(&lift, threshold, &[]);
        return Ok(if j.abs() < config.gamma_tol {
            vec![BoundaryPoint::from_theta(Vec::new(), generators, j)]
        } else {
            Vec::new()
        });
    }
    let resolution = config.resolution.unwrap_or_else(|| default_resolution(d));
    let step = TAU / resolution as f64;

    // Safe slack: within one grid cell of a true minimum the defect can rise
    // by at most ~ sup|J''| step², and Σ|c| |α|₁² bounds the curvature.
    let curvature: f64 = lift
        .terms()
        .map(|(alpha, c)| c.norm() * (alpha.iter().sum::<u32>() as f64).powi(2))
        .sum();
    let slack = 2.0 * curvature * step * step + config.gamma_tol;

    let values = grid_values(&lift, threshold, resolution, d);
    let candidates = grid_local_minima(&values, resolution, d, slack);

    // Refine each candidate by the same descent the optimizer uses.
    let mut refined: Vec<Vec<f64>> = Vec::new();
    for idx in candidates {
        let theta0: Vec<f64> = idx.iter().map(|&k| k as f64 * step).collect();
        let (value, theta) = descend_defect(&lift, threshold, theta0, step, config.refine_tol);
        if value < config.gamma_tol {
            refined.push(theta.into_iter().map(normalize_angle).collect());
        }
    }
    refined.sort_by(|a, b| a.partial_cmp(b).expect("finite angles"));

    // Greedy chain clustering: anything within a few grid cells of an
    // existing cluster joins it; the representative is the lexicographically
    // smallest member, i.e. the first inserted.
    let merge_radius = 2.5 * step;
    let mut clusters: Vec<Vec<Vec<f64>>> = Vec::new();
    for theta in refined {
        match clusters
            .iter_mut()
            .find(|cl| cl.iter().any(|m| torus_distance(m, &theta) < merge_radius))
        {
            Some(cl) => cl.push(theta),
            None => clusters.push(vec![theta]),
        }
    }
    let mut points: Vec<BoundaryPoint> = clusters
        .into_iter()
        .map(|cl| {
            let rep = cl.into_iter().next().expect("nonempty cluster");
            let j = defect(&lift, threshold, &rep);
            BoundaryPoint::from_theta(rep, generators, j)
        })
        .collect();
    points.sort_by(|a, b| a.theta.partial_cmp(&b.theta).expect("finite angles"));
    Ok(points)
}

fn grid_values(
    lift: &MultivariatePolynomial,
    threshold: f64,
    resolution: usize,
    d: usize,
) -> Vec<f64> {
    let step = TAU / resolution as f64;
    let terms: Vec<(Vec<u32>, Complex64)> = lift.terms().map(|(a, c)| (a.to_vec(), c)).collect();
    let tables: Vec<Vec<Vec<Complex64>>> = terms
        .iter()
        .map(|(alpha, _)| {
            alpha
                .iter()
                .map(|&a| {
                    (0..resolution)
                        .map(|k| Complex64::from_polar(1.0, a as f64 * k as f64 * step))
                        .collect()
                })
                .collect()
        })
        .collect();
    let total = resolution.pow(d as u32);
    let mut values = vec![0.0f64; total];
    let mut idx = vec![0usize; d];
    for flat in 0..total {
        let mut re = -threshold;
        for (t, (_, c)) in terms.iter().enumerate() {
            let mut z = *c;
            for (l, &k) in idx.iter().enumerate() {
                z *= tables[t][l][k];
            }
            re += z.re;
        }
        values[flat] = re;
        let mut l = d;
        while l > 0 {
            l -= 1;
            idx[l] += 1;
            if idx[l] < resolution {
                break;
            }
            idx[l] = 0;
        }
    }
    values
}

fn grid_local_minima(values: &[f64], resolution: usize, d: usize, slack: f64) -> Vec<Vec<usize>> {
    let global_min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let cut = global_min + slack;
    let strides: Vec<usize> = (0..d).rev().scan(1usize, |acc, _| {
        let s = *acc;
        *acc *= resolution;
        Some(s)
    }).collect::<Vec<_>>().into_iter().rev().collect();
    let unflatten = |mut flat: usize| {
        let mut idx = vec![0usize; d];
        for l in 0..d {
            idx[l] = flat / strides[l];
            flat %= strides[l];
        }
        idx
    };
    let mut out = Vec::new();
    'points: for (flat, &v) in values.iter().enumerate() {
        if v > cut {
            continue;
        }
        let idx = unflatten(flat);
        // Compare against the 2d axis neighbors (wrapping).
        for l in 0..d {
            for dir in [-1isize, 1] {
                let mut nb = idx.clone();
                nb[l] = ((nb[l] as isize + dir).rem_euclid(resolution as isize)) as usize;
                let nb_flat: usize = nb.iter().zip(&strides).map(|(&i, &s)| i * s).sum();
                if values[nb_flat] < v - 1e-15 {
                    continue 'points;
                }
            }
        }
        out.push(idx);
    }
    out
}

fn descend_defect(
    lift: &MultivariatePolynomial,
    threshold: f64,
    mut theta: Vec<f64>,
    initial_step: f64,
    refine_tol: f64,
) -> (f64, Vec<f64>) {
    let mut value = defect(lift, threshold, &theta);
    let mut h = initial_step;
    while h > 1e-13 {
        let mut improved = false;
        for l in 0..theta.len() {
            for dir in [-1.0, 1.0] {
                let mut cand = theta.clone();
                cand[l] = (cand[l] + dir * h).rem_euclid(TAU);
                let v = defect(lift, threshold, &cand);
                if v < value - refine_tol * 1e-3 {
                    theta = cand;
                    value = v;
                    improved = true;
                }
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    (value, theta)
}

/// Exact value and partials of `ℬψ` at a torus point through the given order.
pub fn boundary_data(
    phi: &Symbol,
    point: &BoundaryPoint,
    order: u8,
    generators: &GeneratorSet,
) -> Result<BoundaryData> {
    if !(1..=2).contains(&order) {
        return Err(Error::Precondition(format!(
            "boundary data is defined through order 1 or 2, got {order}"
        )));
    }
    let lift = phi.lift(generators)?;
    let d = lift.dim();
    if point.theta.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: point.theta.len() });
    }
    let z: Vec<Complex64> = point.theta.iter().map(|&t| Complex64::from_polar(1.0, t)).collect();
    let value = lift.eval_polydisc(&z)?;
    let mut partials = BTreeMap::new();
    for alpha in multi_indices(d, order as u32) {
        let deriv = lift.partial_derivative(&alpha)?;
        partials.insert(alpha, deriv.eval_polydisc(&z)?);
    }
    Ok(BoundaryData { value, partials, order })
}

/// All multi-indices with `1 ≤ |α| ≤ order`, ascending lexicographically.
fn multi_indices(d: usize, order: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut current = vec![0u32; d];
    loop {
        let total: u32 = current.iter().sum();
        if (1..=order).contains(&total) {
            out.push(current.clone());
        }
        let mut l = d;
        loop {
            if l == 0 {
                out.sort();
                return out;
            }
            l -= 1;
            current[l] += 1;
            if current[l] <= order {
                break;
            }
            current[l] = 0;
        }
    }
}

/// Componentwise comparison of boundary data through the given order.
pub fn same_boundary_data(
    phi0: &Symbol,
    phi1: &Symbol,
    point: &BoundaryPoint,
    order: u8,
    generators: &GeneratorSet,
    eq_tol: f64,
) -> Result<bool> {
    let a = boundary_data(phi0, point, order, generators)?;
    let b = boundary_data(phi1, point, order, generators)?;
    if !close(a.value, b.value, eq_tol) {
        return Ok(false);
    }
    for (alpha, va) in &a.partials {
        let vb = b.partials.get(alpha).copied().unwrap_or(Complex64::new(0.0, 0.0));
        if !close(*va, vb, eq_tol) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Hessian of `θ ↦ Re ℬψ(e^{iθ})` at a torus point, from exact z-partials:
/// the diagonal entry is `Re(-z_l ∂_l F - z_l² ∂_l² F)` and the off-diagonal
/// one is `-Re(z_l z_m ∂_l ∂_m F)`.
pub fn defect_hessian(
    phi: &Symbol,
    point: &BoundaryPoint,
    generators: &GeneratorSet,
) -> Result<Vec<Vec<f64>>> {
    let lift = phi.lift(generators)?;
    let d = lift.dim();
    let z: Vec<Complex64> = point.theta.iter().map(|&t| Complex64::from_polar(1.0, t)).collect();
    let mut h = vec![vec![0.0f64; d]; d];
    for l in 0..d {
        let mut alpha1 = vec![0u32; d];
        alpha1[l] = 1;
        let d1 = lift.partial_derivative(&alpha1)?.eval_polydisc(&z)?;
        let mut alpha2 = vec![0u32; d];
        alpha2[l] = 2;
        let d2 = lift.partial_derivative(&alpha2)?.eval_polydisc(&z)?;
        h[l][l] = (-(z[l] * d1) - z[l] * z[l] * d2).re;
        for m in (l + 1)..d {
            let mut alpha = vec![0u32; d];
            alpha[l] = 1;
            alpha[m] = 1;
            let dm = lift.partial_derivative(&alpha)?.eval_polydisc(&z)?;
            let v = (-(z[l] * z[m] * dm)).re;
            h[l][m] = v;
            h[m][l] = v;
        }
    }
    Ok(h)
}

/// Deterministic unit directions: axis vectors, sign diagonals, and a few
/// seeded samples.
pub(super) fn sample_directions_pub(d: usize, seed: u64) -> Vec<Vec<f64>> {
    sample_directions(d, seed)
}

fn sample_directions(d: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut dirs = Vec::new();
    for l in 0..d {
        for s in [1.0, -1.0] {
            let mut u = vec![0.0; d];
            u[l] = s;
            dirs.push(u);
        }
    }
    if d > 1 {
        let scale = 1.0 / (d as f64).sqrt();
        for mask in 0..(1u32 << d) {
            let u: Vec<f64> = (0..d)
                .map(|l| if mask >> l & 1 == 1 { -scale } else { scale })
                .collect();
            dirs.push(u);
        }
        let mut rng = SplitMix64::new(seed);
        for _ in 0..16 {
            let mut u: Vec<f64> = (0..d).map(|_| rng.next_in(-1.0, 1.0)).collect();
            let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-3 {
                u.iter_mut().for_each(|x| *x /= norm);
                dirs.push(u);
            }
        }
    }
    dirs
}

/// Finds the smallest even order `2n ≤ max_order` such that the defect
/// dominates `c‖θ - θ⁰‖^{2n}` on sampled shells around the point, with the
/// order-2 case certified exactly through the Hessian's eigenvalues.
pub fn contact_order(
    phi: &Symbol,
    point: &BoundaryPoint,
    generators: &GeneratorSet,
    config: &Config,
) -> Result<ContactReport> {
    let lift = phi.lift(generators)?;
    let threshold = phi.threshold();
    let j0 = defect(&lift, threshold, &point.theta);
    if j0.abs() >= config.gamma_tol {
        return Err(Error::NotOnBoundary(j0));
    }
    let d = lift.dim();
    let hessian = defect_hessian(phi, point, generators)?;
    let eigenvalues = symmetric_eigenvalues(&hessian);
    let hess_scale = eigenvalues.iter().fold(1.0f64, |m, &e| m.max(e.abs()));
    let positive_definite =
        d > 0 && eigenvalues.first().copied().unwrap_or(0.0) > 1e-9 * hess_scale;

    let directions = sample_directions(d, config.seed);
    let eval_shells = |order: u32| -> Option<(f64, f64, f64)> {
        // Higher orders push J below the float noise floor on tight shells,
        // so widen them: shells are 10^{-base}, spaced by a half decade.
        let radii: [f64; 3] = if order <= 4 {
            [1e-1, 1e-2, 1e-3]
        } else {
            [10f64.powf(-0.5), 1e-1, 10f64.powf(-1.5)]
        };
        let mut mins = [f64::INFINITY; 3];
        for (i, &r) in radii.iter().enumerate() {
            for u in &directions {
                let theta: Vec<f64> = point
                    .theta
                    .iter()
                    .zip(u)
                    .map(|(&t, &du)| t + r * du)
                    .collect();
                let j = defect(&lift, threshold, &theta).max(0.0);
                mins[i] = mins[i].min(j / r.powi(order as i32));
            }
        }
        let coarse = mins[0];
        let fine = mins[2];
        let c = mins.iter().copied().fold(f64::INFINITY, f64::min);
        if c > 0.0 && fine >= 0.1 * coarse {
            Some((c, coarse, fine))
        } else {
            None
        }
    };

    if positive_definite {
        let (constant, radius) = match eval_shells(2) {
            Some((c, _, _)) => (c, 1e-1),
            None => (eigenvalues[0] / 4.0, 1e-3),
        };
        return Ok(ContactReport {
            point: point.clone(),
            order: ContactOrder::Even(2),
            constant,
            neighborhood_radius: radius,
            hessian,
            hessian_eigenvalues: eigenvalues,
        });
    }

    let mut order = 2;
    while order <= config.max_contact_order {
        if order == 2 && !positive_definite {
            order += 2;
            continue;
        }
        if let Some((c, _, _)) = eval_shells(order) {
            return Ok(ContactReport {
                point: point.clone(),
                order: ContactOrder::Even(order),
                constant: c,
                neighborhood_radius: if order <= 4 { 1e-1 } else { 10f64.powf(-0.5) },
                hessian,
                hessian_eigenvalues: eigenvalues,
            });
        }
        order += 2;
    }
    Ok(ContactReport {
        point: point.clone(),
        order: ContactOrder::HigherThanChecked,
        constant: 0.0,
        neighborhood_radius: 1e-1,
        hessian,
        hessian_eigenvalues: eigenvalues,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirichlet::{DirichletPolynomial, DEFAULT_TRUNCATION};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sym(c0: u32, terms: &[(u64, f64)]) -> Symbol {
        Symbol::new(
            c0,
            DirichletPolynomial::from_terms(
                terms.iter().map(|&(n, x)| (n, c(x, 0.0))),
                DEFAULT_TRUNCATION,
            ),
        )
    }

    #[test]
    fn gamma_set_single_prime() {
        let phi = sym(1, &[(1, 1.0), (2, -1.0)]);
        let gens = GeneratorSet::primes(1);
        let pts = gamma_set(&phi, &gens, &Config::default()).unwrap();
        assert_eq!(pts.len(), 1);
        assert!(pts[0].theta[0].abs() < 1e-6);
    }

    #[test]
    fn gamma_set_two_primes() {
        let phi = sym(1, &[(1, 2.0), (2, -1.0), (3, -1.0)]);
        let gens = GeneratorSet::primes(2);
        let pts = gamma_set(&phi, &gens, &Config::default()).unwrap();
        assert_eq!(pts.len(), 1);
        assert!(pts[0].theta.iter().all(|t| t.abs() < 1e-6));
    }

    #[test]
    fn gamma_set_empty_for_restricted_range() {
        let phi = sym(0, &[(1, 0.75), (2, 0.125)]);
        let gens = GeneratorSet::primes(1);
        let pts = gamma_set(&phi, &gens, &Config::default()).unwrap();
        assert!(pts.is_empty());
    }

    #[test]
    fn gamma_set_lattice_translates() {
        // 1 - 4^{-s} over the prime 2: 1 - z² vanishes at θ = 0 and θ = π.
        let phi = sym(1, &[(1, 1.0), (4, -1.0)]);
        let gens = GeneratorSet::primes(1);
        let pts = gamma_set(&phi, &gens, &Config::default()).unwrap();
        assert_eq!(pts.len(), 2);
        assert!(pts[0].theta[0].abs() < 1e-6);
        assert!((pts[1].theta[0] - std::f64::consts::PI).abs() < 1e-6);
    }

    #[test]
    fn boundary_data_of_perturbations() {
        let gens = GeneratorSet::primes(1);
        let point = BoundaryPoint::from_theta(vec![0.0], &gens, 0.0);

        let base = sym(1, &[(1, 1.0), (2, -1.0)]);
        let data = boundary_data(&base, &point, 2, &gens).unwrap();
        assert!(data.value.norm() < 1e-14);
        assert!((data.partials[&vec![1]] - c(-1.0, 0.0)).norm() < 1e-14);
        assert!(data.partials[&vec![2]].norm() < 1e-14);

        let cube = base.perturb_power(3, 0.1).unwrap();
        let data_cube = boundary_data(&cube, &point, 2, &gens).unwrap();
        assert!(data_cube.value.norm() < 1e-14);
        assert!((data_cube.partials[&vec![1]] - c(-1.0, 0.0)).norm() < 1e-14);
        assert!(data_cube.partials[&vec![2]].norm() < 1e-14);

        let square = base.perturb_power(2, 0.1).unwrap();
        let data_sq = boundary_data(&square, &point, 2, &gens).unwrap();
        assert!((data_sq.partials[&vec![2]] - c(0.2, 0.0)).norm() < 1e-14);

        let cfg = Config::default();
        assert!(same_boundary_data(&base, &cube, &point, 2, &gens, cfg.eq_tol).unwrap());
        assert!(!same_boundary_data(&base, &square, &point, 2, &gens, cfg.eq_tol).unwrap());
        assert!(same_boundary_data(&base, &base, &point, 2, &gens, cfg.eq_tol).unwrap());
    }

    #[test]
    fn contact_order_quadratic_cases() {
        let cfg = Config::default();
        let gens = GeneratorSet::primes(1);
        let phi = sym(1, &[(1, 1.0), (2, -1.0)]);
        let pts = gamma_set(&phi, &gens, &cfg).unwrap();
        let report = contact_order(&phi, &pts[0], &gens, &cfg).unwrap();
        assert_eq!(report.order, ContactOrder::Even(2));
        assert!((report.hessian[0][0] - 1.0).abs() < 1e-9);

        let gens2 = GeneratorSet::primes(2);
        let phi2 = sym(1, &[(1, 2.0), (2, -1.0), (3, -1.0)]);
        let pts2 = gamma_set(&phi2, &gens2, &cfg).unwrap();
        let report2 = contact_order(&phi2, &pts2[0], &gens2, &cfg).unwrap();
        assert_eq!(report2.order, ContactOrder::Even(2));
        assert!((report2.hessian[0][0] - 1.0).abs() < 1e-9);
        assert!((report2.hessian[1][1] - 1.0).abs() < 1e-9);
        assert!(report2.hessian[0][1].abs() < 1e-12);
    }

    #[test]
    fn contact_order_degenerate_quartic() {
        // ψ = 3 - 4·2^{-s} + 4^{-s} lifts to 3 - 4z + z², whose boundary
        // defect is 3 - 4cosθ + cos2θ = 2(1 - cosθ)² ~ θ⁴/2: a quartic touch
        // with singular Hessian.
        let cfg = Config::default();
        let gens = GeneratorSet::primes(1);
        let phi = sym(1, &[(1, 3.0), (2, -4.0), (4, 1.0)]);
        let pts = gamma_set(&phi, &gens, &cfg).unwrap();
        assert_eq!(pts.len(), 1);
        let report = contact_order(&phi, &pts[0], &gens, &cfg).unwrap();
        assert_eq!(report.order, ContactOrder::Even(4));
        assert!(report.hessian_eigenvalues[0].abs() < 1e-9);
        assert!((report.constant - 0.5).abs() < 0.2);

        // With the probe capped at order 2 the same point is inconclusive.
        let shallow = Config { max_contact_order: 2, ..cfg };
        let report = contact_order(&phi, &pts[0], &gens, &shallow).unwrap();
        assert_eq!(report.order, ContactOrder::HigherThanChecked);
    }

    #[test]
    fn contact_requires_boundary_point() {
        let cfg = Config::default();
        let gens = GeneratorSet::primes(1);
        let phi = sym(1, &[(1, 1.0), (2, -1.0)]);
        let off = BoundaryPoint::from_theta(vec![1.0], &gens, 0.0);
        assert!(matches!(
            contact_order(&phi, &off, &gens, &cfg),
            Err(Error::NotOnBoundary(_))
        ));
    }
}
