//! First- and second-order boundary forms of a lifted symbol at the point
//! `(1, …, 1)`, in the scaled coordinates used by the obstruction machinery,
//! plus the nonvanishing sweep that extracts coefficients from kernel
//! limits.

use num_complex::Complex64;
use serde::Serialize;

use crate::bohr::GeneratorSet;
use crate::error::Result;
use crate::symbols::Symbol;

/// Forms of the expansion `ℬψ(z) = A + Σ B_l (z_l - 1) + Σ C_{lm}(z_l - 1)
/// (z_m - 1) + o(‖z - e‖²)` in log-scaled coordinates: the linear form is
/// `L(x) = Σ B_l log(p_l) x_l`, and the quadratic one is
/// `Q(x) = ½ Σ B_l log²(p_l) x_l² + Σ_{l≤m} C_{lm} log(p_l) log(p_m) x_l x_m`.
#[derive(Debug, Clone, Serialize)]
pub struct BoundaryForms {
    pub value: Complex64,
    linear: Vec<Complex64>,
    /// Symmetric matrix `M` with `Q(x) = xᵀ M x`.
    quadratic: Vec<Vec<Complex64>>,
}

impl BoundaryForms {
    pub fn dim(&self) -> usize {
        self.linear.len()
    }

    pub fn eval_linear(&self, x: &[f64]) -> Complex64 {
        self.linear
            .iter()
            .zip(x)
            .map(|(&b, &xi)| b * xi)
            .sum()
    }

    pub fn eval_quadratic(&self, x: &[f64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (l, row) in self.quadratic.iter().enumerate() {
            for (m, &entry) in row.iter().enumerate() {
                acc += entry * x[l] * x[m];
            }
        }
        acc
    }

    /// Equality as polynomials (coefficientwise).
    pub fn same_linear(&self, other: &Self, tol: f64) -> bool {
        self.linear.len() == other.linear.len()
            && self
                .linear
                .iter()
                .zip(&other.linear)
                .all(|(&a, &b)| super::close(a, b, tol))
    }

    pub fn same_quadratic(&self, other: &Self, tol: f64) -> bool {
        self.quadratic.len() == other.quadratic.len()
            && self
                .quadratic
                .iter()
                .zip(&other.quadratic)
                .all(|(ra, rb)| ra.iter().zip(rb).all(|(&a, &b)| super::close(a, b, tol)))
    }
}

/// Extracts the boundary forms of `ℬψ` at `(1, …, 1)` over the given
/// generators (taken as primes `p_l` for the log scaling).
pub fn boundary_forms(phi: &Symbol, generators: &GeneratorSet) -> Result<BoundaryForms> {
    let lift = phi.lift(generators)?;
    let d = lift.dim();
    let e = vec![Complex64::new(1.0, 0.0); d];
    let value = lift.eval_polydisc(&e)?;
    let logs: Vec<f64> = generators.generators().iter().map(|&q| (q as f64).ln()).collect();

    let mut linear = vec![Complex64::new(0.0, 0.0); d];
    let mut quadratic = vec![vec![Complex64::new(0.0, 0.0); d]; d];
    for l in 0..d {
        let mut a1 = vec![0u32; d];
        a1[l] = 1;
        let b_l = lift.partial_derivative(&a1)?.eval_polydisc(&e)?;
        linear[l] = b_l * logs[l];

        let mut a2 = vec![0u32; d];
        a2[l] = 2;
        let c_ll = lift.partial_derivative(&a2)?.eval_polydisc(&e)? * 0.5;
        quadratic[l][l] = (b_l * 0.5 + c_ll) * logs[l] * logs[l];

        for m in (l + 1)..d {
            let mut am = vec![0u32; d];
            am[l] = 1;
            am[m] = 1;
            let c_lm = lift.partial_derivative(&am)?.eval_polydisc(&e)?;
            let half = c_lm * logs[l] * logs[m] * 0.5;
            quadratic[l][m] = half;
            quadratic[m][l] = half;
        }
    }
    Ok(BoundaryForms { value, linear, quadratic })
}

/// Checks that `M ↦ Σ_{j,j'} λ_j conj(λ_{j'}) / (Mα + μ_j + conj(μ_{j'}))^d`
/// is nonzero somewhere on the sweep. Vanishing identically forces every
/// `λ_j` to vanish when the `μ_j` are pairwise distinct, which is what the
/// obstruction extraction relies on.
pub fn quadratic_sweep_is_nonzero(
    lambdas: &[Complex64],
    mus: &[Complex64],
    alpha: f64,
    d: u32,
    m_sweep: &[f64],
) -> bool {
    for &m in m_sweep {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, &lj) in lambdas.iter().enumerate() {
            for (jp, &ljp) in lambdas.iter().enumerate() {
                let denom = Complex64::new(m * alpha, 0.0) + mus[j] + mus[jp].conj();
                acc += lj * ljp.conj() / denom.powu(d);
            }
        }
        if acc.norm() > 1e-12 {
            return true;
        }
    }
    false
}
