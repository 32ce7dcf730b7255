//! Angular derivatives at boundary points and the essential-norm lower
//! bounds they produce.
//!
//! Polynomial symbols extend smoothly to the imaginary axis, so by the
//! Julia–Carathéodory theorem the angular derivative can be read off by
//! direct boundary evaluation of `φ_Q` and `φ_Q'` instead of fragile liminf
//! sampling: contact happens exactly when `Re φ_Q(iα)` meets the threshold,
//! and the derivative there is `c₀ + ψ_Q'(iα)`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::symbols::Symbol;

use super::{close, AngularCertificate, Config, Verdict};

/// Boundary evaluation of a projected symbol at `iα`.
#[derive(Debug, Clone, Serialize)]
pub struct AngularData {
    pub alpha: f64,
    pub boundary_value: Complex64,
    /// `Re φ_Q(iα) - threshold`; finite angular derivative iff this is ≤ tol.
    pub defect: f64,
    pub finite: bool,
    pub derivative: Option<Complex64>,
}

/// Evaluates `φ_Q` at the boundary point `iα` and, when the point is a
/// contact point, the angular derivative `c₀ + ψ_Q'(iα)`.
pub fn angular_derivative(phi_q: &Symbol, alpha: f64, nt_tol: f64) -> AngularData {
    let s = Complex64::new(0.0, alpha);
    let boundary_value = phi_q.evaluate(s);
    let defect = boundary_value.re - phi_q.threshold();
    let finite = defect <= nt_tol;
    let derivative = finite.then(|| phi_q.derivative_at(s));
    AngularData { alpha, boundary_value, defect, finite, derivative }
}

/// Essential-norm lower bound for `C_{φ₀} - C_{φ₁}` from first-order
/// boundary data of the projections onto a finite prime set.
///
/// Preconditions: equal characteristics, a finite angular derivative of
/// `φ₀_Q` at `iα`, and a single prime for characteristic zero. If the other
/// projection misses the contact, or its boundary value or derivative
/// disagrees, the pair cannot sit in one component and the bound
/// `φ₀_Q'(iα)^{-d/2}` applies (with an unspecified multiplicative constant
/// for characteristic zero); agreement of all first-order data is reported
/// as undecided.
pub fn essential_lower_bound_difference(
    phi0: &Symbol,
    phi1: &Symbol,
    primes: &[u64],
    alpha: f64,
    config: &Config,
) -> Result<Verdict> {
    if phi0.characteristic() != phi1.characteristic() {
        return Err(Error::CharacteristicMismatch(
            phi0.characteristic(),
            phi1.characteristic(),
        ));
    }
    let char0 = phi0.characteristic() == 0;
    if char0 && primes.len() != 1 {
        return Err(Error::Precondition(
            "zero-characteristic bounds need a single-prime projection".into(),
        ));
    }
    let p0 = phi0.project_q(primes)?;
    let p1 = phi1.project_q(primes)?;
    let base = angular_derivative(&p0, alpha, config.nt_tol);
    if !base.finite {
        return Err(Error::Precondition(format!(
            "projection of the first symbol has no finite angular derivative at i{alpha} \
             (defect {})",
            base.defect
        )));
    }
    let other = angular_derivative(&p1, alpha, config.nt_tol);

    let reason = if !other.finite {
        Some("second projection has no finite angular derivative at the point".to_string())
    } else if !close(other.boundary_value, base.boundary_value, config.eq_tol) {
        Some("boundary values of the projections differ".to_string())
    } else {
        let d0 = base.derivative.expect("finite");
        let d1 = other.derivative.expect("finite");
        if !close(d0, d1, config.eq_tol) {
            Some("angular derivatives of the projections differ".to_string())
        } else {
            None
        }
    };

    let Some(reason) = reason else {
        return Ok(Verdict::Undecided {
            why: "projections share first-order boundary data at the point".into(),
        });
    };

    let d = primes.len() as f64;
    let deriv = base.derivative.expect("finite").re;
    let (bound, scale, constant_known) = if char0 {
        (None, deriv.powf(-0.5), false)
    } else {
        let b = deriv.powf(-d / 2.0);
        (Some(b), b, true)
    };
    let criterion = if char0 {
        "first-order boundary data separates the single-prime projections \
         (constant unspecified in source)"
    } else {
        "first-order boundary data separates the projections"
    };
    Ok(Verdict::ObstructedComponent {
        criterion: criterion.into(),
        certificate: AngularCertificate {
            primes: primes.to_vec(),
            alpha,
            base,
            other,
            reason,
            bound,
            scale,
            constant_known,
        },
    })
}

/// Separation bound between characteristics: a zero-characteristic symbol
/// and a positive-characteristic one are at operator distance at least
/// `p^{-Re c₁}` apart, witnessed by the unit vector `p^{-s}` pushed to
/// `σ → ∞`, where the positive-characteristic image dies.
pub fn characteristic_separation(phi0: &Symbol, phi1: &Symbol, p: u64) -> Result<f64> {
    if phi0.characteristic() != 0 || phi1.characteristic() == 0 {
        return Err(Error::Precondition(
            "separation bound needs characteristics (0, >= 1)".into(),
        ));
    }
    if p < 2 {
        return Err(Error::Precondition("base must be at least 2".into()));
    }
    Ok((p as f64).powf(-phi0.c1().re))
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
    fn angular_derivative_examples() {
        let cfg = Config::default();
        let phi = sym(1, &[(1, 1.0), (2, -1.0)]);
        let data = angular_derivative(&phi, 0.0, cfg.nt_tol);
        assert!(data.finite);
        assert!(data.boundary_value.norm() < 1e-14);
        let d = data.derivative.unwrap();
        assert!((d - c(1.0 + std::f64::consts::LN_2, 0.0)).norm() < 1e-14);

        let affine = sym(1, &[(1, 1.0)]);
        let data = angular_derivative(&affine, 0.0, cfg.nt_tol);
        assert!(!data.finite);
        assert!((data.boundary_value - c(1.0, 0.0)).norm() < 1e-14);

        let identity = sym(1, &[]);
        for alpha in [0.0, 1.7, -2.4] {
            let data = angular_derivative(&identity, alpha, cfg.nt_tol);
            assert!(data.finite);
            assert!((data.derivative.unwrap() - c(1.0, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn angular_derivative_dominates_characteristic() {
        let cfg = Config::default();
        // At a contact point the derivative's real part is at least c0.
        for phi in [
            sym(1, &[(1, 1.0), (2, -1.0)]),
            sym(2, &[(1, 2.0), (2, -1.0), (3, -1.0)]),
            sym(1, &[(1, 3.0), (2, -4.0), (4, 1.0)]),
        ] {
            let data = angular_derivative(&phi, 0.0, cfg.nt_tol);
            assert!(data.finite);
            let d = data.derivative.unwrap();
            assert!(d.re >= phi.characteristic() as f64 - 1e-9);
        }
    }

    #[test]
    fn golden_pair_is_obstructed_with_known_bound() {
        let cfg = Config::default();
        let phi0 = sym(1, &[(1, 1.0), (2, -1.0)]);
        let phi1 = sym(1, &[(1, 1.0), (3, -1.0)]);
        let verdict = essential_lower_bound_difference(&phi0, &phi1, &[2], 0.0, &cfg).unwrap();
        match verdict {
            Verdict::ObstructedComponent { certificate, .. } => {
                let expected = (1.0 + std::f64::consts::LN_2).sqrt().recip();
                assert!((certificate.bound.unwrap() - expected).abs() < 1e-12);
                assert!(certificate.constant_known);
            }
            other => panic!("expected obstruction, got {other:?}"),
        }
    }

    #[test]
    fn identical_symbols_are_undecided() {
        let cfg = Config::default();
        let phi = sym(1, &[(1, 1.0), (2, -1.0)]);
        let verdict = essential_lower_bound_difference(&phi, &phi, &[2], 0.0, &cfg).unwrap();
        assert!(matches!(verdict, Verdict::Undecided { .. }));
    }

    #[test]
    fn zero_characteristic_variant() {
        let cfg = Config::default();
        let phi0 = sym(0, &[(1, 1.5), (2, -1.0)]);
        let phi1 = sym(0, &[(1, 1.5), (3, -1.0)]);
        let verdict = essential_lower_bound_difference(&phi0, &phi1, &[2], 0.0, &cfg).unwrap();
        match verdict {
            Verdict::ObstructedComponent { certificate, .. } => {
                assert!(certificate.bound.is_none());
                assert!(!certificate.constant_known);
                assert!((certificate.scale - std::f64::consts::LN_2.powf(-0.5)).abs() < 1e-12);
            }
            other => panic!("expected obstruction, got {other:?}"),
        }

        assert!(essential_lower_bound_difference(&phi0, &phi1, &[2, 3], 0.0, &cfg).is_err());
    }

    #[test]
    fn separation_bound() {
        let compactish = sym(0, &[(1, 0.75), (2, 0.125)]);
        let affine = sym(1, &[(1, 1.0)]);
        let b = characteristic_separation(&compactish, &affine, 2).unwrap();
        assert!((b - 2f64.powf(-0.75)).abs() < 1e-15);
        assert!((b - 0.5946).abs() < 1e-4);

        let one = Symbol::constant(c(1.0, 0.0), DEFAULT_TRUNCATION);
        let id = sym(1, &[]);
        assert!((characteristic_separation(&one, &id, 2).unwrap() - 0.5).abs() < 1e-15);

        assert!(characteristic_separation(&affine, &compactish, 2).is_err());
    }
}
