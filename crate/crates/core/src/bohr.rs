//! Bohr lifts: the change of variables `n^{-s} ↦ z^α` sending a Dirichlet
//! polynomial to a polynomial on the polydisc `𝔻^d`.
//!
//! A lift needs a compatible generator set: every supported index must be a
//! product of nonnegative integer powers of the generators. Incompatibility
//! is an error here, never a silent projection; projecting onto a prime set
//! is a separate, named operation on symbols.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::dirichlet::DirichletPolynomial;
use crate::error::{Error, Result};
use crate::numtheory;

/// First `d` primes, enough for every lift in this crate.
const SMALL_PRIMES: [u64; 20] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71,
];

/// A list of multiplicatively independent integers ≥ 2 serving as the lift
/// basis (default: the first `d` primes).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorSet {
    generators: Vec<u64>,
}

impl GeneratorSet {
    pub fn new(generators: Vec<u64>) -> Result<Self> {
        if generators.iter().any(|&q| q < 2) || !numtheory::is_mult_independent(&generators)? {
            return Err(Error::DependentGenerators);
        }
        Ok(Self { generators })
    }

    /// The first `d` primes.
    pub fn primes(d: usize) -> Self {
        assert!(d <= SMALL_PRIMES.len(), "prime table exhausted");
        Self { generators: SMALL_PRIMES[..d].to_vec() }
    }

    /// The smallest initial segment of the primes compatible with `f`
    /// (ignoring the constant term).
    pub fn primes_for(f: &DirichletPolynomial) -> Result<Self> {
        let mut largest = 0u64;
        for (n, _) in f.terms() {
            if let Some(p) = numtheory::p_plus(n)? {
                largest = largest.max(p);
            }
        }
        let d = SMALL_PRIMES.iter().position(|&p| p > largest).unwrap_or(SMALL_PRIMES.len());
        Ok(Self::primes(d))
    }

    /// The sorted set of primes dividing any supported index of `f`.
    pub fn primes_of_support(f: &DirichletPolynomial) -> Result<Self> {
        let support: Vec<u64> = f.support().into_iter().filter(|&n| n > 1).collect();
        let basis = numtheory::prime_basis(&support)?;
        Ok(Self { generators: basis })
    }

    pub fn generators(&self) -> &[u64] {
        &self.generators
    }

    pub fn dim(&self) -> usize {
        self.generators.len()
    }

    pub fn is_all_primes(&self) -> bool {
        self.generators
            .iter()
            .all(|&q| numtheory::factorize(q).map(|f| f.factors().len() == 1 && f.factors()[0].1 == 1).unwrap_or(false))
    }

    /// Exponent vector α ∈ ℕ₀^d with `n = Π qᵢ^{αᵢ}`, if it exists. For a
    /// prime basis this is plain factorization; for general independent
    /// generators the system is solved exactly over ℚ and the solution must
    /// come out a nonnegative integer vector.
    pub fn exponents_of(&self, n: u64) -> Result<Vec<u32>> {
        if n == 0 {
            return Err(Error::ZeroInput);
        }
        if n == 1 {
            return Ok(vec![0; self.dim()]);
        }
        let f = numtheory::factorize(n)?;
        if self.is_all_primes() {
            let mut alpha = vec![0u32; self.dim()];
            for &(p, e) in f.factors() {
                match self.generators.iter().position(|&q| q == p) {
                    Some(idx) => alpha[idx] = e,
                    None => return Err(Error::IncompatibleLift(n)),
                }
            }
            return Ok(alpha);
        }
        self.solve_rational(n)
    }

    fn solve_rational(&self, n: u64) -> Result<Vec<u32>> {
        let mut all = self.generators.clone();
        all.push(n);
        let (basis, rows) = numtheory::exponent_vectors(&all)?;
        let d = self.dim();
        // Augmented system: columns are generator exponent vectors, the
        // right-hand side is the vector of n.
        let mut m: Vec<Vec<BigRational>> = (0..basis.len())
            .map(|row| {
                (0..=d)
                    .map(|col| BigRational::from(BigInt::from(rows[col][row])))
                    .collect()
            })
            .collect();
        let nrows = m.len();
        let mut pivot_cols = Vec::new();
        let mut rank = 0usize;
        for col in 0..d {
            let Some(p) = (rank..nrows).find(|&r| !m[r][col].is_zero()) else {
                continue;
            };
            m.swap(rank, p);
            let inv = m[rank][col].clone();
            for r in 0..nrows {
                if r == rank || m[r][col].is_zero() {
                    continue;
                }
                let factor = &m[r][col] / &inv;
                for cc in col..=d {
                    let sub = &factor * &m[rank][cc];
                    m[r][cc] = &m[r][cc] - sub;
                }
            }
            pivot_cols.push(col);
            rank += 1;
        }
        // Inconsistent rows mean n is not in the span at all.
        for r in rank..nrows {
            if !m[r][d].is_zero() {
                return Err(Error::IncompatibleLift(n));
            }
        }
        let mut alpha = vec![BigRational::zero(); d];
        for (row, &col) in pivot_cols.iter().enumerate() {
            alpha[col] = &m[row][d] / &m[row][col];
        }
        let mut out = Vec::with_capacity(d);
        for a in alpha {
            if !a.denom().is_one() || a.is_negative() {
                return Err(Error::IncompatibleLift(n));
            }
            let v = a.numer().to_u32().ok_or(Error::IncompatibleLift(n))?;
            out.push(v);
        }
        Ok(out)
    }
}

/// A sparse polynomial on `ℂ^d`, indexed by exponent vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct MultivariatePolynomial {
    dim: usize,
    terms: BTreeMap<Vec<u32>, Complex64>,
}

/// Guard on the order of formal partial derivatives.
pub const MAX_DERIVATIVE_ORDER: u32 = 4;

impl MultivariatePolynomial {
    pub fn zero(dim: usize) -> Self {
        Self { dim, terms: BTreeMap::new() }
    }

    pub fn from_terms<I: IntoIterator<Item = (Vec<u32>, Complex64)>>(dim: usize, terms: I) -> Self {
        let mut map = BTreeMap::new();
        for (alpha, c) in terms {
            assert_eq!(alpha.len(), dim, "exponent vector length");
            let entry = map.entry(alpha).or_insert(Complex64::new(0.0, 0.0));
            *entry += c;
        }
        map.retain(|_, c| c.re != 0.0 || c.im != 0.0);
        Self { dim, terms: map }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], Complex64)> + '_ {
        self.terms.iter().map(|(a, &c)| (a.as_slice(), c))
    }

    pub fn coefficient(&self, alpha: &[u32]) -> Complex64 {
        self.terms.get(alpha).copied().unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// Max total degree `|α|` over nonzero terms; 0 for constants and zero.
    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|a| a.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn eval_polydisc(&self, z: &[Complex64]) -> Result<Complex64> {
        if z.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: z.len() });
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (alpha, c) in self.terms() {
            let mut term = c;
            for (zl, &a) in z.iter().zip(alpha) {
                if a > 0 {
                    term *= zl.powu(a);
                }
            }
            acc += term;
        }
        Ok(acc)
    }

    /// Evaluation at `z_l = e^{iθ_l}`.
    pub fn eval_torus(&self, theta: &[f64]) -> Result<Complex64> {
        let z: Vec<Complex64> = theta.iter().map(|&t| Complex64::from_polar(1.0, t)).collect();
        self.eval_polydisc(&z)
    }

    /// Formal partial derivative `∂^{α₁}_{z₁} ⋯ ∂^{α_d}_{z_d}`.
    pub fn partial_derivative(&self, alpha: &[u32]) -> Result<Self> {
        if alpha.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: alpha.len() });
        }
        let order: u32 = alpha.iter().sum();
        if order > MAX_DERIVATIVE_ORDER {
            return Err(Error::DerivativeGuard(order, MAX_DERIVATIVE_ORDER));
        }
        let mut out = Vec::new();
        'term: for (beta, c) in self.terms() {
            let mut coeff = c;
            let mut gamma = beta.to_vec();
            for l in 0..self.dim {
                for _ in 0..alpha[l] {
                    if gamma[l] == 0 {
                        continue 'term;
                    }
                    coeff *= gamma[l] as f64;
                    gamma[l] -= 1;
                }
            }
            out.push((gamma, coeff));
        }
        Ok(Self::from_terms(self.dim, out))
    }

    /// Evaluation at `(q₁^{-s}, …, q_d^{-s})`; inverts the lift along the
    /// Kronecker flow, recovering the original Dirichlet polynomial at `s`.
    pub fn kronecker_restriction(&self, generators: &GeneratorSet, s: Complex64) -> Result<Complex64> {
        if generators.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: generators.dim() });
        }
        let z: Vec<Complex64> = generators
            .generators()
            .iter()
            .map(|&q| (-s * (q as f64).ln()).exp())
            .collect();
        self.eval_polydisc(&z)
    }
}

/// The Bohr lift `Σ aₙ n^{-s} ↦ Σ aₙ z^α` over a compatible generator set.
pub fn bohr_lift(f: &DirichletPolynomial, generators: &GeneratorSet) -> Result<MultivariatePolynomial> {
    let d = generators.dim();
    let mut terms = Vec::new();
    for (n, c) in f.terms() {
        let alpha = generators.exponents_of(n)?;
        terms.push((alpha, c));
    }
    Ok(MultivariatePolynomial::from_terms(d, terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirichlet::DEFAULT_TRUNCATION;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn poly(terms: &[(u64, f64)]) -> DirichletPolynomial {
        DirichletPolynomial::from_terms(
            terms.iter().map(|&(n, x)| (n, c(x, 0.0))),
            DEFAULT_TRUNCATION,
        )
    }

    #[test]
    fn lift_over_primes() {
        let f = poly(&[(1, 1.0), (2, -1.0), (3, -1.0)]);
        let p = bohr_lift(&f, &GeneratorSet::primes(2)).unwrap();
        assert_eq!(p.coefficient(&[0, 0]), c(1.0, 0.0));
        assert_eq!(p.coefficient(&[1, 0]), c(-1.0, 0.0));
        assert_eq!(p.coefficient(&[0, 1]), c(-1.0, 0.0));

        let six = poly(&[(6, 1.0)]);
        let lifted = bohr_lift(&six, &GeneratorSet::primes(2)).unwrap();
        assert_eq!(lifted.coefficient(&[1, 1]), c(1.0, 0.0));
        assert_eq!(lifted.degree(), 2);

        let thirty = poly(&[(1, 1.0), (30, -1.0)]);
        let lifted = bohr_lift(&thirty, &GeneratorSet::primes(3)).unwrap();
        assert_eq!(lifted.coefficient(&[1, 1, 1]), c(-1.0, 0.0));
        assert_eq!(lifted.degree(), 3);

        assert!(matches!(
            bohr_lift(&poly(&[(5, 1.0)]), &GeneratorSet::primes(2)),
            Err(Error::IncompatibleLift(5))
        ));
    }

    #[test]
    fn lift_over_general_generators() {
        let gens = GeneratorSet::new(vec![6, 10]).unwrap();
        let f = poly(&[(6, 2.0), (360, 1.0), (3600, -1.0)]);
        // 360 = 6^2 * 10, 3600 = 6^2 * 10^2.
        let p = bohr_lift(&f, &gens).unwrap();
        assert_eq!(p.coefficient(&[1, 0]), c(2.0, 0.0));
        assert_eq!(p.coefficient(&[2, 1]), c(1.0, 0.0));
        assert_eq!(p.coefficient(&[2, 2]), c(-1.0, 0.0));

        // 60 = 6 * 10 is in the rational span only with exponent 1/... no:
        // 60 = 6^1 10^1, so it lifts; 12 needs 6^2 10^{-1} and must fail.
        assert!(bohr_lift(&poly(&[(60, 1.0)]), &gens).is_ok());
        assert!(matches!(
            bohr_lift(&poly(&[(12, 1.0)]), &gens),
            Err(Error::IncompatibleLift(12))
        ));

        assert!(matches!(GeneratorSet::new(vec![4, 8]), Err(Error::DependentGenerators)));
    }

    #[test]
    fn degree_of_lifts() {
        let one_minus_z = MultivariatePolynomial::from_terms(
            1,
            [(vec![0], c(1.0, 0.0)), (vec![1], c(-1.0, 0.0))],
        );
        assert_eq!(one_minus_z.degree(), 1);
        assert_eq!(MultivariatePolynomial::zero(3).degree(), 0);
    }

    #[test]
    fn evaluation_on_disc_and_torus() {
        let p = MultivariatePolynomial::from_terms(
            1,
            [(vec![0], c(1.0, 0.0)), (vec![1], c(-1.0, 0.0))],
        );
        assert!(p.eval_polydisc(&[c(1.0, 0.0)]).unwrap().norm() < 1e-15);
        let at_pi = p.eval_torus(&[std::f64::consts::PI]).unwrap();
        assert!((at_pi - c(2.0, 0.0)).norm() < 1e-15);
        assert!(p.eval_polydisc(&[c(0.0, 0.0), c(0.0, 0.0)]).is_err());
    }

    #[test]
    fn lift_agrees_with_direct_evaluation() {
        let f = poly(&[(1, 1.0), (2, -1.0)]);
        let p = bohr_lift(&f, &GeneratorSet::primes(1)).unwrap();
        for sigma in [0.1, 1.0, 3.0] {
            let direct = f.evaluate(c(sigma, 0.0));
            let via_disc = p.eval_polydisc(&[c(2f64.powf(-sigma), 0.0)]).unwrap();
            assert!((direct - via_disc).norm() < 1e-12);
        }
    }

    #[test]
    fn partial_derivatives() {
        let p = MultivariatePolynomial::from_terms(
            1,
            [(vec![0], c(1.0, 0.0)), (vec![1], c(-1.0, 0.0))],
        );
        let d1 = p.partial_derivative(&[1]).unwrap();
        assert_eq!(d1.coefficient(&[0]), c(-1.0, 0.0));

        // (1 - z)^2 = 1 - 2z + z^2, second derivative is the constant 2.
        let sq = MultivariatePolynomial::from_terms(
            1,
            [
                (vec![0], c(1.0, 0.0)),
                (vec![1], c(-2.0, 0.0)),
                (vec![2], c(1.0, 0.0)),
            ],
        );
        let d2 = sq.partial_derivative(&[2]).unwrap();
        assert_eq!(d2.coefficient(&[0]), c(2.0, 0.0));

        let z1z2 = MultivariatePolynomial::from_terms(2, [(vec![1, 1], c(1.0, 0.0))]);
        let mixed = z1z2.partial_derivative(&[1, 1]).unwrap();
        assert_eq!(mixed.coefficient(&[0, 0]), c(1.0, 0.0));

        assert!(matches!(
            z1z2.partial_derivative(&[3, 2]),
            Err(Error::DerivativeGuard(5, MAX_DERIVATIVE_ORDER))
        ));
    }

    #[test]
    fn mixed_partials_commute() {
        let p = MultivariatePolynomial::from_terms(
            2,
            [
                (vec![2, 1], c(1.5, 0.5)),
                (vec![1, 2], c(-0.5, 1.0)),
                (vec![2, 2], c(0.25, 0.0)),
            ],
        );
        let a = p
            .partial_derivative(&[1, 0])
            .unwrap()
            .partial_derivative(&[0, 1])
            .unwrap();
        let b = p.partial_derivative(&[1, 1]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn kronecker_restriction_inverts_lift() {
        let q = GeneratorSet::primes(1);
        let z1 = MultivariatePolynomial::from_terms(1, [(vec![1], c(1.0, 0.0))]);
        let v = z1.kronecker_restriction(&q, c(1.0, 0.0)).unwrap();
        assert!((v - c(0.5, 0.0)).norm() < 1e-15);

        let q2 = GeneratorSet::primes(2);
        let p = MultivariatePolynomial::from_terms(
            2,
            [(vec![0, 0], c(1.0, 0.0)), (vec![1, 1], c(-1.0, 0.0))],
        );
        assert!(p.kronecker_restriction(&q2, c(0.0, 0.0)).unwrap().norm() < 1e-15);
    }
}
