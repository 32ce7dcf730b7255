//! Sparse Dirichlet-polynomial arithmetic.
//!
//! A value represents `f(s) = Σ aₙ n^{-s}` as a map from `n` to a complex
//! coefficient, together with an explicit truncation `N`: binary operations
//! produce the minimum of the input truncations and silently drop keys above
//! it. Truncation is what turns the one genuinely infinite object handled
//! here, the exponential `p^{-ψ(s)}`, into a finite computation with a
//! deterministic cut.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::de::{self, Deserializer, MapAccess, Visitor};
use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numtheory::{self, weighted_partitions};

/// Default truncation used by the parser and the CLI.
pub const DEFAULT_TRUNCATION: u64 = 1_000_000;
/// Hard ceiling on truncations, matching the exponential guard.
pub const MAX_TRUNCATION: u64 = 1_000_000;
/// Guard on `power` exponents.
pub const MAX_POWER: u32 = 16;

/// `f(s) = Σ aₙ n^{-s}` with finitely many nonzero coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletPolynomial {
    coeffs: BTreeMap<u64, Complex64>,
    truncation: u64,
}

impl DirichletPolynomial {
    pub fn zero(truncation: u64) -> Self {
        Self { coeffs: BTreeMap::new(), truncation }
    }

    pub fn constant(c: Complex64, truncation: u64) -> Self {
        Self::from_terms([(1, c)], truncation)
    }

    /// `c · n^{-s}`.
    pub fn monomial(n: u64, c: Complex64, truncation: u64) -> Self {
        Self::from_terms([(n, c)], truncation)
    }

    /// Builds from `(n, coefficient)` pairs, summing duplicate keys, dropping
    /// zeros and keys above the truncation.
    pub fn from_terms<I: IntoIterator<Item = (u64, Complex64)>>(terms: I, truncation: u64) -> Self {
        let mut coeffs = BTreeMap::new();
        for (n, c) in terms {
            if n == 0 || n > truncation {
                continue;
            }
            let entry = coeffs.entry(n).or_insert(Complex64::new(0.0, 0.0));
            *entry += c;
        }
        coeffs.retain(|_, c| c.re != 0.0 || c.im != 0.0);
        Self { coeffs, truncation }
    }

    pub fn truncation(&self) -> u64 {
        self.truncation
    }

    pub fn coefficient(&self, n: u64) -> Complex64 {
        self.coeffs.get(&n).copied().unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// Ascending iteration over the nonzero terms.
    pub fn terms(&self) -> impl Iterator<Item = (u64, Complex64)> + '_ {
        self.coeffs.iter().map(|(&n, &c)| (n, c))
    }

    pub fn support(&self) -> Vec<u64> {
        self.coeffs.keys().copied().collect()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// True iff the only possible nonzero coefficient sits at n = 1.
    pub fn is_constant(&self) -> bool {
        self.coeffs.keys().all(|&n| n == 1)
    }

    pub fn add(&self, other: &Self) -> Self {
        let truncation = self.truncation.min(other.truncation);
        Self::from_terms(self.terms().chain(other.terms()), truncation)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self::from_terms(self.terms().map(|(n, c)| (n, c * factor)), self.truncation)
    }

    /// Dirichlet convolution: the coefficient of `n` in the product is
    /// `Σ_{d|n} a_d b_{n/d}`; keys above the joint truncation are dropped.
    pub fn multiply(&self, other: &Self) -> Self {
        let truncation = self.truncation.min(other.truncation);
        let mut coeffs: BTreeMap<u64, Complex64> = BTreeMap::new();
        for (m, a) in self.terms() {
            if m > truncation {
                break;
            }
            for (k, b) in other.terms() {
                let Some(n) = m.checked_mul(k) else { break };
                if n > truncation {
                    break;
                }
                let entry = coeffs.entry(n).or_insert(Complex64::new(0.0, 0.0));
                *entry += a * b;
            }
        }
        coeffs.retain(|_, c| c.re != 0.0 || c.im != 0.0);
        Self { coeffs, truncation }
    }

    /// Repeated convolution; `power(f, 0)` is the constant 1.
    pub fn power(&self, k: u32) -> Result<Self> {
        if k > MAX_POWER {
            return Err(Error::PowerGuard(k, MAX_POWER));
        }
        let mut acc = Self::constant(Complex64::new(1.0, 0.0), self.truncation);
        for _ in 0..k {
            acc = acc.multiply(self);
        }
        Ok(acc)
    }

    /// Exact finite sum `Σ aₙ n^{-s}`; entire in `s`.
    pub fn evaluate(&self, s: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (n, c) in self.terms() {
            acc += c * (-s * (n as f64).ln()).exp();
        }
        acc
    }

    /// Termwise derivative: the coefficient of `n` becomes `-aₙ log n`.
    pub fn derivative(&self) -> Self {
        Self::from_terms(
            self.terms().map(|(n, c)| (n, -c * (n as f64).ln())),
            self.truncation,
        )
    }

    /// `f_χ(s) = Σ aₙ χ(n) n^{-s}` for a completely multiplicative unimodular
    /// character.
    pub fn twist(&self, chi: &TwistCharacter) -> Self {
        Self::from_terms(
            self.terms().map(|(n, c)| (n, c * chi.value(n))),
            self.truncation,
        )
    }

    /// `f(s + iτ)`: the coefficient of `n` picks up `n^{-iτ}`.
    pub fn vertical_translate(&self, tau: f64) -> Self {
        self.twist(&TwistCharacter::vertical(tau))
    }

    /// `f(s + σ)`: the coefficient of `n` picks up `n^{-σ}`.
    pub fn horizontal_shift(&self, sigma: f64) -> Self {
        Self::from_terms(
            self.terms().map(|(n, c)| (n, c * (n as f64).powf(-sigma))),
            self.truncation,
        )
    }

    /// The norm `(Σ |aₙ|²)^{1/2}`.
    pub fn hardy_norm(&self) -> f64 {
        self.terms().map(|(_, c)| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// The weighted norm `(Σ |aₙ|² wₙ)^{1/2}` with `wₙ = ∫₀¹ σ n^{-2σ} dσ`,
    /// the Bergman-type norm obtained by averaging horizontal shifts.
    pub fn bergman_norm(&self) -> f64 {
        self.terms()
            .map(|(n, c)| c.norm_sqr() * bergman_weight(n))
            .sum::<f64>()
            .sqrt()
    }
}

/// `∫₀¹ σ n^{-2σ} dσ` in closed form: `1/2` for n = 1, otherwise
/// `(1 - e^{-a}(1 + a))/a²` with `a = 2 log n`.
pub fn bergman_weight(n: u64) -> f64 {
    if n <= 1 {
        return 0.5;
    }
    let a = 2.0 * (n as f64).ln();
    (1.0 - (-a).exp() * (1.0 + a)) / (a * a)
}

/// A completely multiplicative unimodular character given by its values on
/// primes. Unspecified primes default to the phase `p^{-iτ}` (so `τ = 0`
/// means phase 1, and a pure vertical translation needs no explicit table).
#[derive(Debug, Clone, PartialEq)]
pub struct TwistCharacter {
    phases: BTreeMap<u64, Complex64>,
    tau: f64,
}

impl TwistCharacter {
    pub fn identity() -> Self {
        Self { phases: BTreeMap::new(), tau: 0.0 }
    }

    /// Phases must be unimodular to 1e-12.
    pub fn new<I: IntoIterator<Item = (u64, Complex64)>>(phases: I) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (p, z) in phases {
            if (z.norm() - 1.0).abs() > 1e-12 {
                return Err(Error::NonUnimodularPhase(p));
            }
            map.insert(p, z);
        }
        Ok(Self { phases: map, tau: 0.0 })
    }

    /// The character of a vertical translation: `χ(p) = p^{-iτ}`.
    pub fn vertical(tau: f64) -> Self {
        Self { phases: BTreeMap::new(), tau }
    }

    pub fn value(&self, n: u64) -> Complex64 {
        let mut acc = Complex64::new(1.0, 0.0);
        let f = numtheory::factorize(n).expect("positive key");
        for &(p, e) in f.factors() {
            let phase = self
                .phases
                .get(&p)
                .copied()
                .unwrap_or_else(|| Complex64::from_polar(1.0, -self.tau * (p as f64).ln()));
            acc *= phase.powu(e);
        }
        acc
    }
}

/// Coefficients of `p^{-ψ(s)}` up to the truncation, where `ψ` has no
/// constant term (the caller handles the scalar `p^{-c₁}`). Computed as the
/// product over the support of `ψ` of the per-term exponential series
/// `Σ_j (-c_k log p)^j / j! (k^j)^{-s}`, multiplied in increasing key order.
pub fn exp_base(p: u64, psi: &DirichletPolynomial, truncation: u64) -> Result<DirichletPolynomial> {
    if truncation > MAX_TRUNCATION {
        return Err(Error::TruncationTooLarge(truncation, MAX_TRUNCATION));
    }
    let c1 = psi.coefficient(1);
    if c1.re != 0.0 || c1.im != 0.0 {
        return Err(Error::NonzeroConstant);
    }
    let log_p = (p as f64).ln();
    let mut acc = DirichletPolynomial::constant(Complex64::new(1.0, 0.0), truncation);
    for (k, c_k) in psi.terms() {
        let base = -c_k * log_p;
        let mut factor_terms = vec![(1u64, Complex64::new(1.0, 0.0))];
        let mut key = k;
        let mut term = Complex64::new(1.0, 0.0);
        let mut j = 1u32;
        loop {
            term *= base / (j as f64);
            factor_terms.push((key, term));
            let Some(next) = key.checked_mul(k) else { break };
            if next > truncation {
                break;
            }
            key = next;
            j += 1;
        }
        acc = acc.multiply(&DirichletPolynomial::from_terms(factor_terms, truncation));
    }
    Ok(acc)
}

/// The closed form for the `q^l` coefficient of `p^{-ψ(s)}` assembled from
/// weighted partitions: `Σ u(p,l,r,i,γ) Π_j c_{q^{i_j}}^{γ_j}` over all
/// weighted partitions of `l`. An independent route to the same number as
/// [`exp_base`], used to cross-check it.
pub fn exp_base_coefficient_at_prime_power(
    p: u64,
    q: u64,
    l: u32,
    psi: &DirichletPolynomial,
) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for wp in weighted_partitions(l)? {
        let u = numtheory::partition_coefficient(p, &wp);
        let mut prod = Complex64::new(1.0, 0.0);
        for (&i, &g) in wp.indices.iter().zip(&wp.weights) {
            let c = psi.coefficient(q.pow(i));
            prod *= c.powu(g);
        }
        acc += prod * u;
    }
    Ok(acc)
}

impl Serialize for DirichletPolynomial {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            truncation: u64,
            coeffs: CoeffMap<'a>,
        }
        struct CoeffMap<'a>(&'a BTreeMap<u64, Complex64>);
        impl Serialize for CoeffMap<'_> {
            fn serialize<S: Serializer>(
                &self,
                serializer: S,
            ) -> std::result::Result<S::Ok, S::Error> {
                let mut map = serializer.serialize_map(Some(self.0.len()))?;
                for (n, c) in self.0 {
                    map.serialize_entry(&n.to_string(), &[c.re, c.im])?;
                }
                map.end()
            }
        }
        Repr { truncation: self.truncation, coeffs: CoeffMap(&self.coeffs) }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DirichletPolynomial {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct PolyVisitor;
        impl<'de> Visitor<'de> for PolyVisitor {
            type Value = DirichletPolynomial;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("an object with `truncation` and `coeffs`")
            }
            fn visit_map<A: MapAccess<'de>>(
                self,
                mut access: A,
            ) -> std::result::Result<Self::Value, A::Error> {
                let mut truncation = None;
                let mut raw: Option<BTreeMap<String, [f64; 2]>> = None;
                while let Some(key) = access.next_key::<String>()? {
                    match key.as_str() {
                        "truncation" => truncation = Some(access.next_value()?),
                        "coeffs" => raw = Some(access.next_value()?),
                        other => return Err(de::Error::unknown_field(other, &["truncation", "coeffs"])),
                    }
                }
                let truncation: u64 =
                    truncation.ok_or_else(|| de::Error::missing_field("truncation"))?;
                let raw = raw.ok_or_else(|| de::Error::missing_field("coeffs"))?;
                let mut terms = Vec::with_capacity(raw.len());
                for (k, [re, im]) in raw {
                    let n: u64 = k.parse().map_err(|_| {
                        de::Error::custom(format!("coefficient key `{k}` is not a positive integer"))
                    })?;
                    terms.push((n, Complex64::new(re, im)));
                }
                Ok(DirichletPolynomial::from_terms(terms, truncation))
            }
        }
        deserializer.deserialize_map(PolyVisitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

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
    fn multiply_is_divisor_convolution() {
        let f = poly(&[(2, 1.0)]);
        let g = poly(&[(3, 1.0)]);
        assert_eq!(f.multiply(&g), poly(&[(6, 1.0)]));

        let h = poly(&[(1, 1.0), (2, 1.0)]);
        assert_eq!(h.multiply(&h), poly(&[(1, 1.0), (2, 2.0), (4, 1.0)]));
    }

    #[test]
    fn cube_matches_binomial_oracle() {
        // (1 - 2^{-s})^3 expanded with binomial coefficients.
        let f = poly(&[(1, 1.0), (2, -1.0)]);
        let cube = f.power(3).unwrap();
        let oracle = poly(&[(1, 1.0), (2, -3.0), (4, 3.0), (8, -1.0)]);
        for n in [1u64, 2, 4, 8] {
            assert!((cube.coefficient(n) - oracle.coefficient(n)).norm() < 1e-12);
        }
        assert_eq!(cube.support(), vec![1, 2, 4, 8]);
    }

    #[test]
    fn power_guards_and_base_cases() {
        let f = poly(&[(1, 1.0), (2, -1.0)]);
        assert_eq!(f.power(0).unwrap(), poly(&[(1, 1.0)]));
        assert_eq!(poly(&[(2, 1.0)]).power(3).unwrap(), poly(&[(8, 1.0)]));
        assert_eq!(
            f.power(2).unwrap(),
            poly(&[(1, 1.0), (2, -2.0), (4, 1.0)])
        );
        assert!(matches!(f.power(17), Err(Error::PowerGuard(17, MAX_POWER))));
    }

    #[test]
    fn evaluate_and_derivative() {
        let two = poly(&[(2, 1.0)]);
        assert!((two.evaluate(c(1.0, 0.0)) - c(0.5, 0.0)).norm() < 1e-15);
        let f = poly(&[(1, 1.0), (2, -1.0)]);
        assert!(f.evaluate(c(0.0, 0.0)).norm() < 1e-15);
        let d = two.derivative();
        assert!((d.evaluate(c(0.0, 0.0)) + c(std::f64::consts::LN_2, 0.0)).norm() < 1e-15);
        // The constant term has log 1 = 0 and disappears.
        assert!(poly(&[(1, 5.0)]).derivative().is_zero());
    }

    #[test]
    fn twists_and_shifts() {
        let two = poly(&[(2, 1.0)]);
        let chi = TwistCharacter::new([(2, c(-1.0, 0.0))]).unwrap();
        assert_eq!(two.twist(&chi), poly(&[(2, -1.0)]));

        let tau = 0.7;
        let translated = two.vertical_translate(tau);
        let expected = c(1.0, 0.0) * (-Complex64::new(0.0, tau) * 2f64.ln()).exp();
        assert!((translated.coefficient(2) - expected).norm() < 1e-15);

        let f = poly(&[(1, 1.0), (2, -1.0)]);
        assert_eq!(f.horizontal_shift(1.0), poly(&[(1, 1.0), (2, -0.5)]));

        assert!(matches!(
            TwistCharacter::new([(2, c(0.5, 0.0))]),
            Err(Error::NonUnimodularPhase(2))
        ));
    }

    #[test]
    fn norms() {
        let f = poly(&[(1, 1.0), (2, -1.0)]);
        assert!((f.hardy_norm() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(poly(&[]).hardy_norm(), 0.0);

        assert!((poly(&[(1, 1.0)]).bergman_norm() - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn bergman_weight_matches_quadrature_oracle() {
        // Adaptive Simpson integration of σ 2^{-2σ} over [0, 1].
        fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
            let m = 0.5 * (a + b);
            (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b))
        }
        fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, eps: f64, whole: f64) -> f64 {
            let m = 0.5 * (a + b);
            let left = simpson(f, a, m);
            let right = simpson(f, m, b);
            if (left + right - whole).abs() < 15.0 * eps {
                left + right + (left + right - whole) / 15.0
            } else {
                adaptive(f, a, m, eps / 2.0, left) + adaptive(f, m, b, eps / 2.0, right)
            }
        }
        let integrand = |sigma: f64| sigma * 2f64.powf(-2.0 * sigma);
        let w2_oracle = adaptive(&integrand, 0.0, 1.0, 1e-13, simpson(&integrand, 0.0, 1.0));
        assert!((bergman_weight(2) - w2_oracle).abs() < 1e-10);
        assert!((bergman_weight(2) - 0.20991).abs() < 1e-5);
    }

    #[test]
    fn truncation_drops_high_keys() {
        let f = DirichletPolynomial::from_terms([(2, c(1.0, 0.0))], 10);
        let g = DirichletPolynomial::from_terms([(6, c(1.0, 0.0))], 100);
        let prod = f.multiply(&g);
        assert_eq!(prod.truncation(), 10);
        assert!(prod.is_zero());
    }

    #[test]
    fn exp_base_simple_cases() {
        let zero = DirichletPolynomial::zero(100);
        let one = exp_base(2, &zero, 100).unwrap();
        assert_eq!(one, DirichletPolynomial::constant(c(1.0, 0.0), 100));

        let psi = poly(&[(2, 1.0)]);
        let e = exp_base(2, &psi, 64).unwrap();
        let ln2 = std::f64::consts::LN_2;
        assert!((e.coefficient(1) - c(1.0, 0.0)).norm() < 1e-14);
        assert!((e.coefficient(2) + c(ln2, 0.0)).norm() < 1e-14);
        assert!((e.coefficient(4) - c(ln2 * ln2 / 2.0, 0.0)).norm() < 1e-14);

        assert!(matches!(
            exp_base(2, &poly(&[(1, 1.0)]), 100),
            Err(Error::NonzeroConstant)
        ));
        assert!(matches!(
            exp_base(2, &zero, MAX_TRUNCATION + 1),
            Err(Error::TruncationTooLarge(_, _))
        ));
    }

    #[test]
    fn exp_base_matches_partition_closed_form() {
        let ln2 = std::f64::consts::LN_2;
        let c2 = c(0.3, -0.2);
        let c4 = c(-0.1, 0.5);
        let psi = DirichletPolynomial::from_terms([(2, c2), (4, c4)], 1 << 12);
        let e = exp_base(2, &psi, 1 << 12).unwrap();
        let expected = -c4 * ln2 + c2 * c2 * (ln2 * ln2 / 2.0);
        assert!((e.coefficient(4) - expected).norm() < 1e-12);
        let closed = exp_base_coefficient_at_prime_power(2, 2, 2, &psi).unwrap();
        assert!((e.coefficient(4) - closed).norm() < 1e-12);
        for l in 1..=6u32 {
            let closed = exp_base_coefficient_at_prime_power(2, 2, l, &psi).unwrap();
            assert!(
                (e.coefficient(1u64 << l) - closed).norm() < 1e-10,
                "mismatch at l = {l}"
            );
        }
    }

    #[test]
    fn json_round_trip_is_exact() {
        let f = DirichletPolynomial::from_terms(
            [(1, c(1.5, 0.0)), (2, c(-0.1, 0.25)), (12, c(3.0, -1.0))],
            1000,
        );
        let text = serde_json::to_string(&f).unwrap();
        assert!(text.contains("\"truncation\":1000"));
        let back: DirichletPolynomial = serde_json::from_str(&text).unwrap();
        assert_eq!(f, back);
    }
}
