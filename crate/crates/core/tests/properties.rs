//! Cross-module invariants, mostly property-based.

use num_complex::Complex64;
use proptest::prelude::*;

use dircomp_core::bohr::{bohr_lift, GeneratorSet};
use dircomp_core::dirichlet::{
    bergman_weight, exp_base, DirichletPolynomial, TwistCharacter, DEFAULT_TRUNCATION,
};
use dircomp_core::dsl;
use dircomp_core::symbols::{Symbol, DEFAULT_REFINE_TOL};
use dircomp_core::util::SplitMix64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn coeff() -> impl Strategy<Value = Complex64> {
    ((-100i32..=100), (-100i32..=100)).prop_map(|(a, b)| c(a as f64 / 50.0, b as f64 / 50.0))
}

fn sparse_poly(max_key: u64, trunc: u64) -> impl Strategy<Value = DirichletPolynomial> {
    prop::collection::vec((1..=max_key, coeff()), 0..6)
        .prop_map(move |terms| DirichletPolynomial::from_terms(terms, trunc))
}

fn max_coeff_diff(a: &DirichletPolynomial, b: &DirichletPolynomial) -> f64 {
    let mut keys: Vec<u64> = a.support();
    keys.extend(b.support());
    keys.into_iter()
        .map(|n| (a.coefficient(n) - b.coefficient(n)).norm())
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn convolution_commutes_and_associates(
        f in sparse_poly(64, 4096),
        g in sparse_poly(64, 4096),
        h in sparse_poly(64, 4096),
    ) {
        let fg = f.multiply(&g);
        let gf = g.multiply(&f);
        prop_assert!(max_coeff_diff(&fg, &gf) < 1e-12);

        let left = fg.multiply(&h);
        let right = f.multiply(&g.multiply(&h));
        prop_assert!(max_coeff_diff(&left, &right) < 1e-12);
    }

    #[test]
    fn twists_preserve_the_norm(
        f in sparse_poly(64, DEFAULT_TRUNCATION),
        angles in prop::collection::vec(0.0f64..std::f64::consts::TAU, 3),
    ) {
        let chi = TwistCharacter::new([
            (2, Complex64::from_polar(1.0, angles[0])),
            (3, Complex64::from_polar(1.0, angles[1])),
            (5, Complex64::from_polar(1.0, angles[2])),
        ]).unwrap();
        let twisted = f.twist(&chi);
        prop_assert!((twisted.hardy_norm() - f.hardy_norm()).abs() < 1e-12);
    }

    #[test]
    fn bergman_norm_is_dominated(f in sparse_poly(64, DEFAULT_TRUNCATION)) {
        // wₙ ≤ w₁ = 1/2 for every n.
        prop_assert!(f.bergman_norm() <= f.hardy_norm() / 2f64.sqrt() + 1e-12);
    }

    #[test]
    fn exponential_is_multiplicative(
        a2 in coeff(), a3 in coeff(), b2 in coeff(), b4 in coeff(),
    ) {
        let trunc = 4096u64;
        let psi = DirichletPolynomial::from_terms([(2, a2), (3, a3)], trunc);
        let psi2 = DirichletPolynomial::from_terms([(2, b2), (4, b4)], trunc);
        let sum = psi.add(&psi2);
        let lhs = exp_base(5, &sum, trunc).unwrap();
        let rhs = exp_base(5, &psi, trunc).unwrap().multiply(&exp_base(5, &psi2, trunc).unwrap());
        prop_assert!(max_coeff_diff(&lhs, &rhs) < 1e-10);
    }

    #[test]
    fn lift_round_trips_through_kronecker_restriction(
        f in sparse_poly(32, DEFAULT_TRUNCATION),
        re in -2.0f64..2.0,
        im in -4.0f64..4.0,
    ) {
        let gens = GeneratorSet::primes(11); // covers all primes below 32
        let lift = bohr_lift(&f, &gens).unwrap();
        let s = c(re, im);
        let direct = f.evaluate(s);
        let via_lift = lift.kronecker_restriction(&gens, s).unwrap();
        prop_assert!((direct - via_lift).norm() < 1e-12 * (1.0 + direct.norm()));
    }

    #[test]
    fn lift_is_linear(
        f in sparse_poly(32, DEFAULT_TRUNCATION),
        g in sparse_poly(32, DEFAULT_TRUNCATION),
    ) {
        let gens = GeneratorSet::primes(11);
        let sum_lift = bohr_lift(&f.add(&g), &gens).unwrap();
        let lf = bohr_lift(&f, &gens).unwrap();
        let lg = bohr_lift(&g, &gens).unwrap();
        for (alpha, v) in sum_lift.terms() {
            let expect = lf.coefficient(alpha) + lg.coefficient(alpha);
            prop_assert!((v - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn lift_degree_matches_omega(f in sparse_poly(32, DEFAULT_TRUNCATION)) {
        let gens = GeneratorSet::primes(11);
        let lift = bohr_lift(&f, &gens).unwrap();
        let expect = f
            .support()
            .into_iter()
            .map(|n| dircomp_core::numtheory::omega(n).unwrap())
            .max()
            .unwrap_or(0);
        prop_assert_eq!(lift.degree(), expect);
    }

    #[test]
    fn projection_is_idempotent_and_convex_compatible(
        f in sparse_poly(32, DEFAULT_TRUNCATION),
        g in sparse_poly(32, DEFAULT_TRUNCATION),
        lambda in 0.0f64..=1.0,
    ) {
        let phi0 = Symbol::new(1, f);
        let phi1 = Symbol::new(1, g);
        let primes = [2u64, 5];
        let p = phi0.project_q(&primes).unwrap();
        prop_assert_eq!(p.project_q(&primes).unwrap(), p.clone());

        let mixed_then_projected = phi0
            .convex_combination(&phi1, lambda)
            .unwrap()
            .project_q(&primes)
            .unwrap();
        let projected_then_mixed = p
            .convex_combination(&phi1.project_q(&primes).unwrap(), lambda)
            .unwrap();
        let diff = max_coeff_diff(mixed_then_projected.psi(), projected_then_mixed.psi());
        prop_assert!(diff < 1e-12);
    }

    #[test]
    fn parse_format_round_trip(
        c0 in 0u32..3,
        terms in prop::collection::vec((1u64..=32, coeff()), 0..5),
    ) {
        let psi = DirichletPolynomial::from_terms(terms, DEFAULT_TRUNCATION);
        let phi = Symbol::new(c0, psi);
        let text = dsl::format(&phi);
        let back = dsl::parse(&text).unwrap();
        prop_assert_eq!(phi, back, "through `{}`", text);
    }
}

#[test]
fn derivative_norm_comparison_stays_in_bracket() {
    // hardy_norm(f)² / Σ |aₙ log n|² wₙ lies in [1/c, c] where c bounds
    // wₙ log²n away from 0 and ∞ over the supported range.
    let max_key = 64u64;
    let mut c_bound = 1.0f64;
    for n in 2..=max_key {
        let v = bergman_weight(n) * (n as f64).ln().powi(2);
        c_bound = c_bound.max(v).max(1.0 / v);
    }
    let mut rng = SplitMix64::new(7);
    for _ in 0..200 {
        let mut terms = Vec::new();
        for _ in 0..5 {
            let n = 2 + (rng.next_u64() % (max_key - 1));
            terms.push((n, c(rng.next_in(-1.0, 1.0), rng.next_in(-1.0, 1.0))));
        }
        let f = DirichletPolynomial::from_terms(terms, DEFAULT_TRUNCATION);
        if f.is_zero() {
            continue;
        }
        let weighted: f64 = f
            .terms()
            .map(|(n, a)| (a.norm() * (n as f64).ln()).powi(2) * bergman_weight(n))
            .sum();
        let ratio = f.hardy_norm().powi(2) / weighted;
        assert!(ratio >= 1.0 / c_bound - 1e-12 && ratio <= c_bound + 1e-12, "ratio {ratio}");
    }
}

#[test]
fn membership_survives_vertical_translation() {
    let mut rng = SplitMix64::new(11);
    for _ in 0..20 {
        let c2 = c(rng.next_in(-1.0, 1.0), rng.next_in(-1.0, 1.0));
        let c3 = c(rng.next_in(-1.0, 1.0), rng.next_in(-1.0, 1.0));
        let c1 = c2.norm() + c3.norm();
        let psi = DirichletPolynomial::from_terms(
            [(1, c(c1, 0.0)), (2, c2), (3, c3)],
            DEFAULT_TRUNCATION,
        );
        let phi = Symbol::new(1, psi);
        assert!(phi.gh_membership().unwrap().member);
        let tau = rng.next_in(-10.0, 10.0);
        let translated = phi.twist(&TwistCharacter::vertical(tau));
        assert!(translated.gh_membership().unwrap().member, "tau = {tau}");
    }
}

#[test]
fn linear_symbols_match_the_closed_form_minimum() {
    let generator_pool: [&[u64]; 6] =
        [&[2], &[30], &[2, 3], &[6, 10], &[2, 9, 5], &[4, 27]];
    let mut rng = SplitMix64::new(23);
    for trial in 0..30 {
        let gens = generator_pool[trial % generator_pool.len()];
        let mut terms = vec![];
        let mut sum = 0.0;
        for &q in gens {
            let value = c(rng.next_in(-1.0, 1.0), rng.next_in(-1.0, 1.0));
            sum += value.norm();
            terms.push((q, value));
        }
        let c1 = rng.next_in(0.0, 2.0);
        terms.push((1, c(c1, 0.0)));
        let phi = Symbol::new(1, DirichletPolynomial::from_terms(terms, DEFAULT_TRUNCATION));
        let report = phi.range_infimum(None, DEFAULT_REFINE_TOL).unwrap();
        let closed = c1 - sum;
        assert!((report.closed_form.unwrap() - closed).abs() < 1e-12);
        assert!(
            (report.infimum - closed).abs() < 1e-6,
            "trial {trial}: optimizer {} vs closed {closed}",
            report.infimum
        );
    }
}

#[test]
fn difference_and_component_checks_never_contradict() {
    use dircomp_core::analysis::{
        compact_difference_check, essential_lower_bound_difference, gamma_set, Config, Verdict,
    };

    let cfg = Config::default();
    let base = dsl::parse("s + 1 - 2^(-s)").unwrap();
    let pairs = vec![
        (base.clone(), dsl::parse("s + 1 - 3^(-s)").unwrap()),
        (base.clone(), base.perturb_power(3, 0.1).unwrap()),
        (base.clone(), base.perturb_power(2, 0.1).unwrap()),
        (base.clone(), base.clone()),
    ];
    for (phi0, phi1) in pairs {
        let difference = compact_difference_check(&phi0, &phi1, &cfg).unwrap();
        // Scan single-prime projections over the contact sets for angular
        // obstructions.
        let mut obstructed = false;
        for q in [2u64, 3] {
            let proj = phi0.project_q(&[q]).unwrap();
            if proj.psi().is_constant() {
                continue;
            }
            let gens = GeneratorSet::new(vec![q]).unwrap();
            for pt in gamma_set(&proj, &gens, &cfg).unwrap() {
                let alpha = -pt.theta[0] / (q as f64).ln();
                if let Ok(Verdict::ObstructedComponent { .. }) =
                    essential_lower_bound_difference(&phi0, &phi1, &[q], alpha, &cfg)
                {
                    obstructed = true;
                }
            }
        }
        if matches!(difference, Verdict::CompactDifference { .. }) {
            assert!(!obstructed, "compact difference but component obstruction found");
        }
    }
}
