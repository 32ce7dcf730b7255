//! The symbol model `φ(s) = c₀s + ψ(s)` and its classification.
//!
//! Membership in the Gordon–Hedenmalm class and the restricted/unrestricted
//! range dichotomy reduce, for polynomial `ψ`, to the global minimum of
//! `Re ℬψ` over the distinguished boundary of the polydisc: the real part is
//! pluriharmonic on the closed polydisc, so the minimum is attained on the
//! torus and a dense grid followed by local descent finds it. For linear
//! symbols the minimum also has the closed form `Re c₁ - Σ |c_q|`, which the
//! range report carries as a cross-check value.

use num_complex::Complex64;
use serde::Serialize;

use crate::bohr::{bohr_lift, GeneratorSet, MultivariatePolynomial};
use crate::dirichlet::{exp_base, DirichletPolynomial};
use crate::error::{Error, Result};
use crate::numtheory;

/// Acceptance slack for membership at the range threshold: symbols with
/// unrestricted range sit exactly on it and must not be rejected by rounding.
pub const MEMBERSHIP_TOL: f64 = 1e-7;
/// Default value tolerance for the local descent refinement.
pub const DEFAULT_REFINE_TOL: f64 = 1e-9;
/// Torus dimensions above this are rejected (grid blowup).
pub const MAX_TORUS_DIM: usize = 6;

/// `φ(s) = c₀s + ψ(s)`; the constant `c₁` is ψ's coefficient at n = 1.
#[derive(Debug, Clone, Serialize)]
pub struct Symbol {
    c0: u32,
    psi: DirichletPolynomial,
}

/// Symbols compare by characteristic and coefficients; the truncation is
/// bookkeeping, not part of the mathematical identity.
impl PartialEq for Symbol {
    fn eq(&self, other: &Self) -> bool {
        self.c0 == other.c0
            && self.psi.terms().collect::<Vec<_>>() == other.psi.terms().collect::<Vec<_>>()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum SymbolClass {
    /// `c₀s + c₁ + Σ c_q q^{-s}` over multiplicatively independent generators.
    Linear { generators: Vec<u64> },
    /// Every supported index has at most two prime factors with multiplicity.
    PolynomialDegreeLe2,
    GeneralPolynomial { degree: u32 },
}

/// Outcome of the torus minimization of `Re ℬψ`.
#[derive(Debug, Clone, Serialize)]
pub struct RangeReport {
    /// `inf_{s ∈ ℂ₀} Re φ(s)`, computed as the torus minimum of `Re ℬψ`.
    pub infimum: f64,
    /// Angles of a minimizing torus point (lexicographically smallest found).
    pub witness_theta: Vec<f64>,
    /// The unrestricted-range threshold: 1/2 for c₀ = 0, else 0.
    pub threshold: f64,
    /// True iff the infimum is strictly above the threshold (beyond tolerance).
    pub restricted: bool,
    /// Set when `|infimum - threshold| < tol`: the symbol sits on the edge.
    pub marginal: bool,
    /// Closed-form minimum for linear symbols, as an independent cross-check.
    pub closed_form: Option<f64>,
    /// Generators of the lift that was minimized over.
    pub generators: Vec<u64>,
    /// Grid resolution per angle actually used.
    pub resolution: usize,
}

/// Outcome of the membership test for the class of symbols that generate
/// bounded composition operators.
#[derive(Debug, Clone, Serialize)]
pub struct MembershipReport {
    pub member: bool,
    pub marginal: bool,
    pub reason: String,
    pub infimum: Option<f64>,
    pub threshold: f64,
}

impl Symbol {
    pub fn new(c0: u32, psi: DirichletPolynomial) -> Self {
        Self { c0, psi }
    }

    pub fn constant(c1: Complex64, truncation: u64) -> Self {
        Self { c0: 0, psi: DirichletPolynomial::constant(c1, truncation) }
    }

    pub fn characteristic(&self) -> u32 {
        self.c0
    }

    pub fn psi(&self) -> &DirichletPolynomial {
        &self.psi
    }

    /// The constant term `c₁`.
    pub fn c1(&self) -> Complex64 {
        self.psi.coefficient(1)
    }

    /// `φ(s) = c₀s + ψ(s)`.
    pub fn evaluate(&self, s: Complex64) -> Complex64 {
        s * self.c0 as f64 + self.psi.evaluate(s)
    }

    /// `φ'(s) = c₀ + ψ'(s)`.
    pub fn derivative_at(&self, s: Complex64) -> Complex64 {
        Complex64::new(self.c0 as f64, 0.0) + self.psi.derivative().evaluate(s)
    }

    /// The unrestricted-range threshold for this characteristic.
    pub fn threshold(&self) -> f64 {
        if self.c0 == 0 {
            0.5
        } else {
            0.0
        }
    }

    /// Support of ψ without the constant term.
    fn proper_support(&self) -> Vec<u64> {
        self.psi.support().into_iter().filter(|&n| n > 1).collect()
    }

    /// Degree: the largest Ω(n) over the support of ψ.
    pub fn degree(&self) -> u32 {
        self.proper_support()
            .iter()
            .map(|&n| numtheory::omega(n).expect("positive index"))
            .max()
            .unwrap_or(0)
    }

    /// Linear iff the nonconstant support is multiplicatively independent;
    /// otherwise classified by degree.
    pub fn classify(&self) -> SymbolClass {
        let support = self.proper_support();
        if numtheory::is_mult_independent(&support).expect("positive indices") {
            return SymbolClass::Linear { generators: support };
        }
        let degree = self.degree();
        if degree <= 2 {
            SymbolClass::PolynomialDegreeLe2
        } else {
            SymbolClass::GeneralPolynomial { degree }
        }
    }

    /// Keeps `c₀`, `c₁` and exactly the coefficients all of whose prime
    /// factors lie in `primes`.
    pub fn project_q(&self, primes: &[u64]) -> Result<Symbol> {
        let mut kept = Vec::new();
        for (n, c) in self.psi.terms() {
            let f = numtheory::factorize(n)?;
            if f.factors().iter().all(|(p, _)| primes.contains(p)) {
                kept.push((n, c));
            }
        }
        Ok(Symbol {
            c0: self.c0,
            psi: DirichletPolynomial::from_terms(kept, self.psi.truncation()),
        })
    }

    /// `φ_σ(s) = φ(s + σ)`: the coefficient of `n` becomes `cₙ n^{-σ}` and
    /// the constant absorbs `c₀σ`.
    pub fn shift_sigma(&self, sigma: f64) -> Symbol {
        let shifted = self.psi.horizontal_shift(sigma);
        let constant = DirichletPolynomial::constant(
            Complex64::new(self.c0 as f64 * sigma, 0.0),
            self.psi.truncation(),
        );
        Symbol { c0: self.c0, psi: shifted.add(&constant) }
    }

    /// `φ_λ = c₀s + (1-λ)ψ₀ + λψ₁`; requires equal characteristics.
    pub fn convex_combination(&self, other: &Symbol, lambda: f64) -> Result<Symbol> {
        if self.c0 != other.c0 {
            return Err(Error::CharacteristicMismatch(self.c0, other.c0));
        }
        let psi = self
            .psi
            .scale(Complex64::new(1.0 - lambda, 0.0))
            .add(&other.psi.scale(Complex64::new(lambda, 0.0)));
        Ok(Symbol { c0: self.c0, psi })
    }

    /// Twist ψ by a unimodular character (the characteristic is untouched).
    pub fn twist(&self, chi: &crate::dirichlet::TwistCharacter) -> Symbol {
        Symbol { c0: self.c0, psi: self.psi.twist(chi) }
    }

    /// The default generator set for lifting ψ: its own generators when the
    /// symbol is linear with at least one generator, otherwise the primes of
    /// the support.
    pub fn natural_generators(&self) -> Result<GeneratorSet> {
        match self.classify() {
            SymbolClass::Linear { generators } if !generators.is_empty() => {
                GeneratorSet::new(generators)
            }
            _ => GeneratorSet::primes_of_support(&self.psi),
        }
    }

    /// Bohr lift of ψ over the given generators.
    pub fn lift(&self, generators: &GeneratorSet) -> Result<MultivariatePolynomial> {
        bohr_lift(&self.psi, generators)
    }

    /// Global minimum of `Re ℬψ` over the torus: dense grid plus shrinking
    /// coordinate descent, with the closed form attached for linear symbols.
    pub fn range_infimum(&self, resolution: Option<usize>, refine_tol: f64) -> Result<RangeReport> {
        let generators = self.natural_generators()?;
        self.range_infimum_over(&generators, resolution, refine_tol)
    }

    /// As [`Symbol::range_infimum`] over an explicit generator set.
    pub fn range_infimum_over(
        &self,
        generators: &GeneratorSet,
        resolution: Option<usize>,
        refine_tol: f64,
    ) -> Result<RangeReport> {
        let lift = self.lift(generators)?;
        let d = lift.dim();
        if d > MAX_TORUS_DIM {
            return Err(Error::DimensionGuard(d, MAX_TORUS_DIM));
        }
        let resolution = resolution.unwrap_or_else(|| default_resolution(d));
        let (infimum, witness) = torus_minimum(&lift, resolution, refine_tol);
        let threshold = self.threshold();
        let closed_form = match self.classify() {
            SymbolClass::Linear { generators } if !generators.is_empty() => {
                let sum: f64 = generators
                    .iter()
                    .map(|&q| self.psi.coefficient(q).norm())
                    .sum();
                Some(self.c1().re - sum)
            }
            _ => None,
        };
        Ok(RangeReport {
            infimum,
            witness_theta: witness,
            threshold,
            restricted: infimum > threshold + MEMBERSHIP_TOL,
            marginal: (infimum - threshold).abs() < MEMBERSHIP_TOL,
            closed_form,
            generators: generators.generators().to_vec(),
            resolution,
        })
    }

    /// Membership test: `ψ(ℂ₀) ⊆ ℂ_{1/2}` for characteristic 0, and for
    /// positive characteristic either `ψ ≡ c₁` with `Re c₁ ≥ 0` or
    /// `ψ(ℂ₀) ⊆ ℂ₀`. Constant ψ short-circuits the optimizer.
    pub fn gh_membership(&self) -> Result<MembershipReport> {
        let threshold = self.threshold();
        if self.psi.is_constant() {
            let re = self.c1().re;
            let (member, reason) = if self.c0 == 0 {
                (
                    re >= 0.5 - MEMBERSHIP_TOL,
                    "constant map: needs Re c1 >= 1/2".to_string(),
                )
            } else {
                (
                    re >= -MEMBERSHIP_TOL,
                    "vertical translate plus constant: needs Re c1 >= 0".to_string(),
                )
            };
            let edge = if self.c0 == 0 { 0.5 } else { 0.0 };
            return Ok(MembershipReport {
                member,
                marginal: (re - edge).abs() < MEMBERSHIP_TOL,
                reason,
                infimum: Some(re),
                threshold,
            });
        }
        let range = self.range_infimum(None, DEFAULT_REFINE_TOL)?;
        let member = range.infimum >= threshold - MEMBERSHIP_TOL;
        let reason = if member {
            format!("boundary infimum {:.9} meets threshold {}", range.infimum, threshold)
        } else {
            format!("boundary infimum {:.9} below threshold {}", range.infimum, threshold)
        };
        Ok(MembershipReport {
            member,
            marginal: range.marginal,
            reason,
            infimum: Some(range.infimum),
            threshold,
        })
    }

    /// Convenience: error unless the symbol is in the admissible class.
    pub fn require_membership(&self) -> Result<()> {
        let report = self.gh_membership()?;
        if !report.member {
            return Err(Error::OutsideClass {
                infimum: report.infimum.unwrap_or(f64::NEG_INFINITY),
                threshold: report.threshold,
            });
        }
        Ok(())
    }

    /// The perturbation `c₀s + ψ + δ·baseᵏ` where the base is ψ itself for
    /// positive characteristic and `φ - 1/2` for characteristic zero. The
    /// result is re-verified for membership and rejected with the violated
    /// infimum otherwise.
    pub fn perturb_power(&self, k: u32, delta: f64) -> Result<Symbol> {
        if k < 2 {
            return Err(Error::Precondition(format!(
                "perturbation order k = {k} must be at least 2"
            )));
        }
        let base = if self.c0 >= 1 {
            self.psi.clone()
        } else {
            self.psi.sub(&DirichletPolynomial::constant(
                Complex64::new(0.5, 0.0),
                self.psi.truncation(),
            ))
        };
        let bump = base.power(k)?.scale(Complex64::new(delta, 0.0));
        let candidate = Symbol { c0: self.c0, psi: self.psi.add(&bump) };
        candidate.require_membership()?;
        Ok(candidate)
    }

    /// Truncated action of the composition operator: returns the Dirichlet
    /// polynomial of `f ∘ φ` up to the truncation. Each `n^{-φ(s)}` factors
    /// as `n^{-c₁} · n^{-c₀ s} · Π_p p^{-e_p(n)·ψ̃(s)}` with `ψ̃ = ψ - c₁`.
    pub fn compose(&self, f: &DirichletPolynomial, truncation: u64) -> Result<DirichletPolynomial> {
        let c1 = self.c1();
        let psi_tilde = self.psi.sub(&DirichletPolynomial::constant(c1, self.psi.truncation()));
        let mut acc = DirichletPolynomial::zero(truncation);
        for (n, a_n) in f.terms() {
            // n^{c0} beyond the truncation kills the whole term.
            let log_shift = self.c0 as f64 * (n as f64).ln();
            if log_shift > (truncation as f64).ln() + 1e-9 {
                continue;
            }
            let shift = n.pow(self.c0);
            let scalar = a_n * (-c1 * (n as f64).ln()).exp();
            let mut term = DirichletPolynomial::constant(scalar, truncation);
            for &(p, e) in numtheory::factorize(n)?.factors() {
                let scaled = psi_tilde.scale(Complex64::new(e as f64, 0.0));
                term = term.multiply(&exp_base(p, &scaled, truncation)?);
            }
            let shifted = DirichletPolynomial::from_terms(
                term.terms().filter_map(|(m, c)| m.checked_mul(shift).map(|key| (key, c))),
                truncation,
            );
            acc = acc.add(&shifted);
        }
        Ok(acc)
    }
}

/// Grid defaults: generous at low dimension, coarse where the grid volume
/// explodes.
pub fn default_resolution(d: usize) -> usize {
    match d {
        0..=2 => 256,
        3 => 64,
        _ => 24,
    }
}

/// Dense-grid global minimization of `Re P` over the torus followed by a
/// shrinking-step coordinate descent. Ties on the grid resolve to the
/// lexicographically smallest index, so the witness is deterministic.
pub fn torus_minimum(
    p: &MultivariatePolynomial,
    resolution: usize,
    refine_tol: f64,
) -> (f64, Vec<f64>) {
    let d = p.dim();
    if d == 0 {
        let v = p.eval_polydisc(&[]).expect("dimension 0");
        return (v.re, Vec::new());
    }
    let step = std::f64::consts::TAU / resolution as f64;

    // Per-term, per-axis phase tables turn each grid evaluation into a
    // product of d lookups.
    let terms: Vec<(Vec<u32>, Complex64)> = p.terms().map(|(a, c)| (a.to_vec(), c)).collect();
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

    let mut best = f64::INFINITY;
    let mut best_idx = vec![0usize; d];
    let mut idx = vec![0usize; d];
    'grid: loop {
        let mut re = 0.0;
        for (t, (_, c)) in terms.iter().enumerate() {
            let mut z = *c;
            for (l, &k) in idx.iter().enumerate() {
                z *= tables[t][l][k];
            }
            re += z.re;
        }
        if re < best - 1e-15 {
            best = re;
            best_idx.copy_from_slice(&idx);
        }
        // Odometer increment; finishing the last axis ends the scan.
        let mut l = d;
        while l > 0 {
            l -= 1;
            idx[l] += 1;
            if idx[l] < resolution {
                continue 'grid;
            }
            idx[l] = 0;
        }
        break;
    }
    let theta0: Vec<f64> = best_idx.iter().map(|&k| k as f64 * step).collect();
    descend(p, theta0, step, refine_tol)
}

fn descend(
    p: &MultivariatePolynomial,
    mut theta: Vec<f64>,
    initial_step: f64,
    refine_tol: f64,
) -> (f64, Vec<f64>) {
    let eval = |t: &[f64]| p.eval_torus(t).expect("dimension checked").re;
    let mut value = eval(&theta);
    let mut h = initial_step;
    while h > 1e-13 {
        let mut improved = false;
        for l in 0..theta.len() {
            for dir in [-1.0, 1.0] {
                let mut cand = theta.clone();
                cand[l] = (cand[l] + dir * h).rem_euclid(std::f64::consts::TAU);
                let v = eval(&cand);
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
