//! Reproducing kernels on the Hardy space of Dirichlet series.
//!
//! Four families appear: the full kernel `K_w(s) = ζ(w̄ + s)` on `ℂ_{1/2}`,
//! the partial kernel of order `d` built on the first `d` primes, the prime-
//! set kernel `K_{Q,w}(s) = Π_{p∈Q} (1 - p^{-(w̄+s)})^{-1}` on `ℂ₀`, and the
//! single-base variant `K_w^{(q)}(s) = (1 - q^{-w̄}q^{-s})^{-1}`. Norms and
//! inner products are closed-form products or zeta values.
//!
//! Asymptotics pinned by tests: `‖K_{d,w}‖²·(2 Re w)^d → Π_{j≤d} 1/log p_j`
//! as `Re w → 0`, and `‖K_w^{(q)}‖ ~ (2 Re w · log q)^{-1/2}` — expand
//! `1 - q^{-2σ} = 2σ log q + O(σ²)`; the single-base constant is therefore
//! `(2 log q)^{-1/2}`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::symbols::Symbol;

/// Guard margin for the zeta domain `Re s > 1`.
pub const ZETA_GUARD: f64 = 1e-6;
/// Base number of directly summed terms in the zeta evaluation.
pub const ZETA_BASE_TERMS: usize = 50;

/// One of the reproducing-kernel families with its parameter.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum KernelSpec {
    /// `K_w(s) = ζ(w̄ + s)`, `Re w > 1/2`.
    Full { w: Complex64 },
    /// Partial kernel over the first `d` primes, `Re w > 0`.
    PartialD { d: usize, w: Complex64 },
    /// Partial kernel over an explicit prime set, `Re w > 0`.
    PartialQ { primes: Vec<u64>, w: Complex64 },
    /// `K_w^{(q)}(s) = (1 - q^{-w̄}q^{-s})^{-1}`, `Re w > 0`, `q ≥ 2`.
    SinglePrime { q: u64, w: Complex64 },
}

const SMALL_PRIMES: [u64; 20] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71,
];

impl KernelSpec {
    pub fn w(&self) -> Complex64 {
        match self {
            KernelSpec::Full { w }
            | KernelSpec::PartialD { w, .. }
            | KernelSpec::PartialQ { w, .. }
            | KernelSpec::SinglePrime { w, .. } => *w,
        }
    }

    pub fn with_w(&self, w: Complex64) -> KernelSpec {
        match self {
            KernelSpec::Full { .. } => KernelSpec::Full { w },
            KernelSpec::PartialD { d, .. } => KernelSpec::PartialD { d: *d, w },
            KernelSpec::PartialQ { primes, .. } => {
                KernelSpec::PartialQ { primes: primes.clone(), w }
            }
            KernelSpec::SinglePrime { q, .. } => KernelSpec::SinglePrime { q: *q, w },
        }
    }

    /// The primes whose powers the kernel reproduces over, when the family is
    /// one of the product forms.
    pub fn primes(&self) -> Option<Vec<u64>> {
        match self {
            KernelSpec::Full { .. } => None,
            KernelSpec::PartialD { d, .. } => Some(SMALL_PRIMES[..*d].to_vec()),
            KernelSpec::PartialQ { primes, .. } => Some(primes.clone()),
            KernelSpec::SinglePrime { .. } => None,
        }
    }

    /// Number of factors blowing up as `Re w` approaches the domain edge.
    pub fn dimension(&self) -> usize {
        match self {
            KernelSpec::Full { .. } | KernelSpec::SinglePrime { .. } => 1,
            KernelSpec::PartialD { d, .. } => *d,
            KernelSpec::PartialQ { primes, .. } => primes.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            KernelSpec::Full { w } => {
                if w.re <= 0.5 {
                    return Err(Error::Domain(format!(
                        "full kernel needs Re w > 1/2, got {}",
                        w.re
                    )));
                }
            }
            KernelSpec::PartialD { d, w } => {
                if *d == 0 || *d > SMALL_PRIMES.len() {
                    return Err(Error::Domain(format!("partial kernel order {d} unsupported")));
                }
                if w.re <= 0.0 {
                    return Err(Error::Domain(format!(
                        "partial kernel needs Re w > 0, got {}",
                        w.re
                    )));
                }
            }
            KernelSpec::PartialQ { primes, w } => {
                if primes.is_empty() {
                    return Err(Error::Domain("prime set must be nonempty".into()));
                }
                for &p in primes {
                    let f = crate::numtheory::factorize(p)?;
                    if f.factors().len() != 1 || f.factors()[0].1 != 1 {
                        return Err(Error::Domain(format!("{p} is not prime")));
                    }
                }
                if w.re <= 0.0 {
                    return Err(Error::Domain(format!(
                        "partial kernel needs Re w > 0, got {}",
                        w.re
                    )));
                }
            }
            KernelSpec::SinglePrime { q, w } => {
                if *q < 2 {
                    return Err(Error::Domain(format!("base {q} must be at least 2")));
                }
                if w.re <= 0.0 {
                    return Err(Error::Domain(format!("kernel needs Re w > 0, got {}", w.re)));
                }
            }
        }
        Ok(())
    }
}

/// `ζ(s)` for `Re s > 1`, by direct summation plus Euler–Maclaurin tail
/// corrections through the eighth Bernoulli number. The summed prefix grows
/// with `|Im s|` so the correction series stays far from its divergence.
pub fn zeta(s: Complex64) -> Result<Complex64> {
    if s.re <= 1.0 + ZETA_GUARD {
        return Err(Error::Domain(format!(
            "zeta evaluated at Re s = {} but needs Re s > 1 + {ZETA_GUARD}",
            s.re
        )));
    }
    let n0 = ZETA_BASE_TERMS.max(s.im.abs().ceil() as usize + ZETA_BASE_TERMS);
    let mut sum = Complex64::new(0.0, 0.0);
    for n in 1..n0 {
        sum += (-s * (n as f64).ln()).exp();
    }
    let nf = n0 as f64;
    let n_pow = (-s * nf.ln()).exp(); // n0^{-s}
    sum += n_pow * nf / (s - 1.0); // ∫_{n0}^∞ x^{-s} dx = n0^{1-s}/(s-1)
    sum += n_pow * 0.5;
    // Σ_k B_{2k}/(2k)! · s(s+1)⋯(s+2k-2) · n0^{-s-2k+1}
    const BERNOULLI_FACTORS: [f64; 4] = [
        1.0 / 12.0,       // B2/2!
        -1.0 / 720.0,     // B4/4!
        1.0 / 30240.0,    // B6/6!
        -1.0 / 1209600.0, // B8/8!
    ];
    let mut rising = s; // s(s+1)...(s+2k-2), starting at k=1
    let mut power = n_pow / nf; // n0^{-s-2k+1}, starting at k=1
    for (k, &b) in BERNOULLI_FACTORS.iter().enumerate() {
        sum += rising * power * b;
        if k + 1 < BERNOULLI_FACTORS.len() {
            let base = 2.0 * (k as f64 + 1.0);
            rising = rising * (s + (base - 1.0)) * (s + base);
            power /= nf * nf;
        }
    }
    Ok(sum)
}

/// `‖K‖²` in closed form for each family.
pub fn kernel_norm_sq(spec: &KernelSpec) -> Result<f64> {
    spec.validate()?;
    let two_sigma = 2.0 * spec.w().re;
    match spec {
        KernelSpec::Full { .. } => Ok(zeta(Complex64::new(two_sigma, 0.0))?.re),
        KernelSpec::PartialD { .. } | KernelSpec::PartialQ { .. } => {
            let primes = spec.primes().expect("product family");
            Ok(primes
                .iter()
                .map(|&p| 1.0 / (1.0 - (p as f64).powf(-two_sigma)))
                .product())
        }
        KernelSpec::SinglePrime { q, .. } => Ok(1.0 / (1.0 - (*q as f64).powf(-two_sigma))),
    }
}

/// `⟨K_a, K_b⟩` within one family: the closed form evaluated at `w̄_b + w_a`.
pub fn kernel_inner(a: &KernelSpec, b: &KernelSpec) -> Result<Complex64> {
    a.validate()?;
    b.validate()?;
    let x = b.w().conj() + a.w();
    match (a, b) {
        (KernelSpec::Full { .. }, KernelSpec::Full { .. }) => zeta(x),
        (KernelSpec::SinglePrime { q: qa, .. }, KernelSpec::SinglePrime { q: qb, .. }) => {
            if qa != qb {
                return Err(Error::FamilyMismatch);
            }
            let qf = *qa as f64;
            Ok(1.0 / (Complex64::new(1.0, 0.0) - (-x * qf.ln()).exp()))
        }
        _ => {
            let (pa, pb) = (a.primes(), b.primes());
            match (pa, pb) {
                (Some(pa), Some(pb)) if pa == pb => {
                    let mut acc = Complex64::new(1.0, 0.0);
                    for p in pa {
                        let pf = p as f64;
                        acc /= Complex64::new(1.0, 0.0) - (-x * pf.ln()).exp();
                    }
                    Ok(acc)
                }
                _ => Err(Error::FamilyMismatch),
            }
        }
    }
}

/// Partial inner product `⟨f, K⟩ = Σ aₙ n^{-w}` over the indices the kernel
/// reproduces (all indices for the full kernel, powers of `q` for the
/// single-base kernel).
pub fn partial_inner(
    f: &crate::dirichlet::DirichletPolynomial,
    spec: &KernelSpec,
) -> Result<Complex64> {
    spec.validate()?;
    let w = spec.w();
    let mut acc = Complex64::new(0.0, 0.0);
    for (n, c) in f.terms() {
        let keep = match spec {
            KernelSpec::Full { .. } => true,
            KernelSpec::SinglePrime { q, .. } => is_power_of(n, *q),
            _ => {
                let primes = spec.primes().expect("product family");
                crate::numtheory::factorize(n)?
                    .factors()
                    .iter()
                    .all(|(p, _)| primes.contains(p))
            }
        };
        if keep {
            acc += c * (-w * (n as f64).ln()).exp();
        }
    }
    Ok(acc)
}

fn is_power_of(n: u64, q: u64) -> bool {
    if n == 1 {
        return true;
    }
    let mut m = n;
    while m.is_multiple_of(q) {
        m /= q;
    }
    m == 1
}

/// The adjoint image `C*_φ K`.
///
/// For the product families the projection `φ_Q` drives everything: the
/// image stays in the family for positive characteristic and collapses to a
/// full kernel at `φ_Q(w)` for characteristic zero. For the single-base
/// kernel the symbol must have the form `c₁ + c_r r^{-s}`; the image is the
/// full kernel at `φ(w)` when `r` is a power of `q`, and the constant kernel
/// `K_{c₁}` when `r` and `q` are multiplicatively independent.
pub fn adjoint_image(phi: &Symbol, spec: &KernelSpec) -> Result<KernelSpec> {
    spec.validate()?;
    let w = spec.w();
    let image = match spec {
        KernelSpec::Full { .. } => KernelSpec::Full { w: phi.evaluate(w) },
        KernelSpec::PartialD { .. } | KernelSpec::PartialQ { .. } => {
            let primes = spec.primes().expect("product family");
            let projected = phi.project_q(&primes)?;
            let value = projected.evaluate(w);
            if phi.characteristic() >= 1 {
                spec.with_w(value)
            } else {
                KernelSpec::Full { w: value }
            }
        }
        KernelSpec::SinglePrime { q, .. } => {
            if phi.characteristic() != 0 {
                return Err(Error::UnsupportedPairing(
                    "single-base kernels apply to zero-characteristic symbols c1 + c_r r^{-s}"
                        .into(),
                ));
            }
            let support: Vec<u64> = phi.psi().support().into_iter().filter(|&n| n > 1).collect();
            match support.as_slice() {
                [] => KernelSpec::Full { w: phi.c1() },
                [r] => {
                    if is_power_of(*r, *q) {
                        KernelSpec::Full { w: phi.evaluate(w) }
                    } else if crate::numtheory::is_mult_independent(&[*r, *q])? {
                        KernelSpec::Full { w: phi.c1() }
                    } else {
                        return Err(Error::UnsupportedPairing(format!(
                            "{r} and {q} share a power but {r} is not a power of {q}"
                        )));
                    }
                }
                _ => {
                    return Err(Error::UnsupportedPairing(
                        "single-base kernels need a symbol supported on one index".into(),
                    ))
                }
            }
        }
    };
    image.validate()?;
    Ok(image)
}

/// Boundary-approach path for a kernel test sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum KernelPath {
    /// `s_k = 1/k`.
    Radial,
    /// `s_k = 1/k + iM/k`.
    Slanted { m: f64 },
    /// `s_k = 1/k + iM/√k`.
    SqrtSlanted { m: f64 },
    /// `s_k = M/k + i/√k`.
    PrimePower { m: f64 },
}

impl KernelPath {
    pub fn point(&self, k: u64) -> Complex64 {
        let kf = k as f64;
        match *self {
            KernelPath::Radial => Complex64::new(1.0 / kf, 0.0),
            KernelPath::Slanted { m } => Complex64::new(1.0 / kf, m / kf),
            KernelPath::SqrtSlanted { m } => Complex64::new(1.0 / kf, m / kf.sqrt()),
            KernelPath::PrimePower { m } => Complex64::new(m / kf, 1.0 / kf.sqrt()),
        }
    }
}

/// A deterministic sequence of kernels marching toward the boundary.
#[derive(Debug, Clone, Serialize)]
pub struct KernelSequencePlan {
    /// Family template; its `w` is replaced along the path.
    pub family: KernelSpec,
    pub path: KernelPath,
    pub k_start: u64,
    pub k_end: u64,
    pub k_step: u64,
}

impl KernelSequencePlan {
    pub fn points(&self) -> impl Iterator<Item = u64> + '_ {
        (self.k_start..=self.k_end)
            .step_by(self.k_step.max(1) as usize)
            .filter(|&k| k >= 1)
    }

    /// The kernel parameter at index `k`: the path point, offset to the edge
    /// of the full kernel's domain when the family lives on `ℂ_{1/2}`.
    pub fn w_at(&self, k: u64) -> Complex64 {
        let s = self.path.point(k);
        match self.family {
            KernelSpec::Full { .. } => s + Complex64::new(0.5, 0.0),
            _ => s,
        }
    }
}

/// One row of a kernel sequence: index, spec, and its squared norm.
#[derive(Debug, Clone, Serialize)]
pub struct KernelSequenceRow {
    pub k: u64,
    pub spec: KernelSpec,
    pub norm_sq: f64,
}

/// Materializes the plan.
pub fn kernel_sequence(plan: &KernelSequencePlan) -> Result<Vec<KernelSequenceRow>> {
    let mut rows = Vec::new();
    for k in plan.points() {
        let spec = plan.family.with_w(plan.w_at(k));
        let norm_sq = kernel_norm_sq(&spec)?;
        rows.push(KernelSequenceRow { k, spec, norm_sq });
    }
    Ok(rows)
}

/// `norm² · σ^d` where σ is the path parameter (distance from the domain
/// edge): the ratio column of the emitted tables, converging to the family's
/// blow-up constant along radial paths.
pub fn sequence_ratio(plan: &KernelSequencePlan, k: u64, norm_sq: f64) -> f64 {
    let sigma = plan.path.point(k).re;
    norm_sq * sigma.powi(plan.family.dimension() as i32)
}
