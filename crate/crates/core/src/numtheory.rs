//! Integer factorization, multiplicative independence over ℚ, and the
//! weighted-partition combinatorics behind the coefficients of `p^{-ψ(s)}`.
//!
//! Independence questions are settled by exact rational linear algebra on
//! prime-exponent vectors; no floating point enters any classification gate.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};

/// Canonical factorization of a positive integer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactoredInteger {
    n: u64,
    factors: Vec<(u64, u32)>,
}

impl FactoredInteger {
    pub fn value(&self) -> u64 {
        self.n
    }

    /// `(prime, exponent)` pairs with primes strictly increasing; empty for 1.
    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }
}

/// Factorize by trial division. Inputs in this crate are symbol indices, so
/// quadratic-sieve-grade machinery is deliberately out of scope.
pub fn factorize(n: u64) -> Result<FactoredInteger> {
    if n == 0 {
        return Err(Error::ZeroInput);
    }
    let mut factors = Vec::new();
    let mut m = n;
    let mut push = |p: u64, m: &mut u64| {
        let mut e = 0;
        while (*m).is_multiple_of(p) {
            *m /= p;
            e += 1;
        }
        if e > 0 {
            factors.push((p, e));
        }
    };
    push(2, &mut m);
    let mut p: u64 = 3;
    while p.saturating_mul(p) <= m {
        push(p, &mut m);
        p += 2;
    }
    if m > 1 {
        factors.push((m, 1));
    }
    Ok(FactoredInteger { n, factors })
}

/// Number of prime factors counted with multiplicity; `omega(1) = 0`.
pub fn omega(n: u64) -> Result<u32> {
    Ok(factorize(n)?.factors.iter().map(|&(_, e)| e).sum())
}

/// Largest prime factor, or `None` for `n = 1`.
pub fn p_plus(n: u64) -> Result<Option<u64>> {
    Ok(factorize(n)?.factors.last().map(|&(p, _)| p))
}

/// The sorted union of primes dividing any entry.
pub fn prime_basis(q_list: &[u64]) -> Result<Vec<u64>> {
    let mut basis = Vec::new();
    for &q in q_list {
        for &(p, _) in factorize(q)?.factors() {
            if !basis.contains(&p) {
                basis.push(p);
            }
        }
    }
    basis.sort_unstable();
    Ok(basis)
}

/// Prime-exponent rows of `q_list` over the union prime basis. Row `j` holds
/// the exponents of `q_list[j]` in the order of the returned basis.
pub fn exponent_vectors(q_list: &[u64]) -> Result<(Vec<u64>, Vec<Vec<i64>>)> {
    let basis = prime_basis(q_list)?;
    let mut rows = Vec::with_capacity(q_list.len());
    for &q in q_list {
        let f = factorize(q)?;
        let mut row = vec![0i64; basis.len()];
        for &(p, e) in f.factors() {
            let idx = basis.binary_search(&p).expect("prime is in its own basis");
            row[idx] = e as i64;
        }
        rows.push(row);
    }
    Ok((basis, rows))
}

fn rational_rows(rows: &[Vec<i64>]) -> Vec<Vec<BigRational>> {
    rows.iter()
        .map(|r| r.iter().map(|&x| BigRational::from(BigInt::from(x))).collect())
        .collect()
}

/// Row rank over ℚ by exact Gaussian elimination.
fn rational_rank(rows: &mut [Vec<BigRational>]) -> usize {
    let nrows = rows.len();
    if nrows == 0 {
        return 0;
    }
    let ncols = rows[0].len();
    let mut rank = 0;
    for col in 0..ncols {
        let Some(pivot) = (rank..nrows).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, pivot);
        let inv = rows[rank][col].clone();
        for r in (rank + 1)..nrows {
            if rows[r][col].is_zero() {
                continue;
            }
            let factor = &rows[r][col] / &inv;
            for c in col..ncols {
                let sub = &factor * &rows[rank][c];
                rows[r][c] = &rows[r][c] - sub;
            }
        }
        rank += 1;
        if rank == nrows {
            break;
        }
    }
    rank
}

/// True iff the prime-exponent vectors of `q_list` are linearly independent
/// over ℚ, i.e. no nontrivial relation `q₁^{a₁}⋯q_m^{a_m} = 1` exists.
pub fn is_mult_independent(q_list: &[u64]) -> Result<bool> {
    let (_, rows) = exponent_vectors(q_list)?;
    let mut rat = rational_rows(&rows);
    Ok(rational_rank(&mut rat) == q_list.len())
}

/// True iff the exponent vector of `q` lies in the ℚ-span of the vectors of
/// `q_list`, i.e. `q = q₁^{α₁}⋯q_d^{α_d}` for some rational α.
pub fn in_q_span(q: u64, q_list: &[u64]) -> Result<bool> {
    let mut all = q_list.to_vec();
    all.push(q);
    let (_, rows) = exponent_vectors(&all)?;
    let base_rows: Vec<Vec<i64>> = rows[..q_list.len()].to_vec();
    let mut with_q = rational_rows(&rows);
    let mut without_q = rational_rows(&base_rows);
    // The basis is shared, so the span is unchanged iff the ranks agree.
    Ok(rational_rank(&mut with_q) == rational_rank(&mut without_q))
}

/// Smallest integer whose integer powers generate `n`, i.e. `n^{1/g}` for
/// `g` the gcd of the prime exponents of `n`.
fn primitive_root(n: u64) -> Result<u64> {
    let f = factorize(n)?;
    if f.factors().is_empty() {
        return Ok(1);
    }
    let g = f
        .factors()
        .iter()
        .fold(0u32, |acc, &(_, e)| gcd_u32(acc, e));
    let mut root = 1u64;
    for &(p, e) in f.factors() {
        root *= p.pow(e / g);
    }
    Ok(root)
}

fn gcd_u32(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd_u32(b, a % b)
    }
}

/// When every pair `n, m` in the list satisfies `n^α = m^β` for some positive
/// integers α, β, all entries are integer powers of a single base; this
/// returns the smallest such base. Otherwise returns `None`.
pub fn common_power_base(q_list: &[u64]) -> Result<Option<u64>> {
    if q_list.is_empty() {
        return Ok(None);
    }
    let mut base = None;
    for &q in q_list {
        if q < 2 {
            return Ok(None);
        }
        let root = primitive_root(q)?;
        match base {
            None => base = Some(root),
            Some(b) if b == root => {}
            Some(_) => return Ok(None),
        }
    }
    Ok(base)
}

/// A weighted partition of `l`: strictly increasing part sizes `indices` with
/// positive multiplicities `weights` satisfying `Σ weights[j]·indices[j] = l`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedPartition {
    pub l: u32,
    pub indices: Vec<u32>,
    pub weights: Vec<u32>,
}

impl WeightedPartition {
    pub fn r(&self) -> usize {
        self.indices.len()
    }

    /// `i_r`, the largest part size.
    pub fn max_index(&self) -> u32 {
        *self.indices.last().expect("partitions are nonempty")
    }

    pub fn holds(&self) -> bool {
        let increasing = self.indices.windows(2).all(|w| w[0] < w[1]);
        let positive = self.weights.iter().all(|&g| g > 0)
            && self.indices.iter().all(|&i| i >= 1 && i <= self.l);
        let total: u64 = self
            .indices
            .iter()
            .zip(&self.weights)
            .map(|(&i, &g)| i as u64 * g as u64)
            .sum();
        increasing
            && positive
            && self.indices.len() == self.weights.len()
            && total == self.l as u64
    }
}

pub const MAX_PARTITION_L: u32 = 30;

/// All weighted partitions of `l`, in ascending lexicographic order of
/// `(indices, weights)`. Guarded to `l <= 30`.
pub fn weighted_partitions(l: u32) -> Result<Vec<WeightedPartition>> {
    if !(1..=MAX_PARTITION_L).contains(&l) {
        return Err(Error::EnumerationGuard(l, MAX_PARTITION_L));
    }
    let mut out = Vec::new();
    let mut indices = Vec::new();
    let mut weights = Vec::new();
    enumerate(l, 1, l, &mut indices, &mut weights, &mut out);
    out.sort_by(|a, b| (&a.indices, &a.weights).cmp(&(&b.indices, &b.weights)));
    Ok(out)
}

fn enumerate(
    l: u32,
    next: u32,
    remaining: u32,
    indices: &mut Vec<u32>,
    weights: &mut Vec<u32>,
    out: &mut Vec<WeightedPartition>,
) {
    if remaining == 0 {
        if !indices.is_empty() {
            out.push(WeightedPartition {
                l,
                indices: indices.clone(),
                weights: weights.clone(),
            });
        }
        return;
    }
    for i in next..=remaining {
        for g in 1..=(remaining / i) {
            indices.push(i);
            weights.push(g);
            enumerate(l, i + 1, remaining - g * i, indices, weights, out);
            indices.pop();
            weights.pop();
        }
    }
}

/// The coefficient `u(p, l, r, i, γ) = (-1)^{γ₁+⋯+γᵣ} (log p)^{γ₁+⋯+γᵣ} /
/// (γ₁!⋯γᵣ!)` attached to a weighted partition in the expansion of
/// `p^{-ψ(s)}` as a Dirichlet series.
pub fn partition_coefficient(p: u64, wp: &WeightedPartition) -> f64 {
    debug_assert!(wp.holds());
    let gamma_sum: u32 = wp.weights.iter().sum();
    let mut fact = 1.0f64;
    for &g in &wp.weights {
        for k in 2..=g {
            fact *= k as f64;
        }
    }
    let sign = if gamma_sum.is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * (p as f64).ln().powi(gamma_sum as i32) / fact
}
