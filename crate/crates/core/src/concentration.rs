//! Functions on the hypercube `{0,1}^n` under the product measure `π_σ`:
//! two-point distance, Talagrand's inequality, the sub-additive tail bound,
//! the coupling bound, influences and the Margulis–Russo identity.
//!
//! Points are bitmasks: bit `i` is coordinate `i`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ranks::{Budget, TensorRankFn};
use crate::tensor::Tensor;

/// Largest dimension handled by explicit tables.
pub const MAX_N: usize = 24;

const TOL: f64 = 1e-9;

/// An explicit table `f: {0,1}^n → ℝ_{≥0}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypercubeFunction {
    n: usize,
    table: Vec<f64>,
}

impl HypercubeFunction {
    pub fn new(n: usize, table: Vec<f64>) -> Result<Self> {
        if n > MAX_N {
            return Err(Error::InvalidParameter(format!("n = {n} exceeds {MAX_N}")));
        }
        if table.len() != 1 << n {
            return Err(Error::DimensionMismatch(format!("table of length {} for n = {n}", table.len())));
        }
        if let Some(v) = table.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("value {v} is not a finite nonnegative real")));
        }
        Ok(HypercubeFunction { n, table })
    }

    pub fn from_fn(n: usize, f: impl Fn(u32) -> f64) -> Result<Self> {
        if n > MAX_N {
            return Err(Error::InvalidParameter(format!("n = {n} exceeds {MAX_N}")));
        }
        HypercubeFunction::new(n, (0..1u32 << n).map(f).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn at(&self, x: u32) -> f64 {
        self.table[x as usize]
    }

    /// `f(𝟏)`.
    pub fn top(&self) -> f64 {
        self.table[self.table.len() - 1]
    }

    pub fn is_boolean(&self) -> bool {
        self.table.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    pub fn is_monotone(&self) -> bool {
        (0..self.table.len()).all(|x| {
            (0..self.n).all(|i| x >> i & 1 == 1 || self.table[x] <= self.table[x | 1 << i] + TOL)
        })
    }

    pub fn hamming_weight(n: usize) -> Result<Self> {
        HypercubeFunction::from_fn(n, |x| x.count_ones() as f64)
    }

    pub fn dictator(n: usize, i: usize) -> Result<Self> {
        if i >= n {
            return Err(Error::IndexOutOfRange(format!("coordinate {i} of {n}")));
        }
        HypercubeFunction::from_fn(n, |x| (x >> i & 1) as f64)
    }

    pub fn and(n: usize) -> Result<Self> {
        HypercubeFunction::from_fn(n, |x| (x.count_ones() as usize == n) as u8 as f64)
    }

    pub fn or(n: usize) -> Result<Self> {
        HypercubeFunction::from_fn(n, |x| (x != 0) as u8 as f64)
    }

    /// Strict majority; `n` should be odd.
    pub fn majority(n: usize) -> Result<Self> {
        HypercubeFunction::from_fn(n, |x| (2 * x.count_ones() as usize > n) as u8 as f64)
    }

    pub fn parity(n: usize) -> Result<Self> {
        HypercubeFunction::from_fn(n, |x| (x.count_ones() % 2) as f64)
    }

    /// OR of `count` disjoint ANDs of `width` consecutive coordinates, on
    /// `n = width · count` bits.
    pub fn tribes(width: usize, count: usize) -> Result<Self> {
        let block = (1u32 << width) - 1;
        HypercubeFunction::from_fn(width * count, |x| {
            (0..count).any(|t| (x >> (t * width)) & block == block) as u8 as f64
        })
    }
}

/// A nonempty set of points of `{0,1}^n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointSet {
    n: usize,
    members: Vec<u32>,
}

impl PointSet {
    pub fn new(n: usize, mut members: Vec<u32>) -> Result<Self> {
        if n > MAX_N {
            return Err(Error::InvalidParameter(format!("n = {n} exceeds {MAX_N}")));
        }
        if let Some(&m) = members.iter().find(|&&m| (m as u64) >> n != 0) {
            return Err(Error::IndexOutOfRange(format!("point {m:#b} outside {{0,1}}^{n}")));
        }
        members.sort_unstable();
        members.dedup();
        if members.is_empty() {
            return Err(Error::EmptySet);
        }
        Ok(PointSet { n, members })
    }

    pub fn full(n: usize) -> Result<Self> {
        PointSet::new(n, (0..1u32 << n).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn members(&self) -> &[u32] {
        &self.members
    }

    pub fn contains(&self, x: u32) -> bool {
        self.members.binary_search(&x).is_ok()
    }
}

/// A random nonempty subset of `{0,1}^n`: a density `2^{−s}` with `s`
/// uniform in `1..=8`, then each point independently at that density.
pub fn random_point_set<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<PointSet> {
    if n > MAX_N {
        return Err(Error::InvalidParameter(format!("n = {n} exceeds {MAX_N}")));
    }
    let shift = rng.random_range(1..=8u32);
    let mut members: Vec<u32> = (0..1u32 << n).filter(|_| rng.random_range(0..1u32 << shift) == 0).collect();
    if members.is_empty() {
        members.push(rng.random_range(0..1u32 << n));
    }
    PointSet::new(n, members)
}

/// `h_2(x; A) = min_{y,z∈A} |{i : x_i ≠ y_i ∧ x_i ≠ z_i}|` by direct
/// minimisation over ordered pairs.
pub fn h2(x: u32, a: &PointSet) -> u32 {
    let mut best = u32::MAX;
    for &y in &a.members {
        let dy = x ^ y;
        for &z in &a.members {
            best = best.min((dy & (x ^ z)).count_ones());
            if best == 0 {
                return 0;
            }
        }
    }
    best
}

/// `h_2(x; A)` for every `x`.
///
/// `h_2(x; A)` is the Hamming distance from `x` to the union `U` of the
/// subcubes `{w : w_i = y_i wherever y_i = z_i}`. A point `w` lies in `U`
/// iff some `y ∈ A` has a partner `z ∈ A` agreeing with `w` on `w ⊕ y`;
/// distances to `U` come from a breadth-first search.
pub fn h2_all(a: &PointSet) -> Vec<u32> {
    let n = a.n;
    let size = 1usize << n;
    if n > 12 {
        return (0..size as u32).map(|x| h2(x, a)).collect();
    }
    // proj[m] = bitset of { z & m : z ∈ A }
    let words = size.div_ceil(64);
    let mut proj = vec![0u64; size * words];
    for m in 0..size {
        for &z in &a.members {
            let v = z as usize & m;
            proj[m * words + v / 64] |= 1 << (v % 64);
        }
    }
    let mut dist = vec![u32::MAX; size];
    let mut queue = std::collections::VecDeque::new();
    for w in 0..size {
        let in_hull = a.members.iter().any(|&y| {
            let m = w ^ y as usize;
            let v = w & m;
            proj[m * words + v / 64] >> (v % 64) & 1 == 1
        });
        if in_hull {
            dist[w] = 0;
            queue.push_back(w);
        }
    }
    while let Some(w) = queue.pop_front() {
        for i in 0..n {
            let u = w ^ (1 << i);
            if dist[u] == u32::MAX {
                dist[u] = dist[w] + 1;
                queue.push_back(u);
            }
        }
    }
    dist
}

/// A probability `σ` as an exact rational, preferring a small denominator
/// when one reproduces the double.
pub fn sigma_rational(sigma: f64) -> Result<BigRational> {
    if !(0.0..=1.0).contains(&sigma) {
        return Err(Error::InvalidParameter(format!("sigma = {sigma} not in [0, 1]")));
    }
    for den in 1i64..=1000 {
        let num = (sigma * den as f64).round();
        if num / den as f64 == sigma {
            return Ok(BigRational::new(BigInt::from(num as i64), BigInt::from(den)));
        }
    }
    BigRational::from_float(sigma).ok_or_else(|| Error::InvalidParameter(format!("sigma = {sigma}")))
}

/// `σ^j (1−σ)^{n−j}` for `j = 0..=n`.
fn weight_by_level(sigma: &BigRational, n: usize) -> Vec<BigRational> {
    let one = BigRational::one();
    let tau = &one - sigma;
    (0..=n)
        .map(|j| pow_rat(sigma, j) * pow_rat(&tau, n - j))
        .collect()
}

fn pow_rat(x: &BigRational, e: usize) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..e {
        acc *= x;
    }
    acc
}

fn weight_by_level_f64(sigma: f64, n: usize) -> Vec<f64> {
    (0..=n)
        .map(|j| sigma.powi(j as i32) * (1.0 - sigma).powi((n - j) as i32))
        .collect()
}

/// Exact `π_σ^n` of the points selected by `pred`.
fn measure(n: usize, sigma: &BigRational, pred: impl Fn(u32) -> bool) -> BigRational {
    let mut counts = vec![0u64; n + 1];
    for x in 0..1u32 << n {
        if pred(x) {
            counts[x.count_ones() as usize] += 1;
        }
    }
    weight_by_level(sigma, n)
        .into_iter()
        .zip(counts)
        .filter(|(_, c)| *c > 0)
        .map(|(w, c)| w * BigRational::from_integer(BigInt::from(c)))
        .fold(BigRational::zero(), |a, b| a + b)
}

fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// One instance of `Pr[h_2(x; A) >= k] <= 2^{−k} π(A)^{−2}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TalagrandResult {
    pub k: u32,
    pub lhs: BigRational,
    pub pi_a: BigRational,
    pub rhs: f64,
    pub holds: bool,
}

impl TalagrandResult {
    pub fn lhs_f64(&self) -> f64 {
        to_f64(&self.lhs)
    }
}

/// Exact check of Talagrand's inequality for one `k`.
pub fn talagrand_check(a: &PointSet, sigma: f64, k: u32) -> Result<TalagrandResult> {
    let mut all = talagrand_sweep(a, sigma)?;
    let k_clamped = (k as usize).min(a.n + 1);
    if k_clamped <= a.n {
        return Ok(all.swap_remove(k_clamped));
    }
    // beyond n no point is at distance >= k
    let s = sigma_rational(sigma)?;
    let pi_a = measure(a.n, &s, |x| a.contains(x));
    Ok(TalagrandResult {
        k,
        lhs: BigRational::zero(),
        rhs: 2f64.powi(-(k as i32)) / to_f64(&pi_a).powi(2),
        pi_a,
        holds: true,
    })
}

/// Talagrand's inequality for every `k` in `0..=n`, from one distance table.
pub fn talagrand_sweep(a: &PointSet, sigma: f64) -> Result<Vec<TalagrandResult>> {
    if a.n > 20 {
        return Err(Error::InvalidParameter(format!("exact mode needs n <= 20, got {}", a.n)));
    }
    let s = sigma_rational(sigma)?;
    let n = a.n;
    let dist = h2_all(a);
    let weights = weight_by_level(&s, n);
    // hist[j][h] = #{x : |x| = j, h_2(x) = h}
    let mut hist = vec![vec![0u64; n + 1]; n + 1];
    for (x, &h) in dist.iter().enumerate() {
        hist[(x as u32).count_ones() as usize][h as usize] += 1;
    }
    let pi_a = measure(n, &s, |x| a.contains(x));
    let pi_sq = &pi_a * &pi_a;
    let pi_f = to_f64(&pi_a);
    Ok((0..=n as u32)
        .map(|k| {
            let mut lhs = BigRational::zero();
            for (j, row) in hist.iter().enumerate() {
                let c: u64 = row[k as usize..].iter().sum();
                if c > 0 {
                    lhs += &weights[j] * BigRational::from_integer(BigInt::from(c));
                }
            }
            let scaled = &lhs * &pi_sq * BigRational::from_integer(BigInt::from(2u8).pow(k));
            TalagrandResult {
                k,
                holds: scaled <= BigRational::one(),
                rhs: 2f64.powi(-(k as i32)) / (pi_f * pi_f),
                lhs,
                pi_a: pi_a.clone(),
            }
        })
        .collect())
}

/// Monte Carlo estimate of `Pr[h_2(x; A) >= k]` with its standard error.
pub fn talagrand_monte_carlo(a: &PointSet, sigma: f64, k: u32, trials: u64, seed: u64) -> Result<(f64, f64, f64)> {
    if !(0.0..=1.0).contains(&sigma) {
        return Err(Error::InvalidParameter(format!("sigma = {sigma} not in [0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0u64;
    for _ in 0..trials {
        let x = (0..a.n).fold(0u32, |acc, i| acc | ((rng.random::<f64>() < sigma) as u32) << i);
        hits += (h2(x, a) >= k) as u64;
    }
    let p = hits as f64 / trials as f64;
    let se = (p * (1.0 - p) / trials as f64).sqrt();
    let pi_a: f64 = a
        .members
        .iter()
        .map(|&x| sigma.powi(x.count_ones() as i32) * (1.0 - sigma).powi((a.n - x.count_ones() as usize) as i32))
        .sum();
    Ok((p, se, 2f64.powi(-(k as i32)) / (pi_a * pi_a)))
}

/// Violation counts for the hypotheses of the sub-additive tail bound.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FPropertiesReport {
    pub monotone_violations: u64,
    pub subadditive_violations: u64,
    pub lipschitz_violations: u64,
    pub zero_at_origin: bool,
    /// Sub-additivity was checked on samples rather than on all pairs.
    pub sampled: bool,
}

impl FPropertiesReport {
    pub fn passes(&self) -> bool {
        self.monotone_violations == 0
            && self.subadditive_violations == 0
            && self.lipschitz_violations == 0
            && self.zero_at_origin
    }
}

/// Checks monotonicity and the Lipschitz bound on edges (which imply them
/// for all pairs), sub-additivity on all disjoint pairs for `n <= 16` (and
/// on `10^6` seeded samples beyond), and `f(𝟎) = 0`.
pub fn verify_f_properties(f: &HypercubeFunction) -> FPropertiesReport {
    let n = f.n;
    let t = &f.table;
    let mut rep = FPropertiesReport {
        zero_at_origin: t[0].abs() <= TOL,
        ..Default::default()
    };
    for x in 0..t.len() {
        for i in 0..n {
            if x >> i & 1 == 0 {
                let y = x | 1 << i;
                if t[x] > t[y] + TOL {
                    rep.monotone_violations += 1;
                }
                if (t[x] - t[y]).abs() > 1.0 + TOL {
                    rep.lipschitz_violations += 1;
                }
            }
        }
    }
    let full = t.len() - 1;
    let check = |x: usize, y: usize, rep: &mut FPropertiesReport| {
        if t[x | y] > t[x] + t[y] + TOL {
            rep.subadditive_violations += 1;
        }
    };
    if n <= 16 {
        for x in 0..t.len() {
            let comp = full & !x;
            // submasks y of comp, including 0
            let mut y = comp;
            loop {
                check(x, y, &mut rep);
                if y == 0 {
                    break;
                }
                y = (y - 1) & comp;
            }
        }
    } else {
        rep.sampled = true;
        let mut rng = ChaCha8Rng::seed_from_u64(0x5ab);
        for _ in 0..1_000_000 {
            let x = rng.random_range(0..t.len());
            let y = rng.random_range(0..t.len()) & full & !x;
            check(x, y, &mut rep);
        }
    }
    rep
}

/// Exact `Pr_{π_σ}[f(x) <= t]` against the tail bound of the sub-additive
/// concentration lemma.
#[derive(Clone, Debug, PartialEq)]
pub struct TailResult {
    pub r: f64,
    pub threshold: f64,
    pub lhs: BigRational,
    pub rhs: f64,
    pub holds: bool,
}

/// Uses `t = σr/4`, bound `√(3/(2σ)) 2^{−σr/12}` when `σ < 1/2`, and
/// `t = r/6`, bound `√2 · 2^{−r/12}` otherwise, with `r = f(𝟏)`.
pub fn subadditive_tail_check(f: &HypercubeFunction, sigma: f64) -> Result<TailResult> {
    if !(sigma > 0.0 && sigma <= 1.0) {
        return Err(Error::InvalidParameter(format!("sigma = {sigma} not in (0, 1]")));
    }
    let rep = verify_f_properties(f);
    if !rep.passes() {
        return Err(Error::HypothesesViolated(format!("{rep:?}")));
    }
    let r = f.top();
    let (threshold, rhs) = if sigma < 0.5 {
        (sigma * r / 4.0, (3.0 / (2.0 * sigma)).sqrt() * 2f64.powf(-sigma * r / 12.0))
    } else {
        (r / 6.0, 2f64.sqrt() * 2f64.powf(-r / 12.0))
    };
    let s = sigma_rational(sigma)?;
    let lhs = measure(f.n, &s, |x| f.at(x) <= threshold + 1e-12);
    let holds = to_f64(&lhs) <= rhs;
    Ok(TailResult {
        r,
        threshold,
        lhs,
        rhs,
        holds,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CouplingResult {
    pub k: u32,
    pub prob: BigRational,
    pub holds: bool,
}

/// Exact `Pr_{π_{1/k}}[k f(x) >= f(𝟏)]`, which the coupling argument bounds
/// below by `1/k`.
pub fn coupling_check(f: &HypercubeFunction, k: u32) -> Result<CouplingResult> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    let s = BigRational::new(BigInt::one(), BigInt::from(k));
    let r = f.top();
    let prob = measure(f.n, &s, |x| k as f64 * f.at(x) >= r);
    let holds = prob >= s;
    Ok(CouplingResult { k, prob, holds })
}

/// `μ_q[g] = Pr_{π_q}[g = 1]`.
pub fn mu(g: &HypercubeFunction, q: f64) -> Result<f64> {
    if !g.is_boolean() {
        return Err(Error::NotBoolean);
    }
    let w = weight_by_level_f64(q, g.n);
    Ok(g.table
        .iter()
        .enumerate()
        .filter(|(_, &v)| v == 1.0)
        .map(|(x, _)| w[(x as u32).count_ones() as usize])
        .sum())
}

/// Total influence `Σ_i E_{π_σ} |g(x) − g(x^i)|`.
pub fn influence(g: &HypercubeFunction, sigma: f64) -> Result<f64> {
    if !g.is_boolean() {
        return Err(Error::NotBoolean);
    }
    let w = weight_by_level_f64(sigma, g.n);
    let mut total = 0.0;
    for (x, &v) in g.table.iter().enumerate() {
        let pivotal = (0..g.n).filter(|&i| g.table[x ^ 1 << i] != v).count();
        total += pivotal as f64 * w[(x as u32).count_ones() as usize];
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RussoResult {
    pub q: f64,
    pub derivative_fd: f64,
    pub influence: f64,
    pub holds: bool,
}

/// Compares the central difference of `q ↦ μ_q[g]` with `I^{(q)}(g)`.
pub fn russo_check(g: &HypercubeFunction, q: f64, step: f64, tol: f64) -> Result<RussoResult> {
    if !g.is_boolean() {
        return Err(Error::NotBoolean);
    }
    if !g.is_monotone() {
        return Err(Error::NotMonotone);
    }
    if !(q > step && q < 1.0 - step) {
        return Err(Error::InvalidParameter(format!("q = {q} must lie in (step, 1 - step)")));
    }
    let derivative_fd = (mu(g, q + step)? - mu(g, q - step)?) / (2.0 * step);
    let inf = influence(g, q)?;
    Ok(RussoResult {
        q,
        derivative_fd,
        influence: inf,
        holds: (derivative_fd - inf).abs() <= tol,
    })
}

/// `f(𝟏_J) = rank(T restricted to J along axis)`, for exact rank functions.
pub fn row_restriction_function(t: &Tensor, axis: usize, rank_fn: TensorRankFn, budget: &Budget) -> Result<HypercubeFunction> {
    if axis >= t.order() {
        return Err(Error::IndexOutOfRange(format!("axis {axis}")));
    }
    let n = t.dims()[axis];
    if n > MAX_N {
        return Err(Error::InvalidParameter(format!("axis length {n} exceeds {MAX_N}")));
    }
    let mut table = Vec::with_capacity(1 << n);
    for mask in 0..1u32 << n {
        let set: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let r = rank_fn.compute(&t.restrict_axis(axis, &set)?, budget)?;
        if !r.is_exact() {
            return Err(Error::InvalidParameter(format!("inexact {rank_fn} rank {r} on row set {mask:#b}")));
        }
        table.push(r.lower());
    }
    HypercubeFunction::new(n, table)
}

/// Smallest `Δ >= 0` with `Pr_{π_{1.01σ}}[f(x) >= f(𝟏) − Δ] > 1 − ε`.
/// Exploratory only.
pub fn boosting_shift(f: &HypercubeFunction, sigma: f64, epsilon: f64) -> Result<f64> {
    let s = 1.01 * sigma;
    if !(s > 0.0 && s <= 1.0) || !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!("sigma = {sigma}, epsilon = {epsilon}")));
    }
    let w = weight_by_level_f64(s, f.n);
    let r = f.top();
    let mut mass: Vec<(f64, f64)> = f
        .table
        .iter()
        .enumerate()
        .map(|(x, &v)| (r - v, w[(x as u32).count_ones() as usize]))
        .collect();
    mass.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut acc = 0.0;
    for (gap, p) in mass {
        acc += p;
        if acc > 1.0 - epsilon {
            return Ok(gap.max(0.0));
        }
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PrimeField;
    use crate::linalg::Matrix;
    use proptest::prelude::{any, prop, prop_assert, prop_assert_eq, proptest};

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn h2_examples() {
        let a = PointSet::new(2, vec![0b01, 0b10]).unwrap();
        assert_eq!(h2(0b00, &a), 0);
        assert_eq!(h2(0b01, &a), 0);
        let single = PointSet::new(2, vec![0]).unwrap();
        assert_eq!(h2(0b11, &single), 2);
        assert!(matches!(PointSet::new(3, vec![]), Err(Error::EmptySet)));
    }

    #[test]
    fn h2_all_matches_direct() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=9usize {
            for _ in 0..6 {
                let size = rng.random_range(1..=(1usize << n).min(12));
                let members = (0..size).map(|_| rng.random_range(0..1u32 << n)).collect();
                let a = PointSet::new(n, members).unwrap();
                let fast = h2_all(&a);
                for x in 0..1u32 << n {
                    assert_eq!(fast[x as usize], h2(x, &a), "n={n} x={x:b}");
                }
            }
        }
    }

    #[test]
    fn talagrand_trivial_cases() {
        let full = PointSet::full(4).unwrap();
        for k in 1..=5 {
            let r = talagrand_check(&full, 0.3, k).unwrap();
            assert!(r.lhs.is_zero() && r.holds);
        }
        let a = PointSet::new(4, vec![3]).unwrap();
        let r = talagrand_check(&a, 0.5, 0).unwrap();
        assert_eq!(r.lhs, BigRational::one());
        assert!(r.rhs >= 1.0 && r.holds);
    }

    #[test]
    fn talagrand_single_point_by_binomial() {
        // A = {0}: h2(x) = |x|, so lhs = Pr[Bin(n, σ) >= k]
        let n = 6;
        let a = PointSet::new(n, vec![0]).unwrap();
        let sweep = talagrand_sweep(&a, 0.25).unwrap();
        for k in 0..=n {
            let mut expect = BigRational::zero();
            for j in k..=n {
                let binom = (0..j).fold(1i64, |acc, i| acc * (n - i) as i64 / (i as i64 + 1));
                expect += rat(binom, 1) * pow_rat(&rat(1, 4), j) * pow_rat(&rat(3, 4), n - j);
            }
            assert_eq!(sweep[k].lhs, expect);
        }
    }

    #[test]
    fn sigma_rational_prefers_small_denominators() {
        assert_eq!(sigma_rational(0.25).unwrap(), rat(1, 4));
        assert_eq!(sigma_rational(0.3).unwrap(), rat(3, 10));
        assert_eq!(sigma_rational(1.0 / 3.0).unwrap(), rat(1, 3));
        assert!(sigma_rational(1.5).is_err());
    }

    #[test]
    fn f_property_examples() {
        assert!(verify_f_properties(&HypercubeFunction::hamming_weight(8).unwrap()).passes());
        let f2 = PrimeField::gf2();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = Tensor::random_with(f2, vec![8, 6], &mut rng);
        let f = row_restriction_function(&m, 0, TensorRankFn::Matrix, &Budget::default()).unwrap();
        assert!(verify_f_properties(&f).passes());
        let jump = HypercubeFunction::from_fn(5, |x| if x != 0 { 5.0 } else { 0.0 }).unwrap();
        let rep = verify_f_properties(&jump);
        assert!(rep.lipschitz_violations > 0 && !rep.passes());
        let bad_origin = HypercubeFunction::from_fn(3, |x| 1.0 + x.count_ones() as f64).unwrap();
        assert!(!verify_f_properties(&bad_origin).zero_at_origin);
    }

    #[test]
    fn tail_examples() {
        let w = HypercubeFunction::hamming_weight(12).unwrap();
        let r = subadditive_tail_check(&w, 0.5).unwrap();
        assert_eq!(r.lhs, rat(79, 4096));
        assert!((r.rhs - 2f64.sqrt() / 2.0).abs() < 1e-15);
        assert!(r.holds);

        let z = HypercubeFunction::from_fn(4, |_| 0.0).unwrap();
        let r = subadditive_tail_check(&z, 0.3).unwrap();
        assert_eq!(r.lhs, BigRational::one());
        assert!(r.rhs >= 1.0 && r.holds);

        let id = Tensor::from_matrix(&Matrix::identity(PrimeField::gf2(), 10));
        let f = row_restriction_function(&id, 0, TensorRankFn::Matrix, &Budget::default()).unwrap();
        assert!(subadditive_tail_check(&f, 0.25).unwrap().holds);

        let jump = HypercubeFunction::from_fn(3, |x| if x != 0 { 5.0 } else { 0.0 }).unwrap();
        assert!(matches!(subadditive_tail_check(&jump, 0.5), Err(Error::HypothesesViolated(_))));
    }

    #[test]
    fn coupling_examples() {
        let w = HypercubeFunction::hamming_weight(7).unwrap();
        let r = coupling_check(&w, 1).unwrap();
        assert_eq!(r.prob, BigRational::one());
        for k in 2..=5u32 {
            let r = coupling_check(&w, k).unwrap();
            // Pr[Bin(7, 1/k) >= 7/k]
            let mut expect = BigRational::zero();
            for j in 0..=7usize {
                if (k as usize) * j >= 7 {
                    let binom = (0..j).fold(1i64, |acc, i| acc * (7 - i) as i64 / (i as i64 + 1));
                    expect += rat(binom, 1) * pow_rat(&rat(1, k as i64), j) * pow_rat(&rat(k as i64 - 1, k as i64), 7 - j);
                }
            }
            assert_eq!(r.prob, expect);
            assert!(r.holds);
        }
    }

    #[test]
    fn influence_examples() {
        let c = HypercubeFunction::from_fn(4, |_| 1.0).unwrap();
        assert_eq!(influence(&c, 0.3).unwrap(), 0.0);
        for s in [0.1, 0.5, 0.9] {
            assert!((influence(&HypercubeFunction::dictator(5, 2).unwrap(), s).unwrap() - 1.0).abs() < 1e-12);
            assert!((influence(&HypercubeFunction::parity(6).unwrap(), s).unwrap() - 6.0).abs() < 1e-12);
        }
        assert!(matches!(influence(&HypercubeFunction::hamming_weight(3).unwrap(), 0.5), Err(Error::NotBoolean)));
    }

    #[test]
    fn russo_examples() {
        let r = russo_check(&HypercubeFunction::dictator(3, 0).unwrap(), 0.4, 1e-4, 1e-5).unwrap();
        assert!((r.derivative_fd - 1.0).abs() < 1e-9 && r.holds);
        let r = russo_check(&HypercubeFunction::and(3).unwrap(), 0.5, 1e-4, 1e-5).unwrap();
        assert!((r.influence - 0.75).abs() < 1e-12 && r.holds);
        // majority on 5 bits has dμ_q/dq = 5 · C(4,2) q^2 (1−q)^2
        let maj = HypercubeFunction::majority(5).unwrap();
        let q: f64 = 0.3;
        let d_mu = 30.0 * q * q * (1.0 - q).powi(2);
        let r = russo_check(&maj, q, 1e-4, 1e-5).unwrap();
        assert!((r.influence - d_mu).abs() < 1e-12, "{} vs {d_mu}", r.influence);
        assert!(r.holds);
        assert!(matches!(
            russo_check(&HypercubeFunction::parity(3).unwrap(), 0.5, 1e-4, 1e-5),
            Err(Error::NotMonotone)
        ));
    }

    #[test]
    fn tribes_shape() {
        let t = HypercubeFunction::tribes(2, 4).unwrap();
        assert_eq!(t.n(), 8);
        assert_eq!(t.at(0b0000_0011), 1.0);
        assert_eq!(t.at(0b0101_0101), 0.0);
        // μ_{1/2} = 1 − (3/4)^4
        assert!((mu(&t, 0.5).unwrap() - (1.0 - 0.75f64.powi(4))).abs() < 1e-12);
    }

    #[test]
    fn boosting_shift_small_near_full_measure() {
        let w = HypercubeFunction::hamming_weight(6).unwrap();
        let d = boosting_shift(&w, 0.99, 0.5).unwrap();
        assert!(d <= 1.0);
    }

    proptest! {
        #[test]
        fn h2_at_most_hamming_distance(n in 1usize..7, members in prop::collection::vec(any::<u32>(), 1..6), x in any::<u32>()) {
            let mask = (1u32 << n) - 1;
            let a = PointSet::new(n, members.iter().map(|m| m & mask).collect()).unwrap();
            let x = x & mask;
            let ham = a.members().iter().map(|&y| (x ^ y).count_ones()).min().unwrap();
            prop_assert!(h2(x, &a) <= ham);
        }

        #[test]
        fn h2_zero_when_pair_covers(n in 1usize..8, y in any::<u32>(), z in any::<u32>(), pick in any::<u32>()) {
            let mask = (1u32 << n) - 1;
            let (y, z) = (y & mask, z & mask);
            // x takes each coordinate from y or z
            let x = (y & pick | z & !pick) & mask;
            let a = PointSet::new(n, vec![y, z]).unwrap();
            prop_assert_eq!(h2(x, &a), 0);
        }
    }
}
