//! Rank functions on polynomial maps and the theorem constants attached to
//! them.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{PrimeField, QPowerRational};
use crate::poly::{derivative_tensor, reduced_monomials, PolyMap};
use crate::ranks::{analytic_rank, Budget, RankValue};
use crate::subspace::{gaussian_binomial, Subspaces};

/// Truth table of the monomial `exps` on `GF(q)^n`, indexed by `Σ x_i q^i`.
fn monomial_table(field: PrimeField, n: usize, exps: &[u8]) -> Vec<u8> {
    let one = PolyMap::new(
        field,
        n,
        exps.iter().map(|&e| e as usize).sum(),
        vec![vec![(exps.iter().map(|&e| e as u32).collect(), 1)]],
    )
    .expect("reduced monomial");
    one.truth_tables().pop().unwrap_or_default()
}

fn checked_q_pow(q: u32, e: u64) -> u128 {
    u32::try_from(e)
        .ok()
        .and_then(|e| (q as u128).checked_pow(e))
        .unwrap_or(u128::MAX)
}

/// `−log_q` of the best agreement `Pr_x[φ(x) = ψ(x)]` over maps `ψ` of degree
/// below `φ.d()`, found by enumerating every `ψ`.
pub fn arank_d(phi: &PolyMap, budget: &Budget) -> Result<RankValue> {
    let agreement = best_agreement(phi, budget.bias)?;
    let value = agreement.qlog()?;
    Ok(RankValue::ExactLog { value, bias: agreement })
}

/// The maximal agreement of `φ` with a map of degree below `φ.d()`.
pub fn best_agreement(phi: &PolyMap, budget: u64) -> Result<QPowerRational> {
    let field = phi.field();
    let q = field.q();
    let n = phi.n();
    let k = phi.k();
    let monos = match phi.d() {
        0 => Vec::new(),
        d => reduced_monomials(q, n, d - 1),
    };
    let m = monos.len() as u64;
    let needed = checked_q_pow(q, k as u64 * m).saturating_mul(checked_q_pow(q, n as u64));
    if needed > budget as u128 {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    let size = (q as usize).pow(n as u32);
    let tables = phi.truth_tables();
    let mono_tables: Vec<Vec<u8>> = monos.iter().map(|e| monomial_table(field, n, e)).collect();
    let best = if k == 1 {
        enumerate_psi(field, &mono_tables, size, |psi| {
            psi.iter().zip(&tables[0]).filter(|(a, b)| a == b).count() as u64
        })
        .into_iter()
        .max()
        .unwrap_or(0)
    } else {
        let sets: Vec<Vec<Vec<u64>>> = tables
            .iter()
            .map(|table| {
                let mut all = enumerate_psi(field, &mono_tables, size, |psi| agreement_bits(psi, table));
                all.sort_unstable();
                all.dedup();
                all
            })
            .collect();
        let mut best = 0u64;
        let full = vec![u64::MAX; size.div_ceil(64)];
        intersect_dfs(&sets, 0, full, &mut best);
        best
    };
    QPowerRational::from_u64(best, n as u32, q)
}

fn agreement_bits(psi: &[u8], table: &[u8]) -> Vec<u64> {
    let mut bits = vec![0u64; psi.len().div_ceil(64)];
    for (i, (a, b)) in psi.iter().zip(table).enumerate() {
        if a == b {
            bits[i / 64] |= 1 << (i % 64);
        }
    }
    bits
}

fn intersect_dfs(sets: &[Vec<Vec<u64>>], j: usize, cur: Vec<u64>, best: &mut u64) {
    let count: u64 = cur.iter().map(|w| w.count_ones() as u64).sum();
    if count <= *best {
        return;
    }
    if j == sets.len() {
        *best = count;
        return;
    }
    for s in &sets[j] {
        let next: Vec<u64> = cur.iter().zip(s).map(|(a, b)| a & b).collect();
        intersect_dfs(sets, j + 1, next, best);
    }
}

/// Applies `score` to the truth table of every `ψ = Σ c_m m` in
/// lexicographic order of coefficient vectors. Each odometer digit change
/// adds its monomial table once.
fn enumerate_psi<T: Send>(
    field: PrimeField,
    mono_tables: &[Vec<u8>],
    size: usize,
    score: impl Fn(&[u8]) -> T + Sync,
) -> Vec<T> {
    let q = field.q() as usize;
    let m = mono_tables.len();
    let split = (0..=m).take_while(|&s| q.pow(s as u32) <= 256).last().unwrap_or(0).min(m);
    let tasks = q.pow(split as u32);
    let chunks: Vec<Vec<T>> = (0..tasks)
        .into_par_iter()
        .map(|task| {
            let mut psi = vec![0u8; size];
            let mut t = task;
            // leading digits are the first `split` coefficients
            for i in (0..split).rev() {
                let c = (t % q) as u8;
                t /= q;
                for (p, &v) in psi.iter_mut().zip(&mono_tables[i]) {
                    *p = field.add(*p, field.mul(c, v));
                }
            }
            let mut out = Vec::new();
            let mut digits = vec![0u8; m];
            loop {
                out.push(score(&psi));
                let mut i = m;
                loop {
                    if i == split {
                        return out;
                    }
                    i -= 1;
                    for (p, &v) in psi.iter_mut().zip(&mono_tables[i]) {
                        *p = field.add(*p, v);
                    }
                    digits[i] += 1;
                    if (digits[i] as usize) < q {
                        break;
                    }
                    digits[i] = 0;
                }
            }
        })
        .collect();
    chunks.into_iter().flatten().collect()
}

/// Homogeneous polynomials in `n` variables of degree exactly `a`, as
/// coefficient vectors over `reduced_monomials` of that degree.
fn homogeneous_monomials(q: u32, n: usize, a: usize) -> Vec<Vec<u8>> {
    reduced_monomials(q, n, a)
        .into_iter()
        .filter(|e| e.iter().map(|&x| x as usize).sum::<usize>() == a)
        .collect()
}

/// Least `r` with `P = Q_1 R_1 + … + Q_r R_r + (degree < d)`, `d = P.d()`,
/// `deg Q_i + deg R_i <= d` and both factors nonconstant.
///
/// Only the degree-`d` part matters, so the search runs in the space `V` of
/// degree-`d` parts, where the candidate summands are the top parts of
/// products of homogeneous factors. Distances are found by breadth-first
/// search when `|V|` fits the budget, else by bounded deepening. A found
/// decomposition is rebuilt and checked by full evaluation.
pub fn schmidt_rank(p: &PolyMap, budget: &Budget) -> Result<RankValue> {
    if p.k() != 1 {
        return Err(Error::DimensionMismatch(format!("Schmidt rank needs k = 1, got {}", p.k())));
    }
    let d = p.d();
    let deg = p.degree();
    if deg < d || p.is_zero() {
        return Ok(RankValue::int(0));
    }
    if d == 1 {
        return Ok(RankValue::int(1));
    }
    let field = p.field();
    let q = field.q();
    let n = p.n();
    let top = homogeneous_monomials(q, n, d);
    let top_index: HashMap<&[u8], usize> = top.iter().enumerate().map(|(i, e)| (e.as_slice(), i)).collect();
    let dim = top.len();
    let target: Vec<u8> = {
        let mut v = vec![0u8; dim];
        for t in &p.outputs()[0] {
            if let Some(&i) = top_index.get(t.exps.as_slice()) {
                v[i] = t.coeff;
            }
        }
        v
    };
    let upper = target.iter().filter(|&&c| c != 0).count() as u64;

    // candidate summands with one witness factor pair each
    let mut pool: HashMap<Vec<u8>, (Vec<(Vec<u8>, u8)>, Vec<(Vec<u8>, u8)>)> = HashMap::new();
    let mut work = 0u64;
    for a in 1..=d / 2 {
        let qa = homogeneous_monomials(q, n, a);
        let rb = homogeneous_monomials(q, n, d - a);
        let count = checked_q_pow(q, qa.len() as u64).saturating_mul(checked_q_pow(q, rb.len() as u64));
        if count > budget.search as u128 {
            return Ok(RankValue::Bracket {
                lower: 1,
                upper,
                budget_exhausted: true,
            });
        }
        let qs = all_combinations(q, &qa);
        let rs = all_combinations(q, &rb);
        for qp in &qs {
            for rp in &rs {
                work += 1;
                let mut v = vec![0u8; dim];
                for (eq, cq) in qp {
                    for (er, cr) in rp {
                        let prod: Vec<u32> = eq.iter().zip(er).map(|(&x, &y)| x as u32 + y as u32).collect();
                        if prod.iter().any(|&e| e >= q) {
                            continue;
                        }
                        let key: Vec<u8> = prod.iter().map(|&e| e as u8).collect();
                        let i = top_index[key.as_slice()];
                        v[i] = field.add(v[i], field.mul(*cq, *cr));
                    }
                }
                if v.iter().any(|&c| c != 0) {
                    pool.entry(v).or_insert_with(|| (qp.clone(), rp.clone()));
                }
            }
        }
    }
    let mut pool: Vec<(Vec<u8>, (Vec<(Vec<u8>, u8)>, Vec<(Vec<u8>, u8)>))> = pool.into_iter().collect();
    pool.sort_by(|a, b| a.0.cmp(&b.0));
    let gens: Vec<Vec<u8>> = pool.iter().map(|(v, _)| v.clone()).collect();

    let space = checked_q_pow(q, dim as u64);
    let path = if space.saturating_add(work as u128) <= budget.search as u128 {
        bfs_path(field, dim, &gens, &target)
    } else {
        match deepening_path(field, &gens, &target, upper as usize, budget.search) {
            Deepening::Found(path) => Some(path),
            Deepening::Exhausted(level) => {
                return Ok(RankValue::Bracket {
                    lower: level as u64,
                    upper,
                    budget_exhausted: true,
                })
            }
        }
    };
    let path = path.ok_or_else(|| Error::InternalInconsistency("top part not reachable by products".into()))?;
    verify_schmidt(p, &path.iter().map(|&i| &pool[i].1).collect::<Vec<_>>())?;
    Ok(RankValue::int(path.len() as u64))
}

type Factor = Vec<(Vec<u8>, u8)>;

/// Every coefficient assignment on the given monomials, as sparse factor
/// lists.
fn all_combinations(q: u32, monos: &[Vec<u8>]) -> Vec<Factor> {
    let mut out = Vec::new();
    let mut digits = vec![0u8; monos.len()];
    loop {
        let f: Factor = digits
            .iter()
            .zip(monos)
            .filter(|(&c, _)| c != 0)
            .map(|(&c, e)| (e.clone(), c))
            .collect();
        if !f.is_empty() {
            out.push(f);
        }
        if !crate::subspace::odometer_step(&mut digits, q as u8) {
            return out;
        }
    }
}

fn encode(v: &[u8], q: u32) -> usize {
    v.iter().rev().fold(0usize, |acc, &c| acc * q as usize + c as usize)
}

fn bfs_path(field: PrimeField, dim: usize, gens: &[Vec<u8>], target: &[u8]) -> Option<Vec<usize>> {
    let q = field.q();
    let states = (q as usize).pow(dim as u32);
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; states];
    let mut seen = vec![false; states];
    let goal = encode(target, q);
    let mut queue = VecDeque::new();
    seen[0] = true;
    queue.push_back(vec![0u8; dim]);
    while let Some(v) = queue.pop_front() {
        let code = encode(&v, q);
        if code == goal {
            let mut path = Vec::new();
            let mut c = code;
            while let Some((prev, g)) = parent[c] {
                path.push(g);
                c = prev;
            }
            path.reverse();
            return Some(path);
        }
        for (g, gv) in gens.iter().enumerate() {
            let w: Vec<u8> = v.iter().zip(gv).map(|(&a, &b)| field.add(a, b)).collect();
            let wc = encode(&w, q);
            if !seen[wc] {
                seen[wc] = true;
                parent[wc] = Some((code, g));
                queue.push_back(w);
            }
        }
    }
    None
}

enum Deepening {
    Found(Vec<usize>),
    /// Every level below this one was ruled out.
    Exhausted(usize),
}

fn deepening_path(field: PrimeField, gens: &[Vec<u8>], target: &[u8], upper: usize, budget: u64) -> Deepening {
    fn dfs(
        field: PrimeField,
        gens: &[Vec<u8>],
        residual: &[u8],
        start: usize,
        left: usize,
        path: &mut Vec<usize>,
        nodes: &mut u64,
        budget: u64,
    ) -> Option<bool> {
        *nodes += 1;
        if *nodes > budget {
            return None;
        }
        if left == 0 {
            return Some(residual.iter().all(|&c| c == 0));
        }
        // summands are unordered, so nondecreasing generator indices suffice
        for g in start..gens.len() {
            let next: Vec<u8> = residual.iter().zip(&gens[g]).map(|(&a, &b)| field.sub(a, b)).collect();
            path.push(g);
            if dfs(field, gens, &next, g, left - 1, path, nodes, budget)? {
                return Some(true);
            }
            path.pop();
        }
        Some(false)
    }
    let mut nodes = 0;
    for r in 1..=upper {
        let mut path = Vec::new();
        match dfs(field, gens, target, 0, r, &mut path, &mut nodes, budget) {
            Some(true) => return Deepening::Found(path),
            Some(false) => {}
            None => return Deepening::Exhausted(r),
        }
    }
    Deepening::Exhausted(upper)
}

fn verify_schmidt(p: &PolyMap, pairs: &[&(Factor, Factor)]) -> Result<()> {
    let field = p.field();
    let n = p.n();
    let to_poly = |f: &Factor| {
        let deg = f.iter().map(|(e, _)| e.iter().map(|&x| x as usize).sum::<usize>()).max().unwrap_or(0);
        PolyMap::new(
            field,
            n,
            deg,
            vec![f.iter().map(|(e, c)| (e.iter().map(|&x| x as u32).collect(), *c as u64)).collect()],
        )
        .expect("reduced factor")
    };
    let mut residual = p.truth_tables().pop().unwrap_or_default();
    for (qf, rf) in pairs {
        let qt = to_poly(qf).truth_tables().pop().unwrap_or_default();
        let rt = to_poly(rf).truth_tables().pop().unwrap_or_default();
        for ((res, &a), &b) in residual.iter_mut().zip(&qt).zip(&rt) {
            *res = field.sub(*res, field.mul(a, b));
        }
    }
    let rest = PolyMap::from_truth_tables(field, n, &[residual], None)?;
    if !rest.is_zero() && rest.degree() >= p.d() {
        return Err(Error::InternalInconsistency(format!(
            "Schmidt witness leaves a remainder of degree {}",
            rest.degree()
        )));
    }
    Ok(())
}

/// Least `r` such that `P` is a function of `r` polynomials of degree
/// `<= d_prime`.
///
/// Fibres of a tuple depend only on the span of its entries modulo
/// constants, so `r`-dimensional subspaces of that quotient are enumerated
/// in echelon form and `P` is tested for constancy on each fibre.
pub fn degree_rank(p: &PolyMap, d_prime: usize, budget: &Budget) -> Result<RankValue> {
    if p.k() != 1 {
        return Err(Error::DimensionMismatch(format!("degree rank needs k = 1, got {}", p.k())));
    }
    if d_prime == 0 {
        return Err(Error::InvalidParameter("degree threshold must be >= 1".into()));
    }
    let table = p.truth_tables().pop().unwrap_or_default();
    if table.iter().all(|&v| v == table[0]) {
        return Ok(RankValue::int(0));
    }
    if p.degree() <= d_prime {
        return Ok(RankValue::int(1));
    }
    let field = p.field();
    let q = field.q();
    let n = p.n();
    let monos: Vec<Vec<u8>> = reduced_monomials(q, n, d_prime)
        .into_iter()
        .filter(|e| e.iter().any(|&x| x > 0))
        .collect();
    let mono_tables: Vec<Vec<u8>> = monos.iter().map(|e| monomial_table(field, n, e)).collect();
    let m = monos.len();
    let upper = n as u64;
    let mut nodes = 0u64;
    for r in 2..n {
        let count = gaussian_binomial(q, m, r);
        if count > num_bigint::BigUint::from(budget.search.saturating_sub(nodes)) {
            return Ok(RankValue::Bracket {
                lower: r as u64,
                upper,
                budget_exhausted: true,
            });
        }
        for basis in Subspaces::new(field, m, r) {
            nodes += 1;
            let coords: Vec<Vec<u8>> = (0..r)
                .map(|i| {
                    let mut t = vec![0u8; table.len()];
                    for (c, mt) in basis.row(i).iter().zip(&mono_tables) {
                        if *c != 0 {
                            for (x, &v) in t.iter_mut().zip(mt) {
                                *x = field.add(*x, field.mul(*c, v));
                            }
                        }
                    }
                    t
                })
                .collect();
            if constant_on_fibres(&table, &coords, q) {
                return Ok(RankValue::int(r as u64));
            }
        }
    }
    Ok(RankValue::int(upper))
}

fn constant_on_fibres(table: &[u8], coords: &[Vec<u8>], q: u32) -> bool {
    let mut value_of: HashMap<u128, u8> = HashMap::new();
    for (x, &v) in table.iter().enumerate() {
        let key = coords.iter().fold(0u128, |acc, c| acc * q as u128 + c[x] as u128);
        if *value_of.entry(key).or_insert(v) != v {
            return false;
        }
    }
    true
}

/// A rank value multiplied by a fixed factor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaledRank {
    pub factor: f64,
    pub rank: RankValue,
}

impl ScaledRank {
    pub fn lower(&self) -> f64 {
        self.factor * self.rank.lower()
    }

    pub fn upper(&self) -> f64 {
        self.factor * self.rank.upper()
    }
}

/// `½ · rank_{d−1}(P)` with `d = P.d()`.
pub fn half_degree_rank(p: &PolyMap, budget: &Budget) -> Result<ScaledRank> {
    if p.d() < 2 {
        return Err(Error::InvalidParameter("needs degree bound >= 2".into()));
    }
    Ok(ScaledRank {
        factor: 0.5,
        rank: degree_rank(p, p.d() - 1, budget)?,
    })
}

/// `−log_q ‖χ(P)‖_{U^d}^{2^d}` with `d = P.d()`, computed as the analytic
/// rank of the derivative tensor.
pub fn gowers_arank(p: &PolyMap, budget: &Budget) -> Result<RankValue> {
    if p.d() < 2 {
        return Err(Error::InvalidParameter("Gowers analytic rank needs d >= 2".into()));
    }
    let t = derivative_tensor(p, p.d())?;
    analytic_rank(&t, budget)
}

/// The polynomial rank functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolyRankFn {
    AnalyticD,
    Schmidt,
    Degree { d_prime: usize },
    Gowers,
}

impl PolyRankFn {
    pub fn compute(self, p: &PolyMap, budget: &Budget) -> Result<RankValue> {
        match self {
            PolyRankFn::AnalyticD => arank_d(p, budget),
            PolyRankFn::Schmidt => schmidt_rank(p, budget),
            PolyRankFn::Degree { d_prime } => degree_rank(p, d_prime, budget),
            PolyRankFn::Gowers => gowers_arank(p, budget),
        }
    }
}

impl fmt::Display for PolyRankFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolyRankFn::AnalyticD => f.write_str("arank"),
            PolyRankFn::Schmidt => f.write_str("schmidt"),
            PolyRankFn::Degree { d_prime } => write!(f, "degree:{d_prime}"),
            PolyRankFn::Gowers => f.write_str("gowers"),
        }
    }
}

impl FromStr for PolyRankFn {
    type Err = Error;

    /// Accepts `arank`, `schmidt`, `gowers` and `degree:<d'>`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "arank" => Ok(PolyRankFn::AnalyticD),
            "schmidt" => Ok(PolyRankFn::Schmidt),
            "gowers" => Ok(PolyRankFn::Gowers),
            _ => s
                .strip_prefix("degree:")
                .and_then(|v| v.parse().ok())
                .map(|d_prime| PolyRankFn::Degree { d_prime })
                .ok_or_else(|| Error::InvalidParameter(format!("unknown polynomial rank `{s}`"))),
        }
    }
}

/// Smallest `j >= 0` with `σ 2^j >= 1`, i.e. `⌈log_2(1/σ)⌉`.
pub fn halvings(sigma: f64) -> Result<u32> {
    if !(sigma > 0.0 && sigma <= 1.0) {
        return Err(Error::InvalidParameter(format!("sigma = {sigma} not in (0, 1]")));
    }
    let mut j = 0;
    let mut s = sigma;
    while s < 1.0 {
        s *= 2.0;
        j += 1;
    }
    Ok(j)
}

/// `c(σ, d) = 20^{-e}`; returns `e = (2^d − 1) ⌈log_2(1/σ)⌉`.
pub fn c_exponent(sigma: f64, d: u32) -> Result<u64> {
    let j = halvings(sigma)? as u64;
    let per = 1u64.checked_shl(d).map(|v| v - 1).unwrap_or(u64::MAX);
    Ok(per.saturating_mul(j))
}

/// `c(σ, d) = c(1/2, d)^{⌈log_2(1/σ)⌉}` with `c(1/2, 0) = 1` and
/// `c(1/2, d) = c(1/2, d−1)² / 20`.
pub fn c_constant(sigma: f64, d: u32) -> Result<f64> {
    let e = c_exponent(sigma, d)?;
    if e <= 22 {
        // 20^e = 4^e 5^e is an exact double here
        let mut den = 1.0f64;
        for _ in 0..e {
            den *= 20.0;
        }
        Ok(1.0 / den)
    } else {
        Ok((-(e as f64) * 20f64.ln()).exp())
    }
}

/// `ln c(σ, d)`, finite even where `c` underflows.
pub fn ln_c_constant(sigma: f64, d: u32) -> Result<f64> {
    Ok(-(c_exponent(sigma, d)? as f64) * 20f64.ln())
}

/// `(C, κ)` of the tensor restriction bound `1 − C e^{−κ r}`.
pub fn tensor_theorem_constants(sigma: f64, d: u32) -> Result<(f64, f64)> {
    if !(sigma > 0.0 && sigma <= 1.0) {
        return Err(Error::InvalidParameter(format!("sigma = {sigma} not in (0, 1]")));
    }
    let d_f = d as f64;
    let ln2 = std::f64::consts::LN_2;
    Ok(if sigma < 0.5 {
        (d_f * (3.0 / (2.0 * sigma)).sqrt(), ln2 / 3.0 * (sigma / 4.0).powi(d as i32))
    } else {
        (d_f * 2f64.sqrt(), ln2 / 2.0 * (1.0 / 6.0f64).powi(d as i32))
    })
}

/// Grid maximum of `ln C(t) = c · max(−ln t, −ln(1−t))` over
/// `t ∈ [σ, 1.01σ]` with step `1e-3`, both endpoints included. Returns
/// `(ln C_σ, argmax)` where `C_σ = C(argmax)^{200/σ}`.
pub fn c_sigma_sup(sigma: f64, friedgut_c: f64) -> Result<(f64, f64)> {
    if !(sigma > 0.0 && 1.01 * sigma < 1.0) {
        return Err(Error::InvalidParameter(format!("sigma = {sigma} needs 0 < 1.01 sigma < 1")));
    }
    if !(friedgut_c > 0.0) {
        return Err(Error::InvalidParameter("friedgut_c must be positive".into()));
    }
    let hi = 1.01 * sigma;
    let mut grid: Vec<f64> = (0..).map(|i| sigma + i as f64 * 1e-3).take_while(|&t| t < hi - 1e-12).collect();
    grid.push(hi);
    let ln_c = |t: f64| friedgut_c * (-t.ln()).max(-(1.0 - t).ln());
    let (arg, best) = grid
        .into_iter()
        .map(|t| (t, ln_c(t)))
        .fold((sigma, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
    Ok((200.0 / sigma * best, arg))
}

/// Constants of the polynomial restriction theorem for given `σ, d, ε`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsBundle {
    pub sigma: f64,
    pub d: u32,
    pub epsilon: f64,
    /// `c(σ, d)`.
    pub c_sigma_d: f64,
    /// `c(σ, d) = 20^{-c_exponent}`.
    pub c_exponent: u64,
    /// `c(0.9σ, d) / 4`.
    pub kappa: f64,
    pub ln_kappa: f64,
    pub friedgut_c: Option<f64>,
    /// `ln C_{0.9σ}` on the grid, when `friedgut_c` is known.
    pub ln_c_sup: Option<f64>,
    pub c_sup_argmax: Option<f64>,
    /// `ln R` with `R = 4 C_{0.9σ}^{1/ε²} / c(0.9σ, d)`.
    pub ln_r: Option<f64>,
    pub r: Option<f64>,
    pub r_formula: String,
    /// `(C, κ)` of the tensor bound at this `σ, d`.
    pub tensor_c: f64,
    pub tensor_kappa: f64,
    pub log_base: String,
}

pub fn theorem_constants(sigma: f64, d: u32, epsilon: f64, friedgut_c: Option<f64>) -> Result<ConstantsBundle> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter("epsilon must be positive".into()));
    }
    let c_sigma_d = c_constant(sigma, d)?;
    let s9 = 0.9 * sigma;
    let ln_c9 = ln_c_constant(s9, d)?;
    let kappa = c_constant(s9, d)? / 4.0;
    let ln_kappa = ln_c9 - 4f64.ln();
    let (ln_c_sup, c_sup_argmax) = match friedgut_c {
        Some(c) => {
            let (l, a) = c_sigma_sup(s9, c)?;
            (Some(l), Some(a))
        }
        None => (None, None),
    };
    let ln_r = ln_c_sup.map(|l| 4f64.ln() + l / (epsilon * epsilon) - ln_c9);
    let (tensor_c, tensor_kappa) = tensor_theorem_constants(sigma, d)?;
    Ok(ConstantsBundle {
        sigma,
        d,
        epsilon,
        c_sigma_d,
        c_exponent: c_exponent(sigma, d)?,
        kappa,
        ln_kappa,
        friedgut_c,
        ln_c_sup,
        c_sup_argmax,
        ln_r,
        r: ln_r.map(f64::exp),
        r_formula: format!(
            "R = 4 * C^(1/eps^2) / c(0.9*sigma, d), C = sup_{{t in [{s9}, {}]}} max(t^-c, (1-t)^-c)^(200/{s9})",
            1.01 * s9
        ),
        tensor_c,
        tensor_kappa,
        log_base: "ceil(log2(1/sigma))".into(),
    })
}
