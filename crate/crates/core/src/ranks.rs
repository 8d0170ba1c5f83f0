//! Rank functions on tensors: matrix rank, bias and analytic rank, slice
//! rank, partition rank and tensor rank.

use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{PrimeField, QPowerRational};
use crate::linalg::{rank_in_place, EchelonBasis, Matrix};
use crate::subspace::{gaussian_binomial, projective_points, Subspaces};
use crate::tensor::Tensor;

/// Result of a rank computation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum RankValue {
    ExactInt { value: u64 },
    ExactLog { value: f64, bias: QPowerRational },
    /// Certified `lower <= rank <= upper`.
    Bracket { lower: u64, upper: u64, budget_exhausted: bool },
}

impl RankValue {
    pub fn int(value: u64) -> Self {
        RankValue::ExactInt { value }
    }

    fn bracket(lower: u64, upper: u64, budget_exhausted: bool) -> Self {
        debug_assert!(lower <= upper);
        if lower == upper {
            RankValue::ExactInt { value: lower }
        } else {
            RankValue::Bracket {
                lower,
                upper,
                budget_exhausted,
            }
        }
    }

    pub fn lower(&self) -> f64 {
        match self {
            RankValue::ExactInt { value } => *value as f64,
            RankValue::ExactLog { value, .. } => *value,
            RankValue::Bracket { lower, .. } => *lower as f64,
        }
    }

    pub fn upper(&self) -> f64 {
        match self {
            RankValue::ExactInt { value } => *value as f64,
            RankValue::ExactLog { value, .. } => *value,
            RankValue::Bracket { upper, .. } => *upper as f64,
        }
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self, RankValue::Bracket { .. })
    }

    pub fn as_int(&self) -> Option<u64> {
        match self {
            RankValue::ExactInt { value } => Some(*value),
            _ => None,
        }
    }

    pub fn bias(&self) -> Option<&QPowerRational> {
        match self {
            RankValue::ExactLog { bias, .. } => Some(bias),
            _ => None,
        }
    }
}

impl fmt::Display for RankValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RankValue::ExactInt { value } => write!(f, "{value}"),
            RankValue::ExactLog { value, bias } => write!(f, "{value:.6} (bias {bias})"),
            RankValue::Bracket {
                lower,
                upper,
                budget_exhausted,
            } => {
                write!(f, "[{lower}, {upper}]")?;
                if *budget_exhausted {
                    write!(f, " (budget exhausted)")?;
                }
                Ok(())
            }
        }
    }
}

/// Enumeration limits, in candidate evaluations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub bias: u64,
    pub search: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            bias: 1 << 26,
            search: 10_000_000,
        }
    }
}

impl Budget {
    pub fn uniform(n: u64) -> Self {
        Budget { bias: n, search: n }
    }
}

/// The tensor rank functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TensorRankFn {
    Matrix,
    Analytic,
    Slice,
    Partition,
    Tensor,
}

impl TensorRankFn {
    pub const ALL: [TensorRankFn; 5] = [
        TensorRankFn::Matrix,
        TensorRankFn::Analytic,
        TensorRankFn::Slice,
        TensorRankFn::Partition,
        TensorRankFn::Tensor,
    ];

    pub fn compute(self, t: &Tensor, budget: &Budget) -> Result<RankValue> {
        match self {
            TensorRankFn::Matrix => matrix_rank(t),
            TensorRankFn::Analytic => analytic_rank(t, budget),
            TensorRankFn::Slice => Ok(slice_rank(t, budget)),
            TensorRankFn::Partition => Ok(partition_rank(t, budget)),
            TensorRankFn::Tensor => Ok(tensor_rank(t, budget)),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TensorRankFn::Matrix => "matrix",
            TensorRankFn::Analytic => "analytic",
            TensorRankFn::Slice => "slice",
            TensorRankFn::Partition => "partition",
            TensorRankFn::Tensor => "tensor",
        }
    }
}

impl fmt::Display for TensorRankFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TensorRankFn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TensorRankFn::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown rank function `{s}`")))
    }
}

fn has_empty_axis(t: &Tensor) -> bool {
    t.dims().contains(&0)
}

/// Row rank by elimination.
pub fn matrix_rank(t: &Tensor) -> Result<RankValue> {
    Ok(RankValue::int(t.to_matrix()?.rank() as u64))
}

/// Exact bias `E χ(T(x_1, …, x_d))`.
///
/// Counts the points at which the induced linear form on one axis vanishes:
/// the two largest axes are handled by a kernel dimension, the rest are
/// enumerated. Work is `q^(sum of the other dims)` rank computations.
pub fn bias(t: &Tensor, budget: u64) -> Result<QPowerRational> {
    let d = t.order();
    if d < 2 {
        return Err(Error::WrongOrder {
            expected: ">= 2".into(),
            got: d,
        });
    }
    let field = t.field();
    let q = field.q();
    if has_empty_axis(t) {
        return Ok(QPowerRational::one(q));
    }
    let dims = t.dims();
    let mut order: Vec<usize> = (0..d).collect();
    // stable: ties keep the lower axis first
    order.sort_by_key(|&a| dims[a]);
    let b = order[d - 1];
    let a = order[d - 2];
    let enumerated: Vec<usize> = (0..d).filter(|&x| x != a && x != b).collect();
    let enum_exp: u32 = enumerated.iter().map(|&x| dims[x] as u32).sum();
    let needed = (q as u128).checked_pow(enum_exp).unwrap_or(u128::MAX);
    if needed > budget as u128 {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    let perm: Vec<usize> = enumerated.iter().copied().chain([a, b]).collect();
    let tp = t.permute_axes(&perm)?;
    let na = dims[a];
    let hist = rank_histogram(field, tp.entries(), tp.dims());
    let qb = BigUint::from(q);
    let count: BigUint = hist
        .iter()
        .enumerate()
        .map(|(r, &c)| BigUint::from(c) * qb.pow((na - r) as u32))
        .sum();
    QPowerRational::new(count, enum_exp + na as u32, q)
}

/// For `data` of shape `(m_1, …, m_k, n_a, n_b)`, the number of
/// `(x_1, …, x_k)` for which the contracted `n_a × n_b` matrix has each rank.
fn rank_histogram(field: PrimeField, data: &[u8], dims: &[usize]) -> Vec<u64> {
    let na = dims[dims.len() - 2];
    let mut hist = vec![0u64; na + 1];
    if dims.len() == 2 {
        let mut m = data.to_vec();
        hist[rank_in_place(field, dims[0], dims[1], &mut m)] += 1;
        return hist;
    }
    let q = field.q() as usize;
    let m = dims[0];
    let size = data.len() / m;
    // split the first enumerated axis by its leading digits
    let mut split = 0;
    while split < m && q.pow(split as u32) < 256 && q.pow((split + 1) as u32) * 64 <= q.pow(m as u32) {
        split += 1;
    }
    let tasks = q.pow(split as u32);
    (0..tasks)
        .into_par_iter()
        .map(|task| {
            let mut acc = vec![0u8; size];
            let mut t = task;
            for i in (0..split).rev() {
                let coeff = (t % q) as u8;
                t /= q;
                if coeff != 0 {
                    axpy(field, &mut acc, coeff, &data[i * size..(i + 1) * size]);
                }
            }
            let mut local = vec![0u64; na + 1];
            enumerate_level(field, data, dims, split, acc, &mut local);
            local
        })
        .reduce(
            || vec![0u64; na + 1],
            |mut x, y| {
                for (a, b) in x.iter_mut().zip(y) {
                    *a += b;
                }
                x
            },
        )
        .into_iter()
        .zip(hist.iter_mut())
        .for_each(|(v, h)| *h = v);
    hist
}

fn axpy(field: PrimeField, acc: &mut [u8], c: u8, x: &[u8]) {
    for (a, &v) in acc.iter_mut().zip(x) {
        *a = field.add(*a, field.mul(c, v));
    }
}

fn add_assign(field: PrimeField, acc: &mut [u8], x: &[u8]) {
    for (a, &v) in acc.iter_mut().zip(x) {
        *a = field.add(*a, v);
    }
}

/// Runs the odometer over digits `lo..m` of the first axis, where `acc`
/// already holds the contribution of digits `0..lo`. Each digit change adds
/// that slice once, since both `c -> c+1` and `q-1 -> 0` shift by +1.
fn enumerate_level(field: PrimeField, data: &[u8], dims: &[usize], lo: usize, mut acc: Vec<u8>, hist: &mut [u64]) {
    let q = field.q() as u8;
    let m = dims[0];
    let size = data.len() / m;
    let mut digits = vec![0u8; m];
    loop {
        if dims.len() == 3 {
            let mut mtx = acc.clone();
            hist[rank_in_place(field, dims[1], dims[2], &mut mtx)] += 1;
        } else {
            let inner = acc.len() / dims[1];
            enumerate_level(field, &acc, &dims[1..], 0, vec![0u8; inner], hist);
        }
        let mut i = m;
        loop {
            if i == lo {
                return;
            }
            i -= 1;
            add_assign(field, &mut acc, &data[i * size..(i + 1) * size]);
            digits[i] += 1;
            if digits[i] < q {
                break;
            }
            digits[i] = 0;
        }
    }
}

/// `−log_q bias(T)`, with the exact bias attached.
pub fn analytic_rank(t: &Tensor, budget: &Budget) -> Result<RankValue> {
    let b = bias(t, budget.bias)?;
    let value = b.qlog()?;
    Ok(RankValue::ExactLog { value, bias: b })
}

/// Least `r` with `T` a sum of `r` tensors of slice rank one.
///
/// Uses the criterion: rank `<= r` iff there are subspaces `V_i` of total
/// codimension `<= r` on which `T` vanishes. Every axis but the largest gets
/// an enumerated subspace; the best codimension on the largest is the rank
/// of the remaining flattening. Levels are scanned by increasing enumerated
/// codimension, so an interrupted scan at level `s` certifies rank `>= s`.
pub fn slice_rank(t: &Tensor, budget: &Budget) -> RankValue {
    match diagonal_support(t) {
        // a diagonal tensor has slice rank equal to its support size
        Some(s) => RankValue::int(s as u64),
        None => slice_rank_search(t, budget),
    }
}

/// Size of the support when no two nonzero entries share a coordinate on any
/// axis, i.e. when `T` is diagonal up to relabelling and zero padding.
pub fn diagonal_support(t: &Tensor) -> Option<usize> {
    let dims = t.dims();
    let mut seen: Vec<Vec<bool>> = dims.iter().map(|&n| vec![false; n]).collect();
    let mut count = 0;
    let mut idx = vec![0usize; dims.len()];
    for (off, &v) in t.entries().iter().enumerate() {
        if v != 0 {
            let mut rest = off;
            for a in (0..dims.len()).rev() {
                idx[a] = rest % dims[a];
                rest /= dims[a];
            }
            for (a, &i) in idx.iter().enumerate() {
                if std::mem::replace(&mut seen[a][i], true) {
                    return None;
                }
            }
            count += 1;
        }
    }
    Some(count)
}

/// [`slice_rank`] without the diagonal shortcut.
pub fn slice_rank_search(t: &Tensor, budget: &Budget) -> RankValue {
    if t.is_zero() || has_empty_axis(t) {
        return RankValue::int(0);
    }
    let d = t.order();
    if d == 1 {
        return RankValue::int(1);
    }
    let upper = (0..d)
        .map(|a| t.flatten(&[a]).expect("single axis").rank() as u64)
        .min()
        .expect("order >= 2");
    if d == 2 {
        // slice-rank-one matrices are exactly the rank-one matrices
        return RankValue::int(upper);
    }
    let dims = t.dims();
    let last = (0..d).rev().max_by_key(|&a| dims[a]).expect("order >= 2");
    let others: Vec<usize> = (0..d).filter(|&a| a != last).collect();
    let mut search = SliceSearch {
        t,
        last,
        others: &others,
        best: upper,
        nodes: 0,
        budget: budget.search,
    };
    let max_s: usize = others.iter().map(|&a| dims[a]).sum();
    for s in 0..=max_s {
        if s as u64 >= search.best {
            break;
        }
        let mut codims = vec![0usize; others.len()];
        if search.level(s, 0, &mut codims).is_err() {
            return RankValue::bracket((s as u64).min(search.best), search.best, true);
        }
    }
    RankValue::int(search.best)
}

struct SliceSearch<'a> {
    t: &'a Tensor,
    last: usize,
    others: &'a [usize],
    best: u64,
    nodes: u64,
    budget: u64,
}

struct OutOfBudget;

impl SliceSearch<'_> {
    /// Enumerates codimension vectors on `others[j..]` summing to `left`.
    fn level(&mut self, left: usize, j: usize, codims: &mut [usize]) -> std::result::Result<(), OutOfBudget> {
        if j == self.others.len() {
            if left > 0 {
                return Ok(());
            }
            let s: usize = codims.iter().sum();
            return self.subspaces(self.t.clone(), 0, codims, s as u64);
        }
        let n = self.t.dims()[self.others[j]];
        for c in 0..=left.min(n) {
            codims[j] = c;
            self.level(left - c, j + 1, codims)?;
        }
        codims[j] = 0;
        Ok(())
    }

    fn subspaces(&mut self, cur: Tensor, j: usize, codims: &[usize], s: u64) -> std::result::Result<(), OutOfBudget> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(OutOfBudget);
        }
        if j == self.others.len() {
            let r = cur.flatten(&[self.last]).expect("single axis").rank() as u64;
            self.best = self.best.min(s + r);
            return Ok(());
        }
        let axis = self.others[j];
        let n = self.t.dims()[axis];
        for basis in Subspaces::new(self.t.field(), n, n - codims[j]) {
            let next = cur.contract_axis(axis, &basis).expect("basis width matches axis");
            self.subspaces(next, j + 1, codims, s)?;
            if self.best <= s {
                return Ok(());
            }
        }
        Ok(())
    }
}

/// Whether `T` lies in the span of all tensors `a_j ⊗ S` (with `a_j` on axis
/// `i_j`) for some choice of `r` distinct pairs `(i_j, a_j)`, `a_j`
/// projective. Solved directly as a linear membership problem.
pub fn slice_rank_oracle(t: &Tensor, r: usize, budget: u64) -> Result<bool> {
    if t.is_zero() {
        return Ok(true);
    }
    if r == 0 {
        return Ok(false);
    }
    let field = t.field();
    let d = t.order();
    let dims = t.dims().to_vec();
    let len = t.len();
    let strides = t.strides();
    let mut pool: Vec<Vec<Vec<u8>>> = Vec::new();
    for axis in 0..d {
        let rest: Vec<usize> = (0..d).filter(|&x| x != axis).collect();
        for a in projective_points(field, dims[axis]) {
            let mut block = Vec::new();
            let rest_dims: Vec<usize> = rest.iter().map(|&x| dims[x]).collect();
            for idx in index_tuples(&rest_dims) {
                let base: usize = idx.iter().zip(&rest).map(|(&i, &x)| i * strides[x]).sum();
                let mut v = vec![0u8; len];
                for (k, &ak) in a.iter().enumerate() {
                    v[base + k * strides[axis]] = ak;
                }
                block.push(v);
            }
            pool.push(block);
        }
    }
    let r = r.min(pool.len());
    let combos = binomial(pool.len() as u128, r as u128);
    if combos > budget as u128 {
        return Err(Error::BudgetExceeded { needed: combos, budget });
    }
    let target = t.entries().to_vec();
    Ok(oracle_dfs(&pool, 0, r, EchelonBasis::new(field, len), &target))
}

fn oracle_dfs(pool: &[Vec<Vec<u8>>], start: usize, left: usize, basis: EchelonBasis, target: &[u8]) -> bool {
    if left == 0 {
        return basis.contains(target);
    }
    for i in start..=pool.len() - left {
        let mut next = basis.clone();
        for v in &pool[i] {
            next.insert(v.clone());
        }
        if oracle_dfs(pool, i + 1, left - 1, next, target) {
            return true;
        }
    }
    false
}

/// All multi-indices of `dims` in row-major order; one empty tuple if `dims`
/// is empty.
fn index_tuples(dims: &[usize]) -> Vec<Vec<usize>> {
    dims.iter().fold(vec![Vec::new()], |acc, &n| {
        acc.into_iter()
            .flat_map(|p| {
                (0..n).map(move |i| {
                    let mut p = p.clone();
                    p.push(i);
                    p
                })
            })
            .collect()
    })
}

pub(crate) fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul(n - i) {
            Some(v) => v / (i + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Total number of subspaces examined by a complete slice-rank scan; used to
/// size budgets.
pub fn slice_search_size(t: &Tensor) -> BigUint {
    let dims = t.dims();
    let q = t.field().q();
    let last = (0..dims.len()).rev().max_by_key(|&a| dims[a]).unwrap_or(0);
    dims.iter()
        .enumerate()
        .filter(|&(a, _)| a != last)
        .map(|(_, &n)| (0..=n).map(|k| gaussian_binomial(q, n, k)).sum::<BigUint>())
        .product()
}

/// Partition rank: exact for `d <= 3`, where it coincides with matrix or
/// slice rank; for `d >= 4` a bracket whose upper end is the slice rank.
pub fn partition_rank(t: &Tensor, budget: &Budget) -> RankValue {
    match t.order() {
        1 => slice_rank(t, budget),
        2 => RankValue::int(t.to_matrix().expect("order 2").rank() as u64),
        3 => slice_rank(t, budget),
        _ => {
            if t.is_zero() || has_empty_axis(t) {
                return RankValue::int(0);
            }
            let s = slice_rank(t, budget);
            let exhausted = matches!(s, RankValue::Bracket { budget_exhausted: true, .. });
            RankValue::bracket(1, s.upper() as u64, exhausted)
        }
    }
}

/// Largest matrix rank over all flattenings; a lower bound on tensor rank.
pub fn flattening_lower_bound(t: &Tensor) -> u64 {
    let d = t.order();
    if d < 2 {
        return (!t.is_zero()) as u64;
    }
    (1u32..(1 << d) - 1)
        .filter(|m| m & 1 == 1)
        .map(|m| {
            let axes: Vec<usize> = (0..d).filter(|a| m >> a & 1 == 1).collect();
            t.flatten(&axes).expect("strict subset").rank() as u64
        })
        .max()
        .unwrap_or(0)
}

/// Upper bound on tensor rank: along some axis, pick a basis of the slices
/// and sum their (recursively bounded) ranks.
pub fn tensor_rank_upper_bound(t: &Tensor) -> u64 {
    if t.is_zero() || has_empty_axis(t) {
        return 0;
    }
    match t.order() {
        1 => 1,
        2 => t.to_matrix().expect("order 2").rank() as u64,
        d => (0..d)
            .map(|a| {
                t.flatten(&[a])
                    .expect("single axis")
                    .independent_rows()
                    .into_iter()
                    .map(|u| tensor_rank_upper_bound(&t.slice(a, u).expect("in range")))
                    .sum::<u64>()
            })
            .min()
            .expect("order >= 3"),
    }
}

/// Least `r` with `T` a sum of `r` rank-one tensors.
///
/// Along the largest axis, `T` has rank `<= r` iff its slices lie in the span
/// of `r` rank-one tensors over the remaining axes. Candidates are products
/// of projective vectors, tried in lexicographic order by iterative
/// deepening from the flattening bound.
pub fn tensor_rank(t: &Tensor, budget: &Budget) -> RankValue {
    if t.is_zero() || has_empty_axis(t) {
        return RankValue::int(0);
    }
    let d = t.order();
    if d <= 2 {
        return RankValue::int(tensor_rank_upper_bound(t));
    }
    let lower = flattening_lower_bound(t);
    let upper = tensor_rank_upper_bound(t);
    if lower == upper {
        return RankValue::int(lower);
    }
    let field = t.field();
    let dims = t.dims();
    let solve = (0..d).rev().max_by_key(|&a| dims[a]).expect("order >= 3");
    let rest: Vec<usize> = (0..d).filter(|&a| a != solve).collect();
    let pool: Vec<Vec<u8>> = rest
        .iter()
        .map(|&a| projective_points(field, dims[a]))
        .multi_cartesian_product()
        .map(|vs| outer_product(field, &vs))
        .collect();
    let flat = t.flatten(&[solve]).expect("single axis");
    let targets: Vec<Vec<u8>> = flat.independent_rows().into_iter().map(|u| flat.row(u).to_vec()).collect();
    let width = flat.cols();
    let mut nodes = 0u64;
    for r in lower..upper {
        let basis = EchelonBasis::new(field, width);
        match rank_one_dfs(&pool, 0, r as usize, basis, &targets, &mut nodes, budget.search) {
            Some(true) => return RankValue::int(r),
            Some(false) => {}
            None => return RankValue::bracket(r, upper, true),
        }
    }
    RankValue::int(upper)
}

fn outer_product(field: PrimeField, vs: &[Vec<u8>]) -> Vec<u8> {
    let mut out = vec![1u8];
    for v in vs {
        out = out
            .iter()
            .flat_map(|&a| v.iter().map(move |&b| field.mul(a, b)))
            .collect();
    }
    out
}

fn rank_one_dfs(
    pool: &[Vec<u8>],
    start: usize,
    left: usize,
    basis: EchelonBasis,
    targets: &[Vec<u8>],
    nodes: &mut u64,
    budget: u64,
) -> Option<bool> {
    *nodes += 1;
    if *nodes > budget {
        return None;
    }
    if left == 0 {
        return Some(targets.iter().all(|v| basis.contains(v)));
    }
    if basis.rank() + left < targets.len() {
        return Some(false);
    }
    for i in start..pool.len() {
        if pool.len() - i < left {
            break;
        }
        if basis.contains(&pool[i]) {
            continue;
        }
        let mut next = basis.clone();
        next.insert(pool[i].clone());
        if rank_one_dfs(pool, i + 1, left - 1, next, targets, nodes, budget)? {
            return Some(true);
        }
    }
    Some(false)
}

/// Matrix with the given rows, for building tensors in tests and callers.
pub fn stack_rows(field: PrimeField, rows: &[Vec<u8>]) -> Result<Matrix> {
    let cols = rows.first().map_or(0, Vec::len);
    Matrix::new(field, rows.len(), cols, rows.concat())
}
