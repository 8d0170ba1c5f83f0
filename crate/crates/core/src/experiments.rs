//! Seeded random-restriction experiments.
//!
//! Trial `i` of a run with master seed `s` draws from the ChaCha8 stream
//! `(s, i)`, so a record depends only on `(s, parameters)` and never on the
//! number of worker threads.

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::field::{PrimeField, QPowerRational};
use crate::linalg::Matrix;
use crate::poly::PolyMap;
use crate::polyrank::{c_constant, tensor_theorem_constants, theorem_constants, PolyRankFn};
use crate::ranks::{binomial, flattening_lower_bound, Budget, RankValue, TensorRankFn};
use crate::tensor::{IndexSubsetFamily, Tensor};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Slack, in standard errors, granted to Monte Carlo estimates.
pub const MC_SLACK: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    MonteCarlo,
    ExactEnumeration,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub experiment: String,
    pub params: BTreeMap<String, Value>,
    pub master_seed: u64,
    pub trials: u64,
    pub success_count: u64,
    pub empirical_prob: f64,
    pub stderr: f64,
    pub theoretical_bound: f64,
    pub mode: Mode,
    pub version: String,
    pub holds: bool,
    pub notes: Vec<String>,
}

impl ExperimentRecord {
    fn new(experiment: &str, master_seed: u64, mode: Mode) -> Self {
        ExperimentRecord {
            experiment: experiment.into(),
            params: BTreeMap::new(),
            master_seed,
            trials: 0,
            success_count: 0,
            empirical_prob: 0.0,
            stderr: 0.0,
            theoretical_bound: 0.0,
            mode,
            version: VERSION.into(),
            holds: true,
            notes: Vec::new(),
        }
    }

    fn param(&mut self, key: &str, v: impl Serialize) -> &mut Self {
        self.params.insert(key.into(), json!(v));
        self
    }

    fn set_counts(&mut self, trials: u64, successes: u64) {
        self.trials = trials;
        self.success_count = successes;
        let (p, se) = proportion(successes, trials);
        self.empirical_prob = p;
        self.stderr = se;
    }

    /// Pretty JSON with keys in lexicographic order.
    pub fn to_json(&self) -> String {
        let v = serde_json::to_value(self).expect("record serializes");
        serde_json::to_string_pretty(&v).expect("value serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse {
            line: e.line(),
            msg: e.to_string(),
        })
    }
}

const CSV_FIXED: [&str; 11] = [
    "experiment",
    "master_seed",
    "trials",
    "success_count",
    "empirical_prob",
    "stderr",
    "theoretical_bound",
    "mode",
    "version",
    "holds",
    "notes",
];

/// Flat CSV: the fixed fields, then one `param_<key>` column per parameter
/// key appearing in any record, in key order.
pub fn records_to_csv(records: &[ExperimentRecord]) -> Result<String> {
    let keys: BTreeSet<&String> = records.iter().flat_map(|r| r.params.keys()).collect();
    let mut w = csv::Writer::from_writer(Vec::new());
    let header: Vec<String> = CSV_FIXED
        .iter()
        .map(|s| s.to_string())
        .chain(keys.iter().map(|k| format!("param_{k}")))
        .collect();
    let io = |e: csv::Error| Error::Io {
        path: "<csv>".into(),
        msg: e.to_string(),
    };
    w.write_record(&header).map_err(io)?;
    for r in records {
        let mode = serde_json::to_value(r.mode).expect("mode serializes");
        let mut row = vec![
            r.experiment.clone(),
            r.master_seed.to_string(),
            r.trials.to_string(),
            r.success_count.to_string(),
            r.empirical_prob.to_string(),
            r.stderr.to_string(),
            r.theoretical_bound.to_string(),
            mode.as_str().unwrap_or_default().to_string(),
            r.version.clone(),
            r.holds.to_string(),
            r.notes.join("; "),
        ];
        for k in &keys {
            row.push(match r.params.get(*k) {
                None => String::new(),
                Some(Value::String(s)) => s.clone(),
                Some(v) => v.to_string(),
            });
        }
        w.write_record(&row).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io {
        path: "<csv>".into(),
        msg: e.to_string(),
    })?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

/// `(p̂, √(p̂(1−p̂)/n))`.
pub fn proportion(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 0.0);
    }
    let p = successes as f64 / trials as f64;
    (p, (p * (1.0 - p) / trials as f64).sqrt())
}

/// The random stream of one trial.
pub fn trial_rng(master_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial);
    rng
}

/// `I ∼ [n]_σ`: each element of `0..n` independently with probability `σ`.
pub fn bernoulli_subset<R: Rng + ?Sized>(n: usize, sigma: f64, rng: &mut R) -> Vec<usize> {
    (0..n).filter(|_| rng.random::<f64>() < sigma).collect()
}

/// Each element of `set` independently with probability `p`.
pub fn bernoulli_sub<R: Rng + ?Sized>(set: &[usize], p: f64, rng: &mut R) -> Vec<usize> {
    set.iter().copied().filter(|_| rng.random::<f64>() < p).collect()
}

/// Runs `f` inside a dedicated pool of `threads` workers.
pub fn with_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> Result<R> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Samples a key per trial from its own stream, evaluates `eval` once per
/// distinct key (in parallel), and returns the per-trial values in trial
/// order.
fn run_keyed<K, V>(
    master_seed: u64,
    trials: u64,
    sample: impl Fn(&mut ChaCha8Rng) -> K + Sync,
    eval: impl Fn(&K) -> Result<V> + Sync,
) -> Result<Vec<(K, V)>>
where
    K: Ord + Clone + Send + Sync,
    V: Clone + Send + Sync,
{
    let keys: Vec<K> = (0..trials)
        .into_par_iter()
        .map(|i| sample(&mut trial_rng(master_seed, i)))
        .collect();
    let distinct: Vec<K> = keys.iter().cloned().collect::<BTreeSet<K>>().into_iter().collect();
    let values: Vec<V> = distinct.par_iter().map(&eval).collect::<Result<_>>()?;
    let table: BTreeMap<K, V> = distinct.into_iter().zip(values).collect();
    Ok(keys
        .into_iter()
        .map(|k| {
            let v = table[&k].clone();
            (k, v)
        })
        .collect())
}

fn check_sigma(sigma: f64) -> Result<()> {
    if (0.0..=1.0).contains(&sigma) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("sigma = {sigma} not in [0, 1]")))
    }
}

/// Marks `holds` from `p̂ >= max(bound, 0) − 3·stderr`, noting vacuous bounds.
fn judge_lower_bound(rec: &mut ExperimentRecord, bound: f64) {
    rec.theoretical_bound = bound.max(0.0);
    if bound <= 0.0 {
        rec.notes.push("vacuous bound".into());
    }
    rec.holds = rec.empirical_prob >= rec.theoretical_bound - MC_SLACK * rec.stderr;
}

/// A uniformly random `n × n` matrix of rank exactly `r`, as a product of
/// uniform `n × r` and `r × n` factors, redrawn until the rank is `r`.
pub fn random_rank_matrix<R: Rng + ?Sized>(field: PrimeField, n: usize, r: usize, rng: &mut R) -> Result<Matrix> {
    if r > n {
        return Err(Error::InvalidParameter(format!("rank {r} exceeds size {n}")));
    }
    loop {
        let a = Tensor::random_with(field, vec![n, r], rng).to_matrix()?;
        let b = Tensor::random_with(field, vec![r, n], rng).to_matrix()?;
        let m = a.mul(&b)?;
        if m.rank() == r {
            return Ok(m);
        }
    }
}

/// Monte Carlo estimate of `Pr[rank(A|_{I×I}) >= ρ² r / 4]` against
/// `1 − 2 e^{−ρ² r / 16}`, with `ρ = 1 − √(1 − σ)`.
pub fn matrix_restriction_experiment(a: &Matrix, sigma: f64, trials: u64, seed: u64) -> Result<ExperimentRecord> {
    check_sigma(sigma)?;
    if a.rows() != a.cols() {
        return Err(Error::ShapeMismatch(format!("{}x{} matrix is not square", a.rows(), a.cols())));
    }
    let n = a.rows();
    let r = a.rank() as f64;
    let rho = 1.0 - (1.0 - sigma).sqrt();
    let threshold = rho * rho * r / 4.0;
    let bound = 1.0 - 2.0 * (-rho * rho * r / 16.0).exp();
    let outcomes = run_keyed(
        seed,
        trials,
        |rng| bernoulli_subset(n, sigma, rng),
        |set| Ok(a.submatrix(set, set).rank() as f64 >= threshold),
    )?;
    let mut rec = ExperimentRecord::new("matrix_restriction", seed, Mode::MonteCarlo);
    rec.param("sigma", sigma)
        .param("n", n)
        .param("q", a.field().q())
        .param("rank", r)
        .param("rho", rho)
        .param("threshold", threshold)
        .param("rank_function", "matrix");
    rec.set_counts(trials, outcomes.iter().filter(|(_, ok)| *ok).count() as u64);
    judge_lower_bound(&mut rec, bound);
    Ok(rec)
}

/// Monte Carlo estimate of `Pr[rank(T|_{I_1×…×I_d}) >= κ rank(T)]` against
/// `1 − C e^{−κ rank(T)}`. Symmetric mode uses one set `I` on every axis.
pub fn tensor_restriction_experiment(
    t: &Tensor,
    sigma: f64,
    rank_fn: TensorRankFn,
    trials: u64,
    seed: u64,
    symmetric: bool,
    budget: &Budget,
) -> Result<ExperimentRecord> {
    check_sigma(sigma)?;
    if sigma == 0.0 {
        return Err(Error::InvalidParameter("sigma must be positive".into()));
    }
    let d = t.order();
    let dims = t.dims().to_vec();
    if symmetric && dims.iter().any(|&n| n != dims[0]) {
        return Err(Error::ShapeMismatch(format!("symmetric mode needs equal axes, got {dims:?}")));
    }
    let full = rank_fn.compute(t, budget)?;
    let r = full.upper();
    let (c, kappa) = tensor_theorem_constants(sigma, d as u32)?;
    let threshold = kappa * r;
    let bound = 1.0 - c * (-kappa * full.lower()).exp();
    let outcomes = run_keyed(
        seed,
        trials,
        |rng| {
            if symmetric {
                let s = bernoulli_subset(dims[0], sigma, rng);
                vec![s; d]
            } else {
                dims.iter().map(|&n| bernoulli_subset(n, sigma, rng)).collect()
            }
        },
        |sets| {
            let sub = t.restrict(&IndexSubsetFamily::new(sets.clone(), &dims)?)?;
            Ok(rank_fn.compute(&sub, budget)?.lower() >= threshold)
        },
    )?;
    let name = if symmetric {
        "tensor_restriction_symmetric"
    } else {
        "tensor_restriction"
    };
    let mut rec = ExperimentRecord::new(name, seed, Mode::MonteCarlo);
    rec.param("sigma", sigma)
        .param("d", d)
        .param("dims", &dims)
        .param("q", t.field().q())
        .param("rank_function", rank_fn.name())
        .param("rank", &full)
        .param("C", c)
        .param("kappa", kappa)
        .param("threshold", threshold)
        .param("symmetric", symmetric);
    rec.set_counts(trials, outcomes.iter().filter(|(_, ok)| *ok).count() as u64);
    judge_lower_bound(&mut rec, bound);
    Ok(rec)
}

/// For the all-ones diagonal `d`-tensor of size `n`, the slice rank of a
/// random restriction is `|I_1 ∩ … ∩ I_d|`, with mean `σ^d n`.
///
/// Each of the `n · trials` diagonal positions survives independently with
/// probability `σ^d`; the record counts survivals, so `empirical_prob` is the
/// mean rank divided by `n`.
pub fn diagonal_kappa_witness(n: usize, d: usize, sigma: f64, trials: u64, seed: u64) -> Result<ExperimentRecord> {
    check_sigma(sigma)?;
    if d == 0 {
        return Err(Error::InvalidParameter("d must be positive".into()));
    }
    let t = Tensor::diagonal_ones(PrimeField::gf2(), d, n);
    let ranks: Vec<u64> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            let sets: Vec<Vec<usize>> = (0..d).map(|_| bernoulli_subset(n, sigma, &mut rng)).collect();
            // the support of a restricted diagonal tensor is its slice rank
            t.restrict_unchecked(&sets).nnz() as u64
        })
        .collect();
    let total: u64 = ranks.iter().sum();
    let events = n as u64 * trials;
    let (p, se) = proportion(total, events);
    let exact_mean = sigma.powi(d as i32) * n as f64;
    let mut rec = ExperimentRecord::new("diagonal_kappa_witness", seed, Mode::MonteCarlo);
    rec.param("sigma", sigma)
        .param("d", d)
        .param("n", n)
        .param("rank_function", "slice")
        .param("mean_rank", p * n as f64)
        .param("mean_rank_stderr", se * n as f64)
        .param("exact_mean", exact_mean)
        .param("sigma_pow_d", sigma.powi(d as i32))
        .param("diagonal_positions", events);
    rec.trials = trials;
    rec.success_count = total;
    rec.empirical_prob = p;
    rec.stderr = se;
    rec.theoretical_bound = sigma.powi(d as i32);
    rec.holds = (p - rec.theoretical_bound).abs() <= MC_SLACK * se + 1e-12;
    rec.notes.push("success_count counts surviving diagonal positions over n * trials".into());
    Ok(rec)
}

/// The identity-plus-ones tensor loses all but rank one when its last axis is
/// restricted by `[2]_σ` and slice 0 is dropped, which happens with
/// probability `1 − σ`, although its tensor rank is at least `n`.
pub fn counterexample_experiment(field: PrimeField, n: usize, sigma: f64, trials: u64, seed: u64, budget: &Budget) -> Result<ExperimentRecord> {
    check_sigma(sigma)?;
    let t = Tensor::identity_ones(field, n);
    let flat = flattening_lower_bound(&t);
    let full = TensorRankFn::Tensor.compute(&t, budget)?;
    let dropped = TensorRankFn::Tensor.compute(&t.restrict_axis(2, &[1])?, budget)?;
    let lipschitz_gap = full.lower() - dropped.upper();
    let outcomes = run_keyed(
        seed,
        trials,
        |rng| bernoulli_subset(2, sigma, rng),
        |set| TensorRankFn::Tensor.compute(&t.restrict_axis(2, set)?, budget),
    )?;
    let successes = outcomes.iter().filter(|(_, r)| r.upper() <= 1.0).count() as u64;
    let mut rec = ExperimentRecord::new("counterexample", seed, Mode::MonteCarlo);
    rec.param("sigma", sigma)
        .param("n", n)
        .param("q", field.q())
        .param("rank_function", "tensor")
        .param("flattening_lower_bound", flat)
        .param("tensor_rank", &full)
        .param("tensor_rank_without_identity_slice", &dropped)
        .param("lipschitz_gap", lipschitz_gap)
        .param("lipschitz_violated", lipschitz_gap > 1.0);
    rec.set_counts(trials, successes);
    rec.theoretical_bound = 1.0 - sigma;
    rec.holds = (rec.empirical_prob - rec.theoretical_bound).abs() <= MC_SLACK * rec.stderr + 1e-12
        && flat >= n as u64
        && lipschitz_gap > 1.0;
    if outcomes.iter().any(|(_, r)| !r.is_exact()) {
        rec.notes.push("some restricted ranks are brackets; success requires upper <= 1".into());
    }
    Ok(rec)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExpectationMode {
    Exact,
    MonteCarlo { trials: u64, seed: u64 },
}

/// `E_{J∼[n]_σ} rank(φ|_J)` against `c(σ, d) rank(φ)`, with `d = φ.d()`.
/// Restricted ranks enter by their lower ends and `rank(φ)` by its upper end.
pub fn expectation_check(
    phi: &PolyMap,
    sigma: f64,
    rank_fn: PolyRankFn,
    mode: ExpectationMode,
    budget: &Budget,
) -> Result<ExperimentRecord> {
    check_sigma(sigma)?;
    let n = phi.n();
    let d = phi.d() as u32;
    let full = rank_fn.compute(phi, budget)?;
    let c = c_constant(sigma, d)?;
    let rhs = c * full.upper();
    let rank_of = |set: &Vec<usize>| -> Result<f64> { Ok(rank_fn.compute(&phi.restrict(set)?, budget)?.lower()) };
    let mut rec;
    match mode {
        ExpectationMode::Exact => {
            if n > 16 {
                return Err(Error::InvalidParameter(format!("exact mode needs n <= 16, got {n}")));
            }
            let masks: Vec<u32> = (0..1u32 << n).collect();
            let ranks: Vec<f64> = masks
                .par_iter()
                .map(|&m| rank_of(&(0..n).filter(|i| m >> i & 1 == 1).collect()))
                .collect::<Result<_>>()?;
            let expectation: f64 = masks
                .iter()
                .zip(&ranks)
                .map(|(&m, &r)| {
                    let k = m.count_ones() as i32;
                    sigma.powi(k) * (1.0 - sigma).powi(n as i32 - k) * r
                })
                .sum();
            rec = ExperimentRecord::new("expectation", 0, Mode::ExactEnumeration);
            rec.trials = masks.len() as u64;
            rec.success_count = ranks.iter().filter(|&&r| r > 0.0).count() as u64;
            rec.param("expectation", expectation);
            rec.empirical_prob = expectation;
            rec.holds = expectation >= rhs;
            rec.notes.push("exact: trials counts subsets J, success_count those with positive rank".into());
        }
        ExpectationMode::MonteCarlo { trials, seed } => {
            let outcomes = run_keyed(seed, trials, |rng| bernoulli_subset(n, sigma, rng), rank_of)?;
            let vals: Vec<f64> = outcomes.iter().map(|(_, r)| *r).collect();
            let mean = vals.iter().sum::<f64>() / trials.max(1) as f64;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (trials.max(2) - 1) as f64;
            let se = (var / trials.max(1) as f64).sqrt();
            rec = ExperimentRecord::new("expectation", seed, Mode::MonteCarlo);
            rec.trials = trials;
            rec.success_count = vals.iter().filter(|&&r| r > 0.0).count() as u64;
            rec.param("expectation", mean);
            rec.empirical_prob = mean;
            rec.stderr = se;
            rec.holds = mean >= rhs - MC_SLACK * se;
            rec.notes.push("empirical_prob holds the sample mean of rank(phi|_J)".into());
        }
    }
    rec.param("sigma", sigma)
        .param("n", n)
        .param("d", d)
        .param("q", phi.field().q())
        .param("rank_function", rank_fn.to_string())
        .param("rank", &full)
        .param("c_sigma_d", c);
    rec.theoretical_bound = rhs;
    Ok(rec)
}

/// Monte Carlo estimate of `Pr[rank(φ|_I) >= κ rank(φ)]` against `1 − ε`.
///
/// The bound applies once `rank(φ) >= R`; without a value for the
/// hypercontractivity constant `R` is unknown, the comparison is
/// informational and `holds` only fails on a certified violation.
#[allow(clippy::too_many_arguments)]
pub fn poly_restriction_experiment(
    phi: &PolyMap,
    sigma: f64,
    epsilon: f64,
    rank_fn: PolyRankFn,
    trials: u64,
    seed: u64,
    friedgut_c: Option<f64>,
    budget: &Budget,
) -> Result<ExperimentRecord> {
    check_sigma(sigma)?;
    let n = phi.n();
    let consts = theorem_constants(sigma, phi.d() as u32, epsilon, friedgut_c)?;
    let full = rank_fn.compute(phi, budget)?;
    let threshold = consts.kappa * full.upper();
    let outcomes = run_keyed(
        seed,
        trials,
        |rng| bernoulli_subset(n, sigma, rng),
        |set| Ok(rank_fn.compute(&phi.restrict(set)?, budget)?.lower() >= threshold),
    )?;
    let mut rec = ExperimentRecord::new("poly_restriction", seed, Mode::MonteCarlo);
    rec.param("sigma", sigma)
        .param("epsilon", epsilon)
        .param("n", n)
        .param("k", phi.k())
        .param("d", phi.d())
        .param("q", phi.field().q())
        .param("rank_function", rank_fn.to_string())
        .param("rank", &full)
        .param("kappa", consts.kappa)
        .param("threshold", threshold)
        .param("ln_R", consts.ln_r);
    rec.set_counts(trials, outcomes.iter().filter(|(_, ok)| *ok).count() as u64);
    rec.theoretical_bound = 1.0 - epsilon;
    let meets_bound = rec.empirical_prob >= rec.theoretical_bound - MC_SLACK * rec.stderr;
    let hypothesis = consts.ln_r.map(|ln_r| full.lower().ln() >= ln_r);
    rec.param("bound_met", meets_bound);
    rec.param("rank_at_least_R", hypothesis);
    rec.holds = meets_bound || hypothesis != Some(true);
    if hypothesis.is_none() {
        rec.notes.push("rank >= R unverifiable without friedgut_c; comparison informational".into());
    } else if hypothesis == Some(false) {
        rec.notes.push("rank(phi) < R; comparison informational".into());
    }
    Ok(rec)
}

/// Sets `J_1, …, J_d` on which a tensor keeps a prescribed share of its rank.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoreWitness {
    pub sets: Vec<Vec<usize>>,
    pub sizes: Vec<usize>,
    pub achieved_rank: RankValue,
}

impl CoreWitness {
    fn new(sets: Vec<Vec<usize>>, achieved_rank: RankValue) -> Self {
        CoreWitness {
            sizes: sets.iter().map(Vec::len).collect(),
            sets,
            achieved_rank,
        }
    }
}

/// `r` independent rows `S` and then `r` independent columns `T` of
/// `A|_{S×[n]}`, so that `A|_{S×T}` is invertible.
pub fn matrix_core(a: &Matrix) -> CoreWitness {
    let rows = a.independent_rows();
    let cols = a.submatrix(&rows, &(0..a.cols()).collect_vec()).transpose().independent_rows();
    let r = a.submatrix(&rows, &cols).rank();
    CoreWitness::new(vec![rows, cols], RankValue::int(r as u64))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum CoreSearch {
    Found(CoreWitness),
    /// Every family within the size bound was examined.
    NotFound { certified: bool },
}

fn size_profiles(caps: &[usize], total: usize) -> Vec<Vec<usize>> {
    fn go(caps: &[usize], total: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == caps.len() {
            if total == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let rest: usize = caps[cur.len() + 1..].iter().sum();
        for s in 0..=caps[cur.len()].min(total) {
            if total - s <= rest {
                cur.push(s);
                go(caps, total - s, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(caps, total, &mut Vec::new(), &mut out);
    out
}

/// Smallest families `J` with `|J_i| <= L rank(T)` and
/// `rank(T|_J) >= β rank(T)`, by increasing total size.
pub fn tensor_core_search(t: &Tensor, l: f64, beta: f64, rank_fn: TensorRankFn, budget: &Budget) -> Result<CoreSearch> {
    if !(l >= 0.0 && beta >= 0.0) {
        return Err(Error::InvalidParameter(format!("L = {l}, beta = {beta}")));
    }
    let full = rank_fn.compute(t, budget)?;
    let target = beta * full.upper();
    let bound = (l * full.upper()).floor() as usize;
    let caps: Vec<usize> = t.dims().iter().map(|&n| n.min(bound)).collect();
    let needed: u128 = caps
        .iter()
        .zip(t.dims())
        .map(|(&c, &n)| (0..=c).map(|s| binomial(n as u128, s as u128)).sum::<u128>())
        .fold(1u128, |a, b| a.saturating_mul(b));
    if needed > budget.search as u128 {
        return Err(Error::BudgetExceeded {
            needed,
            budget: budget.search,
        });
    }
    for total in 0..=caps.iter().sum() {
        for profile in size_profiles(&caps, total) {
            let per_axis: Vec<Vec<Vec<usize>>> = profile
                .iter()
                .zip(t.dims())
                .map(|(&s, &n)| (0..n).combinations(s).collect())
                .collect();
            for sets in per_axis.iter().map(|v| v.iter()).multi_cartesian_product() {
                let sets: Vec<Vec<usize>> = sets.into_iter().cloned().collect();
                let r = rank_fn.compute(&t.restrict_unchecked(&sets), budget)?;
                if r.lower() >= target {
                    return Ok(CoreSearch::Found(CoreWitness::new(sets, r)));
                }
            }
        }
    }
    Ok(CoreSearch::NotFound { certified: true })
}

/// Searches `k × … × k` sub-tensors of full rank `k`. Returns the first such
/// family in lexicographic order, or `None` after checking all of them.
pub fn full_rank_subtensor(t: &Tensor, k: usize, rank_fn: TensorRankFn, budget: &Budget) -> Result<Option<Vec<Vec<usize>>>> {
    if t.dims().iter().any(|&n| n < k) {
        return Ok(None);
    }
    let needed = t
        .dims()
        .iter()
        .map(|&n| binomial(n as u128, k as u128))
        .fold(1u128, |a, b| a.saturating_mul(b));
    if needed > budget.search as u128 {
        return Err(Error::BudgetExceeded {
            needed,
            budget: budget.search,
        });
    }
    let per_axis: Vec<Vec<Vec<usize>>> = t.dims().iter().map(|&n| (0..n).combinations(k).collect()).collect();
    for sets in per_axis.iter().map(|v| v.iter()).multi_cartesian_product() {
        let sets: Vec<Vec<usize>> = sets.into_iter().cloned().collect();
        if rank_fn.compute(&t.restrict_unchecked(&sets), budget)?.lower() >= k as f64 {
            return Ok(Some(sets));
        }
    }
    Ok(None)
}

/// One round of the core restriction argument: `I_i ∼ (J_i)_{1−λ}` with
/// `λ = β/(3dL)`. Counts the event `E = {|I_i| >= (1−2λ)|J_i| ∀i}` against
/// `1 − d e^{−(β/12d) rank(T)}` and requires `rank(T|_I) >= β rank(T)/3`
/// whenever `E` holds.
#[allow(clippy::too_many_arguments)]
pub fn core_restriction_experiment(
    t: &Tensor,
    witness: &CoreWitness,
    l: f64,
    beta: f64,
    rank_fn: TensorRankFn,
    trials: u64,
    seed: u64,
    budget: &Budget,
) -> Result<ExperimentRecord> {
    if !(l > 0.0 && beta > 0.0) {
        return Err(Error::InvalidParameter(format!("L = {l}, beta = {beta}")));
    }
    let d = t.order();
    if witness.sets.len() != d {
        return Err(Error::DimensionMismatch(format!("witness has {} sets for order {d}", witness.sets.len())));
    }
    IndexSubsetFamily::new(witness.sets.clone(), t.dims())?;
    let full = rank_fn.compute(t, budget)?;
    let lambda = beta / (3.0 * d as f64 * l);
    let threshold = beta * full.upper() / 3.0;
    let bound = 1.0 - d as f64 * (-(beta / (12.0 * d as f64)) * full.lower()).exp();
    let in_event = |sets: &Vec<Vec<usize>>| {
        sets.iter()
            .zip(&witness.sets)
            .all(|(i, j)| i.len() as f64 >= (1.0 - 2.0 * lambda) * j.len() as f64)
    };
    let outcomes = run_keyed(
        seed,
        trials,
        |rng| witness.sets.iter().map(|j| bernoulli_sub(j, 1.0 - lambda, rng)).collect::<Vec<_>>(),
        |sets| {
            if !in_event(sets) {
                return Ok(None);
            }
            Ok(Some(rank_fn.compute(&t.restrict_unchecked(sets), budget)?.lower() >= threshold))
        },
    )?;
    let events = outcomes.iter().filter(|(_, o)| o.is_some()).count() as u64;
    let conditional_failures = outcomes.iter().filter(|(_, o)| *o == Some(false)).count() as u64;
    let mut rec = ExperimentRecord::new("core_restriction", seed, Mode::MonteCarlo);
    rec.param("L", l)
        .param("beta", beta)
        .param("lambda", lambda)
        .param("d", d)
        .param("dims", t.dims())
        .param("rank_function", rank_fn.name())
        .param("rank", &full)
        .param("threshold", threshold)
        .param("witness_sizes", &witness.sizes)
        .param("conditional_failures", conditional_failures)
        .param(
            "conditional_success_rate",
            if events > 0 {
                (events - conditional_failures) as f64 / events as f64
            } else {
                1.0
            },
        );
    rec.set_counts(trials, events);
    judge_lower_bound(&mut rec, bound);
    rec.holds &= conditional_failures == 0;
    Ok(rec)
}

/// Whether `a <= Σ terms + plus`, decided exactly: through biases when all
/// values are analytic ranks, through integers when all are exact integers,
/// and through bracket ends otherwise. `None` when brackets leave it open.
pub fn rank_at_most(a: &RankValue, terms: &[&RankValue], plus: u32) -> Result<Option<bool>> {
    if let (Some(ba), Some(bs)) = (a.bias(), terms.iter().map(|t| t.bias()).collect::<Option<Vec<_>>>()) {
        // −log_q b_a <= Σ −log_q b_i + plus  ⇔  b_a >= q^{−plus} Π b_i
        let mut rhs = QPowerRational::from_u64(1, plus, ba.q())?;
        for b in bs {
            rhs = rhs.mul(b)?;
        }
        return Ok(ba.try_cmp(&rhs).map(|o| o != std::cmp::Ordering::Less));
    }
    let lo: f64 = terms.iter().map(|t| t.lower()).sum::<f64>() + plus as f64;
    let hi: f64 = terms.iter().map(|t| t.upper()).sum::<f64>() + plus as f64;
    if a.upper() <= lo {
        Ok(Some(true))
    } else if a.lower() > hi {
        Ok(Some(false))
    } else {
        Ok(None)
    }
}

/// A random tensor whose entries are nonzero with probability `density`.
pub fn random_sparse_tensor<R: Rng + ?Sized>(field: PrimeField, dims: Vec<usize>, density: f64, rng: &mut R) -> Tensor {
    let q = field.q() as u64;
    Tensor::from_fn(field, dims, |_| {
        if rng.random::<f64>() < density {
            rng.random_range(1..q)
        } else {
            0
        }
    })
}

/// Checks sub-additivity, monotonicity under a random restriction, and the
/// Lipschitz bound under deleting one index, on `pairs` random tensor pairs
/// with dims at most `max_dims`.
pub fn axiom_sweep(
    field: PrimeField,
    max_dims: &[usize],
    rank_fn: TensorRankFn,
    pairs: u64,
    seed: u64,
    budget: &Budget,
) -> Result<ExperimentRecord> {
    if max_dims.is_empty() || max_dims.contains(&0) {
        return Err(Error::InvalidParameter(format!("dims {max_dims:?} must be positive")));
    }
    let outcomes: Vec<[Option<bool>; 3]> = (0..pairs)
        .into_par_iter()
        .map(|i| -> Result<[Option<bool>; 3]> {
            let mut rng = trial_rng(seed, i);
            let dims: Vec<usize> = max_dims.iter().map(|&m| rng.random_range(1..=m)).collect();
            let density = [0.25, 0.5, 1.0][rng.random_range(0..3usize)];
            let s = random_sparse_tensor(field, dims.clone(), density, &mut rng);
            let t = random_sparse_tensor(field, dims.clone(), density, &mut rng);
            let sets: Vec<Vec<usize>> = dims.iter().map(|&n| bernoulli_subset(n, 0.5, &mut rng)).collect();
            let axis = rng.random_range(0..dims.len());
            let drop = rng.random_range(0..dims[axis]);
            let mut minus_one: Vec<Vec<usize>> = dims.iter().map(|&n| (0..n).collect()).collect();
            minus_one[axis].retain(|&j| j != drop);
            let rank = |x: &Tensor| rank_fn.compute(x, budget);
            let (rs, rt, rsum) = (rank(&s)?, rank(&t)?, rank(&s.add(&t)?)?);
            let rr = rank(&s.restrict_unchecked(&sets))?;
            let rm = rank(&s.restrict_unchecked(&minus_one))?;
            Ok([
                rank_at_most(&rsum, &[&rs, &rt], 0)?,
                rank_at_most(&rr, &[&rs], 0)?,
                rank_at_most(&rs, &[&rm], 1)?,
            ])
        })
        .collect::<Result<_>>()?;
    let count = |k: usize, v: Option<bool>| outcomes.iter().filter(|o| o[k] == v).count() as u64;
    let violations: Vec<u64> = (0..3).map(|k| count(k, Some(false))).collect();
    let undetermined: u64 = (0..3).map(|k| count(k, None)).sum();
    let clean = outcomes.iter().filter(|o| o.iter().all(|v| *v == Some(true))).count() as u64;
    let mut rec = ExperimentRecord::new("axioms", seed, Mode::MonteCarlo);
    rec.param("q", field.q())
        .param("max_dims", max_dims)
        .param("rank_function", rank_fn.name())
        .param("subadditive_violations", violations[0])
        .param("monotone_violations", violations[1])
        .param("lipschitz_violations", violations[2])
        .param("undetermined", undetermined);
    rec.set_counts(pairs, clean);
    rec.theoretical_bound = 1.0;
    rec.holds = violations.iter().all(|&v| v == 0);
    if undetermined > 0 {
        rec.notes.push("some comparisons were left open by rank brackets".into());
    }
    Ok(rec)
}

/// `σ ↦` empirical probability series from a sweep of records, sorted by
/// `σ`, as two-column `x y` lines.
pub fn plot_series(records: &[ExperimentRecord]) -> String {
    let mut pts: Vec<(f64, f64)> = records
        .iter()
        .filter_map(|r| r.params.get("sigma").and_then(Value::as_f64).map(|s| (s, r.empirical_prob)))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts.iter().map(|(x, y)| format!("{x} {y}\n")).collect()
}
