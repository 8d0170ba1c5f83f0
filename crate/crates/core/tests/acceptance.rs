//! Acceptance suite: one pass/fail line per criterion, nonzero exit on any
//! failure.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ranklab::concentration::{
    coupling_check, random_point_set, row_restriction_function, russo_check, subadditive_tail_check, talagrand_sweep,
    HypercubeFunction,
};
use ranklab::experiments::{
    axiom_sweep, counterexample_experiment, diagonal_kappa_witness, expectation_check, matrix_core,
    matrix_restriction_experiment, random_rank_matrix, tensor_restriction_experiment, with_threads, ExpectationMode,
};
use ranklab::polyrank::{arank_d, c_constant, c_exponent};
use ranklab::ranks::{bias, slice_rank_oracle, slice_rank_search, TensorRankFn};
use ranklab::{Budget, ExperimentRecord, Matrix, PolyMap, PolyRankFn, PrimeField, QPowerRational, Tensor};

use common::{character_sum_bias, four_term_bracket};

type Check = std::result::Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn ok<T>(r: ranklab::Result<T>) -> std::result::Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn param_u64(rec: &ExperimentRecord, key: &str) -> u64 {
    rec.params[key].as_u64().unwrap_or(u64::MAX)
}

fn axiom_suite() -> Check {
    let f = PrimeField::gf2();
    for (i, rank_fn) in [TensorRankFn::Slice, TensorRankFn::Analytic].into_iter().enumerate() {
        let rec = ok(axiom_sweep(f, &[4, 4, 4], rank_fn, 500, 100 + i as u64, &Budget::default()))?;
        for key in ["subadditive_violations", "monotone_violations", "lipschitz_violations", "undetermined"] {
            ensure!(param_u64(&rec, key) == 0, "{}: {key} = {}", rank_fn.name(), rec.params[key]);
        }
        ensure!(rec.holds, "{} sweep does not hold", rank_fn.name());
    }
    Ok(())
}

fn rank_identities() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let budget = Budget::default();
    for i in 0..200 {
        let f = PrimeField::new(if i % 2 == 0 { 2 } else { 3 }).unwrap();
        let (rows, cols) = (rng.random_range(1..=8), rng.random_range(1..=8));
        let t = Tensor::random_with(f, vec![rows, cols], &mut rng);
        let r = t.to_matrix().unwrap().rank() as u32;
        let b = ok(bias(&t, budget.bias))?;
        let expect = QPowerRational::from_u64(1, r, f.q()).unwrap();
        ensure!(b.partial_cmp(&expect) == Some(std::cmp::Ordering::Equal), "instance {i}: bias {b} but rank {r}");
        let s = ranklab::ranks::slice_rank(&t, &budget);
        ensure!(s.as_int() == Some(r as u64), "instance {i}: slice rank {s} but rank {r}");
    }
    Ok(())
}

fn diagonal_slice_rank() -> Check {
    let f = PrimeField::gf2();
    for n in 1..=4 {
        let t = Tensor::diagonal_ones(f, 3, n);
        let s = slice_rank_search(&t, &Budget::default());
        ensure!(s.as_int() == Some(n as u64), "n = {n}: search gives {s}");
        ensure!(ok(slice_rank_oracle(&t, n, 1 << 24))?, "n = {n}: oracle rejects rank n");
        ensure!(!ok(slice_rank_oracle(&t, n - 1, 1 << 24))?, "n = {n}: oracle accepts rank n - 1");
    }
    Ok(())
}

fn counterexample() -> Check {
    let f = PrimeField::gf2();
    for (i, sigma) in [0.25, 0.5, 0.75].into_iter().enumerate() {
        let rec = ok(counterexample_experiment(f, 4, sigma, 10_000, 40 + i as u64, &Budget::default()))?;
        ensure!(param_u64(&rec, "flattening_lower_bound") == 4, "flattening bound {}", rec.params["flattening_lower_bound"]);
        ensure!(rec.params["lipschitz_violated"] == serde_json::json!(true), "no Lipschitz violation");
        ensure!(
            rec.holds,
            "sigma {sigma}: p = {} vs 1 - sigma = {} (se {})",
            rec.empirical_prob,
            rec.theoretical_bound,
            rec.stderr
        );
    }
    Ok(())
}

fn kappa_witness() -> Check {
    let rec = ok(diagonal_kappa_witness(9, 3, 0.5, 100_000, 5))?;
    ensure!(rec.params["exact_mean"].as_f64() == Some(1.125), "exact mean {}", rec.params["exact_mean"]);
    ensure!(rec.holds, "mean rank {} (se {})", rec.params["mean_rank"], rec.params["mean_rank_stderr"]);
    Ok(())
}

fn talagrand() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut sets = Vec::new();
    for _ in 0..100 {
        sets.push(ok(random_point_set(10, &mut rng))?);
    }
    for sigma in [0.25, 0.5, 0.75] {
        for (i, a) in sets.iter().enumerate() {
            let sweep = ok(talagrand_sweep(a, sigma))?;
            ensure!(sweep.len() == 11, "set {i}: {} values of k", sweep.len());
            if let Some(r) = sweep.iter().find(|r| !r.holds) {
                return Err(format!("sigma {sigma}, set {i}, k {}: lhs {} > rhs {}", r.k, r.lhs_f64(), r.rhs));
            }
        }
    }
    Ok(())
}

fn rank_induced_functions() -> std::result::Result<Vec<(String, HypercubeFunction)>, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let budget = Budget::default();
    let mut out = Vec::new();
    for i in 0..50 {
        let f = PrimeField::new(if i % 3 == 2 { 3 } else { 2 }).unwrap();
        let (dims, rank_fn) = match i % 5 {
            0 | 1 => (vec![rng.random_range(4..=10), rng.random_range(2..=8)], TensorRankFn::Matrix),
            2 | 3 => (vec![rng.random_range(3..=8), 3, 3], TensorRankFn::Analytic),
            _ => (vec![rng.random_range(3..=6), 2, 3], TensorRankFn::Slice),
        };
        let t = Tensor::random_with(f, dims.clone(), &mut rng);
        let g = ok(row_restriction_function(&t, 0, rank_fn, &budget))?;
        out.push((format!("instance {i} ({} over {dims:?})", rank_fn.name()), g));
    }
    Ok(out)
}

fn tail_and_coupling() -> Check {
    for (name, g) in rank_induced_functions()? {
        for sigma in [0.25, 0.75] {
            let r = ok(subadditive_tail_check(&g, sigma))?;
            ensure!(r.holds, "{name}, sigma {sigma}: tail {} > {}", r.lhs, r.rhs);
        }
        for k in [2, 3, 4] {
            let c = ok(coupling_check(&g, k))?;
            ensure!(c.holds, "{name}, k {k}: Pr = {} < 1/k", c.prob);
        }
    }
    Ok(())
}

fn russo() -> Check {
    let families = [
        ("dictator", ok(HypercubeFunction::dictator(3, 0))?),
        ("and3", ok(HypercubeFunction::and(3))?),
        ("or3", ok(HypercubeFunction::or(3))?),
        ("majority5", ok(HypercubeFunction::majority(5))?),
        ("tribes(2,4)", ok(HypercubeFunction::tribes(2, 4))?),
    ];
    for (name, g) in &families {
        for q in [0.2, 0.5, 0.8] {
            let r = ok(russo_check(g, q, 1e-4, 1e-5))?;
            ensure!(r.holds, "{name} at q {q}: derivative {} vs influence {}", r.derivative_fd, r.influence);
        }
    }
    Ok(())
}

fn matrix_restriction() -> Check {
    let f = PrimeField::gf2();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let a = ok(random_rank_matrix(f, 40, 20, &mut rng))?;
    ensure!(a.rank() == 20, "generated rank {}", a.rank());
    let rec = ok(matrix_restriction_experiment(&a, 0.5, 10_000, 9))?;
    ensure!(rec.holds, "p = {} below bound {} - 3 * {}", rec.empirical_prob, rec.theoretical_bound, rec.stderr);
    let core = matrix_core(&a);
    ensure!(core.sizes == vec![20, 20], "core sizes {:?}", core.sizes);
    let sub: Matrix = a.submatrix(&core.sets[0], &core.sets[1]);
    ensure!(sub.rank() == 20, "core submatrix has rank {}", sub.rank());
    Ok(())
}

fn tensor_restriction() -> Check {
    let t = Tensor::random(PrimeField::gf2(), vec![10, 10, 10], 10);
    let budget = Budget::default();
    for (sigma, symmetric) in [(0.25, false), (0.75, false), (0.25, true), (0.75, true)] {
        let rec = ok(tensor_restriction_experiment(&t, sigma, TensorRankFn::Analytic, 2000, 11, symmetric, &budget))?;
        ensure!(rec.theoretical_bound >= 0.0, "bound not clamped");
        ensure!(rec.holds, "sigma {sigma} symmetric {symmetric}: p = {} vs bound {}", rec.empirical_prob, rec.theoretical_bound);
    }
    Ok(())
}

fn expectation() -> Check {
    let f = PrimeField::gf2();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let budget = Budget::default();
    for i in 0..50 {
        let phi = PolyMap::random(f, 8, 1, 2, &mut rng);
        let r = ok(arank_d(&phi, &budget))?;
        ensure!(r.is_exact(), "instance {i}: rank {r} is not exact");
        for sigma in [0.5, 0.25] {
            let rec = ok(expectation_check(&phi, sigma, PolyRankFn::AnalyticD, ExpectationMode::Exact, &budget))?;
            ensure!(rec.holds, "instance {i}, sigma {sigma}: {} < {}", rec.empirical_prob, rec.theoretical_bound);
        }
    }
    Ok(())
}

fn bracket_identity() -> Check {
    let f = PrimeField::gf2();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for i in 0..100 {
        let n = rng.random_range(2..=10);
        let d = rng.random_range(1..=4);
        let k = rng.random_range(1..=2);
        let phi = PolyMap::random(f, n, k, d, &mut rng);
        let (mut i_set, mut j_set) = (Vec::new(), Vec::new());
        for v in 0..n {
            match rng.random_range(0..3) {
                0 => i_set.push(v),
                1 => j_set.push(v),
                _ => {}
            }
        }
        let b = ok(phi.bracket(&i_set, &j_set))?;
        ensure!(b.truth_tables() == four_term_bracket(&phi, &i_set, &j_set), "instance {i} differs");
    }
    Ok(())
}

fn bias_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let mut done = 0;
    while done < 100 {
        let q = if rng.random_bool(0.5) { 2 } else { 3 };
        let order = rng.random_range(2..=4);
        let dims: Vec<usize> = (0..order).map(|_| rng.random_range(1..=5)).collect();
        let total: usize = dims.iter().sum();
        if (q as f64).powi(total as i32) > (1u32 << 15) as f64 {
            continue;
        }
        let t = Tensor::random_with(PrimeField::new(q).unwrap(), dims.clone(), &mut rng);
        let fast = ok(bias(&t, 1 << 26))?.to_f64();
        let slow = character_sum_bias(&t);
        ensure!((fast - slow).abs() <= 1e-9, "q {q} dims {dims:?}: {fast} vs {slow}");
        done += 1;
    }
    Ok(())
}

fn constants() -> Check {
    ensure!(ok(c_constant(0.5, 2))? == 1.0 / 8000.0, "c(1/2, 2) = {}", c_constant(0.5, 2).unwrap());
    ensure!(ok(c_exponent(0.5, 2))? == 3, "exponent {}", c_exponent(0.5, 2).unwrap());
    let out = Command::new(env!("CARGO_BIN_EXE_ranklab"))
        .args(["--seed", "0", "constants", "--d", "3", "--sigma", "0.25", "--format", "json"])
        .output()
        .map_err(|e| e.to_string())?;
    ensure!(out.status.success(), "constants exited with {:?}", out.status.code());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
    let c = v["tensor_c"].as_f64().unwrap_or(f64::NAN);
    let kappa = v["tensor_kappa"].as_f64().unwrap_or(f64::NAN);
    let c_expect = 3.0 * (3.0 / (2.0 * 0.25f64)).sqrt();
    let kappa_expect = std::f64::consts::LN_2 / 3.0 * (0.25f64 / 4.0).powi(3);
    ensure!((c - c_expect).abs() <= 1e-12, "C = {c}, expected {c_expect}");
    ensure!((kappa - kappa_expect).abs() <= 1e-12, "kappa = {kappa}, expected {kappa_expect}");
    Ok(())
}

fn reproducibility() -> Check {
    let t = Tensor::random(PrimeField::gf2(), vec![6, 6, 6], 15);
    let runs = |threads: usize| -> std::result::Result<Vec<String>, String> {
        ok(with_threads(threads, || -> ranklab::Result<Vec<String>> {
            let budget = Budget::default();
            Ok(vec![
                tensor_restriction_experiment(&t, 0.5, TensorRankFn::Slice, 500, 77, false, &budget)?.to_json(),
                counterexample_experiment(PrimeField::gf2(), 3, 0.5, 2000, 77, &budget)?.to_json(),
                ranklab::experiments::axiom_sweep(PrimeField::gf2(), &[3, 3, 3], TensorRankFn::Analytic, 50, 77, &budget)?
                    .to_json(),
            ])
        })
        .and_then(|r| r))
    };
    let one = runs(1)?;
    for threads in [2, 8] {
        ensure!(runs(threads)? == one, "{threads} threads differ from 1 thread");
    }
    Ok(())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 15] = [
        ("axiom suite", axiom_suite),
        ("rank identities on matrices", rank_identities),
        ("diagonal slice rank", diagonal_slice_rank),
        ("tensor rank counterexample", counterexample),
        ("kappa witness", kappa_witness),
        ("Talagrand inequality", talagrand),
        ("tail lemma and coupling", tail_and_coupling),
        ("Russo identity", russo),
        ("matrix restriction", matrix_restriction),
        ("tensor restriction", tensor_restriction),
        ("expectation lemma", expectation),
        ("bracket identity", bracket_identity),
        ("bias oracle", bias_oracle),
        ("constants", constants),
        ("reproducibility across threads", reproducibility),
    ];
    let mut failed = 0;
    let mut total = Duration::ZERO;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let took = start.elapsed();
        total += took;
        match outcome {
            Ok(()) => println!("criterion {:02} [pass] {name} ({:.2}s)", i + 1, took.as_secs_f64()),
            Err(why) => {
                failed += 1;
                println!("criterion {:02} [FAIL] {name} ({:.2}s): {why}", i + 1, took.as_secs_f64());
            }
        }
    }
    println!("{} of {} criteria passed in {:.1}s", criteria.len() - failed, criteria.len(), total.as_secs_f64());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
