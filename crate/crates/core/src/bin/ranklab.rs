use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use ranklab::concentration::{
    coupling_check, russo_check, row_restriction_function, subadditive_tail_check, talagrand_sweep, random_point_set,
    HypercubeFunction,
};
use ranklab::experiments::{
    axiom_sweep, core_restriction_experiment, counterexample_experiment, expectation_check, full_rank_subtensor,
    matrix_core, matrix_restriction_experiment, poly_restriction_experiment, random_rank_matrix,
    tensor_core_search, tensor_restriction_experiment, CoreSearch, ExpectationMode, ExperimentRecord,
};
use ranklab::io::{read_poly, read_tensor, write_output, write_plot, write_records, Format};
use ranklab::polyrank::theorem_constants;
use ranklab::{Budget, Error, PolyMap, PolyRankFn, PrimeField, Result, Tensor, TensorRankFn};

#[derive(Parser)]
#[command(name = "ranklab", version, about = "Rank functions, random restrictions and concentration checks over prime fields")]
struct Cli {
    /// Master seed; drawn from entropy when absent and always printed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Enumeration budget for bias and search computations.
    #[arg(long, global = true)]
    budget: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Fmt::Table)]
    format: Fmt,
    /// Output file (standard output by default).
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Also write a two-column `sigma empirical_prob` series here.
    #[arg(long, global = true)]
    plot: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Fmt {
    Json,
    Csv,
    Table,
}

impl From<Fmt> for Format {
    fn from(f: Fmt) -> Format {
        match f {
            Fmt::Json => Format::Json,
            Fmt::Csv => Format::Csv,
            Fmt::Table => Format::Table,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Ranks of a tensor file (standard input by default).
    Rank {
        /// matrix, analytic, slice, partition, tensor or all.
        #[arg(long = "fn", default_value = "all")]
        rank_fn: String,
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Ranks of a polynomial map file.
    Polyrank {
        /// arank, schmidt, gowers or degree:N.
        #[arg(long = "fn", default_value = "arank")]
        rank_fn: String,
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Random restriction experiments.
    Restrict(RestrictArgs),
    /// Expected rank of a random restriction of a polynomial map.
    Expect {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long = "fn", default_value = "arank")]
        rank_fn: String,
        #[arg(long, default_value = "0.5")]
        sigma: f64,
        /// Monte Carlo trials; exact enumeration when absent.
        #[arg(long)]
        trials: Option<u64>,
    },
    /// Hypercube concentration checks.
    Concentration {
        #[command(subcommand)]
        check: ConcCmd,
    },
    /// Natural rank property sweep on random tensor pairs.
    Axioms {
        #[arg(long, default_value_t = 2)]
        q: u32,
        #[arg(long, default_value = "4,4,4", value_delimiter = ',')]
        dims: Vec<usize>,
        #[arg(long = "fn", default_value = "slice")]
        rank_fn: String,
        #[arg(long, default_value_t = 500)]
        pairs: u64,
    },
    /// Theorem constants.
    Constants {
        #[arg(long)]
        sigma: f64,
        #[arg(long)]
        d: u32,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long)]
        friedgut_c: Option<f64>,
    },
    /// Core witness search, optionally followed by the core restriction experiment.
    Core {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long = "fn", default_value = "slice")]
        rank_fn: String,
        #[arg(long = "L", default_value_t = 1.0)]
        l: f64,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        /// Run the core restriction experiment with this many trials.
        #[arg(long)]
        trials: Option<u64>,
        /// Instead, look for a k×…×k sub-tensor of full rank k.
        #[arg(long)]
        full_rank: Option<usize>,
    },
    /// Generate instances as text.
    Gen {
        #[command(subcommand)]
        kind: GenCmd,
    },
    /// Demonstrations.
    Demo {
        #[command(subcommand)]
        which: DemoCmd,
    },
}

#[derive(Args)]
struct RestrictArgs {
    #[arg(value_enum)]
    kind: RestrictKind,
    #[arg(long)]
    input: Option<PathBuf>,
    /// One value or a comma-separated sweep.
    #[arg(long, default_value = "0.5", value_delimiter = ',')]
    sigma: Vec<f64>,
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long = "fn")]
    rank_fn: Option<String>,
    /// Same random set on every axis.
    #[arg(long)]
    symmetric: bool,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long)]
    friedgut_c: Option<f64>,
    /// For matrices without input: a random `n × n` matrix of this rank.
    #[arg(long)]
    random_rank: Option<usize>,
    #[arg(long, default_value_t = 40)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    q: u32,
}

#[derive(Clone, Copy, ValueEnum)]
enum RestrictKind {
    Matrix,
    Tensor,
    Poly,
}

#[derive(Subcommand)]
enum ConcCmd {
    /// Exhaustive check on random point sets.
    Talagrand {
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value = "0.5")]
        sigma: f64,
        #[arg(long, default_value_t = 10)]
        sets: u64,
    },
    /// Coupling bound for a row-restriction rank function.
    Coupling {
        #[command(flatten)]
        source: FSource,
        #[arg(long, default_value = "2,3,4", value_delimiter = ',')]
        k: Vec<u32>,
    },
    /// Sub-additive tail bound for a row-restriction rank function.
    Tail {
        #[command(flatten)]
        source: FSource,
        #[arg(long, default_value = "0.5")]
        sigma: f64,
    },
    /// Margulis–Russo identity on a Boolean family.
    Russo {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value = "0.5")]
        q: f64,
        #[arg(long, default_value = "1e-4")]
        step: f64,
        #[arg(long, default_value = "1e-5")]
        tol: f64,
    },
}

#[derive(Args)]
struct FSource {
    /// Tensor whose axis-0 restrictions define f; Hamming weight when absent.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long = "fn", default_value = "matrix")]
    rank_fn: String,
    #[arg(long, default_value_t = 0)]
    axis: usize,
    /// Dimension of the Hamming weight function.
    #[arg(long, default_value_t = 10)]
    hamming: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Dictator,
    And,
    Or,
    Majority,
    Parity,
    Tribes,
}

#[derive(Subcommand)]
enum GenCmd {
    /// Uniform random tensor.
    Random {
        #[arg(long, default_value_t = 2)]
        q: u32,
        #[arg(long, value_delimiter = ',')]
        dims: Vec<usize>,
    },
    /// All-ones diagonal `d`-tensor of size `n`.
    Diagonal {
        #[arg(long, default_value_t = 2)]
        q: u32,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n: usize,
    },
    /// `n × n × 2` tensor with slices I and the all-ones matrix.
    IdentityOnes {
        #[arg(long, default_value_t = 2)]
        q: u32,
        #[arg(long)]
        n: usize,
    },
    /// Uniform random polynomial map of degree at most `d`.
    Poly {
        #[arg(long, default_value_t = 2)]
        q: u32,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long)]
        d: usize,
    },
}

#[derive(Subcommand)]
enum DemoCmd {
    /// Tensor rank is not restriction-Lipschitz.
    Counterexample {
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        q: u32,
        #[arg(long, default_value = "0.5", value_delimiter = ',')]
        sigma: Vec<f64>,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
    },
}

struct Ctx {
    seed: u64,
    budget: Budget,
    format: Format,
    output: Option<PathBuf>,
    plot: Option<PathBuf>,
}

impl Ctx {
    fn records(&self, recs: &[ExperimentRecord]) -> Result<bool> {
        write_records(recs, self.format, self.output.as_deref())?;
        if let Some(p) = &self.plot {
            write_plot(recs, p)?;
        }
        Ok(recs.iter().all(|r| r.holds))
    }

    fn value(&self, table: String, v: serde_json::Value) -> Result<bool> {
        let text = match self.format {
            Format::Table => table,
            Format::Json => serde_json::to_string_pretty(&v).expect("value serializes") + "\n",
            Format::Csv => {
                let obj = v.as_object().cloned().unwrap_or_default();
                let keys: Vec<&String> = obj.keys().collect();
                let vals: Vec<String> = obj
                    .values()
                    .map(|x| match x {
                        serde_json::Value::String(s) => s.clone(),
                        other => other.to_string(),
                    })
                    .collect();
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&keys).and_then(|_| w.write_record(&vals)).map_err(|e| Error::Io {
                    path: "<csv>".into(),
                    msg: e.to_string(),
                })?;
                String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8")
            }
        };
        write_output(&text, self.output.as_deref())?;
        Ok(true)
    }
}

fn check_sigma(sigma: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&sigma) {
        Ok(sigma)
    } else {
        Err(Error::InvalidParameter(format!("sigma = {sigma} not in [0, 1]")))
    }
}

fn rank_fns(name: &str) -> Result<Vec<TensorRankFn>> {
    if name == "all" {
        Ok(TensorRankFn::ALL.to_vec())
    } else {
        Ok(vec![name.parse()?])
    }
}

fn hypercube_source(ctx: &Ctx, src: &FSource) -> Result<HypercubeFunction> {
    match &src.input {
        Some(p) => {
            let t = read_tensor(Some(p))?;
            row_restriction_function(&t, src.axis, src.rank_fn.parse()?, &ctx.budget)
        }
        None => HypercubeFunction::hamming_weight(src.hamming),
    }
}

fn run(cli: Cli) -> Result<bool> {
    let seed = cli.seed.unwrap_or_else(|| rand::rng().random());
    eprintln!("seed: {seed}");
    let ctx = Ctx {
        seed,
        budget: cli.budget.map(Budget::uniform).unwrap_or_default(),
        format: cli.format.into(),
        output: cli.output,
        plot: cli.plot,
    };
    match cli.cmd {
        Cmd::Rank { rank_fn, input } => {
            let t = read_tensor(input.as_deref())?;
            let mut table = String::new();
            let mut obj = serde_json::Map::new();
            for f in rank_fns(&rank_fn)? {
                // matrix rank only exists for order 2
                if f == TensorRankFn::Matrix && t.order() != 2 && rank_fn == "all" {
                    continue;
                }
                let r = f.compute(&t, &ctx.budget)?;
                table.push_str(&format!("{f}\t{r}\n"));
                obj.insert(f.name().into(), json!(r));
            }
            ctx.value(table, serde_json::Value::Object(obj))
        }
        Cmd::Polyrank { rank_fn, input } => {
            let p = read_poly(input.as_deref())?;
            let f: PolyRankFn = rank_fn.parse()?;
            let r = f.compute(&p, &ctx.budget)?;
            ctx.value(format!("{f}\t{r}\n"), json!({ f.to_string(): r }))
        }
        Cmd::Restrict(a) => restrict(&ctx, a),
        Cmd::Expect {
            input,
            rank_fn,
            sigma,
            trials,
        } => {
            let p = read_poly(input.as_deref())?;
            let mode = match trials {
                Some(trials) => ExpectationMode::MonteCarlo { trials, seed: ctx.seed },
                None => ExpectationMode::Exact,
            };
            let rec = expectation_check(&p, check_sigma(sigma)?, rank_fn.parse()?, mode, &ctx.budget)?;
            ctx.records(&[rec])
        }
        Cmd::Concentration { check } => concentration(&ctx, check),
        Cmd::Axioms { q, dims, rank_fn, pairs } => {
            let rec = axiom_sweep(PrimeField::new(q)?, &dims, rank_fn.parse()?, pairs, ctx.seed, &ctx.budget)?;
            ctx.records(&[rec])
        }
        Cmd::Constants {
            sigma,
            d,
            epsilon,
            friedgut_c,
        } => {
            let b = theorem_constants(sigma, d, epsilon, friedgut_c)?;
            let table = format!(
                "C       {}\nkappa_T {}\nc       {:e} (= 20^-{})\nkappa   {:e}\nln R    {}\n",
                b.tensor_c,
                b.tensor_kappa,
                b.c_sigma_d,
                b.c_exponent,
                b.kappa,
                b.ln_r.map_or("unknown (needs --friedgut-c)".to_string(), |v| v.to_string()),
            );
            ctx.value(table, json!(b))
        }
        Cmd::Core {
            input,
            rank_fn,
            l,
            beta,
            trials,
            full_rank,
        } => {
            let t = read_tensor(input.as_deref())?;
            let f: TensorRankFn = rank_fn.parse()?;
            if let Some(k) = full_rank {
                let found = full_rank_subtensor(&t, k, f, &ctx.budget)?;
                let table = match &found {
                    Some(sets) => format!("full-rank {k}-subtensor on {sets:?}\n"),
                    None => format!("no full-rank {k}-subtensor\n"),
                };
                return ctx.value(table, json!({ "k": k, "sets": found }));
            }
            let witness = if t.order() == 2 && f == TensorRankFn::Matrix {
                matrix_core(&t.to_matrix()?)
            } else {
                match tensor_core_search(&t, l, beta, f, &ctx.budget)? {
                    CoreSearch::Found(w) => w,
                    nf @ CoreSearch::NotFound { .. } => {
                        return ctx.value("no core witness within the size bound\n".into(), json!(nf));
                    }
                }
            };
            match trials {
                Some(trials) => {
                    let rec = core_restriction_experiment(&t, &witness, l, beta, f, trials, ctx.seed, &ctx.budget)?;
                    ctx.records(&[rec])
                }
                None => ctx.value(
                    format!("sets {:?}\nrank {}\n", witness.sets, witness.achieved_rank),
                    json!(witness),
                ),
            }
        }
        Cmd::Gen { kind } => {
            let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
            let text = match kind {
                GenCmd::Random { q, dims } => Tensor::random_with(PrimeField::new(q)?, dims, &mut rng).to_text(),
                GenCmd::Diagonal { q, d, n } => Tensor::diagonal_ones(PrimeField::new(q)?, d, n).to_text(),
                GenCmd::IdentityOnes { q, n } => Tensor::identity_ones(PrimeField::new(q)?, n).to_text(),
                GenCmd::Poly { q, n, k, d } => PolyMap::random(PrimeField::new(q)?, n, k, d, &mut rng).to_text(),
            };
            write_output(&text, ctx.output.as_deref())?;
            Ok(true)
        }
        Cmd::Demo {
            which: DemoCmd::Counterexample { n, q, sigma, trials },
        } => {
            let f = PrimeField::new(q)?;
            let recs = sigma
                .iter()
                .map(|&s| counterexample_experiment(f, n, check_sigma(s)?, trials, ctx.seed, &ctx.budget))
                .collect::<Result<Vec<_>>>()?;
            ctx.records(&recs)
        }
    }
}

fn restrict(ctx: &Ctx, a: RestrictArgs) -> Result<bool> {
    let mut recs = Vec::new();
    for &sigma in &a.sigma {
        let sigma = check_sigma(sigma)?;
        let rec = match a.kind {
            RestrictKind::Matrix => {
                let m = match (a.random_rank, &a.input) {
                    (Some(r), None) => {
                        let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
                        random_rank_matrix(PrimeField::new(a.q)?, a.n, r, &mut rng)?
                    }
                    _ => read_tensor(a.input.as_deref())?.to_matrix()?,
                };
                matrix_restriction_experiment(&m, sigma, a.trials, ctx.seed)?
            }
            RestrictKind::Tensor => {
                let t = read_tensor(a.input.as_deref())?;
                let f: TensorRankFn = a.rank_fn.as_deref().unwrap_or("analytic").parse()?;
                tensor_restriction_experiment(&t, sigma, f, a.trials, ctx.seed, a.symmetric, &ctx.budget)?
            }
            RestrictKind::Poly => {
                let p = read_poly(a.input.as_deref())?;
                let f: PolyRankFn = a.rank_fn.as_deref().unwrap_or("arank").parse()?;
                poly_restriction_experiment(&p, sigma, a.epsilon, f, a.trials, ctx.seed, a.friedgut_c, &ctx.budget)?
            }
        };
        recs.push(rec);
    }
    ctx.records(&recs)
}

fn concentration(ctx: &Ctx, check: ConcCmd) -> Result<bool> {
    match check {
        ConcCmd::Talagrand { n, sigma, sets } => {
            let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
            let mut table = String::new();
            let mut rows = Vec::new();
            let mut all = true;
            for i in 0..sets {
                let a = random_point_set(n, &mut rng)?;
                for r in talagrand_sweep(&a, check_sigma(sigma)?)? {
                    all &= r.holds;
                    table.push_str(&format!("set {i} |A|={} k={} lhs={:.6e} rhs={:.6e} holds={}\n", a.members().len(), r.k, r.lhs_f64(), r.rhs, r.holds));
                    rows.push(json!({"set": i, "size": a.members().len(), "k": r.k, "lhs": r.lhs.to_string(), "rhs": r.rhs, "holds": r.holds}));
                }
            }
            ctx.value(table, json!(rows))?;
            Ok(all)
        }
        ConcCmd::Coupling { source, k } => {
            let f = hypercube_source(ctx, &source)?;
            let mut table = String::new();
            let mut rows = Vec::new();
            let mut all = true;
            for k in k {
                let r = coupling_check(&f, k)?;
                all &= r.holds;
                table.push_str(&format!("k={k} prob={} >= 1/{k}: {}\n", r.prob, r.holds));
                rows.push(json!({"k": k, "prob": r.prob.to_string(), "holds": r.holds}));
            }
            ctx.value(table, json!(rows))?;
            Ok(all)
        }
        ConcCmd::Tail { source, sigma } => {
            let f = hypercube_source(ctx, &source)?;
            let r = subadditive_tail_check(&f, check_sigma(sigma)?)?;
            ctx.value(
                format!("r={} threshold={} lhs={} rhs={} holds={}\n", r.r, r.threshold, r.lhs, r.rhs, r.holds),
                json!({"r": r.r, "threshold": r.threshold, "lhs": r.lhs.to_string(), "rhs": r.rhs, "holds": r.holds}),
            )?;
            Ok(r.holds)
        }
        ConcCmd::Russo {
            family,
            n,
            q,
            step,
            tol,
        } => {
            let g = match family {
                Family::Dictator => HypercubeFunction::dictator(n, 0)?,
                Family::And => HypercubeFunction::and(n)?,
                Family::Or => HypercubeFunction::or(n)?,
                Family::Majority => HypercubeFunction::majority(n)?,
                Family::Parity => HypercubeFunction::parity(n)?,
                Family::Tribes => HypercubeFunction::tribes(2, n.div_ceil(2))?,
            };
            let r = russo_check(&g, q, step, tol)?;
            ctx.value(
                format!("q={} derivative={} influence={} holds={}\n", r.q, r.derivative_fd, r.influence, r.holds),
                json!(r),
            )?;
            Ok(r.holds)
        }
    }
}

fn main() -> ExitCode {
    if let Ok(v) = std::env::var("RANKLAB_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: RANKLAB_THREADS must be a positive integer");
                return ExitCode::from(1);
            }
        }
    }
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("theorem check violated");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
