use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bupp::harness::{
    run_experiment, threads_from_env, verify_lemma, with_threads, write_csv, ExperimentSpec,
    InstanceSource, Lemma, VerifyParams,
};
use bupp::io::Instance;
use bupp::learn::{learn_from_samples, learn_product_by_queries, LearnerConfig, QueryOracle, SampleOracle};
use bupp::optimize::{exante_optimal, CoordinateSearch, GridSearch, PriceGrid, PriceOptimizer};
use bupp::{exante_rev, rev, Exact, PriceVector, ProductDist, Scalar};
use clap::{Parser, Subcommand, ValueEnum};
use num_rational::Ratio;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "bupp", version, about = "Posted prices for a unit-demand buyer: revenue, optimization, learning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    BaseG,
    SampleHard,
    QueryHard,
    EqualRevenue,
    Nonmono,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Brute,
    Coord,
    Exante,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Sample,
    Query,
}

#[derive(Subcommand)]
enum Command {
    /// Write an instance as JSON.
    Gen {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long, default_value_t = 4)]
        n: u64,
        #[arg(long, default_value = "1/8")]
        eps: Ratio<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Use the raised first item (nonmono family).
        #[arg(long)]
        perturbed: bool,
        /// Lattice size (random family).
        #[arg(long, default_value_t = 10)]
        lattice: u64,
        /// Largest support per item (random family).
        #[arg(long, default_value_t = 4)]
        max_support: usize,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact revenue and ex-ante revenue of a price vector.
    Eval {
        #[arg(long)]
        instance: PathBuf,
        /// Comma-separated prices such as `1/2,1`.
        #[arg(long)]
        prices: String,
    },
    /// Best prices on a grid.
    Opt {
        #[arg(long)]
        instance: PathBuf,
        /// `lattice`, `eps-squared` (with --eps) or a comma-separated price list.
        #[arg(long, default_value = "lattice")]
        grid: String,
        #[arg(long, value_enum, default_value = "brute")]
        method: Method,
        #[arg(long, default_value = "1/8")]
        eps: Ratio<u64>,
        #[arg(long, default_value_t = 20)]
        starts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a learner against an instance through its oracle.
    Learn {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
        /// Samples (sample mode) or queries per estimate (query mode); the
        /// formula budget when absent.
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long, default_value = "1/8")]
        eps: Ratio<u64>,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        /// Leading budget constant.
        #[arg(long)]
        c: Option<f64>,
        /// Price grid for the sample learner, as in `opt`.
        #[arg(long, default_value = "eps-squared")]
        grid: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a budget sweep and write CSV.
    Experiment {
        #[arg(long)]
        spec: PathBuf,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check one of the structural inequalities numerically.
    Verify {
        #[arg(long)]
        lemma: String,
        /// JSON object of parameters, or `@file`.
        #[arg(long)]
        params: Option<String>,
        /// Report file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Usage(String),
    Check,
}

impl From<bupp::Error> for Failure {
    fn from(e: bupp::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn fraction(num: u64, den: u64) -> String {
    Ratio::new(num, den).to_string()
}

fn prices_json(p: &PriceVector) -> Value {
    json!(p.prices().iter().map(|&x| fraction(x, p.lattice())).collect::<Vec<_>>())
}

fn revenue_json(r: &Exact) -> Value {
    json!({"exact": r.to_string(), "value": r.to_f64()})
}

fn parse_fractions(text: &str) -> Result<Vec<Ratio<u64>>, Failure> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<Ratio<u64>>()
                .map_err(|_| Failure::Usage(format!("bad price {s:?}")))
        })
        .collect()
}

/// Numerators of `values` on the smallest lattice refining both `lattice`
/// and every denominator, together with that lattice.
fn on_common_lattice(lattice: u64, values: &[Ratio<u64>]) -> (u64, Vec<u64>) {
    let common = values
        .iter()
        .fold(lattice, |acc, r| num_integer::lcm(acc, *r.denom()));
    let nums = values
        .iter()
        .map(|r| r.numer() * (common / r.denom()))
        .collect();
    (common, nums)
}

fn load(path: &Path) -> Result<ProductDist<Exact>, Failure> {
    // Generator secrets stay in the file; only the distribution is used.
    Instance::<Exact>::read(path)
        .map(|inst| inst.dist)
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn parse_grid(spec: &str, lattice: u64, eps: Ratio<u64>) -> Result<PriceGrid, Failure> {
    Ok(match spec {
        "lattice" => PriceGrid::multiples(lattice, 1)?,
        "eps-squared" => PriceGrid::eps_squared(lattice, eps)?,
        list => {
            let (common, nums) = on_common_lattice(lattice, &parse_fractions(list)?);
            PriceGrid::new(common, nums)?
        }
    })
}

fn emit(text: &str, out: Option<&Path>) -> Outcome {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn print_json(v: &Value) -> Outcome {
    emit(&(serde_json::to_string_pretty(v)? + "\n"), None)
}

fn run(cli: Cli) -> Outcome {
    let threads = threads_from_env();
    match cli.command {
        Command::Gen {
            family,
            n,
            eps,
            seed,
            perturbed,
            lattice,
            max_support,
            out,
        } => {
            let source = match family {
                Family::BaseG => InstanceSource::BaseG { n },
                Family::SampleHard => InstanceSource::SampleHard { n, eps, seed },
                Family::QueryHard => InstanceSource::QueryHard { n, eps, seed },
                Family::EqualRevenue => InstanceSource::EqualRevenue { n, eps },
                Family::Nonmono => InstanceSource::Nonmono { perturbed },
                Family::Random => InstanceSource::Random {
                    n: n as usize,
                    lattice,
                    max_support,
                    seed,
                },
            };
            let inst = source.resolve()?.into_instance();
            emit(&(inst.to_json()? + "\n"), out.as_deref())
        }
        Command::Eval { instance, prices } => {
            let d = load(&instance)?;
            let (common, nums) = on_common_lattice(d.lattice(), &parse_fractions(&prices)?);
            let d = d.with_lattice(common)?;
            let p = PriceVector::new(common, nums)?;
            let (r, ex) = with_threads(threads, || Ok::<_, bupp::Error>((rev(&d, &p)?, exante_rev(&d, &p)?)))??;
            print_json(&json!({
                "prices": prices_json(&p),
                "revenue": revenue_json(&r),
                "exante_revenue": revenue_json(&ex),
            }))
        }
        Command::Opt {
            instance,
            grid,
            method,
            eps,
            starts,
            seed,
        } => {
            let d = load(&instance)?;
            let grid = parse_grid(&grid, d.lattice(), eps)?;
            let d = d.with_lattice(grid.lattice())?;
            let (p, r) = with_threads(threads, || match method {
                Method::Brute => GridSearch { grid }.optimize(&d),
                Method::Coord => CoordinateSearch { grid, starts, seed }.optimize(&d),
                Method::Exante => exante_optimal(&d, &grid),
            })??;
            let objective = match method {
                Method::Exante => "exante_revenue",
                _ => "revenue",
            };
            print_json(&json!({"prices": prices_json(&p), objective: revenue_json(&r)}))
        }
        Command::Learn {
            instance,
            mode,
            budget,
            eps,
            delta,
            c,
            grid,
            seed,
        } => {
            let d = load(&instance)?;
            let base = match mode {
                Mode::Sample => LearnerConfig::for_samples(eps, delta),
                Mode::Query => LearnerConfig::for_queries(eps, delta),
            };
            let base = c.map_or(base.clone(), |c| base.with_c(c));
            let cfg = budget.map_or(base.clone(), |b| base.with_budget(b));
            let result = with_threads(threads, || -> Result<Value, Failure> {
                Ok(match mode {
                    Mode::Sample => {
                        let grid = parse_grid(&grid, d.lattice(), eps)?;
                        let mut oracle = SampleOracle::new(&d, seed);
                        let out = learn_from_samples::<f64, _>(&mut oracle, &cfg, &GridSearch { grid })?;
                        json!({"prices": prices_json(&out.prices), "samples_used": out.samples_used,
                               "revenue": revenue_json(&true_revenue(&d, &out.prices)?)})
                    }
                    Mode::Query => {
                        let m = *eps.denom();
                        let grid = PriceGrid::multiples(m * m, 1)?;
                        let mut oracle = QueryOracle::new(&d, seed);
                        let out = learn_product_by_queries::<f64, _>(&mut oracle, &cfg, &GridSearch { grid })?;
                        let rounds: Vec<usize> = out.traces.iter().map(|t| t.rounds).collect();
                        json!({"prices": prices_json(&out.prices), "queries_used": oracle.queries_used(),
                               "rounds": rounds, "revenue": revenue_json(&true_revenue(&d, &out.prices)?)})
                    }
                })
            })??;
            print_json(&result)
        }
        Command::Experiment { spec, out } => {
            let spec: ExperimentSpec = serde_json::from_str(&std::fs::read_to_string(&spec)?)?;
            let records = run_experiment(&spec, threads)?;
            let mut buf = Vec::new();
            write_csv(&records, &mut buf)?;
            emit(&String::from_utf8(buf).expect("CSV is ASCII"), out.as_deref())
        }
        Command::Verify { lemma, params, out } => {
            let lemma: Lemma = lemma.parse()?;
            let params: VerifyParams = match params.as_deref() {
                None => VerifyParams::default(),
                Some(p) => match p.strip_prefix('@') {
                    Some(path) => serde_json::from_str(&std::fs::read_to_string(path)?)?,
                    None => serde_json::from_str(p)?,
                },
            };
            let report = with_threads(threads, || verify_lemma(lemma, &params))??;
            emit(&(serde_json::to_string_pretty(&report)? + "\n"), out.as_deref())?;
            if report.passed {
                Ok(())
            } else {
                Err(Failure::Check)
            }
        }
    }
}

fn true_revenue(d: &ProductDist<Exact>, p: &PriceVector) -> bupp::Result<Exact> {
    let common = num_integer::lcm(d.lattice(), p.lattice());
    rev(&d.with_lattice(common)?, &p.with_lattice(common)?)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
