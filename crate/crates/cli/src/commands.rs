//! Command-line parsing and the three subcommands.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use catclust::combinatorics::ColoringMode;
use catclust::metric::clustering_cost;
use catclust::oracle::CandidateSource;
use catclust::{Instance, Ratio, SizeConstraint};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::format::{parse_instance, write_instance};
use crate::grid::{self, GridSpec};
use crate::report::{CrosscheckReport, Disagreement, Params, Report};
use crate::solve::{self, Caps, SolveConfig, SolverKind};
use crate::Variant;

pub const EXIT_YES: i32 = 0;
pub const EXIT_NO: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "catclust",
    version,
    about = "Exact categorical clustering with size constraints"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide one instance file and print a JSON report.
    Solve(SolveArgs),
    /// Write a planted instance and its ground-truth sidecar.
    Generate(GenerateArgs),
    /// Run two solvers over a seeded grid and report disagreements.
    Crosscheck(CrosscheckArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ColoringArg {
    Exhaustive,
    Perfect,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CandidatesArg {
    /// Every vector over the alphabet.
    All,
    /// The candidate median set for the budget.
    Candidates,
}

#[derive(Debug, Clone, Args)]
pub struct EngineArgs {
    #[arg(long, value_enum, default_value = "perfect")]
    pub coloring: ColoringArg,
    /// Random colorings per (t, l); defaults to ceil(e^l ln 4).
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; output does not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Median source for brute-medians.
    #[arg(long, value_enum, default_value = "all")]
    pub candidates: CandidatesArg,
    /// Add elapsed_ms to the report.
    #[arg(long)]
    pub timing: bool,
}

impl EngineArgs {
    fn coloring_mode(&self) -> ColoringMode {
        match self.coloring {
            ColoringArg::Exhaustive => ColoringMode::Exhaustive,
            ColoringArg::Perfect => ColoringMode::Perfect,
            ColoringArg::Random => ColoringMode::Random {
                trials: self.trials,
                seed: self.seed,
            },
        }
    }

    fn candidate_source(&self) -> CandidateSource {
        match self.candidates {
            CandidatesArg::All => CandidateSource::AllVectors,
            CandidatesArg::Candidates => CandidateSource::Candidates,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    /// Instance file: header "m n sigma", then m rows of n symbols.
    pub file: PathBuf,
    #[arg(long, value_enum, default_value = "capacitated")]
    pub variant: Variant,
    #[arg(short = 'k', long)]
    pub k: usize,
    #[arg(short = 'B', long = "budget")]
    pub budget: u64,
    #[arg(short = 'p', long)]
    pub p: Option<usize>,
    #[arg(short = 'q', long)]
    pub q: Option<usize>,
    #[arg(long)]
    pub delta: Option<usize>,
    /// Factor as NUM/DEN or an integer.
    #[arg(long, value_parser = parse_alpha)]
    pub alpha: Option<Ratio<u64>>,
    #[arg(long, value_enum, default_value = "fpt")]
    pub solver: SolverKind,
    /// Run the balanced kernel first.
    #[arg(long)]
    pub kernelize: bool,
    #[command(flatten)]
    pub engine: EngineArgs,
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    #[arg(short = 'n', long)]
    pub n: usize,
    #[arg(short = 'm', long)]
    pub m: usize,
    #[arg(long)]
    pub sigma: u32,
    #[arg(long)]
    pub planted_k: usize,
    #[arg(long, default_value_t = 0)]
    pub noise_edits: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Instance path; the sidecar goes to `<out>.truth.json`.
    #[arg(short = 'o', long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CheckSolver {
    Fpt,
    BrutePartition,
    /// brute-medians over every vector of the alphabet
    BruteMedians,
    /// brute-medians over the candidate median set
    BruteMediansCandidates,
    /// balanced kernel, then brute-partition on reduced instances
    KernelBrute,
    /// balanced kernel, then fpt on reduced instances
    KernelFpt,
}

impl CheckSolver {
    fn name(self) -> String {
        self.to_possible_value()
            .expect("no skipped variants")
            .get_name()
            .to_string()
    }

    fn config(self, engine: &EngineArgs, caps: Caps) -> SolveConfig {
        let (solver, candidates, kernelize) = match self {
            CheckSolver::Fpt => (SolverKind::Fpt, CandidateSource::AllVectors, false),
            CheckSolver::BrutePartition => (SolverKind::BrutePartition, CandidateSource::AllVectors, false),
            CheckSolver::BruteMedians => (SolverKind::BruteMedians, CandidateSource::AllVectors, false),
            CheckSolver::BruteMediansCandidates => (SolverKind::BruteMedians, CandidateSource::Candidates, false),
            CheckSolver::KernelBrute => (SolverKind::BrutePartition, CandidateSource::AllVectors, true),
            CheckSolver::KernelFpt => (SolverKind::Fpt, CandidateSource::AllVectors, true),
        };
        SolveConfig {
            solver,
            coloring: engine.coloring_mode(),
            candidates,
            kernelize,
            caps,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct CrosscheckArgs {
    #[arg(long, value_enum, default_value = "fpt")]
    pub left: CheckSolver,
    #[arg(long, value_enum, default_value = "brute-partition")]
    pub right: CheckSolver,
    #[arg(long, value_enum, default_value = "capacitated")]
    pub variant: Variant,
    #[arg(long, default_value_t = 2)]
    pub n_min: usize,
    #[arg(long, default_value_t = 8)]
    pub n_max: usize,
    #[arg(long, default_value_t = 1)]
    pub m_min: usize,
    #[arg(long, default_value_t = 3)]
    pub m_max: usize,
    /// Alphabet sizes, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "2,3")]
    pub sigma: Vec<u32>,
    #[arg(long, default_value_t = 3)]
    pub k_max: usize,
    #[arg(long, default_value_t = 4)]
    pub b_max: u64,
    /// (p, q) windows per cell for capacitated grids.
    #[arg(long, default_value_t = 3)]
    pub pq_samples: usize,
    /// Extra instances with random parameters.
    #[arg(long, default_value_t = 500)]
    pub random: usize,
    #[command(flatten)]
    pub engine: EngineArgs,
}

fn parse_alpha(s: &str) -> Result<Ratio<u64>, String> {
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (s.trim(), "1"),
    };
    let num: u64 = num.parse().map_err(|_| format!("bad numerator in {s:?}"))?;
    let den: u64 = den.parse().map_err(|_| format!("bad denominator in {s:?}"))?;
    if den == 0 {
        return Err("alpha denominator must be positive".into());
    }
    Ok(Ratio::new(num, den))
}

fn constraint_of(args: &SolveArgs) -> Result<SizeConstraint, String> {
    let need = |v: Option<usize>, flag: &str| v.ok_or_else(|| format!("--variant {:?} needs {flag}", args.variant));
    Ok(match args.variant {
        Variant::Capacitated => SizeConstraint::Capacitated {
            p: need(args.p, "-p")?,
            q: need(args.q, "-q")?,
        },
        Variant::Balanced => SizeConstraint::Balanced {
            delta: need(args.delta, "--delta")?,
        },
        Variant::Factor => SizeConstraint::FactorBalanced {
            alpha: args.alpha.ok_or("--variant factor needs --alpha")?,
        },
        Variant::Equal => SizeConstraint::Equal,
        Variant::Unconstrained => SizeConstraint::Unconstrained,
    })
}

fn params_of(variant: Variant, instance: &Instance, cfg: &SolveConfig, seed: u64) -> Params {
    let (mut p, mut q, mut delta, mut alpha) = (None, None, None, None);
    match &instance.constraint {
        SizeConstraint::Capacitated { p: a, q: b } => (p, q) = (Some(*a), Some(*b)),
        SizeConstraint::Balanced { delta: d } => delta = Some(*d),
        SizeConstraint::FactorBalanced { alpha: a } => alpha = Some(format!("{}/{}", a.numer(), a.denom())),
        _ => {}
    }
    let fpt = cfg.solver == SolverKind::Fpt;
    let (coloring, trials) = match &cfg.coloring {
        _ if !fpt => (None, None),
        ColoringMode::Exhaustive => (Some("exhaustive"), None),
        ColoringMode::Perfect => (Some("perfect"), None),
        ColoringMode::Random { trials, .. } => (Some("random"), *trials),
    };
    let candidates = match (cfg.solver, cfg.candidates) {
        (SolverKind::BruteMedians, CandidateSource::AllVectors) => Some("all"),
        (SolverKind::BruteMedians, CandidateSource::Candidates) => Some("candidates"),
        _ => None,
    };
    Params {
        variant,
        k: instance.k,
        budget: instance.budget,
        p,
        q,
        delta,
        alpha,
        coloring,
        trials,
        seed,
        candidates,
        kernelize: cfg.kernelize,
    }
}

fn in_pool<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R, String> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| format!("cannot start {n} threads: {e}"))?;
            Ok(pool.install(f))
        }
    }
}

fn elapsed_ms(start: Instant) -> u64 {
    u64::try_from(start.elapsed().as_millis()).unwrap_or(u64::MAX)
}

fn cmd_solve(args: &SolveArgs, out: &mut dyn Write) -> Result<i32, String> {
    let start = Instant::now();
    let text = std::fs::read_to_string(&args.file).map_err(|e| format!("{}: {e}", args.file.display()))?;
    let file = parse_instance(&text).map_err(|e| format!("{}: {e}", args.file.display()))?;
    let constraint = constraint_of(args)?;
    if args.kernelize && args.variant != Variant::Balanced {
        return Err("--kernelize needs --variant balanced".into());
    }
    let instance =
        Instance::new(file.matrix, file.alphabet, args.k, args.budget, constraint).map_err(|e| e.to_string())?;
    let cfg = SolveConfig {
        solver: args.solver,
        coloring: args.engine.coloring_mode(),
        candidates: args.engine.candidate_source(),
        kernelize: args.kernelize,
        caps: Caps::from_env()?,
    };
    let outcome = in_pool(args.engine.threads, || solve::run(&instance, &cfg))?.map_err(|e| e.to_string())?;
    if let Some(c) = &outcome.witness {
        solve::verify(&instance, c).map_err(|e| format!("witness failed verification: {e}"))?;
    }
    let params = params_of(args.variant, &instance, &cfg, args.engine.seed);
    let mut report = Report::new(outcome.witness.as_ref(), args.solver.name(), params, outcome.kernel);
    if args.engine.timing {
        report.elapsed_ms = Some(elapsed_ms(start));
    }
    out.write_all(report.to_json().as_bytes()).map_err(|e| e.to_string())?;
    Ok(if outcome.witness.is_some() { EXIT_YES } else { EXIT_NO })
}

#[derive(Serialize)]
struct Truth {
    n: usize,
    m: usize,
    sigma: u32,
    planted_k: usize,
    noise_edits: usize,
    seed: u64,
    /// The planted clustering costs at most this much.
    budget: u64,
    /// Cost of the planted clustering around its majority medians.
    planted_cost: u64,
    clusters: Vec<Vec<usize>>,
    centers: Vec<Vec<u32>>,
}

fn cmd_generate(args: &GenerateArgs, out: &mut dyn Write) -> Result<i32, String> {
    let planted = grid::planted(args.seed, args.n, args.m, args.sigma, args.planted_k, args.noise_edits)?;
    let (planted_cost, _) = clustering_cost(&planted.matrix, &planted.clusters).map_err(|e| e.to_string())?;
    let truth = Truth {
        n: args.n,
        m: args.m,
        sigma: args.sigma,
        planted_k: args.planted_k,
        noise_edits: args.noise_edits,
        seed: args.seed,
        budget: args.noise_edits as u64,
        planted_cost,
        clusters: planted
            .clusters
            .iter()
            .map(|c| c.iter().map(|&j| j + 1).collect())
            .collect(),
        centers: planted.centers,
    };
    let mut sidecar = args.out.clone().into_os_string();
    sidecar.push(".truth.json");
    let sidecar = PathBuf::from(sidecar);
    std::fs::write(&args.out, write_instance(&planted.matrix, args.sigma))
        .map_err(|e| format!("{}: {e}", args.out.display()))?;
    let mut json = serde_json::to_string_pretty(&truth).map_err(|e| e.to_string())?;
    json.push('\n');
    std::fs::write(&sidecar, json).map_err(|e| format!("{}: {e}", sidecar.display()))?;
    writeln!(out, "wrote {} and {}", args.out.display(), sidecar.display()).map_err(|e| e.to_string())?;
    Ok(EXIT_YES)
}

type Decision = Result<Option<bool>, String>;

fn decide(instance: &Instance, cfg: &SolveConfig) -> Decision {
    let outcome = solve::run(instance, cfg).map_err(|e| e.to_string())?;
    match &outcome.witness {
        Some(c) => solve::verify(instance, c)
            .map(|_| Some(true))
            .map_err(|e| format!("bad witness: {e}")),
        None => Ok(Some(false)),
    }
}

fn cmd_crosscheck(args: &CrosscheckArgs, out: &mut dyn Write) -> Result<i32, String> {
    let start = Instant::now();
    if args.n_min == 0 || args.n_min > args.n_max || args.m_min == 0 || args.m_min > args.m_max {
        return Err("grid ranges need 1 <= min <= max".into());
    }
    if args.sigma.is_empty() || args.sigma.contains(&0) || args.k_max == 0 {
        return Err("grid needs positive alphabet sizes and k-max".into());
    }
    let kernel = [CheckSolver::KernelBrute, CheckSolver::KernelFpt];
    if (kernel.contains(&args.left) || kernel.contains(&args.right)) && args.variant != Variant::Balanced {
        return Err("kernel solvers need --variant balanced".into());
    }
    let spec = GridSpec {
        n: args.n_min..=args.n_max,
        m: args.m_min..=args.m_max,
        sigmas: args.sigma.clone(),
        k_max: args.k_max,
        b_max: args.b_max,
        pq_samples: args.pq_samples,
        random: args.random,
        seed: args.engine.seed,
        variant: args.variant,
    };
    let caps = Caps::from_env()?;
    let left = args.left.config(&args.engine, caps);
    let right = args.right.config(&args.engine, caps);
    let cases = grid::build(&spec);
    let results: Vec<(Decision, Decision)> = in_pool(args.engine.threads, || {
        cases
            .par_iter()
            .map(|c| (decide(&c.instance, &left), decide(&c.instance, &right)))
            .collect()
    })?;

    let mut disagreements = Vec::new();
    let (mut yes, mut errors) = (0, 0);
    for (case, (l, r)) in cases.iter().zip(results) {
        match (l, r) {
            (Ok(a), Ok(b)) if a == b => yes += usize::from(a == Some(true)),
            (Ok(a), Ok(b)) => disagreements.push(Disagreement {
                id: case.id.clone(),
                left: a,
                right: b,
                detail: "decisions differ".into(),
            }),
            (l, r) => {
                errors += 1;
                let detail = [("left", &l), ("right", &r)]
                    .iter()
                    .filter_map(|(side, d)| d.as_ref().err().map(|e| format!("{side}: {e}")))
                    .collect::<Vec<_>>()
                    .join("; ");
                disagreements.push(Disagreement {
                    id: case.id.clone(),
                    left: l.ok().flatten(),
                    right: r.ok().flatten(),
                    detail,
                });
            }
        }
    }
    let report = CrosscheckReport {
        left: args.left.name(),
        right: args.right.name(),
        variant: args.variant,
        seed: args.engine.seed,
        instances: cases.len(),
        yes,
        disagreements,
        elapsed_ms: args.engine.timing.then(|| elapsed_ms(start)),
    };
    out.write_all(report.to_json().as_bytes()).map_err(|e| e.to_string())?;
    Ok(if errors > 0 {
        EXIT_ERROR
    } else if report.disagreements.is_empty() {
        EXIT_YES
    } else {
        EXIT_NO
    })
}

/// Parses `args` (including the program name) and runs the command. Returns
/// the process exit code: 0 yes or clean, 1 no or disagreement, 2 error.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            if code == 0 {
                let _ = write!(out, "{}", e.render());
                return 0;
            }
            let _ = write!(err, "{}", e.render());
            return EXIT_ERROR;
        }
    };
    let result = match &cli.command {
        Command::Solve(a) => cmd_solve(a, out),
        Command::Generate(a) => cmd_generate(a, out),
        Command::Crosscheck(a) => cmd_crosscheck(a, out),
    };
    match result {
        Ok(code) => code,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_ERROR
        }
    }
}
