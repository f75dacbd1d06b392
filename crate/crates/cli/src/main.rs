use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use khrushchev_core::campaign::{run_campaign, CampaignConfig};
use khrushchev_core::cmv::{build_operator, BlockOperatorSpec, Family};
use khrushchev_core::io::{self, MatrixJson, SCHEMA_VERSION};
use khrushchev_core::khrushchev::{
    verification_window, verify_hessenberg_formula, verify_hessenberg_superposition, verify_range_formula,
    verify_site_formula, verify_superposition, Theorem, VerificationReport,
};
use khrushchev_core::linalg::IndexSubspace;
use khrushchev_core::overlap::{check_overlap, construct_overlap, SubspacePartition};
use khrushchev_core::pathcount::{oracle_first_return_blocks, PathOptions};
use khrushchev_core::random::{random_parameters, seeded_rng};
use khrushchev_core::schur::{schur_forward, synthesize};
use khrushchev_core::spectral::{first_return_amplitudes, return_statistics, schur_of_subspace};
use khrushchev_core::{CMatrix, Complex64, Error, Params, Real, Series};

const BUILTIN_WORKED_EXAMPLES: &str = include_str!("../campaigns/worked-examples.json");

#[derive(Parser)]
#[command(
    name = "khrushchev",
    version,
    about = "Block CMV/Hessenberg unitaries, Schur functions of subspaces and factorization checks"
)]
struct Cli {
    /// Verification tolerance.
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol: f64,
    /// Series truncation order.
    #[arg(long, global = true, default_value_t = 12)]
    order: usize,
    /// Seed for randomly generated inputs.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for campaigns.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build block CMV and Hessenberg matrices.
    #[command(subcommand)]
    Cmv(CmvCommand),
    /// Schur parameters and synthesis.
    #[command(subcommand)]
    Schur(SchurCommand),
    /// Quantum-walk return statistics.
    #[command(subcommand)]
    Walk(WalkCommand),
    /// Overlapping factorizations of finite unitaries.
    #[command(subcommand)]
    Overlap(OverlapCommand),
    /// Verify one formula against the operator route.
    Verify(VerifyArgs),
    /// Batches of verifications.
    #[command(subcommand)]
    Campaign(CampaignCommand),
    /// Random parameter sequences.
    #[command(subcommand)]
    Random(RandomCommand),
}

#[derive(Subcommand)]
enum CmvCommand {
    Build {
        #[arg(long, default_value = "C")]
        family: String,
        #[arg(long)]
        params: PathBuf,
        /// Number of blocks; defaults to the finite size of a terminated sequence.
        #[arg(long)]
        blocks: Option<usize>,
    },
}

#[derive(Subcommand)]
enum SchurCommand {
    /// Schur parameters of a series given as coefficient CSV.
    Params {
        #[arg(long)]
        series: PathBuf,
        /// Number of Schur steps (defaults to the series order).
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Taylor coefficients of the Schur function of a parameter sequence, as CSV.
    Synthesize {
        #[arg(long)]
        params: PathBuf,
    },
}

#[derive(Subcommand)]
enum WalkCommand {
    Return {
        #[arg(long)]
        unitary: PathBuf,
        /// Comma-separated basis indices of V.
        #[arg(long)]
        subspace: String,
        /// State in V as `[[re, im], ...]`; defaults to the first basis vector.
        #[arg(long)]
        state: Option<PathBuf>,
        #[arg(long, default_value_t = 64)]
        horizon: usize,
        /// Dump the Schur coefficients of V as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Args)]
struct PartitionArgs {
    #[arg(long)]
    unitary: PathBuf,
    /// `L=0,1 C=2 R=3,4,5`
    #[arg(long, num_args = 1..=3, required = true)]
    partition: Vec<String>,
}

#[derive(Subcommand)]
enum OverlapCommand {
    Check(PartitionArgs),
    Construct(PartitionArgs),
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    theorem: Theorem,
    #[arg(long)]
    family: Option<String>,
    /// Parameter JSON; random parameters (needs --seed) when omitted.
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    d: usize,
    #[arg(long, default_value_t = 8)]
    length: usize,
    /// Close random parameters with a unitary terminal.
    #[arg(long)]
    terminal: bool,
    #[arg(long)]
    j: usize,
    #[arg(long)]
    k: Option<usize>,
    /// β as `re,im`.
    #[arg(long, default_value = "1,0")]
    beta: String,
    /// γ as `re,im`.
    #[arg(long, default_value = "0,0")]
    gamma: String,
    /// Also compare the operator amplitudes with path enumeration.
    #[arg(long)]
    oracle: bool,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Subcommand)]
enum CampaignCommand {
    Run {
        /// Campaign config; the bundled worked examples when omitted.
        config: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum RandomCommand {
    Params {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        length: usize,
        #[arg(long)]
        terminal: bool,
    },
}

/// Failure modes mapped to exit codes.
enum Failure {
    /// A check ran and did not pass (exit 1).
    Check(String),
    /// Bad input or a violated invariant (exit 2).
    Input(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type CliResult = std::result::Result<(), Failure>;

fn emit(out: &Option<PathBuf>, text: &str) -> CliResult {
    match out {
        Some(p) => write_file(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_file(p: &Path, text: &str) -> CliResult {
    fs::write(p, text).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))
}

fn read_text(p: &Path) -> std::result::Result<String, Failure> {
    fs::read_to_string(p).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn parse_indices(s: &str) -> std::result::Result<Vec<usize>, Failure> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| Failure::Input(format!("bad index '{t}'"))))
        .collect()
}

fn parse_complex(s: &str) -> std::result::Result<Complex64, Failure> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |t: &str| t.parse::<f64>().map_err(|_| Failure::Input(format!("bad number '{t}'")));
    match parts.as_slice() {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => Err(Failure::Input(format!("expected 're,im', got '{s}'"))),
    }
}

fn parse_partition(n: usize, specs: &[String]) -> std::result::Result<SubspacePartition, Failure> {
    let (mut l, mut c, mut r) = (None, None, None);
    for spec in specs {
        let (key, vals) =
            spec.split_once('=').ok_or_else(|| Failure::Input(format!("expected KEY=indices, got '{spec}'")))?;
        let slot = match key {
            "L" => &mut l,
            "C" => &mut c,
            "R" => &mut r,
            _ => return Err(Failure::Input(format!("unknown partition part '{key}'"))),
        };
        *slot = Some(parse_indices(vals)?);
    }
    Ok(SubspacePartition::new(n, l.unwrap_or_default(), c.unwrap_or_default(), r.unwrap_or_default())?)
}

fn load_params(p: &Path) -> std::result::Result<Params, Failure> {
    Ok(io::params_from_json(&read_text(p)?)?)
}

fn load_matrix(p: &Path) -> std::result::Result<CMatrix, Failure> {
    Ok(io::matrix_from_json(&read_text(p)?)?)
}

fn cmd_cmv(cli: &Cli, cmd: &CmvCommand) -> CliResult {
    let CmvCommand::Build { family, params, blocks } = cmd;
    let family: Family = family.parse()?;
    let p = load_params(params)?;
    let spec = match blocks {
        Some(n) => BlockOperatorSpec::new(p, family, *n)?,
        None => BlockOperatorSpec::finite(p, family)?,
    };
    let op = build_operator(&spec)?;
    emit(&cli.out, &io::matrix_to_json(&op.matrix))
}

fn cmd_schur(cli: &Cli, cmd: &SchurCommand) -> CliResult {
    match cmd {
        SchurCommand::Params { series, steps } => {
            let f = Series::from_csv(&read_text(series)?)?;
            let p = schur_forward(&f, steps.unwrap_or(f.order()))?;
            emit(&cli.out, &io::params_to_json(&p))
        }
        SchurCommand::Synthesize { params } => {
            let f = synthesize(&load_params(params)?, cli.order)?;
            emit(&cli.out, &f.to_csv())
        }
    }
}

fn cmd_walk(cli: &Cli, cmd: &WalkCommand) -> CliResult {
    let WalkCommand::Return { unitary, subspace, state, horizon, csv } = cmd;
    let u = load_matrix(unitary)?;
    let v = IndexSubspace::new(u.rows(), parse_indices(subspace)?)?;
    if v.is_empty() {
        return Err(Failure::Input("empty subspace".into()));
    }
    let psi = match state {
        Some(p) => io::vector_from_json(&read_text(p)?)?,
        None => {
            let mut e = vec![Complex64::new(0.0, 0.0); v.dim()];
            e[0] = Complex64::new(1.0, 0.0);
            e
        }
    };
    let stats = return_statistics(&u, &v, &psi, *horizon)?;
    if let Some(path) = csv {
        let f = schur_of_subspace(&u, &v, horizon.saturating_sub(1))?;
        write_file(path, &f.to_csv())?;
    }
    let probs: Vec<Value> = stats.probabilities.iter().map(|&(n, p)| json!([n, p])).collect();
    let out = json!({
        "schema_version": SCHEMA_VERSION,
        "subspace": v.indices(),
        "horizon": horizon,
        "probabilities": probs,
        "cumulative": stats.cumulative,
        "partial_expected_time": stats.partial_expected_time,
    });
    emit(&cli.out, &pretty(&out))
}

fn cmd_overlap(cli: &Cli, cmd: &OverlapCommand) -> CliResult {
    match cmd {
        OverlapCommand::Check(a) => {
            let u = load_matrix(&a.unitary)?;
            let part = parse_partition(u.rows(), &a.partition)?;
            let v = check_overlap(&u, &part, f64::RANK_TOL)?;
            let out = json!({
                "schema_version": SCHEMA_VERSION,
                "overlapping": v.overlapping,
                "leak": v.leak,
                "leak_threshold": v.leak_threshold,
                "rank": v.rank,
                "center_dim": v.center_dim,
            });
            emit(&cli.out, &pretty(&out))?;
            if v.overlapping {
                Ok(())
            } else {
                Err(Failure::Check("the partition does not admit an overlapping factorization".into()))
            }
        }
        OverlapCommand::Construct(a) => {
            let u = load_matrix(&a.unitary)?;
            let part = parse_partition(u.rows(), &a.partition)?;
            let f = match construct_overlap(&u, &part) {
                Ok(f) => f,
                Err(e @ Error::NotOverlapping(_)) => return Err(Failure::Check(e.to_string())),
                Err(e) => return Err(e.into()),
            };
            let out = json!({
                "schema_version": SCHEMA_VERSION,
                "left": part.left().indices(),
                "center": part.center().indices(),
                "right": part.right().indices(),
                "lc_indices": part.lc_indices(),
                "cr_indices": part.cr_indices(),
                "u_lc": MatrixJson::from(f.u_lc()),
                "u_cr": MatrixJson::from(f.u_cr()),
                "reconstruction_residual": f.reconstruction_residual(&u),
            });
            emit(&cli.out, &pretty(&out))
        }
    }
}

/// Compares operator amplitudes of blocks `j..=k` with path enumeration up to length 6.
fn oracle_check(
    params: &Params,
    family: Family,
    j: usize,
    k: usize,
    order: usize,
    tol: f64,
) -> std::result::Result<f64, Failure> {
    let op = verification_window(params, family, k, order)?;
    let blocks: Vec<usize> = (j..=k).collect();
    let v = op.block_subspace(j, k)?;
    let horizon = (order + 1).min(6);
    let amps = first_return_amplitudes(&op.matrix, &v, horizon)?;
    let mut worst = 0.0f64;
    for n in 1..=horizon {
        let o = oracle_first_return_blocks(&op.matrix, op.d, &blocks, n, PathOptions::default())?;
        worst = worst.max(o.max_abs_diff(&amps.amplitudes[n - 1]));
    }
    if worst > tol {
        return Err(Failure::Check(format!("path enumeration disagrees with the operator amplitudes by {worst:e}")));
    }
    Ok(worst)
}

fn cmd_verify(cli: &Cli, a: &VerifyArgs) -> CliResult {
    let (params, seed) = match (&a.params, cli.seed) {
        (Some(p), _) => (load_params(p)?, None),
        (None, Some(s)) => (random_parameters(&mut seeded_rng(s), a.d, a.length, a.terminal), Some(s)),
        (None, None) => return Err(Failure::Input("give --params or --seed for random parameters".into())),
    };
    let default_family = if matches!(a.theorem, Theorem::Hessenberg | Theorem::HessenbergSuperposition) {
        Family::Hessenberg
    } else {
        Family::Cmv
    };
    let family = match &a.family {
        Some(f) => f.parse()?,
        None => default_family,
    };
    let need_k = || a.k.ok_or_else(|| Failure::Input(format!("theorem {} needs --k", a.theorem)));
    let (beta, gamma) = (parse_complex(&a.beta)?, parse_complex(&a.gamma)?);
    let mut report: VerificationReport = match a.theorem {
        Theorem::Site => verify_site_formula(&params, family, a.j, cli.order, cli.tol)?,
        Theorem::Range => verify_range_formula(&params, family, a.j, need_k()?, cli.order, cli.tol)?,
        Theorem::Hessenberg => verify_hessenberg_formula(&params, family, a.j, need_k()?, cli.order, cli.tol)?,
        Theorem::Superposition => verify_superposition(&params, a.j, beta, gamma, cli.order, cli.tol)?,
        Theorem::HessenbergSuperposition => {
            verify_hessenberg_superposition(&params, a.j, beta, gamma, cli.order, cli.tol)?
        }
        other => return Err(Failure::Input(format!("theorem {other} is only available in campaigns"))),
    };
    if let Some(s) = seed {
        report = report.with_seed(s);
    }
    if a.oracle {
        let k = report.k.unwrap_or(a.j);
        let fam = report.family.as_deref().map(str::parse).transpose()?.unwrap_or(family);
        match oracle_check(&params, fam, a.j, k, cli.order, cli.tol) {
            Ok(w) => report.notes.push(format!("path enumeration agrees with the operator amplitudes ({w:e})")),
            Err(Failure::Check(msg)) => {
                report.pass = false;
                report.notes.push(msg);
            }
            Err(e) => return Err(e),
        }
    }
    let text = io::to_json_pretty(&report);
    if let Some(p) = &a.report {
        write_file(p, &text)?;
    }
    emit(&cli.out, &text)?;
    if report.pass {
        Ok(())
    } else {
        Err(Failure::Check(format!("residual {:e} exceeds tolerance {:e}", report.residual, report.tolerance)))
    }
}

fn cmd_campaign(cli: &Cli, cmd: &CampaignCommand) -> CliResult {
    let CampaignCommand::Run { config, report } = cmd;
    let (mut cfg, base): (CampaignConfig, PathBuf) = match config {
        Some(p) => {
            let cfg = io::parse_json(&read_text(p)?)?;
            (cfg, p.parent().map(Path::to_path_buf).unwrap_or_default())
        }
        None => (io::parse_json(BUILTIN_WORKED_EXAMPLES)?, PathBuf::from(".")),
    };
    if cli.threads.is_some() {
        cfg.threads = cli.threads;
    }
    let result = run_campaign(&cfg, &base)?;
    let text = io::to_json_pretty(&result);
    let target = report.clone().or_else(|| cfg.report.as_ref().map(|p| base.join(p)));
    match (&target, &cli.out) {
        (Some(t), _) => write_file(t, &text)?,
        (None, out) => emit(out, &text)?,
    }
    for job in &result.jobs {
        let failed = job.reports.iter().filter(|r| !r.pass).count();
        let status = match (&job.error, failed) {
            (Some(_), _) => "ERROR",
            (None, 0) => "ok",
            _ => "FAIL",
        };
        eprintln!("{status:5} {} ({} checks)", job.name, job.reports.len());
        if let Some(e) = &job.error {
            eprintln!("      {e}");
        }
    }
    match result.exit_code() {
        0 => Ok(()),
        1 => Err(Failure::Check(format!("{} of {} checks failed", result.failures, result.cases))),
        _ => Err(Failure::Input(format!("{} job(s) could not run", result.errors))),
    }
}

fn cmd_random(cli: &Cli, cmd: &RandomCommand) -> CliResult {
    let RandomCommand::Params { d, length, terminal } = cmd;
    let seed = cli.seed.ok_or_else(|| Failure::Input("random parameters need --seed".into()))?;
    if *d == 0 {
        return Err(Failure::Input("d must be at least 1".into()));
    }
    let p: Params = random_parameters(&mut seeded_rng(seed), *d, *length, *terminal);
    emit(&cli.out, &io::params_to_json(&p))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Cmv(c) => cmd_cmv(&cli, c),
        Command::Schur(c) => cmd_schur(&cli, c),
        Command::Walk(c) => cmd_walk(&cli, c),
        Command::Overlap(c) => cmd_overlap(&cli, c),
        Command::Verify(a) => cmd_verify(&cli, a),
        Command::Campaign(c) => cmd_campaign(&cli, c),
        Command::Random(c) => cmd_random(&cli, c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
