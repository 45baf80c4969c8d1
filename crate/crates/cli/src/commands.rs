use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use endlab_core::bounds::{bennett_bound, bernstein_bound, fuk_nagaev_general};
use endlab_core::dependence::{certify_end_row, parse_joint_tables, CertMode};
use endlab_core::norming::{check_lemma3_conditions, check_theorem1_conditions};
use endlab_core::numeric::fmt_num;
use endlab_core::simulate::{preset, run_plan, CheckTarget};
use endlab_core::{BoundInputs, FukNagaevInputs};

use crate::config::RunConfig;

#[derive(Debug, Parser)]
#[command(
    name = "endlab",
    version,
    about = "Tail bounds, END certification, condition checks and Monte Carlo runs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate one tail bound.
    Bound(BoundArgs),
    /// Certify END constants of joint tables.
    Certify(CertifyArgs),
    /// Check norming conditions for a model and scheme.
    Check(CheckArgs),
    /// Run a Monte Carlo experiment and write CSV files.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Bennett,
    Bernstein,
    FukNagaev,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct BoundArgs {
    #[arg(long, value_enum)]
    pub kind: Kind,
    #[arg(long)]
    pub eps: f64,
    /// Almost-sure bound on the summands (bennett, bernstein).
    #[arg(long, required_if_eq_any([("kind", "bennett"), ("kind", "bernstein")]))]
    pub a: Option<f64>,
    /// Second-moment sum; for fuk-nagaev, the sum of p-th absolute moments.
    #[arg(long)]
    pub s: f64,
    #[arg(long, default_value_t = 1.0)]
    pub m: f64,
    #[arg(long, required_if_eq("kind", "fuk-nagaev"))]
    pub lambda: Option<f64>,
    #[arg(long, required_if_eq("kind", "fuk-nagaev"))]
    pub p: Option<f64>,
    /// `sum_k P{|X_k| > eps / lambda}` (fuk-nagaev only).
    #[arg(long)]
    pub tail_sum: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Uend,
    Lend,
    End,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[arg(long)]
    pub joint: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::End)]
    pub mode: Mode,
}

#[derive(Debug, Args)]
#[group(id = "source", required = true, multiple = false, args = ["config", "preset"])]
pub struct Source {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// `corollary1-p<p>` or `theorem2-p<p>`.
    #[arg(long)]
    pub preset: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Theorem {
    #[value(name = "1")]
    One,
    Lemma3,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub source: Source,
    /// Overrides the config's target.
    #[arg(long, value_enum)]
    pub theorem: Option<Theorem>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub source: Source,
    /// Output directory; defaults to the config's [output] dir.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub replications: Option<usize>,
}

fn load(source: &Source, seed: Option<u64>) -> Result<RunConfig> {
    let mut rc = match (&source.config, &source.preset) {
        (Some(path), _) => RunConfig::load(path)?,
        (None, Some(name)) => RunConfig::from_preset(preset(name, seed.unwrap_or(0))?),
        (None, None) => unreachable!("clap enforces one source"),
    };
    if let Some(s) = seed {
        rc.preset.plan.seed = s;
    }
    Ok(rc)
}

pub fn bound(args: &BoundArgs) -> Result<i32> {
    let (name, result) = match args.kind {
        Kind::Bennett | Kind::Bernstein => {
            if args.lambda.is_some() || args.p.is_some() || args.tail_sum.is_some() {
                bail!("--lambda, --p and --tail-sum apply to fuk-nagaev only");
            }
            let inputs = BoundInputs::new(args.eps, args.a.unwrap(), args.s, args.m);
            if args.kind == Kind::Bennett {
                ("bennett", bennett_bound(&inputs)?)
            } else {
                ("bernstein", bernstein_bound(&inputs)?)
            }
        }
        Kind::FukNagaev => {
            if args.a.is_some() {
                bail!("--a does not apply to fuk-nagaev");
            }
            let lambda = args.lambda.unwrap();
            let inputs = FukNagaevInputs {
                epsilon: args.eps,
                lambda,
                p: args.p.unwrap(),
                m: args.m,
                abs_moment_sum: args.s,
                marginal_tails: Vec::new(),
            };
            let mut r = fuk_nagaev_general(&inputs, args.eps / lambda)?;
            let tail_sum = args.tail_sum.unwrap_or(0.0);
            if !(tail_sum >= 0.0 && tail_sum.is_finite()) {
                bail!("--tail-sum must be finite and >= 0, got {tail_sum}");
            }
            if tail_sum > 0.0 {
                r.bound += tail_sum;
                r.log_bound = r.bound.ln();
            }
            ("fuk-nagaev", r)
        }
    };
    println!("kind,eps,bound,log_bound");
    println!(
        "{name},{},{},{}",
        fmt_num(args.eps),
        fmt_num(result.bound),
        fmt_num(result.log_bound)
    );
    Ok(0)
}

pub fn certify(args: &CertifyArgs) -> Result<i32> {
    let text = fs::read_to_string(&args.joint).with_context(|| format!("reading {}", args.joint.display()))?;
    let tables = parse_joint_tables(&text)?;
    let mode = match args.mode {
        Mode::Uend => CertMode::Uend,
        Mode::Lend => CertMode::Lend,
        Mode::End => CertMode::End,
    };
    let mut out = String::from("row,m_uend,m_lend,m_end,status\n");
    for (row, table) in &tables {
        let mut cert = certify_end_row(table, mode).with_context(|| format!("row {row}"))?;
        cert.row = *row;
        out.push_str(&cert.to_csv_row());
        out.push('\n');
    }
    print!("{out}");
    Ok(0)
}

pub fn check(args: &CheckArgs) -> Result<i32> {
    let mut rc = load(&args.source, None)?;
    if let Some(t) = args.theorem {
        rc.preset.target = match t {
            Theorem::One => CheckTarget::Theorem1,
            Theorem::Lemma3 => CheckTarget::Lemma3,
        };
    }
    let p = &rc.preset;
    let report = match p.target {
        CheckTarget::Theorem1 => check_theorem1_conditions(&p.plan.model, &p.plan.scheme, &p.dominating, &p.check)?,
        CheckTarget::Lemma3 => check_lemma3_conditions(&p.plan.model, &p.plan.scheme, &p.check)?,
    };
    print!("{}{}", rc.echo()?, report.to_csv());
    Ok(report.exit_code())
}

pub const OUTPUT_FILES: [&str; 3] = ["tails.csv", "trailing.csv", "convergence.csv"];

pub fn simulate(args: &SimulateArgs) -> Result<i32> {
    let mut rc = load(&args.source, args.seed)?;
    if let Some(r) = args.replications {
        rc.preset.plan.replications = r;
    }
    let out: PathBuf = match (&args.out, &rc.out_dir) {
        (Some(o), _) => o.clone(),
        (None, Some(o)) => o.clone(),
        (None, None) => bail!("no output directory: pass --out or set [output] dir"),
    };
    let report = run_plan(&rc.preset.plan)?;
    let header = rc.echo()?;
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let bodies = [report.tails_csv(), report.trailing_csv(), report.convergence_csv()];
    for (name, body) in OUTPUT_FILES.iter().zip(bodies) {
        write(&out.join(name), &format!("{header}{body}"))?;
    }
    for name in OUTPUT_FILES {
        println!("{}", out.join(name).display());
    }
    Ok(0)
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
