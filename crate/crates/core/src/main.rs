use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use multidueling::bounds::{
    complexity_d, complexity_h, confidence_horizon, multirucb_bound,
    multisbm_feedback_leading_bound, t_hat_bound,
};
use multidueling::environment::load_matrix;
use multidueling::harness::{resolve_out_dir, run_experiment, write_results, ExperimentConfig};
use multidueling::policies::PolicyKind;
use multidueling::sbm::{recommended_alpha, DEFAULT_ALPHA};
use multidueling::{ArmId, Error, LinkFunction, PreferenceMatrix, Result};

#[derive(Parser)]
#[command(
    name = "multidueling",
    version,
    about = "Multi-dueling bandit simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a TOML config file.
    Simulate {
        config: PathBuf,
        /// Output directory (default: $MULTIDUEL_OUT_DIR, else ./results).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads for independent runs (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Print regret-bound quantities for an instance.
    Bound {
        #[arg(long)]
        policy: String,
        /// `synthetic:K[:link]` or `matrix:PATH`.
        #[arg(long)]
        instance: String,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        horizon: u64,
        /// 1-based declared best arm for matrix instances.
        #[arg(long)]
        best: Option<usize>,
        /// Also print C(delta) and the hypothesis-time bound for this delta.
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Check a preference-matrix file and report its best arm.
    Validate {
        matrix: PathBuf,
        /// 1-based declared best arm, used only without a Condorcet winner.
        #[arg(long)]
        best: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Validation(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Simulate {
            config,
            out,
            threads,
        } => simulate(config, out, threads),
        Command::Bound {
            policy,
            instance,
            alpha,
            m,
            horizon,
            best,
            delta,
        } => bound(&policy, &instance, alpha, m, horizon, best, delta),
        Command::Validate { matrix, best } => validate(matrix, best),
    }
}

fn simulate(config: PathBuf, out: Option<PathBuf>, threads: Option<usize>) -> Result<()> {
    let cfg = ExperimentConfig::load(&config)?;
    for w in &cfg.warnings {
        eprintln!("warning: {w}");
    }
    let dir = resolve_out_dir(out);
    let outcome = run_experiment(&cfg, threads)?;
    for w in &outcome.report.warnings {
        eprintln!("warning: {w}");
    }
    let paths = write_results(&dir, &cfg, &outcome)?;
    let last = outcome.report.mean.len() - 1;
    println!(
        "{} runs of {} over T = {}: mean regret {:.4} (variance {:.4})",
        cfg.runs,
        outcome.policy,
        cfg.horizon,
        outcome.report.mean[last],
        outcome.report.variance[last],
    );
    println!("wrote {}", paths.traces.display());
    println!("wrote {}", paths.summary.display());
    println!("wrote {}", paths.metadata.display());
    Ok(())
}

fn parse_instance(spec: &str, best: Option<usize>) -> Result<PreferenceMatrix> {
    let best = best.map(ArmId::from_one_based).transpose()?;
    if let Some(rest) = spec.strip_prefix("synthetic:") {
        let mut parts = rest.split(':');
        let k = parts
            .next()
            .and_then(|k| k.parse().ok())
            .ok_or_else(|| Error::Config(format!("bad arm count in {spec:?}")))?;
        let link = match parts.next() {
            Some(l) => l.parse::<LinkFunction>()?,
            None => LinkFunction::Linear,
        };
        PreferenceMatrix::synthetic(k, link)
    } else if let Some(path) = spec.strip_prefix("matrix:") {
        load_matrix(path, best)
    } else {
        Err(Error::Config(format!(
            "instance {spec:?}: expected synthetic:K[:link] or matrix:PATH"
        )))
    }
}

fn bound(
    policy: &str,
    instance: &str,
    alpha: Option<f64>,
    m: Option<usize>,
    horizon: u64,
    best: Option<usize>,
    delta: Option<f64>,
) -> Result<()> {
    let kind: PolicyKind = policy.parse()?;
    let pm = parse_instance(instance, best)?;
    let gaps = pm.gaps();
    let k = pm.k();
    let t = horizon as f64;
    println!("K = {k}, best = {}, T = {horizon}", pm.best_arm());
    println!("H = {:.6}", complexity_h(&gaps)?);
    println!("delta_max = {:.6}", gaps.delta_max());
    match kind {
        PolicyKind::MultiRucb => {
            let alpha = alpha.unwrap_or(1.01);
            let m = m.ok_or_else(|| Error::Config("multirucb bound needs --m".into()))?;
            let d = complexity_d(&gaps, alpha, m)?;
            println!("D = {d:.6}");
            println!("C_m^2 = {}", m * (m - 1) / 2);
            println!(
                "multirucb_bound = {:.6}",
                multirucb_bound(&gaps, alpha, m, t)?
            );
            if let Some(delta) = delta {
                let c = confidence_horizon(delta, alpha, k)?;
                println!("C(delta) = {c:.6}");
                match t_hat_bound(c, d) {
                    Ok(v) => println!("t_hat_bound = {v:.6}"),
                    Err(e) => println!("t_hat_bound unavailable: {e}"),
                }
            }
        }
        PolicyKind::MultiSbm | PolicyKind::MultiSbmFeedback => {
            let alpha = match alpha {
                Some(a) => a,
                None if horizon >= 16 => recommended_alpha(k, horizon)?,
                None => DEFAULT_ALPHA,
            };
            println!("alpha = {alpha:.6}");
            println!(
                "multisbm_feedback_leading_bound = {:.6} (explicit terms only)",
                multisbm_feedback_leading_bound(&gaps, alpha, t)?
            );
        }
        PolicyKind::DoublerBai | PolicyKind::UniformRandom => {
            println!("no closed-form bound evaluated for {kind}");
        }
    }
    Ok(())
}

fn validate(path: PathBuf, best: Option<usize>) -> Result<()> {
    let best = best.map(ArmId::from_one_based).transpose()?;
    let pm = load_matrix(&path, best)?;
    let b = pm.best_arm();
    let condorcet = (0..pm.k()).all(|j| j == b.0 || pm.p(b, ArmId(j)) > 0.5);
    println!("valid {k}x{k} preference matrix", k = pm.k());
    if condorcet {
        println!("Condorcet winner: {b}");
    } else {
        println!("no Condorcet winner; declared best: {b}");
    }
    println!("delta_max = {:.6}", pm.gaps().delta_max());
    Ok(())
}
