use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use kness_core::classify::{classify_orbit, infimum_candidates};
use kness_core::kfun::{critical_residual_with, k_functional_with, ness_residual_with};
use kness_core::optimize::{char_poly_drift, minimize_over_orbit_with, OptimizerConfig};
use kness_core::partition::{
    c_constant, dominance_compare, lambda_sequence, parity_class, rational_to_f64, successor_pair_dual,
    successor_pair_split,
};
use kness_core::spectral::{degeneration_witness, spectral_profile};
use kness_core::suite::{constants_table, fixtures, run_criterion, SuiteConfig, CRITERIA};
use kness_core::{Execution, Partition, Tolerances};
use kness_cli::{parse_matrix, Report, RunManifest};
use serde::Serialize;
use serde_json::json;

const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Parser)]
#[command(name = "kness", version, about = "Generalized Ness functional on adjoint orbits")]
struct Cli {
    #[command(flatten)]
    tol: TolArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct TolArgs {
    #[arg(long, global = true)]
    tol_trace: Option<f64>,
    #[arg(long, global = true)]
    tol_z: Option<f64>,
    #[arg(long, global = true)]
    tol_w: Option<f64>,
    #[arg(long, global = true)]
    tol_cluster: Option<f64>,
    #[arg(long, global = true)]
    tol_cluster_max: Option<f64>,
    #[arg(long, global = true)]
    tol_rank: Option<f64>,
    #[arg(long, global = true)]
    tol_uni_real: Option<f64>,
    #[arg(long, global = true)]
    tol_lambda_round: Option<f64>,
    #[arg(long, global = true)]
    tol_ness: Option<f64>,
}

impl TolArgs {
    fn resolve(&self) -> Tolerances {
        let d = Tolerances::default();
        Tolerances {
            trace: self.tol_trace.unwrap_or(d.trace),
            z: self.tol_z.unwrap_or(d.z),
            w: self.tol_w.unwrap_or(d.w),
            cluster: self.tol_cluster.unwrap_or(d.cluster),
            cluster_max: self.tol_cluster_max.unwrap_or(d.cluster_max),
            rank: self.tol_rank.unwrap_or(d.rank),
            uni_real: self.tol_uni_real.unwrap_or(d.uni_real),
            lambda_round: self.tol_lambda_round.unwrap_or(d.lambda_round),
            ness: self.tol_ness.unwrap_or(d.ness),
        }
    }
}

#[derive(Args)]
struct OptArgs {
    #[arg(long, default_value_t = 5000)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-9)]
    grad_tol: f64,
    #[arg(long, default_value_t = 1e-2)]
    step_init: f64,
    #[arg(long, default_value_t = 0.5)]
    backtrack_factor: f64,
    #[arg(long, default_value_t = 5)]
    restarts: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = 1e-8)]
    z_floor: f64,
    #[arg(long, default_value_t = 1.0)]
    sample_spread: f64,
    /// Run restarts one after another.
    #[arg(long)]
    sequential: bool,
}

impl OptArgs {
    fn config(&self) -> OptimizerConfig {
        OptimizerConfig {
            max_iters: self.max_iters,
            grad_tol: self.grad_tol,
            step_init: self.step_init,
            backtrack_factor: self.backtrack_factor,
            restarts: self.restarts,
            seed: self.seed,
            z_floor: self.z_floor,
            sample_spread: self.sample_spread,
            execution: execution(self.sequential),
        }
    }
}

fn execution(sequential: bool) -> Execution {
    if sequential {
        Execution::Sequential
    } else {
        Execution::default()
    }
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate K, K0 and Z/W membership.
    K { matrix: String },
    /// Orbit case, infimum and the candidate limits.
    Classify { matrix: String },
    /// Descend K over the orbit and report the best point.
    Minimize {
        matrix: String,
        #[command(flatten)]
        opt: OptArgs,
        /// Keep every N-th trajectory entry (plus the last).
        #[arg(long, default_value_t = 1)]
        thin: usize,
    },
    /// Eigenvalue clusters, Jordan structure and invariant partition.
    Spectral { matrix: String },
    /// Constant, parity and Lambda data of a partition such as `3,1,1`.
    Partition {
        parts: String,
        /// Second partition for a dominance comparison.
        #[arg(long)]
        compare: Option<String>,
    },
    /// Criticality and Ness residuals.
    Residual { matrix: String },
    /// Run the reproduction suite and write CSV tables.
    Verify {
        #[arg(long, env = "KNESS_OUT_DIR", default_value = "kness-out")]
        out_dir: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Comma-separated criterion ids; all by default.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
        /// Optimizer iteration budget used by the suite.
        #[arg(long, default_value_t = 5000)]
        max_iters: usize,
        #[arg(long)]
        sequential: bool,
    },
}

fn emit<T: Serialize>(manifest: RunManifest, result: T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(&Report { manifest, result })?);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let tol = cli.tol.resolve();
    let tol_json = serde_json::to_value(tol)?;
    match cli.command {
        Command::K { matrix } => {
            let a = parse_matrix(&matrix, &tol)?;
            let r = k_functional_with(&a, &tol)?;
            emit(RunManifest::new("k", Some(&matrix), json!({ "tol": tol_json }), None), r)?;
        }
        Command::Classify { matrix } => {
            let a = parse_matrix(&matrix, &tol)?;
            let class = classify_orbit(&a, &tol)?;
            let candidates = infimum_candidates(&a, &tol)?;
            let manifest = RunManifest::new("classify", Some(&matrix), json!({ "tol": tol_json }), None);
            emit(manifest, json!({ "classification": class, "candidates": candidates }))?;
        }
        Command::Minimize { matrix, opt, thin } => {
            let a = parse_matrix(&matrix, &tol)?;
            let cfg = opt.config();
            let report = minimize_over_orbit_with(&a, &cfg, &tol)?;
            let drift = char_poly_drift(&a, &report.best_matrix);
            let manifest = RunManifest::new(
                "minimize",
                Some(&matrix),
                json!({ "optimizer": cfg, "thin": thin, "tol": tol_json }),
                Some(cfg.seed),
            );
            emit(manifest, json!({ "report": report.thinned(thin), "char_poly_drift": drift }))?;
        }
        Command::Spectral { matrix } => {
            let a = parse_matrix(&matrix, &tol)?;
            let profile = spectral_profile(&a, &tol)?;
            let witness = degeneration_witness(&a, &tol).ok().map(|w| w.predicted);
            let manifest = RunManifest::new("spectral", Some(&matrix), json!({ "tol": tol_json }), None);
            emit(
                manifest,
                json!({
                    "profile": profile,
                    "jordan_blocks": profile.jordan_blocks(),
                    "jordan_type": profile.jordan_type(),
                    "witness_limit_type": witness,
                }),
            )?;
        }
        Command::Partition { parts, compare } => {
            let p: Partition = parts.parse()?;
            let c = c_constant(&p).ok();
            let mut result = json!({
                "partition": p,
                "c_exact": c.map(|c| c.to_string()),
                "c": c.map(rational_to_f64),
                "parity": parity_class(&p),
                "lambda_sequence": lambda_sequence(&p).sorted_desc(),
                "successor_pair_split": successor_pair_split(&p),
                "successor_pair_dual": successor_pair_dual(&p),
            });
            if let Some(q) = &compare {
                let q: Partition = q.parse()?;
                result["compare"] = json!({ "other": q, "dominance": dominance_compare(&p, &q)? });
            }
            emit(RunManifest::new("partition", Some(&parts), json!({ "compare": compare }), None), result)?;
        }
        Command::Residual { matrix } => {
            let a = parse_matrix(&matrix, &tol)?;
            let critical = critical_residual_with(&a, &tol).map_err(|e| e.to_string());
            let ness = ness_residual_with(&a, &tol)?;
            let manifest = RunManifest::new("residual", Some(&matrix), json!({ "tol": tol_json }), None);
            let critical = match critical {
                Ok(v) => json!(v),
                Err(e) => json!({ "error": e }),
            };
            emit(manifest, json!({ "critical_residual": critical, "ness": ness }))?;
        }
        Command::Verify { out_dir, seed, only, max_iters, sequential } => {
            return verify(&out_dir, seed, &only, max_iters, execution(sequential), tol);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn verify(out: &Path, seed: u64, only: &[u8], max_iters: usize, exec: Execution, tol: Tolerances) -> Result<ExitCode> {
    let ids: Vec<u8> = if only.is_empty() { CRITERIA.iter().map(|c| c.0).collect() } else { only.to_vec() };
    if let Some(bad) = ids.iter().find(|&&i| !(1..=10).contains(&i)) {
        anyhow::bail!("unknown criterion {bad}");
    }
    let optimizer = OptimizerConfig { seed, max_iters, execution: exec, ..Default::default() };
    let cfg = SuiteConfig { seed, execution: exec, tol, optimizer };
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;

    let outcomes: Vec<_> = ids
        .iter()
        .map(|&id| {
            let o = run_criterion(id, &cfg);
            eprintln!("{}", o.line());
            o
        })
        .collect();
    write_csv(&out.join("constants.csv"), &constants_table())?;
    let rows = fixtures(&cfg).map_err(anyhow::Error::msg)?;
    write_csv(&out.join("fixtures.csv"), &rows)?;
    write_csv(&out.join("criteria.csv"), &outcomes)?;

    let failed: Vec<u8> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id).collect();
    let manifest = RunManifest::new(
        "verify",
        None,
        json!({ "criteria": ids, "suite": cfg, "out_dir": out }),
        Some(seed),
    );
    emit(manifest, json!({ "outcomes": outcomes, "failed": failed }))?;
    if failed.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("failed criteria: {failed:?}");
        Ok(ExitCode::from(1))
    }
}
