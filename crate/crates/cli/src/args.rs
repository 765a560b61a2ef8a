use std::path::PathBuf;

use anyhow::{Context, Result};
use cc_shoot::report::{RunConfig, SweepSection};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "cc-shoot",
    version,
    about = "Shooting solver for the concave-convex Hamiltonian boundary-value problem"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Colour the slope plane at one lambda and write the diagrams.
    Scan(ScanArgs),
    /// Find and polish the roots in a window at one lambda.
    Solve(ScanArgs),
    /// Continue both branches over a lambda range and locate the fold.
    Trace(TraceArgs),
    /// Print the analytical lambda thresholds for the exponents.
    Bounds(BoundsArgs),
    /// Re-check saved solutions, or a single slope pair, and a run manifest.
    Verify(VerifyArgs),
}

/// Flags shared by every command that reads a run configuration. Each one
/// overrides the key of the same name in the config file.
#[derive(Args, Clone, Default)]
pub struct CommonArgs {
    /// TOML configuration file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// problem.p
    #[arg(long)]
    pub p: Option<f64>,
    /// problem.q
    #[arg(long)]
    pub q: Option<f64>,
    /// problem.r
    #[arg(long)]
    pub r: Option<f64>,
    /// grid.coarse
    #[arg(long)]
    pub coarse: Option<f64>,
    /// grid.dense
    #[arg(long)]
    pub dense: Option<f64>,
    /// grid.meeting_k
    #[arg(long)]
    pub meeting_k: Option<usize>,
    /// polish.eps
    #[arg(long)]
    pub eps: Option<f64>,
    /// ivp.rel_tol
    #[arg(long)]
    pub rel_tol: Option<f64>,
    /// ivp.abs_tol
    #[arg(long)]
    pub abs_tol: Option<f64>,
    /// output.dir
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Clone, Default)]
pub struct WindowArgs {
    /// window.du_min
    #[arg(long, allow_negative_numbers = true)]
    pub du_min: Option<f64>,
    /// window.du_max
    #[arg(long, allow_negative_numbers = true)]
    pub du_max: Option<f64>,
    /// window.dv_min
    #[arg(long, allow_negative_numbers = true)]
    pub dv_min: Option<f64>,
    /// window.dv_max
    #[arg(long, allow_negative_numbers = true)]
    pub dv_max: Option<f64>,
}

#[derive(Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub window: WindowArgs,
    /// problem.lambda
    #[arg(long)]
    pub lambda: Option<f64>,
}

#[derive(Args)]
pub struct TraceArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// sweep.lambda_from
    #[arg(long)]
    pub lambda_from: Option<f64>,
    /// sweep.lambda_to
    #[arg(long)]
    pub lambda_to: Option<f64>,
    /// sweep.lambda_step
    #[arg(long)]
    pub lambda_step: Option<f64>,
    /// sweep.seed_lambda
    #[arg(long)]
    pub seed_lambda: Option<f64>,
    /// output.emit_grids
    #[arg(long)]
    pub emit_grids: bool,
    /// output.emit_profiles
    #[arg(long)]
    pub emit_profiles: bool,
}

#[derive(Args)]
pub struct BoundsArgs {
    #[arg(long, default_value_t = 3.0)]
    pub p: f64,
    #[arg(long, default_value_t = 1.5)]
    pub q: f64,
    #[arg(long, default_value_t = 1.0 / 3.0)]
    pub r: f64,
    /// Print JSON instead of key = value lines.
    #[arg(long)]
    pub json: bool,
}

#[derive(Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// solutions.json written by `solve` (default: <out>/solutions.json
    /// unless --du0/--dv0 are given).
    #[arg(long)]
    pub solutions: Option<PathBuf>,
    /// Check a single slope pair instead of a solutions file.
    #[arg(long, requires_all = ["dv0", "lambda"])]
    pub du0: Option<f64>,
    #[arg(long, requires = "du0")]
    pub dv0: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Also check every file hash in <RUN>/manifest.json.
    #[arg(long)]
    pub run: Option<PathBuf>,
}

impl CommonArgs {
    /// Loads the config file (or defaults) and applies the flag overrides.
    pub fn config(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::load(self.config.as_deref())
            .with_context(|| "loading configuration".to_string())?;
        set(&mut cfg.problem.p, self.p);
        set(&mut cfg.problem.q, self.q);
        set(&mut cfg.problem.r, self.r);
        set(&mut cfg.grid.coarse, self.coarse);
        set(&mut cfg.grid.dense, self.dense);
        set(&mut cfg.grid.meeting_k, self.meeting_k);
        if let Some(k) = self.meeting_k {
            cfg.grid.max_meeting_k = cfg.grid.max_meeting_k.max(k);
        }
        set(&mut cfg.polish.eps, self.eps);
        set(&mut cfg.ivp.rel_tol, self.rel_tol);
        set(&mut cfg.ivp.abs_tol, self.abs_tol);
        set(&mut cfg.output.dir, self.out.clone());
        Ok(cfg)
    }
}

impl WindowArgs {
    pub fn apply(&self, cfg: &mut RunConfig) {
        set(&mut cfg.window.du_min, self.du_min);
        set(&mut cfg.window.du_max, self.du_max);
        set(&mut cfg.window.dv_min, self.dv_min);
        set(&mut cfg.window.dv_max, self.dv_max);
    }
}

impl TraceArgs {
    pub fn config(&self) -> Result<RunConfig> {
        let mut cfg = self.common.config()?;
        let mut sweep = cfg.sweep.clone().unwrap_or_else(SweepSection::default);
        set(&mut sweep.lambda_from, self.lambda_from);
        set(&mut sweep.lambda_to, self.lambda_to);
        set(&mut sweep.lambda_step, self.lambda_step);
        set(&mut sweep.seed_lambda, self.seed_lambda);
        cfg.sweep = Some(sweep);
        cfg.output.emit_grids |= self.emit_grids;
        cfg.output.emit_profiles |= self.emit_profiles;
        Ok(cfg)
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}
