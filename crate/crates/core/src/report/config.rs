//! Run configuration: a sectioned TOML file whose keys the CLI flags mirror.
//!
//! ```toml
//! [problem]
//! p = 3.0
//! q = 1.5
//! r = 0.3333333333333333
//! lambda = 10.0
//!
//! [window]
//! du_min = 0.0
//! du_max = 5.0
//! dv_min = 0.0
//! dv_max = 1.0
//!
//! [grid]
//! coarse = 0.1
//! dense = 0.005
//!
//! [sweep]
//! lambda_from = 1.0
//! lambda_to = 50.0
//! lambda_step = 0.5
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::continuation::SweepConfig;
use crate::error::{Error, Result};
use crate::ode::{ProblemParams, Tolerance};
use crate::shooting::{
    PolishSettings, ScanWindow, SolveSettings, Spacing, DEFAULT_EPS, DEFAULT_MAX_MEETING_K,
    DEFAULT_MEETING_K,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemSection {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    /// Required by single-lambda commands (flag or file); sweeps ignore it.
    pub lambda: Option<f64>,
}

impl Default for ProblemSection {
    fn default() -> Self {
        let reference = ProblemParams::reference(10.0);
        ProblemSection {
            p: reference.p,
            q: reference.q,
            r: reference.r,
            lambda: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindowSection {
    pub du_min: f64,
    pub du_max: f64,
    pub dv_min: f64,
    pub dv_max: f64,
}

impl Default for WindowSection {
    fn default() -> Self {
        WindowSection {
            du_min: 0.0,
            du_max: 5.0,
            dv_min: 0.0,
            dv_max: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub coarse: f64,
    pub dense: f64,
    pub meeting_k: usize,
    pub max_meeting_k: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection {
            coarse: 0.1,
            dense: 0.005,
            meeting_k: DEFAULT_MEETING_K,
            max_meeting_k: DEFAULT_MAX_MEETING_K,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolishSection {
    pub eps: f64,
    pub max_iter: usize,
}

impl Default for PolishSection {
    fn default() -> Self {
        PolishSection {
            eps: DEFAULT_EPS,
            max_iter: PolishSettings::default().max_iter,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IvpSection {
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for IvpSection {
    fn default() -> Self {
        let tol = Tolerance::default();
        IvpSection {
            rel_tol: tol.rel,
            abs_tol: tol.abs,
        }
    }
}

/// Windows are written as [du_min, du_max, dv_min, dv_max].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub lambda_from: f64,
    pub lambda_to: f64,
    pub lambda_step: f64,
    pub seed_lambda: f64,
    pub lower_window: [f64; 4],
    pub upper_window: [f64; 4],
    pub inflation: f64,
    pub min_half_width: f64,
    pub cells: usize,
    pub dense_factor: usize,
    pub expansions: usize,
    pub fallback_window: [f64; 4],
    pub bisection_steps: usize,
}

fn corners(w: &ScanWindow) -> [f64; 4] {
    [w.du_min, w.du_max, w.dv_min, w.dv_max]
}

impl Default for SweepSection {
    fn default() -> Self {
        let d = SweepConfig::default();
        SweepSection {
            lambda_from: d.lambda_start,
            lambda_to: d.lambda_end,
            lambda_step: d.lambda_step,
            seed_lambda: d.seed_lambda,
            lower_window: corners(&d.lower_window),
            upper_window: corners(&d.upper_window),
            inflation: d.inflation,
            min_half_width: d.min_half_width,
            cells: d.cells,
            dense_factor: d.dense_factor,
            expansions: d.expansions,
            fallback_window: corners(&d.fallback),
            bisection_steps: d.bisection_steps,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub emit_grids: bool,
    pub emit_profiles: bool,
    pub emit_bifurcation: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: PathBuf::from("out"),
            emit_grids: false,
            emit_profiles: false,
            emit_bifurcation: true,
        }
    }
}

/// Every setting of a run. An empty file gives [`RunConfig::default`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemSection,
    pub window: WindowSection,
    pub grid: GridSection,
    pub polish: PolishSection,
    pub ivp: IvpSection,
    pub sweep: Option<SweepSection>,
    pub output: OutputSection,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("invalid config: {e}")))?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Serde(e.to_string()))
    }

    /// Reads a config file, or the defaults when `path` is `None`. The result
    /// is not validated yet, so flags can still override it.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(RunConfig::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                Self::from_toml(&text)
            }
        }
    }

    /// Checks cross-key invariants, naming the keys involved.
    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        if !(g.dense > 0.0) {
            return Err(Error::Config(format!(
                "grid.dense must be > 0, got grid.dense = {}",
                g.dense
            )));
        }
        if !(g.coarse > g.dense) {
            return Err(Error::Config(format!(
                "grid.coarse must exceed grid.dense, got grid.coarse = {} and grid.dense = {}",
                g.coarse, g.dense
            )));
        }
        if g.meeting_k < 2 || g.max_meeting_k < g.meeting_k {
            return Err(Error::Config(format!(
                "need 2 <= grid.meeting_k <= grid.max_meeting_k, got grid.meeting_k = {} and grid.max_meeting_k = {}",
                g.meeting_k, g.max_meeting_k
            )));
        }
        self.tolerance()?;
        if !(self.polish.eps > 10.0 * self.ivp.abs_tol) {
            return Err(Error::Config(format!(
                "polish.eps must exceed 10 x ivp.abs_tol, got polish.eps = {} and ivp.abs_tol = {}",
                self.polish.eps, self.ivp.abs_tol
            )));
        }
        if self.polish.max_iter == 0 {
            return Err(Error::Config("polish.max_iter must be positive".into()));
        }
        ProblemParams {
            lambda: self.problem.lambda.unwrap_or(0.0),
            p: self.problem.p,
            q: self.problem.q,
            r: self.problem.r,
        }
        .validate()
        .map_err(|e| Error::Config(format!("problem: {e}")))?;
        self.scan_window()?;
        if self.sweep.is_some() {
            self.sweep_config()?.validate()?;
        }
        Ok(())
    }

    /// Problem parameters at `lambda`, or at `problem.lambda` when `None`.
    pub fn params(&self, lambda: Option<f64>) -> Result<ProblemParams> {
        let lambda = lambda.or(self.problem.lambda).ok_or_else(|| {
            Error::Config("problem.lambda is required for this command".into())
        })?;
        ProblemParams::new(lambda, self.problem.p, self.problem.q, self.problem.r)
    }

    pub fn tolerance(&self) -> Result<Tolerance> {
        Tolerance::new(self.ivp.rel_tol, self.ivp.abs_tol)
            .map_err(|e| Error::Config(format!("ivp.rel_tol / ivp.abs_tol: {e}")))
    }

    /// The [window] rectangle at the coarse spacing.
    pub fn scan_window(&self) -> Result<ScanWindow> {
        let w = &self.window;
        ScanWindow::new(w.du_min, w.du_max, w.dv_min, w.dv_max, self.grid.coarse)
            .map_err(|e| Error::Config(format!("window: {e}")))
    }

    pub fn dense_spacing(&self) -> Spacing {
        Spacing::uniform(self.grid.dense)
    }

    pub fn solve_settings(&self) -> Result<SolveSettings> {
        Ok(SolveSettings {
            meeting_k: self.grid.meeting_k,
            max_meeting_k: self.grid.max_meeting_k,
            polish: PolishSettings {
                eps: self.polish.eps,
                max_iter: self.polish.max_iter,
                tol: self.tolerance()?,
                ..PolishSettings::default()
            },
            ..SolveSettings::default()
        })
    }

    /// The [sweep] section (defaults when absent) as a [`SweepConfig`], with
    /// the seed windows at the coarse spacing and the fallback window too.
    pub fn sweep_config(&self) -> Result<SweepConfig> {
        let s = self.sweep.clone().unwrap_or_default();
        let window = |name: &str, c: [f64; 4]| {
            ScanWindow::new(c[0], c[1], c[2], c[3], self.grid.coarse)
                .map_err(|e| Error::Config(format!("sweep.{name}: {e}")))
        };
        Ok(SweepConfig {
            lambda_start: s.lambda_from,
            lambda_end: s.lambda_to,
            lambda_step: s.lambda_step,
            seed_lambda: s.seed_lambda,
            lower_window: window("lower_window", s.lower_window)?,
            upper_window: window("upper_window", s.upper_window)?,
            seed_dense: self.dense_spacing(),
            inflation: s.inflation,
            min_half_width: s.min_half_width,
            cells: s.cells,
            dense_factor: s.dense_factor,
            expansions: s.expansions,
            fallback: window("fallback_window", s.fallback_window)?,
            bisection_steps: s.bisection_steps,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_the_default() {
        let cfg = RunConfig::from_toml("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        cfg.validate().unwrap();
        assert_eq!(cfg.grid.coarse, 0.1);
        assert_eq!(cfg.grid.dense, 0.005);
        assert_eq!(cfg.problem.p, 3.0);
        assert_eq!(cfg.problem.r, 1.0 / 3.0);
    }

    #[test]
    fn round_trip_through_toml() {
        let mut cfg = RunConfig::default();
        cfg.sweep = Some(SweepSection {
            lambda_from: 40.0,
            lambda_to: 52.0,
            ..SweepSection::default()
        });
        cfg.problem.lambda = None;
        cfg.output.emit_grids = true;
        let text = cfg.to_toml().unwrap();
        assert_eq!(RunConfig::from_toml(&text).unwrap(), cfg);
    }

    #[test]
    fn eps_must_dominate_ivp_tolerance() {
        let mut cfg = RunConfig::default();
        cfg.polish.eps = 1e-10;
        let msg = cfg.validate().unwrap_err().to_string();
        assert!(msg.contains("polish.eps") && msg.contains("ivp.abs_tol"), "{msg}");
    }

    #[test]
    fn coarse_must_exceed_dense() {
        let cfg = RunConfig::from_toml("[grid]\ncoarse = 0.01\ndense = 0.05\n").unwrap();
        let msg = cfg.validate().unwrap_err().to_string();
        assert!(msg.contains("grid.coarse = 0.01") && msg.contains("grid.dense = 0.05"), "{msg}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_toml("[grid]\ncoarce = 0.1\n").is_err());
    }

    #[test]
    fn missing_lambda_is_reported() {
        let cfg = RunConfig::from_toml("[problem]\np = 3.0\n").unwrap();
        assert!(cfg.params(None).is_err());
        assert_eq!(cfg.params(Some(2.0)).unwrap().lambda, 2.0);
    }
}
