//! Single-file JSON run configuration.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::compressible::SolverOptions;
use crate::error::{Error, Result};
use crate::harness::{DataSpec, EtaRule, NuRule, SweepMode, SweepPlan};
use crate::model::SimParams;

fn default_t_final() -> f64 {
    0.5
}

fn default_eps_list() -> Vec<f64> {
    vec![0.2, 0.1, 0.05, 0.025]
}

fn default_k_fraction() -> f64 {
    0.25
}

fn default_samples() -> usize {
    10
}

fn default_theta() -> f64 {
    0.9
}

fn default_decay_samples() -> usize {
    64
}

fn default_eta() -> EtaRule {
    EtaRule::Fixed(0.1)
}

/// Sweep settings; data, seed, solver and horizon come from the enclosing config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default = "default_eps_list")]
    pub eps_list: Vec<f64>,
    /// Defaults to `fixed(0.05)` for weak-weak and `equals_eps` for weak-strong.
    #[serde(default)]
    pub nu_rule: Option<NuRule>,
    #[serde(default = "default_eta")]
    pub eta_rule: EtaRule,
    #[serde(default = "default_k_fraction")]
    pub k_fraction: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_theta")]
    pub decay_theta: f64,
    #[serde(default = "default_decay_samples")]
    pub decay_samples: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            eps_list: default_eps_list(),
            nu_rule: None,
            eta_rule: default_eta(),
            k_fraction: default_k_fraction(),
            samples: default_samples(),
            decay_theta: default_theta(),
            decay_samples: default_decay_samples(),
        }
    }
}

/// Output location and snapshot cadence (`None` writes only the final state).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub snapshot_every: Option<f64>,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: PathBuf::from("out"),
            snapshot_every: None,
        }
    }
}

/// Tolerances used by the self-checks and sweep verdicts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Relative bound on the energy balance residual.
    pub energy_residual: f64,
    /// Allowed shortfall of the fitted relative-energy slope below alpha.
    pub slope_margin: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            energy_residual: 1e-3,
            slope_margin: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub params: SimParams,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default)]
    pub data: DataSpec,
    #[serde(default = "default_t_final")]
    pub t_final: f64,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            params: SimParams::DEFAULT,
            solver: SolverOptions::default(),
            data: DataSpec::default(),
            t_final: default_t_final(),
            sweep: SweepSection::default(),
            output: OutputSection::default(),
            seed: 0,
            tolerances: Tolerances::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.solver.validate()?;
        self.data.validate(self.params.grid.box_len)?;
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::param("t_final", "must be positive"));
        }
        if let Some(dt) = self.output.snapshot_every {
            if !(dt > 0.0) {
                return Err(Error::param("output.snapshot_every", "must be positive"));
            }
        }
        if !(self.tolerances.energy_residual > 0.0 && self.tolerances.slope_margin >= 0.0) {
            return Err(Error::param("tolerances", "must be positive"));
        }
        Ok(())
    }

    pub fn sweep_plan(&self, mode: SweepMode) -> Result<SweepPlan> {
        let mut plan = SweepPlan::new(mode, self.sweep.eps_list.clone());
        if let Some(rule) = self.sweep.nu_rule {
            plan.nu_rule = rule;
        }
        plan.eta_rule = self.sweep.eta_rule;
        plan.t_final = self.t_final;
        plan.data = self.data;
        plan.k_fraction = self.sweep.k_fraction;
        plan.samples = self.sweep.samples;
        plan.decay_theta = self.sweep.decay_theta;
        plan.decay_samples = self.sweep.decay_samples;
        plan.slope_margin = self.tolerances.slope_margin;
        plan.seed = self.seed;
        plan.solver = self.solver;
        plan.validate(&self.params)?;
        Ok(plan)
    }

    /// Canonical pretty-printed JSON with every default filled in.
    pub fn to_normalized(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }
}

/// Parses and validates a config; syntax errors carry line and column.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = serde_json::from_str(text).map_err(|e| {
        // Validation failures raised inside `try_from` surface as data errors
        // whose message is our own parameter error.
        match e.classify() {
            serde_json::error::Category::Data => Error::Parameter {
                field: "config".into(),
                reason: format!("{e}"),
            },
            _ => Error::ConfigSyntax {
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            },
        }
    })?;
    cfg.validate()?;
    Ok(cfg)
}
