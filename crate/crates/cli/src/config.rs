//! Pipeline configuration file (`--config`).
//!
//! Relative paths are resolved against the directory holding the file.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use odmts::design::BendersOptions;
use odmts::model::{DesignParameters, HubPolicy};
use odmts::od::OdConfig;
use odmts::par::Execution;
use odmts::pipeline::EvaluationConfig;
use odmts::scenario::{CostModel, Scenario};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub inputs: Inputs,
    pub output_dir: Option<PathBuf>,
    pub design: DesignParameters,
    pub network: NetworkSection,
    pub solver: SolverSection,
    pub od: OdSection,
    pub evaluation: EvaluationSection,
    pub cost: CostModel,
    #[serde(rename = "scenario")]
    pub scenarios: Vec<Scenario>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Inputs {
    pub locations: Option<PathBuf>,
    /// Without a matrix, travel times come from coordinates.
    pub matrix: Option<PathBuf>,
    pub trips: Option<PathBuf>,
    pub design: Option<PathBuf>,
    pub transactions: Option<PathBuf>,
    pub apc: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkSection {
    pub bus_frequencies: Vec<u32>,
    pub rail_frequencies: Vec<u32>,
    /// Add up to this many bus hubs by passenger activity; 0 keeps the
    /// flagged hubs only.
    pub greedy_hubs: usize,
    pub hub_separation_mi: f64,
}

impl Default for NetworkSection {
    fn default() -> Self {
        NetworkSection {
            bus_frequencies: vec![8, 12, 16],
            rail_frequencies: vec![24],
            greedy_hubs: 0,
            hub_separation_mi: 1.0,
        }
    }
}

impl NetworkSection {
    pub fn hub_policy(&self) -> HubPolicy {
        match self.greedy_hubs {
            0 => HubPolicy::Flagged,
            count => HubPolicy::Greedy {
                count,
                min_separation_mi: self.hub_separation_mi,
            },
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub max_iterations: Option<usize>,
    pub max_nodes: Option<usize>,
    pub gap: Option<f64>,
    pub cut_tolerance: Option<f64>,
    pub sequential: bool,
}

impl SolverSection {
    pub fn execution(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }

    pub fn benders(&self) -> BendersOptions {
        let d = BendersOptions::default();
        BendersOptions {
            max_iterations: self.max_iterations.unwrap_or(d.max_iterations),
            max_nodes: self.max_nodes.unwrap_or(d.max_nodes),
            gap: self.gap.unwrap_or(d.gap),
            cut_tolerance: self.cut_tolerance.unwrap_or(d.cut_tolerance),
            execution: self.execution(),
            ..d
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OdSection {
    pub transfer_window_min: f64,
    pub bucket_min: f64,
    pub seed: u64,
    pub bus_speed_mph: f64,
}

impl Default for OdSection {
    fn default() -> Self {
        let d = OdConfig::default();
        OdSection {
            transfer_window_min: d.transfer_window_s / 60.0,
            bucket_min: d.bucket_s / 60.0,
            seed: d.seed,
            bus_speed_mph: d.bus_speed_mph,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationSection {
    pub bus_seats: u32,
    pub rail_seats: u32,
    pub max_escalations: usize,
    pub baseline_budget: Option<f64>,
    pub dispatch_epoch_s: f64,
    pub synchronized: bool,
}

impl Default for EvaluationSection {
    fn default() -> Self {
        let d = EvaluationConfig::default();
        EvaluationSection {
            bus_seats: d.bus_seats,
            rail_seats: d.rail_seats,
            max_escalations: d.max_escalations,
            baseline_budget: None,
            dispatch_epoch_s: d.sim.dispatch.epoch_s,
            synchronized: false,
        }
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        let mut cfg: PipelineConfig = toml::from_str(&text).with_context(|| format!("{}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &mut Option<PathBuf>| {
            if let Some(q) = p.as_mut() {
                if q.is_relative() {
                    *q = base.join(&*q);
                }
            }
        };
        let i = &mut cfg.inputs;
        for p in [&mut i.locations, &mut i.matrix, &mut i.trips, &mut i.design, &mut i.transactions, &mut i.apc] {
            resolve(p);
        }
        resolve(&mut cfg.output_dir);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.design.validate()?;
        self.cost.validate()?;
        for s in &self.scenarios {
            s.validate()?;
        }
        if self.od.bucket_min <= 0.0 || self.od.transfer_window_min < 0.0 {
            bail!("od bucket must be positive and the transfer window nonnegative");
        }
        Ok(())
    }

    pub fn od_config(&self) -> OdConfig {
        OdConfig {
            transfer_window_s: self.od.transfer_window_min * 60.0,
            bucket_s: self.od.bucket_min * 60.0,
            seed: self.od.seed,
            bus_speed_mph: self.od.bus_speed_mph,
            execution: self.solver.execution(),
            ..OdConfig::default()
        }
    }

    pub fn evaluation_config(&self) -> EvaluationConfig {
        let d = EvaluationConfig::default();
        let e = &self.evaluation;
        let mut sim = d.sim.clone();
        sim.synchronized = e.synchronized;
        sim.dispatch.epoch_s = e.dispatch_epoch_s;
        EvaluationConfig {
            bus_seats: e.bus_seats,
            rail_seats: e.rail_seats,
            max_escalations: e.max_escalations,
            cost: self.cost.clone(),
            baseline_budget: e.baseline_budget,
            benders: self.solver.benders(),
            sim,
            execution: self.solver.execution(),
            ..d
        }
    }

    /// A scenario from the file, or one of the built-in presets.
    pub fn scenario(&self, name: &str) -> Result<Scenario> {
        if let Some(s) = self.scenarios.iter().find(|s| s.name == name) {
            return Ok(s.clone());
        }
        Ok(match name {
            "baseline" => Scenario::baseline(),
            "early-pandemic" => Scenario::early_pandemic(),
            "late-pandemic" => Scenario::late_pandemic(),
            "strict-late-pandemic" => Scenario::strict_late_pandemic(),
            _ => bail!("unknown scenario `{name}`"),
        })
    }
}

/// The flag if given, else the configured path.
pub fn pick(flag: &Option<PathBuf>, configured: &Option<PathBuf>, what: &str) -> Result<PathBuf> {
    flag.clone()
        .or_else(|| configured.clone())
        .with_context(|| format!("no {what} given; pass --{what} or set inputs.{what} in the config"))
}
