//! Scenario-driven runs: config parsing, task dispatch and report files.
//!
//! A run writes into its output directory:
//!
//! * `summary.json`: schema-versioned, deterministic for a fixed config and
//!   seed (no timings), stamped with the convention hash;
//! * `timings.json`: wall-clock seconds per phase;
//! * the task CSVs listed in the README.

mod config;
mod spec;
mod tasks;
mod validate;

use std::path::{Path, PathBuf};

use serde::Serialize;

pub use config::{Config, Entry, Section};
pub use spec::{
    ChartKindSpec, ChartSpec, ConformalSpec, ImmersionSpec, KernelChoice, OperatorChoice, PerturbationSpec, Scenario,
    Task, TaskParams, TermSpec,
};
pub use tasks::{fubini_study_moment_fields, run, Certificate, Outcome};
pub use validate::{validate, Check, MODULES};

use crate::conventions::convention_hash;
use crate::error::{GeomError, Result};

pub const SCHEMA: &str = "trgeom.summary";
pub const SCHEMA_VERSION: u32 = 1;

/// Scenarios shipped with the binary, by name.
pub const BUNDLED: [(&str, &str); 4] = [
    ("clifford_maslov", include_str!("../../scenarios/clifford_maslov.toml")),
    ("hyperbolic_persistence", include_str!("../../scenarios/hyperbolic_persistence.toml")),
    ("core_geodesic_spectrum", include_str!("../../scenarios/core_geodesic_spectrum.toml")),
    ("clifford_moser", include_str!("../../scenarios/clifford_moser.toml")),
];

pub fn bundled(name: &str) -> Option<Scenario> {
    let (_, text) = BUNDLED.iter().find(|(n, _)| *n == name)?;
    Some(Scenario::parse(text, Path::new(".")).expect("bundled scenarios parse"))
}

/// A bundled scenario name or a path to a config file.
pub fn resolve(spec: &str) -> Result<Scenario> {
    match bundled(spec) {
        Some(s) => Ok(s),
        None => Scenario::load(Path::new(spec)),
    }
}

/// Command-line overrides applied on top of a scenario.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub resolution: Option<usize>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub experimental_nd: bool,
}

impl Scenario {
    pub fn apply(&mut self, o: &Overrides) {
        if let Some(n) = o.resolution {
            self.immersion.with_resolution(n);
        }
        if let Some(t) = o.tol {
            self.params.with_tol(t);
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(out) = &o.out {
            self.out = Some(out.clone());
        }
        if o.experimental_nd {
            if let TaskParams::Persist { experimental_nd, .. } = &mut self.params {
                *experimental_nd = true;
            }
        }
    }
}

#[derive(Serialize)]
struct Summary<'a> {
    schema: &'static str,
    schema_version: u32,
    convention_hash: String,
    trgeom_version: &'static str,
    task: Task,
    scenario: &'a Scenario,
    pass: bool,
    certificates: &'a [Certificate],
    results: &'a serde_json::Value,
}

pub fn summary_json(scenario: &Scenario, outcome: &Outcome) -> String {
    let summary = Summary {
        schema: SCHEMA,
        schema_version: SCHEMA_VERSION,
        convention_hash: convention_hash(),
        trgeom_version: env!("CARGO_PKG_VERSION"),
        task: scenario.task(),
        scenario,
        pass: outcome.pass(),
        certificates: &outcome.certificates,
        results: &outcome.results,
    };
    serde_json::to_string_pretty(&summary).expect("summary serialises") + "\n"
}

#[derive(Serialize)]
struct Timing<'a> {
    phase: &'a str,
    seconds: f64,
}

/// Write `summary.json`, `timings.json` and the task CSVs into `dir`.
pub fn write_report(dir: &Path, scenario: &Scenario, outcome: &Outcome) -> Result<()> {
    let io = |e: std::io::Error| GeomError::Io(format!("{}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    std::fs::write(dir.join("summary.json"), summary_json(scenario, outcome)).map_err(io)?;
    let timings: Vec<Timing> = outcome.timings.iter().map(|(p, s)| Timing { phase: p, seconds: *s }).collect();
    let timings = serde_json::to_string_pretty(&timings).expect("timings serialise") + "\n";
    std::fs::write(dir.join("timings.json"), timings).map_err(io)?;
    for (name, body) in &outcome.files {
        std::fs::write(dir.join(name), body).map_err(io)?;
    }
    Ok(())
}
