//! Scenario descriptions and their construction from config text.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Serialize;

use super::config::{Config, Section};
use crate::error::{GeomError, Result};
use crate::immersion::{circle, clifford_torus, core_geodesic, load_csv, random_torus, GridImmersion, RandomTorusSpec};
use crate::kahler::{ChartPath, DeckTransform, KahlerChart, LogPeriodicConformal, Polynomial};
use crate::{CVec, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Maslov,
    Linearize,
    Moser,
    Persist,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Maslov => "maslov",
            Task::Linearize => "linearize",
            Task::Moser => "moser",
            Task::Persist => "persist",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChartKindSpec {
    Flat,
    FubiniStudy,
    ComplexHyperbolicBall,
    UpperHalfPlane,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChartSpec {
    pub kind: ChartKindSpec,
    pub dim: usize,
    pub c: f64,
    /// Dilation `z ↦ e^ℓ z` of the upper half-plane.
    pub deck_length: Option<f64>,
}

impl ChartSpec {
    pub fn build(&self) -> KahlerChart {
        let chart = match self.kind {
            ChartKindSpec::Flat => KahlerChart::flat(self.dim),
            ChartKindSpec::FubiniStudy => KahlerChart::fubini_study(self.dim, self.c),
            ChartKindSpec::ComplexHyperbolicBall => KahlerChart::complex_hyperbolic_ball(self.dim, self.c),
            ChartKindSpec::UpperHalfPlane => KahlerChart::upper_half_plane(self.c),
        };
        match self.deck_length {
            Some(l) => chart.with_deck(DeckTransform::dilation(l)),
            None => chart,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ImmersionSpec {
    Circle { center: [f64; 2], radius: f64, nodes: usize },
    CliffordTorus { radii: Vec<f64>, nodes: usize },
    CoreGeodesic { nodes: usize },
    RandomTorus { center: Vec<f64>, radii: Vec<f64>, amplitude: f64, modes: i32, seed: u64, nodes: usize },
    Csv { path: PathBuf, twists: Vec<Option<usize>> },
}

impl ImmersionSpec {
    pub fn with_resolution(&mut self, n: usize) {
        match self {
            ImmersionSpec::Circle { nodes, .. }
            | ImmersionSpec::CliffordTorus { nodes, .. }
            | ImmersionSpec::CoreGeodesic { nodes }
            | ImmersionSpec::RandomTorus { nodes, .. } => *nodes = n,
            ImmersionSpec::Csv { .. } => {}
        }
    }

    pub fn build(&self, chart: &ChartSpec) -> Result<GridImmersion> {
        let arc = Arc::new(chart.build());
        match self {
            ImmersionSpec::Circle { center, radius, nodes } => {
                circle(arc, C64::new(center[0], center[1]), *radius, *nodes)
            }
            ImmersionSpec::CliffordTorus { radii, nodes } => clifford_torus(arc, radii, *nodes),
            ImmersionSpec::CoreGeodesic { nodes } => {
                let length = chart
                    .deck_length
                    .ok_or_else(|| GeomError::InvalidImmersion("a core geodesic needs a deck dilation".into()))?;
                core_geodesic(arc, 0, length, *nodes)
            }
            ImmersionSpec::RandomTorus { center, radii, amplitude, modes, seed, nodes } => {
                let spec = RandomTorusSpec {
                    center: complex_vector(center)?,
                    radii: radii.clone(),
                    amplitude: *amplitude,
                    modes: *modes,
                    seed: *seed,
                };
                random_torus(arc, &spec, *nodes)
            }
            ImmersionSpec::Csv { path, twists } => {
                let file = std::fs::File::open(path).map_err(|e| GeomError::Io(format!("{}: {e}", path.display())))?;
                load_csv(file, arc, twists.clone())
            }
        }
    }
}

/// Interleaved `re, im` pairs.
fn complex_vector(v: &[f64]) -> Result<CVec> {
    if !v.len().is_multiple_of(2) {
        return Err(GeomError::InvalidImmersion("complex vectors are given as re, im pairs".into()));
    }
    Ok(CVec::from_iterator(v.len() / 2, v.chunks(2).map(|p| C64::new(p[0], p[1]))))
}

/// `Re(coef · z^α z̄^β)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TermSpec {
    pub coef: [f64; 2],
    pub alpha: Vec<u32>,
    pub beta: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConformalSpec {
    pub amplitude: f64,
    pub mode: f64,
    pub phase: f64,
}

/// The chart path `t ↦ base + t·ε·φ` (or conformal factor `e^{2tεu}`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbationSpec {
    pub epsilon: f64,
    pub terms: Vec<TermSpec>,
    pub conformal: Option<ConformalSpec>,
}

impl PerturbationSpec {
    pub fn path(&self, chart: &ChartSpec) -> Result<ChartPath> {
        let potential = (!self.terms.is_empty()).then(|| {
            self.terms.iter().fold(Polynomial::new(), |p, t| {
                p.with_term(C64::new(t.coef[0], t.coef[1]) * self.epsilon, t.alpha.clone(), t.beta.clone())
            })
        });
        let conformal = match &self.conformal {
            Some(c) => {
                let period = chart.deck_length.ok_or_else(|| {
                    GeomError::Unsupported("conformal perturbations need a deck dilation to be periodic in".into())
                })?;
                Some(LogPeriodicConformal { amplitude: c.amplitude * self.epsilon, period, mode: c.mode, phase: c.phase })
            }
            None => None,
        };
        Ok(ChartPath { base: chart.build(), potential, conformal })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorChoice {
    Ltilde,
    L,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelChoice {
    None,
    /// Moment maps of `SU(n+1)` on a Fubini–Study chart.
    FubiniStudyMoment,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "task", rename_all = "snake_case")]
pub enum TaskParams {
    Maslov {
        /// Bound on `sup |ξ_J|`; `None` skips the criticality certificate.
        critical_tol: Option<f64>,
        oracle_tol: f64,
    },
    Linearize {
        operator: OperatorChoice,
        eigenvalues: usize,
        fields: usize,
        reference_tol: f64,
        dump_matrix: bool,
    },
    Moser {
        mode: crate::isotopy::FormMode,
        steps: usize,
        t_end: f64,
        defect_tol: f64,
        /// Also run at `2·steps` and require this defect ratio.
        refinement_ratio: Option<f64>,
    },
    Persist {
        steps: usize,
        min_step: f64,
        newton_tol: f64,
        certify_tol: f64,
        max_iter: usize,
        base_jacobian: bool,
        round_trip_tol: Option<f64>,
        probe_trials: usize,
        probe_radius: f64,
        kernel: KernelChoice,
        experimental_nd: bool,
    },
}

impl TaskParams {
    pub fn task(&self) -> Task {
        match self {
            TaskParams::Maslov { .. } => Task::Maslov,
            TaskParams::Linearize { .. } => Task::Linearize,
            TaskParams::Moser { .. } => Task::Moser,
            TaskParams::Persist { .. } => Task::Persist,
        }
    }

    /// Replace the headline certificate tolerance.
    pub fn with_tol(&mut self, tol: f64) {
        match self {
            TaskParams::Maslov { critical_tol, .. } => *critical_tol = Some(tol),
            TaskParams::Linearize { reference_tol, .. } => *reference_tol = tol,
            TaskParams::Moser { defect_tol, .. } => *defect_tol = tol,
            TaskParams::Persist { certify_tol, .. } => *certify_tol = tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    pub chart: ChartSpec,
    pub immersion: ImmersionSpec,
    pub perturbation: Option<PerturbationSpec>,
    pub params: TaskParams,
}

impl Scenario {
    pub fn task(&self) -> Task {
        self.params.task()
    }

    /// Parse config text; relative CSV paths resolve against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut config = Config::parse(text)?;
        let mut head = config.require_section("scenario")?;
        let name = head.require("name")?.value;
        let task_entry = head.require("task")?;
        let task = match task_entry.value.as_str() {
            "maslov" => Task::Maslov,
            "linearize" => Task::Linearize,
            "moser" => Task::Moser,
            "persist" => Task::Persist,
            other => return Err(task_entry.error(format!("unknown task `{other}`"))),
        };
        let seed = head.parsed_or("seed", 0_u64)?;
        let out = head.take("out")?.map(|e| PathBuf::from(e.value));
        head.finish()?;

        let chart = chart_spec(config.require_section("chart")?)?;
        let immersion = immersion_spec(config.require_section("immersion")?, &chart, base_dir)?;
        let perturbation = config.take_section("perturbation").map(perturbation_spec).transpose()?;
        let task_section = config.take_section("task").unwrap_or_else(|| {
            Config::parse("[task]").expect("literal").take_section("task").expect("literal")
        });
        let params = task_params(task, task_section)?;
        config.finish()?;
        if matches!(task, Task::Moser | Task::Persist) && perturbation.is_none() {
            return Err(GeomError::Config { line: 0, key: "perturbation".into(), message: "task needs a [perturbation] section".into() });
        }
        Ok(Self { name, seed, out, chart, immersion, perturbation, params })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| GeomError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }
}

fn chart_spec(mut s: Section) -> Result<ChartSpec> {
    let kind_entry = s.require("kind")?;
    let kind = match kind_entry.value.as_str() {
        "flat" => ChartKindSpec::Flat,
        "fubini_study" => ChartKindSpec::FubiniStudy,
        "complex_hyperbolic_ball" => ChartKindSpec::ComplexHyperbolicBall,
        "upper_half_plane" => ChartKindSpec::UpperHalfPlane,
        other => return Err(kind_entry.error(format!("unknown chart `{other}`"))),
    };
    let dim = s.parsed_or("dim", 1_usize)?;
    let c = s.parsed_or("c", 1.0)?;
    let deck_length = s.parsed("deck_length")?;
    if kind == ChartKindSpec::UpperHalfPlane && dim != 1 {
        return Err(GeomError::Config { line: s.line, key: "dim".into(), message: "the upper half-plane has dim = 1".into() });
    }
    if deck_length.is_some() && kind != ChartKindSpec::UpperHalfPlane {
        return Err(GeomError::Config { line: s.line, key: "deck_length".into(), message: "deck dilations act on the upper half-plane only".into() });
    }
    s.finish()?;
    Ok(ChartSpec { kind, dim, c, deck_length })
}

fn immersion_spec(mut s: Section, chart: &ChartSpec, base_dir: &Path) -> Result<ImmersionSpec> {
    let family = s.require("family")?;
    let nodes = s.parsed_or("nodes", 64_usize)?;
    let spec = match family.value.as_str() {
        "circle" => {
            let c = s.list("center")?.unwrap_or_else(|| vec![0.0, 0.0]);
            if c.len() != 2 {
                return Err(family.error("circle center is `re, im`"));
            }
            ImmersionSpec::Circle { center: [c[0], c[1]], radius: s.parsed_or("radius", 1.0)?, nodes }
        }
        "clifford_torus" => {
            let radii = s.list("radii")?.unwrap_or_else(|| vec![1.0; chart.dim]);
            ImmersionSpec::CliffordTorus { radii, nodes }
        }
        "core_geodesic" => ImmersionSpec::CoreGeodesic { nodes },
        "random_torus" => ImmersionSpec::RandomTorus {
            center: s.list("center")?.unwrap_or_else(|| vec![0.0; 2 * chart.dim]),
            radii: s.list("radii")?.unwrap_or_else(|| vec![0.5; chart.dim]),
            amplitude: s.parsed_or("amplitude", 0.05)?,
            modes: s.parsed_or("modes", 2_i32)?,
            seed: s.parsed_or("seed", 0_u64)?,
            nodes,
        },
        "csv" => {
            let path = base_dir.join(s.require("path")?.value);
            let twists = match s.take("twists")? {
                Some(e) => e
                    .items()
                    .iter()
                    .map(|t| match t.value.as_str() {
                        "none" => Ok(None),
                        x => x.parse().map(Some).map_err(|_| t.error(format!("twist `{x}` is neither `none` nor a deck index"))),
                    })
                    .collect::<Result<_>>()?,
                None => vec![None; chart.dim],
            };
            ImmersionSpec::Csv { path, twists }
        }
        other => return Err(family.error(format!("unknown immersion family `{other}`"))),
    };
    s.finish()?;
    Ok(spec)
}

fn perturbation_spec(mut s: Section) -> Result<PerturbationSpec> {
    let epsilon = s.parsed_or("epsilon", 1.0)?;
    let mut terms = Vec::new();
    for e in s.take_all("term") {
        // `re im | α | β`
        let parts: Vec<&str> = e.value.split('|').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(e.error("term is `re im | alpha | beta`"));
        }
        let nums = |p: &str| -> Result<Vec<f64>> {
            p.split(|c: char| c == ',' || c.is_whitespace())
                .filter(|x| !x.is_empty())
                .map(|x| x.parse::<f64>().map_err(|_| e.error(format!("cannot parse `{x}`"))))
                .collect()
        };
        let coef = nums(parts[0])?;
        if coef.len() != 2 {
            return Err(e.error("coefficient is `re im`"));
        }
        let exps = |p: &str| -> Result<Vec<u32>> {
            nums(p)?
                .into_iter()
                .map(|x| if x >= 0.0 && x.fract() == 0.0 { Ok(x as u32) } else { Err(e.error("exponents are non-negative integers")) })
                .collect()
        };
        terms.push(TermSpec { coef: [coef[0], coef[1]], alpha: exps(parts[1])?, beta: exps(parts[2])? });
    }
    let conformal = match s.parsed::<f64>("conformal_amplitude")? {
        Some(amplitude) => Some(ConformalSpec {
            amplitude,
            mode: s.parsed_or("conformal_mode", 1.0)?,
            phase: s.parsed_or("conformal_phase", 0.0)?,
        }),
        None => None,
    };
    if terms.is_empty() && conformal.is_none() {
        return Err(GeomError::Config { line: s.line, key: "term".into(), message: "perturbation has neither terms nor a conformal factor".into() });
    }
    s.finish()?;
    Ok(PerturbationSpec { epsilon, terms, conformal })
}

fn task_params(task: Task, mut s: Section) -> Result<TaskParams> {
    let params = match task {
        Task::Maslov => TaskParams::Maslov {
            critical_tol: match s.take("critical_tol")? {
                Some(e) if e.value == "none" => None,
                Some(e) => Some(e.parse()?),
                None => Some(1e-6),
            },
            oracle_tol: s.parsed_or("oracle_tol", 1e-4)?,
        },
        Task::Linearize => TaskParams::Linearize {
            operator: match s.take("operator")? {
                None => OperatorChoice::Ltilde,
                Some(e) => match e.value.as_str() {
                    "ltilde" => OperatorChoice::Ltilde,
                    "l" => OperatorChoice::L,
                    other => return Err(e.error(format!("unknown operator `{other}`"))),
                },
            },
            eigenvalues: s.parsed_or("eigenvalues", 8_usize)?,
            fields: s.parsed_or("fields", 20_usize)?,
            reference_tol: s.parsed_or("reference_tol", 1e-8)?,
            dump_matrix: s.parsed_or("dump_matrix", false)?,
        },
        Task::Moser => TaskParams::Moser {
            mode: match s.take("mode")? {
                None => crate::isotopy::FormMode::Kahler,
                Some(e) => match e.value.as_str() {
                    "kahler" => crate::isotopy::FormMode::Kahler,
                    "ricci" => crate::isotopy::FormMode::Ricci,
                    other => return Err(e.error(format!("unknown form mode `{other}`"))),
                },
            },
            steps: s.parsed_or("steps", 100_usize)?,
            t_end: s.parsed_or("t_end", 1.0)?,
            defect_tol: s.parsed_or("defect_tol", 1e-6)?,
            refinement_ratio: s.parsed("refinement_ratio")?,
        },
        Task::Persist => TaskParams::Persist {
            steps: s.parsed_or("steps", 10_usize)?,
            min_step: s.parsed_or("min_step", 1e-3)?,
            newton_tol: s.parsed_or("newton_tol", 1e-11)?,
            certify_tol: s.parsed_or("certify_tol", 1e-8)?,
            max_iter: s.parsed_or("max_iter", 20_usize)?,
            base_jacobian: s.parsed_or("base_jacobian", false)?,
            round_trip_tol: match s.take("round_trip_tol")? {
                Some(e) if e.value == "none" => None,
                Some(e) => Some(e.parse()?),
                None => Some(1e-8),
            },
            probe_trials: s.parsed_or("probe_trials", 0_usize)?,
            probe_radius: s.parsed_or("probe_radius", 0.5)?,
            kernel: match s.take("kernel")? {
                None => KernelChoice::None,
                Some(e) => match e.value.as_str() {
                    "none" => KernelChoice::None,
                    "fubini_study_moment" => KernelChoice::FubiniStudyMoment,
                    other => return Err(e.error(format!("unknown kernel `{other}`"))),
                },
            },
            experimental_nd: s.parsed_or("experimental_nd", false)?,
        },
    };
    s.finish()?;
    Ok(params)
}
