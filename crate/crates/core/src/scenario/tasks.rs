//! One runner per task. Each returns certificates, a JSON result block and
//! the CSV artifacts it produced.

use std::fmt::Write as _;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use super::spec::{KernelChoice, OperatorChoice, Scenario, TaskParams};
use crate::error::{GeomError, Result};
use crate::immersion::{save_csv, GridImmersion};
use crate::isotopy::{moser_flow, FormFamily};
use crate::kahler::ChartKind;
use crate::linearize::{ke_ltilde_reference, operator_l, operator_ltilde};
use crate::maslov::{closedness_defect, loop_integrals, maslov_form, maslov_form_oracle};
use crate::persist::{continue_path, round_trip, uniqueness_probe, ContinuationProblem, NewtonOptions, NewtonReport};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub name: String,
    pub value: f64,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub pass: bool,
}

impl Certificate {
    pub fn at_most(name: &str, value: f64, max: f64) -> Self {
        Self { name: name.into(), value, min: None, max: Some(max), pass: value <= max }
    }

    pub fn at_least(name: &str, value: f64, min: f64) -> Self {
        Self { name: name.into(), value, min: Some(min), max: None, pass: value >= min }
    }

    pub fn within(name: &str, value: f64, min: f64, max: f64) -> Self {
        Self { name: name.into(), value, min: Some(min), max: Some(max), pass: (min..=max).contains(&value) }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub certificates: Vec<Certificate>,
    pub results: Value,
    /// `(file name, contents)`.
    pub files: Vec<(String, String)>,
    /// `(phase, seconds)`; kept out of the summary.
    pub timings: Vec<(String, f64)>,
}

impl Outcome {
    pub fn pass(&self) -> bool {
        self.certificates.iter().all(|c| c.pass)
    }
}

struct Clock(Instant);

impl Clock {
    fn start() -> Self {
        Self(Instant::now())
    }

    fn lap(&mut self, out: &mut Outcome, phase: &str) {
        out.timings.push((phase.into(), self.0.elapsed().as_secs_f64()));
        self.0 = Instant::now();
    }
}

fn immersion_csv(imm: &GridImmersion) -> Result<String> {
    let mut buf = Vec::new();
    save_csv(imm, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is ascii"))
}

fn context(task: &str) -> impl Fn(GeomError) -> GeomError + '_ {
    move |e| match e {
        GeomError::Config { .. } | GeomError::Task { .. } => e,
        other => GeomError::Task { task: task.into(), source: Box::new(other) },
    }
}

pub fn run(scenario: &Scenario) -> Result<Outcome> {
    let task = scenario.task().name();
    let mut out = Outcome::default();
    let mut clock = Clock::start();
    let imm = scenario.immersion.build(&scenario.chart).map_err(context(task))?;
    clock.lap(&mut out, "build");
    match &scenario.params {
        TaskParams::Maslov { critical_tol, oracle_tol } => {
            maslov(&imm, *critical_tol, *oracle_tol, &mut out).map_err(context(task))?
        }
        TaskParams::Linearize { operator, eigenvalues, fields, reference_tol, dump_matrix } => {
            linearize(&imm, *operator, *eigenvalues, *fields, *reference_tol, *dump_matrix, scenario.seed, &mut out)
                .map_err(context(task))?
        }
        TaskParams::Moser { mode, steps, t_end, defect_tol, refinement_ratio } => {
            let pert = scenario.perturbation.as_ref().expect("checked at parse time");
            let family = FormFamily::new(pert.path(&scenario.chart)?, *mode).map_err(context(task))?;
            moser(&imm, &family, *steps, *t_end, *defect_tol, *refinement_ratio, &mut out).map_err(context(task))?
        }
        TaskParams::Persist { .. } => persist(scenario, &imm, &mut out).map_err(context(task))?,
    }
    clock.lap(&mut out, task);
    Ok(out)
}

fn maslov(imm: &GridImmersion, critical_tol: Option<f64>, oracle_tol: f64, out: &mut Outcome) -> Result<()> {
    let data = maslov_form(imm)?;
    let oracle = maslov_form_oracle(imm)?;
    let oracle_err = data.xi.sub(&oracle).sup_abs() / data.xi.sup_abs().max(1.0);
    let loops = loop_integrals(imm, &data.xi);
    let closedness = closedness_defect(imm)?;
    let (vol_g, vol_j) = imm.total_volumes();
    if let Some(tol) = critical_tol {
        out.certificates.push(Certificate::at_most("sup_xi", data.sup_norm, tol));
    }
    out.certificates.push(Certificate::at_most("oracle_rel_err", oracle_err, oracle_tol));
    out.results = json!({
        "sup_xi": data.sup_norm,
        "oracle_rel_err": oracle_err,
        "loop_integrals": loops,
        "closedness_defect": closedness,
        "vol_g": vol_g,
        "vol_j": vol_j,
        "lagrangian_defect": imm.lagrangian_defect(),
    });
    // node, i_a..., xi_a..., xi_oracle_a..., rho_j
    let n = imm.dim();
    let mut csv = String::from("node");
    for a in 0..n {
        write!(csv, ",i{a}").unwrap();
    }
    for a in 0..n {
        write!(csv, ",xi{a}").unwrap();
    }
    for a in 0..n {
        write!(csv, ",xi_oracle{a}").unwrap();
    }
    csv.push_str(",rho_j\n");
    for node in 0..imm.len() {
        write!(csv, "{node}").unwrap();
        for i in imm.grid().multi_index(node) {
            write!(csv, ",{i}").unwrap();
        }
        for a in 0..n {
            write!(csv, ",{:e}", data.xi.comps[a][node]).unwrap();
        }
        for a in 0..n {
            write!(csv, ",{:e}", oracle.comps[a][node]).unwrap();
        }
        writeln!(csv, ",{:e}", imm.node(node).rho_j).unwrap();
    }
    out.files.push(("maslov.csv".into(), csv));
    out.files.push(("immersion.csv".into(), immersion_csv(imm)?));
    Ok(())
}

fn random_scalar(imm: &GridImmersion, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = imm.dim();
    let waves: Vec<(Vec<f64>, f64, f64)> = (0..6)
        .map(|_| {
            let k = (0..n).map(|_| rng.gen_range(-3_i32..=3) as f64).collect();
            (k, rng.gen_range(-1.0..1.0), rng.gen_range(0.0..std::f64::consts::TAU))
        })
        .collect();
    let f: Vec<f64> = (0..imm.len())
        .map(|node| {
            waves
                .iter()
                .map(|(k, a, p)| {
                    let phase: f64 = (0..n).map(|ax| k[ax] * imm.grid().coordinate(node, ax)).sum();
                    a * (phase + p).cos()
                })
                .sum()
        })
        .collect();
    imm.demean_j(&f)
}

#[allow(clippy::too_many_arguments)]
fn linearize(
    imm: &GridImmersion,
    operator: OperatorChoice,
    eigenvalues: usize,
    fields: usize,
    reference_tol: f64,
    dump_matrix: bool,
    seed: u64,
    out: &mut Outcome,
) -> Result<()> {
    let op = match operator {
        OperatorChoice::Ltilde => operator_ltilde(imm)?,
        OperatorChoice::L => operator_l(imm)?,
    };
    let spectrum = op.spectrum(eigenvalues)?;
    let mut results = json!({ "size": op.size(), "spectrum": spectrum });
    let lambda = imm.chart().lambda();
    if let (OperatorChoice::Ltilde, Some(lambda)) = (operator, lambda) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0.0_f64;
        for _ in 0..fields {
            let f = random_scalar(imm, &mut rng);
            let a = op.apply(&f)?;
            let b = ke_ltilde_reference(imm, &f)?;
            let scale = b.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
            let err = a.iter().zip(&b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()));
            worst = worst.max(err / scale);
        }
        out.certificates.push(Certificate::at_most("ke_reference_rel_err", worst, reference_tol));
        results["ke_reference_rel_err"] = json!(worst);
        results["lambda"] = json!(lambda);
        if lambda < 0.0 {
            if let Some(&min) = spectrum.first() {
                out.certificates.push(Certificate::at_least("min_eigenvalue", min, 1.0 - 1e-3));
            }
        }
    }
    let mut csv = String::from("k,eigenvalue\n");
    for (k, v) in spectrum.iter().enumerate() {
        writeln!(csv, "{k},{v:e}").unwrap();
    }
    out.files.push(("spectrum.csv".into(), csv));
    if dump_matrix {
        let m = op.assemble();
        let mut csv = String::new();
        for row in m.row_iter() {
            let cells: Vec<String> = row.iter().map(|x| format!("{x:e}")).collect();
            csv.push_str(&cells.join(","));
            csv.push('\n');
        }
        out.files.push(("operator_matrix.csv".into(), csv));
    }
    out.results = results;
    Ok(())
}

fn moser(
    imm: &GridImmersion,
    family: &FormFamily,
    steps: usize,
    t_end: f64,
    defect_tol: f64,
    refinement_ratio: Option<f64>,
    out: &mut Outcome,
) -> Result<()> {
    let run = moser_flow(imm, family, t_end, steps)?;
    let last = run.trace.last().map_or(0.0, |s| s.defect);
    let worst = run.trace.iter().fold(0.0_f64, |m, s| m.max(s.defect));
    out.certificates.push(Certificate::at_most("frame_defect", worst, defect_tol));
    let mut results = json!({
        "steps": steps,
        "t_end": t_end,
        "final_frame_defect": last,
        "max_frame_defect": worst,
        "grid_defect": run.grid_defect,
    });
    if let Some(ratio) = refinement_ratio {
        let fine = moser_flow(imm, family, t_end, 2 * steps)?;
        let f = fine.trace.last().map_or(0.0, |s| s.defect);
        let measured = last / f;
        out.certificates.push(Certificate::at_least("refinement_ratio", measured, ratio));
        results["refined_frame_defect"] = json!(f);
        results["refinement_ratio"] = json!(measured);
    }
    let mut csv = String::from("step,t,frame_defect\n");
    for (i, s) in run.trace.iter().enumerate() {
        writeln!(csv, "{i},{},{:e}", s.t, s.defect).unwrap();
    }
    out.files.push(("moser_trace.csv".into(), csv));
    out.files.push(("immersion.csv".into(), immersion_csv(&run.immersion)?));
    out.results = results;
    Ok(())
}

/// Hamiltonians of `SU(n+1)` on the affine Fubini–Study chart, `Zᴴ A Z / |Z|²` with `Z = (1, z)`.
pub fn fubini_study_moment_fields(imm: &GridImmersion) -> Vec<Vec<f64>> {
    let n = imm.chart().dim();
    let homogeneous: Vec<Vec<crate::C64>> = imm
        .points()
        .iter()
        .map(|p| std::iter::once(crate::C64::new(1.0, 0.0)).chain(p.iter().copied()).collect())
        .collect();
    let norm2 = |z: &[crate::C64]| z.iter().map(|w| w.norm_sqr()).sum::<f64>();
    let mut fields = Vec::new();
    for k in 1..=n {
        fields.push(homogeneous.iter().map(|z| (z[k].norm_sqr() - z[0].norm_sqr()) / norm2(z)).collect());
    }
    for j in 0..=n {
        for k in (j + 1)..=n {
            fields.push(homogeneous.iter().map(|z| 2.0 * (z[j].conj() * z[k]).re / norm2(z)).collect());
            fields.push(homogeneous.iter().map(|z| 2.0 * (z[j].conj() * z[k]).im / norm2(z)).collect());
        }
    }
    fields
}

fn step_rows(csv: &mut String, newton: &mut String, leg: &str, steps: &[NewtonReport]) {
    for (i, s) in steps.iter().enumerate() {
        writeln!(
            csv,
            "{leg},{i},{},{},{:e},{:e},{:e},{:e},{:e}",
            s.t,
            s.iterations,
            s.residuals.last().copied().unwrap_or(0.0),
            s.sup_xi,
            s.f_norm(),
            s.flux,
            s.ricci_pullback
        )
        .unwrap();
        for (k, r) in s.residuals.iter().enumerate() {
            let ratio = if k == 0 { String::new() } else { format!("{:e}", s.ratios[k - 1]) };
            writeln!(newton, "{leg},{i},{k},{r:e},{ratio}").unwrap();
        }
    }
}

fn persist(scenario: &Scenario, imm: &GridImmersion, out: &mut Outcome) -> Result<()> {
    let TaskParams::Persist {
        steps,
        min_step,
        newton_tol,
        certify_tol,
        max_iter,
        base_jacobian,
        round_trip_tol,
        probe_trials,
        probe_radius,
        kernel,
        experimental_nd,
    } = &scenario.params
    else {
        unreachable!("dispatched on the task")
    };
    let path = scenario.perturbation.as_ref().expect("checked at parse time").path(&scenario.chart)?;
    let kernel = match kernel {
        KernelChoice::None => Vec::new(),
        KernelChoice::FubiniStudyMoment => {
            if !matches!(imm.chart().kind(), ChartKind::FubiniStudy { .. }) {
                return Err(GeomError::Unsupported("moment-map kernels need a Fubini–Study chart".into()));
            }
            fubini_study_moment_fields(imm)
        }
    };
    let newton = NewtonOptions { tol: *newton_tol, certify_tol: *certify_tol, max_iter: *max_iter, base_jacobian: *base_jacobian, kernel };
    let problem = ContinuationProblem {
        newton,
        steps: *steps,
        min_step: *min_step,
        experimental_nd: *experimental_nd,
        ..ContinuationProblem::new(imm.clone(), path)
    };
    let mut clock = Clock::start();
    let (fwd, back) = match round_trip_tol {
        Some(_) => {
            let (f, b) = round_trip(&problem)?;
            (f, Some(b))
        }
        None => (continue_path(&problem)?, None),
    };
    clock.lap(out, "continuation");
    let worst_xi = fwd.steps.iter().fold(0.0_f64, |m, s| m.max(s.sup_xi));
    out.certificates.push(Certificate::at_most("step_sup_xi", worst_xi, *certify_tol));
    let mut results = json!({
        "forward": fwd.steps,
        "final_f_norm": fwd.last().f_norm(),
    });
    if let (Some(tol), Some(back)) = (round_trip_tol, &back) {
        let end = back.last();
        let dist = end.f_norm().max(end.flux.abs());
        out.certificates.push(Certificate::at_most("round_trip_distance", dist, *tol));
        results["backward"] = json!(back.steps);
        results["round_trip_distance"] = json!(dist);
    }
    if *probe_trials > 0 {
        let probe = uniqueness_probe(&fwd.immersion, *probe_radius, *probe_trials, scenario.seed)?;
        clock.lap(out, "uniqueness_probe");
        out.certificates.push(Certificate::within("remainder_scaling_ratio", probe.scaling_ratio, 3.5, 4.5));
        out.certificates.push(Certificate::at_least("probe_converged", probe.converged as f64, probe.trials as f64));
        results["uniqueness_probe"] = json!(probe);
    }
    let mut csv = String::from("leg,step,t,iterations,final_residual,sup_xi,f_norm,flux,ricci_pullback\n");
    let mut newton = String::from("leg,step,iteration,residual,ratio\n");
    step_rows(&mut csv, &mut newton, "forward", &fwd.steps);
    if let Some(back) = &back {
        step_rows(&mut csv, &mut newton, "backward", &back.steps);
    }
    out.files.push(("continuation.csv".into(), csv));
    out.files.push(("newton.csv".into(), newton));
    out.files.push(("immersion.csv".into(), immersion_csv(&fwd.immersion)?));
    out.results = results;
    Ok(())
}
