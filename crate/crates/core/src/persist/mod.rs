//! Newton continuation of J-minimal immersions in Weinstein coordinates.
//!
//! Near a base immersion `ι`, immersions are parametrised by 1-forms through
//! `ι_α = exp(J ι_* Y)`, `Y = −A⁻¹ α^♯`. The unknown is a zero-mean scalar `f`
//! with `α = df`; for curves a flux coefficient `c` along a fixed harmonic
//! form `η` is carried as well, because the first-order chart does not sweep
//! zero area exactly and `ξ_J[ι_{df}]` then picks up a small loop integral.
//! The residual is the zero-mean primitive `F̃` of the exact part of `ξ_J`
//! together with the loop integral.

mod jacobian;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{GeomError, Result};
use crate::immersion::{GridImmersion, GridOneForm};
use crate::kahler::ChartPath;
use crate::linearize::{operator_ltilde_with, ricci_endomorphism, weinstein_immersion_with, RicciEndomorphism};
use crate::maslov::{loop_integrals, maslov_form};

const RADIUS_REFINEMENTS: usize = 40;

/// Loop integrals of `ξ_J[ι_{df}]` above this make [`scalar_maslov`] refuse.
pub const EXACTNESS_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonOptions {
    /// Stop once the residual sup norm is below this...
    pub tol: f64,
    /// ...and `sup |ξ_J|` is below this.
    pub certify_tol: f64,
    pub max_iter: usize,
    /// Freeze the Jacobian at `f = 0` instead of re-assembling per iterate.
    pub base_jacobian: bool,
    /// Extra scalar fields (e.g. isometry-induced Jacobi fields) projected out
    /// of both the update and the residual.
    pub kernel: Vec<Vec<f64>>,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { tol: 1e-11, certify_tol: 1e-8, max_iter: 20, base_jacobian: false, kernel: Vec::new() }
    }
}

#[derive(Debug, Clone)]
pub struct ContinuationProblem {
    /// J-minimal at `t = 0`.
    pub base: GridImmersion,
    pub path: ChartPath,
    pub newton: NewtonOptions,
    pub steps: usize,
    /// Smallest parameter step bisection may reach.
    pub min_step: f64,
    /// Allow `n ≥ 2`, where the solver uses a frozen base-point `L̃`.
    pub experimental_nd: bool,
}

impl ContinuationProblem {
    pub fn new(base: GridImmersion, path: ChartPath) -> Self {
        Self { base, path, newton: NewtonOptions::default(), steps: 10, min_step: 1e-3, experimental_nd: false }
    }
}

/// Newton solve at one parameter value.
#[derive(Debug, Clone, Serialize)]
pub struct NewtonReport {
    pub t: f64,
    pub iterations: usize,
    /// Residual sup norms, one per iterate including the start.
    pub residuals: Vec<f64>,
    /// `r_{k+1} / r_k²`.
    pub ratios: Vec<f64>,
    pub sup_xi: f64,
    /// `sup |ι*ρ̄|`; zero for curves.
    pub ricci_pullback: f64,
    /// Harmonic flux coefficient (curves only).
    pub flux: f64,
    #[serde(skip)]
    pub f: Vec<f64>,
}

impl NewtonReport {
    pub fn f_norm(&self) -> f64 {
        sup(&self.f)
    }
}

#[derive(Debug, Clone)]
pub struct ContinuationReport {
    pub steps: Vec<NewtonReport>,
    pub immersion: GridImmersion,
}

impl ContinuationReport {
    pub fn last(&self) -> &NewtonReport {
        self.steps.last().expect("continuation reports hold at least one step")
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct UniquenessReport {
    /// `sup ‖f‖ / ‖L̃ f‖`, with `‖f‖` the discrete C² norm and `‖L̃ f‖` the sup norm.
    pub c1: f64,
    /// `sup ‖F̃(f) − L̃ f‖ / ‖f‖²`, same norms, over samples up to the certified radius.
    pub c2: f64,
    /// Largest radius found with `c₁ c₂ r ≤ 1`.
    pub certified_radius: f64,
    pub radius: f64,
    /// `‖R(f)‖ / ‖R(f/2)‖` for the quadratic remainder `R`.
    pub scaling_ratio: f64,
    pub trials: usize,
    pub converged: usize,
    pub worst_final: f64,
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Unknowns `(f, c)` flattened; `c` is present for curves only.
#[derive(Debug, Clone, PartialEq)]
pub struct Unknown {
    pub f: Vec<f64>,
    pub c: f64,
}

impl Unknown {
    fn zeros(len: usize) -> Self {
        Self { f: vec![0.0; len], c: 0.0 }
    }
}

/// The Weinstein chart around the base immersion, in the chart of one parameter value.
pub struct WeinsteinMap {
    base: GridImmersion,
    ricci: RicciEndomorphism,
    weights: Vec<f64>,
    eta: Option<Vec<f64>>,
}

/// Residual at one point of the chart.
pub struct Evaluation {
    pub immersion: GridImmersion,
    pub xi: GridOneForm,
    pub sup_xi: f64,
    /// `(F̃, loop integral)` for curves, `F̃` otherwise.
    pub residual: Vec<f64>,
    pub loops: Vec<f64>,
}

impl WeinsteinMap {
    pub fn new(base: &GridImmersion) -> Result<Self> {
        let ricci = ricci_endomorphism(base)?;
        let weights = base.weights_j();
        let eta = (base.dim() == 1).then(|| {
            let sqrt_g: Vec<f64> = base.geometry().iter().map(|g| g.sqrt_det_g).collect();
            let total = sqrt_g.iter().sum::<f64>() * base.grid().step(0);
            sqrt_g.iter().map(|s| s / total).collect()
        });
        Ok(Self { base: base.clone(), ricci, weights, eta })
    }

    pub fn base(&self) -> &GridImmersion {
        &self.base
    }

    fn has_flux(&self) -> bool {
        self.eta.is_some()
    }

    fn unknowns(&self) -> usize {
        self.base.len() + usize::from(self.has_flux())
    }

    fn form(&self, x: &Unknown) -> GridOneForm {
        let mut alpha = self.base.d_scalar(&x.f);
        if let Some(eta) = &self.eta {
            for (a, e) in alpha.comps[0].iter_mut().zip(eta) {
                *a += x.c * e;
            }
        }
        alpha
    }

    pub fn immersion(&self, x: &Unknown) -> Result<GridImmersion> {
        weinstein_immersion_with(&self.base, &self.ricci, &self.form(x))
    }

    pub fn evaluate(&self, x: &Unknown) -> Result<Evaluation> {
        let immersion = self.immersion(x)?;
        let data = maslov_form(&immersion)?;
        let loops = loop_integrals(&immersion, &data.xi);
        let residual = self.residual_of(&data.xi, &loops);
        Ok(Evaluation { immersion, sup_xi: data.sup_norm, xi: data.xi, residual, loops })
    }

    /// `(F̃, loop)` from a Maslov form; linear in `ξ`.
    fn residual_of(&self, xi: &GridOneForm, loops: &[f64]) -> Vec<f64> {
        let mut exact = xi.clone();
        if let Some(eta) = &self.eta {
            for (x, e) in exact.comps[0].iter_mut().zip(eta) {
                *x -= loops[0] * e;
            }
        }
        let mut out = self.primitive(&exact);
        if self.has_flux() {
            out.push(loops[0]);
        }
        out
    }

    /// Zero-mean primitive along axis-ordered staircase paths from node 0.
    fn primitive(&self, form: &GridOneForm) -> Vec<f64> {
        let grid = self.base.grid();
        let mut f = vec![0.0; grid.len()];
        for node in 1..grid.len() {
            let idx = grid.multi_index(node);
            let a = (0..idx.len()).rev().find(|&a| idx[a] > 0).expect("node 0 is the only origin");
            let prev = grid.shift(node, a, -1).0;
            f[node] = f[prev] + grid.cell_increment(&form.comps[a], prev, a);
        }
        demean(&f, &self.weights)
    }

    fn pack(&self, x: &Unknown) -> DVector<f64> {
        let mut v = x.f.clone();
        if self.has_flux() {
            v.push(x.c);
        }
        DVector::from_vec(v)
    }

    fn unpack(&self, v: &DVector<f64>) -> Unknown {
        let len = self.base.len();
        Unknown { f: v.rows(0, len).iter().copied().collect(), c: if self.has_flux() { v[len] } else { 0.0 } }
    }
}

fn demean(f: &[f64], w: &[f64]) -> Vec<f64> {
    let m = f.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / w.iter().sum::<f64>();
    f.iter().map(|x| x - m).collect()
}

/// `F̃(f)`: the zero-mean primitive of `ξ_J[ι_{df}]`.
pub fn scalar_maslov(imm: &GridImmersion, f: &[f64]) -> Result<Vec<f64>> {
    scalar_maslov_with(imm, f, EXACTNESS_TOL)
}

pub fn scalar_maslov_with(imm: &GridImmersion, f: &[f64], exactness_tol: f64) -> Result<Vec<f64>> {
    if f.len() != imm.len() {
        return Err(GeomError::DimensionMismatch { expected: imm.len(), got: f.len() });
    }
    let map = WeinsteinMap { eta: None, ..WeinsteinMap::new(imm)? };
    let eval = map.evaluate(&Unknown { f: f.to_vec(), c: 0.0 })?;
    if eval.loops.iter().any(|l| l.abs() > exactness_tol) {
        return Err(GeomError::NotExact { loops: eval.loops, tol: exactness_tol });
    }
    Ok(eval.residual)
}

/// Fields the update must be orthogonal to and whose residual components are
/// dropped: constants, the checkerboard modes annihilated by the stencil, and
/// any user-supplied kernel.
fn kernel_fields(imm: &GridImmersion, extra: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let grid = imm.grid();
    let dims = grid.dims();
    let mut out = Vec::new();
    for mask in 0..(1usize << dims.len()) {
        if (0..dims.len()).any(|a| mask & (1 << a) != 0 && dims[a] % 2 == 1) {
            continue;
        }
        out.push(
            (0..grid.len())
                .map(|node| {
                    let idx = grid.multi_index(node);
                    let odd: usize = (0..dims.len()).filter(|&a| mask & (1 << a) != 0).map(|a| idx[a]).sum();
                    if odd.is_multiple_of(2) {
                        1.0
                    } else {
                        -1.0
                    }
                })
                .collect(),
        );
    }
    out.extend(extra.iter().cloned());
    out
}

/// Solve `J δ + U μ = −r`, `Vᵀ δ = 0` with `U`, `V` spanned by the kernel fields.
fn bordered_solve(j: &DMatrix<f64>, r: &DVector<f64>, kernel: &[Vec<f64>], weights: &[f64]) -> Result<DVector<f64>> {
    let n = j.ncols();
    let m = kernel.len();
    let mut sys = DMatrix::zeros(n + m, n + m);
    sys.view_mut((0, 0), (n, n)).copy_from(j);
    for (k, field) in kernel.iter().enumerate() {
        for (i, v) in field.iter().enumerate() {
            sys[(i, n + k)] = *v;
            sys[(n + k, i)] = v * weights[i];
        }
    }
    let mut rhs = DVector::zeros(n + m);
    rhs.rows_mut(0, n).copy_from(&(-r));
    let sol = sys.lu().solve(&rhs).ok_or(GeomError::SingularJacobian)?;
    if sol.iter().any(|x| !x.is_finite()) {
        return Err(GeomError::SingularJacobian);
    }
    Ok(sol.rows(0, n).into_owned())
}

/// Component of the residual outside the kernel range (what Newton can drive to zero).
fn projected_norm(r: &DVector<f64>, kernel: &[Vec<f64>], weights: &[f64]) -> f64 {
    let len = weights.len();
    let mut f: Vec<f64> = r.rows(0, len).iter().copied().collect();
    // weighted Gram–Schmidt against the kernel fields
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for k in kernel {
        let mut v = k.clone();
        for b in &basis {
            let d: f64 = v.iter().zip(b).zip(weights).map(|((x, y), w)| x * y * w).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
        }
        let nrm = v.iter().zip(weights).map(|(x, w)| x * x * w).sum::<f64>().sqrt();
        if nrm > 1e-12 {
            basis.push(v.into_iter().map(|x| x / nrm).collect());
        }
    }
    for b in &basis {
        let d: f64 = f.iter().zip(b).zip(weights).map(|((x, y), w)| x * y * w).sum();
        f.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
    }
    let tail = r.rows(len, r.len() - len).amax();
    sup(&f).max(tail)
}

/// Linear solver used by one Newton run.
enum Linearization {
    /// Re-assembled at every iterate (curves).
    Fresh,
    /// Fixed matrix (base-point variant, or the assembled `L̃` for `n ≥ 2`).
    Frozen(DMatrix<f64>),
}

/// Newton's method for `F̃ = 0` at one chart of the family.
pub fn newton_at(map: &WeinsteinMap, start: &Unknown, options: &NewtonOptions, t: f64) -> Result<NewtonReport> {
    newton_from(map, start, options, t, None)
}

/// [`newton_at`] with an already assembled base-point Jacobian for the chord method.
fn newton_from(
    map: &WeinsteinMap,
    start: &Unknown,
    options: &NewtonOptions,
    t: f64,
    frozen: Option<&DMatrix<f64>>,
) -> Result<NewtonReport> {
    let imm = map.base();
    let kernel = kernel_fields(imm, &options.kernel);
    let weights = &map.weights;
    let lin = if let Some(j) = frozen.filter(|_| options.base_jacobian) {
        Linearization::Frozen(j.clone())
    } else if imm.dim() > 1 {
        Linearization::Frozen(ltilde_matrix(imm)?)
    } else if options.base_jacobian {
        Linearization::Frozen(jacobian::colored(map, &Unknown::zeros(imm.len()))?)
    } else {
        Linearization::Fresh
    };
    let mut x = start.clone();
    x.f = demean(&x.f, weights);
    let mut residuals = Vec::new();
    let mut iterations = 0;
    loop {
        let eval = map.evaluate(&x)?;
        let r = DVector::from_vec(eval.residual.clone());
        let rn = projected_norm(&r, &kernel, weights);
        residuals.push(rn);
        let diverged = !rn.is_finite() || (residuals.len() > 1 && rn > 1e3 * residuals[0].max(options.tol));
        if diverged {
            return Err(GeomError::NewtonDiverged { iterations, residual: rn });
        }
        let certified = eval.sup_xi <= options.certify_tol || kernel.len() > base_kernel_len(imm);
        if rn <= options.tol && certified {
            let ricci_pullback = if imm.dim() > 1 {
                let chart = eval.immersion.chart_arc();
                eval.immersion.pullback_two_form(|p| Ok(chart.ricci_form_at(p)?.rho))?.sup_abs()
            } else {
                0.0
            };
            let ratios = residuals.windows(2).map(|w| w[1] / (w[0] * w[0])).collect();
            return Ok(NewtonReport {
                t,
                iterations,
                residuals,
                ratios,
                sup_xi: eval.sup_xi,
                ricci_pullback,
                flux: x.c,
                f: x.f,
            });
        }
        if iterations == options.max_iter {
            return Err(GeomError::NewtonDiverged { iterations, residual: rn });
        }
        let delta = match &lin {
            Linearization::Fresh => bordered_solve(&jacobian::colored(map, &x)?, &r, &kernel, weights)?,
            Linearization::Frozen(j) => bordered_solve(j, &r, &kernel, weights)?,
        };
        x = map.unpack(&(map.pack(&x) + delta));
        iterations += 1;
    }
}

fn base_kernel_len(imm: &GridImmersion) -> usize {
    kernel_fields(imm, &[]).len()
}

/// Dense `L̃` at the base, the `n ≥ 2` stand-in for the exact Jacobian.
fn ltilde_matrix(imm: &GridImmersion) -> Result<DMatrix<f64>> {
    Ok(operator_ltilde_with(imm, None)?.assemble())
}

fn check_base(problem: &ContinuationProblem) -> Result<()> {
    if problem.base.dim() > 1 && !problem.experimental_nd {
        return Err(GeomError::Unsupported(
            "continuation in dimension n >= 2 is experimental; enable it explicitly".into(),
        ));
    }
    let sup = maslov_form(&problem.base)?.sup_norm;
    let tol = problem.newton.certify_tol.max(crate::linearize::CRITICAL_TOL);
    if sup > tol {
        return Err(GeomError::NotCritical { sup, threshold: tol });
    }
    Ok(())
}

fn map_at(problem: &ContinuationProblem, t: f64) -> Result<WeinsteinMap> {
    let chart = Arc::new(problem.path.at(t)?);
    WeinsteinMap::new(&problem.base.with_chart(chart)?)
}

/// Newton at a single parameter value, from `f = 0`.
pub fn newton_solve(problem: &ContinuationProblem, t: f64) -> Result<NewtonReport> {
    check_base(problem)?;
    let map = map_at(problem, t)?;
    newton_at(&map, &Unknown::zeros(problem.base.len()), &problem.newton, t)
}

/// Continue the solution from `t = 0` to `t = 1`.
pub fn continue_path(problem: &ContinuationProblem) -> Result<ContinuationReport> {
    check_base(problem)?;
    continue_between(problem, &Unknown::zeros(problem.base.len()), 0.0, 1.0)
}

/// Continue an existing solution at `from` to `to`, previous solution as predictor,
/// halving the step on failure.
pub fn continue_between(problem: &ContinuationProblem, start: &Unknown, from: f64, to: f64) -> Result<ContinuationReport> {
    let nominal = (to - from) / problem.steps.max(1) as f64;
    let mut t = from;
    let mut x = start.clone();
    let mut dt = nominal;
    let mut steps = Vec::new();
    let mut last_map = None;
    while (to - t).abs() > 1e-12 {
        if (to - t).abs() < dt.abs() {
            dt = to - t;
        }
        let mut next = t + dt;
        if (to - next).abs() < 1e-9 * nominal.abs() {
            next = to;
        }
        let attempt = map_at(problem, next).and_then(|map| {
            let rep = newton_at(&map, &x, &problem.newton, next)?;
            Ok((map, rep))
        });
        match attempt {
            Ok((map, rep)) => {
                x = Unknown { f: rep.f.clone(), c: rep.flux };
                steps.push(rep);
                last_map = Some(map);
                t = next;
                dt = nominal;
            }
            Err(e) => {
                dt *= 0.5;
                if dt.abs() < problem.min_step {
                    return Err(match e {
                        GeomError::LeftDomain | GeomError::SingularA { .. } => e,
                        _ => GeomError::StepFailed { t: next },
                    });
                }
            }
        }
        if steps.len() > 64 * problem.steps.max(1) {
            return Err(GeomError::ContinuationStalled { t, min_step: problem.min_step });
        }
    }
    let map = match last_map {
        Some(m) => m,
        None => map_at(problem, to)?,
    };
    if steps.is_empty() {
        steps.push(newton_at(&map, &x, &problem.newton, to)?);
    }
    let immersion = map.immersion(&x)?;
    Ok(ContinuationReport { steps, immersion })
}

/// Forward to `t = 1` and back; returns both legs.
pub fn round_trip(problem: &ContinuationProblem) -> Result<(ContinuationReport, ContinuationReport)> {
    let forward = continue_path(problem)?;
    let end = forward.last();
    let start = Unknown { f: end.f.clone(), c: end.flux };
    let back = continue_between(problem, &start, 1.0, 0.0)?;
    Ok((forward, back))
}

/// Random smooth zero-mean field: low Fourier modes with decaying amplitudes.
fn random_field(imm: &GridImmersion, rng: &mut ChaCha8Rng, modes: i64) -> Vec<f64> {
    let grid = imm.grid();
    let n = grid.ndim();
    let mut waves = Vec::new();
    let mut wave = vec![-modes; n];
    loop {
        if wave.iter().any(|&k| k != 0) {
            waves.push((wave.clone(), rng.gen_range(-1.0..1.0), rng.gen_range(0.0..std::f64::consts::TAU)));
        }
        let mut a = 0;
        while a < n {
            wave[a] += 1;
            if wave[a] <= modes {
                break;
            }
            wave[a] = -modes;
            a += 1;
        }
        if a == n {
            break;
        }
    }
    let f: Vec<f64> = (0..grid.len())
        .map(|node| {
            waves
                .iter()
                .map(|(k, amp, ph)| {
                    let phase: f64 = (0..n).map(|a| k[a] as f64 * grid.coordinate(node, a)).sum();
                    let size: f64 = k.iter().map(|x| (x * x) as f64).sum();
                    amp * (phase + ph).cos() / size
                })
                .sum()
        })
        .collect();
    let s = sup(&f);
    f.into_iter().map(|x| x / s).collect()
}

/// Measure the constants of the quantitative inverse function theorem at a
/// J-minimal curve and run Newton from random starts inside the certified ball.
///
/// `radius_factor` scales the certified radius; starts have C² norm at most
/// `radius_factor` times it. Newton uses the base-point Jacobian.
pub fn uniqueness_probe(imm: &GridImmersion, radius_factor: f64, trials: usize, seed: u64) -> Result<UniquenessReport> {
    let sup_xi = maslov_form(imm)?.sup_norm;
    if sup_xi > crate::linearize::CRITICAL_TOL {
        return Err(GeomError::NotCritical { sup: sup_xi, threshold: crate::linearize::CRITICAL_TOL });
    }
    if imm.dim() != 1 {
        return Err(GeomError::Unsupported("the uniqueness probe is implemented for curves".into()));
    }
    let map = WeinsteinMap::new(imm)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ltilde = operator_ltilde_with(imm, None)?;
    let j0 = jacobian::colored(&map, &Unknown::zeros(imm.len()))?;
    let samples = trials.clamp(1, 20);

    let mut c1 = 0.0_f64;
    for _ in 0..samples {
        let f = random_field(imm, &mut rng, 8);
        let lf = ltilde.apply(&f)?;
        c1 = c1.max(c2_norm(imm, &f) / sup(&lf));
    }

    let remainder = |f: &[f64]| -> Result<f64> {
        let x = Unknown { f: f.to_vec(), c: 0.0 };
        let r = DVector::from_vec(map.evaluate(&x)?.residual);
        Ok((r - &j0 * map.pack(&x)).amax())
    };
    let amp = 1e-3;
    let mut c2 = 0.0_f64;
    let mut ratios = Vec::new();
    for _ in 0..samples {
        let f = scaled(imm, random_field(imm, &mut rng, 4), amp);
        let half: Vec<f64> = f.iter().map(|x| x * 0.5).collect();
        let (r1, r2) = (remainder(&f)?, remainder(&half)?);
        c2 = c2.max(r1 / (amp * amp));
        ratios.push(r1 / r2);
    }
    ratios.sort_by(f64::total_cmp);
    let scaling_ratio = ratios[ratios.len() / 2];

    // the small-amplitude constant understates the remainder across the ball
    // it certifies: bisect (geometrically) for the largest radius r with
    // c₁ · c₂(r) · r ≤ 1, c₂(r) measured on fixed shapes of C² norm r
    let shapes: Vec<Vec<f64>> = (0..samples).map(|_| scaled(imm, random_field(imm, &mut rng, 6), 1.0)).collect();
    let c2_at = |r: f64| -> f64 {
        shapes.iter().fold(0.0_f64, |m, s| {
            let f: Vec<f64> = s.iter().map(|x| x * r).collect();
            m.max(remainder(&f).map_or(f64::INFINITY, |rem| rem / (r * r)))
        })
    };
    let fits = |r: f64, c: f64| c1 * c.max(c2) * r <= 1.0;
    let mut hi = 1.0 / (c1 * c2);
    let c2_hi = c2_at(hi);
    let (certified_radius, c2) = if fits(hi, c2_hi) {
        (hi, c2.max(c2_hi))
    } else {
        let mut lo = hi;
        let mut c2_lo = c2_hi;
        for _ in 0..RADIUS_REFINEMENTS {
            lo *= 1e-2;
            c2_lo = c2_at(lo);
            if fits(lo, c2_lo) {
                break;
            }
            hi = lo;
        }
        for _ in 0..RADIUS_REFINEMENTS {
            if hi / lo < 1.05 {
                break;
            }
            let mid = (lo * hi).sqrt();
            let c2_mid = c2_at(mid);
            if fits(mid, c2_mid) {
                (lo, c2_lo) = (mid, c2_mid);
            } else {
                hi = mid;
            }
        }
        (lo, c2.max(c2_lo))
    };
    let radius = radius_factor * certified_radius;
    let options = NewtonOptions { base_jacobian: true, max_iter: 60, ..NewtonOptions::default() };
    let mut converged = 0;
    let mut worst_final = 0.0_f64;
    for _ in 0..trials {
        let scale = radius * rng.gen_range(0.1..1.0);
        let f = scaled(imm, random_field(imm, &mut rng, 6), scale);
        let start = Unknown { f, c: 0.0 };
        match newton_from(&map, &start, &options, 0.0, Some(&j0)) {
            Ok(rep) => {
                let dist = rep.f_norm().max(rep.flux.abs());
                worst_final = worst_final.max(dist);
                if dist <= 1e-8 {
                    converged += 1;
                }
            }
            Err(_) => worst_final = f64::INFINITY,
        }
    }
    Ok(UniquenessReport { c1, c2, certified_radius, radius, scaling_ratio, trials, converged, worst_final })
}

/// `max(sup|f|, sup|f'|, sup|f''|)` in the grid coordinate of a curve.
pub fn c2_norm(imm: &GridImmersion, f: &[f64]) -> f64 {
    let d1 = imm.grid().diff(f, 0);
    let d2 = imm.grid().diff(&d1, 0);
    sup(f).max(sup(&d1)).max(sup(&d2))
}

fn scaled(imm: &GridImmersion, f: Vec<f64>, norm: f64) -> Vec<f64> {
    let k = norm / c2_norm(imm, &f);
    f.into_iter().map(|x| x * k).collect()
}
