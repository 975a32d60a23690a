//! Moser transport of Lagrangians along cohomologous families of Kähler or
//! Ricci forms generated by a path of potentials.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{GeomError, Result};
use crate::immersion::GridImmersion;
use crate::kahler::{ChartPath, KahlerChart};
use crate::trlinalg::{from_real, real_basis_vector, real_form, to_real};
use crate::{CVec, C64};

/// Step of the five-point stencil used for `DX_t`.
const JACOBIAN_STEP: f64 = 1e-3;
/// Step of the five-point stencil used for `∂_t log det h_t`.
const TIME_STEP: f64 = 1e-3;
/// Forms whose determinant falls below this are degenerate.
const DEGENERATE_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FormMode {
    /// `ω_t` of `K + tφ`.
    Kahler,
    /// `ρ̄_t` of the same path.
    Ricci,
}

#[derive(Debug, Clone)]
pub struct FormFamily {
    path: ChartPath,
    mode: FormMode,
}

/// The charts needed to evaluate the family at one time.
struct Slice {
    t: f64,
    chart: KahlerChart,
    /// Charts at `t ± δ, t ± 2δ` for the Ricci rate.
    shifted: Vec<(f64, KahlerChart)>,
}

impl FormFamily {
    pub fn new(path: ChartPath, mode: FormMode) -> Result<Self> {
        if mode == FormMode::Kahler && path.conformal.is_some() {
            return Err(GeomError::Unsupported(
                "a conformal path has no potential; use the Ricci mode".into(),
            ));
        }
        Ok(Self { path, mode })
    }

    pub fn mode(&self) -> FormMode {
        self.mode
    }

    pub fn path(&self) -> &ChartPath {
        &self.path
    }

    pub fn chart_at(&self, t: f64) -> Result<KahlerChart> {
        self.path.at(t)
    }

    fn slice(&self, t: f64) -> Result<Slice> {
        let shifted = match self.mode {
            FormMode::Kahler => Vec::new(),
            FormMode::Ricci => [-2.0, -1.0, 1.0, 2.0]
                .iter()
                .map(|k| Ok((*k, self.path.at(t + k * TIME_STEP)?)))
                .collect::<Result<_>>()?,
        };
        Ok(Slice { t, chart: self.path.at(t)?, shifted })
    }

    /// The real `2n × 2n` matrix of the form at time `t`.
    pub fn form_at(&self, t: f64, p: &CVec) -> Result<DMatrix<f64>> {
        self.form_in(&self.slice(t)?, p)
    }

    fn form_in(&self, s: &Slice, p: &CVec) -> Result<DMatrix<f64>> {
        match self.mode {
            FormMode::Kahler => Ok(s.chart.metric_at(p)?.real_omega()),
            FormMode::Ricci => Ok(s.chart.ricci_form_at(p)?.rho),
        }
    }

    /// `α̇_t` as a real covector on `R^{2n}`.
    pub fn alpha_dot(&self, t: f64, p: &CVec) -> Result<DVector<f64>> {
        self.alpha_dot_in(&self.slice(t)?, p)
    }

    /// Kähler mode: `α̇(X) = Im Σ ∂_iφ X^i`, whose differential is `∂_t ω_t`.
    /// Ricci mode: the same with `φ` replaced by `−∂_t log det h_t`.
    fn alpha_dot_in(&self, s: &Slice, p: &CVec) -> Result<DVector<f64>> {
        let n = p.len();
        let grad: CVec = match self.mode {
            FormMode::Kahler => match &self.path.potential {
                Some(phi) => CVec::from_fn(n, |i, _| phi.derivative(p, &[i], &[])),
                None => CVec::zeros(n),
            },
            FormMode::Ricci => {
                if self.path.is_constant() {
                    CVec::zeros(n)
                } else {
                    let mut acc = CVec::zeros(n);
                    for (k, chart) in &s.shifted {
                        let w = match *k as i32 {
                            -2 => 1.0,
                            -1 => -8.0,
                            1 => 8.0,
                            _ => -1.0,
                        } / (12.0 * TIME_STEP);
                        acc += chart.log_det_gradient(p)? * C64::new(-w, 0.0);
                    }
                    acc
                }
            }
        };
        Ok(im_pairing(&grad))
    }

    fn field_in(&self, s: &Slice, p: &CVec) -> Result<CVec> {
        let w = self.form_in(s, p)?;
        let a = self.alpha_dot_in(s, p)?;
        let wt = w.transpose();
        if wt.determinant().abs() < DEGENERATE_TOL {
            return Err(GeomError::DegenerateForm);
        }
        let x = wt.lu().solve(&(-a)).ok_or(GeomError::DegenerateForm)?;
        Ok(from_real(&x))
    }

    /// `X` and `∂_k X = −W⁻ᵀ (∂_k a + (∂_k W)ᵀ X)` from `Wᵀ X = −a`, sharing one jet.
    fn kahler_field_and_jacobian(&self, s: &Slice, p: &CVec) -> Result<(DVector<f64>, DMatrix<f64>)> {
        let n = p.len();
        let jet = s.chart.jet(p, 1)?;
        let wt = real_form(&jet.h, |z| -z.im).transpose();
        if wt.determinant().abs() < DEGENERATE_TOL {
            return Err(GeomError::DegenerateForm);
        }
        let lu = wt.lu();
        let x = lu.solve(&(-self.alpha_dot_in(s, p)?)).ok_or(GeomError::DegenerateForm)?;
        let mut jac = DMatrix::zeros(2 * n, 2 * n);
        for k in 0..2 * n {
            let j = k % n;
            let dh = &jet.dh[j];
            let (dh, hess): (_, CVec) = match &self.path.potential {
                Some(phi) => {
                    let hol = CVec::from_fn(n, |i, _| phi.derivative(p, &[i, j], &[]));
                    let mix = CVec::from_fn(n, |i, _| phi.derivative(p, &[i], &[j]));
                    if k < n {
                        (dh + dh.adjoint(), hol + mix)
                    } else {
                        ((dh - dh.adjoint()) * C64::i(), (hol - mix) * C64::i())
                    }
                }
                None if k < n => (dh + dh.adjoint(), CVec::zeros(n)),
                None => ((dh - dh.adjoint()) * C64::i(), CVec::zeros(n)),
            };
            let dw = real_form(&dh, |z| -z.im);
            let mut rhs = dw.tr_mul(&x);
            rhs += im_pairing(&hess);
            rhs.neg_mut();
            let col = lu.solve(&rhs).ok_or(GeomError::DegenerateForm)?;
            jac.set_column(k, &col);
        }
        Ok((x, jac))
    }

    /// Real `X_t` and its Jacobian: closed form in the Kähler mode, finite
    /// differences in the Ricci mode (whose form would need third derivatives of `K`).
    fn field_and_jacobian(&self, s: &Slice, p: &CVec) -> Result<(DVector<f64>, DMatrix<f64>)> {
        match self.mode {
            FormMode::Kahler => self.kahler_field_and_jacobian(s, p),
            FormMode::Ricci => Ok((to_real(&self.field_in(s, p)?), self.fd_jacobian(s, p)?)),
        }
    }

    /// Five-point stencil in each real direction.
    fn fd_jacobian(&self, s: &Slice, p: &CVec) -> Result<DMatrix<f64>> {
        let n = p.len();
        let h = JACOBIAN_STEP;
        let mut jac = DMatrix::zeros(2 * n, 2 * n);
        for k in 0..2 * n {
            let e = real_basis_vector(n, k);
            let at = |o: f64| -> Result<DVector<f64>> {
                Ok(to_real(&self.field_in(s, &(p + &e * C64::new(o * h, 0.0)))?))
            };
            let col = (at(-2.0)? - at(2.0)? + (at(1.0)? - at(-1.0)?) * 8.0) / (12.0 * h);
            jac.set_column(k, &col);
        }
        Ok(jac)
    }
}

/// The real covector `v ↦ Im Σ g_i v^i`.
fn im_pairing(g: &CVec) -> DVector<f64> {
    let n = g.len();
    DVector::from_fn(2 * n, |k, _| if k < n { g[k].im } else { g[k - n].re })
}

/// `X_t(p)` with `form_t(X_t, ·) = −α̇_t`.
pub fn moser_vector_field(family: &FormFamily, t: f64, p: &CVec) -> Result<CVec> {
    let s = family.slice(t)?;
    if !s.chart.in_domain(p) {
        return Err(GeomError::LeftDomain);
    }
    family.field_in(&s, p)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoserStep {
    pub t: f64,
    /// `sup |form_t(v_a, v_b)|` over nodes for the transported tangent frames.
    pub defect: f64,
}

#[derive(Debug, Clone)]
pub struct MoserResult {
    /// Final immersion, carried by the chart at `t_end`.
    pub immersion: GridImmersion,
    pub trace: Vec<MoserStep>,
    /// Pullback of the final form through the grid-differentiated final frames.
    pub grid_defect: f64,
}

/// Node state: position and the real tangent frame `(v_1, …, v_n)`.
#[derive(Clone)]
struct State {
    z: DVector<f64>,
    v: DMatrix<f64>,
}

impl State {
    fn axpy(&self, k: &State, s: f64) -> State {
        State { z: &self.z + &k.z * s, v: &self.v + &k.v * s }
    }
}

fn frame_defect(w: &DMatrix<f64>, v: &DMatrix<f64>) -> f64 {
    let m = v.transpose() * w * v;
    let mut worst = 0.0_f64;
    for a in 0..m.nrows() {
        for b in (a + 1)..m.ncols() {
            worst = worst.max(m[(a, b)].abs());
        }
    }
    worst
}

/// Transport `imm` by the Moser flow from `t = 0` to `t_end` with `steps`
/// classical Runge–Kutta steps, carrying the tangent frames along by `DX_t`.
pub fn moser_flow(imm: &GridImmersion, family: &FormFamily, t_end: f64, steps: usize) -> Result<MoserResult> {
    let steps = steps.max(1);
    let dt = t_end / steps as f64;
    let mut states: Vec<State> = imm
        .points()
        .iter()
        .zip(imm.frames())
        .map(|(p, f)| {
            let n = p.len();
            let mut v = DMatrix::zeros(2 * n, f.dim());
            for a in 0..f.dim() {
                v.set_column(a, &to_real(&f.column(a)));
            }
            State { z: to_real(p), v }
        })
        .collect();

    let rhs = |s: &Slice, st: &State| -> Result<State> {
        let p = from_real(&st.z);
        let (x, jac) = family.field_and_jacobian(s, &p).map_err(|e| match e {
            GeomError::OutOfDomain => GeomError::LeftDomain,
            e => e,
        })?;
        Ok(State { z: x, v: jac * &st.v })
    };
    let defect_at = |s: &Slice, states: &[State]| -> Result<f64> {
        let d: Vec<f64> = states
            .par_iter()
            .map(|st| Ok(frame_defect(&family.form_in(s, &from_real(&st.z))?, &st.v)))
            .collect::<Result<_>>()?;
        Ok(d.into_iter().fold(0.0, f64::max))
    };

    let mut trace = Vec::with_capacity(steps + 1);
    let start = family.slice(0.0)?;
    trace.push(MoserStep { t: 0.0, defect: defect_at(&start, &states)? });
    let mut s0 = start;
    for k in 0..steps {
        let t = k as f64 * dt;
        let mid = family.slice(t + 0.5 * dt)?;
        let end = family.slice(t + dt)?;
        states = states
            .par_iter()
            .map(|st| {
                let k1 = rhs(&s0, st)?;
                let k2 = rhs(&mid, &st.axpy(&k1, 0.5 * dt))?;
                let k3 = rhs(&mid, &st.axpy(&k2, 0.5 * dt))?;
                let k4 = rhs(&end, &st.axpy(&k3, dt))?;
                Ok(State {
                    z: &st.z + (&k1.z + &k2.z * 2.0 + &k3.z * 2.0 + &k4.z) * (dt / 6.0),
                    v: &st.v + (&k1.v + &k2.v * 2.0 + &k3.v * 2.0 + &k4.v) * (dt / 6.0),
                })
            })
            .collect::<Result<_>>()?;
        trace.push(MoserStep { t: end.t, defect: defect_at(&end, &states)? });
        s0 = end;
    }

    let chart = Arc::new(s0.chart.clone());
    let points: Vec<CVec> = states.iter().map(|st| from_real(&st.z)).collect();
    let immersion = GridImmersion::new(chart, imm.grid().dims(), points, imm.twists().to_vec())?;
    let grid_defect = if imm.dim() < 2 {
        0.0
    } else {
        immersion.pullback_two_form(|p| family.form_in(&s0, p))?.sup_abs()
    };
    Ok(MoserResult { immersion, trace, grid_defect })
}
