//! Maslov form `ξ_J`, J-mean curvature `H_J` and the identities tying them to
//! the ambient Ricci form.

use rayon::prelude::*;

use crate::error::{GeomError, Result};
use crate::immersion::{GridImmersion, GridOneForm, GridVectorField};
use crate::trlinalg::{self, TangentFrame};
use crate::{CMat, CVec, C64};

#[derive(Debug, Clone)]
pub struct MaslovData {
    pub xi: GridOneForm,
    /// `H_J` per node, in ambient chart coordinates.
    pub hj: Vec<CVec>,
    /// `sup |ξ_J|_g`.
    pub sup_norm: f64,
}

/// Derivative along every grid axis of each column of a per-node frame field.
/// Returns `out[a][node]` as a matrix whose columns are `∂_a` of the columns.
fn frame_derivatives(imm: &GridImmersion, frames: &[TangentFrame]) -> Result<Vec<Vec<CMat>>> {
    let n = imm.dim();
    let m = imm.chart().dim();
    let mut out = vec![vec![CMat::zeros(m, n); imm.len()]; n];
    for i in 0..n {
        let col: Vec<CVec> = frames.iter().map(|f| f.column(i)).collect();
        for (a, per_axis) in out.iter_mut().enumerate() {
            for (node, d) in imm.diff_ambient(&col, a)?.into_iter().enumerate() {
                per_axis[node].set_column(i, &d);
            }
        }
    }
    Ok(out)
}

/// `ξ_J(∂_a) = Σ_i g(J π_J ∇_{∂_a} E_i, E_i)` on the orthonormal frame `E`.
///
/// Writing `w = E c` with `c ∈ Cⁿ`, `J π_J w = −E Im c`, so each summand is
/// `−Im c_i`; the trace of the imaginary part of `E⁻¹ ∇E`.
pub fn maslov_form(imm: &GridImmersion) -> Result<MaslovData> {
    let n = imm.dim();
    let on: Vec<TangentFrame> = imm.geometry().iter().map(|g| g.onframe.clone()).collect();
    let de = frame_derivatives(imm, &on)?;
    let chart = imm.chart();
    let per_node: Vec<Vec<f64>> = (0..imm.len())
        .into_par_iter()
        .map(|node| {
            let p = &imm.points()[node];
            let e = &on[node];
            let iota = imm.frames()[node].clone();
            let gammas = if chart.is_flat() { Vec::new() } else { chart.christoffel_at(p)? };
            (0..n)
                .map(|a| {
                    let mut xi = 0.0;
                    for i in 0..n {
                        let mut w = de[a][node].column(i).into_owned();
                        if !gammas.is_empty() {
                            let ia = iota.column(a);
                            let ei = e.column(i);
                            for (k, g) in gammas.iter().enumerate() {
                                w += g * &ei * ia[k];
                            }
                        }
                        let (_, wj) = trlinalg::split(e, &w).ok_or_else(|| {
                            GeomError::InvalidImmersion(format!("frame at node {node} is not totally real"))
                        })?;
                        // J π_J w = i · (i E Im c) = −E Im c
                        let jw = wj * C64::i();
                        xi += imm.node(node).h.metric(&jw, &e.column(i));
                    }
                    Ok(xi)
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let xi = GridOneForm { comps: (0..n).map(|a| per_node.iter().map(|v| v[a]).collect()).collect() };
    Ok(assemble(imm, xi))
}

/// `H_J = −J ι_*(ξ_J^♯)` and the sup norm.
fn assemble(imm: &GridImmersion, xi: GridOneForm) -> MaslovData {
    let sharp = imm.sharp(&xi);
    let hj = hj_from_sharp(imm, &sharp);
    let sup_norm = imm.one_form_norms(&xi).into_iter().fold(0.0, f64::max);
    MaslovData { xi, hj, sup_norm }
}

fn hj_from_sharp(imm: &GridImmersion, sharp: &GridVectorField) -> Vec<CVec> {
    imm.push_forward(sharp).into_iter().map(|v| v * -C64::i()).collect()
}

/// `ξ_J` from the connection on the canonical bundle: with `V` the coordinate
/// frame, `ξ_J(∂_a) = −∂_a arg det V − Im ι_a^i ∂_i log det h`.
pub fn maslov_form_oracle(imm: &GridImmersion) -> Result<GridOneForm> {
    let n = imm.dim();
    let dv = frame_derivatives(imm, imm.frames())?;
    let chart = imm.chart();
    let per_node: Vec<Vec<f64>> = (0..imm.len())
        .into_par_iter()
        .map(|node| {
            let v = imm.frames()[node].matrix();
            let lu = v.clone().lu();
            let grad = chart.log_det_gradient(&imm.points()[node])?;
            (0..n)
                .map(|a| {
                    let x = lu.solve(&dv[a][node]).ok_or_else(|| {
                        GeomError::InvalidImmersion(format!("singular frame at node {node}"))
                    })?;
                    let conn: C64 = (0..n).map(|i| v[(i, a)] * grad[i]).sum();
                    Ok(-x.trace().im - conn.im)
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(GridOneForm { comps: (0..n).map(|a| per_node.iter().map(|v| v[a]).collect()).collect() })
}

/// `sup |dξ_J − ι*ρ̄|`; zero for curves.
pub fn closedness_defect(imm: &GridImmersion) -> Result<f64> {
    if imm.dim() < 2 {
        return Ok(0.0);
    }
    let xi = maslov_form(imm)?.xi;
    closedness_defect_of(imm, &xi)
}

pub(crate) fn closedness_defect_of(imm: &GridImmersion, xi: &GridOneForm) -> Result<f64> {
    let dxi = imm.d_one_form(xi);
    let chart = imm.chart();
    let rho = imm.pullback_two_form(|p| Ok(chart.ricci_form_at(p)?.rho))?;
    Ok(dxi
        .comps
        .iter()
        .flatten()
        .zip(rho.comps.iter().flatten())
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs())))
}

/// Line integrals of a 1-form along the grid generators through node 0.
pub fn loop_integrals(imm: &GridImmersion, form: &GridOneForm) -> Vec<f64> {
    let grid = imm.grid();
    (0..imm.dim())
        .map(|a| {
            let mut node = 0;
            let mut s = 0.0;
            for _ in 0..grid.dims()[a] {
                s += form.comps[a][node];
                node = grid.shift(node, a, 1).0;
            }
            s * grid.step(a)
        })
        .collect()
}

/// Compare `d/ds` of the canonical-bundle phase along `ι + s J ι_* X` with
/// `−Div(ρ_J X)/ρ_J`; sup over nodes of the discrepancy.
pub fn div_formula_check(imm: &GridImmersion, x: &GridVectorField) -> Result<f64> {
    div_formula_check_with_step(imm, x, 1e-4)
}

pub fn div_formula_check_with_step(imm: &GridImmersion, x: &GridVectorField, s: f64) -> Result<f64> {
    let n = imm.dim();
    if x.comps.len() != n || x.comps.iter().any(|c| c.len() != imm.len()) {
        return Err(GeomError::DimensionMismatch { expected: n, got: x.comps.len() });
    }
    let jx: Vec<CVec> = imm.push_forward(x).into_iter().map(|v| v * C64::i()).collect();
    let shifted = |t: f64| -> Result<GridImmersion> {
        let pts = imm.points().iter().zip(&jx).map(|(p, v)| p + v * C64::new(t, 0.0)).collect();
        imm.with_points(pts)
    };
    let plus = shifted(s)?;
    let minus = shifted(-s)?;
    let chart = imm.chart();

    let rho = imm.volume_fields().rho_j;
    let flux = GridVectorField {
        comps: x.comps.iter().map(|c| c.iter().zip(&rho).map(|(v, r)| v * r).collect()).collect(),
    };
    let div = imm.divergence(&flux);

    (0..imm.len())
        .into_par_iter()
        .map(|node| {
            let dp = plus.frames()[node].det();
            let dm = minus.frames()[node].det();
            let dphase = (dp / dm).arg() / (2.0 * s);
            let grad = chart.log_det_gradient(&imm.points()[node])?;
            let conn: C64 = (0..chart.dim()).map(|i| jx[node][i] * grad[i]).sum();
            let lhs = -dphase - conn.im;
            Ok((lhs + div[node] / rho[node]).abs())
        })
        .collect::<Result<Vec<f64>>>()
        .map(|v| v.into_iter().fold(0.0, f64::max))
}
