//! Variations of the J-volume and the linearised Maslov operators `L`, `L̃`.

mod operator;

pub use operator::{Domain, LinearOperator, DENSE_EIGEN_LIMIT};

use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{GeomError, Result};
use crate::immersion::{Grid, GridImmersion, GridOneForm, GridScalarField, GridVectorField};
use crate::maslov::maslov_form;
use crate::trlinalg::to_real;
use crate::{CVec, C64};

/// Default `sup |ξ_J|` below which an immersion counts as critical.
pub const CRITICAL_TOL: f64 = 1e-4;
/// `|det A|` below this is treated as singular.
pub const SINGULAR_A_TOL: f64 = 1e-10;
/// RK4 steps used for every ambient exponential.
pub const EXP_STEPS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Definiteness {
    Positive,
    Negative,
    Indefinite,
}

/// `ι*Ric = g(A·, ·)` per node, in the grid frame.
#[derive(Debug, Clone)]
pub struct RicciEndomorphism {
    pub a: Vec<DMatrix<f64>>,
    pub a_inv: Vec<DMatrix<f64>>,
    /// `Ric(∂_a ι, ∂_b ι)`.
    pub ric: Vec<DMatrix<f64>>,
    pub sign: Definiteness,
}

/// `Ric(∂_a ι, ∂_b ι)` per node.
pub fn pulled_back_ricci(imm: &GridImmersion) -> Result<Vec<DMatrix<f64>>> {
    let n = imm.dim();
    let chart = imm.chart();
    (0..imm.len())
        .into_par_iter()
        .map(|node| {
            let ric = chart.ricci_form_at(&imm.points()[node])?.ric;
            let f = &imm.frames()[node];
            let cols: Vec<_> = (0..n).map(|a| to_real(&f.column(a))).collect();
            Ok(DMatrix::from_fn(n, n, |a, b| (cols[a].transpose() * &ric * &cols[b])[(0, 0)]))
        })
        .collect()
}

pub fn ricci_endomorphism(imm: &GridImmersion) -> Result<RicciEndomorphism> {
    let ric = pulled_back_ricci(imm)?;
    let mut a = Vec::with_capacity(imm.len());
    let mut a_inv = Vec::with_capacity(imm.len());
    let (mut pos, mut neg) = (true, true);
    for (node, r) in ric.iter().enumerate() {
        let an = &imm.node(node).g_inv * r;
        let det = an.determinant();
        if det.abs() < SINGULAR_A_TOL {
            return Err(GeomError::SingularA { node, det: det.abs() });
        }
        // A = g⁻¹Ric with g > 0 has the signature of Ric
        let eig = r.clone().symmetric_eigen().eigenvalues;
        pos &= eig.iter().all(|&x| x > 0.0);
        neg &= eig.iter().all(|&x| x < 0.0);
        a_inv.push(an.clone().try_inverse().ok_or(GeomError::SingularA { node, det: det.abs() })?);
        a.push(an);
    }
    let sign = match (pos, neg) {
        (true, _) => Definiteness::Positive,
        (_, true) => Definiteness::Negative,
        _ => Definiteness::Indefinite,
    };
    Ok(RicciEndomorphism { a, a_inv, ric, sign })
}

/// Ambient field `J ι_* Y`.
pub fn normal_field(imm: &GridImmersion, y: &GridVectorField) -> Vec<CVec> {
    imm.push_forward(y).into_iter().map(|v| v * C64::i()).collect()
}

/// `exp(t J ι_* Y)` applied nodewise.
pub fn normal_deformation(imm: &GridImmersion, y: &GridVectorField, t: f64) -> Result<GridImmersion> {
    let v: Vec<CVec> = normal_field(imm, y).into_iter().map(|w| w * C64::new(t, 0.0)).collect();
    imm.displaced(&v, EXP_STEPS)
}

/// `Y = −A⁻¹ α^♯`, the inverse of `α = −Ric(Y, ·)`.
pub fn vector_from_form(imm: &GridImmersion, ricci: &RicciEndomorphism, alpha: &GridOneForm) -> GridVectorField {
    let sharp = imm.sharp(alpha);
    let n = imm.dim();
    let mut comps = vec![vec![0.0; imm.len()]; n];
    for node in 0..imm.len() {
        for a in 0..n {
            comps[a][node] = -(0..n).map(|b| ricci.a_inv[node][(a, b)] * sharp.comps[b][node]).sum::<f64>();
        }
    }
    GridVectorField { comps }
}

/// `ι_α = exp(J ι_* Y)` with `Y = −A⁻¹ α^♯`.
pub fn weinstein_immersion(imm: &GridImmersion, alpha: &GridOneForm) -> Result<GridImmersion> {
    let ricci = ricci_endomorphism(imm)?;
    weinstein_immersion_with(imm, &ricci, alpha)
}

pub fn weinstein_immersion_with(
    imm: &GridImmersion,
    ricci: &RicciEndomorphism,
    alpha: &GridOneForm,
) -> Result<GridImmersion> {
    let y = vector_from_form(imm, ricci, alpha);
    normal_deformation(imm, &y, 1.0)
}

/// `Div(ρ_J Y) / ρ_J`.
pub fn rho_divergence(imm: &GridImmersion, y: &GridVectorField) -> GridScalarField {
    let rho = imm.volume_fields().rho_j;
    let flux = GridVectorField {
        comps: y.comps.iter().map(|c| c.iter().zip(&rho).map(|(v, r)| v * r).collect()).collect(),
    };
    imm.divergence(&flux).into_iter().zip(&rho).map(|(d, r)| d / r).collect()
}

fn contract(xi: &GridOneForm, y: &GridVectorField) -> Vec<f64> {
    let len = y.comps[0].len();
    (0..len).map(|node| xi.comps.iter().zip(&y.comps).map(|(x, v)| x[node] * v[node]).sum()).collect()
}

/// `∫ ξ_J(Y) vol_J`, the derivative of `Vol_J` along `JY`.
pub fn first_variation(imm: &GridImmersion, y: &GridVectorField) -> Result<f64> {
    check_field(imm, y)?;
    let xi = maslov_form(imm)?.xi;
    Ok(imm.integrate_j(&contract(&xi, y)))
}

/// `∫ (Div(ρ_J Y)/ρ_J)² vol_J − ∫ Ric(Y, Y) vol_J`, valid where `ξ_J = 0`.
pub fn second_variation_at_critical(imm: &GridImmersion, y: &GridVectorField) -> Result<f64> {
    second_variation_at_critical_with(imm, y, CRITICAL_TOL)
}

pub fn second_variation_at_critical_with(imm: &GridImmersion, y: &GridVectorField, tol: f64) -> Result<f64> {
    check_field(imm, y)?;
    require_critical(imm, tol)?;
    let div = rho_divergence(imm, y);
    let ric = pulled_back_ricci(imm)?;
    let n = imm.dim();
    let vals: Vec<f64> = (0..imm.len())
        .map(|node| {
            let mut r = 0.0;
            for a in 0..n {
                for b in 0..n {
                    r += ric[node][(a, b)] * y.comps[a][node] * y.comps[b][node];
                }
            }
            div[node] * div[node] - r
        })
        .collect();
    Ok(imm.integrate_j(&vals))
}

/// `Dξ_J(JY) = −d(Div(ρ_J Y)/ρ_J) − Ric(·, Y)`.
pub fn d_maslov(imm: &GridImmersion, y: &GridVectorField) -> Result<GridOneForm> {
    check_field(imm, y)?;
    let div = rho_divergence(imm, y);
    let ddiv = imm.d_scalar(&div);
    let ric = pulled_back_ricci(imm)?;
    let n = imm.dim();
    let mut comps = vec![vec![0.0; imm.len()]; n];
    for node in 0..imm.len() {
        for a in 0..n {
            let r: f64 = (0..n).map(|b| ric[node][(a, b)] * y.comps[b][node]).sum();
            comps[a][node] = -ddiv.comps[a][node] - r;
        }
    }
    Ok(GridOneForm { comps })
}

fn check_field(imm: &GridImmersion, y: &GridVectorField) -> Result<()> {
    if y.comps.len() != imm.dim() || y.comps.iter().any(|c| c.len() != imm.len()) {
        return Err(GeomError::DimensionMismatch { expected: imm.dim(), got: y.comps.len() });
    }
    Ok(())
}

fn require_critical(imm: &GridImmersion, tol: f64) -> Result<()> {
    let sup = maslov_form(imm)?.sup_norm;
    if sup > tol {
        return Err(GeomError::NotCritical { sup, threshold: tol });
    }
    Ok(())
}

/// Per-node data the operators close over, so they outlive the immersion borrow.
struct OperatorData {
    grid: Grid,
    n: usize,
    sqrt_g: Vec<f64>,
    rho: Vec<f64>,
    /// `(A^{-1*} ·)^♯ = A⁻¹ g⁻¹`.
    m: Vec<DMatrix<f64>>,
}

impl OperatorData {
    fn new(imm: &GridImmersion, ricci: &RicciEndomorphism) -> Self {
        let geo = imm.geometry();
        Self {
            grid: imm.grid().clone(),
            n: imm.dim(),
            sqrt_g: geo.iter().map(|g| g.sqrt_det_g).collect(),
            rho: geo.iter().map(|g| g.rho_j).collect(),
            m: ricci.a_inv.iter().zip(geo).map(|(ai, g)| ai * &g.g_inv).collect(),
        }
    }

    /// `ρ⁻¹ Div(ρ (A^{-1*} β)^♯)`.
    fn div_term(&self, beta: &[Vec<f64>]) -> Vec<f64> {
        let len = self.grid.len();
        let mut out = vec![0.0; len];
        for a in 0..self.n {
            let flux: Vec<f64> = (0..len)
                .map(|node| {
                    let v: f64 = (0..self.n).map(|b| self.m[node][(a, b)] * beta[b][node]).sum();
                    v * self.rho[node] * self.sqrt_g[node]
                })
                .collect();
            for (o, d) in out.iter_mut().zip(self.grid.diff(&flux, a)) {
                *o += d;
            }
        }
        out.iter().enumerate().map(|(node, x)| x / (self.sqrt_g[node] * self.rho[node])).collect()
    }

    fn d(&self, f: &[f64]) -> Vec<Vec<f64>> {
        (0..self.n).map(|a| self.grid.diff(f, a)).collect()
    }
}

/// `L̃ f = −ρ_J⁻¹ d*(ρ_J A^{-1*} df) + f` on zero-mean scalars.
pub fn operator_ltilde(imm: &GridImmersion) -> Result<LinearOperator> {
    operator_ltilde_with(imm, Some(CRITICAL_TOL))
}

/// As [`operator_ltilde`]; `critical_tol = None` skips the criticality check.
pub fn operator_ltilde_with(imm: &GridImmersion, critical_tol: Option<f64>) -> Result<LinearOperator> {
    if let Some(tol) = critical_tol {
        require_critical(imm, tol)?;
    }
    let ricci = ricci_endomorphism(imm)?;
    let data = OperatorData::new(imm, &ricci);
    let weights = imm.weights_j();
    Ok(LinearOperator::new(imm.grid().dims(), imm.len(), Domain::ScalarZeroMean, weights, move |f| {
        let t = data.div_term(&data.d(f));
        t.iter().zip(f).map(|(a, b)| a + b).collect()
    }))
}

/// `L α = −d(ρ_J⁻¹ d*(ρ_J A^{-1*} α)) + α` on grid 1-forms.
pub fn operator_l(imm: &GridImmersion) -> Result<LinearOperator> {
    operator_l_with(imm, Some(CRITICAL_TOL))
}

pub fn operator_l_with(imm: &GridImmersion, critical_tol: Option<f64>) -> Result<LinearOperator> {
    if let Some(tol) = critical_tol {
        require_critical(imm, tol)?;
    }
    let ricci = ricci_endomorphism(imm)?;
    let data = Arc::new(OperatorData::new(imm, &ricci));
    let n = imm.dim();
    let len = imm.len();
    let weights: Vec<f64> = imm.weights_j().into_iter().cycle().take(n * len).collect();
    Ok(LinearOperator::new(imm.grid().dims(), n * len, Domain::OneForm, weights, move |x| {
        let beta: Vec<Vec<f64>> = (0..n).map(|a| x[a * len..(a + 1) * len].to_vec()).collect();
        let t = data.d(&data.div_term(&beta));
        let mut out = t.concat();
        for (o, v) in out.iter_mut().zip(x) {
            *o += v;
        }
        out
    }))
}

/// `−λ⁻¹ Δ_g f + f`, the Kähler–Einstein form of `L̃`.
pub fn ke_ltilde_reference(imm: &GridImmersion, f: &[f64]) -> Result<Vec<f64>> {
    let lambda = imm.chart().lambda().ok_or(GeomError::NoEinsteinConstant)?;
    Ok(imm.laplacian(f).iter().zip(f).map(|(l, x)| -l / lambda + x).collect())
}

#[cfg(test)]
mod tests;
