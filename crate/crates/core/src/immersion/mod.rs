//! Periodic grid immersions of `T^n` (optionally deck-twisted) into a chart.

mod calculus;
mod csvio;
mod families;
mod stencil;

pub use calculus::{GridOneForm, GridScalarField, GridTwoForm, GridVectorField};
pub use csvio::{load_csv, save_csv};
pub use families::{
    circle, clifford_torus, core_geodesic, linear_torus, random_torus, torus_from_fn, RandomTorusSpec,
};
pub use stencil::{Grid, D1, STENCIL_RADIUS};

use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{GeomError, Result};
use crate::kahler::KahlerChart;
use crate::trlinalg::{self, HermitianStructure, TangentFrame};
use crate::{CMat, CVec, C64};

/// Frames whose `|det_C|` falls below this are rejected.
pub const FRAME_TOL: f64 = 1e-10;

/// Per-node pointwise data derived from the immersion.
#[derive(Debug, Clone)]
pub struct NodeGeometry {
    pub h: HermitianStructure,
    /// Induced metric `g_ab = Re h(∂_a ι, ∂_b ι)`.
    pub g: DMatrix<f64>,
    pub g_inv: DMatrix<f64>,
    pub sqrt_det_g: f64,
    pub rho_j: f64,
    /// `g`-orthonormalised tangent frame.
    pub onframe: TangentFrame,
}

#[derive(Debug, Clone)]
pub struct GridImmersion {
    chart: Arc<KahlerChart>,
    grid: Grid,
    points: Vec<CVec>,
    twists: Vec<Option<usize>>,
    frames: Vec<TangentFrame>,
    geometry: Vec<NodeGeometry>,
}

/// `vol_g` density, `ρ_J` and `vol_J` density per node, in grid coordinates.
#[derive(Debug, Clone)]
pub struct VolumeFields {
    pub vol_g: Vec<f64>,
    pub rho_j: Vec<f64>,
    pub vol_j: Vec<f64>,
}

impl GridImmersion {
    /// `twists[a] = Some(k)` closes axis `a` up with deck transformation `k`:
    /// `ι(θ + 2π e_a) = γ_k(ι(θ))`.
    pub fn new(chart: Arc<KahlerChart>, dims: &[usize], points: Vec<CVec>, twists: Vec<Option<usize>>) -> Result<Self> {
        let grid = Grid::new(dims);
        if dims.is_empty() || dims.len() != chart.dim() {
            return Err(GeomError::DimensionMismatch { expected: chart.dim(), got: dims.len() });
        }
        if dims.iter().any(|&d| d < 2 * STENCIL_RADIUS + 1) {
            return Err(GeomError::InvalidImmersion(format!("resolution {dims:?} too small for the stencil")));
        }
        if points.len() != grid.len() {
            return Err(GeomError::DimensionMismatch { expected: grid.len(), got: points.len() });
        }
        if twists.len() != dims.len() {
            return Err(GeomError::DimensionMismatch { expected: dims.len(), got: twists.len() });
        }
        for t in twists.iter().flatten() {
            if *t >= chart.decks().len() {
                return Err(GeomError::InvalidImmersion(format!("twist refers to missing deck transformation {t}")));
            }
        }
        if let Some(bad) = points.iter().position(|p| !chart.in_domain(p)) {
            return Err(GeomError::InvalidImmersion(format!("node {bad} lies outside the chart domain")));
        }
        let mut imm = Self { chart, grid, points, twists, frames: Vec::new(), geometry: Vec::new() };
        let frames = imm.compute_frames()?;
        imm.frames = frames;
        imm.geometry = imm.compute_geometry()?;
        Ok(imm)
    }

    /// Same node positions in another chart of the same dimension (e.g. a perturbed one).
    pub fn with_chart(&self, chart: Arc<KahlerChart>) -> Result<Self> {
        Self::new(chart, self.grid.dims(), self.points.clone(), self.twists.clone())
    }

    /// New node positions on the same grid and chart.
    pub fn with_points(&self, points: Vec<CVec>) -> Result<Self> {
        Self::new(self.chart.clone(), self.grid.dims(), points, self.twists.clone())
    }

    pub fn chart(&self) -> &KahlerChart {
        &self.chart
    }

    pub fn chart_arc(&self) -> Arc<KahlerChart> {
        self.chart.clone()
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.ndim()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[CVec] {
        &self.points
    }

    pub fn twists(&self) -> &[Option<usize>] {
        &self.twists
    }

    pub fn node(&self, node: usize) -> &NodeGeometry {
        &self.geometry[node]
    }

    pub fn geometry(&self) -> &[NodeGeometry] {
        &self.geometry
    }

    pub fn tangent_frame(&self, node: usize) -> Result<&TangentFrame> {
        self.frames.get(node).ok_or(GeomError::InvalidImmersion(format!("no node {node}")))
    }

    pub fn frames(&self) -> &[TangentFrame] {
        &self.frames
    }

    /// Deck map applied to a value sampled `wraps` periods away along `axis`.
    fn deck_for(&self, axis: usize, wraps: i32, p: &CVec) -> Result<Option<CMat>> {
        if wraps == 0 {
            return Ok(None);
        }
        let Some(k) = self.twists[axis] else { return Ok(None) };
        let mut q = p.clone();
        let mut jac = CMat::identity(p.len(), p.len());
        for _ in 0..wraps.unsigned_abs() {
            let (next, d) = self.chart.deck_apply(k, &q, wraps < 0)?;
            jac = d * jac;
            q = next;
        }
        Ok(Some(jac))
    }

    /// Chart point `offset` steps from `node` along `axis`, continued through the twist.
    pub fn ghost_point(&self, node: usize, axis: usize, offset: isize) -> Result<CVec> {
        let (nb, wraps) = self.grid.shift(node, axis, offset);
        let mut q = self.points[nb].clone();
        if wraps != 0 {
            if let Some(k) = self.twists[axis] {
                for _ in 0..wraps.unsigned_abs() {
                    q = self.chart.deck_apply(k, &q, wraps < 0)?.0;
                }
            }
        }
        Ok(q)
    }

    /// Fourth-order derivative along `axis` of an ambient vector field sampled at the
    /// nodes; values read across a twisted seam are pushed forward by `dγ`.
    pub fn diff_ambient(&self, field: &[CVec], axis: usize) -> Result<Vec<CVec>> {
        let h = C64::new(self.grid.step(axis), 0.0);
        (0..self.len())
            .into_par_iter()
            .map(|node| {
                let mut acc = CVec::zeros(self.chart.dim());
                for &(o, w) in D1.iter() {
                    let (nb, wraps) = self.grid.shift(node, axis, o);
                    let v = match self.deck_for(axis, wraps, &self.points[nb])? {
                        Some(jac) => jac * &field[nb],
                        None => field[nb].clone(),
                    };
                    acc += v * C64::new(w, 0.0);
                }
                Ok(acc / h)
            })
            .collect()
    }

    fn compute_frames(&self) -> Result<Vec<TangentFrame>> {
        let n = self.dim();
        let mut cols: Vec<Vec<CVec>> = vec![Vec::with_capacity(n); self.len()];
        for axis in 0..n {
            let h = C64::new(self.grid.step(axis), 0.0);
            let d: Vec<CVec> = (0..self.len())
                .into_par_iter()
                .map(|node| {
                    let mut acc = CVec::zeros(n);
                    for &(o, w) in D1.iter() {
                        acc += self.ghost_point(node, axis, o)? * C64::new(w, 0.0);
                    }
                    Ok(acc / h)
                })
                .collect::<Result<_>>()?;
            for (node, v) in d.into_iter().enumerate() {
                cols[node].push(v);
            }
        }
        cols.into_iter()
            .enumerate()
            .map(|(node, c)| {
                let f = TangentFrame::from_columns(&c)?;
                let scale: f64 = c.iter().map(|v| v.norm()).product::<f64>().max(f64::MIN_POSITIVE);
                let defect = trlinalg::totally_real_defect(&f);
                if !(defect > FRAME_TOL * scale.max(1.0)) || !(scale > FRAME_TOL) {
                    return Err(GeomError::InvalidImmersion(format!(
                        "tangent frame at node {node} is not totally real (|det| = {defect:.3e})"
                    )));
                }
                Ok(f)
            })
            .collect()
    }

    fn compute_geometry(&self) -> Result<Vec<NodeGeometry>> {
        (0..self.len())
            .into_par_iter()
            .map(|node| {
                let h = self.chart.metric_at(&self.points[node])?;
                let frame = &self.frames[node];
                let n = self.dim();
                let g = DMatrix::from_fn(n, n, |a, b| h.metric(&frame.column(a), &frame.column(b)));
                let det = g.determinant();
                let g_inv = g.clone().try_inverse().ok_or(GeomError::InvalidImmersion(format!(
                    "degenerate induced metric at node {node}"
                )))?;
                let onframe = trlinalg::orthonormalize(frame, &h)
                    .map_err(|e| GeomError::InvalidImmersion(format!("node {node}: {e}")))?;
                let rho_j = trlinalg::hermitian_gram(&onframe, &h)?.determinant().re.max(0.0).sqrt();
                Ok(NodeGeometry { h, g, g_inv, sqrt_det_g: det.sqrt(), rho_j, onframe })
            })
            .collect()
    }

    pub fn volume_fields(&self) -> VolumeFields {
        let vol_g: Vec<f64> = self.geometry.iter().map(|g| g.sqrt_det_g).collect();
        let rho_j: Vec<f64> = self.geometry.iter().map(|g| g.rho_j).collect();
        let vol_j = vol_g.iter().zip(&rho_j).map(|(a, b)| a * b).collect();
        VolumeFields { vol_g, rho_j, vol_j }
    }

    /// `(Vol_g, Vol_J)` by the periodic trapezoid rule.
    pub fn total_volumes(&self) -> (f64, f64) {
        let v = self.volume_fields();
        (self.grid.integrate(&v.vol_g), self.grid.integrate(&v.vol_j))
    }

    /// Sup over nodes of the Lagrangian defect of the tangent plane.
    pub fn lagrangian_defect(&self) -> f64 {
        self.geometry
            .iter()
            .map(|g| {
                let e = &g.onframe;
                let n = e.dim();
                let mut worst = 0.0_f64;
                for i in 0..n {
                    for j in (i + 1)..n {
                        worst = worst.max(g.h.omega(&e.column(i), &e.column(j)).abs());
                    }
                }
                worst
            })
            .fold(0.0, f64::max)
    }

    /// Components `form(∂_a ι, ∂_b ι)`, `a < b`, of a real 2-form given as a
    /// `2n × 2n` matrix in the real basis of the chart.
    pub fn pullback_two_form(
        &self,
        form: impl Fn(&CVec) -> Result<DMatrix<f64>> + Sync,
    ) -> Result<GridTwoForm> {
        let n = self.dim();
        let pairs = GridTwoForm::pairs(n);
        let per_node: Vec<Vec<f64>> = (0..self.len())
            .into_par_iter()
            .map(|node| {
                let m = form(&self.points[node])?;
                let f = &self.frames[node];
                let cols: Vec<_> = (0..n).map(|a| trlinalg::to_real(&f.column(a))).collect();
                Ok(pairs.iter().map(|&(a, b)| (cols[a].transpose() * &m * &cols[b])[(0, 0)]).collect())
            })
            .collect::<Result<_>>()?;
        let comps = (0..pairs.len()).map(|k| per_node.iter().map(|v| v[k]).collect()).collect();
        Ok(GridTwoForm { n, comps })
    }

    /// Push a tangent vector field forward to ambient coordinates.
    pub fn push_forward(&self, v: &GridVectorField) -> Vec<CVec> {
        (0..self.len())
            .map(|node| {
                let f = &self.frames[node];
                let mut w = CVec::zeros(self.chart.dim());
                for a in 0..self.dim() {
                    w += f.column(a) * C64::new(v.comps[a][node], 0.0);
                }
                w
            })
            .collect()
    }

    /// Nodes moved along ambient geodesics with initial velocities `v`.
    pub fn displaced(&self, v: &[CVec], exp_steps: usize) -> Result<Self> {
        let points: Vec<CVec> = self
            .points
            .par_iter()
            .zip(v.par_iter())
            .map(|(p, w)| self.chart.ambient_exp(p, w, exp_steps))
            .collect::<Result<_>>()?;
        self.with_points(points)
    }
}

#[cfg(test)]
mod tests;
