//! Kähler manifolds presented as single charts with closed-form potentials.
//!
//! Every chart exposes the jet of its Hermitian matrix `h = 2∂∂̄K` up to the
//! mixed second derivatives, which is all that the Christoffel symbols, the
//! Ricci form and the Moser fields require.

mod deck;
mod potential;

pub use deck::DeckTransform;
pub use potential::{log_derivative, radial_derivative, ConformalJet, LogPeriodicConformal, Polynomial};

use nalgebra::DMatrix;

use crate::error::{GeomError, Result};
use crate::trlinalg::{real_form, HermitianStructure};
use crate::{CMat, CVec, C64};

/// Chart coordinates of a point.
pub type ChartPoint = CVec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChartKind {
    /// `K = |z|²/2`.
    Flat,
    /// `K = c log(1 + |z|²)`.
    FubiniStudy { c: f64 },
    /// `K = −c log(1 − |z|²)` on the unit ball.
    ComplexHyperbolicBall { c: f64 },
    /// `K = −c log(Im z)`, `n = 1`.
    UpperHalfPlane { c: f64 },
}

/// `h`, `∂_k h` and `∂̄_l ∂_k h` at a point; `ddh[k][l] = ∂̄_l ∂_k h`.
#[derive(Debug, Clone)]
pub struct MetricJet {
    pub h: CMat,
    pub dh: Vec<CMat>,
    pub ddh: Vec<Vec<CMat>>,
}

/// Ricci data at a point: the Hermitian matrix `R = −2∂∂̄ log det h` and the
/// real `2n × 2n` matrices of `ρ̄ = −Im R` and `Ric = Re R`.
#[derive(Debug, Clone)]
pub struct RicciForm {
    pub r: CMat,
    pub rho: DMatrix<f64>,
    pub ric: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KahlerChart {
    n: usize,
    kind: ChartKind,
    potential: Option<Polynomial>,
    conformal: Option<LogPeriodicConformal>,
    decks: Vec<DeckTransform>,
    lambda: Option<f64>,
}

impl KahlerChart {
    fn with_kind(n: usize, kind: ChartKind, lambda: Option<f64>) -> Self {
        Self { n, kind, potential: None, conformal: None, decks: Vec::new(), lambda }
    }

    pub fn flat(n: usize) -> Self {
        Self::with_kind(n, ChartKind::Flat, Some(0.0))
    }

    pub fn fubini_study(n: usize, c: f64) -> Self {
        Self::with_kind(n, ChartKind::FubiniStudy { c }, Some((n + 1) as f64 / c))
    }

    pub fn complex_hyperbolic_ball(n: usize, c: f64) -> Self {
        Self::with_kind(n, ChartKind::ComplexHyperbolicBall { c }, Some(-((n + 1) as f64) / c))
    }

    pub fn upper_half_plane(c: f64) -> Self {
        Self::with_kind(1, ChartKind::UpperHalfPlane { c }, Some(-2.0 / c))
    }

    pub fn with_deck(mut self, deck: DeckTransform) -> Self {
        self.decks.push(deck);
        self
    }

    /// Add `φ` to the potential. The declared Einstein constant is kept as the
    /// reference value for [`KahlerChart::einstein_defect`].
    pub fn with_potential_perturbation(mut self, phi: Polynomial) -> Self {
        if !phi.is_empty() {
            self.potential = Some(phi);
        }
        self
    }

    /// Multiply the metric by `e^{2u}`; only available for `n = 1`.
    pub fn with_conformal(mut self, u: LogPeriodicConformal) -> Result<Self> {
        if self.n != 1 {
            return Err(GeomError::DimensionMismatch { expected: 1, got: self.n });
        }
        if u.amplitude != 0.0 {
            self.conformal = Some(u);
        }
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> ChartKind {
        self.kind
    }

    pub fn lambda(&self) -> Option<f64> {
        self.lambda
    }

    pub fn decks(&self) -> &[DeckTransform] {
        &self.decks
    }

    pub fn is_perturbed(&self) -> bool {
        self.potential.is_some() || self.conformal.is_some()
    }

    pub fn potential_perturbation(&self) -> Option<&Polynomial> {
        self.potential.as_ref()
    }

    pub fn is_flat(&self) -> bool {
        self.kind == ChartKind::Flat && !self.is_perturbed()
    }

    fn base_in_domain(&self, p: &CVec) -> bool {
        if p.len() != self.n || p.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return false;
        }
        match self.kind {
            ChartKind::Flat | ChartKind::FubiniStudy { .. } => true,
            ChartKind::ComplexHyperbolicBall { .. } => p.iter().map(|z| z.norm_sqr()).sum::<f64>() < 1.0,
            ChartKind::UpperHalfPlane { .. } => p[0].im > 0.0,
        }
    }

    pub fn in_domain(&self, p: &CVec) -> bool {
        if !self.base_in_domain(p) {
            return false;
        }
        if self.is_perturbed() {
            return positive_definite(&self.raw_jet(p, 0).h);
        }
        true
    }

    fn check(&self, p: &CVec) -> Result<()> {
        if p.len() != self.n {
            return Err(GeomError::DimensionMismatch { expected: self.n, got: p.len() });
        }
        if !self.in_domain(p) {
            return Err(GeomError::OutOfDomain);
        }
        Ok(())
    }

    /// `∂^{holo} ∂̄^{anti}` of the unperturbed potential.
    fn potential_derivative(&self, z: &CVec, holo: &[usize], anti: &[usize]) -> C64 {
        
        match self.kind {
            ChartKind::Flat => radial_derivative(flat_profile, z, holo, anti),
            ChartKind::FubiniStudy { c } => radial_derivative(|m, s| c * log_derivative(m, 1.0 + s), z, holo, anti),
            ChartKind::ComplexHyperbolicBall { c } => radial_derivative(
                |m, s| {
                    let sign = if m % 2 == 1 { -1.0 } else { 1.0 };
                    -c * sign * log_derivative(m, 1.0 - s)
                },
                z,
                holo,
                anti,
            ),
            ChartKind::UpperHalfPlane { c } => {
                potential::half_plane_derivative(c, z[0], holo.len(), anti.len())
            }
        }
    }

    /// The potential `K(p)` (conformal factors have no potential and are ignored).
    pub fn potential(&self, p: &CVec) -> Result<f64> {
        self.check(p)?;
        let phi = self.potential.as_ref().map_or(0.0, |phi| phi.derivative(p, &[], &[]).re);
        Ok(self.potential_derivative(p, &[], &[]).re + phi)
    }

    /// `F^{(m)}(s)` of the radial profile `K = F(|z|²)`, if the chart is radial.
    fn radial_profile(&self, m: usize, s: f64) -> Option<f64> {
        match self.kind {
            ChartKind::Flat => Some(flat_profile(m, s)),
            ChartKind::FubiniStudy { c } => Some(c * log_derivative(m, 1.0 + s)),
            ChartKind::ComplexHyperbolicBall { c } => {
                let sign = if m % 2 == 1 { -1.0 } else { 1.0 };
                Some(-c * sign * log_derivative(m, 1.0 - s))
            }
            ChartKind::UpperHalfPlane { .. } => None,
        }
    }

    fn raw_jet(&self, z: &CVec, order: usize) -> MetricJet {
        let n = self.n;
        let two = C64::new(2.0, 0.0);
        let mut jet = match self.radial_jet(z, order) {
            Some(jet) => jet,
            None => {
                let base = |holo: &[usize], anti: &[usize]| match self.kind {
                    ChartKind::UpperHalfPlane { c } => {
                        potential::half_plane_derivative(c, z[0], holo.len(), anti.len())
                    }
                    _ => self.potential_derivative(z, holo, anti),
                };
                generic_jet(n, order, |h, a| two * base(h, a))
            }
        };
        if let Some(phi) = &self.potential {
            let extra = generic_jet(n, order, |h, a| two * phi.derivative(z, h, a));
            jet.h += extra.h;
            for (a, b) in jet.dh.iter_mut().zip(extra.dh) {
                *a += b;
            }
            for (ra, rb) in jet.ddh.iter_mut().zip(extra.ddh) {
                for (a, b) in ra.iter_mut().zip(rb) {
                    *a += b;
                }
            }
        }
        match &self.conformal {
            Some(u) => conformal_jet(jet, u.jet(z[0]), order),
            None => jet,
        }
    }

    /// Closed-form jet of `h = 2∂∂̄F(|z|²)` (without the polynomial part).
    fn radial_jet(&self, z: &CVec, order: usize) -> Option<MetricJet> {
        let s: f64 = z.iter().map(|w| w.norm_sqr()).sum();
        let f: Vec<C64> = (1..=4)
            .map(|m| self.radial_profile(m, s).map(|v| C64::new(2.0 * v, 0.0)))
            .collect::<Option<_>>()?;
        let n = self.n;
        let zb = z.map(|w| w.conj());
        let d = |i: usize, j: usize| if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
        let h = CMat::from_fn(n, n, |i, j| f[0] * d(i, j) + f[1] * zb[i] * z[j]);
        let dh = if order >= 1 {
            (0..n)
                .map(|k| {
                    CMat::from_fn(n, n, |i, j| {
                        f[1] * (zb[k] * d(i, j) + zb[i] * d(k, j)) + f[2] * zb[i] * zb[k] * z[j]
                    })
                })
                .collect()
        } else {
            Vec::new()
        };
        let ddh = if order >= 2 {
            (0..n)
                .map(|k| {
                    (0..n)
                        .map(|l| {
                            CMat::from_fn(n, n, |i, j| {
                                f[3] * z[l] * zb[i] * zb[k] * z[j]
                                    + f[2]
                                        * (z[l] * zb[k] * d(i, j)
                                            + z[l] * zb[i] * d(k, j)
                                            + d(i, l) * zb[k] * z[j]
                                            + d(k, l) * zb[i] * z[j])
                                    + f[1] * (d(k, l) * d(i, j) + d(i, l) * d(k, j))
                            })
                        })
                        .collect()
                })
                .collect()
        } else {
            Vec::new()
        };
        Some(MetricJet { h, dh, ddh })
    }

    /// Jet of `h` up to `order` (0: `h`, 1: `∂h`, 2: `∂̄∂h`).
    pub fn jet(&self, p: &CVec, order: usize) -> Result<MetricJet> {
        if order > 2 {
            return Err(GeomError::DerivativeOrderUnavailable { order });
        }
        self.check(p)?;
        Ok(self.raw_jet(p, order))
    }

    pub fn metric_at(&self, p: &CVec) -> Result<HermitianStructure> {
        Ok(HermitianStructure::from_matrix_unchecked(self.jet(p, 0)?.h))
    }

    /// `Γ_i` with `Γ_i[(k, j)] = Γ^k_{ij} = h^{k l̄} ∂_i h_{j l̄}`.
    pub fn christoffel_at(&self, p: &CVec) -> Result<Vec<CMat>> {
        let jet = self.jet(p, 1)?;
        let hinv = invert(&jet.h)?;
        Ok(jet.dh.iter().map(|m| (m * &hinv).transpose()).collect())
    }

    /// `Γ(u, v)^k = Γ^k_{ij} u^i v^j`.
    pub fn christoffel_contract(&self, p: &CVec, u: &CVec, v: &CVec) -> Result<CVec> {
        if self.is_flat() {
            return Ok(CVec::zeros(self.n));
        }
        let jet = self.jet(p, 1)?;
        christoffel_from_jet(&jet, u, v)
    }

    /// `∂_i log det h = tr(h⁻¹ ∂_i h)`.
    pub fn log_det_gradient(&self, p: &CVec) -> Result<CVec> {
        let jet = self.jet(p, 1)?;
        let hinv = invert(&jet.h)?;
        Ok(CVec::from_iterator(self.n, jet.dh.iter().map(|m| (&hinv * m).trace())))
    }

    pub fn ricci_form_at(&self, p: &CVec) -> Result<RicciForm> {
        let jet = self.jet(p, 2)?;
        let n = self.n;
        let hinv = invert(&jet.h)?;
        let r = CMat::from_fn(n, n, |k, l| {
            let dbar_l = jet.dh[l].adjoint();
            let a = (&hinv * &jet.ddh[k][l]).trace();
            let b = (&hinv * &jet.dh[k] * &hinv * dbar_l).trace();
            (a - b) * -2.0
        });
        let rho = real_form(&r, |z| -z.im);
        let ric = real_form(&r, |z| z.re);
        Ok(RicciForm { r, rho, ric })
    }

    /// Operator norm of `ρ̄ − λω̄`.
    pub fn einstein_defect(&self, p: &CVec) -> Result<f64> {
        let lambda = self.lambda.ok_or(GeomError::NoEinsteinConstant)?;
        let rf = self.ricci_form_at(p)?;
        let omega = self.metric_at(p)?.real_omega();
        Ok(operator_norm(&(rf.rho - omega * lambda)))
    }

    /// Gauss curvature of a one-dimensional chart, `R / h`.
    pub fn gauss_curvature(&self, p: &CVec) -> Result<f64> {
        if self.n != 1 {
            return Err(GeomError::DimensionMismatch { expected: 1, got: self.n });
        }
        let rf = self.ricci_form_at(p)?;
        let h = self.jet(p, 0)?.h;
        Ok(rf.r[(0, 0)].re / h[(0, 0)].re)
    }

    /// `γ_k(p)` (or `γ_k⁻¹(p)`) and its Jacobian.
    pub fn deck_apply(&self, k: usize, p: &CVec, inverse: bool) -> Result<(CVec, CMat)> {
        let deck = self.decks.get(k).ok_or(GeomError::InvalidImmersion(format!("no deck transformation {k}")))?;
        self.check(p)?;
        let (q, dq) = if inverse { deck.inverse().apply(p) } else { deck.apply(p) };
        if !self.in_domain(&q) {
            return Err(GeomError::OutOfDomain);
        }
        Ok((q, dq))
    }

    /// `‖dγᵀ h(γp) conj(dγ) − h(p)‖`, zero for an isometry.
    pub fn isometry_defect(&self, k: usize, p: &CVec) -> Result<f64> {
        let (q, dq) = self.deck_apply(k, p, false)?;
        let hq = self.jet(&q, 0)?.h;
        let hp = self.jet(p, 0)?.h;
        let pulled = dq.transpose() * hq * dq.map(|z| z.conj());
        Ok((pulled - hp).norm())
    }

    /// Geodesic `z̈ + Γ(ż, ż) = 0` from `p` with velocity `v` over unit time,
    /// fixed-step classical Runge–Kutta.
    pub fn ambient_exp(&self, p: &CVec, v: &CVec, steps: usize) -> Result<CVec> {
        self.geodesic(p, v, steps).map(|(z, _)| z)
    }

    /// Endpoint and final velocity of the geodesic.
    pub fn geodesic(&self, p: &CVec, v: &CVec, steps: usize) -> Result<(CVec, CVec)> {
        self.check(p).map_err(|_| GeomError::OutOfDomain)?;
        if self.is_flat() {
            return Ok((p + v, v.clone()));
        }
        let dt = 1.0 / steps.max(1) as f64;
        let accel = |z: &CVec, w: &CVec| -> Result<CVec> {
            if !self.in_domain(z) {
                return Err(GeomError::LeftDomain);
            }
            let jet = self.raw_jet(z, 1);
            Ok(-christoffel_from_jet(&jet, w, w)?)
        };
        let (mut z, mut w) = (p.clone(), v.clone());
        let half = C64::new(0.5 * dt, 0.0);
        let full = C64::new(dt, 0.0);
        let sixth = C64::new(dt / 6.0, 0.0);
        for _ in 0..steps.max(1) {
            let (k1z, k1w) = (w.clone(), accel(&z, &w)?);
            let (z2, w2) = (&z + &k1z * half, &w + &k1w * half);
            let (k2z, k2w) = (w2.clone(), accel(&z2, &w2)?);
            let (z3, w3) = (&z + &k2z * half, &w + &k2w * half);
            let (k3z, k3w) = (w3.clone(), accel(&z3, &w3)?);
            let (z4, w4) = (&z + &k3z * full, &w + &k3w * full);
            let (k4z, k4w) = (w4.clone(), accel(&z4, &w4)?);
            let two = C64::new(2.0, 0.0);
            z += (k1z + k2z * two + k3z * two + k4z) * sixth;
            w += (k1w + k2w * two + k3w * two + k4w) * sixth;
        }
        if !self.in_domain(&z) {
            return Err(GeomError::LeftDomain);
        }
        Ok((z, w))
    }
}

/// Cholesky pivots of a Hermitian matrix, checked for positivity
/// (nalgebra's complex Cholesky takes square roots of negative pivots without failing).
fn positive_definite(h: &CMat) -> bool {
    let n = h.nrows();
    let mut l = CMat::zeros(n, n);
    for j in 0..n {
        let mut d = h[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > 0.0) {
            return false;
        }
        let d = d.sqrt();
        l[(j, j)] = C64::new(d, 0.0);
        for i in (j + 1)..n {
            let mut v = h[(i, j)];
            for k in 0..j {
                v -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = v / d;
        }
    }
    true
}

fn generic_jet(n: usize, order: usize, entry: impl Fn(&[usize], &[usize]) -> C64) -> MetricJet {
    let h = CMat::from_fn(n, n, |i, j| entry(&[i], &[j]));
    let dh = if order >= 1 {
        (0..n).map(|k| CMat::from_fn(n, n, |i, j| entry(&[k, i], &[j]))).collect()
    } else {
        Vec::new()
    };
    let ddh = if order >= 2 {
        (0..n)
            .map(|k| (0..n).map(|l| CMat::from_fn(n, n, |i, j| entry(&[k, i], &[j, l]))).collect())
            .collect()
    } else {
        Vec::new()
    };
    MetricJet { h, dh, ddh }
}

fn flat_profile(m: usize, s: f64) -> f64 {
    match m {
        0 => 0.5 * s,
        1 => 0.5,
        _ => 0.0,
    }
}

fn conformal_jet(jet: MetricJet, u: ConformalJet, order: usize) -> MetricJet {
    let e = C64::new((2.0 * u.u).exp(), 0.0);
    let uz = u.uz * 2.0;
    let uzb = uz.conj();
    let h = &jet.h * e;
    let dh = if order >= 1 { vec![(&jet.h * uz + &jet.dh[0]) * e] } else { Vec::new() };
    let ddh = if order >= 2 {
        let hz = &jet.dh[0];
        let hzb = hz.adjoint();
        let inner = (&jet.h * uz + hz) * uzb + &jet.h * C64::new(2.0 * u.uzzb, 0.0) + hzb * uz + &jet.ddh[0][0];
        vec![vec![inner * e]]
    } else {
        Vec::new()
    };
    MetricJet { h, dh, ddh }
}

fn invert(h: &CMat) -> Result<CMat> {
    h.clone().try_inverse().ok_or(GeomError::NotHermitian("singular metric".into()))
}

fn christoffel_from_jet(jet: &MetricJet, u: &CVec, v: &CVec) -> Result<CVec> {
    let n = u.len();
    let mut m = CMat::zeros(n, n);
    for (i, dh) in jet.dh.iter().enumerate() {
        m += dh * u[i];
    }
    // Γ(u, v) = h^{-T} (Σ u_i ∂_i h)ᵀ v.
    let rhs = m.transpose() * v;
    jet.h.transpose().lu().solve(&rhs).ok_or(GeomError::NotHermitian("singular metric".into()))
}

pub(crate) fn operator_norm(m: &DMatrix<f64>) -> f64 {
    m.clone().singular_values().iter().cloned().fold(0.0, f64::max)
}

/// A one-parameter family of charts `t ↦ base + t·φ` (and `e^{2tu}`).
#[derive(Debug, Clone, PartialEq)]
pub struct ChartPath {
    pub base: KahlerChart,
    pub potential: Option<Polynomial>,
    pub conformal: Option<LogPeriodicConformal>,
}

impl ChartPath {
    pub fn constant(base: KahlerChart) -> Self {
        Self { base, potential: None, conformal: None }
    }

    pub fn at(&self, t: f64) -> Result<KahlerChart> {
        let mut chart = self.base.clone();
        if let Some(phi) = &self.potential {
            let scaled = phi.scaled(t);
            chart.potential = Some(match chart.potential.take() {
                Some(existing) => merge(existing, scaled),
                None => scaled,
            });
        }
        if let Some(u) = &self.conformal {
            chart = chart.with_conformal(u.scaled(t))?;
        }
        Ok(chart)
    }

    pub fn is_constant(&self) -> bool {
        self.potential.is_none() && self.conformal.is_none()
    }
}

fn merge(a: Polynomial, b: Polynomial) -> Polynomial {
    a.extend(b)
}
