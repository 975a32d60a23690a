//! Built-in immersion families.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Grid, GridImmersion};
use crate::error::{GeomError, Result};
use crate::kahler::{DeckTransform, KahlerChart};
use crate::{CVec, C64};

/// Sample `f(θ)` on the uniform grid.
pub fn torus_from_fn(
    chart: Arc<KahlerChart>,
    dims: &[usize],
    twists: Vec<Option<usize>>,
    f: impl Fn(&[f64]) -> CVec,
) -> Result<GridImmersion> {
    let grid = Grid::new(dims);
    let points = (0..grid.len())
        .map(|node| {
            let theta: Vec<f64> = (0..dims.len()).map(|a| grid.coordinate(node, a)).collect();
            f(&theta)
        })
        .collect();
    GridImmersion::new(chart, dims, points, twists)
}

/// `θ ↦ center + r e^{iθ}` in a one-dimensional chart.
pub fn circle(chart: Arc<KahlerChart>, center: C64, radius: f64, nodes: usize) -> Result<GridImmersion> {
    if chart.dim() != 1 {
        return Err(GeomError::DimensionMismatch { expected: 1, got: chart.dim() });
    }
    torus_from_fn(chart, &[nodes], vec![None], |t| CVec::from_element(1, center + C64::from_polar(radius, t[0])))
}

/// `θ ↦ (r_1 e^{iθ_1}, …, r_n e^{iθ_n})`.
pub fn clifford_torus(chart: Arc<KahlerChart>, radii: &[f64], nodes: usize) -> Result<GridImmersion> {
    let n = chart.dim();
    if radii.len() != n {
        return Err(GeomError::DimensionMismatch { expected: n, got: radii.len() });
    }
    let dims = vec![nodes; n];
    torus_from_fn(chart, &dims, vec![None; n], |t| {
        CVec::from_fn(n, |k, _| C64::from_polar(radii[k], t[k]))
    })
}

/// Linear torus `θ ↦ Σ θ_a v_a / 2π` in flat space, closed up by the lattice translations `v_a`.
pub fn linear_torus(vectors: &[CVec], nodes: usize) -> Result<GridImmersion> {
    let n = vectors.len();
    let mut chart = KahlerChart::flat(n);
    for v in vectors {
        if v.len() != n {
            return Err(GeomError::DimensionMismatch { expected: n, got: v.len() });
        }
        chart = chart.with_deck(DeckTransform::Translation { shift: v.clone() });
    }
    let dims = vec![nodes; n];
    torus_from_fn(Arc::new(chart), &dims, (0..n).map(Some).collect(), |t| {
        let mut p = CVec::zeros(n);
        for (a, v) in vectors.iter().enumerate() {
            p += v * C64::new(t[a] / (2.0 * std::f64::consts::PI), 0.0);
        }
        p
    })
}

/// The closed geodesic `θ ↦ i e^{ℓθ/2π}` of the hyperbolic cylinder `H / ⟨z ↦ e^ℓ z⟩`.
/// The chart must carry the dilation as deck transformation `deck`.
pub fn core_geodesic(chart: Arc<KahlerChart>, deck: usize, length: f64, nodes: usize) -> Result<GridImmersion> {
    torus_from_fn(chart, &[nodes], vec![Some(deck)], |t| {
        CVec::from_element(1, C64::new(0.0, (length * t[0] / (2.0 * std::f64::consts::PI)).exp()))
    })
}

/// Clifford-type torus plus a random band-limited perturbation.
#[derive(Debug, Clone)]
pub struct RandomTorusSpec {
    pub center: CVec,
    pub radii: Vec<f64>,
    pub amplitude: f64,
    pub modes: i32,
    pub seed: u64,
}

pub fn random_torus(chart: Arc<KahlerChart>, spec: &RandomTorusSpec, nodes: usize) -> Result<GridImmersion> {
    let n = chart.dim();
    if spec.radii.len() != n || spec.center.len() != n {
        return Err(GeomError::DimensionMismatch { expected: n, got: spec.radii.len() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut terms: Vec<(usize, Vec<i32>, C64)> = Vec::new();
    let m = spec.modes;
    let mut wave = vec![-m; n];
    loop {
        for k in 0..n {
            let coef = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let order: i32 = wave.iter().map(|x| x.abs()).sum();
            terms.push((k, wave.clone(), coef * spec.amplitude / (1.0 + order as f64).powi(2)));
        }
        let mut a = 0;
        while a < n {
            wave[a] += 1;
            if wave[a] <= m {
                break;
            }
            wave[a] = -m;
            a += 1;
        }
        if a == n {
            break;
        }
    }
    let dims = vec![nodes; n];
    torus_from_fn(chart, &dims, vec![None; n], |t| {
        let mut p = CVec::from_fn(n, |k, _| spec.center[k] + C64::from_polar(spec.radii[k], t[k]));
        for (k, wave, coef) in &terms {
            let phase: f64 = wave.iter().zip(t).map(|(w, x)| *w as f64 * x).sum();
            p[*k] += coef * C64::from_polar(1.0, phase);
        }
        p
    })
}
