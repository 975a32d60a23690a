//! Finite-difference Jacobian of the curve residual with column colouring.
//!
//! Moving `f_j` changes `α` within the stencil radius of `j`, hence the node
//! positions there, their tangents one radius further and `ξ_J` (which
//! differentiates the unit frame) one more. Columns whose supports are
//! disjoint share a colour and are evaluated together.

use nalgebra::DMatrix;

use super::{Unknown, WeinsteinMap};
use crate::error::{GeomError, Result};
use crate::immersion::{GridOneForm, STENCIL_RADIUS};
use crate::maslov::loop_integrals;

/// Half-width of the support of one column of `∂ξ/∂f`.
pub const SUPPORT: usize = 3 * STENCIL_RADIUS;
/// Central-difference step.
pub const STEP: f64 = 1e-9;

fn colours(len: usize) -> usize {
    (2 * SUPPORT + 1..=len / 2).find(|k| len.is_multiple_of(*k)).unwrap_or(len)
}

/// `∂(F̃, loop)/∂(f, c)` at `x`.
pub fn colored(map: &WeinsteinMap, x: &Unknown) -> Result<DMatrix<f64>> {
    let base = map.base();
    if base.dim() != 1 {
        return Err(GeomError::Unsupported("coloured Jacobians are implemented for curves".into()));
    }
    let len = base.len();
    let k = colours(len);
    let mut dxi = DMatrix::zeros(len, map.unknowns());
    let xi_at = |y: &Unknown| -> Result<Vec<f64>> { Ok(map.evaluate(y)?.xi.comps[0].clone()) };
    let central = |shift: &dyn Fn(&mut Unknown, f64)| -> Result<Vec<f64>> {
        let (mut p, mut m) = (x.clone(), x.clone());
        shift(&mut p, STEP);
        shift(&mut m, -STEP);
        let (a, b) = (xi_at(&p)?, xi_at(&m)?);
        Ok(a.iter().zip(&b).map(|(u, v)| (u - v) / (2.0 * STEP)).collect())
    };
    for colour in 0..k {
        let col = central(&|y: &mut Unknown, s: f64| {
            for j in (colour..len).step_by(k) {
                y.f[j] += s;
            }
        })?;
        for (m, v) in col.into_iter().enumerate() {
            let below = m as isize - ((m + k - colour) % k) as isize;
            for j in [below, below + k as isize] {
                let j = j.rem_euclid(len as isize) as usize;
                let dist = (m as isize - j as isize).rem_euclid(len as isize) as usize;
                if dist.min(len - dist) <= SUPPORT {
                    dxi[(m, j)] = v;
                }
            }
        }
    }
    if map.has_flux() {
        let col = central(&|y: &mut Unknown, s: f64| y.c += s)?;
        dxi.set_column(len, &nalgebra::DVector::from_vec(col));
    }
    let mut jac = DMatrix::zeros(map.unknowns(), map.unknowns());
    for c in 0..map.unknowns() {
        let form = GridOneForm { comps: vec![dxi.column(c).iter().copied().collect()] };
        let loops = loop_integrals(base, &form);
        let r = map.residual_of(&form, &loops);
        jac.set_column(c, &nalgebra::DVector::from_vec(r));
    }
    Ok(jac)
}

#[cfg(test)]
pub(super) fn plain(map: &WeinsteinMap, x: &Unknown) -> Result<DMatrix<f64>> {
    let base = map.base();
    let len = base.len();
    let mut jac = DMatrix::zeros(map.unknowns(), map.unknowns());
    for c in 0..map.unknowns() {
        let (mut p, mut m) = (x.clone(), x.clone());
        if c < len {
            p.f[c] += STEP;
            m.f[c] -= STEP;
        } else {
            p.c += STEP;
            m.c -= STEP;
        }
        let (a, b) = (map.evaluate(&p)?.residual, map.evaluate(&m)?.residual);
        let col: Vec<f64> = a.iter().zip(&b).map(|(u, v)| (u - v) / (2.0 * STEP)).collect();
        jac.set_column(c, &nalgebra::DVector::from_vec(col));
    }
    Ok(jac)
}
