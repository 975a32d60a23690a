//! Pointwise linear algebra of Hermitian vector spaces and totally real planes.
//!
//! A vector of `C^n` is identified with `R^{2n}` through the ordering
//! `(Re w_1, …, Re w_n, Im w_1, …, Im w_n)`; `J` is multiplication by `i`.

use nalgebra::{DMatrix, DVector};

use crate::error::{GeomError, Result};
use crate::{CMat, CVec, C64};

/// Default tolerance below which a frame is treated as spanning a complex line.
pub const TOTALLY_REAL_TOL: f64 = 1e-10;

/// Hermitian form `h = g − iω` on `C^n`, stored as its matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianStructure {
    h: CMat,
}

impl HermitianStructure {
    pub fn new(h: CMat) -> Result<Self> {
        if !h.is_square() {
            return Err(GeomError::NotHermitian("matrix is not square".into()));
        }
        let n = h.nrows();
        let scale = h.iter().map(|z| z.norm()).fold(1.0_f64, f64::max);
        for i in 0..n {
            for j in 0..n {
                if (h[(i, j)] - h[(j, i)].conj()).norm() > 1e-14 * scale {
                    return Err(GeomError::NotHermitian(format!("entry ({i},{j}) breaks symmetry")));
                }
            }
        }
        let eig = nalgebra::SymmetricEigen::new(h.clone());
        if eig.eigenvalues.iter().any(|&l| l <= 0.0) {
            return Err(GeomError::NotHermitian("not positive definite".into()));
        }
        Ok(Self { h })
    }

    /// Trusted constructor for matrices produced by chart code.
    pub(crate) fn from_matrix_unchecked(h: CMat) -> Self {
        Self { h }
    }

    pub fn identity(n: usize) -> Self {
        Self { h: CMat::identity(n, n) }
    }

    pub fn dim(&self) -> usize {
        self.h.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.h
    }

    /// `h(u, v) = uᵀ h v̄`.
    pub fn inner(&self, u: &CVec, v: &CVec) -> C64 {
        hermitian_pair(&self.h, u, v)
    }

    pub fn metric(&self, u: &CVec, v: &CVec) -> f64 {
        self.inner(u, v).re
    }

    pub fn omega(&self, u: &CVec, v: &CVec) -> f64 {
        -self.inner(u, v).im
    }

    pub fn norm(&self, u: &CVec) -> f64 {
        self.metric(u, u).max(0.0).sqrt()
    }

    /// The real `2n × 2n` Gram matrix of `g = Re h`.
    pub fn real_metric(&self) -> DMatrix<f64> {
        real_form(&self.h, |z| z.re)
    }

    /// The real `2n × 2n` matrix of `ω = −Im h`.
    pub fn real_omega(&self) -> DMatrix<f64> {
        real_form(&self.h, |z| -z.im)
    }
}

/// `uᵀ M v̄` for any square complex matrix `M`.
pub fn hermitian_pair(m: &CMat, u: &CVec, v: &CVec) -> C64 {
    let mv = m * v.map(|z| z.conj());
    u.iter().zip(mv.iter()).map(|(a, b)| a * b).sum()
}

pub(crate) fn real_form(m: &CMat, part: impl Fn(C64) -> f64) -> DMatrix<f64> {
    // h(u, v) = uᵀ m v̄ on basis vectors is ±i^k m_ij
    let n = m.nrows();
    let unit = |k: usize| if k < n { C64::new(1.0, 0.0) } else { C64::new(0.0, 1.0) };
    DMatrix::from_fn(2 * n, 2 * n, |a, b| part(unit(a) * m[(a % n, b % n)] * unit(b).conj()))
}

/// The `k`-th vector of the real basis `(e_1, …, e_n, ie_1, …, ie_n)`.
pub fn real_basis_vector(n: usize, k: usize) -> CVec {
    let mut v = CVec::zeros(n);
    if k < n {
        v[k] = C64::new(1.0, 0.0);
    } else {
        v[k - n] = C64::new(0.0, 1.0);
    }
    v
}

pub fn to_real(w: &CVec) -> DVector<f64> {
    let n = w.len();
    DVector::from_fn(2 * n, |k, _| if k < n { w[k].re } else { w[k - n].im })
}

pub fn from_real(x: &DVector<f64>) -> CVec {
    let n = x.len() / 2;
    CVec::from_fn(n, |k, _| C64::new(x[k], x[k + n]))
}

/// Real matrix of multiplication by `i` on `R^{2n}`.
pub fn complex_structure(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        j[(k + n, k)] = 1.0;
        j[(k, k + n)] = -1.0;
    }
    j
}

/// `n` real tangent vectors stored as the columns of a complex `n × n` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentFrame {
    v: CMat,
}

impl TangentFrame {
    pub fn new(v: CMat) -> Result<Self> {
        if !v.is_square() {
            return Err(GeomError::DimensionMismatch { expected: v.nrows(), got: v.ncols() });
        }
        Ok(Self { v })
    }

    pub fn from_columns(cols: &[CVec]) -> Result<Self> {
        if cols.is_empty() {
            return Err(GeomError::DimensionMismatch { expected: 1, got: 0 });
        }
        let n = cols[0].len();
        if cols.len() != n || cols.iter().any(|c| c.len() != n) {
            return Err(GeomError::DimensionMismatch { expected: n, got: cols.len() });
        }
        Ok(Self { v: CMat::from_columns(cols) })
    }

    pub fn standard(n: usize) -> Self {
        Self { v: CMat::identity(n, n) }
    }

    pub fn dim(&self) -> usize {
        self.v.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.v
    }

    pub fn column(&self, i: usize) -> CVec {
        self.v.column(i).into_owned()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { v: &self.v * C64::new(s, 0.0) }
    }

    /// Apply `J` to every vector.
    pub fn rotated(&self) -> Self {
        Self { v: &self.v * C64::new(0.0, 1.0) }
    }

    /// Right-multiply by a real matrix (a change of basis of the same plane).
    pub fn recombined(&self, m: &DMatrix<f64>) -> Self {
        Self { v: &self.v * m.map(|x| C64::new(x, 0.0)) }
    }

    pub fn det(&self) -> C64 {
        self.v.determinant()
    }
}

/// The projections of `V = π ⊕ Jπ` as real `2n × 2n` matrices.
#[derive(Debug, Clone)]
pub struct Projections {
    pub p_l: DMatrix<f64>,
    pub p_j: DMatrix<f64>,
}

fn check_dims(frame: &TangentFrame, h: &HermitianStructure) -> Result<()> {
    if frame.dim() != h.dim() {
        return Err(GeomError::DimensionMismatch { expected: h.dim(), got: frame.dim() });
    }
    Ok(())
}

/// Gram matrix `h(v_i, v_j)`.
pub fn hermitian_gram(frame: &TangentFrame, h: &HermitianStructure) -> Result<CMat> {
    check_dims(frame, h)?;
    let v = frame.matrix();
    Ok(v.transpose() * h.matrix() * v.map(|z| z.conj()))
}

/// `|det_C|` of the coordinate matrix of the frame; zero iff the span is not totally real.
pub fn totally_real_defect(frame: &TangentFrame) -> f64 {
    frame.det().norm()
}

/// Split `w = π_L w + π_J w` along `span_R(frame) ⊕ J span_R(frame)`.
pub fn split(frame: &TangentFrame, w: &CVec) -> Option<(CVec, CVec)> {
    let c = frame.matrix().clone().lu().solve(w)?;
    let re = c.map(|z| C64::new(z.re, 0.0));
    let im = c.map(|z| C64::new(0.0, z.im));
    Some((frame.matrix() * re, frame.matrix() * im))
}

pub fn projections(frame: &TangentFrame, tol: f64) -> Result<Projections> {
    let defect = totally_real_defect(frame);
    if defect <= tol {
        return Err(GeomError::NearComplexPlane { defect, tol });
    }
    let n = frame.dim();
    let mut p_l = DMatrix::zeros(2 * n, 2 * n);
    let mut p_j = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..2 * n {
        let e = real_basis_vector(n, k);
        let (l, j) = split(frame, &e).ok_or(GeomError::NearComplexPlane { defect, tol })?;
        p_l.set_column(k, &to_real(&l));
        p_j.set_column(k, &to_real(&j));
    }
    Ok(Projections { p_l, p_j })
}

/// Modified Gram–Schmidt under `g = Re h`; keeps the orientation of the input.
pub fn orthonormalize(frame: &TangentFrame, h: &HermitianStructure) -> Result<TangentFrame> {
    check_dims(frame, h)?;
    let n = frame.dim();
    let mut cols: Vec<CVec> = (0..n).map(|i| frame.column(i)).collect();
    for i in 0..n {
        for j in 0..i {
            let proj = h.metric(&cols[i], &cols[j]);
            let cj = cols[j].clone();
            cols[i] -= cj * C64::new(proj, 0.0);
        }
        let len = h.norm(&cols[i]);
        if len <= TOTALLY_REAL_TOL {
            return Err(GeomError::NearComplexPlane { defect: len, tol: TOTALLY_REAL_TOL });
        }
        cols[i] /= C64::new(len, 0.0);
    }
    TangentFrame::from_columns(&cols)
}

/// `ρ_J = (det_C h(e_i, e_j))^{1/2}` on a `g`-orthonormalised frame.
pub fn rho_j(frame: &TangentFrame, h: &HermitianStructure) -> Result<f64> {
    let e = orthonormalize(frame, h)?;
    let rho = hermitian_gram(&e, h)?.determinant().re.max(0.0).sqrt();
    if rho <= TOTALLY_REAL_TOL {
        return Err(GeomError::NearComplexPlane { defect: rho, tol: TOTALLY_REAL_TOL });
    }
    Ok(rho)
}

/// Canonical complex volume form of an oriented totally real plane.
#[derive(Debug, Clone, Copy)]
pub struct CanonicalVolume {
    /// `Ω(e_1, …, e_n)` on the orthonormalised frame.
    pub value: C64,
    /// Unit phase `e^{iθ}` such that `Ω = e^{iθ} (det h)^{1/2} dz_1 ∧ … ∧ dz_n`.
    pub phase: C64,
    /// Coefficient of `Ω` against `dz_1 ∧ … ∧ dz_n`.
    pub coefficient: C64,
    pub rho_j: f64,
}

pub fn canonical_volume_coefficients(
    frame: &TangentFrame,
    h: &HermitianStructure,
) -> Result<CanonicalVolume> {
    let e = orthonormalize(frame, h)?;
    let det_e = e.det();
    if det_e.norm() <= TOTALLY_REAL_TOL {
        return Err(GeomError::NearComplexPlane { defect: det_e.norm(), tol: TOTALLY_REAL_TOL });
    }
    let phase = det_e.conj() / det_e.norm();
    let vol = h.matrix().determinant().re.sqrt();
    let coefficient = phase * vol;
    let value = coefficient * det_e;
    Ok(CanonicalVolume { value, phase, coefficient, rho_j: value.norm() })
}

/// `max_{i<j} |ω(e_i, e_j)|` over the orthonormalised frame.
pub fn lagrangian_defect(frame: &TangentFrame, h: &HermitianStructure) -> f64 {
    let Ok(e) = orthonormalize(frame, h) else {
        return f64::INFINITY;
    };
    let n = e.dim();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max(h.omega(&e.column(i), &e.column(j)).abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn tilted(t: f64) -> TangentFrame {
        let (s, co) = t.sin_cos();
        TangentFrame::from_columns(&[
            CVec::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]),
            CVec::from_vec(vec![c(0.0, s), c(co, 0.0)]),
        ])
        .unwrap()
    }

    fn random_frame(rng: &mut ChaCha8Rng, n: usize) -> TangentFrame {
        TangentFrame::new(CMat::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
            .unwrap()
    }

    #[test]
    fn gram_of_tilted_frame() {
        let t = 0.7_f64;
        let g = hermitian_gram(&tilted(t), &HermitianStructure::identity(2)).unwrap();
        let s = t.sin();
        assert!((g[(0, 1)] - c(0.0, -s)).norm() < 1e-15);
        assert!((g[(1, 0)] - c(0.0, s)).norm() < 1e-15);
        assert!((g[(0, 0)] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((g[(1, 1)] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn gram_is_bilinear() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = random_frame(&mut rng, 3);
        let h = HermitianStructure::identity(3);
        let g1 = hermitian_gram(&f, &h).unwrap();
        let g2 = hermitian_gram(&f.scaled(2.0), &h).unwrap();
        assert!((g2 - g1 * c(4.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn defect_examples() {
        assert!((totally_real_defect(&TangentFrame::standard(3)) - 1.0).abs() < 1e-15);
        let degenerate = TangentFrame::from_columns(&[
            CVec::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]),
            CVec::from_vec(vec![c(0.0, 1.0), c(0.0, 0.0)]),
        ])
        .unwrap();
        assert_eq!(totally_real_defect(&degenerate), 0.0);
        assert!(matches!(projections(&degenerate, TOTALLY_REAL_TOL), Err(GeomError::NearComplexPlane { .. })));
        assert!((totally_real_defect(&tilted(0.4)) - 0.4_f64.cos()).abs() < 1e-15);
    }

    #[test]
    fn standard_projections_split_real_and_imaginary() {
        let p = projections(&TangentFrame::standard(2), TOTALLY_REAL_TOL).unwrap();
        let expect_l = DMatrix::from_fn(4, 4, |a, b| if a == b && a < 2 { 1.0 } else { 0.0 });
        assert!((p.p_l - &expect_l).norm() < 1e-15);
        assert!((p.p_j - (DMatrix::identity(4, 4) - expect_l)).norm() < 1e-15);
    }

    #[test]
    fn projection_identities_on_random_frames() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let n = rng.gen_range(1..4);
            let f = random_frame(&mut rng, n);
            let p = projections(&f, TOTALLY_REAL_TOL).unwrap();
            let j = complex_structure(n);
            let id = DMatrix::<f64>::identity(2 * n, 2 * n);
            assert!((&p.p_l + &p.p_j - &id).norm() < 1e-10);
            assert!((&p.p_l * &p.p_j).norm() < 1e-10);
            assert!((&p.p_l * &p.p_l - &p.p_l).norm() < 1e-10);
            assert!((&j * &p.p_l - &p.p_j * &j).norm() < 1e-10);
            assert!((&j * &p.p_j - &p.p_l * &j).norm() < 1e-10);
        }
    }

    #[test]
    fn rho_j_on_tilted_family_and_lagrangian() {
        let h = HermitianStructure::identity(2);
        for &t in &[0.0, 0.3, 1.0, 1.4] {
            assert!((rho_j(&tilted(t), &h).unwrap() - t.cos().abs()).abs() < 1e-12);
            assert!((lagrangian_defect(&tilted(t), &h) - t.sin().abs()).abs() < 1e-12);
        }
        let near = rho_j(&tilted(std::f64::consts::FRAC_PI_2 - 1e-6), &h).unwrap();
        assert!(near > 0.0 && near < 1e-5);
        assert!((rho_j(&TangentFrame::standard(3), &HermitianStructure::identity(3)).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn canonical_volume_is_real_positive_on_its_frame() {
        let h = HermitianStructure::identity(2);
        let cv = canonical_volume_coefficients(&TangentFrame::standard(2), &h).unwrap();
        assert!((cv.value - c(1.0, 0.0)).norm() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let f = random_frame(&mut rng, 2);
            let cv = canonical_volume_coefficients(&f, &h).unwrap();
            assert!(cv.value.re > 0.0 && cv.value.im.abs() < 1e-12);
            assert!((cv.value.norm() - rho_j(&f, &h).unwrap()).abs() < 1e-10);
            // Same value on the raw (non-orthonormal) frame up to a positive factor.
            let raw = cv.coefficient * f.det();
            assert!(raw.re > 0.0 && raw.im.abs() < 1e-10 * raw.norm());
        }
    }

    #[test]
    fn hermitian_structure_validation() {
        let bad = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 1.0), c(0.0, 1.0), c(1.0, 0.0)]);
        assert!(HermitianStructure::new(bad).is_err());
        let neg = CMat::from_row_slice(1, 1, &[c(-1.0, 0.0)]);
        assert!(HermitianStructure::new(neg).is_err());
        assert!(HermitianStructure::new(CMat::identity(2, 2)).is_ok());
    }
}
