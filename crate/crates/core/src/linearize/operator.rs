use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{GeomError, Result};

/// Largest problem handed to the dense symmetric eigensolver.
pub const DENSE_EIGEN_LIMIT: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    /// Scalars with zero `vol_J`-mean.
    ScalarZeroMean,
    /// Grid 1-forms, flattened axis-major.
    OneForm,
}

type ApplyFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// A linear map on grid unknowns, applied matrix-free and assembled on demand.
#[derive(Clone)]
pub struct LinearOperator {
    size: usize,
    /// Grid shape of one scalar component.
    dims: Vec<usize>,
    domain: Domain,
    /// Quadrature weights of the inner product the operator is self-adjoint in.
    weights: Vec<f64>,
    apply: Arc<ApplyFn>,
}

impl std::fmt::Debug for LinearOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LinearOperator").field("size", &self.size).field("domain", &self.domain).finish()
    }
}

impl LinearOperator {
    /// `size` must be a multiple of the number of grid nodes in `dims`.
    pub fn new(
        dims: &[usize],
        size: usize,
        domain: Domain,
        weights: Vec<f64>,
        apply: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        Self { size, dims: dims.to_vec(), domain, weights, apply: Arc::new(apply) }
    }

    pub fn identity(dims: &[usize], domain: Domain) -> Self {
        let size = dims.iter().product();
        Self::new(dims, size, domain, vec![1.0; size], |x| x.to_vec())
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.size {
            return Err(GeomError::DimensionMismatch { expected: self.size, got: x.len() });
        }
        Ok((self.apply)(x))
    }

    /// Dense matrix, one application per column.
    pub fn assemble(&self) -> DMatrix<f64> {
        let cols: Vec<Vec<f64>> = (0..self.size)
            .into_par_iter()
            .map(|j| {
                let mut e = vec![0.0; self.size];
                e[j] = 1.0;
                (self.apply)(&e)
            })
            .collect();
        DMatrix::from_fn(self.size, self.size, |i, j| cols[j][i])
    }

    /// Eigenvalues of the whole assembled matrix (see [`LinearOperator::spectrum`]),
    /// including the unresolved modes near the grid Nyquist frequency.
    pub fn full_spectrum(&self, k: usize) -> Result<Vec<f64>> {
        if self.size > DENSE_EIGEN_LIMIT {
            return Err(GeomError::EigensolverFailure(format!(
                "{} unknowns exceed the dense limit {DENSE_EIGEN_LIMIT}",
                self.size
            )));
        }
        let m = self.assemble();
        let s: Vec<f64> = self.weights.iter().map(|w| w.sqrt()).collect();
        let mut sym = DMatrix::from_fn(self.size, self.size, |i, j| s[i] * m[(i, j)] / s[j]);
        sym = (&sym + sym.transpose()) * 0.5;
        let mut constant = None;
        if self.domain == Domain::ScalarZeroMean {
            let u = DVector::from_vec(s.clone()).normalize();
            let p = DMatrix::identity(self.size, self.size) - &u * u.transpose();
            sym = &p * sym * &p;
            constant = Some(u);
        }
        if sym.iter().any(|x| !x.is_finite()) {
            return Err(GeomError::EigensolverFailure("non-finite matrix entries".into()));
        }
        let eig = SymmetricEigen::new(sym);
        let mut pairs: Vec<(f64, f64)> = eig
            .eigenvalues
            .iter()
            .enumerate()
            .map(|(i, &l)| {
                let overlap = constant.as_ref().map_or(0.0, |u| eig.eigenvectors.column(i).dot(u).abs());
                (l, overlap)
            })
            .collect();
        if constant.is_some() {
            let drop = pairs
                .iter()
                .enumerate()
                .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
                .map(|(i, _)| i)
                .unwrap();
            pairs.remove(drop);
        }
        Ok(smallest(pairs.into_iter().map(|p| p.0).collect(), k))
    }

    /// The `k` eigenvalues of smallest magnitude, ascending, of the operator
    /// symmetrised in its weighted inner product and restricted (Galerkin) to
    /// Fourier modes with `|m_a| ≤ N_a/4` on every axis.
    ///
    /// The fourth-order first-derivative stencil annihilates the checkerboard
    /// mode and nearly annihilates its neighbours, so compositions such as
    /// `d* d` carry spurious small eigenvalues at the Nyquist end; the band
    /// restriction keeps only the resolved part of the spectrum. On the
    /// zero-mean scalar domain the constant mode is excluded.
    pub fn spectrum(&self, k: usize) -> Result<Vec<f64>> {
        let nodes: usize = self.dims.iter().product();
        let comps = self.size / nodes;
        let waves = band_waves(&self.dims, self.domain == Domain::ScalarZeroMean);
        let m = waves.len() * comps;
        if m > DENSE_EIGEN_LIMIT {
            return Err(GeomError::EigensolverFailure(format!(
                "{m} resolved modes exceed the dense limit {DENSE_EIGEN_LIMIT}"
            )));
        }
        let s: Vec<f64> = self.weights.iter().map(|w| w.sqrt()).collect();
        let u = DVector::from_vec(s.clone()).normalize();
        let grid = crate::immersion::Grid::new(&self.dims);
        let mut basis = DMatrix::zeros(self.size, m);
        for c in 0..comps {
            for (j, (wave, sine)) in waves.iter().enumerate() {
                for node in 0..nodes {
                    let phase: f64 = (0..self.dims.len()).map(|a| wave[a] as f64 * grid.coordinate(node, a)).sum();
                    let v = if *sine { phase.sin() } else { phase.cos() };
                    let i = c * nodes + node;
                    basis[(i, c * waves.len() + j)] = s[i] * v;
                }
            }
        }
        if self.domain == Domain::ScalarZeroMean {
            for mut col in basis.column_iter_mut() {
                let d = col.dot(&u);
                col.axpy(-d, &u, 1.0);
            }
        }
        let q = basis.qr().q();
        // S q = W^{1/2} M W^{-1/2} q, one operator application per column
        let sq: Vec<Vec<f64>> = (0..q.ncols())
            .into_par_iter()
            .map(|j| {
                let x: Vec<f64> = (0..self.size).map(|i| q[(i, j)] / s[i]).collect();
                (self.apply)(&x).into_iter().zip(&s).map(|(y, w)| y * w).collect()
            })
            .collect();
        let sq = DMatrix::from_fn(self.size, q.ncols(), |i, j| sq[j][i]);
        let mut r = q.transpose() * sq;
        r = (&r + r.transpose()) * 0.5;
        if r.iter().any(|x| !x.is_finite()) {
            return Err(GeomError::EigensolverFailure("non-finite matrix entries".into()));
        }
        Ok(smallest(SymmetricEigen::new(r).eigenvalues.iter().copied().collect(), k))
    }
}

fn smallest(mut vals: Vec<f64>, k: usize) -> Vec<f64> {
    vals.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    vals.truncate(k);
    vals.sort_by(f64::total_cmp);
    vals
}

/// Real Fourier basis `(wave, is_sine)` with `|m_a| ≤ N_a/4`, one of each `±m` pair.
fn band_waves(dims: &[usize], skip_constant: bool) -> Vec<(Vec<i64>, bool)> {
    let bands: Vec<i64> = dims.iter().map(|&d| (d / 4) as i64).collect();
    let mut wave: Vec<i64> = bands.iter().map(|b| -b).collect();
    let mut out = Vec::new();
    loop {
        let first = wave.iter().find(|&&x| x != 0);
        match first {
            None if !skip_constant => out.push((wave.clone(), false)),
            Some(&x) if x > 0 => {
                out.push((wave.clone(), false));
                out.push((wave.clone(), true));
            }
            _ => {}
        }
        let mut a = 0;
        while a < wave.len() {
            wave[a] += 1;
            if wave[a] <= bands[a] {
                break;
            }
            wave[a] = -bands[a];
            a += 1;
        }
        if a == wave.len() {
            return out;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_spectrum() {
        let op = LinearOperator::identity(&[6], Domain::OneForm);
        assert_eq!(op.full_spectrum(6).unwrap(), vec![1.0; 6]);
        let op = LinearOperator::identity(&[8, 8], Domain::OneForm);
        let vals = op.spectrum(100).unwrap();
        assert_eq!(vals.len(), 25);
        assert!(vals.iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn band_has_expected_size() {
        assert_eq!(band_waves(&[16], true).len(), 8);
        assert_eq!(band_waves(&[16], false).len(), 9);
        assert_eq!(band_waves(&[8, 12], false).len(), 5 * 7);
    }

    #[test]
    fn zero_mean_projection_drops_constant() {
        // weighted Laplacian-like circulant plus identity
        let n = 8;
        let op = LinearOperator::new(&[n], n, Domain::ScalarZeroMean, vec![0.5; n], move |x| {
            (0..n).map(|i| 2.0 * x[i] - x[(i + 1) % n] - x[(i + n - 1) % n] + x[i]).collect()
        });
        let expect = 1.0 + 2.0 - 2.0 * (2.0 * std::f64::consts::PI / n as f64).cos();
        let vals = op.full_spectrum(n).unwrap();
        assert_eq!(vals.len(), n - 1);
        assert!((vals[0] - expect).abs() < 1e-12);
        let vals = op.spectrum(n).unwrap();
        assert_eq!(vals.len(), 4);
        assert!((vals[0] - expect).abs() < 1e-12 && (vals[1] - expect).abs() < 1e-12);
    }

    #[test]
    fn too_large_is_refused() {
        let op = LinearOperator::identity(&[DENSE_EIGEN_LIMIT + 1], Domain::OneForm);
        assert!(matches!(op.full_spectrum(1), Err(GeomError::EigensolverFailure(_))));
    }

    #[test]
    fn apply_checks_length() {
        let op = LinearOperator::identity(&[3], Domain::OneForm);
        assert!(op.apply(&[1.0]).is_err());
    }
}
