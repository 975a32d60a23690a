//! Intrinsic calculus on the induced metric: `d`, `d*`, gradient, divergence,
//! Hodge Laplacian and quadrature against `vol_g` / `vol_J`.

use super::GridImmersion;

/// Scalar values per node.
pub type GridScalarField = Vec<f64>;

/// 1-form in the grid coframe: `comps[a][node] = β(∂_a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridOneForm {
    pub comps: Vec<Vec<f64>>,
}

/// 2-form components `β(∂_a, ∂_b)` for `a < b`, ordered as [`GridTwoForm::pairs`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridTwoForm {
    pub n: usize,
    pub comps: Vec<Vec<f64>>,
}

/// Tangent vector field in the grid frame: `comps[a][node]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridVectorField {
    pub comps: Vec<Vec<f64>>,
}

impl GridOneForm {
    pub fn zeros(n: usize, len: usize) -> Self {
        Self { comps: vec![vec![0.0; len]; n] }
    }

    pub fn sup_abs(&self) -> f64 {
        self.comps.iter().flatten().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { comps: self.comps.iter().map(|c| c.iter().map(|x| x * s).collect()).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            comps: self.comps.iter().zip(&other.comps).map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect()).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.sub(&other.scaled(-1.0))
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.comps.concat()
    }

    pub fn from_flat(n: usize, v: &[f64]) -> Self {
        let len = v.len() / n;
        Self { comps: (0..n).map(|a| v[a * len..(a + 1) * len].to_vec()).collect() }
    }
}

impl GridTwoForm {
    pub fn pairs(n: usize) -> Vec<(usize, usize)> {
        let mut p = Vec::new();
        for a in 0..n {
            for b in (a + 1)..n {
                p.push((a, b));
            }
        }
        p
    }

    pub fn sup_abs(&self) -> f64 {
        self.comps.iter().flatten().fold(0.0_f64, |m, x| m.max(x.abs()))
    }
}

impl GridVectorField {
    pub fn zeros(n: usize, len: usize) -> Self {
        Self { comps: vec![vec![0.0; len]; n] }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { comps: self.comps.iter().map(|c| c.iter().map(|x| x * s).collect()).collect() }
    }
}

impl GridImmersion {
    pub fn d_scalar(&self, f: &[f64]) -> GridOneForm {
        GridOneForm { comps: (0..self.dim()).map(|a| self.grid().diff(f, a)).collect() }
    }

    /// `(dβ)(∂_a, ∂_b) = ∂_a β_b − ∂_b β_a`.
    pub fn d_one_form(&self, beta: &GridOneForm) -> GridTwoForm {
        let n = self.dim();
        let comps = GridTwoForm::pairs(n)
            .into_iter()
            .map(|(a, b)| {
                let dab = self.grid().diff(&beta.comps[b], a);
                let dba = self.grid().diff(&beta.comps[a], b);
                dab.iter().zip(&dba).map(|(x, y)| x - y).collect()
            })
            .collect();
        GridTwoForm { n, comps }
    }

    pub fn sharp(&self, beta: &GridOneForm) -> GridVectorField {
        let n = self.dim();
        let mut comps = vec![vec![0.0; self.len()]; n];
        for (node, geo) in self.geometry().iter().enumerate() {
            for a in 0..n {
                comps[a][node] = (0..n).map(|b| geo.g_inv[(a, b)] * beta.comps[b][node]).sum();
            }
        }
        GridVectorField { comps }
    }

    pub fn flat(&self, v: &GridVectorField) -> GridOneForm {
        let n = self.dim();
        let mut comps = vec![vec![0.0; self.len()]; n];
        for (node, geo) in self.geometry().iter().enumerate() {
            for a in 0..n {
                comps[a][node] = (0..n).map(|b| geo.g[(a, b)] * v.comps[b][node]).sum();
            }
        }
        GridOneForm { comps }
    }

    pub fn gradient(&self, f: &[f64]) -> GridVectorField {
        self.sharp(&self.d_scalar(f))
    }

    /// `Div V = (1/√g) ∂_a(√g V^a)`.
    pub fn divergence(&self, v: &GridVectorField) -> GridScalarField {
        let sg: Vec<f64> = self.geometry().iter().map(|g| g.sqrt_det_g).collect();
        let mut out = vec![0.0; self.len()];
        for a in 0..self.dim() {
            let flux: Vec<f64> = v.comps[a].iter().zip(&sg).map(|(x, s)| x * s).collect();
            for (o, d) in out.iter_mut().zip(self.grid().diff(&flux, a)) {
                *o += d;
            }
        }
        out.iter().zip(&sg).map(|(x, s)| x / s).collect()
    }

    /// `d*β = −Div(β^♯)`.
    pub fn codifferential(&self, beta: &GridOneForm) -> GridScalarField {
        self.divergence(&self.sharp(beta)).into_iter().map(|x| -x).collect()
    }

    /// Hodge Laplacian `Δ_g = d*d` (non-negative).
    pub fn laplacian(&self, f: &[f64]) -> GridScalarField {
        self.codifferential(&self.d_scalar(f))
    }

    /// `∫ f vol_g`.
    pub fn integrate_g(&self, f: &[f64]) -> f64 {
        let w: Vec<f64> = f.iter().zip(self.geometry()).map(|(x, g)| x * g.sqrt_det_g).collect();
        self.grid().integrate(&w)
    }

    /// `∫ f vol_J`.
    pub fn integrate_j(&self, f: &[f64]) -> f64 {
        let w: Vec<f64> = f.iter().zip(self.geometry()).map(|(x, g)| x * g.sqrt_det_g * g.rho_j).collect();
        self.grid().integrate(&w)
    }

    /// Quadrature weights of `vol_J` per node.
    pub fn weights_j(&self) -> Vec<f64> {
        let cell = self.grid().cell();
        self.geometry().iter().map(|g| g.sqrt_det_g * g.rho_j * cell).collect()
    }

    /// `⟨β, γ⟩ = ∫ g(β, γ) vol_g` for 1-forms.
    pub fn inner_one_forms_g(&self, beta: &GridOneForm, gamma: &GridOneForm) -> f64 {
        let n = self.dim();
        let vals: Vec<f64> = self
            .geometry()
            .iter()
            .enumerate()
            .map(|(node, geo)| {
                let mut s = 0.0;
                for a in 0..n {
                    for b in 0..n {
                        s += geo.g_inv[(a, b)] * beta.comps[a][node] * gamma.comps[b][node];
                    }
                }
                s
            })
            .collect();
        self.integrate_g(&vals)
    }

    /// Remove the `vol_J`-mean.
    pub fn demean_j(&self, f: &[f64]) -> GridScalarField {
        let (_, vol) = self.total_volumes();
        let m = self.integrate_j(f) / vol;
        f.iter().map(|x| x - m).collect()
    }

    /// Pointwise `g`-norm of a 1-form.
    pub fn one_form_norms(&self, beta: &GridOneForm) -> Vec<f64> {
        let n = self.dim();
        self.geometry()
            .iter()
            .enumerate()
            .map(|(node, geo)| {
                let mut s = 0.0;
                for a in 0..n {
                    for b in 0..n {
                        s += geo.g_inv[(a, b)] * beta.comps[a][node] * beta.comps[b][node];
                    }
                }
                s.max(0.0).sqrt()
            })
            .collect()
    }
}
