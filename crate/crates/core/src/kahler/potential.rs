//! Closed-form derivatives of Kähler potentials and conformal factors.
//!
//! A derivative is requested as two index lists: holomorphic directions
//! `∂_{z_i}` and antiholomorphic directions `∂_{z̄_j}`.

use crate::{CVec, C64};

/// Derivative `∂^{holo} ∂̄^{anti} F(|z|²)` for a radial profile `F`, given the
/// derivatives `F^{(m)}(s)` through `fd(m, s)`.
///
/// Faà di Bruno over set partitions: `s` has first derivatives `z̄_i` and `z_j`,
/// one non-zero mixed second derivative `δ_ij`, and nothing above.
pub fn radial_derivative(fd: impl Fn(usize, f64) -> f64, z: &CVec, holo: &[usize], anti: &[usize]) -> C64 {
    let s: f64 = z.iter().map(|w| w.norm_sqr()).sum();
    let vars: Vec<(bool, usize)> =
        holo.iter().map(|&i| (true, i)).chain(anti.iter().map(|&j| (false, j))).collect();
    if vars.is_empty() {
        return C64::new(fd(0, s), 0.0);
    }
    let mut total = C64::new(0.0, 0.0);
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    partitions(&vars, 0, &mut blocks, &mut |blocks| {
        let mut prod = C64::new(1.0, 0.0);
        for b in blocks {
            let v = match b.as_slice() {
                [k] => {
                    let (is_holo, i) = vars[*k];
                    if is_holo {
                        z[i].conj()
                    } else {
                        z[i]
                    }
                }
                [a, b] => {
                    let (ha, ia) = vars[*a];
                    let (hb, ib) = vars[*b];
                    if ha != hb && ia == ib {
                        C64::new(1.0, 0.0)
                    } else {
                        return;
                    }
                }
                _ => return,
            };
            prod *= v;
        }
        total += prod * fd(blocks.len(), s);
    });
    total
}

fn partitions<F: FnMut(&[Vec<usize>])>(
    vars: &[(bool, usize)],
    k: usize,
    blocks: &mut Vec<Vec<usize>>,
    visit: &mut F,
) {
    if k == vars.len() {
        visit(blocks);
        return;
    }
    for b in 0..blocks.len() {
        blocks[b].push(k);
        partitions(vars, k + 1, blocks, visit);
        blocks[b].pop();
    }
    blocks.push(vec![k]);
    partitions(vars, k + 1, blocks, visit);
    blocks.pop();
}

/// Derivatives of `log` at `x`: `log^{(m)}(x)`.
pub fn log_derivative(m: usize, x: f64) -> f64 {
    if m == 0 {
        return x.ln();
    }
    let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
    sign * factorial(m - 1) / x.powi(m as i32)
}

fn factorial(m: usize) -> f64 {
    (1..=m).map(|k| k as f64).product()
}

/// `K = −c log(Im z)` on the upper half-plane.
pub fn half_plane_derivative(c: f64, z: C64, holo: usize, anti: usize) -> C64 {
    let y = z.im;
    let m = holo + anti;
    let dy_dz = C64::new(0.0, -0.5);
    let dy_dzb = C64::new(0.0, 0.5);
    C64::new(-c * log_derivative(m, y), 0.0) * dy_dz.powu(holo as u32) * dy_dzb.powu(anti as u32)
}

/// A real polynomial potential `φ = Σ Re(c · z^α z̄^β)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    terms: Vec<Monomial>,
}

#[derive(Debug, Clone, PartialEq)]
struct Monomial {
    coef: C64,
    alpha: Vec<u32>,
    beta: Vec<u32>,
}

impl Polynomial {
    pub fn new() -> Self {
        Self { terms: Vec::new() }
    }

    /// Add `Re(coef · z^α z̄^β)`.
    pub fn with_term(mut self, coef: C64, alpha: Vec<u32>, beta: Vec<u32>) -> Self {
        let half = coef * 0.5;
        self.terms.push(Monomial { coef: half, alpha: alpha.clone(), beta: beta.clone() });
        self.terms.push(Monomial { coef: half.conj(), alpha: beta, beta: alpha });
        self
    }

    pub fn extend(mut self, other: Polynomial) -> Self {
        self.terms.extend(other.terms);
        self
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            terms: self.terms.iter().map(|m| Monomial { coef: m.coef * s, ..m.clone() }).collect(),
        }
    }

    pub fn derivative(&self, z: &CVec, holo: &[usize], anti: &[usize]) -> C64 {
        let n = z.len();
        let count = |idx: &[usize], k: usize| idx.iter().filter(|&&i| i == k).count() as u32;
        self.terms
            .iter()
            .map(|m| {
                let mut v = m.coef;
                for k in 0..n {
                    let (a, b) = (count(holo, k), count(anti, k));
                    let (ak, bk) = (m.alpha.get(k).copied().unwrap_or(0), m.beta.get(k).copied().unwrap_or(0));
                    if ak < a || bk < b {
                        return C64::new(0.0, 0.0);
                    }
                    v *= falling(ak, a) * falling(bk, b);
                    v *= z[k].powu(ak - a) * z[k].conj().powu(bk - b);
                }
                v
            })
            .sum()
    }
}

impl Default for Polynomial {
    fn default() -> Self {
        Self::new()
    }
}

fn falling(x: u32, k: u32) -> f64 {
    (0..k).map(|j| (x - j) as f64).product()
}

/// Conformal factor `e^{2u}` on the upper half-plane with
/// `u = a · cos(2πm log|z| / ℓ + φ) · cos(arg z)`, invariant under `z ↦ e^ℓ z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogPeriodicConformal {
    pub amplitude: f64,
    pub period: f64,
    pub mode: f64,
    pub phase: f64,
}

/// `u`, `∂u/∂z` and `∂²u/∂z∂z̄` at a point.
#[derive(Debug, Clone, Copy)]
pub struct ConformalJet {
    pub u: f64,
    pub uz: C64,
    pub uzzb: f64,
}

impl LogPeriodicConformal {
    pub fn scaled(&self, s: f64) -> Self {
        Self { amplitude: self.amplitude * s, ..*self }
    }

    pub fn jet(&self, z: C64) -> ConformalJet {
        let a = z.norm().ln();
        let b = z.arg();
        let k = 2.0 * std::f64::consts::PI * self.mode / self.period;
        let (s, c) = (k * a + self.phase).sin_cos();
        let (sb, cb) = b.sin_cos();
        let amp = self.amplitude;
        let u = amp * c * cb;
        let ua = -amp * k * s * cb;
        let ub = -amp * c * sb;
        let uaa = -amp * k * k * c * cb;
        let ubb = -amp * c * cb;
        let uw = C64::new(ua, -ub) * 0.5;
        ConformalJet { u, uz: uw / z, uzzb: (uaa + ubb) / (4.0 * z.norm_sqr()) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_check(f: impl Fn(&CVec) -> C64, z: &CVec, k: usize, holo: bool) -> C64 {
        // Wirtinger derivative by central differences in x and y.
        let h = 1e-5;
        let shift = |dz: C64| {
            let mut w = z.clone();
            w[k] += dz;
            f(&w)
        };
        let dx = (shift(C64::new(h, 0.0)) - shift(C64::new(-h, 0.0))) / (2.0 * h);
        let dy = (shift(C64::new(0.0, h)) - shift(C64::new(0.0, -h))) / (2.0 * h);
        if holo {
            (dx - C64::i() * dy) * 0.5
        } else {
            (dx + C64::i() * dy) * 0.5
        }
    }

    #[test]
    fn radial_matches_finite_differences() {
        let fd = |m: usize, s: f64| log_derivative(m, 1.0 + s);
        let z = CVec::from_vec(vec![C64::new(0.3, -0.2), C64::new(-0.1, 0.4)]);
        // ∂_0 ∂̄_1 ∂_1 K from finite differences of the closed form ∂_1 ∂̄_1 K ... built up stepwise.
        let lists: [(&[usize], &[usize]); 3] = [(&[0], &[1]), (&[0, 1], &[1]), (&[1, 0], &[1, 0])];
        for (holo, anti) in lists {
            let exact = radial_derivative(fd, &z, holo, anti);
            let (last_is_holo, last) =
                if anti.len() > 1 || holo.is_empty() { (false, anti[anti.len() - 1]) } else { (true, holo[holo.len() - 1]) };
            let reduced = |w: &CVec| {
                if last_is_holo {
                    radial_derivative(fd, w, &holo[..holo.len() - 1], anti)
                } else {
                    radial_derivative(fd, w, holo, &anti[..anti.len() - 1])
                }
            };
            let approx = fd_check(reduced, &z, last, last_is_holo);
            assert!((exact - approx).norm() < 1e-7, "{holo:?} {anti:?}: {exact} vs {approx}");
        }
    }

    #[test]
    fn fubini_study_hessian_at_origin() {
        let z = CVec::zeros(1);
        let d = radial_derivative(|m, s| log_derivative(m, 1.0 + s), &z, &[0], &[0]);
        assert!((d - C64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn polynomial_derivatives() {
        let p = Polynomial::new().with_term(C64::new(0.5, 0.2), vec![2, 0], vec![0, 1]);
        let z = CVec::from_vec(vec![C64::new(0.3, -0.2), C64::new(-0.1, 0.4)]);
        let value = |w: &CVec| p.derivative(w, &[], &[]);
        assert!(value(&z).im.abs() < 1e-15);
        let d = p.derivative(&z, &[0], &[]);
        assert!((d - fd_check(value, &z, 0, true)).norm() < 1e-8);
        let d2 = p.derivative(&z, &[0], &[1]);
        let approx = fd_check(|w| p.derivative(w, &[0], &[]), &z, 1, false);
        assert!((d2 - approx).norm() < 1e-8);
    }

    #[test]
    fn conformal_jet_matches_finite_differences() {
        let u = LogPeriodicConformal { amplitude: 0.3, period: 1.0, mode: 1.0, phase: 0.4 };
        let z = C64::new(0.2, 1.3);
        let j = u.jet(z);
        let as_vec = |w: &CVec| C64::new(u.jet(w[0]).u, 0.0);
        let zv = CVec::from_vec(vec![z]);
        assert!((j.uz - fd_check(as_vec, &zv, 0, true)).norm() < 1e-8);
        let uz = |w: &CVec| u.jet(w[0]).uz;
        assert!((C64::new(j.uzzb, 0.0) - fd_check(uz, &zv, 0, false)).norm() < 1e-7);
        // Invariance under the dilation z ↦ e^ℓ z.
        let g = u.jet(z * 1.0_f64.exp());
        assert!((g.u - j.u).abs() < 1e-12);
    }
}
