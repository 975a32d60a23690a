use std::f64::consts::PI;
use std::sync::Arc;

use super::*;
use crate::immersion::{clifford_torus, core_geodesic, linear_torus, random_torus, RandomTorusSpec};
use crate::kahler::{DeckTransform, KahlerChart};
use crate::maslov::maslov_form;

const ELL: f64 = 1.0;

fn geodesic(nodes: usize) -> GridImmersion {
    let chart = KahlerChart::upper_half_plane(2.0).with_deck(DeckTransform::dilation(ELL));
    core_geodesic(Arc::new(chart), 0, ELL, nodes).unwrap()
}

fn field(imm: &GridImmersion, seed: u64) -> GridVectorField {
    let n = imm.dim();
    let comps = (0..n)
        .map(|a| {
            (0..imm.len())
                .map(|i| {
                    let s = seed as f64 + a as f64;
                    let t: Vec<f64> = (0..n).map(|b| imm.grid().coordinate(i, b)).collect();
                    0.3 + (t[0] + s).sin() * 0.5 + 0.2 * (2.0 * t[n - 1] + 0.7 * s).cos()
                })
                .collect()
        })
        .collect();
    GridVectorField { comps }
}

fn scalar(imm: &GridImmersion, seed: u64) -> Vec<f64> {
    let s = seed as f64;
    let f: Vec<f64> = (0..imm.len())
        .map(|i| {
            let t = imm.grid().coordinate(i, 0);
            (t + s).sin() + 0.4 * (2.0 * t - s).cos() + 0.1 * (3.0 * t).sin()
        })
        .collect();
    imm.demean_j(&f)
}

#[test]
fn einstein_endomorphism_is_scalar() {
    let fs = clifford_torus(Arc::new(KahlerChart::fubini_study(2, 1.0)), &[1.0, 0.7], 16).unwrap();
    let r = ricci_endomorphism(&fs).unwrap();
    assert_eq!(r.sign, Definiteness::Positive);
    for a in &r.a {
        assert!((a - DMatrix::identity(2, 2) * 3.0).amax() < 1e-6);
    }
    let ch = clifford_torus(Arc::new(KahlerChart::complex_hyperbolic_ball(2, 1.0)), &[0.3, 0.4], 16).unwrap();
    let r = ricci_endomorphism(&ch).unwrap();
    assert_eq!(r.sign, Definiteness::Negative);
    for a in &r.a {
        assert!((a + DMatrix::identity(2, 2) * 3.0).amax() < 1e-6);
    }
}

#[test]
fn flat_endomorphism_is_singular() {
    let imm = clifford_torus(Arc::new(KahlerChart::flat(2)), &[1.0, 1.0], 16).unwrap();
    assert!(matches!(ricci_endomorphism(&imm), Err(GeomError::SingularA { .. })));
}

#[test]
fn weinstein_at_zero_is_identity() {
    let imm = geodesic(32);
    let moved = weinstein_immersion(&imm, &GridOneForm::zeros(1, 32)).unwrap();
    for (a, b) in imm.points().iter().zip(moved.points()) {
        assert!((a - b).norm() < 1e-15);
    }
}

#[test]
fn weinstein_constant_form_is_uniform_offset() {
    // λ = −1: Y = c/g, so the hyperbolic offset is d = c/√g towards Re z < 0.
    let imm = geodesic(32);
    let c = 0.05;
    let alpha = GridOneForm { comps: vec![vec![c; 32]] };
    let moved = weinstein_immersion(&imm, &alpha).unwrap();
    let g0 = imm.node(0).g[(0, 0)];
    let d = c / g0.sqrt();
    for p in moved.points() {
        let z = p[0];
        assert!((z.re / z.norm() + d.tanh()).abs() < 1e-9, "{z}");
    }
}

#[test]
fn first_variation_matches_volume_difference() {
    let spec = RandomTorusSpec { center: CVec::zeros(1), radii: vec![1.0], amplitude: 0.1, modes: 2, seed: 5 };
    let imm = random_torus(Arc::new(KahlerChart::fubini_study(1, 1.0)), &spec, 128).unwrap();
    let y = field(&imm, 3);
    let s = 1e-4;
    let vp = normal_deformation(&imm, &y, s).unwrap().total_volumes().1;
    let vm = normal_deformation(&imm, &y, -s).unwrap().total_volumes().1;
    let fd = (vp - vm) / (2.0 * s);
    let fv = first_variation(&imm, &y).unwrap();
    assert!((fd - fv).abs() < 1e-5 * fv.abs(), "{fd} vs {fv}");
}

#[test]
fn geodesic_is_critical_and_strictly_stable() {
    let imm = geodesic(128);
    assert!(maslov_form(&imm).unwrap().sup_norm < 1e-10);
    let y = field(&imm, 1);
    assert!(first_variation(&imm, &y).unwrap().abs() < 1e-10);
    let q = second_variation_at_critical(&imm, &y).unwrap();
    let s = 1e-3;
    let v0 = imm.total_volumes().1;
    let vp = normal_deformation(&imm, &y, s).unwrap().total_volumes().1;
    let vm = normal_deformation(&imm, &y, -s).unwrap().total_volumes().1;
    let fd = (vp - 2.0 * v0 + vm) / (s * s);
    assert!(q > 0.0);
    assert!((fd - q).abs() < 1e-3 * q, "{fd} vs {q}");
}

#[test]
fn translation_is_a_jacobi_field() {
    let v1 = CVec::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
    let v2 = CVec::from_vec(vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
    let imm = linear_torus(&[v1, v2], 12).unwrap();
    let y = GridVectorField { comps: vec![vec![0.4; imm.len()], vec![-1.0; imm.len()]] };
    assert!(second_variation_at_critical(&imm, &y).unwrap().abs() < 1e-12);
}

#[test]
fn non_critical_is_refused() {
    let spec = RandomTorusSpec { center: CVec::zeros(1), radii: vec![1.0], amplitude: 0.1, modes: 2, seed: 5 };
    let imm = random_torus(Arc::new(KahlerChart::fubini_study(1, 1.0)), &spec, 64).unwrap();
    let y = field(&imm, 0);
    assert!(matches!(second_variation_at_critical(&imm, &y), Err(GeomError::NotCritical { .. })));
    assert!(matches!(operator_ltilde(&imm), Err(GeomError::NotCritical { .. })));
}

#[test]
fn d_maslov_matches_finite_difference() {
    let imm = geodesic(128);
    let y = field(&imm, 2);
    let s = 1e-4;
    let xp = maslov_form(&normal_deformation(&imm, &y, s).unwrap()).unwrap().xi;
    let xm = maslov_form(&normal_deformation(&imm, &y, -s).unwrap()).unwrap().xi;
    let fd = xp.sub(&xm).scaled(0.5 / s);
    let dm = d_maslov(&imm, &y).unwrap();
    let err = fd.sub(&dm).sup_abs() / dm.sup_abs();
    assert!(err < 1e-3, "{err}");
}

#[test]
fn tangential_directions_are_vertical_kernel() {
    // reparametrisation moves nodes along the curve: exp(s ι_* X) instead of J
    let imm = geodesic(128);
    let x = field(&imm, 4);
    let s = 1e-4;
    let tangent = |t: f64| {
        let v: Vec<CVec> = imm.push_forward(&x).into_iter().map(|w| w * C64::new(t, 0.0)).collect();
        imm.displaced(&v, EXP_STEPS).unwrap()
    };
    let xp = maslov_form(&tangent(s)).unwrap().xi;
    let xm = maslov_form(&tangent(-s)).unwrap().xi;
    assert!(xp.sub(&xm).scaled(0.5 / s).sup_abs() < 1e-6);
}

#[test]
fn ltilde_is_ke_reference() {
    let imm = geodesic(128);
    let op = operator_ltilde(&imm).unwrap();
    for seed in 0..5 {
        let f = scalar(&imm, seed);
        let a = op.apply(&f).unwrap();
        let b = ke_ltilde_reference(&imm, &f).unwrap();
        let err = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(err < 1e-8, "{err}");
    }
}

#[test]
fn ltilde_spectrum_on_core_geodesic() {
    let imm = geodesic(128);
    let lambda = imm.chart().lambda().unwrap();
    let length = imm.total_volumes().0;
    let vals = operator_ltilde(&imm).unwrap().spectrum(6).unwrap();
    // modes ±k are degenerate
    for (i, v) in vals.iter().enumerate() {
        let k = (i / 2 + 1) as f64;
        let exact = 1.0 + (2.0 * PI * k / length).powi(2) / lambda.abs();
        assert!((v - exact).abs() < 1e-4 * exact, "k = {k}: {v} vs {exact}");
    }
    assert!(vals[0] >= 1.0 - 1e-3);
    // the checkerboard mode lies in the kernel of the stencil: eigenvalue exactly 1
    let full = operator_ltilde(&imm).unwrap().full_spectrum(1).unwrap();
    assert!((full[0] - 1.0).abs() < 1e-9);
}

#[test]
fn ltilde_preserves_mean_and_is_symmetric() {
    let imm = geodesic(64);
    let op = operator_ltilde(&imm).unwrap();
    let f = scalar(&imm, 1);
    let h = scalar(&imm, 2);
    let lf = op.apply(&f).unwrap();
    let lh = op.apply(&h).unwrap();
    assert!(imm.integrate_j(&lf).abs() < 1e-10);
    let ip = |a: &[f64], b: &[f64]| imm.integrate_j(&a.iter().zip(b).map(|(x, y)| x * y).collect::<Vec<_>>());
    assert!((ip(&lf, &h) - ip(&f, &lh)).abs() < 1e-8);
}

#[test]
fn l_commutes_with_d() {
    let imm = geodesic(64);
    let lt = operator_ltilde(&imm).unwrap();
    let l = operator_l(&imm).unwrap();
    let f = scalar(&imm, 3);
    let lhs = imm.d_scalar(&lt.apply(&f).unwrap()).flatten();
    let rhs = l.apply(&imm.d_scalar(&f).flatten()).unwrap();
    let scale = lhs.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let err = lhs.iter().zip(&rhs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(err <= 1e-8 * scale, "{err}");
    assert!(l.apply(&vec![0.0; 64]).unwrap().iter().all(|x| *x == 0.0));
}

#[test]
fn l_on_closed_forms_in_dimension_one() {
    // L(α) = −λ⁻¹ d d* α + α on curves
    let imm = geodesic(64);
    let lambda = imm.chart().lambda().unwrap();
    let l = operator_l(&imm).unwrap();
    let alpha = GridOneForm { comps: vec![(0..64).map(|i| 0.2 + imm.grid().coordinate(i, 0).cos()).collect()] };
    let got = l.apply(&alpha.flatten()).unwrap();
    let dd = imm.d_scalar(&imm.codifferential(&alpha));
    for (node, g) in got.iter().enumerate() {
        let want = -dd.comps[0][node] / lambda + alpha.comps[0][node];
        assert!((g - want).abs() < 1e-8);
    }
}
