use std::f64::consts::PI;
use std::sync::Arc;

use super::*;
use crate::kahler::{DeckTransform, KahlerChart};
use crate::{CVec, C64};

fn flat1() -> Arc<KahlerChart> {
    Arc::new(KahlerChart::flat(1))
}

// Symbol of the periodic fourth-order stencil on e^{ikθ}, step `h`.
fn symbol(k: f64, h: f64) -> f64 {
    (8.0 * (k * h).sin() - (2.0 * k * h).sin()) / (6.0 * h)
}

// Same for e^{aθ}.
fn symbol_exp(a: f64, h: f64) -> f64 {
    (8.0 * (a * h).sinh() - (2.0 * a * h).sinh()) / (6.0 * h)
}

#[test]
fn circle_tangent_is_i_r_e_itheta() {
    let imm = circle(flat1(), C64::new(0.0, 0.0), 2.0, 64).unwrap();
    for node in [0, 5, 33] {
        let t = imm.grid().coordinate(node, 0);
        let v = imm.tangent_frame(node).unwrap().column(0)[0];
        let exact = C64::i() * C64::from_polar(2.0, t);
        assert!((v - exact).norm() < 1e-5, "{v} vs {exact}");
    }
}

#[test]
fn clifford_torus_is_lagrangian() {
    let chart = Arc::new(KahlerChart::fubini_study(2, 1.0));
    let imm = clifford_torus(chart, &[1.0, 1.0], 32).unwrap();
    assert!(imm.lagrangian_defect() < 1e-12);
    assert!(imm.volume_fields().rho_j.iter().all(|r| (r - 1.0).abs() < 1e-12));
}

#[test]
fn constant_map_rejected() {
    let pts = vec![CVec::from_element(1, C64::new(0.3, 0.0)); 16];
    let err = GridImmersion::new(flat1(), &[16], pts, vec![None]).unwrap_err();
    assert!(matches!(err, GeomError::InvalidImmersion(_)));
}

#[test]
fn complex_line_rejected() {
    // θ ↦ (e^{iθ}, i e^{iθ}) spans a complex direction only in pairs; use a complex curve in C^2
    let chart = Arc::new(KahlerChart::flat(2));
    let r = torus_from_fn(chart, &[16, 16], vec![None, None], |t| {
        let w = C64::from_polar(1.0, t[0]) + C64::from_polar(0.5, t[1]);
        CVec::from_vec(vec![w, C64::new(0.0, 0.0)])
    });
    assert!(matches!(r, Err(GeomError::InvalidImmersion(_))));
}

#[test]
fn circle_length() {
    let imm = circle(flat1(), C64::new(1.0, -1.0), 0.7, 64).unwrap();
    let (vg, vj) = imm.total_volumes();
    let h = 2.0 * PI / 64.0;
    assert!((vg - 2.0 * PI * 0.7 * symbol(1.0, h)).abs() < 1e-12);
    assert!((vg - 2.0 * PI * 0.7).abs() < 1e-4);
    assert!((vj - vg).abs() < 1e-10);
}

#[test]
fn tilted_plane_rho_j_is_cos() {
    let t: f64 = 0.6;
    let v1 = CVec::from_vec(vec![C64::new(2.0 * PI, 0.0), C64::new(0.0, 0.0)]);
    let v2 = CVec::from_vec(vec![C64::new(0.0, 2.0 * PI * t.sin()), C64::new(2.0 * PI * t.cos(), 0.0)]);
    let imm = linear_torus(&[v1, v2], 8).unwrap();
    for r in imm.volume_fields().rho_j {
        assert!((r - t.cos()).abs() < 1e-12);
    }
    let (vg, vj) = imm.total_volumes();
    assert!((vg - 4.0 * PI * PI).abs() < 1e-9);
    assert!((vj - 4.0 * PI * PI * t.cos()).abs() < 1e-9);
}

#[test]
fn j_volume_below_riemannian_volume() {
    let chart = Arc::new(KahlerChart::flat(2));
    let spec = RandomTorusSpec {
        center: CVec::zeros(2),
        radii: vec![1.0, 1.3],
        amplitude: 0.15,
        modes: 2,
        seed: 7,
    };
    let imm = random_torus(chart, &spec, 24).unwrap();
    let (vg, vj) = imm.total_volumes();
    assert!(vj < vg);
    assert!(imm.volume_fields().rho_j.iter().all(|r| *r <= 1.0 + 1e-12 && *r > 0.0));
}

#[test]
fn pullback_of_omega_vanishes_on_clifford() {
    let chart = Arc::new(KahlerChart::fubini_study(2, 1.0));
    let imm = clifford_torus(chart.clone(), &[0.8, 1.2], 24).unwrap();
    let w = imm.pullback_two_form(|p| Ok(chart.metric_at(p)?.real_omega())).unwrap();
    assert!(w.sup_abs() < 1e-12);
}

#[test]
fn laplacian_of_fourier_mode() {
    let imm = circle(flat1(), C64::new(0.0, 0.0), 1.0, 128).unwrap();
    for k in 1..=4 {
        let f: Vec<f64> = (0..128).map(|i| (k as f64 * imm.grid().coordinate(i, 0)).cos()).collect();
        let lf = imm.laplacian(&f);
        // the discrete tangent has length symbol(1), so g carries that factor too
        let h = 2.0 * PI / 128.0;
        let s = (symbol(k as f64, h) / symbol(1.0, h)).powi(2);
        let err = lf.iter().zip(&f).map(|(a, b)| (a - s * b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-10, "k = {k}: {err}");
        assert!((s - (k * k) as f64).abs() < 2e-3 * (k * k) as f64);
    }
}

#[test]
fn codifferential_is_adjoint_of_d() {
    let chart = Arc::new(KahlerChart::fubini_study(2, 1.0));
    let imm = clifford_torus(chart, &[0.7, 1.1], 32).unwrap();
    let f: Vec<f64> = (0..imm.len())
        .map(|i| {
            let (a, b) = (imm.grid().coordinate(i, 0), imm.grid().coordinate(i, 1));
            (a + 2.0 * b).sin() + a.cos()
        })
        .collect();
    let beta = GridOneForm {
        comps: vec![
            (0..imm.len()).map(|i| imm.grid().coordinate(i, 1).cos()).collect(),
            (0..imm.len()).map(|i| (imm.grid().coordinate(i, 0) - imm.grid().coordinate(i, 1)).sin()).collect(),
        ],
    };
    let lhs = imm.inner_one_forms_g(&imm.d_scalar(&f), &beta);
    let dstar = imm.codifferential(&beta);
    let prod: Vec<f64> = f.iter().zip(&dstar).map(|(a, b)| a * b).collect();
    let rhs = imm.integrate_g(&prod);
    assert!((lhs - rhs).abs() < 1e-10 * lhs.abs().max(1.0), "{lhs} vs {rhs}");
}

#[test]
fn d_squared_vanishes() {
    let chart = Arc::new(KahlerChart::flat(2));
    let imm = clifford_torus(chart, &[1.0, 1.0], 16).unwrap();
    let f: Vec<f64> = (0..imm.len()).map(|i| (imm.grid().coordinate(i, 0) * 3.0).sin() * imm.grid().coordinate(i, 1).cos()).collect();
    let dd = imm.d_one_form(&imm.d_scalar(&f));
    assert!(dd.sup_abs() < 1e-12);
}

#[test]
fn fourth_order_tangent_convergence() {
    let err = |n: usize| {
        let chart = flat1();
        let imm = torus_from_fn(chart, &[n], vec![None], |t| {
            CVec::from_element(1, C64::from_polar(1.0 + 0.3 * (3.0 * t[0]).cos(), t[0]))
        })
        .unwrap();
        (0..n)
            .map(|i| {
                let t = imm.grid().coordinate(i, 0);
                let r = 1.0 + 0.3 * (3.0 * t).cos();
                let dr = -0.9 * (3.0 * t).sin();
                let exact = C64::from_polar(1.0, t) * C64::new(dr, r);
                (imm.tangent_frame(i).unwrap().column(0)[0] - exact).norm()
            })
            .fold(0.0, f64::max)
    };
    let ratio = err(32) / err(64);
    assert!(ratio > 12.0, "ratio {ratio}");
}

#[test]
fn twisted_seam_matches_untwisted_cover() {
    // The core geodesic of the hyperbolic cylinder: tangent i ℓ/2π e^{ℓθ/2π}.
    let ell = 1.0;
    let chart = Arc::new(KahlerChart::upper_half_plane(1.0).with_deck(DeckTransform::dilation(ell)));
    let imm = core_geodesic(chart, 0, ell, 32).unwrap();
    for node in [0, 1, 31] {
        let t = imm.grid().coordinate(node, 0);
        let a = ell / (2.0 * PI);
        let exact = C64::new(0.0, symbol_exp(a, 2.0 * PI / 32.0) * (a * t).exp());
        let v = imm.tangent_frame(node).unwrap().column(0)[0];
        assert!((v - exact).norm() < 1e-9, "node {node}: {v} vs {exact}");
    }
    // g_θθ = (c/2)(ℓ/2π)² is constant along the core
    let g0 = 0.5 * (ell / (2.0 * PI)).powi(2);
    assert!(imm.geometry().iter().all(|g| (g.g[(0, 0)] - g0).abs() < 1e-8));
}

#[test]
fn untwisted_open_curve_rejected_by_stencil_size() {
    let r = circle(flat1(), C64::new(0.0, 0.0), 1.0, 4);
    assert!(matches!(r, Err(GeomError::InvalidImmersion(_))));
}

#[test]
fn csv_round_trip() {
    let chart = Arc::new(KahlerChart::fubini_study(2, 1.0));
    let spec = RandomTorusSpec { center: CVec::zeros(2), radii: vec![1.0, 0.8], amplitude: 0.1, modes: 1, seed: 3 };
    let imm = random_torus(chart.clone(), &spec, 12).unwrap();
    let mut buf = Vec::new();
    save_csv(&imm, &mut buf).unwrap();
    let back = load_csv(buf.as_slice(), chart, vec![None, None]).unwrap();
    assert_eq!(back.grid().dims(), imm.grid().dims());
    for (a, b) in imm.points().iter().zip(back.points()) {
        assert!((a - b).norm() < 1e-15 * a.norm().max(1.0) * 10.0);
    }
}

#[test]
fn csv_rejects_garbage() {
    let r = load_csv("node,i0,re_z0,im_z0\n0,0,abc,1\n".as_bytes(), flat1(), vec![None]);
    assert!(matches!(r, Err(GeomError::Config { .. })));
}

#[test]
fn displaced_flat_is_translation() {
    let imm = circle(flat1(), C64::new(0.0, 0.0), 1.0, 16).unwrap();
    let v = vec![CVec::from_element(1, C64::new(0.1, 0.2)); 16];
    let moved = imm.displaced(&v, 8).unwrap();
    for (a, b) in imm.points().iter().zip(moved.points()) {
        assert!((b[0] - a[0] - C64::new(0.1, 0.2)).norm() < 1e-14);
    }
}
