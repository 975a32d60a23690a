//! Fixed-seed invariant suites, one per module.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{GeomError, Result};
use crate::immersion::{circle, clifford_torus, core_geodesic, load_csv, random_torus, save_csv, GridImmersion, RandomTorusSpec};
use crate::isotopy::{moser_flow, FormFamily, FormMode};
use crate::kahler::{ChartPath, DeckTransform, KahlerChart, LogPeriodicConformal, Polynomial};
use crate::linearize::{ke_ltilde_reference, operator_ltilde};
use crate::maslov::{loop_integrals, maslov_form, maslov_form_oracle};
use crate::persist::{round_trip, scalar_maslov, ContinuationProblem};
use crate::trlinalg::{
    complex_structure, lagrangian_defect, projections, rho_j, HermitianStructure, TangentFrame, TOTALLY_REAL_TOL,
};
use crate::{CMat, CVec, C64};

pub const MODULES: [&str; 7] = ["trlinalg", "kahler", "immersion", "maslov", "linearize", "isotopy", "persist"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub module: String,
    pub name: String,
    pub value: f64,
    pub tol: f64,
    pub pass: bool,
}

struct Suite {
    module: &'static str,
    checks: Vec<Check>,
}

impl Suite {
    fn new(module: &'static str) -> Self {
        Self { module, checks: Vec::new() }
    }

    fn below(&mut self, name: &str, value: f64, tol: f64) {
        self.checks.push(Check { module: self.module.into(), name: name.into(), value, tol, pass: value <= tol });
    }

    /// A failing computation is a failed check, not an abort.
    fn run(&mut self, name: &str, tol: f64, f: impl FnOnce() -> Result<f64>) {
        let value = f().unwrap_or(f64::INFINITY);
        self.below(name, value, tol);
    }
}

/// Runs one module's suite, or all of them for `"all"`.
pub fn validate(module: &str) -> Result<Vec<Check>> {
    let selected: Vec<&'static str> = MODULES.iter().copied().filter(|m| module == "all" || *m == module).collect();
    if selected.is_empty() {
        return Err(GeomError::Unsupported(format!("no validation suite named `{module}`")));
    }
    let mut out = Vec::new();
    for m in selected {
        let mut s = Suite::new(m);
        match m {
            "trlinalg" => trlinalg_suite(&mut s),
            "kahler" => kahler_suite(&mut s),
            "immersion" => immersion_suite(&mut s),
            "maslov" => maslov_suite(&mut s),
            "linearize" => linearize_suite(&mut s),
            "isotopy" => isotopy_suite(&mut s),
            _ => persist_suite(&mut s),
        }
        out.extend(s.checks);
    }
    Ok(out)
}

fn random_c(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> HermitianStructure {
    let a = CMat::from_fn(n, n, |_, _| random_c(rng));
    let h = &a * a.adjoint() + CMat::identity(n, n) * C64::new(0.5, 0.0);
    HermitianStructure::new(h).expect("A A* + I/2 is positive definite")
}

fn trlinalg_suite(s: &mut Suite) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut proj, mut range, mut lag) = (0.0_f64, 0.0_f64, 0.0_f64);
    for _ in 0..200 {
        let n = rng.gen_range(1..4);
        let h = random_hermitian(&mut rng, n);
        let frame = TangentFrame::new(CMat::from_fn(n, n, |_, _| random_c(&mut rng))).expect("square");
        if let Ok(p) = projections(&frame, TOTALLY_REAL_TOL) {
            let j = complex_structure(n);
            let id = DMatrix::<f64>::identity(2 * n, 2 * n);
            proj = proj
                .max((&p.p_l + &p.p_j - &id).amax())
                .max((&p.p_l * &p.p_j).amax())
                .max((&j * &p.p_l - &p.p_j * &j).amax());
        }
        if let Ok(r) = rho_j(&frame, &h) {
            range = range.max((r - 1.0).max(0.0)).max(if r > 0.0 { 0.0 } else { 1.0 });
        }
        // a Lagrangian frame: real combinations of the columns of (C⁻¹)ᵀ, h = C C*
        let c = h.matrix().clone().cholesky().expect("positive definite").l();
        let m = c.try_inverse().expect("invertible").transpose();
        let real = DMatrix::<f64>::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let frame = TangentFrame::new(&m * real.map(|x| C64::new(x, 0.0))).expect("square");
        if let Ok(r) = rho_j(&frame, &h) {
            lag = lag.max((r - 1.0).abs()).max(lagrangian_defect(&frame, &h));
        }
    }
    s.below("projection_identities", proj, 1e-10);
    s.below("rho_j_in_unit_interval", range, 1e-12);
    s.below("lagrangian_rho_j_is_one", lag, 1e-10);
}

fn kahler_suite(s: &mut Suite) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for (name, chart, radius) in [
        ("fubini_study_einstein", KahlerChart::fubini_study(2, 1.0), 2.0),
        ("complex_hyperbolic_einstein", KahlerChart::complex_hyperbolic_ball(2, 1.0), 0.6),
    ] {
        s.run(name, 1e-8, || {
            let mut worst = 0.0_f64;
            for _ in 0..50 {
                let p = CVec::from_fn(2, |_, _| random_c(&mut rng) * (radius / 2.0));
                worst = worst.max(chart.einstein_defect(&p)?);
            }
            Ok(worst)
        });
    }
    let uhp = KahlerChart::upper_half_plane(2.0).with_deck(DeckTransform::dilation(1.0));
    s.run("half_plane_deck_isometry", 1e-10, || {
        let mut worst = 0.0_f64;
        for _ in 0..50 {
            let p = CVec::from_element(1, C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(0.2..2.0)));
            worst = worst.max(uhp.isometry_defect(0, &p)?);
        }
        Ok(worst)
    });
    s.run("half_plane_gauss_curvature", 1e-8, || {
        let p = CVec::from_element(1, C64::new(0.3, 0.7));
        Ok((uhp.gauss_curvature(&p)? + 1.0).abs())
    });
}

fn immersion_suite(s: &mut Suite) {
    s.run("circle_length", 1e-8, || {
        let imm = circle(Arc::new(KahlerChart::flat(1)), C64::new(0.0, 0.0), 0.7, 512)?;
        let (g, j) = imm.total_volumes();
        let exact = std::f64::consts::TAU * 0.7;
        Ok(((g - exact).abs() / exact).max((j - exact).abs() / exact))
    });
    s.run("clifford_lagrangian_defect", 1e-10, || {
        Ok(clifford_torus(Arc::new(KahlerChart::fubini_study(2, 1.0)), &[1.0, 0.6], 24)?.lagrangian_defect())
    });
    s.run("csv_round_trip", 1e-15, || {
        let chart = Arc::new(KahlerChart::flat(2));
        let spec = RandomTorusSpec {
            center: CVec::zeros(2),
            radii: vec![1.0, 0.8],
            amplitude: 0.05,
            modes: 2,
            seed: 4,
        };
        let imm = random_torus(chart.clone(), &spec, 12)?;
        let mut buf = Vec::new();
        save_csv(&imm, &mut buf)?;
        let back = load_csv(buf.as_slice(), chart, vec![None, None])?;
        Ok(imm.points().iter().zip(back.points()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    });
}

fn maslov_suite(s: &mut Suite) {
    s.run("clifford_is_critical", 1e-6, || {
        let imm = clifford_torus(Arc::new(KahlerChart::fubini_study(2, 1.0)), &[1.0, 1.0], 32)?;
        Ok(maslov_form(&imm)?.sup_norm)
    });
    s.run("circle_loop_integral", 1e-8, || {
        let imm = circle(Arc::new(KahlerChart::flat(1)), C64::new(0.2, 0.1), 1.3, 512)?;
        let xi = maslov_form(&imm)?.xi;
        Ok((loop_integrals(&imm, &xi)[0] + std::f64::consts::TAU).abs())
    });
    s.run("trace_matches_canonical_bundle", 1e-4, || {
        let spec = RandomTorusSpec { center: CVec::zeros(2), radii: vec![0.6, 0.5], amplitude: 0.05, modes: 1, seed: 9 };
        let imm = random_torus(Arc::new(KahlerChart::fubini_study(2, 1.0)), &spec, 64)?;
        let a = maslov_form(&imm)?.xi;
        let b = maslov_form_oracle(&imm)?;
        Ok(a.sub(&b).sup_abs() / a.sup_abs().max(1.0))
    });
}

fn geodesic(nodes: usize) -> Result<GridImmersion> {
    let ell = std::f64::consts::TAU;
    let chart = KahlerChart::upper_half_plane(2.0).with_deck(DeckTransform::dilation(ell));
    core_geodesic(Arc::new(chart), 0, ell, nodes)
}

fn linearize_suite(s: &mut Suite) {
    s.run("ltilde_matches_ke_form", 1e-8, || {
        let imm = geodesic(64)?;
        let f: Vec<f64> = (0..64)
            .map(|i| {
                let t = imm.grid().coordinate(i, 0);
                (2.0 * t).sin() + 0.3 * (t + 1.0).cos()
            })
            .collect();
        let f = imm.demean_j(&f);
        let a = operator_ltilde(&imm)?.apply(&f)?;
        let b = ke_ltilde_reference(&imm, &f)?;
        let scale = b.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        Ok(a.iter().zip(&b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs())) / scale)
    });
    s.run("ltilde_spectrum", 1e-4, || {
        let imm = geodesic(128)?;
        let lambda = imm.chart().lambda().ok_or(GeomError::NoEinsteinConstant)?;
        let length = imm.total_volumes().0;
        let vals = operator_ltilde(&imm)?.spectrum(8)?;
        Ok(vals
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let k = (i / 2 + 1) as f64;
                let exact = 1.0 + (std::f64::consts::TAU * k / length).powi(2) / lambda.abs();
                (v - exact).abs() / exact
            })
            .fold(0.0, f64::max))
    });
}

fn isotopy_suite(s: &mut Suite) {
    s.run("moser_keeps_clifford_lagrangian", 1e-6, || {
        let imm = clifford_torus(Arc::new(KahlerChart::fubini_study(2, 1.0)), &[1.0, 1.0], 16)?;
        let phi = Polynomial::new()
            .with_term(C64::new(0.05, 0.0), vec![1, 0], vec![0, 1])
            .with_term(C64::new(0.0, 0.005), vec![2, 0], vec![0, 1]);
        let path = ChartPath { base: KahlerChart::fubini_study(2, 1.0), potential: Some(phi), conformal: None };
        let run = moser_flow(&imm, &FormFamily::new(path, FormMode::Kahler)?, 1.0, 40)?;
        Ok(run.trace.iter().fold(0.0_f64, |m, st| m.max(st.defect)))
    });
}

fn persist_suite(s: &mut Suite) {
    s.run("scalar_maslov_vanishes_at_base", 1e-12, || {
        let imm = geodesic(64)?;
        Ok(scalar_maslov(&imm, &vec![0.0; 64])?.iter().fold(0.0_f64, |m, x| m.max(x.abs())))
    });
    s.run("round_trip_returns_home", 1e-8, || {
        let ell = std::f64::consts::TAU;
        let chart = KahlerChart::upper_half_plane(2.0).with_deck(DeckTransform::dilation(ell));
        let bump = LogPeriodicConformal { amplitude: 0.1, period: ell, mode: 1.0, phase: 0.3 };
        let path = ChartPath { base: chart, potential: None, conformal: Some(bump) };
        let problem = ContinuationProblem { steps: 4, ..ContinuationProblem::new(geodesic(64)?, path) };
        let (fwd, back) = round_trip(&problem)?;
        let worst_xi = fwd.steps.iter().fold(0.0_f64, |m, st| m.max(st.sup_xi));
        if worst_xi > 1e-8 {
            return Ok(f64::INFINITY);
        }
        Ok(back.last().f_norm())
    });
}
