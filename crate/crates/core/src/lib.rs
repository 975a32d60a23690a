//! Numerical workbench for totally real submanifolds of Kähler manifolds.
//!
//! Charts with closed-form potentials ([`kahler`]) carry periodic grid
//! immersions ([`immersion`]) whose J-volume, Maslov form and J-mean curvature
//! are computed in [`maslov`]. [`linearize`] assembles the linearised Maslov
//! operators, [`isotopy`] transports Lagrangians along cohomologous families,
//! and [`persist`] runs Newton continuation for J-minimal immersions.

pub mod conventions;
pub mod error;
pub mod immersion;
pub mod isotopy;
pub mod kahler;
pub mod linearize;
pub mod maslov;
pub mod persist;
pub mod scenario;
pub mod trlinalg;

pub use error::{GeomError, Result};

pub type C64 = num_complex::Complex<f64>;
pub type CMat = nalgebra::DMatrix<C64>;
pub type CVec = nalgebra::DVector<C64>;
