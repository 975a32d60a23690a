//! The single convention record shared by every module.
//!
//! * Tangent vectors of a chart on `C^n` are complex `n`-vectors; `J` is
//!   multiplication by `i`.
//! * The Hermitian matrix of a chart is `h_{ij} = 2 ∂²K/∂z_i∂z̄_j`, so that
//!   the Kähler form is `ω = i∂∂̄K` and `K = |z|²/2` gives the flat structure.
//! * `h(u, v) = uᵀ h v̄`, `g = Re h`, `ω = −Im h`, hence `ω(X, Y) = g(JX, Y)`.
//! * The Ricci form is `ρ = −i∂∂̄ log det h`, stored as the Hermitian matrix
//!   `R = −2 ∂∂̄ log det h` with `Ric = Re(uᵀ R v̄)` and `ρ = −Im(uᵀ R v̄)`.
//! * `d^c = i(∂̄ − ∂)`, so `dd^c = 2i∂∂̄`.
//! * Grids are uniform on `[0, 2π)^n`; all first derivatives use the
//!   fourth-order central stencil and integrals the periodic trapezoid rule.
//! * The Maslov form satisfies `∇_X Ω_J = i ξ_J(X) Ω_J`; a round circle of
//!   radius `r` in flat `C` has `ξ_J(∂_θ) = −1`, `H_J` pointing inward.

use sha2::{Digest, Sha256};

pub const CONVENTION_RECORD: &str = "\
h=2*ddbar(K); h(u,v)=u^T h conj(v); g=Re h; omega=-Im h; J=i\n\
rho=-i ddbar log det h; R=-2 ddbar log det h; Ric=Re(u^T R conj v)\n\
dc=i(dbar-d); grid=[0,2pi)^n uniform; D=4th-order central; quadrature=periodic trapezoid\n\
nabla Omega_J = i xi_J Omega_J; circle xi(d_theta)=-1; H_J=-J iota_*(xi^sharp)\n\
moser: form_t(X_t,.)+alphadot_t=0; kahler alphadot=dc(phi)/2; ricci alphadot=-dc(d_t log det h_t)/2\n\
weinstein: Y=-A^{-1} alpha^sharp; iota_alpha=exp(J iota_* Y)\n";

/// Hex SHA-256 of the convention record, stamped into every report.
pub fn convention_hash() -> String {
    let digest = Sha256::digest(CONVENTION_RECORD.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
