use crate::{CMat, CVec, C64};

/// A biholomorphic isometry of a chart, used to close up twisted grids.
#[derive(Debug, Clone, PartialEq)]
pub enum DeckTransform {
    /// Real Möbius map `z ↦ (az + b)/(cz + d)` of the upper half-plane, `ad − bc = 1`.
    Mobius { a: f64, b: f64, c: f64, d: f64 },
    /// Translation `z ↦ z + shift` of flat space.
    Translation { shift: CVec },
}

impl DeckTransform {
    /// The hyperbolic dilation `z ↦ e^ℓ z`.
    pub fn dilation(length: f64) -> Self {
        let s = (0.5 * length).exp();
        DeckTransform::Mobius { a: s, b: 0.0, c: 0.0, d: 1.0 / s }
    }

    pub fn inverse(&self) -> Self {
        match self {
            DeckTransform::Mobius { a, b, c, d } => DeckTransform::Mobius { a: *d, b: -*b, c: -*c, d: *a },
            DeckTransform::Translation { shift } => DeckTransform::Translation { shift: -shift },
        }
    }

    /// `γ(p)` and the complex Jacobian `dγ(p)`.
    pub fn apply(&self, p: &CVec) -> (CVec, CMat) {
        match self {
            DeckTransform::Mobius { a, b, c, d } => {
                let z = p[0];
                let den = z * *c + *d;
                let w = (z * *a + *b) / den;
                (CVec::from_element(1, w), CMat::from_element(1, 1, C64::new(1.0, 0.0) / (den * den)))
            }
            DeckTransform::Translation { shift } => (p + shift, CMat::identity(p.len(), p.len())),
        }
    }
}
