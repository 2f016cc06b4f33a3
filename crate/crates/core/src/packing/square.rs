use std::f64::consts::FRAC_1_SQRT_2;

use super::{LatticeShape, PackingStrategy};
use crate::geometry::PackingKind;

/// Circles inscribing squares of side `√2·r_l`, identical rows.
#[derive(Debug, Default, Clone, Copy)]
pub struct SquarePacking;

impl PackingStrategy for SquarePacking {
    fn name(&self) -> &'static str {
        "square"
    }

    fn kind(&self) -> PackingKind {
        PackingKind::Square
    }

    fn shape(&self) -> LatticeShape {
        // First center at (r_l·cos π/4, r_l·sin π/4); the inscribed square's
        // half side is the same r_l/√2 in both directions.
        LatticeShape {
            x_pitch: std::f64::consts::SQRT_2,
            y_pitch: std::f64::consts::SQRT_2,
            row_offsets: vec![FRAC_1_SQRT_2],
            first_row_y: FRAC_1_SQRT_2,
            half_width: FRAC_1_SQRT_2,
            half_height: FRAC_1_SQRT_2,
        }
    }
}
