use super::{LatticeShape, PackingStrategy};
use crate::geometry::PackingKind;

const SQRT_3: f64 = 1.732_050_807_568_877_2;

/// Circles inscribing pointy-top hexagons of side `r_l`.
///
/// Row 1 starts at `(r_l·cos π/6, r_l·sin π/6)`; row 2 starts on the `x = 0`
/// boundary `3r_l/2` higher. The two row templates then alternate upward.
#[derive(Debug, Default, Clone, Copy)]
pub struct HexagonPacking;

impl PackingStrategy for HexagonPacking {
    fn name(&self) -> &'static str {
        "hexagon"
    }

    fn kind(&self) -> PackingKind {
        PackingKind::Hexagon
    }

    fn shape(&self) -> LatticeShape {
        LatticeShape {
            x_pitch: SQRT_3,
            y_pitch: 1.5,
            row_offsets: vec![SQRT_3 / 2.0, 0.0],
            first_row_y: 0.5,
            // hexagon half width and vertex height
            half_width: SQRT_3 / 2.0,
            half_height: 1.0,
        }
    }
}
