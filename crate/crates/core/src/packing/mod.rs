//! Loiter-circle layouts over a rectangular area.
//!
//! Each packing variant is a [`PackingStrategy`] describing its lattice per
//! unit loiter radius. Strategies are looked up by name in a
//! [`StrategyRegistry`], so configs and the CLI can select one at runtime.
//! Layout generation, counting and breakpoint enumeration are shared code
//! driven by the strategy's [`LatticeShape`].

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::coverage::{self, Region};
use crate::error::{domain, Error, Result};
use crate::geometry::{self, AreaSpec, LoiterCircle, PackingKind, PackingParams, Vec2};

mod hexagon;
mod square;

pub use hexagon::HexagonPacking;
pub use square::SquarePacking;

/// A boundary circle is appended while the covered span falls short of the
/// extent by more than this many meters.
pub const SPAN_TOLERANCE: f64 = 1e-9;

/// Lattice geometry for a unit loiter radius. Multiply by `r_l` for meters.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeShape {
    pub x_pitch: f64,
    pub y_pitch: f64,
    /// x of the first center for each row template; rows cycle through them.
    pub row_offsets: Vec<f64>,
    pub first_row_y: f64,
    /// Footprint half width used for the x-span test.
    pub half_width: f64,
    /// Footprint half height used for the y-span test.
    pub half_height: f64,
}

/// Radii `extent / (lead + pitch·m)`, `m = 0, 1, …`, at which one axis count
/// steps. Counts are constant between consecutive members.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BreakpointFamily {
    pub extent: f64,
    pub lead: f64,
    pub pitch: f64,
}

impl BreakpointFamily {
    pub fn radius(&self, m: u64) -> f64 {
        self.extent / (self.lead + self.pitch * m as f64)
    }

    /// Largest `m` whose radius is still `≥ r_min`, if any.
    pub fn last_index_above(&self, r_min: f64) -> Option<u64> {
        let m = ((self.extent / r_min - self.lead) / self.pitch).floor();
        if m < 0.0 {
            return None;
        }
        let mut m = m as u64;
        // floor() on a rounded quotient can overshoot by one
        while m > 0 && self.radius(m) < r_min {
            m -= 1;
        }
        (self.radius(m) >= r_min).then_some(m)
    }
}

impl LatticeShape {
    fn axis_count(extent: f64, lead: f64, pitch: f64) -> usize {
        let short = extent - lead - SPAN_TOLERANCE;
        if short <= 0.0 {
            1
        } else {
            1 + (short / pitch).ceil() as usize
        }
    }

    pub fn row_count(&self, area: &AreaSpec, r_l: f64) -> usize {
        Self::axis_count(
            area.y_extent,
            (self.first_row_y + self.half_height) * r_l,
            self.y_pitch * r_l,
        )
    }

    /// Circles in a row built from template `template`.
    pub fn template_count(&self, area: &AreaSpec, r_l: f64, template: usize) -> usize {
        Self::axis_count(
            area.x_extent,
            (self.row_offsets[template] + self.half_width) * r_l,
            self.x_pitch * r_l,
        )
    }

    pub fn breakpoint_families(&self, area: &AreaSpec) -> Vec<BreakpointFamily> {
        let mut out: Vec<BreakpointFamily> = self
            .row_offsets
            .iter()
            .map(|off| BreakpointFamily {
                extent: area.x_extent,
                lead: off + self.half_width,
                pitch: self.x_pitch,
            })
            .collect();
        out.push(BreakpointFamily {
            extent: area.y_extent,
            lead: self.first_row_y + self.half_height,
            pitch: self.y_pitch,
        });
        out
    }
}

pub trait PackingStrategy: Send + Sync + fmt::Debug {
    /// Registry key.
    fn name(&self) -> &'static str;

    fn kind(&self) -> PackingKind;

    fn shape(&self) -> LatticeShape;

    fn max_loiter_radius(&self, r_c: f64) -> f64 {
        geometry::max_loiter_radius(r_c, self.kind())
    }

    fn min_comm_radius(&self, r_l_max: f64) -> f64 {
        geometry::min_comm_radius(r_l_max, self.kind())
    }

    fn params(&self, r_l: f64) -> PackingParams {
        geometry::packing_params(r_l, self.kind())
    }
}

static SQUARE: SquarePacking = SquarePacking;
static HEXAGON: HexagonPacking = HexagonPacking;

/// The built-in strategy for `kind`.
pub fn builtin(kind: PackingKind) -> &'static dyn PackingStrategy {
    match kind {
        PackingKind::Square => &SQUARE,
        PackingKind::Hexagon => &HEXAGON,
    }
}

/// Name → strategy lookup.
#[derive(Debug, Clone, Default)]
pub struct StrategyRegistry {
    strategies: BTreeMap<&'static str, Arc<dyn PackingStrategy>>,
}

impl StrategyRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Registry holding `square` and `hexagon`.
    pub fn with_builtins() -> Self {
        let mut reg = Self::empty();
        reg.register(Arc::new(SquarePacking));
        reg.register(Arc::new(HexagonPacking));
        reg
    }

    /// Adds or replaces the strategy under its own name.
    pub fn register(&mut self, strategy: Arc<dyn PackingStrategy>) {
        self.strategies.insert(strategy.name(), strategy);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn PackingStrategy>> {
        let key = name.trim().to_ascii_lowercase();
        self.strategies.get(key.as_str()).cloned().ok_or_else(|| {
            Error::Domain(format!(
                "unknown packing `{name}` (available: {})",
                self.names().join(", ")
            ))
        })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.strategies.keys().copied().collect()
    }
}

/// Ordered loiter-circle centers, row by row from the bottom.
#[derive(Debug, Clone, PartialEq)]
pub struct PackingLayout {
    pub kind: PackingKind,
    pub area: AreaSpec,
    pub loiter_radius: f64,
    pub rows: Vec<Vec<Vec2>>,
}

impl PackingLayout {
    pub fn len(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn row_counts(&self) -> Vec<usize> {
        self.rows.iter().map(Vec::len).collect()
    }

    /// Count in the first row (`n_x`).
    pub fn first_row_count(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    /// `(id, row, center)` in row-major order; ids are dense from 0.
    pub fn indexed(&self) -> impl Iterator<Item = (usize, usize, Vec2)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(row, cs)| cs.iter().map(move |c| (row, *c)))
            .enumerate()
            .map(|(id, (row, c))| (id, row, c))
    }

    pub fn centers(&self) -> impl Iterator<Item = Vec2> + '_ {
        self.rows.iter().flatten().copied()
    }

    pub fn circles(&self) -> Vec<LoiterCircle> {
        self.centers().map(|c| LoiterCircle::ccw(c, self.loiter_radius)).collect()
    }
}

fn check_radius(r_l: f64) -> Result<()> {
    if !(r_l > 0.0 && r_l.is_finite()) {
        return Err(domain(format!("loiter radius must be positive, got {r_l}")));
    }
    Ok(())
}

/// Per-row circle counts without materializing centers.
pub fn row_counts(area: &AreaSpec, r_l: f64, strategy: &dyn PackingStrategy) -> Result<Vec<usize>> {
    check_radius(r_l)?;
    let shape = strategy.shape();
    let per_template: Vec<usize> =
        (0..shape.row_offsets.len()).map(|t| shape.template_count(area, r_l, t)).collect();
    let rows = shape.row_count(area, r_l);
    Ok((0..rows).map(|j| per_template[j % per_template.len()]).collect())
}

pub fn uav_count(area: &AreaSpec, r_l: f64, strategy: &dyn PackingStrategy) -> Result<usize> {
    check_radius(r_l)?;
    Ok(count_unchecked(area, r_l, strategy))
}

/// Total count in O(templates).
pub(crate) fn count_unchecked(
    area: &AreaSpec,
    r_l: f64,
    strategy: &dyn PackingStrategy,
) -> usize {
    let shape = strategy.shape();
    let templates = shape.row_offsets.len();
    let rows = shape.row_count(area, r_l);
    (0..templates)
        .map(|t| {
            let rows_with_t = if rows > t { (rows - t).div_ceil(templates) } else { 0 };
            rows_with_t * shape.template_count(area, r_l, t)
        })
        .sum()
}

pub fn pack(area: &AreaSpec, r_l: f64, strategy: &dyn PackingStrategy) -> Result<PackingLayout> {
    check_radius(r_l)?;
    let area = AreaSpec::new(area.x_extent, area.y_extent)?;
    let shape = strategy.shape();
    let counts = row_counts(&area, r_l, strategy)?;
    let rows = counts
        .iter()
        .enumerate()
        .map(|(j, &n)| {
            let x0 = shape.row_offsets[j % shape.row_offsets.len()] * r_l;
            let y = (shape.first_row_y + shape.y_pitch * j as f64) * r_l;
            (0..n).map(|i| Vec2::new(x0 + shape.x_pitch * r_l * i as f64, y)).collect()
        })
        .collect();
    Ok(PackingLayout { kind: strategy.kind(), area, loiter_radius: r_l, rows })
}

/// Fraction of grid points over the layout's area swept by some circle
/// within one loiter cycle. 1.0 means full coverage at this resolution.
pub fn validate_full_coverage(layout: &PackingLayout, r_c: f64, grid_pitch: f64) -> Result<f64> {
    let pts = coverage::sample_grid(&Region::Rect(layout.area), grid_pitch)?;
    Ok(coverage::cycle_fraction(&pts, &layout.circles(), r_c))
}

/// Worst instant-coverage fraction over `phase_samples` common phases, all
/// UAVs loitering counter-clockwise in phase.
pub fn validate_persistent_coverage(
    layout: &PackingLayout,
    r_c: f64,
    grid_pitch: f64,
    phase_samples: usize,
) -> Result<f64> {
    let pts = coverage::sample_grid(&Region::Rect(layout.area), grid_pitch)?;
    let circles = layout.circles();
    let phases = vec![0.0; circles.len()];
    coverage::min_instant_fraction(&pts, &circles, &phases, r_c, phase_samples)
}

/// A loiter circle with its six hexagon-lattice neighbours, center first.
pub fn hexagon_neighborhood(center: Vec2, r_l: f64) -> Vec<LoiterCircle> {
    let pitch = 3f64.sqrt() * r_l;
    std::iter::once(center)
        .chain((0..6).map(|k| center + Vec2::from_angle(k as f64 * std::f64::consts::PI / 3.0) * pitch))
        .map(|c| LoiterCircle::ccw(c, r_l))
        .collect()
}
