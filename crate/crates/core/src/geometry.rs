//! Scalar geometry of sensing and loitering.
//!
//! Radii, overlap areas and the two coverage predicates every other module
//! builds on. All functions are pure.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{domain, Result};

/// Slack applied to every "distance ≤ radius" comparison so that points lying
/// exactly on a boundary stay covered after rounding.
pub const BOUNDARY_EPS: f64 = 1e-9;

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const SQRT_3: f64 = 1.732_050_807_568_877_2;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Unit vector at `angle` radians from +x.
    pub fn from_angle(angle: f64) -> Self {
        Self::new(angle.cos(), angle.sin())
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Rectangular area with one corner at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AreaSpec {
    pub x_extent: f64,
    pub y_extent: f64,
}

impl AreaSpec {
    pub fn new(x_extent: f64, y_extent: f64) -> Result<Self> {
        if !(x_extent.is_finite() && x_extent > 0.0 && y_extent.is_finite() && y_extent > 0.0) {
            return Err(domain(format!(
                "area extents must be positive and finite, got {x_extent} x {y_extent}"
            )));
        }
        Ok(Self { x_extent, y_extent })
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= 0.0 && p.y >= 0.0 && p.x <= self.x_extent && p.y <= self.y_extent
    }

    pub fn center(&self) -> Vec2 {
        Vec2::new(self.x_extent / 2.0, self.y_extent / 2.0)
    }
}

/// Down-looking sensor carried at a fixed altitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorModel {
    /// Field-of-view half angle, radians.
    pub fov_half_angle: f64,
    /// Loiter altitude, meters.
    pub altitude: f64,
}

impl SensorModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.fov_half_angle > 0.0 && self.fov_half_angle < PI / 2.0) {
            return Err(domain(format!(
                "fov half angle must lie in (0, pi/2), got {}",
                self.fov_half_angle
            )));
        }
        if !(self.altitude > 0.0 && self.altitude.is_finite()) {
            return Err(domain(format!("altitude must be positive, got {}", self.altitude)));
        }
        Ok(())
    }

    /// Relative sensing quality. Only the proportionality `q ∝ 1/h` is
    /// meaningful; the unit is arbitrary.
    pub fn relative_quality(&self) -> f64 {
        1.0 / self.altitude
    }
}

/// Which closed form to use for the minimum turning radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TurnRadiusModel {
    /// `v²·ψ_max/g`, bank angle used directly.
    #[default]
    Paper,
    /// Coordinated-turn form `v²/(g·tan ψ_max)`.
    Standard,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlatformModel {
    /// Cruise speed, m/s.
    pub speed: f64,
    /// Maximum bank angle, radians.
    pub max_bank: f64,
    /// Gravitational acceleration, m/s².
    pub gravity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PackingKind {
    Square,
    Hexagon,
}

impl PackingKind {
    pub fn name(self) -> &'static str {
        match self {
            PackingKind::Square => "square",
            PackingKind::Hexagon => "hexagon",
        }
    }
}

impl fmt::Display for PackingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LoiterDirection {
    #[default]
    Ccw,
    Cw,
}

impl LoiterDirection {
    pub fn sign(self) -> f64 {
        match self {
            LoiterDirection::Ccw => 1.0,
            LoiterDirection::Cw => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoiterCircle {
    pub center: Vec2,
    pub radius: f64,
    pub direction: LoiterDirection,
}

impl LoiterCircle {
    pub fn ccw(center: Vec2, radius: f64) -> Self {
        Self { center, radius, direction: LoiterDirection::Ccw }
    }

    /// Position of a UAV at loiter phase `phase`.
    pub fn point_at(&self, phase: f64) -> Vec2 {
        self.center + Vec2::from_angle(phase) * self.radius
    }

    /// Flight heading at loiter phase `phase` (tangent in the loiter direction).
    pub fn heading_at(&self, phase: f64) -> f64 {
        phase + self.direction.sign() * PI / 2.0
    }

    /// Signed angular rate for airspeed `speed`.
    pub fn angular_rate(&self, speed: f64) -> f64 {
        self.direction.sign() * speed / self.radius
    }

    pub fn period(&self, speed: f64) -> f64 {
        2.0 * PI * self.radius / speed
    }
}

/// Selects which variant of a packing parameter to report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Table1Mode {
    /// The closed forms as tabulated.
    Paper,
    /// Values computed from exact circle-circle intersection.
    #[default]
    Exact,
}

/// A parameter carried in both its tabulated and its exact form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Variants {
    pub paper: f64,
    pub exact: f64,
}

impl Variants {
    pub fn select(&self, mode: Table1Mode) -> f64 {
        match mode {
            Table1Mode::Paper => self.paper,
            Table1Mode::Exact => self.exact,
        }
    }

    /// `exact - paper`; zero where the tabulated form is exact.
    pub fn discrepancy(&self) -> f64 {
        self.exact - self.paper
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PackingParams {
    pub side_length: f64,
    pub x_pitch: f64,
    pub y_pitch: f64,
    pub overlap_angle: f64,
    pub half_overlap_area: Variants,
    pub effective_area: Variants,
}

pub fn coverage_radius(sensor: &SensorModel) -> Result<f64> {
    sensor.validate()?;
    Ok(sensor.altitude * sensor.fov_half_angle.tan())
}

pub fn min_turn_radius(platform: &PlatformModel, model: TurnRadiusModel) -> Result<f64> {
    let PlatformModel { speed, max_bank, gravity } = *platform;
    if !(gravity > 0.0 && gravity.is_finite()) {
        return Err(domain(format!("gravity must be positive, got {gravity}")));
    }
    if !(speed >= 0.0 && speed.is_finite()) {
        return Err(domain(format!("speed must be non-negative, got {speed}")));
    }
    if !(max_bank > 0.0 && max_bank < PI / 2.0) {
        return Err(domain(format!("max bank must lie in (0, pi/2), got {max_bank}")));
    }
    Ok(match model {
        TurnRadiusModel::Paper => speed * speed * max_bank / gravity,
        TurnRadiusModel::Standard => speed * speed / (gravity * max_bank.tan()),
    })
}

/// Largest loiter radius for which the swept annuli of a packing still cover
/// the area: a neighbour's center at pitch `d·r_l` must be reached by the
/// sweep, `(d − 1)·r_l ≤ r_c`.
pub fn max_loiter_radius(r_c: f64, kind: PackingKind) -> f64 {
    match kind {
        PackingKind::Hexagon => r_c / (SQRT_3 - 1.0),
        PackingKind::Square => r_c / (SQRT_2 - 1.0),
    }
}

/// Smallest communication radius that links every packing neighbour.
pub fn min_comm_radius(r_l_max: f64, kind: PackingKind) -> f64 {
    match kind {
        PackingKind::Square => SQRT_2 * r_l_max,
        PackingKind::Hexagon => SQRT_3 * r_l_max,
    }
}

/// Area of intersection of two radius-`r` circles whose centers are `d` apart.
pub fn lens_area(d: f64, r: f64) -> f64 {
    let d = d.abs();
    if d >= 2.0 * r {
        return 0.0;
    }
    2.0 * r * r * (d / (2.0 * r)).acos() - 0.5 * d * (4.0 * r * r - d * d).sqrt()
}

pub fn packing_params(r_l: f64, kind: PackingKind) -> PackingParams {
    let r2 = r_l * r_l;
    match kind {
        PackingKind::Square => {
            let pitch = SQRT_2 * r_l;
            let lens = lens_area(pitch, r_l);
            PackingParams {
                side_length: SQRT_2 * r_l,
                x_pitch: pitch,
                y_pitch: pitch,
                overlap_angle: PI / 2.0,
                half_overlap_area: Variants { paper: (PI - 2.0) * r2 / 4.0, exact: lens / 2.0 },
                effective_area: Variants { paper: (4.0 - PI) * r2, exact: PI * r2 - 4.0 * lens },
            }
        }
        PackingKind::Hexagon => {
            let pitch = SQRT_3 * r_l;
            let lens = lens_area(pitch, r_l);
            PackingParams {
                side_length: r_l,
                x_pitch: pitch,
                y_pitch: 1.5 * r_l,
                overlap_angle: PI / 3.0,
                half_overlap_area: Variants { paper: (PI - 3.0) * r2 / 6.0, exact: lens / 2.0 },
                effective_area: Variants { paper: (6.0 - PI) * r2, exact: PI * r2 - 6.0 * lens },
            }
        }
    }
}

/// `(1−f)·π·r_l² − Σ overlaps`. May go negative; callers interpret.
pub fn effective_coverage(r_l: f64, outside_fraction: f64, neighbor_overlaps: &[f64]) -> f64 {
    (1.0 - outside_fraction) * PI * r_l * r_l - neighbor_overlaps.iter().sum::<f64>()
}

/// Whether a UAV loitering on `circle` passes within `r_c` of `p` at some
/// point of its cycle. The sweep is the annulus `|d − r_l| ≤ r_c`.
pub fn covered_over_cycle(p: Vec2, circle: &LoiterCircle, r_c: f64) -> bool {
    (p.distance(circle.center) - circle.radius).abs() <= r_c + BOUNDARY_EPS
}

/// Whether `p` lies within `r_c` of any of the instantaneous `positions`.
pub fn covered_at_instant(p: Vec2, positions: &[Vec2], r_c: f64) -> bool {
    positions.iter().any(|q| p.distance(*q) <= r_c + BOUNDARY_EPS)
}

/// Wraps an angle to `[0, 2π)`.
pub fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(2.0 * PI);
    if w >= 2.0 * PI {
        0.0
    } else {
        w
    }
}

/// Signed smallest difference `a − b`, in `(−π, π]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let d = wrap_angle(a - b);
    if d > PI {
        d - 2.0 * PI
    } else {
        d
    }
}
