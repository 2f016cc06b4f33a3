//! Shortest bounded-curvature paths between planar poses.
//!
//! The six classic words (four CSC, two CCC) are solved in closed form in a
//! frame normalized by the turning radius; the shortest valid word wins.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{domain, Result};
use crate::geometry::{angle_diff, wrap_angle, Vec2};

mod transition;

pub use transition::{
    min_separation, plan_transition, stagger_transitions, LoiterTrack, SeparationReport,
    StaggerOutcome, TransitionPlan, TransitionRequest, MAX_PLAN_ITERATIONS,
};

const TAU: f64 = 2.0 * PI;

/// Slack on the arc-length argument of [`sample`].
const SAMPLE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub position: Vec2,
    /// Radians in `[0, 2π)`.
    pub heading: f64,
}

impl Pose {
    pub fn new(position: Vec2, heading: f64) -> Self {
        Self { position, heading: wrap_angle(heading) }
    }

    pub fn xyh(x: f64, y: f64, heading: f64) -> Self {
        Self::new(Vec2::new(x, y), heading)
    }

    /// Position distance plus absolute heading difference.
    pub fn distance_to(&self, other: &Pose) -> (f64, f64) {
        (
            self.position.distance(other.position),
            angle_diff(self.heading, other.heading).abs(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Segment {
    Left,
    Straight,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DubinsWord {
    LSL,
    LSR,
    RSL,
    RSR,
    RLR,
    LRL,
}

impl DubinsWord {
    pub const ALL: [DubinsWord; 6] = [
        DubinsWord::LSL,
        DubinsWord::LSR,
        DubinsWord::RSL,
        DubinsWord::RSR,
        DubinsWord::RLR,
        DubinsWord::LRL,
    ];

    pub fn segments(self) -> [Segment; 3] {
        use Segment::*;
        match self {
            DubinsWord::LSL => [Left, Straight, Left],
            DubinsWord::LSR => [Left, Straight, Right],
            DubinsWord::RSL => [Right, Straight, Left],
            DubinsWord::RSR => [Right, Straight, Right],
            DubinsWord::RLR => [Right, Left, Right],
            DubinsWord::LRL => [Left, Right, Left],
        }
    }
}

impl fmt::Display for DubinsWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DubinsPath {
    pub word: DubinsWord,
    /// Arc lengths in meters.
    pub segment_lengths: [f64; 3],
    pub turn_radius: f64,
    pub start: Pose,
}

impl DubinsPath {
    /// A zero-length path sitting at `pose`.
    pub fn stationary(pose: Pose, turn_radius: f64) -> Self {
        Self { word: DubinsWord::LSL, segment_lengths: [0.0; 3], turn_radius, start: pose }
    }

    pub fn length(&self) -> f64 {
        self.segment_lengths.iter().sum()
    }

    pub fn end(&self) -> Pose {
        advance_path(self, self.length())
    }
}

fn mod2pi(a: f64) -> f64 {
    wrap_angle(a)
}

/// Normalized `(t, p, q)` for one word, all in units of the turning radius.
fn word_params(word: DubinsWord, d: f64, alpha: f64, beta: f64) -> Option<[f64; 3]> {
    let (sa, sb, ca, cb) = (alpha.sin(), beta.sin(), alpha.cos(), beta.cos());
    let c_ab = (alpha - beta).cos();
    let sqrt_nonneg = |v: f64| if v < -1e-10 { None } else { Some(v.max(0.0).sqrt()) };
    match word {
        DubinsWord::LSL => {
            let p = sqrt_nonneg(2.0 + d * d - 2.0 * c_ab + 2.0 * d * (sa - sb))?;
            let tmp = (cb - ca).atan2(d + sa - sb);
            Some([mod2pi(tmp - alpha), p, mod2pi(beta - tmp)])
        }
        DubinsWord::RSR => {
            let p = sqrt_nonneg(2.0 + d * d - 2.0 * c_ab + 2.0 * d * (sb - sa))?;
            let tmp = (ca - cb).atan2(d - sa + sb);
            Some([mod2pi(alpha - tmp), p, mod2pi(tmp - beta)])
        }
        DubinsWord::LSR => {
            let p = sqrt_nonneg(-2.0 + d * d + 2.0 * c_ab + 2.0 * d * (sa + sb))?;
            let tmp = (-ca - cb).atan2(d + sa + sb) - (-2.0f64).atan2(p);
            Some([mod2pi(tmp - alpha), p, mod2pi(tmp - beta)])
        }
        DubinsWord::RSL => {
            let p = sqrt_nonneg(-2.0 + d * d + 2.0 * c_ab - 2.0 * d * (sa + sb))?;
            let tmp = (ca + cb).atan2(d - sa - sb) - 2.0f64.atan2(p);
            Some([mod2pi(alpha - tmp), p, mod2pi(beta - tmp)])
        }
        DubinsWord::RLR => {
            let tmp = (6.0 - d * d + 2.0 * c_ab + 2.0 * d * (sa - sb)) / 8.0;
            if tmp.abs() > 1.0 {
                return None;
            }
            let phi = (ca - cb).atan2(d - sa + sb);
            let p = mod2pi(TAU - tmp.acos());
            let t = mod2pi(alpha - phi + mod2pi(p / 2.0));
            Some([t, p, mod2pi(alpha - beta - t + mod2pi(p))])
        }
        DubinsWord::LRL => {
            let tmp = (6.0 - d * d + 2.0 * c_ab + 2.0 * d * (sb - sa)) / 8.0;
            if tmp.abs() > 1.0 {
                return None;
            }
            let phi = (ca - cb).atan2(d + sa - sb);
            let p = mod2pi(TAU - tmp.acos());
            let t = mod2pi(-alpha - phi + p / 2.0);
            Some([t, p, mod2pi(mod2pi(beta) - alpha - t + mod2pi(p))])
        }
    }
}

/// The path of one specific word, if that word connects the poses.
pub fn word_path(a: Pose, b: Pose, turn_radius: f64, word: DubinsWord) -> Option<DubinsPath> {
    let delta = b.position - a.position;
    let d = delta.norm() / turn_radius;
    let theta = if d > 0.0 { mod2pi(delta.y.atan2(delta.x)) } else { 0.0 };
    let alpha = mod2pi(a.heading - theta);
    let beta = mod2pi(b.heading - theta);
    word_params(word, d, alpha, beta).map(|[t, p, q]| DubinsPath {
        word,
        segment_lengths: [t * turn_radius, p * turn_radius, q * turn_radius],
        turn_radius,
        start: a,
    })
}

pub fn shortest_path(a: Pose, b: Pose, turn_radius: f64) -> Result<DubinsPath> {
    if !(turn_radius > 0.0 && turn_radius.is_finite()) {
        return Err(domain(format!("turn radius must be positive, got {turn_radius}")));
    }
    if !(a.position.is_finite() && b.position.is_finite()) {
        return Err(domain("pose positions must be finite"));
    }
    let (dp, dh) = a.distance_to(&b);
    if dp <= 1e-12 * turn_radius && dh <= 1e-12 {
        return Ok(DubinsPath::stationary(a, turn_radius));
    }
    DubinsWord::ALL
        .iter()
        .filter_map(|w| word_path(a, b, turn_radius, *w))
        .min_by(|x, y| x.length().total_cmp(&y.length()))
        .ok_or_else(|| domain("no Dubins word connects the poses"))
}

/// Pose after moving `len` along one segment type.
pub fn advance_segment(pose: Pose, seg: Segment, len: f64, rho: f64) -> Pose {
    let (x, y, h) = (pose.position.x, pose.position.y, pose.heading);
    match seg {
        Segment::Straight => Pose::xyh(x + len * h.cos(), y + len * h.sin(), h),
        Segment::Left => {
            let h2 = h + len / rho;
            Pose::xyh(x + rho * (h2.sin() - h.sin()), y + rho * (h.cos() - h2.cos()), h2)
        }
        Segment::Right => {
            let h2 = h - len / rho;
            Pose::xyh(x + rho * (h.sin() - h2.sin()), y + rho * (h2.cos() - h.cos()), h2)
        }
    }
}

fn advance_path(path: &DubinsPath, s: f64) -> Pose {
    let mut pose = path.start;
    let mut left = s.max(0.0);
    for (seg, len) in path.word.segments().into_iter().zip(path.segment_lengths) {
        let step = left.min(len);
        pose = advance_segment(pose, seg, step, path.turn_radius);
        left -= step;
        if left <= 0.0 {
            break;
        }
    }
    pose
}

/// Pose after arc length `s` along `path`.
pub fn sample(path: &DubinsPath, s: f64) -> Result<Pose> {
    let total = path.length();
    if !(-SAMPLE_EPS..=total + SAMPLE_EPS).contains(&s) {
        return Err(domain(format!("arc length {s} outside [0, {total}]")));
    }
    Ok(advance_path(path, s.clamp(0.0, total)))
}

/// Poses every `step` meters plus the endpoint.
pub fn sample_many(path: &DubinsPath, step: f64) -> Result<Vec<Pose>> {
    if !(step > 0.0) {
        return Err(domain(format!("sample step must be positive, got {step}")));
    }
    let total = path.length();
    let n = (total / step).floor() as usize;
    let mut out: Vec<Pose> = (0..=n).map(|i| advance_path(path, i as f64 * step)).collect();
    if total - n as f64 * step > 1e-12 {
        out.push(advance_path(path, total));
    }
    Ok(out)
}
