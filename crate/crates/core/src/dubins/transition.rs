//! Phase-synchronized circle-to-circle transitions.
//!
//! A UAV keeps loitering on its source circle for a delay `d`, leaves on the
//! tangent, flies the shortest Dubins path and joins the target circle at the
//! phase it would have had if it had always loitered there,
//! `α(t) = φ₀ + ω_target·t`. The arrival time solves
//! `g(t) = t − d − L(α(t))/v = 0`.

use rayon::prelude::*;

use super::{sample, shortest_path, DubinsPath, Pose};
use crate::error::{domain, Error, Result};
use crate::geometry::{angle_diff, LoiterCircle, Vec2};

/// Bisection cap when solving for the arrival time.
pub const MAX_PLAN_ITERATIONS: usize = 100;

const BREAK_OFF_CANDIDATES: usize = 36;
const SCAN_STEPS_PER_PERIOD: f64 = 72.0;
const ARRIVAL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionRequest {
    pub uav_id: usize,
    pub source: LoiterCircle,
    /// Loiter phase at `t = 0`, shared by the whole synchronized fleet.
    pub source_phase: f64,
    pub target: LoiterCircle,
    pub turn_radius: f64,
    pub speed: f64,
    /// No break-off before this time.
    pub earliest_departure: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionPlan {
    pub uav_id: usize,
    pub source: LoiterCircle,
    pub source_phase: f64,
    pub target: LoiterCircle,
    pub break_off_phase: f64,
    pub depart_delay: f64,
    pub path: DubinsPath,
    pub join_phase: f64,
    pub arrival_time: f64,
    pub speed: f64,
}

impl TransitionPlan {
    /// Phase a UAV loitering on the target since `t = 0` would have at `t`.
    pub fn sync_phase_at(&self, t: f64) -> f64 {
        self.source_phase + self.target.angular_rate(self.speed) * t
    }

    pub fn pose_at(&self, t: f64) -> Pose {
        if t < self.depart_delay {
            let phi = self.source_phase + self.source.angular_rate(self.speed) * t;
            Pose::new(self.source.point_at(phi), self.source.heading_at(phi))
        } else if t < self.arrival_time {
            let s = ((t - self.depart_delay) * self.speed).min(self.path.length());
            sample(&self.path, s).unwrap_or(self.path.start)
        } else {
            let phi = self.sync_phase_at(t);
            Pose::new(self.target.point_at(phi), self.target.heading_at(phi))
        }
    }

    pub fn position_at(&self, t: f64) -> Vec2 {
        self.pose_at(t).position
    }

    /// Angle between the join phase and the synchronized target phase.
    pub fn sync_residual(&self) -> f64 {
        angle_diff(self.join_phase, self.sync_phase_at(self.arrival_time)).abs()
    }

    pub fn is_stationary(&self) -> bool {
        self.path.length() == 0.0
    }
}

fn validate(req: &TransitionRequest) -> Result<()> {
    if !(req.speed > 0.0 && req.speed.is_finite()) {
        return Err(domain(format!("speed must be positive, got {}", req.speed)));
    }
    if !(req.turn_radius > 0.0 && req.turn_radius.is_finite()) {
        return Err(domain(format!("turn radius must be positive, got {}", req.turn_radius)));
    }
    for (name, c) in [("source", req.source), ("target", req.target)] {
        if !(c.radius > 0.0 && c.radius.is_finite() && c.center.is_finite()) {
            return Err(domain(format!("{name} circle is degenerate")));
        }
    }
    let min_r = req.source.radius.min(req.target.radius);
    if req.turn_radius > min_r * (1.0 + 1e-12) {
        return Err(domain(format!(
            "turn radius {} exceeds loiter radius {min_r}",
            req.turn_radius
        )));
    }
    if !(req.earliest_departure >= 0.0 && req.earliest_departure.is_finite()) {
        return Err(domain("earliest departure must be a finite non-negative time"));
    }
    Ok(())
}

fn same_circle(a: &LoiterCircle, b: &LoiterCircle) -> bool {
    a.direction == b.direction
        && a.center.distance(b.center) <= 1e-9 * (1.0 + a.radius)
        && (a.radius - b.radius).abs() <= 1e-12 * a.radius
}

/// Earliest synchronized arrival for a break-off after delay `d`.
fn solve_for_delay(req: &TransitionRequest, d: f64) -> Option<TransitionPlan> {
    let v = req.speed;
    let omega_s = req.source.angular_rate(v);
    let omega_t = req.target.angular_rate(v);
    let beta = req.source_phase + omega_s * d;
    let start = Pose::new(req.source.point_at(beta), req.source.heading_at(beta));
    let path_at = |t: f64| {
        let alpha = req.source_phase + omega_t * t;
        let end = Pose::new(req.target.point_at(alpha), req.target.heading_at(alpha));
        shortest_path(start, end, req.turn_radius).ok()
    };
    let g = |t: f64| path_at(t).map(|p| t - d - p.length() / v);

    let period_t = req.target.period(v);
    let h = period_t / SCAN_STEPS_PER_PERIOD;
    let reach = req.source.center.distance(req.target.center)
        + req.source.radius
        + req.target.radius
        + 8.0 * std::f64::consts::PI * req.turn_radius;
    let t_end = d + reach / v + 2.0 * period_t;

    let mut t0 = d;
    let mut g0 = g(t0)?;
    while t0 < t_end {
        let t1 = t0 + h;
        let g1 = g(t1)?;
        if g0 < 0.0 && g1 >= 0.0 {
            let (mut lo, mut hi) = (t0, t1);
            for _ in 0..MAX_PLAN_ITERATIONS {
                let mid = 0.5 * (lo + hi);
                if g(mid)? < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo <= 1e-12 * (1.0 + hi) {
                    break;
                }
            }
            let path = path_at(hi)?;
            let arrival = d + path.length() / v;
            // A jump in the shortest word can fake a sign change.
            if (arrival - hi).abs() <= ARRIVAL_TOL {
                return Some(TransitionPlan {
                    uav_id: req.uav_id,
                    source: req.source,
                    source_phase: req.source_phase,
                    target: req.target,
                    break_off_phase: beta,
                    depart_delay: d,
                    path,
                    join_phase: req.source_phase + omega_t * hi,
                    arrival_time: arrival,
                    speed: v,
                });
            }
        }
        t0 = t1;
        g0 = g1;
    }
    None
}

fn earliest_over(req: &TransitionRequest, from: f64, window: f64) -> Option<TransitionPlan> {
    (0..BREAK_OFF_CANDIDATES)
        .into_par_iter()
        .filter_map(|k| solve_for_delay(req, from + window * k as f64 / BREAK_OFF_CANDIDATES as f64))
        .min_by(|a, b| {
            a.arrival_time
                .total_cmp(&b.arrival_time)
                .then(a.depart_delay.total_cmp(&b.depart_delay))
        })
}

/// Plans the earliest synchronized transition allowed by `req`.
pub fn plan_transition(req: &TransitionRequest) -> Result<TransitionPlan> {
    validate(req)?;
    let v = req.speed;
    if same_circle(&req.source, &req.target) {
        let t = req.earliest_departure;
        let phi = req.source_phase + req.source.angular_rate(v) * t;
        let pose = Pose::new(req.source.point_at(phi), req.source.heading_at(phi));
        return Ok(TransitionPlan {
            uav_id: req.uav_id,
            source: req.source,
            source_phase: req.source_phase,
            target: req.target,
            break_off_phase: phi,
            depart_delay: t,
            path: DubinsPath::stationary(pose, req.turn_radius),
            join_phase: phi,
            arrival_time: t,
            speed: v,
        });
    }
    let period_s = req.source.period(v);
    let period_t = req.target.period(v);
    earliest_over(req, req.earliest_departure, period_s)
        .or_else(|| earliest_over(req, req.earliest_departure + period_s, period_t))
        .ok_or_else(|| {
            Error::Planning(format!(
                "no synchronized transition found for UAV {}",
                req.uav_id
            ))
        })
}

/// A UAV that keeps loitering throughout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoiterTrack {
    pub uav_id: usize,
    pub circle: LoiterCircle,
    pub phase0: f64,
    pub speed: f64,
}

impl LoiterTrack {
    pub fn position_at(&self, t: f64) -> Vec2 {
        self.circle.point_at(self.phase0 + self.circle.angular_rate(self.speed) * t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparationReport {
    /// Meters; `+∞` with fewer than two tracks.
    pub distance: f64,
    pub time: f64,
    /// UAV ids of the closest pair.
    pub pair: Option<(usize, usize)>,
}

/// Smallest pairwise distance over all tracks, sampled every `dt` seconds
/// from `t = 0` until one loiter period after the last arrival.
pub fn min_separation(plans: &[TransitionPlan], loiter: &[LoiterTrack], dt: f64) -> Result<SeparationReport> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(domain(format!("time step must be positive, got {dt}")));
    }
    let none = SeparationReport { distance: f64::INFINITY, time: 0.0, pair: None };
    if plans.len() + loiter.len() < 2 {
        return Ok(none);
    }
    let last_arrival = plans.iter().map(|p| p.arrival_time).fold(0.0, f64::max);
    let longest_period = plans
        .iter()
        .map(|p| p.target.period(p.speed).max(p.source.period(p.speed)))
        .chain(loiter.iter().map(|l| l.circle.period(l.speed)))
        .fold(0.0, f64::max);
    let horizon = last_arrival + longest_period;
    let steps = (horizon / dt).ceil() as usize;
    let ids: Vec<usize> = plans.iter().map(|p| p.uav_id).chain(loiter.iter().map(|l| l.uav_id)).collect();

    let best = (0..=steps)
        .into_par_iter()
        .map(|k| {
            let t = (k as f64 * dt).min(horizon);
            let pos: Vec<Vec2> = plans
                .iter()
                .map(|p| p.position_at(t))
                .chain(loiter.iter().map(|l| l.position_at(t)))
                .collect();
            let mut local = SeparationReport { distance: f64::INFINITY, time: t, pair: None };
            for i in 0..pos.len() {
                for j in i + 1..pos.len() {
                    let dist = pos[i].distance(pos[j]);
                    if dist < local.distance {
                        local.distance = dist;
                        local.pair = Some((ids[i], ids[j]));
                    }
                }
            }
            local
        })
        .reduce(
            || none,
            |a, b| {
                if b.distance < a.distance || (b.distance == a.distance && b.time < a.time) {
                    b
                } else {
                    a
                }
            },
        );
    Ok(best)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StaggerOutcome {
    pub plans: Vec<TransitionPlan>,
    pub separation: SeparationReport,
    /// Re-planning rounds spent resolving conflicts.
    pub rounds: usize,
}

/// Plans every request, then delays the later-departing UAV of the closest
/// pair by one source period until all tracks stay `threshold` apart.
pub fn stagger_transitions(
    requests: &[TransitionRequest],
    loiter: &[LoiterTrack],
    threshold: f64,
    dt: f64,
    max_rounds: usize,
) -> Result<StaggerOutcome> {
    let mut reqs = requests.to_vec();
    let mut plans = reqs.par_iter().map(plan_transition).collect::<Result<Vec<_>>>()?;
    for rounds in 0..=max_rounds {
        let separation = min_separation(&plans, loiter, dt)?;
        if separation.distance >= threshold {
            return Ok(StaggerOutcome { plans, separation, rounds });
        }
        if rounds == max_rounds {
            break;
        }
        let (a, b) = separation.pair.expect("finite separation has a pair");
        let idx = plans
            .iter()
            .enumerate()
            .filter(|(_, p)| (p.uav_id == a || p.uav_id == b) && !p.is_stationary())
            .max_by(|x, y| {
                x.1.depart_delay
                    .total_cmp(&y.1.depart_delay)
                    .then(x.1.uav_id.cmp(&y.1.uav_id))
            })
            .map(|(i, _)| i)
            .ok_or_else(|| {
                Error::Planning(format!(
                    "UAVs {a} and {b} come within {:.3} m at t = {:.2} s without transiting",
                    separation.distance, separation.time
                ))
            })?;
        let p = &plans[idx];
        reqs[idx].earliest_departure = p.depart_delay + p.source.period(p.speed);
        plans[idx] = plan_transition(&reqs[idx])?;
    }
    Err(Error::Planning(format!(
        "transitions still conflict after {max_rounds} staggering rounds"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn request(source: LoiterCircle, target: LoiterCircle, phase: f64) -> TransitionRequest {
        TransitionRequest {
            uav_id: 0,
            source,
            source_phase: phase,
            target,
            turn_radius: 20.0,
            speed: 15.0,
            earliest_departure: 0.0,
        }
    }

    #[test]
    fn plan_joins_in_phase() {
        let src = LoiterCircle::ccw(Vec2::new(0.0, 0.0), 50.0);
        let dst = LoiterCircle::ccw(Vec2::new(180.0, 60.0), 70.0);
        for phase in [0.0, 1.0, 2.5, 4.0] {
            let plan = plan_transition(&request(src, dst, phase)).unwrap();
            assert!(plan.sync_residual() < 1e-6, "residual {}", plan.sync_residual());
            let join = Pose::new(dst.point_at(plan.join_phase), dst.heading_at(plan.join_phase));
            let (dp, dh) = plan.path.end().distance_to(&join);
            assert!(dp < 1e-6 && dh < 1e-6);
            let (sp, sh) = plan.path.start.distance_to(&Pose::new(
                src.point_at(plan.break_off_phase),
                src.heading_at(plan.break_off_phase),
            ));
            assert!(sp < 1e-9 && sh < 1e-9);
            let before = plan.position_at(plan.arrival_time - 1e-7);
            let after = plan.position_at(plan.arrival_time + 1e-7);
            assert!(before.distance(after) < 1e-3);
        }
    }

    #[test]
    fn same_circle_is_a_zero_plan() {
        let c = LoiterCircle::ccw(Vec2::new(5.0, 5.0), 40.0);
        let plan = plan_transition(&request(c, c, 1.0)).unwrap();
        assert!(plan.is_stationary());
        assert_eq!(plan.arrival_time, 0.0);
    }

    #[test]
    fn rejects_tight_turns() {
        let src = LoiterCircle::ccw(Vec2::ZERO, 15.0);
        let dst = LoiterCircle::ccw(Vec2::new(100.0, 0.0), 50.0);
        assert!(matches!(plan_transition(&request(src, dst, 0.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn separation_of_antipodal_loiterers() {
        let c = LoiterCircle::ccw(Vec2::new(10.0, -3.0), 50.0);
        let tracks = [
            LoiterTrack { uav_id: 0, circle: c, phase0: 0.0, speed: 15.0 },
            LoiterTrack { uav_id: 1, circle: c, phase0: PI, speed: 15.0 },
        ];
        let rep = min_separation(&[], &tracks, 0.1).unwrap();
        assert!((rep.distance - 100.0).abs() < 1e-9);
        assert_eq!(rep.pair, Some((0, 1)));
    }

    #[test]
    fn single_track_is_unbounded() {
        let src = LoiterCircle::ccw(Vec2::ZERO, 50.0);
        let dst = LoiterCircle::ccw(Vec2::new(150.0, 0.0), 50.0);
        let plan = plan_transition(&request(src, dst, 0.0)).unwrap();
        assert_eq!(min_separation(&[plan], &[], 0.1).unwrap().distance, f64::INFINITY);
    }

    #[test]
    fn staggering_separates_crossing_paths() {
        let a = LoiterCircle::ccw(Vec2::new(0.0, 0.0), 40.0);
        let b = LoiterCircle::ccw(Vec2::new(200.0, 0.0), 40.0);
        let mut r0 = request(a, b, 0.0);
        r0.uav_id = 0;
        let mut r1 = request(b, a, 0.0);
        r1.uav_id = 1;
        let out = stagger_transitions(&[r0, r1], &[], 2.0, 0.05, 10).unwrap();
        assert!(out.separation.distance >= 2.0);
        for p in &out.plans {
            assert!(p.sync_residual() < 1e-6);
        }
    }
}
