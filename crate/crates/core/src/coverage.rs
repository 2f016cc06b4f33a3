//! Grid sampling of coverage fractions.
//!
//! Sample points are evaluated in parallel; every reduction here is a count,
//! so results do not depend on how rayon splits the work.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::geometry::{covered_over_cycle, AreaSpec, LoiterCircle, Vec2, BOUNDARY_EPS};

/// Default grid pitch is `r_c / DEFAULT_GRID_DIVISOR`.
pub const DEFAULT_GRID_DIVISOR: f64 = 20.0;

/// Minimum number of common phases for a persistent-coverage check.
pub const MIN_PHASE_SAMPLES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    Rect(AreaSpec),
    Disc { center: Vec2, radius: f64 },
}

/// Regular grid over `region`, including the far edges.
pub fn sample_grid(region: &Region, pitch: f64) -> Result<Vec<Vec2>> {
    if !(pitch > 0.0 && pitch.is_finite()) {
        return Err(domain(format!("grid pitch must be positive, got {pitch}")));
    }
    let (origin, w, h) = match *region {
        Region::Rect(a) => (Vec2::ZERO, a.x_extent, a.y_extent),
        Region::Disc { center, radius } => {
            (center - Vec2::new(radius, radius), 2.0 * radius, 2.0 * radius)
        }
    };
    let xs = axis_samples(w, pitch);
    let ys = axis_samples(h, pitch);
    let mut pts = Vec::with_capacity(xs.len() * ys.len());
    for &y in &ys {
        for &x in &xs {
            let p = origin + Vec2::new(x, y);
            let keep = match *region {
                Region::Rect(_) => true,
                Region::Disc { center, radius } => p.distance(center) <= radius + BOUNDARY_EPS,
            };
            if keep {
                pts.push(p);
            }
        }
    }
    Ok(pts)
}

fn axis_samples(extent: f64, pitch: f64) -> Vec<f64> {
    let n = (extent / pitch).floor() as usize;
    let mut v: Vec<f64> = (0..=n).map(|i| i as f64 * pitch).collect();
    if extent - v[v.len() - 1] > 1e-9 {
        v.push(extent);
    }
    v
}

/// Fraction of `points` inside the swept annulus of at least one circle.
pub fn cycle_fraction(points: &[Vec2], circles: &[LoiterCircle], r_c: f64) -> f64 {
    if points.is_empty() || circles.is_empty() {
        return 0.0;
    }
    let covered = points
        .par_iter()
        .filter(|p| circles.iter().any(|c| covered_over_cycle(**p, c, r_c)))
        .count();
    covered as f64 / points.len() as f64
}

/// Fraction of `points` within `r_c` of at least one position.
pub fn instant_fraction(points: &[Vec2], positions: &[Vec2], r_c: f64) -> f64 {
    if points.is_empty() || positions.is_empty() {
        return 0.0;
    }
    let lim = (r_c + BOUNDARY_EPS).powi(2);
    let covered = points
        .par_iter()
        .filter(|p| {
            positions.iter().any(|q| {
                let dx = p.x - q.x;
                let dy = p.y - q.y;
                dx * dx + dy * dy <= lim
            })
        })
        .count();
    covered as f64 / points.len() as f64
}

/// Minimum instant-coverage fraction over `phase_samples` evenly spaced
/// advances of a synchronized fleet. `phases[i]` is circle `i`'s phase at
/// the reference instant.
pub fn min_instant_fraction(
    points: &[Vec2],
    circles: &[LoiterCircle],
    phases: &[f64],
    r_c: f64,
    phase_samples: usize,
) -> Result<f64> {
    if phase_samples < MIN_PHASE_SAMPLES {
        return Err(domain(format!(
            "need at least {MIN_PHASE_SAMPLES} phase samples, got {phase_samples}"
        )));
    }
    if circles.len() != phases.len() {
        return Err(domain("one phase per circle is required"));
    }
    if points.is_empty() || circles.is_empty() {
        return Ok(0.0);
    }
    let worst = (0..phase_samples)
        .into_par_iter()
        .map(|k| {
            let advance = 2.0 * PI * k as f64 / phase_samples as f64;
            let positions: Vec<Vec2> = circles
                .iter()
                .zip(phases)
                .map(|(c, ph)| c.point_at(ph + c.direction.sign() * advance))
                .collect();
            instant_fraction(points, &positions, r_c)
        })
        .reduce(|| 1.0, f64::min);
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_includes_far_edges() {
        let area = AreaSpec::new(10.0, 4.5).unwrap();
        let pts = sample_grid(&Region::Rect(area), 2.0).unwrap();
        // x: 0,2,4,6,8,10  y: 0,2,4,4.5
        assert_eq!(pts.len(), 6 * 4);
        assert!(pts.contains(&Vec2::new(10.0, 4.5)));
        assert!(sample_grid(&Region::Rect(area), 0.0).is_err());
    }

    #[test]
    fn disc_grid_stays_inside() {
        let c = Vec2::new(3.0, 4.0);
        let pts = sample_grid(&Region::Disc { center: c, radius: 2.0 }, 0.1).unwrap();
        assert!(pts.iter().all(|p| p.distance(c) <= 2.0 + 1e-9));
        assert!(pts.len() > 1000);
    }

    #[test]
    fn empty_inputs_give_zero() {
        let pts = vec![Vec2::ZERO];
        assert_eq!(cycle_fraction(&pts, &[], 1.0), 0.0);
        assert_eq!(instant_fraction(&pts, &[], 1.0), 0.0);
        assert_eq!(min_instant_fraction(&pts, &[], &[], 1.0, 8).unwrap(), 0.0);
        assert!(min_instant_fraction(&pts, &[], &[], 1.0, 7).is_err());
    }

    #[test]
    fn single_circle_center_covered_at_every_phase() {
        let c = LoiterCircle::ccw(Vec2::new(5.0, 5.0), 3.0);
        let pts = vec![c.center];
        let f = min_instant_fraction(&pts, &[c], &[0.3], 3.0, 360).unwrap();
        assert_eq!(f, 1.0);
        let f = min_instant_fraction(&pts, &[c], &[0.3], 2.9, 360).unwrap();
        assert_eq!(f, 0.0);
    }
}
