//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Run with `cargo test -p loiter-core --test acceptance -- --nocapture`.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use loiter_core::coverage::{self, Region};
use loiter_core::dubins::{plan_transition, shortest_path, Pose, TransitionRequest};
use loiter_core::fleet::{
    loss_sweep, max_recoverable_loss, FailureEvent, FleetConfig, FleetState, LossSelection,
    RecoveryOutcome,
};
use loiter_core::geometry::{lens_area, packing_params, AreaSpec, LoiterCircle, PackingKind, Vec2};
use loiter_core::optimize::{solve_radius, FleetBudget, Regime};
use loiter_core::packing::{builtin, hexagon_neighborhood, pack, uav_count, StrategyRegistry};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 89;

fn area() -> AreaSpec {
    AreaSpec::new(500.0, 650.0).unwrap()
}

fn r_c() -> f64 {
    100.0 * (3f64.sqrt() - 1.0)
}

fn hex_config() -> FleetConfig {
    let strategy = StrategyRegistry::with_builtins().get("hexagon").unwrap();
    FleetConfig::new(area(), strategy, r_c(), 11.47, 15.0)
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn hexagon_rows_of_five() -> Outcome {
    let l = pack(&area(), 70.0, builtin(PackingKind::Hexagon)).unwrap();
    let rows = l.row_counts();
    outcome(l.len() == 35 && rows == vec![5; 7], format!("count={} rows={rows:?}", l.len()))
}

fn square_count() -> Outcome {
    let n = uav_count(&area(), 70.0, builtin(PackingKind::Square)).unwrap();
    outcome(n == 42, format!("count={n}"))
}

fn radius_for_seventeen() -> Outcome {
    let sol = solve_radius(FleetBudget(17), &area(), builtin(PackingKind::Hexagon), r_c(), 11.47).unwrap();
    match sol.feasible() {
        Some(f) => outcome(
            (f.loiter_radius - 96.22).abs() <= 0.01 && f.n_x == 3 && f.n_y == 5,
            format!("r_l={:.4} n_x={} n_y={} regime={}", f.loiter_radius, f.n_x, f.n_y, f.regime),
        ),
        None => outcome(false, format!("{sol:?}")),
    }
}

fn table2_end_to_end() -> Outcome {
    let mut fleet = FleetState::deploy(hex_config(), 70.0).unwrap();
    fleet
        .inject_failure(&FailureEvent { time: 10.0, selection: LossSelection::Random { seed: SEED, count: 18 } })
        .unwrap();
    let report = fleet.detect_failures();
    let plan = fleet.super_agent_recover(&report).unwrap();
    let Some(layout) = plan.new_layout.clone() else {
        return outcome(false, format!("outcome={:?}", plan.outcome));
    };
    fleet.apply_recovery(&plan).unwrap();
    let pitch = r_c() / 20.0;
    let cov = fleet.coverage_report(pitch, 36).unwrap();
    let pass = layout.len() == 17
        && (layout.loiter_radius - 96.22).abs() <= 0.01
        && plan.outcome == RecoveryOutcome::FullRestored
        && cov.cycle_fraction == 1.0;
    outcome(
        pass,
        format!(
            "circles={} r_l_new={:.4} outcome={} clusters={} cycle_fraction={:.5}",
            layout.len(),
            layout.loiter_radius,
            plan.outcome.name(),
            report.clusters.len(),
            cov.cycle_fraction
        ),
    )
}

fn fractions() -> Vec<f64> {
    (0..100).map(|i| i as f64 / 100.0).collect()
}

fn sweep_max_loss() -> Outcome {
    let r_inits = [50.0, 60.0, 70.0, 80.0, 90.0];
    let rows = loss_sweep(&hex_config(), &r_inits, &fractions(), SEED).unwrap();
    let curves = r_inits.iter().filter(|r| rows.iter().any(|row| row.r_init == **r)).count();
    match max_recoverable_loss(&rows, 50.0) {
        Some(l) => outcome(
            curves == 5 && (0.70..=0.71).contains(&l),
            format!("curves={curves} max_recoverable_loss(r_init=50)={l:.2}"),
        ),
        None => outcome(false, "no recoverable fraction"),
    }
}

fn hexagon_never_exceeds_square() -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for r in [50.0, 60.0, 70.0, 80.0, 90.0] {
        let h = uav_count(&area(), r, builtin(PackingKind::Hexagon)).unwrap();
        let s = uav_count(&area(), r, builtin(PackingKind::Square)).unwrap();
        pass &= h <= s;
        detail.push(format!("{r}:{h}/{s}"));
    }
    outcome(pass, detail.join(" "))
}

/// Lens area by integrating the chord in the angle parameter:
/// `2·∫₀^acos(d/2r) 2r² sin²t dt`, composite Simpson.
fn lens_oracle(d: f64, r: f64) -> f64 {
    let top = (d / (2.0 * r)).acos();
    let n = 4000;
    let h = top / n as f64;
    let f = |t: f64| 2.0 * r * r * t.sin().powi(2);
    let mut s = f(0.0) + f(top);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
    }
    2.0 * s * h / 3.0
}

fn geometry_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_sq: f64 = 0.0;
    let mut worst_hex: f64 = 0.0;
    for _ in 0..100 {
        let r: f64 = rng.gen_range(1e-3..=100.0);
        let sq = packing_params(r, PackingKind::Square);
        let hx = packing_params(r, PackingKind::Hexagon);
        worst_sq = worst_sq.max((sq.half_overlap_area.paper - lens_oracle(2f64.sqrt() * r, r) / 2.0).abs() / (r * r));
        worst_hex = worst_hex.max((hx.half_overlap_area.exact - lens_oracle(3f64.sqrt() * r, r) / 2.0).abs() / (r * r));
    }
    let unit = packing_params(1.0, PackingKind::Hexagon).half_overlap_area;
    let discrepancy = (unit.exact - 0.0906).abs() < 5e-4 && (unit.paper - 0.0236).abs() < 5e-4;

    // Sweep properties: monotone radius in loss, ideal curve exact.
    let rows = loss_sweep(&hex_config(), &[50.0, 60.0, 70.0, 80.0, 90.0], &fractions(), SEED).unwrap();
    let mut monotone = true;
    let mut ideal_exact = true;
    for r_init in [50.0, 60.0, 70.0, 80.0, 90.0] {
        let curve: Vec<_> = rows.iter().filter(|row| row.r_init == r_init).collect();
        for w in curve.windows(2) {
            if let (Some(a), Some(b)) = (w[0].r_new, w[1].r_new) {
                monotone &= a <= b;
            }
            monotone &= !(w[0].regime == Regime::Infeasible && w[1].regime != Regime::Infeasible);
        }
        for row in curve {
            ideal_exact &= row.ideal_r_new == r_init / (1.0 - row.loss_fraction).sqrt();
        }
    }
    let lens_check = (lens_area(3f64.sqrt(), 1.0) - lens_oracle(3f64.sqrt(), 1.0)).abs() < 1e-9;
    outcome(
        worst_sq <= 1e-6 && worst_hex <= 1e-6 && discrepancy && monotone && ideal_exact && lens_check,
        format!(
            "square_err={worst_sq:.2e}·r² hex_exact_err={worst_hex:.2e}·r² hex A_s exact={:.4} paper={:.4} monotone={monotone} ideal_exact={ideal_exact}",
            unit.exact, unit.paper
        ),
    )
}

fn dubins_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst_end: f64 = 0.0;
    let mut triangle = true;
    for _ in 0..10_000 {
        let mut pose = || Pose::xyh(rng.gen_range(-200.0..200.0), rng.gen_range(-200.0..200.0), rng.gen_range(0.0..2.0 * PI));
        let (a, b) = (pose(), pose());
        let rho = rng.gen_range(1.0..40.0);
        let p = shortest_path(a, b, rho).unwrap();
        triangle &= p.length() + 1e-9 >= a.position.distance(b.position);
        let (dp, dh) = p.end().distance_to(&b);
        worst_end = worst_end.max(dp.max(dh));
    }
    let mut worst_sync: f64 = 0.0;
    let mut plans = 0;
    for _ in 0..60 {
        let rs = rng.gen_range(30.0..100.0);
        let rt = rng.gen_range(30.0..100.0);
        let req = TransitionRequest {
            uav_id: 0,
            source: LoiterCircle::ccw(Vec2::new(0.0, 0.0), rs),
            source_phase: rng.gen_range(0.0..2.0 * PI),
            target: LoiterCircle::ccw(Vec2::new(rng.gen_range(-400.0..400.0), rng.gen_range(-400.0..400.0)), rt),
            turn_radius: rng.gen_range(5.0..rs.min(rt)),
            speed: rng.gen_range(10.0..25.0),
            earliest_departure: 0.0,
        };
        if let Ok(plan) = plan_transition(&req) {
            plans += 1;
            worst_sync = worst_sync.max(plan.sync_residual());
        }
    }
    outcome(
        triangle && worst_end <= 1e-6 && worst_sync < 1e-6 && plans > 0,
        format!("triangle={triangle} endpoint_err={worst_end:.2e} plans={plans}/60 sync_residual={worst_sync:.2e}"),
    )
}

fn fig2_persistence() -> Outcome {
    let rc = r_c();
    let phases = 360;
    let run = |r_l: f64| {
        let center = Vec2::new(0.0, 0.0);
        let circles = hexagon_neighborhood(center, r_l);
        let pts = coverage::sample_grid(&Region::Disc { center, radius: r_l }, rc / 20.0).unwrap();
        let ph = vec![0.0; circles.len()];
        let instant = coverage::min_instant_fraction(&pts, &circles, &ph, rc, phases).unwrap();
        let cycle = coverage::cycle_fraction(&pts, &circles, rc);
        (instant, cycle)
    };
    let (i1, c1) = run(rc);
    let (i2, c2) = run(1.3 * rc);
    outcome(
        i1 == 1.0 && c1 == 1.0 && i2 < 1.0 && c2 == 1.0,
        format!("r_l=r_c: instant={i1:.4} cycle={c1:.4}; r_l=1.3r_c: instant={i2:.4} cycle={c2:.4}"),
    )
}

#[test]
fn acceptance_criteria() {
    let criteria: [(&str, u64, fn() -> Outcome); 9] = [
        ("1 hexagon 500x650 @70 -> 35 (7x5)", 1, hexagon_rows_of_five),
        ("2 square 500x650 @70 -> 42", 1, square_count),
        ("3 solve_radius N=17 -> 96.22, 3x5", 1, radius_for_seventeen),
        ("4 Table II end-to-end recovery", 30, table2_end_to_end),
        ("5 loss sweep r_init=50 max loss in [0.70,0.71]", 60, sweep_max_loss),
        ("6 hexagon count <= square count", 5, hexagon_never_exceeds_square),
        ("7 geometry oracle suite", 30, geometry_oracles),
        ("8 Dubins property suite", 10, dubins_properties),
        ("9 persistent coverage (Fig 2 configuration)", 20, fig2_persistence),
    ];
    let mut failed = Vec::new();
    for (name, budget, run) in criteria {
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(budget);
        let pass = out.pass && in_time;
        println!(
            "{} criterion {name}: {} [{:.3}s / {budget}s]",
            if pass { "PASS" } else { "FAIL" },
            out.detail,
            elapsed.as_secs_f64()
        );
        if !pass {
            failed.push(name);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
