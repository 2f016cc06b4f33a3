use std::f64::consts::PI;

use anyhow::anyhow;
use loiter_core::dubins::{plan_transition, sample_many, TransitionRequest};
use loiter_core::fleet::{
    loss_sweep, max_recoverable_loss, CoverageReport, FailureCause, FleetState, RecoveryOutcome,
};
use loiter_core::geometry::{angle_diff, LoiterCircle, Table1Mode, Vec2};
use loiter_core::optimize::{solve_radius_within, FleetBudget, OptimizerWeights, RadiusBounds, RadiusSolution};
use loiter_core::packing::{pack, PackingLayout};
use serde::Serialize;

use crate::config::{Deployment, Scenario};
use crate::output::{event_rows, layout_rows, path_rows, Artifacts, PathRow};
use crate::svg::Canvas;
use crate::CliError;

const CANVAS_WIDTH: f64 = 700.0;
const CLUSTER_COLORS: [&str; 8] =
    ["#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2", "#7f7f7f"];

type CmdResult = Result<(), CliError>;

fn open(s: &Scenario) -> Result<Artifacts, CliError> {
    Artifacts::create(&s.out_dir).map_err(CliError::Io)
}

fn finish(art: Artifacts) -> CmdResult {
    art.finish().map(|_| ()).map_err(CliError::Io)
}

#[derive(Serialize)]
struct CoverageRow<'a> {
    stage: &'a str,
    t_s: f64,
    instant_min_fraction: f64,
    cycle_fraction: f64,
    grid_pitch_m: f64,
    phase_samples: usize,
}

fn coverage_row<'a>(stage: &'a str, t: f64, r: &CoverageReport) -> CoverageRow<'a> {
    CoverageRow {
        stage,
        t_s: t,
        instant_min_fraction: r.instant_min_fraction,
        cycle_fraction: r.cycle_fraction,
        grid_pitch_m: r.grid_pitch,
        phase_samples: r.phase_samples,
    }
}

fn area_canvas(s: &Scenario, pad: f64) -> Canvas {
    Canvas::new(
        Vec2::new(-pad, -pad),
        Vec2::new(s.area.x_extent + pad, s.area.y_extent + pad),
        CANVAS_WIDTH,
    )
}

fn draw_area(c: &mut Canvas, s: &Scenario) {
    c.rect(Vec2::ZERO, Vec2::new(s.area.x_extent, s.area.y_extent), "fill:none;stroke:black;stroke-width:2");
}

fn render_layout(s: &Scenario, layout: &PackingLayout, title: &str) -> String {
    let mut c = area_canvas(s, layout.loiter_radius * 1.1);
    draw_area(&mut c, s);
    for circle in layout.circles() {
        c.loiter_circle(&circle, "fill:none;stroke:#d62728;stroke-width:1.5");
        c.arrowhead(circle.point_at(0.0), circle.heading_at(0.0), 7.0, "#d62728");
    }
    c.finish(title)
}

/// Fleet snapshot: one circle per active UAV, crosses for lost ones.
fn render_fleet(s: &Scenario, fleet: &FleetState, clusters: Option<&[Vec<usize>]>, title: &str) -> String {
    let mut c = area_canvas(s, fleet.loiter_radius() * 1.1);
    draw_area(&mut c, s);
    let color_of = |id: usize| {
        clusters
            .and_then(|cl| cl.iter().position(|g| g.contains(&id)))
            .map_or("#d62728", |k| CLUSTER_COLORS[k % CLUSTER_COLORS.len()])
    };
    for u in &fleet.uavs {
        if u.is_active() {
            let color = color_of(u.id);
            c.loiter_circle(&u.assigned_circle, &format!("fill:none;stroke:{color};stroke-width:1.5"));
            c.arrowhead(fleet.position(u), u.assigned_circle.heading_at(fleet.phase), 7.0, color);
        } else if !u.alive() {
            c.marker(u.assigned_circle.center, 5.0, "#444444", &format!("lost UAV {}", u.id));
        }
    }
    c.finish(title)
}

fn print_coverage(label: &str, r: &CoverageReport) {
    println!(
        "{label}: cycle coverage {:.5}, worst instant coverage {:.5} (pitch {:.3} m, {} phases)",
        r.cycle_fraction, r.instant_min_fraction, r.grid_pitch, r.phase_samples
    );
}

fn deploy(s: &Scenario) -> Result<FleetState, CliError> {
    let cfg = s.fleet_config();
    match s.deployment {
        Some(Deployment::Radius(r)) => FleetState::deploy(cfg, r).map_err(CliError::from),
        Some(Deployment::Budget(n)) => FleetState::deploy_budget(cfg, n).map_err(CliError::from),
        None => Err(CliError::Config(anyhow!("config has no `deployment` section"))),
    }
}

pub fn pack_cmd(s: &Scenario) -> CmdResult {
    let Some(Deployment::Radius(r_l)) = s.deployment else {
        return Err(CliError::Config(anyhow!("`pack` needs deployment.radius_m")));
    };
    let layout = pack(&s.area, r_l, s.strategy.as_ref())?;
    let fleet = FleetState::deploy(s.fleet_config(), r_l)?;
    let cov = fleet.coverage_report(s.grid_pitch, s.phase_samples)?;

    let mut art = open(s)?;
    art.write_csv("layout.csv", &layout_rows(&layout)).map_err(CliError::Io)?;
    let title = format!("{} packing, r_l = {r_l} m, {} circles", layout.kind.name(), layout.len());
    art.write("layout.svg", render_layout(s, &layout, &title).as_bytes()).map_err(CliError::Io)?;
    let p = s.strategy.params(r_l);
    #[derive(Serialize)]
    struct Table1Row {
        packing: &'static str,
        mode: &'static str,
        r_l_m: f64,
        side_length_m: f64,
        x_pitch_m: f64,
        y_pitch_m: f64,
        overlap_angle_rad: f64,
        half_overlap_area_m2: f64,
        effective_area_m2: f64,
    }
    let mode = s.table1_mode;
    art.write_csv(
        "table1.csv",
        &[Table1Row {
            packing: s.strategy.name(),
            mode: match mode {
                Table1Mode::Paper => "paper",
                Table1Mode::Exact => "exact",
            },
            r_l_m: r_l,
            side_length_m: p.side_length,
            x_pitch_m: p.x_pitch,
            y_pitch_m: p.y_pitch,
            overlap_angle_rad: p.overlap_angle,
            half_overlap_area_m2: p.half_overlap_area.select(mode),
            effective_area_m2: p.effective_area.select(mode),
        }],
    )
    .map_err(CliError::Io)?;
    art.write_csv("coverage.csv", &[coverage_row("deployed", 0.0, &cov)]).map_err(CliError::Io)?;
    finish(art)?;

    println!(
        "{} packing at r_l = {r_l} m: {} circles in {} rows {:?}",
        layout.kind.name(),
        layout.len(),
        layout.n_rows(),
        layout.row_counts()
    );
    print_coverage("coverage", &cov);
    Ok(())
}

#[derive(Serialize)]
struct OptimizeRow {
    budget_n: usize,
    r_l_m: Option<f64>,
    n_x: Option<usize>,
    n_y: Option<usize>,
    uav_count: Option<usize>,
    regime: &'static str,
    deficit: Option<usize>,
}

pub fn optimize_cmd(s: &Scenario) -> CmdResult {
    let Some(Deployment::Budget(n)) = s.deployment else {
        return Err(CliError::Config(anyhow!("`optimize` needs deployment.budget_n")));
    };
    let bounds = RadiusBounds { lower: s.r_min_turn, upper: s.r_l_max() };
    let sol = solve_radius_within(FleetBudget(n), &s.area, s.strategy.as_ref(), s.r_c, bounds, &OptimizerWeights::default())?;
    let f = sol.feasible();
    let row = OptimizeRow {
        budget_n: n,
        r_l_m: f.map(|f| f.loiter_radius),
        n_x: f.map(|f| f.n_x),
        n_y: f.map(|f| f.n_y),
        uav_count: f.map(|f| f.uav_count),
        regime: sol.regime().name(),
        deficit: sol.deficit(),
    };
    let mut art = open(s)?;
    art.write_csv("optimize.csv", &[row]).map_err(CliError::Io)?;
    if let Some(f) = f {
        let layout = pack(&s.area, f.loiter_radius, s.strategy.as_ref())?;
        art.write_csv("layout.csv", &layout_rows(&layout)).map_err(CliError::Io)?;
        let title = format!("optimized {} packing for N = {n}: r_l = {:.3} m", layout.kind.name(), f.loiter_radius);
        art.write("layout.svg", render_layout(s, &layout, &title).as_bytes()).map_err(CliError::Io)?;
    }
    finish(art)?;

    match sol {
        RadiusSolution::Feasible(f) => {
            println!(
                "N = {n}: r_l = {:.4} m, n_x = {}, n_y = {}, {} circles, regime {}",
                f.loiter_radius, f.n_x, f.n_y, f.uav_count, f.regime
            );
            Ok(())
        }
        RadiusSolution::Infeasible(cause) => {
            let msg = format!("N = {n}: infeasible, {}", FailureCause::Infeasible(cause));
            println!("{msg}");
            Err(CliError::Infeasible(msg))
        }
    }
}

pub fn simulate_cmd(s: &Scenario) -> CmdResult {
    let mut fleet = deploy(s)?;
    let mut art = open(s)?;
    let mut coverage = Vec::new();
    let mut paths: Vec<PathRow> = Vec::new();

    let pre = fleet.coverage_report(s.grid_pitch, s.phase_samples)?;
    print_coverage(&format!("deployed {} UAVs at r_l = {:.3} m", fleet.uavs.len(), fleet.loiter_radius()), &pre);
    coverage.push(("deployed".to_string(), fleet.time, pre));
    let title = format!("initial deployment: {} UAVs, r_l = {:.2} m", fleet.uavs.len(), fleet.loiter_radius());
    art.write("pre_failure.svg", render_fleet(s, &fleet, None, &title).as_bytes()).map_err(CliError::Io)?;

    let mut failures = s.failures.clone();
    failures.sort_by(|a, b| a.time.total_cmp(&b.time));
    let mut status: CmdResult = Ok(());
    for (k, ev) in failures.iter().enumerate() {
        let suffix = if k == 0 { String::new() } else { format!("_{}", k + 1) };
        let mut ev = ev.clone();
        ev.time = ev.time.max(fleet.time);
        let lost = fleet.inject_failure(&ev)?;
        let report = fleet.detect_failures();
        println!(
            "t = {:.2} s: lost {} UAVs, {} survivors in {} clusters",
            ev.time,
            lost.len(),
            report.survivor_count(),
            report.clusters.len()
        );
        let title = format!("after failure: {} survivors, {} clusters", report.survivor_count(), report.clusters.len());
        art.write(&format!("clusters{suffix}.svg"), render_fleet(s, &fleet, Some(&report.clusters), &title).as_bytes())
            .map_err(CliError::Io)?;

        let plan = fleet.super_agent_recover(&report)?;
        fleet.apply_recovery(&plan)?;
        match &plan.outcome {
            RecoveryOutcome::RecoveryFailed(cause) => {
                println!("recovery failed: {cause}");
                let err = match cause {
                    FailureCause::Planning(m) => CliError::Planning(m.clone()),
                    other => CliError::Infeasible(other.to_string()),
                };
                if status.is_ok() {
                    status = Err(err);
                }
            }
            outcome => {
                for p in &plan.transitions {
                    paths.extend(path_rows(p, 0.0, s.raw.transit.sample_dt_s, plan.start_time));
                }
                let cov = fleet.coverage_report(s.grid_pitch, s.phase_samples)?;
                println!(
                    "{}: {} circles at r_l = {:.4} m, transitions done at t = {:.2} s, min separation {:.2} m",
                    outcome.name(),
                    fleet.layout.len(),
                    fleet.loiter_radius(),
                    fleet.time,
                    plan.separation.map_or(f64::INFINITY, |r| r.distance)
                );
                print_coverage("recovered", &cov);
                coverage.push((format!("recovered{suffix}"), fleet.time, cov));
                let title = format!("recovered: {} UAVs, r_l = {:.2} m", fleet.active().count(), fleet.loiter_radius());
                art.write(&format!("recovered{suffix}.svg"), render_fleet(s, &fleet, None, &title).as_bytes())
                    .map_err(CliError::Io)?;
            }
        }
    }

    let cov_rows: Vec<_> = coverage.iter().map(|(stage, t, r)| coverage_row(stage, *t, r)).collect();
    art.write_csv("coverage.csv", &cov_rows).map_err(CliError::Io)?;
    art.write_csv("events.csv", &event_rows(&fleet.events)).map_err(CliError::Io)?;
    art.write_csv("layout.csv", &layout_rows(&fleet.layout)).map_err(CliError::Io)?;
    if !paths.is_empty() {
        art.write_csv("transitions.csv", &paths).map_err(CliError::Io)?;
    }
    finish(art)?;
    status
}

#[derive(Serialize)]
struct SweepCsvRow {
    r_init_m: f64,
    loss_fraction: f64,
    survivors: usize,
    r_new_m: Option<f64>,
    regime: &'static str,
    ideal_r_new_m: f64,
}

pub fn sweep_cmd(s: &Scenario) -> CmdResult {
    let sweep = s.raw.sweep.as_ref().ok_or_else(|| CliError::Config(anyhow!("config has no `sweep` section")))?;
    if sweep.r_init_m.is_empty() || sweep.loss_fractions.is_empty() {
        return Err(CliError::Config(anyhow!("sweep lists must be non-empty")));
    }
    let rows = loss_sweep(&s.fleet_config(), &sweep.r_init_m, &sweep.loss_fractions, s.seed)?;
    let csv_rows: Vec<SweepCsvRow> = rows
        .iter()
        .map(|r| SweepCsvRow {
            r_init_m: r.r_init,
            loss_fraction: r.loss_fraction,
            survivors: r.survivors,
            r_new_m: r.r_new,
            regime: r.regime.name(),
            ideal_r_new_m: r.ideal_r_new,
        })
        .collect();

    let r_max = s.r_l_max();
    let top = r_max * 1.15;
    let bottom = sweep.r_init_m.iter().copied().fold(f64::INFINITY, f64::min).min(s.r_c) * 0.9;
    // Plot space: x = loss fraction scaled to 500 units, y = radius.
    let xs = 500.0;
    let ys = 400.0 / (top - bottom);
    let to = |l: f64, r: f64| Vec2::new(l * xs, (r - bottom) * ys);
    let mut c = Canvas::new(Vec2::new(-60.0, -40.0), Vec2::new(xs + 120.0, 420.0), CANVAS_WIDTH);
    c.polyline(&[to(0.0, bottom), to(1.0, bottom)], "stroke:black");
    c.polyline(&[to(0.0, bottom), to(0.0, top)], "stroke:black");
    c.text_px(to(0.5, bottom), 0.0, 30.0, "loss fraction", 13.0, "middle");
    c.text_px(to(0.0, top), -5.0, -8.0, "loiter radius (m)", 13.0, "start");
    for k in 0..=10 {
        let l = k as f64 / 10.0;
        c.text_px(to(l, bottom), 0.0, 15.0, &format!("{l:.1}"), 10.0, "middle");
    }
    c.polyline(&[to(0.0, s.r_c), to(1.0, s.r_c)], "stroke:magenta;stroke-width:1.5");
    c.text_px(to(1.0, s.r_c), 4.0, 4.0, &format!("r_c {:.1}", s.r_c), 10.0, "start");
    c.polyline(&[to(0.0, r_max), to(1.0, r_max)], "stroke:black;stroke-width:1.5");
    c.text_px(to(1.0, r_max), 4.0, 4.0, &format!("r_l-max {r_max:.1}"), 10.0, "start");
    for (k, &r_init) in sweep.r_init_m.iter().enumerate() {
        let color = CLUSTER_COLORS[k % CLUSTER_COLORS.len()];
        let curve: Vec<Vec2> = rows
            .iter()
            .filter(|r| r.r_init == r_init)
            .filter_map(|r| r.r_new.map(|rn| to(r.loss_fraction, rn.min(top))))
            .collect();
        let ideal: Vec<Vec2> = rows
            .iter()
            .filter(|r| r.r_init == r_init && r.ideal_r_new <= top)
            .map(|r| to(r.loss_fraction, r.ideal_r_new))
            .collect();
        c.polyline(&curve, &format!("stroke:{color};stroke-width:2"));
        c.polyline(&ideal, &format!("stroke:{color};stroke-width:1;stroke-dasharray:4 3"));
        if let Some(first) = curve.first() {
            c.text_px(*first, -6.0, 4.0, &format!("{r_init}"), 10.0, "end");
        }
    }
    let svg = c.finish("recovered loiter radius against loss fraction (dashed: ideal)");

    let mut art = open(s)?;
    art.write_csv("sweep.csv", &csv_rows).map_err(CliError::Io)?;
    art.write("sweep.svg", svg.as_bytes()).map_err(CliError::Io)?;
    finish(art)?;
    for &r_init in &sweep.r_init_m {
        match max_recoverable_loss(&rows, r_init) {
            Some(l) => println!("r_init = {r_init} m: recovers up to loss fraction {l:.2}"),
            None => println!("r_init = {r_init} m: no swept loss fraction is recoverable"),
        }
    }
    Ok(())
}

pub fn path_cmd(s: &Scenario) -> CmdResult {
    let (source, target) = s.path_circles().map_err(CliError::Config)?;
    let cfg = s.raw.path.as_ref().expect("path section checked above");
    let req = TransitionRequest {
        uav_id: cfg.uav_id,
        source,
        source_phase: cfg.source_phase_rad,
        target,
        turn_radius: s.transit_turn_radius(),
        speed: s.speed,
        earliest_departure: 0.0,
    };
    let plan = plan_transition(&req).map_err(|e| CliError::Planning(e.to_string()))?;
    let dt = s.raw.transit.sample_dt_s;
    let rows = path_rows(&plan, 0.0, dt, 0.0);

    let reach = source.radius.max(target.radius) * 1.2;
    let lo = Vec2::new(
        source.center.x.min(target.center.x) - reach,
        source.center.y.min(target.center.y) - reach,
    );
    let hi = Vec2::new(
        source.center.x.max(target.center.x) + reach,
        source.center.y.max(target.center.y) + reach,
    );
    let mut c = Canvas::new(lo, hi, CANVAS_WIDTH);
    c.loiter_circle(&source, "fill:none;stroke:#1f77b4;stroke-width:2");
    c.loiter_circle(&target, "fill:none;stroke:#2ca02c;stroke-width:2");
    let start = plan.path.start;
    let end = plan.path.end();
    if plan.is_stationary() {
        c.marker(start.position, 5.0, "black", "zero-length transition");
    } else {
        let step = (plan.path.length() / 400.0).max(1e-3);
        let pts: Vec<Vec2> = sample_many(&plan.path, step)?.into_iter().map(|p| p.position).collect();
        c.polyline(&pts, "stroke:black;stroke-width:1.5;stroke-dasharray:6 3");
        c.marker(start.position, 6.0, "#2ca02c", "break-off");
        c.marker(end.position, 6.0, "#d62728", "join-in");
        c.arrowhead(start.position, start.heading, 9.0, "#2ca02c");
        c.arrowhead(end.position, end.heading, 9.0, "#d62728");
        c.text_px(start.position, 8.0, -8.0, "break-off", 11.0, "start");
        c.text_px(end.position, 8.0, -8.0, "join-in", 11.0, "start");
    }
    let title = format!(
        "transition {}: {:.1} m, depart {:.2} s, join {:.2} s",
        plan.path.word,
        plan.path.length(),
        plan.depart_delay,
        plan.arrival_time
    );
    let svg = c.finish(&title);

    let mut art = open(s)?;
    art.write_csv("path.csv", &rows).map_err(CliError::Io)?;
    art.write("path.svg", svg.as_bytes()).map_err(CliError::Io)?;
    finish(art)?;

    let tangent = |circle: &LoiterCircle, phase: f64, heading: f64| {
        angle_diff(circle.heading_at(phase), heading).abs()
    };
    println!(
        "{} path of {:.3} m: break off at {:.3} rad after {:.3} s, join at {:.3} rad at {:.3} s",
        plan.path.word,
        plan.path.length(),
        plan.break_off_phase.rem_euclid(2.0 * PI),
        plan.depart_delay,
        plan.join_phase.rem_euclid(2.0 * PI),
        plan.arrival_time
    );
    println!(
        "tangency residuals {:.2e} / {:.2e} rad, phase-sync residual {:.2e} rad",
        tangent(&source, plan.break_off_phase, start.heading),
        tangent(&target, plan.join_phase, end.heading),
        plan.sync_residual()
    );
    Ok(())
}
