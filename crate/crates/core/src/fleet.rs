//! Fleet simulation: synchronized loitering, communication graph, failure
//! injection and detection, and super-agent recovery.
//!
//! All loitering UAVs share one phase. Transitions are planned in a time
//! frame starting at the recovery instant and logged on the fleet clock.

use std::collections::{BTreeSet, VecDeque};
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::assign::min_cost_assignment;
use crate::coverage::{self, Region};
use crate::dubins::{
    stagger_transitions, LoiterTrack, SeparationReport, TransitionPlan, TransitionRequest,
};
use crate::error::{domain, Error, Result};
use crate::geometry::{min_comm_radius, wrap_angle, AreaSpec, LoiterCircle, Vec2};
use crate::optimize::{
    ideal_radius_after_loss, solve_radius_within, FleetBudget, InfeasibleCause, OptimizerWeights,
    RadiusBounds, RadiusSolution, Regime,
};
use crate::packing::{pack, PackingLayout, PackingStrategy};

/// Relative slack on the communication range test.
const COMM_RTOL: f64 = 1e-9;

/// Everything fixed for the lifetime of a fleet.
#[derive(Debug, Clone)]
pub struct FleetConfig {
    pub area: AreaSpec,
    pub strategy: Arc<dyn PackingStrategy>,
    pub r_c: f64,
    pub r_min_turn: f64,
    /// Airspeed, m/s.
    pub speed: f64,
    /// Upper bound for re-optimization; defaults to the packing's `r_l-max`.
    pub r_l_max: Option<f64>,
    /// Link range; defaults to the packing's minimum for the current radius.
    pub r_com: Option<f64>,
    pub base_station: Vec2,
    /// Transit turn radius; defaults to `r_min_turn`.
    pub transit_turn_radius: Option<f64>,
    pub separation_threshold: f64,
    pub separation_dt: f64,
    pub max_stagger_rounds: usize,
}

impl FleetConfig {
    pub fn new(area: AreaSpec, strategy: Arc<dyn PackingStrategy>, r_c: f64, r_min_turn: f64, speed: f64) -> Self {
        Self {
            area,
            strategy,
            r_c,
            r_min_turn,
            speed,
            r_l_max: None,
            r_com: None,
            base_station: Vec2::ZERO,
            transit_turn_radius: None,
            separation_threshold: 2.0,
            separation_dt: 0.1,
            max_stagger_rounds: 10,
        }
    }

    pub fn r_l_max(&self) -> f64 {
        self.r_l_max.unwrap_or_else(|| self.strategy.max_loiter_radius(self.r_c))
    }

    pub fn comm_radius(&self, r_l: f64) -> f64 {
        self.r_com.unwrap_or_else(|| min_comm_radius(r_l, self.strategy.kind()))
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [("r_c", self.r_c), ("speed", self.speed), ("separation dt", self.separation_dt)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(domain(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.r_min_turn >= 0.0 && self.r_min_turn.is_finite()) {
            return Err(domain(format!("r_min_turn must be non-negative, got {}", self.r_min_turn)));
        }
        if let Some(r) = self.r_com {
            if !(r > 0.0) {
                return Err(domain(format!("r_com must be positive, got {r}")));
            }
        }
        if !(self.separation_threshold >= 0.0) {
            return Err(domain("separation threshold must be non-negative"));
        }
        Ok(())
    }

    fn bounds(&self) -> RadiusBounds {
        RadiusBounds { lower: self.r_min_turn, upper: self.r_l_max() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UavStatus {
    Loitering,
    Lost,
    /// Surplus survivor sent back to base during recovery.
    Recalled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UavState {
    pub id: usize,
    pub assigned_circle: LoiterCircle,
    pub status: UavStatus,
    pub neighbor_ids: Vec<usize>,
    /// 1 = neighbor reachable, 0 = dropped out; parallel to `neighbor_ids`.
    pub neighbor_state: Vec<u8>,
}

impl UavState {
    pub fn alive(&self) -> bool {
        self.status != UavStatus::Lost
    }

    pub fn is_active(&self) -> bool {
        self.status == UavStatus::Loitering
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CommGraph {
    pub vertices: Vec<usize>,
    /// `(i, j)` with `i < j`.
    pub edges: Vec<(usize, usize)>,
}

impl CommGraph {
    /// Edge iff the loiter centers are within `r_com`.
    pub fn build(nodes: &[(usize, Vec2)], r_com: f64) -> Self {
        let mut vertices: Vec<usize> = nodes.iter().map(|n| n.0).collect();
        vertices.sort_unstable();
        let mut edges = Vec::new();
        for (a, &(i, pi)) in nodes.iter().enumerate() {
            for &(j, pj) in &nodes[a + 1..] {
                if pi.distance(pj) <= r_com * (1.0 + COMM_RTOL) {
                    edges.push((i.min(j), i.max(j)));
                }
            }
        }
        edges.sort_unstable();
        Self { vertices, edges }
    }

    pub fn neighbors(&self, id: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == id {
                    Some(b)
                } else if b == id {
                    Some(a)
                } else {
                    None
                }
            })
            .collect()
    }

    /// Connected components, each sorted, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let idx = |id: usize| self.vertices.binary_search(&id).expect("edge endpoint is a vertex");
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for &(a, b) in &self.edges {
            adj[idx(a)].push(idx(b));
            adj[idx(b)].push(idx(a));
        }
        let mut seen = vec![false; self.vertices.len()];
        let mut out = Vec::new();
        for s in 0..self.vertices.len() {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut queue = VecDeque::from([s]);
            let mut comp = Vec::new();
            while let Some(u) = queue.pop_front() {
                comp.push(self.vertices[u]);
                for &w in &adj[u] {
                    if !seen[w] {
                        seen[w] = true;
                        queue.push_back(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LossSelection {
    Ids(Vec<usize>),
    /// Uniform without replacement from the alive ids.
    Random { seed: u64, count: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FailureEvent {
    pub time: f64,
    pub selection: LossSelection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Deploy,
    Failure,
    Detect,
    Recover,
    TransitionStart,
    TransitionEnd,
}

impl EventKind {
    pub fn name(self) -> &'static str {
        match self {
            EventKind::Deploy => "deploy",
            EventKind::Failure => "failure",
            EventKind::Detect => "detect",
            EventKind::Recover => "recover",
            EventKind::TransitionStart => "transition_start",
            EventKind::TransitionEnd => "transition_end",
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventRecord {
    pub time: f64,
    pub kind: EventKind,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DetectionRoute {
    NoLoss,
    /// A survivor in the base's component noticed a dropped neighbor.
    Relay { reporter: usize },
    /// Heartbeat timeout at the base after one loiter period.
    BaseTimeout,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurvivorReport {
    pub survivor_ids: Vec<usize>,
    pub positions: Vec<Vec2>,
    pub clusters: Vec<Vec<usize>>,
    pub route: DetectionRoute,
    pub detected_at: f64,
}

impl SurvivorReport {
    pub fn survivor_count(&self) -> usize {
        self.survivor_ids.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FailureCause {
    NoSurvivors,
    Infeasible(InfeasibleCause),
    Planning(String),
}

impl fmt::Display for FailureCause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FailureCause::NoSurvivors => f.write_str("no survivors"),
            FailureCause::Infeasible(InfeasibleCause::Budget { required, available }) => {
                write!(f, "deficit {} ({required} needed, {available} available)", required - available)
            }
            FailureCause::Infeasible(InfeasibleCause::TurnRadius { r_min_turn, r_l_max }) => {
                write!(f, "turn radius {r_min_turn} exceeds r_l-max {r_l_max}")
            }
            FailureCause::Infeasible(InfeasibleCause::EmptyFleet) => f.write_str("empty fleet"),
            FailureCause::Planning(msg) => write!(f, "planning failed: {msg}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RecoveryOutcome {
    PersistentRestored,
    FullRestored,
    RecoveryFailed(FailureCause),
}

impl RecoveryOutcome {
    pub fn name(&self) -> &'static str {
        match self {
            RecoveryOutcome::PersistentRestored => "PersistentRestored",
            RecoveryOutcome::FullRestored => "FullRestored",
            RecoveryOutcome::RecoveryFailed(_) => "RecoveryFailed",
        }
    }

    pub fn succeeded(&self) -> bool {
        !matches!(self, RecoveryOutcome::RecoveryFailed(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryPlan {
    /// Fleet time at which the plan starts; transition times are relative to it.
    pub start_time: f64,
    /// Fleet phase at `start_time`.
    pub start_phase: f64,
    pub solution: Option<RadiusSolution>,
    pub new_layout: Option<PackingLayout>,
    /// `(uav id, new circle index)`, sorted by circle index.
    pub assignment: Vec<(usize, usize)>,
    pub reserves: Vec<usize>,
    pub transitions: Vec<TransitionPlan>,
    pub separation: Option<SeparationReport>,
    pub outcome: RecoveryOutcome,
}

impl RecoveryPlan {
    fn failed(start_time: f64, start_phase: f64, solution: Option<RadiusSolution>, cause: FailureCause) -> Self {
        Self {
            start_time,
            start_phase,
            solution,
            new_layout: None,
            assignment: Vec::new(),
            reserves: Vec::new(),
            transitions: Vec::new(),
            separation: None,
            outcome: RecoveryOutcome::RecoveryFailed(cause),
        }
    }

    /// Time from `start_time` until the last UAV joins its circle.
    pub fn completion_time(&self) -> f64 {
        self.transitions.iter().map(|p| p.arrival_time).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageReport {
    pub instant_min_fraction: f64,
    pub cycle_fraction: f64,
    pub grid_pitch: f64,
    pub phase_samples: usize,
}

#[derive(Debug, Clone)]
pub struct FleetState {
    pub config: FleetConfig,
    pub layout: PackingLayout,
    pub uavs: Vec<UavState>,
    pub comm: CommGraph,
    pub time: f64,
    /// Common loiter phase of every active UAV.
    pub phase: f64,
    pub events: Vec<EventRecord>,
}

fn neighbor_lists(uavs: &mut [UavState], graph: &CommGraph) {
    for u in uavs.iter_mut() {
        u.neighbor_ids = graph.neighbors(u.id);
        u.neighbor_state = vec![1; u.neighbor_ids.len()];
    }
}

impl FleetState {
    /// Fleet loitering on the packing at radius `r_l`, phase 0 at `t = 0`.
    pub fn deploy(config: FleetConfig, r_l: f64) -> Result<Self> {
        config.validate()?;
        let layout = pack(&config.area, r_l, config.strategy.as_ref())?;
        let mut uavs: Vec<UavState> = layout
            .circles()
            .into_iter()
            .enumerate()
            .map(|(id, c)| UavState {
                id,
                assigned_circle: c,
                status: UavStatus::Loitering,
                neighbor_ids: Vec::new(),
                neighbor_state: Vec::new(),
            })
            .collect();
        let nodes: Vec<(usize, Vec2)> = uavs.iter().map(|u| (u.id, u.assigned_circle.center)).collect();
        let comm = CommGraph::build(&nodes, config.comm_radius(r_l));
        neighbor_lists(&mut uavs, &comm);
        let detail = format!("uavs={} r_l={r_l:.3} packing={}", uavs.len(), config.strategy.name());
        Ok(Self {
            config,
            layout,
            uavs,
            comm,
            time: 0.0,
            phase: 0.0,
            events: vec![EventRecord { time: 0.0, kind: EventKind::Deploy, detail }],
        })
    }

    /// Deploys at the optimized radius for a fleet of `budget` UAVs.
    pub fn deploy_budget(config: FleetConfig, budget: usize) -> Result<Self> {
        config.validate()?;
        let sol = solve_radius_within(
            FleetBudget(budget),
            &config.area,
            config.strategy.as_ref(),
            config.r_c,
            config.bounds(),
            &OptimizerWeights::default(),
        )?;
        match sol {
            RadiusSolution::Feasible(f) => Self::deploy(config, f.loiter_radius),
            RadiusSolution::Infeasible(cause) => Err(Error::Infeasible(format!(
                "no deployable radius for {budget} UAVs: {}",
                FailureCause::Infeasible(cause)
            ))),
        }
    }

    pub fn loiter_radius(&self) -> f64 {
        self.layout.loiter_radius
    }

    pub fn angular_rate(&self) -> f64 {
        self.config.speed / self.layout.loiter_radius
    }

    pub fn loiter_period(&self) -> f64 {
        2.0 * PI / self.angular_rate()
    }

    pub fn step(&mut self, dt: f64) -> Result<()> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(domain(format!("time step must be positive, got {dt}")));
        }
        self.phase = wrap_angle(self.phase + self.angular_rate() * dt);
        self.time += dt;
        Ok(())
    }

    fn advance_to(&mut self, t: f64) {
        if t > self.time {
            self.step(t - self.time).expect("positive finite step");
        }
    }

    pub fn active(&self) -> impl Iterator<Item = &UavState> {
        self.uavs.iter().filter(|u| u.is_active())
    }

    pub fn position(&self, uav: &UavState) -> Vec2 {
        uav.assigned_circle.point_at(self.phase)
    }

    pub fn active_circles(&self) -> Vec<LoiterCircle> {
        self.active().map(|u| u.assigned_circle).collect()
    }

    fn rebuild_comm(&mut self) {
        let nodes: Vec<(usize, Vec2)> =
            self.active().map(|u| (u.id, u.assigned_circle.center)).collect();
        self.comm = CommGraph::build(&nodes, self.config.comm_radius(self.layout.loiter_radius));
    }

    fn log(&mut self, time: f64, kind: EventKind, detail: String) {
        self.events.push(EventRecord { time, kind, detail });
    }

    /// Marks the selected UAVs lost; returns their ids, sorted.
    pub fn inject_failure(&mut self, event: &FailureEvent) -> Result<Vec<usize>> {
        if !(event.time >= self.time && event.time.is_finite()) {
            return Err(domain(format!(
                "failure time {} precedes fleet time {}",
                event.time, self.time
            )));
        }
        let alive: Vec<usize> = self.active().map(|u| u.id).collect();
        let lost: Vec<usize> = match &event.selection {
            LossSelection::Ids(ids) => {
                let set: BTreeSet<usize> = ids.iter().copied().collect();
                if set.len() != ids.len() {
                    return Err(domain("duplicate ids in failure event"));
                }
                if let Some(bad) = set.iter().find(|id| alive.binary_search(id).is_err()) {
                    return Err(domain(format!("UAV {bad} is unknown or not active")));
                }
                set.into_iter().collect()
            }
            LossSelection::Random { seed, count } => {
                if *count > alive.len() {
                    return Err(domain(format!(
                        "cannot lose {count} of {} active UAVs",
                        alive.len()
                    )));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let mut picked: Vec<usize> = rand::seq::index::sample(&mut rng, alive.len(), *count)
                    .into_iter()
                    .map(|i| alive[i])
                    .collect();
                picked.sort_unstable();
                picked
            }
        };
        if lost.is_empty() {
            return Ok(lost);
        }
        self.advance_to(event.time);
        for &id in &lost {
            self.uavs[id].status = UavStatus::Lost;
        }
        self.rebuild_comm();
        let detail = format!("lost={} ids={}", lost.len(), join_ids(&lost));
        self.log(event.time, EventKind::Failure, detail);
        Ok(lost)
    }

    /// Updates neighbor bits and partitions survivors into clusters.
    pub fn detect_failures(&mut self) -> SurvivorReport {
        let status: Vec<bool> = self.uavs.iter().map(UavState::alive).collect();
        for u in self.uavs.iter_mut().filter(|u| u.is_active()) {
            for (bit, nb) in u.neighbor_state.iter_mut().zip(&u.neighbor_ids) {
                *bit = u8::from(status[*nb]);
            }
        }
        let survivors: Vec<&UavState> = self.active().collect();
        let survivor_ids: Vec<usize> = survivors.iter().map(|u| u.id).collect();
        let positions: Vec<Vec2> = survivors.iter().map(|u| self.position(u)).collect();
        let clusters = self.comm.components();
        let any_loss = self.uavs.iter().any(|u| u.status == UavStatus::Lost);

        let r_com = self.config.comm_radius(self.layout.loiter_radius);
        let base = self.config.base_station;
        let base_cluster = clusters.iter().find(|c| {
            c.iter().any(|&id| {
                self.uavs[id].assigned_circle.center.distance(base) <= r_com * (1.0 + COMM_RTOL)
            })
        });
        let reporter = base_cluster.and_then(|c| {
            c.iter().copied().find(|&id| self.uavs[id].neighbor_state.contains(&0))
        });
        let (route, detected_at) = match (any_loss, reporter) {
            (false, _) => (DetectionRoute::NoLoss, self.time),
            (true, Some(r)) => (DetectionRoute::Relay { reporter: r }, self.time),
            (true, None) => (DetectionRoute::BaseTimeout, self.time + self.loiter_period()),
        };
        if any_loss {
            let how = match route {
                DetectionRoute::Relay { reporter } => format!("relay via {reporter}"),
                _ => "base timeout".to_string(),
            };
            let detail = format!("survivors={} clusters={} route={how}", survivor_ids.len(), clusters.len());
            self.log(detected_at, EventKind::Detect, detail);
        }
        SurvivorReport { survivor_ids, positions, clusters, route, detected_at }
    }

    /// The super-agent's plan: re-optimize for the survivors, assign them to
    /// the new circles and plan synchronized, separated transitions.
    pub fn super_agent_recover(&self, report: &SurvivorReport) -> Result<RecoveryPlan> {
        let cfg = &self.config;
        let start_time = report.detected_at.max(self.time);
        let start_phase = wrap_angle(self.phase + self.angular_rate() * (start_time - self.time));
        let n_new = report.survivor_count();
        if n_new == 0 {
            return Ok(RecoveryPlan::failed(start_time, start_phase, None, FailureCause::NoSurvivors));
        }
        let sol = solve_radius_within(
            FleetBudget(n_new),
            &cfg.area,
            cfg.strategy.as_ref(),
            cfg.r_c,
            cfg.bounds(),
            &OptimizerWeights::default(),
        )?;
        let feasible = match sol {
            RadiusSolution::Feasible(f) => f,
            RadiusSolution::Infeasible(cause) => {
                return Ok(RecoveryPlan::failed(
                    start_time,
                    start_phase,
                    Some(sol),
                    FailureCause::Infeasible(cause),
                ));
            }
        };
        let layout = pack(&cfg.area, feasible.loiter_radius, cfg.strategy.as_ref())?;
        let targets = layout.circles();

        // Rows = new circles, columns = survivors; surplus survivors become reserves.
        let costs: Vec<Vec<f64>> = targets
            .iter()
            .map(|c| {
                report
                    .survivor_ids
                    .iter()
                    .map(|&id| self.uavs[id].assigned_circle.center.distance(c.center))
                    .collect()
            })
            .collect();
        let cols = min_cost_assignment(&costs)?;
        let assignment: Vec<(usize, usize)> =
            cols.iter().enumerate().map(|(circle, &col)| (report.survivor_ids[col], circle)).collect();
        let assigned: BTreeSet<usize> = assignment.iter().map(|a| a.0).collect();
        let reserves: Vec<usize> =
            report.survivor_ids.iter().copied().filter(|id| !assigned.contains(id)).collect();

        let turn_radius = cfg.transit_turn_radius.unwrap_or(cfg.r_min_turn);
        let requests: Vec<TransitionRequest> = assignment
            .iter()
            .map(|&(id, circle)| TransitionRequest {
                uav_id: id,
                source: self.uavs[id].assigned_circle,
                source_phase: start_phase,
                target: targets[circle],
                turn_radius,
                speed: cfg.speed,
                earliest_departure: 0.0,
            })
            .collect();
        let staggered = stagger_transitions(
            &requests,
            &[],
            cfg.separation_threshold,
            cfg.separation_dt,
            cfg.max_stagger_rounds,
        );
        let (transitions, separation, outcome) = match staggered {
            Ok(out) => {
                let outcome = if feasible.regime == Regime::Persistent {
                    RecoveryOutcome::PersistentRestored
                } else {
                    RecoveryOutcome::FullRestored
                };
                (out.plans, Some(out.separation), outcome)
            }
            Err(Error::Domain(msg)) | Err(Error::Planning(msg)) | Err(Error::Infeasible(msg)) => {
                (Vec::new(), None, RecoveryOutcome::RecoveryFailed(FailureCause::Planning(msg)))
            }
        };
        Ok(RecoveryPlan {
            start_time,
            start_phase,
            solution: Some(sol),
            new_layout: Some(layout),
            assignment,
            reserves,
            transitions,
            separation,
            outcome,
        })
    }

    /// Executes a plan: logs every transition and leaves the fleet loitering
    /// on the new layout once the last UAV has joined.
    pub fn apply_recovery(&mut self, plan: &RecoveryPlan) -> Result<()> {
        if let RecoveryOutcome::RecoveryFailed(cause) = &plan.outcome {
            let detail = format!("outcome=RecoveryFailed cause={cause}");
            self.log(plan.start_time, EventKind::Recover, detail);
            return Ok(());
        }
        let layout = plan.new_layout.clone().ok_or_else(|| domain("successful plan without a layout"))?;
        let r_new = layout.loiter_radius;
        self.log(
            plan.start_time,
            EventKind::Recover,
            format!("outcome={} r_l_new={r_new:.3} circles={}", plan.outcome.name(), layout.len()),
        );
        let mut timeline = Vec::new();
        for p in &plan.transitions {
            timeline.push(EventRecord {
                time: plan.start_time + p.depart_delay,
                kind: EventKind::TransitionStart,
                detail: format!("uav={} path_m={:.3} word={}", p.uav_id, p.path.length(), p.path.word),
            });
            timeline.push(EventRecord {
                time: plan.start_time + p.arrival_time,
                kind: EventKind::TransitionEnd,
                detail: format!("uav={} join_phase_rad={:.6}", p.uav_id, wrap_angle(p.join_phase)),
            });
        }
        timeline.sort_by(|a, b| a.time.total_cmp(&b.time));
        self.events.extend(timeline);

        for &id in &plan.reserves {
            self.uavs[id].status = UavStatus::Recalled;
        }
        let targets = layout.circles();
        for &(id, circle) in &plan.assignment {
            self.uavs[id].assigned_circle = targets[circle];
        }
        let end = plan.start_time + plan.completion_time();
        self.layout = layout;
        self.time = end;
        self.phase = wrap_angle(plan.start_phase + self.angular_rate() * plan.completion_time());
        self.rebuild_comm();
        let comm = self.comm.clone();
        neighbor_lists(&mut self.uavs, &comm);
        Ok(())
    }

    pub fn coverage_report(&self, grid_pitch: f64, phase_samples: usize) -> Result<CoverageReport> {
        let pts = coverage::sample_grid(&Region::Rect(self.config.area), grid_pitch)?;
        let circles = self.active_circles();
        let phases = vec![self.phase; circles.len()];
        let instant =
            coverage::min_instant_fraction(&pts, &circles, &phases, self.config.r_c, phase_samples)?;
        let cycle = coverage::cycle_fraction(&pts, &circles, self.config.r_c);
        Ok(CoverageReport { instant_min_fraction: instant, cycle_fraction: cycle, grid_pitch, phase_samples })
    }

    /// Loiter tracks of every active UAV at the current time.
    pub fn loiter_tracks(&self) -> Vec<LoiterTrack> {
        self.active()
            .map(|u| LoiterTrack { uav_id: u.id, circle: u.assigned_circle, phase0: self.phase, speed: self.config.speed })
            .collect()
    }
}

fn join_ids(ids: &[usize]) -> String {
    ids.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub r_init: f64,
    pub loss_fraction: f64,
    pub survivors: usize,
    pub r_new: Option<f64>,
    pub regime: Regime,
    pub ideal_r_new: f64,
}

/// UAVs removed for loss fraction `loss` out of `n`: `⌈ℓ·N⌉`.
pub fn loss_count(n: usize, loss: f64) -> usize {
    ((loss * n as f64) - 1e-9).ceil().max(0.0) as usize
}

/// For every `(r_init, ℓ)`: deploy at `r_init`, remove `⌈ℓ·N⌉` UAVs with a
/// seeded random draw and re-optimize the radius for the survivors.
pub fn loss_sweep(config: &FleetConfig, r_inits: &[f64], fractions: &[f64], seed: u64) -> Result<Vec<SweepRow>> {
    config.validate()?;
    if let Some(bad) = fractions.iter().find(|l| !(0.0..1.0).contains(*l)) {
        return Err(domain(format!("loss fraction must lie in [0, 1), got {bad}")));
    }
    let cells: Vec<(f64, f64)> =
        r_inits.iter().flat_map(|&r| fractions.iter().map(move |&l| (r, l))).collect();
    cells
        .par_iter()
        .map(|&(r_init, loss)| {
            let mut fleet = FleetState::deploy(config.clone(), r_init)?;
            let count = loss_count(fleet.uavs.len(), loss);
            fleet.inject_failure(&FailureEvent { time: 0.0, selection: LossSelection::Random { seed, count } })?;
            let survivors = fleet.active().count();
            let sol = solve_radius_within(
                FleetBudget(survivors),
                &config.area,
                config.strategy.as_ref(),
                config.r_c,
                config.bounds(),
                &OptimizerWeights::default(),
            )?;
            Ok(SweepRow {
                r_init,
                loss_fraction: loss,
                survivors,
                r_new: sol.radius(),
                regime: sol.regime(),
                ideal_r_new: ideal_radius_after_loss(r_init, loss)?,
            })
        })
        .collect()
}

/// Largest swept loss fraction from which `r_init` still recovers.
pub fn max_recoverable_loss(rows: &[SweepRow], r_init: f64) -> Option<f64> {
    rows.iter()
        .filter(|r| r.r_init == r_init && r.regime != Regime::Infeasible)
        .map(|r| r.loss_fraction)
        .max_by(f64::total_cmp)
}
