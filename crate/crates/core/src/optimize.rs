//! Loiter radius for a fleet budget.
//!
//! The smallest radius whose layout fits in the budget gives the shortest
//! revisit period `2π·r_l/v`. Layout counts are step functions of the radius
//! that only change at the breakpoints enumerated by
//! [`LatticeShape::breakpoint_families`](crate::packing::LatticeShape::breakpoint_families),
//! so the optimum is either the lower bound or one of those breakpoints.
//! Each family is searched by bisection over its index.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{domain, Result};
use crate::geometry::AreaSpec;
use crate::packing::{self, PackingStrategy};

/// Radii below this are never returned.
pub const RADIUS_FLOOR: f64 = 1e-3;

const REGIME_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct FleetBudget(pub usize);

/// Objective weights. Only `sigma[0]` scales the reported objective
/// `σ₁/r_l²`; the other two are carried for configuration compatibility.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerWeights {
    pub sigma: [f64; 3],
}

impl Default for OptimizerWeights {
    fn default() -> Self {
        Self { sigma: [1.0, 0.0, 0.0] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// `r_l ≤ r_c`: every point covered at every instant.
    Persistent,
    /// `r_c < r_l ≤ r_l-max`: every point covered once per loiter cycle.
    FullOnly,
    Infeasible,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::Persistent => "Persistent",
            Regime::FullOnly => "FullOnly",
            Regime::Infeasible => "Infeasible",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibleRadius {
    pub loiter_radius: f64,
    /// Circles in the first row.
    pub n_x: usize,
    /// Number of rows.
    pub n_y: usize,
    pub uav_count: usize,
    pub regime: Regime,
    /// `σ₁/r_l²`.
    pub objective: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InfeasibleCause {
    EmptyFleet,
    /// The minimum turning radius exceeds the largest admissible loiter radius.
    TurnRadius { r_min_turn: f64, r_l_max: f64 },
    /// Even at `r_l-max` the layout needs more UAVs than available.
    Budget { required: usize, available: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadiusSolution {
    Feasible(FeasibleRadius),
    Infeasible(InfeasibleCause),
}

impl RadiusSolution {
    pub fn regime(&self) -> Regime {
        match self {
            RadiusSolution::Feasible(f) => f.regime,
            RadiusSolution::Infeasible(_) => Regime::Infeasible,
        }
    }

    pub fn radius(&self) -> Option<f64> {
        match self {
            RadiusSolution::Feasible(f) => Some(f.loiter_radius),
            RadiusSolution::Infeasible(_) => None,
        }
    }

    pub fn feasible(&self) -> Option<&FeasibleRadius> {
        match self {
            RadiusSolution::Feasible(f) => Some(f),
            RadiusSolution::Infeasible(_) => None,
        }
    }

    /// Missing UAVs when the budget is the limiting factor.
    pub fn deficit(&self) -> Option<usize> {
        match self {
            RadiusSolution::Infeasible(InfeasibleCause::Budget { required, available }) => {
                Some(required - available)
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusBounds {
    /// Usually the minimum turning radius.
    pub lower: f64,
    /// Usually `r_l-max`.
    pub upper: f64,
}

/// Smallest radius in `[max(r_min_turn, ε), r_l-max]` whose layout fits in
/// the budget, with `r_l-max` derived from `r_c`.
pub fn solve_radius(
    budget: FleetBudget,
    area: &AreaSpec,
    strategy: &dyn PackingStrategy,
    r_c: f64,
    r_min_turn: f64,
) -> Result<RadiusSolution> {
    let bounds = RadiusBounds { lower: r_min_turn, upper: strategy.max_loiter_radius(r_c) };
    solve_radius_within(budget, area, strategy, r_c, bounds, &OptimizerWeights::default())
}

pub fn solve_radius_within(
    budget: FleetBudget,
    area: &AreaSpec,
    strategy: &dyn PackingStrategy,
    r_c: f64,
    bounds: RadiusBounds,
    weights: &OptimizerWeights,
) -> Result<RadiusSolution> {
    let area = AreaSpec::new(area.x_extent, area.y_extent)?;
    if !(r_c > 0.0 && r_c.is_finite()) {
        return Err(domain(format!("coverage radius must be positive, got {r_c}")));
    }
    if !(weights.sigma[0] > 0.0) {
        return Err(domain("sigma[0] must be positive"));
    }
    if !(bounds.upper > 0.0) || bounds.lower.is_nan() {
        return Err(domain(format!("invalid radius bounds {bounds:?}")));
    }
    let n = budget.0;
    if n == 0 {
        return Ok(RadiusSolution::Infeasible(InfeasibleCause::EmptyFleet));
    }
    let lo = bounds.lower.max(RADIUS_FLOOR);
    let hi = bounds.upper;
    if lo > hi {
        return Ok(RadiusSolution::Infeasible(InfeasibleCause::TurnRadius {
            r_min_turn: bounds.lower,
            r_l_max: hi,
        }));
    }
    let count = |r: f64| packing::count_unchecked(&area, r, strategy);
    let at_max = count(hi);
    if at_max > n {
        return Ok(RadiusSolution::Infeasible(InfeasibleCause::Budget {
            required: at_max,
            available: n,
        }));
    }

    let radius = if count(lo) <= n {
        lo
    } else {
        let mut best = hi;
        for fam in strategy.shape().breakpoint_families(&area) {
            let Some(last) = fam.last_index_above(lo) else { continue };
            let mut first = ((fam.extent / hi - fam.lead) / fam.pitch).ceil().max(0.0) as u64;
            while first > 0 && fam.radius(first - 1) <= hi {
                first -= 1;
            }
            while first <= last && fam.radius(first) > hi {
                first += 1;
            }
            if first > last || count(fam.radius(first)) > n {
                continue;
            }
            // invariant: index `a` feasible; everything past `b` infeasible or below lo
            let (mut a, mut b) = (first, last);
            while a < b {
                let mid = a + (b - a).div_ceil(2);
                if count(fam.radius(mid)) <= n {
                    a = mid;
                } else {
                    b = mid - 1;
                }
            }
            best = best.min(fam.radius(a));
        }
        best
    };

    let shape = strategy.shape();
    Ok(RadiusSolution::Feasible(FeasibleRadius {
        loiter_radius: radius,
        n_x: shape.template_count(&area, radius, 0),
        n_y: shape.row_count(&area, radius),
        uav_count: count(radius),
        regime: classify_regime_with_max(radius, r_c, hi),
        objective: weights.sigma[0] / (radius * radius),
    }))
}

pub fn classify_regime(r_l: f64, r_c: f64, strategy: &dyn PackingStrategy) -> Regime {
    classify_regime_with_max(r_l, r_c, strategy.max_loiter_radius(r_c))
}

/// Both edges inclusive, to a relative tolerance of 1e-12.
pub fn classify_regime_with_max(r_l: f64, r_c: f64, r_l_max: f64) -> Regime {
    if r_l <= r_c * (1.0 + REGIME_RTOL) {
        Regime::Persistent
    } else if r_l <= r_l_max * (1.0 + REGIME_RTOL) {
        Regime::FullOnly
    } else {
        Regime::Infeasible
    }
}

/// Radius after losing `loss_fraction` of the fleet when each UAV tiles an
/// area proportional to `r²` with no overlap and no boundary waste.
pub fn ideal_radius_after_loss(r_init: f64, loss_fraction: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&loss_fraction) {
        return Err(domain(format!("loss fraction must lie in [0, 1), got {loss_fraction}")));
    }
    Ok(r_init / (1.0 - loss_fraction).sqrt())
}

/// Time between successive visits of any point, `2π·r_l/v`.
pub fn revisit_period(r_l: f64, speed: f64) -> Result<f64> {
    if !(speed > 0.0) {
        return Err(domain(format!("speed must be positive, got {speed}")));
    }
    Ok(2.0 * PI * r_l / speed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::PackingKind;
    use crate::packing::{builtin, uav_count};
    use proptest::prelude::*;

    const R_C_TABLE2: f64 = 73.205_080_756_887_72; // 100·(√3 − 1)

    fn hex() -> &'static dyn PackingStrategy {
        builtin(PackingKind::Hexagon)
    }

    fn area() -> AreaSpec {
        AreaSpec::new(500.0, 650.0).unwrap()
    }

    /// Bisection on the real line using only `uav_count`.
    fn min_feasible_by_bisection(
        n: usize,
        area: &AreaSpec,
        s: &dyn PackingStrategy,
        lo: f64,
        hi: f64,
    ) -> Option<f64> {
        if uav_count(area, hi, s).unwrap() > n {
            return None;
        }
        if uav_count(area, lo, s).unwrap() <= n {
            return Some(lo);
        }
        let (mut a, mut b) = (lo, hi);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if uav_count(area, m, s).unwrap() <= n {
                b = m;
            } else {
                a = m;
            }
        }
        Some(b)
    }

    #[test]
    fn table2_recovery_radius() {
        let sol = solve_radius(FleetBudget(17), &area(), hex(), R_C_TABLE2, 11.0).unwrap();
        let f = sol.feasible().expect("feasible");
        assert!((f.loiter_radius - 96.22).abs() < 0.01, "{}", f.loiter_radius);
        assert!((f.loiter_radius - 500.0 / (3.0 * 3f64.sqrt())).abs() < 1e-9);
        assert_eq!((f.n_x, f.n_y, f.uav_count), (3, 5, 17));
        assert_eq!(f.regime, Regime::FullOnly);
    }

    #[test]
    fn sixteen_is_one_short() {
        let sol = solve_radius(FleetBudget(16), &area(), hex(), R_C_TABLE2, 11.0).unwrap();
        assert_eq!(sol.regime(), Regime::Infeasible);
        assert_eq!(sol.deficit(), Some(1));
        assert_eq!(sol.radius(), None);
    }

    #[test]
    fn large_budget_is_persistent() {
        for n in [58, 60, 100, 500] {
            let sol = solve_radius(FleetBudget(n), &area(), hex(), 50.0, 0.0).unwrap();
            let r = sol.radius().unwrap();
            assert!(r <= 50.0 + 1e-12, "n={n} r={r}");
            assert_eq!(sol.regime(), Regime::Persistent);
        }
    }

    #[test]
    fn degenerate_budgets() {
        assert_eq!(
            solve_radius(FleetBudget(0), &area(), hex(), 50.0, 0.0).unwrap(),
            RadiusSolution::Infeasible(InfeasibleCause::EmptyFleet)
        );
        let sol = solve_radius(FleetBudget(100), &area(), hex(), 50.0, 1000.0).unwrap();
        assert!(matches!(sol, RadiusSolution::Infeasible(InfeasibleCause::TurnRadius { .. })));
        let tiny = AreaSpec::new(1.0, 1.0).unwrap();
        let sol = solve_radius(FleetBudget(1_000_000), &tiny, hex(), 50.0, 0.0).unwrap();
        assert_eq!(sol.radius(), Some(RADIUS_FLOOR));
        assert!(solve_radius(FleetBudget(5), &area(), hex(), 0.0, 0.0).is_err());
    }

    #[test]
    fn regime_examples() {
        let rc = 10.0;
        assert_eq!(classify_regime(rc, rc, hex()), Regime::Persistent);
        assert_eq!(classify_regime(1.2 * rc, rc, hex()), Regime::FullOnly);
        assert_eq!(classify_regime(1.5 * rc, rc, hex()), Regime::Infeasible);
        let edge = rc * (1.0 / (3f64.sqrt() - 1.0));
        assert_eq!(classify_regime(edge, rc, hex()), Regime::FullOnly);
    }

    #[test]
    fn ideal_radius_examples() {
        assert_eq!(ideal_radius_after_loss(70.0, 0.0).unwrap(), 70.0);
        assert!((ideal_radius_after_loss(50.0, 0.75).unwrap() - 100.0).abs() < 1e-12);
        assert!((ideal_radius_after_loss(70.0, 0.5).unwrap() - 98.99).abs() < 0.005);
        assert!(ideal_radius_after_loss(70.0, 1.0).is_err());
        assert!(ideal_radius_after_loss(70.0, -0.1).is_err());
    }

    #[test]
    fn revisit_examples() {
        assert_eq!(revisit_period(0.0, 10.0).unwrap(), 0.0);
        assert!((revisit_period(100.0, 10.0).unwrap() - 62.832).abs() < 1e-3);
        assert!((revisit_period(96.22, 15.0).unwrap() - 40.3045).abs() < 1e-3);
        assert!(revisit_period(1.0, 0.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn matches_bisection_oracle_and_is_tight(
            x in 50.0f64..3000.0,
            y in 50.0f64..3000.0,
            n in 1usize..400,
            hexagon in any::<bool>(),
            r_c in 20.0f64..200.0,
        ) {
            let area = AreaSpec::new(x, y).unwrap();
            let s = builtin(if hexagon { PackingKind::Hexagon } else { PackingKind::Square });
            let hi = s.max_loiter_radius(r_c);
            let sol = solve_radius(FleetBudget(n), &area, s, r_c, 0.0).unwrap();
            let oracle = min_feasible_by_bisection(n, &area, s, RADIUS_FLOOR, hi);
            match (sol.feasible(), oracle) {
                (Some(f), Some(o)) => {
                    prop_assert!((f.loiter_radius - o).abs() <= 1e-6 * o.max(1.0));
                    prop_assert!(uav_count(&area, f.loiter_radius, s).unwrap() <= n);
                    let below = f.loiter_radius - 1e-3;
                    prop_assert!(below < RADIUS_FLOOR || uav_count(&area, below, s).unwrap() > n);
                    let layout = packing::pack(&area, f.loiter_radius, s).unwrap();
                    prop_assert_eq!(layout.first_row_count(), f.n_x);
                    prop_assert_eq!(layout.n_rows(), f.n_y);
                    prop_assert_eq!(layout.len(), f.uav_count);
                }
                (None, None) => prop_assert!(sol.deficit().unwrap() > 0),
                (a, b) => prop_assert!(false, "solver {:?} vs oracle {:?}", a, b),
            }
        }

        #[test]
        fn radius_non_increasing_in_budget(n in 1usize..300, extra in 1usize..50) {
            let s = hex();
            let a = solve_radius(FleetBudget(n), &area(), s, 60.0, 0.0).unwrap();
            let b = solve_radius(FleetBudget(n + extra), &area(), s, 60.0, 0.0).unwrap();
            if let (Some(ra), Some(rb)) = (a.radius(), b.radius()) {
                prop_assert!(rb <= ra);
            }
            if a.radius().is_some() {
                prop_assert!(b.radius().is_some());
            }
        }

        #[test]
        fn ideal_radius_composes(l1 in 0.0f64..0.95, l2 in 0.0f64..0.95, r in 1.0f64..200.0) {
            let step = ideal_radius_after_loss(ideal_radius_after_loss(r, l1).unwrap(), l2).unwrap();
            let once = ideal_radius_after_loss(r, 1.0 - (1.0 - l1) * (1.0 - l2)).unwrap();
            prop_assert!((step - once).abs() <= 1e-9 * once);
            prop_assert!(ideal_radius_after_loss(r, l1 + 0.01).unwrap() > ideal_radius_after_loss(r, l1).unwrap());
        }
    }
}
