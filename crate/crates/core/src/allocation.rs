//! Timed waypoint allocation over a split decomposition.
//!
//! Depth-first search schedules every reach progress: pick the reach with
//! the nearest deadline, sample a target state in its region (or reuse the
//! current one), predict travel time, place the waypoint at the earliest
//! step that respects the time-variable store and the windows of already
//! determined invariances, then tighten the store and recurse. Residual
//! invariances never get waypoints of their own; their start is determined
//! by the reach head that precedes them, and conflicts with them both shift
//! waypoints and shorten their windows.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bounds::{AffineConstraint, Assignment, BudgetExceeded, ConstraintStore};
use crate::decomp::{ProgressKind, SplitDecomposition};
use crate::generation::{PointwiseConstraint, TimePredictor};
use crate::geom::Vec2;
use crate::stl::{Predicate, Shape, Step};
use crate::world::Environment;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AllocationConfig {
    /// Sampling attempts per reach before the search backtracks.
    pub n_max: usize,
    pub seed: u64,
    /// Fraction of a disc region's radius kept from the boundary when
    /// sampling waypoints inside it.
    pub sample_margin: f64,
    pub dfs_node_budget: u64,
}

impl Default for AllocationConfig {
    fn default() -> Self {
        AllocationConfig {
            n_max: 1,
            seed: 0,
            sample_margin: 0.5,
            dfs_node_budget: 100_000,
        }
    }
}

/// Scheduled visit. `progress` names the split reach served here; the
/// leading start waypoint serves none.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimedWaypoint {
    pub t: Step,
    pub pos: Vec2,
    pub progress: Option<usize>,
}

/// One DFS placement attempt, for debugging traces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEvent {
    pub depth: usize,
    pub progress: usize,
    pub t: Option<Step>,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AllocationResult {
    /// Starts with the initial state at step 0; non-decreasing in `t`.
    pub waypoints: Vec<TimedWaypoint>,
    pub store: ConstraintStore,
    /// Witness time-variable assignment from the final store.
    pub assignment: Assignment,
    /// Split reach progress id -> index into `waypoints`.
    pub reach_map: BTreeMap<usize, usize>,
    pub trace: Vec<TraceEvent>,
    pub nodes: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum AllocError {
    /// Search space exhausted without a schedule.
    Infeasible,
    /// DFS node budget exceeded.
    BudgetExceeded { nodes: u64 },
    /// The exact bound solver gave up.
    Solver(BudgetExceeded),
}

impl core::fmt::Display for AllocError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            AllocError::Infeasible => write!(f, "no feasible waypoint schedule"),
            AllocError::BudgetExceeded { nodes } => {
                write!(f, "allocation budget of {} nodes exceeded", nodes)
            }
            AllocError::Solver(e) => write!(f, "{}", e),
        }
    }
}

impl From<BudgetExceeded> for AllocError {
    fn from(e: BudgetExceeded) -> Self {
        AllocError::Solver(e)
    }
}

/// Uniform sample inside the predicate region, kept clear of walls and
/// obstacles; `None` when rejection sampling runs dry.
fn sample_region(
    env: &Environment,
    pred: &Predicate,
    margin: f64,
    rng: &mut ChaCha8Rng,
) -> Option<Vec2> {
    const TRIES: usize = 64;
    match &pred.shape {
        Shape::CircleInside(d) => {
            // margin is a fraction of the radius kept from the boundary
            let eff = d.radius * margin.clamp(0.0, 0.9);
            for _ in 0..TRIES {
                let r = (d.radius - eff) * libm::sqrt(rng.random::<f64>());
                let th = 2.0 * PI * rng.random::<f64>();
                let p = d.center + Vec2::new(r * libm::cos(th), r * libm::sin(th));
                if env.is_free(p, 0.05) {
                    return Some(p);
                }
            }
            None
        }
        Shape::CircleOutside(_) | Shape::Halfplane { .. } => {
            let b = &env.bounds;
            for _ in 0..TRIES {
                let p = Vec2::new(
                    b.min.x + 0.3 + (b.width() - 0.6) * rng.random::<f64>(),
                    b.min.y + 0.3 + (b.height() - 0.6) * rng.random::<f64>(),
                );
                if pred.margin(p) >= 0.3 && env.is_free(p, 0.05) {
                    return Some(p);
                }
            }
            None
        }
    }
}

struct Search<'a> {
    split: &'a SplitDecomposition,
    env: &'a Environment,
    predictor: &'a dyn TimePredictor,
    cfg: &'a AllocationConfig,
    /// residual id for each head, parallel to progresses (usize::MAX = none)
    residual_of: Vec<usize>,
    rng: ChaCha8Rng,
    nodes: u64,
    trace: Vec<TraceEvent>,
}

enum Outcome {
    Done(AllocationResult),
    Dead,
}

impl<'a> Search<'a> {
    fn bump(&mut self) -> Result<(), AllocError> {
        self.nodes += 1;
        if self.nodes > self.cfg.dfs_node_budget {
            Err(AllocError::BudgetExceeded {
                nodes: self.cfg.dfs_node_budget,
            })
        } else {
            Ok(())
        }
    }

    fn dfs(
        &mut self,
        x: Vec2,
        t: Step,
        remaining: &[usize],
        store: &ConstraintStore,
        schedule: &mut Vec<TimedWaypoint>,
        head_times: &mut Vec<Option<Step>>,
    ) -> Result<Outcome, AllocError> {
        if remaining.is_empty() {
            return match store.pick_assignment()? {
                Some(assignment) => {
                    let mut reach_map = BTreeMap::new();
                    for (i, w) in schedule.iter().enumerate() {
                        if let Some(pid) = w.progress {
                            reach_map.insert(pid, i);
                        }
                    }
                    Ok(Outcome::Done(AllocationResult {
                        waypoints: schedule.clone(),
                        store: store.clone(),
                        assignment,
                        reach_map,
                        trace: self.trace.clone(),
                        nodes: self.nodes,
                    }))
                }
                None => Ok(Outcome::Dead),
            };
        }

        // candidates ordered by earliest potential deadline, then earliest
        // potential start, then id; a dead deadline kills the branch
        let mut keyed: Vec<(i64, i64, usize)> = Vec::with_capacity(remaining.len());
        for &r in remaining {
            let p = &self.split.progresses[r];
            let b_min = match store.min_value(&p.b)? {
                Some(v) => v,
                None => return Ok(Outcome::Dead),
            };
            let a_min = match store.min_value(&p.a)? {
                Some(v) => v,
                None => return Ok(Outcome::Dead),
            };
            let b_max = match store.max_value(&p.b)? {
                Some(v) => v,
                None => return Ok(Outcome::Dead),
            };
            if b_max < t {
                return Ok(Outcome::Dead);
            }
            keyed.push((b_min, a_min, r));
        }
        keyed.sort();

        for &(_, _, r) in &keyed {
            for attempt in 0..self.cfg.n_max.max(1) {
                self.bump()?;
                let depth = schedule.len();
                let placed =
                    self.try_place(x, t, r, store, attempt, schedule, head_times, remaining)?;
                self.trace.push(TraceEvent {
                    depth,
                    progress: r,
                    t: placed.as_ref().and_then(|res| {
                        res.waypoints.get(depth).map(|w| w.t)
                    }),
                    accepted: placed.is_some(),
                });
                if let Some(done) = placed {
                    return Ok(Outcome::Done(done));
                }
            }
        }
        Ok(Outcome::Dead)
    }

    #[allow(clippy::too_many_arguments)]
    fn try_place(
        &mut self,
        x: Vec2,
        t: Step,
        r: usize,
        store: &ConstraintStore,
        attempt: usize,
        schedule: &mut Vec<TimedWaypoint>,
        head_times: &mut Vec<Option<Step>>,
        remaining: &[usize],
    ) -> Result<Option<AllocationResult>, AllocError> {
        let p = self.split.progresses[r].clone();
        let t_lo = match store.min_value(&p.a)? {
            Some(v) => v,
            None => return Ok(None),
        };
        let t_hi = match store.max_value(&p.b)? {
            Some(v) => v,
            None => return Ok(None),
        };
        let t_min = t_lo.max(t);
        if t_min > t_hi {
            return Ok(None);
        }

        // reuse the current state when it already satisfies the predicate;
        // later attempts sample fresh targets
        let (target, travel) = if attempt == 0 && p.predicate.margin(x) >= 0.0 {
            (x, 0)
        } else {
            match sample_region(self.env, &p.predicate, self.cfg.sample_margin, &mut self.rng) {
                Some(s) => (s, self.predictor.predict(x, s)),
                None => return Ok(None),
            }
        };

        // windows of determined invariances the target violates; the window
        // end can be tightened down to its minimum but no further, so that
        // minimum is the earliest step the target frees up
        let mut violated: Vec<(Step, Step, usize)> = Vec::new();
        for pair in &self.split.pairs {
            let th = match head_times[pair.head] {
                Some(v) => v,
                None => continue,
            };
            let res = &self.split.progresses[pair.residual];
            if res.predicate.margin(target) >= 0.0 {
                continue;
            }
            let d_lo = match store.min_value(&res.b)? {
                Some(v) => v,
                None => return Ok(None),
            };
            violated.push((th + 1, d_lo, pair.residual));
        }
        let conflicts: Vec<(Step, Step, usize)> = violated
            .iter()
            .copied()
            .filter(|&(c, d, _)| c <= d)
            .collect();

        // earliest admissible step: outside every conflict window, and far
        // enough after a window that pinned the agent for travel to fit
        let mut cand = t_min.max(t + travel);
        loop {
            let mut moved = false;
            for &(c, d, _) in &conflicts {
                if c <= cand && cand <= d {
                    cand = d + travel.max(1);
                    moved = true;
                } else if d < cand && cand < d + travel && c <= d {
                    cand = d + travel;
                    moved = true;
                }
            }
            if !moved {
                break;
            }
            if cand > t_hi {
                return Ok(None);
            }
        }
        if cand > t_hi {
            return Ok(None);
        }
        let t_new = cand;

        // tighten the store: the reach window must contain t_new, and every
        // violated determined window must end before it
        let mut child = store
            .with_constraint(AffineConstraint::le(p.a.clone(), t_new))
            .expect("endpoint vars are in range");
        child = child
            .with_constraint(AffineConstraint::ge(p.b.clone(), t_new))
            .expect("endpoint vars are in range");
        for &(c, _, res_id) in &violated {
            if c <= t_new {
                let b = self.split.progresses[res_id].b.clone();
                child = child
                    .with_constraint(AffineConstraint::le(b, t_new - 1))
                    .expect("endpoint vars are in range");
            }
        }
        if !child.is_feasible()? {
            return Ok(None);
        }

        schedule.push(TimedWaypoint {
            t: t_new,
            pos: target,
            progress: Some(r),
        });
        let saved_head = head_times[r];
        if self.residual_of[r] != usize::MAX {
            head_times[r] = Some(t_new);
        }
        let next: Vec<usize> = remaining.iter().copied().filter(|&q| q != r).collect();
        let out = self.dfs(target, t_new, &next, &child, schedule, head_times)?;
        match out {
            Outcome::Done(res) => Ok(Some(res)),
            Outcome::Dead => {
                schedule.pop();
                head_times[r] = saved_head;
                Ok(None)
            }
        }
    }
}

/// Schedules all reach progresses of `split` starting from rest at `start`.
pub fn allocate(
    split: &SplitDecomposition,
    start: Vec2,
    env: &Environment,
    predictor: &dyn TimePredictor,
    cfg: &AllocationConfig,
) -> Result<AllocationResult, AllocError> {
    let n = split.progresses.len();
    let mut residual_of = alloc::vec![usize::MAX; n];
    for pair in &split.pairs {
        residual_of[pair.head] = pair.residual;
    }
    let reaches: Vec<usize> = split
        .progresses
        .iter()
        .filter(|p| p.kind == ProgressKind::Reach)
        .map(|p| p.id)
        .collect();

    let mut search = Search {
        split,
        env,
        predictor,
        cfg,
        residual_of,
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        nodes: 0,
        trace: Vec::new(),
    };
    let store = ConstraintStore::new(split.bounds.clone());
    let mut schedule = alloc::vec![TimedWaypoint {
        t: 0,
        pos: start,
        progress: None,
    }];
    let mut head_times = alloc::vec![None; n];
    match search.dfs(start, 0, &reaches, &store, &mut schedule, &mut head_times)? {
        Outcome::Done(res) => Ok(res),
        Outcome::Dead => Err(AllocError::Infeasible),
    }
}

/// Waypoint-level consistency of a finished allocation: every reach sits in
/// its instantiated window on a satisfying state, and no waypoint inside an
/// invariance window violates that invariance. Returns the list of
/// violations, empty on success.
pub fn verify_allocation(split: &SplitDecomposition, result: &AllocationResult) -> Vec<String> {
    let mut report = Vec::new();
    let lam = &result.assignment;
    if lam.len() != split.bounds.len() {
        report.push(format!(
            "assignment has {} vars, expected {}",
            lam.len(),
            split.bounds.len()
        ));
        return report;
    }
    for (i, &v) in lam.iter().enumerate() {
        let (lo, hi) = split.bounds[i];
        if v < lo || v > hi {
            report.push(format!("l{} = {} outside [{}, {}]", i + 1, v, lo, hi));
        }
    }
    for c in result.store.affine() {
        if !c.holds(lam) {
            report.push(format!("constraint {} fails under the assignment", c));
        }
    }
    match result.waypoints.first() {
        Some(w) if w.t == 0 => {}
        Some(w) => report.push(format!("waypoint sequence starts at t = {}", w.t)),
        None => report.push(String::from("empty waypoint sequence")),
    }
    let mut prev: Option<&TimedWaypoint> = None;
    for w in &result.waypoints {
        if let Some(p) = prev {
            if w.t < p.t {
                report.push(format!("time decreases: {} after {}", w.t, p.t));
            }
            if w.t == p.t && w.pos.distance(p.pos) > 1e-9 {
                report.push(format!("two states at step {}", w.t));
            }
        }
        prev = Some(w);
        let r = match w.progress {
            Some(r) => r,
            None => continue,
        };
        let p = &split.progresses[r];
        let (lo, hi) = p.window(lam);
        if w.t < lo || w.t > hi {
            report.push(format!(
                "reach {} placed at {} outside [{}, {}]",
                r, w.t, lo, hi
            ));
        }
        if p.predicate.margin(w.pos) < 0.0 {
            report.push(format!("reach {} placed outside its region", r));
        }
    }
    // each reach scheduled exactly once and recorded in the map
    let mut seen = alloc::vec![0usize; split.progresses.len()];
    for w in &result.waypoints {
        if let Some(r) = w.progress {
            seen[r] += 1;
        }
    }
    for p in &split.progresses {
        if p.kind == ProgressKind::Reach && seen[p.id] != 1 {
            report.push(format!("reach {} scheduled {} times", p.id, seen[p.id]));
        }
    }
    for (&r, &i) in &result.reach_map {
        if result.waypoints.get(i).and_then(|w| w.progress) != Some(r) {
            report.push(format!("reach map entry {} -> {} is stale", r, i));
        }
    }
    // invariance windows against scheduled states
    for pair in &split.pairs {
        let res = &split.progresses[pair.residual];
        let (lo, hi) = res.window(lam);
        if lo > hi {
            continue;
        }
        for w in &result.waypoints {
            if w.t >= lo && w.t <= hi && res.predicate.margin(w.pos) < 0.0 {
                report.push(format!(
                    "waypoint at {} violates invariance {} over [{}, {}]",
                    w.t, pair.residual, lo, hi
                ));
            }
        }
    }
    report
}

/// Inputs for signal generation: the waypoint path (anchored at `start` at
/// step 0), the pointwise invariance constraints with instantiated windows,
/// and the final step the plan must reach.
pub fn plan_inputs(
    split: &SplitDecomposition,
    result: &AllocationResult,
) -> (Vec<(Step, Vec2)>, Vec<PointwiseConstraint>, Step) {
    let lam = &result.assignment;
    let waypoints: Vec<(Step, Vec2)> =
        result.waypoints.iter().map(|w| (w.t, w.pos)).collect();

    let mut constraints = Vec::with_capacity(split.pairs.len());
    let mut end_time = waypoints.last().map(|&(t, _)| t).unwrap_or(0);
    for pair in &split.pairs {
        let res = &split.progresses[pair.residual];
        let (lo, hi) = res.window(lam);
        if lo > hi {
            continue;
        }
        end_time = end_time.max(hi);
        constraints.push(PointwiseConstraint {
            window: (lo, hi),
            predicate: res.predicate.clone(),
            source: pair.residual,
        });
    }
    (waypoints, constraints, end_time)
}
