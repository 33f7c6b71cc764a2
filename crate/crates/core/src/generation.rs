//! Turning timed waypoints into a full position signal.
//!
//! Each pair of consecutive waypoints becomes a segment: an optional dwell
//! at the start (to honor invariances that pin the agent there), a
//! constant-speed traversal of a polyline routed around forbidden discs,
//! and an optional dwell at the end. The result is verified pointwise
//! against every invariance window before it is returned.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::geom::{point_segment_distance, Disc, Rect, Vec2};
use crate::stl::{Predicate, Shape, Signal, Step};
use crate::world::{DynamicsParams, Environment};

/// Estimates how many planning steps travel between two points takes.
pub trait TimePredictor {
    fn predict(&self, from: Vec2, to: Vec2) -> Step;
}

/// Straight-line estimate at a reference cruise speed, padded by `gamma`.
/// The reference speed sits well under the dynamic limit so routed detours
/// and controller lag fit into the predicted time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticPredictor {
    pub gamma: f64,
    pub v_ref: f64,
}

impl Default for AnalyticPredictor {
    fn default() -> Self {
        AnalyticPredictor {
            gamma: 1.0,
            v_ref: 0.5,
        }
    }
}

impl TimePredictor for AnalyticPredictor {
    fn predict(&self, from: Vec2, to: Vec2) -> Step {
        libm::ceil(self.gamma * from.distance(to) / self.v_ref) as Step
    }
}

/// Spatial requirement active on a closed step window.
#[derive(Debug, Clone, PartialEq)]
pub struct PointwiseConstraint {
    pub window: (Step, Step),
    pub predicate: Predicate,
    /// Progress id this constraint came from, for error reporting.
    pub source: usize,
}

impl PointwiseConstraint {
    fn overlaps(&self, lo: Step, hi: Step) -> bool {
        self.window.0 <= hi && self.window.1 >= lo
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GenError {
    /// Waypoints empty, unordered, not starting at step 0, or colliding
    /// (same step, different positions).
    BadWaypoints,
    /// Dwell requirements leave too little time to cover the distance.
    InfeasibleSegment { t0: Step, t1: Step },
    /// No collision-free route between the waypoints was found.
    Blocked { t0: Step, t1: Step },
    /// The finished plan breaks an invariance window.
    Violated { source: usize, t: Step },
}

impl fmt::Display for GenError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GenError::BadWaypoints => write!(f, "waypoint sequence is malformed"),
            GenError::InfeasibleSegment { t0, t1 } => {
                write!(f, "segment [{},{}] cannot be traversed in time", t0, t1)
            }
            GenError::Blocked { t0, t1 } => {
                write!(f, "no collision-free route for segment [{},{}]", t0, t1)
            }
            GenError::Violated { source, t } => {
                write!(f, "generated plan violates invariance {} at step {}", source, t)
            }
        }
    }
}

/// Stitched plan plus the bookkeeping the pipeline reports on.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedSignal {
    pub signal: Signal,
    /// Global step index of each (collapsed) waypoint, ascending.
    pub segment_boundaries: Vec<Step>,
    /// Steps spent holding the final waypoint after the last boundary.
    pub wait_tail_length: Step,
}

const DETOUR_INFLATIONS: [f64; 3] = [1.05, 1.15, 1.30];
const ROUTE_ITERS: usize = 12;

/// Polyline from `from` to `to` clear of all `discs`, staying in `bounds`.
fn route(from: Vec2, to: Vec2, discs: &[Disc], bounds: &Rect) -> Option<Vec<Vec2>> {
    let mut pts = vec![from, to];
    for _ in 0..ROUTE_ITERS {
        let mut blocked = None;
        'scan: for i in 0..pts.len() - 1 {
            for d in discs {
                if point_segment_distance(d.center, pts[i], pts[i + 1]) < d.radius - 1e-9 {
                    blocked = Some((i, *d));
                    break 'scan;
                }
            }
        }
        let (i, d) = match blocked {
            None => return Some(pts),
            Some(b) => b,
        };
        let a = pts[i];
        let b = pts[i + 1];
        let ab = b - a;
        let len2 = ab.dot(ab);
        let t = if len2 > 0.0 {
            ((d.center - a).dot(ab) / len2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let q = a + ab * t;
        let mut n = q - d.center;
        if n.norm() < 1e-9 {
            // line passes through the center; detour perpendicular to it
            n = Vec2::new(-ab.y, ab.x);
        }
        let u = n.normalized();
        let mut placed = false;
        'sides: for side in [u, -u] {
            for infl in DETOUR_INFLATIONS {
                let p = d.center + side * (d.radius * infl);
                let in_bounds = p.x > bounds.min.x + 0.05
                    && p.x < bounds.max.x - 0.05
                    && p.y > bounds.min.y + 0.05
                    && p.y < bounds.max.y - 0.05;
                let clear = discs.iter().all(|o| p.distance(o.center) > o.radius + 1e-6);
                if in_bounds && clear {
                    pts.insert(i + 1, p);
                    placed = true;
                    break 'sides;
                }
            }
        }
        if !placed {
            return None;
        }
    }
    // final scan after the iteration cap
    for i in 0..pts.len() - 1 {
        for d in discs {
            if point_segment_distance(d.center, pts[i], pts[i + 1]) < d.radius - 1e-9 {
                return None;
            }
        }
    }
    Some(pts)
}

fn polyline_length(pts: &[Vec2]) -> f64 {
    pts.windows(2).map(|w| w[0].distance(w[1])).sum()
}

/// Point at arc length `s` along the polyline.
fn polyline_at(pts: &[Vec2], s: f64) -> Vec2 {
    let mut rest = s;
    for w in pts.windows(2) {
        let seg = w[0].distance(w[1]);
        if rest <= seg {
            if seg == 0.0 {
                return w[0];
            }
            return w[0] + (w[1] - w[0]) * (rest / seg);
        }
        rest -= seg;
    }
    *pts.last().unwrap()
}

/// Stitches `waypoints` (ascending steps, first at step 0) into a signal of
/// length `end_time + 1` and verifies every constraint window on it.
pub fn generate_plan(
    env: &Environment,
    dynamics: &DynamicsParams,
    waypoints: &[(Step, Vec2)],
    constraints: &[PointwiseConstraint],
    end_time: Step,
) -> Result<GeneratedSignal, GenError> {
    if waypoints.is_empty() || waypoints[0].0 != 0 {
        return Err(GenError::BadWaypoints);
    }
    // collapse repeated steps; positions at the same step must agree
    let mut path: Vec<(Step, Vec2)> = Vec::with_capacity(waypoints.len());
    for &(t, p) in waypoints {
        match path.last() {
            Some(&(pt, pp)) => {
                if t < pt {
                    return Err(GenError::BadWaypoints);
                }
                if t == pt {
                    if pp.distance(p) > 1e-6 {
                        return Err(GenError::BadWaypoints);
                    }
                    continue;
                }
                path.push((t, p));
            }
            None => path.push((t, p)),
        }
    }
    let last_t = path.last().unwrap().0;
    if end_time < last_t {
        return Err(GenError::BadWaypoints);
    }

    let mut states = vec![Vec2::ZERO; (end_time + 1) as usize];
    states[0] = path[0].1;

    for w in path.windows(2) {
        let (ta, pa) = w[0];
        let (tb, pb) = w[1];

        // dwell windows imposed by invariances that pin one endpoint
        let mut depart = ta;
        let mut arrive = tb;
        for c in constraints {
            if !c.overlaps(ta, tb) || c.window.0 > c.window.1 {
                continue;
            }
            let sat_a = c.predicate.margin(pa) >= 0.0;
            let sat_b = c.predicate.margin(pb) >= 0.0;
            if sat_a && !sat_b && c.window.1 >= ta && c.window.1 < tb {
                depart = depart.max(c.window.1);
            }
            if !sat_a && sat_b && c.window.0 > ta && c.window.0 <= tb {
                arrive = arrive.min(c.window.0);
            }
        }
        if depart > arrive {
            return Err(GenError::InfeasibleSegment { t0: ta, t1: tb });
        }

        // discs the traversal must stay out of
        let mut discs: Vec<Disc> = env.obstacles.clone();
        for c in constraints {
            if !c.overlaps(depart, arrive) || c.window.0 > c.window.1 {
                continue;
            }
            if let Shape::CircleOutside(d) = &c.predicate.shape {
                // endpoints inside the disc are transition states handled by
                // the dwell windows; routing only dodges discs it can
                if c.predicate.margin(pa) >= 0.0 && c.predicate.margin(pb) >= 0.0 {
                    discs.push(*d);
                }
            }
        }
        discs.retain(|d| !d.contains(pa) && !d.contains(pb));

        let pts = match route(pa, pb, &discs, &env.bounds) {
            Some(p) => p,
            None => return Err(GenError::Blocked { t0: ta, t1: tb }),
        };
        let length = polyline_length(&pts);

        // arrive a little early when the slack allows, so a tracking
        // controller settles before any window pinned to the endpoint
        // opens; only if the held endpoint stays legal during the lead-in
        let planned_arrive = arrive;
        for lead in [2 as Step, 1] {
            let cand = planned_arrive - lead;
            if cand <= depart {
                continue;
            }
            if length / (cand - depart) as f64 > 0.6 * dynamics.v_max * dynamics.dt {
                continue;
            }
            let held_ok = constraints.iter().all(|c| {
                c.window.0 > c.window.1
                    || !c.overlaps(cand, planned_arrive - 1)
                    || c.predicate.margin(pb) >= 0.0
            });
            if held_ok {
                arrive = cand;
                break;
            }
        }
        let span = arrive - depart;
        if span == 0 {
            if length > 1e-9 {
                return Err(GenError::InfeasibleSegment { t0: ta, t1: tb });
            }
        } else if length / span as f64 > dynamics.v_max * dynamics.dt + 1e-9 {
            return Err(GenError::InfeasibleSegment { t0: ta, t1: tb });
        }

        for t in ta + 1..=tb {
            states[t as usize] = if t <= depart {
                pa
            } else if t >= arrive {
                pb
            } else {
                polyline_at(&pts, length * (t - depart) as f64 / span as f64)
            };
        }
    }

    // hold the final position through any remaining invariance windows
    let hold = path.last().unwrap().1;
    for t in last_t + 1..=end_time {
        states[t as usize] = hold;
    }

    for c in constraints {
        let lo = c.window.0.max(0);
        let hi = c.window.1.min(end_time);
        for t in lo..=hi {
            if c.predicate.margin(states[t as usize]) < 0.0 {
                return Err(GenError::Violated { source: c.source, t });
            }
        }
    }

    Ok(GeneratedSignal {
        signal: Signal::new(states).expect("states nonempty"),
        segment_boundaries: path.iter().map(|&(t, _)| t).collect(),
        wait_tail_length: end_time - last_t,
    })
}
