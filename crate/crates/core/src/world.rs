//! Workspace geometry and point-robot dynamics.
//!
//! The agent is a planar double integrator with acceleration and speed
//! limits. Plans are position signals on the integer time grid; `track`
//! follows one with a PD controller plus velocity feedforward and returns
//! the executed trajectory for closed-loop monitoring.

use alloc::vec::Vec;

use crate::geom::{Disc, Rect, Vec2};
use crate::stl::Signal;

/// Rectangular arena with circular obstacles.
#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    pub bounds: Rect,
    pub obstacles: Vec<Disc>,
}

impl Environment {
    /// Signed clearance to the nearest obstacle boundary; infinite when
    /// there are no obstacles, negative inside one.
    pub fn obstacle_clearance(&self, p: Vec2) -> f64 {
        self.obstacles
            .iter()
            .map(|d| p.distance(d.center) - d.radius)
            .fold(f64::INFINITY, f64::min)
    }

    /// Inside the arena, at least `margin` away from walls and obstacles.
    pub fn is_free(&self, p: Vec2, margin: f64) -> bool {
        p.x >= self.bounds.min.x + margin
            && p.x <= self.bounds.max.x - margin
            && p.y >= self.bounds.min.y + margin
            && p.y <= self.bounds.max.y - margin
            && self.obstacle_clearance(p) >= margin
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicsParams {
    /// Duration of one planning step.
    pub dt: f64,
    pub a_max: f64,
    pub v_max: f64,
}

impl Default for DynamicsParams {
    fn default() -> Self {
        DynamicsParams {
            dt: 1.0,
            a_max: 0.5,
            v_max: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentState {
    pub pos: Vec2,
    pub vel: Vec2,
}

impl AgentState {
    pub fn at_rest(pos: Vec2) -> Self {
        AgentState {
            pos,
            vel: Vec2::ZERO,
        }
    }
}

/// One Euler step with saturated acceleration and speed. Position advances
/// with the pre-update velocity.
pub fn step_dynamics(s: AgentState, accel: Vec2, dt: f64, p: &DynamicsParams) -> AgentState {
    let a = accel.clamp_norm(p.a_max);
    let pos = s.pos + s.vel * dt;
    let vel = (s.vel + a * dt).clamp_norm(p.v_max);
    AgentState { pos, vel }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackingConfig {
    pub kp: f64,
    pub kd: f64,
    /// Control updates per planning step.
    pub substeps: usize,
}

impl Default for TrackingConfig {
    fn default() -> Self {
        TrackingConfig {
            kp: 1.2,
            kd: 1.8,
            substeps: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackPoint {
    pub pos: Vec2,
    pub vel: Vec2,
    pub acc: Vec2,
}

/// Executed state sequence at control resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub points: Vec<TrackPoint>,
    pub substeps: usize,
}

impl Trajectory {
    /// Positions at planning-step boundaries, for monitoring against the
    /// original formula.
    pub fn executed_signal(&self) -> Signal {
        let states: Vec<Vec2> = self
            .points
            .iter()
            .step_by(self.substeps)
            .map(|p| p.pos)
            .collect();
        Signal::new(states).expect("trajectory is nonempty")
    }
}

/// Follows `plan` from rest at its first state. Targets interpolate the plan
/// within each step; the feedforward velocity is the plan's finite
/// difference.
pub fn track(plan: &Signal, dyn_params: &DynamicsParams, cfg: &TrackingConfig) -> Trajectory {
    let k = cfg.substeps.max(1);
    let sub_dt = dyn_params.dt / k as f64;
    let mut state = AgentState::at_rest(plan.state(0));
    let mut points = Vec::with_capacity((plan.len() - 1) * k + 1);
    points.push(TrackPoint {
        pos: state.pos,
        vel: state.vel,
        acc: Vec2::ZERO,
    });
    for t in 0..plan.len() - 1 {
        let from = plan.state(t as i64);
        let to = plan.state(t as i64 + 1);
        let target_vel = (to - from) * (1.0 / dyn_params.dt);
        for i in 0..k {
            // position advances with the pre-update velocity, so the target
            // is the plan point the state currently corresponds to
            let frac = i as f64 / k as f64;
            let target_pos = from + (to - from) * frac;
            let accel = (target_pos - state.pos) * cfg.kp + (target_vel - state.vel) * cfg.kd;
            let clamped = accel.clamp_norm(dyn_params.a_max);
            state = step_dynamics(state, clamped, sub_dt, dyn_params);
            points.push(TrackPoint {
                pos: state.pos,
                vel: state.vel,
                acc: clamped,
            });
        }
    }
    Trajectory {
        points,
        substeps: k,
    }
}
