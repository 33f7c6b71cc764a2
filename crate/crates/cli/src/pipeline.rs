//! End-to-end driver: normal form, decomposition, allocation, generation,
//! tracking, and monitoring, with per-stage failure capture.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use stlplan_core::allocation::{allocate, plan_inputs, verify_allocation, AllocationResult};
use stlplan_core::decomp::{decompose, preprocess_split, SplitDecomposition};
use stlplan_core::generation::{generate_plan, GeneratedSignal};
use stlplan_core::geom::Vec2;
use stlplan_core::stl::dnf::to_dnf;
use stlplan_core::stl::semantics::{eval_boolean, eval_robustness};
use stlplan_core::stl::{downsample_for_eval, Formula};
use stlplan_core::world::{track, Environment, Trajectory};

use crate::config::Config;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PlanReport {
    pub template: u32,
    pub seed: u64,
    pub allocation_success: bool,
    pub generation_success: bool,
    pub planned_robustness: Option<f64>,
    pub executed_robustness: Option<f64>,
    pub t0_total_planning_seconds: f64,
    pub t1_generation_seconds: f64,
    pub waypoints: usize,
    pub notes: String,
}

impl PlanReport {
    /// Copy with wall-clock fields zeroed, for determinism comparisons.
    pub fn without_timing(&self) -> PlanReport {
        PlanReport {
            t0_total_planning_seconds: 0.0,
            t1_generation_seconds: 0.0,
            ..self.clone()
        }
    }
}

pub struct PipelineOutput {
    pub report: PlanReport,
    pub split: Option<SplitDecomposition>,
    pub allocation: Option<AllocationResult>,
    pub plan: Option<GeneratedSignal>,
    pub trajectory: Option<Trajectory>,
}

fn push_note(notes: &mut String, msg: &str) {
    if !notes.is_empty() {
        notes.push_str("; ");
    }
    notes.push_str(msg);
}

/// Runs the full pipeline. Stage failures end up in the report, never as a
/// panic or error.
pub fn run_pipeline(
    formula: &Formula,
    env: &Environment,
    start: Vec2,
    cfg: &Config,
    seed: u64,
    template: u32,
) -> PipelineOutput {
    let t_start = Instant::now();
    let mut report = PlanReport {
        template,
        seed,
        allocation_success: false,
        generation_success: false,
        planned_robustness: None,
        executed_robustness: None,
        t0_total_planning_seconds: 0.0,
        t1_generation_seconds: 0.0,
        waypoints: 0,
        notes: String::new(),
    };
    let predictor = cfg.predictor();
    let alloc_cfg = cfg.allocation(seed);

    // first disjunct with a feasible allocation wins
    let disjuncts = to_dnf(formula);
    let mut picked: Option<(usize, SplitDecomposition, AllocationResult)> = None;
    for (i, d) in disjuncts.iter().enumerate() {
        let dec = match decompose(d) {
            Ok(dec) => dec,
            Err(e) => {
                push_note(&mut report.notes, &format!("disjunct {}: {}", i, e));
                continue;
            }
        };
        let split = preprocess_split(&dec);
        match allocate(&split, start, env, &predictor, &alloc_cfg) {
            Ok(res) => {
                picked = Some((i, split, res));
                break;
            }
            Err(e) => push_note(&mut report.notes, &format!("disjunct {}: {}", i, e)),
        }
    }
    let (disjunct, split, alloc_res) = match picked {
        Some(p) => p,
        None => {
            report.t0_total_planning_seconds = t_start.elapsed().as_secs_f64();
            return PipelineOutput {
                report,
                split: None,
                allocation: None,
                plan: None,
                trajectory: None,
            };
        }
    };
    report.allocation_success = true;
    report.waypoints = alloc_res.waypoints.len();
    if disjunct > 0 {
        push_note(&mut report.notes, &format!("used disjunct {}", disjunct));
    }
    let violations = verify_allocation(&split, &alloc_res);
    for v in &violations {
        push_note(&mut report.notes, &format!("lemma-2 violation: {}", v));
    }

    let (wps, cons, end_time) = plan_inputs(&split, &alloc_res);
    // the monitor needs the signal to cover the formula horizon
    let end_time = end_time.max(formula.horizon());
    let t_gen = Instant::now();
    let generated = generate_plan(env, &cfg.dynamics(), &wps, &cons, end_time);
    report.t1_generation_seconds = t_gen.elapsed().as_secs_f64();
    let plan = match generated {
        Ok(g) => g,
        Err(e) => {
            push_note(&mut report.notes, &format!("generation: {}", e));
            report.t0_total_planning_seconds = t_start.elapsed().as_secs_f64();
            return PipelineOutput {
                report,
                split: Some(split),
                allocation: Some(alloc_res),
                plan: None,
                trajectory: None,
            };
        }
    };
    report.generation_success = true;
    report.t0_total_planning_seconds = t_start.elapsed().as_secs_f64();

    let rcfg = cfg.robustness();
    match (
        eval_boolean(formula, &plan.signal, 0),
        eval_robustness(formula, &plan.signal, 0, &rcfg),
    ) {
        (Ok(sat), Ok(rho)) => {
            report.planned_robustness = Some(rho);
            if !sat || rho < 0.0 {
                push_note(
                    &mut report.notes,
                    &format!("theorem-1 violation: sat={} rho={}", sat, rho),
                );
            }
        }
        (b, r) => push_note(
            &mut report.notes,
            &format!("monitor failed on plan: {:?} {:?}", b.err(), r.err()),
        ),
    }

    let trajectory = track(&plan.signal, &cfg.dynamics(), &cfg.tracking());
    let executed = trajectory.executed_signal();
    let rho_exec = if cfg.eta == 1 {
        eval_robustness(formula, &executed, 0, &rcfg)
    } else {
        downsample_for_eval(&executed, formula, cfg.eta)
            .and_then(|(s, f)| eval_robustness(&f, &s, 0, &rcfg))
    };
    match rho_exec {
        Ok(rho) => report.executed_robustness = Some(rho),
        Err(e) => push_note(&mut report.notes, &format!("monitor failed on execution: {}", e)),
    }

    PipelineOutput {
        report,
        split: Some(split),
        allocation: Some(alloc_res),
        plan: Some(plan),
        trajectory: Some(trajectory),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use stlplan_core::geom::{Disc, Rect};
    use stlplan_core::stl::{Predicate, Shape, TimeInterval};

    fn env() -> Environment {
        Environment {
            bounds: Rect::new(Vec2::ZERO, Vec2::new(10.0, 10.0)),
            obstacles: vec![Disc::new(Vec2::new(5.0, 5.0), 1.5)],
        }
    }

    fn inside(name: &str, cx: f64, cy: f64, r: f64) -> Formula {
        Formula::Atom(
            Predicate::new(name, Shape::CircleInside(Disc::new(Vec2::new(cx, cy), r))).unwrap(),
        )
    }

    #[test]
    fn simple_reach_runs_end_to_end() {
        let f = Formula::eventually(TimeInterval::new(0, 40).unwrap(), inside("m1", 8.0, 8.0, 0.8));
        let out = run_pipeline(&f, &env(), Vec2::new(1.0, 1.0), &Config::default(), 3, 0);
        assert!(out.report.allocation_success);
        assert!(out.report.generation_success, "notes: {}", out.report.notes);
        assert!(out.report.planned_robustness.unwrap() >= 0.0);
        assert!(out.report.executed_robustness.is_some());
        assert!(!out.report.notes.contains("violation"));
    }

    #[test]
    fn infeasible_deadline_reports_failure() {
        let f = Formula::eventually(TimeInterval::new(0, 2).unwrap(), inside("m1", 9.0, 9.0, 0.5));
        let out = run_pipeline(&f, &env(), Vec2::new(1.0, 1.0), &Config::default(), 3, 0);
        assert!(!out.report.allocation_success);
        assert!(out.plan.is_none());
    }

    #[test]
    fn second_disjunct_rescues_the_task() {
        // first disjunct unreachable in time, second easy
        let f = Formula::or(
            Formula::eventually(TimeInterval::new(0, 2).unwrap(), inside("m1", 9.0, 9.0, 0.5)),
            Formula::eventually(TimeInterval::new(0, 40).unwrap(), inside("m2", 8.0, 1.0, 0.8)),
        );
        let out = run_pipeline(&f, &env(), Vec2::new(1.0, 1.0), &Config::default(), 3, 0);
        assert!(out.report.allocation_success);
        assert!(out.report.notes.contains("used disjunct 1"));
        assert!(out.report.planned_robustness.unwrap() >= 0.0);
    }
}
