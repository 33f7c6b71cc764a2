//! Randomized benchmark campaigns and their summary statistics.

use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::io::EnvFile;
use crate::pipeline::{run_pipeline, PlanReport};
use crate::templates::instantiate_template;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TemplateSummary {
    pub template: u32,
    pub n: usize,
    /// Allocation success rate.
    pub sr0: f64,
    /// Generation success rate.
    pub gen_rate: f64,
    /// Executed success rate: tracked robustness >= 0.
    pub sr: f64,
    /// Fraction of generation successes with planned robustness >= 0.
    pub planned_nonneg_rate: f64,
    pub t0_mean: f64,
    pub t0_std: f64,
    pub t1_mean: f64,
    pub t1_std: f64,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / xs.len() as f64;
    (mean, var.sqrt())
}

/// Per-episode seed; mixes the campaign seed, template, and index so
/// episodes are independent but reproducible.
pub fn episode_seed(base: u64, template: u32, episode: usize) -> u64 {
    let mut z = base
        ^ (template as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (episode as u64).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z ^= z >> 30;
    z = z.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn run_template(
    id: u32,
    base_env: &EnvFile,
    cfg: &Config,
    campaign_seed: u64,
    n: usize,
) -> (Vec<PlanReport>, TemplateSummary) {
    let mut reports = Vec::with_capacity(n);
    for ep in 0..n {
        let seed = episode_seed(campaign_seed, id, ep);
        match instantiate_template(id, base_env, seed, cfg) {
            Ok(task) => {
                let out = run_pipeline(&task.formula, &task.env, task.start, cfg, seed, id);
                reports.push(out.report);
            }
            Err(e) => reports.push(PlanReport {
                template: id,
                seed,
                allocation_success: false,
                generation_success: false,
                planned_robustness: None,
                executed_robustness: None,
                t0_total_planning_seconds: 0.0,
                t1_generation_seconds: 0.0,
                waypoints: 0,
                notes: format!("instantiation: {}", e),
            }),
        }
    }
    let summary = summarize(id, &reports);
    (reports, summary)
}

pub fn summarize(id: u32, reports: &[PlanReport]) -> TemplateSummary {
    let n = reports.len();
    let frac = |c: usize| if n == 0 { 0.0 } else { c as f64 / n as f64 };
    let alloc = reports.iter().filter(|r| r.allocation_success).count();
    let gen: Vec<&PlanReport> = reports.iter().filter(|r| r.generation_success).collect();
    let exec_ok = reports
        .iter()
        .filter(|r| r.executed_robustness.is_some_and(|x| x >= 0.0))
        .count();
    let planned_ok = gen
        .iter()
        .filter(|r| r.planned_robustness.is_some_and(|x| x >= 0.0))
        .count();
    let t0s: Vec<f64> = reports.iter().map(|r| r.t0_total_planning_seconds).collect();
    let t1s: Vec<f64> = gen.iter().map(|r| r.t1_generation_seconds).collect();
    let (t0_mean, t0_std) = mean_std(&t0s);
    let (t1_mean, t1_std) = mean_std(&t1s);
    TemplateSummary {
        template: id,
        n,
        sr0: frac(alloc),
        gen_rate: frac(gen.len()),
        sr: frac(exec_ok),
        planned_nonneg_rate: if gen.is_empty() {
            1.0
        } else {
            planned_ok as f64 / gen.len() as f64
        },
        t0_mean,
        t0_std,
        t1_mean,
        t1_std,
    }
}

pub fn summary_csv(rows: &[TemplateSummary]) -> String {
    let mut out = String::from(
        "template,n,sr0,gen_rate,sr,planned_nonneg_rate,t0_mean,t0_std,t1_mean,t1_std\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{},{},{:.4},{:.4},{:.4},{:.4},{:.6},{:.6},{:.6},{:.6}\n",
            r.template,
            r.n,
            r.sr0,
            r.gen_rate,
            r.sr,
            r.planned_nonneg_rate,
            r.t0_mean,
            r.t0_std,
            r.t1_mean,
            r.t1_std
        ));
    }
    out
}

pub fn summary_table(rows: &[TemplateSummary]) -> String {
    let mut out = String::new();
    out.push_str("template     n    SR0    gen     SR  rho>=0      T0 (s)          T1 (s)\n");
    for r in rows {
        out.push_str(&format!(
            "{:>8} {:>5} {:>5.1}% {:>5.1}% {:>5.1}% {:>6.1}%  {:>6.3} ± {:>5.3}  {:>6.3} ± {:>5.3}\n",
            r.template,
            r.n,
            100.0 * r.sr0,
            100.0 * r.gen_rate,
            100.0 * r.sr,
            100.0 * r.planned_nonneg_rate,
            r.t0_mean,
            r.t0_std,
            r.t1_mean,
            r.t1_std
        ));
    }
    out
}
