//! The full acceptance gate: nine criteria, one pass/fail line each.
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use stlplan_cli::batch::{run_template, TemplateSummary};
use stlplan_cli::config::Config;
use stlplan_cli::io::default_env_file;
use stlplan_cli::pipeline::{run_pipeline, PlanReport};
use stlplan_cli::templates::instantiate_template;

use stlplan_core::bounds::{AffineConstraint, ConstraintStore, EndpointExpr, Sense};
use stlplan_core::decomp::{check_progresses, decompose, preprocess_split};
use stlplan_core::geom::{Disc, Vec2};
use stlplan_core::stl::semantics::{eval_boolean, eval_robustness};
use stlplan_core::stl::{
    Formula, Predicate, RobustnessConfig, Shape, Signal, Step, TimeInterval,
};

const CAMPAIGN_SEED: u64 = 20_26;

struct Gate {
    failures: Vec<String>,
}

impl Gate {
    fn check(&mut self, criterion: usize, name: &str, ok: bool, detail: String) {
        let verdict = if ok { "PASS" } else { "FAIL" };
        println!("criterion {}: {} — {} ({})", criterion, verdict, name, detail);
        if !ok {
            self.failures.push(format!("criterion {}: {}", criterion, detail));
        }
    }
}

// -- shared random generators ------------------------------------------------

const BOX: f64 = 4.0;

fn random_point(rng: &mut ChaCha8Rng) -> Vec2 {
    Vec2::new(rng.random::<f64>() * BOX, rng.random::<f64>() * BOX)
}

fn random_predicate(rng: &mut ChaCha8Rng) -> Predicate {
    let name = format!("q{}", rng.random_range(0..1000));
    let shape = match rng.random_range(0..3) {
        0 => Shape::CircleInside(Disc::new(random_point(rng), 0.5 + 1.5 * rng.random::<f64>())),
        1 => Shape::CircleOutside(Disc::new(random_point(rng), 0.5 + 1.5 * rng.random::<f64>())),
        _ => {
            let th = rng.random::<f64>() * std::f64::consts::TAU;
            let normal = Vec2::new(th.cos(), th.sin());
            let anchor = random_point(rng);
            Shape::Halfplane {
                normal,
                offset: normal.dot(anchor),
            }
        }
    };
    Predicate::new(name, shape).unwrap()
}

fn random_atom(rng: &mut ChaCha8Rng) -> Formula {
    let p = random_predicate(rng);
    if rng.random::<bool>() {
        Formula::Atom(p)
    } else {
        Formula::NegAtom(p)
    }
}

fn random_interval(rng: &mut ChaCha8Rng) -> TimeInterval {
    let a = rng.random_range(0..=3);
    TimeInterval::new(a, a + rng.random_range(0..=3)).unwrap()
}

fn random_invariance(rng: &mut ChaCha8Rng, depth: u32) -> Formula {
    if depth == 0 || rng.random_range(0..3) == 0 {
        return random_atom(rng);
    }
    match rng.random_range(0..2) {
        0 => Formula::and(
            random_invariance(rng, depth - 1),
            random_invariance(rng, depth - 1),
        ),
        _ => Formula::always(random_interval(rng), random_invariance(rng, depth - 1)),
    }
}

fn random_formula(rng: &mut ChaCha8Rng, depth: u32, allow_or: bool) -> Formula {
    if depth == 0 {
        return random_atom(rng);
    }
    let top = if allow_or { 13 } else { 11 };
    match rng.random_range(0..top) {
        0 => Formula::True,
        1 | 2 => random_atom(rng),
        3 | 4 => Formula::and(
            random_formula(rng, depth - 1, allow_or),
            random_formula(rng, depth - 1, allow_or),
        ),
        5 | 6 => Formula::eventually(random_interval(rng), random_formula(rng, depth - 1, allow_or)),
        7 | 8 => Formula::always(random_interval(rng), random_formula(rng, depth - 1, allow_or)),
        9 | 10 => Formula::until(
            random_interval(rng),
            random_invariance(rng, depth - 1),
            random_formula(rng, depth - 1, allow_or),
        ),
        _ => Formula::or(
            random_formula(rng, depth - 1, allow_or),
            random_formula(rng, depth - 1, allow_or),
        ),
    }
}

fn random_signal(rng: &mut ChaCha8Rng, len: usize) -> Signal {
    Signal::new((0..len.max(1)).map(|_| random_point(rng)).collect()).unwrap()
}

// -- criterion 1 -------------------------------------------------------------

fn delivery_formula() -> Formula {
    let disc = |x: f64, y: f64| Disc::new(Vec2::new(x, y), 0.6);
    let reach = |n: &str, x: f64, y: f64| {
        Formula::Atom(Predicate::new(n, Shape::CircleInside(disc(x, y))).unwrap())
    };
    let avoid = |n: &str, x: f64, y: f64| {
        Formula::NegAtom(Predicate::new(n, Shape::CircleInside(disc(x, y))).unwrap())
    };
    let iv = |a: Step, b: Step| TimeInterval::new(a, b).unwrap();
    let chain = Formula::eventually(
        iv(0, 35),
        Formula::and(
            reach("m1", 1.0, 1.0),
            Formula::eventually(
                iv(35, 45),
                Formula::and(
                    reach("m2", 8.0, 1.0),
                    Formula::eventually(iv(10, 30), reach("m3", 8.0, 8.0)),
                ),
            ),
        ),
    );
    Formula::and(
        Formula::and(chain, Formula::always(iv(0, 110), avoid("m4", 4.0, 4.0))),
        Formula::always(iv(0, 110), avoid("m5", 5.0, 7.0)),
    )
}

fn criterion_1(gate: &mut Gate) {
    let t = Instant::now();
    let split = preprocess_split(&decompose(&delivery_formula()).unwrap());
    let got: Vec<String> = split.progresses.iter().map(|p| p.to_string()).collect();
    let want = vec![
        "R(l1,l1,m1)",
        "R(l1+l2,l1+l2,m2)",
        "R(l1+l2+l3,l1+l2+l3,m3)",
        "R(0,0,!m4)",
        "I(1,110,!m4)",
        "R(0,0,!m5)",
        "I(1,110,!m5)",
    ];
    let bounds_ok = split.bounds == vec![(0, 35), (35, 45), (10, 30)];
    let elapsed = t.elapsed();
    gate.check(
        1,
        "golden delivery decomposition",
        got == want && bounds_ok && elapsed.as_secs_f64() < 1.0,
        format!("progresses {:?}, bounds {:?}, {:?}", got, split.bounds, elapsed),
    );
}

// -- criterion 2 -------------------------------------------------------------

fn criterion_2(gate: &mut Gate) {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC2);
    let mut cases = 0usize;
    let mut mismatches = 0usize;
    let mut tried = 0usize;
    while cases < 520 && tried < 60_000 {
        tried += 1;
        let f = random_formula(&mut rng, 3, false);
        let d = match decompose(&f) {
            Ok(d) => d,
            Err(_) => continue,
        };
        if d.num_vars() > 5 || f.horizon() > 36 {
            continue;
        }
        let volume: u128 = d
            .bounds
            .iter()
            .map(|&(lo, hi)| (hi - lo + 1) as u128)
            .product();
        if volume > 2000 {
            continue;
        }
        let assignments = d.store().enumerate_assignments(2000).unwrap();
        for _ in 0..2 {
            let len = (f.horizon() + 1 + rng.random_range(0..3)) as usize;
            let s = random_signal(&mut rng, len);
            let want = eval_boolean(&f, &s, 0).unwrap();
            let got = assignments
                .iter()
                .any(|a| check_progresses(&d.progresses, a, &s).unwrap());
            if want != got {
                mismatches += 1;
            }
            cases += 1;
        }
    }
    let elapsed = t.elapsed();
    gate.check(
        2,
        "decomposition equivalence oracle",
        cases >= 500 && mismatches == 0 && elapsed.as_secs_f64() < 300.0,
        format!("{} cases, {} mismatches, {:?}", cases, mismatches, elapsed),
    );
}

// -- criterion 3 -------------------------------------------------------------

fn brute_solutions(bounds: &[(i64, i64)], cons: &[AffineConstraint]) -> Vec<Vec<i64>> {
    let n = bounds.len();
    let mut out = Vec::new();
    let mut cur: Vec<i64> = bounds.iter().map(|&(lo, _)| lo).collect();
    if bounds.iter().any(|&(lo, hi)| lo > hi) {
        return out;
    }
    'outer: loop {
        if cons.iter().all(|c| c.holds(&cur)) {
            out.push(cur.clone());
        }
        let mut i = n;
        loop {
            if i == 0 {
                break 'outer;
            }
            i -= 1;
            if cur[i] < bounds[i].1 {
                cur[i] += 1;
                for j in i + 1..n {
                    cur[j] = bounds[j].0;
                }
                break;
            }
        }
    }
    out
}

fn criterion_3(gate: &mut Gate) {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC3);
    let mut bad = 0usize;
    for _ in 0..1000 {
        let n = rng.random_range(1..=4);
        let bounds: Vec<(i64, i64)> = (0..n)
            .map(|_| {
                let lo = rng.random_range(0..=8);
                (lo, lo + rng.random_range(0..=7))
            })
            .collect();
        let m = rng.random_range(0..=6);
        let mut cons = Vec::with_capacity(m);
        for _ in 0..m {
            let mut expr = EndpointExpr::constant(rng.random_range(-3..=3));
            let mut any = false;
            for v in 0..n {
                if rng.random::<bool>() {
                    expr = expr.plus_var(v);
                    any = true;
                }
            }
            if !any {
                expr = expr.plus_var(rng.random_range(0..n));
            }
            let lo: i64 = expr.constant + expr.vars().iter().map(|&v| bounds[v].0).sum::<i64>();
            let hi: i64 = expr.constant + expr.vars().iter().map(|&v| bounds[v].1).sum::<i64>();
            let rhs = rng.random_range(lo - 2..=hi + 2);
            cons.push(if rng.random::<bool>() {
                AffineConstraint::le(expr, rhs)
            } else {
                AffineConstraint::ge(expr, rhs)
            });
        }
        let mut store = ConstraintStore::new(bounds.clone());
        for c in &cons {
            store = store.with_constraint(c.clone()).unwrap();
        }
        let sols = brute_solutions(&bounds, &cons);
        let mut ok = store.is_feasible().unwrap() == !sols.is_empty();
        ok &= store.pick_assignment().unwrap() == sols.first().cloned();
        let obj = {
            let mut e = EndpointExpr::constant(0);
            for v in 0..n {
                if rng.random::<bool>() {
                    e = e.plus_var(v);
                }
            }
            if e.vars().is_empty() {
                e = e.plus_var(0);
            }
            e
        };
        ok &= store.min_value(&obj).unwrap() == sols.iter().map(|a| obj.eval(a)).min();
        ok &= store.max_value(&obj).unwrap() == sols.iter().map(|a| obj.eval(a)).max();
        ok &= store.enumerate_assignments(1_000_000).unwrap() == sols;
        if !ok {
            bad += 1;
        }
    }
    let elapsed = t.elapsed();
    gate.check(
        3,
        "exact solver vs brute force",
        bad == 0 && elapsed.as_secs_f64() < 60.0,
        format!("1000 stores, {} disagreements, {:?}", bad, elapsed),
    );
}

// -- criteria 4, 5, 7, 8 share one campaign ----------------------------------

struct Campaign {
    reports: Vec<Vec<PlanReport>>,
    summaries: Vec<TemplateSummary>,
    lemma2_failures: Vec<String>,
    theorem1_failures: Vec<String>,
    elapsed_seconds: f64,
}

fn run_campaign(n: usize) -> Campaign {
    let base = default_env_file();
    let cfg = Config::default();
    let rcfg = RobustnessConfig::default();
    let t = Instant::now();
    let mut reports = Vec::new();
    let mut summaries = Vec::new();
    let mut lemma2 = Vec::new();
    let mut theorem1 = Vec::new();
    for id in 1..=9u32 {
        let mut rows = Vec::with_capacity(n);
        for ep in 0..n {
            let seed = stlplan_cli::batch::episode_seed(CAMPAIGN_SEED, id, ep);
            let task = instantiate_template(id, &base, seed, &cfg).unwrap();
            let out = run_pipeline(&task.formula, &task.env, task.start, &cfg, seed, id);
            if let (Some(split), Some(alloc)) = (&out.split, &out.allocation) {
                let violations = stlplan_core::allocation::verify_allocation(split, alloc);
                if !violations.is_empty() {
                    lemma2.push(format!("t{} ep{}: {:?}", id, ep, violations));
                }
                if alloc.waypoints.first().map(|w| w.t) != Some(0)
                    || alloc.waypoints.windows(2).any(|w| w[1].t < w[0].t)
                {
                    lemma2.push(format!("t{} ep{}: bad waypoint times", id, ep));
                }
            }
            if let Some(plan) = &out.plan {
                let sat = eval_boolean(&task.formula, &plan.signal, 0).unwrap();
                let rho = eval_robustness(&task.formula, &plan.signal, 0, &rcfg).unwrap();
                if !sat || rho < 0.0 {
                    theorem1.push(format!("t{} ep{}: sat={} rho={}", id, ep, sat, rho));
                }
            }
            rows.push(out.report);
        }
        summaries.push(stlplan_cli::batch::summarize(id, &rows));
        reports.push(rows);
    }
    Campaign {
        reports,
        summaries,
        lemma2_failures: lemma2,
        theorem1_failures: theorem1,
        elapsed_seconds: t.elapsed().as_secs_f64(),
    }
}

fn criterion_4(gate: &mut Gate, c: &Campaign, n: usize) {
    let allocs: usize = c
        .reports
        .iter()
        .flatten()
        .filter(|r| r.allocation_success)
        .count();
    gate.check(
        4,
        "allocation consistency over all templates",
        n >= 50 && c.lemma2_failures.is_empty(),
        format!(
            "{} allocations verified, {} violations {:?}",
            allocs,
            c.lemma2_failures.len(),
            c.lemma2_failures.first()
        ),
    );
}

fn criterion_5(gate: &mut Gate, c: &Campaign) {
    let plans: usize = c
        .reports
        .iter()
        .flatten()
        .filter(|r| r.generation_success)
        .count();
    gate.check(
        5,
        "planned signals satisfy their formulas",
        c.theorem1_failures.is_empty(),
        format!(
            "{} plans monitored, {} violations {:?}",
            plans,
            c.theorem1_failures.len(),
            c.theorem1_failures.first()
        ),
    );
}

fn criterion_7(gate: &mut Gate, c: &Campaign) {
    let mut ok = c.elapsed_seconds < 900.0;
    let mut lines = Vec::new();
    for s in &c.summaries {
        let floor = if matches!(s.template, 1 | 2 | 3 | 8) {
            0.70
        } else {
            0.50
        };
        let sr0_ok = s.sr0 >= floor;
        let sr_ok = s.sr >= s.gen_rate - 0.25;
        ok &= sr0_ok && sr_ok;
        lines.push(format!(
            "t{}: sr0 {:.2} (>= {:.2}) sr {:.2} gen {:.2}",
            s.template, s.sr0, floor, s.sr, s.gen_rate
        ));
    }
    gate.check(
        7,
        "campaign success rates",
        ok,
        format!("{}; {:.1}s total", lines.join(", "), c.elapsed_seconds),
    );
}

fn criterion_8(gate: &mut Gate, c: &Campaign) {
    let worst = c
        .summaries
        .iter()
        .map(|s| s.t0_mean)
        .fold(0.0f64, f64::max);
    gate.check(
        8,
        "mean planning time per template",
        c.summaries.iter().all(|s| s.t0_mean <= 5.0),
        format!("worst mean T0 {:.3}s", worst),
    );
}

// -- criterion 6 -------------------------------------------------------------

fn naive_bool(f: &Formula, s: &Signal, t: Step) -> bool {
    match f {
        Formula::True => true,
        Formula::Atom(p) => p.margin(s.state(t)) >= 0.0,
        Formula::NegAtom(p) => -p.margin(s.state(t)) >= 0.0,
        Formula::And(l, r) => naive_bool(l, s, t) && naive_bool(r, s, t),
        Formula::Or(l, r) => naive_bool(l, s, t) || naive_bool(r, s, t),
        Formula::Eventually(i, c) => (t + i.a..=t + i.b).any(|u| naive_bool(c, s, u)),
        Formula::Always(i, c) => (t + i.a..=t + i.b).all(|u| naive_bool(c, s, u)),
        Formula::Until(i, l, r) => (t + i.a..=t + i.b)
            .any(|u| naive_bool(r, s, u) && (t..=u).all(|tau| naive_bool(l, s, tau))),
    }
}

fn naive_rho(f: &Formula, s: &Signal, t: Step, cfg: &RobustnessConfig) -> f64 {
    match f {
        Formula::True => cfg.rho_max,
        Formula::Atom(p) => p.margin(s.state(t)),
        Formula::NegAtom(p) => -p.margin(s.state(t)),
        Formula::And(l, r) => naive_rho(l, s, t, cfg).min(naive_rho(r, s, t, cfg)),
        Formula::Or(l, r) => naive_rho(l, s, t, cfg).max(naive_rho(r, s, t, cfg)),
        Formula::Eventually(i, c) => (t + i.a..=t + i.b)
            .map(|u| naive_rho(c, s, u, cfg))
            .fold(f64::NEG_INFINITY, f64::max),
        Formula::Always(i, c) => (t + i.a..=t + i.b)
            .map(|u| naive_rho(c, s, u, cfg))
            .fold(f64::INFINITY, f64::min),
        Formula::Until(i, l, r) => {
            let mut best = f64::NEG_INFINITY;
            for u in t + i.a..=t + i.b {
                let mut lmin = f64::INFINITY;
                for tau in t..=u {
                    lmin = lmin.min(naive_rho(l, s, tau, cfg));
                }
                best = best.max(naive_rho(r, s, u, cfg).min(lmin));
            }
            best
        }
    }
}

fn criterion_6(gate: &mut Gate) {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC6);
    let cfg = RobustnessConfig::default();
    let mut cases = 0usize;
    let mut bad = 0usize;
    while cases < 1040 {
        let f = random_formula(&mut rng, 3, true);
        if f.horizon() > 36 {
            continue;
        }
        let extra = rng.random_range(0..3);
        let s = random_signal(&mut rng, (f.horizon() + 1 + extra) as usize);
        let t = rng.random_range(0..=extra);
        let b = eval_boolean(&f, &s, t).unwrap();
        let r = eval_robustness(&f, &s, t, &cfg).unwrap();
        let bit_exact = r.to_bits() == naive_rho(&f, &s, t, &cfg).to_bits();
        let bool_match = b == naive_bool(&f, &s, t);
        let signs = (r <= 0.0 || b) && (r >= 0.0 || !b);
        if !(bit_exact && bool_match && signs) {
            bad += 1;
        }
        cases += 1;
    }
    gate.check(
        6,
        "monitor equals the naive recursion",
        bad == 0,
        format!("{} cases, {} mismatches", cases, bad),
    );
}

// -- criterion 9 -------------------------------------------------------------

fn criterion_9(gate: &mut Gate, first: &Campaign, n: usize) {
    let second = run_campaign(n);
    // wall-clock timings legitimately differ; everything else must not
    let clean = |c: &Campaign| -> Vec<Vec<PlanReport>> {
        c.reports
            .iter()
            .map(|rows| rows.iter().map(|r| r.without_timing()).collect())
            .collect()
    };
    let reports_equal = clean(first) == clean(&second);
    let rates_equal = first
        .summaries
        .iter()
        .zip(&second.summaries)
        .all(|(a, b)| {
            a.sr0 == b.sr0
                && a.gen_rate == b.gen_rate
                && a.sr == b.sr
                && a.planned_nonneg_rate == b.planned_nonneg_rate
        });
    gate.check(
        9,
        "campaign determinism under fixed seeds",
        reports_equal && rates_equal,
        format!("reports equal: {}, rates equal: {}", reports_equal, rates_equal),
    );
}

#[test]
fn acceptance() {
    let mut gate = Gate { failures: Vec::new() };
    criterion_1(&mut gate);
    criterion_2(&mut gate);
    criterion_3(&mut gate);
    let n = 100;
    let campaign = run_campaign(n);
    criterion_4(&mut gate, &campaign, n);
    criterion_5(&mut gate, &campaign);
    criterion_6(&mut gate);
    criterion_7(&mut gate, &campaign);
    criterion_8(&mut gate, &campaign);
    criterion_9(&mut gate, &campaign, n);
    assert!(
        gate.failures.is_empty(),
        "acceptance failures: {:#?}",
        gate.failures
    );
}
