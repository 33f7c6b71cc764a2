//! Independent recursive evaluators checked against the tabulated monitor,
//! plus grammar round-trip and disjunct-elimination properties.

mod common;

use proptest::prelude::*;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

use stlplan_core::geom::{Disc, Vec2};
use stlplan_core::stl::dnf::to_dnf;
use stlplan_core::stl::parser::{parse_formula, PredicateTable};
use stlplan_core::stl::semantics::{eval_boolean, eval_robustness};
use stlplan_core::stl::{Formula, Predicate, RobustnessConfig, Shape, Signal, Step, TimeInterval};

/// Direct recursion over the defining quantifiers.
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

#[test]
fn monitor_matches_naive_recursion_bit_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0B5E);
    let cfg = RobustnessConfig::default();
    let mut cases = 0usize;
    while cases < 1040 {
        let f = common::random_formula(&mut rng, 3, true);
        let horizon = f.horizon();
        if horizon > 36 {
            continue;
        }
        for _ in 0..2 {
            let extra = rng.random_range(0..3);
            let s = common::random_signal(&mut rng, (horizon + 1 + extra) as usize);
            let t = rng.random_range(0..=extra);
            let b = eval_boolean(&f, &s, t).unwrap();
            assert_eq!(b, naive_bool(&f, &s, t), "boolean mismatch for {}", f);
            let r = eval_robustness(&f, &s, t, &cfg).unwrap();
            let want = naive_rho(&f, &s, t, &cfg);
            assert_eq!(
                r.to_bits(),
                want.to_bits(),
                "robustness mismatch for {}: {} vs {}",
                f,
                r,
                want
            );
            // strict sign consistency between the two semantics
            if r > 0.0 {
                assert!(b, "positive robustness but unsatisfied: {}", f);
            }
            if r < 0.0 {
                assert!(!b, "negative robustness but satisfied: {}", f);
            }
            cases += 1;
        }
    }
}

#[test]
fn dnf_disjuncts_strengthen_the_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xD9F);
    let mut checked = 0usize;
    while checked < 400 {
        let f = common::random_formula(&mut rng, 3, true);
        if f.horizon() > 30 {
            continue;
        }
        let disjuncts = to_dnf(&f);
        assert!(disjuncts.iter().all(Formula::is_or_free));
        let s = common::random_signal(&mut rng, f.horizon() as usize + 1);
        let any = disjuncts
            .iter()
            .any(|d| eval_boolean(d, &s, 0).unwrap());
        if any {
            assert!(
                eval_boolean(&f, &s, 0).unwrap(),
                "disjunct satisfied but formula falsified: {}",
                f
            );
        }
        checked += 1;
    }
}

fn named_table() -> PredicateTable {
    let mut t = BTreeMap::new();
    for (i, name) in ["p1", "p2", "p3", "p4", "p5"].iter().enumerate() {
        let p = Predicate::new(
            *name,
            Shape::CircleInside(Disc::new(Vec2::new(i as f64, 1.0), 0.8)),
        )
        .unwrap();
        t.insert(name.to_string(), p);
    }
    t
}

fn named_invariance(rng: &mut ChaCha8Rng, table: &PredicateTable, depth: u32) -> Formula {
    if depth == 0 || rng.random_range(0..3) == 0 {
        return named_atom(rng, table);
    }
    match rng.random_range(0..2) {
        0 => Formula::and(
            named_invariance(rng, table, depth - 1),
            named_invariance(rng, table, depth - 1),
        ),
        _ => Formula::always(
            common::random_interval(rng),
            named_invariance(rng, table, depth - 1),
        ),
    }
}

fn named_atom(rng: &mut ChaCha8Rng, table: &PredicateTable) -> Formula {
    let keys: Vec<&String> = table.keys().collect();
    let p = table[keys[rng.random_range(0..keys.len())]].clone();
    if rng.random::<bool>() {
        Formula::Atom(p)
    } else {
        Formula::NegAtom(p)
    }
}

fn named_formula(rng: &mut ChaCha8Rng, table: &PredicateTable, depth: u32) -> Formula {
    if depth == 0 {
        return named_atom(rng, table);
    }
    match rng.random_range(0..13) {
        0 => Formula::True,
        1 | 2 => named_atom(rng, table),
        3 | 4 => Formula::and(
            named_formula(rng, table, depth - 1),
            named_formula(rng, table, depth - 1),
        ),
        5 | 6 => Formula::eventually(
            common::random_interval(rng),
            named_formula(rng, table, depth - 1),
        ),
        7 | 8 => Formula::always(
            common::random_interval(rng),
            named_formula(rng, table, depth - 1),
        ),
        9 | 10 => Formula::until(
            common::random_interval(rng),
            named_invariance(rng, table, depth - 1),
            named_formula(rng, table, depth - 1),
        ),
        _ => Formula::or(
            named_formula(rng, table, depth - 1),
            named_formula(rng, table, depth - 1),
        ),
    }
}

proptest! {
    #[test]
    fn printer_and_parser_round_trip(seed in any::<u64>()) {
        let table = named_table();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = named_formula(&mut rng, &table, 3);
        let printed = f.to_string();
        let reparsed = parse_formula(&printed, &table).unwrap();
        prop_assert_eq!(&f, &reparsed, "printed as `{}`", printed);
    }

    #[test]
    fn widening_eventually_window_never_hurts(seed in any::<u64>()) {
        // F[a,b] is monotone in the window: widening it cannot lower
        // robustness; G is antitone under widening in the same way
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let child = common::random_formula(&mut rng, 1, true);
        let a = rng.random_range(0..=3);
        let b = a + rng.random_range(0..=3);
        let narrow = TimeInterval::new(a, b).unwrap();
        let wide = TimeInterval::new(a, b + 2).unwrap();
        let cfg = RobustnessConfig::default();
        let len = (Formula::eventually(wide, child.clone()).horizon() + 1) as usize;
        let s = common::random_signal(&mut rng, len);
        let f_n = eval_robustness(&Formula::eventually(narrow, child.clone()), &s, 0, &cfg).unwrap();
        let f_w = eval_robustness(&Formula::eventually(wide, child.clone()), &s, 0, &cfg).unwrap();
        prop_assert!(f_w >= f_n);
        let g_n = eval_robustness(&Formula::always(narrow, child.clone()), &s, 0, &cfg).unwrap();
        let g_w = eval_robustness(&Formula::always(wide, child), &s, 0, &cfg).unwrap();
        prop_assert!(g_w <= g_n);
    }
}
