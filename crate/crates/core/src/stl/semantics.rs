//! Boolean and quantitative STL semantics over discrete signals.
//!
//! Both evaluators share a bottom-up table computation: every subformula gets
//! a value for each admissible start time, so nested temporal windows are
//! evaluated once instead of recursively re-expanded. min/max are exact on
//! floats, so the tabulated robustness matches a naive recursive evaluation
//! bit for bit.

use alloc::vec;
use alloc::vec::Vec;

use super::{Formula, FormulaError, Predicate, RobustnessConfig, Signal, Step, TimeInterval};

enum Flat<'a> {
    True,
    Atom(&'a Predicate),
    NegAtom(&'a Predicate),
    And(usize, usize),
    Or(usize, usize),
    Eventually(TimeInterval, usize),
    Always(TimeInterval, usize),
    Until(TimeInterval, usize, usize),
}

/// Post-order flattening; returns the root index.
fn flatten<'a>(f: &'a Formula, out: &mut Vec<(Flat<'a>, Step)>) -> usize {
    let node = match f {
        Formula::True => Flat::True,
        Formula::Atom(p) => Flat::Atom(p),
        Formula::NegAtom(p) => Flat::NegAtom(p),
        Formula::And(l, r) => {
            let li = flatten(l, out);
            let ri = flatten(r, out);
            Flat::And(li, ri)
        }
        Formula::Or(l, r) => {
            let li = flatten(l, out);
            let ri = flatten(r, out);
            Flat::Or(li, ri)
        }
        Formula::Eventually(i, c) => {
            let ci = flatten(c, out);
            Flat::Eventually(*i, ci)
        }
        Formula::Always(i, c) => {
            let ci = flatten(c, out);
            Flat::Always(*i, ci)
        }
        Formula::Until(i, l, r) => {
            let li = flatten(l, out);
            let ri = flatten(r, out);
            Flat::Until(*i, li, ri)
        }
    };
    out.push((node, f.horizon()));
    out.len() - 1
}

fn check_horizon(f: &Formula, s: &Signal, t: Step) -> Result<(), FormulaError> {
    let needed = t + f.horizon();
    if t < 0 || needed > s.end_time() {
        Err(FormulaError::SignalTooShort {
            needed,
            len: s.len(),
        })
    } else {
        Ok(())
    }
}

/// Boolean satisfaction of `f` by the suffix of `s` starting at `t`.
pub fn eval_boolean(f: &Formula, s: &Signal, t: Step) -> Result<bool, FormulaError> {
    check_horizon(f, s, t)?;
    let mut nodes = Vec::new();
    let root = flatten(f, &mut nodes);
    let end = s.end_time();

    // tables[n][u] is defined for u + horizon(n) <= end
    let mut tables: Vec<Vec<bool>> = Vec::with_capacity(nodes.len());
    for (node, h) in &nodes {
        let last = end - h; // inclusive; nonnegative because the root fits
        let mut row = vec![false; (last.max(-1) + 1) as usize];
        match node {
            Flat::True => row.iter_mut().for_each(|v| *v = true),
            Flat::Atom(p) => {
                for (u, v) in row.iter_mut().enumerate() {
                    *v = p.margin(s.state(u as Step)) >= 0.0;
                }
            }
            Flat::NegAtom(p) => {
                for (u, v) in row.iter_mut().enumerate() {
                    *v = -p.margin(s.state(u as Step)) >= 0.0;
                }
            }
            Flat::And(l, r) => {
                for (u, v) in row.iter_mut().enumerate() {
                    *v = tables[*l][u] && tables[*r][u];
                }
            }
            Flat::Or(l, r) => {
                for (u, v) in row.iter_mut().enumerate() {
                    *v = tables[*l][u] || tables[*r][u];
                }
            }
            Flat::Eventually(i, c) => {
                for (u, v) in row.iter_mut().enumerate() {
                    let u = u as Step;
                    *v = (u + i.a..=u + i.b).any(|w| tables[*c][w as usize]);
                }
            }
            Flat::Always(i, c) => {
                for (u, v) in row.iter_mut().enumerate() {
                    let u = u as Step;
                    *v = (u + i.a..=u + i.b).all(|w| tables[*c][w as usize]);
                }
            }
            Flat::Until(i, l, r) => {
                for (u, v) in row.iter_mut().enumerate() {
                    let u = u as Step;
                    let mut ok = false;
                    let mut left_holds = true;
                    for w in u..=u + i.b {
                        left_holds = left_holds && tables[*l][w as usize];
                        if w >= u + i.a && left_holds && tables[*r][w as usize] {
                            ok = true;
                            break;
                        }
                        if !left_holds {
                            break;
                        }
                    }
                    *v = ok;
                }
            }
        }
        tables.push(row);
    }
    Ok(tables[root][t as usize])
}

/// Robustness of `f` on the suffix of `s` starting at `t`.
pub fn eval_robustness(
    f: &Formula,
    s: &Signal,
    t: Step,
    cfg: &RobustnessConfig,
) -> Result<f64, FormulaError> {
    check_horizon(f, s, t)?;
    let mut nodes = Vec::new();
    let root = flatten(f, &mut nodes);
    let end = s.end_time();

    let mut tables: Vec<Vec<f64>> = Vec::with_capacity(nodes.len());
    for (node, h) in &nodes {
        let last = end - h;
        let mut row = vec![0.0f64; (last.max(-1) + 1) as usize];
        match node {
            Flat::True => row.iter_mut().for_each(|v| *v = cfg.rho_max),
            Flat::Atom(p) => {
                for (u, v) in row.iter_mut().enumerate() {
                    *v = p.margin(s.state(u as Step));
                }
            }
            Flat::NegAtom(p) => {
                for (u, v) in row.iter_mut().enumerate() {
                    *v = -p.margin(s.state(u as Step));
                }
            }
            Flat::And(l, r) => {
                for (u, v) in row.iter_mut().enumerate() {
                    *v = tables[*l][u].min(tables[*r][u]);
                }
            }
            Flat::Or(l, r) => {
                for (u, v) in row.iter_mut().enumerate() {
                    *v = tables[*l][u].max(tables[*r][u]);
                }
            }
            Flat::Eventually(i, c) => {
                for (u, v) in row.iter_mut().enumerate() {
                    let u = u as Step;
                    *v = (u + i.a..=u + i.b)
                        .map(|w| tables[*c][w as usize])
                        .fold(f64::NEG_INFINITY, f64::max);
                }
            }
            Flat::Always(i, c) => {
                for (u, v) in row.iter_mut().enumerate() {
                    let u = u as Step;
                    *v = (u + i.a..=u + i.b)
                        .map(|w| tables[*c][w as usize])
                        .fold(f64::INFINITY, f64::min);
                }
            }
            Flat::Until(i, l, r) => {
                for (u, v) in row.iter_mut().enumerate() {
                    let u = u as Step;
                    let mut best = f64::NEG_INFINITY;
                    let mut left_min = f64::INFINITY;
                    for w in u..=u + i.b {
                        left_min = left_min.min(tables[*l][w as usize]);
                        if w >= u + i.a {
                            best = best.max(tables[*r][w as usize].min(left_min));
                        }
                    }
                    *v = best;
                }
            }
        }
        tables.push(row);
    }
    Ok(tables[root][t as usize])
}
