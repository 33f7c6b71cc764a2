//! Disjunction elimination.
//!
//! Rewrites disjunctions outward until every disjunct is Or-free, then
//! returns the list of disjuncts. Pushing `|` out of `G` and out of both
//! sides of `U` strengthens the formula: satisfying any returned disjunct
//! implies satisfying the original, but not conversely.

use alloc::vec;
use alloc::vec::Vec;

use super::Formula;

/// List of Or-free disjuncts whose disjunction implies `f`.
pub fn to_dnf(f: &Formula) -> Vec<Formula> {
    match f {
        Formula::True | Formula::Atom(_) | Formula::NegAtom(_) => vec![f.clone()],
        Formula::Or(l, r) => {
            let mut out = to_dnf(l);
            out.extend(to_dnf(r));
            out
        }
        Formula::And(l, r) => {
            let ls = to_dnf(l);
            let rs = to_dnf(r);
            let mut out = Vec::with_capacity(ls.len() * rs.len());
            for li in &ls {
                for ri in &rs {
                    out.push(Formula::and(li.clone(), ri.clone()));
                }
            }
            out
        }
        Formula::Eventually(i, c) => to_dnf(c)
            .into_iter()
            .map(|d| Formula::eventually(*i, d))
            .collect(),
        Formula::Always(i, c) => to_dnf(c)
            .into_iter()
            .map(|d| Formula::always(*i, d))
            .collect(),
        Formula::Until(i, l, r) => {
            let ls = to_dnf(l);
            let rs = to_dnf(r);
            let mut out = Vec::with_capacity(ls.len() * rs.len());
            for li in &ls {
                for ri in &rs {
                    out.push(Formula::until(*i, li.clone(), ri.clone()));
                }
            }
            out
        }
    }
}
