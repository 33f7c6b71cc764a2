//! Decomposition of disjunction-free formulas into timed progresses.
//!
//! A progress is a single spatial requirement over a time window whose
//! endpoints are affine 0-1 expressions in integer time variables:
//! a reach `R(e, e, mu)` asks for one visit, an invariance `I(e1, e2, mu)`
//! asks that `mu` hold over the whole window. For disjunction-free formulas
//! in prenex form the rewrite is an equivalence: the formula holds on a
//! signal iff some assignment of the time variables (within their bounds)
//! makes every progress hold.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::bounds::{ConstraintStore, EndpointExpr, VarId};
use crate::stl::{Formula, FormulaError, Predicate, Signal, Step};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProgressKind {
    Reach,
    Invar,
}

/// One timed requirement. Reaches always have identical endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct Progress {
    /// Index within the owning decomposition.
    pub id: usize,
    pub kind: ProgressKind,
    pub a: EndpointExpr,
    pub b: EndpointExpr,
    pub predicate: Predicate,
}

impl Progress {
    fn shift_const(&self, c: Step) -> Progress {
        Progress {
            a: self.a.plus_const(c),
            b: self.b.plus_const(c),
            ..self.clone()
        }
    }

    fn shift_var(&self, v: VarId) -> Progress {
        Progress {
            a: self.a.plus_var(v),
            b: self.b.plus_var(v),
            ..self.clone()
        }
    }

    fn renumber(&self, offset: usize) -> Progress {
        let re = |e: &EndpointExpr| {
            let mut out = EndpointExpr::constant(e.constant);
            for &v in e.vars() {
                out = out.plus_var(v + offset);
            }
            out
        };
        Progress {
            a: re(&self.a),
            b: re(&self.b),
            ..self.clone()
        }
    }

    /// Window instantiated by an assignment.
    pub fn window(&self, assignment: &[i64]) -> (Step, Step) {
        (self.a.eval(assignment), self.b.eval(assignment))
    }
}

impl fmt::Display for Progress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = match self.kind {
            ProgressKind::Reach => 'R',
            ProgressKind::Invar => 'I',
        };
        write!(f, "{}({},{},{})", k, self.a, self.b, self.predicate)
    }
}

/// Progress set plus unary bounds of the time variables, ids `0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub progresses: Vec<Progress>,
    pub bounds: Vec<(Step, Step)>,
}

impl Decomposition {
    pub fn num_vars(&self) -> usize {
        self.bounds.len()
    }

    /// Fresh constraint store holding exactly the unary bounds.
    pub fn store(&self) -> ConstraintStore {
        ConstraintStore::new(self.bounds.clone())
    }
}

/// Head/residual indices (into the split progress list) produced by
/// splitting one invariance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitPair {
    pub head: usize,
    pub residual: usize,
}

/// Decomposition after the allocation preprocessing step: every invariance
/// `I(a, b, mu)` is replaced by a reach head `R(a, a, mu)` plus a residual
/// invariance `I(a+1, b, mu)`, so the search only schedules reaches and the
/// residual start becomes determined once the head is placed.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitDecomposition {
    pub progresses: Vec<Progress>,
    pub bounds: Vec<(Step, Step)>,
    pub pairs: Vec<SplitPair>,
    /// For each split progress, the id of the progress it came from.
    pub source: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DecompError {
    /// Input contains a disjunction; run disjunct elimination first.
    NotOrFree,
    /// The left side of an `Until` contains an eventuality.
    PrenexViolation,
    /// Expansion would introduce more time variables than supported.
    TooManyVars { count: usize, cap: usize },
}

impl fmt::Display for DecompError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecompError::NotOrFree => write!(f, "formula must be disjunction-free"),
            DecompError::PrenexViolation => {
                write!(f, "left side of until must be free of eventualities")
            }
            DecompError::TooManyVars { count, cap } => {
                write!(f, "decomposition needs {} time variables, cap is {}", count, cap)
            }
        }
    }
}

/// Hard cap on time variables; expansion of an eventuality under a wide
/// always-window is the only way to approach it.
pub const VAR_CAP: usize = 64;

struct Local {
    progresses: Vec<Progress>,
    bounds: Vec<(Step, Step)>,
}

fn concat(mut l: Local, r: Local) -> Local {
    let offset = l.bounds.len();
    l.progresses
        .extend(r.progresses.iter().map(|p| p.renumber(offset)));
    l.bounds.extend(r.bounds);
    l
}

fn shift_all(mut d: Local, c: Step) -> Local {
    if c != 0 {
        for p in &mut d.progresses {
            *p = p.shift_const(c);
        }
    }
    d
}

/// Prefix a fresh variable with bounds `[a, b]` and add it to every endpoint.
fn under_fresh_var(d: Local, a: Step, b: Step) -> Local {
    let mut bounds = vec![(a, b)];
    bounds.extend(d.bounds);
    let progresses = d
        .progresses
        .iter()
        .map(|p| p.renumber(1).shift_var(0))
        .collect();
    Local { progresses, bounds }
}

fn rec(f: &Formula) -> Result<Local, DecompError> {
    Ok(match f {
        Formula::True => Local {
            progresses: Vec::new(),
            bounds: Vec::new(),
        },
        Formula::Atom(p) => atom(p.clone()),
        Formula::NegAtom(p) => atom(p.negate()),
        Formula::Or(_, _) => return Err(DecompError::NotOrFree),
        Formula::And(l, r) => concat(rec(l)?, rec(r)?),
        Formula::Eventually(i, c) => {
            let child = rec(c)?;
            if i.a == i.b {
                shift_all(child, i.a)
            } else {
                check_cap(child.bounds.len() + 1)?;
                under_fresh_var(child, i.a, i.b)
            }
        }
        Formula::Always(i, c) => {
            let child = rec(c)?;
            if i.a == i.b {
                shift_all(child, i.a)
            } else if child.bounds.is_empty() {
                // constant windows under an always merge: holding [c,d] from
                // every start in [a,b] is exactly holding [c+a, d+b]
                let progresses = child
                    .progresses
                    .iter()
                    .map(|p| Progress {
                        kind: ProgressKind::Invar,
                        a: p.a.plus_const(i.a),
                        b: p.b.plus_const(i.b),
                        ..p.clone()
                    })
                    .collect();
                Local {
                    progresses,
                    bounds: Vec::new(),
                }
            } else {
                // eventualities inside: one independent copy per start offset
                let copies = (i.b - i.a + 1) as usize;
                check_cap(child.bounds.len() * copies)?;
                let mut out = Local {
                    progresses: Vec::new(),
                    bounds: Vec::new(),
                };
                for k in i.a..=i.b {
                    let copy = Local {
                        progresses: child
                            .progresses
                            .iter()
                            .map(|p| p.shift_const(k))
                            .collect(),
                        bounds: child.bounds.clone(),
                    };
                    out = concat(out, copy);
                }
                out
            }
        }
        Formula::Until(i, l, r) => {
            let left = rec(l)?;
            if !left.bounds.is_empty() {
                return Err(DecompError::PrenexViolation);
            }
            let right = rec(r)?;
            if i.a == i.b {
                // fixed switch time: prolong left windows to it, shift right
                let lam = i.a;
                let mut out = Local {
                    progresses: left
                        .progresses
                        .iter()
                        .map(|p| prolong(p, &EndpointExpr::constant(lam)))
                        .collect(),
                    bounds: Vec::new(),
                };
                out = concat(out, shift_all(right, lam));
                out
            } else {
                check_cap(right.bounds.len() + 1)?;
                // variable 0 is the switch time
                let mut out = Local {
                    progresses: left
                        .progresses
                        .iter()
                        .map(|p| prolong(p, &EndpointExpr::var(0)))
                        .collect(),
                    bounds: vec![(i.a, i.b)],
                };
                let right = Local {
                    progresses: right
                        .progresses
                        .iter()
                        .map(|p| p.renumber(1).shift_var(0))
                        .collect(),
                    bounds: right.bounds,
                };
                out.progresses.extend(right.progresses);
                out.bounds.extend(right.bounds);
                out
            }
        }
    })
}

fn atom(p: Predicate) -> Local {
    Local {
        progresses: vec![Progress {
            id: 0,
            kind: ProgressKind::Reach,
            a: EndpointExpr::constant(0),
            b: EndpointExpr::constant(0),
            predicate: p,
        }],
        bounds: Vec::new(),
    }
}

/// Left side of an until must hold at every step up to the switch time;
/// a window `[c, d]` required from every start in `[0, lam]` is `[c, d+lam]`.
fn prolong(p: &Progress, lam: &EndpointExpr) -> Progress {
    let b = lam.plus_const(p.b.constant);
    if b == p.a {
        return p.clone();
    }
    Progress {
        kind: ProgressKind::Invar,
        a: p.a.clone(),
        b,
        ..p.clone()
    }
}

fn check_cap(count: usize) -> Result<(), DecompError> {
    if count > VAR_CAP {
        Err(DecompError::TooManyVars {
            count,
            cap: VAR_CAP,
        })
    } else {
        Ok(())
    }
}

/// Decomposes a disjunction-free prenex formula into progresses.
pub fn decompose(f: &Formula) -> Result<Decomposition, DecompError> {
    if !f.is_or_free() {
        return Err(DecompError::NotOrFree);
    }
    if f.validate_pnf().is_err() {
        return Err(DecompError::PrenexViolation);
    }
    let mut local = rec(f)?;
    for (i, p) in local.progresses.iter_mut().enumerate() {
        p.id = i;
    }
    Ok(Decomposition {
        progresses: local.progresses,
        bounds: local.bounds,
    })
}

/// Splits every invariance into a reach head plus a residual invariance.
/// Point invariances keep only the head; the pair list links the rest.
pub fn preprocess_split(d: &Decomposition) -> SplitDecomposition {
    let mut progresses = Vec::new();
    let mut pairs = Vec::new();
    let mut source = Vec::new();
    for p in &d.progresses {
        match p.kind {
            ProgressKind::Reach => {
                let id = progresses.len();
                progresses.push(Progress { id, ..p.clone() });
                source.push(p.id);
            }
            ProgressKind::Invar => {
                let head_id = progresses.len();
                progresses.push(Progress {
                    id: head_id,
                    kind: ProgressKind::Reach,
                    a: p.a.clone(),
                    b: p.a.clone(),
                    predicate: p.predicate.clone(),
                });
                source.push(p.id);
                if p.a != p.b {
                    let res_id = progresses.len();
                    progresses.push(Progress {
                        id: res_id,
                        kind: ProgressKind::Invar,
                        a: p.a.plus_const(1),
                        b: p.b.clone(),
                        predicate: p.predicate.clone(),
                    });
                    source.push(p.id);
                    pairs.push(SplitPair {
                        head: head_id,
                        residual: res_id,
                    });
                }
            }
        }
    }
    SplitDecomposition {
        progresses,
        bounds: d.bounds.clone(),
        pairs,
        source,
    }
}

/// Do all progresses hold on `signal` under `assignment`? A reach needs one
/// satisfying step in its window, an invariance needs all of them; an empty
/// window is vacuously satisfied.
pub fn check_progresses(
    progresses: &[Progress],
    assignment: &[i64],
    signal: &Signal,
) -> Result<bool, FormulaError> {
    for p in progresses {
        let (lo, hi) = p.window(assignment);
        if lo > hi {
            continue;
        }
        if lo < 0 || hi > signal.end_time() {
            return Err(FormulaError::SignalTooShort {
                needed: hi,
                len: signal.len(),
            });
        }
        let ok = match p.kind {
            ProgressKind::Reach => (lo..=hi).any(|t| p.predicate.margin(signal.state(t)) >= 0.0),
            ProgressKind::Invar => (lo..=hi).all(|t| p.predicate.margin(signal.state(t)) >= 0.0),
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}
