//! STL formulas over named planar predicates: representation, normal-form
//! checks, and discrete-time Boolean / quantitative semantics.

pub mod dnf;
pub mod parser;
pub mod semantics;

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::geom::{Disc, Vec2};

/// Discrete time step on the planning grid.
pub type Step = i64;

/// Closed integer time interval `[a, b]` in planning steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TimeInterval {
    pub a: Step,
    pub b: Step,
}

impl TimeInterval {
    /// Fails unless `0 <= a <= b`.
    pub fn new(a: Step, b: Step) -> Result<Self, FormulaError> {
        if a < 0 || a > b {
            Err(FormulaError::BadInterval { a, b })
        } else {
            Ok(TimeInterval { a, b })
        }
    }
}

impl fmt::Display for TimeInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.a, self.b)
    }
}

/// Spatial shape backing an atomic predicate.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    /// True inside the disc; margin `r - |p - c|`.
    CircleInside(Disc),
    /// True outside the disc; margin `|p - c| - r`.
    CircleOutside(Disc),
    /// True on the positive side; margin `n . p - offset`.
    Halfplane { normal: Vec2, offset: f64 },
}

impl Shape {
    pub fn margin(&self, p: Vec2) -> f64 {
        match self {
            Shape::CircleInside(d) => d.radius - p.distance(d.center),
            Shape::CircleOutside(d) => p.distance(d.center) - d.radius,
            Shape::Halfplane { normal, offset } => normal.dot(p) - offset,
        }
    }

    /// The complement region. Exact for all three shapes.
    pub fn complement(&self) -> Shape {
        match self {
            Shape::CircleInside(d) => Shape::CircleOutside(*d),
            Shape::CircleOutside(d) => Shape::CircleInside(*d),
            Shape::Halfplane { normal, offset } => Shape::Halfplane {
                normal: -*normal,
                offset: -*offset,
            },
        }
    }
}

/// Named atomic predicate with an evaluation margin; true at `p` iff
/// `margin(p) >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Predicate {
    pub name: String,
    pub shape: Shape,
    /// Set when this predicate is the complement of the named region, so it
    /// prints as `!name`.
    pub negated: bool,
}

impl Predicate {
    pub fn new(name: impl Into<String>, shape: Shape) -> Result<Self, FormulaError> {
        let name = name.into();
        match &shape {
            Shape::CircleInside(d) | Shape::CircleOutside(d) => {
                if !(d.radius > 0.0) {
                    return Err(FormulaError::BadPredicate { name });
                }
            }
            Shape::Halfplane { normal, .. } => {
                if normal.norm() == 0.0 {
                    return Err(FormulaError::BadPredicate { name });
                }
            }
        }
        Ok(Predicate {
            name,
            shape,
            negated: false,
        })
    }

    pub fn margin(&self, p: Vec2) -> f64 {
        self.shape.margin(p)
    }

    /// Margin-negated predicate over the complement region.
    pub fn negate(&self) -> Predicate {
        Predicate {
            name: self.name.clone(),
            shape: self.shape.complement(),
            negated: !self.negated,
        }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "!{}", self.name)
        } else {
            write!(f, "{}", self.name)
        }
    }
}

/// STL formula in positive normal form. Negation appears only on atoms and is
/// compiled into the predicate margin.
#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    True,
    Atom(Predicate),
    NegAtom(Predicate),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Eventually(TimeInterval, Box<Formula>),
    Always(TimeInterval, Box<Formula>),
    Until(TimeInterval, Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn and(l: Formula, r: Formula) -> Formula {
        Formula::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: Formula, r: Formula) -> Formula {
        Formula::Or(Box::new(l), Box::new(r))
    }

    pub fn eventually(i: TimeInterval, f: Formula) -> Formula {
        Formula::Eventually(i, Box::new(f))
    }

    pub fn always(i: TimeInterval, f: Formula) -> Formula {
        Formula::Always(i, Box::new(f))
    }

    pub fn until(i: TimeInterval, l: Formula, r: Formula) -> Formula {
        Formula::Until(i, Box::new(l), Box::new(r))
    }

    /// Minimal signal length (minus one) so evaluation at t = 0 is defined.
    pub fn horizon(&self) -> Step {
        match self {
            Formula::True | Formula::Atom(_) | Formula::NegAtom(_) => 0,
            Formula::And(l, r) | Formula::Or(l, r) => l.horizon().max(r.horizon()),
            Formula::Eventually(i, f) | Formula::Always(i, f) => i.b + f.horizon(),
            Formula::Until(i, l, r) => i.b + l.horizon().max(r.horizon()),
        }
    }

    /// True when the formula contains no disjunction.
    pub fn is_or_free(&self) -> bool {
        match self {
            Formula::True | Formula::Atom(_) | Formula::NegAtom(_) => true,
            Formula::Or(_, _) => false,
            Formula::And(l, r) => l.is_or_free() && r.is_or_free(),
            Formula::Eventually(_, f) | Formula::Always(_, f) => f.is_or_free(),
            Formula::Until(_, l, r) => l.is_or_free() && r.is_or_free(),
        }
    }

    fn contains_eventually_or_until(&self) -> bool {
        match self {
            Formula::True | Formula::Atom(_) | Formula::NegAtom(_) => false,
            Formula::And(l, r) | Formula::Or(l, r) => {
                l.contains_eventually_or_until() || r.contains_eventually_or_until()
            }
            Formula::Always(_, f) => f.contains_eventually_or_until(),
            Formula::Eventually(_, _) | Formula::Until(_, _, _) => true,
        }
    }

    /// Checks the Prenex restriction: the left side of every `Until` may use
    /// only always / conjunction / disjunction over atoms.
    pub fn validate_pnf(&self) -> Result<(), PnfViolations> {
        let mut offending = Vec::new();
        self.collect_pnf_violations(&mut String::from("root"), &mut offending);
        if offending.is_empty() {
            Ok(())
        } else {
            Err(PnfViolations { paths: offending })
        }
    }

    fn collect_pnf_violations(&self, path: &mut String, out: &mut Vec<String>) {
        match self {
            Formula::True | Formula::Atom(_) | Formula::NegAtom(_) => {}
            Formula::And(l, r) | Formula::Or(l, r) => {
                let base = path.len();
                path.push_str(".left");
                l.collect_pnf_violations(path, out);
                path.truncate(base);
                path.push_str(".right");
                r.collect_pnf_violations(path, out);
                path.truncate(base);
            }
            Formula::Eventually(_, f) | Formula::Always(_, f) => {
                let base = path.len();
                path.push_str(".child");
                f.collect_pnf_violations(path, out);
                path.truncate(base);
            }
            Formula::Until(_, l, r) => {
                if l.contains_eventually_or_until() {
                    out.push(format!("{}.until-left", path));
                }
                let base = path.len();
                path.push_str(".until-left");
                l.collect_pnf_violations(path, out);
                path.truncate(base);
                path.push_str(".until-right");
                r.collect_pnf_violations(path, out);
                path.truncate(base);
            }
        }
    }

    /// Divides every interval endpoint by `eta`; errors on the first endpoint
    /// not divisible by `eta`.
    pub fn scale_down(&self, eta: Step) -> Result<Formula, FormulaError> {
        let div = |i: TimeInterval| -> Result<TimeInterval, FormulaError> {
            if i.a % eta != 0 || i.b % eta != 0 {
                Err(FormulaError::NotDivisible { a: i.a, b: i.b, eta })
            } else {
                Ok(TimeInterval {
                    a: i.a / eta,
                    b: i.b / eta,
                })
            }
        };
        Ok(match self {
            Formula::True => Formula::True,
            Formula::Atom(p) => Formula::Atom(p.clone()),
            Formula::NegAtom(p) => Formula::NegAtom(p.clone()),
            Formula::And(l, r) => Formula::and(l.scale_down(eta)?, r.scale_down(eta)?),
            Formula::Or(l, r) => Formula::or(l.scale_down(eta)?, r.scale_down(eta)?),
            Formula::Eventually(i, f) => Formula::eventually(div(*i)?, f.scale_down(eta)?),
            Formula::Always(i, f) => Formula::always(div(*i)?, f.scale_down(eta)?),
            Formula::Until(i, l, r) => {
                Formula::until(div(*i)?, l.scale_down(eta)?, r.scale_down(eta)?)
            }
        })
    }
}

/// Discrete signal: a nonempty state sequence on the planning time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    states: Vec<Vec2>,
}

impl Signal {
    pub fn new(states: Vec<Vec2>) -> Result<Self, FormulaError> {
        if states.is_empty() {
            Err(FormulaError::EmptySignal)
        } else {
            Ok(Signal { states })
        }
    }

    pub fn states(&self) -> &[Vec2] {
        &self.states
    }

    pub fn state(&self, t: Step) -> Vec2 {
        self.states[t as usize]
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Last valid time index.
    pub fn end_time(&self) -> Step {
        self.states.len() as Step - 1
    }

    /// Keeps indices `0, eta, 2*eta, ...`.
    pub fn downsample(&self, eta: Step) -> Signal {
        let states = self
            .states
            .iter()
            .step_by(eta as usize)
            .copied()
            .collect();
        Signal { states }
    }
}

/// Downsampled evaluation pair: signal thinned by `eta` and formula with all
/// interval endpoints divided by `eta`.
pub fn downsample_for_eval(
    s: &Signal,
    f: &Formula,
    eta: Step,
) -> Result<(Signal, Formula), FormulaError> {
    if eta < 1 {
        return Err(FormulaError::BadEta { eta });
    }
    let scaled = f.scale_down(eta)?;
    Ok((s.downsample(eta), scaled))
}

/// Configuration for quantitative semantics.
#[derive(Debug, Clone, Copy)]
pub struct RobustnessConfig {
    /// Robustness assigned to the true predicate; any positive value.
    pub rho_max: f64,
}

impl Default for RobustnessConfig {
    fn default() -> Self {
        RobustnessConfig { rho_max: 10.0 }
    }
}

/// Errors from formula and signal construction.
#[derive(Debug, Clone, PartialEq)]
pub enum FormulaError {
    BadInterval { a: Step, b: Step },
    BadPredicate { name: String },
    EmptySignal,
    BadEta { eta: Step },
    NotDivisible { a: Step, b: Step, eta: Step },
    /// Signal too short for the requested evaluation.
    SignalTooShort { needed: Step, len: usize },
}

impl fmt::Display for FormulaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormulaError::BadInterval { a, b } => {
                write!(f, "invalid interval [{},{}]: need 0 <= a <= b", a, b)
            }
            FormulaError::BadPredicate { name } => write!(f, "invalid predicate shape for {}", name),
            FormulaError::EmptySignal => write!(f, "signal must be nonempty"),
            FormulaError::BadEta { eta } => write!(f, "sampling factor must be >= 1, got {}", eta),
            FormulaError::NotDivisible { a, b, eta } => {
                write!(f, "interval [{},{}] has endpoint not divisible by {}", a, b, eta)
            }
            FormulaError::SignalTooShort { needed, len } => write!(
                f,
                "signal of length {} too short: evaluation needs index {}",
                len, needed
            ),
        }
    }
}

/// Positions of subtrees violating the Prenex restriction.
#[derive(Debug, Clone, PartialEq)]
pub struct PnfViolations {
    pub paths: Vec<String>,
}

impl fmt::Display for PnfViolations {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PNF violations at: {}", self.paths.join(", "))
    }
}
