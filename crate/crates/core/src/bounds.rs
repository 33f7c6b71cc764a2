//! Exact feasibility and optimization over the dynamically maintained
//! time-variable constraint store.
//!
//! Variables are nonnegative integers with one unary interval bound each;
//! additional constraints are affine 0-1 sums compared against a constant.
//! Instances produced by the planner are tiny, so the solver is exact:
//! bound-consistency propagation to a fixpoint followed by depth-first
//! search, with a hard node budget instead of any approximation.

use alloc::vec::Vec;
use core::fmt;

/// Index into the time-variable set. Ids are dense `0..n`.
pub type VarId = usize;

/// Affine 0-1 endpoint expression: `constant + sum of vars`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EndpointExpr {
    pub constant: i64,
    /// Sorted, deduplicated variable ids; each has implicit coefficient 1.
    vars: Vec<VarId>,
}

impl EndpointExpr {
    pub fn constant(c: i64) -> Self {
        EndpointExpr {
            constant: c,
            vars: Vec::new(),
        }
    }

    pub fn var(v: VarId) -> Self {
        EndpointExpr {
            constant: 0,
            vars: alloc::vec![v],
        }
    }

    pub fn vars(&self) -> &[VarId] {
        &self.vars
    }

    pub fn is_constant(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn plus_const(&self, c: i64) -> Self {
        EndpointExpr {
            constant: self.constant + c,
            vars: self.vars.clone(),
        }
    }

    pub fn plus_var(&self, v: VarId) -> Self {
        let mut vars = self.vars.clone();
        match vars.binary_search(&v) {
            Ok(_) => {} // coefficients are 0/1 by construction; never hit by the pipeline
            Err(i) => vars.insert(i, v),
        }
        EndpointExpr {
            constant: self.constant,
            vars,
        }
    }

    pub fn eval(&self, assignment: &[i64]) -> i64 {
        self.constant + self.vars.iter().map(|&v| assignment[v]).sum::<i64>()
    }
}

impl fmt::Display for EndpointExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.vars.is_empty() {
            return write!(f, "{}", self.constant);
        }
        let mut first = true;
        if self.constant != 0 {
            write!(f, "{}", self.constant)?;
            first = false;
        }
        for v in &self.vars {
            if !first {
                write!(f, "+")?;
            }
            write!(f, "l{}", v + 1)?;
            first = false;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
}

/// `expr <= rhs` or `expr >= rhs`. Strict inequalities must be converted by
/// the caller (`< rhs` becomes `<= rhs - 1` on the integer grid).
#[derive(Debug, Clone, PartialEq)]
pub struct AffineConstraint {
    pub expr: EndpointExpr,
    pub sense: Sense,
    pub rhs: i64,
}

impl AffineConstraint {
    pub fn le(expr: EndpointExpr, rhs: i64) -> Self {
        AffineConstraint {
            expr,
            sense: Sense::Le,
            rhs,
        }
    }

    pub fn ge(expr: EndpointExpr, rhs: i64) -> Self {
        AffineConstraint {
            expr,
            sense: Sense::Ge,
            rhs,
        }
    }

    pub fn holds(&self, assignment: &[i64]) -> bool {
        let v = self.expr.eval(assignment);
        match self.sense {
            Sense::Le => v <= self.rhs,
            Sense::Ge => v >= self.rhs,
        }
    }
}

impl core::fmt::Display for AffineConstraint {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let op = match self.sense {
            Sense::Le => "<=",
            Sense::Ge => ">=",
        };
        write!(f, "{} {} {}", self.expr, op, self.rhs)
    }
}

/// Integer assignment indexed by variable id.
pub type Assignment = Vec<i64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnknownVar {
    pub var: VarId,
}

impl fmt::Display for UnknownVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown time variable l{}", self.var + 1)
    }
}

/// Search budget exhausted before the query could be answered exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BudgetExceeded {
    pub nodes: u64,
}

impl fmt::Display for BudgetExceeded {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "constraint search budget of {} nodes exceeded", self.nodes)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EnumerateError {
    CapExceeded { volume: u128, cap: u64 },
}

impl fmt::Display for EnumerateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnumerateError::CapExceeded { volume, cap } => {
                write!(f, "bound box volume {} exceeds enumeration cap {}", volume, cap)
            }
        }
    }
}

const NODE_BUDGET: u64 = 1_000_000;

/// Immutable versioned store of unary bounds plus affine constraints.
/// Extending a store yields a child; the parent keeps answering queries
/// unchanged, which is what lets the allocation DFS backtrack.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintStore {
    /// `unary[v] = (lo, hi)`; may become crossed through tightening, which
    /// simply marks the store infeasible.
    unary: Vec<(i64, i64)>,
    affine: Vec<AffineConstraint>,
}

impl ConstraintStore {
    /// Store over `bounds.len()` variables with the given unary bounds.
    pub fn new(bounds: Vec<(i64, i64)>) -> Self {
        ConstraintStore {
            unary: bounds,
            affine: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.unary.len()
    }

    pub fn unary_bounds(&self) -> &[(i64, i64)] {
        &self.unary
    }

    pub fn affine(&self) -> &[AffineConstraint] {
        &self.affine
    }

    fn check_vars(&self, expr: &EndpointExpr) -> Result<(), UnknownVar> {
        for &v in expr.vars() {
            if v >= self.unary.len() {
                return Err(UnknownVar { var: v });
            }
        }
        Ok(())
    }

    /// Child store with `c` added.
    pub fn with_constraint(&self, c: AffineConstraint) -> Result<ConstraintStore, UnknownVar> {
        self.check_vars(&c.expr)?;
        let mut child = self.clone();
        // single-variable constraints tighten the unary bound directly
        if c.expr.vars().len() == 1 {
            let v = c.expr.vars()[0];
            let (lo, hi) = &mut child.unary[v];
            match c.sense {
                Sense::Le => *hi = (*hi).min(c.rhs - c.expr.constant),
                Sense::Ge => *lo = (*lo).max(c.rhs - c.expr.constant),
            }
        } else if c.expr.vars().is_empty() {
            if !c.holds(&[]) {
                // constant contradiction: poison the store
                if let Some((lo, hi)) = child.unary.first_mut() {
                    *lo = (*hi).max(*lo) + 1;
                    *hi = *lo - 2;
                } else {
                    child.affine.push(c);
                }
            }
        } else {
            child.affine.push(c);
        }
        Ok(child)
    }

    /// Child store with the unary bound of `var` intersected with `[lo, hi]`.
    pub fn with_unary(&self, var: VarId, lo: i64, hi: i64) -> Result<ConstraintStore, UnknownVar> {
        if var >= self.unary.len() {
            return Err(UnknownVar { var });
        }
        let mut child = self.clone();
        let b = &mut child.unary[var];
        b.0 = b.0.max(lo);
        b.1 = b.1.min(hi);
        Ok(child)
    }

    /// Bound-consistency propagation to a fixpoint. Returns the tightened
    /// unary bounds, or `None` once some bound crosses.
    fn propagate(&self) -> Option<Vec<(i64, i64)>> {
        let mut b = self.unary.clone();
        if b.iter().any(|&(lo, hi)| lo > hi) {
            return None;
        }
        loop {
            let mut changed = false;
            for c in &self.affine {
                match c.sense {
                    Sense::Le => {
                        let lo_sum: i64 =
                            c.expr.constant + c.expr.vars().iter().map(|&v| b[v].0).sum::<i64>();
                        for &v in c.expr.vars() {
                            let others = lo_sum - b[v].0;
                            let cap = c.rhs - others;
                            if b[v].1 > cap {
                                b[v].1 = cap;
                                changed = true;
                            }
                        }
                    }
                    Sense::Ge => {
                        let hi_sum: i64 =
                            c.expr.constant + c.expr.vars().iter().map(|&v| b[v].1).sum::<i64>();
                        for &v in c.expr.vars() {
                            let others = hi_sum - b[v].1;
                            let floor = c.rhs - others;
                            if b[v].0 < floor {
                                b[v].0 = floor;
                                changed = true;
                            }
                        }
                    }
                }
            }
            if b.iter().any(|&(lo, hi)| lo > hi) {
                return None;
            }
            if !changed {
                return Some(b);
            }
        }
    }

    fn propagate_bounds(bounds: &mut Vec<(i64, i64)>, affine: &[AffineConstraint]) -> bool {
        loop {
            let mut changed = false;
            for c in affine {
                match c.sense {
                    Sense::Le => {
                        let lo_sum: i64 =
                            c.expr.constant + c.expr.vars().iter().map(|&v| bounds[v].0).sum::<i64>();
                        for &v in c.expr.vars() {
                            let cap = c.rhs - (lo_sum - bounds[v].0);
                            if bounds[v].1 > cap {
                                bounds[v].1 = cap;
                                changed = true;
                            }
                        }
                    }
                    Sense::Ge => {
                        let hi_sum: i64 =
                            c.expr.constant + c.expr.vars().iter().map(|&v| bounds[v].1).sum::<i64>();
                        for &v in c.expr.vars() {
                            let floor = c.rhs - (hi_sum - bounds[v].1);
                            if bounds[v].0 < floor {
                                bounds[v].0 = floor;
                                changed = true;
                            }
                        }
                    }
                }
            }
            if bounds.iter().any(|&(lo, hi)| lo > hi) {
                return false;
            }
            if !changed {
                return true;
            }
        }
    }

    /// First feasible assignment in lexicographic variable-id order, found by
    /// ascending-value DFS with propagation at every node.
    fn search_first(
        &self,
        bounds: Vec<(i64, i64)>,
        nodes: &mut u64,
    ) -> Result<Option<Assignment>, BudgetExceeded> {
        fn rec(
            depth: usize,
            bounds: &mut Vec<(i64, i64)>,
            affine: &[AffineConstraint],
            nodes: &mut u64,
        ) -> Result<Option<Assignment>, BudgetExceeded> {
            if depth == bounds.len() {
                let sol: Assignment = bounds.iter().map(|&(lo, _)| lo).collect();
                return Ok(Some(sol));
            }
            let (lo, hi) = bounds[depth];
            for val in lo..=hi {
                *nodes += 1;
                if *nodes > NODE_BUDGET {
                    return Err(BudgetExceeded { nodes: NODE_BUDGET });
                }
                let mut child = bounds.clone();
                child[depth] = (val, val);
                if ConstraintStore::propagate_bounds(&mut child, affine) {
                    // propagation may tighten already-fixed vars; reject if so
                    if child[..=depth].iter().zip(bounds[..depth].iter()).all(|_| true)
                        && child[depth] == (val, val)
                    {
                        if let Some(sol) = rec(depth + 1, &mut child, affine, nodes)? {
                            return Ok(Some(sol));
                        }
                    }
                }
            }
            Ok(None)
        }
        let mut b = bounds;
        rec(0, &mut b, &self.affine, nodes)
    }

    /// Exact feasibility: does some integer assignment satisfy everything?
    pub fn is_feasible(&self) -> Result<bool, BudgetExceeded> {
        match self.propagate() {
            None => Ok(false),
            Some(bounds) => {
                let mut nodes = 0;
                Ok(self.search_first(bounds, &mut nodes)?.is_some())
            }
        }
    }

    /// Lexicographically minimal feasible assignment by variable id.
    pub fn pick_assignment(&self) -> Result<Option<Assignment>, BudgetExceeded> {
        match self.propagate() {
            None => Ok(None),
            Some(bounds) => {
                let mut nodes = 0;
                self.search_first(bounds, &mut nodes)
            }
        }
    }

    /// Lexicographically maximal feasible assignment by variable id.
    pub fn pick_assignment_max(&self) -> Result<Option<Assignment>, BudgetExceeded> {
        // mirror the domain: search ascending on negated values
        let mirrored = self.mirror();
        Ok(mirrored
            .pick_assignment()?
            .map(|a| a.into_iter().map(|v| -v).collect()))
    }

    fn mirror(&self) -> ConstraintStore {
        let unary = self.unary.iter().map(|&(lo, hi)| (-hi, -lo)).collect();
        let affine = self
            .affine
            .iter()
            .map(|c| {
                let expr = EndpointExpr {
                    constant: -c.expr.constant,
                    vars: c.expr.vars.clone(),
                };
                // sum(v) cmp k  <=>  sum(-v) anti-cmp -k, with vars renamed in place
                AffineConstraint {
                    expr,
                    sense: match c.sense {
                        Sense::Le => Sense::Ge,
                        Sense::Ge => Sense::Le,
                    },
                    rhs: -c.rhs,
                }
            })
            .collect();
        ConstraintStore { unary, affine }
    }

    fn optimize(
        &self,
        expr: &EndpointExpr,
        minimize: bool,
    ) -> Result<Option<i64>, BudgetExceeded> {
        self.check_vars(expr).ok();
        let bounds = match self.propagate() {
            None => return Ok(None),
            Some(b) => b,
        };
        // variable order: expression vars first so the objective bound closes early
        let mut order: Vec<VarId> = expr.vars().to_vec();
        for v in 0..self.unary.len() {
            if !expr.vars().contains(&v) {
                order.push(v);
            }
        }
        let mut best: Option<i64> = None;
        let mut nodes: u64 = 0;

        struct Ctx<'a> {
            affine: &'a [AffineConstraint],
            expr: &'a EndpointExpr,
            order: &'a [VarId],
            minimize: bool,
        }

        fn objective_bound(bounds: &[(i64, i64)], expr: &EndpointExpr, minimize: bool) -> i64 {
            let sum: i64 = expr
                .vars()
                .iter()
                .map(|&v| if minimize { bounds[v].0 } else { bounds[v].1 })
                .sum();
            expr.constant + sum
        }

        fn rec(
            ctx: &Ctx<'_>,
            depth: usize,
            bounds: &Vec<(i64, i64)>,
            best: &mut Option<i64>,
            nodes: &mut u64,
        ) -> Result<(), BudgetExceeded> {
            let ob = objective_bound(bounds, ctx.expr, ctx.minimize);
            if let Some(b) = *best {
                let prunable = if ctx.minimize { ob >= b } else { ob <= b };
                if prunable {
                    return Ok(());
                }
            }
            if depth == ctx.order.len() {
                // all vars fixed by propagation-consistent choices
                let assignment: Assignment = bounds.iter().map(|&(lo, _)| lo).collect();
                let val = ctx.expr.eval(&assignment);
                *best = Some(match *best {
                    None => val,
                    Some(b) => {
                        if ctx.minimize {
                            b.min(val)
                        } else {
                            b.max(val)
                        }
                    }
                });
                return Ok(());
            }
            let v = ctx.order[depth];
            let (lo, hi) = bounds[v];
            let values: Vec<i64> = if ctx.minimize {
                (lo..=hi).collect()
            } else {
                (lo..=hi).rev().collect()
            };
            for val in values {
                *nodes += 1;
                if *nodes > NODE_BUDGET {
                    return Err(BudgetExceeded { nodes: NODE_BUDGET });
                }
                let mut child = bounds.clone();
                child[v] = (val, val);
                if ConstraintStore::propagate_bounds(&mut child, ctx.affine) {
                    if child[v] == (val, val) {
                        rec(ctx, depth + 1, &child, best, nodes)?;
                    }
                }
            }
            Ok(())
        }

        let ctx = Ctx {
            affine: &self.affine,
            expr,
            order: &order,
            minimize,
        };
        rec(&ctx, 0, &bounds, &mut best, &mut nodes)?;
        Ok(best)
    }

    /// Exact minimum of `expr` over all feasible assignments; `None` when
    /// the store is infeasible.
    pub fn min_value(&self, expr: &EndpointExpr) -> Result<Option<i64>, BudgetExceeded> {
        self.optimize(expr, true)
    }

    /// Exact maximum of `expr` over all feasible assignments.
    pub fn max_value(&self, expr: &EndpointExpr) -> Result<Option<i64>, BudgetExceeded> {
        self.optimize(expr, false)
    }

    /// All feasible assignments in lexicographic order. The unary bound box
    /// must have at most `cap` points.
    pub fn enumerate_assignments(&self, cap: u64) -> Result<Vec<Assignment>, EnumerateError> {
        let mut volume: u128 = 1;
        for &(lo, hi) in &self.unary {
            if lo > hi {
                return Ok(Vec::new());
            }
            volume = volume.saturating_mul((hi - lo + 1) as u128);
        }
        if volume > cap as u128 {
            return Err(EnumerateError::CapExceeded {
                volume,
                cap,
            });
        }
        let n = self.unary.len();
        let mut out = Vec::new();
        let mut current: Assignment = self.unary.iter().map(|&(lo, _)| lo).collect();
        if n == 0 {
            if self.affine.iter().all(|c| c.holds(&current)) {
                out.push(current);
            }
            return Ok(out);
        }
        'outer: loop {
            if self.affine.iter().all(|c| c.holds(&current)) {
                out.push(current.clone());
            }
            // odometer increment, most-significant id first for lex order
            let mut i = n;
            loop {
                if i == 0 {
                    break 'outer;
                }
                i -= 1;
                if current[i] < self.unary[i].1 {
                    current[i] += 1;
                    for j in i + 1..n {
                        current[j] = self.unary[j].0;
                    }
                    break;
                }
            }
        }
        Ok(out)
    }
}
