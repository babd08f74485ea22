//! Exact branch-and-bound solver for bounded-integer/boolean models.
//!
//! Models hold integer variables with finite domains, boolean variables
//! (0/1 integers that may also appear in clauses), linear constraints,
//! clauses, forced literals and a linear objective to minimize. The search
//! is a depth-first branch-and-bound with bounds propagation on linear rows,
//! watched-literal unit propagation on clauses and incumbent pruning through
//! the objective row.
//!
//! All arithmetic is exact and generic over the coefficient type `C`.

mod check;
mod dump;
mod search;

use std::fmt;
use std::hash::Hash;
use std::time::Duration;

use num_traits::{PrimInt, Signed};
use serde::Serialize;
use thiserror::Error;

pub use check::verify_solution;
pub use dump::dump_model;
pub use search::{solve, solve_with_hint};

/// Exact integer coefficient type usable by the solver.
pub trait Coeff: PrimInt + Signed + Hash + fmt::Debug + fmt::Display + Send + Sync + 'static {}

impl<T> Coeff for T where T: PrimInt + Signed + Hash + fmt::Debug + fmt::Display + Send + Sync + 'static {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct VarId(pub usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum VarKind {
    Int,
    Bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarDecl<C> {
    pub name: String,
    pub kind: VarKind,
    pub lower: C,
    pub upper: C,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub var: VarId,
    pub positive: bool,
}

impl Literal {
    pub fn pos(var: VarId) -> Self {
        Literal { var, positive: true }
    }

    pub fn neg(var: VarId) -> Self {
        Literal { var, positive: false }
    }

    pub fn negate(self) -> Self {
        Literal {
            var: self.var,
            positive: !self.positive,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Ge,
    Eq,
}

impl fmt::Display for Cmp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Cmp::Le => "<=",
            Cmp::Ge => ">=",
            Cmp::Eq => "=",
        })
    }
}

/// `Σ coeff·var ⋈ bound`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearConstraint<C> {
    pub terms: Vec<(C, VarId)>,
    pub cmp: Cmp,
    pub bound: C,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("variable '{0}' has an empty domain")]
    EmptyDomain(String),
    #[error("reference to undeclared variable {0}")]
    UnknownVar(usize),
    #[error("clause literal on non-boolean variable '{0}'")]
    NonBoolLiteral(String),
    #[error("constraint {0} may overflow the coefficient type")]
    Overflow(usize),
    #[error("assignment is missing variable {0}")]
    MissingVariable(usize),
}

/// A bounded-integer + boolean model with a linear objective to minimize.
///
/// Variables are numbered in declaration order; the search branches in that
/// same order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintModel<C> {
    vars: Vec<VarDecl<C>>,
    constraints: Vec<LinearConstraint<C>>,
    clauses: Vec<Vec<Literal>>,
    forced: Vec<Literal>,
    objective: Vec<(C, VarId)>,
}

impl<C: Coeff> Default for ConstraintModel<C> {
    fn default() -> Self {
        Self::new()
    }
}

impl<C: Coeff> ConstraintModel<C> {
    pub fn new() -> Self {
        ConstraintModel {
            vars: Vec::new(),
            constraints: Vec::new(),
            clauses: Vec::new(),
            forced: Vec::new(),
            objective: Vec::new(),
        }
    }

    pub fn new_int(&mut self, name: impl Into<String>, lower: C, upper: C) -> VarId {
        self.vars.push(VarDecl {
            name: name.into(),
            kind: VarKind::Int,
            lower,
            upper,
        });
        VarId(self.vars.len() - 1)
    }

    pub fn new_bool(&mut self, name: impl Into<String>) -> VarId {
        self.vars.push(VarDecl {
            name: name.into(),
            kind: VarKind::Bool,
            lower: C::zero(),
            upper: C::one(),
        });
        VarId(self.vars.len() - 1)
    }

    pub fn add_linear(&mut self, terms: Vec<(C, VarId)>, cmp: Cmp, bound: C) {
        self.constraints.push(LinearConstraint { terms, cmp, bound });
    }

    /// `Σ terms <= bound`
    pub fn add_le(&mut self, terms: Vec<(C, VarId)>, bound: C) {
        self.add_linear(terms, Cmp::Le, bound);
    }

    /// `Σ terms >= bound`
    pub fn add_ge(&mut self, terms: Vec<(C, VarId)>, bound: C) {
        self.add_linear(terms, Cmp::Ge, bound);
    }

    pub fn add_eq(&mut self, terms: Vec<(C, VarId)>, bound: C) {
        self.add_linear(terms, Cmp::Eq, bound);
    }

    pub fn add_clause(&mut self, literals: Vec<Literal>) {
        self.clauses.push(literals);
    }

    pub fn force(&mut self, literal: Literal) {
        self.forced.push(literal);
    }

    pub fn minimize(&mut self, terms: Vec<(C, VarId)>) {
        self.objective = terms;
    }

    pub fn vars(&self) -> &[VarDecl<C>] {
        &self.vars
    }

    pub fn var(&self, id: VarId) -> &VarDecl<C> {
        &self.vars[id.0]
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn int_vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.vars
            .iter()
            .enumerate()
            .filter(|(_, v)| v.kind == VarKind::Int)
            .map(|(i, _)| VarId(i))
    }

    pub fn bool_vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.vars
            .iter()
            .enumerate()
            .filter(|(_, v)| v.kind == VarKind::Bool)
            .map(|(i, _)| VarId(i))
    }

    pub fn constraints(&self) -> &[LinearConstraint<C>] {
        &self.constraints
    }

    pub fn clauses(&self) -> &[Vec<Literal>] {
        &self.clauses
    }

    pub fn forced_literals(&self) -> &[Literal] {
        &self.forced
    }

    pub fn objective(&self) -> &[(C, VarId)] {
        &self.objective
    }

    /// Evaluates the objective on a full assignment.
    pub fn objective_value(&self, values: &[C]) -> C {
        self.objective
            .iter()
            .fold(C::zero(), |acc, &(c, v)| acc + c * values[v.0])
    }

    /// Checks well-formedness: non-empty domains, declared references,
    /// boolean-only clauses and that no row activity can overflow `C`.
    pub fn check(&self) -> Result<(), ModelError> {
        for v in &self.vars {
            if v.lower > v.upper {
                return Err(ModelError::EmptyDomain(v.name.clone()));
            }
        }
        let n = self.vars.len();
        let lits = self
            .clauses
            .iter()
            .flatten()
            .chain(self.forced.iter());
        for lit in lits {
            if lit.var.0 >= n {
                return Err(ModelError::UnknownVar(lit.var.0));
            }
            if self.vars[lit.var.0].kind != VarKind::Bool {
                return Err(ModelError::NonBoolLiteral(self.vars[lit.var.0].name.clone()));
            }
        }
        let rows = self
            .constraints
            .iter()
            .map(|c| (&c.terms, c.bound))
            .chain(std::iter::once((&self.objective, C::zero())));
        for (i, (terms, bound)) in rows.enumerate() {
            // Σ |a|·max(|lb|,|ub|) + |bound| must fit, with headroom for
            // the slack computations done during propagation.
            let mut total = bound.abs();
            for &(a, v) in terms {
                if v.0 >= n {
                    return Err(ModelError::UnknownVar(v.0));
                }
                let d = &self.vars[v.0];
                let mag = d.lower.abs().max(d.upper.abs()).max(d.upper - d.lower);
                total = a
                    .abs()
                    .checked_mul(&mag)
                    .and_then(|t| total.checked_add(&t))
                    .ok_or(ModelError::Overflow(i))?;
            }
            total
                .checked_add(&total)
                .and_then(|t| t.checked_add(&total))
                .ok_or(ModelError::Overflow(i))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    Feasible,
    Infeasible,
    TimeoutNoSolution,
}

impl SolveStatus {
    pub fn has_solution(self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::Feasible)
    }

    pub fn name(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Feasible => "feasible",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::TimeoutNoSolution => "timeout-no-solution",
        }
    }

    /// Orders statuses from best to worst, for aggregating many solves.
    pub fn severity(self) -> u8 {
        match self {
            SolveStatus::Optimal => 0,
            SolveStatus::Feasible => 1,
            SolveStatus::TimeoutNoSolution => 2,
            SolveStatus::Infeasible => 3,
        }
    }

    pub fn worst(self, other: SolveStatus) -> SolveStatus {
        if other.severity() > self.severity() {
            other
        } else {
            self
        }
    }
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Search limits. Wall-clock limits make the returned incumbent depend on
/// machine speed; reproducible runs should bound the search by nodes only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SolverBudget {
    pub time_limit: Option<Duration>,
    pub node_limit: Option<u64>,
}

impl SolverBudget {
    pub fn unlimited() -> Self {
        SolverBudget::default()
    }

    pub fn nodes(limit: u64) -> Self {
        SolverBudget {
            time_limit: None,
            node_limit: Some(limit),
        }
    }

    pub fn seconds(secs: f64) -> Self {
        SolverBudget {
            time_limit: Some(Duration::from_secs_f64(secs)),
            node_limit: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SolveStats {
    pub nodes: u64,
    pub wall_time: Duration,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution<C> {
    pub status: SolveStatus,
    /// One value per declared variable; empty without a solution.
    pub values: Vec<C>,
    pub objective: C,
    pub stats: SolveStats,
}

impl<C: Coeff> Solution<C> {
    pub fn value(&self, var: VarId) -> C {
        self.values[var.0]
    }

    pub fn is_true(&self, var: VarId) -> bool {
        self.values[var.0] == C::one()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_rejects_empty_domain() {
        let mut m = ConstraintModel::<i64>::new();
        m.new_int("x", 3, 2);
        assert_eq!(m.check(), Err(ModelError::EmptyDomain("x".into())));
    }

    #[test]
    fn check_rejects_int_in_clause() {
        let mut m = ConstraintModel::<i64>::new();
        let x = m.new_int("x", 0, 2);
        m.add_clause(vec![Literal::pos(x)]);
        assert!(matches!(m.check(), Err(ModelError::NonBoolLiteral(_))));
    }

    #[test]
    fn check_detects_overflow_for_narrow_types() {
        let mut m = ConstraintModel::<i8>::new();
        let x = m.new_int("x", 0, 100);
        m.add_le(vec![(2, x)], 10);
        assert!(matches!(m.check(), Err(ModelError::Overflow(_))));
    }

    #[test]
    fn status_worst() {
        assert_eq!(SolveStatus::Optimal.worst(SolveStatus::Feasible), SolveStatus::Feasible);
        assert_eq!(SolveStatus::Infeasible.worst(SolveStatus::Feasible), SolveStatus::Infeasible);
    }
}
