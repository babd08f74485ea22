//! Depth-first branch-and-bound with bounds and clause propagation.

use std::time::Instant;

use super::{
    verify_solution, Cmp, Coeff, ConstraintModel, Literal, ModelError, Solution, SolveStats,
    SolveStatus, SolverBudget, VarKind,
};

/// Solves `model` to optimality or until the budget runs out.
pub fn solve<C: Coeff>(
    model: &ConstraintModel<C>,
    budget: SolverBudget,
) -> Result<Solution<C>, ModelError> {
    solve_with_hint(model, budget, None)
}

/// Like [`solve`], seeding the incumbent with `hint` when it is a feasible
/// assignment. An infeasible hint is ignored.
pub fn solve_with_hint<C: Coeff>(
    model: &ConstraintModel<C>,
    budget: SolverBudget,
    hint: Option<&[C]>,
) -> Result<Solution<C>, ModelError> {
    model.check()?;
    let start = Instant::now();
    let mut engine = Engine::new(model);
    if let Some(h) = hint {
        if h.len() == model.num_vars() && verify_solution(model, h)? {
            engine.record_incumbent(h.to_vec());
        }
    }
    let complete = engine.run(&budget, start);
    let stats = SolveStats {
        nodes: engine.nodes,
        wall_time: start.elapsed(),
    };
    let status = match (complete, engine.best.is_some()) {
        (true, true) => SolveStatus::Optimal,
        (true, false) => SolveStatus::Infeasible,
        (false, true) => SolveStatus::Feasible,
        (false, false) => SolveStatus::TimeoutNoSolution,
    };
    let (values, objective) = match engine.best.take() {
        Some((v, o)) => (v, o),
        None => (Vec::new(), C::zero()),
    };
    Ok(Solution {
        status,
        values,
        objective,
        stats,
    })
}

/// `Σ terms <= rhs`, terms merged per variable.
struct Row<C> {
    terms: Vec<(C, usize)>,
    rhs: C,
    /// Largest `|a|·(ub-lb)` over the root domains; a slack at least this
    /// large cannot tighten anything.
    max_span: C,
}

struct Clause {
    lits: Vec<Literal>,
}

enum Trail<C> {
    Lower(usize, C),
    Upper(usize, C),
}

struct Frame<C> {
    var: usize,
    value: C,
    trail_len: usize,
    scan_from: usize,
    right: bool,
}

struct Engine<'m, C> {
    model: &'m ConstraintModel<C>,
    lb: Vec<C>,
    ub: Vec<C>,
    rows: Vec<Row<C>>,
    min_act: Vec<C>,
    /// Per variable: `(row, coeff)` occurrences.
    occurs: Vec<Vec<(usize, C)>>,
    clauses: Vec<Clause>,
    /// Per literal code: clauses watching that literal.
    watches: Vec<Vec<usize>>,
    units: Vec<Literal>,
    obj_row: Option<usize>,
    trail: Vec<Trail<C>>,
    row_queue: Vec<usize>,
    in_queue: Vec<bool>,
    lit_queue: Vec<Literal>,
    best: Option<(Vec<C>, C)>,
    nodes: u64,
    root_infeasible: bool,
}

fn code(lit: Literal) -> usize {
    lit.var.0 * 2 + usize::from(lit.positive)
}

impl<'m, C: Coeff> Engine<'m, C> {
    fn new(model: &'m ConstraintModel<C>) -> Self {
        let nv = model.num_vars();
        let lb: Vec<C> = model.vars().iter().map(|v| v.lower).collect();
        let ub: Vec<C> = model.vars().iter().map(|v| v.upper).collect();
        let mut engine = Engine {
            model,
            lb,
            ub,
            rows: Vec::new(),
            min_act: Vec::new(),
            occurs: vec![Vec::new(); nv],
            clauses: Vec::new(),
            watches: vec![Vec::new(); nv * 2],
            units: Vec::new(),
            obj_row: None,
            trail: Vec::new(),
            row_queue: Vec::new(),
            in_queue: Vec::new(),
            lit_queue: Vec::new(),
            best: None,
            nodes: 0,
            root_infeasible: false,
        };
        for c in model.constraints() {
            let terms: Vec<(C, usize)> = c.terms.iter().map(|&(a, v)| (a, v.0)).collect();
            match c.cmp {
                Cmp::Le => engine.push_row(terms, c.bound),
                Cmp::Ge => engine.push_row(negate(&terms), -c.bound),
                Cmp::Eq => {
                    engine.push_row(terms.clone(), c.bound);
                    engine.push_row(negate(&terms), -c.bound);
                }
            }
        }
        if !model.objective().is_empty() {
            let terms: Vec<(C, usize)> = model.objective().iter().map(|&(a, v)| (a, v.0)).collect();
            // Inactive until the first incumbent: rhs is set then.
            engine.push_row(terms, C::max_value());
            engine.obj_row = Some(engine.rows.len() - 1);
        }
        for cl in model.clauses() {
            let mut lits = cl.clone();
            lits.sort();
            lits.dedup();
            if lits.windows(2).any(|w| w[0].var == w[1].var) {
                continue; // tautology
            }
            match lits.len() {
                0 => engine.root_infeasible = true,
                1 => engine.units.push(lits[0]),
                _ => {
                    let id = engine.clauses.len();
                    engine.watches[code(lits[0])].push(id);
                    engine.watches[code(lits[1])].push(id);
                    engine.clauses.push(Clause { lits });
                }
            }
        }
        engine.units.extend_from_slice(model.forced_literals());
        engine.in_queue = vec![false; engine.rows.len()];
        engine
    }

    fn push_row(&mut self, terms: Vec<(C, usize)>, rhs: C) {
        let mut terms = terms;
        terms.sort_by_key(|&(_, v)| v);
        let mut merged: Vec<(C, usize)> = Vec::with_capacity(terms.len());
        for (a, v) in terms {
            match merged.last_mut() {
                Some(last) if last.1 == v => last.0 = last.0 + a,
                _ => merged.push((a, v)),
            }
        }
        merged.retain(|&(a, _)| !a.is_zero());
        let id = self.rows.len();
        let mut min = C::zero();
        let mut span = C::zero();
        for &(a, v) in &merged {
            min = min + self.term_min(a, v);
            span = span.max(a.abs() * (self.ub[v] - self.lb[v]));
            self.occurs[v].push((id, a));
        }
        self.rows.push(Row {
            terms: merged,
            rhs,
            max_span: span,
        });
        self.min_act.push(min);
    }

    fn term_min(&self, a: C, v: usize) -> C {
        if a > C::zero() {
            a * self.lb[v]
        } else {
            a * self.ub[v]
        }
    }

    fn is_bool(&self, v: usize) -> bool {
        self.model.vars()[v].kind == VarKind::Bool
    }

    fn lit_false(&self, lit: Literal) -> bool {
        let v = lit.var.0;
        if lit.positive {
            self.ub[v].is_zero()
        } else {
            self.lb[v] == C::one()
        }
    }

    fn lit_true(&self, lit: Literal) -> bool {
        self.lit_false(lit.negate())
    }

    /// Raises the lower bound of `v`; returns false on an empty domain.
    fn set_lb(&mut self, v: usize, value: C) -> bool {
        if value <= self.lb[v] {
            return true;
        }
        if value > self.ub[v] {
            return false;
        }
        let old = self.lb[v];
        self.trail.push(Trail::Lower(v, old));
        self.lb[v] = value;
        let delta = value - old;
        for i in 0..self.occurs[v].len() {
            let (r, a) = self.occurs[v][i];
            if a > C::zero() {
                self.min_act[r] = self.min_act[r] + a * delta;
                self.enqueue_row(r);
            }
        }
        if self.is_bool(v) && self.lb[v] == self.ub[v] {
            self.lit_queue.push(Literal::neg(crate::solver::VarId(v)));
        }
        true
    }

    /// Lowers the upper bound of `v`; returns false on an empty domain.
    fn set_ub(&mut self, v: usize, value: C) -> bool {
        if value >= self.ub[v] {
            return true;
        }
        if value < self.lb[v] {
            return false;
        }
        let old = self.ub[v];
        self.trail.push(Trail::Upper(v, old));
        self.ub[v] = value;
        let delta = old - value;
        for i in 0..self.occurs[v].len() {
            let (r, a) = self.occurs[v][i];
            if a < C::zero() {
                self.min_act[r] = self.min_act[r] - a * delta;
                self.enqueue_row(r);
            }
        }
        if self.is_bool(v) && self.lb[v] == self.ub[v] {
            self.lit_queue.push(Literal::pos(crate::solver::VarId(v)));
        }
        true
    }

    fn enqueue_row(&mut self, r: usize) {
        if !self.in_queue[r] {
            self.in_queue[r] = true;
            self.row_queue.push(r);
        }
    }

    fn make_true(&mut self, lit: Literal) -> bool {
        let v = lit.var.0;
        if lit.positive {
            self.set_lb(v, C::one())
        } else {
            self.set_ub(v, C::zero())
        }
    }

    fn undo_to(&mut self, len: usize) {
        while self.trail.len() > len {
            match self.trail.pop().expect("trail entry") {
                Trail::Lower(v, old) => {
                    let delta = self.lb[v] - old;
                    self.lb[v] = old;
                    for &(r, a) in &self.occurs[v] {
                        if a > C::zero() {
                            self.min_act[r] = self.min_act[r] - a * delta;
                        }
                    }
                }
                Trail::Upper(v, old) => {
                    let delta = old - self.ub[v];
                    self.ub[v] = old;
                    for &(r, a) in &self.occurs[v] {
                        if a < C::zero() {
                            self.min_act[r] = self.min_act[r] + a * delta;
                        }
                    }
                }
            }
        }
    }

    fn clear_queues(&mut self) {
        for r in self.row_queue.drain(..) {
            self.in_queue[r] = false;
        }
        self.lit_queue.clear();
    }

    /// Runs propagation to a fixpoint; returns false on conflict.
    fn propagate(&mut self) -> bool {
        loop {
            if let Some(lit) = self.lit_queue.pop() {
                // `lit` just became false.
                if !self.propagate_clauses(lit) {
                    self.clear_queues();
                    return false;
                }
                continue;
            }
            let Some(r) = self.row_queue.pop() else {
                return true;
            };
            self.in_queue[r] = false;
            if !self.propagate_row(r) {
                self.clear_queues();
                return false;
            }
        }
    }

    fn propagate_row(&mut self, r: usize) -> bool {
        let slack = match self.rows[r].rhs.checked_sub(&self.min_act[r]) {
            Some(s) => s,
            None => return true, // rhs is the inactive sentinel
        };
        if slack < C::zero() {
            return false;
        }
        if slack >= self.rows[r].max_span {
            return true;
        }
        for i in 0..self.rows[r].terms.len() {
            let (a, v) = self.rows[r].terms[i];
            if a > C::zero() {
                if a * (self.ub[v] - self.lb[v]) > slack && !self.set_ub(v, self.lb[v] + slack / a) {
                    return false;
                }
            } else {
                let b = -a;
                if b * (self.ub[v] - self.lb[v]) > slack && !self.set_lb(v, self.ub[v] - slack / b) {
                    return false;
                }
            }
        }
        true
    }

    fn propagate_clauses(&mut self, falsified: Literal) -> bool {
        let fc = code(falsified);
        let mut list = std::mem::take(&mut self.watches[fc]);
        let mut i = 0;
        let mut ok = true;
        while i < list.len() {
            let c = list[i];
            let lits = &mut self.clauses[c].lits;
            if lits[0] == falsified {
                lits.swap(0, 1);
            }
            let other = lits[0];
            if self.lit_true_in(other) {
                i += 1;
                continue;
            }
            let mut moved = false;
            for k in 2..self.clauses[c].lits.len() {
                let cand = self.clauses[c].lits[k];
                if !self.lit_false(cand) {
                    self.clauses[c].lits.swap(1, k);
                    self.watches[code(cand)].push(c);
                    list.swap_remove(i);
                    moved = true;
                    break;
                }
            }
            if moved {
                continue;
            }
            i += 1;
            if self.lit_false(other) || !self.make_true(other) {
                ok = false;
                break;
            }
        }
        self.watches[fc] = list;
        ok
    }

    fn lit_true_in(&self, lit: Literal) -> bool {
        self.lit_true(lit)
    }

    fn record_incumbent(&mut self, values: Vec<C>) {
        let obj = self.model.objective_value(&values);
        if let Some(r) = self.obj_row {
            self.rows[r].rhs = obj - C::one();
        }
        self.best = Some((values, obj));
    }

    fn out_of_budget(&self, budget: &SolverBudget, start: Instant) -> bool {
        if let Some(limit) = budget.node_limit {
            if self.nodes >= limit {
                return true;
            }
        }
        if let Some(limit) = budget.time_limit {
            if self.nodes % 256 == 0 && start.elapsed() >= limit {
                return true;
            }
        }
        false
    }

    fn first_unfixed(&self, from: usize) -> Option<usize> {
        (from..self.lb.len()).find(|&v| self.lb[v] < self.ub[v])
    }

    /// Returns true when the search space was exhausted.
    fn run(&mut self, budget: &SolverBudget, start: Instant) -> bool {
        if self.root_infeasible {
            return true;
        }
        for r in 0..self.rows.len() {
            self.enqueue_row(r);
        }
        let units = std::mem::take(&mut self.units);
        for lit in units {
            if !self.make_true(lit) {
                self.clear_queues();
                return true;
            }
        }
        for c in 0..self.clauses.len() {
            // Clauses whose watches are already false at the root.
            for w in 0..2 {
                let lit = self.clauses[c].lits[w];
                if self.lit_false(lit) {
                    self.lit_queue.push(lit);
                }
            }
        }
        if !self.propagate() {
            return true;
        }
        let mut stack: Vec<Frame<C>> = Vec::new();
        let mut scan_from = 0;
        loop {
            // Descend.
            let mut conflict = false;
            match self.first_unfixed(scan_from) {
                None => {
                    let values = self.lb.clone();
                    let better = match &self.best {
                        Some((_, o)) => self.model.objective_value(&values) < *o,
                        None => true,
                    };
                    if better {
                        debug_assert!(verify_solution(self.model, &values).unwrap_or(false));
                        self.record_incumbent(values);
                    }
                    conflict = true;
                }
                Some(v) => {
                    if self.out_of_budget(budget, start) {
                        return false;
                    }
                    self.nodes += 1;
                    let value = self.lb[v];
                    stack.push(Frame {
                        var: v,
                        value,
                        trail_len: self.trail.len(),
                        scan_from: v,
                        right: false,
                    });
                    if !self.set_ub(v, value) || !self.propagate_with_objective() {
                        self.clear_queues();
                        conflict = true;
                    } else {
                        scan_from = v;
                    }
                }
            }
            if !conflict {
                continue;
            }
            // Backtrack to the deepest frame with an untried right branch.
            loop {
                let Some(frame) = stack.last_mut() else {
                    return true;
                };
                let len = frame.trail_len;
                if frame.right {
                    stack.pop();
                    self.undo_to(len);
                    continue;
                }
                frame.right = true;
                let (v, value, from) = (frame.var, frame.value, frame.scan_from);
                self.undo_to(len);
                if self.out_of_budget(budget, start) {
                    return false;
                }
                self.nodes += 1;
                if self.set_lb(v, value + C::one()) && self.propagate_with_objective() {
                    scan_from = from;
                    break;
                }
                self.clear_queues();
            }
        }
    }

    fn propagate_with_objective(&mut self) -> bool {
        if let Some(r) = self.obj_row {
            if self.best.is_some() {
                self.enqueue_row(r);
            }
        }
        self.propagate()
    }
}

fn negate<C: Coeff>(terms: &[(C, usize)]) -> Vec<(C, usize)> {
    terms.iter().map(|&(a, v)| (-a, v)).collect()
}
