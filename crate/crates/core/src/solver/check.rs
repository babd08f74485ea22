//! Independent feasibility check of a full assignment.

use super::{Cmp, Coeff, ConstraintModel, ModelError};

/// Returns whether `values` satisfies every domain, linear constraint,
/// clause and forced literal of `model`. The objective is not checked.
pub fn verify_solution<C: Coeff>(model: &ConstraintModel<C>, values: &[C]) -> Result<bool, ModelError> {
    if values.len() < model.num_vars() {
        return Err(ModelError::MissingVariable(values.len()));
    }
    for (v, &x) in model.vars().iter().zip(values) {
        if x < v.lower || x > v.upper {
            return Ok(false);
        }
    }
    for (i, c) in model.constraints().iter().enumerate() {
        let mut lhs = C::zero();
        for &(a, v) in &c.terms {
            let x = *values.get(v.0).ok_or(ModelError::UnknownVar(v.0))?;
            lhs = a
                .checked_mul(&x)
                .and_then(|t| lhs.checked_add(&t))
                .ok_or(ModelError::Overflow(i))?;
        }
        let holds = match c.cmp {
            Cmp::Le => lhs <= c.bound,
            Cmp::Ge => lhs >= c.bound,
            Cmp::Eq => lhs == c.bound,
        };
        if !holds {
            return Ok(false);
        }
    }
    let truth = |lit: &super::Literal| (values[lit.var.0] == C::one()) == lit.positive;
    if !model.clauses().iter().all(|cl| cl.iter().any(truth)) {
        return Ok(false);
    }
    Ok(model.forced_literals().iter().all(truth))
}
