//! Plain-text model dump, one item per line.
//!
//! ```text
//! int sigma[3] 0 7
//! bool d[0,1]@2
//! c0: 1 sigma[3] -1 sigma[1] >= 1
//! clause: d[0,1]@2 !d[0,1]@3
//! force: d[2,5]@4
//! minimize: 1 b[0] 1 b[1]
//! ```

use std::fmt::Write;

use super::{Coeff, ConstraintModel, Literal, VarKind};

pub fn dump_model<C: Coeff>(model: &ConstraintModel<C>) -> String {
    let mut out = String::new();
    let name = |v: usize| model.vars()[v].name.as_str();
    for v in model.vars() {
        match v.kind {
            VarKind::Int => writeln!(out, "int {} {} {}", v.name, v.lower, v.upper),
            VarKind::Bool => writeln!(out, "bool {}", v.name),
        }
        .expect("write to string");
    }
    for (i, c) in model.constraints().iter().enumerate() {
        write!(out, "c{i}:").expect("write to string");
        for &(a, v) in &c.terms {
            write!(out, " {} {}", a, name(v.0)).expect("write to string");
        }
        writeln!(out, " {} {}", c.cmp, c.bound).expect("write to string");
    }
    let lit = |l: &Literal| format!("{}{}", if l.positive { "" } else { "!" }, name(l.var.0));
    for cl in model.clauses() {
        let lits: Vec<String> = cl.iter().map(lit).collect();
        writeln!(out, "clause: {}", lits.join(" ")).expect("write to string");
    }
    for l in model.forced_literals() {
        writeln!(out, "force: {}", lit(l)).expect("write to string");
    }
    let terms: Vec<String> = model
        .objective()
        .iter()
        .map(|&(a, v)| format!("{} {}", a, name(v.0)))
        .collect();
    writeln!(out, "minimize: {}", terms.join(" ")).expect("write to string");
    out
}
