use std::fmt::Write;

use trajsim::resource::{Limit, PreemptOrder};

use super::ast::*;

/// Renders a model in canonical form. Parsing the output yields an equal
/// model.
pub fn print(m: &ModelFile) -> String {
    let mut out = String::new();
    let meta = &m.meta;
    let _ = writeln!(out, "model {} {{", string(&meta.name));
    let _ = writeln!(out, "  seed = {}", meta.seed);
    if let Some(h) = meta.horizon {
        let _ = writeln!(out, "  horizon = {}", number(h));
    }
    let _ = writeln!(out, "  replications = {}", meta.replications);
    if let Some(Analytic::Mm1 { lambda, mu }) = meta.analytic {
        let _ = writeln!(out, "  analytic = mm1({}, {})", number(lambda), number(mu));
    }
    out.push_str("}\n");

    for r in &m.resources {
        let _ = writeln!(out, "\nresource {} {{", r.name);
        let _ = writeln!(out, "  capacity = {}", limit(r.capacity));
        let _ = writeln!(out, "  queue_size = {}", limit(r.queue_size));
        if r.preemptive {
            out.push_str("  preemptive = true\n");
        }
        if r.preempt_order == PreemptOrder::Lifo {
            out.push_str("  preempt_order = lifo\n");
        }
        if r.queue_size_strict {
            out.push_str("  queue_size_strict = true\n");
        }
        if !r.monitored {
            out.push_str("  mon = false\n");
        }
        out.push_str("}\n");
    }

    if !m.distributions.is_empty() {
        out.push('\n');
    }
    for d in &m.distributions {
        let _ = writeln!(out, "distribution {} = {}", d.name, dist(&d.dist));
    }

    for t in &m.trajectories {
        let _ = write!(out, "\ntrajectory {} ", t.name);
        block(&mut out, &t.body, 0);
        out.push('\n');
    }

    for g in &m.generators {
        let _ = writeln!(out, "\ngenerator {} {{", g.name);
        out.push_str("  trajectory = ");
        value(&mut out, &g.trajectory, 1);
        out.push('\n');
        let _ = writeln!(out, "  distribution = {}", dist(&g.distribution));
        if g.mon != 1 {
            let _ = writeln!(out, "  mon = {}", g.mon);
        }
        if g.priority != 0 {
            let _ = writeln!(out, "  priority = {}", g.priority);
        }
        if g.preemptible != g.priority {
            let _ = writeln!(out, "  preemptible = {}", g.preemptible);
        }
        if g.restart {
            out.push_str("  restart = true\n");
        }
        out.push_str("}\n");
    }
    out
}

fn number(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".to_string()
    } else if v == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        // shortest representation that reads back to the same value
        format!("{v}")
    }
}

fn limit(l: Limit) -> String {
    match l {
        Limit::Finite(v) => v.to_string(),
        Limit::Infinite => "inf".to_string(),
    }
}

fn string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn dist(d: &DistExpr) -> String {
    let list = |v: &[f64]| v.iter().map(|x| number(*x)).collect::<Vec<_>>().join(", ");
    match d {
        DistExpr::Exponential(r) => format!("exponential({})", number(*r)),
        DistExpr::Uniform(a, b) => format!("uniform({}, {})", number(*a), number(*b)),
        DistExpr::Constant(c) => format!("constant({})", number(*c)),
        DistExpr::At(t) => format!("at({})", list(t)),
        DistExpr::From(s, inner) => format!("from({}, {})", number(*s), dist(inner)),
        DistExpr::Batched(inner, m) => format!("batched({}, {m})", dist(inner)),
        DistExpr::Ref(name, _) => name.clone(),
    }
}

fn block(out: &mut String, acts: &[Act], depth: usize) {
    if acts.is_empty() {
        out.push_str("{}");
        return;
    }
    out.push_str("{\n");
    let pad = "  ".repeat(depth + 1);
    for a in acts {
        out.push_str(&pad);
        activity(out, a, depth + 1);
        out.push('\n');
    }
    out.push_str(&"  ".repeat(depth));
    out.push('}');
}

fn activity(out: &mut String, a: &Act, depth: usize) {
    out.push_str(&a.kind);
    out.push('(');
    for (i, arg) in a.args.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        if let Some(k) = &arg.key {
            out.push_str(k);
            out.push_str(" = ");
        }
        value(out, &arg.value, depth);
    }
    out.push(')');
}

fn value(out: &mut String, v: &Value, depth: usize) {
    match v {
        Value::Expr(e) => expr(out, e, 0),
        Value::List(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                value(out, item, depth);
            }
            out.push(']');
        }
        Value::Block(acts) => block(out, acts, depth),
    }
}

/// Writes `e`, parenthesised when it binds looser than `ctx`.
fn expr(out: &mut String, e: &Expr, ctx: u8) {
    match &e.kind {
        ExprKind::Num(v) => out.push_str(&number(*v)),
        ExprKind::Str(s) => out.push_str(&string(s)),
        ExprKind::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        ExprKind::Ident(s) => out.push_str(s),
        ExprKind::Call(name, args) => {
            out.push_str(name);
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                expr(out, a, 0);
            }
            out.push(')');
        }
        ExprKind::Neg(x) | ExprKind::Not(x) => {
            out.push(if matches!(e.kind, ExprKind::Neg(_)) { '-' } else { '!' });
            expr(out, x, u8::MAX);
        }
        ExprKind::Binary(op, a, b) => {
            let p = op.precedence();
            let wrap = p < ctx;
            if wrap {
                out.push('(');
            }
            expr(out, a, p);
            let _ = write!(out, " {} ", op.symbol());
            // operators are left associative: a right operand of equal
            // precedence needs parentheses
            expr(out, b, p + 1);
            if wrap {
                out.push(')');
            }
        }
    }
}
