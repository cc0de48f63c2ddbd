//! Turns a parsed model into runnable specs: resolves names, checks
//! arguments and compiles expressions.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use trajsim::format::long_time;
use trajsim::*;

use super::ast::*;
use super::parser::{binop, const_eval};
use super::ModelError;

/// A checked model, ready to instantiate environments from.
#[derive(Debug, Clone)]
pub struct Model {
    pub ast: ModelFile,
    resources: Vec<ResourceSpec>,
    generators: Vec<GeneratorSpec>,
}

impl Model {
    pub fn meta(&self) -> &Meta {
        &self.ast.meta
    }

    /// Fresh environment for random stream `stream` of `seed`.
    pub fn environment(&self, seed: u64, stream: u64) -> Result<Environment, SimError> {
        let mut env = Environment::named(self.ast.meta.name.clone(), seed).with_stream(stream);
        for r in &self.resources {
            env.add_resource(r.clone())?;
        }
        for g in &self.generators {
            env.add_generator(g.clone())?;
        }
        Ok(env)
    }

    pub fn trajectory(&self, generator: &str) -> Option<&Trajectory> {
        self.generators
            .iter()
            .find(|g| g.name == generator)
            .map(|g| &g.trajectory)
    }
}

pub fn compile(ast: ModelFile) -> Result<Model, ModelError> {
    let mut cx = Cx {
        ast: &ast,
        dists: HashMap::new(),
        trajs: HashMap::new(),
        visiting: Vec::new(),
        resources: ast.resources.iter().map(|r| r.name.clone()).collect(),
        generators: ast.generators.iter().map(|g| g.name.clone()).collect(),
    };
    for d in &ast.distributions {
        cx.dist_named(&d.name, d.span)?;
    }
    for t in &ast.trajectories {
        cx.named_traj(&t.name, t.span)?;
    }
    let resources = ast
        .resources
        .iter()
        .map(|r| {
            ResourceSpec::new(r.name.clone())
                .capacity(r.capacity)
                .queue_size(r.queue_size)
                .preemptive(r.preemptive)
                .preempt_order(r.preempt_order)
                .queue_size_strict(r.queue_size_strict)
                .monitored(r.monitored)
        })
        .collect();
    let mut generators = Vec::new();
    for g in &ast.generators {
        let traj = cx.traj(&g.trajectory, g.span)?;
        let dist = cx.dist(&g.distribution)?;
        let prio = Prioritization::new(g.priority, g.preemptible, g.restart)
            .map_err(|e| ModelError::at(g.span, e.to_string()))?;
        generators.push(
            GeneratorSpec::new(g.name.clone(), traj, dist)
                .mon(g.mon)
                .prioritization(prio),
        );
    }
    drop(cx);
    Ok(Model {
        ast,
        resources,
        generators,
    })
}

struct Cx<'a> {
    ast: &'a ModelFile,
    dists: HashMap<String, DistExpr>,
    trajs: HashMap<String, Trajectory>,
    visiting: Vec<String>,
    resources: HashSet<String>,
    generators: HashSet<String>,
}

/// Positional and keyword arguments of one activity, consumed in
/// declaration order.
struct Args<'a> {
    act: &'a Act,
    next_pos: usize,
    used: Vec<bool>,
}

impl<'a> Args<'a> {
    fn new(act: &'a Act) -> Result<Self, ModelError> {
        let mut seen_kw = false;
        for a in &act.args {
            match &a.key {
                Some(k) => {
                    if act.args.iter().filter(|b| b.key.as_deref() == Some(k)).count() > 1 {
                        return Err(ModelError::at(a.span, format!("argument '{k}' given twice")));
                    }
                    seen_kw = true;
                }
                None if seen_kw => {
                    return Err(ModelError::at(
                        a.span,
                        "positional arguments must come before named ones",
                    ))
                }
                None => {}
            }
        }
        Ok(Args {
            act,
            next_pos: 0,
            used: vec![false; act.args.len()],
        })
    }

    fn positional(&self) -> usize {
        self.act.args.iter().take_while(|a| a.key.is_none()).count()
    }

    /// Next positional argument, or the keyword argument `name`.
    fn get(&mut self, name: &str) -> Result<Option<&'a Arg>, ModelError> {
        let kw = self
            .act
            .args
            .iter()
            .position(|a| a.key.as_deref() == Some(name));
        if self.next_pos < self.positional() {
            if let Some(k) = kw {
                return Err(ModelError::at(
                    self.act.args[k].span,
                    format!("argument '{name}' given twice"),
                ));
            }
            let i = self.next_pos;
            self.next_pos += 1;
            self.used[i] = true;
            return Ok(Some(&self.act.args[i]));
        }
        Ok(kw.map(|k| {
            self.used[k] = true;
            &self.act.args[k]
        }))
    }

    fn keyword(&mut self, name: &str) -> Option<&'a Arg> {
        let k = self
            .act
            .args
            .iter()
            .position(|a| a.key.as_deref() == Some(name))?;
        self.used[k] = true;
        Some(&self.act.args[k])
    }

    fn require(&mut self, name: &str) -> Result<&'a Arg, ModelError> {
        self.get(name)?.ok_or_else(|| {
            ModelError::at(
                self.act.span,
                format!("{} needs argument '{name}'", self.act.kind),
            )
        })
    }

    /// All remaining positional arguments.
    fn rest(&mut self) -> Vec<&'a Arg> {
        let n = self.positional();
        let out: Vec<&Arg> = (self.next_pos..n).map(|i| &self.act.args[i]).collect();
        for i in self.next_pos..n {
            self.used[i] = true;
        }
        self.next_pos = n;
        out
    }

    fn finish(self) -> Result<(), ModelError> {
        for (a, used) in self.act.args.iter().zip(&self.used) {
            if !used {
                let msg = match &a.key {
                    Some(k) => format!("{} has no argument '{k}'", self.act.kind),
                    None => format!("too many arguments to {}", self.act.kind),
                };
                return Err(ModelError::at(a.span, msg));
            }
        }
        Ok(())
    }
}

fn expr_arg(a: &Arg) -> Result<&Expr, ModelError> {
    match &a.value {
        Value::Expr(e) => Ok(e),
        Value::List(_) => Err(ModelError::at(a.span, "a list is not allowed here")),
        Value::Block(_) => Err(ModelError::at(a.span, "a trajectory block is not allowed here")),
    }
}

fn bool_lit(a: &Arg) -> Result<bool, ModelError> {
    match &expr_arg(a)?.kind {
        ExprKind::Bool(b) => Ok(*b),
        _ => Err(ModelError::at(a.span, "expected true or false")),
    }
}

fn bools(a: &Arg) -> Result<Vec<bool>, ModelError> {
    match &a.value {
        Value::List(items) => items
            .iter()
            .map(|v| match v {
                Value::Expr(Expr {
                    kind: ExprKind::Bool(b),
                    ..
                }) => Ok(*b),
                _ => Err(ModelError::at(a.span, "expected a list of true/false")),
            })
            .collect(),
        _ => Ok(vec![bool_lit(a)?]),
    }
}

fn word(a: &Arg) -> Result<String, ModelError> {
    let e = expr_arg(a)?;
    e.as_str()
        .or(e.as_ident())
        .map(str::to_string)
        .ok_or_else(|| ModelError::at(a.span, "expected a name"))
}

fn words(a: &Arg) -> Result<Vec<String>, ModelError> {
    match &a.value {
        Value::List(items) => items
            .iter()
            .map(|v| match v {
                Value::Expr(e) => e
                    .as_str()
                    .or(e.as_ident())
                    .map(str::to_string)
                    .ok_or_else(|| ModelError::at(e.span, "expected a name")),
                _ => Err(ModelError::at(a.span, "expected a list of names")),
            })
            .collect(),
        _ => Ok(vec![word(a)?]),
    }
}

fn const_int(a: &Arg, min: i64) -> Result<i64, ModelError> {
    let v = const_eval(expr_arg(a)?)
        .ok_or_else(|| ModelError::at(a.span, "expected a constant"))?;
    if v.fract() != 0.0 || v < min as f64 || !v.is_finite() {
        return Err(ModelError::at(a.span, format!("expected an integer >= {min}, got {v}")));
    }
    Ok(v as i64)
}

impl Cx<'_> {
    fn dist_named(&mut self, name: &str, span: Span) -> Result<DistExpr, ModelError> {
        if let Some(d) = self.dists.get(name) {
            return Ok(d.clone());
        }
        let decl = self
            .ast
            .distributions
            .iter()
            .find(|d| d.name == name)
            .ok_or_else(|| ModelError::at(span, format!("unknown distribution '{name}'")))?;
        if self.visiting.iter().any(|v| v == name) {
            return Err(ModelError::at(span, format!("distribution '{name}' refers to itself")));
        }
        self.visiting.push(name.to_string());
        let resolved = self.resolve_dist(&decl.dist.clone());
        self.visiting.pop();
        let resolved = resolved?;
        self.dists.insert(name.to_string(), resolved.clone());
        Ok(resolved)
    }

    fn resolve_dist(&mut self, d: &DistExpr) -> Result<DistExpr, ModelError> {
        Ok(match d {
            DistExpr::Ref(n, span) => self.dist_named(n, *span)?,
            DistExpr::From(s, inner) => DistExpr::From(*s, Box::new(self.resolve_dist(inner)?)),
            DistExpr::Batched(inner, m) => DistExpr::Batched(Box::new(self.resolve_dist(inner)?), *m),
            other => other.clone(),
        })
    }

    fn dist(&mut self, d: &DistExpr) -> Result<Distribution, ModelError> {
        Ok(to_distribution(&self.resolve_dist(d)?))
    }

    fn named_traj(&mut self, name: &str, span: Span) -> Result<Trajectory, ModelError> {
        if let Some(t) = self.trajs.get(name) {
            return Ok(t.deep_copy());
        }
        if self.visiting.iter().any(|v| v == name) {
            return Err(ModelError::at(
                span,
                format!("trajectory '{name}' refers to itself ({} -> {name})", self.visiting.join(" -> ")),
            ));
        }
        let decl = self
            .ast
            .trajectories
            .iter()
            .find(|t| t.name == name)
            .ok_or_else(|| ModelError::at(span, format!("unknown trajectory '{name}'")))?;
        self.visiting.push(name.to_string());
        let built = self.acts(&decl.body, Trajectory::named(name));
        self.visiting.pop();
        let built = built?;
        self.trajs.insert(name.to_string(), built.deep_copy());
        Ok(built)
    }

    fn traj(&mut self, v: &Value, span: Span) -> Result<Trajectory, ModelError> {
        match v {
            Value::Block(acts) => self.acts(acts, Trajectory::new()),
            Value::Expr(e) => match e.as_ident() {
                Some(name) => self.named_traj(name, e.span),
                None => Err(ModelError::at(e.span, "expected a trajectory name or { ... } block")),
            },
            Value::List(_) => Err(ModelError::at(span, "expected a trajectory")),
        }
    }

    fn acts(&mut self, acts: &[Act], mut t: Trajectory) -> Result<Trajectory, ModelError> {
        for a in acts {
            t = self.activity(a, t)?;
        }
        Ok(t)
    }

    fn resource(&self, a: &Arg) -> Result<ResourceRef, ModelError> {
        let e = expr_arg(a)?;
        if let ExprKind::Call(f, args) = &e.kind {
            if f == "selected" && args.len() <= 1 {
                let id = match args.first() {
                    Some(x) => const_eval(x)
                        .filter(|v| *v >= 0.0 && v.fract() == 0.0)
                        .ok_or_else(|| ModelError::at(x.span, "selected() takes a non-negative integer"))?,
                    None => 0.0,
                };
                return Ok(ResourceRef::Selected(id as usize));
            }
        }
        let name = word(a)?;
        self.check_resource(&name, e.span)?;
        Ok(ResourceRef::Named(name))
    }

    fn check_resource(&self, name: &str, span: Span) -> Result<(), ModelError> {
        if self.resources.contains(name) {
            Ok(())
        } else {
            Err(ModelError::at(span, format!("unknown resource '{name}'")))
        }
    }

    fn generator(&self, a: &Arg) -> Result<String, ModelError> {
        let name = word(a)?;
        if self.generators.contains(&name) {
            Ok(name)
        } else {
            Err(ModelError::at(a.span, format!("unknown generator '{name}'")))
        }
    }

    fn num(&mut self, a: &Arg) -> Result<Param<f64>, ModelError> {
        let c = self.expr(expr_arg(a)?)?;
        Ok(match c {
            CExpr::Const(v) => Param::Const(v),
            dynamic => {
                let dynamic = Arc::new(dynamic);
                Param::dynamic(move |ctx| dynamic.eval(ctx))
            }
        })
    }

    fn count(&mut self, a: &Arg) -> Result<Param<u64>, ModelError> {
        Ok(match self.num(a)? {
            Param::Const(v) => {
                if v < 0.0 || v.fract() != 0.0 || !v.is_finite() {
                    return Err(ModelError::at(a.span, format!("expected a non-negative integer, got {v}")));
                }
                Param::Const(v as u64)
            }
            Param::Dyn(f) => Param::dynamic(move |ctx| f(ctx).round().max(0.0) as u64),
        })
    }

    fn int(&mut self, a: &Arg) -> Result<Param<i64>, ModelError> {
        Ok(match self.num(a)? {
            Param::Const(v) => {
                if v.fract() != 0.0 || !v.is_finite() {
                    return Err(ModelError::at(a.span, format!("expected an integer, got {v}")));
                }
                Param::Const(v as i64)
            }
            Param::Dyn(f) => Param::dynamic(move |ctx| f(ctx).round() as i64),
        })
    }

    fn truth(&mut self, a: &Arg) -> Result<Param<bool>, ModelError> {
        Ok(match self.num(a)? {
            Param::Const(v) => Param::Const(v != 0.0),
            Param::Dyn(f) => Param::dynamic(move |ctx| f(ctx) != 0.0),
        })
    }

    fn text(&mut self, a: &Arg) -> Result<Param<String>, ModelError> {
        let parts = self.text_parts(expr_arg(a)?)?;
        if let [Part::Lit(s)] = parts.as_slice() {
            return Ok(Param::Const(s.clone()));
        }
        let parts = Arc::new(parts);
        Ok(Param::dynamic(move |ctx| {
            let mut out = String::new();
            for p in parts.iter() {
                match p {
                    Part::Lit(s) => out.push_str(s),
                    Part::Num(e) => out.push_str(&long_time(e.eval(ctx))),
                }
            }
            out
        }))
    }

    /// Pieces of a message: string literals joined with `+` to numbers.
    fn text_parts(&mut self, e: &Expr) -> Result<Vec<Part>, ModelError> {
        match &e.kind {
            ExprKind::Str(s) => Ok(vec![Part::Lit(s.clone())]),
            ExprKind::Binary(BinOp::Add, l, r) if is_text(l) || is_text(r) => {
                let mut parts = self.text_parts(l)?;
                parts.extend(self.text_parts(r)?);
                Ok(merge_literals(parts))
            }
            _ => match self.expr(e)? {
                CExpr::Const(v) => Ok(vec![Part::Lit(long_time(v))]),
                c => Ok(vec![Part::Num(Arc::new(c))]),
            },
        }
    }

    fn expr(&mut self, e: &Expr) -> Result<CExpr, ModelError> {
        let c = match &e.kind {
            ExprKind::Num(v) => CExpr::Const(*v),
            ExprKind::Bool(b) => CExpr::Const(f64::from(u8::from(*b))),
            ExprKind::Str(_) => return Err(ModelError::at(e.span, "a string is not allowed here")),
            ExprKind::Ident(name) => match name.as_str() {
                "inf" | "Inf" => CExpr::Const(f64::INFINITY),
                _ if self.ast.distributions.iter().any(|d| &d.name == name) => {
                    let d = self.dist_named(name, e.span)?;
                    scalar_draw(&d)
                        .ok_or_else(|| ModelError::at(e.span, format!("distribution '{name}' does not yield single values")))?
                }
                _ => return Err(ModelError::at(e.span, format!("unknown name '{name}'"))),
            },
            ExprKind::Neg(x) => CExpr::Neg(Box::new(self.expr(x)?)),
            ExprKind::Not(x) => CExpr::Not(Box::new(self.expr(x)?)),
            ExprKind::Binary(op, a, b) => {
                CExpr::Bin(*op, Box::new(self.expr(a)?), Box::new(self.expr(b)?))
            }
            ExprKind::Call(f, args) => self.call(f, args, e.span)?,
        };
        Ok(c.fold())
    }

    fn call(&mut self, f: &str, args: &[Expr], span: Span) -> Result<CExpr, ModelError> {
        let arity = |n: usize| {
            if args.len() == n {
                Ok(())
            } else {
                Err(ModelError::at(span, format!("{f}() takes {n} argument(s), got {}", args.len())))
            }
        };
        let key = |i: usize| -> Result<String, ModelError> {
            args[i]
                .as_str()
                .or(args[i].as_ident())
                .map(str::to_string)
                .ok_or_else(|| ModelError::at(args[i].span, "expected a name"))
        };
        let unary: Option<fn(f64) -> f64> = match f {
            "abs" => Some(f64::abs),
            "floor" => Some(f64::floor),
            "ceil" => Some(f64::ceil),
            "round" => Some(f64::round),
            "sqrt" => Some(f64::sqrt),
            "exp" => Some(f64::exp),
            "log" => Some(f64::ln),
            _ => None,
        };
        if let Some(g) = unary {
            arity(1)?;
            return Ok(CExpr::Fn1(g, Box::new(self.expr(&args[0])?)));
        }
        Ok(match f {
            "now" => {
                arity(0)?;
                CExpr::Now
            }
            "runif" => {
                arity(0)?;
                CExpr::Runif
            }
            "exponential" => {
                arity(1)?;
                CExpr::Exponential(Box::new(self.expr(&args[0])?))
            }
            "uniform" => {
                arity(2)?;
                CExpr::Uniform(Box::new(self.expr(&args[0])?), Box::new(self.expr(&args[1])?))
            }
            "min" | "max" | "pow" => {
                arity(2)?;
                let g: fn(f64, f64) -> f64 = match f {
                    "min" => f64::min,
                    "max" => f64::max,
                    _ => f64::powf,
                };
                CExpr::Fn2(g, Box::new(self.expr(&args[0])?), Box::new(self.expr(&args[1])?))
            }
            "if" => {
                arity(3)?;
                CExpr::If(
                    Box::new(self.expr(&args[0])?),
                    Box::new(self.expr(&args[1])?),
                    Box::new(self.expr(&args[2])?),
                )
            }
            "get_attribute" => {
                arity(1)?;
                CExpr::Attribute(key(0)?)
            }
            "get_global" => {
                arity(1)?;
                CExpr::Global(key(0)?)
            }
            "server_count" | "queue_count" | "capacity" | "queue_size" => {
                arity(1)?;
                let r = key(0)?;
                self.check_resource(&r, args[0].span)?;
                CExpr::Resource(
                    match f {
                        "server_count" => Gauge::Server,
                        "queue_count" => Gauge::Queue,
                        "capacity" => Gauge::Capacity,
                        _ => Gauge::QueueSize,
                    },
                    r,
                )
            }
            "n_generated" => {
                arity(1)?;
                let g = key(0)?;
                if !self.generators.contains(&g) {
                    return Err(ModelError::at(args[0].span, format!("unknown generator '{g}'")));
                }
                CExpr::Generated(g)
            }
            other => return Err(ModelError::at(span, format!("unknown function '{other}'"))),
        })
    }

    fn activity(&mut self, act: &Act, t: Trajectory) -> Result<Trajectory, ModelError> {
        let mut args = Args::new(act)?;
        let one = Param::Const(1u64);
        let t = match act.kind.as_str() {
            "log" => {
                let m = self.text(args.require("message")?)?;
                t.log(m)
            }
            "timeout" => {
                let d = self.num(args.require("delay")?)?;
                t.timeout(d)
            }
            "set_attribute" | "set_global" => {
                let key = self.text(args.require("key")?)?;
                let value = self.num(args.require("value")?)?;
                let global = act.kind == "set_global"
                    || match args.keyword("global") {
                        Some(a) => bool_lit(a)?,
                        None => false,
                    };
                if global {
                    t.set_global(key, value)
                } else {
                    t.set_attribute(key, value)
                }
            }
            "set_prioritization" => {
                let p = self.int(args.require("priority")?)?;
                let q = match args.get("preemptible")? {
                    Some(a) => Some(self.int(a)?),
                    None => None,
                };
                let r = match args.get("restart")? {
                    Some(a) => bool_lit(a)?,
                    None => false,
                };
                match (&p, &q) {
                    (Param::Const(p), None) => t.set_prioritization(
                        Prioritization::new(*p, *p, r).map_err(|e| ModelError::at(act.span, e.to_string()))?,
                    ),
                    (Param::Const(p), Some(Param::Const(q))) => t.set_prioritization(
                        Prioritization::new(*p, *q, r).map_err(|e| ModelError::at(act.span, e.to_string()))?,
                    ),
                    _ => t.set_prioritization(Param::dynamic(move |ctx| {
                        let p = p.eval(ctx).max(0);
                        let q = q.as_ref().map_or(p, |q| q.eval(ctx)).max(p);
                        Prioritization {
                            priority: p,
                            preemptible: q,
                            restart: r,
                        }
                    })),
                }
            }
            "seize" | "seize_selected" => {
                let res = if act.kind == "seize" {
                    self.resource(args.require("resource")?)?
                } else {
                    ResourceRef::Selected(0)
                };
                let amount = match args.get("amount")? {
                    Some(a) => self.count(a)?,
                    None => one,
                };
                let res = match (act.kind.as_str(), args.keyword("id")) {
                    ("seize_selected", Some(a)) => ResourceRef::Selected(const_int(a, 0)? as usize),
                    _ => res,
                };
                let mut opts = SeizeOptions::new();
                if let Some(a) = args.keyword("continue") {
                    let c = bools(a)?;
                    let post = c[0];
                    let rej = *c.get(1).unwrap_or(&post);
                    if c.len() > 2 {
                        return Err(ModelError::at(a.span, "continue takes at most two values"));
                    }
                    opts = opts.continue_(post, rej);
                }
                if let Some(a) = args.keyword("post_seize") {
                    opts = opts.post_seize(self.traj(&a.value, a.span)?);
                }
                if let Some(a) = args.keyword("reject") {
                    opts = opts.reject(self.traj(&a.value, a.span)?);
                }
                t.seize_with(res, amount, opts)
            }
            "release" | "release_selected" => {
                let res = if act.kind == "release" {
                    self.resource(args.require("resource")?)?
                } else {
                    ResourceRef::Selected(0)
                };
                let amount = match args.get("amount")? {
                    Some(a) => self.count(a)?,
                    None => one,
                };
                let res = match (act.kind.as_str(), args.keyword("id")) {
                    ("release_selected", Some(a)) => ResourceRef::Selected(const_int(a, 0)? as usize),
                    _ => res,
                };
                t.release(res, amount)
            }
            "release_all" => {
                let res = self.resource(args.require("resource")?)?;
                t.release_all(res)
            }
            "select" => {
                let a = args.require("resources")?;
                let names = words(a)?;
                if names.is_empty() {
                    return Err(ModelError::at(a.span, "select needs at least one resource"));
                }
                for n in &names {
                    self.check_resource(n, a.span)?;
                }
                let policy = match args.get("policy")? {
                    Some(p) => {
                        let w = word(p)?;
                        SelectPolicy::from_name(&w).ok_or_else(|| {
                            ModelError::at(
                                p.span,
                                format!("unknown policy '{w}' (shortest-queue, round-robin, first-available, random)"),
                            )
                        })?
                    }
                    None => SelectPolicy::ShortestQueue,
                };
                let id = match args.get("id")? {
                    Some(a) => const_int(a, 0)? as usize,
                    None => 0,
                };
                t.select_id(names, policy, id)
            }
            "set_capacity" | "set_queue_size" => {
                let res = self.resource(args.require("resource")?)?;
                let v = self.num(args.require("value")?)?;
                if let Param::Const(c) = v {
                    if c.is_nan() || c < 0.0 {
                        return Err(ModelError::at(act.span, format!("{} must be non-negative", act.kind)));
                    }
                }
                if act.kind == "set_capacity" {
                    t.set_capacity(res, v)
                } else {
                    t.set_queue_size(res, v)
                }
            }
            "activate" | "deactivate" => {
                let g = self.generator(args.require("generator")?)?;
                if act.kind == "activate" {
                    t.activate(g)
                } else {
                    t.deactivate(g)
                }
            }
            "set_trajectory" => {
                let g = self.generator(args.require("generator")?)?;
                let a = args.require("trajectory")?;
                let sub = self.traj(&a.value, a.span)?;
                t.set_trajectory(g, sub)
            }
            "set_distribution" => {
                let g = self.generator(args.require("generator")?)?;
                let a = args.require("distribution")?;
                let d = super::parser::dist_expr(&a.value, a.span)?;
                let d = self.dist(&d)?;
                t.set_distribution(g, d)
            }
            "branch" => {
                let option = self.int(args.require("option")?)?;
                let subs = args
                    .rest()
                    .into_iter()
                    .map(|a| self.traj(&a.value, a.span))
                    .collect::<Result<Vec<_>, _>>()?;
                if subs.is_empty() {
                    return Err(ModelError::at(act.span, "branch needs at least one sub-trajectory"));
                }
                let cont = match args.keyword("continue") {
                    Some(a) => {
                        let c = bools(a)?;
                        if c.len() != 1 && c.len() != subs.len() {
                            return Err(ModelError::at(
                                a.span,
                                format!("continue needs 1 or {} values", subs.len()),
                            ));
                        }
                        c
                    }
                    None => vec![true],
                };
                if let Param::Const(o) = option {
                    if o < 0 || o as usize > subs.len() {
                        return Err(ModelError::at(
                            act.span,
                            format!("branch option {o} out of range 0..={}", subs.len()),
                        ));
                    }
                }
                t.branch(option, &cont, subs)
            }
            "clone" => {
                let n = self.int(args.require("n")?)?;
                if let Param::Const(n) = n {
                    if n < 1 {
                        return Err(ModelError::at(act.span, "clone needs n >= 1"));
                    }
                }
                let subs = args
                    .rest()
                    .into_iter()
                    .map(|a| self.traj(&a.value, a.span))
                    .collect::<Result<Vec<_>, _>>()?;
                t.clone_n(n, subs)
            }
            "synchronize" => {
                let wait = match args.get("wait")? {
                    Some(a) => bool_lit(a)?,
                    None => true,
                };
                t.synchronize(wait)
            }
            "rollback" => {
                let amount = self.int(args.require("amount")?)?;
                if let Param::Const(n) = amount {
                    if n < 0 {
                        return Err(ModelError::at(act.span, "rollback amount must be non-negative"));
                    }
                }
                let times = args.get("times")?;
                let check = args.keyword("check");
                match (times, check) {
                    (Some(_), Some(c)) => {
                        return Err(ModelError::at(c.span, "rollback takes either times or check"))
                    }
                    (_, Some(c)) => {
                        let c = self.truth(c)?;
                        t.rollback_if(amount, c)
                    }
                    (Some(a), None) => {
                        let v = const_eval(expr_arg(a)?)
                            .ok_or_else(|| ModelError::at(a.span, "times must be a constant"))?;
                        if v.is_infinite() && v > 0.0 {
                            t.rollback(amount, None)
                        } else {
                            t.rollback(amount, Some(const_int(a, 0)? as u64))
                        }
                    }
                    (None, None) => t.rollback(amount, None),
                }
            }
            "batch" => {
                let n = const_int(args.require("n")?, 1)? as u64;
                let mut spec = BatchSpec::new(n);
                if let Some(a) = args.get("timeout")? {
                    spec = spec.timeout(self.num(a)?);
                }
                if let Some(a) = args.get("permanent")? {
                    spec = spec.permanent(bool_lit(a)?);
                }
                if let Some(a) = args.get("name")? {
                    spec = spec.name(word(a)?);
                }
                if let Some(a) = args.get("rule")? {
                    spec = spec.rule(self.truth(a)?);
                }
                t.batch(spec)
            }
            "separate" => t.separate(),
            "send" => {
                let s = words(args.require("signals")?)?;
                let d = match args.get("delay")? {
                    Some(a) => self.num(a)?,
                    None => Param::Const(0.0),
                };
                t.send(s, d)
            }
            "trap" => {
                let s = words(args.require("signals")?)?;
                let handler = match args.get("handler")? {
                    Some(a) => Some(self.traj(&a.value, a.span)?),
                    None => None,
                };
                let interruptible = match args.get("interruptible")? {
                    Some(a) => bool_lit(a)?,
                    None => true,
                };
                t.trap(s, handler, interruptible)
            }
            "untrap" => {
                let s = words(args.require("signals")?)?;
                t.untrap(s)
            }
            "wait" => t.wait(),
            "leave" => {
                let p = self.num(args.require("prob")?)?;
                t.leave(p)
            }
            "renege_in" => {
                let d = self.num(args.require("t")?)?;
                let out = match args.get("out")? {
                    Some(a) => Some(self.traj(&a.value, a.span)?),
                    None => None,
                };
                t.renege_in(d, out)
            }
            "renege_if" => {
                let s = word(args.require("signal")?)?;
                let out = match args.get("out")? {
                    Some(a) => Some(self.traj(&a.value, a.span)?),
                    None => None,
                };
                t.renege_if(s, out)
            }
            "renege_abort" => t.renege_abort(),
            other => return Err(ModelError::at(act.span, format!("unknown activity '{other}'"))),
        };
        args.finish()?;
        Ok(t)
    }
}

fn is_text(e: &Expr) -> bool {
    match &e.kind {
        ExprKind::Str(_) => true,
        ExprKind::Binary(BinOp::Add, l, r) => is_text(l) || is_text(r),
        _ => false,
    }
}

enum Part {
    Lit(String),
    Num(Arc<CExpr>),
}

fn merge_literals(parts: Vec<Part>) -> Vec<Part> {
    let mut out: Vec<Part> = Vec::new();
    for p in parts {
        match (out.last_mut(), p) {
            (Some(Part::Lit(acc)), Part::Lit(s)) => acc.push_str(&s),
            (_, p) => out.push(p),
        }
    }
    out
}

fn to_distribution(d: &DistExpr) -> Distribution {
    match d {
        DistExpr::Exponential(r) => exponential(*r),
        DistExpr::Uniform(a, b) => uniform(*a, *b),
        DistExpr::Constant(c) => constant(*c),
        DistExpr::At(t) => at(t.clone()),
        DistExpr::From(s, inner) => from(*s, to_distribution(inner)),
        DistExpr::Batched(inner, m) => to_distribution(inner).batched(*m),
        DistExpr::Ref(..) => unreachable!("references are resolved before conversion"),
    }
}

fn scalar_draw(d: &DistExpr) -> Option<CExpr> {
    Some(match d {
        DistExpr::Exponential(r) => CExpr::Exponential(Box::new(CExpr::Const(*r))),
        DistExpr::Uniform(a, b) => {
            CExpr::Uniform(Box::new(CExpr::Const(*a)), Box::new(CExpr::Const(*b)))
        }
        DistExpr::Constant(c) => CExpr::Const(*c),
        _ => return None,
    })
}

#[derive(Debug, Clone, Copy)]
enum Gauge {
    Server,
    Queue,
    Capacity,
    QueueSize,
}

/// Compiled expression, evaluated against the running arrival.
#[derive(Debug)]
enum CExpr {
    Const(f64),
    Now,
    Runif,
    Exponential(Box<CExpr>),
    Uniform(Box<CExpr>, Box<CExpr>),
    Attribute(String),
    Global(String),
    Resource(Gauge, String),
    Generated(String),
    Neg(Box<CExpr>),
    Not(Box<CExpr>),
    Bin(BinOp, Box<CExpr>, Box<CExpr>),
    Fn1(fn(f64) -> f64, Box<CExpr>),
    Fn2(fn(f64, f64) -> f64, Box<CExpr>, Box<CExpr>),
    If(Box<CExpr>, Box<CExpr>, Box<CExpr>),
}

impl CExpr {
    /// Collapses pure arithmetic on constants.
    fn fold(self) -> CExpr {
        use CExpr::*;
        let k = |e: &CExpr| match e {
            Const(v) => Some(*v),
            _ => None,
        };
        match &self {
            Neg(x) => k(x).map_or(self, |v| Const(-v)),
            Not(x) => k(x).map_or(self, |v| Const(f64::from(u8::from(v == 0.0)))),
            Bin(op, a, b) => match (k(a), k(b)) {
                (Some(a), Some(b)) => Const(binop(*op, a, b)),
                _ => self,
            },
            Fn1(f, x) => match k(x) {
                Some(v) => Const(f(v)),
                None => self,
            },
            Fn2(f, a, b) => match (k(a), k(b)) {
                (Some(a), Some(b)) => Const(f(a, b)),
                _ => self,
            },
            If(..) => match self {
                If(c, a, b) => match k(&c) {
                    Some(c) if c != 0.0 => *a,
                    Some(_) => *b,
                    None => If(c, a, b),
                },
                _ => unreachable!(),
            },
            _ => self,
        }
    }

    fn eval(&self, ctx: &mut Ctx<'_>) -> f64 {
        use CExpr::*;
        match self {
            Const(v) => *v,
            Now => ctx.now(),
            Runif => ctx.runif(),
            Exponential(r) => {
                let r = r.eval(ctx);
                ctx.exponential(r)
            }
            Uniform(a, b) => {
                let (a, b) = (a.eval(ctx), b.eval(ctx));
                ctx.uniform(a, b)
            }
            Attribute(k) => ctx.get_attribute(k),
            Global(k) => ctx.get_global(k),
            Resource(g, r) => match g {
                Gauge::Server => ctx.server_count(r).map_or(f64::NAN, |v| v as f64),
                Gauge::Queue => ctx.queue_count(r).map_or(f64::NAN, |v| v as f64),
                Gauge::Capacity => ctx.capacity(r).map_or(f64::NAN, |v| v.as_f64()),
                Gauge::QueueSize => ctx.queue_size(r).map_or(f64::NAN, |v| v.as_f64()),
            },
            Generated(g) => ctx.n_generated(g).map_or(f64::NAN, |v| v as f64),
            Neg(x) => -x.eval(ctx),
            Not(x) => f64::from(u8::from(x.eval(ctx) == 0.0)),
            // evaluation order is left to right so random draws replay
            Bin(op, a, b) => {
                let a = a.eval(ctx);
                let b = b.eval(ctx);
                binop(*op, a, b)
            }
            Fn1(f, x) => f(x.eval(ctx)),
            Fn2(f, a, b) => {
                let a = a.eval(ctx);
                let b = b.eval(ctx);
                f(a, b)
            }
            If(c, a, b) => {
                if c.eval(ctx) != 0.0 {
                    a.eval(ctx)
                } else {
                    b.eval(ctx)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse_str;
    use super::*;

    fn model(src: &str) -> Result<Model, ModelError> {
        compile(parse_str(src)?)
    }

    #[test]
    fn constants_fold_to_fixed_parameters() {
        let m = model(
            "trajectory t { timeout(2 * 3 + 1) }\ngenerator g { trajectory = t, distribution = at(0) }",
        )
        .unwrap();
        let t = m.trajectory("g").unwrap();
        match t.get(0).unwrap() {
            Activity::Timeout { delay } => assert!(matches!(delay, Param::Const(v) if *v == 7.0)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn draws_stay_dynamic() {
        let m = model(
            "distribution s = exponential(4)\ntrajectory t { timeout(s) }\ngenerator g { trajectory = t, distribution = at(0) }",
        )
        .unwrap();
        match m.trajectory("g").unwrap().get(0).unwrap() {
            Activity::Timeout { delay } => assert!(!delay.is_const()),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_resource_is_located() {
        let e = model("resource a\ntrajectory t {\n  seize(b, 1)\n}").unwrap_err();
        assert_eq!((e.line, e.col), (3, 9));
        assert!(e.message.contains("unknown resource 'b'"));
    }

    #[test]
    fn trajectory_cycles_rejected() {
        let e = model("trajectory a { branch(1, b) }\ntrajectory b { branch(1, a) }").unwrap_err();
        assert!(e.message.contains("refers to itself"), "{}", e.message);
        let e = model("distribution d = batched(d, 2)").unwrap_err();
        assert!(e.message.contains("refers to itself"), "{}", e.message);
    }

    #[test]
    fn argument_errors() {
        assert!(model("trajectory t { timeout() }").unwrap_err().message.contains("needs argument 'delay'"));
        assert!(model("trajectory t { timeout(1, 2) }").unwrap_err().message.contains("too many"));
        assert!(model("trajectory t { timeout(1, bogus = 2) }").unwrap_err().message.contains("no argument 'bogus'"));
        assert!(model("trajectory t { frobnicate() }").unwrap_err().message.contains("unknown activity"));
        assert!(model("trajectory t { timeout(nope) }").unwrap_err().message.contains("unknown name"));
        assert!(model("trajectory t { timeout(delay = 1, 2) }").is_err());
    }

    #[test]
    fn named_trajectories_are_copied() {
        let m = model(
            "trajectory inner { timeout(1) }\ntrajectory outer { branch(1, inner), branch(1, inner) }\ngenerator g { trajectory = outer, distribution = at(0) }",
        )
        .unwrap();
        assert_eq!(m.trajectory("g").unwrap().total_activities(), 4);
    }
}
