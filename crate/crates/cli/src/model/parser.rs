use std::path::{Path, PathBuf};

use trajsim::resource::{Limit, PreemptOrder};

use super::ast::*;
use super::lexer::{tokenize, Tok};
use super::ModelError;

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
}

/// A `key = value` entry of a declaration block.
struct Prop {
    key: String,
    value: Value,
    span: Span,
}

enum Item {
    Model(Meta),
    Resource(ResourceDecl),
    Distribution(DistDecl),
    Trajectory(TrajDecl),
    Generator(GenDecl),
    Include(String, Span),
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, Span) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<Span, ModelError> {
        if self.peek() == &t {
            Ok(self.bump().1)
        } else {
            Err(self.unexpected(what))
        }
    }

    fn unexpected(&self, what: &str) -> ModelError {
        ModelError::at(
            self.span(),
            format!("expected {what}, found {}", self.peek().describe()),
        )
    }

    fn ident(&mut self, what: &str) -> Result<(String, Span), ModelError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let sp = self.bump().1;
                Ok((s, sp))
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn items(&mut self) -> Result<Vec<Item>, ModelError> {
        let mut items = Vec::new();
        while self.peek() != &Tok::Eof {
            while self.eat(&Tok::Comma) {}
            if self.peek() == &Tok::Eof {
                break;
            }
            items.push(self.item()?);
        }
        Ok(items)
    }

    fn item(&mut self) -> Result<Item, ModelError> {
        let (kw, span) = self.ident("a declaration")?;
        match kw.as_str() {
            "model" => {
                let mut meta = Meta::default();
                match self.peek().clone() {
                    Tok::Str(s) | Tok::Ident(s) => {
                        self.bump();
                        meta.name = s;
                    }
                    _ => {}
                }
                for p in self.props()? {
                    match p.key.as_str() {
                        "seed" => {
                            let v = num(&p)?;
                            if v < 0.0 || v.fract() != 0.0 {
                                return Err(ModelError::at(p.span, "seed must be a non-negative integer"));
                            }
                            meta.seed = v as u64;
                        }
                        "horizon" => {
                            let v = num(&p)?;
                            if v.is_nan() || v < 0.0 {
                                return Err(ModelError::at(p.span, "horizon must be non-negative"));
                            }
                            meta.horizon = Some(v);
                        }
                        "replications" => meta.replications = count(&p, 1)? as usize,
                        "analytic" => meta.analytic = Some(analytic(&p)?),
                        other => return Err(unknown_key(other, "model", p.span)),
                    }
                }
                Ok(Item::Model(meta))
            }
            "resource" => {
                let (name, _) = self.ident("a resource name")?;
                let mut r = ResourceDecl {
                    name,
                    capacity: Limit::Finite(1),
                    queue_size: Limit::Infinite,
                    preemptive: false,
                    preempt_order: PreemptOrder::Fifo,
                    queue_size_strict: false,
                    monitored: true,
                    span,
                };
                if self.peek() == &Tok::LBrace {
                    for p in self.props()? {
                        match p.key.as_str() {
                            "capacity" => r.capacity = limit(&p)?,
                            "queue_size" => r.queue_size = limit(&p)?,
                            "preemptive" => r.preemptive = boolean(&p)?,
                            "queue_size_strict" => r.queue_size_strict = boolean(&p)?,
                            "mon" => r.monitored = boolean(&p)?,
                            "preempt_order" => {
                                r.preempt_order = match word(&p)?.as_str() {
                                    "fifo" => PreemptOrder::Fifo,
                                    "lifo" => PreemptOrder::Lifo,
                                    other => {
                                        return Err(ModelError::at(
                                            p.span,
                                            format!("preempt_order must be fifo or lifo, not '{other}'"),
                                        ))
                                    }
                                }
                            }
                            other => return Err(unknown_key(other, "resource", p.span)),
                        }
                    }
                }
                Ok(Item::Resource(r))
            }
            "distribution" => {
                let (name, _) = self.ident("a distribution name")?;
                self.expect(Tok::Assign, "'='")?;
                let v = self.value()?;
                Ok(Item::Distribution(DistDecl {
                    name,
                    dist: dist_expr(&v, span)?,
                    span,
                }))
            }
            "trajectory" => {
                let (name, _) = self.ident("a trajectory name")?;
                let body = self.block()?;
                Ok(Item::Trajectory(TrajDecl { name, body, span }))
            }
            "generator" => {
                let (name, _) = self.ident("a generator name")?;
                let mut trajectory = None;
                let mut distribution = None;
                let mut g = GenDecl {
                    name,
                    trajectory: Value::Block(Vec::new()),
                    distribution: DistExpr::Constant(1.0),
                    mon: 1,
                    priority: 0,
                    preemptible: 0,
                    restart: false,
                    span,
                };
                let mut preemptible = None;
                for p in self.props()? {
                    match p.key.as_str() {
                        "trajectory" => match &p.value {
                            Value::Block(_) => trajectory = Some(p.value),
                            Value::Expr(e) if e.as_ident().is_some() => trajectory = Some(p.value),
                            _ => return Err(ModelError::at(p.span, "trajectory must be a name or a { ... } block")),
                        },
                        "distribution" => distribution = Some(dist_expr(&p.value, p.span)?),
                        "mon" => {
                            let v = count(&p, 0)?;
                            if v > 2 {
                                return Err(ModelError::at(p.span, "mon must be 0, 1 or 2"));
                            }
                            g.mon = v as u8;
                        }
                        "priority" => g.priority = integer(&p)?,
                        "preemptible" => preemptible = Some(integer(&p)?),
                        "restart" => g.restart = boolean(&p)?,
                        other => return Err(unknown_key(other, "generator", p.span)),
                    }
                }
                g.trajectory = trajectory
                    .ok_or_else(|| ModelError::at(span, format!("generator '{}' needs a trajectory", g.name)))?;
                g.distribution = distribution
                    .ok_or_else(|| ModelError::at(span, format!("generator '{}' needs a distribution", g.name)))?;
                g.preemptible = preemptible.unwrap_or(g.priority);
                if g.preemptible < g.priority {
                    return Err(ModelError::at(span, "preemptible must be >= priority"));
                }
                Ok(Item::Generator(g))
            }
            "include" => match self.bump() {
                (Tok::Str(path), _) => Ok(Item::Include(path, span)),
                (t, sp) => Err(ModelError::at(sp, format!("expected a file name, found {}", t.describe()))),
            },
            other => Err(ModelError::at(span, format!("unknown declaration '{other}'"))),
        }
    }

    fn props(&mut self) -> Result<Vec<Prop>, ModelError> {
        self.expect(Tok::LBrace, "'{'")?;
        let mut props: Vec<Prop> = Vec::new();
        loop {
            while self.eat(&Tok::Comma) {}
            if self.eat(&Tok::RBrace) {
                return Ok(props);
            }
            let (key, span) = self.ident("a property name or '}'")?;
            if props.iter().any(|p| p.key == key) {
                return Err(ModelError::at(span, format!("property '{key}' given twice")));
            }
            self.expect(Tok::Assign, "'='")?;
            let value = self.value()?;
            props.push(Prop { key, value, span });
        }
    }

    fn block(&mut self) -> Result<Vec<Act>, ModelError> {
        self.expect(Tok::LBrace, "'{'")?;
        let mut acts = Vec::new();
        loop {
            while self.eat(&Tok::Comma) {}
            if self.eat(&Tok::RBrace) {
                return Ok(acts);
            }
            acts.push(self.activity()?);
        }
    }

    fn activity(&mut self) -> Result<Act, ModelError> {
        let (kind, span) = self.ident("an activity or '}'")?;
        let mut args = Vec::new();
        if self.eat(&Tok::LParen) {
            loop {
                if self.eat(&Tok::RParen) {
                    break;
                }
                let sp = self.span();
                let key = match (self.peek(), &self.toks.get(self.pos + 1).map(|t| &t.0)) {
                    (Tok::Ident(k), Some(Tok::Assign)) => {
                        let k = k.clone();
                        self.bump();
                        self.bump();
                        Some(k)
                    }
                    _ => None,
                };
                let value = self.value()?;
                args.push(Arg { key, value, span: sp });
                if !self.eat(&Tok::Comma) {
                    self.expect(Tok::RParen, "',' or ')'")?;
                    break;
                }
            }
        }
        Ok(Act { kind, args, span })
    }

    fn value(&mut self) -> Result<Value, ModelError> {
        match self.peek() {
            Tok::LBrace => Ok(Value::Block(self.block()?)),
            Tok::LBracket => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    if self.eat(&Tok::RBracket) {
                        break;
                    }
                    items.push(self.value()?);
                    if !self.eat(&Tok::Comma) {
                        self.expect(Tok::RBracket, "',' or ']'")?;
                        break;
                    }
                }
                Ok(Value::List(items))
            }
            _ => Ok(Value::Expr(self.expr(0)?)),
        }
    }

    fn expr(&mut self, min_prec: u8) -> Result<Expr, ModelError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::OrOr => BinOp::Or,
                Tok::AndAnd => BinOp::And,
                Tok::EqEq => BinOp::Eq,
                Tok::Ne => BinOp::Ne,
                Tok::Lt => BinOp::Lt,
                Tok::Le => BinOp::Le,
                Tok::Gt => BinOp::Gt,
                Tok::Ge => BinOp::Ge,
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            if op.precedence() <= min_prec {
                return Ok(lhs);
            }
            let span = self.bump().1;
            let rhs = self.expr(op.precedence())?;
            lhs = Expr {
                kind: ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)),
                span,
            };
        }
    }

    fn unary(&mut self) -> Result<Expr, ModelError> {
        let span = self.span();
        if self.eat(&Tok::Minus) {
            let inner = self.unary()?;
            return Ok(Expr {
                kind: ExprKind::Neg(Box::new(inner)),
                span,
            });
        }
        if self.eat(&Tok::Bang) {
            let inner = self.unary()?;
            return Ok(Expr {
                kind: ExprKind::Not(Box::new(inner)),
                span,
            });
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, ModelError> {
        let (tok, span) = self.bump();
        let kind = match tok {
            Tok::Num(v) => ExprKind::Num(v),
            Tok::Str(s) => ExprKind::Str(s),
            Tok::LParen => {
                let e = self.expr(0)?;
                self.expect(Tok::RParen, "')'")?;
                return Ok(e);
            }
            Tok::Ident(name) => match name.as_str() {
                "true" | "TRUE" => ExprKind::Bool(true),
                "false" | "FALSE" => ExprKind::Bool(false),
                _ if self.peek() == &Tok::LParen => {
                    self.bump();
                    let mut args = Vec::new();
                    loop {
                        if self.eat(&Tok::RParen) {
                            break;
                        }
                        args.push(self.expr(0)?);
                        if !self.eat(&Tok::Comma) {
                            self.expect(Tok::RParen, "',' or ')'")?;
                            break;
                        }
                    }
                    ExprKind::Call(name, args)
                }
                _ => ExprKind::Ident(name),
            },
            other => {
                return Err(ModelError::at(
                    span,
                    format!("expected a value, found {}", other.describe()),
                ))
            }
        };
        Ok(Expr { kind, span })
    }
}

/// Evaluates an expression made only of literals and arithmetic.
pub fn const_eval(e: &Expr) -> Option<f64> {
    Some(match &e.kind {
        ExprKind::Num(v) => *v,
        ExprKind::Bool(b) => f64::from(u8::from(*b)),
        ExprKind::Ident(s) if s == "inf" || s == "Inf" => f64::INFINITY,
        ExprKind::Neg(x) => -const_eval(x)?,
        ExprKind::Not(x) => f64::from(u8::from(const_eval(x)? == 0.0)),
        ExprKind::Binary(op, a, b) => binop(*op, const_eval(a)?, const_eval(b)?),
        _ => return None,
    })
}

pub fn binop(op: BinOp, a: f64, b: f64) -> f64 {
    let t = |c: bool| f64::from(u8::from(c));
    match op {
        BinOp::Or => t(a != 0.0 || b != 0.0),
        BinOp::And => t(a != 0.0 && b != 0.0),
        BinOp::Eq => t(a == b),
        BinOp::Ne => t(a != b),
        BinOp::Lt => t(a < b),
        BinOp::Le => t(a <= b),
        BinOp::Gt => t(a > b),
        BinOp::Ge => t(a >= b),
        BinOp::Add => a + b,
        BinOp::Sub => a - b,
        BinOp::Mul => a * b,
        BinOp::Div => a / b,
    }
}

fn unknown_key(key: &str, what: &str, span: Span) -> ModelError {
    ModelError::at(span, format!("unknown {what} property '{key}'"))
}

fn expr_of(p: &Prop) -> Result<&Expr, ModelError> {
    match &p.value {
        Value::Expr(e) => Ok(e),
        _ => Err(ModelError::at(p.span, format!("'{}' needs a single value", p.key))),
    }
}

fn num(p: &Prop) -> Result<f64, ModelError> {
    const_eval(expr_of(p)?)
        .ok_or_else(|| ModelError::at(p.span, format!("'{}' must be a constant number", p.key)))
}

fn count(p: &Prop, min: u64) -> Result<u64, ModelError> {
    let v = num(p)?;
    if v.fract() != 0.0 || v < min as f64 || v.is_infinite() {
        return Err(ModelError::at(
            p.span,
            format!("'{}' must be an integer >= {min}, got {v}", p.key),
        ));
    }
    Ok(v as u64)
}

fn integer(p: &Prop) -> Result<i64, ModelError> {
    let v = num(p)?;
    if v.fract() != 0.0 || !v.is_finite() {
        return Err(ModelError::at(p.span, format!("'{}' must be an integer", p.key)));
    }
    Ok(v as i64)
}

fn limit(p: &Prop) -> Result<Limit, ModelError> {
    let v = num(p)?;
    if v.is_infinite() && v > 0.0 {
        return Ok(Limit::Infinite);
    }
    if v.fract() != 0.0 || v < 0.0 {
        return Err(ModelError::at(
            p.span,
            format!("'{}' must be a non-negative integer or inf, got {v}", p.key),
        ));
    }
    Ok(Limit::Finite(v as u64))
}

fn boolean(p: &Prop) -> Result<bool, ModelError> {
    match &expr_of(p)?.kind {
        ExprKind::Bool(b) => Ok(*b),
        _ => Err(ModelError::at(p.span, format!("'{}' must be true or false", p.key))),
    }
}

fn word(p: &Prop) -> Result<String, ModelError> {
    let e = expr_of(p)?;
    e.as_ident()
        .or(e.as_str())
        .map(str::to_string)
        .ok_or_else(|| ModelError::at(p.span, format!("'{}' must be a name", p.key)))
}

fn analytic(p: &Prop) -> Result<Analytic, ModelError> {
    if let ExprKind::Call(name, args) = &expr_of(p)?.kind {
        if name == "mm1" && args.len() == 2 {
            let lambda = const_eval(&args[0]);
            let mu = const_eval(&args[1]);
            if let (Some(lambda), Some(mu)) = (lambda, mu) {
                if lambda > 0.0 && mu > 0.0 {
                    return Ok(Analytic::Mm1 { lambda, mu });
                }
                return Err(ModelError::at(p.span, "mm1 rates must be positive"));
            }
        }
    }
    Err(ModelError::at(p.span, "analytic must be mm1(lambda, mu)"))
}

pub fn dist_expr(v: &Value, span: Span) -> Result<DistExpr, ModelError> {
    let e = match v {
        Value::Expr(e) => e,
        _ => return Err(ModelError::at(span, "expected a distribution")),
    };
    let span = e.span;
    let (name, args) = match &e.kind {
        ExprKind::Ident(n) => return Ok(DistExpr::Ref(n.clone(), span)),
        ExprKind::Call(n, a) => (n.as_str(), a),
        _ => return Err(ModelError::at(span, "expected a distribution")),
    };
    let consts = |lo: usize, hi: usize| -> Result<Vec<f64>, ModelError> {
        if args.len() < lo || args.len() > hi {
            return Err(ModelError::at(span, format!("wrong number of arguments to {name}")));
        }
        args.iter()
            .map(|a| {
                const_eval(a).ok_or_else(|| ModelError::at(a.span, "distribution arguments must be constant"))
            })
            .collect()
    };
    let positive = |v: f64, what: &str| -> Result<f64, ModelError> {
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(ModelError::at(span, format!("{what} must be positive, got {v}")))
        }
    };
    Ok(match name {
        "exponential" => DistExpr::Exponential(positive(consts(1, 1)?[0], "rate")?),
        "uniform" => {
            let v = consts(2, 2)?;
            if !(v[0] <= v[1]) {
                return Err(ModelError::at(span, "uniform needs a <= b"));
            }
            DistExpr::Uniform(v[0], v[1])
        }
        "constant" => {
            let v = consts(1, 1)?[0];
            if v.is_nan() || v < 0.0 {
                return Err(ModelError::at(span, "constant gap must be non-negative"));
            }
            DistExpr::Constant(v)
        }
        "at" => {
            let v = consts(0, usize::MAX)?;
            if v.windows(2).any(|w| w[1] < w[0]) || v.iter().any(|t| t.is_nan() || *t < 0.0) {
                return Err(ModelError::at(span, "at() times must be non-negative and non-decreasing"));
            }
            DistExpr::At(v)
        }
        "from" | "batched" => {
            if args.len() != 2 {
                return Err(ModelError::at(span, format!("{name} takes two arguments")));
            }
            let (c, d) = if name == "from" { (&args[0], &args[1]) } else { (&args[1], &args[0]) };
            let c = const_eval(c).ok_or_else(|| ModelError::at(c.span, "expected a constant"))?;
            let inner = Box::new(dist_expr(&Value::Expr(d.clone()), span)?);
            if name == "from" {
                if c.is_nan() || c < 0.0 {
                    return Err(ModelError::at(span, "from() start must be non-negative"));
                }
                DistExpr::From(c, inner)
            } else {
                if c < 1.0 || c.fract() != 0.0 {
                    return Err(ModelError::at(span, "batch size must be a positive integer"));
                }
                DistExpr::Batched(inner, c as usize)
            }
        }
        other => return Err(ModelError::at(span, format!("unknown distribution '{other}'"))),
    })
}

/// Parses a model file, following includes relative to the including file.
pub fn parse_file(path: &Path) -> Result<ModelFile, ModelError> {
    let mut model = ModelFile::default();
    let mut stack = Vec::new();
    let mut seen_meta = false;
    load(path, &mut stack, &mut model, &mut seen_meta)?;
    Ok(model)
}

/// Parses model text that may not include other files.
pub fn parse_str(src: &str) -> Result<ModelFile, ModelError> {
    let mut model = ModelFile::default();
    let mut seen_meta = false;
    for item in parse_items(src)? {
        if let Item::Include(_, span) = item {
            return Err(ModelError::at(span, "include is only allowed in files"));
        }
        merge(&mut model, item, &mut seen_meta)?;
    }
    Ok(model)
}

fn parse_items(src: &str) -> Result<Vec<Item>, ModelError> {
    let toks = tokenize(src)?;
    Parser { toks, pos: 0 }.items()
}

fn load(
    path: &Path,
    stack: &mut Vec<PathBuf>,
    model: &mut ModelFile,
    seen_meta: &mut bool,
) -> Result<(), ModelError> {
    let canon = path.canonicalize().unwrap_or_else(|_| path.to_path_buf());
    if stack.contains(&canon) {
        return Err(ModelError::io(path, "include cycle"));
    }
    let src = std::fs::read_to_string(path).map_err(|e| ModelError::io(path, e.to_string()))?;
    let items = parse_items(&src).map_err(|e| e.in_file(path))?;
    stack.push(canon);
    for item in items {
        match item {
            Item::Include(rel, span) => {
                let target = path.parent().unwrap_or(Path::new(".")).join(&rel);
                if !target.exists() {
                    return Err(ModelError::at(span, format!("included file '{rel}' not found")).in_file(path));
                }
                load(&target, stack, model, seen_meta)?;
            }
            other => merge(model, other, seen_meta).map_err(|e| e.in_file(path))?,
        }
    }
    stack.pop();
    Ok(())
}

fn merge(model: &mut ModelFile, item: Item, seen_meta: &mut bool) -> Result<(), ModelError> {
    let clash = |name: &str, span: Span, taken: bool| {
        if taken {
            Err(ModelError::at(span, format!("'{name}' is declared twice")))
        } else {
            Ok(())
        }
    };
    match item {
        Item::Model(meta) => {
            if *seen_meta {
                return Err(ModelError::at(Span { line: 1, col: 1 }, "more than one model block"));
            }
            *seen_meta = true;
            model.meta = meta;
        }
        Item::Resource(r) => {
            let taken = model.resources.iter().any(|x| x.name == r.name)
                || model.generators.iter().any(|g| g.name == r.name);
            clash(&r.name, r.span, taken)?;
            model.resources.push(r);
        }
        Item::Distribution(d) => {
            clash(&d.name, d.span, model.distributions.iter().any(|x| x.name == d.name))?;
            model.distributions.push(d);
        }
        Item::Trajectory(t) => {
            clash(&t.name, t.span, model.trajectories.iter().any(|x| x.name == t.name))?;
            model.trajectories.push(t);
        }
        Item::Generator(g) => {
            let taken = model.generators.iter().any(|x| x.name == g.name)
                || model.resources.iter().any(|r| r.name == g.name);
            clash(&g.name, g.span, taken)?;
            model.generators.push(g);
        }
        Item::Include(..) => unreachable!("includes are expanded by the caller"),
    }
    Ok(())
}
