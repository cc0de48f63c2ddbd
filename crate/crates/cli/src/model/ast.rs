//! Syntax tree of a model file.
//!
//! Spans record where each node came from. They never take part in
//! equality, so a printed and re-parsed model compares equal to the
//! original.

use trajsim::resource::{Limit, PreemptOrder};

#[derive(Debug, Clone, Copy, Default)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl PartialEq for Span {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ModelFile {
    pub meta: Meta,
    pub resources: Vec<ResourceDecl>,
    pub distributions: Vec<DistDecl>,
    pub trajectories: Vec<TrajDecl>,
    pub generators: Vec<GenDecl>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Meta {
    pub name: String,
    pub seed: u64,
    pub horizon: Option<f64>,
    pub replications: usize,
    pub analytic: Option<Analytic>,
}

impl Default for Meta {
    fn default() -> Self {
        Meta {
            name: "anonymous".to_string(),
            seed: 0,
            horizon: None,
            replications: 1,
            analytic: None,
        }
    }
}

/// Queueing model tag enabling the analytic comparison in reports.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Analytic {
    Mm1 { lambda: f64, mu: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResourceDecl {
    pub name: String,
    pub capacity: Limit,
    pub queue_size: Limit,
    pub preemptive: bool,
    pub preempt_order: PreemptOrder,
    pub queue_size_strict: bool,
    pub monitored: bool,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistDecl {
    pub name: String,
    pub dist: DistExpr,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DistExpr {
    Exponential(f64),
    Uniform(f64, f64),
    Constant(f64),
    At(Vec<f64>),
    From(f64, Box<DistExpr>),
    Batched(Box<DistExpr>, usize),
    Ref(String, Span),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajDecl {
    pub name: String,
    pub body: Vec<Act>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenDecl {
    pub name: String,
    pub trajectory: Value,
    pub distribution: DistExpr,
    pub mon: u8,
    pub priority: i64,
    pub preemptible: i64,
    pub restart: bool,
    pub span: Span,
}

/// One activity: `kind(arg, key = arg, ...)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Act {
    pub kind: String,
    pub args: Vec<Arg>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Arg {
    pub key: Option<String>,
    pub value: Value,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Expr(Expr),
    List(Vec<Value>),
    /// An anonymous sub-trajectory.
    Block(Vec<Act>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Num(f64),
    Str(String),
    Bool(bool),
    Ident(String),
    Call(String, Vec<Expr>),
    Neg(Box<Expr>),
    Not(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Or,
    And,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne => 3,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div => 6,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Or => "||",
            BinOp::And => "&&",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }
}

impl Expr {
    pub fn num(v: f64) -> Expr {
        Expr {
            kind: ExprKind::Num(v),
            span: Span::default(),
        }
    }

    pub fn as_ident(&self) -> Option<&str> {
        match &self.kind {
            ExprKind::Ident(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match &self.kind {
            ExprKind::Str(s) => Some(s),
            _ => None,
        }
    }
}

impl Value {
    pub fn span(&self) -> Option<Span> {
        match self {
            Value::Expr(e) => Some(e.span),
            _ => None,
        }
    }
}
