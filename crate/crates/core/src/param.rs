use std::fmt;
use std::sync::Arc;

use crate::sim::Ctx;

/// An activity parameter: a fixed value or a function evaluated each time
/// the activity runs.
pub enum Param<T> {
    Const(T),
    Dyn(Arc<dyn Fn(&mut Ctx<'_>) -> T + Send + Sync>),
}

impl<T> Param<T> {
    pub fn dynamic<F>(f: F) -> Self
    where
        F: Fn(&mut Ctx<'_>) -> T + Send + Sync + 'static,
    {
        Param::Dyn(Arc::new(f))
    }

    pub fn is_const(&self) -> bool {
        matches!(self, Param::Const(_))
    }
}

impl<T: Clone> Param<T> {
    pub fn eval(&self, ctx: &mut Ctx<'_>) -> T {
        match self {
            Param::Const(v) => v.clone(),
            Param::Dyn(f) => f(ctx),
        }
    }
}

impl<T: Clone> Clone for Param<T> {
    fn clone(&self) -> Self {
        match self {
            Param::Const(v) => Param::Const(v.clone()),
            Param::Dyn(f) => Param::Dyn(Arc::clone(f)),
        }
    }
}

impl<T: fmt::Debug> fmt::Debug for Param<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Param::Const(v) => v.fmt(f),
            Param::Dyn(_) => f.write_str("function()"),
        }
    }
}

/// Renders a constant through `show`, a function as `function()`.
pub(crate) fn show<T>(p: &Param<T>, show: impl Fn(&T) -> String) -> String {
    match p {
        Param::Const(v) => show(v),
        Param::Dyn(_) => "function()".to_string(),
    }
}

impl From<f64> for Param<f64> {
    fn from(v: f64) -> Self {
        Param::Const(v)
    }
}

impl From<i32> for Param<f64> {
    fn from(v: i32) -> Self {
        Param::Const(v as f64)
    }
}

impl From<u64> for Param<u64> {
    fn from(v: u64) -> Self {
        Param::Const(v)
    }
}

impl From<i32> for Param<u64> {
    fn from(v: i32) -> Self {
        Param::Const(v.max(0) as u64)
    }
}

impl From<i64> for Param<i64> {
    fn from(v: i64) -> Self {
        Param::Const(v)
    }
}

impl From<i32> for Param<i64> {
    fn from(v: i32) -> Self {
        Param::Const(v as i64)
    }
}

impl From<bool> for Param<bool> {
    fn from(v: bool) -> Self {
        Param::Const(v)
    }
}

impl From<&str> for Param<String> {
    fn from(v: &str) -> Self {
        Param::Const(v.to_string())
    }
}

impl From<String> for Param<String> {
    fn from(v: String) -> Self {
        Param::Const(v)
    }
}

impl From<&str> for Param<Vec<String>> {
    fn from(v: &str) -> Self {
        Param::Const(vec![v.to_string()])
    }
}

impl From<Vec<String>> for Param<Vec<String>> {
    fn from(v: Vec<String>) -> Self {
        Param::Const(v)
    }
}

impl<const N: usize> From<[&str; N]> for Param<Vec<String>> {
    fn from(v: [&str; N]) -> Self {
        Param::Const(v.iter().map(|s| s.to_string()).collect())
    }
}
