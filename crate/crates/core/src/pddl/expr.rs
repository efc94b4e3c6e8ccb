use super::fluent::{Fluent, ValueType};
use serde::{Serialize, Serializer};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Gt,
    Lt,
    Eq,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Gt => ">",
            CmpOp::Lt => "<",
            CmpOp::Eq => "=",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
            ArithOp::Div => "/",
        }
    }
}

/// Typed expression tree for the goal/metric/precondition fragment.
///
/// Construct through the parser; it enforces arities and types. `Cmp`
/// operands are both numeric, or both boolean for `=`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    And(Vec<Expr>),
    Or(Vec<Expr>),
    Not(Box<Expr>),
    Cmp(CmpOp, Box<Expr>, Box<Expr>),
    Arith(ArithOp, Vec<Expr>),
    Literal(f64),
    Fluent(Fluent),
}

impl Expr {
    pub fn value_type(&self) -> ValueType {
        match self {
            Expr::And(_) | Expr::Or(_) | Expr::Not(_) | Expr::Cmp(..) => ValueType::Bool,
            Expr::Arith(..) | Expr::Literal(_) => ValueType::Num,
            Expr::Fluent(f) => f.value_type(),
        }
    }

    /// Every fluent referenced by the expression, in first-use order.
    pub fn fluents(&self) -> Vec<Fluent> {
        let mut out = Vec::new();
        self.collect_fluents(&mut out);
        out
    }

    fn collect_fluents(&self, out: &mut Vec<Fluent>) {
        match self {
            Expr::And(xs) | Expr::Or(xs) | Expr::Arith(_, xs) => xs.iter().for_each(|x| x.collect_fluents(out)),
            Expr::Not(x) => x.collect_fluents(out),
            Expr::Cmp(_, a, b) => {
                a.collect_fluents(out);
                b.collect_fluents(out);
            }
            Expr::Literal(_) => {}
            Expr::Fluent(f) => {
                if !out.contains(f) {
                    out.push(*f)
                }
            }
        }
    }
}

fn write_list(f: &mut fmt::Formatter<'_>, head: &str, xs: &[Expr]) -> fmt::Result {
    write!(f, "({head}")?;
    for x in xs {
        write!(f, " {x}")?;
    }
    f.write_str(")")
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::And(xs) => write_list(f, "and", xs),
            Expr::Or(xs) => write_list(f, "or", xs),
            Expr::Not(x) => write!(f, "(not {x})"),
            Expr::Cmp(op, a, b) => write!(f, "({} {a} {b})", op.symbol()),
            Expr::Arith(op, xs) => write_list(f, op.symbol(), xs),
            // `{}` on f64 prints the shortest string that reads back exactly.
            Expr::Literal(v) => write!(f, "{v}"),
            Expr::Fluent(fl) => f.write_str(fl.name()),
        }
    }
}

impl Serialize for Expr {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// A goal-metric pair: a boolean goal and a numeric metric to minimize.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoalMetric {
    pub id: u32,
    pub original_id: Option<u32>,
    pub goal: Expr,
    pub metric: Expr,
}

impl GoalMetric {
    pub fn goal_text(&self) -> String {
        format!("(:goal {})", self.goal)
    }

    pub fn metric_text(&self) -> String {
        format!("(:metric minimize {})", self.metric)
    }
}
