//! Reader for the PDDL expression fragment.
//!
//! Text is first read into a positioned s-expression tree, then converted
//! into a typed [`Expr`]. Accepted top-level forms are `(:goal <bool>)`,
//! `(:metric minimize <num>)`, and bare expressions. Zero-ary applications
//! such as `(red-inactive)` and `(0)` are read as the bare atom.

use super::expr::{ArithOp, CmpOp, Expr};
use super::fluent::{Fluent, Scope, ValueType};
use std::fmt;
use thiserror::Error;

/// Location of a token in the source text (1-based line and column).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub offset: usize,
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("undeclared fluent `{0}`")]
    UndeclaredFluent(String),
    #[error("type mismatch: expected {expected}, found {found}")]
    TypeMismatch { expected: ValueType, found: ValueType },
    #[error("`{op}` takes {expected} operand(s), got {found}")]
    Arity {
        op: String,
        expected: &'static str,
        found: usize,
    },
    #[error("state fluent `{0}` is only allowed in action preconditions")]
    ScopeViolation(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{kind} at {pos}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub pos: Pos,
}

impl ParseError {
    fn new(kind: ParseErrorKind, pos: Pos) -> Self {
        ParseError { kind, pos }
    }

    fn syntax(msg: impl Into<String>, pos: Pos) -> Self {
        Self::new(ParseErrorKind::Syntax(msg.into()), pos)
    }
}

/// Which fluents an expression may reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FluentScope {
    /// Goals and metrics: episode fluents only.
    Episode,
    /// Action preconditions: episode and state fluents.
    Precondition,
}

#[derive(Debug, Clone, PartialEq)]
enum SExpr {
    Atom(String, Pos),
    List(Vec<SExpr>, Pos),
}

impl SExpr {
    fn pos(&self) -> Pos {
        match self {
            SExpr::Atom(_, p) | SExpr::List(_, p) => *p,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Open,
    Close,
    Atom(String),
}

fn tokenize(text: &str) -> Result<Vec<(Token, Pos)>, ParseError> {
    let mut out = Vec::new();
    let mut line = 1;
    let mut column = 1;
    let mut chars = text.char_indices().peekable();
    while let Some(&(offset, c)) = chars.peek() {
        let pos = Pos { offset, line, column };
        match c {
            '(' | ')' => {
                out.push((if c == '(' { Token::Open } else { Token::Close }, pos));
                chars.next();
                column += 1;
            }
            ';' => {
                // comment to end of line
                while let Some(&(_, c)) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                }
            }
            c if c.is_whitespace() => {
                chars.next();
                if c == '\n' {
                    line += 1;
                    column = 1;
                } else {
                    column += 1;
                }
            }
            _ => {
                let mut atom = String::new();
                while let Some(&(_, c)) = chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    atom.push(c);
                    chars.next();
                    column += 1;
                }
                out.push((Token::Atom(atom.to_ascii_lowercase()), pos));
            }
        }
    }
    Ok(out)
}

fn end_pos(text: &str) -> Pos {
    let line = text.lines().count().max(1);
    let column = text.lines().last().map_or(0, |l| l.chars().count()) + 1;
    Pos {
        offset: text.len(),
        line,
        column,
    }
}

fn read_sexpr(text: &str) -> Result<SExpr, ParseError> {
    let tokens = tokenize(text)?;
    let mut stack: Vec<(Vec<SExpr>, Pos)> = Vec::new();
    let mut done: Option<SExpr> = None;
    for (tok, pos) in tokens {
        if done.is_some() {
            return Err(ParseError::syntax("trailing input after expression", pos));
        }
        match tok {
            Token::Open => stack.push((Vec::new(), pos)),
            Token::Close => {
                let (items, open) = stack.pop().ok_or_else(|| ParseError::syntax("unbalanced `)`", pos))?;
                let list = SExpr::List(items, open);
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(list),
                    None => done = Some(list),
                }
            }
            Token::Atom(a) => {
                let atom = SExpr::Atom(a, pos);
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(atom),
                    None => done = Some(atom),
                }
            }
        }
    }
    if let Some((_, open)) = stack.last() {
        return Err(ParseError::syntax(
            format!("unclosed `(` opened at {open}"),
            end_pos(text),
        ));
    }
    done.ok_or_else(|| ParseError::syntax("empty input", end_pos(text)))
}

fn parse_number(atom: &str) -> Option<f64> {
    let first = atom.chars().next()?;
    if !(first.is_ascii_digit() || ((first == '-' || first == '+' || first == '.') && atom.len() > 1)) {
        return None;
    }
    atom.parse::<f64>().ok().filter(|v| v.is_finite())
}

struct Builder {
    scope: FluentScope,
}

impl Builder {
    fn atom(&self, name: &str, pos: Pos) -> Result<Expr, ParseError> {
        if let Some(v) = parse_number(name) {
            return Ok(Expr::Literal(v));
        }
        let fluent = Fluent::from_name(name)
            .ok_or_else(|| ParseError::new(ParseErrorKind::UndeclaredFluent(name.to_string()), pos))?;
        if self.scope == FluentScope::Episode && fluent.scope() == Scope::State {
            return Err(ParseError::new(ParseErrorKind::ScopeViolation(name.to_string()), pos));
        }
        Ok(Expr::Fluent(fluent))
    }

    fn typed(&self, s: &SExpr, want: ValueType) -> Result<Expr, ParseError> {
        let e = self.build(s)?;
        let found = e.value_type();
        if found != want {
            return Err(ParseError::new(
                ParseErrorKind::TypeMismatch { expected: want, found },
                s.pos(),
            ));
        }
        Ok(e)
    }

    fn all_typed(&self, xs: &[SExpr], want: ValueType) -> Result<Vec<Expr>, ParseError> {
        xs.iter().map(|x| self.typed(x, want)).collect()
    }

    fn build(&self, s: &SExpr) -> Result<Expr, ParseError> {
        let (items, pos) = match s {
            SExpr::Atom(a, pos) => return self.atom(a, *pos),
            SExpr::List(items, pos) => (items, *pos),
        };
        let (head, args) = match items.split_first() {
            Some((SExpr::Atom(h, _), args)) => (h.as_str(), args),
            Some((SExpr::List(..), _)) => return Err(ParseError::syntax("expected an operator or fluent name", pos)),
            None => return Err(ParseError::syntax("empty list", pos)),
        };
        let arity = |expected: &'static str| {
            Err(ParseError::new(
                ParseErrorKind::Arity {
                    op: head.to_string(),
                    expected,
                    found: args.len(),
                },
                pos,
            ))
        };
        match head {
            "and" | "or" => {
                if args.is_empty() {
                    return arity("at least 1");
                }
                let xs = self.all_typed(args, ValueType::Bool)?;
                Ok(if head == "and" { Expr::And(xs) } else { Expr::Or(xs) })
            }
            "not" => {
                if args.len() != 1 {
                    return arity("exactly 1");
                }
                Ok(Expr::Not(Box::new(self.typed(&args[0], ValueType::Bool)?)))
            }
            ">" | "<" | "=" => {
                if args.len() != 2 {
                    return arity("exactly 2");
                }
                let op = match head {
                    ">" => CmpOp::Gt,
                    "<" => CmpOp::Lt,
                    _ => CmpOp::Eq,
                };
                let lhs = self.build(&args[0])?;
                let want = if op == CmpOp::Eq {
                    lhs.value_type()
                } else {
                    ValueType::Num
                };
                if lhs.value_type() != want {
                    return Err(ParseError::new(
                        ParseErrorKind::TypeMismatch {
                            expected: want,
                            found: lhs.value_type(),
                        },
                        args[0].pos(),
                    ));
                }
                let rhs = self.typed(&args[1], want)?;
                Ok(Expr::Cmp(op, Box::new(lhs), Box::new(rhs)))
            }
            "+" | "-" | "*" | "/" => {
                let op = match head {
                    "+" => ArithOp::Add,
                    "-" => ArithOp::Sub,
                    "*" => ArithOp::Mul,
                    _ => ArithOp::Div,
                };
                if op == ArithOp::Div && args.len() != 2 {
                    return arity("exactly 2");
                }
                if args.len() < 2 {
                    return arity("at least 2");
                }
                Ok(Expr::Arith(op, self.all_typed(args, ValueType::Num)?))
            }
            _ => {
                // zero-ary application: `(fluent)` or `(number)`
                let inner = self.atom(head, items[0].pos())?;
                if !args.is_empty() {
                    return arity("no");
                }
                Ok(inner)
            }
        }
    }
}

fn expect_type(e: Expr, want: ValueType, pos: Pos) -> Result<Expr, ParseError> {
    let found = e.value_type();
    if found != want {
        return Err(ParseError::new(
            ParseErrorKind::TypeMismatch { expected: want, found },
            pos,
        ));
    }
    Ok(e)
}

/// Parses a goal, metric or bare expression and checks its type.
///
/// `(:goal ...)` must be boolean and `(:metric minimize ...)` numeric; a
/// wrapper that disagrees with `expected` is a type mismatch.
pub fn parse_expr(text: &str, expected: ValueType, scope: FluentScope) -> Result<Expr, ParseError> {
    let root = read_sexpr(text)?;
    let builder = Builder { scope };
    if let SExpr::List(items, pos) = &root {
        if let Some(SExpr::Atom(head, _)) = items.first() {
            match head.as_str() {
                ":goal" => {
                    if items.len() != 2 {
                        return Err(ParseError::syntax("`:goal` takes exactly one expression", *pos));
                    }
                    let e = builder.typed(&items[1], ValueType::Bool)?;
                    return expect_type(e, expected, *pos);
                }
                ":metric" => {
                    match items.get(1) {
                        Some(SExpr::Atom(dir, _)) if dir == "minimize" => {}
                        Some(other) => {
                            return Err(ParseError::syntax("only `minimize` metrics are supported", other.pos()))
                        }
                        None => return Err(ParseError::syntax("`:metric` needs a direction", *pos)),
                    }
                    if items.len() != 3 {
                        return Err(ParseError::syntax(
                            "`:metric minimize` takes exactly one expression",
                            *pos,
                        ));
                    }
                    let e = builder.typed(&items[2], ValueType::Num)?;
                    return expect_type(e, expected, *pos);
                }
                h if h.starts_with(':') => return Err(ParseError::syntax(format!("unsupported section `{h}`"), *pos)),
                _ => {}
            }
        }
    }
    let e = builder.build(&root)?;
    expect_type(e, expected, root.pos())
}

/// Parses a `(:goal ...)` form (or a bare boolean expression).
pub fn parse_goal(text: &str) -> Result<Expr, ParseError> {
    parse_expr(text, ValueType::Bool, FluentScope::Episode)
}

/// Parses a `(:metric minimize ...)` form (or a bare numeric expression).
pub fn parse_metric(text: &str) -> Result<Expr, ParseError> {
    parse_expr(text, ValueType::Num, FluentScope::Episode)
}

/// Parses an action precondition; state fluents are allowed.
pub fn parse_precondition(text: &str) -> Result<Expr, ParseError> {
    parse_expr(text, ValueType::Bool, FluentScope::Precondition)
}
