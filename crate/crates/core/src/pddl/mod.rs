//! The PDDL expression fragment used for goals, metrics and action
//! preconditions: parsing, typing, evaluation, catalogs and action masks.

mod catalog;
mod eval;
mod expr;
mod fluent;
mod mask;
mod parser;

pub use catalog::{load_catalog, validate_catalog_json, Catalog, CatalogError, RecordStatus};
pub use eval::{eval_bool, eval_num};
pub use expr::{ArithOp, CmpOp, Expr, GoalMetric};
pub use fluent::{registry_markdown, EpisodeFluents, Fluent, FluentSource, MaskContext, Scope, StateFacts, ValueType};
pub use mask::{default_preconditions, mask_actions, ActionMask, ActionPrecondition, DEFAULT_PRECONDITIONS};
pub use parser::{
    parse_expr, parse_goal, parse_metric, parse_precondition, FluentScope, ParseError, ParseErrorKind, Pos,
};
