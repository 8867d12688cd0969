//! Symbolic expression kernel.

mod diff;
mod eval;
mod integrate;
mod oracle;
mod parse;
mod poly;
mod print;
mod simplify;
mod tree;

pub use eval::{EvalError, FaultKind};
pub use integrate::{antiderivative, integrating_factor};
pub use oracle::{
    check_zero, equiv, equiv_zero, nonvanishing, sign_on, OracleConfig, OracleError, SampleRegion, ZeroReport,
    DEFAULT_SEED, SEED_ENV,
};
pub use parse::{parse_equation, parse_equation_in, parse_expr, ParseError, ParseErrorKind, Slot};
pub use poly::sqrt_exact;
pub use tree::{Expr, Func, Node, Rational, VarPair};

