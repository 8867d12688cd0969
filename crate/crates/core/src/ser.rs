//! Serde helpers: expressions serialize as their pretty text.

use serde::Serializer;

use crate::expr::Expr;

pub fn expr<S: Serializer>(e: &Expr, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&e.pretty())
}

pub fn opt_expr<S: Serializer>(e: &Option<Expr>, s: S) -> Result<S::Ok, S::Error> {
    match e {
        Some(e) => s.serialize_some(&e.pretty()),
        None => s.serialize_none(),
    }
}
