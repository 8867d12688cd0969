//! Characteristic analysis of linear second-order PDEs in two variables.

pub mod canonical;
pub mod chars;
pub mod corpus;
pub mod expr;
pub mod factor;
pub mod pde;
pub mod plot;
mod ser;
pub mod scalar;
pub mod solutions;

pub use expr::{Expr, VarPair};
pub use scalar::Scalar;

pub type Region = expr::SampleRegion<f64>;
pub type Oracle = expr::OracleConfig<f64>;
pub type Region32 = expr::SampleRegion<f32>;
pub type Oracle32 = expr::OracleConfig<f32>;
