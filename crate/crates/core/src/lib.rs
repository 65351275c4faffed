//! Core of the Lambdix interpreter: a lexically scoped Lisp with call by
//! value and call by need, where each call gets a heap block and each
//! lambda structure carries a dynamic link to its current block.
//!
//! Needs only `alloc`. IO and the command line live in the `lambdix` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod analyzer;
pub mod builtins;
pub mod corpus;
pub mod env;
pub mod error;
pub mod eval;
pub mod gen;
pub mod oracle;
mod printer;
pub mod reader;
pub mod value;

pub use analyzer::{StructId, StructTable};
pub use builtins::Prim;
pub use env::Counters;
pub use error::{Error, ErrorCategory};
pub use eval::{run_with_limit, Config, Evaluated, Interpreter, Outcome, PrintDepth, Strategy};
pub use reader::{read_program, SourceExpr};
pub use value::Value;
