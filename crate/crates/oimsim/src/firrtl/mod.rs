//! lo-FIRRTL front end: parser, AST printer and hierarchy-flattening
//! elaboration into a single-module netlist.
//!
//! The supported subset is the lo form: circuits, modules, ports,
//! `wire`/`node`/`reg`, connects (`<=`), instances, the primitive operations
//! plus `mux`, and `UInt`/`SInt` literals. All widths must be explicit and in
//! `1..=128`. `when` blocks, memories, aggregate types and partial connects
//! are rejected as unsupported constructs.

mod ast;
mod elaborate;
mod parse;
mod print;

pub use ast::{
    CircuitAst, Direction, Expr, Literal, ModuleAst, Port, Ref, RegReset, Stmt, StmtKind, Ty,
};
pub use elaborate::{
    elaborate, NetExpr, NetRegister, Netlist, Signal, SignalId, SignalKind,
};
pub use parse::parse_firrtl;
pub use print::print_circuit;

use thiserror::Error;

/// Diagnostics carry a 1-based source line; callers prepend the file name.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum FirrtlError {
    #[error("{line}: syntax error: {msg}")]
    Syntax { line: u32, msg: String },
    #[error("{line}: unsupported construct: {construct}")]
    Unsupported { line: u32, construct: String },
    #[error("{line}: type error: {msg}")]
    Type { line: u32, msg: String },
    #[error("{line}: multiple drivers for signal `{signal}`")]
    MultipleDrivers { line: u32, signal: String },
    #[error("signal `{signal}` is never driven")]
    Undriven { signal: String },
    #[error("{line}: clock domain error: {msg}")]
    ClockDomain { line: u32, msg: String },
}
