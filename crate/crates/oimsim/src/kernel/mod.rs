//! Simulation kernels: signal state, operator semantics and the five
//! interpreter traversals over the tensor.

pub mod bitvec;
pub mod ops;
// mod state;
// mod step;

pub use bitvec::{mask, BitVec, MAX_WIDTH};
pub use ops::apply_op;
// pub use state::{commit_registers, init_state, peek, poke, SignalState};
// pub use step::{step_cycle, KernelConfig, KernelLevel};

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum KernelError {
    #[error("{opcode} expects {expected} operand(s), got {got}")]
    ArityMismatch {
        opcode: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("unknown port `{0}`")]
    UnknownPort(String),
    #[error("port `{0}` is not a pokeable input")]
    NotAnInput(String),
    #[error("value {value} does not fit port `{port}` of width {width}")]
    ValueOutOfRange {
        port: String,
        value: u128,
        width: u32,
    },
    #[error("kernel {level} requires format {required}, tensor is format {actual}")]
    FormatMismatch {
        level: &'static str,
        required: char,
        actual: char,
    },
    #[error("kernel level {0} is not implemented by the interpreter")]
    UnsupportedLevel(&'static str),
}
