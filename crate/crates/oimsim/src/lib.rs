pub mod dfg;
pub mod firrtl;
pub mod kernel;
