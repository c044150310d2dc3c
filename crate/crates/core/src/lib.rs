pub mod backend;
pub mod cli;
pub mod frontend;
pub mod hybrid;
pub mod ir;
pub mod mitigation;
pub mod passes;
pub mod placement;
pub mod runtime;
