//! Constrained Horn clause encoding of imperative programs, interpreter
//! removal, linearization and checking.

pub mod chc;
pub mod cli;
pub mod corpus;
pub mod encode;
pub mod imp;
pub mod lin;
pub mod pipeline;
pub mod solve;
pub mod spec;
pub mod syntax;
pub mod transform;
