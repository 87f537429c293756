//! Behavioural-type verification toolkit for the MiGo calculus.

pub mod corpus;
pub mod fencing;
pub mod inference;
pub mod interp;
pub mod name;
pub mod syntax;
pub mod tysem;
pub mod verification;

pub use name::Name;
