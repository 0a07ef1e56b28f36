//! Library surface of the command-line front end, shared with the
//! integration and acceptance tests.

pub mod campaign;
pub mod config;
pub mod expr;
pub mod report;
