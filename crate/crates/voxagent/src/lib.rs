pub mod backend;
pub mod cli;
pub mod config;
pub mod harness;
pub mod output;
pub mod reference;
pub mod snapshot;
