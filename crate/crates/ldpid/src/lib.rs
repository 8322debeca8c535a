//! File formats, commands and the command-line front end for `ldpid-core`.

pub mod cli;
pub mod config;
pub mod controller;
pub mod job;
pub mod output;
mod reproduce;
