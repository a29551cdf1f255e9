//! Command-line front end and HTTP service for the scene synthesizer.

pub mod api;
pub mod cli;
