//! Command-line front end and HTTP reward service for fsukit.

pub mod args;
pub mod commands;
pub mod exit;
pub mod model_client;
pub mod service;
pub mod settings;

pub use args::Cli;
pub use commands::run;
