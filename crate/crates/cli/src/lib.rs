//! The `gas` command-line tool and the HTTP session service behind the UI.

pub mod commands;
pub mod service;
