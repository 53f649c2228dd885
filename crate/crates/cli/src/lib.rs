pub mod app;
pub mod commands;
pub mod error;
pub mod report;
pub mod scenario;
