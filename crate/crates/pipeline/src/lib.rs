//! Generation harness around `sfcgen-core`: a chat-endpoint client, the
//! per-sample verdict ladder, record files and Pass@k / Safe@k scoring.

pub mod client;
pub mod config;
pub mod generate;
pub mod ladder;
pub mod metrics;
pub mod records;
