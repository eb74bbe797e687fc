//! Core model and tooling for sequential function charts: the reduced
//! chart representation, its canonical text encoding, PLCopen XML exchange,
//! a Structured Text front end, safety verification and dataset utilities.

pub mod datagen;
pub mod diag;
pub mod model;
pub mod plcopen;
pub mod reduced;
pub mod safety;
pub mod st;
pub mod synth;

pub use diag::{DiagCode, Diagnostic, Severity, Span};
pub use model::{validate_reduced, Edge, Interface, ReducedSfc, StepNode, VarSection, VariableDecl};

/// Index over `f32` embeddings, the element type used by the shipped tools.
pub type RetrievalIndex = datagen::RetrievalIndex<f32>;
pub type CorpusItem = datagen::CorpusItem<f32>;
