#![allow(dead_code)]

pub mod mock;
pub mod verdicts;

#[path = "../../../core/tests/common/fixtures.rs"]
pub mod fixtures;
