//! Scenario execution engine: a declarative scenario language, behavior-tree
//! execution, parameter-variation expansion and a deterministic 2D robot
//! simulation backend.
//!
//! The typical pipeline is
//! tokenize → parse → build_model → check_concrete → compile → run:
//!
//! see the `examples/` directory for one runnable example per capability and
//! the `scenrun` binary for the command-line entry points.

pub mod ast;
pub mod btree;
pub mod compiler;
pub mod diagnostics;
pub mod events;
pub mod lexer;
pub mod model;
pub mod parser;
pub mod report;
pub mod runner;
pub mod simworld;
pub mod span;
pub mod units;
pub mod variation;

pub use ast::{AstKind, AstNode};
pub use diagnostics::{render_diagnostics, Diagnostic};
pub use lexer::{tokenize, Token, TokenKind};
pub use parser::parse;
pub use span::SourceSpan;
pub use units::{Dimension, PhysicalValue};
