//! Reference implementation of a small reactive object language: parsing,
//! well-formedness, reference-capability typing, a small-step runtime with
//! per-record mailboxes, and a determinism harness.

pub mod builtins;
pub mod diag;
pub mod harness;
pub mod parse;
pub mod print;
pub mod runtime;
pub mod syntax;
pub mod table;
pub mod typeck;
pub mod wf;

pub use diag::Diagnostic;
pub use syntax::{Expr, Label, Loc, Memory, Modifier, Program, Type};
pub use table::ClassTable;

/// A program that parsed, is well formed and type checks.
#[derive(Clone, Debug)]
pub struct Checked {
    pub program: Program,
    pub report: typeck::CheckReport,
}

/// Parse, well-formedness and type checking. Type checking only runs on
/// well-formed programs.
pub fn check_source(src: &str) -> Result<Checked, Vec<Diagnostic>> {
    let program = parse::parse_program(src)?;
    let wf = wf::check_program(&program);
    if !wf.is_ok() {
        let mut diags = wf.diagnostics();
        diag::sort(&mut diags);
        return Err(diags);
    }
    let report = typeck::check_program(&program);
    if !report.is_ok() {
        return Err(report.diagnostics);
    }
    Ok(Checked { program, report })
}
