//! Pulse-program language: parser, pretty-printer, executor and the
//! built-in Bell-state preparation programs.

mod ast;
mod builtin;
mod exec;
mod parse;

pub use ast::{CrushModel, Expr, Instruction, PulseProgram};
pub use builtin::{builtin_program, cp_time_expr, dhh_time_expr, equalization_steps, program_name, step3_parameters};
pub use exec::{
    apply_instruction, execute, execute_with, gradient_crush, pps_prepare, pps_weight, run_final, ExecOptions,
    ExecutionTrace, BASIS_LABELS,
};
pub use parse::{parse, parse_named, ParseError, ParseErrorKind, DEFAULT_DWELL};

/// Shipped program text for each built-in preparation.
pub fn shipped_program_text(kind: crate::BellKind) -> &'static str {
    match kind {
        crate::BellKind::S0 => include_str!("../../programs/bell_s0.seq"),
        crate::BellKind::T0 => include_str!("../../programs/bell_t0.seq"),
        crate::BellKind::PsiPlus => include_str!("../../programs/bell_psi_plus.seq"),
        crate::BellKind::PsiMinus => include_str!("../../programs/bell_psi_minus.seq"),
    }
}
