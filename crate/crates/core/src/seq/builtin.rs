use super::ast::{CrushModel, Expr, Instruction, PulseProgram};
use crate::dynamics::{DhhMode, PhaseAxis};
use crate::states::{BellKind, Spin};

fn pulse(spin: Spin, angle_deg: f64) -> Instruction {
    Instruction::Pulse {
        spin,
        angle_deg,
        axis: PhaseAxis::Y,
    }
}

/// `0.5/J` (π/J in angular units).
pub fn cp_time_expr() -> Expr {
    Expr::per_j(Expr::Num(0.5))
}

/// `sqrt(2)/2/J` (π√2/J in angular units).
pub fn dhh_time_expr() -> Expr {
    Expr::per_j(Expr::Div(
        Box::new(Expr::Sqrt(Box::new(Expr::Num(2.0)))),
        Box::new(Expr::Num(2.0)),
    ))
}

/// Preparation pulses (φ₁, φ₂) in degrees and the DHH mode for each target.
pub fn step3_parameters(kind: BellKind) -> (f64, f64, DhhMode) {
    match kind {
        BellKind::PsiMinus => (-90.0, -90.0, DhhMode::Sigma),
        BellKind::S0 => (-90.0, 90.0, DhhMode::Delta),
        BellKind::T0 => (90.0, -90.0, DhhMode::Delta),
        BellKind::PsiPlus => (90.0, 90.0, DhhMode::Sigma),
    }
}

pub fn program_name(kind: BellKind) -> String {
    format!("bell_{}", kind.name().to_ascii_lowercase())
}

/// Polarization equalization: y pulses, matched CP for π/J, −y pulses, gradient.
pub fn equalization_steps() -> Vec<Instruction> {
    vec![
        pulse(Spin::One, 90.0),
        pulse(Spin::Two, 90.0),
        Instruction::Cp { t: cp_time_expr() },
        pulse(Spin::One, -90.0),
        pulse(Spin::Two, -90.0),
        Instruction::Gradient {
            model: CrushModel::Diagonal,
        },
    ]
}

/// Full three-step preparation of a pseudo-pure Bell state from equilibrium.
/// The singlet needs no final rotation; the others are returned to the z axis.
pub fn builtin_program(kind: BellKind) -> PulseProgram {
    let (phi1, phi2, mode) = step3_parameters(kind);
    let free = match mode {
        DhhMode::Delta => Expr::times_j(5.0),
        DhhMode::Sigma => Expr::Num(0.0),
    };
    let mut ins = equalization_steps();
    ins.push(Instruction::PpsPrepare);
    ins.push(pulse(Spin::One, phi1));
    ins.push(pulse(Spin::Two, phi2));
    ins.push(Instruction::Dhh {
        mode,
        t: Some(dhh_time_expr()),
        free_param: Some(free),
    });
    if kind != BellKind::S0 {
        ins.push(pulse(Spin::One, -90.0));
        ins.push(pulse(Spin::Two, -90.0));
    }
    PulseProgram::new(program_name(kind), ins)
}
