//! Shared oracles and random generators for the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spinpair::dynamics::{DhhMode, PhaseAxis};
use spinpair::matrix::{c, ComplexMatrix4, C64};
use spinpair::relax::RateMatrix;
use spinpair::seq::{CrushModel, Expr, Instruction, PulseProgram};
use spinpair::{DensityMatrix, Spin, SpinSystem};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// exp(−iHt) by scaling and squaring of a truncated Taylor series.
pub fn series_expm(h: &ComplexMatrix4, t: f64) -> ComplexMatrix4 {
    let a = h.scale_c(c(0.0, -t));
    let norm = a.frobenius_norm();
    let mut squarings = 0;
    let mut scaled = a;
    if norm > 0.5 {
        squarings = (norm / 0.5).log2().ceil() as u32;
        scaled = a.scale(0.5f64.powi(squarings as i32));
    }
    let mut term = ComplexMatrix4::identity();
    let mut sum = ComplexMatrix4::identity();
    for k in 1..=30 {
        term = (term * scaled).scale(1.0 / k as f64);
        sum += term;
        if term.max_abs() < 1e-20 {
            break;
        }
    }
    for _ in 0..squarings {
        sum = sum * sum;
    }
    sum
}

pub fn random_complex(rng: &mut ChaCha8Rng) -> C64 {
    c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn random_hermitian(rng: &mut ChaCha8Rng, scale: f64) -> ComplexMatrix4 {
    let a = ComplexMatrix4::from_fn(|_, _| random_complex(rng));
    (a + a.adjoint()).scale(0.5 * scale)
}

/// ρ = AA†/Tr(AA†) for a random complex A: a full-rank random state.
pub fn random_density(rng: &mut ChaCha8Rng) -> DensityMatrix {
    let a = ComplexMatrix4::from_fn(|_, _| random_complex(rng));
    let m = a * a.adjoint();
    let tr = m.trace().re;
    DensityMatrix::new(m.scale(1.0 / tr).hermitian_part()).expect("random state is valid")
}

pub fn random_system(rng: &mut ChaCha8Rng) -> SpinSystem {
    SpinSystem {
        b_field: rng.random_range(1.0..25.0),
        temperature: rng.random_range(4.0..400.0),
        ..SpinSystem::default().with_j_hz(rng.random_range(20.0..250.0))
    }
}

/// Random symmetric rate matrix, redrawn until positive definite.
pub fn random_rates(rng: &mut ChaCha8Rng) -> RateMatrix {
    loop {
        let r = RateMatrix {
            mu1: rng.random_range(0.05..2.0),
            mu2: rng.random_range(0.05..2.0),
            mu12: rng.random_range(0.05..2.0),
            sigma12: rng.random_range(-0.5..0.5),
            delta1: rng.random_range(-0.3..0.3),
            delta2: rng.random_range(-0.3..0.3),
        };
        if r.validate().is_ok() {
            return r;
        }
    }
}

fn random_literal(rng: &mut ChaCha8Rng) -> f64 {
    match rng.random_range(0..4) {
        0 => rng.random_range(0..20) as f64,
        1 => rng.random_range(0..1000) as f64 / 8.0,
        2 => rng.random_range(1..100_000) as f64 * 1e-6,
        _ => rng.random_range(0.0..10.0),
    }
}

/// Random expression that evaluates to a finite non-negative value for any
/// positive J.
pub fn random_nonneg_expr(rng: &mut ChaCha8Rng, depth: u32) -> Expr {
    let leaf = depth == 0 || rng.random_bool(0.35);
    if leaf {
        return match rng.random_range(0..4) {
            0 => Expr::J,
            1 => Expr::Pi,
            _ => Expr::Num(random_literal(rng)),
        };
    }
    let d = depth - 1;
    match rng.random_range(0..5) {
        0 => Expr::Sqrt(Box::new(random_nonneg_expr(rng, d))),
        1 => Expr::Add(Box::new(random_nonneg_expr(rng, d)), Box::new(random_nonneg_expr(rng, d))),
        2 => Expr::Mul(Box::new(random_nonneg_expr(rng, d)), Box::new(random_nonneg_expr(rng, d))),
        3 => Expr::Div(Box::new(random_nonneg_expr(rng, d)), Box::new(random_positive_expr(rng))),
        _ => Expr::times_j(random_literal(rng)),
    }
}

fn random_positive_expr(rng: &mut ChaCha8Rng) -> Expr {
    match rng.random_range(0..4) {
        0 => Expr::J,
        1 => Expr::Pi,
        2 => Expr::Sqrt(Box::new(Expr::Num(rng.random_range(1..50) as f64))),
        _ => Expr::Num(rng.random_range(1..64) as f64 / 4.0),
    }
}

fn random_spin(rng: &mut ChaCha8Rng) -> Spin {
    if rng.random_bool(0.5) {
        Spin::One
    } else {
        Spin::Two
    }
}

pub fn random_instruction(rng: &mut ChaCha8Rng) -> Instruction {
    match rng.random_range(0..7) {
        0 => Instruction::Pulse {
            spin: random_spin(rng),
            angle_deg: rng.random_range(-720..=720) as f64 / 4.0,
            axis: [PhaseAxis::X, PhaseAxis::Y, PhaseAxis::MinusX, PhaseAxis::MinusY][rng.random_range(0..4)],
        },
        1 => Instruction::Delay {
            t: random_nonneg_expr(rng, 3),
        },
        2 => Instruction::Cp {
            t: random_nonneg_expr(rng, 3),
        },
        3 => Instruction::Dhh {
            mode: if rng.random_bool(0.5) { DhhMode::Delta } else { DhhMode::Sigma },
            t: rng.random_bool(0.7).then(|| random_nonneg_expr(rng, 2)),
            free_param: rng.random_bool(0.7).then(|| random_nonneg_expr(rng, 2)),
        },
        4 => Instruction::Gradient {
            model: if rng.random_bool(0.5) { CrushModel::Diagonal } else { CrushModel::CoherenceOrder },
        },
        5 => Instruction::PpsPrepare,
        _ => Instruction::AcquireFid {
            spin: random_spin(rng),
            points: rng.random_range(2..64),
            dwell: Expr::Num(rng.random_range(1..40) as f64 * 1e-4),
        },
    }
}

pub fn random_program(rng: &mut ChaCha8Rng) -> PulseProgram {
    let n = rng.random_range(0..16);
    PulseProgram::new("program", (0..n).map(|_| random_instruction(rng)).collect())
}

/// Executable program: short, physically sensible durations and amplitudes.
pub fn random_executable_program(rng: &mut ChaCha8Rng) -> PulseProgram {
    let n = rng.random_range(1..10);
    let ins = (0..n)
        .map(|_| match rng.random_range(0..6) {
            0 => Instruction::Pulse {
                spin: random_spin(rng),
                angle_deg: rng.random_range(-360.0..360.0),
                axis: [PhaseAxis::X, PhaseAxis::Y, PhaseAxis::MinusX, PhaseAxis::MinusY][rng.random_range(0..4)],
            },
            1 => Instruction::Delay {
                t: Expr::per_j(Expr::Num(rng.random_range(0.0..2.0))),
            },
            2 => Instruction::Cp {
                t: Expr::per_j(Expr::Num(rng.random_range(0.0..1.0))),
            },
            3 => Instruction::Dhh {
                mode: if rng.random_bool(0.5) { DhhMode::Delta } else { DhhMode::Sigma },
                t: None,
                free_param: None,
            },
            4 => Instruction::Gradient {
                model: if rng.random_bool(0.5) { CrushModel::Diagonal } else { CrushModel::CoherenceOrder },
            },
            _ => Instruction::PpsPrepare,
        })
        .collect();
    PulseProgram::new("program", ins)
}
