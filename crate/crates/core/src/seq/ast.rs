use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dynamics::{DhhMode, PhaseAxis};
use crate::states::Spin;

/// Arithmetic over literals and the coupling symbol `J`.
///
/// `J` stands for the coupling constant in Hz (J/2π). Durations evaluate to
/// seconds, so `0.5/J` is π/J in angular units; frequencies evaluate to Hz,
/// so `5J` is an rf combination of 5·J.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Expr {
    Num(f64),
    J,
    Pi,
    Sqrt(Box<Expr>),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn num(x: f64) -> Self {
        Expr::Num(x)
    }

    /// `k/J`
    pub fn per_j(k: Expr) -> Self {
        Expr::Div(Box::new(k), Box::new(Expr::J))
    }

    pub fn times_j(k: f64) -> Self {
        Expr::Mul(Box::new(Expr::Num(k)), Box::new(Expr::J))
    }

    pub fn eval(&self, j_hz: f64) -> f64 {
        match self {
            Expr::Num(x) => *x,
            Expr::J => j_hz,
            Expr::Pi => PI,
            Expr::Sqrt(a) => a.eval(j_hz).sqrt(),
            Expr::Neg(a) => -a.eval(j_hz),
            Expr::Add(a, b) => a.eval(j_hz) + b.eval(j_hz),
            Expr::Sub(a, b) => a.eval(j_hz) - b.eval(j_hz),
            Expr::Mul(a, b) => a.eval(j_hz) * b.eval(j_hz),
            Expr::Div(a, b) => a.eval(j_hz) / b.eval(j_hz),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(..) => 3,
            Expr::Num(x) if *x < 0.0 || (*x == 0.0 && x.is_sign_negative()) => 3,
            _ => 4,
        }
    }

    fn write_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let paren = self.precedence() < min;
        if paren {
            f.write_str("(")?;
        }
        match self {
            Expr::Num(x) => write!(f, "{x}")?,
            Expr::J => f.write_str("J")?,
            Expr::Pi => f.write_str("pi")?,
            Expr::Sqrt(a) => {
                f.write_str("sqrt(")?;
                a.write_prec(f, 0)?;
                f.write_str(")")?;
            }
            Expr::Neg(a) => {
                f.write_str("-")?;
                a.write_prec(f, 3)?;
            }
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                a.write_prec(f, 1)?;
                f.write_str(if matches!(self, Expr::Add(..)) { "+" } else { "-" })?;
                b.write_prec(f, 2)?;
            }
            Expr::Mul(a, b) => match (a.as_ref(), b.as_ref()) {
                (Expr::Num(k), Expr::J) if *k >= 0.0 && k.is_sign_positive() => write!(f, "{k}J")?,
                _ => {
                    a.write_prec(f, 2)?;
                    f.write_str("*")?;
                    b.write_prec(f, 3)?;
                }
            },
            Expr::Div(a, b) => {
                a.write_prec(f, 2)?;
                f.write_str("/")?;
                b.write_prec(f, 3)?;
            }
        }
        if paren {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_prec(f, 0)
    }
}

/// Gradient crusher model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CrushModel {
    /// Zeroes z-basis elements with nonzero coherence order; zero-quantum
    /// coherences survive.
    CoherenceOrder,
    /// Zeroes every off-diagonal z-basis element.
    Diagonal,
}

impl CrushModel {
    pub fn label(self) -> &'static str {
        match self {
            CrushModel::CoherenceOrder => "coherence",
            CrushModel::Diagonal => "diagonal",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Instruction {
    /// Ideal hard pulse; the angle is kept in degrees as written.
    Pulse {
        spin: Spin,
        angle_deg: f64,
        axis: PhaseAxis,
    },
    /// Free evolution under J S₁zS₂z.
    Delay { t: Expr },
    /// Matched Hartmann-Hahn cross-polarization at (√15/4)J.
    Cp { t: Expr },
    /// Detuned Hartmann-Hahn block. `free_param` is Σ (delta mode) or Δ
    /// (sigma mode) in Hz; `t` defaults to π√2/J.
    Dhh {
        mode: DhhMode,
        t: Option<Expr>,
        free_param: Option<Expr>,
    },
    Gradient { model: CrushModel },
    PpsPrepare,
    AcquireFid { spin: Spin, points: usize, dwell: Expr },
}

pub(crate) fn channel_label(spin: Spin) -> &'static str {
    match spin {
        Spin::One => "H",
        Spin::Two => "C",
    }
}

impl Instruction {
    pub fn angle_rad(angle_deg: f64) -> f64 {
        angle_deg * PI / 180.0
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instruction::Pulse { spin, angle_deg, axis } => {
                write!(f, "pulse {} {} {}", channel_label(*spin), angle_deg, axis.label())
            }
            Instruction::Delay { t } => write!(f, "delay {t}"),
            Instruction::Cp { t } => write!(f, "cp {t}"),
            Instruction::Dhh { mode, t, free_param } => {
                write!(f, "dhh {}", mode.label())?;
                if let Some(t) = t {
                    write!(f, " t={t}")?;
                }
                if let Some(p) = free_param {
                    let key = match mode {
                        DhhMode::Delta => "sigma",
                        DhhMode::Sigma => "delta",
                    };
                    write!(f, " {key}={p}")?;
                }
                Ok(())
            }
            Instruction::Gradient { model } => write!(f, "grad {}", model.label()),
            Instruction::PpsPrepare => f.write_str("pps"),
            Instruction::AcquireFid { spin, points, dwell } => {
                write!(f, "acquire {} {} dwell={}", channel_label(*spin), points, dwell)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseProgram {
    pub name: String,
    pub instructions: Vec<Instruction>,
}

impl PulseProgram {
    pub fn new(name: impl Into<String>, instructions: Vec<Instruction>) -> Self {
        Self {
            name: name.into(),
            instructions,
        }
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    /// Canonical text form, one instruction per line, accepted by `parse`.
    pub fn pretty(&self) -> String {
        let mut out = String::new();
        for ins in &self.instructions {
            out.push_str(&ins.to_string());
            out.push('\n');
        }
        out
    }
}
