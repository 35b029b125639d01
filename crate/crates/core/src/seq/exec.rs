use std::f64::consts::PI;

use log::debug;
use serde::{Deserialize, Serialize};

use super::ast::{CrushModel, Instruction, PulseProgram};
use crate::dynamics::{self, dhh_duration, h_free, RfControl};
use crate::error::{Error, Result};
use crate::matrix::{re, ComplexMatrix4};
use crate::spectra::{synthesize_fid, Fid};
use crate::states::{product_state, pseudo_pure, spin_operator, two_spin_operator, Axis, DensityMatrix, Spin};
use crate::system::SpinSystem;

/// Total magnetic quantum number m₁ + m₂ of each z-basis state.
const TOTAL_M: [i32; 4] = [1, 0, 0, -1];

/// Dephasing by a pulsed field gradient.
pub fn gradient_crush(rho: &DensityMatrix, model: CrushModel) -> DensityMatrix {
    let m = rho.matrix();
    let out = ComplexMatrix4::from_fn(|r, c| {
        let keep = match model {
            CrushModel::Diagonal => r == c,
            CrushModel::CoherenceOrder => TOTAL_M[r] == TOTAL_M[c],
        };
        if keep {
            m.get(r, c)
        } else {
            re(0.0)
        }
    });
    DensityMatrix::from_matrix_unchecked(out)
}

/// Relative size of the deviation component outside the expected input form
/// above which `pps_prepare` logs a warning.
pub const PPS_INPUT_TOL: f64 = 1e-6;

/// Pseudo-pure weight c read from a z-ordered deviation. Linear in ρ; gives c
/// for both `c(S₁z + S₂z)` and `c(|↑↑⟩⟨↑↑| − 𝕀/4)`.
pub fn pps_weight(rho: &DensityMatrix) -> f64 {
    let s1z = rho.expect(&spin_operator(Spin::One, Axis::Z));
    let s2z = rho.expect(&spin_operator(Spin::Two, Axis::Z));
    let zz = rho.expect(&two_spin_operator(Axis::Z, Axis::Z));
    0.5 * (s1z + s2z) + 2.0 * zz
}

/// Idealized pseudo-pure preparation: maps an equally polarized state
/// `c(S₁z + S₂z)` to `𝕀/4 + c(|↑↑⟩⟨↑↑| − 𝕀/4)`.
pub fn pps_prepare(rho: &DensityMatrix) -> Result<DensityMatrix> {
    let weight = pps_weight(rho);
    let up_up = product_state(true, true, Axis::Z);
    let dev = rho.deviation();
    let norm = dev.frobenius_norm();
    if norm > 0.0 {
        let sum_z = spin_operator(Spin::One, Axis::Z) + spin_operator(Spin::Two, Axis::Z);
        let as_polarized = (dev - sum_z.scale(weight)).frobenius_norm() / norm;
        let pps_dev = up_up.projector() - ComplexMatrix4::identity().scale(0.25);
        let as_pps = (dev - pps_dev.scale(weight)).frobenius_norm() / norm;
        if as_polarized > PPS_INPUT_TOL && as_pps > PPS_INPUT_TOL {
            debug!(
                "pps: input deviation is not of the form c(S1z + S2z); relative residual {as_polarized:.3e}"
            );
        }
    }
    pseudo_pure(&up_up, weight)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ExecOptions {
    pub rf: RfControl,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExecutionTrace {
    pub name: String,
    /// Initial state followed by one snapshot after each instruction.
    pub states: Vec<(String, DensityMatrix)>,
    pub acquisitions: Vec<Fid>,
}

impl ExecutionTrace {
    pub fn final_state(&self) -> &DensityMatrix {
        &self.states.last().expect("trace holds the initial state").1
    }

    pub fn to_json(&self) -> serde_json::Value {
        let states: Vec<StateJson> = self
            .states
            .iter()
            .map(|(label, rho)| {
                let (re, im) = rho.matrix().to_re_im();
                StateJson {
                    label: label.clone(),
                    re,
                    im,
                }
            })
            .collect();
        let acquisitions: Vec<AcquisitionJson> = self
            .acquisitions
            .iter()
            .map(|fid| AcquisitionJson {
                spin: fid.spin.index(),
                dwell: fid.dwell,
                re: fid.samples.iter().map(|z| z.re).collect(),
                im: fid.samples.iter().map(|z| z.im).collect(),
            })
            .collect();
        serde_json::to_value(TraceJson {
            name: self.name.clone(),
            basis: BASIS_LABELS.map(String::from).to_vec(),
            states,
            acquisitions,
        })
        .expect("trace serializes")
    }
}

/// Basis labels, 0 = |↑z⟩ and 1 = |↓z⟩, spin 1 first.
pub const BASIS_LABELS: [&str; 4] = ["00", "01", "10", "11"];

#[derive(Serialize, Deserialize)]
struct TraceJson {
    name: String,
    basis: Vec<String>,
    states: Vec<StateJson>,
    acquisitions: Vec<AcquisitionJson>,
}

#[derive(Serialize, Deserialize)]
struct StateJson {
    label: String,
    re: Vec<f64>,
    im: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct AcquisitionJson {
    spin: usize,
    dwell: f64,
    re: Vec<f64>,
    im: Vec<f64>,
}

fn non_negative(what: &'static str, v: f64) -> Result<f64> {
    if !v.is_finite() || v < 0.0 {
        return Err(Error::param(what, format!("must be a non-negative duration, got {v}")));
    }
    Ok(v)
}

pub fn apply_instruction(
    rho: &DensityMatrix,
    ins: &Instruction,
    sys: &SpinSystem,
    opts: &ExecOptions,
) -> Result<(DensityMatrix, Option<Fid>)> {
    let j_hz = sys.j_hz();
    let rf = &opts.rf;
    let next = match ins {
        Instruction::Pulse { spin, angle_deg, axis } => {
            let angle = rf.angle(Instruction::angle_rad(*angle_deg));
            dynamics::hard_pulse(rho, *spin, angle, *axis)
        }
        Instruction::Delay { t } => {
            let t = non_negative("delay", t.eval(j_hz))?;
            dynamics::propagate(rho, &h_free(sys), t)?
        }
        Instruction::Cp { t } => {
            let t = non_negative("cp", t.eval(j_hz))?;
            dynamics::cp_evolve(rho, sys, t, rf)?
        }
        Instruction::Dhh { mode, t, free_param } => {
            let t = match t {
                Some(e) => non_negative("dhh t", e.eval(j_hz))?,
                None => dhh_duration(sys),
            };
            let free = match free_param {
                Some(e) => 2.0 * PI * e.eval(j_hz),
                None => mode.default_free_param(sys),
            };
            dynamics::dhh_evolve(rho, *mode, sys, free, t, rf)?
        }
        Instruction::Gradient { model } => gradient_crush(rho, *model),
        Instruction::PpsPrepare => pps_prepare(rho)?,
        Instruction::AcquireFid { spin, points, dwell } => {
            let fid = synthesize_fid(rho, sys, *spin, *points, dwell.eval(j_hz))?;
            return Ok((*rho, Some(fid)));
        }
    };
    Ok((next, None))
}

pub fn execute(prog: &PulseProgram, sys: &SpinSystem, rho0: &DensityMatrix) -> Result<ExecutionTrace> {
    execute_with(prog, sys, rho0, &ExecOptions::default())
}

pub fn execute_with(
    prog: &PulseProgram,
    sys: &SpinSystem,
    rho0: &DensityMatrix,
    opts: &ExecOptions,
) -> Result<ExecutionTrace> {
    let mut states = Vec::with_capacity(prog.len() + 1);
    let mut acquisitions = Vec::new();
    states.push(("initial".to_string(), *rho0));
    let mut rho = *rho0;
    for ins in &prog.instructions {
        let (next, fid) = apply_instruction(&rho, ins, sys, opts)?;
        rho = next;
        acquisitions.extend(fid);
        states.push((ins.to_string(), rho));
    }
    Ok(ExecutionTrace {
        name: prog.name.clone(),
        states,
        acquisitions,
    })
}

/// Final state only, without keeping snapshots.
pub fn run_final(prog: &PulseProgram, sys: &SpinSystem, rho0: &DensityMatrix, opts: &ExecOptions) -> Result<DensityMatrix> {
    let mut rho = *rho0;
    for ins in &prog.instructions {
        rho = apply_instruction(&rho, ins, sys, opts)?.0;
    }
    Ok(rho)
}
