//! Linear-inversion state tomography over the product-operator basis and a
//! Monte-Carlo rf-amplitude error model for the preparation sequence.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::dynamics::RfControl;
use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix4;
use crate::par::{map_indexed, Execution};
use crate::seq::{builtin_program, run_final, ExecOptions, BASIS_LABELS};
use crate::states::{
    attenuated_fidelity, bell_state, deviation_fidelity, equilibrium_state, spin_operator, two_spin_operator, Axis, BellKind,
    DensityMatrix, Spin,
};
use crate::system::SpinSystem;

pub const N_OBSERVABLES: usize = 15;

const AXES: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

/// The 15 traceless product operators {S₁a, S₂a, 2S₁aS₂b}, each with
/// Tr(P²) = 1, in the order S₁x S₁y S₁z S₂x S₂y S₂z 2S₁xS₂x 2S₁xS₂y … 2S₁zS₂z.
pub fn product_operator_basis() -> [(String, ComplexMatrix4); N_OBSERVABLES] {
    let name = |a: Axis| match a {
        Axis::X => 'x',
        Axis::Y => 'y',
        Axis::Z => 'z',
    };
    std::array::from_fn(|k| {
        if k < 6 {
            let spin = if k < 3 { Spin::One } else { Spin::Two };
            let a = AXES[k % 3];
            (format!("S{}{}", spin.index(), name(a)), spin_operator(spin, a))
        } else {
            let (a, b) = (AXES[(k - 6) / 3], AXES[(k - 6) % 3]);
            (format!("2S1{}S2{}", name(a), name(b)), two_spin_operator(a, b).scale(2.0))
        }
    })
}

/// ⟨P_k⟩ = Tr(ρ P_k) for the product-operator basis.
pub fn measure_expectations(rho: &DensityMatrix) -> [f64; N_OBSERVABLES] {
    let basis = product_operator_basis();
    std::array::from_fn(|k| rho.expect(&basis[k].1))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TomographyResult {
    pub rho_reconstructed: DensityMatrix,
    /// max_k |⟨P_k⟩(ρ_rec) − input_k|
    pub residual: f64,
}

impl TomographyResult {
    /// Tomogram export: real and imaginary 4×4 parts of the normalized
    /// deviation state, with basis labels 0 = |↑z⟩ and 1 = |↓z⟩.
    pub fn to_json(&self) -> serde_json::Value {
        let norm = self.rho_reconstructed.normalized_deviation_state();
        let grid = |f: fn(num_complex::Complex64) -> f64, m: &ComplexMatrix4| -> Vec<Vec<f64>> {
            (0..4).map(|r| (0..4).map(|c| f(m.get(r, c))).collect()).collect()
        };
        serde_json::to_value(TomogramJson {
            labels: BASIS_LABELS.map(String::from).to_vec(),
            real: grid(|z| z.re, norm.matrix()),
            imag: grid(|z| z.im, norm.matrix()),
            raw_real: grid(|z| z.re, self.rho_reconstructed.matrix()),
            raw_imag: grid(|z| z.im, self.rho_reconstructed.matrix()),
            residual: self.residual,
            min_eigenvalue_normalized: norm.min_eigenvalue(),
        })
        .expect("tomogram serializes")
    }
}

#[derive(Serialize, Deserialize)]
struct TomogramJson {
    labels: Vec<String>,
    real: Vec<Vec<f64>>,
    imag: Vec<Vec<f64>>,
    raw_real: Vec<Vec<f64>>,
    raw_imag: Vec<Vec<f64>>,
    residual: f64,
    min_eigenvalue_normalized: f64,
}

/// ρ = 𝕀/4 + Σ_k ⟨P_k⟩ P_k. Hermitian and unit-trace by construction;
/// positivity is not enforced.
pub fn reconstruct(expectations: &[f64; N_OBSERVABLES]) -> TomographyResult {
    let basis = product_operator_basis();
    let mut m = ComplexMatrix4::identity().scale(0.25);
    for (e, (_, p)) in expectations.iter().zip(basis.iter()) {
        m += p.scale(*e);
    }
    let rho = DensityMatrix::from_matrix_unchecked(m.hermitian_part());
    let back = measure_expectations(&rho);
    let residual = back
        .iter()
        .zip(expectations)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    TomographyResult {
        rho_reconstructed: rho,
        residual,
    }
}

/// Multiplicative rf-amplitude error drawn once per ensemble member.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RfErrorModel {
    /// Standard deviation of the amplitude scale (mean 1).
    pub amplitude_spread: f64,
    pub ensemble_size: usize,
    /// Continuous-block amplitudes rounded to this step, rad/s.
    pub amplitude_step: Option<f64>,
    pub seed: u64,
}

impl Default for RfErrorModel {
    fn default() -> Self {
        Self {
            amplitude_spread: 0.0,
            ensemble_size: 1,
            amplitude_step: None,
            seed: 0,
        }
    }
}

impl RfErrorModel {
    pub fn ideal() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude_spread >= 0.0 && self.amplitude_spread.is_finite()) {
            return Err(Error::param("amplitude_spread", "must be non-negative"));
        }
        if self.ensemble_size == 0 {
            return Err(Error::param("ensemble_size", "must be at least 1"));
        }
        if let Some(step) = self.amplitude_step {
            if !(step > 0.0 && step.is_finite()) {
                return Err(Error::param("amplitude_step", "must be positive"));
            }
        }
        Ok(())
    }

    /// Amplitude scales for every member, drawn in index order from the seed.
    pub fn draw_scales(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let normal = Normal::new(1.0, self.amplitude_spread).map_err(|e| Error::param("amplitude_spread", e.to_string()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        Ok((0..self.ensemble_size).map(|_| normal.sample(&mut rng)).collect())
    }
}

/// Ensemble-averaged final state of the built-in preparation for `kind`.
pub fn prepare_ensemble(kind: BellKind, sys: &SpinSystem, err: &RfErrorModel, exec: Execution) -> Result<DensityMatrix> {
    let scales = err.draw_scales()?;
    let prog = builtin_program(kind);
    let rho0 = equilibrium_state(sys)?;
    let members = map_indexed(scales.len(), exec, |i| {
        let opts = ExecOptions {
            rf: RfControl {
                scale: scales[i],
                amplitude_step: err.amplitude_step,
            },
        };
        run_final(&prog, sys, &rho0, &opts)
    });
    let mut acc = ComplexMatrix4::zeros();
    for m in members {
        acc += *m?.matrix();
    }
    Ok(DensityMatrix::from_matrix_unchecked(acc.scale(1.0 / scales.len() as f64)))
}

/// Pseudo-pure weight an ideal preparation reaches from equilibrium: the
/// equalized polarization (ε₁+ε₂)/2.
pub fn ideal_pseudo_pure_weight(sys: &SpinSystem) -> f64 {
    0.5 * (sys.epsilon1() + sys.epsilon2())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TomographySimulation {
    pub result: TomographyResult,
    /// Deviation-matrix fidelity to the ideal z-axis Bell state.
    pub fidelity: f64,
    /// Share of the ideal pseudo-pure deviation, of weight (ε₁+ε₂)/2, that
    /// the reconstruction retains along the Bell state.
    pub attenuated_fidelity: f64,
    /// Smallest eigenvalue of the normalized reconstructed state (reported, not clipped).
    pub min_eigenvalue: f64,
}

pub fn simulate_tomography(kind: BellKind, sys: &SpinSystem, err: &RfErrorModel) -> Result<TomographySimulation> {
    simulate_tomography_with(kind, sys, err, Execution::Parallel)
}

pub fn simulate_tomography_with(
    kind: BellKind,
    sys: &SpinSystem,
    err: &RfErrorModel,
    exec: Execution,
) -> Result<TomographySimulation> {
    let rho = prepare_ensemble(kind, sys, err, exec)?;
    let result = reconstruct(&measure_expectations(&rho));
    let target = bell_state(kind, Axis::Z);
    let fidelity = deviation_fidelity(&result.rho_reconstructed, &target);
    let weight = ideal_pseudo_pure_weight(sys);
    let attenuated_fidelity = attenuated_fidelity(&result.rho_reconstructed, &target, weight);
    let min_eigenvalue = result.rho_reconstructed.normalized_deviation_state().min_eigenvalue();
    Ok(TomographySimulation {
        result,
        fidelity,
        attenuated_fidelity,
        min_eigenvalue,
    })
}
