//! Hamiltonians and coherent evolution in the double-rotating frame.
//!
//! Propagators are `exp(−iHt)` from the eigen-decomposition of the Hermitian
//! generator. Hard pulses are ideal rotations `exp(−iθ S_{k,φ})`, so
//! `(π/2)_y` takes z-magnetization to +x.
//!
//! The detuned Hartmann-Hahn block is driven with rf phase −x, i.e. the rf
//! term enters as `+ω₁S₁x + ω₂S₂x`. With the pulse sense above this is the
//! phase for which |↓x↑x⟩ → |S0⟩, |↑x↓x⟩ → |T0,x⟩, |↑x↑x⟩ → |ψ₊,x⟩ and
//! |↓x↓x⟩ → |ψ₋,x⟩ (up to global phase); with phase +x the pairs swap.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{re, ComplexMatrix4, C64};
use crate::states::{product_state, spin_operator, two_spin_operator, Axis, DensityMatrix, Spin};
use crate::system::SpinSystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Frame {
    Lab,
    DoubleRotating,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hamiltonian {
    pub matrix: ComplexMatrix4,
    pub frame: Frame,
}

impl Hamiltonian {
    pub fn new(matrix: ComplexMatrix4, frame: Frame) -> Result<Self> {
        matrix.require_hermitian(HERMITIAN_INPUT_TOL)?;
        Ok(Self { matrix, frame })
    }
}

/// Unitary `exp(−iHt)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Propagator(pub ComplexMatrix4);

impl Propagator {
    pub fn matrix(&self) -> &ComplexMatrix4 {
        &self.0
    }

    /// max |U U† − 𝕀|
    pub fn unitarity_error(&self) -> f64 {
        (self.0 * self.0.adjoint()).max_abs_diff(&ComplexMatrix4::identity())
    }

    pub fn then(&self, next: &Propagator) -> Propagator {
        Propagator(next.0 * self.0)
    }

    pub fn apply(&self, rho: &DensityMatrix) -> DensityMatrix {
        DensityMatrix::from_matrix_unchecked(rho.matrix().conjugate_by(&self.0))
    }
}

/// Relative asymmetry above which a generator is rejected as non-Hermitian.
pub const HERMITIAN_INPUT_TOL: f64 = 1e-9;

/// `exp(−iHt)` by eigen-decomposition of Hermitian `h`.
pub fn matrix_exponential(h: &ComplexMatrix4, t: f64) -> Result<Propagator> {
    h.require_hermitian(HERMITIAN_INPUT_TOL)?;
    if !t.is_finite() {
        return Err(Error::param("t", "time must be finite"));
    }
    let (vals, vecs) = h.eigh();
    let phases = ComplexMatrix4::from_fn(|r, c| {
        if r == c {
            C64::from_polar(1.0, -vals[r] * t)
        } else {
            re(0.0)
        }
    });
    Ok(Propagator(phases.conjugate_by(&vecs)))
}

/// Secular lab-frame Hamiltonian `−Ω₁S₁z − Ω₂S₂z + J S₁zS₂z`.
pub fn h_lab(sys: &SpinSystem) -> Hamiltonian {
    let m = spin_operator(Spin::One, Axis::Z).scale(-sys.larmor1())
        - spin_operator(Spin::Two, Axis::Z).scale(sys.larmor2())
        + two_spin_operator(Axis::Z, Axis::Z).scale(sys.j);
    Hamiltonian {
        matrix: m,
        frame: Frame::Lab,
    }
}

/// Free evolution in the double-rotating frame, `J S₁zS₂z`.
pub fn h_free(sys: &SpinSystem) -> Hamiltonian {
    Hamiltonian {
        matrix: two_spin_operator(Axis::Z, Axis::Z).scale(sys.j),
        frame: Frame::DoubleRotating,
    }
}

/// Phase of a continuous rf irradiation along ±x.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RfPhase {
    PlusX,
    MinusX,
}

/// `−ω₁S₁x − ω₂S₂x + J S₁zS₂z`: both rf fields on resonance with phase +x.
pub fn h_rf(sys: &SpinSystem, omega1: f64, omega2: f64) -> Hamiltonian {
    h_rf_phased(sys, omega1, omega2, RfPhase::PlusX)
}

pub fn h_rf_phased(sys: &SpinSystem, omega1: f64, omega2: f64, phase: RfPhase) -> Hamiltonian {
    let sign = match phase {
        RfPhase::PlusX => -1.0,
        RfPhase::MinusX => 1.0,
    };
    let m = spin_operator(Spin::One, Axis::X).scale(sign * omega1)
        + spin_operator(Spin::Two, Axis::X).scale(sign * omega2)
        + two_spin_operator(Axis::Z, Axis::Z).scale(sys.j);
    Hamiltonian {
        matrix: m,
        frame: Frame::DoubleRotating,
    }
}

pub fn propagate(rho: &DensityMatrix, h: &Hamiltonian, t: f64) -> Result<DensityMatrix> {
    if t < 0.0 {
        return Err(Error::param("t", format!("evolution time must be non-negative, got {t}")));
    }
    Ok(matrix_exponential(&h.matrix, t)?.apply(rho))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PhaseAxis {
    X,
    Y,
    MinusX,
    MinusY,
}

impl PhaseAxis {
    pub fn label(self) -> &'static str {
        match self {
            PhaseAxis::X => "x",
            PhaseAxis::Y => "y",
            PhaseAxis::MinusX => "-x",
            PhaseAxis::MinusY => "-y",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "x" => Some(PhaseAxis::X),
            "y" => Some(PhaseAxis::Y),
            "-x" => Some(PhaseAxis::MinusX),
            "-y" => Some(PhaseAxis::MinusY),
            _ => None,
        }
    }

    fn generator(self, spin: Spin) -> ComplexMatrix4 {
        match self {
            PhaseAxis::X => spin_operator(spin, Axis::X),
            PhaseAxis::Y => spin_operator(spin, Axis::Y),
            PhaseAxis::MinusX => -spin_operator(spin, Axis::X),
            PhaseAxis::MinusY => -spin_operator(spin, Axis::Y),
        }
    }
}

/// `exp(−iθ S_{spin,φ})`
pub fn pulse_propagator(spin: Spin, angle: f64, phase: PhaseAxis) -> Propagator {
    matrix_exponential(&phase.generator(spin), angle).expect("spin operators are Hermitian")
}

pub fn hard_pulse(rho: &DensityMatrix, spin: Spin, angle: f64, phase: PhaseAxis) -> DensityMatrix {
    pulse_propagator(spin, angle, phase).apply(rho)
}

/// Which rf combination is pinned to J/2 in a detuned Hartmann-Hahn block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DhhMode {
    /// Δ = ω₁ − ω₂ = J/2; Σ is free. Acts in the zero-quantum space.
    Delta,
    /// Σ = ω₁ + ω₂ = J/2; Δ is free. Acts in the double-quantum space.
    Sigma,
}

impl DhhMode {
    pub fn label(self) -> &'static str {
        match self {
            DhhMode::Delta => "delta",
            DhhMode::Sigma => "sigma",
        }
    }

    /// Default value of the unconstrained combination, rad/s.
    pub fn default_free_param(self, sys: &SpinSystem) -> f64 {
        match self {
            DhhMode::Delta => 5.0 * sys.j,
            DhhMode::Sigma => 0.0,
        }
    }
}

/// π√2/J
pub fn dhh_duration(sys: &SpinSystem) -> f64 {
    PI * 2f64.sqrt() / sys.j
}

/// Resolves (ω₁, ω₂) for a DHH block; rejects negative amplitudes.
pub fn dhh_amplitudes(mode: DhhMode, sys: &SpinSystem, free_param: f64) -> Result<(f64, f64)> {
    let pinned = sys.j / 2.0;
    let (sum, diff) = match mode {
        DhhMode::Delta => (free_param, pinned),
        DhhMode::Sigma => (pinned, free_param),
    };
    let omega1 = (sum + diff) / 2.0;
    let omega2 = (sum - diff) / 2.0;
    if omega1 < 0.0 || omega2 < 0.0 {
        return Err(Error::param(
            "free_param",
            format!("rf amplitudes must be non-negative, got ω₁ = {omega1}, ω₂ = {omega2}"),
        ));
    }
    Ok((omega1, omega2))
}

/// Imperfections applied to continuous rf blocks and hard pulses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RfControl {
    /// Multiplicative rf-amplitude scale (1 = nominal).
    pub scale: f64,
    /// Amplitudes of continuous blocks are rounded to multiples of this step (rad/s).
    pub amplitude_step: Option<f64>,
}

impl Default for RfControl {
    fn default() -> Self {
        Self {
            scale: 1.0,
            amplitude_step: None,
        }
    }
}

impl RfControl {
    pub fn ideal() -> Self {
        Self::default()
    }

    pub fn amplitude(&self, omega: f64) -> f64 {
        let scaled = omega * self.scale;
        match self.amplitude_step {
            Some(step) if step > 0.0 => (scaled / step).round() * step,
            _ => scaled,
        }
    }

    pub fn angle(&self, angle: f64) -> f64 {
        angle * self.scale
    }
}

/// DHH evolution for an explicit duration, with rf imperfections.
pub fn dhh_evolve(
    rho: &DensityMatrix,
    mode: DhhMode,
    sys: &SpinSystem,
    free_param: f64,
    t: f64,
    rf: &RfControl,
) -> Result<DensityMatrix> {
    let (w1, w2) = dhh_amplitudes(mode, sys, free_param)?;
    let h = h_rf_phased(sys, rf.amplitude(w1), rf.amplitude(w2), RfPhase::MinusX);
    propagate(rho, &h, t)
}

/// Ideal DHH block of duration π√2/J.
pub fn dhh_block(rho: &DensityMatrix, mode: DhhMode, sys: &SpinSystem, free_param: f64) -> Result<DensityMatrix> {
    dhh_evolve(rho, mode, sys, free_param, dhh_duration(sys), &RfControl::ideal())
}

pub fn dhh_propagator(mode: DhhMode, sys: &SpinSystem, free_param: f64) -> Result<Propagator> {
    let (w1, w2) = dhh_amplitudes(mode, sys, free_param)?;
    let h = h_rf_phased(sys, w1, w2, RfPhase::MinusX);
    matrix_exponential(&h.matrix, dhh_duration(sys))
}

/// Matched cross-polarization amplitude (√15/4)·J.
pub fn cp_amplitude(sys: &SpinSystem) -> f64 {
    15f64.sqrt() / 4.0 * sys.j
}

/// π/J
pub fn cp_duration(sys: &SpinSystem) -> f64 {
    PI / sys.j
}

pub fn cp_propagator(sys: &SpinSystem, t: f64, rf: &RfControl) -> Result<Propagator> {
    let w = cp_amplitude(sys);
    let h = h_rf(sys, rf.amplitude(w), rf.amplitude(w));
    matrix_exponential(&h.matrix, t)
}

pub fn cp_evolve(rho: &DensityMatrix, sys: &SpinSystem, t: f64, rf: &RfControl) -> Result<DensityMatrix> {
    if t < 0.0 {
        return Err(Error::param("t", "cross-polarization time must be non-negative"));
    }
    Ok(cp_propagator(sys, t, rf)?.apply(rho))
}

/// Resonant Hartmann-Hahn block, ω₁ = ω₂ = (√15/4)J for π/J.
pub fn cp_block(rho: &DensityMatrix, sys: &SpinSystem) -> Result<DensityMatrix> {
    cp_evolve(rho, sys, cp_duration(sys), &RfControl::ideal())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sector {
    /// {|↑↓⟩, |↓↑⟩}
    Zero,
    /// {|↑↑⟩, |↓↓⟩}
    Double,
}

impl Sector {
    /// Indices of the sector within the product basis of any quantization axis.
    pub fn indices(self) -> [usize; 2] {
        match self {
            Sector::Zero => [1, 2],
            Sector::Double => [0, 3],
        }
    }
}

/// Unitary whose columns are the product states quantized along `axis`,
/// in basis order |↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩.
pub fn product_basis(axis: Axis) -> ComplexMatrix4 {
    let kets = [
        product_state(true, true, axis),
        product_state(true, false, axis),
        product_state(false, true, axis),
        product_state(false, false, axis),
    ];
    ComplexMatrix4::from_fn(|r, c| kets[c].amplitudes()[r])
}

/// Expresses `a` in the product basis quantized along `axis`.
pub fn to_basis(a: &ComplexMatrix4, axis: Axis) -> ComplexMatrix4 {
    let w = product_basis(axis);
    w.adjoint() * *a * w
}

/// Projects ρ onto the zero- or double-quantum sector of the chosen basis:
/// `P ρ P` with P the sector projector. The result is an operator, not a
/// unit-trace state.
pub fn quantum_order_projector(rho: &DensityMatrix, basis_axis: Axis, sector: Sector) -> ComplexMatrix4 {
    let w = product_basis(basis_axis);
    let idx = sector.indices();
    let mut p = ComplexMatrix4::zeros();
    for i in idx {
        p.set(i, i, re(1.0));
    }
    let proj = w * p * w.adjoint();
    proj * *rho.matrix() * proj
}

/// Largest |U_ij| coupling the x-basis zero- and double-quantum sectors.
pub fn sector_leakage(u: &Propagator) -> f64 {
    let ux = to_basis(&u.0, Axis::X);
    let mut worst = 0.0f64;
    for i in Sector::Zero.indices() {
        for j in Sector::Double.indices() {
            worst = worst.max(ux.get(i, j).norm()).max(ux.get(j, i).norm());
        }
    }
    worst
}

/// The 2×2 block of `u` on `sector` in the basis quantized along `axis`.
pub fn sector_block(u: &ComplexMatrix4, axis: Axis, sector: Sector) -> [[C64; 2]; 2] {
    let m = to_basis(u, axis);
    let [a, b] = sector.indices();
    [[m.get(a, a), m.get(a, b)], [m.get(b, a), m.get(b, b)]]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{bell_state, deviation_fidelity, equilibrium_state, pseudo_pure, BellKind};

    fn sys() -> SpinSystem {
        SpinSystem::default()
    }

    #[test]
    fn zero_time_and_zero_generator() {
        let u = matrix_exponential(&ComplexMatrix4::zeros(), 3.0).unwrap();
        assert!(u.0.max_abs_diff(&ComplexMatrix4::identity()) < 1e-15);
        let h = h_rf(&sys(), 1000.0, 300.0);
        let u0 = matrix_exponential(&h.matrix, 0.0).unwrap();
        assert!(u0.0.max_abs_diff(&ComplexMatrix4::identity()) < 1e-14);
    }

    #[test]
    fn z_rotation_closed_form() {
        // exp(−i·2π·S₁z) = diag(e^{−iπ}, e^{−iπ}, e^{iπ}, e^{iπ}) = −𝕀
        let u = matrix_exponential(&spin_operator(Spin::One, Axis::Z).scale(2.0 * PI), 1.0).unwrap();
        assert!(u.0.max_abs_diff(&ComplexMatrix4::identity().scale(-1.0)) < 1e-14);
        let theta = 0.7;
        let u = matrix_exponential(&spin_operator(Spin::Two, Axis::Z), theta).unwrap();
        let expected = [-theta / 2.0, theta / 2.0, -theta / 2.0, theta / 2.0];
        for (i, phi) in expected.iter().enumerate() {
            assert!((u.0.get(i, i) - C64::from_polar(1.0, *phi)).norm() < 1e-14);
        }
        assert!((u.0.determinant().norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = ComplexMatrix4::zeros();
        m.set(0, 1, re(1.0));
        assert!(matches!(matrix_exponential(&m, 1.0), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn propagate_basic_properties() {
        let s = sys();
        let h = h_rf(&s, 2.0 * s.j, 0.3 * s.j);
        let mixed = DensityMatrix::maximally_mixed();
        let out = propagate(&mixed, &h, 0.01).unwrap();
        assert!(out.matrix().max_abs_diff(mixed.matrix()) < 1e-15);

        let rho = pseudo_pure(&bell_state(BellKind::T0, Axis::X), 0.3).unwrap();
        let t = 3.7e-3;
        let once = propagate(&rho, &h, t).unwrap();
        let twice = propagate(&propagate(&rho, &h, t / 2.0).unwrap(), &h, t / 2.0).unwrap();
        assert!(once.matrix().max_abs_diff(twice.matrix()) < 1e-10);
        assert!((once.purity() - rho.purity()).abs() < 1e-10);
        assert!(propagate(&rho, &h, -1.0).is_err());
    }

    #[test]
    fn zero_quantum_splitting_at_delta_half_j() {
        let s = sys();
        let (w1, w2) = (2.0 * s.j, 2.0 * s.j - s.j / 2.0);
        let h = h_rf(&s, w1, w2);
        let block = sector_block(&h.matrix, Axis::X, Sector::Zero);
        // eigenvalues of a 2×2 Hermitian block
        let tr = (block[0][0] + block[1][1]).re;
        let det = (block[0][0] * block[1][1] - block[0][1] * block[1][0]).re;
        let split = (tr * tr - 4.0 * det).sqrt();
        assert!((split - s.j / 2f64.sqrt()).abs() < 1e-9 * s.j);
    }

    #[test]
    fn free_hamiltonian_is_rf_with_zero_amplitude() {
        let s = sys();
        assert_eq!(h_rf(&s, 0.0, 0.0).matrix, h_free(&s).matrix);
        assert!(h_lab(&s).matrix.is_hermitian(0.0));
    }

    #[test]
    fn y_pulse_turns_z_into_x() {
        let s = sys();
        let rho = equilibrium_state(&s).unwrap();
        let out = hard_pulse(&rho, Spin::One, PI / 2.0, PhaseAxis::Y);
        let before = rho.expect(&spin_operator(Spin::One, Axis::Z));
        let after = out.expect(&spin_operator(Spin::One, Axis::X));
        assert!((before - after).abs() < 1e-15);
        let same = hard_pulse(&rho, Spin::Two, 0.0, PhaseAxis::MinusX);
        assert!(same.matrix().max_abs_diff(rho.matrix()) < 1e-15);
    }

    #[test]
    fn minus_y_pulses_rotate_t0_x_to_t0_z() {
        let rho = DensityMatrix::from_pure(&bell_state(BellKind::T0, Axis::X));
        let out = hard_pulse(&rho, Spin::One, PI / 2.0, PhaseAxis::MinusY);
        let out = hard_pulse(&out, Spin::Two, PI / 2.0, PhaseAxis::MinusY);
        let target = bell_state(BellKind::T0, Axis::Z);
        assert!((crate::states::fidelity(&out, &target) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dhh_table_mappings() {
        let s = sys();
        let cases = [
            (false, true, DhhMode::Delta, BellKind::S0),
            (true, false, DhhMode::Delta, BellKind::T0),
            (true, true, DhhMode::Sigma, BellKind::PsiPlus),
            (false, false, DhhMode::Sigma, BellKind::PsiMinus),
        ];
        for (u1, u2, mode, kind) in cases {
            let rho = DensityMatrix::from_pure(&product_state(u1, u2, Axis::X));
            let out = dhh_block(&rho, mode, &s, mode.default_free_param(&s)).unwrap();
            let f = crate::states::fidelity(&out, &bell_state(kind, Axis::X));
            assert!(f >= 1.0 - 1e-9, "{kind}: {f}");
        }
    }

    #[test]
    fn dhh_rejects_negative_amplitudes() {
        let s = sys();
        assert!(dhh_amplitudes(DhhMode::Sigma, &s, s.j).is_err());
        assert!(dhh_amplitudes(DhhMode::Delta, &s, 0.1 * s.j).is_err());
        let (w1, w2) = dhh_amplitudes(DhhMode::Sigma, &s, 0.0).unwrap();
        assert!((w1 - s.j / 4.0).abs() < 1e-12 && (w2 - s.j / 4.0).abs() < 1e-12);
    }

    #[test]
    fn cp_block_leaves_identity() {
        let s = sys();
        let mixed = DensityMatrix::maximally_mixed();
        let out = cp_block(&mixed, &s).unwrap();
        assert!(out.matrix().max_abs_diff(mixed.matrix()) < 1e-15);
    }

    #[test]
    fn sector_projections() {
        let s0 = DensityMatrix::from_pure(&bell_state(BellKind::S0, Axis::X));
        let zq = quantum_order_projector(&s0, Axis::X, Sector::Zero);
        assert!(zq.max_abs_diff(s0.matrix()) < 1e-14);
        let psi = DensityMatrix::from_pure(&bell_state(BellKind::PsiPlus, Axis::X));
        let dq = quantum_order_projector(&psi, Axis::X, Sector::Double);
        assert!(dq.max_abs_diff(psi.matrix()) < 1e-14);

        let eq = equilibrium_state(&sys()).unwrap();
        for axis in [Axis::X, Axis::Z] {
            let rho = if axis == Axis::Z {
                eq
            } else {
                hard_pulse(&hard_pulse(&eq, Spin::One, PI / 2.0, PhaseAxis::Y), Spin::Two, PI / 2.0, PhaseAxis::Y)
            };
            let sum = quantum_order_projector(&rho, axis, Sector::Zero)
                + quantum_order_projector(&rho, axis, Sector::Double);
            assert!(sum.max_abs_diff(rho.matrix()) < 1e-14);
        }
    }

    #[test]
    fn dhh_fidelity_peaks_at_nominal_time() {
        let s = sys();
        let rho = DensityMatrix::from_pure(&product_state(true, true, Axis::X));
        let target = bell_state(BellKind::PsiPlus, Axis::X);
        let t0 = dhh_duration(&s);
        let fids: Vec<f64> = (-5..=5)
            .map(|k| {
                let t = t0 * (1.0 + 0.02 * k as f64);
                let out = dhh_evolve(&rho, DhhMode::Sigma, &s, 0.0, t, &RfControl::ideal()).unwrap();
                deviation_fidelity(&out, &target)
            })
            .collect();
        let best = fids.iter().cloned().enumerate().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap().0;
        assert_eq!(best, 5);
    }
}
