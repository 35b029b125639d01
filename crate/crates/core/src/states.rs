//! Spin operators, Bell states, pseudo-pure states and the equilibrium state.
//!
//! Expectation values are `⟨A⟩ = Tr(ρA)`. With trace-one ρ and spin-½
//! operators this gives `⟨S₁z⟩ = ε₁` for the equilibrium state
//! `𝕀/4 + ε₁S₁z + ε₂S₂z`, so the conversion constant between the
//! density-matrix and the relaxation-equation normalizations is exactly 1.

use std::fmt;
use std::str::FromStr;

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{c, re, ComplexMatrix4, PureState, C64};
use crate::system::SpinSystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Spin {
    /// ¹H
    One,
    /// ¹³C
    Two,
}

impl Spin {
    pub fn index(self) -> usize {
        match self {
            Spin::One => 1,
            Spin::Two => 2,
        }
    }

    pub fn from_index(i: usize) -> Result<Self> {
        match i {
            1 => Ok(Spin::One),
            2 => Ok(Spin::Two),
            _ => Err(Error::param("spin", format!("spin index must be 1 or 2, got {i}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl FromStr for Axis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" | "X" => Ok(Axis::X),
            "y" | "Y" => Ok(Axis::Y),
            "z" | "Z" => Ok(Axis::Z),
            _ => Err(Error::param("axis", format!("unknown axis `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BellKind {
    S0,
    T0,
    PsiPlus,
    PsiMinus,
}

impl BellKind {
    pub const ALL: [BellKind; 4] = [BellKind::S0, BellKind::T0, BellKind::PsiPlus, BellKind::PsiMinus];

    pub fn name(self) -> &'static str {
        match self {
            BellKind::S0 => "S0",
            BellKind::T0 => "T0",
            BellKind::PsiPlus => "psi_plus",
            BellKind::PsiMinus => "psi_minus",
        }
    }

    /// Zero-quantum Bell states (S0, T0) versus double-quantum (ψ±).
    pub fn is_zero_quantum(self) -> bool {
        matches!(self, BellKind::S0 | BellKind::T0)
    }
}

impl fmt::Display for BellKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BellKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "s0" | "singlet" => Ok(BellKind::S0),
            "t0" => Ok(BellKind::T0),
            "psi_plus" | "psi+" | "psiplus" => Ok(BellKind::PsiPlus),
            "psi_minus" | "psi-" | "psiminus" => Ok(BellKind::PsiMinus),
            _ => Err(Error::param("kind", format!("unknown Bell state `{s}`"))),
        }
    }
}

fn single_spin(axis: Axis) -> Matrix2<C64> {
    let z = re(0.0);
    match axis {
        Axis::X => Matrix2::new(z, re(0.5), re(0.5), z),
        Axis::Y => Matrix2::new(z, c(0.0, -0.5), c(0.0, 0.5), z),
        Axis::Z => Matrix2::new(re(0.5), z, z, re(-0.5)),
    }
}

/// S_{spin,axis} on the two-spin space.
pub fn spin_operator(spin: Spin, axis: Axis) -> ComplexMatrix4 {
    let id = Matrix2::identity();
    match spin {
        Spin::One => ComplexMatrix4::kron(&single_spin(axis), &id),
        Spin::Two => ComplexMatrix4::kron(&id, &single_spin(axis)),
    }
}

/// S_{i+} = S_{ix} + i S_{iy}
pub fn raising(spin: Spin) -> ComplexMatrix4 {
    spin_operator(spin, Axis::X) + spin_operator(spin, Axis::Y).scale_c(c(0.0, 1.0))
}

/// S_{i−} = S_{ix} − i S_{iy}
pub fn lowering(spin: Spin) -> ComplexMatrix4 {
    spin_operator(spin, Axis::X) - spin_operator(spin, Axis::Y).scale_c(c(0.0, 1.0))
}

/// S₁a S₂b
pub fn two_spin_operator(a: Axis, b: Axis) -> ComplexMatrix4 {
    spin_operator(Spin::One, a) * spin_operator(Spin::Two, b)
}

/// Single-spin eigenkets |↑⟩ and |↓⟩ quantized along `axis` (x or z).
fn single_ket(up: bool, axis: Axis) -> [C64; 2] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match (axis, up) {
        (Axis::Z, true) => [re(1.0), re(0.0)],
        (Axis::Z, false) => [re(0.0), re(1.0)],
        (Axis::X, true) => [re(h), re(h)],
        (Axis::X, false) => [re(h), re(-h)],
        (Axis::Y, true) => [re(h), c(0.0, h)],
        (Axis::Y, false) => [re(h), c(0.0, -h)],
    }
}

/// Product ket |m₁ m₂⟩ quantized along `axis`; `true` is spin-up.
pub fn product_state(up1: bool, up2: bool, axis: Axis) -> PureState {
    PureState::product(single_ket(up1, axis), single_ket(up2, axis))
        .expect("product of unit kets is normalized")
}

fn superpose(a: &PureState, b: &PureState, sign: f64) -> PureState {
    let amps: [C64; 4] = std::array::from_fn(|i| a.0[i] + b.0[i] * sign);
    PureState::new(amps).expect("orthogonal product states")
}

/// Bell state quantized along `axis`:
/// S0 = (|↑↓⟩ − |↓↑⟩)/√2, T0 = (|↑↓⟩ + |↓↑⟩)/√2, ψ± = (|↑↑⟩ ± |↓↓⟩)/√2.
pub fn bell_state(kind: BellKind, axis: Axis) -> PureState {
    let ud = product_state(true, false, axis);
    let du = product_state(false, true, axis);
    let uu = product_state(true, true, axis);
    let dd = product_state(false, false, axis);
    match kind {
        BellKind::S0 => superpose(&ud, &du, -1.0),
        BellKind::T0 => superpose(&ud, &du, 1.0),
        BellKind::PsiPlus => superpose(&uu, &dd, 1.0),
        BellKind::PsiMinus => superpose(&uu, &dd, -1.0),
    }
}

/// Hermitian, unit-trace 4×4 state of the pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(ComplexMatrix4);

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const POSITIVITY_TOL: f64 = 1e-12;

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(m: ComplexMatrix4) -> Result<Self> {
        let rho = Self::new_unchecked_positivity(m)?;
        let min = rho.min_eigenvalue();
        if min < -POSITIVITY_TOL {
            return Err(Error::NotPositive { min_eigenvalue: min });
        }
        Ok(rho)
    }

    /// Validates Hermiticity and unit trace only. Reconstructed and
    /// noise-averaged states may be slightly non-positive; that is reported
    /// through [`DensityMatrix::min_eigenvalue`], not rejected.
    pub fn new_unchecked_positivity(m: ComplexMatrix4) -> Result<Self> {
        let dev = m.hermiticity_deviation();
        if dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation: dev });
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::BadTrace { trace: tr.re });
        }
        Ok(Self(m))
    }

    pub(crate) fn from_matrix_unchecked(m: ComplexMatrix4) -> Self {
        Self(m)
    }

    pub fn maximally_mixed() -> Self {
        Self(ComplexMatrix4::identity().scale(0.25))
    }

    pub fn from_pure(psi: &PureState) -> Self {
        Self(psi.projector())
    }

    pub fn matrix(&self) -> &ComplexMatrix4 {
        &self.0
    }

    /// ⟨A⟩ = Tr(ρA), real part.
    pub fn expect(&self, a: &ComplexMatrix4) -> f64 {
        self.0.trace_product(a).re
    }

    /// ρ − 𝕀/4
    pub fn deviation(&self) -> ComplexMatrix4 {
        self.0 - ComplexMatrix4::identity().scale(0.25)
    }

    pub fn purity(&self) -> f64 {
        self.0.trace_product(&self.0).re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.0.eigenvalues_hermitian()[0]
    }

    pub fn eigenvalues(&self) -> [f64; 4] {
        self.0.eigenvalues_hermitian()
    }

    /// Rescales the deviation to the norm of a pure-state deviation, so a
    /// pseudo-pure state `𝕀/4 + c(|ψ⟩⟨ψ| − 𝕀/4)` maps to |ψ⟩⟨ψ| for any c > 0.
    /// Returns 𝕀/4 when the deviation vanishes.
    pub fn normalized_deviation_state(&self) -> DensityMatrix {
        let dev = self.deviation();
        let norm = dev.frobenius_norm();
        let quarter = ComplexMatrix4::identity().scale(0.25);
        if norm < 1e-300 {
            return Self(quarter);
        }
        Self(quarter + dev.scale(PURE_DEVIATION_NORM / norm))
    }

    /// Partial trace over spin 2 (`Spin::Two`) or spin 1 (`Spin::One`).
    pub fn reduced(&self, traced_out: Spin) -> Matrix2<C64> {
        let m = &self.0;
        Matrix2::from_fn(|r, col| match traced_out {
            Spin::Two => m.get(2 * r, 2 * col) + m.get(2 * r + 1, 2 * col + 1),
            Spin::One => m.get(r, col) + m.get(r + 2, col + 2),
        })
    }
}

/// ‖|ψ⟩⟨ψ| − 𝕀/4‖_F = √(3/4)
pub const PURE_DEVIATION_NORM: f64 = 0.866_025_403_784_438_6;

/// Product-operator form of the z-axis Bell projectors, with S± = Sx ± iSy.
pub fn bell_operator_form(kind: BellKind) -> DensityMatrix {
    let quarter = ComplexMatrix4::identity().scale(0.25);
    let zz = two_spin_operator(Axis::Z, Axis::Z);
    let flip_flop = raising(Spin::One) * lowering(Spin::Two) + lowering(Spin::One) * raising(Spin::Two);
    let flip_flip = raising(Spin::One) * raising(Spin::Two) + lowering(Spin::One) * lowering(Spin::Two);
    let m = match kind {
        BellKind::S0 => quarter - zz - flip_flop.scale(0.5),
        BellKind::T0 => quarter - zz + flip_flop.scale(0.5),
        BellKind::PsiPlus => quarter + zz + flip_flip.scale(0.5),
        BellKind::PsiMinus => quarter + zz - flip_flip.scale(0.5),
    };
    DensityMatrix(m)
}

/// High-temperature equilibrium `𝕀/4 + ε₁S₁z + ε₂S₂z`.
pub fn equilibrium_state(sys: &SpinSystem) -> Result<DensityMatrix> {
    if !(sys.temperature > 0.0) {
        return Err(Error::param("temperature", "must be positive"));
    }
    Ok(equilibrium_from_polarizations(sys.epsilon1(), sys.epsilon2()))
}

pub fn equilibrium_from_polarizations(eps1: f64, eps2: f64) -> DensityMatrix {
    let m = ComplexMatrix4::identity().scale(0.25)
        + spin_operator(Spin::One, Axis::Z).scale(eps1)
        + spin_operator(Spin::Two, Axis::Z).scale(eps2);
    DensityMatrix(m)
}

/// `(1 − c)·𝕀/4 + c·|ψ⟩⟨ψ|`, positive for c ∈ [−1/3, 1].
pub fn pseudo_pure(psi: &PureState, weight: f64) -> Result<DensityMatrix> {
    if !(-1.0 / 3.0..=1.0).contains(&weight) {
        return Err(Error::PseudoPureWeight(weight));
    }
    let m = ComplexMatrix4::identity().scale(0.25 * (1.0 - weight)) + psi.projector().scale(weight);
    Ok(DensityMatrix(m))
}

/// ⟨ψ|ρ|ψ⟩
pub fn fidelity(rho: &DensityMatrix, psi: &PureState) -> f64 {
    psi.expectation(rho.matrix()).re
}

/// Fidelity of the normalized deviation: `Tr(Δ·D) / (‖Δ‖‖D‖)` with
/// Δ = ρ − 𝕀/4 and D = |ψ⟩⟨ψ| − 𝕀/4. Equals 1 for any pseudo-pure ρ of ψ
/// with positive weight, and is insensitive to global phase of ψ.
pub fn deviation_fidelity(rho: &DensityMatrix, psi: &PureState) -> f64 {
    let dev = rho.deviation();
    let norm = dev.frobenius_norm();
    if norm < 1e-300 {
        return 0.0;
    }
    let target = psi.projector() - ComplexMatrix4::identity().scale(0.25);
    dev.trace_product(&target).re / (norm * PURE_DEVIATION_NORM)
}

/// Signal-retaining fidelity `Tr(Δ·D) / (c·‖D‖²)`: the fraction of the
/// pseudo-pure deviation of weight `c` that survives in ρ along D. Unlike
/// [`deviation_fidelity`] it drops when imperfections shrink the deviation,
/// e.g. after averaging over an rf-inhomogeneous ensemble.
pub fn attenuated_fidelity(rho: &DensityMatrix, psi: &PureState, weight: f64) -> f64 {
    let target = psi.projector() - ComplexMatrix4::identity().scale(0.25);
    rho.deviation().trace_product(&target).re / (weight * PURE_DEVIATION_NORM * PURE_DEVIATION_NORM)
}
