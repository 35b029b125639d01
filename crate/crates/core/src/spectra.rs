//! FID synthesis, Fourier transform and the antisymmetric spectral component.
//!
//! Readout: an ideal `(π/2)_y` pulse on the observed spin, then
//! `s(t) = ⟨S_x⟩ + i⟨S_y⟩` under `J S₁zS₂z` at zero offset, apodized by
//! `exp(−π·lw·t)`.
//!
//! Frequency axis: with `H_lab = −ΩS_z` a spin precessing at Ω gives
//! `⟨S₊⟩ ∝ exp(−iΩt)`. Offsets are reported so that such a component sits at
//! +Ω/2π, i.e. the transform kernel is `exp(+i2πft)`. With this orientation a
//! z-ordered state with positive ⟨S₁z⟩ reads out as a positive absorptive
//! doublet with zero phase correction.

use std::fmt::Write as _;

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::dynamics::{hard_pulse, PhaseAxis};
use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix4, C64};
use crate::states::{raising, DensityMatrix, Spin};
use crate::system::SpinSystem;

#[derive(Debug, Clone, PartialEq)]
pub struct Fid {
    pub samples: Vec<C64>,
    /// Sampling interval, s.
    pub dwell: f64,
    pub spin: Spin,
}

impl Fid {
    pub fn new(samples: Vec<C64>, dwell: f64, spin: Spin) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::param("samples", "an FID needs at least two points"));
        }
        if !(dwell > 0.0 && dwell.is_finite()) {
            return Err(Error::param("dwell", "must be positive"));
        }
        Ok(Self { samples, dwell, spin })
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.samples.len()).map(|k| k as f64 * self.dwell)
    }

    /// CSV with columns `t_s, re, im`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t_s,re,im\n");
        for (t, z) in self.times().zip(&self.samples) {
            let _ = writeln!(out, "{t},{},{}", z.re, z.im);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Offsets in Hz, strictly increasing with spacing 1/(N·dwell).
    pub offsets: Vec<f64>,
    pub amplitudes: Vec<C64>,
}

impl Spectrum {
    pub fn spacing(&self) -> f64 {
        self.offsets[1] - self.offsets[0]
    }

    /// CSV with columns `offset_hz, re, im`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("offset_hz,re,im\n");
        for (f, z) in self.offsets.iter().zip(&self.amplitudes) {
            let _ = writeln!(out, "{f},{},{}", z.re, z.im);
        }
        out
    }

    /// Trapezoidal integral of the real part over grid points in [lo, hi].
    pub fn integrate_real(&self, lo: f64, hi: f64) -> f64 {
        let pts: Vec<(f64, f64)> = self
            .offsets
            .iter()
            .zip(&self.amplitudes)
            .filter(|(f, _)| **f >= lo && **f <= hi)
            .map(|(f, z)| (*f, z.re))
            .collect();
        pts.windows(2).map(|w| 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0)).sum()
    }

    /// Offset of the largest |Re g|.
    pub fn peak_offset(&self, lo: f64, hi: f64) -> Option<(f64, f64)> {
        self.offsets
            .iter()
            .zip(&self.amplitudes)
            .filter(|(f, _)| **f >= lo && **f <= hi)
            .map(|(f, z)| (*f, z.re))
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
    }
}

/// Acquisition settings for readout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Acquisition {
    pub points: usize,
    pub dwell: f64,
}

impl Default for Acquisition {
    /// 4096 points at 1 ms: ±500 Hz window, 0.24 Hz resolution.
    fn default() -> Self {
        Self {
            points: 4096,
            dwell: 1e-3,
        }
    }
}

/// Largest dwell that samples the full J splitting: 1/(2·J/2π).
pub fn nyquist_dwell(sys: &SpinSystem) -> f64 {
    1.0 / (2.0 * sys.j_hz())
}

/// Analytic FID: after the readout pulse only elements ρ_{ab} with
/// (S₊)_{ba} ≠ 0 contribute, each oscillating at E_a − E_b of J S₁zS₂z.
pub fn synthesize_fid(rho: &DensityMatrix, sys: &SpinSystem, spin: Spin, points: usize, dwell: f64) -> Result<Fid> {
    if points < 2 {
        return Err(Error::param("points", "need at least two points"));
    }
    if !(dwell > 0.0 && dwell.is_finite()) {
        return Err(Error::param("dwell", "must be positive"));
    }
    let limit = nyquist_dwell(sys);
    if dwell > limit {
        return Err(Error::Nyquist { dwell, limit });
    }
    let after = hard_pulse(rho, spin, std::f64::consts::FRAC_PI_2, PhaseAxis::Y);
    let plus = raising(spin);
    let energies = free_energies(sys);
    let m = after.matrix();
    let mut lines: Vec<(C64, f64)> = Vec::new();
    for a in 0..4 {
        for b in 0..4 {
            let s = plus.get(b, a);
            if s.norm() == 0.0 {
                continue;
            }
            lines.push((m.get(a, b) * s, energies[a] - energies[b]));
        }
    }
    let decay = std::f64::consts::PI * sys.linewidth(spin);
    let samples = (0..points)
        .map(|k| {
            let t = k as f64 * dwell;
            let sum: C64 = lines.iter().map(|(amp, w)| amp * C64::from_polar(1.0, -w * t)).sum();
            sum * (-decay * t).exp()
        })
        .collect();
    Fid::new(samples, dwell, spin)
}

fn free_energies(sys: &SpinSystem) -> [f64; 4] {
    let zz = crate::states::two_spin_operator(crate::states::Axis::Z, crate::states::Axis::Z);
    let h: ComplexMatrix4 = zz.scale(sys.j);
    [h.get(0, 0).re, h.get(1, 1).re, h.get(2, 2).re, h.get(3, 3).re]
}

/// `g(f) = dwell · Σ_k s_k e^{+i2πf t_k}` on the grid `f = m/(N·dwell)`,
/// m = −⌊N/2⌋ … N−1−⌊N/2⌋. Parseval: Σ|g|²·Δf = Σ|s|²·dwell.
pub fn fft_spectrum(fid: &Fid) -> Spectrum {
    let n = fid.samples.len();
    let mut buf = fid.samples.clone();
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_inverse(n).process(&mut buf);
    let df = 1.0 / (n as f64 * fid.dwell);
    let half = (n / 2) as i64;
    let mut offsets = Vec::with_capacity(n);
    let mut amplitudes = Vec::with_capacity(n);
    for m in -half..(n as i64 - half) {
        let bin = m.rem_euclid(n as i64) as usize;
        offsets.push(m as f64 * df);
        amplitudes.push(buf[bin] * fid.dwell);
    }
    Spectrum { offsets, amplitudes }
}

/// Integration windows of the antisymmetric component, Hz.
pub const GA_WINDOW: (f64, f64) = (20.0, 100.0);

/// `G_a = |∫₂₀¹⁰⁰ Re g − ∫₋₁₀₀⁻²⁰ Re g|`
pub fn antisymmetric_component(spec: &Spectrum) -> Result<f64> {
    let (lo, hi) = GA_WINDOW;
    let min = *spec.offsets.first().unwrap_or(&0.0);
    let max = *spec.offsets.last().unwrap_or(&0.0);
    if min > -hi || max < hi {
        return Err(Error::SpectralRange {
            needed_hz: hi,
            min_hz: min,
            max_hz: max,
        });
    }
    let pos = spec.integrate_real(lo, hi);
    let neg = spec.integrate_real(-hi, -lo);
    Ok((pos - neg).abs())
}

/// Signed version `∫₊ − ∫₋`, useful for reading the peak-sign pattern.
pub fn signed_asymmetry(spec: &Spectrum) -> f64 {
    let (lo, hi) = GA_WINDOW;
    spec.integrate_real(lo, hi) - spec.integrate_real(-hi, -lo)
}

/// ¹H spectrum of ρ with the given acquisition.
pub fn proton_spectrum(rho: &DensityMatrix, sys: &SpinSystem, acq: &Acquisition) -> Result<Spectrum> {
    let fid = synthesize_fid(rho, sys, Spin::One, acq.points, acq.dwell)?;
    Ok(fft_spectrum(&fid))
}

pub fn proton_ga(rho: &DensityMatrix, sys: &SpinSystem, acq: &Acquisition) -> Result<f64> {
    antisymmetric_component(&proton_spectrum(rho, sys, acq)?)
}
