//! Coupled longitudinal relaxation of ⟨S₁z⟩, ⟨S₂z⟩ and ⟨S₁zS₂z⟩.
//!
//! ```text
//! d/dt (s1, s2, s12) = −R · (s1 − ε₁, s2 − ε₂, s12)
//!
//!     | μ₁   σ₁₂  δ₁  |
//! R = | σ₁₂  μ₂   δ₂  |
//!     | δ₁   δ₂   μ₁₂ |
//! ```
//!
//! The solution is exact: `x(τ) − x_eq = V e^{−Λτ} Vᵀ (x(0) − x_eq)` with the
//! spectral decomposition `R = V Λ Vᵀ`.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector, Matrix3, SymmetricEigen, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix4;
use crate::par::{map_indexed, Execution};
use crate::spectra::{proton_ga, Acquisition};
use crate::states::{spin_operator, two_spin_operator, Axis, BellKind, DensityMatrix, Spin};
use crate::system::SpinSystem;

/// Relaxation rates, all in s⁻¹.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateMatrix {
    pub mu1: f64,
    pub mu2: f64,
    pub mu12: f64,
    pub sigma12: f64,
    pub delta1: f64,
    pub delta2: f64,
}

/// Initial relaxation times of the zero- and double-quantum Bell states the
/// default rates are calibrated to reproduce, s.
pub const CALIBRATION_TAU_S0: f64 = 2.4;
pub const CALIBRATION_TAU_PSI: f64 = 3.0;

impl RateMatrix {
    pub fn uncoupled(mu1: f64, mu2: f64, mu12: f64) -> Self {
        Self {
            mu1,
            mu2,
            mu12,
            sigma12: 0.0,
            delta1: 0.0,
            delta2: 0.0,
        }
    }

    /// Rates that reproduce initial decay times of 2.4 s (S0, T0) and
    /// 3.0 s (ψ±): μ₁₂ = ½(1/2.4 + 1/3.0) and (δ₁ε₁ + δ₂ε₂)/(ε₁ + ε₂) =
    /// (1/16)(1/2.4 − 1/3.0). Only those two combinations are constrained;
    /// δ₂ = 0, μ₁ = μ₂ = 0.3 s⁻¹ and σ₁₂ = 0 are free choices.
    pub fn calibrated(sys: &SpinSystem) -> Self {
        let (r_s0, r_psi) = (1.0 / CALIBRATION_TAU_S0, 1.0 / CALIBRATION_TAU_PSI);
        let mu12 = 0.5 * (r_s0 + r_psi);
        let effective = (r_s0 - r_psi) / 16.0;
        let (e1, e2) = (sys.epsilon1(), sys.epsilon2());
        Self {
            mu1: 0.3,
            mu2: 0.3,
            mu12,
            sigma12: 0.0,
            delta1: effective * (e1 + e2) / e1,
            delta2: 0.0,
        }
    }

    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::new(
            self.mu1, self.sigma12, self.delta1, //
            self.sigma12, self.mu2, self.delta2, //
            self.delta1, self.delta2, self.mu12,
        )
    }

    /// (δ₁ε₁ + δ₂ε₂)/(ε₁ + ε₂)
    pub fn effective_cross_rate(&self, sys: &SpinSystem) -> f64 {
        let (e1, e2) = (sys.epsilon1(), sys.epsilon2());
        (self.delta1 * e1 + self.delta2 * e2) / (e1 + e2)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("mu1", self.mu1),
            ("mu2", self.mu2),
            ("mu12", self.mu12),
            ("sigma12", self.sigma12),
            ("delta1", self.delta1),
            ("delta2", self.delta2),
        ] {
            if !v.is_finite() {
                return Err(Error::param(name, "rate must be finite"));
            }
        }
        let values = eigenmodes_unchecked(self).values;
        if values.iter().any(|l| *l <= 0.0) {
            return Err(Error::RateMatrixNotPositive { eigenvalues: values });
        }
        Ok(())
    }

    /// Reads `key=value` lines (`mu1`, `mu2`, `mu12`, `sigma12`, `delta1`,
    /// `delta2`, in s⁻¹) over `base`. Blank lines and `#` comments are ignored;
    /// unknown keys are errors.
    pub fn parse_kv(text: &str, base: RateMatrix) -> Result<Self> {
        let mut r = base;
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::param("rates", format!("line {}: expected key=value", n + 1)))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::param("rates", format!("line {}: bad number `{}`", n + 1, v.trim())))?;
            if !r.set(k.trim(), v) {
                return Err(Error::param("rates", format!("line {}: unknown key `{}`", n + 1, k.trim())));
            }
        }
        Ok(r)
    }

    /// Sets a rate by its config key; returns false for unknown keys.
    pub fn set(&mut self, key: &str, v: f64) -> bool {
        match key {
            "mu1" => self.mu1 = v,
            "mu2" => self.mu2 = v,
            "mu12" => self.mu12 = v,
            "sigma12" => self.sigma12 = v,
            "delta1" => self.delta1 = v,
            "delta2" => self.delta2 = v,
            _ => return false,
        }
        true
    }
}

/// ⟨S₁z⟩, ⟨S₂z⟩, ⟨S₁zS₂z⟩ with ⟨A⟩ = Tr(ρA).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagObservables {
    pub s1z: f64,
    pub s2z: f64,
    pub s1zs2z: f64,
}

impl DiagObservables {
    pub fn equilibrium(sys: &SpinSystem) -> Self {
        Self {
            s1z: sys.epsilon1(),
            s2z: sys.epsilon2(),
            s1zs2z: 0.0,
        }
    }

    pub fn from_density(rho: &DensityMatrix) -> Self {
        Self {
            s1z: rho.expect(&spin_operator(Spin::One, Axis::Z)),
            s2z: rho.expect(&spin_operator(Spin::Two, Axis::Z)),
            s1zs2z: rho.expect(&two_spin_operator(Axis::Z, Axis::Z)),
        }
    }

    /// Diagonal state `𝕀/4 + s1·S₁z + s2·S₂z + 4·s12·S₁zS₂z` with these averages.
    pub fn to_density(&self) -> DensityMatrix {
        let m = ComplexMatrix4::identity().scale(0.25)
            + spin_operator(Spin::One, Axis::Z).scale(self.s1z)
            + spin_operator(Spin::Two, Axis::Z).scale(self.s2z)
            + two_spin_operator(Axis::Z, Axis::Z).scale(4.0 * self.s1zs2z);
        DensityMatrix::from_matrix_unchecked(m)
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self::from_vector(self.vector() * k)
    }

    fn vector(&self) -> Vector3<f64> {
        Vector3::new(self.s1z, self.s2z, self.s1zs2z)
    }

    fn from_vector(v: Vector3<f64>) -> Self {
        Self {
            s1z: v[0],
            s2z: v[1],
            s1zs2z: v[2],
        }
    }
}

/// Observables right after preparing a pseudo-pure Bell state of weight
/// (ε₁+ε₂)/2: no net polarization and ⟨S₁zS₂z⟩ = ∓(ε₁+ε₂)/8.
pub fn bell_initial_conditions(kind: BellKind, sys: &SpinSystem) -> DiagObservables {
    let c = (sys.epsilon1() + sys.epsilon2()) / 8.0;
    DiagObservables {
        s1z: 0.0,
        s2z: 0.0,
        s1zs2z: if kind.is_zero_quantum() { -c } else { c },
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Eigenmodes {
    /// Ascending eigenvalues, s⁻¹.
    pub values: [f64; 3],
    /// Orthonormal eigenvectors as columns, matching `values`.
    pub vectors: Matrix3<f64>,
}

fn eigenmodes_unchecked(rates: &RateMatrix) -> Eigenmodes {
    let eig = SymmetricEigen::new(rates.matrix());
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.map(|i| eig.eigenvalues[i]);
    let vectors = Matrix3::from_fn(|r, c| eig.eigenvectors[(r, order[c])]);
    Eigenmodes { values, vectors }
}

pub fn eigenmodes(rates: &RateMatrix) -> Result<Eigenmodes> {
    rates.validate()?;
    Ok(eigenmodes_unchecked(rates))
}

/// Precomputed solution operator for repeated evaluation on a τ grid.
#[derive(Debug, Clone)]
pub struct RelaxationSolver {
    modes: Eigenmodes,
    eq: Vector3<f64>,
}

impl RelaxationSolver {
    pub fn new(rates: &RateMatrix, sys: &SpinSystem) -> Result<Self> {
        Ok(Self {
            modes: eigenmodes(rates)?,
            eq: DiagObservables::equilibrium(sys).vector(),
        })
    }

    pub fn evolve(&self, obs0: &DiagObservables, tau: f64) -> Result<DiagObservables> {
        if !(tau >= 0.0) {
            return Err(Error::param("tau", format!("must be non-negative, got {tau}")));
        }
        let v = &self.modes.vectors;
        let coeffs = v.transpose() * (obs0.vector() - self.eq);
        let decayed = Vector3::from_fn(|i, _| coeffs[i] * (-self.modes.values[i] * tau).exp());
        Ok(DiagObservables::from_vector(self.eq + v * decayed))
    }

    pub fn modes(&self) -> &Eigenmodes {
        &self.modes
    }
}

pub fn relax_evolve(obs0: &DiagObservables, rates: &RateMatrix, sys: &SpinSystem, tau: f64) -> Result<DiagObservables> {
    RelaxationSolver::new(rates, sys)?.evolve(obs0, tau)
}

/// Right-hand side `−R (x − x_eq)`.
pub fn relaxation_rhs(obs: &DiagObservables, rates: &RateMatrix, sys: &SpinSystem) -> DiagObservables {
    let d = -(rates.matrix() * (obs.vector() - DiagObservables::equilibrium(sys).vector()));
    DiagObservables::from_vector(d)
}

/// Apparent initial decay rate of ⟨S₁zS₂z⟩:
/// `μ₁₂ − δ₁ ε₁/s12(0) − δ₂ ε₂/s12(0)`.
pub fn initial_rate(rates: &RateMatrix, obs0: &DiagObservables, sys: &SpinSystem) -> Result<f64> {
    let c0 = obs0.s1zs2z;
    if c0 == 0.0 {
        return Err(Error::UndefinedRate);
    }
    Ok(rates.mu12 - rates.delta1 * sys.epsilon1() / c0 - rates.delta2 * sys.epsilon2() / c0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayCurve {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl DecayCurve {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::param("curve", "times and values differ in length"));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::param("curve", "times must be strictly increasing"));
        }
        if values.iter().chain(&times).any(|v| !v.is_finite()) {
            return Err(Error::param("curve", "values must be finite"));
        }
        Ok(Self { times, values })
    }

    /// CSV with columns `tau_s, ga`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("tau_s,ga\n");
        for (t, v) in self.times.iter().zip(&self.values) {
            let _ = writeln!(out, "{t},{v}");
        }
        out
    }

    /// Parses `tau_s, ga` CSV; a non-numeric first line is taken as a header.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split(',').map(str::trim);
            let (Some(a), Some(b)) = (cols.next(), cols.next()) else {
                return Err(Error::param("curve", format!("line {}: expected two columns", n + 1)));
            };
            match (a.parse::<f64>(), b.parse::<f64>()) {
                (Ok(t), Ok(v)) => {
                    times.push(t);
                    values.push(v);
                }
                _ if times.is_empty() && n == 0 => continue,
                _ => return Err(Error::param("curve", format!("line {}: bad number", n + 1))),
            }
        }
        Self::new(times, values)
    }
}

/// Size of the amplified deviation handed to the readout chain, relative to
/// a fully polarized pair.
const READOUT_DEVIATION_SCALE: f64 = 0.05;

/// Default τ grid: 0 to 16 s in 0.5 s steps.
pub fn default_tau_grid() -> Vec<f64> {
    (0..=32).map(|k| 0.5 * k as f64).collect()
}

/// Normalized G_a(τ) of the ¹H spectrum after relaxing from the prepared
/// Bell state. Each point goes through the full readout chain.
pub fn simulate_decay(kind: BellKind, rates: &RateMatrix, sys: &SpinSystem, taus: &[f64]) -> Result<DecayCurve> {
    simulate_decay_with(kind, rates, sys, taus, &Acquisition::default(), Execution::Parallel)
}

pub fn simulate_decay_with(
    kind: BellKind,
    rates: &RateMatrix,
    sys: &SpinSystem,
    taus: &[f64],
    acq: &Acquisition,
    exec: Execution,
) -> Result<DecayCurve> {
    let solver = RelaxationSolver::new(rates, sys)?;
    let obs0 = bell_initial_conditions(kind, sys);
    // The readout is linear in the deviation and the curve is normalized, so
    // the deviation is amplified by one fixed factor to lift it well above
    // the rounding level of the 𝕀/4 background.
    let gain = READOUT_DEVIATION_SCALE / (sys.epsilon1().abs() + sys.epsilon2().abs());
    let ga = |obs: &DiagObservables| proton_ga(&obs.scaled(gain).to_density(), sys, acq);
    let g0 = ga(&obs0)?;
    if g0 == 0.0 {
        return Err(Error::Numerical("initial antisymmetric component vanishes".into()));
    }
    let points = map_indexed(taus.len(), exec, |i| Ok(ga(&solver.evolve(&obs0, taus[i])?)? / g0));
    let values = points.into_iter().collect::<Result<Vec<f64>>>()?;
    DecayCurve::new(taus.to_vec(), values)
}

/// Signed ⟨S₁zS₂z⟩(τ)/⟨S₁zS₂z⟩(0), the quantity G_a tracks up to its sign.
pub fn correlation_decay(kind: BellKind, rates: &RateMatrix, sys: &SpinSystem, taus: &[f64]) -> Result<DecayCurve> {
    let solver = RelaxationSolver::new(rates, sys)?;
    let obs0 = bell_initial_conditions(kind, sys);
    let values = taus
        .iter()
        .map(|t| Ok(solver.evolve(&obs0, *t)?.s1zs2z / obs0.s1zs2z))
        .collect::<Result<Vec<f64>>>()?;
    DecayCurve::new(taus.to_vec(), values)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentialFit {
    /// Decay time τ of A·exp(−t/τ), s.
    pub tau: f64,
    pub amplitude: f64,
    /// RMS of y − A·exp(−t/τ) over the fitted points.
    pub rms_residual: f64,
    pub points: usize,
}

/// Least-squares fit of A·exp(−t/τ) to the curve on t ∈ [0, window].
///
/// Seeded by a log-domain linear fit weighted by y², then refined by
/// Gauss-Newton on the untransformed residuals.
pub fn fit_initial_exponential(curve: &DecayCurve, window: f64) -> Result<ExponentialFit> {
    let pts: Vec<(f64, f64)> = curve
        .times
        .iter()
        .zip(&curve.values)
        .filter(|(t, _)| **t >= 0.0 && **t <= window * (1.0 + 1e-12))
        .map(|(t, v)| (*t, *v))
        .collect();
    if pts.len() < 3 {
        return Err(Error::FitDomain(format!(
            "need at least 3 points in [0, {window}] s, found {}",
            pts.len()
        )));
    }
    if let Some((t, v)) = pts.iter().find(|(_, v)| !(*v > 0.0)) {
        return Err(Error::FitDomain(format!("non-positive value {v} at t = {t} s")));
    }

    // weighted linear regression of ln y on t
    let (mut sw, mut st, mut sy, mut stt, mut sty) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (t, v) in &pts {
        let w = v * v;
        let ly = v.ln();
        sw += w;
        st += w * t;
        sy += w * ly;
        stt += w * t * t;
        sty += w * t * ly;
    }
    let det = sw * stt - st * st;
    if det.abs() < 1e-300 {
        return Err(Error::FitDomain("degenerate time points".into()));
    }
    let slope = (sw * sty - st * sy) / det;
    let intercept = (sy - slope * st) / sw;
    let mut amp = intercept.exp();
    let mut rate = -slope;

    let cost = |a: f64, k: f64| pts.iter().map(|(t, v)| (v - a * (-k * t).exp()).powi(2)).sum::<f64>();
    let mut current = cost(amp, rate);
    for _ in 0..100 {
        // normal equations of the 2-parameter Gauss-Newton step
        let (mut jaa, mut jak, mut jkk, mut ga, mut gk) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (t, v) in &pts {
            let e = (-rate * t).exp();
            let r = v - amp * e;
            let da = e;
            let dk = -amp * t * e;
            jaa += da * da;
            jak += da * dk;
            jkk += dk * dk;
            ga += da * r;
            gk += dk * r;
        }
        let det = jaa * jkk - jak * jak;
        if det.abs() < 1e-300 {
            break;
        }
        let step_a = (jkk * ga - jak * gk) / det;
        let step_k = (jaa * gk - jak * ga) / det;
        let mut lambda = 1.0;
        let mut accepted = false;
        while lambda > 1e-6 {
            let (na, nk) = (amp + lambda * step_a, rate + lambda * step_k);
            let c = cost(na, nk);
            if c <= current {
                amp = na;
                rate = nk;
                current = c;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        let small = step_a.abs() <= 1e-15 * amp.abs().max(1.0) && step_k.abs() <= 1e-15 * rate.abs().max(1.0);
        if !accepted || small {
            break;
        }
    }
    if !(rate > 0.0) {
        return Err(Error::FitDomain(format!("fitted curve does not decay (rate {rate})")));
    }
    Ok(ExponentialFit {
        tau: 1.0 / rate,
        amplitude: amp,
        rms_residual: (current / pts.len() as f64).sqrt(),
        points: pts.len(),
    })
}

/// Prony-type estimate of `n` exponential rates from a uniformly sampled,
/// noise-free sum of `n` decaying exponentials.
pub fn fit_exponential_rates(curve: &DecayCurve, n: usize) -> Result<Vec<f64>> {
    let y = &curve.values;
    if n == 0 || y.len() < 2 * n + 1 {
        return Err(Error::FitDomain(format!("need at least {} samples for {n} modes", 2 * n + 1)));
    }
    let h = curve.times[1] - curve.times[0];
    if curve.times.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h) {
        return Err(Error::FitDomain("Prony fit needs uniform sampling".into()));
    }
    let rows = y.len() - n;
    let a = DMatrix::from_fn(rows, n, |r, c| y[r + c]);
    let b = DVector::from_fn(rows, |r, _| -y[r + n]);
    let coeffs = a
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::Numerical(e.to_string()))?;
    // companion matrix of zⁿ + c_{n−1} zⁿ⁻¹ + … + c₀
    let companion = DMatrix::from_fn(n, n, |r, c| {
        if r == 0 {
            -coeffs[n - 1 - c]
        } else if c == r - 1 {
            1.0
        } else {
            0.0
        }
    });
    let roots = companion.complex_eigenvalues();
    let mut rates = Vec::with_capacity(n);
    for z in roots.iter() {
        if z.im.abs() > 1e-8 * z.norm() || z.re <= 0.0 {
            return Err(Error::Numerical(format!("non-real or non-positive Prony root {z}")));
        }
        rates.push(-z.re.ln() / h);
    }
    rates.sort_by(f64::total_cmp);
    Ok(rates)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys() -> SpinSystem {
        SpinSystem::default()
    }

    #[test]
    fn calibrated_rates_hit_the_targets() {
        let s = sys();
        let r = RateMatrix::calibrated(&s);
        assert!((r.mu12 - 0.375).abs() < 1e-15);
        assert!((r.effective_cross_rate(&s) - (1.0 / 2.4 - 1.0 / 3.0) / 16.0).abs() < 1e-15);
        let k_s0 = initial_rate(&r, &bell_initial_conditions(BellKind::S0, &s), &s).unwrap();
        let k_psi = initial_rate(&r, &bell_initial_conditions(BellKind::PsiPlus, &s), &s).unwrap();
        assert!((1.0 / k_s0 - 2.4).abs() < 1e-12);
        assert!((1.0 / k_psi - 3.0).abs() < 1e-12);
        r.validate().unwrap();
    }

    #[test]
    fn zero_time_and_long_time_limits() {
        let s = sys();
        let r = RateMatrix::calibrated(&s);
        let obs0 = bell_initial_conditions(BellKind::S0, &s);
        let same = relax_evolve(&obs0, &r, &s, 0.0).unwrap();
        assert!((same.s1zs2z - obs0.s1zs2z).abs() < 1e-20);
        assert!(same.s1z.abs() < 1e-20);
        let late = relax_evolve(&obs0, &r, &s, 500.0).unwrap();
        let eq = DiagObservables::equilibrium(&s);
        assert!((late.s1z - eq.s1z).abs() < 1e-12 * eq.s1z);
        assert!((late.s2z - eq.s2z).abs() < 1e-12 * eq.s1z);
        assert!(late.s1zs2z.abs() < 1e-12 * eq.s1z);
        assert!(relax_evolve(&obs0, &r, &s, -1.0).is_err());
    }

    #[test]
    fn uncoupled_correlation_is_monoexponential() {
        let s = sys();
        let r = RateMatrix::uncoupled(0.3, 0.2, 0.4);
        let obs0 = bell_initial_conditions(BellKind::S0, &s);
        for tau in [0.5, 2.0, 7.0] {
            let out = relax_evolve(&obs0, &r, &s, tau).unwrap();
            let expected = -(s.epsilon1() + s.epsilon2()) / 8.0 * (-0.4 * tau).exp();
            assert!((out.s1zs2z - expected).abs() < 1e-12 * expected.abs());
        }
    }

    #[test]
    fn diagonal_rates_are_eigenvalues() {
        let m = eigenmodes(&RateMatrix::uncoupled(0.7, 0.2, 0.4)).unwrap();
        assert_eq!(m.values, [0.2, 0.4, 0.7]);
        let v = m.vectors;
        assert!((v.transpose() * v - Matrix3::identity()).abs().max() < 1e-12);
    }

    #[test]
    fn indefinite_matrix_rejected() {
        let bad = RateMatrix {
            delta1: 2.0,
            ..RateMatrix::uncoupled(0.3, 0.3, 0.4)
        };
        assert!(matches!(bad.validate(), Err(Error::RateMatrixNotPositive { .. })));
        assert!(relax_evolve(&bell_initial_conditions(BellKind::T0, &sys()), &bad, &sys(), 1.0).is_err());
    }

    #[test]
    fn zero_correlation_has_no_rate() {
        let s = sys();
        let obs = DiagObservables::equilibrium(&s);
        assert_eq!(initial_rate(&RateMatrix::calibrated(&s), &obs, &s), Err(Error::UndefinedRate));
    }

    #[test]
    fn exact_exponential_fit() {
        let times: Vec<f64> = (0..=12).map(|k| 0.5 * k as f64).collect();
        let values = times.iter().map(|t| 1.7 * (-t / 2.4).exp()).collect();
        let fit = fit_initial_exponential(&DecayCurve::new(times, values).unwrap(), 6.0).unwrap();
        assert!((fit.tau - 2.4).abs() < 1e-9, "{}", fit.tau);
        assert!((fit.amplitude - 1.7).abs() < 1e-9);
        assert!(fit.rms_residual < 1e-12);
    }

    #[test]
    fn fit_rejects_bad_domains() {
        let c = DecayCurve::new(vec![0.0, 1.0, 2.0, 3.0], vec![1.0, 0.5, -0.1, 0.1]).unwrap();
        assert!(matches!(fit_initial_exponential(&c, 6.0), Err(Error::FitDomain(_))));
        let c = DecayCurve::new(vec![0.0, 1.0, 7.0], vec![1.0, 0.5, 0.1]).unwrap();
        assert!(matches!(fit_initial_exponential(&c, 6.0), Err(Error::FitDomain(_))));
    }

    #[test]
    fn csv_round_trip_and_header() {
        let c = DecayCurve::new(vec![0.0, 0.5], vec![1.0, 0.8]).unwrap();
        let text = c.to_csv();
        assert!(text.starts_with("tau_s,ga\n"));
        assert_eq!(DecayCurve::from_csv(&text).unwrap(), c);
        assert!(DecayCurve::from_csv("tau_s,ga\n0,1\nx,2\n").is_err());
        assert!(DecayCurve::new(vec![1.0, 0.0], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn rate_config_parsing() {
        let base = RateMatrix::calibrated(&sys());
        let r = RateMatrix::parse_kv("# rates\nmu1 = 0.5\n\ndelta2=0.001 # cross\n", base).unwrap();
        assert_eq!(r.mu1, 0.5);
        assert_eq!(r.delta2, 0.001);
        assert_eq!(r.mu12, base.mu12);
        assert!(RateMatrix::parse_kv("mu3=1", base).is_err());
        assert!(RateMatrix::parse_kv("mu1", base).is_err());
    }

    #[test]
    fn prony_recovers_two_modes() {
        let times: Vec<f64> = (0..40).map(|k| 0.25 * k as f64).collect();
        let values = times.iter().map(|t| 0.6 * (-0.3 * t).exp() + 0.4 * (-0.9 * t).exp()).collect();
        let rates = fit_exponential_rates(&DecayCurve::new(times, values).unwrap(), 2).unwrap();
        assert!((rates[0] - 0.3).abs() < 1e-8 && (rates[1] - 0.9).abs() < 1e-8, "{rates:?}");
    }
}
