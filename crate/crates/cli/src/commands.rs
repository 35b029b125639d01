use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use spinpair::relax::{fit_initial_exponential, simulate_decay_with, DecayCurve};
use spinpair::seq::{builtin_program, execute, parse_named, BASIS_LABELS};
use spinpair::spectra::{antisymmetric_component, fft_spectrum, signed_asymmetry, synthesize_fid};
use spinpair::states::{attenuated_fidelity, bell_state, deviation_fidelity, equilibrium_state};
use spinpair::tomo::{ideal_pseudo_pure_weight, prepare_ensemble, simulate_tomography};
use spinpair::{Axis, BellKind, ComplexMatrix4, DensityMatrix, Execution, Spin};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

/// Writes `contents` to `dir/name` through a temporary file in the same
/// directory, so readers never observe a partial file.
pub fn write_atomic(dir: &Path, name: &str, contents: &[u8]) -> CliResult<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let target = dir.join(name);
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(contents).map_err(|e| CliError::io(tmp.path(), e))?;
    tmp.persist(&target).map_err(|e| CliError::io(&target, e.error))?;
    Ok(target)
}

fn write_json(dir: &Path, name: &str, value: &Value) -> CliResult<PathBuf> {
    let mut text = serde_json::to_string_pretty(value).expect("json values serialize");
    text.push('\n');
    write_atomic(dir, name, text.as_bytes())
}

fn grid(m: &ComplexMatrix4) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let part = |f: fn(&spinpair::matrix::C64) -> f64| (0..4).map(|r| (0..4).map(|c| f(&m.get(r, c))).collect()).collect();
    (part(|z| z.re), part(|z| z.im))
}

fn deviation_json(rho: &DensityMatrix) -> Value {
    let (real, imag) = grid(&rho.deviation());
    json!({ "labels": BASIS_LABELS, "real": real, "imag": imag })
}

/// Final state of the built-in preparation: a single nominal run, or the
/// ensemble average when an rf spread is configured.
fn prepared_state(kind: BellKind, cfg: &RunConfig) -> CliResult<DensityMatrix> {
    Ok(prepare_ensemble(kind, &cfg.system, &cfg.rf_model(), Execution::Parallel)?)
}

pub fn prepare(kind: BellKind, cfg: &RunConfig, out: &Path) -> CliResult<()> {
    let sys = &cfg.system;
    let prog = builtin_program(kind);
    let trace = execute(&prog, sys, &equilibrium_state(sys)?)?;
    let rho = if cfg.rf_spread > 0.0 || cfg.amplitude_step_hz.is_some() {
        prepared_state(kind, cfg)?
    } else {
        *trace.final_state()
    };
    let target = bell_state(kind, Axis::Z);
    let fidelity = deviation_fidelity(&rho, &target);
    let attenuated = attenuated_fidelity(&rho, &target, ideal_pseudo_pure_weight(sys));
    let model = cfg.rf_model();

    write_json(out, &format!("{}_trace.json", prog.name), &trace.to_json())?;
    write_json(out, &format!("{}_deviation.json", prog.name), &deviation_json(&rho))?;
    let report = json!({
        "kind": kind.name(),
        "program": prog.name,
        "fidelity": fidelity,
        "attenuated_fidelity": attenuated,
        "min_eigenvalue_normalized": rho.normalized_deviation_state().min_eigenvalue(),
        "rf_spread": model.amplitude_spread,
        "ensemble_size": model.ensemble_size,
        "seed": model.seed,
    });
    write_json(out, &format!("{}_report.json", prog.name), &report)?;
    println!("{}: fidelity {fidelity:.6} (attenuated {attenuated:.6})", kind.name());
    Ok(())
}

pub fn tomo(kind: BellKind, cfg: &RunConfig, out: &Path) -> CliResult<()> {
    let sim = simulate_tomography(kind, &cfg.system, &cfg.rf_model())?;
    let mut value = sim.result.to_json();
    value["kind"] = json!(kind.name());
    value["fidelity"] = json!(sim.fidelity);
    value["attenuated_fidelity"] = json!(sim.attenuated_fidelity);
    write_json(out, &format!("tomo_{}.json", kind.name()), &value)?;
    println!(
        "{}: fidelity {:.6} (attenuated {:.6}), min eigenvalue {:.3e}",
        kind.name(),
        sim.fidelity,
        sim.attenuated_fidelity,
        sim.min_eigenvalue
    );
    Ok(())
}

/// Spectrum target: a Bell state or thermal equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumSource {
    Bell(BellKind),
    Equilibrium,
}

impl SpectrumSource {
    pub fn label(self) -> &'static str {
        match self {
            SpectrumSource::Bell(k) => k.name(),
            SpectrumSource::Equilibrium => "eq",
        }
    }
}

pub fn spectrum(source: SpectrumSource, cfg: &RunConfig, out: &Path) -> CliResult<()> {
    let sys = &cfg.system;
    let rho = match source {
        SpectrumSource::Bell(kind) => prepared_state(kind, cfg)?,
        SpectrumSource::Equilibrium => equilibrium_state(sys)?,
    };
    let acq = cfg.acquisition;
    let fid = synthesize_fid(&rho, sys, Spin::One, acq.points, acq.dwell)?;
    let spec = fft_spectrum(&fid);
    let ga = antisymmetric_component(&spec)?;
    let asym = signed_asymmetry(&spec);
    let half = sys.j_hz();
    let peak = |lo, hi| spec.peak_offset(lo, hi).map(|(f, a)| json!({ "offset_hz": f, "amplitude": a }));
    let label = source.label();
    write_atomic(out, &format!("fid_{label}.csv"), fid.to_csv().as_bytes())?;
    write_atomic(out, &format!("spectrum_{label}.csv"), spec.to_csv().as_bytes())?;
    let report = json!({
        "source": label,
        "ga": ga,
        "signed_asymmetry": asym,
        "low_peak": peak(-half, 0.0),
        "high_peak": peak(0.0, half),
        "points": acq.points,
        "dwell_s": acq.dwell,
    });
    write_json(out, &format!("spectrum_{label}.json"), &report)?;
    println!("{label}: G_a = {ga:.6e} (signed {asym:.6e})");
    Ok(())
}

pub fn relax(kind: BellKind, cfg: &RunConfig, out: &Path) -> CliResult<()> {
    let rates = cfg.rates();
    let curve = simulate_decay_with(kind, &rates, &cfg.system, &cfg.taus(), &cfg.acquisition, Execution::Parallel)?;
    let path = write_atomic(out, &format!("decay_{}.csv", kind.name()), curve.to_csv().as_bytes())?;
    println!("{}: {} points written to {}", kind.name(), curve.times.len(), path.display());
    match fit_initial_exponential(&curve, cfg.window) {
        Ok(fit) => println!("tau_init = {:.6} s over {} s (rms {:.3e})", fit.tau, cfg.window, fit.rms_residual),
        Err(e) => log::warn!("initial fit unavailable: {e}"),
    }
    Ok(())
}

pub fn fit(curve_file: &Path, window: f64) -> CliResult<()> {
    let text = std::fs::read_to_string(curve_file).map_err(|e| CliError::io(curve_file, e))?;
    let curve = DecayCurve::from_csv(&text)?;
    let fit = fit_initial_exponential(&curve, window)?;
    println!("tau_init_s = {}", fit.tau);
    println!("amplitude = {}", fit.amplitude);
    println!("rms_residual = {}", fit.rms_residual);
    println!("points = {}", fit.points);
    Ok(())
}

pub fn run(program_file: &Path, cfg: &RunConfig, out: &Path) -> CliResult<()> {
    let text = std::fs::read_to_string(program_file).map_err(|e| CliError::io(program_file, e))?;
    let name = program_file
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("program")
        .to_string();
    let sys = &cfg.system;
    let prog = parse_named(&name, &text, sys).map_err(|source| CliError::Parse {
        path: program_file.to_path_buf(),
        source,
    })?;
    let trace = execute(&prog, sys, &equilibrium_state(sys)?)?;
    write_json(out, &format!("{name}_trace.json"), &trace.to_json())?;
    for (k, fid) in trace.acquisitions.iter().enumerate() {
        write_atomic(out, &format!("{name}_fid{}.csv", k + 1), fid.to_csv().as_bytes())?;
    }
    println!(
        "{name}: {} instructions, {} acquisitions",
        prog.len(),
        trace.acquisitions.len()
    );
    Ok(())
}
