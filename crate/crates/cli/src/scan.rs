use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use pathmark_core::experiments::{
    detect_peaks, full_turn, infer_weak_value, phase_sweep, run_spectrum_scan, visibility, Readout, Scenario,
    VisibilityMode,
};
use pathmark_core::Circuit;
use serde::Serialize;

use crate::error::CliError;
use crate::Output;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
pub struct ScanArgs {
    pub scenario: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    pub out: Format,
    /// Write here instead of stdout; a manifest is written beside it.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Overrides `scan.seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides `peaks.k_sigma`.
    #[arg(long)]
    pub ksigma: Option<f64>,
    /// Step the `sweep.phase` shifter instead of scanning the etalon.
    #[arg(long)]
    pub sweep_phase: bool,
}

pub fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| {
        CliError::Schema(vec![format!("{}: {}", path.display(), e.to_string().trim_end())])
    })?;
    serde_path_to_error::deserialize(toml::Value::Table(table))
        .map_err(|e| CliError::Schema(vec![format!("{}: {}: {}", path.display(), e.path(), e.inner().message())]))
}

struct Loaded {
    scenario: Scenario,
    circuit: Circuit,
    inputs: Vec<PathBuf>,
}

fn load(a: &ScanArgs) -> Result<Loaded, CliError> {
    let mut sc = load_scenario(&a.scenario)?;
    if let Some(seed) = a.seed {
        sc.scan.seed = seed;
    }
    if let Some(k) = a.ksigma {
        sc.peaks.k_sigma = k;
    }
    let issues = sc.validate();
    if !issues.is_empty() {
        return Err(CliError::Schema(issues.iter().map(|i| format!("{}: {i}", a.scenario.display())).collect()));
    }
    let mut inputs = vec![a.scenario.clone()];
    let text = match &sc.netlist {
        Some(rel) => {
            let p = a.scenario.parent().unwrap_or(Path::new("")).join(rel);
            let t = std::fs::read_to_string(&p).map_err(|e| CliError::io(&p, e))?;
            inputs.push(p);
            Some(t)
        }
        None => None,
    };
    let circuit = sc.circuit(text.as_deref()).map_err(|errs| {
        let origin = inputs.last().expect("scenario path").display().to_string();
        CliError::Validation(errs.iter().map(|e| format!("{origin}:{e}")).collect())
    })?;
    Ok(Loaded { scenario: sc, circuit, inputs })
}

pub fn run(a: &ScanArgs) -> Result<Output, CliError> {
    let l = load(a)?;
    let bytes = if a.sweep_phase { sweep(&l, a.out)? } else { spectrum(&l, a.out)? };
    let parameters = serde_json::json!({
        "scenario": l.scenario,
        "format": a.out,
        "sweep_phase": a.sweep_phase,
    });
    Ok(Output { bytes, inputs: l.inputs, parameters, seed: Some(l.scenario.scan.seed) })
}

fn spectrum(l: &Loaded, format: Format) -> Result<Vec<u8>, CliError> {
    let sc = &l.scenario;
    let scan = run_spectrum_scan(&l.circuit, &sc.detect, &sc.etalon, &sc.envelope, &sc.scan_config())?;
    let eoms = l.circuit.eoms();
    let peaks = detect_peaks(&scan, eoms, &sc.peaks)?;
    let present: Vec<String> = peaks.present().into_iter().collect();
    log::info!("peaks above {} sigma: {}", sc.peaks.k_sigma, present.join(", "));
    match format {
        Format::Csv => {
            let mut s = String::from("detuning_ghz,expected_p,counts\n");
            for p in &scan.points {
                writeln!(s, "{},{:e},{}", p.detuning_ghz, p.expected, p.counts).expect("string write");
            }
            Ok(s.into_bytes())
        }
        Format::Json => {
            let weak: Vec<_> = eoms
                .iter()
                .map(|(id, info)| infer_weak_value(&scan, eoms, id, info.depth, Readout::Counts))
                .collect();
            let v = serde_json::json!({ "scan": scan, "peaks": peaks, "weak_values": weak });
            Ok(pretty(&v))
        }
    }
}

fn sweep(l: &Loaded, format: Format) -> Result<Vec<u8>, CliError> {
    let sc = &l.scenario;
    let phases = full_turn(sc.sweep.points);
    let s = phase_sweep(
        &l.circuit,
        &sc.sweep.phase,
        &phases,
        &sc.detect,
        &sc.etalon.at(sc.sweep.setting_ghz),
        &sc.envelope,
        sc.scan.photons_per_point,
        sc.scan.seed,
    )?;
    let expected = visibility(&s, VisibilityMode::Expected);
    let fitted = visibility(&s, VisibilityMode::Fitted);
    log::info!("visibility: expected {expected:?}, fitted {fitted:?}");
    match format {
        Format::Csv => {
            let mut out = String::from("phase_rad,expected_p,counts\n");
            for ((phi, p), k) in s.phases.iter().zip(&s.expected).zip(&s.counts) {
                writeln!(out, "{phi},{p:e},{k}").expect("string write");
            }
            Ok(out.into_bytes())
        }
        Format::Json => {
            let v = serde_json::json!({
                "sweep": s,
                "visibility": { "expected": expected, "fitted": fitted },
            });
            Ok(pretty(&v))
        }
    }
}

pub fn pretty(v: &serde_json::Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("json value serializes");
    s.push('\n');
    s.into_bytes()
}
