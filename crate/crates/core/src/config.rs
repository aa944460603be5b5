//! JSON run configuration, `key=value` overrides and run sidecars.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::codebook::{generate_reference_codebooks, load_codebooks, CodebookSet};
use crate::error::{Error, Result};
use crate::harness::{estimate_snr_gain, run_sweep, RunOptions, SweepResult, SweepSpec, SweepVariable};
use crate::sysmodel::{System, SystemConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum CodebookSource {
    /// A codebook file; relative paths resolve against the config file.
    Path(PathBuf),
    /// Built-in reference codebooks; `dv` applies to SCMA (default 2).
    Generate {
        #[serde(default)]
        dv: Option<usize>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Stem of the output files; defaults to the config file stem.
    #[serde(default)]
    pub name: Option<String>,
    pub system: SystemConfig,
    pub codebook: CodebookSource,
    pub sweep: SweepSpec,
}

const ALIASES: &[(&str, &str)] = &[
    ("ebn0", "sweep.ebn0_db"),
    ("trials", "sweep.trials"),
    ("seed", "sweep.seed"),
    ("detectors", "sweep.detectors"),
    ("variable", "sweep.variable"),
    ("values", "sweep.values"),
];

/// Parses an override value: `a:step:b` becomes an inclusive numeric range,
/// anything else is read as JSON and falls back to a plain string.
pub fn parse_override_value(raw: &str) -> Result<Value> {
    let parts: Vec<&str> = raw.split(':').collect();
    if parts.len() == 3 {
        let nums: Vec<f64> = parts
            .iter()
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Config(format!("bad range '{raw}'")))?;
        let (start, step, stop) = (nums[0], nums[1], nums[2]);
        if !(step > 0.0) || stop < start {
            return Err(Error::Config(format!("bad range '{raw}'")));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        let values = (0..count)
            .map(|i| {
                let v = start + step * i as f64;
                // Keep integral grid points integral in the JSON echo.
                let v = if (v - v.round()).abs() < 1e-9 { v.round() } else { v };
                serde_json::Number::from_f64(v).map(Value::Number).unwrap_or(Value::Null)
            })
            .collect();
        return Ok(Value::Array(values));
    }
    Ok(serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string())))
}

/// Applies one `key=value` override to a config document.
pub fn apply_override(doc: &mut Value, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override '{assignment}' is not key=value")))?;
    let key = key.trim();
    let path = ALIASES
        .iter()
        .find(|(a, _)| *a == key)
        .map_or(key, |(_, full)| full);
    let value = parse_override_value(raw.trim())?;
    let mut node = doc;
    let segments: Vec<&str> = path.split('.').collect();
    for (i, seg) in segments.iter().enumerate() {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| Error::Config(format!("override path '{path}' crosses a non-object")))?;
        if i + 1 == segments.len() {
            obj.insert((*seg).to_string(), value);
            return Ok(());
        }
        node = obj
            .entry((*seg).to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    Err(Error::Config("empty override key".into()))
}

impl RunConfig {
    pub fn from_value(doc: Value) -> Result<Self> {
        serde_json::from_value(doc).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_value(serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?)
    }

    /// Reads a config file and applies overrides in order.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut doc: Value = serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        let mut cfg = Self::from_value(doc)?;
        if let CodebookSource::Path(p) = &mut cfg.codebook {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    *p = dir.join(&*p);
                }
            }
        }
        if cfg.name.is_none() {
            cfg.name = path.file_stem().map(|s| s.to_string_lossy().into_owned());
        }
        Ok(cfg)
    }

    pub fn codebooks(&self) -> Result<CodebookSet> {
        match &self.codebook {
            CodebookSource::Path(p) => load_codebooks(p),
            CodebookSource::Generate { dv } => generate_reference_codebooks(
                self.system.ues,
                self.system.resources,
                self.system.order,
                self.system.scheme,
                *dv,
            ),
        }
    }

    /// Builds the system and checks the sweep, without running anything.
    pub fn prepare(&self) -> Result<System> {
        let system = System::new(self.system.clone(), self.codebooks()?)?;
        self.sweep.validate(&system)?;
        Ok(system)
    }

    pub fn run(&self, opts: &RunOptions) -> Result<RunOutput> {
        let system = self.prepare()?;
        let result = run_sweep(&system, &self.sweep, opts)?;
        let sidecar = Sidecar {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            config: self.clone(),
            codebooks: serde_json::from_str(&system.codebooks().to_json()).expect("codebook JSON"),
            noise_model: "sigma2 = (1/b) / 10^(EbN0_dB/10), unit codeword energy",
            bits_per_symbol: system.bits_per_ue(),
            symbols_per_trial: system.symbols_per_trial(),
            workers: opts.workers,
            results: result.clone(),
        };
        let mut sidecar_json = serde_json::to_string_pretty(&sidecar).expect("sidecar serialization");
        sidecar_json.push('\n');
        Ok(RunOutput {
            csv: result.to_csv(),
            sidecar_json,
            result,
        })
    }
}

#[derive(Serialize)]
struct Sidecar {
    tool: &'static str,
    version: &'static str,
    config: RunConfig,
    codebooks: Value,
    noise_model: &'static str,
    bits_per_symbol: f64,
    symbols_per_trial: usize,
    workers: usize,
    results: SweepResult,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub result: SweepResult,
    pub csv: String,
    pub sidecar_json: String,
}

/// One line per detector: lowest SER and, for Eb/N0 sweeps, the gain over
/// the first detector at `target_ser` when both curves cross it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub detector: String,
    pub min_ser: f64,
    pub gain_db_vs_first: Option<f64>,
}

pub fn summarize(result: &SweepResult, target_ser: f64) -> Vec<SummaryRow> {
    let first = result.curves.first().map(|c| c.pairs());
    result
        .curves
        .iter()
        .map(|c| SummaryRow {
            detector: c.detector.as_str().to_string(),
            min_ser: c.points.iter().map(|p| p.ser).fold(f64::INFINITY, f64::min),
            gain_db_vs_first: match (&first, result.variable) {
                (Some(f), SweepVariable::Ebn0) => estimate_snr_gain(&c.pairs(), f, target_ser),
                _ => None,
            },
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn base() -> Value {
        json!({
            "system": {"scheme": "scma", "variant": "simo", "J": 6, "K": 4, "M": 4, "N_r": 4},
            "codebook": {"generate": {}},
            "sweep": {"detectors": ["admm"], "ebn0_db": [0.0], "trials": 10, "seed": 1}
        })
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_override_value("0:2:10").unwrap(), json!([0.0, 2.0, 4.0, 6.0, 8.0, 10.0]));
        assert_eq!(parse_override_value("0:0.5:1").unwrap(), json!([0.0, 0.5, 1.0]));
        assert!(parse_override_value("3:0:1").is_err());
        assert_eq!(parse_override_value("mmse").unwrap(), json!("mmse"));
        assert_eq!(parse_override_value("[1,2]").unwrap(), json!([1, 2]));
    }

    #[test]
    fn overrides_and_aliases() {
        let mut doc = base();
        apply_override(&mut doc, "ebn0=0:2:4").unwrap();
        apply_override(&mut doc, "sweep.admm.gamma=50").unwrap();
        apply_override(&mut doc, "system.N_r=8").unwrap();
        let cfg = RunConfig::from_value(doc).unwrap();
        assert_eq!(cfg.sweep.ebn0_db, vec![0.0, 2.0, 4.0]);
        assert_eq!(cfg.sweep.admm.gamma, crate::admm::Gamma::Shared(50.0));
        assert_eq!(cfg.system.rx_antennas, 8);
    }

    #[test]
    fn unknown_keys_rejected() {
        let mut doc = base();
        apply_override(&mut doc, "sweep.bogus=1").unwrap();
        assert!(matches!(RunConfig::from_value(doc), Err(Error::Config(_))));
        let mut doc = base();
        assert!(apply_override(&mut doc, "no-equals-sign").is_err());
    }

    #[test]
    fn runs_and_echoes() {
        let cfg = RunConfig::from_value(base()).unwrap();
        let out = cfg.run(&RunOptions::default()).unwrap();
        let side: Value = serde_json::from_str(&out.sidecar_json).unwrap();
        assert_eq!(side["config"]["sweep"]["seed"], json!(1));
        assert_eq!(side["codebooks"]["J"], json!(6));
        let again: RunConfig = serde_json::from_value(side["config"].clone()).unwrap();
        assert_eq!(again, cfg);
        assert_eq!(summarize(&out.result, 1e-3).len(), 1);
    }
}
