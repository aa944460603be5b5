//! Seeded Monte Carlo SER engine.
//!
//! Every trial draws from its own ChaCha8 stream selected by the master
//! seed, the Eb/N0 index and the trial index, so trials can run in any order
//! on any number of threads. Draw order inside a trial is fixed: payload,
//! channel, noise, channel-estimation error.
//!
//! Sweeps over iterations, γ or CSI error reuse the realizations of the
//! single Eb/N0 point, so every grid value sees the same trials.

use std::fmt::Write as _;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::admm::{self, auto_rho, AdmmConfig, Gamma, DEFAULT_ITERATIONS};
use crate::baseline::{detect_ml, detect_mmse, detect_mpa, MpaConfig, DEFAULT_MPA_ITERATIONS};
use crate::codebook::Scheme;
use crate::detection::Detection;
use crate::error::{Error, Result};
use crate::numerics::{CMatrix, CVector, C64};
use crate::sysmodel::{receive, ChannelRealization, System, TxPayload, Variant};

pub const DEFAULT_MIN_ERRORS: u64 = 500;
pub const DEFAULT_CHUNK: u64 = 256;
pub const CSV_HEADER: &str = "detector,variable,value,trials,symbol_errors,ser,seconds";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectorKind {
    Admm,
    Mmse,
    Ml,
    Mpa,
}

impl DetectorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DetectorKind::Admm => "admm",
            DetectorKind::Mmse => "mmse",
            DetectorKind::Ml => "ml",
            DetectorKind::Mpa => "mpa",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepVariable {
    Ebn0,
    Iterations,
    Gamma,
    Cee,
}

impl SweepVariable {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepVariable::Ebn0 => "ebn0",
            SweepVariable::Iterations => "iterations",
            SweepVariable::Gamma => "gamma",
            SweepVariable::Cee => "cee",
        }
    }
}

/// ADMM settings as configured; `rho = None` means `max(σ², 1e-6)` per point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AdmmSettings {
    pub iterations: usize,
    pub rho: Option<f64>,
    pub gamma: Gamma,
}

impl Default for AdmmSettings {
    fn default() -> Self {
        AdmmSettings {
            iterations: DEFAULT_ITERATIONS,
            rho: None,
            gamma: Gamma::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MpaSettings {
    pub iterations: usize,
    pub damping: f64,
}

impl Default for MpaSettings {
    fn default() -> Self {
        MpaSettings {
            iterations: DEFAULT_MPA_ITERATIONS,
            damping: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub detectors: Vec<DetectorKind>,
    pub ebn0_db: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    #[serde(default = "default_variable")]
    pub variable: SweepVariable,
    /// Values of `variable`; unused for Eb/N0 sweeps.
    #[serde(default)]
    pub values: Vec<f64>,
    #[serde(default)]
    pub admm: AdmmSettings,
    #[serde(default)]
    pub mpa: MpaSettings,
    /// CSI error scale `e` when it is not the swept variable.
    #[serde(default)]
    pub csi_error: f64,
    /// Stop a point once every detector has this many errors.
    #[serde(default = "default_min_errors")]
    pub min_errors: Option<u64>,
    #[serde(default = "default_chunk")]
    pub chunk: u64,
}

fn default_variable() -> SweepVariable {
    SweepVariable::Ebn0
}

fn default_min_errors() -> Option<u64> {
    Some(DEFAULT_MIN_ERRORS)
}

fn default_chunk() -> u64 {
    DEFAULT_CHUNK
}

impl SweepSpec {
    /// An Eb/N0 sweep with default detector settings.
    pub fn ebn0(detectors: Vec<DetectorKind>, ebn0_db: Vec<f64>, trials: u64, seed: u64) -> Self {
        SweepSpec {
            detectors,
            ebn0_db,
            trials,
            seed,
            variable: SweepVariable::Ebn0,
            values: Vec::new(),
            admm: AdmmSettings::default(),
            mpa: MpaSettings::default(),
            csi_error: 0.0,
            min_errors: default_min_errors(),
            chunk: DEFAULT_CHUNK,
        }
    }

    /// Grid points as `(ebn0 index, ebn0, swept value)`.
    pub fn points(&self) -> Vec<(usize, f64, f64)> {
        match self.variable {
            SweepVariable::Ebn0 => self.ebn0_db.iter().enumerate().map(|(i, &e)| (i, e, e)).collect(),
            _ => self.values.iter().map(|&v| (0, self.ebn0_db[0], v)).collect(),
        }
    }

    pub fn validate(&self, system: &System) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.trials == 0 {
            return bad("trials must be >= 1".into());
        }
        if self.chunk == 0 {
            return bad("chunk must be >= 1".into());
        }
        if self.detectors.is_empty() {
            return bad("no detectors configured".into());
        }
        if self.ebn0_db.is_empty() || self.ebn0_db.iter().any(|e| !e.is_finite()) {
            return bad("ebn0_db must be a non-empty list of finite values".into());
        }
        if self.variable != SweepVariable::Ebn0 {
            if self.ebn0_db.len() != 1 {
                return bad(format!("a {} sweep needs exactly one Eb/N0 value", self.variable.as_str()));
            }
            if self.values.is_empty() {
                return bad(format!("a {} sweep needs a non-empty value grid", self.variable.as_str()));
            }
        }
        for &v in &self.values {
            let ok = match self.variable {
                SweepVariable::Ebn0 => true,
                SweepVariable::Iterations => v >= 1.0 && v.fract() == 0.0,
                SweepVariable::Gamma | SweepVariable::Cee => v.is_finite() && v >= 0.0,
            };
            if !ok {
                return bad(format!("invalid {} value {v}", self.variable.as_str()));
            }
        }
        if !(self.csi_error.is_finite() && self.csi_error >= 0.0) {
            return bad("csi_error must be >= 0".into());
        }
        if self.min_errors == Some(0) {
            return bad("min_errors must be >= 1 when set".into());
        }
        let mut probe = self.admm_config(1.0, None);
        if let Some(r) = self.admm.rho {
            probe.rho = r;
        }
        probe.validate(system.ues())?;
        MpaConfig {
            iterations: self.mpa.iterations,
            damping: self.mpa.damping,
        }
        .validate()?;
        for d in &self.detectors {
            match d {
                DetectorKind::Admm => {}
                DetectorKind::Mmse | DetectorKind::Ml | DetectorKind::Mpa if system.variant() != Variant::Simo => {
                    return Err(Error::Unsupported(format!("{} supports SIMO systems only", d.as_str())));
                }
                DetectorKind::Mpa if system.codebooks().scheme() != Scheme::Scma => {
                    return Err(Error::Unsupported("MPA needs sparse (SCMA) codebooks".into()));
                }
                DetectorKind::Ml => {
                    let tuples = (system.order() as f64).powi(system.ues() as i32);
                    if tuples > crate::baseline::ML_BUDGET as f64 {
                        return Err(Error::Budget(format!("ML would visit {tuples} tuples")));
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }

    fn admm_config(&self, noise_var: f64, point_value: Option<f64>) -> AdmmConfig {
        let mut cfg = AdmmConfig {
            iterations: self.admm.iterations,
            rho: self.admm.rho.unwrap_or_else(|| auto_rho(noise_var)),
            gamma: self.admm.gamma.clone(),
        };
        match (self.variable, point_value) {
            (SweepVariable::Iterations, Some(v)) => cfg.iterations = v as usize,
            (SweepVariable::Gamma, Some(v)) => cfg.gamma = Gamma::Shared(v),
            _ => {}
        }
        cfg
    }
}

/// Fully resolved settings of one grid point.
#[derive(Clone, Debug)]
pub struct PointContext<'a> {
    pub system: &'a System,
    pub spec: &'a SweepSpec,
    pub ebn0_index: usize,
    pub ebn0_db: f64,
    pub value: f64,
    pub noise_var: f64,
    pub csi_error: f64,
    pub admm: AdmmConfig,
    pub mpa: MpaConfig,
}

impl<'a> PointContext<'a> {
    pub fn new(system: &'a System, spec: &'a SweepSpec, point: (usize, f64, f64)) -> Self {
        let (ebn0_index, ebn0_db, value) = point;
        let noise_var = system.noise_variance(ebn0_db);
        let csi_error = if spec.variable == SweepVariable::Cee {
            value
        } else {
            spec.csi_error
        };
        PointContext {
            system,
            spec,
            ebn0_index,
            ebn0_db,
            value,
            noise_var,
            csi_error,
            admm: spec.admm_config(noise_var, Some(value)),
            mpa: MpaConfig {
                iterations: spec.mpa.iterations,
                damping: spec.mpa.damping,
            },
        }
    }

    /// Uses an explicit noise variance instead of the Eb/N0 mapping.
    pub fn with_noise_var(mut self, noise_var: f64) -> Self {
        self.noise_var = noise_var;
        self.admm = self.spec.admm_config(noise_var, Some(self.value));
        self
    }
}

/// Outcome of one trial.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub trial: u64,
    /// `errors[d][s]`: detector `d` got symbol `s` wrong.
    pub errors: Vec<Vec<bool>>,
    /// Checksum of the (observation, channel estimate) each detector saw.
    pub input_checksums: Vec<u64>,
    pub seconds: Vec<f64>,
}

/// Per-trial random stream.
pub fn trial_rng(master_seed: u64, ebn0_index: usize, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(((ebn0_index as u64) << 40) | trial);
    rng
}

fn checksum(rs: &[CVector], hs: &[CMatrix]) -> u64 {
    // FNV-1a over the raw bit patterns.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut feed = |z: &C64| {
        for v in [z.re.to_bits(), z.im.to_bits()] {
            h ^= v;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    };
    rs.iter().flatten().for_each(&mut feed);
    hs.iter().flat_map(|m| m.as_slice()).for_each(&mut feed);
    h
}

fn count_errors(system: &System, sent: &TxPayload, det: &Detection) -> Vec<bool> {
    match system.variant() {
        Variant::Sm => (0..system.ues())
            .map(|j| det.symbols[j] != sent.symbols[j] || det.antennas[j] != sent.antennas[j])
            .collect(),
        _ => sent.symbols.iter().zip(&det.symbols).map(|(a, b)| a != b).collect(),
    }
}

pub fn run_trial(ctx: &PointContext<'_>, trial: u64) -> Result<TrialRecord> {
    let sys = ctx.system;
    let mut rng = trial_rng(ctx.spec.seed, ctx.ebn0_index, trial);
    let payload = sys.draw_payload(&mut rng);
    let channel = sys.draw_channel(&mut rng);
    let (rs, hs): (Vec<CVector>, Vec<CMatrix>) = match sys.variant() {
        Variant::Simo => {
            let h = sys.build_simo_matrix(&channel)?;
            let (x, _) = sys.encode_simo(&payload);
            (vec![receive(&h, &x, ctx.noise_var, &mut rng)?], vec![h])
        }
        Variant::Smx | Variant::Sm => {
            let ChannelRealization::PerRe(ms) = &channel else {
                unreachable!("MIMO systems draw per-RE channels")
            };
            let mut rs = Vec::with_capacity(ms.len());
            for (k, h) in ms.iter().enumerate() {
                let (x, _) = sys.encode_re(&payload, k);
                rs.push(receive(h, &x, ctx.noise_var, &mut rng)?);
            }
            (rs, ms.clone())
        }
    };
    let estimates: Vec<CMatrix> = if ctx.csi_error > 0.0 {
        let noisy = channel.perturbed(ctx.csi_error, &mut rng);
        match sys.variant() {
            Variant::Simo => vec![sys.build_simo_matrix(&noisy)?],
            _ => match noisy {
                ChannelRealization::PerRe(ms) => ms,
                ChannelRealization::Simo { .. } => unreachable!(),
            },
        }
    } else {
        hs
    };

    let n = ctx.spec.detectors.len();
    let mut record = TrialRecord {
        trial,
        errors: Vec::with_capacity(n),
        input_checksums: Vec::with_capacity(n),
        seconds: Vec::with_capacity(n),
    };
    for &d in &ctx.spec.detectors {
        record.input_checksums.push(checksum(&rs, &estimates));
        let start = Instant::now();
        let det = match d {
            DetectorKind::Admm => admm::detect(sys, &rs, &estimates, &ctx.admm),
            DetectorKind::Mmse => detect_mmse(sys, &rs[0], &estimates[0], ctx.noise_var),
            DetectorKind::Ml => detect_ml(sys, &rs[0], &estimates[0]),
            DetectorKind::Mpa => detect_mpa(sys, &rs[0], &estimates[0], ctx.noise_var, &ctx.mpa),
        }
        .map_err(|e| Error::Trial {
            context: format!(
                "{} failed on trial {trial} at Eb/N0 {} dB",
                d.as_str(),
                ctx.ebn0_db
            ),
            source: Box::new(e),
        })?;
        record.seconds.push(start.elapsed().as_secs_f64());
        record.errors.push(count_errors(sys, &payload, &det));
    }
    Ok(record)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SerPoint {
    pub ebn0_db: f64,
    pub value: f64,
    pub noise_var: f64,
    pub trials: u64,
    pub symbol_errors: u64,
    pub symbols: u64,
    pub ser: f64,
    pub seconds: f64,
    pub early_stop: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SerCurve {
    pub detector: DetectorKind,
    pub points: Vec<SerPoint>,
}

impl SerCurve {
    /// `(value, ser)` pairs for gain estimation.
    pub fn pairs(&self) -> Vec<(f64, f64)> {
        self.points.iter().map(|p| (p.value, p.ser)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepResult {
    pub variable: SweepVariable,
    pub curves: Vec<SerCurve>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOptions {
    pub workers: usize,
    /// Fill the `seconds` column; off gives byte-stable output.
    pub record_timing: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            workers: 1,
            record_timing: true,
        }
    }
}

/// Runs every grid point, trials in fixed-size chunks, with an optional
/// stop once all detectors have reached `min_errors` at a chunk boundary.
pub fn run_sweep(system: &System, spec: &SweepSpec, opts: &RunOptions) -> Result<SweepResult> {
    spec.validate(system)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let nd = spec.detectors.len();
    let mut curves: Vec<SerCurve> = spec
        .detectors
        .iter()
        .map(|&d| SerCurve {
            detector: d,
            points: Vec::new(),
        })
        .collect();
    let per_trial = system.symbols_per_trial() as u64;

    for point in spec.points() {
        let ctx = PointContext::new(system, spec, point);
        let mut errors = vec![0u64; nd];
        let mut seconds = vec![0f64; nd];
        let mut done = 0u64;
        let mut early = false;
        while done < spec.trials {
            let end = (done + spec.chunk).min(spec.trials);
            let records: Vec<TrialRecord> =
                pool.install(|| (done..end).into_par_iter().map(|t| run_trial(&ctx, t)).collect::<Result<_>>())?;
            for rec in &records {
                for d in 0..nd {
                    errors[d] += rec.errors[d].iter().filter(|&&e| e).count() as u64;
                    seconds[d] += rec.seconds[d];
                }
            }
            done = end;
            if let Some(min) = spec.min_errors {
                if done < spec.trials && errors.iter().all(|&e| e >= min) {
                    early = true;
                    break;
                }
            }
        }
        for (d, curve) in curves.iter_mut().enumerate() {
            let symbols = done * per_trial;
            curve.points.push(SerPoint {
                ebn0_db: ctx.ebn0_db,
                value: ctx.value,
                noise_var: ctx.noise_var,
                trials: done,
                symbol_errors: errors[d],
                symbols,
                ser: errors[d] as f64 / symbols as f64,
                seconds: if opts.record_timing { seconds[d] } else { 0.0 },
                early_stop: early,
            });
        }
    }
    Ok(SweepResult {
        variable: spec.variable,
        curves,
    })
}

impl SweepResult {
    pub fn curve(&self, d: DetectorKind) -> Option<&SerCurve> {
        self.curves.iter().find(|c| c.detector == d)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for c in &self.curves {
            for p in &c.points {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{:.6}",
                    c.detector.as_str(),
                    self.variable.as_str(),
                    p.value,
                    p.trials,
                    p.symbol_errors,
                    p.ser,
                    p.seconds
                );
            }
        }
        out
    }
}

/// Eb/N0 (or swept value) at which `curve` crosses `target`, by linear
/// interpolation in (value, log10 SER). Zero-SER points are skipped.
pub fn crossing(curve: &[(f64, f64)], target: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = curve.iter().copied().filter(|&(_, s)| s > 0.0).collect();
    let t = target.log10();
    for w in pts.windows(2) {
        let ((x0, s0), (x1, s1)) = (w[0], w[1]);
        let (y0, y1) = (s0.log10(), s1.log10());
        if (y0 >= t && t >= y1) || (y0 <= t && t <= y1) {
            if y0 == y1 {
                return Some(x0);
            }
            return Some(x0 + (t - y0) / (y1 - y0) * (x1 - x0));
        }
    }
    None
}

/// Gain of curve A over curve B at `target`: `x_B(target) − x_A(target)`.
pub fn estimate_snr_gain(curve_a: &[(f64, f64)], curve_b: &[(f64, f64)], target: f64) -> Option<f64> {
    Some(crossing(curve_b, target)? - crossing(curve_a, target)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebook::generate_reference_codebooks;
    use crate::sysmodel::SystemConfig;

    fn simo(scheme: Scheme, nr: usize) -> System {
        System::new(
            SystemConfig {
                scheme,
                variant: Variant::Simo,
                ues: 6,
                resources: 4,
                order: 4,
                tx_antennas: 1,
                rx_antennas: nr,
            },
            generate_reference_codebooks(6, 4, 4, scheme, None).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn trial_is_reproducible_and_shared() {
        let sys = simo(Scheme::Scma, 4);
        let spec = SweepSpec::ebn0(vec![DetectorKind::Admm, DetectorKind::Mmse, DetectorKind::Mpa], vec![6.0], 10, 42);
        let ctx = PointContext::new(&sys, &spec, spec.points()[0]);
        let a = run_trial(&ctx, 7).unwrap();
        let b = run_trial(&ctx, 7).unwrap();
        assert_eq!(a.errors, b.errors);
        assert_eq!(a.input_checksums, b.input_checksums);
        assert!(a.input_checksums.windows(2).all(|w| w[0] == w[1]));
        assert_ne!(run_trial(&ctx, 8).unwrap().input_checksums[0], a.input_checksums[0]);
    }

    #[test]
    fn noiseless_point_has_no_errors() {
        let sys = simo(Scheme::Scma, 8);
        let spec = SweepSpec::ebn0(vec![DetectorKind::Admm, DetectorKind::Mmse, DetectorKind::Mpa], vec![0.0], 20, 1);
        let ctx = PointContext::new(&sys, &spec, spec.points()[0]).with_noise_var(0.0);
        for t in 0..20 {
            let rec = run_trial(&ctx, t).unwrap();
            assert!(rec.errors.iter().flatten().all(|e| !e));
        }
    }

    #[test]
    fn validation() {
        let sys = simo(Scheme::Dcma, 4);
        let mut spec = SweepSpec::ebn0(vec![DetectorKind::Admm], vec![0.0], 0, 1);
        assert!(spec.validate(&sys).is_err());
        spec.trials = 1;
        assert!(spec.validate(&sys).is_ok());
        spec.detectors.push(DetectorKind::Mpa);
        assert!(matches!(spec.validate(&sys), Err(Error::Unsupported(_))));
        spec.detectors.pop();
        spec.variable = SweepVariable::Gamma;
        assert!(spec.validate(&sys).is_err());
        spec.values = vec![1.0, 75.0];
        assert!(spec.validate(&sys).is_ok());
        spec.ebn0_db = vec![0.0, 5.0];
        assert!(spec.validate(&sys).is_err());
        spec.ebn0_db = vec![0.0];
        spec.variable = SweepVariable::Iterations;
        spec.values = vec![2.5];
        assert!(spec.validate(&sys).is_err());
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let sys = simo(Scheme::Scma, 4);
        let mut spec = SweepSpec::ebn0(vec![DetectorKind::Admm, DetectorKind::Mmse], vec![0.0, 4.0], 300, 5);
        spec.chunk = 64;
        spec.min_errors = Some(50);
        let opts = |w| RunOptions {
            workers: w,
            record_timing: false,
        };
        let a = run_sweep(&sys, &spec, &opts(1)).unwrap();
        let b = run_sweep(&sys, &spec, &opts(3)).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        assert!(a.curves[0].points[0].early_stop);
        assert_eq!(a.curves[0].points[0].symbols, a.curves[0].points[0].trials * 6);
    }

    #[test]
    fn sm_counts_antenna_errors() {
        let cbs = generate_reference_codebooks(6, 4, 4, Scheme::Scma, None).unwrap();
        let sys = System::new(
            SystemConfig {
                scheme: Scheme::Scma,
                variant: Variant::Sm,
                ues: 6,
                resources: 4,
                order: 4,
                tx_antennas: 2,
                rx_antennas: 8,
            },
            cbs,
        )
        .unwrap();
        let sent = TxPayload {
            symbols: vec![1; 6],
            antennas: vec![0; 6],
        };
        let det = Detection {
            symbols: vec![1; 6],
            antennas: vec![0, 1, 0, 0, 0, 0],
            primal_gaps: vec![],
        };
        assert_eq!(count_errors(&sys, &sent, &det), vec![false, true, false, false, false, false]);
    }

    #[test]
    fn gain_estimation() {
        let a = vec![(0.0, 1e-1), (2.0, 1e-2), (4.0, 1e-3), (6.0, 1e-4)];
        let b: Vec<(f64, f64)> = a.iter().map(|&(x, s)| (x + 2.0, s)).collect();
        assert_eq!(estimate_snr_gain(&a, &a, 1e-3), Some(0.0));
        assert!((estimate_snr_gain(&a, &b, 1e-3).unwrap() - 2.0).abs() < 1e-12);
        assert!((crossing(&a, 10f64.powf(-2.5)).unwrap() - 3.0).abs() < 1e-12);
        assert_eq!(crossing(&a, 1e-6), None);
    }

    #[test]
    fn csv_shape() {
        let sys = simo(Scheme::Scma, 4);
        let spec = SweepSpec::ebn0(vec![DetectorKind::Admm], vec![3.0], 8, 2);
        let res = run_sweep(&sys, &spec, &RunOptions::default()).unwrap();
        let csv = res.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 2);
        assert!(lines[1].starts_with("admm,ebn0,3,8,"));
    }
}
