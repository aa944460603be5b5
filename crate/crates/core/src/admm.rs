//! Sharing-ADMM detector with box relaxation.
//!
//! The stacked unknown is split into one segment per UE. Each UE keeps a
//! local copy `z_j` constrained to its box on its own segment (and to zero
//! elsewhere); a shared variable `x̄` couples the copies through the
//! received signal. After `T` iterations the estimate is `N·x̄`, `N` being
//! the number of segments.

use serde::{Deserialize, Serialize};

use crate::codebook::BoxBounds;
use crate::detection::{decide_simo, decide_sm, decide_smx, regroup_per_re, Detection};
use crate::error::{Error, Result};
use crate::numerics::{box_project_in_place, gram, norm2, CMatrix, CVector, HermitianFactor, C64};
use crate::sysmodel::{System, Variant};

pub const DEFAULT_ITERATIONS: usize = 30;
pub const DEFAULT_GAMMA: f64 = 75.0;
/// Floor for the automatic penalty `ρ = σ²` so noiseless runs stay solvable.
pub const MIN_AUTO_RHO: f64 = 1e-6;

/// Box penalty, one value for all UEs or one per UE.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Gamma {
    Shared(f64),
    PerUe(Vec<f64>),
}

impl Gamma {
    pub fn for_ue(&self, ue: usize) -> f64 {
        match self {
            Gamma::Shared(g) => *g,
            Gamma::PerUe(gs) => gs[ue],
        }
    }
}

impl Default for Gamma {
    fn default() -> Self {
        Gamma::Shared(DEFAULT_GAMMA)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdmmConfig {
    pub iterations: usize,
    pub rho: f64,
    pub gamma: Gamma,
}

impl AdmmConfig {
    /// Defaults with `ρ` tied to the noise variance.
    pub fn for_noise(noise_var: f64) -> Self {
        AdmmConfig {
            iterations: DEFAULT_ITERATIONS,
            rho: auto_rho(noise_var),
            gamma: Gamma::default(),
        }
    }

    pub fn validate(&self, ues: usize) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::Config("ADMM needs at least one iteration".into()));
        }
        if !(self.rho.is_finite() && self.rho > 0.0) {
            return Err(Error::Config(format!("rho must be positive, got {}", self.rho)));
        }
        let gammas: Vec<f64> = match &self.gamma {
            Gamma::Shared(g) => vec![*g],
            Gamma::PerUe(gs) => {
                if gs.len() != ues {
                    return Err(Error::Config(format!("{} gamma values for {ues} UEs", gs.len())));
                }
                gs.clone()
            }
        };
        if gammas.iter().any(|g| !(g.is_finite() && *g >= 0.0)) {
            return Err(Error::Config("gamma must be finite and >= 0".into()));
        }
        Ok(())
    }
}

pub fn auto_rho(noise_var: f64) -> f64 {
    noise_var.max(MIN_AUTO_RHO)
}

/// A contiguous run of stacked slots owned by one UE.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub ue: usize,
    pub start: usize,
    pub len: usize,
    pub bounds: BoxBounds,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdmmOutput {
    /// `N·x̄` after the last iteration.
    pub estimate: CVector,
    pub primal_gaps: Vec<f64>,
}

/// Iterates seen by an observer after each full iteration.
pub struct IterationView<'a> {
    pub iteration: usize,
    /// Own-segment values of every `z_j`, laid out in stacked order. The
    /// full `z_j` is this restricted to segment `j`, zero elsewhere.
    pub z: &'a [C64],
    pub z_mean: &'a [C64],
    pub x_mean: &'a [C64],
    pub dual: &'a [C64],
}

impl IterationView<'_> {
    /// The full-length local copy of segment `seg`.
    pub fn local_copy(&self, segments: &[Segment], seg: usize) -> CVector {
        let s = segments[seg];
        let mut out = vec![C64::new(0.0, 0.0); self.z.len()];
        out[s.start..s.start + s.len].copy_from_slice(&self.z[s.start..s.start + s.len]);
        out
    }
}

pub fn admm_core(r: &[C64], h: &CMatrix, segments: &[Segment], cfg: &AdmmConfig) -> Result<AdmmOutput> {
    admm_core_observed(r, h, segments, cfg, |_| {})
}

/// [`admm_core`] with a callback after every iteration.
pub fn admm_core_observed(
    r: &[C64],
    h: &CMatrix,
    segments: &[Segment],
    cfg: &AdmmConfig,
    mut observe: impl FnMut(&IterationView<'_>),
) -> Result<AdmmOutput> {
    let len = h.cols();
    if h.rows() != r.len() {
        return Err(Error::Dimension(format!("H has {} rows, r has {}", h.rows(), r.len())));
    }
    let mut next = 0;
    for s in segments {
        if s.start != next {
            return Err(Error::Dimension("segments must tile the stacked vector in order".into()));
        }
        next += s.len;
    }
    if next != len || segments.is_empty() {
        return Err(Error::Dimension(format!("segments cover {next} of {len} slots")));
    }
    if cfg.iterations == 0 || !(cfg.rho > 0.0) {
        return Err(Error::Config("ADMM needs T >= 1 and rho > 0".into()));
    }

    let n = segments.len() as f64;
    let rho = cfg.rho;
    let mut alpha = vec![0.0; len];
    let mut beta = vec![0.0; len];
    let mut shrink = vec![0.0; len];
    for s in segments {
        let c = rho / (rho + cfg.gamma.for_ue(s.ue));
        for i in s.start..s.start + s.len {
            alpha[i] = s.bounds.alpha;
            beta[i] = s.bounds.beta;
            shrink[i] = c;
        }
    }

    let factor = HermitianFactor::new(&gram(h), n, rho)?;
    let matched = h.conj_mul_vec(r);
    let zero = C64::new(0.0, 0.0);
    let mut z = vec![zero; len];
    let mut z_mean = vec![zero; len];
    let mut x_mean = vec![zero; len];
    let mut dual = vec![zero; len];
    let mut gaps = Vec::with_capacity(cfg.iterations);

    for t in 0..cfg.iterations {
        for i in 0..len {
            z[i] = (z[i] + x_mean[i] - dual[i] - z_mean[i]) * shrink[i];
        }
        box_project_in_place(&mut z, &alpha, &beta);
        for i in 0..len {
            z_mean[i] = z[i] / n;
            x_mean[i] = matched[i] + (z_mean[i] + dual[i]) * rho;
        }
        factor.solve_in_place(&mut x_mean);
        let mut gap = 0.0;
        for i in 0..len {
            let d = z_mean[i] - x_mean[i];
            dual[i] += d;
            gap += d.norm_sqr();
        }
        if !x_mean.iter().chain(&dual).all(|v| v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::NonFinite(format!("ADMM iteration {}", t + 1)));
        }
        gaps.push(gap.sqrt());
        observe(&IterationView {
            iteration: t + 1,
            z: &z,
            z_mean: &z_mean,
            x_mean: &x_mean,
            dual: &dual,
        });
    }
    Ok(AdmmOutput {
        estimate: x_mean.iter().map(|v| v * n).collect(),
        primal_gaps: gaps,
    })
}

/// Segments of the stacked SIMO vector, one per UE.
pub fn simo_segments(system: &System) -> Vec<Segment> {
    let ne = system.entries_per_ue();
    let bounds = system.codebooks().box_bounds();
    (0..system.ues())
        .map(|j| Segment {
            ue: j,
            start: j * ne,
            len: ne,
            bounds: bounds[j],
        })
        .collect()
}

/// Segments of the stacked vector on RE `k`, one per UE in ζ_k.
pub fn re_segments(system: &System, k: usize) -> Vec<Segment> {
    let nt = system.tx_antennas();
    system
        .users_on(k)
        .iter()
        .enumerate()
        .map(|(pos, &j)| Segment {
            ue: j,
            start: pos * nt,
            len: nt,
            bounds: system.codebooks().get(j).box_bounds(),
        })
        .collect()
}

pub fn detect_simo(system: &System, r: &[C64], h: &CMatrix, cfg: &AdmmConfig) -> Result<Detection> {
    let out = admm_core(r, h, &simo_segments(system), cfg)?;
    Ok(Detection {
        symbols: decide_simo(system, &out.estimate),
        antennas: Vec::new(),
        primal_gaps: out.primal_gaps,
    })
}

fn detect_per_re(system: &System, rs: &[CVector], hs: &[CMatrix], cfg: &AdmmConfig) -> Result<(Vec<CVector>, Vec<f64>)> {
    if rs.len() != system.resources() || hs.len() != system.resources() {
        return Err(Error::Dimension(format!(
            "need {} per-RE observations and channels",
            system.resources()
        )));
    }
    let mut estimates = Vec::with_capacity(rs.len());
    let mut gap_sq = vec![0.0; cfg.iterations];
    for (k, (r, h)) in rs.iter().zip(hs).enumerate() {
        let out = admm_core(r, h, &re_segments(system, k), cfg)?;
        for (acc, g) in gap_sq.iter_mut().zip(&out.primal_gaps) {
            *acc += g * g;
        }
        estimates.push(out.estimate);
    }
    Ok((estimates, gap_sq.into_iter().map(f64::sqrt).collect()))
}

pub fn detect_smx(system: &System, rs: &[CVector], hs: &[CMatrix], cfg: &AdmmConfig) -> Result<Detection> {
    let (est, gaps) = detect_per_re(system, rs, hs, cfg)?;
    Ok(Detection {
        symbols: decide_smx(system, &regroup_per_re(system, &est)),
        antennas: Vec::new(),
        primal_gaps: gaps,
    })
}

pub fn detect_sm(system: &System, rs: &[CVector], hs: &[CMatrix], cfg: &AdmmConfig) -> Result<Detection> {
    let (est, gaps) = detect_per_re(system, rs, hs, cfg)?;
    let (symbols, antennas) = decide_sm(system, &regroup_per_re(system, &est));
    Ok(Detection {
        symbols,
        antennas,
        primal_gaps: gaps,
    })
}

/// Dispatches on the system variant. SIMO takes one observation and matrix;
/// SMX/SM take one per RE.
pub fn detect(system: &System, rs: &[CVector], hs: &[CMatrix], cfg: &AdmmConfig) -> Result<Detection> {
    match system.variant() {
        Variant::Simo => {
            let (Some(r), Some(h)) = (rs.first(), hs.first()) else {
                return Err(Error::Dimension("SIMO detection needs one observation".into()));
            };
            detect_simo(system, r, h, cfg)
        }
        Variant::Smx => detect_smx(system, rs, hs, cfg),
        Variant::Sm => detect_sm(system, rs, hs, cfg),
    }
}

/// `N·(HᴴH·N + ρI)⁻¹Hᴴr`, the estimate after one iteration from zero.
pub fn first_iteration_estimate(r: &[C64], h: &CMatrix, multiplicity: usize, rho: f64) -> Result<CVector> {
    let n = multiplicity as f64;
    let x = HermitianFactor::new(&gram(h), n, rho)?.solve(&h.conj_mul_vec(r));
    Ok(x.into_iter().map(|v| v * n).collect())
}

/// `‖a − b‖ / ‖b‖`.
pub fn relative_error(a: &[C64], b: &[C64]) -> f64 {
    let diff: Vec<C64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    norm2(&diff) / norm2(b)
}
