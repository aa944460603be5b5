//! Closed-form FLOP counts for the ADMM detector and its baselines.
//!
//! Counts are exact integers. Iterative detectors report a preprocessing
//! part and a per-iteration part; the sphere decoder reports an expected
//! search cost instead.

use std::fmt;

use serde::Serialize;

use crate::codebook::Scheme;

pub type Flops = u128;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FlopDetector {
    Admm,
    Mmse,
    Mpa,
    Gsd,
}

impl fmt::Display for FlopDetector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FlopDetector::Admm => "admm",
            FlopDetector::Mmse => "mmse",
            FlopDetector::Mpa => "mpa",
            FlopDetector::Gsd => "gsd",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FlopsReport {
    pub detector: FlopDetector,
    pub scheme: Scheme,
    pub preprocessing: Flops,
    pub per_iteration: Flops,
    pub iterations: u32,
    /// Iteration-free search cost (sphere decoding only).
    pub search: Flops,
}

impl FlopsReport {
    pub fn total(&self) -> Flops {
        self.total_at(self.iterations)
    }

    pub fn total_at(&self, iterations: u32) -> Flops {
        self.preprocessing + Flops::from(iterations) * self.per_iteration + self.search
    }
}

fn w(x: usize) -> Flops {
    x as Flops
}

/// Stacked dimension seen by the linear algebra: `J·d_v` (SCMA), `J·K`
/// (DCMA), or `J` (spreading, one scalar symbol per UE).
fn unknowns(scheme: Scheme, ues: usize, resources: usize, dv: usize) -> Flops {
    match scheme {
        Scheme::Scma => w(ues) * w(dv),
        Scheme::Dcma => w(ues) * w(resources),
        Scheme::Spreading => w(ues),
    }
}

fn linear_preprocessing(scheme: Scheme, ues: usize, resources: usize, rx: usize, dv: usize) -> Flops {
    let n = unknowns(scheme, ues, resources, dv);
    let obs = w(rx) * w(resources);
    obs * n * n + n * n * n + obs * n
}

pub fn flops_admm(scheme: Scheme, ues: usize, resources: usize, rx: usize, dv: usize, iterations: u32) -> FlopsReport {
    let j = w(ues);
    let per_iteration = match scheme {
        Scheme::Spreading => 2 * j * j + j,
        Scheme::Scma | Scheme::Dcma => {
            let d = if scheme == Scheme::Scma { w(dv) } else { w(resources) };
            j * j * d + (j * d) * (j * d) + j * d
        }
    };
    FlopsReport {
        detector: FlopDetector::Admm,
        scheme,
        preprocessing: linear_preprocessing(scheme, ues, resources, rx, dv),
        per_iteration,
        iterations,
        search: 0,
    }
}

pub fn flops_mmse(scheme: Scheme, ues: usize, resources: usize, rx: usize, dv: usize) -> FlopsReport {
    FlopsReport {
        detector: FlopDetector::Mmse,
        scheme,
        preprocessing: linear_preprocessing(scheme, ues, resources, rx, dv),
        per_iteration: 0,
        iterations: 0,
        search: 0,
    }
}

/// `(K·d_f²·M^{d_f}·N_r + N·d_f·M·d_v)·T`. The count `N` of the variable
/// node term defaults to `K`.
pub fn flops_mpa(
    resources: usize,
    df: usize,
    order: usize,
    rx: usize,
    dv: usize,
    iterations: u32,
    variable_nodes: Option<usize>,
) -> FlopsReport {
    let n = w(variable_nodes.unwrap_or(resources));
    let function = w(resources) * w(df) * w(df) * w(order).pow(df as u32) * w(rx);
    let variable = n * w(df) * w(order) * w(dv);
    FlopsReport {
        detector: FlopDetector::Mpa,
        scheme: Scheme::Scma,
        preprocessing: 0,
        per_iteration: function + variable,
        iterations,
        search: 0,
    }
}

/// Default sphere-decoder node model: `N_j = J³` visited nodes per level.
pub fn cubic_nodes(ues: usize) -> impl Fn(usize) -> Flops {
    move |_| w(ues).pow(3)
}

/// Sphere decoder on the spreading system: QR-type preprocessing plus
/// `Σ_{j=1..J} (2j + 11)·N_j` for the search. The `J³/3` term rounds up.
pub fn flops_gsd(ues: usize, resources: usize, rx: usize, nodes_per_level: impl Fn(usize) -> Flops) -> FlopsReport {
    let (j, k, nr) = (w(ues), w(resources), w(rx));
    let preprocessing =
        nr * k * j * j + (j * j * j).div_ceil(3) + (j * j * j + nr * k * j * j + j * nr * k) + j * j * j + 2 * j * j;
    let search = (1..=ues).map(|level| (2 * w(level) + 11) * nodes_per_level(level)).sum();
    FlopsReport {
        detector: FlopDetector::Gsd,
        scheme: Scheme::Spreading,
        preprocessing,
        per_iteration: 0,
        iterations: 0,
        search,
    }
}

/// Parameters of a side-by-side comparison.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlopParams {
    pub ues: usize,
    pub resources: usize,
    pub rx: usize,
    pub dv: usize,
    pub order: usize,
    pub iterations: u32,
    pub mpa_variable_nodes: Option<usize>,
}

impl Default for FlopParams {
    fn default() -> Self {
        FlopParams {
            ues: 6,
            resources: 4,
            rx: 4,
            dv: 2,
            order: 4,
            iterations: 1,
            mpa_variable_nodes: None,
        }
    }
}

/// Every detector/system pair: ADMM and MMSE on all three schemes, MPA on
/// SCMA, sphere decoding on spreading.
pub fn comparison(p: &FlopParams) -> Vec<FlopsReport> {
    let df = (p.ues * p.dv).div_ceil(p.resources);
    let mut out = Vec::new();
    for scheme in [Scheme::Scma, Scheme::Dcma, Scheme::Spreading] {
        out.push(flops_admm(scheme, p.ues, p.resources, p.rx, p.dv, p.iterations));
        out.push(flops_mmse(scheme, p.ues, p.resources, p.rx, p.dv));
    }
    out.push(flops_mpa(p.resources, df, p.order, p.rx, p.dv, p.iterations, p.mpa_variable_nodes));
    out.push(flops_gsd(p.ues, p.resources, p.rx, cubic_nodes(p.ues)));
    out
}
