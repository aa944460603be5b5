//! Reference detectors for SIMO systems: linear MMSE, exhaustive ML and
//! sum-product message passing (SCMA only).

use crate::codebook::Scheme;
use crate::detection::{decide_simo, Detection};
use crate::error::{Error, Result};
use crate::numerics::{gram, CMatrix, HermitianFactor, C64};
use crate::sysmodel::{System, Variant};

/// Largest number of candidate tuples the ML search will visit.
pub const ML_BUDGET: u64 = 10_000_000;
pub const DEFAULT_MPA_ITERATIONS: usize = 10;
/// Noise floor used by MPA likelihoods so σ² = 0 stays finite.
pub const MPA_MIN_NOISE: f64 = 1e-12;

fn require_simo(system: &System, what: &str) -> Result<()> {
    if system.variant() != Variant::Simo {
        return Err(Error::Unsupported(format!("{what} supports SIMO systems only")));
    }
    Ok(())
}

/// `(HᴴH + σ²I)⁻¹Hᴴr` followed by per-UE MED.
pub fn detect_mmse(system: &System, r: &[C64], h: &CMatrix, noise_var: f64) -> Result<Detection> {
    require_simo(system, "MMSE")?;
    let x = HermitianFactor::new(&gram(h), 1.0, noise_var)?.solve(&h.conj_mul_vec(r));
    Ok(Detection {
        symbols: decide_simo(system, &x),
        ..Detection::default()
    })
}

/// Precomputed `H_j · c_j(m)` for every UE and codeword.
fn contributions(system: &System, h: &CMatrix) -> Vec<Vec<Vec<C64>>> {
    let ne = system.entries_per_ue();
    (0..system.ues())
        .map(|j| {
            let cb = system.codebooks().get(j);
            (0..cb.order())
                .map(|m| {
                    let cw = cb.compact_codeword(m);
                    (0..h.rows())
                        .map(|row| (0..ne).map(|d| h[(row, j * ne + d)] * cw[d]).sum())
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// Depth-first search over all tuples, visiting UEs in `order`. Strict
/// improvement keeps the first minimizer met, which for the identity order
/// is the lexicographically smallest tuple.
fn ml_search(r: &[C64], contrib: &[Vec<Vec<C64>>], order: &[usize]) -> Vec<usize> {
    struct Search<'a> {
        contrib: &'a [Vec<Vec<C64>>],
        order: &'a [usize],
        residuals: Vec<Vec<C64>>,
        current: Vec<usize>,
        best: Vec<usize>,
        best_cost: f64,
    }
    impl Search<'_> {
        fn descend(&mut self, depth: usize) {
            if depth == self.order.len() {
                let cost: f64 = self.residuals[depth].iter().map(|z| z.norm_sqr()).sum();
                if cost < self.best_cost {
                    self.best_cost = cost;
                    self.best.clone_from(&self.current);
                }
                return;
            }
            let j = self.order[depth];
            for m in 0..self.contrib[j].len() {
                let (head, tail) = self.residuals.split_at_mut(depth + 1);
                for ((out, prev), c) in tail[0].iter_mut().zip(&head[depth]).zip(&self.contrib[j][m]) {
                    *out = prev - c;
                }
                self.current[j] = m;
                self.descend(depth + 1);
            }
        }
    }
    let ues = order.len();
    let mut residuals = vec![vec![C64::new(0.0, 0.0); r.len()]; ues + 1];
    residuals[0].copy_from_slice(r);
    let mut s = Search {
        contrib,
        order,
        residuals,
        current: vec![0; ues],
        best: vec![0; ues],
        best_cost: f64::INFINITY,
    };
    s.descend(0);
    s.best
}

/// Exact minimizer of `‖r − H·x‖²` over all `M^J` codeword tuples.
pub fn detect_ml(system: &System, r: &[C64], h: &CMatrix) -> Result<Detection> {
    require_simo(system, "ML")?;
    let tuples = (system.order() as u64).checked_pow(system.ues() as u32);
    if tuples.is_none_or(|t| t > ML_BUDGET) {
        return Err(Error::Budget(format!(
            "M^J = {}^{} exceeds {ML_BUDGET}",
            system.order(),
            system.ues()
        )));
    }
    if h.rows() != r.len() || h.cols() != system.simo_len() {
        return Err(Error::Dimension("ML: H does not match r or the system".into()));
    }
    let order: Vec<usize> = (0..system.ues()).collect();
    Ok(Detection {
        symbols: ml_search(r, &contributions(system, h), &order),
        ..Detection::default()
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct MpaConfig {
    pub iterations: usize,
    /// Weight of the previous variable-to-function message, in `[0, 1]`.
    pub damping: f64,
}

impl Default for MpaConfig {
    fn default() -> Self {
        MpaConfig {
            iterations: DEFAULT_MPA_ITERATIONS,
            damping: 0.0,
        }
    }
}

impl MpaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::Config("MPA needs at least one iteration".into()));
        }
        if !(0.0..=1.0).contains(&self.damping) {
            return Err(Error::Config(format!("MPA damping {} outside [0, 1]", self.damping)));
        }
        Ok(())
    }
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + v.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

fn normalize_log(v: &mut [f64]) {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for x in v {
        *x -= max;
    }
}

fn to_probabilities(log: &[f64]) -> Vec<f64> {
    let lse = log_sum_exp(log);
    log.iter().map(|x| (x - lse).exp()).collect()
}

/// Log-domain sum-product on the SCMA factor graph with a flooding schedule.
/// Each RE is one function node observing all `N_r` receive antennas.
pub fn detect_mpa(system: &System, r: &[C64], h: &CMatrix, noise_var: f64, cfg: &MpaConfig) -> Result<Detection> {
    detect_mpa_observed(system, r, h, noise_var, cfg, |_, _| {})
}

/// [`detect_mpa`] reporting per-UE beliefs (probabilities) after each
/// iteration.
pub fn detect_mpa_observed(
    system: &System,
    r: &[C64],
    h: &CMatrix,
    noise_var: f64,
    cfg: &MpaConfig,
    mut observe: impl FnMut(usize, &[Vec<f64>]),
) -> Result<Detection> {
    require_simo(system, "MPA")?;
    if system.codebooks().scheme() != Scheme::Scma {
        return Err(Error::Unsupported("MPA needs sparse (SCMA) codebooks".into()));
    }
    cfg.validate()?;
    let (k_res, nr, ne, m) = (
        system.resources(),
        system.rx_antennas(),
        system.entries_per_ue(),
        system.order(),
    );
    if h.rows() != k_res * nr || r.len() != h.rows() || h.cols() != system.simo_len() {
        return Err(Error::Dimension("MPA: H does not match r or the system".into()));
    }
    let inv_noise = 1.0 / noise_var.max(MPA_MIN_NOISE);

    // Per RE: the UEs on it and the log-likelihood of every codeword combo
    // (combo digits in base M, first UE least significant).
    struct Node {
        users: Vec<usize>,
        metric: Vec<f64>,
    }
    let mut nodes = Vec::with_capacity(k_res);
    for k in 0..k_res {
        let users = system.users_on(k).to_vec();
        let slots: Vec<usize> = users
            .iter()
            .map(|&j| system.active_resources(j).iter().position(|&x| x == k).unwrap())
            .collect();
        let combos = m.pow(users.len() as u32);
        let mut metric = vec![0.0; combos];
        for (c, met) in metric.iter_mut().enumerate() {
            let mut dist = 0.0;
            for n in 0..nr {
                let row = n * k_res + k;
                let mut y = r[row];
                let mut code = c;
                for (&j, &d) in users.iter().zip(&slots) {
                    let mj = code % m;
                    code /= m;
                    y -= h[(row, j * ne + d)] * system.codebooks().get(j).entry(k, mj);
                }
                dist += y.norm_sqr();
            }
            *met = -dist * inv_noise;
        }
        nodes.push(Node { users, metric });
    }

    let ues = system.ues();
    // Messages indexed by (k, position of UE in node).
    let mut to_fn: Vec<Vec<Vec<f64>>> = nodes.iter().map(|nd| vec![vec![0.0; m]; nd.users.len()]).collect();
    let mut to_var: Vec<Vec<Vec<f64>>> = to_fn.clone();
    let mut beliefs = vec![vec![0.0; m]; ues];
    let mut scratch: Vec<Vec<f64>> = vec![Vec::new(); m];

    for it in 0..cfg.iterations {
        for (k, nd) in nodes.iter().enumerate() {
            for (pos, _) in nd.users.iter().enumerate() {
                for s in scratch.iter_mut() {
                    s.clear();
                }
                for (c, met) in nd.metric.iter().enumerate() {
                    let mut total = *met;
                    let mut code = c;
                    let mut own = 0;
                    for (q, msg) in to_fn[k].iter().enumerate() {
                        let mq = code % m;
                        code /= m;
                        if q == pos {
                            own = mq;
                        } else {
                            total += msg[mq];
                        }
                    }
                    scratch[own].push(total);
                }
                let out = &mut to_var[k][pos];
                for (o, s) in out.iter_mut().zip(&scratch) {
                    *o = log_sum_exp(s);
                }
                normalize_log(out);
            }
        }
        for (j, belief) in beliefs.iter_mut().enumerate() {
            let incoming: Vec<(usize, usize)> = system
                .active_resources(j)
                .iter()
                .map(|&k| (k, nodes[k].users.iter().position(|&u| u == j).unwrap()))
                .collect();
            for (mm, b) in belief.iter_mut().enumerate() {
                *b = incoming.iter().map(|&(k, p)| to_var[k][p][mm]).sum();
            }
            for &(k, p) in &incoming {
                let mut msg: Vec<f64> = (0..m).map(|mm| belief[mm] - to_var[k][p][mm]).collect();
                normalize_log(&mut msg);
                if cfg.damping > 0.0 {
                    for (new, old) in msg.iter_mut().zip(&to_fn[k][p]) {
                        *new = (1.0 - cfg.damping) * *new + cfg.damping * old;
                    }
                }
                to_fn[k][p] = msg;
            }
        }
        let probs: Vec<Vec<f64>> = beliefs.iter().map(|b| to_probabilities(b)).collect();
        observe(it + 1, &probs);
    }

    let symbols = beliefs
        .iter()
        .map(|b| {
            let mut best = (0, f64::NEG_INFINITY);
            for (mm, &v) in b.iter().enumerate() {
                if v > best.1 {
                    best = (mm, v);
                }
            }
            best.0
        })
        .collect();
    Ok(Detection {
        symbols,
        ..Detection::default()
    })
}
