//! Transmit encoding, Rayleigh channels and received-signal assembly for the
//! SIMO, spatial-multiplexing (SMX) and spatial-modulation (SM) uplinks.
//!
//! Stacked vectors always list UEs in ascending index and, inside a UE,
//! antennas in ascending index.

use std::fmt;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::codebook::{CodebookSet, Scheme};
use crate::error::{Error, Result};
use crate::numerics::{CMatrix, CVector, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Simo,
    Smx,
    Sm,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Simo => "simo",
            Variant::Smx => "smx",
            Variant::Sm => "sm",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "simo" => Ok(Variant::Simo),
            "smx" => Ok(Variant::Smx),
            "sm" => Ok(Variant::Sm),
            other => Err(Error::Config(format!("unknown variant '{other}'"))),
        }
    }
}

/// Shape of an uplink system. The codebooks fix J, K, M and the scheme.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub scheme: Scheme,
    pub variant: Variant,
    #[serde(rename = "J")]
    pub ues: usize,
    #[serde(rename = "K")]
    pub resources: usize,
    #[serde(rename = "M")]
    pub order: usize,
    #[serde(rename = "N_t", default = "one")]
    pub tx_antennas: usize,
    #[serde(rename = "N_r")]
    pub rx_antennas: usize,
}

fn one() -> usize {
    1
}

/// A system configuration bound to codebooks that match it.
#[derive(Clone, Debug)]
pub struct System {
    cfg: SystemConfig,
    codebooks: CodebookSet,
    users_on: Vec<Vec<usize>>,
    active: Vec<Vec<usize>>,
}

impl System {
    pub fn new(cfg: SystemConfig, codebooks: CodebookSet) -> Result<Self> {
        let bad = |msg: String| Err(Error::Config(msg));
        if cfg.scheme != codebooks.scheme() {
            return bad(format!("scheme {} but codebooks are {}", cfg.scheme, codebooks.scheme()));
        }
        if (cfg.ues, cfg.resources, cfg.order)
            != (codebooks.ues(), codebooks.resources(), codebooks.order())
        {
            return bad(format!(
                "J/K/M = {}/{}/{} but codebooks are {}/{}/{}",
                cfg.ues,
                cfg.resources,
                cfg.order,
                codebooks.ues(),
                codebooks.resources(),
                codebooks.order()
            ));
        }
        if cfg.rx_antennas == 0 || cfg.tx_antennas == 0 {
            return bad("antenna counts must be positive".into());
        }
        let graph = codebooks.graph();
        let users_on: Vec<Vec<usize>> = (0..cfg.resources).map(|k| graph.users_on(k)).collect();
        let active: Vec<Vec<usize>> = (0..cfg.ues).map(|j| graph.active_resources(j)).collect();
        let sys = System {
            cfg,
            codebooks,
            users_on,
            active,
        };
        match sys.cfg.variant {
            Variant::Simo if sys.cfg.tx_antennas != 1 => {
                return bad(format!("SIMO needs N_t = 1, got {}", sys.cfg.tx_antennas));
            }
            Variant::Smx if sys.cfg.rx_antennas <= sys.max_users_per_re() * sys.cfg.tx_antennas => {
                return bad(format!(
                    "SMX needs N_r > N_u·N_t = {}",
                    sys.max_users_per_re() * sys.cfg.tx_antennas
                ));
            }
            Variant::Sm if !sys.cfg.tx_antennas.is_power_of_two() || sys.cfg.tx_antennas < 2 => {
                return bad(format!("SM needs N_t a power of two >= 2, got {}", sys.cfg.tx_antennas));
            }
            _ => {}
        }
        Ok(sys)
    }

    pub fn config(&self) -> &SystemConfig {
        &self.cfg
    }

    pub fn codebooks(&self) -> &CodebookSet {
        &self.codebooks
    }

    pub fn variant(&self) -> Variant {
        self.cfg.variant
    }

    pub fn ues(&self) -> usize {
        self.cfg.ues
    }

    pub fn resources(&self) -> usize {
        self.cfg.resources
    }

    pub fn order(&self) -> usize {
        self.cfg.order
    }

    pub fn tx_antennas(&self) -> usize {
        self.cfg.tx_antennas
    }

    pub fn rx_antennas(&self) -> usize {
        self.cfg.rx_antennas
    }

    /// Nonzero entries per codeword (N_e): d_v for SCMA, K otherwise.
    pub fn entries_per_ue(&self) -> usize {
        self.codebooks.nonzeros_per_codeword()
    }

    /// UEs sharing RE `k` (ζ_k), ascending.
    pub fn users_on(&self, k: usize) -> &[usize] {
        &self.users_on[k]
    }

    /// REs used by UE `j`, ascending.
    pub fn active_resources(&self, j: usize) -> &[usize] {
        &self.active[j]
    }

    /// N_u: UEs per RE (d_f for SCMA, J for dense schemes).
    pub fn max_users_per_re(&self) -> usize {
        self.users_on.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Whether the stacked SIMO system has more observations than unknowns.
    pub fn is_simo_overdetermined(&self) -> bool {
        self.cfg.resources * self.cfg.rx_antennas > self.cfg.ues * self.entries_per_ue()
    }

    /// Information bits carried by one UE per channel use.
    pub fn bits_per_ue(&self) -> f64 {
        let m = (self.cfg.order as f64).log2();
        let nt = self.cfg.tx_antennas as f64;
        match self.cfg.variant {
            Variant::Simo => m,
            Variant::Smx => nt * m,
            Variant::Sm => m + nt.log2(),
        }
    }

    /// Noise variance for a given Eb/N0 with unit codeword energy.
    pub fn noise_variance(&self, ebn0_db: f64) -> f64 {
        noise_variance_from_ebn0(self.bits_per_ue(), ebn0_db)
    }

    /// Detected symbols per trial: J, or J·N_t for SMX.
    pub fn symbols_per_trial(&self) -> usize {
        match self.cfg.variant {
            Variant::Smx => self.cfg.ues * self.cfg.tx_antennas,
            Variant::Simo | Variant::Sm => self.cfg.ues,
        }
    }

    /// Length of the stacked SIMO vector, J·N_e.
    pub fn simo_len(&self) -> usize {
        self.cfg.ues * self.entries_per_ue()
    }

    /// Length of the stacked vector on RE `k`, |ζ_k|·N_t.
    pub fn re_len(&self, k: usize) -> usize {
        self.users_on[k].len() * self.cfg.tx_antennas
    }

    pub fn draw_payload(&self, rng: &mut impl Rng) -> TxPayload {
        let m = self.cfg.order;
        let symbols = (0..self.symbols_per_trial()).map(|_| rng.gen_range(0..m)).collect();
        let antennas = match self.cfg.variant {
            Variant::Sm => (0..self.cfg.ues)
                .map(|_| rng.gen_range(0..self.cfg.tx_antennas))
                .collect(),
            _ => Vec::new(),
        };
        TxPayload { symbols, antennas }
    }

    /// Fresh i.i.d. CN(0,1) coefficients.
    pub fn draw_channel(&self, rng: &mut impl Rng) -> ChannelRealization {
        let (k, nr) = (self.cfg.resources, self.cfg.rx_antennas);
        match self.cfg.variant {
            Variant::Simo => {
                let coeffs = (0..self.cfg.ues * nr)
                    .map(|_| (0..k).map(|_| complex_gaussian(rng)).collect())
                    .collect();
                ChannelRealization::Simo { rx_antennas: nr, coeffs }
            }
            Variant::Smx | Variant::Sm => {
                let per_re = (0..k)
                    .map(|re| CMatrix::from_fn(nr, self.re_len(re), |_, _| complex_gaussian(rng)))
                    .collect();
                ChannelRealization::PerRe(per_re)
            }
        }
    }

    /// The `K·N_r × J·N_e` SIMO matrix. Block `(n_r, j)` is `diag(h_j^{(n_r)})`
    /// restricted to UE `j`'s active REs.
    pub fn build_simo_matrix(&self, ch: &ChannelRealization) -> Result<CMatrix> {
        let ChannelRealization::Simo { rx_antennas, coeffs } = ch else {
            return Err(Error::Dimension("SIMO matrix needs a SIMO channel".into()));
        };
        let (k, nr, ne) = (self.cfg.resources, self.cfg.rx_antennas, self.entries_per_ue());
        if *rx_antennas != nr || coeffs.len() != self.cfg.ues * nr || coeffs.iter().any(|c| c.len() != k) {
            return Err(Error::Dimension("channel does not match the system".into()));
        }
        let mut h = CMatrix::zeros(k * nr, self.simo_len());
        for j in 0..self.cfg.ues {
            for (d, &re) in self.active[j].iter().enumerate() {
                for n in 0..nr {
                    h[(n * k + re, j * ne + d)] = coeffs[j * nr + n][re];
                }
            }
        }
        Ok(h)
    }

    /// Stacked SIMO transmit vector and its per-UE parts.
    pub fn encode_simo(&self, payload: &TxPayload) -> (CVector, Vec<CVector>) {
        let ne = self.entries_per_ue();
        let len = self.simo_len();
        let mut parts = vec![vec![C64::new(0.0, 0.0); len]; self.cfg.ues];
        for (j, part) in parts.iter_mut().enumerate() {
            let cw = self.codebooks.get(j).compact_codeword(payload.symbols[j]);
            part[j * ne..(j + 1) * ne].copy_from_slice(&cw);
        }
        (sum_parts(&parts, len), parts)
    }

    /// Stacked transmit vector on RE `k` for SMX or SM, and its per-UE parts
    /// (one part per UE in ζ_k).
    pub fn encode_re(&self, payload: &TxPayload, k: usize) -> (CVector, Vec<CVector>) {
        let nt = self.cfg.tx_antennas;
        let len = self.re_len(k);
        let users = &self.users_on[k];
        let mut parts = vec![vec![C64::new(0.0, 0.0); len]; users.len()];
        for (pos, &j) in users.iter().enumerate() {
            let cb = self.codebooks.get(j);
            match self.cfg.variant {
                Variant::Smx => {
                    for t in 0..nt {
                        parts[pos][pos * nt + t] = cb.entry(k, payload.symbols[j * nt + t]);
                    }
                }
                Variant::Sm => {
                    parts[pos][pos * nt + payload.antennas[j]] = cb.entry(k, payload.symbols[j]);
                }
                Variant::Simo => panic!("encode_re is for SMX/SM systems"),
            }
        }
        (sum_parts(&parts, len), parts)
    }
}

fn sum_parts(parts: &[CVector], len: usize) -> CVector {
    let mut x = vec![C64::new(0.0, 0.0); len];
    for p in parts {
        for (a, b) in x.iter_mut().zip(p) {
            *a += b;
        }
    }
    x
}

/// Transmitted indices. `symbols` holds one codeword index per UE, or per
/// (UE, antenna) at `j·N_t + t` for SMX. `antennas` is the active antenna
/// per UE for SM and empty otherwise.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TxPayload {
    pub symbols: Vec<usize>,
    pub antennas: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ChannelRealization {
    /// `coeffs[j·N_r + n_r]` is the K-vector `h_j^{(n_r)}`.
    Simo { rx_antennas: usize, coeffs: Vec<CVector> },
    /// One `N_r × |ζ_k|·N_t` matrix per RE.
    PerRe(Vec<CMatrix>),
}

impl ChannelRealization {
    pub fn is_finite(&self) -> bool {
        match self {
            ChannelRealization::Simo { coeffs, .. } => {
                coeffs.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
            }
            ChannelRealization::PerRe(ms) => ms.iter().all(CMatrix::is_finite),
        }
    }

    /// Channel estimate `H + e·Ω` applied to every fading coefficient.
    /// Structural zeros of the assembled SIMO matrix stay zero.
    pub fn perturbed(&self, error_scale: f64, rng: &mut impl Rng) -> ChannelRealization {
        match self {
            ChannelRealization::Simo { rx_antennas, coeffs } => ChannelRealization::Simo {
                rx_antennas: *rx_antennas,
                coeffs: coeffs
                    .iter()
                    .map(|c| c.iter().map(|z| z + complex_gaussian(rng) * error_scale).collect())
                    .collect(),
            },
            ChannelRealization::PerRe(ms) => {
                ChannelRealization::PerRe(ms.iter().map(|m| perturb_csi(m, error_scale, rng)).collect())
            }
        }
    }
}

/// One CN(0,1) sample: real and imaginary parts each N(0, 1/2).
pub fn complex_gaussian(rng: &mut impl Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// `r = H·x + w` with `w ~ CN(0, σ²I)`. Noise is always drawn so the stream
/// position does not depend on σ²; σ² = 0 still returns `H·x` exactly.
pub fn receive(h: &CMatrix, x: &[C64], noise_var: f64, rng: &mut impl Rng) -> Result<CVector> {
    if h.cols() != x.len() {
        return Err(Error::Dimension(format!("H has {} columns, x has {} entries", h.cols(), x.len())));
    }
    let sd = noise_var.sqrt();
    let mut r = h.mul_vec(x);
    for v in &mut r {
        let w = complex_gaussian(rng);
        if sd > 0.0 {
            *v += w * sd;
        }
    }
    Ok(r)
}

/// `Ĥ = H + e·Ω`, Ω i.i.d. CN(0,1).
pub fn perturb_csi(h: &CMatrix, error_scale: f64, rng: &mut impl Rng) -> CMatrix {
    let mut out = h.clone();
    for v in out.as_mut_slice() {
        *v += complex_gaussian(rng) * error_scale;
    }
    out
}

/// `σ² = (1/b) / 10^(EbN0/10)` for `b` bits per unit-energy codeword.
pub fn noise_variance_from_ebn0(bits_per_symbol: f64, ebn0_db: f64) -> f64 {
    (1.0 / bits_per_symbol) / 10f64.powf(ebn0_db / 10.0)
}
