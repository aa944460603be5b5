//! Codebooks, factor graphs and the JSON codebook file format.
//!
//! A codebook for UE `j` is a `K × M` complex matrix whose columns are the
//! codewords. Sparse (SCMA) codebooks are nonzero on `d_v` rows only; the
//! union of those rows over all UEs is the factor graph.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violation};
use crate::numerics::{CMatrix, C64};

/// Allowed deviation of the average codeword energy from 1.
pub const ENERGY_TOL: f64 = 1e-9;
/// Allowed spread of entry moduli inside one spreading codeword.
pub const UNIMODULAR_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Sparse codebooks on a regular factor graph.
    Scma,
    /// Dense codebooks, every UE on every resource.
    Dcma,
    /// Dense: one scalar symbol times a unit-modulus spreading sequence.
    Spreading,
}

impl Scheme {
    pub fn is_sparse(self) -> bool {
        matches!(self, Scheme::Scma)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Scma => "scma",
            Scheme::Dcma => "dcma",
            Scheme::Spreading => "spreading",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "scma" => Ok(Scheme::Scma),
            "dcma" => Ok(Scheme::Dcma),
            "spreading" | "spreading-dcma" => Ok(Scheme::Spreading),
            other => Err(Error::Config(format!("unknown scheme '{other}'"))),
        }
    }
}

/// `K × J` binary incidence of UEs on resource elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorGraph {
    resources: usize,
    ues: usize,
    incidence: Vec<bool>,
}

impl FactorGraph {
    pub fn from_rows(rows: &[&[u8]]) -> Result<Self> {
        let resources = rows.len();
        let ues = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != ues) {
            return Err(Error::Dimension("ragged factor graph rows".into()));
        }
        let incidence = rows.iter().flat_map(|r| r.iter().map(|&b| b != 0)).collect();
        Ok(FactorGraph {
            resources,
            ues,
            incidence,
        })
    }

    /// Every UE on every resource.
    pub fn dense(resources: usize, ues: usize) -> Self {
        FactorGraph {
            resources,
            ues,
            incidence: vec![true; resources * ues],
        }
    }

    fn from_columns(resources: usize, columns: &[Vec<usize>]) -> Self {
        let ues = columns.len();
        let mut incidence = vec![false; resources * ues];
        for (j, col) in columns.iter().enumerate() {
            for &k in col {
                incidence[k * ues + j] = true;
            }
        }
        FactorGraph {
            resources,
            ues,
            incidence,
        }
    }

    pub fn resources(&self) -> usize {
        self.resources
    }

    pub fn ues(&self) -> usize {
        self.ues
    }

    pub fn is_active(&self, k: usize, j: usize) -> bool {
        self.incidence[k * self.ues + j]
    }

    /// Resources UE `j` transmits on, ascending.
    pub fn active_resources(&self, j: usize) -> Vec<usize> {
        (0..self.resources).filter(|&k| self.is_active(k, j)).collect()
    }

    /// UEs overlapping on resource `k` (the set ζ_k), ascending.
    pub fn users_on(&self, k: usize) -> Vec<usize> {
        (0..self.ues).filter(|&j| self.is_active(k, j)).collect()
    }

    pub fn column_weights(&self) -> Vec<usize> {
        (0..self.ues).map(|j| self.active_resources(j).len()).collect()
    }

    pub fn row_weights(&self) -> Vec<usize> {
        (0..self.resources).map(|k| self.users_on(k).len()).collect()
    }

    /// Common column weight, if all columns agree.
    pub fn dv(&self) -> Option<usize> {
        uniform(&self.column_weights())
    }

    /// Common row weight, if all rows agree.
    pub fn df(&self) -> Option<usize> {
        uniform(&self.row_weights())
    }

    pub fn is_dense(&self) -> bool {
        self.incidence.iter().all(|&b| b)
    }
}

fn uniform(w: &[usize]) -> Option<usize> {
    let first = *w.first()?;
    w.iter().all(|&x| x == first).then_some(first)
}

impl fmt::Display for FactorGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for k in 0..self.resources {
            let row: Vec<&str> = (0..self.ues)
                .map(|j| if self.is_active(k, j) { "1" } else { "0" })
                .collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

/// The 4×6 graph of the 150 % overloaded SCMA example (d_v = 2, d_f = 3).
pub fn factor_graph_4x6() -> FactorGraph {
    FactorGraph::from_rows(&[
        &[1, 0, 1, 0, 1, 0],
        &[0, 1, 1, 0, 0, 1],
        &[1, 0, 0, 1, 0, 1],
        &[0, 1, 0, 1, 1, 0],
    ])
    .expect("static graph is rectangular")
}

/// Overloading factor `J / K` in percent.
pub fn overloading_factor(ues: usize, resources: usize) -> f64 {
    assert!(ues >= 1 && resources >= 1, "overloading_factor needs J, K >= 1");
    100.0 * ues as f64 / resources as f64
}

/// Per-UE box used by the relaxed detector: `|Re| ≤ alpha`, `|Im| ≤ beta`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoxBounds {
    pub alpha: f64,
    pub beta: f64,
}

/// One UE's codebook: `K × M`, columns are codewords.
#[derive(Clone, Debug, PartialEq)]
pub struct Codebook {
    ue: usize,
    entries: CMatrix,
    active: Vec<usize>,
}

impl Codebook {
    /// Builds a codebook from full-length codewords. Active resources are
    /// the rows that are nonzero in at least one codeword.
    pub fn from_codewords(ue: usize, codewords: &[Vec<C64>]) -> Result<Self> {
        let m = codewords.len();
        let k = codewords.first().map_or(0, Vec::len);
        if m == 0 || k == 0 {
            return Err(Error::Schema(format!("UE {ue}: empty codebook")));
        }
        if codewords.iter().any(|c| c.len() != k) {
            return Err(Error::Schema(format!("UE {ue}: codewords of unequal length")));
        }
        let entries = CMatrix::from_fn(k, m, |r, c| codewords[c][r]);
        let active = (0..k)
            .filter(|&r| entries.row(r).iter().any(|z| *z != C64::new(0.0, 0.0)))
            .collect();
        Ok(Codebook { ue, entries, active })
    }

    pub fn ue(&self) -> usize {
        self.ue
    }

    /// Number of codewords M.
    pub fn order(&self) -> usize {
        self.entries.cols()
    }

    /// Codeword length K.
    pub fn resources(&self) -> usize {
        self.entries.rows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn active_resources(&self) -> &[usize] {
        &self.active
    }

    pub fn entry(&self, k: usize, m: usize) -> C64 {
        self.entries[(k, m)]
    }

    /// Full K-length codeword `m`.
    pub fn codeword(&self, m: usize) -> Vec<C64> {
        (0..self.resources()).map(|k| self.entries[(k, m)]).collect()
    }

    /// Codeword `m` restricted to the active resources.
    pub fn compact_codeword(&self, m: usize) -> Vec<C64> {
        self.active.iter().map(|&k| self.entries[(k, m)]).collect()
    }

    /// Mean over codewords of the squared norm.
    pub fn average_energy(&self) -> f64 {
        let total: f64 = self.entries.as_slice().iter().map(|z| z.norm_sqr()).sum();
        total / self.order() as f64
    }

    /// Exact maxima of |Re| and |Im| over all entries. A zero extent on one
    /// axis is replaced by the other axis so the box never degenerates.
    pub fn box_bounds(&self) -> BoxBounds {
        let (mut alpha, mut beta) = (0.0f64, 0.0f64);
        for z in self.entries.as_slice() {
            alpha = alpha.max(z.re.abs());
            beta = beta.max(z.im.abs());
        }
        if beta == 0.0 {
            beta = alpha;
        }
        if alpha == 0.0 {
            alpha = beta;
        }
        BoxBounds { alpha, beta }
    }

    /// Index of the codeword nearest to `estimate` (length `|active|`),
    /// lowest index on ties.
    pub fn nearest_compact(&self, estimate: &[C64]) -> usize {
        debug_assert_eq!(estimate.len(), self.active.len());
        self.nearest_by(|m| {
            self.active
                .iter()
                .zip(estimate)
                .map(|(&k, e)| (e - self.entries[(k, m)]).norm_sqr())
                .sum()
        })
    }

    /// Same as [`nearest_compact`](Self::nearest_compact) for a full
    /// K-length estimate.
    pub fn nearest_full(&self, estimate: &[C64]) -> usize {
        debug_assert_eq!(estimate.len(), self.resources());
        self.nearest_by(|m| {
            estimate
                .iter()
                .enumerate()
                .map(|(k, e)| (e - self.entries[(k, m)]).norm_sqr())
                .sum()
        })
    }

    fn nearest_by(&self, dist: impl Fn(usize) -> f64) -> usize {
        let mut best = (0, f64::INFINITY);
        for m in 0..self.order() {
            let d = dist(m);
            if d < best.1 {
                best = (m, d);
            }
        }
        best.0
    }
}

/// A validated family of codebooks plus the factor graph they induce.
#[derive(Clone, Debug, PartialEq)]
pub struct CodebookSet {
    scheme: Scheme,
    codebooks: Vec<Codebook>,
    graph: FactorGraph,
}

impl CodebookSet {
    /// Checks every invariant and infers the factor graph.
    pub fn new(scheme: Scheme, codebooks: Vec<Codebook>) -> Result<Self> {
        let violations = check_codebooks(scheme, None, &codebooks);
        if !violations.is_empty() {
            return Err(Error::Invariant(violations));
        }
        let graph = infer_graph(&codebooks);
        Ok(CodebookSet {
            scheme,
            codebooks,
            graph,
        })
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn codebooks(&self) -> &[Codebook] {
        &self.codebooks
    }

    pub fn get(&self, ue: usize) -> &Codebook {
        &self.codebooks[ue]
    }

    pub fn graph(&self) -> &FactorGraph {
        &self.graph
    }

    pub fn ues(&self) -> usize {
        self.codebooks.len()
    }

    pub fn resources(&self) -> usize {
        self.graph.resources()
    }

    pub fn order(&self) -> usize {
        self.codebooks[0].order()
    }

    /// Nonzero entries per codeword: d_v for SCMA, K otherwise.
    pub fn nonzeros_per_codeword(&self) -> usize {
        self.graph.dv().expect("validated sets are column-regular")
    }

    pub fn box_bounds(&self) -> Vec<BoxBounds> {
        self.codebooks.iter().map(Codebook::box_bounds).collect()
    }

    pub fn to_json(&self) -> String {
        let file = CodebookFile {
            scheme: self.scheme,
            j: self.ues(),
            k: self.resources(),
            m: self.order(),
            dv: self.nonzeros_per_codeword(),
            codebooks: self
                .codebooks
                .iter()
                .map(|cb| UeEntry {
                    ue: cb.ue,
                    codewords: (0..cb.order())
                        .map(|m| cb.codeword(m).iter().map(|z| [z.re, z.im]).collect())
                        .collect(),
                })
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("codebook serialization");
        s.push('\n');
        s
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

fn infer_graph(codebooks: &[Codebook]) -> FactorGraph {
    let resources = codebooks.first().map_or(0, Codebook::resources);
    let columns: Vec<Vec<usize>> = codebooks.iter().map(|cb| cb.active.clone()).collect();
    FactorGraph::from_columns(resources, &columns)
}

fn check_codebooks(scheme: Scheme, declared_dv: Option<usize>, codebooks: &[Codebook]) -> Vec<Violation> {
    let mut out = Vec::new();
    macro_rules! push {
        ($ue:expr, $rule:expr, $detail:expr $(,)?) => {
            out.push(Violation {
                ue: $ue,
                rule: $rule,
                detail: $detail,
            })
        };
    }
    let Some(first) = codebooks.first() else {
        push!(None, "count", "no codebooks".into());
        return out;
    };
    let (k, m) = (first.resources(), first.order());
    if !m.is_power_of_two() || m < 2 {
        push!(None, "order", format!("M = {m} is not a power of two >= 2"));
    }
    for (pos, cb) in codebooks.iter().enumerate() {
        let ue = Some(cb.ue);
        if cb.ue != pos {
            push!(ue, "ue-index", format!("listed at position {pos}"));
        }
        if cb.resources() != k || cb.order() != m {
            push!(
                ue,
                "shape",
                format!("{}x{}, expected {k}x{m}", cb.resources(), cb.order()),
            );
            continue;
        }
        if !cb.entries.is_finite() {
            push!(ue, "finite", "non-finite entry".into());
            continue;
        }
        let energy = cb.average_energy();
        if (energy - 1.0).abs() > ENERGY_TOL {
            push!(ue, "energy", format!("average codeword energy {energy:.12} != 1"));
        }
        let active = cb.active.len();
        match scheme {
            Scheme::Scma => {
                if let Some(dv) = declared_dv {
                    if active != dv {
                        push!(ue, "sparsity", format!("{active} active resources, dv = {dv}"));
                    }
                }
                if active == k {
                    push!(ue, "sparsity", "codebook is dense".into());
                }
            }
            Scheme::Dcma | Scheme::Spreading => {
                if active != k {
                    push!(ue, "density", format!("only {active} of {k} resources active"));
                }
            }
        }
        if scheme == Scheme::Spreading {
            for col in 0..m {
                let mods: Vec<f64> = (0..k).map(|r| cb.entries[(r, col)].norm()).collect();
                let (lo, hi) = mods
                    .iter()
                    .fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
                if hi - lo > UNIMODULAR_TOL {
                    push!(ue, "unimodular", format!("codeword {col}: modulus spread {:e}", hi - lo));
                }
            }
        }
    }
    if out.is_empty() {
        let graph = infer_graph(codebooks);
        if graph.dv().is_none() {
            push!(None, "regularity", format!("column weights {:?}", graph.column_weights()));
        }
        if scheme == Scheme::Scma && graph.df().is_none() {
            push!(None, "regularity", format!("row weights {:?}", graph.row_weights()));
        }
    }
    out
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CodebookFile {
    scheme: Scheme,
    #[serde(rename = "J")]
    j: usize,
    #[serde(rename = "K")]
    k: usize,
    #[serde(rename = "M")]
    m: usize,
    dv: usize,
    codebooks: Vec<UeEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct UeEntry {
    ue: usize,
    codewords: Vec<Vec<[f64; 2]>>,
}

/// Outcome of checking a codebook document without failing fast.
#[derive(Debug)]
pub struct ValidationReport {
    pub set: Option<CodebookSet>,
    pub violations: Vec<Violation>,
}

/// Parses and validates, collecting every violated rule.
pub fn validate_codebook_json(text: &str) -> Result<ValidationReport> {
    let file: CodebookFile =
        serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    let mut violations = Vec::new();
    if file.codebooks.len() != file.j {
        violations.push(Violation {
            ue: None,
            rule: "count",
            detail: format!("{} codebooks, J = {}", file.codebooks.len(), file.j),
        });
    }
    let mut codebooks = Vec::with_capacity(file.codebooks.len());
    for entry in &file.codebooks {
        if entry.codewords.len() != file.m {
            violations.push(Violation {
                ue: Some(entry.ue),
                rule: "shape",
                detail: format!("{} codewords, M = {}", entry.codewords.len(), file.m),
            });
        }
        if entry.codewords.iter().any(|c| c.len() != file.k) {
            violations.push(Violation {
                ue: Some(entry.ue),
                rule: "shape",
                detail: format!("codeword length differs from K = {}", file.k),
            });
        }
        let cws: Vec<Vec<C64>> = entry
            .codewords
            .iter()
            .map(|c| c.iter().map(|p| C64::new(p[0], p[1])).collect())
            .collect();
        match Codebook::from_codewords(entry.ue, &cws) {
            Ok(cb) => codebooks.push(cb),
            Err(e) => violations.push(Violation {
                ue: Some(entry.ue),
                rule: "shape",
                detail: e.to_string(),
            }),
        }
    }
    if !violations.is_empty() {
        return Ok(ValidationReport { set: None, violations });
    }
    violations = check_codebooks(file.scheme, Some(file.dv), &codebooks);
    if file.scheme != Scheme::Scma && file.dv != file.k {
        violations.push(Violation {
            ue: None,
            rule: "sparsity",
            detail: format!("dense scheme declares dv = {} but K = {}", file.dv, file.k),
        });
    }
    if !violations.is_empty() {
        return Ok(ValidationReport { set: None, violations });
    }
    let graph = infer_graph(&codebooks);
    Ok(ValidationReport {
        set: Some(CodebookSet {
            scheme: file.scheme,
            codebooks,
            graph,
        }),
        violations,
    })
}

pub fn parse_codebooks(text: &str) -> Result<CodebookSet> {
    let report = validate_codebook_json(text)?;
    match report.set {
        Some(set) => Ok(set),
        None => Err(Error::Invariant(report.violations)),
    }
}

pub fn load_codebooks(path: impl AsRef<Path>) -> Result<CodebookSet> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| {
        if source.kind() == std::io::ErrorKind::NotFound {
            Error::CodebookNotFound(path.to_path_buf())
        } else {
            Error::Io {
                path: path.to_path_buf(),
                source,
            }
        }
    })?;
    parse_codebooks(&text)
}

/// Gray-labelled square (or rectangular) QAM with unit average energy.
/// The high label bits select the in-phase level, the low bits the
/// quadrature level; M = 2 degenerates to BPSK.
pub fn gray_qam(order: usize) -> Vec<C64> {
    assert!(order.is_power_of_two() && order >= 2, "QAM order must be a power of two >= 2");
    let bits = order.trailing_zeros() as usize;
    let (bi, bq) = (bits.div_ceil(2), bits / 2);
    let pam = |label: usize, nbits: usize| -> f64 {
        if nbits == 0 {
            return 0.0;
        }
        let levels = 1usize << nbits;
        let idx = gray_decode(label);
        2.0 * idx as f64 - (levels as f64 - 1.0)
    };
    let pts: Vec<C64> = (0..order)
        .map(|m| C64::new(pam(m >> bq, bi), pam(m & ((1 << bq) - 1), bq)))
        .collect();
    let energy = pts.iter().map(|z| z.norm_sqr()).sum::<f64>() / order as f64;
    pts.into_iter().map(|z| z / energy.sqrt()).collect()
}

fn gray_decode(mut g: usize) -> usize {
    let mut b = g;
    while g > 0 {
        g >>= 1;
        b ^= g;
    }
    b
}

// Quarter-turn powers keep rotated QAM points on the same grid, so every
// codeword entry stays a vertex/grid point of its UE's box.
fn quarter_turn(n: usize) -> C64 {
    match n % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

fn combinations(n: usize, r: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, r, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, r, &mut Vec::new(), &mut out);
    out
}

/// Regular SCMA factor graph with `J = C(K, d_v)` (every d_v-subset of the
/// resources used once). `(K, J, d_v) = (4, 6, 2)` returns
/// [`factor_graph_4x6`].
pub fn regular_scma_graph(resources: usize, ues: usize, dv: usize) -> Result<FactorGraph> {
    if (resources, ues, dv) == (4, 6, 2) {
        return Ok(factor_graph_4x6());
    }
    if dv == 0 || dv >= resources {
        return Err(Error::Unsupported(format!("d_v = {dv} with K = {resources}")));
    }
    let cols = combinations(resources, dv);
    if cols.len() != ues {
        return Err(Error::Unsupported(format!(
            "no regular SCMA graph for J = {ues}, K = {resources}, d_v = {dv} (need J = C(K, d_v) = {})",
            cols.len()
        )));
    }
    Ok(FactorGraph::from_columns(resources, &cols))
}

/// Deterministic reference codebooks.
///
/// Each UE maps codeword `m` on its `d`-th active resource to the Gray QAM
/// point with label `m·(2d+1) mod M`, rotated by a UE- and
/// dimension-dependent quarter turn and scaled by `1/√N_e`. Spreading
/// codebooks use one QAM symbol times a quadriphase sequence.
pub fn generate_reference_codebooks(
    ues: usize,
    resources: usize,
    order: usize,
    scheme: Scheme,
    dv: Option<usize>,
) -> Result<CodebookSet> {
    if ues == 0 || resources == 0 {
        return Err(Error::Unsupported("J and K must be positive".into()));
    }
    if !order.is_power_of_two() || order < 2 {
        return Err(Error::Unsupported(format!("M = {order} is not a power of two >= 2")));
    }
    let base = gray_qam(order);
    let graph = match scheme {
        Scheme::Scma => regular_scma_graph(resources, ues, dv.unwrap_or(2))?,
        Scheme::Dcma | Scheme::Spreading => {
            if let Some(dv) = dv.filter(|&d| d != resources) {
                return Err(Error::Unsupported(format!("dense scheme with d_v = {dv} != K")));
            }
            FactorGraph::dense(resources, ues)
        }
    };
    let mut codebooks = Vec::with_capacity(ues);
    for j in 0..ues {
        let active = graph.active_resources(j);
        let ne = active.len() as f64;
        let mut cws = vec![vec![C64::new(0.0, 0.0); resources]; order];
        for (m, cw) in cws.iter_mut().enumerate() {
            match scheme {
                Scheme::Scma | Scheme::Dcma => {
                    for (d, &k) in active.iter().enumerate() {
                        let label = (m * (2 * d + 1)) % order;
                        cw[k] = base[label] * quarter_turn(j + d * (j + 1)) / ne.sqrt();
                    }
                }
                Scheme::Spreading => {
                    for (k, slot) in cw.iter_mut().enumerate() {
                        let phase = j * k + (j / 4) * k * k;
                        *slot = base[m] * quarter_turn(phase) / ne.sqrt();
                    }
                }
            }
        }
        codebooks.push(Codebook::from_codewords(j, &cws)?);
    }
    // BPSK points can vanish on a dimension only if the constellation has a
    // zero point, which Gray QAM never does, so the graph is preserved.
    let set = CodebookSet::new(scheme, codebooks)?;
    debug_assert_eq!(set.graph, graph);
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph_4x6_weights() {
        let g = factor_graph_4x6();
        assert!(g.column_weights().iter().all(|&w| w == 2));
        assert!(g.row_weights().iter().all(|&w| w == 3));
        assert_eq!(g.dv(), Some(2));
        assert_eq!(g.df(), Some(3));
        // UE 1 on REs {1,3}; RE 1 carries UEs {1,3,5} (1-based).
        assert_eq!(g.active_resources(0), vec![0, 2]);
        assert_eq!(g.users_on(0), vec![0, 2, 4]);
    }

    #[test]
    fn overloading() {
        assert_eq!(overloading_factor(6, 4), 150.0);
        assert_eq!(overloading_factor(10, 5), 200.0);
        assert_eq!(overloading_factor(4, 4), 100.0);
    }

    #[test]
    fn qam_is_gray_and_unit_energy() {
        for m in [2, 4, 8, 16, 64] {
            let pts = gray_qam(m);
            let e: f64 = pts.iter().map(|z| z.norm_sqr()).sum::<f64>() / m as f64;
            assert!((e - 1.0).abs() < 1e-12);
        }
        // Neighbouring in-phase levels of 16-QAM differ in one label bit.
        let pts = gray_qam(16);
        let mut by_level: Vec<(f64, usize)> = (0..16).filter(|m| m & 3 == 0).map(|m| (pts[m].re, m)).collect();
        by_level.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        for w in by_level.windows(2) {
            assert_eq!((w[0].1 ^ w[1].1).count_ones(), 1);
        }
        assert!(gray_qam(2).iter().all(|z| z.im == 0.0));
    }

    #[test]
    fn generated_scma_is_sparse_and_normalized() {
        let set = generate_reference_codebooks(6, 4, 4, Scheme::Scma, None).unwrap();
        assert_eq!(set.graph(), &factor_graph_4x6());
        for cb in set.codebooks() {
            assert_eq!(cb.active_resources().len(), 2);
            assert!((cb.average_energy() - 1.0).abs() < ENERGY_TOL);
            let g = factor_graph_4x6();
            assert_eq!(cb.active_resources(), g.active_resources(cb.ue()).as_slice());
        }
    }

    #[test]
    fn generated_dense_schemes() {
        let set = generate_reference_codebooks(6, 4, 4, Scheme::Dcma, None).unwrap();
        assert!(set.graph().is_dense());
        assert!(set.codebooks().iter().all(|cb| cb.active_resources().len() == 4));
        let set = generate_reference_codebooks(6, 4, 4, Scheme::Spreading, None).unwrap();
        for cb in set.codebooks() {
            for m in 0..4 {
                let mods: Vec<f64> = cb.codeword(m).iter().map(|z| z.norm()).collect();
                assert!(mods.iter().all(|v| (v - mods[0]).abs() < 1e-12));
            }
        }
        let set = generate_reference_codebooks(10, 5, 4, Scheme::Scma, None).unwrap();
        assert_eq!(set.graph().df(), Some(4));
    }

    #[test]
    fn generator_rejects_bad_parameters() {
        assert!(matches!(
            generate_reference_codebooks(7, 4, 4, Scheme::Scma, None),
            Err(Error::Unsupported(_))
        ));
        assert!(generate_reference_codebooks(6, 4, 6, Scheme::Dcma, None).is_err());
    }

    #[test]
    fn box_bounds_cases() {
        let s = 1.0 / 2f64.sqrt();
        let cb = Codebook::from_codewords(
            0,
            &[vec![C64::new(s, s)], vec![C64::new(-s, s)], vec![C64::new(s, -s)], vec![C64::new(-s, -s)]],
        )
        .unwrap();
        assert_eq!(cb.box_bounds(), BoxBounds { alpha: s, beta: s });

        let real = Codebook::from_codewords(0, &[vec![C64::new(1.0, 0.0)], vec![C64::new(-1.0, 0.0)]]).unwrap();
        assert_eq!(real.box_bounds(), BoxBounds { alpha: 1.0, beta: 1.0 });
    }

    #[test]
    fn nearest_ties_pick_lowest_index() {
        let cb = Codebook::from_codewords(0, &[vec![C64::new(1.0, 0.0)], vec![C64::new(-1.0, 0.0)]]).unwrap();
        assert_eq!(cb.nearest_full(&[C64::new(0.0, 0.0)]), 0);
        assert_eq!(cb.nearest_full(&[C64::new(-0.1, 0.0)]), 1);
    }

    #[test]
    fn energy_violation_is_reported() {
        let set = generate_reference_codebooks(6, 4, 4, Scheme::Scma, None).unwrap();
        let mut v: serde_json::Value = serde_json::from_str(&set.to_json()).unwrap();
        v["codebooks"][2]["codewords"][1][0][0] = serde_json::json!(3.0);
        let err = parse_codebooks(&v.to_string()).unwrap_err();
        match err {
            Error::Invariant(vs) => {
                assert!(vs.iter().any(|x| x.rule == "energy" && x.ue == Some(2)), "{vs:?}")
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn unknown_fields_are_schema_errors() {
        let err = parse_codebooks(r#"{"scheme":"scma","J":1,"K":1,"M":2,"dv":1,"codebooks":[],"x":1}"#)
            .unwrap_err();
        assert!(matches!(err, Error::Schema(_)));
    }
}
