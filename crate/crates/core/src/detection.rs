//! Detector output and the hard-decision helpers shared by all detectors.

use crate::numerics::{norm1, C64};
use crate::sysmodel::System;

/// Hard decisions for one trial.
///
/// `symbols` follows the payload layout: one index per UE, or per
/// (UE, antenna) at `j·N_t + t` for SMX. `antennas` is filled for SM only.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Detection {
    pub symbols: Vec<usize>,
    pub antennas: Vec<usize>,
    /// Primal gap `‖z̄ − x̄‖` after each iteration (iterative detectors only;
    /// per-RE problems report the root-sum-square over REs).
    pub primal_gaps: Vec<f64>,
}

/// MED decisions from a stacked SIMO estimate of length `J·N_e`.
pub fn decide_simo(system: &System, estimate: &[C64]) -> Vec<usize> {
    let ne = system.entries_per_ue();
    (0..system.ues())
        .map(|j| system.codebooks().get(j).nearest_compact(&estimate[j * ne..(j + 1) * ne]))
        .collect()
}

/// Collects, for every UE and antenna, the per-RE estimates of the UE's
/// active REs. `per_re[k]` is the stacked estimate on RE `k`. Result index
/// is `[j][t][d]` with `d` running over UE `j`'s active REs.
pub fn regroup_per_re(system: &System, per_re: &[Vec<C64>]) -> Vec<Vec<Vec<C64>>> {
    let nt = system.tx_antennas();
    (0..system.ues())
        .map(|j| {
            (0..nt)
                .map(|t| {
                    system
                        .active_resources(j)
                        .iter()
                        .map(|&k| {
                            let pos = system
                                .users_on(k)
                                .iter()
                                .position(|&u| u == j)
                                .expect("active RE lists the UE");
                            per_re[k][pos * nt + t]
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// Per-antenna MED for spatial multiplexing.
pub fn decide_smx(system: &System, grouped: &[Vec<Vec<C64>>]) -> Vec<usize> {
    grouped
        .iter()
        .enumerate()
        .flat_map(|(j, per_antenna)| {
            let cb = system.codebooks().get(j);
            per_antenna.iter().map(move |est| cb.nearest_compact(est))
        })
        .collect()
}

/// Antenna with the largest L1 mass (lowest index on ties), then MED on it.
pub fn decide_sm(system: &System, grouped: &[Vec<Vec<C64>>]) -> (Vec<usize>, Vec<usize>) {
    let mut symbols = Vec::with_capacity(grouped.len());
    let mut antennas = Vec::with_capacity(grouped.len());
    for (j, per_antenna) in grouped.iter().enumerate() {
        let mut best = (0, f64::NEG_INFINITY);
        for (t, est) in per_antenna.iter().enumerate() {
            let mass = norm1(est);
            if mass > best.1 {
                best = (t, mass);
            }
        }
        antennas.push(best.0);
        symbols.push(system.codebooks().get(j).nearest_compact(&per_antenna[best.0]));
    }
    (symbols, antennas)
}
