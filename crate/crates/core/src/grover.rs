//! The modified Grover iteration.
//!
//! One application of `G` is `H O_p H O_s`: mark index block `p`, then
//! reflect about the uniform superposition (with the literal global `-1` of
//! `O_p`). Because `O_s` marks the whole block, amplitude also leaks onto
//! `|p, x>` for `x` other than the wanted data value, so a scan reports both
//! the exact-target probability and the probability of index `p` overall.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::oracles::{oracle_p, oracle_s};
use crate::statevec::{MeasurementOutcome, RegisterShape, StateVector, Subregister};
use crate::{Error, Result};

/// Improvement needed for a later iteration count to replace the current peak.
const PEAK_TIE_TOLERANCE: f64 = 1e-12;

/// Applies `G = H^{⊗(n+m)} O_p H^{⊗(n+m)} O_s` in place.
pub fn g_operator(state: &mut StateVector, p: usize) -> Result<()> {
    oracle_s(state, p)?;
    state.hadamard_all();
    oracle_p(state);
    state.hadamard_all();
    Ok(())
}

/// `ceil((pi/4) sqrt(2^q))` for a `q`-qubit register.
pub fn max_iterations_for_qubits(total_qubits: u32) -> usize {
    let dim = 2f64.powi(total_qubits as i32);
    (std::f64::consts::FRAC_PI_4 * dim.sqrt()).ceil() as usize
}

/// Upper bound on Grover iterations for `shape`.
pub fn max_iterations(shape: RegisterShape) -> usize {
    max_iterations_for_qubits(shape.total_qubits())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub r: usize,
    /// Probability of the exact basis state `(p, target_data)`.
    pub p_target: f64,
    /// Probability of index `p` summed over every data value.
    pub p_index: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroverScan {
    /// One point per iteration count `r = 0..=r_max`.
    pub per_iteration: Vec<ScanPoint>,
    /// Smallest `r` maximizing `p_target`.
    pub r_star: usize,
    pub r_max: usize,
}

impl GroverScan {
    pub fn at(&self, r: usize) -> Option<&ScanPoint> {
        self.per_iteration.get(r)
    }

    pub fn peak(&self) -> &ScanPoint {
        &self.per_iteration[self.r_star]
    }

    /// Smallest `r` maximizing `p_index`.
    pub fn r_star_index(&self) -> usize {
        argmax(self.per_iteration.iter().map(|pt| pt.p_index))
    }
}

fn argmax(values: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (r, v) in values.enumerate() {
        if v > best.1 + PEAK_TIE_TOLERANCE {
            best = (r, v);
        }
    }
    best.0
}

fn check_target(shape: RegisterShape, p: usize, target_data: u64) -> Result<()> {
    shape.check_index(p)?;
    shape.check_data(target_data)
}

/// Applies `G` up to [`max_iterations`] times, recording the target and
/// index probabilities before the first application and after each one.
pub fn grover_scan(state: &StateVector, p: usize, target_data: u64) -> Result<GroverScan> {
    let shape = state.shape();
    check_target(shape, p, target_data)?;
    let r_max = max_iterations(shape);
    let d = shape.data_dim();
    let mut current = state.clone();
    let mut per_iteration = Vec::with_capacity(r_max + 1);
    for r in 0..=r_max {
        if r > 0 {
            g_operator(&mut current, p)?;
        }
        let block = &current.amplitudes()[p * d..(p + 1) * d];
        per_iteration.push(ScanPoint {
            r,
            p_target: block[target_data as usize].norm_sqr(),
            p_index: block.iter().map(|a| a.norm_sqr()).sum(),
        });
    }
    let r_star = argmax(per_iteration.iter().map(|pt| pt.p_target));
    Ok(GroverScan {
        per_iteration,
        r_star,
        r_max,
    })
}

/// How many times to apply `G` before reading out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Iterations {
    /// Use `r_star` from a [`grover_scan`] of the same state.
    #[default]
    Auto,
    Fixed(usize),
}

impl fmt::Display for Iterations {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Iterations::Auto => f.write_str("auto"),
            Iterations::Fixed(r) => write!(f, "{r}"),
        }
    }
}

impl FromStr for Iterations {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Iterations::Auto);
        }
        s.parse()
            .map(Iterations::Fixed)
            .map_err(|_| format!("expected `auto` or an iteration count, got `{s}`"))
    }
}

/// Final full-register readout of a retrieval.
#[derive(Debug, Clone, PartialEq)]
pub struct Retrieval {
    pub iterations: usize,
    pub scan: GroverScan,
    pub index: usize,
    pub data: u64,
    pub success: bool,
    pub outcome: MeasurementOutcome,
}

/// How the final readout is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Readout {
    /// Born-rule sampling from the given seed.
    Sampled(u64),
    /// Collapse onto a chosen `(index, data)` pair, which must be reachable.
    Forced { index: usize, data: u64 },
}

fn amplify(
    state: &StateVector,
    p: usize,
    target_data: u64,
    iterations: Iterations,
) -> Result<(StateVector, usize, GroverScan)> {
    let scan = grover_scan(state, p, target_data)?;
    let r = match iterations {
        Iterations::Auto => scan.r_star,
        Iterations::Fixed(r) if r > scan.r_max => {
            return Err(Error::IterationBound {
                requested: r,
                bound: scan.r_max,
            })
        }
        Iterations::Fixed(r) => r,
    };
    let mut amplified = state.clone();
    for _ in 0..r {
        g_operator(&mut amplified, p)?;
    }
    Ok((amplified, r, scan))
}

/// Runs `r` Grover iterations, then measures the whole register.
pub fn grover_retrieve(
    state: &StateVector,
    p: usize,
    target_data: u64,
    iterations: Iterations,
    readout: Readout,
) -> Result<Retrieval> {
    let (amplified, r, scan) = amplify(state, p, target_data, iterations)?;
    let shape = amplified.shape();
    let outcome = match readout {
        Readout::Sampled(seed) => amplified.measure_seeded(Subregister::All, seed)?,
        Readout::Forced { index, data } => {
            shape.check_index(index)?;
            shape.check_data(data)?;
            amplified.collapse(Subregister::All, shape.basis_index(index, data))?
        }
    };
    let (index, data) = outcome.index_and_data();
    Ok(Retrieval {
        iterations: r,
        scan,
        index,
        data,
        success: index == p && data == target_data,
        outcome,
    })
}
