//! Dense state vector over an index register of `n` qubits and a data
//! register of `m` qubits.
//!
//! Basis states are numbered `b = i * 2^m + x` where `i` is the index value
//! and `x` the data value, so each index value owns one contiguous block of
//! `2^m` amplitudes.

use num_complex::Complex64;
use rand::Rng;

use crate::seed::rng_from_seed;
use crate::{Error, Result};

/// Largest register the simulator will allocate (2^26 amplitudes, 1 GiB).
pub const MAX_QUBITS: u32 = 26;

/// Allowed drift of the squared norm away from one.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Outcomes below this probability are never sampled.
pub const UNREACHABLE_PROBABILITY: f64 = 1e-12;

/// States whose norm falls below this cannot be measured.
const DEGENERATE_NORM: f64 = 1e-6;

/// Qubit counts for an `N`-item register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub struct RegisterShape {
    index_qubits: u32,
    data_qubits: u32,
    items: usize,
}

impl RegisterShape {
    /// Shape for `items` database entries of `data_qubits` bits each.
    /// The index register gets `ceil(log2 items)` qubits.
    pub fn new(items: usize, data_qubits: u32) -> Result<Self> {
        if items == 0 {
            return Err(Error::EmptyDatabase);
        }
        if data_qubits == 0 {
            return Err(Error::NoDataQubits);
        }
        let index_qubits = usize::BITS - (items - 1).leading_zeros();
        let total = index_qubits + data_qubits;
        if total > MAX_QUBITS {
            return Err(Error::TooManyQubits(total));
        }
        Ok(Self {
            index_qubits,
            data_qubits,
            items,
        })
    }

    pub fn index_qubits(&self) -> u32 {
        self.index_qubits
    }

    pub fn data_qubits(&self) -> u32 {
        self.data_qubits
    }

    pub fn items(&self) -> usize {
        self.items
    }

    pub fn total_qubits(&self) -> u32 {
        self.index_qubits + self.data_qubits
    }

    /// `2^n`, the number of representable index values.
    pub fn index_dim(&self) -> usize {
        1 << self.index_qubits
    }

    /// `2^m`, the number of representable data values.
    pub fn data_dim(&self) -> usize {
        1 << self.data_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.total_qubits()
    }

    pub fn basis_index(&self, index: usize, data: u64) -> usize {
        index * self.data_dim() + data as usize
    }

    /// Splits a basis number into `(index, data)`.
    pub fn split(&self, basis: usize) -> (usize, u64) {
        (basis / self.data_dim(), (basis % self.data_dim()) as u64)
    }

    pub(crate) fn check_index(&self, index: usize) -> Result<()> {
        if index >= self.index_dim() {
            return Err(Error::OutOfRange {
                what: "index",
                value: index as u64,
                limit: self.index_dim() as u64,
            });
        }
        Ok(())
    }

    pub(crate) fn check_data(&self, data: u64) -> Result<()> {
        if data >= self.data_dim() as u64 {
            return Err(Error::ValueOutOfRange {
                value: data,
                bits: self.data_qubits,
            });
        }
        Ok(())
    }
}

/// Which part of the register a measurement reads out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subregister {
    /// The `n` index qubits; the observed value is an index `i`.
    Index,
    /// The whole register; the observed value is a basis number `b`.
    All,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementOutcome {
    pub which: Subregister,
    pub observed: usize,
    pub post_state: StateVector,
}

impl MeasurementOutcome {
    /// `(index, data)` for a full-register outcome. For an index outcome the
    /// data value is only meaningful if the post-state is a basis state.
    pub fn index_and_data(&self) -> (usize, u64) {
        match self.which {
            Subregister::All => self.post_state.shape.split(self.observed),
            Subregister::Index => {
                let shape = self.post_state.shape;
                let block = &self.post_state.amps
                    [shape.basis_index(self.observed, 0)..shape.basis_index(self.observed + 1, 0)];
                let data = block
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
                    .map(|(x, _)| x as u64)
                    .unwrap_or(0);
                (self.observed, data)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    shape: RegisterShape,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// The all-zeros basis state `|0>|0>`.
    pub fn zero(shape: RegisterShape) -> Self {
        let mut amps = vec![Complex64::default(); shape.dim()];
        amps[0] = Complex64::new(1.0, 0.0);
        Self { shape, amps }
    }

    pub fn basis(shape: RegisterShape, index: usize, data: u64) -> Result<Self> {
        shape.check_index(index)?;
        shape.check_data(data)?;
        let mut amps = vec![Complex64::default(); shape.dim()];
        amps[shape.basis_index(index, data)] = Complex64::new(1.0, 0.0);
        Ok(Self { shape, amps })
    }

    /// Wraps caller-supplied amplitudes, which must have unit norm.
    pub fn from_amplitudes(shape: RegisterShape, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != shape.dim() {
            return Err(Error::DimensionMismatch {
                expected: shape.dim(),
                actual: amps.len(),
            });
        }
        let norm_sqr: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized(norm_sqr));
        }
        Ok(Self { shape, amps })
    }

    /// `(1/sqrt N) sum_{i<N} |i>|0...0>`, written amplitude by amplitude so
    /// that `N` need not be a power of two.
    pub fn prepare_uniform_index(shape: RegisterShape) -> Self {
        let mut amps = vec![Complex64::default(); shape.dim()];
        let a = Complex64::new(1.0 / (shape.items() as f64).sqrt(), 0.0);
        for i in 0..shape.items() {
            amps[shape.basis_index(i, 0)] = a;
        }
        Self { shape, amps }
    }

    pub fn shape(&self) -> RegisterShape {
        self.shape
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn amplitude(&self, index: usize, data: u64) -> Result<Complex64> {
        self.shape.check_index(index)?;
        self.shape.check_data(data)?;
        Ok(self.amps[self.shape.basis_index(index, data)])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `|<i, x | psi>|^2`.
    pub fn probability_of(&self, index: usize, data: u64) -> Result<f64> {
        Ok(self.amplitude(index, data)?.norm_sqr())
    }

    /// Marginal distribution of the index register.
    pub fn index_probabilities(&self) -> Vec<f64> {
        self.amps
            .chunks_exact(self.shape.data_dim())
            .map(|block| block.iter().map(|a| a.norm_sqr()).sum())
            .collect()
    }

    fn outcome_probabilities(&self, which: Subregister) -> Vec<f64> {
        match which {
            Subregister::Index => self.index_probabilities(),
            Subregister::All => self.amps.iter().map(|a| a.norm_sqr()).collect(),
        }
    }

    /// In-place `H^{⊗(n+m)}` (fast Walsh-Hadamard transform, `1/sqrt 2` per stage).
    pub fn hadamard_all(&mut self) {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let len = self.amps.len();
        let mut half = 1;
        while half < len {
            for start in (0..len).step_by(2 * half) {
                for j in start..start + half {
                    let a = self.amps[j];
                    let b = self.amps[j + half];
                    self.amps[j] = (a + b) * s;
                    self.amps[j + half] = (a - b) * s;
                }
            }
            half *= 2;
        }
    }

    /// Projective measurement sampled by inverse CDF from `rng`.
    pub fn measure<R: Rng + ?Sized>(
        &self,
        which: Subregister,
        rng: &mut R,
    ) -> Result<MeasurementOutcome> {
        let probs = self.outcome_probabilities(which);
        let total: f64 = probs.iter().sum();
        if total.sqrt() < DEGENERATE_NORM {
            return Err(Error::DegenerateState(total.sqrt()));
        }
        let reachable = |p: f64| p >= UNREACHABLE_PROBABILITY;
        let mass: f64 = probs.iter().copied().filter(|&p| reachable(p)).sum();
        let u = rng.gen::<f64>() * mass;
        let mut cumulative = 0.0;
        let mut chosen = None;
        for (k, &p) in probs.iter().enumerate() {
            if !reachable(p) {
                continue;
            }
            cumulative += p;
            chosen = Some(k);
            if u < cumulative {
                break;
            }
        }
        // the last reachable outcome absorbs any rounding shortfall in `cumulative`
        let observed = chosen.ok_or(Error::DegenerateState(total.sqrt()))?;
        self.collapse(which, observed)
    }

    pub fn measure_seeded(&self, which: Subregister, seed: u64) -> Result<MeasurementOutcome> {
        self.measure(which, &mut rng_from_seed(seed))
    }

    /// Projects onto `observed` without sampling and renormalizes.
    pub fn collapse(&self, which: Subregister, observed: usize) -> Result<MeasurementOutcome> {
        let (range, limit) = match which {
            Subregister::Index => {
                let d = self.shape.data_dim();
                (observed * d..(observed + 1) * d, self.shape.index_dim())
            }
            Subregister::All => (observed..observed + 1, self.shape.dim()),
        };
        if observed >= limit {
            return Err(Error::OutOfRange {
                what: "outcome",
                value: observed as u64,
                limit: limit as u64,
            });
        }
        let prob: f64 = self.amps[range.clone()].iter().map(|a| a.norm_sqr()).sum();
        if prob < UNREACHABLE_PROBABILITY {
            return Err(Error::UnreachableOutcome(observed));
        }
        let scale = 1.0 / prob.sqrt();
        let mut amps = vec![Complex64::default(); self.amps.len()];
        for b in range {
            amps[b] = self.amps[b] * scale;
        }
        Ok(MeasurementOutcome {
            which,
            observed,
            post_state: StateVector {
                shape: self.shape,
                amps,
            },
        })
    }
}
