//! Five-step query session between the server and one client.
//!
//! 1. The server embeds its keys: `(1/sqrt N) sum |i>|K_i>`.
//! 2. The client measures the index register, learning one pair `(lambda, K_lambda)`,
//!    and sends the offset `(lambda - p) mod N`.
//! 3. The server rotates its keys by the offset, encrypts every item with the
//!    rotated key, and embeds the ciphertexts into a second superposition.
//! 4. The client runs the Grover iteration marking index `p`.
//! 5. The client reads the register; on hitting `(p, D_p xor K_lambda)` it
//!    decrypts with `K_lambda`.
//!
//! Sessions are independent: several clients over one [`Database`] are just
//! several calls with different query indices and seeds.

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelConfig, ChannelReport};
use crate::grover::{grover_retrieve, GroverScan, Iterations, Readout};
use crate::oracles::{oracle_d, oracle_k, EncryptedData, KeySequence};
use crate::seed::derive_seed;
use crate::statevec::{RegisterShape, StateVector, Subregister};
use crate::{Error, Result};

/// Seed stream of the key-state measurement within a session.
pub const STEP2_STREAM: u64 = 1;
const STEP5_STREAM: u64 = 2;
const KEY_CHANNEL_STREAM: u64 = 10;
const DATA_CHANNEL_STREAM: u64 = 11;
const RESTART_STREAM: u64 = 1000;

/// Bits needed for the largest key or item, at least one.
pub fn compute_m(items: &[u64], keys: &[u64]) -> Result<u32> {
    if items.is_empty() || keys.is_empty() {
        return Err(Error::EmptyDatabase);
    }
    let max = items.iter().chain(keys).copied().max().unwrap_or(0);
    Ok((u64::BITS - max.leading_zeros()).max(1))
}

/// The server's items and key sequence. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Database {
    items: Vec<u64>,
    keys: KeySequence,
    shape: RegisterShape,
}

impl Database {
    pub fn new(items: Vec<u64>, keys: Vec<u64>) -> Result<Self> {
        if items.len() != keys.len() {
            return Err(Error::LengthMismatch {
                expected: items.len(),
                actual: keys.len(),
            });
        }
        let m = compute_m(&items, &keys)?;
        let shape = RegisterShape::new(items.len(), m)?;
        Ok(Self {
            items,
            keys: KeySequence::new(keys),
            shape,
        })
    }

    pub fn items(&self) -> &[u64] {
        &self.items
    }

    pub fn keys(&self) -> &KeySequence {
        &self.keys
    }

    pub fn shape(&self) -> RegisterShape {
        self.shape
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    fn check_query(&self, p: usize) -> Result<()> {
        if p >= self.len() {
            return Err(Error::OutOfRange {
                what: "query index",
                value: p as u64,
                limit: self.len() as u64,
            });
        }
        Ok(())
    }
}

/// The only classical message a client sends: `(lambda - p) mod N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OffsetMessage {
    pub delta_s: usize,
}

impl OffsetMessage {
    pub fn new(lambda: usize, p: usize, items: usize) -> Self {
        Self {
            delta_s: (lambda % items + items - p % items) % items,
        }
    }
}

/// Step 1: `O_K` applied to the uniform index state.
pub fn step1_key_state(db: &Database) -> Result<StateVector> {
    let mut state = StateVector::prepare_uniform_index(db.shape);
    oracle_k(&mut state, &db.keys)?;
    Ok(state)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KeyMeasurement {
    pub lambda: usize,
    pub key_lambda: u64,
    pub offset: OffsetMessage,
}

/// Step 2: measure the index register, read the collapsed key, form the offset.
///
/// `forced_lambda` replaces the sampled index outcome; the state still
/// collapses onto it and the key is still read from the collapsed register.
pub fn step2_measure_offset(
    key_state: &StateVector,
    p: usize,
    rng_seed: u64,
    forced_lambda: Option<usize>,
) -> Result<KeyMeasurement> {
    let shape = key_state.shape();
    let items = shape.items();
    if p >= items {
        return Err(Error::OutOfRange {
            what: "query index",
            value: p as u64,
            limit: items as u64,
        });
    }
    let index_outcome = match forced_lambda {
        Some(lambda) if lambda >= items => {
            return Err(Error::OutOfRange {
                what: "lambda",
                value: lambda as u64,
                limit: items as u64,
            })
        }
        Some(lambda) => key_state.collapse(Subregister::Index, lambda)?,
        None => key_state.measure_seeded(Subregister::Index, derive_seed(rng_seed, 0))?,
    };
    let lambda = index_outcome.observed;
    let readout = index_outcome
        .post_state
        .measure_seeded(Subregister::All, derive_seed(rng_seed, 1))?;
    let (_, key_lambda) = readout.index_and_data();
    Ok(KeyMeasurement {
        lambda,
        key_lambda,
        offset: OffsetMessage::new(lambda, p, items),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncryptedTransfer {
    pub rotated_keys: KeySequence,
    pub encrypted: EncryptedData,
    pub data_state: StateVector,
}

/// Step 3: rotate keys by the offset, encrypt every item, embed the ciphertexts.
pub fn step3_rotate_encrypt(db: &Database, offset: OffsetMessage) -> Result<EncryptedTransfer> {
    let n = db.len();
    let rotated: Vec<u64> = (0..n).map(|i| db.keys[(i + offset.delta_s) % n]).collect();
    let encrypted: Vec<u64> = db.items.iter().zip(&rotated).map(|(d, k)| d ^ k).collect();
    let encrypted = EncryptedData::new(encrypted);
    let mut data_state = StateVector::prepare_uniform_index(db.shape);
    oracle_d(&mut data_state, &encrypted)?;
    Ok(EncryptedTransfer {
        rotated_keys: KeySequence::new(rotated),
        encrypted,
        data_state,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasuredPair {
    pub index: usize,
    pub data: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decryption {
    pub scan: GroverScan,
    pub r_used: usize,
    pub measured: MeasuredPair,
    /// `None` when the readout missed `(p, expected_cipher)`.
    pub decrypted: Option<u64>,
}

/// Steps 4 and 5: amplify, read the register, decrypt on a hit.
pub fn step45_retrieve_decrypt(
    data_state: &StateVector,
    p: usize,
    key_lambda: u64,
    expected_cipher: u64,
    iterations: Iterations,
    readout: Readout,
) -> Result<Decryption> {
    let r = grover_retrieve(data_state, p, expected_cipher, iterations, readout)?;
    Ok(Decryption {
        r_used: r.iterations,
        measured: MeasuredPair {
            index: r.index,
            data: r.data,
        },
        decrypted: r.success.then_some(r.data ^ key_lambda),
        scan: r.scan,
    })
}

/// How a session produces its final readout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SessionReadout {
    /// Born-rule sampling from the session seed.
    #[default]
    Sampled,
    /// Collapse onto the target pair `(p, encrypted[p])`.
    ForceSuccess,
    /// Collapse onto an arbitrary reachable pair.
    Forced { index: usize, data: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionOptions {
    pub client_id: String,
    pub forced_lambda: Option<usize>,
    pub iterations: Iterations,
    pub readout: SessionReadout,
}

impl Default for SessionOptions {
    fn default() -> Self {
        Self {
            client_id: "client".to_owned(),
            forced_lambda: None,
            iterations: Iterations::Auto,
            readout: SessionReadout::Sampled,
        }
    }
}

/// Everything that happened in one session, server side included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolTranscript {
    pub client_id: String,
    pub p: usize,
    pub lambda: usize,
    pub key_lambda: u64,
    pub delta_s: OffsetMessage,
    pub rotated_keys: KeySequence,
    pub encrypted: EncryptedData,
    pub grover: GroverScan,
    pub r_used: usize,
    pub measured: MeasuredPair,
    pub decrypted: Option<u64>,
    pub rng_seed: u64,
}

/// The subset of a transcript the client itself observes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClientView {
    pub lambda: usize,
    pub key_lambda: u64,
    pub delta_s: OffsetMessage,
    pub measured: MeasuredPair,
    pub decrypted: Option<u64>,
}

impl ClientView {
    /// `(index, key)` pairs of the server's original key sequence that the
    /// client holds after the session.
    pub fn learned_keys(&self) -> Vec<(usize, u64)> {
        vec![(self.lambda, self.key_lambda)]
    }
}

impl ProtocolTranscript {
    pub fn succeeded(&self) -> bool {
        self.decrypted.is_some()
    }

    pub fn client_view(&self) -> ClientView {
        ClientView {
            lambda: self.lambda,
            key_lambda: self.key_lambda,
            delta_s: self.delta_s,
            measured: self.measured,
            decrypted: self.decrypted,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Transmission {
    KeyState,
    DataState,
}

/// Runs the steps, handing each quantum transmission to `gate`. Returns
/// `None` as soon as a gate rejects a transmission.
fn drive(
    db: &Database,
    p: usize,
    rng_seed: u64,
    options: &SessionOptions,
    gate: &mut dyn FnMut(Transmission) -> Result<bool>,
) -> Result<Option<ProtocolTranscript>> {
    db.check_query(p)?;
    let key_state = step1_key_state(db)?;
    if !gate(Transmission::KeyState)? {
        return Ok(None);
    }
    let km = step2_measure_offset(
        &key_state,
        p,
        derive_seed(rng_seed, STEP2_STREAM),
        options.forced_lambda,
    )?;
    let transfer = step3_rotate_encrypt(db, km.offset)?;
    if !gate(Transmission::DataState)? {
        return Ok(None);
    }
    let expected_cipher = transfer.encrypted[p];
    let readout = match options.readout {
        SessionReadout::Sampled => Readout::Sampled(derive_seed(rng_seed, STEP5_STREAM)),
        SessionReadout::ForceSuccess => Readout::Forced {
            index: p,
            data: expected_cipher,
        },
        SessionReadout::Forced { index, data } => Readout::Forced { index, data },
    };
    let dec = step45_retrieve_decrypt(
        &transfer.data_state,
        p,
        km.key_lambda,
        expected_cipher,
        options.iterations,
        readout,
    )?;
    Ok(Some(ProtocolTranscript {
        client_id: options.client_id.clone(),
        p,
        lambda: km.lambda,
        key_lambda: km.key_lambda,
        delta_s: km.offset,
        rotated_keys: transfer.rotated_keys,
        encrypted: transfer.encrypted,
        grover: dec.scan,
        r_used: dec.r_used,
        measured: dec.measured,
        decrypted: dec.decrypted,
        rng_seed,
    }))
}

/// One full session over an untapped channel.
pub fn run_session(
    db: &Database,
    p: usize,
    rng_seed: u64,
    options: &SessionOptions,
) -> Result<ProtocolTranscript> {
    let transcript = drive(db, p, rng_seed, options, &mut |_| Ok(true))?;
    Ok(transcript.expect("an open gate never aborts"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckedSession {
    pub transcript: ProtocolTranscript,
    /// Attempts used, including the successful one.
    pub attempts: usize,
    /// Every decoy check performed, in order, across all attempts.
    pub reports: Vec<ChannelReport>,
}

/// A session with a decoy check on both quantum transmissions. A failed
/// check abandons the attempt and restarts with fresh randomness, up to
/// `channel.max_restarts` times.
///
/// Attempt 0 uses `rng_seed` unchanged, so an attempt that passes on the
/// first try yields the same transcript as [`run_session`].
pub fn run_checked_session(
    db: &Database,
    p: usize,
    rng_seed: u64,
    options: &SessionOptions,
    channel: &ChannelConfig,
) -> Result<CheckedSession> {
    let payload = db.shape.total_qubits() as usize;
    let mut reports = Vec::new();
    for attempt in 0..=channel.max_restarts {
        let seed = if attempt == 0 {
            rng_seed
        } else {
            derive_seed(rng_seed, RESTART_STREAM + attempt as u64)
        };
        let mut gate = |t: Transmission| -> Result<bool> {
            let stream = match t {
                Transmission::KeyState => KEY_CHANNEL_STREAM,
                Transmission::DataState => DATA_CHANNEL_STREAM,
            };
            let report = channel.check_transmission(payload, derive_seed(seed, stream))?;
            reports.push(report);
            Ok(report.passed)
        };
        if let Some(transcript) = drive(db, p, seed, options, &mut gate)? {
            return Ok(CheckedSession {
                transcript,
                attempts: attempt + 1,
                reports,
            });
        }
    }
    Err(Error::ChannelAborted {
        attempts: channel.max_restarts + 1,
        error_rate: reports.last().map_or(0.0, |r| r.error_rate),
    })
}
