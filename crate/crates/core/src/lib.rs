//! Simulator for a privacy-preserving quantum database query.
//!
//! A server holding `N` items and `N` keys hands a client two superposition
//! states: first every `(i, K_i)` pair, then every `(i, D_i xor K'_i)` pair
//! under a key sequence rotated by the client's offset. The client measures
//! the first state to learn one key, announces the offset that aligns that
//! key with the item it wants, then amplifies the wanted item out of the
//! second state with a Grover-style iteration and decrypts it.
//!
//! Modules, bottom up:
//!
//! * [`statevec`]: dense `(n+m)`-qubit register, Hadamard transform, measurement.
//! * [`oracles`]: the XOR-embedding, sign-flip and conditional-phase transforms.
//! * [`grover`]: the `G` operator, its iteration bound and a probability scan.
//! * [`protocol`]: the five-step session driver and its transcript.
//! * [`channel`]: decoy-photon eavesdropping checks.
//! * [`analysis`]: key-ensemble entropy and communication-cost formulas.

pub mod analysis;
pub mod channel;
mod error;
pub mod grover;
pub mod oracles;
pub mod protocol;
pub mod seed;
pub mod statevec;

pub use error::{Error, Result};
pub use statevec::{MeasurementOutcome, RegisterShape, StateVector, Subregister};
