//! Matrix-free oracle transforms.
//!
//! `O_K` and `O_D` embed a classical sequence into the data register by XOR,
//! `|i>|x> -> |i>|x xor v_i>`, which is a permutation of basis states and so
//! unitary on the whole space. On a data register of all zeros it reduces to
//! writing `v_i` into block `i`. `O_s` flips the sign of one index block and
//! `O_p` applies `-(-1)^sigma` with `sigma = 1` only on `|0...0>`.

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::statevec::{StateVector, UNREACHABLE_PROBABILITY};
use crate::{Error, Result};

macro_rules! value_sequence {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(Vec<u64>);

        impl $name {
            pub fn new(values: Vec<u64>) -> Self {
                Self(values)
            }

            pub fn into_inner(self) -> Vec<u64> {
                self.0
            }
        }

        impl Deref for $name {
            type Target = [u64];

            fn deref(&self) -> &[u64] {
                &self.0
            }
        }

        impl From<Vec<u64>> for $name {
            fn from(values: Vec<u64>) -> Self {
                Self(values)
            }
        }
    };
}

value_sequence!(
    /// The server's key sequence `K_0 .. K_{N-1}`, or a rotation of it.
    KeySequence
);

value_sequence!(
    /// Encrypted items `D_i xor K'_i`.
    EncryptedData
);

fn xor_embed(state: &mut StateVector, values: &[u64]) -> Result<()> {
    let shape = state.shape();
    if values.len() != shape.items() {
        return Err(Error::LengthMismatch {
            expected: shape.items(),
            actual: values.len(),
        });
    }
    for &v in values {
        shape.check_data(v)?;
    }
    let data_dim = shape.data_dim();
    let amps = state.amplitudes_mut();
    for (i, block) in amps.chunks_exact(data_dim).enumerate().skip(shape.items()) {
        if block
            .iter()
            .any(|a| a.norm_sqr() >= UNREACHABLE_PROBABILITY)
        {
            return Err(Error::SupportOutsideDatabase(i));
        }
    }
    for (block, &v) in amps.chunks_exact_mut(data_dim).zip(values) {
        let v = v as usize;
        if v == 0 {
            continue;
        }
        for x in 0..data_dim {
            let y = x ^ v;
            if x < y {
                block.swap(x, y);
            }
        }
    }
    Ok(())
}

/// `O_K`: XOR key `K_i` into the data register of index block `i`.
pub fn oracle_k(state: &mut StateVector, keys: &KeySequence) -> Result<()> {
    xor_embed(state, keys)
}

/// `O_D`: XOR encrypted item `D_i` into the data register of index block `i`.
pub fn oracle_d(state: &mut StateVector, enc: &EncryptedData) -> Result<()> {
    xor_embed(state, enc)
}

/// `O_s`: negate every amplitude whose index value is `p`.
pub fn oracle_s(state: &mut StateVector, p: usize) -> Result<()> {
    let shape = state.shape();
    shape.check_index(p)?;
    let d = shape.data_dim();
    for a in &mut state.amplitudes_mut()[p * d..(p + 1) * d] {
        *a = -*a;
    }
    Ok(())
}

/// `O_p`: keep the sign of `|0...0>`, negate everything else.
///
/// The leading global `-1` is applied literally, so this is `-(I - 2|0><0|)`.
pub fn oracle_p(state: &mut StateVector) {
    for a in &mut state.amplitudes_mut()[1..] {
        *a = -*a;
    }
}
