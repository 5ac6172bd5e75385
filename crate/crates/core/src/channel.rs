//! Decoy-photon eavesdropping check.
//!
//! The sender interleaves single-qubit decoys, each drawn uniformly from
//! `{|0>, |1>, |+>, |->}`, into a transmission. After delivery it announces
//! positions and preparation bases; the receiver measures each decoy in the
//! announced basis and the sender counts disagreements.
//!
//! Decoys are tracked as classical `(basis, bit)` records. Measuring a record
//! in its own basis returns its bit; measuring it in the other basis returns
//! a fair coin.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::seed::{derive_seed, rng_from_seed};
use crate::{Error, Result};

pub const DEFAULT_THRESHOLD: f64 = 0.05;
pub const DEFAULT_MAX_RESTARTS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    /// `{|0>, |1>}`
    Z,
    /// `{|+>, |->}`
    X,
}

impl Basis {
    fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        if rng.gen::<bool>() {
            Basis::X
        } else {
            Basis::Z
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DecoyPhoton {
    pub basis: Basis,
    pub bit: u8,
    /// Slot in the combined payload-plus-decoy sequence.
    pub position: usize,
}

impl DecoyPhoton {
    /// Projective measurement in `basis`.
    pub fn measure<R: Rng + ?Sized>(&self, basis: Basis, rng: &mut R) -> u8 {
        if basis == self.basis {
            self.bit
        } else {
            rng.gen_range(0..2)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Eavesdropper {
    #[default]
    None,
    /// Measure every photon in a random basis and resend what was seen.
    InterceptResend,
}

impl std::str::FromStr for Eavesdropper {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(Eavesdropper::None),
            "intercept-resend" | "intercept_resend" => Ok(Eavesdropper::InterceptResend),
            other => Err(format!(
                "unknown eavesdropper `{other}` (expected none or intercept-resend)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelReport {
    pub decoys_sent: usize,
    pub mismatches: usize,
    pub error_rate: f64,
    pub threshold: f64,
    pub passed: bool,
}

/// Draws `decoy_count` decoys at distinct random slots among
/// `payload_length + decoy_count`, sorted by position.
pub fn insert_decoys(
    payload_length: usize,
    decoy_count: usize,
    rng_seed: u64,
) -> Result<Vec<DecoyPhoton>> {
    if decoy_count == 0 {
        return Err(Error::NoDecoys);
    }
    let mut rng = rng_from_seed(rng_seed);
    let mut positions = sample(&mut rng, payload_length + decoy_count, decoy_count).into_vec();
    positions.sort_unstable();
    Ok(positions
        .into_iter()
        .map(|position| DecoyPhoton {
            basis: Basis::random(&mut rng),
            bit: rng.gen_range(0..2),
            position,
        })
        .collect())
}

/// Intercept-resend on one photon with Eve measuring in `eve_basis`.
pub fn intercept_resend<R: Rng + ?Sized>(
    photon: DecoyPhoton,
    eve_basis: Basis,
    rng: &mut R,
) -> DecoyPhoton {
    let bit = photon.measure(eve_basis, rng);
    DecoyPhoton {
        basis: eve_basis,
        bit,
        position: photon.position,
    }
}

/// Delivers decoys through a channel, possibly tapped.
pub fn transmit(
    decoys: &[DecoyPhoton],
    eavesdropper: Eavesdropper,
    rng_seed: u64,
) -> Vec<DecoyPhoton> {
    match eavesdropper {
        Eavesdropper::None => decoys.to_vec(),
        Eavesdropper::InterceptResend => {
            let mut rng = rng_from_seed(rng_seed);
            decoys
                .iter()
                .map(|&ph| {
                    let eve_basis = Basis::random(&mut rng);
                    intercept_resend(ph, eve_basis, &mut rng)
                })
                .collect()
        }
    }
}

/// Receiver measures each delivered decoy in the announced preparation basis;
/// the sender compares against what it prepared.
pub fn check_decoys(
    sent: &[DecoyPhoton],
    received: &[DecoyPhoton],
    threshold: f64,
    rng_seed: u64,
) -> Result<ChannelReport> {
    if sent.len() != received.len() {
        return Err(Error::LengthMismatch {
            expected: sent.len(),
            actual: received.len(),
        });
    }
    if sent.is_empty() {
        return Err(Error::NoDecoys);
    }
    let mut rng = rng_from_seed(rng_seed);
    let mismatches = sent
        .iter()
        .zip(received)
        .filter(|(s, r)| r.measure(s.basis, &mut rng) != s.bit)
        .count();
    let error_rate = mismatches as f64 / sent.len() as f64;
    Ok(ChannelReport {
        decoys_sent: sent.len(),
        mismatches,
        error_rate,
        threshold,
        passed: error_rate <= threshold,
    })
}

/// Decoy layer attached to each quantum transmission of a session.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelConfig {
    /// `None` picks `ceil(payload / 4)`.
    pub decoy_count: Option<usize>,
    pub threshold: f64,
    pub eavesdropper: Eavesdropper,
    pub max_restarts: usize,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            decoy_count: None,
            threshold: DEFAULT_THRESHOLD,
            eavesdropper: Eavesdropper::None,
            max_restarts: DEFAULT_MAX_RESTARTS,
        }
    }
}

impl ChannelConfig {
    pub fn decoys_for(&self, payload_length: usize) -> usize {
        self.decoy_count
            .unwrap_or_else(|| payload_length.div_ceil(4))
            .max(1)
    }

    /// Inserts, transmits and checks one decoy layer for a payload of
    /// `payload_length` qubits.
    pub fn check_transmission(
        &self,
        payload_length: usize,
        rng_seed: u64,
    ) -> Result<ChannelReport> {
        let sent = insert_decoys(
            payload_length,
            self.decoys_for(payload_length),
            derive_seed(rng_seed, 0),
        )?;
        let received = transmit(&sent, self.eavesdropper, derive_seed(rng_seed, 1));
        check_decoys(&sent, &received, self.threshold, derive_seed(rng_seed, 2))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn decoys_fill_empty_payload() {
        let d = insert_decoys(0, 4, 1).unwrap();
        let pos: Vec<usize> = d.iter().map(|p| p.position).collect();
        assert_eq!(pos, vec![0, 1, 2, 3]);
    }

    #[test]
    fn decoy_positions_are_distinct_and_in_range() {
        let d = insert_decoys(40, 10, 9).unwrap();
        assert_eq!(d.len(), 10);
        assert!(d.windows(2).all(|w| w[0].position < w[1].position));
        assert!(d.iter().all(|p| p.position < 50));
    }

    #[test]
    fn decoy_states_are_uniform() {
        let d = insert_decoys(0, 100_000, 77).unwrap();
        let mut counts = [0usize; 4];
        for ph in &d {
            let k = match ph.basis {
                Basis::Z => 0,
                Basis::X => 2,
            } + ph.bit as usize;
            counts[k] += 1;
        }
        for c in counts {
            assert!((c as f64 / 1e5 - 0.25).abs() < 0.01);
        }
    }

    #[test]
    fn insertion_is_deterministic() {
        assert_eq!(
            insert_decoys(8, 5, 3).unwrap(),
            insert_decoys(8, 5, 3).unwrap()
        );
        assert_eq!(insert_decoys(0, 0, 3), Err(Error::NoDecoys));
    }

    #[test]
    fn clean_channel_is_transparent() {
        let d = insert_decoys(8, 64, 5).unwrap();
        assert_eq!(transmit(&d, Eavesdropper::None, 1), d);
        let report = check_decoys(&d, &d, DEFAULT_THRESHOLD, 2).unwrap();
        assert_eq!(report.mismatches, 0);
        assert_eq!(report.error_rate, 0.0);
        assert!(report.passed);
    }

    #[test]
    fn matched_basis_interception_preserves_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for ph in insert_decoys(0, 200, 8).unwrap() {
            assert_eq!(intercept_resend(ph, ph.basis, &mut rng), ph);
        }
    }

    #[test]
    fn intercept_resend_error_rate_is_a_quarter() {
        let sent = insert_decoys(0, 100_000, 21).unwrap();
        let received = transmit(&sent, Eavesdropper::InterceptResend, 22);
        let report = check_decoys(&sent, &received, DEFAULT_THRESHOLD, 23).unwrap();
        assert!(
            (report.error_rate - 0.25).abs() < 0.01,
            "{}",
            report.error_rate
        );
        assert!(!report.passed);
    }

    #[test]
    fn intercept_resend_rate_within_three_sigma() {
        for (k, seed) in [(500usize, 1u64), (2_000, 2), (10_000, 3)] {
            let sent = insert_decoys(0, k, seed).unwrap();
            let received = transmit(&sent, Eavesdropper::InterceptResend, seed + 100);
            let report = check_decoys(&sent, &received, DEFAULT_THRESHOLD, seed + 200).unwrap();
            let bound = 3.0 * (0.25f64 * 0.75 / k as f64).sqrt();
            assert!((report.error_rate - 0.25).abs() <= bound);
        }
    }

    #[test]
    fn intercept_resend_fails_ten_thousand_decoys() {
        let sent = insert_decoys(0, 10_000, 4).unwrap();
        let received = transmit(&sent, Eavesdropper::InterceptResend, 5);
        assert!(!check_decoys(&sent, &received, 0.05, 6).unwrap().passed);
    }

    #[test]
    fn flipped_bits_give_full_error() {
        let sent = insert_decoys(0, 50, 10).unwrap();
        let flipped: Vec<_> = sent
            .iter()
            .map(|p| DecoyPhoton {
                bit: 1 - p.bit,
                ..*p
            })
            .collect();
        let report = check_decoys(&sent, &flipped, 0.05, 0).unwrap();
        assert_eq!(report.error_rate, 1.0);
        assert!(!report.passed);
    }

    #[test]
    fn check_rejects_length_mismatch() {
        let sent = insert_decoys(0, 5, 10).unwrap();
        assert!(matches!(
            check_decoys(&sent, &sent[..4], 0.05, 0),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn passed_iff_rate_within_threshold() {
        let sent = insert_decoys(0, 4, 1).unwrap();
        let mut recv = sent.clone();
        recv[0].bit ^= 1;
        recv[0].basis = sent[0].basis;
        let at = check_decoys(&sent, &recv, 0.25, 0).unwrap();
        assert!(at.passed);
        let below = check_decoys(&sent, &recv, 0.24, 0).unwrap();
        assert!(!below.passed);
    }

    #[test]
    fn default_decoy_count() {
        let cfg = ChannelConfig::default();
        assert_eq!(cfg.decoys_for(8), 2);
        assert_eq!(cfg.decoys_for(9), 3);
        assert_eq!(cfg.decoys_for(0), 1);
    }

    #[test]
    fn eavesdropper_parse() {
        assert_eq!("none".parse::<Eavesdropper>(), Ok(Eavesdropper::None));
        assert_eq!(
            "intercept-resend".parse::<Eavesdropper>(),
            Ok(Eavesdropper::InterceptResend)
        );
        assert!("mitm".parse::<Eavesdropper>().is_err());
    }
}
