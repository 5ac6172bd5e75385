//! Information bound of the key state and communication-cost comparison.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const ENSEMBLE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleEntry {
    pub probability: f64,
    pub index: usize,
    pub key: u64,
}

/// Mixture of computational basis states `|i>|K_i>` with weights `p_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyEnsemble {
    pub entries: Vec<EnsembleEntry>,
}

impl KeyEnsemble {
    /// Equal weights `1/N` on every `(i, K_i)`.
    pub fn uniform(keys: &[u64]) -> Self {
        let p = 1.0 / keys.len() as f64;
        Self {
            entries: keys
                .iter()
                .enumerate()
                .map(|(index, &key)| EnsembleEntry {
                    probability: p,
                    index,
                    key,
                })
                .collect(),
        }
    }
}

/// Holevo quantity `S(rho) - sum_i p_i S(rho_i)` in bits.
///
/// Every member is a pure basis state, so `S(rho_i) = 0` and `rho` is
/// diagonal: its eigenvalues are the total weights on each distinct
/// `(index, key)` label.
pub fn holevo_entropy(ensemble: &KeyEnsemble) -> Result<f64> {
    let total: f64 = ensemble.entries.iter().map(|e| e.probability).sum();
    if (total - 1.0).abs() > ENSEMBLE_TOLERANCE
        || ensemble.entries.iter().any(|e| e.probability < 0.0)
    {
        return Err(Error::EnsembleNotNormalized(total));
    }
    let mut eigenvalues: BTreeMap<(usize, u64), f64> = BTreeMap::new();
    for e in &ensemble.entries {
        *eigenvalues.entry((e.index, e.key)).or_default() += e.probability;
    }
    let mixture: f64 = eigenvalues
        .values()
        .filter(|&&l| l > 0.0)
        .map(|&l| -l * l.log2())
        .sum();
    Ok(mixture.max(0.0))
}

/// The comparison schemes. J11 and G12 share one cost profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scheme {
    J11G12,
    R13,
    #[serde(rename = "QBDQ")]
    Qbdq,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::J11G12, Scheme::R13, Scheme::Qbdq];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::J11G12 => "J11G12",
            Scheme::R13 => "R13",
            Scheme::Qbdq => "QBDQ",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "J11G12" | "J11" | "G12" => Ok(Scheme::J11G12),
            "R13" => Ok(Scheme::R13),
            "QBDQ" => Ok(Scheme::Qbdq),
            _ => Err(Error::UnknownScheme(s.to_owned())),
        }
    }
}

/// Which set of cost formulas to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FormulaMode {
    /// Formulas that reproduce the published comparison tables row for row.
    #[default]
    TableFit,
    /// Formulas as stated in the efficiency discussion prose.
    Text,
}

impl FromStr for FormulaMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "table" | "table-fit" => Ok(FormulaMode::TableFit),
            "text" => Ok(FormulaMode::Text),
            other => Err(format!(
                "unknown formula mode `{other}` (expected table or text)"
            )),
        }
    }
}

/// Source for classical-message counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CbitSource {
    /// Per-size table: `N` for the others, `ceil(log2 N)` for QBDQ.
    #[default]
    SizeTable,
    /// Summary table: `N + 1` for the others, `1` for QBDQ.
    SummaryTable,
}

fn ceil_log2(n: usize) -> u64 {
    (usize::BITS - (n - 1).leading_zeros()) as u64
}

fn check_size(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::DatabaseTooSmall(n));
    }
    Ok(())
}

/// Transmitted qubits for a database of `n` items of `m` bits.
///
/// Table-fit: `N ceil(log2 N)`, `N`, `ceil(log2 N)`.
/// Text: `N ceil(log2 sqrt N)`, `N`, `2 (ceil(log2 N) + m)`.
pub fn cost_qubits(scheme: Scheme, n: usize, m: u32, mode: FormulaMode) -> Result<u64> {
    check_size(n)?;
    let big_n = n as u64;
    let log_n = ceil_log2(n);
    Ok(match (scheme, mode) {
        (Scheme::J11G12, FormulaMode::TableFit) => big_n * log_n,
        (Scheme::J11G12, FormulaMode::Text) => {
            // k substrings = log2 sqrt N, rounded up to a whole substring
            let k = ((n as f64).log2() / 2.0).ceil() as u64;
            big_n * k.max(1)
        }
        (Scheme::R13, _) => big_n,
        (Scheme::Qbdq, FormulaMode::TableFit) => log_n,
        (Scheme::Qbdq, FormulaMode::Text) => 2 * (log_n + m as u64),
    })
}

/// Exchanged classical bits.
pub fn cost_cbits(scheme: Scheme, n: usize, source: CbitSource) -> Result<u64> {
    check_size(n)?;
    let big_n = n as u64;
    Ok(match (scheme, source) {
        (Scheme::Qbdq, CbitSource::SizeTable) => ceil_log2(n),
        (Scheme::Qbdq, CbitSource::SummaryTable) => 1,
        (_, CbitSource::SizeTable) => big_n,
        (_, CbitSource::SummaryTable) => big_n + 1,
    })
}

/// Measurements performed; `k = ceil(log2 N)` for J11/G12.
pub fn cost_measurements(scheme: Scheme, n: usize) -> Result<u64> {
    check_size(n)?;
    Ok(match scheme {
        Scheme::J11G12 => ceil_log2(n) * n as u64,
        Scheme::R13 => n as u64,
        Scheme::Qbdq => 2,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EfficiencyRecord {
    pub scheme: Scheme,
    pub database_size: usize,
    pub transmitted_qubits: u64,
    pub exchanged_cbits: u64,
    pub measurements: u64,
}

/// Item width assumed by the comparison (one-bit items).
pub const COMPARISON_ITEM_BITS: u32 = 1;

/// One record per `(N, scheme)`, sorted by `N` then scheme order.
pub fn comparison_records(n_values: &[usize], mode: FormulaMode) -> Result<Vec<EfficiencyRecord>> {
    let mut sizes = n_values.to_vec();
    sizes.sort_unstable();
    let mut out = Vec::with_capacity(sizes.len() * Scheme::ALL.len());
    for n in sizes {
        for scheme in Scheme::ALL {
            out.push(EfficiencyRecord {
                scheme,
                database_size: n,
                transmitted_qubits: cost_qubits(scheme, n, COMPARISON_ITEM_BITS, mode)?,
                exchanged_cbits: cost_cbits(scheme, n, CbitSource::SizeTable)?,
                measurements: cost_measurements(scheme, n)?,
            });
        }
    }
    Ok(out)
}

pub const CSV_HEADER: [&str; 5] = ["N", "scheme", "qubits", "cbits", "measurements"];

/// Renders records as CSV with header `N,scheme,qubits,cbits,measurements`
/// and LF line endings.
pub fn records_to_csv(records: &[EfficiencyRecord]) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for r in records {
        w.write_record([
            r.database_size.to_string(),
            r.scheme.name().to_owned(),
            r.transmitted_qubits.to_string(),
            r.exchanged_cbits.to_string(),
            r.measurements.to_string(),
        ])
        .expect("in-memory write");
    }
    let bytes = w.into_inner().expect("in-memory flush");
    String::from_utf8(bytes).expect("ascii output")
}

/// [`comparison_records`] rendered by [`records_to_csv`].
pub fn emit_comparison_tables(n_values: &[usize], mode: FormulaMode) -> Result<String> {
    Ok(records_to_csv(&comparison_records(n_values, mode)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE_KEYS: [u64; 16] = [14, 8, 3, 4, 7, 1, 11, 6, 15, 2, 12, 13, 0, 5, 9, 10];

    #[test]
    fn entropy_of_pure_state_is_zero() {
        let e = KeyEnsemble::uniform(&[7]);
        assert_eq!(holevo_entropy(&e).unwrap(), 0.0);
    }

    #[test]
    fn entropy_of_two_entries_is_one_bit() {
        let e = KeyEnsemble::uniform(&[3, 1]);
        assert!((holevo_entropy(&e).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn example_ensemble_is_four_bits() {
        let e = KeyEnsemble::uniform(&EXAMPLE_KEYS);
        assert!((holevo_entropy(&e).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn duplicate_labels_merge() {
        let e = KeyEnsemble {
            entries: vec![
                EnsembleEntry {
                    probability: 0.5,
                    index: 0,
                    key: 1,
                },
                EnsembleEntry {
                    probability: 0.5,
                    index: 0,
                    key: 1,
                },
            ],
        };
        assert_eq!(holevo_entropy(&e).unwrap(), 0.0);
    }

    #[test]
    fn entropy_rejects_unnormalized() {
        let e = KeyEnsemble {
            entries: vec![EnsembleEntry {
                probability: 0.4,
                index: 0,
                key: 0,
            }],
        };
        assert!(matches!(
            holevo_entropy(&e),
            Err(Error::EnsembleNotNormalized(_))
        ));
    }

    #[test]
    fn entropy_matches_dense_diagonalization() {
        let e = KeyEnsemble {
            entries: vec![
                EnsembleEntry {
                    probability: 0.5,
                    index: 0,
                    key: 2,
                },
                EnsembleEntry {
                    probability: 0.25,
                    index: 1,
                    key: 0,
                },
                EnsembleEntry {
                    probability: 0.125,
                    index: 2,
                    key: 3,
                },
                EnsembleEntry {
                    probability: 0.125,
                    index: 3,
                    key: 1,
                },
            ],
        };
        let dense = qbdq_testkit::dense_mixture_entropy(
            16,
            &e.entries
                .iter()
                .map(|x| (x.probability, x.index * 4 + x.key as usize))
                .collect::<Vec<_>>(),
        );
        assert!((holevo_entropy(&e).unwrap() - dense).abs() < 1e-12);
        assert!((dense - 1.75).abs() < 1e-12);
    }

    #[test]
    fn qubit_costs_first_and_last_rows() {
        use FormulaMode::TableFit as T;
        assert_eq!(cost_qubits(Scheme::J11G12, 8, 1, T).unwrap(), 24);
        assert_eq!(cost_qubits(Scheme::R13, 8, 1, T).unwrap(), 8);
        assert_eq!(cost_qubits(Scheme::Qbdq, 8, 1, T).unwrap(), 3);
        assert_eq!(cost_qubits(Scheme::J11G12, 200, 1, T).unwrap(), 1600);
        assert_eq!(cost_qubits(Scheme::Qbdq, 200, 1, T).unwrap(), 8);
        assert_eq!(cost_qubits(Scheme::J11G12, 400, 1, T).unwrap(), 3600);
        assert_eq!(cost_qubits(Scheme::R13, 400, 1, T).unwrap(), 400);
        assert_eq!(cost_qubits(Scheme::Qbdq, 400, 1, T).unwrap(), 9);
    }

    #[test]
    fn qubit_costs_text_mode() {
        use FormulaMode::Text;
        assert_eq!(cost_qubits(Scheme::Qbdq, 8, 1, Text).unwrap(), 8);
        assert_eq!(cost_qubits(Scheme::J11G12, 16, 1, Text).unwrap(), 32);
        assert_eq!(cost_qubits(Scheme::R13, 16, 1, Text).unwrap(), 16);
    }

    #[test]
    fn cbit_costs() {
        use CbitSource::*;
        assert_eq!(cost_cbits(Scheme::J11G12, 8, SizeTable).unwrap(), 8);
        assert_eq!(cost_cbits(Scheme::Qbdq, 8, SizeTable).unwrap(), 3);
        assert_eq!(cost_cbits(Scheme::R13, 160, SizeTable).unwrap(), 160);
        assert_eq!(cost_cbits(Scheme::Qbdq, 160, SizeTable).unwrap(), 8);
        assert_eq!(cost_cbits(Scheme::Qbdq, 2, SizeTable).unwrap(), 1);
        assert_eq!(cost_cbits(Scheme::R13, 8, SummaryTable).unwrap(), 9);
        assert_eq!(cost_cbits(Scheme::Qbdq, 8, SummaryTable).unwrap(), 1);
    }

    #[test]
    fn measurement_costs() {
        assert_eq!(cost_measurements(Scheme::Qbdq, 1000).unwrap(), 2);
        assert_eq!(cost_measurements(Scheme::R13, 64).unwrap(), 64);
        assert_eq!(cost_measurements(Scheme::J11G12, 8).unwrap(), 24);
        assert_eq!(
            cost_measurements(Scheme::Qbdq, 1),
            Err(Error::DatabaseTooSmall(1))
        );
    }

    #[test]
    fn scheme_parse() {
        assert_eq!("qbdq".parse::<Scheme>().unwrap(), Scheme::Qbdq);
        assert_eq!("J11".parse::<Scheme>().unwrap(), Scheme::J11G12);
        assert_eq!("x".parse::<Scheme>(), Err(Error::UnknownScheme("x".into())));
    }

    #[test]
    fn csv_layout() {
        let csv = emit_comparison_tables(&[8], FormulaMode::TableFit).unwrap();
        assert_eq!(
            csv,
            "N,scheme,qubits,cbits,measurements\n8,J11G12,24,8,24\n8,R13,8,8,8\n8,QBDQ,3,3,2\n"
        );
        let csv = emit_comparison_tables(&[1024], FormulaMode::TableFit).unwrap();
        assert!(csv.contains("\n1024,QBDQ,10,10,2\n"));
    }

    #[test]
    fn records_are_sorted_by_size() {
        let r = comparison_records(&[16, 8], FormulaMode::TableFit).unwrap();
        let sizes: Vec<usize> = r.iter().map(|x| x.database_size).collect();
        assert_eq!(sizes, vec![8, 8, 8, 16, 16, 16]);
        assert!(r
            .iter()
            .all(|x| x.transmitted_qubits > 0 && x.exchanged_cbits > 0 && x.measurements > 0));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn distinct_indices_give_log2_n(keys in proptest::collection::vec(0u64..64, 1..64)) {
                let h = holevo_entropy(&KeyEnsemble::uniform(&keys)).unwrap();
                prop_assert!((h - (keys.len() as f64).log2()).abs() < 1e-12);
            }

            #[test]
            fn doubling_n_adds_at_most_one_qubit(n in 2usize..1_000_000) {
                let a = cost_qubits(Scheme::Qbdq, n, 1, FormulaMode::TableFit).unwrap();
                let b = cost_qubits(Scheme::Qbdq, 2 * n, 1, FormulaMode::TableFit).unwrap();
                prop_assert!(b >= a && b - a <= 1);
            }

            #[test]
            fn entropy_bounded_by_label_count(weights in proptest::collection::vec(0.01f64..1.0, 1..20)) {
                let total: f64 = weights.iter().sum();
                let e = KeyEnsemble {
                    entries: weights.iter().enumerate().map(|(i, w)| EnsembleEntry {
                        probability: w / total, index: i, key: 0,
                    }).collect(),
                };
                let h = holevo_entropy(&e).unwrap();
                prop_assert!(h >= 0.0 && h <= (weights.len() as f64).log2() + 1e-12);
            }
        }
    }
}
