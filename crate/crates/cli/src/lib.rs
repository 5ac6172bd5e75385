//! `qbdq` command-line front-end.
//!
//! Subcommands write their primary output (CSV, JSON or a text report) to the
//! supplied writer and return a process exit code; see [`exit`].

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use qbdq_core::analysis::{emit_comparison_tables, FormulaMode};
use qbdq_core::channel::{
    check_decoys, insert_decoys, transmit, ChannelConfig, Eavesdropper, DEFAULT_MAX_RESTARTS,
    DEFAULT_THRESHOLD,
};
use qbdq_core::grover::{grover_scan, GroverScan, Iterations};
use qbdq_core::protocol::{
    run_checked_session, run_session, step1_key_state, step2_measure_offset, step3_rotate_encrypt,
    Database, ProtocolTranscript, SessionOptions, SessionReadout, STEP2_STREAM,
};
use qbdq_core::seed::derive_seed;
use qbdq_core::Error as CoreError;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    /// Runtime error or a failed internal consistency check.
    pub const FAILURE: i32 = 1;
    /// Command-line usage error (reported by clap).
    pub const USAGE: i32 = 2;
    /// Every attempt was aborted by the decoy check.
    pub const CHANNEL_ABORT: i32 = 3;
    /// The session completed but the final readout missed the target.
    pub const QUERY_MISSED: i32 = 4;
}

/// The bundled 16-item example database.
pub const EXAMPLE_DB_JSON: &str = include_str!("../fixtures/example_db.json");

/// Iteration count at which the worked example reports its peak.
pub const EXAMPLE_PEAK_ITERATIONS: usize = 6;

const DEMO_SEED: u64 = 2024;
const DEFAULT_TEST_DECOYS: usize = 1000;

#[derive(Debug, Parser)]
#[command(
    name = "qbdq",
    version,
    about = "Quantum private database query simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Replay the bundled 16-item example for two clients.
    Demo,
    /// Run one full query session with decoy checks and write its transcript.
    Query(RunConfig),
    /// Print target and index probabilities for every Grover iteration count.
    GroverScan(RunConfig),
    /// Emit the communication-cost comparison CSV.
    Compare(RunConfig),
    /// Run a standalone decoy-photon check and print its report.
    DecoyTest(RunConfig),
}

#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    /// Database file (JSON `{"items":[..],"keys":[..]}` or CSV `item,key`).
    /// Defaults to the bundled example.
    #[arg(long = "db")]
    pub db_path: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub query_index: usize,
    #[arg(long = "seed", default_value_t = 0)]
    pub rng_seed: u64,
    /// Replace the sampled index outcome of the key-state measurement.
    #[arg(long = "force-lambda")]
    pub forced_lambda: Option<usize>,
    /// `auto` (peak of the scan) or a fixed count.
    #[arg(long, default_value = "auto")]
    pub iterations: Iterations,
    /// Decoys per transmission (default: a quarter of the payload, rounded up;
    /// 1000 for decoy-test).
    #[arg(long = "decoys")]
    pub decoy_count: Option<usize>,
    #[arg(long = "threshold", default_value_t = DEFAULT_THRESHOLD)]
    pub decoy_threshold: f64,
    #[arg(long, default_value = "none")]
    pub eavesdropper: Eavesdropper,
    #[arg(long = "out")]
    pub output_path: Option<PathBuf>,
    #[arg(long, default_value = "table")]
    pub formula_mode: FormulaMode,
    /// `START:STOP:STEP` (inclusive) or a comma-separated list.
    #[arg(long, default_value = "8:400:8")]
    pub sizes: SizeList,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            db_path: None,
            query_index: 0,
            rng_seed: 0,
            forced_lambda: None,
            iterations: Iterations::Auto,
            decoy_count: None,
            decoy_threshold: DEFAULT_THRESHOLD,
            eavesdropper: Eavesdropper::None,
            output_path: None,
            formula_mode: FormulaMode::TableFit,
            sizes: SizeList(vec![8]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SizeList(pub Vec<usize>);

impl FromStr for SizeList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |_| format!("invalid size list `{s}`");
        if s.contains(':') {
            let parts: Vec<usize> = s
                .split(':')
                .map(|p| p.trim().parse().map_err(bad))
                .collect::<Result<_, _>>()?;
            let [start, stop, step] = parts[..] else {
                return Err(format!("expected START:STOP:STEP, got `{s}`"));
            };
            if step == 0 || start > stop {
                return Err(format!("empty size range `{s}`"));
            }
            return Ok(SizeList((start..=stop).step_by(step).collect()));
        }
        s.split(',')
            .map(|p| p.trim().parse().map_err(bad))
            .collect::<Result<_, _>>()
            .map(SizeList)
    }
}

#[derive(Debug, Deserialize)]
struct DatabaseFile {
    items: Vec<i64>,
    keys: Vec<i64>,
}

fn non_negative(values: Vec<i64>, what: &str) -> Result<Vec<u64>> {
    values
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            u64::try_from(v).map_err(|_| anyhow::anyhow!("{what}[{i}] is negative ({v})"))
        })
        .collect()
}

fn parse_database(text: &str, csv_format: bool) -> Result<Database> {
    let file: DatabaseFile = if csv_format {
        let mut items = Vec::new();
        let mut keys = Vec::new();
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = reader.headers()?.clone();
        ensure!(
            headers.iter().collect::<Vec<_>>() == ["item", "key"],
            "CSV header must be `item,key`"
        );
        for row in reader.deserialize() {
            let (item, key): (i64, i64) = row?;
            items.push(item);
            keys.push(key);
        }
        DatabaseFile { items, keys }
    } else {
        serde_json::from_str(text)?
    };
    let items = non_negative(file.items, "items")?;
    let keys = non_negative(file.keys, "keys")?;
    Ok(Database::new(items, keys)?)
}

/// Reads a database file, choosing JSON or CSV by extension, falling back
/// to sniffing the first non-blank character.
pub fn load_database(path: &Path) -> Result<Database> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let csv_format = match path.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("csv") => true,
        Some(ext) if ext.eq_ignore_ascii_case("json") => false,
        _ => !text.trim_start().starts_with('{'),
    };
    parse_database(&text, csv_format).with_context(|| format!("loading {}", path.display()))
}

pub fn example_database() -> Database {
    parse_database(EXAMPLE_DB_JSON, false).expect("bundled fixture is valid")
}

impl RunConfig {
    fn database(&self) -> Result<Database> {
        let db = match &self.db_path {
            Some(path) => load_database(path)?,
            None => example_database(),
        };
        ensure!(
            self.query_index < db.len(),
            "query index {} out of range for {} items",
            self.query_index,
            db.len()
        );
        if let Some(lambda) = self.forced_lambda {
            ensure!(
                lambda < db.len(),
                "forced lambda {lambda} out of range for {} items",
                db.len()
            );
        }
        Ok(db)
    }

    fn channel(&self) -> ChannelConfig {
        ChannelConfig {
            decoy_count: self.decoy_count,
            threshold: self.decoy_threshold,
            eavesdropper: self.eavesdropper,
            max_restarts: DEFAULT_MAX_RESTARTS,
        }
    }

    fn session_options(&self) -> SessionOptions {
        SessionOptions {
            client_id: "client".to_owned(),
            forced_lambda: self.forced_lambda,
            iterations: self.iterations,
            readout: SessionReadout::Sampled,
        }
    }
}

fn join(values: &[u64]) -> String {
    values
        .iter()
        .map(u64::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

fn transcript_json(t: &ProtocolTranscript) -> Result<String> {
    Ok(serde_json::to_string_pretty(t)? + "\n")
}

/// Invariants every transcript must satisfy whatever the readout.
fn transcript_consistent(db: &Database, t: &ProtocolTranscript) -> bool {
    let aligned = t.rotated_keys[t.p] == t.key_lambda && db.keys()[t.lambda] == t.key_lambda;
    let hit = t.measured.index == t.p && t.measured.data == t.encrypted[t.p];
    let decrypted_ok = match t.decrypted {
        Some(d) => hit && d == db.items()[t.p],
        None => !hit,
    };
    aligned && decrypted_ok
}

fn write_scan(out: &mut dyn Write, scan: &GroverScan) -> Result<()> {
    writeln!(out, "  r   p_target             p_index")?;
    for pt in &scan.per_iteration {
        writeln!(out, "  {:<3} {:<20} {}", pt.r, pt.p_target, pt.p_index)?;
    }
    Ok(())
}

/// Replays the bundled example: Alice queries index 8 with her index
/// measurement fixed to 12, Bob queries index 4.
pub fn cmd_demo(out: &mut dyn Write) -> Result<i32> {
    const ROTATED: [u64; 16] = [7, 1, 11, 6, 15, 2, 12, 13, 0, 5, 9, 10, 14, 8, 3, 4];
    const ENCRYPTED: [u64; 16] = [2, 8, 13, 10, 13, 9, 7, 11, 5, 15, 14, 5, 8, 3, 5, 13];

    let db = example_database();
    let shape = db.shape();
    writeln!(
        out,
        "database: N={} n={} m={}",
        db.len(),
        shape.index_qubits(),
        shape.data_qubits()
    )?;
    writeln!(out, "  items: {}", join(db.items()))?;
    writeln!(out, "  keys:  {}", join(db.keys()))?;

    let alice = SessionOptions {
        client_id: "alice".to_owned(),
        forced_lambda: Some(12),
        iterations: Iterations::Fixed(EXAMPLE_PEAK_ITERATIONS),
        readout: SessionReadout::ForceSuccess,
    };
    let t = run_session(&db, 8, DEMO_SEED, &alice)?;
    let mut ok = transcript_consistent(&db, &t);
    writeln!(out, "\nalice: query index {}", t.p)?;
    writeln!(
        out,
        "  lambda={} key_lambda={} delta_s={}",
        t.lambda, t.key_lambda, t.delta_s.delta_s
    )?;
    writeln!(out, "  rotated keys:    {}", join(&t.rotated_keys))?;
    writeln!(out, "  encrypted items: {}", join(&t.encrypted))?;
    write_scan(out, &t.grover)?;
    let peak = t.grover.peak();
    let at_example = t.grover.at(EXAMPLE_PEAK_ITERATIONS).copied();
    writeln!(
        out,
        "  scan peak: r_star={} p_target={} (index peak at r={})",
        t.grover.r_star,
        peak.p_target,
        t.grover.r_star_index()
    )?;
    if let Some(pt) = at_example {
        writeln!(
            out,
            "  worked-example iteration count {}: p_target={} p_index={}{}",
            EXAMPLE_PEAK_ITERATIONS,
            pt.p_target,
            pt.p_index,
            if t.grover.r_star == EXAMPLE_PEAK_ITERATIONS {
                ""
            } else {
                " (differs from r_star)"
            }
        )?;
    }
    writeln!(
        out,
        "  measured ({}, {}) after r={}, decrypted {}",
        t.measured.index,
        t.measured.data,
        t.r_used,
        t.decrypted.map_or("nothing".to_owned(), |d| d.to_string())
    )?;
    for (label, good) in [
        ("lambda", t.lambda == 12 && t.key_lambda == 0),
        ("offset", t.delta_s.delta_s == 4),
        ("rotated keys", *t.rotated_keys == ROTATED),
        ("encrypted items", *t.encrypted == ENCRYPTED),
        ("decrypted value", t.decrypted == Some(5)),
    ] {
        if !good {
            writeln!(out, "  MISMATCH: {label}")?;
            ok = false;
        }
    }

    let bob = SessionOptions {
        client_id: "bob".to_owned(),
        forced_lambda: None,
        iterations: Iterations::Auto,
        readout: SessionReadout::ForceSuccess,
    };
    let b = run_session(&db, 4, DEMO_SEED + 1, &bob)?;
    ok &= transcript_consistent(&db, &b) && b.decrypted == Some(db.items()[4]);
    writeln!(out, "\nbob: query index {}", b.p)?;
    writeln!(
        out,
        "  lambda={} key_lambda={} delta_s={}",
        b.lambda, b.key_lambda, b.delta_s.delta_s
    )?;
    writeln!(out, "  rotated keys:    {}", join(&b.rotated_keys))?;
    writeln!(out, "  encrypted items: {}", join(&b.encrypted))?;
    writeln!(
        out,
        "  r_used={} p_target={} measured ({}, {}), decrypted {}",
        b.r_used,
        b.grover.peak().p_target,
        b.measured.index,
        b.measured.data,
        b.decrypted.map_or("nothing".to_owned(), |d| d.to_string())
    )?;

    writeln!(out, "\n{}", if ok { "demo OK" } else { "demo FAILED" })?;
    Ok(if ok { exit::OK } else { exit::FAILURE })
}

/// One session with decoy checks on both quantum transmissions.
pub fn cmd_query(config: &RunConfig, out: &mut dyn Write) -> Result<i32> {
    let db = config.database()?;
    let options = config.session_options();
    let session = match run_checked_session(
        &db,
        config.query_index,
        config.rng_seed,
        &options,
        &config.channel(),
    ) {
        Ok(s) => s,
        Err(CoreError::ChannelAborted {
            attempts,
            error_rate,
        }) => {
            writeln!(
                out,
                "aborted: decoy check failed on all {attempts} attempts (last error rate {error_rate})"
            )?;
            return Ok(exit::CHANNEL_ABORT);
        }
        Err(e) => return Err(e.into()),
    };
    let t = &session.transcript;
    let json = transcript_json(t)?;
    match &config.output_path {
        Some(path) => {
            fs::write(path, &json).with_context(|| format!("writing {}", path.display()))?
        }
        None => out.write_all(json.as_bytes())?,
    }
    if !transcript_consistent(&db, t) {
        writeln!(out, "transcript failed its consistency check")?;
        return Ok(exit::FAILURE);
    }
    match t.decrypted {
        Some(d) => {
            writeln!(
                out,
                "success: item {} = {d} (r={}, attempts={})",
                t.p, t.r_used, session.attempts
            )?;
            Ok(exit::OK)
        }
        None => {
            writeln!(
                out,
                "failure: measured ({}, {}) instead of ({}, {}) (r={}, attempts={})",
                t.measured.index,
                t.measured.data,
                t.p,
                t.encrypted[t.p],
                t.r_used,
                session.attempts
            )?;
            Ok(exit::QUERY_MISSED)
        }
    }
}

/// Grover scan of the data state a client with this configuration receives.
pub fn scan_for(config: &RunConfig) -> Result<GroverScan> {
    let db = config.database()?;
    let p = config.query_index;
    let key_state = step1_key_state(&db)?;
    let km = step2_measure_offset(
        &key_state,
        p,
        derive_seed(config.rng_seed, STEP2_STREAM),
        config.forced_lambda,
    )?;
    let transfer = step3_rotate_encrypt(&db, km.offset)?;
    Ok(grover_scan(&transfer.data_state, p, transfer.encrypted[p])?)
}

pub fn scan_csv(scan: &GroverScan) -> String {
    let mut s = String::from("r,p_target,p_index\n");
    for pt in &scan.per_iteration {
        s.push_str(&format!("{},{},{}\n", pt.r, pt.p_target, pt.p_index));
    }
    s
}

pub fn cmd_grover_scan(config: &RunConfig, out: &mut dyn Write) -> Result<i32> {
    let scan = scan_for(config)?;
    let csv = scan_csv(&scan);
    let summary = format!(
        "r_star={} p_target={} r_max={} index_peak={}",
        scan.r_star,
        scan.peak().p_target,
        scan.r_max,
        scan.r_star_index()
    );
    match &config.output_path {
        Some(path) => {
            fs::write(path, &csv).with_context(|| format!("writing {}", path.display()))?;
            writeln!(out, "{summary}")?;
        }
        None => {
            out.write_all(csv.as_bytes())?;
            writeln!(out, "# {summary}")?;
        }
    }
    Ok(exit::OK)
}

pub fn cmd_compare(config: &RunConfig, out: &mut dyn Write) -> Result<i32> {
    let csv = emit_comparison_tables(&config.sizes.0, config.formula_mode)?;
    match &config.output_path {
        Some(path) => {
            fs::write(path, &csv).with_context(|| format!("writing {}", path.display()))?
        }
        None => out.write_all(csv.as_bytes())?,
    }
    Ok(exit::OK)
}

pub fn cmd_decoy_test(config: &RunConfig, out: &mut dyn Write) -> Result<i32> {
    let count = config.decoy_count.unwrap_or(DEFAULT_TEST_DECOYS);
    if count == 0 {
        bail!("--decoys must be at least 1");
    }
    let seed = config.rng_seed;
    let sent = insert_decoys(0, count, derive_seed(seed, 0))?;
    let received = transmit(&sent, config.eavesdropper, derive_seed(seed, 1));
    let report = check_decoys(
        &sent,
        &received,
        config.decoy_threshold,
        derive_seed(seed, 2),
    )?;
    let json = serde_json::to_string(&report)? + "\n";
    if let Some(path) = &config.output_path {
        fs::write(path, &json).with_context(|| format!("writing {}", path.display()))?;
    }
    out.write_all(json.as_bytes())?;
    Ok(exit::OK)
}

/// Dispatches a parsed command line; errors are reported on stderr.
pub fn run(cli: Cli, out: &mut dyn Write) -> i32 {
    let result = match &cli.command {
        Command::Demo => cmd_demo(out),
        Command::Query(c) => cmd_query(c, out),
        Command::GroverScan(c) => cmd_grover_scan(c, out),
        Command::Compare(c) => cmd_compare(c, out),
        Command::DecoyTest(c) => cmd_decoy_test(c, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_lists() {
        assert_eq!("8:24:8".parse::<SizeList>().unwrap().0, vec![8, 16, 24]);
        assert_eq!("8".parse::<SizeList>().unwrap().0, vec![8]);
        assert_eq!("8, 1024".parse::<SizeList>().unwrap().0, vec![8, 1024]);
        assert!("8:4:1".parse::<SizeList>().is_err());
        assert!("8:16".parse::<SizeList>().is_err());
        assert!("8:16:0".parse::<SizeList>().is_err());
    }

    #[test]
    fn fixture_loads() {
        let db = example_database();
        assert_eq!(db.len(), 16);
        assert_eq!(db.shape().index_qubits(), 4);
        assert_eq!(db.shape().data_qubits(), 4);
        assert_eq!(db.items()[8], 5);
    }

    #[test]
    fn parse_errors() {
        assert!(parse_database(r#"{"items":[1,2,3],"keys":[1,2]}"#, false).is_err());
        let err = parse_database(r#"{"items":[1,-2],"keys":[1,2]}"#, false).unwrap_err();
        assert!(err.to_string().contains("negative"));
        let db = parse_database("item,key\n0,0\n", true).unwrap();
        assert_eq!(db.len(), 1);
        assert_eq!(db.shape().data_qubits(), 1);
        assert!(parse_database("a,b\n0,0\n", true).is_err());
    }

    #[test]
    fn clap_definition_is_valid() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
