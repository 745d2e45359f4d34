//! Machine-readable reports.
//!
//! JSON reports are schema-versioned and serialized with every float at 17
//! significant digits (`{:.16e}`), so parsing a report recovers the exact
//! f64 values and replaying a config reproduces the bytes. CSV output is a
//! flat per-record table for spreadsheet-level analysis.

use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::config::RunConfig;

pub const SCHEMA_VERSION: u32 = 1;

/// Echo of the inputs that produced a report.
#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub command: String,
    pub alpha2: f64,
    pub theta: Option<f64>,
    pub trials: u64,
    pub seed: u64,
    pub input_mode: String,
    pub format: String,
}

impl ConfigEcho {
    pub fn from_config(config: &RunConfig) -> Self {
        Self {
            command: config.command.name().to_string(),
            alpha2: config.alpha2,
            theta: config.theta,
            trials: config.trials,
            seed: config.seed,
            input_mode: config.input_mode.describe(),
            format: config.format.name().to_string(),
        }
    }
}

/// Aggregate statistics over the trials of one protocol run.
#[derive(Debug, Clone, Serialize)]
pub struct Aggregates {
    pub trials: u64,
    pub conclusive_count: f64,
    /// Fraction of certified-successful trials (probability mass in
    /// enumerate mode).
    pub success_rate: f64,
    /// `sqrt(p̂(1−p̂)/N)`.
    pub success_rate_stderr: f64,
    /// Mean fidelity over every trial that delivered a state.
    pub mean_fidelity: Option<f64>,
    pub mean_fidelity_on_success: Option<f64>,
    pub min_success_fidelity: Option<f64>,
    pub mean_bits_sent: f64,
}

/// A named theoretical reference value the run should reproduce.
#[derive(Debug, Clone, Serialize)]
pub struct TheoryLine {
    pub name: String,
    pub value: f64,
}

/// One verification line: a named check, its residual, pass/fail.
#[derive(Debug, Clone, Serialize)]
pub struct CheckLine {
    pub name: String,
    pub passed: bool,
    pub residual: f64,
    pub detail: String,
}

/// One per-trial record (or per-branch record in enumerate mode, where the
/// probability column carries the exact branch weight).
#[derive(Debug, Clone, Serialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub steps: String,
    pub conclusive: bool,
    pub fidelity: Option<f64>,
    pub bits_sent: u8,
    pub probability: f64,
}

/// The full report for one run.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: u32,
    /// Unix seconds; the only field excluded from replay comparisons.
    pub timestamp_unix: u64,
    pub config: ConfigEcho,
    pub aggregates: Option<Aggregates>,
    pub theory: Vec<TheoryLine>,
    pub checks: Vec<CheckLine>,
    /// Seed to pass back for an identical rerun.
    pub replay_seed: u64,
    #[serde(skip)]
    pub records: Vec<TrialRecord>,
}

impl Report {
    pub fn new(config: &RunConfig) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            timestamp_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            config: ConfigEcho::from_config(config),
            aggregates: None,
            theory: Vec::new(),
            checks: Vec::new(),
            replay_seed: config.seed,
            records: Vec::new(),
        }
    }

    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// JSON with full-precision floats.
    pub fn to_json(&self) -> String {
        let mut buffer = Vec::new();
        let mut serializer = serde_json::Serializer::with_formatter(&mut buffer, PreciseFormatter);
        self.serialize(&mut serializer)
            .expect("report serialization cannot fail");
        String::from_utf8(buffer).expect("serde_json emits UTF-8")
    }

    /// Flat per-record CSV.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("trial,steps,conclusive,fidelity,bits_sent,probability\n");
        for r in &self.records {
            let fidelity = r.fidelity.map(|f| format!("{f:.16e}")).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{:.16e}\n",
                r.trial, r.steps, r.conclusive, fidelity, r.bits_sent, r.probability
            ));
        }
        out
    }

    /// Human summary printed to standard output.
    pub fn summary(&self) -> String {
        let mut lines = vec![format!(
            "{} (seed {}, trials {})",
            self.config.command, self.config.seed, self.config.trials
        )];
        if let Some(a) = &self.aggregates {
            lines.push(format!(
                "  success rate {:.6} ± {:.6} ({} conclusive)",
                a.success_rate, a.success_rate_stderr, a.conclusive_count
            ));
            if let Some(f) = a.mean_fidelity {
                lines.push(format!("  mean fidelity {f:.12}"));
            }
            if let Some(f) = a.mean_fidelity_on_success {
                lines.push(format!("  mean fidelity on success {f:.12}"));
            }
            if let Some(f) = a.min_success_fidelity {
                lines.push(format!("  min success fidelity {f:.12}"));
            }
        }
        for t in &self.theory {
            lines.push(format!("  theory: {} = {:.6}", t.name, t.value));
        }
        for c in &self.checks {
            lines.push(format!(
                "  {} {} residual={:.3e} {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.residual,
                c.detail
            ));
        }
        lines.join("\n")
    }
}

/// serde_json formatter that writes every float as `{:.16e}` — 17
/// significant digits, enough to round-trip any f64 exactly.
struct PreciseFormatter;

impl serde_json::ser::Formatter for PreciseFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        write!(writer, "{value:.8e}")
    }
}

/// Resolves the output path, honoring the optional `TELEPOVM_OUT_DIR`
/// directory override for relative paths.
pub fn resolve_output_path(path: &Path) -> PathBuf {
    if path.is_absolute() {
        return path.to_path_buf();
    }
    match std::env::var_os("TELEPOVM_OUT_DIR") {
        Some(dir) => PathBuf::from(dir).join(path),
        None => path.to_path_buf(),
    }
}
