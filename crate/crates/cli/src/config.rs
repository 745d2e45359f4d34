//! Run configuration and its validation.

use std::fmt;
use std::path::PathBuf;

use num_complex::Complex64;

/// Which experiment or suite a run executes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Verify,
    Teleport,
    OneBitTeleport,
    Conclusive,
    OneBitConclusive,
    Telepovm,
    EnsembleDemo,
}

impl CommandKind {
    pub fn name(&self) -> &'static str {
        match self {
            CommandKind::Verify => "verify",
            CommandKind::Teleport => "teleport",
            CommandKind::OneBitTeleport => "teleport --one-bit",
            CommandKind::Conclusive => "conclusive",
            CommandKind::OneBitConclusive => "conclusive --one-bit",
            CommandKind::Telepovm => "telepovm",
            CommandKind::EnsembleDemo => "ensemble-demo",
        }
    }
}

/// How the unknown input state is chosen each trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InputMode {
    /// A fresh Haar-random qubit per trial.
    Random,
    /// The same fixed `(a, b)` every trial.
    Fixed(Complex64, Complex64),
    /// No sampling: evaluate the full outcome tree with exact probabilities,
    /// either for random per-trial inputs or for one pinned input.
    EnumerateBranches(Option<(Complex64, Complex64)>),
}

impl InputMode {
    pub fn describe(&self) -> String {
        match self {
            InputMode::Random => "random".to_string(),
            InputMode::Fixed(a, b) => format!("fixed({a},{b})"),
            InputMode::EnumerateBranches(None) => "enumerate-branches".to_string(),
            InputMode::EnumerateBranches(Some((a, b))) => {
                format!("enumerate-branches[fixed({a},{b})]")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
}

impl OutputFormat {
    pub fn name(&self) -> &'static str {
        match self {
            OutputFormat::Json => "json",
            OutputFormat::Csv => "csv",
        }
    }
}

/// Everything one run needs; echoed verbatim into the report.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: CommandKind,
    /// Channel weight α² (Schmidt-ordered, so effectively in [½, 1]).
    pub alpha2: f64,
    /// Angle for the POVM demonstrations; `None` means a full sweep.
    pub theta: Option<f64>,
    pub trials: u64,
    pub seed: u64,
    pub input_mode: InputMode,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
    /// Verify-only: inject a deliberately broken POVM and demand the
    /// validator catches it.
    pub negative_control: bool,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.alpha2 > 0.0 && self.alpha2 <= 1.0) || !self.alpha2.is_finite() {
            return Err(ConfigError {
                field: "--alpha2",
                message: format!("must lie in (0, 1], got {}", self.alpha2),
            });
        }
        if self.trials < 1 {
            return Err(ConfigError {
                field: "--trials",
                message: "must be at least 1".to_string(),
            });
        }
        if let Some(theta) = self.theta {
            if !theta.is_finite() {
                return Err(ConfigError {
                    field: "--theta",
                    message: "must be finite".to_string(),
                });
            }
        }
        let fixed = match self.input_mode {
            InputMode::Fixed(a, b) => Some((a, b)),
            InputMode::EnumerateBranches(pinned) => pinned,
            InputMode::Random => None,
        };
        if let Some((a, b)) = fixed {
            let norm_sq = a.norm_sqr() + b.norm_sqr();
            if norm_sq < 1e-12 {
                return Err(ConfigError {
                    field: "--input",
                    message: "state has zero norm".to_string(),
                });
            }
        }
        Ok(())
    }

    /// The pinned input, normalized; `None` when inputs are random.
    pub fn fixed_input(&self) -> Option<(Complex64, Complex64)> {
        let fixed = match self.input_mode {
            InputMode::Fixed(a, b) => Some((a, b)),
            InputMode::EnumerateBranches(pinned) => pinned,
            InputMode::Random => None,
        };
        fixed.map(|(a, b)| {
            let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
            (a / norm, b / norm)
        })
    }
}

/// A rejected configuration, with the offending flag named.
#[derive(Debug, Clone)]
pub struct ConfigError {
    pub field: &'static str,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid {}: {}", self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

/// Parses one complex component in `re`, `im·i`, or `re±im·i` form, e.g.
/// `0.6`, `-0.8i`, `0.5-0.5i`, `1e-3+2e-4i`, `i`.
pub fn parse_complex(text: &str) -> Result<Complex64, ConfigError> {
    let err = |message: String| ConfigError {
        field: "--input",
        message,
    };
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(err("empty component".to_string()));
    }
    if let Ok(re) = s.parse::<f64>() {
        return Ok(Complex64::new(re, 0.0));
    }
    let body = match s.strip_suffix(['i', 'I']) {
        Some(b) => b,
        None => return Err(err(format!("cannot parse {text:?} as a complex number"))),
    };
    // split at the last sign that is not leading and not an exponent sign
    let bytes = body.as_bytes();
    let mut split = None;
    for idx in (1..bytes.len()).rev() {
        let ch = bytes[idx] as char;
        if (ch == '+' || ch == '-') && !matches!(bytes[idx - 1] as char, 'e' | 'E') {
            split = Some(idx);
            break;
        }
    }
    let imaginary = |part: &str| -> Result<f64, ConfigError> {
        match part {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => part
                .parse()
                .map_err(|_| err(format!("bad imaginary part in {text:?}"))),
        }
    };
    match split {
        Some(idx) => {
            let re: f64 = body[..idx]
                .parse()
                .map_err(|_| err(format!("bad real part in {text:?}")))?;
            Ok(Complex64::new(re, imaginary(&body[idx..])?))
        }
        None => Ok(Complex64::new(0.0, imaginary(body)?)),
    }
}

/// Parses `--input`: either `random` or two comma-separated complex
/// components `a,b`.
pub fn parse_input_mode(text: &str, enumerate: bool) -> Result<InputMode, ConfigError> {
    let fixed = if text == "random" {
        None
    } else {
        Some(parse_fixed(text)?)
    };
    Ok(match (enumerate, fixed) {
        (true, pinned) => InputMode::EnumerateBranches(pinned),
        (false, Some((a, b))) => InputMode::Fixed(a, b),
        (false, None) => InputMode::Random,
    })
}

fn parse_fixed(text: &str) -> Result<(Complex64, Complex64), ConfigError> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(ConfigError {
            field: "--input",
            message: format!("expected `a,b` or `random`, got {text:?}"),
        });
    }
    Ok((parse_complex(parts[0])?, parse_complex(parts[1])?))
}
