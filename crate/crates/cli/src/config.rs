//! Options shared by several subcommands.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use num_bigint::BigInt;

use gencollatz::cycle::Limits;
use gencollatz::mapping::MappingDef;
use gencollatz::nodes::{BoundConstant, MIN_PRECISION_BITS};
use gencollatz::Family;

/// Failure classes, mapped to exit codes by `main`.
#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or inconsistent options (exit 2).
    Usage(String),
    /// A check ran and did not pass (exit 1).
    Failed(String),
    /// I/O or computation errors (exit 1).
    Other(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failed(_) | CliError::Other(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Failed(m) => f.write_str(m),
            CliError::Other(e) => write!(f, "{e:#}"),
        }
    }
}

impl<E: Into<anyhow::Error>> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Other(e.into())
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
    #[default]
    Pretty,
}

/// Where the mapping comes from: a named family or a JSON file.
#[derive(Args, Clone, Debug)]
pub struct MappingArgs {
    /// collatz | 3x1 | matthews | perm:<1-6> | carnielli-T:<d> | carnielli-L:<d> | custom:<file>
    #[arg(long, short = 'f', conflicts_with = "file")]
    pub family: Option<String>,
    /// Mapping file `{"d": .., "branches": [{"m": .., "r": ..}, ..]}`, or a catalog holding one.
    #[arg(long)]
    pub file: Option<PathBuf>,
}

impl MappingArgs {
    /// The mapping and a label for reports.
    pub fn resolve(&self) -> CliResult<(MappingDef, String)> {
        match (&self.family, &self.file) {
            (Some(name), None) => {
                let fam: Family = name.parse().map_err(|e| usage(format!("{e}")))?;
                let m = fam.mapping().map_err(|e| match fam {
                    Family::Custom(_) => CliError::Other(e.into()),
                    _ => usage(e.to_string()),
                })?;
                Ok((m, fam.to_string()))
            }
            (None, Some(path)) => Ok((load_mapping_file(path)?, path.display().to_string())),
            _ => Err(usage("give either --family or --file")),
        }
    }
}

/// Accepts a bare mapping or any JSON object with a `mapping` key.
fn load_mapping_file(path: &Path) -> CliResult<MappingDef> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| anyhow::anyhow!("cannot read {}: {e}", path.display()))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| anyhow::anyhow!("invalid JSON in {}: {e}", path.display()))?;
    let inner = value.get("mapping").cloned().unwrap_or(value);
    serde_json::from_value(inner)
        .map_err(|e| anyhow::anyhow!("invalid mapping in {}: {e}", path.display()).into())
}

#[derive(Args, Clone, Debug)]
pub struct CutoffArgs {
    /// Steps before a start is reported as undecided.
    #[arg(long, default_value_t = 1_000_000)]
    pub max_steps: u64,
    /// Magnitude above which a start is reported as undecided.
    #[arg(long, default_value = "1000000000000000000000000000000", allow_hyphen_values = true)]
    pub max_magnitude: BigInt,
}

impl CutoffArgs {
    pub fn limits(&self) -> CliResult<Limits> {
        if self.max_steps == 0 || self.max_magnitude <= BigInt::from(0) {
            return Err(usage("cutoffs must be positive"));
        }
        Ok(Limits {
            max_steps: self.max_steps,
            max_magnitude: self.max_magnitude.clone(),
        })
    }
}

#[derive(Args, Clone, Debug)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = OutputFormat::Pretty)]
    pub format: OutputFormat,
    /// Write to this file instead of stdout.
    #[arg(long, short = 'o')]
    pub output: Option<PathBuf>,
}

impl OutputArgs {
    pub fn emit(&self, text: &str) -> CliResult {
        emit(self.output.as_deref(), text)
    }
}

fn emit(path: Option<&Path>, text: &str) -> CliResult {
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| anyhow::anyhow!("cannot write {}: {e}", p.display()).into()),
        None => {
            print!("{text}");
            if !text.ends_with('\n') {
                println!();
            }
            Ok(())
        }
    }
}

/// Settings after validation, shared by the computing subcommands.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub mapping: MappingDef,
    pub label: String,
    pub limits: Limits,
    pub precision_bits: u32,
    pub constant: Option<BoundConstant>,
    pub format: OutputFormat,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(
        mapping: &MappingArgs,
        cutoffs: Option<&CutoffArgs>,
        precision_bits: u32,
        constant: Option<&str>,
        out: &OutputArgs,
    ) -> CliResult<Self> {
        let (mapping, label) = mapping.resolve()?;
        Ok(RunConfig {
            mapping,
            label,
            limits: match cutoffs {
                Some(c) => c.limits()?,
                None => Limits::default(),
            },
            precision_bits: check_precision(precision_bits)?,
            constant: constant.map(parse_constant).transpose()?,
            format: out.format,
            output: out.output.clone(),
        })
    }
}

impl RunConfig {
    pub fn emit(&self, text: &str) -> CliResult {
        emit(self.output.as_deref(), text)
    }
}

pub fn check_precision(bits: u32) -> CliResult<u32> {
    if bits < MIN_PRECISION_BITS {
        return Err(usage(format!(
            "precision must be at least {MIN_PRECISION_BITS} bits, got {bits}"
        )));
    }
    Ok(bits)
}

pub fn parse_constant(s: &str) -> CliResult<BoundConstant> {
    s.parse()
        .map_err(|e| usage(format!("bad constant '{s}': {e}")))
}
