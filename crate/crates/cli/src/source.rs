use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::Args;
use girthcut_core::numerics::PrecisionContext;
use girthcut_core::schedule::{parse_file, PaperParams, Schedule, ScheduleFile};

/// Bad flags or unreadable input; exits with status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Debug, Clone, Args)]
pub struct ScheduleArgs {
    /// Schedule file (parameter or explicit form)
    #[arg(long, value_name = "PATH", conflicts_with = "paper_defaults")]
    pub schedule: Option<PathBuf>,
    /// Use the built-in default parameters
    #[arg(long)]
    pub paper_defaults: bool,
}

/// A loaded schedule and where it came from.
pub struct Source {
    pub label: String,
    pub file: ScheduleFile,
}

impl Source {
    pub fn schedule(&self) -> Schedule {
        self.file.schedule()
    }

    pub fn params(&self) -> Option<&PaperParams> {
        match &self.file {
            ScheduleFile::Params(p) => Some(p),
            ScheduleFile::Explicit(_) => None,
        }
    }
}

impl ScheduleArgs {
    pub fn load(&self) -> anyhow::Result<Source> {
        match (&self.schedule, self.paper_defaults) {
            (Some(path), _) => load_file(path),
            (None, true) => Ok(Source {
                label: "paper-defaults".into(),
                file: ScheduleFile::Params(PaperParams::paper_defaults()),
            }),
            (None, false) => Err(usage(
                "one of --schedule PATH or --paper-defaults is required",
            )),
        }
    }

    /// Like [`load`](Self::load) but falls back to the defaults.
    pub fn load_or_default(&self) -> anyhow::Result<Source> {
        if self.schedule.is_none() {
            return Ok(Source {
                label: "paper-defaults".into(),
                file: ScheduleFile::Params(PaperParams::paper_defaults()),
            });
        }
        self.load()
    }
}

fn load_file(path: &Path) -> anyhow::Result<Source> {
    let text = fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read schedule file {}: {e}", path.display())))?;
    let file = parse_file(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    Ok(Source {
        label: path.display().to_string(),
        file,
    })
}

pub fn precision(bits: u32) -> anyhow::Result<PrecisionContext> {
    PrecisionContext::new(bits).map_err(|e| usage(format!("--precision {bits}: {e}")))
}

/// Output file, or stdout.
pub fn output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => {
            Box::new(io::BufWriter::new(fs::File::create(p).map_err(|e| {
                usage(format!("cannot create {}: {e}", p.display()))
            })?))
        }
        None => Box::new(io::BufWriter::new(io::stdout().lock())),
    })
}

/// Comma-separated list of values.
pub fn list<T>(
    flag: &str,
    text: &str,
    parse: impl Fn(&str) -> Result<T, String>,
) -> anyhow::Result<Vec<T>> {
    text.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| parse(t).map_err(|e| usage(format!("{flag} {t}: {e}"))))
        .collect()
}
