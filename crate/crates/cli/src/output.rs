use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use frac_gelfand::Error;
use serde::Serialize;
use serde_json::Value;

use crate::{Cli, Format};

/// How a run failed, which decides the exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad arguments: exit 2.
    Usage(String),
    /// Solver trouble or a failed tolerance check: exit 1.
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_) | Error::Regime { .. } | Error::Config(_) | Error::Unsupported(_) => {
                Failure::Usage(e.to_string())
            }
            other => Failure::Numerical(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Numerical(format!("writing artifacts: {e}"))
    }
}

pub type Outcome<T> = std::result::Result<T, Failure>;

/// Everything that determines a run; embedded in each artifact.
#[derive(Debug, Serialize)]
pub struct RunRecord<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub out_dir: &'a Path,
    pub format: Format,
    pub config: &'a crate::Command,
}

impl<'a> RunRecord<'a> {
    pub fn new(cli: &'a Cli) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            out_dir: &cli.out_dir,
            format: cli.format,
            config: &cli.command,
        }
    }

    fn json(&self) -> String {
        serde_json::to_string(self).expect("run record serializes")
    }
}

/// Writes artifacts under the output directory.
pub struct Artifacts<'a> {
    dir: PathBuf,
    record: RunRecord<'a>,
    written: Vec<PathBuf>,
}

impl<'a> Artifacts<'a> {
    pub fn new(cli: &'a Cli) -> Outcome<Self> {
        fs::create_dir_all(&cli.out_dir)?;
        let record = RunRecord::new(cli);
        let mut out = Self {
            dir: cli.out_dir.clone(),
            record,
            written: Vec::new(),
        };
        let meta = serde_json::to_string_pretty(&out.record).expect("run record serializes");
        out.write_raw("run.json", &(meta + "\n"))?;
        Ok(out)
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn write_raw(&mut self, name: &str, text: &str) -> Outcome<()> {
        let path = self.path(name);
        fs::write(&path, text)?;
        self.written.push(path);
        Ok(())
    }

    /// CSV with the run record as a leading `#` comment.
    pub fn csv(&mut self, name: &str, body: &str) -> Outcome<()> {
        let text = format!("# {}\n{body}", self.record.json());
        self.write_raw(name, &text)
    }

    /// JSON object `{ "run": ..., "result": ... }`.
    pub fn json<T: Serialize>(&mut self, name: &str, result: &T) -> Outcome<()> {
        let doc = serde_json::json!({ "run": &self.record, "result": result });
        let text = serde_json::to_string_pretty(&doc).expect("result serializes");
        self.write_raw(name, &(text + "\n"))
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}

/// Write to stdout, ignoring a closed pipe.
pub fn say(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

/// Print `rows` under `header` in the requested format.
pub fn emit(format: Format, header: &[&str], rows: &[Vec<String>], json: &Value) {
    match format {
        Format::Table => say(&table(header, rows)),
        Format::Csv => {
            let mut out = header.join(",") + "\n";
            for r in rows {
                out += &(r.join(",") + "\n");
            }
            say(&out);
        }
        Format::Json => say(&(serde_json::to_string_pretty(json).expect("json value") + "\n")),
    }
}

pub fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut width: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, c) in width.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let line = |cells: Vec<&str>| {
        cells
            .iter()
            .zip(&width)
            .map(|(c, w)| format!("{c:>w$}"))
            .collect::<Vec<_>>()
            .join("  ")
    };
    let mut out = line(header.to_vec()) + "\n";
    for r in rows {
        out += &line(r.iter().map(String::as_str).collect());
        out.push('\n');
    }
    out
}

pub fn note_artifacts(format: Format, paths: &[PathBuf]) {
    if format == Format::Table {
        for p in paths {
            say(&format!("wrote {}\n", display(p)));
        }
    }
}

fn display(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}
