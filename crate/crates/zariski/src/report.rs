//! Report envelope shared by every subcommand. Reports carry no timestamps,
//! so identical inputs give byte-identical output.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::config::Format;
use crate::error::{CliError, Result};
use crate::io::InputDigest;

/// Stated in the header of every orbit-type report.
pub const FINITE_SCOPE: &str = "finite reduction: a finite net of requirements on a finite-dimensional torus; \
     witnesses certify these requirements only, not density in an infinite-dimensional torus";

#[derive(Debug, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    /// What was computed, in words.
    pub computation: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scope: Option<&'static str>,
    pub input_sha256: String,
    pub inputs: Vec<InputDigest>,
    pub parameters: Value,
    pub result: Value,
    /// Result fields holding IEEE-754 doubles rather than exact values.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub floating_point_fields: Vec<&'static str>,
    /// Independent re-checks of the result, one line each.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub verification: Vec<String>,
    #[serde(skip)]
    pub summary: Vec<String>,
}

impl Report {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("report serializes");
                s.push('\n');
                s
            }
            Format::Text => {
                let mut out = format!("{} {} — {}\n", self.tool, self.command, self.computation);
                if let Some(scope) = self.scope {
                    out += &format!("scope: {scope}\n");
                }
                out += &format!("input sha256: {}\n", self.input_sha256);
                for d in &self.inputs {
                    out += &format!("  {}: {}\n", d.role, d.sha256);
                }
                out.push('\n');
                for line in &self.summary {
                    out += line;
                    out.push('\n');
                }
                if !self.verification.is_empty() {
                    out += "\nverification:\n";
                    for line in &self.verification {
                        out += &format!("  {line}\n");
                    }
                }
                out
            }
        }
    }

    pub fn write(&self, format: Format, output: Option<&Path>) -> Result<()> {
        let text = self.render(format);
        match output {
            Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source }),
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout
                    .write_all(text.as_bytes())
                    .map_err(|source| CliError::Io { path: "<stdout>".into(), source })
            }
        }
    }
}
