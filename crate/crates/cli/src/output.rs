//! Artifact writing. Every CSV schema used by the commands is pinned here.

use std::fs;
use std::path::{Path, PathBuf};

use crate::commands::CliError;

pub const BRANCH_HEADER: &[&str] = &["plane", "re", "im", "multiplicity", "abs", "classification"];
pub const CURVE_HEADER: &[&str] = &["s", "re_t", "im_t", "re_alpha", "im_alpha"];
pub const COEFFICIENT_HEADER: &[&str] = &["i", "j", "pi_ij"];
pub const COMPARE_HEADER: &[&str] = &["i", "j", "analytic", "oracle", "abs_diff"];
pub const FREQUENCY_HEADER: &[&str] = &["i", "j", "count", "frequency"];
pub const SWEEP_HEADER: &[&str] = &["plane", "re", "im"];
/// Fixed part of the boundary-condition header; `re_g_K_L, im_g_K_L` pairs
/// follow, one per isolated scalar.
pub const CONDITION_HEADER: &[&str] = &[
    "s", "re_t", "im_t", "re_alpha", "im_alpha", "re_a_t", "im_a_t", "re_a_alpha", "im_a_alpha",
];

/// Where artifacts go: files in a directory, or the primary one to stdout.
pub struct Sink {
    dir: Option<PathBuf>,
}

impl Sink {
    pub fn new(dir: Option<&Path>) -> Result<Sink, CliError> {
        if let Some(d) = dir {
            fs::create_dir_all(d).map_err(|e| CliError::Io(d.display().to_string(), e))?;
        }
        Ok(Sink {
            dir: dir.map(Path::to_path_buf),
        })
    }

    pub fn has_dir(&self) -> bool {
        self.dir.is_some()
    }

    /// Writes `name`; without a directory only primary artifacts are printed.
    pub fn emit(&self, name: &str, contents: &str, primary: bool) -> Result<(), CliError> {
        match &self.dir {
            Some(d) => {
                let path = d.join(name);
                fs::write(&path, contents).map_err(|e| CliError::Io(path.display().to_string(), e))
            }
            None => {
                if primary {
                    print!("{contents}");
                }
                Ok(())
            }
        }
    }
}

/// CSV text from a header and rows of already formatted fields.
pub fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io("csv buffer".into(), e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn json_text<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable report");
    s.push('\n');
    s
}

pub fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}
