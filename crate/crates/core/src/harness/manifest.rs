//! Canonical dataset manifest: a UTF-8 CSV with header `ref_path,dist_path,mos`,
//! optional `#` comment lines, and an optional
//! `# mos_convention: higher_better|lower_better` comment.
//!
//! Paths are relative to the manifest's directory.

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const MANIFEST_HEADER: [&str; 3] = ["ref_path", "dist_path", "mos"];
const CONVENTION_KEY: &str = "mos_convention:";

/// One (reference, distorted, subjective score) record.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalSample {
    pub ref_path: PathBuf,
    pub dist_path: PathBuf,
    pub mos: f64,
}

/// Direction of the subjective scale.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MosConvention {
    #[default]
    HigherBetter,
    LowerBetter,
}

impl fmt::Display for MosConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MosConvention::HigherBetter => "higher_better",
            MosConvention::LowerBetter => "lower_better",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Manifest {
    pub samples: Vec<EvalSample>,
    pub convention: MosConvention,
}

fn parse_convention(line: &str, line_no: u64) -> Result<Option<MosConvention>> {
    let body = line.trim_start_matches('#').trim();
    let Some(value) = body.strip_prefix(CONVENTION_KEY) else {
        return Ok(None);
    };
    match value.trim() {
        "higher_better" => Ok(Some(MosConvention::HigherBetter)),
        "lower_better" => Ok(Some(MosConvention::LowerBetter)),
        other => Err(Error::Parse {
            line: line_no,
            message: format!("unknown mos convention `{other}`"),
        }),
    }
}

/// Parses manifest text; relative paths are joined onto `base_dir`.
pub fn parse_manifest(text: &str, base_dir: &Path) -> Result<Manifest> {
    let mut convention = MosConvention::default();
    for (i, line) in text.lines().enumerate() {
        if line.trim_start().starts_with('#') {
            if let Some(c) = parse_convention(line.trim_start(), i as u64 + 1)? {
                convention = c;
            }
        }
    }

    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let headers = reader.headers().map_err(|e| Error::Parse {
        line: e.position().map_or(1, |p| p.line()),
        message: e.to_string(),
    })?;
    if headers.iter().collect::<Vec<_>>() != MANIFEST_HEADER {
        let line = headers.position().map_or(1, |p| p.line());
        return Err(Error::Parse {
            line,
            message: format!(
                "expected header `ref_path,dist_path,mos`, got `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }

    let mut samples = Vec::new();
    let mut seen = HashSet::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let (ref_path, dist_path, mos) = (&record[0], &record[1], &record[2]);
        if ref_path.is_empty() || dist_path.is_empty() {
            return Err(Error::Parse {
                line,
                message: "empty path".into(),
            });
        }
        let mos: f64 = mos.parse().map_err(|_| Error::Parse {
            line,
            message: format!("mos `{mos}` is not a number"),
        })?;
        if !mos.is_finite() {
            return Err(Error::Parse {
                line,
                message: format!("mos `{mos}` is not finite"),
            });
        }
        if !seen.insert((ref_path.to_string(), dist_path.to_string())) {
            return Err(Error::Duplicate {
                line,
                ref_path: ref_path.into(),
                dist_path: dist_path.into(),
            });
        }
        samples.push(EvalSample {
            ref_path: base_dir.join(ref_path),
            dist_path: base_dir.join(dist_path),
            mos,
        });
    }
    Ok(Manifest {
        samples,
        convention,
    })
}

/// Reads a manifest file.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<Manifest> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or_else(|| Path::new(""));
    parse_manifest(&text, base)
}

fn relative_to(path: &Path, base: &Path) -> PathBuf {
    let absolute = |p: &Path| std::path::absolute(p).unwrap_or_else(|_| p.to_path_buf());
    pathdiff::diff_paths(absolute(path), absolute(base)).unwrap_or_else(|| path.to_path_buf())
}

/// Renders a manifest with paths made relative to `base_dir`.
pub fn render_manifest(manifest: &Manifest, base_dir: &Path) -> Result<String> {
    let mut out = format!("# {CONVENTION_KEY} {}\n", manifest.convention);
    let mut writer = csv::WriterBuilder::new().from_writer(Vec::new());
    let ser = |e: csv::Error| Error::Serialize(e.to_string());
    writer.write_record(MANIFEST_HEADER).map_err(ser)?;
    for s in &manifest.samples {
        let r = relative_to(&s.ref_path, base_dir);
        let d = relative_to(&s.dist_path, base_dir);
        writer
            .write_record([
                r.to_string_lossy().as_ref(),
                d.to_string_lossy().as_ref(),
                &s.mos.to_string(),
            ])
            .map_err(ser)?;
    }
    let bytes = writer.into_inner().map_err(|e| Error::Serialize(e.to_string()))?;
    out.push_str(&String::from_utf8(bytes).expect("csv output of utf-8 fields"));
    Ok(out)
}

/// Writes `manifest` to `path`, storing paths relative to its directory.
pub fn write_manifest(manifest: &Manifest, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let text = render_manifest(manifest, &dir)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
