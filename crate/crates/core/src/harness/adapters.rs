//! Converters from public dataset layouts to the canonical manifest.
//!
//! * TID2013: `mos_with_names.txt` lists `<mos> <iRR_DD_L.bmp>` per line;
//!   distorted images live in `distorted_images/`, references in
//!   `reference_images/IRR.BMP`.
//! * PIPAL (training set): one label file per reference in `Train_Label/`
//!   with `<distorted name>,<score>` lines, reference images in `Train_Ref/`,
//!   distorted images in `Train_Dis/`. The distorted name's prefix up to the
//!   first `_` is the reference stem.
//!
//! File names are matched case-insensitively, since both datasets have been
//! redistributed with inconsistent casing.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use super::manifest::{EvalSample, Manifest, MosConvention};
use crate::{Error, Result};

pub const TID2013_LISTING: &str = "mos_with_names.txt";
const TID2013_REF_DIR: &str = "reference_images";
const TID2013_DIST_DIR: &str = "distorted_images";

const PIPAL_LABEL_DIRS: [&str; 3] = ["Train_Label", "Train_label", "labels"];
const PIPAL_REF_DIRS: [&str; 3] = ["Train_Ref", "Train_ref", "reference"];
const PIPAL_DIST_DIRS: [&str; 4] = ["Train_Dis", "Train_Distort", "Distortion", "distorted"];

/// Lower-cased file name → actual path for every file in `dir`.
fn index_dir(dir: &Path) -> Result<HashMap<String, PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut index = HashMap::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        if entry.file_type().map_err(|e| Error::io(dir, e))?.is_file() {
            let name = entry.file_name().to_string_lossy().to_lowercase();
            index.insert(name, entry.path());
        }
    }
    Ok(index)
}

fn find_subdir(root: &Path, candidates: &[&str]) -> Result<PathBuf> {
    candidates
        .iter()
        .map(|c| root.join(c))
        .find(|p| p.is_dir())
        .ok_or_else(|| {
            Error::io(
                root.join(candidates[0]),
                std::io::Error::new(
                    std::io::ErrorKind::NotFound,
                    format!("none of {candidates:?} found"),
                ),
            )
        })
}

/// Reference stem `IRR` of a TID2013 distorted name `iRR_DD_L.ext`.
fn tid2013_reference_stem(dist_name: &str) -> Option<String> {
    let stem = dist_name.split('_').next()?;
    let digits = stem.strip_prefix(['i', 'I'])?;
    if digits.len() == 2 && digits.chars().all(|c| c.is_ascii_digit()) {
        Some(format!("i{digits}"))
    } else {
        None
    }
}

/// Builds the manifest of a TID2013 distribution rooted at `root`.
pub fn adapt_tid2013(root: impl AsRef<Path>) -> Result<Manifest> {
    let root = root.as_ref();
    let listing = root.join(TID2013_LISTING);
    let text = std::fs::read_to_string(&listing).map_err(|e| Error::io(&listing, e))?;
    let refs = index_dir(&root.join(TID2013_REF_DIR))?;
    let dists = index_dir(&root.join(TID2013_DIST_DIR))?;

    let mut samples = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let (Some(mos), Some(name)) = (fields.next(), fields.next()) else {
            return Err(Error::Parse {
                line: i as u64 + 1,
                message: format!("expected `<mos> <file>`, got `{line}`"),
            });
        };
        let mos: f64 = mos.parse().map_err(|_| Error::Parse {
            line: i as u64 + 1,
            message: format!("mos `{mos}` is not a number"),
        })?;
        let stem = tid2013_reference_stem(name).ok_or_else(|| {
            Error::Adapter(format!("`{name}` does not follow the iRR_DD_L naming"))
        })?;
        let ref_path = refs
            .get(&format!("{stem}.bmp"))
            .ok_or_else(|| Error::Adapter(format!("no reference image for `{name}`")))?;
        let dist_path = dists
            .get(&name.to_lowercase())
            .ok_or_else(|| Error::Adapter(format!("distorted image `{name}` not found")))?;
        samples.push(EvalSample {
            ref_path: ref_path.clone(),
            dist_path: dist_path.clone(),
            mos,
        });
    }
    Ok(Manifest {
        samples,
        convention: MosConvention::HigherBetter,
    })
}

/// Builds the manifest of a PIPAL training set rooted at `root`.
///
/// Label files are visited in name order so the manifest is deterministic.
pub fn adapt_pipal(root: impl AsRef<Path>) -> Result<Manifest> {
    let root = root.as_ref();
    let label_dir = find_subdir(root, &PIPAL_LABEL_DIRS)?;
    let refs: HashMap<String, PathBuf> = index_dir(&find_subdir(root, &PIPAL_REF_DIRS)?)?
        .into_iter()
        .filter_map(|(name, path)| {
            let stem = Path::new(&name).file_stem()?.to_string_lossy().into_owned();
            Some((stem, path))
        })
        .collect();
    let dists = index_dir(&find_subdir(root, &PIPAL_DIST_DIRS)?)?;

    let mut label_files: Vec<PathBuf> = index_dir(&label_dir)?
        .into_values()
        .filter(|p| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("txt")))
        .collect();
    label_files.sort();

    let mut samples = Vec::new();
    for label in &label_files {
        let text = std::fs::read_to_string(label).map_err(|e| Error::io(label, e))?;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |message: String| Error::Adapter(format!(
                "{}:{}: {message}",
                label.display(),
                i + 1
            ));
            let (name, score) = line
                .split_once(',')
                .ok_or_else(|| parse_err(format!("expected `<file>,<score>`, got `{line}`")))?;
            let (name, score) = (name.trim(), score.trim());
            let mos: f64 = score
                .parse()
                .map_err(|_| parse_err(format!("score `{score}` is not a number")))?;
            let ref_stem = name.split('_').next().unwrap_or(name).to_lowercase();
            let ref_path = refs
                .get(&ref_stem)
                .ok_or_else(|| Error::Adapter(format!("no reference image for `{name}`")))?;
            let dist_path = dists
                .get(&name.to_lowercase())
                .ok_or_else(|| Error::Adapter(format!("distorted image `{name}` not found")))?;
            samples.push(EvalSample {
                ref_path: ref_path.clone(),
                dist_path: dist_path.clone(),
                mos,
            });
        }
    }
    Ok(Manifest {
        samples,
        convention: MosConvention::HigherBetter,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn touch(path: &Path) {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(path, b"").unwrap();
    }

    #[test]
    fn tid2013_layout() {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path();
        touch(&root.join("reference_images/I01.BMP"));
        touch(&root.join("reference_images/I02.BMP"));
        touch(&root.join("distorted_images/i01_01_1.bmp"));
        touch(&root.join("distorted_images/i02_07_5.bmp"));
        std::fs::write(
            root.join(TID2013_LISTING),
            "5.51429 i01_01_1.bmp\n3.1 i02_07_5.bmp\n",
        )
        .unwrap();
        let m = adapt_tid2013(root).unwrap();
        assert_eq!(m.samples.len(), 2);
        assert_eq!(m.samples[0].ref_path, root.join("reference_images/I01.BMP"));
        assert_eq!(m.samples[0].dist_path, root.join("distorted_images/i01_01_1.bmp"));
        assert_eq!(m.samples[0].mos, 5.51429);
    }

    #[test]
    fn tid2013_missing_reference() {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path();
        touch(&root.join("reference_images/I01.BMP"));
        touch(&root.join("distorted_images/i03_01_1.bmp"));
        std::fs::write(root.join(TID2013_LISTING), "4.0 i03_01_1.bmp\n").unwrap();
        match adapt_tid2013(root) {
            Err(Error::Adapter(msg)) => assert!(msg.contains("i03_01_1.bmp")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_directory_is_io_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(adapt_tid2013(dir.path()), Err(Error::Io { .. })));
        assert!(matches!(adapt_pipal(dir.path()), Err(Error::Io { .. })));
    }

    #[test]
    fn pipal_layout() {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path();
        touch(&root.join("Train_Ref/A0001.bmp"));
        touch(&root.join("Train_Dis/A0001_00_00.bmp"));
        touch(&root.join("Train_Dis/A0001_01_03.bmp"));
        std::fs::create_dir_all(root.join("Train_Label")).unwrap();
        std::fs::write(
            root.join("Train_Label/A0001.txt"),
            "A0001_00_00.bmp,1520.0\nA0001_01_03.bmp,1388.5\n",
        )
        .unwrap();
        let m = adapt_pipal(root).unwrap();
        assert_eq!(m.samples.len(), 2);
        assert_eq!(m.samples[0].ref_path, root.join("Train_Ref/A0001.bmp"));
        assert_eq!(m.samples[0].dist_path, root.join("Train_Dis/A0001_00_00.bmp"));
        assert_eq!(m.samples[0].mos, 1520.0);
    }

    #[test]
    fn pipal_missing_image() {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path();
        touch(&root.join("Train_Ref/A0001.bmp"));
        std::fs::create_dir_all(root.join("Train_Dis")).unwrap();
        std::fs::create_dir_all(root.join("Train_Label")).unwrap();
        std::fs::write(root.join("Train_Label/A0001.txt"), "A0001_00_00.bmp,1520.0\n").unwrap();
        assert!(matches!(adapt_pipal(root), Err(Error::Adapter(_))));
    }
}
