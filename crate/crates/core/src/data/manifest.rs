//! Dataset manifest: a UTF-8 text file listing one rainy/clean pair per
//! line, tab-separated, with `#` comments. Relative paths resolve against
//! the manifest's own directory so a dataset folder can move as a unit.

use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManifestEntry {
    pub rainy: PathBuf,
    pub clean: PathBuf,
}

#[derive(Clone, Debug)]
pub struct DatasetManifest {
    pub entries: Vec<ManifestEntry>,
}

impl DatasetManifest {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("cannot read manifest {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("empty manifest: {path} lists no pairs")]
    Empty { path: PathBuf },
    #[error("manifest {path} line {line}: {message}")]
    Malformed {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

/// Parses `rainy<TAB>clean` lines, preserving order. Blank lines and lines
/// starting with `#` are skipped.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<DatasetManifest, ManifestError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ManifestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let resolve = |p: &str| -> PathBuf {
        let pb = PathBuf::from(p);
        if pb.is_absolute() {
            pb
        } else {
            base.join(pb)
        }
    };
    let malformed = |line: usize, message: String| ManifestError::Malformed {
        path: path.to_path_buf(),
        line,
        message,
    };

    let mut entries = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split('\t');
        let rainy = fields.next().unwrap_or("").trim();
        let Some(clean) = fields.next().map(str::trim) else {
            return Err(malformed(
                line_no,
                "expected two tab-separated paths, found one column".into(),
            ));
        };
        if fields.next().is_some() {
            return Err(malformed(
                line_no,
                "expected two tab-separated paths, found more".into(),
            ));
        }
        if rainy.is_empty() || clean.is_empty() {
            return Err(malformed(line_no, "empty path".into()));
        }
        if rainy == clean {
            return Err(malformed(
                line_no,
                "rainy and clean must be distinct paths".into(),
            ));
        }
        entries.push(ManifestEntry {
            rainy: resolve(rainy),
            clean: resolve(clean),
        });
    }
    if entries.is_empty() {
        return Err(ManifestError::Empty {
            path: path.to_path_buf(),
        });
    }
    Ok(DatasetManifest { entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_manifest(content: &str) -> (tempfile::TempDir, PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pairs.tsv");
        std::fs::write(&path, content).unwrap();
        (dir, path)
    }

    #[test]
    fn parses_pairs_in_order_with_comments_and_blanks() {
        let (dir, path) = write_manifest("# header\n\nr0.png\tc0.png\nsub/r1.png\tsub/c1.png\n");
        let m = load_manifest(&path).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.entries[0].rainy, dir.path().join("r0.png"));
        assert_eq!(m.entries[0].clean, dir.path().join("c0.png"));
        assert_eq!(m.entries[1].rainy, dir.path().join("sub/r1.png"));
    }

    #[test]
    fn absolute_paths_are_kept_verbatim() {
        let (_dir, path) = write_manifest("/abs/r.png\t/abs/c.png\n");
        let m = load_manifest(&path).unwrap();
        assert_eq!(m.entries[0].rainy, PathBuf::from("/abs/r.png"));
    }

    #[test]
    fn empty_manifest_is_an_error() {
        let (_dir, path) = write_manifest("# only comments\n\n");
        let err = load_manifest(&path).unwrap_err();
        assert!(err.to_string().contains("empty manifest"), "{err}");
    }

    #[test]
    fn single_column_reports_the_line_number() {
        let (_dir, path) = write_manifest("r0.png\tc0.png\nlonely.png\n");
        let err = load_manifest(&path).unwrap_err();
        match &err {
            ManifestError::Malformed { line, .. } => assert_eq!(*line, 2),
            other => panic!("expected Malformed, got {other:?}"),
        }
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn identical_paths_in_a_pair_are_rejected() {
        let (_dir, path) = write_manifest("same.png\tsame.png\n");
        assert!(matches!(
            load_manifest(&path),
            Err(ManifestError::Malformed { line: 1, .. })
        ));
    }

    #[test]
    fn missing_file_is_an_io_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            load_manifest(dir.path().join("absent.tsv")),
            Err(ManifestError::Io { .. })
        ));
    }
}
