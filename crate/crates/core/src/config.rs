//! Plain-text `key = value` files: batch manifests, null-model parameter
//! files and strategy scenarios all share this syntax.
//!
//! ```text
//! # comment
//! SENSEX = data/BSESN.csv 1997-07-01 2021-12-31
//! data/AAPL.csv
//! ```
//!
//! Blank lines and `#` comments are ignored. In a manifest a bare path
//! (no `=`) takes its file stem as the instrument id.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;

use crate::error::{Error, Result};

/// One non-comment line of a key/value file.
#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub line: usize,
    pub key: String,
    /// `None` for a bare line without `=`.
    pub value: Option<String>,
}

/// Split `text` into entries. Duplicate keys are rejected.
pub fn parse_entries(text: &str) -> Result<Vec<Entry>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = match content.split_once('=') {
            Some((k, v)) => (k.trim(), Some(v.trim().to_string())),
            None => (content, None),
        };
        if key.is_empty() {
            return Err(Error::Config(format!("line {line}: empty key")));
        }
        if !seen.insert(key.to_string()) {
            return Err(Error::Config(format!("line {line}: duplicate key `{key}`")));
        }
        out.push(Entry {
            line,
            key: key.to_string(),
            value,
        });
    }
    Ok(out)
}

impl Entry {
    pub fn require_value(&self) -> Result<&str> {
        self.value
            .as_deref()
            .filter(|v| !v.is_empty())
            .ok_or_else(|| Error::Config(format!("line {}: `{}` needs a value", self.line, self.key)))
    }

    pub fn parse_value<T: std::str::FromStr>(&self) -> Result<T> {
        let v = self.require_value()?;
        v.parse().map_err(|_| {
            Error::Config(format!(
                "line {}: cannot parse `{v}` for `{}`",
                self.line, self.key
            ))
        })
    }

    pub fn parse_bool(&self) -> Result<bool> {
        match self.require_value()?.to_ascii_lowercase().as_str() {
            "true" | "yes" | "1" => Ok(true),
            "false" | "no" | "0" => Ok(false),
            other => Err(Error::Config(format!(
                "line {}: `{}` expects true/false, got `{other}`",
                self.line, self.key
            ))),
        }
    }

    pub fn unknown(&self) -> Error {
        Error::Config(format!("line {}: unknown key `{}`", self.line, self.key))
    }
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// One instrument in a manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub id: String,
    /// Resolved against the manifest's directory.
    pub path: PathBuf,
    pub start: Option<NaiveDate>,
    pub end: Option<NaiveDate>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    /// Parse manifest text. Relative paths are joined onto `base_dir`.
    ///
    /// Value syntax: `<path> [start-date] [end-date]`, dates as `YYYY-MM-DD`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut entries = Vec::new();
        for entry in parse_entries(text)? {
            let (id, rest) = match &entry.value {
                Some(v) => (entry.key.clone(), v.clone()),
                None => {
                    let stem = Path::new(&entry.key)
                        .file_stem()
                        .and_then(|s| s.to_str())
                        .ok_or_else(|| {
                            Error::Config(format!("line {}: cannot derive an id from `{}`", entry.line, entry.key))
                        })?;
                    (stem.to_string(), entry.key.clone())
                }
            };
            let mut fields = rest.split_whitespace();
            let path = fields
                .next()
                .ok_or_else(|| Error::Config(format!("line {}: `{id}` has no path", entry.line)))?;
            let mut dates = Vec::new();
            for f in fields {
                let d = NaiveDate::parse_from_str(f, "%Y-%m-%d").map_err(|_| {
                    Error::Config(format!("line {}: bad date `{f}` for `{id}`", entry.line))
                })?;
                dates.push(d);
            }
            if dates.len() > 2 {
                return Err(Error::Config(format!(
                    "line {}: `{id}` takes at most a start and an end date",
                    entry.line
                )));
            }
            let path = Path::new(path);
            let path = if path.is_absolute() {
                path.to_path_buf()
            } else {
                base_dir.join(path)
            };
            entries.push(ManifestEntry {
                id,
                path,
                start: dates.first().copied(),
                end: dates.get(1).copied(),
            });
        }
        Ok(Manifest { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = read_text(path)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::parse(&text, base)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_ids_paths_and_dates() {
        let text = "\
# indices
SENSEX = BSESN.csv 1997-07-01 2021-12-31
AAPL=/abs/AAPL.csv 1990-01-01

data/GME.csv   # bare path
";
        let m = Manifest::parse(text, Path::new("/base")).unwrap();
        assert_eq!(m.entries.len(), 3);
        assert_eq!(m.entries[0].id, "SENSEX");
        assert_eq!(m.entries[0].path, PathBuf::from("/base/BSESN.csv"));
        assert_eq!(m.entries[0].start, NaiveDate::from_ymd_opt(1997, 7, 1));
        assert_eq!(m.entries[0].end, NaiveDate::from_ymd_opt(2021, 12, 31));
        assert_eq!(m.entries[1].path, PathBuf::from("/abs/AAPL.csv"));
        assert_eq!(m.entries[1].end, None);
        assert_eq!(m.entries[2].id, "GME");
        assert_eq!(m.entries[2].path, PathBuf::from("/base/data/GME.csv"));
    }

    #[test]
    fn rejects_duplicates_and_bad_dates() {
        assert!(Manifest::parse("a = x.csv\na = y.csv", Path::new(".")).is_err());
        assert!(Manifest::parse("a = x.csv 1997/07/01", Path::new(".")).is_err());
        assert!(Manifest::parse("a =", Path::new(".")).is_err());
    }

    #[test]
    fn empty_manifest_has_no_entries() {
        let m = Manifest::parse("# nothing here\n\n", Path::new(".")).unwrap();
        assert!(m.entries.is_empty());
    }
}
