//! Instance list files: one instance path per line, optionally followed by a
//! pinned seed.

use std::path::{Path, PathBuf};

use paramils_core::Instance;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceSet {
    /// names exactly as written in the file; they key the run cache and the
    /// surrogate, so results do not depend on where the files live
    pub instances: Vec<Instance>,
    /// names resolved against the list file's directory
    pub paths: Vec<PathBuf>,
    pub seeds: Vec<Option<u32>>,
}

impl InstanceSet {
    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn parse(text: &str, base: &Path, origin: &Path) -> Result<Self> {
        let mut set = InstanceSet { instances: Vec::new(), paths: Vec::new(), seeds: Vec::new() };
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Parse { path: origin.to_path_buf(), line: i + 1, message };
            let mut cols = line.split_whitespace();
            let name = cols.next().expect("line is not blank");
            let seed = match cols.next() {
                None => None,
                Some(s) => Some(s.parse::<u32>().map_err(|_| err(format!("bad seed `{s}`")))?),
            };
            if let Some(extra) = cols.next() {
                return Err(err(format!("unexpected column `{extra}`")));
            }
            set.instances.push(Instance::new(name));
            set.paths.push(base.join(name));
            set.seeds.push(seed);
        }
        Ok(set)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Read { path: path.into(), source })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base, path)
    }

    /// First instance that resolves to the same path as one in `other`.
    pub fn overlap_with(&self, other: &InstanceSet) -> Option<&Instance> {
        let norm = |p: &PathBuf| std::fs::canonicalize(p).unwrap_or_else(|_| p.clone());
        let theirs: Vec<PathBuf> = other.paths.iter().map(norm).collect();
        self.paths.iter().position(|p| theirs.contains(&norm(p))).map(|i| &self.instances[i])
    }
}
