//! On-disk cache of verified character tables. Entries are re-verified on
//! load, and anything unreadable or mismatched is treated as a miss.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::chars::CharacterTable;
use crate::error::Result;
use crate::groups::{ConjData, Family};

/// Bumped whenever the serialized table layout changes.
pub const CACHE_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheKey {
    pub family: Family,
    pub q: u32,
    pub ell: u64,
    pub seed: u64,
    pub format_version: u32,
    pub code_version: String,
}

impl CacheKey {
    pub fn new(family: Family, q: u32, ell: u64, seed: u64) -> Self {
        CacheKey {
            family,
            q,
            ell,
            seed,
            format_version: CACHE_FORMAT_VERSION,
            code_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn file_name(&self) -> String {
        format!(
            "{}-q{}-l{}-s{}-v{}-{}.json",
            self.family, self.q, self.ell, self.seed, self.format_version, self.code_version
        )
    }
}

#[derive(Serialize, Deserialize)]
struct Entry {
    key: CacheKey,
    table: CharacterTable,
}

#[derive(Clone, Debug)]
pub struct TableCache {
    dir: PathBuf,
}

impl TableCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        TableCache { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, key: &CacheKey) -> PathBuf {
        self.dir.join(key.file_name())
    }

    /// A stored table for `key` that still passes its certificates against
    /// `cd`. A missing, corrupt or stale entry gives `Ok(None)`; only I/O
    /// failures other than "not found" are errors.
    pub fn load(&self, key: &CacheKey, cd: &ConjData) -> Result<Option<CharacterTable>> {
        let bytes = match fs::read(self.path_for(key)) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let Ok(entry) = serde_json::from_slice::<Entry>(&bytes) else {
            return Ok(None);
        };
        if entry.key != *key || entry.table.verify(cd).is_err() {
            return Ok(None);
        }
        Ok(Some(entry.table))
    }

    /// Writes through a temporary file so a concurrent reader never sees a
    /// partial entry.
    pub fn store(&self, key: &CacheKey, table: &CharacterTable) -> Result<()> {
        fs::create_dir_all(&self.dir)?;
        let entry = Entry {
            key: key.clone(),
            table: table.clone(),
        };
        let json = serde_json::to_vec(&entry).map_err(std::io::Error::other)?;
        let path = self.path_for(key);
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        fs::write(&tmp, json)?;
        fs::rename(&tmp, &path)?;
        Ok(())
    }
}
