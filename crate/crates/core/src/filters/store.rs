//! On-disk cache of designed filter pairs, one JSON document per `(K, L)`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{design_pair, FilterPair};
use crate::error::Result;
use crate::seq::ModeSeq;

/// Environment variable naming the store directory.
pub const STORE_ENV: &str = "WAVEMERA_STORE";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredFilter {
    pub offset: i64,
    pub values: Vec<f64>,
}

impl From<&ModeSeq> for StoredFilter {
    fn from(s: &ModeSeq) -> Self {
        Self {
            offset: s.offset(),
            values: s.real_values(),
        }
    }
}

impl From<&StoredFilter> for ModeSeq {
    fn from(s: &StoredFilter) -> Self {
        ModeSeq::from_real(s.offset, &s.values)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredPair {
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub h_s: StoredFilter,
    pub g_s: StoredFilter,
    pub h_w: StoredFilter,
    pub g_w: StoredFilter,
    pub epsilon: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub generator: String,
}

impl From<&FilterPair> for StoredPair {
    fn from(p: &FilterPair) -> Self {
        Self {
            k: p.k,
            l: p.l,
            h_s: (&p.h_s).into(),
            g_s: (&p.g_s).into(),
            h_w: (&p.h_w).into(),
            g_w: (&p.g_w).into(),
            epsilon: p.epsilon,
            b: p.b,
            generator: format!("wavemera {} halfband/min-phase", env!("CARGO_PKG_VERSION")),
        }
    }
}

impl From<&StoredPair> for FilterPair {
    fn from(s: &StoredPair) -> Self {
        let h_s = ModeSeq::from(&s.h_s);
        let g_s = ModeSeq::from(&s.g_s);
        FilterPair {
            k: s.k,
            l: s.l,
            m: h_s.len().max(g_s.len()),
            h_s,
            h_w: (&s.h_w).into(),
            g_s,
            g_w: (&s.g_w).into(),
            epsilon: s.epsilon,
            b: s.b,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FilterStore {
    dir: PathBuf,
}

impl FilterStore {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    /// Store rooted at `$WAVEMERA_STORE`, or `./filter-store` when unset.
    pub fn from_env() -> Self {
        Self::new(
            std::env::var_os(STORE_ENV)
                .map(PathBuf::from)
                .unwrap_or_else(|| "filter-store".into()),
        )
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, k: usize, l: usize) -> PathBuf {
        self.dir.join(format!("selesnick_K{k}_L{l}.json"))
    }

    /// Reads a cached pair; `Ok(None)` when no document exists.
    pub fn load(&self, k: usize, l: usize) -> Result<Option<FilterPair>> {
        let path = self.path_for(k, l);
        if !path.exists() {
            return Ok(None);
        }
        let stored: StoredPair = serde_json::from_slice(&fs::read(path)?)?;
        Ok(Some((&stored).into()))
    }

    /// Writes a pair through a temporary file and an atomic rename.
    pub fn save(&self, pair: &FilterPair) -> Result<PathBuf> {
        fs::create_dir_all(&self.dir)?;
        let path = self.path_for(pair.k, pair.l);
        let tmp = self.dir.join(format!(
            ".selesnick_K{}_L{}.{}.tmp",
            pair.k,
            pair.l,
            std::process::id()
        ));
        {
            let mut file = fs::File::create(&tmp)?;
            file.write_all(&serde_json::to_vec_pretty(&StoredPair::from(pair))?)?;
            file.sync_all()?;
        }
        fs::rename(&tmp, &path)?;
        Ok(path)
    }

    /// Returns the cached pair, designing and caching it on a miss or when
    /// `refresh` is set.
    pub fn get_or_design(&self, k: usize, l: usize, refresh: bool) -> Result<FilterPair> {
        if !refresh {
            if let Some(pair) = self.load(k, l)? {
                return Ok(pair);
            }
        }
        let pair = design_pair(k, l)?;
        self.save(&pair)?;
        Ok(pair)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_through_disk() {
        let dir = tempfile::tempdir().unwrap();
        let store = FilterStore::new(dir.path());
        assert!(store.load(2, 1).unwrap().is_none());
        let designed = store.get_or_design(2, 1, false).unwrap();
        assert!(store.path_for(2, 1).ends_with("selesnick_K2_L1.json"));
        let loaded = store.load(2, 1).unwrap().unwrap();
        assert_eq!(loaded, designed);
        assert_eq!((loaded.k, loaded.l, loaded.m), (2, 1, 6));

        let doc: serde_json::Value =
            serde_json::from_slice(&fs::read(store.path_for(2, 1)).unwrap()).unwrap();
        for key in [
            "K",
            "L",
            "h_s",
            "g_s",
            "h_w",
            "g_w",
            "epsilon",
            "B",
            "generator",
        ] {
            assert!(doc.get(key).is_some(), "missing {key}");
        }
        assert!(doc["h_s"]["values"].as_array().unwrap().len() == 6);
    }
}
