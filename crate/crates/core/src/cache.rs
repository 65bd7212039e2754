//! Persistent cache of ζ values.
//!
//! One CSV line per entry: `sigma,t,tol,re,im`. Entries are keyed by
//! `(sigma, t rounded to 1e-12)`; when two entries share a key the one
//! with the smaller tolerance wins. Floats are written in shortest
//! round-trip form so a store/load cycle is bit-exact.

use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::RwLock;

use num_complex::Complex64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CacheEntry {
    pub sigma: f64,
    pub t: f64,
    pub tol: f64,
    pub re: f64,
    pub im: f64,
}

impl CacheEntry {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    fn key(&self) -> CacheKey {
        CacheKey::new(self.sigma, self.t)
    }

    fn to_line(&self) -> String {
        format!("{:?},{:?},{:?},{:?},{:?}", self.sigma, self.t, self.tol, self.re, self.im)
    }

    fn parse(line: &str) -> Option<CacheEntry> {
        let fields: Vec<f64> = line
            .trim()
            .split(',')
            .map(|f| f.trim().parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect::<Option<_>>()?;
        let [sigma, t, tol, re, im] = fields[..] else { return None };
        (tol > 0.0).then_some(CacheEntry { sigma, t, tol, re, im })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CacheKey {
    sigma_bits: u64,
    t_pico: i128,
}

impl CacheKey {
    pub fn new(sigma: f64, t: f64) -> Self {
        CacheKey { sigma_bits: sigma.to_bits(), t_pico: (t * 1e12).round() as i128 }
    }
}

/// In-memory ζ cache. Reads are concurrent; writes are batched merges.
#[derive(Debug, Default)]
pub struct ZetaCache {
    entries: RwLock<HashMap<CacheKey, CacheEntry>>,
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct LoadStats {
    pub loaded: usize,
    pub skipped: usize,
}

impl ZetaCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// A cached value whose tolerance is at least as tight as `tol`.
    pub fn get(&self, sigma: f64, t: f64, tol: f64) -> Option<Complex64> {
        let map = self.entries.read().unwrap();
        map.get(&CacheKey::new(sigma, t)).filter(|e| e.tol <= tol).map(CacheEntry::value)
    }

    pub fn merge<I: IntoIterator<Item = CacheEntry>>(&self, batch: I) {
        let mut map = self.entries.write().unwrap();
        for e in batch {
            merge_one(&mut map, e);
        }
    }

    pub fn merge_cache(&self, other: &ZetaCache) {
        let theirs: Vec<CacheEntry> = other.entries.read().unwrap().values().copied().collect();
        self.merge(theirs);
    }

    /// All entries sorted by key.
    pub fn entries(&self) -> Vec<CacheEntry> {
        let map = self.entries.read().unwrap();
        let mut v: Vec<(CacheKey, CacheEntry)> = map.iter().map(|(k, e)| (*k, *e)).collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v.into_iter().map(|(_, e)| e).collect()
    }

    /// Reads a cache file. A missing file yields an empty cache; lines that
    /// do not parse are skipped and counted.
    pub fn load(path: &Path) -> io::Result<(ZetaCache, LoadStats)> {
        let cache = ZetaCache::new();
        let mut stats = LoadStats::default();
        let file = match File::open(path) {
            Ok(f) => f,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok((cache, stats)),
            Err(e) => return Err(e),
        };
        let mut batch = Vec::new();
        for line in BufReader::new(file).lines() {
            let line = line?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            match CacheEntry::parse(&line) {
                Some(e) => {
                    batch.push(e);
                    stats.loaded += 1;
                }
                None => stats.skipped += 1,
            }
        }
        cache.merge(batch);
        Ok((cache, stats))
    }

    /// Merges with whatever is on disk and rewrites the file atomically.
    pub fn store(&self, path: &Path) -> io::Result<()> {
        let (on_disk, _) = ZetaCache::load(path)?;
        on_disk.merge_cache(self);
        if let Some(dir) = path.parent() {
            if !dir.as_os_str().is_empty() {
                fs::create_dir_all(dir)?;
            }
        }
        let tmp = path.with_extension("tmp");
        {
            let mut w = BufWriter::new(File::create(&tmp)?);
            writeln!(w, "# sigma,t,tol,re,im")?;
            for e in on_disk.entries() {
                writeln!(w, "{}", e.to_line())?;
            }
            w.flush()?;
        }
        fs::rename(tmp, path)
    }
}

fn merge_one(map: &mut HashMap<CacheKey, CacheEntry>, e: CacheEntry) {
    map.entry(e.key())
        .and_modify(|cur| {
            if e.tol < cur.tol {
                *cur = e;
            }
        })
        .or_insert(e);
}

/// Exclusive lock on `<cache>.lock`, held for the lifetime of the guard.
#[derive(Debug)]
pub struct CacheLock {
    file: File,
    path: PathBuf,
}

impl CacheLock {
    pub fn acquire(cache_path: &Path) -> io::Result<CacheLock> {
        let mut name = cache_path.as_os_str().to_owned();
        name.push(".lock");
        let path = PathBuf::from(name);
        if let Some(dir) = path.parent() {
            if !dir.as_os_str().is_empty() {
                fs::create_dir_all(dir)?;
            }
        }
        let file = OpenOptions::new().create(true).truncate(false).write(true).open(&path)?;
        file.lock()?;
        Ok(CacheLock { file, path })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

impl Drop for CacheLock {
    fn drop(&mut self) {
        let _ = self.file.unlock();
    }
}
