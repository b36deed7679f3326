use crate::error::CliError;
use quartic_core::numerics::PrecisionCtx;
use quartic_core::ortho::{build_table, cache_key, RecurrenceTable, TableCache, WeightParams};
use std::fs::{self, OpenOptions};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

pub const CACHE_ENV: &str = "QUARTIC_CACHE_DIR";
const LOCK_WAIT: Duration = Duration::from_secs(900);

/// Resolution order: explicit flag, environment variable, `.quartic-cache`.
pub fn cache_dir(flag: Option<&Path>) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    match std::env::var_os(CACHE_ENV) {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => PathBuf::from(".quartic-cache"),
    }
}

fn file_stem(key: &str) -> String {
    key.chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '=') { c } else { '_' })
        .collect()
}

/// Exclusive lock on one cache entry, released on drop.
struct EntryLock {
    path: PathBuf,
}

impl EntryLock {
    fn acquire(path: PathBuf) -> Result<Self, CliError> {
        let start = Instant::now();
        loop {
            match OpenOptions::new().write(true).create_new(true).open(&path) {
                Ok(_) => return Ok(EntryLock { path }),
                Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                    if start.elapsed() > LOCK_WAIT {
                        return Err(CliError::Io(format!("timed out waiting for {}", path.display())));
                    }
                    std::thread::sleep(Duration::from_millis(100));
                }
                Err(e) => return Err(CliError::Io(format!("{}: {e}", path.display()))),
            }
        }
    }
}

impl Drop for EntryLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CacheOutcome {
    Hit,
    Built,
}

#[derive(Clone, Debug)]
pub struct TableStore {
    pub dir: PathBuf,
}

impl TableStore {
    pub fn new(dir: PathBuf) -> Result<Self, CliError> {
        fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        Ok(TableStore { dir })
    }

    pub fn path_for(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{}.json", file_stem(key)))
    }

    /// Loads the table for (params, m, bits) or builds and stores it. The
    /// lock is held across the check and the build so concurrent runs build
    /// each entry once.
    pub fn get(&self, params: &WeightParams, m: usize, ctx: &PrecisionCtx) -> Result<(RecurrenceTable, CacheOutcome), CliError> {
        let key = cache_key(params, m, ctx.bits);
        let path = self.path_for(&key);
        let lock_path = path.with_extension("lock");
        let _lock = EntryLock::acquire(lock_path)?;
        if path.exists() {
            let text = fs::read_to_string(&path)?;
            let doc: TableCache = serde_json::from_str(&text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            let table = RecurrenceTable::from_cache(&doc)?;
            if cache_key(&table.params, table.max_degree(), table.bits) != key {
                return Err(CliError::Io(format!("{} does not hold {key}", path.display())));
            }
            return Ok((table, CacheOutcome::Hit));
        }
        let table = build_table(params, m, ctx)?;
        let text = serde_json::to_string_pretty(&table.to_cache()).map_err(|e| CliError::Io(e.to_string()))?;
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, text)?;
        fs::rename(&tmp, &path)?;
        Ok((table, CacheOutcome::Built))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stems_are_portable() {
        let s = file_stem("t=-4,g=1,N=40,M=44,bits=512");
        assert_eq!(s, "t=-4_g=1_N=40_M=44_bits=512");
    }

    #[test]
    fn build_then_hit() {
        let dir = tempfile::tempdir().unwrap();
        let store = TableStore::new(dir.path().to_path_buf()).unwrap();
        let ctx = PrecisionCtx::new(128).unwrap();
        let p = WeightParams::from_f64(-4.0, 1.0, 6).unwrap();
        let (a, first) = store.get(&p, 8, &ctx).unwrap();
        let bytes = fs::read(store.path_for(&cache_key(&p, 8, 128))).unwrap();
        let (b, second) = store.get(&p, 8, &ctx).unwrap();
        assert_eq!(first, CacheOutcome::Built);
        assert_eq!(second, CacheOutcome::Hit);
        assert_eq!(a.r, b.r);
        assert_eq!(bytes, fs::read(store.path_for(&cache_key(&p, 8, 128))).unwrap());
        assert!(!store.path_for(&cache_key(&p, 8, 128)).with_extension("lock").exists());
    }
}
