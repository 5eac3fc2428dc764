//! On-disk cache for atom sets and length memo tables.
//!
//! Entry files are named by a hash of the canonical key. Layout, all integers
//! little-endian:
//!
//! ```text
//! magic "ZSLC" | endian marker u32 0x01020304 | format version u32
//! key: u32 length + UTF-8 | tool version: u32 length + UTF-8
//! payload: u64 length + bytes | SHA-256 of the payload (32 bytes)
//! ```
//!
//! `index.txt` lists `key<TAB>file` lines for inspection only; lookups never
//! read it. Every failure degrades to recomputation.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use log::warn;
use sha2::{Digest, Sha256};

use crate::abelian::{FiniteAbelianGroup, GroupElement};
use crate::error::Result;
use crate::lengths::{BlockMonoid, LengthMemo, LengthSet};
use crate::zerosum::{AtomSet, Counts};

pub const FORMAT_VERSION: u32 = 1;
pub const ENV_VAR: &str = "ZSLAB_CACHE";
const MAGIC: &[u8; 4] = b"ZSLC";
const ENDIAN_MARKER: u32 = 0x0102_0304;
const INDEX: &str = "index.txt";
const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ArtifactKind {
    Atoms,
    LengthsMemo,
}

impl ArtifactKind {
    fn tag(self) -> &'static str {
        match self {
            ArtifactKind::Atoms => "atoms",
            ArtifactKind::LengthsMemo => "lengths-memo",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CacheKey {
    pub version: u32,
    pub factors: Vec<u32>,
    /// Coordinates of `G_0`, sorted.
    pub subset: Vec<Vec<u32>>,
    pub kind: ArtifactKind,
}

impl CacheKey {
    pub fn new(group: &FiniteAbelianGroup, subset: &[GroupElement], kind: ArtifactKind) -> Self {
        let mut coords: Vec<Vec<u32>> = subset.iter().map(|e| e.coords().to_vec()).collect();
        coords.sort();
        coords.dedup();
        CacheKey { version: FORMAT_VERSION, factors: group.invariant_factors().to_vec(), subset: coords, kind }
    }

    fn file_name(&self) -> String {
        let digest = Sha256::digest(self.to_string().as_bytes());
        let hex: String = digest[..12].iter().map(|b| format!("{b:02x}")).collect();
        format!("{}-{hex}.bin", self.kind.tag())
    }
}

impl fmt::Display for CacheKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[u32]| v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",");
        let subset: Vec<String> = self.subset.iter().map(|c| format!("({})", join(c))).collect();
        write!(f, "v{};{};[{}];{}", self.version, join(&self.factors), subset.join(""), self.kind.tag())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Payload {
    Atoms(Vec<Counts>),
    LengthsMemo(Vec<(Counts, LengthSet)>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CacheEntry {
    pub key: CacheKey,
    pub payload: Payload,
    pub tool_version: String,
}

fn put_counts(out: &mut Vec<u8>, c: &Counts) {
    for &m in c.as_slice() {
        out.extend_from_slice(&m.to_le_bytes());
    }
}

fn encode_payload(p: &Payload, width: usize) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(&(width as u32).to_le_bytes());
    match p {
        Payload::Atoms(atoms) => {
            out.extend_from_slice(&(atoms.len() as u64).to_le_bytes());
            for a in atoms {
                put_counts(&mut out, a);
            }
        }
        Payload::LengthsMemo(entries) => {
            out.extend_from_slice(&(entries.len() as u64).to_le_bytes());
            for (c, l) in entries {
                put_counts(&mut out, c);
                out.extend_from_slice(&(l.words().len() as u32).to_le_bytes());
                for w in l.words() {
                    out.extend_from_slice(&w.to_le_bytes());
                }
            }
        }
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Option<&'a [u8]> {
        if self.buf.len() < n {
            return None;
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Some(head)
    }

    fn u16(&mut self) -> Option<u16> {
        Some(u16::from_le_bytes(self.take(2)?.try_into().ok()?))
    }

    fn u32(&mut self) -> Option<u32> {
        Some(u32::from_le_bytes(self.take(4)?.try_into().ok()?))
    }

    fn u64(&mut self) -> Option<u64> {
        Some(u64::from_le_bytes(self.take(8)?.try_into().ok()?))
    }

    fn string(&mut self) -> Option<String> {
        let n = self.u32()? as usize;
        String::from_utf8(self.take(n)?.to_vec()).ok()
    }

    fn counts(&mut self, width: usize) -> Option<Counts> {
        (0..width).map(|_| self.u16()).collect::<Option<Vec<_>>>().map(Counts::from_vec)
    }
}

fn decode_payload(bytes: &[u8], kind: ArtifactKind, width: usize) -> Option<Payload> {
    let mut r = Reader { buf: bytes };
    if r.u32()? as usize != width {
        return None;
    }
    let count = r.u64()? as usize;
    // each record is at least `width` u16s
    if count > bytes.len() {
        return None;
    }
    let payload = match kind {
        ArtifactKind::Atoms => Payload::Atoms((0..count).map(|_| r.counts(width)).collect::<Option<_>>()?),
        ArtifactKind::LengthsMemo => Payload::LengthsMemo(
            (0..count)
                .map(|_| {
                    let c = r.counts(width)?;
                    let n = r.u32()? as usize;
                    let words = (0..n).map(|_| r.u64()).collect::<Option<Vec<_>>>()?;
                    Some((c, LengthSet::from_words(words)))
                })
                .collect::<Option<_>>()?,
        ),
    };
    r.buf.is_empty().then_some(payload)
}

/// A cache rooted at one directory.
#[derive(Clone, Debug)]
pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Cache { dir: dir.into() }
    }

    /// `dir`, else `$ZSLAB_CACHE`, else no cache.
    pub fn resolve(dir: Option<&Path>) -> Option<Cache> {
        dir.map(Path::to_path_buf)
            .or_else(|| std::env::var_os(ENV_VAR).filter(|v| !v.is_empty()).map(PathBuf::from))
            .map(Cache::new)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// The entry for `key`; `Ok(None)` on a miss, a version mismatch or a
    /// corrupt file (the last is logged). Only real I/O failures are errors.
    pub fn load(&self, key: &CacheKey) -> Result<Option<CacheEntry>> {
        let path = self.dir.join(key.file_name());
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let entry = Self::decode(&bytes, key);
        if entry.is_none() {
            warn!("discarding unreadable cache entry {}", path.display());
        }
        Ok(entry)
    }

    fn decode(bytes: &[u8], key: &CacheKey) -> Option<CacheEntry> {
        let mut r = Reader { buf: bytes };
        if r.take(4)? != MAGIC || r.u32()? != ENDIAN_MARKER || r.u32()? != FORMAT_VERSION {
            return None;
        }
        if r.string()? != key.to_string() {
            return None;
        }
        let tool_version = r.string()?;
        let n = r.u64()? as usize;
        let payload = r.take(n)?;
        let checksum = r.take(32)?;
        if !r.buf.is_empty() || Sha256::digest(payload).as_slice() != checksum {
            return None;
        }
        let payload = decode_payload(payload, key.kind, key.subset.len())?;
        Some(CacheEntry { key: key.clone(), payload, tool_version })
    }

    /// Writes the entry through a temporary file and a rename, so readers
    /// and concurrent writers only ever see complete files.
    pub fn store(&self, entry: &CacheEntry) -> Result<()> {
        fs::create_dir_all(&self.dir)?;
        let payload = encode_payload(&entry.payload, entry.key.subset.len());
        let key = entry.key.to_string();
        let mut out = Vec::with_capacity(payload.len() + key.len() + 64);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&ENDIAN_MARKER.to_le_bytes());
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        for s in [key.as_str(), entry.tool_version.as_str()] {
            out.extend_from_slice(&(s.len() as u32).to_le_bytes());
            out.extend_from_slice(s.as_bytes());
        }
        out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
        out.extend_from_slice(&payload);
        out.extend_from_slice(&Sha256::digest(&payload));
        let name = entry.key.file_name();
        self.write_atomic(&name, &out)?;
        self.add_to_index(&key, &name)
    }

    fn write_atomic(&self, name: &str, bytes: &[u8]) -> Result<()> {
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        tmp.write_all(bytes)?;
        tmp.as_file().sync_all()?;
        tmp.persist(self.dir.join(name)).map_err(|e| e.error)?;
        Ok(())
    }

    fn add_to_index(&self, key: &str, name: &str) -> Result<()> {
        let line = format!("{key}\t{name}");
        let current = fs::read_to_string(self.dir.join(INDEX)).unwrap_or_default();
        if current.lines().any(|l| l == line) {
            return Ok(());
        }
        let mut lines: Vec<&str> = current.lines().collect();
        lines.push(&line);
        lines.sort_unstable();
        self.write_atomic(INDEX, (lines.join("\n") + "\n").as_bytes())
    }

    /// Removes every cache file; returns how many were removed.
    pub fn purge(&self) -> Result<usize> {
        let entries = match fs::read_dir(&self.dir) {
            Ok(e) => e,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(0),
            Err(e) => return Err(e.into()),
        };
        let mut removed = 0;
        for e in entries {
            let path = e?.path();
            let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
            if name == INDEX || name.ends_with(".bin") {
                fs::remove_file(&path)?;
                removed += 1;
            }
        }
        Ok(removed)
    }

    /// Atoms of `B(G_0)`, loaded when present, otherwise enumerated and
    /// stored. Cache failures are logged and never change the result.
    pub fn atoms(&self, group: &FiniteAbelianGroup, subset: &[GroupElement], jobs: usize) -> Result<AtomSet> {
        let key = CacheKey::new(group, subset, ArtifactKind::Atoms);
        match self.load(&key) {
            Ok(Some(CacheEntry { payload: Payload::Atoms(atoms), .. })) => match AtomSet::from_parts(group, subset, atoms) {
                Ok(set) => return Ok(set),
                Err(e) => warn!("discarding cached atoms for {key}: {e}"),
            },
            Ok(_) => {}
            Err(e) => warn!("cache read failed: {e}"),
        }
        let set = AtomSet::enumerate_with_jobs(group, subset, jobs)?;
        let entry = CacheEntry {
            key,
            payload: Payload::Atoms(set.atom_counts().to_vec()),
            tool_version: TOOL_VERSION.into(),
        };
        if let Err(e) = self.store(&entry) {
            warn!("cache write failed, continuing uncached: {e}");
        }
        Ok(set)
    }

    /// A block monoid with atoms and previously stored lengths restored.
    pub fn block_monoid(&self, group: &FiniteAbelianGroup, subset: &[GroupElement], jobs: usize) -> Result<BlockMonoid> {
        let atoms = self.atoms(group, subset, jobs)?;
        let key = CacheKey::new(group, atoms.subset(), ArtifactKind::LengthsMemo);
        let mut memo = LengthMemo::new();
        match self.load(&key) {
            Ok(Some(CacheEntry { payload: Payload::LengthsMemo(entries), .. })) => {
                if entries.iter().all(|(c, _)| c.width() == atoms.subset().len()) {
                    for (c, l) in entries {
                        memo.insert(c, l);
                    }
                } else {
                    warn!("discarding cached lengths for {key}: width mismatch");
                }
            }
            Ok(_) => {}
            Err(e) => warn!("cache read failed: {e}"),
        }
        Ok(BlockMonoid::from_atoms(atoms).with_jobs(jobs).with_memo(memo))
    }

    /// Stores the memo table accumulated by `m`.
    pub fn save_lengths(&self, m: &BlockMonoid) -> Result<()> {
        let key = CacheKey::new(m.group(), m.subset(), ArtifactKind::LengthsMemo);
        let entries = m.memo().entries().into_iter().map(|(c, l)| (c.clone(), l.clone())).collect();
        self.store(&CacheEntry { key, payload: Payload::LengthsMemo(entries), tool_version: TOOL_VERSION.into() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (tempfile::TempDir, Cache, FiniteAbelianGroup) {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path());
        (dir, cache, FiniteAbelianGroup::new(&[2, 4]).unwrap())
    }

    #[test]
    fn key_is_canonical() {
        let g = FiniteAbelianGroup::new(&[3, 3]).unwrap();
        let a = vec![g.element(&[1, 0]).unwrap(), g.element(&[0, 1]).unwrap()];
        let b = vec![g.element(&[0, 1]).unwrap(), g.element(&[1, 0]).unwrap(), g.element(&[4, 0]).unwrap()];
        let ka = CacheKey::new(&g, &a, ArtifactKind::Atoms);
        assert_eq!(ka, CacheKey::new(&g, &b, ArtifactKind::Atoms));
        assert_eq!(ka.to_string(), "v1;3,3;[(0,1)(1,0)];atoms");
        assert_ne!(ka.file_name(), CacheKey::new(&g, &a, ArtifactKind::LengthsMemo).file_name());
    }

    #[test]
    fn miss_store_load() {
        let (_d, cache, g) = setup();
        let all: Vec<_> = g.elements().collect();
        let key = CacheKey::new(&g, &all, ArtifactKind::Atoms);
        assert!(cache.load(&key).unwrap().is_none());
        let fresh = AtomSet::enumerate(&g, &all).unwrap();
        let loaded = cache.atoms(&g, &all, 1).unwrap();
        assert_eq!(fresh.atom_counts(), loaded.atom_counts());
        let entry = cache.load(&key).unwrap().unwrap();
        assert_eq!(entry.payload, Payload::Atoms(fresh.atom_counts().to_vec()));
        let index = fs::read_to_string(cache.dir().join(INDEX)).unwrap();
        assert!(index.contains("v1;2,4;"));
    }

    #[test]
    fn corrupt_entry_is_a_miss() {
        let (_d, cache, g) = setup();
        let all: Vec<_> = g.elements().collect();
        cache.atoms(&g, &all, 1).unwrap();
        let key = CacheKey::new(&g, &all, ArtifactKind::Atoms);
        let path = cache.dir().join(key.file_name());
        let mut bytes = fs::read(&path).unwrap();
        let mid = bytes.len() / 2;
        bytes[mid] ^= 0x40;
        fs::write(&path, &bytes).unwrap();
        assert!(cache.load(&key).unwrap().is_none());
        fs::write(&path, &bytes[..10]).unwrap();
        assert!(cache.load(&key).unwrap().is_none());
        // recomputed and rewritten
        let again = cache.atoms(&g, &all, 1).unwrap();
        assert_eq!(again.atom_counts(), AtomSet::enumerate(&g, &all).unwrap().atom_counts());
        assert!(cache.load(&key).unwrap().is_some());
    }

    #[test]
    fn lengths_memo_round_trip() {
        let (_d, cache, g) = setup();
        let mut m = cache.block_monoid(&g, &g.elements().collect::<Vec<_>>(), 1).unwrap();
        let scan = m.half_factorial_scan(6);
        cache.save_lengths(&m).unwrap();
        let mut m2 = cache.block_monoid(&g, &g.elements().collect::<Vec<_>>(), 1).unwrap();
        assert_eq!(m2.memo().len(), m.memo().len());
        assert_eq!(m2.memo().entries(), m.memo().entries());
        assert_eq!(m2.half_factorial_scan(6).witness, scan.witness);
    }

    #[test]
    fn repeated_stores_converge() {
        let (_d, cache, g) = setup();
        let all: Vec<_> = g.elements().collect();
        let set = AtomSet::enumerate(&g, &all).unwrap();
        let entry = CacheEntry {
            key: CacheKey::new(&g, &all, ArtifactKind::Atoms),
            payload: Payload::Atoms(set.atom_counts().to_vec()),
            tool_version: "test".into(),
        };
        std::thread::scope(|s| {
            for _ in 0..4 {
                s.spawn(|| cache.store(&entry).unwrap());
            }
        });
        assert_eq!(cache.load(&entry.key).unwrap().unwrap(), entry);
        let index = fs::read_to_string(cache.dir().join(INDEX)).unwrap();
        assert_eq!(index.lines().count(), 1);
    }

    #[test]
    fn purge_and_unwritable() {
        let (_d, cache, g) = setup();
        cache.atoms(&g, &g.elements().collect::<Vec<_>>(), 1).unwrap();
        assert_eq!(cache.purge().unwrap(), 2);
        assert_eq!(cache.purge().unwrap(), 0);
        // a file where the directory should be: store fails, computation does not
        let file = tempfile::NamedTempFile::new().unwrap();
        let broken = Cache::new(file.path().join("sub"));
        let all: Vec<_> = g.elements().collect();
        let set = AtomSet::enumerate(&g, &all).unwrap();
        let entry = CacheEntry {
            key: CacheKey::new(&g, &all, ArtifactKind::Atoms),
            payload: Payload::Atoms(set.atom_counts().to_vec()),
            tool_version: "test".into(),
        };
        assert!(broken.store(&entry).is_err());
        assert_eq!(broken.atoms(&g, &all, 1).unwrap().len(), set.len());
    }
}
