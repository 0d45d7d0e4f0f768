//! Content-addressed dataset cache. Entries live under a root directory
//! (`SAT_CACHE_DIR`, defaulting to `./cache`) in folders named by dataset
//! kind and a hash of the generating spec, so any change to the spec or its
//! seeds produces a fresh entry.

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::DataError;

pub fn cache_root() -> PathBuf {
    std::env::var_os("SAT_CACHE_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("cache"))
}

/// Hex digest of the spec's JSON form, shortened for directory names.
pub fn spec_hash<T: Serialize>(spec: &T) -> String {
    let json = serde_json::to_string(spec).expect("specs serialize to JSON");
    let digest = Sha256::digest(json.as_bytes());
    let mut hex = String::with_capacity(16);
    for byte in digest.iter().take(8) {
        hex.push_str(&format!("{byte:02x}"));
    }
    hex
}

pub fn entry_dir(root: &Path, kind: &str, hash: &str) -> PathBuf {
    root.join(format!("{kind}-{hash}"))
}

/// Writes a cache entry atomically: payload first to a temp file, then a
/// rename, plus the spec JSON alongside for inspection.
pub fn write_entry<T: Serialize>(dir: &Path, spec: &T, payload: &[u8]) -> Result<(), DataError> {
    std::fs::create_dir_all(dir)?;
    let tmp = dir.join(".data.bin.tmp");
    std::fs::write(&tmp, payload)?;
    std::fs::rename(&tmp, dir.join("data.bin"))?;
    let json = serde_json::to_string_pretty(spec).expect("specs serialize to JSON");
    std::fs::write(dir.join("spec.json"), json)?;
    Ok(())
}

pub fn read_entry(dir: &Path) -> Result<Option<Vec<u8>>, DataError> {
    let file = dir.join("data.bin");
    if !file.exists() {
        return Ok(None);
    }
    Ok(Some(std::fs::read(file)?))
}

/// Little-endian binary encoder for cache payloads.
#[derive(Default)]
pub(crate) struct ByteWriter {
    buf: Vec<u8>,
}

impl ByteWriter {
    pub fn new(magic: &[u8; 8]) -> Self {
        ByteWriter { buf: magic.to_vec() }
    }

    pub fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    pub fn i8(&mut self, v: i8) {
        self.buf.push(v as u8);
    }

    pub fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn str(&mut self, s: &str) {
        self.u64(s.len() as u64);
        self.buf.extend_from_slice(s.as_bytes());
    }

    pub fn finish(self) -> Vec<u8> {
        self.buf
    }
}

/// Matching decoder; every overrun or mismatch surfaces as a corrupt-cache
/// error naming the field being read.
pub(crate) struct ByteReader<'a> {
    bytes: &'a [u8],
    offset: usize,
}

impl<'a> ByteReader<'a> {
    pub fn new(bytes: &'a [u8], magic: &[u8; 8]) -> Result<Self, DataError> {
        let mut reader = ByteReader { bytes, offset: 0 };
        let got = reader.take(8, "magic")?;
        if got != magic {
            return Err(DataError::BadCache(format!(
                "magic {:?} does not match {:?}",
                String::from_utf8_lossy(got),
                String::from_utf8_lossy(magic)
            )));
        }
        Ok(reader)
    }

    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8], DataError> {
        if self.offset + n > self.bytes.len() {
            return Err(DataError::BadCache(format!("truncated while reading {what}")));
        }
        let slice = &self.bytes[self.offset..self.offset + n];
        self.offset += n;
        Ok(slice)
    }

    pub fn u8(&mut self, what: &str) -> Result<u8, DataError> {
        Ok(self.take(1, what)?[0])
    }

    pub fn i8(&mut self, what: &str) -> Result<i8, DataError> {
        Ok(self.take(1, what)?[0] as i8)
    }

    pub fn u64(&mut self, what: &str) -> Result<u64, DataError> {
        let raw = self.take(8, what)?;
        Ok(u64::from_le_bytes(raw.try_into().expect("eight bytes")))
    }

    pub fn usize(&mut self, what: &str) -> Result<usize, DataError> {
        let v = self.u64(what)?;
        usize::try_from(v).map_err(|_| DataError::BadCache(format!("{what} out of range: {v}")))
    }

    pub fn f64(&mut self, what: &str) -> Result<f64, DataError> {
        let raw = self.take(8, what)?;
        Ok(f64::from_le_bytes(raw.try_into().expect("eight bytes")))
    }

    pub fn str(&mut self, what: &str) -> Result<String, DataError> {
        let len = self.usize(what)?;
        let raw = self.take(len, what)?;
        String::from_utf8(raw.to_vec())
            .map_err(|_| DataError::BadCache(format!("{what} is not utf-8")))
    }

    pub fn expect_end(&self) -> Result<(), DataError> {
        if self.offset != self.bytes.len() {
            return Err(DataError::BadCache(format!(
                "{} trailing bytes after payload",
                self.bytes.len() - self.offset
            )));
        }
        Ok(())
    }
}
