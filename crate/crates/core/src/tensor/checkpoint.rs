//! Parameter checkpoints.
//!
//! Layout: the magic bytes `SATCKPT1`, a length-prefixed UTF-8 metadata
//! string (opaque to this module, the harness stores its config JSON there),
//! a u32 parameter count, one manifest entry per parameter (length-prefixed
//! name, u32 rows, u32 cols) in ascending name order, then every value as
//! little-endian f64 in manifest order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::dense::Tensor;
use super::params::ParamSet;
use super::TensorError;

const MAGIC: &[u8; 8] = b"SATCKPT1";

pub fn save_checkpoint(params: &ParamSet, meta: &str, path: &Path) -> Result<(), TensorError> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    write_bytes(&mut w, meta.as_bytes())?;
    let ids = params.ids_by_name();
    w.write_all(&(ids.len() as u32).to_le_bytes())?;
    for &id in &ids {
        let value = params.value(id);
        write_bytes(&mut w, params.name(id).as_bytes())?;
        w.write_all(&(value.rows() as u32).to_le_bytes())?;
        w.write_all(&(value.cols() as u32).to_le_bytes())?;
    }
    for &id in &ids {
        for v in params.value(id).data() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<(ParamSet, String), TensorError> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 8];
    read_exact(&mut r, &mut magic)?;
    if &magic != MAGIC {
        return Err(TensorError::BadCheckpoint("wrong magic bytes".into()));
    }
    let meta = String::from_utf8(read_bytes(&mut r)?)
        .map_err(|_| TensorError::BadCheckpoint("metadata is not UTF-8".into()))?;
    let count = read_u32(&mut r)? as usize;
    let mut manifest = Vec::with_capacity(count);
    for _ in 0..count {
        let name = String::from_utf8(read_bytes(&mut r)?)
            .map_err(|_| TensorError::BadCheckpoint("parameter name is not UTF-8".into()))?;
        let rows = read_u32(&mut r)? as usize;
        let cols = read_u32(&mut r)? as usize;
        manifest.push((name, rows, cols));
    }
    let mut params = ParamSet::new();
    for (name, rows, cols) in manifest {
        let mut data = vec![0.0; rows * cols];
        for v in &mut data {
            let mut buf = [0u8; 8];
            read_exact(&mut r, &mut buf)?;
            *v = f64::from_le_bytes(buf);
        }
        params.add(name, Tensor::new(rows, cols, data)?)?;
    }
    Ok((params, meta))
}

fn write_bytes(w: &mut impl Write, bytes: &[u8]) -> Result<(), TensorError> {
    w.write_all(&(bytes.len() as u32).to_le_bytes())?;
    w.write_all(bytes)?;
    Ok(())
}

fn read_bytes(r: &mut impl Read) -> Result<Vec<u8>, TensorError> {
    let len = read_u32(r)? as usize;
    let mut buf = vec![0u8; len];
    read_exact(r, &mut buf)?;
    Ok(buf)
}

fn read_u32(r: &mut impl Read) -> Result<u32, TensorError> {
    let mut buf = [0u8; 4];
    read_exact(r, &mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_exact(r: &mut impl Read, buf: &mut [u8]) -> Result<(), TensorError> {
    r.read_exact(buf)
        .map_err(|_| TensorError::BadCheckpoint("file is truncated".into()))
}
