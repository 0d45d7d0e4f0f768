//! Reader for the IDX image and label files used by the MNIST distribution.

use std::path::Path;

use super::DataError;

const IMAGE_MAGIC: u32 = 0x0000_0803;
const LABEL_MAGIC: u32 = 0x0000_0801;

/// A grayscale image with intensities scaled into [0, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<f64>,
}

impl GrayImage {
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.pixels[y * self.width + x]
    }
}

pub fn read_idx_images(path: &Path) -> Result<Vec<GrayImage>, DataError> {
    let bytes = std::fs::read(path)?;
    parse_idx_images(&bytes, &path.display().to_string())
}

pub fn read_idx_labels(path: &Path) -> Result<Vec<u8>, DataError> {
    let bytes = std::fs::read(path)?;
    parse_idx_labels(&bytes, &path.display().to_string())
}

pub fn parse_idx_images(bytes: &[u8], origin: &str) -> Result<Vec<GrayImage>, DataError> {
    let mut cursor = Cursor { bytes, offset: 0, origin };
    let magic = cursor.read_u32()?;
    if magic != IMAGE_MAGIC {
        return Err(DataError::BadMagic {
            origin: origin.to_string(),
            got: magic,
            expected: IMAGE_MAGIC,
        });
    }
    let count = cursor.read_u32()? as usize;
    let height = cursor.read_u32()? as usize;
    let width = cursor.read_u32()? as usize;
    let mut images = Vec::with_capacity(count);
    for _ in 0..count {
        let raw = cursor.read_bytes(width * height)?;
        let pixels = raw.iter().map(|&b| f64::from(b) / 255.0).collect();
        images.push(GrayImage { width, height, pixels });
    }
    Ok(images)
}

pub fn parse_idx_labels(bytes: &[u8], origin: &str) -> Result<Vec<u8>, DataError> {
    let mut cursor = Cursor { bytes, offset: 0, origin };
    let magic = cursor.read_u32()?;
    if magic != LABEL_MAGIC {
        return Err(DataError::BadMagic {
            origin: origin.to_string(),
            got: magic,
            expected: LABEL_MAGIC,
        });
    }
    let count = cursor.read_u32()? as usize;
    Ok(cursor.read_bytes(count)?.to_vec())
}

struct Cursor<'a> {
    bytes: &'a [u8],
    offset: usize,
    origin: &'a str,
}

impl<'a> Cursor<'a> {
    fn read_u32(&mut self) -> Result<u32, DataError> {
        let raw = self.read_bytes(4)?;
        Ok(u32::from_be_bytes([raw[0], raw[1], raw[2], raw[3]]))
    }

    fn read_bytes(&mut self, n: usize) -> Result<&'a [u8], DataError> {
        if self.offset + n > self.bytes.len() {
            return Err(DataError::Truncated(self.origin.to_string()));
        }
        let slice = &self.bytes[self.offset..self.offset + n];
        self.offset += n;
        Ok(slice)
    }
}
