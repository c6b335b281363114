//! IDX files as used by MNIST: big-endian magic `0x00000803` for `u8` image
//! stacks (N × rows × cols) and `0x00000801` for `u8` label vectors.

use std::fs;
use std::path::{Path, PathBuf};

use crate::dataset::DatasetHandle;
use crate::error::{Result, ToolError};

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

struct Reader<'a> {
    path: &'a Path,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn err(&self, offset: usize, message: impl Into<String>) -> ToolError {
        ToolError::Format {
            path: self.path.to_path_buf(),
            offset: offset as u64,
            message: message.into(),
        }
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        let end = self.pos + 4;
        let chunk = self
            .bytes
            .get(self.pos..end)
            .ok_or_else(|| self.err(self.pos, format!("truncated while reading {what}")))?;
        self.pos = end;
        Ok(u32::from_be_bytes(chunk.try_into().expect("4 bytes")))
    }

    fn magic(&mut self, expected: u32) -> Result<()> {
        let got = self.u32("magic number")?;
        if got != expected {
            return Err(self.err(
                0,
                format!("bad magic 0x{got:08x}, expected 0x{expected:08x}"),
            ));
        }
        Ok(())
    }

    fn payload(&mut self, len: usize) -> Result<&'a [u8]> {
        let end = self.pos + len;
        let data = self.bytes.get(self.pos..end).ok_or_else(|| {
            self.err(
                self.bytes.len(),
                format!(
                    "truncated payload: need {len} bytes from offset {}",
                    self.pos
                ),
            )
        })?;
        if end != self.bytes.len() {
            return Err(self.err(end, "trailing bytes after payload"));
        }
        self.pos = end;
        Ok(data)
    }
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| ToolError::io(path, e))
}

/// Returns `(rows, cols, pixels)` of an image file.
pub fn read_images(path: &Path) -> Result<(usize, usize, Vec<u8>)> {
    let bytes = read(path)?;
    let mut r = Reader {
        path,
        bytes: &bytes,
        pos: 0,
    };
    r.magic(IMAGES_MAGIC)?;
    let n = r.u32("image count")? as usize;
    let rows = r.u32("row count")? as usize;
    let cols = r.u32("column count")? as usize;
    Ok((rows, cols, r.payload(n * rows * cols)?.to_vec()))
}

pub fn read_labels(path: &Path) -> Result<Vec<u8>> {
    let bytes = read(path)?;
    let mut r = Reader {
        path,
        bytes: &bytes,
        pos: 0,
    };
    r.magic(LABELS_MAGIC)?;
    let n = r.u32("label count")? as usize;
    Ok(r.payload(n)?.to_vec())
}

pub fn write_images(path: &Path, rows: usize, cols: usize, pixels: &[u8]) -> Result<()> {
    let n = pixels.len() / (rows * cols);
    let mut out = Vec::with_capacity(16 + pixels.len());
    out.extend(IMAGES_MAGIC.to_be_bytes());
    for d in [n, rows, cols] {
        out.extend((d as u32).to_be_bytes());
    }
    out.extend(pixels);
    fs::write(path, out).map_err(|e| ToolError::io(path, e))
}

pub fn write_labels(path: &Path, labels: &[u8]) -> Result<()> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend(LABELS_MAGIC.to_be_bytes());
    out.extend((labels.len() as u32).to_be_bytes());
    out.extend(labels);
    fs::write(path, out).map_err(|e| ToolError::io(path, e))
}

/// Loads an image/label file pair into a `(N, 1, rows, cols)` dataset scaled to `[0, 1]`.
pub fn load_idx_dataset(images: &Path, labels: &Path, num_classes: usize) -> Result<DatasetHandle> {
    let (rows, cols, pixels) = read_images(images)?;
    let raw_labels = read_labels(labels)?;
    let n = raw_labels.len();
    if pixels.len() != n * rows * cols {
        return Err(ToolError::Data(format!(
            "{} holds {} images but {} holds {n} labels",
            images.display(),
            pixels.len() / (rows * cols).max(1),
            labels.display()
        )));
    }
    if let Some((i, &l)) = raw_labels
        .iter()
        .enumerate()
        .find(|(_, &l)| l as usize >= num_classes)
    {
        return Err(ToolError::Format {
            path: labels.to_path_buf(),
            offset: 8 + i as u64,
            message: format!("label {l} outside 0..{num_classes}"),
        });
    }
    let split = images
        .file_name()
        .map(|f| f.to_string_lossy().into_owned())
        .unwrap_or_default();
    DatasetHandle::new(
        vec![1, rows, cols],
        pixels.iter().map(|&p| p as f64 / 255.0).collect(),
        raw_labels.iter().map(|&l| l as usize).collect(),
        num_classes,
        split,
    )
}

/// MNIST file names for a split inside `dir`: `train` or `t10k`.
pub fn split_paths(dir: &Path, split: &str) -> (PathBuf, PathBuf) {
    (
        dir.join(format!("{split}-images-idx3-ubyte")),
        dir.join(format!("{split}-labels-idx1-ubyte")),
    )
}

pub fn load_split(dir: &Path, split: &str) -> Result<DatasetHandle> {
    let (images, labels) = split_paths(dir, split);
    load_idx_dataset(&images, &labels, 10)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bad_magic_reports_offset_zero() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x");
        fs::write(&p, [0, 0, 8, 1, 0, 0, 0, 0]).unwrap();
        match read_images(&p) {
            Err(ToolError::Format { offset, .. }) => assert_eq!(offset, 0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn truncated_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x");
        fs::write(&p, [0, 0, 8, 3, 0, 0]).unwrap();
        match read_images(&p) {
            Err(ToolError::Format { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("{other:?}"),
        }
    }
}
