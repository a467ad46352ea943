//! 8-bit grayscale image planes and binary PGM (P5) I/O.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// An 8-bit grayscale pixel matrix, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImagePlane {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl ImagePlane {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidPgm("zero image dimension".into()));
        }
        if pixels.len() != width * height {
            return Err(Error::LengthMismatch { left: pixels.len(), right: width * height });
        }
        Ok(Self { width, height, pixels })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    pub fn is_block_aligned(&self) -> bool {
        self.width.is_multiple_of(8) && self.height.is_multiple_of(8)
    }

    pub fn require_block_aligned(&self) -> Result<()> {
        if self.is_block_aligned() {
            Ok(())
        } else {
            Err(Error::NotBlockAligned { width: self.width, height: self.height })
        }
    }

    /// Center-crops to the largest 8-aligned size. Returns `None` when the
    /// plane is already aligned; errors when either side is below 8 pixels.
    pub fn center_crop_to_blocks(&self) -> Result<Option<ImagePlane>> {
        if self.is_block_aligned() {
            return Ok(None);
        }
        let w = self.width / 8 * 8;
        let h = self.height / 8 * 8;
        if w == 0 || h == 0 {
            return Err(Error::NotBlockAligned { width: self.width, height: self.height });
        }
        let x0 = (self.width - w) / 2;
        let y0 = (self.height - h) / 2;
        let mut pixels = Vec::with_capacity(w * h);
        for y in 0..h {
            let row = (y0 + y) * self.width + x0;
            pixels.extend_from_slice(&self.pixels[row..row + w]);
        }
        Ok(Some(ImagePlane { width: w, height: h, pixels }))
    }

    /// Parses a binary PGM (P5, maxval 255).
    pub fn from_pgm_bytes(bytes: &[u8]) -> Result<Self> {
        let mut pos = 0usize;
        let magic = read_token(bytes, &mut pos).ok_or_else(|| Error::InvalidPgm("missing magic".into()))?;
        if magic != b"P5" {
            return Err(Error::InvalidPgm(format!(
                "expected P5 magic, got {:?}",
                String::from_utf8_lossy(&magic)
            )));
        }
        let width = read_number(bytes, &mut pos)?;
        let height = read_number(bytes, &mut pos)?;
        let maxval = read_number(bytes, &mut pos)?;
        if maxval != 255 {
            return Err(Error::InvalidPgm(format!("maxval must be 255, got {maxval}")));
        }
        // exactly one whitespace byte separates the header from raster data
        if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
            return Err(Error::InvalidPgm("missing raster separator".into()));
        }
        pos += 1;
        let expected = width * height;
        let raster = &bytes[pos..];
        if raster.len() != expected {
            return Err(Error::InvalidPgm(format!(
                "raster has {} bytes, expected {expected}",
                raster.len()
            )));
        }
        ImagePlane::new(width, height, raster.to_vec())
    }

    /// Canonical PGM encoding; `from_pgm_bytes(to_pgm_bytes())` is identity.
    pub fn to_pgm_bytes(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    pub fn load_pgm<P: AsRef<Path>>(path: P) -> Result<Self> {
        Self::from_pgm_bytes(&fs::read(path)?)
    }

    /// Writes atomically (temp file + rename).
    pub fn save_pgm<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        write_atomic(path.as_ref(), &self.to_pgm_bytes())
    }
}

/// Atomic file write used for every artifact the crate produces.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = match path.file_name() {
        Some(name) => {
            let mut n = name.to_os_string();
            n.push(".tmp");
            path.with_file_name(n)
        }
        None => return Err(Error::Io(std::io::Error::other("path has no file name"))),
    };
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn skip_whitespace_and_comments(bytes: &[u8], pos: &mut usize) {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
        } else {
            return;
        }
    }
}

fn read_token(bytes: &[u8], pos: &mut usize) -> Option<Vec<u8>> {
    skip_whitespace_and_comments(bytes, pos);
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if *pos > start {
        Some(bytes[start..*pos].to_vec())
    } else {
        None
    }
}

fn read_number(bytes: &[u8], pos: &mut usize) -> Result<usize> {
    let tok = read_token(bytes, pos).ok_or_else(|| Error::InvalidPgm("truncated header".into()))?;
    std::str::from_utf8(&tok)
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::InvalidPgm(format!("bad header number {:?}", String::from_utf8_lossy(&tok))))
}
