//! Binary field container.
//!
//! All numbers little-endian:
//!
//! | bytes | content |
//! |---|---|
//! | 4 | magic `HFLD` |
//! | 4 | format version (`u32`, currently 1) |
//! | 4 | dimension `n` (`u32`) |
//! | 8 | `λ` (`f64`) |
//! | 4 | band limit `L` (`u32`) |
//! | 8 + 8 | `r_min`, `r_max` (`f64`) |
//! | 8 | radial node count `N` (`u64`) |
//! | 4 + 8 | grading tag (`u32`: 0 uniform, 1 exponential) and its `γ` (`f64`, 0 if uniform) |
//! | 8N | radial nodes (`f64`) |
//! | 16·N·M | mode coefficients `(re, im)` row-major by radius, `M` modes per radius |
//!
//! A text manifest `<file>.manifest` records the SHA-256 of the binary and the header fields.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use sha2::{Digest, Sha256};

use super::field::{Domain, Field};
use super::grid::{Grading, RadialGrid};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"HFLD";
pub const VERSION: u32 = 1;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn manifest_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".manifest");
    PathBuf::from(name)
}

pub fn encode_field(field: &Field) -> Vec<u8> {
    let d = field.domain();
    let grid = d.grid();
    let modes = field.modes();
    let mut out = Vec::with_capacity(64 + 8 * grid.len() + 16 * modes.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(d.dim() as u32).to_le_bytes());
    out.extend_from_slice(&d.lambda().to_le_bytes());
    out.extend_from_slice(&(d.max_degree() as u32).to_le_bytes());
    out.extend_from_slice(&grid.r_min().to_le_bytes());
    out.extend_from_slice(&grid.r_max().to_le_bytes());
    out.extend_from_slice(&(grid.len() as u64).to_le_bytes());
    let (tag, gamma) = match grid.grading() {
        Grading::Uniform => (0u32, 0.0f64),
        Grading::Exponential { gamma } => (1, gamma),
    };
    out.extend_from_slice(&tag.to_le_bytes());
    out.extend_from_slice(&gamma.to_le_bytes());
    for r in grid.nodes() {
        out.extend_from_slice(&r.to_le_bytes());
    }
    for c in modes {
        out.extend_from_slice(&c.re.to_le_bytes());
        out.extend_from_slice(&c.im.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| {
                Error::Format(format!(
                    "truncated field file: need {n} bytes at offset {}",
                    self.pos
                ))
            })?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn decode_field(bytes: &[u8]) -> Result<Field> {
    let mut rd = Reader { bytes, pos: 0 };
    if rd.take(4)? != MAGIC {
        return Err(Error::Format("bad magic, not a field file".into()));
    }
    let version = rd.u32()?;
    if version != VERSION {
        return Err(Error::Format(format!(
            "unsupported field format version {version}"
        )));
    }
    let dim = rd.u32()? as usize;
    let lambda = rd.f64()?;
    let max_degree = rd.u32()? as usize;
    let r_min = rd.f64()?;
    let r_max = rd.f64()?;
    let count = rd.u64()? as usize;
    let grading = match (rd.u32()?, rd.f64()?) {
        (0, _) => Grading::Uniform,
        (1, gamma) => Grading::Exponential { gamma },
        (t, _) => return Err(Error::Format(format!("unknown grading tag {t}"))),
    };
    let grid =
        RadialGrid::new(r_min, r_max, count, grading).map_err(|e| Error::Format(e.to_string()))?;
    for (i, r) in grid.nodes().iter().enumerate() {
        if rd.f64()?.to_bits() != r.to_bits() {
            return Err(Error::Format(format!(
                "stored radial node {i} differs from the regenerated grid"
            )));
        }
    }
    let domain: Arc<Domain> =
        Domain::new(lambda, grid, dim, max_degree).map_err(|e| Error::Format(e.to_string()))?;
    let len = count * domain.mode_count();
    let mut modes = Vec::with_capacity(len);
    for _ in 0..len {
        let re = rd.f64()?;
        let im = rd.f64()?;
        modes.push(Complex64::new(re, im));
    }
    if rd.pos != bytes.len() {
        return Err(Error::Format(format!(
            "{} trailing bytes after field data",
            bytes.len() - rd.pos
        )));
    }
    Field::from_modes(&domain, modes)
}

fn manifest_text(field: &Field, file_name: &str, digest: &str, size: usize) -> String {
    let d = field.domain();
    format!(
        "format HFLD\nversion {VERSION}\nfile {file_name}\nbytes {size}\nsha256 {digest}\n\
         n {}\nlambda {:e}\nmax_degree {}\nradial_nodes {}\nr_min {:e}\nr_max {:e}\n",
        d.dim(),
        d.lambda(),
        d.max_degree(),
        d.radial_count(),
        d.grid().r_min(),
        d.grid().r_max()
    )
}

/// Writes the binary and its manifest; returns the SHA-256 of the binary.
pub fn write_field(path: &Path, field: &Field) -> Result<String> {
    let bytes = encode_field(field);
    let digest = sha256_hex(&bytes);
    std::fs::write(path, &bytes)?;
    let name = path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    std::fs::write(
        manifest_path(path),
        manifest_text(field, &name, &digest, bytes.len()),
    )?;
    Ok(digest)
}

/// Reads a field, verifying the checksum against the manifest when one exists.
pub fn read_field(path: &Path) -> Result<Field> {
    let bytes = std::fs::read(path)?;
    let manifest = manifest_path(path);
    if manifest.exists() {
        let text = std::fs::read_to_string(&manifest)?;
        let recorded = text
            .lines()
            .find_map(|l| l.strip_prefix("sha256 "))
            .ok_or_else(|| Error::Format(format!("{} has no sha256 line", manifest.display())))?;
        let actual = sha256_hex(&bytes);
        if recorded.trim() != actual {
            return Err(Error::Format(format!(
                "checksum mismatch for {}: manifest {recorded}, file {actual}",
                path.display()
            )));
        }
    }
    decode_field(&bytes)
}
