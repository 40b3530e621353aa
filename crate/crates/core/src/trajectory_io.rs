//! Trajectory file formats.
//!
//! Text: CSV with header `t,u1,u2,i`, 17 significant digits per value.
//!
//! Binary: magic `CHUA`, format version (u32 LE), point count (u64 LE), then
//! `count × 4` little-endian f64 values in `t,u1,u2,i` order.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Seek, SeekFrom, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::integrator::{decimation_stride, Trajectory, TrajectoryPoint};
use crate::model::StateVector;

pub const MAGIC: &[u8; 4] = b"CHUA";
pub const FORMAT_VERSION: u32 = 1;
pub const HEADER_LEN: u64 = 16;
const RECORD_LEN: u64 = 32;
pub const CSV_HEADER: &str = "t,u1,u2,i";

#[derive(Debug, Error)]
pub enum TrajectoryIoError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("not a trajectory file: bad magic")]
    BadMagic,
    #[error("unsupported binary format version {0}")]
    UnsupportedVersion(u32),
    #[error("truncated file: header declares {declared} points, found {found}")]
    Truncated { declared: u64, found: u64 },
    #[error("malformed CSV at line {line}: {reason}")]
    Csv { line: usize, reason: String },
    #[error("non-finite value at point {0}")]
    NonFinite(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrajectoryFormat {
    Csv,
    Bin,
}

impl TrajectoryFormat {
    pub fn from_extension(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()? {
            "csv" => Some(TrajectoryFormat::Csv),
            "bin" => Some(TrajectoryFormat::Bin),
            _ => None,
        }
    }

    /// Sniffs the first bytes of a file; anything without the binary magic is CSV.
    pub fn detect(path: &Path) -> Result<Self, TrajectoryIoError> {
        let mut head = [0u8; 4];
        let mut f = File::open(path)?;
        let mut filled = 0;
        while filled < 4 {
            let n = f.read(&mut head[filled..])?;
            if n == 0 {
                break;
            }
            filled += n;
        }
        Ok(if filled == 4 && &head == MAGIC { TrajectoryFormat::Bin } else { TrajectoryFormat::Csv })
    }
}

pub fn write_csv<W: Write>(traj: &Trajectory, out: W) -> io::Result<()> {
    let mut w = BufWriter::new(out);
    writeln!(w, "{CSV_HEADER}")?;
    for p in &traj.points {
        writeln!(w, "{:.16e},{:.16e},{:.16e},{:.16e}", p.t, p.state.u1, p.state.u2, p.state.i)?;
    }
    w.flush()
}

fn parse_csv_row(line: &str, lineno: usize) -> Result<TrajectoryPoint, TrajectoryIoError> {
    let mut vals = [0.0f64; 4];
    let mut fields = line.split(',');
    for v in vals.iter_mut() {
        let field = fields
            .next()
            .ok_or_else(|| TrajectoryIoError::Csv { line: lineno, reason: "expected 4 columns".into() })?;
        *v = field
            .trim()
            .parse()
            .map_err(|e| TrajectoryIoError::Csv { line: lineno, reason: format!("{field:?}: {e}") })?;
    }
    if fields.next().is_some() {
        return Err(TrajectoryIoError::Csv { line: lineno, reason: "expected 4 columns".into() });
    }
    Ok(TrajectoryPoint { t: vals[0], state: StateVector::new(vals[1], vals[2], vals[3]) })
}

/// Reads a CSV trajectory, keeping the first and every `stride`-th row after it.
pub fn read_csv_strided<R: Read>(input: R, stride: usize) -> Result<Trajectory, TrajectoryIoError> {
    let stride = stride.max(1);
    let reader = BufReader::new(input);
    let mut lines = reader.lines();
    match lines.next() {
        Some(h) => {
            let h = h?;
            if h.trim() != CSV_HEADER {
                return Err(TrajectoryIoError::Csv { line: 1, reason: format!("expected header `{CSV_HEADER}`") });
            }
        }
        None => return Err(TrajectoryIoError::Csv { line: 1, reason: "empty file".into() }),
    }
    let mut points = Vec::new();
    let mut row = 0usize;
    for (idx, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        if row.is_multiple_of(stride) {
            let p = parse_csv_row(&line, idx + 2)?;
            if !(p.t.is_finite() && p.state.is_finite()) {
                return Err(TrajectoryIoError::NonFinite(row));
            }
            points.push(p);
        }
        row += 1;
    }
    Ok(Trajectory::from_points(points))
}

pub fn read_csv<R: Read>(input: R) -> Result<Trajectory, TrajectoryIoError> {
    read_csv_strided(input, 1)
}

pub fn write_binary<W: Write>(traj: &Trajectory, out: W) -> io::Result<()> {
    let mut w = BufWriter::new(out);
    w.write_all(MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    w.write_all(&(traj.points.len() as u64).to_le_bytes())?;
    for p in &traj.points {
        for v in [p.t, p.state.u1, p.state.u2, p.state.i] {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()
}

fn read_header<R: Read>(r: &mut R) -> Result<u64, TrajectoryIoError> {
    let mut header = [0u8; HEADER_LEN as usize];
    r.read_exact(&mut header).map_err(|e| match e.kind() {
        io::ErrorKind::UnexpectedEof => TrajectoryIoError::BadMagic,
        _ => TrajectoryIoError::Io(e),
    })?;
    if &header[0..4] != MAGIC {
        return Err(TrajectoryIoError::BadMagic);
    }
    let version = u32::from_le_bytes(header[4..8].try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(TrajectoryIoError::UnsupportedVersion(version));
    }
    Ok(u64::from_le_bytes(header[8..16].try_into().unwrap()))
}

fn read_record<R: Read>(r: &mut R, index: u64, declared: u64) -> Result<TrajectoryPoint, TrajectoryIoError> {
    let mut rec = [0u8; RECORD_LEN as usize];
    r.read_exact(&mut rec).map_err(|e| match e.kind() {
        io::ErrorKind::UnexpectedEof => TrajectoryIoError::Truncated { declared, found: index },
        _ => TrajectoryIoError::Io(e),
    })?;
    let f = |k: usize| f64::from_le_bytes(rec[8 * k..8 * k + 8].try_into().unwrap());
    Ok(TrajectoryPoint { t: f(0), state: StateVector::new(f(1), f(2), f(3)) })
}

/// Reads a binary trajectory. Values are returned bit-for-bit as stored.
pub fn read_binary<R: Read>(input: R) -> Result<Trajectory, TrajectoryIoError> {
    let mut r = BufReader::new(input);
    let count = read_header(&mut r)?;
    let mut points = Vec::with_capacity(count.min(1 << 24) as usize);
    for k in 0..count {
        points.push(read_record(&mut r, k, count)?);
    }
    Ok(Trajectory::from_points(points))
}

/// Reads every `stride`-th record of a binary trajectory, seeking over the
/// rest so that huge files never have to be fully resident.
pub fn read_binary_strided<R: Read + Seek>(input: R, stride: usize) -> Result<Trajectory, TrajectoryIoError> {
    let stride = stride.max(1) as u64;
    let mut r = BufReader::new(input);
    let count = read_header(&mut r)?;
    let total = r.seek(SeekFrom::End(0))?;
    let available = total.saturating_sub(HEADER_LEN) / RECORD_LEN;
    if available < count {
        return Err(TrajectoryIoError::Truncated { declared: count, found: available });
    }
    let mut points = Vec::with_capacity(count.div_ceil(stride).min(1 << 24) as usize);
    r.seek(SeekFrom::Start(HEADER_LEN))?;
    let gap = ((stride - 1) * RECORD_LEN) as i64;
    let mut k = 0;
    while k < count {
        points.push(read_record(&mut r, k, count)?);
        k += stride;
        if k < count {
            r.seek_relative(gap)?;
        }
    }
    Ok(Trajectory::from_points(points))
}

/// Number of points in a binary trajectory file, read from its header.
pub fn binary_point_count(path: &Path) -> Result<u64, TrajectoryIoError> {
    read_header(&mut File::open(path)?)
}

pub fn csv_point_count(path: &Path) -> Result<u64, TrajectoryIoError> {
    let r = BufReader::new(File::open(path)?);
    let mut n = 0u64;
    for line in r.lines().skip(1) {
        if !line?.trim().is_empty() {
            n += 1;
        }
    }
    Ok(n)
}

/// Loads a trajectory of either format, optionally decimating on load so
/// that at most `2·max_points - 1` points are kept.
pub fn load_trajectory(path: &Path, max_points: Option<usize>) -> Result<Trajectory, TrajectoryIoError> {
    let format = TrajectoryFormat::detect(path)?;
    let stride = match max_points {
        Some(target) => {
            let count = match format {
                TrajectoryFormat::Bin => binary_point_count(path)?,
                TrajectoryFormat::Csv => csv_point_count(path)?,
            };
            decimation_stride(count as usize, target)
        }
        None => 1,
    };
    let f = File::open(path)?;
    match format {
        TrajectoryFormat::Bin if stride == 1 => read_binary(f),
        TrajectoryFormat::Bin => read_binary_strided(f, stride),
        TrajectoryFormat::Csv => read_csv_strided(f, stride),
    }
}

pub fn save_trajectory(traj: &Trajectory, path: &Path, format: TrajectoryFormat) -> io::Result<()> {
    write_atomic(path, |w| match format {
        TrajectoryFormat::Csv => write_csv(traj, w),
        TrajectoryFormat::Bin => write_binary(traj, w),
    })
}

/// Writes through a sibling temporary file and renames it into place.
pub fn write_atomic<F>(path: &Path, body: F) -> io::Result<()>
where
    F: FnOnce(&mut File) -> io::Result<()>,
{
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "path has no file name"))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = File::create(&tmp)?;
        body(&mut f)?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    result
}
