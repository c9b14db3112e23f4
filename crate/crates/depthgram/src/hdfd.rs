//! The HDFD on-disk dataset format and CSV import.
//!
//! HDFD ("high-dimensional functional data") is a flat little-endian binary
//! layout built for one access pattern: reading a `p >> n` dataset one
//! dimension at a time, in parallel, without loading the rest.
//!
//! Byte layout:
//!
//! ```text
//! offset  size      field
//! 0       4         magic "HDFD"
//! 4       2         format version, u16 (currently 1)
//! 6       4         n   — observations, u32
//! 10      8         p   — dimensions, u64
//! 18      4         N   — grid points per curve, u32
//! 22      1         grid flag: 1 if an explicit time grid follows
//! 23      8*N       time grid, f64 (only when the flag is 1)
//! ...     8*n*N*p   payload, f64
//! ```
//!
//! The payload is dimension-major: all of dimension 1, then dimension 2, and
//! so on; within a dimension, observation-major (`block[i*N + k]`). Dimension
//! `j` (0-based) therefore starts at `payload_offset + j*n*N*8`, which is what
//! makes the format seekable and cheap to stream.

use std::fs::File;
use std::io::{BufWriter, Read, Seek, SeekFrom, Write};
use std::os::unix::fs::FileExt;
use std::path::{Path, PathBuf};

use crate::depth::check_accumulator_capacity;
use crate::error::Error;

const MAGIC: [u8; 4] = *b"HDFD";
const VERSION: u16 = 1;

/// Dataset dimensions: `n` observations, `p` dimensions, `n_points` grid
/// points per curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DatasetShape {
    pub n: usize,
    pub p: usize,
    pub n_points: usize,
}

impl DatasetShape {
    /// Values in one dimension block.
    pub fn block_len(&self) -> usize {
        self.n * self.n_points
    }

    /// Payload size in bytes.
    pub fn payload_bytes(&self) -> u64 {
        self.block_len() as u64 * self.p as u64 * 8
    }

    /// Checks the shape against the limits of the analysis pipeline: at
    /// least two observations, nonempty grid and dimensions, and integer
    /// accumulators that cannot overflow.
    pub fn validate(&self) -> Result<(), Error> {
        if self.n < 2 {
            return Err(Error::TooFewCurves { n: self.n });
        }
        if self.p == 0 || self.n_points == 0 {
            return Err(Error::Shape(format!(
                "need p >= 1 and N >= 1, got p = {}, N = {}",
                self.p, self.n_points
            )));
        }
        check_accumulator_capacity(self.n, self.p.max(self.n_points) as u64)
    }
}

/// Header of an HDFD file: shape plus an optional explicit time grid.
///
/// The analysis averages uniformly over grid columns, so the grid is carried
/// as metadata only; when absent, a uniform grid on `[0, 1]` is implied.
#[derive(Debug, Clone, PartialEq)]
pub struct HdfdHeader {
    pub shape: DatasetShape,
    pub time_grid: Option<Vec<f64>>,
}

impl HdfdHeader {
    fn header_bytes(&self) -> u64 {
        23 + if self.time_grid.is_some() {
            8 * self.shape.n_points as u64
        } else {
            0
        }
    }
}

/// Read access to a dataset, one dimension block at a time.
///
/// `read_dimension` takes `&self` so parallel workers can pull different
/// dimensions concurrently; implementations must be thread-safe.
pub trait DimensionSource: Sync {
    /// Dataset shape.
    fn shape(&self) -> DatasetShape;

    /// Fills `out` (length `n * n_points`, observation-major) with dimension
    /// `j` (0-based).
    fn read_dimension(&self, j: usize, out: &mut [f64]) -> Result<(), Error>;

    /// Explicit time grid, when the source carries one.
    fn time_grid(&self) -> Option<&[f64]> {
        None
    }
}

// ---------------------------------------------------------------------------
// Writer
// ---------------------------------------------------------------------------

/// Streaming HDFD writer: header up front, then one dimension at a time.
pub struct DatasetWriter {
    out: BufWriter<File>,
    path: PathBuf,
    shape: DatasetShape,
    next_j: usize,
}

impl DatasetWriter {
    /// Creates the file and writes the header.
    pub fn create(path: impl AsRef<Path>, header: &HdfdHeader) -> Result<Self, Error> {
        let path = path.as_ref().to_path_buf();
        header.shape.validate()?;
        if let Some(grid) = &header.time_grid {
            if grid.len() != header.shape.n_points {
                return Err(Error::Shape(format!(
                    "time grid has {} points, dataset has {}",
                    grid.len(),
                    header.shape.n_points
                )));
            }
        }
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut out = BufWriter::new(file);
        let io = |e| Error::io(&path, e);
        out.write_all(&MAGIC).map_err(io)?;
        out.write_all(&VERSION.to_le_bytes()).map_err(io)?;
        out.write_all(&(header.shape.n as u32).to_le_bytes()).map_err(io)?;
        out.write_all(&(header.shape.p as u64).to_le_bytes()).map_err(io)?;
        out.write_all(&(header.shape.n_points as u32).to_le_bytes())
            .map_err(io)?;
        out.write_all(&[header.time_grid.is_some() as u8]).map_err(io)?;
        if let Some(grid) = &header.time_grid {
            for &t in grid {
                out.write_all(&t.to_le_bytes()).map_err(io)?;
            }
        }
        Ok(Self {
            out,
            path,
            shape: header.shape,
            next_j: 0,
        })
    }

    /// Appends the next dimension block (observation-major, `n * N` values).
    /// Rejects wrong lengths, extra dimensions, and non-finite values with
    /// their 1-based `(observation, dimension, point)` coordinates.
    pub fn write_dimension(&mut self, block: &[f64]) -> Result<(), Error> {
        if self.next_j >= self.shape.p {
            return Err(Error::Shape(format!(
                "dataset already has all {} dimensions",
                self.shape.p
            )));
        }
        if block.len() != self.shape.block_len() {
            return Err(Error::Shape(format!(
                "dimension block has {} values, expected n*N = {}",
                block.len(),
                self.shape.block_len()
            )));
        }
        let n_points = self.shape.n_points;
        for (pos, &v) in block.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteData {
                    observation: pos / n_points + 1,
                    dimension: self.next_j + 1,
                    point: pos % n_points + 1,
                    value: v,
                });
            }
            self.out
                .write_all(&v.to_le_bytes())
                .map_err(|e| Error::io(&self.path, e))?;
        }
        self.next_j += 1;
        Ok(())
    }

    /// Flushes and checks that every dimension was written.
    pub fn finish(mut self) -> Result<(), Error> {
        if self.next_j != self.shape.p {
            return Err(Error::Shape(format!(
                "only {} of {} dimensions written",
                self.next_j, self.shape.p
            )));
        }
        self.out.flush().map_err(|e| Error::io(&self.path, e))
    }
}

/// Copies a whole source to an HDFD file.
pub fn write_dataset(source: &dyn DimensionSource, path: impl AsRef<Path>) -> Result<(), Error> {
    let shape = source.shape();
    let header = HdfdHeader {
        shape,
        time_grid: source.time_grid().map(|g| g.to_vec()),
    };
    let mut writer = DatasetWriter::create(path, &header)?;
    let mut block = vec![0.0; shape.block_len()];
    for j in 0..shape.p {
        source.read_dimension(j, &mut block)?;
        writer.write_dimension(&block)?;
    }
    writer.finish()
}

// ---------------------------------------------------------------------------
// Reader
// ---------------------------------------------------------------------------

/// Seekable HDFD reader; safe to share across threads.
#[derive(Debug)]
pub struct HdfdReader {
    file: File,
    path: PathBuf,
    header: HdfdHeader,
    payload_offset: u64,
}

impl HdfdReader {
    /// Opens and validates a dataset file.
    ///
    /// Checks magic, version, shape sanity, and that the file length matches
    /// the header exactly — a truncated payload reports expected vs actual
    /// byte counts rather than failing mid-analysis.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, Error> {
        let path = path.as_ref().to_path_buf();
        let mut file = File::open(&path).map_err(|e| Error::io(&path, e))?;
        let bad = |message: String| Error::Format {
            path: path.clone(),
            message,
        };

        let mut fixed = [0u8; 23];
        file.read_exact(&mut fixed)
            .map_err(|_| bad("file shorter than the 23-byte fixed header".into()))?;
        if fixed[0..4] != MAGIC {
            return Err(bad(format!(
                "bad magic {:?}, expected \"HDFD\"",
                &fixed[0..4]
            )));
        }
        let version = u16::from_le_bytes([fixed[4], fixed[5]]);
        if version != VERSION {
            return Err(bad(format!(
                "unsupported format version {version}, this build reads version {VERSION}"
            )));
        }
        let n = u32::from_le_bytes(fixed[6..10].try_into().unwrap()) as usize;
        let p = u64::from_le_bytes(fixed[10..18].try_into().unwrap()) as usize;
        let n_points = u32::from_le_bytes(fixed[18..22].try_into().unwrap()) as usize;
        let shape = DatasetShape { n, p, n_points };
        shape.validate()?;

        let time_grid = if fixed[22] == 1 {
            let mut grid = vec![0.0; n_points];
            let mut buf = vec![0u8; n_points * 8];
            file.read_exact(&mut buf)
                .map_err(|_| bad("file truncated inside the time grid".into()))?;
            for (t, chunk) in grid.iter_mut().zip(buf.chunks_exact(8)) {
                *t = f64::from_le_bytes(chunk.try_into().unwrap());
            }
            Some(grid)
        } else if fixed[22] == 0 {
            None
        } else {
            return Err(bad(format!("grid flag must be 0 or 1, got {}", fixed[22])));
        };

        let header = HdfdHeader { shape, time_grid };
        let payload_offset = header.header_bytes();
        let actual = file
            .seek(SeekFrom::End(0))
            .map_err(|e| Error::io(&path, e))?;
        let expected = payload_offset + shape.payload_bytes();
        if actual != expected {
            return Err(bad(format!(
                "expected {expected} bytes ({} payload values), found {actual}",
                shape.block_len() as u64 * shape.p as u64
            )));
        }
        Ok(Self {
            file,
            path,
            header,
            payload_offset,
        })
    }

    /// File header (shape plus optional grid).
    pub fn header(&self) -> &HdfdHeader {
        &self.header
    }
}

impl DimensionSource for HdfdReader {
    fn shape(&self) -> DatasetShape {
        self.header.shape
    }

    fn read_dimension(&self, j: usize, out: &mut [f64]) -> Result<(), Error> {
        let shape = self.header.shape;
        assert!(j < shape.p, "dimension {j} out of range (p = {})", shape.p);
        assert_eq!(out.len(), shape.block_len(), "block buffer has wrong length");
        let offset = self.payload_offset + (j as u64) * shape.block_len() as u64 * 8;
        let mut buf = vec![0u8; shape.block_len() * 8];
        // Positioned read: no shared cursor, so concurrent readers are fine.
        self.file
            .read_exact_at(&mut buf, offset)
            .map_err(|e| Error::io(&self.path, e))?;
        for (pos, chunk) in buf.chunks_exact(8).enumerate() {
            let v = f64::from_le_bytes(chunk.try_into().unwrap());
            if !v.is_finite() {
                return Err(Error::NonFiniteData {
                    observation: pos / shape.n_points + 1,
                    dimension: j + 1,
                    point: pos % shape.n_points + 1,
                    value: v,
                });
            }
            out[pos] = v;
        }
        Ok(())
    }

    fn time_grid(&self) -> Option<&[f64]> {
        self.header.time_grid.as_deref()
    }
}

// ---------------------------------------------------------------------------
// In-memory datasets
// ---------------------------------------------------------------------------

/// A dataset held fully in memory, dimension-major like the file payload.
/// Mostly used by tests and small studies.
#[derive(Debug, Clone)]
pub struct MemoryDataset {
    shape: DatasetShape,
    values: Vec<f64>,
    time_grid: Option<Vec<f64>>,
}

impl MemoryDataset {
    /// Wraps a dimension-major buffer of `p * n * N` values.
    pub fn new(
        shape: DatasetShape,
        values: Vec<f64>,
        time_grid: Option<Vec<f64>>,
    ) -> Result<Self, Error> {
        shape.validate()?;
        if values.len() != shape.block_len() * shape.p {
            return Err(Error::Shape(format!(
                "expected {} values for shape {shape:?}, got {}",
                shape.block_len() * shape.p,
                values.len()
            )));
        }
        if let Some(grid) = &time_grid {
            if grid.len() != shape.n_points {
                return Err(Error::Shape(format!(
                    "time grid has {} points, dataset has {}",
                    grid.len(),
                    shape.n_points
                )));
            }
        }
        Ok(Self {
            shape,
            values,
            time_grid,
        })
    }

    /// Materializes any source in memory.
    pub fn from_source(source: &dyn DimensionSource) -> Result<Self, Error> {
        let shape = source.shape();
        let mut values = vec![0.0; shape.block_len() * shape.p];
        for j in 0..shape.p {
            let block = &mut values[j * shape.block_len()..(j + 1) * shape.block_len()];
            source.read_dimension(j, block)?;
        }
        Ok(Self {
            shape,
            values,
            time_grid: source.time_grid().map(|g| g.to_vec()),
        })
    }

    /// Value at observation `i`, dimension `j`, grid point `k` (0-based).
    pub fn value(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[j * self.shape.block_len() + i * self.shape.n_points + k]
    }

    /// Mutable access for tests that inject contamination.
    pub fn value_mut(&mut self, i: usize, j: usize, k: usize) -> &mut f64 {
        &mut self.values[j * self.shape.block_len() + i * self.shape.n_points + k]
    }
}

impl DimensionSource for MemoryDataset {
    fn shape(&self) -> DatasetShape {
        self.shape
    }

    fn read_dimension(&self, j: usize, out: &mut [f64]) -> Result<(), Error> {
        let len = self.shape.block_len();
        out.copy_from_slice(&self.values[j * len..(j + 1) * len]);
        Ok(())
    }

    fn time_grid(&self) -> Option<&[f64]> {
        self.time_grid.as_deref()
    }
}

// ---------------------------------------------------------------------------
// CSV import
// ---------------------------------------------------------------------------

/// Options for [`import_csv`].
#[derive(Debug, Clone)]
pub struct CsvImportOptions {
    /// Cell separator, b',' by default.
    pub delimiter: u8,
}

impl Default for CsvImportOptions {
    fn default() -> Self {
        Self { delimiter: b',' }
    }
}

/// Converts a directory of per-dimension CSV files into one HDFD file.
///
/// Every `*.csv` file holds one dimension as `n` rows of `N` numeric cells.
/// Files are taken in lexicographic filename order, so dimension indices must
/// be zero-padded (`dim_000.csv`, `dim_001.csv`, ...). The first file fixes
/// `(n, N)`; later files must match. Returns the header that was written.
pub fn import_csv(
    dir: impl AsRef<Path>,
    out_path: impl AsRef<Path>,
    options: &CsvImportOptions,
) -> Result<HdfdHeader, Error> {
    let dir = dir.as_ref();
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|path| path.extension().is_some_and(|ext| ext == "csv"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::Shape(format!(
            "no .csv files found in {}",
            dir.display()
        )));
    }

    let first = parse_csv_matrix(&files[0], options)?;
    let shape = DatasetShape {
        n: first.len(),
        p: files.len(),
        n_points: first.first().map_or(0, Vec::len),
    };
    shape.validate()?;
    let header = HdfdHeader {
        shape,
        time_grid: None,
    };
    let mut writer = DatasetWriter::create(out_path, &header)?;
    let mut block = Vec::with_capacity(shape.block_len());

    for (j, path) in files.iter().enumerate() {
        let rows = if j == 0 {
            first.clone()
        } else {
            parse_csv_matrix(path, options)?
        };
        if rows.len() != shape.n || rows.iter().any(|r| r.len() != shape.n_points) {
            return Err(Error::Shape(format!(
                "{} is {} x {} but {} fixed the shape at {} x {}",
                path.display(),
                rows.len(),
                rows.first().map_or(0, Vec::len),
                files[0].display(),
                shape.n,
                shape.n_points
            )));
        }
        block.clear();
        for row in &rows {
            block.extend_from_slice(row);
        }
        writer.write_dimension(&block)?;
    }
    writer.finish()?;
    Ok(header)
}

/// Parses one CSV file into rows of `f64`, rejecting ragged rows and
/// unparseable cells with 1-based row/column coordinates.
fn parse_csv_matrix(path: &Path, options: &CsvImportOptions) -> Result<Vec<Vec<f64>>, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let sep = options.delimiter as char;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = 0usize;
    for (row_idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut row = Vec::with_capacity(width);
        for (col_idx, cell) in line.split(sep).enumerate() {
            let v: f64 = cell.trim().parse().map_err(|_| Error::Csv {
                path: path.to_path_buf(),
                row: row_idx + 1,
                column: col_idx + 1,
                message: format!("cannot parse {cell:?} as a number"),
            })?;
            row.push(v);
        }
        if rows.is_empty() {
            width = row.len();
        } else if row.len() != width {
            return Err(Error::Csv {
                path: path.to_path_buf(),
                row: row_idx + 1,
                column: row.len(),
                message: format!("row has {} cells, previous rows have {width}", row.len()),
            });
        }
        rows.push(row);
    }
    Ok(rows)
}

// ===========================================================================
