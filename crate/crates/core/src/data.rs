//! Point cloud storage, CSV input/output, validation, and synthetic
//! simplex sampling.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Default per-point tolerance on |sum - 1| under simplex validation.
pub const DEFAULT_SIMPLEX_TOL: f64 = 1e-9;

/// Minimum coordinate kept by [`sample_simplex`]; draws below it are
/// resampled so points stay in the open simplex.
pub const SIMPLEX_SAMPLE_FLOOR: f64 = 1e-12;

/// Validation mode attached to a point cloud.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Validation {
    None,
    /// Every coordinate strictly positive.
    PositiveOrthant,
    /// Coordinates non-negative, per-point sum within tolerance of 1.
    /// Zero coordinates are legal: model predictions can saturate, and the
    /// resulting infinite divergences are legitimate outputs.
    Simplex,
}

impl std::str::FromStr for Validation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Validation::None),
            "positive" => Ok(Validation::PositiveOrthant),
            "simplex" => Ok(Validation::Simplex),
            other => Err(Error::Usage(format!(
                "unknown validation mode '{other}' (expected none, positive, or simplex)"
            ))),
        }
    }
}

/// An immutable n x d matrix of points, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    data: Vec<f64>,
    dim: usize,
    /// Validation the cloud has passed.
    pub validation: Validation,
    /// Provenance, e.g. a file path or generator description.
    pub source: String,
}

impl PointCloud {
    /// Builds a cloud from flat row-major data. Entries must be finite.
    pub fn new(data: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Usage("point dimension must be positive".into()));
        }
        if !data.len().is_multiple_of(dim) {
            return Err(Error::Usage(format!(
                "data length {} is not a multiple of dimension {dim}",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Validation(format!(
                "non-finite value {} at row {}, column {}",
                data[pos],
                pos / dim,
                pos % dim
            )));
        }
        Ok(Self { data, dim, validation: Validation::None, source: String::new() })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map(|r| r.len()).unwrap_or(0);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != dim {
                return Err(Error::Usage(format!(
                    "row {i} has {} columns, expected {dim}",
                    r.len()
                )));
            }
        }
        Self::new(rows.concat(), dim)
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Concatenates two dimension-matched clouds (used for P union Q).
    pub fn concat(&self, other: &PointCloud) -> Result<PointCloud> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { left: self.dim, right: other.dim });
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        let mut cloud = PointCloud::new(data, self.dim)?;
        cloud.source = format!("{} + {}", self.source, other.source);
        Ok(cloud)
    }

    /// Applies a validation mode, recording it on success. Reports at most
    /// the first 10 offending rows.
    pub fn validate(&mut self, mode: Validation, simplex_tol: f64) -> Result<()> {
        let mut offending: Vec<(usize, String)> = Vec::new();
        for (i, row) in self.rows().enumerate() {
            let problem = match mode {
                Validation::None => None,
                Validation::PositiveOrthant => row
                    .iter()
                    .position(|&v| v <= 0.0)
                    .map(|j| format!("coordinate {j} = {} is not positive", row[j])),
                Validation::Simplex => {
                    if let Some(j) = row.iter().position(|&v| v < 0.0) {
                        Some(format!("coordinate {j} = {} is negative", row[j]))
                    } else {
                        let sum: f64 = row.iter().sum();
                        if (sum - 1.0).abs() > simplex_tol {
                            Some(format!("coordinates sum to {sum}"))
                        } else {
                            None
                        }
                    }
                }
            };
            if let Some(msg) = problem {
                offending.push((i, msg));
                if offending.len() == 10 {
                    break;
                }
            }
        }
        if offending.is_empty() {
            self.validation = mode;
            return Ok(());
        }
        let mut msg = format!("{} (first offending rows)", offending.len());
        for (i, m) in offending {
            let _ = write!(msg, "; row {i}: {m}");
        }
        Err(Error::Validation(msg))
    }
}

fn parse_row(line: &str, line_no: usize) -> Result<Vec<f64>> {
    line.split(',')
        .map(|tok| {
            let tok = tok.trim();
            let v: f64 = tok.parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("cannot parse '{tok}' as a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("non-finite value '{tok}' is not allowed"),
                });
            }
            Ok(v)
        })
        .collect()
}

/// Loads a CSV point cloud: rows of comma-separated decimals, with an
/// optional single header row auto-detected by a non-numeric first line.
pub fn load_points<P: AsRef<Path>>(
    path: P,
    validation: Validation,
    simplex_tol: f64,
) -> Result<PointCloud> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::Io { path: path.into(), source: e })?;
    let reader = BufReader::new(file);

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut dim: Option<usize> = None;
    let mut first_content_line = true;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::Io { path: path.into(), source: e })?;
        if line.trim().is_empty() {
            continue;
        }
        match parse_row(&line, line_no) {
            Ok(row) => {
                match dim {
                    None => dim = Some(row.len()),
                    Some(d) if row.len() != d => {
                        return Err(Error::Parse {
                            line: line_no,
                            msg: format!("row has {} columns, expected {d}", row.len()),
                        })
                    }
                    _ => {}
                }
                rows.push(row);
            }
            Err(e) => {
                // a non-numeric first line is treated as a header
                if first_content_line {
                    first_content_line = false;
                    continue;
                }
                return Err(e);
            }
        }
        first_content_line = false;
    }
    if rows.is_empty() {
        return Err(Error::Parse { line: 0, msg: format!("{}: no data rows", path.display()) });
    }

    let mut cloud = PointCloud::from_rows(&rows)?;
    cloud.source = path.display().to_string();
    cloud.validate(validation, simplex_tol)?;
    Ok(cloud)
}

/// Writes a cloud as CSV at full round-trip precision; `load_points` of the
/// output reproduces the cloud bitwise. Parent directories are created.
pub fn save_points<P: AsRef<Path>>(cloud: &PointCloud, path: P) -> Result<()> {
    let path = path.as_ref();
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .map_err(|e| Error::Io { path: path.into(), source: e })?;
        }
    }
    let file = fs::File::create(path).map_err(|e| Error::Io { path: path.into(), source: e })?;
    let mut out = BufWriter::new(file);
    let mut line = String::new();
    for row in cloud.rows() {
        line.clear();
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                line.push(',');
            }
            // shortest representation that round-trips exactly
            let _ = write!(line, "{v}");
        }
        line.push('\n');
        out.write_all(line.as_bytes())
            .map_err(|e| Error::Io { path: path.into(), source: e })?;
    }
    out.flush().map_err(|e| Error::Io { path: path.into(), source: e })
}

/// Draws `n` points uniformly from the open (d-1)-simplex by normalizing
/// unit-rate exponentials, i.e. a flat Dirichlet.
///
/// The RNG is ChaCha8 seeded from `seed`, so output is reproducible across
/// runs and platforms. Points with any coordinate below
/// [`SIMPLEX_SAMPLE_FLOOR`] are redrawn to keep them interior.
pub fn sample_simplex(dim: usize, n: usize, seed: u64) -> Result<PointCloud> {
    if dim < 2 {
        return Err(Error::Usage(format!("dimension must be at least 2, got {dim}")));
    }
    if n == 0 {
        return Err(Error::Usage("point count must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(dim * n);
    let mut point = vec![0.0; dim];
    for _ in 0..n {
        loop {
            let mut sum = 0.0;
            for v in point.iter_mut() {
                let u: f64 = rng.random();
                *v = -(1.0 - u).ln();
                sum += *v;
            }
            for v in point.iter_mut() {
                *v /= sum;
            }
            if point.iter().all(|&v| v >= SIMPLEX_SAMPLE_FLOOR) {
                break;
            }
        }
        data.extend_from_slice(&point);
    }
    let mut cloud = PointCloud::new(data, dim)?;
    cloud.validation = Validation::Simplex;
    cloud.source = format!("sample_simplex(dim={dim}, n={n}, seed={seed})");
    Ok(cloud)
}
