//! File formats: CSV for data matrices and trajectories, JSON for system
//! specifications and recovery reports.
//!
//! Complex numbers in JSON are either a bare real number or a `[re, im]`
//! pair. Floating output uses 17 significant digits so that files round-trip
//! bit for bit.

use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::DiscreteSystem;
use crate::error::{Error, Result};
use crate::frames::VectorSystem;
use crate::hilbert::{spectral_radius, HOperator, HVector, Subspace};
use crate::measurement::DataMatrix;
use crate::recovery::{DifferenceScheme, RecoveryMethod, RecoveryReport, ResidualKind};
use crate::scalar::{cx, re, Real};
use crate::scenarios::gaussian_matrix;

/// A complex number as written in JSON.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum JsonComplex {
    Real(f64),
    Pair([f64; 2]),
}

impl JsonComplex {
    pub fn to_complex<T: Real>(self) -> Complex<T> {
        match self {
            JsonComplex::Real(x) => re(T::lit(x)),
            JsonComplex::Pair([a, b]) => cx(T::lit(a), T::lit(b)),
        }
    }

    /// Real values are written bare, complex ones as pairs.
    pub fn from_complex<T: Real>(z: Complex<T>) -> Self {
        if z.im == T::zero() {
            JsonComplex::Real(z.re.as_f64())
        } else {
            JsonComplex::Pair([z.re.as_f64(), z.im.as_f64()])
        }
    }
}

fn to_dvector<T: Real>(v: &[JsonComplex]) -> DVector<Complex<T>> {
    DVector::from_iterator(v.len(), v.iter().map(|z| z.to_complex()))
}

fn to_hvector<T: Real>(v: &[JsonComplex], dim: usize, what: &str) -> Result<HVector<T>> {
    if v.len() != dim {
        return Err(Error::Parse(format!("{what} has length {}, expected {dim}", v.len())));
    }
    HVector::new(to_dvector(v))
}

pub fn vector_to_json<T: Real>(v: &DVector<Complex<T>>) -> Vec<JsonComplex> {
    v.iter().map(|&z| JsonComplex::from_complex(z)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorSpec {
    Identity,
    Zero,
    Diagonal { values: Vec<JsonComplex> },
    /// Row-major entries.
    Dense { rows: Vec<Vec<JsonComplex>> },
    /// Complex Gaussian matrix rescaled to spectral radius `rho`.
    RandomContraction { rho: f64 },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubspaceSpec {
    /// Spanning vectors; omitted means the whole space.
    #[serde(default)]
    pub basis: Option<Vec<Vec<JsonComplex>>>,
}

/// `{ "dim", "A", "W", "w", "x0", "seed" }`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub dim: usize,
    #[serde(rename = "A")]
    pub operator: OperatorSpec,
    #[serde(rename = "W", default)]
    pub space: SubspaceSpec,
    /// Omitted: a seeded random vector in `W`.
    #[serde(default)]
    pub w: Option<Vec<JsonComplex>>,
    /// Omitted: zero.
    #[serde(default)]
    pub x0: Option<Vec<JsonComplex>>,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl SystemSpec {
    pub fn build<T: Real>(&self) -> Result<DiscreteSystem<T>> {
        self.build_with_seed(self.seed.unwrap_or(0))
    }

    pub fn build_with_seed<T: Real>(&self, seed: u64) -> Result<DiscreteSystem<T>> {
        let d = self.dim;
        if d == 0 {
            return Err(Error::Parse("dim must be positive".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = self.operator.build(d, &mut rng)?;
        let space = match &self.space.basis {
            None => Subspace::full(d),
            Some(basis) => {
                let vectors = basis.iter().map(|v| to_hvector(v, d, "W basis vector")).collect::<Result<Vec<_>>>()?;
                Subspace::from_vectors(d, &vectors)?
            }
        };
        let w = match &self.w {
            Some(w) => to_hvector(w, d, "w")?,
            None => {
                let alpha = gaussian_matrix::<T>(&mut rng, space.rank(), 1).column(0).into_owned();
                space.embed(&alpha)?
            }
        };
        let x0 = match &self.x0 {
            Some(x) => to_hvector(x, d, "x0")?,
            None => HVector::zeros(d),
        };
        DiscreteSystem::new(a, space, w, x0)
    }
}

impl OperatorSpec {
    pub fn build<T: Real>(&self, d: usize, rng: &mut ChaCha8Rng) -> Result<HOperator<T>> {
        match self {
            OperatorSpec::Identity => Ok(HOperator::identity(d)),
            OperatorSpec::Zero => Ok(HOperator::zeros(d)),
            OperatorSpec::Diagonal { values } => {
                if values.len() != d {
                    return Err(Error::Parse(format!("diagonal has {} entries, expected {d}", values.len())));
                }
                let v: Vec<Complex<T>> = values.iter().map(|z| z.to_complex()).collect();
                HOperator::diagonal(&v)
            }
            OperatorSpec::Dense { rows } => {
                if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                    return Err(Error::Parse(format!("dense operator must be {d} x {d}")));
                }
                HOperator::new(DMatrix::from_fn(d, d, |i, j| rows[i][j].to_complex()))
            }
            OperatorSpec::RandomContraction { rho } => {
                if !(*rho >= 0.0 && rho.is_finite()) {
                    return Err(Error::Parse("rho must be a non-negative number".into()));
                }
                let raw = HOperator::new(gaussian_matrix(rng, d, d))?;
                let r = spectral_radius(&raw)?;
                Ok(raw.scaled(re(T::lit(*rho) / r)))
            }
        }
    }
}

/// Sampling vectors `G`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SamplingSpec {
    /// The standard basis.
    Orthonormal,
    /// `g_j = e_j / j`.
    ScaledBasis,
    Vectors { vectors: Vec<Vec<JsonComplex>> },
    /// `count` complex Gaussian vectors.
    Random { count: usize },
}

impl SamplingSpec {
    pub fn build<T: Real>(&self, d: usize, seed: u64) -> Result<VectorSystem<T>> {
        match self {
            SamplingSpec::Orthonormal => Ok(VectorSystem::orthonormal_basis(d)),
            SamplingSpec::ScaledBasis => {
                let v = (0..d)
                    .map(|j| HVector::unit(d, j).scaled(re(T::one() / T::from_usize(j + 1).expect("index"))))
                    .collect();
                VectorSystem::new(v)
            }
            SamplingSpec::Vectors { vectors } => {
                if vectors.is_empty() {
                    return Err(Error::Parse("sampling needs at least one vector".into()));
                }
                let v = vectors.iter().map(|v| to_hvector(v, d, "sampling vector")).collect::<Result<Vec<_>>>()?;
                VectorSystem::new(v)
            }
            SamplingSpec::Random { count } => {
                if *count == 0 {
                    return Err(Error::Parse("sampling count must be positive".into()));
                }
                // separate stream from the system so both can be changed independently
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_9a11);
                VectorSystem::from_columns(&gaussian_matrix(&mut rng, d, *count))
            }
        }
    }
}

fn csv_reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(r)
}

fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `n,j,re,im`, one record per entry, row-major.
pub fn write_data_matrix<T: Real, W: Write>(d: &DataMatrix<T>, out: W) -> Result<()> {
    write_indexed(d.rows(), ["n", "j", "re", "im"], out)
}

/// Writes `n,k,re,im`.
pub fn write_trajectory<T: Real, W: Write>(states: &[HVector<T>], out: W) -> Result<()> {
    let rows: Vec<DVector<Complex<T>>> = states.iter().map(|s| s.coords().clone()).collect();
    write_indexed(&rows, ["n", "k", "re", "im"], out)
}

fn write_indexed<T: Real, W: Write>(rows: &[DVector<Complex<T>>], header: [&str; 4], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for (n, row) in rows.iter().enumerate() {
        for (j, z) in row.iter().enumerate() {
            w.write_record([n.to_string(), j.to_string(), fmt_float(z.re.as_f64()), fmt_float(z.im.as_f64())])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_data_matrix<T: Real, R: Read>(input: R) -> Result<DataMatrix<T>> {
    DataMatrix::from_rows(read_indexed(input, "j")?)
}

pub fn read_trajectory<T: Real, R: Read>(input: R) -> Result<Vec<HVector<T>>> {
    read_indexed(input, "k")?.into_iter().map(HVector::new).collect()
}

#[derive(Deserialize)]
struct Record {
    n: usize,
    #[serde(alias = "j", alias = "k")]
    col: usize,
    re: f64,
    im: f64,
}

fn read_indexed<T: Real, R: Read>(input: R, col_name: &str) -> Result<Vec<DVector<Complex<T>>>> {
    let mut reader = csv_reader(input);
    let headers = reader.headers()?.clone();
    let expected = ["n", col_name, "re", "im"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(Error::Parse(format!("expected header {}", expected.join(","))));
    }
    let mut entries = Vec::new();
    let (mut rows, mut cols) = (0, 0);
    for rec in reader.deserialize::<Record>() {
        let rec = rec?;
        rows = rows.max(rec.n + 1);
        cols = cols.max(rec.col + 1);
        entries.push(rec);
    }
    if entries.is_empty() {
        return Err(Error::Parse("no records".into()));
    }
    if entries.len() != rows * cols {
        return Err(Error::Parse(format!("expected {} records for {rows} x {cols}, found {}", rows * cols, entries.len())));
    }
    let mut seen = vec![false; rows * cols];
    let mut out = vec![DVector::zeros(cols); rows];
    for e in entries {
        let slot = e.n * cols + e.col;
        if std::mem::replace(&mut seen[slot], true) {
            return Err(Error::Parse(format!("duplicate entry ({}, {})", e.n, e.col)));
        }
        out[e.n][e.col] = cx(T::lit(e.re), T::lit(e.im));
    }
    Ok(out)
}

/// Serialized form of a [`RecoveryReport`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryReportJson {
    pub method: RecoveryMethod,
    pub w_hat: Vec<JsonComplex>,
    pub residual: f64,
    pub residual_kind: ResidualKind,
    pub stability_constant: f64,
    pub trace: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub coefficients: Option<Vec<JsonComplex>>,
    pub converged: bool,
    pub rows_used: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub scheme: Option<DifferenceScheme>,
}

impl<T: Real> From<&RecoveryReport<T>> for RecoveryReportJson {
    fn from(r: &RecoveryReport<T>) -> Self {
        Self {
            method: r.method,
            w_hat: vector_to_json(r.w_hat.coords()),
            residual: r.residual.as_f64(),
            residual_kind: r.residual_kind,
            stability_constant: r.stability_constant.as_f64(),
            trace: r.trace.iter().map(|x| x.as_f64()).collect(),
            coefficients: r.coefficients.as_ref().map(vector_to_json),
            converged: r.converged,
            rows_used: r.rows_used,
            scheme: r.scheme,
        }
    }
}

/// Formatter that writes every float with 17 significant digits.
#[derive(Clone, Copy, Debug, Default)]
pub struct FullPrecision;

impl serde_json::ser::Formatter for FullPrecision {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// JSON with 17 significant digits per float.
pub fn to_json_string<S: Serialize + ?Sized>(value: &S) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FullPrecision);
    value.serialize(&mut ser)?;
    String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
}
