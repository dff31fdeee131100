//! Legendre-type generators and the decomposable Bregman divergences they
//! induce.
//!
//! Three generators are supported:
//!
//! * squared Euclidean (`se`) on all of R^d,
//! * Kullback-Leibler (`kl`) on the probability simplex and its
//!   positive-orthant extension, generalized KL (`gkl`) -- both in bits,
//! * Itakura-Saito (`is`) on the open positive orthant, in nats.
//!
//! All divergences decompose coordinate-wise, which is what the Kd-tree
//! pruning rule relies on. Divergence values are computed from the
//! per-divergence closed forms; the generic affine formula
//! `F(x) - F(y) - <grad F(y), x - y>` is kept as a test oracle only, since it
//! cancels catastrophically near the domain boundary.

use crate::error::{Error, Result};

/// 1 / ln(2), the factor converting natural logs to bits.
pub const INV_LN2: f64 = std::f64::consts::LOG2_E;

/// A non-negative real extended with +infinity.
///
/// Divergence outputs are never NaN (inputs are validated up front), so the
/// order is total and `Ord` is implemented.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtendedReal(f64);

impl ExtendedReal {
    pub const ZERO: Self = Self(0.0);
    pub const INFINITY: Self = Self(f64::INFINITY);

    /// Wraps a value. Panics on NaN or negative input.
    pub fn new(v: f64) -> Self {
        assert!(!v.is_nan() && v >= 0.0, "ExtendedReal requires v >= 0, got {v}");
        Self(v)
    }

    pub fn get(self) -> f64 {
        self.0
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }
}

impl Eq for ExtendedReal {}

impl Ord for ExtendedReal {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // no NaN by construction
        self.0.partial_cmp(&other.0).unwrap()
    }
}

impl PartialOrd for ExtendedReal {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl std::fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.0.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl From<ExtendedReal> for f64 {
    fn from(v: ExtendedReal) -> f64 {
        v.0
    }
}

/// The generator selecting which Bregman divergence is computed.
///
/// `KullbackLeibler` and `GeneralizedKl` share the same formulas; they differ
/// only in their intended domain (probability simplex vs open positive
/// orthant), which is enforced by data validation, not here. KL/GKL values
/// are in bits, IS values in nats. These bases are fixed, not configurable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Generator {
    SquaredEuclidean,
    KullbackLeibler,
    GeneralizedKl,
    ItakuraSaito,
}

impl Generator {
    pub const ALL: [Generator; 4] = [
        Generator::SquaredEuclidean,
        Generator::KullbackLeibler,
        Generator::GeneralizedKl,
        Generator::ItakuraSaito,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Generator::SquaredEuclidean => "se",
            Generator::KullbackLeibler => "kl",
            Generator::GeneralizedKl => "gkl",
            Generator::ItakuraSaito => "is",
        }
    }

    /// Unit of the divergence values produced by this generator.
    pub fn units(self) -> &'static str {
        match self {
            Generator::KullbackLeibler | Generator::GeneralizedKl => "bits",
            _ => "dimensionless",
        }
    }

    /// Checks that `x` is acceptable as a divergence argument: finite
    /// entries, and non-negative outside SE. Zeros are allowed; they may
    /// produce +infinity divergences, which is a legitimate outcome.
    pub fn check_divergence_domain(self, x: &[f64]) -> Result<()> {
        for (i, &v) in x.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::Domain(format!(
                    "coordinate {i} is {v}; only finite values are allowed"
                )));
            }
            if self != Generator::SquaredEuclidean && v < 0.0 {
                return Err(Error::Domain(format!(
                    "coordinate {i} is {v}; {} requires non-negative coordinates",
                    self.name()
                )));
            }
        }
        Ok(())
    }

    /// Checks that `x` is strictly interior to the generator's open domain,
    /// as required by gradients and the conjugate map.
    pub fn check_interior(self, x: &[f64]) -> Result<()> {
        for (i, &v) in x.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::Domain(format!(
                    "coordinate {i} is {v}; only finite values are allowed"
                )));
            }
            if self != Generator::SquaredEuclidean && v <= 0.0 {
                return Err(Error::Domain(format!(
                    "coordinate {i} is {v}; {} requires strictly positive coordinates here",
                    self.name()
                )));
            }
        }
        Ok(())
    }

    /// Checks every point of a cloud against the divergence domain.
    pub fn check_cloud(self, cloud: &crate::data::PointCloud) -> Result<()> {
        for (i, row) in cloud.rows().enumerate() {
            self.check_divergence_domain(row)
                .map_err(|e| Error::Domain(format!("point {i}: {e}")))?;
        }
        Ok(())
    }
}

impl std::str::FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "se" => Ok(Generator::SquaredEuclidean),
            "kl" => Ok(Generator::KullbackLeibler),
            "gkl" => Ok(Generator::GeneralizedKl),
            "is" => Ok(Generator::ItakuraSaito),
            other => Err(Error::Usage(format!(
                "unknown divergence '{other}' (expected se, kl, gkl, or is)"
            ))),
        }
    }
}

impl std::fmt::Display for Generator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Per-coordinate transform cached alongside point data so repeated
/// divergence evaluations do not recompute logarithms: log2 for KL/GKL,
/// ln for IS, unused for SE.
#[inline]
pub(crate) fn coord_transform(g: Generator, v: f64) -> f64 {
    match g {
        Generator::SquaredEuclidean => 0.0,
        Generator::KullbackLeibler | Generator::GeneralizedKl => v.log2(),
        Generator::ItakuraSaito => v.ln(),
    }
}

/// One-dimensional divergence summand with transforms supplied by the
/// caller. This is the single computational path for divergence values:
/// cached and uncached evaluations run exactly the same operations, so
/// results are bitwise reproducible across backends.
#[inline]
pub(crate) fn coord_div_cached(g: Generator, x: f64, tx: f64, y: f64, ty: f64) -> f64 {
    match g {
        Generator::SquaredEuclidean => {
            let d = x - y;
            d * d
        }
        Generator::KullbackLeibler | Generator::GeneralizedKl => {
            // 0 log 0 = 0 convention on the first argument; a zero in the
            // second argument with x > 0 yields +infinity via ty = -inf.
            if x == 0.0 {
                y * INV_LN2
            } else {
                x * (tx - ty) + (y - x) * INV_LN2
            }
        }
        Generator::ItakuraSaito => {
            if x <= 0.0 || y <= 0.0 {
                f64::INFINITY
            } else {
                x / y - (tx - ty) - 1.0
            }
        }
    }
}

#[inline]
pub(crate) fn coord_div_raw(g: Generator, x: f64, y: f64) -> f64 {
    coord_div_cached(g, x, coord_transform(g, x), y, coord_transform(g, y))
}

/// Unchecked full divergence; callers must have validated domains.
#[inline]
pub(crate) fn divergence_raw(g: Generator, x: &[f64], y: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..x.len() {
        acc += coord_div_raw(g, x[i], y[i]);
    }
    acc
}

/// The one-dimensional divergence summand, validated.
pub fn coord_divergence(g: Generator, xi: f64, yi: f64) -> Result<ExtendedReal> {
    g.check_divergence_domain(&[xi])?;
    g.check_divergence_domain(&[yi])?;
    Ok(ExtendedReal::new(coord_div_raw(g, xi, yi)))
}

/// The Bregman divergence D_F(x || y) for the chosen generator.
///
/// Returns +infinity when KL/GKL sees `x_i > 0` with `y_i = 0`, or when IS
/// sees a zero coordinate on either side.
pub fn divergence(g: Generator, x: &[f64], y: &[f64]) -> Result<ExtendedReal> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { left: x.len(), right: y.len() });
    }
    g.check_divergence_domain(x)?;
    g.check_divergence_domain(y)?;
    Ok(ExtendedReal::new(divergence_raw(g, x, y)))
}

/// Evaluates the generator function F at `x`.
pub fn generator_value(g: Generator, x: &[f64]) -> Result<f64> {
    match g {
        Generator::SquaredEuclidean => {
            g.check_divergence_domain(x)?;
            Ok(x.iter().map(|v| v * v).sum())
        }
        Generator::KullbackLeibler | Generator::GeneralizedKl => {
            g.check_divergence_domain(x)?;
            Ok(x.iter().map(|&v| if v == 0.0 { 0.0 } else { v * v.log2() }).sum())
        }
        Generator::ItakuraSaito => {
            g.check_interior(x)?;
            Ok(-x.iter().map(|v| v.ln()).sum::<f64>())
        }
    }
}

/// Coordinate-wise derivative of the generator at an interior point.
pub fn generator_gradient(g: Generator, x: &[f64]) -> Result<Vec<f64>> {
    g.check_interior(x)?;
    Ok(match g {
        Generator::SquaredEuclidean => x.iter().map(|v| 2.0 * v).collect(),
        Generator::KullbackLeibler | Generator::GeneralizedKl => {
            x.iter().map(|v| (1.0 + v.ln()) * INV_LN2).collect()
        }
        Generator::ItakuraSaito => x.iter().map(|v| -1.0 / v).collect(),
    })
}

/// The canonical map into the conjugate domain, `x -> x* = grad F(x)`.
pub fn conjugate_map(g: Generator, x: &[f64]) -> Result<Vec<f64>> {
    generator_gradient(g, x)
}

/// Analytic inverse of [`conjugate_map`], recovering `x` from `x*`.
pub fn inverse_conjugate_map(g: Generator, xstar: &[f64]) -> Result<Vec<f64>> {
    for (i, &v) in xstar.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::Domain(format!("conjugate coordinate {i} is {v}")));
        }
    }
    match g {
        Generator::SquaredEuclidean => Ok(xstar.iter().map(|v| v / 2.0).collect()),
        Generator::KullbackLeibler | Generator::GeneralizedKl => {
            // (1 + ln x)/ln 2 = s  =>  x = exp(s ln 2 - 1)
            Ok(xstar.iter().map(|s| (s * std::f64::consts::LN_2 - 1.0).exp()).collect())
        }
        Generator::ItakuraSaito => {
            for (i, &v) in xstar.iter().enumerate() {
                if v >= 0.0 {
                    return Err(Error::Domain(format!(
                        "conjugate coordinate {i} is {v}; the IS conjugate domain is negative"
                    )));
                }
            }
            Ok(xstar.iter().map(|s| -1.0 / s).collect())
        }
    }
}

/// Shannon entropy of a probability vector, in bits.
pub fn shannon_entropy(p: &[f64]) -> Result<f64> {
    Generator::KullbackLeibler.check_divergence_domain(p)?;
    Ok(p.iter().map(|&v| if v == 0.0 { 0.0 } else { -v * v.log2() }).sum())
}

/// Cross entropy H(p, q) in bits; +infinity when `q_i = 0` with `p_i > 0`.
pub fn cross_entropy(p: &[f64], q: &[f64]) -> Result<ExtendedReal> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch { left: p.len(), right: q.len() });
    }
    Generator::KullbackLeibler.check_divergence_domain(p)?;
    Generator::KullbackLeibler.check_divergence_domain(q)?;
    let mut acc = 0.0;
    for i in 0..p.len() {
        if p[i] > 0.0 {
            acc -= p[i] * q[i].log2();
        }
    }
    Ok(ExtendedReal::new(acc))
}
