//! Chernoff points and the Chernoff-Bregman-Hausdorff distance.
//!
//! The Chernoff point of a pair `{p, q}` is the point `c` on the segment
//! between them with `D_F(p || c) = D_F(q || c)`; it is found by bisection
//! over the interpolation parameter. For squared Euclidean it is the
//! arithmetic midpoint.
//!
//! Naming caveat: the *primal* Chernoff-Bregman-Hausdorff distance grows
//! primal balls about the input pairs, which means it thickens the Chernoff
//! set with *dual* balls -- the inner divergences point from the inputs to
//! the Chernoff points. The dual distance is the reverse. The distances are
//! symmetric in `(P, Q)` by construction.

use crate::data::PointCloud;
use crate::divergence::{divergence_raw, Generator};
use crate::error::{Error, Result};
use crate::hausdorff::{hausdorff, Backend, HausdorffResult, Variant};

/// Bisection parameters. The tolerance applies to the divergence gap
/// `|D_F(p || c) - D_F(q || c)|`.
#[derive(Clone, Copy, Debug)]
pub struct ChernoffConfig {
    pub tolerance: f64,
    pub max_iterations: u32,
}

impl Default for ChernoffConfig {
    fn default() -> Self {
        Self { tolerance: 1e-10, max_iterations: 200 }
    }
}

/// A computed Chernoff point with its bisection diagnostics.
#[derive(Clone, Debug)]
pub struct ChernoffPoint {
    pub point: Vec<f64>,
    /// Interpolation parameter: `c = alpha * p + (1 - alpha) * q`.
    pub alpha: f64,
    /// Final equal-divergence residual `D_F(p||c) - D_F(q||c)`.
    pub gap: f64,
    pub iterations: u32,
}

#[inline]
fn mix(p: &[f64], q: &[f64], alpha: f64, out: &mut [f64]) {
    for i in 0..p.len() {
        out[i] = alpha * p[i] + (1.0 - alpha) * q[i];
    }
}

/// Chernoff point of `{p, q}` by bisection along the connecting segment.
///
/// The gap `D_F(p || c_a) - D_F(q || c_a)` is `D_F(p || q) >= 0` at
/// `a = 0` (where `c = q`) and `-D_F(q || p) <= 0` at `a = 1`, so the
/// bracket always holds a sign change. Returns when the gap is within
/// tolerance or the bracket width falls below 1e-15.
///
/// The pair is canonically ordered before bisecting, so swapping the
/// arguments yields the bitwise-identical point (the reported `alpha` and
/// `gap` are mapped back to the caller's orientation).
pub fn chernoff_point(
    g: Generator,
    p: &[f64],
    q: &[f64],
    cfg: &ChernoffConfig,
) -> Result<ChernoffPoint> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch { left: p.len(), right: q.len() });
    }
    if cfg.tolerance <= 0.0 || cfg.max_iterations == 0 {
        return Err(Error::Usage("Chernoff tolerance and iteration budget must be positive".into()));
    }
    g.check_interior(p)?;
    g.check_interior(q)?;
    if p == q {
        return Ok(ChernoffPoint { point: p.to_vec(), alpha: 1.0, gap: 0.0, iterations: 0 });
    }

    let swapped = p > q; // lexicographic; entries are finite non-NaN
    let (a, b) = if swapped { (q, p) } else { (p, q) };

    let mut c = vec![0.0; a.len()];
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut gap = f64::NAN;
    for it in 1..=cfg.max_iterations {
        let alpha = 0.5 * (lo + hi);
        mix(a, b, alpha, &mut c);
        gap = divergence_raw(g, a, &c) - divergence_raw(g, b, &c);
        if gap.abs() <= cfg.tolerance || hi - lo < 1e-15 {
            return Ok(if swapped {
                ChernoffPoint { point: c, alpha: 1.0 - alpha, gap: -gap, iterations: it }
            } else {
                ChernoffPoint { point: c, alpha, gap, iterations: it }
            });
        }
        if gap > 0.0 {
            lo = alpha;
        } else {
            hi = alpha;
        }
    }
    Err(Error::Convergence { gap, context: String::new() })
}

/// The Chernoff points of all pairs in `P x Q`, in Alg-style row-major
/// order: the Q index varies in the outer loop, the P index in the inner.
#[derive(Clone, Debug)]
pub struct ChernoffSet {
    pub cloud: PointCloud,
    /// `(index in P, index in Q)` for each stored Chernoff point, in order.
    pub pair_index: Vec<(usize, usize)>,
    /// Largest `|D_F(p||c) - D_F(q||c)|` over all computed points.
    pub max_residual: f64,
}

pub fn chernoff_set(
    g: Generator,
    p: &PointCloud,
    q: &PointCloud,
    cfg: &ChernoffConfig,
) -> Result<ChernoffSet> {
    if p.is_empty() || q.is_empty() {
        return Err(Error::Usage("Chernoff set requires nonempty point sets".into()));
    }
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch { left: p.dim(), right: q.dim() });
    }
    let mut data = Vec::with_capacity(p.len() * q.len() * p.dim());
    let mut pair_index = Vec::with_capacity(p.len() * q.len());
    let mut max_residual = 0.0f64;
    for (j, qrow) in q.rows().enumerate() {
        for (i, prow) in p.rows().enumerate() {
            let cp = chernoff_point(g, prow, qrow, cfg).map_err(|e| match e {
                Error::Convergence { gap, .. } => {
                    Error::Convergence { gap, context: format!(" for pair (p={i}, q={j})") }
                }
                Error::Domain(msg) => Error::Domain(format!("pair (p={i}, q={j}): {msg}")),
                other => other,
            })?;
            max_residual = max_residual.max(cp.gap.abs());
            data.extend_from_slice(&cp.point);
            pair_index.push((i, j));
        }
    }
    let mut cloud = PointCloud::new(data, p.dim())?;
    cloud.source = format!("chernoff({}, {})", p.source, q.source);
    Ok(ChernoffSet { cloud, pair_index, max_residual })
}

/// A Chernoff-Hausdorff computation with its set diagnostics.
#[derive(Clone, Debug)]
pub struct ChernoffHausdorff {
    pub result: HausdorffResult,
    pub set_size: usize,
    pub max_residual: f64,
}

/// Chernoff-Bregman-Hausdorff distance between `P` and `Q`.
///
/// Builds the Chernoff set `C` over `P x Q`, then computes the
/// sup over `P union Q` of the min over `C` of the divergence: from the
/// inputs to `C` for the primal variant, from `C` to the inputs for the
/// dual. The witness indexes `(P union Q, C)`, with `P`'s points first.
///
/// The dual variant could equivalently map everything through the Legendre
/// conjugate and run a primal search there; querying the same index in the
/// swapped direction avoids the extra gradient round-trips.
pub fn chernoff_hausdorff(
    g: Generator,
    p: &PointCloud,
    q: &PointCloud,
    v: Variant,
    backend: Backend,
    cfg: &ChernoffConfig,
) -> Result<ChernoffHausdorff> {
    let set = chernoff_set(g, p, q, cfg)?;
    let union = p.concat(q)?;
    let result = hausdorff(&union, &set.cloud, g, v, backend)?;
    Ok(ChernoffHausdorff {
        result,
        set_size: set.cloud.len(),
        max_residual: set.max_residual,
    })
}
