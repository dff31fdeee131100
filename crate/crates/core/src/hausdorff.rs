//! One-sided Bregman-Hausdorff divergences.
//!
//! `hausdorff(P, Q)` always means sup over P of the inf over Q, in the
//! orientation selected by [`Variant`]:
//!
//! * `Primal`:  H (P || Q)  = sup_{p in P} inf_{q in Q} D_F(p || q)
//! * `Dual`:    H'(P || Q)  = sup_{p in P} inf_{q in Q} D_F(q || p)
//!
//! Three interchangeable backends compute the same value: a double-loop
//! linear baseline (the oracle), a Kd-tree accelerated version, and a
//! shell-accelerated version whose per-query search is abandoned as soon as
//! it cannot raise the running maximum.

use std::time::Instant;

use rayon::prelude::*;

use crate::data::PointCloud;
use crate::divergence::{ExtendedReal, Generator};
use crate::error::{Error, Result};
use crate::kdtree::{
    BregmanKdTree, Direction, Evaluator, PreparedQuery, QueryStats, DEFAULT_LEAF_CAPACITY,
};

/// Hausdorff orientation: which way the inner divergences point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    /// Thicken Q with primal balls: inner divergence D_F(p || q).
    Primal,
    /// Thicken Q with dual balls: inner divergence D_F(q || p).
    Dual,
}

impl Variant {
    /// The NN search direction for queries drawn from P against stored Q.
    pub fn direction(self) -> Direction {
        match self {
            Variant::Primal => Direction::QueryToStored,
            Variant::Dual => Direction::StoredToQuery,
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "primal" => Ok(Variant::Primal),
            "dual" => Ok(Variant::Dual),
            other => Err(Error::Usage(format!(
                "unknown variant '{other}' (expected primal or dual)"
            ))),
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::Primal => "primal",
            Variant::Dual => "dual",
        })
    }
}

/// Computation backend.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Backend {
    Linear,
    KdTree,
    Shell,
}

impl Backend {
    pub const ALL: [Backend; 3] = [Backend::Linear, Backend::KdTree, Backend::Shell];

    pub fn name(self) -> &'static str {
        match self {
            Backend::Linear => "linear",
            Backend::KdTree => "kdtree",
            Backend::Shell => "shell",
        }
    }
}

impl std::str::FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Backend::Linear),
            "kdtree" => Ok(Backend::KdTree),
            "shell" => Ok(Backend::Shell),
            other => Err(Error::Usage(format!(
                "unknown backend '{other}' (expected linear, kdtree, or shell)"
            ))),
        }
    }
}

impl std::fmt::Display for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Timing and traversal counters for one computation.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RunStats {
    pub build_secs: f64,
    pub query_secs: f64,
    pub queries: u64,
    pub points_visited: u64,
    pub nodes_visited: u64,
    pub early_terminations: u64,
    /// Set when the value became +infinity and remaining queries were
    /// skipped (they cannot raise an infinite maximum).
    pub hit_infinite: bool,
}

/// The computed radius plus the realizing pair and diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct HausdorffResult {
    pub value: ExtendedReal,
    /// `(index in P, index in Q)` realizing the sup-inf. `None` when every
    /// query was shell-terminated (the value is then 0 or inherited).
    pub witness: Option<(usize, usize)>,
    pub stats: RunStats,
}

fn validate_pair(p: &PointCloud, q: &PointCloud, g: Generator) -> Result<()> {
    if p.is_empty() || q.is_empty() {
        return Err(Error::Usage("Hausdorff divergence requires nonempty point sets".into()));
    }
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch { left: p.dim(), right: q.dim() });
    }
    g.check_cloud(p)?;
    g.check_cloud(q)
}

/// Exact double-loop baseline; the oracle for the other backends.
pub fn hausdorff_linear(
    p: &PointCloud,
    q: &PointCloud,
    g: Generator,
    v: Variant,
) -> Result<HausdorffResult> {
    validate_pair(p, q, g)?;
    let dir = v.direction();
    let start = Instant::now();
    let ev = Evaluator::new(g, q);
    let build_secs = start.elapsed().as_secs_f64();

    let qstart = Instant::now();
    let mut stats = RunStats { build_secs, ..Default::default() };
    let mut max = f64::NEG_INFINITY;
    let mut witness = None;
    for (i, row) in p.rows().enumerate() {
        let prep = PreparedQuery::new(g, row);
        let mut best = (usize::MAX, f64::INFINITY);
        for j in 0..q.len() {
            let d = ev.divergence(&prep, j, dir);
            if d < best.1 || (d == best.1 && j < best.0) {
                best = (j, d);
            }
        }
        stats.points_visited += q.len() as u64;
        stats.queries += 1;
        if best.1 > max {
            max = best.1;
            witness = Some((i, best.0));
        }
        if max.is_infinite() {
            stats.hit_infinite = true;
            break;
        }
    }
    stats.query_secs = qstart.elapsed().as_secs_f64();
    Ok(HausdorffResult { value: ExtendedReal::new(max), witness, stats })
}

/// Kd-tree backend: exact NN per query, running maximum over P.
pub fn hausdorff_kdtree(
    p: &PointCloud,
    q: &PointCloud,
    g: Generator,
    v: Variant,
) -> Result<HausdorffResult> {
    hausdorff_kdtree_cap(p, q, g, v, DEFAULT_LEAF_CAPACITY)
}

pub fn hausdorff_kdtree_cap(
    p: &PointCloud,
    q: &PointCloud,
    g: Generator,
    v: Variant,
    leaf_capacity: usize,
) -> Result<HausdorffResult> {
    validate_pair(p, q, g)?;
    let dir = v.direction();
    let start = Instant::now();
    let tree = BregmanKdTree::build(q, leaf_capacity)?;
    let ev = tree.evaluator(g);
    let build_secs = start.elapsed().as_secs_f64();

    let qstart = Instant::now();
    let mut stats = RunStats { build_secs, ..Default::default() };
    let mut qs = QueryStats::default();
    let mut max = f64::NEG_INFINITY;
    let mut witness = None;
    for (i, row) in p.rows().enumerate() {
        let ans = tree.nn_query_with_stats(&ev, row, dir, &mut qs)?;
        stats.queries += 1;
        if ans.div.get() > max {
            max = ans.div.get();
            witness = Some((i, ans.index));
        }
        if max.is_infinite() {
            stats.hit_infinite = true;
            break;
        }
    }
    stats.points_visited = qs.points_visited;
    stats.nodes_visited = qs.nodes_visited;
    stats.query_secs = qstart.elapsed().as_secs_f64();
    Ok(HausdorffResult { value: ExtendedReal::new(max), witness, stats })
}

/// Shell backend: each query passes the running maximum as the early
/// termination threshold; terminated queries cannot raise the maximum and
/// are skipped. The value equals the other backends exactly.
pub fn hausdorff_shell(
    p: &PointCloud,
    q: &PointCloud,
    g: Generator,
    v: Variant,
) -> Result<HausdorffResult> {
    hausdorff_shell_cap(p, q, g, v, DEFAULT_LEAF_CAPACITY)
}

pub fn hausdorff_shell_cap(
    p: &PointCloud,
    q: &PointCloud,
    g: Generator,
    v: Variant,
    leaf_capacity: usize,
) -> Result<HausdorffResult> {
    validate_pair(p, q, g)?;
    let dir = v.direction();
    let start = Instant::now();
    let tree = BregmanKdTree::build(q, leaf_capacity)?;
    let ev = tree.evaluator(g);
    let build_secs = start.elapsed().as_secs_f64();

    let qstart = Instant::now();
    let mut stats = RunStats { build_secs, ..Default::default() };
    let mut qs = QueryStats::default();
    let mut max = 0.0f64;
    let mut witness = None;
    for (i, row) in p.rows().enumerate() {
        stats.queries += 1;
        match tree.shell_query_with_stats(&ev, row, dir, ExtendedReal::new(max), &mut qs)? {
            Some(ans) => {
                // a completed search has div > threshold = running max
                max = ans.div.get();
                witness = Some((i, ans.index));
            }
            None => stats.early_terminations += 1,
        }
        if max.is_infinite() {
            stats.hit_infinite = true;
            break;
        }
    }
    stats.points_visited = qs.points_visited;
    stats.nodes_visited = qs.nodes_visited;
    stats.query_secs = qstart.elapsed().as_secs_f64();
    Ok(HausdorffResult { value: ExtendedReal::new(max), witness, stats })
}

/// Dispatch by backend.
pub fn hausdorff(
    p: &PointCloud,
    q: &PointCloud,
    g: Generator,
    v: Variant,
    backend: Backend,
) -> Result<HausdorffResult> {
    match backend {
        Backend::Linear => hausdorff_linear(p, q, g, v),
        Backend::KdTree => hausdorff_kdtree(p, q, g, v),
        Backend::Shell => hausdorff_shell(p, q, g, v),
    }
}

/// Returns `(H(P || Q), H(Q || P))` under the chosen variant and backend.
/// No maximum is taken; the two one-sided values carry separate meaning.
pub fn hausdorff_both_directions(
    p: &PointCloud,
    q: &PointCloud,
    g: Generator,
    v: Variant,
    backend: Backend,
) -> Result<(HausdorffResult, HausdorffResult)> {
    Ok((hausdorff(p, q, g, v, backend)?, hausdorff(q, p, g, v, backend)?))
}

/// Parallel computation over P using the current rayon thread pool.
///
/// The value is identical to the sequential run. For the shell backend the
/// running threshold is shared as a monotonically non-decreasing atomic; a
/// stale (smaller) threshold only reduces pruning, never the result.
pub fn hausdorff_par(
    p: &PointCloud,
    q: &PointCloud,
    g: Generator,
    v: Variant,
    backend: Backend,
) -> Result<HausdorffResult> {
    validate_pair(p, q, g)?;
    let dir = v.direction();
    let start = Instant::now();
    let tree = match backend {
        Backend::Linear => None,
        _ => Some(BregmanKdTree::build(q, DEFAULT_LEAF_CAPACITY)?),
    };
    let ev = match &tree {
        Some(t) => t.evaluator(g),
        None => Evaluator::new(g, q),
    };
    let build_secs = start.elapsed().as_secs_f64();
    let qstart = Instant::now();

    // per-query result: (value, p index, q index); reduced to the maximum
    // value with the smallest p index on exact ties, matching the
    // sequential first-maximum rule
    let reduce = |a: Option<(f64, usize, usize)>, b: Option<(f64, usize, usize)>| match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => {
            if y.0 > x.0 || (y.0 == x.0 && y.1 < x.1) {
                Some(y)
            } else {
                Some(x)
            }
        }
    };

    let rows: Vec<&[f64]> = p.rows().collect();
    let (best, qs, early) = match backend {
        Backend::Linear => {
            let (best, visited) = rows
                .par_iter()
                .enumerate()
                .map(|(i, row)| {
                    let prep = PreparedQuery::new(g, row);
                    let mut inner = (usize::MAX, f64::INFINITY);
                    for j in 0..q.len() {
                        let d = ev.divergence(&prep, j, dir);
                        if d < inner.1 || (d == inner.1 && j < inner.0) {
                            inner = (j, d);
                        }
                    }
                    (Some((inner.1, i, inner.0)), q.len() as u64)
                })
                .reduce(
                    || (None, 0),
                    |(a, ca), (b, cb)| (reduce(a, b), ca + cb),
                );
            (best, QueryStats { nodes_visited: 0, points_visited: visited }, 0)
        }
        Backend::KdTree => {
            let tree = tree.as_ref().unwrap();
            let results: Vec<_> = rows
                .par_iter()
                .enumerate()
                .map(|(i, row)| {
                    let mut qs = QueryStats::default();
                    tree.nn_query_with_stats(&ev, row, dir, &mut qs)
                        .map(|ans| (Some((ans.div.get(), i, ans.index)), qs))
                })
                .collect::<Result<_>>()?;
            let mut best = None;
            let mut qs = QueryStats::default();
            for (b, s) in results {
                best = reduce(best, b);
                qs.nodes_visited += s.nodes_visited;
                qs.points_visited += s.points_visited;
            }
            (best, qs, 0)
        }
        Backend::Shell => {
            use std::sync::atomic::{AtomicU64, Ordering};
            let tree = tree.as_ref().unwrap();
            // non-negative f64 bits order like the values, so fetch_max works
            let shared = AtomicU64::new(0.0f64.to_bits());
            let results: Vec<_> = rows
                .par_iter()
                .enumerate()
                .map(|(i, row)| {
                    let mut qs = QueryStats::default();
                    let threshold = f64::from_bits(shared.load(Ordering::Relaxed));
                    let out = tree.shell_query_with_stats(
                        &ev,
                        row,
                        dir,
                        ExtendedReal::new(threshold),
                        &mut qs,
                    )?;
                    let best = out.map(|ans| {
                        shared.fetch_max(ans.div.get().to_bits(), Ordering::Relaxed);
                        (ans.div.get(), i, ans.index)
                    });
                    Ok((best, qs, out.is_none() as u64))
                })
                .collect::<Result<_>>()?;
            let mut best = None;
            let mut qs = QueryStats::default();
            let mut early = 0;
            for (b, s, e) in results {
                best = reduce(best, b);
                qs.nodes_visited += s.nodes_visited;
                qs.points_visited += s.points_visited;
                early += e;
            }
            (best, qs, early)
        }
    };

    let (value, witness) = match (backend, best) {
        (Backend::Shell, None) => (0.0, None),
        (_, Some((v, i, j))) => (v, Some((i, j))),
        (_, None) => unreachable!("P validated nonempty"),
    };
    let stats = RunStats {
        build_secs,
        query_secs: qstart.elapsed().as_secs_f64(),
        queries: p.len() as u64,
        points_visited: qs.points_visited,
        nodes_visited: qs.nodes_visited,
        early_terminations: early,
        hit_infinite: value.is_infinite(),
    };
    Ok(HausdorffResult { value: ExtendedReal::new(value), witness, stats })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::sample_simplex;
    use crate::divergence::divergence;

    #[test]
    fn self_hausdorff_is_zero_with_diagonal_witness() {
        let p = sample_simplex(4, 30, 1).unwrap();
        for backend in [Backend::Linear, Backend::KdTree] {
            for v in [Variant::Primal, Variant::Dual] {
                let r = hausdorff(&p, &p, Generator::KullbackLeibler, v, backend).unwrap();
                assert_eq!(r.value, ExtendedReal::ZERO);
                let (i, j) = r.witness.unwrap();
                assert_eq!(i, j);
            }
        }
        // shell: every query terminates at threshold 0
        let r = hausdorff_shell(&p, &p, Generator::KullbackLeibler, Variant::Primal).unwrap();
        assert_eq!(r.value, ExtendedReal::ZERO);
        assert_eq!(r.stats.early_terminations, p.len() as u64);
    }

    #[test]
    fn singletons_collapse_to_plain_divergence() {
        let p = crate::data::PointCloud::from_rows(&[vec![0.7, 0.3]]).unwrap();
        let q = crate::data::PointCloud::from_rows(&[vec![0.2, 0.8]]).unwrap();
        let g = Generator::KullbackLeibler;
        let prim = hausdorff_linear(&p, &q, g, Variant::Primal).unwrap();
        assert_eq!(prim.value.get(), divergence(g, p.point(0), q.point(0)).unwrap().get());
        let dual = hausdorff_linear(&p, &q, g, Variant::Dual).unwrap();
        assert_eq!(dual.value.get(), divergence(g, q.point(0), p.point(0)).unwrap().get());
    }

    #[test]
    fn kl_asymmetry_lifted_to_singletons() {
        let p = crate::data::PointCloud::from_rows(&[vec![0.5, 0.25, 0.125, 0.125]]).unwrap();
        let q =
            crate::data::PointCloud::from_rows(&[vec![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.0]])
                .unwrap();
        let g = Generator::KullbackLeibler;
        let prim = hausdorff_linear(&p, &q, g, Variant::Primal).unwrap();
        assert!(!prim.value.is_finite());
        assert!(prim.stats.hit_infinite);
        let dual = hausdorff_linear(&p, &q, g, Variant::Dual).unwrap();
        assert!((dual.value.get() - 0.415).abs() < 1e-3);
    }

    #[test]
    fn backends_agree_on_random_instances() {
        for inst in 0..12u64 {
            let dim = [2, 3, 5, 10][(inst % 4) as usize];
            let p = sample_simplex(dim, 80, 1000 + inst).unwrap();
            let q = sample_simplex(dim, 60, 2000 + inst).unwrap();
            for g in Generator::ALL {
                for v in [Variant::Primal, Variant::Dual] {
                    let lin = hausdorff_linear(&p, &q, g, v).unwrap();
                    let kd = hausdorff_kdtree(&p, &q, g, v).unwrap();
                    let sh = hausdorff_shell(&p, &q, g, v).unwrap();
                    assert_eq!(lin.value, kd.value, "g={g} v={v}");
                    assert_eq!(lin.value, sh.value, "g={g} v={v}");
                    assert_eq!(lin.witness, kd.witness);
                }
            }
        }
    }

    #[test]
    fn infinite_instances_agree() {
        // q2 has a zero where p's points are positive: primal KL divergences
        // from those points to q2 are infinite, but q1 offers finite cover
        // except for p2, which has support nowhere in q
        let p = crate::data::PointCloud::from_rows(&[
            vec![0.5, 0.25, 0.25, 0.0],
            vec![0.25, 0.25, 0.25, 0.25],
        ])
        .unwrap();
        let q = crate::data::PointCloud::from_rows(&[
            vec![0.4, 0.3, 0.3, 0.0],
            vec![0.6, 0.2, 0.2, 0.0],
        ])
        .unwrap();
        let g = Generator::KullbackLeibler;
        for v in [Variant::Primal, Variant::Dual] {
            let lin = hausdorff_linear(&p, &q, g, v).unwrap();
            let kd = hausdorff_kdtree(&p, &q, g, v).unwrap();
            let sh = hausdorff_shell(&p, &q, g, v).unwrap();
            assert_eq!(lin.value, kd.value);
            assert_eq!(lin.value, sh.value);
        }
        let prim = hausdorff_linear(&p, &q, g, Variant::Primal).unwrap();
        assert!(!prim.value.is_finite());
    }

    #[test]
    fn monotone_in_target_set() {
        let p = sample_simplex(4, 40, 7).unwrap();
        let q = sample_simplex(4, 50, 8).unwrap();
        let g = Generator::KullbackLeibler;
        let full = hausdorff_linear(&p, &q, g, Variant::Primal).unwrap().value;
        // drop a suffix of Q: the divergence can only grow
        let sub = crate::data::PointCloud::from_rows(
            &q.rows().take(20).map(|r| r.to_vec()).collect::<Vec<_>>(),
        )
        .unwrap();
        let smaller = hausdorff_linear(&p, &sub, g, Variant::Primal).unwrap().value;
        assert!(smaller >= full);
    }

    #[test]
    fn zero_iff_subset() {
        let q = sample_simplex(3, 20, 9).unwrap();
        let p = crate::data::PointCloud::from_rows(
            &q.rows().skip(5).take(6).map(|r| r.to_vec()).collect::<Vec<_>>(),
        )
        .unwrap();
        let r = hausdorff_linear(&p, &q, Generator::ItakuraSaito, Variant::Primal).unwrap();
        assert_eq!(r.value, ExtendedReal::ZERO);
        // a point not in Q forces a positive value
        let stray = sample_simplex(3, 1, 10).unwrap();
        let p2 = p.concat(&stray).unwrap();
        let r2 = hausdorff_linear(&p2, &q, Generator::ItakuraSaito, Variant::Primal).unwrap();
        assert!(r2.value > ExtendedReal::ZERO);
    }

    #[test]
    fn witness_reproduces_value() {
        let p = sample_simplex(5, 60, 11).unwrap();
        let q = sample_simplex(5, 45, 12).unwrap();
        for g in Generator::ALL {
            for v in [Variant::Primal, Variant::Dual] {
                for backend in Backend::ALL {
                    let r = hausdorff(&p, &q, g, v, backend).unwrap();
                    let (i, j) = r.witness.unwrap();
                    let d = match v {
                        Variant::Primal => divergence(g, p.point(i), q.point(j)).unwrap(),
                        Variant::Dual => divergence(g, q.point(j), p.point(i)).unwrap(),
                    };
                    assert_eq!(d, r.value, "backend={backend}");
                }
            }
        }
    }

    #[test]
    fn order_independence_of_value() {
        let p = sample_simplex(4, 30, 13).unwrap();
        let q = sample_simplex(4, 25, 14).unwrap();
        let mut rows: Vec<Vec<f64>> = p.rows().map(|r| r.to_vec()).collect();
        rows.reverse();
        let p_rev = crate::data::PointCloud::from_rows(&rows).unwrap();
        let g = Generator::GeneralizedKl;
        let a = hausdorff_shell(&p, &q, g, Variant::Primal).unwrap();
        let b = hausdorff_shell(&p_rev, &q, g, Variant::Primal).unwrap();
        assert_eq!(a.value, b.value);
    }

    #[test]
    fn both_directions_matches_two_calls() {
        let p = sample_simplex(3, 25, 15).unwrap();
        let q = sample_simplex(3, 30, 16).unwrap();
        let g = Generator::KullbackLeibler;
        let (fwd, bwd) =
            hausdorff_both_directions(&p, &q, g, Variant::Primal, Backend::KdTree).unwrap();
        assert_eq!(fwd.value, hausdorff_kdtree(&p, &q, g, Variant::Primal).unwrap().value);
        assert_eq!(bwd.value, hausdorff_kdtree(&q, &p, g, Variant::Primal).unwrap().value);
        let (a, b) = hausdorff_both_directions(&p, &p, g, Variant::Primal, Backend::Linear).unwrap();
        assert_eq!((a.value, b.value), (ExtendedReal::ZERO, ExtendedReal::ZERO));
    }

    #[test]
    fn outlier_orders_the_two_directions() {
        // P carries a far outlier; Q clusters near the rest of P
        let mut rows: Vec<Vec<f64>> = sample_simplex(3, 20, 17)
            .unwrap()
            .rows()
            .map(|r| r.to_vec())
            .collect();
        rows.push(vec![0.998, 0.001, 0.001]);
        let p = crate::data::PointCloud::from_rows(&rows).unwrap();
        let q = sample_simplex(3, 20, 17).unwrap();
        let g = Generator::KullbackLeibler;
        let (fwd, bwd) =
            hausdorff_both_directions(&p, &q, g, Variant::Primal, Backend::Linear).unwrap();
        assert!(fwd.value > bwd.value);
    }

    #[test]
    fn parallel_matches_sequential() {
        let p = sample_simplex(5, 120, 18).unwrap();
        let q = sample_simplex(5, 90, 19).unwrap();
        for g in [Generator::KullbackLeibler, Generator::ItakuraSaito] {
            for v in [Variant::Primal, Variant::Dual] {
                for backend in Backend::ALL {
                    let seq = hausdorff(&p, &q, g, v, backend).unwrap();
                    let par = hausdorff_par(&p, &q, g, v, backend).unwrap();
                    assert_eq!(seq.value, par.value, "backend={backend}");
                }
            }
        }
    }

    #[test]
    fn empty_or_mismatched_inputs_rejected() {
        let p = sample_simplex(3, 5, 20).unwrap();
        let empty = crate::data::PointCloud::new(vec![], 3).unwrap();
        assert!(matches!(
            hausdorff_linear(&p, &empty, Generator::KullbackLeibler, Variant::Primal),
            Err(Error::Usage(_))
        ));
        let q = sample_simplex(4, 5, 21).unwrap();
        assert!(matches!(
            hausdorff_linear(&p, &q, Generator::KullbackLeibler, Variant::Primal),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
