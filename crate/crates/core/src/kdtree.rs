//! Exact nearest-neighbour Kd-tree for decomposable Bregman divergences.
//!
//! Construction is divergence-independent: the tree is a plain spatial
//! median split, and the divergence (and direction) is chosen per query.
//! Pruning clamps the query into a node's bounding box coordinate-wise; for
//! one-dimensional Bregman divergences the divergence is monotone on either
//! side of the query coordinate, so the clamped point attains the minimum
//! over the box and the bound is exact.
//!
//! Shell queries additionally terminate as soon as any visited candidate's
//! divergence drops to a caller-supplied threshold, returning `None`. The
//! Hausdorff computation uses this with its running maximum: a query that
//! cannot raise the maximum is abandoned early.

use crate::data::PointCloud;
use crate::divergence::{coord_div_cached, coord_div_raw, coord_transform, ExtendedReal, Generator};
use crate::error::{Error, Result};

pub const DEFAULT_LEAF_CAPACITY: usize = 16;

/// Orientation of a nearest-neighbour query over a stored set S.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// Minimize D_F(q || s) over stored points s.
    QueryToStored,
    /// Minimize D_F(s || q) over stored points s.
    StoredToQuery,
}

/// Result of a nearest-neighbour query.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NnAnswer {
    /// Index into the stored cloud; smallest index on exact ties.
    pub index: usize,
    /// Divergence between query and stored point in the query's direction.
    pub div: ExtendedReal,
}

/// Traversal counters, accumulated across queries.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct QueryStats {
    pub nodes_visited: u64,
    pub points_visited: u64,
}

/// Stored-side divergence evaluator: caches the per-coordinate log
/// transforms of a cloud once so repeated evaluations avoid recomputing
/// logarithms. Cached and uncached paths run identical operations, so
/// values are bitwise equal to [`crate::divergence`].
pub struct Evaluator<'a> {
    g: Generator,
    cloud: &'a PointCloud,
    tcache: Vec<f64>,
}

impl<'a> Evaluator<'a> {
    pub fn new(g: Generator, cloud: &'a PointCloud) -> Self {
        let tcache = cloud.data().iter().map(|&v| coord_transform(g, v)).collect();
        Self { g, cloud, tcache }
    }

    pub fn generator(&self) -> Generator {
        self.g
    }

    /// Divergence between a prepared query and stored point `idx`, oriented
    /// by `dir`.
    #[inline]
    pub fn divergence(&self, q: &PreparedQuery, idx: usize, dir: Direction) -> f64 {
        let d = self.cloud.dim();
        let s = self.cloud.point(idx);
        let st = &self.tcache[idx * d..(idx + 1) * d];
        let mut acc = 0.0;
        match dir {
            Direction::QueryToStored => {
                for i in 0..d {
                    acc += coord_div_cached(self.g, q.coords[i], q.t[i], s[i], st[i]);
                }
            }
            Direction::StoredToQuery => {
                for i in 0..d {
                    acc += coord_div_cached(self.g, s[i], st[i], q.coords[i], q.t[i]);
                }
            }
        }
        acc
    }
}

/// A query point with its cached coordinate transforms.
pub struct PreparedQuery<'a> {
    coords: &'a [f64],
    t: Vec<f64>,
}

impl<'a> PreparedQuery<'a> {
    pub fn new(g: Generator, coords: &'a [f64]) -> Self {
        let t = coords.iter().map(|&v| coord_transform(g, v)).collect();
        Self { coords, t }
    }

    pub fn coords(&self) -> &[f64] {
        self.coords
    }
}

#[derive(Debug, PartialEq)]
enum NodeKind {
    Leaf { start: u32, end: u32 },
    Split { dim: u32, value: f64, left: u32, right: u32 },
}

#[derive(Debug, PartialEq)]
struct Node {
    lo: Box<[f64]>,
    hi: Box<[f64]>,
    kind: NodeKind,
}

/// Exact dual-direction Bregman Kd-tree over a borrowed point cloud.
pub struct BregmanKdTree<'a> {
    cloud: &'a PointCloud,
    indices: Vec<u32>,
    nodes: Vec<Node>,
    root: u32,
    leaf_capacity: usize,
}

impl<'a> BregmanKdTree<'a> {
    /// Builds a tree with median splits on the widest-extent dimension.
    /// Deterministic for a fixed input order; duplicates are retained.
    pub fn build(cloud: &'a PointCloud, leaf_capacity: usize) -> Result<Self> {
        if cloud.is_empty() {
            return Err(Error::Usage("cannot build a Kd-tree over an empty point set".into()));
        }
        if leaf_capacity == 0 {
            return Err(Error::Usage("leaf capacity must be positive".into()));
        }
        let mut tree = Self {
            cloud,
            indices: (0..cloud.len() as u32).collect(),
            nodes: Vec::new(),
            root: 0,
            leaf_capacity,
        };
        tree.root = tree.build_rec(0, cloud.len());
        Ok(tree)
    }

    pub fn len(&self) -> usize {
        self.cloud.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn leaf_capacity(&self) -> usize {
        self.leaf_capacity
    }

    pub fn cloud(&self) -> &PointCloud {
        self.cloud
    }

    /// Builds a cached divergence evaluator over the stored cloud.
    pub fn evaluator(&self, g: Generator) -> Evaluator<'a> {
        Evaluator::new(g, self.cloud)
    }

    /// Structural equality, used to check build determinism.
    pub fn same_structure(&self, other: &BregmanKdTree<'_>) -> bool {
        self.indices == other.indices && self.nodes == other.nodes && self.root == other.root
    }

    /// Maximum node depth, root at depth 0.
    pub fn depth(&self) -> usize {
        fn rec(nodes: &[Node], id: u32) -> usize {
            match nodes[id as usize].kind {
                NodeKind::Leaf { .. } => 0,
                NodeKind::Split { left, right, .. } => {
                    1 + rec(nodes, left).max(rec(nodes, right))
                }
            }
        }
        rec(&self.nodes, self.root)
    }

    fn build_rec(&mut self, start: usize, end: usize) -> u32 {
        let d = self.cloud.dim();
        let mut lo = vec![f64::INFINITY; d].into_boxed_slice();
        let mut hi = vec![f64::NEG_INFINITY; d].into_boxed_slice();
        for &idx in &self.indices[start..end] {
            for (i, &v) in self.cloud.point(idx as usize).iter().enumerate() {
                lo[i] = lo[i].min(v);
                hi[i] = hi[i].max(v);
            }
        }

        let kind = if end - start <= self.leaf_capacity {
            NodeKind::Leaf { start: start as u32, end: end as u32 }
        } else {
            let mut split_dim = 0;
            let mut best_extent = f64::NEG_INFINITY;
            for i in 0..d {
                let extent = hi[i] - lo[i];
                if extent > best_extent {
                    best_extent = extent;
                    split_dim = i;
                }
            }
            let mid = (start + end) / 2;
            // total key (coordinate, index): deterministic even with
            // duplicate coordinates
            let cloud = self.cloud;
            self.indices[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
                let ca = cloud.point(a as usize)[split_dim];
                let cb = cloud.point(b as usize)[split_dim];
                ca.partial_cmp(&cb).unwrap().then(a.cmp(&b))
            });
            let value = cloud.point(self.indices[mid] as usize)[split_dim];
            let left = self.build_rec(start, mid);
            let right = self.build_rec(mid, end);
            NodeKind::Split { dim: split_dim as u32, value, left, right }
        };
        self.nodes.push(Node { lo, hi, kind });
        (self.nodes.len() - 1) as u32
    }

    /// Exact nearest neighbour in direction `dir`; ties broken by smallest
    /// stored index. The query is validated against the generator's domain.
    pub fn nn_query(
        &self,
        ev: &Evaluator<'_>,
        q: &[f64],
        dir: Direction,
    ) -> Result<NnAnswer> {
        let mut stats = QueryStats::default();
        self.nn_query_with_stats(ev, q, dir, &mut stats)
    }

    pub fn nn_query_with_stats(
        &self,
        ev: &Evaluator<'_>,
        q: &[f64],
        dir: Direction,
        stats: &mut QueryStats,
    ) -> Result<NnAnswer> {
        self.check_query(ev, q)?;
        let prepared = PreparedQuery::new(ev.g, q);
        let mut search = Search::new(self, ev, &prepared, dir, None, stats);
        search.run();
        Ok(NnAnswer {
            index: search.best_idx as usize,
            div: ExtendedReal::new(search.best_div),
        })
    }

    /// Nearest-neighbour query with shell early termination: returns `None`
    /// as soon as any visited candidate's divergence is at most `threshold`;
    /// otherwise completes and returns the exact nearest neighbour, whose
    /// divergence then exceeds the threshold.
    pub fn shell_query(
        &self,
        ev: &Evaluator<'_>,
        q: &[f64],
        dir: Direction,
        threshold: ExtendedReal,
    ) -> Result<Option<NnAnswer>> {
        let mut stats = QueryStats::default();
        self.shell_query_with_stats(ev, q, dir, threshold, &mut stats)
    }

    pub fn shell_query_with_stats(
        &self,
        ev: &Evaluator<'_>,
        q: &[f64],
        dir: Direction,
        threshold: ExtendedReal,
        stats: &mut QueryStats,
    ) -> Result<Option<NnAnswer>> {
        self.check_query(ev, q)?;
        let prepared = PreparedQuery::new(ev.g, q);
        let mut search = Search::new(self, ev, &prepared, dir, Some(threshold.get()), stats);
        search.run();
        if search.terminated {
            Ok(None)
        } else {
            Ok(Some(NnAnswer {
                index: search.best_idx as usize,
                div: ExtendedReal::new(search.best_div),
            }))
        }
    }

    fn check_query(&self, ev: &Evaluator<'_>, q: &[f64]) -> Result<()> {
        debug_assert!(std::ptr::eq(ev.cloud, self.cloud), "evaluator built for another cloud");
        if q.len() != self.cloud.dim() {
            return Err(Error::DimensionMismatch { left: q.len(), right: self.cloud.dim() });
        }
        ev.g.check_divergence_domain(q)
    }
}

/// Lower bound on the divergence between `q` and any point of the box
/// `[lo, hi]`, in direction `dir`. The bound is attained at the
/// coordinate-wise clamp of `q` into the box.
pub fn box_min_divergence(
    g: Generator,
    q: &[f64],
    lo: &[f64],
    hi: &[f64],
    dir: Direction,
) -> ExtendedReal {
    let mut acc = 0.0;
    for i in 0..q.len() {
        acc += coord_bound(g, dir, q[i], lo[i], hi[i]);
    }
    ExtendedReal::new(acc)
}

#[inline]
fn coord_bound(g: Generator, dir: Direction, qi: f64, lo: f64, hi: f64) -> f64 {
    if qi >= lo && qi <= hi {
        return 0.0;
    }
    let c = qi.clamp(lo, hi);
    match dir {
        Direction::QueryToStored => coord_div_raw(g, qi, c),
        Direction::StoredToQuery => coord_div_raw(g, c, qi),
    }
}

/// Recursive search state. The pruning bound is maintained incrementally:
/// descending an edge only changes the contribution of the split dimension,
/// so each update costs O(1) instead of O(d). Contributions derived from a
/// parent box never exceed those of its children, so the running total is a
/// valid lower bound; [`box_min_divergence`] is the full-recompute
/// reference used in tests.
struct Search<'s, 'a> {
    tree: &'s BregmanKdTree<'a>,
    ev: &'s Evaluator<'a>,
    q: &'s PreparedQuery<'s>,
    dir: Direction,
    threshold: Option<f64>,
    stats: &'s mut QueryStats,
    best_div: f64,
    best_idx: u32,
    contrib: Vec<f64>,
    finite_sum: f64,
    inf_count: u32,
    terminated: bool,
}

impl<'s, 'a> Search<'s, 'a> {
    fn new(
        tree: &'s BregmanKdTree<'a>,
        ev: &'s Evaluator<'a>,
        q: &'s PreparedQuery<'s>,
        dir: Direction,
        threshold: Option<f64>,
        stats: &'s mut QueryStats,
    ) -> Self {
        Self {
            tree,
            ev,
            q,
            dir,
            threshold,
            stats,
            best_div: f64::INFINITY,
            best_idx: u32::MAX,
            contrib: Vec::new(),
            finite_sum: 0.0,
            inf_count: 0,
            terminated: false,
        }
    }

    fn run(&mut self) {
        let root = self.tree.root;
        let node = &self.tree.nodes[root as usize];
        let g = self.ev.g;
        self.contrib = (0..self.q.coords.len())
            .map(|i| coord_bound(g, self.dir, self.q.coords[i], node.lo[i], node.hi[i]))
            .collect();
        for &c in &self.contrib {
            if c.is_infinite() {
                self.inf_count += 1;
            } else {
                self.finite_sum += c;
            }
        }
        self.visit(root);
    }

    #[inline]
    fn bound(&self) -> f64 {
        if self.inf_count > 0 {
            f64::INFINITY
        } else {
            self.finite_sum
        }
    }

    fn visit(&mut self, id: u32) {
        self.stats.nodes_visited += 1;
        match self.tree.nodes[id as usize].kind {
            NodeKind::Leaf { start, end } => self.scan_leaf(start, end),
            NodeKind::Split { dim, value, left, right } => {
                let (near, far) = if self.q.coords[dim as usize] < value {
                    (left, right)
                } else {
                    (right, left)
                };
                self.descend(near, dim as usize);
                if self.terminated {
                    return;
                }
                self.descend(far, dim as usize);
            }
        }
    }

    /// Tightens the split-dimension contribution to the child's interval,
    /// recurses unless prunable, then restores the parent's exact state.
    fn descend(&mut self, child: u32, dim: usize) {
        let node = &self.tree.nodes[child as usize];
        let new = coord_bound(self.ev.g, self.dir, self.q.coords[dim], node.lo[dim], node.hi[dim]);
        let (old, old_sum, old_inf) = (self.contrib[dim], self.finite_sum, self.inf_count);
        if new != old {
            if old.is_infinite() {
                self.inf_count -= 1;
            } else {
                self.finite_sum -= old;
            }
            if new.is_infinite() {
                self.inf_count += 1;
            } else {
                self.finite_sum += new;
            }
            self.contrib[dim] = new;
        }
        // prune strictly: a bound equal to the current best may still hide
        // an equal-divergence point with a smaller index
        if self.bound() <= self.best_div {
            self.visit(child);
        }
        self.contrib[dim] = old;
        self.finite_sum = old_sum;
        self.inf_count = old_inf;
    }

    fn scan_leaf(&mut self, start: u32, end: u32) {
        for slot in start..end {
            let idx = self.tree.indices[slot as usize];
            self.stats.points_visited += 1;
            let div = self.ev.divergence(self.q, idx as usize, self.dir);
            if let Some(t) = self.threshold {
                if div <= t {
                    self.terminated = true;
                    return;
                }
            }
            if div < self.best_div || (div == self.best_div && idx < self.best_idx) {
                self.best_div = div;
                self.best_idx = idx;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{sample_simplex, PointCloud};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Brute-force oracle: argmin with smallest-index tie breaking.
    fn linear_nn(g: Generator, cloud: &PointCloud, q: &[f64], dir: Direction) -> (usize, f64) {
        let ev = Evaluator::new(g, cloud);
        let prep = PreparedQuery::new(g, q);
        let mut best = (usize::MAX, f64::INFINITY);
        for i in 0..cloud.len() {
            let d = ev.divergence(&prep, i, dir);
            if d < best.1 || (d == best.1 && i < best.0) {
                best = (i, d);
            }
        }
        best
    }

    #[test]
    fn single_point_tree() {
        let cloud = PointCloud::from_rows(&[vec![0.4, 0.6]]).unwrap();
        let tree = BregmanKdTree::build(&cloud, DEFAULT_LEAF_CAPACITY).unwrap();
        assert_eq!(tree.depth(), 0);
        let ev = tree.evaluator(Generator::KullbackLeibler);
        let ans = tree.nn_query(&ev, &[0.5, 0.5], Direction::QueryToStored).unwrap();
        assert_eq!(ans.index, 0);
    }

    #[test]
    fn empty_cloud_rejected() {
        let cloud = PointCloud::new(vec![], 3).unwrap();
        assert!(matches!(
            BregmanKdTree::build(&cloud, 16),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn depth_bound_on_uniform_data() {
        let cloud = sample_simplex(5, 1000, 11).unwrap();
        let tree = BregmanKdTree::build(&cloud, 16).unwrap();
        // ceil(log2(1000/16)) + 2
        assert!(tree.depth() <= 8, "depth {}", tree.depth());
    }

    #[test]
    fn build_is_deterministic() {
        let cloud = sample_simplex(6, 300, 5).unwrap();
        let a = BregmanKdTree::build(&cloud, 8).unwrap();
        let b = BregmanKdTree::build(&cloud, 8).unwrap();
        assert!(a.same_structure(&b));
    }

    #[test]
    fn duplicates_are_retained_and_exact() {
        let mut rows = vec![vec![0.25, 0.75]; 10];
        rows.push(vec![0.5, 0.5]);
        let cloud = PointCloud::from_rows(&rows).unwrap();
        let tree = BregmanKdTree::build(&cloud, 2).unwrap();
        let ev = tree.evaluator(Generator::SquaredEuclidean);
        let ans = tree.nn_query(&ev, &[0.26, 0.74], Direction::QueryToStored).unwrap();
        assert_eq!(ans.index, 0); // smallest index among the duplicates
    }

    #[test]
    fn every_point_in_exactly_one_leaf_and_boxes_contain_subtrees() {
        let cloud = sample_simplex(4, 257, 2).unwrap();
        let tree = BregmanKdTree::build(&cloud, 7).unwrap();
        let mut seen = vec![0u32; cloud.len()];
        fn walk(tree: &BregmanKdTree<'_>, id: u32, seen: &mut [u32]) {
            let node = &tree.nodes[id as usize];
            match node.kind {
                NodeKind::Leaf { start, end } => {
                    for slot in start..end {
                        let idx = tree.indices[slot as usize] as usize;
                        seen[idx] += 1;
                        for (i, &v) in tree.cloud.point(idx).iter().enumerate() {
                            assert!(node.lo[i] <= v && v <= node.hi[i]);
                        }
                    }
                }
                NodeKind::Split { left, right, .. } => {
                    for child in [left, right] {
                        let c = &tree.nodes[child as usize];
                        for i in 0..tree.cloud.dim() {
                            assert!(node.lo[i] <= c.lo[i] && c.hi[i] <= node.hi[i]);
                        }
                        walk(tree, child, seen);
                    }
                }
            }
        }
        walk(&tree, tree.root, &mut seen);
        assert!(seen.iter().all(|&c| c == 1));
    }

    #[test]
    fn two_point_kl_query() {
        let cloud = PointCloud::from_rows(&[vec![0.2, 0.8], vec![0.9, 0.1]]).unwrap();
        let tree = BregmanKdTree::build(&cloud, 1).unwrap();
        let ev = tree.evaluator(Generator::KullbackLeibler);
        let q = [0.25, 0.75];
        let ans = tree.nn_query(&ev, &q, Direction::QueryToStored).unwrap();
        let oracle = linear_nn(Generator::KullbackLeibler, &cloud, &q, Direction::QueryToStored);
        assert_eq!(ans.index, oracle.0);
        assert_eq!(ans.index, 0);
    }

    #[test]
    fn stored_point_query_has_zero_divergence() {
        let cloud = sample_simplex(3, 40, 9).unwrap();
        let tree = BregmanKdTree::build(&cloud, 4).unwrap();
        for g in [Generator::KullbackLeibler, Generator::ItakuraSaito, Generator::SquaredEuclidean] {
            let ev = tree.evaluator(g);
            let q: Vec<f64> = cloud.point(17).to_vec();
            let ans = tree.nn_query(&ev, &q, Direction::StoredToQuery).unwrap();
            assert_eq!(ans.index, 17);
            assert_eq!(ans.div, ExtendedReal::ZERO);
        }
    }

    #[test]
    fn queries_match_linear_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for (inst, &dim) in [2usize, 5, 10].iter().enumerate() {
            let stored = sample_simplex(dim, 400, 100 + inst as u64).unwrap();
            let queries = sample_simplex(dim, 50, 200 + inst as u64).unwrap();
            let cap = 1 + rng.random_range(0..20);
            let tree = BregmanKdTree::build(&stored, cap).unwrap();
            for g in Generator::ALL {
                let ev = tree.evaluator(g);
                for q in queries.rows() {
                    for dir in [Direction::QueryToStored, Direction::StoredToQuery] {
                        let ans = tree.nn_query(&ev, q, dir).unwrap();
                        let (oi, od) = linear_nn(g, &stored, q, dir);
                        assert_eq!(ans.index, oi, "g={g} dir={dir:?}");
                        assert_eq!(ans.div.get(), od);
                    }
                }
            }
        }
    }

    #[test]
    fn shell_infinite_threshold_returns_none_immediately() {
        let cloud = sample_simplex(4, 100, 21).unwrap();
        let tree = BregmanKdTree::build(&cloud, 8).unwrap();
        let ev = tree.evaluator(Generator::KullbackLeibler);
        let q = sample_simplex(4, 1, 22).unwrap();
        let mut stats = QueryStats::default();
        let ans = tree
            .shell_query_with_stats(&ev, q.point(0), Direction::QueryToStored, ExtendedReal::INFINITY, &mut stats)
            .unwrap();
        assert!(ans.is_none());
        assert_eq!(stats.points_visited, 1);
    }

    #[test]
    fn shell_zero_threshold_is_exact_off_support() {
        let cloud = sample_simplex(4, 100, 23).unwrap();
        let tree = BregmanKdTree::build(&cloud, 8).unwrap();
        let q = sample_simplex(4, 1, 24).unwrap();
        for g in Generator::ALL {
            let ev = tree.evaluator(g);
            let ans = tree
                .shell_query(&ev, q.point(0), Direction::QueryToStored, ExtendedReal::ZERO)
                .unwrap()
                .expect("no candidate can have divergence <= 0");
            let (oi, od) = linear_nn(g, &cloud, q.point(0), Direction::QueryToStored);
            assert_eq!((ans.index, ans.div.get()), (oi, od));
        }
    }

    #[test]
    fn shell_none_iff_min_at_most_threshold() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let stored = sample_simplex(5, 300, 32).unwrap();
        let queries = sample_simplex(5, 60, 33).unwrap();
        let tree = BregmanKdTree::build(&stored, 10).unwrap();
        for g in [Generator::KullbackLeibler, Generator::ItakuraSaito] {
            let ev = tree.evaluator(g);
            for q in queries.rows() {
                for dir in [Direction::QueryToStored, Direction::StoredToQuery] {
                    let (oi, od) = linear_nn(g, &stored, q, dir);
                    let threshold = od * rng.random_range(0.2f64..2.0);
                    let ans = tree
                        .shell_query(&ev, q, dir, ExtendedReal::new(threshold))
                        .unwrap();
                    if od <= threshold {
                        assert!(ans.is_none());
                    } else {
                        let ans = ans.expect("min above threshold must complete");
                        assert_eq!((ans.index, ans.div.get()), (oi, od));
                    }
                }
            }
        }
    }

    #[test]
    fn box_bound_trivia() {
        // query inside box
        let b = box_min_divergence(
            Generator::KullbackLeibler,
            &[0.3, 0.7],
            &[0.1, 0.5],
            &[0.4, 0.9],
            Direction::QueryToStored,
        );
        assert_eq!(b, ExtendedReal::ZERO);
        // d=1, SE, q=5, box [0,2]
        let b = box_min_divergence(
            Generator::SquaredEuclidean,
            &[5.0],
            &[0.0],
            &[2.0],
            Direction::QueryToStored,
        );
        assert_eq!(b.get(), 9.0);
    }

    #[test]
    fn box_bound_is_admissible_and_attained() {
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        for _ in 0..50 {
            let d = rng.random_range(1..4);
            let lo: Vec<f64> = (0..d).map(|_| rng.random_range(0.05f64..0.5)).collect();
            let hi: Vec<f64> = lo.iter().map(|&l| l + rng.random_range(0.01f64..0.5)).collect();
            let q: Vec<f64> = (0..d).map(|_| rng.random_range(0.01f64..1.2)).collect();
            for g in Generator::ALL {
                for dir in [Direction::QueryToStored, Direction::StoredToQuery] {
                    let bound = box_min_divergence(g, &q, &lo, &hi, dir).get();
                    // grid-sample the box; the bound must never exceed the
                    // divergence to any sample
                    let steps = 6;
                    let mut min_seen = f64::INFINITY;
                    let mut sample = vec![0.0; d];
                    let total = steps_pow(steps, d);
                    for code in 0..total {
                        let mut c = code;
                        for i in 0..d {
                            let k = c % steps;
                            c /= steps;
                            sample[i] = lo[i] + (hi[i] - lo[i]) * k as f64 / (steps - 1) as f64;
                        }
                        let dv = match dir {
                            Direction::QueryToStored => {
                                crate::divergence::divergence(g, &q, &sample).unwrap().get()
                            }
                            Direction::StoredToQuery => {
                                crate::divergence::divergence(g, &sample, &q).unwrap().get()
                            }
                        };
                        assert!(
                            bound <= dv + 1e-12 * dv.abs().max(1.0),
                            "bound {bound} exceeds divergence {dv}"
                        );
                        min_seen = min_seen.min(dv);
                    }
                    // attained at the clamped point
                    let clamped: Vec<f64> =
                        q.iter().zip(lo.iter().zip(hi.iter())).map(|(&v, (&l, &h))| v.clamp(l, h)).collect();
                    let at_clamp = match dir {
                        Direction::QueryToStored => {
                            crate::divergence::divergence(g, &q, &clamped).unwrap().get()
                        }
                        Direction::StoredToQuery => {
                            crate::divergence::divergence(g, &clamped, &q).unwrap().get()
                        }
                    };
                    assert!((bound - at_clamp).abs() <= 1e-12 * at_clamp.abs().max(1e-300));
                    let _ = min_seen;
                }
            }
        }
    }

    fn steps_pow(steps: usize, d: usize) -> usize {
        (0..d).fold(1, |acc, _| acc * steps)
    }

    #[test]
    fn pruning_admissible_against_all_subtree_points() {
        let cloud = sample_simplex(3, 120, 61).unwrap();
        let tree = BregmanKdTree::build(&cloud, 5).unwrap();
        let q = sample_simplex(3, 1, 62).unwrap();
        for g in [Generator::KullbackLeibler, Generator::SquaredEuclidean] {
            for dir in [Direction::QueryToStored, Direction::StoredToQuery] {
                for node in &tree.nodes {
                    let bound = box_min_divergence(g, q.point(0), &node.lo, &node.hi, dir).get();
                    // leaves cover every subtree via the recursive check above,
                    // so it is enough to test each node against its own leaf range
                    if let NodeKind::Leaf { start, end } = node.kind {
                        for slot in start..end {
                            let idx = tree.indices[slot as usize] as usize;
                            let dv = match dir {
                                Direction::QueryToStored => {
                                    crate::divergence::divergence(g, q.point(0), cloud.point(idx))
                                        .unwrap()
                                        .get()
                                }
                                Direction::StoredToQuery => {
                                    crate::divergence::divergence(g, cloud.point(idx), q.point(0))
                                        .unwrap()
                                        .get()
                                }
                            };
                            assert!(bound <= dv + 1e-12 * dv.max(1.0));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn domain_violation_is_an_error() {
        let cloud = sample_simplex(3, 10, 71).unwrap();
        let tree = BregmanKdTree::build(&cloud, 4).unwrap();
        let ev = tree.evaluator(Generator::KullbackLeibler);
        assert!(matches!(
            tree.nn_query(&ev, &[-0.1, 0.6, 0.5], Direction::QueryToStored),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            tree.nn_query(&ev, &[0.5, 0.5], Direction::QueryToStored),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
