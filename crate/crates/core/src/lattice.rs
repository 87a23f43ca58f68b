//! Orbit of the hexagon center under the group generated by reflections in
//! the three long sides.
//!
//! Reduced words in the three reflections are in bijection with orbit points,
//! and hexagons sharing a long side are adjacent, so the orbit is a rooted
//! trivalent tree. Every descendant of a node lies beyond the long side the
//! node's word last crossed, and the union of all hexagons is convex, so the
//! geodesic from the root to any descendant crosses that side segment. The
//! distance from the root to the segment therefore bounds every distance in
//! the subtree from below, which makes it an exact pruning key.
//!
//! The fast walkers store, for a node `g`, only the pulled-back base point
//! `q = g⁻¹·o`: then `d(o, g·o) = d(q, o)`, `d(o, g·side_j) = d(q, side_j)`,
//! and the child `g·r_j` has state `r_j·q`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hexagon::{build_hexagon, HexagonGeometry};
use crate::hyp::{acosh_clamped, distance, distance_point_to_segment, segment_distance_cosh, Isometry, Point};

pub const MAX_RADIUS: f64 = 30.0;
pub const DEFAULT_NODE_BUDGET: u64 = 100_000_000;

/// Offset added to grid radii so that they avoid exact distance ties.
pub const GRID_OFFSET: f64 = std::f64::consts::SQRT_2 * 1e-3;

/// Constant of the sub-multiplicativity lemma: `(20/3)·e^{8C_ℓ + ℓ}`.
pub fn submultiplicative_constant(hex: &HexagonGeometry) -> f64 {
    20.0 / 3.0 * (8.0 * hex.c_ell + hex.ell).exp()
}

/// Additive correction `ℓ + 8C_ℓ + log(20/3)` of the growth-rate bound.
pub fn growth_correction(hex: &HexagonGeometry) -> f64 {
    hex.ell + 8.0 * hex.c_ell + (20.0f64 / 3.0).ln()
}

pub(crate) fn check_radius(radius: f64) -> Result<()> {
    if !(radius >= 0.0) {
        return Err(Error::InvalidInput(format!("radius must be nonnegative, got {radius}")));
    }
    if radius > MAX_RADIUS {
        return Err(Error::OutOfRange {
            what: "radius",
            value: radius,
            max: MAX_RADIUS,
        });
    }
    Ok(())
}

/// Base hexagon data in the form the hot loops want.
#[derive(Debug, Clone)]
pub struct OrbitKernel {
    reflections: [Matrix3<f64>; 3],
    side_a: [Vector3<f64>; 3],
    side_b: [Vector3<f64>; 3],
    side_n: [Vector3<f64>; 3],
    cosh_side: f64,
    pub c_ell: f64,
    pub ell: f64,
}

impl OrbitKernel {
    pub fn new(hex: &HexagonGeometry) -> Self {
        OrbitKernel {
            reflections: std::array::from_fn(|j| *hex.reflections[j].matrix()),
            side_a: std::array::from_fn(|j| *hex.s_side(j).a.coords()),
            side_b: std::array::from_fn(|j| *hex.s_side(j).b.coords()),
            side_n: std::array::from_fn(|j| hex.s_side(j).normal),
            cosh_side: hex.s.cosh(),
            c_ell: hex.c_ell,
            ell: hex.ell,
        }
    }

    #[inline]
    pub fn reflect(&self, j: usize, q: &Vector3<f64>) -> Vector3<f64> {
        let mut v = self.reflections[j] * q;
        v[0] = (1.0 + v[1] * v[1] + v[2] * v[2]).sqrt();
        v
    }

    /// Cosh of the distance from `q` to long side `j` of the base hexagon.
    #[inline]
    pub fn side_cosh(&self, j: usize, q: &Vector3<f64>) -> f64 {
        segment_distance_cosh(q, &self.side_a[j], &self.side_b[j], &self.side_n[j], self.cosh_side)
    }
}

pub(crate) fn origin_vec() -> Vector3<f64> {
    Vector3::new(1.0, 0.0, 0.0)
}

#[derive(Debug, Clone, Serialize)]
pub struct BallCensus {
    pub ell: f64,
    pub radius: f64,
    /// Orbit points at distance `≤ radius` (closed ball).
    pub count: u64,
    /// Orbit points with `radius − 2C_ℓ ≤ d < radius`.
    pub shell_count: u64,
    pub nodes_expanded: u64,
    /// Counts per bucket `[k·2C_ℓ, (k+1)·2C_ℓ)`, keyed by the bucket's lower edge.
    pub histogram: Vec<(f64, u64)>,
}

impl BallCensus {
    fn empty(ell: f64, radius: f64) -> Self {
        BallCensus {
            ell,
            radius,
            count: 0,
            shell_count: 0,
            nodes_expanded: 0,
            histogram: Vec::new(),
        }
    }
}

struct Frontier {
    key: f64,
    seq: u64,
    q: Vector3<f64>,
    last: u8,
}

impl PartialEq for Frontier {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Frontier {}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Frontier {
    // BinaryHeap is a max-heap; smallest key (then oldest) comes out first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .key
            .total_cmp(&self.key)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Best-first walk over every node whose separating side is within `radius`,
/// calling `on_point` with `cosh d(o, point)` for every point in the closed ball.
/// Returns the number of expanded nodes, or `Err(expanded)` when over budget.
fn best_first_walk(
    kernel: &OrbitKernel,
    radius: f64,
    budget: u64,
    mut on_point: impl FnMut(f64),
) -> std::result::Result<u64, u64> {
    let cosh_r = radius.cosh();
    let root = origin_vec();
    on_point(1.0);
    let mut expanded = 1u64;
    let mut seq = 0u64;
    let mut heap = BinaryHeap::new();
    for j in 0..3 {
        let key = kernel.side_cosh(j, &root);
        if key <= cosh_r {
            heap.push(Frontier {
                key,
                seq,
                q: kernel.reflect(j, &root),
                last: j as u8,
            });
            seq += 1;
        }
    }
    while let Some(node) = heap.pop() {
        if expanded >= budget {
            return Err(expanded);
        }
        expanded += 1;
        if node.q[0] <= cosh_r {
            on_point(node.q[0]);
        }
        for j in 0..3 {
            if j as u8 == node.last {
                continue;
            }
            let key = kernel.side_cosh(j, &node.q);
            if key <= cosh_r {
                heap.push(Frontier {
                    key,
                    seq,
                    q: kernel.reflect(j, &node.q),
                    last: j as u8,
                });
                seq += 1;
            }
        }
    }
    Ok(expanded)
}

/// Counts orbit points in the closed ball of the given radius.
pub fn enumerate_ball(hex: &HexagonGeometry, radius: f64) -> Result<BallCensus> {
    enumerate_ball_with_budget(hex, radius, DEFAULT_NODE_BUDGET)
}

pub fn enumerate_ball_with_budget(
    hex: &HexagonGeometry,
    radius: f64,
    budget: u64,
) -> Result<BallCensus> {
    check_radius(radius)?;
    let kernel = OrbitKernel::new(hex);
    let width = 2.0 * hex.c_ell;
    let shell_lo = radius - width;
    let mut census = BallCensus::empty(hex.ell, radius);
    let mut buckets: Vec<u64> = Vec::new();
    let outcome = best_first_walk(&kernel, radius, budget, |cosh_d| {
        let d = acosh_clamped(cosh_d);
        census.count += 1;
        if d >= shell_lo && d < radius {
            census.shell_count += 1;
        }
        let b = (d / width) as usize;
        if b >= buckets.len() {
            buckets.resize(b + 1, 0);
        }
        buckets[b] += 1;
    });
    census.histogram = buckets
        .iter()
        .enumerate()
        .map(|(k, &c)| (k as f64 * width, c))
        .collect();
    match outcome {
        Ok(expanded) => {
            census.nodes_expanded = expanded;
            Ok(census)
        }
        Err(expanded) => {
            census.nodes_expanded = expanded;
            Err(Error::BudgetExhausted {
                budget,
                partial: Box::new(census),
            })
        }
    }
}

/// `#{y ∈ T₃ : R − 2C_ℓ ≤ d(o, y) < R}`.
pub fn shell_census(hex: &HexagonGeometry, radius: f64) -> Result<u64> {
    Ok(enumerate_ball(hex, radius)?.shell_count)
}

/// Sorted distances of all orbit points within a radius; answers `N_ℓ(·)`
/// queries at any smaller radius without re-walking the tree.
#[derive(Debug, Clone)]
pub struct LatticeProfile {
    pub ell: f64,
    pub c_ell: f64,
    pub max_radius: f64,
    pub nodes_expanded: u64,
    distances: Vec<f64>,
}

/// Access to ball counts `N_ℓ(R)`.
pub trait BallCounter {
    fn c_ell(&self) -> f64;
    /// Points at distance `≤ radius`; a negative radius gives 0.
    fn count_within(&self, radius: f64) -> Result<u64>;
}

impl LatticeProfile {
    pub fn build(hex: &HexagonGeometry, max_radius: f64) -> Result<Self> {
        check_radius(max_radius)?;
        let kernel = OrbitKernel::new(hex);
        let mut distances = Vec::new();
        let expanded = best_first_walk(&kernel, max_radius, DEFAULT_NODE_BUDGET, |c| {
            distances.push(acosh_clamped(c))
        })
        .map_err(|_| Error::BudgetExhausted {
            budget: DEFAULT_NODE_BUDGET,
            partial: Box::new(BallCensus::empty(hex.ell, max_radius)),
        })?;
        distances.sort_by(f64::total_cmp);
        Ok(LatticeProfile {
            ell: hex.ell,
            c_ell: hex.c_ell,
            max_radius,
            nodes_expanded: expanded,
            distances,
        })
    }

    fn check(&self, radius: f64) -> Result<()> {
        if radius > self.max_radius {
            return Err(Error::OutOfRange {
                what: "profile radius",
                value: radius,
                max: self.max_radius,
            });
        }
        Ok(())
    }

    /// Points at distance `< radius`.
    pub fn count_below(&self, radius: f64) -> Result<u64> {
        self.check(radius)?;
        Ok(self.distances.partition_point(|&d| d < radius) as u64)
    }

    /// `#S_R`, the half-open shell `[R − 2C_ℓ, R)`.
    pub fn shell(&self, radius: f64) -> Result<u64> {
        let lo = radius - 2.0 * self.c_ell;
        Ok(self.count_below(radius)? - self.distances.partition_point(|&d| d < lo) as u64)
    }

    pub fn distances(&self) -> &[f64] {
        &self.distances
    }
}

impl BallCounter for LatticeProfile {
    fn c_ell(&self) -> f64 {
        self.c_ell
    }

    fn count_within(&self, radius: f64) -> Result<u64> {
        if radius < 0.0 {
            return Ok(0);
        }
        self.check(radius)?;
        Ok(self.distances.partition_point(|&d| d <= radius) as u64)
    }
}

/// A node of the orbit tree with its full isometry.
#[derive(Debug, Clone)]
pub struct TreeNode {
    /// Last generator of the reduced word (`None` at the root).
    pub word_last: Option<u8>,
    pub depth: u32,
    pub isometry: Isometry,
    pub point: Point,
    /// `d(o, point)`.
    pub distance: f64,
    /// Distance from `o` to the long side the word last crossed.
    pub side_distance: f64,
    pub parent: Option<usize>,
}

/// The pruned orbit tree, stored in best-first (side distance) order.
#[derive(Debug, Clone)]
pub struct OrbitTree {
    pub ell: f64,
    pub c_ell: f64,
    pub radius: f64,
    pub nodes: Vec<TreeNode>,
}

impl OrbitTree {
    /// Ancestors of node `i`, starting with `i` itself and ending at the root.
    pub fn ancestors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        std::iter::successors(Some(i), move |&k| self.nodes[k].parent)
    }

    /// Reduced word of node `i`, first letter first.
    pub fn word(&self, i: usize) -> Vec<u8> {
        let mut w: Vec<u8> = self
            .ancestors(i)
            .filter_map(|k| self.nodes[k].word_last)
            .collect();
        w.reverse();
        w
    }

    /// Nodes whose point lies in the closed ball.
    pub fn points_within(&self, radius: f64) -> impl Iterator<Item = (usize, &TreeNode)> {
        self.nodes
            .iter()
            .enumerate()
            .filter(move |(_, n)| n.distance <= radius)
    }
}

struct TreeFrontier {
    key: f64,
    seq: u64,
    parent: usize,
    generator: u8,
}

impl PartialEq for TreeFrontier {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for TreeFrontier {}

impl PartialOrd for TreeFrontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for TreeFrontier {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .key
            .total_cmp(&self.key)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Stores every node whose separating side is within `radius`, with full
/// isometries, in deterministic side-distance order.
pub fn enumerate_tree(hex: &HexagonGeometry, radius: f64, budget: u64) -> Result<OrbitTree> {
    check_radius(radius)?;
    let o = Point::origin();
    let mut nodes = vec![TreeNode {
        word_last: None,
        depth: 0,
        isometry: Isometry::identity(),
        point: o,
        distance: 0.0,
        side_distance: 0.0,
        parent: None,
    }];
    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    let mut push_children = |heap: &mut BinaryHeap<TreeFrontier>, nodes: &Vec<TreeNode>, i: usize| {
        let node = &nodes[i];
        for j in 0..3u8 {
            if Some(j) == node.word_last {
                continue;
            }
            let side = node.isometry.apply_segment(hex.s_side(j as usize));
            let key = distance_point_to_segment(&o, &side);
            if key <= radius {
                heap.push(TreeFrontier {
                    key,
                    seq,
                    parent: i,
                    generator: j,
                });
                seq += 1;
            }
        }
    };
    push_children(&mut heap, &nodes, 0);
    while let Some(f) = heap.pop() {
        if nodes.len() as u64 >= budget {
            let count = nodes.iter().filter(|n| n.distance <= radius).count() as u64;
            let mut partial = BallCensus::empty(hex.ell, radius);
            partial.count = count;
            partial.nodes_expanded = nodes.len() as u64;
            return Err(Error::BudgetExhausted {
                budget,
                partial: Box::new(partial),
            });
        }
        let parent = &nodes[f.parent];
        let isometry = parent.isometry * hex.reflections[f.generator as usize];
        let point = isometry.apply(&o);
        let node = TreeNode {
            word_last: Some(f.generator),
            depth: parent.depth + 1,
            isometry,
            point,
            distance: distance(&o, &point),
            side_distance: f.key,
            parent: Some(f.parent),
        };
        nodes.push(node);
        let i = nodes.len() - 1;
        push_children(&mut heap, &nodes, i);
    }
    Ok(OrbitTree {
        ell: hex.ell,
        c_ell: hex.c_ell,
        radius,
        nodes,
    })
}

/// `#B⁺_R(y)` for the depth-one node `y = r_generator·o`: descendants `z` of
/// `y` (including `y`) with `d(y, z) < R`, measured geometrically.
pub fn descendant_ball_count(hex: &HexagonGeometry, generator: u8, radius: f64) -> Result<u64> {
    let tree = enumerate_tree(hex, radius + 2.0 * hex.c_ell, DEFAULT_NODE_BUDGET)?;
    let anchor = hex.reflections[generator as usize].apply(&Point::origin());
    Ok((0..tree.nodes.len())
        .filter(|&i| tree.word(i).first() == Some(&generator))
        .filter(|&i| distance(&anchor, &tree.nodes[i].point) < radius)
        .count() as u64)
}

/// Unpruned reference enumeration of all reduced words up to a fixed depth.
pub mod reference {
    use super::*;

    /// `(word, d(o, w·o))` for every reduced word of length `≤ depth`.
    pub fn brute_force_distances(hex: &HexagonGeometry, depth: u32) -> Vec<(Vec<u8>, f64)> {
        let o = Point::origin();
        let mut out = vec![(Vec::new(), 0.0)];
        let mut level: Vec<(Vec<u8>, Isometry)> = vec![(Vec::new(), Isometry::identity())];
        for _ in 0..depth {
            let mut next = Vec::with_capacity(level.len() * 2 + 1);
            for (word, iso) in &level {
                for j in 0..3u8 {
                    if word.last() == Some(&j) {
                        continue;
                    }
                    let mut w = word.clone();
                    w.push(j);
                    let g = *iso * hex.reflections[j as usize];
                    out.push((w.clone(), distance(&o, &g.apply(&o))));
                    next.push((w, g));
                }
            }
            level = next;
        }
        out
    }

    /// Depth used by the reference count: `⌈1.5·R/(2C_ℓ)⌉ + 3`, extended
    /// until the two deepest levels hold no point of the ball.
    pub fn brute_force_count(hex: &HexagonGeometry, radius: f64) -> u64 {
        let mut depth = (1.5 * radius / (2.0 * hex.c_ell)).ceil() as u32 + 3;
        loop {
            let all = brute_force_distances(hex, depth);
            let deep_hit = all
                .iter()
                .any(|(w, d)| w.len() as u32 + 1 >= depth && *d <= radius);
            if !deep_hit {
                return all.iter().filter(|(_, d)| *d <= radius).count() as u64;
            }
            depth += 2;
        }
    }
}

/// One grid radius of the counting-bounds check.
#[derive(Debug, Clone, Serialize)]
pub struct CountingRow {
    pub radius: f64,
    pub n: u64,
    pub shell: u64,
    pub raw_rate: f64,
    pub certified_upper: f64,
    /// Sub-multiplicativity for every `(radius, r)` with `radius + r ≤ R_max`.
    pub submult_ok: bool,
    /// Shell sandwich; `None` below `2C_ℓ`, where it is not claimed.
    pub sandwich_ok: Option<bool>,
    pub ancestor_ok: bool,
    /// `N_ℓ(T) ≤ 5eᵀ`.
    pub area_ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub check: &'static str,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct CountingReport {
    pub ell: f64,
    pub c_ell: f64,
    pub r_max: f64,
    pub step: f64,
    pub rows: Vec<CountingRow>,
    pub submult_checks: u64,
    pub sandwich_checks: u64,
    pub ancestor_checks: u64,
    pub area_checks: u64,
    pub violations: Vec<Violation>,
}

impl CountingReport {
    pub fn all_hold(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Grid `k·step + GRID_OFFSET` for `k ≥ 0`, up to `r_max`.
pub fn radius_grid(r_max: f64, step: f64) -> Vec<f64> {
    (0..)
        .map(|k| k as f64 * step + GRID_OFFSET)
        .take_while(|&r| r <= r_max)
        .collect()
}

pub fn verify_counting_bounds(ell: f64, r_max: f64, step: f64) -> Result<CountingReport> {
    if !(step > 0.0) {
        return Err(Error::InvalidInput(format!("grid step must be positive, got {step}")));
    }
    let hex = build_hexagon(ell)?;
    check_radius(r_max)?;
    let tree = enumerate_tree(&hex, r_max, DEFAULT_NODE_BUDGET)?;
    let profile = LatticeProfile::build(&hex, r_max)?;
    let grid = radius_grid(r_max, step);
    let two_c = 2.0 * hex.c_ell;
    let k_mult = submultiplicative_constant(&hex);
    let correction = growth_correction(&hex);

    let mut violations = Vec::new();
    let (mut submult_checks, mut sandwich_checks, mut ancestor_checks, mut area_checks) = (0, 0, 0, 0);
    let mut rows = Vec::with_capacity(grid.len());
    let mut certified = f64::INFINITY;

    for &big_r in &grid {
        let n = profile.count_within(big_r)?;
        let shell = profile.shell(big_r)?;

        let mut submult_ok = true;
        for &r in grid.iter().take_while(|&&r| big_r + r <= r_max) {
            submult_checks += 1;
            let lhs = profile.count_within(big_r + r)? as f64;
            let rhs = k_mult * n as f64 * profile.count_within(r)? as f64;
            if lhs > rhs {
                submult_ok = false;
                violations.push(Violation {
                    check: "submultiplicativity",
                    detail: format!("R = {big_r}, r = {r}: {lhs} > {rhs}"),
                });
            }
        }

        let sandwich_ok = (big_r >= two_c).then(|| {
            sandwich_checks += 1;
            let ok = shell <= n && n <= 2 * shell;
            if !ok {
                violations.push(Violation {
                    check: "shell sandwich",
                    detail: format!("R = {big_r}: #S = {shell}, N = {n}"),
                });
            }
            ok
        });

        let mut ancestor_ok = true;
        let lo = big_r - two_c;
        for (i, node) in tree.points_within(r_max) {
            if node.depth <= 1 || node.distance <= lo {
                continue;
            }
            ancestor_checks += 1;
            let found = tree.ancestors(i).any(|k| {
                let d = tree.nodes[k].distance;
                lo <= d && d < big_r
            });
            if !found {
                ancestor_ok = false;
                violations.push(Violation {
                    check: "ancestor in shell",
                    detail: format!("R = {big_r}: word {:?} at distance {}", tree.word(i), node.distance),
                });
            }
        }

        area_checks += 1;
        let area_ok = (n as f64) <= 5.0 * big_r.exp();
        if !area_ok {
            violations.push(Violation {
                check: "area bound",
                detail: format!("T = {big_r}: N = {n} > 5e^T"),
            });
        }

        let raw_rate = (n as f64).ln() / big_r;
        certified = certified.min(((n as f64).ln() + correction) / big_r);
        rows.push(CountingRow {
            radius: big_r,
            n,
            shell,
            raw_rate,
            certified_upper: certified,
            submult_ok,
            sandwich_ok,
            ancestor_ok,
            area_ok,
        });
    }

    Ok(CountingReport {
        ell,
        c_ell: hex.c_ell,
        r_max,
        step,
        rows,
        submult_checks,
        sandwich_checks,
        ancestor_checks,
        area_checks,
        violations,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DeltaEstimate {
    pub ell: f64,
    pub r_max: f64,
    /// `log N_ℓ(R_max) / R_max`.
    pub raw_rate: f64,
    /// `min_R (log N_ℓ(R) + log(20/3) + 8C_ℓ + ℓ) / R` over sampled `R ≤ R_max`.
    pub certified_upper: f64,
    pub argmin_radius: f64,
    pub count: u64,
}

/// Sampling step for the certified upper bound.
const DELTA_SAMPLE_STEP: f64 = 0.25;

/// Brackets the critical exponent between the observed growth rate and the
/// Fekete-infimum upper bound.
pub fn delta_estimate(ell: f64, r_max: f64) -> Result<DeltaEstimate> {
    let hex = build_hexagon(ell)?;
    check_radius(r_max)?;
    if r_max < 4.0 * hex.c_ell {
        return Err(Error::Estimation(format!(
            "R_max = {r_max} covers fewer than two shells of width 2C_ℓ = {}",
            2.0 * hex.c_ell
        )));
    }
    let profile = LatticeProfile::build(&hex, r_max)?;
    let correction = growth_correction(&hex);
    let count = profile.count_within(r_max)?;
    let raw_rate = (count as f64).ln() / r_max;
    let mut samples = radius_grid(r_max, DELTA_SAMPLE_STEP);
    samples.retain(|&r| r > 0.0);
    samples.push(r_max);
    let mut certified_upper = f64::INFINITY;
    let mut argmin_radius = r_max;
    for r in samples {
        let value = ((profile.count_within(r)? as f64).ln() + correction) / r;
        if value < certified_upper {
            certified_upper = value;
            argmin_radius = r;
        }
    }
    Ok(DeltaEstimate {
        ell,
        r_max,
        raw_rate,
        certified_upper,
        argmin_radius,
        count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_radius_counts_root() {
        for ell in [2.0, 6.0, 12.0] {
            let hex = build_hexagon(ell).unwrap();
            assert_eq!(enumerate_ball(&hex, 0.0).unwrap().count, 1);
        }
    }

    #[test]
    fn first_shell_has_four_points() {
        let hex = build_hexagon(6.0).unwrap();
        let r = 2.0 * hex.c_ell;
        assert_eq!(enumerate_ball(&hex, r + 1e-9).unwrap().count, 4);
        assert_eq!(enumerate_ball(&hex, r - 1e-9).unwrap().count, 1);
    }

    #[test]
    fn tree_path_lower_bound() {
        for ell in [2.0, 4.0, 6.0] {
            let hex = build_hexagon(ell).unwrap();
            for r in [1.0, 3.5, 6.0, 9.0] {
                let k = (r / (2.0 * hex.c_ell)).floor() as u32;
                let bound = 3 * 2u64.pow(k) - 2;
                assert!(enumerate_ball(&hex, r).unwrap().count >= bound);
            }
        }
    }

    #[test]
    fn pruned_matches_reference() {
        for ell in [2.0, 4.0, 6.0] {
            let hex = build_hexagon(ell).unwrap();
            for r in [0.5, 2.3, 4.7, 6.1] {
                let pruned = enumerate_ball(&hex, r).unwrap().count;
                assert_eq!(pruned, reference::brute_force_count(&hex, r), "ell {ell} R {r}");
            }
        }
    }

    #[test]
    fn tree_and_compact_walk_agree() {
        let hex = build_hexagon(4.0).unwrap();
        let tree = enumerate_tree(&hex, 7.0, DEFAULT_NODE_BUDGET).unwrap();
        let census = enumerate_ball(&hex, 7.0).unwrap();
        assert_eq!(tree.points_within(7.0).count() as u64, census.count);
        assert_eq!(tree.nodes.len() as u64, census.nodes_expanded);
    }

    #[test]
    fn tree_node_invariants() {
        let hex = build_hexagon(3.0).unwrap();
        let tree = enumerate_tree(&hex, 6.0, DEFAULT_NODE_BUDGET).unwrap();
        let mut last_key = 0.0;
        for node in &tree.nodes[1..] {
            let parent = &tree.nodes[node.parent.unwrap()];
            assert_ne!(node.word_last, parent.word_last);
            assert!(node.side_distance + 1e-12 >= parent.side_distance);
            assert!(node.distance + 1e-9 >= node.side_distance);
            assert!((distance(&node.point, &parent.point) - 2.0 * hex.c_ell).abs() < 1e-8);
            assert!(node.side_distance + 1e-12 >= last_key, "stream not in key order");
            last_key = node.side_distance;
            assert!(node.isometry.lorentz_defect() < 1e-7);
        }
    }

    #[test]
    fn orbit_points_are_distinct() {
        let hex = build_hexagon(2.0).unwrap();
        let tree = enumerate_tree(&hex, 7.0, DEFAULT_NODE_BUDGET).unwrap();
        let mut seen = std::collections::HashSet::new();
        for n in &tree.nodes {
            let c = n.point.coords();
            let key = (
                (c[1] / c[0] * 1e9).round() as i64,
                (c[2] / c[0] * 1e9).round() as i64,
            );
            assert!(seen.insert(key), "duplicate orbit point");
        }
    }

    #[test]
    fn monotone_in_radius() {
        let hex = build_hexagon(5.0).unwrap();
        let profile = LatticeProfile::build(&hex, 9.0).unwrap();
        let mut last = 0;
        for k in 0..=90 {
            let n = profile.count_within(k as f64 * 0.1).unwrap();
            assert!(n >= last);
            last = n;
        }
        assert_eq!(profile.count_within(-1.0).unwrap(), 0);
        assert_eq!(
            profile.count_within(9.0).unwrap(),
            enumerate_ball(&hex, 9.0).unwrap().count
        );
    }

    #[test]
    fn shell_conventions() {
        let hex = build_hexagon(6.0).unwrap();
        let two_c = 2.0 * hex.c_ell;
        // just past the first shell: the three neighbours; root excluded
        // since R − 2C_ℓ > 0
        let census = enumerate_ball(&hex, two_c + 1e-6).unwrap();
        assert_eq!(census.shell_count, 3);
        // inside (0, 2C]: root belongs to the shell
        assert_eq!(shell_census(&hex, 0.5 * two_c).unwrap(), 1);
        assert_eq!(shell_census(&hex, two_c - 1e-9).unwrap(), 1);
    }

    #[test]
    fn radius_limits() {
        let hex = build_hexagon(6.0).unwrap();
        assert!(matches!(enumerate_ball(&hex, 30.5), Err(Error::OutOfRange { .. })));
        assert!(matches!(enumerate_ball(&hex, -1.0), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn budget_reports_partial_census() {
        let hex = build_hexagon(6.0).unwrap();
        match enumerate_ball_with_budget(&hex, 12.0, 500) {
            Err(Error::BudgetExhausted { budget, partial }) => {
                assert_eq!(budget, 500);
                assert!(partial.count > 0 && partial.count <= 500);
            }
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn counting_bounds_hold_small_grid() {
        let report = verify_counting_bounds(6.0, 8.0, 0.5).unwrap();
        assert!(report.all_hold(), "{:?}", report.violations);
        assert!(report.ancestor_checks > 0 && report.submult_checks > 0);
    }

    #[test]
    fn area_bound_at_first_shell() {
        let hex = build_hexagon(6.0).unwrap();
        let t = 2.0 * hex.c_ell + 1e-9;
        let n = enumerate_ball(&hex, t).unwrap().count;
        assert_eq!(n, 4);
        assert!((n as f64) <= 5.0 * t.exp());
        // R = r = 0
        assert!(1.0 <= submultiplicative_constant(&hex));
    }

    #[test]
    fn descendant_count_is_two_thirds_of_punctured_ball() {
        let hex = build_hexagon(5.0).unwrap();
        let profile = LatticeProfile::build(&hex, 8.0).unwrap();
        for r in [1.3, 3.1, 5.2] {
            let n_open = profile.count_below(r).unwrap();
            for g in 0..3 {
                let b = descendant_ball_count(&hex, g, r).unwrap();
                assert_eq!(3 * b, 2 * n_open + 1, "r = {r}");
            }
        }
    }

    #[test]
    fn delta_bracket() {
        let est = delta_estimate(6.0, 10.0).unwrap();
        assert!(est.raw_rate <= est.certified_upper);
        assert!(matches!(delta_estimate(6.0, 1.0), Err(Error::Estimation(_))));
    }
}
