//! Closed surfaces glued from pants along a cubic graph, and distances
//! between pants midpoints computed in the covering tree of pants.
//!
//! Each pants is two copies of the hexagon glued along the short sides, and
//! its three cuffs are the doubled long sides. Gluing with zero twist makes
//! the front hexagons of all pants tile a surface with boundary whose
//! universal cover is the reflection-orbit tree of the base hexagon. A node
//! `g` of that tree covers some vertex `u` of the graph; its frame records
//! which local half-edge of `u` sits on each long side label of `g·H`.
//!
//! Frames are oriented so that increasing local index runs counterclockwise
//! in the plane. Crossing long side `a` of a node with frame `σ` through
//! half-edge `3u + σ(a)` lands on half-edge `3u' + b`, and the child frame is
//! `σ'(j) = σ(a) + b − σ(j) (mod 3)`; in particular `σ'(a) = b`.

use nalgebra::Vector3;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{is_connected, PantsGraph};
use crate::hexagon::{build_hexagon, pants_radius, HexagonGeometry};
use crate::hyp::acosh_clamped;
use crate::lattice::{enumerate_tree, origin_vec, OrbitKernel, TreeNode, MAX_RADIUS};

/// Default per-source node budget of the fast oracle.
pub const DEFAULT_WALK_BUDGET: u64 = 2_000_000_000;

/// Side label to local half-edge index.
pub type Frame = [u8; 3];

pub const ROOT_FRAME: Frame = [0, 1, 2];

#[inline]
pub fn child_frame(frame: &Frame, side: u8, landing: u8) -> Frame {
    let pivot = frame[side as usize] + landing + 3;
    std::array::from_fn(|j| (pivot - frame[j]) % 3)
}

/// `max(1, 4·log log g)`, with `1` wherever the formula is undefined.
pub fn auto_ell(genus: u64) -> f64 {
    let lg = (genus as f64).ln();
    if lg <= 1.0 {
        return 1.0;
    }
    (4.0 * lg.ln()).max(1.0)
}

/// `log g + 25·log log g` (only meaningful for `g ≥ 3`).
pub fn theorem_budget(genus: u64) -> f64 {
    let lg = (genus as f64).ln();
    lg + 25.0 * lg.ln()
}

/// `log g + 25·log log g + 8`, clamped to `[8, 30]`.
pub fn default_rcap(genus: u64) -> f64 {
    let lg = (genus as f64).ln();
    let raw = if lg > 1.0 { lg + 25.0 * lg.ln() + 8.0 } else { 8.0 };
    raw.clamp(8.0, MAX_RADIUS)
}

/// `arccosh(1 / (√3·tan(π/(12g − 6))))`, the universal lower bound on the
/// diameter of a closed genus-`g` hyperbolic surface.
pub fn bavard_bound(genus: u64) -> f64 {
    let angle = std::f64::consts::PI / (12.0 * genus as f64 - 6.0);
    (1.0 / (3f64.sqrt() * angle.tan())).acosh()
}

/// Area of a disk of radius `d` divided by the area `4π(g − 1)` of the surface.
pub fn thickness_upper_bound(genus: u64, d: f64) -> f64 {
    (d.cosh() - 1.0) / (2.0 * (genus as f64 - 1.0))
}

#[derive(Debug, Clone)]
pub struct Surface {
    graph: PantsGraph,
    hex: HexagonGeometry,
    kernel: OrbitKernel,
}

impl Surface {
    pub fn graph(&self) -> &PantsGraph {
        &self.graph
    }

    pub fn hex(&self) -> &HexagonGeometry {
        &self.hex
    }

    pub fn kernel(&self) -> &OrbitKernel {
        &self.kernel
    }

    pub fn genus(&self) -> u64 {
        self.graph.genus()
    }

    pub fn num_vertices(&self) -> usize {
        self.graph.num_vertices()
    }

    /// Vertex and frame reached by crossing side `side` of a node covering
    /// `vertex` with frame `frame`; also returns the landing half-edge.
    #[inline]
    pub fn cross(&self, vertex: usize, frame: &Frame, side: u8) -> (usize, Frame, usize) {
        let landing = self.graph.partner(3 * vertex + frame[side as usize] as usize);
        let next = child_frame(frame, side, (landing % 3) as u8);
        (landing / 3, next, landing)
    }
}

pub fn assemble_surface(graph: PantsGraph, ell: f64) -> Result<Surface> {
    let hex = build_hexagon(ell)?;
    let vertices = graph.num_vertices() as i64;
    let edges = graph.num_edges() as i64;
    let genus = graph.genus() as i64;
    if vertices - edges != 1 - genus {
        return Err(Error::Consistency(format!(
            "Euler count V − E = {} does not match 1 − g = {}",
            vertices - edges,
            1 - genus
        )));
    }
    let kernel = OrbitKernel::new(&hex);
    Ok(Surface { graph, hex, kernel })
}

/// A node of the orbit tree together with the graph vertex it covers.
#[derive(Debug, Clone)]
pub struct CoverWalkNode {
    pub node: TreeNode,
    pub covered_vertex: usize,
    /// Half-edge of `covered_vertex` through which the walk entered (`None` at the root).
    pub entry_half_edge: Option<usize>,
    pub frame: Frame,
}

/// Every node whose separating side is within `radius`, with full
/// isometries, in side-distance order. Meant for checks and small radii.
pub fn cover_walk(surface: &Surface, root: usize, radius: f64, budget: u64) -> Result<Vec<CoverWalkNode>> {
    check_vertex(surface, root)?;
    let tree = enumerate_tree(&surface.hex, radius, budget)?;
    let mut out: Vec<CoverWalkNode> = Vec::with_capacity(tree.nodes.len());
    for node in tree.nodes {
        let walk = match (node.parent, node.word_last) {
            (Some(p), Some(side)) => {
                let parent = &out[p];
                let (vertex, frame, landing) = surface.cross(parent.covered_vertex, &parent.frame, side);
                CoverWalkNode {
                    node,
                    covered_vertex: vertex,
                    entry_half_edge: Some(landing),
                    frame,
                }
            }
            _ => CoverWalkNode {
                node,
                covered_vertex: root,
                entry_half_edge: None,
                frame: ROOT_FRAME,
            },
        };
        out.push(walk);
    }
    Ok(out)
}

fn check_vertex(surface: &Surface, v: usize) -> Result<()> {
    if v >= surface.num_vertices() {
        return Err(Error::InvalidInput(format!(
            "vertex {v} out of range (surface has {})",
            surface.num_vertices()
        )));
    }
    Ok(())
}

fn check_cap(rcap: f64) -> Result<()> {
    if !(rcap >= 0.0) {
        return Err(Error::InvalidInput(format!("radius cap must be nonnegative, got {rcap}")));
    }
    if rcap > MAX_RADIUS {
        return Err(Error::OutOfRange {
            what: "radius cap",
            value: rcap,
            max: MAX_RADIUS,
        });
    }
    Ok(())
}

/// First-hit midpoint distances from one source.
#[derive(Debug, Clone, Serialize)]
pub struct MidpointDistances {
    pub source: usize,
    pub radius_cap: f64,
    /// `min d(o, x)` over lifts `x` of each vertex's midpoint within the cap.
    pub distances: Vec<Option<f64>>,
    pub nodes_expanded: u64,
}

impl MidpointDistances {
    pub fn unreached(&self) -> usize {
        self.distances.iter().filter(|d| d.is_none()).count()
    }

    /// Largest distance, if every vertex was reached.
    pub fn eccentricity(&self) -> Option<f64> {
        self.distances
            .iter()
            .try_fold(0.0f64, |acc, d| d.map(|d| acc.max(d)))
    }
}

pub fn midpoint_distances_from(surface: &Surface, v: usize, rcap: f64) -> Result<MidpointDistances> {
    midpoint_distances_with_budget(surface, v, rcap, DEFAULT_WALK_BUDGET)
}

/// Depth-first walk over every node whose separating side lies within the
/// cap. Each subtree beyond a side stays beyond it, so the walk sees exactly
/// the lifts within the cap and the visiting order does not matter.
pub fn midpoint_distances_with_budget(
    surface: &Surface,
    v: usize,
    rcap: f64,
    budget: u64,
) -> Result<MidpointDistances> {
    check_vertex(surface, v)?;
    check_cap(rcap)?;
    let cosh_cap = rcap.cosh();
    let kernel = &surface.kernel;
    let mut best = vec![f64::INFINITY; surface.num_vertices()];
    best[v] = 1.0;
    let mut expanded = 1u64;
    let mut stack: Vec<(Vector3<f64>, u32, Frame, u8)> = Vec::new();
    let root = origin_vec();
    for side in 0..3u8 {
        if kernel.side_cosh(side as usize, &root) <= cosh_cap {
            let (u, frame, _) = surface.cross(v, &ROOT_FRAME, side);
            stack.push((kernel.reflect(side as usize, &root), u as u32, frame, side));
        }
    }
    while let Some((q, u, frame, last)) = stack.pop() {
        if expanded >= budget {
            return Err(Error::WalkBudget { budget });
        }
        expanded += 1;
        let slot = &mut best[u as usize];
        if q[0] < *slot {
            *slot = q[0];
        }
        for side in 0..3u8 {
            if side == last || kernel.side_cosh(side as usize, &q) > cosh_cap {
                continue;
            }
            let (w, next, _) = surface.cross(u as usize, &frame, side);
            stack.push((kernel.reflect(side as usize, &q), w as u32, next, side));
        }
    }
    let distances = best
        .into_iter()
        .map(|c| (c <= cosh_cap).then(|| acosh_clamped(c)))
        .collect();
    Ok(MidpointDistances {
        source: v,
        radius_cap: rcap,
        distances,
        nodes_expanded: expanded,
    })
}

/// Bounds on one vertex's eccentricity; equal when computed exactly.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Eccentricity {
    pub lower: f64,
    pub upper: f64,
}

impl Eccentricity {
    pub fn is_exact(&self) -> bool {
        self.lower == self.upper
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DiameterReport {
    pub genus: u64,
    pub ell: f64,
    /// Largest first-hit distance over ordered vertex pairs.
    pub midpoint_diameter: f64,
    pub padded_diameter: f64,
    pub bavard: f64,
    pub theorem_budget: f64,
    /// Cap in force when the report completed.
    pub radius_cap: f64,
    pub sources_walked: usize,
    pub nodes_expanded: u64,
    pub eccentricities: Vec<Eccentricity>,
}

#[derive(Debug, Clone, Copy)]
pub struct DiameterOptions {
    /// Radius cap; `None` means [`default_rcap`].
    pub rcap: Option<f64>,
    /// Cap doublings (clamped to the supported radius) before giving up.
    pub retries: u32,
    pub node_budget: u64,
    /// Walk from every vertex instead of stopping once the bounds settle.
    pub exhaustive: bool,
}

impl Default for DiameterOptions {
    fn default() -> Self {
        DiameterOptions {
            rcap: None,
            retries: 2,
            node_budget: DEFAULT_WALK_BUDGET,
            exhaustive: false,
        }
    }
}

pub fn diameter_estimate(surface: &Surface, rcap: f64) -> Result<DiameterReport> {
    diameter_estimate_with(
        surface,
        &DiameterOptions {
            rcap: Some(rcap),
            ..DiameterOptions::default()
        },
    )
}

/// Radius increment between walks from one source.
const RADIUS_STEP: f64 = 0.5;

/// Midpoint diameter from per-source walks.
///
/// The first-hit distance is a metric on the vertices (it is the minimum of
/// `d(o, g·o)` over group elements, and the symmetries of the hexagon make
/// the frame at any node irrelevant), so a walk from `x` bounds every other
/// eccentricity by `ecc(x) ± d(x, v)`. Sources are taken alternately by
/// largest upper and smallest lower bound, and the loop stops once no
/// unwalked vertex can beat the largest eccentricity found.
pub fn diameter_estimate_with(surface: &Surface, opts: &DiameterOptions) -> Result<DiameterReport> {
    if !is_connected(&surface.graph) {
        return Err(Error::Disconnected);
    }
    let mut cap = opts.rcap.unwrap_or_else(|| default_rcap(surface.genus()));
    check_cap(cap)?;
    let n = surface.num_vertices();
    let mut lower = vec![0.0f64; n];
    let mut upper = vec![f64::INFINITY; n];
    let mut walked = vec![false; n];
    let mut diameter = 0.0f64;
    let mut nodes = 0u64;
    let mut sources = 0usize;
    let mut retries_left = opts.retries;
    let mut pick_upper = true;
    let mut next = Some(0usize);

    while let Some(x) = next {
        let mut radius = if sources == 0 {
            (4.0 * surface.hex.c_ell).min(cap)
        } else {
            diameter.max(lower[x]).min(cap)
        };
        let walk = loop {
            let walk = midpoint_distances_with_budget(surface, x, radius, opts.node_budget)?;
            nodes += walk.nodes_expanded;
            if walk.unreached() == 0 {
                break walk;
            }
            if radius < cap {
                radius = (radius + RADIUS_STEP).min(cap);
            } else if retries_left > 0 && cap < MAX_RADIUS {
                retries_left -= 1;
                cap = (2.0 * cap).min(MAX_RADIUS);
                radius = (radius + RADIUS_STEP).min(cap);
            } else {
                let eccentricities = (0..n)
                    .map(|v| walked[v].then_some(lower[v]))
                    .collect();
                return Err(Error::Incomplete {
                    unreached: walk.unreached(),
                    radius_cap: cap,
                    eccentricities,
                });
            }
        };
        sources += 1;
        let dist: Vec<f64> = walk.distances.iter().map(|d| d.expect("all reached")).collect();
        let ecc = dist.iter().copied().fold(0.0, f64::max);
        diameter = diameter.max(ecc);
        walked[x] = true;
        lower[x] = ecc;
        upper[x] = ecc;
        for v in 0..n {
            if !walked[v] {
                upper[v] = upper[v].min(ecc + dist[v]);
                lower[v] = lower[v].max(dist[v]).max(ecc - dist[v]);
            }
        }

        let candidates = (0..n).filter(|&v| !walked[v] && (opts.exhaustive || upper[v] > diameter));
        next = if pick_upper {
            candidates.max_by(|&a, &b| upper[a].total_cmp(&upper[b]).then(b.cmp(&a)))
        } else {
            candidates.min_by(|&a, &b| lower[a].total_cmp(&lower[b]).then(a.cmp(&b)))
        };
        pick_upper = !pick_upper;
    }

    let eccentricities = (0..n)
        .map(|v| Eccentricity {
            lower: lower[v],
            upper: upper[v].min(diameter),
        })
        .collect();
    Ok(DiameterReport {
        genus: surface.genus(),
        ell: surface.hex.ell,
        midpoint_diameter: diameter,
        padded_diameter: diameter + 2.0 * pants_radius(&surface.hex),
        bavard: bavard_bound(surface.genus()),
        theorem_budget: theorem_budget(surface.genus()),
        radius_cap: cap,
        sources_walked: sources,
        nodes_expanded: nodes,
        eccentricities,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::sample_configuration_model;
    use crate::lattice::{enumerate_ball, DEFAULT_NODE_BUDGET};

    #[test]
    fn child_frame_is_a_permutation_sending_side_to_landing() {
        for a in 0..3u8 {
            for b in 0..3u8 {
                for frame in [[0, 1, 2], [1, 2, 0], [2, 1, 0], [0, 2, 1]] {
                    let next = child_frame(&frame, a, b);
                    assert_eq!(next[a as usize], b);
                    let mut sorted = next;
                    sorted.sort();
                    assert_eq!(sorted, [0, 1, 2]);
                }
            }
        }
    }

    #[test]
    fn triple_edge_distances() {
        for ell in [1.0, 2.0, 4.0, 6.0] {
            let s = assemble_surface(PantsGraph::triple_edge(), ell).unwrap();
            let d = midpoint_distances_from(&s, 0, 6.0).unwrap();
            assert_eq!(d.distances[0], Some(0.0));
            let c2 = 2.0 * s.hex().c_ell;
            assert!((d.distances[1].unwrap() - c2).abs() < 1e-12, "ell = {ell}");
            let report = diameter_estimate(&s, 6.0).unwrap();
            assert!((report.midpoint_diameter - c2).abs() < 1e-12);
        }
    }

    #[test]
    fn loop_keeps_source_at_zero() {
        // vertex 0 has a loop on half-edges 0 and 1
        let g = PantsGraph::from_matching(2, vec![1, 0, 5, 4, 3, 2]).unwrap();
        let s = assemble_surface(g, 2.0).unwrap();
        let d = midpoint_distances_from(&s, 0, 4.0).unwrap();
        assert_eq!(d.distances[0], Some(0.0));
        let walk = cover_walk(&s, 0, 3.0 * s.hex().c_ell, DEFAULT_NODE_BUDGET).unwrap();
        let first_shell: Vec<_> = walk.iter().filter(|w| w.node.depth == 1).collect();
        let own = first_shell.iter().filter(|w| w.covered_vertex == 0).count();
        assert_eq!(own, 2);
        for w in first_shell {
            assert!((w.node.distance - 2.0 * s.hex().c_ell).abs() < 1e-12);
        }
    }

    #[test]
    fn lift_count_matches_lattice() {
        let g = sample_configuration_model(6, 4).unwrap();
        let s = assemble_surface(g, 3.0).unwrap();
        let r = 7.0;
        let walk = cover_walk(&s, 2, r, DEFAULT_NODE_BUDGET).unwrap();
        let lifts = walk.iter().filter(|w| w.node.distance <= r).count() as u64;
        assert_eq!(lifts, enumerate_ball(s.hex(), r).unwrap().count);
    }

    #[test]
    fn walk_is_non_backtracking() {
        let g = sample_configuration_model(9, 1).unwrap();
        let s = assemble_surface(g, 2.0).unwrap();
        let walk = cover_walk(&s, 0, 6.0, DEFAULT_NODE_BUDGET).unwrap();
        for w in &walk {
            let Some(p) = w.node.parent else { continue };
            let parent = &walk[p];
            let exit = 3 * parent.covered_vertex + parent.frame[w.node.word_last.unwrap() as usize] as usize;
            assert_eq!(s.graph().partner(exit), w.entry_half_edge.unwrap());
            assert_eq!(w.covered_vertex, w.entry_half_edge.unwrap() / 3);
            if let Some(entry) = parent.entry_half_edge {
                assert_ne!(exit, entry);
            }
        }
    }

    #[test]
    fn fast_oracle_agrees_with_cover_walk() {
        for seed in 0..5 {
            let g = sample_configuration_model(5, seed).unwrap();
            let s = assemble_surface(g, 2.5).unwrap();
            let r = 6.5;
            let walk = cover_walk(&s, 1, r, DEFAULT_NODE_BUDGET).unwrap();
            let mut best = vec![None::<f64>; s.num_vertices()];
            for w in walk.iter().filter(|w| w.node.distance <= r) {
                let slot = &mut best[w.covered_vertex];
                *slot = Some(slot.map_or(w.node.distance, |b| b.min(w.node.distance)));
            }
            let fast = midpoint_distances_from(&s, 1, r).unwrap();
            for (a, b) in best.iter().zip(&fast.distances) {
                match (a, b) {
                    (Some(a), Some(b)) => assert!((a - b).abs() < 1e-9),
                    (None, None) => {}
                    _ => panic!("reachability differs: {a:?} vs {b:?}"),
                }
            }
        }
    }

    #[test]
    fn raising_cap_never_increases_distances() {
        let g = sample_configuration_model(12, 8).unwrap();
        let s = assemble_surface(g, 2.0).unwrap();
        let small = midpoint_distances_from(&s, 3, 5.0).unwrap();
        let large = midpoint_distances_from(&s, 3, 8.0).unwrap();
        for (a, b) in small.distances.iter().zip(&large.distances) {
            if let Some(a) = a {
                assert!(b.unwrap() <= *a + 1e-15);
            }
        }
    }

    #[test]
    fn bounded_search_matches_exhaustive() {
        for seed in 0..4 {
            let g = sample_configuration_model(20, seed).unwrap();
            if !is_connected(&g) {
                continue;
            }
            let s = assemble_surface(g, auto_ell(20)).unwrap();
            let quick = diameter_estimate(&s, 20.0).unwrap();
            let full = diameter_estimate_with(
                &s,
                &DiameterOptions {
                    rcap: Some(20.0),
                    exhaustive: true,
                    ..DiameterOptions::default()
                },
            )
            .unwrap();
            assert_eq!(quick.midpoint_diameter, full.midpoint_diameter);
            assert_eq!(full.sources_walked, s.num_vertices());
            assert!(full.eccentricities.iter().all(Eccentricity::is_exact));
            for (q, f) in quick.eccentricities.iter().zip(&full.eccentricities) {
                assert!(q.lower <= f.lower + 1e-12 && f.upper <= q.upper + 1e-12);
            }
        }
    }

    #[test]
    fn distances_are_symmetric() {
        let g = sample_configuration_model(10, 5).unwrap();
        let s = assemble_surface(g, 2.0).unwrap();
        let all: Vec<_> = (0..s.num_vertices())
            .map(|v| midpoint_distances_from(&s, v, 12.0).unwrap())
            .collect();
        for v in 0..s.num_vertices() {
            for w in 0..s.num_vertices() {
                let (a, b) = (all[v].distances[w].unwrap(), all[w].distances[v].unwrap());
                assert!((a - b).abs() < 1e-8, "{v} {w}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn disconnected_surface_is_rejected() {
        let mut m = vec![0u32; 12];
        for (a, b) in [(0usize, 3usize), (1, 4), (2, 5), (6, 9), (7, 10), (8, 11)] {
            m[a] = b as u32;
            m[b] = a as u32;
        }
        let s = assemble_surface(PantsGraph::from_matching(3, m).unwrap(), 2.0).unwrap();
        assert!(matches!(diameter_estimate(&s, 10.0), Err(Error::Disconnected)));
    }

    #[test]
    fn tiny_cap_reports_incomplete() {
        let g = sample_configuration_model(30, 2).unwrap();
        let s = assemble_surface(g, 2.0).unwrap();
        let opts = DiameterOptions {
            rcap: Some(1.0),
            retries: 0,
            ..DiameterOptions::default()
        };
        assert!(matches!(diameter_estimate_with(&s, &opts), Err(Error::Incomplete { .. })));
        let d = midpoint_distances_from(&s, 0, 1.0).unwrap();
        assert!(d.unreached() > 0);
        assert!(matches!(midpoint_distances_from(&s, 0, 31.0), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn bavard_values() {
        let b2 = (1.0 / (3f64.sqrt() * (std::f64::consts::PI / 18.0).tan())).acosh();
        assert!((bavard_bound(2) - b2).abs() < 1e-15);
        assert!((bavard_bound(2) - 1.855_077_135_319_087_4).abs() < 1e-12);
        let mut prev = bavard_bound(2);
        for g in 3..=10_000 {
            let b = bavard_bound(g);
            assert!(b > prev);
            prev = b;
        }
    }

    #[test]
    fn thickness_examples() {
        assert_eq!(thickness_upper_bound(10, 0.0), 0.0);
        let d = (1.0 + 2.0 * 9.0f64).acosh();
        assert!((thickness_upper_bound(10, d) - 1.0).abs() < 1e-12);
        let g = 1_000_000u64;
        let lg = (g as f64).ln();
        let ratio = thickness_upper_bound(g, theorem_budget(g)) / lg.powi(25);
        assert!(ratio < 1.0 && ratio > 0.2);
    }

    #[test]
    fn auto_ell_and_caps() {
        assert_eq!(auto_ell(2), 1.0);
        assert_eq!(auto_ell(3), 1.0);
        assert!(auto_ell(4) > 1.0);
        assert!((auto_ell(1024) - 7.744_288_689_649_525).abs() < 1e-12);
        assert_eq!(default_rcap(2), 8.0);
        assert_eq!(default_rcap(1 << 20), 30.0);
    }
}
