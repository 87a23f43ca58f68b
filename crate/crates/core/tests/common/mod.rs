//! Independent oracles shared by the integration and acceptance tests.

#![allow(dead_code)]

use std::collections::HashMap;

use nalgebra::{Matrix3, Vector3};

use hypdiam_core::graph::{all_matchings, PantsGraph};
use hypdiam_core::hexagon::HexagonGeometry;

/// `t` from `cosh t = cosh(ℓ/2) / (cosh(ℓ/2) − 1)`.
pub fn short_side_oracle(ell: f64) -> f64 {
    let ch = (ell / 2.0).cosh();
    (ch / (ch - 1.0)).acosh()
}

fn orientation(c: &Vector3<f64>, a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    Matrix3::from_columns(&[*c, *a, *b]).determinant()
}

/// Tangent direction at `c` towards `m` on the hyperboloid.
fn tangent(c: &Vector3<f64>, m: &Vector3<f64>) -> Vector3<f64> {
    let pairing = c[0] * m[0] - c[1] * m[1] - c[2] * m[2];
    m - c * pairing
}

/// First-hit distances from the midpoint of `source` to every vertex, by
/// enumerating all reduced reflection words of length `≤ depth`.
///
/// Cuff labels are placed geometrically: a copy entered through half-edge
/// `h` gets `h` on the entry side, and `h + 1`, `h + 2` on the next two long
/// sides counterclockwise from it.
pub fn brute_force_first_hit(graph: &PantsGraph, hex: &HexagonGeometry, source: usize, depth: u32) -> Vec<Option<f64>> {
    let mats: Vec<Matrix3<f64>> = hex.reflections.iter().map(|r| *r.matrix()).collect();
    let o = Vector3::new(1.0, 0.0, 0.0);
    let mids: Vec<Vector3<f64>> = (0..3).map(|j| *hex.s_side(j).midpoint().coords()).collect();

    let mut best: Vec<Option<f64>> = vec![None; graph.num_vertices()];
    best[source] = Some(0.0);
    // (matrix, vertex, label of each long side, last reflection)
    let mut level = vec![(Matrix3::identity(), source, [0usize, 1, 2], None::<usize>)];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(level.len() * 2);
        for (g, v, labels, last) in &level {
            for j in 0..3 {
                if *last == Some(j) {
                    continue;
                }
                let landing = graph.partner(3 * v + labels[j]);
                let h = g * mats[j];
                let c = h * o;
                let u: Vec<Vector3<f64>> = mids.iter().map(|m| tangent(&c, &(h * m))).collect();
                let (a, b) = ((j + 1) % 3, (j + 2) % 3);
                let (first, second) = if orientation(&c, &u[j], &u[a]) > 0.0 { (a, b) } else { (b, a) };
                let mut child = [0usize; 3];
                child[j] = landing % 3;
                child[first] = (landing + 1) % 3;
                child[second] = (landing + 2) % 3;
                let w = landing / 3;
                let d = c[0].max(1.0).acosh();
                if best[w].is_none_or(|b| d < b) {
                    best[w] = Some(d);
                }
                next.push((h, w, child, Some(j)));
            }
        }
        level = next;
    }
    best
}

/// Probability of each canonical adjacency class under the uniform matching,
/// by enumerating every matching.
pub fn exact_class_probabilities(genus: u64) -> HashMap<Vec<u8>, f64> {
    let all = all_matchings(6 * genus as usize - 6);
    let total = all.len() as f64;
    let mut out: HashMap<Vec<u8>, f64> = HashMap::new();
    for m in all {
        let class = PantsGraph::from_matching(genus, m).unwrap().canonical_adjacency().unwrap();
        *out.entry(class).or_default() += 1.0 / total;
    }
    out
}

/// `d(o, w·o)` for every reduced reflection word of length `≤ depth`,
/// grouped by word length.
pub fn orbit_distances_by_length(hex: &HexagonGeometry, depth: u32) -> Vec<Vec<f64>> {
    let mats: Vec<Matrix3<f64>> = hex.reflections.iter().map(|r| *r.matrix()).collect();
    let mut out = vec![vec![0.0]];
    let mut level = vec![(Matrix3::<f64>::identity(), None::<usize>)];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(level.len() * 2);
        for (g, last) in &level {
            for j in (0..3).filter(|&j| *last != Some(j)) {
                next.push((g * mats[j], Some(j)));
            }
        }
        out.push(next.iter().map(|(g, _)| g[(0, 0)].max(1.0).acosh()).collect());
        level = next;
    }
    out
}

/// Orbit points within `radius`, deepening until the last two word lengths
/// contribute nothing.
pub fn brute_force_ball_count(hex: &HexagonGeometry, radius: f64) -> u64 {
    let mut depth = 6;
    loop {
        let levels = orbit_distances_by_length(hex, depth);
        let hits: Vec<u64> = levels
            .iter()
            .map(|l| l.iter().filter(|&&d| d <= radius).count() as u64)
            .collect();
        if hits[hits.len() - 1] == 0 && hits[hits.len() - 2] == 0 {
            return hits.iter().sum();
        }
        depth += 2;
    }
}
