use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::grid::Grid;

#[derive(Clone, Copy, PartialEq)]
struct Entry {
    dist: f64,
    node: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

const STEPS: [(i64, i64); 8] = [
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (1, 1),
    (1, -1),
    (-1, 1),
    (-1, -1),
];

/// Graph distance from `sources` over the 8-neighbour graph of region
/// nodes, with edge weight `(λ_a + λ_b)/2 · |edge|`. Nodes farther than
/// `cutoff` (or unreachable) get `+∞`.
pub fn geodesic_distance(grid: &Grid, sources: &[usize], cutoff: f64) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; grid.len()];
    let mut heap = BinaryHeap::new();
    for &s in sources {
        if grid.in_region[s] {
            dist[s] = 0.0;
            heap.push(Entry { dist: 0.0, node: s });
        }
    }
    let h = grid.spacing;
    let (nu, nv) = (grid.nu as i64, grid.nv as i64);
    while let Some(Entry { dist: d, node }) = heap.pop() {
        if d > dist[node] {
            continue;
        }
        let (i, j) = grid.ij(node);
        for (di, dj) in STEPS {
            let (ni, nj) = (i as i64 + di, j as i64 + dj);
            if ni < 0 || nj < 0 || ni >= nu || nj >= nv {
                continue;
            }
            let m = grid.node(ni as usize, nj as usize);
            if !grid.in_region[m] {
                continue;
            }
            let len = if di != 0 && dj != 0 {
                h * std::f64::consts::SQRT_2
            } else {
                h
            };
            let nd = d + 0.5 * (grid.lambda[node] + grid.lambda[m]) * len;
            if nd < dist[m] && nd <= cutoff {
                dist[m] = nd;
                heap.push(Entry { dist: nd, node: m });
            }
        }
    }
    dist
}

/// Whether `node` is a region node with a grid-edge position or a
/// non-region 8-neighbour.
pub(crate) fn touches_boundary(grid: &Grid, node: usize) -> bool {
    if grid.on_edge(node) {
        return true;
    }
    let (i, j) = grid.ij(node);
    STEPS.iter().any(|&(di, dj)| {
        let m = grid.node((i as i64 + di) as usize, (j as i64 + dj) as usize);
        !grid.in_region[m]
    })
}
