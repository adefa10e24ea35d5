//! Natural visibility graphs.
//!
//! Samples `a < b` are joined when every intermediate sample `c` lies
//! strictly below the straight line from `(t_a, y_a)` to `(t_b, y_b)`:
//!
//! ```text
//! y_c < y_b + (y_a - y_b) * (t_b - t_c) / (t_b - t_a)
//! ```
//!
//! The inequality is strict, so a collinear intermediate blocks the pair.
//! No tolerance is applied; coarsely quantized inputs produce sparse graphs.

use crate::adjacency::{AdjacencyMatrix, MatrixKind};
use crate::series::TimeSeries;

/// Definition-literal construction: every pair, every intermediate.
///
/// O(n^3) in the worst case. This is the reference the fast constructor is
/// tested against.
pub fn build_vg_oracle(series: &TimeSeries) -> AdjacencyMatrix {
    let y = series.samples();
    let n = y.len();
    let t = series.times();
    let mut adj = AdjacencyMatrix::zeros(n, MatrixKind::Binary);
    for a in 0..n {
        for b in a + 1..n {
            let visible =
                (a + 1..b).all(|c| y[c] < y[b] + (y[a] - y[b]) * (t[b] - t[c]) / (t[b] - t[a]));
            if visible {
                adj.set_symmetric(a, b, 1.0);
            }
        }
    }
    adj
}

/// Divide-and-conquer construction, identical in output to
/// [`build_vg_oracle`].
///
/// No edge can cross the maximum of a range, so the maximum is linked to
/// the samples it sees on either side and the two sides are solved
/// independently. Ties for the maximum go to the lowest index. Average
/// cost is O(n log n); a monotone series degrades to O(n^2).
pub fn build_vg_fast(series: &TimeSeries) -> AdjacencyMatrix {
    let y = series.samples();
    let n = y.len();
    let t = series.times();
    let mut adj = AdjacencyMatrix::zeros(n, MatrixKind::Binary);
    link_visible(y, &t, |a, b| adj.set_symmetric(a, b, 1.0));
    adj
}

/// Edges `(a, b)` with `a < b` of the visibility graph, in construction
/// order. Same graph as [`build_vg_fast`] without the dense matrix.
pub fn visible_edges(series: &TimeSeries) -> Vec<(usize, usize)> {
    let t = series.times();
    let mut edges = Vec::with_capacity(4 * series.len());
    link_visible(series.samples(), &t, |a, b| edges.push((a, b)));
    edges
}

#[inline(always)]
fn clears(y: &[f64], t: &[f64], a: usize, b: usize, c: usize) -> bool {
    y[c] < y[b] + (y[a] - y[b]) * (t[b] - t[c]) / (t[b] - t[a])
}

fn link_visible(y: &[f64], t: &[f64], mut link: impl FnMut(usize, usize)) {
    // Half-open ranges still to be solved.
    let mut pending = vec![(0usize, y.len())];
    while let Some((lo, hi)) = pending.pop() {
        if hi - lo < 2 {
            continue;
        }
        let mut top = lo;
        for i in lo + 1..hi {
            if y[i] > y[top] {
                top = i;
            }
        }

        // Walking away from the top, `horizon` is the sample with the
        // steepest sight line seen so far; a new sample is visible iff it
        // clears the horizon, and then it becomes the horizon.
        let mut horizon: Option<usize> = None;
        for a in (lo..top).rev() {
            if horizon.is_none_or(|c| clears(y, t, a, top, c)) {
                link(a, top);
                horizon = Some(a);
            }
        }
        horizon = None;
        for b in top + 1..hi {
            if horizon.is_none_or(|c| clears(y, t, top, b, c)) {
                link(top, b);
                horizon = Some(b);
            }
        }

        pending.push((lo, top));
        pending.push((top + 1, hi));
    }
}

/// Visibility graph weighted by the absolute slope `|dy/dt|` of each edge,
/// in signal units per second. Non-edges are 0, and so are edges joining
/// equal samples.
pub fn build_vg_slope_weighted(series: &TimeSeries) -> AdjacencyMatrix {
    slope_weights(series, &build_vg_fast(series))
}

/// Re-weights an existing binary visibility graph of `series` by slope.
pub(crate) fn slope_weights(series: &TimeSeries, binary: &AdjacencyMatrix) -> AdjacencyMatrix {
    debug_assert_eq!(binary.kind(), MatrixKind::Binary);
    let y = series.samples();
    let n = y.len();
    let mut out = AdjacencyMatrix::zeros(n, MatrixKind::SlopeWeighted);
    for i in 0..n {
        for (j, e) in binary.row(i).iter().enumerate().skip(i + 1) {
            if *e != 0.0 {
                out.set_symmetric(i, j, slope(series, i, j));
            }
        }
    }
    out
}

#[inline]
pub(crate) fn slope(series: &TimeSeries, i: usize, j: usize) -> f64 {
    let y = series.samples();
    ((y[j] - y[i]) / (series.time(j) - series.time(i))).abs()
}
