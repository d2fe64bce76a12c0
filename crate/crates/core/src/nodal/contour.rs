//! Marching squares: zero contours as line segments, and their components.

use super::{center_positive, positive, OffsetUnionFind};
use crate::error::{NodalError, Result};
use crate::grid::{Domain, ScalarGrid};
use crate::scalar::Real;

/// Zero-contour components of a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ContourComponents {
    /// Closed curves: inside the square without touching its boundary, or
    /// contractible on the torus.
    pub closed: u64,
    /// Curves ending on the square's boundary.
    pub boundary: u64,
    /// Non-contractible curves on the torus.
    pub wrapping: u64,
}

/// Edge of a cell, in the order bottom, right, top, left.
#[derive(Clone, Copy)]
enum Side {
    Bottom,
    Right,
    Top,
    Left,
}

/// For a cell with corner signs `s00, s10, s01, s11`, the pairs of crossed
/// sides joined by a contour piece.
fn cell_pairs(s00: bool, s10: bool, s01: bool, s11: bool, center: impl FnOnce() -> bool) -> ([(Side, Side); 2], usize) {
    use Side::*;
    let crossed = [(s00 != s10, Bottom), (s10 != s11, Right), (s01 != s11, Top), (s00 != s01, Left)];
    let mut sides = crossed.iter().filter(|c| c.0).map(|c| c.1);
    match crossed.iter().filter(|c| c.0).count() {
        2 => ([(sides.next().unwrap(), sides.next().unwrap()), (Bottom, Bottom)], 1),
        4 => {
            if center() == s00 {
                // 00 and 11 connected: curves cut off corners 10 and 01
                ([(Bottom, Right), (Top, Left)], 2)
            } else {
                ([(Bottom, Left), (Right, Top)], 2)
            }
        }
        _ => ([(Bottom, Bottom); 2], 0),
    }
}

/// Count zero-contour components, tracking boundary contact on squares and
/// winding on the torus.
pub fn contour_components<F: Real>(g: &ScalarGrid<F>) -> Result<ContourComponents> {
    let n = g.n;
    if n < 2 || g.values.len() != n * n {
        return Err(NodalError::EmptyGrid);
    }
    let periodic = matches!(g.domain, Domain::Torus { .. });
    let s: Vec<bool> = g.values.iter().map(|&v| positive(v)).collect();
    // horizontal edge (i, j) joins nodes (i, j), (i + 1, j); vertical joins (i, j), (i, j + 1)
    let hid = |i: usize, j: usize| j * n + i;
    let vid = |i: usize, j: usize| n * n + j * n + i;
    let mut uf = OffsetUnionFind::new(2 * n * n);
    let mut crossed = vec![false; 2 * n * n];
    let cells = if periodic { n } else { n - 1 };
    for j in 0..cells {
        for i in 0..cells {
            let (i1, j1) = ((i + 1) % n, (j + 1) % n);
            let (s00, s10, s01, s11) = (s[j * n + i], s[j * n + i1], s[j1 * n + i], s[j1 * n + i1]);
            let (pairs, m) = cell_pairs(s00, s10, s01, s11, || center_positive(g, i, j, i1, j1));
            // canonical edge id and its displacement (in periods) from this cell
            let edge = |side: Side| -> (usize, [i32; 2]) {
                match side {
                    Side::Bottom => (hid(i, j), [0, 0]),
                    Side::Left => (vid(i, j), [0, 0]),
                    Side::Top => (hid(i, j1), [0, (j1 == 0) as i32]),
                    Side::Right => (vid(i1, j), [(i1 == 0) as i32, 0]),
                }
            };
            for &(a, b) in &pairs[..m] {
                let (ea, da) = edge(a);
                let (eb, db) = edge(b);
                crossed[ea] = true;
                crossed[eb] = true;
                uf.union(ea, eb, [da[0] - db[0], da[1] - db[1]]);
            }
        }
    }
    let mut out = ContourComponents::default();
    if periodic {
        for e in 0..2 * n * n {
            if crossed[e] && uf.find(e).0 == e {
                if uf.wraps(e) {
                    out.wrapping += 1;
                } else {
                    out.closed += 1;
                }
            }
        }
        return Ok(out);
    }
    let mut on_boundary = vec![false; 2 * n * n];
    for k in 0..n - 1 {
        for e in [hid(k, 0), hid(k, n - 1), vid(0, k), vid(n - 1, k)] {
            if crossed[e] {
                let r = uf.find(e).0;
                on_boundary[r] = true;
            }
        }
    }
    for e in 0..2 * n * n {
        if crossed[e] && uf.find(e).0 == e {
            if on_boundary[e] {
                out.boundary += 1;
            } else {
                out.closed += 1;
            }
        }
    }
    Ok(out)
}

/// One straight piece of the zero contour, in domain coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub a: [f64; 2],
    pub b: [f64; 2],
}

/// Zero contour as segments, with crossings placed by linear interpolation
/// along cell edges. On the torus, cells straddling the seam are included
/// with coordinates continued past the fundamental domain.
pub fn marching_squares<F: Real>(g: &ScalarGrid<F>) -> Vec<Segment> {
    let n = g.n;
    let periodic = g.domain.is_torus();
    let s: Vec<bool> = g.values.iter().map(|&v| positive(v)).collect();
    let cells = if periodic { n } else { n - 1 };
    let h = g.h.f64();
    let mut out = Vec::new();
    for j in 0..cells {
        for i in 0..cells {
            let (i1, j1) = ((i + 1) % n, (j + 1) % n);
            let (s00, s10, s01, s11) = (s[j * n + i], s[j * n + i1], s[j1 * n + i], s[j1 * n + i1]);
            let (pairs, m) = cell_pairs(s00, s10, s01, s11, || center_positive(g, i, j, i1, j1));
            if m == 0 {
                continue;
            }
            let v = |a: usize, b: usize| g.at(a, b).f64();
            let (v00, v10, v01, v11) = (v(i, j), v(i1, j), v(i, j1), v(i1, j1));
            let frac = |p: f64, q: f64| if p == q { 0.5 } else { (p / (p - q)).clamp(0.0, 1.0) };
            let o = g.node(i, j);
            let (x0, y0) = (o[0].f64(), o[1].f64());
            let point = |side: Side| -> [f64; 2] {
                match side {
                    Side::Bottom => [x0 + h * frac(v00, v10), y0],
                    Side::Top => [x0 + h * frac(v01, v11), y0 + h],
                    Side::Left => [x0, y0 + h * frac(v00, v01)],
                    Side::Right => [x0 + h, y0 + h * frac(v10, v11)],
                }
            };
            for &(a, b) in &pairs[..m] {
                out.push(Segment { a: point(a), b: point(b) });
            }
        }
    }
    out
}
