//! Zeros of a field along straight segments.

use super::positive;
use crate::field::FieldSample;
use crate::grid::ScalarGrid;
use crate::scalar::Real;

/// Parameters `t in [0, 1]` of the zeros of `f(p + t (q - p))`.
///
/// The segment is sampled at spacing `h` (default: a quarter of the grid
/// default, i.e. 64 points per shortest wavelength); every sign change is
/// refined by bisection. Both endpoints belong to the segment.
pub fn curve_intersections(s: &FieldSample, p: [f64; 2], q: [f64; 2], h: Option<f64>) -> Vec<f64> {
    let len = (q[0] - p[0]).hypot(q[1] - p[1]);
    if !(len > 0.0) {
        return Vec::new();
    }
    let h = h.unwrap_or_else(|| s.default_spacing() / 4.0);
    let steps = (len / h).ceil().max(1.0) as usize;
    let at = |t: f64| s.value([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
    let mut roots = Vec::new();
    let mut t0 = 0.0;
    let mut f0 = at(0.0);
    for k in 1..=steps {
        let t1 = k as f64 / steps as f64;
        let f1 = at(t1);
        if positive(f0) != positive(f1) {
            let (mut lo, mut hi) = (t0, t1);
            let sign_lo = positive(f0);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if positive(at(mid)) == sign_lo {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        t0 = t1;
        f0 = f1;
    }
    roots
}

pub fn count_curve_intersections(s: &FieldSample, p: [f64; 2], q: [f64; 2], h: Option<f64>) -> u64 {
    curve_intersections(s, p, q, h).len() as u64
}

/// Sign changes along grid row `index` (`axis` 0) or column `index` (`axis` 1).
pub fn grid_line_sign_changes<F: Real>(g: &ScalarGrid<F>, axis: usize, index: usize) -> u64 {
    let n = g.n;
    let node = |k: usize| if axis == 0 { g.at(k, index) } else { g.at(index, k) };
    (1..n).filter(|&k| positive(node(k - 1)) != positive(node(k))).count() as u64
}
