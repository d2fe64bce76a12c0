//! Flip points: common zeros of `f` and a directional derivative `u . grad f`.
//!
//! Cells of the lattice are screened with a rigorous bound on the bilinear
//! interpolation error, so a cell is skipped only when `f` or the derivative
//! provably keeps one sign on it. Surviving cells are searched by Newton's
//! method on `(f, u . grad f)`; roots are merged across cells and those in
//! the closed square are counted. Screening by corner signs alone would miss
//! roots where the zero line is tangent to a lattice line.

use crate::error::{NodalError, Result};
use crate::field::FieldSample;
use crate::grid::{evaluate_grid, Domain};

/// Direction of the derivative paired with `f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FlipDirection {
    X,
    Y,
    /// `(1, 1) / sqrt(2)`.
    Diagonal,
    Unit([f64; 2]),
}

impl FlipDirection {
    pub fn unit(self) -> [f64; 2] {
        use std::f64::consts::FRAC_1_SQRT_2;
        match self {
            FlipDirection::X => [1.0, 0.0],
            FlipDirection::Y => [0.0, 1.0],
            FlipDirection::Diagonal => [FRAC_1_SQRT_2, FRAC_1_SQRT_2],
            FlipDirection::Unit(u) => u,
        }
    }

    /// 1 or 2 select an axis.
    pub fn axis(axis: u8) -> Result<Self> {
        match axis {
            1 => Ok(FlipDirection::X),
            2 => Ok(FlipDirection::Y),
            _ => Err(NodalError::InvalidArgument(format!("axis {axis}"))),
        }
    }
}

const MAX_NEWTON: usize = 100;

/// Flip points inside the closed square `domain`, searched on a lattice of spacing `h`.
pub fn flip_points(s: &FieldSample, domain: Domain, h: f64, dir: FlipDirection) -> Result<Vec<[f64; 2]>> {
    let Domain::Square { center, half } = domain else {
        return Err(NodalError::DomainMismatch);
    };
    let u = dir.unit();
    // sup |u . grad f| and interpolation margins
    let (mut bg, mut bf2, mut bg2) = (0.0, 0.0, 0.0);
    for (t, k) in s.terms().iter().zip(s.wave_vectors()) {
        let amp = t.scale.abs() * t.a.hypot(t.b);
        let uk = (u[0] * k[0] + u[1] * k[1]).abs();
        let k2 = k[0] * k[0] + k[1] * k[1];
        bg += amp * uk;
        bf2 += amp * k2;
        bg2 += amp * uk * k2;
    }
    if bg == 0.0 {
        return Ok(Vec::new());
    }
    let grid = evaluate_grid(s, domain, h, 1)?;
    let n = grid.n;
    let h = grid.h;
    let margin_f = bf2 * h * h / 8.0;
    let margin_g = bg2 * h * h / 8.0;
    let [gx, gy] = grid.grad.as_ref().expect("order 1 grid");
    let gval: Vec<f64> = gx.iter().zip(gy).map(|(a, b)| u[0] * a + u[1] * b).collect();
    let bf = s.derivative_bound(0, 0) + s.constant().abs();
    let tol_f = 1e-10 * bf.max(1e-300);
    let tol_g = 1e-10 * bg;
    let lo = [center[0] - half, center[1] - half];
    let hi = [center[0] + half, center[1] + half];
    let slack = 1e-9 * h;

    let newton = |mut x: [f64; 2]| -> Option<[f64; 2]> {
        let start = x;
        for _ in 0..MAX_NEWTON {
            let j = s.jet(x);
            let f = j.value;
            let g = u[0] * j.grad[0] + u[1] * j.grad[1];
            let a = [j.grad[0], j.grad[1]];
            let b = [
                u[0] * j.hess[0][0] + u[1] * j.hess[1][0],
                u[0] * j.hess[0][1] + u[1] * j.hess[1][1],
            ];
            let det = a[0] * b[1] - a[1] * b[0];
            if det == 0.0 || !det.is_finite() {
                break;
            }
            let dx = (f * b[1] - g * a[1]) / det;
            let dy = (a[0] * g - b[0] * f) / det;
            x = [x[0] - dx, x[1] - dy];
            if (x[0] - start[0]).abs() > 3.0 * h || (x[1] - start[1]).abs() > 3.0 * h {
                return None;
            }
            if dx.abs().max(dy.abs()) <= 1e-15 * (1.0 + x[0].abs().max(x[1].abs())) {
                break;
            }
        }
        let j = s.jet(x);
        let g = u[0] * j.grad[0] + u[1] * j.grad[1];
        (j.value.abs() <= tol_f && g.abs() <= tol_g).then_some(x)
    };

    let mut roots = Vec::new();
    for jc in 0..n - 1 {
        for ic in 0..n - 1 {
            let idx = [jc * n + ic, jc * n + ic + 1, (jc + 1) * n + ic, (jc + 1) * n + ic + 1];
            let spans = |v: &dyn Fn(usize) -> f64, m: f64| {
                let (mn, mx) = idx.iter().fold((f64::MAX, f64::MIN), |(a, b), &k| (a.min(v(k)), b.max(v(k))));
                mn - m <= 0.0 && 0.0 <= mx + m
            };
            if !spans(&|k| grid.values[k], margin_f) || !spans(&|k| gval[k], margin_g) {
                continue;
            }
            let o = grid.node(ic, jc);
            let in_cell = |x: [f64; 2]| {
                x[0] >= o[0] - slack && x[0] <= o[0] + h + slack && x[1] >= o[1] - slack && x[1] <= o[1] + h + slack
            };
            let starts = [
                [o[0] + 0.5 * h, o[1] + 0.5 * h],
                o,
                [o[0] + h, o[1]],
                [o[0], o[1] + h],
                [o[0] + h, o[1] + h],
            ];
            for x0 in starts {
                if let Some(r) = newton(x0) {
                    roots.push(r);
                    if in_cell(r) {
                        break;
                    }
                }
            }
        }
    }
    let inside = |x: &[f64; 2]| {
        let t = 1e-9 * (1.0 + half);
        x[0] >= lo[0] - t && x[0] <= hi[0] + t && x[1] >= lo[1] - t && x[1] <= hi[1] + t
    };
    roots.retain(inside);
    roots.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let radius = 1e-6 * h;
    let mut distinct: Vec<[f64; 2]> = Vec::new();
    for r in roots {
        // roots are sorted by x, so only recent entries can be close
        let dup = distinct
            .iter()
            .rev()
            .take_while(|d| r[0] - d[0] <= radius)
            .any(|d| (r[1] - d[1]).abs() <= radius);
        if !dup {
            distinct.push(r);
        }
    }
    Ok(distinct)
}

/// Number of flip points in the closed square.
pub fn count_flips(s: &FieldSample, domain: Domain, h: f64, dir: FlipDirection) -> Result<u64> {
    Ok(flip_points(s, domain, h, dir)?.len() as u64)
}
