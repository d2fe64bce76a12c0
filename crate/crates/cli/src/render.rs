//! SVG and P6 renderings of the zero set.

use std::collections::HashMap;
use std::fmt::Write as _;

use nodal_core::nodal::Segment;
use nodal_core::FieldSample;
use rayon::prelude::*;

/// Axis-aligned view `[x0, x0 + side] x [y0, y0 + side]`.
#[derive(Debug, Clone, Copy)]
pub struct View {
    pub x0: f64,
    pub y0: f64,
    pub side: f64,
}

fn key(p: [f64; 2], q: f64) -> (i64, i64) {
    ((p[0] / q).round() as i64, (p[1] / q).round() as i64)
}

/// Join segments sharing endpoints into polylines.
pub fn polylines(segs: &[Segment], h: f64) -> Vec<Vec<[f64; 2]>> {
    let q = 1e-9 * h;
    let mut ends: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (k, s) in segs.iter().enumerate() {
        ends.entry(key(s.a, q)).or_default().push(k);
        ends.entry(key(s.b, q)).or_default().push(k);
    }
    let mut used = vec![false; segs.len()];
    let mut out = Vec::new();
    let next = |p: [f64; 2], used: &[bool]| -> Option<usize> {
        ends.get(&key(p, q)).and_then(|v| v.iter().copied().find(|&k| !used[k]))
    };
    for start in 0..segs.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let mut line = vec![segs[start].a, segs[start].b];
        // forward from b, then backward from a
        for forward in [true, false] {
            loop {
                let tip = if forward { *line.last().unwrap() } else { line[0] };
                let Some(k) = next(tip, &used) else { break };
                used[k] = true;
                let s = segs[k];
                let other = if key(s.a, q) == key(tip, q) { s.b } else { s.a };
                if forward {
                    line.push(other);
                } else {
                    line.insert(0, other);
                }
            }
        }
        out.push(line);
    }
    out
}

pub fn svg(segs: &[Segment], h: f64, view: View, size: u32) -> String {
    let scale = f64::from(size) / view.side;
    let px = |p: [f64; 2]| ((p[0] - view.x0) * scale, (view.y0 + view.side - p[1]) * scale);
    let mut s = String::new();
    writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" viewBox=\"0 0 {size} {size}\">"
    )
    .unwrap();
    writeln!(s, "<rect width=\"{size}\" height=\"{size}\" fill=\"white\" stroke=\"gray\"/>").unwrap();
    for line in polylines(segs, h) {
        s.push_str("<polyline fill=\"none\" stroke=\"black\" stroke-width=\"1\" points=\"");
        for (k, p) in line.iter().enumerate() {
            let (x, y) = px(*p);
            if k > 0 {
                s.push(' ');
            }
            write!(s, "{x:.2},{y:.2}").unwrap();
        }
        s.push_str("\"/>\n");
    }
    s.push_str("</svg>\n");
    s
}

/// Binary PPM: sign regions in two greys, pixels where the sign changes
/// towards a right or lower neighbour in black.
pub fn ppm(field: &FieldSample, view: View, size: u32) -> Vec<u8> {
    let n = size as usize;
    let step = view.side / f64::from(size);
    let signs: Vec<bool> = (0..n * n)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k % n, k / n);
            let x = [view.x0 + (i as f64 + 0.5) * step, view.y0 + view.side - (j as f64 + 0.5) * step];
            field.value(x) > 0.0
        })
        .collect();
    let mut out = format!("P6\n{size} {size}\n255\n").into_bytes();
    for j in 0..n {
        for i in 0..n {
            let s = signs[j * n + i];
            let edge = (i + 1 < n && signs[j * n + i + 1] != s) || (j + 1 < n && signs[(j + 1) * n + i] != s);
            let c: [u8; 3] = if edge {
                [0, 0, 0]
            } else if s {
                [225, 225, 225]
            } else {
                [255, 255, 255]
            };
            out.extend_from_slice(&c);
        }
    }
    out
}
