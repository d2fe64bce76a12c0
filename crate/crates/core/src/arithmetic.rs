//! Lattice points on circles and arithmetic random waves on the unit torus.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{NodalError, Result};
use crate::field::{FieldSample, Term};
use crate::spectral::{Kappa, Preset, SpectralMeasure};

/// Largest `n` the enumerator accepts.
pub const LATTICE_CAP: u64 = 1_000_000_000_000;

/// Integer points on the circle `x^2 + y^2 = n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LatticeCircle {
    pub n: u64,
    /// Sorted lexicographically.
    pub points: Vec<(i64, i64)>,
    pub r2: usize,
}

fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// Enumerate `x in [0, sqrt n]` and test whether `n - x^2` is a square.
pub fn lattice_points(n: u64) -> Result<LatticeCircle> {
    if n == 0 {
        return Err(NodalError::InvalidArgument("n must be positive".into()));
    }
    if n > LATTICE_CAP {
        return Err(NodalError::TooLarge(n));
    }
    let mut points = Vec::new();
    for x in 0..=isqrt(n) {
        let rest = n - x * x;
        let y = isqrt(rest);
        if y * y == rest {
            let (x, y) = (x as i64, y as i64);
            for (a, b) in [(x, y), (-x, y), (x, -y), (-x, -y)] {
                points.push((a, b));
            }
        }
    }
    points.sort_unstable();
    points.dedup();
    let r2 = points.len();
    Ok(LatticeCircle { n, points, r2 })
}

/// `r_2(n)`.
pub fn r2(n: u64) -> Result<usize> {
    Ok(lattice_points(n)?.r2)
}

/// Normalized lattice points `lambda / sqrt(n)` with equal weights.
pub fn mu_n(n: u64) -> Result<SpectralMeasure> {
    let lc = lattice_points(n)?;
    if lc.r2 == 0 {
        return Err(NodalError::NotSumOfTwoSquares(n));
    }
    let s = (n as f64).sqrt();
    let w = 1.0 / lc.r2 as f64;
    let m = SpectralMeasure::make_atomic(
        lc.points.iter().map(|&(x, y)| ([x as f64 / s, y as f64 / s], w)),
        Kappa::TwoPi,
    )?;
    Ok(m.with_provenance("mu_n", vec![("n".into(), n as f64)]))
}

/// An arithmetic random wave: the same coefficients on the unit torus
/// (integer frequencies) and on the plane (`g(y) = f(y / sqrt n)`).
#[derive(Debug, Clone)]
pub struct TorusWave {
    pub n: u64,
    /// `f_n` on `[0, 1)^2`, unit variance.
    pub torus: FieldSample,
    /// `g_n`, whose spectral measure is `mu_n`.
    pub planar: FieldSample,
}

/// Sample `index` of the family keyed by `seed`.
pub fn sample_torus_wave_indexed(mu: &Arc<SpectralMeasure>, n: u64, seed: u64, index: u64) -> TorusWave {
    let planar = FieldSample::sample_shared(mu, seed, index);
    let s = (n as f64).sqrt();
    let terms = planar
        .terms()
        .iter()
        .map(|t| Term { xi: [(t.xi[0] * s).round(), (t.xi[1] * s).round()], ..*t })
        .collect();
    let torus = FieldSample::from_terms(terms, 0.0, 0.0, Kappa::TwoPi);
    TorusWave { n, torus, planar }
}

pub fn sample_torus_wave(n: u64, seed: u64) -> Result<TorusWave> {
    let mu = Arc::new(mu_n(n)?);
    Ok(sample_torus_wave_indexed(&mu, n, seed, 0))
}

/// `g_{0;m}(x) = (a1 cos(2 pi m x1 + eta1) + a2 cos(2 pi m x2 + eta2)) / sqrt 2`
/// on the unit torus: the Cilleruelo field with frequencies scaled to `m`.
pub fn cilleruelo_torus_field(m: u32, seed: u64, index: u64) -> FieldSample {
    let rho = Preset::Cilleruelo.build::<f64>().unwrap();
    let base = FieldSample::sample_indexed(&rho, seed, index);
    let m = f64::from(m);
    let terms = base.terms().iter().map(|t| Term { xi: [t.xi[0] * m, t.xi[1] * m], ..*t }).collect();
    FieldSample::from_terms(terms, 0.0, 0.0, Kappa::TwoPi)
}

/// `n = a^2 + 1 <= limit` with `r_2(n) = 8`.
pub fn cilleruelo_candidates(limit: u64) -> Result<Vec<u64>> {
    if limit > LATTICE_CAP {
        return Err(NodalError::TooLarge(limit));
    }
    let mut out = Vec::new();
    let mut a = 1u64;
    while a * a + 1 <= limit {
        let n = a * a + 1;
        if r2(n)? == 8 {
            out.push(n);
        }
        a += 1;
    }
    Ok(out)
}

/// Weak-* distance between `mu_n` and the Cilleruelo measure.
pub fn angular_discrepancy(n: u64) -> Result<f64> {
    let nu0 = Preset::Cilleruelo.build::<f64>()?;
    Ok(mu_n(n)?.weak_star_distance(&nu0))
}
