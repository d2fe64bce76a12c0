//! First-intensity (Kac-Rice) densities computed from the moments of the
//! spectral measure.
//!
//! For a unit direction `u` with normal `v = (-u2, u1)`, derivatives are
//! taken in the frame `(u, v)`. A flip point is a zero of `F = (f, d_u f)`;
//! its density is
//!
//! ```text
//! K = p(0, 0) * E[ |d_v f * d_uu f| | f = 0, d_u f = 0 ]
//! ```
//!
//! where `p` is the density of `(f, d_u f)` at the origin.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use statrs::function::erf::erfc;

use crate::error::{NodalError, Result};
use crate::scalar::Real;
use crate::spectral::SpectralMeasure;

/// Conditioning variances at or below this fraction of the unconditional
/// variance are treated as exact zeros.
pub const DEGENERACY_EPS: f64 = 1e-12;

/// Components of the second-order jet, in this order.
pub const JET_LABELS: [&str; 6] = ["f", "f1", "f2", "f11", "f12", "f22"];
const JET_INDEX: [(u32, u32); 6] = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)];

/// Covariance of `(f, f1, f2, f11, f12, f22)` at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct JetCovariance {
    pub matrix: [[f64; 6]; 6],
}

impl JetCovariance {
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.matrix[a][b]
    }

    /// Smallest eigenvalue, by Jacobi rotations.
    pub fn min_eigenvalue(&self) -> f64 {
        let mut a = self.matrix;
        for _ in 0..100 {
            let mut off = 0.0;
            for p in 0..6 {
                for q in p + 1..6 {
                    off += a[p][q] * a[p][q];
                }
            }
            if off < 1e-30 {
                break;
            }
            for p in 0..6 {
                for q in p + 1..6 {
                    if a[p][q].abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..6 {
                        let (akp, akq) = (a[k][p], a[k][q]);
                        a[k][p] = c * akp - s * akq;
                        a[k][q] = s * akp + c * akq;
                    }
                    for k in 0..6 {
                        let (apk, aqk) = (a[p][k], a[q][k]);
                        a[p][k] = c * apk - s * aqk;
                        a[q][k] = s * apk + c * aqk;
                    }
                }
            }
        }
        (0..6).map(|i| a[i][i]).fold(f64::INFINITY, f64::min)
    }
}

/// Moments `sum w <u, y>^a <v, y>^b` in the frame of `u`.
fn frame_moment<F: Real>(rho: &SpectralMeasure<F>, u: [f64; 2], a: u32, b: u32) -> f64 {
    let v = [-u[1], u[0]];
    rho.atoms()
        .iter()
        .map(|at| {
            let y = [at.xi[0].f64(), at.xi[1].f64()];
            let p = u[0] * y[0] + u[1] * y[1];
            let q = v[0] * y[0] + v[1] * y[1];
            at.w.f64() * p.powi(a as i32) * q.powi(b as i32)
        })
        .sum()
}

fn jet_from_moments(kappa: f64, m: impl Fn(u32, u32) -> f64) -> JetCovariance {
    let mut matrix = [[0.0; 6]; 6];
    for (i, &(a1, b1)) in JET_INDEX.iter().enumerate() {
        for (j, &(a2, b2)) in JET_INDEX.iter().enumerate() {
            let (oa, ob) = (a1 + b1, a2 + b2);
            if (oa + ob) % 2 == 1 {
                continue;
            }
            let sign = if (ob + (oa + ob) / 2) % 2 == 0 { 1.0 } else { -1.0 };
            matrix[i][j] = sign * kappa.powi((oa + ob) as i32) * m(a1 + a2, b1 + b2);
        }
    }
    JetCovariance { matrix }
}

/// Jet covariance in the coordinate frame.
pub fn build_jet_covariance<F: Real>(rho: &SpectralMeasure<F>) -> JetCovariance {
    let k = rho.kappa_value().f64();
    jet_from_moments(k, |a, b| rho.moment(a, b).f64())
}

/// Jet covariance with derivatives along `u` and its left normal.
pub fn build_jet_covariance_frame<F: Real>(rho: &SpectralMeasure<F>, u: [f64; 2]) -> JetCovariance {
    let u = normalize(u);
    let k = rho.kappa_value().f64();
    jet_from_moments(k, |a, b| frame_moment(rho, u, a, b))
}

fn normalize(u: [f64; 2]) -> [f64; 2] {
    let r = u[0].hypot(u[1]);
    [u[0] / r, u[1] / r]
}

/// `E|X Y|` for centred jointly Gaussian `X, Y` with standard deviations
/// `s1, s2` and correlation `r`.
pub fn expected_abs_product(s1: f64, s2: f64, r: f64) -> f64 {
    if s1 == 0.0 || s2 == 0.0 {
        return 0.0;
    }
    let r = r.clamp(-1.0, 1.0);
    let closed = 2.0 * s1 * s2 / PI * ((1.0 - r * r).sqrt() + r * r.asin());
    if closed.is_finite() {
        closed
    } else {
        expected_abs_product_quadrature(s1, s2, r)
    }
}

/// `E|X Y|` by conditioning on `X` and integrating the folded normal mean
/// of `Y | X` over `X` (composite Gauss-Legendre on `[-12, 12]`).
pub fn expected_abs_product_quadrature(s1: f64, s2: f64, r: f64) -> f64 {
    if s1 == 0.0 || s2 == 0.0 {
        return 0.0;
    }
    let c = (1.0 - r * r).max(0.0).sqrt();
    // E|a + c Z| for Z standard normal
    let folded = |a: f64| -> f64 {
        if c == 0.0 {
            return a.abs();
        }
        let t = a / c;
        c * (2.0 / PI).sqrt() * (-0.5 * t * t).exp() + a * (1.0 - erfc(t * FRAC_1_SQRT_2))
    };
    let g = |z: f64| z.abs() * folded(r * z) * (-0.5 * z * z).exp() / (2.0 * PI).sqrt();
    // 5-point Gauss-Legendre on 480 panels; the integrand has a kink at 0,
    // which is a panel edge
    const NODES: [f64; 5] = [0.0, 0.538_469_310_105_683_1, -0.538_469_310_105_683_1, 0.906_179_845_938_664, -0.906_179_845_938_664];
    const WEIGHTS: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
        0.236_926_885_056_189_1,
    ];
    let panels = 480;
    let (a, b) = (-12.0, 12.0);
    let w = (b - a) / panels as f64;
    let mut sum = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * w;
        for (x, wt) in NODES.iter().zip(WEIGHTS) {
            sum += wt * g(mid + 0.5 * w * x);
        }
    }
    s1 * s2 * sum * 0.5 * w
}

/// The Gaussian pair `(d_v f, d_uu f)` conditioned on `f = d_u f = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlipConditioning {
    /// `var(d_u f)`.
    pub var_du: f64,
    pub var_w1: f64,
    pub var_w2: f64,
    pub cov_w: f64,
    pub uncond_var_w1: f64,
    pub uncond_var_w2: f64,
}

pub fn flip_conditioning<F: Real>(rho: &SpectralMeasure<F>, u: [f64; 2]) -> Result<FlipConditioning> {
    let jet = build_jet_covariance_frame(rho, u);
    // frame jet indices: f=0, f_u=1, f_v=2, f_uu=3
    let var_f = jet.get(0, 0);
    let var_du = jet.get(1, 1);
    if var_du <= DEGENERACY_EPS || var_f <= DEGENERACY_EPS {
        return Err(NodalError::DegenerateConditioning(var_du.min(var_f)));
    }
    let cond = |a: usize, b: usize| -> f64 {
        // f and f_u are uncorrelated, so the Schur complement splits
        jet.get(a, b) - jet.get(a, 0) * jet.get(0, b) / var_f - jet.get(a, 1) * jet.get(1, b) / var_du
    };
    let snap = |v: f64, scale: f64| if v <= DEGENERACY_EPS * scale.max(f64::MIN_POSITIVE) { 0.0 } else { v };
    let (u1, u2) = (jet.get(2, 2), jet.get(3, 3));
    let var_w1 = snap(cond(2, 2), u1);
    let var_w2 = snap(cond(3, 3), u2);
    let cov_w = if var_w1 == 0.0 || var_w2 == 0.0 { 0.0 } else { cond(2, 3) };
    Ok(FlipConditioning { var_du, var_w1, var_w2, cov_w, uncond_var_w1: u1, uncond_var_w2: u2 })
}

/// Expected flips per unit area along direction `u`.
pub fn directional_flip_density<F: Real>(rho: &SpectralMeasure<F>, u: [f64; 2]) -> Result<f64> {
    let c = flip_conditioning(rho, u)?;
    let var_f = build_jet_covariance(rho).get(0, 0);
    let p0 = 1.0 / (2.0 * PI * (var_f * c.var_du).sqrt());
    let (s1, s2) = (c.var_w1.sqrt(), c.var_w2.sqrt());
    let r = if s1 > 0.0 && s2 > 0.0 { c.cov_w / (s1 * s2) } else { 0.0 };
    Ok(p0 * expected_abs_product(s1, s2, r))
}

/// Flip density for `(f, d_axis f)`, `axis` 1 or 2.
pub fn flip_density<F: Real>(rho: &SpectralMeasure<F>, axis: u8) -> Result<f64> {
    match axis {
        1 => directional_flip_density(rho, [1.0, 0.0]),
        2 => directional_flip_density(rho, [0.0, 1.0]),
        _ => Err(NodalError::InvalidArgument(format!("axis {axis}"))),
    }
}

/// Flip density for `(f, d1 f + d2 f)`.
pub fn diagonal_flip_density<F: Real>(rho: &SpectralMeasure<F>) -> Result<f64> {
    directional_flip_density(rho, [FRAC_1_SQRT_2, FRAC_1_SQRT_2])
}

/// Cauchy-Schwarz bound `kappa / (2 pi) * sqrt(var(d_v f))` on the flip
/// density along `u`.
pub fn flip_density_bound<F: Real>(rho: &SpectralMeasure<F>, u: [f64; 2]) -> f64 {
    let jet = build_jet_covariance_frame(rho, u);
    rho.kappa_value().f64() / (2.0 * PI) * jet.get(2, 2).max(0.0).sqrt()
}

/// Expected zeros per unit length on a line with direction `u`.
pub fn curve_intersection_density<F: Real>(rho: &SpectralMeasure<F>, u: [f64; 2]) -> f64 {
    let u = normalize(u);
    rho.kappa_value().f64() / PI * frame_moment(rho, u, 2, 0).max(0.0).sqrt()
}
