//! Realizations of the Gaussian field as finite trigonometric sums.
//!
//! A sample is
//!
//! ```text
//! f(x) = c0 + sum_k s_k (a_k cos(kappa <xi_k, x>) + b_k sin(kappa <xi_k, x>))
//! ```
//!
//! with one term per antipodal pair of atoms, `s_k = sqrt(2 w_k)` and
//! `a_k, b_k` independent standard normals. Values and derivatives are exact.

use std::sync::Arc;

use rayon::prelude::*;

use crate::rng::{GaussianStream, ORIGIN_SLOT};
use crate::scalar::Real;
use crate::spectral::{Kappa, SpectralMeasure};

/// One cos/sin pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term<F: Real = f64> {
    /// Frequency before the `kappa` multiplier.
    pub xi: [F; 2],
    pub scale: F,
    pub a: F,
    pub b: F,
}

/// Value, gradient and Hessian at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet<F: Real = f64> {
    pub value: F,
    pub grad: [F; 2],
    pub hess: [[F; 2]; 2],
}

#[derive(Debug, Clone)]
pub struct FieldSample<F: Real = f64> {
    terms: Vec<Term<F>>,
    // kappa * xi, cached so grid and pointwise evaluation share the same
    // floating point operations
    wave: Vec<[F; 2]>,
    origin_weight: F,
    origin_coeff: F,
    kappa: Kappa,
    seed: u64,
    index: u64,
    measure: Option<Arc<SpectralMeasure<F>>>,
}

/// Per-term pieces shared by all derivative orders: with `u = k1 x`, `v = k2 y`
/// returns `(a cos(u+v) + b sin(u+v), b cos(u+v) - a sin(u+v))`.
#[inline(always)]
fn wave_parts<F: Real>(cu: F, su: F, cv: F, sv: F, a: F, b: F) -> (F, F) {
    let p = a * cv + b * sv;
    let q = b * cv - a * sv;
    (cu * p + su * q, cu * q - su * p)
}

impl<F: Real> FieldSample<F> {
    /// Draw the sample with stream index 0.
    pub fn sample(rho: &SpectralMeasure<F>, seed: u64) -> Self {
        Self::sample_indexed(rho, seed, 0)
    }

    /// Draw sample number `index` of the family keyed by `seed`.
    pub fn sample_indexed(rho: &SpectralMeasure<F>, seed: u64, index: u64) -> Self {
        Self::sample_shared(&Arc::new(rho.clone()), seed, index)
    }

    /// As [`sample_indexed`](Self::sample_indexed) without cloning the measure.
    pub fn sample_shared(rho: &Arc<SpectralMeasure<F>>, seed: u64, index: u64) -> Self {
        let mut rng = GaussianStream::new(seed, index);
        let (w0, reps) = rho.pair_representatives();
        let two = F::of(2.0);
        let terms = reps
            .iter()
            .enumerate()
            .map(|(k, &(xi, w))| {
                let (a, b) = rng.normal_pair(k as u64);
                Term { xi, scale: (two * w).sqrt(), a: F::of(a), b: F::of(b) }
            })
            .collect();
        let c0 = if w0 > F::zero() { F::of(rng.normal_pair(ORIGIN_SLOT).0) } else { F::zero() };
        let mut s = Self::from_terms(terms, w0, c0, rho.kappa());
        s.seed = seed;
        s.index = index;
        s.measure = Some(rho.clone());
        s
    }

    /// Build a field from explicit terms, bypassing the generator.
    ///
    /// The constant part is `origin_coeff * sqrt(origin_weight)`.
    pub fn from_terms(terms: Vec<Term<F>>, origin_weight: F, origin_coeff: F, kappa: Kappa) -> Self {
        let k = F::of(kappa.value());
        let wave = terms.iter().map(|t| [k * t.xi[0], k * t.xi[1]]).collect();
        Self {
            terms,
            wave,
            origin_weight,
            origin_coeff,
            kappa,
            seed: 0,
            index: 0,
            measure: None,
        }
    }

    /// Unit-scale terms `a cos(kappa <xi, x>) + b sin(kappa <xi, x>)` given as
    /// `(xi, a, b)`, plus a constant.
    pub fn from_waves(waves: &[([F; 2], F, F)], constant: F, kappa: Kappa) -> Self {
        let terms = waves.iter().map(|&(xi, a, b)| Term { xi, scale: F::one(), a, b }).collect();
        Self::from_terms(terms, F::one(), constant, kappa)
    }

    pub fn terms(&self) -> &[Term<F>] {
        &self.terms
    }

    pub fn kappa(&self) -> Kappa {
        self.kappa
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn measure(&self) -> Option<&SpectralMeasure<F>> {
        self.measure.as_deref()
    }

    /// Constant part of the field.
    pub fn constant(&self) -> F {
        self.origin_coeff * self.origin_weight.sqrt()
    }

    /// Angular frequencies `kappa * xi` of the terms.
    pub fn wave_vectors(&self) -> &[[F; 2]] {
        &self.wave
    }

    /// Largest `|kappa xi|` over the terms (0 for a constant field).
    pub fn max_frequency(&self) -> F {
        self.wave.iter().map(|k| k[0].hypot(k[1])).fold(F::zero(), F::max)
    }

    /// Sum of `|scale| * sqrt(a^2 + b^2) * |k_1|^i |k_2|^j` over terms; bounds
    /// `sup |d^(i,j) f|`.
    pub fn derivative_bound(&self, i: i32, j: i32) -> F {
        self.terms
            .iter()
            .zip(&self.wave)
            .map(|(t, k)| t.scale.abs() * t.a.hypot(t.b) * k[0].abs().powi(i) * k[1].abs().powi(j))
            .sum()
    }

    /// Wavelength-based default spacing: 16 nodes per shortest wavelength.
    pub fn default_spacing(&self) -> F {
        let k = self.max_frequency();
        let k = if k > F::zero() { k } else { F::of(self.kappa.value()) };
        F::TAU() / k / F::of(16.0)
    }

    fn parts(&self, x: [F; 2]) -> impl Iterator<Item = (F, [F; 2], F, F)> + '_ {
        self.terms.iter().zip(&self.wave).map(move |(t, k)| {
            let (su, cu) = (k[0] * x[0]).sin_cos();
            let (sv, cv) = (k[1] * x[1]).sin_cos();
            let (c, d) = wave_parts(cu, su, cv, sv, t.a, t.b);
            (t.scale, *k, c, d)
        })
    }

    pub fn value(&self, x: [F; 2]) -> F {
        let mut acc = F::zero();
        for (s, _, c, _) in self.parts(x) {
            acc = acc + s * c;
        }
        acc + self.constant()
    }

    pub fn gradient(&self, x: [F; 2]) -> [F; 2] {
        let mut g = [F::zero(); 2];
        for (s, k, _, d) in self.parts(x) {
            let sd = s * d;
            g[0] = g[0] + sd * k[0];
            g[1] = g[1] + sd * k[1];
        }
        g
    }

    pub fn hessian(&self, x: [F; 2]) -> [[F; 2]; 2] {
        self.jet(x).hess
    }

    /// Value, gradient and Hessian in one pass.
    pub fn jet(&self, x: [F; 2]) -> Jet<F> {
        let mut v = F::zero();
        let mut g = [F::zero(); 2];
        let mut h = [F::zero(); 3];
        for (s, k, c, d) in self.parts(x) {
            v = v + s * c;
            let sd = s * d;
            g[0] = g[0] + sd * k[0];
            g[1] = g[1] + sd * k[1];
            let sc = s * c;
            h[0] = h[0] - sc * k[0] * k[0];
            h[1] = h[1] - sc * k[0] * k[1];
            h[2] = h[2] - sc * k[1] * k[1];
        }
        Jet { value: v + self.constant(), grad: g, hess: [[h[0], h[1]], [h[1], h[2]]] }
    }

    /// `E[f(0) f(x)]` computed from the coefficient structure alone.
    pub fn symbolic_covariance(&self, x: [F; 2]) -> F {
        let mut acc = self.origin_weight;
        for (t, k) in self.terms.iter().zip(&self.wave) {
            acc = acc + t.scale * t.scale * (k[0] * x[0] + k[1] * x[1]).cos();
        }
        acc
    }

    /// Pointwise sum `self + eps * other` of two fields sharing `kappa`.
    pub fn plus(&self, eps: F, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().map(|t| Term { scale: t.scale * eps, ..*t }));
        let c = self.constant() + eps * other.constant();
        let mut s = Self::from_terms(terms, F::one(), c, self.kappa);
        s.seed = self.seed;
        s.index = self.index;
        s
    }
}

/// The Cilleruelo field `(a1 cos(x1 + eta1) + a2 cos(x2 + eta2)) / sqrt(2)`,
/// with its polar coefficients exposed.
#[derive(Debug, Clone)]
pub struct CillerueloField {
    pub sample: FieldSample,
    pub amplitudes: [f64; 2],
    pub phases: [f64; 2],
}

impl CillerueloField {
    pub fn new(seed: u64) -> Self {
        Self::indexed(seed, 0)
    }

    pub fn indexed(seed: u64, index: u64) -> Self {
        let rho = crate::spectral::Preset::Cilleruelo.build::<f64>().unwrap().with_kappa(Kappa::One);
        Self::from_sample(FieldSample::sample_indexed(&rho, seed, index))
    }

    pub fn from_sample(sample: FieldSample) -> Self {
        let mut amplitudes = [0.0; 2];
        let mut phases = [0.0; 2];
        for t in sample.terms() {
            // term along the first axis has xi = (1, 0)
            let axis = if t.xi[0].abs() > t.xi[1].abs() { 0 } else { 1 };
            amplitudes[axis] = t.a.hypot(t.b);
            phases[axis] = (-t.b).atan2(t.a);
        }
        Self { sample, amplitudes, phases }
    }

    /// Point where both cosines peak.
    pub fn peak(&self) -> [f64; 2] {
        [-self.phases[0], -self.phases[1]]
    }
}

/// Monte Carlo estimate of `E[f(0) f(x)]` with its standard error.
pub fn covariance_mc<F: Real>(rho: &SpectralMeasure<F>, x: [F; 2], m: usize, seed: u64) -> (f64, f64) {
    let rho = Arc::new(rho.clone());
    let products: Vec<f64> = (0..m as u64)
        .into_par_iter()
        .map(|i| {
            let s = FieldSample::sample_shared(&rho, seed, i);
            (s.value([F::zero(); 2]) * s.value(x)).f64()
        })
        .collect();
    crate::stats::mean_stderr(&products)
}
