//! Stability of nodal structure under small perturbations: grid min-max
//! profiles, C1 distances, coupled sampling of nearby measures and the
//! count sandwich, plus the deterministic example fields with one
//! three-pair and one six-point spectrum.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{NodalError, Result};
use crate::field::{FieldSample, Term};
use crate::grid::{evaluate_grid, Domain, ScalarGrid};
use crate::nodal::count_components_plane;
use crate::rng::{GaussianStream, ORIGIN_SLOT};
use crate::spectral::{Kappa, Preset, SpectralMeasure};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityProfile {
    /// Grid minimum of `max(|f|, |grad f|)`. An upper estimate of the true
    /// minimum over the domain.
    pub min_max: f64,
    /// Node where the minimum is attained.
    pub argmin: [f64; 2],
    /// Grid maximum of `|f|` and of every first and second partial.
    pub c2_norm: f64,
    pub h: f64,
    pub n: usize,
}

/// Profile of a grid evaluated with second derivatives.
pub fn profile_of_grid(g: &ScalarGrid) -> Result<StabilityProfile> {
    let (Some([gx, gy]), Some([hxx, hxy, hyy])) = (&g.grad, &g.hess) else {
        return Err(NodalError::InvalidArgument("grid lacks derivatives".into()));
    };
    let mut min_max = f64::INFINITY;
    let mut arg = 0;
    let mut c2 = 0.0f64;
    for k in 0..g.values.len() {
        let v = g.values[k].abs();
        let m = v.max(gx[k].hypot(gy[k]));
        if m < min_max {
            min_max = m;
            arg = k;
        }
        for d in [v, gx[k].abs(), gy[k].abs(), hxx[k].abs(), hxy[k].abs(), hyy[k].abs()] {
            c2 = c2.max(d);
        }
    }
    Ok(StabilityProfile { min_max, argmin: g.node(arg % g.n, arg / g.n), c2_norm: c2, h: g.h, n: g.n })
}

pub fn stability_profile(s: &FieldSample, domain: Domain, h: f64) -> Result<StabilityProfile> {
    profile_of_grid(&evaluate_grid(s, domain, h, 2)?)
}

/// Grid maximum of `|f1 - f2|` and of the differences of first partials.
pub fn c1_distance_grids(g1: &ScalarGrid, g2: &ScalarGrid) -> Result<f64> {
    if g1.domain != g2.domain || g1.h != g2.h || g1.n != g2.n {
        return Err(NodalError::DomainMismatch);
    }
    let (Some([ax, ay]), Some([bx, by])) = (&g1.grad, &g2.grad) else {
        return Err(NodalError::InvalidArgument("grid lacks derivatives".into()));
    };
    let mut d = 0.0f64;
    for k in 0..g1.values.len() {
        d = d
            .max((g1.values[k] - g2.values[k]).abs())
            .max((ax[k] - bx[k]).abs())
            .max((ay[k] - by[k]).abs());
    }
    Ok(d)
}

pub fn c1_distance(s1: &FieldSample, s2: &FieldSample, domain: Domain, h: f64) -> Result<f64> {
    c1_distance_grids(&evaluate_grid(s1, domain, h, 1)?, &evaluate_grid(s2, domain, h, 1)?)
}

// One antipodal pair placed in a transport frame starting at `cut`.
#[derive(Debug, Clone, Copy)]
struct FramePair {
    angle: f64,
    radius: f64,
    xi: [f64; 2],
    mass: f64,
}

fn frame(reps: &[([f64; 2], f64)], cut: f64) -> Vec<FramePair> {
    let mut out: Vec<FramePair> = reps
        .iter()
        .map(|&(xi, w)| {
            // orient the pair so that its angle lies in [0, pi)
            let raw = xi[1].atan2(xi[0]);
            let (mut a, mut v) = if raw < 0.0 { (raw + PI, [-xi[0], -xi[1]]) } else { (raw, xi) };
            if a >= PI - 1e-15 {
                a = 0.0;
                v = [-v[0], -v[1]];
            }
            if a < cut {
                a += PI;
                v = [-v[0], -v[1]];
            }
            FramePair { angle: a, radius: xi[0].hypot(xi[1]), xi: v, mass: 2.0 * w }
        })
        .collect();
    out.sort_by(|p, q| p.angle.total_cmp(&q.angle).then(p.radius.total_cmp(&q.radius)));
    out
}

// North-west corner merge of two frames: chunks (i, j, mass).
fn merge(p: &[FramePair], q: &[FramePair]) -> Vec<(Option<usize>, Option<usize>, f64)> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    let (mut ri, mut rj) = (p.first().map_or(0.0, |x| x.mass), q.first().map_or(0.0, |x| x.mass));
    while i < p.len() && j < q.len() {
        let m = ri.min(rj);
        if m > 0.0 {
            out.push((Some(i), Some(j), m));
        }
        ri -= m;
        rj -= m;
        if ri <= 1e-15 {
            i += 1;
            ri = p.get(i).map_or(0.0, |x| x.mass);
        }
        if rj <= 1e-15 {
            j += 1;
            rj = q.get(j).map_or(0.0, |x| x.mass);
        }
    }
    if i < p.len() && ri > 1e-15 {
        out.push((Some(i), None, ri));
        i += 1;
    }
    out.extend(p[i.min(p.len())..].iter().enumerate().map(|(k, x)| (Some(i + k), None, x.mass)));
    if j < q.len() && rj > 1e-15 {
        out.push((None, Some(j), rj));
        j += 1;
    }
    out.extend(q[j.min(q.len())..].iter().enumerate().map(|(k, x)| (None, Some(j + k), x.mass)));
    out
}

fn cost(p: &[FramePair], q: &[FramePair], chunks: &[(Option<usize>, Option<usize>, f64)]) -> f64 {
    chunks
        .iter()
        .map(|&(i, j, m)| match (i, j) {
            (Some(i), Some(j)) => m * ((p[i].angle - q[j].angle).abs() + (p[i].radius - q[j].radius).abs()),
            _ => m * PI,
        })
        .sum()
}

/// The transport plan between the pair masses of two measures, as
/// `(pairs of rho0, pairs of rho1, chunks)`.
fn transport(rho0: &SpectralMeasure, rho1: &SpectralMeasure) -> (Vec<FramePair>, Vec<FramePair>, Vec<(Option<usize>, Option<usize>, f64)>) {
    let (_, r0) = rho0.pair_representatives();
    let (_, r1) = rho1.pair_representatives();
    let mut cuts: Vec<f64> = r0
        .iter()
        .chain(&r1)
        .map(|(xi, _)| xi[1].atan2(xi[0]).rem_euclid(PI))
        .collect();
    cuts.push(0.0);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut best: Option<(f64, Vec<FramePair>, Vec<FramePair>, Vec<_>)> = None;
    for cut in cuts {
        let p = frame(&r0, cut);
        let q = frame(&r1, cut);
        let chunks = merge(&p, &q);
        let c = cost(&p, &q, &chunks);
        if best.as_ref().map_or(true, |b| c < b.0 - 1e-12) {
            best = Some((c, p, q, chunks));
        }
    }
    let (_, p, q, chunks) = best.unwrap();
    (p, q, chunks)
}

fn coupled_terms(pairs: &[FramePair], chunks: &[(Option<usize>, Option<usize>, f64)], gauss: &[(f64, f64)], first: bool) -> Vec<Term> {
    let mut acc = vec![(0.0, 0.0); pairs.len()];
    for (c, &(i, j, m)) in chunks.iter().enumerate() {
        let Some(k) = (if first { i } else { j }) else { continue };
        let f = (m / pairs[k].mass).sqrt();
        acc[k].0 += f * gauss[c].0;
        acc[k].1 += f * gauss[c].1;
    }
    pairs
        .iter()
        .zip(acc)
        .map(|(p, (a, b))| Term { xi: p.xi, scale: p.mass.sqrt(), a, b })
        .collect()
}

/// Coupled draws of the two fields: the pair masses are matched by a
/// monotone angular transport (the cut of the half circle chosen to
/// minimize the transported angle), each matched chunk carries one pair of
/// Gaussians shared by both fields, and a pair's coefficients are the
/// mass-weighted sums of its chunks' Gaussians. Each output has the correct
/// law on its own.
pub fn coupled_sample(rho0: &SpectralMeasure, rho1: &SpectralMeasure, seed: u64, index: u64) -> (FieldSample, FieldSample) {
    let (p, q, chunks) = transport(rho0, rho1);
    let mut rng = GaussianStream::new(seed, index);
    let gauss: Vec<(f64, f64)> = (0..chunks.len()).map(|c| rng.normal_pair(c as u64)).collect();
    let c0 = rng.normal_pair(ORIGIN_SLOT).0;
    let build = |rho: &SpectralMeasure, pairs: &[FramePair], first: bool| {
        let (w0, _) = rho.pair_representatives();
        let terms = coupled_terms(pairs, &chunks, &gauss, first);
        FieldSample::from_terms(terms, w0, if w0 > 0.0 { c0 } else { 0.0 }, rho.kappa())
    };
    (build(rho0, &p, true), build(rho1, &q, false))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SandwichReport {
    pub r: f64,
    pub beta: f64,
    pub draws: usize,
    pub h: f64,
    /// Draws with grid min-max of `f0` above `2 beta`.
    pub stable: usize,
    /// Draws whose C1 distance is below `beta`.
    pub close: usize,
    /// Draws passing both filters (all draws when `beta` is infinite).
    pub filtered: usize,
    pub violations: usize,
    /// Violations among filtered draws; 0 when nothing passed.
    pub violation_rate: f64,
    pub median_c1_distance: f64,
}

/// Check `N(f1; R-1) <= N(f0; R) <= N(f1; R+1)` over coupled draws.
/// Filters are evaluated on `D_{R+1}`; an infinite `beta` disables them.
pub fn sandwich_check(
    rho0: &SpectralMeasure,
    rho1: &SpectralMeasure,
    r: f64,
    m: usize,
    beta: f64,
    h: Option<f64>,
    seed: u64,
) -> Result<SandwichReport> {
    if !(r > 1.0) || r.fract() != 0.0 {
        return Err(NodalError::InvalidArgument(format!("R = {r} must be an integer above 1")));
    }
    let h0 = h.unwrap_or_else(|| {
        crate::estimators::default_spacing(rho0).min(crate::estimators::default_spacing(rho1))
    });
    let h = 1.0 / (1.0 / h0 - 1e-9).ceil();
    let (rho0, rho1) = (Arc::new(rho0.clone()), Arc::new(rho1.clone()));
    let filter = beta.is_finite();
    let rows: Vec<(bool, bool, bool, f64)> = (0..m as u64)
        .into_par_iter()
        .map(|i| -> Result<_> {
            let (f0, f1) = coupled_sample(&rho0, &rho1, seed, i);
            let outer = Domain::square(r + 1.0);
            let g0 = evaluate_grid(&f0, outer, h, if filter { 2 } else { 1 })?;
            let g1 = evaluate_grid(&f1, outer, h, 1)?;
            let dist = c1_distance_grids(&g0, &g1)?;
            let stable = !filter || profile_of_grid(&g0)?.min_max > 2.0 * beta;
            let close = !filter || dist < beta;
            let n = |g: &ScalarGrid, rr: f64| -> Result<u64> {
                Ok(count_components_plane(&g.crop([0.0, 0.0], rr)?)?.interior_components)
            };
            let lo = n(&g1, r - 1.0)?;
            let mid = n(&g0, r)?;
            let hi = count_components_plane(&g1)?.interior_components;
            Ok((stable, close, !(lo <= mid && mid <= hi), dist))
        })
        .collect::<Result<_>>()?;
    let stable = rows.iter().filter(|x| x.0).count();
    let close = rows.iter().filter(|x| x.1).count();
    let filtered = rows.iter().filter(|x| x.0 && x.1).count();
    let violations = rows.iter().filter(|x| x.0 && x.1 && x.2).count();
    let mut d: Vec<f64> = rows.iter().map(|x| x.3).collect();
    d.sort_by(f64::total_cmp);
    let median = if d.is_empty() { f64::NAN } else { d[d.len() / 2] };
    Ok(SandwichReport {
        r,
        beta,
        draws: m,
        h,
        stable,
        close,
        filtered,
        violations,
        violation_rate: if filtered > 0 { violations as f64 / filtered as f64 } else { 0.0 },
        median_c1_distance: median,
    })
}

/// The deterministic example fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Section7 {
    /// `sin x + 0.8 sin 3x + sin y`.
    F,
    /// `sin x + 0.8 sin 3x + 0.2 sin y`.
    G,
    /// `2 cos x + cos y`.
    MonochromaticG,
}

impl std::str::FromStr for Section7 {
    type Err = NodalError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "f" => Ok(Section7::F),
            "g" => Ok(Section7::G),
            "monochromatic_g" | "mono" => Ok(Section7::MonochromaticG),
            _ => Err(NodalError::InvalidArgument(format!("unknown example field `{s}`"))),
        }
    }
}

impl Section7 {
    /// `(frequency, cos coefficient, sin coefficient)` per wave.
    pub fn waves(self) -> Vec<([f64; 2], f64, f64)> {
        match self {
            Section7::F => vec![([1.0, 0.0], 0.0, 1.0), ([3.0, 0.0], 0.0, 0.8), ([0.0, 1.0], 0.0, 1.0)],
            Section7::G => vec![([1.0, 0.0], 0.0, 1.0), ([3.0, 0.0], 0.0, 0.8), ([0.0, 1.0], 0.0, 0.2)],
            Section7::MonochromaticG => vec![([1.0, 0.0], 2.0, 0.0), ([0.0, 1.0], 1.0, 0.0)],
        }
    }

    /// Measure carrying the field's frequencies (rescaled into the unit disc).
    pub fn measure(self) -> SpectralMeasure {
        match self {
            Section7::F | Section7::G => Preset::Section7ThreePair.build().unwrap(),
            Section7::MonochromaticG => Preset::Section7SixPoint.build().unwrap(),
        }
    }
}

pub fn section7_field(which: Section7) -> FieldSample {
    FieldSample::from_waves(&which.waves(), 0.0, Kappa::One)
}

/// The field with every cos and sin coefficient shifted: `eps[2k]` goes to
/// the cosine and `eps[2k + 1]` to the sine of wave `k`.
pub fn section7_perturbed(which: Section7, eps: &[f64]) -> Result<FieldSample> {
    let mut waves = which.waves();
    if eps.len() != 2 * waves.len() {
        return Err(NodalError::InvalidArgument(format!("expected {} perturbations", 2 * waves.len())));
    }
    for (k, w) in waves.iter_mut().enumerate() {
        w.1 += eps[2 * k];
        w.2 += eps[2 * k + 1];
    }
    Ok(FieldSample::from_waves(&waves, 0.0, Kappa::One))
}

/// Every sign pattern `(+-eps, ..., +-eps)` of length `len`, in binary order.
pub fn sign_patterns(len: usize, eps: f64) -> Vec<Vec<f64>> {
    (0..1u32 << len)
        .map(|bits| (0..len).map(|k| if bits >> k & 1 == 1 { -eps } else { eps }).collect())
        .collect()
}

/// Interior counts of a deterministic field on translated windows
/// `D_R(c)`, centres on the lattice `c = (step i, step j)`.
pub fn window_counts(s: &FieldSample, r: f64, h: f64, windows: usize, step: f64) -> Result<Vec<u64>> {
    let side = windows as f64;
    (0..windows * windows)
        .into_par_iter()
        .map(|k| {
            let c = [(k % windows) as f64 * step - 0.5 * (side - 1.0) * step, (k / windows) as f64 * step - 0.5 * (side - 1.0) * step];
            let g = evaluate_grid(s, Domain::Square { center: c, half: r }, h, 0)?;
            Ok(count_components_plane(&g)?.interior_components)
        })
        .collect()
}
