//! Monte Carlo estimation of nodal counts and of the constants built on them.
//!
//! Sample `i` of a run with seed `s` is always the field drawn from stream
//! `(s, i)`, so every count below is a deterministic function of the inputs
//! and does not depend on the number of worker threads. Counts at several
//! radii reuse the same samples (squares are nested).

use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::arithmetic::{self, sample_torus_wave_indexed};
use crate::error::{NodalError, Result};
use crate::field::FieldSample;
use crate::grid::{evaluate_grid, Domain, ScalarGrid};
use crate::nodal::{count_components_plane, count_components_torus};
use crate::spectral::SpectralMeasure;
use crate::stats::{count_mean_stderr, mean_stderr, ols_slope, weighted_line_fit};

/// First zero of the Bessel function `J0`.
pub const BESSEL_J0_FIRST_ZERO: f64 = 2.404_825_557_695_773;

/// Smallest possible nodal-domain area of a monochromatic field with
/// wavenumber `kappa` (Faber-Krahn).
pub fn faber_krahn_area(kappa: f64) -> f64 {
    std::f64::consts::PI * BESSEL_J0_FIRST_ZERO * BESSEL_J0_FIRST_ZERO / (kappa * kappa)
}

/// Short human-readable description of a measure.
pub fn describe(rho: &SpectralMeasure) -> String {
    match rho.provenance() {
        Some(p) if p.params.is_empty() => p.name.clone(),
        Some(p) => {
            let params: Vec<String> = p.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
            format!("{}({})", p.name, params.join(","))
        }
        None => format!("atomic({} atoms)", rho.atoms().len()),
    }
}

/// Spacing used when none is given: 16 nodes per shortest wavelength.
pub fn default_spacing(rho: &SpectralMeasure) -> f64 {
    let r = rho.support_radius() * rho.kappa_value();
    let k = if r > 0.0 { r } else { rho.kappa_value() };
    std::f64::consts::TAU / k / 16.0
}

/// Per-radius summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadiusRow {
    pub r: f64,
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
    pub h: f64,
    pub coarse: bool,
    /// `mean / (4 R^2)`.
    pub density: f64,
    pub density_stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimatorReport {
    pub measure: String,
    pub schedule: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    pub rows: Vec<RadiusRow>,
    pub cns_estimate: f64,
    pub cns_stderr: f64,
    /// Coefficient `b` of the fitted `c + b / R`.
    pub boundary_slope: f64,
    pub residuals: Vec<f64>,
    pub dns_estimate: f64,
    /// Interior counts, one row per radius, one entry per sample.
    #[serde(skip)]
    pub counts: Vec<Vec<u64>>,
    #[serde(skip)]
    pub elapsed_seconds: f64,
}

/// Interior-component counts of samples `0..m` on each square `D_R` of the
/// schedule. When every radius is an integer multiple of the smallest one
/// the largest grid is evaluated once and cropped.
pub fn nested_counts(
    rho: &SpectralMeasure,
    schedule: &[f64],
    m: usize,
    h: Option<f64>,
    seed: u64,
) -> Result<(Vec<Vec<u64>>, f64, bool)> {
    if schedule.is_empty() || schedule.iter().any(|&r| !(r > 0.0)) {
        return Err(NodalError::InvalidArgument("radii must be positive".into()));
    }
    let mut h = h.unwrap_or_else(|| default_spacing(rho));
    let r0 = schedule.iter().copied().fold(f64::INFINITY, f64::min);
    let rmax = schedule.iter().copied().fold(0.0, f64::max);
    let nested = schedule.iter().all(|r| ((r / r0) - (r / r0).round()).abs() < 1e-9);
    if nested {
        // snap h so that every radius sits on the lattice
        h = r0 / (r0 / h - 1e-9).ceil();
    }
    let rho = Arc::new(rho.clone());
    let per_sample: Vec<(Vec<u64>, bool)> = (0..m as u64)
        .into_par_iter()
        .map(|i| -> Result<(Vec<u64>, bool)> {
            let s = FieldSample::sample_shared(&rho, seed, i);
            let mut coarse = false;
            let mut out = Vec::with_capacity(schedule.len());
            let big = if nested { Some(evaluate_grid(&s, Domain::square(rmax), h, 0)?) } else { None };
            for &r in schedule {
                let g: ScalarGrid = match &big {
                    Some(b) if r == rmax => b.clone(),
                    Some(b) => b.crop([0.0, 0.0], r)?,
                    None => evaluate_grid(&s, Domain::square(r), h, 0)?,
                };
                coarse |= g.coarse;
                out.push(count_components_plane(&g)?.interior_components);
            }
            Ok((out, coarse))
        })
        .collect::<Result<_>>()?;
    let coarse = per_sample.iter().any(|p| p.1);
    let counts = (0..schedule.len()).map(|k| per_sample.iter().map(|p| p.0[k]).collect()).collect();
    Ok((counts, h, coarse))
}

/// Mean and standard error of the interior count on `D_R`.
pub fn estimate_mean_count(rho: &SpectralMeasure, r: f64, m: usize, h: Option<f64>, seed: u64) -> Result<(f64, f64)> {
    if m < 10 {
        return Err(NodalError::InvalidArgument(format!("need at least 10 samples, got {m}")));
    }
    if r < 1.0 {
        return Err(NodalError::InvalidArgument(format!("radius {r} below 1")));
    }
    let (counts, _, _) = nested_counts(rho, &[r], m, h, seed)?;
    Ok(count_mean_stderr(&counts[0]))
}

/// Fit `mean / (4 R^2) = c + b / R` to per-radius summaries.
///
/// The intercept error is the weighted-fit error, inflated by the square
/// root of the reduced chi-square when the points scatter more than their
/// Monte Carlo errors allow.
pub fn fit_cns(rows: &[RadiusRow]) -> Result<(f64, f64, f64, Vec<f64>)> {
    if rows.len() < 3 {
        return Err(NodalError::ScheduleTooShort);
    }
    let t: Vec<f64> = rows.iter().map(|r| 1.0 / r.r).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.density).collect();
    let s: Vec<f64> = rows.iter().map(|r| r.density_stderr).collect();
    let fit = weighted_line_fit(&t, &y, &s);
    let weighted = s.iter().all(|&v| v > 0.0);
    let mut err = fit.intercept_stderr;
    if weighted {
        let chi2: f64 = fit.residuals.iter().zip(&s).map(|(r, s)| (r / s).powi(2)).sum();
        let dof = (rows.len() - 2) as f64;
        err *= (chi2 / dof).sqrt().max(1.0);
    }
    Ok((fit.intercept, err, fit.slope, fit.residuals))
}

fn rows_from_counts(schedule: &[f64], counts: &[Vec<u64>], h: f64, coarse: bool) -> Vec<RadiusRow> {
    schedule
        .iter()
        .zip(counts)
        .map(|(&r, c)| {
            let (mean, stderr) = count_mean_stderr(c);
            let area = 4.0 * r * r;
            RadiusRow {
                r,
                mean,
                stderr,
                samples: c.len(),
                h,
                coarse,
                density: mean / area,
                density_stderr: stderr / area,
            }
        })
        .collect()
}

/// Regression estimate of the Nazarov-Sodin constant with a plug-in
/// discrepancy at the largest radius.
pub fn estimate_cns(rho: &SpectralMeasure, schedule: &[f64], m: usize, h: Option<f64>, seed: u64) -> Result<EstimatorReport> {
    if schedule.len() < 3 {
        return Err(NodalError::ScheduleTooShort);
    }
    if schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(NodalError::InvalidArgument("schedule must be increasing".into()));
    }
    let start = Instant::now();
    let (counts, h, coarse) = nested_counts(rho, schedule, m, h, seed)?;
    let rows = rows_from_counts(schedule, &counts, h, coarse);
    let (cns, cns_err, slope, residuals) = fit_cns(&rows)?;
    let rmax = *schedule.last().unwrap();
    let dns = dns_from_counts(counts.last().unwrap(), rmax, cns);
    Ok(EstimatorReport {
        measure: describe(rho),
        schedule: schedule.to_vec(),
        samples: m,
        seed,
        rows,
        cns_estimate: cns,
        cns_stderr: cns_err,
        boundary_slope: slope,
        residuals,
        dns_estimate: dns,
        counts,
        elapsed_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Mean of `|count / (4 R^2) - cns|`.
pub fn dns_from_counts(counts: &[u64], r: f64, cns: f64) -> f64 {
    let area = 4.0 * r * r;
    if counts.is_empty() {
        return f64::NAN;
    }
    counts.iter().map(|&c| (c as f64 / area - cns).abs()).sum::<f64>() / counts.len() as f64
}

/// Plug-in discrepancy at radius `r` given an estimate of the constant.
pub fn estimate_dns(rho: &SpectralMeasure, r: f64, m: usize, cns: f64, h: Option<f64>, seed: u64) -> Result<f64> {
    let (counts, _, _) = nested_counts(rho, &[r], m, h, seed)?;
    Ok(dns_from_counts(&counts[0], r, cns))
}

/// Torus census batch for `f_n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TorusReport {
    pub n: u64,
    pub r2: usize,
    pub samples: usize,
    pub seed: u64,
    pub h: f64,
    pub mean_total: f64,
    pub stderr_total: f64,
    pub mean_contractible: f64,
    pub mean_wrapping: f64,
    /// Planar estimate for `mu_n`, when supplied.
    pub cns: Option<f64>,
    pub cns_stderr: Option<f64>,
    /// `(mean_total - cns n) / sqrt(n)`.
    pub residual: Option<f64>,
    pub residual_stderr: Option<f64>,
    #[serde(skip)]
    pub totals: Vec<u64>,
}

/// Totals (contractible, wrapping) of torus censuses for samples `0..m`.
pub fn torus_counts(sampler: impl Fn(u64) -> FieldSample + Sync, m: usize, h: f64) -> Result<Vec<(u64, u64)>> {
    (0..m as u64)
        .into_par_iter()
        .map(|i| {
            let s = sampler(i);
            let g = evaluate_grid(&s, Domain::unit_torus(), h, 0)?;
            let c = count_components_torus(&g)?;
            Ok((c.interior_components, c.wrapping_components))
        })
        .collect()
}

/// Mean nodal count of `f_n` on the unit torus, compared with `cns * n`
/// when a planar estimate `(cns, stderr)` for `mu_n` is given.
pub fn torus_count_report(n: u64, m: usize, h: Option<f64>, seed: u64, cns: Option<(f64, f64)>) -> Result<TorusReport> {
    let mu = Arc::new(arithmetic::mu_n(n)?);
    let r2 = mu.atoms().len();
    let h = h.unwrap_or(1.0 / (16.0 * (n as f64).sqrt()));
    let pairs = torus_counts(|i| sample_torus_wave_indexed(&mu, n, seed, i).torus, m, h)?;
    let totals: Vec<u64> = pairs.iter().map(|p| p.0 + p.1).collect();
    let (mean_total, stderr_total) = count_mean_stderr(&totals);
    let contract: Vec<u64> = pairs.iter().map(|p| p.0).collect();
    let wrap: Vec<u64> = pairs.iter().map(|p| p.1).collect();
    let sn = (n as f64).sqrt();
    let (residual, residual_stderr) = match cns {
        Some((c, e)) => (
            Some((mean_total - c * n as f64) / sn),
            Some((stderr_total.powi(2) + (e * n as f64).powi(2)).sqrt() / sn),
        ),
        None => (None, None),
    };
    Ok(TorusReport {
        n,
        r2,
        samples: m,
        seed,
        h: 1.0 / (1.0 / h).round(),
        mean_total,
        stderr_total,
        mean_contractible: count_mean_stderr(&contract).0,
        mean_wrapping: count_mean_stderr(&wrap).0,
        cns: cns.map(|c| c.0),
        cns_stderr: cns.map(|c| c.1),
        residual,
        residual_stderr,
        totals,
    })
}

/// One point of a continuity path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuityRow {
    pub measure: String,
    pub distance_to_end: f64,
    pub cns: f64,
    pub cns_stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuityTable {
    pub rows: Vec<ContinuityRow>,
    /// `max_j |c(rho_j) - c(rho_end)|` over the second half of the path.
    pub tail_spread: f64,
}

/// Estimate the constant along a path of measures.
pub fn continuity_experiment(path: &[SpectralMeasure], schedule: &[f64], m: usize, seed: u64) -> Result<ContinuityTable> {
    if path.len() < 3 {
        return Err(NodalError::InvalidArgument("path needs at least 3 measures".into()));
    }
    let end = path.last().unwrap();
    let mut rows = Vec::new();
    for rho in path {
        let rep = estimate_cns(rho, schedule, m, None, seed)?;
        rows.push(ContinuityRow {
            measure: describe(rho),
            distance_to_end: rho.weak_star_distance(end),
            cns: rep.cns_estimate,
            cns_stderr: rep.cns_stderr,
        });
    }
    let last = rows.last().unwrap().cns;
    let tail_spread = rows[rows.len() / 2..].iter().map(|r| (r.cns - last).abs()).fold(0.0, f64::max);
    Ok(ContinuityTable { rows, tail_spread })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmallDomainRow {
    pub delta: f64,
    /// Mean count of interior domains of area below `delta`, divided by `R^2`.
    pub per_r2: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmallDomainReport {
    pub r: f64,
    pub samples: usize,
    pub rows: Vec<SmallDomainRow>,
    /// Least-squares slope of `log per_r2` against `log delta` over rows
    /// with nonzero counts (`None` with fewer than two such rows).
    pub log_slope: Option<f64>,
    pub faber_krahn_area: f64,
}

pub fn small_domain_report(
    rho: &SpectralMeasure,
    r: f64,
    m: usize,
    deltas: &[f64],
    h: Option<f64>,
    seed: u64,
) -> Result<SmallDomainReport> {
    let gc = rho.gradient_covariance();
    let k2 = rho.kappa_value().powi(2);
    if gc.lambda_min < 1e-12 * k2 {
        return Err(NodalError::DegenerateMeasure(gc.lambda_min));
    }
    let h = h.unwrap_or_else(|| default_spacing(rho));
    let rho_arc = Arc::new(rho.clone());
    let areas: Vec<Vec<f64>> = (0..m as u64)
        .into_par_iter()
        .map(|i| {
            let s = FieldSample::sample_shared(&rho_arc, seed, i);
            let g = evaluate_grid(&s, Domain::square(r), h, 0)?;
            Ok(count_components_plane(&g)?.domain_areas)
        })
        .collect::<Result<_>>()?;
    let rows: Vec<SmallDomainRow> = deltas
        .iter()
        .map(|&d| {
            let per: Vec<f64> = areas
                .iter()
                .map(|a| a.partition_point(|&x| x < d) as f64 / (r * r))
                .collect();
            let (mean, stderr) = mean_stderr(&per);
            SmallDomainRow { delta: d, per_r2: mean, stderr }
        })
        .collect();
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.per_r2 > 0.0 && r.delta.is_finite())
        .map(|r| (r.delta.ln(), r.per_r2.ln()))
        .collect();
    let log_slope = (pts.len() >= 2).then(|| {
        let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        ols_slope(&x, &y)
    });
    Ok(SmallDomainReport {
        r,
        samples: m,
        rows,
        log_slope,
        faber_krahn_area: faber_krahn_area(rho.support_radius() * rho.kappa_value()),
    })
}
