//! Acceptance runner: one line per criterion.
//!
//! `ACCEPTANCE_ONLY=1,5,9` restricts the run to the listed criteria.
//! The process exits non-zero when a criterion fails, unless the failure is
//! listed in `KNOWN_FAILURES` (those still print `FAIL`).

use std::f64::consts::{FRAC_PI_4, PI, SQRT_2, TAU};
use std::sync::Arc;
use std::time::{Duration, Instant};

use nodal_core::arithmetic::{cilleruelo_torus_field, lattice_points, mu_n, r2, sample_torus_wave};
use nodal_core::estimators::{continuity_experiment, estimate_cns, torus_count_report, torus_counts, EstimatorReport};
use nodal_core::field::covariance_mc;
use nodal_core::kac_rice::{curve_intersection_density, diagonal_flip_density, flip_density};
use nodal_core::nodal::{count_components_plane, count_curve_intersections, count_flips, FlipDirection};
use nodal_core::stability::{sandwich_check, section7_field, section7_perturbed, sign_patterns, Section7};
use nodal_core::stats::mean_stderr;
use nodal_core::{evaluate_grid, CillerueloField, Domain, FieldSample, Kappa, Preset, SpectralMeasure};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// The second half of criterion 9 (perturbation invariance of the weak
/// three-pair example) is false: that field has singular zeros.
const KNOWN_FAILURES: &[u32] = &[9];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn preset(p: Preset) -> SpectralMeasure {
    p.build().unwrap()
}

fn interior(s: &FieldSample, r: f64, h: f64) -> u64 {
    count_components_plane(&evaluate_grid(s, Domain::square(r), h, 0).unwrap()).unwrap().interior_components
}

fn c1() -> Outcome {
    let counts: Vec<u64> = (0..200u64)
        .into_par_iter()
        .map(|i| interior(&CillerueloField::indexed(1, i).sample, 20.0, 0.05))
        .collect();
    let bad = counts.iter().filter(|&&c| c != 0).count();
    outcome(bad == 0, format!("{bad} of 200 seeds with interior components (max {})", counts.iter().max().unwrap()))
}

fn c2() -> Outcome {
    let nu0 = preset(Preset::Cilleruelo);
    let tilted = preset(Preset::TiltedCilleruelo);
    let vals = [
        diagonal_flip_density(&nu0.clone().with_kappa(Kappa::One)).unwrap(),
        diagonal_flip_density(&nu0).unwrap(),
        flip_density(&tilted, 1).unwrap(),
        flip_density(&tilted, 2).unwrap(),
    ];
    let worst = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    outcome(worst <= 1e-12, format!("max |density| = {worst:e} over {vals:?}"))
}

fn c3() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for p in [Preset::TwoPoint { theta: 0.0 }, Preset::DeltaZero] {
        let rho = Arc::new(preset(p));
        let lmin = rho.gradient_covariance().lambda_min;
        let counts: Vec<u64> = (0..200u64)
            .into_par_iter()
            .map(|i| interior(&FieldSample::sample_shared(&rho, 3, i), 20.0, 1.0 / 16.0))
            .collect();
        let bad = counts.iter().filter(|&&c| c != 0).count();
        ok &= bad == 0 && lmin == 0.0;
        parts.push(format!("{}: {bad}/200 nonzero, lambda_min = {lmin}", p.name()));
    }
    outcome(ok, parts.join("; "))
}

fn c4() -> Outcome {
    let xs = [[0.1, 0.0], [0.0, 0.35], [0.25, 0.25], [0.6, -0.2], [1.3, 0.7]];
    let mut worst = 0.0f64;
    let mut ok = true;
    for rho in [preset(Preset::Cilleruelo), preset(Preset::UniformCircle { k: 64 })] {
        for x in xs {
            let (m, se) = covariance_mc(&rho, x, 100_000, 4);
            let exact = if rho.atoms().len() == 4 {
                0.5 * ((TAU * x[0]).cos() + (TAU * x[1]).cos())
            } else {
                rho.covariance(x)
            };
            let z = (m - exact).abs() / se;
            worst = worst.max(z);
            ok &= z <= 3.0;
        }
    }
    outcome(ok, format!("10 comparisons at M = 1e5, worst |z| = {worst:.2}"))
}

fn flip_check(rho: &SpectralMeasure, axis: u8, seeds: u64) -> (bool, String) {
    let rho = Arc::new(rho.clone());
    let r = 20.0;
    let per: Vec<f64> = (0..seeds)
        .into_par_iter()
        .map(|i| {
            let s = FieldSample::sample_shared(&rho, 5, i);
            let h = 0.5 * s.default_spacing();
            count_flips(&s, Domain::square(r), h, FlipDirection::axis(axis).unwrap()).unwrap() as f64 / (4.0 * r * r)
        })
        .collect();
    let (m, se) = mean_stderr(&per);
    let d = flip_density(&rho, axis).unwrap();
    let z = (m - d).abs() / se;
    (z <= 3.0, format!("axis {axis}: {m:.4} +- {se:.4} vs {d:.4} (z = {z:.2})"))
}

fn c5() -> Outcome {
    let (a, da) = flip_check(&preset(Preset::UniformCircle { k: 64 }), 1, 200);
    let nu0 = preset(Preset::Cilleruelo);
    let (b, db) = flip_check(&nu0, 1, 200);
    let (c, dc) = flip_check(&nu0, 2, 200);
    outcome(a && b && c, format!("uniform_circle(64) {da}; cilleruelo {db}, {dc}"))
}

fn random_measure(rng: &mut ChaCha8Rng) -> SpectralMeasure {
    let pairs = rng.gen_range(1..=8);
    let mut atoms = Vec::new();
    let raw: Vec<f64> = (0..pairs).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    for w in raw {
        let (r, t) = (rng.gen_range(0.05f64..1.0).sqrt(), rng.gen_range(0.0..PI));
        let xi = [r * t.cos(), r * t.sin()];
        atoms.push((xi, 0.5 * w / total));
        atoms.push(([-xi[0], -xi[1]], 0.5 * w / total));
    }
    let kappa = if rng.gen_bool(0.5) { Kappa::TwoPi } else { Kappa::One };
    SpectralMeasure::make_atomic(atoms, kappa).unwrap()
}

fn c6() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for p in [Preset::UniformCircle { k: 64 }, Preset::Arc { a: 0.3, k: 64 }, Preset::Section7ThreePair] {
        let rho = Arc::new(preset(p));
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let segs: Vec<([f64; 2], f64)> =
            (0..100).map(|_| ([rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0)], rng.gen_range(0.0..TAU))).collect();
        let counts: Vec<(f64, f64)> = segs
            .par_iter()
            .enumerate()
            .map(|(i, &(p0, t))| {
                let s = FieldSample::sample_shared(&rho, 6, i as u64);
                let u = [t.cos(), t.sin()];
                let c = count_curve_intersections(&s, p0, [p0[0] + u[0], p0[1] + u[1]], None) as f64;
                (c, curve_intersection_density(&rho, u))
            })
            .collect();
        let diffs: Vec<f64> = counts.iter().map(|(c, d)| c - d).collect();
        let (m, se) = mean_stderr(&diffs);
        let z = m.abs() / se;
        ok &= z <= 3.0;
        let mean_count = counts.iter().map(|c| c.0).sum::<f64>() / 100.0;
        let mean_density = counts.iter().map(|c| c.1).sum::<f64>() / 100.0;
        parts.push(format!("{}: {mean_count:.3} vs {mean_density:.3} (z = {z:.2})", p.name()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(60);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let rho = random_measure(&mut rng);
        for k in 0..36 {
            let t = k as f64 * PI / 36.0;
            let ratio = curve_intersection_density(&rho, [t.cos(), t.sin()]) / (rho.kappa_value() / PI);
            worst = worst.max(ratio);
        }
    }
    ok &= worst <= 1.0 + 1e-12;
    parts.push(format!("sweep of 50 measures: max density / (kappa/pi) = {worst:.4}"));
    outcome(ok, parts.join("; "))
}

fn paired_difference(rep: &EstimatorReport, k: usize) -> (f64, f64) {
    let (ra, rb) = (rep.schedule[k], rep.schedule[k + 1]);
    let d: Vec<f64> = rep.counts[k]
        .iter()
        .zip(&rep.counts[k + 1])
        .map(|(&a, &b)| a as f64 / (4.0 * ra * ra) - b as f64 / (4.0 * rb * rb))
        .collect();
    mean_stderr(&d)
}

fn c7(rep: &EstimatorReport) -> Outcome {
    let (d1, s1) = paired_difference(rep, 0);
    let (d2, s2) = paired_difference(rep, 1);
    let comb = (s1 * s1 + s2 * s2).sqrt();
    let pass = d2.abs() <= d1.abs() + 3.0 * comb;
    outcome(
        pass,
        format!(
            "|D(10,20)| = {:.5} +- {s1:.5}, |D(20,40)| = {:.5} +- {s2:.5}, ratio {:.3}",
            d1.abs(),
            d2.abs(),
            d2.abs() / d1.abs()
        ),
    )
}

fn c8(uniform: &EstimatorReport) -> Outcome {
    let sig = uniform.cns_estimate / uniform.cns_stderr;
    let path: Vec<SpectralMeasure> =
        [PI / 16.0, PI / 8.0, 3.0 * PI / 16.0, FRAC_PI_4].iter().map(|&a| preset(Preset::Arc { a, k: 128 })).collect();
    let table = continuity_experiment(&path, &[10.0, 20.0, 40.0], 200, 8).unwrap();
    let mut mono = true;
    for w in table.rows.windows(2) {
        let e = (w[0].cns_stderr.powi(2) + w[1].cns_stderr.powi(2)).sqrt();
        mono &= w[1].cns >= w[0].cns - 3.0 * e;
    }
    let end = table.rows.last().unwrap();
    let e = (end.cns_stderr.powi(2) + uniform.cns_stderr.powi(2)).sqrt();
    let endpoint = (end.cns - uniform.cns_estimate).abs() <= 3.0 * e;
    let path_str: Vec<String> = table.rows.iter().map(|r| format!("{:.4}+-{:.4}", r.cns, r.cns_stderr)).collect();
    outcome(
        sig >= 5.0 && mono && endpoint,
        format!(
            "c(uniform64) = {:.4} +- {:.4} ({sig:.1} sigma); arc path [{}]; monotone {mono}, endpoint {endpoint}",
            uniform.cns_estimate,
            uniform.cns_stderr,
            path_str.join(", ")
        ),
    )
}

fn c9() -> Outcome {
    let f = section7_field(Section7::F);
    let g = section7_field(Section7::G);
    let (nf, nf_fine) = (interior(&f, 20.0, 0.05), interior(&f, 20.0, 0.025));
    let ng = interior(&g, 20.0, 0.05);
    // density over translated windows
    let windows: Vec<f64> = (0..25)
        .into_par_iter()
        .map(|k| {
            let c = [(k % 5) as f64 * 9.1 - 18.2, (k / 5) as f64 * 9.1 - 18.2];
            let gr = evaluate_grid(&f, Domain::Square { center: c, half: 5.0 }, 0.05, 0).unwrap();
            count_components_plane(&gr).unwrap().interior_components as f64 / 100.0
        })
        .collect();
    let (wm, wse) = mean_stderr(&windows);
    let positive = nf > 0 && nf == nf_fine && wm > 5.0 * wse;
    let patterns = sign_patterns(6, 0.01);
    let moved: Vec<(u64, u64)> = patterns
        .par_iter()
        .map(|eps| {
            (
                interior(&section7_perturbed(Section7::F, eps).unwrap(), 20.0, 0.05),
                interior(&section7_perturbed(Section7::G, eps).unwrap(), 20.0, 0.05),
            )
        })
        .collect();
    let f_stable = moved.iter().all(|m| (m.0 as f64 - nf as f64).abs() <= 0.02 * nf as f64);
    let g_moved = moved.iter().filter(|m| m.1 != ng).count();
    outcome(
        positive && ng == 0 && f_stable && g_moved == 0,
        format!(
            "f: {nf} on D20 (h/2: {nf_fine}), window density {wm:.4} +- {wse:.4}; g: {ng}; \
             f invariant under 64 patterns: {f_stable}; g changes under {g_moved} of 64 patterns \
             (g and grad g vanish at (pi/2, -pi/2))"
        ),
    )
}

fn c10() -> Outcome {
    let mut parts = Vec::new();
    let mut rows = Vec::new();
    for n in [65u64, 325, 1105] {
        let planar = estimate_cns(&mu_n(n).unwrap(), &[10.0, 20.0, 40.0], 200, None, 10).unwrap();
        let t = torus_count_report(n, 200, None, 10, Some((planar.cns_estimate, planar.cns_stderr))).unwrap();
        let (res, se) = (t.residual.unwrap(), t.residual_stderr.unwrap());
        rows.push((res, se, planar.boundary_slope));
        parts.push(format!(
            "n={n}: mean {:.1}, c={:.4}, residual {res:.3} +- {se:.3}, b={:.3}",
            t.mean_total, planar.cns_estimate, planar.boundary_slope
        ));
    }
    // seam crossings (4 sqrt 2) plus the planar boundary term plus noise
    let bmax = rows.iter().fold(0.0f64, |a, r| a.max(r.2.abs()));
    let smax = rows.iter().fold(0.0f64, |a, r| a.max(r.1));
    let c = 4.0 * SQRT_2 + 2.0 * bmax + 3.0 * smax;
    let bounded = rows.iter().all(|r| r.0.abs() <= c);
    let wraps = torus_counts(|i| cilleruelo_torus_field(5, 10, i), 200, 1.0 / 160.0).unwrap();
    let all_wrap = wraps.iter().all(|&(c0, w)| c0 == 0 && (2..=20).contains(&w));
    let (lo, hi) = wraps.iter().fold((u64::MAX, 0), |(a, b), w| (a.min(w.1), b.max(w.1)));
    parts.push(format!("C = {c:.3}; g(0;5): all wrapping {all_wrap}, counts in [{lo}, {hi}]"));
    outcome(bounded && all_wrap, parts.join("; "))
}

fn divisor_r2(n: u64) -> usize {
    let (mut d1, mut d3) = (0i64, 0i64);
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            for e in if d * d == n { vec![d] } else { vec![d, n / d] } {
                match e % 4 {
                    1 => d1 += 1,
                    3 => d3 += 1,
                    _ => {}
                }
            }
        }
        d += 1;
    }
    (4 * (d1 - d3)) as usize
}

fn c11() -> Outcome {
    let mismatches = (1..=10_000u64).filter(|&n| r2(n).unwrap() != divisor_r2(n)).count();
    let mut sym_bad = 0;
    let mut checked = 0;
    for n in (1..=10_000u64).filter(|&n| divisor_r2(n) > 0) {
        checked += 1;
        let lc = lattice_points(n).unwrap();
        let mu = mu_n(n).unwrap();
        let sym = lc.points.iter().all(|&(x, y)| {
            [(-x, y), (x, -y), (y, x)].iter().all(|p| lc.points.binary_search(p).is_ok())
        });
        let w: f64 = mu.atoms().iter().map(|a| a.w).sum();
        if !sym || !mu.is_torus() || (w - 1.0).abs() > 1e-12 || (mu.moment(2, 0) - 0.5).abs() > 1e-12 {
            sym_bad += 1;
        }
    }
    let mut worst = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in [5u64, 65, 2917] {
        let w = sample_torus_wave(n, 11).unwrap();
        let lambda = 4.0 * PI * PI * n as f64;
        for _ in 0..200 {
            let x = [rng.gen::<f64>(), rng.gen::<f64>()];
            let h = w.torus.hessian(x);
            worst = worst.max((h[0][0] + h[1][1] + lambda * w.torus.value(x)).abs());
        }
    }
    outcome(
        mismatches == 0 && sym_bad == 0 && worst <= 1e-8,
        format!("r2 mismatches {mismatches}/10000; symmetry failures {sym_bad}/{checked}; max |lap f + 4 pi^2 n f| = {worst:.2e}"),
    )
}

fn c12() -> Outcome {
    let a = preset(Preset::UniformCircle { k: 128 });
    let b = preset(Preset::UniformCircle { k: 256 });
    let rep = sandwich_check(&a, &b, 10.0, 100, 0.05, None, 12).unwrap();
    // a coupling close enough for the filters to admit draws
    let c = a.rotated(1e-6);
    let near = sandwich_check(&a, &c, 10.0, 20, 0.05, None, 12).unwrap();
    outcome(
        rep.violations == 0 && near.violations == 0,
        format!(
            "{} violations among {} filtered draws (stable {}, close {}, median C1 distance {:.2}); \
             near-identical coupling: {} violations among {} filtered",
            rep.violations, rep.filtered, rep.stable, rep.close, rep.median_c1_distance, near.violations, near.filtered
        ),
    )
}

fn main() {
    let only: Option<Vec<u32>> =
        std::env::var("ACCEPTANCE_ONLY").ok().map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let wanted = |k: u32| only.as_ref().map_or(true, |o| o.contains(&k));
    let budgets: [u64; 13] = [0, 60, 1, 60, 120, 300, 300, 1200, 1800, 300, 1800, 120, 600];
    let names = [
        "",
        "cilleruelo null count",
        "diagonal flip density vanishes",
        "degenerate measures",
        "sampler fidelity",
        "flip density vs counts",
        "curve-intersection density",
        "rate shape",
        "positivity and continuity",
        "three-pair examples",
        "torus consistency",
        "arithmetic oracle",
        "sandwich property",
    ];
    let mut uniform: Option<(EstimatorReport, Duration)> = None;
    let mut unexpected = 0;
    for k in 1..=12u32 {
        if !wanted(k) {
            continue;
        }
        let start = Instant::now();
        let o = match k {
            1 => c1(),
            2 => c2(),
            3 => c3(),
            4 => c4(),
            5 => c5(),
            6 => c6(),
            7 | 8 => {
                if uniform.is_none() {
                    let t = Instant::now();
                    let rep = estimate_cns(&preset(Preset::UniformCircle { k: 64 }), &[10.0, 20.0, 40.0], 200, None, 7)
                        .unwrap();
                    uniform = Some((rep, t.elapsed()));
                }
                let rep = &uniform.as_ref().unwrap().0;
                if k == 7 {
                    c7(rep)
                } else {
                    c8(rep)
                }
            }
            9 => c9(),
            10 => c10(),
            11 => c11(),
            _ => c12(),
        };
        let mut elapsed = start.elapsed();
        if k == 8 {
            // the shared uniform run counts towards both criteria
            elapsed += uniform.as_ref().unwrap().1;
        }
        let in_time = elapsed.as_secs_f64() < budgets[k as usize] as f64;
        let pass = o.pass && in_time;
        let tag = match (pass, KNOWN_FAILURES.contains(&k)) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => {
                unexpected += 1;
                "FAIL"
            }
        };
        println!(
            "criterion {k:2} {tag}: {} | {} | {:.1}s (budget {}s)",
            names[k as usize],
            o.detail,
            elapsed.as_secs_f64(),
            budgets[k as usize]
        );
    }
    if unexpected > 0 {
        std::process::exit(1);
    }
}
