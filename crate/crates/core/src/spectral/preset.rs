use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};
use std::str::FromStr;

use super::{Kappa, SpectralMeasure};
use crate::error::{NodalError, Result};
use crate::scalar::Real;

/// Named measures used throughout the experiments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Preset {
    /// Quarter mass at `(+-1, 0)` and `(0, +-1)`.
    Cilleruelo,
    /// Quarter mass at angles `pi/4 + k pi/2`.
    TiltedCilleruelo,
    /// `k` equispaced atoms at angles `2 pi j / k`.
    UniformCircle { k: usize },
    /// Arc-length measure on `[-a, a]`, symmetrised under quarter turns,
    /// discretized into `k` atoms (`k / 4` midpoint atoms per arc).
    Arc { a: f64, k: usize },
    /// Half mass at `+-(cos theta, sin theta)`.
    TwoPoint { theta: f64 },
    /// Unit mass at the origin.
    DeltaZero,
    /// Pairs `+-(1, 0)`, `+-(3, 0)`, `+-(0, 1)` scaled by 1/3, kappa = 3.
    Section7ThreePair,
    /// Pairs `+-(1, 0)`, `+-(0, 1)`, `+-(1, 1)/sqrt 2`, kappa = 1.
    Section7SixPoint,
}

impl Preset {
    pub fn name(&self) -> &'static str {
        match self {
            Preset::Cilleruelo => "cilleruelo",
            Preset::TiltedCilleruelo => "tilted_cilleruelo",
            Preset::UniformCircle { .. } => "uniform_circle",
            Preset::Arc { .. } => "arc_nu_a",
            Preset::TwoPoint { .. } => "two_point",
            Preset::DeltaZero => "delta_zero",
            Preset::Section7ThreePair => "section7_three_pair",
            Preset::Section7SixPoint => "section7_monochromatic_six_point",
        }
    }

    pub fn params(&self) -> Vec<(String, f64)> {
        match *self {
            Preset::UniformCircle { k } => vec![("K".into(), k as f64)],
            Preset::Arc { a, k } => vec![("a".into(), a), ("K".into(), k as f64)],
            Preset::TwoPoint { theta } => vec![("theta".into(), theta)],
            _ => Vec::new(),
        }
    }

    /// Build from a name and a parameter lookup (`K`, `a`, `theta`).
    pub fn from_parts(name: &str, param: impl Fn(&str) -> Option<f64>) -> Result<Self> {
        let need = |key: &str| {
            param(key).ok_or_else(|| NodalError::InvalidPresetParam(format!("{name} needs `{key}`")))
        };
        let count = |key: &str| -> Result<usize> {
            let v = need(key)?;
            if v.fract() != 0.0 || v < 0.0 {
                return Err(NodalError::InvalidPresetParam(format!("{key} = {v} is not a count")));
            }
            Ok(v as usize)
        };
        Ok(match name {
            "cilleruelo" => Preset::Cilleruelo,
            "tilted_cilleruelo" => Preset::TiltedCilleruelo,
            "uniform_circle" | "uniform" => Preset::UniformCircle { k: count("K")? },
            "arc_nu_a" | "arc" => Preset::Arc { a: need("a")?, k: count("K")? },
            "two_point" => Preset::TwoPoint { theta: param("theta").unwrap_or(0.0) },
            "delta_zero" => Preset::DeltaZero,
            "section7_three_pair" => Preset::Section7ThreePair,
            "section7_monochromatic_six_point" | "section7_six_point" => Preset::Section7SixPoint,
            other => return Err(NodalError::UnknownPreset(other.to_string())),
        })
    }

    pub fn build<F: Real>(&self) -> Result<SpectralMeasure<F>> {
        let h = FRAC_1_SQRT_2;
        let (pairs, kappa): (Vec<[f64; 2]>, Kappa) = match *self {
            Preset::Cilleruelo => (vec![[1.0, 0.0], [0.0, 1.0]], Kappa::TwoPi),
            Preset::TiltedCilleruelo => (vec![[h, h], [h, -h]], Kappa::TwoPi),
            Preset::UniformCircle { k } => {
                if k < 4 || k % 2 != 0 {
                    return Err(NodalError::InvalidPresetParam(format!(
                        "uniform_circle needs an even K >= 4, got {k}"
                    )));
                }
                let pairs = (0..k / 2)
                    .map(|j| unit(std::f64::consts::TAU * j as f64 / k as f64))
                    .collect();
                (pairs, Kappa::TwoPi)
            }
            Preset::Arc { a, k } => {
                if k < 4 || k % 4 != 0 {
                    return Err(NodalError::InvalidPresetParam(format!(
                        "arc_nu_a needs K >= 4 divisible by 4, got {k}"
                    )));
                }
                if !(0.0..=FRAC_PI_4 + 1e-15).contains(&a) {
                    return Err(NodalError::InvalidPresetParam(format!("arc half-width {a} not in [0, pi/4]")));
                }
                (arc_pairs(a, k / 4), Kappa::TwoPi)
            }
            Preset::TwoPoint { theta } => (vec![unit(theta)], Kappa::TwoPi),
            Preset::DeltaZero => {
                let m = SpectralMeasure::make_atomic([([F::zero(), F::zero()], F::one())], Kappa::TwoPi)?;
                return Ok(m.with_provenance(self.name(), self.params()));
            }
            Preset::Section7ThreePair => (
                vec![[1.0 / 3.0, 0.0], [1.0, 0.0], [0.0, 1.0 / 3.0]],
                Kappa::Custom(3.0),
            ),
            Preset::Section7SixPoint => (vec![[1.0, 0.0], [0.0, 1.0], [h, h]], Kappa::One),
        };
        Ok(from_pairs::<F>(&pairs, kappa).with_provenance(self.name(), self.params()))
    }
}

/// `"cilleruelo"`, `"uniform:64"`, `"arc:0.3927:128"`, `"two_point:0.5"`, ...
impl FromStr for Preset {
    type Err = NodalError;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split(':');
        let name = parts.next().unwrap_or_default();
        let nums: Vec<f64> = parts
            .map(|p| {
                p.parse::<f64>()
                    .map_err(|_| NodalError::InvalidPresetParam(format!("`{p}` in `{s}`")))
            })
            .collect::<Result<_>>()?;
        let keys: &[&str] = match name {
            "uniform_circle" | "uniform" => &["K"],
            "arc_nu_a" | "arc" => &["a", "K"],
            "two_point" => &["theta"],
            _ => &[],
        };
        if nums.len() > keys.len() {
            return Err(NodalError::InvalidPresetParam(format!("too many parameters in `{s}`")));
        }
        Preset::from_parts(name, |key| {
            keys.iter().position(|k| *k == key).and_then(|i| nums.get(i).copied())
        })
    }
}

/// `(cos t, sin t)` with exact zeros on the axes.
fn unit(t: f64) -> [f64; 2] {
    let (s, c) = t.sin_cos();
    let snap = |v: f64| if v.abs() < 1e-15 { 0.0 } else { v };
    [snap(c), snap(s)]
}

/// Representatives of the arc discretization: midpoints of `m` sub-arcs of
/// `[-a, a]`, rotated by quarter turns. Only two of the four quarter-turn
/// images are returned since the other two are antipodes.
fn arc_pairs(a: f64, m: usize) -> Vec<[f64; 2]> {
    let step = 2.0 * a / m as f64;
    let mut base = Vec::with_capacity(m);
    for j in 0..m / 2 {
        let t = a - (j as f64 + 0.5) * step;
        let [c, s] = unit(t);
        base.push([c, s]);
        base.push([c, -s]);
    }
    if m % 2 == 1 {
        base.push([1.0, 0.0]);
    }
    base.iter().flat_map(|&[c, s]| [[c, s], [-s, c]]).collect()
}

/// Equal-weight measure on `+-p` for every `p` in `pairs`.
fn from_pairs<F: Real>(pairs: &[[f64; 2]], kappa: Kappa) -> SpectralMeasure<F> {
    let w = F::one() / F::of(2.0 * pairs.len() as f64);
    let atoms: Vec<([F; 2], F)> = pairs
        .iter()
        .flat_map(|&[x, y]| {
            let p = [F::of(x), F::of(y)];
            [(p, w), ([-p[0], -p[1]], w)]
        })
        .collect();
    SpectralMeasure::make_atomic(atoms, kappa).expect("preset atoms are a symmetric probability measure")
}
