//! Atomic spectral measures on the closed unit disc.
//!
//! A [`SpectralMeasure`] is a finite probability measure invariant under
//! `xi -> -xi`. It determines the covariance `r(x) = sum_k w_k cos(kappa <x, xi_k>)`
//! of the stationary Gaussian field built from it. Continuous measures
//! (uniform circle, arcs) only exist here through equal-weight discretizations.

mod file;
mod preset;

use std::cmp::Ordering;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{NodalError, Result};
use crate::scalar::Real;

pub use file::{AtomRecord, KappaRecord, MeasureFile};
pub use preset::Preset;

/// Frequency convention: the field oscillates like `cos(kappa <x, xi>)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kappa {
    /// `e(t) = exp(2 pi i t)`; unit-circle measures have wavelength 1.
    TwoPi,
    /// Plain `cos(<x, xi>)`; unit-circle measures have wavelength `2 pi`.
    One,
    /// Any other positive multiplier (used to place frequencies outside the
    /// unit disc back inside it after rescaling).
    Custom(f64),
}

impl Kappa {
    pub fn value(self) -> f64 {
        match self {
            Kappa::TwoPi => std::f64::consts::TAU,
            Kappa::One => 1.0,
            Kappa::Custom(k) => k,
        }
    }
}

impl Default for Kappa {
    fn default() -> Self {
        Kappa::TwoPi
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom<F: Real = f64> {
    pub xi: [F; 2],
    pub w: F,
}

/// Where a measure came from, kept for reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub name: String,
    pub params: Vec<(String, f64)>,
}

/// How [`SpectralMeasure::with_options`] treats imperfect input.
#[derive(Debug, Clone, Copy, Default)]
pub struct BuildOptions {
    /// Divide weights by their sum instead of rejecting.
    pub normalize: bool,
    /// Replace `rho` by `(rho + rho(-.)) / 2` instead of rejecting.
    pub symmetrize: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMeasure<F: Real = f64> {
    atoms: Vec<Atom<F>>,
    kappa: Kappa,
    provenance: Option<Provenance>,
    torus: bool,
}

/// 2x2 covariance matrix of the gradient at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceMatrix<F: Real = f64> {
    pub entries: [[F; 2]; 2],
    pub lambda_min: F,
}

impl<F: Real> CovarianceMatrix<F> {
    pub fn from_entries(a: F, b: F, c: F) -> Self {
        let two = F::of(2.0);
        let mean = (a + c) / two;
        let half_gap = ((a - c) / two).hypot(b);
        Self {
            entries: [[a, b], [b, c]],
            lambda_min: (mean - half_gap).max(F::zero()),
        }
    }

    pub fn lambda_max(&self) -> F {
        let [[a, b], [_, c]] = self.entries;
        let two = F::of(2.0);
        (a + c) / two + ((a - c) / two).hypot(b)
    }

    /// Membership in `P_eps`.
    pub fn is_degenerate(&self, eps: F) -> bool {
        self.lambda_min < eps
    }

    /// Unit eigenvector for `lambda_min`: the direction along which a
    /// degenerate field is constant.
    pub fn null_direction(&self) -> [F; 2] {
        let [[a, b], [_, c]] = self.entries;
        let l = self.lambda_min;
        // (A - l I) v = 0; pick the better conditioned row.
        let (v0, v1) = if (a - l).abs() + b.abs() >= (c - l).abs() + b.abs() {
            (-b, a - l)
        } else {
            (c - l, -b)
        };
        let n = v0.hypot(v1);
        if n <= F::zero() {
            [F::one(), F::zero()]
        } else {
            [v0 / n, v1 / n]
        }
    }
}

fn lex_cmp<F: Real>(p: &[F; 2], q: &[F; 2]) -> Ordering {
    p[0].partial_cmp(&q[0])
        .unwrap_or(Ordering::Equal)
        .then(p[1].partial_cmp(&q[1]).unwrap_or(Ordering::Equal))
}

/// Sort and merge atoms whose coordinates agree within `tol`.
fn merge_atoms<F: Real>(mut atoms: Vec<Atom<F>>, tol: F) -> Vec<Atom<F>> {
    atoms.sort_by(|a, b| lex_cmp(&a.xi, &b.xi));
    let mut out: Vec<Atom<F>> = Vec::with_capacity(atoms.len());
    'next: for atom in atoms {
        for prev in out.iter_mut().rev() {
            if atom.xi[0] - prev.xi[0] > tol {
                break;
            }
            if (atom.xi[1] - prev.xi[1]).abs() <= tol {
                prev.w = prev.w + atom.w;
                continue 'next;
            }
        }
        out.push(atom);
    }
    out
}

impl<F: Real> SpectralMeasure<F> {
    /// Strict constructor: weights must already sum to one and the atom set
    /// must be symmetric.
    pub fn make_atomic<I>(atoms: I, kappa: Kappa) -> Result<Self>
    where
        I: IntoIterator<Item = ([F; 2], F)>,
    {
        Self::with_options(atoms, kappa, BuildOptions::default())
    }

    pub fn with_options<I>(atoms: I, kappa: Kappa, opts: BuildOptions) -> Result<Self>
    where
        I: IntoIterator<Item = ([F; 2], F)>,
    {
        let tol = F::tol();
        let mut raw: Vec<Atom<F>> = Vec::new();
        for (xi, w) in atoms {
            if !(xi[0].is_finite() && xi[1].is_finite() && w.is_finite()) || w < F::zero() {
                return Err(NodalError::InvalidAtom(format!(
                    "({}, {}) weight {}",
                    xi[0], xi[1], w
                )));
            }
            if xi[0].hypot(xi[1]) > F::one() + tol {
                return Err(NodalError::SupportOutsideDisc(xi[0].f64(), xi[1].f64()));
            }
            if w > F::zero() {
                raw.push(Atom { xi, w });
            }
        }
        if raw.is_empty() {
            return Err(NodalError::EmptyMeasure);
        }
        if !matches!(kappa, Kappa::TwoPi | Kappa::One) && !(kappa.value() > 0.0) {
            return Err(NodalError::InvalidArgument(format!("kappa {kappa:?}")));
        }
        let total: F = raw.iter().map(|a| a.w).sum();
        if opts.normalize {
            for a in &mut raw {
                a.w = a.w / total;
            }
        } else if (total - F::one()).abs() > tol {
            return Err(NodalError::NotProbability(total.f64()));
        }
        if opts.symmetrize {
            let half = F::of(0.5);
            let mirrored: Vec<Atom<F>> = raw
                .iter()
                .map(|a| Atom { xi: [-a.xi[0], -a.xi[1]], w: a.w * half })
                .collect();
            for a in &mut raw {
                a.w = a.w * half;
            }
            raw.extend(mirrored);
        }
        let atoms = merge_atoms(raw, tol);
        let mut m = Self { atoms, kappa, provenance: None, torus: false };
        m.check_pi_invariance()?;
        m.torus = m.check_torus_symmetry();
        Ok(m)
    }

    fn check_pi_invariance(&self) -> Result<()> {
        let tol = F::tol();
        for a in &self.atoms {
            let partner = self.find_atom([-a.xi[0], -a.xi[1]]);
            match partner {
                Some(j) if (self.atoms[j].w - a.w).abs() <= tol => {}
                _ => return Err(NodalError::NotPiInvariant(a.xi[0].f64(), a.xi[1].f64())),
            }
        }
        Ok(())
    }

    fn check_torus_symmetry(&self) -> bool {
        let tol = F::tol();
        if !self.on_circle() {
            return false;
        }
        let has = |p: [F; 2], w: F| {
            self.find_atom(p).is_some_and(|j| (self.atoms[j].w - w).abs() <= tol)
        };
        self.atoms.iter().all(|a| {
            let [x, y] = a.xi;
            has([-y, x], a.w) && has([x, -y], a.w)
        })
    }

    /// Index of the atom within tolerance of `p`.
    pub fn find_atom(&self, p: [F; 2]) -> Option<usize> {
        let tol = F::tol();
        let start = self.atoms.partition_point(|a| a.xi[0] < p[0] - tol);
        self.atoms[start..]
            .iter()
            .take_while(|a| a.xi[0] <= p[0] + tol)
            .position(|a| (a.xi[1] - p[1]).abs() <= tol)
            .map(|k| k + start)
    }

    pub fn atoms(&self) -> &[Atom<F>] {
        &self.atoms
    }

    pub fn kappa(&self) -> Kappa {
        self.kappa
    }

    pub fn kappa_value(&self) -> F {
        F::of(self.kappa.value())
    }

    /// Same atoms under another frequency convention.
    pub fn with_kappa(mut self, kappa: Kappa) -> Self {
        self.kappa = kappa;
        self
    }

    pub fn provenance(&self) -> Option<&Provenance> {
        self.provenance.as_ref()
    }

    pub fn with_provenance(mut self, name: &str, params: Vec<(String, f64)>) -> Self {
        self.provenance = Some(Provenance { name: name.to_string(), params });
        self
    }

    /// Membership in the torus class: on the unit circle and invariant under
    /// quarter turns and conjugation.
    pub fn is_torus(&self) -> bool {
        self.torus
    }

    pub fn on_circle(&self) -> bool {
        let tol = F::tol();
        self.atoms.iter().all(|a| (a.xi[0].hypot(a.xi[1]) - F::one()).abs() <= tol)
    }

    /// Largest atom norm.
    pub fn support_radius(&self) -> F {
        self.atoms
            .iter()
            .map(|a| a.xi[0].hypot(a.xi[1]))
            .fold(F::zero(), F::max)
    }

    /// Image under rotation by `angle`.
    pub fn rotated(&self, angle: F) -> Self {
        let (s, c) = angle.sin_cos();
        let atoms = self
            .atoms
            .iter()
            .map(|a| Atom {
                xi: [c * a.xi[0] - s * a.xi[1], s * a.xi[0] + c * a.xi[1]],
                w: a.w,
            })
            .collect();
        let atoms = merge_atoms(atoms, F::tol());
        let mut m = Self { atoms, kappa: self.kappa, provenance: None, torus: false };
        m.torus = m.check_torus_symmetry();
        m
    }

    /// `r(x) = sum_k w_k cos(kappa <x, xi_k>)`.
    pub fn covariance(&self, x: [F; 2]) -> F {
        let k = self.kappa_value();
        self.atoms
            .iter()
            .map(|a| a.w * (k * (a.xi[0] * x[0] + a.xi[1] * x[1])).cos())
            .sum()
    }

    /// Covariance with its gradient and Hessian at `x`.
    pub fn covariance_jet(&self, x: [F; 2]) -> (F, [F; 2], [[F; 2]; 2]) {
        let k = self.kappa_value();
        let mut r = F::zero();
        let mut g = [F::zero(); 2];
        let mut h = [[F::zero(); 2]; 2];
        for a in &self.atoms {
            let (s, c) = (k * (a.xi[0] * x[0] + a.xi[1] * x[1])).sin_cos();
            r = r + a.w * c;
            for i in 0..2 {
                g[i] = g[i] - a.w * k * a.xi[i] * s;
                for j in 0..2 {
                    h[i][j] = h[i][j] - a.w * k * k * a.xi[i] * a.xi[j] * c;
                }
            }
        }
        (r, g, h)
    }

    /// Raw moment `int y1^a y2^b d rho`.
    pub fn moment(&self, a: u32, b: u32) -> F {
        self.atoms
            .iter()
            .map(|at| at.w * at.xi[0].powi(a as i32) * at.xi[1].powi(b as i32))
            .sum()
    }

    /// Directional second moment `int <u, y>^2 d rho`.
    pub fn directional_moment(&self, u: [F; 2]) -> F {
        self.atoms
            .iter()
            .map(|a| {
                let p = u[0] * a.xi[0] + u[1] * a.xi[1];
                a.w * p * p
            })
            .sum()
    }

    /// Covariance of the gradient at a point: `kappa^2 int y y^T d rho`.
    pub fn gradient_covariance(&self) -> CovarianceMatrix<F> {
        let k2 = self.kappa_value().powi(2);
        CovarianceMatrix::from_entries(
            k2 * self.moment(2, 0),
            k2 * self.moment(1, 1),
            k2 * self.moment(0, 2),
        )
    }

    /// `sum_j w_j exp(-i k theta_j)` for a measure on the unit circle.
    pub fn fourier_coefficient(&self, k: i32) -> Result<Complex<F>> {
        if !self.on_circle() {
            return Err(NodalError::NotOnCircle);
        }
        Ok(self
            .atoms
            .iter()
            .map(|a| Complex::new(a.xi[0], -a.xi[1]).powi(k) * a.w)
            .fold(Complex::new(F::zero(), F::zero()), |acc, z| acc + z))
    }

    /// Convolution of two circle measures on the circle group.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        if !self.on_circle() || !other.on_circle() {
            return Err(NodalError::NotOnCircle);
        }
        let mut atoms = Vec::with_capacity(self.atoms.len() * other.atoms.len());
        for a in &self.atoms {
            let za = Complex::new(a.xi[0], a.xi[1]);
            for b in &other.atoms {
                let z = za * Complex::new(b.xi[0], b.xi[1]);
                atoms.push(Atom { xi: [z.re, z.im], w: a.w * b.w });
            }
        }
        let atoms = merge_atoms(atoms, F::tol());
        let mut m = Self { atoms, kappa: self.kappa, provenance: None, torus: false };
        m.check_pi_invariance()?;
        m.torus = m.check_torus_symmetry();
        Ok(m)
    }

    /// Integrals of the fixed test dictionary `cos(2 pi (a y1 + b y2))`,
    /// `sin(2 pi (a y1 + b y2))` with `|a|, |b| <= 3`, in a fixed order.
    pub fn dictionary_integrals(&self) -> Vec<F> {
        let tau = F::TAU();
        let mut out = Vec::with_capacity(2 * 49);
        for a in -WEAK_STAR_DEGREE..=WEAK_STAR_DEGREE {
            for b in -WEAK_STAR_DEGREE..=WEAK_STAR_DEGREE {
                let (mut c, mut s) = (F::zero(), F::zero());
                for at in &self.atoms {
                    let t = tau * (F::of(a as f64) * at.xi[0] + F::of(b as f64) * at.xi[1]);
                    let (st, ct) = t.sin_cos();
                    c = c + at.w * ct;
                    s = s + at.w * st;
                }
                out.push(c);
                out.push(s);
            }
        }
        out
    }

    /// Sup distance over the trigonometric test dictionary (version 1:
    /// degree 3). Metrizes weak-* convergence on the unit disc only up to
    /// the resolution of the dictionary.
    pub fn weak_star_distance(&self, other: &Self) -> F {
        self.dictionary_integrals()
            .into_iter()
            .zip(other.dictionary_integrals())
            .map(|(p, q)| (p - q).abs())
            .fold(F::zero(), F::max)
    }

    /// Split into the origin mass and one representative per antipodal pair.
    ///
    /// The representative is the lexicographically larger of `xi` and `-xi`;
    /// the returned weight is that of a single atom of the pair.
    pub fn pair_representatives(&self) -> (F, Vec<([F; 2], F)>) {
        let tol = F::tol();
        let mut origin = F::zero();
        let mut done = vec![false; self.atoms.len()];
        let mut reps = Vec::new();
        for (i, a) in self.atoms.iter().enumerate() {
            if done[i] {
                continue;
            }
            done[i] = true;
            if a.xi[0].hypot(a.xi[1]) <= tol {
                origin = origin + a.w;
                continue;
            }
            let j = self
                .find_atom([-a.xi[0], -a.xi[1]])
                .expect("pi-invariance checked at construction");
            done[j] = true;
            let b = &self.atoms[j];
            let rep = if lex_cmp(&a.xi, &b.xi) == Ordering::Less { b.xi } else { a.xi };
            reps.push((rep, (a.w + b.w) / F::of(2.0)));
        }
        (origin, reps)
    }

    /// Convert the scalar type.
    pub fn cast<G: Real>(&self) -> SpectralMeasure<G> {
        SpectralMeasure {
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom { xi: [G::of(a.xi[0].f64()), G::of(a.xi[1].f64())], w: G::of(a.w.f64()) })
                .collect(),
            kappa: self.kappa,
            provenance: self.provenance.clone(),
            torus: self.torus,
        }
    }
}

/// Degree of the weak-* test dictionary.
pub const WEAK_STAR_DEGREE: i32 = 3;
