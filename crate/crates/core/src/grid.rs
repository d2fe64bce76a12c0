//! Regular node lattices of field values over a square or the unit torus.

use std::io::{self, BufRead, Write};

use rayon::prelude::*;

use crate::error::{NodalError, Result};
use crate::field::FieldSample;
use crate::scalar::Real;
use crate::spectral::Kappa;

/// Region a grid covers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain<F: Real = f64> {
    /// `center + [-half, half]^2`.
    Square { center: [F; 2], half: F },
    /// `[0, side)^2` with periodic identification.
    Torus { side: F },
}

impl<F: Real> Domain<F> {
    /// The square `[-r, r]^2`.
    pub fn square(r: F) -> Self {
        Domain::Square { center: [F::zero(); 2], half: r }
    }

    /// The unit torus `[0, 1)^2`.
    pub fn unit_torus() -> Self {
        Domain::Torus { side: F::one() }
    }

    pub fn is_torus(&self) -> bool {
        matches!(self, Domain::Torus { .. })
    }

    pub fn area(&self) -> F {
        match *self {
            Domain::Square { half, .. } => F::of(4.0) * half * half,
            Domain::Torus { side } => side * side,
        }
    }

    /// Number of nodes per side at spacing `h`, and the spacing actually used.
    pub fn resolution(&self, h: F) -> (usize, F) {
        match *self {
            Domain::Square { half, .. } => {
                let n = ((half + half) / h + F::of(1e-9)).floor().to_usize().unwrap_or(0) + 1;
                (n, h)
            }
            Domain::Torus { side } => {
                let n = (side / h).round().to_usize().unwrap_or(1).max(1);
                (n, side / F::of(n as f64))
            }
        }
    }

    fn first_node(&self) -> [F; 2] {
        match *self {
            Domain::Square { center, half } => [center[0] - half, center[1] - half],
            Domain::Torus { .. } => [F::zero(); 2],
        }
    }
}

/// Field values on an `n x n` node lattice, stored row by row (`y` major).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarGrid<F: Real = f64> {
    pub domain: Domain<F>,
    pub h: F,
    pub n: usize,
    pub values: Vec<F>,
    /// `[d/dx, d/dy]` when evaluated with order >= 1.
    pub grad: Option<[Vec<F>; 2]>,
    /// `[d2/dx2, d2/dxdy, d2/dy2]` when evaluated with order 2.
    pub hess: Option<[Vec<F>; 3]>,
    /// Set when `h` exceeds a twelfth of the shortest wavelength.
    pub coarse: bool,
    pub seed: Option<u64>,
    pub kappa: Option<Kappa>,
}

impl<F: Real> ScalarGrid<F> {
    fn empty(domain: Domain<F>, h: F) -> Result<Self> {
        if !(h > F::zero()) {
            return Err(NodalError::InvalidArgument(format!("grid spacing {h}")));
        }
        let (n, h) = domain.resolution(h);
        if n < 2 {
            return Err(NodalError::EmptyGrid);
        }
        Ok(Self {
            domain,
            h,
            n,
            values: Vec::new(),
            grad: None,
            hess: None,
            coarse: false,
            seed: None,
            kappa: None,
        })
    }

    /// Coordinates of node `(i, j)`.
    #[inline]
    pub fn node(&self, i: usize, j: usize) -> [F; 2] {
        let o = self.domain.first_node();
        [o[0] + F::of(i as f64) * self.h, o[1] + F::of(j as f64) * self.h]
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> F {
        self.values[j * self.n + i]
    }

    /// Tabulate an arbitrary function.
    pub fn from_fn(domain: Domain<F>, h: F, f: impl Fn([F; 2]) -> F + Sync) -> Result<Self> {
        let mut g = Self::empty(domain, h)?;
        let n = g.n;
        let mut values = vec![F::zero(); n * n];
        values.par_chunks_mut(n).enumerate().for_each(|(j, row)| {
            for (i, v) in row.iter_mut().enumerate() {
                *v = f(g.node(i, j));
            }
        });
        g.values = values;
        Ok(g)
    }

    /// Sub-grid on `center + [-half, half]^2`, which must sit on the node lattice.
    pub fn crop(&self, center: [F; 2], half: F) -> Result<Self> {
        let Domain::Square { .. } = self.domain else {
            return Err(NodalError::DomainMismatch);
        };
        let o = self.domain.first_node();
        let lo = [(center[0] - half - o[0]) / self.h, (center[1] - half - o[1]) / self.h];
        let len = (half + half) / self.h;
        let snap = |x: F| -> Result<usize> {
            let r = x.round();
            if (x - r).abs() > F::of(1e-6) || r < F::zero() {
                return Err(NodalError::DomainMismatch);
            }
            Ok(r.to_usize().unwrap())
        };
        let (i0, j0, m) = (snap(lo[0])?, snap(lo[1])?, snap(len)? + 1);
        if i0 + m > self.n || j0 + m > self.n || m < 2 {
            return Err(NodalError::DomainMismatch);
        }
        let pick = |v: &Vec<F>| -> Vec<F> {
            (j0..j0 + m).flat_map(|j| v[j * self.n + i0..j * self.n + i0 + m].iter().copied()).collect()
        };
        Ok(Self {
            domain: Domain::Square { center, half },
            h: self.h,
            n: m,
            values: pick(&self.values),
            grad: self.grad.as_ref().map(|[a, b]| [pick(a), pick(b)]),
            hess: self.hess.as_ref().map(|[a, b, c]| [pick(a), pick(b), pick(c)]),
            coarse: self.coarse,
            seed: self.seed,
            kappa: self.kappa,
        })
    }

    /// CSV dump: one `#` header line, then one row of values per `y` node.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let dom = match self.domain {
            Domain::Square { center, half } => {
                format!("domain=square center={},{} R={}", center[0], center[1], half)
            }
            Domain::Torus { side } => format!("domain=torus side={side}"),
        };
        let seed = self.seed.map_or("none".to_string(), |s| s.to_string());
        let kappa = self.kappa.map_or("none".to_string(), |k| k.value().to_string());
        writeln!(w, "# {dom} h={} n={} seed={seed} kappa={kappa}", self.h, self.n)?;
        for row in self.values.chunks(self.n) {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }

    /// Read back a dump written by [`write_csv`](Self::write_csv).
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let bad = |m: &str| NodalError::Format(m.to_string());
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| bad("empty grid file"))?.map_err(|e| bad(&e.to_string()))?;
        let field = |key: &str| -> Option<String> {
            header
                .trim_start_matches('#')
                .split_whitespace()
                .find_map(|kv| kv.strip_prefix(key).and_then(|v| v.strip_prefix('=')).map(str::to_string))
        };
        let num = |s: &str| -> Result<F> { s.parse::<f64>().map(F::of).map_err(|_| bad(s)) };
        let h = num(&field("h").ok_or_else(|| bad("missing h"))?)?;
        let domain = match field("domain").as_deref() {
            Some("square") => {
                let c = field("center").ok_or_else(|| bad("missing center"))?;
                let (cx, cy) = c.split_once(',').ok_or_else(|| bad("center"))?;
                Domain::Square {
                    center: [num(cx)?, num(cy)?],
                    half: num(&field("R").ok_or_else(|| bad("missing R"))?)?,
                }
            }
            Some("torus") => Domain::Torus { side: num(&field("side").ok_or_else(|| bad("missing side"))?)? },
            _ => return Err(bad("unknown domain")),
        };
        let mut values = Vec::new();
        for line in lines {
            let line = line.map_err(|e| bad(&e.to_string()))?;
            for v in line.split(',').filter(|v| !v.is_empty()) {
                values.push(num(v)?);
            }
        }
        let n = (values.len() as f64).sqrt().round() as usize;
        if n * n != values.len() || n < 2 {
            return Err(bad("grid is not square"));
        }
        Ok(Self {
            domain,
            h,
            n,
            values,
            grad: None,
            hess: None,
            coarse: false,
            seed: field("seed").and_then(|s| s.parse().ok()),
            kappa: field("kappa").and_then(|s| s.parse::<f64>().ok()).map(|k| match k {
                k if k == 1.0 => Kappa::One,
                k if k == std::f64::consts::TAU => Kappa::TwoPi,
                k => Kappa::Custom(k),
            }),
        })
    }
}

/// Evaluate a sample on the lattice of `domain` with spacing `h`.
///
/// `order` 0 stores values only, 1 adds the gradient, 2 adds the Hessian.
/// Every stored number is bit-identical to the pointwise evaluation at
/// [`ScalarGrid::node`]. A spacing coarser than a twelfth of the shortest
/// wavelength is accepted but flagged in [`ScalarGrid::coarse`].
pub fn evaluate_grid<F: Real>(s: &FieldSample<F>, domain: Domain<F>, h: F, order: u8) -> Result<ScalarGrid<F>> {
    if order > 2 {
        return Err(NodalError::InvalidArgument(format!("derivative order {order}")));
    }
    let mut g = ScalarGrid::empty(domain, h)?;
    g.seed = Some(s.seed());
    g.kappa = Some(s.kappa());
    let kmax = s.max_frequency();
    if kmax > F::zero() && g.h > F::TAU() / kmax / F::of(12.0) {
        g.coarse = true;
        log::warn!("grid spacing {} is coarser than 12 nodes per wavelength", g.h);
    }
    let n = g.n;
    let terms = s.terms();
    let wave = s.wave_vectors();
    let nt = terms.len();
    // cos/sin of the x phase, per column and term
    let mut cols = vec![(F::zero(), F::zero()); n * nt];
    for i in 0..n {
        let x = g.node(i, 0)[0];
        for (t, k) in wave.iter().enumerate() {
            let (su, cu) = (k[0] * x).sin_cos();
            cols[i * nt + t] = (cu, su);
        }
    }
    let constant = s.constant();
    let width = [1, 3, 6][order as usize];
    let mut out = vec![F::zero(); n * n * width];
    out.par_chunks_mut(n * width).enumerate().for_each(|(j, row)| {
        let y = g.node(0, j)[1];
        let pq: Vec<(F, F)> = terms
            .iter()
            .zip(wave)
            .map(|(t, k)| {
                let (sv, cv) = (k[1] * y).sin_cos();
                (t.a * cv + t.b * sv, t.b * cv - t.a * sv)
            })
            .collect();
        for i in 0..n {
            let col = &cols[i * nt..(i + 1) * nt];
            let cell = &mut row[i * width..(i + 1) * width];
            let mut v = F::zero();
            let mut gx = F::zero();
            let mut gy = F::zero();
            let mut h = [F::zero(); 3];
            for t in 0..nt {
                let (cu, su) = col[t];
                let (p, q) = pq[t];
                let c = cu * p + su * q;
                let s = terms[t].scale;
                v = v + s * c;
                if order >= 1 {
                    let d = cu * q - su * p;
                    let k = wave[t];
                    let sd = s * d;
                    gx = gx + sd * k[0];
                    gy = gy + sd * k[1];
                    if order == 2 {
                        let sc = s * c;
                        h[0] = h[0] - sc * k[0] * k[0];
                        h[1] = h[1] - sc * k[0] * k[1];
                        h[2] = h[2] - sc * k[1] * k[1];
                    }
                }
            }
            cell[0] = v + constant;
            if order >= 1 {
                cell[1] = gx;
                cell[2] = gy;
            }
            if order == 2 {
                cell[3..6].copy_from_slice(&h);
            }
        }
    });
    let column = |c: usize| -> Vec<F> { out.iter().skip(c).step_by(width).copied().collect() };
    g.values = column(0);
    if order >= 1 {
        g.grad = Some([column(1), column(2)]);
    }
    if order == 2 {
        g.hess = Some([column(3), column(4), column(5)]);
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldSample;
    use crate::spectral::Preset;

    #[test]
    fn square_dimensions() {
        let g = ScalarGrid::from_fn(Domain::square(1.0), 0.5, |x| x[0]).unwrap();
        assert_eq!(g.n, 5);
        assert_eq!(g.values.len(), 25);
        assert_eq!(g.node(4, 4), [1.0, 1.0]);
        assert_eq!(g.at(0, 3), -1.0);
        assert!(matches!(ScalarGrid::from_fn(Domain::square(1.0), 0.0, |_| 0.0), Err(NodalError::InvalidArgument(_))));
    }

    #[test]
    fn grid_matches_pointwise_bitwise() {
        let rho = Preset::UniformCircle { k: 20 }.build::<f64>().unwrap();
        let s = FieldSample::sample(&rho, 4);
        let g = evaluate_grid(&s, Domain::square(3.0), 0.05, 2).unwrap();
        let [gx, gy] = g.grad.as_ref().unwrap();
        let [hxx, hxy, hyy] = g.hess.as_ref().unwrap();
        for (i, j) in [(0, 0), (17, 93), (120, 5), (g.n - 1, g.n - 1), (60, 60)] {
            let x = g.node(i, j);
            let jet = s.jet(x);
            let k = j * g.n + i;
            assert_eq!(g.values[k], s.value(x));
            assert_eq!(g.values[k], jet.value);
            assert_eq!([gx[k], gy[k]], s.gradient(x));
            assert_eq!([hxx[k], hxy[k], hyy[k]], [jet.hess[0][0], jet.hess[0][1], jet.hess[1][1]]);
        }
        assert!(!g.coarse);
        assert!(evaluate_grid(&s, Domain::square(3.0), 0.1, 0).unwrap().coarse);
    }

    #[test]
    fn torus_periodicity() {
        let lattice: Vec<_> = [[1.0, 0.0], [0.0, 1.0], [3.0, 4.0], [4.0, -3.0]]
            .iter()
            .map(|&xi| crate::field::Term { xi, scale: 0.5f64, a: 0.3, b: -1.1 })
            .collect();
        let s = FieldSample::from_terms(lattice, 0.0, 0.0, Kappa::TwoPi);
        let g = evaluate_grid(&s, Domain::unit_torus(), 1.0 / 64.0, 0).unwrap();
        assert_eq!(g.n, 64);
        for j in 0..g.n {
            let x = g.node(0, j);
            assert!((s.value(x) - s.value([x[0] + 1.0, x[1]])).abs() < 1e-12);
            assert!((s.value(x) - s.value([x[0], x[1] + 1.0])).abs() < 1e-12);
        }
    }

    #[test]
    fn crop_and_csv_roundtrip() {
        let g = ScalarGrid::from_fn(Domain::square(2.0), 0.25, |x| x[0] * 10.0 + x[1]).unwrap();
        let c = g.crop([0.5, -0.5], 1.0).unwrap();
        assert_eq!(c.n, 9);
        assert_eq!(c.at(0, 0), g.at(6, 2));
        assert_eq!(c.node(0, 0), [-0.5, -1.5]);
        assert!(g.crop([0.1, 0.0], 1.0).is_err());
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let back = ScalarGrid::<f64>::read_csv(&buf[..]).unwrap();
        assert_eq!(back.values, g.values);
        assert_eq!(back.domain, g.domain);
        assert_eq!(back.h, g.h);
    }
}
