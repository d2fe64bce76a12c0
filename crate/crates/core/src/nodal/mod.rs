//! Nodal censuses: components of the zero set and of its complement.
//!
//! Counting works on node signs. Zero-valued nodes (|f| < 1e-14) count as
//! positive. Two nodes of equal sign are joined when they are horizontal or
//! vertical neighbours; inside a cell whose diagonal corners share a sign
//! (a saddle cell) the diagonal pair whose sign agrees with the bilinear
//! value at the cell centre is joined as well, so that sign regions and the
//! marching-squares contours agree.
//!
//! Plane counts use the correspondence between compact zero-set components
//! and bounded sign domains (each compact component is the outer boundary
//! of exactly one of them). Torus counts trace the contours directly.

mod contour;
mod curve;
mod flips;
mod unionfind;

use serde::{Deserialize, Serialize};

use crate::error::{NodalError, Result};
use crate::grid::{Domain, ScalarGrid};
use crate::scalar::Real;

pub use contour::{contour_components, marching_squares, ContourComponents, Segment};
pub use curve::{count_curve_intersections, curve_intersections, grid_line_sign_changes};
pub use flips::{count_flips, flip_points, FlipDirection};
pub use unionfind::{OffsetUnionFind, UnionFind};

/// Node values below this magnitude are treated as positive.
pub const TIE_EPS: f64 = 1e-14;

#[inline]
pub fn positive<F: Real>(v: F) -> bool {
    v > -F::of(TIE_EPS)
}

/// Counts from one grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodalCensus {
    /// `"square"` or `"torus"`.
    pub domain: String,
    /// Half side `R` of a square, or the torus side.
    pub extent: f64,
    pub center: [f64; 2],
    pub h: f64,
    pub n: usize,
    pub seed: Option<u64>,
    /// Compact zero-set components strictly inside the square; contractible
    /// ones on the torus.
    pub interior_components: u64,
    /// Zero-set components meeting the square's boundary (0 on the torus).
    pub boundary_components: u64,
    /// Non-contractible zero-set components on the torus.
    pub wrapping_components: u64,
    /// Sign domains not touching the boundary.
    pub interior_domains: u64,
    pub boundary_domains: u64,
    pub total_domains: u64,
    /// Areas (node count times `h^2`) of the interior sign domains, sorted.
    #[serde(skip)]
    pub domain_areas: Vec<f64>,
    pub s1_flips: Option<u64>,
    pub s2_flips: Option<u64>,
}

impl NodalCensus {
    /// Interior sign domains with area below `delta`.
    pub fn small_domains(&self, delta: f64) -> u64 {
        self.domain_areas.partition_point(|&a| a < delta) as u64
    }

    /// Every zero-set component the census saw.
    pub fn total_components(&self) -> u64 {
        self.interior_components + self.wrapping_components + self.boundary_components
    }
}

/// Node signs with the tie rule applied.
pub fn signs<F: Real>(g: &ScalarGrid<F>) -> Vec<bool> {
    g.values.iter().map(|&v| positive(v)).collect()
}

/// Sign of the bilinear interpolant at the centre of cell `(i, j)`; `i1, j1`
/// are the (possibly wrapped) indices of the far corner.
#[inline]
pub(crate) fn center_positive<F: Real>(g: &ScalarGrid<F>, i: usize, j: usize, i1: usize, j1: usize) -> bool {
    let c = (g.at(i, j) + g.at(i1, j) + g.at(i, j1) + g.at(i1, j1)) / F::of(4.0);
    positive(c)
}

/// Sign-domain labels: one union-find over the nodes, with saddle cells
/// resolved by the centre value. `periodic` wraps both axes.
pub fn label_domains<F: Real>(g: &ScalarGrid<F>, periodic: bool) -> UnionFind {
    let n = g.n;
    let s = signs(g);
    let mut uf = UnionFind::new(n * n);
    let last = if periodic { n } else { n - 1 };
    for j in 0..n {
        for i in 0..n {
            let k = j * n + i;
            if i < last {
                let r = j * n + (i + 1) % n;
                if s[k] == s[r] {
                    uf.union(k, r);
                }
            }
            if j < last {
                let u = ((j + 1) % n) * n + i;
                if s[k] == s[u] {
                    uf.union(k, u);
                }
            }
        }
    }
    for j in 0..last {
        for i in 0..last {
            let (i1, j1) = ((i + 1) % n, (j + 1) % n);
            let (a, b, c, d) = (j * n + i, j * n + i1, j1 * n + i, j1 * n + i1);
            if s[a] == s[d] && s[b] == s[c] && s[a] != s[b] {
                if center_positive(g, i, j, i1, j1) == s[a] {
                    uf.union(a, d);
                } else {
                    uf.union(b, c);
                }
            }
        }
    }
    uf
}

/// Census of a grid over a square.
pub fn count_components_plane<F: Real>(g: &ScalarGrid<F>) -> Result<NodalCensus> {
    let Domain::Square { center, half } = g.domain else {
        return Err(NodalError::DomainMismatch);
    };
    let n = g.n;
    if n < 2 || g.values.len() != n * n {
        return Err(NodalError::EmptyGrid);
    }
    let mut uf = label_domains(g, false);
    let mut touches = vec![false; n * n];
    for k in 0..n {
        for idx in [k, (n - 1) * n + k, k * n, k * n + n - 1] {
            let r = uf.find(idx);
            touches[r] = true;
        }
    }
    let h2 = g.h.f64() * g.h.f64();
    let mut total = 0;
    let mut boundary = 0;
    let mut areas = Vec::new();
    for k in 0..n * n {
        if uf.find(k) == k {
            total += 1;
            if touches[k] {
                boundary += 1;
            } else {
                areas.push(uf.set_size(k) as f64 * h2);
            }
        }
    }
    areas.sort_by(f64::total_cmp);
    let contours = contour_components(g)?;
    Ok(NodalCensus {
        domain: "square".into(),
        extent: half.f64(),
        center: [center[0].f64(), center[1].f64()],
        h: g.h.f64(),
        n,
        seed: g.seed,
        interior_components: areas.len() as u64,
        boundary_components: contours.boundary,
        wrapping_components: 0,
        interior_domains: areas.len() as u64,
        boundary_domains: boundary,
        total_domains: total,
        domain_areas: areas,
        s1_flips: None,
        s2_flips: None,
    })
}

/// Census of a grid over the torus.
pub fn count_components_torus<F: Real>(g: &ScalarGrid<F>) -> Result<NodalCensus> {
    let Domain::Torus { side } = g.domain else {
        return Err(NodalError::DomainMismatch);
    };
    let n = g.n;
    if n < 2 || g.values.len() != n * n {
        return Err(NodalError::EmptyGrid);
    }
    let contours = contour_components(g)?;
    let mut uf = label_domains(g, true);
    let total = (0..n * n).filter(|&k| uf.find(k) == k).count() as u64;
    Ok(NodalCensus {
        domain: "torus".into(),
        extent: side.f64(),
        center: [0.5 * side.f64(); 2],
        h: g.h.f64(),
        n,
        seed: g.seed,
        interior_components: contours.closed,
        boundary_components: 0,
        wrapping_components: contours.wrapping,
        interior_domains: 0,
        boundary_domains: 0,
        total_domains: total,
        domain_areas: Vec::new(),
        s1_flips: None,
        s2_flips: None,
    })
}

/// Dispatch on the grid's domain.
pub fn census<F: Real>(g: &ScalarGrid<F>) -> Result<NodalCensus> {
    if g.domain.is_torus() {
        count_components_torus(g)
    } else {
        count_components_plane(g)
    }
}

/// Interior sign domains of area below `delta`.
pub fn count_small_domains<F: Real>(g: &ScalarGrid<F>, delta: f64) -> Result<u64> {
    Ok(count_components_plane(g)?.small_domains(delta))
}
