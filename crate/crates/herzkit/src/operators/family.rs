//! Finite families of balls standing in for "all balls containing x".

use serde::{Deserialize, Serialize};

use crate::anisotropy::AnisotropyVector;
use crate::error::{Error, Result};
use crate::par;
use crate::sampled::Grid;

/// Strict-membership guard: `y ∈ B(c, r)` iff `Σ y_i² r^{−2a_i} < 1 − GUARD`.
const GUARD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    /// Dyadic radii; centres on a sub-lattice whose stride grows with the
    /// radius.
    Lattice,
    /// Every interval of grid points (one dimension only).
    AllIntervals,
}

#[derive(Debug, Clone, PartialEq)]
struct Level {
    radius: f64,
    /// `r^{−2a_i}`.
    inv: Vec<f64>,
    extent: Vec<usize>,
    strides: Vec<usize>,
    stencil: Vec<isize>,
    centers: Vec<usize>,
}

/// Serializable description of a family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySummary {
    pub kind: FamilyKind,
    pub geometry: AnisotropyVector,
    pub radii: Vec<f64>,
    pub balls: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BallFamily {
    grid: Grid,
    geometry: AnisotropyVector,
    kind: FamilyKind,
    levels: Vec<Level>,
}

/// Radius of the single-point balls: `min_i h_i^{1/a_i}`.
pub fn minimal_radius(grid: &Grid, geometry: &AnisotropyVector) -> f64 {
    grid.spacing()
        .iter()
        .zip(geometry.exponents())
        .map(|(&h, &a)| h.powf(1.0 / a))
        .fold(f64::INFINITY, f64::min)
}

fn inside(inv: &[f64], h: &[f64], d: &[isize]) -> bool {
    let s: f64 = d
        .iter()
        .zip(h)
        .zip(inv)
        .map(|((&di, &hi), &ii)| {
            let y = di as f64 * hi;
            y * y * ii
        })
        .sum();
    s < 1.0 - GUARD
}

impl BallFamily {
    /// Radii `r_min·2^j` for `j = 0..levels`, `r_min` the single-point radius.
    pub fn dyadic(grid: &Grid, geometry: &AnisotropyVector, levels: usize) -> Result<Self> {
        if levels == 0 {
            return Err(Error::Domain("a ball family needs at least one radius".into()));
        }
        let r0 = minimal_radius(grid, geometry);
        let radii: Vec<f64> = (0..levels).map(|j| r0 * 2f64.powi(j as i32)).collect();
        Self::with_radii(grid, geometry, &radii)
    }

    /// Dyadic radii up to the first one whose ball about the origin covers
    /// the whole grid.
    pub fn covering(grid: &Grid, geometry: &AnisotropyVector) -> Result<Self> {
        let r0 = minimal_radius(grid, geometry);
        let corner = grid.half_width().to_vec();
        let mut levels = 1;
        while !geometry.within(&corner, r0 * 2f64.powi(levels as i32 - 1)) {
            levels += 1;
        }
        Self::dyadic(grid, geometry, levels)
    }

    /// Arbitrary radii; the single-point radius is added when missing.
    pub fn with_radii(grid: &Grid, geometry: &AnisotropyVector, radii: &[f64]) -> Result<Self> {
        if grid.dim() != geometry.dim() {
            return Err(Error::Shape(format!(
                "grid dimension {} does not match geometry dimension {}",
                grid.dim(),
                geometry.dim()
            )));
        }
        if radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::Domain("radii must be positive and finite".into()));
        }
        let r0 = minimal_radius(grid, geometry);
        let mut rs: Vec<f64> = radii.iter().copied().filter(|&r| r > r0).collect();
        rs.push(r0);
        rs.sort_by(f64::total_cmp);
        rs.dedup();
        let levels = rs.iter().map(|&r| Self::level(grid, geometry, r)).collect();
        Ok(Self {
            grid: grid.clone(),
            geometry: geometry.clone(),
            kind: FamilyKind::Lattice,
            levels,
        })
    }

    /// Every interval `[x_i, x_j]`, `i ≤ j`, of a one-dimensional grid.
    pub fn all_intervals(grid: &Grid) -> Result<Self> {
        if grid.dim() != 1 {
            return Err(Error::Capability(
                "the exhaustive interval family exists in one dimension only".into(),
            ));
        }
        Ok(Self {
            grid: grid.clone(),
            geometry: AnisotropyVector::isotropic(1),
            kind: FamilyKind::AllIntervals,
            levels: Vec::new(),
        })
    }

    fn level(grid: &Grid, geometry: &AnisotropyVector, r: f64) -> Level {
        let n = grid.dim();
        let h = grid.spacing();
        let a = geometry.exponents();
        let inv: Vec<f64> = a.iter().map(|&ai| r.powf(-2.0 * ai)).collect();
        let extent: Vec<usize> = (0..n)
            .map(|i| ((r.powf(a[i]) / h[i]).ceil() as usize).min(grid.points()[i] - 1))
            .collect();
        let strides: Vec<usize> = (0..n)
            .map(|i| ((r.powf(a[i]) / (2.0 * h[i])).floor() as usize).max(1))
            .collect();
        let mut stencil = Vec::new();
        let mut d = vec![0isize; n];
        let sizes: Vec<usize> = extent.iter().map(|&e| 2 * e + 1).collect();
        let total: usize = sizes.iter().product();
        for mut j in 0..total {
            for i in 0..n {
                d[i] = (j % sizes[i]) as isize - extent[i] as isize;
                j /= sizes[i];
            }
            if inside(&inv, h, &d) {
                stencil.extend_from_slice(&d);
            }
        }
        // Centres: c_i = centre_i + m·s_i inside the grid.
        let axes: Vec<Vec<usize>> = (0..n)
            .map(|i| {
                let c = grid.center_index(i);
                let s = strides[i];
                let lo = c % s;
                (lo..grid.points()[i]).step_by(s).collect()
            })
            .collect();
        let mut centers = Vec::new();
        let counts: Vec<usize> = axes.iter().map(Vec::len).collect();
        let total: usize = counts.iter().product();
        let mut idx = vec![0usize; n];
        for mut j in 0..total {
            for i in 0..n {
                idx[i] = axes[i][j % counts[i]];
                j /= counts[i];
            }
            centers.push(grid.ravel(&idx));
        }
        Level {
            radius: r,
            inv,
            extent,
            strides,
            stencil,
            centers,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn geometry(&self) -> &AnisotropyVector {
        &self.geometry
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    /// The radii; for intervals, every half-length `j·h/2`.
    pub fn radii(&self) -> Vec<f64> {
        match self.kind {
            FamilyKind::Lattice => self.levels.iter().map(|l| l.radius).collect(),
            FamilyKind::AllIntervals => {
                let h = self.grid.spacing()[0];
                (0..self.grid.len()).map(|j| (j as f64 + 1.0) * h / 2.0).collect()
            }
        }
    }

    pub fn ball_count(&self) -> usize {
        match self.kind {
            FamilyKind::Lattice => self.levels.iter().map(|l| l.centers.len()).sum(),
            FamilyKind::AllIntervals => {
                let n = self.grid.len();
                n * (n + 1) / 2
            }
        }
    }

    pub fn summary(&self) -> FamilySummary {
        FamilySummary {
            kind: self.kind,
            geometry: self.geometry.clone(),
            radii: self.radii(),
            balls: self.ball_count(),
        }
    }

    pub(crate) fn check_grid(&self, grid: &Grid) -> Result<()> {
        if grid != &self.grid {
            return Err(Error::Shape("function grid differs from the ball family grid".into()));
        }
        Ok(())
    }

    fn members_into(&self, level: &Level, center: usize, out: &mut Vec<usize>) {
        let n = self.grid.dim();
        let mut idx = vec![0usize; n];
        self.grid.unravel(center, &mut idx);
        out.clear();
        'stencil: for d in level.stencil.chunks_exact(n) {
            let mut flat = 0usize;
            for i in 0..n {
                let y = idx[i] as isize + d[i];
                if y < 0 || y >= self.grid.points()[i] as isize {
                    continue 'stencil;
                }
                flat += y as usize * self.grid.strides()[i];
            }
            out.push(flat);
        }
    }

    /// Applies `f` to the member list of every ball, in parallel; the order
    /// of results is fixed.
    pub(crate) fn map_balls<T, F>(&self, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&[usize]) -> T + Sync + Send,
    {
        match self.kind {
            FamilyKind::Lattice => {
                let jobs: Vec<(usize, usize)> = self
                    .levels
                    .iter()
                    .enumerate()
                    .flat_map(|(l, lv)| lv.centers.iter().map(move |&c| (l, c)))
                    .collect();
                par::map_slice(&jobs, |&(l, c)| {
                    let mut m = Vec::new();
                    self.members_into(&self.levels[l], c, &mut m);
                    f(&m)
                })
            }
            FamilyKind::AllIntervals => {
                let n = self.grid.len();
                let all: Vec<usize> = (0..n).collect();
                let per_lo = par::map_indices(n, |lo| {
                    (lo..n).map(|hi| f(&all[lo..=hi])).collect::<Vec<T>>()
                });
                per_lo.into_iter().flatten().collect()
            }
        }
    }

    /// `sup { g(∫_B v, |B|) : B ∋ x }` at every grid point, where `∫_B v`
    /// and `|B|` are the discrete sums `Σ_{y∈B} v(y)w(y)` and `Σ_{y∈B} w(y)`.
    pub(crate) fn sup_containing<G>(&self, v: &[f64], g: G) -> Vec<f64>
    where
        G: Fn(f64, f64) -> f64 + Sync + Send,
    {
        let w = self.grid.weights();
        match self.kind {
            FamilyKind::Lattice => self.sup_lattice(v, &w, &g),
            FamilyKind::AllIntervals => self.sup_intervals(v, &w, &g),
        }
    }

    fn sup_lattice<G>(&self, v: &[f64], w: &[f64], g: &G) -> Vec<f64>
    where
        G: Fn(f64, f64) -> f64 + Sync + Send,
    {
        let n = self.grid.dim();
        let values: Vec<Vec<f64>> = self
            .levels
            .iter()
            .map(|lv| {
                par::map_slice(&lv.centers, |&c| {
                    let mut m = Vec::new();
                    self.members_into(lv, c, &mut m);
                    let (s, mu) = m
                        .iter()
                        .fold((0.0, 0.0), |(s, mu), &y| (s + v[y] * w[y], mu + w[y]));
                    g(s, mu)
                })
            })
            .collect();
        let h = self.grid.spacing();
        let pts = self.grid.points();
        par::map_indices(self.grid.len(), |x| {
            let mut idx = vec![0usize; n];
            self.grid.unravel(x, &mut idx);
            let mut best = f64::NEG_INFINITY;
            let mut d = vec![0isize; n];
            let mut lo = vec![0usize; n];
            let mut cnt = vec![0usize; n];
            let mut cur = vec![0usize; n];
            for (lv, vals) in self.levels.iter().zip(&values) {
                // Lattice coordinates m_i with |c_i − x_i| ≤ extent_i.
                let mut empty = false;
                for i in 0..n {
                    let s = lv.strides[i];
                    let base = self.grid.center_index(i) % s;
                    let from = idx[i].saturating_sub(lv.extent[i]).max(base);
                    let to = (idx[i] + lv.extent[i]).min(pts[i] - 1);
                    let first = base + (from - base).div_ceil(s) * s;
                    if first > to {
                        empty = true;
                        break;
                    }
                    lo[i] = first;
                    cnt[i] = (to - first) / s + 1;
                }
                if empty {
                    continue;
                }
                let axis_count: Vec<usize> = (0..n)
                    .map(|i| (pts[i] - 1 - (self.grid.center_index(i) % lv.strides[i])) / lv.strides[i] + 1)
                    .collect();
                let total: usize = cnt.iter().product();
                for mut j in 0..total {
                    for i in 0..n {
                        cur[i] = lo[i] + (j % cnt[i]) * lv.strides[i];
                        d[i] = cur[i] as isize - idx[i] as isize;
                        j /= cnt[i];
                    }
                    if !inside(&lv.inv, h, &d) {
                        continue;
                    }
                    // Position of `cur` in the level's centre list.
                    let mut pos = 0usize;
                    let mut mul = 1usize;
                    for i in 0..n {
                        let base = self.grid.center_index(i) % lv.strides[i];
                        pos += (cur[i] - base) / lv.strides[i] * mul;
                        mul *= axis_count[i];
                    }
                    best = best.max(vals[pos]);
                }
            }
            best
        })
    }

    fn sup_intervals<G>(&self, v: &[f64], w: &[f64], g: &G) -> Vec<f64>
    where
        G: Fn(f64, f64) -> f64 + Sync + Send,
    {
        let n = self.grid.len();
        let mut ps = vec![0.0; n + 1];
        let mut pw = vec![0.0; n + 1];
        for i in 0..n {
            ps[i + 1] = ps[i] + v[i] * w[i];
            pw[i + 1] = pw[i] + w[i];
        }
        // For each left end, the suffix maximum over right ends ≥ x gives
        // the best interval [lo, hi ≥ x]; the max over lo ≤ x follows.
        let chunks = 64usize;
        let per = n.div_ceil(chunks);
        let partial = par::map_indices(chunks, |c| {
            let mut out = vec![f64::NEG_INFINITY; n];
            let mut run = vec![0.0; n];
            for lo in (c * per)..((c + 1) * per).min(n) {
                let mut m = f64::NEG_INFINITY;
                for hi in (lo..n).rev() {
                    m = m.max(g(ps[hi + 1] - ps[lo], pw[hi + 1] - pw[lo]));
                    run[hi] = m;
                }
                for x in lo..n {
                    out[x] = out[x].max(run[x]);
                }
            }
            out
        });
        let mut out = vec![f64::NEG_INFINITY; n];
        for p in partial {
            for (o, v) in out.iter_mut().zip(p) {
                *o = o.max(v);
            }
        }
        out
    }
}
