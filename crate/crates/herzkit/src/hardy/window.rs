//! Smooth windows `φ`, the radial maximal function `M⁰f = sup_k |f * φ_{2^k}|`
//! and the Schwartz seminorms.

use std::fmt;
use std::sync::Arc;

use statrs::function::erf::erf;

use crate::anisotropy::AnisotropyVector;
use crate::conv::{axis_convolve, OffsetKernel};
use crate::error::{Error, Result};
use crate::herz::{HerzParams, HerzSpace};
use crate::mixed_norm::ExponentVector;
use crate::sampled::{integrate_values, DyadicWindow, Grid, SampledFunction};

/// Highest derivative order the finite-difference seminorm supports.
pub const MAX_SEMINORM_ORDER: usize = 8;

pub type Profile = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum WindowProfile {
    /// `π^{−n/2} e^{−|x|²}`, applied through exact cell averages.
    Gaussian,
    Custom {
        name: String,
        phi: Profile,
    },
}

impl fmt::Debug for WindowProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WindowProfile::Gaussian => write!(f, "Gaussian"),
            WindowProfile::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

/// `φ` with the anisotropic dilations `φ_t(x) = t^{−v} φ(t^{−a} x)` over the
/// scales `t = 2^k`, `k` in `scales`.
#[derive(Debug, Clone)]
pub struct SchwartzWindow {
    pub profile: WindowProfile,
    pub anisotropy: AnisotropyVector,
    /// Seminorm order `N`.
    pub order: usize,
    pub scales: DyadicWindow,
}

impl SchwartzWindow {
    pub fn gaussian(anisotropy: AnisotropyVector, order: usize, scales: DyadicWindow) -> Self {
        Self {
            profile: WindowProfile::Gaussian,
            anisotropy,
            order,
            scales,
        }
    }

    pub fn custom<F>(name: impl Into<String>, anisotropy: AnisotropyVector, order: usize, scales: DyadicWindow, phi: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self {
            profile: WindowProfile::Custom {
                name: name.into(),
                phi: Arc::new(phi),
            },
            anisotropy,
            order,
            scales,
        }
    }

    /// Profile name, order and scales, for reports.
    pub fn summary(&self) -> serde_json::Value {
        serde_json::json!({
            "profile": format!("{:?}", self.profile),
            "order": self.order,
            "scales": self.scales,
        })
    }

    pub fn dim(&self) -> usize {
        self.anisotropy.dim()
    }

    pub fn phi(&self, x: &[f64]) -> f64 {
        match &self.profile {
            WindowProfile::Gaussian => {
                let n = x.len() as f64;
                std::f64::consts::PI.powf(-n / 2.0) * (-x.iter().map(|v| v * v).sum::<f64>()).exp()
            }
            WindowProfile::Custom { phi, .. } => phi(x),
        }
    }

    /// `φ_t(x) = t^{−v} φ(t^{−a} x)`.
    pub fn phi_t(&self, t: f64, x: &[f64]) -> f64 {
        let y: Vec<f64> = x
            .iter()
            .zip(self.anisotropy.exponents())
            .map(|(&xi, &ai)| xi * t.powf(-ai))
            .collect();
        t.powf(-self.anisotropy.v()) * self.phi(&y)
    }

    pub fn sample(&self, grid: &Grid) -> Result<SampledFunction> {
        SampledFunction::from_fn(grid, "phi", |x| self.phi(x))
    }

    /// Quadrature mass of `φ` and its order-`N` seminorm on `grid`.
    pub fn validate(&self, grid: &Grid, tol: f64) -> Result<(f64, f64)> {
        let phi = self.sample(grid)?;
        let mass = integrate_values(grid, phi.values());
        if (mass - 1.0).abs() > tol {
            return Err(Error::Precondition(format!("window mass {mass} differs from 1")));
        }
        let semi = schwartz_seminorm(&phi, self.order, &self.anisotropy)?;
        Ok((mass, semi))
    }
}

/// `N = ⌊v (a₊/a₋)(1 + 2/p₋) + v + 2a₊⌋ + 1`, `p₋ = min(1, p_1, …, p_n)`.
pub fn n_index(p: &ExponentVector, a: &AnisotropyVector) -> u32 {
    let pm = p.min().min(1.0);
    let v = a.v();
    let x = v * (a.a_plus() / a.a_minus()) * (1.0 + 2.0 / pm) + v + 2.0 * a.a_plus();
    x.floor() as u32 + 1
}

/// `max_x ⟨x⟩_a^N max_{|β|≤N} |∂^β φ(x)|`, derivatives by repeated central
/// differences, over the points where every stencil fits in the grid.
pub fn schwartz_seminorm(phi: &SampledFunction, order: usize, a: &AnisotropyVector) -> Result<f64> {
    let grid = phi.grid();
    let n = grid.dim();
    if a.dim() != n {
        return Err(Error::Shape("anisotropy and grid dimensions differ".into()));
    }
    if order > MAX_SEMINORM_ORDER {
        return Err(Error::Capability(format!(
            "seminorm order {order} exceeds the supported {MAX_SEMINORM_ORDER}"
        )));
    }
    if grid.points().iter().any(|&p| p < 2 * order + 1) {
        return Err(Error::Capability(format!(
            "grid too small for order-{order} central differences"
        )));
    }
    // derivs[β] for every multi-index with |β| ≤ order, built axis by axis.
    let mut layer: Vec<(Vec<usize>, Vec<f64>)> = vec![(vec![0; n], phi.values().to_vec())];
    let mut all = layer.clone();
    for _ in 0..order {
        let mut next = Vec::new();
        for (beta, vals) in &layer {
            // Extend only on axes ≥ the last nonzero one, so each β appears once.
            let start = beta.iter().rposition(|&b| b > 0).unwrap_or(0);
            for axis in start..n {
                let mut b = beta.clone();
                b[axis] += 1;
                next.push((b, central_difference(grid, vals, axis)));
            }
        }
        all.extend(next.iter().cloned());
        layer = next;
    }
    let mut idx = vec![0usize; n];
    let mut best: f64 = 0.0;
    for x in 0..grid.len() {
        grid.unravel(x, &mut idx);
        if (0..n).any(|i| idx[i] < order || idx[i] + order >= grid.points()[i]) {
            continue;
        }
        let d = all.iter().map(|(_, v)| v[x].abs()).fold(0.0, f64::max);
        if d > 0.0 {
            let br = a.bracket(&grid.point(x))?;
            best = best.max(br.powi(order as i32) * d);
        }
    }
    Ok(best)
}

fn central_difference(grid: &Grid, v: &[f64], axis: usize) -> Vec<f64> {
    let h = grid.spacing()[axis];
    axis_convolve(grid, v, axis, &[-1.0 / (2.0 * h), 0.0, 1.0 / (2.0 * h)])
}

/// Cell averages of the one-dimensional factor `σ^{−1} π^{−1/2} e^{−(s/σ)²}`:
/// `taps[e + d] = ½[erf((d+½)h/σ) − erf((d−½)h/σ)]`, summing to one.
fn gaussian_taps(h: f64, sigma: f64, max_extent: usize) -> Vec<f64> {
    let e = ((6.0 * sigma / h).ceil() as usize + 1).min(max_extent);
    (-(e as isize)..=e as isize)
        .map(|d| {
            let d = d as f64;
            0.5 * (erf((d + 0.5) * h / sigma) - erf((d - 0.5) * h / sigma))
        })
        .collect()
}

/// `f * φ_{2^k}` at one scale.
pub fn mollify(f: &SampledFunction, w: &SchwartzWindow, k: i32) -> Result<SampledFunction> {
    let grid = f.grid();
    if grid.dim() != w.dim() {
        return Err(Error::Shape("window and function dimensions differ".into()));
    }
    let t = 2f64.powi(k);
    let values = match &w.profile {
        WindowProfile::Gaussian => {
            let mut v = f.values().to_vec();
            for axis in 0..grid.dim() {
                let sigma = t.powf(w.anisotropy.exponents()[axis]);
                let taps = gaussian_taps(grid.spacing()[axis], sigma, grid.points()[axis] - 1);
                v = axis_convolve(grid, &v, axis, &taps);
            }
            v
        }
        WindowProfile::Custom { .. } => {
            let zero = vec![0.0; grid.dim()];
            OffsetKernel::tabulate(grid, None, w.phi_t(t, &zero), |o| w.phi_t(t, o)).apply(grid, f.values())
        }
    };
    SampledFunction::new(grid.clone(), values, format!("{}*phi_{k}", f.label()))
}

/// `M⁰f(x) = max_k |f * φ_{2^k}(x)|` over the window's scales.
pub fn radial_maximal(f: &SampledFunction, w: &SchwartzWindow) -> Result<SampledFunction> {
    let mut out = vec![0.0f64; f.grid().len()];
    for k in w.scales.iter() {
        let m = mollify(f, w, k)?;
        for (o, v) in out.iter_mut().zip(m.values()) {
            *o = o.max(v.abs());
        }
    }
    SampledFunction::new(f.grid().clone(), out, format!("M0[{}]", f.label()))
}

/// `‖M⁰f‖` in the Herz norm of `params`.
pub fn herz_hardy_norm(f: &SampledFunction, params: &HerzParams, w: &SchwartzWindow) -> Result<f64> {
    let m = radial_maximal(f, w)?;
    HerzSpace::new(params.clone(), f.grid())?.norm(&m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{hl_maximal, BallFamily};

    fn av(a: &[f64]) -> AnisotropyVector {
        AnisotropyVector::new(a.to_vec()).unwrap()
    }

    fn ev(q: &[f64]) -> ExponentVector {
        ExponentVector::new(q.to_vec()).unwrap()
    }

    #[test]
    fn n_index_examples() {
        assert_eq!(n_index(&ev(&[1.0, 1.0]), &av(&[1.0, 1.0])), 11);
        assert_eq!(n_index(&ev(&[2.0, 2.0]), &av(&[2.0, 1.0])), 26);
        let a = av(&[1.5, 1.0]);
        let mut last = 0;
        for p in [4.0, 2.0, 1.0, 0.8, 0.5, 0.3] {
            let n = n_index(&ev(&[p, 3.0]), &a);
            assert!(n >= last);
            last = n;
        }
    }

    #[test]
    fn seminorm_examples() {
        let g = Grid::cube(1, 6.0, 1201).unwrap();
        let a = av(&[1.0]);
        assert_eq!(schwartz_seminorm(&SampledFunction::zeros(&g), 2, &a).unwrap(), 0.0);
        let gauss = SampledFunction::from_fn(&g, "g", |x| (-x[0] * x[0]).exp()).unwrap();
        assert_eq!(schwartz_seminorm(&gauss, 0, &a).unwrap(), 1.0);
        // Oracle: ⟨x⟩² max(|φ|, |φ′|, |φ″|) with closed-form derivatives and
        // ⟨x⟩ = (1 + x²)^{1/2}.
        let oracle = (0..=12000)
            .map(|i| {
                let x = -6.0 + i as f64 * 1e-3;
                let e = (-x * x).exp();
                let d = e.max((2.0 * x * e).abs()).max(((4.0 * x * x - 2.0) * e).abs());
                (1.0 + x * x) * d
            })
            .fold(0.0, f64::max);
        let got = schwartz_seminorm(&gauss, 2, &a).unwrap();
        assert!((got - oracle).abs() < 1e-3 * oracle, "{got} {oracle}");
        assert!(matches!(schwartz_seminorm(&gauss, 9, &a), Err(Error::Capability(_))));
        let tiny = Grid::cube(1, 1.0, 5).unwrap();
        assert!(matches!(
            schwartz_seminorm(&SampledFunction::zeros(&tiny), 3, &a),
            Err(Error::Capability(_))
        ));
    }

    #[test]
    fn taps_have_unit_mass() {
        for (h, s) in [(0.1, 0.01), (0.1, 1.0), (0.05, 0.3)] {
            let t = gaussian_taps(h, s, 10_000);
            assert!((t.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn constants_are_reproduced_away_from_the_edge() {
        let g = Grid::cube(2, 16.0, 129).unwrap();
        let w = SchwartzWindow::gaussian(av(&[1.0, 1.5]), 2, DyadicWindow::new(-3, 1).unwrap());
        let c = SampledFunction::constant(&g, 3.0).unwrap();
        let m = radial_maximal(&c, &w).unwrap();
        assert!((m.values()[g.origin()] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn dominated_by_the_maximal_function() {
        let g = Grid::cube(1, 8.0, 257).unwrap();
        let w = SchwartzWindow::gaussian(av(&[1.0]), 2, DyadicWindow::new(-4, 2).unwrap());
        let f = SampledFunction::from_fn(&g, "f", |x| (3.0 * x[0]).sin() * (-x[0] * x[0] / 4.0).exp()).unwrap();
        let m0 = radial_maximal(&f, &w).unwrap();
        let m = hl_maximal(&f, &BallFamily::all_intervals(&g).unwrap()).unwrap();
        for (a, b) in m0.values().iter().zip(m.values()) {
            assert!(*a <= b * (1.0 + 1e-12) + 1e-15);
        }
    }

    #[test]
    fn single_cell_bump_matches_direct_convolution() {
        let g = Grid::cube(1, 4.0, 81).unwrap();
        let w = SchwartzWindow::gaussian(av(&[1.0]), 2, DyadicWindow::new(-1, 1).unwrap());
        let mut v = vec![0.0; g.len()];
        let c = g.origin() + 3;
        v[c] = 1.0;
        let f = SampledFunction::new(g.clone(), v, "bump").unwrap();
        let h = g.spacing()[0];
        for k in -1..=1 {
            let s = 2f64.powi(k);
            let m = mollify(&f, &w, k).unwrap();
            for i in 0..g.len() {
                let d = (i as f64 - c as f64) * h;
                let want = 0.5 * (erf((d + h / 2.0) / s) - erf((d - h / 2.0) / s));
                assert!((m.values()[i] - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn custom_profile_matches_gaussian_at_coarse_scale() {
        let g = Grid::cube(1, 16.0, 513).unwrap();
        let a = av(&[1.0]);
        let sc = DyadicWindow::new(1, 2).unwrap();
        let gw = SchwartzWindow::gaussian(a.clone(), 2, sc);
        let cw = SchwartzWindow::custom("gauss-point", a, 2, sc, |x: &[f64]| {
            std::f64::consts::PI.powf(-0.5) * (-x[0] * x[0]).exp()
        });
        let f = SampledFunction::from_fn(&g, "f", |x| (-(x[0] - 1.0).powi(2) / 8.0).exp()).unwrap();
        let a = radial_maximal(&f, &gw).unwrap();
        let b = radial_maximal(&f, &cw).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).abs() < 1e-4);
        }
    }
}
