//! Littlewood–Paley square functions `g_ψ`, `S_{ψ,a}` and `g*_{ψ,λ}`.
//!
//! Scales are dyadic, `t_j = 2^j`, and `∫ · dt/t` is the trapezoid rule in
//! `ln t` (weight `ln 2`, halved at both ends).

use std::f64::consts::LN_2;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::anisotropy::unit_ball_volume;
use crate::conv::OffsetKernel;
use crate::error::{Error, Result};
use crate::par;
use crate::sampled::{integrate_values, Grid, SampledFunction};

type Profile = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Tolerances of the admissibility check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityTolerances {
    /// `|∫ψ| ≤ mean_tol · ∫|ψ|`.
    pub mean_tol: f64,
    /// Allowed growth of the decay constant from the core to the far field.
    pub growth_tol: f64,
    /// Allowed increase of the modulus ratio as the shift halves.
    pub modulus_tol: f64,
}

impl Default for AdmissibilityTolerances {
    fn default() -> Self {
        Self {
            mean_tol: 1e-8,
            growth_tol: 2.0,
            modulus_tol: 0.05,
        }
    }
}

#[derive(Clone)]
pub struct LPKernel {
    name: String,
    dim: usize,
    psi: Profile,
    decay_alpha: f64,
    smoothness_gamma: f64,
    /// Support radius in units of `t`, when the profile is negligible beyond.
    support: Option<f64>,
    j_min: i32,
    j_max: i32,
}

impl fmt::Debug for LPKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LPKernel")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("decay_alpha", &self.decay_alpha)
            .field("smoothness_gamma", &self.smoothness_gamma)
            .field("scales", &(self.j_min..=self.j_max))
            .finish()
    }
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

impl LPKernel {
    pub fn new<F>(name: impl Into<String>, dim: usize, psi: F, decay_alpha: f64, smoothness_gamma: f64) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        if dim == 0 {
            return Err(Error::Domain("kernel dimension must be positive".into()));
        }
        if !(decay_alpha > 0.0 && smoothness_gamma > 0.0) {
            return Err(Error::Domain("decay and smoothness exponents must be positive".into()));
        }
        Ok(Self {
            name: name.into(),
            dim,
            psi: Arc::new(psi),
            decay_alpha,
            smoothness_gamma,
            support: None,
            j_min: -5,
            j_max: 3,
        })
    }

    /// `(n − |x|²) e^{−|x|²/2}`: the Mexican hat in one dimension, the
    /// negated Laplacian of the Gaussian in general.
    pub fn mexican_hat(dim: usize) -> Self {
        let n = dim as f64;
        let mut k = Self::new("mexican-hat", dim, move |x| {
            let r2 = norm2(x);
            (n - r2) * (-r2 / 2.0).exp()
        }, 1.0, 1.0)
        .expect("valid constants");
        k.support = Some(12.0);
        k
    }

    /// `e^{−|x|²/2}`, which has nonzero mean.
    pub fn gaussian(dim: usize) -> Self {
        let mut k = Self::new("gaussian", dim, |x| (-norm2(x) / 2.0).exp(), 1.0, 1.0).expect("valid constants");
        k.support = Some(12.0);
        k
    }

    pub fn zero(dim: usize) -> Self {
        let mut k = Self::new("zero", dim, |_| 0.0, 1.0, 1.0).expect("valid constants");
        k.support = Some(1.0);
        k
    }

    pub fn with_scales(mut self, j_min: i32, j_max: i32) -> Result<Self> {
        if j_min > j_max {
            return Err(Error::Domain(format!("empty scale range {j_min}..={j_max}")));
        }
        self.j_min = j_min;
        self.j_max = j_max;
        Ok(self)
    }

    /// Truncates the convolution tables at `|x| ≤ radius·t`.
    pub fn with_support(mut self, radius: f64) -> Self {
        self.support = Some(radius);
        self
    }

    /// Raises `j_min` to the first scale resolved by `grid` (`t ≥ 2h`).
    pub fn fitted_to(mut self, grid: &Grid) -> Self {
        let j = smallest_scale(grid);
        if self.j_min < j {
            self.j_min = j.min(self.j_max);
        }
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn decay_alpha(&self) -> f64 {
        self.decay_alpha
    }

    pub fn smoothness_gamma(&self) -> f64 {
        self.smoothness_gamma
    }

    pub fn scale_range(&self) -> (i32, i32) {
        (self.j_min, self.j_max)
    }

    pub fn scales(&self) -> Vec<f64> {
        (self.j_min..=self.j_max).map(|j| 2f64.powi(j)).collect()
    }

    /// Weights of `∫ · dt/t` on the dyadic scales.
    pub fn scale_weights(&self) -> Vec<f64> {
        let m = (self.j_max - self.j_min + 1) as usize;
        if m == 1 {
            return vec![LN_2];
        }
        (0..m)
            .map(|i| if i == 0 || i == m - 1 { LN_2 / 2.0 } else { LN_2 })
            .collect()
    }

    pub fn psi(&self, x: &[f64]) -> f64 {
        (self.psi)(x)
    }

    /// `ψ_t(x) = t^{−n} ψ(x/t)`.
    pub fn psi_t(&self, t: f64, x: &[f64]) -> f64 {
        let y: Vec<f64> = x.iter().map(|v| v / t).collect();
        t.powi(-(self.dim as i32)) * self.psi(&y)
    }
}

/// Smallest `j` with `2^j ≥ 2 max_i h_i`.
pub fn smallest_scale(grid: &Grid) -> i32 {
    let h = grid.spacing().iter().cloned().fold(0.0, f64::max);
    (2.0 * h).log2().ceil() as i32
}

fn check(f: &SampledFunction, k: &LPKernel) -> Result<()> {
    if f.dim() != k.dim {
        return Err(Error::Shape(format!(
            "kernel dimension {} does not match function dimension {}",
            k.dim,
            f.dim()
        )));
    }
    let h = f.grid().spacing().iter().cloned().fold(0.0, f64::max);
    let t0 = 2f64.powi(k.j_min);
    if t0 < 2.0 * h * (1.0 - 1e-12) {
        return Err(Error::Precondition(format!(
            "smallest scale {t0} is below twice the grid spacing {h}; raise j_min to {}",
            smallest_scale(f.grid())
        )));
    }
    Ok(())
}

fn extent(grid: &Grid, radius: f64) -> Vec<usize> {
    grid.spacing().iter().map(|h| (radius / h).ceil() as usize).collect()
}

/// `f * ψ_t` at every scale, by quadrature.
pub fn lp_convolutions(f: &SampledFunction, k: &LPKernel) -> Result<Vec<SampledFunction>> {
    check(f, k)?;
    let grid = f.grid();
    k.scales()
        .into_iter()
        .map(|t| {
            let ext = k.support.map(|r| extent(grid, r * t));
            let zero = vec![0.0; grid.dim()];
            let table = OffsetKernel::tabulate(grid, ext.as_deref(), k.psi_t(t, &zero), |o| k.psi_t(t, o));
            SampledFunction::new(grid.clone(), table.apply(grid, f.values()), format!("f*psi_{t}"))
        })
        .collect()
}

fn sqrt_fn(grid: &Grid, sq: Vec<f64>, label: String) -> Result<SampledFunction> {
    SampledFunction::new(grid.clone(), sq.into_iter().map(|v| v.max(0.0).sqrt()).collect(), label)
}

/// `Σ_j ω_j F_j(x)²`, the square of `g_ψ f`.
fn g_squared(fs: &[SampledFunction], k: &LPKernel) -> Vec<f64> {
    let w = k.scale_weights();
    let len = fs[0].values().len();
    let mut acc = vec![0.0; len];
    for (fj, wj) in fs.iter().zip(&w) {
        for (a, v) in acc.iter_mut().zip(fj.values()) {
            *a += wj * v * v;
        }
    }
    acc
}

pub fn g_function(f: &SampledFunction, k: &LPKernel) -> Result<SampledFunction> {
    let fs = lp_convolutions(f, k)?;
    sqrt_fn(f.grid(), g_squared(&fs, k), format!("g[{}]", f.label()))
}

/// Per-scale terms `ω_j t_j^{−n} Σ_y K_j(x − y) F_j(y)² w(y)`.
fn cone_terms<K>(fs: &[SampledFunction], k: &LPKernel, weight: K, radius: Option<f64>) -> Vec<Vec<f64>>
where
    K: Fn(&[f64], f64) -> f64 + Sync,
{
    let grid = fs[0].grid();
    let n = grid.dim() as i32;
    k.scales()
        .iter()
        .zip(k.scale_weights())
        .zip(fs)
        .map(|((&t, wj), fj)| {
            let ext = radius.map(|r| extent(grid, r * t));
            let zero = vec![0.0; grid.dim()];
            let table = OffsetKernel::tabulate(grid, ext.as_deref(), weight(&zero, t), |o| weight(o, t));
            let sq: Vec<f64> = fj.values().iter().map(|v| v * v).collect();
            let c = wj * t.powi(-n);
            table.apply(grid, &sq).into_iter().map(|v| c * v).collect()
        })
        .collect()
}

fn sum_terms(terms: &[Vec<f64>], scale: f64) -> Vec<f64> {
    let len = terms[0].len();
    par::map_indices(len, |x| scale * terms.iter().map(|t| t[x]).sum::<f64>())
}

fn lusin_terms(fs: &[SampledFunction], k: &LPKernel, a: f64) -> Vec<Vec<f64>> {
    cone_terms(fs, k, |o, t| f64::from(u8::from(norm2(o).sqrt() < a * t)), Some(a))
}

fn g_star_terms(fs: &[SampledFunction], k: &LPKernel, lambda: f64) -> Vec<Vec<f64>> {
    cone_terms(fs, k, |o, t| (1.0 + norm2(o).sqrt() / t).powf(-2.0 * lambda), None)
}

fn lusin_prefactor(n: usize, a: f64) -> f64 {
    1.0 / (a.powi(n as i32) * unit_ball_volume(n))
}

/// `S_{ψ,a} f(x)²  = (aⁿ|B₀|)^{−1} ∫∫_{|x−y|<at} |F_t(y)|² t^{−n} dy dt/t`.
pub fn lusin_area(f: &SampledFunction, k: &LPKernel, a: f64) -> Result<SampledFunction> {
    if !(a > 0.0) {
        return Err(Error::Domain(format!("aperture must be positive, got {a}")));
    }
    let fs = lp_convolutions(f, k)?;
    let terms = lusin_terms(&fs, k, a);
    sqrt_fn(f.grid(), sum_terms(&terms, lusin_prefactor(f.dim(), a)), format!("S[{}]", f.label()))
}

/// `g*_{ψ,λ} f(x)² = ∫∫ |F_t(y)|² (1 + |x−y|/t)^{−2λ} t^{−n} dy dt/t`.
pub fn g_star(f: &SampledFunction, k: &LPKernel, lambda: f64) -> Result<SampledFunction> {
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!("lambda must be positive, got {lambda}")));
    }
    let fs = lp_convolutions(f, k)?;
    let terms = g_star_terms(&fs, k, lambda);
    sqrt_fn(f.grid(), sum_terms(&terms, 1.0), format!("g*[{}]", f.label()))
}

/// Pointwise `S ≤ (1+a)^λ (aⁿ|B₀|)^{−1/2} g*`, compared scale by scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominationReport {
    pub aperture: f64,
    pub lambda: f64,
    pub constant: f64,
    /// Largest `S / (C g*)` over points with `g* > 0`.
    pub max_ratio: f64,
    /// Scale terms where the cone term exceeds `(1+a)^{2λ}` times the `g*` term.
    pub violations: usize,
}

pub fn domination_check(f: &SampledFunction, k: &LPKernel, a: f64, lambda: f64) -> Result<DominationReport> {
    if !(a > 0.0 && lambda > 0.0) {
        return Err(Error::Domain("aperture and lambda must be positive".into()));
    }
    let fs = lp_convolutions(f, k)?;
    let s_terms = lusin_terms(&fs, k, a);
    let g_terms = g_star_terms(&fs, k, lambda);
    let factor = (1.0 + a).powf(2.0 * lambda);
    let mut violations = 0;
    for (st, gt) in s_terms.iter().zip(&g_terms) {
        for (s, g) in st.iter().zip(gt) {
            if *s > factor * g * (1.0 + 1e-12) {
                violations += 1;
            }
        }
    }
    let pre = lusin_prefactor(f.dim(), a);
    let s = sum_terms(&s_terms, pre);
    let g = sum_terms(&g_terms, 1.0);
    let constant = (1.0 + a).powf(lambda) * pre.sqrt();
    let max_ratio = s
        .iter()
        .zip(&g)
        .filter(|(_, g)| **g > 0.0)
        .map(|(s, g)| s.sqrt() / (constant * g.sqrt()))
        .fold(0.0, f64::max);
    Ok(DominationReport {
        aperture: a,
        lambda,
        constant,
        max_ratio,
        violations,
    })
}

/// Measured constants of conditions (i)–(iii).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub mean: f64,
    pub l1: f64,
    pub zero_mean: bool,
    pub decay_constant: f64,
    pub decay_constant_far: f64,
    pub decays: bool,
    pub modulus_ratios: Vec<f64>,
    pub smooth: bool,
    pub passed: bool,
}

/// Samples `ψ` on `[−R, R]^n`: `R = 16` with 2049 points per axis in one
/// dimension, 257 per axis otherwise.
pub fn lp_admissibility_check(k: &LPKernel, tol: &AdmissibilityTolerances) -> Result<AdmissibilityReport> {
    let n = k.dim;
    if n > 3 {
        return Err(Error::Capability("admissibility sampling supports n <= 3".into()));
    }
    let r = 16.0;
    let pts = match n {
        1 => 2049,
        2 => 257,
        _ => 65,
    };
    let grid = Grid::cube(n, r, pts)?;
    let psi = SampledFunction::from_fn(&grid, "psi", |x| k.psi(x))?;
    let mean = integrate_values(&grid, psi.values());
    let l1 = integrate_values(&grid, psi.abs().values());
    let zero_mean = mean.abs() <= tol.mean_tol * l1;

    let e = n as f64 + k.decay_alpha;
    let mut near: f64 = 0.0;
    let mut far: f64 = 0.0;
    for (i, v) in psi.values().iter().enumerate() {
        let x = grid.point(i);
        let rad = norm2(&x).sqrt();
        if rad > r {
            continue;
        }
        let c = v.abs() * (1.0 + rad).powf(e);
        if rad <= r / 4.0 {
            near = near.max(c);
        } else if rad >= r / 2.0 {
            far = far.max(c);
        }
    }
    let decays = far <= tol.growth_tol * near || far == 0.0;

    let h = grid.spacing()[0];
    let mut ratios = Vec::new();
    for m in 0..6 {
        let s = h / 2f64.powi(m);
        let diff = SampledFunction::from_fn(&grid, "diff", |x| {
            let mut y = x.to_vec();
            y[0] += s;
            (k.psi(&y) - k.psi(x)).abs()
        })?;
        ratios.push(integrate_values(&grid, diff.values()) / s.powf(k.smoothness_gamma));
    }
    let smooth = ratios.windows(2).all(|w| w[1] <= (1.0 + tol.modulus_tol) * w[0]) && ratios.iter().all(|v| v.is_finite());
    Ok(AdmissibilityReport {
        mean,
        l1,
        zero_mean,
        decay_constant: near,
        decay_constant_far: far,
        decays,
        modulus_ratios: ratios,
        smooth,
        passed: zero_mean && decays && smooth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::cube(1, 8.0, 257).unwrap()
    }

    fn hat() -> LPKernel {
        LPKernel::mexican_hat(1).with_scales(-3, 2).unwrap()
    }

    #[test]
    fn admissibility_examples() {
        let tol = AdmissibilityTolerances::default();
        let m = lp_admissibility_check(&LPKernel::mexican_hat(1), &tol).unwrap();
        assert!(m.passed, "{m:?}");
        let g = lp_admissibility_check(&LPKernel::gaussian(1), &tol).unwrap();
        assert!(!g.zero_mean && !g.passed);
        let z = lp_admissibility_check(&LPKernel::zero(1), &tol).unwrap();
        assert!(z.passed && z.decay_constant == 0.0);
        let m2 = lp_admissibility_check(&LPKernel::mexican_hat(2), &tol).unwrap();
        assert!(m2.passed, "{m2:?}");
        let slow = LPKernel::new("slow", 1, |x: &[f64]| x[0] / (1.0 + x[0] * x[0]).powf(0.6), 1.0, 1.0).unwrap();
        assert!(!lp_admissibility_check(&slow, &tol).unwrap().decays);
    }

    #[test]
    fn zero_input_and_homogeneity() {
        let g = grid();
        let k = hat();
        let z = SampledFunction::zeros(&g);
        assert!(g_function(&z, &k).unwrap().is_zero());
        assert!(lusin_area(&z, &k, 1.0).unwrap().is_zero());
        assert!(g_star(&z, &k, 2.0).unwrap().is_zero());
        let f = SampledFunction::from_fn(&g, "f", |x| (-(x[0] - 0.5).powi(2)).exp() * x[0]).unwrap();
        let a = g_function(&f, &k).unwrap();
        let b = g_function(&f.scale(-2.0).unwrap(), &k).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((2.0 * x - y).abs() < 1e-12 * (1.0 + y));
        }
    }

    #[test]
    fn constants_are_annihilated() {
        let g = Grid::cube(1, 64.0, 1025).unwrap();
        let k = LPKernel::mexican_hat(1).with_scales(-2, 3).unwrap();
        let one = SampledFunction::constant(&g, 1.0).unwrap();
        let gf = g_function(&one, &k).unwrap();
        let peak = gf.max_abs();
        assert!(gf.values()[g.origin()] <= 1e-6 * peak);
    }

    #[test]
    fn scale_floor_is_enforced() {
        let g = grid();
        let k = LPKernel::mexican_hat(1);
        let f = SampledFunction::zeros(&g);
        assert!(matches!(g_function(&f, &k), Err(Error::Precondition(_))));
        assert!(g_function(&f, &k.fitted_to(&g)).is_ok());
    }

    #[test]
    fn aperture_and_lambda_monotone() {
        let g = grid();
        let k = hat();
        let f = SampledFunction::from_fn(&g, "f", |x| f64::from(u8::from(x[0].abs() <= 1.0))).unwrap();
        let fs = lp_convolutions(&f, &k).unwrap();
        let s1 = sum_terms(&lusin_terms(&fs, &k, 0.5), 1.0);
        let s2 = sum_terms(&lusin_terms(&fs, &k, 1.5), 1.0);
        assert!(s1.iter().zip(&s2).all(|(a, b)| a <= b));
        let g2 = g_star(&f, &k, 2.0).unwrap();
        let g3 = g_star(&f, &k, 3.0).unwrap();
        assert!(g3.values().iter().zip(g2.values()).all(|(a, b)| a <= b));
        let d = domination_check(&f, &k, 1.0, 2.0).unwrap();
        assert_eq!(d.violations, 0);
        assert!(d.max_ratio <= 1.0 + 1e-12);
    }
}
