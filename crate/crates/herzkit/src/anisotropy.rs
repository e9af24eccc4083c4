//! Anisotropic geometry on ℝⁿ.
//!
//! An exponent vector `a = (a_1, …, a_n)` with every `a_i ≥ 1` defines the
//! dilations `t^a x = (t^{a_1} x_1, …, t^{a_n} x_n)` and a quasi-norm `|x|_a`,
//! the unique `t > 0` with `Σ x_i² / t^{2 a_i} = 1`. The quasi-norm is
//! homogeneous of degree one under these dilations, and balls
//! `B_a(x, r) = {y : |y − x|_a < r}` have Lebesgue measure `v_n r^v` where
//! `v = Σ a_i` and `v_n` is the volume of the Euclidean unit ball.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::par;

/// Default absolute tolerance on the quasi-norm root.
pub const DEFAULT_TOL: f64 = 1e-12;

const MAX_ITER: usize = 200;

/// The exponents `a` together with the derived `v`, `a₋`, `a₊`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct AnisotropyVector {
    a: Vec<f64>,
    v: f64,
    a_minus: f64,
    a_plus: f64,
}

impl TryFrom<Vec<f64>> for AnisotropyVector {
    type Error = Error;
    fn try_from(a: Vec<f64>) -> Result<Self> {
        Self::new(a)
    }
}

impl From<AnisotropyVector> for Vec<f64> {
    fn from(a: AnisotropyVector) -> Self {
        a.a
    }
}

impl AnisotropyVector {
    pub fn new(a: Vec<f64>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::Domain("anisotropy vector must be non-empty".into()));
        }
        if let Some(bad) = a.iter().find(|x| !x.is_finite() || **x < 1.0) {
            return Err(Error::Domain(format!(
                "anisotropy exponents must be finite and >= 1, got {bad}"
            )));
        }
        let v = a.iter().sum();
        let a_minus = a.iter().cloned().fold(f64::INFINITY, f64::min);
        let a_plus = a.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Ok(Self {
            a,
            v,
            a_minus,
            a_plus,
        })
    }

    /// The Euclidean case `a = (1, …, 1)`.
    pub fn isotropic(n: usize) -> Self {
        Self::new(vec![1.0; n.max(1)]).expect("unit exponents are valid")
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn exponents(&self) -> &[f64] {
        &self.a
    }

    /// Homogeneous dimension `v = Σ a_i`.
    pub fn v(&self) -> f64 {
        self.v
    }

    pub fn a_minus(&self) -> f64 {
        self.a_minus
    }

    pub fn a_plus(&self) -> f64 {
        self.a_plus
    }

    pub fn is_isotropic(&self) -> bool {
        self.a.iter().all(|&x| x == self.a[0])
    }

    pub fn dilate(&self, t: f64, x: &[f64]) -> Vec<f64> {
        dilate(t, self, x)
    }

    pub fn quasi_norm(&self, x: &[f64]) -> Result<f64> {
        quasi_norm(x, self, DEFAULT_TOL)
    }

    pub fn bracket(&self, x: &[f64]) -> Result<f64> {
        bracket(x, self)
    }

    /// `Σ x_i² / t^{2 a_i}`; strictly decreasing in `t` for `x ≠ 0`.
    pub fn level(&self, x: &[f64], t: f64) -> f64 {
        x.iter()
            .zip(&self.a)
            .map(|(&xi, &ai)| {
                let r = xi / t.powf(ai);
                r * r
            })
            .sum()
    }

    /// Strict ball membership `|y|_a < r` without solving for the root.
    pub fn within(&self, y: &[f64], r: f64) -> bool {
        if r <= 0.0 {
            return false;
        }
        self.level(y, r) < 1.0
    }

    /// Lebesgue measure `v_n r^v` of `B_a(x, r)`.
    pub fn ball_measure(&self, r: f64) -> f64 {
        unit_ball_volume(self.dim()) * r.powf(self.v)
    }

    /// Measure of the dyadic ball `B_k = B_a(0, 2^k)`.
    pub fn dyadic_ball_measure(&self, k: i32) -> f64 {
        unit_ball_volume(self.dim()) * 2f64.powf(k as f64 * self.v)
    }
}

/// Volume of the Euclidean unit ball in ℝⁿ, `π^{n/2} / Γ(n/2 + 1)`.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        1 => 2.0,
        2 => PI,
        3 => 4.0 * PI / 3.0,
        _ => {
            let h = n as f64 / 2.0;
            PI.powf(h) / statrs::function::gamma::gamma(h + 1.0)
        }
    }
}

/// `(t^{a_1} x_1, …, t^{a_n} x_n)`.
pub fn dilate(t: f64, a: &AnisotropyVector, x: &[f64]) -> Vec<f64> {
    x.iter()
        .zip(a.exponents())
        .map(|(&xi, &ai)| t.powf(ai) * xi)
        .collect()
}

/// The anisotropic quasi-norm `|x|_a` to absolute tolerance `tol`.
///
/// The root of `F(t) = Σ x_i²/t^{2a_i} = 1` is bracketed by
/// `max_i |x_i|^{1/a_i} ≤ t ≤ Σ_i |x_i|^{1/a_i}`, narrowed by bisection and
/// finished with safeguarded Newton steps on `ln F` against `ln t`.
pub fn quasi_norm(x: &[f64], a: &AnisotropyVector, tol: f64) -> Result<f64> {
    if x.len() != a.dim() {
        return Err(Error::Shape(format!(
            "point has {} coordinates, anisotropy has {}",
            x.len(),
            a.dim()
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    if let Some(bad) = x.iter().find(|v| !v.is_finite()) {
        return Err(Error::Domain(format!("non-finite coordinate {bad}")));
    }
    if x.iter().all(|&v| v == 0.0) {
        return Ok(0.0);
    }
    if a.is_isotropic() {
        let e = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        return Ok(e.powf(1.0 / a.exponents()[0]));
    }

    let mut lo = 0f64;
    let mut hi = 0f64;
    for (&xi, &ai) in x.iter().zip(a.exponents()) {
        let s = xi.abs().powf(1.0 / ai);
        lo = lo.max(s);
        hi += s;
    }
    if hi <= lo {
        return Ok(lo);
    }

    let resid = |t: f64| a.level(x, t) - 1.0;
    // F(lo) >= 1 >= F(hi): bisect until the bracket is within 1% of lo.
    let mut iter = 0;
    while hi - lo > 1e-2 * lo && iter < MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if resid(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iter += 1;
    }

    let mut t = 0.5 * (lo + hi);
    for _ in 0..MAX_ITER {
        let f = a.level(x, t);
        if f == 1.0 {
            return Ok(t);
        }
        if f > 1.0 {
            lo = lo.max(t);
        } else {
            hi = hi.min(t);
        }
        // d ln F / d ln t = −Σ 2 a_i x_i² t^{−2a_i} / F
        let slope: f64 = -x
            .iter()
            .zip(a.exponents())
            .map(|(&xi, &ai)| {
                let r = xi / t.powf(ai);
                2.0 * ai * r * r
            })
            .sum::<f64>()
            / f;
        let mut next = t * (-(f.ln()) / slope).exp();
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let step = (next - t).abs();
        t = next;
        let floor = tol.max(4.0 * f64::EPSILON * t);
        if step <= floor || hi - lo <= floor {
            return Ok(t);
        }
    }
    Ok(t)
}

/// The bracket `⟨x⟩_a = |(1, x)|_{(1, a)}`; always at least one.
pub fn bracket(x: &[f64], a: &AnisotropyVector) -> Result<f64> {
    if x.len() != a.dim() {
        return Err(Error::Shape(format!(
            "point has {} coordinates, anisotropy has {}",
            x.len(),
            a.dim()
        )));
    }
    let mut ext = Vec::with_capacity(a.dim() + 1);
    ext.push(1.0);
    ext.extend_from_slice(a.exponents());
    let mut y = Vec::with_capacity(x.len() + 1);
    y.push(1.0);
    y.extend_from_slice(x);
    quasi_norm(&y, &AnisotropyVector::new(ext)?, DEFAULT_TOL)
}

/// A ball `B_a(center, radius)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnisotropicBall {
    pub center: Vec<f64>,
    pub radius: f64,
    pub anisotropy: AnisotropyVector,
}

impl AnisotropicBall {
    pub fn new(center: Vec<f64>, radius: f64, anisotropy: AnisotropyVector) -> Result<Self> {
        if center.len() != anisotropy.dim() {
            return Err(Error::Shape("ball center dimension mismatch".into()));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::Domain(format!("ball radius must be positive, got {radius}")));
        }
        Ok(Self {
            center,
            radius,
            anisotropy,
        })
    }

    pub fn contains(&self, y: &[f64]) -> bool {
        let d: Vec<f64> = y.iter().zip(&self.center).map(|(a, b)| a - b).collect();
        self.anisotropy.within(&d, self.radius)
    }

    pub fn measure(&self) -> f64 {
        self.anisotropy.ball_measure(self.radius)
    }
}

/// Quadrature of `∫ f` in anisotropic polar coordinates `x = ρ^a ξ`.
///
/// Integrates `f(ρ^a ξ) ρ^{v−1} J(ξ)` over `0 < ρ < rho_max` and the unit
/// sphere, where `J(ξ) = Σ a_i ξ_i²` is the angular factor of the Jacobian
/// of `(ρ, ξ) ↦ ρ^a ξ` (identically one when `a` is isotropic). Radial nodes
/// use the midpoint rule. Angles use the periodic trapezoid rule in n = 2
/// and a latitude–longitude product grid in n = 3 (`angular` polar nodes,
/// `2·angular` azimuthal nodes).
pub fn polar_integrate<F>(
    f: F,
    a: &AnisotropyVector,
    rho_max: f64,
    radial: usize,
    angular: usize,
) -> Result<f64>
where
    F: Fn(&[f64]) -> f64 + Sync + Send,
{
    let n = a.dim();
    if n != 2 && n != 3 {
        return Err(Error::Capability(format!(
            "polar integration is implemented for n = 2 or 3, got n = {n}"
        )));
    }
    if !(rho_max > 0.0) || !rho_max.is_finite() {
        return Err(Error::Domain(format!("rho_max must be positive, got {rho_max}")));
    }
    if radial == 0 || angular == 0 {
        return Err(Error::Domain("resolution must be positive".into()));
    }
    let ex = a.exponents().to_vec();
    let v = a.v();
    let dr = rho_max / radial as f64;

    // Angular nodes with their quadrature weights and Jacobian factors.
    let mut dirs: Vec<(Vec<f64>, f64)> = Vec::new();
    if n == 2 {
        let dt = 2.0 * PI / angular as f64;
        for j in 0..angular {
            let th = j as f64 * dt;
            let xi = vec![th.cos(), th.sin()];
            let jac = ex[0] * xi[0] * xi[0] + ex[1] * xi[1] * xi[1];
            dirs.push((xi, dt * jac));
        }
    } else {
        let dth = PI / angular as f64;
        let naz = 2 * angular;
        let dph = 2.0 * PI / naz as f64;
        for j in 0..angular {
            let th = (j as f64 + 0.5) * dth;
            for k in 0..naz {
                let ph = k as f64 * dph;
                let xi = vec![th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()];
                let jac: f64 = xi.iter().zip(&ex).map(|(x, e)| e * x * x).sum();
                dirs.push((xi, th.sin() * dth * dph * jac));
            }
        }
    }

    let shells = par::map_indices(radial, |i| {
        let rho = (i as f64 + 0.5) * dr;
        let scale: Vec<f64> = ex.iter().map(|&e| rho.powf(e)).collect();
        let mut x = vec![0.0; n];
        let mut acc = 0.0;
        for (xi, w) in &dirs {
            for d in 0..n {
                x[d] = scale[d] * xi[d];
            }
            acc += w * f(&x);
        }
        acc * rho.powf(v - 1.0) * dr
    });
    Ok(shells.iter().sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn av(a: &[f64]) -> AnisotropyVector {
        AnisotropyVector::new(a.to_vec()).unwrap()
    }

    // Independent oracle: plain bisection on F(t) over a wide bracket.
    fn bisection_oracle(x: &[f64], a: &[f64]) -> f64 {
        let f = |t: f64| -> f64 {
            x.iter()
                .zip(a)
                .map(|(xi, ai)| xi * xi / t.powf(2.0 * ai))
                .sum::<f64>()
        };
        let (mut lo, mut hi) = (1e-8f64, 1e8f64);
        for _ in 0..400 {
            let mid = (lo * hi).sqrt();
            if f(mid) > 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn rejects_bad_exponents() {
        assert!(AnisotropyVector::new(vec![]).is_err());
        assert!(AnisotropyVector::new(vec![0.5, 1.0]).is_err());
        assert!(AnisotropyVector::new(vec![f64::NAN]).is_err());
        let a = av(&[2.0, 1.0, 3.0]);
        assert_eq!(a.v(), 6.0);
        assert_eq!(a.a_minus(), 1.0);
        assert_eq!(a.a_plus(), 3.0);
    }

    #[test]
    fn dilation_examples() {
        assert_eq!(dilate(1.0, &av(&[2.0, 1.0]), &[3.0, -2.0]), vec![3.0, -2.0]);
        assert_eq!(dilate(2.0, &av(&[2.0, 1.0]), &[1.0, 1.0]), vec![4.0, 2.0]);
        assert_eq!(dilate(0.5, &av(&[1.0, 1.0]), &[4.0, 6.0]), vec![2.0, 3.0]);
    }

    #[test]
    fn quasi_norm_examples() {
        let a11 = av(&[1.0, 1.0]);
        let a21 = av(&[2.0, 1.0]);
        assert_eq!(quasi_norm(&[0.0, 0.0], &a21, DEFAULT_TOL).unwrap(), 0.0);
        assert_eq!(quasi_norm(&[3.0, 4.0], &a11, DEFAULT_TOL).unwrap(), 5.0);
        assert_eq!(quasi_norm(&[4.0, 0.0], &a21, DEFAULT_TOL).unwrap(), 2.0);
        // u = t^{-2} solves u² + u = 1.
        let u = (5f64.sqrt() - 1.0) / 2.0;
        let expected = u.powf(-0.5);
        let got = quasi_norm(&[1.0, 1.0], &a21, DEFAULT_TOL).unwrap();
        assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
        assert!((got - 1.272020).abs() < 1e-6);
        assert!((got - bisection_oracle(&[1.0, 1.0], &[2.0, 1.0])).abs() < 1e-10);
    }

    #[test]
    fn quasi_norm_errors() {
        let a = av(&[2.0, 1.0]);
        assert!(matches!(
            quasi_norm(&[f64::NAN, 1.0], &a, DEFAULT_TOL),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            quasi_norm(&[1.0, f64::INFINITY], &a, DEFAULT_TOL),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            quasi_norm(&[1.0], &a, DEFAULT_TOL),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn quasi_norm_matches_oracle_on_mixed_scales() {
        let a = av(&[3.0, 1.5, 1.0]);
        for x in [
            [1e-3, 2.0, -0.5],
            [40.0, -1e-2, 3.0],
            [0.2, 0.3, 0.0],
            [-7.0, 7.0, 7.0],
        ] {
            let got = quasi_norm(&x, &a, DEFAULT_TOL).unwrap();
            let want = bisection_oracle(&x, &[3.0, 1.5, 1.0]);
            assert!((got - want).abs() <= 1e-10 * want.max(1.0), "{x:?}: {got} vs {want}");
            let resid = a.level(&x, got) - 1.0;
            assert!(resid.abs() < 1e-11);
        }
    }

    #[test]
    fn bracket_examples() {
        assert_eq!(bracket(&[0.0, 0.0], &av(&[2.0, 1.0])).unwrap(), 1.0);
        let b = bracket(&[3f64.sqrt()], &av(&[1.0])).unwrap();
        assert!((b - 2.0).abs() < 1e-12);
        let b = bracket(&[3.0, 4.0], &av(&[1.0, 1.0])).unwrap();
        assert!((b - 26f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn ball_measure_uses_homogeneous_dimension() {
        let a = av(&[2.0, 1.0]);
        assert!((a.ball_measure(2.0) - PI * 8.0).abs() < 1e-12);
        assert!((unit_ball_volume(4) - PI * PI / 2.0).abs() < 1e-12);
        let ball = AnisotropicBall::new(vec![1.0, 0.0], 1.0, a).unwrap();
        assert!(ball.contains(&[1.5, 0.5]));
        assert!(!ball.contains(&[2.0, 0.0]));
    }

    #[test]
    fn polar_unit_disc_and_gaussian() {
        let a = av(&[1.0, 1.0]);
        let disc = polar_integrate(
            |x: &[f64]| if x[0] * x[0] + x[1] * x[1] < 1.0 { 1.0 } else { 0.0 },
            &a,
            1.5,
            600,
            256,
        )
        .unwrap();
        assert!((disc - PI).abs() < 5e-3);
        let rmax = 2.0f64;
        let g = polar_integrate(
            |x: &[f64]| (-(x[0] * x[0] + x[1] * x[1])).exp(),
            &a,
            rmax,
            400,
            64,
        )
        .unwrap();
        let want = PI * (1.0 - (-rmax * rmax).exp());
        assert!((g - want).abs() < 1e-5 * want);
    }

    #[test]
    fn polar_agrees_with_cartesian_for_anisotropic_gaussian() {
        // ∫ e^{−x²−y²} over ℝ² is π regardless of how it is parametrized.
        let a = av(&[2.0, 1.0]);
        let got = polar_integrate(
            |x: &[f64]| (-(x[0] * x[0] + x[1] * x[1])).exp(),
            &a,
            4.0,
            800,
            256,
        )
        .unwrap();
        assert!((got - PI).abs() < 1e-4, "{got}");
        let a3 = av(&[1.0, 2.0, 1.5]);
        let got3 = polar_integrate(
            |x: &[f64]| (-(x.iter().map(|v| v * v).sum::<f64>())).exp(),
            &a3,
            4.0,
            400,
            96,
        )
        .unwrap();
        assert!((got3 - PI.powf(1.5)).abs() < 1e-3, "{got3}");
    }

    #[test]
    fn polar_rejects_unsupported_dimension() {
        assert!(matches!(
            polar_integrate(|_x: &[f64]| 1.0, &av(&[1.0]), 1.0, 10, 10),
            Err(Error::Capability(_))
        ));
    }
}
