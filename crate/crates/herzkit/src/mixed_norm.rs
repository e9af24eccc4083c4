//! Iterated mixed-norm Lebesgue functionals.
//!
//! `‖f‖_q = ( ∫ … ( ∫ |f|^{q_1} dx_1 )^{q_2/q_1} … dx_n )^{1/q_n}`, taken
//! innermost axis first. Each axis reduction uses the trapezoid weights of
//! the grid, so the discrete functional inherits the algebra of the
//! continuous one exactly: separable functions factor, Hölder's inequality
//! holds, and `‖|f|^s‖_q = ‖f‖_{sq}^s`.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::anisotropy::AnisotropyVector;
use crate::error::{Error, Result};
use crate::sampled::{integrate_values, Grid, SampledFunction};

/// Exponents `q = (q_1, …, q_n)` with every `q_i ∈ (0, ∞]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Exponent>", into = "Vec<Exponent>")]
pub struct ExponentVector {
    q: Vec<f64>,
}

/// One exponent on the wire: a number, or the string `"inf"`.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Exponent {
    Num(f64),
    Text(String),
}

impl TryFrom<Vec<Exponent>> for ExponentVector {
    type Error = Error;
    fn try_from(v: Vec<Exponent>) -> Result<Self> {
        let q = v
            .into_iter()
            .map(|e| match e {
                Exponent::Num(x) => Ok(x),
                Exponent::Text(s) => parse_exponent(&s),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(q)
    }
}

impl From<ExponentVector> for Vec<Exponent> {
    fn from(e: ExponentVector) -> Self {
        e.q.into_iter()
            .map(|x| {
                if x.is_infinite() {
                    Exponent::Text("inf".into())
                } else {
                    Exponent::Num(x)
                }
            })
            .collect()
    }
}

pub(crate) fn parse_exponent(s: &str) -> Result<f64> {
    match s.trim().to_ascii_lowercase().as_str() {
        "inf" | "infinity" | "∞" => Ok(f64::INFINITY),
        t => t
            .parse::<f64>()
            .map_err(|e| Error::Parse(format!("exponent {s:?}: {e}"))),
    }
}

impl ExponentVector {
    pub fn new(q: Vec<f64>) -> Result<Self> {
        if q.is_empty() {
            return Err(Error::Domain("exponent vector must be non-empty".into()));
        }
        if let Some(bad) = q.iter().find(|&&x| !(x > 0.0)) {
            return Err(Error::Domain(format!("exponents must lie in (0, inf], got {bad}")));
        }
        Ok(Self { q })
    }

    pub fn uniform(n: usize, q: f64) -> Result<Self> {
        Self::new(vec![q; n])
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.q
    }

    /// `q′` with `1/q_i + 1/q′_i = 1`; defined for `q_i ≥ 1`.
    pub fn conjugate(&self) -> Result<Self> {
        let c = self
            .q
            .iter()
            .map(|&x| {
                if x < 1.0 {
                    Err(Error::Domain(format!("no conjugate exponent for q = {x} < 1")))
                } else if x == 1.0 {
                    Ok(f64::INFINITY)
                } else if x.is_infinite() {
                    Ok(1.0)
                } else {
                    Ok(x / (x - 1.0))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { q: c })
    }

    /// `s·q`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        Self::new(self.q.iter().map(|x| s * x).collect())
    }

    /// `Σ 1/q_i`.
    pub fn inverse_sum(&self) -> f64 {
        self.q.iter().map(|x| 1.0 / x).sum()
    }

    /// `Σ a_i/q_i`.
    pub fn weighted_inverse_sum(&self, a: &AnisotropyVector) -> f64 {
        self.q
            .iter()
            .zip(a.exponents())
            .map(|(q, a)| a / q)
            .sum()
    }

    pub fn min(&self) -> f64 {
        self.q.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn all_at_least(&self, bound: f64) -> bool {
        self.q.iter().all(|&x| x >= bound)
    }
}

impl FromStr for ExponentVector {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::new(s.split(',').map(parse_exponent).collect::<Result<_>>()?)
    }
}

impl fmt::Display for ExponentVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .q
            .iter()
            .map(|x| if x.is_infinite() { "inf".into() } else { x.to_string() })
            .collect();
        write!(f, "{}", parts.join(","))
    }
}

/// `‖f‖_q` by iterated trapezoid quadrature, `x_1` innermost.
pub fn mixed_lebesgue_norm(f: &SampledFunction, q: &ExponentVector) -> Result<f64> {
    if q.dim() != f.dim() {
        return Err(Error::Shape(format!(
            "exponent vector has {} entries for a {}-dimensional function",
            q.dim(),
            f.dim()
        )));
    }
    Ok(norm_values(f.grid(), f.values(), q))
}

/// Mixed norm of raw grid values; the dimensions are assumed to agree.
pub(crate) fn norm_values(grid: &Grid, values: &[f64], q: &ExponentVector) -> f64 {
    let mut cur: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    for d in 0..grid.dim() {
        let w = grid.axis_weights(d);
        let qd = q.q[d];
        cur = cur.chunks(w.len()).map(|line| line_norm(line, &w, qd)).collect();
    }
    cur[0]
}

/// Scaled by the line maximum so that tiny or huge values neither
/// underflow nor overflow under `|v|^q`.
fn line_norm(line: &[f64], w: &[f64], q: f64) -> f64 {
    let m = line.iter().fold(0.0f64, |m, &v| m.max(v));
    if q.is_infinite() || m == 0.0 {
        return m;
    }
    if q == 1.0 {
        return line.iter().zip(w).map(|(v, w)| v * w).sum();
    }
    let s: f64 = if q == 2.0 {
        line.iter().zip(w).map(|(v, w)| (v / m) * (v / m) * w).sum()
    } else {
        line.iter().zip(w).map(|(v, w)| (v / m).powf(q) * w).sum()
    };
    if q == 2.0 {
        m * s.sqrt()
    } else {
        m * s.powf(1.0 / q)
    }
}

/// `(∫|f g|, ‖f‖_q ‖g‖_{q′})`; the caller asserts the first is at most the
/// second.
pub fn holder_check(f: &SampledFunction, g: &SampledFunction, q: &ExponentVector) -> Result<(f64, f64)> {
    let fg = f.mul(g)?.abs();
    let lhs = integrate_values(fg.grid(), fg.values());
    let rhs = mixed_lebesgue_norm(f, q)? * mixed_lebesgue_norm(g, &q.conjugate()?)?;
    Ok((lhs, rhs))
}

/// `(‖|f|^s‖_q, ‖f‖_{sq}^s)`.
pub fn power_identity_check(f: &SampledFunction, q: &ExponentVector, s: f64) -> Result<(f64, f64)> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::Domain(format!("power must be positive, got {s}")));
    }
    let fs = f.map(|v| v.abs().powf(s))?;
    let lhs = mixed_lebesgue_norm(&fs, q)?;
    let rhs = mixed_lebesgue_norm(f, &q.scaled(s)?)?.powf(s);
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampled::quadrature_integral;

    fn ev(q: &[f64]) -> ExponentVector {
        ExponentVector::new(q.to_vec()).unwrap()
    }

    #[test]
    fn conjugates() {
        let c = ev(&[1.0, 2.0, f64::INFINITY, 4.0]).conjugate().unwrap();
        assert_eq!(c.as_slice()[0], f64::INFINITY);
        assert_eq!(c.as_slice()[1], 2.0);
        assert_eq!(c.as_slice()[2], 1.0);
        assert!((c.as_slice()[3] - 4.0 / 3.0).abs() < 1e-15);
        assert!(ev(&[0.5]).conjugate().is_err());
        assert!(ExponentVector::new(vec![0.0]).is_err());
        assert_eq!("2,inf".parse::<ExponentVector>().unwrap(), ev(&[2.0, f64::INFINITY]));
        let json = serde_json::to_string(&ev(&[2.0, f64::INFINITY])).unwrap();
        assert_eq!(json, r#"[2.0,"inf"]"#);
        let back: ExponentVector = serde_json::from_str(&json).unwrap();
        assert_eq!(back, ev(&[2.0, f64::INFINITY]));
    }

    #[test]
    fn unit_box_is_close_to_one() {
        // The grid-sampled closed box has boundary nodes at full value, so
        // the quadrature overshoots by O(h).
        let g = Grid::cube(2, 2.0, 401).unwrap();
        let f = SampledFunction::from_fn(&g, "box", |x| {
            if (0.0..=1.0).contains(&x[0]) && (0.0..=1.0).contains(&x[1]) {
                1.0
            } else {
                0.0
            }
        })
        .unwrap();
        let n = mixed_lebesgue_norm(&f, &ev(&[2.0, 3.0])).unwrap();
        assert!((n - 1.0).abs() < 2.0 * g.spacing()[0], "{n}");
    }

    #[test]
    fn equal_exponents_give_the_classical_norm() {
        let g = Grid::new(vec![3.0, 2.0], vec![61, 41]).unwrap();
        let f = SampledFunction::from_fn(&g, "f", |x| (x[0] - 0.3 * x[1]).sin() * (-x[1] * x[1]).exp())
            .unwrap();
        let p = 2.5;
        let classical = quadrature_integral(&f.map(|v| v.abs().powf(p)).unwrap()).powf(1.0 / p);
        let mixed = mixed_lebesgue_norm(&f, &ev(&[p, p])).unwrap();
        assert!((classical - mixed).abs() < 1e-12 * classical);
    }

    #[test]
    fn separable_functions_factor() {
        let g = Grid::new(vec![2.0, 3.0], vec![41, 31]).unwrap();
        let gx = |x: f64| (1.0 + x * x).recip();
        let hy = |y: f64| (-y * y).exp() * (1.0 + y);
        let f = SampledFunction::from_fn(&g, "gh", |x| gx(x[0]) * hy(x[1])).unwrap();
        let q = ev(&[3.0, 1.5]);
        let g1 = Grid::cube(1, 2.0, 41).unwrap();
        let g2 = Grid::cube(1, 3.0, 31).unwrap();
        let fg = SampledFunction::from_fn(&g1, "g", |x| gx(x[0])).unwrap();
        let fh = SampledFunction::from_fn(&g2, "h", |x| hy(x[0])).unwrap();
        let want = mixed_lebesgue_norm(&fg, &ev(&[3.0])).unwrap()
            * mixed_lebesgue_norm(&fh, &ev(&[1.5])).unwrap();
        let got = mixed_lebesgue_norm(&f, &q).unwrap();
        assert!((got - want).abs() < 1e-10 * want);
    }

    #[test]
    fn infinite_exponent_is_axis_max_and_order_matters() {
        let g = Grid::cube(2, 1.0, 5).unwrap();
        let f = SampledFunction::from_fn(&g, "f", |x| x[0] + 2.0 * x[1] * x[1]).unwrap();
        let both = mixed_lebesgue_norm(&f, &ev(&[f64::INFINITY, f64::INFINITY])).unwrap();
        assert_eq!(both, 3.0);
        let a = mixed_lebesgue_norm(&f, &ev(&[1.0, f64::INFINITY])).unwrap();
        let b = mixed_lebesgue_norm(&f, &ev(&[f64::INFINITY, 1.0])).unwrap();
        assert!(a != b);
        assert!(matches!(
            mixed_lebesgue_norm(&f, &ev(&[2.0])),
            Err(Error::Shape(_))
        ));
        let z = SampledFunction::zeros(&g);
        assert_eq!(mixed_lebesgue_norm(&z, &ev(&[f64::INFINITY, 0.5])).unwrap(), 0.0);
    }

    #[test]
    fn holder_examples() {
        let g = Grid::cube(1, 2.0, 81).unwrap();
        let z = SampledFunction::zeros(&g);
        let f = SampledFunction::from_fn(&g, "f", |x| x[0].cos()).unwrap();
        assert_eq!(holder_check(&f, &z, &ev(&[2.0])).unwrap(), (0.0, 0.0));
        let ind = SampledFunction::from_fn(&g, "chi", |x| f64::from(u8::from((0.0..1.0).contains(&x[0])))).unwrap();
        let (l, r) = holder_check(&ind, &ind, &ev(&[2.0])).unwrap();
        assert!((l - r).abs() < 1e-14 && (l - 1.0).abs() < 1e-12);
    }

    #[test]
    fn power_identity_examples() {
        let g = Grid::cube(2, 3.0, 61).unwrap();
        let f = SampledFunction::from_fn(&g, "gauss", |x| (-(x[0] * x[0] + x[1] * x[1])).exp()).unwrap();
        let (l, r) = power_identity_check(&f, &ev(&[2.0, 3.0]), 1.0).unwrap();
        assert_eq!(l, r);
        let (l, r) = power_identity_check(&f, &ev(&[2.0, 3.0]), 2.0).unwrap();
        assert!((l - r).abs() <= 1e-10 * r);
        let chi = SampledFunction::from_fn(&g, "box", |x| f64::from(u8::from(x[0].abs() < 1.0 && x[1].abs() < 0.5))).unwrap();
        let (l, r) = power_identity_check(&chi, &ev(&[1.0, 1.0]), 2.0).unwrap();
        let area = quadrature_integral(&chi);
        assert!((l - area).abs() < 1e-12 && (r - area).abs() < 1e-12);
    }
}
