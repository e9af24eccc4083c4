//! Central atoms and molecules: checks and a seeded generator.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::anisotropy::AnisotropyVector;
use crate::error::{Error, Result};
use crate::mixed_norm::{norm_values, ExponentVector};
use crate::sampled::{integrate_values, Grid, SampledFunction};

/// Relative moment tolerance: `|∫ f x^β| ≤ MOMENT_TOL · ‖f‖_q · Π r_i^{β_i}`.
pub const MOMENT_TOL: f64 = 1e-9;
/// Relative slack on the size condition.
pub const SIZE_TOL: f64 = 1e-9;

/// A central `(α, q, s)` atom on `B_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomSpec {
    pub alpha: f64,
    pub q: ExponentVector,
    pub s: usize,
    pub k: i32,
    pub anisotropy: AnisotropyVector,
    /// Restricted atoms live on balls with `k ≥ 0`.
    pub restricted: bool,
}

impl AtomSpec {
    /// `⌊(v/a₋)(α + (1/v)Σ a_i/q_i − 1)⌋`, clipped at zero: the smallest
    /// moment order the atomic decomposition needs.
    pub fn minimal_moment_order(&self) -> usize {
        let a = &self.anisotropy;
        let v = a.v();
        let x = (v / a.a_minus()) * (self.alpha + self.q.weighted_inverse_sum(a) / v - 1.0);
        x.floor().max(0.0) as usize
    }

    /// `|B_k| = v_n 2^{kv}`.
    pub fn ball_measure(&self) -> f64 {
        self.anisotropy.dyadic_ball_measure(self.k)
    }
}

/// Multi-indices `β` with `|β| ≤ s` in `n` variables, graded.
pub fn multi_indices(n: usize, s: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![0; n]];
    let mut layer = out.clone();
    for _ in 0..s {
        let mut next = Vec::new();
        for b in &layer {
            let start = b.iter().rposition(|&x| x > 0).unwrap_or(0);
            for i in start..n {
                let mut c = b.clone();
                c[i] += 1;
                next.push(c);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

fn monomial(x: &[f64], beta: &[usize]) -> f64 {
    x.iter().zip(beta).map(|(&xi, &b)| xi.powi(b as i32)).product()
}

/// `∫ f x^β` for every `β` with `|β| ≤ s`.
pub fn moments(f: &SampledFunction, s: usize) -> Vec<(Vec<usize>, f64)> {
    let grid = f.grid();
    multi_indices(grid.dim(), s)
        .into_iter()
        .map(|beta| {
            let prod: Vec<f64> = f
                .values()
                .iter()
                .enumerate()
                .map(|(i, &v)| if v == 0.0 { 0.0 } else { v * monomial(&grid.point(i), &beta) })
                .collect();
            let m = integrate_values(grid, &prod);
            (beta, m)
        })
        .collect()
}

/// Scale-aware zero test for the moments of `f` on a ball of index `k`.
fn moment_excess(f: &SampledFunction, q: &ExponentVector, s: usize, k: i32, a: &AnisotropyVector) -> (f64, bool) {
    let norm = norm_values(f.grid(), f.values(), q);
    let radii: Vec<f64> = a.exponents().iter().map(|&ai| 2f64.powf(k as f64 * ai)).collect();
    let mut worst: f64 = 0.0;
    for (beta, m) in moments(f, s) {
        let scale = MOMENT_TOL * norm * monomial(&radii, &beta).abs();
        if m != 0.0 {
            worst = worst.max(if scale > 0.0 { m.abs() / scale } else { f64::INFINITY });
        }
    }
    (worst, worst <= 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomReport {
    pub support_ok: bool,
    /// Grid points outside `B_k` carrying nonzero values.
    pub support_violations: usize,
    pub norm: f64,
    pub bound: f64,
    /// `norm / bound`; the size condition allows up to `1 + SIZE_TOL`.
    pub size_ratio: f64,
    pub size_ok: bool,
    /// Largest `|∫ f x^β|` in units of its tolerance.
    pub moment_excess: f64,
    pub moments_ok: bool,
    pub restricted_ok: bool,
    pub passed: bool,
}

pub fn atom_check(f: &SampledFunction, spec: &AtomSpec) -> Result<AtomReport> {
    let grid = f.grid();
    if grid.dim() != spec.anisotropy.dim() || spec.q.dim() != grid.dim() {
        return Err(Error::Shape("atom spec and grid dimensions differ".into()));
    }
    let r = 2f64.powi(spec.k);
    let mut x = vec![0.0; grid.dim()];
    let mut outside = 0;
    for (i, &v) in f.values().iter().enumerate() {
        if v != 0.0 {
            grid.point_into(i, &mut x);
            if !spec.anisotropy.within(&x, r) {
                outside += 1;
            }
        }
    }
    let norm = norm_values(grid, f.values(), &spec.q);
    let bound = spec.ball_measure().powf(-spec.alpha);
    let size_ratio = norm / bound;
    let (moment_excess, moments_ok) = moment_excess(f, &spec.q, spec.s, spec.k, &spec.anisotropy);
    let restricted_ok = !spec.restricted || spec.k >= 0;
    let size_ok = size_ratio <= 1.0 + SIZE_TOL;
    Ok(AtomReport {
        support_ok: outside == 0,
        support_violations: outside,
        norm,
        bound,
        size_ratio,
        size_ok,
        moment_excess,
        moments_ok,
        restricted_ok,
        passed: outside == 0 && size_ok && moments_ok && restricted_ok,
    })
}

/// A central `(α, q, s; ε)` molecule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoleculeSpec {
    pub alpha: f64,
    pub q: ExponentVector,
    pub s: usize,
    pub epsilon: f64,
    pub anisotropy: AnisotropyVector,
    /// Ball index of a dyadic molecule, which must also satisfy
    /// `‖f‖_q ≤ |B_l|^{−α}`.
    pub l: Option<i32>,
    /// Exponent of the `λ` sums reported by the conversion to atoms.
    pub p: f64,
}

impl MoleculeSpec {
    pub fn new(alpha: f64, q: ExponentVector, s: usize, epsilon: f64, anisotropy: AnisotropyVector) -> Result<Self> {
        let spec = Self {
            alpha,
            q,
            s,
            epsilon,
            anisotropy,
            l: None,
            p: 1.0,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn base(&self) -> f64 {
        1.0 - self.q.weighted_inverse_sum(&self.anisotropy) / self.anisotropy.v()
    }

    /// `a = (1 − (1/v)Σ a_i/q_i) − α + ε`.
    pub fn a_exp(&self) -> f64 {
        self.base() - self.alpha + self.epsilon
    }

    /// `d = (1 − (1/v)Σ a_i/q_i) + ε`.
    pub fn d_exp(&self) -> f64 {
        self.base() + self.epsilon
    }

    pub fn validate(&self) -> Result<()> {
        if self.q.dim() != self.anisotropy.dim() {
            return Err(Error::Shape("q and anisotropy dimensions differ".into()));
        }
        let a = &self.anisotropy;
        let floor = (self.s as f64).max((a.v() / a.a_minus()) * (self.alpha + self.q.weighted_inverse_sum(a) - 1.0));
        if !(self.epsilon > floor) {
            return Err(Error::Precondition(format!(
                "molecule needs epsilon > {floor}, got {}",
                self.epsilon
            )));
        }
        let (ae, de) = (self.a_exp(), self.d_exp());
        if !(0.0 < ae && ae < de) {
            return Err(Error::Precondition(format!("molecule needs 0 < a < d, got a = {ae}, d = {de}")));
        }
        if !(self.p > 0.0) {
            return Err(Error::Domain(format!("p must be positive, got {}", self.p)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoleculeReport {
    /// `R_q = ‖f‖_q^{a/d} ‖ |x|_a^{vd} f ‖_q^{1 − a/d}`.
    pub r_q: f64,
    pub norm: f64,
    pub weighted_norm: f64,
    pub moment_excess: f64,
    pub moments_ok: bool,
    /// Size condition of dyadic molecules.
    pub size_ok: Option<bool>,
    pub passed: bool,
}

pub fn molecule_check(f: &SampledFunction, spec: &MoleculeSpec) -> Result<MoleculeReport> {
    spec.validate()?;
    let grid = f.grid();
    if grid.dim() != spec.anisotropy.dim() {
        return Err(Error::Shape("molecule spec and grid dimensions differ".into()));
    }
    let v = spec.anisotropy.v();
    let (ae, de) = (spec.a_exp(), spec.d_exp());
    let mut x = vec![0.0; grid.dim()];
    let weighted: Vec<f64> = f
        .values()
        .iter()
        .enumerate()
        .map(|(i, &val)| {
            if val == 0.0 {
                return 0.0;
            }
            grid.point_into(i, &mut x);
            let r = spec.anisotropy.quasi_norm(&x).expect("finite grid point");
            r.powf(v * de) * val
        })
        .collect();
    let norm = norm_values(grid, f.values(), &spec.q);
    let weighted_norm = norm_values(grid, &weighted, &spec.q);
    let r_q = if norm == 0.0 {
        0.0
    } else {
        norm.powf(ae / de) * weighted_norm.powf(1.0 - ae / de)
    };
    // Moments are measured on the scale where the molecule is concentrated.
    let k = if norm > 0.0 {
        (norm.powf(-1.0 / spec.alpha.max(f64::MIN_POSITIVE)) / crate::anisotropy::unit_ball_volume(grid.dim()))
            .log2()
            .div_euclid(v)
            .clamp(-60.0, 60.0) as i32
    } else {
        0
    };
    let (moment_excess, moments_ok) = moment_excess(f, &spec.q, spec.s, spec.l.unwrap_or(k), &spec.anisotropy);
    let size_ok = spec
        .l
        .map(|l| norm <= spec.anisotropy.dyadic_ball_measure(l).powf(-spec.alpha) * (1.0 + SIZE_TOL));
    Ok(MoleculeReport {
        r_q,
        norm,
        weighted_norm,
        moment_excess,
        moments_ok,
        size_ok,
        passed: r_q.is_finite() && moments_ok && size_ok.unwrap_or(true),
    })
}

/// A random atom on `B_k`: a few Gaussian bumps times the cutoff
/// `(1 − (|x|_a/2^k)²)³₊`, with the moments up to order `s` projected out
/// and the size scaled to `u·|B_k|^{−α}` for a random `u ∈ [1/2, 1]`.
pub fn random_atom<R: Rng>(grid: &Grid, spec: &AtomSpec, rng: &mut R) -> Result<SampledFunction> {
    let a = &spec.anisotropy;
    if grid.dim() != a.dim() {
        return Err(Error::Shape("atom spec and grid dimensions differ".into()));
    }
    let r = 2f64.powi(spec.k);
    let n = grid.dim();
    let cutoff = SampledFunction::from_fn(grid, "cutoff", |x| {
        let u = a.quasi_norm(x).expect("finite") / r;
        if u < 1.0 {
            (1.0 - u * u).powi(3)
        } else {
            0.0
        }
    })?;
    if cutoff.is_zero() {
        return Err(Error::Precondition(format!("ball B_{} holds no interior grid point", spec.k)));
    }
    let bumps: Vec<(Vec<f64>, Vec<f64>, f64)> = (0..3)
        .map(|_| {
            let c: Vec<f64> = a.exponents().iter().map(|&ai| rng.gen_range(-0.5..0.5) * r.powf(ai)).collect();
            let w: Vec<f64> = a.exponents().iter().map(|&ai| rng.gen_range(0.2..0.6) * r.powf(ai)).collect();
            let amp = rng.gen_range(-1.0..1.0);
            (c, w, amp)
        })
        .collect();
    let raw = SampledFunction::from_fn(grid, "bumps", |x| {
        bumps
            .iter()
            .map(|(c, w, amp)| {
                let e: f64 = (0..n).map(|i| ((x[i] - c[i]) / w[i]).powi(2)).sum();
                amp * (-e).exp()
            })
            .sum()
    })?
    .mul(&cutoff)?;
    let g = project_moments(&raw, &cutoff, spec.s)?;
    let norm = norm_values(grid, g.values(), &spec.q);
    if norm == 0.0 {
        return Err(Error::Precondition("generated atom vanished after projection".into()));
    }
    let u = rng.gen_range(0.5..=1.0);
    let scale = u * spec.ball_measure().powf(-spec.alpha) / norm;
    Ok(g.scale(scale)?.with_label(format!("atom k={}", spec.k)))
}

/// `g − Σ_β c_β x^β ξ` with `c` chosen so that every moment of order
/// `≤ s` vanishes (a Gram solve against `x^β ξ`).
pub fn project_moments(g: &SampledFunction, xi: &SampledFunction, s: usize) -> Result<SampledFunction> {
    let grid = g.grid();
    let betas = multi_indices(grid.dim(), s);
    let m = betas.len();
    let basis: Vec<Vec<f64>> = betas
        .iter()
        .map(|b| {
            xi.values()
                .iter()
                .enumerate()
                .map(|(i, &v)| if v == 0.0 { 0.0 } else { v * monomial(&grid.point(i), b) })
                .collect()
        })
        .collect();
    let mut gram = DMatrix::zeros(m, m);
    let mut rhs = DVector::zeros(m);
    for (r, gamma) in betas.iter().enumerate() {
        let mono: Vec<f64> = (0..grid.len()).map(|i| monomial(&grid.point(i), gamma)).collect();
        for (c, phi) in basis.iter().enumerate() {
            let prod: Vec<f64> = phi.iter().zip(&mono).map(|(a, b)| a * b).collect();
            gram[(r, c)] = integrate_values(grid, &prod);
        }
        let prod: Vec<f64> = g.values().iter().zip(&mono).map(|(a, b)| a * b).collect();
        rhs[r] = integrate_values(grid, &prod);
    }
    let coef = gram
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Precondition("moment system is singular on this grid".into()))?;
    let mut out = g.values().to_vec();
    for (c, phi) in coef.iter().zip(&basis) {
        for (o, p) in out.iter_mut().zip(phi) {
            *o -= c * p;
        }
    }
    SampledFunction::new(grid.clone(), out, g.label())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn spec(k: i32) -> AtomSpec {
        AtomSpec {
            alpha: 0.75,
            q: ExponentVector::new(vec![2.0]).unwrap(),
            s: 0,
            k,
            anisotropy: AnisotropyVector::isotropic(1),
            restricted: false,
        }
    }

    #[test]
    fn multi_index_counts() {
        assert_eq!(multi_indices(2, 0).len(), 1);
        assert_eq!(multi_indices(2, 2).len(), 6);
        assert_eq!(multi_indices(3, 2).len(), 10);
    }

    #[test]
    fn odd_bump_is_an_atom_and_failures_are_detected() {
        let g = Grid::cube(1, 4.0, 401).unwrap();
        let sp = spec(0);
        let odd = SampledFunction::from_fn(&g, "odd", |x| {
            if x[0].abs() < 1.0 {
                x[0] * (1.0 - x[0] * x[0]).powi(2)
            } else {
                0.0
            }
        })
        .unwrap();
        let n = norm_values(&g, odd.values(), &sp.q);
        let atom = odd.scale(sp.ball_measure().powf(-sp.alpha) / n).unwrap();
        assert!(atom_check(&atom, &sp).unwrap().passed);
        let moved = SampledFunction::from_fn(&g, "moved", |x| {
            let y = x[0] - 2.5;
            if y.abs() < 1.0 {
                y * (1.0 - y * y).powi(2)
            } else {
                0.0
            }
        })
        .unwrap()
        .scale(sp.ball_measure().powf(-sp.alpha) / n)
        .unwrap();
        let r = atom_check(&moved, &sp).unwrap();
        assert!(!r.support_ok && r.support_violations > 0);
        let big = atom_check(&atom.scale(2.0).unwrap(), &sp).unwrap();
        assert!(!big.size_ok && (big.size_ratio - 2.0).abs() < 1e-12);
        let restricted = AtomSpec { restricted: true, k: -1, ..sp };
        assert!(!atom_check(&atom, &restricted).unwrap().restricted_ok);
    }

    #[test]
    fn generated_atoms_pass() {
        let g = Grid::cube(2, 4.0, 81).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (k, s) in [(0, 0), (1, 1), (0, 2)] {
            let sp = AtomSpec {
                alpha: 0.5,
                q: ExponentVector::new(vec![2.0, 1.5]).unwrap(),
                s,
                k,
                anisotropy: AnisotropyVector::new(vec![1.5, 1.0]).unwrap(),
                restricted: false,
            };
            let a = random_atom(&g, &sp, &mut rng).unwrap();
            let r = atom_check(&a, &sp).unwrap();
            assert!(r.passed, "{k} {s} {r:?}");
            assert!(r.size_ratio >= 0.5 - 1e-12);
        }
    }

    #[test]
    fn molecule_examples() {
        let g = Grid::cube(1, 8.0, 513).unwrap();
        let ms = MoleculeSpec::new(0.75, ExponentVector::new(vec![2.0]).unwrap(), 0, 1.0, AnisotropyVector::isotropic(1)).unwrap();
        let z = molecule_check(&SampledFunction::zeros(&g), &ms).unwrap();
        assert_eq!(z.r_q, 0.0);
        assert!(z.passed);
        let gm = SampledFunction::from_fn(&g, "gm", |x| x[0] * (-x[0] * x[0]).exp()).unwrap();
        let r = molecule_check(&gm, &ms).unwrap();
        assert!(r.r_q.is_finite() && r.r_q > 0.0 && r.moments_ok);
        assert!(MoleculeSpec::new(0.75, ExponentVector::new(vec![2.0]).unwrap(), 0, 0.1, AnisotropyVector::isotropic(1)).is_err());
    }
}
