//! Built-in test functions and seeded random batteries.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::anisotropy::AnisotropyVector;
use crate::error::{Error, Result};
use crate::hardy::{project_moments, random_atom, AtomSpec};
use crate::sampled::{Grid, SampledFunction};

/// Seed used when a caller does not supply one.
pub const DEFAULT_SEED: u64 = 20240607;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BuiltinKind {
    /// `amp · e^{−|x|²/(2σ²)}`.
    Gauss,
    /// Indicator of `[−r, r]ⁿ`, each axis weighted ½ on the boundary.
    Box,
    /// Indicator of the dyadic annulus `A_k` in the anisotropic quasi-norm.
    AnnulusIndicator,
    /// `ln|x|`, with `|x|` floored at half a cell.
    LogWeight,
    /// `|x|^γ`, with `|x|` floored at half a cell.
    PowerWeight,
    /// `(n − |x/t|²) e^{−|x/t|²/2}`.
    MexicanHat,
}

impl BuiltinKind {
    pub const ALL: [BuiltinKind; 6] = [
        Self::Gauss,
        Self::Box,
        Self::AnnulusIndicator,
        Self::LogWeight,
        Self::PowerWeight,
        Self::MexicanHat,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Gauss => "gauss",
            Self::Box => "box",
            Self::AnnulusIndicator => "annulus-indicator",
            Self::LogWeight => "log-weight",
            Self::PowerWeight => "power-weight",
            Self::MexicanHat => "mexican-hat",
        }
    }

    pub fn keys(self) -> &'static [&'static str] {
        match self {
            Self::Gauss => &["sigma", "amp"],
            Self::Box => &["r"],
            Self::AnnulusIndicator => &["k"],
            Self::LogWeight => &[],
            Self::PowerWeight => &["gamma"],
            Self::MexicanHat => &["t"],
        }
    }
}

/// A catalog entry with its parameters, written `name` or
/// `name:key=value,key=value`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Builtin {
    pub kind: BuiltinKind,
    pub params: BTreeMap<String, f64>,
}

impl Builtin {
    pub fn new(kind: BuiltinKind) -> Self {
        Self {
            kind,
            params: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    fn get(&self, key: &str, default: f64) -> f64 {
        self.params.get(key).copied().unwrap_or(default)
    }

    pub fn sample(&self, grid: &Grid, anisotropy: &AnisotropyVector) -> Result<SampledFunction> {
        if anisotropy.dim() != grid.dim() {
            return Err(Error::Shape("anisotropy and grid dimensions differ".into()));
        }
        let n = grid.dim() as f64;
        let floor = 0.5 * grid.spacing().iter().cloned().fold(f64::INFINITY, f64::min);
        let euclid = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let label = self.to_string();
        match self.kind {
            BuiltinKind::Gauss => {
                let (sigma, amp) = (self.get("sigma", 1.0), self.get("amp", 1.0));
                positive("sigma", sigma)?;
                SampledFunction::from_fn(grid, label, |x| amp * (-euclid(x).powi(2) / (2.0 * sigma * sigma)).exp())
            }
            BuiltinKind::Box => {
                let r = self.get("r", 1.0);
                positive("r", r)?;
                let tol = 1e-12 * r;
                SampledFunction::from_fn(grid, label, |x| {
                    x.iter()
                        .map(|&xi| {
                            let d = xi.abs() - r;
                            if d.abs() <= tol {
                                0.5
                            } else if d < 0.0 {
                                1.0
                            } else {
                                0.0
                            }
                        })
                        .product()
                })
            }
            BuiltinKind::AnnulusIndicator => {
                let k = self.get("k", 0.0);
                if k.fract() != 0.0 {
                    return Err(Error::Domain(format!("annulus index must be an integer, got {k}")));
                }
                let (lo, hi) = (2f64.powf(k - 1.0), 2f64.powf(k));
                SampledFunction::from_fn(grid, label, |x| {
                    let r = anisotropy.quasi_norm(x).expect("finite grid point");
                    f64::from(u8::from(lo <= r && r < hi))
                })
            }
            BuiltinKind::LogWeight => SampledFunction::from_fn(grid, label, |x| euclid(x).max(floor).ln()),
            BuiltinKind::PowerWeight => {
                let gamma = self.get("gamma", 0.5);
                if !gamma.is_finite() {
                    return Err(Error::Domain("gamma must be finite".into()));
                }
                SampledFunction::from_fn(grid, label, |x| euclid(x).max(floor).powf(gamma))
            }
            BuiltinKind::MexicanHat => {
                let t = self.get("t", 1.0);
                positive("t", t)?;
                SampledFunction::from_fn(grid, label, |x| {
                    let s = (euclid(x) / t).powi(2);
                    (n - s) * (-s / 2.0).exp()
                })
            }
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be positive, got {v}")))
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind.name())?;
        if !self.params.is_empty() {
            let parts: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
            write!(f, ":{}", parts.join(","))?;
        }
        Ok(())
    }
}

impl FromStr for Builtin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        let kind = BuiltinKind::ALL
            .into_iter()
            .find(|k| k.name() == name.trim())
            .ok_or_else(|| {
                let names: Vec<&str> = BuiltinKind::ALL.iter().map(|k| k.name()).collect();
                Error::Parse(format!("unknown builtin '{name}', expected one of {}", names.join(", ")))
            })?;
        let mut b = Builtin::new(kind);
        for part in rest.split(',').filter(|p| !p.trim().is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got '{part}'")))?;
            let k = k.trim();
            if !kind.keys().contains(&k) {
                return Err(Error::Parse(format!(
                    "{} takes {:?}, got '{k}'",
                    kind.name(),
                    kind.keys()
                )));
            }
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("'{v}' is not a number")))?;
            b.params.insert(k.to_string(), v);
        }
        Ok(b)
    }
}

/// A sum of Gaussian bumps `Σ c_j e^{−Σ_i ((x_i − m_ij)/w_ij)²}`, defined
/// independently of any grid so it can be resampled under refinement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BumpMixture {
    pub bumps: Vec<Bump>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: Vec<f64>,
    pub width: Vec<f64>,
    pub amplitude: f64,
}

impl BumpMixture {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.bumps
            .iter()
            .map(|b| {
                let e: f64 = x
                    .iter()
                    .zip(&b.center)
                    .zip(&b.width)
                    .map(|((xi, c), w)| ((xi - c) / w).powi(2))
                    .sum();
                b.amplitude * (-e).exp()
            })
            .sum()
    }

    pub fn sample(&self, grid: &Grid, label: impl Into<String>) -> Result<SampledFunction> {
        SampledFunction::from_fn(grid, label, |x| self.eval(x))
    }
}

/// `count` random mixtures of 1–4 bumps whose centres and widths are drawn
/// relative to `extent` per axis; `nonnegative` forces positive amplitudes.
pub fn mixture_battery(dim: usize, extent: f64, count: usize, nonnegative: bool, seed: u64) -> Vec<BumpMixture> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let m = rng.gen_range(1..=4);
            let bumps = (0..m)
                .map(|_| Bump {
                    center: (0..dim).map(|_| rng.gen_range(-0.5..0.5) * extent).collect(),
                    width: (0..dim).map(|_| rng.gen_range(0.05..0.3) * extent).collect(),
                    amplitude: if nonnegative {
                        rng.gen_range(0.1..1.0)
                    } else {
                        rng.gen_range(-1.0..1.0)
                    },
                })
                .collect();
            BumpMixture { bumps }
        })
        .collect()
}

/// Compactly supported functions inside `B_{k_max}` with vanishing
/// discrete mean: random mixtures times `(1 − (|x|_a/R)²)³₊`,
/// `R = 0.9·2^{k_max}`, with the mean projected out.
pub fn zero_mean_battery(
    grid: &Grid,
    anisotropy: &AnisotropyVector,
    k_max: i32,
    count: usize,
    seed: u64,
) -> Result<Vec<SampledFunction>> {
    let radius = 0.9 * 2f64.powi(k_max);
    let cutoff = SampledFunction::from_fn(grid, "cutoff", |x| {
        let u = anisotropy.quasi_norm(x).expect("finite grid point") / radius;
        if u < 1.0 {
            (1.0 - u * u).powi(3)
        } else {
            0.0
        }
    })?;
    let extent = radius.min(grid.half_width().iter().cloned().fold(f64::INFINITY, f64::min));
    mixture_battery(grid.dim(), extent, count, false, seed)
        .into_iter()
        .enumerate()
        .map(|(j, m)| {
            let f = m.sample(grid, format!("zero-mean {j}"))?.mul(&cutoff)?;
            Ok(project_moments(&f, &cutoff, 0)?.with_label(format!("zero-mean {j}")))
        })
        .collect()
}

/// `count` random atoms of `template`, cycling the ball index through `ks`.
pub fn atom_battery(grid: &Grid, template: &AtomSpec, ks: &[i32], count: usize, seed: u64) -> Result<Vec<(AtomSpec, SampledFunction)>> {
    if ks.is_empty() {
        return Err(Error::Domain("atom battery needs at least one ball index".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|j| {
            let spec = AtomSpec {
                k: ks[j % ks.len()],
                ..template.clone()
            };
            let a = random_atom(grid, &spec, &mut rng)?;
            Ok((spec, a))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampled::quadrature_integral;

    #[test]
    fn parse_and_display_round_trip() {
        let b: Builtin = "gauss:sigma=0.5,amp=2".parse().unwrap();
        assert_eq!(b.kind, BuiltinKind::Gauss);
        assert_eq!(b.params["sigma"], 0.5);
        assert_eq!(b.to_string().parse::<Builtin>().unwrap(), b);
        assert!(matches!("nope".parse::<Builtin>(), Err(Error::Parse(_))));
        assert!(matches!("box:sigma=1".parse::<Builtin>(), Err(Error::Parse(_))));
        assert!(matches!("box:r".parse::<Builtin>(), Err(Error::Parse(_))));
        assert!(matches!("box:r=x".parse::<Builtin>(), Err(Error::Parse(_))));
    }

    #[test]
    fn box_and_gauss_integrals() {
        let g = Grid::cube(1, 4.0, 81).unwrap();
        let a = AnisotropyVector::isotropic(1);
        let b = "box".parse::<Builtin>().unwrap().sample(&g, &a).unwrap();
        assert!((quadrature_integral(&b) - 2.0).abs() < 1e-12);
        let g2 = Grid::cube(1, 8.0, 1025).unwrap();
        let ga = Builtin::new(BuiltinKind::Gauss).with("sigma", 0.5).sample(&g2, &a).unwrap();
        let want = 0.5 * (2.0 * std::f64::consts::PI).sqrt();
        assert!((quadrature_integral(&ga) - want).abs() < 1e-10);
    }

    #[test]
    fn weights_are_floored_and_annulus_matches_mask() {
        let g = Grid::cube(2, 2.0, 17).unwrap();
        let a = AnisotropyVector::new(vec![2.0, 1.0]).unwrap();
        let w = Builtin::new(BuiltinKind::PowerWeight).with("gamma", -2.0).sample(&g, &a).unwrap();
        assert_eq!(w.values()[g.origin()], (0.125f64).powi(-2));
        let l = Builtin::new(BuiltinKind::LogWeight).sample(&g, &a).unwrap();
        assert!(l.values().iter().all(|v| v.is_finite()));
        let ann = Builtin::new(BuiltinKind::AnnulusIndicator).with("k", 1.0).sample(&g, &a).unwrap();
        let p = g.ravel(&[14, 8]);
        assert_eq!(g.point(p), vec![1.5, 0.0]);
        assert_eq!(ann.values()[p], 1.0);
        assert!(Builtin::new(BuiltinKind::AnnulusIndicator).with("k", 0.5).sample(&g, &a).is_err());
    }

    #[test]
    fn batteries_are_seeded() {
        assert_eq!(mixture_battery(2, 3.0, 5, false, 9), mixture_battery(2, 3.0, 5, false, 9));
        assert_ne!(mixture_battery(2, 3.0, 5, false, 9), mixture_battery(2, 3.0, 5, false, 10));
        assert!(mixture_battery(1, 3.0, 5, true, 9)
            .iter()
            .all(|m| m.bumps.iter().all(|b| b.amplitude > 0.0)));
        let g = Grid::cube(1, 8.0, 129).unwrap();
        let a = AnisotropyVector::isotropic(1);
        for f in zero_mean_battery(&g, &a, 2, 4, 1).unwrap() {
            assert!(quadrature_integral(&f).abs() < 1e-13);
            assert!(f.values().iter().zip(g.axis(0)).all(|(v, x)| x.abs() < 3.6 || *v == 0.0));
        }
    }
}
