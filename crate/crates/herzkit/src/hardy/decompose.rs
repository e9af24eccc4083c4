//! Constructive atomic decompositions of Herz–Hardy functions and of
//! molecules.

use serde::{Deserialize, Serialize};

use super::atoms::MoleculeSpec;
use super::window::{radial_maximal, SchwartzWindow};
use crate::anisotropy::AnisotropyVector;
use crate::error::{Error, Result};
use crate::herz::{HerzParams, HerzSpace, DEFAULT_TRUNCATION_THRESHOLD};
use crate::mixed_norm::{norm_values, ExponentVector};
use crate::sampled::{integrate_values, Grid, SampledFunction};

/// One term `λ a` of a decomposition; `a` is supported in `B_ball`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomPiece {
    pub k: i32,
    pub ball: i32,
    pub lambda: f64,
    pub atom: SampledFunction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    /// `∫ f` left over after telescoping, carried by a unit-mass bump near
    /// the origin and not part of either family.
    pub remainder_mass: f64,
    /// Share of `∫|f|` beyond the outermost piece.
    pub tail_fraction: f64,
    pub truncation_warning: bool,
    /// `‖f − Σλa‖₂ / ‖f‖₂`.
    pub l2_residual: f64,
    /// `|∫(f − Σλa)φ_j| / (‖f‖₂ ‖φ_j‖₂)` over the test battery.
    pub pairing: Vec<f64>,
    pub max_pairing: f64,
    /// `Σ|λ|^p` over both families.
    pub lambda_p_sum: f64,
}

/// How `σ_r` is read from `r` in the molecule construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SigmaConvention {
    /// `2^{(σ−1)v} < r ≤ 2^{σv}`.
    #[default]
    VExponent,
    /// `2^{σ−1} < r ≤ 2^σ`.
    Radius,
}

impl SigmaConvention {
    pub fn sigma(self, r: f64, v: f64) -> i32 {
        let l = r.log2();
        let s = match self {
            Self::VExponent => (l / v).ceil(),
            Self::Radius => l.ceil(),
        };
        s.clamp(-1000.0, 1000.0) as i32
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Construction {
    Herz {
        /// Measured constants making every `a_{1,k}` and `a_{2,k}` an atom.
        c_prime1: f64,
        c_prime2: f64,
        herz_hardy_norm: f64,
        /// `Σ|λ|^p / herz_hardy_norm(f)^p`.
        lambda_constant: f64,
    },
    Molecule {
        r: f64,
        convention: SigmaConvention,
        sigma: i32,
        sigma_radius: i32,
        sigma_v_exponent: i32,
        /// `C_k = ‖M_k − F_k‖_q 2^{kva} |B_{σ+k}|^α` per piece.
        piece_constants: Vec<(i32, f64)>,
        piece_constant: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomicDecomposition {
    pub grid: Grid,
    pub params: serde_json::Value,
    pub p: f64,
    pub atoms1: Vec<AtomPiece>,
    pub atoms2: Vec<AtomPiece>,
    /// Unit-mass bump carrying `remainder_mass`.
    pub remainder: SampledFunction,
    pub construction: Construction,
    pub residual_report: ResidualReport,
}

impl AtomicDecomposition {
    pub fn lambdas1(&self) -> Vec<(i32, f64)> {
        self.atoms1.iter().map(|a| (a.k, a.lambda)).collect()
    }

    pub fn lambdas2(&self) -> Vec<(i32, f64)> {
        self.atoms2.iter().map(|a| (a.k, a.lambda)).collect()
    }

    /// `Σλa` over both families.
    pub fn synthesize(&self) -> SampledFunction {
        synthesize_pieces(&self.grid, self.atoms1.iter().chain(&self.atoms2))
    }

    /// `Σλa` plus the remainder.
    pub fn synthesize_with_remainder(&self) -> SampledFunction {
        let s = self.synthesize();
        let v: Vec<f64> = s
            .values()
            .iter()
            .zip(self.remainder.values())
            .map(|(a, b)| a + self.residual_report.remainder_mass * b)
            .collect();
        SampledFunction::new(self.grid.clone(), v, "synthesis").expect("finite sum")
    }
}

fn synthesize_pieces<'a>(grid: &Grid, pieces: impl Iterator<Item = &'a AtomPiece>) -> SampledFunction {
    let mut acc = vec![0.0; grid.len()];
    for p in pieces {
        for (o, v) in acc.iter_mut().zip(p.atom.values()) {
            *o += p.lambda * v;
        }
    }
    SampledFunction::new(grid.clone(), acc, "synthesis").expect("finite sum")
}

/// Ten smooth compactly supported test functions `(1 − |x−c|²/ρ²)⁴₊` with
/// fixed centres and radii scaled to the grid.
pub fn test_battery(grid: &Grid) -> Vec<SampledFunction> {
    const SHAPES: [(f64, f64); 10] = [
        (0.0, 0.1),
        (0.0, 0.4),
        (0.05, 0.03),
        (-0.1, 0.08),
        (0.2, 0.15),
        (-0.3, 0.2),
        (0.45, 0.3),
        (-0.05, 0.6),
        (0.12, 0.05),
        (-0.6, 0.35),
    ];
    let n = grid.dim();
    SHAPES
        .iter()
        .enumerate()
        .map(|(j, &(c, rho))| {
            let l = grid.half_width();
            let centre: Vec<f64> = (0..n).map(|i| c * l[i] * if i % 2 == 1 { -0.7 } else { 1.0 }).collect();
            let radius: Vec<f64> = (0..n).map(|i| (rho * l[i]).max(2.0 * grid.spacing()[i])).collect();
            SampledFunction::from_fn(grid, format!("phi_test{j}"), |x| {
                let u: f64 = (0..n).map(|i| ((x[i] - centre[i]) / radius[i]).powi(2)).sum();
                if u < 1.0 {
                    (1.0 - u).powi(4)
                } else {
                    0.0
                }
            })
            .expect("finite test function")
        })
        .collect()
}

fn l2(grid: &Grid, v: &[f64]) -> f64 {
    let sq: Vec<f64> = v.iter().map(|x| x * x).collect();
    integrate_values(grid, &sq).sqrt()
}

/// Residuals of a synthesis `synth` against `f`.
pub fn residual_report(
    f: &SampledFunction,
    synth: &SampledFunction,
    remainder_mass: f64,
    tail_fraction: f64,
    lambda_p_sum: f64,
) -> ResidualReport {
    let grid = f.grid();
    let diff: Vec<f64> = f.values().iter().zip(synth.values()).map(|(a, b)| a - b).collect();
    let fnorm = l2(grid, f.values());
    let rel = |x: f64, d: f64| if d > 0.0 { x / d } else if x == 0.0 { 0.0 } else { f64::INFINITY };
    let pairing: Vec<f64> = test_battery(grid)
        .iter()
        .map(|phi| {
            let prod: Vec<f64> = diff.iter().zip(phi.values()).map(|(a, b)| a * b).collect();
            rel(integrate_values(grid, &prod).abs(), fnorm * l2(grid, phi.values()))
        })
        .collect();
    ResidualReport {
        remainder_mass,
        tail_fraction,
        truncation_warning: tail_fraction > DEFAULT_TRUNCATION_THRESHOLD,
        l2_residual: rel(l2(grid, &diff), fnorm),
        max_pairing: pairing.iter().cloned().fold(0.0, f64::max),
        pairing,
        lambda_p_sum,
    }
}

fn lambda_p_sum(p: f64, pieces: &[AtomPiece]) -> f64 {
    if p.is_infinite() {
        pieces.iter().map(|a| a.lambda.abs()).fold(0.0, f64::max)
    } else {
        pieces.iter().map(|a| a.lambda.abs().powf(p)).fold(0.0, |s, x| s + x)
    }
}

/// Discrete normalised indicator `χ_E / |E|` and the grid measure `|E|`.
fn unit_mass(grid: &Grid, mask: &[bool]) -> Option<(Vec<f64>, f64)> {
    let ind: Vec<f64> = mask.iter().map(|&b| f64::from(u8::from(b))).collect();
    let m = integrate_values(grid, &ind);
    (m > 0.0).then(|| (ind.iter().map(|x| x / m).collect(), m))
}

fn mass(grid: &Grid, v: &[f64]) -> f64 {
    integrate_values(grid, v)
}

/// The smooth partition `Ψ_k = ψ_k / Σ_j ψ_j` with
/// `ψ_k(x) = (1 − (log₂|x|_a − k)²)³₊`, evaluated at quasi-norm `r > 0`.
pub fn partition_weight(r: f64, k: i32) -> f64 {
    let l = r.log2();
    let bump = |j: f64| {
        let u = l - j;
        if u.abs() < 1.0 {
            (1.0 - u * u).powi(3)
        } else {
            0.0
        }
    };
    let base = l.floor();
    let total = bump(base) + bump(base + 1.0);
    bump(k as f64) / total
}

/// `Σ_{j ≤ k} Ψ_j(r)`; equals 1 at the origin.
pub fn partition_cap(r: f64, k: i32) -> f64 {
    if r == 0.0 {
        return 1.0;
    }
    let base = r.log2().floor() as i32;
    (base - 1..=base + 1).filter(|&j| j <= k).map(|j| partition_weight(r, j)).sum()
}

/// `1 − (1/v)Σa_i/q_i ≤ α < (a₊ − Σa_i/q_i)/v + 1`.
pub fn decomposition_index_range(q: &ExponentVector, a: &AnisotropyVector) -> (f64, f64) {
    let s = q.weighted_inverse_sum(a);
    let v = a.v();
    (1.0 - s / v, (a.a_plus() - s) / v + 1.0)
}

/// Decomposes `f` into two families of central `(α, q, 0)` atoms.
///
/// The pieces `fΨ_k − c_k v_k` form the first family and the telescoped
/// means `m_{k+1}(v_{k+1} − v_k)` the second; `λ` is
/// `C′|B|^α Σ_j ‖(M⁰f)χ_j‖_q` over the neighbouring shells, with `C′`
/// measured so every normalised piece meets the size bound.
pub fn atomic_decompose(f: &SampledFunction, params: &HerzParams, w: &SchwartzWindow) -> Result<AtomicDecomposition> {
    params.validate()?;
    let a = &params.anisotropy;
    let grid = f.grid();
    if grid.dim() != a.dim() || w.dim() != a.dim() {
        return Err(Error::Shape("function, parameters and window dimensions differ".into()));
    }
    if params.q.as_slice().iter().any(|&q| !(q >= 1.0 && q.is_finite())) {
        return Err(Error::Precondition("atomic decomposition needs every q_i in [1, ∞)".into()));
    }
    let (lo, hi) = decomposition_index_range(&params.q, a);
    if !(lo <= params.alpha && params.alpha < hi) {
        return Err(Error::Precondition(format!(
            "alpha = {} outside the decomposition range [{lo}, {hi})",
            params.alpha
        )));
    }
    let space = HerzSpace::new(params.clone(), grid)?;
    let radii = space.shells().quasi_norms().to_vec();
    let (kmin, kmax) = (params.window.k_min, params.window.k_max);
    let m0 = radial_maximal(f, w)?;
    let local: std::collections::BTreeMap<i32, f64> = space.local_norms(&m0)?.into_iter().collect();
    let shell_sum = |from: i32, to: i32| -> f64 {
        local.range(from..=to).map(|(_, v)| v).sum()
    };
    let unit_of = |lo_r: f64, hi_r: f64| -> Result<Vec<f64>> {
        let mask: Vec<bool> = radii.iter().map(|&r| lo_r <= r && r < hi_r).collect();
        unit_mass(grid, &mask).map(|(u, _)| u).ok_or_else(|| {
            Error::Precondition(format!(
                "no grid point with quasi-norm in [{lo_r}, {hi_r}); raise k_min or refine the grid"
            ))
        })
    };

    // Pieces fP_k and the bumps v_k they are compensated with.
    let mut pieces = Vec::new();
    let mut covered = vec![0.0; grid.len()];
    for k in kmin..=kmax {
        let weight: Vec<f64> = radii
            .iter()
            .map(|&r| if k == kmin { partition_cap(r, k) } else if r == 0.0 { 0.0 } else { partition_weight(r, k) })
            .collect();
        for (c, wv) in covered.iter_mut().zip(&weight) {
            *c += wv;
        }
        let piece: Vec<f64> = f.values().iter().zip(&weight).map(|(a, b)| a * b).collect();
        let lower = if k == kmin { 0.0 } else { 2f64.powi(k - 2) };
        let v = unit_of(lower, 2f64.powi(k + 1))?;
        let c = mass(grid, &piece);
        pieces.push((k, piece, v, c));
    }
    let abs: Vec<f64> = f.values().iter().map(|x| x.abs()).collect();
    let tail: Vec<f64> = abs.iter().zip(&covered).map(|(a, c)| a * (1.0 - c).max(0.0)).collect();
    let total = mass(grid, &abs);
    let tail_fraction = if total > 0.0 { mass(grid, &tail) / total } else { 0.0 };

    // First family before normalisation.
    let mut g1 = Vec::new();
    for (k, piece, v, c) in &pieces {
        let g: Vec<f64> = piece.iter().zip(v).map(|(p, vv)| p - c * vv).collect();
        let lo_shell = if *k == kmin { i32::MIN } else { k - 1 };
        g1.push((*k, k + 1, g, shell_sum(lo_shell, k + 1)));
    }
    // Telescoped means m_k = Σ_{i ≥ k} c_i.
    let mut m = vec![0.0; pieces.len() + 1];
    for i in (0..pieces.len()).rev() {
        m[i] = m[i + 1] + pieces[i].3;
    }
    let mut g2 = Vec::new();
    for i in 0..pieces.len().saturating_sub(1) {
        let k = pieces[i].0;
        let h: Vec<f64> = pieces[i + 1].2.iter().zip(&pieces[i].2).map(|(a, b)| m[i + 1] * (a - b)).collect();
        let lo_shell = if k == kmin { i32::MIN } else { k - 1 };
        g2.push((k, k + 2, h, shell_sum(lo_shell, k + 2)));
    }
    let remainder_mass = m[0];
    let remainder = SampledFunction::new(grid.clone(), pieces[0].2.clone(), "remainder bump")?;

    let normalise = |family: Vec<(i32, i32, Vec<f64>, f64)>| -> Result<(Vec<AtomPiece>, f64)> {
        let norms: Vec<f64> = family.iter().map(|(_, _, g, _)| norm_values(grid, g, &params.q)).collect();
        let c_prime = family
            .iter()
            .zip(&norms)
            .filter(|((_, _, _, s), _)| *s > 0.0)
            .map(|((_, _, _, s), n)| n / s)
            .fold(0.0, f64::max);
        let mut out = Vec::new();
        for ((k, ball, g, s), n) in family.into_iter().zip(norms) {
            if n == 0.0 {
                continue;
            }
            let measure = params.ball_measure(ball).powf(params.alpha);
            let lambda = if s > 0.0 && c_prime > 0.0 { c_prime * measure * s } else { n * measure };
            let atom = SampledFunction::new(grid.clone(), g.iter().map(|x| x / lambda).collect(), format!("a_k={k}"))?;
            out.push(AtomPiece { k, ball, lambda, atom });
        }
        Ok((out, c_prime))
    };
    let (atoms1, c_prime1) = normalise(g1)?;
    let (atoms2, c_prime2) = normalise(g2)?;

    let herz_hardy_norm = space.norm(&m0)?;
    let p = params.p;
    let all: Vec<AtomPiece> = atoms1.iter().chain(&atoms2).cloned().collect();
    let lp = lambda_p_sum(p, &all);
    let lambda_constant = if herz_hardy_norm > 0.0 {
        if p.is_infinite() {
            lp / herz_hardy_norm
        } else {
            lp / herz_hardy_norm.powf(p)
        }
    } else {
        0.0
    };
    let synth = synthesize_pieces(grid, all.iter());
    let residual_report = residual_report(f, &synth, remainder_mass, tail_fraction, lp);
    Ok(AtomicDecomposition {
        grid: grid.clone(),
        params: serde_json::json!({ "herz": params, "window": w.summary() }),
        p,
        atoms1,
        atoms2,
        remainder,
        construction: Construction::Herz {
            c_prime1,
            c_prime2,
            herz_hardy_norm,
            lambda_constant,
        },
        residual_report,
    })
}

/// Splits a molecule over the annuli `E_0 = B_{σ_r}`,
/// `E_k = B_{σ_r+k} \ B_{σ_r+k−1}`, `r = ‖M‖_q^{−1/α}`, into the zero-mean
/// pieces `M_k − F_k` and the telescoped means `m_{k+1}(ψ_{k+1} − ψ_k)`.
pub fn molecule_to_atoms(f: &SampledFunction, spec: &MoleculeSpec) -> Result<AtomicDecomposition> {
    molecule_to_atoms_with(f, spec, SigmaConvention::default())
}

pub fn molecule_to_atoms_with(
    f: &SampledFunction,
    spec: &MoleculeSpec,
    convention: SigmaConvention,
) -> Result<AtomicDecomposition> {
    spec.validate()?;
    if spec.s != 0 {
        return Err(Error::Capability("molecule_to_atoms supports s = 0 only".into()));
    }
    if !(spec.alpha > 0.0) {
        return Err(Error::Precondition("molecule_to_atoms needs alpha > 0".into()));
    }
    let a = &spec.anisotropy;
    let grid = f.grid();
    if grid.dim() != a.dim() {
        return Err(Error::Shape("molecule spec and grid dimensions differ".into()));
    }
    let norm = norm_values(grid, f.values(), &spec.q);
    if norm == 0.0 {
        return Err(Error::Precondition("the zero function has no molecule scale".into()));
    }
    let v = a.v();
    let r = norm.powf(-1.0 / spec.alpha);
    let sigma = convention.sigma(r, v);
    let radii: Vec<f64> = (0..grid.len())
        .map(|i| a.quasi_norm(&grid.point(i)).expect("finite grid point"))
        .collect();
    let rmax = radii.iter().cloned().fold(0.0, f64::max);
    let last = ((rmax.log2().floor() as i32 + 1) - sigma).max(0);
    let a_exp = spec.a_exp();
    let ball = |j: i32| a.dyadic_ball_measure(j);

    // Nonempty shells with their pieces M_k and unit masses ψ_k.
    let mut shells = Vec::new();
    for k in 0..=last {
        let hi = 2f64.powi(sigma + k);
        let lo = if k == 0 { -1.0 } else { 2f64.powi(sigma + k - 1) };
        let mask: Vec<bool> = radii.iter().map(|&r| lo <= r && (r < hi || k == last)).collect();
        let Some((psi, _)) = unit_mass(grid, &mask) else { continue };
        let mk: Vec<f64> = f.values().iter().zip(&mask).map(|(&x, &b)| if b { x } else { 0.0 }).collect();
        let c = mass(grid, &mk);
        shells.push((k, mk, psi, c));
    }

    let mut atoms1 = Vec::new();
    let mut piece_constants = Vec::new();
    for (k, mk, psi, c) in &shells {
        let g: Vec<f64> = mk.iter().zip(psi).map(|(x, p)| x - c * p).collect();
        let n = norm_values(grid, &g, &spec.q);
        let ball_j = sigma + k;
        piece_constants.push((*k, n * 2f64.powf(*k as f64 * v * a_exp) * ball(ball_j).powf(spec.alpha)));
        if n == 0.0 {
            continue;
        }
        let lambda = n * ball(ball_j).powf(spec.alpha);
        let atom = SampledFunction::new(grid.clone(), g.iter().map(|x| x / lambda).collect(), format!("M_{k}-F_{k}"))?;
        atoms1.push(AtomPiece { k: *k, ball: ball_j, lambda, atom });
    }
    let mut m = vec![0.0; shells.len() + 1];
    for i in (0..shells.len()).rev() {
        m[i] = m[i + 1] + shells[i].3;
    }
    let mut atoms2 = Vec::new();
    for i in 0..shells.len().saturating_sub(1) {
        let (k, ball_j) = (shells[i].0, sigma + shells[i + 1].0);
        let h: Vec<f64> = shells[i + 1].2.iter().zip(&shells[i].2).map(|(x, y)| m[i + 1] * (x - y)).collect();
        let n = norm_values(grid, &h, &spec.q);
        if n == 0.0 {
            continue;
        }
        let lambda = n * ball(ball_j).powf(spec.alpha);
        let atom = SampledFunction::new(grid.clone(), h.iter().map(|x| x / lambda).collect(), format!("h_{k}"))?;
        atoms2.push(AtomPiece { k, ball: ball_j, lambda, atom });
    }
    let remainder = SampledFunction::new(grid.clone(), shells[0].2.clone(), "remainder bump")?;
    let all: Vec<AtomPiece> = atoms1.iter().chain(&atoms2).cloned().collect();
    let lp = lambda_p_sum(spec.p, &all);
    let synth = synthesize_pieces(grid, all.iter());
    let residual_report = residual_report(f, &synth, m[0], 0.0, lp);
    let piece_constant = piece_constants.iter().map(|x| x.1).fold(0.0, f64::max);
    Ok(AtomicDecomposition {
        grid: grid.clone(),
        params: serde_json::to_value(spec).expect("serialisable spec"),
        p: spec.p,
        atoms1,
        atoms2,
        remainder,
        construction: Construction::Molecule {
            r,
            convention,
            sigma,
            sigma_radius: SigmaConvention::Radius.sigma(r, v),
            sigma_v_exponent: SigmaConvention::VExponent.sigma(r, v),
            piece_constants,
            piece_constant,
        },
        residual_report,
    })
}
