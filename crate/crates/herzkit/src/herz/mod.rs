//! Homogeneous and non-homogeneous anisotropic mixed-norm Herz norms.
//!
//! `‖f‖ = ( Σ_k |B_k|^{αp} ‖f χ_k‖_q^p )^{1/p}` with `|B_k| = v_n 2^{kv}`,
//! summed over a finite dyadic window (the non-homogeneous norm uses `k ≥ 0`
//! and the central ball for `k = 0`).

mod blocks;

pub use blocks::{
    block_decompose, block_necessity_constant, block_synthesize, Block, BlockDecomposition,
};

use serde::{Deserialize, Serialize};

use crate::anisotropy::AnisotropyVector;
use crate::error::{Error, Result};
use crate::mixed_norm::{norm_values, ExponentVector};
use crate::par;
use crate::sampled::{DyadicWindow, Grid, SampledFunction, Shells};

/// Mass fraction outside the window above which a truncation warning is
/// raised.
pub const DEFAULT_TRUNCATION_THRESHOLD: f64 = 1e-3;

/// `(α, p, q, a)` plus the homogeneous flag and the dyadic window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HerzParams {
    pub alpha: f64,
    #[serde(with = "crate::serde_ext::extended_f64")]
    pub p: f64,
    pub q: ExponentVector,
    pub anisotropy: AnisotropyVector,
    pub homogeneous: bool,
    pub window: DyadicWindow,
}

impl HerzParams {
    /// Homogeneous parameters on the default window.
    pub fn new(alpha: f64, p: f64, q: ExponentVector, anisotropy: AnisotropyVector) -> Result<Self> {
        let params = Self {
            alpha,
            p,
            q,
            anisotropy,
            homogeneous: true,
            window: DyadicWindow::default(),
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_window(mut self, window: DyadicWindow) -> Self {
        self.window = window;
        self
    }

    pub fn non_homogeneous(mut self) -> Self {
        self.homogeneous = false;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_p(mut self, p: f64) -> Self {
        self.p = p;
        self
    }

    pub fn with_q(mut self, q: ExponentVector) -> Self {
        self.q = q;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.alpha.is_finite() {
            return Err(Error::Domain(format!("alpha must be finite, got {}", self.alpha)));
        }
        if !(self.p > 0.0) {
            return Err(Error::Domain(format!("p must lie in (0, inf], got {}", self.p)));
        }
        if self.q.dim() != self.anisotropy.dim() {
            return Err(Error::Shape(format!(
                "q has {} entries, anisotropy has {}",
                self.q.dim(),
                self.anisotropy.dim()
            )));
        }
        Ok(())
    }

    /// `|B_k| = v_n 2^{kv}`.
    pub fn ball_measure(&self, k: i32) -> f64 {
        self.anisotropy.dyadic_ball_measure(k)
    }
}

/// One summand of the Herz norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShellTerm {
    pub k: i32,
    pub ball_measure: f64,
    pub local_norm: f64,
    pub weighted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HerzNormReport {
    pub value: f64,
    pub terms: Vec<ShellTerm>,
    /// `‖f·(1 − Σχ_k)‖_q / ‖f‖_q`, the origin node excluded.
    pub truncation: f64,
    /// Share of `‖f‖_q` carried by the origin node (homogeneous norms only).
    pub origin_fraction: f64,
}

impl HerzNormReport {
    pub fn truncation_exceeds(&self, threshold: f64) -> bool {
        self.truncation > threshold
    }
}

/// A Herz norm bound to one grid, with the shell geometry cached.
#[derive(Debug, Clone)]
pub struct HerzSpace {
    params: HerzParams,
    shells: Shells,
}

impl HerzSpace {
    pub fn new(params: HerzParams, grid: &Grid) -> Result<Self> {
        params.validate()?;
        let shells = Shells::new(grid, &params.anisotropy, params.window, params.homogeneous)?;
        Ok(Self { params, shells })
    }

    /// Shares the shell geometry with a different `(α, p, q)`.
    pub fn with_params(&self, params: HerzParams) -> Result<Self> {
        params.validate()?;
        if params.anisotropy != self.params.anisotropy
            || params.window != self.params.window
            || params.homogeneous != self.params.homogeneous
        {
            return Self::new(params, self.shells.grid());
        }
        Ok(Self {
            params,
            shells: self.shells.clone(),
        })
    }

    pub fn params(&self) -> &HerzParams {
        &self.params
    }

    pub fn shells(&self) -> &Shells {
        &self.shells
    }

    pub fn grid(&self) -> &Grid {
        self.shells.grid()
    }

    fn check(&self, f: &SampledFunction) -> Result<()> {
        if f.grid() != self.grid() {
            return Err(Error::Shape("function grid differs from the Herz space grid".into()));
        }
        Ok(())
    }

    /// `‖f χ_k‖_q` for every shell index in play.
    pub fn local_norms(&self, f: &SampledFunction) -> Result<Vec<(i32, f64)>> {
        self.check(f)?;
        Ok(self.local_norms_of(f.values()))
    }

    pub(crate) fn local_norms_of(&self, values: &[f64]) -> Vec<(i32, f64)> {
        let ks = self.shells.ks();
        let shell = self.shells.shell_indices();
        let grid = self.grid();
        let q = &self.params.q;
        par::map_slice(&ks, |&k| {
            let masked: Vec<f64> = values
                .iter()
                .zip(shell)
                .map(|(&v, &s)| if s == Some(k) { v } else { 0.0 })
                .collect();
            (k, norm_values(grid, &masked, q))
        })
    }

    pub fn norm(&self, f: &SampledFunction) -> Result<f64> {
        self.check(f)?;
        Ok(self.combine(&self.local_norms_of(f.values())))
    }

    /// `(Σ_k (|B_k|^α n_k)^p)^{1/p}`, or the supremum for `p = ∞`.
    pub fn combine(&self, local: &[(i32, f64)]) -> f64 {
        let p = self.params.p;
        let weighted = local
            .iter()
            .filter(|(_, n)| *n > 0.0)
            .map(|&(k, n)| self.params.ball_measure(k).powf(self.params.alpha) * n);
        if p.is_infinite() {
            weighted.fold(0.0, f64::max)
        } else {
            let s: f64 = weighted.map(|t| t.powf(p)).sum();
            s.powf(1.0 / p)
        }
    }

    pub fn report(&self, f: &SampledFunction) -> Result<HerzNormReport> {
        let local = self.local_norms(f)?;
        let value = self.combine(&local);
        let terms = local
            .iter()
            .map(|&(k, n)| {
                let m = self.params.ball_measure(k);
                ShellTerm {
                    k,
                    ball_measure: m,
                    local_norm: n,
                    weighted: m.powf(self.params.alpha) * n,
                }
            })
            .collect();
        let grid = self.grid();
        let q = &self.params.q;
        let total = norm_values(grid, f.values(), q);
        let origin = grid.origin();
        let uncovered = self.shells.uncovered();
        let outside: Vec<f64> = f
            .values()
            .iter()
            .enumerate()
            .map(|(i, &v)| if uncovered[i] && i != origin { v } else { 0.0 })
            .collect();
        let (truncation, origin_fraction) = if total > 0.0 {
            let mut at_origin = vec![0.0; grid.len()];
            if self.params.homogeneous {
                at_origin[origin] = f.values()[origin];
            }
            (
                norm_values(grid, &outside, q) / total,
                norm_values(grid, &at_origin, q) / total,
            )
        } else {
            (0.0, 0.0)
        };
        Ok(HerzNormReport {
            value,
            terms,
            truncation,
            origin_fraction,
        })
    }
}

pub fn herz_norm(f: &SampledFunction, params: &HerzParams) -> Result<f64> {
    HerzSpace::new(params.clone(), f.grid())?.norm(f)
}

pub fn herz_norm_report(f: &SampledFunction, params: &HerzParams) -> Result<HerzNormReport> {
    HerzSpace::new(params.clone(), f.grid())?.report(f)
}

/// `C` with `‖f + g‖ ≤ C(‖f‖ + ‖g‖)`:
/// `Π_i max(1, 2^{1/q_i − 1}) · max(1, 2^{1/p − 1})`.
///
/// Each axis of the iterated norm contributes its own factor, so an axis
/// with `q_i ≥ 1` cannot offset one with `q_i < 1`.
pub fn quasi_triangle_constant(p: f64, q: &ExponentVector) -> f64 {
    let eq: f64 = q
        .as_slice()
        .iter()
        .map(|&qi| (1.0 / qi - 1.0).max(0.0))
        .sum();
    let ep = (1.0 / p - 1.0).max(0.0);
    2f64.powf(eq) * 2f64.powf(ep)
}

/// `C = max_k |B_k|^{α₂ − α₁}` over the non-homogeneous window, so that
/// `‖f‖_{α₂} ≤ C ‖f‖_{α₁}`.
pub fn inclusion_alpha_constant(params: &HerzParams, alpha1: f64, alpha2: f64) -> Result<f64> {
    if params.homogeneous {
        return Err(Error::Precondition(
            "the alpha inclusion is stated for non-homogeneous Herz spaces only".into(),
        ));
    }
    Ok(params
        .window
        .iter()
        .filter(|&k| k >= 0)
        .map(|k| params.ball_measure(k).powf(alpha2 - alpha1))
        .fold(0.0, f64::max))
}
