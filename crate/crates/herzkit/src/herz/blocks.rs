//! Central block decomposition: `f = Σ_k λ_k b_k` with `b_k` supported in
//! the annulus `A_k ⊂ B_k` and `‖b_k‖_q ≤ |B_k|^{−α}`.

use serde::{Deserialize, Serialize};

use super::{HerzParams, HerzSpace};
use crate::error::{Error, Result};
use crate::sampled::{Grid, SampledFunction};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub k: i32,
    pub lambda: f64,
    pub function: SampledFunction,
}

/// Nonzero blocks only; `grid` allows synthesis of an empty decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockDecomposition {
    pub params: HerzParams,
    pub grid: Grid,
    pub blocks: Vec<Block>,
}

impl BlockDecomposition {
    pub fn lambdas(&self) -> Vec<(i32, f64)> {
        self.blocks.iter().map(|b| (b.k, b.lambda)).collect()
    }

    /// `(Σ|λ_k|^p)^{1/p}`, or `max|λ_k|` for `p = ∞`.
    pub fn lambda_norm(&self) -> f64 {
        let p = self.params.p;
        let l = self.blocks.iter().map(|b| b.lambda.abs());
        if p.is_infinite() {
            l.fold(0.0, f64::max)
        } else {
            l.map(|x| x.powf(p)).sum::<f64>().powf(1.0 / p)
        }
    }
}

fn check_block_params(params: &HerzParams) -> Result<()> {
    params.validate()?;
    if !(params.alpha > 0.0) {
        return Err(Error::Precondition(format!(
            "block decomposition needs alpha > 0, got {}",
            params.alpha
        )));
    }
    if !params.q.all_at_least(1.0) || params.q.as_slice().iter().any(|q| q.is_infinite()) {
        return Err(Error::Precondition(format!(
            "block decomposition needs every q_i in [1, inf), got {}",
            params.q
        )));
    }
    Ok(())
}

/// `λ_k = |B_k|^α ‖f χ_k‖_q`, `b_k = f χ_k / λ_k`; so `(Σ|λ_k|^p)^{1/p}`
/// equals the Herz norm of `f` on the window.
pub fn block_decompose(f: &SampledFunction, params: &HerzParams) -> Result<BlockDecomposition> {
    check_block_params(params)?;
    let space = HerzSpace::new(params.clone(), f.grid())?;
    let shell = space.shells().shell_indices();
    let mut blocks = Vec::new();
    for (k, local) in space.local_norms(f)? {
        if local == 0.0 {
            continue;
        }
        let lambda = params.ball_measure(k).powf(params.alpha) * local;
        let values = f
            .values()
            .iter()
            .zip(shell)
            .map(|(&v, &s)| if s == Some(k) { v / lambda } else { 0.0 })
            .collect();
        blocks.push(Block {
            k,
            lambda,
            function: SampledFunction::new(f.grid().clone(), values, format!("block {k}"))?,
        });
    }
    Ok(BlockDecomposition {
        params: params.clone(),
        grid: f.grid().clone(),
        blocks,
    })
}

pub fn block_synthesize(d: &BlockDecomposition) -> Result<SampledFunction> {
    let mut values = vec![0.0; d.grid.len()];
    for b in &d.blocks {
        if b.function.grid() != &d.grid {
            return Err(Error::Shape(format!("block {} lives on a different grid", b.k)));
        }
        for (acc, &v) in values.iter_mut().zip(b.function.values()) {
            *acc += b.lambda * v;
        }
    }
    SampledFunction::new(d.grid.clone(), values, "synthesized")
}

/// `C` in `‖Σ λ_k b_k‖ ≤ C (Σ|λ_k|^p)^{1/p}` for blocks with
/// `supp b_k ⊂ B_k`, `‖b_k‖_q ≤ |B_k|^{−α}`, `q ≥ 1`.
///
/// With `r = 2^{−vα}`: `p ≤ 1` gives `(1 − r^p)^{−1/p}`; `1 < p < ∞` splits
/// the geometric weight between Hölder factors, giving
/// `(1 − r^{p'/2})^{−1/p'} (1 − r^{p/2})^{−1/p}`; `p = ∞` gives `1/(1 − r)`.
pub fn block_necessity_constant(alpha: f64, p: f64, v: f64) -> Result<f64> {
    if !(alpha > 0.0) || !(p > 0.0) || !(v > 0.0) {
        return Err(Error::Precondition(format!(
            "necessity constant needs alpha, p, v > 0 (got {alpha}, {p}, {v})"
        )));
    }
    let r = 2f64.powf(-v * alpha);
    Ok(if p.is_infinite() {
        1.0 / (1.0 - r)
    } else if p <= 1.0 {
        (1.0 - r.powf(p)).powf(-1.0 / p)
    } else {
        let pc = p / (p - 1.0);
        (1.0 - r.powf(pc / 2.0)).powf(-1.0 / pc) * (1.0 - r.powf(p / 2.0)).powf(-1.0 / p)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anisotropy::AnisotropyVector;
    use crate::herz::herz_norm;
    use crate::mixed_norm::{mixed_lebesgue_norm, ExponentVector};
    use crate::sampled::DyadicWindow;

    fn setup() -> (SampledFunction, HerzParams) {
        let g = Grid::new(vec![6.0, 4.0], vec![61, 41]).unwrap();
        let f = SampledFunction::from_fn(&g, "f", |x| (1.0 + x[0]) * (-(x[0] * x[0] + x[1] * x[1]) / 4.0).exp())
            .unwrap();
        let pr = HerzParams::new(
            0.4,
            1.5,
            ExponentVector::new(vec![2.0, 1.0]).unwrap(),
            AnisotropyVector::new(vec![1.5, 1.0]).unwrap(),
        )
        .unwrap()
        .with_window(DyadicWindow::new(-4, 3).unwrap());
        (f, pr)
    }

    #[test]
    fn round_trip_and_lambda_norm() {
        let (f, pr) = setup();
        let d = block_decompose(&f, &pr).unwrap();
        assert!(!d.blocks.is_empty());
        let back = block_synthesize(&d).unwrap();
        let space = HerzSpace::new(pr.clone(), f.grid()).unwrap();
        let covered: Vec<bool> = space.shells().uncovered().iter().map(|u| !u).collect();
        let fc = f.restrict(&covered).unwrap();
        for (x, y) in back.values().iter().zip(fc.values()) {
            assert!((x - y).abs() <= 4.0 * f64::EPSILON * y.abs());
        }
        let n = herz_norm(&f, &pr).unwrap();
        assert!((d.lambda_norm() - n).abs() < 1e-12 * n);
        for b in &d.blocks {
            let bound = pr.ball_measure(b.k).powf(-pr.alpha);
            let got = mixed_lebesgue_norm(&b.function, &pr.q).unwrap();
            assert!((got - bound).abs() < 1e-12 * bound);
        }
    }

    #[test]
    fn preconditions() {
        let (f, pr) = setup();
        assert!(matches!(block_decompose(&f, &pr.clone().with_alpha(0.0)), Err(Error::Precondition(_))));
        let qi = ExponentVector::new(vec![f64::INFINITY, 2.0]).unwrap();
        assert!(matches!(block_decompose(&f, &pr.clone().with_q(qi)), Err(Error::Precondition(_))));
        let qs = ExponentVector::new(vec![0.5, 2.0]).unwrap();
        assert!(matches!(block_decompose(&f, &pr.with_q(qs)), Err(Error::Precondition(_))));
    }

    #[test]
    fn necessity_constant_values() {
        // p = 1: Σ_k r^k = 1/(1 − r).
        let c = block_necessity_constant(1.0, 1.0, 1.0).unwrap();
        assert!((c - 2.0).abs() < 1e-15);
        let c = block_necessity_constant(0.5, f64::INFINITY, 2.0).unwrap();
        assert!((c - 2.0).abs() < 1e-15);
        assert!(block_necessity_constant(0.0, 1.0, 1.0).is_err());
        assert!(block_necessity_constant(0.5, 2.0, 1.0).unwrap() > 1.0);
    }

    #[test]
    fn necessity_constant_bounds_synthesis() {
        // One block per shell, each with unit-size norm ratio, signs mixed.
        let (f, pr) = setup();
        let d = block_decompose(&f, &pr).unwrap();
        let mut alt = d.clone();
        for (i, b) in alt.blocks.iter_mut().enumerate() {
            b.lambda = if i % 2 == 0 { 1.0 } else { -0.5 };
        }
        let g = block_synthesize(&alt).unwrap();
        let c = block_necessity_constant(pr.alpha, pr.p, pr.anisotropy.v()).unwrap();
        assert!(herz_norm(&g, &pr).unwrap() <= c * alt.lambda_norm());
    }
}
