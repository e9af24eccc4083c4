//! The Rubio de Francia iteration `ℜ_K h = Σ_{k≤K} M^k h / (2B)^k`.

use super::{hl_maximal, BallFamily};
use crate::error::{Error, Result};
use crate::sampled::SampledFunction;

/// Headroom applied to the largest observed norm ratio.
pub const B_HEADROOM: f64 = 1.1;

fn check_nonnegative(h: &SampledFunction) -> Result<()> {
    if let Some(bad) = h.values().iter().find(|&&x| x < 0.0) {
        return Err(Error::Domain(format!("the iteration needs h >= 0, found {bad}")));
    }
    Ok(())
}

/// The iterates `h, Mh, …, M^K h`.
pub fn maximal_iterates(h: &SampledFunction, k: usize, family: &BallFamily) -> Result<Vec<SampledFunction>> {
    let mut out = Vec::with_capacity(k + 1);
    out.push(h.clone());
    for _ in 0..k {
        let next = hl_maximal(out.last().expect("non-empty"), family)?;
        out.push(next);
    }
    Ok(out)
}

/// Sums precomputed iterates `M^k h` for `k ≤ K`.
pub fn rubio_from_iterates(iterates: &[SampledFunction], b: f64, k: usize) -> Result<SampledFunction> {
    if !(b > 0.5) {
        return Err(Error::Domain(format!("B must exceed 1/2, got {b}")));
    }
    if iterates.len() <= k {
        return Err(Error::Shape(format!("need {} iterates, have {}", k + 1, iterates.len())));
    }
    let grid = iterates[0].grid();
    let mut acc = vec![0.0; grid.len()];
    let mut c = 1.0;
    for it in &iterates[..=k] {
        for (a, v) in acc.iter_mut().zip(it.values()) {
            *a += c * v;
        }
        c /= 2.0 * b;
    }
    SampledFunction::new(grid.clone(), acc, format!("R[{}]", iterates[0].label()))
}

/// `ℜ_K h = Σ_{k=0}^{K} M^k h / (2B)^k` with `M⁰h = h`.
pub fn rubio_de_francia(h: &SampledFunction, b: f64, k: usize, family: &BallFamily) -> Result<SampledFunction> {
    check_nonnegative(h)?;
    if !(b > 0.5) {
        return Err(Error::Domain(format!("B must exceed 1/2, got {b}")));
    }
    rubio_from_iterates(&maximal_iterates(h, k, family)?, b, k)
}

/// `B = 1.1 · max ‖M^{k+1}h‖ / ‖M^k h‖` over the inputs and `k < K`, so that
/// every step of the iteration is bounded by `B` in the chosen norm.
pub fn estimate_maximal_bound<N>(
    hs: &[SampledFunction],
    k: usize,
    family: &BallFamily,
    norm: N,
) -> Result<f64>
where
    N: Fn(&SampledFunction) -> Result<f64>,
{
    let mut worst: f64 = 1.0;
    for h in hs {
        check_nonnegative(h)?;
        let its = maximal_iterates(h, k, family)?;
        let norms: Vec<f64> = its.iter().map(&norm).collect::<Result<_>>()?;
        for pair in norms.windows(2) {
            if pair[0] > 0.0 {
                worst = worst.max(pair[1] / pair[0]);
            }
        }
    }
    Ok(B_HEADROOM * worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anisotropy::AnisotropyVector;
    use crate::sampled::Grid;

    #[test]
    fn constant_input_sums_a_geometric_series() {
        let g = Grid::cube(1, 2.0, 33).unwrap();
        let fam = BallFamily::covering(&g, &AnisotropyVector::isotropic(1)).unwrap();
        let one = SampledFunction::constant(&g, 1.0).unwrap();
        let b = 1.3;
        let r = rubio_de_francia(&one, b, 30, &fam).unwrap();
        let limit = 2.0 * b / (2.0 * b - 1.0);
        let partial: f64 = (0..=30).map(|k| (2.0 * b).powi(-k)).sum();
        for v in r.values() {
            assert!((v - partial).abs() < 1e-12);
            assert!((v - limit).abs() < 1e-10);
        }
    }

    #[test]
    fn r1_and_preconditions() {
        let g = Grid::cube(1, 2.0, 33).unwrap();
        let fam = BallFamily::dyadic(&g, &AnisotropyVector::isotropic(1), 4).unwrap();
        let h = SampledFunction::from_fn(&g, "h", |x| (-(x[0] * 3.0).powi(2)).exp()).unwrap();
        let r = rubio_de_francia(&h, 1.0, 3, &fam).unwrap();
        assert!(r.values().iter().zip(h.values()).all(|(a, b)| a >= b));
        let r0 = rubio_de_francia(&h, 1.0, 0, &fam).unwrap();
        assert_eq!(r0.values(), h.values());
        assert!(rubio_de_francia(&h, 0.5, 3, &fam).is_err());
        let neg = h.scale(-1.0).unwrap();
        assert!(matches!(rubio_de_francia(&neg, 1.0, 3, &fam), Err(Error::Domain(_))));
    }
}
