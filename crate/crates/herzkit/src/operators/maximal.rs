//! Uncentred Hardy–Littlewood and fractional maximal operators.

use super::BallFamily;
use crate::error::{Error, Result};
use crate::sampled::SampledFunction;

/// `Mf(x) = max { (1/|B|) ∫_B |f| : B ∋ x }` over the family.
pub fn hl_maximal(f: &SampledFunction, family: &BallFamily) -> Result<SampledFunction> {
    family.check_grid(f.grid())?;
    let v: Vec<f64> = f.values().iter().map(|x| x.abs()).collect();
    let mut out = family.sup_containing(&v, |s, m| s / m);
    // The single-point ball averages to |f(x)| exactly; `(|f|w)/w` may not.
    for (o, a) in out.iter_mut().zip(&v) {
        *o = o.max(*a);
    }
    SampledFunction::new(f.grid().clone(), out, format!("M[{}]", f.label()))
}

/// `M_α f(x) = max { |B|^{−(1−α/n)} ∫_B |f| : B ∋ x }`, `0 ≤ α < n`.
pub fn fractional_maximal(f: &SampledFunction, alpha: f64, family: &BallFamily) -> Result<SampledFunction> {
    family.check_grid(f.grid())?;
    let n = f.dim() as f64;
    if !(0.0..n).contains(&alpha) {
        return Err(Error::Domain(format!("alpha must lie in [0, {n}), got {alpha}")));
    }
    if alpha == 0.0 {
        return Ok(hl_maximal(f, family)?.with_label(format!("M_0[{}]", f.label())));
    }
    let v: Vec<f64> = f.values().iter().map(|x| x.abs()).collect();
    let e = 1.0 - alpha / n;
    let out = family.sup_containing(&v, move |s, m| s * m.powf(-e));
    SampledFunction::new(f.grid().clone(), out, format!("M_{alpha}[{}]", f.label()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anisotropy::AnisotropyVector;
    use crate::sampled::Grid;

    fn indicator01(g: &Grid) -> SampledFunction {
        SampledFunction::from_fn(g, "chi", |x| f64::from(u8::from((0.0..=1.0).contains(&x[0])))).unwrap()
    }

    /// Exhaustive search over every interval of grid points containing `x`.
    fn brute(f: &SampledFunction, x: usize, e: f64) -> f64 {
        let w = f.grid().weights();
        let n = f.grid().len();
        let mut best: f64 = 0.0;
        for lo in 0..=x {
            for hi in x..n {
                let s: f64 = (lo..=hi).map(|y| f.values()[y].abs() * w[y]).sum();
                let m: f64 = (lo..=hi).map(|y| w[y]).sum();
                best = best.max(s * m.powf(-e));
            }
        }
        best
    }

    #[test]
    fn constants_are_fixed_and_m_dominates() {
        let g = Grid::cube(2, 2.0, 21).unwrap();
        let a = AnisotropyVector::new(vec![2.0, 1.0]).unwrap();
        let fam = BallFamily::covering(&g, &a).unwrap();
        let c = SampledFunction::constant(&g, 2.5).unwrap();
        let mc = hl_maximal(&c, &fam).unwrap();
        assert!(mc.values().iter().all(|&v| (v - 2.5).abs() < 1e-13));
        let f = SampledFunction::from_fn(&g, "f", |x| (x[0] * 3.0).sin() * x[1]).unwrap();
        let mf = hl_maximal(&f, &fam).unwrap();
        for (m, v) in mf.values().iter().zip(f.values()) {
            assert!(*m >= v.abs());
        }
    }

    #[test]
    fn indicator_at_three_is_a_third() {
        let g = Grid::cube(1, 4.0, 161).unwrap();
        let f = indicator01(&g);
        let fam = BallFamily::all_intervals(&g).unwrap();
        let mf = hl_maximal(&f, &fam).unwrap();
        let x3 = g.ravel(&[140]);
        assert_eq!(g.point(x3), vec![3.0]);
        let oracle = brute(&f, x3, 1.0);
        assert!((mf.values()[x3] - oracle).abs() < 1e-14);
        // [0, 3] holds 21 of 61 points.
        assert!((oracle - 21.0 / 61.0).abs() < 1e-14);
        assert!((oracle - 1.0 / 3.0).abs() < 0.02);
    }

    #[test]
    fn fractional_reduces_and_matches_brute_force() {
        let g = Grid::cube(1, 2.0, 41).unwrap();
        let f = indicator01(&g);
        let fam = BallFamily::all_intervals(&g).unwrap();
        let m0 = fractional_maximal(&f, 0.0, &fam).unwrap();
        assert_eq!(m0, hl_maximal(&f, &fam).unwrap().with_label(m0.label()));
        let mh = fractional_maximal(&f, 0.5, &fam).unwrap();
        let x = g.ravel(&[25]);
        assert_eq!(g.point(x), vec![0.5]);
        assert!((mh.values()[x] - brute(&f, x, 0.5)).abs() < 1e-14);
        assert!(fractional_maximal(&f, 1.0, &fam).is_err());
        let z = fractional_maximal(&SampledFunction::zeros(&g), 0.5, &fam).unwrap();
        assert!(z.is_zero());
    }
}
