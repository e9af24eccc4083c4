//! Muckenhoupt-type weight constants and the BMO seminorm over a ball
//! family.

use serde::{Deserialize, Serialize};

use super::{BallFamily, FamilySummary};
use crate::error::{Error, Result};
use crate::sampled::SampledFunction;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightReport {
    pub p: f64,
    /// Second exponent of the `A_{p,q}` constant.
    pub q: Option<f64>,
    pub constant: f64,
    /// `max_B (mean_B w) / (min_B w)`, computed alongside `A_p`.
    pub a1_constant: Option<f64>,
    pub family: FamilySummary,
}

fn check_weight(w: &SampledFunction, family: &BallFamily) -> Result<()> {
    family.check_grid(w.grid())?;
    if let Some(bad) = w.values().iter().find(|&&x| !(x > 0.0)) {
        return Err(Error::Domain(format!("weights must be positive, found {bad}")));
    }
    Ok(())
}

fn mean(ball: &[usize], v: &[f64], wt: &[f64]) -> f64 {
    let (s, m) = ball
        .iter()
        .fold((0.0, 0.0), |(s, m), &y| (s + v[y] * wt[y], m + wt[y]));
    s / m
}

/// `[w]_{A_p} = max_B (mean_B w)(mean_B w^{−p′/p})^{p/p′}` and
/// `[w]_{A_1}`, for `p > 1`.
pub fn ap_constant(w: &SampledFunction, p: f64, family: &BallFamily) -> Result<WeightReport> {
    check_weight(w, family)?;
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::Domain(format!("A_p needs 1 < p < inf, got {p}")));
    }
    let qw = w.grid().weights();
    let v = w.values();
    // p′/p = 1/(p − 1) and p/p′ = p − 1.
    let dual: Vec<f64> = v.iter().map(|x| x.powf(-1.0 / (p - 1.0))).collect();
    let per_ball = family.map_balls(|ball| {
        let mw = mean(ball, v, &qw);
        let md = mean(ball, &dual, &qw);
        let min = ball.iter().map(|&y| v[y]).fold(f64::INFINITY, f64::min);
        (mw * md.powf(p - 1.0), mw / min)
    });
    let (ap, a1) = per_ball
        .iter()
        .fold((0.0f64, 0.0f64), |(a, b), &(x, y)| (a.max(x), b.max(y)));
    Ok(WeightReport {
        p,
        q: None,
        constant: ap,
        a1_constant: Some(a1),
        family: family.summary(),
    })
}

/// `max_B (mean_B w)(mean_B w^{−p′/q})^{q/p′}` for `1 < p < ∞`, `q > 0`.
pub fn apq_constant(w: &SampledFunction, p: f64, q: f64, family: &BallFamily) -> Result<WeightReport> {
    check_weight(w, family)?;
    if !(p > 1.0 && p.is_finite()) || !(q > 0.0 && q.is_finite()) {
        return Err(Error::Domain(format!("A_(p,q) needs 1 < p < inf and 0 < q < inf, got {p}, {q}")));
    }
    let pc = p / (p - 1.0);
    let qw = w.grid().weights();
    let v = w.values();
    let dual: Vec<f64> = v.iter().map(|x| x.powf(-pc / q)).collect();
    let per_ball = family.map_balls(|ball| mean(ball, v, &qw) * mean(ball, &dual, &qw).powf(q / pc));
    Ok(WeightReport {
        p,
        q: Some(q),
        constant: per_ball.into_iter().fold(0.0, f64::max),
        a1_constant: None,
        family: family.summary(),
    })
}

/// `max_B (1/|B|) ∫_B |b − mean_B b|`.
pub fn bmo_norm(b: &SampledFunction, family: &BallFamily) -> Result<f64> {
    family.check_grid(b.grid())?;
    let qw = b.grid().weights();
    let v = b.values();
    let per_ball = family.map_balls(|ball| {
        let m = mean(ball, v, &qw);
        let (s, mu) = ball
            .iter()
            .fold((0.0, 0.0), |(s, mu), &y| (s + (v[y] - m).abs() * qw[y], mu + qw[y]));
        s / mu
    });
    Ok(per_ball.into_iter().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anisotropy::AnisotropyVector;
    use crate::sampled::Grid;

    fn family(g: &Grid, levels: usize) -> BallFamily {
        BallFamily::dyadic(g, &AnisotropyVector::isotropic(g.dim()), levels).unwrap()
    }

    fn power(g: &Grid, gamma: f64) -> SampledFunction {
        let floor = g.spacing()[0] / 2.0;
        SampledFunction::from_fn(g, "power", |x| x[0].abs().max(floor).powf(gamma)).unwrap()
    }

    #[test]
    fn unit_weight_is_exactly_one() {
        let g = Grid::cube(2, 1.0, 15).unwrap();
        let fam = family(&g, 5);
        let one = SampledFunction::constant(&g, 1.0).unwrap();
        let r = ap_constant(&one, 2.0, &fam).unwrap();
        assert_eq!(r.constant, 1.0);
        assert_eq!(r.a1_constant, Some(1.0));
        assert_eq!(apq_constant(&one, 1.5, 3.0, &fam).unwrap().constant, 1.0);
    }

    #[test]
    fn ap_is_at_least_one() {
        let g = Grid::cube(1, 4.0, 129).unwrap();
        let r = ap_constant(&power(&g, 0.5), 2.0, &family(&g, 7)).unwrap();
        assert!(r.constant >= 1.0 && r.constant < 3.0, "{}", r.constant);
        assert!(r.a1_constant.unwrap() >= 1.0);
    }

    #[test]
    fn nonpositive_weight_is_a_domain_error() {
        let g = Grid::cube(1, 1.0, 9).unwrap();
        let w = SampledFunction::from_fn(&g, "w", |x| x[0]).unwrap();
        assert!(matches!(ap_constant(&w, 2.0, &family(&g, 3)), Err(Error::Domain(_))));
        assert!(matches!(apq_constant(&w, 2.0, 2.0, &family(&g, 3)), Err(Error::Domain(_))));
    }

    #[test]
    fn apq_is_scale_invariant() {
        // c·w scales the constant by c^{1 − (p′/q)(q/p′)} = c^0.
        let g = Grid::cube(1, 3.0, 65).unwrap();
        let fam = family(&g, 6);
        let w = SampledFunction::from_fn(&g, "w", |x| (1.0 + x[0].abs()).powf(-0.5)).unwrap();
        let a = apq_constant(&w, 1.5, 3.0, &fam).unwrap().constant;
        let b = apq_constant(&w.scale(7.0).unwrap(), 1.5, 3.0, &fam).unwrap().constant;
        assert!((a - b).abs() < 1e-12 * a);
    }

    #[test]
    fn bmo_bounds() {
        let g = Grid::cube(1, 4.0, 129).unwrap();
        let fam = BallFamily::all_intervals(&g).unwrap();
        assert_eq!(bmo_norm(&SampledFunction::constant(&g, 3.0).unwrap(), &fam).unwrap(), 0.0);
        let b = SampledFunction::from_fn(&g, "b", |x| (5.0 * x[0]).sin()).unwrap();
        let n = bmo_norm(&b, &fam).unwrap();
        assert!(n > 0.0 && n <= 2.0 * b.max_abs());
    }
}
