//! Library values against independent closed forms and brute-force sums.

use std::f64::consts::PI;

use herzkit::anisotropy::{polar_integrate, unit_ball_volume};
use herzkit::builtins::{mixture_battery, Builtin, BuiltinKind};
use herzkit::herz::{block_necessity_constant, quasi_triangle_constant};
use herzkit::operators::{ap_constant, cz_apply, fractional_integral, BallFamily, StandardKernel};
use herzkit::{mixed_lebesgue_norm, AnisotropyVector, ExponentVector, Grid, HerzParams, HerzSpace, SampledFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

/// 1/ρ² solves x₁² u² + x₂² u − 1 = 0 for a = (2, 1); the root is taken
/// in the cancellation-free form.
fn quasi_21(x1: f64, x2: f64) -> f64 {
    let (a, b) = (x1 * x1, x2 * x2);
    let u = 2.0 / (b + (b * b + 4.0 * a).sqrt());
    u.powf(-0.5)
}

#[test]
fn quasi_norm_matches_quadratic_root() {
    let a = AnisotropyVector::new(vec![2.0, 1.0]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..2000 {
        let x = [rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0)];
        assert!(rel(a.quasi_norm(&x).unwrap(), quasi_21(x[0], x[1])) < 1e-12, "{x:?}");
    }
    assert_eq!(a.quasi_norm(&[0.0, 0.0]).unwrap(), 0.0);
}

#[test]
fn isotropic_quasi_norm_is_euclidean() {
    let a = AnisotropyVector::isotropic(3);
    let x = [3.0, -4.0, 12.0];
    assert!((a.quasi_norm(&x).unwrap() - 13.0).abs() < 1e-12);
}

#[test]
fn ball_volumes() {
    assert!((unit_ball_volume(1) - 2.0).abs() < 1e-15);
    assert!((unit_ball_volume(2) - PI).abs() < 1e-15);
    assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-14);
    // Ellipse with semi-axes r², r.
    let a = AnisotropyVector::new(vec![2.0, 1.0]).unwrap();
    for r in [0.5, 1.0, 3.0] {
        assert!(rel(a.ball_measure(r), PI * r.powi(3)) < 1e-14);
    }
}

#[test]
fn polar_integration_of_a_gaussian() {
    // ∫ exp(−|x|²) over R² is π; the ball of radius 8 holds all but e^{−64}.
    let a = AnisotropyVector::isotropic(2);
    let m = polar_integrate(|y| (-(y[0] * y[0] + y[1] * y[1])).exp(), &a, 8.0, 2048, 256).unwrap();
    assert!(rel(m, PI) < 1e-5, "{m}");
}

/// Iterated trapezoid with explicit loops, x₁ innermost.
fn brute_mixed_2d(g: &Grid, v: &[f64], q: [f64; 2]) -> f64 {
    let (n1, n2) = (g.points()[0], g.points()[1]);
    let (h1, h2) = (g.spacing()[0], g.spacing()[1]);
    let w = |i: usize, n: usize, h: f64| if i == 0 || i == n - 1 { h / 2.0 } else { h };
    let inner: Vec<f64> = (0..n2)
        .map(|j| {
            let line = &v[j * n1..(j + 1) * n1];
            if q[0].is_infinite() {
                line.iter().fold(0.0f64, |m, x| m.max(x.abs()))
            } else {
                line.iter()
                    .enumerate()
                    .map(|(i, x)| x.abs().powf(q[0]) * w(i, n1, h1))
                    .sum::<f64>()
                    .powf(1.0 / q[0])
            }
        })
        .collect();
    if q[1].is_infinite() {
        inner.iter().cloned().fold(0.0, f64::max)
    } else {
        inner.iter().enumerate().map(|(j, x)| x.powf(q[1]) * w(j, n2, h2)).sum::<f64>().powf(1.0 / q[1])
    }
}

#[test]
fn mixed_norm_matches_brute_force() {
    let g = Grid::new(vec![2.0, 3.0], vec![41, 23]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for (j, m) in mixture_battery(2, 2.0, 12, false, 3).iter().enumerate() {
        let f = m.sample(&g, "f").unwrap();
        let q = match j % 4 {
            0 => [1.0, 2.0],
            1 => [f64::INFINITY, 1.5],
            2 => [rng.gen_range(0.5..4.0), f64::INFINITY],
            _ => [rng.gen_range(0.5..4.0), rng.gen_range(0.5..4.0)],
        };
        let lib = mixed_lebesgue_norm(&f, &ExponentVector::new(q.to_vec()).unwrap()).unwrap();
        assert!(rel(lib, brute_mixed_2d(&g, f.values(), q)) < 1e-12, "q = {q:?}");
    }
}

#[test]
fn herz_norm_matches_brute_force_shells() {
    // 1D isotropic: shells are 2^{k−1} <= |x| < 2^k, |B_k| = 2·2^k.
    let g = Grid::cube(1, 8.0, 257).unwrap();
    let f = mixture_battery(1, 8.0, 1, false, 4)[0].sample(&g, "f").unwrap();
    let (alpha, p, q) = (0.3, 1.5, 2.5);
    let params = HerzParams::new(alpha, p, ExponentVector::new(vec![q]).unwrap(), AnisotropyVector::isotropic(1)).unwrap();
    let lib = HerzSpace::new(params, &g).unwrap().norm(&f).unwrap();
    let xs = g.axis(0);
    let h = g.spacing()[0];
    let mut total = 0.0;
    for k in -12..=5 {
        let (lo, hi) = (2f64.powi(k - 1), 2f64.powi(k));
        let s: f64 = xs
            .iter()
            .zip(f.values())
            .enumerate()
            .filter(|(_, (x, _))| x.abs() >= lo && x.abs() < hi)
            .map(|(i, (_, v))| v.abs().powf(q) * if i == 0 || i == xs.len() - 1 { h / 2.0 } else { h })
            .sum();
        total += ((2.0 * hi).powf(alpha) * s.powf(1.0 / q)).powf(p);
    }
    assert!(rel(lib, total.powf(1.0 / p)) < 1e-12);
}

#[test]
fn quasi_triangle_constants() {
    let q = |v: &[f64]| ExponentVector::new(v.to_vec()).unwrap();
    assert_eq!(quasi_triangle_constant(1.0, &q(&[1.0, 2.0])), 1.0);
    assert_eq!(quasi_triangle_constant(0.5, &q(&[2.0])), 2.0);
    assert_eq!(quasi_triangle_constant(0.5, &q(&[0.5, 2.0])), 4.0);
    assert_eq!(quasi_triangle_constant(2.0, &q(&[0.5, 0.5])), 4.0);
}

#[test]
fn block_necessity_constants() {
    // v = 1, α = 1: r = 1/2.
    assert!((block_necessity_constant(1.0, 1.0, 1.0).unwrap() - 2.0).abs() < 1e-15);
    assert!((block_necessity_constant(1.0, f64::INFINITY, 1.0).unwrap() - 2.0).abs() < 1e-15);
    assert!((block_necessity_constant(1.0, 0.5, 1.0).unwrap() - (1.0 - 0.5f64.sqrt()).powi(-2)).abs() < 1e-12);
    let c2 = (1.0 - 0.5f64).powf(-0.5) * (1.0 - 0.5f64).powf(-0.5);
    assert!((block_necessity_constant(1.0, 2.0, 1.0).unwrap() - c2).abs() < 1e-12);
}

#[test]
fn hilbert_transform_of_an_interval() {
    let g = Grid::cube(1, 5.0, 1025).unwrap();
    let a = AnisotropyVector::isotropic(1);
    let chi = Builtin::new(BuiltinKind::Box).sample(&g, &a).unwrap();
    let mut k = StandardKernel::hilbert();
    k.validate(&g).unwrap();
    let hf = cz_apply(&k, &chi).unwrap();
    for (x, v) in g.axis(0).iter().zip(hf.values()) {
        if (x.abs() - 1.0).abs() < 0.1 || x.abs() < 0.1 {
            continue;
        }
        let want = ((x + 1.0) / (x - 1.0)).abs().ln() / PI;
        assert!((v - want).abs() < 0.01 * want.abs().max(0.05), "x = {x}: {v} vs {want}");
    }
}

#[test]
fn fractional_integral_of_an_interval() {
    // I_{1/2} χ[-1,1](x) = 2(√(1+x) + √(1−x)) for |x| < 1.
    let g = Grid::cube(1, 5.0, 1025).unwrap();
    let chi = Builtin::new(BuiltinKind::Box).sample(&g, &AnisotropyVector::isotropic(1)).unwrap();
    let i = fractional_integral(&chi, 0.5).unwrap();
    for (x, v) in g.axis(0).iter().zip(i.values()) {
        if x.abs() <= 0.9 {
            let want = 2.0 * ((1.0 + x).sqrt() + (1.0 - x).sqrt());
            assert!(rel(*v, want) < 0.01, "x = {x}: {v} vs {want}");
        }
    }
}

#[test]
fn a2_constant_of_a_power_weight() {
    // Intervals with an endpoint at 0 give (1+γ)^{-1}(1−γ)^{-1} = 4/3 at γ = 1/2.
    let g = Grid::cube(1, 8.0, 257).unwrap();
    let a = AnisotropyVector::isotropic(1);
    let w = Builtin::new(BuiltinKind::PowerWeight).with("gamma", 0.5).sample(&g, &a).unwrap();
    let c = ap_constant(&w, 2.0, &BallFamily::dyadic(&g, &a, 8).unwrap()).unwrap().constant;
    assert!(rel(c, 4.0 / 3.0) < 0.03, "{c}");
    let one = SampledFunction::constant(&g, 2.5).unwrap();
    let c1 = ap_constant(&one, 3.0, &BallFamily::dyadic(&g, &a, 5).unwrap()).unwrap().constant;
    assert!((c1 - 1.0).abs() < 1e-14);
}
