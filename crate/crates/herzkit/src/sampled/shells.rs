use serde::{Deserialize, Serialize};

use super::Grid;
use crate::anisotropy::{quasi_norm, AnisotropyVector, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::par;

/// The finite range of dyadic indices `k_min ..= k_max` standing in for ℤ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DyadicWindow {
    pub k_min: i32,
    pub k_max: i32,
}

impl Default for DyadicWindow {
    fn default() -> Self {
        Self { k_min: -6, k_max: 4 }
    }
}

impl DyadicWindow {
    pub fn new(k_min: i32, k_max: i32) -> Result<Self> {
        if k_min > k_max {
            return Err(Error::Domain(format!("empty dyadic window {k_min}..={k_max}")));
        }
        if k_min < -1000 || k_max > 1000 {
            return Err(Error::Range("dyadic window exceeds representable scales".into()));
        }
        Ok(Self { k_min, k_max })
    }

    pub fn contains(&self, k: i32) -> bool {
        (self.k_min..=self.k_max).contains(&k)
    }

    pub fn iter(&self) -> impl Iterator<Item = i32> {
        self.k_min..=self.k_max
    }

    pub fn len(&self) -> usize {
        (self.k_max - self.k_min + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Indicator of one dyadic annulus on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnulusMask {
    pub k: i32,
    pub anisotropy: AnisotropyVector,
    pub homogeneous: bool,
    pub indicator: Vec<bool>,
}

impl AnnulusMask {
    pub fn count(&self) -> usize {
        self.indicator.iter().filter(|&&b| b).count()
    }
}

/// `χ_k` (homogeneous: `2^{k−1} ≤ |x|_a < 2^k`) or `χ̃_k` (non-homogeneous:
/// the ball `|x|_a < 1` for `k = 0`, `χ_k` for `k ≥ 1`).
pub fn annulus_mask(
    k: i32,
    a: &AnisotropyVector,
    grid: &Grid,
    homogeneous: bool,
    window: DyadicWindow,
) -> Result<AnnulusMask> {
    Shells::new(grid, a, window, homogeneous)?.mask(k)
}

/// Quasi-norms of every grid point together with their dyadic shell index.
///
/// Built once per (grid, anisotropy, window) and shared by every norm and
/// decomposition that needs `χ_k`.
#[derive(Debug, Clone)]
pub struct Shells {
    grid: Grid,
    anisotropy: AnisotropyVector,
    window: DyadicWindow,
    homogeneous: bool,
    radius: Vec<f64>,
    shell: Vec<Option<i32>>,
}

/// The `k` with `2^{k−1} ≤ r < 2^k`, for `r > 0`.
pub(crate) fn dyadic_index(r: f64) -> i32 {
    let mut k = r.log2().floor() as i32 + 1;
    while 2f64.powi(k - 1) > r {
        k -= 1;
    }
    while r >= 2f64.powi(k) {
        k += 1;
    }
    k
}

impl Shells {
    pub fn new(
        grid: &Grid,
        a: &AnisotropyVector,
        window: DyadicWindow,
        homogeneous: bool,
    ) -> Result<Self> {
        if grid.dim() != a.dim() {
            return Err(Error::Shape(format!(
                "grid dimension {} does not match anisotropy dimension {}",
                grid.dim(),
                a.dim()
            )));
        }
        if !homogeneous && window.k_max < 0 {
            return Err(Error::Domain(
                "non-homogeneous window must reach k = 0".into(),
            ));
        }
        let radius = par::map_indices(grid.len(), |i| {
            quasi_norm(&grid.point(i), a, DEFAULT_TOL).expect("grid points are finite")
        });
        let shell = radius
            .iter()
            .map(|&r| {
                let k = if homogeneous {
                    if r == 0.0 {
                        return None;
                    }
                    dyadic_index(r)
                } else if r < 1.0 {
                    0
                } else {
                    dyadic_index(r)
                };
                window_contains(window, homogeneous, k).then_some(k)
            })
            .collect();
        Ok(Self {
            grid: grid.clone(),
            anisotropy: a.clone(),
            window,
            homogeneous,
            radius,
            shell,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn anisotropy(&self) -> &AnisotropyVector {
        &self.anisotropy
    }

    pub fn window(&self) -> DyadicWindow {
        self.window
    }

    pub fn homogeneous(&self) -> bool {
        self.homogeneous
    }

    /// `|x|_a` at every grid point.
    pub fn quasi_norms(&self) -> &[f64] {
        &self.radius
    }

    /// Shell index of every grid point, `None` outside the window.
    pub fn shell_indices(&self) -> &[Option<i32>] {
        &self.shell
    }

    /// Indices of the shells in play: the window, clipped to `k ≥ 0` when
    /// non-homogeneous.
    pub fn ks(&self) -> Vec<i32> {
        self.window
            .iter()
            .filter(|&k| self.homogeneous || k >= 0)
            .collect()
    }

    pub fn mask(&self, k: i32) -> Result<AnnulusMask> {
        if !window_contains(self.window, self.homogeneous, k) {
            return Err(Error::Range(format!(
                "shell {k} outside the dyadic window {}..={}{}",
                self.window.k_min,
                self.window.k_max,
                if self.homogeneous { "" } else { " (k >= 0)" }
            )));
        }
        Ok(AnnulusMask {
            k,
            anisotropy: self.anisotropy.clone(),
            homogeneous: self.homogeneous,
            indicator: self.shell.iter().map(|&s| s == Some(k)).collect(),
        })
    }

    /// Strict ball indicator `|x|_a < r`.
    pub fn ball(&self, r: f64) -> Vec<bool> {
        self.radius.iter().map(|&q| q < r).collect()
    }

    /// Points covered by no shell of the window.
    pub fn uncovered(&self) -> Vec<bool> {
        self.shell.iter().map(|s| s.is_none()).collect()
    }
}

fn window_contains(window: DyadicWindow, homogeneous: bool, k: i32) -> bool {
    window.contains(k) && (homogeneous || k >= 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampled::{integrate_values, Grid};

    #[test]
    fn dyadic_index_boundaries() {
        assert_eq!(dyadic_index(0.5), 0);
        assert_eq!(dyadic_index(0.999), 0);
        assert_eq!(dyadic_index(1.0), 1);
        assert_eq!(dyadic_index(1.2247), 1);
        assert_eq!(dyadic_index(2.0), 2);
        assert_eq!(dyadic_index(0.25), -1);
    }

    #[test]
    fn euclidean_annulus_zero() {
        let g = Grid::cube(2, 2.0, 41).unwrap();
        let a = AnisotropyVector::isotropic(2);
        let m = annulus_mask(0, &a, &g, true, DyadicWindow::default()).unwrap();
        for (i, &inside) in m.indicator.iter().enumerate() {
            let x = g.point(i);
            let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
            assert_eq!(inside, (0.5..1.0).contains(&r), "{x:?}");
        }
    }

    #[test]
    fn anisotropic_point_lands_in_shell_one() {
        // (1.5, 0) has |x|_a = 1.5^{1/2} for a = (2, 1).
        let g = Grid::new(vec![3.0, 3.0], vec![5, 5]).unwrap();
        let a = AnisotropyVector::new(vec![2.0, 1.0]).unwrap();
        let m = annulus_mask(1, &a, &g, true, DyadicWindow::default()).unwrap();
        let i = g.ravel(&[3, 2]);
        assert_eq!(g.point(i), vec![1.5, 0.0]);
        assert!(m.indicator[i]);
    }

    #[test]
    fn tiny_shells_are_empty_and_window_is_enforced() {
        let g = Grid::cube(2, 1.0, 21).unwrap();
        let a = AnisotropyVector::isotropic(2);
        let m = annulus_mask(-6, &a, &g, true, DyadicWindow::default()).unwrap();
        assert_eq!(m.count(), 0);
        assert!(matches!(
            annulus_mask(5, &a, &g, true, DyadicWindow::default()),
            Err(Error::Range(_))
        ));
        assert!(matches!(
            annulus_mask(-1, &a, &g, false, DyadicWindow::default()),
            Err(Error::Range(_))
        ));
    }

    #[test]
    fn masks_partition_the_window() {
        let g = Grid::cube(2, 6.0, 61).unwrap();
        let a = AnisotropyVector::new(vec![1.5, 1.0]).unwrap();
        let w = DyadicWindow::new(-3, 3).unwrap();
        let s = Shells::new(&g, &a, w, true).unwrap();
        let masks: Vec<_> = s.ks().into_iter().map(|k| s.mask(k).unwrap()).collect();
        for i in 0..g.len() {
            let r = s.quasi_norms()[i];
            let hits = masks.iter().filter(|m| m.indicator[i]).count();
            let inside = r > 0.0 && r >= 2f64.powi(w.k_min - 1) && r < 2f64.powi(w.k_max);
            assert_eq!(hits, usize::from(inside));
        }
        let nh = Shells::new(&g, &a, w, false).unwrap();
        let ball = nh.mask(0).unwrap();
        assert!(ball.indicator[g.origin()]);
        assert_eq!(nh.ks(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn ball_measure_converges() {
        // Quadrature of χ_{B_1} for a = (2, 1) against π·2^3, at two
        // resolutions; the error must shrink under refinement.
        let a = AnisotropyVector::new(vec![2.0, 1.0]).unwrap();
        let want = a.dyadic_ball_measure(1);
        let err = |m: usize| {
            let g = Grid::new(vec![4.5, 2.5], vec![m, m]).unwrap();
            let s = Shells::new(&g, &a, DyadicWindow::default(), true).unwrap();
            let ind: Vec<f64> = s.ball(2.0).iter().map(|&b| f64::from(u8::from(b))).collect();
            (integrate_values(&g, &ind) - want).abs() / want
        };
        let (e1, e2) = (err(201), err(401));
        assert!(e1 < 2e-2 && e2 < 1e-2, "{e1} {e2}");
        assert!(e2 < e1);
    }
}
