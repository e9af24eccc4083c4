//! Discrete convolution `Σ_y K(x − y) f(y) w(y)` against kernels tabulated on
//! grid offsets.

use crate::par;
use crate::sampled::Grid;

/// Kernel values on integer offsets `d`, the physical offset being `d·h`.
#[derive(Debug, Clone)]
pub(crate) struct OffsetKernel {
    dim: usize,
    offsets: Vec<isize>,
    values: Vec<f64>,
}

impl OffsetKernel {
    /// Tabulates `k(d·h)` for `|d_i| ≤ extent_i` (clipped to the grid), the
    /// zero offset replaced by `diagonal`.
    pub fn tabulate<K>(grid: &Grid, extent: Option<&[usize]>, diagonal: f64, k: K) -> Self
    where
        K: Fn(&[f64]) -> f64 + Sync,
    {
        let n = grid.dim();
        let ext: Vec<isize> = (0..n)
            .map(|i| {
                let full = grid.points()[i] - 1;
                extent.map_or(full, |e| e[i].min(full)) as isize
            })
            .collect();
        let sizes: Vec<usize> = ext.iter().map(|&e| (2 * e + 1) as usize).collect();
        let total: usize = sizes.iter().product();
        let h = grid.spacing();
        let decode = |mut j: usize, d: &mut [isize]| {
            for i in 0..n {
                d[i] = (j % sizes[i]) as isize - ext[i];
                j /= sizes[i];
            }
        };
        let raw = par::map_indices(total, |j| {
            let mut d = vec![0isize; n];
            decode(j, &mut d);
            if d.iter().all(|&x| x == 0) {
                return diagonal;
            }
            let o: Vec<f64> = d.iter().zip(h).map(|(&x, &hi)| x as f64 * hi).collect();
            k(&o)
        });
        let mut offsets = Vec::new();
        let mut values = Vec::new();
        let mut d = vec![0isize; n];
        for (j, v) in raw.into_iter().enumerate() {
            if v != 0.0 {
                decode(j, &mut d);
                offsets.extend_from_slice(&d);
                values.push(v);
            }
        }
        Self {
            dim: n,
            offsets,
            values,
        }
    }

    #[cfg(test)]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// `out(x) = Σ_d K(d) f(x − d) w(x − d)`.
    pub fn apply(&self, grid: &Grid, f: &[f64]) -> Vec<f64> {
        let w = grid.weights();
        let fw: Vec<f64> = f.iter().zip(&w).map(|(a, b)| a * b).collect();
        self.apply_raw(grid, &fw)
    }

    /// `out(x) = Σ_d K(d) g(x − d)`, without quadrature weights.
    pub fn apply_raw(&self, grid: &Grid, g: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let pts: Vec<isize> = grid.points().iter().map(|&p| p as isize).collect();
        let strides: Vec<isize> = grid.strides().iter().map(|&s| s as isize).collect();
        par::map_indices(grid.len(), |x| {
            let mut idx = vec![0usize; n];
            grid.unravel(x, &mut idx);
            let mut acc = 0.0;
            'entries: for (e, &kv) in self.values.iter().enumerate() {
                let d = &self.offsets[e * n..(e + 1) * n];
                let mut flat = 0isize;
                for i in 0..n {
                    let y = idx[i] as isize - d[i];
                    if y < 0 || y >= pts[i] {
                        continue 'entries;
                    }
                    flat += y * strides[i];
                }
                acc += kv * g[flat as usize];
            }
            acc
        })
    }
}

/// `out(x) = Σ_d taps[e + d] g(x − d·e_axis)` with `e = (taps.len() − 1)/2`;
/// values outside the grid count as zero.
pub(crate) fn axis_convolve(grid: &Grid, g: &[f64], axis: usize, taps: &[f64]) -> Vec<f64> {
    let e = (taps.len() / 2) as isize;
    let stride = grid.strides()[axis];
    let len = grid.points()[axis] as isize;
    par::map_indices(grid.len(), |x| {
        let i = ((x / stride) % grid.points()[axis]) as isize;
        let base = x - i as usize * stride;
        let lo = (i - len + 1).max(-e);
        let hi = i.min(e);
        (lo..=hi)
            .map(|d| taps[(e + d) as usize] * g[base + (i - d) as usize * stride])
            .sum()
    })
}
