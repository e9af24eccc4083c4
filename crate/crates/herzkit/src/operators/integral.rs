//! Fractional integrals, Calderón–Zygmund operators and commutators.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::conv::OffsetKernel;
use crate::error::{Error, Result};
use crate::par;
use crate::sampled::{Grid, SampledFunction};

fn euclid(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `∫_{[−h/2, h/2]^n} |z|^{−(n−α)} dz`: closed form in one dimension.
/// Otherwise homogeneity gives `I = S/(1 − 2^{−α})`, where `S` is the
/// integral over the cell minus its half-size core, taken by the midpoint
/// rule on `16^n` sub-cells.
fn diagonal_cell(grid: &Grid, alpha: f64) -> f64 {
    let h = grid.spacing();
    let n = grid.dim();
    if n == 1 {
        return 2.0 * (h[0] / 2.0).powf(alpha) / alpha;
    }
    const SUB: usize = 16;
    let total = SUB.pow(n as u32);
    let vol: f64 = h.iter().map(|hi| hi / SUB as f64).product();
    let e = n as f64 - alpha;
    let core = SUB / 4..3 * SUB / 4;
    let shell: f64 = (0..total)
        .filter_map(|mut j| {
            let mut in_core = true;
            let z: Vec<f64> = (0..n)
                .map(|i| {
                    let m = j % SUB;
                    j /= SUB;
                    in_core &= core.contains(&m);
                    (m as f64 + 0.5) / SUB as f64 * h[i] - h[i] / 2.0
                })
                .collect();
            (!in_core).then(|| euclid(&z).powf(-e) * vol)
        })
        .sum();
    shell / (1.0 - 2f64.powf(-alpha))
}

/// `I_α f(x) = ∫ f(y) |x − y|^{−(n−α)} dy`, `0 < α < n`.
pub fn fractional_integral(f: &SampledFunction, alpha: f64) -> Result<SampledFunction> {
    let grid = f.grid();
    let n = grid.dim() as f64;
    if !(alpha > 0.0 && alpha < n) {
        return Err(Error::Domain(format!("alpha must lie in (0, {n}), got {alpha}")));
    }
    let e = n - alpha;
    let table = OffsetKernel::tabulate(grid, None, 0.0, |o| euclid(o).powf(-e));
    let mut out = table.apply(grid, f.values());
    let d = diagonal_cell(grid, alpha);
    for (o, v) in out.iter_mut().zip(f.values()) {
        *o += d * v;
    }
    SampledFunction::new(grid.clone(), out, format!("I_{alpha}[{}]", f.label()))
}

type ConvFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type GeneralFn = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum KernelForm {
    /// `K(x, y) = k(x − y)`.
    Convolution(ConvFn),
    General(GeneralFn),
}

/// A kernel with size constant `A` and regularity exponent `δ`; it must be
/// validated on a grid before it can be applied there.
#[derive(Clone)]
pub struct StandardKernel {
    name: String,
    form: KernelForm,
    size_constant: f64,
    delta: f64,
    validated_on: Option<Grid>,
}

impl fmt::Debug for StandardKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StandardKernel")
            .field("name", &self.name)
            .field("size_constant", &self.size_constant)
            .field("delta", &self.delta)
            .field("validated", &self.validated_on.is_some())
            .finish()
    }
}

/// Worst measured ratios of the size and regularity conditions; both must
/// be at most one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelValidation {
    pub size_ratio: f64,
    pub regularity_ratio: f64,
    pub pairs: usize,
    pub triples: usize,
    pub passed: bool,
}

const VALIDATION_SEED: u64 = 0x6b65726e;
const VALIDATION_SLACK: f64 = 1e-9;

impl StandardKernel {
    pub fn new(name: impl Into<String>, form: KernelForm, size_constant: f64, delta: f64) -> Result<Self> {
        if !(size_constant > 0.0 && delta > 0.0) {
            return Err(Error::Domain(format!(
                "kernel constants must be positive, got A = {size_constant}, delta = {delta}"
            )));
        }
        Ok(Self {
            name: name.into(),
            form,
            size_constant,
            delta,
            validated_on: None,
        })
    }

    /// `K(x, y) = 1/(π(x − y))` with `δ = 1` and `A = 9/(2π)`.
    ///
    /// The size condition holds with `1/π`; the regularity condition on
    /// triples `|x − x′| ≤ |x − y|/2` needs `(d + d′)²/(d d′) ≤ 9/2` times that.
    pub fn hilbert() -> Self {
        Self::hilbert_with_constant(4.5 / PI)
    }

    pub fn hilbert_with_constant(a: f64) -> Self {
        Self {
            name: "hilbert".into(),
            form: KernelForm::Convolution(Arc::new(|o: &[f64]| 1.0 / (PI * o[0]))),
            size_constant: a,
            delta: 1.0,
            validated_on: None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn size_constant(&self) -> f64 {
        self.size_constant
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn is_validated(&self) -> bool {
        self.validated_on.is_some()
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        match &self.form {
            KernelForm::Convolution(k) => {
                let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
                k(&d)
            }
            KernelForm::General(k) => k(x, y),
        }
    }

    /// Samples the size and regularity conditions on grid points: random
    /// pairs and triples plus the extremal triples `x′ − y = (x − y)/2`.
    /// Marks the kernel usable on `grid` when both hold.
    pub fn validate(&mut self, grid: &Grid) -> Result<KernelValidation> {
        let n = grid.dim();
        let len = grid.len();
        if len < 3 {
            return Err(Error::Shape("validation needs at least three grid points".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(VALIDATION_SEED);
        let a = self.size_constant;
        let nd = n as f64;
        let mut size_ratio: f64 = 0.0;
        let mut pairs = 0;
        for _ in 0..4000 {
            let (i, j) = (rng.gen_range(0..len), rng.gen_range(0..len));
            if i == j {
                continue;
            }
            let (x, y) = (grid.point(i), grid.point(j));
            let d = dist(&x, &y);
            size_ratio = size_ratio.max(self.eval(&x, &y).abs() * d.powf(nd) / a);
            pairs += 1;
        }
        let mut reg_ratio: f64 = 0.0;
        let mut triples = 0;
        let mut check = |x: &[f64], xp: &[f64], y: &[f64]| {
            let (d, dp, s) = (dist(x, y), dist(xp, y), dist(x, xp));
            if d == 0.0 || dp == 0.0 || s == 0.0 || s > d / 2.0 * (1.0 + 1e-12) {
                return;
            }
            let lhs = (self.eval(x, y) - self.eval(xp, y)).abs();
            let rhs = a * s.powf(self.delta) / (d + dp).powf(nd + self.delta);
            reg_ratio = reg_ratio.max(lhs / rhs);
            triples += 1;
        };
        let mut idx = vec![0usize; n];
        let mut jdx = vec![0usize; n];
        let pts = grid.points();
        for _ in 0..4000 {
            let (i, j) = (rng.gen_range(0..len), rng.gen_range(0..len));
            grid.unravel(i, &mut idx);
            grid.unravel(j, &mut jdx);
            // x′ on the segment from x towards y, at most half way.
            let t: f64 = rng.gen_range(0.0..=0.5);
            let pidx: Vec<usize> = idx
                .iter()
                .zip(&jdx)
                .map(|(&a, &b)| (a as f64 + t * (b as f64 - a as f64)).round() as usize)
                .collect();
            check(&grid.point(i), &grid.point(grid.ravel(&pidx)), &grid.point(j));
            // The extremal configuration x − y = 2(x′ − y).
            let m: Vec<isize> = (0..n).map(|_| rng.gen_range(-8..=8)).collect();
            let shifted = |k: isize| -> Option<Vec<usize>> {
                (0..n)
                    .map(|d| {
                        let v = jdx[d] as isize + k * m[d];
                        (0..pts[d] as isize).contains(&v).then_some(v as usize)
                    })
                    .collect()
            };
            if let (Some(x), Some(xp)) = (shifted(2), shifted(1)) {
                check(&grid.point(grid.ravel(&x)), &grid.point(grid.ravel(&xp)), &grid.point(j));
            }
        }
        let passed = size_ratio <= 1.0 + VALIDATION_SLACK && reg_ratio <= 1.0 + VALIDATION_SLACK;
        self.validated_on = passed.then(|| grid.clone());
        Ok(KernelValidation {
            size_ratio,
            regularity_ratio: reg_ratio,
            pairs,
            triples,
            passed,
        })
    }
}

fn dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// `Tf(x) = Σ_{y ≠ x} K(x, y) f(y) w(y)`: the diagonal cell is skipped, so
/// odd convolution kernels on the symmetric grid sum as principal values.
pub fn cz_apply(kernel: &StandardKernel, f: &SampledFunction) -> Result<SampledFunction> {
    let grid = f.grid();
    if kernel.validated_on.as_ref() != Some(grid) {
        return Err(Error::Precondition(format!(
            "kernel {:?} has not been validated on this grid",
            kernel.name
        )));
    }
    let out = match &kernel.form {
        KernelForm::Convolution(k) => {
            let k = k.clone();
            OffsetKernel::tabulate(grid, None, 0.0, move |o| k(o)).apply(grid, f.values())
        }
        KernelForm::General(k) => {
            let w = grid.weights();
            let fw: Vec<f64> = f.values().iter().zip(&w).map(|(a, b)| a * b).collect();
            par::map_indices(grid.len(), |i| {
                let x = grid.point(i);
                let mut y = vec![0.0; grid.dim()];
                let mut acc = 0.0;
                for (j, &v) in fw.iter().enumerate() {
                    if j == i || v == 0.0 {
                        continue;
                    }
                    grid.point_into(j, &mut y);
                    acc += k(&x, &y) * v;
                }
                acc
            })
        }
    };
    SampledFunction::new(grid.clone(), out, format!("{}[{}]", kernel.name, f.label()))
}

/// Linear operators admitted by the commutator.
#[derive(Debug, Clone)]
pub enum Operator {
    Cz(StandardKernel),
    FractionalIntegral(f64),
}

impl Operator {
    pub fn apply(&self, f: &SampledFunction) -> Result<SampledFunction> {
        match self {
            Operator::Cz(k) => cz_apply(k, f),
            Operator::FractionalIntegral(a) => fractional_integral(f, *a),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Operator::Cz(k) => k.name().to_string(),
            Operator::FractionalIntegral(a) => format!("I_{a}"),
        }
    }
}

/// `[b, T]f = b·Tf − T(b·f)`.
pub fn commutator_apply(b: &SampledFunction, op: &Operator, f: &SampledFunction) -> Result<SampledFunction> {
    b.grid().check_same(f.grid())?;
    let tf = op.apply(f)?;
    let tbf = op.apply(&b.mul(f)?)?;
    let out = b.mul(&tf)?.sub(&tbf)?;
    Ok(out.with_label(format!("[{}, {}][{}]", b.label(), op.name(), f.label())))
}
