use std::path::Path;

use herzkit::builtins::Builtin;
use herzkit::sampled::io;
use herzkit::{AnisotropyVector, Error, ExponentVector, Grid, Result, SampledFunction};
use serde_json::{json, Value};

use crate::cli::Source;

pub fn parse_number(s: &str) -> Result<f64> {
    match s.trim() {
        "inf" | "Inf" | "infinity" => Ok(f64::INFINITY),
        t => t.parse::<f64>().map_err(|e| Error::Parse(format!("number {t:?}: {e}"))),
    }
}

pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',').map(parse_number).collect()
}

pub fn parse_exponents(s: &str) -> Result<ExponentVector> {
    s.parse()
}

pub fn parse_anisotropy(s: &str) -> Result<AnisotropyVector> {
    AnisotropyVector::new(parse_list(s)?)
}

fn per_axis<T: Clone>(v: Vec<T>, dim: usize, what: &str) -> Result<Vec<T>> {
    match v.len() {
        1 => Ok(vec![v[0].clone(); dim]),
        n if n == dim => Ok(v),
        n => Err(Error::Shape(format!("{what} has {n} entries for dimension {dim}"))),
    }
}

pub fn read_function(path: &Path) -> Result<SampledFunction> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Precondition(format!("cannot read {}: {e}", path.display())))?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        io::from_csv(&text)
    } else {
        io::from_json(&text)
    }
}

pub struct Resolved {
    pub f: SampledFunction,
    pub a: AnisotropyVector,
    pub summary: Value,
}

impl Source {
    /// Loads or samples the input. `dim_hint` is the length of a per-axis
    /// parameter such as `--q`.
    pub fn resolve(&self, dim_hint: Option<usize>) -> Result<Resolved> {
        let a_given = self.a.as_deref().map(parse_anisotropy).transpose()?;
        match (&self.builtin, &self.input) {
            (Some(_), Some(_)) => Err(Error::Parse("give either --builtin or --input, not both".into())),
            (None, None) => Err(Error::Parse("no input: give --builtin or --input".into())),
            (None, Some(path)) => {
                let f = read_function(path)?;
                let a = a_given.unwrap_or_else(|| AnisotropyVector::isotropic(f.dim()));
                if a.dim() != f.dim() {
                    return Err(Error::Shape(format!("anisotropy has {} entries, input is {}-dimensional", a.dim(), f.dim())));
                }
                let summary = json!({
                    "source": path.display().to_string(),
                    "label": f.label(),
                    "grid": f.grid(),
                    "anisotropy": a.exponents(),
                });
                Ok(Resolved { f, a, summary })
            }
            (Some(spec), None) => {
                let b: Builtin = spec.parse()?;
                let points: Vec<usize> = self
                    .grid
                    .split('x')
                    .map(|s| s.trim().parse::<usize>().map_err(|e| Error::Parse(format!("grid {s:?}: {e}"))))
                    .collect::<Result<_>>()?;
                let widths = parse_list(&self.half_width)?;
                let dim = [points.len(), widths.len()]
                    .into_iter()
                    .chain(a_given.as_ref().map(|a| a.dim()))
                    .chain(dim_hint)
                    .max()
                    .unwrap_or(1);
                let grid = Grid::new(per_axis(widths, dim, "--L")?, per_axis(points, dim, "--grid")?)?;
                let a = a_given.unwrap_or_else(|| AnisotropyVector::isotropic(dim));
                if a.dim() != dim {
                    return Err(Error::Shape(format!("anisotropy has {} entries for dimension {dim}", a.dim())));
                }
                let f = b.sample(&grid, &a)?;
                let summary = json!({
                    "source": format!("builtin:{b}"),
                    "label": f.label(),
                    "grid": grid,
                    "anisotropy": a.exponents(),
                });
                Ok(Resolved { f, a, summary })
            }
        }
    }
}
