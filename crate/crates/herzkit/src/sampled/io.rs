//! Text formats for sampled functions.
//!
//! JSON: `{"grid": {"half_width": [...], "points": [...]}, "values": [...],
//! "label": "..."}` with values in flat order (first axis fastest).
//! CSV: header `x1,...,xn,value`, one row per grid point in any order.

use super::{Grid, SampledFunction};
use crate::error::{Error, Result};

pub fn to_json(f: &SampledFunction) -> String {
    serde_json::to_string_pretty(f).expect("sampled functions serialize")
}

pub fn from_json(text: &str) -> Result<SampledFunction> {
    let f: SampledFunction =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("sampled function JSON: {e}")))?;
    // Re-validate through the constructor (values length and finiteness).
    SampledFunction::new(f.grid.clone(), f.values.clone(), f.label.clone())
}

pub fn to_csv(f: &SampledFunction) -> String {
    let g = f.grid();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = (1..=g.dim()).map(|i| format!("x{i}")).collect();
    header.push("value".into());
    w.write_record(&header).expect("in-memory write");
    let mut x = vec![0.0; g.dim()];
    for (i, v) in f.values().iter().enumerate() {
        g.point_into(i, &mut x);
        let mut row: Vec<String> = x.iter().map(|c| c.to_string()).collect();
        row.push(v.to_string());
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

pub fn from_csv(text: &str) -> Result<SampledFunction> {
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = r
        .headers()
        .map_err(|e| Error::Parse(format!("csv header: {e}")))?
        .clone();
    let n = header.len().saturating_sub(1);
    if n == 0 || &header[n] != "value" {
        return Err(Error::Parse("csv header must be x1,...,xn,value".into()));
    }
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| Error::Parse(format!("csv row: {e}")))?;
        if rec.len() != n + 1 {
            return Err(Error::Parse(format!("csv row has {} fields, want {}", rec.len(), n + 1)));
        }
        let nums: Vec<f64> = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|e| Error::Parse(format!("csv number {s:?}: {e}"))))
            .collect::<Result<_>>()?;
        rows.push((nums[..n].to_vec(), nums[n]));
    }
    let mut half_width = Vec::with_capacity(n);
    let mut points = Vec::with_capacity(n);
    for d in 0..n {
        let mut axis: Vec<f64> = rows.iter().map(|(x, _)| x[d]).collect();
        axis.sort_by(|a, b| a.total_cmp(b));
        axis.dedup();
        let l = axis.last().copied().unwrap_or(0.0);
        half_width.push(l);
        points.push(axis.len());
    }
    let grid = Grid::new(half_width, points)?;
    if rows.len() != grid.len() {
        return Err(Error::Shape(format!(
            "csv has {} rows for a {}-point tensor grid",
            rows.len(),
            grid.len()
        )));
    }
    let mut values = vec![f64::NAN; grid.len()];
    let mut idx = vec![0usize; n];
    for (x, v) in rows {
        for d in 0..n {
            let pos = x[d] / grid.spacing()[d] + grid.center_index(d) as f64;
            let i = pos.round();
            if (pos - i).abs() > 1e-6 || i < 0.0 || i as usize >= grid.points()[d] {
                return Err(Error::Shape(format!(
                    "coordinate {} is not on a uniform symmetric grid",
                    x[d]
                )));
            }
            idx[d] = i as usize;
        }
        let flat = grid.ravel(&idx);
        if !values[flat].is_nan() {
            return Err(Error::Shape(format!("duplicate grid point {x:?}")));
        }
        values[flat] = v;
    }
    SampledFunction::new(grid, values, "csv")
}
