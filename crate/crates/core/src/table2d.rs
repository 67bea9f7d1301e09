//! Bilinearly interpolated tables over a rectangular product grid.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scales::{parse_field, Interval};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table2d {
    rows: Vec<f64>,
    cols: Vec<f64>,
    /// `values[i * cols.len() + j]` is the value at `(rows[i], cols[j])`.
    values: Vec<f64>,
}

fn ascending(name: &str, v: &[f64]) -> Result<()> {
    if v.len() < 2 {
        return Err(Error::Param(format!("{name} axis needs at least two samples")));
    }
    if v.iter().any(|t| !t.is_finite()) || v.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Param(format!("{name} axis must be finite and strictly ascending")));
    }
    Ok(())
}

/// Cell index `k` with `axis[k] <= t <= axis[k+1]` and the local coordinate.
fn locate(axis: &[f64], t: f64) -> (usize, f64) {
    let hi = axis.partition_point(|&a| a <= t).clamp(1, axis.len() - 1);
    let lo = hi - 1;
    (lo, (t - axis[lo]) / (axis[hi] - axis[lo]))
}

impl Table2d {
    pub fn new(rows: Vec<f64>, cols: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        ascending("row", &rows)?;
        ascending("column", &cols)?;
        if values.len() != rows.len() * cols.len() {
            return Err(Error::Param(format!(
                "expected {} table values, got {}",
                rows.len() * cols.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Param("table values must be finite".into()));
        }
        Ok(Table2d { rows, cols, values })
    }

    /// Tabulates `f` on the product of the two axes.
    pub fn tabulate(rows: Vec<f64>, cols: Vec<f64>, mut f: impl FnMut(f64, f64) -> Result<f64>) -> Result<Self> {
        let mut values = Vec::with_capacity(rows.len() * cols.len());
        for &r in &rows {
            for &c in &cols {
                values.push(f(r, c)?);
            }
        }
        Self::new(rows, cols, values)
    }

    pub fn rows(&self) -> &[f64] {
        &self.rows
    }

    pub fn cols(&self) -> &[f64] {
        &self.cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row_domain(&self) -> Interval {
        Interval {
            lo: self.rows[0],
            hi: self.rows[self.rows.len() - 1],
        }
    }

    pub fn col_domain(&self) -> Interval {
        Interval {
            lo: self.cols[0],
            hi: self.cols[self.cols.len() - 1],
        }
    }

    /// Smallest interval containing every tabulated value.
    pub fn value_hull(&self) -> Interval {
        let lo = self.values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Interval { lo, hi }
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols.len() + j]
    }

    pub fn eval(&self, r: f64, c: f64) -> Result<f64> {
        if !self.row_domain().contains(r) || !self.col_domain().contains(c) {
            return Err(Error::Domain(format!("({r}, {c}) outside the tabulated rectangle")));
        }
        let (i, u) = locate(&self.rows, r);
        let (j, v) = locate(&self.cols, c);
        let f00 = self.at(i, j);
        let f01 = self.at(i, j + 1);
        let f10 = self.at(i + 1, j);
        let f11 = self.at(i + 1, j + 1);
        Ok((1.0 - u) * ((1.0 - v) * f00 + v * f01) + u * ((1.0 - v) * f10 + v * f11))
    }

    pub fn write_csv<W: Write>(&self, writer: W, header: [&str; 3]) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(header)?;
        for (i, r) in self.rows.iter().enumerate() {
            for (j, c) in self.cols.iter().enumerate() {
                w.write_record([r.to_string(), c.to_string(), self.at(i, j).to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a three-column CSV whose first two columns span a full product grid.
    pub fn read_csv<R: Read>(reader: R, header: [&str; 3]) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let names = rdr.headers()?.clone();
        if names.iter().collect::<Vec<_>>() != header {
            return Err(Error::Config(format!(
                "expected header `{}`, found `{}`",
                header.join(","),
                names.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut triples = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            if rec.len() != 3 {
                return Err(Error::Config("expected three columns".into()));
            }
            triples.push((parse_field(&rec[0])?, parse_field(&rec[1])?, parse_field(&rec[2])?));
        }
        let mut rows: Vec<f64> = triples.iter().map(|t| t.0).collect();
        let mut cols: Vec<f64> = triples.iter().map(|t| t.1).collect();
        for axis in [&mut rows, &mut cols] {
            axis.sort_by(f64::total_cmp);
            axis.dedup();
        }
        let mut values = vec![f64::NAN; rows.len() * cols.len()];
        for (r, c, v) in triples {
            let i = rows.partition_point(|&a| a < r);
            let j = cols.partition_point(|&a| a < c);
            values[i * cols.len() + j] = v;
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::Config("table does not cover a full product grid".into()));
        }
        Self::new(rows, cols, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bilinear_reproduces_bilinear_functions() {
        let f = |x: f64, s: f64| 1.0 + 2.0 * x - s + 0.5 * x * s;
        let t = Table2d::tabulate(vec![0.0, 1.0, 3.0], vec![-1.0, 0.5, 2.0], |x, s| Ok(f(x, s))).unwrap();
        for (x, s) in [(0.2, -0.3), (2.9, 1.7), (1.0, 0.5), (3.0, 2.0)] {
            assert!((t.eval(x, s).unwrap() - f(x, s)).abs() < 1e-14);
        }
        assert!(t.eval(3.1, 0.0).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let t = Table2d::tabulate(vec![1.0, 2.0], vec![0.0, 0.5, 1.0], |x, s| Ok(x + s)).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf, ["x", "s", "xi"]).unwrap();
        let back = Table2d::read_csv(buf.as_slice(), ["x", "s", "xi"]).unwrap();
        assert_eq!(back, t);
        let ragged = "x,s,xi\n1,0,1\n2,0,2\n1,1,2\n";
        assert!(Table2d::read_csv(ragged.as_bytes(), ["x", "s", "xi"]).is_err());
    }
}
