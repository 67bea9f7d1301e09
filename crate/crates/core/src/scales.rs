//! Strictly monotone one-dimensional scales with exact or numeric inversion.
//!
//! Every scale symbol that has to be inverted somewhere (`u`, `w`, `H`, `f`,
//! psychometric links) is a [`ScaleFunction`]. Parametric variants invert in
//! closed form, tables invert by bisection.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{finite, Error, Result};

/// Absolute tolerance on `x` for table inversion.
pub const BISECTION_TOL: f64 = 1e-12;

/// A closed real interval; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(Error::Param(format!("invalid interval [{lo}, {hi}]")));
        }
        Ok(Interval { lo, hi })
    }

    pub const fn real_line() -> Self {
        Interval {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        }
    }

    pub const fn non_negative() -> Self {
        Interval {
            lo: 0.0,
            hi: f64::INFINITY,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn is_subset_of(&self, other: &Interval) -> bool {
        self.lo >= other.lo && self.hi <= other.hi
    }

    /// `n` evenly spaced points from `lo` to `hi` inclusive.
    pub fn linspace(&self, n: usize) -> Vec<f64> {
        linspace(self.lo, self.hi, n)
    }
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let last = (n - 1) as f64;
            (0..n)
                .map(|i| {
                    if i == n - 1 {
                        hi
                    } else {
                        lo + (hi - lo) * (i as f64) / last
                    }
                })
                .collect()
        }
    }
}

/// `n` geometrically spaced points from `lo` to `hi` inclusive (both > 0).
pub fn geomspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    linspace(a, b, n).into_iter().map(f64::exp).collect()
}

/// Piecewise-linear knots with strictly increasing abscissae.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Knots {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl Knots {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::Param(format!(
                "knot columns differ in length ({} vs {})",
                xs.len(),
                ys.len()
            )));
        }
        if xs.len() < 2 {
            return Err(Error::Param("a table needs at least two knots".into()));
        }
        if xs.iter().chain(ys.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Param("table knots must be finite".into()));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::NonMonotone(
                "knot abscissae must be strictly increasing".into(),
            ));
        }
        Ok(Knots { xs, ys })
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        let (xs, ys) = pairs.iter().copied().unzip();
        Knots::new(xs, ys)
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn domain(&self) -> Interval {
        Interval {
            lo: self.xs[0],
            hi: self.xs[self.xs.len() - 1],
        }
    }

    pub fn interpolate(&self, x: f64) -> Result<f64> {
        if !self.domain().contains(x) {
            return Err(Error::Domain(format!(
                "{x} outside table domain [{}, {}]",
                self.xs[0],
                self.xs[self.xs.len() - 1]
            )));
        }
        // index of the first knot strictly greater than x
        let hi = self.xs.partition_point(|&k| k <= x);
        if hi == self.xs.len() {
            return Ok(self.ys[hi - 1]);
        }
        let lo = hi - 1;
        let (x0, x1) = (self.xs[lo], self.xs[hi]);
        let (y0, y1) = (self.ys[lo], self.ys[hi]);
        let t = (x - x0) / (x1 - x0);
        Ok(y0 + t * (y1 - y0))
    }

    /// Knots of the form `(x, αy + β)`.
    pub fn map_values(&self, alpha: f64, beta: f64) -> Knots {
        Knots {
            xs: self.xs.clone(),
            ys: self.ys.iter().map(|y| alpha * y + beta).collect(),
        }
    }

    pub fn write_csv<W: Write>(&self, writer: W, header: [&str; 2]) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(header)?;
        for (x, y) in self.xs.iter().zip(&self.ys) {
            w.write_record([x.to_string(), y.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R, header: [&str; 2]) -> Result<Knots> {
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let names = r.headers()?.clone();
        if names.len() != 2 || names[0] != *header[0] || names[1] != *header[1] {
            return Err(Error::Config(format!(
                "expected header `{},{}`, found `{}`",
                header[0],
                header[1],
                names.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            xs.push(parse_field(&rec[0])?);
            ys.push(parse_field(&rec[1])?);
        }
        Knots::new(xs, ys)
    }
}

pub(crate) fn parse_field(field: &str) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|e| Error::Config(format!("bad number `{field}`: {e}")))
}

/// The formula behind a [`ScaleFunction`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScaleKind {
    /// `a·x + b`
    Affine { a: f64, b: f64 },
    /// `a·ln(x) + b`
    Log { a: f64, b: f64 },
    /// `a·x^p + b`
    Power { a: f64, p: f64, b: f64 },
    /// `a·e^(k·x) + b`
    Exp { a: f64, k: f64, b: f64 },
    /// Piecewise-linear interpolation of strictly monotone knots.
    Table { knots: Knots },
}

/// A strictly monotone real function on a closed interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleFunction {
    kind: ScaleKind,
    domain: Interval,
}

impl ScaleFunction {
    pub fn affine(a: f64, b: f64) -> Result<Self> {
        Self::with_domain(ScaleKind::Affine { a, b }, Interval::real_line())
    }

    pub fn identity() -> Self {
        ScaleFunction {
            kind: ScaleKind::Affine { a: 1.0, b: 0.0 },
            domain: Interval::real_line(),
        }
    }

    pub fn log(a: f64, b: f64) -> Result<Self> {
        Self::with_domain(ScaleKind::Log { a, b }, Interval::non_negative())
    }

    pub fn power(a: f64, p: f64, b: f64) -> Result<Self> {
        Self::with_domain(ScaleKind::Power { a, p, b }, Interval::non_negative())
    }

    pub fn exp(a: f64, k: f64, b: f64) -> Result<Self> {
        Self::with_domain(ScaleKind::Exp { a, k, b }, Interval::real_line())
    }

    pub fn table(knots: Knots) -> Result<Self> {
        let domain = knots.domain();
        Self::with_domain(ScaleKind::Table { knots }, domain)
    }

    pub fn table_from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::table(Knots::from_pairs(pairs)?)
    }

    /// A logistic link `1/(1+e^(-t))` tabulated on `[-half_width, half_width]`
    /// with `n` knots placed symmetrically about zero, so that
    /// `F(t) + F(-t) = 1` holds to rounding between knots as well.
    pub fn logistic_table(half_width: f64, n: usize) -> Result<Self> {
        if !(half_width > 0.0) || n < 3 {
            return Err(Error::Param(
                "logistic table needs half_width > 0 and at least 3 knots".into(),
            ));
        }
        let last = (n - 1) as f64;
        let xs: Vec<f64> = (0..n)
            .map(|i| half_width * (2.0 * i as f64 - last) / last)
            .collect();
        let ys = xs
            .iter()
            .map(|&t| {
                if t < 0.0 {
                    1.0 - logistic(-t)
                } else {
                    logistic(t)
                }
            })
            .collect();
        Self::table(Knots::new(xs, ys)?)
    }

    /// Builds a scale, checking the strict-monotonicity conditions eagerly.
    pub fn with_domain(kind: ScaleKind, domain: Interval) -> Result<Self> {
        let coeffs_finite = match &kind {
            ScaleKind::Affine { a, b } | ScaleKind::Log { a, b } => a.is_finite() && b.is_finite(),
            ScaleKind::Power { a, p, b } => a.is_finite() && p.is_finite() && b.is_finite(),
            ScaleKind::Exp { a, k, b } => a.is_finite() && k.is_finite() && b.is_finite(),
            ScaleKind::Table { .. } => true,
        };
        if !coeffs_finite {
            return Err(Error::Param("scale coefficients must be finite".into()));
        }
        match &kind {
            ScaleKind::Affine { a, .. } => {
                if *a == 0.0 {
                    return Err(Error::NonMonotone("affine scale needs a != 0".into()));
                }
            }
            ScaleKind::Log { a, .. } => {
                if *a == 0.0 {
                    return Err(Error::NonMonotone("log scale needs a != 0".into()));
                }
                if domain.lo < 0.0 {
                    return Err(Error::Domain("log scale needs a domain in [0, inf]".into()));
                }
            }
            ScaleKind::Power { a, p, .. } => {
                if *a == 0.0 || *p == 0.0 {
                    return Err(Error::NonMonotone(
                        "power scale needs a != 0 and p != 0".into(),
                    ));
                }
                let odd_integer = p.fract() == 0.0 && (p.abs() % 2.0) == 1.0 && *p > 0.0;
                if domain.lo < 0.0 && !odd_integer {
                    return Err(Error::NonMonotone(format!(
                        "x^{p} is not strictly monotone on a domain reaching below 0"
                    )));
                }
            }
            ScaleKind::Exp { a, k, .. } => {
                if *a == 0.0 || *k == 0.0 {
                    return Err(Error::NonMonotone("exp scale needs a != 0 and k != 0".into()));
                }
            }
            ScaleKind::Table { knots } => {
                let ys = knots.ys();
                let up = ys.windows(2).all(|w| w[1] > w[0]);
                let down = ys.windows(2).all(|w| w[1] < w[0]);
                if !up && !down {
                    return Err(Error::NonMonotone(
                        "table values must be strictly monotone".into(),
                    ));
                }
                if !domain.is_subset_of(&knots.domain()) {
                    return Err(Error::Domain(
                        "table scale cannot be evaluated outside its knots".into(),
                    ));
                }
            }
        }
        Ok(ScaleFunction { kind, domain })
    }

    pub fn kind(&self) -> &ScaleKind {
        &self.kind
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    /// Restricts (or, for parametric scales, re-declares) the domain.
    pub fn restricted(&self, domain: Interval) -> Result<Self> {
        Self::with_domain(self.kind.clone(), domain)
    }

    pub fn is_increasing(&self) -> bool {
        match &self.kind {
            ScaleKind::Affine { a, .. } | ScaleKind::Log { a, .. } => *a > 0.0,
            ScaleKind::Power { a, p, .. } => a * p > 0.0,
            ScaleKind::Exp { a, k, .. } => a * k > 0.0,
            ScaleKind::Table { knots } => knots.ys()[1] > knots.ys()[0],
        }
    }

    fn formula(&self, x: f64) -> f64 {
        match &self.kind {
            ScaleKind::Affine { a, b } => a * x + b,
            ScaleKind::Log { a, b } => a * x.ln() + b,
            ScaleKind::Power { a, p, b } => a * signed_pow(x, *p) + b,
            ScaleKind::Exp { a, k, b } => a * (k * x).exp() + b,
            ScaleKind::Table { knots } => knots
                .interpolate(x.clamp(knots.domain().lo, knots.domain().hi))
                .unwrap_or(f64::NAN),
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if !self.domain.contains(x) {
            return Err(Error::Domain(format!(
                "{x} outside scale domain [{}, {}]",
                self.domain.lo, self.domain.hi
            )));
        }
        finite(self.formula(x), || format!("scale value at {x}"))
    }

    /// The image of the domain, as a closed interval (ends may be infinite).
    pub fn range(&self) -> Interval {
        let (a, b) = (self.formula(self.domain.lo), self.formula(self.domain.hi));
        let lo = if a.is_nan() { f64::NEG_INFINITY } else { a.min(b) };
        let hi = if b.is_nan() { f64::INFINITY } else { a.max(b) };
        Interval { lo, hi }
    }

    pub fn invert(&self, y: f64) -> Result<f64> {
        if !y.is_finite() {
            return Err(Error::Range(format!("{y} is not a finite scale value")));
        }
        let range = self.range();
        let slack = 1e-12 * (1.0 + y.abs());
        if y < range.lo - slack || y > range.hi + slack {
            return Err(Error::Range(format!(
                "{y} outside scale range [{}, {}]",
                range.lo, range.hi
            )));
        }
        let x = match &self.kind {
            ScaleKind::Affine { a, b } => (y - b) / a,
            ScaleKind::Log { a, b } => ((y - b) / a).exp(),
            ScaleKind::Power { a, p, b } => signed_pow((y - b) / a, 1.0 / p),
            ScaleKind::Exp { a, k, b } => ((y - b) / a).ln() / k,
            ScaleKind::Table { .. } => return self.bisect(y),
        };
        if x.is_nan() {
            return Err(Error::Range(format!("{y} has no preimage")));
        }
        Ok(x.clamp(self.domain.lo, self.domain.hi))
    }

    fn bisect(&self, y: f64) -> Result<f64> {
        let increasing = self.is_increasing();
        let (mut lo, mut hi) = (self.domain.lo, self.domain.hi);
        // f(lo) <= y <= f(hi) after orienting
        let below = |x: f64| {
            let v = self.formula(x);
            if increasing {
                v < y
            } else {
                v > y
            }
        };
        while hi - lo > BISECTION_TOL {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if below(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// The scale `α·f + β`; `α` must be nonzero.
    pub fn map_values(&self, alpha: f64, beta: f64) -> Result<Self> {
        if alpha == 0.0 || !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::Param("value map needs finite alpha != 0".into()));
        }
        let kind = match &self.kind {
            ScaleKind::Affine { a, b } => ScaleKind::Affine {
                a: alpha * a,
                b: alpha * b + beta,
            },
            ScaleKind::Log { a, b } => ScaleKind::Log {
                a: alpha * a,
                b: alpha * b + beta,
            },
            ScaleKind::Power { a, p, b } => ScaleKind::Power {
                a: alpha * a,
                p: *p,
                b: alpha * b + beta,
            },
            ScaleKind::Exp { a, k, b } => ScaleKind::Exp {
                a: alpha * a,
                k: *k,
                b: alpha * b + beta,
            },
            ScaleKind::Table { knots } => ScaleKind::Table {
                knots: knots.map_values(alpha, beta),
            },
        };
        Self::with_domain(kind, self.domain)
    }

    /// The inverse function as a scale, when it has a closed form in the
    /// same catalog (tables always do).
    pub fn inverted(&self) -> Result<Self> {
        let range = self.range();
        let kind = match &self.kind {
            ScaleKind::Affine { a, b } => ScaleKind::Affine {
                a: 1.0 / a,
                b: -b / a,
            },
            ScaleKind::Log { a, b } => ScaleKind::Exp {
                a: (-b / a).exp(),
                k: 1.0 / a,
                b: 0.0,
            },
            ScaleKind::Exp { a, k, b } if *b == 0.0 && *a > 0.0 => ScaleKind::Log {
                a: 1.0 / k,
                b: -a.ln() / k,
            },
            ScaleKind::Power { a, p, b } if *b == 0.0 && *a > 0.0 => ScaleKind::Power {
                a: a.powf(-1.0 / p),
                p: 1.0 / p,
                b: 0.0,
            },
            ScaleKind::Table { knots } => {
                let mut pairs: Vec<(f64, f64)> =
                    knots.ys().iter().copied().zip(knots.xs().iter().copied()).collect();
                pairs.sort_by(|l, r| l.0.total_cmp(&r.0));
                return Self::table(Knots::from_pairs(&pairs)?);
            }
            _ => {
                return Err(Error::NotInvertible(format!(
                    "no closed-form inverse in the scale catalog for {:?}",
                    self.kind
                )))
            }
        };
        Self::with_domain(kind, range)
    }

    /// Tabulates the scale at the given ascending abscissae.
    pub fn tabulate(&self, xs: &[f64]) -> Result<Self> {
        let ys = xs.iter().map(|&x| self.eval(x)).collect::<Result<Vec<_>>>()?;
        Self::table(Knots::new(xs.to_vec(), ys)?)
    }

    pub fn knots(&self) -> Option<&Knots> {
        match &self.kind {
            ScaleKind::Table { knots } => Some(knots),
            _ => None,
        }
    }

    /// Writes a table scale as a two-column `x,y` CSV.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        match &self.kind {
            ScaleKind::Table { knots } => knots.write_csv(writer, ["x", "y"]),
            _ => Err(Error::Config("only table scales serialize to CSV".into())),
        }
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        Self::table(Knots::read_csv(reader, ["x", "y"])?)
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }
}

pub fn logistic(t: f64) -> f64 {
    1.0 / (1.0 + (-t).exp())
}

/// `x^p`, extended to negative `x` for odd integer `p`.
fn signed_pow(x: f64, p: f64) -> f64 {
    if x < 0.0 && p.fract() == 0.0 {
        x.powf(p)
    } else if x < 0.0 && (1.0 / p).fract() == 0.0 && (1.0 / p) % 2.0 != 0.0 {
        // odd integer root
        -(-x).powf(p)
    } else {
        x.powf(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn eval_examples() {
        assert_eq!(ScaleFunction::log(1.0, 0.0).unwrap().eval(1.0).unwrap(), 0.0);
        let p = ScaleFunction::power(2.0, 1.5, 0.0).unwrap();
        assert!((p.eval(4.0).unwrap() - 16.0).abs() < 1e-14);
        let t = ScaleFunction::table_from_pairs(&[(0.0, 0.0), (1.0, 2.0)]).unwrap();
        assert_eq!(t.eval(0.5).unwrap(), 1.0);
    }

    #[test]
    fn invert_examples() {
        let e = ScaleFunction::exp(1.0, 1.0, 0.0).unwrap();
        assert!((e.invert(std::f64::consts::E).unwrap() - 1.0).abs() < 1e-15);
        let sq = ScaleFunction::power(1.0, 2.0, 0.0)
            .unwrap()
            .restricted(Interval::new(0.0, 10.0).unwrap())
            .unwrap();
        assert!((sq.invert(9.0).unwrap() - 3.0).abs() < 1e-15);
        let t = ScaleFunction::table_from_pairs(&[(1.0, 1.0), (2.0, 4.0), (3.0, 9.0)]).unwrap();
        let x = t.invert(4.0).unwrap();
        assert!((x - 2.0).abs() <= BISECTION_TOL);
        assert!((t.eval(x).unwrap() - 4.0).abs() < 1e-11);
    }

    #[test]
    fn domain_and_range_errors() {
        let l = ScaleFunction::log(1.0, 0.0).unwrap();
        assert!(matches!(l.eval(-1.0), Err(Error::Domain(_))));
        assert!(matches!(l.eval(0.0), Err(Error::Domain(_))));
        let sq = ScaleFunction::power(1.0, 2.0, 0.0)
            .unwrap()
            .restricted(Interval::new(0.0, 10.0).unwrap())
            .unwrap();
        assert!(matches!(sq.invert(101.0), Err(Error::Range(_))));
        assert!(matches!(sq.invert(-1.0), Err(Error::Range(_))));
    }

    #[test]
    fn construction_rejects_non_monotone() {
        assert!(matches!(ScaleFunction::affine(0.0, 1.0), Err(Error::NonMonotone(_))));
        assert!(matches!(ScaleFunction::exp(1.0, 0.0, 0.0), Err(Error::NonMonotone(_))));
        assert!(ScaleFunction::with_domain(
            ScaleKind::Power { a: 1.0, p: 2.0, b: 0.0 },
            Interval::new(-1.0, 1.0).unwrap()
        )
        .is_err());
        assert!(ScaleFunction::with_domain(
            ScaleKind::Power { a: 1.0, p: 3.0, b: 0.0 },
            Interval::new(-1.0, 1.0).unwrap()
        )
        .is_ok());
        assert!(matches!(
            ScaleFunction::table_from_pairs(&[(0.0, 0.0), (1.0, 2.0), (2.0, 1.0)]),
            Err(Error::NonMonotone(_))
        ));
    }

    #[test]
    fn decreasing_tables_invert() {
        let t = ScaleFunction::table_from_pairs(&[(0.5, 2.0), (1.0, 1.0), (2.0, 0.5)]).unwrap();
        assert!(!t.is_increasing());
        let x = t.invert(1.0).unwrap();
        assert!((x - 1.0).abs() <= BISECTION_TOL);
    }

    #[test]
    fn inverted_scales_compose_to_identity() {
        let scales = [
            ScaleFunction::affine(2.0, -1.0).unwrap(),
            ScaleFunction::log(0.5, 3.0).unwrap(),
            ScaleFunction::power(3.0, -1.0, 0.0).unwrap(),
            ScaleFunction::exp(2.0, 0.5, 0.0).unwrap(),
        ];
        for s in &scales {
            let inv = s.inverted().unwrap();
            for x in [0.3, 1.0, 2.5] {
                let y = s.eval(x).unwrap();
                assert!((inv.eval(y).unwrap() - x).abs() < 1e-12, "{s:?} at {x}");
            }
        }
        assert!(ScaleFunction::exp(1.0, 1.0, -1.0).unwrap().inverted().is_err());
    }

    #[test]
    fn logistic_table_is_antisymmetric() {
        let f = ScaleFunction::logistic_table(12.0, 2401).unwrap();
        for t in [0.0, 0.37, 1.0, 3.3, 11.9] {
            let s = f.eval(t).unwrap() + f.eval(-t).unwrap();
            assert!((s - 1.0).abs() < 1e-15);
        }
        assert_eq!(f.eval(0.0).unwrap(), 0.5);
        assert!((f.eval(1.0).unwrap() - logistic(1.0)).abs() < 1e-15);
    }

    #[test]
    fn csv_round_trip() {
        let t = ScaleFunction::table_from_pairs(&[(0.0, 1.0), (0.5, 1.5), (2.0, 7.25)]).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("x,y\n"));
        let back = ScaleFunction::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, t);
        assert!(ScaleFunction::read_csv("a,b\n1,2\n3,4\n".as_bytes()).is_err());
    }

    fn arb_scale() -> impl Strategy<Value = ScaleFunction> {
        prop_oneof![
            (0.1f64..5.0, -3.0f64..3.0, any::<bool>()).prop_map(|(a, b, neg)| {
                ScaleFunction::affine(if neg { -a } else { a }, b).unwrap()
            }),
            (0.1f64..5.0, -3.0f64..3.0).prop_map(|(a, b)| ScaleFunction::log(a, b).unwrap()),
            (0.1f64..5.0, 0.2f64..3.0, -3.0f64..3.0)
                .prop_map(|(a, p, b)| ScaleFunction::power(a, p, b).unwrap()),
            (0.1f64..5.0, 0.1f64..1.5, -3.0f64..3.0)
                .prop_map(|(a, k, b)| ScaleFunction::exp(a, k, b).unwrap()),
        ]
    }

    proptest! {
        #[test]
        fn parametric_round_trip(scale in arb_scale()) {
            let dom = Interval::new(0.1, 10.0).unwrap();
            let scale = scale.restricted(dom).unwrap();
            for x in dom.linspace(100) {
                let back = scale.invert(scale.eval(x).unwrap()).unwrap();
                prop_assert!((back - x).abs() <= 1e-9 * (1.0 + x.abs()));
            }
        }

        #[test]
        fn table_round_trip_and_monotone(
            steps in proptest::collection::vec((0.01f64..1.0, 0.01f64..1.0), 2..30),
            decreasing in any::<bool>(),
        ) {
            let mut pairs = vec![(0.0, 0.0)];
            for (dx, dy) in steps {
                let (x, y) = *pairs.last().unwrap();
                pairs.push((x + dx, if decreasing { y - dy } else { y + dy }));
            }
            let t = ScaleFunction::table_from_pairs(&pairs).unwrap();
            let probe = t.domain().linspace(100);
            for &x in &probe {
                let back = t.invert(t.eval(x).unwrap()).unwrap();
                prop_assert!((back - x).abs() <= 1e-9 * (1.0 + x.abs()));
            }
            for w in probe.windows(2) {
                let (a, b) = (t.eval(w[0]).unwrap(), t.eval(w[1]).unwrap());
                let ordered = if decreasing { b < a } else { b > a };
                prop_assert!(ordered);
            }
        }
    }
}
