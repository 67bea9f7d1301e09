//! Finite samplings of the stimulus (`I`), scale-factor (`J`) and
//! discriminability (`S`) intervals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scales::{linspace, Interval};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    stimulus: Interval,
    x: Vec<f64>,
    lambda: Vec<f64>,
    s: Vec<f64>,
    pairs: Vec<(usize, usize)>,
    filtered: usize,
}

fn check_axis(name: &str, v: &[f64]) -> Result<()> {
    if v.is_empty() {
        return Err(Error::EmptyGrid(format!("no {name} samples")));
    }
    if v.iter().any(|t| !t.is_finite()) {
        return Err(Error::Param(format!("{name} samples must be finite")));
    }
    if v.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Param(format!("{name} samples must be strictly ascending")));
    }
    Ok(())
}

impl Grid {
    /// Grid whose stimulus interval is the hull of the `x` samples.
    pub fn new(x: Vec<f64>, lambda: Vec<f64>, s: Vec<f64>) -> Result<Self> {
        check_axis("x", &x)?;
        let stimulus = Interval::new(x[0], x[x.len() - 1])?;
        Self::with_stimulus(stimulus, x, lambda, s)
    }

    /// Grid with an explicit stimulus interval `I`; `(x, λ)` pairs with
    /// `λx ∉ I` are dropped and counted.
    pub fn with_stimulus(stimulus: Interval, x: Vec<f64>, lambda: Vec<f64>, s: Vec<f64>) -> Result<Self> {
        check_axis("x", &x)?;
        check_axis("lambda", &lambda)?;
        check_axis("s", &s)?;
        if x.iter().any(|&v| !stimulus.contains(v)) {
            return Err(Error::Domain("x samples must lie in the stimulus interval".into()));
        }
        let mut pairs = Vec::with_capacity(x.len() * lambda.len());
        let mut filtered = 0;
        let slack = |v: f64| 1e-12 * (1.0 + v.abs());
        for (i, &xv) in x.iter().enumerate() {
            for (j, &l) in lambda.iter().enumerate() {
                let p = l * xv;
                if p >= stimulus.lo - slack(p) && p <= stimulus.hi + slack(p) {
                    pairs.push((i, j));
                } else {
                    filtered += 1;
                }
            }
        }
        if pairs.is_empty() {
            return Err(Error::EmptyGrid("no (x, lambda) pair satisfies lambda*x in I".into()));
        }
        Ok(Grid {
            stimulus,
            x,
            lambda,
            s,
            pairs,
            filtered,
        })
    }

    /// Evenly spaced samples of `I`, `J`, `S` with `counts = [nx, nλ, ns]`.
    pub fn uniform(i: Interval, j: Interval, s: Interval, counts: [usize; 3]) -> Result<Self> {
        Self::uniform_with_stimulus(i, i, j, s, counts)
    }

    /// As [`Grid::uniform`] but with the closure interval given separately
    /// from the sampled `x` range.
    pub fn uniform_with_stimulus(
        stimulus: Interval,
        i: Interval,
        j: Interval,
        s: Interval,
        counts: [usize; 3],
    ) -> Result<Self> {
        for iv in [i, j, s] {
            if !iv.is_finite() {
                return Err(Error::Param("grid intervals must be finite".into()));
            }
        }
        Self::with_stimulus(
            stimulus,
            linspace(i.lo, i.hi, counts[0]),
            linspace(j.lo, j.hi, counts[1]),
            linspace(s.lo, s.hi, counts[2]),
        )
    }

    pub fn stimulus(&self) -> Interval {
        self.stimulus
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn s(&self) -> &[f64] {
        &self.s
    }

    /// Admissible `(x, λ)` pairs.
    pub fn pairs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.pairs.iter().map(|&(i, j)| (self.x[i], self.lambda[j]))
    }

    pub fn pair_count(&self) -> usize {
        self.pairs.len()
    }

    /// Number of `(x, λ)` pairs dropped by the closure filter.
    pub fn filtered(&self) -> usize {
        self.filtered
    }

    /// Same `x`/`λ` samples with new `s` samples.
    pub fn with_s(&self, s: Vec<f64>) -> Result<Self> {
        check_axis("s", &s)?;
        Ok(Grid { s, ..self.clone() })
    }
}
