use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use super::data::{build_phi_from_data, DataSet, PiecewisePhi};
use crate::error::{Error, Result};

/// The 1-periodic generating function of a series graph.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Phi {
    /// `cos(2 pi x)`
    Cosine,
    /// distance to the nearest integer
    Tent,
    PiecewiseLinear(PiecewisePhi),
}

impl Phi {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Phi::Cosine => (2.0 * PI * x).cos(),
            Phi::Tent => (x - x.round()).abs(),
            Phi::PiecewiseLinear(p) => p.eval(x),
        }
    }

    /// Right derivative; kinks take the slope of the piece to their right.
    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            Phi::Cosine => -2.0 * PI * (2.0 * PI * x).sin(),
            Phi::Tent => {
                if x - x.floor() < 0.5 {
                    1.0
                } else {
                    -1.0
                }
            }
            Phi::PiecewiseLinear(p) => p.derivative(x),
        }
    }

    fn knots(&self) -> Vec<f64> {
        match self {
            Phi::Cosine => vec![0.0, 0.5],
            Phi::Tent => vec![0.0, 0.5],
            Phi::PiecewiseLinear(p) => p.knots(),
        }
    }

    /// `max |phi|` over a 10^4 grid and the knots.
    pub fn max_abs(&self) -> f64 {
        let grid = (0..=10_000).map(|k| k as f64 / 10_000.0);
        grid.chain(self.knots()).map(|x| self.eval(x).abs()).fold(0.0, f64::max)
    }

    /// `max |phi'|` over the same points, from both sides of each knot.
    pub fn max_abs_derivative(&self) -> f64 {
        let grid = (0..10_000).map(|k| k as f64 / 10_000.0);
        let left_of_knots = self.knots().into_iter().map(|x| x - 1e-9);
        grid.chain(self.knots()).chain(left_of_knots).map(|x| self.derivative(x).abs()).fold(0.0, f64::max)
    }
}

/// `G(x) = sum_{n >= 0} alpha^n phi(b^n x)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesSpec {
    pub phi: Phi,
    pub alpha: f64,
    pub b: u32,
}

impl SeriesSpec {
    pub fn new(phi: Phi, alpha: f64, b: u32) -> Result<Self> {
        if b < 2 {
            return Err(Error::invalid(format!("b = {b} must be an integer >= 2")));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::invalid(format!("alpha = {alpha} must lie in (0,1)")));
        }
        Ok(SeriesSpec { phi, alpha, b })
    }

    pub fn weierstrass(alpha: f64, b: u32) -> Result<Self> {
        SeriesSpec::new(Phi::Cosine, alpha, b)
    }

    pub fn takagi(alpha: f64) -> Result<Self> {
        SeriesSpec::new(Phi::Tent, alpha, 2)
    }

    /// Equally spaced data with `m` intervals gives `b = m`.
    pub fn from_data(data: &DataSet, alpha: f64) -> Result<Self> {
        let phi = build_phi_from_data(data, alpha)?;
        let b = u32::try_from(data.m()).map_err(|_| Error::invalid("too many data points"))?;
        SeriesSpec::new(Phi::PiecewiseLinear(phi), alpha, b.max(2))
    }

    /// `2 + log alpha / log b`, clamped to `[1, 2]`.
    pub fn theoretical_dimension(&self) -> f64 {
        (2.0 + self.alpha.ln() / (self.b as f64).ln()).clamp(1.0, 2.0)
    }

    /// Number of terms making the geometric tail at most `eps`.
    pub fn terms_for(&self, eps: f64) -> Result<usize> {
        if !(eps > 0.0) {
            return Err(Error::invalid(format!("tolerance {eps} must be positive")));
        }
        let max = self.phi.max_abs();
        if max == 0.0 {
            return Ok(1);
        }
        let n = ((eps * (1.0 - self.alpha) / max).ln() / self.alpha.ln()).ceil();
        Ok((n.max(1.0)) as usize)
    }

    fn next(&self, u: f64) -> f64 {
        let v = u * self.b as f64;
        v - v.floor()
    }

    fn partial_sum(&self, x: f64, terms: usize) -> f64 {
        // phi is 1-periodic, so phi(b^n x) = phi(u_n) with u_n = frac(b u_{n-1}).
        let mut u = x - x.floor();
        let mut weight = 1.0;
        let mut sum = 0.0;
        for _ in 0..terms {
            sum += weight * self.phi.eval(u);
            weight *= self.alpha;
            u = self.next(u);
        }
        sum
    }

    /// The fixed point of the leftmost local inverse, `(0, phi(0)/(1-alpha))`.
    pub fn anchor(&self) -> (f64, f64) {
        (0.0, self.phi.eval(0.0) / (1.0 - self.alpha))
    }

    /// Local inverse `i` of `(x, y) -> (bx mod 1, (y - phi(x)) / alpha)`.
    pub fn local_inverse(&self, i: u32, (x, y): (f64, f64)) -> (f64, f64) {
        let u = (x + i as f64) / self.b as f64;
        (u, self.alpha * y + self.phi.eval(u))
    }
}

/// Truncated series value with error at most `eps`.
pub fn eval_series(spec: &SeriesSpec, x: f64, eps: f64) -> Result<f64> {
    let terms = spec.terms_for(eps)?;
    Ok(spec.partial_sum(x, terms))
}

/// `|G(x) - alpha G(bx mod 1) - phi(x)|` with both values truncated at `eps`.
pub fn self_similarity_residual(spec: &SeriesSpec, x: f64, eps: f64) -> Result<f64> {
    let terms = spec.terms_for(eps)?;
    let u = x - x.floor();
    let g = spec.partial_sum(u, terms);
    let gb = spec.partial_sum(spec.next(u), terms);
    Ok((g - spec.alpha * gb - spec.phi.eval(u)).abs())
}

/// Points `(x, G(x))` on the lattice `x = k / b^depth`, built by applying the
/// local inverses `depth` times to the anchor. Errors shrink by `alpha` per level.
pub fn sample_series(spec: &SeriesSpec, depth: u32, cap: u128) -> Result<Vec<(f64, f64)>> {
    let count = (spec.b as u128).checked_pow(depth).unwrap_or(u128::MAX);
    if count > cap {
        return Err(Error::Budget {
            what: "series sample points",
            needed: count,
            cap,
        });
    }
    let mut points = vec![spec.anchor()];
    for _ in 0..depth {
        points = (0..spec.b)
            .into_par_iter()
            .flat_map_iter(|i| points.iter().map(move |&p| spec.local_inverse(i, p)))
            .collect();
    }
    Ok(points)
}
