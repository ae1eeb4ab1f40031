//! Generalized Takagi functions over the symmetric tent map
//! `B(x) = beta x` on `[0, 1/2]`, `1 - beta (1 - x)` on `(1/2, 1]`.

mod cylinder;
mod markov;

use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

pub use cylinder::{count_admissible, cylinder_tree, entropy_estimate, CylinderTree, Leaf};
pub use markov::{detect_markov, detect_markov_exact, markov_dim, MarkovDim, MarkovPartition};

use crate::error::{Error, Result};
use crate::exact::{self, Rational};

/// `B_beta(x)`; errors outside `[0, 1]`.
pub fn tent_eval(beta: f64, x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::invalid(format!("x = {x} outside [0,1]")));
    }
    Ok(tent(beta, x))
}

#[inline]
pub(crate) fn tent(beta: f64, x: f64) -> f64 {
    if x <= 0.5 {
        beta * x
    } else {
        1.0 - beta * (1.0 - x)
    }
}

fn psi(x: f64) -> f64 {
    (x - x.round()).abs()
}

/// The pair `(alpha, beta)` defining `T(x) = sum_{k>=0} alpha^k psi(B^k x)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TentSystem {
    pub alpha: f64,
    pub beta: f64,
}

impl TentSystem {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::invalid(format!("alpha = {alpha} must lie in (0,1)")));
        }
        if !(beta > 1.0 && beta <= 2.0) {
            return Err(Error::invalid(format!("beta = {beta} must lie in (1,2]")));
        }
        if alpha * beta <= 1.0 {
            return Err(Error::invalid(format!("alpha * beta = {} must exceed 1", alpha * beta)));
        }
        Ok(TentSystem { alpha, beta })
    }

    /// `2 + log alpha / log beta`.
    pub fn theoretical_dimension(&self) -> f64 {
        2.0 + self.alpha.ln() / self.beta.ln()
    }

    /// Terms needed for a tail of at most `eps`, using `psi <= 1/2`.
    pub fn terms_for(&self, eps: f64) -> Result<usize> {
        if !(eps > 0.0) {
            return Err(Error::invalid(format!("tolerance {eps} must be positive")));
        }
        let n = ((2.0 * eps * (1.0 - self.alpha)).ln() / self.alpha.ln()).ceil();
        Ok(n.max(1.0) as usize)
    }

    /// Truncated series along the floating point orbit of `x`.
    ///
    /// The graph is only Hölder continuous with a small exponent, so the
    /// value is accurate for a point within rounding distance of `x` rather
    /// than for `x` itself. Use [`TentSystem::eval_exact`] when the exact
    /// abscissa matters.
    pub fn eval(&self, x: f64, eps: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::invalid(format!("x = {x} outside [0,1]")));
        }
        let n = self.terms_for(eps)?;
        Ok(self.partial_sum(x, n))
    }

    fn partial_sum(&self, x: f64, terms: usize) -> f64 {
        let mut u = x;
        let mut w = 1.0;
        let mut sum = 0.0;
        for _ in 0..terms {
            sum += w * psi(u);
            w *= self.alpha;
            u = tent(self.beta, u);
        }
        sum
    }

    /// `beta` as the rational written by its shortest decimal representation.
    pub fn beta_rational(&self) -> Rational {
        exact::parse_rational(&format!("{}", self.beta)).expect("finite floats print as decimals")
    }

    /// Truncated series along the exact rational orbit of `x`, with `beta`
    /// read as [`TentSystem::beta_rational`].
    pub fn eval_exact(&self, x: &Rational, eps: f64) -> Result<f64> {
        let one = Rational::one();
        if x < &Rational::zero() || x > &one {
            return Err(Error::invalid(format!("x = {x} outside [0,1]")));
        }
        let n = self.terms_for(eps)?;
        let beta = self.beta_rational();
        let half = exact::rational(1, 2);
        let mut u = x.clone();
        let mut w = 1.0;
        let mut sum = 0.0;
        for _ in 0..n {
            let dist = if u <= half { u.clone() } else { &one - &u };
            sum += w * dist.to_f64().unwrap_or(f64::NAN);
            w *= self.alpha;
            u = if u <= half { &beta * &u } else { &one - &beta * (&one - &u) };
        }
        Ok(sum)
    }

    /// Local inverse `F~_1(u, v) = (u / beta, u / beta + alpha v)` on `[0, beta/2]`.
    pub fn inverse_left(&self, (u, v): (f64, f64)) -> (f64, f64) {
        let x = u / self.beta;
        (x, x + self.alpha * v)
    }

    /// Local inverse `F~_2(u, v) = (1 - (1-u)/beta, (1-u)/beta + alpha v)` on `[1 - beta/2, 1]`.
    pub fn inverse_right(&self, (u, v): (f64, f64)) -> (f64, f64) {
        let d = (1.0 - u) / self.beta;
        (1.0 - d, d + self.alpha * v)
    }

    /// Checks the self-affine structure at the rational point `u`: for each
    /// branch whose domain contains `u`, `T(F~_l(u)_x) = F~_l(u, T(u))_y`.
    /// Returns the largest discrepancy, evaluated along exact orbits.
    pub fn self_affinity_residual(&self, u: &Rational, eps: f64) -> Result<f64> {
        let one = Rational::one();
        let beta = self.beta_rational();
        let half_beta = &beta / exact::rational(2, 1);
        let tu = self.eval_exact(u, eps)?;
        let mut worst = 0.0f64;
        if u <= &half_beta {
            let x = u / &beta;
            let want = exact::to_f64(&x) + self.alpha * tu;
            worst = worst.max((self.eval_exact(&x, eps)? - want).abs());
        }
        if u >= &(&one - &half_beta) {
            let d = (&one - u) / &beta;
            let x = &one - &d;
            let want = exact::to_f64(&d) + self.alpha * tu;
            worst = worst.max((self.eval_exact(&x, eps)? - want).abs());
        }
        Ok(worst)
    }

    /// `count` graph points on the uniform grid `x = k / (count - 1)`.
    pub fn sample_graph(&self, count: usize, eps: f64) -> Result<Vec<(f64, f64)>> {
        if count < 2 {
            return Err(Error::invalid("need at least two sample points"));
        }
        let n = self.terms_for(eps)?;
        let last = (count - 1) as f64;
        Ok((0..count)
            .into_par_iter()
            .map(|k| {
                let x = k as f64 / last;
                (x, self.partial_sum(x, n))
            })
            .collect())
    }
}
