use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graphs::{MarkovFif, SeriesSpec};
use crate::symbolic::DEFAULT_ENUMERATION_CAP;

/// Samples of the truncated random series
/// `Y = sum_{n=1}^{N} (b alpha)^{-n} phi'(u_n)` with `u_0 = x` and
/// `u_n = (u_{n-1} + xi_n) / b`, the digits `xi_n` uniform on `0..b`.
pub fn ledrappier_sample(spec: &SeriesSpec, x: f64, terms: usize, count: usize, seed: u64) -> Result<Vec<f64>> {
    let ba = spec.b as f64 * spec.alpha;
    if ba <= 1.0 {
        return Err(Error::invalid(format!("b * alpha = {ba} must exceed 1")));
    }
    if terms == 0 || count == 0 {
        return Err(Error::invalid("term and sample counts must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = spec.b as f64;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let mut u = x - x.floor();
        let mut weight = 1.0;
        let mut y = 0.0;
        for _ in 0..terms {
            let xi = rng.gen_range(0..spec.b) as f64;
            u = (u + xi) / b;
            weight /= ba;
            y += weight * spec.phi.derivative(u);
        }
        out.push(y);
    }
    Ok(out)
}

/// Upper bound on the truncation error of [`ledrappier_sample`].
pub fn ledrappier_tail(spec: &SeriesSpec, terms: usize) -> f64 {
    let q = 1.0 / (spec.b as f64 * spec.alpha);
    spec.phi.max_abs_derivative() * q.powi(terms as i32) * q / (1.0 - q)
}

/// Box count lower bound at scale `r` from the stopping-time word set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StoppingCover {
    pub r: f64,
    /// Number of stopping words.
    pub words: u64,
    /// `sum ceil(|D| |alpha_w| gamma_w)` over the stopping words.
    pub count: u128,
}

/// Enumerates words `w` with `1/gamma_w <= r < 1/gamma_{w^-}` by depth-first
/// traversal and sums the number of `r`-squares each cylinder needs.
pub fn stopping_time_cover(sys: &MarkovFif, r: f64) -> Result<StoppingCover> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::invalid(format!("scale r = {r} must lie in (0,1)")));
    }
    let (lo, hi) = sys.bounding_interval();
    let height = hi - lo;
    let m = sys.m();
    let alpha: Vec<f64> = sys.alpha().values().iter().map(|a| a.abs()).collect();
    let gamma = sys.gamma();
    let mut words = 0u64;
    let mut count = 0u128;
    // (last symbol, |alpha_w|, gamma_w)
    let mut stack: Vec<(usize, f64, f64)> = (1..=m).map(|i| (i, alpha[i - 1], gamma[i - 1])).collect();
    while let Some((last, a, g)) = stack.pop() {
        if 1.0 / g <= r {
            words += 1;
            if u128::from(words) > DEFAULT_ENUMERATION_CAP {
                return Err(Error::Budget {
                    what: "stopping-time words",
                    needed: u128::from(words),
                    cap: DEFAULT_ENUMERATION_CAP,
                });
            }
            count += (height * a * g).ceil() as u128;
            continue;
        }
        for j in 1..=m {
            if sys.sft().allows(last, j) {
                stack.push((j, a * alpha[j - 1], g * gamma[j - 1]));
            }
        }
    }
    Ok(StoppingCover { r, words, count })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{DataSet, VerticalScalings};

    #[test]
    fn takagi_samples_are_signed_geometric_sums() {
        let alpha = 0.7;
        let spec = SeriesSpec::takagi(alpha).unwrap();
        let n = 30;
        let ys = ledrappier_sample(&spec, 0.3, n, 50, 7).unwrap();
        // Replay the digits and rebuild the signed sums independently.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for y in ys {
            let mut want = 0.0;
            for k in 1..=n {
                let xi: u32 = rng.gen_range(0..2);
                let sign = if xi == 0 { 1.0 } else { -1.0 };
                want += sign * (2.0 * alpha).powi(-(k as i32));
            }
            assert!((y - want).abs() < 1e-12);
        }
    }

    #[test]
    fn samples_are_bounded_and_deterministic() {
        let spec = SeriesSpec::weierstrass(0.8, 3).unwrap();
        let a = ledrappier_sample(&spec, 0.1, 40, 200, 11).unwrap();
        let b = ledrappier_sample(&spec, 0.1, 40, 200, 11).unwrap();
        assert_eq!(a, b);
        let bound = 2.0 * std::f64::consts::PI / (3.0 * 0.8 - 1.0);
        assert!(a.iter().all(|y| y.abs() <= bound));
        assert!(ledrappier_sample(&SeriesSpec::takagi(0.5).unwrap(), 0.1, 10, 10, 1).is_err());
        assert!(ledrappier_tail(&spec, 40) < 1e-13);
    }

    #[test]
    fn one_level_cover() {
        let sys = MarkovFif::full_shift(
            DataSet::new(vec![(0.0, 0.0), (0.5, 0.5), (1.0, 0.0)]).unwrap(),
            VerticalScalings::uniform(0.75, 2).unwrap(),
        )
        .unwrap();
        let cover = stopping_time_cover(&sys, 0.9).unwrap();
        assert_eq!(cover.words, 2);
        let (lo, hi) = sys.bounding_interval();
        let per = ((hi - lo) * 0.75 * 2.0).ceil() as u128;
        assert_eq!(cover.count, 2 * per);
        assert!(stopping_time_cover(&sys, 1.0).is_err());
        let deeper = stopping_time_cover(&sys, 1.0 / 64.0).unwrap();
        assert_eq!(deeper.words, 64);
    }
}
