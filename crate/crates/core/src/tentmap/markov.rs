//! Markov partitions of the tent map built from a finite critical orbit, and
//! the dimension of the graph over the corresponding Markov subset.

use std::cmp::Ordering;

use num_traits::One;
use serde::Serialize;

use super::TentSystem;
use crate::dimension::{bisect_decreasing, spectral_radius, strongly_connected_components};
use crate::error::{Error, Result};
use crate::exact::{self, Quadratic, Rational};
use crate::symbolic::Sft;

/// Arithmetic needed to run the orbit search either in floating point or in
/// a quadratic number field.
trait Scalar: Clone {
    /// The rational `num / den` in the same field as `self`.
    fn constant(&self, num: i64, den: i64) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn cmp_tol(&self, o: &Self, tol: f64) -> Ordering;
    fn to_f64(&self) -> f64;
}

impl Scalar for f64 {
    fn constant(&self, num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn cmp_tol(&self, o: &Self, tol: f64) -> Ordering {
        if (self - o).abs() <= tol {
            Ordering::Equal
        } else if self < o {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for Quadratic {
    fn constant(&self, num: i64, den: i64) -> Self {
        Quadratic::from_rational(exact::rational(num, den), self.d)
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn cmp_tol(&self, o: &Self, _tol: f64) -> Ordering {
        self.sub(o).signum()
    }
    fn to_f64(&self) -> f64 {
        Quadratic::to_f64(self)
    }
}

fn tent_s<S: Scalar>(beta: &S, x: &S, left: bool) -> S {
    let one = beta.constant(1, 1);
    if left {
        beta.mul(x)
    } else {
        one.sub(&beta.mul(&one.sub(x)))
    }
}

/// A partition of `[0, 1]` into intervals each mapped by `B` onto a union of
/// partition intervals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarkovPartition {
    pub beta: f64,
    /// Sorted, starting at 0 and ending at 1; contains 1/2.
    pub breakpoints: Vec<f64>,
    /// `transition[i][j] = 1` iff interval `j` lies in the image of interval `i`.
    pub transition: Vec<Vec<u8>>,
    /// Whether the partition was found in exact arithmetic.
    pub exact: bool,
    /// `beta/2, B(beta/2), ...` up to the first repeat.
    pub critical_orbit: Vec<f64>,
}

impl MarkovPartition {
    pub fn len(&self) -> usize {
        self.transition.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transition.is_empty()
    }

    pub fn intervals(&self) -> Vec<(f64, f64)> {
        self.breakpoints.windows(2).map(|w| (w[0], w[1])).collect()
    }

    pub fn sft(&self) -> Result<Sft> {
        Sft::new(self.transition.clone())
    }

    /// 1 for intervals inside `[0, 1/2]`, 2 otherwise.
    pub fn branch_symbols(&self) -> Vec<usize> {
        self.intervals().iter().map(|&(_, hi)| if hi <= 0.5 { 1 } else { 2 }).collect()
    }

    /// Number of distinct length-`n` itineraries over `{1, 2}` carried by
    /// admissible partition words.
    pub fn itinerary_count(&self, n: usize) -> Result<usize> {
        let sft = self.sft()?;
        let sym = self.branch_symbols();
        let mut seen: Vec<Vec<usize>> = sft
            .admissible_words(n)
            .into_iter()
            .map(|w| w.iter().map(|&i| sym[i - 1]).collect())
            .collect();
        seen.sort();
        seen.dedup();
        Ok(seen.len())
    }
}

struct Found {
    points: Vec<f64>,
    transition: Vec<Vec<u8>>,
    orbit: Vec<f64>,
}

fn detect_generic<S: Scalar>(beta: &S, k: usize, tol: f64) -> Option<Found> {
    let zero = beta.constant(0, 1);
    let half = beta.constant(1, 2);
    let one = beta.constant(1, 1);
    let mut orbit = vec![beta.mul(&half)];
    let mut closed = false;
    for _ in 0..k {
        let last = &orbit[orbit.len() - 1];
        let next = tent_s(beta, last, last.cmp_tol(&half, tol) != Ordering::Greater);
        if orbit.iter().any(|o| o.cmp_tol(&next, tol) == Ordering::Equal) {
            closed = true;
            break;
        }
        orbit.push(next);
    }
    if !closed {
        return None;
    }

    let mut points = vec![zero, half.clone(), one.clone()];
    for o in &orbit {
        points.push(o.clone());
        points.push(one.sub(o));
    }
    points.sort_by(|a, b| a.cmp_tol(b, tol));
    points.dedup_by(|a, b| a.cmp_tol(b, tol) == Ordering::Equal);

    let position = |v: &S| points.iter().position(|p| p.cmp_tol(v, tol) == Ordering::Equal);
    let n = points.len() - 1;
    let mut images = Vec::with_capacity(n);
    for i in 0..n {
        let left = points[i + 1].cmp_tol(&half, tol) != Ordering::Greater;
        let a = tent_s(beta, &points[i], left);
        let b = tent_s(beta, &points[i + 1], left);
        images.push((position(&a)?, position(&b)?));
    }
    let transition = images
        .iter()
        .map(|&(a, b)| (0..n).map(|j| u8::from(a <= j && j < b)).collect())
        .collect();
    Some(Found {
        points: points.iter().map(Scalar::to_f64).collect(),
        transition,
        orbit: orbit.iter().map(Scalar::to_f64).collect(),
    })
}

/// Searches for a return of the critical orbit within `k` steps, comparing
/// points with tolerance `tol`. A result is numerically Markov only.
pub fn detect_markov(beta: f64, k: usize, tol: f64) -> Result<Option<MarkovPartition>> {
    if !(beta > 1.0 && beta <= 2.0) {
        return Err(Error::invalid(format!("beta = {beta} must lie in (1,2]")));
    }
    if k == 0 || !(tol > 0.0) {
        return Err(Error::invalid("iteration budget and tolerance must be positive"));
    }
    Ok(detect_generic(&beta, k, tol).map(|f| MarkovPartition {
        beta,
        breakpoints: f.points,
        transition: f.transition,
        exact: false,
        critical_orbit: f.orbit,
    }))
}

/// As [`detect_markov`] with `beta` in a real quadratic field, all
/// comparisons exact.
pub fn detect_markov_exact(beta: &Quadratic, k: usize) -> Result<Option<MarkovPartition>> {
    let one = Quadratic::from_rational(Rational::one(), beta.d);
    let two = Quadratic::from_rational(exact::rational(2, 1), beta.d);
    if beta <= &one || beta > &two {
        return Err(Error::invalid(format!("beta = {beta} must lie in (1,2]")));
    }
    if k == 0 {
        return Err(Error::invalid("iteration budget must be positive"));
    }
    Ok(detect_generic(beta, k, 0.0).map(|f| MarkovPartition {
        beta: beta.to_f64(),
        breakpoints: f.points,
        transition: f.transition,
        exact: true,
        critical_orbit: f.orbit,
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarkovDim {
    /// `1 + log(alpha rho) / log beta`.
    pub s: f64,
    /// Root of `rho(alpha beta^{1-s} A_R) = 1` found by bisection.
    pub s_bisection: f64,
    /// Perron value of the adjacency restricted to the chosen class.
    pub rho: f64,
    /// Partition intervals (0-based) of the chosen class.
    pub class: Vec<usize>,
}

/// Dimension of the graph over the Markov subset carried by the strongly
/// connected class of largest spectral radius.
pub fn markov_dim(sys: &TentSystem, part: &MarkovPartition) -> Result<MarkovDim> {
    if (part.beta - sys.beta).abs() > 1e-12 {
        return Err(Error::invalid(format!("partition is for beta = {}, system has {}", part.beta, sys.beta)));
    }
    let a: Vec<Vec<f64>> = part.transition.iter().map(|r| r.iter().map(|&v| f64::from(v)).collect()).collect();
    let mut best: Option<(f64, Vec<usize>, Vec<Vec<f64>>)> = None;
    for class in strongly_connected_components(&a) {
        let block: Vec<Vec<f64>> = class.iter().map(|&i| class.iter().map(|&j| a[i][j]).collect()).collect();
        let rho = spectral_radius(&block)?;
        if best.as_ref().is_none_or(|b| rho > b.0) {
            best = Some((rho, class, block));
        }
    }
    let (rho, class, block) = best.ok_or_else(|| Error::invalid("empty partition"))?;
    if sys.alpha * rho <= 1.0 {
        return Err(Error::precondition(format!(
            "alpha * rho = {} is at most 1; the weighted matrix at s = 1 has no expansion",
            sys.alpha * rho
        )));
    }
    let s = 1.0 + (sys.alpha * rho).ln() / sys.beta.ln();
    let scaled = |s: f64| {
        let c = sys.alpha * sys.beta.powf(1.0 - s);
        let m: Vec<Vec<f64>> = block.iter().map(|r| r.iter().map(|v| c * v).collect()).collect();
        spectral_radius(&m).unwrap_or(f64::NAN) - 1.0
    };
    let s_bisection = bisect_decreasing(scaled, 1.0, 2.0);
    if (s - s_bisection).abs() > 1e-8 {
        return Err(Error::Diagnostics(format!("closed form {s} and bisection {s_bisection} disagree")));
    }
    Ok(MarkovDim {
        s,
        s_bisection,
        rho,
        class,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tentmap::count_admissible;

    const GOLDEN: f64 = 1.618_033_988_749_895;

    #[test]
    fn full_tent_partition() {
        let p = detect_markov(2.0, 10, 1e-11).unwrap().unwrap();
        assert_eq!(p.breakpoints, vec![0.0, 0.5, 1.0]);
        assert_eq!(p.transition, vec![vec![1, 1], vec![1, 1]]);
        let sys = TentSystem::new(0.7, 2.0).unwrap();
        let d = markov_dim(&sys, &p).unwrap();
        assert!((d.s - (2.0 + 0.7f64.ln() / 2f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn golden_partition_float_and_exact() {
        let p = detect_markov(GOLDEN, 20, 1e-11).unwrap().unwrap();
        let q = detect_markov_exact(&Quadratic::golden(), 20).unwrap().unwrap();
        assert!(q.exact && !p.exact);
        assert_eq!(p.transition, q.transition);
        assert_eq!(p.len(), 6);
        let c = GOLDEN / 2.0;
        let want = [0.0, 1.0 - c, c - 0.5, 0.5, 1.5 - c, c, 1.0];
        for (a, b) in p.breakpoints.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(q.critical_orbit.len(), 3);
        assert!((q.critical_orbit[2] - 0.5).abs() < 1e-15);
        let a: Vec<Vec<f64>> = p.transition.iter().map(|r| r.iter().map(|&v| f64::from(v)).collect()).collect();
        assert!((spectral_radius(&a).unwrap() - GOLDEN).abs() < 1e-12);
    }

    #[test]
    fn golden_itineraries_match_cylinder_counts() {
        let p = detect_markov_exact(&Quadratic::golden(), 20).unwrap().unwrap();
        for n in 1..=10 {
            assert_eq!(p.itinerary_count(n).unwrap() as u128, count_admissible(GOLDEN, n).unwrap(), "n = {n}");
        }
    }

    #[test]
    fn golden_dimension() {
        let p = detect_markov(GOLDEN, 20, 1e-11).unwrap().unwrap();
        let sys = TentSystem::new(0.9, GOLDEN).unwrap();
        let d = markov_dim(&sys, &p).unwrap();
        assert!((d.s - (2.0 + 0.9f64.ln() / GOLDEN.ln())).abs() < 1e-8);
        assert!((d.s - d.s_bisection).abs() < 1e-8);
        assert!((1.0..=2.0).contains(&d.s));
    }

    #[test]
    fn no_return_found() {
        assert!(detect_markov(1.8, 60, 1e-11).unwrap().is_none());
        assert!(detect_markov(2.5, 60, 1e-11).is_err());
        assert!(detect_markov(1.8, 0, 1e-11).is_err());
    }

    #[test]
    fn degenerate_when_alpha_rho_small() {
        let p = MarkovPartition {
            beta: GOLDEN,
            breakpoints: vec![0.0, 0.5, 1.0],
            transition: vec![vec![1, 0], vec![0, 1]],
            exact: false,
            critical_orbit: vec![],
        };
        let sys = TentSystem::new(0.9, GOLDEN).unwrap();
        assert!(matches!(markov_dim(&sys, &p), Err(Error::Precondition(_))));
    }
}
