//! Spectral radius of nonnegative matrices.

use crate::error::{Error, Result};

const MAX_ITERATIONS: usize = 2_000_000;
const REL_TOL: f64 = 1e-14;

fn validate(m: &[Vec<f64>]) -> Result<()> {
    let n = m.len();
    if n == 0 {
        return Err(Error::invalid("matrix must be nonempty"));
    }
    for (i, row) in m.iter().enumerate() {
        if row.len() != n {
            return Err(Error::invalid(format!("row {} has {} entries, expected {n}", i + 1, row.len())));
        }
        if let Some(v) = row.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::invalid(format!("entry {v} in row {} is not a finite nonnegative number", i + 1)));
        }
    }
    Ok(())
}

/// Strongly connected components of the support graph, each sorted.
pub fn strongly_connected_components(m: &[Vec<f64>]) -> Vec<Vec<usize>> {
    let n = m.len();
    let mut reach: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| i == j || m[i][j] > 0.0).collect()).collect();
    for k in 0..n {
        for i in 0..n {
            if reach[i][k] {
                for j in 0..n {
                    if reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for i in 0..n {
        if seen[i] {
            continue;
        }
        let class: Vec<usize> = (0..n).filter(|&j| reach[i][j] && reach[j][i]).collect();
        for &j in &class {
            seen[j] = true;
        }
        out.push(class);
    }
    out
}

/// Perron value and positive eigenvector of an irreducible block, by power
/// iteration on `M + delta I` with Collatz-Wielandt bounds.
pub(crate) fn perron_irreducible(m: &[Vec<f64>]) -> (f64, Vec<f64>) {
    let n = m.len();
    let max = m.iter().flatten().fold(0.0f64, |a, &b| a.max(b));
    if max == 0.0 {
        return (0.0, vec![1.0; n]);
    }
    if n == 1 {
        return (m[0][0], vec![1.0]);
    }
    let delta = 1e-3 * max;
    let mut v = vec![1.0 / n as f64; n];
    let mut w = vec![0.0; n];
    let mut estimate = 0.0;
    for _ in 0..MAX_ITERATIONS {
        for i in 0..n {
            w[i] = delta * v[i] + m[i].iter().zip(&v).map(|(a, b)| a * b).sum::<f64>();
        }
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 0..n {
            let ratio = w[i] / v[i];
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
        estimate = 0.5 * (lo + hi);
        let norm: f64 = w.iter().sum();
        for i in 0..n {
            v[i] = w[i] / norm;
        }
        if hi - lo <= REL_TOL * hi {
            break;
        }
    }
    (estimate - delta, v)
}

/// Spectral radius of a square nonnegative matrix: the largest Perron value
/// over the strongly connected components.
pub fn spectral_radius(m: &[Vec<f64>]) -> Result<f64> {
    validate(m)?;
    let mut rho = 0.0f64;
    for class in strongly_connected_components(m) {
        if class.len() == 1 && m[class[0]][class[0]] == 0.0 {
            continue;
        }
        let block: Vec<Vec<f64>> = class.iter().map(|&i| class.iter().map(|&j| m[i][j]).collect()).collect();
        rho = rho.max(perron_irreducible(&block).0);
    }
    Ok(rho)
}

/// Characteristic polynomial `det(lambda I - M)`, coefficients in ascending
/// order (the last one is 1), by the Faddeev-LeVerrier recursion.
pub fn characteristic_polynomial(m: &[Vec<f64>]) -> Vec<f64> {
    let n = m.len();
    let mut coeffs = vec![0.0; n + 1];
    coeffs[n] = 1.0;
    let mut mk = vec![vec![0.0; n]; n];
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I
        let mut next = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                next[i][j] = (0..n).map(|l| m[i][l] * mk[l][j]).sum::<f64>();
            }
            next[i][i] += coeffs[n - k + 1];
        }
        mk = next;
        let trace: f64 = (0..n).map(|i| (0..n).map(|l| m[i][l] * mk[l][i]).sum::<f64>()).sum();
        coeffs[n - k] = -trace / k as f64;
    }
    coeffs
}

fn horner(p: &[f64], x: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

fn derivative(p: &[f64]) -> Vec<f64> {
    p.iter().enumerate().skip(1).map(|(k, c)| k as f64 * c).collect()
}

fn bisect(p: &[f64], mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = horner(p, lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let fm = horner(p, mid);
        if (fm <= 0.0) == (flo <= 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Real roots of a polynomial (ascending coefficients) inside `[-bound, bound]`,
/// isolated between consecutive critical points.
pub fn real_roots(p: &[f64]) -> Vec<f64> {
    let mut p = p.to_vec();
    while p.len() > 1 && p[p.len() - 1] == 0.0 {
        p.pop();
    }
    let deg = p.len() - 1;
    if deg == 0 {
        return Vec::new();
    }
    let lead = p[deg];
    let bound = 1.0 + p[..deg].iter().map(|c| (c / lead).abs()).fold(0.0, f64::max);
    let mut points = vec![-bound];
    points.extend(real_roots(&derivative(&p)).into_iter().filter(|x| x.abs() < bound));
    points.push(bound);
    let scale = p.iter().map(|c| c.abs()).fold(0.0, f64::max) * bound.powi(deg as i32);
    let mut roots: Vec<f64> = Vec::new();
    for w in points.windows(2) {
        let (fa, fb) = (horner(&p, w[0]), horner(&p, w[1]));
        if fa == 0.0 {
            roots.push(w[0]);
        } else if (fa < 0.0) != (fb < 0.0) && fb != 0.0 {
            roots.push(bisect(&p, w[0], w[1]));
        }
    }
    // critical points where p nearly vanishes are multiple roots
    for &c in &points[1..points.len() - 1] {
        if horner(&p, c).abs() <= 1e-12 * scale && roots.iter().all(|r| (r - c).abs() > 1e-9) {
            roots.push(c);
        }
    }
    if horner(&p, bound) == 0.0 {
        roots.push(bound);
    }
    roots.sort_by(f64::total_cmp);
    roots
}

/// Independent spectral radius for small matrices: the largest real root of
/// the characteristic polynomial.
pub fn charpoly_spectral_radius(m: &[Vec<f64>]) -> Result<f64> {
    validate(m)?;
    if m.len() > 4 {
        return Err(Error::invalid("polynomial oracle supports at most 4x4 matrices"));
    }
    let roots = real_roots(&characteristic_polynomial(m));
    Ok(roots.last().copied().unwrap_or(0.0).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tribonacci() -> Vec<Vec<f64>> {
        vec![vec![0.0, 1.0, 0.0], vec![0.0, 1.0, 1.0], vec![1.0, 1.0, 0.0]]
    }

    /// Largest root of x^3 - x^2 - x - 1 by plain bisection.
    fn tribonacci_root() -> f64 {
        let f = |x: f64| x * x * x - x * x - x - 1.0;
        let (mut lo, mut hi) = (1.0, 2.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < 0.0 {
                lo = mid
            } else {
                hi = mid
            }
        }
        lo
    }

    #[test]
    fn small_cases() {
        assert_eq!(spectral_radius(&[vec![3.5]]).unwrap(), 3.5);
        assert_eq!(spectral_radius(&[vec![0.0]]).unwrap(), 0.0);
        assert_eq!(spectral_radius(&[vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap(), 0.0);
        let swap = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        assert!((spectral_radius(&swap).unwrap() - 1.0).abs() < 1e-12);
        let nilpotent = vec![vec![0.0, 5.0], vec![0.0, 0.0]];
        assert_eq!(spectral_radius(&nilpotent).unwrap(), 0.0);
        let triangular = vec![vec![2.0, 7.0], vec![0.0, 3.0]];
        assert!((spectral_radius(&triangular).unwrap() - 3.0).abs() < 1e-12);
        assert!(spectral_radius(&[vec![-1.0]]).is_err());
        assert!(spectral_radius(&[vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn tribonacci_matrix() {
        let want = tribonacci_root();
        assert!((want - 1.839286755).abs() < 1e-9);
        let got = spectral_radius(&tribonacci()).unwrap();
        assert!((got - want).abs() <= 1e-12 * want);
        let scaled: Vec<Vec<f64>> = tribonacci().iter().map(|r| r.iter().map(|v| v * 2.0 / 3.0).collect()).collect();
        assert!((spectral_radius(&scaled).unwrap() - 2.0 / 3.0 * want).abs() < 1e-12);
        assert!((charpoly_spectral_radius(&tribonacci()).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn charpoly_coefficients() {
        assert_eq!(characteristic_polynomial(&tribonacci()), vec![-1.0, -1.0, -1.0, 1.0]);
    }

    #[test]
    fn roots_with_multiplicity() {
        // (x - 1)^2 (x + 2)
        let roots = real_roots(&[2.0, -3.0, 0.0, 1.0]);
        assert!((roots[roots.len() - 1] - 1.0).abs() < 1e-9);
        assert!((roots[0] + 2.0).abs() < 1e-12);
        let id = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        assert!((charpoly_spectral_radius(&id).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn components() {
        let m = vec![vec![1.0, 1.0, 0.0], vec![0.0, 0.0, 1.0], vec![0.0, 1.0, 0.0]];
        assert_eq!(strongly_connected_components(&m), vec![vec![0], vec![1, 2]]);
    }
}
