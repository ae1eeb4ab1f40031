//! The equilibrium Markov measure of a Markovian interpolation system, its
//! entropy and Lyapunov exponents, and the resulting measure dimension.

use serde::Serialize;

use crate::dimension::{perron_irreducible, spectral_dimension, weighted_matrix};
use crate::error::{Error, Result};
use crate::graphs::MarkovFif;
use crate::symbolic::{CylinderMeasure, MarkovChain};

const STATIONARY_TOL: f64 = 1e-15;
const STATIONARY_MAX_ITER: usize = 1_000_000;

/// Markov measure built from the Perron vector of the weighted matrix at the
/// dimension parameter `s`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarkovMeasure {
    pub s: f64,
    /// Right Perron vector, normalized to sum 1.
    pub p: Vec<f64>,
    /// Row-stochastic transition matrix.
    pub transition: Vec<Vec<f64>>,
    /// Stationary row vector.
    pub q: Vec<f64>,
}

impl MarkovMeasure {
    /// Measure from an arbitrary nonnegative matrix with irreducible aperiodic
    /// support, using its Perron vector.
    pub fn from_matrix(s: f64, matrix: &[Vec<f64>]) -> Result<Self> {
        let m = matrix.len();
        let (_, mut p) = perron_irreducible(matrix);
        let total: f64 = p.iter().sum();
        p.iter_mut().for_each(|v| *v /= total);
        let transition: Vec<Vec<f64>> = (0..m)
            .map(|i| {
                let row: Vec<f64> = (0..m).map(|j| matrix[i][j] * p[j]).collect();
                let sum: f64 = row.iter().sum();
                row.into_iter().map(|v| v / sum).collect()
            })
            .collect();
        let q = stationary(&transition)?;
        Ok(MarkovMeasure { s, p, transition, q })
    }

    pub fn chain(&self) -> MarkovChain {
        MarkovChain {
            initial: self.q.clone(),
            transition: self.transition.clone(),
        }
    }

    /// `q_{w_1} P_{w_1 w_2} ... P_{w_{n-1} w_n}`.
    pub fn cylinder(&self, w: &[usize]) -> f64 {
        self.chain().mass(w)
    }
}

impl CylinderMeasure for MarkovMeasure {
    fn mass(&self, w: &[usize]) -> f64 {
        self.cylinder(w)
    }

    fn markov_chain(&self) -> Option<MarkovChain> {
        Some(self.chain())
    }
}

/// Stationary distribution of a primitive stochastic matrix by power iteration.
pub fn stationary(transition: &[Vec<f64>]) -> Result<Vec<f64>> {
    let m = transition.len();
    let mut q = vec![1.0 / m as f64; m];
    for _ in 0..STATIONARY_MAX_ITER {
        let mut next = vec![0.0; m];
        for i in 0..m {
            for j in 0..m {
                next[j] += q[i] * transition[i][j];
            }
        }
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|v| *v /= total);
        let change = next.iter().zip(&q).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        q = next;
        if change <= STATIONARY_TOL {
            return Ok(q);
        }
    }
    Err(Error::Diagnostics("stationary distribution did not converge".into()))
}

/// The equilibrium measure of the system.
pub fn equilibrium_markov(sys: &MarkovFif) -> Result<MarkovMeasure> {
    let prim = sys.sft().irreducible_aperiodic();
    if !prim.irreducible {
        return Err(Error::precondition("adjacency matrix is reducible"));
    }
    if !prim.aperiodic {
        return Err(Error::precondition("adjacency matrix is periodic"));
    }
    let s = spectral_dimension(sys)?
        .ok_or_else(|| Error::precondition("spectral radius of the weighted matrix at s = 1 is at most 1"))?;
    let matrix = weighted_matrix(sys, s)?;
    MarkovMeasure::from_matrix(s, &matrix.entries)
}

fn xlogx(p: f64) -> f64 {
    if p > 0.0 {
        p * p.ln()
    } else {
        0.0
    }
}

/// `-sum q_i P_ij log P_ij` in nats.
pub fn entropy(mm: &MarkovMeasure) -> f64 {
    -mm.q
        .iter()
        .zip(&mm.transition)
        .map(|(qi, row)| qi * row.iter().map(|&p| xlogx(p)).sum::<f64>())
        .sum::<f64>()
}

/// `(chi_1, chi_2) = (sum q_i log gamma_i, -sum q_i log |alpha_i|)`.
pub fn lyapunov(mm: &MarkovMeasure, sys: &MarkovFif) -> (f64, f64) {
    let chi1 = mm.q.iter().zip(sys.gamma()).map(|(q, g)| q * g.ln()).sum();
    let chi2 = -mm.q.iter().zip(sys.alpha().values()).map(|(q, a)| q * a.abs().ln()).sum::<f64>();
    (chi1, chi2)
}

/// `h / chi_2` if `h <= chi_2`, else `min(2, 1 + (h - chi_2) / chi_1)`.
pub fn ly_dimension(h: f64, chi1: f64, chi2: f64) -> Result<f64> {
    if !(chi2 > 0.0) {
        return Err(Error::invalid(format!("fiber exponent {chi2} must be positive")));
    }
    if !(chi1 >= chi2) {
        return Err(Error::invalid(format!("need chi2 <= chi1, got {chi2} > {chi1}")));
    }
    if h <= chi2 {
        Ok(h / chi2)
    } else {
        Ok((1.0 + (h - chi2) / chi1).min(2.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErgodicStats {
    pub h: f64,
    pub chi1: f64,
    pub chi2: f64,
    pub dimension: f64,
}

pub fn ergodic_stats(mm: &MarkovMeasure, sys: &MarkovFif) -> Result<ErgodicStats> {
    let h = entropy(mm);
    let (chi1, chi2) = lyapunov(mm, sys);
    Ok(ErgodicStats {
        h,
        chi1,
        chi2,
        dimension: ly_dimension(h, chi1, chi2)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{DataSet, VerticalScalings};

    fn markov_fif() -> MarkovFif {
        let data = DataSet::new(vec![(0.0, 0.0), (0.2, 0.2), (2.0 / 3.0, 0.0), (1.0, 0.6)]).unwrap();
        let alpha = VerticalScalings::new(vec![2.0 / 3.0, -2.0 / 3.0, 2.0 / 3.0]).unwrap();
        MarkovFif::new(data, alpha, vec![1, 1, 0], vec![2, 3, 2]).unwrap()
    }

    #[test]
    fn symmetric_full_shift_is_uniform() {
        let sys = MarkovFif::full_shift(
            DataSet::new(vec![(0.0, 0.0), (1.0 / 3.0, 0.5), (2.0 / 3.0, -0.2), (1.0, 0.0)]).unwrap(),
            VerticalScalings::uniform(0.6, 3).unwrap(),
        )
        .unwrap();
        let mm = equilibrium_markov(&sys).unwrap();
        for i in 0..3 {
            assert!((mm.q[i] - 1.0 / 3.0).abs() < 1e-12);
            assert!((mm.p[i] - 1.0 / 3.0).abs() < 1e-12);
            for j in 0..3 {
                assert!((mm.transition[i][j] - 1.0 / 3.0).abs() < 1e-12);
            }
        }
        assert!((entropy(&mm) - 3f64.ln()).abs() < 1e-12);
        let (chi1, chi2) = lyapunov(&mm, &sys);
        assert!((chi1 - 3f64.ln()).abs() < 1e-12);
        assert!((chi2 + 0.6f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn markov_fif_measure_is_stationary() {
        let sys = markov_fif();
        let mm = equilibrium_markov(&sys).unwrap();
        for row in &mm.transition {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        for j in 0..3 {
            let qp: f64 = (0..3).map(|i| mm.q[i] * mm.transition[i][j]).sum();
            assert!((qp - mm.q[j]).abs() < 1e-12);
            assert!(mm.q[j] > 0.0);
        }
        for n in 1..=8 {
            let total: f64 = sys.sft().admissible_words(n).iter().map(|w| mm.cylinder(w)).sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn markov_identity_and_dimension() {
        let sys = markov_fif();
        let mm = equilibrium_markov(&sys).unwrap();
        let stats = ergodic_stats(&mm, &sys).unwrap();
        assert!((stats.chi2 - 1.5f64.ln()).abs() < 1e-12);
        assert!((stats.h - (stats.chi2 + (mm.s - 1.0) * stats.chi1)).abs() < 1e-10);
        assert!((stats.dimension - mm.s).abs() < 1e-9);
    }

    #[test]
    fn permutation_has_zero_entropy() {
        let mm = MarkovMeasure {
            s: 1.0,
            p: vec![0.5, 0.5],
            transition: vec![vec![0.0, 1.0], vec![1.0, 0.0]],
            q: vec![0.5, 0.5],
        };
        assert_eq!(entropy(&mm), 0.0);
    }

    #[test]
    fn ly_dimension_boundaries() {
        assert_eq!(ly_dimension(0.4, 0.9, 0.4).unwrap(), 1.0);
        assert_eq!(ly_dimension(1.3, 0.9, 0.4).unwrap(), 2.0);
        assert!((ly_dimension(0.2, 0.9, 0.4).unwrap() - 0.5).abs() < 1e-15);
        assert!(ly_dimension(0.2, 0.9, 0.0).is_err());
    }

    #[test]
    fn preconditions() {
        let periodic = MarkovFif::new(
            DataSet::new(vec![(0.0, 0.0), (0.25, 0.3), (0.5, 0.1), (0.75, 0.4), (1.0, 0.0)]).unwrap(),
            VerticalScalings::uniform(0.9, 4).unwrap(),
            vec![2, 2, 0, 0],
            vec![4, 4, 2, 2],
        )
        .unwrap();
        assert!(matches!(equilibrium_markov(&periodic), Err(Error::Precondition(_))));
    }
}
