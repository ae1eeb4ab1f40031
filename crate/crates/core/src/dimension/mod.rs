//! Theoretical box dimension of fractal interpolation graphs and the checks
//! behind the matching Hausdorff dimension statements.

mod conditions;
mod cover;
mod spectral;

use serde::Serialize;

pub use conditions::{check_collinear, check_condfor_hd, collinear_exact, search_assum, AssumWitness, CondForHd};
pub use cover::{ledrappier_sample, ledrappier_tail, stopping_time_cover, StoppingCover};
pub(crate) use spectral::perron_irreducible;
pub use spectral::{
    characteristic_polynomial, charpoly_spectral_radius, real_roots, spectral_radius, strongly_connected_components,
};

use crate::error::{Error, Result};
use crate::graphs::MarkovFif;

/// Word length searched for the shear witness by [`theoretical_box_dim`].
pub const DEFAULT_ASSUM_SEARCH: usize = 8;

const BISECTION_STEPS: usize = 100;

/// Root of `sum |alpha_i| l_i^(s-1) = 1` on `[1, 2]`. Returns `None` when
/// `sum |alpha_i| < 1`, where the box dimension is 1.
pub fn moran_solve(alpha: &[f64], lengths: &[f64]) -> Result<Option<f64>> {
    if alpha.len() != lengths.len() || alpha.is_empty() {
        return Err(Error::invalid("alpha and lengths must be nonempty and of equal size"));
    }
    if lengths.iter().any(|&l| !(l > 0.0 && l < 1.0)) {
        return Err(Error::invalid("lengths must lie in (0,1)"));
    }
    let total: f64 = lengths.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::invalid(format!("lengths sum to {total}, not 1")));
    }
    let f = |s: f64| alpha.iter().zip(lengths).map(|(a, l)| a.abs() * l.powf(s - 1.0)).sum::<f64>() - 1.0;
    let at_one = f(1.0);
    if at_one < 0.0 {
        return Ok(None);
    }
    if at_one == 0.0 {
        return Ok(Some(1.0));
    }
    Ok(Some(bisect_decreasing(f, 1.0, 2.0)))
}

/// Bisection for a decreasing function with `f(lo) > 0`; clamps to `hi` if
/// `f(hi) >= 0`.
pub(crate) fn bisect_decreasing(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    if f(hi) >= 0.0 {
        return hi;
    }
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// The matrix with entries `|alpha_i| gamma_i^{-(s-1)} A_ij`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedMatrix {
    pub s: f64,
    pub entries: Vec<Vec<f64>>,
}

impl WeightedMatrix {
    pub fn spectral_radius(&self) -> f64 {
        spectral_radius(&self.entries).expect("weighted matrices are square and nonnegative")
    }

    /// Row weights `|alpha_i| gamma_i^{-(s-1)}`.
    pub fn row_weights(sys: &MarkovFif, s: f64) -> Vec<f64> {
        sys.alpha()
            .values()
            .iter()
            .zip(sys.gamma())
            .map(|(a, g)| a.abs() * g.powf(1.0 - s))
            .collect()
    }
}

pub fn weighted_matrix(sys: &MarkovFif, s: f64) -> Result<WeightedMatrix> {
    if !(1.0..=2.0).contains(&s) {
        return Err(Error::invalid(format!("s = {s} outside [1,2]")));
    }
    let w = WeightedMatrix::row_weights(sys, s);
    let entries = sys
        .sft()
        .adjacency()
        .iter()
        .zip(&w)
        .map(|(row, wi)| row.iter().map(|&a| wi * f64::from(a)).collect())
        .collect();
    Ok(WeightedMatrix { s, entries })
}

/// The `s` in `[1, 2]` with spectral radius of the weighted matrix equal to
/// 1, or `None` if the radius at `s = 1` is at most 1.
pub fn spectral_dimension(sys: &MarkovFif) -> Result<Option<f64>> {
    let rho = |s: f64| -> f64 { weighted_matrix(sys, s).map(|w| w.spectral_radius()).unwrap_or(f64::NAN) };
    if rho(1.0) <= 1.0 {
        return Ok(None);
    }
    Ok(Some(bisect_decreasing(|s| rho(s) - 1.0, 1.0, 2.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum HausdorffStatus {
    /// A theorem's hypotheses were verified.
    Yes,
    NotEstablished,
    /// Dimension one cases, where both dimensions are trivially 1.
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Branch {
    #[serde(rename = "collinear")]
    Collinear,
    #[serde(rename = "sum<=1")]
    SumAtMostOne,
    #[serde(rename = "moran")]
    Moran,
    #[serde(rename = "spectral<=1")]
    SpectralAtMostOne,
    #[serde(rename = "spectral")]
    Spectral,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witnesses {
    pub condfor_hd: Option<CondForHd>,
    pub assum: Option<AssumWitness>,
    pub assum_search_length: Option<usize>,
    pub irreducible: bool,
    pub aperiodic: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionReport {
    pub theoretical_box: f64,
    pub hausdorff_equals_box: HausdorffStatus,
    pub s_root: Option<f64>,
    pub branch: Branch,
    /// Spectral radius of the weighted matrix at `s = 1`.
    pub rho_at_one: f64,
    pub witnesses: Witnesses,
}

/// Box dimension of the graph with the branch that produced it.
pub fn theoretical_box_dim(sys: &MarkovFif) -> Result<DimensionReport> {
    theoretical_box_dim_with(sys, DEFAULT_ASSUM_SEARCH)
}

pub fn theoretical_box_dim_with(sys: &MarkovFif, assum_len: usize) -> Result<DimensionReport> {
    let prim = sys.sft().irreducible_aperiodic();
    let rho_at_one = weighted_matrix(sys, 1.0)?.spectral_radius();
    let mut witnesses = Witnesses {
        condfor_hd: None,
        assum: None,
        assum_search_length: None,
        irreducible: prim.irreducible,
        aperiodic: prim.aperiodic,
    };
    let trivial = |branch, witnesses| DimensionReport {
        theoretical_box: 1.0,
        hausdorff_equals_box: HausdorffStatus::Degenerate,
        s_root: None,
        branch,
        rho_at_one,
        witnesses,
    };
    if check_collinear(sys.data()) {
        return Ok(trivial(Branch::Collinear, witnesses));
    }
    if sys.is_full_shift() {
        let cond = check_condfor_hd(sys.data(), sys.alpha())?;
        let holds = cond.holds;
        witnesses.condfor_hd = Some(cond);
        let root = moran_solve(sys.alpha().values(), &sys.data().widths())?;
        let s = match root {
            Some(s) if sys.alpha().values().iter().map(|a| a.abs()).sum::<f64>() > 1.0 => s,
            _ => return Ok(trivial(Branch::SumAtMostOne, witnesses)),
        };
        return Ok(DimensionReport {
            theoretical_box: s,
            hausdorff_equals_box: if holds { HausdorffStatus::Yes } else { HausdorffStatus::NotEstablished },
            s_root: Some(s),
            branch: Branch::Moran,
            rho_at_one,
            witnesses,
        });
    }
    let s = match spectral_dimension(sys)? {
        Some(s) => s,
        None => return Ok(trivial(Branch::SpectralAtMostOne, witnesses)),
    };
    let mut status = HausdorffStatus::NotEstablished;
    if prim.irreducible && prim.aperiodic {
        witnesses.assum_search_length = Some(assum_len);
        witnesses.assum = search_assum(sys, assum_len)?;
        if witnesses.assum.is_some() {
            status = HausdorffStatus::Yes;
        }
    }
    Ok(DimensionReport {
        theoretical_box: s,
        hausdorff_equals_box: status,
        s_root: Some(s),
        branch: Branch::Spectral,
        rho_at_one,
        witnesses,
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

    fn moran_fif() -> MarkovFif {
        MarkovFif::full_shift(
            DataSet::new(vec![(0.0, 0.0), (0.25, 2.0 / 3.0), (0.5, 0.25), (1.0, 1.0)]).unwrap(),
            VerticalScalings::new(vec![1.0 / 3.0, -0.5, 0.5]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn moran_closed_forms() {
        let s = moran_solve(&[2.0 / 3.0; 2], &[0.5; 2]).unwrap().unwrap();
        assert!((s - (2.0 + (2.0f64 / 3.0).ln() / 2.0f64.ln())).abs() < 1e-12);
        assert_eq!(moran_solve(&[0.5, 0.5], &[0.5, 0.5]).unwrap(), Some(1.0));
        assert_eq!(moran_solve(&[0.3, 0.5], &[0.5, 0.5]).unwrap(), None);
        let moran_fif = moran_solve(&[1.0 / 3.0, -0.5, 0.5], &[0.25, 0.25, 0.5]).unwrap().unwrap();
        let closed = 1.0 + (10.0 / (129f64.sqrt() - 3.0)).log2();
        assert!((moran_fif - closed).abs() < 1e-10);
        assert!(moran_solve(&[0.5], &[0.5, 0.5]).is_err());
        assert!(moran_solve(&[0.5, 0.5], &[0.5, 0.4]).is_err());
    }

    #[test]
    fn weighted_matrix_rows() {
        let sys = markov_fif();
        let w = weighted_matrix(&sys, 1.0).unwrap();
        for (row, adj) in w.entries.iter().zip(sys.sft().adjacency()) {
            for (v, a) in row.iter().zip(adj) {
                assert!((v - 2.0 / 3.0 * f64::from(*a)).abs() < 1e-15);
            }
        }
        assert!(weighted_matrix(&sys, 2.5).is_err());
    }

    #[test]
    fn full_shift_radius_is_row_sum() {
        let sys = moran_fif();
        for s in [1.0, 1.3, 1.7, 2.0] {
            let w = weighted_matrix(&sys, s).unwrap();
            let want: f64 = WeightedMatrix::row_weights(&sys, s).iter().sum();
            assert!((w.spectral_radius() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn markov_fif_report() {
        let report = theoretical_box_dim(&markov_fif()).unwrap();
        assert_eq!(report.branch, Branch::Spectral);
        assert!((report.rho_at_one - 1.226_190_5).abs() < 1e-6);
        let s = report.s_root.unwrap();
        let w = weighted_matrix(&markov_fif(), s).unwrap();
        assert!((w.spectral_radius() - 1.0).abs() < 1e-12);
        assert!(s > 1.0 && s < 2.0);
    }

    #[test]
    fn moran_fif_report() {
        let report = theoretical_box_dim(&moran_fif()).unwrap();
        assert_eq!(report.branch, Branch::Moran);
        assert!((report.theoretical_box - 1.2588).abs() < 1e-4);
        assert_eq!(report.hausdorff_equals_box, HausdorffStatus::Yes);
        assert_eq!(report.witnesses.condfor_hd.as_ref().unwrap().witness, Some((1, 2)));
    }

    #[test]
    fn degenerate_branches() {
        let line = MarkovFif::full_shift(
            DataSet::new(vec![(0.0, 0.0), (0.5, 0.5), (1.0, 1.0)]).unwrap(),
            VerticalScalings::uniform(0.7, 2).unwrap(),
        )
        .unwrap();
        let r = theoretical_box_dim(&line).unwrap();
        assert_eq!((r.branch, r.theoretical_box), (Branch::Collinear, 1.0));
        let flat = MarkovFif::full_shift(
            DataSet::new(vec![(0.0, 0.0), (0.5, 0.5), (1.0, 0.0)]).unwrap(),
            VerticalScalings::uniform(0.4, 2).unwrap(),
        )
        .unwrap();
        let r = theoretical_box_dim(&flat).unwrap();
        assert_eq!((r.branch, r.theoretical_box), (Branch::SumAtMostOne, 1.0));
        assert_eq!(r.hausdorff_equals_box, HausdorffStatus::Degenerate);
    }

    #[test]
    fn takagi_fif_dimension() {
        let sys = MarkovFif::full_shift(
            DataSet::new(vec![(0.0, 0.0), (0.5, 0.5), (1.0, 0.0)]).unwrap(),
            VerticalScalings::uniform(2.0 / 3.0, 2).unwrap(),
        )
        .unwrap();
        let r = theoretical_box_dim(&sys).unwrap();
        assert!((r.theoretical_box - (2.0 + (2.0f64 / 3.0).ln() / 2.0f64.ln())).abs() < 1e-10);
    }
}
