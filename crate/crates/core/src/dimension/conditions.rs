//! Hypothesis checks for the Hausdorff dimension results.

use std::collections::HashMap;

use num_traits::Zero;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exact::Rational;
use crate::graphs::{AffineMap2, DataSet, MarkovFif, VerticalScalings};
use crate::symbolic::{abelianization, DEFAULT_ENUMERATION_CAP};

const COLLINEAR_TOL: f64 = 1e-12;
const QUOTIENT_REL_TOL: f64 = 1e-9;
const SHEAR_REL_TOL: f64 = 1e-9;

/// True iff every data point lies on the line through the two endpoints.
/// Rational data is checked exactly.
pub fn check_collinear(data: &DataSet) -> bool {
    let m = data.m();
    if let Some(ex) = data.exact() {
        return collinear_exact(ex);
    }
    let (x0, y0) = data.points()[0];
    let (xm, ym) = data.points()[m];
    let slope = (ym - y0) / (xm - x0);
    data.points().iter().all(|&(x, y)| (y - (y0 + slope * (x - x0))).abs() <= COLLINEAR_TOL)
}

fn rational_strings<S: Serializer>(v: &Option<Vec<Option<Rational>>>, s: S) -> std::result::Result<S::Ok, S::Error> {
    let strings: Option<Vec<Option<String>>> =
        v.as_ref().map(|qs| qs.iter().map(|q| q.as_ref().map(|r| r.to_string())).collect());
    strings.serialize(s)
}

/// Outcome of the quotient condition on the data and vertical scalings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CondForHd {
    pub holds: bool,
    /// First pair `(i, j)`, `i < j`, of maps with different quotients (1-based).
    pub witness: Option<(usize, usize)>,
    /// Quotient per map; `None` where the denominator vanishes.
    pub quotients: Vec<Option<f64>>,
    #[serde(serialize_with = "rational_strings")]
    pub exact_quotients: Option<Vec<Option<Rational>>>,
    /// Maps with `x_i - x_{i-1} = alpha_i`, where the check does not apply.
    pub parabolic: Vec<usize>,
}

fn differ(a: f64, b: f64) -> bool {
    let scale = a.abs().max(b.abs());
    (a - b).abs() > QUOTIENT_REL_TOL * scale
}

/// Checks whether the quotients
/// `(y_i - y_{i-1} - alpha_i (y_m - y_0)) / (x_i - x_{i-1} - alpha_i)` are not all equal.
pub fn check_condfor_hd(data: &DataSet, alpha: &VerticalScalings) -> Result<CondForHd> {
    let m = data.m();
    if alpha.len() != m {
        return Err(Error::invalid(format!("expected {m} vertical scalings, got {}", alpha.len())));
    }
    let (y0, ym) = (data.y(0), data.y(m));
    let quotients: Vec<Option<f64>> = (1..=m)
        .map(|i| {
            let al = alpha.values()[i - 1];
            let den = data.x(i) - data.x(i - 1) - al;
            (den != 0.0).then(|| (data.y(i) - data.y(i - 1) - al * (ym - y0)) / den)
        })
        .collect();
    let exact_quotients = match (data.exact(), alpha.exact()) {
        (Some(pts), Some(al)) => Some(
            (1..=m)
                .map(|i| {
                    let den = &pts[i].0 - &pts[i - 1].0 - &al[i - 1];
                    if den.is_zero() {
                        None
                    } else {
                        Some((&pts[i].1 - &pts[i - 1].1 - &al[i - 1] * (&pts[m].1 - &pts[0].1)) / den)
                    }
                })
                .collect::<Vec<_>>(),
        ),
        _ => None,
    };
    let parabolic: Vec<usize> = match &exact_quotients {
        Some(qs) => (1..=m).filter(|&i| qs[i - 1].is_none()).collect(),
        None => (1..=m).filter(|&i| quotients[i - 1].is_none()).collect(),
    };
    let mut witness = None;
    'outer: for i in 1..=m {
        for j in i + 1..=m {
            let differs = match &exact_quotients {
                Some(qs) => matches!((&qs[i - 1], &qs[j - 1]), (Some(a), Some(b)) if a != b),
                None => matches!((quotients[i - 1], quotients[j - 1]), (Some(a), Some(b)) if differ(a, b)),
            };
            if differs {
                witness = Some((i, j));
                break 'outer;
            }
        }
    }
    Ok(CondForHd {
        holds: witness.is_some(),
        witness,
        quotients,
        exact_quotients,
        parabolic,
    })
}

/// Two admissible words of the same length with equal first and last symbols
/// and equal symbol counts whose composed local inverses have different
/// linear parts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumWitness {
    pub omega: Vec<usize>,
    pub tau: Vec<usize>,
    pub length: usize,
    pub shear_omega: f64,
    pub shear_tau: f64,
}

fn abs_map(m: &AffineMap2) -> AffineMap2 {
    AffineMap2 {
        a: m.a.abs(),
        c: m.c.abs(),
        d: m.d.abs(),
        tx: 0.0,
        ty: 0.0,
    }
}

/// Searches lengths `2..=l_max` for a witness. Equal symbol counts make the
/// diagonal parts of the two products equal exactly, so only the shears are
/// compared. `None` means nothing was found within the budget.
pub fn search_assum(sys: &MarkovFif, l_max: usize) -> Result<Option<AssumWitness>> {
    if l_max < 2 {
        return Err(Error::invalid("search length must be at least 2"));
    }
    let m = sys.m();
    let maps = sys.maps();
    let abs_maps: Vec<AffineMap2> = maps.iter().map(abs_map).collect();
    for len in 2..=l_max {
        let count = sys.sft().count_words(len);
        if count > DEFAULT_ENUMERATION_CAP {
            log::warn!("assumption search stopped at length {len}: {count} words exceed the enumeration cap");
            return Ok(None);
        }
        let mut groups: HashMap<(usize, usize, Vec<usize>), (Vec<usize>, f64)> = HashMap::new();
        for w in sys.sft().admissible_words(len) {
            let composed = w.iter().fold(AffineMap2::IDENTITY, |acc, &s| acc.compose(&maps[s - 1]));
            let magnitude = w.iter().fold(AffineMap2::IDENTITY, |acc, &s| acc.compose(&abs_maps[s - 1])).c;
            let key = (w[0], w[len - 1], abelianization(&w, m));
            match groups.get(&key) {
                None => {
                    groups.insert(key, (w.to_vec(), composed.c));
                }
                Some((omega, c0)) => {
                    if (composed.c - c0).abs() > SHEAR_REL_TOL * magnitude {
                        return Ok(Some(AssumWitness {
                            omega: omega.clone(),
                            tau: w.to_vec(),
                            length: len,
                            shear_omega: *c0,
                            shear_tau: composed.c,
                        }));
                    }
                }
            }
        }
    }
    Ok(None)
}

/// Exact collinearity of rational points.
pub fn collinear_exact(points: &[(Rational, Rational)]) -> bool {
    let n = points.len();
    if n < 2 {
        return true;
    }
    let (x0, y0) = &points[0];
    let (xm, ym) = &points[n - 1];
    points.iter().all(|(x, y)| (y - y0) * (xm - x0) == (ym - y0) * (x - x0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational;

    fn moran_fif_exact() -> (DataSet, VerticalScalings) {
        let r = |a, b| rational(a, b);
        let data = DataSet::from_rationals(vec![
            (r(0, 1), r(0, 1)),
            (r(1, 4), r(2, 3)),
            (r(1, 2), r(1, 4)),
            (r(1, 1), r(1, 1)),
        ])
        .unwrap();
        let alpha = VerticalScalings::from_rationals(vec![r(1, 3), r(-1, 2), r(1, 2)]).unwrap();
        (data, alpha)
    }

    #[test]
    fn collinearity() {
        assert!(check_collinear(&DataSet::new(vec![(0.0, 0.0), (0.5, 0.5), (1.0, 1.0)]).unwrap()));
        assert!(check_collinear(&DataSet::new(vec![(0.0, 0.0), (1.0 / 3.0, 0.0), (1.0, 0.0)]).unwrap()));
        let (data, _) = moran_fif_exact();
        assert!(!check_collinear(&data));
        let floats = DataSet::new(data.points().to_vec()).unwrap();
        assert!(!check_collinear(&floats));
        assert!(collinear_exact(&[
            (rational(0, 1), rational(1, 1)),
            (rational(1, 3), rational(2, 1)),
            (rational(1, 1), rational(4, 1)),
        ]));
    }

    #[test]
    fn moran_fif_quotients_exact() {
        let (data, alpha) = moran_fif_exact();
        let c = check_condfor_hd(&data, &alpha).unwrap();
        assert!(c.holds);
        assert_eq!(c.witness, Some((1, 2)));
        assert_eq!(c.parabolic, vec![3]);
        let ex = c.exact_quotients.unwrap();
        assert_eq!(ex[0], Some(rational(-4, 1)));
        assert_eq!(ex[1], Some(rational(1, 9)));
        assert_eq!(ex[2], None);
        assert!((c.quotients[0].unwrap() + 4.0).abs() < 1e-12);
        assert!((c.quotients[1].unwrap() - 1.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn collinear_data_fails_condition() {
        let data = DataSet::new(vec![(0.0, 0.0), (0.25, 0.25), (1.0, 1.0)]).unwrap();
        let alpha = VerticalScalings::uniform(0.6, 2).unwrap();
        let c = check_condfor_hd(&data, &alpha).unwrap();
        assert!(!c.holds);
        assert_eq!(c.witness, None);
    }

    #[test]
    fn equal_knot_data_reduces_to_increments() {
        let alpha = VerticalScalings::uniform(0.7, 3).unwrap();
        let flat = DataSet::new(vec![(0.0, 0.0), (1.0 / 3.0, 0.2), (2.0 / 3.0, 0.4), (1.0, 0.6)]).unwrap();
        assert!(!check_condfor_hd(&flat, &alpha).unwrap().holds);
        let bumpy = DataSet::new(vec![(0.0, 0.0), (1.0 / 3.0, 0.5), (2.0 / 3.0, 0.0), (1.0, 0.0)]).unwrap();
        assert!(check_condfor_hd(&bumpy, &alpha).unwrap().holds);
    }

    fn takagi(alpha: f64) -> MarkovFif {
        MarkovFif::full_shift(
            DataSet::new(vec![(0.0, 0.0), (0.5, 0.5), (1.0, 0.0)]).unwrap(),
            VerticalScalings::uniform(alpha, 2).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn takagi_witness_at_length_four() {
        let w = search_assum(&takagi(2.0 / 3.0), 6).unwrap().unwrap();
        assert_eq!(w.length, 4);
        assert_eq!(w.omega, vec![1, 1, 2, 1]);
        assert_eq!(w.tau, vec![1, 2, 1, 1]);
        assert!(search_assum(&takagi(2.0 / 3.0), 3).unwrap().is_none());
    }

    #[test]
    fn takagi_half_pair_coincides() {
        let sys = takagi(0.5);
        let shear = |w: &[usize]| w.iter().fold(AffineMap2::IDENTITY, |acc, &s| acc.compose(&sys.maps()[s - 1])).c;
        assert_eq!(shear(&[1, 1, 2, 1]), shear(&[1, 2, 1, 1]));
    }

    #[test]
    fn diagonal_maps_have_no_witness() {
        // Horizontal data gives zero shears.
        let sys = MarkovFif::full_shift(
            DataSet::new(vec![(0.0, 0.0), (0.4, 0.0), (1.0, 0.0)]).unwrap(),
            VerticalScalings::new(vec![0.7, -0.6]).unwrap(),
        )
        .unwrap();
        assert!(search_assum(&sys, 6).unwrap().is_none());
        assert!(search_assum(&sys, 1).is_err());
    }
}
