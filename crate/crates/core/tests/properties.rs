use fracdim::dimension::{moran_solve, spectral_dimension, stopping_time_cover, weighted_matrix};
use fracdim::graphs::{self_similarity_residual, DataSet, MarkovFif, Phi, SeriesSpec, VerticalScalings};
use proptest::prelude::*;

fn markov_fif() -> MarkovFif {
    MarkovFif::new(
        DataSet::new(vec![(0.0, 0.0), (0.2, 0.2), (2.0 / 3.0, 0.0), (1.0, 0.6)]).unwrap(),
        VerticalScalings::new(vec![2.0 / 3.0, -2.0 / 3.0, 2.0 / 3.0]).unwrap(),
        vec![1, 1, 0],
        vec![2, 3, 2],
    )
    .unwrap()
}

fn moran_fif() -> MarkovFif {
    MarkovFif::full_shift(
        DataSet::new(vec![(0.0, 0.0), (0.25, 2.0 / 3.0), (0.5, 0.25), (1.0, 1.0)]).unwrap(),
        VerticalScalings::new(vec![1.0 / 3.0, -0.5, 0.5]).unwrap(),
    )
    .unwrap()
}

fn series_systems() -> Vec<SeriesSpec> {
    let data = DataSet::new(vec![(0.0, 0.0), (1.0 / 3.0, 0.7), (2.0 / 3.0, -0.2), (1.0, 0.0)]).unwrap();
    vec![
        SeriesSpec::takagi(2.0 / 3.0).unwrap(),
        SeriesSpec::weierstrass(0.5, 3).unwrap(),
        SeriesSpec::new(Phi::Cosine, 0.8, 5).unwrap(),
        SeriesSpec::from_data(&data, 0.6).unwrap(),
    ]
}

/// Admissible word of the given length, steering each choice by `picks`.
fn steer(sys: &MarkovFif, first: usize, picks: &[usize]) -> Vec<usize> {
    let m = sys.m();
    let mut w = vec![1 + first % m];
    for &p in picks {
        let last = w[w.len() - 1];
        let next: Vec<usize> = (1..=m).filter(|&j| sys.sft().allows(last, j)).collect();
        w.push(next[p % next.len()]);
    }
    w
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn series_self_similarity(x in 0.0f64..1.0) {
        let eps = 1e-10;
        for spec in series_systems() {
            prop_assert!(self_similarity_residual(&spec, x, eps).unwrap() <= 3.0 * eps);
        }
    }

    #[test]
    fn conjugacy_on_admissible_words(first in 0usize..3, picks in prop::collection::vec(0usize..3, 14)) {
        for sys in [markov_fif(), moran_fif()] {
            let w = steer(&sys, first, &picks);
            let p = sys.natural_project(&w).unwrap().point;
            let q = sys.natural_project(&w[1..]).unwrap().point;
            let fp = sys.expanding_step(p).unwrap();
            prop_assert!((fp.0 - q.0).abs() <= 1e-9 && (fp.1 - q.1).abs() <= 1e-9, "{:?}: {:?} vs {:?}", w, fp, q);
        }
    }

    #[test]
    fn fif_values_follow_the_maps(i in 1usize..=3, x in 0.0f64..=1.0) {
        let sys = moran_fif();
        let y = sys.graph_eval(x, 1e-13).unwrap();
        let (u, v) = sys.apply_inverse(i, (x, y));
        prop_assert!((sys.graph_eval(u, 1e-13).unwrap() - v).abs() <= 1e-9);
    }
}

fn full_shift_strategy() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
    (2usize..=5).prop_flat_map(|m| {
        (
            prop::collection::vec(0.2f64..1.0, m),
            prop::collection::vec(-1.0f64..1.0, m + 1),
            prop::collection::vec(prop_oneof![-0.95f64..-0.05, 0.05f64..0.95], m),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn moran_matches_spectral_on_full_shifts((raw, ys, alpha) in full_shift_strategy()) {
        let total: f64 = raw.iter().sum();
        let mut x = 0.0;
        let mut pts = vec![(0.0, ys[0])];
        for (k, w) in raw.iter().enumerate() {
            x += w / total;
            pts.push((if k + 1 == raw.len() { 1.0 } else { x }, ys[k + 1]));
        }
        let data = DataSet::new(pts).unwrap();
        let widths = data.widths();
        let sys = MarkovFif::full_shift(data, VerticalScalings::new(alpha.clone()).unwrap()).unwrap();
        let abs: Vec<f64> = alpha.iter().map(|a| a.abs()).collect();
        let moran = moran_solve(&abs, &widths).unwrap();
        let spectral = spectral_dimension(&sys).unwrap();
        match (moran, spectral) {
            (Some(a), Some(b)) => prop_assert!((a - b).abs() <= 1e-9, "{} vs {}", a, b),
            (None, None) => {}
            other => prop_assert!(false, "branches disagree: {:?}", other),
        }
    }
}

#[test]
fn weighted_radius_strictly_decreasing() {
    for sys in [markov_fif(), moran_fif()] {
        let mut prev = f64::INFINITY;
        for k in 0..50 {
            let s = 1.0 + k as f64 / 49.0;
            let rho = weighted_matrix(&sys, s).unwrap().spectral_radius();
            assert!(rho < prev, "s = {s}");
            prev = rho;
        }
    }
}

#[test]
fn stopping_cover_slope_tracks_dimension() {
    let sys = markov_fif();
    let s = spectral_dimension(&sys).unwrap().unwrap();
    let (xs, ys): (Vec<f64>, Vec<f64>) = (6..=16)
        .map(|k| {
            let r = 2f64.powi(-k);
            let c = stopping_time_cover(&sys, r).unwrap();
            (-r.ln(), (c.count as f64).ln())
        })
        .unzip();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    assert!((slope - s).abs() < 0.1, "slope {slope}, s* {s}");
}

#[test]
fn interpolation_at_data_points() {
    for sys in [markov_fif(), moran_fif()] {
        for &(x, y) in sys.data().points() {
            assert!((sys.graph_eval(x, 1e-13).unwrap() - y).abs() <= 1e-9);
        }
    }
    let data = DataSet::new(vec![(0.0, 0.0), (1.0 / 3.0, 0.7), (2.0 / 3.0, -0.2), (1.0, 0.0)]).unwrap();
    let spec = SeriesSpec::from_data(&data, 0.6).unwrap();
    for &(x, y) in data.points() {
        let g = fracdim::graphs::eval_series(&spec, x, 1e-13).unwrap();
        assert!((g - y).abs() <= 1e-9, "x = {x}: {g} vs {y}");
    }
}
