//! Empirical box counting on sampled point sets.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative drop in the count from full to half sample below which a scale
/// counts as saturated.
pub const SATURATION_TOL: f64 = 0.01;
const MIN_SCALES: usize = 4;

/// `2^-6, 2^-7, ..., 2^-14`.
pub fn default_scales() -> Vec<f64> {
    (6..=14).map(|k| 2f64.powi(-k)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridCount {
    pub eps: f64,
    pub n: u64,
}

struct Frame {
    x0: f64,
    xs: f64,
    y0: f64,
    ys: f64,
}

impl Frame {
    /// Affine map of the bounding box onto the unit square, per axis; a
    /// degenerate axis is left unscaled.
    fn of(points: &[(f64, f64)]) -> Result<Frame> {
        if points.is_empty() {
            return Err(Error::invalid("point set is empty"));
        }
        if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::invalid("point set contains a non-finite coordinate"));
        }
        let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for &(x, y) in points {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        let span = |a: f64, b: f64| if b > a { b - a } else { 1.0 };
        Ok(Frame {
            x0,
            xs: span(x0, x1),
            y0,
            ys: span(y0, y1),
        })
    }
}

fn cell(v: f64, eps: f64) -> u64 {
    let t = v / eps;
    let f = t.floor();
    // points on a cell boundary go to the lower cell
    if f == t && f > 0.0 {
        f as u64 - 1
    } else {
        f as u64
    }
}

fn count_in_frame(points: &[(f64, f64)], frame: &Frame, eps: f64) -> u64 {
    let side = (1.0 / eps).ceil() as u64 + 1;
    let mut keys: Vec<u64> = points
        .par_iter()
        .map(|&(x, y)| {
            let cx = cell((x - frame.x0) / frame.xs, eps);
            let cy = cell((y - frame.y0) / frame.ys, eps);
            cx * side + cy
        })
        .collect();
    keys.par_sort_unstable();
    keys.dedup();
    keys.len() as u64
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::invalid(format!("scale {eps} must lie in (0,1]")));
    }
    Ok(())
}

/// Number of `eps`-cells hit after rescaling the bounding box of the points
/// to the unit square.
pub fn grid_count(points: &[(f64, f64)], eps: f64) -> Result<GridCount> {
    check_eps(eps)?;
    let frame = Frame::of(points)?;
    Ok(GridCount {
        eps,
        n: count_in_frame(points, &frame, eps),
    })
}

/// Number of `eps`-cells met by the polyline through the points taken in
/// order of increasing `x`, in the same rescaled frame as [`grid_count`].
/// For samples of a continuous graph this is the column-oscillation count and
/// saturates at far smaller sample sizes than the count of hit cells.
pub fn polyline_count(points: &[(f64, f64)], eps: f64) -> Result<GridCount> {
    check_eps(eps)?;
    let frame = Frame::of(points)?;
    let sorted = sorted_by_x(points);
    Ok(GridCount {
        eps,
        n: polyline_in_frame(&sorted, &frame, eps),
    })
}

fn sorted_by_x(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut v = points.to_vec();
    if !v.windows(2).all(|w| w[0].0 <= w[1].0) {
        v.par_sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    }
    v
}

fn polyline_in_frame(points: &[(f64, f64)], frame: &Frame, eps: f64) -> u64 {
    let cols = (1.0 / eps).ceil() as usize + 1;
    let unit: Vec<(f64, f64)> = points
        .iter()
        .map(|&(x, y)| ((x - frame.x0) / frame.xs, (y - frame.y0) / frame.ys))
        .collect();
    let empty = || vec![(f64::INFINITY, f64::NEG_INFINITY); cols];
    let merge = |mut a: Vec<(f64, f64)>, b: Vec<(f64, f64)>| {
        for (u, v) in a.iter_mut().zip(b) {
            u.0 = u.0.min(v.0);
            u.1 = u.1.max(v.1);
        }
        a
    };
    let ranges = unit
        .par_windows(2)
        .fold(empty, |mut acc, w| {
            let ((x0, y0), (x1, y1)) = (w[0], w[1]);
            let (c0, c1) = (cell(x0, eps) as usize, cell(x1, eps) as usize);
            let at = |x: f64| if x1 > x0 { y0 + (y1 - y0) * (x - x0) / (x1 - x0) } else { y1 };
            for c in c0..=c1 {
                let a = if c == c0 { y0 } else { at(c as f64 * eps) };
                let b = if c == c1 { y1 } else { at((c + 1) as f64 * eps) };
                let r = &mut acc[c];
                r.0 = r.0.min(a.min(b));
                r.1 = r.1.max(a.max(b));
            }
            acc
        })
        .reduce(empty, merge);
    let single = unit.len() == 1;
    let mut n = 0;
    for (c, &(lo, hi)) in ranges.iter().enumerate() {
        if lo < hi {
            // a range resting on a cell boundary does not enter the cell below
            n += cell(hi, eps) - (lo / eps).floor() as u64 + 1;
        } else if lo == hi {
            n += 1;
        } else if single && c == cell(unit[0].0, eps) as usize {
            n += 1;
        }
    }
    n
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    pub scales: Vec<f64>,
}

/// Least-squares line through `(log 1/eps, log N)`.
pub fn dimension_fit(counts: &[GridCount]) -> Result<FitResult> {
    if counts.len() < MIN_SCALES {
        return Err(Error::invalid(format!("need at least {MIN_SCALES} scales, got {}", counts.len())));
    }
    let mut eps: Vec<f64> = counts.iter().map(|c| c.eps).collect();
    eps.sort_by(f64::total_cmp);
    if eps.windows(2).any(|w| (w[1] - w[0]).abs() <= 1e-12 * w[1]) {
        return Err(Error::invalid("scales must be distinct"));
    }
    if let Some(c) = counts.iter().find(|c| c.n == 0) {
        return Err(Error::invalid(format!("empty count at scale {}", c.eps)));
    }
    let xs: Vec<f64> = counts.iter().map(|c| -c.eps.ln()).collect();
    let ys: Vec<f64> = counts.iter().map(|c| (c.n as f64).ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let stderr = (ssr / (k - 2.0) / sxx).sqrt();
    Ok(FitResult {
        slope,
        intercept,
        stderr,
        scales: counts.iter().map(|c| c.eps).collect(),
    })
}

/// Counts on the full sample and on every other point of it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Saturation {
    pub eps: f64,
    pub full: u64,
    pub half: u64,
    pub saturated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxEstimate {
    pub fit: FitResult,
    pub counts: Vec<GridCount>,
    pub saturation: Vec<Saturation>,
    /// Scales left out of the fit for lack of saturation.
    pub dropped: Vec<f64>,
    /// Every scale used in the fit is saturated.
    pub saturated: bool,
}

/// How a sample is turned into a cell count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Counting {
    /// Cells containing a sample point ([`grid_count`]).
    Cells,
    /// Cells met by the polyline through the samples ([`polyline_count`]).
    #[default]
    Polyline,
}

/// Counts at each scale with the saturation diagnostic, then fits. When some
/// scale is saturated, unsaturated scales are trimmed from either end of the
/// range while more than the minimum number of scales remain; when none is,
/// every scale is kept and the estimate is flagged.
pub fn estimate(points: &[(f64, f64)], scales: &[f64], counting: Counting) -> Result<BoxEstimate> {
    for &e in scales {
        check_eps(e)?;
    }
    let frame = Frame::of(points)?;
    let sorted;
    let points = match counting {
        Counting::Cells => points,
        Counting::Polyline => {
            sorted = sorted_by_x(points);
            &sorted[..]
        }
    };
    let half: Vec<(f64, f64)> = points.iter().step_by(2).copied().collect();
    let count = |pts: &[(f64, f64)], eps| match counting {
        Counting::Cells => count_in_frame(pts, &frame, eps),
        Counting::Polyline => polyline_in_frame(pts, &frame, eps),
    };
    let mut scales = scales.to_vec();
    scales.sort_by(|a, b| b.total_cmp(a));
    let saturation: Vec<Saturation> = scales
        .iter()
        .map(|&eps| {
            let full = count(points, eps);
            let h = count(&half, eps);
            Saturation {
                eps,
                full,
                half: h,
                saturated: full.abs_diff(h) as f64 <= SATURATION_TOL * full as f64,
            }
        })
        .collect();
    let (mut lo, mut hi) = (0, saturation.len());
    if saturation.iter().any(|s| s.saturated) {
        while hi - lo > MIN_SCALES {
            if !saturation[hi - 1].saturated {
                hi -= 1;
            } else if !saturation[lo].saturated {
                lo += 1;
            } else {
                break;
            }
        }
    }
    let kept = &saturation[lo..hi];
    let counts: Vec<GridCount> = kept.iter().map(|s| GridCount { eps: s.eps, n: s.full }).collect();
    let dropped = saturation[..lo].iter().chain(&saturation[hi..]).map(|s| s.eps).collect();
    Ok(BoxEstimate {
        fit: dimension_fit(&counts)?,
        saturated: kept.iter().all(|s| s.saturated),
        counts,
        saturation,
        dropped,
    })
}
