use serde::Serialize;

use super::affine::AffineMap2;
use crate::error::{Error, Result};
use crate::exact::{self, Rational};

/// Interpolation data `{(x_i, y_i)}` with `0 = x_0 < ... < x_m = 1`.
///
/// When built from rationals the exact values are kept alongside the floats so
/// that the algebraic condition checks can run without rounding.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DataSet {
    points: Vec<(f64, f64)>,
    #[serde(skip)]
    exact: Option<Vec<(Rational, Rational)>>,
}

impl DataSet {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::invalid("data set needs at least two points"));
        }
        if points.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
            return Err(Error::invalid("data set contains non-finite values"));
        }
        if points[0].0 != 0.0 {
            return Err(Error::invalid("x_0 must be 0"));
        }
        if points[points.len() - 1].0 != 1.0 {
            return Err(Error::invalid("x_m must be 1"));
        }
        if let Some(i) = points.windows(2).position(|w| w[1].0 <= w[0].0) {
            return Err(Error::invalid(format!("x must be strictly increasing (at index {})", i + 1)));
        }
        Ok(DataSet { points, exact: None })
    }

    pub fn from_rationals(points: Vec<(Rational, Rational)>) -> Result<Self> {
        let floats = points.iter().map(|(x, y)| (exact::to_f64(x), exact::to_f64(y))).collect();
        let mut data = DataSet::new(floats)?;
        data.exact = Some(points);
        Ok(data)
    }

    /// Number of intervals `m`.
    pub fn m(&self) -> usize {
        self.points.len() - 1
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn exact(&self) -> Option<&[(Rational, Rational)]> {
        self.exact.as_deref()
    }

    pub fn x(&self, i: usize) -> f64 {
        self.points[i].0
    }

    pub fn y(&self, i: usize) -> f64 {
        self.points[i].1
    }

    /// `x_i - x_{i-1}` for `i = 1..=m`.
    pub fn widths(&self) -> Vec<f64> {
        self.points.windows(2).map(|w| w[1].0 - w[0].0).collect()
    }

    pub fn is_equally_spaced(&self) -> bool {
        let m = self.m();
        match &self.exact {
            Some(ex) => ex
                .iter()
                .enumerate()
                .all(|(i, (x, _))| *x == exact::rational(i as i64, m as i64)),
            None => self
                .points
                .iter()
                .enumerate()
                .all(|(i, p)| (p.0 - i as f64 / m as f64).abs() <= 1e-12),
        }
    }
}

/// Vertical scaling factors `alpha_i` in `(-1, 1) \ {0}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerticalScalings {
    values: Vec<f64>,
    #[serde(skip)]
    exact: Option<Vec<Rational>>,
}

impl VerticalScalings {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("at least one vertical scaling is required"));
        }
        if let Some((i, a)) = values
            .iter()
            .enumerate()
            .find(|(_, a)| !a.is_finite() || **a == 0.0 || a.abs() >= 1.0)
        {
            return Err(Error::invalid(format!("alpha_{} = {a} is not in (-1,1)\\{{0}}", i + 1)));
        }
        Ok(VerticalScalings { values, exact: None })
    }

    pub fn from_rationals(values: Vec<Rational>) -> Result<Self> {
        let floats = values.iter().map(exact::to_f64).collect();
        let mut s = VerticalScalings::new(floats)?;
        s.exact = Some(values);
        Ok(s)
    }

    pub fn uniform(alpha: f64, m: usize) -> Result<Self> {
        VerticalScalings::new(vec![alpha; m])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn exact(&self) -> Option<&[Rational]> {
        self.exact.as_deref()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// The 1-periodic piecewise linear function built from equally spaced data:
/// on `[(i-1)/m, i/m)` it is `c_i (m x - (i-1)) + y_{i-1} - alpha y_0` with
/// `c_i = y_i - y_{i-1} - alpha (y_m - y_0)`. When `y_0 = y_m = 0` this is the
/// plain interpolant of the data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PiecewisePhi {
    ys: Vec<f64>,
    alpha: f64,
}

impl PiecewisePhi {
    pub fn m(&self) -> usize {
        self.ys.len() - 1
    }

    fn slope_coeff(&self, i: usize) -> f64 {
        let m = self.m();
        self.ys[i] - self.ys[i - 1] - self.alpha * (self.ys[m] - self.ys[0])
    }

    /// Segment index `i` (1-based) and local coordinate `m x - (i-1)`.
    fn locate(&self, x: f64) -> (usize, f64) {
        let m = self.m();
        let u = x - x.floor();
        let scaled = u * m as f64;
        let i = (scaled.floor() as usize).min(m - 1) + 1;
        (i, scaled - (i - 1) as f64)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (i, t) = self.locate(x);
        self.slope_coeff(i) * t + self.ys[i - 1] - self.alpha * self.ys[0]
    }

    /// Right derivative.
    pub fn derivative(&self, x: f64) -> f64 {
        let (i, _) = self.locate(x);
        self.m() as f64 * self.slope_coeff(i)
    }

    pub fn knots(&self) -> Vec<f64> {
        let m = self.m();
        (0..=m).map(|i| i as f64 / m as f64).collect()
    }
}

/// Builds the periodic piecewise linear `phi` for equally spaced data.
pub fn build_phi_from_data(data: &DataSet, alpha: f64) -> Result<PiecewisePhi> {
    if !data.is_equally_spaced() {
        return Err(Error::invalid("phi from data requires equally spaced knots x_i = i/m"));
    }
    Ok(PiecewisePhi {
        ys: data.points().iter().map(|p| p.1).collect(),
        alpha,
    })
}

/// The affine maps of the fractal interpolation function through `data`:
/// map `i` sends `(0, y_0)` to `(x_{i-1}, y_{i-1})` and `(1, y_m)` to `(x_i, y_i)`.
pub fn fif_maps(data: &DataSet, alpha: &VerticalScalings) -> Result<Vec<AffineMap2>> {
    let m = data.m();
    if alpha.len() != m {
        return Err(Error::invalid(format!(
            "expected {m} vertical scalings, got {}",
            alpha.len()
        )));
    }
    let (y0, ym) = (data.y(0), data.y(m));
    Ok((1..=m)
        .map(|i| {
            let al = alpha.values()[i - 1];
            AffineMap2 {
                a: data.x(i) - data.x(i - 1),
                c: data.y(i) - data.y(i - 1) - al * (ym - y0),
                d: al,
                tx: data.x(i - 1),
                ty: data.y(i - 1) - al * y0,
            }
        })
        .collect())
}
