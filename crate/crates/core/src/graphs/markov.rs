use rayon::prelude::*;
use serde::Serialize;

use super::affine::AffineMap2;
use super::data::{DataSet, VerticalScalings};
use crate::error::{Error, Result};
use crate::symbolic::Sft;

/// A Markovian fractal interpolation system.
///
/// Interval `i` (1-based) is `[x_{i-1}, x_i]`; the base map stretches it
/// affinely onto `[x_{l(i)}, x_{r(i)}]` and the fiber map is
/// `g_i(x, y) = y / alpha_i + a_i x + t_i`.
#[derive(Debug, Clone, Serialize)]
pub struct MarkovFif {
    data: DataSet,
    alpha: VerticalScalings,
    left: Vec<usize>,
    right: Vec<usize>,
    gamma: Vec<f64>,
    a: Vec<f64>,
    t: Vec<f64>,
    maps: Vec<AffineMap2>,
    #[serde(skip)]
    sft: Sft,
    bounds: (f64, f64),
}

/// A point of the graph together with the diameter of the cylinder it represents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub point: (f64, f64),
    pub diameter: f64,
}

impl MarkovFif {
    /// `left[i-1] = l(i)` and `right[i-1] = r(i)` with `0 <= l(i) < r(i) <= m`.
    pub fn new(data: DataSet, alpha: VerticalScalings, left: Vec<usize>, right: Vec<usize>) -> Result<Self> {
        let m = data.m();
        if alpha.len() != m || left.len() != m || right.len() != m {
            return Err(Error::invalid(format!(
                "expected {m} entries in alpha, left and right; got {}, {}, {}",
                alpha.len(),
                left.len(),
                right.len()
            )));
        }
        for i in 0..m {
            if !(left[i] < right[i] && right[i] <= m) {
                return Err(Error::invalid(format!(
                    "interval {} maps onto [x_{}, x_{}], need 0 <= l < r <= {m}",
                    i + 1,
                    left[i],
                    right[i]
                )));
            }
        }
        let widths = data.widths();
        let gamma: Vec<f64> = (0..m).map(|i| (data.x(right[i]) - data.x(left[i])) / widths[i]).collect();
        if let Some(i) = gamma.iter().position(|&g| g <= 1.0) {
            return Err(Error::invalid(format!(
                "not expanding: gamma_{} = {} <= 1",
                i + 1,
                gamma[i]
            )));
        }
        let mut a = Vec::with_capacity(m);
        let mut t = Vec::with_capacity(m);
        let mut maps = Vec::with_capacity(m);
        for i in 0..m {
            let al = alpha.values()[i];
            let (yl, yr) = (data.y(left[i]), data.y(right[i]));
            let ai = (yr - yl - (data.y(i + 1) - data.y(i)) / al) / widths[i];
            let ti = yl - data.y(i) / al - ai * data.x(i);
            let tx = data.x(i) - data.x(left[i]) / gamma[i];
            maps.push(AffineMap2 {
                a: 1.0 / gamma[i],
                c: -al * ai / gamma[i],
                d: al,
                tx,
                ty: -al * (ai * tx + ti),
            });
            a.push(ai);
            t.push(ti);
        }
        let adjacency = (0..m)
            .map(|i| (1..=m).map(|j| u8::from(left[i] < j && j <= right[i])).collect())
            .collect();
        let sft = Sft::new(adjacency)?;
        let mut sys = MarkovFif {
            data,
            alpha,
            left,
            right,
            gamma,
            a,
            t,
            maps,
            sft,
            bounds: (0.0, 0.0),
        };
        sys.bounds = sys.compute_bounds();
        Ok(sys)
    }

    /// The ordinary fractal interpolation system: every interval maps onto `[0, 1]`.
    pub fn full_shift(data: DataSet, alpha: VerticalScalings) -> Result<Self> {
        let m = data.m();
        MarkovFif::new(data, alpha, vec![0; m], vec![m; m])
    }

    pub fn m(&self) -> usize {
        self.data.m()
    }

    pub fn data(&self) -> &DataSet {
        &self.data
    }

    pub fn alpha(&self) -> &VerticalScalings {
        &self.alpha
    }

    pub fn left(&self) -> &[usize] {
        &self.left
    }

    pub fn right(&self) -> &[usize] {
        &self.right
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn fiber_slopes(&self) -> &[f64] {
        &self.a
    }

    pub fn fiber_offsets(&self) -> &[f64] {
        &self.t
    }

    /// Local inverses `F~_i`, indexed from 0.
    pub fn maps(&self) -> &[AffineMap2] {
        &self.maps
    }

    pub fn sft(&self) -> &Sft {
        &self.sft
    }

    pub fn is_full_shift(&self) -> bool {
        self.sft.is_full()
    }

    /// The interval `D` with `F~_i([x_l, x_r] x D) ⊆ [0,1] x D` for all `i`.
    pub fn bounding_interval(&self) -> (f64, f64) {
        self.bounds
    }

    /// Domain `[x_{l(i)}, x_{r(i)}]` of the local inverse `i` (1-based).
    pub fn domain(&self, i: usize) -> (f64, f64) {
        (self.data.x(self.left[i - 1]), self.data.x(self.right[i - 1]))
    }

    /// Fiber map `g_i` (1-based).
    pub fn fiber(&self, i: usize, (x, y): (f64, f64)) -> f64 {
        y / self.alpha.values()[i - 1] + self.a[i - 1] * x + self.t[i - 1]
    }

    /// Base map branch `f_i` (1-based).
    pub fn base(&self, i: usize, x: f64) -> f64 {
        self.gamma[i - 1] * (x - self.data.x(i - 1)) + self.data.x(self.left[i - 1])
    }

    /// Applies `F~_i` (1-based). The x coordinate is computed from the knots
    /// directly so that endpoints land exactly on knots.
    pub fn apply_inverse(&self, i: usize, (u, v): (f64, f64)) -> (f64, f64) {
        let (lo, hi) = self.domain(i);
        let x = self.data.x(i - 1) + (u - lo) * ((self.data.x(i) - self.data.x(i - 1)) / (hi - lo));
        let map = &self.maps[i - 1];
        (x, map.c * u + map.d * v + map.ty)
    }

    fn invariance_excess(&self, (lo, hi): (f64, f64)) -> (f64, f64) {
        let mut new = (lo, hi);
        for i in 1..=self.m() {
            let (a, b) = self.maps[i - 1].y_range(self.domain(i), (lo, hi));
            new = (new.0.min(a), new.1.max(b));
        }
        new
    }

    fn compute_bounds(&self) -> (f64, f64) {
        let ys = self.data.points().iter().map(|p| p.1);
        let mut d = ys.clone().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| (a.min(y), b.max(y)));
        let contraction = self.alpha.values().iter().fold(0.0f64, |acc, a| acc.max(a.abs()));
        // The growth per step shrinks geometrically, so stop once the remaining
        // tail step / (1 - contraction) is negligible.
        for _ in 0..100_000 {
            let next = self.invariance_excess(d);
            let step = (d.0 - next.0).max(next.1 - d.1);
            d = next;
            if step / (1.0 - contraction) <= 1e-13 {
                break;
            }
        }
        d
    }

    /// How far the images of `[x_l, x_r] x D` stick out of `D`.
    pub fn invariance_residual(&self) -> f64 {
        let d = self.bounds;
        let next = self.invariance_excess(d);
        (d.0 - next.0).max(next.1 - d.1).max(0.0)
    }

    /// `F~_{w_1} o ... o F~_{w_n}` applied to the left endpoint of the last domain.
    pub fn natural_project(&self, w: &[usize]) -> Result<Projection> {
        if w.is_empty() || w.iter().any(|&s| s == 0 || s > self.m()) {
            return Err(Error::invalid("word must be nonempty over 1..=m"));
        }
        if !self.sft.is_admissible(w) {
            return Err(Error::invalid(format!("word {w:?} is not admissible")));
        }
        Ok(self.project_unchecked(w))
    }

    fn project_unchecked(&self, w: &[usize]) -> Projection {
        let last = w[w.len() - 1];
        let l = self.left[last - 1];
        let mut p = (self.data.x(l), self.data.y(l));
        for &s in w.iter().rev() {
            p = self.apply_inverse(s, p);
        }
        Projection {
            point: p,
            diameter: self.cylinder_diameter(w),
        }
    }

    /// Diameter of `F~_w([x_l, x_r] x D)`.
    pub fn cylinder_diameter(&self, w: &[usize]) -> f64 {
        let composed = w.iter().fold(AffineMap2::IDENTITY, |acc, &s| acc.compose(&self.maps[s - 1]));
        let last = w[w.len() - 1];
        let corners = composed.box_image(self.domain(last), self.bounds);
        let mut diam = 0.0f64;
        for p in &corners {
            for q in &corners {
                diam = diam.max(((p.0 - q.0).powi(2) + (p.1 - q.1).powi(2)).sqrt());
            }
        }
        diam
    }

    /// Branch index (1-based) for `x` with the left-closed convention
    /// `x in [x_{i-1}, x_i)`, the last interval closed.
    pub fn branch(&self, x: f64) -> Result<usize> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::invalid(format!("x = {x} outside [0,1]")));
        }
        let m = self.m();
        let pts = self.data.points();
        // first knot strictly greater than x
        let idx = pts.partition_point(|p| p.0 <= x);
        Ok(idx.clamp(1, m))
    }

    /// One step of the expanding dynamics `F = (f_i, g_i)`.
    pub fn expanding_step(&self, (x, y): (f64, f64)) -> Result<(f64, f64)> {
        let i = self.branch(x)?;
        Ok((self.base(i, x).clamp(0.0, 1.0), self.fiber(i, (x, y))))
    }

    /// Graph value from the orbit of `x` under the base map:
    /// `G(x) = alpha_i (G(f_i x) - a_i x - t_i)`, stopping at knots or once the
    /// accumulated factor times `|D|` is below `eps`.
    pub fn graph_eval(&self, x: f64, eps: f64) -> Result<f64> {
        if !(eps > 0.0) {
            return Err(Error::invalid("tolerance must be positive"));
        }
        let (dlo, dhi) = self.bounds;
        let mut u = x;
        let mut factor = 1.0;
        let mut offset = 0.0;
        for _ in 0..10_000 {
            if let Some(k) = self.data.points().iter().position(|p| p.0 == u) {
                return Ok(offset + factor * self.data.y(k));
            }
            if factor.abs() * (dhi - dlo) <= eps {
                break;
            }
            let i = self.branch(u)?;
            let al = self.alpha.values()[i - 1];
            offset -= factor * al * (self.a[i - 1] * u + self.t[i - 1]);
            factor *= al;
            u = self.base(i, u).clamp(0.0, 1.0);
        }
        Ok(offset + factor * 0.5 * (dlo + dhi))
    }

    /// One graph point per admissible word of length `depth`, in
    /// lexicographic word order.
    pub fn sample_graph(&self, depth: usize, cap: u128) -> Result<Vec<(f64, f64)>> {
        if depth == 0 {
            return Err(Error::invalid("depth must be at least 1"));
        }
        let count = self.sft.count_words(depth);
        if count > cap {
            return Err(Error::Budget {
                what: "graph sample points",
                needed: count,
                cap,
            });
        }
        let m = self.m();
        // level[j] holds the points of words starting with symbol j+1, in order.
        let mut level: Vec<Vec<(f64, f64)>> = (1..=m)
            .map(|i| {
                let l = self.left[i - 1];
                vec![self.apply_inverse(i, (self.data.x(l), self.data.y(l)))]
            })
            .collect();
        for _ in 1..depth {
            level = (1..=m)
                .into_par_iter()
                .map(|i| {
                    let mut out = Vec::new();
                    for j in 1..=m {
                        if self.sft.allows(i, j) {
                            out.extend(level[j - 1].iter().map(|&p| self.apply_inverse(i, p)));
                        }
                    }
                    out
                })
                .collect();
        }
        Ok(level.into_iter().flatten().collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn markov_fif() -> MarkovFif {
        let data = DataSet::new(vec![(0.0, 0.0), (0.2, 0.2), (2.0 / 3.0, 0.0), (1.0, 0.6)]).unwrap();
        let alpha = VerticalScalings::new(vec![2.0 / 3.0, -2.0 / 3.0, 2.0 / 3.0]).unwrap();
        MarkovFif::new(data, alpha, vec![1, 1, 0], vec![2, 3, 2]).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn markov_fif_derived_quantities() {
        let sys = markov_fif();
        let adj: Vec<Vec<u8>> = vec![vec![0, 1, 0], vec![0, 1, 1], vec![1, 1, 0]];
        assert_eq!(sys.sft().adjacency(), &adj[..]);
        for (g, want) in sys.gamma().iter().zip([7.0 / 3.0, 12.0 / 7.0, 2.0]) {
            assert!(close(*g, want, 1e-14));
        }
        assert!(close(sys.fiber_slopes()[0], -2.5, 1e-14));
        assert!(close(sys.fiber_offsets()[0], 0.2, 1e-14));
        assert!(close(sys.fiber(1, (0.0, 0.0)), 0.2, 1e-14));
        assert!(close(sys.fiber(1, (0.2, 0.2)), 0.0, 1e-14));
    }

    #[test]
    fn fiber_constraints_hold() {
        let sys = markov_fif();
        let d = sys.data();
        for i in 1..=3 {
            let (l, r) = (sys.left()[i - 1], sys.right()[i - 1]);
            assert!(close(sys.fiber(i, d.points()[i - 1]), d.y(l), 1e-12));
            assert!(close(sys.fiber(i, d.points()[i]), d.y(r), 1e-12));
        }
    }

    #[test]
    fn full_shift_inverses_match_fif_maps() {
        let data = DataSet::new(vec![(0.0, 0.0), (0.25, 2.0 / 3.0), (0.5, 0.25), (1.0, 1.0)]).unwrap();
        let alpha = VerticalScalings::new(vec![1.0 / 3.0, -0.5, 0.5]).unwrap();
        let sys = MarkovFif::full_shift(data.clone(), alpha.clone()).unwrap();
        let fif = super::super::data::fif_maps(&data, &alpha).unwrap();
        for (a, b) in sys.maps().iter().zip(&fif) {
            for (u, v) in [(a.a, b.a), (a.c, b.c), (a.d, b.d), (a.tx, b.tx), (a.ty, b.ty)] {
                assert!(close(u, v, 1e-14));
            }
        }
    }

    #[test]
    fn rejects_non_expanding() {
        let data = DataSet::new(vec![(0.0, 0.0), (0.5, 0.5), (1.0, 0.0)]).unwrap();
        let alpha = VerticalScalings::uniform(0.5, 2).unwrap();
        assert!(MarkovFif::new(data.clone(), alpha.clone(), vec![0, 1], vec![1, 2]).is_err());
        assert!(MarkovFif::new(data, alpha, vec![1, 0], vec![1, 2]).is_err());
    }

    #[test]
    fn bounding_interval_is_invariant() {
        let sys = markov_fif();
        assert!(sys.invariance_residual() <= 1e-10);
        let (lo, hi) = sys.bounding_interval();
        assert!(lo <= 0.0 && hi >= 0.6);
        let line = MarkovFif::full_shift(
            DataSet::new(vec![(0.0, 0.0), (0.5, 0.5), (1.0, 1.0)]).unwrap(),
            VerticalScalings::uniform(0.1, 2).unwrap(),
        )
        .unwrap();
        let (lo, hi) = line.bounding_interval();
        assert!(close(lo, 0.0, 1e-12) && close(hi, 1.0, 1e-12));
    }

    #[test]
    fn constant_words_converge_to_fixed_points() {
        let sys = markov_fif();
        let fixed = sys.maps()[1].fixed_point().unwrap();
        let p = sys.natural_project(&[2; 60]).unwrap();
        assert!(close(p.point.0, fixed.0, 1e-12) && close(p.point.1, fixed.1, 1e-12));
        assert!(p.diameter < 1e-9);
        assert!(sys.natural_project(&[1, 1]).is_err());
    }

    #[test]
    fn conjugacy_and_graph_values() {
        let sys = markov_fif();
        let words = sys.sft().admissible_words(12);
        for w in words.iter().step_by(7) {
            let p = sys.natural_project(w).unwrap().point;
            let q = sys.natural_project(&w[1..]).unwrap().point;
            let fp = sys.expanding_step(p).unwrap();
            assert!(close(fp.0, q.0, 1e-9) && close(fp.1, q.1, 1e-9), "{w:?}");
        }
    }

    #[test]
    fn graph_eval_interpolates() {
        let sys = markov_fif();
        for (x, y) in sys.data().points().to_vec() {
            assert_eq!(sys.graph_eval(x, 1e-12).unwrap(), y);
        }
    }

    #[test]
    fn sample_graph_counts_and_order() {
        let sys = markov_fif();
        let pts = sys.sample_graph(3, 1000).unwrap();
        assert_eq!(pts.len(), 9);
        let words = sys.sft().admissible_words(3);
        for (w, p) in words.iter().zip(&pts) {
            let q = sys.natural_project(w).unwrap().point;
            assert_eq!(*p, q);
        }
        assert!(sys.sample_graph(40, 1000).is_err());
        let full = MarkovFif::full_shift(
            DataSet::new(vec![(0.0, 0.0), (0.5, 0.5), (1.0, 0.0)]).unwrap(),
            VerticalScalings::uniform(0.6, 2).unwrap(),
        )
        .unwrap();
        assert_eq!(full.sample_graph(10, 1 << 20).unwrap().len(), 1024);
    }

    #[test]
    fn escape_off_graph() {
        let sys = markov_fif();
        let x = 0.37;
        let y = sys.graph_eval(x, 1e-13).unwrap() + 0.1;
        let (lo, hi) = sys.bounding_interval();
        let mut p = (x, y);
        let mut escaped = false;
        for _ in 0..100 {
            p = sys.expanding_step(p).unwrap();
            if p.1 < lo - 1e-9 || p.1 > hi + 1e-9 {
                escaped = true;
                break;
            }
        }
        assert!(escaped);
    }
}
