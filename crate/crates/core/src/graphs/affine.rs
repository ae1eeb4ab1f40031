use serde::Serialize;

/// A planar affine map with lower triangular linear part:
/// `(x, y) -> (a x + tx, c x + d y + ty)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AffineMap2 {
    pub a: f64,
    pub c: f64,
    pub d: f64,
    pub tx: f64,
    pub ty: f64,
}

impl AffineMap2 {
    pub const IDENTITY: AffineMap2 = AffineMap2 {
        a: 1.0,
        c: 0.0,
        d: 1.0,
        tx: 0.0,
        ty: 0.0,
    };

    pub fn apply(&self, (x, y): (f64, f64)) -> (f64, f64) {
        (self.a * x + self.tx, self.c * x + self.d * y + self.ty)
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &AffineMap2) -> AffineMap2 {
        AffineMap2 {
            a: self.a * inner.a,
            c: self.c * inner.a + self.d * inner.c,
            d: self.d * inner.d,
            tx: self.a * inner.tx + self.tx,
            ty: self.c * inner.tx + self.d * inner.ty + self.ty,
        }
    }

    pub fn inverse(&self) -> Option<AffineMap2> {
        if self.a == 0.0 || self.d == 0.0 {
            return None;
        }
        let a = 1.0 / self.a;
        let d = 1.0 / self.d;
        let c = -self.c * a * d;
        Some(AffineMap2 {
            a,
            c,
            d,
            tx: -self.tx * a,
            ty: -(c * self.tx + d * self.ty),
        })
    }

    /// Unique fixed point of a map with `a != 1` and `d != 1`.
    pub fn fixed_point(&self) -> Option<(f64, f64)> {
        if self.a == 1.0 || self.d == 1.0 {
            return None;
        }
        let x = self.tx / (1.0 - self.a);
        let y = (self.c * x + self.ty) / (1.0 - self.d);
        Some((x, y))
    }

    /// Range of the y-coordinate over the box `[x0, x1] x [y0, y1]`.
    pub fn y_range(&self, (x0, x1): (f64, f64), (y0, y1): (f64, f64)) -> (f64, f64) {
        let cx = [self.c * x0, self.c * x1];
        let dy = [self.d * y0, self.d * y1];
        let lo = cx[0].min(cx[1]) + dy[0].min(dy[1]) + self.ty;
        let hi = cx[0].max(cx[1]) + dy[0].max(dy[1]) + self.ty;
        (lo, hi)
    }

    /// Corners of the image of the box `[x0, x1] x [y0, y1]`.
    pub fn box_image(&self, (x0, x1): (f64, f64), (y0, y1): (f64, f64)) -> [(f64, f64); 4] {
        [
            self.apply((x0, y0)),
            self.apply((x1, y0)),
            self.apply((x0, y1)),
            self.apply((x1, y1)),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> (AffineMap2, AffineMap2) {
        (
            AffineMap2 { a: 0.5, c: 0.3, d: -0.4, tx: 0.1, ty: 0.7 },
            AffineMap2 { a: 0.25, c: -1.0, d: 0.6, tx: 0.2, ty: -0.3 },
        )
    }

    #[test]
    fn compose_matches_sequential_application() {
        let (f, g) = sample();
        let fg = f.compose(&g);
        for p in [(0.0, 0.0), (0.3, -1.2), (1.0, 2.0)] {
            let a = fg.apply(p);
            let b = f.apply(g.apply(p));
            assert!((a.0 - b.0).abs() < 1e-15 && (a.1 - b.1).abs() < 1e-15);
        }
    }

    #[test]
    fn inverse_roundtrip() {
        let (f, _) = sample();
        let inv = f.inverse().unwrap();
        let p = inv.compose(&f).apply((0.37, -0.81));
        assert!((p.0 - 0.37).abs() < 1e-14 && (p.1 + 0.81).abs() < 1e-14);
    }

    #[test]
    fn fixed_point_is_fixed() {
        let (f, _) = sample();
        let p = f.fixed_point().unwrap();
        let q = f.apply(p);
        assert!((p.0 - q.0).abs() < 1e-15 && (p.1 - q.1).abs() < 1e-15);
    }

    #[test]
    fn y_range_covers_corners() {
        let (f, _) = sample();
        let (lo, hi) = f.y_range((0.0, 1.0), (-1.0, 2.0));
        for (_, y) in f.box_image((0.0, 1.0), (-1.0, 2.0)) {
            assert!(y >= lo - 1e-15 && y <= hi + 1e-15);
        }
    }
}
