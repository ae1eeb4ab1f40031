//! Cylinder intervals of the tent map itineraries.
//!
//! On a cylinder of depth `n` the map `B^n` is affine and increasing, and the
//! endpoints of its image are always `0`, `1`, `1/2` or an iterate of one of
//! the two one-sided critical values `beta/2` and `1 - beta/2`. Endpoints are
//! tracked by that label, so every decision about where `1/2` falls is taken
//! against a single computed critical orbit.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use super::tent;
use crate::error::{Error, Result};
use crate::symbolic::DEFAULT_ENUMERATION_CAP;

const SNAP_TOL: f64 = 1e-12;
const MAX_DEPTH: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum End {
    Zero,
    One,
    Half,
    /// `B^k(beta/2)`
    Upper(u32),
    /// `B^k(1 - beta/2)`
    Lower(u32),
}

struct Orbit {
    upper: Vec<f64>,
}

impl Orbit {
    fn new(beta: f64, len: usize) -> Self {
        let mut upper = vec![beta / 2.0];
        for _ in 0..len {
            let last = upper[upper.len() - 1];
            upper.push(tent(beta, last));
        }
        Orbit { upper }
    }

    fn value(&self, e: End) -> f64 {
        match e {
            End::Zero => 0.0,
            End::One => 1.0,
            End::Half => 0.5,
            End::Upper(k) => self.upper[k as usize],
            End::Lower(k) => 1.0 - self.upper[k as usize],
        }
    }

    fn snap(&self, e: End) -> End {
        let v = self.value(e);
        if (v - 0.5).abs() <= SNAP_TOL {
            End::Half
        } else if v.abs() <= SNAP_TOL {
            End::Zero
        } else if (v - 1.0).abs() <= SNAP_TOL {
            End::One
        } else {
            e
        }
    }

    /// Image of an endpoint under branch `left` (true) or right.
    fn next(&self, e: End, left: bool) -> End {
        match e {
            End::Zero => End::Zero,
            End::One => End::One,
            End::Half if left => self.snap(End::Upper(0)),
            End::Half => self.snap(End::Lower(0)),
            End::Upper(k) => self.snap(End::Upper(k + 1)),
            End::Lower(k) => self.snap(End::Lower(k + 1)),
        }
    }
}

enum Split {
    Left,
    Right,
    Both(f64),
}

fn classify(orbit: &Orbit, lo: End, hi: End) -> Split {
    if lo == End::Half {
        return Split::Right;
    }
    if hi == End::Half {
        return Split::Left;
    }
    let (a, b) = (orbit.value(lo), orbit.value(hi));
    if b <= 0.5 {
        Split::Left
    } else if a >= 0.5 {
        Split::Right
    } else {
        Split::Both((0.5 - a) / (b - a))
    }
}

/// A maximal interval of points sharing an itinerary of length `depth`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Leaf {
    pub lo: f64,
    pub hi: f64,
    /// Bit `k` is set when `B^k(x)` lies in `(1/2, 1]`.
    pub word: u64,
    #[serde(skip)]
    img: (End, End),
}

impl Leaf {
    /// The itinerary over `{1, 2}`.
    pub fn symbols(&self, depth: usize) -> Vec<usize> {
        (0..depth).map(|k| 1 + ((self.word >> k) & 1) as usize).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CylinderTree {
    pub beta: f64,
    pub depth: usize,
    pub leaves: Vec<Leaf>,
}

impl CylinderTree {
    pub fn words(&self) -> Vec<Vec<usize>> {
        self.leaves.iter().map(|l| l.symbols(self.depth)).collect()
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 1.0 && beta <= 2.0) {
        return Err(Error::invalid(format!("beta = {beta} must lie in (1,2]")));
    }
    Ok(())
}

/// Number of admissible itineraries of length `n`, counted on the labels of
/// the image endpoints (leaves with equal labels refine identically).
pub fn count_admissible(beta: f64, n: usize) -> Result<u128> {
    check_beta(beta)?;
    let orbit = Orbit::new(beta, n + 1);
    let mut states: HashMap<(End, End), u128> = HashMap::from([((End::Zero, End::One), 1)]);
    for _ in 0..n {
        let mut next: HashMap<(End, End), u128> = HashMap::new();
        for (&(lo, hi), &c) in &states {
            let mut add = |s: (End, End)| *next.entry(s).or_insert(0) += c;
            match classify(&orbit, lo, hi) {
                Split::Left => add((orbit.next(lo, true), orbit.next(hi, true))),
                Split::Right => add((orbit.next(lo, false), orbit.next(hi, false))),
                Split::Both(_) => {
                    add((orbit.next(lo, true), orbit.next(End::Half, true)));
                    add((orbit.next(End::Half, false), orbit.next(hi, false)));
                }
            }
        }
        states = next;
    }
    Ok(states.values().sum())
}

/// `log(count(n + 1) / count(n))`.
pub fn entropy_estimate(beta: f64, n: usize) -> Result<f64> {
    let a = count_admissible(beta, n)?;
    let b = count_admissible(beta, n + 1)?;
    Ok((b as f64 / a as f64).ln())
}

/// The cylinder intervals of depth `n`, ordered by left endpoint.
pub fn cylinder_tree(beta: f64, n: usize, cap: Option<u128>) -> Result<CylinderTree> {
    check_beta(beta)?;
    if n > MAX_DEPTH {
        return Err(Error::invalid(format!("depth {n} exceeds {MAX_DEPTH}")));
    }
    let cap = cap.unwrap_or(DEFAULT_ENUMERATION_CAP);
    let count = count_admissible(beta, n)?;
    if count > cap {
        return Err(Error::Budget {
            what: "cylinder leaves",
            needed: count,
            cap,
        });
    }
    let orbit = Orbit::new(beta, n + 1);
    let mut leaves = vec![Leaf {
        lo: 0.0,
        hi: 1.0,
        word: 0,
        img: (End::Zero, End::One),
    }];
    for k in 0..n {
        let bit = 1u64 << k;
        leaves = leaves
            .par_iter()
            .flat_map_iter(|leaf| {
                let (lo, hi) = leaf.img;
                let left = |a: f64, b: f64, img| Leaf { lo: a, hi: b, word: leaf.word, img };
                let right = |a: f64, b: f64, img| Leaf { lo: a, hi: b, word: leaf.word | bit, img };
                let out: Vec<Leaf> = match classify(&orbit, lo, hi) {
                    Split::Left => vec![left(leaf.lo, leaf.hi, (orbit.next(lo, true), orbit.next(hi, true)))],
                    Split::Right => vec![right(leaf.lo, leaf.hi, (orbit.next(lo, false), orbit.next(hi, false)))],
                    Split::Both(t) => {
                        let mid = leaf.lo + t * (leaf.hi - leaf.lo);
                        vec![
                            left(leaf.lo, mid, (orbit.next(lo, true), orbit.next(End::Half, true))),
                            right(mid, leaf.hi, (orbit.next(End::Half, false), orbit.next(hi, false))),
                        ]
                    }
                };
                out
            })
            .collect();
    }
    Ok(CylinderTree { beta, depth: n, leaves })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_tent_doubles() {
        for n in 0..=12 {
            assert_eq!(count_admissible(2.0, n).unwrap(), 1u128 << n);
        }
        let tree = cylinder_tree(2.0, 10, None).unwrap();
        assert_eq!(tree.leaves.len(), 1024);
        assert_eq!(entropy_estimate(2.0, 7).unwrap(), 2f64.ln());
    }

    #[test]
    fn tree_matches_count() {
        for beta in [1.3, 1.618033988749895, 1.78, 1.9] {
            for n in 1..=12 {
                let tree = cylinder_tree(beta, n, None).unwrap();
                assert_eq!(tree.leaves.len() as u128, count_admissible(beta, n).unwrap());
            }
        }
    }

    #[test]
    fn leaves_tile_and_shrink() {
        let beta = 1.78;
        let n = 14;
        let tree = cylinder_tree(beta, n, None).unwrap();
        assert_eq!(tree.leaves[0].lo, 0.0);
        assert_eq!(tree.leaves[tree.leaves.len() - 1].hi, 1.0);
        for w in tree.leaves.windows(2) {
            assert!((w[1].lo - w[0].hi).abs() <= 1e-12);
        }
        let bound = beta.powi(-(n as i32));
        for leaf in &tree.leaves {
            assert!(leaf.hi - leaf.lo <= bound * (1.0 + 1e-9));
        }
    }

    #[test]
    fn itineraries_hold_at_midpoints() {
        let beta = 1.78;
        let n = 12;
        let tree = cylinder_tree(beta, n, None).unwrap();
        for leaf in &tree.leaves {
            let mut x = 0.5 * (leaf.lo + leaf.hi);
            for (k, s) in leaf.symbols(n).into_iter().enumerate() {
                if (x - 0.5).abs() < 1e-9 {
                    break;
                }
                assert_eq!(s, if x <= 0.5 { 1 } else { 2 }, "step {k}");
                x = tent(beta, x);
            }
        }
    }

    #[test]
    fn counts_grow_at_most_twofold_and_entropy_converges() {
        let beta = 1.8;
        let mut prev = count_admissible(beta, 1).unwrap();
        for n in 2..=24 {
            let c = count_admissible(beta, n).unwrap();
            assert!(c <= 2 * prev);
            prev = c;
        }
        assert!((entropy_estimate(beta, 24).unwrap() - beta.ln()).abs() < 0.03);
    }

    #[test]
    fn budget_and_validation() {
        assert!(matches!(cylinder_tree(2.0, 20, Some(1000)), Err(Error::Budget { .. })));
        assert!(count_admissible(2.5, 3).is_err());
    }
}
