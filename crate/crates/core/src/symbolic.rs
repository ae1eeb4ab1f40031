//! Words over a finite alphabet, subshifts of finite type and the n-Bernoulli
//! approximation of shift-invariant measures.
//!
//! Symbols are 1-based throughout (`1..=m`), matching the indexing of the
//! interpolation data and of the adjacency matrices built from it.

use std::fmt;
use std::ops::Deref;

use serde::Serialize;

use crate::error::{Error, Result};

/// Default cap on enumerations that grow exponentially with word length.
pub const DEFAULT_ENUMERATION_CAP: u128 = 1 << 24;

/// A nonempty finite word over `{1..m}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Word(Vec<usize>);

impl Word {
    pub fn new(symbols: Vec<usize>, m: usize) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::invalid("words must be nonempty"));
        }
        if let Some(&s) = symbols.iter().find(|&&s| s == 0 || s > m) {
            return Err(Error::invalid(format!("symbol {s} outside 1..={m}")));
        }
        Ok(Word(symbols))
    }

    pub fn symbols(&self) -> &[usize] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<usize> {
        self.0
    }
}

impl Deref for Word {
    type Target = [usize];

    fn deref(&self) -> &[usize] {
        &self.0
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|s| s.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Count vector of a word: entry `i-1` is the number of occurrences of `i`.
pub fn abelianization(w: &[usize], m: usize) -> Vec<usize> {
    let mut counts = vec![0; m];
    for &s in w {
        counts[s - 1] += 1;
    }
    counts
}

/// Irreducibility and aperiodicity of an adjacency matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Primitivity {
    pub irreducible: bool,
    pub aperiodic: bool,
    /// Smallest `k <= m^2` with every entry of `A^k` positive.
    pub witness_power: Option<usize>,
}

/// A one-sided subshift of finite type given by a 0/1 adjacency matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Sft {
    m: usize,
    adjacency: Vec<Vec<u8>>,
}

impl Sft {
    pub fn new(adjacency: Vec<Vec<u8>>) -> Result<Self> {
        let m = adjacency.len();
        if m == 0 {
            return Err(Error::invalid("adjacency matrix must be at least 1x1"));
        }
        for (i, row) in adjacency.iter().enumerate() {
            if row.len() != m {
                return Err(Error::invalid(format!("adjacency row {} has length {}, expected {m}", i + 1, row.len())));
            }
            if row.iter().any(|&e| e > 1) {
                return Err(Error::invalid(format!("adjacency row {} has entries outside {{0,1}}", i + 1)));
            }
        }
        Ok(Sft { m, adjacency })
    }

    /// The full shift on `m` symbols.
    pub fn full(m: usize) -> Result<Self> {
        Sft::new(vec![vec![1; m]; m])
    }

    pub fn alphabet_size(&self) -> usize {
        self.m
    }

    pub fn adjacency(&self) -> &[Vec<u8>] {
        &self.adjacency
    }

    /// Whether `i -> j` is allowed (1-based).
    pub fn allows(&self, i: usize, j: usize) -> bool {
        self.adjacency[i - 1][j - 1] == 1
    }

    pub fn is_full(&self) -> bool {
        self.adjacency.iter().all(|row| row.iter().all(|&e| e == 1))
    }

    pub fn is_admissible(&self, w: &[usize]) -> bool {
        w.iter().all(|&s| s >= 1 && s <= self.m) && w.windows(2).all(|p| self.allows(p[0], p[1]))
    }

    pub fn out_degree(&self, i: usize) -> usize {
        self.adjacency[i - 1].iter().filter(|&&e| e == 1).count()
    }

    /// Number of admissible words of length `len`, i.e. the entry sum of `A^(len-1)`.
    pub fn count_words(&self, len: usize) -> u128 {
        if len == 0 {
            return 0;
        }
        let mut ends = vec![1u128; self.m];
        for _ in 1..len {
            let mut next = vec![0u128; self.m];
            for (i, &c) in ends.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                for j in 0..self.m {
                    if self.adjacency[i][j] == 1 {
                        next[j] = next[j].saturating_add(c);
                    }
                }
            }
            ends = next;
        }
        ends.iter().fold(0u128, |acc, &c| acc.saturating_add(c))
    }

    /// All admissible words of length `len`, in lexicographic order.
    pub fn admissible_words(&self, len: usize) -> Vec<Word> {
        let mut out = Vec::new();
        if len == 0 {
            return out;
        }
        let mut stack = Vec::with_capacity(len);
        for first in 1..=self.m {
            stack.push(first);
            self.extend_words(&mut stack, len, &mut |w| out.push(Word(w.to_vec())));
            stack.pop();
        }
        out
    }

    /// Depth-first visit of admissible extensions of `prefix` up to length `len`,
    /// in lexicographic order.
    pub(crate) fn extend_words(&self, prefix: &mut Vec<usize>, len: usize, visit: &mut dyn FnMut(&[usize])) {
        if prefix.len() == len {
            visit(prefix);
            return;
        }
        let last = *prefix.last().expect("nonempty prefix");
        for next in 1..=self.m {
            if self.allows(last, next) {
                prefix.push(next);
                self.extend_words(prefix, len, visit);
                prefix.pop();
            }
        }
    }

    /// Transitive closure: `reach[i][j]` iff there is a path of positive length from i to j.
    pub fn reachability(&self) -> Vec<Vec<bool>> {
        let m = self.m;
        let mut reach: Vec<Vec<bool>> =
            self.adjacency.iter().map(|row| row.iter().map(|&e| e == 1).collect()).collect();
        for k in 0..m {
            for i in 0..m {
                if reach[i][k] {
                    for j in 0..m {
                        if reach[k][j] {
                            reach[i][j] = true;
                        }
                    }
                }
            }
        }
        reach
    }

    pub fn irreducible_aperiodic(&self) -> Primitivity {
        let irreducible = self.reachability().iter().all(|row| row.iter().all(|&r| r));
        let m = self.m;
        let mut power: Vec<Vec<bool>> =
            self.adjacency.iter().map(|row| row.iter().map(|&e| e == 1).collect()).collect();
        let mut witness = None;
        for k in 1..=m * m {
            if power.iter().all(|row| row.iter().all(|&e| e)) {
                witness = Some(k);
                break;
            }
            power = bool_product(&power, &self.adjacency);
        }
        Primitivity {
            irreducible,
            aperiodic: witness.is_some(),
            witness_power: witness,
        }
    }

    /// Lexicographically smallest admissible word of length `k` that starts with
    /// `first` (if given), ends with `last` (if given), may be preceded by `before`
    /// and followed by `after`.
    fn smallest_word(
        &self,
        k: usize,
        first: Option<usize>,
        last: Option<usize>,
        before: Option<usize>,
        after: Option<usize>,
    ) -> Option<Vec<usize>> {
        let mut found = None;
        let mut stack = Vec::with_capacity(k);
        let firsts: Vec<usize> = match first {
            Some(f) => vec![f],
            None => (1..=self.m).collect(),
        };
        for f in firsts {
            if before.is_some_and(|b| !self.allows(b, f)) {
                continue;
            }
            stack.push(f);
            self.search_word(&mut stack, k, last, after, &mut found);
            stack.pop();
            if found.is_some() {
                break;
            }
        }
        found
    }

    fn search_word(
        &self,
        stack: &mut Vec<usize>,
        k: usize,
        last: Option<usize>,
        after: Option<usize>,
        found: &mut Option<Vec<usize>>,
    ) {
        if found.is_some() {
            return;
        }
        let tail = *stack.last().unwrap();
        if stack.len() == k {
            let ok_last = last.is_none_or(|l| l == tail);
            let ok_after = after.is_none_or(|a| self.allows(tail, a));
            if ok_last && ok_after {
                *found = Some(stack.clone());
            }
            return;
        }
        for next in 1..=self.m {
            if self.allows(tail, next) {
                stack.push(next);
                self.search_word(stack, k, last, after, found);
                stack.pop();
                if found.is_some() {
                    return;
                }
            }
        }
    }
}

fn bool_product(a: &[Vec<bool>], b: &[Vec<u8>]) -> Vec<Vec<bool>> {
    let m = a.len();
    let mut out = vec![vec![false; m]; m];
    for i in 0..m {
        for k in 0..m {
            if a[i][k] {
                for j in 0..m {
                    if b[k][j] == 1 {
                        out[i][j] = true;
                    }
                }
            }
        }
    }
    out
}

/// A (not necessarily stationary) Markov chain on `{1..m}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarkovChain {
    pub initial: Vec<f64>,
    pub transition: Vec<Vec<f64>>,
}

impl MarkovChain {
    pub fn mass(&self, w: &[usize]) -> f64 {
        match w.first() {
            None => 1.0,
            Some(&first) => w
                .windows(2)
                .fold(self.initial[first - 1], |acc, p| acc * self.transition[p[0] - 1][p[1] - 1]),
        }
    }
}

/// Source of cylinder masses `mu([w])` for a shift-invariant measure.
///
/// Measures with Markov structure expose it through [`CylinderMeasure::markov_chain`],
/// which lets the n-Bernoulli construction work with transfer matrices instead of
/// enumerating every block.
pub trait CylinderMeasure {
    fn mass(&self, w: &[usize]) -> f64;

    fn markov_chain(&self) -> Option<MarkovChain> {
        None
    }
}

impl CylinderMeasure for MarkovChain {
    fn mass(&self, w: &[usize]) -> f64 {
        MarkovChain::mass(self, w)
    }

    fn markov_chain(&self) -> Option<MarkovChain> {
        Some(self.clone())
    }
}

impl<F: Fn(&[usize]) -> f64> CylinderMeasure for F {
    fn mass(&self, w: &[usize]) -> f64 {
        self(w)
    }
}

/// Law of the middle word of a hatted block.
#[derive(Debug, Clone, PartialEq)]
enum BlockLaw {
    /// Masses `q_{w1} P_{w1,w2} ... / norm`, restricted to the adjacency.
    Markov { chain: MarkovChain, norm: f64 },
    /// Explicit table of middle words and their normalized masses.
    Table(Vec<(Vec<usize>, f64)>),
}

/// An n-Bernoulli approximant: blocks `p(w_1) w s(w_last)` drawn independently
/// with the mass of their middle word, then averaged over the `n` shifts.
#[derive(Debug, Clone, PartialEq)]
pub struct BernoulliApprox {
    sft: Sft,
    n: usize,
    k: usize,
    anchor: (usize, usize),
    prefixes: Vec<Vec<usize>>,
    suffixes: Vec<Vec<usize>>,
    law: BlockLaw,
}

impl BernoulliApprox {
    pub fn block_length(&self) -> usize {
        self.n
    }

    pub fn pad_length(&self) -> usize {
        self.k
    }

    pub fn anchor(&self) -> (usize, usize) {
        self.anchor
    }

    /// The prefix `p(l)` for symbol `l` (1-based).
    pub fn prefix(&self, l: usize) -> &[usize] {
        &self.prefixes[l - 1]
    }

    pub fn suffix(&self, l: usize) -> &[usize] {
        &self.suffixes[l - 1]
    }

    pub fn middle_length(&self) -> usize {
        self.n - 2 * self.k
    }

    /// `p(w_1) w s(w_last)` for a middle word `w` of length `n - 2k`.
    pub fn hatted(&self, w: &[usize]) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.n);
        out.extend_from_slice(self.prefix(w[0]));
        out.extend_from_slice(w);
        out.extend_from_slice(self.suffix(w[w.len() - 1]));
        out
    }

    /// Enumerates the hatted blocks with positive or zero mass, in lexicographic
    /// order of their middle words.
    pub fn block_masses(&self, cap: u128) -> Result<Vec<(Vec<usize>, f64)>> {
        let l = self.middle_length();
        match &self.law {
            BlockLaw::Table(rows) => Ok(rows.iter().map(|(w, p)| (self.hatted(w), *p)).collect()),
            BlockLaw::Markov { chain, norm } => {
                let count = self.sft.count_words(l);
                if count > cap {
                    return Err(Error::Budget {
                        what: "block enumeration",
                        needed: count,
                        cap,
                    });
                }
                Ok(self
                    .sft
                    .admissible_words(l)
                    .into_iter()
                    .map(|w| {
                        let p = chain.mass(&w) / norm;
                        (self.hatted(&w), p)
                    })
                    .collect())
            }
        }
    }

    /// Total mass of hatted blocks whose symbols at positions `start..start+pattern.len()`
    /// equal `pattern`.
    fn match_mass(&self, start: usize, pattern: &[usize]) -> f64 {
        let end = start + pattern.len();
        debug_assert!(end <= self.n);
        let k = self.k;
        let l = self.middle_length();
        let at = |pos: usize| -> Option<usize> {
            if pos >= start && pos < end {
                Some(pattern[pos - start])
            } else {
                None
            }
        };
        // Pads are determined by the first and last middle symbol.
        let prefix_ok = |first: usize| (0..k).all(|t| at(t).is_none_or(|s| s == self.prefixes[first - 1][t]));
        let suffix_ok = |last: usize| (0..k).all(|t| at(k + l + t).is_none_or(|s| s == self.suffixes[last - 1][t]));
        match &self.law {
            BlockLaw::Table(rows) => rows
                .iter()
                .filter(|(w, _)| {
                    prefix_ok(w[0])
                        && suffix_ok(w[l - 1])
                        && w.iter().enumerate().all(|(t, &s)| at(k + t).is_none_or(|c| c == s))
                })
                .map(|(_, p)| p)
                .sum(),
            BlockLaw::Markov { chain, norm } => {
                let m = self.sft.alphabet_size();
                let mut v: Vec<f64> = (1..=m)
                    .map(|i| {
                        if prefix_ok(i) && at(k).is_none_or(|c| c == i) {
                            chain.initial[i - 1]
                        } else {
                            0.0
                        }
                    })
                    .collect();
                for t in 1..l {
                    let constraint = at(k + t);
                    let mut next = vec![0.0; m];
                    for (i, &vi) in v.iter().enumerate() {
                        if vi == 0.0 {
                            continue;
                        }
                        for (j, nj) in next.iter_mut().enumerate() {
                            if self.sft.adjacency[i][j] == 1 && constraint.is_none_or(|c| c == j + 1) {
                                *nj += vi * chain.transition[i][j];
                            }
                        }
                    }
                    v = next;
                }
                v.iter()
                    .enumerate()
                    .filter(|&(i, _)| suffix_ok(i + 1))
                    .map(|(_, x)| x)
                    .sum::<f64>()
                    / norm
            }
        }
    }

    /// Mass of the cylinder `[w]` under the shift-averaged measure.
    ///
    /// Each of the `n` offsets places `w` across at most two consecutive blocks,
    /// and blocks are independent, so the offset mass factorizes.
    pub fn cylinder_mass(&self, w: &[usize]) -> Result<f64> {
        if w.len() > self.n {
            return Err(Error::invalid(format!(
                "cylinder length {} exceeds block length {}",
                w.len(),
                self.n
            )));
        }
        if w.is_empty() {
            return Ok(1.0);
        }
        let n = self.n;
        let mut total = 0.0;
        for t in 0..n {
            let mass = if t + w.len() <= n {
                self.match_mass(t, w)
            } else {
                let split = n - t;
                self.match_mass(t, &w[..split]) * self.match_mass(0, &w[split..])
            };
            total += mass;
        }
        Ok(total / n as f64)
    }

    /// Entropy `-(1/n) sum mu([w]) log mu([w])` over the middle words, in nats.
    pub fn entropy(&self) -> f64 {
        let block = match &self.law {
            BlockLaw::Table(rows) => -rows.iter().map(|&(_, p)| xlogx(p)).sum::<f64>(),
            // -sum (mu/Z) log(mu/Z) = -(1/Z) sum mu log mu + log Z
            BlockLaw::Markov { chain, norm } => {
                markov_block_entropy(&self.sft, chain, self.middle_length()) / norm + norm.ln()
            }
        };
        block / self.n as f64
    }
}

fn xlogx(p: f64) -> f64 {
    if p > 0.0 {
        p * p.ln()
    } else {
        0.0
    }
}

/// `-sum mu(w) log mu(w)` over admissible words of length `len` for the
/// (possibly unnormalized) chain, via forward and backward mass vectors.
fn markov_block_entropy(sft: &Sft, chain: &MarkovChain, len: usize) -> f64 {
    let m = sft.alphabet_size();
    let p = |i: usize, j: usize| {
        if sft.adjacency[i][j] == 1 {
            chain.transition[i][j]
        } else {
            0.0
        }
    };
    // backward[t][i]: mass of continuations from symbol i at position t to the end.
    let mut backward = vec![vec![1.0; m]; len];
    for t in (0..len.saturating_sub(1)).rev() {
        for i in 0..m {
            backward[t][i] = (0..m).map(|j| p(i, j) * backward[t + 1][j]).sum();
        }
    }
    let mut forward = chain.initial.clone();
    let mut h = -(0..m).map(|i| xlogx(forward[i]) * backward[0][i]).sum::<f64>();
    for t in 0..len.saturating_sub(1) {
        let mut next = vec![0.0; m];
        for i in 0..m {
            for j in 0..m {
                let pij = p(i, j);
                if pij > 0.0 {
                    h -= forward[i] * pij.ln() * pij * backward[t + 1][j];
                    next[j] += forward[i] * pij;
                }
            }
        }
        forward = next;
    }
    h
}

/// Builds the n-Bernoulli approximant of `mu` with the smallest feasible pad
/// length and lexicographically smallest pads.
pub fn nbern_construct(
    sft: &Sft,
    mu: &dyn CylinderMeasure,
    n: usize,
    anchor: (usize, usize),
) -> Result<BernoulliApprox> {
    let (i, j) = check_anchor(sft, anchor)?;
    let prim = sft.irreducible_aperiodic();
    let witness = prim
        .witness_power
        .ok_or_else(|| Error::precondition("adjacency matrix is not aperiodic"))?;
    let m = sft.alphabet_size();
    for k in 1..=witness {
        let prefixes: Option<Vec<Vec<usize>>> =
            (1..=m).map(|l| sft.smallest_word(k, Some(j), None, None, Some(l))).collect();
        let suffixes: Option<Vec<Vec<usize>>> =
            (1..=m).map(|l| sft.smallest_word(k, None, Some(i), Some(l), None)).collect();
        if let (Some(prefixes), Some(suffixes)) = (prefixes, suffixes) {
            return nbern_construct_with_pads(sft, mu, n, anchor, prefixes, suffixes);
        }
    }
    // A^witness > 0 guarantees pads of length `witness`.
    unreachable!("pads of length {witness} must exist for a primitive adjacency matrix")
}

fn check_anchor(sft: &Sft, (i, j): (usize, usize)) -> Result<(usize, usize)> {
    let m = sft.alphabet_size();
    if i == 0 || j == 0 || i > m || j > m {
        return Err(Error::invalid(format!("anchor ({i},{j}) outside 1..={m}")));
    }
    if !sft.allows(i, j) {
        return Err(Error::invalid(format!("anchor ({i},{j}) is not an allowed transition")));
    }
    Ok((i, j))
}

/// As [`nbern_construct`], with caller-supplied pads `p(l)` and `s(l)` (index `l-1`).
pub fn nbern_construct_with_pads(
    sft: &Sft,
    mu: &dyn CylinderMeasure,
    n: usize,
    anchor: (usize, usize),
    prefixes: Vec<Vec<usize>>,
    suffixes: Vec<Vec<usize>>,
) -> Result<BernoulliApprox> {
    let (i, j) = check_anchor(sft, anchor)?;
    let m = sft.alphabet_size();
    if prefixes.len() != m || suffixes.len() != m {
        return Err(Error::invalid(format!("expected {m} prefixes and suffixes")));
    }
    let k = prefixes[0].len();
    if k == 0 {
        return Err(Error::invalid("pads must be nonempty"));
    }
    for l in 1..=m {
        let p = &prefixes[l - 1];
        let s = &suffixes[l - 1];
        if p.len() != k || s.len() != k {
            return Err(Error::invalid("all pads must share one length"));
        }
        let mut pl = p.clone();
        pl.push(l);
        if p[0] != j || !sft.is_admissible(&pl) {
            return Err(Error::invalid(format!("prefix for symbol {l} is not valid")));
        }
        let mut ls = vec![l];
        ls.extend_from_slice(s);
        if s[k - 1] != i || !sft.is_admissible(&ls) {
            return Err(Error::invalid(format!("suffix for symbol {l} is not valid")));
        }
    }
    if n < 2 * k + 1 {
        return Err(Error::invalid(format!("block length {n} is below 2k+1 = {}", 2 * k + 1)));
    }
    let l = n - 2 * k;
    let law = match mu.markov_chain() {
        Some(chain) => {
            if chain.initial.len() != m || chain.transition.len() != m {
                return Err(Error::invalid("Markov chain dimension does not match the alphabet"));
            }
            let mut approx = BernoulliApprox {
                sft: sft.clone(),
                n,
                k,
                anchor,
                prefixes: prefixes.clone(),
                suffixes: suffixes.clone(),
                law: BlockLaw::Markov { chain, norm: 1.0 },
            };
            let total = approx.total_middle_mass();
            if (total - 1.0).abs() > 1e-12 {
                if let BlockLaw::Markov { norm, .. } = &mut approx.law {
                    *norm = total;
                }
            }
            return Ok(approx);
        }
        None => {
            let count = sft.count_words(l);
            if count > DEFAULT_ENUMERATION_CAP {
                return Err(Error::Budget {
                    what: "middle-word enumeration",
                    needed: count,
                    cap: DEFAULT_ENUMERATION_CAP,
                });
            }
            let mut rows: Vec<(Vec<usize>, f64)> =
                sft.admissible_words(l).into_iter().map(|w| {
                    let p = mu.mass(&w);
                    (w.into_inner(), p)
                }).collect();
            let total: f64 = rows.iter().map(|r| r.1).sum();
            if total <= 0.0 {
                return Err(Error::invalid("measure gives no mass to admissible words"));
            }
            if (total - 1.0).abs() > 1e-12 {
                for r in &mut rows {
                    r.1 /= total;
                }
            }
            BlockLaw::Table(rows)
        }
    };
    Ok(BernoulliApprox {
        sft: sft.clone(),
        n,
        k,
        anchor,
        prefixes,
        suffixes,
        law,
    })
}

impl BernoulliApprox {
    fn total_middle_mass(&self) -> f64 {
        // With no constraints every middle word matches.
        self.match_mass(0, &[])
    }
}

/// `-(1/n) sum mu log mu` of the approximant's blocks, in nats.
pub fn nbern_entropy(b: &BernoulliApprox) -> f64 {
    b.entropy()
}

pub fn nbern_cylinder_mass(b: &BernoulliApprox, w: &[usize]) -> Result<f64> {
    b.cylinder_mass(w)
}
