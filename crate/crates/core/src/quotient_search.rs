//! Backtracking search for homomorphisms into symmetric groups.
//!
//! Generators are assigned in presentation order, candidates in lexicographic
//! order of permutations. A relator of shape `[p, g]·g⁻¹` with `p` already
//! assigned has its candidates for `g` taken from the precomputed solution
//! set `{Q : P·Q·P⁻¹ = Q²}` instead of the whole group.

use std::fmt;
use std::time::Duration;

use rayon::prelude::*;
use thiserror::Error;

use crate::arithmetic::ord2_mod;
use crate::presentation::Presentation;
use crate::word::Letter;

/// Largest degree with a precomputed multiplication table.
pub const MAX_DEGREE: usize = 7;
const MAX_WITNESSES: usize = 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QuotientError {
    #[error("images have different degrees")]
    DegreeMismatch,
    #[error("expected {expected} images, got {got}")]
    WrongArity { expected: usize, got: usize },
    #[error("not a permutation: {0:?}")]
    NotBijective(Vec<usize>),
    #[error("degree must be between 1 and {MAX_DEGREE}")]
    BadDegree,
}

/// A bijection of `{0..k-1}`; composition applies the right factor first
/// on points written on the right, i.e. `(p·q)(i) = p(q(i))`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<u8>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Permutation, QuotientError> {
        let k = images.len();
        let mut seen = vec![false; k];
        for &i in &images {
            if i >= k || seen[i] {
                return Err(QuotientError::NotBijective(images));
            }
            seen[i] = true;
        }
        Ok(Permutation {
            images: images.into_iter().map(|i| i as u8).collect(),
        })
    }

    pub fn identity(k: usize) -> Permutation {
        Permutation {
            images: (0..k as u8).collect(),
        }
    }

    /// Transposition of `a` and `b` in degree `k`.
    pub fn transposition(k: usize, a: usize, b: usize) -> Permutation {
        let mut p = Permutation::identity(k);
        p.images.swap(a, b);
        p
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.images[i] as usize
    }

    pub fn images(&self) -> Vec<usize> {
        self.images.iter().map(|&i| i as usize).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &j)| i == j as usize)
    }

    pub fn compose(&self, other: &Permutation) -> Permutation {
        Permutation {
            images: other.images.iter().map(|&j| self.images[j as usize]).collect(),
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut out = vec![0u8; self.images.len()];
        for (i, &j) in self.images.iter().enumerate() {
            out[j as usize] = i as u8;
        }
        Permutation { images: out }
    }

    pub fn order(&self) -> usize {
        let mut p = self.clone();
        let mut n = 1;
        while !p.is_identity() {
            p = p.compose(self);
            n += 1;
        }
        n
    }
}

impl fmt::Display for Permutation {
    /// Cycle notation, `()` for the identity.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = self.degree();
        let mut seen = vec![false; k];
        let mut any = false;
        for start in 0..k {
            if seen[start] || self.apply(start) == start {
                continue;
            }
            any = true;
            f.write_str("(")?;
            let mut i = start;
            let mut first = true;
            while !seen[i] {
                seen[i] = true;
                if !first {
                    f.write_str(" ")?;
                }
                write!(f, "{i}")?;
                first = false;
                i = self.apply(i);
            }
            f.write_str(")")?;
        }
        if !any {
            f.write_str("()")?;
        }
        Ok(())
    }
}

fn eval_relator(rel: &[Letter], images: &[Permutation]) -> Permutation {
    let k = images[0].degree();
    let mut acc = Permutation::identity(k);
    for l in rel {
        let g = &images[l.gen as usize];
        acc = if l.inverse {
            acc.compose(&g.inverse())
        } else {
            acc.compose(g)
        };
    }
    acc
}

/// True iff every relator of `p` evaluates to the identity under `images`.
pub fn verify_hom(p: &Presentation, images: &[Permutation]) -> Result<bool, QuotientError> {
    if images.len() != p.num_generators() {
        return Err(QuotientError::WrongArity {
            expected: p.num_generators(),
            got: images.len(),
        });
    }
    let Some(first) = images.first() else {
        return Ok(true);
    };
    if images.iter().any(|g| g.degree() != first.degree()) {
        return Err(QuotientError::DegreeMismatch);
    }
    Ok(p
        .relators()
        .iter()
        .all(|r| eval_relator(r.letters(), images).is_identity()))
}

/// `S_k` with elements in lexicographic order and a multiplication table.
struct SymmetricGroup {
    elements: Vec<Permutation>,
    mul: Vec<u16>,
    inv: Vec<u16>,
}

impl SymmetricGroup {
    fn new(k: usize) -> SymmetricGroup {
        let mut elements = Vec::new();
        let mut cur: Vec<usize> = (0..k).collect();
        loop {
            elements.push(Permutation::new(cur.clone()).unwrap());
            if !next_permutation(&mut cur) {
                break;
            }
        }
        let n = elements.len();
        let index: std::collections::HashMap<&Permutation, u16> =
            elements.iter().enumerate().map(|(i, p)| (p, i as u16)).collect();
        let mut mul = vec![0u16; n * n];
        for (i, a) in elements.iter().enumerate() {
            for (j, b) in elements.iter().enumerate() {
                mul[i * n + j] = index[&a.compose(b)];
            }
        }
        let inv = elements.iter().map(|p| index[&p.inverse()]).collect();
        SymmetricGroup { elements, mul, inv }
    }

    fn order(&self) -> usize {
        self.elements.len()
    }

    #[inline]
    fn mul(&self, a: u16, b: u16) -> u16 {
        self.mul[a as usize * self.order() + b as usize]
    }
}

fn next_permutation(v: &mut [usize]) -> bool {
    let n = v.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomSearchReport {
    pub target_degree: usize,
    pub total_homs: u64,
    pub nontrivial_found: bool,
    /// First few non-trivial homomorphisms in search order.
    pub witnesses: Vec<Vec<Permutation>>,
    /// Partial assignments explored.
    pub nodes: u64,
    /// False when the budget ran out; counts are then lower bounds.
    pub complete: bool,
}

impl HomSearchReport {
    /// `degree count nontrivial_found [elapsed]`, one record.
    pub fn table(&self, elapsed: Option<Duration>) -> String {
        let mut s = String::from("degree\tcount\tnontrivial_found\tcomplete");
        if elapsed.is_some() {
            s.push_str("\telapsed");
        }
        s.push('\n');
        s.push_str(&format!(
            "{}\t{}\t{}\t{}",
            self.target_degree, self.total_homs, self.nontrivial_found, self.complete
        ));
        if let Some(e) = elapsed {
            s.push_str(&format!("\t{:.3}s", e.as_secs_f64()));
        }
        s.push('\n');
        s
    }
}

/// What the backtracking level for one generator does.
struct Level {
    /// This generator's candidates are the solutions of a relator `[p, g]·g⁻¹` with `p` assigned earlier.
    higman_parent: Option<usize>,
    /// Relators whose largest generator is this one.
    closing: Vec<Vec<Letter>>,
}

/// Relator `[p, g]·g⁻¹ = p g p⁻¹ g⁻¹ g⁻¹` returns `(p, g)`.
fn higman_shape(rel: &[Letter]) -> Option<(usize, usize)> {
    if rel.len() != 5 {
        return None;
    }
    let (p, g) = (rel[0], rel[1]);
    if p.inverse || g.inverse || p.gen == g.gen {
        return None;
    }
    (rel[2] == p.inv() && rel[3] == g.inv() && rel[4] == g.inv())
        .then_some((p.gen as usize, g.gen as usize))
}

struct Search<'a> {
    group: &'a SymmetricGroup,
    levels: Vec<Level>,
    /// `solutions[P] = {Q : P Q P⁻¹ = Q²}`.
    solutions: Vec<Vec<u16>>,
    all: Vec<u16>,
    budget: u64,
}

#[derive(Default)]
struct Tally {
    homs: u64,
    nodes: u64,
    nontrivial: bool,
    witnesses: Vec<Vec<u16>>,
    exhausted: bool,
}

impl Search<'_> {
    fn eval(&self, rel: &[Letter], assign: &[u16]) -> u16 {
        rel.iter().fold(0u16, |acc, l| {
            let g = assign[l.gen as usize];
            let g = if l.inverse { self.group.inv[g as usize] } else { g };
            self.group.mul(acc, g)
        })
    }

    fn dfs(&self, depth: usize, assign: &mut Vec<u16>, tally: &mut Tally) {
        if tally.exhausted {
            return;
        }
        if depth == self.levels.len() {
            tally.homs += 1;
            if assign.iter().any(|&g| g != 0) {
                tally.nontrivial = true;
                if tally.witnesses.len() < MAX_WITNESSES {
                    tally.witnesses.push(assign.clone());
                }
            }
            return;
        }
        let level = &self.levels[depth];
        let cands = match level.higman_parent {
            Some(p) => &self.solutions[assign[p] as usize],
            None => &self.all,
        };
        for &c in cands {
            tally.nodes += 1;
            if tally.nodes > self.budget {
                tally.exhausted = true;
                return;
            }
            assign.push(c);
            if level.closing.iter().all(|r| self.eval(r, assign) == 0) {
                self.dfs(depth + 1, assign, tally);
            }
            assign.pop();
        }
    }
}

/// Count all homomorphisms `p → S_k`, exploring at most `budget` partial
/// assignments.
pub fn search_homs(p: &Presentation, degree: usize, budget: u64) -> Result<HomSearchReport, QuotientError> {
    if degree == 0 || degree > MAX_DEGREE {
        return Err(QuotientError::BadDegree);
    }
    let group = SymmetricGroup::new(degree);
    let ngen = p.num_generators();
    let mut levels: Vec<Level> = (0..ngen)
        .map(|_| Level {
            higman_parent: None,
            closing: Vec::new(),
        })
        .collect();
    for r in p.relators() {
        let letters = r.letters();
        if let Some((pg, g)) = higman_shape(letters) {
            if pg < g && levels[g].higman_parent.is_none() {
                levels[g].higman_parent = Some(pg);
            }
        }
        if let Some(max) = letters.iter().map(|l| l.gen as usize).max() {
            levels[max].closing.push(letters.to_vec());
        }
    }
    let n = group.order() as u16;
    let solutions = (0..n)
        .map(|pp| {
            let pinv = group.inv[pp as usize];
            (0..n)
                .filter(|&q| group.mul(group.mul(pp, q), pinv) == group.mul(q, q))
                .collect()
        })
        .collect();
    let search = Search {
        group: &group,
        levels,
        solutions,
        all: (0..n).collect(),
        budget,
    };

    let tally = if ngen == 0 {
        Tally {
            homs: 1,
            ..Tally::default()
        }
    } else {
        // Partition on the first generator's candidates; merge in order.
        let first: Vec<u16> = search.all.clone();
        let parts: Vec<Tally> = first
            .par_iter()
            .map(|&c| {
                let mut t = Tally {
                    nodes: 1,
                    ..Tally::default()
                };
                let mut assign = vec![c];
                if search.levels[0].closing.iter().all(|r| search.eval(r, &assign) == 0) {
                    search.dfs(1, &mut assign, &mut t);
                }
                t
            })
            .collect();
        let mut total = Tally::default();
        for t in parts {
            total.homs += t.homs;
            total.nodes += t.nodes;
            total.nontrivial |= t.nontrivial;
            total.exhausted |= t.exhausted;
            for w in t.witnesses {
                if total.witnesses.len() < MAX_WITNESSES {
                    total.witnesses.push(w);
                }
            }
        }
        if total.nodes > budget {
            total.exhausted = true;
        }
        total
    };

    Ok(HomSearchReport {
        target_degree: degree,
        total_homs: tally.homs,
        nontrivial_found: tally.nontrivial,
        witnesses: tally
            .witnesses
            .iter()
            .map(|w| w.iter().map(|&g| group.elements[g as usize].clone()).collect())
            .collect(),
        nodes: tally.nodes,
        complete: !tally.exhausted,
    })
}

/// Cross-check for Higman-shaped relators `[a, b]·b⁻¹`: under any
/// homomorphism the orders satisfy `ord(b) | 2^ord(a) − 1`.
pub fn check_higman_orders(p: &Presentation, images: &[Permutation]) -> bool {
    p.relators().iter().filter_map(|r| higman_shape(r.letters())).all(|(a, b)| {
        let (ra, rb) = (images[a].order() as u64, images[b].order() as u64);
        matches!(ord2_mod(rb), Ok(Some(s)) if ra % s == 0)
    })
}
