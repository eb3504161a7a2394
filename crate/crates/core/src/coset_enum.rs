//! Todd–Coxeter coset enumeration.
//!
//! Two strategies share one table: HLT (scan relators at each coset in turn,
//! defining cosets to complete the scan, with a lookahead pass when the table
//! fills) and Felsch (define at the first hole, then close every deduction
//! against all cyclic conjugates of the relators).
//!
//! Coincidences are resolved with the usual union-find queue: the smaller id
//! survives, so coset 0 is never merged away.

use std::fmt::Write as _;

use thiserror::Error;

use crate::presentation::Presentation;
use crate::word::{same_alphabet, Letter, Word};

const UNDEF: u32 = u32::MAX;

pub const DEFAULT_MAX_COSETS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strategy {
    #[default]
    Hlt,
    Felsch,
}

impl std::str::FromStr for Strategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "hlt" => Ok(Strategy::Hlt),
            "felsch" => Ok(Strategy::Felsch),
            _ => Err(format!("unknown strategy {s:?} (hlt|felsch)")),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EnumError {
    #[error("subgroup generator is not over the presentation's alphabet")]
    AlphabetMismatch,
    #[error("max_cosets must be at least 1")]
    ZeroLimit,
    #[error("completed table failed validation: {0}")]
    Inconsistent(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Index(usize),
    LimitExceeded,
}

#[derive(Debug, Clone)]
pub struct EnumerationResult {
    pub outcome: Outcome,
    pub cosets_defined: usize,
    pub max_live: usize,
    /// Present when the enumeration completed.
    pub table: Option<CosetTable>,
}

impl EnumerationResult {
    pub fn index(&self) -> Option<usize> {
        match self.outcome {
            Outcome::Index(k) => Some(k),
            Outcome::LimitExceeded => None,
        }
    }
}

/// A complete coset table with compact ids `0..index`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CosetTable {
    ncols: usize,
    entries: Vec<u32>,
    names: Vec<String>,
}

impl CosetTable {
    pub fn index(&self) -> usize {
        self.entries.len() / self.ncols.max(1)
    }

    /// Image of coset `c` under the generator letter `l`.
    pub fn act(&self, c: usize, l: Letter) -> usize {
        self.entries[c * self.ncols + l.column()] as usize
    }

    pub fn trace(&self, c: usize, w: &Word) -> usize {
        w.letters().iter().fold(c, |c, &l| self.act(c, l))
    }

    /// One line per coset: `id: g1 g1' g2 g2' ...`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = write!(out, "#");
        for n in &self.names {
            let _ = write!(out, " {n} {n}'");
        }
        out.push('\n');
        for c in 0..self.index() {
            let _ = write!(out, "{c}:");
            for col in 0..self.ncols {
                match self.entries[c * self.ncols + col] {
                    UNDEF => out.push_str(" -"),
                    d => {
                        let _ = write!(out, " {d}");
                    }
                }
            }
            out.push('\n');
        }
        out
    }
}

enum Full {
    Limit,
}

struct Enumerator {
    ncols: usize,
    table: Vec<u32>,
    parent: Vec<u32>,
    live: usize,
    max_live: usize,
    defined: usize,
    limit: usize,
    relators: Vec<Vec<u32>>,
    subgroup: Vec<Vec<u32>>,
    /// For Felsch: cyclic conjugates of relators and inverses, by first column.
    conjugates: Vec<Vec<Vec<u32>>>,
    queue: Vec<u32>,
    deductions: Vec<(u32, u32)>,
    track_deductions: bool,
}

#[inline]
fn inv(c: u32) -> u32 {
    c ^ 1
}

fn columns(w: &Word) -> Vec<u32> {
    w.letters().iter().map(|l| l.column() as u32).collect()
}

impl Enumerator {
    fn new(p: &Presentation, subgroup: &[Word], limit: usize, felsch: bool) -> Enumerator {
        let ncols = 2 * p.num_generators();
        let mut relators: Vec<Vec<u32>> = p
            .relators()
            .iter()
            .map(|r| columns(&r.cyclically_reduced()))
            .filter(|r| !r.is_empty())
            .collect();
        // Shorter relators first: they close faster and drive early deductions.
        relators.sort_by_key(|r| r.len());
        let subgroup = subgroup.iter().map(columns).filter(|w| !w.is_empty()).collect();
        let mut conjugates = vec![Vec::new(); ncols];
        if felsch {
            let mut seen = std::collections::HashSet::new();
            for r in &relators {
                let rinv: Vec<u32> = r.iter().rev().map(|&c| inv(c)).collect();
                for base in [r, &rinv] {
                    for k in 0..base.len() {
                        let mut rot = base[k..].to_vec();
                        rot.extend_from_slice(&base[..k]);
                        if seen.insert(rot.clone()) {
                            conjugates[rot[0] as usize].push(rot);
                        }
                    }
                }
            }
        }
        let mut e = Enumerator {
            ncols,
            table: Vec::new(),
            parent: Vec::new(),
            live: 0,
            max_live: 0,
            defined: 0,
            limit,
            relators,
            subgroup,
            conjugates,
            queue: Vec::new(),
            deductions: Vec::new(),
            track_deductions: felsch,
        };
        e.push_row();
        e
    }

    fn rows(&self) -> usize {
        self.parent.len()
    }

    fn push_row(&mut self) -> u32 {
        let id = self.parent.len() as u32;
        self.table.extend(std::iter::repeat_n(UNDEF, self.ncols));
        self.parent.push(id);
        self.live += 1;
        self.defined += 1;
        self.max_live = self.max_live.max(self.live);
        id
    }

    #[inline]
    fn get(&self, c: u32, col: u32) -> u32 {
        self.table[c as usize * self.ncols + col as usize]
    }

    #[inline]
    fn set(&mut self, c: u32, col: u32, d: u32) {
        self.table[c as usize * self.ncols + col as usize] = d;
    }

    #[inline]
    fn alive(&self, c: u32) -> bool {
        self.parent[c as usize] == c
    }

    /// Define a new coset as `c·col`.
    fn define(&mut self, c: u32, col: u32) -> Result<u32, Full> {
        if self.live >= self.limit {
            return Err(Full::Limit);
        }
        let d = self.push_row();
        self.set(c, col, d);
        self.set(d, inv(col), c);
        if self.track_deductions {
            self.deductions.push((c, col));
        }
        Ok(d)
    }

    fn rep(&mut self, c: u32) -> u32 {
        let mut root = c;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        let mut c = c;
        while self.parent[c as usize] != root {
            let next = self.parent[c as usize];
            self.parent[c as usize] = root;
            c = next;
        }
        root
    }

    fn merge(&mut self, a: u32, b: u32) {
        let (x, y) = (self.rep(a), self.rep(b));
        if x != y {
            let (mu, nu) = if x < y { (x, y) } else { (y, x) };
            self.parent[nu as usize] = mu;
            self.live -= 1;
            self.queue.push(nu);
        }
    }

    fn coincidence(&mut self, a: u32, b: u32) {
        self.merge(a, b);
        let mut i = 0;
        while i < self.queue.len() {
            let g = self.queue[i];
            i += 1;
            for x in 0..self.ncols as u32 {
                let d = self.get(g, x);
                if d == UNDEF {
                    continue;
                }
                self.set(d, inv(x), UNDEF);
                let mu = self.rep(g);
                let nu = self.rep(d);
                let mx = self.get(mu, x);
                if mx != UNDEF {
                    self.merge(nu, mx);
                    continue;
                }
                let nx = self.get(nu, inv(x));
                if nx != UNDEF {
                    self.merge(mu, nx);
                    continue;
                }
                self.set(mu, x, nu);
                self.set(nu, inv(x), mu);
                if self.track_deductions {
                    self.deductions.push((mu, x));
                }
            }
        }
        self.queue.clear();
    }

    /// Scan `w` at `c`. With `fill`, undefined gaps are closed by defining
    /// new cosets; otherwise only deductions and coincidences are recorded.
    fn scan(&mut self, c: u32, w: &[u32], fill: bool) -> Result<(), Full> {
        let n = w.len();
        let mut f = c;
        let mut i = 0usize;
        let mut b = c;
        let mut j = n; // w[j-1] is the last unscanned letter from the right
        loop {
            while i < j {
                let next = self.get(f, w[i]);
                if next == UNDEF {
                    break;
                }
                f = next;
                i += 1;
            }
            if i == j {
                if f != b {
                    self.coincidence(f, b);
                }
                return Ok(());
            }
            while j > i {
                let next = self.get(b, inv(w[j - 1]));
                if next == UNDEF {
                    break;
                }
                b = next;
                j -= 1;
            }
            if j == i {
                self.coincidence(f, b);
                return Ok(());
            }
            if j == i + 1 {
                self.set(f, w[i], b);
                self.set(b, inv(w[i]), f);
                if self.track_deductions {
                    self.deductions.push((f, w[i]));
                }
                return Ok(());
            }
            if !fill {
                return Ok(());
            }
            let d = self.define(f, w[i])?;
            f = d;
            i += 1;
        }
    }

    fn scan_relators(&mut self, c: u32, fill: bool) -> Result<(), Full> {
        for r in 0..self.relators.len() {
            if !self.alive(c) {
                return Ok(());
            }
            let w = std::mem::take(&mut self.relators[r]);
            let res = self.scan(c, &w, fill);
            self.relators[r] = w;
            res?;
        }
        Ok(())
    }

    fn scan_subgroup(&mut self) -> Result<(), Full> {
        for s in 0..self.subgroup.len() {
            let w = std::mem::take(&mut self.subgroup[s]);
            let res = self.scan(0, &w, true);
            self.subgroup[s] = w;
            res?;
        }
        Ok(())
    }

    /// Close pending Felsch deductions.
    fn process_deductions(&mut self) {
        while let Some((c, x)) = self.deductions.pop() {
            if !self.alive(c) {
                continue;
            }
            let d = self.get(c, x);
            if d == UNDEF {
                continue;
            }
            for (start, col) in [(c, x), (d, inv(x))] {
                let list = std::mem::take(&mut self.conjugates[col as usize]);
                for w in &list {
                    if !self.alive(start) {
                        break;
                    }
                    let _ = self.scan(start, w, false);
                }
                self.conjugates[col as usize] = list;
            }
        }
    }

    /// Renumber live cosets in order; returns the new id of `keep` (or of the
    /// next live coset after it).
    fn compact(&mut self, keep: u32) -> u32 {
        let rows = self.rows();
        let mut map = vec![UNDEF; rows];
        let mut next = 0u32;
        for c in 0..rows {
            if self.parent[c] == c as u32 {
                map[c] = next;
                next += 1;
            }
        }
        let mut new_keep = next;
        for c in (keep as usize..rows).rev() {
            if map[c] != UNDEF {
                new_keep = map[c];
            }
        }
        let ncols = self.ncols;
        let mut table = Vec::with_capacity(next as usize * ncols);
        for c in 0..rows {
            if map[c] == UNDEF {
                continue;
            }
            for col in 0..ncols {
                let d = self.table[c * ncols + col];
                table.push(if d == UNDEF { UNDEF } else { map[d as usize] });
            }
        }
        self.table = table;
        self.parent = (0..next).collect();
        for dd in &mut self.deductions {
            dd.0 = map[dd.0 as usize];
        }
        self.deductions.retain(|d| d.0 != UNDEF);
        new_keep
    }

    fn maybe_compact(&mut self, keep: u32) -> u32 {
        if self.live * 2 < self.rows() {
            self.compact(keep)
        } else {
            keep
        }
    }

    fn run_hlt(&mut self) -> bool {
        loop {
            if self.scan_subgroup().is_ok() {
                break;
            }
            if !self.lookahead() {
                return false;
            }
        }
        let mut k = 0u32;
        while (k as usize) < self.rows() {
            if !self.alive(k) {
                k += 1;
                continue;
            }
            let done = self.scan_relators(k, true).and_then(|_| {
                if self.alive(k) {
                    for col in 0..self.ncols as u32 {
                        if self.get(k, col) == UNDEF {
                            self.define(k, col)?;
                        }
                    }
                }
                Ok(())
            });
            if done.is_err() {
                if !self.lookahead() {
                    return false;
                }
                k = self.compact(k);
                continue;
            }
            k += 1;
            k = self.maybe_compact(k);
        }
        true
    }

    /// Scan everything without defining. True if it freed room.
    fn lookahead(&mut self) -> bool {
        let before = self.live;
        for c in 0..self.rows() as u32 {
            if self.alive(c) {
                let _ = self.scan_relators(c, false);
            }
        }
        self.live < before && self.live < self.limit
    }

    fn run_felsch(&mut self) -> bool {
        if self.scan_subgroup().is_err() {
            return false;
        }
        self.process_deductions();
        let mut c = 0u32;
        let mut col = 0u32;
        loop {
            // Advance to the first undefined entry in row-major order.
            while (c as usize) < self.rows()
                && (!self.alive(c) || self.get(c, col) != UNDEF)
            {
                col += 1;
                if col as usize == self.ncols {
                    col = 0;
                    c += 1;
                }
            }
            if c as usize >= self.rows() {
                return true;
            }
            if self.define(c, col).is_err() {
                return false;
            }
            self.process_deductions();
            if self.deductions.is_empty() {
                let nc = self.maybe_compact(c);
                if nc != c {
                    c = nc;
                    col = 0;
                }
            }
        }
    }

    fn finish(mut self, completed: bool, names: Vec<String>) -> Result<EnumerationResult, EnumError> {
        let cosets_defined = self.defined;
        let max_live = self.max_live;
        if !completed {
            return Ok(EnumerationResult {
                outcome: Outcome::LimitExceeded,
                cosets_defined,
                max_live,
                table: None,
            });
        }
        self.compact(0);
        let table = CosetTable {
            ncols: self.ncols,
            entries: self.table,
            names,
        };
        validate(&table, &self.relators, &self.subgroup)?;
        Ok(EnumerationResult {
            outcome: Outcome::Index(table.index()),
            cosets_defined,
            max_live,
            table: Some(table),
        })
    }
}

fn trace_cols(t: &CosetTable, c: usize, w: &[u32]) -> usize {
    w.iter()
        .fold(c, |c, &col| t.entries[c * t.ncols + col as usize] as usize)
}

/// Post-hoc check: complete, involutive, every relator closes everywhere,
/// subgroup generators close at coset 0.
fn validate(t: &CosetTable, relators: &[Vec<u32>], subgroup: &[Vec<u32>]) -> Result<(), EnumError> {
    let n = t.index();
    for c in 0..n {
        for col in 0..t.ncols {
            let d = t.entries[c * t.ncols + col];
            if d == UNDEF || d as usize >= n {
                return Err(EnumError::Inconsistent(format!("entry ({c},{col}) undefined")));
            }
            if t.entries[d as usize * t.ncols + (col ^ 1)] as usize != c {
                return Err(EnumError::Inconsistent(format!("entry ({c},{col}) not involutive")));
            }
        }
        for r in relators {
            if trace_cols(t, c, r) != c {
                return Err(EnumError::Inconsistent(format!("relator open at coset {c}")));
            }
        }
    }
    for s in subgroup {
        if n > 0 && trace_cols(t, 0, s) != 0 {
            return Err(EnumError::Inconsistent("subgroup generator open at coset 0".into()));
        }
    }
    Ok(())
}

/// Enumerate the cosets of `⟨subgroup⟩` in `p`, keeping at most `max_cosets`
/// cosets alive at once.
pub fn enumerate(
    p: &Presentation,
    subgroup: &[Word],
    max_cosets: usize,
    strategy: Strategy,
) -> Result<EnumerationResult, EnumError> {
    if max_cosets == 0 {
        return Err(EnumError::ZeroLimit);
    }
    if subgroup.iter().any(|w| !same_alphabet(w.alphabet(), p.alphabet())) {
        return Err(EnumError::AlphabetMismatch);
    }
    let felsch = strategy == Strategy::Felsch;
    let mut e = Enumerator::new(p, subgroup, max_cosets, felsch);
    let completed = if p.num_generators() == 0 {
        true
    } else if felsch {
        e.run_felsch()
    } else {
        e.run_hlt()
    };
    e.finish(completed, p.alphabet().names().to_vec())
}

/// Convenience: index of the trivial subgroup, i.e. the group order.
pub fn group_order(p: &Presentation, max_cosets: usize, strategy: Strategy) -> Option<usize> {
    enumerate(p, &[], max_cosets, strategy).ok()?.index()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presentation::{add_relators, gn, higman, Presentation};
    use crate::word::{parse_word, Alphabet};

    fn pres(gens: &[&str], rels: &[&str]) -> Presentation {
        let al = Alphabet::new(gens.iter().copied()).unwrap();
        let rels = rels.iter().map(|r| parse_word(&al, r).unwrap()).collect();
        Presentation::new("test", al, rels).unwrap()
    }

    fn both(p: &Presentation, sub: &[Word], limit: usize) -> (Option<usize>, Option<usize>) {
        (
            enumerate(p, sub, limit, Strategy::Hlt).unwrap().index(),
            enumerate(p, sub, limit, Strategy::Felsch).unwrap().index(),
        )
    }

    #[test]
    fn cyclic_group() {
        let p = pres(&["a"], &["a^5"]);
        assert_eq!(both(&p, &[], 100), (Some(5), Some(5)));
    }

    #[test]
    fn classic_finite_groups() {
        // S3, the quaternion group, A5 as a von Dyck group and a coset count.
        let s3 = pres(&["a", "b"], &["a^2", "b^3", "(a b)^2"]);
        assert_eq!(both(&s3, &[], 1000), (Some(6), Some(6)));
        let q8 = pres(&["a", "b"], &["a^4", "a^2 b^-2", "b^-1 a b a"]);
        assert_eq!(both(&q8, &[], 1000), (Some(8), Some(8)));
        let a5 = pres(&["a", "b"], &["a^2", "b^3", "(a b)^5"]);
        assert_eq!(both(&a5, &[], 10_000), (Some(60), Some(60)));
        let b = a5.parse("b").unwrap();
        assert_eq!(both(&a5, &[b], 10_000), (Some(20), Some(20)));
        // F(2,5) is cyclic of order 11.
        let f25 = pres(
            &["a", "b", "c", "d", "e"],
            &["a b c^-1", "b c d^-1", "c d e^-1", "d e a^-1", "e a b^-1"],
        );
        assert_eq!(both(&f25, &[], 10_000), (Some(11), Some(11)));
    }

    #[test]
    fn table_closes_and_dumps() {
        let s3 = pres(&["a", "b"], &["a^2", "b^3", "(a b)^2"]);
        let r = enumerate(&s3, &[], 100, Strategy::Hlt).unwrap();
        let t = r.table.unwrap();
        for rel in s3.relators() {
            for c in 0..t.index() {
                assert_eq!(t.trace(c, rel), c);
            }
        }
        let dump = t.dump();
        assert_eq!(dump.lines().count(), 7);
        assert!(dump.starts_with("# a a' b b'"));
    }

    #[test]
    fn small_higman_groups_are_trivial() {
        for n in 1..=3 {
            let p = higman(n).unwrap();
            let r = enumerate(&p, &[], DEFAULT_MAX_COSETS, Strategy::Hlt).unwrap();
            assert_eq!(r.outcome, Outcome::Index(1), "Hig_{n}");
        }
    }

    #[test]
    fn higman4_exceeds_limit() {
        let r = enumerate(&higman(4).unwrap(), &[], 100_000, Strategy::Hlt).unwrap();
        assert_eq!(r.outcome, Outcome::LimitExceeded);
        assert!(r.max_live <= 100_000);
    }

    #[test]
    fn limit_monotonicity() {
        let a5 = pres(&["a", "b"], &["a^2", "b^3", "(a b)^5"]);
        let mut indices = Vec::new();
        for limit in [30, 60, 61, 100, 1000] {
            for s in [Strategy::Hlt, Strategy::Felsch] {
                if let Some(k) = enumerate(&a5, &[], limit, s).unwrap().index() {
                    indices.push(k);
                }
            }
        }
        assert!(!indices.is_empty());
        assert!(indices.iter().all(|&k| k == 60));
    }

    #[test]
    fn errors() {
        let p = pres(&["a"], &["a^5"]);
        assert_eq!(enumerate(&p, &[], 0, Strategy::Hlt).unwrap_err(), EnumError::ZeroLimit);
        let other = Alphabet::new(["b"]).unwrap();
        let w = Word::generator(&other, 0);
        assert_eq!(
            enumerate(&p, &[w], 10, Strategy::Hlt).unwrap_err(),
            EnumError::AlphabetMismatch
        );
    }

    #[test]
    fn deterministic() {
        let p = add_relators(&gn(3).unwrap(), &[]).unwrap();
        let a = enumerate(&p, &[], 100_000, Strategy::Felsch).unwrap();
        let b = enumerate(&p, &[], 100_000, Strategy::Felsch).unwrap();
        assert_eq!(a.cosets_defined, b.cosets_defined);
        assert_eq!(a.table, b.table);
    }
}
