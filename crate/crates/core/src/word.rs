//! Freely reduced words over named generator alphabets.
//!
//! Every `Word` carries a shared handle to its `Alphabet`; operations that
//! combine two words check that the alphabets agree instead of coercing.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Characters reserved by the word grammar.
pub const RESERVED: &[char] = &['^', '(', ')', '[', ']', ',', '*', ';', '='];

/// Identity token accepted by the parser and produced for the empty word.
pub const IDENTITY_TOKEN: &str = "1";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WordError {
    #[error("alphabet mismatch")]
    AlphabetMismatch,
    #[error("invalid generator name {0:?}")]
    InvalidName(String),
    #[error("duplicate generator name {0:?}")]
    DuplicateName(String),
    #[error("unknown generator {name:?} at position {pos}")]
    UnknownGenerator { name: String, pos: usize },
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
}

/// An ordered list of distinct generator names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl Alphabet {
    pub fn new<I, S>(names: I) -> Result<Arc<Alphabet>, WordError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut out = Alphabet {
            names: Vec::new(),
            index: HashMap::new(),
        };
        for name in names {
            let name = name.into();
            if !valid_name(&name) {
                return Err(WordError::InvalidName(name));
            }
            if out.index.contains_key(&name) {
                return Err(WordError::DuplicateName(name));
            }
            out.index.insert(name.clone(), out.names.len());
            out.names.push(name);
        }
        Ok(Arc::new(out))
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, gen: usize) -> &str {
        &self.names[gen]
    }

    pub fn lookup(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }
}

pub fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && name != IDENTITY_TOKEN
        && !name.chars().any(|c| c.is_whitespace() || RESERVED.contains(&c))
}

pub fn same_alphabet(a: &Arc<Alphabet>, b: &Arc<Alphabet>) -> bool {
    Arc::ptr_eq(a, b) || a.names == b.names
}

/// A generator occurrence with exponent sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub gen: u32,
    pub inverse: bool,
}

impl Letter {
    pub fn new(gen: usize, inverse: bool) -> Letter {
        Letter {
            gen: gen as u32,
            inverse,
        }
    }

    pub fn pos(gen: usize) -> Letter {
        Letter::new(gen, false)
    }

    pub fn neg(gen: usize) -> Letter {
        Letter::new(gen, true)
    }

    pub fn inv(self) -> Letter {
        Letter {
            gen: self.gen,
            inverse: !self.inverse,
        }
    }

    pub fn sign(self) -> i64 {
        if self.inverse {
            -1
        } else {
            1
        }
    }

    /// Column index `2·gen + inverse`, the layout used by coset tables.
    pub fn column(self) -> usize {
        2 * self.gen as usize + self.inverse as usize
    }

    pub fn from_column(col: usize) -> Letter {
        Letter::new(col / 2, col % 2 == 1)
    }
}

/// Push `l` onto a reduced letter stack, cancelling against the top.
#[inline]
pub fn push_reduced(stack: &mut Vec<Letter>, l: Letter) {
    if stack.last() == Some(&l.inv()) {
        stack.pop();
    } else {
        stack.push(l);
    }
}

/// Free reduction of a raw letter sequence.
pub fn reduce_letters<I: IntoIterator<Item = Letter>>(raw: I) -> Vec<Letter> {
    let mut out = Vec::new();
    for l in raw {
        push_reduced(&mut out, l);
    }
    out
}

/// A freely reduced word. Reduction happens in every constructor.
#[derive(Clone)]
pub struct Word {
    alphabet: Arc<Alphabet>,
    letters: Vec<Letter>,
}

impl PartialEq for Word {
    fn eq(&self, other: &Self) -> bool {
        self.letters == other.letters && same_alphabet(&self.alphabet, &other.alphabet)
    }
}

impl Eq for Word {}

impl std::hash::Hash for Word {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.letters.hash(state);
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({})", self)
    }
}

impl Word {
    pub fn identity(alphabet: &Arc<Alphabet>) -> Word {
        Word {
            alphabet: alphabet.clone(),
            letters: Vec::new(),
        }
    }

    /// Free reduction of `raw`. Letters must index into `alphabet`.
    pub fn reduce<I: IntoIterator<Item = Letter>>(alphabet: &Arc<Alphabet>, raw: I) -> Word {
        let letters = reduce_letters(raw);
        debug_assert!(letters.iter().all(|l| (l.gen as usize) < alphabet.len()));
        Word {
            alphabet: alphabet.clone(),
            letters,
        }
    }

    pub fn generator(alphabet: &Arc<Alphabet>, gen: usize) -> Word {
        Word::reduce(alphabet, [Letter::pos(gen)])
    }

    /// Single-generator word by name.
    pub fn named(alphabet: &Arc<Alphabet>, name: &str) -> Result<Word, WordError> {
        let gen = alphabet
            .lookup(name)
            .ok_or_else(|| WordError::UnknownGenerator {
                name: name.to_string(),
                pos: 0,
            })?;
        Ok(Word::generator(alphabet, gen))
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    fn check(&self, other: &Word) -> Result<(), WordError> {
        if same_alphabet(&self.alphabet, &other.alphabet) {
            Ok(())
        } else {
            Err(WordError::AlphabetMismatch)
        }
    }

    pub fn concat(&self, other: &Word) -> Result<Word, WordError> {
        self.check(other)?;
        let mut letters = self.letters.clone();
        for &l in &other.letters {
            push_reduced(&mut letters, l);
        }
        Ok(Word {
            alphabet: self.alphabet.clone(),
            letters,
        })
    }

    pub fn invert(&self) -> Word {
        Word {
            alphabet: self.alphabet.clone(),
            letters: self.letters.iter().rev().map(|l| l.inv()).collect(),
        }
    }

    /// `[w1, w2] = w1 w2 w1⁻¹ w2⁻¹`.
    pub fn commutator(&self, other: &Word) -> Result<Word, WordError> {
        self.check(other)?;
        let raw = self
            .letters
            .iter()
            .chain(other.letters.iter())
            .copied()
            .chain(self.letters.iter().rev().map(|l| l.inv()))
            .chain(other.letters.iter().rev().map(|l| l.inv()));
        Ok(Word::reduce(&self.alphabet, raw.collect::<Vec<_>>()))
    }

    pub fn pow(&self, e: i64) -> Word {
        let base = if e < 0 { self.invert() } else { self.clone() };
        let mut letters = Vec::new();
        for _ in 0..e.unsigned_abs() {
            for &l in &base.letters {
                push_reduced(&mut letters, l);
            }
        }
        Word {
            alphabet: self.alphabet.clone(),
            letters,
        }
    }

    pub fn exponent_sum(&self, gen: usize) -> i64 {
        self.letters
            .iter()
            .filter(|l| l.gen as usize == gen)
            .map(|l| l.sign())
            .sum()
    }

    pub fn uses(&self, gen: usize) -> bool {
        self.letters.iter().any(|l| l.gen as usize == gen)
    }

    /// Replace each generator by a word over `target`.
    pub fn substitute(&self, target: &Arc<Alphabet>, images: &[Word]) -> Word {
        let mut letters = Vec::new();
        for l in &self.letters {
            let img = &images[l.gen as usize];
            if l.inverse {
                for &m in img.letters.iter().rev() {
                    push_reduced(&mut letters, m.inv());
                }
            } else {
                for &m in &img.letters {
                    push_reduced(&mut letters, m);
                }
            }
        }
        Word {
            alphabet: target.clone(),
            letters,
        }
    }

    /// Same letters over a different alphabet via a generator index map.
    pub fn relabel(&self, target: &Arc<Alphabet>, map: &[usize]) -> Word {
        Word::reduce(
            target,
            self.letters
                .iter()
                .map(|l| Letter::new(map[l.gen as usize], l.inverse))
                .collect::<Vec<_>>(),
        )
    }

    /// Conjugate-minimal cyclic reduction (strips matching ends).
    pub fn cyclically_reduced(&self) -> Word {
        let mut l = &self.letters[..];
        while l.len() >= 2 && l[0] == l[l.len() - 1].inv() {
            l = &l[1..l.len() - 1];
        }
        Word {
            alphabet: self.alphabet.clone(),
            letters: l.to_vec(),
        }
    }

    /// All cyclic rotations, as raw letter vectors.
    pub fn rotations(&self) -> impl Iterator<Item = Vec<Letter>> + '_ {
        let n = self.letters.len();
        (0..n.max(1)).map(move |k| {
            let mut v = self.letters[k.min(n)..].to_vec();
            v.extend_from_slice(&self.letters[..k.min(n)]);
            v
        })
    }

    pub fn from_letters_unchecked(alphabet: &Arc<Alphabet>, letters: Vec<Letter>) -> Word {
        Word::reduce(alphabet, letters)
    }
}

impl fmt::Display for Word {
    /// Run-length form: `a^2 b^-1 c`. The identity prints as `1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return f.write_str(IDENTITY_TOKEN);
        }
        let mut first = true;
        let mut i = 0;
        while i < self.letters.len() {
            let l = self.letters[i];
            let mut j = i;
            while j < self.letters.len() && self.letters[j] == l {
                j += 1;
            }
            let run = (j - i) as i64 * l.sign();
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            f.write_str(self.alphabet.name(l.gen as usize))?;
            if run != 1 {
                write!(f, "^{}", run)?;
            }
            i = j;
        }
        Ok(())
    }
}

pub fn print_word(w: &Word) -> String {
    w.to_string()
}

/// A freely reduced word whose length is uniform in `0..=max_len`, each
/// letter uniform among those that do not cancel its predecessor.
pub fn random_word<R: rand::Rng + ?Sized>(alphabet: &Arc<Alphabet>, max_len: usize, rng: &mut R) -> Word {
    let cols = 2 * alphabet.len();
    if cols == 0 {
        return Word::identity(alphabet);
    }
    let len = rng.gen_range(0..=max_len);
    let mut letters: Vec<Letter> = Vec::with_capacity(len);
    while letters.len() < len {
        let l = Letter::from_column(rng.gen_range(0..cols));
        if letters.last().map_or(true, |&p| p != l.inv()) {
            letters.push(l);
        }
    }
    Word {
        alphabet: alphabet.clone(),
        letters,
    }
}

/// Parse a word in the presentation-file grammar:
///
/// ```text
/// word := term+
/// term := atom ('^' int)?
/// atom := gen | '(' word ')' | '[' word ',' word ']' | '1'
/// ```
///
/// Generator names inside a whitespace-free run are matched greedily by
/// longest known name, so `ab` reads as `a b` when `ab` is not itself a
/// generator.
pub fn parse_word(alphabet: &Arc<Alphabet>, text: &str) -> Result<Word, WordError> {
    let mut p = Parser {
        alphabet,
        src: text,
        pos: 0,
    };
    p.skip_ws();
    if p.at_end() {
        return Err(p.err("empty word"));
    }
    let letters = p.word()?;
    p.skip_ws();
    if !p.at_end() {
        return Err(p.err("unexpected character"));
    }
    Ok(Word::reduce(alphabet, letters))
}

struct Parser<'a> {
    alphabet: &'a Arc<Alphabet>,
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> WordError {
        WordError::Syntax {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn word(&mut self) -> Result<Vec<Letter>, WordError> {
        let mut out = Vec::new();
        loop {
            self.skip_ws();
            match self.peek() {
                None | Some(')') | Some(']') | Some(',') => break,
                _ => {
                    let t = self.term()?;
                    for l in t {
                        push_reduced(&mut out, l);
                    }
                }
            }
        }
        Ok(out)
    }

    fn term(&mut self) -> Result<Vec<Letter>, WordError> {
        let atom = self.atom()?;
        self.skip_ws();
        if self.peek() == Some('^') {
            self.pos += 1;
            self.skip_ws();
            let e = self.int()?;
            let mut out = Vec::new();
            let base: Vec<Letter> = if e < 0 {
                atom.iter().rev().map(|l| l.inv()).collect()
            } else {
                atom
            };
            for _ in 0..e.unsigned_abs() {
                for &l in &base {
                    push_reduced(&mut out, l);
                }
            }
            Ok(out)
        } else {
            Ok(atom)
        }
    }

    fn int(&mut self) -> Result<i64, WordError> {
        let start = self.pos;
        let rest = self.rest();
        let mut len = 0;
        for (i, c) in rest.char_indices() {
            if (i == 0 && (c == '-' || c == '+')) || c.is_ascii_digit() {
                len = i + c.len_utf8();
            } else {
                break;
            }
        }
        let s = &rest[..len];
        let v = s.parse::<i64>().map_err(|_| WordError::Syntax {
            pos: start,
            msg: "expected integer exponent".into(),
        })?;
        self.pos += len;
        Ok(v)
    }

    fn atom(&mut self) -> Result<Vec<Letter>, WordError> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let w = self.word()?;
                self.skip_ws();
                if self.peek() != Some(')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(w)
            }
            Some('[') => {
                self.pos += 1;
                let a = self.word()?;
                self.skip_ws();
                if self.peek() != Some(',') {
                    return Err(self.err("expected ','"));
                }
                self.pos += 1;
                let b = self.word()?;
                self.skip_ws();
                if self.peek() != Some(']') {
                    return Err(self.err("expected ']'"));
                }
                self.pos += 1;
                let raw = a
                    .iter()
                    .chain(b.iter())
                    .copied()
                    .chain(a.iter().rev().map(|l| l.inv()))
                    .chain(b.iter().rev().map(|l| l.inv()));
                Ok(reduce_letters(raw))
            }
            Some(c) if RESERVED.contains(&c) => Err(self.err("unexpected character")),
            Some(_) => self.generator(),
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn generator(&mut self) -> Result<Vec<Letter>, WordError> {
        let rest = self.rest();
        let run_len = rest
            .char_indices()
            .find(|&(_, c)| c.is_whitespace() || RESERVED.contains(&c))
            .map(|(i, _)| i)
            .unwrap_or(rest.len());
        let run = &rest[..run_len];
        // Longest known name that prefixes the run.
        let mut best: Option<(usize, usize)> = None;
        for (gen, name) in self.alphabet.names().iter().enumerate() {
            if run.starts_with(name.as_str()) && best.is_none_or(|(_, l)| name.len() > l) {
                best = Some((gen, name.len()));
            }
        }
        if run.starts_with(IDENTITY_TOKEN) && best.is_none() {
            self.pos += IDENTITY_TOKEN.len();
            return Ok(Vec::new());
        }
        match best {
            Some((gen, len)) => {
                self.pos += len;
                Ok(vec![Letter::pos(gen)])
            }
            None => Err(WordError::UnknownGenerator {
                name: run.to_string(),
                pos: self.pos,
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn abc() -> Arc<Alphabet> {
        Alphabet::new(["a", "b", "c"]).unwrap()
    }

    fn w(al: &Arc<Alphabet>, s: &str) -> Word {
        parse_word(al, s).unwrap()
    }

    #[test]
    fn reduce_examples() {
        let al = abc();
        let raw = [Letter::pos(0), Letter::pos(1), Letter::neg(1), Letter::pos(0)];
        assert_eq!(Word::reduce(&al, raw).letters(), &[Letter::pos(0); 2]);
        assert!(Word::reduce(&al, []).is_empty());
        let raw = [Letter::neg(0), Letter::pos(0), Letter::neg(0)];
        assert_eq!(Word::reduce(&al, raw).letters(), &[Letter::neg(0)]);
    }

    #[test]
    fn concat_invert_commutator() {
        let al = abc();
        assert_eq!(w(&al, "a b").concat(&w(&al, "b^-1 c")).unwrap(), w(&al, "a c"));
        assert_eq!(w(&al, "a").concat(&w(&al, "a")).unwrap(), w(&al, "a^2"));
        assert_eq!(w(&al, "a b^-1").invert(), w(&al, "b a^-1"));
        assert_eq!(w(&al, "a^3").invert(), w(&al, "a^-3"));
        let a = w(&al, "a");
        let b = w(&al, "b");
        let ab = a.commutator(&b).unwrap();
        assert_eq!(
            ab.letters(),
            &[Letter::pos(0), Letter::pos(1), Letter::neg(0), Letter::neg(1)]
        );
        assert!(a.commutator(&a).unwrap().is_empty());
        assert!(a.commutator(&Word::identity(&al)).unwrap().is_empty());
        assert_eq!(ab.exponent_sum(0), 0);
    }

    #[test]
    fn alphabet_mismatch_is_error() {
        let al = abc();
        let other = Alphabet::new(["a", "b"]).unwrap();
        let x = w(&al, "a");
        let y = parse_word(&other, "a").unwrap();
        assert_eq!(x.concat(&y), Err(WordError::AlphabetMismatch));
        assert_eq!(x.commutator(&y), Err(WordError::AlphabetMismatch));
    }

    #[test]
    fn exponent_sums() {
        let al = Alphabet::new(["u", "v"]).unwrap();
        assert_eq!(w(&al, "u v u^-1 v").exponent_sum(1), 2);
        assert_eq!(Word::identity(&al).exponent_sum(0), 0);
    }

    #[test]
    fn parse_examples() {
        let al = abc();
        assert_eq!(w(&al, "[a,b]").to_string(), "a b a^-1 b^-1");
        assert_eq!(w(&al, "a^-2").letters(), &[Letter::neg(0); 2]);
        assert_eq!(
            w(&al, "(ab)^2").letters(),
            &[Letter::pos(0), Letter::pos(1), Letter::pos(0), Letter::pos(1)]
        );
        assert!(w(&al, "1").is_empty());
        assert_eq!(w(&al, "[a, b c]^-1"), w(&al, "b c a c^-1 b^-1 a^-1"));
    }

    #[test]
    fn parse_errors() {
        let al = abc();
        assert!(matches!(
            parse_word(&al, "a d"),
            Err(WordError::UnknownGenerator { pos: 2, .. })
        ));
        assert!(matches!(parse_word(&al, "(a b"), Err(WordError::Syntax { .. })));
        assert!(matches!(parse_word(&al, "a^"), Err(WordError::Syntax { pos: 2, .. })));
        assert!(matches!(parse_word(&al, "[a b]"), Err(WordError::Syntax { .. })));
        assert!(matches!(parse_word(&al, ""), Err(WordError::Syntax { .. })));
    }

    #[test]
    fn longest_name_wins() {
        let al = Alphabet::new(["x@1", "x@10", "y"]).unwrap();
        assert_eq!(w(&al, "x@10").letters(), &[Letter::pos(1)]);
        assert_eq!(w(&al, "x@1y").letters(), &[Letter::pos(0), Letter::pos(2)]);
    }

    #[test]
    fn bad_names_rejected() {
        assert!(Alphabet::new(["a b"]).is_err());
        assert!(Alphabet::new(["a^"]).is_err());
        assert!(Alphabet::new(["1"]).is_err());
        assert!(Alphabet::new(["a", "a"]).is_err());
    }

    fn raw_letters(ngen: usize, max: usize) -> impl Strategy<Value = Vec<Letter>> {
        prop::collection::vec((0..ngen, any::<bool>()), 0..max)
            .prop_map(|v| v.into_iter().map(|(g, i)| Letter::new(g, i)).collect())
    }

    proptest! {
        #[test]
        fn reduce_is_idempotent(raw in raw_letters(3, 40)) {
            let al = abc();
            let once = Word::reduce(&al, raw.clone());
            prop_assert!(once.len() <= raw.len());
            prop_assert_eq!(Word::reduce(&al, once.letters().to_vec()), once.clone());
            prop_assert!(once.letters().windows(2).all(|p| p[0] != p[1].inv()));
        }

        #[test]
        fn group_laws(x in raw_letters(3, 20), y in raw_letters(3, 20), z in raw_letters(3, 20)) {
            let al = abc();
            let (x, y, z) = (Word::reduce(&al, x), Word::reduce(&al, y), Word::reduce(&al, z));
            prop_assert!(x.concat(&x.invert()).unwrap().is_empty());
            prop_assert_eq!(x.invert().invert(), x.clone());
            let l = x.concat(&y).unwrap().concat(&z).unwrap();
            let r = x.concat(&y.concat(&z).unwrap()).unwrap();
            prop_assert_eq!(l, r);
            let xy = x.concat(&y).unwrap();
            for g in 0..3 {
                prop_assert_eq!(xy.exponent_sum(g), x.exponent_sum(g) + y.exponent_sum(g));
            }
        }

        #[test]
        fn parse_print_roundtrip(raw in raw_letters(3, 30)) {
            let al = abc();
            let x = Word::reduce(&al, raw);
            prop_assert_eq!(parse_word(&al, &print_word(&x)).unwrap(), x);
        }
    }

    #[test]
    fn parse_print_roundtrip_bulk() {
        use rand::{Rng, SeedableRng};
        let al = Alphabet::new(["x@0", "x@1", "y@0", "E12@3"]).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            let len = rng.gen_range(0..25);
            let raw: Vec<Letter> = (0..len)
                .map(|_| Letter::new(rng.gen_range(0..4), rng.gen()))
                .collect();
            let x = Word::reduce(&al, raw);
            assert_eq!(parse_word(&al, &print_word(&x)).unwrap(), x);
        }
    }
}
