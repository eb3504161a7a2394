//! One-level amalgamated free products over free abelian subgroups, with
//! exact normal forms built on the factor models, plus Britton reduction
//! for `BS(1,2)` as an HNN extension of `⟨x⟩`.
//!
//! A normal form is `embed(head)·r₁·…·r_k` where the `r_i` are non-trivial
//! transversal representatives from alternating factors. Multiplication on
//! the right absorbs into the last syllable when the sides agree, then
//! pushes the subgroup part leftward through every syllable into the head.

use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::exact_models::{
    eval, free_matrix, Bs12Model, Dyadic, HeisElement, HeisModel, LElement, LModel, Model, ModelError,
    Vec2, Z2Model, ZxF2Element, ZxF2Model,
};
use crate::word::{parse_word, random_word, Alphabet, Letter, Word, WordError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AmalgamError {
    #[error("generator `{0}` is not in the instance alphabet")]
    UnknownGenerator(String),
    #[error("shared generator `{0}` is not identified consistently by the two factors")]
    BadIdentification(String),
    #[error("letter list is empty")]
    NoLetters,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Word(#[from] WordError),
}

/// A factor group together with a free abelian subgroup and a right
/// transversal for it: `g = embed(c)·r`.
pub trait Factor: Model {
    fn rank(&self) -> usize;
    fn embed(&self, coords: &[i64]) -> Self::Element;
    fn decompose(&self, g: &Self::Element) -> (Vec<i64>, Self::Element);
}

/// `L` over `⟨h, v⟩`, transversal `(t, 0, w)` with zero `v`-exponent in `w`.
#[derive(Debug, Clone, Default)]
pub struct LFactor {
    model: LModel,
}

impl Model for LFactor {
    type Element = LElement;
    fn alphabet(&self) -> &Arc<Alphabet> {
        self.model.alphabet()
    }
    fn identity(&self) -> LElement {
        self.model.identity()
    }
    fn multiply(&self, a: &LElement, b: &LElement) -> LElement {
        self.model.multiply(a, b)
    }
    fn inverse(&self, a: &LElement) -> LElement {
        self.model.inverse(a)
    }
    fn generator(&self, gen: usize) -> LElement {
        self.model.generator(gen)
    }
}

impl Factor for LFactor {
    fn rank(&self) -> usize {
        2
    }

    fn embed(&self, c: &[i64]) -> LElement {
        LElement {
            t: Vec2::zero(),
            a: c[0],
            w: Word::generator(self.model.free(), 1).pow(c[1]),
        }
    }

    fn decompose(&self, g: &LElement) -> (Vec<i64>, LElement) {
        let m = g.w.exponent_sum(1);
        let vm = Word::generator(self.model.free(), 1).pow(-m);
        let t = free_matrix(&vm).apply(&g.t).mul_pow2(-g.a);
        let w = vm.concat(&g.w).expect("free alphabet");
        (vec![g.a, m], LElement { t, a: 0, w })
    }
}

/// Which subgroup of a Heisenberg factor is amalgamated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeisSubgroup {
    /// `⟨α, ζ⟩`, transversal `{β^q}`.
    AlphaZeta,
    /// `⟨α⟩`, transversal `{β^q ζ^r}`.
    Alpha,
}

#[derive(Debug, Clone)]
pub struct HeisFactor {
    model: HeisModel,
    sub: HeisSubgroup,
}

impl HeisFactor {
    pub fn new(alpha: &str, beta: &str, zeta: &str, sub: HeisSubgroup) -> Result<HeisFactor, ModelError> {
        Ok(HeisFactor {
            model: HeisModel::new(alpha, beta, zeta)?,
            sub,
        })
    }
}

impl Model for HeisFactor {
    type Element = HeisElement;
    fn alphabet(&self) -> &Arc<Alphabet> {
        self.model.alphabet()
    }
    fn identity(&self) -> HeisElement {
        self.model.identity()
    }
    fn multiply(&self, a: &HeisElement, b: &HeisElement) -> HeisElement {
        self.model.multiply(a, b)
    }
    fn inverse(&self, a: &HeisElement) -> HeisElement {
        self.model.inverse(a)
    }
    fn generator(&self, gen: usize) -> HeisElement {
        self.model.generator(gen)
    }
}

impl Factor for HeisFactor {
    fn rank(&self) -> usize {
        match self.sub {
            HeisSubgroup::AlphaZeta => 2,
            HeisSubgroup::Alpha => 1,
        }
    }

    fn embed(&self, c: &[i64]) -> HeisElement {
        match self.sub {
            HeisSubgroup::AlphaZeta => HeisElement { p: c[0], q: 0, r: c[1] },
            HeisSubgroup::Alpha => HeisElement { p: c[0], q: 0, r: 0 },
        }
    }

    fn decompose(&self, g: &HeisElement) -> (Vec<i64>, HeisElement) {
        // (p, 0, r)·(0, q, 0) = (p, q, r) and (p, 0, 0)·(0, q, r) = (p, q, r).
        match self.sub {
            HeisSubgroup::AlphaZeta => (vec![g.p, g.r], HeisElement { p: 0, q: g.q, r: 0 }),
            HeisSubgroup::Alpha => (vec![g.p], HeisElement { p: 0, q: g.q, r: g.r }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BsSubgroup {
    /// `⟨x⟩`, transversal `(a, b)` with `0 ≤ b < 1`.
    Translations,
    /// `⟨h⟩`, transversal the translations `(0, b)`.
    Dilations,
}

#[derive(Debug, Clone)]
pub struct BsFactor {
    model: Bs12Model,
    sub: BsSubgroup,
}

impl BsFactor {
    pub fn new(x: &str, h: &str, sub: BsSubgroup) -> Result<BsFactor, ModelError> {
        Ok(BsFactor {
            model: Bs12Model::with_names(x, h)?,
            sub,
        })
    }
}

impl Model for BsFactor {
    type Element = crate::exact_models::BsElement;
    fn alphabet(&self) -> &Arc<Alphabet> {
        self.model.alphabet()
    }
    fn identity(&self) -> Self::Element {
        self.model.identity()
    }
    fn multiply(&self, a: &Self::Element, b: &Self::Element) -> Self::Element {
        self.model.multiply(a, b)
    }
    fn inverse(&self, a: &Self::Element) -> Self::Element {
        self.model.inverse(a)
    }
    fn generator(&self, gen: usize) -> Self::Element {
        self.model.generator(gen)
    }
}

impl Factor for BsFactor {
    fn rank(&self) -> usize {
        1
    }

    fn embed(&self, c: &[i64]) -> Self::Element {
        use crate::exact_models::BsElement;
        match self.sub {
            BsSubgroup::Translations => BsElement {
                a: 0,
                b: Dyadic::from_int(c[0]),
            },
            BsSubgroup::Dilations => BsElement {
                a: c[0],
                b: Dyadic::zero(),
            },
        }
    }

    fn decompose(&self, g: &Self::Element) -> (Vec<i64>, Self::Element) {
        use crate::exact_models::BsElement;
        match self.sub {
            BsSubgroup::Translations => {
                let k = g.b.floor();
                let b = &g.b - &Dyadic::from_int(k.clone());
                let k: i64 = k.try_into().expect("translation part fits in i64");
                (vec![k], BsElement { a: g.a, b })
            }
            BsSubgroup::Dilations => (
                vec![g.a],
                BsElement {
                    a: 0,
                    b: g.b.mul_pow2(-g.a),
                },
            ),
        }
    }
}

/// `Z²` on `(g₁, g₂)` over `⟨g₁⟩`, transversal `{g₂^q}`.
#[derive(Debug, Clone)]
pub struct Z2Factor {
    model: Z2Model,
}

impl Z2Factor {
    pub fn new(g1: &str, g2: &str) -> Result<Z2Factor, ModelError> {
        Ok(Z2Factor {
            model: Z2Model::new(g1, g2)?,
        })
    }
}

impl Model for Z2Factor {
    type Element = (i64, i64);
    fn alphabet(&self) -> &Arc<Alphabet> {
        self.model.alphabet()
    }
    fn identity(&self) -> (i64, i64) {
        (0, 0)
    }
    fn multiply(&self, a: &(i64, i64), b: &(i64, i64)) -> (i64, i64) {
        self.model.multiply(a, b)
    }
    fn inverse(&self, a: &(i64, i64)) -> (i64, i64) {
        self.model.inverse(a)
    }
    fn generator(&self, gen: usize) -> (i64, i64) {
        self.model.generator(gen)
    }
}

impl Factor for Z2Factor {
    fn rank(&self) -> usize {
        1
    }
    fn embed(&self, c: &[i64]) -> (i64, i64) {
        (c[0], 0)
    }
    fn decompose(&self, g: &(i64, i64)) -> (Vec<i64>, (i64, i64)) {
        (vec![g.0], (0, g.1))
    }
}

/// `⟨h⟩ × F(u, v)` over `⟨h, v⟩`, transversal `(0, w)` with zero `v`-exponent.
#[derive(Debug, Clone)]
pub struct ZxF2Factor {
    model: ZxF2Model,
}

impl ZxF2Factor {
    pub fn new(h: &str, u: &str, v: &str) -> Result<ZxF2Factor, ModelError> {
        Ok(ZxF2Factor {
            model: ZxF2Model::new(h, u, v)?,
        })
    }
}

impl Model for ZxF2Factor {
    type Element = ZxF2Element;
    fn alphabet(&self) -> &Arc<Alphabet> {
        self.model.alphabet()
    }
    fn identity(&self) -> ZxF2Element {
        self.model.identity()
    }
    fn multiply(&self, a: &ZxF2Element, b: &ZxF2Element) -> ZxF2Element {
        self.model.multiply(a, b)
    }
    fn inverse(&self, a: &ZxF2Element) -> ZxF2Element {
        self.model.inverse(a)
    }
    fn generator(&self, gen: usize) -> ZxF2Element {
        self.model.generator(gen)
    }
}

impl Factor for ZxF2Factor {
    fn rank(&self) -> usize {
        2
    }

    fn embed(&self, c: &[i64]) -> ZxF2Element {
        ZxF2Element {
            a: c[0],
            w: Word::generator(self.model.free(), 1).pow(c[1]),
        }
    }

    fn decompose(&self, g: &ZxF2Element) -> (Vec<i64>, ZxF2Element) {
        let m = g.w.exponent_sum(1);
        let vm = Word::generator(self.model.free(), 1).pow(-m);
        (
            vec![g.a, m],
            ZxF2Element {
                a: 0,
                w: vm.concat(&g.w).expect("free alphabet"),
            },
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    A,
    B,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Syllable<EA, EB> {
    A(EA),
    B(EB),
}

impl<EA, EB> Syllable<EA, EB> {
    pub fn side(&self) -> Side {
        match self {
            Syllable::A(_) => Side::A,
            Syllable::B(_) => Side::B,
        }
    }
}

/// `embed(head)·r₁·…·r_k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AmalgamNormalForm<EA, EB> {
    pub head: Vec<i64>,
    pub syllables: Vec<Syllable<EA, EB>>,
}

impl<EA, EB> AmalgamNormalForm<EA, EB> {
    pub fn is_identity(&self) -> bool {
        self.syllables.is_empty() && self.head.iter().all(|&c| c == 0)
    }
}

pub fn syllable_length<EA, EB>(nf: &AmalgamNormalForm<EA, EB>) -> usize {
    nf.syllables.len()
}

/// `A *_C B` with `C` free abelian, embedded in both factors by `embed`.
#[derive(Debug, Clone)]
pub struct Amalgam<A: Factor, B: Factor> {
    name: String,
    a: A,
    b: B,
    alphabet: Arc<Alphabet>,
    sides: Vec<(Side, usize)>,
}

pub type Nf<A, B> = AmalgamNormalForm<<A as Model>::Element, <B as Model>::Element>;

impl<A: Factor, B: Factor> Amalgam<A, B> {
    /// Generators are those of `A` followed by those of `B` not already
    /// named in `A`. A shared name must lie in the amalgamated subgroup of
    /// both factors with equal coordinates.
    pub fn new(name: &str, a: A, b: B) -> Result<Amalgam<A, B>, AmalgamError> {
        assert_eq!(a.rank(), b.rank(), "subgroup ranks differ");
        let mut names: Vec<String> = a.alphabet().names().to_vec();
        let mut sides: Vec<(Side, usize)> = (0..names.len()).map(|i| (Side::A, i)).collect();
        for (j, n) in b.alphabet().names().iter().enumerate() {
            match a.alphabet().lookup(n) {
                Some(i) => {
                    let (ca, ra) = a.decompose(&a.generator(i));
                    let (cb, rb) = b.decompose(&b.generator(j));
                    if ca != cb || !a.is_identity(&ra) || !b.is_identity(&rb) {
                        return Err(AmalgamError::BadIdentification(n.clone()));
                    }
                }
                None => {
                    names.push(n.clone());
                    sides.push((Side::B, j));
                }
            }
        }
        Ok(Amalgam {
            name: name.to_string(),
            a,
            b,
            alphabet: Alphabet::new(names)?,
            sides,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn factor_a(&self) -> &A {
        &self.a
    }

    pub fn factor_b(&self) -> &B {
        &self.b
    }

    pub fn identity(&self) -> Nf<A, B> {
        AmalgamNormalForm {
            head: vec![0; self.a.rank()],
            syllables: Vec::new(),
        }
    }

    fn push_left(&self, nf: &mut Nf<A, B>, upto: usize, mut c: Vec<i64>) {
        for syl in nf.syllables[..upto].iter_mut().rev() {
            if c.iter().all(|&x| x == 0) {
                return;
            }
            match syl {
                Syllable::A(r) => {
                    let (c2, r2) = self.a.decompose(&self.a.multiply(r, &self.a.embed(&c)));
                    *r = r2;
                    c = c2;
                }
                Syllable::B(r) => {
                    let (c2, r2) = self.b.decompose(&self.b.multiply(r, &self.b.embed(&c)));
                    *r = r2;
                    c = c2;
                }
            }
        }
        for (h, x) in nf.head.iter_mut().zip(c) {
            *h += x;
        }
    }

    pub fn mul_a(&self, nf: &mut Nf<A, B>, g: &A::Element) {
        let g = match nf.syllables.last() {
            Some(Syllable::A(_)) => match nf.syllables.pop() {
                Some(Syllable::A(r)) => self.a.multiply(&r, g),
                _ => unreachable!(),
            },
            _ => g.clone(),
        };
        let (c, r) = self.a.decompose(&g);
        let k = nf.syllables.len();
        self.push_left(nf, k, c);
        if !self.a.is_identity(&r) {
            nf.syllables.push(Syllable::A(r));
        }
    }

    pub fn mul_b(&self, nf: &mut Nf<A, B>, g: &B::Element) {
        let g = match nf.syllables.last() {
            Some(Syllable::B(_)) => match nf.syllables.pop() {
                Some(Syllable::B(r)) => self.b.multiply(&r, g),
                _ => unreachable!(),
            },
            _ => g.clone(),
        };
        let (c, r) = self.b.decompose(&g);
        let k = nf.syllables.len();
        self.push_left(nf, k, c);
        if !self.b.is_identity(&r) {
            nf.syllables.push(Syllable::B(r));
        }
    }

    pub fn mul_letter(&self, nf: &mut Nf<A, B>, l: Letter) {
        let (side, i) = self.sides[l.gen as usize];
        let l = Letter::new(i, l.inverse);
        match side {
            Side::A => self.mul_a(nf, &self.a.letter(l)),
            Side::B => self.mul_b(nf, &self.b.letter(l)),
        }
    }

    /// Normal form of `w`, resolving generators by name.
    pub fn eval(&self, w: &Word) -> Result<Nf<A, B>, AmalgamError> {
        let map = resolve(&self.alphabet, w.alphabet())?;
        let mut nf = self.identity();
        for l in w.letters() {
            self.mul_letter(&mut nf, Letter::new(map[l.gen as usize], l.inverse));
        }
        Ok(nf)
    }

    /// Parse `text` over the instance alphabet and evaluate it.
    pub fn eval_str(&self, text: &str) -> Result<Nf<A, B>, AmalgamError> {
        self.eval(&parse_word(&self.alphabet, text)?)
    }

    pub fn multiply(&self, x: &Nf<A, B>, y: &Nf<A, B>) -> Nf<A, B> {
        let mut out = x.clone();
        self.mul_a(&mut out, &self.a.embed(&y.head));
        for s in &y.syllables {
            match s {
                Syllable::A(r) => self.mul_a(&mut out, r),
                Syllable::B(r) => self.mul_b(&mut out, r),
            }
        }
        out
    }

    pub fn inverse(&self, x: &Nf<A, B>) -> Nf<A, B> {
        let mut out = self.identity();
        for s in x.syllables.iter().rev() {
            match s {
                Syllable::A(r) => self.mul_a(&mut out, &self.a.inverse(r)),
                Syllable::B(r) => self.mul_b(&mut out, &self.b.inverse(r)),
            }
        }
        let neg: Vec<i64> = x.head.iter().map(|c| -c).collect();
        self.mul_a(&mut out, &self.a.embed(&neg));
        out
    }

    /// Sides alternate and every syllable is a non-trivial representative.
    pub fn is_valid(&self, nf: &Nf<A, B>) -> bool {
        if nf.head.len() != self.a.rank() {
            return false;
        }
        let zero = vec![0; self.a.rank()];
        let alternates = nf.syllables.windows(2).all(|w| w[0].side() != w[1].side());
        alternates
            && nf.syllables.iter().all(|s| match s {
                Syllable::A(r) => !self.a.is_identity(r) && self.a.decompose(r) == (zero.clone(), r.clone()),
                Syllable::B(r) => !self.b.is_identity(r) && self.b.decompose(r) == (zero.clone(), r.clone()),
            })
    }
}

fn resolve(target: &Alphabet, source: &Alphabet) -> Result<Vec<usize>, AmalgamError> {
    source
        .names()
        .iter()
        .map(|n| target.lookup(n).ok_or_else(|| AmalgamError::UnknownGenerator(n.clone())))
        .collect()
}

/// Rewrite `w` over `target`, matching generators by name.
pub fn rename_into(w: &Word, target: &Arc<Alphabet>) -> Result<Word, AmalgamError> {
    let map = resolve(target, w.alphabet())?;
    Ok(w.relabel(target, &map))
}

pub type InstanceJ = Amalgam<LFactor, HeisFactor>;
pub type InstanceHhalf = Amalgam<BsFactor, BsFactor>;
pub type InstanceQ = Amalgam<HeisFactor, Z2Factor>;
pub type InstanceT = Amalgam<HeisFactor, ZxF2Factor>;

/// `J = L *_{⟨h,v⟩} Heis(h, z, v)`.
pub fn instance_j() -> InstanceJ {
    let heis = HeisFactor::new("h", "z", "v", HeisSubgroup::AlphaZeta).unwrap();
    Amalgam::new("J", LFactor::default(), heis).unwrap()
}

/// `BS(1,2)_0 *_{x@0 = h@1} BS(1,2)_1` on `x@0, h@0, x@1, h@1`.
pub fn instance_hhalf() -> InstanceHhalf {
    let b0 = BsFactor::new("x@0", "h@0", BsSubgroup::Translations).unwrap();
    let b1 = BsFactor::new("x@1", "h@1", BsSubgroup::Dilations).unwrap();
    Amalgam::new("Hhalf", b0, b1).unwrap()
}

/// `Q = Heis(v, x, y) *_{⟨v⟩} ⟨v, z⟩`.
pub fn instance_q() -> InstanceQ {
    let heis = HeisFactor::new("v", "x", "y", HeisSubgroup::Alpha).unwrap();
    Amalgam::new("Q", heis, Z2Factor::new("v", "z").unwrap()).unwrap()
}

/// `T = Heis(h, z, v) *_{⟨h,v⟩} ⟨h⟩ × F(u, v)`.
pub fn instance_t() -> InstanceT {
    let heis = HeisFactor::new("h", "z", "v", HeisSubgroup::AlphaZeta).unwrap();
    Amalgam::new("T", heis, ZxF2Factor::new("h", "u", "v").unwrap()).unwrap()
}

/// Failure counts of one property-suite run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SuiteReport {
    pub instance: String,
    pub samples: usize,
    pub max_len: usize,
    pub seed: u64,
    pub homomorphism_failures: usize,
    pub inverse_failures: usize,
    pub embedding_failures: usize,
    pub alternation_failures: usize,
}

impl SuiteReport {
    pub fn failures(&self) -> usize {
        self.homomorphism_failures + self.inverse_failures + self.embedding_failures + self.alternation_failures
    }

    pub fn header() -> &'static str {
        "instance\tsamples\tmax_len\tseed\thom\tinverse\tembedding\talternation\tfailures"
    }

    pub fn row(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            self.instance,
            self.samples,
            self.max_len,
            self.seed,
            self.homomorphism_failures,
            self.inverse_failures,
            self.embedding_failures,
            self.alternation_failures,
            self.failures()
        )
    }
}

const CHUNK: usize = 256;

/// Deterministic RNG for chunk `i` of a run seeded with `seed`.
pub fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

impl<A, B> Amalgam<A, B>
where
    A: Factor + Sync,
    B: Factor + Sync,
{
    /// Homomorphism, inverse, factor-embedding and alternation invariants on
    /// `samples` random words of length at most `max_len`.
    pub fn property_suite(&self, samples: usize, max_len: usize, seed: u64) -> SuiteReport {
        let chunks = samples.div_ceil(CHUNK);
        let parts: Vec<SuiteReport> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let n = CHUNK.min(samples - c * CHUNK);
                self.suite_chunk(n, max_len, chunk_rng(seed, c as u64))
            })
            .collect();
        let mut r = SuiteReport {
            instance: self.name.clone(),
            samples,
            max_len,
            seed,
            ..SuiteReport::default()
        };
        for p in parts {
            r.homomorphism_failures += p.homomorphism_failures;
            r.inverse_failures += p.inverse_failures;
            r.embedding_failures += p.embedding_failures;
            r.alternation_failures += p.alternation_failures;
        }
        r
    }

    fn suite_chunk(&self, n: usize, max_len: usize, mut rng: ChaCha8Rng) -> SuiteReport {
        let mut r = SuiteReport::default();
        for _ in 0..n {
            let w1 = random_word(&self.alphabet, max_len, &mut rng);
            let w2 = random_word(&self.alphabet, max_len, &mut rng);
            let n1 = self.eval(&w1).expect("own alphabet");
            let n2 = self.eval(&w2).expect("own alphabet");
            let n12 = self.eval(&w1.concat(&w2).expect("own alphabet")).expect("own alphabet");
            let prod = self.multiply(&n1, &n2);
            if n12 != prod {
                r.homomorphism_failures += 1;
            }
            if !(self.is_valid(&n1) && self.is_valid(&n2) && self.is_valid(&n12) && self.is_valid(&prod)) {
                r.alternation_failures += 1;
            }
            let winv = self.eval(&w1.invert()).expect("own alphabet");
            if winv != self.inverse(&n1) || !self.multiply(&n1, &winv).is_identity() {
                r.inverse_failures += 1;
            }
            if !self.embedding_sample(&self.a, max_len, &mut rng)
                || !self.embedding_sample(&self.b, max_len, &mut rng)
            {
                r.embedding_failures += 1;
            }
        }
        r
    }

    /// A random factor word is trivial in the amalgam iff it is trivial in
    /// the factor.
    fn embedding_sample<F: Factor>(&self, f: &F, max_len: usize, rng: &mut ChaCha8Rng) -> bool {
        let w = random_word(f.alphabet(), max_len, rng);
        let in_factor = eval(f, &w).expect("factor alphabet");
        let nf = self
            .eval(&rename_into(&w, &self.alphabet).expect("factor names are instance names"))
            .expect("own alphabet");
        f.is_identity(&in_factor) == nf.is_identity()
    }

    /// Every nonempty reduced word of length at most `max_len` in `letters`
    /// is non-trivial.
    pub fn check_free(&self, letters: &[Word], max_len: usize) -> Result<FreenessReport, AmalgamError> {
        if letters.is_empty() {
            return Err(AmalgamError::NoLetters);
        }
        // Indexed by letter column: letter i, then its inverse.
        let mut images = Vec::with_capacity(2 * letters.len());
        for l in letters {
            let nf = self.eval(l)?;
            images.push(self.inverse(&nf));
            images.insert(images.len() - 1, nf);
        }
        let mut report = FreenessReport::default();
        let mut path = Vec::new();
        self.free_dfs(&images, &self.identity(), &mut path, max_len, &mut report);
        Ok(report)
    }

    fn free_dfs(
        &self,
        images: &[Nf<A, B>],
        cur: &Nf<A, B>,
        path: &mut Vec<Letter>,
        max_len: usize,
        report: &mut FreenessReport,
    ) {
        if path.len() == max_len || report.witness.is_some() {
            return;
        }
        for col in 0..images.len() {
            let l = Letter::from_column(col);
            if path.last().is_some_and(|&p| p == l.inv()) {
                continue;
            }
            let next = self.multiply(cur, &images[col]);
            path.push(l);
            report.words_checked += 1;
            if next.is_identity() {
                report.witness = Some(path.clone());
                path.pop();
                return;
            }
            self.free_dfs(images, &next, path, max_len, report);
            path.pop();
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FreenessReport {
    pub words_checked: u64,
    /// A nonempty reduced word in the letters that is trivial; letter `i`
    /// is generator `i`.
    pub witness: Option<Vec<Letter>>,
}

impl FreenessReport {
    pub fn is_free(&self) -> bool {
        self.witness.is_none()
    }
}

/// `t = x@0⁻¹ x@1 h@0 x@1⁻¹ x@0` in `Hhalf`.
pub fn hhalf_blocking_element(h: &InstanceHhalf) -> Word {
    parse_word(h.alphabet(), "x@0^-1 x@1 h@0 x@1^-1 x@0").unwrap()
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QtReport {
    pub samples: usize,
    pub max_len: usize,
    pub seed: u64,
    /// Samples whose `Q` normal form was trivial.
    pub trivial_in_q: usize,
    pub violations: Vec<Word>,
}

impl QtReport {
    pub fn header() -> &'static str {
        "samples\tmax_len\tseed\ttrivial_in_q\tviolations"
    }

    pub fn row(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}\t{}",
            self.samples,
            self.max_len,
            self.seed,
            self.trivial_in_q,
            self.violations.len()
        )
    }
}

/// The letterwise map `v, x, y, z ↦ h, z, v, u` from `Q` words to `T` words.
pub fn phi_q_to_t(q: &InstanceQ, t: &InstanceT, w: &Word) -> Result<Word, AmalgamError> {
    let mut images = vec![Word::identity(t.alphabet()); q.alphabet().len()];
    for (from, to) in [("v", "h"), ("x", "z"), ("y", "v"), ("z", "u")] {
        let i = q.alphabet().lookup(from).expect("Q generator");
        images[i] = Word::named(t.alphabet(), to)?;
    }
    Ok(rename_into(w, q.alphabet())?.substitute(t.alphabet(), &images))
}

/// Compare triviality in `Q` and `T` on random words. Even samples are
/// uniform random words; odd samples are products of conjugates of the
/// defining relations of `Q` (trivial by construction), to exercise the
/// trivial side of the equivalence.
pub fn check_qt_iso(samples: usize, max_len: usize, seed: u64) -> QtReport {
    let q = instance_q();
    let t = instance_t();
    let al = q.alphabet().clone();
    let relators: Vec<Word> = ["[v, x] y^-1", "[y, v]", "[y, x]", "[v, z]"]
        .iter()
        .map(|s| parse_word(&al, s).unwrap())
        .collect();
    let chunks = samples.div_ceil(CHUNK);
    let parts: Vec<(usize, Vec<Word>)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c as u64);
            let n = CHUNK.min(samples - c * CHUNK);
            let mut trivial = 0;
            let mut bad = Vec::new();
            for i in 0..n {
                let w = if i % 2 == 0 {
                    random_word(&al, max_len, &mut rng)
                } else {
                    relator_product(&al, &relators, max_len, &mut rng)
                };
                let in_q = q.eval(&w).unwrap().is_identity();
                let in_t = t.eval(&phi_q_to_t(&q, &t, &w).unwrap()).unwrap().is_identity();
                trivial += in_q as usize;
                if in_q != in_t {
                    bad.push(w);
                }
            }
            (trivial, bad)
        })
        .collect();
    let mut report = QtReport {
        samples,
        max_len,
        seed,
        ..QtReport::default()
    };
    for (t, b) in parts {
        report.trivial_in_q += t;
        report.violations.extend(b);
    }
    report
}

fn relator_product(al: &Arc<Alphabet>, relators: &[Word], max_len: usize, rng: &mut ChaCha8Rng) -> Word {
    use rand::Rng;
    let mut w = Word::identity(al);
    for _ in 0..3 {
        let r = &relators[rng.gen_range(0..relators.len())];
        let r = if rng.gen_bool(0.5) { r.clone() } else { r.invert() };
        let c = random_word(al, max_len / 4, rng);
        w = w
            .concat(&c)
            .and_then(|x| x.concat(&r))
            .and_then(|x| x.concat(&c.invert()))
            .expect("same alphabet");
    }
    w
}

/// Syllable of a Britton form for `BS(1,2)`: `x^k` or `h^e`, never zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BrittonSyllable {
    Base(i64),
    Stable(i64),
}

/// Pinch-free word for an element of `BS(1,2) = ⟨x, h | h x h⁻¹ = x²⟩`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct BrittonForm {
    pub syllables: Vec<BrittonSyllable>,
}

impl BrittonForm {
    pub fn is_identity(&self) -> bool {
        self.syllables.is_empty()
    }

    pub fn len(&self) -> usize {
        self.syllables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.syllables.is_empty()
    }

    fn push_base(&mut self, k: i64) {
        if k == 0 {
            return;
        }
        if let Some(BrittonSyllable::Base(j)) = self.syllables.last_mut() {
            *j += k;
            if *j == 0 {
                self.syllables.pop();
            }
        } else {
            self.syllables.push(BrittonSyllable::Base(k));
        }
    }

    fn push_stable(&mut self, e: i64) {
        let n = self.syllables.len();
        if let [.., BrittonSyllable::Stable(s), BrittonSyllable::Base(k)] = self.syllables[..] {
            // h x^k h⁻¹ = x^{2k};  h⁻¹ x^{2j} h = x^j.
            let pinched = if s > 0 && e < 0 {
                Some(2 * k)
            } else if s < 0 && e > 0 && k % 2 == 0 {
                Some(k / 2)
            } else {
                None
            };
            if let Some(base) = pinched {
                self.syllables.truncate(n - 2);
                let rest = s + e.signum();
                if rest != 0 {
                    self.syllables.push(BrittonSyllable::Stable(rest));
                }
                self.push_base(base);
                return;
            }
        }
        if let Some(BrittonSyllable::Stable(s)) = self.syllables.last_mut() {
            *s += e;
            if *s == 0 {
                self.syllables.pop();
            }
        } else {
            self.syllables.push(BrittonSyllable::Stable(e));
        }
    }
}

impl fmt::Display for BrittonForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.syllables.is_empty() {
            return f.write_str("1");
        }
        let parts: Vec<String> = self
            .syllables
            .iter()
            .map(|s| match s {
                BrittonSyllable::Base(k) => format!("x^{k}"),
                BrittonSyllable::Stable(e) => format!("h^{e}"),
            })
            .collect();
        f.write_str(&parts.join(" "))
    }
}

/// `BS(1,2)` as the HNN extension of `⟨x⟩` by `h` with `x ↦ x²`.
#[derive(Debug, Clone)]
pub struct HnnInstance {
    alphabet: Arc<Alphabet>,
}

impl HnnInstance {
    pub fn bs12() -> HnnInstance {
        HnnInstance {
            alphabet: Alphabet::new(["x", "h"]).unwrap(),
        }
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }
}

/// Britton reduction of `w` over `{x, h}`, one letter at a time.
pub fn hnn_eval(instance: &HnnInstance, w: &Word) -> Result<BrittonForm, AmalgamError> {
    let map = resolve(&instance.alphabet, w.alphabet())?;
    let mut form = BrittonForm::default();
    for l in w.letters() {
        match map[l.gen as usize] {
            0 => form.push_base(l.sign()),
            _ => form.push_stable(l.sign()),
        }
    }
    Ok(form)
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BrittonCheckReport {
    pub samples: usize,
    pub max_len: usize,
    pub seed: u64,
    pub trivial: usize,
    pub mismatches: Vec<Word>,
}

/// Britton emptiness against triviality in the affine model of `BS(1,2)`.
/// Odd samples are products of conjugates of `h x h⁻¹ x⁻²` so that trivial
/// words occur often.
pub fn britton_cross_check(samples: usize, max_len: usize, seed: u64) -> BrittonCheckReport {
    let inst = HnnInstance::bs12();
    let model = Bs12Model::new();
    let al = inst.alphabet().clone();
    let relator = parse_word(&al, "h x h^-1 x^-2").unwrap();
    let parts: Vec<(usize, Vec<Word>)> = (0..samples.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c as u64);
            let mut trivial = 0;
            let mut bad = Vec::new();
            for i in 0..CHUNK.min(samples - c * CHUNK) {
                let w = if i % 2 == 0 {
                    random_word(&al, max_len, &mut rng)
                } else {
                    relator_product(&al, std::slice::from_ref(&relator), max_len, &mut rng)
                };
                let empty = hnn_eval(&inst, &w).unwrap().is_identity();
                let affine = model.is_identity(&eval(&model, &w).unwrap());
                trivial += empty as usize;
                if empty != affine {
                    bad.push(w);
                }
            }
            (trivial, bad)
        })
        .collect();
    let mut r = BrittonCheckReport {
        samples,
        max_len,
        seed,
        ..BrittonCheckReport::default()
    };
    for (t, b) in parts {
        r.trivial += t;
        r.mismatches.extend(b);
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_models::{BsElement, Bs12Model};

    #[test]
    fn hhalf_examples() {
        let h = instance_hhalf();
        assert!(h.eval_str("x@0 h@1^-1").unwrap().is_identity());
        let nf = h.eval_str("h@0 x@1 h@0").unwrap();
        assert_eq!(syllable_length(&nf), 3);
        assert_eq!(syllable_length(&h.identity()), 0);
        assert_eq!(syllable_length(&h.eval_str("h@0").unwrap()), 1);
        assert_eq!(syllable_length(&h.eval_str("x@0").unwrap()), 0);
    }

    #[test]
    fn j_q_t_examples() {
        let j = instance_j();
        assert!(j.eval_str("[h, z] v^-1").unwrap().is_identity());
        assert!(j.eval_str("z v z^-1 v^-1").unwrap().is_identity());
        assert!(j.eval_str("[h, x] x^-1").unwrap().is_identity());
        assert!(!j.eval_str("[z, x]").unwrap().is_identity());
        let q = instance_q();
        assert!(q.eval_str("[v, x] y^-1").unwrap().is_identity());
        let t = instance_t();
        assert!(t.eval_str("[h, u]").unwrap().is_identity());
        assert!(!t.eval_str("[z, u]").unwrap().is_identity());
        assert_eq!(
            j.eval_str("q").unwrap_err(),
            AmalgamError::Word(WordError::UnknownGenerator { name: "q".into(), pos: 0 })
        );
    }

    #[test]
    fn bad_identification_is_rejected() {
        let heis = HeisFactor::new("z", "h", "v", HeisSubgroup::AlphaZeta).unwrap();
        assert_eq!(
            Amalgam::new("bad", LFactor::default(), heis).unwrap_err(),
            AmalgamError::BadIdentification("h".into())
        );
    }

    #[test]
    fn transversal_laws() {
        let f = BsFactor::new("x", "h", BsSubgroup::Translations).unwrap();
        let g = BsElement {
            a: 3,
            b: Dyadic::new(-7, 2),
        };
        let (c, r) = f.decompose(&g);
        assert_eq!(c, vec![-2]);
        assert_eq!(f.multiply(&f.embed(&c), &r), g);
        let l = LFactor::default();
        let mut rng = chunk_rng(5, 0);
        for _ in 0..500 {
            let w = random_word(l.alphabet(), 20, &mut rng);
            let g = eval(&l, &w).unwrap();
            let (c, r) = l.decompose(&g);
            assert_eq!(l.multiply(&l.embed(&c), &r), g);
            assert_eq!(l.decompose(&r), (vec![0, 0], r.clone()));
            let shifted = l.multiply(&l.embed(&[2, -3]), &g);
            assert_eq!(l.decompose(&shifted).1, r);
            assert_eq!(l.decompose(&l.embed(&c)), (c.clone(), l.identity()));
        }
    }

    #[test]
    fn property_suites_small() {
        for r in [
            instance_j().property_suite(500, 20, 1),
            instance_hhalf().property_suite(500, 20, 2),
            instance_q().property_suite(500, 20, 3),
            instance_t().property_suite(500, 20, 4),
        ] {
            assert_eq!(r.failures(), 0, "{}", r.row());
        }
    }

    #[test]
    fn suite_is_deterministic() {
        let a = instance_q().property_suite(300, 10, 77);
        assert_eq!(a, instance_q().property_suite(300, 10, 77));
        assert!(a.row().starts_with("Q\t300\t10\t77"));
    }

    #[test]
    fn freeness() {
        let h = instance_hhalf();
        let gens = [Word::named(h.alphabet(), "h@0").unwrap(), Word::named(h.alphabet(), "x@1").unwrap()];
        let r = h.check_free(&gens, 6).unwrap();
        assert!(r.is_free());
        assert_eq!(r.words_checked, 4 * (1 + 3 + 9 + 27 + 81 + 243));
        let j = instance_j();
        let hv = [Word::named(j.alphabet(), "h").unwrap(), Word::named(j.alphabet(), "v").unwrap()];
        let r = j.check_free(&hv, 4).unwrap();
        assert!(!r.is_free());
        assert_eq!(r.witness.unwrap().len(), 4);
        assert_eq!(h.check_free(&[], 3).unwrap_err(), AmalgamError::NoLetters);
    }

    #[test]
    fn qt_examples() {
        let q = instance_q();
        let t = instance_t();
        for (s, trivial) in [("[v, x] y^-1", true), ("z v z^-1 v^-1", true), ("x", false)] {
            let w = parse_word(q.alphabet(), s).unwrap();
            assert_eq!(q.eval(&w).unwrap().is_identity(), trivial);
            let tw = phi_q_to_t(&q, &t, &w).unwrap();
            assert_eq!(t.eval(&tw).unwrap().is_identity(), trivial);
        }
        let w = parse_word(q.alphabet(), "v x y z").unwrap();
        assert_eq!(phi_q_to_t(&q, &t, &w).unwrap().to_string(), "h z v u");
        let r = check_qt_iso(1000, 20, 3);
        assert!(r.violations.is_empty());
        assert!(r.trivial_in_q >= 500);
    }

    #[test]
    fn britton_examples() {
        let inst = HnnInstance::bs12();
        let al = inst.alphabet().clone();
        let b = |s: &str| hnn_eval(&inst, &parse_word(&al, s).unwrap()).unwrap();
        assert_eq!(b("h x h^-1").syllables, vec![BrittonSyllable::Base(2)]);
        assert_eq!(b("h^-1 x^2 h").syllables, vec![BrittonSyllable::Base(1)]);
        let f = b("h^-1 x h");
        assert_eq!(f.len(), 3);
        assert_eq!(f.to_string(), "h^-1 x^1 h^1");
        assert!(b("h x h^-1 x^-2").is_identity());
        assert!(b("h^2 x h^-2 x^-4").is_identity());
    }

    #[test]
    fn britton_agrees_with_affine_model() {
        let inst = HnnInstance::bs12();
        let m = Bs12Model::new();
        let mut rng = chunk_rng(12, 0);
        let mut trivial = 0;
        for i in 0..5000 {
            let w = if i % 2 == 0 {
                random_word(inst.alphabet(), 30, &mut rng)
            } else {
                let a = random_word(inst.alphabet(), 6, &mut rng);
                let b = parse_word(inst.alphabet(), "h x h^-1 x^-2").unwrap();
                a.concat(&b).unwrap().concat(&a.invert()).unwrap()
            };
            let form = hnn_eval(&inst, &w).unwrap();
            let affine = eval(&m, &w).unwrap();
            assert_eq!(form.is_identity(), m.is_identity(&affine), "{w}");
            trivial += form.is_identity() as usize;
        }
        assert!(trivial >= 2500);
        let r = britton_cross_check(2000, 30, 8);
        assert!(r.mismatches.is_empty());
        assert!(r.trivial >= 1000);
    }
}
