//! Exact models deciding the word problem in small building-block groups:
//! dyadic affine maps, the Heisenberg group, `BS(1,2)`, `L`, `Z²` and `Z × F₂`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::presentation::Presentation;
use crate::word::{Alphabet, Letter, Word, WordError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("generator `{0}` is not in the model alphabet")]
    UnknownGenerator(String),
    #[error("expected {expected} images, got {got}")]
    WrongArity { expected: usize, got: usize },
    #[error(transparent)]
    Word(#[from] WordError),
}

/// `numerator / 2^exponent`, numerator odd or zero, zero with exponent 0.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    numerator: BigInt,
    exponent: i64,
}

impl Dyadic {
    pub fn new(numerator: impl Into<BigInt>, exponent: i64) -> Dyadic {
        let mut n: BigInt = numerator.into();
        if n.is_zero() {
            return Dyadic::zero();
        }
        let mut e = exponent;
        let tz = n.trailing_zeros().unwrap_or(0) as i64;
        if tz > 0 {
            n >>= tz as usize;
            e -= tz;
        }
        Dyadic {
            numerator: n,
            exponent: e,
        }
    }

    pub fn zero() -> Dyadic {
        Dyadic {
            numerator: BigInt::zero(),
            exponent: 0,
        }
    }

    pub fn one() -> Dyadic {
        Dyadic::from_int(1)
    }

    pub fn from_int(n: impl Into<BigInt>) -> Dyadic {
        Dyadic::new(n, 0)
    }

    pub fn numerator(&self) -> &BigInt {
        &self.numerator
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.exponent <= 0
    }

    /// `self · 2^k`.
    pub fn mul_pow2(&self, k: i64) -> Dyadic {
        if self.is_zero() {
            return Dyadic::zero();
        }
        Dyadic {
            numerator: self.numerator.clone(),
            exponent: self.exponent - k,
        }
    }

    /// Numerator over the common denominator `2^e`, for `e ≥ self.exponent`.
    fn scaled(&self, e: i64) -> BigInt {
        &self.numerator << (e - self.exponent) as usize
    }

    pub fn floor(&self) -> BigInt {
        if self.exponent <= 0 {
            &self.numerator << (-self.exponent) as usize
        } else {
            self.numerator.div_floor(&(BigInt::one() << self.exponent as usize))
        }
    }
}

impl Default for Dyadic {
    fn default() -> Self {
        Dyadic::zero()
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponent <= 0 {
            write!(f, "{}", self.floor())
        } else {
            write!(f, "{}/2^{}", self.numerator, self.exponent)
        }
    }
}

impl Add for &Dyadic {
    type Output = Dyadic;
    fn add(self, other: &Dyadic) -> Dyadic {
        let e = self.exponent.max(other.exponent);
        Dyadic::new(self.scaled(e) + other.scaled(e), e)
    }
}

impl Sub for &Dyadic {
    type Output = Dyadic;
    fn sub(self, other: &Dyadic) -> Dyadic {
        self + &(-other)
    }
}

impl Neg for &Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic {
            numerator: -&self.numerator,
            exponent: self.exponent,
        }
    }
}

impl Mul for &Dyadic {
    type Output = Dyadic;
    fn mul(self, other: &Dyadic) -> Dyadic {
        Dyadic::new(&self.numerator * &other.numerator, self.exponent + other.exponent)
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let e = self.exponent.max(other.exponent);
        self.scaled(e).cmp(&other.scaled(e))
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A group given by an exact element type and named generators.
pub trait Model {
    type Element: Clone + PartialEq + fmt::Debug;

    fn alphabet(&self) -> &Arc<Alphabet>;
    fn identity(&self) -> Self::Element;
    fn multiply(&self, a: &Self::Element, b: &Self::Element) -> Self::Element;
    fn inverse(&self, a: &Self::Element) -> Self::Element;
    /// Image of generator `gen` of the model alphabet.
    fn generator(&self, gen: usize) -> Self::Element;

    fn is_identity(&self, a: &Self::Element) -> bool {
        *a == self.identity()
    }

    fn letter(&self, l: Letter) -> Self::Element {
        let g = self.generator(l.gen as usize);
        if l.inverse {
            self.inverse(&g)
        } else {
            g
        }
    }
}

/// Evaluate `w`, resolving its generators by name in the model alphabet.
pub fn eval<M: Model>(model: &M, w: &Word) -> Result<M::Element, ModelError> {
    let map = resolve(model.alphabet(), w.alphabet())?;
    let mut acc = model.identity();
    for &l in w.letters() {
        let g = model.letter(Letter::new(map[l.gen as usize], l.inverse));
        acc = model.multiply(&acc, &g);
    }
    Ok(acc)
}

fn resolve(target: &Alphabet, source: &Alphabet) -> Result<Vec<usize>, ModelError> {
    source
        .names()
        .iter()
        .map(|n| target.lookup(n).ok_or_else(|| ModelError::UnknownGenerator(n.clone())))
        .collect()
}

/// Every relator of `p`, with generator `i` replaced by `assignment[i]`,
/// evaluates to the identity.
pub fn check_relators<M: Model>(model: &M, p: &Presentation, assignment: &[Word]) -> Result<bool, ModelError> {
    if assignment.len() != p.num_generators() {
        return Err(ModelError::WrongArity {
            expected: p.num_generators(),
            got: assignment.len(),
        });
    }
    let images = assignment
        .iter()
        .map(|w| eval(model, w))
        .collect::<Result<Vec<_>, _>>()?;
    let inverses: Vec<_> = images.iter().map(|g| model.inverse(g)).collect();
    for r in p.relators() {
        let mut acc = model.identity();
        for l in r.letters() {
            let g = if l.inverse {
                &inverses[l.gen as usize]
            } else {
                &images[l.gen as usize]
            };
            acc = model.multiply(&acc, g);
        }
        if !model.is_identity(&acc) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Each generator of `p` sent to the model generator of the same name.
pub fn identity_assignment<M: Model>(model: &M, p: &Presentation) -> Result<Vec<Word>, ModelError> {
    let al = model.alphabet();
    p.alphabet()
        .names()
        .iter()
        .map(|n| Ok(Word::named(al, n)?))
        .collect()
}

/// `α^p β^q ζ^r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct HeisElement {
    pub p: i64,
    pub q: i64,
    pub r: i64,
}

/// Heisenberg group on `(α, β, ζ)` with `[α, β] = ζ` central.
#[derive(Debug, Clone)]
pub struct HeisModel {
    alphabet: Arc<Alphabet>,
}

impl HeisModel {
    pub fn new(alpha: &str, beta: &str, zeta: &str) -> Result<HeisModel, ModelError> {
        Ok(HeisModel {
            alphabet: Alphabet::new([alpha, beta, zeta])?,
        })
    }
}

impl Model for HeisModel {
    type Element = HeisElement;

    fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    fn identity(&self) -> HeisElement {
        HeisElement::default()
    }

    fn multiply(&self, a: &HeisElement, b: &HeisElement) -> HeisElement {
        HeisElement {
            p: a.p + b.p,
            q: a.q + b.q,
            r: a.r + b.r - b.p * a.q,
        }
    }

    fn inverse(&self, a: &HeisElement) -> HeisElement {
        HeisElement {
            p: -a.p,
            q: -a.q,
            r: -a.r - a.p * a.q,
        }
    }

    fn generator(&self, gen: usize) -> HeisElement {
        let mut e = HeisElement::default();
        match gen {
            0 => e.p = 1,
            1 => e.q = 1,
            _ => e.r = 1,
        }
        e
    }
}

/// The affine map `t ↦ 2^a·t + b`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BsElement {
    pub a: i64,
    pub b: Dyadic,
}

/// `BS(1,2) = ⟨x, h | h x h⁻¹ = x²⟩` with `x: t ↦ t + 1`, `h: t ↦ 2t`.
#[derive(Debug, Clone)]
pub struct Bs12Model {
    alphabet: Arc<Alphabet>,
}

impl Bs12Model {
    pub fn new() -> Bs12Model {
        Bs12Model::with_names("x", "h").unwrap()
    }

    pub fn with_names(x: &str, h: &str) -> Result<Bs12Model, ModelError> {
        Ok(Bs12Model {
            alphabet: Alphabet::new([x, h])?,
        })
    }
}

impl Default for Bs12Model {
    fn default() -> Self {
        Bs12Model::new()
    }
}

impl Model for Bs12Model {
    type Element = BsElement;

    fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    fn identity(&self) -> BsElement {
        BsElement {
            a: 0,
            b: Dyadic::zero(),
        }
    }

    fn multiply(&self, f: &BsElement, g: &BsElement) -> BsElement {
        BsElement {
            a: f.a + g.a,
            b: &g.b.mul_pow2(f.a) + &f.b,
        }
    }

    fn inverse(&self, f: &BsElement) -> BsElement {
        BsElement {
            a: -f.a,
            b: -&f.b.mul_pow2(-f.a),
        }
    }

    fn generator(&self, gen: usize) -> BsElement {
        if gen == 0 {
            BsElement {
                a: 0,
                b: Dyadic::one(),
            }
        } else {
            BsElement {
                a: 1,
                b: Dyadic::zero(),
            }
        }
    }
}

/// Integer 2×2 matrix, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mat2(pub [[BigInt; 2]; 2]);

impl Mat2 {
    pub fn identity() -> Mat2 {
        Mat2::from_i64([[1, 0], [0, 1]])
    }

    pub fn from_i64(m: [[i64; 2]; 2]) -> Mat2 {
        Mat2(m.map(|row| row.map(BigInt::from)))
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        let a = &self.0;
        let b = &o.0;
        let e = |i: usize, j: usize| &a[i][0] * &b[0][j] + &a[i][1] * &b[1][j];
        Mat2([[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]])
    }

    pub fn det(&self) -> BigInt {
        let a = &self.0;
        &a[0][0] * &a[1][1] - &a[0][1] * &a[1][0]
    }

    pub fn apply(&self, v: &Vec2) -> Vec2 {
        let a = &self.0;
        let row = |i: usize| {
            &(&Dyadic::from_int(a[i][0].clone()) * &v.0[0]) + &(&Dyadic::from_int(a[i][1].clone()) * &v.0[1])
        };
        Vec2([row(0), row(1)])
    }
}

/// Column vector in `Z[1/2]²`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Vec2(pub [Dyadic; 2]);

impl Vec2 {
    pub fn zero() -> Vec2 {
        Vec2::default()
    }

    pub fn from_i64(a: i64, b: i64) -> Vec2 {
        Vec2([Dyadic::from_int(a), Dyadic::from_int(b)])
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Dyadic::is_zero)
    }

    pub fn add(&self, o: &Vec2) -> Vec2 {
        Vec2([&self.0[0] + &o.0[0], &self.0[1] + &o.0[1]])
    }

    pub fn neg(&self) -> Vec2 {
        Vec2([-&self.0[0], -&self.0[1]])
    }

    pub fn mul_pow2(&self, k: i64) -> Vec2 {
        Vec2([self.0[0].mul_pow2(k), self.0[1].mul_pow2(k)])
    }
}

/// Alphabet `{u, v}` of the free factor of `L`.
pub fn free_alphabet() -> Arc<Alphabet> {
    Alphabet::new(["u", "v"]).unwrap()
}

/// `M(u) = [[1,1],[0,1]]`, `M(v) = [[1,0],[1,1]]`, extended multiplicatively.
pub fn free_matrix(w: &Word) -> Mat2 {
    let gens = [
        Mat2::from_i64([[1, 1], [0, 1]]),
        Mat2::from_i64([[1, 0], [1, 1]]),
    ];
    let invs = [
        Mat2::from_i64([[1, -1], [0, 1]]),
        Mat2::from_i64([[1, 0], [-1, 1]]),
    ];
    w.letters().iter().fold(Mat2::identity(), |acc, l| {
        let g = if l.inverse { &invs[l.gen as usize] } else { &gens[l.gen as usize] };
        acc.mul(g)
    })
}

/// `(t, a, w)` standing for translation by `t` after `h^a` and `w ∈ F₂`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LElement {
    pub t: Vec2,
    pub a: i64,
    /// Freely reduced word over `{u, v}`.
    pub w: Word,
}

/// `L = Z[1/2]² ⋊ (Z × F₂)` on generators `x, y, h, u, v`, the free factor
/// kept as abstract reduced words.
#[derive(Debug, Clone)]
pub struct LModel {
    alphabet: Arc<Alphabet>,
    free: Arc<Alphabet>,
}

impl LModel {
    pub fn new() -> LModel {
        LModel {
            alphabet: Alphabet::new(["x", "y", "h", "u", "v"]).unwrap(),
            free: free_alphabet(),
        }
    }

    pub fn free(&self) -> &Arc<Alphabet> {
        &self.free
    }

    /// The action matrix `2^a·M(w)` of `g`, which has determinant `2^{2a}`.
    pub fn action(&self, g: &LElement) -> (i64, Mat2) {
        (g.a, free_matrix(&g.w))
    }

    /// Image of `g` in the (non-faithful) affine representation.
    pub fn to_matrix(&self, g: &LElement) -> Mat3 {
        let m = free_matrix(&g.w);
        let mut out = Mat3::identity();
        for i in 0..2 {
            for j in 0..2 {
                out.0[i][j] = Dyadic::from_int(m.0[i][j].clone()).mul_pow2(g.a);
            }
            out.0[i][2] = g.t.0[i].clone();
        }
        out
    }
}

impl Default for LModel {
    fn default() -> Self {
        LModel::new()
    }
}

impl Model for LModel {
    type Element = LElement;

    fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    fn identity(&self) -> LElement {
        LElement {
            t: Vec2::zero(),
            a: 0,
            w: Word::identity(&self.free),
        }
    }

    fn multiply(&self, g: &LElement, k: &LElement) -> LElement {
        let moved = free_matrix(&g.w).apply(&k.t).mul_pow2(g.a);
        LElement {
            t: g.t.add(&moved),
            a: g.a + k.a,
            w: g.w.concat(&k.w).expect("same free alphabet"),
        }
    }

    fn inverse(&self, g: &LElement) -> LElement {
        let winv = g.w.invert();
        LElement {
            t: free_matrix(&winv).apply(&g.t).mul_pow2(-g.a).neg(),
            a: -g.a,
            w: winv,
        }
    }

    fn generator(&self, gen: usize) -> LElement {
        let mut e = self.identity();
        match gen {
            0 => e.t = Vec2::from_i64(1, 0),
            1 => e.t = Vec2::from_i64(0, 1),
            2 => e.a = 1,
            3 => e.w = Word::generator(&self.free, 0),
            _ => e.w = Word::generator(&self.free, 1),
        }
        e
    }
}

/// Free abelian group of rank 2 on two named generators.
#[derive(Debug, Clone)]
pub struct Z2Model {
    alphabet: Arc<Alphabet>,
}

impl Z2Model {
    pub fn new(g1: &str, g2: &str) -> Result<Z2Model, ModelError> {
        Ok(Z2Model {
            alphabet: Alphabet::new([g1, g2])?,
        })
    }
}

impl Model for Z2Model {
    type Element = (i64, i64);

    fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    fn identity(&self) -> (i64, i64) {
        (0, 0)
    }

    fn multiply(&self, a: &(i64, i64), b: &(i64, i64)) -> (i64, i64) {
        (a.0 + b.0, a.1 + b.1)
    }

    fn inverse(&self, a: &(i64, i64)) -> (i64, i64) {
        (-a.0, -a.1)
    }

    fn generator(&self, gen: usize) -> (i64, i64) {
        if gen == 0 {
            (1, 0)
        } else {
            (0, 1)
        }
    }
}

/// `⟨h⟩ × F(u, v)`: an exponent of `h` and a reduced word.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ZxF2Element {
    pub a: i64,
    pub w: Word,
}

#[derive(Debug, Clone)]
pub struct ZxF2Model {
    alphabet: Arc<Alphabet>,
    free: Arc<Alphabet>,
}

impl ZxF2Model {
    pub fn new(h: &str, u: &str, v: &str) -> Result<ZxF2Model, ModelError> {
        Ok(ZxF2Model {
            alphabet: Alphabet::new([h, u, v])?,
            free: Alphabet::new([u, v])?,
        })
    }

    pub fn free(&self) -> &Arc<Alphabet> {
        &self.free
    }
}

impl Model for ZxF2Model {
    type Element = ZxF2Element;

    fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    fn identity(&self) -> ZxF2Element {
        ZxF2Element {
            a: 0,
            w: Word::identity(&self.free),
        }
    }

    fn multiply(&self, g: &ZxF2Element, k: &ZxF2Element) -> ZxF2Element {
        ZxF2Element {
            a: g.a + k.a,
            w: g.w.concat(&k.w).expect("same free alphabet"),
        }
    }

    fn inverse(&self, g: &ZxF2Element) -> ZxF2Element {
        ZxF2Element {
            a: -g.a,
            w: g.w.invert(),
        }
    }

    fn generator(&self, gen: usize) -> ZxF2Element {
        match gen {
            0 => ZxF2Element {
                a: 1,
                w: Word::identity(&self.free),
            },
            g => ZxF2Element {
                a: 0,
                w: Word::generator(&self.free, g - 1),
            },
        }
    }
}

/// 3×3 matrix over `Z[1/2]`, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mat3(pub [[Dyadic; 3]; 3]);

impl Mat3 {
    pub fn identity() -> Mat3 {
        Mat3::from_i64([[1, 0, 0], [0, 1, 0], [0, 0, 1]])
    }

    pub fn from_i64(m: [[i64; 3]; 3]) -> Mat3 {
        Mat3(m.map(|row| row.map(Dyadic::from_int)))
    }

    pub fn mul(&self, o: &Mat3) -> Mat3 {
        let mut out = Mat3::from_i64([[0; 3]; 3]);
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = Dyadic::zero();
                for k in 0..3 {
                    acc = &acc + &(&self.0[i][k] * &o.0[k][j]);
                }
                out.0[i][j] = acc;
            }
        }
        out
    }

    pub fn is_identity(&self) -> bool {
        *self == Mat3::identity()
    }

    /// Translation part `(m[0][2], m[1][2])`.
    pub fn translation(&self) -> Vec2 {
        Vec2([self.0[0][2].clone(), self.0[1][2].clone()])
    }
}

/// The affine representation `w ↦ [[2^a·M, t], [0, 1]]` of a word over
/// `{x, y, h, u, v}`, computed as a product of generator matrices.
pub fn affine_matrix_model(w: &Word) -> Result<Mat3, ModelError> {
    let target = Alphabet::new(["x", "y", "h", "u", "v"])?;
    let map = resolve(&target, w.alphabet())?;
    let half = Dyadic::new(1, 1);
    let h_inv = {
        let mut m = Mat3::identity();
        m.0[0][0] = half.clone();
        m.0[1][1] = half;
        m
    };
    let gens = [
        (Mat3::from_i64([[1, 0, 1], [0, 1, 0], [0, 0, 1]]), Mat3::from_i64([[1, 0, -1], [0, 1, 0], [0, 0, 1]])),
        (Mat3::from_i64([[1, 0, 0], [0, 1, 1], [0, 0, 1]]), Mat3::from_i64([[1, 0, 0], [0, 1, -1], [0, 0, 1]])),
        (Mat3::from_i64([[2, 0, 0], [0, 2, 0], [0, 0, 1]]), h_inv),
        (Mat3::from_i64([[1, 1, 0], [0, 1, 0], [0, 0, 1]]), Mat3::from_i64([[1, -1, 0], [0, 1, 0], [0, 0, 1]])),
        (Mat3::from_i64([[1, 0, 0], [1, 1, 0], [0, 0, 1]]), Mat3::from_i64([[1, 0, 0], [-1, 1, 0], [0, 0, 1]])),
    ];
    Ok(w.letters().iter().fold(Mat3::identity(), |acc, l| {
        let (g, gi) = &gens[map[l.gen as usize]];
        acc.mul(if l.inverse { gi } else { g })
    }))
}
