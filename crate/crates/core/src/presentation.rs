//! Finite presentations and the named families built from them.
//!
//! Copies of a base presentation are renamed `g@i`. Cyclic constructors take
//! indices mod `n`, so the degenerate small cases (`n = 1, 2`) are built as
//! written even when `i - 1` or `i - 2` coincides with `i`.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::word::{Alphabet, Letter, Word, WordError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PresentationError {
    #[error(transparent)]
    Word(#[from] WordError),
    #[error("parameter out of range: {0}")]
    BadParameter(String),
    #[error("unknown generator {0:?}")]
    UnknownGenerator(String),
    #[error("no relator defines {0:?} by the given word")]
    NoDefiningRelator(String),
    #[error("defining word uses the eliminated generator {0:?}")]
    SelfReferentialDefinition(String),
    #[error("relator index {index} out of range ({count} relators)")]
    BadRelatorIndex { index: usize, count: usize },
    #[error("missing certificate for source relator {0}")]
    MissingCertificate(usize),
    #[error("graph edge label ({0}, {1}) not in the declared passive/active sets")]
    BadLabel(String, String),
    #[error("vertex {0} out of range")]
    BadVertex(usize),
}

pub type Result<T> = std::result::Result<T, PresentationError>;

#[derive(Clone, PartialEq, Eq)]
pub struct Presentation {
    name: String,
    alphabet: Arc<Alphabet>,
    relators: Vec<Word>,
}

impl fmt::Debug for Presentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Presentation({}, {} gens, {} rels)",
            self.name,
            self.alphabet.len(),
            self.relators.len()
        )
    }
}

impl Presentation {
    /// Empty relators are dropped; every relator must live over `alphabet`.
    pub fn new(
        name: impl Into<String>,
        alphabet: Arc<Alphabet>,
        relators: Vec<Word>,
    ) -> Result<Presentation> {
        for r in &relators {
            if !crate::word::same_alphabet(r.alphabet(), &alphabet) {
                return Err(WordError::AlphabetMismatch.into());
            }
        }
        Ok(Presentation {
            name: name.into(),
            relators: relators.into_iter().filter(|r| !r.is_empty()).collect(),
            alphabet,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Presentation {
        self.name = name.into();
        self
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn relators(&self) -> &[Word] {
        &self.relators
    }

    pub fn num_generators(&self) -> usize {
        self.alphabet.len()
    }

    pub fn generator(&self, name: &str) -> Result<Word> {
        Word::named(&self.alphabet, name)
            .map_err(|_| PresentationError::UnknownGenerator(name.into()))
    }

    pub fn parse(&self, text: &str) -> Result<Word> {
        Ok(crate::word::parse_word(&self.alphabet, text)?)
    }

    /// Rename every generator through `f`, keeping relator structure.
    pub fn renamed<F: Fn(&str) -> String>(&self, name: &str, f: F) -> Result<Presentation> {
        let alphabet = Alphabet::new(self.alphabet.names().iter().map(|n| f(n)))?;
        let ident: Vec<usize> = (0..alphabet.len()).collect();
        let relators = self
            .relators
            .iter()
            .map(|r| r.relabel(&alphabet, &ident))
            .collect();
        Presentation::new(name, alphabet, relators)
    }
}

/// `[a, b]·c⁻¹` for single-letter words, the shape of every linking relator.
fn comm_times_inv(a: &Word, b: &Word, c: &Word) -> Word {
    a.commutator(b).unwrap().concat(&c.invert()).unwrap()
}

pub fn copy_name(base: &str, i: usize) -> String {
    format!("{base}@{i}")
}

/// Higman's cyclic presentation on `a@0..a@{n-1}` with relators
/// `[a@(i-1), a@i]·a@i⁻¹`.
pub fn higman(n: usize) -> Result<Presentation> {
    if n == 0 {
        return Err(PresentationError::BadParameter("higman needs n >= 1".into()));
    }
    let al = Alphabet::new((0..n).map(|i| copy_name("a", i)))?;
    let a = |i: usize| Word::generator(&al, i % n);
    let relators = (0..n).map(|i| comm_times_inv(&a(i + n - 1), &a(i), &a(i))).collect();
    Presentation::new(format!("Hig_{n}"), al, relators)
}

/// `n` disjoint copies of `k`, linked by `[x@(i-1), x@i]·x@i⁻¹`.
pub fn variant_knx(k: &Presentation, x: &str, n: usize) -> Result<Presentation> {
    let xg = k
        .alphabet
        .lookup(x)
        .ok_or_else(|| PresentationError::UnknownGenerator(x.into()))?;
    if n == 0 {
        return Err(PresentationError::BadParameter("K^(n,x) needs n >= 1".into()));
    }
    let g = k.num_generators();
    let names = (0..n).flat_map(|i| k.alphabet.names().iter().map(move |nm| copy_name(nm, i)));
    let al = Alphabet::new(names)?;
    let mut relators = Vec::with_capacity(n * (k.relators.len() + 1));
    for i in 0..n {
        let map: Vec<usize> = (0..g).map(|j| i * g + j).collect();
        relators.extend(k.relators.iter().map(|r| r.relabel(&al, &map)));
    }
    let xi = |i: usize| Word::generator(&al, (i % n) * g + xg);
    for i in 0..n {
        relators.push(comm_times_inv(&xi(i + n - 1), &xi(i), &xi(i)));
    }
    Presentation::new(format!("{}^({},{})", k.name, n, x), al, relators)
}

/// Steinberg-type presentation `S_{d,n}` on generators `E{p}{q}@i`.
///
/// With `magnus_nielsen` the relators `(E12 E21⁻¹ E12)^4` are added per copy.
pub fn steinberg(d: usize, n: usize, magnus_nielsen: bool) -> Result<Presentation> {
    if d < 3 {
        return Err(PresentationError::BadParameter("steinberg needs d >= 3".into()));
    }
    if n == 0 {
        return Err(PresentationError::BadParameter("steinberg needs n >= 1".into()));
    }
    let pairs: Vec<(usize, usize)> = (1..=d)
        .flat_map(|p| (1..=d).filter(move |&q| q != p).map(move |q| (p, q)))
        .collect();
    let names = (0..n).flat_map(|i| {
        pairs
            .iter()
            .map(move |&(p, q)| copy_name(&elementary_name(p, q, d), i))
    });
    let al = Alphabet::new(names)?;
    let pair_index: HashMap<(usize, usize), usize> =
        pairs.iter().enumerate().map(|(k, &pq)| (pq, k)).collect();
    let e = |i: usize, p: usize, q: usize| {
        Word::generator(&al, (i % n) * pairs.len() + pair_index[&(p, q)])
    };
    let mut relators = Vec::new();
    for i in 0..n {
        for &(p, q) in &pairs {
            for r in 1..=d {
                if r != p && r != q {
                    relators.push(comm_times_inv(&e(i, p, q), &e(i, q, r), &e(i, p, r)));
                }
            }
        }
        for &(p, q) in &pairs {
            for &(r, s) in &pairs {
                if q != r && p != s {
                    relators.push(e(i, p, q).commutator(&e(i, r, s))?);
                }
            }
        }
    }
    for i in 0..n {
        relators.push(comm_times_inv(&e(i + n - 1, 1, 2), &e(i, 1, 2), &e(i, 1, 2)));
    }
    if magnus_nielsen {
        for i in 0..n {
            let w = e(i, 1, 2)
                .concat(&e(i, 2, 1).invert())?
                .concat(&e(i, 1, 2))?;
            relators.push(w.pow(4));
        }
    }
    let tag = if magnus_nielsen { "MN" } else { "St" };
    Presentation::new(format!("S_{{{d},{n}}}{tag}"), al, relators)
}

fn elementary_name(p: usize, q: usize, d: usize) -> String {
    if d < 10 {
        format!("E{p}{q}")
    } else {
        format!("E{p}_{q}")
    }
}

/// Rename-free substitute for `R(x, y, h, u, v)`: the nine relators of the
/// group `L`, given the five words playing those roles.
pub fn l_relators(x: &Word, y: &Word, h: &Word, u: &Word, v: &Word) -> Vec<Word> {
    vec![
        x.commutator(y).unwrap(),
        x.commutator(u).unwrap(),
        y.commutator(v).unwrap(),
        h.commutator(u).unwrap(),
        h.commutator(v).unwrap(),
        comm_times_inv(h, x, x),
        comm_times_inv(u, y, x),
        comm_times_inv(h, y, y),
        comm_times_inv(v, x, y),
    ]
}

/// `L = Z[1/2]² ⋊ (Z × F₂)` on generators `x, y, h, u, v`.
pub fn l_presentation() -> Presentation {
    let al = Alphabet::new(["x", "y", "h", "u", "v"]).unwrap();
    let g = |i| Word::generator(&al, i);
    let rels = l_relators(&g(0), &g(1), &g(2), &g(3), &g(4));
    Presentation::new("L", al, rels).unwrap()
}

/// `G_n` on `x@i, y@i` with `R(x_i, y_i, y_{i-2}, x_{i-2}, y_{i-1})` for each `i`.
pub fn gn(n: usize) -> Result<Presentation> {
    if n == 0 {
        return Err(PresentationError::BadParameter("G_n needs n >= 1".into()));
    }
    let names = (0..n).flat_map(|i| [copy_name("x", i), copy_name("y", i)]);
    let al = Alphabet::new(names)?;
    let x = |i: usize| Word::generator(&al, 2 * (i % n));
    let y = |i: usize| Word::generator(&al, 2 * (i % n) + 1);
    let mut relators = Vec::with_capacity(9 * n);
    for i in 0..n {
        let (im1, im2) = (i + n - 1, i + 2 * n - 2);
        relators.extend(l_relators(&x(i), &y(i), &y(im2), &x(im2), &y(im1)));
    }
    Presentation::new(format!("G_{n}"), al, relators)
}

/// An edge of a labelled graph: `passive` in copy `from` equals `active` in copy `to`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphEdge {
    pub from: usize,
    pub to: usize,
    pub passive: String,
    pub active: String,
}

impl GraphEdge {
    pub fn new(from: usize, to: usize, passive: &str, active: &str) -> GraphEdge {
        GraphEdge {
            from,
            to,
            passive: passive.into(),
            active: active.into(),
        }
    }
}

/// One copy of `base` per vertex, plus `p@j·(a@k)⁻¹` per `(p, a)` edge `j → k`.
pub fn graph_group(
    base: &Presentation,
    active: &[&str],
    passive: &[&str],
    vertices: usize,
    edges: &[GraphEdge],
) -> Result<Presentation> {
    if vertices == 0 {
        return Err(PresentationError::BadParameter("graph needs a vertex".into()));
    }
    for name in active.iter().chain(passive) {
        if base.alphabet.lookup(name).is_none() {
            return Err(PresentationError::UnknownGenerator(name.to_string()));
        }
    }
    let g = base.num_generators();
    let names =
        (0..vertices).flat_map(|i| base.alphabet.names().iter().map(move |nm| copy_name(nm, i)));
    let al = Alphabet::new(names)?;
    let mut relators = Vec::new();
    for i in 0..vertices {
        let map: Vec<usize> = (0..g).map(|j| i * g + j).collect();
        relators.extend(base.relators.iter().map(|r| r.relabel(&al, &map)));
    }
    for e in edges {
        if !passive.contains(&e.passive.as_str()) || !active.contains(&e.active.as_str()) {
            return Err(PresentationError::BadLabel(e.passive.clone(), e.active.clone()));
        }
        for v in [e.from, e.to] {
            if v >= vertices {
                return Err(PresentationError::BadVertex(v));
            }
        }
        let p = e.from * g + base.alphabet.lookup(&e.passive).unwrap();
        let a = e.to * g + base.alphabet.lookup(&e.active).unwrap();
        relators.push(Word::reduce(&al, [Letter::pos(p), Letter::neg(a)]));
    }
    Presentation::new(format!("{}-graph{}", base.name, vertices), al, relators)
}

/// The labelled graph whose graph group is the fused presentation of `G_n`:
/// `h_i = y_{i-2}`, `u_i = x_{i-2}`, `v_i = y_{i-1}`.
pub fn gn_graph_edges(n: usize) -> Vec<GraphEdge> {
    let mut edges = Vec::with_capacity(3 * n);
    for i in 0..n {
        edges.push(GraphEdge::new((i + 2 * n - 2) % n, i, "y", "h"));
        edges.push(GraphEdge::new((i + 2 * n - 2) % n, i, "x", "u"));
        edges.push(GraphEdge::new((i + n - 1) % n, i, "y", "v"));
    }
    edges
}

/// The `n`-cycle `i-1 → i` with a single label.
pub fn cycle_edges(n: usize, passive: &str, active: &str) -> Vec<GraphEdge> {
    (0..n)
        .map(|i| GraphEdge::new((i + n - 1) % n, i, passive, active))
        .collect()
}

/// Fused presentation of `G_n` with all `h@i, u@i, v@i` still present.
pub fn gn_graph_presentation(n: usize) -> Result<Presentation> {
    let base = l_presentation();
    graph_group(&base, &["h", "u", "v"], &["x", "y"], n, &gn_graph_edges(n))
}

/// `BS(1,2) = ⟨x, h | [h,x]·x⁻¹⟩`, the HNN extension of `⟨x⟩` by `h`.
pub fn bs12_presentation() -> Presentation {
    let al = Alphabet::new(["x", "h"]).unwrap();
    let rel = comm_times_inv(&Word::generator(&al, 1), &Word::generator(&al, 0), &Word::generator(&al, 0));
    Presentation::new("BS(1,2)", al, vec![rel]).unwrap()
}

/// Higman's group rebuilt from copies of `BS(1,2)` glued along an `n`-cycle by
/// `h@i = x@(i-1)`, then with every `h@i` eliminated.
pub fn higman_via_graph(n: usize) -> Result<Presentation> {
    let mut p = graph_group(&bs12_presentation(), &["h"], &["x"], n, &cycle_edges(n, "x", "h"))?;
    for i in 0..n {
        let def = p.generator(&copy_name("x", (i + n - 1) % n))?;
        p = tietze_eliminate(&p, &copy_name("h", i), &def)?;
    }
    Ok(p.with_name(format!("Hig_{n}")))
}

/// Remove generator `g` using a relator equal (up to cyclic permutation and
/// inversion) to `g·defining⁻¹`, substituting `defining` everywhere else.
pub fn tietze_eliminate(p: &Presentation, g: &str, defining: &Word) -> Result<Presentation> {
    let gi = p
        .alphabet
        .lookup(g)
        .ok_or_else(|| PresentationError::UnknownGenerator(g.into()))?;
    if !crate::word::same_alphabet(defining.alphabet(), &p.alphabet) {
        return Err(WordError::AlphabetMismatch.into());
    }
    if defining.uses(gi) {
        return Err(PresentationError::SelfReferentialDefinition(g.into()));
    }
    let target = Word::generator(&p.alphabet, gi).concat(&defining.invert())?;
    let target_inv = target.invert();
    let found = p.relators.iter().position(|r| {
        let c = r.cyclically_reduced();
        c.len() == target.len()
            && c.rotations()
                .any(|rot| rot == target.letters() || rot == target_inv.letters())
    });
    let Some(idx) = found else {
        return Err(PresentationError::NoDefiningRelator(g.into()));
    };

    let names: Vec<&String> = p
        .alphabet
        .names()
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != gi)
        .map(|(_, n)| n)
        .collect();
    let al = Alphabet::new(names.iter().map(|s| s.as_str()))?;
    let shift = |j: usize| if j > gi { j - 1 } else { j };
    let defining_new = Word::reduce(
        &al,
        defining
            .letters()
            .iter()
            .map(|l| Letter::new(shift(l.gen as usize), l.inverse))
            .collect::<Vec<_>>(),
    );
    let images: Vec<Word> = (0..p.num_generators())
        .map(|j| {
            if j == gi {
                defining_new.clone()
            } else {
                Word::generator(&al, shift(j))
            }
        })
        .collect();
    let relators = p
        .relators
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != idx)
        .map(|(_, r)| r.substitute(&al, &images))
        .collect();
    Presentation::new(p.name.clone(), al, relators)
}

/// Eliminate `h@i, u@i, v@i` for ascending `i` from the fused `G_n` presentation.
pub fn gn_via_graph(n: usize) -> Result<Presentation> {
    let mut p = gn_graph_presentation(n)?;
    for i in 0..n {
        for (g, src) in [("h", ("y", i + 2 * n - 2)), ("u", ("x", i + 2 * n - 2)), ("v", ("y", i + n - 1))] {
            let def = p.generator(&copy_name(src.0, src.1 % n))?;
            p = tietze_eliminate(&p, &copy_name(g, i), &def)?;
        }
    }
    Ok(p.with_name(format!("G_{n}")))
}

pub fn add_relators(p: &Presentation, extra: &[Word]) -> Result<Presentation> {
    let mut relators = p.relators.clone();
    for w in extra {
        if !crate::word::same_alphabet(w.alphabet(), &p.alphabet) {
            return Err(WordError::AlphabetMismatch.into());
        }
        relators.push(w.clone());
    }
    let name = if extra.is_empty() {
        p.name.clone()
    } else {
        format!("{}/<<{}>>", p.name, extra.iter().map(|w| w.to_string()).collect::<Vec<_>>().join(", "))
    };
    Presentation::new(name, p.alphabet.clone(), relators)
}

/// One factor `c·r^±·c⁻¹` of a derivation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivationStep {
    pub relator: usize,
    pub inverse: bool,
    pub conjugator: Word,
}

/// A witness that a word is a product of conjugated relators.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DerivationCertificate {
    pub steps: Vec<DerivationStep>,
}

impl DerivationCertificate {
    pub fn single(relator: usize, conjugator: Word) -> DerivationCertificate {
        DerivationCertificate {
            steps: vec![DerivationStep {
                relator,
                inverse: false,
                conjugator,
            }],
        }
    }
}

/// True iff the free-group product of the certificate's steps equals `w`,
/// which proves `w = e` in `p`.
pub fn check_certificate(
    p: &Presentation,
    w: &Word,
    cert: &DerivationCertificate,
) -> Result<bool> {
    if !crate::word::same_alphabet(w.alphabet(), &p.alphabet) {
        return Err(WordError::AlphabetMismatch.into());
    }
    let mut acc = Word::identity(&p.alphabet);
    for s in &cert.steps {
        let r = p
            .relators
            .get(s.relator)
            .ok_or(PresentationError::BadRelatorIndex {
                index: s.relator,
                count: p.relators.len(),
            })?;
        let r = if s.inverse { r.invert() } else { r.clone() };
        let term = s.conjugator.concat(&r)?.concat(&s.conjugator.invert())?;
        acc = acc.concat(&term)?;
    }
    Ok(&acc == w)
}

/// Assignment of a target word to each source generator.
#[derive(Debug, Clone)]
pub struct GeneratorMap {
    pub source: Presentation,
    pub target: Presentation,
    pub images: Vec<Word>,
}

impl GeneratorMap {
    pub fn new(source: Presentation, target: Presentation, images: Vec<Word>) -> Result<GeneratorMap> {
        if images.len() != source.num_generators() {
            return Err(PresentationError::BadParameter(format!(
                "{} images for {} generators",
                images.len(),
                source.num_generators()
            )));
        }
        for w in &images {
            if !crate::word::same_alphabet(w.alphabet(), &target.alphabet) {
                return Err(WordError::AlphabetMismatch.into());
            }
        }
        Ok(GeneratorMap { source, target, images })
    }

    pub fn image(&self, w: &Word) -> Word {
        w.substitute(&self.target.alphabet, &self.images)
    }
}

/// True iff every source relator maps to a certified identity of the target,
/// which proves the map extends to a homomorphism.
pub fn check_hom_certificate(
    m: &GeneratorMap,
    certs: &HashMap<usize, DerivationCertificate>,
) -> Result<bool> {
    for (i, r) in m.source.relators.iter().enumerate() {
        let cert = certs.get(&i).ok_or(PresentationError::MissingCertificate(i))?;
        if !check_certificate(&m.target, &m.image(r), cert)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// One-step certificates: for each source relator whose image is literally a
/// target relator (or a cyclic conjugate of one), emit that step.
pub fn literal_certificates(m: &GeneratorMap) -> HashMap<usize, DerivationCertificate> {
    let mut out = HashMap::new();
    for (i, r) in m.source.relators.iter().enumerate() {
        let img = m.image(r);
        if let Some(step) = find_literal_step(&m.target, &img) {
            out.insert(i, DerivationCertificate { steps: vec![step] });
        }
    }
    out
}

fn find_literal_step(p: &Presentation, w: &Word) -> Option<DerivationStep> {
    for (j, r) in p.relators.iter().enumerate() {
        for inverse in [false, true] {
            let rr = if inverse { r.invert() } else { r.clone() };
            // w = c·rr·c⁻¹ with c a prefix of w is the only shape tried.
            for k in 0..=w.len() {
                let c = Word::reduce(p.alphabet(), w.letters()[..k].to_vec());
                let cand = c.concat(&rr).unwrap().concat(&c.invert()).unwrap();
                if &cand == w {
                    return Some(DerivationStep {
                        relator: j,
                        inverse,
                        conjugator: c,
                    });
                }
            }
        }
    }
    None
}

/// `Hig_{n/k} → G_n`, `a_i ↦ y_{2i}` (take `source_n = n` or `n/2` for even `n`).
pub fn higman_to_gn(source_n: usize, n: usize) -> Result<GeneratorMap> {
    if !(source_n == n || (n % 2 == 0 && 2 * source_n == n)) || n == 0 {
        return Err(PresentationError::BadParameter(format!(
            "a_i -> y_2i needs source n equal to {n} or {}",
            n / 2
        )));
    }
    let source = higman(source_n)?;
    let target = gn(n)?;
    let images = (0..source_n)
        .map(|i| target.generator(&copy_name("y", (2 * i) % n)))
        .collect::<Result<Vec<_>>>()?;
    GeneratorMap::new(source, target, images)
}

/// `Hig_n → K^(n,x)`, `a_i ↦ x@i`.
pub fn higman_to_knx(k: &Presentation, x: &str, n: usize) -> Result<GeneratorMap> {
    let source = higman(n)?;
    let target = variant_knx(k, x, n)?;
    let images = (0..n)
        .map(|i| target.generator(&copy_name(x, i)))
        .collect::<Result<Vec<_>>>()?;
    GeneratorMap::new(source, target, images)
}

/// The free presentation `⟨x | ⟩` on one generator.
pub fn free_cyclic(x: &str) -> Presentation {
    let al = Alphabet::new([x]).unwrap();
    Presentation::new(format!("<{x}>"), al, Vec::new()).unwrap()
}
