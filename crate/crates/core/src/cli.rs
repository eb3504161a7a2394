//! Command-line driver and the plain-text file formats.
//!
//! Exit codes: 0 verified or completed, 1 usage error, 2 verification
//! failure, 3 resource limit reached.

use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::abelianize::abelian_invariants;
use crate::amalgam::{
    britton_cross_check, check_qt_iso, hhalf_blocking_element, instance_hhalf, instance_j, instance_q, instance_t,
    SuiteReport,
};
use crate::arithmetic::{closed_walks, folner_bound_check, folner_chain, folner_constant, DivisibilityGraph};
use crate::coset_enum::{enumerate, Outcome, Strategy, DEFAULT_MAX_COSETS};
use crate::presentation::{
    add_relators, bs12_presentation, check_certificate, check_hom_certificate, gn, gn_via_graph, higman,
    higman_to_gn, higman_to_knx, higman_via_graph, l_presentation, literal_certificates, steinberg, variant_knx,
    DerivationCertificate, DerivationStep, Presentation, PresentationError,
};
use crate::quotient_search::search_homs;
use crate::word::{parse_word, Alphabet, Word, WordError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAILED: i32 = 2;
pub const EXIT_LIMIT: i32 = 3;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: {source}")]
    Word { line: usize, source: WordError },
    #[error(transparent)]
    Presentation(#[from] PresentationError),
}

fn syntax(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Syntax { line, msg: msg.into() }
}

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

/// Parse the presentation file format:
///
/// ```text
/// group <name>
/// gens <g1> <g2> ...
/// rel <word>
/// rel <word> = <word>
/// ```
///
/// `#` starts a comment. `rel u = v` is stored as `u·v⁻¹`.
pub fn parse_presentation_file(text: &str) -> Result<Presentation, FormatError> {
    let mut name: Option<String> = None;
    let mut alphabet: Option<std::sync::Arc<Alphabet>> = None;
    let mut relators = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let (key, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let rest = rest.trim();
        match key {
            "group" => {
                if name.is_some() {
                    return Err(syntax(lineno, "duplicate `group` line"));
                }
                if rest.is_empty() {
                    return Err(syntax(lineno, "missing group name"));
                }
                name = Some(rest.to_string());
            }
            "gens" => {
                if name.is_none() {
                    return Err(syntax(lineno, "`gens` before `group`"));
                }
                if alphabet.is_some() {
                    return Err(syntax(lineno, "duplicate `gens` line"));
                }
                let al = Alphabet::new(rest.split_whitespace())
                    .map_err(|source| FormatError::Word { line: lineno, source })?;
                alphabet = Some(al);
            }
            "rel" => {
                let al = alphabet.as_ref().ok_or_else(|| syntax(lineno, "`rel` before `gens`"))?;
                let word = |s: &str| parse_word(al, s).map_err(|source| FormatError::Word { line: lineno, source });
                let w = match rest.split_once('=') {
                    Some((lhs, rhs)) => word(lhs)?
                        .concat(&word(rhs)?.invert())
                        .map_err(|source| FormatError::Word { line: lineno, source })?,
                    None => word(rest)?,
                };
                relators.push(w);
            }
            other => return Err(syntax(lineno, format!("unknown keyword `{other}`"))),
        }
    }
    let name = name.ok_or_else(|| syntax(1, "missing `group` line"))?;
    let alphabet = alphabet.ok_or_else(|| syntax(1, "missing `gens` line"))?;
    Ok(Presentation::new(name, alphabet, relators)?)
}

pub fn write_presentation_file(p: &Presentation) -> String {
    let mut s = format!("group {}\ngens", p.name());
    for n in p.alphabet().names() {
        s.push(' ');
        s.push_str(n);
    }
    s.push('\n');
    for r in p.relators() {
        let _ = writeln!(s, "rel {r}");
    }
    s
}

/// Certificate file: a `word <word>` header, then
/// `step <relator-index> <+1|-1> <conjugator>` lines.
pub fn parse_certificate_file(p: &Presentation, text: &str) -> Result<(Word, DerivationCertificate), FormatError> {
    let mut target: Option<Word> = None;
    let mut cert = DerivationCertificate::default();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let (key, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let rest = rest.trim();
        let word = |s: &str| parse_word(p.alphabet(), s).map_err(|source| FormatError::Word { line: lineno, source });
        match key {
            "word" => {
                if target.is_some() {
                    return Err(syntax(lineno, "duplicate `word` line"));
                }
                target = Some(word(rest)?);
            }
            "step" => {
                if target.is_none() {
                    return Err(syntax(lineno, "`step` before `word`"));
                }
                let mut parts = rest.splitn(3, char::is_whitespace);
                let idx = parts
                    .next()
                    .and_then(|s| s.parse::<usize>().ok())
                    .ok_or_else(|| syntax(lineno, "bad relator index"))?;
                let inverse = match parts.next() {
                    Some("+1") | Some("1") => false,
                    Some("-1") => true,
                    _ => return Err(syntax(lineno, "sign must be +1 or -1")),
                };
                let conj = parts.next().map(str::trim).unwrap_or("");
                let conjugator = if conj.is_empty() {
                    Word::identity(p.alphabet())
                } else {
                    word(conj)?
                };
                cert.steps.push(DerivationStep {
                    relator: idx,
                    inverse,
                    conjugator,
                });
            }
            other => return Err(syntax(lineno, format!("unknown keyword `{other}`"))),
        }
    }
    let target = target.ok_or_else(|| syntax(1, "missing `word` line"))?;
    Ok((target, cert))
}

pub fn write_certificate_file(w: &Word, cert: &DerivationCertificate) -> String {
    let mut s = format!("word {w}\n");
    for st in &cert.steps {
        let _ = writeln!(
            s,
            "step {} {} {}",
            st.relator,
            if st.inverse { "-1" } else { "+1" },
            st.conjugator
        );
    }
    s
}

fn gap_word(w: &Word) -> String {
    if w.is_empty() {
        return "One(F)".into();
    }
    let mut parts = Vec::new();
    let letters = w.letters();
    let mut i = 0;
    while i < letters.len() {
        let l = letters[i];
        let mut j = i;
        while j < letters.len() && letters[j] == l {
            j += 1;
        }
        let e = (j - i) as i64 * l.sign();
        let g = format!("F.{}", l.gen + 1);
        parts.push(if e == 1 { g } else { format!("{g}^{e}") });
        i = j;
    }
    parts.join("*")
}

/// GAP input: a free group constructor then the relator list.
pub fn emit_gap(p: &Presentation) -> String {
    let names: Vec<String> = p
        .alphabet()
        .names()
        .iter()
        .map(|n| format!("\"{}\"", n.replace('@', "_")))
        .collect();
    let rels: Vec<String> = p.relators().iter().map(gap_word).collect();
    format!("F := FreeGroup({});\nrels := [{}];\n", names.join(", "), rels.join(", "))
}

#[derive(Parser, Debug)]
#[command(name = "fpgroup", version, about = "Finitely presented group toolkit")]
pub struct Cli {
    /// Omit elapsed times so that reports are byte-identical across runs.
    #[arg(long, global = true)]
    no_timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print a built-in presentation in the presentation file format.
    Build(SourceArgs),
    /// Todd–Coxeter enumeration of a subgroup's cosets.
    Enumerate(EnumerateArgs),
    /// Abelian invariants via Smith normal form.
    Abelianize(SourceArgs),
    /// Count homomorphisms into symmetric groups.
    Quotients(QuotientArgs),
    /// Check a derivation certificate or a built-in homomorphism.
    Certify(CertifyArgs),
    /// Normal-form property suites, freeness, Q ≅ T and Britton checks.
    AmalgamSuite(SuiteArgs),
    /// Cyclic order tuples in the divisibility graph.
    LemmaArith(ArithArgs),
    /// Exact check of the Følner constant inequality.
    Folner,
    /// Emit a presentation as GAP input or text.
    Emit(EmitArgs),
}

#[derive(Args, Debug, Clone)]
struct SourceArgs {
    /// A family name (higman, gn, gn-graph, higman-graph, steinberg, l,
    /// bs12, knx), a presentation file, or `-` for standard input.
    source: Option<String>,
    #[arg(short = 'n', long = "n")]
    n: Option<usize>,
    /// Matrix size for steinberg.
    #[arg(long, default_value_t = 3)]
    d: usize,
    /// Add the Magnus–Nielsen relators to steinberg.
    #[arg(long)]
    mn: bool,
    /// Base presentation for knx (family name or file).
    #[arg(long)]
    base: Option<String>,
    /// Distinguished generator for knx.
    #[arg(long, default_value = "x")]
    x: String,
    /// Extra relator, repeatable.
    #[arg(long = "add-rel")]
    add_rel: Vec<String>,
}

#[derive(Args, Debug)]
struct EnumerateArgs {
    #[command(flatten)]
    src: SourceArgs,
    #[arg(long, default_value_t = DEFAULT_MAX_COSETS)]
    max_cosets: usize,
    #[arg(long, default_value = "hlt")]
    strategy: Strategy,
    /// Subgroup generator, repeatable; none means the trivial subgroup.
    #[arg(long)]
    subgroup: Vec<String>,
    /// Print the completed coset table.
    #[arg(long)]
    table: bool,
}

#[derive(Args, Debug)]
struct QuotientArgs {
    #[command(flatten)]
    src: SourceArgs,
    /// Target degree, repeatable.
    #[arg(long, required = true)]
    degree: Vec<usize>,
    /// Partial assignments explored per degree.
    #[arg(long, default_value_t = 1_000_000_000)]
    budget: u64,
    /// Exit 2 if any non-trivial homomorphism exists.
    #[arg(long)]
    expect_trivial: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum HomKind {
    HigmanGn,
    HigmanKnx,
}

#[derive(Args, Debug)]
struct CertifyArgs {
    #[command(flatten)]
    src: SourceArgs,
    /// Certificate file checked against the presentation.
    #[arg(long, conflicts_with = "hom")]
    cert: Option<PathBuf>,
    /// Built-in homomorphism to certify from literal relator images.
    #[arg(long, value_enum)]
    hom: Option<HomKind>,
    /// Rank of the source Higman group for higman-gn (n or n/2).
    #[arg(long)]
    source_n: Option<usize>,
}

#[derive(Args, Debug)]
struct SuiteArgs {
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value_t = 40)]
    max_len: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Length bound for the freeness check of {h@0, x@1}.
    #[arg(long, default_value_t = 8)]
    free_len: usize,
    /// Length bound for the freeness check of {t, h@0, x@1}.
    #[arg(long, default_value_t = 6)]
    blocking_len: usize,
    /// Word length for the Q ≅ T comparison.
    #[arg(long, default_value_t = 30)]
    qt_len: usize,
}

#[derive(Args, Debug)]
struct ArithArgs {
    /// Cycle length, repeatable.
    #[arg(short = 'n', long = "n", required = true)]
    n: Vec<usize>,
    #[arg(long, default_value_t = 100_000)]
    bound: usize,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum Format {
    Gap,
    Text,
}

#[derive(Args, Debug)]
struct EmitArgs {
    #[command(flatten)]
    src: SourceArgs,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

/// An error that ends the run with a specific exit code.
#[derive(Debug)]
struct Exit {
    code: i32,
    msg: String,
}

fn usage(msg: impl std::fmt::Display) -> Exit {
    Exit {
        code: EXIT_USAGE,
        msg: msg.to_string(),
    }
}

struct Ctx<'a> {
    stdin: &'a mut dyn Read,
    out: String,
    timing: bool,
}

impl Ctx<'_> {
    fn elapsed(&mut self, start: Instant) {
        if self.timing {
            let _ = writeln!(self.out, "elapsed {:.3}s", start.elapsed().as_secs_f64());
        }
    }
}

fn family(name: &str, a: &SourceArgs, ctx: &mut Ctx) -> Result<Option<Presentation>, Exit> {
    let need_n = || a.n.ok_or_else(|| usage(format!("family `{name}` needs -n")));
    let p = match name {
        "higman" => higman(need_n()?),
        "higman-graph" => higman_via_graph(need_n()?),
        "gn" => gn(need_n()?),
        "gn-graph" => gn_via_graph(need_n()?),
        "steinberg" => steinberg(a.d, need_n()?, a.mn),
        "l" => Ok(l_presentation()),
        "bs12" => Ok(bs12_presentation()),
        "knx" => {
            let base_name = a.base.as_deref().ok_or_else(|| usage("knx needs --base"))?;
            let base_args = SourceArgs {
                source: Some(base_name.to_string()),
                add_rel: Vec::new(),
                ..a.clone()
            };
            let base = load(&base_args, ctx)?;
            variant_knx(&base, &a.x, need_n()?)
        }
        _ => return Ok(None),
    };
    p.map(Some).map_err(usage)
}

fn load(a: &SourceArgs, ctx: &mut Ctx) -> Result<Presentation, Exit> {
    let p = match a.source.as_deref() {
        None | Some("-") => {
            let mut s = String::new();
            ctx.stdin.read_to_string(&mut s).map_err(usage)?;
            parse_presentation_file(&s).map_err(usage)?
        }
        Some(name) => match family(name, a, ctx)? {
            Some(p) => p,
            None => {
                let s = std::fs::read_to_string(name).map_err(|e| usage(format!("{name}: {e}")))?;
                parse_presentation_file(&s).map_err(|e| usage(format!("{name}: {e}")))?
            }
        },
    };
    if a.add_rel.is_empty() {
        return Ok(p);
    }
    let extra = a
        .add_rel
        .iter()
        .map(|s| p.parse(s))
        .collect::<Result<Vec<_>, _>>()
        .map_err(usage)?;
    add_relators(&p, &extra).map_err(usage)
}

fn cmd_enumerate(a: &EnumerateArgs, ctx: &mut Ctx) -> Result<i32, Exit> {
    let p = load(&a.src, ctx)?;
    let sub = a
        .subgroup
        .iter()
        .map(|s| p.parse(s))
        .collect::<Result<Vec<_>, _>>()
        .map_err(usage)?;
    let start = Instant::now();
    let r = enumerate(&p, &sub, a.max_cosets, a.strategy).map_err(usage)?;
    let code = match r.outcome {
        Outcome::Index(i) => {
            let _ = writeln!(ctx.out, "index {i}");
            EXIT_OK
        }
        Outcome::LimitExceeded => {
            let _ = writeln!(ctx.out, "limit exceeded (max cosets {})", a.max_cosets);
            EXIT_LIMIT
        }
    };
    let _ = writeln!(ctx.out, "group {}", p.name());
    let _ = writeln!(ctx.out, "strategy {:?}", a.strategy);
    let _ = writeln!(ctx.out, "cosets defined {}", r.cosets_defined);
    let _ = writeln!(ctx.out, "max live {}", r.max_live);
    ctx.elapsed(start);
    if a.table {
        if let Some(t) = &r.table {
            ctx.out.push_str(&t.dump());
        }
    }
    Ok(code)
}

fn cmd_abelianize(a: &SourceArgs, ctx: &mut Ctx) -> Result<i32, Exit> {
    let p = load(a, ctx)?;
    let start = Instant::now();
    let inv = abelian_invariants(&p);
    let _ = writeln!(ctx.out, "group {}", p.name());
    let _ = writeln!(ctx.out, "abelianization {inv}");
    let _ = writeln!(ctx.out, "rank {}", inv.rank);
    let torsion: Vec<String> = inv.torsion.iter().map(|t| t.to_string()).collect();
    let _ = writeln!(ctx.out, "torsion [{}]", torsion.join(", "));
    ctx.elapsed(start);
    Ok(EXIT_OK)
}

fn cmd_quotients(a: &QuotientArgs, ctx: &mut Ctx) -> Result<i32, Exit> {
    let p = load(&a.src, ctx)?;
    let _ = writeln!(ctx.out, "group {}", p.name());
    let mut header = String::from("degree\tcount\tnontrivial_found\tcomplete");
    if ctx.timing {
        header.push_str("\telapsed");
    }
    let _ = writeln!(ctx.out, "{header}");
    let mut nontrivial = 0u64;
    let mut complete = true;
    for &k in &a.degree {
        let start = Instant::now();
        let r = search_homs(&p, k, a.budget).map_err(usage)?;
        let timing = ctx.timing.then(|| start.elapsed());
        let table = r.table(timing);
        ctx.out.push_str(table.lines().nth(1).unwrap_or(""));
        ctx.out.push('\n');
        nontrivial += r.total_homs.saturating_sub(1);
        complete &= r.complete;
        for w in &r.witnesses {
            let imgs: Vec<String> = w.iter().map(|g| g.to_string()).collect();
            let _ = writeln!(ctx.out, "witness degree {k}: {}", imgs.join(" "));
        }
    }
    if !complete {
        let _ = writeln!(ctx.out, "budget exhausted; counts are lower bounds");
        return Ok(EXIT_LIMIT);
    }
    let _ = writeln!(ctx.out, "nontrivial homs: {nontrivial}");
    Ok(if a.expect_trivial && nontrivial > 0 { EXIT_FAILED } else { EXIT_OK })
}

fn cmd_certify(a: &CertifyArgs, ctx: &mut Ctx) -> Result<i32, Exit> {
    if let Some(path) = &a.cert {
        let p = load(&a.src, ctx)?;
        let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        let (w, cert) = parse_certificate_file(&p, &text).map_err(usage)?;
        let ok = check_certificate(&p, &w, &cert).map_err(usage)?;
        let _ = writeln!(ctx.out, "group {}", p.name());
        let _ = writeln!(ctx.out, "word {w}");
        let _ = writeln!(ctx.out, "steps {}", cert.steps.len());
        let _ = writeln!(ctx.out, "certificate: {}", if ok { "valid" } else { "invalid" });
        return Ok(if ok { EXIT_OK } else { EXIT_FAILED });
    }
    let kind = a.hom.ok_or_else(|| usage("certify needs --cert or --hom"))?;
    let n = a.src.n.ok_or_else(|| usage("--hom needs -n"))?;
    let map = match kind {
        HomKind::HigmanGn => higman_to_gn(a.source_n.unwrap_or(n), n),
        HomKind::HigmanKnx => {
            let base_name = a.src.base.as_deref().ok_or_else(|| usage("higman-knx needs --base"))?;
            let base = load(
                &SourceArgs {
                    source: Some(base_name.to_string()),
                    add_rel: Vec::new(),
                    ..a.src.clone()
                },
                ctx,
            )?;
            higman_to_knx(&base, &a.src.x, n)
        }
    }
    .map_err(usage)?;
    let certs = literal_certificates(&map);
    let _ = writeln!(ctx.out, "map {} -> {}", map.source.name(), map.target.name());
    let _ = writeln!(
        ctx.out,
        "relators certified {}/{}",
        certs.len(),
        map.source.relators().len()
    );
    let ok = match check_hom_certificate(&map, &certs) {
        Ok(ok) => ok,
        Err(PresentationError::MissingCertificate(i)) => {
            let _ = writeln!(ctx.out, "no certificate for source relator {i}");
            false
        }
        Err(e) => return Err(usage(e)),
    };
    let _ = writeln!(ctx.out, "hom certificate: {}", if ok { "valid" } else { "invalid" });
    Ok(if ok { EXIT_OK } else { EXIT_FAILED })
}

fn cmd_suite(a: &SuiteArgs, ctx: &mut Ctx) -> Result<i32, Exit> {
    let start = Instant::now();
    let _ = writeln!(ctx.out, "seed {}", a.seed);
    let _ = writeln!(ctx.out, "{}", SuiteReport::header());
    let reports = [
        instance_j().property_suite(a.samples, a.max_len, a.seed),
        instance_hhalf().property_suite(a.samples, a.max_len, a.seed),
        instance_q().property_suite(a.samples, a.max_len, a.seed),
        instance_t().property_suite(a.samples, a.max_len, a.seed),
    ];
    let mut failed = false;
    for r in &reports {
        let _ = writeln!(ctx.out, "{}", r.row());
        failed |= r.failures() > 0;
    }

    let h = instance_hhalf();
    let g = |s: &str| Word::named(h.alphabet(), s).expect("Hhalf generator");
    let pair = h.check_free(&[g("h@0"), g("x@1")], a.free_len).map_err(usage)?;
    let triple = h
        .check_free(&[hhalf_blocking_element(&h), g("h@0"), g("x@1")], a.blocking_len)
        .map_err(usage)?;
    let _ = writeln!(ctx.out, "letters\tmax_len\twords\tfree");
    let _ = writeln!(ctx.out, "h@0,x@1\t{}\t{}\t{}", a.free_len, pair.words_checked, pair.is_free());
    let _ = writeln!(
        ctx.out,
        "t,h@0,x@1\t{}\t{}\t{}",
        a.blocking_len,
        triple.words_checked,
        triple.is_free()
    );
    failed |= !pair.is_free() || !triple.is_free();

    let qt = check_qt_iso(a.samples, a.qt_len, a.seed);
    let _ = writeln!(ctx.out, "{}", crate::amalgam::QtReport::header());
    let _ = writeln!(ctx.out, "{}", qt.row());
    for w in qt.violations.iter().take(5) {
        let _ = writeln!(ctx.out, "violation {w}");
    }
    failed |= !qt.violations.is_empty();

    let b = britton_cross_check(a.samples, a.max_len, a.seed);
    let _ = writeln!(ctx.out, "britton_samples\tmax_len\tseed\ttrivial\tmismatches");
    let _ = writeln!(
        ctx.out,
        "{}\t{}\t{}\t{}\t{}",
        b.samples,
        b.max_len,
        b.seed,
        b.trivial,
        b.mismatches.len()
    );
    failed |= !b.mismatches.is_empty();
    ctx.elapsed(start);
    Ok(if failed { EXIT_FAILED } else { EXIT_OK })
}

fn cmd_arith(a: &ArithArgs, ctx: &mut Ctx) -> Result<i32, Exit> {
    if a.bound == 0 || a.n.contains(&0) {
        return Err(usage("cycle length and bound must be positive"));
    }
    let start = Instant::now();
    let g = DivisibilityGraph::new(a.bound).map_err(usage)?;
    let _ = writeln!(ctx.out, "bound {} edges {}", a.bound, g.num_edges());
    let mut ok = true;
    for &n in &a.n {
        let cycles = closed_walks(&g, n);
        let only_ones = cycles == vec![vec![1u64; n]];
        ok &= only_ones;
        let kind = if only_ones { "(all-ones)" } else { "(unexpected)" };
        let _ = writeln!(ctx.out, "n={n}: cycles found: {} {kind}", cycles.len());
        if !only_ones {
            for c in cycles.iter().take(5) {
                let _ = writeln!(ctx.out, "cycle {c:?}");
            }
        }
    }
    ctx.elapsed(start);
    Ok(if ok { EXIT_OK } else { EXIT_FAILED })
}

fn cmd_folner(ctx: &mut Ctx) -> Result<i32, Exit> {
    for step in folner_chain() {
        let _ = writeln!(
            ctx.out,
            "{}/{} > {}/{}\t{}\t{}",
            step.lhs.0,
            step.lhs.1,
            step.rhs.0,
            step.rhs.1,
            step.holds(),
            step.statement
        );
    }
    let ok = folner_bound_check();
    let (num, den) = folner_constant();
    let _ = writeln!(ctx.out, "squared constant {num}/{den}");
    let _ = writeln!(ctx.out, "folner bound: {}", if ok { "holds" } else { "fails" });
    Ok(if ok { EXIT_OK } else { EXIT_FAILED })
}

fn dispatch(cli: &Cli, ctx: &mut Ctx) -> Result<i32, Exit> {
    match &cli.command {
        Command::Build(a) => {
            let p = load(a, ctx)?;
            ctx.out.push_str(&write_presentation_file(&p));
            Ok(EXIT_OK)
        }
        Command::Enumerate(a) => cmd_enumerate(a, ctx),
        Command::Abelianize(a) => cmd_abelianize(a, ctx),
        Command::Quotients(a) => cmd_quotients(a, ctx),
        Command::Certify(a) => cmd_certify(a, ctx),
        Command::AmalgamSuite(a) => cmd_suite(a, ctx),
        Command::LemmaArith(a) => cmd_arith(a, ctx),
        Command::Folner => cmd_folner(ctx),
        Command::Emit(a) => {
            let p = load(&a.src, ctx)?;
            ctx.out.push_str(&match a.format {
                Format::Gap => emit_gap(&p),
                Format::Text => write_presentation_file(&p),
            });
            Ok(EXIT_OK)
        }
    }
}

/// Run the command line `argv` (including the program name) and return
/// the exit code.
pub fn run<I, S>(argv: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let mut ctx = Ctx {
        stdin,
        out: String::new(),
        timing: !cli.no_timing,
    };
    let result = dispatch(&cli, &mut ctx);
    let _ = stdout.write_all(ctx.out.as_bytes());
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.msg);
            e.code
        }
    }
}
