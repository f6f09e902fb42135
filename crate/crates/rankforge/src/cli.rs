//! Command-line front end: rank tables, exact slice expansions, identity
//! certification, coefficient solving, symmetry transport, and cusp-order
//! reports, driven by an embedded identity database.
//!
//! Exit codes: 0 on success (including a proved or matched verification),
//! 1 when a mathematical check fails (a mismatching identity, a violated
//! structural zero, a rank class that is not equinumerous), and 2 for
//! usage or input errors, including a requested expansion depth below the
//! valence requirement without `--unsafe`.
//!
//! All reports are deterministic byte-for-byte: rows follow the stored
//! order, JSON objects are emitted with sorted keys, and nothing
//! time- or environment-dependent is printed. `RANKFORGE_THREADS` bounds
//! the worker pool used for multi-slice verification.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::cyclotomic::CycNum;
use crate::dissection::{classify, correction_coefficient, correction_exponent_num, k_series, s_p, DissectionClass};
use crate::error::{Error, Result};
use crate::etaforms::{lattice_den, EtaVector};
use crate::prover::{
    cusp_analysis, kp0_coefficient_symmetry, solve_coefficients, symmetry_generate,
    verify_identity, Certificate, Identity, IdentityTerm, Verdict, VerifyMode,
};
use crate::ranks::{dyson_check, rank_table};

// ============================================================================
// Embedded identity database
// ============================================================================

/// The identity database shipped inside the binary, so every subcommand is
/// hermetic: no files are read unless `--file` asks for one.
pub const BUILTIN_JSON: &str = include_str!("builtin_identities.json");

/// FNV-1a checksum of `BUILTIN_JSON`, pinned so a stray edit to the
/// embedded data cannot slip past the loader.
const BUILTIN_FNV1A: u64 = 0x49607d395b2af3a4;

/// 64-bit FNV-1a over raw bytes.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EntryKind {
    /// A single identity with stored coefficients.
    Identity,
    /// One identity per slice m = 0..p-1, proving a whole dissection.
    SliceGroup,
    /// Term structure only; the coefficients are meant to be solved.
    Skeleton,
}

impl EntryKind {
    pub fn label(self) -> &'static str {
        match self {
            EntryKind::Identity => "identity",
            EntryKind::SliceGroup => "slice-group",
            EntryKind::Skeleton => "skeleton",
        }
    }
}

/// The Phi-correction metadata carried by a slice whose index is a
/// quadratic residue times -24.
#[derive(Clone, Debug)]
pub struct Correction {
    pub a: u32,
    pub coefficient: CycNum,
}

/// One identity of the database together with its slice metadata.
#[derive(Clone, Debug)]
pub struct DbItem {
    pub label: String,
    pub identity: Identity,
    pub correction: Option<Correction>,
    /// Term indices a correct coefficient solve must send to zero.
    pub known_zeros: Vec<usize>,
}

/// A named database entry: a single identity, a slice group, or a skeleton.
#[derive(Clone, Debug)]
pub struct DbEntry {
    pub name: String,
    pub title: String,
    pub kind: EntryKind,
    pub p: u32,
    pub items: Vec<DbItem>,
}

impl DbEntry {
    pub fn term_count(&self) -> usize {
        self.items.iter().map(|i| i.identity.terms.len()).sum()
    }
}

fn jget<'a>(v: &'a Value, key: &str, ctx: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| Error::Parse(format!("{ctx}: missing `{key}`")))
}

fn jstr<'a>(v: &'a Value, key: &str, ctx: &str) -> Result<&'a str> {
    jget(v, key, ctx)?
        .as_str()
        .ok_or_else(|| Error::Parse(format!("{ctx}: `{key}` must be a string")))
}

fn jint(v: &Value, key: &str, ctx: &str) -> Result<i64> {
    jget(v, key, ctx)?
        .as_i64()
        .ok_or_else(|| Error::Parse(format!("{ctx}: `{key}` must be an integer")))
}

fn jarr<'a>(v: &'a Value, key: &str, ctx: &str) -> Result<&'a Vec<Value>> {
    jget(v, key, ctx)?
        .as_array()
        .ok_or_else(|| Error::Parse(format!("{ctx}: `{key}` must be an array")))
}

/// Parse one slice/identity object into a `DbItem`, expanding its term
/// families in canonical order: families as listed, the eta-ratio index k
/// ascending within a family, and the permutation index r ascending within
/// a k-block.
fn parse_item(p: u32, label: &str, v: &Value, skeleton: bool) -> Result<DbItem> {
    let h = ((p - 1) / 2) as usize;
    let m = jint(v, "m", label)?;
    let step = jint(v, "ratio_step", label)?;

    let mut vectors = Vec::new();
    for (i, row) in jarr(v, "vectors", label)?.iter().enumerate() {
        let row = row
            .as_array()
            .ok_or_else(|| Error::Parse(format!("{label}: vector {i} must be an array")))?;
        let ints: Option<Vec<i64>> = row.iter().map(Value::as_i64).collect();
        let ints =
            ints.ok_or_else(|| Error::Parse(format!("{label}: vector {i} has a non-integer")))?;
        if ints.len() != 1 + h {
            return Err(Error::Parse(format!(
                "{label}: vector {i} has {} entries, expected {}",
                ints.len(),
                1 + h
            )));
        }
        vectors.push(EtaVector::from_slice(p, &ints));
    }

    let families = jarr(v, "families", label)?;
    let mut terms: Vec<IdentityTerm> = Vec::new();
    // Per family: starting term index, low end of the k range, and the
    // number of permutation indices per k-block, for zero-slot addressing.
    let mut shapes: Vec<(usize, i64, usize)> = Vec::new();
    for (fi, fam) in families.iter().enumerate() {
        let ctx = format!("{label}: family {fi}");
        let vec_i = jint(fam, "vec", &ctx)? as usize;
        if vec_i >= vectors.len() {
            return Err(Error::Parse(format!("{ctx}: vector index {vec_i} out of range")));
        }
        let prefactor = match fam.get("prefactor") {
            None | Some(Value::Null) => None,
            Some(pf) => Some((
                jint(pf, "num", &ctx)? as u32,
                jint(pf, "den", &ctx)? as u32,
            )),
        };
        let kr = jarr(fam, "k_range", &ctx)?;
        if kr.len() != 2 {
            return Err(Error::Parse(format!("{ctx}: k_range must be [lo, hi]")));
        }
        let (k_lo, k_hi) = (
            kr[0].as_i64().ok_or_else(|| Error::Parse(format!("{ctx}: bad k_range")))?,
            kr[1].as_i64().ok_or_else(|| Error::Parse(format!("{ctx}: bad k_range")))?,
        );
        if k_hi < k_lo {
            return Err(Error::Parse(format!("{ctx}: empty k_range")));
        }
        let blocks = (k_hi - k_lo + 1) as usize;
        let coeffs = fam.get("coefficients").and_then(Value::as_array);
        if skeleton != coeffs.is_none() {
            return Err(Error::Parse(format!(
                "{ctx}: skeleton entries carry no coefficients, identities must"
            )));
        }
        let r_count = match coeffs {
            None => h,
            Some(cols) => {
                if cols.len() != blocks {
                    return Err(Error::Parse(format!(
                        "{ctx}: {} coefficient blocks for {blocks} k values",
                        cols.len()
                    )));
                }
                let first = cols[0]
                    .as_array()
                    .ok_or_else(|| Error::Parse(format!("{ctx}: coefficient blocks must be arrays")))?
                    .len();
                if first == 0 {
                    return Err(Error::Parse(format!("{ctx}: empty coefficient block")));
                }
                first
            }
        };
        shapes.push((terms.len(), k_lo, r_count));
        for (ki, k) in (k_lo..=k_hi).enumerate() {
            for r in 1..=r_count {
                let coeff = match coeffs {
                    None => CycNum::zero(p),
                    Some(cols) => {
                        let block = cols[ki].as_array().ok_or_else(|| {
                            Error::Parse(format!("{ctx}: coefficient blocks must be arrays"))
                        })?;
                        if block.len() != r_count {
                            return Err(Error::Parse(format!(
                                "{ctx}: ragged coefficient block at k = {k}"
                            )));
                        }
                        let s = block[r - 1].as_str().ok_or_else(|| {
                            Error::Parse(format!("{ctx}: coefficients must be strings"))
                        })?;
                        CycNum::parse(p, s)?
                    }
                };
                terms.push(IdentityTerm {
                    coeff,
                    vec: vec_i,
                    r: r as u32,
                    eta_ratio_pow: step * k,
                    prefactor,
                });
            }
        }
    }

    let mut known_zeros: Vec<usize> = Vec::new();
    if let Some(zspecs) = v.get("known_zeros").and_then(Value::as_array) {
        if !skeleton && !zspecs.is_empty() {
            return Err(Error::Parse(format!(
                "{label}: known_zeros only applies to skeletons; explicit identities \
                 record zeros as `0` coefficients"
            )));
        }
        for spec in zspecs {
            let fi = jint(spec, "family", label)? as usize;
            let k = jint(spec, "k", label)?;
            let (offset, k_lo, r_count) = *shapes
                .get(fi)
                .ok_or_else(|| Error::Parse(format!("{label}: zero spec names family {fi}")))?;
            if k < k_lo || (k - k_lo) as usize * r_count >= terms.len() {
                return Err(Error::Parse(format!("{label}: zero spec has k = {k} off range")));
            }
            for r in jarr(spec, "r", label)? {
                let r = r
                    .as_u64()
                    .ok_or_else(|| Error::Parse(format!("{label}: zero spec r must be integral")))?
                    as usize;
                if r == 0 || r > r_count {
                    return Err(Error::Parse(format!("{label}: zero spec r = {r} off range")));
                }
                known_zeros.push(offset + (k - k_lo) as usize * r_count + (r - 1));
            }
        }
        known_zeros.sort_unstable();
        known_zeros.dedup();
        if known_zeros.iter().any(|&i| i >= terms.len()) {
            return Err(Error::Parse(format!("{label}: zero spec points past the terms")));
        }
    }

    // The correction metadata must agree with the classifier in both
    // directions, and the stored coefficient must equal the closed form.
    let correction = match v.get("correction") {
        None | Some(Value::Null) => None,
        Some(c) => {
            let a = jint(c, "a", label)? as u32;
            let coefficient = CycNum::parse(p, jstr(c, "coefficient", label)?)?;
            Some(Correction { a, coefficient })
        }
    };
    match (classify(p, m), &correction) {
        (DissectionClass::Residue { a }, Some(c)) => {
            if c.a != a {
                return Err(Error::Parse(format!(
                    "{label}: correction witness {} but the classifier gives {a}",
                    c.a
                )));
            }
            if c.coefficient != correction_coefficient(p, 1, a) {
                return Err(Error::Parse(format!(
                    "{label}: stored correction coefficient differs from the closed form"
                )));
            }
        }
        (DissectionClass::Residue { a }, None) => {
            return Err(Error::Parse(format!(
                "{label}: slice carries a Phi correction (witness {a}) but none is stored"
            )));
        }
        (_, Some(_)) => {
            return Err(Error::Parse(format!(
                "{label}: a correction is stored but the slice carries none"
            )));
        }
        (_, None) => {}
    }

    let identity = Identity::new(p, m, vectors, terms, format!("builtin:{label}"))?;
    Ok(DbItem { label: label.to_string(), identity, correction, known_zeros })
}

fn parse_entry(v: &Value) -> Result<DbEntry> {
    let name = jstr(v, "name", "database entry")?.to_string();
    let title = jstr(v, "title", &name)?.to_string();
    let p = jint(v, "p", &name)? as u32;
    if !is_odd_prime(p) || p < 5 {
        return Err(Error::Parse(format!("{name}: p = {p} is not a prime >= 5")));
    }
    let kind = match jstr(v, "kind", &name)? {
        "identity" => EntryKind::Identity,
        "group" => EntryKind::SliceGroup,
        "skeleton" => EntryKind::Skeleton,
        other => return Err(Error::Parse(format!("{name}: unknown kind `{other}`"))),
    };
    let items = match kind {
        EntryKind::SliceGroup => {
            let slices = jarr(v, "slices", &name)?;
            if slices.len() != p as usize {
                return Err(Error::Parse(format!(
                    "{name}: {} slices for a {p}-dissection",
                    slices.len()
                )));
            }
            let mut items = Vec::with_capacity(slices.len());
            for (i, s) in slices.iter().enumerate() {
                let item = parse_item(p, &format!("{name}/m{i}"), s, false)?;
                if item.identity.m != i as i64 {
                    return Err(Error::Parse(format!("{name}: slice {i} stores m = {}", item.identity.m)));
                }
                items.push(item);
            }
            items
        }
        EntryKind::Identity => vec![parse_item(p, &name, v, false)?],
        EntryKind::Skeleton => vec![parse_item(p, &name, v, true)?],
    };
    Ok(DbEntry { name, title, kind, p, items })
}

/// Load and validate the embedded database. Every invariant the rest of
/// the tool relies on is checked here: the byte checksum, the slice
/// coverage of groups, the correction metadata against the classifier,
/// and the zero-slot bookkeeping of skeletons.
pub fn builtin_database() -> Result<Vec<DbEntry>> {
    let sum = fnv1a64(BUILTIN_JSON.as_bytes());
    if sum != BUILTIN_FNV1A {
        return Err(Error::Parse(format!(
            "embedded identity database failed its integrity check (fnv1a64 = {sum:#018x})"
        )));
    }
    let root: Value = serde_json::from_str(BUILTIN_JSON)
        .map_err(|e| Error::Parse(format!("embedded identity database: {e}")))?;
    if root.get("format").and_then(Value::as_i64) != Some(1) {
        return Err(Error::Parse("embedded identity database: unknown format".into()));
    }
    let list = jarr(&root, "identities", "embedded identity database")?;
    let mut out: Vec<DbEntry> = Vec::with_capacity(list.len());
    for v in list {
        let entry = parse_entry(v)?;
        if out.iter().any(|e| e.name == entry.name) {
            return Err(Error::Parse(format!("duplicate database entry `{}`", entry.name)));
        }
        out.push(entry);
    }
    Ok(out)
}

/// Look up an entry by name; the `builtin:` prefix is optional.
pub fn find_entry<'a>(db: &'a [DbEntry], name: &str) -> Option<&'a DbEntry> {
    let bare = name.strip_prefix("builtin:").unwrap_or(name);
    db.iter().find(|e| e.name == bare)
}

// ============================================================================
// Argument grammar
// ============================================================================

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Tsv,
    Json,
}

#[derive(Args)]
struct OutputOpts {
    /// Report format.
    #[arg(long, value_enum, default_value = "tsv")]
    format: Format,
    /// Write the report to this path instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Target {
    /// Name in the embedded database (list-identities shows them); the
    /// `builtin:` prefix is accepted.
    #[arg(long, conflicts_with = "file", required_unless_present = "file")]
    id: Option<String>,
    /// Load the identity from a JSON file in the interchange schema.
    #[arg(long)]
    file: Option<PathBuf>,
}

#[derive(Parser)]
#[command(
    name = "rankforge",
    version,
    about = "Exact p-dissection slices of the partition-rank generating function: \
             expansion, eta-quotient certification, and symmetry transport"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Tabulate N(k, t, n), the number of partitions of n with rank
    /// congruent to k mod t.
    RankTable {
        /// Rank-class modulus.
        #[arg(long)]
        t: u32,
        /// Largest partition argument tabulated.
        #[arg(long, default_value_t = 20)]
        nmax: usize,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Expand one dissection slice K_{p,m}(zeta_p^d, z) exactly, with its
    /// Phi correction when the slice carries one.
    Dissect {
        /// Dissection prime (>= 5).
        #[arg(long)]
        p: u32,
        /// Slice index, taken mod p.
        #[arg(long)]
        m: i64,
        /// Root-of-unity exponent, 1 <= d <= p-1.
        #[arg(long, default_value_t = 1)]
        d: u32,
        /// Expand through q^terms.
        #[arg(long, default_value_t = 20)]
        terms: i64,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Certify an identity (or every slice of a group) by the valence
    /// bound, or merely match coefficients with --unsafe.
    Verify {
        #[command(flatten)]
        target: Target,
        /// Expansion depth in q-units; without --unsafe it must cover the
        /// valence requirement (the default does, with a margin).
        #[arg(long)]
        terms: Option<i64>,
        /// Compare coefficients through --terms only; no proof is claimed.
        #[arg(long = "unsafe", requires = "terms")]
        unsafe_expansion: bool,
        /// Rewrite over the pi_w-permuted base vectors first.
        #[arg(long)]
        rebase: Option<u32>,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Solve the coefficients of a skeleton (stored coefficients are
    /// ignored) and check structural zeros and any stored values.
    Solve {
        #[command(flatten)]
        target: Target,
        /// Extra expansion rows past the square system.
        #[arg(long, default_value_t = 8)]
        extra: usize,
        /// Run a full valence certification on the solved identity.
        #[arg(long)]
        certify: bool,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Transport an identity for slice m to one for slice m*a^2 mod p.
    SymmetryGenerate {
        #[command(flatten)]
        target: Target,
        /// Symmetry index, 1 <= a <= (p-1)/2.
        #[arg(long)]
        a: u32,
        /// Certify the generated identity.
        #[arg(long)]
        verify: bool,
        /// Expansion depth in q-units for --verify.
        #[arg(long)]
        terms: Option<i64>,
        /// Compare coefficients through --terms only; no proof is claimed.
        #[arg(long = "unsafe", requires = "terms")]
        unsafe_expansion: bool,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Check the closed-form coefficient symmetry of an m = 0 identity:
    /// within each family every coefficient is a signed Galois twist of
    /// the r = 1 one.
    Kp0Symmetry {
        #[command(flatten)]
        target: Target,
        /// Rewrite over the pi_w-permuted base vectors first.
        #[arg(long)]
        rebase: Option<u32>,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Print the modularity gates, the cusp ORD table, the lambda bounds,
    /// and the valence requirement for an identity.
    CuspReport {
        #[command(flatten)]
        target: Target,
        /// Rewrite over the pi_w-permuted base vectors first.
        #[arg(long)]
        rebase: Option<u32>,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Certify that all p rank classes are equinumerous along an
    /// arithmetic progression (default: the classical one, n ≡ -s_p).
    DysonCheck {
        /// Class modulus (an odd prime >= 5).
        #[arg(long)]
        p: u32,
        /// Progression residue; defaults to -s_p mod p.
        #[arg(long)]
        r: Option<i64>,
        /// Largest partition argument checked.
        #[arg(long, default_value_t = 50)]
        nmax: i64,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// List the embedded identity database.
    ListIdentities {
        #[command(flatten)]
        output: OutputOpts,
    },
}

// ============================================================================
// Shared helpers
// ============================================================================

fn is_odd_prime(p: u32) -> bool {
    if p < 3 || p % 2 == 0 {
        return false;
    }
    let mut d = 3;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// The classical progression residue for the equidistribution check.
fn default_dyson_r(p: u32) -> i64 {
    (-s_p(p)).rem_euclid(p as i64)
}

/// Reduced fraction `num/den` as text, `den > 0`.
fn frac_str(num: i64, den: i64) -> String {
    let g = num_integer::gcd(num, den).max(1);
    let (n, d) = (num / g, den / g);
    if d == 1 {
        n.to_string()
    } else {
        format!("{n}/{d}")
    }
}

fn pf_str(pf: Option<(u32, u32)>) -> String {
    match pf {
        Some((a, b)) => format!("f{a}/f{b}"),
        None => "-".into(),
    }
}

fn resolve(target: &Target) -> Result<(String, EntryKind, Vec<DbItem>)> {
    if let Some(id) = &target.id {
        let db = builtin_database()?;
        let entry = find_entry(&db, id)
            .ok_or_else(|| Error::UnknownIdentity(id.clone()))?;
        Ok((entry.name.clone(), entry.kind, entry.items.clone()))
    } else {
        let path = target.file.as_ref().expect("the argument grammar requires --id or --file");
        let text = std::fs::read_to_string(path)?;
        let v: Value = serde_json::from_str(&text)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        let identity = Identity::from_json(&v)?;
        let label = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "file".into());
        Ok((
            label.clone(),
            EntryKind::Identity,
            vec![DbItem { label, identity, correction: None, known_zeros: Vec::new() }],
        ))
    }
}

fn single(name: &str, items: Vec<DbItem>, what: &str) -> Result<DbItem> {
    if items.len() == 1 {
        Ok(items.into_iter().next().expect("length checked"))
    } else {
        Err(Error::Domain(format!(
            "{what} takes a single identity; `{name}` is a {}-slice group",
            items.len()
        )))
    }
}

fn apply_rebase(id: &Identity, rebase: Option<u32>) -> Result<Identity> {
    match rebase {
        Some(w) => id.rebase(w),
        None => Ok(id.clone()),
    }
}

fn choose_mode(terms: Option<i64>, unsafe_expansion: bool) -> Result<VerifyMode> {
    match (terms, unsafe_expansion) {
        (None, false) => Ok(VerifyMode::Valence { depth: None }),
        (Some(t), false) => Ok(VerifyMode::Valence { depth: Some(t) }),
        (Some(t), true) => Ok(VerifyMode::Expansion { depth: t }),
        (None, true) => Err(Error::Domain("--unsafe requires --terms".into())),
    }
}

fn verdict_ok(v: &Verdict) -> bool {
    matches!(v, Verdict::Proved | Verdict::MatchedToDepth { .. })
}

/// One TSV row summarizing a certificate; mismatches get their earliest
/// differing exponent spelled out as an exact q-power.
fn certificate_row(label: &str, cert: &Certificate) -> String {
    let (b, required) = match &cert.cusp {
        Some(c) => (c.b_constant.to_string(), c.required.to_string()),
        None => ("-".into(), "-".into()),
    };
    let mut row = format!(
        "{label}\t{}\t{b}\t{required}\t{}\t{}\n",
        cert.verdict,
        frac_str(cert.truncation, cert.den),
        cert.matched
    );
    if let Verdict::Mismatch { exponent_num, .. } = &cert.verdict {
        row.push_str(&format!(
            "# first mismatch of `{label}` at q^{}\n",
            frac_str(*exponent_num, cert.den)
        ));
    }
    row
}

fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serialization of plain data cannot fail");
    s.push('\n');
    s
}

// ============================================================================
// Subcommands
// ============================================================================

fn cmd_rank_table(t: u32, nmax: usize, format: Format) -> Result<(bool, String)> {
    if t == 0 {
        return Err(Error::Domain("the rank-class modulus t must be positive".into()));
    }
    let table = rank_table(t, nmax);
    let text = match format {
        Format::Tsv => {
            let mut s = String::from("n");
            for k in 0..t {
                s.push_str(&format!("\tk={k}"));
            }
            s.push('\n');
            for (n, row) in table.iter().enumerate() {
                s.push_str(&n.to_string());
                for c in row {
                    s.push_str(&format!("\t{c}"));
                }
                s.push('\n');
            }
            s
        }
        Format::Json => {
            let rows: Vec<Value> = table
                .iter()
                .enumerate()
                .map(|(n, row)| json!({"n": n, "counts": row}))
                .collect();
            json_text(&json!({"t": t, "nmax": nmax, "rows": rows}))
        }
    };
    Ok((true, text))
}

fn cmd_dissect(p: u32, m: i64, d: u32, terms: i64, format: Format) -> Result<(bool, String)> {
    if !is_odd_prime(p) || p < 5 {
        return Err(Error::Domain(format!("p = {p} is not a prime >= 5")));
    }
    if d == 0 || d >= p {
        return Err(Error::Domain(format!("d = {d} is outside 1..{p}")));
    }
    if terms < 1 {
        return Err(Error::Domain("--terms must be at least 1".into()));
    }
    let m = m.rem_euclid(p as i64);
    let dd = lattice_den(p);
    let series = k_series(p, m, d, terms * dd)?;
    let class = classify(p, m);
    let text = match format {
        Format::Tsv => {
            let mut s = format!("# slice p={p} m={m} d={d} through q^{terms}\n");
            match class {
                DissectionClass::Zero => s.push_str("# class: zero slice\n"),
                DissectionClass::NonResidue => s.push_str("# class: nonresidue, no correction\n"),
                DissectionClass::Residue { a } => s.push_str(&format!(
                    "# class: residue, correction {} * q^{} * Phi_{{{p},{a}}}(q)\n",
                    correction_coefficient(p, d, a),
                    frac_str(correction_exponent_num(p, m, a), dd),
                )),
            }
            s.push_str("exponent\tcoefficient\n");
            for (e, c) in series.terms() {
                s.push_str(&format!("{}\t{c}\n", frac_str(e, dd)));
            }
            s
        }
        Format::Json => {
            let class_json = match class {
                DissectionClass::Zero => json!({"kind": "zero"}),
                DissectionClass::NonResidue => json!({"kind": "nonresidue"}),
                DissectionClass::Residue { a } => json!({
                    "kind": "residue",
                    "a": a,
                    "coefficient": correction_coefficient(p, d, a).to_string(),
                    "exponent": frac_str(correction_exponent_num(p, m, a), dd),
                }),
            };
            let rows: Vec<Value> = series
                .terms()
                .iter()
                .map(|(e, c)| {
                    json!({"num": e, "exponent": frac_str(*e, dd), "coefficient": c.to_string()})
                })
                .collect();
            json_text(&json!({
                "p": p, "m": m, "d": d, "den": dd, "class": class_json, "terms": rows,
            }))
        }
    };
    Ok((true, text))
}

fn cmd_verify(
    target: &Target,
    terms: Option<i64>,
    unsafe_expansion: bool,
    rebase: Option<u32>,
    format: Format,
) -> Result<(bool, String)> {
    let (name, _kind, items) = resolve(target)?;
    let mode = choose_mode(terms, unsafe_expansion)?;
    let prepared: Vec<(String, Identity)> = items
        .iter()
        .map(|it| Ok((it.label.clone(), apply_rebase(&it.identity, rebase)?)))
        .collect::<Result<_>>()?;
    let certs: Vec<(String, Certificate)> = prepared
        .into_par_iter()
        .map(|(label, id)| verify_identity(&id, &mode).map(|c| (label, c)))
        .collect::<Result<_>>()?;
    let pass = certs.iter().all(|(_, c)| verdict_ok(&c.verdict));
    let text = match format {
        Format::Tsv => {
            let mut s = String::from("item\tverdict\tB\trequired\twindow\tmatched\n");
            for (label, cert) in &certs {
                s.push_str(&certificate_row(label, cert));
            }
            s
        }
        Format::Json => {
            let results: Vec<Value> = certs
                .iter()
                .map(|(label, c)| json!({"item": label, "certificate": c.to_json()}))
                .collect();
            json_text(&json!({"name": name, "results": results, "all_proved": pass}))
        }
    };
    Ok((pass, text))
}

fn cmd_solve(
    target: &Target,
    extra: usize,
    certify: bool,
    format: Format,
) -> Result<(bool, String)> {
    let (name, _kind, items) = resolve(target)?;
    let item = single(&name, items, "solve")?;
    let solved = solve_coefficients(&item.identity, extra)?;

    let mut problems: Vec<String> = Vec::new();
    for &i in &item.known_zeros {
        if !solved.terms[i].coeff.is_zero() {
            problems.push(format!(
                "term {i} must vanish structurally but solved to {}",
                solved.terms[i].coeff
            ));
        }
    }
    let stored_live = item.identity.live_terms();
    if !stored_live.is_empty() {
        for (i, (got, want)) in solved.terms.iter().zip(&item.identity.terms).enumerate() {
            if got.coeff != want.coeff {
                problems.push(format!(
                    "term {i} solved to {} but the stored value is {}",
                    got.coeff, want.coeff
                ));
            }
        }
    }
    let cert = if certify {
        Some(verify_identity(&solved, &VerifyMode::Valence { depth: None })?)
    } else {
        None
    };
    let pass = problems.is_empty() && cert.as_ref().map_or(true, Certificate::proved);

    let text = match format {
        Format::Tsv => {
            let mut s = String::from("term\tvec\tr\tratio_pow\tprefactor\tcoefficient\n");
            for (i, t) in solved.terms.iter().enumerate() {
                s.push_str(&format!(
                    "{i}\t{}\t{}\t{}\t{}\t{}\n",
                    t.vec,
                    t.r,
                    t.eta_ratio_pow,
                    pf_str(t.prefactor),
                    t.coeff
                ));
            }
            for prob in &problems {
                s.push_str(&format!("# problem: {prob}\n"));
            }
            if let Some(c) = &cert {
                s.push_str(&certificate_row(&name, c));
            }
            s
        }
        Format::Json => json_text(&json!({
            "name": name,
            "solved": solved.to_json(),
            "problems": problems,
            "certificate": cert.as_ref().map(Certificate::to_json),
            "pass": pass,
        })),
    };
    Ok((pass, text))
}

fn cmd_symmetry_generate(
    target: &Target,
    a: u32,
    verify: bool,
    terms: Option<i64>,
    unsafe_expansion: bool,
    format: Format,
) -> Result<(bool, String)> {
    let (name, _kind, items) = resolve(target)?;
    let item = single(&name, items, "symmetry-generate")?;
    let generated = symmetry_generate(&item.identity, a)?;
    let cert = if verify {
        Some(verify_identity(&generated, &choose_mode(terms, unsafe_expansion)?)?)
    } else {
        None
    };
    let pass = cert.as_ref().map_or(true, |c| verdict_ok(&c.verdict));
    let text = match format {
        Format::Tsv => {
            let mut s = format!(
                "# transported `{name}` (m = {}) by a = {a} to m = {}\n",
                item.identity.m, generated.m
            );
            s.push_str("term\tvec\tr\tratio_pow\tprefactor\tcoefficient\n");
            for (i, t) in generated.terms.iter().enumerate() {
                s.push_str(&format!(
                    "{i}\t{}\t{}\t{}\t{}\t{}\n",
                    t.vec,
                    t.r,
                    t.eta_ratio_pow,
                    pf_str(t.prefactor),
                    t.coeff
                ));
            }
            if let Some(c) = &cert {
                s.push_str(&certificate_row(&name, c));
            }
            s
        }
        Format::Json => json_text(&json!({
            "source": name,
            "a": a,
            "m_source": item.identity.m,
            "m_target": generated.m,
            "identity": generated.to_json(),
            "certificate": cert.as_ref().map(Certificate::to_json),
            "pass": pass,
        })),
    };
    Ok((pass, text))
}

fn cmd_kp0_symmetry(
    target: &Target,
    rebase: Option<u32>,
    format: Format,
) -> Result<(bool, String)> {
    let (name, _kind, items) = resolve(target)?;
    let item = single(&name, items, "kp0-symmetry")?;
    let id = apply_rebase(&item.identity, rebase)?;
    let families = kp0_coefficient_symmetry(&id)?;
    let pass = families.iter().all(|f| f.pass.iter().all(|&b| b));
    let text = match format {
        Format::Tsv => {
            let mut s = String::from("family\tvec\tratio_pow\tprefactor\td\tw\tok\n");
            for (fi, fam) in families.iter().enumerate() {
                for (di, (&w, &ok)) in fam.w.iter().zip(&fam.pass).enumerate() {
                    s.push_str(&format!(
                        "{fi}\t{}\t{}\t{}\t{}\t{w}\t{ok}\n",
                        fam.vec,
                        fam.eta_ratio_pow,
                        pf_str(fam.prefactor),
                        di + 1
                    ));
                }
            }
            s
        }
        Format::Json => {
            let rows: Vec<Value> = families
                .iter()
                .map(|f| {
                    json!({
                        "vec": f.vec,
                        "ratio_pow": f.eta_ratio_pow,
                        "prefactor": f.prefactor.map(|(a, b)| json!({"num": a, "den": b})),
                        "w": f.w,
                        "pass": f.pass,
                    })
                })
                .collect();
            json_text(&json!({"name": name, "families": rows, "all_pass": pass}))
        }
    };
    Ok((pass, text))
}

fn cmd_cusp_report(
    target: &Target,
    rebase: Option<u32>,
    format: Format,
) -> Result<(bool, String)> {
    let (name, _kind, items) = resolve(target)?;
    let item = single(&name, items, "cusp-report")?;
    let id = apply_rebase(&item.identity, rebase)?;
    let (gates, report, min_trunc) = cusp_analysis(&id)?;
    let p = id.p;
    let dd = lattice_den(p);
    let labels: Vec<String> = report.cusps.iter().map(|c| c.label(p)).collect();
    let text = match format {
        Format::Tsv => {
            let mut s = format!("# cusp report for `{name}` (p = {p}, m = {})\n", id.m);
            s.push_str("# gates\nterm\tweight_sum\tclass_sum\tcusp_sum\tpass\n");
            for (i, g) in &gates {
                s.push_str(&format!(
                    "{i}\t{}\t{}\t{}\t{}\n",
                    g.weight_sum,
                    g.class_sum,
                    g.cusp_sum,
                    g.pass()
                ));
            }
            match report.j0_term {
                Some(n) => s.push_str(&format!(
                    "# normalizer j0 = term {n}; table entries are ORD(j_t/j0)\n"
                )),
                None => s.push_str("# raw orders (weight-1 slice, no normalizer)\n"),
            }
            s.push_str(&format!("term\t{}\n", labels.join("\t")));
            if let (Some(n), Some(j0row)) = (report.j0_term, &report.j0_orders) {
                let cells: Vec<String> = j0row.iter().map(|x| x.to_string()).collect();
                s.push_str(&format!("j0={n}\t{}\n", cells.join("\t")));
            }
            for (t, row) in report.term_indices.iter().zip(&report.rows) {
                let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
                s.push_str(&format!("{t}\t{}\n", cells.join("\t")));
            }
            s.push_str("# lambda lower bounds for the slice\ncusp\tlambda\n");
            for (c, l) in labels[1..].iter().zip(&report.lambda) {
                s.push_str(&format!("{c}\t{l}\n"));
            }
            s.push_str(&format!(
                "# B = {}, weight term = {}, required R = {}, proof window q^{}\n",
                report.b_constant,
                report.weight_term,
                report.required,
                frac_str(min_trunc, dd)
            ));
            s
        }
        Format::Json => {
            let gates_json: Vec<Value> = gates
                .iter()
                .map(|(i, g)| {
                    json!({
                        "term": i,
                        "weight_sum": g.weight_sum,
                        "class_sum": g.class_sum,
                        "cusp_sum": g.cusp_sum,
                        "pass": g.pass(),
                    })
                })
                .collect();
            json_text(&json!({
                "name": name,
                "p": p,
                "m": id.m,
                "cusps": labels,
                "gates": gates_json,
                "terms": report.term_indices,
                "rows": report
                    .rows
                    .iter()
                    .map(|row| row.iter().map(|x| x.to_string()).collect::<Vec<_>>())
                    .collect::<Vec<_>>(),
                "raw_infinity": report.raw_infinity.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
                "j0_term": report.j0_term,
                "j0_orders": report
                    .j0_orders
                    .as_ref()
                    .map(|row| row.iter().map(|x| x.to_string()).collect::<Vec<_>>()),
                "lambda": report.lambda,
                "B": report.b_constant.to_string(),
                "weight_term": report.weight_term.to_string(),
                "required": report.required.to_string(),
                "window_num": min_trunc,
                "den": dd,
            }))
        }
    };
    Ok((true, text))
}

fn cmd_dyson_check(
    p: u32,
    r: Option<i64>,
    nmax: i64,
    format: Format,
) -> Result<(bool, String)> {
    if !is_odd_prime(p) || p < 5 {
        return Err(Error::Domain(format!("p = {p} is not a prime >= 5")));
    }
    let r = r.unwrap_or_else(|| default_dyson_r(p));
    if r < 0 || r >= p as i64 {
        return Err(Error::Domain(format!("r = {r} is outside 0..{p}")));
    }
    if nmax < 0 {
        return Err(Error::Domain("--nmax must be nonnegative".into()));
    }
    match dyson_check(p, r, nmax) {
        Ok(witnesses) => {
            let text = match format {
                Format::Tsv => {
                    let mut s = format!(
                        "# all {p} rank classes are equinumerous for n = {r} (mod {p}), n <= {nmax}\n"
                    );
                    s.push_str("n\tclass_count\n");
                    for w in &witnesses {
                        s.push_str(&format!("{}\t{}\n", w.n, w.class_count));
                    }
                    s
                }
                Format::Json => {
                    let rows: Vec<Value> = witnesses
                        .iter()
                        .map(|w| json!({"n": w.n, "count": w.class_count.to_string()}))
                        .collect();
                    json_text(&json!({
                        "p": p, "r": r, "nmax": nmax, "witnesses": rows, "pass": true,
                    }))
                }
            };
            Ok((true, text))
        }
        // The arguments were validated above, so an error here is a
        // genuine counterexample report, not a usage problem.
        Err(Error::Domain(msg)) => {
            let text = match format {
                Format::Tsv => format!("# equidistribution FAILED: {msg}\n"),
                Format::Json => json_text(&json!({
                    "p": p, "r": r, "nmax": nmax, "failure": msg, "pass": false,
                })),
            };
            Ok((false, text))
        }
        Err(e) => Err(e),
    }
}

fn cmd_list_identities(format: Format) -> Result<(bool, String)> {
    let db = builtin_database()?;
    let text = match format {
        Format::Tsv => {
            let mut s = String::from("name\tkind\tp\titems\tterms\ttitle\n");
            for e in &db {
                s.push_str(&format!(
                    "{}\t{}\t{}\t{}\t{}\t{}\n",
                    e.name,
                    e.kind.label(),
                    e.p,
                    e.items.len(),
                    e.term_count(),
                    e.title
                ));
            }
            s
        }
        Format::Json => {
            let rows: Vec<Value> = db
                .iter()
                .map(|e| {
                    json!({
                        "name": e.name,
                        "kind": e.kind.label(),
                        "p": e.p,
                        "items": e.items.len(),
                        "terms": e.term_count(),
                        "title": e.title,
                    })
                })
                .collect();
            json_text(&json!({"identities": rows}))
        }
    };
    Ok((true, text))
}

// ============================================================================
// Entry point
// ============================================================================

fn configure_threads() {
    if let Ok(v) = std::env::var("RANKFORGE_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            if n > 0 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

fn dispatch(cmd: &Cmd) -> Result<(bool, String, Option<PathBuf>)> {
    let ((pass, text), out) = match cmd {
        Cmd::RankTable { t, nmax, output } => {
            (cmd_rank_table(*t, *nmax, output.format)?, output.out.clone())
        }
        Cmd::Dissect { p, m, d, terms, output } => {
            (cmd_dissect(*p, *m, *d, *terms, output.format)?, output.out.clone())
        }
        Cmd::Verify { target, terms, unsafe_expansion, rebase, output } => (
            cmd_verify(target, *terms, *unsafe_expansion, *rebase, output.format)?,
            output.out.clone(),
        ),
        Cmd::Solve { target, extra, certify, output } => {
            (cmd_solve(target, *extra, *certify, output.format)?, output.out.clone())
        }
        Cmd::SymmetryGenerate { target, a, verify, terms, unsafe_expansion, output } => (
            cmd_symmetry_generate(target, *a, *verify, *terms, *unsafe_expansion, output.format)?,
            output.out.clone(),
        ),
        Cmd::Kp0Symmetry { target, rebase, output } => {
            (cmd_kp0_symmetry(target, *rebase, output.format)?, output.out.clone())
        }
        Cmd::CuspReport { target, rebase, output } => {
            (cmd_cusp_report(target, *rebase, output.format)?, output.out.clone())
        }
        Cmd::DysonCheck { p, r, nmax, output } => {
            (cmd_dyson_check(*p, *r, *nmax, output.format)?, output.out.clone())
        }
        Cmd::ListIdentities { output } => {
            (cmd_list_identities(output.format)?, output.out.clone())
        }
    };
    Ok((pass, text, out))
}

/// Parse arguments, run the subcommand, and map the outcome to an exit
/// code: 0 success, 1 failed mathematical check, 2 usage or input error.
pub fn run() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    match dispatch(&cli.cmd) {
        Ok((pass, text, out)) => {
            let written = match out {
                Some(path) => std::fs::write(&path, &text)
                    .map_err(|e| Error::Parse(format!("{}: {e}", path.display()))),
                None => {
                    print!("{text}");
                    Ok(())
                }
            };
            match (written, pass) {
                (Err(e), _) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
                (Ok(()), true) => ExitCode::SUCCESS,
                (Ok(()), false) => ExitCode::from(1),
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

// ============================================================================
// Tests
// ============================================================================

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fnv1a_matches_reference_vectors() {
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a64(b"foobar"), 0x85944171f73967e8);
    }

    #[test]
    fn database_loads_with_expected_shape() {
        let db = builtin_database().expect("the embedded database must load");
        let summary: Vec<(&str, &str, u32, usize, usize)> = db
            .iter()
            .map(|e| (e.name.as_str(), e.kind.label(), e.p, e.items.len(), e.term_count()))
            .collect();
        assert_eq!(
            summary,
            vec![
                ("ram5", "slice-group", 5, 5, 4),
                ("ram7", "slice-group", 7, 7, 6),
                ("rank11id0", "identity", 11, 1, 5),
                ("rank11id1", "identity", 11, 1, 10),
                ("rank11id2", "identity", 11, 1, 10),
                ("rank13id1", "identity", 13, 1, 12),
                ("rank13id2", "identity", 13, 1, 18),
                ("rank13id3", "identity", 13, 1, 18),
                ("rank17id1", "skeleton", 17, 1, 40),
                ("rank17id2", "skeleton", 17, 1, 56),
                ("rank17id3", "skeleton", 17, 1, 48),
                ("rank19id1", "skeleton", 19, 1, 81),
                ("rank19id2", "skeleton", 19, 1, 108),
                ("rank19id3", "skeleton", 19, 1, 108),
            ]
        );
    }

    #[test]
    fn group_slices_cover_every_residue_in_order() {
        let db = builtin_database().unwrap();
        for name in ["ram5", "ram7"] {
            let e = find_entry(&db, name).unwrap();
            assert_eq!(e.items.len(), e.p as usize);
            for (i, item) in e.items.iter().enumerate() {
                assert_eq!(item.identity.m, i as i64, "{name} slice {i}");
                assert_eq!(item.identity.p, e.p);
            }
            // The zero slice asserts that the progression class vanishes:
            // it has no right-hand side at all.
            assert!(e.items[0].identity.terms.is_empty());
        }
    }

    #[test]
    fn lookup_accepts_the_builtin_prefix() {
        let db = builtin_database().unwrap();
        assert!(find_entry(&db, "rank11id0").is_some());
        assert!(find_entry(&db, "builtin:rank11id0").is_some());
        assert!(find_entry(&db, "builtin:nonsense").is_none());
    }

    #[test]
    fn every_builtin_identity_round_trips_through_json() {
        let db = builtin_database().unwrap();
        for e in &db {
            for item in &e.items {
                let v = item.identity.to_json();
                let back = Identity::from_json(&v).expect("round-trip parse");
                assert_eq!(back, item.identity, "{}", item.label);
            }
        }
    }

    #[test]
    fn corrections_match_the_closed_form() {
        // The loader already cross-checks; pin a few witnesses explicitly
        // so a loader regression cannot silently weaken the check.
        let db = builtin_database().unwrap();
        let pick = |name: &str, slice: usize| -> Option<(u32, CycNum)> {
            let e = find_entry(&db, name).unwrap();
            e.items[slice].correction.as_ref().map(|c| (c.a, c.coefficient.clone()))
        };
        let expect = |p: u32, s: &str| CycNum::parse(p, s).unwrap();
        assert_eq!(pick("ram5", 1), Some((1, expect(5, "-(z+z^4-2)"))));
        assert_eq!(pick("ram5", 4), Some((2, expect(5, "z+z^4-z^2-z^3"))));
        assert_eq!(pick("ram5", 2), None);
        assert_eq!(pick("ram7", 4), Some((3, expect(7, "-(z+z^6-z^2-z^5)"))));
        assert_eq!(pick("rank11id1", 0), Some((5, expect(11, "z+z^10-z^9-z^2"))));
        assert_eq!(pick("rank11id2", 0), None);
        assert_eq!(pick("rank13id2", 0), Some((4, expect(13, "-(z^7+z^6-z^5-z^8)"))));
        assert_eq!(pick("rank17id2", 0), Some((3, expect(17, "-(z+z^16-2)"))));
        assert_eq!(pick("rank19id2", 0), Some((3, expect(19, "z+z^18-2"))));
    }

    #[test]
    fn skeletons_are_fully_unsolved_and_identities_are_not() {
        let db = builtin_database().unwrap();
        for e in &db {
            for item in &e.items {
                let live = item.identity.live_terms();
                match e.kind {
                    EntryKind::Skeleton => assert!(live.is_empty(), "{}", item.label),
                    _ => assert!(
                        live.len() > 1 || item.identity.terms.len() <= 1,
                        "{} should carry solved coefficients",
                        item.label
                    ),
                }
            }
        }
    }

    #[test]
    fn known_zero_slots_are_the_printed_ones() {
        let db = builtin_database().unwrap();
        let zeros = |name: &str| find_entry(&db, name).unwrap().items[0].known_zeros.clone();
        assert_eq!(zeros("rank17id1"), Vec::<usize>::new());
        assert_eq!(zeros("rank17id2"), vec![0, 1, 2, 3, 4, 5, 7]);
        assert_eq!(zeros("rank17id3"), vec![26, 28, 29, 30]);
        assert_eq!(zeros("rank19id1"), Vec::<usize>::new());
        assert_eq!(
            zeros("rank19id2"),
            vec![
                27, 28, 29, 30, 31, 32, 33, 34, 35, // first family, top ratio block
                36, 37, 38, 40, 41, 42, 43, 44, // second family, k = -1 except r = 4
                45, 46, 49, 52, 53 // second family, k = 0 partial
            ]
        );
        assert_eq!(
            zeros("rank19id3"),
            vec![
                27, 28, 29, 30, 31, 32, 33, 34, 35, // first family, top ratio block
                36, 37, 38, 39, 40, 41, 42, 43, 44, // second family, whole k = -1 block
                45, 46, 48, 49, 50, 51, 53 // second family, k = 0 partial
            ]
        );
        for e in &db {
            for item in &e.items {
                assert!(item.known_zeros.windows(2).all(|w| w[0] < w[1]));
                assert!(item.known_zeros.iter().all(|&i| i < item.identity.terms.len()));
                if e.kind != EntryKind::Skeleton {
                    assert!(item.known_zeros.is_empty());
                }
            }
        }
    }

    #[test]
    fn stored_zero_coefficients_sit_where_expected() {
        // The 11- and 13-term families keep zero slots inline; spot-check
        // the ones the solver must reproduce.
        let db = builtin_database().unwrap();
        let id1 = &find_entry(&db, "rank11id1").unwrap().items[0].identity;
        let zero_slots: Vec<usize> = id1
            .terms
            .iter()
            .enumerate()
            .filter(|(_, t)| t.coeff.is_zero())
            .map(|(i, _)| i)
            .collect();
        assert_eq!(zero_slots, vec![0, 5, 6, 8]);
        let id3 = &find_entry(&db, "rank13id3").unwrap().items[0].identity;
        let zero_slots: Vec<usize> = id3
            .terms
            .iter()
            .enumerate()
            .filter(|(_, t)| t.coeff.is_zero())
            .map(|(i, _)| i)
            .collect();
        assert_eq!(zero_slots, vec![0, 1, 2, 3, 5]);
    }

    #[test]
    fn builtin_terms_follow_the_family_layout() {
        let db = builtin_database().unwrap();
        let id = &find_entry(&db, "rank13id2").unwrap().items[0].identity;
        assert_eq!(id.terms.len(), 18);
        for (i, t) in id.terms.iter().enumerate() {
            assert_eq!(t.vec, 0);
            assert_eq!(t.r as usize, i % 6 + 1);
            assert_eq!(t.eta_ratio_pow, 2 * (i as i64 / 6 - 1));
            assert_eq!(t.prefactor, Some((1, 6)));
        }
        let id = &find_entry(&db, "rank19id2").unwrap().items[0].identity;
        assert_eq!(id.terms.len(), 108);
        for (i, t) in id.terms.iter().enumerate() {
            assert_eq!(t.vec, i / 36);
            assert_eq!(t.r as usize, i % 9 + 1);
            assert_eq!(t.eta_ratio_pow, 4 * ((i % 36) as i64 / 9 - 1));
            assert_eq!(t.prefactor, Some((6, 5)));
        }
    }

    #[test]
    fn default_progression_residue_is_the_classical_one() {
        assert_eq!(default_dyson_r(5), 4);
        assert_eq!(default_dyson_r(7), 5);
        assert_eq!(default_dyson_r(11), 6);
        assert_eq!(default_dyson_r(13), 6);
    }

    #[test]
    fn fraction_rendering_reduces_exactly() {
        assert_eq!(frac_str(0, 264), "0");
        assert_eq!(frac_str(264, 264), "1");
        assert_eq!(frac_str(-24, 264), "-1/11");
        assert_eq!(frac_str(36, 24), "3/2");
    }

    #[test]
    fn mode_selection_honours_the_unsafe_contract() {
        assert_eq!(choose_mode(None, false).unwrap(), VerifyMode::Valence { depth: None });
        assert_eq!(
            choose_mode(Some(30), false).unwrap(),
            VerifyMode::Valence { depth: Some(30) }
        );
        assert_eq!(
            choose_mode(Some(30), true).unwrap(),
            VerifyMode::Expansion { depth: 30 }
        );
        assert!(choose_mode(None, true).is_err());
    }

    #[test]
    fn argument_grammar_is_well_formed() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
