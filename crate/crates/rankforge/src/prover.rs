//! Identity certification by the valence formula.
//!
//! An `Identity` asserts that a dissection slice K_{p,m}(zeta_p, z) equals a
//! finite CycNum-linear combination of generalized eta-quotients
//!
//!   K_{p,m}(zeta_p, z) = sum_t c_t * (eta(pz)/eta(z))^(e_t)
//!                              * (f_{p,alpha}/f_{p,beta})
//!                              * j(p, pi_{r_t}(n_vec), z).
//!
//! Every term normalizes to a single quotient j(p, N_vec, z) by absorbing the
//! eta ratio (via eta(z) = eta(pz)^(1-(p-1)/2) prod_k f_{p,k}) and the
//! prefactor into the exponent vector; all order bookkeeping runs on that
//! absorbed vector. This module provides:
//!
//! - `modularity_check`: the three-condition gate under which a quotient is
//!   a weight-1 form on Gamma(p) lying in the same slice as K_{p,m};
//! - `verify_identity`: the six-step valence-formula algorithm. Orders at
//!   all cusps of Gamma_1(p) bound the total vanishing a nonzero form could
//!   have; if LHS - RHS vanishes past that budget it is identically zero,
//!   so matching finitely many q-coefficients constitutes a proof;
//! - `solve_coefficients`: recover the coefficients of a candidate basis by
//!   exact linear algebra against the slice's q-expansion;
//! - `symmetry_generate`: transport an identity for (p, m) to one for
//!   (p, m*a^2 mod p) through the Gamma_0(p) symmetry of the slices;
//! - `kp0_coefficient_symmetry`: check the closed-form Galois symmetry
//!   relating the coefficients c_d of an m = 0 identity to c_1.
//!
//! Certificates serialize to JSON with the full cusp tables, so a proof can
//! be audited without rerunning it.

use num_traits::{ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::cusps::{big_ord, cusp_set, lambda_bound, Cusp};
use crate::cyclotomic::{rat, ratio, CycNum, Rat};
use crate::dissection::k_series;
use crate::error::{Error, Result};
use crate::etaforms::{fold, j_series, lattice_den, EtaVector};
use crate::qseries::QSeries;

/// One term of an identity's right-hand side. `vec` indexes into the owning
/// identity's vector list; the factor carried by the term is
/// (eta(pz)/eta(z))^eta_ratio_pow * f_{p,alpha}/f_{p,beta} * j(p, pi_r(n), z)
/// with `prefactor = Some((alpha, beta))`. The prefactor indices are not
/// permuted by pi_r.
#[derive(Clone, Debug, PartialEq)]
pub struct IdentityTerm {
    pub coeff: CycNum,
    pub vec: usize,
    pub r: u32,
    pub eta_ratio_pow: i64,
    pub prefactor: Option<(u32, u32)>,
}

/// An asserted eta-quotient expansion of the slice K_{p,m}(zeta_p, z).
/// The left-hand side is implicit: it is always `k_series(p, m, 1, _)`,
/// including the Phi correction when -24m is a quadratic residue mod p.
#[derive(Clone, Debug, PartialEq)]
pub struct Identity {
    pub p: u32,
    pub m: i64,
    pub vectors: Vec<EtaVector>,
    pub terms: Vec<IdentityTerm>,
    pub provenance: String,
}

impl Identity {
    /// Validate indices and ranges. `m` is taken modulo p.
    pub fn new(
        p: u32,
        m: i64,
        vectors: Vec<EtaVector>,
        terms: Vec<IdentityTerm>,
        provenance: impl Into<String>,
    ) -> Result<Identity> {
        let h = (p - 1) / 2;
        for (i, v) in vectors.iter().enumerate() {
            if v.prime() != p {
                return Err(Error::Domain(format!("vector {i} is for prime {}, not {p}", v.prime())));
            }
        }
        for (i, t) in terms.iter().enumerate() {
            if t.vec >= vectors.len() {
                return Err(Error::Domain(format!("term {i} references missing vector {}", t.vec)));
            }
            if t.r == 0 || t.r > h {
                return Err(Error::Domain(format!(
                    "term {i} has permutation index {} outside 1..={h}",
                    t.r
                )));
            }
            if let Some((a, b)) = t.prefactor {
                if a % p == 0 || b % p == 0 {
                    return Err(Error::Domain(format!("term {i} has a degenerate theta prefactor")));
                }
            }
        }
        Ok(Identity { p, m: m.rem_euclid(p as i64), vectors, terms, provenance: provenance.into() })
    }

    /// The single exponent vector equivalent to a term: permute, then absorb
    /// the eta-ratio power and the (unpermuted) prefactor.
    pub fn absorbed_vector(&self, t: &IdentityTerm) -> EtaVector {
        let mut v = self.vectors[t.vec].permuted(t.r);
        if t.eta_ratio_pow != 0 {
            v.absorb_eta_ratio(t.eta_ratio_pow);
        }
        if let Some((a, b)) = t.prefactor {
            v.absorb_prefactor(a, b);
        }
        v
    }

    /// Indices of the terms with a nonzero coefficient. Verification works
    /// on this set: a zero term contributes nothing to either side, and its
    /// quotient does not constrain the cusp analysis.
    pub fn live_terms(&self) -> Vec<usize> {
        (0..self.terms.len()).filter(|&i| !self.terms[i].coeff.is_zero()).collect()
    }

    /// The right-hand side as an exact q-series through exponent numerator
    /// `trunc` (over 24p).
    pub fn rhs_series(&self, trunc: i64) -> Result<QSeries> {
        let mut acc = QSeries::zero(self.p, lattice_den(self.p), trunc);
        for i in self.live_terms() {
            let t = &self.terms[i];
            let j = j_series(&self.absorbed_vector(t), trunc)?;
            acc = acc.add(&j.scale(&t.coeff));
        }
        Ok(acc)
    }

    /// The left-hand side K_{p,m}(zeta_p, z) through exponent numerator
    /// `trunc`.
    pub fn lhs_series(&self, trunc: i64) -> Result<QSeries> {
        k_series(self.p, self.m, 1, trunc)
    }

    /// Rewrite the identity over the permuted base vectors pi_w(n): since
    /// pi_r(pi_b(n)) = pi_{fold(rb)}(n), each term's permutation index is
    /// re-tagged by the inverse of w. The expansion is unchanged.
    pub fn rebase(&self, w: u32) -> Result<Identity> {
        let p = self.p;
        if w % p == 0 {
            return Err(Error::Domain(format!("rebase index {w} is not prime to {p}")));
        }
        let winv = modinv(w as i64, p as i64);
        let vectors: Vec<EtaVector> = self.vectors.iter().map(|v| v.permuted(w)).collect();
        let terms = self
            .terms
            .iter()
            .map(|t| IdentityTerm { r: fold(p, t.r as i64 * winv), ..t.clone() })
            .collect();
        Identity::new(p, self.m, vectors, terms, format!("{} [rebased by pi_{w}]", self.provenance))
    }

    /// Serialize to the interchange schema. Coefficients are written as
    /// exact rational coordinate vectors on the power basis 1..zeta^(p-2).
    pub fn to_json(&self) -> Value {
        let vectors: Vec<Value> = self
            .vectors
            .iter()
            .map(|v| {
                let mut row = vec![json!(v.n0)];
                row.extend(v.nk.iter().map(|n| json!(n)));
                Value::Array(row)
            })
            .collect();
        let terms: Vec<Value> = self
            .terms
            .iter()
            .map(|t| {
                let coords: Vec<Value> =
                    t.coeff.coords().iter().map(|c| json!(c.to_string())).collect();
                json!({
                    "coeff": coords,
                    "vec": t.vec,
                    "r": t.r,
                    "eta_ratio_pow": t.eta_ratio_pow,
                    "prefactor": t.prefactor.map(|(a, b)| json!({"num": a, "den": b})),
                })
            })
            .collect();
        json!({
            "p": self.p,
            "m": self.m,
            "vectors": vectors,
            "terms": terms,
            "provenance": self.provenance,
        })
    }

    /// Deserialize from the interchange schema. Coefficients are accepted
    /// either as coordinate arrays or as cyclotomic expression strings like
    /// `-(z^9+2*z^2+1)`.
    pub fn from_json(v: &Value) -> Result<Identity> {
        let obj = v.as_object().ok_or_else(|| Error::Parse("identity: expected object".into()))?;
        let p = obj
            .get("p")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Parse("identity: missing p".into()))? as u32;
        let m = obj
            .get("m")
            .and_then(Value::as_i64)
            .ok_or_else(|| Error::Parse("identity: missing m".into()))?;
        let vecs = obj
            .get("vectors")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("identity: missing vectors".into()))?;
        let mut vectors = Vec::with_capacity(vecs.len());
        for row in vecs {
            let row = row
                .as_array()
                .ok_or_else(|| Error::Parse("identity: vector rows must be arrays".into()))?;
            let ints: Option<Vec<i64>> = row.iter().map(Value::as_i64).collect();
            let ints = ints.ok_or_else(|| Error::Parse("identity: vector entries must be integers".into()))?;
            if ints.len() != 1 + ((p - 1) / 2) as usize {
                return Err(Error::Parse(format!(
                    "identity: vector has {} entries, expected {}",
                    ints.len(),
                    1 + (p - 1) / 2
                )));
            }
            vectors.push(EtaVector::from_slice(p, &ints));
        }
        let terms_json = obj
            .get("terms")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("identity: missing terms".into()))?;
        let mut terms = Vec::with_capacity(terms_json.len());
        for t in terms_json {
            let t = t
                .as_object()
                .ok_or_else(|| Error::Parse("identity: terms must be objects".into()))?;
            let coeff = match t.get("coeff") {
                Some(Value::String(s)) => CycNum::parse(p, s)?,
                Some(Value::Array(coords)) => {
                    let mut rats = Vec::with_capacity(coords.len());
                    for c in coords {
                        let s = c
                            .as_str()
                            .ok_or_else(|| Error::Parse("identity: coordinate must be a string".into()))?;
                        rats.push(parse_rat_str(s)?);
                    }
                    CycNum::from_coords(p, rats)?
                }
                _ => return Err(Error::Parse("identity: term lacks a coefficient".into())),
            };
            let vec = t
                .get("vec")
                .and_then(Value::as_u64)
                .ok_or_else(|| Error::Parse("identity: term lacks vec".into()))? as usize;
            let r = t
                .get("r")
                .and_then(Value::as_u64)
                .ok_or_else(|| Error::Parse("identity: term lacks r".into()))? as u32;
            let eta_ratio_pow = t.get("eta_ratio_pow").and_then(Value::as_i64).unwrap_or(0);
            let prefactor = match t.get("prefactor") {
                None | Some(Value::Null) => None,
                Some(pf) => {
                    let pf = pf
                        .as_object()
                        .ok_or_else(|| Error::Parse("identity: bad prefactor".into()))?;
                    let a = pf
                        .get("num")
                        .and_then(Value::as_u64)
                        .ok_or_else(|| Error::Parse("identity: prefactor lacks num".into()))?;
                    let b = pf
                        .get("den")
                        .and_then(Value::as_u64)
                        .ok_or_else(|| Error::Parse("identity: prefactor lacks den".into()))?;
                    Some((a as u32, b as u32))
                }
            };
            terms.push(IdentityTerm { coeff, vec, r, eta_ratio_pow, prefactor });
        }
        let provenance = obj
            .get("provenance")
            .and_then(Value::as_str)
            .unwrap_or_default()
            .to_string();
        Identity::new(p, m, vectors, terms, provenance)
    }
}

fn parse_rat_str(s: &str) -> Result<Rat> {
    let parse_int = |x: &str| -> Result<num_bigint::BigInt> {
        x.parse().map_err(|_| Error::Parse(format!("bad rational `{s}`")))
    };
    match s.split_once('/') {
        Some((n, d)) => Ok(Rat::new(parse_int(n)?, parse_int(d)?)),
        None => Ok(Rat::from(parse_int(s)?)),
    }
}

// ============================================================================
// Modularity gate
// ============================================================================

/// The three gate values for a single absorbed vector, and the slice index
/// it belongs to. A quotient passing the gate is a weight-1 form on
/// Gamma(p) transforming like K_{p,m}(zeta_p, z).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModularityReport {
    /// n0 + sum_k n_k; must equal 2 (weight 1).
    pub weight_sum: i64,
    /// sum_k k^2 n_k; must be congruent to 2m mod p.
    pub class_sum: i64,
    /// n0 + 3 sum_k n_k; must be congruent to 0 mod 24.
    pub cusp_sum: i64,
    /// The slice the vector belongs to: class_sum / 2 mod p. Under pi_r
    /// this moves to r^2 * m mod p, which is how the symmetry transform
    /// changes the slice index.
    pub class_m: i64,
    pub weight_ok: bool,
    pub class_ok: bool,
    pub cusp_ok: bool,
}

impl ModularityReport {
    pub fn pass(&self) -> bool {
        self.weight_ok && self.class_ok && self.cusp_ok
    }
}

/// Check the three modularity conditions for `v` against slice m.
pub fn modularity_check(p: u32, m: i64, v: &EtaVector) -> ModularityReport {
    let pl = p as i64;
    let weight_sum = v.n0 + v.sum_nk();
    let class_sum = v.sum_k2_nk();
    let cusp_sum = v.n0 + 3 * v.sum_nk();
    // class_sum = 2m (mod p) <=> m = class_sum * (p+1)/2 (mod p).
    let class_m = (class_sum.rem_euclid(pl) * ((pl + 1) / 2)).rem_euclid(pl);
    ModularityReport {
        weight_sum,
        class_sum,
        cusp_sum,
        class_m,
        weight_ok: weight_sum == 2,
        class_ok: (class_sum - 2 * m).rem_euclid(pl) == 0,
        cusp_ok: cusp_sum.rem_euclid(24) == 0,
    }
}

// ============================================================================
// Valence-formula verification
// ============================================================================

/// Safety margin, in q-units past the valence requirement, that the default
/// verification expands.
pub const DEFAULT_MARGIN: i64 = 8;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VerifyMode {
    /// Full proof: cusp analysis plus coefficient match to the valence
    /// bound. `depth` overrides the expansion depth in q-units (it must
    /// cover the bound); `None` auto-selects bound + DEFAULT_MARGIN.
    Valence { depth: Option<i64> },
    /// Coefficient match through q^depth only; no proof claimed.
    Expansion { depth: i64 },
}

/// The cusp-order bookkeeping behind a valence certificate. Columns follow
/// `cusps` (index 0 is i-infinity). For m != 0 every entry is the order of
/// j_t/j0, where the normalizer j0 is the term of lowest order at
/// i-infinity over the whole family, zero coefficients included; for m = 0
/// all orders are raw. Rows appear only for the nonzero terms: a zero term
/// contributes nothing to the sum, so it never constrains the minima, but
/// it stays eligible as the normalizer.
#[derive(Clone, Debug)]
pub struct CuspReport {
    pub cusps: Vec<Cusp>,
    /// Indices (into Identity::terms) of the rows, zero coefficients removed.
    pub term_indices: Vec<usize>,
    /// ORD table rows, one per live term.
    pub rows: Vec<Vec<Rat>>,
    /// Exact q-orders at i-infinity before any division.
    pub raw_infinity: Vec<Rat>,
    /// Index (into Identity::terms) of the normalizer j0 (m != 0 only).
    pub j0_term: Option<usize>,
    /// Raw orders of j0 at each cusp, aligned with `cusps`.
    pub j0_orders: Option<Vec<Rat>>,
    /// Lower bounds lambda for the LHS per finite cusp (aligned with
    /// cusps[1..]), after j0 division and ceiling.
    pub lambda: Vec<i64>,
    /// B = sum over finite cusps of min(column orders united with lambda).
    pub b_constant: Rat,
    /// mu*k/12: (p^2-1)/24 for the weight-1 (m = 0) case, 0 otherwise.
    pub weight_term: Rat,
    /// The valence requirement R = -B + 1 + weight_term.
    pub required: Rat,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    /// Gate passed, budget computed, and LHS - RHS vanished through the
    /// whole verified window: the identity is proved.
    Proved,
    /// Expansion-only run: sides agree through the requested depth.
    MatchedToDepth { depth_num: i64 },
    /// A term failed the modularity gate (index into Identity::terms).
    GateFailed { term: usize },
    /// The sides differ; the earliest differing exponent numerator and the
    /// two coefficients there.
    Mismatch { exponent_num: i64, lhs: CycNum, rhs: CycNum },
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Proved => write!(f, "proved"),
            Verdict::MatchedToDepth { depth_num } => {
                write!(f, "matched to exponent numerator {depth_num} (no proof claimed)")
            }
            Verdict::GateFailed { term } => write!(f, "modularity gate failed at term {term}"),
            Verdict::Mismatch { exponent_num, lhs, rhs } => {
                write!(f, "mismatch at exponent numerator {exponent_num}: lhs {lhs}, rhs {rhs}")
            }
        }
    }
}

/// A verification run's full audit trail.
#[derive(Clone, Debug)]
pub struct Certificate {
    pub identity: Identity,
    /// Per live term: (term index, gate values).
    pub gates: Vec<(usize, ModularityReport)>,
    pub cusp: Option<CuspReport>,
    /// Lattice denominator of all exponent numerators below.
    pub den: i64,
    /// Exponent numerator through which both sides were compared.
    pub truncation: i64,
    /// Number of lattice coefficients compared.
    pub matched: usize,
    pub verdict: Verdict,
}

impl Certificate {
    pub fn proved(&self) -> bool {
        self.verdict == Verdict::Proved
    }

    pub fn to_json(&self) -> Value {
        let gates: Vec<Value> = self
            .gates
            .iter()
            .map(|(i, g)| {
                json!({
                    "term": i,
                    "weight_sum": g.weight_sum,
                    "class_sum": g.class_sum,
                    "cusp_sum": g.cusp_sum,
                    "class_m": g.class_m,
                    "pass": g.pass(),
                })
            })
            .collect();
        let cusp = self.cusp.as_ref().map(|c| {
            json!({
                "cusps": c.cusps.iter().map(|s| s.label(self.identity.p)).collect::<Vec<_>>(),
                "terms": c.term_indices,
                "rows": c
                    .rows
                    .iter()
                    .map(|row| row.iter().map(|x| x.to_string()).collect::<Vec<_>>())
                    .collect::<Vec<_>>(),
                "raw_infinity": c.raw_infinity.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
                "j0_term": c.j0_term,
                "j0_orders": c
                    .j0_orders
                    .as_ref()
                    .map(|row| row.iter().map(|x| x.to_string()).collect::<Vec<_>>()),
                "lambda": c.lambda,
                "B": c.b_constant.to_string(),
                "mu_k_over_12": c.weight_term.to_string(),
                "required": c.required.to_string(),
            })
        });
        let verdict = match &self.verdict {
            Verdict::Proved => json!("proved"),
            Verdict::MatchedToDepth { depth_num } => json!({"matched_to": depth_num}),
            Verdict::GateFailed { term } => json!({"gate_failed": term}),
            Verdict::Mismatch { exponent_num, lhs, rhs } => json!({
                "mismatch": {
                    "exponent_num": exponent_num,
                    "lhs": lhs.to_string(),
                    "rhs": rhs.to_string(),
                }
            }),
        };
        json!({
            "identity": self.identity.to_json(),
            "gates": gates,
            "cusp_report": cusp,
            "den": self.den,
            "truncation": self.truncation,
            "matched": self.matched,
            "verdict": verdict,
        })
    }
}

/// Run the certification algorithm on `id`.
///
/// Valence mode: (1) gate every term, zero coefficients included (they are
/// part of the stated family and remain eligible as the normalizer);
/// (2) for m != 0 pick the normalizer j0 of lowest order at i-infinity
/// over the whole family (ties to the lowest term index) — a solved family
/// often has its lowest-order member with coefficient zero, and using it
/// keeps every table entry an exact integer; (3) tabulate ORD of j_t/j0
/// for the nonzero terms at every cusp of Gamma_1(p); (4) bound the LHS
/// orders from below by lambda; (5) sum the columnwise minima into B;
/// (6) expand both sides and require LHS - RHS to vanish through
/// R = -B + 1 (+ mu/12 when m = 0), which by the valence formula forces
/// identical equality. The expansion is carried a safety margin past the
/// bound and any nonzero coefficient in the window is reported.
pub fn verify_identity(id: &Identity, mode: &VerifyMode) -> Result<Certificate> {
    let p = id.p;
    let dd = lattice_den(p);
    let all_vecs: Vec<EtaVector> =
        id.terms.iter().map(|t| id.absorbed_vector(t)).collect();
    let live = id.live_terms();
    let gates: Vec<(usize, ModularityReport)> = all_vecs
        .iter()
        .enumerate()
        .map(|(i, v)| (i, modularity_check(p, id.m, v)))
        .collect();
    if let Some((bad, _)) = gates.iter().find(|(_, g)| !g.pass()) {
        return Ok(Certificate {
            identity: id.clone(),
            gates: gates.clone(),
            cusp: None,
            den: dd,
            truncation: 0,
            matched: 0,
            verdict: Verdict::GateFailed { term: *bad },
        });
    }

    let (cusp_report, trunc) = match mode {
        VerifyMode::Expansion { depth } => (None, depth * dd),
        VerifyMode::Valence { depth } => {
            let (report, min_trunc) = valence_tables(id, &all_vecs, &live)?;
            let trunc = match depth {
                None => min_trunc + DEFAULT_MARGIN * dd,
                Some(t) => {
                    let t = t * dd;
                    if t < min_trunc {
                        return Err(Error::Domain(format!(
                            "depth {} is below the valence requirement {} (in q-units: {})",
                            t / dd,
                            min_trunc,
                            (min_trunc + dd - 1).div_euclid(dd),
                        )));
                    }
                    t
                }
            };
            (Some(report), trunc)
        }
    };

    // Expand both sides and compare every coefficient in the window.
    let lhs = id.lhs_series(trunc)?;
    let rhs = id.rhs_series(trunc)?;
    let diff = lhs.sub(&rhs);
    let first_bad = diff.terms().first().map(|(e, _)| *e);
    let lead = [lhs.leading_exponent(), rhs.leading_exponent()]
        .into_iter()
        .flatten()
        .min()
        .unwrap_or(trunc);
    let matched = ((trunc - lead).div_euclid(dd) + 1).max(0) as usize;
    let verdict = match first_bad {
        Some(e) => Verdict::Mismatch { exponent_num: e, lhs: lhs.coeff(e)?, rhs: rhs.coeff(e)? },
        None => match mode {
            VerifyMode::Expansion { .. } => Verdict::MatchedToDepth { depth_num: trunc },
            VerifyMode::Valence { .. } => Verdict::Proved,
        },
    };
    Ok(Certificate {
        identity: id.clone(),
        gates,
        cusp: cusp_report,
        den: dd,
        truncation: trunc,
        matched,
        verdict,
    })
}

/// Steps 2-6 of the valence algorithm: normalizer choice, the ORD table,
/// the lambda bounds, B, and the requirement R. Returns the report together
/// with the minimal exponent numerator a proof window must reach.
fn valence_tables(
    id: &Identity,
    all_vecs: &[EtaVector],
    live: &[usize],
) -> Result<(CuspReport, i64)> {
    let p = id.p;
    let pl = p as i64;
    let dd = lattice_den(p);
    if id.m != 0 && id.terms.is_empty() {
        return Err(Error::Domain(
            "an empty identity for m != 0 has no normalizer to divide by".into(),
        ));
    }
    let cusps = cusp_set(p);
    let raw_infinity: Vec<Rat> =
        live.iter().map(|&t| big_ord(&all_vecs[t], &Cusp::Infinity)).collect();
    // Step 2: the weight-1 normalizer for m != 0, chosen over the
    // full family.
    let j0_term = if id.m == 0 {
        None
    } else {
        let mut best = 0usize;
        for (t, v) in all_vecs.iter().enumerate() {
            if v.order_at_infinity_num() < all_vecs[best].order_at_infinity_num() {
                best = t;
            }
        }
        Some(best)
    };
    let j0_orders: Option<Vec<Rat>> =
        j0_term.map(|n| cusps.iter().map(|s| big_ord(&all_vecs[n], s)).collect());
    // Step 3: the ORD table for the nonzero terms. For m != 0 every
    // column is divided by j0; the entries come out integral because
    // every member of the family lies on the same exponent lattice.
    let rows: Vec<Vec<Rat>> = live
        .iter()
        .map(|&t| {
            cusps
                .iter()
                .enumerate()
                .map(|(si, s)| {
                    let ord = big_ord(&all_vecs[t], s);
                    match &j0_orders {
                        None => ord,
                        Some(j0row) => &ord - &j0row[si],
                    }
                })
                .collect()
        })
        .collect();
    // Step 4: LHS lower bounds, after the same division.
    let lambda: Vec<i64> = cusps[1..]
        .iter()
        .enumerate()
        .map(|(si, s)| {
            let mut bound = lambda_bound(p, id.m, s);
            if let Some(j0row) = &j0_orders {
                bound = &bound - &j0row[si + 1];
            }
            bound.ceil().to_integer().to_i64().expect("lambda fits i64")
        })
        .collect();
    // Step 5: sum of columnwise minima over the finite cusps.
    let mut b_constant = Rat::zero();
    for si in 1..cusps.len() {
        let mut low = rat(lambda[si - 1]);
        for row in &rows {
            if row[si] < low {
                low = row[si].clone();
            }
        }
        b_constant += low;
    }
    // Step 6: the valence requirement.
    let weight_term = if id.m == 0 { ratio(pl * pl - 1, 24) } else { Rat::zero() };
    let required = &(&weight_term - &b_constant) + &rat(1);
    // Exponent numerator below which LHS - RHS must vanish: R (plus
    // the order of j0 when the comparison happens after division).
    let mut threshold = &required * &rat(dd);
    if let Some(n) = j0_term {
        threshold += rat(all_vecs[n].order_at_infinity_num());
    }
    let min_trunc = threshold
        .ceil()
        .to_integer()
        .to_i64()
        .ok_or_else(|| Error::Domain("valence threshold overflows the exponent range".into()))?
        - 1;
    let report = CuspReport {
        cusps,
        term_indices: live.to_vec(),
        rows,
        raw_infinity,
        j0_term,
        j0_orders,
        lambda,
        b_constant,
        weight_term,
        required,
    };
    Ok((report, min_trunc))
}

/// The cusp bookkeeping alone, without expanding either side: gate every
/// term, then build the ORD table, lambda bounds, B, and the requirement R.
/// The last value is the exponent numerator through which LHS - RHS must
/// vanish for a proof. Errors if any term fails the modularity gate.
pub fn cusp_analysis(
    id: &Identity,
) -> Result<(Vec<(usize, ModularityReport)>, CuspReport, i64)> {
    let gates: Vec<(usize, ModularityReport)> = id
        .terms
        .iter()
        .enumerate()
        .map(|(i, t)| (i, modularity_check(id.p, id.m, &id.absorbed_vector(t))))
        .collect();
    if let Some((bad, _)) = gates.iter().find(|(_, g)| !g.pass()) {
        return Err(Error::Domain(format!("term {bad} fails the modularity gate")));
    }
    let all_vecs: Vec<EtaVector> = id.terms.iter().map(|t| id.absorbed_vector(t)).collect();
    let (report, min_trunc) = valence_tables(id, &all_vecs, &id.live_terms())?;
    Ok((gates, report, min_trunc))
}

// ============================================================================
// Coefficient solving
// ============================================================================

/// Recover the coefficients of `skeleton`'s terms so the right-hand side
/// matches K_{p,m}(zeta_p, z) coefficientwise; stored coefficients are
/// ignored. The j-quotients have rational q-coefficients, so matching a
/// cyclotomic series splits coordinatewise into p-1 rational systems that
/// share one matrix: that matrix is eliminated once with p-1 augmented
/// columns.
///
/// `extra_rows` additional window rows past the square system make the
/// solve overdetermined; any inconsistency or rank deficiency is an error.
pub fn solve_coefficients(skeleton: &Identity, extra_rows: usize) -> Result<Identity> {
    let p = skeleton.p;
    let dd = lattice_den(p);
    let ncols = skeleton.terms.len();
    if ncols == 0 {
        return Err(Error::Solve("cannot solve an identity with no terms".into()));
    }
    let naug = (p - 1) as usize;
    let vecs: Vec<EtaVector> =
        skeleton.terms.iter().map(|t| skeleton.absorbed_vector(t)).collect();
    let leads: Vec<i64> = vecs.iter().map(EtaVector::order_at_infinity_num).collect();
    let offset = (24 * skeleton.m).rem_euclid(dd);
    for (t, l) in leads.iter().enumerate() {
        if l.rem_euclid(dd) != offset {
            return Err(Error::Solve(format!(
                "term {t} sits off the slice's exponent lattice ({} mod {dd} != {offset})",
                l.rem_euclid(dd)
            )));
        }
    }
    let e_min = *leads.iter().min().expect("at least one term");
    let nrows = ncols + extra_rows;
    let trunc = e_min + (nrows as i64 - 1) * dd;

    let mut columns = Vec::with_capacity(ncols);
    for v in &vecs {
        columns.push(j_series(v, trunc)?);
    }
    let k = k_series(p, skeleton.m, 1, trunc)?;

    // Assemble the augmented rows [A | K-coordinates], one per lattice point.
    let mut mat: Vec<(Vec<Rat>, Vec<Rat>)> = Vec::with_capacity(nrows);
    for i in 0..nrows {
        let e = e_min + i as i64 * dd;
        let mut arow = Vec::with_capacity(ncols);
        for col in &columns {
            let c = col.coeff(e)?;
            let r = c.as_rational().cloned().ok_or_else(|| {
                Error::Solve("a basis quotient produced a non-rational coefficient".into())
            })?;
            arow.push(r);
        }
        let brow = k.coeff(e)?.coords().to_vec();
        mat.push((arow, brow));
    }

    // Exact Gaussian elimination with the p-1 right-hand sides carried along.
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut prow = 0usize;
    for col in 0..ncols {
        let Some(pr) = (prow..mat.len()).find(|&r| !mat[r].0[col].is_zero()) else {
            continue;
        };
        mat.swap(prow, pr);
        for r in prow + 1..mat.len() {
            if mat[r].0[col].is_zero() {
                continue;
            }
            let f = &mat[r].0[col] / &mat[prow].0[col];
            for c in col..ncols {
                let delta = &f * &mat[prow].0[c];
                mat[r].0[c] = &mat[r].0[c] - &delta;
            }
            for c in 0..naug {
                let delta = &f * &mat[prow].1[c];
                mat[r].1[c] = &mat[r].1[c] - &delta;
            }
        }
        pivots.push((prow, col));
        prow += 1;
        if prow == mat.len() {
            break;
        }
    }
    if pivots.len() < ncols {
        let pivot_cols: Vec<usize> = pivots.iter().map(|&(_, c)| c).collect();
        let free: Vec<usize> = (0..ncols).filter(|c| !pivot_cols.contains(c)).collect();
        return Err(Error::Solve(format!(
            "rank {} < {} unknowns; free term indices {:?}",
            pivots.len(),
            ncols,
            free
        )));
    }
    for (r, row) in mat.iter().enumerate().skip(prow) {
        if let Some(c) = row.1.iter().position(|x| !x.is_zero()) {
            let e = e_min + r as i64 * dd;
            return Err(Error::Solve(format!(
                "inconsistent system: residual coordinate {c} at exponent numerator {e}; \
                 the basis cannot match the slice"
            )));
        }
    }
    // Back-substitution, one pass per coordinate.
    let mut x = vec![vec![Rat::zero(); naug]; ncols];
    for &(r, c) in pivots.iter().rev() {
        for a in 0..naug {
            let mut acc = mat[r].1[a].clone();
            for c2 in c + 1..ncols {
                let delta = &mat[r].0[c2] * &x[c2][a];
                acc = &acc - &delta;
            }
            x[c][a] = &acc / &mat[r].0[c];
        }
    }

    let mut solved = skeleton.clone();
    for (t, coords) in x.into_iter().enumerate() {
        solved.terms[t].coeff = CycNum::from_coords(p, coords)?;
    }
    solved.provenance = format!(
        "coefficients solved from {nrows} expansion rows ({} unknowns over Q(zeta_{p}))",
        ncols
    );
    Ok(solved)
}

// ============================================================================
// Symmetry transport
// ============================================================================

/// Transport an identity for K_{p,m}(zeta_p, z) to one for
/// K_{p, m*a^2 mod p}(zeta_p, z), for 1 <= a <= (p-1)/2 prime to p.
///
/// Each absorbed term j(p, N_vec, z) maps to
///
///   (-1)^S * (sin(pi/p)/sin(a pi/p)) * sigma_a(c) * j(p, pi_a(N_vec), z),
///
/// where, with d = a^{-1} mod p in 1..p and b = (ad - 1)/p,
///
///   L = b(a+1) sum_k k N_k + sum_k floor(ka/p) N_k,
///   S = L + b + (d + 1 if a is odd, else 0).
///
/// The parity split on a comes from the Galois action on the 2p-th roots of
/// unity hidden in the theta multipliers: sigma_a fixes zeta_{2p}^x only up
/// to the sign (-1)^(x(a+1)), which cancels for odd a in one grouping and
/// for even a in the other.
pub fn symmetry_generate(id: &Identity, a: u32) -> Result<Identity> {
    let p = id.p;
    let pl = p as i64;
    let al = a as i64;
    if a == 0 || a > (p - 1) / 2 {
        return Err(Error::Domain(format!("symmetry index {a} outside 1..={}", (p - 1) / 2)));
    }
    let d = modinv(al, pl);
    let b = (al * d - 1) / pl;
    let magnitude = CycNum::sine_ratio(p, 1, a)?;
    let mut vectors: Vec<EtaVector> = Vec::new();
    let mut terms: Vec<IdentityTerm> = Vec::new();
    // Zero-coefficient terms are carried along: they keep the family
    // rectangular, and the transported family's own certification reuses
    // them when picking its normalizer.
    for t in &id.terms {
        let nv = id.absorbed_vector(t);
        let l = b * (al + 1) * nv.sum_k_nk()
            + nv
                .nk
                .iter()
                .enumerate()
                .map(|(j, n)| ((j as i64 + 1) * al).div_euclid(pl) * n)
                .sum::<i64>();
        let s = l + b + if al % 2 == 1 { d + 1 } else { 0 };
        let mut coeff = &t.coeff.galois(a) * &magnitude;
        if s.rem_euclid(2) == 1 {
            coeff = -&coeff;
        }
        let pv = nv.permuted(a);
        let vi = match vectors.iter().position(|v| *v == pv) {
            Some(vi) => vi,
            None => {
                vectors.push(pv);
                vectors.len() - 1
            }
        };
        terms.push(IdentityTerm { coeff, vec: vi, r: 1, eta_ratio_pow: 0, prefactor: None });
    }
    Identity::new(
        p,
        (id.m * al * al).rem_euclid(pl),
        vectors,
        terms,
        format!("transported from the (p={p}, m={}) identity by a = {a}", id.m),
    )
}

// ============================================================================
// Coefficient symmetry for the m = 0 slice
// ============================================================================

/// One family of an m = 0 identity: the terms sharing a base vector,
/// eta-ratio power, and prefactor, indexed by their permutation r.
#[derive(Clone, Debug)]
pub struct Kp0Family {
    pub vec: usize,
    pub eta_ratio_pow: i64,
    pub prefactor: Option<(u32, u32)>,
    /// The absorbed, unpermuted base vector the family is built on.
    pub base: EtaVector,
    /// The sign w(d, p) = (-1)^(d + 1 + L(n, d)) for d = 1..(p-1)/2.
    pub w: Vec<i64>,
    /// Whether c_d = w(d) * (sin(pi/p)/sin(d pi/p)) * sigma_d(c_1) held.
    pub pass: Vec<bool>,
}

/// Check the closed-form coefficient symmetry of an m = 0 identity: within
/// each family, every coefficient is determined by the r = 1 one via a
/// Galois twist, a sine ratio, and an explicit sign
///
///   w(d) = (-1)^(d + 1 + L(n, d)),
///   L(n, d) = b d (1 + a) sum_k k n_k
///           + sum_k (floor(dka/p) + floor(dk/p)) n_k,
///
/// with a = d^{-1} mod p and b = (ad - 1)/p.
pub fn kp0_coefficient_symmetry(id: &Identity) -> Result<Vec<Kp0Family>> {
    let p = id.p;
    let pl = p as i64;
    let h = (p - 1) / 2;
    if id.m.rem_euclid(pl) != 0 {
        return Err(Error::Domain(format!(
            "the coefficient symmetry applies to the m = 0 slice, not m = {}",
            id.m
        )));
    }
    // Group terms by everything except the permutation index.
    let mut families: Vec<(usize, i64, Option<(u32, u32)>, Vec<Option<CycNum>>)> = Vec::new();
    for t in &id.terms {
        let key = (t.vec, t.eta_ratio_pow, t.prefactor);
        let slot = match families.iter().position(|f| (f.0, f.1, f.2) == key) {
            Some(i) => i,
            None => {
                families.push((key.0, key.1, key.2, vec![None; h as usize]));
                families.len() - 1
            }
        };
        let cell = &mut families[slot].3[(t.r - 1) as usize];
        if cell.is_some() {
            return Err(Error::Domain(format!(
                "two terms share vector {}, ratio power {}, and permutation {}",
                t.vec, t.eta_ratio_pow, t.r
            )));
        }
        *cell = Some(t.coeff.clone());
    }

    let mut out = Vec::with_capacity(families.len());
    for (vec, epow, pf, coeffs) in families {
        let probe = IdentityTerm {
            coeff: CycNum::one(p),
            vec,
            r: 1,
            eta_ratio_pow: epow,
            prefactor: pf,
        };
        let base = id.absorbed_vector(&probe);
        let c1 = coeffs[0].clone().ok_or_else(|| {
            Error::Domain("a family lacks its r = 1 anchor coefficient".into())
        })?;
        let mut w = Vec::with_capacity(h as usize);
        let mut pass = Vec::with_capacity(h as usize);
        for d in 1..=h {
            let dl = d as i64;
            let a = modinv(dl, pl);
            let b = (a * dl - 1) / pl;
            let l = b * dl * (1 + a) * base.sum_k_nk()
                + base
                    .nk
                    .iter()
                    .enumerate()
                    .map(|(j, n)| {
                        let k = j as i64 + 1;
                        ((dl * k * a).div_euclid(pl) + (dl * k).div_euclid(pl)) * n
                    })
                    .sum::<i64>();
            let sign: i64 = if (dl + 1 + l).rem_euclid(2) == 1 { -1 } else { 1 };
            let expected =
                (&c1.galois(d) * &CycNum::sine_ratio(p, 1, d)?).scale(&rat(sign));
            let actual = coeffs[(d - 1) as usize].clone().unwrap_or_else(|| CycNum::zero(p));
            w.push(sign);
            pass.push(expected == actual);
        }
        out.push(Kp0Family { vec, eta_ratio_pow: epow, prefactor: pf, base, w, pass });
    }
    Ok(out)
}

/// Modular inverse of `a` modulo the odd prime `p`, in 1..p.
fn modinv(a: i64, p: i64) -> i64 {
    let a = a.rem_euclid(p);
    assert!(a != 0, "no inverse of 0");
    // Extended Euclid on (a, p).
    let (mut r0, mut r1) = (a, p);
    let (mut s0, mut s1) = (1i64, 0i64);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    assert!(r0 == 1, "{a} is not prime to {p}");
    s0.rem_euclid(p)
}

// ============================================================================
// Tests
// ============================================================================

#[cfg(test)]
mod tests {
    use super::*;

    fn term(p: u32, coeff: &str, vec: usize, r: u32) -> IdentityTerm {
        IdentityTerm {
            coeff: CycNum::parse(p, coeff).unwrap(),
            vec,
            r,
            eta_ratio_pow: 0,
            prefactor: None,
        }
    }

    /// The five-term m = 0 identity mod 11.
    fn rank11_m0() -> Identity {
        let p = 11;
        let base = EtaVector::from_slice(p, &[15, -4, -2, -3, -2, -2]);
        let coeffs = [
            "-(z^9+z^8+2*z^7+z^6+z^5+2*z^4+z^3+z^2+1)",
            "4*z^9+z^8+2*z^7+2*z^6+2*z^5+2*z^4+z^3+4*z^2+4",
            "-z^9-2*z^8+z^7-2*z^6-2*z^5+z^4-2*z^3-z^2-3",
            "2*z^8+2*z^7+2*z^4+2*z^3+3",
            "2*z^9+2*z^8+z^7+z^4+2*z^3+2*z^2+1",
        ];
        let terms = coeffs
            .iter()
            .enumerate()
            .map(|(i, s)| term(p, s, 0, i as u32 + 1))
            .collect();
        Identity::new(p, 0, vec![base], terms, "test fixture").unwrap()
    }

    /// The m = 1 identity mod 11: two full families over pi_1..pi_5 with
    /// prefactors f5/f1 and f4/f5. Four slots are zero (c1, d1, d2, d4);
    /// the zero c1 term is the family member of lowest order at i-infinity
    /// and serves as the certification normalizer.
    fn rank11_m1() -> Identity {
        let p = 11;
        let base = EtaVector::from_slice(p, &[15, -4, -2, -3, -2, -2]);
        let c = [
            "0",
            "5*z^9+z^8+4*z^7+2*z^6+2*z^5+4*z^4+z^3+5*z^2+5",
            "-(5*z^9+3*z^7+2*z^6+2*z^5+3*z^4+5*z^2+1)",
            "z^9-z^8-z^7-z^4-z^3+z^2-2",
            "-(6*z^9+2*z^8+3*z^7+5*z^6+5*z^5+3*z^4+2*z^3+6*z^2+5)",
        ];
        let d = [
            "0",
            "0",
            "z^9+z^8+z^6+z^5+z^3+z^2+1",
            "0",
            "-(2*z^9+z^8+z^7+z^6+z^5+z^4+z^3+2*z^2+1)",
        ];
        let mut terms: Vec<IdentityTerm> = Vec::new();
        for (i, s) in c.iter().enumerate() {
            terms.push(IdentityTerm { prefactor: Some((5, 1)), ..term(p, s, 0, i as u32 + 1) });
        }
        for (i, s) in d.iter().enumerate() {
            terms.push(IdentityTerm { prefactor: Some((4, 5)), ..term(p, s, 0, i as u32 + 1) });
        }
        Identity::new(p, 1, vec![base], terms, "test fixture").unwrap()
    }

    /// The m = 2 identity mod 11: full families with prefactors f4/f1 and
    /// f3/f4; the zero slots are c1, d1, d3, d5.
    fn rank11_m2() -> Identity {
        let p = 11;
        let base = EtaVector::from_slice(p, &[15, -4, -2, -3, -2, -2]);
        let c = [
            "0",
            "-(4*z^9+2*z^8+3*z^7+3*z^6+3*z^5+3*z^4+2*z^3+4*z^2+6)",
            "-2*z^8+z^7-z^6-z^5+z^4-2*z^3-1",
            "3*z^9+3*z^8+z^7+2*z^6+2*z^5+z^4+3*z^3+3*z^2+6",
            "-(z^9+z^8+z^7+z^4+z^3+z^2)",
        ];
        let d = [
            "0",
            "z^9+z^7+z^4+z^2+1",
            "0",
            "-(z^8+z^7+z^4+z^3+2)",
            "0",
        ];
        let mut terms: Vec<IdentityTerm> = Vec::new();
        for (i, s) in c.iter().enumerate() {
            terms.push(IdentityTerm { prefactor: Some((4, 1)), ..term(p, s, 0, i as u32 + 1) });
        }
        for (i, s) in d.iter().enumerate() {
            terms.push(IdentityTerm { prefactor: Some((3, 4)), ..term(p, s, 0, i as u32 + 1) });
        }
        Identity::new(p, 2, vec![base], terms, "test fixture").unwrap()
    }

    /// The single-product slice identities mod 7 (m = 0 has an empty RHS).
    fn k7_identities() -> Vec<Identity> {
        let p = 7;
        let data: [(&str, [i64; 4]); 7] = [
            ("0", [0, 0, 0, 0]),
            ("-(1+z^3+z^4)", [3, 1, -1, -1]),
            ("-1+z+z^6", [3, -1, -1, 1]),
            ("1", [3, -1, 0, 0]),
            ("z+z^6", [3, -1, 1, -1]),
            ("1+z^2+z^5", [3, 0, -1, 0]),
            ("-(z^2+z^5)", [3, 0, 0, -1]),
        ];
        data.iter()
            .enumerate()
            .map(|(m, (coeff, v))| {
                if m == 0 {
                    Identity::new(p, 0, vec![], vec![], "test fixture").unwrap()
                } else {
                    let base = EtaVector::from_slice(p, v);
                    Identity::new(p, m as i64, vec![base], vec![term(p, coeff, 0, 1)], "test fixture")
                        .unwrap()
                }
            })
            .collect()
    }

    /// Collapse a 10-column p = 11 row to the printed 7-column shape,
    /// asserting the four 1/n columns agree.
    fn collapse11(row: &[Rat]) -> Vec<Rat> {
        assert_eq!(row.len(), 10);
        for i in 3..6 {
            assert_eq!(row[i], row[2], "1/n columns must agree");
        }
        let mut out = row[..3].to_vec();
        out.extend_from_slice(&row[6..]);
        out
    }

    fn rats(xs: &[i64]) -> Vec<Rat> {
        xs.iter().map(|&x| rat(x)).collect()
    }

    #[test]
    fn modularity_gate_pins_the_printed_values() {
        let p = 11;
        let v = EtaVector::from_slice(p, &[15, -4, -2, -3, -2, -2]);
        let g = modularity_check(p, 0, &v);
        assert_eq!((g.weight_sum, g.cusp_sum, g.class_sum), (2, -24, -121));
        assert!(g.pass());
        assert_eq!(g.class_m, 0);

        // The six nonzero terms of the m = 1 identity, with the class
        // values as printed in its gate table; the zero slots pass too.
        let id = rank11_m1();
        let printed = [-119i64, -108, -119, -152, -141, -185];
        for (&t, want) in id.live_terms().iter().zip(printed) {
            let g = modularity_check(p, 1, &id.absorbed_vector(&id.terms[t]));
            assert_eq!(g.class_sum, want);
            assert!(g.pass());
            assert_eq!(g.class_m, 1);
        }
        for t in &id.terms {
            assert!(modularity_check(p, 1, &id.absorbed_vector(t)).pass());
        }

        // Weight-violating and divisibility-violating vectors.
        let bad = EtaVector::from_slice(p, &[3, 0, 0, 0, 0, 0]);
        assert!(!modularity_check(p, 0, &bad).weight_ok);
        let bad = EtaVector::from_slice(p, &[2, 0, 0, 0, 0, 0]);
        let g = modularity_check(p, 0, &bad);
        assert!(g.weight_ok && !g.cusp_ok);
    }

    #[test]
    fn permutation_moves_the_slice_class_by_r_squared() {
        let p = 13;
        let v = EtaVector::from_slice(p, &[15, -2, -3, -2, -1, -3, -2]);
        let m = modularity_check(p, 0, &v).class_m;
        for r in 1..=6u32 {
            let mr = modularity_check(p, 0, &v.permuted(r)).class_m;
            assert_eq!(mr, (m * (r as i64) * (r as i64)).rem_euclid(13));
        }
    }

    #[test]
    fn valence_certifies_the_m0_identity_mod_11() {
        let id = rank11_m0();
        let cert = verify_identity(&id, &VerifyMode::Valence { depth: None }).unwrap();
        assert!(cert.proved(), "verdict was {}", cert.verdict);
        let cr = cert.cusp.unwrap();
        assert_eq!(cr.j0_term, None);
        let table: Vec<Vec<Rat>> = cr.rows.iter().map(|r| collapse11(r)).collect();
        assert_eq!(table[0], rats(&[1, -1, -1, 2, 2, 2, 3]));
        assert_eq!(table[1], rats(&[2, -1, -1, 2, 3, 2, 1]));
        assert_eq!(table[2], rats(&[2, -1, -1, 3, 2, 1, 2]));
        assert_eq!(table[3], rats(&[2, -1, -1, 2, 1, 3, 2]));
        assert_eq!(table[4], rats(&[3, -1, -1, 1, 2, 2, 2]));
        assert_eq!(cr.lambda, vec![-1, 0, 0, 0, 0, 1, 1, 1, 1]);
        assert_eq!(cr.b_constant, rat(-1));
        assert_eq!(cr.weight_term, rat(5));
        assert_eq!(cr.required, rat(7));
    }

    #[test]
    fn valence_certifies_the_m1_identity_mod_11() {
        let id = rank11_m1();
        let cert = verify_identity(&id, &VerifyMode::Valence { depth: None }).unwrap();
        assert!(cert.proved(), "verdict was {}", cert.verdict);
        let cr = cert.cusp.unwrap();
        // The normalizer is the zero-coefficient f5/f1 * j(pi_1) slot, of
        // order 1/11 at i-infinity; the six nonzero terms form the rows.
        assert_eq!(cr.j0_term, Some(0));
        assert_eq!(cr.term_indices, vec![1, 2, 3, 4, 7, 9]);
        let j0 = collapse11(cr.j0_orders.as_ref().unwrap());
        assert_eq!(
            j0,
            vec![
                ratio(1, 11),
                rat(-1),
                rat(-1),
                ratio(26, 11),
                ratio(20, 11),
                ratio(27, 11),
                ratio(36, 11)
            ]
        );
        assert_eq!(
            cr.raw_infinity,
            vec![
                ratio(12, 11),
                ratio(12, 11),
                ratio(12, 11),
                ratio(23, 11),
                ratio(23, 11),
                ratio(34, 11)
            ]
        );
        let table: Vec<Vec<Rat>> = cr.rows.iter().map(|r| collapse11(r)).collect();
        assert_eq!(table[0], rats(&[1, 0, 0, 0, 1, 0, -2]));
        assert_eq!(table[1], rats(&[1, 0, 0, 1, 0, -1, -1]));
        assert_eq!(table[2], rats(&[1, 0, 0, 0, -1, 1, -1]));
        assert_eq!(table[3], rats(&[2, 0, 0, -1, 0, 0, -1]));
        assert_eq!(table[4], rats(&[2, 0, 0, 0, 1, -2, -1]));
        assert_eq!(table[5], rats(&[3, 0, 0, -2, 1, -1, -1]));
        assert_eq!(cr.lambda, vec![0, 1, 1, 1, 1, -2, -1, -2, -2]);
        assert_eq!(cr.b_constant, rat(-7));
        assert_eq!(cr.weight_term, rat(0));
        assert_eq!(cr.required, rat(8));
    }

    #[test]
    fn valence_certifies_the_m2_identity_mod_11() {
        let id = rank11_m2();
        let cert = verify_identity(&id, &VerifyMode::Valence { depth: None }).unwrap();
        assert!(cert.proved(), "verdict was {}", cert.verdict);
        let cr = cert.cusp.unwrap();
        assert_eq!(cr.j0_term, Some(0));
        assert_eq!(cr.term_indices, vec![1, 2, 3, 4, 6, 8]);
        let j0 = collapse11(cr.j0_orders.as_ref().unwrap());
        assert_eq!(
            j0,
            vec![
                ratio(2, 11),
                rat(-1),
                rat(-1),
                ratio(19, 11),
                ratio(29, 11),
                ratio(21, 11),
                ratio(39, 11)
            ]
        );
        let table: Vec<Vec<Rat>> = cr.rows.iter().map(|r| collapse11(r)).collect();
        assert_eq!(table[0], rats(&[1, 0, 0, 0, 1, 0, -2]));
        // The printed version of this row has +1 in the 4/11 column; the
        // true entry is -1 (each weight-0 row must total zero over all
        // cusps, counting the four 1/n cusps separately).
        assert_eq!(table[1], rats(&[1, 0, 0, 1, 0, -1, -1]));
        assert_eq!(table[2], rats(&[1, 0, 0, 0, -1, 1, -1]));
        assert_eq!(table[3], rats(&[2, 0, 0, -1, 0, 0, -1]));
        assert_eq!(table[4], rats(&[2, 0, 0, 0, 0, 1, -3]));
        assert_eq!(table[5], rats(&[2, 0, 0, 0, -2, 2, -2]));
        assert_eq!(cr.lambda, vec![0, 1, 1, 1, 1, -1, -2, -1, -3]);
        assert_eq!(cr.b_constant, rat(-7));
        assert_eq!(cr.required, rat(8));
    }

    #[test]
    fn weight_zero_rows_sum_to_zero_over_all_cusps() {
        // A consistency check of the table itself: after division by j0
        // each row is a modular function without zeros or poles in the
        // upper half-plane, so its ORD total (counting the four 1/n cusps
        // separately) vanishes. The j0 row itself, being weight 1, totals
        // mu/12 instead.
        for id in [rank11_m1(), rank11_m2()] {
            let cert = verify_identity(&id, &VerifyMode::Valence { depth: None }).unwrap();
            let cr = cert.cusp.unwrap();
            for (t, row) in cr.rows.iter().enumerate() {
                let total: Rat = row.iter().fold(Rat::zero(), |acc, x| &acc + x);
                assert!(total.is_zero(), "row {t} totals {total}");
            }
            let j0_total: Rat =
                cr.j0_orders.unwrap().iter().fold(Rat::zero(), |acc, x| &acc + x);
            assert_eq!(j0_total, rat(5));
        }
    }

    #[test]
    fn single_product_slices_certify_mod_7() {
        for (m, id) in k7_identities().into_iter().enumerate() {
            let cert = verify_identity(&id, &VerifyMode::Valence { depth: None }).unwrap();
            assert!(cert.proved(), "m = {m} verdict was {}", cert.verdict);
        }
    }

    #[test]
    fn perturbed_coefficient_is_caught() {
        let mut id = rank11_m0();
        id.terms[2].coeff = &id.terms[2].coeff + &CycNum::one(11);
        let cert = verify_identity(&id, &VerifyMode::Valence { depth: None }).unwrap();
        match cert.verdict {
            Verdict::Mismatch { exponent_num, .. } => {
                // The perturbation j(11, pi_3(n)) has q-order 2, so the
                // discrepancy shows up exactly there.
                assert_eq!(exponent_num, 2 * cert.den);
            }
            v => panic!("expected a mismatch, got {v}"),
        }
    }

    #[test]
    fn gate_failure_is_reported_before_any_expansion() {
        let p = 11;
        let v = EtaVector::from_slice(p, &[2, 0, 0, 0, 0, 0]);
        let id = Identity::new(p, 0, vec![v], vec![term(p, "1", 0, 1)], "bad").unwrap();
        let cert = verify_identity(&id, &VerifyMode::Valence { depth: None }).unwrap();
        assert_eq!(cert.verdict, Verdict::GateFailed { term: 0 });
    }

    #[test]
    fn expansion_mode_matches_without_claiming_proof() {
        let id = rank11_m0();
        let cert = verify_identity(&id, &VerifyMode::Expansion { depth: 6 }).unwrap();
        match cert.verdict {
            Verdict::MatchedToDepth { depth_num } => assert_eq!(depth_num, 6 * cert.den),
            v => panic!("unexpected verdict {v}"),
        }
    }

    #[test]
    fn solver_recovers_the_printed_m0_coefficients() {
        let id = rank11_m0();
        let mut skeleton = id.clone();
        for t in skeleton.terms.iter_mut() {
            t.coeff = CycNum::zero(11);
        }
        let solved = solve_coefficients(&skeleton, 10).unwrap();
        for (s, o) in solved.terms.iter().zip(&id.terms) {
            assert_eq!(s.coeff, o.coeff);
        }
        // Doubling the window changes nothing.
        let solved2 = solve_coefficients(&skeleton, 25).unwrap();
        assert_eq!(solved.terms, solved2.terms);
    }

    #[test]
    fn solver_flags_deficient_and_inconsistent_systems() {
        let id = rank11_m0();
        // A basis that cannot span the slice: drop one of the five terms.
        let mut short = id.clone();
        short.terms.truncate(4);
        match solve_coefficients(&short, 10) {
            Err(Error::Solve(msg)) => assert!(msg.contains("inconsistent"), "got: {msg}"),
            other => panic!("expected an inconsistency error, got {other:?}"),
        }
        // A duplicated term makes the matrix rank-deficient.
        let mut dup = id.clone();
        let copy = dup.terms[0].clone();
        dup.terms.push(copy);
        match solve_coefficients(&dup, 10) {
            Err(Error::Solve(msg)) => assert!(msg.contains("rank"), "got: {msg}"),
            other => panic!("expected a rank error, got {other:?}"),
        }
    }

    #[test]
    fn symmetry_regenerates_the_p7_slices() {
        let ids = k7_identities();
        for m in 1..=6usize {
            for a in 1..=3u32 {
                let gen = symmetry_generate(&ids[m], a).unwrap();
                let m2 = (m as i64 * a as i64 * a as i64).rem_euclid(7);
                assert_eq!(gen.m, m2);
                // Exact term-level match against the stored identity.
                let want = &ids[m2 as usize];
                assert_eq!(gen.terms.len(), 1);
                assert_eq!(
                    gen.absorbed_vector(&gen.terms[0]),
                    want.absorbed_vector(&want.terms[0]),
                    "m = {m}, a = {a}"
                );
                assert_eq!(gen.terms[0].coeff, want.terms[0].coeff, "m = {m}, a = {a}");
            }
        }
    }

    #[test]
    fn symmetry_with_a_equal_one_is_the_identity_map() {
        let id = rank11_m1();
        let gen = symmetry_generate(&id, 1).unwrap();
        assert_eq!(gen.m, 1);
        for (g, o) in gen.terms.iter().zip(&id.terms) {
            assert_eq!(g.coeff, o.coeff);
            assert_eq!(gen.absorbed_vector(g), id.absorbed_vector(o));
        }
    }

    #[test]
    fn symmetry_transport_matches_the_slice_expansion_mod_11() {
        // Spot check one quadratic-residue hop and one non-residue hop; the
        // full battery runs in the acceptance suite.
        let dd = lattice_den(11);
        for (id, a) in [(rank11_m1(), 3u32), (rank11_m2(), 2u32)] {
            let gen = symmetry_generate(&id, a).unwrap();
            let trunc = 6 * dd;
            let rhs = gen.rhs_series(trunc).unwrap();
            let lhs = k_series(11, gen.m, 1, trunc).unwrap();
            assert!(lhs.sub(&rhs).is_zero(), "m' = {} from a = {a}", gen.m);
        }
    }

    #[test]
    fn generated_identities_still_certify() {
        // Transport m = 1 to m' = 4 by a = 2 and run the full valence proof
        // on the generated identity.
        let gen = symmetry_generate(&rank11_m1(), 2).unwrap();
        assert_eq!(gen.m, 4);
        let cert = verify_identity(&gen, &VerifyMode::Valence { depth: None }).unwrap();
        assert!(cert.proved(), "verdict was {}", cert.verdict);
    }

    #[test]
    fn kp0_symmetry_holds_in_both_arrangements() {
        let id = rank11_m0();
        // As stored.
        let fams = kp0_coefficient_symmetry(&id).unwrap();
        assert_eq!(fams.len(), 1);
        assert!(fams[0].pass.iter().all(|&b| b), "w = {:?}", fams[0].w);
        // Rebased onto pi_5(n), the arrangement whose printed sign vector
        // is (1, -1, -1, 1, -1).
        let alt = id.rebase(5).unwrap();
        assert_eq!(
            alt.vectors[0],
            EtaVector::from_slice(11, &[15, -2, -2, -2, -3, -4])
        );
        let fams = kp0_coefficient_symmetry(&alt).unwrap();
        assert_eq!(fams[0].w, vec![1, -1, -1, 1, -1]);
        assert!(fams[0].pass.iter().all(|&b| b));
    }

    #[test]
    fn rebase_preserves_the_expansion() {
        let id = rank11_m0();
        let alt = id.rebase(5).unwrap();
        let dd = lattice_den(11);
        let a = id.rhs_series(6 * dd).unwrap();
        let b = alt.rhs_series(6 * dd).unwrap();
        assert!(a.sub(&b).is_zero());
    }

    #[test]
    fn identity_json_round_trips() {
        for id in [rank11_m0(), rank11_m1(), rank11_m2()] {
            let j = id.to_json();
            let back = Identity::from_json(&j).unwrap();
            assert_eq!(back, id);
        }
        // Expression-string coefficients are accepted on input.
        let v: Value = serde_json::json!({
            "p": 7, "m": 3,
            "vectors": [[3, -1, 0, 0]],
            "terms": [{"coeff": "1", "vec": 0, "r": 1, "eta_ratio_pow": 0, "prefactor": null}],
            "provenance": "by hand",
        });
        let id = Identity::from_json(&v).unwrap();
        assert_eq!(id.terms[0].coeff, CycNum::one(7));
    }

    #[test]
    fn modinv_agrees_with_brute_force() {
        for p in [5i64, 7, 11, 13, 17, 19] {
            for a in 1..p {
                let inv = modinv(a, p);
                assert_eq!((a * inv).rem_euclid(p), 1, "a = {a}, p = {p}");
            }
        }
    }
}
