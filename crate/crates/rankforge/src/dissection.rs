//! The p-dissection slices K_{p,m} of the rank generating function.
//!
//! For an odd prime p and a primitive p-th root of unity zeta = zeta_p^d,
//! the two-variable rank generating function R(zeta, q) splits along
//! exponent classes mod p. The m-th slice is, with s_p = (p^2 - 1)/24,
//!
//!   K_{p,m}(zeta_p^d, z)
//!     = q^(m/p) (q^p; q^p)_inf
//!       * [ sum_{n >= ceil((s_p - m)/p)}
//!             ( sum_k N(k, p, p*n + m - s_p) zeta_p^(k*d) ) q^n
//!           + correction ],
//!
//! where the correction is present exactly when -24m is a nonzero square
//! mod p: writing (6a)^2 = -24m (mod p) with 1 <= a <= (p-1)/2, it equals
//!
//!   -chi_12(p) * (-1)^(a+d+1) * (4 sin(d pi/p) sin(6 a d pi/p))
//!     * q^((a(p-3a)/2 - m)/p) * Phi_{p,a}(q),
//!
//! the four-sine product taken as an exact element of Z[zeta_p].
//!
//! Two independent routes are implemented:
//! - [`k_series`] assembles the definition above directly from the rank
//!   census (dynamic-programming counts N(k, p, n)) and the correction;
//! - [`k_series_via_u`] starts from the deformed generating function
//!   R_p(zeta_p^d, z) = q^(-1/24) R(zeta_p^d, q) + (sum of Phi corrections),
//!   multiplies by eta(p^2 z) to clear fractional exponents, and applies the
//!   exponent-extraction operator U_{p,m}.
//!
//! Their agreement (exercised in the tests over all slices for several
//! primes) cross-validates the rank census, the Eulerian expansion of R,
//! the Phi series, and the bookkeeping of all fractional exponents.

use crate::cyclotomic::{rat, CycNum};
use crate::error::{Error, Result};
use crate::etaforms::{chi12, lattice_den, phi_series};
use crate::qseries::{euler_product, QSeries};
use crate::ranks::rank_gf;

/// s_p = (p^2 - 1)/24, the exponent offset of the p-dissection.
pub fn s_p(p: u32) -> i64 {
    let pl = p as i64;
    (pl * pl - 1) / 24
}

/// How the slice index m relates to squares mod p, which decides whether
/// the slice carries a Phi correction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DissectionClass {
    /// m = 0 (mod p).
    Zero,
    /// -24m is a nonzero square mod p; `a` is the unique witness with
    /// (6a)^2 = -24m (mod p) and 1 <= a <= (p-1)/2.
    Residue { a: u32 },
    /// -24m is a nonresidue mod p.
    NonResidue,
}

/// Classify a slice index m mod p.
pub fn classify(p: u32, m: i64) -> DissectionClass {
    let pl = p as i64;
    let mm = m.rem_euclid(pl);
    if mm == 0 {
        return DissectionClass::Zero;
    }
    for a in 1..=(p - 1) / 2 {
        let al = a as i64;
        if (36 * al * al + 24 * mm).rem_euclid(pl) == 0 {
            return DissectionClass::Residue { a };
        }
    }
    DissectionClass::NonResidue
}

/// The exact coefficient of the Phi correction in the d-th Galois slice:
/// -chi_12(p) * (-1)^(a+d+1) * 4 sin(d pi/p) sin(6 a d pi/p) in Z[zeta_p].
pub fn correction_coefficient(p: u32, d: u32, a: u32) -> CycNum {
    let sign = -chi12(p as i64) * if (a + d + 1) % 2 == 0 { 1 } else { -1 };
    CycNum::four_sine_product(p, d, a).scale(&rat(sign))
}

/// Exponent numerator (over 24p) of the correction's q-power
/// q^((a(p-3a)/2 - m)/p).
pub fn correction_exponent_num(p: u32, m: i64, a: u32) -> i64 {
    let (pl, al) = (p as i64, a as i64);
    12 * al * (pl - 3 * al) - 24 * m.rem_euclid(pl)
}

/// The slice K_{p,m}(zeta_p^d, z) assembled directly from the definition:
/// rank census coefficients plus (in the residue case) the Phi correction,
/// all multiplied by (q^p; q^p)_inf and shifted by q^(m/p).
///
/// `trunc` is the trusted window in exponent numerators over 24p.
pub fn k_series(p: u32, m: i64, d: u32, trunc: i64) -> Result<QSeries> {
    if d % p == 0 {
        return Err(Error::Domain(format!("d = {d} is not prime to p = {p}")));
    }
    let dd = lattice_den(p);
    let pl = p as i64;
    let mm = m.rem_euclid(pl);
    let shift = 24 * mm; // numerator of q^(m/p)
    let w = trunc - shift;
    let sp = s_p(p);
    // Main sum over the rank census.
    let nmin = (sp - mm).div_euclid(pl) + i64::from((sp - mm).rem_euclid(pl) != 0);
    let nmax = w.div_euclid(dd);
    let mut bracket = if nmax < nmin {
        QSeries::zero(p, dd, w)
    } else {
        // The census combination sum_k N(k,p,arg) zeta_p^(kd) is the q^arg
        // coefficient of R(zeta_p^d, q), i.e. the d-th Galois conjugate of
        // the corresponding rank_gf(p, 1) coefficient. The Eulerian series
        // scales to the deep windows the certificates need, where the
        // integer DP of `rank_table` would overflow; the two census routes
        // are cross-checked against each other in the ranks module.
        let r1 = rank_gf(p, 1, 1, (pl * nmax + mm - sp).max(0));
        QSeries::from_fn(p, dd, nmin * dd, dd, w, |i| {
            let n = nmin + i as i64;
            let arg = pl * n + mm - sp;
            debug_assert!(arg >= 0);
            r1.coeff(arg).expect("census window covers the bracket").galois(d)
        })
    };
    if let DissectionClass::Residue { a } = classify(p, mm) {
        let e = correction_exponent_num(p, mm, a);
        let phi = phi_series(p, a, w - e).shift(e).truncated(w);
        bracket = bracket.add(&phi.scale(&correction_coefficient(p, d, a)));
    }
    // Multiply by (q^p; q^p)_inf, padding its window so the product still
    // reaches w when the bracket's lead is negative.
    let pad = (-bracket.leading_exponent().unwrap_or(0)).max(0);
    let euler = euler_product(p, dd, pl * dd, w + pad);
    Ok(euler.mul(&bracket).truncated(w).shift(shift))
}

/// The deformed rank generating function
///
///   R_p(zeta_p^d, z) = q^(-1/24) R(zeta_p^d, q)
///     - chi_12(p) sum_{a=1}^{(p-1)/2} (-1)^(a+d+1)
///         * (4 sin(d pi/p) sin(6 a d pi/p))
///         * q^(a(p-3a)/2 - p^2/24) Phi_{p,a}(q^p),
///
/// whose product with eta(p^2 z) has integer exponents and dissects into
/// the K_{p,m} under U_{p,m}.
pub fn r_p_series(p: u32, d: u32, trunc: i64) -> QSeries {
    assert!(d % p != 0, "d must be prime to p");
    let dd = lattice_den(p);
    let pl = p as i64;
    // q^(-1/24) R: compute R on the integer lattice, then refine.
    let tq = (trunc + pl).div_euclid(dd) + 1;
    let mut acc = rank_gf(p, d, 1, tq).reden(dd).shift(-pl).truncated(trunc);
    for a in 1..=(p - 1) / 2 {
        let al = a as i64;
        // Exponent numerator of q^(a(p-3a)/2 - p^2/24).
        let e = 12 * pl * al * (pl - 3 * al) - pl * pl * pl;
        // Phi_{p,a}(q^p) needs its own window (trunc - e)/p before inflation.
        let t_phi = (trunc - e).div_euclid(pl);
        let phi = phi_series(p, a, t_phi).substitute_power_up(pl).shift(e).truncated(trunc);
        acc = acc.add(&phi.scale(&correction_coefficient(p, d, a)));
    }
    acc
}

/// The exponent-extraction operator U_{p,m}: keep the terms a(e) q^e with
/// integer e = m (mod p) and map them to a(e) q^(e/p). Errors if a nonzero
/// coefficient sits on a non-integer exponent. Requires p | den, so the
/// divided exponents stay on the lattice.
pub fn u_operator(f: &QSeries, p: u32, m: i64) -> Result<QSeries> {
    let dd = f.den();
    let pl = p as i64;
    assert!(dd % pl == 0, "U_p needs p to divide the exponent denominator");
    let mm = m.rem_euclid(pl);
    let mut kept: Vec<(i64, CycNum)> = Vec::new();
    for (e, c) in f.terms() {
        if e.rem_euclid(dd) != 0 {
            return Err(Error::OffLattice(format!(
                "U_{p} applied to a series with non-integer exponent {e}/{dd}"
            )));
        }
        if (e / dd).rem_euclid(pl) == mm {
            kept.push((e / pl, c.clone()));
        }
    }
    let out_trunc = f.trunc().div_euclid(pl);
    let mut out = QSeries::zero(p, dd, out_trunc);
    for (e, c) in kept {
        out = out.add(&QSeries::monomial(p, dd, c, e, out_trunc));
    }
    Ok(out)
}

/// The slice K_{p,m}(zeta_p^d, z) by the independent route
/// U_{p,m}(eta(p^2 z) * R_p(zeta_p^d, z)).
pub fn k_series_via_u(p: u32, m: i64, d: u32, trunc: i64) -> Result<QSeries> {
    let pl = p as i64;
    let want = pl * (trunc + 1);
    let rp = r_p_series(p, d, want);
    // R_p can start below q^(-1/24) (its Phi corrections reach down to
    // q^(a(p-3a)/2 - p^2/24)), so pad eta's window by the actual lead.
    let lead = rp.leading_exponent().unwrap_or(0).min(0);
    let e2 = crate::etaforms::eta(p, pl * pl, want - lead);
    let prod = e2.mul(&rp);
    Ok(u_operator(&prod, p, m)?.truncated(trunc))
}

// ============================================================================
// Tests
// ============================================================================
