//! Eta products, generalized eta functions, and the theta quotients
//! `f_{N,rho}` built from them.
//!
//! Everything here expands exactly on the lattice (1/(24p)) * Z:
//!
//! - `eta(t)` is Dedekind's eta at `t*z`, i.e. q^(t/24) * (q^t; q^t)_inf;
//! - `gen_eta(N, k, t)` is the generalized eta function
//!   q^(t*(N/2)*P2(k/N)) * prod_{m = k, N-k mod N} (1 - q^(t*m)), with
//!   P2(x) = {x}^2 - {x} + 1/6 the second Bernoulli polynomial;
//! - `biagioli_f(N, rho, t)` is
//!   q^(t*(N-2*rho)^2/(8N)) * (q^(t*rho), q^(t*(N-rho)), q^(t*N); q^(t*N))_inf,
//!   which factors as eta(N*t*z) * gen_eta(N, rho, t*z) — a relation the
//!   tests pin down coefficient by coefficient.
//!
//! The quotients that appear in rank-dissection identities are all of the
//! shape
//!
//!   j(p, n, z) = eta(p*z)^(n_0) * prod_{k=1..(p-1)/2} f_{p,k}(z)^(n_k),
//!
//! recorded by an [`EtaVector`] of integer exponents. The vector calculus
//! (index folding, the dihedral permutations pi_r, absorption of eta ratios
//! and of f_a/f_b prefactors) lives on `EtaVector`; [`j_series`] expands a
//! vector into an exact q-window.

use num_traits::ToPrimitive;

use crate::cyclotomic::{rat, ratio, CycNum, Rat};
use crate::error::{Error, Result};
use crate::qseries::{euler_product, pochhammer_inf, QSeries};

/// The global exponent denominator used for all eta expansions at prime p:
/// 24p accommodates both the eta prefactor q^(1/24) and p-th roots q^(1/p).
pub fn lattice_den(p: u32) -> i64 {
    24 * p as i64
}

/// The character chi_12: +1 for n = +-1 (mod 12), -1 for n = +-5 (mod 12),
/// 0 otherwise.
pub fn chi12(n: i64) -> i64 {
    match n.rem_euclid(12) {
        1 | 11 => 1,
        5 | 7 => -1,
        _ => 0,
    }
}

/// Fold an index into the canonical range 1..=(p-1)/2 using the symmetry
/// f_{p,k} = f_{p,p-k} = f_{p,-k}. Panics on k = 0 (mod p), which folds to
/// nothing.
pub fn fold(p: u32, k: i64) -> u32 {
    let r = k.rem_euclid(p as i64) as u32;
    assert!(r != 0, "index {k} folds to 0 mod {p}");
    r.min(p - r)
}

/// Dedekind eta at t*z: q^(t/24) * (q^t; q^t)_inf, on the (1/(24p)) lattice,
/// trusted through exponent numerator `trunc`.
pub fn eta(p: u32, t: i64, trunc: i64) -> QSeries {
    assert!(t >= 1);
    let d = lattice_den(p);
    // q^(t/24) has exponent numerator t*p; the product then runs over
    // exponent numerators t*d, 2*t*d, ...
    let shift = t * p as i64;
    euler_product(p, d, t * d, trunc - shift).shift(shift)
}

/// Generalized eta function at t*z for level N and residue class k:
///
///   q^(t*(N/2)*P2(k/N)) * prod_{m > 0, m = +-k mod N} (1 - q^(t*m)).
///
/// Errors if N divides k (the product degenerates) or if the prefactor
/// exponent does not land on the (1/(24p)) lattice.
pub fn gen_eta(p: u32, n_level: u32, k: u32, t: i64, trunc: i64) -> Result<QSeries> {
    assert!(t >= 1 && n_level >= 2);
    let d = lattice_den(p);
    let kr = k % n_level;
    if kr == 0 {
        return Err(Error::Domain(format!(
            "generalized eta index {k} is divisible by the level {n_level}"
        )));
    }
    // Exact prefactor exponent t*(N/2)*P2(k/N) as a rational, then as an
    // exponent numerator over 24p.
    let x = ratio(kr as i64, n_level as i64);
    let p2 = &x * &x - &x + ratio(1, 6);
    let expo = ratio(t * n_level as i64, 2) * p2 * rat(d);
    if !expo.is_integer() {
        return Err(Error::OffLattice(format!(
            "generalized eta prefactor exponent {expo} is not an integer over 1/{d}"
        )));
    }
    let shift = expo.to_integer().to_i64().expect("prefactor exponent fits in i64");
    let w = trunc - shift;
    let a = pochhammer_inf(p, d, t * kr as i64 * d, t * n_level as i64 * d, w);
    let b = pochhammer_inf(p, d, t * (n_level - kr) as i64 * d, t * n_level as i64 * d, w);
    Ok(a.mul(&b).truncated(w).shift(shift))
}

/// The theta function f_{N,rho} at t*z:
///
///   q^(t*(N-2*rho)^2/(8N))
///     * (q^(t*rho); q^(t*N))_inf (q^(t*(N-rho)); q^(t*N))_inf (q^(t*N); q^(t*N))_inf.
///
/// The index is folded first (f_{N,rho} = f_{N,N-rho} = f_{N,-rho}), so any
/// rho not divisible by N is accepted.
pub fn biagioli_f(p: u32, n_level: u32, rho: i64, t: i64, trunc: i64) -> Result<QSeries> {
    assert!(t >= 1 && n_level >= 2);
    let d = lattice_den(p);
    let r0 = rho.rem_euclid(n_level as i64) as u32;
    if r0 == 0 {
        return Err(Error::Domain(format!(
            "theta index {rho} is divisible by the level {n_level}"
        )));
    }
    let r = r0.min(n_level - r0) as i64;
    let n = n_level as i64;
    let expo = ratio(t * (n - 2 * r) * (n - 2 * r), 8 * n) * rat(d);
    if !expo.is_integer() {
        return Err(Error::OffLattice(format!(
            "theta prefactor exponent {expo} is not an integer over 1/{d}"
        )));
    }
    let shift = expo.to_integer().to_i64().expect("prefactor exponent fits in i64");
    let w = trunc - shift;
    let out = pochhammer_inf(p, d, t * r * d, t * n * d, w)
        .mul(&pochhammer_inf(p, d, t * (n - r) * d, t * n * d, w))
        .mul(&euler_product(p, d, t * n * d, w));
    Ok(out.truncated(w).shift(shift))
}

// ============================================================================
// Exponent vectors for eta-theta quotients
// ============================================================================

/// Integer exponent vector (n_0; n_1, ..., n_{(p-1)/2}) describing the
/// quotient eta(p*z)^(n_0) * prod_k f_{p,k}(z)^(n_k).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EtaVector {
    p: u32,
    /// Exponent of eta(p*z).
    pub n0: i64,
    /// Exponents of f_{p,1}, ..., f_{p,(p-1)/2} in index order.
    pub nk: Vec<i64>,
}

impl EtaVector {
    /// Build from the eta exponent and the theta exponents; `nk` must have
    /// exactly (p-1)/2 entries.
    pub fn new(p: u32, n0: i64, nk: Vec<i64>) -> Self {
        assert_eq!(nk.len(), ((p - 1) / 2) as usize, "need one exponent per f_{{p,k}}");
        EtaVector { p, n0, nk }
    }

    /// Build from a flat slice `[n0, n1, ..., n_{(p-1)/2}]`.
    pub fn from_slice(p: u32, v: &[i64]) -> Self {
        Self::new(p, v[0], v[1..].to_vec())
    }

    pub fn prime(&self) -> u32 {
        self.p
    }

    /// Modular weight of the quotient: (n0 + sum_k n_k) / 2.
    pub fn weight(&self) -> Rat {
        ratio(self.n0 + self.nk.iter().sum::<i64>(), 2)
    }

    /// sum_k n_k over the theta part.
    pub fn sum_nk(&self) -> i64 {
        self.nk.iter().sum()
    }

    /// sum_k k * n_k.
    pub fn sum_k_nk(&self) -> i64 {
        self.nk.iter().enumerate().map(|(i, n)| (i as i64 + 1) * n).sum()
    }

    /// sum_k k^2 * n_k.
    pub fn sum_k2_nk(&self) -> i64 {
        self.nk.iter().enumerate().map(|(i, n)| (i as i64 + 1) * (i as i64 + 1) * n).sum()
    }

    /// The permutation pi_r: the image vector m satisfies m_{fold(r*k)} = n_k,
    /// so that the quotient's theta part becomes prod_k f_{p, r*k}^(n_k).
    /// Requires gcd(r, p) = 1.
    pub fn permuted(&self, r: u32) -> EtaVector {
        assert!(r % self.p != 0, "permutation index must be prime to p");
        let h = self.nk.len();
        let mut m = vec![0i64; h];
        for (i, n) in self.nk.iter().enumerate() {
            let k = i as i64 + 1;
            m[(fold(self.p, r as i64 * k) - 1) as usize] = *n;
        }
        EtaVector { p: self.p, n0: self.n0, nk: m }
    }

    /// Multiply by (eta(p*z) / eta(z))^e using the decomposition
    /// eta(z) = eta(p*z)^(1 - (p-1)/2) * prod_k f_{p,k}: the eta exponent
    /// grows by e*(p-1)/2 and every theta exponent drops by e.
    pub fn absorb_eta_ratio(&mut self, e: i64) {
        self.n0 += e * ((self.p - 1) / 2) as i64;
        for n in self.nk.iter_mut() {
            *n -= e;
        }
    }

    /// Multiply by the prefactor f_{p,alpha} / f_{p,beta} (indices folded).
    pub fn absorb_prefactor(&mut self, alpha: u32, beta: u32) {
        self.nk[(fold(self.p, alpha as i64) - 1) as usize] += 1;
        self.nk[(fold(self.p, beta as i64) - 1) as usize] -= 1;
    }

    /// Exponent numerator (over 24p) of the quotient's q-order at infinity:
    /// eta(p*z) contributes p^2 per power and f_{p,k} contributes
    /// 3*(p - 2k)^2 per power.
    pub fn order_at_infinity_num(&self) -> i64 {
        let p = self.p as i64;
        let mut s = self.n0 * p * p;
        for (i, n) in self.nk.iter().enumerate() {
            let k = i as i64 + 1;
            s += 3 * (p - 2 * k) * (p - 2 * k) * n;
        }
        s
    }
}

/// Expand the quotient described by `v` through exponent numerator `trunc`
/// (over 24p). Negative exponents invert exact unit series, so the result
/// is still exact on its window; the window is padded internally so that
/// the returned series is trusted through `trunc` precisely.
pub fn j_series(v: &EtaVector, trunc: i64) -> Result<QSeries> {
    let p = v.p;
    let d = lattice_den(p);
    // Window slack: a product of exact factors f_i^(e_i) with positive
    // leading exponents L_i is trusted through (build window) + S - max L_i,
    // where S = sum e_i L_i is the order of the whole quotient. Build high
    // enough that the result covers `trunc`.
    let s = v.order_at_infinity_num();
    let mut lmax = if v.n0 != 0 { (p as i64) * (p as i64) } else { 0 };
    for (i, n) in v.nk.iter().enumerate() {
        let k = i as i64 + 1;
        if *n != 0 {
            lmax = lmax.max(3 * (p as i64 - 2 * k) * (p as i64 - 2 * k));
        }
    }
    let build = trunc + lmax + (-s).max(0) + 1;
    let mut out = QSeries::one(p, d, build);
    if v.n0 != 0 {
        out = out.mul(&eta(p, p as i64, build).pow(v.n0 as i32)?);
    }
    for (i, n) in v.nk.iter().enumerate() {
        if *n != 0 {
            let f = biagioli_f(p, p, i as i64 + 1, 1, build)?;
            out = out.mul(&f.pow(*n as i32)?);
        }
    }
    assert!(
        out.trunc() >= trunc,
        "window slack miscomputed: built {} but need {trunc}",
        out.trunc()
    );
    Ok(out.truncated(trunc))
}

// ============================================================================
// The basis functions Phi_{p,a}
// ============================================================================

/// The q-series
///
///   Phi_{p,a}(q) = sum_{n >= 0} q^(p*n^2) / ((q^a; q^p)_{n+1} (q^(p-a); q^p)_n),
///
/// minus an extra 1 exactly when p < 6a < 3p, expanded on the (1/(24p))
/// lattice through exponent numerator `trunc` (all exponents are integers,
/// i.e. multiples of 24p). Requires 1 <= a <= (p-1)/2.
pub fn phi_series(p: u32, a: u32, trunc: i64) -> QSeries {
    assert!(a >= 1 && a <= (p - 1) / 2, "need 1 <= a <= (p-1)/2");
    let d = lattice_den(p);
    let (pl, al) = (p as i64, a as i64);
    let minus_one = CycNum::from_i64(p, -1);
    // inv_n = 1 / ((q^a; q^p)_{n+1} (q^(p-a); q^p)_n), maintained
    // incrementally: each step divides by the two new unit factors
    // (1 - q^(a + n*p)) and (1 - q^(p - a + (n-1)*p)).
    let mut inv = QSeries::one(p, d, trunc).div_sparse(&[(al * d, minus_one.clone())]);
    let mut acc = inv.clone();
    let mut n: i64 = 1;
    while pl * n * n * d <= trunc {
        inv = inv
            .div_sparse(&[((al + n * pl) * d, minus_one.clone())])
            .div_sparse(&[((pl - al + (n - 1) * pl) * d, minus_one.clone())]);
        acc = acc.add(&inv.shift(pl * n * n * d).truncated(trunc));
        n += 1;
    }
    if pl < 6 * al {
        // The defining sum for these indices carries a compensating -1
        // (its n = 0 term starts at q^0 with coefficient 1 regardless).
        acc = acc.sub(&QSeries::one(p, d, trunc));
    }
    acc
}

// ============================================================================
// Tests
// ============================================================================
