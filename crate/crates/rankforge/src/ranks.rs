//! Partitions and Dyson's rank.
//!
//! The rank of a partition is its largest part minus its number of parts.
//! Writing N(m, n) for the number of partitions of n with rank m and
//! N(k, t, n) for the number with rank congruent to k mod t, the
//! two-variable generating function is
//!
//!   R(z, q) = sum_{n>=0} sum_m N(m, n) z^m q^n
//!           = sum_{n>=0} q^(n^2) / ((z*q; q)_n (q/z; q)_n).
//!
//! This module provides:
//! - `partitions`: p(0..=n) by the pentagonal-number recurrence;
//! - `rank_counts` / `rank_table`: N(m, n) and N(k, t, n) by dynamic
//!   programming over largest part and number of parts;
//! - `rank_gf`: R(zeta_p, q) as an exact q-series over Z[zeta_p], by the
//!   Eulerian series above with an incrementally maintained inverse
//!   denominator;
//! - `rank_gf_alt`: the same function by the Appell--Lerch shape
//!   R(z,q) = (1-z)/(q;q)_inf * sum_{n in Z} (-1)^n q^(n(3n+1)/2)/(1-z q^n),
//!   used as an independent cross-check;
//! - `dyson_check`: certify N(0,p,N) = N(1,p,N) = ... = N(p-1,p,N) for a
//!   residue class of N, which is equivalent to the q^N coefficient of
//!   R(zeta_p, q) vanishing.

use num_traits::Zero;

use crate::cyclotomic::{rat, CycNum, Rat};
use crate::error::{Error, Result};
use crate::qseries::{euler_product, QSeries};

/// p(0), p(1), ..., p(n) by Euler's pentagonal-number recurrence.
pub fn partitions(n: usize) -> Vec<Rat> {
    let mut p = vec![Rat::zero(); n + 1];
    p[0] = rat(1);
    for m in 1..=n {
        let mut acc = Rat::zero();
        let mut k = 1i64;
        loop {
            let g1 = k * (3 * k - 1) / 2;
            let g2 = k * (3 * k + 1) / 2;
            if g1 as usize > m {
                break;
            }
            let sign = if k % 2 == 0 { -1 } else { 1 };
            acc += &p[m - g1 as usize] * rat(sign);
            if g2 as usize <= m {
                acc += &p[m - g2 as usize] * rat(sign);
            }
            k += 1;
        }
        p[m] = acc;
    }
    p
}

/// N(m, n) for |m| <= n, returned as `counts[n]` mapping rank offset
/// m + n -> count (so the vector index runs over m = -n ..= n).
///
/// Dynamic programming over Eulerian structure: the coefficient of
/// z^m q^n in q^(k^2) / ((zq;q)_k (q/z;q)_k) counts partitions with
/// Durfee square k; summing over k is implicit in the recurrence below,
/// which instead builds partitions part by part.
pub fn rank_counts(nmax: usize) -> Vec<Vec<i64>> {
    // state[(largest part so far L, parts so far k)] is impractical; instead
    // count partitions of n with largest part exactly l and exactly k parts
    // via the standard two-way recurrence, accumulating rank = l - k.
    //
    // g[l][n] = multiset of (k = parts) counts for partitions of n with all
    // parts <= l. We fold the rank in directly: for fixed largest part l,
    // a partition of n with largest part exactly l and k parts total has
    // rank l - k. Enumerate by conjugation-free DP on (parts <= l):
    // r[n][k] = # partitions of n into exactly k parts each <= l.
    // To keep it to O(nmax^3) in the small ranges we need (nmax <= ~120 for
    // the CLI, ~60 for tests), the direct cubic DP is fine.
    let n = nmax;
    // parts[x][k] = number of partitions of x into exactly k parts (any size),
    // built with the "smallest part is 1 or subtract 1 from every part"
    // bijection: P(x, k) = P(x-1, k-1) + P(x-k, k).
    let mut parts = vec![vec![0i64; n + 2]; n + 1];
    parts[0][0] = 1;
    for x in 1..=n {
        for k in 1..=x {
            let a = parts[x - 1][k - 1];
            let b = if x >= k { parts[x - k][k] } else { 0 };
            parts[x][k] = a + b;
        }
    }
    // A partition of x with exactly k parts and largest part exactly l is,
    // after deleting the largest part, a partition of x - l into k - 1 parts
    // each <= l. Count Q(y, j, l) = partitions of y into j parts <= l via
    // Q(y, j, l) = Q(y - l, j - 1, l) + Q(y, j, l - 1); that is cubic in
    // memory, so instead use rank symmetry N(m, n) = N(-m, n) and the
    // generating-function route for anything large. Here we do the simple
    // O(n^2 * n) table over (y, j) for each l incrementally.
    let mut counts: Vec<Vec<i64>> = (0..=n).map(|x| vec![0i64; 2 * x + 1]).collect();
    counts[0][0] = 1; // empty partition: rank 0
    // q[y][j] = partitions of y into exactly j parts, each part <= l,
    // updated incrementally in l.
    let mut q = vec![vec![0i64; n + 2]; n + 1];
    q[0][0] = 1;
    for l in 1..=n {
        // incorporate parts of size l: iterate y ascending so that multiple
        // parts of size l accumulate.
        for y in l..=n {
            for j in 1..=y {
                let add = q[y - l][j - 1];
                if add != 0 {
                    // Partition counts pass 2^63 near n = 416; the deep
                    // windows go through the generating-function route in
                    // `rank_gf` instead, which is exact at any depth.
                    q[y][j] = q[y][j]
                        .checked_add(add)
                        .expect("rank_counts overflows i64 at this depth; use rank_gf");
                }
            }
        }
        // partitions with largest part exactly l: strip one copy of l and
        // require the rest to have parts <= l.
        for x in l..=n {
            let rest = x - l;
            for j in 0..=rest {
                let c = q[rest][j];
                if c != 0 {
                    let kparts = j + 1;
                    let rank = l as i64 - kparts as i64;
                    counts[x][(rank + x as i64) as usize] += c;
                }
            }
        }
    }
    counts
}

/// N(k, t, n) for k = 0..t-1 and n = 0..=nmax, as a table
/// `table[n][k]`.
pub fn rank_table(t: u32, nmax: usize) -> Vec<Vec<i64>> {
    let counts = rank_counts(nmax);
    let t = t as i64;
    counts
        .iter()
        .enumerate()
        .map(|(n, row)| {
            let mut out = vec![0i64; t as usize];
            for (idx, &c) in row.iter().enumerate() {
                if c != 0 {
                    let m = idx as i64 - n as i64;
                    out[m.rem_euclid(t) as usize] += c;
                }
            }
            out
        })
        .collect()
}

/// R(zeta_p^d, q) truncated at q^T, exactly over Q(zeta_p), via the
/// Eulerian series sum_{n>=0} q^(n^2) / ((zq;q)_n (q/z;q)_n).
///
/// The shared denominator is extended one factor pair at a time: its
/// inverse is maintained by two sparse divisions per step, so the total
/// cost is O(sqrt(T)) sparse passes over an O(T) window.
pub fn rank_gf(p: u32, d: u32, den: i64, trunc: i64) -> QSeries {
    // Work on the integer lattice: exponents are multiples of `den`.
    assert!(trunc % den == 0, "rank_gf expects an integer truncation bound");
    let t = trunc / den;
    let z = CycNum::zeta_pow(p, d as i64);
    let zi = CycNum::zeta_pow(p, -(d as i64));
    let mut acc = QSeries::one(p, den, trunc); // n = 0 term
    let mut inv_den = QSeries::one(p, den, trunc); // 1/((zq;q)_n (q/z;q)_n)
    let mut n: i64 = 1;
    while n * n <= t {
        // Extend the denominator by (1 - z q^n)(1 - z^{-1} q^n)
        //   = 1 - (z + z^{-1}) q^n + q^{2n}.
        let mut factor: Vec<(i64, CycNum)> = vec![(n * den, -&(&z + &zi))];
        if 2 * n <= t {
            factor.push((2 * n * den, CycNum::one(p)));
        }
        inv_den = inv_den.div_sparse(&factor);
        acc = acc.add(&inv_den.shift(n * n * den).truncated(trunc));
        n += 1;
    }
    acc
}

/// R(zeta_p^d, q) by the alternative shape
///
///   R(z, q) = 1/(q;q)_inf * [ 1 + sum_{n>=1} (-1)^n q^(n(3n+1)/2) (1+q^n)
///                               * (1-z)(1-1/z) / ((1-z q^n)(1-q^n/z)) ].
///
/// The rational function of z expands in closed form: with z = zeta_p^d a
/// root of unity, (1-z)(1-1/z)/((1-zq^n)(1-q^n/z)) is summed as the
/// two-sided geometric series sum_{j,k>=0} z^(j-k) q^(n(j+k)) times
/// (1-z)(1-1/z), collected by s = j + k. Used only as an independent
/// oracle for `rank_gf`.
pub fn rank_gf_alt(p: u32, d: u32, den: i64, trunc: i64) -> QSeries {
    assert!(trunc % den == 0);
    let t = trunc / den;
    let z = CycNum::zeta_pow(p, d as i64);
    let zi = CycNum::zeta_pow(p, -(d as i64));
    let one = CycNum::one(p);
    let front = &(&one - &z) * &(&one - &zi); // (1-z)(1-1/z)
    // geo[s] = (1-z)(1-1/z) * sum_{j+k=s} z^(j-k), for s = 0.. (closed form:
    // the inner sum is (z^(s+1) - z^-(s+1))/(z - z^-1), a "quantum integer").
    let geo = |s: i64| -> CycNum {
        let mut acc = CycNum::zero(p);
        for j in 0..=s {
            acc = &acc + &CycNum::zeta_pow(p, (d as i64) * (2 * j - s));
        }
        &front * &acc
    };
    let mut bracket = QSeries::one(p, den, trunc);
    let mut n: i64 = 1;
    loop {
        let base = n * (3 * n + 1) / 2;
        if base > t {
            break;
        }
        let sign = if n % 2 == 0 { 1 } else { -1 };
        // (1 + q^n) * q^base * sum_{s>=0} geo(s) q^(n s)
        let mut s: i64 = 0;
        let mut term = QSeries::zero(p, den, trunc);
        while base + n * s <= t {
            let c = geo(s).scale(&rat(sign));
            term = term.add(&QSeries::monomial(p, den, c, (base + n * s) * den, trunc));
            s += 1;
        }
        let with_echo = term.add(&term.shift(n * den).truncated(trunc));
        bracket = bracket.add(&with_echo);
        n += 1;
    }
    let eta_inv = euler_product(p, den, den, trunc).inv().unwrap();
    bracket.mul(&eta_inv)
}

/// Outcome of a single Dyson-style equidistribution check at n.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DysonWitness {
    /// The partition argument checked.
    pub n: i64,
    /// The common value N(k, p, n) (equal for all k), i.e. p(n)/p.
    pub class_count: Rat,
}

/// Certify that all p rank classes are equinumerous at every n <= nmax with
/// n ≡ r (mod p): equivalent to the q^n coefficient of R(zeta_p, q)
/// vanishing, since sum_k N(k,p,n) zeta_p^k = 0 forces all N(k,p,n) equal
/// (1, zeta, ..., zeta^(p-1) sum to zero and zeta has degree p-1).
///
/// Returns the witnesses (n, p(n)/p) or the first failing n.
pub fn dyson_check(p: u32, r: i64, nmax: i64) -> Result<Vec<DysonWitness>> {
    if r.rem_euclid(p as i64) != r || nmax < 0 {
        return Err(Error::Domain(format!(
            "dyson_check wants 0 <= r < p and nmax >= 0, got r = {r}, nmax = {nmax}"
        )));
    }
    let gf = rank_gf(p, 1, 1, nmax);
    let pn = partitions(nmax as usize);
    let mut out = Vec::new();
    let mut n = r;
    while n <= nmax {
        let c = gf.coeff(n)?;
        if !c.is_zero() {
            return Err(Error::Domain(format!(
                "rank classes mod {p} are not equinumerous at n = {n}: \
                 coefficient of q^{n} in R(zeta_{p}, q) is {c}"
            )));
        }
        let share = &pn[n as usize] / rat(p as i64);
        out.push(DysonWitness { n, class_count: share });
        n += p as i64;
    }
    Ok(out)
}

// ============================================================================
// Tests
// ============================================================================
