//! Cusps of Gamma_1(p) and exact orders of eta-theta quotients there.
//!
//! For an odd prime p, a full set of inequivalent cusps of Gamma_1(p) is
//!
//!   { i_infinity, 0 } u { 1/n : 2 <= n <= (p-1)/2 } u { n/p : 2 <= n <= (p-1)/2 },
//!
//! p - 1 cusps in total, with widths 1, p, p (each 1/n) and 1 (each n/p);
//! the widths sum to the index mu = (p^2 - 1)/2. For order computations
//! i_infinity is represented by the equivalent fraction 1/p.
//!
//! Orders come in two scales:
//! - `ord`: the invariant q-scale order of the form at the cusp;
//! - `ORD = width * ord`: the scaled order entering the valence formula
//!   sum_s ORD(f, s) = (k/12) * mu for weight k.
//!
//! For a quotient j = eta(p z)^(n0) * prod f_{p,k}^(n_k) the scaled order
//! has a closed form depending only on gcd(c, p) of the cusp a/c:
//!
//!   gcd(c, p) = 1:  ORD(j, a/c) = (n0 + 3 * sum_k n_k) / 24     (a-independent)
//!   c = 0 mod p:    ORD(j, a/c) = (1/(24p)) * (n0 p^2 + 3 sum_k n_k (2(ak mod p) - p)^2)
//!
//! [`big_ord`] implements the closed form; [`ord_eta_level`] and
//! [`ord_theta`] expose the classical per-factor orders (in the convention
//! where the eta value is 12 times its q-scale order), and the tests tie
//! the two routes together on randomized exponent vectors.

use crate::cyclotomic::{ratio, Rat};
use crate::dissection::{classify, DissectionClass};
use crate::etaforms::EtaVector;

/// One cusp of Gamma_1(p), tagged by its place in the canonical list.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cusp {
    /// i_infinity, represented by 1/p, width 1.
    Infinity,
    /// 0 = 0/1, width p.
    Zero,
    /// 1/n for 2 <= n <= (p-1)/2, width p.
    OneOverN(u32),
    /// n/p for 2 <= n <= (p-1)/2, width 1.
    NOverP(u32),
}

impl Cusp {
    /// The representative fraction a/c used in order formulas.
    pub fn representative(&self, p: u32) -> (i64, i64) {
        match *self {
            Cusp::Infinity => (1, p as i64),
            Cusp::Zero => (0, 1),
            Cusp::OneOverN(n) => (1, n as i64),
            Cusp::NOverP(n) => (n as i64, p as i64),
        }
    }

    /// Cusp width in Gamma_1(p): 1 when p | c, else p.
    pub fn width(&self, p: u32) -> i64 {
        let (_, c) = self.representative(p);
        if c % p as i64 == 0 {
            1
        } else {
            p as i64
        }
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, Cusp::Infinity)
    }

    /// Short label for reports: "oo", "0", "1/2", "2/11", ...
    pub fn label(&self, p: u32) -> String {
        match *self {
            Cusp::Infinity => "oo".into(),
            Cusp::Zero => "0".into(),
            Cusp::OneOverN(n) => format!("1/{n}"),
            Cusp::NOverP(n) => format!("{n}/{p}"),
        }
    }
}

/// The canonical cusp list [oo, 0, 1/2, ..., 1/((p-1)/2), 2/p, ..., ((p-1)/2)/p].
pub fn cusp_set(p: u32) -> Vec<Cusp> {
    let h = (p - 1) / 2;
    let mut out = vec![Cusp::Infinity, Cusp::Zero];
    out.extend((2..=h).map(Cusp::OneOverN));
    out.extend((2..=h).map(Cusp::NOverP));
    out
}

/// Classical order of eta(N z) at the cusp a/c, in the convention scaled by
/// 12: g^2/(2N) with g = gcd(N, c). (The q-scale order is g^2/(24N); the
/// 12-fold convention is what order tables traditionally print, and the
/// consistency test below divides it back out.)
pub fn ord_eta_level(n_level: u32, _a: i64, c: i64) -> Rat {
    let g = gcd(n_level as i64, c);
    ratio(g * g, 2 * n_level as i64)
}

/// Classical q-scale order of the theta function f_{N,rho} at the cusp a/c:
/// (g^2/(2N)) * ({a rho / g} - 1/2)^2 with g = gcd(N, c).
pub fn ord_theta(n_level: u32, rho: i64, a: i64, c: i64) -> Rat {
    let n = n_level as i64;
    let g = gcd(n, c);
    // {a rho / g} - 1/2 = (2 (a rho mod g) - g) / (2g).
    let r = (a * rho).rem_euclid(g);
    let half_dev = ratio(2 * r - g, 2 * g);
    ratio(g * g, 2 * n) * &half_dev * &half_dev
}

/// Scaled order ORD(j, s) = width(s) * ord(j, s) of the quotient described
/// by `v`, in closed form. At the infinite cusp this is the q-order of the
/// expansion.
pub fn big_ord(v: &EtaVector, cusp: &Cusp) -> Rat {
    let p = v.prime();
    let pl = p as i64;
    let (a, c) = cusp.representative(p);
    if c % pl != 0 {
        ratio(v.n0 + 3 * v.sum_nk(), 24)
    } else {
        let mut num = v.n0 * pl * pl;
        for (i, n) in v.nk.iter().enumerate() {
            let k = i as i64 + 1;
            let r = (a * k).rem_euclid(pl);
            num += 3 * n * (2 * r - pl) * (2 * r - pl);
        }
        ratio(num, 24 * pl)
    }
}

/// Lower bound, in the scaled-order ORD sense, for the order of the slice
/// K_{p,m}(zeta_p, z) at a non-infinite cusp.
///
/// - at 0: -(p-5)(p-7)/24 (which is 0 for p = 5, 7);
/// - at 1/n: -(p-1-6n)(p+1-6n)/24 when 6n < p - 1, else 0;
/// - at n/p: (p^2-1)/(24p) when m = 0 or -24m is a nonresidue mod p,
///   and (p-3)/(2p) in the residue case.
pub fn lambda_bound(p: u32, m: i64, cusp: &Cusp) -> Rat {
    let pl = p as i64;
    match *cusp {
        Cusp::Infinity => panic!("order bounds apply only to finite-side cusps"),
        Cusp::Zero => ratio(-(pl - 5) * (pl - 7), 24),
        Cusp::OneOverN(n) => {
            let nl = n as i64;
            if 6 * nl < pl - 1 {
                ratio(-(pl - 1 - 6 * nl) * (pl + 1 - 6 * nl), 24)
            } else {
                ratio(0, 1)
            }
        }
        Cusp::NOverP(_) => match classify(p, m) {
            DissectionClass::Zero | DissectionClass::NonResidue => ratio(pl * pl - 1, 24 * pl),
            DissectionClass::Residue { .. } => ratio(pl - 3, 2 * pl),
        },
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

// ============================================================================
// Tests
// ============================================================================

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclotomic::rat;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cusp_counts_and_widths() {
        for &p in &[5u32, 7, 11, 13, 17, 19] {
            let cusps = cusp_set(p);
            assert_eq!(cusps.len(), (p - 1) as usize, "p = {p}");
            let mu: i64 = cusps.iter().map(|s| s.width(p)).sum();
            assert_eq!(mu, (p as i64 * p as i64 - 1) / 2, "index at p = {p}");
        }
        let c11 = cusp_set(11);
        assert_eq!(c11[0].label(11), "oo");
        assert_eq!(c11[1].label(11), "0");
        assert_eq!(c11[2].label(11), "1/2");
        assert_eq!(c11[5].label(11), "1/5");
        assert_eq!(c11[6].label(11), "2/11");
        assert_eq!(c11[9].label(11), "5/11");
    }

    #[test]
    fn classical_order_formulas_pin_examples() {
        // eta(N z) at a cusp with c = 0 mod N: g = N gives N/2.
        assert_eq!(ord_eta_level(11, 1, 11), ratio(11, 2));
        assert_eq!(ord_eta_level(7, 3, 14), ratio(7, 2));
        // and at a cusp with gcd(N, c) = 1: 1/(2N).
        assert_eq!(ord_eta_level(11, 0, 1), ratio(1, 22));
        // f_{11,rho} at a cusp with g = 1: (1/22) * (1/4) = 1/88.
        assert_eq!(ord_theta(11, 3, 0, 1), ratio(1, 88));
        assert_eq!(ord_theta(11, 1, 1, 3), ratio(1, 88));
        // f_{11,2} at 1/11: g = 11, {2/11} - 1/2 = -7/22.
        assert_eq!(ord_theta(11, 2, 1, 11), ratio(11, 2) * ratio(-7, 22) * ratio(-7, 22));
    }

    #[test]
    fn closed_form_matches_per_factor_assembly() {
        // ORD(j, s) from the closed form equals
        // width * (n0 * ord_eta/12 + sum_k n_k * ord_theta) assembled from
        // the classical per-factor formulas.
        let mut rng = ChaCha8Rng::seed_from_u64(0x0c05_90fd);
        for &p in &[7u32, 11, 13] {
            let h = ((p - 1) / 2) as usize;
            for _ in 0..40 {
                let n0 = rng.gen_range(-6i64..=30);
                let nk: Vec<i64> = (0..h).map(|_| rng.gen_range(-5i64..=5)).collect();
                let v = EtaVector::new(p, n0, nk);
                for cusp in cusp_set(p) {
                    let (a, c) = cusp.representative(p);
                    let mut ord = rat(v.n0) * ord_eta_level(p, a, c) / rat(12);
                    for (i, n) in v.nk.iter().enumerate() {
                        ord += rat(*n) * ord_theta(p, i as i64 + 1, a, c);
                    }
                    let assembled = rat(cusp.width(p)) * ord;
                    assert_eq!(
                        big_ord(&v, &cusp),
                        assembled,
                        "p = {p}, cusp {}",
                        cusp.label(p)
                    );
                }
            }
        }
    }

    #[test]
    fn infinity_order_agrees_with_q_order() {
        let v = EtaVector::from_slice(11, &[15, -4, -2, -3, -2, -2]);
        let inf = big_ord(&v, &Cusp::Infinity);
        assert_eq!(inf, ratio(v.order_at_infinity_num(), 264));
        assert_eq!(inf, rat(1));
    }

    #[test]
    fn golden_ord_table_p11() {
        // The five permutations of (15; -4,-2,-3,-2,-2) at the cusps
        // [oo, 0, 1/n, 2/11, 3/11, 4/11, 5/11]; the 1/n cusps all share the
        // 0 column's value since ORD there depends only on n0 + 3 sum nk.
        let v = EtaVector::from_slice(11, &[15, -4, -2, -3, -2, -2]);
        let table: [[i64; 7]; 5] = [
            [1, -1, -1, 2, 2, 2, 3],
            [2, -1, -1, 2, 3, 2, 1],
            [2, -1, -1, 3, 2, 1, 2],
            [2, -1, -1, 2, 1, 3, 2],
            [3, -1, -1, 1, 2, 2, 2],
        ];
        let cols = [
            Cusp::Infinity,
            Cusp::Zero,
            Cusp::OneOverN(3),
            Cusp::NOverP(2),
            Cusp::NOverP(3),
            Cusp::NOverP(4),
            Cusp::NOverP(5),
        ];
        for (r, row) in table.iter().enumerate() {
            let vr = v.permuted(r as u32 + 1);
            for (j, cusp) in cols.iter().enumerate() {
                assert_eq!(
                    big_ord(&vr, cusp),
                    rat(row[j]),
                    "r = {}, cusp {}",
                    r + 1,
                    cusp.label(11)
                );
            }
            // All 1/n columns coincide.
            for n in 2..=5 {
                assert_eq!(big_ord(&vr, &Cusp::OneOverN(n)), rat(row[1]));
            }
        }
    }

    #[test]
    fn order_bounds() {
        // At 0: -(p-5)(p-7)/24.
        assert_eq!(lambda_bound(5, 0, &Cusp::Zero), rat(0));
        assert_eq!(lambda_bound(7, 3, &Cusp::Zero), rat(0));
        assert_eq!(lambda_bound(11, 0, &Cusp::Zero), rat(-1));
        assert_eq!(lambda_bound(13, 1, &Cusp::Zero), rat(-2));
        assert_eq!(lambda_bound(17, 0, &Cusp::Zero), rat(-5));
        assert_eq!(lambda_bound(19, 0, &Cusp::Zero), rat(-7));
        // At 1/n: zero unless 6n < p - 1.
        assert_eq!(lambda_bound(11, 0, &Cusp::OneOverN(2)), rat(0));
        assert_eq!(lambda_bound(13, 0, &Cusp::OneOverN(2)), rat(0));
        assert_eq!(lambda_bound(17, 0, &Cusp::OneOverN(2)), rat(-1));
        assert_eq!(lambda_bound(19, 0, &Cusp::OneOverN(2)), rat(-2));
        assert_eq!(lambda_bound(19, 0, &Cusp::OneOverN(3)), rat(0));
        // At n/p: depends on the residue class of -24m.
        assert_eq!(lambda_bound(11, 0, &Cusp::NOverP(2)), ratio(5, 11));
        assert_eq!(lambda_bound(11, 2, &Cusp::NOverP(3)), ratio(5, 11));
        assert_eq!(lambda_bound(11, 1, &Cusp::NOverP(2)), ratio(4, 11));
        assert_eq!(lambda_bound(13, 2, &Cusp::NOverP(2)), ratio(5, 13));
        assert_eq!(lambda_bound(13, 0, &Cusp::NOverP(2)), ratio(7, 13));
    }
}
