//! Exact arithmetic in the cyclotomic field Q(zeta_p), p an odd prime.
//!
//! Elements are stored on the power basis 1, zeta, zeta^2, ..., zeta^(p-2)
//! with arbitrary-precision rational coordinates, where zeta = e^(2*pi*i/p).
//! The single reduction rule is
//!
//!   zeta^(p-1) = -(1 + zeta + zeta^2 + ... + zeta^(p-2)),
//!
//! the minimal polynomial of zeta being Phi_p(x) = 1 + x + ... + x^(p-1).
//!
//! Contents:
//! - `CycNum`: field element with ring operations, inversion, Galois maps.
//! - `CycNum::half_root_power`: powers of zeta_{2p} inside Q(zeta_p),
//!   via zeta_{2p} = -zeta_p^((p+1)/2).
//! - `CycNum::sine_ratio`: the unit sin(a*pi/p)/sin(b*pi/p).
//! - `CycNum::four_sine_product`: 4*sin(d*pi/p)*sin(6*a*d*pi/p), an
//!   algebraic integer arising as a dissection correction coefficient.
//! - `CycNum::parse`: reader for human-oriented literals like
//!   `-(2*z^9+z^8+1)` with `z` standing for zeta_p.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational scalar used for all exact coordinates.
pub type Rat = BigRational;

/// Build a `Rat` from an `i64`.
pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Build the rational n/d from `i64` parts (d must be nonzero).
pub fn ratio(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

// ============================================================================
// CycNum
// ============================================================================

/// An element of Q(zeta_p) on the power basis {1, zeta, ..., zeta^(p-2)}.
///
/// The prime `p` travels with the value; mixing two different primes in one
/// ring operation is a programming error and panics. Use [`CycNum::prime`]
/// to validate contexts at API boundaries.
#[derive(Clone, PartialEq, Eq)]
pub struct CycNum {
    p: u32,
    coords: Vec<Rat>,
}

impl CycNum {
    /// The zero element of Q(zeta_p).
    pub fn zero(p: u32) -> Self {
        assert!(is_odd_prime(p), "CycNum requires an odd prime, got {p}");
        CycNum { p, coords: vec![Rat::zero(); (p - 1) as usize] }
    }

    /// The unit element of Q(zeta_p).
    pub fn one(p: u32) -> Self {
        Self::from_i64(p, 1)
    }

    /// The rational integer `n` viewed in Q(zeta_p).
    pub fn from_i64(p: u32, n: i64) -> Self {
        Self::from_rat(p, rat(n))
    }

    /// The rational number `r` viewed in Q(zeta_p).
    pub fn from_rat(p: u32, r: Rat) -> Self {
        let mut x = Self::zero(p);
        x.coords[0] = r;
        x
    }

    /// The primitive root of unity zeta_p itself.
    pub fn zeta(p: u32) -> Self {
        Self::zeta_pow(p, 1)
    }

    /// zeta_p^e for any integer exponent (reduced modulo p, then folded
    /// through zeta^(p-1) = -(1 + zeta + ... + zeta^(p-2)) when needed).
    pub fn zeta_pow(p: u32, e: i64) -> Self {
        let mut x = Self::zero(p);
        let r = e.rem_euclid(p as i64) as usize;
        if r == (p - 1) as usize {
            for c in x.coords.iter_mut() {
                *c = -Rat::one();
            }
        } else {
            x.coords[r] = Rat::one();
        }
        x
    }

    /// Construct from explicit power-basis coordinates (length p-1).
    pub fn from_coords(p: u32, coords: Vec<Rat>) -> Result<Self> {
        if !is_odd_prime(p) {
            return Err(Error::Domain(format!("{p} is not an odd prime")));
        }
        if coords.len() != (p - 1) as usize {
            return Err(Error::Domain(format!(
                "expected {} coordinates for zeta_{p}, got {}",
                p - 1,
                coords.len()
            )));
        }
        Ok(CycNum { p, coords })
    }

    /// The prime p of the underlying root of unity.
    pub fn prime(&self) -> u32 {
        self.p
    }

    /// Immutable view of the power-basis coordinates.
    pub fn coords(&self) -> &[Rat] {
        &self.coords
    }

    /// True iff the element is 0.
    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    /// True iff the element is 1.
    pub fn is_one(&self) -> bool {
        self.coords[0].is_one() && self.coords[1..].iter().all(|c| c.is_zero())
    }

    /// True iff every power-basis coordinate is a rational integer, i.e. the
    /// element lies in Z[zeta_p].
    pub fn is_integral(&self) -> bool {
        self.coords.iter().all(|c| c.denom().is_one())
    }

    /// If the element lies in Q (all higher coordinates zero), return it.
    pub fn as_rational(&self) -> Option<&Rat> {
        if self.coords[1..].iter().all(|c| c.is_zero()) {
            Some(&self.coords[0])
        } else {
            None
        }
    }

    fn assert_same_prime(&self, other: &CycNum) {
        assert_eq!(
            self.p, other.p,
            "prime mismatch in cyclotomic arithmetic: zeta_{} vs zeta_{}",
            self.p, other.p
        );
    }

    /// Multiply by a rational scalar.
    pub fn scale(&self, r: &Rat) -> CycNum {
        if r.is_zero() {
            return CycNum::zero(self.p);
        }
        CycNum { p: self.p, coords: self.coords.iter().map(|c| c * r).collect() }
    }

    /// In-place `self += other * scalar`; the workhorse of series recurrences.
    pub fn add_scaled_assign(&mut self, other: &CycNum, scalar: &Rat) {
        self.assert_same_prime(other);
        for (a, b) in self.coords.iter_mut().zip(other.coords.iter()) {
            *a += b * scalar;
        }
    }

    /// Fold a length-p accumulator (positions 0..p-1 holding coefficients of
    /// zeta^0..zeta^(p-1)) down to the power basis.
    fn reduce_top(p: u32, mut acc: Vec<Rat>) -> CycNum {
        debug_assert_eq!(acc.len(), p as usize);
        let top = acc.pop().expect("nonempty accumulator");
        if !top.is_zero() {
            for c in acc.iter_mut() {
                *c -= &top;
            }
        }
        CycNum { p, coords: acc }
    }

    /// Apply the Galois automorphism sigma_a: zeta -> zeta^a, gcd(a, p) = 1.
    pub fn galois(&self, a: u32) -> CycNum {
        let p = self.p;
        let am = (a as i64).rem_euclid(p as i64) as u32;
        assert!(am != 0, "galois index must be coprime to p = {p}");
        let mut acc = vec![Rat::zero(); p as usize];
        for (k, c) in self.coords.iter().enumerate() {
            if !c.is_zero() {
                let idx = ((k as u64 * am as u64) % p as u64) as usize;
                acc[idx] += c;
            }
        }
        Self::reduce_top(p, acc)
    }

    /// Complex conjugation, i.e. the Galois map zeta -> zeta^(p-1).
    pub fn conj(&self) -> CycNum {
        self.galois(self.p - 1)
    }

    /// Multiplicative inverse, via the extended Euclidean algorithm on
    /// polynomials modulo Phi_p(x) = 1 + x + ... + x^(p-1).
    pub fn inv(&self) -> Result<CycNum> {
        if self.is_zero() {
            return Err(Error::NotInvertible("zero element of Q(zeta_p)".into()));
        }
        if let Some(r) = self.as_rational() {
            return Ok(CycNum::from_rat(self.p, r.recip()));
        }
        let p = self.p as usize;
        // Extended Euclid over Q[x]: find u with u * self = 1 (mod Phi_p).
        let phi: Vec<Rat> = vec![Rat::one(); p]; // 1 + x + ... + x^(p-1)
        let a: Vec<Rat> = self.coords.clone();
        let (g, _, u) = poly_ext_gcd(&phi, &a);
        // Phi_p is irreducible over Q, so gcd(Phi_p, a) is a nonzero constant.
        if poly_degree(&g) != Some(0) {
            return Err(Error::NotInvertible(
                "element shares a factor with Phi_p (should be impossible)".into(),
            ));
        }
        let c = g[0].recip();
        let mut coords: Vec<Rat> = u.iter().map(|x| x * &c).collect();
        coords.resize(p - 1, Rat::zero());
        Ok(CycNum { p: self.p, coords })
    }

    /// Approximate complex embedding zeta -> e^(2*pi*i/p); returns (re, im).
    ///
    /// For cross-checking only: all certified computation in this crate is
    /// exact, and nothing downstream consumes these floats.
    pub fn to_complex(&self) -> (f64, f64) {
        let p = self.p as f64;
        let (mut re, mut im) = (0.0, 0.0);
        for (k, c) in self.coords.iter().enumerate() {
            let x = rat_to_f64(c);
            let theta = 2.0 * std::f64::consts::PI * (k as f64) / p;
            re += x * theta.cos();
            im += x * theta.sin();
        }
        (re, im)
    }

    // ------------------------------------------------------------------
    // Trigonometric units and integers of Z[zeta_p]
    // ------------------------------------------------------------------

    /// zeta_{2p}^k expressed inside Q(zeta_p).
    ///
    /// Since p is odd, zeta_{2p} = -zeta_p^((p+1)/2), hence
    /// zeta_{2p}^k = (-1)^k * zeta_p^(k*(p+1)/2).
    pub fn half_root_power(p: u32, k: i64) -> CycNum {
        let half = ((p + 1) / 2) as i64;
        let z = Self::zeta_pow(p, k.wrapping_mul(half).rem_euclid(p as i64));
        if k.rem_euclid(2) == 1 {
            -&z
        } else {
            z
        }
    }

    /// 2*cos(k*pi/p) = zeta_{2p}^k + zeta_{2p}^(-k) as an exact element.
    pub fn two_cos(p: u32, k: i64) -> CycNum {
        &Self::half_root_power(p, k) + &Self::half_root_power(p, -k)
    }

    /// The unit sin(a*pi/p) / sin(b*pi/p) of Z[zeta_p], for 1 <= a, b <= p-1.
    ///
    /// Uses the telescoping identity
    ///   sin(d*pi/p)/sin(pi/p) = zeta_{2p}^(-(d-1)) * (1 + zeta_p + ... + zeta_p^(d-1)).
    pub fn sine_ratio(p: u32, a: u32, b: u32) -> Result<CycNum> {
        let base = |d: u32| -> Result<CycNum> {
            if d == 0 || d >= p {
                return Err(Error::Domain(format!(
                    "sine_ratio index {d} outside 1..={} for p = {p}",
                    p - 1
                )));
            }
            let mut s = CycNum::zero(p);
            for j in 0..d {
                s = &s + &CycNum::zeta_pow(p, j as i64);
            }
            Ok(&CycNum::half_root_power(p, -((d as i64) - 1)) * &s)
        };
        let num = base(a)?;
        let den = base(b)?;
        Ok(&num * &den.inv()?)
    }

    /// 4*sin(d*pi/p)*sin(6*a*d*pi/p), an element of Z[zeta_p].
    ///
    /// By the product-to-sum formula this equals
    ///   2*cos((6a-1)*d*pi/p) - 2*cos((6a+1)*d*pi/p),
    /// which is assembled exactly from half-root powers.
    pub fn four_sine_product(p: u32, d: u32, a: u32) -> CycNum {
        let d = d as i64;
        let a = a as i64;
        &Self::two_cos(p, (6 * a - 1) * d) - &Self::two_cos(p, (6 * a + 1) * d)
    }

    // ------------------------------------------------------------------
    // Literals
    // ------------------------------------------------------------------

    /// Parse a human-oriented literal over `z` = zeta_p.
    ///
    /// Grammar (whitespace ignored):
    /// - an optional leading sign, then terms joined by `+`/`-`;
    /// - a term is `c`, `c*z^k`, `z^k`, `c*z`, or `z`, with `c` an integer
    ///   or rational `n/d`;
    /// - the whole expression may be a negated group `-(...)`, matching how
    ///   coefficient tables are commonly typeset.
    pub fn parse(p: u32, text: &str) -> Result<CycNum> {
        let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        // Peel one outer "-(...)" / "(...)" if it spans the whole literal.
        if let Some(body) = strip_group(&s, "-(") {
            return Ok(-&Self::parse(p, body)?);
        }
        if let Some(body) = strip_group(&s, "(") {
            return Self::parse(p, body);
        }
        // Scalar multiple of a group: `13*(...)`, `-13*(...)`, `2/3*(...)`.
        if let Some((scalar, body)) = split_scaled_group(&s) {
            return Ok(Self::parse(p, body)?.scale(&scalar));
        }
        let mut out = CycNum::zero(p);
        let bytes = s.as_bytes();
        let mut i = 0;
        if bytes.is_empty() {
            return Err(Error::Parse("empty cyclotomic literal".into()));
        }
        while i < bytes.len() {
            // Sign.
            let mut sign = 1i64;
            while i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
                if bytes[i] == b'-' {
                    sign = -sign;
                }
                i += 1;
            }
            if i >= bytes.len() {
                return Err(Error::Parse(format!("dangling sign in `{text}`")));
            }
            // Coefficient (optional).
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'/') {
                i += 1;
            }
            let coeff = if start == i {
                Rat::one()
            } else {
                parse_rat(&s[start..i])?
            };
            let coeff = if sign < 0 { -coeff } else { coeff };
            // Optional '*'.
            if i < bytes.len() && bytes[i] == b'*' {
                i += 1;
            }
            // Optional z power.
            if i < bytes.len() && (bytes[i] == b'z' || bytes[i] == b'Z') {
                i += 1;
                let mut e: i64 = 1;
                if i < bytes.len() && bytes[i] == b'^' {
                    i += 1;
                    let est = i;
                    if i < bytes.len() && bytes[i] == b'-' {
                        i += 1;
                    }
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    e = s[est..i]
                        .parse::<i64>()
                        .map_err(|_| Error::Parse(format!("bad exponent in `{text}`")))?;
                }
                out = &out + &CycNum::zeta_pow(p, e).scale(&coeff);
            } else {
                out = &out + &CycNum::from_rat(p, coeff);
            }
        }
        Ok(out)
    }
}

/// If `s` starts with `open` and its matching ')' is the final character,
/// return the interior.
fn strip_group<'a>(s: &'a str, open: &str) -> Option<&'a str> {
    let rest = s.strip_prefix(open)?;
    let mut depth = 1usize;
    for (i, c) in rest.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth == 0 {
                    return if i == rest.len() - 1 { Some(&rest[..i]) } else { None };
                }
            }
            _ => {}
        }
    }
    None
}

/// If `s` has the shape `c*(...)` with the matching `)` final, where `c` is a
/// (possibly signed) rational literal, return `(c, interior)`.
fn split_scaled_group(s: &str) -> Option<(Rat, &str)> {
    let bytes = s.as_bytes();
    let mut i = 0;
    if !bytes.is_empty() && (bytes[0] == b'-' || bytes[0] == b'+') {
        i += 1;
    }
    let start = i;
    while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'/') {
        i += 1;
    }
    if i == start || i >= bytes.len() || bytes[i] != b'*' {
        return None;
    }
    let scalar = parse_rat(&s[start..i]).ok()?;
    let scalar = if bytes[0] == b'-' { -scalar } else { scalar };
    let body = strip_group(&s[i + 1..], "(")?;
    Some((scalar, body))
}

fn parse_rat(s: &str) -> Result<Rat> {
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.parse().map_err(|_| Error::Parse(format!("bad numerator `{s}`")))?;
        let d: BigInt = d.parse().map_err(|_| Error::Parse(format!("bad denominator `{s}`")))?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in `{s}`")));
        }
        Ok(Rat::new(n, d))
    } else {
        let n: BigInt = s.parse().map_err(|_| Error::Parse(format!("bad integer `{s}`")))?;
        Ok(Rat::from_integer(n))
    }
}

fn rat_to_f64(r: &Rat) -> f64 {
    // Good enough for oracle comparisons at the magnitudes we test.
    let n = r.numer().to_string().parse::<f64>().unwrap_or(f64::NAN);
    let d = r.denom().to_string().parse::<f64>().unwrap_or(f64::NAN);
    n / d
}

fn is_odd_prime(p: u32) -> bool {
    if p < 3 || p % 2 == 0 {
        return false;
    }
    let mut d = 3u32;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

// ============================================================================
// Ring operators (by reference; clones only where required)
// ============================================================================

impl<'b> Add<&'b CycNum> for &CycNum {
    type Output = CycNum;
    fn add(self, rhs: &'b CycNum) -> CycNum {
        self.assert_same_prime(rhs);
        CycNum {
            p: self.p,
            coords: self
                .coords
                .iter()
                .zip(rhs.coords.iter())
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl<'b> Sub<&'b CycNum> for &CycNum {
    type Output = CycNum;
    fn sub(self, rhs: &'b CycNum) -> CycNum {
        self.assert_same_prime(rhs);
        CycNum {
            p: self.p,
            coords: self
                .coords
                .iter()
                .zip(rhs.coords.iter())
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Neg for &CycNum {
    type Output = CycNum;
    fn neg(self) -> CycNum {
        CycNum { p: self.p, coords: self.coords.iter().map(|a| -a).collect() }
    }
}

impl<'b> Mul<&'b CycNum> for &CycNum {
    type Output = CycNum;
    fn mul(self, rhs: &'b CycNum) -> CycNum {
        self.assert_same_prime(rhs);
        // Fast paths: zero and rational factors avoid the (p-1)^2 product.
        if self.is_zero() || rhs.is_zero() {
            return CycNum::zero(self.p);
        }
        if let Some(r) = self.as_rational() {
            return rhs.scale(r);
        }
        if let Some(r) = rhs.as_rational() {
            return self.scale(r);
        }
        let p = self.p as usize;
        let mut acc = vec![Rat::zero(); p];
        for (i, a) in self.coords.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coords.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let k = (i + j) % p;
                acc[k] += a * b;
            }
        }
        CycNum::reduce_top(self.p, acc)
    }
}

// ============================================================================
// Display
// ============================================================================

impl fmt::Display for CycNum {
    /// Renders as a polynomial in `z` = zeta_p with descending powers,
    /// e.g. `4*z^9+z^8+2*z^7+4`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for k in (0..self.coords.len()).rev() {
            let c = &self.coords[k];
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
                first = false;
            } else if neg {
                write!(f, "-")?;
            } else {
                write!(f, "+")?;
            }
            let unit_mag = mag.is_one();
            if k == 0 {
                write!(f, "{mag}")?;
            } else {
                if !unit_mag {
                    write!(f, "{mag}*")?;
                }
                if k == 1 {
                    write!(f, "z")?;
                } else {
                    write!(f, "z^{k}")?;
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for CycNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CycNum(p={}, {})", self.p, self)
    }
}

// ============================================================================
// Polynomial helpers over Q (used only by inversion)
// ============================================================================

fn poly_degree(a: &[Rat]) -> Option<usize> {
    a.iter().rposition(|c| !c.is_zero())
}

fn poly_trim(mut a: Vec<Rat>) -> Vec<Rat> {
    while a.last().map(|c| c.is_zero()).unwrap_or(false) {
        a.pop();
    }
    a
}

/// Polynomial division with remainder: a = q*b + r.
fn poly_divmod(a: &[Rat], b: &[Rat]) -> (Vec<Rat>, Vec<Rat>) {
    let db = poly_degree(b).expect("division by zero polynomial");
    let lead = b[db].clone();
    let mut r = a.to_vec();
    let mut q = vec![Rat::zero(); a.len().max(1)];
    while let Some(dr) = poly_degree(&r) {
        if dr < db {
            break;
        }
        let c = &r[dr] / &lead;
        q[dr - db] = c.clone();
        for i in 0..=db {
            let t = &b[i] * &c;
            r[dr - db + i] -= t;
        }
    }
    (poly_trim(q), poly_trim(r))
}

/// Extended Euclid: returns (g, s, t) with s*a + t*b = g = gcd(a, b).
fn poly_ext_gcd(a: &[Rat], b: &[Rat]) -> (Vec<Rat>, Vec<Rat>, Vec<Rat>) {
    let mut r0 = poly_trim(a.to_vec());
    let mut r1 = poly_trim(b.to_vec());
    let mut s0 = vec![Rat::one()];
    let mut s1 = vec![];
    let mut t0 = vec![];
    let mut t1 = vec![Rat::one()];
    while poly_degree(&r1).is_some() {
        let (q, r) = poly_divmod(&r0, &r1);
        let s = poly_sub(&s0, &poly_mul(&q, &s1));
        let t = poly_sub(&t0, &poly_mul(&q, &t1));
        r0 = r1;
        r1 = r;
        s0 = s1;
        s1 = s;
        t0 = t1;
        t1 = t;
    }
    (r0, s0, t0)
}

fn poly_mul(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![Rat::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    poly_trim(out)
}

fn poly_sub(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let n = a.len().max(b.len());
    let mut out = vec![Rat::zero(); n];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, y) in b.iter().enumerate() {
        out[i] -= y;
    }
    poly_trim(out)
}

// ============================================================================
// Tests
// ============================================================================

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: (f64, f64), b: (f64, f64)) -> bool {
        (a.0 - b.0).abs() < 1e-9 && (a.1 - b.1).abs() < 1e-9
    }

    #[test]
    fn zeta_powers_reduce_and_cycle() {
        let p = 7;
        // zeta^7 = 1, zeta^(-1) = zeta^6.
        assert_eq!(CycNum::zeta_pow(p, 7), CycNum::one(p));
        assert_eq!(CycNum::zeta_pow(p, -1), CycNum::zeta_pow(p, 6));
        // 1 + zeta + ... + zeta^6 = 0.
        let mut s = CycNum::zero(p);
        for e in 0..7 {
            s = &s + &CycNum::zeta_pow(p, e);
        }
        assert!(s.is_zero());
    }

    #[test]
    fn product_of_galois_conjugate_sums() {
        // (1+z^3+z^4)(1+z^2+z^5) = z^2+z^5 in Q(zeta_7); checked against the
        // complex embedding as an independent oracle.
        let p = 7;
        let a = CycNum::parse(p, "1+z^3+z^4").unwrap();
        let b = CycNum::parse(p, "1+z^2+z^5").unwrap();
        let prod = &a * &b;
        assert_eq!(prod, CycNum::parse(p, "z^2+z^5").unwrap());
        let (ar, ai) = a.to_complex();
        let (br, bi) = b.to_complex();
        let oracle = (ar * br - ai * bi, ar * bi + ai * br);
        assert!(close(prod.to_complex(), oracle));
    }

    #[test]
    fn second_galois_sum_product() {
        // (1+z^2+z^5)(1+z+z^6) = z+z^6 in Q(zeta_7).
        let p = 7;
        let a = CycNum::parse(p, "1+z^2+z^5").unwrap();
        let b = CycNum::parse(p, "1+z+z^6").unwrap();
        assert_eq!(&a * &b, CycNum::parse(p, "z+z^6").unwrap());
    }

    #[test]
    fn galois_maps_compose_and_fix_rationals() {
        let p = 11;
        let x = CycNum::parse(p, "3*z^9-2*z^4+z-5/2").unwrap();
        // sigma_a . sigma_b = sigma_{ab mod p}
        let y = x.galois(3).galois(4);
        assert_eq!(y, x.galois(12 % 11));
        // sigma_1 = id; rationals are fixed by every sigma_a.
        assert_eq!(x.galois(1), x);
        let r = CycNum::from_rat(p, ratio(7, 3));
        for a in 1..11 {
            assert_eq!(r.galois(a), r);
        }
    }

    #[test]
    fn galois_of_conjugate_sum() {
        // sigma_2(1 + z^3 + z^4) = 1 + z^6 + z over Q(zeta_7).
        let p = 7;
        let x = CycNum::parse(p, "1+z^3+z^4").unwrap();
        assert_eq!(x.galois(2), CycNum::parse(p, "1+z+z^6").unwrap());
    }

    #[test]
    fn inversion_round_trips() {
        let p = 11;
        let x = CycNum::parse(p, "2*z^7-z^3+4").unwrap();
        let xi = x.inv().unwrap();
        assert!((&x * &xi).is_one());
        // A unit with a known inverse: sine ratios are units of Z[zeta_p].
        let u = CycNum::sine_ratio(p, 3, 1).unwrap();
        assert!((&u * &u.inv().unwrap()).is_one());
        assert!(CycNum::zero(p).inv().is_err());
    }

    #[test]
    fn half_root_squares_to_zeta() {
        // zeta_14^2 = zeta_7 and zeta_14^7 = -1.
        let p = 7;
        let h = CycNum::half_root_power(p, 1);
        assert_eq!(&h * &h, CycNum::zeta(p));
        assert_eq!(CycNum::half_root_power(p, 7), -&CycNum::one(p));
        // Float oracle: zeta_14 = e^(i*pi/7).
        let t = std::f64::consts::PI / 7.0;
        assert!(close(h.to_complex(), (t.cos(), t.sin())));
    }

    #[test]
    fn sine_ratio_values() {
        // sin(2*pi/7)/sin(pi/7) = zeta_14^(-1)(1 + zeta_7), and the
        // reciprocal ratio is 1 + zeta^2 + zeta^5.
        let p = 7;
        let r21 = CycNum::sine_ratio(p, 2, 1).unwrap();
        let expect = &CycNum::half_root_power(p, -1) * &CycNum::parse(p, "1+z").unwrap();
        assert_eq!(r21, expect);
        let r12 = CycNum::sine_ratio(p, 1, 2).unwrap();
        assert_eq!(r12, CycNum::parse(p, "1+z^2+z^5").unwrap());
        // sine_ratio(7,1,4) * (z^4 + z^3) = 1 + z^3 + z^4 (both sides are the
        // negative real 1 - 2*cos(pi/7); the float embedding confirms).
        let r14 = CycNum::sine_ratio(p, 1, 4).unwrap();
        let lhs = &r14 * &CycNum::parse(p, "z^4+z^3").unwrap();
        assert_eq!(lhs, CycNum::parse(p, "1+z^3+z^4").unwrap());
        let c = std::f64::consts::PI / 7.0;
        assert!(close(lhs.to_complex(), (1.0 - 2.0 * c.cos(), 0.0)));
        // Float oracle across several (a, b, p).
        for &(pp, a, b) in &[(11u32, 3u32, 1u32), (11, 5, 2), (13, 4, 7), (19, 9, 2)] {
            let v = CycNum::sine_ratio(pp, a, b).unwrap();
            let t = std::f64::consts::PI / (pp as f64);
            let oracle = ((a as f64) * t).sin() / ((b as f64) * t).sin();
            assert!(close(v.to_complex(), (oracle, 0.0)), "p={pp} a={a} b={b}");
        }
    }

    #[test]
    fn four_sine_product_matches_bracket_and_floats() {
        // At d = 1 the product equals the coefficient bracket
        // z^(3a+(p+1)/2) + z^(-3a-(p+1)/2) - z^(3a+(p-1)/2) - z^(-3a-(p-1)/2).
        for &(p, a) in &[(11u32, 5u32), (7, 1), (7, 2), (7, 3), (13, 4)] {
            let fsp = CycNum::four_sine_product(p, 1, a);
            let hi = (3 * a as i64) + ((p as i64) + 1) / 2;
            let lo = (3 * a as i64) + ((p as i64) - 1) / 2;
            let bracket = &(&CycNum::zeta_pow(p, hi) + &CycNum::zeta_pow(p, -hi))
                - &(&CycNum::zeta_pow(p, lo) + &CycNum::zeta_pow(p, -lo));
            assert_eq!(fsp, bracket, "p={p} a={a}");
            assert!(fsp.is_integral());
        }
        // 4 sin(d pi/p) sin(6ad pi/p) against floats, plus the d -> p-d flip.
        for &(p, d, a) in &[(11u32, 3u32, 5u32), (7, 4, 1), (13, 2, 4), (17, 5, 3)] {
            let v = CycNum::four_sine_product(p, d, a);
            let t = std::f64::consts::PI / (p as f64);
            let oracle = 4.0 * ((d as f64) * t).sin() * ((6 * a * d) as f64 * t).sin();
            assert!(close(v.to_complex(), (oracle, 0.0)), "p={p} d={d} a={a}");
            let flipped = CycNum::four_sine_product(p, p - d, a);
            assert_eq!(flipped, -&v);
        }
        // The p = 11 residue witness a = 5 at d = 1 is z + z^10 - z^9 - z^2.
        assert_eq!(
            CycNum::four_sine_product(11, 1, 5),
            CycNum::parse(11, "z+z^10-z^9-z^2").unwrap()
        );
    }

    #[test]
    fn parse_and_display_round_trip() {
        let p = 11;
        for s in [
            "-(z^9+z^8+2*z^7+z^6+z^5+2*z^4+z^3+z^2+1)",
            "4*z^9+z^8+2*z^7+2*z^6+2*z^5+2*z^4+z^3+4*z^2+4",
            "z^9-z^8-z^7-z^4-z^3+z^2-2",
            "0",
            "-3/2",
        ] {
            let x = CycNum::parse(p, s).unwrap();
            let y = CycNum::parse(p, &x.to_string()).unwrap();
            assert_eq!(x, y, "round trip failed for {s}");
        }
        // Exponents >= p-1 reduce: z^10 = -(1 + z + ... + z^9) in Q(zeta_11).
        let hi = CycNum::parse(p, "z^10").unwrap();
        let folded = -&(0..=9).fold(CycNum::zero(p), |acc, e| &acc + &CycNum::zeta_pow(p, e));
        assert_eq!(hi, folded);
        // A rational scalar times a parenthesized group.
        let scaled = CycNum::parse(13, "-13*(z^10+z^9+z^7+z^6+z^4+z^3+2)").unwrap();
        let by_hand = CycNum::parse(13, "z^10+z^9+z^7+z^6+z^4+z^3+2")
            .unwrap()
            .scale(&rat(-13));
        assert_eq!(scaled, by_hand);
        assert_eq!(
            CycNum::parse(13, "2/3*(z-1)").unwrap(),
            (&CycNum::zeta(13) - &CycNum::one(13)).scale(&Rat::new(2.into(), 3.into()))
        );
    }

    #[test]
    fn integrality_flag() {
        let p = 5;
        assert!(CycNum::parse(p, "2*z^3-z+7").unwrap().is_integral());
        assert!(!CycNum::parse(p, "1/2").unwrap().is_integral());
        // Sine ratios are units, in particular algebraic integers.
        assert!(CycNum::sine_ratio(11, 4, 1).unwrap().is_integral());
        assert!(CycNum::sine_ratio(11, 1, 4).unwrap().is_integral());
    }
}
