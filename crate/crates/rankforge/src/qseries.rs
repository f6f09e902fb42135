//! Truncated q-expansions with cyclotomic coefficients and fractional
//! exponents.
//!
//! Every series in the crate is a finite window of a Laurent expansion
//!
//!   f(q) = sum_{n >= lead} c_n * q^(n / den),      c_n in Q(zeta_p),
//!
//! where `den` is a fixed global denominator (we use 24*p throughout, which
//! accommodates eta prefactors q^(1/24) and p-th roots q^(1/p)
//! simultaneously) and the window is trusted precisely for exponents
//! n/den <= trunc/den. Queries beyond the trusted bound are errors, never
//! silently zero: truncation is a hard contract, because the valence-formula
//! certificates downstream hinge on knowing exactly how many coefficients
//! were verified.
//!
//! Storage is stride-aware: most series here live on sparse arithmetic
//! progressions (pure powers of q^p, or q^(1/24) times integer powers), so
//! coefficients are kept as a dense vector along `lead + stride*k` only.
//! Arithmetic renormalizes strides on demand.

use std::fmt;

use num_integer::Integer;

use crate::cyclotomic::{CycNum, Rat};
use crate::error::{Error, Result};

/// A truncated Laurent series over Q(zeta_p) on the exponent lattice
/// (1/den) * Z.
///
/// Invariants:
/// - `coeffs[k]` is the coefficient of `q^((lead + stride*k)/den)`;
/// - every exponent `e` with `lead <= e <= trunc` that is *not* on the
///   stride progression has coefficient zero;
/// - coefficients are trusted for all exponents `<= trunc` and unknown
///   beyond; `trunc >= lead - 1` (an empty window denotes the zero series
///   trusted through `trunc`).
#[derive(Clone)]
pub struct QSeries {
    p: u32,
    den: i64,
    lead: i64,
    stride: i64,
    coeffs: Vec<CycNum>,
    trunc: i64,
}

impl QSeries {
    // ------------------------------------------------------------------
    // Constructors
    // ------------------------------------------------------------------

    /// The zero series over Q(zeta_p), trusted through exponent `trunc/den`.
    pub fn zero(p: u32, den: i64, trunc: i64) -> Self {
        assert!(den > 0, "exponent denominator must be positive");
        QSeries { p, den, lead: trunc + 1, stride: 1, coeffs: Vec::new(), trunc }
    }

    /// The constant series 1 + O(q^((trunc+1)/den)).
    pub fn one(p: u32, den: i64, trunc: i64) -> Self {
        Self::monomial(p, den, CycNum::one(p), 0, trunc)
    }

    /// The single term `c * q^(e/den)`, trusted through `trunc/den`.
    pub fn monomial(p: u32, den: i64, c: CycNum, e: i64, trunc: i64) -> Self {
        assert!(den > 0, "exponent denominator must be positive");
        assert_eq!(c.prime(), p, "coefficient prime mismatch");
        if c.is_zero() || e > trunc {
            return Self::zero(p, den, trunc);
        }
        QSeries { p, den, lead: e, stride: 1, coeffs: vec![c], trunc }
    }

    /// Build from a closure giving the coefficient of `q^((lead+stride*k)/den)`.
    pub fn from_fn<F>(p: u32, den: i64, lead: i64, stride: i64, trunc: i64, mut f: F) -> Self
    where
        F: FnMut(usize) -> CycNum,
    {
        assert!(den > 0 && stride > 0);
        if lead > trunc {
            return Self::zero(p, den, trunc);
        }
        let n = ((trunc - lead) / stride + 1) as usize;
        let coeffs = (0..n).map(&mut f).collect();
        QSeries { p, den, lead, stride, coeffs, trunc }.normalized()
    }

    /// Strip leading/trailing zero coefficients and degenerate strides.
    fn normalized(mut self) -> Self {
        // Drop leading zeros (adjusting `lead`).
        let nz = self.coeffs.iter().position(|c| !c.is_zero());
        match nz {
            None => return Self::zero(self.p, self.den, self.trunc),
            Some(k) => {
                if k > 0 {
                    self.lead += self.stride * k as i64;
                    self.coeffs.drain(..k);
                }
            }
        }
        // Drop trailing zeros (window stays trusted through `trunc`).
        if let Some(last) = self.coeffs.iter().rposition(|c| !c.is_zero()) {
            self.coeffs.truncate(last + 1);
        }
        // Tighten the stride if all nonzero offsets share a larger gcd.
        if self.stride >= 1 && self.coeffs.len() > 1 {
            let mut g: i64 = 0;
            for (k, c) in self.coeffs.iter().enumerate() {
                if !c.is_zero() && k > 0 {
                    g = g.gcd(&(k as i64));
                    if g == 1 {
                        break;
                    }
                }
            }
            if g > 1 {
                let n = (self.coeffs.len() - 1) / g as usize + 1;
                let mut tight = Vec::with_capacity(n);
                for k in 0..n {
                    tight.push(std::mem::replace(
                        &mut self.coeffs[k * g as usize],
                        CycNum::zero(self.p),
                    ));
                }
                self.coeffs = tight;
                self.stride *= g;
            }
        }
        self
    }

    // ------------------------------------------------------------------
    // Accessors
    // ------------------------------------------------------------------

    /// Prime p of the coefficient field Q(zeta_p).
    pub fn prime(&self) -> u32 {
        self.p
    }

    /// Global exponent denominator: exponents live on (1/den) * Z.
    pub fn den(&self) -> i64 {
        self.den
    }

    /// Last trusted exponent numerator (inclusive).
    pub fn trunc(&self) -> i64 {
        self.trunc
    }

    /// True iff every trusted coefficient is zero.
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Exponent numerator of the lowest nonzero term, if any.
    pub fn leading_exponent(&self) -> Option<i64> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.lead)
        }
    }

    /// The q-order as an exact rational lead/den, if the series is nonzero.
    pub fn order(&self) -> Option<Rat> {
        self.leading_exponent().map(|e| Rat::new(e.into(), self.den.into()))
    }

    /// Coefficient of q^(e/den). Errors if `e` exceeds the trusted window.
    pub fn coeff(&self, e: i64) -> Result<CycNum> {
        if e > self.trunc {
            return Err(Error::TruncationExceeded { requested: e, trunc: self.trunc, den: self.den });
        }
        if self.coeffs.is_empty() || e < self.lead {
            return Ok(CycNum::zero(self.p));
        }
        let off = e - self.lead;
        if off % self.stride != 0 {
            return Ok(CycNum::zero(self.p));
        }
        let k = (off / self.stride) as usize;
        Ok(self.coeffs.get(k).cloned().unwrap_or_else(|| CycNum::zero(self.p)))
    }

    /// All nonzero trusted terms as (exponent numerator, coefficient) pairs.
    pub fn terms(&self) -> Vec<(i64, &CycNum)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| (self.lead + self.stride * k as i64, c))
            .collect()
    }

    fn assert_compatible(&self, other: &QSeries) {
        assert_eq!(self.p, other.p, "prime mismatch between q-series");
        assert_eq!(self.den, other.den, "exponent denominator mismatch");
    }

    // ------------------------------------------------------------------
    // Ring operations
    // ------------------------------------------------------------------

    /// Sum; trusted through the smaller of the two windows.
    pub fn add(&self, other: &QSeries) -> QSeries {
        self.assert_compatible(other);
        let trunc = self.trunc.min(other.trunc);
        if self.is_zero() {
            return other.truncated(trunc);
        }
        if other.is_zero() {
            return self.truncated(trunc);
        }
        let stride = gcd3(self.stride, other.stride, (self.lead - other.lead).abs());
        let lead = self.lead.min(other.lead);
        QSeries::from_fn(self.p, self.den, lead, stride, trunc, |k| {
            let e = lead + stride * k as i64;
            let a = self.coeff_unchecked(e);
            let b = other.coeff_unchecked(e);
            &a + &b
        })
    }

    /// Difference; trusted through the smaller of the two windows.
    pub fn sub(&self, other: &QSeries) -> QSeries {
        self.add(&other.neg())
    }

    /// Negation.
    pub fn neg(&self) -> QSeries {
        let mut out = self.clone();
        for c in out.coeffs.iter_mut() {
            *c = -&*c;
        }
        out
    }

    /// Coefficient lookup that treats everything outside the window as 0;
    /// only for internal use where the caller has already bounded `e`.
    fn coeff_unchecked(&self, e: i64) -> CycNum {
        if self.coeffs.is_empty() || e < self.lead {
            return CycNum::zero(self.p);
        }
        let off = e - self.lead;
        if off % self.stride != 0 {
            return CycNum::zero(self.p);
        }
        match self.coeffs.get((off / self.stride) as usize) {
            Some(c) => c.clone(),
            None => CycNum::zero(self.p),
        }
    }

    /// Scale by a cyclotomic constant.
    pub fn scale(&self, c: &CycNum) -> QSeries {
        assert_eq!(c.prime(), self.p, "prime mismatch in scale");
        if c.is_zero() {
            return QSeries::zero(self.p, self.den, self.trunc);
        }
        let mut out = self.clone();
        for x in out.coeffs.iter_mut() {
            *x = &*x * c;
        }
        out
    }

    /// Scale by a rational constant.
    pub fn scale_rat(&self, r: &Rat) -> QSeries {
        self.scale(&CycNum::from_rat(self.p, r.clone()))
    }

    /// Multiply by the monomial q^(e/den) (exact shift; window shifts too).
    pub fn shift(&self, e: i64) -> QSeries {
        let mut out = self.clone();
        out.lead += e;
        out.trunc += e;
        out
    }

    /// Product. The result is trusted through
    /// min(trunc_a + lead_b, trunc_b + lead_a): each factor's truncation
    /// error enters multiplied by the other factor's leading term.
    pub fn mul(&self, other: &QSeries) -> QSeries {
        self.assert_compatible(other);
        // Zero windows: order(0) is +infinity, so the product stays trusted
        // through the zero factor's own window shifted by the other's lead
        // — but taking min with the other's trusted bound keeps it honest
        // when both are short.
        if self.is_zero() || other.is_zero() {
            let trunc = if self.is_zero() && other.is_zero() {
                self.trunc.max(other.trunc)
            } else if self.is_zero() {
                self.trunc + other.leading_exponent().unwrap()
            } else {
                other.trunc + self.leading_exponent().unwrap()
            };
            return QSeries::zero(self.p, self.den, trunc);
        }
        let (la, lb) = (self.lead, other.lead);
        let trunc = (self.trunc + lb).min(other.trunc + la);
        let lead = la + lb;
        if lead > trunc {
            return QSeries::zero(self.p, self.den, trunc);
        }
        let stride = self.stride.gcd(&other.stride);
        let n = ((trunc - lead) / stride + 1) as usize;
        let mut acc = vec![CycNum::zero(self.p); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let ea = la + self.stride * i as i64;
            if ea + lb > trunc {
                break;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let e = ea + lb + other.stride * j as i64;
                if e > trunc {
                    break;
                }
                let k = ((e - lead) / stride) as usize;
                acc[k] = &acc[k] + &(a * b);
            }
        }
        QSeries { p: self.p, den: self.den, lead, stride, coeffs: acc, trunc }.normalized()
    }

    /// Multiplicative inverse of a series with invertible leading term.
    ///
    /// If f = c*q^(L/den)*(1 + g) with ord(g) >= s/den, the inverse window
    /// is trusted through `trunc - 2L` in numerator units (standard loss:
    /// the unknown tail of f enters the reciprocal once through 1/f ~
    /// q^(-L)).
    pub fn inv(&self) -> Result<QSeries> {
        let lead = self
            .leading_exponent()
            .ok_or_else(|| Error::NotInvertible("zero q-series".into()))?;
        let c0 = self.coeffs[0].clone();
        let c0i = c0.inv().map_err(|_| {
            Error::NotInvertible("leading q-series coefficient is not a unit".into())
        })?;
        // Normalize to h = 1 + sum_{k>=1} h_k x^k along the stride lattice.
        let stride = self.stride;
        let trunc_out = self.trunc - 2 * lead;
        // Output exponents run from -lead through trunc_out, i.e. the
        // recurrence needs (trunc - lead)/stride steps past the constant.
        let m = ((self.trunc - lead).max(0) / stride) as usize;
        // Inverse coefficients g_k along the same lattice: g_0 = 1,
        // g_k = -sum_{j=1..k} h_j g_{k-j}.
        let mut g: Vec<CycNum> = Vec::with_capacity(m + 1);
        g.push(CycNum::one(self.p));
        for k in 1..=m {
            let mut s = CycNum::zero(self.p);
            for j in 1..=k {
                let hj = match self.coeffs.get(j) {
                    Some(c) if !c.is_zero() => &c0i * c,
                    _ => continue,
                };
                s = &s + &(&hj * &g[k - j]);
            }
            g.push(-&s);
        }
        let coeffs: Vec<CycNum> = g.into_iter().map(|x| &x * &c0i).collect();
        Ok(QSeries {
            p: self.p,
            den: self.den,
            lead: -lead,
            stride,
            coeffs,
            trunc: trunc_out,
        }
        .normalized())
    }

    /// Integer power (negative allowed when invertible).
    pub fn pow(&self, e: i32) -> Result<QSeries> {
        if e == 0 {
            // Trust window of 1 is the same as for a product chain of
            // length 0 starting at this series' own window.
            return Ok(QSeries::one(self.p, self.den, self.trunc));
        }
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut out = base.clone();
        for _ in 1..e.unsigned_abs() {
            out = out.mul(&base);
        }
        Ok(out)
    }

    /// Refine the exponent lattice by a factor r: the same series viewed on
    /// (1/(r*den)) * Z. Numerators scale by r; the trusted window extends to
    /// just below the next original lattice point, since nothing lives in
    /// between.
    pub fn reden(&self, r: i64) -> QSeries {
        assert!(r >= 1);
        QSeries {
            p: self.p,
            den: self.den * r,
            lead: self.lead * r,
            stride: self.stride * r,
            coeffs: self.coeffs.clone(),
            trunc: (self.trunc + 1) * r - 1,
        }
    }

    /// Substitute q -> q^r for integer r >= 1 (exponents multiply by r).
    pub fn substitute_power_up(&self, r: i64) -> QSeries {
        assert!(r >= 1);
        QSeries {
            p: self.p,
            den: self.den,
            lead: self.lead * r,
            stride: self.stride * r,
            coeffs: self.coeffs.clone(),
            // The tail we knew nothing about starts at (trunc+1)*r, so the
            // image is trusted through (trunc+1)*r - 1.
            trunc: (self.trunc + 1) * r - 1,
        }
    }

    /// Substitute q -> q^(1/r): every exponent must be divisible by r.
    pub fn substitute_power_down(&self, r: i64) -> Result<QSeries> {
        assert!(r >= 1);
        for (e, _) in self.terms() {
            if e % r != 0 {
                return Err(Error::OffLattice(format!(
                    "exponent {e}/{} is not a multiple of {r}/{}",
                    self.den, self.den
                )));
            }
        }
        if self.is_zero() {
            return Ok(QSeries::zero(self.p, self.den, self.trunc.div_euclid(r)));
        }
        let lead = self.lead / r;
        let stride = if self.stride % r == 0 { self.stride / r } else { 1 };
        let trunc = self.trunc.div_euclid(r);
        let mut out = QSeries::zero(self.p, self.den, trunc);
        out.lead = lead;
        out.stride = stride;
        out.coeffs = if self.stride % r == 0 {
            self.coeffs.clone()
        } else {
            let n = ((self.trunc - self.lead) / self.stride) as usize + 1;
            let mut dense = vec![CycNum::zero(self.p); (n * self.stride as usize) / r as usize + 1];
            for (e, c) in self.terms() {
                dense[((e - self.lead) / r) as usize] = c.clone();
            }
            dense
        };
        Ok(out.normalized())
    }

    /// Apply a coefficient-wise map (e.g. a Galois automorphism).
    pub fn map_coeffs<F>(&self, mut f: F) -> QSeries
    where
        F: FnMut(&CycNum) -> CycNum,
    {
        let mut out = self.clone();
        for c in out.coeffs.iter_mut() {
            *c = f(c);
        }
        out.normalized()
    }

    /// Restrict the trusted window to `trunc/den` (no-op if already shorter).
    pub fn truncated(&self, trunc: i64) -> QSeries {
        if trunc >= self.trunc {
            let mut out = self.clone();
            out.trunc = out.trunc.min(trunc);
            return out;
        }
        let mut out = self.clone();
        out.trunc = trunc;
        if out.is_zero() {
            out.lead = trunc + 1;
            return out;
        }
        if out.lead > trunc {
            return QSeries::zero(self.p, self.den, trunc);
        }
        let keep = ((trunc - out.lead) / out.stride + 1) as usize;
        out.coeffs.truncate(keep);
        out.normalized()
    }

    // ------------------------------------------------------------------
    // Sparse product helpers
    // ------------------------------------------------------------------

    /// Multiply in place by the sparse polynomial
    /// `1 + sum_i c_i q^(e_i/den)` (all e_i > 0), keeping the current
    /// window. Exact for polynomial factors; used by product formulas.
    pub fn mul_sparse(&self, terms: &[(i64, CycNum)]) -> QSeries {
        let mut extra = QSeries::zero(self.p, self.den, self.trunc);
        for (e, c) in terms {
            debug_assert!(*e > 0, "sparse factor terms must have positive exponent");
            extra = extra.add(&self.shift(*e).truncated(self.trunc).scale(c));
        }
        self.truncated(self.trunc).add(&extra)
    }

    /// Divide in place by the sparse polynomial
    /// `1 + sum_i c_i q^(e_i/den)` (all e_i > 0), via the linear recurrence
    /// a_n = b_n - sum_i c_i a_{n - e_i}. Keeps the current window exactly:
    /// dividing by a unit polynomial loses no precision.
    pub fn div_sparse(&self, terms: &[(i64, CycNum)]) -> QSeries {
        if self.is_zero() {
            return self.clone();
        }
        let lead = self.lead;
        let n = (self.trunc - lead + 1) as usize;
        let mut out: Vec<CycNum> = Vec::with_capacity(n);
        for idx in 0..n {
            let e = lead + idx as i64;
            let mut v = self.coeff_unchecked(e);
            for (de, c) in terms {
                debug_assert!(*de > 0);
                let j = idx as i64 - de;
                if j >= 0 {
                    let prev = &out[j as usize];
                    if !prev.is_zero() {
                        v = &v - &(c * prev);
                    }
                }
            }
            out.push(v);
        }
        QSeries { p: self.p, den: self.den, lead, stride: 1, coeffs: out, trunc: self.trunc }
            .normalized()
    }
}

// ============================================================================
// Display
// ============================================================================

impl fmt::Display for QSeries {
    /// Human-readable sum of terms `(<coeff>)*q^(e/den)` in ascending order,
    /// with integer exponents shown plainly.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "O(q^({}/{}))", self.trunc + 1, self.den);
        }
        let mut first = true;
        for (e, c) in self.terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let g = e.gcd(&self.den);
            let (num, den) = (e / g, self.den / g);
            if den == 1 {
                write!(f, "({c})*q^{num}")?;
            } else {
                write!(f, "({c})*q^({num}/{den})")?;
            }
        }
        write!(f, " + O(q^({}/{}))", self.trunc + 1, self.den)
    }
}

fn gcd3(a: i64, b: i64, c: i64) -> i64 {
    let g = a.gcd(&b);
    if c == 0 {
        g
    } else {
        g.gcd(&c)
    }
}

// ============================================================================
// Classical products
// ============================================================================

/// (q^a; q^b)_infinity = prod_{j >= 0} (1 - q^(a + j*b)), as exponent
/// numerators over `den` (so `a`, `b` are already scaled by the caller).
///
/// Built by repeated sparse multiplication; factors beyond the window are
/// identically 1 there, so the window stays exact.
pub fn pochhammer_inf(p: u32, den: i64, a: i64, b: i64, trunc: i64) -> QSeries {
    assert!(a > 0 && b > 0, "Pochhammer exponents must be positive");
    let mut out = QSeries::one(p, den, trunc);
    let mut e = a;
    while e <= trunc {
        out = out.mul_sparse(&[(e, -&CycNum::one(p))]);
        e += b;
    }
    out
}

/// Euler's product (q^s; q^s)_infinity via the pentagonal number theorem:
/// sum_{k in Z} (-1)^k q^(s*k(3k-1)/2). Much sparser than the raw product.
pub fn euler_product(p: u32, den: i64, s: i64, trunc: i64) -> QSeries {
    assert!(s > 0);
    let mut terms: Vec<(i64, CycNum)> = vec![(0, CycNum::one(p))];
    let mut k: i64 = 1;
    loop {
        let e1 = s * k * (3 * k - 1) / 2;
        let e2 = s * k * (3 * k + 1) / 2;
        if e1 > trunc && e2 > trunc {
            break;
        }
        let sign = if k % 2 == 0 { CycNum::one(p) } else { -&CycNum::one(p) };
        if e1 <= trunc {
            terms.push((e1, sign.clone()));
        }
        if e2 <= trunc {
            terms.push((e2, sign));
        }
        k += 1;
    }
    terms.sort_by_key(|(e, _)| *e);
    let mut out = QSeries::zero(p, den, trunc);
    for (e, c) in terms {
        out = out.add(&QSeries::monomial(p, den, c, e, trunc));
    }
    out
}

// ============================================================================
// Tests
// ============================================================================
