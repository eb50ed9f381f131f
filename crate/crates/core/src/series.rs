//! Truncated Laurent series over `F_{p^m}` with explicit precision.
//!
//! A [`CharSeries`] stores the coefficients of `X^v, X^{v+1}, ...` and a bound
//! `N` meaning "known modulo `X^N`". Coefficients between the last stored one
//! and `N` are zero. Series are normalized: the first stored coefficient is
//! nonzero, and the zero series known mod `X^N` is stored with `v = N`.
//! `N = EXACT` marks a series that is exactly a Laurent polynomial.
//!
//! Precision rules:
//! * sum: `min(N1, N2)`
//! * product: `min(N1 + v2, N2 + v1)`
//! * inverse: `N - 2v`
//! * `phi`: `pN`, `psi`: `floor(N / p)`
//! * `gamma_subst`, multiplication by `(1+X)^w`, `padic_pow`: `N`

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::ffield::{FiniteField, Fq, NO_LOG};
use crate::padic::{omega_char, PadicScalar};

/// Precision of a series that is known exactly.
pub const EXACT: i64 = i64::MAX;

fn padd(a: i64, b: i64) -> i64 {
    if a == EXACT || b == EXACT {
        EXACT
    } else {
        a + b
    }
}

fn pmul(a: i64, k: i64) -> i64 {
    if a == EXACT {
        EXACT
    } else {
        a * k
    }
}

/// Coefficient action of `phi` and `psi`.
///
/// `Semilinear` applies the Frobenius of `F_{p^m}` to coefficients, as the
/// absolute Frobenius of `F_{p^m}((X))` does. `Linear` is the `F_{p^m}`-linear
/// extension of the operators on `F_p((X))`, which is what acts on
/// `k tensor D` when the module is defined over `F_p((X))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Flavor {
    Semilinear,
    Linear,
}

#[derive(Clone, PartialEq, Eq)]
pub struct CharSeries {
    field: FiniteField,
    v: i64,
    coeffs: Vec<Fq>,
    prec: i64,
}

impl CharSeries {
    /// Series `sum coeffs[i] X^{v+i}` known mod `X^prec`; coefficients at or
    /// beyond `prec` are dropped.
    pub fn new(field: &FiniteField, v: i64, coeffs: Vec<Fq>, prec: i64) -> Self {
        let mut s = CharSeries {
            field: field.clone(),
            v,
            coeffs,
            prec,
        };
        s.normalize();
        s
    }

    fn normalize(&mut self) {
        if self.prec != EXACT {
            let keep = (self.prec - self.v).max(0) as usize;
            self.coeffs.truncate(keep);
        }
        match self.coeffs.iter().position(|c| !c.is_zero()) {
            None => {
                self.coeffs.clear();
                self.v = self.prec;
            }
            Some(first) => {
                if first > 0 {
                    self.coeffs.drain(..first);
                    self.v += first as i64;
                }
                while self.coeffs.last().is_some_and(|c| c.is_zero()) {
                    self.coeffs.pop();
                }
            }
        }
    }

    pub fn zero(field: &FiniteField, prec: i64) -> Self {
        Self::new(field, prec, Vec::new(), prec)
    }

    pub fn exact_zero(field: &FiniteField) -> Self {
        Self::zero(field, EXACT)
    }

    /// The exact monomial `c X^k`.
    pub fn monomial(field: &FiniteField, c: Fq, k: i64) -> Self {
        Self::new(field, k, vec![c], EXACT)
    }

    pub fn constant(field: &FiniteField, c: Fq) -> Self {
        Self::monomial(field, c, 0)
    }

    pub fn one(field: &FiniteField) -> Self {
        Self::constant(field, Fq::ONE)
    }

    pub fn x(field: &FiniteField) -> Self {
        Self::monomial(field, Fq::ONE, 1)
    }

    /// The exact polynomial `sum coeffs[i] X^i`.
    pub fn poly(field: &FiniteField, coeffs: &[Fq]) -> Self {
        Self::new(field, 0, coeffs.to_vec(), EXACT)
    }

    /// The exact polynomial with small integer coefficients.
    pub fn poly_int(field: &FiniteField, coeffs: &[i64]) -> Self {
        Self::poly(field, &coeffs.iter().map(|&c| field.from_int(c)).collect::<Vec<_>>())
    }

    /// Uniformly random coefficients in degrees `v..prec`.
    pub fn random<R: Rng + ?Sized>(field: &FiniteField, v: i64, prec: i64, rng: &mut R) -> Self {
        assert!(prec != EXACT, "random series need a finite precision");
        let len = (prec - v).max(0) as usize;
        let coeffs = (0..len).map(|_| field.random(rng)).collect();
        Self::new(field, v, coeffs, prec)
    }

    pub fn field(&self) -> &FiniteField {
        &self.field
    }

    pub fn p(&self) -> u32 {
        self.field.p()
    }

    /// The series is known modulo `X^prec`.
    pub fn prec(&self) -> i64 {
        self.prec
    }

    pub fn is_exact(&self) -> bool {
        self.prec == EXACT
    }

    /// Zero to the known precision.
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Valuation of the known part, `None` if zero to the known precision.
    pub fn valuation(&self) -> Option<i64> {
        (!self.is_zero()).then_some(self.v)
    }

    /// Lower bound for the valuation: the valuation, or the precision for zero.
    pub fn order(&self) -> i64 {
        self.v
    }

    /// Exponent of the first stored coefficient and the stored coefficients.
    pub fn stored(&self) -> (i64, &[Fq]) {
        (self.v, &self.coeffs)
    }

    /// End (exclusive) of the stored range.
    fn end(&self) -> i64 {
        self.v + self.coeffs.len() as i64
    }

    /// Coefficient of `X^i`, which must be below the precision.
    pub fn coeff(&self, i: i64) -> Result<Fq> {
        if i >= self.prec {
            return Err(Error::InsufficientPrecision {
                needed: i,
                precision: self.prec,
            });
        }
        Ok(self.at(i))
    }

    /// Stored coefficient of `X^i`, zero outside the stored range.
    #[inline]
    fn at(&self, i: i64) -> Fq {
        if i < self.v || i >= self.end() {
            Fq::ZERO
        } else {
            self.coeffs[(i - self.v) as usize]
        }
    }

    pub fn constant_term(&self) -> Result<Fq> {
        self.coeff(0)
    }

    /// Nonzero terms `(exponent, coefficient)`.
    pub fn terms(&self) -> impl Iterator<Item = (i64, Fq)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(i, &c)| (self.v + i as i64, c))
    }

    /// True when the valuation (or the precision of a zero) is nonnegative.
    pub fn is_power_series(&self) -> bool {
        self.v >= 0
    }

    /// Rejects poles deeper than `bound`.
    pub fn check_pole(&self, bound: i64) -> Result<()> {
        match self.valuation() {
            Some(v) if v < -bound => Err(Error::PoleTooDeep { order: -v, bound }),
            _ => Ok(()),
        }
    }

    /// Forgets everything at and above `X^n`.
    pub fn truncate(&self, n: i64) -> Self {
        if n >= self.prec {
            return self.clone();
        }
        Self::new(&self.field, self.v, self.coeffs.clone(), n)
    }

    /// True when both series agree modulo the smaller precision.
    pub fn agrees_with(&self, other: &Self) -> bool {
        let n = self.prec.min(other.prec);
        let lo = self.v.min(other.v);
        let hi = self.end().max(other.end()).min(n);
        (lo..hi).all(|i| self.at(i) == other.at(i))
    }

    pub fn neg(&self) -> Self {
        let k = &self.field;
        Self::new(k, self.v, self.coeffs.iter().map(|&c| k.neg(c)).collect(), self.prec)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.field, other.field, "mixed fields");
        let k = &self.field;
        let prec = self.prec.min(other.prec);
        if self.is_zero() {
            return other.truncate(prec);
        }
        if other.is_zero() {
            return self.truncate(prec);
        }
        let lo = self.v.min(other.v);
        let hi = self.end().max(other.end()).min(prec);
        if hi <= lo {
            return Self::zero(k, prec);
        }
        let coeffs = (lo..hi).map(|i| k.add(self.at(i), other.at(i))).collect();
        Self::new(k, lo, coeffs, prec)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: Fq) -> Self {
        let k = &self.field;
        if c.is_zero() {
            return Self::zero(k, self.prec);
        }
        Self::new(k, self.v, self.coeffs.iter().map(|&a| k.mul(a, c)).collect(), self.prec)
    }

    /// Multiplication by `X^k`.
    pub fn shift(&self, k: i64) -> Self {
        if self.is_zero() {
            return Self::zero(&self.field, padd(self.prec, k));
        }
        Self::new(&self.field, self.v + k, self.coeffs.clone(), padd(self.prec, k))
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.field, other.field, "mixed fields");
        let k = &self.field;
        let prec = padd(self.prec, other.v).min(padd(other.prec, self.v));
        if self.is_zero() || other.is_zero() {
            return Self::zero(k, prec);
        }
        let v = self.v + other.v;
        let full = self.coeffs.len() + other.coeffs.len() - 1;
        let len = if prec == EXACT {
            full
        } else {
            full.min((prec - v).max(0) as usize)
        };
        Self::new(k, v, mul_raw(k, &self.coeffs, &other.coeffs, len), prec)
    }

    /// Multiplicative inverse. Exact inputs must be monomials.
    pub fn inv(&self) -> Result<Self> {
        let k = &self.field;
        if self.is_zero() {
            return Err(Error::NotInvertible);
        }
        let c0inv = k.inv(self.coeffs[0]).expect("leading coefficient is nonzero");
        if self.is_exact() {
            if self.coeffs.len() == 1 {
                return Ok(Self::monomial(k, c0inv, -self.v));
            }
            return Err(Error::UnboundedPrecision);
        }
        let len = (self.prec - self.v) as usize;
        let w = inv_raw(k, &self.coeffs, len);
        Ok(Self::new(k, -self.v, w, self.prec - 2 * self.v))
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(&other.inv()?))
    }

    /// `f^n` for an integer `n` (negative powers go through the inverse).
    pub fn pow_int(&self, n: i64) -> Result<Self> {
        if n < 0 {
            return self.inv()?.pow_int(-n);
        }
        let mut base = self.clone();
        let mut acc = Self::one(&self.field);
        let mut e = n as u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        Ok(acc)
    }

    /// Applies the field Frobenius (or its inverse) to every coefficient.
    pub fn frobenius_coeffs(&self, inverse: bool) -> Self {
        let k = &self.field;
        let coeffs = self
            .coeffs
            .iter()
            .map(|&c| if inverse { k.frobenius_inv(c) } else { k.frobenius(c) })
            .collect();
        Self::new(k, self.v, coeffs, self.prec)
    }

    /// `f(X^e)` for `e >= 1`, coefficients untouched.
    pub fn stretch(&self, e: u32) -> Self {
        let e64 = e as i64;
        if self.is_zero() {
            return Self::zero(&self.field, pmul(self.prec, e64));
        }
        let mut coeffs = vec![Fq::ZERO; (self.coeffs.len() - 1) * e as usize + 1];
        for (i, &c) in self.coeffs.iter().enumerate() {
            coeffs[i * e as usize] = c;
        }
        Self::new(&self.field, self.v * e64, coeffs, pmul(self.prec, e64))
    }

    /// `phi(f) = sum sigma(a_i) X^{pi}`.
    pub fn phi(&self) -> Self {
        self.phi_with(Flavor::Semilinear)
    }

    /// `sum a_i X^{pi}`.
    pub fn phi_linear(&self) -> Self {
        self.phi_with(Flavor::Linear)
    }

    pub fn phi_with(&self, flavor: Flavor) -> Self {
        let s = self.stretch(self.p());
        match flavor {
            Flavor::Semilinear => s.frobenius_coeffs(false),
            Flavor::Linear => s,
        }
    }

    /// The left inverse of [`CharSeries::phi`].
    pub fn psi(&self) -> Self {
        self.psi_with(Flavor::Semilinear)
    }

    /// The left inverse of [`CharSeries::phi_linear`].
    pub fn psi_linear(&self) -> Self {
        self.psi_with(Flavor::Linear)
    }

    /// `psi(sum a_i X^i)` has `X^k`-coefficient `sum_{t<p} (-1)^t tau(a_{pk+t})`
    /// with `tau` the inverse Frobenius (semilinear) or the identity (linear),
    /// because `psi(X^t) = (-1)^t` for `0 <= t <= p-1`.
    pub fn psi_with(&self, flavor: Flavor) -> Self {
        let k = &self.field;
        let p = self.p() as i64;
        let prec = if self.prec == EXACT {
            EXACT
        } else {
            self.prec.div_euclid(p)
        };
        if self.is_zero() {
            return Self::zero(k, prec);
        }
        let kmin = self.v.div_euclid(p);
        let kend = if prec == EXACT {
            (self.end() - 1).div_euclid(p) + 1
        } else {
            prec
        };
        let mut out = Vec::with_capacity((kend - kmin).max(0) as usize);
        for blk in kmin..kend {
            let mut acc = Fq::ZERO;
            for t in 0..p {
                let a = self.at(p * blk + t);
                if a.is_zero() {
                    continue;
                }
                let a = if t % 2 == 1 { k.neg(a) } else { a };
                acc = k.add(acc, a);
            }
            out.push(match flavor {
                Flavor::Semilinear => k.frobenius_inv(acc),
                Flavor::Linear => acc,
            });
        }
        Self::new(k, kmin, out, prec)
    }

    /// `f * (1+X)^w` for `w` in `Z_p`, computed as a product of
    /// `(1 + X^{p^i})^{w_i}` over the base-`p` digits of `w`.
    pub fn mul_one_plus_x_pow(&self, w: &PadicScalar) -> Result<Self> {
        if self.is_zero() {
            return Ok(self.clone());
        }
        if self.is_exact() {
            return Err(Error::UnboundedPrecision);
        }
        let p = self.p() as usize;
        let len = (self.prec - self.v) as usize;
        let digits = digits_for_length(w, p as u32, len)?;
        let k = &self.field;
        let mut buf = self.coeffs.clone();
        buf.resize(len, Fq::ZERO);
        let mut step = 1usize;
        for &d in &digits {
            for _ in 0..d {
                for idx in (step..len).rev() {
                    let src = buf[idx - step];
                    if !src.is_zero() {
                        buf[idx] = k.add(buf[idx], src);
                    }
                }
            }
            step = step.saturating_mul(p);
        }
        Ok(Self::new(k, self.v, buf, self.prec))
    }

    /// `f^s` for `f = 1 mod X` and `s` in `Z_p`, as the product of
    /// `phi^i(f)^{s_i} = f^{s_i p^i}` over the base-`p` digits of `s`.
    pub fn padic_pow(&self, s: &PadicScalar) -> Result<Self> {
        if self.is_zero() || self.v != 0 || self.coeffs[0] != Fq::ONE {
            return Err(Error::NotOneUnit);
        }
        if self.is_exact() {
            return Err(Error::UnboundedPrecision);
        }
        let n = self.prec;
        let digits = digits_for_length(s, self.p(), n as usize)?;
        let mut acc = Self::one(&self.field).truncate(n);
        let mut cur = self.clone();
        for (i, &d) in digits.iter().enumerate() {
            for _ in 0..d {
                acc = acc.mul(&cur);
            }
            if i + 1 < digits.len() {
                cur = cur.phi().truncate(n);
            }
        }
        Ok(acc)
    }

    /// `h(g)` for a series `g` of valuation exactly 1 and finite precision.
    ///
    /// Laurent `h = X^v u` maps to `g^v u(g)`; the result is known modulo
    /// `X^{min(N_h, N_g - 1 + v)}` (`N_h - v` terms of `u(g)` are needed).
    pub fn compose(&self, g: &Self) -> Result<Self> {
        let k = &self.field;
        if g.valuation() != Some(1) {
            return Err(Error::ParameterOutOfRange("substituted series must have valuation 1".into()));
        }
        if g.is_exact() && g.coeffs.len() == 1 && g.coeffs[0] == Fq::ONE {
            return Ok(self.clone());
        }
        if self.is_zero() {
            return Ok(self.clone());
        }
        let v = self.v;
        let prec = self.prec.min(padd(g.prec - 1, v));
        if prec == EXACT {
            return Err(Error::UnboundedPrecision);
        }
        let len = (prec - v).max(0) as usize;
        // g = X * gr with gr a unit known to len terms
        let gr = g.shift(-1).truncate(len as i64);
        let mut gfull = vec![Fq::ZERO; len];
        for i in 1..len {
            gfull[i] = gr.at(i as i64 - 1);
        }
        let u = compose_raw(k, &self.coeffs, &gfull, len);
        let u = Self::new(k, 0, u, len as i64);
        let grv = gr.pow_int(v)?.truncate(len as i64);
        Ok(grv.mul(&u).shift(v).truncate(prec))
    }

    /// `f((1+X)^a - 1)` for a unit `a`; the precision is unchanged.
    pub fn gamma_subst(&self, a: &PadicScalar) -> Result<Self> {
        match a.valuation() {
            Some(0) => {}
            Some(v) => return Err(Error::NotUnit(v)),
            None => return Err(Error::ZeroArgument),
        }
        if self.is_zero() {
            return Ok(self.clone());
        }
        if *a == PadicScalar::one(a.p()) {
            return Ok(self.clone());
        }
        if self.is_exact() {
            return Err(Error::UnboundedPrecision);
        }
        let g = one_plus_x_pow_minus_one(&self.field, a, self.prec - self.v + 1)?;
        self.compose(&g)
    }

    /// Text form `p m v N : c_v ... c_{N-1}` with each coefficient written as
    /// `m` base-`p` digits, most significant first. Exact series use `inf`
    /// for `N` and list coefficients up to the last nonzero one.
    pub fn to_text(&self) -> String {
        let k = &self.field;
        let n = if self.is_exact() {
            "inf".to_string()
        } else {
            self.prec.to_string()
        };
        let mut s = format!("{} {} {} {} :", k.p(), k.degree(), self.v, n);
        let hi = if self.is_exact() { self.end() } else { self.prec };
        for i in self.v..hi {
            s.push(' ');
            s.push_str(&k.to_digits(self.at(i)));
        }
        s
    }

    /// Parses [`CharSeries::to_text`] output over `field`.
    pub fn from_text(field: &FiniteField, text: &str) -> Result<Self> {
        let bad = |m: &str| Error::Parse(format!("{m} in series {text:?}"));
        let (head, body) = text.split_once(':').ok_or_else(|| bad("missing ':'"))?;
        let h: Vec<&str> = head.split_whitespace().collect();
        if h.len() != 4 {
            return Err(bad("expected `p m v N` header"));
        }
        let p: u32 = h[0].parse().map_err(|_| bad("bad p"))?;
        let m: u32 = h[1].parse().map_err(|_| bad("bad m"))?;
        if p != field.p() || m != field.degree() {
            return Err(Error::FieldMismatch);
        }
        let v: i64 = h[2].parse().map_err(|_| bad("bad v"))?;
        let prec = if h[3] == "inf" {
            EXACT
        } else {
            h[3].parse().map_err(|_| bad("bad N"))?
        };
        let coeffs = body
            .split_whitespace()
            .map(|t| field.from_digits(t))
            .collect::<Result<Vec<_>>>()?;
        if prec != EXACT && v + coeffs.len() as i64 > prec {
            return Err(bad("more coefficients than the precision allows"));
        }
        Ok(Self::new(field, v, coeffs, prec))
    }
}

/// `(1+X)^w` modulo `X^n`.
pub fn one_plus_x_pow(field: &FiniteField, w: &PadicScalar, n: i64) -> Result<CharSeries> {
    CharSeries::one(field).truncate(n).mul_one_plus_x_pow(w)
}

/// `(1+X)^a - 1` modulo `X^n`.
pub fn one_plus_x_pow_minus_one(field: &FiniteField, a: &PadicScalar, n: i64) -> Result<CharSeries> {
    Ok(one_plus_x_pow(field, a, n)?.sub(&CharSeries::one(field)))
}

/// `f_a = omega(a) X / ((1+X)^a - 1)` modulo `X^n`, an element of `1 + X k[[X]]`.
pub fn f_gamma(field: &FiniteField, a: &PadicScalar, n: i64) -> Result<CharSeries> {
    match a.valuation() {
        Some(0) => {}
        Some(v) => return Err(Error::NotUnit(v)),
        None => return Err(Error::ZeroArgument),
    }
    let g = one_plus_x_pow_minus_one(field, a, n + 1)?.shift(-1);
    let w = omega_char(a, field)?;
    Ok(g.inv()?.scale(w))
}

/// Solves `psi(u) = t` with `X^s | u`, block by block: the coefficients
/// `u_{pk}, ..., u_{pk+p-1}` determine the `X^k`-coefficient of `psi(u)`.
/// Free coefficients are drawn from `rng`; the last free one in each block is
/// solved for. The result is known modulo `X^{pK}` where `K` is the precision
/// of `t`.
pub fn psi_section<R: Rng + ?Sized>(
    t: &CharSeries,
    s: i64,
    flavor: Flavor,
    rng: &mut R,
) -> Result<CharSeries> {
    if t.is_exact() {
        return Err(Error::UnboundedPrecision);
    }
    let k = t.field();
    let p = t.p() as i64;
    let kmin = s.div_euclid(p);
    if t.order() < kmin {
        return Err(Error::NoSolutionAtPrecision);
    }
    let kend = t.prec();
    let mut buf = Vec::with_capacity(((kend - kmin).max(0) * p) as usize);
    for blk in kmin..kend {
        let target = t.at(blk);
        let base = p * blk;
        let first_free = s.max(base);
        if first_free >= base + p {
            if !target.is_zero() {
                return Err(Error::NoSolutionAtPrecision);
            }
            buf.extend(std::iter::repeat(Fq::ZERO).take(p as usize));
            continue;
        }
        // contribution of u_{pk+i} to the block sum is (-1)^i tau(u_{pk+i})
        let tau = |c: Fq| match flavor {
            Flavor::Semilinear => k.frobenius_inv(c),
            Flavor::Linear => c,
        };
        let untau = |c: Fq| match flavor {
            Flavor::Semilinear => k.frobenius(c),
            Flavor::Linear => c,
        };
        let last = base + p - 1;
        let mut residual = target;
        for i in base..last {
            let c = if i >= first_free { k.random(rng) } else { Fq::ZERO };
            buf.push(c);
            let contrib = tau(c);
            let signed = if (i - base) % 2 == 1 { k.neg(contrib) } else { contrib };
            residual = k.sub(residual, signed);
        }
        let sign_last = if (p - 1) % 2 == 1 { k.neg(Fq::ONE) } else { Fq::ONE };
        buf.push(untau(k.mul(residual, sign_last)));
    }
    Ok(CharSeries::new(k, p * kmin, buf, p * kend))
}

/// Base-`p` digits of `w` covering series of `len` terms: `(1+X)^{p^D} = 1`
/// modulo `X^len` once `p^D >= len`.
fn digits_for_length(w: &PadicScalar, p: u32, len: usize) -> Result<Vec<u32>> {
    let mut d = 0u32;
    let mut pw = 1usize;
    while pw < len {
        pw = pw.saturating_mul(p as usize);
        d += 1;
    }
    w.digits(d)
}

/// `a * b` truncated to `len` coefficients.
pub(crate) fn mul_raw(k: &FiniteField, a: &[Fq], b: &[Fq], len: usize) -> Vec<Fq> {
    let mut out = vec![Fq::ZERO; len];
    if a.is_empty() || b.is_empty() {
        return out;
    }
    let lb: Vec<u32> = b.iter().take(len).map(|&x| k.log(x)).collect();
    for (i, &ai) in a.iter().enumerate().take(len) {
        let la = k.log(ai);
        if la == NO_LOG {
            continue;
        }
        let lim = lb.len().min(len - i);
        let dst = &mut out[i..i + lim];
        for (o, &l) in dst.iter_mut().zip(&lb[..lim]) {
            if l != NO_LOG {
                *o = k.add(*o, k.exp_sum(la, l));
            }
        }
    }
    out
}

/// Inverse of a unit power series modulo `X^len`.
fn inv_raw(k: &FiniteField, u: &[Fq], len: usize) -> Vec<Fq> {
    let mut w = vec![Fq::ZERO; len];
    if len == 0 {
        return w;
    }
    let w0 = k.inv(u[0]).expect("unit");
    w[0] = w0;
    let neg_w0 = k.neg(w0);
    let lu: Vec<u32> = u.iter().take(len).map(|&x| k.log(x)).collect();
    for n in 1..len {
        let mut acc = Fq::ZERO;
        let top = n.min(lu.len() - 1);
        for i in 1..=top {
            let l = lu[i];
            let wl = k.log(w[n - i]);
            if l != NO_LOG && wl != NO_LOG {
                acc = k.add(acc, k.exp_sum(l, wl));
            }
        }
        w[n] = k.mul(acc, neg_w0);
    }
    w
}

/// `h(g)` modulo `X^len` for `g[0] = 0`, `g` given to at least `len` terms.
///
/// Splits `h = sum_{j<p} X^j H_j(X^p)`; since `g^p = sigma(g)(X^p)`,
/// `h(g) = sum_j g^j (H_j o sigma(g))(X^p)` and the inner compositions only
/// need `ceil(len / p)` terms.
fn compose_raw(k: &FiniteField, h: &[Fq], g: &[Fq], len: usize) -> Vec<Fq> {
    let p = k.p() as usize;
    let h = &h[..h.len().min(len)];
    if h.len() <= 2 * p || len <= 2 * p {
        return horner(k, h, g, len);
    }
    let inner_len = len.div_ceil(p);
    let gs: Vec<Fq> = g[..inner_len].iter().map(|&c| k.frobenius(c)).collect();
    let mut acc = vec![Fq::ZERO; len];
    let mut gpow = vec![Fq::ZERO; len];
    gpow[0] = Fq::ONE;
    for j in 0..p {
        let hj: Vec<Fq> = h.iter().skip(j).step_by(p).copied().collect();
        if hj.iter().any(|c| !c.is_zero()) {
            let inner = compose_raw(k, &hj, &gs, inner_len);
            let lg: Vec<u32> = gpow.iter().map(|&x| k.log(x)).collect();
            for (t, &c) in inner.iter().enumerate() {
                let base = t * p;
                if base >= len {
                    break;
                }
                let lc = k.log(c);
                if lc == NO_LOG {
                    continue;
                }
                for (o, &l) in acc[base..].iter_mut().zip(&lg[..len - base]) {
                    if l != NO_LOG {
                        *o = k.add(*o, k.exp_sum(lc, l));
                    }
                }
            }
        }
        if j + 1 < p {
            gpow = mul_raw(k, &gpow, g, len);
        }
    }
    acc
}

fn horner(k: &FiniteField, h: &[Fq], g: &[Fq], len: usize) -> Vec<Fq> {
    let mut acc = vec![Fq::ZERO; len];
    for &c in h.iter().rev() {
        acc = mul_raw(k, &acc, g, len);
        if len > 0 {
            acc[0] = k.add(acc[0], c);
        }
    }
    acc
}

impl fmt::Debug for CharSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for CharSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = &self.field;
        let mut first = true;
        for (e, c) in self.terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let cs = if k.degree() == 1 {
                k.to_digits(c)
            } else {
                format!("[{}]", k.to_digits(c))
            };
            match e {
                0 => write!(f, "{cs}")?,
                1 => write!(f, "{cs}X")?,
                _ => write!(f, "{cs}X^{e}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        if !self.is_exact() {
            write!(f, " + O(X^{})", self.prec)?;
        }
        Ok(())
    }
}
