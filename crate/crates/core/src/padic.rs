//! Truncated p-adic scalars and the characters `omega`, `mu_lambda`, `chi`.
//!
//! A nonzero scalar is `p^val * unit` where the unit is known modulo
//! `p^prec`. The exact zero is its own variant. A sum whose known digits all
//! cancel collapses to the exact zero: at the working precision nothing
//! distinguishes it from zero, and no formula in this crate divides by such a
//! difference.

use std::fmt;

use crate::error::{Error, Result};
use crate::ffield::{FiniteField, Fq};

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum Kind {
    Zero,
    Value { val: i64, unit: u64, prec: u32 },
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct PadicScalar {
    p: u32,
    kind: Kind,
}

/// Largest relative precision whose modulus `p^M` fits comfortably in a `u64`.
pub fn max_precision(p: u32) -> u32 {
    let mut m = 0;
    let mut acc: u128 = 1;
    while acc * (p as u128) < (1u128 << 62) {
        acc *= p as u128;
        m += 1;
    }
    m
}

fn pow_u64(p: u32, k: u32) -> u64 {
    (p as u64).pow(k)
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    (r0 == 1).then(|| t0.rem_euclid(m as i128) as u64)
}

/// Splits `n != 0` as `p^v * u` with `p` not dividing `u`.
fn split_valuation(mut n: i128, p: u32) -> (i64, i128) {
    let mut v = 0;
    while n % p as i128 == 0 {
        n /= p as i128;
        v += 1;
    }
    (v, n)
}

impl PadicScalar {
    pub fn zero(p: u32) -> Self {
        PadicScalar { p, kind: Kind::Zero }
    }

    /// `p^val * unit` where `unit` is known mod `p^prec`. Powers of `p`
    /// dividing `unit` move into the valuation and cost relative precision.
    pub fn from_parts(p: u32, val: i64, unit: i128, prec: u32) -> Self {
        let modulus = pow_u64(p, prec.min(max_precision(p))) as i128;
        let unit = unit.rem_euclid(modulus);
        if unit == 0 {
            return Self::zero(p);
        }
        let (extra, u) = split_valuation(unit, p);
        let prec = prec.min(max_precision(p)) - extra as u32;
        let modulus = pow_u64(p, prec) as i128;
        PadicScalar {
            p,
            kind: Kind::Value {
                val: val + extra,
                unit: u.rem_euclid(modulus) as u64,
                prec,
            },
        }
    }

    /// The integer `n` known to relative precision `prec`.
    pub fn from_int(p: u32, n: i64, prec: u32) -> Self {
        if n == 0 {
            return Self::zero(p);
        }
        let (v, u) = split_valuation(n as i128, p);
        Self::from_parts(p, v, u, prec)
    }

    /// `num / den` with `p` not dividing `den`, known to relative precision `prec`.
    pub fn from_ratio(p: u32, num: i64, den: i64, prec: u32) -> Result<Self> {
        if den % p as i64 == 0 {
            return Err(Error::DenominatorDivisibleByP);
        }
        if num == 0 {
            return Ok(Self::zero(p));
        }
        let (v, u) = split_valuation(num as i128, p);
        let prec = prec.min(max_precision(p));
        let m = pow_u64(p, prec);
        let den_inv = inv_mod((den as i128).rem_euclid(m as i128) as u64, m)
            .ok_or(Error::DenominatorDivisibleByP)?;
        let unit = mul_mod(u.rem_euclid(m as i128) as u64, den_inv, m);
        Ok(PadicScalar {
            p,
            kind: Kind::Value { val: v, unit, prec },
        })
    }

    /// `p^k` at full precision.
    pub fn p_power(p: u32, k: i64) -> Self {
        PadicScalar {
            p,
            kind: Kind::Value {
                val: k,
                unit: 1,
                prec: max_precision(p),
            },
        }
    }

    pub fn one(p: u32) -> Self {
        Self::p_power(p, 0)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, Kind::Zero)
    }

    pub fn valuation(&self) -> Option<i64> {
        match self.kind {
            Kind::Zero => None,
            Kind::Value { val, .. } => Some(val),
        }
    }

    /// Unit part known mod `p^prec`.
    pub fn unit(&self) -> Option<u64> {
        match self.kind {
            Kind::Zero => None,
            Kind::Value { unit, .. } => Some(unit),
        }
    }

    /// Relative precision (number of known unit digits); `None` for the exact zero.
    pub fn precision(&self) -> Option<u32> {
        match self.kind {
            Kind::Zero => None,
            Kind::Value { prec, .. } => Some(prec),
        }
    }

    /// The value is known modulo `p^abs_precision`.
    pub fn abs_precision(&self) -> i64 {
        match self.kind {
            Kind::Zero => i64::MAX,
            Kind::Value { val, prec, .. } => val + prec as i64,
        }
    }

    pub fn is_unit(&self) -> bool {
        self.valuation() == Some(0)
    }

    pub fn is_integral(&self) -> bool {
        self.valuation().map_or(true, |v| v >= 0)
    }

    /// Drops digits so that the relative precision is at most `prec`.
    pub fn with_precision(&self, prec: u32) -> Self {
        match self.kind {
            Kind::Zero => *self,
            Kind::Value { val, unit, prec: old } => {
                Self::from_parts(self.p, val, unit as i128, prec.min(old))
            }
        }
    }

    pub fn neg(&self) -> Self {
        match self.kind {
            Kind::Zero => *self,
            Kind::Value { val, unit, prec } => {
                let m = pow_u64(self.p, prec);
                PadicScalar {
                    p: self.p,
                    kind: Kind::Value {
                        val,
                        unit: (m - unit) % m,
                        prec,
                    },
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.p, other.p, "mixed primes");
        let (v1, u1, a1) = match self.kind {
            Kind::Zero => return *other,
            Kind::Value { val, unit, prec } => (val, unit, val + prec as i64),
        };
        let (v2, u2, a2) = match other.kind {
            Kind::Zero => return *self,
            Kind::Value { val, unit, prec } => (val, unit, val + prec as i64),
        };
        let v = v1.min(v2);
        let abs = a1.min(a2);
        if abs <= v {
            return Self::zero(self.p);
        }
        let digits = (abs - v) as u32;
        let m = pow_u64(self.p, digits) as u128;
        let shift = |u: u64, w: i64| -> u128 {
            if (w - v) as u32 >= digits {
                0
            } else {
                (u as u128 * pow_u64(self.p, (w - v) as u32) as u128) % m
            }
        };
        let s = (shift(u1, v1) + shift(u2, v2)) % m;
        Self::from_parts(self.p, v, s as i128, digits)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.p, other.p, "mixed primes");
        match (self.kind, other.kind) {
            (Kind::Zero, _) | (_, Kind::Zero) => Self::zero(self.p),
            (
                Kind::Value { val: v1, unit: u1, prec: m1 },
                Kind::Value { val: v2, unit: u2, prec: m2 },
            ) => {
                let prec = m1.min(m2);
                let m = pow_u64(self.p, prec);
                PadicScalar {
                    p: self.p,
                    kind: Kind::Value {
                        val: v1 + v2,
                        unit: mul_mod(u1 % m, u2 % m, m),
                        prec,
                    },
                }
            }
        }
    }

    pub fn inv(&self) -> Result<Self> {
        match self.kind {
            Kind::Zero => Err(Error::ZeroArgument),
            Kind::Value { val, unit, prec } => {
                let m = pow_u64(self.p, prec);
                let ui = inv_mod(unit, m).expect("units are invertible");
                Ok(PadicScalar {
                    p: self.p,
                    kind: Kind::Value { val: -val, unit: ui, prec },
                })
            }
        }
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(&other.inv()?))
    }

    /// Multiplication by `p^k`, exact.
    pub fn shift(&self, k: i64) -> Self {
        match self.kind {
            Kind::Zero => *self,
            Kind::Value { val, unit, prec } => PadicScalar {
                p: self.p,
                kind: Kind::Value { val: val + k, unit, prec },
            },
        }
    }

    /// Unit part `a p^{-val(a)}` as a scalar of valuation zero.
    pub fn unit_part(&self) -> Result<Self> {
        let v = self.valuation().ok_or(Error::ZeroArgument)?;
        Ok(self.shift(-v))
    }

    /// The value modulo `p^k` as an integer in `0..p^k`.
    pub fn residue(&self, k: u32) -> Result<u64> {
        match self.kind {
            Kind::Zero => Ok(0),
            Kind::Value { val, unit, .. } => {
                if val < 0 {
                    return Err(Error::NotIntegral(val));
                }
                if self.abs_precision() < k as i64 {
                    return Err(Error::InsufficientPadicPrecision {
                        needed: k as i64,
                        available: self.abs_precision(),
                    });
                }
                if val >= k as i64 {
                    return Ok(0);
                }
                let m = pow_u64(self.p, k);
                Ok(mul_mod(unit % m, pow_u64(self.p, val as u32), m))
            }
        }
    }

    /// The first `k` base-`p` digits of an integral scalar, least significant first.
    pub fn digits(&self, k: u32) -> Result<Vec<u32>> {
        let mut r = self.residue(k)?;
        Ok((0..k)
            .map(|_| {
                let d = (r % self.p as u64) as u32;
                r /= self.p as u64;
                d
            })
            .collect())
    }

    /// Splits `x = beta + y` with `beta = num / p^e` (`0 <= num < p^e`,
    /// `p` not dividing `num` unless zero) and `y` integral. Returns `(num, e, y)`.
    pub fn split_principal(&self) -> Result<(u64, u32, PadicScalar)> {
        match self.kind {
            Kind::Value { val, unit, prec } if val < 0 => {
                let e = (-val) as u32;
                if prec < e {
                    return Err(Error::InsufficientPadicPrecision {
                        needed: e as i64,
                        available: prec as i64,
                    });
                }
                let num = unit % pow_u64(self.p, e);
                let beta = Self::from_parts(self.p, val, num as i128, max_precision(self.p));
                Ok((num, e, self.sub(&beta)))
            }
            _ => Ok((0, 0, *self)),
        }
    }

    /// Exact rational `num / p^e`.
    pub fn from_p_fraction(p: u32, num: u64, e: u32) -> Self {
        Self::from_parts(p, -(e as i64), num as i128, max_precision(p))
    }

    /// True when the two scalars agree modulo the smaller of their absolute precisions.
    pub fn agrees_with(&self, other: &Self) -> bool {
        self.sub(other).is_zero()
    }

    /// Uniformly random `p`-adic unit at relative precision `prec`.
    pub fn random_unit<R: rand::Rng + ?Sized>(p: u32, prec: u32, rng: &mut R) -> Self {
        let m = pow_u64(p, prec.min(max_precision(p)));
        loop {
            let u = rng.gen_range(1..m);
            if u % p as u64 != 0 {
                return Self::from_parts(p, 0, u as i128, prec);
            }
        }
    }

    /// Uniformly random element of `Z_p` known mod `p^prec` (possibly zero).
    pub fn random_integral<R: rand::Rng + ?Sized>(p: u32, prec: u32, rng: &mut R) -> Self {
        let m = pow_u64(p, prec.min(max_precision(p)));
        Self::from_parts(p, 0, rng.gen_range(0..m) as i128, prec)
    }

    /// Reduction mod `p` of an integral scalar, in the prime field of `k`.
    pub fn reduce(&self, k: &FiniteField) -> Result<Fq> {
        Ok(k.from_int(self.residue(1)? as i64))
    }

    /// `(-1)^t`-style helper: the value of `n` in `F_p` raised to `e`.
    pub fn pow_reduced(&self, e: u32, k: &FiniteField) -> Result<Fq> {
        Ok(k.pow_u(self.reduce(k)?, e as u64))
    }
}

impl fmt::Debug for PadicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            Kind::Zero => write!(f, "0"),
            Kind::Value { val, unit, prec } => {
                write!(f, "{}^{} * {} (mod {}^{})", self.p, val, unit, self.p, prec)
            }
        }
    }
}

impl fmt::Display for PadicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            Kind::Zero => write!(f, "0"),
            Kind::Value { val, unit, prec } => write!(f, "{val}:{unit}:{prec}"),
        }
    }
}

/// `C(s, k) mod p` for an integral `s` known modulo `p^D` with `p^D > k`.
///
/// Computed digit by digit (Lucas), so only the low digits of `s` matter.
pub fn binom_padic(s: &PadicScalar, k: u64, field: &FiniteField) -> Result<Fq> {
    let p = s.p() as u64;
    if k == 0 {
        return Ok(Fq::ONE);
    }
    let mut digits_needed = 0u32;
    let mut t = k;
    while t > 0 {
        t /= p;
        digits_needed += 1;
    }
    let sd = s.digits(digits_needed)?;
    let mut acc = 1u64;
    let mut kk = k;
    for &si in &sd {
        let ki = kk % p;
        kk /= p;
        if ki > si as u64 {
            return Ok(Fq::ZERO);
        }
        acc = acc * small_binom(si as u64, ki, p) % p;
    }
    Ok(field.from_int(acc as i64))
}

fn small_binom(n: u64, k: u64, p: u64) -> u64 {
    // n < p here, so the factorials are invertible mod p
    let mut num = 1u64;
    let mut den = 1u64;
    for i in 0..k {
        num = num * ((n - i) % p) % p;
        den = den * ((i + 1) % p) % p;
    }
    num * inv_mod(den, p).unwrap() % p
}

/// `omega(a) = a p^{-val(a)}` reduced mod `p`.
pub fn omega_char(a: &PadicScalar, field: &FiniteField) -> Result<Fq> {
    if a.is_zero() {
        return Err(Error::ZeroArgument);
    }
    a.unit_part()?.reduce(field)
}

/// `mu_lambda(a) = lambda^{val(a)}`.
pub fn mu_char(a: &PadicScalar, lambda: Fq, field: &FiniteField) -> Result<Fq> {
    let v = a.valuation().ok_or(Error::ZeroArgument)?;
    field.pow(lambda, v).ok_or(Error::ZeroArgument)
}

/// Parameters `(r, s, lambda)` of `W = rho(r, chi)` with `chi = omega^s mu_lambda`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharacterData {
    pub r: u32,
    pub s: u32,
    pub lambda: Fq,
}

impl CharacterData {
    pub fn new(p: u32, r: u32, s: i64, lambda: Fq) -> Result<Self> {
        if r > p - 1 {
            return Err(Error::ParameterOutOfRange(format!("r = {r} > p - 1")));
        }
        if lambda.is_zero() {
            return Err(Error::ParameterOutOfRange("lambda = 0".into()));
        }
        Ok(CharacterData {
            r,
            s: s.rem_euclid(p as i64 - 1) as u32,
            lambda,
        })
    }

    /// `chi(a) = omega(a)^s lambda^{val(a)}`.
    pub fn chi(&self, a: &PadicScalar, field: &FiniteField) -> Result<Fq> {
        let w = omega_char(a, field)?;
        let mu = mu_char(a, self.lambda, field)?;
        Ok(field.mul(field.pow_u(w, self.s as u64), mu))
    }

    /// `omega(a)^r`.
    pub fn omega_r(&self, a: &PadicScalar, field: &FiniteField) -> Result<Fq> {
        Ok(field.pow_u(omega_char(a, field)?, self.r as u64))
    }

    /// Inverse central character `(omega^r chi^2)^{-1}(x)`.
    pub fn central_inv(&self, x: &PadicScalar, field: &FiniteField) -> Result<Fq> {
        let c = field.mul(self.omega_r(x, field)?, field.pow_u(self.chi(x, field)?, 2));
        field.inv(c).ok_or(Error::ZeroArgument)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ratio_examples() {
        let h = PadicScalar::from_ratio(3, 1, 2, 1).unwrap();
        assert_eq!((h.valuation(), h.unit()), (Some(0), Some(2)));
        let one = PadicScalar::from_ratio(3, 1, 1, 5).unwrap();
        assert_eq!(one.unit(), Some(1));
        // 2/8 = 1/4 = 7 mod 9
        let q = PadicScalar::from_ratio(3, 2, 8, 2).unwrap();
        assert_eq!((q.valuation(), q.unit()), (Some(0), Some(7)));
        assert_eq!(
            PadicScalar::from_ratio(3, 1, 6, 4),
            Err(Error::DenominatorDivisibleByP)
        );
        let v = PadicScalar::from_ratio(5, 50, 3, 4).unwrap();
        assert_eq!(v.valuation(), Some(2));
    }

    #[test]
    fn arithmetic_agrees_with_integers() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for p in [3u32, 5, 7, 13] {
            for _ in 0..200 {
                let a: i64 = rand::Rng::gen_range(&mut rng, -5000..5000);
                let b: i64 = rand::Rng::gen_range(&mut rng, -5000..5000);
                let (x, y) = (PadicScalar::from_int(p, a, 12), PadicScalar::from_int(p, b, 12));
                assert!(x.add(&y).agrees_with(&PadicScalar::from_int(p, a + b, 12)));
                assert!(x.mul(&y).agrees_with(&PadicScalar::from_int(p, a * b, 12)));
                if b != 0 {
                    assert!(x.div(&y).unwrap().mul(&y).agrees_with(&x));
                }
            }
        }
    }

    #[test]
    fn cancellation_collapses_to_zero() {
        let x = PadicScalar::from_int(5, 17, 6);
        assert!(x.sub(&x).is_zero());
        let y = PadicScalar::from_int(5, 17 + 5i64.pow(6), 8);
        assert!(x.sub(&y).is_zero());
    }

    #[test]
    fn principal_part_split() {
        // 7/9 + 4 with p = 3: principal part 7/9
        let x = PadicScalar::from_p_fraction(3, 7, 2).add(&PadicScalar::from_int(3, 4, 20));
        let (num, e, rest) = x.split_principal().unwrap();
        assert_eq!((num, e), (7, 2));
        assert!(rest.agrees_with(&PadicScalar::from_int(3, 4, 20)));
        let (num, e, _) = PadicScalar::from_int(3, 5, 10).split_principal().unwrap();
        assert_eq!((num, e), (0, 0));
    }

    #[test]
    fn binomial_examples() {
        let k = FiniteField::prime(3).unwrap();
        let s = PadicScalar::from_ratio(3, 1, 2, 4).unwrap();
        assert_eq!(binom_padic(&s, 0, &k).unwrap(), Fq::ONE);
        assert_eq!(binom_padic(&s, 1, &k).unwrap(), k.from_int(2));
        // C(1/2, 2) = -1/8 = 1 mod 3
        assert_eq!(binom_padic(&s, 2, &k).unwrap(), k.from_int(1));
        let short = PadicScalar::from_ratio(3, 1, 2, 1).unwrap();
        assert!(matches!(
            binom_padic(&short, 3, &k),
            Err(Error::InsufficientPadicPrecision { .. })
        ));
    }

    fn pascal_mod(p: u64, n: usize) -> Vec<Vec<u64>> {
        let mut t = vec![vec![0u64; n + 1]; n + 1];
        for i in 0..=n {
            t[i][0] = 1;
            for j in 1..=i {
                t[i][j] = (t[i - 1][j - 1] + t[i - 1][j]) % p;
            }
        }
        t
    }

    #[test]
    fn binomial_matches_pascal_triangle() {
        for p in [3u32, 5, 7] {
            let k = FiniteField::prime(p).unwrap();
            let table = pascal_mod(p as u64, 120);
            for n in 0..=120 {
                let s = PadicScalar::from_int(p, n as i64, 8);
                for j in 0..=n {
                    assert_eq!(
                        binom_padic(&s, j as u64, &k).unwrap(),
                        k.from_int(table[n][j] as i64),
                        "p={p} n={n} j={j}"
                    );
                }
            }
        }
    }

    #[test]
    fn binomial_ignores_high_digits() {
        let k = FiniteField::prime(5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..100 {
            let s = PadicScalar::random_integral(5, 10, &mut rng);
            let low = s.residue(3).unwrap() as i64;
            let hi = low + 125 * rand::Rng::gen_range(&mut rng, 1..1000i64);
            let t = PadicScalar::from_int(5, hi, 10);
            for j in 0..125 {
                assert_eq!(binom_padic(&s, j, &k).unwrap(), binom_padic(&t, j, &k).unwrap());
            }
        }
    }

    #[test]
    fn characters() {
        let k = FiniteField::new(5, 2).unwrap();
        let lam = k.generator();
        let p = PadicScalar::p_power(5, 1);
        assert_eq!(omega_char(&p, &k).unwrap(), Fq::ONE);
        assert_eq!(mu_char(&p, lam, &k).unwrap(), lam);
        let u = PadicScalar::from_int(5, 13, 6);
        assert_eq!(omega_char(&u, &k).unwrap(), k.from_int(3));
        assert_eq!(mu_char(&u, lam, &k).unwrap(), Fq::ONE);
        assert_eq!(omega_char(&PadicScalar::zero(5), &k), Err(Error::ZeroArgument));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let a = PadicScalar::random_unit(5, 8, &mut rng).shift(rand::Rng::gen_range(&mut rng, -3..4));
            let b = PadicScalar::random_unit(5, 8, &mut rng).shift(rand::Rng::gen_range(&mut rng, -3..4));
            let ab = a.mul(&b);
            assert_eq!(
                omega_char(&ab, &k).unwrap(),
                k.mul(omega_char(&a, &k).unwrap(), omega_char(&b, &k).unwrap())
            );
            assert_eq!(
                mu_char(&ab, lam, &k).unwrap(),
                k.mul(mu_char(&a, lam, &k).unwrap(), mu_char(&b, lam, &k).unwrap())
            );
            assert_eq!(k.pow_u(omega_char(&a, &k).unwrap(), 4), Fq::ONE);
        }
    }

    #[test]
    fn central_character_at_p() {
        let k = FiniteField::new(3, 2).unwrap();
        let lam = k.generator();
        let chi = CharacterData::new(3, 1, 1, lam).unwrap();
        let p = PadicScalar::p_power(3, 1);
        assert_eq!(chi.central_inv(&p, &k).unwrap(), k.inv(k.mul(lam, lam)).unwrap());
    }
}
