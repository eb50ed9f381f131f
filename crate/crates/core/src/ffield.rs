//! Small finite fields `F_{p^m}` with `3 <= p <= 13` and `m <= 4`.
//!
//! Elements are packed as one byte per coordinate in the polynomial basis
//! `1, x, ..., x^{m-1}` modulo a fixed primitive polynomial. Addition works
//! lane-wise on the packed word; multiplication goes through discrete-log
//! tables, which is cheap at these sizes (`q <= 13^4 = 28561`).

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

const LANES: u32 = 0x0101_0101;

/// Sentinel log of zero.
pub const NO_LOG: u32 = u32::MAX;

/// An element of a [`FiniteField`], packed one coordinate per byte.
///
/// The derived ordering agrees with the ordering of the base-`p` integer
/// `c_0 + c_1 p + ... + c_{m-1} p^{m-1}`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Fq(u32);

impl Fq {
    pub const ZERO: Fq = Fq(0);
    pub const ONE: Fq = Fq(1);

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// Raw packed word.
    pub fn packed(self) -> u32 {
        self.0
    }

    fn coord(self, i: u32) -> u32 {
        (self.0 >> (8 * i)) & 0xff
    }
}

impl fmt::Debug for Fq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fq({:#x})", self.0)
    }
}

struct Tables {
    p: u32,
    m: u32,
    q: u32,
    /// Monic modulus, low coefficients `c_0..c_{m-1}` of `x^m + ... + c_0`.
    modulus: Vec<u32>,
    /// `log[dense(a)]` for nonzero `a`.
    log: Vec<u32>,
    /// `exp[k] = x^k`, doubled length so sums of two logs need no reduction.
    exp: Vec<Fq>,
    frob: Vec<Fq>,
    frob_inv: Vec<Fq>,
}

/// The field `F_{p^m}` together with its arithmetic tables. Cloning is cheap.
#[derive(Clone)]
pub struct FiniteField(Arc<Tables>);

impl PartialEq for FiniteField {
    fn eq(&self, other: &Self) -> bool {
        self.0.p == other.0.p && self.0.m == other.0.m
    }
}

impl Eq for FiniteField {}

impl fmt::Debug for FiniteField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}^{} mod {}", self.p(), self.degree(), self.modulus_string())
    }
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

impl FiniteField {
    /// Builds `F_{p^m}` using the smallest primitive monic modulus of degree `m`
    /// (coefficient vectors ordered as base-`p` integers).
    pub fn new(p: u32, m: u32) -> Result<Self> {
        if !is_prime(p as u64) || !(3..=13).contains(&p) {
            return Err(Error::UnsupportedPrime(p));
        }
        if !(1..=4).contains(&m) {
            return Err(Error::UnsupportedDegree(m));
        }
        let q = p.pow(m);
        for code in 0..q {
            let modulus: Vec<u32> = (0..m).map(|i| (code / p.pow(i)) % p).collect();
            if modulus[0] == 0 {
                continue;
            }
            if let Some(exp) = power_table(p, m, &modulus) {
                return Ok(Self::from_tables(p, m, modulus, exp));
            }
        }
        unreachable!("primitive polynomials exist in every degree")
    }

    /// The prime field `F_p`.
    pub fn prime(p: u32) -> Result<Self> {
        Self::new(p, 1)
    }

    fn from_tables(p: u32, m: u32, modulus: Vec<u32>, exp_once: Vec<Fq>) -> Self {
        let q = p.pow(m);
        let order = (q - 1) as usize;
        let mut log = vec![0u32; q as usize];
        for (k, e) in exp_once.iter().enumerate() {
            log[dense(*e, p, m) as usize] = k as u32;
        }
        let mut exp = exp_once.clone();
        exp.extend_from_slice(&exp_once);
        let mut tables = Tables {
            p,
            m,
            q,
            modulus,
            log,
            exp,
            frob: Vec::new(),
            frob_inv: Vec::new(),
        };
        let mut frob = vec![Fq::ZERO; q as usize];
        let mut frob_inv = vec![Fq::ZERO; q as usize];
        for k in 0..order {
            let a = tables.exp[k];
            let b = tables.exp[(k * p as usize) % order];
            frob[dense(a, p, m) as usize] = b;
            frob_inv[dense(b, p, m) as usize] = a;
        }
        tables.frob = frob;
        tables.frob_inv = frob_inv;
        FiniteField(Arc::new(tables))
    }

    pub fn p(&self) -> u32 {
        self.0.p
    }

    pub fn degree(&self) -> u32 {
        self.0.m
    }

    pub fn order(&self) -> u32 {
        self.0.q
    }

    /// Coefficients `c_0..c_{m-1}` of the monic modulus.
    pub fn modulus(&self) -> &[u32] {
        &self.0.modulus
    }

    /// Human-readable modulus, e.g. `x^2+2x+2`.
    pub fn modulus_string(&self) -> String {
        let m = self.degree() as usize;
        let mut s = if m == 1 { "x".to_string() } else { format!("x^{m}") };
        for i in (0..m).rev() {
            let c = self.0.modulus[i];
            if c == 0 {
                continue;
            }
            match i {
                0 => s.push_str(&format!("+{c}")),
                1 if c == 1 => s.push_str("+x"),
                1 => s.push_str(&format!("+{c}x")),
                _ if c == 1 => s.push_str(&format!("+x^{i}")),
                _ => s.push_str(&format!("+{c}x^{i}")),
            }
        }
        s
    }

    pub fn zero(&self) -> Fq {
        Fq::ZERO
    }

    pub fn one(&self) -> Fq {
        Fq::ONE
    }

    /// The class of `x`, a generator of the multiplicative group.
    pub fn generator(&self) -> Fq {
        self.0.exp[1]
    }

    /// Image of an integer in the prime field.
    pub fn from_int(&self, n: i64) -> Fq {
        Fq(n.rem_euclid(self.p() as i64) as u32)
    }

    /// Element with the given coordinates in the basis `1, x, ..., x^{m-1}`.
    pub fn from_coords(&self, coords: &[u32]) -> Fq {
        assert!(coords.len() <= self.degree() as usize);
        Fq(coords
            .iter()
            .enumerate()
            .fold(0, |acc, (i, c)| acc | ((c % self.p()) << (8 * i))))
    }

    pub fn coords(&self, a: Fq) -> Vec<u32> {
        (0..self.degree()).map(|i| a.coord(i)).collect()
    }

    /// Position of `a` in the enumeration `0..q`.
    pub fn index(&self, a: Fq) -> u32 {
        dense(a, self.p(), self.degree())
    }

    pub fn from_index(&self, idx: u32) -> Fq {
        let p = self.p();
        let coords: Vec<u32> = (0..self.degree()).map(|i| (idx / p.pow(i)) % p).collect();
        self.from_coords(&coords)
    }

    /// All elements in index order.
    pub fn elements(&self) -> impl Iterator<Item = Fq> + '_ {
        (0..self.order()).map(move |i| self.from_index(i))
    }

    /// True when `a` lies in the prime field.
    pub fn in_prime_field(&self, a: Fq) -> bool {
        a.0 < self.p()
    }

    /// Integer representative in `0..p` of a prime-field element.
    pub fn to_prime(&self, a: Fq) -> Option<u32> {
        self.in_prime_field(a).then_some(a.0)
    }

    #[inline]
    pub fn add(&self, a: Fq, b: Fq) -> Fq {
        let p = self.0.p;
        let s = a.0 + b.0;
        let over = ((s + (0x80 - p) * LANES) & (0x80 * LANES)) >> 7;
        Fq(s - over * p)
    }

    #[inline]
    pub fn neg(&self, a: Fq) -> Fq {
        let p = self.0.p;
        let s = p * LANES - a.0;
        let over = ((s + (0x80 - p) * LANES) & (0x80 * LANES)) >> 7;
        Fq(s - over * p)
    }

    #[inline]
    pub fn sub(&self, a: Fq, b: Fq) -> Fq {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Fq, b: Fq) -> Fq {
        if a.0 == 0 || b.0 == 0 {
            return Fq::ZERO;
        }
        let t = &self.0;
        let la = t.log[dense(a, t.p, t.m) as usize];
        let lb = t.log[dense(b, t.p, t.m) as usize];
        t.exp[(la + lb) as usize]
    }

    /// Discrete logarithm to base `x`, or [`NO_LOG`] for zero. Together with
    /// [`FiniteField::exp_sum`] this lets inner loops reuse a factor's log.
    #[inline]
    pub fn log(&self, a: Fq) -> u32 {
        if a.0 == 0 {
            return NO_LOG;
        }
        let t = &self.0;
        t.log[dense(a, t.p, t.m) as usize]
    }

    /// `x^{la + lb}` for two logs from [`FiniteField::log`] (neither [`NO_LOG`]).
    #[inline]
    pub fn exp_sum(&self, la: u32, lb: u32) -> Fq {
        self.0.exp[(la + lb) as usize]
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, a: Fq) -> Option<Fq> {
        if a.is_zero() {
            return None;
        }
        let t = &self.0;
        let la = t.log[dense(a, t.p, t.m) as usize];
        Some(t.exp[((t.q - 1 - la) % (t.q - 1)) as usize])
    }

    pub fn div(&self, a: Fq, b: Fq) -> Option<Fq> {
        self.inv(b).map(|bi| self.mul(a, bi))
    }

    /// `a^e` for any integer `e`; `0^0 = 1`, negative powers of zero are `None`.
    pub fn pow(&self, a: Fq, e: i64) -> Option<Fq> {
        if a.is_zero() {
            return match e {
                0 => Some(Fq::ONE),
                e if e > 0 => Some(Fq::ZERO),
                _ => None,
            };
        }
        let t = &self.0;
        let order = (t.q - 1) as i64;
        let la = t.log[dense(a, t.p, t.m) as usize] as i64;
        Some(t.exp[(la * e.rem_euclid(order)).rem_euclid(order) as usize])
    }

    /// `a^e` for nonnegative exponents.
    pub fn pow_u(&self, a: Fq, e: u64) -> Fq {
        if e == 0 {
            return Fq::ONE;
        }
        if a.is_zero() {
            return Fq::ZERO;
        }
        let t = &self.0;
        let order = (t.q - 1) as u64;
        let la = t.log[dense(a, t.p, t.m) as usize] as u64;
        t.exp[((la * (e % order)) % order) as usize]
    }

    /// The Frobenius `a -> a^p`.
    #[inline]
    pub fn frobenius(&self, a: Fq) -> Fq {
        let t = &self.0;
        t.frob[dense(a, t.p, t.m) as usize]
    }

    /// Inverse Frobenius `a -> a^{1/p}`.
    #[inline]
    pub fn frobenius_inv(&self, a: Fq) -> Fq {
        let t = &self.0;
        t.frob_inv[dense(a, t.p, t.m) as usize]
    }

    /// Multiplicative order of a nonzero element.
    pub fn multiplicative_order(&self, a: Fq) -> Option<u64> {
        if a.is_zero() {
            return None;
        }
        let n = (self.order() - 1) as u64;
        let la = self.0.log[self.index(a) as usize] as u64;
        Some(n / gcd(n, la))
    }

    /// Smallest (in index order) `alpha` with `alpha^{p^n - 1} = (-1)^{n-1}`.
    ///
    /// The field must contain `F_{p^{2n}}`, i.e. `2n` must divide the degree.
    pub fn solve_alpha(&self, n: u32) -> Result<Fq> {
        if n == 0 || self.degree() % (2 * n) != 0 {
            return Err(Error::FieldTooSmall {
                needed: 2 * n,
                degree: self.degree(),
            });
        }
        let e = (self.p() as i64).pow(n) - 1;
        let target = if n % 2 == 1 { Fq::ONE } else { self.neg(Fq::ONE) };
        self.elements()
            .skip(1)
            .find(|&a| self.pow(a, e) == Some(target))
            .ok_or(Error::NoSolutionAtPrecision)
    }

    /// Uniformly random element.
    pub fn random<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Fq {
        self.from_index(rng.gen_range(0..self.order()))
    }

    /// Uniformly random nonzero element.
    pub fn random_nonzero<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Fq {
        self.from_index(rng.gen_range(1..self.order()))
    }

    /// Base-`p` digit group of an element, most significant coordinate first.
    pub fn to_digits(&self, a: Fq) -> String {
        (0..self.degree())
            .rev()
            .map(|i| std::char::from_digit(a.coord(i), self.p()).unwrap())
            .collect()
    }

    /// Inverse of [`FiniteField::to_digits`]; shorter groups are zero-padded on the left.
    pub fn from_digits(&self, s: &str) -> Result<Fq> {
        let m = self.degree() as usize;
        if s.is_empty() || s.len() > m {
            return Err(Error::Parse(format!("bad field digit group {s:?}")));
        }
        let mut coords = vec![0u32; m];
        for (i, ch) in s.chars().rev().enumerate() {
            coords[i] = ch
                .to_digit(self.p())
                .ok_or_else(|| Error::Parse(format!("bad base-{} digit {ch:?}", self.p())))?;
        }
        Ok(self.from_coords(&coords))
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[inline]
fn dense(a: Fq, p: u32, m: u32) -> u32 {
    let w = a.0;
    match m {
        1 => w,
        2 => (w & 0xff) + p * ((w >> 8) & 0xff),
        3 => (w & 0xff) + p * (((w >> 8) & 0xff) + p * ((w >> 16) & 0xff)),
        _ => {
            (w & 0xff)
                + p * (((w >> 8) & 0xff) + p * (((w >> 16) & 0xff) + p * ((w >> 24) & 0xff)))
        }
    }
}

/// Powers `x^0 .. x^{q-2}` modulo the candidate, or `None` unless `x` has order `q - 1`.
fn power_table(p: u32, m: u32, modulus: &[u32]) -> Option<Vec<Fq>> {
    let q = p.pow(m);
    let order = q - 1;
    // x is primitive iff x^k != 1 for 0 < k < q-1 and x^{q-1} = 1
    let mut cur = vec![0u32; m as usize];
    cur[0] = 1;
    let mut table = Vec::with_capacity(order as usize);
    for k in 0..order {
        let packed = cur
            .iter()
            .enumerate()
            .fold(0u32, |acc, (i, c)| acc | (c << (8 * i)));
        if k > 0 && packed == 1 {
            return None;
        }
        table.push(Fq(packed));
        // multiply by x and reduce with x^m = -sum c_i x^i
        let top = cur[m as usize - 1];
        for i in (1..m as usize).rev() {
            cur[i] = (cur[i - 1] + (p - top) * modulus[i] % p) % p;
        }
        cur[0] = ((p - top) * modulus[0]) % p;
    }
    let back_to_one = cur[0] == 1 && cur[1..].iter().all(|&c| c == 0);
    back_to_one.then_some(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rejects_p2_and_composites() {
        assert!(matches!(FiniteField::new(2, 1), Err(Error::UnsupportedPrime(2))));
        assert!(FiniteField::new(9, 1).is_err());
        assert!(FiniteField::new(17, 1).is_err());
        assert!(FiniteField::new(3, 5).is_err());
    }

    #[test]
    fn prime_field_arithmetic_matches_integers() {
        for p in [3u32, 5, 7, 11, 13] {
            let k = FiniteField::prime(p).unwrap();
            for a in 0..p as i64 {
                for b in 0..p as i64 {
                    let (x, y) = (k.from_int(a), k.from_int(b));
                    assert_eq!(k.add(x, y), k.from_int(a + b));
                    assert_eq!(k.sub(x, y), k.from_int(a - b));
                    assert_eq!(k.mul(x, y), k.from_int(a * b));
                }
            }
        }
    }

    #[test]
    fn generator_has_full_order() {
        for (p, m) in [(3, 1), (3, 2), (3, 4), (5, 2), (5, 4), (7, 3), (13, 4)] {
            let k = FiniteField::new(p, m).unwrap();
            assert_eq!(k.multiplicative_order(k.generator()), Some((k.order() - 1) as u64));
        }
    }

    #[test]
    fn field_axioms_on_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (p, m) in [(3, 4), (5, 2), (7, 3), (11, 2)] {
            let k = FiniteField::new(p, m).unwrap();
            for _ in 0..300 {
                let (a, b, c) = (k.random(&mut rng), k.random(&mut rng), k.random(&mut rng));
                assert_eq!(k.add(k.add(a, b), c), k.add(a, k.add(b, c)));
                assert_eq!(k.mul(k.mul(a, b), c), k.mul(a, k.mul(b, c)));
                assert_eq!(k.mul(a, k.add(b, c)), k.add(k.mul(a, b), k.mul(a, c)));
                assert_eq!(k.sub(k.add(a, b), b), a);
                if !a.is_zero() {
                    assert_eq!(k.mul(a, k.inv(a).unwrap()), Fq::ONE);
                }
            }
        }
    }

    #[test]
    fn frobenius_is_pth_power_and_ring_hom() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let k = FiniteField::new(5, 2).unwrap();
        for _ in 0..100 {
            let (a, b) = (k.random(&mut rng), k.random(&mut rng));
            assert_eq!(k.frobenius(a), k.pow_u(a, 5));
            assert_eq!(k.frobenius(k.add(a, b)), k.add(k.frobenius(a), k.frobenius(b)));
            assert_eq!(k.frobenius(k.mul(a, b)), k.mul(k.frobenius(a), k.frobenius(b)));
            assert_eq!(k.frobenius(k.frobenius(a)), a);
            assert_eq!(k.frobenius_inv(k.frobenius(a)), a);
        }
        // exhaustive: m-fold Frobenius is the identity on F_25
        for a in k.elements() {
            assert_eq!(k.frobenius(k.frobenius(a)), a);
        }
        // prime field is fixed
        for c in 0..5 {
            assert_eq!(k.frobenius(k.from_int(c)), k.from_int(c));
        }
    }

    #[test]
    fn frobenius_of_generator_f9() {
        let k = FiniteField::new(3, 2).unwrap();
        let g = k.generator();
        assert_eq!(k.frobenius(g), k.pow_u(g, 3));
        assert_ne!(k.frobenius(g), g);
    }

    #[test]
    fn solve_alpha_cases() {
        // n = 1: alpha^{p-1} = 1, the smallest nonzero element is 1
        for p in [3, 5, 7] {
            let k = FiniteField::new(p, 2).unwrap();
            assert_eq!(k.solve_alpha(1).unwrap(), Fq::ONE);
        }
        // p = 3, n = 2: alpha^8 = -1 inside F_81; brute force says order 16
        let k = FiniteField::new(3, 4).unwrap();
        let alpha = k.solve_alpha(2).unwrap();
        assert_eq!(k.multiplicative_order(alpha), Some(16));
        let brute = k
            .elements()
            .skip(1)
            .find(|&a| k.multiplicative_order(a) == Some(16))
            .unwrap();
        assert_eq!(alpha, brute);
        for p in [3, 5, 7, 11, 13] {
            let k = FiniteField::new(p, 4).unwrap();
            for n in [1, 2] {
                let a = k.solve_alpha(n).unwrap();
                let e = (p as i64).pow(n) - 1;
                let sign = if n % 2 == 1 { Fq::ONE } else { k.neg(Fq::ONE) };
                assert_eq!(k.pow(a, e), Some(sign));
            }
        }
        assert!(FiniteField::new(3, 2).unwrap().solve_alpha(2).is_err());
    }

    #[test]
    fn digit_groups_round_trip() {
        let k = FiniteField::new(13, 3).unwrap();
        for a in k.elements().step_by(97) {
            assert_eq!(k.from_digits(&k.to_digits(a)).unwrap(), a);
        }
        assert_eq!(k.to_digits(k.from_coords(&[12, 0, 1])), "10c");
    }

    #[test]
    fn index_order_matches_packed_order() {
        let k = FiniteField::new(5, 3).unwrap();
        let elems: Vec<Fq> = k.elements().collect();
        assert!(elems.windows(2).all(|w| w[0] < w[1]));
        assert!(elems.iter().enumerate().all(|(i, &a)| k.index(a) == i as u32));
    }
}
