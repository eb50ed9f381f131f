//! The compact induction `ind_{B n KZ}^B Sym^r k^2 (x) (chi o det)`, the Hecke
//! operator `T` on it, the generators of `T(...) n ind(omega^r (x) 1)`, and the
//! pairing `pi_W` against windows.
//!
//! Elements are finite sums `sum [b_{beta,delta}, P]` over the transversal
//! `b_{beta,delta} = [[1, beta], [0, p^delta]]`, `beta` in `Z[1/p] / Z` stored
//! exactly. `[b u, P] = [b, u P]` for `u` in `B n KZ`, where
//! `u = p^m [[a0, b0], [0, d0]]` acts by `chi(det u) P(a0 x, b0 x + d0 y)`.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::borel::{check_representatives, BorelElem, PsiWindow};
use crate::error::{Error, Result};
use crate::ffield::{FiniteField, Fq};
use crate::linalg::{first_violated_moment, int_pow, nullspace};
use crate::padic::{max_precision, CharacterData, PadicScalar};

/// Homogeneous degree-`r` polynomial; `coeffs[i]` multiplies `x^{r-i} y^i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SymPoly {
    coeffs: Vec<Fq>,
}

impl SymPoly {
    pub fn zero(r: u32) -> Self {
        SymPoly { coeffs: vec![Fq::ZERO; r as usize + 1] }
    }

    /// `c x^{r-i} y^i`.
    pub fn monomial(r: u32, i: u32, c: Fq) -> Self {
        let mut p = Self::zero(r);
        p.coeffs[i as usize] = c;
        p
    }

    pub fn from_coeffs(coeffs: Vec<Fq>) -> Self {
        assert!(!coeffs.is_empty());
        SymPoly { coeffs }
    }

    pub fn degree(&self) -> u32 {
        self.coeffs.len() as u32 - 1
    }

    pub fn coeffs(&self) -> &[Fq] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn add(&self, k: &FiniteField, o: &Self) -> Self {
        SymPoly { coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(&a, &b)| k.add(a, b)).collect() }
    }

    pub fn scale(&self, k: &FiniteField, c: Fq) -> Self {
        SymPoly { coeffs: self.coeffs.iter().map(|&a| k.mul(a, c)).collect() }
    }

    /// `P(a x, b x + d y)`.
    pub fn transform(&self, k: &FiniteField, a: Fq, b: Fq, d: Fq) -> Self {
        let r = self.degree() as usize;
        let mut out = vec![Fq::ZERO; r + 1];
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            // c a^{r-i} (b x + d y)^i = sum_l C(i,l) b^{i-l} d^l x^{i-l} y^l
            let base = k.mul(c, k.pow_u(a, (r - i) as u64));
            let mut binom = 1u64;
            for l in 0..=i {
                let term = k.mul(
                    k.from_int(binom as i64),
                    k.mul(k.pow_u(b, (i - l) as u64), k.pow_u(d, l as u64)),
                );
                out[l] = k.add(out[l], k.mul(base, term));
                binom = binom * (i - l) as u64 / (l as u64 + 1);
            }
        }
        SymPoly { coeffs: out }
    }

    /// The coefficient `c` when the polynomial is `c x^r`.
    pub fn line_coeff(&self) -> Option<Fq> {
        self.coeffs[1..].iter().all(|c| c.is_zero()).then(|| self.coeffs[0])
    }
}

/// `b_{beta,delta}` with `beta = num / p^den_exp` reduced mod `Z`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CosetRep {
    pub num: u64,
    pub den_exp: u32,
    pub delta: i64,
}

impl CosetRep {
    pub fn identity() -> Self {
        CosetRep { num: 0, den_exp: 0, delta: 0 }
    }

    pub fn beta(&self, p: u32) -> PadicScalar {
        if self.num == 0 {
            PadicScalar::zero(p)
        } else {
            PadicScalar::from_p_fraction(p, self.num, self.den_exp)
        }
    }

    /// `[[1, beta], [0, p^delta]]`.
    pub fn elem(&self, p: u32) -> BorelElem {
        BorelElem { a: PadicScalar::one(p), b: self.beta(p), d: PadicScalar::p_power(p, self.delta) }
    }

    /// `[[1, -beta p^{-delta}], [0, p^{-delta}]]`.
    pub fn inv_elem(&self, p: u32) -> BorelElem {
        BorelElem {
            a: PadicScalar::one(p),
            b: self.beta(p).neg().shift(-self.delta),
            d: PadicScalar::p_power(p, -self.delta),
        }
    }
}

/// `u = p^m [[a0, b0], [0, d0]]` in `B n KZ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BkzPart {
    pub m: i64,
    pub a0: PadicScalar,
    pub b0: PadicScalar,
    pub d0: PadicScalar,
}

impl BkzPart {
    pub fn elem(&self) -> BorelElem {
        BorelElem { a: self.a0.shift(self.m), b: self.b0.shift(self.m), d: self.d0.shift(self.m) }
    }
}

/// `g = b_{beta,delta} u` with `u` in `B n KZ`, checked by re-multiplication.
pub fn coset_reduce(g: &BorelElem) -> Result<(CosetRep, BkzPart)> {
    let p = g.p();
    let m = g.a.valuation().ok_or(Error::SingularInput)?;
    let vd = g.d.valuation().ok_or(Error::SingularInput)?;
    let a0 = g.a.unit_part()?;
    let d0 = g.d.unit_part()?;
    let x = g.b.shift(-m).div(&d0)?;
    let (num, den_exp, rest) = x.split_principal()?;
    let rep = CosetRep { num, den_exp, delta: vd - m };
    let u = BkzPart { m, a0, b0: rest.mul(&d0), d0 };
    if !rep.elem(p).mul(&u.elem()).agrees_with(g) {
        return Err(Error::SingularInput);
    }
    Ok((rep, u))
}

/// One serialized term `[b_{beta,delta}, P]`; coefficients are field indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndRecord {
    pub beta_num: u64,
    pub beta_den_exp: u32,
    pub delta: i64,
    pub coeffs: Vec<u32>,
}

/// A finitely supported element of the induction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndVec {
    field: FiniteField,
    chars: CharacterData,
    terms: BTreeMap<CosetRep, SymPoly>,
}

impl IndVec {
    pub fn zero(field: &FiniteField, chars: &CharacterData) -> Self {
        IndVec { field: field.clone(), chars: chars.clone(), terms: BTreeMap::new() }
    }

    /// `[b_rep, poly]`.
    pub fn single(field: &FiniteField, chars: &CharacterData, rep: CosetRep, poly: SymPoly) -> Self {
        assert_eq!(poly.degree(), chars.r);
        let mut v = Self::zero(field, chars);
        v.insert(rep, poly);
        v
    }

    /// `[1, c x^r]`.
    pub fn x_r(field: &FiniteField, chars: &CharacterData, c: Fq) -> Self {
        Self::single(field, chars, CosetRep::identity(), SymPoly::monomial(chars.r, 0, c))
    }

    pub fn p(&self) -> u32 {
        self.field.p()
    }

    pub fn field(&self) -> &FiniteField {
        &self.field
    }

    pub fn chars(&self) -> &CharacterData {
        &self.chars
    }

    pub fn terms(&self) -> &BTreeMap<CosetRep, SymPoly> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn insert(&mut self, rep: CosetRep, poly: SymPoly) {
        let k = &self.field;
        let sum = match self.terms.remove(&rep) {
            Some(old) => old.add(k, &poly),
            None => poly,
        };
        if !sum.is_zero() {
            self.terms.insert(rep, sum);
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (rep, poly) in &o.terms {
            out.insert(*rep, poly.clone());
        }
        out
    }

    pub fn scale(&self, c: Fq) -> Self {
        let mut out = Self::zero(&self.field, &self.chars);
        for (rep, poly) in &self.terms {
            out.insert(*rep, poly.scale(&self.field, c));
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(self.field.neg(Fq::ONE)))
    }

    pub fn to_records(&self) -> Vec<IndRecord> {
        self.terms
            .iter()
            .map(|(rep, poly)| IndRecord {
                beta_num: rep.num,
                beta_den_exp: rep.den_exp,
                delta: rep.delta,
                coeffs: poly.coeffs.iter().map(|&c| self.field.index(c)).collect(),
            })
            .collect()
    }

    pub fn from_records(field: &FiniteField, chars: &CharacterData, records: &[IndRecord]) -> Result<Self> {
        let mut out = Self::zero(field, chars);
        for rec in records {
            if rec.coeffs.len() != chars.r as usize + 1 || rec.coeffs.iter().any(|&c| c >= field.order()) {
                return Err(Error::Parse("coefficient list does not match r or the field".into()));
            }
            let canonical = rec.beta_num == 0 && rec.beta_den_exp == 0
                || rec.beta_num % field.p() as u64 != 0
                    && rec.beta_num < (field.p() as u64).pow(rec.beta_den_exp);
            if !canonical {
                return Err(Error::Parse("beta is not a reduced representative".into()));
            }
            let rep = CosetRep { num: rec.beta_num, den_exp: rec.beta_den_exp, delta: rec.delta };
            let poly = SymPoly { coeffs: rec.coeffs.iter().map(|&c| field.from_index(c)).collect() };
            out.insert(rep, poly);
        }
        Ok(out)
    }
}

/// `u P` for `u` in `B n KZ`.
fn act_bkz(k: &FiniteField, chars: &CharacterData, u: &BkzPart, poly: &SymPoly) -> Result<SymPoly> {
    let p = k.p();
    let det = u.a0.mul(&u.d0).shift(2 * u.m);
    let scalar = chars.chi(&det, k)?;
    let t = poly.transform(k, u.a0.reduce(k)?, u.b0.reduce(k)?, u.d0.reduce(k)?);
    debug_assert_eq!(p, u.a0.p());
    Ok(t.scale(k, scalar))
}

/// `g F`: `g [b, P] = [b', u P]` where `g b = b' u`.
pub fn act_induction(g: &BorelElem, f: &IndVec) -> Result<IndVec> {
    let p = f.p();
    let mut out = IndVec::zero(&f.field, &f.chars);
    for (rep, poly) in &f.terms {
        let (rep2, u) = coset_reduce(&g.mul(&rep.elem(p)))?;
        out.insert(rep2, act_bkz(&f.field, &f.chars, &u, poly)?);
    }
    Ok(out)
}

/// `[[p, j], [0, 1]]`.
fn hecke_translate(j: &PadicScalar) -> BorelElem {
    let p = j.p();
    BorelElem { a: PadicScalar::p_power(p, 1), b: *j, d: PadicScalar::one(p) }
}

/// `T([1, x^{r-i} y^i])`.
fn hecke_on_monomial(
    k: &FiniteField,
    chars: &CharacterData,
    i: u32,
    reps: &[PadicScalar],
) -> Result<IndVec> {
    let r = chars.r;
    let p = k.p();
    let mut out = IndVec::zero(k, chars);
    for j in reps {
        let c = j.neg().pow_reduced(i, k)?;
        let x_r = IndVec::x_r(k, chars, c);
        out = out.add(&act_induction(&hecke_translate(j), &x_r)?);
    }
    if i == r {
        let y_r = IndVec::single(k, chars, CosetRep::identity(), SymPoly::monomial(r, r, Fq::ONE));
        let g = BorelElem::lower_diag(PadicScalar::p_power(p, 1))?;
        out = out.add(&act_induction(&g, &y_r)?);
    }
    Ok(out)
}

/// `T(F)`, extending `T([1, P])` linearly and `B`-equivariantly.
pub fn hecke_t(f: &IndVec, reps: &[PadicScalar]) -> Result<IndVec> {
    let k = &f.field;
    let p = f.p();
    check_representatives(p, reps)?;
    let basis = (0..=f.chars.r)
        .map(|i| hecke_on_monomial(k, &f.chars, i, reps))
        .collect::<Result<Vec<_>>>()?;
    let mut out = IndVec::zero(k, &f.chars);
    for (rep, poly) in &f.terms {
        for (i, &c) in poly.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            out = out.add(&act_induction(&rep.elem(p), &basis[i].scale(c))?);
        }
    }
    Ok(out)
}

/// Basis of `{lambda in F_p^p : sum_i i^l lambda_i = 0 for l < r}`.
pub fn moment_vectors(k: &FiniteField, r: u32) -> Vec<Vec<Fq>> {
    let p = k.p();
    let a: Vec<Vec<Fq>> = (0..r).map(|l| (0..p as u64).map(|i| int_pow(k, i, l)).collect()).collect();
    nullspace(k, &a, p as usize)
}

/// `sum_i lambda_i [[[1, i/p], [0, 1/p]], y^r]`, whose image under `T` is the
/// third generator family.
pub fn moment_source(k: &FiniteField, chars: &CharacterData, lambdas: &[Fq]) -> IndVec {
    let p = k.p();
    let mut out = IndVec::zero(k, chars);
    for (i, &l) in lambdas.iter().enumerate() {
        let rep = CosetRep { num: i as u64, den_exp: u32::from(i != 0), delta: -1 };
        out.insert(rep, SymPoly::monomial(chars.r, chars.r, l));
    }
    debug_assert!(lambdas.len() == p as usize);
    out
}

/// Generators of the part of the Hecke image lying in `ind(omega^r (x) 1)`:
/// one vector for `r = 0`; for `r >= 1` the `r` lower vectors followed by one
/// vector per entry of `moment`.
pub fn kernel_generators(
    k: &FiniteField,
    chars: &CharacterData,
    reps: &[PadicScalar],
    moment: &[Vec<Fq>],
) -> Result<Vec<IndVec>> {
    let p = k.p();
    let r = chars.r;
    check_representatives(p, reps)?;
    let hecke_sum = |e: u32| -> Result<IndVec> {
        let mut out = IndVec::zero(k, chars);
        for j in reps {
            let x_r = IndVec::x_r(k, chars, j.neg().pow_reduced(e, k)?);
            out = out.add(&act_induction(&hecke_translate(j), &x_r)?);
        }
        Ok(out)
    };
    if r == 0 {
        let one = IndVec::x_r(k, chars, Fq::ONE);
        let g = BorelElem::lower_diag(PadicScalar::p_power(p, 1))?;
        return Ok(vec![act_induction(&g, &one)?.add(&hecke_sum(0)?)]);
    }
    let mut gens = (0..r).map(hecke_sum).collect::<Result<Vec<_>>>()?;
    for lambdas in moment {
        if lambdas.len() != p as usize {
            return Err(Error::ParameterOutOfRange("moment vector must have length p".into()));
        }
        if let Some(l) = first_violated_moment(k, r, lambdas) {
            return Err(Error::MomentConditionViolated(l));
        }
        gens.push(moment_generator(k, chars, reps, lambdas)?);
    }
    Ok(gens)
}

/// Window depth and `y_0` precision sufficient for [`evaluate_pi`] on `f`.
///
/// `theta(b^{-1} * w)` for `b = b_{beta,delta}`, `beta` with denominator
/// `p^e`, reads `y_{e+delta}` through `e` applications of `psi`, or `y_0`
/// through `-delta` of them when `e + delta < 0`; either way a downward
/// window with `y_0` known modulo `X^{p^{-delta}}` suffices.
pub fn window_requirements(f: &IndVec) -> (usize, i64) {
    let p = f.p() as i64;
    let mut depth = 0i64;
    let mut shift = 0i64;
    for rep in f.terms.keys() {
        depth = depth.max(rep.den_exp as i64 + rep.delta);
        shift = shift.max(-rep.delta);
    }
    (depth as usize, p.pow(shift as u32).max(1))
}

/// `sum_i lambda_i i^r [1, x^r] + sum_i lambda_i [[1, i/p], [0, 1/p]] sum_J (-j)^r [[p, j], [0, 1]] [1, x^r]`,
/// built without checking the moment conditions (negative controls use this).
pub fn moment_generator(
    k: &FiniteField,
    chars: &CharacterData,
    reps: &[PadicScalar],
    lambdas: &[Fq],
) -> Result<IndVec> {
    let p = k.p();
    let r = chars.r;
    let mp = max_precision(p);
    let mut top = IndVec::zero(k, chars);
    for j in reps {
        let x_r = IndVec::x_r(k, chars, j.neg().pow_reduced(r, k)?);
        top = top.add(&act_induction(&hecke_translate(j), &x_r)?);
    }
    let mut g = IndVec::zero(k, chars);
    let mut lead = Fq::ZERO;
    for (i, &li) in lambdas.iter().enumerate() {
        lead = k.add(lead, k.mul(li, int_pow(k, i as u64, r)));
        let b = BorelElem::new(
            PadicScalar::one(p),
            PadicScalar::from_int(p, i as i64, mp).shift(-1),
            PadicScalar::p_power(p, -1),
        )?;
        g = g.add(&act_induction(&b, &top)?.scale(li));
    }
    Ok(g.add(&IndVec::x_r(k, chars, lead)))
}

/// Memo of `theta(b^{-1} * w)` per coset representative, for one window.
pub type ThetaCache = HashMap<CosetRep, Fq>;

/// `pi_W(F)(w) = sum c_b theta(b^{-1} * w)` where `F = sum [b, c_b x^r]`.
pub fn evaluate_pi(f: &IndVec, w: &PsiWindow) -> Result<Fq> {
    evaluate_pi_cached(f, w, &mut ThetaCache::new())
}

pub fn evaluate_pi_cached(f: &IndVec, w: &PsiWindow, cache: &mut ThetaCache) -> Result<Fq> {
    let k = &f.field;
    let p = f.p();
    let mut acc = Fq::ZERO;
    for (rep, poly) in &f.terms {
        let c = poly.line_coeff().ok_or(Error::ValueOutsideLine)?;
        let t = match cache.get(rep) {
            Some(&t) => t,
            None => {
                let t = w.theta_after(&rep.inv_elem(p))?;
                cache.insert(*rep, t);
                t
            }
        };
        acc = k.add(acc, k.mul(c, t));
    }
    Ok(acc)
}
