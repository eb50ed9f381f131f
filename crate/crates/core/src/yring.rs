//! The ring `F_{p^m}((Y))` with `Y^e = X`, `e = (p^n - 1)/(p - 1)`, used to
//! check the level-`n` structure of `D(ind(omega_n^h))`.
//!
//! Galois elements act on `Y` by `Y -> c Y f_a^{-(p-1)/(p^n-1)}(X)`. The scalar
//! `c` stands in for `omega_n^p(g)`, which is not modeled; the only constraint
//! imposed on it is the one forced by `Y^e = X`, namely `c^e = omega(a)`.
//!
//! `phi` on `F_{p^n} (x) E` is modeled on the product ring `prod_{k<n} F((Y))`,
//! where it shifts components cyclically and applies the absolute Frobenius.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ffield::{FiniteField, Fq};
use crate::modules::{build_ind, PhiGammaModule};
use crate::padic::{omega_char, PadicScalar};
use crate::series::{f_gamma, CharSeries};

/// `(p^n - 1)/(p - 1)`.
pub fn ramification(p: u32, n: u32) -> u64 {
    ((p as u64).pow(n) - 1) / (p as u64 - 1)
}

/// A Laurent series in `Y` with `X = Y^e`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct YRingElem {
    series: CharSeries,
    e: u64,
}

impl YRingElem {
    pub fn new(series: CharSeries, e: u64) -> Self {
        YRingElem { series, e }
    }

    /// The image of an `X`-series: `X^d` becomes `Y^{ed}`.
    pub fn from_x(f: &CharSeries, e: u64) -> Self {
        YRingElem { series: f.stretch(e as u32), e }
    }

    /// `Y` itself, known modulo `Y^n`.
    pub fn y(field: &FiniteField, e: u64, n: i64) -> Self {
        YRingElem { series: CharSeries::x(field).truncate(n), e }
    }

    pub fn series(&self) -> &CharSeries {
        &self.series
    }

    pub fn e(&self) -> u64 {
        self.e
    }

    pub fn mul(&self, other: &Self) -> Self {
        YRingElem { series: self.series.mul(&other.series), e: self.e }
    }

    pub fn pow(&self, k: i64) -> Result<Self> {
        Ok(YRingElem { series: self.series.pow_int(k)?, e: self.e })
    }

    pub fn agrees_with(&self, other: &Self) -> bool {
        self.e == other.e && self.series.agrees_with(&other.series)
    }
}

/// Applies `Y -> c Y f_a^{-(p-1)/(p^n-1)}(Y^e)` (and hence `X -> gamma_a(X)`).
///
/// Constants are fixed. Fails with `InconsistentOmegaN` unless `c^e = omega(a)`.
pub fn yon_action(u: &YRingElem, a: &PadicScalar, c: Fq) -> Result<YRingElem> {
    let k = u.series.field();
    let p = k.p();
    let e = u.e;
    if k.pow_u(c, e) != omega_char(a, k)? {
        return Err(Error::InconsistentOmegaN);
    }
    if u.series.is_zero() {
        return Ok(u.clone());
    }
    let n = u.series.prec();
    // the Y-image needs n - v + 1 terms; in X that is ceil(.. / e) terms
    let y_terms = n - u.series.order() + 1;
    let x_terms = (y_terms + e as i64 - 1) / e as i64 + 1;
    let level_num = -(p as i64 - 1);
    let level_den = (p as i64 - 1) * e as i64;
    let expo = PadicScalar::from_ratio(p, level_num, level_den, crate::padic::max_precision(p))?;
    let big_f = f_gamma(k, a, x_terms)?.padic_pow(&expo)?;
    let g = CharSeries::monomial(k, c, 1)
        .mul(&big_f.stretch(e as u32))
        .truncate(y_terms + 1);
    Ok(YRingElem { series: u.series.compose(&g)?, e })
}

/// An element of `(prod_{k<n} F((Y))) (x) D`: `comps[k][i]` is component `k`
/// of the coefficient of `e_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductVec {
    comps: Vec<Vec<CharSeries>>,
}

impl ProductVec {
    pub fn component(&self, k: usize, i: usize) -> &CharSeries {
        &self.comps[k][i]
    }

    pub fn agrees_with(&self, other: &Self) -> bool {
        self.comps
            .iter()
            .zip(&other.comps)
            .all(|(a, b)| a.iter().zip(b).all(|(x, y)| x.agrees_with(y)))
    }

    /// Smallest precision over all components.
    pub fn prec(&self) -> i64 {
        self.comps.iter().flatten().map(|c| c.prec()).min().unwrap()
    }
}

/// `v_j = sum_i (alpha^{p^i} Y^{p^i h} in component (i + j) mod n) e_i`, known
/// modulo `Y^prec`.
pub fn build_v(field: &FiniteField, n: u32, h: u64, alpha: Fq, j: usize, prec: i64) -> ProductVec {
    let p = field.p() as u64;
    let n = n as usize;
    let mut comps = vec![vec![CharSeries::zero(field, prec); n]; n];
    let mut a = alpha;
    for i in 0..n {
        let deg = (p.pow(i as u32) * h) as i64;
        comps[(i + j) % n][i] = CharSeries::monomial(field, a, deg).truncate(prec);
        a = field.frobenius(a);
    }
    ProductVec { comps }
}

/// `phi` on the product ring tensor `D`: component `k` of the result is the
/// absolute Frobenius of component `k - 1`, and `phi(e_i)` comes from `Mat(phi)`,
/// whose entries lie in `F_p((X))` and embed diagonally.
pub fn product_phi(module: &PhiGammaModule, v: &ProductVec, e: u64) -> ProductVec {
    let field = module.field();
    let n = v.comps.len();
    let rank = module.rank();
    let mphi = module.phi_matrix();
    let mut comps = vec![vec![CharSeries::exact_zero(field); rank]; n];
    for k in 0..n {
        let src = &v.comps[(k + n - 1) % n];
        for (i, x) in src.iter().enumerate() {
            let fx = x.phi();
            for (l, row) in mphi.iter().enumerate() {
                if row[i].is_zero() {
                    continue;
                }
                let entry = row[i].stretch(e as u32);
                comps[k][l] = comps[k][l].add(&fx.mul(&entry));
            }
        }
    }
    ProductVec { comps }
}

/// Outcome of the structural checks on `D(ind(omega_n^h))`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IndStructureReport {
    pub p: u32,
    pub n: u32,
    pub h: u64,
    pub wedge_phi_fixed: bool,
    /// `gamma_a(f) = omega(a)^h f` for each sampled unit.
    pub wedge_gamma: Vec<bool>,
    pub commutation: Vec<bool>,
    /// `phi(v_j) = v_j` for each `j`, compared modulo `Y^{v_precision}`.
    pub v_fixed: Vec<bool>,
    pub v_precision: i64,
}

impl IndStructureReport {
    pub fn all_pass(&self) -> bool {
        self.wedge_phi_fixed
            && self.wedge_gamma.iter().all(|&b| b)
            && self.commutation.iter().all(|&b| b)
            && self.v_fixed.iter().all(|&b| b)
    }
}

/// Runs every structural check for `ind(omega_n^h)` over `field`, which must
/// contain `F_{p^{2n}}`. `units` are the sampled `a`, `prec` the `X`-precision
/// of the `Gamma` checks and `y_prec` the `Y`-precision of the `v_j` checks.
pub fn verify_ind_structure(
    field: &FiniteField,
    n: u32,
    h: u64,
    units: &[PadicScalar],
    prec: i64,
    y_prec: i64,
) -> Result<IndStructureReport> {
    let p = field.p();
    let module = build_ind(field, n, h)?;
    let mut wedge_phi_fixed = true;
    let mut wedge_gamma = Vec::new();
    let mut commutation = Vec::new();
    for a in units {
        let (phi_ok, gamma_ok) = module.check_determinant(a, prec)?;
        wedge_phi_fixed &= phi_ok;
        wedge_gamma.push(gamma_ok);
        let (ok, compared) = module.check_commutation(a, prec + module.phi_pole())?;
        commutation.push(ok && compared >= prec);
    }
    let alpha = field.solve_alpha(n)?;
    let e = ramification(p, n);
    let mut v_fixed = Vec::new();
    let mut v_precision = i64::MAX;
    for j in 0..n as usize {
        // the pole of Mat(phi) costs a fixed amount of Y-precision
        let probe = build_v(field, n, h, alpha, j, y_prec);
        let loss = (probe.prec() - product_phi(&module, &probe, e).prec()).max(0);
        let v = build_v(field, n, h, alpha, j, y_prec + loss);
        let w = product_phi(&module, &v, e);
        v_precision = v_precision.min(w.prec().min(v.prec()));
        v_fixed.push(w.agrees_with(&v) && w.prec().min(v.prec()) >= y_prec);
    }
    Ok(IndStructureReport {
        p,
        n,
        h,
        wedge_phi_fixed,
        wedge_gamma,
        commutation,
        v_fixed,
        v_precision,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modules::is_primitive_exponent;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Some `c` with `c^e = omega(a)`, found by search.
    fn consistent_c(k: &FiniteField, a: &PadicScalar, e: u64) -> Fq {
        let w = omega_char(a, k).unwrap();
        k.elements().find(|&c| k.pow_u(c, e) == w).unwrap()
    }

    #[test]
    fn identity_action() {
        let k = FiniteField::new(3, 4).unwrap();
        let e = ramification(3, 2);
        let y = YRingElem::y(&k, e, 30);
        assert_eq!(yon_action(&y, &PadicScalar::one(3), Fq::ONE).unwrap(), y);
        let bad = k.generator();
        assert_eq!(
            yon_action(&y, &PadicScalar::one(3), bad),
            Err(Error::InconsistentOmegaN)
        );
    }

    #[test]
    fn action_is_compatible_with_x() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (p, n) in [(3u32, 2u32), (5, 2), (3, 1)] {
            let k = FiniteField::new(p, 2 * n).unwrap();
            let e = ramification(p, n);
            for _ in 0..5 {
                let a = PadicScalar::random_unit(p, 10, &mut rng);
                let c = consistent_c(&k, &a, e);
                let gy = yon_action(&YRingElem::y(&k, e, 60), &a, c).unwrap();
                let lhs = gy.pow(e as i64).unwrap();
                let gx = CharSeries::x(&k).truncate(60).gamma_subst(&a).unwrap();
                let rhs = YRingElem::from_x(&gx, e);
                assert!(lhs.agrees_with(&rhs));
                assert!(lhs.series().prec() >= 60);
            }
        }
    }

    #[test]
    fn action_composes() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (p, n) = (3u32, 2u32);
        let k = FiniteField::new(p, 4).unwrap();
        let e = ramification(p, n);
        for _ in 0..5 {
            let a = PadicScalar::random_unit(p, 10, &mut rng);
            let b = PadicScalar::random_unit(p, 10, &mut rng);
            let c = consistent_c(&k, &a, e);
            let d = consistent_c(&k, &b, e);
            let u = YRingElem::new(CharSeries::random(&k, -2, 40, &mut rng), e);
            let two_steps = yon_action(&yon_action(&u, &a, c).unwrap(), &b, d).unwrap();
            let one_step = yon_action(&u, &a.mul(&b), k.mul(c, d)).unwrap();
            assert!(two_steps.agrees_with(&one_step));
        }
    }

    #[test]
    fn level_one_wedge_is_symbolic() {
        let k = FiniteField::new(5, 2).unwrap();
        for h in 1..=3u64 {
            let rep = verify_ind_structure(&k, 1, h, &[PadicScalar::one(5)], 30, 50).unwrap();
            assert!(rep.all_pass());
        }
    }

    #[test]
    fn v_vectors_are_phi_fixed() {
        let k = FiniteField::new(3, 4).unwrap();
        let units = [PadicScalar::from_int(3, 2, 20), PadicScalar::from_int(3, 7, 20)];
        for h in 1..=7u64 {
            if !is_primitive_exponent(3, 2, h) {
                continue;
            }
            let rep = verify_ind_structure(&k, 2, h, &units, 40, 200).unwrap();
            assert!(rep.all_pass(), "{rep:?}");
        }
    }

    #[test]
    fn wrong_alpha_breaks_fixedness() {
        let k = FiniteField::new(3, 4).unwrap();
        let module = build_ind(&k, 2, 1).unwrap();
        let v = build_v(&k, 2, 1, Fq::ONE, 0, 50);
        assert!(!product_phi(&module, &v, 4).agrees_with(&v));
    }
}
