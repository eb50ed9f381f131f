//! The étale `(phi, Gamma)`-modules `D(ind(omega_n^h))` and `D(rho(r, chi))`,
//! the operator `psi` on them, and the lattice `D#` of `rho(r, chi)`.
//!
//! Both families have a monomial `Mat(phi)`: `phi(e_j) = c_j X^{d_j} e_{pi(j)}`.
//! `Mat(gamma_a)` is diagonal with entries `omega(a)^s f_a^{t_j}`. Coefficients
//! live in `k`, and `phi`, `psi` act `k`-linearly on them.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ffield::{FiniteField, Fq};
use crate::padic::{max_precision, omega_char, PadicScalar};
use crate::series::{f_gamma, psi_section, CharSeries, Flavor};

/// Coordinates of a module element in the fixed basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModVec {
    coords: Vec<CharSeries>,
}

impl ModVec {
    pub fn new(coords: Vec<CharSeries>) -> Self {
        assert!(!coords.is_empty());
        ModVec { coords }
    }

    pub fn zero(field: &FiniteField, rank: usize, prec: i64) -> Self {
        Self::new(vec![CharSeries::zero(field, prec); rank])
    }

    /// `g e_i`.
    pub fn basis(field: &FiniteField, rank: usize, i: usize, g: CharSeries) -> Self {
        let mut coords = vec![CharSeries::exact_zero(field); rank];
        coords[i] = g;
        Self::new(coords)
    }

    pub fn rank(&self) -> usize {
        self.coords.len()
    }

    pub fn coord(&self, i: usize) -> &CharSeries {
        &self.coords[i]
    }

    pub fn coords(&self) -> &[CharSeries] {
        &self.coords
    }

    pub fn field(&self) -> &FiniteField {
        self.coords[0].field()
    }

    /// Smallest coordinate precision.
    pub fn prec(&self) -> i64 {
        self.coords.iter().map(|c| c.prec()).min().unwrap()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    pub fn map(&self, f: impl Fn(&CharSeries) -> CharSeries) -> Self {
        Self::new(self.coords.iter().map(f).collect())
    }

    pub fn try_map(&self, f: impl Fn(&CharSeries) -> Result<CharSeries>) -> Result<Self> {
        Ok(Self::new(self.coords.iter().map(f).collect::<Result<_>>()?))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(self.coords.iter().zip(&other.coords).map(|(a, b)| a.add(b)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::new(self.coords.iter().zip(&other.coords).map(|(a, b)| a.sub(b)).collect())
    }

    pub fn scale(&self, c: Fq) -> Self {
        self.map(|a| a.scale(c))
    }

    /// Multiplication by a scalar series.
    pub fn mul_series(&self, g: &CharSeries) -> Self {
        self.map(|a| a.mul(g))
    }

    pub fn mul_one_plus_x_pow(&self, w: &PadicScalar) -> Result<Self> {
        self.try_map(|a| a.mul_one_plus_x_pow(w))
    }

    pub fn truncate(&self, n: i64) -> Self {
        self.map(|a| a.truncate(n))
    }

    pub fn agrees_with(&self, other: &Self) -> bool {
        self.rank() == other.rank()
            && self.coords.iter().zip(&other.coords).all(|(a, b)| a.agrees_with(b))
    }

    /// One coordinate per line in the series text format.
    pub fn to_text(&self) -> String {
        self.coords.iter().map(|c| c.to_text()).collect::<Vec<_>>().join("\n")
    }
}

/// Which family a module belongs to.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "family")]
pub enum ModuleKind {
    #[serde(rename = "ind")]
    Ind { n: u32, h: u64 },
    #[serde(rename = "rho")]
    Rho { r: u32, s: u32, lambda: String },
}

/// Configuration record of a module, for reports.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ModuleDescriptor {
    pub p: u32,
    pub field_degree: u32,
    pub field_modulus: String,
    #[serde(flatten)]
    pub kind: ModuleKind,
}

/// `phi(e_j) = coeff X^{exp} e_target`.
#[derive(Clone, Debug, PartialEq, Eq)]
struct PhiColumn {
    target: usize,
    coeff: Fq,
    exp: i64,
}

type GammaKey = (u64, i64);

pub struct PhiGammaModule {
    field: FiniteField,
    kind: ModuleKind,
    rho: Option<(u32, u32, Fq)>,
    phi_cols: Vec<PhiColumn>,
    gamma_exps: Vec<PadicScalar>,
    omega_power: u32,
    padic_prec: u32,
    pole_bound: i64,
    gamma_cache: RwLock<HashMap<GammaKey, Arc<Vec<CharSeries>>>>,
}

impl std::fmt::Debug for PhiGammaModule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "PhiGammaModule({:?})", self.descriptor())
    }
}

/// True when the base-`p` digits `h_0 .. h_{n-1}` have no cyclic period shorter than `n`.
pub fn is_primitive_exponent(p: u32, n: u32, h: u64) -> bool {
    let digits: Vec<u64> = (0..n).map(|i| (h / (p as u64).pow(i)) % p as u64).collect();
    (1..n).filter(|d| n % d == 0).all(|d| {
        (0..n as usize).any(|i| digits[i] != digits[(i + d as usize) % n as usize])
    })
}

/// Builds `D(ind(omega_n^h))`: `phi(e_j) = e_{j+1}`,
/// `phi(e_{n-1}) = (-1)^{n-1} X^{-h(p-1)} e_0` and
/// `gamma_a(e_j) = f_a^{h p^j (p-1)/(p^n-1)} e_j`.
pub fn build_ind(field: &FiniteField, n: u32, h: u64) -> Result<PhiGammaModule> {
    let p = field.p();
    if n == 0 {
        return Err(Error::ParameterOutOfRange("n = 0".into()));
    }
    let pn = (p as u64).checked_pow(n).ok_or_else(|| Error::ParameterOutOfRange("p^n overflows".into()))?;
    if h < 1 || h > pn - 2 {
        return Err(Error::ExponentOutOfRange { h, max: pn - 2 });
    }
    if !is_primitive_exponent(p, n, h) {
        return Err(Error::NonPrimitiveExponent(h));
    }
    let sign = if n % 2 == 1 { Fq::ONE } else { field.neg(Fq::ONE) };
    let mut phi_cols: Vec<PhiColumn> = (0..n as usize - 1)
        .map(|j| PhiColumn { target: j + 1, coeff: Fq::ONE, exp: 0 })
        .collect();
    phi_cols.push(PhiColumn {
        target: 0,
        coeff: sign,
        exp: -(h as i64) * (p as i64 - 1),
    });
    let mp = max_precision(p);
    let gamma_exps = (0..n)
        .map(|j| {
            let num = h as i64 * (p as i64).pow(j) * (p as i64 - 1);
            PadicScalar::from_ratio(p, num, pn as i64 - 1, mp)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PhiGammaModule::assemble(
        field,
        ModuleKind::Ind { n, h },
        None,
        phi_cols,
        gamma_exps,
        0,
    ))
}

/// Builds `D(rho(r, chi))` for `chi = omega^s mu_lambda` in the basis `(e, f)`:
/// `phi(e) = lambda f`, `phi(f) = -lambda X^{-(r+1)(p-1)} e`,
/// `gamma_a = omega(a)^s diag(f_a^{(r+1)/(p+1)}, f_a^{p(r+1)/(p+1)})`.
pub fn build_rho(field: &FiniteField, r: u32, s: i64, lambda: Fq) -> Result<PhiGammaModule> {
    let p = field.p();
    if r > p - 1 {
        return Err(Error::ParameterOutOfRange(format!("r = {r} exceeds p - 1 = {}", p - 1)));
    }
    if lambda.is_zero() {
        return Err(Error::ParameterOutOfRange("lambda = 0".into()));
    }
    let s = s.rem_euclid(p as i64 - 1) as u32;
    let c = (r as i64 + 1) * (p as i64 - 1);
    let phi_cols = vec![
        PhiColumn { target: 1, coeff: lambda, exp: 0 },
        PhiColumn { target: 0, coeff: field.neg(lambda), exp: -c },
    ];
    let mp = max_precision(p);
    let gamma_exps = vec![
        PadicScalar::from_ratio(p, r as i64 + 1, p as i64 + 1, mp)?,
        PadicScalar::from_ratio(p, p as i64 * (r as i64 + 1), p as i64 + 1, mp)?,
    ];
    Ok(PhiGammaModule::assemble(
        field,
        ModuleKind::Rho { r, s, lambda: field.to_digits(lambda) },
        Some((r, s, lambda)),
        phi_cols,
        gamma_exps,
        s,
    ))
}

impl PhiGammaModule {
    fn assemble(
        field: &FiniteField,
        kind: ModuleKind,
        rho: Option<(u32, u32, Fq)>,
        phi_cols: Vec<PhiColumn>,
        gamma_exps: Vec<PadicScalar>,
        omega_power: u32,
    ) -> Self {
        let p = field.p() as i64;
        let deepest = phi_cols.iter().map(|c| -c.exp).max().unwrap_or(0);
        PhiGammaModule {
            field: field.clone(),
            kind,
            rho,
            pole_bound: p * deepest * phi_cols.len() as i64 + 2 * p,
            phi_cols,
            gamma_exps,
            omega_power,
            padic_prec: max_precision(field.p()),
            gamma_cache: RwLock::new(HashMap::new()),
        }
    }

    pub fn field(&self) -> &FiniteField {
        &self.field
    }

    pub fn p(&self) -> u32 {
        self.field.p()
    }

    pub fn rank(&self) -> usize {
        self.phi_cols.len()
    }

    pub fn kind(&self) -> &ModuleKind {
        &self.kind
    }

    /// `(r, s, lambda)` for a `rho(r, chi)` module.
    pub fn rho_params(&self) -> Result<(u32, u32, Fq)> {
        self.rho.ok_or(Error::NotRhoModule)
    }

    /// `c = (r+1)(p-1)` for `rho(r, chi)`.
    pub fn rho_c(&self) -> Result<i64> {
        let (r, _, _) = self.rho_params()?;
        Ok((r as i64 + 1) * (self.p() as i64 - 1))
    }

    pub fn descriptor(&self) -> ModuleDescriptor {
        ModuleDescriptor {
            p: self.p(),
            field_degree: self.field.degree(),
            field_modulus: self.field.modulus_string(),
            kind: self.kind.clone(),
        }
    }

    /// Deepest pole accepted by `phi` and `psi`.
    pub fn pole_bound(&self) -> i64 {
        self.pole_bound
    }

    pub fn set_pole_bound(&mut self, bound: i64) {
        self.pole_bound = bound;
    }

    /// Diagonal exponents `t_j` of `Mat(gamma_a) = omega(a)^s diag(f_a^{t_j})`.
    pub fn gamma_exponents(&self) -> &[PadicScalar] {
        &self.gamma_exps
    }

    /// `Mat(phi)` as a dense matrix of exact monomials (columns are `phi(e_j)`).
    pub fn phi_matrix(&self) -> Vec<Vec<CharSeries>> {
        let n = self.rank();
        let mut m = vec![vec![CharSeries::exact_zero(&self.field); n]; n];
        for (j, col) in self.phi_cols.iter().enumerate() {
            m[col.target][j] = CharSeries::monomial(&self.field, col.coeff, col.exp);
        }
        m
    }

    fn check_poles(&self, v: &ModVec) -> Result<()> {
        v.coords().iter().try_for_each(|c| c.check_pole(self.pole_bound))
    }

    /// `phi(sum a_j e_j) = sum phi(a_j) c_j X^{d_j} e_{pi(j)}`.
    pub fn apply_phi(&self, v: &ModVec) -> Result<ModVec> {
        self.check_poles(v)?;
        let mut out = vec![CharSeries::exact_zero(&self.field); self.rank()];
        for (j, col) in self.phi_cols.iter().enumerate() {
            let term = v.coord(j).phi_linear().shift(col.exp).scale(col.coeff);
            out[col.target] = term;
        }
        Ok(ModVec::new(out))
    }

    /// `psi(v)`: writing `e_{pi(j)} = c_j^{-1} X^{-d_j} phi(e_j)`, the
    /// `e_j`-coordinate of `psi(v)` is `psi(c_j^{-1} X^{-d_j} a_{pi(j)})`.
    pub fn apply_psi(&self, v: &ModVec) -> Result<ModVec> {
        self.check_poles(v)?;
        let k = &self.field;
        let out = self
            .phi_cols
            .iter()
            .map(|col| {
                let cinv = k.inv(col.coeff).expect("nonzero");
                v.coord(col.target).shift(-col.exp).scale(cinv).psi_linear()
            })
            .collect();
        Ok(ModVec::new(out))
    }

    /// `psi(alpha e + beta f) = psi(beta) lambda^{-1} e - psi(X^{(r+1)(p-1)} alpha) lambda^{-1} f`.
    pub fn apply_psi_rho(&self, v: &ModVec) -> Result<ModVec> {
        let (_, _, lambda) = self.rho_params()?;
        let k = &self.field;
        let li = k.inv(lambda).expect("nonzero");
        let c = self.rho_c()?;
        let e = v.coord(1).psi_linear().scale(li);
        let f = v.coord(0).shift(c).psi_linear().scale(k.neg(li));
        Ok(ModVec::new(vec![e, f]))
    }

    /// Diagonal of `Mat(gamma_a)` modulo `X^n`, memoized by `(a mod p^M, n)`.
    pub fn gamma_diagonal(&self, a: &PadicScalar, n: i64) -> Result<Arc<Vec<CharSeries>>> {
        let key = a.residue(self.padic_prec).ok().map(|res| (res, n));
        if let Some(key) = key {
            if let Some(hit) = self.gamma_cache.read().unwrap().get(&key) {
                return Ok(hit.clone());
            }
        }
        let k = &self.field;
        let fa = f_gamma(k, a, n)?;
        let w = k.pow_u(omega_char(a, k)?, self.omega_power as u64);
        let diag = self
            .gamma_exps
            .iter()
            .map(|t| Ok(fa.padic_pow(t)?.scale(w)))
            .collect::<Result<Vec<_>>>()?;
        let diag = Arc::new(diag);
        if let Some(key) = key {
            self.gamma_cache.write().unwrap().entry(key).or_insert_with(|| diag.clone());
        }
        Ok(diag)
    }

    /// `gamma_a(sum a_j e_j) = sum gamma_a(a_j) Mat(gamma_a)_{jj} e_j`.
    pub fn apply_gamma(&self, a: &PadicScalar, v: &ModVec) -> Result<ModVec> {
        let need = v
            .coords()
            .iter()
            .filter(|c| !c.is_exact())
            .map(|c| c.prec() - c.order().min(0).min(c.prec()))
            .max()
            .ok_or(Error::UnboundedPrecision)?;
        let need = need.max(1);
        let diag = self.gamma_diagonal(a, need)?;
        let out = v
            .coords()
            .iter()
            .zip(diag.iter())
            .map(|(c, d)| Ok(c.gamma_subst(a)?.mul(d)))
            .collect::<Result<Vec<_>>>()?;
        Ok(ModVec::new(out))
    }

    /// Order of the deepest pole of `Mat(phi)`; comparisons modulo `X^n`
    /// need inputs known modulo `X^{n + phi_pole}`.
    pub fn phi_pole(&self) -> i64 {
        self.phi_matrix()
            .iter()
            .flatten()
            .filter(|c| !c.is_zero())
            .map(|c| -c.order())
            .max()
            .unwrap_or(0)
            .max(0)
    }

    /// Compares `Mat(gamma_a) gamma_a(Mat(phi))` with `Mat(phi) phi(Mat(gamma_a))`
    /// modulo `X^n`. Returns whether they agree and the precision compared.
    pub fn check_commutation(&self, a: &PadicScalar, n: i64) -> Result<(bool, i64)> {
        let rank = self.rank();
        let diag = self.gamma_diagonal(a, n)?;
        let mphi = self.phi_matrix();
        let mut ok = true;
        let mut compared = i64::MAX;
        for l in 0..rank {
            for j in 0..rank {
                // both matrices are sparse: Mat(gamma) diagonal, Mat(phi) monomial
                let g_phi = mphi[l][j].truncate(n).gamma_subst(a)?;
                let lhs = diag[l].mul(&g_phi);
                let rhs = mphi[l][j].mul(&diag[j].phi_linear());
                let prec = lhs.prec().min(rhs.prec());
                compared = compared.min(prec);
                ok &= lhs.agrees_with(&rhs);
            }
        }
        Ok((ok, compared))
    }

    /// `det Mat(phi) = sign(pi) prod c_j X^{d_j}`.
    pub fn phi_determinant(&self) -> CharSeries {
        let k = &self.field;
        let n = self.rank();
        let mut seen = vec![false; n];
        let mut sign_neg = false;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                i = self.phi_cols[i].target;
                len += 1;
            }
            if len % 2 == 0 {
                sign_neg = !sign_neg;
            }
        }
        let mut c = if sign_neg { k.neg(Fq::ONE) } else { Fq::ONE };
        let mut e = 0;
        for col in &self.phi_cols {
            c = k.mul(c, col.coeff);
            e += col.exp;
        }
        CharSeries::monomial(k, c, e)
    }

    /// Checks the top exterior power: for `ind(omega_n^h)`, `f = X^h e_0 ^ ... ^ e_{n-1}`
    /// has `phi(f) = f` and `gamma_a(f) = omega(a)^h f`; for `rho(r, chi)`,
    /// `f = X^{r+1} e ^ f` has `phi(f) = lambda^2 f` and
    /// `gamma_a(f) = omega(a)^{r+1+2s} f`. Returns `(phi_ok, gamma_ok)`.
    pub fn check_determinant(&self, a: &PadicScalar, n: i64) -> Result<(bool, bool)> {
        let k = &self.field;
        let (h, phi_scalar, omega_exp) = match (&self.kind, self.rho) {
            (ModuleKind::Ind { h, .. }, _) => (*h as i64, Fq::ONE, *h),
            (_, Some((r, s, lambda))) => {
                (r as i64 + 1, k.mul(lambda, lambda), r as u64 + 1 + 2 * s as u64)
            }
            _ => unreachable!(),
        };
        let xh = CharSeries::monomial(k, Fq::ONE, h);
        let phi_f = xh.phi_linear().mul(&self.phi_determinant());
        let phi_ok = phi_f == xh.scale(phi_scalar);
        let diag = self.gamma_diagonal(a, n)?;
        let mut gamma_f = xh.truncate(n + h).gamma_subst(a)?;
        for d in diag.iter() {
            gamma_f = gamma_f.mul(d);
        }
        let w = k.pow_u(omega_char(a, k)?, omega_exp);
        let expect = xh.scale(w).truncate(gamma_f.prec());
        let gamma_ok = gamma_f.prec() >= n && gamma_f.agrees_with(&expect);
        Ok((phi_ok, gamma_ok))
    }

    /// `v` lies in `D# = k[[X]] e + X^r k[[X]] f`.
    pub fn dsharp_contains(&self, v: &ModVec) -> Result<bool> {
        let (r, _, _) = self.rho_params()?;
        Ok(v.coord(0).order() >= 0 && v.coord(1).order() >= r as i64)
    }

    /// Uniform element of `D#` known modulo `X^n`.
    pub fn dsharp_random<R: Rng + ?Sized>(&self, n: i64, rng: &mut R) -> Result<ModVec> {
        let (r, _, _) = self.rho_params()?;
        let k = &self.field;
        Ok(ModVec::new(vec![
            CharSeries::random(k, 0, n, rng),
            CharSeries::random(k, r as i64, n, rng),
        ]))
    }

    /// Some `w` in `D#` with `psi(w) = v`: solve `psi(beta') = lambda alpha`
    /// with `X^r | beta'` and `psi(u) = -lambda beta` with `X^{(r+1)(p-1)} | u`,
    /// then `alpha' = u X^{-(r+1)(p-1)}`.
    pub fn psi_lift_dsharp<R: Rng + ?Sized>(&self, v: &ModVec, rng: &mut R) -> Result<ModVec> {
        if !self.dsharp_contains(v)? {
            return Err(Error::NotInLattice);
        }
        let (r, _, lambda) = self.rho_params()?;
        let k = &self.field;
        let c = self.rho_c()?;
        let beta = psi_section(&v.coord(0).scale(lambda), r as i64, Flavor::Linear, rng)?;
        let u = psi_section(&v.coord(1).scale(k.neg(lambda)), c, Flavor::Linear, rng)?;
        Ok(ModVec::new(vec![u.shift(-c), beta]))
    }

    /// Stability and surjectivity of `psi` on `X^a k[[X]] e + X^b k[[X]] f`.
    ///
    /// Stability is tested on the monomials `X^{a+i} e`, `X^{b+i} f` for
    /// `0 <= i < 2p` (enough, since `psi(phi(X) w) = X psi(w)`); surjectivity
    /// by solving `psi(w) = X^a e` and `psi(w) = X^b f` inside the lattice.
    pub fn lattice_scan_entry<R: Rng + ?Sized>(&self, a: i64, b: i64, rng: &mut R) -> Result<LatticeVerdict> {
        let (_, _, lambda) = self.rho_params()?;
        let k = &self.field;
        let p = self.p() as i64;
        let c = self.rho_c()?;
        let prec = a.max(b) + 4 * p + c;
        let mut stable = true;
        for i in 0..2 * p {
            let ve = ModVec::new(vec![
                CharSeries::monomial(k, Fq::ONE, a + i).truncate(prec),
                CharSeries::zero(k, prec),
            ]);
            let vf = ModVec::new(vec![
                CharSeries::zero(k, prec),
                CharSeries::monomial(k, Fq::ONE, b + i).truncate(prec),
            ]);
            for w in [ve, vf] {
                let img = self.apply_psi(&w)?;
                stable &= img.coord(0).valuation().map_or(true, |v| v >= a)
                    && img.coord(1).valuation().map_or(true, |v| v >= b);
            }
        }
        let target_prec = a.max(b) + 2;
        let surj_e = psi_section(
            &CharSeries::monomial(k, lambda, a).truncate(target_prec),
            b,
            Flavor::Linear,
            rng,
        )
        .is_ok();
        let surj_f = psi_section(
            &CharSeries::monomial(k, k.neg(lambda), b).truncate(target_prec),
            c + a,
            Flavor::Linear,
            rng,
        )
        .is_ok();
        Ok(LatticeVerdict { a, b, stable, surjective: surj_e && surj_f })
    }
}

/// Outcome of testing one diagonal lattice `X^a k[[X]] e + X^b k[[X]] f`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LatticeVerdict {
    pub a: i64,
    pub b: i64,
    pub stable: bool,
    pub surjective: bool,
}

impl LatticeVerdict {
    pub fn is_colmez(&self) -> bool {
        self.stable && self.surjective
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rho(p: u32, m: u32, r: u32, s: i64, gen: bool) -> PhiGammaModule {
        let k = FiniteField::new(p, m).unwrap();
        let lam = if gen { k.generator() } else { Fq::ONE };
        build_rho(&k, r, s, lam).unwrap()
    }

    #[test]
    fn ind_examples() {
        let k = FiniteField::prime(3).unwrap();
        let m = build_ind(&k, 1, 1).unwrap();
        assert_eq!(m.rank(), 1);
        assert_eq!(m.phi_matrix()[0][0], CharSeries::monomial(&k, Fq::ONE, -2));
        assert_eq!(build_ind(&k, 2, 4).unwrap_err(), Error::NonPrimitiveExponent(4));
        assert!(matches!(build_ind(&k, 2, 8), Err(Error::ExponentOutOfRange { .. })));
        let m = build_ind(&k, 2, 1).unwrap();
        assert!(m.gamma_exponents()[0].agrees_with(&PadicScalar::from_ratio(3, 1, 4, 30).unwrap()));
        let a = PadicScalar::from_int(3, 7, 20);
        let fa = f_gamma(&k, &a, 20).unwrap();
        let quarter = PadicScalar::from_ratio(3, 1, 4, 20).unwrap();
        assert_eq!(m.gamma_diagonal(&a, 20).unwrap()[0], fa.padic_pow(&quarter).unwrap());
    }

    #[test]
    fn primitivity() {
        assert!(is_primitive_exponent(3, 2, 1));
        assert!(!is_primitive_exponent(3, 2, 4));
        assert!(!is_primitive_exponent(5, 4, 26)); // digits (1,0,1,0)
        assert!(is_primitive_exponent(5, 4, 27));
        assert!(is_primitive_exponent(7, 1, 3));
    }

    #[test]
    fn rho_examples() {
        let m = rho(3, 1, 0, 0, false);
        let k = m.field().clone();
        let mp = m.phi_matrix();
        assert!(mp[0][0].is_zero() && mp[1][1].is_zero());
        assert_eq!(mp[0][1], CharSeries::monomial(&k, k.from_int(-1), -2));
        assert_eq!(mp[1][0], CharSeries::one(&k));
        let m = rho(3, 1, 1, 0, false);
        let e = m.gamma_exponents();
        assert!(e[0].agrees_with(&PadicScalar::from_ratio(3, 1, 2, 30).unwrap()));
        assert_eq!(e[0].residue(1).unwrap(), 2);
        assert!(e[1].agrees_with(&PadicScalar::from_ratio(3, 3, 2, 30).unwrap()));
        let m = rho(5, 2, 2, 1, true);
        let k = m.field().clone();
        let lam = k.generator();
        assert_eq!(
            m.phi_determinant(),
            CharSeries::monomial(&k, k.mul(lam, lam), -12)
        );
    }

    #[test]
    fn psi_rho_example() {
        let m = rho(3, 1, 0, 0, false);
        let k = m.field().clone();
        let one = CharSeries::one(&k).truncate(9);
        let v = ModVec::new(vec![one.clone(), one.clone()]);
        let w = m.apply_psi(&v).unwrap();
        assert_eq!(w.coord(0), &CharSeries::one(&k).truncate(3));
        assert_eq!(w.coord(1), &CharSeries::constant(&k, k.from_int(-1)).truncate(3));
    }

    #[test]
    fn rho_matches_ind_of_level_two() {
        for p in [3u32, 5, 7] {
            let k = FiniteField::prime(p).unwrap();
            for r in 0..p {
                let a = build_rho(&k, r, 0, Fq::ONE).unwrap();
                let b = build_ind(&k, 2, r as u64 + 1).unwrap();
                assert_eq!(a.phi_matrix(), b.phi_matrix());
                assert_eq!(a.gamma_exponents(), b.gamma_exponents());
            }
        }
    }

    #[test]
    fn lattice_examples() {
        let m = rho(5, 1, 2, 0, false);
        let k = m.field().clone();
        let e = ModVec::basis(&k, 2, 0, CharSeries::one(&k));
        assert!(m.dsharp_contains(&e).unwrap());
        let f1 = ModVec::basis(&k, 2, 1, CharSeries::monomial(&k, Fq::ONE, 1));
        assert!(!m.dsharp_contains(&f1).unwrap());
        let ex = ModVec::basis(&k, 2, 0, CharSeries::monomial(&k, Fq::ONE, -1));
        assert!(!m.dsharp_contains(&ex).unwrap());
    }

    #[test]
    fn lattice_scan_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for p in [3u32, 5] {
            for r in 0..p {
                let m = rho(p, 1, r, 0, false);
                let c = m.rho_c().unwrap();
                for a in -2..=r as i64 + 2 {
                    for b in -2..=r as i64 + 2 {
                        let v = m.lattice_scan_entry(a, b, &mut rng).unwrap();
                        let pi = p as i64;
                        let stable = b.div_euclid(pi) >= a && (c + a).div_euclid(pi) >= b;
                        let onto = b.div_euclid(pi) <= a && (c + a).div_euclid(pi) <= b;
                        assert_eq!(v.stable, stable, "p={p} r={r} a={a} b={b}");
                        assert_eq!(v.surjective, onto, "p={p} r={r} a={a} b={b}");
                        assert_eq!(v.is_colmez(), (a, b) == (0, r as i64));
                    }
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn psi_matches_explicit_formula(seed in any::<u64>(), r in 0u32..5, gen in any::<bool>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = rho(5, 2, r, 1, gen);
            let k = m.field().clone();
            let v = ModVec::new(vec![
                CharSeries::random(&k, -3, 60, &mut rng),
                CharSeries::random(&k, -3, 60, &mut rng),
            ]);
            prop_assert_eq!(m.apply_psi(&v).unwrap(), m.apply_psi_rho(&v).unwrap());
            prop_assert!(m.apply_psi(&m.apply_phi(&v).unwrap()).unwrap().agrees_with(&v));
            let g = CharSeries::random(&k, 0, 30, &mut rng);
            let lhs = m.apply_psi(&m.apply_phi(&ModVec::basis(&k, 2, 0, CharSeries::one(&k))).unwrap().mul_series(&g.phi_linear())).unwrap();
            prop_assert!(lhs.agrees_with(&ModVec::basis(&k, 2, 0, g.clone())));
            let c = k.random(&mut rng);
            let lhs = m.apply_psi(&v.mul_series(&g.phi_linear()).add(&v.scale(c))).unwrap();
            let rhs = m.apply_psi(&v).unwrap().mul_series(&g).add(&m.apply_psi(&v).unwrap().scale(c));
            prop_assert!(lhs.agrees_with(&rhs));
        }

        #[test]
        fn dsharp_stable_and_liftable(seed in any::<u64>(), p in prop_oneof![Just(3u32), Just(5)], r in 0u32..5) {
            let r = r % p;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = rho(p, 2, r, 0, true);
            let v = m.dsharp_random(40, &mut rng).unwrap();
            prop_assert!(m.dsharp_contains(&m.apply_psi(&v).unwrap()).unwrap());
            let w = m.psi_lift_dsharp(&v, &mut rng).unwrap();
            prop_assert!(m.dsharp_contains(&w).unwrap());
            prop_assert_eq!(m.apply_psi(&w).unwrap(), v.clone());
            let z = m.psi_lift_dsharp(&ModVec::zero(m.field(), 2, 10), &mut rng).unwrap();
            prop_assert!(m.apply_psi(&z).unwrap().is_zero());
        }

        #[test]
        fn gamma_commutes_with_phi(seed in any::<u64>(), r in 0u32..3, s in 0i64..2) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = PadicScalar::random_unit(3, 12, &mut rng);
            let m = rho(3, 2, r, s, true);
            let (ok, prec) = m.check_commutation(&a, 40).unwrap();
            prop_assert!(ok);
            prop_assert!(prec >= 30);
            let (phi_ok, gamma_ok) = m.check_determinant(&a, 40).unwrap();
            prop_assert!(phi_ok && gamma_ok);
            let k = FiniteField::prime(5).unwrap();
            let ind = build_ind(&k, 2, 7).unwrap();
            let a5 = PadicScalar::random_unit(5, 12, &mut rng);
            prop_assert!(ind.check_commutation(&a5, 40).unwrap().0);
            prop_assert_eq!(ind.check_determinant(&a5, 40).unwrap(), (true, true));
        }

        #[test]
        fn gamma_action_on_vectors(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = rho(5, 2, 1, 1, true);
            let v = m.dsharp_random(30, &mut rng).unwrap();
            let a = PadicScalar::random_unit(5, 12, &mut rng);
            let b = PadicScalar::random_unit(5, 12, &mut rng);
            let lhs = m.apply_gamma(&a, &m.apply_gamma(&b, &v).unwrap()).unwrap();
            prop_assert_eq!(lhs, m.apply_gamma(&a.mul(&b), &v).unwrap());
            let lhs = m.apply_gamma(&a, &m.apply_phi(&v).unwrap()).unwrap();
            let rhs = m.apply_phi(&m.apply_gamma(&a, &v).unwrap()).unwrap();
            prop_assert!(lhs.agrees_with(&rhs));
        }
    }
}
