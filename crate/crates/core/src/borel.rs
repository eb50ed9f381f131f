//! Finite windows of `psi`-compatible sequences in `D#(W)` and the action of
//! the upper-triangular group `B` on them.
//!
//! A window `(y_0, ..., y_M)` satisfies `psi(y_{i+1}) = y_i`. Every `g` in `B`
//! is factored as `x I * [[1,z],[0,1]] * [[1,0],[0,u]] * [[1,0],[0,p^j]]` and
//! acts through
//!
//! * `x I`: multiplication by `(omega^r chi^2)^{-1}(x)`,
//! * `[[1,0],[0,p^j]]`: `y_i -> y_{i-j}` (with `psi^{j-i}(y_0)` below zero),
//! * `[[1,0],[0,u]]`: `gamma_{u^{-1}}`,
//! * `[[1,z],[0,1]]`: `y_i -> psi^t((1+X)^{p^{i+t} z} y_{i+t})` with `t` the least
//!   non-negative integer making `p^{i+t} z` integral.
//!
//! Entries are computed on demand to a requested precision, so an evaluation
//! of `theta` only touches the coefficients it depends on.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::ffield::{FiniteField, Fq};
use crate::linalg::first_violated_moment;
use crate::modules::{ModVec, PhiGammaModule};
use crate::padic::{max_precision, CharacterData, PadicScalar};
use rand::Rng;

/// Upper-triangular `[[a, b], [0, d]]` with `a d != 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BorelElem {
    pub a: PadicScalar,
    pub b: PadicScalar,
    pub d: PadicScalar,
}

/// `g = x I * [[1,z],[0,1]] * [[1,0],[0,u]] * [[1,0],[0,p^j]]`, `u` a unit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BorelFactors {
    pub x: PadicScalar,
    pub z: PadicScalar,
    pub u: PadicScalar,
    pub j: i64,
}

impl BorelFactors {
    pub fn compose(&self) -> BorelElem {
        let t = self.u.shift(self.j);
        BorelElem { a: self.x, b: self.x.mul(&self.z).mul(&t), d: self.x.mul(&t) }
    }
}

impl BorelElem {
    pub fn new(a: PadicScalar, b: PadicScalar, d: PadicScalar) -> Result<Self> {
        if a.is_zero() || d.is_zero() {
            return Err(Error::SingularInput);
        }
        Ok(BorelElem { a, b, d })
    }

    pub fn p(&self) -> u32 {
        self.a.p()
    }

    pub fn identity(p: u32) -> Self {
        let one = PadicScalar::one(p);
        BorelElem { a: one, b: PadicScalar::zero(p), d: one }
    }

    /// `x I`.
    pub fn scalar(x: PadicScalar) -> Result<Self> {
        Self::new(x, PadicScalar::zero(x.p()), x)
    }

    /// `[[1, 0], [0, t]]`.
    pub fn lower_diag(t: PadicScalar) -> Result<Self> {
        Self::new(PadicScalar::one(t.p()), PadicScalar::zero(t.p()), t)
    }

    /// `[[1, z], [0, 1]]`.
    pub fn unipotent(z: PadicScalar) -> Self {
        let one = PadicScalar::one(z.p());
        BorelElem { a: one, b: z, d: one }
    }

    /// Entries given as integers.
    pub fn from_ints(p: u32, a: i64, b: i64, d: i64) -> Result<Self> {
        let m = max_precision(p);
        Self::new(
            PadicScalar::from_int(p, a, m),
            PadicScalar::from_int(p, b, m),
            PadicScalar::from_int(p, d, m),
        )
    }

    pub fn mul(&self, o: &Self) -> Self {
        BorelElem {
            a: self.a.mul(&o.a),
            b: self.a.mul(&o.b).add(&self.b.mul(&o.d)),
            d: self.d.mul(&o.d),
        }
    }

    pub fn inv(&self) -> Result<Self> {
        let ai = self.a.inv()?;
        let di = self.d.inv()?;
        Ok(BorelElem { a: ai, b: self.b.mul(&ai).mul(&di).neg(), d: di })
    }

    pub fn agrees_with(&self, o: &Self) -> bool {
        self.a.agrees_with(&o.a) && self.b.agrees_with(&o.b) && self.d.agrees_with(&o.d)
    }

    /// Membership in `B n KZ`: `val(a) = val(d) <= val(b)`.
    pub fn in_bkz(&self) -> bool {
        let va = self.a.valuation();
        va == self.d.valuation()
            && match self.b.valuation() {
                None => true,
                Some(vb) => vb >= va.unwrap(),
            }
    }

    /// The factorization used by the action, checked by re-multiplication.
    pub fn factor(&self) -> Result<BorelFactors> {
        let t = self.d.div(&self.a)?;
        let j = t.valuation().ok_or(Error::SingularInput)?;
        let u = t.unit_part()?;
        if !u.is_unit() {
            return Err(Error::NonUnitDiagonal);
        }
        let f = BorelFactors { x: self.a, z: self.b.div(&self.d)?, u, j };
        if !f.compose().agrees_with(self) {
            return Err(Error::NonUnitDiagonal);
        }
        Ok(f)
    }
}

/// Least `t >= 0` with `p^{i+t} z` integral.
fn unipotent_lag(z: &PadicScalar, i: i64) -> i64 {
    match z.valuation() {
        None => 0,
        Some(v) => (-v - i).max(0),
    }
}

/// A `psi`-compatible window over a `rho(r, chi)` module.
#[derive(Clone)]
pub struct PsiWindow {
    module: Arc<PhiGammaModule>,
    chars: CharacterData,
    entries: Vec<ModVec>,
}

impl std::fmt::Debug for PsiWindow {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PsiWindow")
            .field("depth", &self.depth())
            .field("precisions", &self.entries.iter().map(|e| e.prec()).collect::<Vec<_>>())
            .finish()
    }
}

fn chars_of(module: &PhiGammaModule) -> Result<CharacterData> {
    let (r, s, lambda) = module.rho_params()?;
    CharacterData::new(module.p(), r, s as i64, lambda)
}

fn psi_pow(module: &PhiGammaModule, v: &ModVec, k: i64) -> Result<ModVec> {
    let mut out = v.clone();
    for _ in 0..k {
        out = module.apply_psi(&out)?;
    }
    Ok(out)
}

/// Precision to request of an input that goes through `k` applications of
/// `psi` and must come out known modulo `X^need`.
fn need_before_psi(p: u32, need: i64, k: i64) -> i64 {
    let mut n = need;
    for _ in 0..k {
        n = n.saturating_mul(p as i64);
    }
    n
}

impl PsiWindow {
    /// `y_M = top`, `y_i = psi^{M-i}(top)`.
    pub fn build_down(module: Arc<PhiGammaModule>, top: ModVec, depth: usize) -> Result<Self> {
        if !module.dsharp_contains(&top)? {
            return Err(Error::NotInLattice);
        }
        let chars = chars_of(&module)?;
        let mut entries = vec![top];
        for _ in 0..depth {
            let next = module.apply_psi(entries.last().unwrap())?;
            entries.push(next);
        }
        entries.reverse();
        Ok(PsiWindow { module, chars, entries })
    }

    /// `y_0` given, `y_{i+1}` a seeded lift of `y_i` through `psi` inside `D#`.
    pub fn build_up<R: Rng + ?Sized>(
        module: Arc<PhiGammaModule>,
        y0: ModVec,
        depth: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let chars = chars_of(&module)?;
        let mut entries = vec![y0];
        for _ in 0..depth {
            let next = module.psi_lift_dsharp(entries.last().unwrap(), rng)?;
            entries.push(next);
        }
        let w = PsiWindow { module, chars, entries };
        w.check_compatible()?;
        Ok(w)
    }

    /// Checks compatibility and lattice membership of explicit entries.
    pub fn from_entries(module: Arc<PhiGammaModule>, entries: Vec<ModVec>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InsufficientWindow { missing: 1 });
        }
        let chars = chars_of(&module)?;
        let w = PsiWindow { module, chars, entries };
        w.check_compatible()?;
        Ok(w)
    }

    /// Random window of the given depth whose `y_0` is known modulo about
    /// `X^{base_prec}`.
    pub fn random<R: Rng + ?Sized>(
        module: Arc<PhiGammaModule>,
        depth: usize,
        base_prec: i64,
        rng: &mut R,
    ) -> Result<Self> {
        let top_prec = need_before_psi(module.p(), base_prec, depth as i64);
        let top = module.dsharp_random(top_prec, rng)?;
        Self::build_down(module, top, depth)
    }

    /// `psi(y_{i+1}) = y_i` at ledger precision and every `y_i` in `D#`.
    pub fn check_compatible(&self) -> Result<()> {
        for (i, y) in self.entries.iter().enumerate() {
            if !self.module.dsharp_contains(y)? {
                return Err(Error::NotInLattice);
            }
            if i > 0 && !self.module.apply_psi(y)?.agrees_with(&self.entries[i - 1]) {
                return Err(Error::IncompatibleWindow(i - 1));
            }
        }
        Ok(())
    }

    pub fn module(&self) -> &Arc<PhiGammaModule> {
        &self.module
    }

    pub fn field(&self) -> &FiniteField {
        self.module.field()
    }

    pub fn chars(&self) -> &CharacterData {
        &self.chars
    }

    /// Index of the top entry.
    pub fn depth(&self) -> usize {
        self.entries.len() - 1
    }

    pub fn top(&self) -> &ModVec {
        self.entries.last().unwrap()
    }

    pub fn entry(&self, i: usize) -> Option<&ModVec> {
        self.entries.get(i)
    }

    pub fn entries(&self) -> &[ModVec] {
        &self.entries
    }

    pub fn precision(&self, i: usize) -> Option<i64> {
        self.entries.get(i).map(|e| e.prec())
    }

    /// Constant term of the `e`-coordinate of `y_0`.
    pub fn theta(&self) -> Result<Fq> {
        self.entries[0].coord(0).constant_term()
    }

    /// Entry `k` of `[[1,0],[0,p^j]] * y`, requested modulo `X^need`.
    fn shifted_entry(&self, j: i64, k: i64, need: i64) -> Result<ModVec> {
        let src = k - j;
        if src >= 0 {
            let m = self.depth() as i64;
            if src > m {
                return Err(Error::InsufficientWindow { missing: (src - m) as usize });
            }
            Ok(self.entries[src as usize].truncate(need))
        } else {
            let lag = -src;
            let y0 = self.entries[0].truncate(need_before_psi(self.module.p(), need, lag));
            psi_pow(&self.module, &y0, lag)
        }
    }

    /// Entry `i` of `g * y`, known modulo `X^need` when the window allows.
    pub fn act_entry(&self, g: &BorelElem, i: usize, need: i64) -> Result<ModVec> {
        let f = g.factor()?;
        self.act_entry_factored(&f, i as i64, need)
    }

    fn act_entry_factored(&self, f: &BorelFactors, i: i64, need: i64) -> Result<ModVec> {
        let p = self.module.p();
        let lag = unipotent_lag(&f.z, i);
        let inner_need = need_before_psi(p, need, lag);
        let idx = i + lag;
        let mut y = self.shifted_entry(f.j, idx, inner_need)?;
        if !f.u.agrees_with(&PadicScalar::one(p)) {
            y = self.module.apply_gamma(&f.u.inv()?, &y)?;
        }
        if !f.z.is_zero() {
            y = y.mul_one_plus_x_pow(&f.z.shift(idx))?;
            y = psi_pow(&self.module, &y, lag)?;
        }
        let c = self.chars.central_inv(&f.x, self.field())?;
        Ok(if c == Fq::ONE { y } else { y.scale(c) })
    }

    /// Largest window index of `g * y` computable from this window.
    pub fn output_depth(&self, g: &BorelElem) -> Result<Option<usize>> {
        let f = g.factor()?;
        let m = self.depth() as i64;
        let fits = |i: i64| i + unipotent_lag(&f.z, i) - f.j <= m;
        if !fits(0) {
            return Ok(None);
        }
        let mut top = 0i64;
        while fits(top + 1) {
            top += 1;
        }
        Ok(Some(top as usize))
    }

    /// Index that must be present for entry 0 of `g * y`; exceeds `depth()`
    /// exactly when `theta_after(g)` is unavailable.
    pub fn required_index(g: &BorelElem) -> Result<i64> {
        let f = g.factor()?;
        Ok(unipotent_lag(&f.z, 0) - f.j)
    }

    /// `theta(g * y)`.
    pub fn theta_after(&self, g: &BorelElem) -> Result<Fq> {
        self.act_entry(g, 0, 1)?.coord(0).constant_term()
    }
}

/// The window `g * w`, as long as the headroom of `w` allows.
pub fn borel_act(g: &BorelElem, w: &PsiWindow) -> Result<PsiWindow> {
    borel_act_truncated(g, w, i64::MAX)
}

/// `g * w` with every entry requested only modulo `X^need`. The result is
/// still `psi`-compatible at ledger precision.
pub fn borel_act_truncated(g: &BorelElem, w: &PsiWindow, need: i64) -> Result<PsiWindow> {
    let f = g.factor()?;
    let Some(top) = w.output_depth(g)? else {
        let missing = PsiWindow::required_index(g)? - w.depth() as i64;
        return Err(Error::InsufficientWindow { missing: missing as usize });
    };
    let entries = (0..=top as i64)
        .map(|i| w.act_entry_factored(&f, i, need))
        .collect::<Result<Vec<_>>>()?;
    Ok(PsiWindow { module: w.module.clone(), chars: w.chars.clone(), entries })
}

/// `theta(g^{-1} * w) = chi(ad) omega^r(a) theta(w)` for `g` in `B n KZ`.
pub fn check_acbormu(g: &BorelElem, w: &PsiWindow) -> Result<bool> {
    if !g.in_bkz() {
        return Err(Error::NotInBKZ);
    }
    let k = w.field();
    let lhs = w.theta_after(&g.inv()?)?;
    let scalar = k.mul(w.chars.chi(&g.a.mul(&g.d), k)?, w.chars.omega_r(&g.a, k)?);
    Ok(lhs == k.mul(scalar, w.theta()?))
}

/// The three families whose image under `pi_W` must vanish.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VanishingCase {
    /// `r = 0`: `[[1,0],[0,p]][1,v] + sum_J [[p,j],[0,1]][1,v]`.
    HeckeImage,
    /// `r >= 1`, `k < r`: `sum_J (-j)^k [[p,j],[0,1]][1,x^r]`.
    Lower { k: u32 },
    /// `r >= 1`: the combination weighted by a moment vector.
    Moment { lambdas: Vec<Fq> },
}

/// `J = (j_0, ..., j_{p-1})` with `j_i = i mod p`, each `j_i` integral.
pub fn check_representatives(p: u32, reps: &[PadicScalar]) -> Result<()> {
    if reps.len() != p as usize {
        return Err(Error::BadRepresentatives);
    }
    for (i, j) in reps.iter().enumerate() {
        if !j.is_integral() || j.residue(1)? != i as u64 {
            return Err(Error::BadRepresentatives);
        }
    }
    Ok(())
}

/// `j_i = i + p t_i` with random `t_i` in `Z_p`.
pub fn random_representatives<R: Rng + ?Sized>(p: u32, prec: u32, rng: &mut R) -> Vec<PadicScalar> {
    (0..p)
        .map(|i| {
            PadicScalar::from_int(p, i as i64, prec)
                .add(&PadicScalar::random_integral(p, prec, rng).shift(1))
        })
        .collect()
}

/// `[[p^{-1}, -j/p], [0, 1]]`, the inverse of `[[p, j], [0, 1]]`.
fn inv_hecke_translate(j: &PadicScalar) -> Result<BorelElem> {
    let p = j.p();
    BorelElem::new(PadicScalar::p_power(p, -1), j.neg().shift(-1), PadicScalar::one(p))
}

/// The value of `pi_W(generator)` at the window, before comparing with 0.
/// Preconditions on `r` and on the moment vector are enforced.
pub fn vanishing_value(case: &VanishingCase, w: &PsiWindow, reps: &[PadicScalar]) -> Result<Fq> {
    let r = w.chars.r;
    match case {
        VanishingCase::HeckeImage if r != 0 => {
            return Err(Error::ParameterOutOfRange("case 1 needs r = 0".into()))
        }
        VanishingCase::Lower { k } if r == 0 || *k >= r => {
            return Err(Error::ParameterOutOfRange("case 2 needs 0 <= k < r".into()))
        }
        VanishingCase::Moment { lambdas } => {
            if r == 0 {
                return Err(Error::ParameterOutOfRange("case 3 needs r >= 1".into()));
            }
            if let Some(l) = first_violated_moment(w.field(), r, lambdas) {
                return Err(Error::MomentConditionViolated(l));
            }
        }
        _ => {}
    }
    vanishing_value_unchecked(case, w, reps)
}

/// As [`vanishing_value`] without the moment and `r` preconditions; used for
/// negative controls.
pub fn vanishing_value_unchecked(case: &VanishingCase, w: &PsiWindow, reps: &[PadicScalar]) -> Result<Fq> {
    let k = w.field().clone();
    let p = w.module.p();
    check_representatives(p, reps)?;
    let r = w.chars.r;
    let neg_pow = |j: &PadicScalar, e: u32| -> Result<Fq> { j.neg().pow_reduced(e, &k) };
    let mut acc = Fq::ZERO;
    match case {
        VanishingCase::HeckeImage => {
            acc = w.theta_after(&BorelElem::lower_diag(PadicScalar::p_power(p, -1))?)?;
            for j in reps {
                acc = k.add(acc, w.theta_after(&inv_hecke_translate(j)?)?);
            }
        }
        VanishingCase::Lower { k: e } => {
            for j in reps {
                let t = w.theta_after(&inv_hecke_translate(j)?)?;
                acc = k.add(acc, k.mul(neg_pow(j, *e)?, t));
            }
        }
        VanishingCase::Moment { lambdas } => {
            if lambdas.len() != p as usize {
                return Err(Error::ParameterOutOfRange("moment vector must have length p".into()));
            }
            let theta = w.theta()?;
            let m = max_precision(p);
            for (i, &li) in lambdas.iter().enumerate() {
                if li.is_zero() {
                    continue;
                }
                let ir = k.pow_u(k.from_int(i as i64), r as u64);
                acc = k.add(acc, k.mul(k.mul(li, ir), theta));
                let i_over_p = PadicScalar::from_int(p, i as i64, m).shift(-1);
                for j in reps {
                    // [[p^{-1}, -j/p],[0,1]] [[1,0],[0,p]] [[1,-i],[0,1]]
                    let g = BorelElem::new(
                        PadicScalar::p_power(p, -1),
                        i_over_p.add(j).neg(),
                        PadicScalar::p_power(p, 1),
                    )?;
                    let t = w.theta_after(&g)?;
                    acc = k.add(acc, k.mul(k.mul(li, neg_pow(j, r)?), t));
                }
            }
        }
    }
    Ok(acc)
}

/// `pi_W(generator)(w) = 0`.
pub fn check_vanishing(case: &VanishingCase, w: &PsiWindow, reps: &[PadicScalar]) -> Result<bool> {
    Ok(vanishing_value(case, w, reps)?.is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modules::build_rho;
    use crate::series::{one_plus_x_pow, CharSeries};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rho(p: u32, m: u32, r: u32, s: i64) -> Arc<PhiGammaModule> {
        let k = FiniteField::new(p, m).unwrap();
        let lambda = k.generator();
        Arc::new(build_rho(&k, r, s, lambda).unwrap())
    }

    fn random_window(module: &Arc<PhiGammaModule>, depth: usize, rng: &mut ChaCha8Rng) -> PsiWindow {
        PsiWindow::random(module.clone(), depth, 40, rng).unwrap()
    }

    /// Random element of one of the four generator families, with headroom
    /// needs bounded by one index.
    fn random_generator(p: u32, rng: &mut ChaCha8Rng) -> BorelElem {
        let m = 20;
        match rng.gen_range(0..4) {
            0 => {
                let v = rng.gen_range(-1..=1);
                BorelElem::scalar(PadicScalar::random_unit(p, m, rng).shift(v)).unwrap()
            }
            1 => BorelElem::lower_diag(PadicScalar::p_power(p, rng.gen_range(-1..=1))).unwrap(),
            2 => BorelElem::lower_diag(PadicScalar::random_unit(p, m, rng)).unwrap(),
            _ => BorelElem::unipotent(PadicScalar::random_integral(p, m, rng).shift(rng.gen_range(-1..=1))),
        }
    }

    #[test]
    fn factorization_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let g = BorelElem::new(
                PadicScalar::random_unit(3, 20, &mut rng).shift(rng.gen_range(-3..3)),
                PadicScalar::random_integral(3, 20, &mut rng).shift(rng.gen_range(-3..3)),
                PadicScalar::random_unit(3, 20, &mut rng).shift(rng.gen_range(-3..3)),
            )
            .unwrap();
            assert!(g.factor().unwrap().compose().agrees_with(&g));
            assert!(g.mul(&g.inv().unwrap()).agrees_with(&BorelElem::identity(3)));
        }
    }

    #[test]
    fn identity_leaves_window() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = rho(3, 2, 1, 0);
        let w = random_window(&m, 3, &mut rng);
        let v = borel_act(&BorelElem::identity(3), &w).unwrap();
        assert_eq!(v.depth(), w.depth());
        for i in 0..=w.depth() {
            assert!(v.entry(i).unwrap().agrees_with(w.entry(i).unwrap()));
        }
    }

    #[test]
    fn diagonal_p_shifts() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = rho(5, 2, 2, 1);
        let w = random_window(&m, 2, &mut rng);
        let g = BorelElem::lower_diag(PadicScalar::p_power(5, 1)).unwrap();
        let v = borel_act(&g, &w).unwrap();
        assert_eq!(v.depth(), 3);
        assert!(v.entry(0).unwrap().agrees_with(&m.apply_psi(w.entry(0).unwrap()).unwrap()));
        for i in 1..=3 {
            assert!(v.entry(i).unwrap().agrees_with(w.entry(i - 1).unwrap()));
        }
        v.check_compatible().unwrap();
    }

    #[test]
    fn unit_unipotent_multiplies() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let m = rho(3, 2, 0, 0);
        let w = random_window(&m, 2, &mut rng);
        let g = BorelElem::unipotent(PadicScalar::one(3));
        let v = borel_act(&g, &w).unwrap();
        assert_eq!(v.depth(), w.depth());
        for i in 0..=2 {
            let y = w.entry(i).unwrap();
            let f = one_plus_x_pow(m.field(), &PadicScalar::p_power(3, i as i64), y.prec()).unwrap();
            assert!(v.entry(i).unwrap().agrees_with(&y.mul_series(&f)));
        }
    }

    #[test]
    fn headroom_is_enforced() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = rho(3, 2, 1, 0);
        let w = random_window(&m, 1, &mut rng);
        let g = BorelElem::unipotent(PadicScalar::p_power(3, -3));
        assert_eq!(borel_act(&g, &w).unwrap_err(), Error::InsufficientWindow { missing: 2 });
        let h = BorelElem::lower_diag(PadicScalar::p_power(3, -1)).unwrap();
        assert_eq!(borel_act(&h, &w).unwrap().depth(), 0);
    }

    #[test]
    fn upward_windows_are_compatible() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for (p, r) in [(3, 0), (3, 2), (5, 1)] {
            let m = rho(p, 2, r, 0);
            for _ in 0..10 {
                let y0 = m.dsharp_random(20, &mut rng).unwrap();
                let w = PsiWindow::build_up(m.clone(), y0, 2, &mut rng).unwrap();
                assert_eq!(w.depth(), 2);
            }
        }
    }

    #[test]
    fn incompatible_entries_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = rho(3, 2, 1, 0);
        let w = random_window(&m, 2, &mut rng);
        let mut entries = w.entries().to_vec();
        entries[1] = entries[1].add(&ModVec::basis(m.field(), 2, 0, CharSeries::one(m.field())));
        assert!(matches!(
            PsiWindow::from_entries(m.clone(), entries),
            Err(Error::IncompatibleWindow(_))
        ));
    }

    #[test]
    fn theta_examples() {
        let m = rho(3, 1, 1, 0);
        let k = m.field().clone();
        let y = ModVec::new(vec![CharSeries::poly_int(&k, &[1, 2]).truncate(9), CharSeries::zero(&k, 9)]);
        let w = PsiWindow::from_entries(m.clone(), vec![y]).unwrap();
        assert_eq!(w.theta().unwrap(), Fq::ONE);
        let y = ModVec::new(vec![CharSeries::x(&k).truncate(9), CharSeries::monomial(&k, Fq::ONE, 1).truncate(9)]);
        let w = PsiWindow::from_entries(m, vec![y]).unwrap();
        assert_eq!(w.theta().unwrap(), Fq::ZERO);
    }

    #[test]
    fn theta_is_translation_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let m = rho(5, 2, 3, 1);
        for _ in 0..20 {
            let w = random_window(&m, 1, &mut rng);
            let t = PadicScalar::random_integral(5, 20, &mut rng);
            let g = BorelElem::unipotent(t);
            assert_eq!(w.theta_after(&g).unwrap(), w.theta().unwrap());
        }
    }

    #[test]
    fn group_law_on_generators() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for (p, r, s) in [(3, 0, 0), (3, 1, 1), (5, 2, 0)] {
            let m = rho(p, 2, r, s);
            let mut checked = 0;
            for _ in 0..30 {
                let w = random_window(&m, 4, &mut rng);
                let g = random_generator(p, &mut rng);
                let h = random_generator(p, &mut rng);
                let hw = borel_act_truncated(&h, &w, 400).unwrap();
                let Ok(lhs) = borel_act_truncated(&g, &hw, 400) else { continue };
                let rhs = borel_act_truncated(&g.mul(&h), &w, 400).unwrap();
                let top = lhs.depth().min(rhs.depth());
                let mut best = 0;
                for i in 0..=top {
                    let (a, b) = (lhs.entry(i).unwrap(), rhs.entry(i).unwrap());
                    best = best.max(a.prec().min(b.prec()));
                    assert!(a.agrees_with(b));
                }
                assert!(best >= 10);
                checked += 1;
            }
            assert!(checked >= 20);
        }
    }

    #[test]
    fn central_character() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let m = rho(5, 2, 2, 1);
        let k = m.field().clone();
        let (_, _, lambda) = m.rho_params().unwrap();
        let w = random_window(&m, 1, &mut rng);
        let v = borel_act(&BorelElem::scalar(PadicScalar::p_power(5, 1)).unwrap(), &w).unwrap();
        let l2inv = k.inv(k.mul(lambda, lambda)).unwrap();
        assert!(v.entry(0).unwrap().agrees_with(&w.entry(0).unwrap().scale(l2inv)));
    }

    #[test]
    fn acbormu_identity_and_center() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = rho(3, 2, 1, 1);
        for _ in 0..10 {
            let w = random_window(&m, 2, &mut rng);
            assert!(check_acbormu(&BorelElem::identity(3), &w).unwrap());
            let pi = BorelElem::scalar(PadicScalar::p_power(3, 1)).unwrap();
            assert!(check_acbormu(&pi, &w).unwrap());
        }
        let w = random_window(&m, 0, &mut rng);
        let g = BorelElem::lower_diag(PadicScalar::p_power(3, 1)).unwrap();
        assert_eq!(check_acbormu(&g, &w), Err(Error::NotInBKZ));
    }

    #[test]
    fn vanishing_case_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let m = rho(3, 2, 0, 0);
        for _ in 0..20 {
            let w = random_window(&m, 2, &mut rng);
            let reps = random_representatives(3, 20, &mut rng);
            assert!(check_vanishing(&VanishingCase::HeckeImage, &w, &reps).unwrap());
        }
    }

    #[test]
    fn vanishing_case_two() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let m = rho(5, 2, 3, 1);
        for _ in 0..10 {
            let w = random_window(&m, 2, &mut rng);
            let reps = random_representatives(5, 20, &mut rng);
            for k in 0..3 {
                assert!(check_vanishing(&VanishingCase::Lower { k }, &w, &reps).unwrap());
            }
        }
    }

    #[test]
    fn moment_violation_is_rejected_and_generically_nonzero() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let m = rho(3, 4, 1, 0);
        let k = m.field().clone();
        let bad = VanishingCase::Moment { lambdas: vec![Fq::ONE, Fq::ZERO, Fq::ZERO] };
        let reps = random_representatives(3, 20, &mut rng);
        let w = random_window(&m, 2, &mut rng);
        assert_eq!(vanishing_value(&bad, &w, &reps), Err(Error::MomentConditionViolated(0)));
        let good = VanishingCase::Moment { lambdas: vec![Fq::ONE, k.neg(Fq::ONE), Fq::ZERO] };
        let mut nonzero = 0;
        for _ in 0..20 {
            let w = random_window(&m, 2, &mut rng);
            assert!(check_vanishing(&good, &w, &reps).unwrap());
            if !vanishing_value_unchecked(&bad, &w, &reps).unwrap().is_zero() {
                nonzero += 1;
            }
        }
        assert!(nonzero >= 15);
    }

    #[test]
    fn representatives_validated() {
        let reps: Vec<_> = (0..3).map(|i| PadicScalar::from_int(3, (i + 1) % 3, 10)).collect();
        assert_eq!(check_representatives(3, &reps), Err(Error::BadRepresentatives));
    }
}
