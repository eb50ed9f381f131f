//! Named verification suites. Every check draws its randomness from a
//! generator seeded by `(seed, check id, trial index)`, so any single check
//! replays identically in isolation and in any order.

use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::borel::{
    borel_act_truncated, check_acbormu, random_representatives, vanishing_value, vanishing_value_unchecked,
    BorelElem, PsiWindow, VanishingCase,
};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::ffield::{FiniteField, Fq};
use crate::induction::{
    act_induction, evaluate_pi_cached, CosetRep, hecke_t, kernel_generators, moment_generator, moment_source,
    moment_vectors, window_requirements, IndVec, SymPoly, ThetaCache,
};
use crate::linalg::first_violated_moment;
use crate::modules::{build_ind, build_rho, is_primitive_exponent, ModVec, PhiGammaModule};
use crate::padic::{max_precision, omega_char, CharacterData, PadicScalar};
use crate::report::{CheckRecord, Status, SuiteReport};
use crate::series::{psi_section, CharSeries, Flavor};
use crate::yring::{build_v, product_phi, ramification, verify_ind_structure, yon_action, YRingElem};

/// Suite names accepted by [`run_suite`], besides `all`.
pub const SUITES: [&str; 8] = [
    "series-identities",
    "ind-structure",
    "rho-lattice",
    "yon-consistency",
    "borel-action",
    "acbormu",
    "heckesurnul",
    "hecke-kernel",
];

/// Primes for the closed-form combinatorial identities.
const COMBINATORIAL_PRIMES: [u32; 5] = [3, 5, 7, 11, 13];

/// Share of negative-control trials that must come out nonzero, capped by
/// the chance `1 - 1/q` that a uniform element of `F_q` is nonzero.
const CONTROL_PERCENT: usize = 95;

fn control_percent(q: u32) -> usize {
    let expected = 100 - (100 + q as usize - 1) / q as usize;
    CONTROL_PERCENT.min(expected.saturating_sub(10))
}

/// Runs one suite, or every suite for `all`, after validating `cfg`.
pub fn run_suite(name: &str, cfg: &RunConfig) -> Result<Vec<SuiteReport>> {
    cfg.validate()?;
    let names: Vec<&str> = match name {
        "all" => SUITES.to_vec(),
        n if SUITES.contains(&n) => vec![n],
        n => return Err(Error::UnknownSuite(n.to_string())),
    };
    names.into_iter().map(|n| run_one(n, cfg)).collect()
}

fn run_one(name: &str, cfg: &RunConfig) -> Result<SuiteReport> {
    let mut ctx = Ctx { seed: cfg.seed, records: Vec::new() };
    match name {
        "series-identities" => series_identities(cfg, &mut ctx)?,
        "ind-structure" => ind_structure(cfg, &mut ctx)?,
        "rho-lattice" => rho_lattice(cfg, &mut ctx)?,
        "yon-consistency" => yon_consistency(cfg, &mut ctx)?,
        "borel-action" => borel_action(cfg, &mut ctx)?,
        "acbormu" => acbormu(cfg, &mut ctx)?,
        "heckesurnul" => heckesurnul(cfg, &mut ctx)?,
        "hecke-kernel" => hecke_kernel(cfg, &mut ctx)?,
        _ => unreachable!(),
    }
    Ok(SuiteReport::new(name, cfg.echo(), ctx.records))
}

// ---------------------------------------------------------------------------
// check plumbing

/// Result of one check: how many trials ran and the first failing one.
struct Verdict {
    trials: usize,
    failure: Option<Value>,
    detail: String,
}

impl Verdict {
    fn single(ok: bool, witness: Value, detail: impl Into<String>) -> Self {
        Verdict { trials: 1, failure: (!ok).then_some(witness), detail: detail.into() }
    }
}

struct Ctx {
    seed: u64,
    records: Vec<CheckRecord>,
}

fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Generator for trial `i` of check `id`.
pub fn trial_rng(seed: u64, id: &str, i: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix(seed ^ splitmix(fnv1a(id) ^ splitmix(i as u64))))
}

impl Ctx {
    fn check(&mut self, id: String, anchor: &str, body: impl FnOnce(&str, u64) -> Result<Verdict>) {
        let start = Instant::now();
        let (status, trials, detail, counterexample) = match body(&id, self.seed) {
            Ok(v) => match v.failure {
                None => (Status::Pass, v.trials, v.detail, None),
                Some(ce) => (Status::Fail, v.trials, v.detail, Some(ce)),
            },
            Err(e) => (Status::Fail, 0, format!("error: {e}"), None),
        };
        self.records.push(CheckRecord {
            id,
            anchor: anchor.to_string(),
            status,
            trials,
            detail,
            counterexample,
            elapsed_ms: start.elapsed().as_millis(),
        });
    }

    fn cited(&mut self, id: &str, anchor: &str, detail: &str) {
        self.records.push(CheckRecord {
            id: id.to_string(),
            anchor: anchor.to_string(),
            status: Status::CitedNotVerified,
            trials: 0,
            detail: detail.to_string(),
            counterexample: None,
            elapsed_ms: 0,
        });
    }
}

/// Runs `n` seeded trials; `f` returns a witness on failure. An error inside
/// a trial is itself a failure. The reported failure is the lowest index.
fn sampled<F>(id: &str, seed: u64, n: usize, f: F) -> Result<Verdict>
where
    F: Fn(usize, &mut ChaCha8Rng) -> Result<Option<Value>> + Sync,
{
    let outcomes: Vec<Option<Value>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, id, i);
            match f(i, &mut rng) {
                Ok(None) => None,
                Ok(Some(w)) => Some(json!({ "trial": i, "witness": w })),
                Err(e) => Some(json!({ "trial": i, "error": e.to_string() })),
            }
        })
        .collect();
    let failures = outcomes.iter().filter(|o| o.is_some()).count();
    let failure = outcomes.into_iter().flatten().next();
    let detail = if failures == 0 {
        format!("{n} trials")
    } else {
        format!("{failures} of {n} trials failed")
    };
    Ok(Verdict { trials: n, failure, detail })
}

/// Negative control over `F_q`: `f` reports whether trial `i` produced a
/// nonzero value; at least [`control_percent`] percent must.
fn control<F>(id: &str, seed: u64, q: u32, n: usize, f: F) -> Result<Verdict>
where
    F: Fn(usize, &mut ChaCha8Rng) -> Result<bool> + Sync,
{
    let hits = (0..n)
        .into_par_iter()
        .map(|i| f(i, &mut trial_rng(seed, id, i)))
        .collect::<Result<Vec<bool>>>()?
        .into_iter()
        .filter(|&b| b)
        .count();
    let ok = hits * 100 >= control_percent(q) * n;
    Ok(Verdict {
        trials: n,
        failure: (!ok).then(|| json!({ "nonzero": hits, "trials": n })),
        detail: format!("{hits} of {n} nonzero"),
    })
}

// ---------------------------------------------------------------------------
// shared instances

fn field(p: u32, m: u32) -> Result<FiniteField> {
    FiniteField::new(p, m)
}

/// Degree containing `F_{p^{2n}}`: the configured one when it does.
fn ind_degree(cfg: &RunConfig) -> u32 {
    if cfg.field_degree % (2 * cfg.n) == 0 {
        cfg.field_degree
    } else {
        2 * cfg.n
    }
}

struct RhoCase {
    label: String,
    module: Arc<PhiGammaModule>,
    chars: CharacterData,
    r: u32,
    s: i64,
    lambda: Fq,
}

impl RhoCase {
    fn p(&self) -> u32 {
        self.module.p()
    }

    fn field(&self) -> &FiniteField {
        self.module.field()
    }
}

fn rho_cases(cfg: &RunConfig, primes: &[u32]) -> Result<Vec<RhoCase>> {
    let mut out = Vec::new();
    for &p in primes {
        let k = field(p, cfg.field_degree)?;
        for r in cfg.r_values(p) {
            for &s in &cfg.s {
                for choice in &cfg.lambdas {
                    let lambda = choice.resolve(&k)?;
                    let module = Arc::new(build_rho(&k, r, s, lambda)?);
                    out.push(RhoCase {
                        label: format!("p={p}/r={r}/s={s}/lambda={}", choice.label()),
                        module,
                        chars: CharacterData::new(p, r, s, lambda)?,
                        r,
                        s,
                        lambda,
                    });
                }
            }
        }
    }
    Ok(out)
}

fn unit_with_valuation<R: Rng + ?Sized>(p: u32, prec: u32, v: i64, rng: &mut R) -> PadicScalar {
    PadicScalar::random_unit(p, prec, rng).shift(v)
}

fn mv_text(v: &ModVec) -> Value {
    json!(v.to_text())
}

// ---------------------------------------------------------------------------
// series-identities

fn series_identities(cfg: &RunConfig, ctx: &mut Ctx) -> Result<()> {
    let n = cfg.prec_x;
    for &p in &cfg.primes {
        let k = field(p, cfg.field_degree)?;
        let tag = format!("series/p={p}");

        ctx.check(format!("{tag}/psi-left-inverse"), "series.psi-left-inverse", |id, seed| {
            sampled(id, seed, cfg.trials.series, |_, rng| {
                let v = rng.gen_range(-3..=3);
                let f = CharSeries::random(&k, v, n, rng);
                for flavor in [Flavor::Linear, Flavor::Semilinear] {
                    let g = f.phi_with(flavor).psi_with(flavor);
                    if !(g.agrees_with(&f) && g.prec() >= f.prec()) {
                        return Ok(Some(json!({ "f": f.to_text(), "flavor": format!("{flavor:?}") })));
                    }
                }
                Ok(None)
            })
        });

        ctx.check(format!("{tag}/psi-of-monomials"), "series.psi-monomials", |_, _| {
            let one = k.one();
            for t in 0..p as i64 {
                let img = CharSeries::monomial(&k, one, t).truncate(p as i64 * n).psi_linear();
                let sign = if t % 2 == 0 { one } else { k.neg(one) };
                let want = CharSeries::constant(&k, sign).truncate(n);
                if !(img.agrees_with(&want) && img.prec() >= n) {
                    return Ok(Verdict::single(false, json!({ "t": t, "image": img.to_text() }), "psi(X^t)"));
                }
            }
            Ok(Verdict::single(true, Value::Null, format!("t = 0..{}", p - 1)))
        });

        ctx.check(format!("{tag}/geometric-sum"), "series.geometric-sum", |_, _| {
            let base = CharSeries::poly_int(&k, &[1, 1]);
            let mut sum = CharSeries::exact_zero(&k);
            for j in 0..p as i64 {
                sum = sum.add(&base.pow_int(j)?);
            }
            let want = CharSeries::monomial(&k, k.one(), p as i64 - 1);
            let ok = sum.truncate(n).agrees_with(&want.truncate(n)) && sum.is_exact();
            Ok(Verdict::single(ok, json!({ "sum": sum.to_text() }), "sum_{j<p} (1+X)^j"))
        });

        ctx.check(format!("{tag}/double-psi-constant"), "series.double-psi-constant", |id, seed| {
            sampled(id, seed, cfg.trials.sections, |_, rng| {
                let alpha = CharSeries::random(&k, 0, n, rng);
                let inner = alpha.shift(p as i64 - 1).psi_linear();
                let outer = inner.shift(p as i64 - 1).psi_linear();
                let ok = outer.constant_term()? == alpha.constant_term()?;
                Ok((!ok).then(|| json!({ "alpha": alpha.to_text() })))
            })
        });

        ctx.check(format!("{tag}/psi-section"), "series.psi-section", |id, seed| {
            sampled(id, seed, cfg.trials.sections, |_, rng| {
                let s = rng.gen_range(-2 * p as i64..=2 * p as i64);
                let t = CharSeries::random(&k, s.div_euclid(p as i64), n, rng);
                let u = psi_section(&t, s, Flavor::Linear, rng)?;
                let back = u.psi_linear();
                let ok = u.order() >= s && back.agrees_with(&t) && back.prec() >= t.prec();
                Ok((!ok).then(|| json!({ "t": t.to_text(), "s": s })))
            })
        });
    }

    for p in COMBINATORIAL_PRIMES {
        let tag = format!("combinatorics/p={p}");
        ctx.check(format!("{tag}/binomial-moments"), "combinatorics.binomial-moments", |_, _| {
            let mut bad = None;
            let mut count = 0;
            for t in 0..=p - 2 {
                for kk in 0..=p - 2 - t {
                    count += 1;
                    if binomial_moment(p, kk, t) != 0 && bad.is_none() {
                        bad = Some(json!({ "k": kk, "t": t }));
                    }
                }
            }
            Ok(Verdict {
                trials: count,
                failure: bad,
                detail: "sum_j j^k C(j,t) = 0 mod p for k + t <= p - 2".into(),
            })
        });
        ctx.check(format!("{tag}/binomial-boundary"), "combinatorics.binomial-boundary", |_, _| {
            let mut bad = None;
            for t in 0..p {
                let kk = p - 1 - t;
                let want = (p as u64 - inv_mod(factorial_mod(t, p), p)) % p as u64;
                let got = binomial_moment(p, kk, t);
                if got != want && bad.is_none() {
                    bad = Some(json!({ "k": kk, "t": t, "value": got, "expected": want }));
                }
            }
            Ok(Verdict { trials: p as usize, failure: bad, detail: "k + t = p - 1 gives -1/t!".into() })
        });
        ctx.check(format!("{tag}/wilson"), "combinatorics.wilson", |_, _| {
            let mut bad = None;
            for r in 0..p {
                let lhs = factorial_mod(r, p) * factorial_mod(p - 1 - r, p) % p as u64;
                let want = if r % 2 == 1 { 1 } else { p as u64 - 1 };
                if lhs != want && bad.is_none() {
                    bad = Some(json!({ "r": r, "value": lhs }));
                }
            }
            Ok(Verdict { trials: p as usize, failure: bad, detail: "r!(p-1-r)! = (-1)^{r+1}".into() })
        });
    }
    Ok(())
}

fn factorial_mod(n: u32, p: u32) -> u64 {
    (1..=n as u64).fold(1, |acc, i| acc * i % p as u64)
}

fn inv_mod(a: u64, p: u32) -> u64 {
    let p = p as u64;
    let (mut base, mut e, mut acc) = (a % p, p - 2, 1u64);
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    acc
}

fn binom_int(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// `sum_{j=0}^{p-1} j^k C(j,t) mod p` with `0^0 = 1`, in plain integers.
pub fn binomial_moment(p: u32, k: u32, t: u32) -> u64 {
    let pm = p as u64;
    (0..pm).fold(0, |acc, j| {
        let jk = (0..k).fold(1u64, |x, _| x * j % pm);
        (acc + jk * (binom_int(j, t as u64) % pm)) % pm
    })
}

// ---------------------------------------------------------------------------
// ind-structure

fn ind_structure(cfg: &RunConfig, ctx: &mut Ctx) -> Result<()> {
    let n = cfg.n;
    for &p in &cfg.primes {
        let k = field(p, ind_degree(cfg))?;
        let tag = format!("ind/p={p}/n={n}");
        let pn = (p as u64).pow(n);
        let hs: Vec<u64> = (1..=pn - 2).filter(|&h| is_primitive_exponent(p, n, h)).collect();
        let mut rng = trial_rng(cfg.seed, &format!("{tag}/units"), 0);
        let units: Vec<PadicScalar> =
            (0..cfg.trials.units).map(|_| PadicScalar::random_unit(p, cfg.prec_p, &mut rng)).collect();
        let reports = hs
            .par_iter()
            .map(|&h| verify_ind_structure(&k, n, h, &units, cfg.prec_x, cfg.y_prec))
            .collect::<Vec<_>>();

        let per_h = |sel: fn(&crate::yring::IndStructureReport) -> bool| -> Result<Verdict> {
            let mut failure = None;
            for (h, rep) in hs.iter().zip(&reports) {
                let rep = rep.as_ref().map_err(|e| e.clone())?;
                if !sel(rep) && failure.is_none() {
                    failure = Some(json!({ "h": h, "report": rep }));
                }
            }
            Ok(Verdict {
                trials: hs.len() * units.len().max(1),
                failure,
                detail: format!("{} primitive exponents, {} units", hs.len(), units.len()),
            })
        };
        ctx.check(format!("{tag}/commutation"), "ind.commutation", |_, _| {
            per_h(|r| r.commutation.iter().all(|&b| b))
        });
        ctx.check(format!("{tag}/determinant"), "ind.determinant", |_, _| {
            per_h(|r| r.wedge_phi_fixed && r.wedge_gamma.iter().all(|&b| b))
        });
        ctx.check(format!("{tag}/v-fixed"), "ind.v-fixed", |_, _| {
            let mut v = per_h(|r| r.v_fixed.iter().all(|&b| b))?;
            v.detail = format!("{} primitive exponents, Y-precision {}", hs.len(), cfg.y_prec);
            Ok(v)
        });
        ctx.check(format!("{tag}/v-fixed-control"), "ind.v-fixed-control", |_, _| {
            // any alpha outside the solution set of alpha^{p^n - 1} = (-1)^{n-1}
            let target = if n % 2 == 1 { k.one() } else { k.neg(k.one()) };
            let wrong = k
                .elements()
                .skip(1)
                .find(|&x| k.pow(x, (p as i64).pow(n) - 1) != Some(target))
                .ok_or(Error::NoSolutionAtPrecision)?;
            let e = ramification(p, n);
            let mut failure = None;
            for &h in &hs {
                let module = build_ind(&k, n, h)?;
                let probe = build_v(&k, n, h, wrong, 0, cfg.y_prec);
                let loss = (probe.prec() - product_phi(&module, &probe, e).prec()).max(0);
                let v = build_v(&k, n, h, wrong, 0, cfg.y_prec + loss);
                let w = product_phi(&module, &v, e);
                if (w.agrees_with(&v) || w.prec() < cfg.y_prec) && failure.is_none() {
                    failure = Some(json!({ "h": h, "alpha": k.to_digits(wrong) }));
                }
            }
            Ok(Verdict { trials: hs.len(), failure, detail: "a wrong alpha is never phi-fixed".into() })
        });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// yon-consistency

fn consistent_cs(k: &FiniteField, a: &PadicScalar, e: u64) -> Result<(Vec<Fq>, Vec<Fq>)> {
    let w = omega_char(a, k)?;
    Ok(k.elements().partition(|&c| k.pow_u(c, e) == w))
}

fn yon_consistency(cfg: &RunConfig, ctx: &mut Ctx) -> Result<()> {
    let n = cfg.n;
    let yp = cfg.prec_x;
    for &p in &cfg.primes {
        let k = field(p, ind_degree(cfg))?;
        let e = ramification(p, n);
        let tag = format!("yon/p={p}/n={n}");
        ctx.check(format!("{tag}/compatible-with-x"), "yon.compatibility", |id, seed| {
            sampled(id, seed, cfg.trials.units, |_, rng| {
                let a = PadicScalar::random_unit(p, cfg.prec_p, rng);
                let (good, _) = consistent_cs(&k, &a, e)?;
                let c = good[rng.gen_range(0..good.len())];
                let gy = yon_action(&YRingElem::y(&k, e, yp), &a, c)?;
                let lhs = gy.pow(e as i64)?;
                let gx = CharSeries::x(&k).truncate(yp).gamma_subst(&a)?;
                let rhs = YRingElem::from_x(&gx, e);
                let ok = lhs.agrees_with(&rhs) && lhs.series().prec() >= yp;
                Ok((!ok).then(|| json!({ "a": a.to_string(), "c": k.to_digits(c) })))
            })
        });
        ctx.check(format!("{tag}/composition"), "yon.composition", |id, seed| {
            sampled(id, seed, cfg.trials.units, |_, rng| {
                let a = PadicScalar::random_unit(p, cfg.prec_p, rng);
                let b = PadicScalar::random_unit(p, cfg.prec_p, rng);
                let (ga, _) = consistent_cs(&k, &a, e)?;
                let (gb, _) = consistent_cs(&k, &b, e)?;
                let c = ga[rng.gen_range(0..ga.len())];
                let d = gb[rng.gen_range(0..gb.len())];
                let u = YRingElem::new(CharSeries::random(&k, -2, yp, rng), e);
                let two = yon_action(&yon_action(&u, &a, c)?, &b, d)?;
                let one = yon_action(&u, &a.mul(&b), k.mul(c, d))?;
                let ok = two.agrees_with(&one) && two.series().prec().min(one.series().prec()) >= yp / 2;
                Ok((!ok).then(|| json!({ "a": a.to_string(), "b": b.to_string(), "u": u.series().to_text() })))
            })
        });
        ctx.check(format!("{tag}/inconsistent-rejected"), "yon.rejection", |id, seed| {
            sampled(id, seed, cfg.trials.units, |_, rng| {
                let a = PadicScalar::random_unit(p, cfg.prec_p, rng);
                let (_, bad) = consistent_cs(&k, &a, e)?;
                let c = bad[rng.gen_range(0..bad.len())];
                let res = yon_action(&YRingElem::y(&k, e, 10), &a, c);
                let ok = res == Err(Error::InconsistentOmegaN);
                Ok((!ok).then(|| json!({ "a": a.to_string(), "c": k.to_digits(c) })))
            })
        });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// rho-lattice

fn rho_lattice(cfg: &RunConfig, ctx: &mut Ctx) -> Result<()> {
    let n = cfg.prec_x;
    for case in rho_cases(cfg, &cfg.primes)? {
        let m = &case.module;
        let k = case.field().clone();
        let tag = format!("rho/{}", case.label);
        ctx.check(format!("{tag}/commutation"), "rho.commutation", |id, seed| {
            sampled(id, seed, cfg.trials.units, |_, rng| {
                let a = PadicScalar::random_unit(case.p(), cfg.prec_p, rng);
                let (ok, compared) = m.check_commutation(&a, n + m.phi_pole())?;
                Ok((!(ok && compared >= n)).then(|| json!({ "a": a.to_string(), "compared": compared })))
            })
        });
        ctx.check(format!("{tag}/determinant"), "rho.determinant", |id, seed| {
            sampled(id, seed, cfg.trials.units, |_, rng| {
                let a = PadicScalar::random_unit(case.p(), cfg.prec_p, rng);
                let (phi_ok, gamma_ok) = m.check_determinant(&a, n)?;
                Ok((!(phi_ok && gamma_ok)).then(|| json!({ "a": a.to_string(), "phi": phi_ok, "gamma": gamma_ok })))
            })
        });
        ctx.check(format!("{tag}/psi-formula"), "rho.psi-formula", |id, seed| {
            sampled(id, seed, cfg.trials.lattice, |_, rng| {
                let v = ModVec::new(vec![
                    CharSeries::random(&k, rng.gen_range(-2..=2), n, rng),
                    CharSeries::random(&k, rng.gen_range(-2..=2), n, rng),
                ]);
                let ok = m.apply_psi(&v)?.agrees_with(&m.apply_psi_rho(&v)?);
                Ok((!ok).then(|| json!({ "v": mv_text(&v) })))
            })
        });
        ctx.check(format!("{tag}/psi-stable"), "rho.lattice-stable", |id, seed| {
            sampled(id, seed, cfg.trials.lattice, |_, rng| {
                let v = m.dsharp_random(n, rng)?;
                let ok = m.dsharp_contains(&m.apply_psi(&v)?)?;
                Ok((!ok).then(|| json!({ "v": mv_text(&v) })))
            })
        });
        ctx.check(format!("{tag}/psi-surjective"), "rho.lattice-surjective", |id, seed| {
            sampled(id, seed, cfg.trials.lifts, |_, rng| {
                let v = m.dsharp_random(n, rng)?;
                let w = m.psi_lift_dsharp(&v, rng)?;
                let back = m.apply_psi(&w)?;
                let ok = m.dsharp_contains(&w)? && back.agrees_with(&v) && back.prec() >= n;
                Ok((!ok).then(|| json!({ "v": mv_text(&v) })))
            })
        });
        ctx.check(format!("{tag}/lattice-scan"), "rho.lattice-uniqueness", |id, seed| {
            let r = case.r as i64;
            let mut rng = trial_rng(seed, id, 0);
            let mut failure = None;
            let mut count = 0;
            for a in -2..=r + 2 {
                for b in -2..=r + 2 {
                    count += 1;
                    let verdict = m.lattice_scan_entry(a, b, &mut rng)?;
                    if verdict.is_colmez() != (a == 0 && b == r) && failure.is_none() {
                        failure = Some(json!(verdict));
                    }
                }
            }
            Ok(Verdict { trials: count, failure, detail: format!("(a, b) in [-2, {}]^2", r + 2) })
        });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// borel-action and acbormu

/// Random element of one of the generator families, each needing at most
/// one extra window index.
fn random_generator<R: Rng + ?Sized>(p: u32, prec: u32, rng: &mut R) -> Result<BorelElem> {
    Ok(match rng.gen_range(0..4) {
        0 => BorelElem::scalar(unit_with_valuation(p, prec, rng.gen_range(-1..=1), rng))?,
        1 => BorelElem::lower_diag(PadicScalar::p_power(p, rng.gen_range(-1..=1)))?,
        2 => BorelElem::lower_diag(PadicScalar::random_unit(p, prec, rng))?,
        _ => BorelElem::unipotent(PadicScalar::random_integral(p, prec, rng).shift(rng.gen_range(-1..=1))),
    })
}

fn elem_json(g: &BorelElem) -> Value {
    json!({ "a": g.a.to_string(), "b": g.b.to_string(), "d": g.d.to_string() })
}

/// Precision at which window actions are compared.
const ACTION_NEED: i64 = 400;

fn borel_action(cfg: &RunConfig, ctx: &mut Ctx) -> Result<()> {
    for case in rho_cases(cfg, &cfg.window_primes)? {
        let m = &case.module;
        let k = case.field().clone();
        let p = case.p();
        let tag = format!("borel/{}", case.label);
        ctx.check(format!("{tag}/group-law"), "borel.group-law", |id, seed| {
            sampled(id, seed, cfg.trials.group_pairs, |_, rng| {
                let w = PsiWindow::random(m.clone(), 4 + cfg.depth, 40, rng)?;
                let g = random_generator(p, cfg.prec_p, rng)?;
                let h = random_generator(p, cfg.prec_p, rng)?;
                let hw = borel_act_truncated(&h, &w, ACTION_NEED)?;
                let lhs = borel_act_truncated(&g, &hw, ACTION_NEED)?;
                let rhs = borel_act_truncated(&g.mul(&h), &w, ACTION_NEED)?;
                let top = lhs.depth().min(rhs.depth());
                let mut best = 0;
                for i in 0..=top {
                    let (a, b) = (lhs.entry(i).unwrap(), rhs.entry(i).unwrap());
                    best = best.max(a.prec().min(b.prec()));
                    if !a.agrees_with(b) {
                        return Ok(Some(json!({ "g": elem_json(&g), "h": elem_json(&h), "index": i })));
                    }
                }
                Ok((best < 10).then(|| json!({ "g": elem_json(&g), "h": elem_json(&h), "precision": best })))
            })
        });
        ctx.check(format!("{tag}/central-character"), "borel.central-character", |id, seed| {
            let weight = case.r as i64 + 2 * case.s;
            sampled(id, seed, cfg.trials.units, |_, rng| {
                let v = rng.gen_range(-2..=2);
                let u = PadicScalar::random_unit(p, cfg.prec_p, rng);
                let w = PsiWindow::random(m.clone(), 1, cfg.prec_x, rng)?;
                // omega(u) is the Teichmuller lift of u mod p
                let om = k.from_int(u.residue(1)? as i64);
                let lam_part = k.pow(case.lambda, -2 * v).unwrap();
                let scalar = k.mul(k.pow(om, -weight).unwrap(), lam_part);
                let g = BorelElem::scalar(u.shift(v))?;
                for i in 0..=1 {
                    let got = w.act_entry(&g, i, cfg.prec_x)?;
                    if !got.agrees_with(&w.entry(i).unwrap().scale(scalar)) {
                        return Ok(Some(json!({ "x": u.shift(v).to_string(), "index": i })));
                    }
                }
                Ok(None)
            })
        });
        ctx.check(format!("{tag}/lower-shift"), "borel.lower-shift", |id, seed| {
            sampled(id, seed, cfg.trials.units, |_, rng| {
                let w = PsiWindow::random(m.clone(), 2, cfg.prec_x, rng)?;
                let g = BorelElem::lower_diag(PadicScalar::p_power(p, 1))?;
                let e0 = w.act_entry(&g, 0, cfg.prec_x)?;
                let e1 = w.act_entry(&g, 1, cfg.prec_x)?;
                let ok = e0.agrees_with(&m.apply_psi(w.entry(0).unwrap())?) && e1.agrees_with(w.entry(0).unwrap());
                Ok((!ok).then(|| json!({ "y0": mv_text(w.entry(0).unwrap()) })))
            })
        });
        ctx.check(format!("{tag}/theta-unipotent"), "borel.theta-unipotent", |id, seed| {
            sampled(id, seed, cfg.trials.units, |_, rng| {
                let w = PsiWindow::random(m.clone(), cfg.depth, cfg.prec_x, rng)?;
                let t = PadicScalar::random_integral(p, cfg.prec_p, rng);
                let ok = w.theta_after(&BorelElem::unipotent(t))? == w.theta()?;
                Ok((!ok).then(|| json!({ "t": t.to_string() })))
            })
        });
    }
    Ok(())
}

fn random_bkz<R: Rng + ?Sized>(p: u32, prec: u32, rng: &mut R) -> Result<BorelElem> {
    let v = rng.gen_range(-2..=2);
    BorelElem::new(
        unit_with_valuation(p, prec, v, rng),
        PadicScalar::random_integral(p, prec, rng).shift(v),
        unit_with_valuation(p, prec, v, rng),
    )
}

fn acbormu(cfg: &RunConfig, ctx: &mut Ctx) -> Result<()> {
    for case in rho_cases(cfg, &cfg.window_primes)? {
        let m = &case.module;
        let p = case.p();
        let tag = format!("acbormu/{}", case.label);
        let elems = cfg.trials.bkz_elems;
        ctx.check(format!("{tag}/theta-character"), "acbormu.theta-character", |id, seed| {
            sampled(id, seed, cfg.trials.bkz_windows, |_, rng| {
                let w = PsiWindow::random(m.clone(), cfg.depth, cfg.prec_x, rng)?;
                for _ in 0..elems {
                    let g = random_bkz(p, cfg.prec_p, rng)?;
                    if !check_acbormu(&g, &w)? {
                        return Ok(Some(json!({ "g": elem_json(&g), "y0": mv_text(w.entry(0).unwrap()) })));
                    }
                }
                Ok(None)
            })
            .map(|mut v| {
                v.trials *= elems;
                v.detail = format!("{} windows x {elems} elements", cfg.trials.bkz_windows);
                v
            })
        });
        ctx.check(format!("{tag}/outside-bkz-rejected"), "acbormu.domain", |_, _| {
            let g = BorelElem::lower_diag(PadicScalar::p_power(p, 1))?;
            let w = PsiWindow::random(m.clone(), 1, cfg.prec_x, &mut trial_rng(cfg.seed, "bkz", 0))?;
            let ok = check_acbormu(&g, &w) == Err(Error::NotInBKZ);
            Ok(Verdict::single(ok, elem_json(&g), "diag(1, p) is refused"))
        });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// heckesurnul

/// Vanishing families applicable to `r`, with stable labels.
fn vanishing_cases(cfg: &RunConfig, k: &FiniteField, r: u32) -> Vec<(String, VanishingCase)> {
    let mut out = Vec::new();
    if r == 0 {
        if cfg.wants_case(1) {
            out.push(("case1".into(), VanishingCase::HeckeImage));
        }
        return out;
    }
    if cfg.wants_case(2) {
        out.extend((0..r).map(|e| (format!("case2-k{e}"), VanishingCase::Lower { k: e })));
    }
    if cfg.wants_case(3) {
        let basis = moment_vectors(k, r);
        for (i, v) in basis.iter().enumerate() {
            out.push((format!("case3-basis{i}"), VanishingCase::Moment { lambdas: v.clone() }));
        }
        // a fixed combination with every basis vector present
        let mut combo = vec![Fq::ZERO; k.p() as usize];
        for (i, v) in basis.iter().enumerate() {
            let c = k.from_int(i as i64 + 1);
            for (x, &y) in combo.iter_mut().zip(v) {
                *x = k.add(*x, k.mul(c, y));
            }
        }
        out.push(("case3-combination".into(), VanishingCase::Moment { lambdas: combo }));
    }
    out
}

/// A moment vector violating exactly the order-0 condition.
fn perturbed_moment(k: &FiniteField, r: u32) -> Vec<Fq> {
    let mut v = moment_vectors(k, r).into_iter().next().unwrap_or_else(|| vec![Fq::ZERO; k.p() as usize]);
    v[0] = k.add(v[0], k.one());
    debug_assert_eq!(first_violated_moment(k, r, &v), Some(0));
    v
}

/// Window depth and `y_0` precision covering every vanishing family.
fn surnul_window(cfg: &RunConfig, p: u32) -> (usize, i64) {
    (1 + cfg.depth, 2 * (p as i64).pow(2))
}

fn heckesurnul(cfg: &RunConfig, ctx: &mut Ctx) -> Result<()> {
    for case in rho_cases(cfg, &cfg.window_primes)? {
        let m = &case.module;
        let k = case.field().clone();
        let p = case.p();
        let r = case.r;
        let tag = format!("surnul/{}", case.label);
        let (depth, base) = surnul_window(cfg, p);
        let cases = vanishing_cases(cfg, &k, r);
        let jl = cfg.trials.j_lifts;
        let mp = max_precision(p).min(cfg.prec_p);

        for (label, vc) in &cases {
            ctx.check(format!("{tag}/{label}"), "surnul.vanishing", |id, seed| {
                sampled(id, seed, cfg.trials.windows, |_, rng| {
                    let w = PsiWindow::random(m.clone(), depth, base, rng)?;
                    for j in 0..jl {
                        let reps = random_representatives(p, mp, rng);
                        let val = vanishing_value(vc, &w, &reps)?;
                        if !val.is_zero() {
                            let reps: Vec<String> = reps.iter().map(|x| x.to_string()).collect();
                            return Ok(Some(json!({ "lift": j, "reps": reps, "value": k.to_digits(val) })));
                        }
                    }
                    Ok(None)
                })
                .map(|mut v| {
                    v.trials *= jl;
                    v.detail = format!("{} windows x {jl} lifts of J", cfg.trials.windows);
                    v
                })
            });
        }

        if !cases.is_empty() {
            ctx.check(format!("{tag}/j-independence"), "surnul.j-independence", |id, seed| {
                sampled(id, seed, cfg.trials.windows, |_, rng| {
                    let w = PsiWindow::random(m.clone(), depth, base, rng)?;
                    for (label, vc) in &cases {
                        let mut first = None;
                        for _ in 0..jl {
                            let val = vanishing_value(vc, &w, &random_representatives(p, mp, rng))?;
                            if *first.get_or_insert(val) != val {
                                return Ok(Some(json!({ "family": label })));
                            }
                        }
                    }
                    Ok(None)
                })
            });

            ctx.check(format!("{tag}/seed-independence"), "surnul.seed-independence", |id, seed| {
                let seeds = cfg.trials.seeds;
                sampled(id, seed, cfg.trials.windows, |i, rng| {
                    let y0 = m.dsharp_random(base, rng)?;
                    let reps = random_representatives(p, mp, rng);
                    let mut first: Option<Vec<bool>> = None;
                    for s in 0..seeds {
                        let mut lift_rng = trial_rng(seed, &format!("{id}/lift/{i}"), s);
                        let w = PsiWindow::build_up(m.clone(), y0.clone(), depth, &mut lift_rng)?;
                        let zeros = cases
                            .iter()
                            .map(|(_, vc)| Ok(vanishing_value(vc, &w, &reps)?.is_zero()))
                            .collect::<Result<Vec<bool>>>()?;
                        if *first.get_or_insert(zeros.clone()) != zeros || zeros.contains(&false) {
                            return Ok(Some(json!({ "lift_seed": s, "zero": zeros })));
                        }
                    }
                    Ok(None)
                })
            });
        }

        ctx.check(format!("{tag}/control-theta"), "surnul.control", |id, seed| {
            control(id, seed, k.order(), cfg.trials.windows, |_, rng| {
                Ok(!PsiWindow::random(m.clone(), depth, base, rng)?.theta()?.is_zero())
            })
        });
        if r >= 1 && cfg.wants_case(3) {
            let bad = VanishingCase::Moment { lambdas: perturbed_moment(&k, r) };
            ctx.check(format!("{tag}/control-moment"), "surnul.control", |id, seed| {
                control(id, seed, k.order(), cfg.trials.windows, |_, rng| {
                    let w = PsiWindow::random(m.clone(), depth, base, rng)?;
                    let reps = random_representatives(p, mp, rng);
                    Ok(!vanishing_value_unchecked(&bad, &w, &reps)?.is_zero())
                })
            });
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// hecke-kernel

/// Random `g` in `B(Q_p)` with entries of valuation in `{-1, 0, 1}`.
fn random_translate<R: Rng + ?Sized>(p: u32, prec: u32, rng: &mut R) -> Result<BorelElem> {
    BorelElem::new(
        unit_with_valuation(p, prec, rng.gen_range(-1..=1), rng),
        PadicScalar::random_integral(p, prec, rng).shift(-1),
        unit_with_valuation(p, prec, rng.gen_range(-1..=1), rng),
    )
}

/// Generators and their translates for one lift of `J`.
fn kernel_family<R: Rng + ?Sized>(
    case: &RhoCase,
    cfg: &RunConfig,
    moment: &[Vec<Fq>],
    rng: &mut R,
) -> Result<Vec<IndVec>> {
    let k = case.field();
    let p = case.p();
    let mp = max_precision(p).min(cfg.prec_p);
    let reps = random_representatives(p, mp, rng);
    let gens = kernel_generators(k, &case.chars, &reps, moment)?;
    let mut out = Vec::with_capacity(gens.len() * (1 + cfg.trials.translates));
    for g in gens {
        for _ in 0..cfg.trials.translates {
            out.push(act_induction(&random_translate(p, mp, rng)?, &g)?);
        }
        out.push(g);
    }
    Ok(out)
}

fn hecke_kernel(cfg: &RunConfig, ctx: &mut Ctx) -> Result<()> {
    for case in rho_cases(cfg, &cfg.window_primes)? {
        let m = &case.module;
        let k = case.field().clone();
        let p = case.p();
        let r = case.r;
        let chars = case.chars.clone();
        let tag = format!("kernel/{}", case.label);
        let moment = if r == 0 { Vec::new() } else { moment_vectors(&k, r) };
        let mp = max_precision(p).min(cfg.prec_p);

        ctx.check(format!("{tag}/moment-dimension"), "kernel.moment-dimension", |_, _| {
            let got = moment_vectors(&k, r).len();
            let want = (p - r) as usize;
            Ok(Verdict::single(got == want, json!({ "dimension": got }), format!("dimension {want}")))
        });

        ctx.check(format!("{tag}/generators-are-hecke-images"), "kernel.generators", |id, seed| {
            sampled(id, seed, cfg.trials.j_lifts, |_, rng| {
                let reps = random_representatives(p, mp, rng);
                let gens = kernel_generators(&k, &chars, &reps, &moment)?;
                let one = IndVec::x_r(&k, &chars, Fq::ONE);
                let mut sources: Vec<IndVec> = Vec::new();
                if r == 0 {
                    sources.push(one);
                } else {
                    for e in 0..r {
                        sources.push(IndVec::single(&k, &chars, CosetRep::identity(), SymPoly::monomial(r, e, Fq::ONE)));
                    }
                    for v in &moment {
                        sources.push(moment_source(&k, &chars, v));
                    }
                }
                for (i, (g, s)) in gens.iter().zip(&sources).enumerate() {
                    let t = hecke_t(s, &reps)?;
                    if &t != g {
                        return Ok(Some(json!({ "generator": i })));
                    }
                    if g.terms().values().any(|poly| poly.line_coeff().is_none()) {
                        return Ok(Some(json!({ "generator": i, "off_line": true })));
                    }
                }
                Ok((gens.len() != sources.len()).then(|| json!({ "count": gens.len() })))
            })
        });

        ctx.check(format!("{tag}/hecke-equivariant"), "kernel.hecke-equivariant", |id, seed| {
            sampled(id, seed, cfg.trials.bkz_elems, |_, rng| {
                let reps = random_representatives(p, mp, rng);
                let g = random_translate(p, mp, rng)?;
                let f = act_induction(
                    &random_translate(p, mp, rng)?,
                    &IndVec::single(
                        &k,
                        &chars,
                        CosetRep::identity(),
                        SymPoly::from_coeffs((0..=r).map(|_| k.random(rng)).collect()),
                    ),
                )?;
                let lhs = hecke_t(&act_induction(&g, &f)?, &reps)?;
                let rhs = act_induction(&g, &hecke_t(&f, &reps)?)?;
                Ok((lhs != rhs).then(|| json!({ "g": elem_json(&g) })))
            })
        });

        // families for every lift of J, shared by the vanishing check
        let family_seed = format!("{tag}/families");
        let families = (0..cfg.trials.j_lifts)
            .map(|j| kernel_family(&case, cfg, &moment, &mut trial_rng(cfg.seed, &family_seed, j)))
            .collect::<Result<Vec<_>>>();
        let families = match families {
            Ok(f) => f,
            Err(e) => {
                ctx.check(format!("{tag}/vanishing"), "kernel.vanishing", |_, _| Err(e));
                continue;
            }
        };
        let (depth, base) = families
            .iter()
            .flatten()
            .map(window_requirements)
            .fold((0, 1), |(d, b), (d2, b2)| (d.max(d2), b.max(b2)));
        let depth = depth + cfg.depth;

        ctx.check(format!("{tag}/vanishing"), "kernel.vanishing", |id, seed| {
            let per_window: usize = families.iter().map(Vec::len).sum();
            sampled(id, seed, cfg.trials.windows, |_, rng| {
                let w = PsiWindow::random(m.clone(), depth, base, rng)?;
                let mut cache = ThetaCache::new();
                for (j, fam) in families.iter().enumerate() {
                    for (i, f) in fam.iter().enumerate() {
                        if !evaluate_pi_cached(f, &w, &mut cache)?.is_zero() {
                            return Ok(Some(json!({ "lift": j, "vector": i, "records": f.to_records() })));
                        }
                    }
                }
                Ok(None)
            })
            .map(|mut v| {
                v.trials *= per_window;
                v.detail = format!(
                    "{} windows x {} lifts x {} vectors (depth {depth}, y_0 mod X^{base})",
                    cfg.trials.windows,
                    families.len(),
                    families.first().map_or(0, Vec::len)
                );
                v
            })
        });

        ctx.check(format!("{tag}/control-x-r"), "kernel.control", |id, seed| {
            let one = IndVec::x_r(&k, &chars, Fq::ONE);
            control(id, seed, k.order(), cfg.trials.windows, |_, rng| {
                let w = PsiWindow::random(m.clone(), depth, base, rng)?;
                Ok(!evaluate_pi_cached(&one, &w, &mut ThetaCache::new())?.is_zero())
            })
        });
        ctx.check(format!("{tag}/control-perturbed"), "kernel.control", |id, seed| {
            let mut frng = trial_rng(seed, &format!("{id}/reps"), 0);
            let reps = random_representatives(p, mp, &mut frng);
            let bad = if r == 0 {
                // the Hecke image with its diag(1, p) term dropped
                let one = IndVec::x_r(&k, &chars, Fq::ONE);
                let g = BorelElem::lower_diag(PadicScalar::p_power(p, 1))?;
                kernel_generators(&k, &chars, &reps, &[])?[0].sub(&act_induction(&g, &one)?)
            } else {
                moment_generator(&k, &chars, &reps, &perturbed_moment(&k, r))?
            };
            let (d2, b2) = window_requirements(&bad);
            let (d2, b2) = (d2.max(depth), b2.max(base));
            control(id, seed, k.order(), cfg.trials.windows, |_, rng| {
                let w = PsiWindow::random(m.clone(), d2, b2, rng)?;
                Ok(!evaluate_pi_cached(&bad, &w, &mut ThetaCache::new())?.is_zero())
            })
        });
    }
    ctx.cited(
        "cited/omega-irreducible",
        "cited.omega-irreducible",
        "irreducibility of the representation built from the windows",
    );
    ctx.cited(
        "cited/supersingular-quotient",
        "cited.supersingular-quotient",
        "irreducibility of the supersingular quotient of the compact induction",
    );
    ctx.cited(
        "cited/induced-map-bijective",
        "cited.induced-map",
        "the induced map from the quotient is injective and surjective",
    );
    Ok(())
}
