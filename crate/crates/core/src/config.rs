//! Run configuration: flat `key = value` text, overridable from the command
//! line, validated before any suite runs. Every resolved value is echoed into
//! reports.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::ffield::{FiniteField, Fq};
use crate::padic::max_precision;

/// How `lambda` is chosen.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LambdaChoice {
    One,
    /// The fixed generator of `F_{p^m}^x`.
    Generator,
    /// Coordinates in the power basis, constant term first.
    Coords(Vec<u32>),
}

impl LambdaChoice {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "1" | "one" => Ok(LambdaChoice::One),
            "gen" | "generator" => Ok(LambdaChoice::Generator),
            t => t
                .split(',')
                .map(|c| c.trim().parse::<u32>().map_err(|_| Error::Parse(format!("lambda coordinate {c:?}"))))
                .collect::<Result<Vec<_>>>()
                .map(LambdaChoice::Coords),
        }
    }

    pub fn resolve(&self, k: &FiniteField) -> Result<Fq> {
        let x = match self {
            LambdaChoice::One => Fq::ONE,
            LambdaChoice::Generator => k.generator(),
            LambdaChoice::Coords(c) => {
                if c.len() > k.degree() as usize || c.iter().any(|&v| v >= k.p()) {
                    return Err(Error::InvalidConfig(format!("lambda {c:?} is not in F_{}^{}", k.p(), k.degree())));
                }
                k.from_coords(c)
            }
        };
        if x.is_zero() {
            return Err(Error::InvalidConfig("lambda must be nonzero".into()));
        }
        Ok(x)
    }

    pub fn label(&self) -> String {
        match self {
            LambdaChoice::One => "one".into(),
            LambdaChoice::Generator => "gen".into(),
            LambdaChoice::Coords(c) => c.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","),
        }
    }
}

/// Sample sizes of the individual checks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrialCounts {
    pub series: usize,
    pub sections: usize,
    pub units: usize,
    pub lattice: usize,
    pub lifts: usize,
    pub group_pairs: usize,
    pub bkz_elems: usize,
    pub bkz_windows: usize,
    pub windows: usize,
    pub j_lifts: usize,
    pub translates: usize,
    pub seeds: usize,
}

impl Default for TrialCounts {
    fn default() -> Self {
        TrialCounts {
            series: 500,
            sections: 200,
            units: 20,
            lattice: 500,
            lifts: 200,
            group_pairs: 200,
            bkz_elems: 50,
            bkz_windows: 20,
            windows: 100,
            j_lifts: 10,
            translates: 20,
            seeds: 3,
        }
    }
}

impl TrialCounts {
    const KEYS: [&'static str; 12] = [
        "series", "sections", "units", "lattice", "lifts", "group_pairs", "bkz_elems", "bkz_windows",
        "windows", "j_lifts", "translates", "seeds",
    ];

    fn slot(&mut self, key: &str) -> Option<&mut usize> {
        Some(match key {
            "series" => &mut self.series,
            "sections" => &mut self.sections,
            "units" => &mut self.units,
            "lattice" => &mut self.lattice,
            "lifts" => &mut self.lifts,
            "group_pairs" => &mut self.group_pairs,
            "bkz_elems" => &mut self.bkz_elems,
            "bkz_windows" => &mut self.bkz_windows,
            "windows" => &mut self.windows,
            "j_lifts" => &mut self.j_lifts,
            "translates" => &mut self.translates,
            "seeds" => &mut self.seeds,
            _ => return None,
        })
    }

    /// Sets every count to `n`.
    pub fn set_all(&mut self, n: usize) {
        for key in Self::KEYS {
            *self.slot(key).unwrap() = n;
        }
    }

    fn get(&self, key: &str) -> usize {
        self.clone().slot(key).map(|v| *v).unwrap()
    }
}

/// Everything a suite run depends on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunConfig {
    /// Primes for the series, module and lattice suites.
    pub primes: Vec<u32>,
    /// Primes for the window-based suites.
    pub window_primes: Vec<u32>,
    pub n: u32,
    /// `None` runs every `r` in `0..p`.
    pub r: Option<u32>,
    pub s: Vec<i64>,
    pub lambdas: Vec<LambdaChoice>,
    pub field_degree: u32,
    pub prec_x: i64,
    pub prec_p: u32,
    pub y_prec: i64,
    /// Extra window depth on top of what each check requires.
    pub depth: usize,
    /// Vanishing cases to run; empty means all applicable.
    pub cases: Vec<u8>,
    pub trials: TrialCounts,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            primes: vec![3, 5, 7],
            window_primes: vec![3, 5],
            n: 2,
            r: None,
            s: vec![0, 1],
            lambdas: vec![LambdaChoice::One, LambdaChoice::Generator],
            field_degree: 4,
            prec_x: 64,
            prec_p: 20,
            y_prec: 200,
            depth: 0,
            cases: Vec::new(),
            trials: TrialCounts::default(),
            seed: 1,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim().parse().map_err(|_| Error::Parse(format!("{key} = {v:?}")))
}

fn parse_list<T: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',').filter(|x| !x.trim().is_empty()).map(|x| parse_num(key, x)).collect()
}

impl RunConfig {
    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim();
        match key {
            "p" => {
                self.primes = parse_list(key, value)?;
                self.window_primes = self.primes.clone();
            }
            "primes" => self.primes = parse_list(key, value)?,
            "window_primes" => self.window_primes = parse_list(key, value)?,
            "n" => self.n = parse_num(key, value)?,
            "r" => {
                self.r = match value.trim() {
                    "all" => None,
                    v => Some(parse_num(key, v)?),
                }
            }
            "s" => self.s = parse_list(key, value)?,
            "lambda" => {
                self.lambdas = value.split(';').map(LambdaChoice::parse).collect::<Result<_>>()?;
            }
            "field_degree" | "m" => self.field_degree = parse_num(key, value)?,
            "prec_x" => self.prec_x = parse_num(key, value)?,
            "prec_p" => self.prec_p = parse_num(key, value)?,
            "y_prec" => self.y_prec = parse_num(key, value)?,
            "depth" => self.depth = parse_num(key, value)?,
            "cases" => self.cases = parse_list(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "trials" => self.trials.set_all(parse_num(key, value)?),
            _ => {
                let slot = key
                    .strip_prefix("trials.")
                    .and_then(|t| self.trials.slot(t))
                    .ok_or_else(|| Error::Parse(format!("unknown key {key:?}")))?;
                *slot = parse_num(key, value)?;
            }
        }
        Ok(())
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", lineno + 1)))?;
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }

    /// Checks the constraints every suite relies on, naming the first violated one.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.primes.is_empty() || self.window_primes.is_empty() {
            return bad("at least one prime is required".into());
        }
        for &p in self.primes.iter().chain(&self.window_primes) {
            FiniteField::new(p, 1).map_err(|e| Error::InvalidConfig(e.to_string()))?;
            if self.prec_p > max_precision(p) {
                return bad(format!("prec_p = {} exceeds the supported {} for p = {p}", self.prec_p, max_precision(p)));
            }
            if (p as f64).powi(self.prec_p as i32) <= self.prec_x as f64 {
                return bad(format!("p^M > N fails: {p}^{} <= {}", self.prec_p, self.prec_x));
            }
            if let Some(r) = self.r {
                if r > p - 1 {
                    return bad(format!("r = {r} > p - 1 for p = {p}"));
                }
            }
        }
        if !(1..=4).contains(&self.field_degree) {
            return bad(format!("field_degree = {} outside 1..=4", self.field_degree));
        }
        if self.n == 0 || 2 * self.n > 4 {
            return bad(format!("n = {} needs 1 <= 2n <= 4", self.n));
        }
        if self.prec_x < 8 || self.y_prec < 1 {
            return bad("prec_x >= 8 and y_prec >= 1 are required".into());
        }
        if self.s.is_empty() || self.lambdas.is_empty() {
            return bad("s and lambda lists must be nonempty".into());
        }
        if let Some(c) = self.cases.iter().find(|&&c| !(1..=3).contains(&c)) {
            return bad(format!("vanishing case {c} is not 1, 2 or 3"));
        }
        if let Some(r) = self.r {
            if r == 0 && self.cases.iter().any(|&c| c != 1) {
                return bad("cases 2 and 3 need r >= 1".into());
            }
            if r >= 1 && self.cases.contains(&1) {
                return bad("case 1 needs r = 0".into());
            }
        }
        for key in TrialCounts::KEYS {
            if self.trials.get(key) == 0 {
                return bad(format!("trials.{key} must be >= 1"));
            }
        }
        Ok(())
    }

    /// `r` values to run for the prime `p`.
    pub fn r_values(&self, p: u32) -> Vec<u32> {
        match self.r {
            Some(r) => vec![r],
            None => (0..p).collect(),
        }
    }

    /// Whether vanishing case `c` was requested.
    pub fn wants_case(&self, c: u8) -> bool {
        self.cases.is_empty() || self.cases.contains(&c)
    }

    /// All resolved settings, for report headers.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let join = |v: &[u32]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let mut m = BTreeMap::new();
        m.insert("primes".into(), join(&self.primes));
        m.insert("window_primes".into(), join(&self.window_primes));
        m.insert("n".into(), self.n.to_string());
        m.insert("r".into(), self.r.map_or("all".into(), |r| r.to_string()));
        m.insert("s".into(), self.s.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","));
        m.insert("lambda".into(), self.lambdas.iter().map(|l| l.label()).collect::<Vec<_>>().join(";"));
        m.insert("field_degree".into(), self.field_degree.to_string());
        m.insert("prec_x".into(), self.prec_x.to_string());
        m.insert("prec_p".into(), self.prec_p.to_string());
        m.insert("y_prec".into(), self.y_prec.to_string());
        m.insert("depth".into(), self.depth.to_string());
        m.insert(
            "cases".into(),
            if self.cases.is_empty() {
                "all".into()
            } else {
                self.cases.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
            },
        );
        m.insert("seed".into(), self.seed.to_string());
        for key in TrialCounts::KEYS {
            m.insert(format!("trials.{key}"), self.trials.get(key).to_string());
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn text_round_trip() {
        let cfg = RunConfig::from_text("p = 3\n# comment\nr = 0\ncases = 1\ntrials = 5\ntrials.windows = 7\nlambda = gen;1,1\n")
            .unwrap();
        assert_eq!(cfg.primes, vec![3]);
        assert_eq!(cfg.window_primes, vec![3]);
        assert_eq!(cfg.trials.series, 5);
        assert_eq!(cfg.trials.windows, 7);
        assert_eq!(cfg.lambdas, vec![LambdaChoice::Generator, LambdaChoice::Coords(vec![1, 1])]);
        cfg.validate().unwrap();
        assert_eq!(cfg.echo()["trials.windows"], "7");
    }

    #[test]
    fn violations_are_named() {
        let mut cfg = RunConfig::default();
        cfg.r = Some(0);
        cfg.cases = vec![2];
        assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(m)) if m.contains("r >= 1")));
        let mut cfg = RunConfig::default();
        cfg.prec_p = 2;
        cfg.prec_x = 100;
        assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(m)) if m.contains("p^M > N")));
        let mut cfg = RunConfig::default();
        cfg.r = Some(3);
        assert!(cfg.validate().is_err());
        assert!(RunConfig::from_text("bogus = 1").is_err());
        assert!(RunConfig::from_text("trials = 0").unwrap().validate().is_err());
    }
}
