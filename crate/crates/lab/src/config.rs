//! Experiment configuration: a TOML file with one section per concern.
//! Every key is optional; missing keys take the values written by
//! `kwise-lab defaults`.

use std::path::Path;

use kwise_core::minimize::MinimizeOptions;
use kwise_core::radial::{make_grid, Domain, Params, RadialGrid};
use kwise_core::thresholds::Partition;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::error::LabError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub params: ParamsSection,
    pub grid: GridSection,
    pub solver: SolverSection,
    pub run: RunSection,
    pub scalar: ScalarSection,
    pub thresholds: ThresholdsSection,
    pub dichotomy: DichotomySection,
    pub sweep: SweepSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParamsSection {
    pub d: usize,
    pub k: usize,
    pub q: f64,
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
    pub beta: f64,
}

impl Default for ParamsSection {
    fn default() -> Self {
        ParamsSection {
            d: 2,
            k: 3,
            q: 2.0,
            lambda: vec![1.0; 3],
            mu: vec![1.0; 3],
            beta: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    /// Radius of the computational ball; `30/√min λ` when absent.
    pub rmax: Option<f64>,
    pub n: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection { rmax: None, n: 4000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub grad_tol: f64,
    pub energy_tol: f64,
    pub max_iter: usize,
    pub newton_polish: bool,
    /// Classification threshold; `max(1e-4, 0.1·S̄^{1/(Kq-2)})` when absent.
    pub delta: Option<f64>,
}

impl Default for SolverSection {
    fn default() -> Self {
        let o = MinimizeOptions::default();
        SolverSection {
            grad_tol: o.grad_tol,
            energy_tol: o.energy_tol,
            max_iter: o.max_iter,
            newton_polish: o.newton_polish,
            delta: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    /// Seeds for the pseudo-random starting states.
    pub seeds: Vec<u64>,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection { seeds: vec![7] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScalarSection {
    pub d: usize,
    pub p: f64,
    pub rmax: f64,
    pub n: usize,
    /// `full`, `ball:R`, `annulus:A:B` or `exterior:R`.
    pub domains: Vec<String>,
    /// `[λ, μ]` pairs.
    pub cases: Vec<[f64; 2]>,
}

impl Default for ScalarSection {
    fn default() -> Self {
        ScalarSection {
            d: 1,
            p: 4.0,
            rmax: 20.0,
            n: 4000,
            domains: vec!["full".into()],
            cases: vec![[1.0, 1.0], [4.0, 1.0], [1.0, 3.0]],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThresholdsSection {
    /// `ball-exterior` or `annuli`.
    pub partition: String,
    /// `[K, q]` pairs for the reduced quotient.
    pub reduced: Vec<[f64; 2]>,
}

impl Default for ThresholdsSection {
    fn default() -> Self {
        ThresholdsSection {
            partition: "ball-exterior".into(),
            reduced: vec![[3.0, 1.0], [3.0, 2.0], [4.0, 1.0]],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DichotomySection {
    /// Explicit β grid; when empty, `points` equispaced values in
    /// `(0, upper_factor·β̄_upper]`.
    pub betas: Vec<f64>,
    pub points: usize,
    pub upper_factor: f64,
    /// Bisection steps used to locate the crossing.
    pub refine_steps: usize,
}

impl Default for DichotomySection {
    fn default() -> Self {
        DichotomySection {
            betas: Vec::new(),
            points: 8,
            upper_factor: 2.0,
            refine_steps: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub betas: Vec<f64>,
    pub warm_start: bool,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            betas: vec![-1.0, -10.0, -100.0, -1000.0],
            warm_start: true,
        }
    }
}

/// The annotated reference file written by `kwise-lab defaults`.
pub fn reference() -> String {
    let body = toml::to_string_pretty(&Config::default()).expect("default config serializes");
    format!(
        "# kwise-lab reference configuration; every key is optional.\n\
         # [grid] rmax defaults to 30/sqrt(min lambda) when absent.\n\
         # [solver] delta defaults to max(1e-4, 0.1*S^(1/(Kq-2))) when absent.\n\
         # [scalar] domains: full | ball:R | annulus:A:B | exterior:R\n\
         # [thresholds] partition: ball-exterior | annuli\n\n{body}"
    )
}

impl Config {
    pub fn load(path: &Path) -> Result<Config, LabError> {
        let source = std::fs::read_to_string(path).map_err(|e| LabError::Config {
            line: None,
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        Config::parse(&source)
    }

    pub fn parse(source: &str) -> Result<Config, LabError> {
        let config: Config = toml::from_str(source).map_err(|e| LabError::Config {
            line: e.span().map(|s| line_of(source, s.start)),
            message: e.message().to_string(),
        })?;
        config.validate(source)?;
        Ok(config)
    }

    fn validate(&self, source: &str) -> Result<(), LabError> {
        let fail = |section: &str, key: &str, message: String| LabError::Config {
            line: locate(source, section, key),
            message,
        };
        let p = &self.params;
        if p.lambda.len() != p.k {
            return Err(fail("params", "lambda", format!("lambda has {} entries, expected k = {}", p.lambda.len(), p.k)));
        }
        if p.mu.len() != p.k {
            return Err(fail("params", "mu", format!("mu has {} entries, expected k = {}", p.mu.len(), p.k)));
        }
        if let Err(e) = self.params() {
            let key = if p.k < 3 {
                "k"
            } else if p.lambda.iter().any(|l| !(*l > 0.0)) {
                "lambda"
            } else if p.mu.iter().any(|m| !(*m > 0.0)) {
                "mu"
            } else if p.d == 0 {
                "d"
            } else {
                "q"
            };
            return Err(fail("params", key, e.to_string()));
        }
        if let Some(r) = self.grid.rmax {
            if !(r > 0.0) {
                return Err(fail("grid", "rmax", "rmax must be positive".into()));
            }
        }
        if self.grid.n < 16 {
            return Err(fail("grid", "n", "n must be at least 16".into()));
        }
        let s = &self.solver;
        for (key, v) in [("grad_tol", s.grad_tol), ("energy_tol", s.energy_tol)] {
            if !(v > 0.0) {
                return Err(fail("solver", key, format!("{key} must be positive")));
            }
        }
        if s.max_iter == 0 {
            return Err(fail("solver", "max_iter", "max_iter must be positive".into()));
        }
        if let Some(d) = s.delta {
            if !(d > 0.0) {
                return Err(fail("solver", "delta", "delta must be positive".into()));
            }
        }
        if self.run.seeds.is_empty() {
            return Err(fail("run", "seeds", "at least one seed is required".into()));
        }
        let sc = &self.scalar;
        if sc.d == 0 || !(sc.p > 2.0) || !(sc.rmax > 0.0) || sc.n < 16 {
            let key = if sc.d == 0 {
                "d"
            } else if !(sc.p > 2.0) {
                "p"
            } else if !(sc.rmax > 0.0) {
                "rmax"
            } else {
                "n"
            };
            return Err(fail("scalar", key, format!("invalid scalar setting {key}")));
        }
        for d in &sc.domains {
            parse_domain(d).map_err(|m| fail("scalar", "domains", m))?;
        }
        if sc.cases.iter().any(|[l, m]| !(*l > 0.0) || !(*m > 0.0)) {
            return Err(fail("scalar", "cases", "cases need positive [lambda, mu]".into()));
        }
        parse_partition(&self.thresholds.partition).map_err(|m| fail("thresholds", "partition", m))?;
        for [k, q] in &self.thresholds.reduced {
            if k.fract() != 0.0 || *k < 3.0 || !(*q >= 1.0) {
                return Err(fail("thresholds", "reduced", format!("invalid [K, q] pair [{k}, {q}]")));
            }
        }
        let dc = &self.dichotomy;
        if dc.betas.iter().any(|b| !(*b > 0.0)) {
            return Err(fail("dichotomy", "betas", "dichotomy betas must be positive".into()));
        }
        if dc.betas.is_empty() && dc.points == 0 {
            return Err(fail("dichotomy", "points", "points must be positive".into()));
        }
        if !(dc.upper_factor > 0.0) {
            return Err(fail("dichotomy", "upper_factor", "upper_factor must be positive".into()));
        }
        if self.sweep.betas.is_empty() {
            return Err(fail("sweep", "betas", "the sweep schedule is empty".into()));
        }
        if self.sweep.betas.iter().any(|b| !(*b < 0.0) || !b.is_finite()) {
            return Err(fail("sweep", "betas", "sweep betas must be negative".into()));
        }
        if self.sweep.betas.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(fail("sweep", "betas", "sweep betas must be strictly decreasing".into()));
        }
        Ok(())
    }

    pub fn params(&self) -> Result<Params, kwise_core::Error> {
        let p = &self.params;
        Params::new(p.d, p.q, p.lambda.clone(), p.mu.clone(), p.beta)
    }

    pub fn grid(&self, params: &Params) -> Result<Arc<RadialGrid>, kwise_core::Error> {
        let lmin = params.lambda.iter().cloned().fold(f64::INFINITY, f64::min);
        let rmax = self.grid.rmax.unwrap_or(30.0 / lmin.sqrt());
        make_grid(rmax, self.grid.n, params.d)
    }

    pub fn minimize_options(&self) -> MinimizeOptions {
        MinimizeOptions {
            grad_tol: self.solver.grad_tol,
            energy_tol: self.solver.energy_tol,
            max_iter: self.solver.max_iter,
            newton_polish: self.solver.newton_polish,
            ..MinimizeOptions::default()
        }
    }

    pub fn partition(&self) -> Partition {
        parse_partition(&self.thresholds.partition).unwrap_or(Partition::BallExterior)
    }
}

pub fn parse_partition(s: &str) -> Result<Partition, String> {
    match s {
        "ball-exterior" => Ok(Partition::BallExterior),
        "annuli" => Ok(Partition::Annuli),
        other => Err(format!("unknown partition `{other}`")),
    }
}

pub fn parse_domain(s: &str) -> Result<Domain, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| format!("bad number `{t}` in domain `{s}`"))
    };
    match parts.as_slice() {
        ["full"] => Ok(Domain::Full),
        ["ball", r] => Ok(Domain::Ball(num(r)?)),
        ["annulus", a, b] => Ok(Domain::Annulus(num(a)?, num(b)?)),
        ["exterior", r] => Ok(Domain::Exterior(num(r)?)),
        _ => Err(format!("unknown domain `{s}`")),
    }
}

pub fn domain_label(d: &Domain) -> String {
    match d {
        Domain::Full => "full".into(),
        Domain::Ball(r) => format!("ball:{r}"),
        Domain::Annulus(a, b) => format!("annulus:{a}:{b}"),
        Domain::Exterior(r) => format!("exterior:{r}"),
    }
}

/// 1-based line containing byte `offset`.
fn line_of(source: &str, offset: usize) -> usize {
    source[..offset.min(source.len())].matches('\n').count() + 1
}

/// 1-based line of `key` inside `[section]`, falling back to the section
/// header.
fn locate(source: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    let mut header = None;
    for (i, raw) in source.lines().enumerate() {
        let line = raw.trim();
        if let Some(rest) = line.strip_prefix('[') {
            current = rest.trim_end_matches(']').trim().to_string();
            if current == section {
                header = Some(i + 1);
            }
            continue;
        }
        if current == section {
            if let Some((k, _)) = line.split_once('=') {
                if k.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    header
}
