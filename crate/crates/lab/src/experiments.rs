//! The five experiments. Each returns typed results plus a [`Report`] of
//! tables and plot data; nothing here touches the file system.

use std::sync::Arc;

use kwise_core::minimize::{
    continue_in_beta, default_delta, ground_profiles, initial_states, minimize, minimize_limit_problem,
    segregated_shells_level, Classification, Constraint, LimitStructure, MinimizeOptions, Solution,
};
use kwise_core::radial::{make_grid, product_integral, Domain, Params, RadialGrid, SystemState};
use kwise_core::scalar::{soliton_1d, solve_dirichlet_ground_state, ScalarProblem};
use kwise_core::system::normalized_overlap;
use kwise_core::thresholds::{
    c_bar_at_radius, compute_c_bar_with, compute_s_bar, compute_thresholds_with, minimize_reduced_quotient,
    semi_trivial_ceiling, ThresholdReport,
};
use rayon::prelude::*;

use crate::config::{domain_label, parse_domain, Config};
use crate::error::LabError;
use crate::output::{Cell, Plot, Report, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Scalar,
    Thresholds,
    Dichotomy,
    Sweep,
    Limit,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Scalar => "scalar",
            Experiment::Thresholds => "thresholds",
            Experiment::Dichotomy => "dichotomy",
            Experiment::Sweep => "sweep",
            Experiment::Limit => "limit",
        }
    }
}

pub fn run(experiment: Experiment, config: &Config) -> Result<Report, LabError> {
    match experiment {
        Experiment::Scalar => run_scalar(config),
        Experiment::Thresholds => run_thresholds(config).map(|(_, r)| r),
        Experiment::Dichotomy => run_dichotomy(config).map(|o| o.report()),
        Experiment::Sweep => run_sweep(config).map(|o| o.report()),
        Experiment::Limit => run_limit(config).map(|(_, r)| r),
    }
}

fn setup(config: &Config) -> Result<(Params, Arc<RadialGrid>), LabError> {
    let params = config.params().map_err(|e| LabError::Config {
        line: None,
        message: e.to_string(),
    })?;
    let grid = config.grid(&params).map_err(|e| LabError::Config {
        line: None,
        message: e.to_string(),
    })?;
    Ok((params, grid))
}

fn grid_cells(grid: &RadialGrid) -> [Cell; 2] {
    [grid.rmax.into(), grid.n.into()]
}

pub fn run_scalar(config: &Config) -> Result<Report, LabError> {
    let sc = &config.scalar;
    let grid = make_grid(sc.rmax, sc.n, sc.d).map_err(|e| LabError::Config {
        line: None,
        message: e.to_string(),
    })?;
    let domains: Vec<Domain> = sc
        .domains
        .iter()
        .map(|d| parse_domain(d).map_err(|m| LabError::Config { line: None, message: m }))
        .collect::<Result<_, _>>()?;
    let jobs: Vec<(Domain, [f64; 2])> = domains
        .iter()
        .flat_map(|d| sc.cases.iter().map(move |c| (*d, *c)))
        .collect();
    let solved: Vec<_> = jobs
        .par_iter()
        .map(|(d, [l, m])| solve_dirichlet_ground_state(&ScalarProblem::on(*d, sc.p, *l, *m), &grid))
        .collect();
    let base: Vec<Option<f64>> = domains
        .par_iter()
        .map(|d| {
            solve_dirichlet_ground_state(&ScalarProblem::on(*d, sc.p, 1.0, 1.0), &grid)
                .ok()
                .map(|s| s.c_value)
        })
        .collect();
    let mut table = Table::new(
        "scalar",
        &[
            "d", "p", "domain", "lambda", "mu", "rmax", "n", "c", "energy", "residual", "peak", "iterations",
            "scaling_prediction", "scaling_rel_err", "soliton_max_err", "status",
        ],
    );
    let mut plots = Vec::new();
    let (d, p) = (sc.d as f64, sc.p);
    for (idx, ((dom, [l, m]), res)) in jobs.iter().zip(&solved).enumerate() {
        let di = domains.iter().position(|x| x == dom).unwrap_or(0);
        let mut row: Vec<Cell> = vec![
            sc.d.into(),
            p.into(),
            domain_label(dom).into(),
            (*l).into(),
            (*m).into(),
        ];
        row.extend(grid_cells(&grid));
        match res {
            Ok(s) => {
                let prediction = match (dom, base[di]) {
                    (Domain::Full, Some(b)) => Some(b * l.powf(1.0 - d / 2.0 + d / p) * m.powf(-2.0 / p)),
                    _ => None,
                };
                let rel = prediction.map(|e| (s.c_value - e).abs() / e);
                let soliton = (sc.d == 1 && *dom == Domain::Full).then(|| {
                    grid.nodes
                        .iter()
                        .zip(&s.profile.values)
                        .map(|(&r, v)| (v - soliton_1d(p, *l, *m, r)).abs())
                        .fold(0.0, f64::max)
                });
                row.extend([
                    s.c_value.into(),
                    s.energy.into(),
                    s.residual.into(),
                    s.peak.into(),
                    s.iterations.into(),
                    prediction.into(),
                    rel.into(),
                    soliton.into(),
                    "ok".into(),
                ]);
                plots.push(Plot::new(
                    &format!("scalar_profile_{}", idx + 1),
                    "r",
                    "w",
                    grid.nodes.iter().cloned().zip(s.profile.values.iter().cloned()).collect(),
                ));
            }
            Err(e) => {
                row.extend((0..8).map(|_| Cell::Empty));
                row.push(format!("failed: {e}").into());
            }
        }
        table.push(row);
    }
    Ok(Report {
        tables: vec![table],
        plots,
        notes: Vec::new(),
    })
}

pub fn run_thresholds(config: &Config) -> Result<(ThresholdReport, Report), LabError> {
    let (params, grid) = setup(config)?;
    let partition = config.partition();
    let t = compute_thresholds_with(&params, &grid, partition, &[])
        .map_err(|e| LabError::solver("threshold computation", e))?;
    let mut main = Table::new(
        "thresholds",
        &[
            "d", "k", "q", "rmax", "n", "s_bar", "s_bar_argmin", "c_bar", "c_bar_partition", "c_bar_radius",
            "ubar_beta", "l_value", "reduced_min", "beta_bar_lower", "beta_bar_upper", "semi_trivial_ceiling",
        ],
    );
    let mut row: Vec<Cell> = vec![params.d.into(), params.k.into(), params.q.into()];
    row.extend(grid_cells(&grid));
    row.extend([
        t.s_bar.value.into(),
        (t.s_bar.argmin + 1).into(),
        t.c_bar.value.into(),
        config.thresholds.partition.clone().into(),
        t.c_bar.radius.into(),
        t.ubar_beta.into(),
        t.l_value.into(),
        t.reduced.value.into(),
        t.beta_bar_lower.into(),
        t.beta_bar_upper.value.into(),
        t.semi_trivial_ceiling.into(),
    ]);
    main.push(row);

    let mut members = Table::new("beta_bar_upper", &["member", "quotient"]);
    for (label, v) in &t.beta_bar_upper.members {
        members.push(vec![label.clone().into(), (*v).into()]);
    }

    let reduced_cases: Vec<(usize, f64)> = config
        .thresholds
        .reduced
        .iter()
        .map(|[k, q]| (*k as usize, *q))
        .collect();
    let reduced: Vec<_> = reduced_cases
        .par_iter()
        .map(|&(k, q)| minimize_reduced_quotient(k, q))
        .collect();
    let mut red = Table::new(
        "reduced",
        &["k", "q", "minimum", "symmetric_value", "abs_diff", "distinct_minima", "starts", "boundary_min", "status"],
    );
    for ((k, q), r) in reduced_cases.iter().zip(reduced) {
        match r {
            Ok(r) => red.push(vec![
                (*k).into(),
                (*q).into(),
                r.value.into(),
                r.symmetric_value.into(),
                (r.value - r.symmetric_value).abs().into(),
                r.distinct_minima.into(),
                r.starts.into(),
                r.boundary_min.into(),
                "ok".into(),
            ]),
            Err(e) => {
                let mut row: Vec<Cell> = vec![(*k).into(), (*q).into()];
                row.extend((0..6).map(|_| Cell::Empty));
                row.push(format!("failed: {e}").into());
                red.push(row);
            }
        }
    }

    let span = grid.rmax;
    let radii: Vec<f64> = (1..=24).map(|j| span * j as f64 / 50.0).collect();
    let scan: Vec<(f64, f64)> = radii
        .par_iter()
        .filter_map(|&r| c_bar_at_radius(&params, &grid, partition, r).ok().map(|v| (r, v)))
        .collect();
    let report = Report {
        tables: vec![main, members, red],
        plots: vec![Plot::new("c_bar_radius", "R", "c_bar", scan)],
        notes: Vec::new(),
    };
    Ok((t, report))
}

/// One start of a multistart batch and its outcome.
#[derive(Debug, Clone)]
pub struct StartRun {
    pub label: String,
    pub seed: u64,
    pub result: Result<Solution, String>,
}

/// Start battery for one coupling value: the deterministic starts once,
/// then three random mixtures per seed.
fn starts_for(
    params: &Params,
    grid: &Arc<RadialGrid>,
    seeds: &[u64],
    semi_index: usize,
    limit: Option<&SystemState>,
) -> Result<Vec<(String, u64, SystemState)>, kwise_core::Error> {
    let mut out = Vec::new();
    for (j, &seed) in seeds.iter().enumerate() {
        for (label, s) in initial_states(params, grid, seed, semi_index, limit)? {
            let random = label.starts_with("random");
            if j == 0 || random {
                out.push((label, seed, s));
            }
        }
    }
    Ok(out)
}

enum Start {
    Fresh(SystemState),
    /// Continuation from a minimizer at another coupling.
    Continue(SystemState, f64),
}

fn run_batch(
    params: &Params,
    starts: Vec<(String, u64, Start)>,
    constraint: Constraint,
    opts: &MinimizeOptions,
) -> Vec<StartRun> {
    starts
        .into_par_iter()
        .map(|(label, seed, start)| {
            let result = match start {
                Start::Fresh(u) => minimize(params, &u, constraint, opts),
                Start::Continue(u, from) => continue_in_beta(params, &u, from, constraint, opts),
            };
            StartRun {
                label,
                seed,
                result: result.map_err(|e| e.to_string()),
            }
        })
        .collect()
}

/// Lowest level among converged runs, falling back to any successful run.
pub fn best_index(runs: &[StartRun]) -> Option<usize> {
    let pick = |require: bool| {
        runs.iter()
            .enumerate()
            .filter_map(|(i, r)| match &r.result {
                Ok(s) if (s.converged || !require) && s.level.is_finite() => Some((i, s.level)),
                _ => None,
            })
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(i, _)| i)
    };
    pick(true).or_else(|| pick(false))
}

/// Best multistart result at one coupling value.
#[derive(Debug, Clone)]
pub struct LevelPoint {
    pub beta: f64,
    pub best: Option<Solution>,
    pub best_label: String,
    pub seed: u64,
    pub runs: usize,
    pub failures: usize,
    pub status: String,
}

impl LevelPoint {
    fn from_runs(beta: f64, runs: Vec<StartRun>) -> Self {
        let failures = runs.iter().filter(|r| r.result.is_err()).count();
        let total = runs.len();
        match best_index(&runs) {
            Some(i) => {
                let r = runs.into_iter().nth(i).expect("index in range");
                LevelPoint {
                    beta,
                    best: r.result.ok(),
                    best_label: r.label,
                    seed: r.seed,
                    runs: total,
                    failures,
                    status: "ok".into(),
                }
            }
            None => {
                let msg = runs
                    .iter()
                    .find_map(|r| r.result.as_ref().err().cloned())
                    .unwrap_or_else(|| "no starts".into());
                LevelPoint {
                    beta,
                    best: None,
                    best_label: String::new(),
                    seed: runs.first().map(|r| r.seed).unwrap_or(0),
                    runs: total,
                    failures,
                    status: format!("failed: {msg}"),
                }
            }
        }
    }

    pub fn level(&self) -> f64 {
        self.best.as_ref().map(|s| s.level).unwrap_or(f64::NAN)
    }
}

pub fn options_with_delta(config: &Config, params: &Params, s_bar: f64) -> MinimizeOptions {
    MinimizeOptions {
        delta_classify: config.solver.delta.unwrap_or_else(|| default_delta(params, s_bar)),
        ..config.minimize_options()
    }
}

#[derive(Debug, Clone)]
pub struct DichotomyOutcome {
    pub params: Params,
    pub grid: Arc<RadialGrid>,
    pub thresholds: ThresholdReport,
    pub points: Vec<LevelPoint>,
    /// Final bracket `(semi-trivial β, fully non-trivial β)` of the crossing.
    pub crossing: Option<(f64, f64)>,
}

fn is_fully_non_trivial(p: &LevelPoint) -> bool {
    p.best
        .as_ref()
        .is_some_and(|s| s.classification == Classification::FullyNonTrivial)
}

fn is_semi_trivial(p: &LevelPoint) -> bool {
    p.best
        .as_ref()
        .is_some_and(|s| matches!(s.classification, Classification::SemiTrivial(_)))
}

/// Multistart on the Nehari set at one coupling value, with optional warm
/// states from neighbouring couplings.
pub fn nehari_point(
    config: &Config,
    params: &Params,
    grid: &Arc<RadialGrid>,
    semi_index: usize,
    opts: &MinimizeOptions,
    warm: &[(String, SystemState)],
) -> Result<LevelPoint, LabError> {
    let starts = starts_for(params, grid, &config.run.seeds, semi_index, None)
        .map_err(|e| LabError::solver("initial states", e))?;
    let seed0 = config.run.seeds[0];
    let mut batch: Vec<(String, u64, Start)> = starts
        .into_iter()
        .map(|(l, s, u)| (l, s, Start::Fresh(u)))
        .collect();
    for (label, u) in warm {
        batch.push((label.clone(), seed0, Start::Fresh(u.clone())));
    }
    Ok(LevelPoint::from_runs(
        params.beta,
        run_batch(params, batch, Constraint::Nehari, opts),
    ))
}

pub fn run_dichotomy(config: &Config) -> Result<DichotomyOutcome, LabError> {
    let (params, grid) = setup(config)?;
    let thresholds = compute_thresholds_with(&params, &grid, config.partition(), &[])
        .map_err(|e| LabError::solver("threshold computation", e))?;
    let opts = options_with_delta(config, &params, thresholds.s_bar.value);
    let semi = thresholds.s_bar.argmin;
    let dc = &config.dichotomy;
    let mut betas: Vec<f64> = if dc.betas.is_empty() {
        let top = dc.upper_factor * thresholds.beta_bar_upper.value;
        (1..=dc.points).map(|j| top * j as f64 / dc.points as f64).collect()
    } else {
        dc.betas.clone()
    };
    betas.sort_by(f64::total_cmp);
    let mut points: Vec<LevelPoint> = Vec::with_capacity(betas.len());
    for &beta in &betas {
        let p = params.with_beta(beta);
        // the previous minimizer projected at a larger β has lower energy
        let warm: Vec<(String, SystemState)> = points
            .last()
            .and_then(|lp| lp.best.as_ref())
            .map(|s| vec![("previous-beta".to_string(), s.state.clone())])
            .unwrap_or_default();
        points.push(nehari_point(config, &p, &grid, semi, &opts, &warm)?);
    }
    let crossing = points
        .iter()
        .position(is_fully_non_trivial)
        .filter(|&i| i > 0 && is_semi_trivial(&points[i - 1]))
        .map(|i| (i - 1, i));
    let crossing = crossing.map(|(a, b)| {
        let (mut lo, mut hi) = (points[a].beta, points[b].beta);
        let mut lo_state = points[a].best.as_ref().map(|s| s.state.clone());
        let mut hi_state = points[b].best.as_ref().map(|s| s.state.clone());
        for _ in 0..dc.refine_steps {
            let mid = 0.5 * (lo + hi);
            let p = params.with_beta(mid);
            let mut warm = Vec::new();
            if let Some(s) = &lo_state {
                warm.push(("bracket-low".to_string(), s.clone()));
            }
            if let Some(s) = &hi_state {
                warm.push(("bracket-high".to_string(), s.clone()));
            }
            let Ok(pt) = nehari_point(config, &p, &grid, semi, &opts, &warm) else {
                break;
            };
            if is_fully_non_trivial(&pt) {
                hi = mid;
                hi_state = pt.best.map(|s| s.state);
            } else if is_semi_trivial(&pt) {
                lo = mid;
                lo_state = pt.best.map(|s| s.state);
            } else {
                break;
            }
        }
        (lo, hi)
    });
    Ok(DichotomyOutcome {
        params,
        grid,
        thresholds,
        points,
        crossing,
    })
}

fn lp_cells(s: Option<&Solution>, params: &Params) -> Vec<Cell> {
    match s {
        Some(s) => s.lp_norms(params).into_iter().map(Cell::from).collect(),
        None => (0..params.k).map(|_| Cell::Empty).collect(),
    }
}

fn lp_headers(k: usize) -> Vec<String> {
    (1..=k).map(|i| format!("lp_norm_{i}")).collect()
}

fn header_with(base: &[&str], extra: Vec<String>, tail: &[&str]) -> Vec<String> {
    base.iter()
        .map(|s| s.to_string())
        .chain(extra)
        .chain(tail.iter().map(|s| s.to_string()))
        .collect()
}

impl DichotomyOutcome {
    pub fn ceiling(&self) -> f64 {
        self.thresholds.semi_trivial_ceiling
    }

    pub fn report(&self) -> Report {
        let k = self.params.k;
        let ceiling = self.ceiling();
        let mut table = Table {
            name: "dichotomy".into(),
            header: header_with(
                &[
                    "beta", "seed", "rmax", "n", "level", "semi_trivial_ceiling", "rel_gap", "classification",
                    "best_start", "converged", "interaction",
                ],
                lp_headers(k),
                &["runs", "failures", "status"],
            ),
            rows: Vec::new(),
        };
        for pt in &self.points {
            let s = pt.best.as_ref();
            let mut row: Vec<Cell> = vec![pt.beta.into(), pt.seed.into()];
            row.extend(grid_cells(&self.grid));
            row.extend([
                s.map(|s| s.level).into(),
                ceiling.into(),
                s.map(|s| (ceiling - s.level) / ceiling).into(),
                s.map(|s| s.classification.label()).into(),
                pt.best_label.clone().into(),
                s.map(|s| s.converged).into(),
                s.map(|s| s.interaction).into(),
            ]);
            row.extend(lp_cells(s, &self.params));
            row.extend([pt.runs.into(), pt.failures.into(), pt.status.clone().into()]);
            table.push(row);
        }
        let levels: Vec<f64> = self.points.iter().map(LevelPoint::level).collect();
        let worst_increase = levels
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max);
        let lower = self.thresholds.beta_bar_lower;
        let upper = self.thresholds.beta_bar_upper.value;
        let mut crossing = Table::new(
            "dichotomy_crossing",
            &[
                "beta_bar_lower", "beta_bar_upper", "crossing_low", "crossing_high", "crossing_estimate",
                "within_bounds", "max_level_increase",
            ],
        );
        let (lo, hi) = match self.crossing {
            Some((a, b)) => (Some(a), Some(b)),
            None => (None, None),
        };
        let within = self
            .crossing
            .map(|(a, b)| a >= lower * (1.0 - 1e-2) && b <= upper * (1.0 + 1e-2));
        crossing.push(vec![
            lower.into(),
            upper.into(),
            lo.into(),
            hi.into(),
            self.crossing.map(|(a, b)| 0.5 * (a + b)).into(),
            within.into(),
            worst_increase.into(),
        ]);
        let plot = Plot::new(
            "dichotomy_level",
            "beta",
            "level",
            self.points.iter().map(|p| (p.beta, p.level())).collect(),
        );
        Report {
            tables: vec![table, crossing],
            plots: vec![plot],
            notes: vec![("level_label".into(), "best multistart level (upper bound)".into())],
        }
    }
}

/// Diagnostics of one sweep point.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub point: LevelPoint,
    pub interaction: f64,
    pub scaled_interaction: f64,
    /// Normalized overlaps `(i, j, value)` for every unordered pair.
    pub overlaps: Vec<(usize, usize, f64)>,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub params: Params,
    pub grid: Arc<RadialGrid>,
    pub c_bar: f64,
    pub s_bar: f64,
    pub limit: LimitStructure,
    pub points: Vec<SweepPoint>,
}

pub fn pair_overlaps(u: &SystemState, p: f64) -> Vec<(usize, usize, f64)> {
    let k = u.k();
    let mut out = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            out.push((i, j, normalized_overlap(u, i, j, p)));
        }
    }
    out
}

pub fn run_sweep(config: &Config) -> Result<SweepOutcome, LabError> {
    let (params, grid) = setup(config)?;
    let s_bar = compute_s_bar(&params, &grid).map_err(|e| LabError::solver("S-bar", e))?;
    let c_bar =
        compute_c_bar_with(&params, &grid, config.partition()).map_err(|e| LabError::solver("C-bar", e))?;
    let limit = minimize_limit_problem(&params, &grid).map_err(|e| LabError::solver("limit problem", e))?;
    let opts = options_with_delta(config, &params, s_bar.value);
    let mut points: Vec<SweepPoint> = Vec::new();
    let mut previous: Option<(f64, SystemState)> = None;
    for &beta in &config.sweep.betas {
        let p = params.with_beta(beta);
        let starts = starts_for(&p, &grid, &config.run.seeds, s_bar.argmin, Some(&limit.state))
            .map_err(|e| LabError::solver("initial states", e))?;
        let mut batch: Vec<(String, u64, Start)> = starts
            .into_iter()
            .map(|(l, s, u)| (l, s, Start::Fresh(u)))
            .collect();
        if config.sweep.warm_start {
            if let Some((from, u)) = &previous {
                batch.push(("previous-beta".into(), config.run.seeds[0], Start::Continue(u.clone(), *from)));
            }
        }
        let point = LevelPoint::from_runs(beta, run_batch(&p, batch, Constraint::Componentwise, &opts));
        let (interaction, overlaps) = match &point.best {
            Some(s) => (product_integral(&s.state, params.q), pair_overlaps(&s.state, params.p())),
            None => (f64::NAN, Vec::new()),
        };
        if let Some(s) = &point.best {
            previous = Some((beta, s.state.clone()));
        }
        points.push(SweepPoint {
            scaled_interaction: beta.abs() * interaction,
            interaction,
            overlaps,
            point,
        });
    }
    Ok(SweepOutcome {
        params,
        grid,
        c_bar: c_bar.value,
        s_bar: s_bar.value,
        limit,
        points,
    })
}

/// How the last sweep point compares with the limit structure.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitComparison {
    pub final_beta: f64,
    pub final_level: f64,
    pub limit_level: f64,
    pub rel_gap: f64,
    /// First over last scaled interaction.
    pub decay_factor: f64,
    /// The pair with the smallest normalized overlap.
    pub segregated_pair: (usize, usize),
    pub segregated_overlap: f64,
    /// Smallest overlap among the other pairs.
    pub other_overlap_min: f64,
    pub pairs_below_threshold: usize,
    pub pair_matches_limit: bool,
    /// Largest max-norm distance of a free component from its scalar
    /// ground state.
    pub free_deviation: f64,
    /// Free components positive at every node up to `rmax/2`.
    pub free_positive: bool,
}

pub const OVERLAP_THRESHOLD: f64 = 1e-3;

impl SweepOutcome {
    pub fn comparison(&self) -> Option<LimitComparison> {
        let last = self.points.last()?;
        let sol = last.point.best.as_ref()?;
        let first = self.points.first()?;
        let (a, b, seg) = last
            .overlaps
            .iter()
            .cloned()
            .min_by(|x, y| x.2.total_cmp(&y.2))?;
        let other_overlap_min = last
            .overlaps
            .iter()
            .filter(|o| (o.0, o.1) != (a, b))
            .map(|o| o.2)
            .fold(f64::INFINITY, f64::min);
        let below = last.overlaps.iter().filter(|o| o.2 < OVERLAP_THRESHOLD).count();
        let (l1, l2) = self.limit.pair;
        // components with identical parameters are interchangeable
        let key = |i: usize| (self.params.lambda[i], self.params.mu[i]);
        let same = |x: (usize, usize), y: (usize, usize)| {
            (key(x.0) == key(y.0) && key(x.1) == key(y.1)) || (key(x.0) == key(y.1) && key(x.1) == key(y.0))
        };
        let pair_matches_limit = same((a, b), (l1, l2));
        let w = ground_profiles(&self.params, &self.grid).ok()?;
        let half = self.grid.rmax / 2.0;
        let mut dev: f64 = 0.0;
        let mut positive = true;
        for m in (0..self.params.k).filter(|&m| m != a && m != b) {
            let u = &sol.state.components[m];
            for ((x, y), r) in u.iter().zip(&w[m]).zip(&self.grid.nodes) {
                dev = dev.max((x - y).abs());
                if *r <= half && !(*x > 0.0) {
                    positive = false;
                }
            }
        }
        Some(LimitComparison {
            final_beta: last.point.beta,
            final_level: sol.level,
            limit_level: self.limit.level,
            rel_gap: (sol.level - self.limit.level).abs() / self.limit.level,
            decay_factor: first.scaled_interaction / last.scaled_interaction,
            segregated_pair: (a, b),
            segregated_overlap: seg,
            other_overlap_min,
            pairs_below_threshold: below,
            pair_matches_limit,
            free_deviation: dev,
            free_positive: positive,
        })
    }

    pub fn report(&self) -> Report {
        let k = self.params.k;
        let pair_names: Vec<String> = (0..k)
            .flat_map(|i| (i + 1..k).map(move |j| format!("overlap_{}_{}", i + 1, j + 1)))
            .collect();
        let mut extra = lp_headers(k);
        extra.extend(pair_names);
        let mut table = Table {
            name: "sweep".into(),
            header: header_with(
                &[
                    "beta", "seed", "rmax", "n", "level", "interaction", "scaled_interaction", "classification",
                    "best_start", "converged", "multiplier_residual", "c_bar", "below_c_bar", "limit_level",
                    "rel_gap_to_limit",
                ],
                extra,
                &["runs", "failures", "status"],
            ),
            rows: Vec::new(),
        };
        for sp in &self.points {
            let pt = &sp.point;
            let s = pt.best.as_ref();
            let mut row: Vec<Cell> = vec![pt.beta.into(), pt.seed.into()];
            row.extend(grid_cells(&self.grid));
            row.extend([
                s.map(|s| s.level).into(),
                sp.interaction.into(),
                sp.scaled_interaction.into(),
                s.map(|s| s.classification.label()).into(),
                pt.best_label.clone().into(),
                s.map(|s| s.converged).into(),
                s.map(|s| s.multiplier_residual).into(),
                self.c_bar.into(),
                s.map(|s| s.level <= self.c_bar).into(),
                self.limit.level.into(),
                s.map(|s| (s.level - self.limit.level).abs() / self.limit.level).into(),
            ]);
            row.extend(lp_cells(s, &self.params));
            if sp.overlaps.is_empty() {
                row.extend((0..k * (k - 1) / 2).map(|_| Cell::Empty));
            } else {
                row.extend(sp.overlaps.iter().map(|o| Cell::from(o.2)));
            }
            row.extend([pt.runs.into(), pt.failures.into(), pt.status.clone().into()]);
            table.push(row);
        }
        let mut cmp = Table::new(
            "sweep_limit",
            &[
                "final_beta", "final_level", "limit_level", "rel_gap", "decay_factor", "limit_pair",
                "limit_radius", "segregated_pair", "segregated_overlap", "other_overlap_min",
                "pairs_below_threshold", "pair_matches_limit", "free_max_deviation", "free_positive",
            ],
        );
        let (l1, l2) = self.limit.pair;
        let limit_pair = format!("{} {}", l1.min(l2) + 1, l1.max(l2) + 1);
        if let Some(c) = self.comparison() {
            cmp.push(vec![
                c.final_beta.into(),
                c.final_level.into(),
                c.limit_level.into(),
                c.rel_gap.into(),
                c.decay_factor.into(),
                limit_pair.into(),
                self.limit.interface_radius.into(),
                format!("{} {}", c.segregated_pair.0 + 1, c.segregated_pair.1 + 1).into(),
                c.segregated_overlap.into(),
                c.other_overlap_min.into(),
                c.pairs_below_threshold.into(),
                c.pair_matches_limit.into(),
                c.free_deviation.into(),
                c.free_positive.into(),
            ]);
        }
        let plots = vec![
            Plot::new(
                "sweep_scaled_interaction",
                "abs_beta",
                "scaled_interaction",
                self.points.iter().map(|p| (p.point.beta.abs(), p.scaled_interaction)).collect(),
            ),
            Plot::new(
                "sweep_level",
                "abs_beta",
                "level",
                self.points.iter().map(|p| (p.point.beta.abs(), p.point.level())).collect(),
            ),
        ];
        Report {
            tables: vec![table, cmp],
            plots,
            notes: vec![("level_label".into(), "best multistart level (upper bound)".into())],
        }
    }
}

pub fn run_limit(config: &Config) -> Result<(LimitStructure, Report), LabError> {
    let (params, grid) = setup(config)?;
    let ls = minimize_limit_problem(&params, &grid).map_err(|e| LabError::solver("limit problem", e))?;
    let lmin = params.lambda.iter().cloned().fold(f64::INFINITY, f64::min);
    let unit = 1.0 / lmin.sqrt();
    let shells: Vec<(f64, Result<f64, String>)> = [0.5, 1.0, 2.0]
        .par_iter()
        .map(|&f| {
            let r = f * unit;
            (r, segregated_shells_level(&params, &grid, r).map_err(|e| e.to_string()))
        })
        .collect();
    let (a, b) = ls.pair;
    let mut main = Table::new(
        "limit",
        &[
            "d", "k", "q", "rmax", "n", "level", "exterior_component", "ball_component", "interface_radius",
            "pair_energy", "product_integral", "multimodal", "boundary_optimum",
        ],
    );
    let mut row: Vec<Cell> = vec![params.d.into(), params.k.into(), params.q.into()];
    row.extend(grid_cells(&grid));
    row.extend([
        ls.level.into(),
        (a + 1).into(),
        (b + 1).into(),
        ls.interface_radius.into(),
        ls.pair_energy.into(),
        product_integral(&ls.state, params.q).into(),
        ls.multimodal.into(),
        ls.boundary_optimum.into(),
    ]);
    main.push(row);
    let mut pairs = Table::new("limit_pairs", &["i", "j", "level"]);
    for (i, j, l) in &ls.candidates {
        pairs.push(vec![(i + 1).into(), (j + 1).into(), (*l).into()]);
    }
    let mut seg = Table::new("limit_shells", &["shell_width", "level", "above_limit", "status"]);
    for (r, res) in &shells {
        match res {
            Ok(v) => seg.push(vec![(*r).into(), (*v).into(), (*v > ls.level).into(), "ok".into()]),
            Err(e) => seg.push(vec![(*r).into(), Cell::Empty, Cell::Empty, format!("failed: {e}").into()]),
        }
    }
    let mut plots: Vec<Plot> = (0..params.k)
        .map(|i| {
            Plot::new(
                &format!("limit_component_{}", i + 1),
                "r",
                "u",
                grid.nodes.iter().cloned().zip(ls.state.components[i].iter().cloned()).collect(),
            )
        })
        .collect();
    plots.push(Plot::new("limit_interface_scan", "R", "pair_energy", ls.scan.clone()));
    let report = Report {
        tables: vec![main, pairs, seg],
        plots,
        notes: Vec::new(),
    };
    Ok((ls, report))
}

/// The semi-trivial ceiling for the configured parameters.
pub fn ceiling(config: &Config) -> Result<f64, LabError> {
    let (params, grid) = setup(config)?;
    let s = compute_s_bar(&params, &grid).map_err(|e| LabError::solver("S-bar", e))?;
    Ok(semi_trivial_ceiling(&params, s.value))
}
