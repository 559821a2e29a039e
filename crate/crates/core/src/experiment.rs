//! Disorder-averaged measurement campaigns.
//!
//! Two protocols are provided. [`protocol_fixed_starts`] runs a fixed number
//! of restarts per disorder realization; [`protocol_fixed_budget`] keeps
//! restarting until a per-realization work budget is spent. Both report the
//! mean relaxation time `tau` (flips per run) and `h_n`, the mean over
//! realizations of the lowest endpoint energy per spin.
//!
//! # Seeding
//!
//! Realization `r` of size `n` uses the coupling seed
//! `derive(instance_seed, [n, r])`, independent of lambda, so every lambda in
//! a campaign sees the same disorder. Restart `s` of realization `r` draws its
//! initial configuration and its depth noise from one [`Stream`] seeded with
//! `derive(cell_seed, [lambda.to_bits(), r, s])`. Campaign-level seeds are
//! `instance_seed = derive(master, [TAG_INSTANCES])` and
//! `cell_seed = derive(master, [TAG_TRAJECTORIES, n])`.

use std::borrow::Cow;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dynamics::{
    default_max_flips, descend, random_config, run_trajectory, LambdaParam, Trajectory,
};
use crate::error::{Error, Result};
use crate::seed::{derive, Stream, TAG_INSTANCES, TAG_TRAJECTORIES};
use crate::sk_model::{generate_couplings, init_state, CouplingMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Protocol {
    FixedStarts,
    FixedBudget,
}

impl Protocol {
    pub fn as_str(self) -> &'static str {
        match self {
            Protocol::FixedStarts => "fixed-starts",
            Protocol::FixedBudget => "fixed-budget",
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed-starts" => Ok(Protocol::FixedStarts),
            "fixed-budget" => Ok(Protocol::FixedBudget),
            other => Err(Error::usage(
                "protocol",
                format!("expected `fixed-starts` or `fixed-budget`, got `{other}`"),
            )),
        }
    }
}

/// Restarts per realization: a fixed count, or `N` (one per spin).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Starts {
    PerSpin,
    Count(u32),
}

impl Starts {
    pub fn resolve(self, n: usize) -> u32 {
        match self {
            Starts::PerSpin => n as u32,
            Starts::Count(c) => c,
        }
    }
}

impl fmt::Display for Starts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Starts::PerSpin => f.write_str("N"),
            Starts::Count(c) => c.fmt(f),
        }
    }
}

impl FromStr for Starts {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("n") {
            return Ok(Starts::PerSpin);
        }
        match s.parse::<u32>() {
            Ok(c) if c > 0 => Ok(Starts::Count(c)),
            _ => Err(Error::usage(
                "starts_per_realization",
                format!("expected a positive integer or `N`, got `{s}`"),
            )),
        }
    }
}

impl Serialize for Starts {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Starts::PerSpin => s.serialize_str("N"),
            Starts::Count(c) => s.serialize_u32(*c),
        }
    }
}

impl<'de> Deserialize<'de> for Starts {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Int(i64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Int(c) if c > 0 && c <= u32::MAX as i64 => Ok(Starts::Count(c as u32)),
            Repr::Int(c) => Err(serde::de::Error::custom(format!(
                "starts_per_realization must be positive, got {c}"
            ))),
            Repr::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub protocol: Protocol,
    pub sizes: Vec<usize>,
    pub lambdas: Vec<f64>,
    pub nreal: u32,
    pub starts_per_realization: Starts,
    /// Work allowed per realization under [`Protocol::FixedBudget`].
    pub flip_budget: Option<u64>,
    /// Optional extra wall-clock cap per realization (fixed-budget only).
    /// Makes results machine dependent.
    pub wall_clock_seconds: Option<f64>,
    pub master_seed: u64,
    pub exclude_sizes_from_fit: Vec<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            protocol: Protocol::FixedStarts,
            sizes: vec![25, 50, 100, 200],
            lambdas: vec![1.0, 10.0, 25.0, 45.0, 70.0, 100.0],
            nreal: 50,
            starts_per_realization: Starts::PerSpin,
            flip_budget: None,
            wall_clock_seconds: None,
            master_seed: 1,
            exclude_sizes_from_fit: Vec::new(),
        }
    }
}

impl ExperimentConfig {
    /// Checks the config invariants, naming the offending field on failure.
    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() {
            return Err(Error::usage("sizes", "at least one size is required"));
        }
        if let Some(bad) = self.sizes.iter().find(|&&n| n == 0) {
            return Err(Error::usage(
                "sizes",
                format!("sizes must be positive, got {bad}"),
            ));
        }
        if self.lambdas.is_empty() {
            return Err(Error::usage("lambdas", "at least one lambda is required"));
        }
        if let Some(bad) = self.lambdas.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(Error::usage(
                "lambdas",
                format!("lambda must be positive and finite, got {bad}"),
            ));
        }
        if self.nreal == 0 {
            return Err(Error::usage("nreal", "must be positive"));
        }
        if let Starts::Count(0) = self.starts_per_realization {
            return Err(Error::usage("starts_per_realization", "must be positive"));
        }
        match (self.protocol, self.flip_budget) {
            (Protocol::FixedBudget, None) => {
                return Err(Error::usage(
                    "flip_budget",
                    "the fixed-budget protocol requires a flip budget",
                ))
            }
            (_, Some(0)) => return Err(Error::usage("flip_budget", "must be positive")),
            _ => {}
        }
        if let Some(w) = self.wall_clock_seconds {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::usage("wall_clock_seconds", "must be positive"));
            }
        }
        Ok(())
    }

    /// `(size, lambda)` cells in output order.
    pub fn cells(&self) -> Vec<(usize, f64)> {
        self.sizes
            .iter()
            .flat_map(|&n| self.lambdas.iter().map(move |&l| (n, l)))
            .collect()
    }
}

/// Supplies the coupling matrix for each disorder realization.
pub trait InstanceSource: Sync {
    fn couplings(&self, n: usize, realization: u32) -> Result<Cow<'_, CouplingMatrix>>;
}

/// Fresh Gaussian instances: realization `r` of size `n` uses
/// `generate_couplings(n, derive(seed, [n, r]))`.
#[derive(Clone, Copy, Debug)]
pub struct GaussianInstances {
    pub seed: u64,
}

impl GaussianInstances {
    pub fn new(seed: u64) -> Self {
        GaussianInstances { seed }
    }

    pub fn for_master_seed(master_seed: u64) -> Self {
        GaussianInstances::new(derive(master_seed, &[TAG_INSTANCES]))
    }

    pub fn instance_seed(&self, n: usize, realization: u32) -> u64 {
        derive(self.seed, &[n as u64, realization as u64])
    }
}

impl InstanceSource for GaussianInstances {
    fn couplings(&self, n: usize, realization: u32) -> Result<Cow<'_, CouplingMatrix>> {
        generate_couplings(n, self.instance_seed(n, realization)).map(Cow::Owned)
    }
}

/// The same matrix for every realization.
#[derive(Clone, Debug)]
pub struct FixedInstance(pub CouplingMatrix);

impl InstanceSource for FixedInstance {
    fn couplings(&self, n: usize, _realization: u32) -> Result<Cow<'_, CouplingMatrix>> {
        if n != self.0.n() {
            return Err(Error::DimensionMismatch {
                expected: self.0.n(),
                found: n,
            });
        }
        Ok(Cow::Borrowed(&self.0))
    }
}

/// Sees every finished trajectory of a protocol run.
pub trait EndpointObserver: Sync {
    fn observe(&self, realization: u32, couplings: &CouplingMatrix, trajectory: &Trajectory);
}

impl<F> EndpointObserver for F
where
    F: Fn(u32, &CouplingMatrix, &Trajectory) + Sync,
{
    fn observe(&self, realization: u32, couplings: &CouplingMatrix, trajectory: &Trajectory) {
        self(realization, couplings, trajectory)
    }
}

struct NoObserver;

impl EndpointObserver for NoObserver {
    fn observe(&self, _: u32, _: &CouplingMatrix, _: &Trajectory) {}
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnergyStats {
    pub protocol: Protocol,
    pub n: usize,
    pub lambda: f64,
    pub nreal: u32,
    /// Restarts per realization (fixed-starts) or flip budget (fixed-budget).
    pub starts_or_budget: u64,
    /// Trajectories entering `tau`.
    pub runs: u64,
    pub tau: Option<f64>,
    pub tau_stderr: Option<f64>,
    pub h_n: Option<f64>,
    pub h_n_stderr: Option<f64>,
    /// Runs stopped by the flip cap before reaching a stable state.
    pub truncated_runs: u64,
    /// Fixed-budget runs cut off by budget expiry.
    pub discarded_runs: u64,
    /// Realizations with no completed trajectory; excluded from `h_n`.
    pub flagged_realizations: Vec<u32>,
    /// Lowest stable endpoint energy per spin, by realization.
    pub realization_minima: Vec<Option<f64>>,
}

#[derive(Default)]
struct RealizationOutcome {
    flips: Vec<u64>,
    minimum: Option<f64>,
    truncated: u64,
    discarded: u64,
}

impl RealizationOutcome {
    fn record_endpoint(&mut self, energy_per_spin: f64) {
        self.minimum = Some(
            self.minimum
                .map_or(energy_per_spin, |m| m.min(energy_per_spin)),
        );
    }
}

fn trajectory_seed(cell_seed: u64, lambda: LambdaParam, realization: u32, start: u64) -> u64 {
    derive(
        cell_seed,
        &[lambda.value().to_bits(), realization as u64, start],
    )
}

fn check_counts(n: usize, nreal: u32) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("instance size must be at least 1"));
    }
    if nreal == 0 {
        return Err(Error::invalid("nreal must be positive"));
    }
    Ok(())
}

fn fixed_starts_realization(
    couplings: &CouplingMatrix,
    lambda: LambdaParam,
    starts: u32,
    realization: u32,
    seed: u64,
    observer: &dyn EndpointObserver,
) -> Result<RealizationOutcome> {
    let n = couplings.n();
    let cap = default_max_flips(n);
    let mut out = RealizationOutcome::default();
    for s in 0..starts {
        let mut stream = Stream::new(trajectory_seed(seed, lambda, realization, s as u64));
        let sigma0 = random_config(n, &mut stream)?;
        let t = run_trajectory(couplings, &sigma0, lambda, &mut stream, cap)?;
        out.flips.push(t.record.flips);
        if t.record.converged {
            out.record_endpoint(t.record.final_energy_per_spin);
        } else {
            out.truncated += 1;
        }
        observer.observe(realization, couplings, &t);
    }
    Ok(out)
}

// Work accounting: each restart costs its flips plus one for the final
// stability check, so a run of t flips costs t + 1.
fn fixed_budget_realization(
    couplings: &CouplingMatrix,
    lambda: LambdaParam,
    budget: u64,
    wall_clock: Option<Duration>,
    realization: u32,
    seed: u64,
    observer: &dyn EndpointObserver,
) -> Result<RealizationOutcome> {
    let n = couplings.n();
    let cap = default_max_flips(n);
    let deadline = wall_clock.map(|d| Instant::now() + d);
    let mut out = RealizationOutcome::default();
    let mut remaining = budget;
    let mut start = 0u64;
    while remaining > 0 {
        if deadline.is_some_and(|d| Instant::now() >= d) {
            break;
        }
        let mut stream = Stream::new(trajectory_seed(seed, lambda, realization, start));
        start += 1;
        let sigma0 = random_config(n, &mut stream)?;
        let mut state = init_state(couplings, &sigma0)?;
        let allowance = (remaining - 1).min(cap);
        let capped = allowance < remaining - 1;
        let converged = descend(&mut state, couplings, lambda, &mut stream, allowance);
        let flips = state.flips();
        remaining -= flips + 1;
        if converged {
            state.reanchor(couplings);
            out.flips.push(flips);
            out.record_endpoint(state.energy() / n as f64);
            let record = crate::dynamics::RunRecord {
                flips,
                final_energy_per_spin: state.energy() / n as f64,
                converged,
                start_seed: stream.seed(),
            };
            observer.observe(
                realization,
                couplings,
                &Trajectory {
                    record,
                    endpoint: state,
                },
            );
        } else if capped {
            out.truncated += 1;
        } else {
            out.discarded += 1;
        }
    }
    Ok(out)
}

fn mean_and_stderr(values: impl ExactSizeIterator<Item = f64> + Clone) -> (f64, f64) {
    let k = values.len() as f64;
    let mean = values.clone().sum::<f64>() / k;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

fn aggregate(
    protocol: Protocol,
    n: usize,
    lambda: LambdaParam,
    nreal: u32,
    starts_or_budget: u64,
    outcomes: Vec<RealizationOutcome>,
) -> EnergyStats {
    let all_flips: Vec<u64> = outcomes
        .iter()
        .flat_map(|o| o.flips.iter().copied())
        .collect();
    let runs = all_flips.len() as u64;
    let (tau, tau_stderr) = if runs == 0 {
        (None, None)
    } else {
        // Integer sum keeps tau exactly the mean of the flip counts.
        let total: u64 = all_flips.iter().sum();
        let tau = total as f64 / runs as f64;
        let (_, se) = mean_and_stderr(all_flips.iter().map(|&f| f as f64));
        (Some(tau), Some(se))
    };
    let minima: Vec<Option<f64>> = outcomes.iter().map(|o| o.minimum).collect();
    let flagged: Vec<u32> = minima
        .iter()
        .enumerate()
        .filter(|(_, m)| m.is_none())
        .map(|(r, _)| r as u32)
        .collect();
    let present: Vec<f64> = minima.iter().flatten().copied().collect();
    let (h_n, h_n_stderr) = if present.is_empty() {
        (None, None)
    } else {
        let (m, se) = mean_and_stderr(present.iter().copied());
        (Some(m), Some(se))
    };
    EnergyStats {
        protocol,
        n,
        lambda: lambda.value(),
        nreal,
        starts_or_budget,
        runs,
        tau,
        tau_stderr,
        h_n,
        h_n_stderr,
        truncated_runs: outcomes.iter().map(|o| o.truncated).sum(),
        discarded_runs: outcomes.iter().map(|o| o.discarded).sum(),
        flagged_realizations: flagged,
        realization_minima: minima,
    }
}

fn run_realizations<S, F>(
    source: &S,
    n: usize,
    nreal: u32,
    per_realization: F,
) -> Result<Vec<RealizationOutcome>>
where
    S: InstanceSource + ?Sized,
    F: Fn(&CouplingMatrix, u32) -> Result<RealizationOutcome> + Sync,
{
    (0..nreal)
        .into_par_iter()
        .map(|r| {
            let couplings = source.couplings(n, r)?;
            if couplings.n() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: couplings.n(),
                });
            }
            per_realization(&couplings, r)
        })
        .collect()
}

/// Fixed-restart protocol: `starts` uniform random restarts on each of
/// `nreal` realizations. `seed` seeds the trajectory streams.
pub fn protocol_fixed_starts<S: InstanceSource + ?Sized>(
    source: &S,
    n: usize,
    lambda: LambdaParam,
    starts: u32,
    nreal: u32,
    seed: u64,
) -> Result<EnergyStats> {
    protocol_fixed_starts_observed(source, n, lambda, starts, nreal, seed, &NoObserver)
}

pub fn protocol_fixed_starts_observed<S: InstanceSource + ?Sized>(
    source: &S,
    n: usize,
    lambda: LambdaParam,
    starts: u32,
    nreal: u32,
    seed: u64,
    observer: &dyn EndpointObserver,
) -> Result<EnergyStats> {
    check_counts(n, nreal)?;
    if starts == 0 {
        return Err(Error::invalid("starts must be positive"));
    }
    let outcomes = run_realizations(source, n, nreal, |j, r| {
        fixed_starts_realization(j, lambda, starts, r, seed, observer)
    })?;
    Ok(aggregate(
        Protocol::FixedStarts,
        n,
        lambda,
        nreal,
        starts as u64,
        outcomes,
    ))
}

/// Fixed-budget protocol: restart until `flip_budget` work units are spent
/// per realization (a run of `t` flips costs `t + 1`). A run still descending
/// when the budget runs out is discarded.
pub fn protocol_fixed_budget<S: InstanceSource + ?Sized>(
    source: &S,
    n: usize,
    lambda: LambdaParam,
    flip_budget: u64,
    nreal: u32,
    seed: u64,
) -> Result<EnergyStats> {
    protocol_fixed_budget_observed(
        source,
        n,
        lambda,
        flip_budget,
        None,
        nreal,
        seed,
        &NoObserver,
    )
}

#[allow(clippy::too_many_arguments)]
pub fn protocol_fixed_budget_observed<S: InstanceSource + ?Sized>(
    source: &S,
    n: usize,
    lambda: LambdaParam,
    flip_budget: u64,
    wall_clock: Option<Duration>,
    nreal: u32,
    seed: u64,
    observer: &dyn EndpointObserver,
) -> Result<EnergyStats> {
    check_counts(n, nreal)?;
    if flip_budget == 0 {
        return Err(Error::invalid("flip_budget must be positive"));
    }
    let outcomes = run_realizations(source, n, nreal, |j, r| {
        fixed_budget_realization(j, lambda, flip_budget, wall_clock, r, seed, observer)
    })?;
    Ok(aggregate(
        Protocol::FixedBudget,
        n,
        lambda,
        nreal,
        flip_budget,
        outcomes,
    ))
}

/// Power-law fit `tau ~ prefactor * N^exponent`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingFit {
    pub lambda: f64,
    pub exponent: f64,
    pub prefactor: f64,
    pub r_squared: f64,
    pub sizes_used: Vec<usize>,
    pub sizes_excluded: Vec<usize>,
}

/// Ordinary least squares of `log10(tau)` on `log10(N)` over the points whose
/// size is not in `exclude`.
pub fn fit_scaling(lambda: f64, points: &[(usize, f64)], exclude: &[usize]) -> Result<ScalingFit> {
    if let Some((n, t)) = points
        .iter()
        .find(|(n, t)| *n == 0 || !(t.is_finite() && *t > 0.0))
    {
        return Err(Error::invalid(format!(
            "scaling fit needs positive sizes and times, got ({n}, {t})"
        )));
    }
    let (kept, dropped): (Vec<_>, Vec<_>) = points
        .iter()
        .copied()
        .partition(|(n, _)| !exclude.contains(n));
    if kept.len() < 3 {
        return Err(Error::invalid(format!(
            "scaling fit needs at least 3 points after exclusions, have {}",
            kept.len()
        )));
    }
    let xs: Vec<f64> = kept.iter().map(|(n, _)| (*n as f64).log10()).collect();
    let ys: Vec<f64> = kept.iter().map(|(_, t)| t.log10()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid(
            "scaling fit needs at least two distinct sizes",
        ));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    Ok(ScalingFit {
        lambda,
        exponent: slope,
        prefactor: 10f64.powf(intercept),
        r_squared,
        sizes_used: kept.iter().map(|(n, _)| *n).collect(),
        sizes_excluded: dropped.iter().map(|(n, _)| *n).collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellFailure {
    pub n: usize,
    pub lambda: f64,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CampaignResult {
    pub protocol: Protocol,
    pub cells: Vec<EnergyStats>,
    pub fits: Vec<ScalingFit>,
    pub failures: Vec<CellFailure>,
    pub warnings: Vec<String>,
}

/// Seed of the trajectory streams for all cells of size `n`.
pub fn cell_seed(master_seed: u64, n: usize) -> u64 {
    derive(master_seed, &[TAG_TRAJECTORIES, n as u64])
}

/// Runs one `(n, lambda)` cell of a campaign exactly as [`run_campaign`] does.
pub fn run_cell(config: &ExperimentConfig, n: usize, lambda: f64) -> Result<EnergyStats> {
    let lambda = LambdaParam::new(lambda)?;
    let source = GaussianInstances::for_master_seed(config.master_seed);
    let seed = cell_seed(config.master_seed, n);
    match config.protocol {
        Protocol::FixedStarts => protocol_fixed_starts(
            &source,
            n,
            lambda,
            config.starts_per_realization.resolve(n),
            config.nreal,
            seed,
        ),
        Protocol::FixedBudget => {
            let budget = config
                .flip_budget
                .ok_or_else(|| Error::usage("flip_budget", "required for fixed-budget"))?;
            protocol_fixed_budget_observed(
                &source,
                n,
                lambda,
                budget,
                config.wall_clock_seconds.map(Duration::from_secs_f64),
                config.nreal,
                seed,
                &NoObserver,
            )
        }
    }
}

/// Runs every `(size, lambda)` cell on the current rayon pool.
///
/// Output is a pure function of `config`; per-cell failures are collected
/// rather than aborting the campaign.
pub fn run_campaign(config: &ExperimentConfig) -> Result<CampaignResult> {
    config.validate()?;
    let mut cells = Vec::new();
    let mut failures = Vec::new();
    let mut warnings = Vec::new();
    for (n, lambda) in config.cells() {
        match run_cell(config, n, lambda) {
            Ok(stats) => {
                if stats.truncated_runs > 0 {
                    warnings.push(format!(
                        "n={n} lambda={lambda}: {} run(s) hit the flip cap before converging",
                        stats.truncated_runs
                    ));
                }
                if !stats.flagged_realizations.is_empty() {
                    warnings.push(format!(
                        "n={n} lambda={lambda}: {} realization(s) completed no trajectory and were excluded from h_n",
                        stats.flagged_realizations.len()
                    ));
                }
                cells.push(stats);
            }
            Err(e) => failures.push(CellFailure {
                n,
                lambda,
                message: e.to_string(),
            }),
        }
    }
    for f in &failures {
        warnings.push(format!(
            "n={} lambda={}: cell failed: {}",
            f.n, f.lambda, f.message
        ));
    }

    let mut fits = Vec::new();
    if config.protocol == Protocol::FixedStarts {
        for &lambda in &config.lambdas {
            let points: Vec<(usize, f64)> = cells
                .iter()
                .filter(|c| c.lambda == lambda)
                .filter_map(|c| c.tau.map(|t| (c.n, t)))
                .collect();
            match fit_scaling(lambda, &points, &config.exclude_sizes_from_fit) {
                Ok(fit) => fits.push(fit),
                Err(e) => warnings.push(format!("lambda={lambda}: no scaling fit: {e}")),
            }
        }
    }

    Ok(CampaignResult {
        protocol: config.protocol,
        cells,
        fits,
        failures,
        warnings,
    })
}

/// [`run_campaign`] on a dedicated pool of `workers` threads.
pub fn run_campaign_with_workers(
    config: &ExperimentConfig,
    workers: usize,
) -> Result<CampaignResult> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()?;
    pool.install(|| run_campaign(config))
}
