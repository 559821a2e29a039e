//! Lambda-interpolated single-spin-flip descent.
//!
//! One step: if no site has `dE_i < 0` the state is 1-spin-flip stable and
//! the run stops. Otherwise draw a depth `D <= 0` with density
//! `lambda * exp(lambda * x)` and flip the energy-decreasing site whose `dE_i`
//! is closest to `D`. Small `lambda` favours deep drops (greedy), large
//! `lambda` favours the shallowest drop (reluctant).

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::Stream;
use crate::sk_model::{init_state, CouplingMatrix, DynamicsState, SpinConfig};

/// Positive, finite inverse scale of the depth distribution.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct LambdaParam(f64);

impl LambdaParam {
    pub fn new(lambda: f64) -> Result<Self> {
        if lambda.is_finite() && lambda > 0.0 {
            Ok(LambdaParam(lambda))
        } else {
            Err(Error::invalid(format!(
                "lambda must be positive and finite, got {lambda}"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for LambdaParam {
    type Error = Error;

    fn try_from(v: f64) -> Result<Self> {
        LambdaParam::new(v)
    }
}

impl From<LambdaParam> for f64 {
    fn from(l: LambdaParam) -> f64 {
        l.0
    }
}

impl fmt::Display for LambdaParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Outcome of one trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub flips: u64,
    pub final_energy_per_spin: f64,
    /// `true` iff the endpoint is 1-spin-flip stable.
    pub converged: bool,
    /// Seed of the stream that drew the initial configuration and the noise.
    pub start_seed: u64,
}

/// A finished trajectory: its record plus the endpoint state.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub record: RunRecord,
    pub endpoint: DynamicsState,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepOutcome {
    Flipped(usize),
    Converged,
}

/// Inverse CDF of the depth density: `ln(u) / lambda` for `u` in `(0, 1]`.
#[inline]
pub fn depth_from_uniform(lambda: LambdaParam, u: f64) -> f64 {
    debug_assert!(u > 0.0 && u <= 1.0);
    u.ln() / lambda.0
}

/// Draws `D <= 0` with density `lambda * exp(lambda * x)` on `x <= 0`.
pub fn sample_depth<R: Rng + ?Sized>(lambda: LambdaParam, rng: &mut R) -> f64 {
    // random::<f64>() is in [0, 1); 1 - u is in (0, 1] and never hits ln(0).
    let u = 1.0 - rng.random::<f64>();
    depth_from_uniform(lambda, u)
}

/// Index of the negative entry closest to `depth`; smallest index on ties.
/// `None` when no entry is negative.
pub fn select_site(spectrum: &[f64], depth: f64) -> Option<usize> {
    closest_negative(spectrum.iter().copied(), depth)
}

fn has_descent(state: &DynamicsState) -> bool {
    (0..state.n()).any(|i| state.delta(i) < 0.0)
}

fn select_in_state(state: &DynamicsState, depth: f64) -> Option<usize> {
    let spins = state.spins().as_slice();
    let fields = state.local_fields();
    closest_negative(spins.iter().zip(fields).map(|(&s, &h)| s as f64 * h), depth)
}

// Only the nearest entry on each side of `depth` can win, so ordering is
// decided by exact comparisons and a single subtraction per side. A depth of
// -inf (vanishing lambda) selects the deepest entry.
#[inline]
fn closest_negative(deltas: impl Iterator<Item = f64>, depth: f64) -> Option<usize> {
    let mut below: Option<(usize, f64)> = None;
    let mut above: Option<(usize, f64)> = None;
    for (i, d) in deltas.enumerate() {
        if d >= 0.0 {
            continue;
        }
        if d <= depth {
            if below.map_or(true, |(_, b)| d > b) {
                below = Some((i, d));
            }
        } else if above.map_or(true, |(_, a)| d < a) {
            above = Some((i, d));
        }
    }
    match (below, above) {
        (Some((ib, b)), Some((ia, a))) => {
            let (db, da) = (depth - b, a - depth);
            Some(if da < db || (da == db && ia < ib) {
                ia
            } else {
                ib
            })
        }
        (Some((i, _)), None) | (None, Some((i, _))) => Some(i),
        (None, None) => None,
    }
}

/// Advances the state by one move.
///
/// A stable state returns [`StepOutcome::Converged`] without touching `rng`;
/// every flip consumes exactly one depth draw.
pub fn step<R: Rng + ?Sized>(
    state: &mut DynamicsState,
    couplings: &CouplingMatrix,
    lambda: LambdaParam,
    rng: &mut R,
) -> StepOutcome {
    debug_assert_eq!(state.n(), couplings.n());
    if !has_descent(state) {
        return StepOutcome::Converged;
    }
    let depth = sample_depth(lambda, rng);
    let site = select_in_state(state, depth).expect("a descent site exists");
    state.flip_unchecked(couplings, site);
    StepOutcome::Flipped(site)
}

/// Runs `step` until convergence or until `max_flips` flips have been made.
/// Returns whether the final state is stable.
///
/// `max_flips == 0` only checks stability.
pub fn descend<R: Rng + ?Sized>(
    state: &mut DynamicsState,
    couplings: &CouplingMatrix,
    lambda: LambdaParam,
    rng: &mut R,
    max_flips: u64,
) -> bool {
    let start = state.flips();
    loop {
        if !has_descent(state) {
            return true;
        }
        if state.flips() - start >= max_flips {
            return false;
        }
        match step(state, couplings, lambda, rng) {
            StepOutcome::Flipped(_) => {}
            StepOutcome::Converged => return true,
        }
    }
}

/// Flip cap used when none is given: `100 * n^2`.
pub fn default_max_flips(n: usize) -> u64 {
    100u64
        .saturating_mul((n as u64).saturating_mul(n as u64))
        .max(1)
}

/// Descends from `sigma0` to a 1-spin-flip stable state (or to `max_flips`).
///
/// The endpoint's fields and energy are recomputed from scratch.
pub fn run_trajectory(
    couplings: &CouplingMatrix,
    sigma0: &SpinConfig,
    lambda: LambdaParam,
    stream: &mut Stream,
    max_flips: u64,
) -> Result<Trajectory> {
    if max_flips == 0 {
        return Err(Error::invalid("max_flips must be at least 1"));
    }
    let mut state = init_state(couplings, sigma0)?;
    let converged = descend(&mut state, couplings, lambda, stream, max_flips);
    // Equal endpoints reached along different paths report identical energies.
    state.reanchor(couplings);
    let record = RunRecord {
        flips: state.flips(),
        final_energy_per_spin: state.energy() / couplings.n() as f64,
        converged,
        start_seed: stream.seed(),
    };
    Ok(Trajectory {
        record,
        endpoint: state,
    })
}

/// Uniform random configuration, each spin `+1` with probability 1/2.
pub fn random_config<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<SpinConfig> {
    if n == 0 {
        return Err(Error::invalid("instance size must be at least 1"));
    }
    let mut spins = Vec::with_capacity(n);
    let mut word = 0u64;
    for i in 0..n {
        if i % 64 == 0 {
            word = rng.next_u64();
        }
        spins.push(if word >> (i % 64) & 1 == 1 { 1 } else { -1 });
    }
    SpinConfig::new(spins)
}
