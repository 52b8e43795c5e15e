//! The online algorithms: greedy, Balance (independent rounding of a
//! water-filled solution), FracBalance (the fractional 4-competitive
//! algorithm) and the correlated algorithm.
//!
//! Each algorithm is a *runner* that consumes one job at a time, so long
//! adversarial sequences can be streamed without materializing the
//! instance, plus a `run_*` wrapper that records a full trace.

mod constants;
mod correlated;
mod grouping;

pub use constants::{correlation_factor, ConstantsBundle};
pub use correlated::{run_correlated, CorrelatedRun, CorrelatedRunner, CorrelatedStep, CorrelatedTrace};
pub use grouping::{Group, GroupId, GroupKind, GroupingState, Placement};

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::model::{FractionalAssignment, Instance, IntegralAssignment, Job, LoadTracker};
use crate::rng;
use crate::waterfill::{solve_equilibrium, EquilibriumResult, Potential, PotentialSpec, EQUILIBRIUM_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Greedy,
    Balance,
    FracBalance,
    Correlated,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Greedy, Algorithm::Balance, Algorithm::FracBalance, Algorithm::Correlated];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Greedy => "greedy",
            Algorithm::Balance => "balance",
            Algorithm::FracBalance => "fracbalance",
            Algorithm::Correlated => "correlated",
        }
    }

    pub fn is_randomized(self) -> bool {
        matches!(self, Algorithm::Balance | Algorithm::Correlated)
    }
}

impl std::str::FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown algorithm `{s}` (expected greedy, balance, fracbalance or correlated)"))
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

// ---------------------------------------------------------------- greedy

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GreedyStep {
    /// `Σ_{e∈i}(w_ej² + 2 L_e w_ej)` for every option `i`.
    pub increments: Vec<f64>,
    pub choice: usize,
    /// `Σ_e L_e²` before and after the job.
    pub before: f64,
    pub after: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct GreedyTrace {
    pub steps: Vec<GreedyStep>,
    pub loads: Vec<f64>,
}

impl GreedyTrace {
    /// Largest violation of `after − before ≤ increment_i` over all steps
    /// and options, relative to the step's scale.
    pub fn max_step_violation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for s in &self.steps {
            let inc = s.after - s.before;
            for &c in &s.increments {
                let scale = 1.0 + c.abs() + s.after.abs();
                worst = worst.max((inc - c) / scale);
            }
        }
        worst
    }
}

#[derive(Clone, Debug)]
pub struct GreedyRunner {
    loads: LoadTracker,
    sum_sq: f64,
}

impl GreedyRunner {
    pub fn new(machines: usize) -> Self {
        GreedyRunner {
            loads: LoadTracker::new(machines),
            sum_sq: 0.0,
        }
    }

    pub fn step(&mut self, job: &Job) -> GreedyStep {
        let increments: Vec<f64> = job
            .options
            .iter()
            .map(|opt| opt.iter().map(|(e, w)| w * w + 2.0 * self.loads.load(e) * w).sum())
            .collect();
        let mut choice = 0;
        for (i, &c) in increments.iter().enumerate() {
            if c < increments[choice] {
                choice = i;
            }
        }
        let before = self.sum_sq;
        for (e, w) in job.options[choice].iter() {
            let l = self.loads.load(e);
            self.sum_sq += (l + w) * (l + w) - l * l;
        }
        self.loads.add(&job.options[choice], 1.0);
        GreedyStep {
            increments,
            choice,
            before,
            after: self.sum_sq,
        }
    }

    pub fn loads(&self) -> &[f64] {
        self.loads.loads()
    }
}

/// Assigns every job to the option with the smallest increase of `Σ L²`,
/// ties to the lowest option index.
pub fn run_greedy(instance: &Instance) -> Result<(IntegralAssignment, GreedyTrace)> {
    let mut runner = GreedyRunner::new(instance.machines());
    let steps: Vec<GreedyStep> = instance.jobs().iter().map(|j| runner.step(j)).collect();
    let choices = steps.iter().map(|s| s.choice).collect();
    Ok((
        IntegralAssignment::new(choices),
        GreedyTrace {
            steps,
            loads: runner.loads().to_vec(),
        },
    ))
}

// ------------------------------------------------------------ fractional

/// Which potential drives a water-filling run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FractionalRule {
    /// `w² + 4w(E[L] + tw)`.
    Balance,
    /// `w(2L + tw)`.
    FracBalance,
}

impl FractionalRule {
    pub fn potential(self, w: f64, load: f64) -> Potential {
        match self {
            FractionalRule::Balance => Potential::linear(w * w + 4.0 * w * load, 4.0 * w * w),
            FractionalRule::FracBalance => Potential::linear(2.0 * w * load, w * w),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FractionalStep {
    pub x: Vec<f64>,
    /// `f_ij(x_ij)` per option.
    pub potentials: Vec<f64>,
    pub level: f64,
    /// `E[L_i^{(j−1)}]` of every option's machine.
    pub pre_loads: Vec<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct FractionalTrace {
    pub steps: Vec<FractionalStep>,
    /// Final (expected) loads.
    pub loads: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct FractionalRunner {
    rule: FractionalRule,
    loads: LoadTracker,
}

impl FractionalRunner {
    pub fn new(rule: FractionalRule, machines: usize) -> Self {
        FractionalRunner {
            rule,
            loads: LoadTracker::new(machines),
        }
    }

    pub fn step(&mut self, job: &Job) -> Result<FractionalStep> {
        let pre_loads: Vec<f64> = job.options.iter().map(|o| self.loads.load(o.machine_id())).collect();
        let spec = PotentialSpec::new(
            job.options
                .iter()
                .zip(&pre_loads)
                .map(|(o, &l)| self.rule.potential(o.weight(), l))
                .collect(),
        );
        let eq = solve_equilibrium(&spec)?;
        debug_assert!(eq.verify(EQUILIBRIUM_TOL).is_ok());
        self.loads.add_row(&job.options, &eq.x);
        let EquilibriumResult { x, level, potentials, .. } = eq;
        Ok(FractionalStep {
            x,
            potentials,
            level,
            pre_loads,
        })
    }

    pub fn loads(&self) -> &[f64] {
        self.loads.loads()
    }
}

fn run_fractional(instance: &Instance, rule: FractionalRule, name: &'static str) -> Result<(FractionalAssignment, FractionalTrace)> {
    instance.require_standard(name)?;
    let mut runner = FractionalRunner::new(rule, instance.machines());
    let mut fa = FractionalAssignment::new();
    let mut steps = Vec::with_capacity(instance.len());
    for job in instance.jobs() {
        let step = runner.step(job)?;
        fa.push(step.x.clone())?;
        steps.push(step);
    }
    Ok((
        fa,
        FractionalTrace {
            steps,
            loads: runner.loads().to_vec(),
        },
    ))
}

/// The optimal fractional algorithm.
pub fn run_frac_balance(instance: &Instance) -> Result<(FractionalAssignment, FractionalTrace)> {
    run_fractional(instance, FractionalRule::FracBalance, "fracbalance")
}

/// Water-filled marginals of Balance, without sampling.
pub fn balance_fractional(instance: &Instance) -> Result<(FractionalAssignment, FractionalTrace)> {
    run_fractional(instance, FractionalRule::Balance, "balance")
}

#[derive(Clone, Debug)]
pub struct BalanceRun {
    pub fractional: FractionalAssignment,
    pub trace: FractionalTrace,
    pub samples: Vec<IntegralAssignment>,
}

/// Balance: marginals from water-filling on the expected loads, then
/// `trials` independent roundings, trial `k` drawn from stream
/// `round:trial:k`.
pub fn run_balance(instance: &Instance, trials: usize, seed: u64) -> Result<BalanceRun> {
    let (fractional, trace) = balance_fractional(instance)?;
    let samples = rng::with_pool(|| {
        (0..trials)
            .into_par_iter()
            .map(|k| sample_independent(&fractional, &mut rng::trial_stream(seed, k)))
            .collect()
    });
    Ok(BalanceRun {
        fractional,
        trace,
        samples,
    })
}

/// Draws every job independently from its row.
pub fn sample_independent<R: Rng + ?Sized>(x: &FractionalAssignment, rng: &mut R) -> IntegralAssignment {
    IntegralAssignment::new(x.rows().iter().map(|row| sample_row(row, rng)).collect())
}

pub fn sample_row<R: Rng + ?Sized>(row: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in row.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last = i;
        if u < acc {
            return i;
        }
    }
    last
}

/// `Σ_i (E[L_i]² + Σ_j w_ij² x_ij(1−x_ij))`, the expected cost of
/// independent rounding.
pub fn independent_expected_cost(instance: &Instance, x: &FractionalAssignment) -> f64 {
    let m = instance.machines();
    let mut mean = vec![0.0; m];
    let mut var = vec![0.0; m];
    for (job, row) in instance.jobs().iter().zip(x.rows()) {
        for (opt, &p) in job.options.iter().zip(row) {
            for (e, w) in opt.iter() {
                mean[e] += w * p;
                var[e] += w * w * p * (1.0 - p);
            }
        }
    }
    mean.iter().zip(&var).map(|(l, v)| l * l + v).sum()
}
