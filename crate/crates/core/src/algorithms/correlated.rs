use rayon::prelude::*;
use serde::Serialize;

use super::constants::ConstantsBundle;
use super::grouping::{GroupId, GroupingState};
use crate::certificate::{update_dual, DualInput, DualState};
use crate::error::Result;
use crate::model::{FractionalAssignment, Instance, IntegralAssignment, Job};
use crate::rng;
use crate::rounding::{OnlineRounder, RoundingPlan};
use crate::waterfill::{solve_equilibrium, Linear, Potential, PotentialSpec};

/// Distance from `θ` within which a fraction counts as sitting on the jump.
const JUMP_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorrelatedStep {
    pub x: Vec<f64>,
    pub potentials: Vec<f64>,
    pub level: f64,
    /// `E[L_i^{(j−1)}]` per option machine.
    pub pre_loads: Vec<f64>,
    /// `ν^{(j−1)}(i)`.
    pub nu_before: Vec<f64>,
    /// `ν̂^{(j)}(i)`.
    pub nu_hat: Vec<f64>,
    /// `ν^{(j)}(i)`.
    pub nu_after: Vec<f64>,
    /// Rate used in `ν̂ = ν + w x φ`.
    pub phi: Vec<f64>,
    pub alpha: Vec<f64>,
    pub hard: Vec<bool>,
    /// Level landed inside the jump gap of this option's potential.
    pub pinned: Vec<bool>,
    pub group: Vec<GroupId>,
    pub closes: Vec<bool>,
    pub bonus: Vec<f64>,
    pub y: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct CorrelatedTrace {
    pub steps: Vec<CorrelatedStep>,
    /// Final expected loads.
    pub loads: Vec<f64>,
}

/// Deterministic part of the correlated algorithm: water-filling on the
/// dual-driven potentials, grouping and dual updates. Rounding never feeds
/// back into these quantities.
#[derive(Clone, Debug)]
pub struct CorrelatedRunner {
    constants: ConstantsBundle,
    loads: Vec<f64>,
    grouping: GroupingState,
    dual: DualState,
    jobs: usize,
}

impl CorrelatedRunner {
    pub fn new(machines: usize, constants: ConstantsBundle) -> Self {
        CorrelatedRunner {
            constants,
            loads: vec![0.0; machines],
            grouping: GroupingState::new(machines, constants.theta),
            dual: DualState::new(machines),
            jobs: 0,
        }
    }

    pub fn potential(&self, w: f64, load: f64, nu: f64) -> Potential {
        let k = &self.constants;
        let c = k.gamma * (w * w + 2.0 * w * load);
        let line = |phi: f64| Linear::new(c + nu * w * phi, 0.5 * w * w * phi * phi);
        if w > 0.0 && k.in_band(nu / w) {
            Potential::Jump {
                at: k.theta,
                below: line(k.beta),
                above: line(k.phi_easy()),
            }
        } else {
            Potential::Linear(line(k.phi_easy()))
        }
    }

    pub fn step(&mut self, job: &Job) -> Result<CorrelatedStep> {
        let k = self.constants;
        let j = self.jobs;
        let machines: Vec<usize> = job.options.iter().map(|o| o.machine_id()).collect();
        let weights: Vec<f64> = job.options.iter().map(|o| o.weight()).collect();
        let pre_loads: Vec<f64> = machines.iter().map(|&m| self.loads[m]).collect();
        let nu_before: Vec<f64> = machines.iter().map(|&m| self.dual.nu[m]).collect();
        let spec = PotentialSpec::new(
            (0..machines.len())
                .map(|o| self.potential(weights[o], pre_loads[o], nu_before[o]))
                .collect(),
        );
        let eq = solve_equilibrium(&spec)?;

        let n_opt = machines.len();
        let mut phi = Vec::with_capacity(n_opt);
        let mut hard = Vec::with_capacity(n_opt);
        for o in 0..n_opt {
            let (w, x, nu) = (weights[o], eq.x[o], nu_before[o]);
            let (p, h) = if w <= 0.0 || !k.in_band(nu / w) {
                (k.phi_easy(), false)
            } else if eq.pinned[o] || (x - k.theta).abs() <= JUMP_TOL {
                let c = k.gamma * (w * w + 2.0 * w * pre_loads[o]);
                let p = jump_rate(c, nu, w, x, eq.potentials[o]).clamp(k.beta, k.phi_easy());
                (p, p < k.phi_easy())
            } else if x < k.theta {
                (k.beta, true)
            } else {
                (k.phi_easy(), false)
            };
            phi.push(p);
            hard.push(h);
        }

        let mut group = Vec::with_capacity(n_opt);
        let mut closes = Vec::with_capacity(n_opt);
        let mut closing_start = Vec::with_capacity(n_opt);
        for o in 0..n_opt {
            let p = self
                .grouping
                .place(j, machines[o], eq.x[o], hard[o], nu_before[o], pre_loads[o]);
            group.push(p.group);
            closes.push(p.closes);
            closing_start.push(p.closes.then(|| self.grouping.group(p.group).start_nu));
        }
        if n_opt == 0 {
            self.grouping.place(j, 0, 0.0, false, 0.0, 0.0);
        }

        let upd = update_dual(
            &mut self.dual,
            &k,
            &DualInput {
                machines: &machines,
                weights: &weights,
                x: &eq.x,
                potentials: &eq.potentials,
                phi: &phi,
                closing_start_nu: &closing_start,
            },
        );
        for o in 0..n_opt {
            self.loads[machines[o]] += weights[o] * eq.x[o];
        }
        self.jobs += 1;
        Ok(CorrelatedStep {
            x: eq.x,
            potentials: eq.potentials,
            level: eq.level,
            pre_loads,
            nu_before,
            nu_hat: upd.nu_hat,
            nu_after: upd.nu_after,
            phi,
            alpha: upd.alpha,
            hard,
            pinned: eq.pinned,
            group,
            closes,
            bonus: upd.bonus,
            y: upd.y,
        })
    }

    pub fn constants(&self) -> &ConstantsBundle {
        &self.constants
    }

    pub fn loads(&self) -> &[f64] {
        &self.loads
    }

    pub fn grouping(&self) -> &GroupingState {
        &self.grouping
    }

    pub fn dual(&self) -> &DualState {
        &self.dual
    }

    pub fn into_parts(self) -> (GroupingState, DualState, Vec<f64>) {
        (self.grouping, self.dual, self.loads)
    }
}

/// The `φ` at which `c + νwφ + ½w²φ²x` equals `f`.
fn jump_rate(c: f64, nu: f64, w: f64, x: f64, f: f64) -> f64 {
    let qa = 0.5 * w * w * x;
    let qb = nu * w;
    let qc = c - f;
    if qa <= 0.0 {
        return -qc / qb;
    }
    let disc = (qb * qb - 4.0 * qa * qc).max(0.0);
    // stable root of qa φ² + qb φ + qc = 0 with qb ≥ 0
    let s = qb + disc.sqrt();
    if s > 0.0 {
        -2.0 * qc / s
    } else {
        0.0
    }
}

#[derive(Clone, Debug)]
pub struct CorrelatedRun {
    pub constants: ConstantsBundle,
    pub fractional: FractionalAssignment,
    pub trace: CorrelatedTrace,
    pub grouping: GroupingState,
    pub dual: DualState,
    pub samples: Vec<IntegralAssignment>,
}

impl CorrelatedRun {
    /// Runs the deterministic part only.
    pub fn fractional(instance: &Instance, constants: ConstantsBundle) -> Result<CorrelatedRun> {
        instance.require_standard("correlated")?;
        let mut runner = CorrelatedRunner::new(instance.machines(), constants);
        let mut fractional = FractionalAssignment::new();
        let mut steps = Vec::with_capacity(instance.len());
        for job in instance.jobs() {
            let s = runner.step(job)?;
            fractional.push(s.x.clone())?;
            steps.push(s);
        }
        let (grouping, dual, loads) = runner.into_parts();
        Ok(CorrelatedRun {
            constants,
            fractional,
            trace: CorrelatedTrace { steps, loads },
            grouping,
            dual,
            samples: Vec::new(),
        })
    }

    pub fn plan(&self) -> Result<RoundingPlan> {
        Ok(RoundingPlan::new(&self.fractional, &self.grouping)?)
    }

    /// `trials` online roundings; trial `k` uses stream `round:trial:k`.
    pub fn sample(&mut self, trials: usize, seed: u64) -> Result<()> {
        let plan = self.plan()?;
        let samples: Result<Vec<IntegralAssignment>> = rng::with_pool(|| {
            (0..trials)
                .into_par_iter()
                .map(|t| {
                    let mut r = rng::trial_stream(seed, t);
                    let mut rounder = OnlineRounder::new(&plan);
                    Ok(rounder.round_all(&mut r)?.assignment())
                })
                .collect()
        });
        self.samples = samples?;
        Ok(())
    }
}

/// The full algorithm: fractional solve, grouping, online correlated
/// rounding and dual update for every arrival.
pub fn run_correlated(instance: &Instance, trials: usize, seed: u64) -> Result<CorrelatedRun> {
    run_correlated_with(instance, trials, seed, ConstantsBundle::paper())
}

pub fn run_correlated_with(instance: &Instance, trials: usize, seed: u64, constants: ConstantsBundle) -> Result<CorrelatedRun> {
    let mut run = CorrelatedRun::fractional(instance, constants)?;
    run.sample(trials, seed)?;
    Ok(run)
}
