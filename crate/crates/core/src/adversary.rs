//! Lower-bound instances.
//!
//! `n` machines and `n` jobs: job `j` (1-based) has weight
//! `f((j−1)/n)` with `f(x) = 1/√(1−x)` and may run on the machines
//! `σ(j), …, σ(n)` of a uniformly random permutation `σ`. The Smith variant
//! replaces each job by `t` consecutive copies of weight `w_j/t` with
//! processing time equal to that weight.
//!
//! Instances have `Θ(n²)` options, so the sweep helpers stream jobs
//! through the online runners instead of materializing them.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::algorithms::{run_correlated, ConstantsBundle, CorrelatedRunner, FractionalRule, FractionalRunner, GreedyRunner};
use crate::error::{Error, Result};
use crate::model::{cost_quadratic, Instance, Job, MachineId, Model, SmithInstance, SmithJob};
use crate::rng;
use crate::stats::Summary;

/// Largest `n` for which [`sweep_correlated`] builds the instance in memory.
pub const CORRELATED_SWEEP_CAP: usize = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "variant")]
pub enum Variant {
    FractionalLb,
    SmithLb { t: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct AdversaryConfig {
    pub n: usize,
    pub seed: u64,
    pub variant: Variant,
}

impl AdversaryConfig {
    pub fn fractional(n: usize, seed: u64) -> Self {
        AdversaryConfig {
            n,
            seed,
            variant: Variant::FractionalLb,
        }
    }

    pub fn smith(n: usize, t: usize, seed: u64) -> Self {
        AdversaryConfig {
            n,
            seed,
            variant: Variant::SmithLb { t },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidArgument("n ≥ 2 required".into()));
        }
        if let Variant::SmithLb { t: 0 } = self.variant {
            return Err(Error::InvalidArgument("t ≥ 1 required".into()));
        }
        Ok(())
    }
}

/// Parses `n=..,variant=..,t=..,seed=..`; `variant` defaults to
/// `fractional_lb`, `t` to 1 and `seed` to 0.
impl FromStr for AdversaryConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |m: String| Error::InvalidArgument(m);
        let mut n = None;
        let mut seed = 0;
        let mut variant = "fractional_lb".to_string();
        let mut t = 1;
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part.split_once('=').ok_or_else(|| bad(format!("expected key=value, got `{part}`")))?;
            let v = v.trim();
            match k.trim() {
                "n" => n = Some(v.parse().map_err(|_| bad(format!("bad n `{v}`")))?),
                "seed" => seed = v.parse().map_err(|_| bad(format!("bad seed `{v}`")))?,
                "t" => t = v.parse().map_err(|_| bad(format!("bad t `{v}`")))?,
                "variant" => variant = v.to_string(),
                other => return Err(bad(format!("unknown adversary key `{other}`"))),
            }
        }
        let n = n.ok_or_else(|| bad("adversary needs n".into()))?;
        let variant = match variant.as_str() {
            "fractional_lb" | "fractional" => Variant::FractionalLb,
            "smith_lb" | "smith" => Variant::SmithLb { t },
            other => return Err(bad(format!("unknown variant `{other}`"))),
        };
        Ok(AdversaryConfig { n, seed, variant })
    }
}

impl fmt::Display for AdversaryConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.variant {
            Variant::FractionalLb => write!(f, "n={},variant=fractional_lb,seed={}", self.n, self.seed),
            Variant::SmithLb { t } => write!(f, "n={},variant=smith_lb,t={},seed={}", self.n, t, self.seed),
        }
    }
}

/// `f(x) = 1/√(1−x)`.
pub fn lb_weight_fn(x: f64) -> f64 {
    1.0 / (1.0 - x).sqrt()
}

/// Weight of job `j` (0-based), `f(j/n)`.
pub fn lb_weight(n: usize, j: usize) -> f64 {
    lb_weight_fn(j as f64 / n as f64)
}

/// `σ` as a vector: position `i` (0-based) holds machine `σ(i+1)`.
pub fn permutation(n: usize, seed: u64) -> Vec<MachineId> {
    let mut p: Vec<MachineId> = (0..n).collect();
    p.shuffle(&mut rng::permutation_stream(seed));
    p
}

/// Job `j` (0-based) of the lower-bound instance for permutation `sigma`.
pub fn lb_job(sigma: &[MachineId], j: usize) -> Job {
    let w = lb_weight(sigma.len(), j);
    let opts: Vec<(MachineId, f64)> = sigma[j..].iter().map(|&m| (m, w)).collect();
    Job::on_machines(&opts)
}

/// Streams the jobs of the lower-bound instance.
pub fn lb_jobs(n: usize, seed: u64) -> impl Iterator<Item = Job> {
    let sigma = permutation(n, seed);
    (0..n).map(move |j| lb_job(&sigma, j))
}

pub fn gen_lb_instance(config: &AdversaryConfig) -> Result<Instance> {
    if config.n == 0 {
        return Err(Error::InvalidArgument("n ≥ 1 required".into()));
    }
    Ok(Instance::new(config.n, Model::Standard, lb_jobs(config.n, config.seed).collect())?)
}

pub fn gen_smith_lb_instance(config: &AdversaryConfig) -> Result<SmithInstance> {
    let t = match config.variant {
        Variant::SmithLb { t } if t >= 1 => t,
        Variant::SmithLb { .. } => return Err(Error::InvalidArgument("t ≥ 1 required".into())),
        Variant::FractionalLb => 1,
    };
    if config.n == 0 {
        return Err(Error::InvalidArgument("n ≥ 1 required".into()));
    }
    let n = config.n;
    let sigma = permutation(n, config.seed);
    let mut jobs = Vec::with_capacity(n * t);
    for j in 0..n {
        let w = lb_weight(n, j) / t as f64;
        for _ in 0..t {
            jobs.push(SmithJob {
                weight: w,
                options: sigma[j..].iter().map(|&m| (m, w)).collect(),
            });
        }
    }
    Ok(SmithInstance::new(n, jobs)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Baselines {
    /// `n(log n + 1)`.
    pub opt_upper: f64,
    /// `4n log n − 16n(1 − √(1/n))`.
    pub frac_cost_lower: f64,
    /// `n log n − (π²/6) n`.
    pub variance_addend: f64,
    /// `frac_cost_lower + variance_addend`.
    pub indep_cost_lower: f64,
}

pub fn analytic_baselines(n: usize) -> Baselines {
    let nf = n as f64;
    let ln = nf.ln();
    let frac = 4.0 * nf * ln - 16.0 * nf * (1.0 - (1.0 / nf).sqrt());
    let var = nf * ln - PI * PI / 6.0 * nf;
    Baselines {
        opt_upper: nf * (ln + 1.0),
        frac_cost_lower: frac,
        variance_addend: var,
        indep_cost_lower: frac + var,
    }
}

/// Cost of the assignment `j → σ(j)`, `Σ_i f((i−1)/n)² = n H_n`.
pub fn lb_opt_cost(n: usize) -> f64 {
    (0..n).map(|j| lb_weight(n, j).powi(2)).sum()
}

/// FracBalance on the streamed instance; returns the final loads indexed by
/// position, so entry `i` is `L_{σ(i+1)}`.
pub fn fracbalance_position_loads(n: usize, seed: u64) -> Result<Vec<f64>> {
    let sigma = permutation(n, seed);
    let mut runner = FractionalRunner::new(FractionalRule::FracBalance, n);
    for j in 0..n {
        runner.step(&lb_job(&sigma, j))?;
    }
    Ok(sigma.iter().map(|&m| runner.loads()[m]).collect())
}

/// FracBalance marginals by position: `out[j][i − j] = x_{σ(i), j}`.
pub fn fracbalance_marginals(n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let sigma = permutation(n, seed);
    let mut runner = FractionalRunner::new(FractionalRule::FracBalance, n);
    (0..n).map(|j| Ok(runner.step(&lb_job(&sigma, j))?.x)).collect()
}

pub fn sweep_fracbalance(n: usize, seed: u64) -> Result<f64> {
    Ok(fracbalance_position_loads(n, seed)?.iter().map(|l| l * l).sum())
}

pub fn sweep_greedy(n: usize, seed: u64) -> f64 {
    let sigma = permutation(n, seed);
    let mut runner = GreedyRunner::new(n);
    for j in 0..n {
        runner.step(&lb_job(&sigma, j));
    }
    runner.loads().iter().map(|l| l * l).sum()
}

/// Balance with `trials` independent roundings drawn while the fractional
/// solution streams past; trial `k` uses the stream `round:trial:k`.
pub fn sweep_balance(n: usize, seed: u64, trials: usize) -> Result<Summary> {
    let sigma = permutation(n, seed);
    let mut runner = FractionalRunner::new(FractionalRule::Balance, n);
    let mut streams: Vec<_> = (0..trials).map(|k| rng::trial_stream(seed, k)).collect();
    let mut loads = vec![vec![0.0; n]; trials];
    let mut prefix = Vec::with_capacity(n);
    for j in 0..n {
        let job = lb_job(&sigma, j);
        let step = runner.step(&job)?;
        prefix.clear();
        let mut acc = 0.0;
        for &x in &step.x {
            acc += x;
            prefix.push(acc);
        }
        for (r, l) in streams.iter_mut().zip(loads.iter_mut()) {
            let u: f64 = r.gen::<f64>() * acc;
            let o = prefix.partition_point(|&p| p <= u).min(prefix.len() - 1);
            let opt = &job.options[o];
            l[opt.machine_id()] += opt.weight();
        }
    }
    Ok(loads.iter().map(|l| l.iter().map(|v| v * v).sum::<f64>()).collect())
}

pub fn sweep_correlated(n: usize, seed: u64, trials: usize) -> Result<Summary> {
    if n > CORRELATED_SWEEP_CAP {
        return Err(Error::InvalidArgument(format!(
            "correlated sweep limited to n ≤ {CORRELATED_SWEEP_CAP}"
        )));
    }
    let inst = gen_lb_instance(&AdversaryConfig::fractional(n, seed))?;
    let run = run_correlated(&inst, trials, seed)?;
    run.samples
        .iter()
        .map(|a| Ok(cost_quadratic(a, &inst)?))
        .collect::<Result<Vec<f64>>>()
        .map(|v| v.into_iter().collect())
}

/// Instance on `1 + spread` machines in which machine 0 collects `groups`
/// full hard groups: after one unit job on machine 0, every job offers
/// machine 0 with `ν(0)/w` inside the hard band and one of the other
/// machines, with the second weight tuned so the fraction on machine 0 is
/// below `θ`.
pub fn gen_hard_group_instance(groups: usize, spread: usize, seed: u64) -> Result<Instance> {
    if spread == 0 {
        return Err(Error::InvalidArgument("spread ≥ 1 required".into()));
    }
    let k = ConstantsBundle::paper();
    let m = 1 + spread;
    let mut r = rng::substream(seed, "stress");
    let mut runner = CorrelatedRunner::new(m, k);
    let mut jobs = vec![Job::on_machines(&[(0, 1.0)])];
    runner.step(&jobs[0])?;
    let closed = |runner: &CorrelatedRunner| runner.grouping().hard_groups().filter(|(_, g)| g.machine == 0 && g.full).count();
    let cap = 100 * groups.max(1);
    while closed(&runner) < groups && jobs.len() < cap {
        let q = r.gen_range(k.a + 0.05..k.b - 0.05);
        let target = r.gen_range(0.3..0.85) * k.theta;
        let w = runner.dual().nu[0] / q;
        let other = 1 + jobs.len() % spread;
        let job_for = |v: f64| Job::on_machines(&[(0, w), (other, v)]);
        let share = |v: f64| -> Result<f64> { Ok(runner.clone().step(&job_for(v))?.x[0]) };
        let (mut lo, mut hi) = (-12.0f64, 4.0f64);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if share(mid.exp())? < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let job = job_for(lo.exp());
        runner.step(&job)?;
        jobs.push(job);
    }
    Ok(Instance::new(m, Model::Standard, jobs)?)
}
