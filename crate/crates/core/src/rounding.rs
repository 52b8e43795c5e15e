//! Dependent rounding with group recommendations and modified-Poisson
//! tickets, in its offline form and its online (one job at a time) form.
//!
//! In every round each group recommends at most one surviving member, job
//! `j` with probability `x_ij`. A recommended option draws `Ñ ~ Poi~(x_ij)`
//! tickets and the job goes to a uniformly random ticket; jobs without
//! tickets retry in the next round.

use rand::Rng;
use serde::Serialize;

use crate::algorithms::{GroupKind, GroupingState};
use crate::error::RoundingError;
use crate::model::{FractionalAssignment, IntegralAssignment};

/// Round cap for a single job.
pub const MAX_ROUNDS: usize = 1_000_000;
/// Tail mass folded into the last bucket of the ticket distribution.
pub const POISSON_TAIL: f64 = 1e-15;

/// `P[Ñ = k]` for `Ñ ~ Poi~(p)`.
pub fn modified_poisson_pmf(p: f64, k: u32) -> f64 {
    if k == 0 {
        1.0 + (-p).exp_m1() / p
    } else {
        let mut term = (-p).exp();
        for i in 1..k {
            term *= p / (i + 1) as f64;
        }
        term
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModifiedPoissonSampler {
    p: f64,
    p0: f64,
    p1: f64,
}

impl ModifiedPoissonSampler {
    pub fn new(p: f64) -> Result<Self, RoundingError> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(RoundingError::BadParameter(p));
        }
        Ok(Self::unchecked(p))
    }

    fn unchecked(p: f64) -> Self {
        ModifiedPoissonSampler {
            p,
            p0: 1.0 + (-p).exp_m1() / p,
            p1: (-p).exp(),
        }
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Inverse CDF.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        let u: f64 = rng.gen();
        let mut acc = self.p0;
        if u < acc {
            return 0;
        }
        let mut term = self.p1;
        let mut k = 1u32;
        loop {
            acc += term;
            if u < acc || 1.0 - acc < POISSON_TAIL {
                return k;
            }
            k += 1;
            term *= self.p / k as f64;
        }
    }
}

pub fn sample_modified_poisson<R: Rng + ?Sized>(p: f64, rng: &mut R) -> Result<u32, RoundingError> {
    Ok(ModifiedPoissonSampler::new(p)?.sample(rng))
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Entry {
    option: usize,
    x: f64,
    group: u32,
    shared: bool,
}

/// Positive fractions and their groups, laid out for repeated rounding.
#[derive(Clone, Debug, PartialEq)]
pub struct RoundingPlan {
    jobs: Vec<Vec<Entry>>,
    /// Per compact group: `(job, entry index)` in arrival order.
    members: Vec<Vec<(usize, usize)>>,
}

impl RoundingPlan {
    pub fn new(x: &FractionalAssignment, grouping: &GroupingState) -> Result<Self, RoundingError> {
        let mut compact = vec![u32::MAX; grouping.groups().len()];
        let mut members: Vec<Vec<(usize, usize)>> = Vec::new();
        let mut jobs = Vec::with_capacity(x.len());
        for (j, row) in x.rows().iter().enumerate() {
            let mut entries = Vec::new();
            for (o, &xv) in row.iter().enumerate() {
                if xv <= 0.0 {
                    continue;
                }
                let g = grouping.group_of(j, o);
                let group = grouping.group(g);
                if group.mass > 1.0 + 1e-12 {
                    return Err(RoundingError::GroupOverflow { group: g, mass: group.mass });
                }
                if compact[g] == u32::MAX {
                    compact[g] = members.len() as u32;
                    members.push(Vec::new());
                }
                members[compact[g] as usize].push((j, entries.len()));
                entries.push(Entry {
                    option: o,
                    x: xv.min(1.0),
                    group: compact[g],
                    shared: group.kind == GroupKind::Hard,
                });
            }
            if entries.is_empty() {
                return Err(RoundingError::EmptyRow { job: j });
            }
            jobs.push(entries);
        }
        Ok(RoundingPlan { jobs, members })
    }

    /// Every job in its own independent group.
    pub fn independent(x: &FractionalAssignment) -> Result<Self, RoundingError> {
        let mut members = Vec::new();
        let mut jobs = Vec::with_capacity(x.len());
        for (j, row) in x.rows().iter().enumerate() {
            let mut entries = Vec::new();
            for (o, &xv) in row.iter().enumerate() {
                if xv > 0.0 {
                    members.push(vec![(j, entries.len())]);
                    entries.push(Entry {
                        option: o,
                        x: xv.min(1.0),
                        group: (members.len() - 1) as u32,
                        shared: false,
                    });
                }
            }
            if entries.is_empty() {
                return Err(RoundingError::EmptyRow { job: j });
            }
            jobs.push(entries);
        }
        Ok(RoundingPlan { jobs, members })
    }

    pub fn jobs(&self) -> usize {
        self.jobs.len()
    }

    fn groups(&self) -> usize {
        self.members.len()
    }
}

/// The rounding of one job.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct JobOutcome {
    /// Chosen option index.
    pub option: usize,
    /// Round in which the job was assigned (1-based).
    pub round: usize,
    /// `(option, N_ij)` for every option holding tickets in that round.
    pub tickets: Vec<(usize, u32)>,
    /// Options recommended in round 1.
    pub first_round: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RoundingOutcome {
    pub jobs: Vec<JobOutcome>,
}

impl RoundingOutcome {
    pub fn assignment(&self) -> IntegralAssignment {
        IntegralAssignment::new(self.jobs.iter().map(|j| j.option).collect())
    }
}

/// Residual recommendation values `R_{G,ℓ}`, drawn on first touch.
#[derive(Clone, Debug, Default)]
pub struct StreamStore {
    residual: Vec<Vec<f64>>,
    touched: Vec<u32>,
}

impl StreamStore {
    pub fn new(groups: usize) -> Self {
        StreamStore {
            residual: vec![Vec::new(); groups],
            touched: Vec::new(),
        }
    }

    fn slot<R: Rng + ?Sized>(&mut self, group: u32, round: usize, rng: &mut R) -> &mut f64 {
        let r = &mut self.residual[group as usize];
        if r.is_empty() {
            self.touched.push(group);
        }
        while r.len() < round {
            r.push(rng.gen());
        }
        &mut r[round - 1]
    }

    pub fn clear(&mut self) {
        for g in self.touched.drain(..) {
            self.residual[g as usize].clear();
        }
    }
}

/// Online rounding: each job is settled on arrival using the residual
/// streams of its groups.
#[derive(Clone, Debug)]
pub struct OnlineRounder<'p> {
    plan: &'p RoundingPlan,
    streams: StreamStore,
    next: usize,
    tickets: Vec<(usize, u32)>,
    first_round: Vec<usize>,
}

impl<'p> OnlineRounder<'p> {
    pub fn new(plan: &'p RoundingPlan) -> Self {
        OnlineRounder {
            plan,
            streams: StreamStore::new(plan.groups()),
            next: 0,
            tickets: Vec::new(),
            first_round: Vec::new(),
        }
    }

    /// Starts a fresh trial, reusing allocations.
    pub fn reset(&mut self) {
        self.streams.clear();
        self.next = 0;
    }

    /// Rounds the next job; returns its chosen option.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<usize, RoundingError> {
        let (option, _) = self.step_inner(rng)?;
        Ok(option)
    }

    pub fn step_detailed<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<JobOutcome, RoundingError> {
        let (option, round) = self.step_inner(rng)?;
        Ok(JobOutcome {
            option,
            round,
            tickets: self.tickets.clone(),
            first_round: self.first_round.clone(),
        })
    }

    fn step_inner<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<(usize, usize), RoundingError> {
        let j = self.next;
        let entries = &self.plan.jobs[j];
        self.first_round.clear();
        for round in 1..=MAX_ROUNDS {
            self.tickets.clear();
            let mut total = 0u64;
            for e in entries {
                let recommended = if e.shared {
                    let r = self.streams.slot(e.group, round, rng);
                    let hit = *r >= 0.0 && *r < e.x;
                    *r -= e.x;
                    hit
                } else {
                    rng.gen::<f64>() < e.x
                };
                if recommended {
                    if round == 1 {
                        self.first_round.push(e.option);
                    }
                    let n = ModifiedPoissonSampler::unchecked(e.x).sample(rng);
                    if n > 0 {
                        self.tickets.push((e.option, n));
                        total += n as u64;
                    }
                }
            }
            if total > 0 {
                let mut pick = rng.gen_range(0..total);
                for &(o, n) in &self.tickets {
                    if pick < n as u64 {
                        self.next += 1;
                        return Ok((o, round));
                    }
                    pick -= n as u64;
                }
            }
        }
        Err(RoundingError::NoTermination(MAX_ROUNDS))
    }

    /// Rounds every remaining job.
    pub fn round_all<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<RoundingOutcome, RoundingError> {
        let mut jobs = Vec::with_capacity(self.plan.jobs() - self.next);
        while self.next < self.plan.jobs() {
            jobs.push(self.step_detailed(rng)?);
        }
        Ok(RoundingOutcome { jobs })
    }

    /// Rounds every job of a fresh trial into `choices`.
    pub fn sample_into<R: Rng + ?Sized>(&mut self, rng: &mut R, choices: &mut Vec<usize>) -> Result<(), RoundingError> {
        self.reset();
        choices.clear();
        while self.next < self.plan.jobs() {
            choices.push(self.step(rng)?);
        }
        Ok(())
    }
}

/// Offline rounding over all jobs at once.
pub fn round_offline<R: Rng + ?Sized>(plan: &RoundingPlan, rng: &mut R) -> Result<RoundingOutcome, RoundingError> {
    let n = plan.jobs();
    let mut result: Vec<Option<JobOutcome>> = vec![None; n];
    let mut remaining = n;
    let mut recommended: Vec<Vec<bool>> = plan.jobs.iter().map(|e| vec![false; e.len()]).collect();
    let mut first_round: Vec<Vec<usize>> = vec![Vec::new(); n];
    for round in 1..=MAX_ROUNDS {
        if remaining == 0 {
            break;
        }
        for row in recommended.iter_mut() {
            row.fill(false);
        }
        for members in &plan.members {
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            for &(j, idx) in members {
                if result[j].is_some() {
                    continue;
                }
                acc += plan.jobs[j][idx].x;
                if u < acc {
                    recommended[j][idx] = true;
                    break;
                }
            }
        }
        for j in 0..n {
            if result[j].is_some() {
                continue;
            }
            let mut tickets = Vec::new();
            let mut total = 0u64;
            for (idx, e) in plan.jobs[j].iter().enumerate() {
                if recommended[j][idx] {
                    if round == 1 {
                        first_round[j].push(e.option);
                    }
                    let k = ModifiedPoissonSampler::unchecked(e.x).sample(rng);
                    if k > 0 {
                        tickets.push((e.option, k));
                        total += k as u64;
                    }
                }
            }
            if total > 0 {
                let mut pick = rng.gen_range(0..total);
                let mut option = tickets[0].0;
                for &(o, k) in &tickets {
                    if pick < k as u64 {
                        option = o;
                        break;
                    }
                    pick -= k as u64;
                }
                result[j] = Some(JobOutcome {
                    option,
                    round,
                    tickets,
                    first_round: std::mem::take(&mut first_round[j]),
                });
                remaining -= 1;
            }
        }
    }
    if remaining > 0 {
        return Err(RoundingError::NoTermination(MAX_ROUNDS));
    }
    Ok(RoundingOutcome {
        jobs: result.into_iter().map(|o| o.expect("assigned")).collect(),
    })
}

/// Runs one online trial over the whole plan.
pub fn round_online<R: Rng + ?Sized>(plan: &RoundingPlan, rng: &mut R) -> Result<RoundingOutcome, RoundingError> {
    OnlineRounder::new(plan).round_all(rng)
}
