//! Instances, assignments and cost accounting.
//!
//! Jobs arrive in list order. Each job carries a list of *options*; in the
//! standard model an option is a single machine with a weight, in the
//! hypergraph model an option is a nonempty machine set with one weight per
//! member. Machines that a job cannot use are simply absent from its options.

use std::io::{BufRead, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::ModelError;

pub type MachineId = usize;

/// Tolerance on `Σ_i x_ij = 1` for a stored fractional row.
pub const ROW_SUM_TOL: f64 = 1e-12;
/// Rows off by more than [`ROW_SUM_TOL`] but within this are renormalized.
pub const ROW_RENORMALIZE_TOL: f64 = 1e-9;
/// Default enumeration cap for [`bruteforce_opt`].
pub const DEFAULT_BRUTEFORCE_CAP: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Standard,
    Hypergraph,
}

/// One feasible target of a job: a machine, or a hyperedge of machines.
#[derive(Clone, Debug, PartialEq)]
pub struct JobOption {
    machines: SmallVec<[MachineId; 1]>,
    weights: SmallVec<[f64; 1]>,
}

impl JobOption {
    pub fn machine(machine: MachineId, weight: f64) -> Self {
        JobOption {
            machines: SmallVec::from_elem(machine, 1),
            weights: SmallVec::from_elem(weight, 1),
        }
    }

    pub fn hyperedge(machines: Vec<MachineId>, weights: Vec<f64>) -> Result<Self, ModelError> {
        if machines.is_empty() {
            return Err(ModelError::EmptyHyperedge);
        }
        if machines.len() != weights.len() {
            return Err(ModelError::WeightCountMismatch {
                machines: machines.len(),
                weights: weights.len(),
            });
        }
        Ok(JobOption {
            machines: machines.into(),
            weights: weights.into(),
        })
    }

    pub fn machines(&self) -> &[MachineId] {
        &self.machines
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_single(&self) -> bool {
        self.machines.len() == 1
    }

    /// The machine of a single-machine option (first member otherwise).
    pub fn machine_id(&self) -> MachineId {
        self.machines[0]
    }

    /// The weight of a single-machine option (first member otherwise).
    pub fn weight(&self) -> f64 {
        self.weights[0]
    }

    pub fn iter(&self) -> impl Iterator<Item = (MachineId, f64)> + '_ {
        self.machines.iter().copied().zip(self.weights.iter().copied())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Job {
    pub options: Vec<JobOption>,
}

impl Job {
    pub fn new(options: Vec<JobOption>) -> Self {
        Job { options }
    }

    /// Standard-model job from `(machine, weight)` pairs.
    pub fn on_machines(options: &[(MachineId, f64)]) -> Self {
        Job {
            options: options
                .iter()
                .map(|&(m, w)| JobOption::machine(m, w))
                .collect(),
        }
    }
}

/// An online instance: machine count, model flavour and jobs in arrival order.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    machines: usize,
    model: Model,
    jobs: Vec<Job>,
}

impl Instance {
    pub fn new(machines: usize, model: Model, jobs: Vec<Job>) -> Result<Self, ModelError> {
        if machines == 0 {
            return Err(ModelError::NoMachines);
        }
        for (j, job) in jobs.iter().enumerate() {
            validate_job(j, job, machines, model)?;
        }
        Ok(Instance {
            machines,
            model,
            jobs,
        })
    }

    /// Standard-model instance from per-job `(machine, weight)` lists.
    pub fn standard(machines: usize, jobs: Vec<Vec<(MachineId, f64)>>) -> Result<Self, ModelError> {
        let jobs = jobs.iter().map(|opts| Job::on_machines(opts)).collect();
        Instance::new(machines, Model::Standard, jobs)
    }

    pub fn machines(&self) -> usize {
        self.machines
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn jobs(&self) -> &[Job] {
        &self.jobs
    }

    pub fn len(&self) -> usize {
        self.jobs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jobs.is_empty()
    }

    /// Fails unless every option is a single machine.
    pub fn require_standard(&self, what: &'static str) -> Result<(), ModelError> {
        let standard = self.model == Model::Standard
            || self.jobs.iter().all(|j| j.options.iter().all(JobOption::is_single));
        if standard {
            Ok(())
        } else {
            Err(ModelError::RequiresStandard(what))
        }
    }

    /// Reads the JSON Lines instance format (header line, then one job per line).
    pub fn read_jsonl<R: BufRead>(reader: R) -> Result<Self, ModelError> {
        let mut lines = reader
            .lines()
            .enumerate()
            .filter(|(_, l)| l.as_ref().map(|s| !s.trim().is_empty()).unwrap_or(true));
        let (_, header) = lines.next().ok_or(ModelError::Parse {
            line: 1,
            message: "missing header line".into(),
        })?;
        let header: HeaderLine = serde_json::from_str(&header?).map_err(|e| ModelError::Parse {
            line: 1,
            message: e.to_string(),
        })?;
        let mut jobs = Vec::new();
        for (idx, line) in lines {
            let line = line?;
            let parsed: JobLine = serde_json::from_str(&line).map_err(|e| ModelError::Parse {
                line: idx + 1,
                message: e.to_string(),
            })?;
            let options = parsed
                .options
                .into_iter()
                .map(|o| o.into_option())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| ModelError::Parse {
                    line: idx + 1,
                    message: e.to_string(),
                })?;
            jobs.push(Job { options });
        }
        Instance::new(header.machines, header.model, jobs)
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<(), ModelError> {
        let header = HeaderLine {
            machines: self.machines,
            model: self.model,
        };
        serde_json::to_writer(&mut out, &header).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
        for job in &self.jobs {
            let line = JobLine {
                options: job.options.iter().map(OptionLine::from_option).collect(),
            };
            serde_json::to_writer(&mut out, &line).map_err(std::io::Error::from)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self, ModelError> {
        let file = std::fs::File::open(path)?;
        Instance::read_jsonl(std::io::BufReader::new(file))
    }
}

fn validate_job(j: usize, job: &Job, machines: usize, model: Model) -> Result<(), ModelError> {
    if job.options.is_empty() {
        return Err(ModelError::EmptyJob { job: j });
    }
    let mut seen: Vec<Vec<MachineId>> = Vec::with_capacity(job.options.len());
    for opt in &job.options {
        if opt.machines.is_empty() {
            return Err(ModelError::EmptyHyperedge);
        }
        if model == Model::Standard && !opt.is_single() {
            return Err(ModelError::HyperedgeInStandardModel { job: j });
        }
        for (m, w) in opt.iter() {
            if m >= machines {
                return Err(ModelError::MachineOutOfRange { job: j, machine: m });
            }
            if !w.is_finite() || w < 0.0 {
                return Err(ModelError::InvalidWeight { job: j, weight: w });
            }
        }
        let mut key: Vec<MachineId> = opt.machines.to_vec();
        key.sort_unstable();
        if key.windows(2).any(|p| p[0] == p[1]) {
            return Err(ModelError::DuplicateTarget { job: j });
        }
        if seen.contains(&key) {
            return Err(ModelError::DuplicateTarget { job: j });
        }
        seen.push(key);
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct HeaderLine {
    machines: usize,
    model: Model,
}

#[derive(Serialize, Deserialize)]
struct JobLine {
    options: Vec<OptionLine>,
}

#[derive(Serialize, Deserialize)]
struct OptionLine {
    machines: Vec<MachineId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weight: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<f64>>,
}

impl OptionLine {
    fn from_option(opt: &JobOption) -> Self {
        if opt.is_single() {
            OptionLine {
                machines: opt.machines.to_vec(),
                weight: Some(opt.weight()),
                weights: None,
            }
        } else {
            OptionLine {
                machines: opt.machines.to_vec(),
                weight: None,
                weights: Some(opt.weights.to_vec()),
            }
        }
    }

    fn into_option(self) -> Result<JobOption, ModelError> {
        match (self.weight, self.weights) {
            (Some(w), None) if self.machines.len() == 1 => Ok(JobOption::machine(self.machines[0], w)),
            (None, Some(ws)) => JobOption::hyperedge(self.machines, ws),
            (Some(_), None) => Err(ModelError::WeightCountMismatch {
                machines: self.machines.len(),
                weights: 1,
            }),
            _ => Err(ModelError::MissingWeights),
        }
    }
}

/// Per-job distribution over the job's options (`x_ij`, aligned with `Job::options`).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FractionalAssignment {
    rows: Vec<Vec<f64>>,
}

impl FractionalAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends the distribution of the next job, renormalizing tiny drift.
    pub fn push(&mut self, mut row: Vec<f64>) -> Result<(), ModelError> {
        let job = self.rows.len();
        normalize_row(job, &mut row)?;
        self.rows.push(row);
        Ok(())
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, ModelError> {
        let mut fa = FractionalAssignment::new();
        for row in rows {
            fa.push(row)?;
        }
        Ok(fa)
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, job: usize) -> &[f64] {
        &self.rows[job]
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

pub(crate) fn normalize_row(job: usize, row: &mut [f64]) -> Result<(), ModelError> {
    if row.iter().any(|v| !v.is_finite() || *v < -ROW_SUM_TOL) {
        return Err(ModelError::InvalidFraction { job });
    }
    for v in row.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let sum: f64 = row.iter().sum();
    let drift = (sum - 1.0).abs();
    if drift > ROW_RENORMALIZE_TOL {
        return Err(ModelError::RowSum { job, sum });
    }
    if drift > ROW_SUM_TOL {
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
    Ok(())
}

/// The realized option index of every job.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegralAssignment {
    choices: Vec<usize>,
}

impl IntegralAssignment {
    pub fn new(choices: Vec<usize>) -> Self {
        IntegralAssignment { choices }
    }

    pub fn choices(&self) -> &[usize] {
        &self.choices
    }

    pub fn choice(&self, job: usize) -> usize {
        self.choices[job]
    }

    pub fn len(&self) -> usize {
        self.choices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.choices.is_empty()
    }
}

/// Anything that induces (expected) machine loads on an instance.
pub trait Assignment {
    fn assigned_jobs(&self) -> usize;
    fn add_job_loads(&self, job: usize, options: &[JobOption], loads: &mut [f64]) -> Result<(), ModelError>;
}

impl Assignment for FractionalAssignment {
    fn assigned_jobs(&self) -> usize {
        self.rows.len()
    }

    fn add_job_loads(&self, job: usize, options: &[JobOption], loads: &mut [f64]) -> Result<(), ModelError> {
        let row = &self.rows[job];
        if row.len() != options.len() {
            return Err(ModelError::ShapeMismatch { job });
        }
        for (opt, &x) in options.iter().zip(row) {
            for (m, w) in opt.iter() {
                loads[m] += w * x;
            }
        }
        Ok(())
    }
}

impl Assignment for IntegralAssignment {
    fn assigned_jobs(&self) -> usize {
        self.choices.len()
    }

    fn add_job_loads(&self, job: usize, options: &[JobOption], loads: &mut [f64]) -> Result<(), ModelError> {
        let opt = options
            .get(self.choices[job])
            .ok_or(ModelError::ShapeMismatch { job })?;
        for (m, w) in opt.iter() {
            loads[m] += w;
        }
        Ok(())
    }
}

/// Running machine loads `L_e^{(j)}`, starting from zero.
#[derive(Clone, Debug, PartialEq)]
pub struct LoadTracker {
    loads: Vec<f64>,
}

impl LoadTracker {
    pub fn new(machines: usize) -> Self {
        LoadTracker {
            loads: vec![0.0; machines],
        }
    }

    pub fn add(&mut self, option: &JobOption, fraction: f64) {
        for (m, w) in option.iter() {
            self.loads[m] += w * fraction;
        }
    }

    pub fn add_row(&mut self, options: &[JobOption], row: &[f64]) {
        for (opt, &x) in options.iter().zip(row) {
            self.add(opt, x);
        }
    }

    pub fn loads(&self) -> &[f64] {
        &self.loads
    }

    pub fn load(&self, machine: MachineId) -> f64 {
        self.loads[machine]
    }

    pub fn sum_of_squares(&self) -> f64 {
        self.loads.iter().map(|l| l * l).sum()
    }
}

/// Final machine loads induced by an assignment.
pub fn final_loads<A: Assignment + ?Sized>(assignment: &A, instance: &Instance) -> Result<Vec<f64>, ModelError> {
    if assignment.assigned_jobs() < instance.len() {
        return Err(ModelError::UnassignedJob {
            job: assignment.assigned_jobs(),
        });
    }
    let mut loads = vec![0.0; instance.machines()];
    for (j, job) in instance.jobs().iter().enumerate() {
        assignment.add_job_loads(j, &job.options, &mut loads)?;
    }
    Ok(loads)
}

/// `Σ_e L_e²` of a complete assignment.
pub fn cost_quadratic<A: Assignment + ?Sized>(assignment: &A, instance: &Instance) -> Result<f64, ModelError> {
    Ok(final_loads(assignment, instance)?.iter().map(|l| l * l).sum())
}

/// Exact integral optimum by exhaustive enumeration.
pub fn bruteforce_opt(instance: &Instance, cap: u64) -> Result<(f64, IntegralAssignment), ModelError> {
    let mut count: u64 = 1;
    for job in instance.jobs() {
        count = count.saturating_mul(job.options.len() as u64);
        if count > cap {
            return Err(ModelError::TooLargeForBruteForce { assignments: count, cap });
        }
    }
    let mut search = BruteForce {
        jobs: instance.jobs(),
        loads: vec![0.0; instance.machines()],
        current: vec![0; instance.len()],
        best: f64::INFINITY,
        best_choice: vec![0; instance.len()],
    };
    search.descend(0);
    Ok((search.best, IntegralAssignment::new(search.best_choice)))
}

struct BruteForce<'a> {
    jobs: &'a [Job],
    loads: Vec<f64>,
    current: Vec<usize>,
    best: f64,
    best_choice: Vec<usize>,
}

impl BruteForce<'_> {
    fn descend(&mut self, j: usize) {
        if j == self.jobs.len() {
            let cost: f64 = self.loads.iter().map(|l| l * l).sum();
            if cost < self.best {
                self.best = cost;
                self.best_choice.copy_from_slice(&self.current);
            }
            return;
        }
        let jobs = self.jobs;
        for (o, opt) in jobs[j].options.iter().enumerate() {
            for (m, w) in opt.iter() {
                self.loads[m] += w;
            }
            self.current[j] = o;
            self.descend(j + 1);
            for (m, w) in opt.iter() {
                self.loads[m] -= w;
            }
        }
    }
}

/// Random standard-model instance: each machine is feasible with probability
/// `density` (at least one per job), weights uniform in `(0, 1]`.
pub fn random_standard_instance<R: Rng + ?Sized>(machines: usize, jobs: usize, density: f64, rng: &mut R) -> Instance {
    let mut out = Vec::with_capacity(jobs);
    for _ in 0..jobs {
        let mut opts: Vec<(MachineId, f64)> = Vec::new();
        for m in 0..machines {
            if rng.gen::<f64>() < density {
                opts.push((m, 1.0 - rng.gen::<f64>()));
            }
        }
        if opts.is_empty() {
            opts.push((rng.gen_range(0..machines), 1.0 - rng.gen::<f64>()));
        }
        out.push(opts);
    }
    Instance::standard(machines, out).expect("generated instance is valid")
}

// ---------------------------------------------------------------------------
// Weighted completion time under Smith-ratio ordering.

#[derive(Clone, Debug, PartialEq)]
pub struct SmithJob {
    pub weight: f64,
    /// `(machine, processing time)` for every feasible machine.
    pub options: Vec<(MachineId, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SmithInstance {
    machines: usize,
    jobs: Vec<SmithJob>,
}

impl SmithInstance {
    pub fn new(machines: usize, jobs: Vec<SmithJob>) -> Result<Self, ModelError> {
        if machines == 0 {
            return Err(ModelError::NoMachines);
        }
        for (j, job) in jobs.iter().enumerate() {
            if !(job.weight.is_finite() && job.weight > 0.0) {
                return Err(ModelError::InvalidWeight { job: j, weight: job.weight });
            }
            if job.options.is_empty() {
                return Err(ModelError::EmptyJob { job: j });
            }
            let mut ms: Vec<MachineId> = job.options.iter().map(|o| o.0).collect();
            ms.sort_unstable();
            if ms.windows(2).any(|p| p[0] == p[1]) {
                return Err(ModelError::DuplicateTarget { job: j });
            }
            for &(m, p) in &job.options {
                if m >= machines {
                    return Err(ModelError::MachineOutOfRange { job: j, machine: m });
                }
                if !p.is_finite() || p < 0.0 {
                    return Err(ModelError::InvalidWeight { job: j, weight: p });
                }
            }
        }
        Ok(SmithInstance { machines, jobs })
    }

    pub fn machines(&self) -> usize {
        self.machines
    }

    pub fn jobs(&self) -> &[SmithJob] {
        &self.jobs
    }

    /// Builds an option-aligned assignment from a dense `x[job][machine]` matrix.
    pub fn assignment_from_dense(&self, dense: &[Vec<f64>]) -> Result<FractionalAssignment, ModelError> {
        let mut fa = FractionalAssignment::new();
        for (j, (job, row)) in self.jobs.iter().zip(dense).enumerate() {
            if row.len() != self.machines {
                return Err(ModelError::ShapeMismatch { job: j });
            }
            for (m, &x) in row.iter().enumerate() {
                if x > 0.0 && !job.options.iter().any(|o| o.0 == m) {
                    return Err(ModelError::InfeasibleMachine { job: j, machine: m });
                }
            }
            fa.push(job.options.iter().map(|&(m, _)| row[m]).collect())?;
        }
        Ok(fa)
    }
}

/// `Σ_j w_j C_j(x)` with each machine ordering its jobs by Smith ratio
/// `p_ij / w_j`, ties broken by arrival index.
pub fn cost_smith(assignment: &FractionalAssignment, instance: &SmithInstance) -> Result<f64, ModelError> {
    if assignment.len() < instance.jobs.len() {
        return Err(ModelError::UnassignedJob { job: assignment.len() });
    }
    // per machine: (ratio, job, x, p)
    let mut per_machine: Vec<Vec<(f64, usize, f64, f64)>> = vec![Vec::new(); instance.machines];
    for (j, job) in instance.jobs.iter().enumerate() {
        let row = assignment.row(j);
        if row.len() != job.options.len() {
            return Err(ModelError::ShapeMismatch { job: j });
        }
        for (&(m, p), &x) in job.options.iter().zip(row) {
            if x > 0.0 {
                per_machine[m].push((p / job.weight, j, x, p));
            }
        }
    }
    let mut total = 0.0;
    for list in &mut per_machine {
        list.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut prefix = 0.0;
        for &(_, j, x, p) in list.iter() {
            total += instance.jobs[j].weight * x * (p + prefix);
            prefix += p * x;
        }
    }
    Ok(total)
}

/// Right-hand side of the uniform-Smith-ratio identity:
/// `½ Σ_i (Σ_j w_j x_ij)² + Σ_i Σ_j w_j² (x_ij − x_ij²/2)`.
pub fn smith_uniform_identity_rhs(assignment: &FractionalAssignment, instance: &SmithInstance) -> Result<f64, ModelError> {
    if assignment.len() < instance.jobs.len() {
        return Err(ModelError::UnassignedJob { job: assignment.len() });
    }
    let mut loads = vec![0.0; instance.machines];
    let mut diag = 0.0;
    for (j, job) in instance.jobs.iter().enumerate() {
        let row = assignment.row(j);
        if row.len() != job.options.len() {
            return Err(ModelError::ShapeMismatch { job: j });
        }
        for (&(m, _), &x) in job.options.iter().zip(row) {
            loads[m] += job.weight * x;
            diag += job.weight * job.weight * (x - 0.5 * x * x);
        }
    }
    Ok(0.5 * loads.iter().map(|l| l * l).sum::<f64>() + diag)
}

/// The load-balancing cost `Σ_i (Σ_j w_j x_ij)²` of a Smith instance's assignment.
pub fn smith_load_cost(assignment: &FractionalAssignment, instance: &SmithInstance) -> Result<f64, ModelError> {
    let mut loads = vec![0.0; instance.machines];
    for (j, job) in instance.jobs.iter().enumerate() {
        let row = assignment.rows().get(j).ok_or(ModelError::UnassignedJob { job: j })?;
        for (&(m, _), &x) in job.options.iter().zip(row) {
            loads[m] += job.weight * x;
        }
    }
    Ok(loads.iter().map(|l| l * l).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_job_cost() {
        let inst = Instance::standard(1, vec![vec![(0, 3.0)]]).unwrap();
        let x = IntegralAssignment::new(vec![0]);
        assert_eq!(cost_quadratic(&x, &inst).unwrap(), 9.0);
    }

    #[test]
    fn split_job_cost() {
        let inst = Instance::standard(2, vec![vec![(0, 1.0), (1, 1.0)]]).unwrap();
        let x = FractionalAssignment::from_rows(vec![vec![0.5, 0.5]]).unwrap();
        assert!((cost_quadratic(&x, &inst).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn hyperedge_cost() {
        let opt = JobOption::hyperedge(vec![0, 1], vec![1.0, 2.0]).unwrap();
        let inst = Instance::new(2, Model::Hypergraph, vec![Job::new(vec![opt])]).unwrap();
        let x = IntegralAssignment::new(vec![0]);
        assert_eq!(cost_quadratic(&x, &inst).unwrap(), 5.0);
    }

    #[test]
    fn unassigned_job_is_an_error() {
        let inst = Instance::standard(1, vec![vec![(0, 1.0)], vec![(0, 1.0)]]).unwrap();
        let x = IntegralAssignment::new(vec![0]);
        let err = cost_quadratic(&x, &inst).unwrap_err();
        assert!(err.to_string().contains("unassigned job"));
    }

    #[test]
    fn validation_rejects_bad_jobs() {
        assert!(Instance::standard(1, vec![vec![]]).is_err());
        assert!(Instance::standard(1, vec![vec![(0, -1.0)]]).is_err());
        assert!(Instance::standard(1, vec![vec![(0, f64::NAN)]]).is_err());
        assert!(Instance::standard(1, vec![vec![(1, 1.0)]]).is_err());
        assert!(Instance::standard(2, vec![vec![(0, 1.0), (0, 2.0)]]).is_err());
        assert!(Instance::standard(0, vec![]).is_err());
        let edge = JobOption::hyperedge(vec![0, 1], vec![1.0, 1.0]).unwrap();
        assert!(Instance::new(2, Model::Standard, vec![Job::new(vec![edge])]).is_err());
        assert!(JobOption::hyperedge(vec![], vec![]).is_err());
    }

    #[test]
    fn row_normalization() {
        let mut fa = FractionalAssignment::new();
        fa.push(vec![0.5, 0.5 + 5e-10]).unwrap();
        assert!((fa.row(0).iter().sum::<f64>() - 1.0).abs() <= 1e-15);
        assert!(fa.push(vec![0.5, 0.6]).is_err());
    }

    #[test]
    fn smith_examples() {
        let inst = SmithInstance::new(
            1,
            vec![SmithJob {
                weight: 2.0,
                options: vec![(0, 2.0)],
            }],
        )
        .unwrap();
        let x = FractionalAssignment::from_rows(vec![vec![1.0]]).unwrap();
        assert_eq!(cost_smith(&x, &inst).unwrap(), 4.0);
        assert_eq!(smith_uniform_identity_rhs(&x, &inst).unwrap(), 4.0);

        let unit = SmithJob {
            weight: 1.0,
            options: vec![(0, 1.0)],
        };
        let inst = SmithInstance::new(1, vec![unit.clone(), unit]).unwrap();
        let x = FractionalAssignment::from_rows(vec![vec![1.0], vec![1.0]]).unwrap();
        assert_eq!(cost_smith(&x, &inst).unwrap(), 3.0);
    }

    #[test]
    fn smith_dense_rejects_infeasible_machine() {
        let inst = SmithInstance::new(
            2,
            vec![SmithJob {
                weight: 1.0,
                options: vec![(0, 1.0)],
            }],
        )
        .unwrap();
        let err = inst.assignment_from_dense(&[vec![0.5, 0.5]]).unwrap_err();
        assert!(matches!(err, ModelError::InfeasibleMachine { job: 0, machine: 1 }));
    }

    #[test]
    fn bruteforce_small_cases() {
        let inst = Instance::standard(2, vec![vec![(0, 1.0), (1, 1.0)]; 2]).unwrap();
        assert_eq!(bruteforce_opt(&inst, DEFAULT_BRUTEFORCE_CAP).unwrap().0, 2.0);
        let inst = Instance::standard(1, vec![vec![(0, 1.0)]; 4]).unwrap();
        assert_eq!(bruteforce_opt(&inst, DEFAULT_BRUTEFORCE_CAP).unwrap().0, 16.0);
        let inst = Instance::standard(2, vec![vec![(0, 1.0), (1, 1.0)]; 21]).unwrap();
        let err = bruteforce_opt(&inst, DEFAULT_BRUTEFORCE_CAP).unwrap_err();
        assert!(err.to_string().contains("instance too large for brute force"));
    }

    #[test]
    fn jsonl_round_trip() {
        let edge = JobOption::hyperedge(vec![0, 2], vec![1.0, 0.25]).unwrap();
        let inst = Instance::new(
            3,
            Model::Hypergraph,
            vec![
                Job::new(vec![JobOption::machine(1, 1.5), edge]),
                Job::new(vec![JobOption::machine(0, 0.0)]),
            ],
        )
        .unwrap();
        let mut buf = Vec::new();
        inst.write_jsonl(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("{\"machines\":3,\"model\":\"hypergraph\"}\n"));
        assert!(text.contains("{\"machines\":[1],\"weight\":1.5}"));
        let back = Instance::read_jsonl(std::io::Cursor::new(buf)).unwrap();
        assert_eq!(back, inst);
    }

    #[test]
    fn jsonl_reports_bad_lines() {
        let text = "{\"machines\":2,\"model\":\"standard\"}\n{\"options\":[{\"machines\":[0]}]}\n";
        let err = Instance::read_jsonl(std::io::Cursor::new(text)).unwrap_err();
        assert!(matches!(err, ModelError::Parse { line: 2, .. }));
        let text = "{\"machines\":2}\n";
        assert!(Instance::read_jsonl(std::io::Cursor::new(text)).is_err());
    }
}
