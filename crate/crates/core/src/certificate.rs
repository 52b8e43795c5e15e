//! Dual certificates for the vector program
//!
//! ```text
//! max  Σ_j y_j − ½‖ν‖²
//! s.t. y_j ≤ w_ij² − ½‖v_ij‖² + ⟨ν, v_ij⟩          for all j, i ∈ S_j
//!      ⟨v_ij, v_i'k⟩ ≤ 2 w_ij w_i'k 1{i = i'}       for all (i,j) ≠ (i',k)
//! ```
//!
//! Vectors are kept in support form `v_ij = α_ij w_ij e_i` (a hyperedge
//! option spreads `α w_ej` over its machines), so only the scalars `α_ij`
//! are stored. Every feasible solution lower-bounds the optimum.

use std::f64::consts::SQRT_2;

use rayon::prelude::*;
use serde::Serialize;

use crate::algorithms::{
    correlation_factor, ConstantsBundle, CorrelatedRun, CorrelatedTrace, FractionalTrace, GreedyTrace, GroupKind, GroupingState,
};
use crate::error::Result;
use crate::model::{Instance, MachineId};
use crate::rng;
use crate::rounding::OnlineRounder;
use crate::stats::{Interval, Summary, Verdict};

/// Relative tolerance of the feasibility checks.
pub const FEASIBILITY_TOL: f64 = 1e-9;
/// Relative tolerance of the `ν` versus expected-load invariants.
pub const INVARIANT_TOL: f64 = 1e-12;
/// Grid resolution of the region sweeps in [`check_constants`].
pub const DEFAULT_GRID_STEP: f64 = 1e-3;
/// Trials per deterministic Monte Carlo chunk.
const CHUNK: usize = 512;

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct DualState {
    /// `ν(i)`; during a correlated run this is `ν^{(j)}`.
    pub nu: Vec<f64>,
    /// `ν̂(i)` after the latest update.
    pub nu_hat: Vec<f64>,
    pub y: Vec<f64>,
    /// `α_ij` per job and option.
    pub alpha: Vec<Vec<f64>>,
    /// `(job, option)` pairs with zero weight and positive fraction, where
    /// `α` falls back to `√2`.
    pub zero_weight: Vec<(usize, usize)>,
}

impl DualState {
    pub fn new(machines: usize) -> Self {
        DualState {
            nu: vec![0.0; machines],
            nu_hat: vec![0.0; machines],
            ..Default::default()
        }
    }

    /// `Σ_j y_j − ½‖ν‖²`.
    pub fn objective(&self) -> f64 {
        self.y.iter().sum::<f64>() - 0.5 * self.nu.iter().map(|v| v * v).sum::<f64>()
    }
}

/// One arrival as seen by [`update_dual`].
#[derive(Clone, Copy, Debug)]
pub struct DualInput<'a> {
    pub machines: &'a [MachineId],
    pub weights: &'a [f64],
    pub x: &'a [f64],
    pub potentials: &'a [f64],
    pub phi: &'a [f64],
    /// `Some(ν^{(s)})` for options whose job closes a full hard group.
    pub closing_start_nu: &'a [Option<f64>],
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DualUpdate {
    pub y: f64,
    pub alpha: Vec<f64>,
    pub nu_before: Vec<f64>,
    pub nu_hat: Vec<f64>,
    pub nu_after: Vec<f64>,
    pub bonus: Vec<f64>,
}

/// The online dual update of the correlated algorithm.
pub fn update_dual(state: &mut DualState, constants: &ConstantsBundle, input: &DualInput<'_>) -> DualUpdate {
    let job = state.y.len();
    let n = input.machines.len();
    let y: f64 = input.x.iter().zip(input.potentials).map(|(x, f)| x * f).sum();
    let mut upd = DualUpdate {
        y,
        alpha: Vec::with_capacity(n),
        nu_before: Vec::with_capacity(n),
        nu_hat: Vec::with_capacity(n),
        nu_after: Vec::with_capacity(n),
        bonus: Vec::with_capacity(n),
    };
    for o in 0..n {
        let (m, w, x) = (input.machines[o], input.weights[o], input.x[o]);
        let before = state.nu[m];
        let alpha = if w > 0.0 {
            (before / w).min(SQRT_2)
        } else {
            if x > 0.0 {
                state.zero_weight.push((job, o));
            }
            SQRT_2
        };
        let hat = before + w * x * input.phi[o];
        let bonus = match input.closing_start_nu[o] {
            Some(s) if hat > 0.0 => constants.lambda * s * s / hat,
            _ => 0.0,
        };
        state.nu_hat[m] = hat;
        state.nu[m] = hat + bonus;
        upd.alpha.push(alpha);
        upd.nu_before.push(before);
        upd.nu_hat.push(hat);
        upd.nu_after.push(hat + bonus);
        upd.bonus.push(bonus);
    }
    state.y.push(y);
    state.alpha.push(upd.alpha.clone());
    upd
}

/// Greedy fitting constants `(α, β)` with `α² = √2`, `β = (2 − α²)/α`.
pub fn greedy_constants() -> (f64, f64) {
    let alpha = SQRT_2.sqrt();
    (alpha, (2.0 - SQRT_2) / alpha)
}

/// `(αβ − β²)/2 = 1/(3 + 2√2)`.
pub fn greedy_ratio_factor() -> f64 {
    1.0 / (3.0 + 2.0 * SQRT_2)
}

pub fn fit_greedy(instance: &Instance, trace: &GreedyTrace) -> DualState {
    let (alpha, beta) = greedy_constants();
    DualState {
        nu: trace.loads.iter().map(|l| beta * l).collect(),
        nu_hat: Vec::new(),
        y: trace.steps.iter().map(|s| 0.5 * alpha * beta * (s.after - s.before)).collect(),
        alpha: instance.jobs().iter().map(|j| vec![alpha; j.options.len()]).collect(),
        zero_weight: Vec::new(),
    }
}

pub fn fit_balance(instance: &Instance, trace: &FractionalTrace) -> DualState {
    let beta = (2.0f64 / 5.0).sqrt();
    let alpha = 2.0 * beta;
    fit_water(instance, trace, alpha, beta, 0.2)
}

pub fn fit_frac_balance(instance: &Instance, trace: &FractionalTrace) -> DualState {
    fit_water(instance, trace, SQRT_2, 1.0 / SQRT_2, 0.5)
}

fn fit_water(instance: &Instance, trace: &FractionalTrace, alpha: f64, beta: f64, scale: f64) -> DualState {
    DualState {
        nu: trace.loads.iter().map(|l| beta * l).collect(),
        nu_hat: Vec::new(),
        y: trace
            .steps
            .iter()
            .map(|s| scale * s.x.iter().zip(&s.potentials).map(|(x, f)| x * f).sum::<f64>())
            .collect(),
        alpha: instance.jobs().iter().map(|j| vec![alpha; j.options.len()]).collect(),
        zero_weight: Vec::new(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub job: usize,
    pub option: usize,
    pub constraint: &'static str,
    /// Negative slack, unscaled.
    pub slack: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub checked: usize,
    pub violations: Vec<Violation>,
    /// Most negative scaled slack (0 when everything holds strictly).
    pub worst_scaled_slack: f64,
    /// Whether the exact pairwise inner products were checked.
    pub pairwise_checked: bool,
}

impl FeasibilityReport {
    pub fn feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Options up to which all vector pairs are checked explicitly.
pub const PAIRWISE_LIMIT: usize = 2_000;

/// Checks both constraint families of the dual program.
pub fn check_feasibility(instance: &Instance, dual: &DualState, tol: f64) -> FeasibilityReport {
    let mut report = FeasibilityReport {
        checked: 0,
        violations: Vec::new(),
        worst_scaled_slack: 0.0,
        pairwise_checked: false,
    };
    let mut total_options = 0;
    for (j, job) in instance.jobs().iter().enumerate() {
        let y = dual.y.get(j).copied().unwrap_or(0.0);
        for (o, opt) in job.options.iter().enumerate() {
            total_options += 1;
            let a = dual.alpha[j][o];
            let sq: f64 = opt.weights().iter().map(|w| w * w).sum();
            let lin: f64 = opt.iter().map(|(e, w)| w * dual.nu[e]).sum();
            let rhs = (1.0 - 0.5 * a * a) * sq + a * lin;
            let slack = rhs - y;
            let scale = sq + (a * lin).abs() + y.abs();
            report.checked += 1;
            let scaled = slack / scale.max(f64::MIN_POSITIVE);
            report.worst_scaled_slack = report.worst_scaled_slack.min(scaled);
            if slack < -tol * scale {
                report.violations.push(Violation {
                    job: j,
                    option: o,
                    constraint: "first",
                    slack,
                });
            }
            if a > SQRT_2 * (1.0 + tol) || a < 0.0 {
                report.violations.push(Violation {
                    job: j,
                    option: o,
                    constraint: "second",
                    slack: SQRT_2 - a,
                });
            }
        }
    }
    if total_options <= PAIRWISE_LIMIT {
        report.pairwise_checked = true;
        check_pairs(instance, dual, tol, &mut report);
    }
    report
}

fn check_pairs(instance: &Instance, dual: &DualState, tol: f64, report: &mut FeasibilityReport) {
    let flat: Vec<(usize, usize)> = instance
        .jobs()
        .iter()
        .enumerate()
        .flat_map(|(j, job)| (0..job.options.len()).map(move |o| (j, o)))
        .collect();
    let jobs = instance.jobs();
    for (p, &(j, o)) in flat.iter().enumerate() {
        let a = &jobs[j].options[o];
        for &(k, r) in &flat[p + 1..] {
            let b = &jobs[k].options[r];
            let mut common = 0.0;
            for (e, w) in a.iter() {
                for (f, v) in b.iter() {
                    if e == f {
                        common += w * v;
                    }
                }
            }
            if common == 0.0 {
                continue;
            }
            let inner = dual.alpha[j][o] * dual.alpha[k][r] * common;
            let slack = 2.0 * common - inner;
            report.checked += 1;
            if slack < -tol * 2.0 * common {
                report.violations.push(Violation {
                    job: k,
                    option: r,
                    constraint: "second",
                    slack,
                });
            }
        }
    }
}

/// Per-step sufficient condition of the correlated fitting:
/// `f_ij(x_ij) ≤ (1 − α_ij²/2) w_ij² + α_ij w_ij ν^{(j)}(i)`.
pub fn check_step_feasibility(instance: &Instance, trace: &CorrelatedTrace, tol: f64) -> FeasibilityReport {
    let mut report = FeasibilityReport {
        checked: 0,
        violations: Vec::new(),
        worst_scaled_slack: 0.0,
        pairwise_checked: false,
    };
    for (j, (job, s)) in instance.jobs().iter().zip(&trace.steps).enumerate() {
        for (o, opt) in job.options.iter().enumerate() {
            let w = opt.weight();
            let a = s.alpha[o];
            let rhs = (1.0 - 0.5 * a * a) * w * w + a * w * s.nu_after[o];
            let f = s.potentials[o];
            let scale = w * w + (a * w * s.nu_after[o]).abs() + f.abs();
            let slack = rhs - f;
            report.checked += 1;
            report.worst_scaled_slack = report.worst_scaled_slack.min(slack / scale.max(f64::MIN_POSITIVE));
            if slack < -tol * scale {
                report.violations.push(Violation {
                    job: j,
                    option: o,
                    constraint: "step",
                    slack,
                });
            }
        }
    }
    report
}

/// Combined feasibility, invariant and identity results.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CertificateReport {
    pub objective: f64,
    pub cost: Interval,
    pub ratio_bound: f64,
    pub violations: Vec<Violation>,
    pub invariants: std::collections::BTreeMap<String, bool>,
}

impl CertificateReport {
    pub fn new(objective: f64, cost: Interval, feasibility: &FeasibilityReport) -> Self {
        CertificateReport {
            objective,
            cost,
            ratio_bound: if objective > 0.0 { cost.mean / objective } else { f64::NAN },
            violations: feasibility.violations.clone(),
            invariants: Default::default(),
        }
    }

    pub fn ok(&self) -> bool {
        self.violations.is_empty() && self.invariants.values().all(|&v| v)
    }
}

// ------------------------------------------------------------ invariants

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct NuLoadReport {
    pub checked: usize,
    pub violations: Vec<String>,
    /// `min ν / E[L]` over every step with positive load.
    pub min_ratio: Option<f64>,
    /// The same minimum over hard-group starts.
    pub min_start_ratio: Option<f64>,
}

impl NuLoadReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// `ν^{(j)}(i) ≥ (β + ε) E[L_i^{(j)}]` after every arrival, and
/// `ν^{(s)}(i) ≥ (β + ε̃) E[L_i^{(s)}]` just before every hard group starts.
/// Also checks that `ν` never decreases and that `ν̂ = ν` except on group
/// closure.
pub fn check_nu_load_invariants(constants: &ConstantsBundle, instance: &Instance, trace: &CorrelatedTrace, grouping: &GroupingState) -> NuLoadReport {
    let mut report = NuLoadReport::default();
    let mut load = vec![0.0; instance.machines()];
    let c = constants.beta + constants.eps;
    let lower = |nu: f64, l: f64, c: f64| nu >= c * l - INVARIANT_TOL * (c * l).max(1.0);
    for (j, (job, s)) in instance.jobs().iter().zip(&trace.steps).enumerate() {
        for (o, opt) in job.options.iter().enumerate() {
            let m = opt.machine_id();
            load[m] += opt.weight() * s.x[o];
            report.checked += 1;
            if s.nu_after[o] < s.nu_before[o] {
                report.violations.push(format!("job {j}: nu decreased on machine {m}"));
            }
            if !s.closes[o] && s.nu_after[o] != s.nu_hat[o] {
                report.violations.push(format!("job {j}: bonus on machine {m} without closing a group"));
            }
            if !lower(s.nu_after[o], load[m], c) {
                report.violations.push(format!(
                    "job {j}, machine {m}: nu {} below {} x load {}",
                    s.nu_after[o], c, load[m]
                ));
            }
            if load[m] > 0.0 {
                let r = s.nu_after[o] / load[m];
                report.min_ratio = Some(report.min_ratio.map_or(r, |v: f64| v.min(r)));
            }
        }
    }
    let ct = constants.beta + constants.eps_tilde;
    for (id, g) in grouping.hard_groups() {
        report.checked += 1;
        if !lower(g.start_nu, g.start_load, ct) {
            report.violations.push(format!(
                "hard group {id} on machine {}: start nu {} below {} x load {}",
                g.machine, g.start_nu, ct, g.start_load
            ));
        }
        if g.start_load > 0.0 {
            let r = g.start_nu / g.start_load;
            report.min_start_ratio = Some(report.min_start_ratio.map_or(r, |v: f64| v.min(r)));
        }
    }
    report
}

/// Per-step moment increments of an independent rounding of `trace`:
/// returns the largest scaled excess of `δ_e + Δ_e` over `x_e f_e`.
pub fn balance_increment_excess(instance: &Instance, trace: &FractionalTrace) -> f64 {
    let mut worst: f64 = f64::NEG_INFINITY;
    for (job, s) in instance.jobs().iter().zip(&trace.steps) {
        for (o, opt) in job.options.iter().enumerate() {
            let (w, x, l) = (opt.weight(), s.x[o], s.pre_loads[o]);
            let small = (l + x * w).powi(2) - l * l;
            let big = x * w * w + 2.0 * l * x * w;
            let xf = x * s.potentials[o];
            let scale = 1.0 + xf.abs();
            worst = worst.max((small + big - xf) / scale);
        }
    }
    worst
}

/// `(Σ_j y_j, Σ_e E[L_e]², Σ_e E[L_e²])` for the Balance fitting under
/// independent rounding.
pub fn balance_moments(instance: &Instance, trace: &FractionalTrace, dual: &DualState) -> (f64, f64, f64) {
    let sum_y: f64 = dual.y.iter().sum();
    let first: f64 = trace.loads.iter().map(|l| l * l).sum();
    let mut var = 0.0;
    for (job, s) in instance.jobs().iter().zip(&trace.steps) {
        for (opt, &x) in job.options.iter().zip(&s.x) {
            let w = opt.weight();
            var += w * w * x * (1.0 - x);
        }
    }
    (sum_y, first, first + var)
}

// ------------------------------------------------------------- constants

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NamedCheck {
    pub name: String,
    pub value: f64,
    /// `≥ 0` means the check holds.
    pub slack: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegionCheck {
    pub name: String,
    pub max: f64,
    pub argmax: (f64, f64),
    pub points: usize,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstantsReport {
    pub constants: ConstantsBundle,
    pub grid_step: f64,
    pub inequalities: Vec<NamedCheck>,
    pub boundary_points: Vec<NamedCheck>,
    pub regions: Vec<RegionCheck>,
    pub passed: bool,
}

impl ConstantsReport {
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        for c in self.inequalities.iter().chain(&self.boundary_points) {
            if !c.passed {
                out.push(format!("{} (slack {:e})", c.name, c.slack));
            }
        }
        for r in &self.regions {
            if !r.passed {
                out.push(format!("region {} (max {:e} at x={}, q={})", r.name, r.max, r.argmax.0, r.argmax.1));
            }
        }
        out
    }
}

/// Tolerance for a region or boundary value to count as nonpositive.
pub const REGION_TOL: f64 = 1e-12;

/// Slack of the feasibility condition when `α = q`, normalized by `w²`.
pub fn g1(k: &ConstantsBundle, phi: f64, x: f64, q: f64) -> f64 {
    k.gamma - 1.0 + 0.5 * phi * phi * x - phi * x * q + (phi + 2.0 * k.gamma / (k.beta + k.eps)) * q - 0.5 * q * q
}

/// Slack of the feasibility condition when `α = √2`, normalized by `w²`.
pub fn g2(k: &ConstantsBundle, phi: f64, x: f64, q: f64) -> f64 {
    k.gamma + (0.5 * phi * phi - SQRT_2 * phi) * x + (2.0 * k.gamma / (k.beta + k.eps) + phi - SQRT_2) * q
}

/// Maximizer in `q` of `g1`.
pub fn q_hat(k: &ConstantsBundle, x: f64, phi: f64) -> f64 {
    phi * (1.0 - x) + 2.0 * k.gamma / (k.beta + k.eps)
}

fn ineq(name: &str, lhs: f64, rhs: f64) -> NamedCheck {
    NamedCheck {
        name: name.to_string(),
        value: lhs,
        slack: rhs - lhs,
        passed: lhs <= rhs,
    }
}

fn point(name: String, value: f64) -> NamedCheck {
    NamedCheck {
        name,
        value,
        slack: -value,
        passed: value <= REGION_TOL,
    }
}

/// Checks the four inequalities between the constants, the finite
/// boundary points that bound `g1`, `g2` on their regions, and sweeps the
/// regions on a grid of resolution `grid_step`.
pub fn check_constants(k: &ConstantsBundle, grid_step: f64) -> ConstantsReport {
    let beta = k.beta;
    let hard = beta;
    let easy = k.beta + k.delta;
    let r2 = SQRT_2;
    let inequalities = vec![
        ineq(
            "bonus_vs_correlation",
            k.lambda + 0.5 * k.lambda * k.lambda,
            k.gamma / (k.b * k.b) * (1.0 - correlation_factor(k.theta, k.theta)) * (1.0 - 2.0 * k.theta) * (1.0 - k.theta),
        ),
        ineq("bonus_vs_growth", k.kappa() * (k.kappa() - 1.0) * k.eps_tilde, k.lambda * beta),
        ineq(
            "easy_share",
            (beta + k.eps_tilde) / (beta + k.delta) + k.eps_tilde / (k.tau * k.a),
            1.0,
        ),
        ineq("margin_transfer", beta + k.eps, (1.0 - k.omega()) * (beta + k.eps_tilde)),
    ];

    let mut pts = Vec::new();
    for &(x, q) in &[(0.0, r2), (k.theta, r2), (k.theta, k.b), (0.0, k.b)] {
        pts.push(point(format!("g2 hard at ({x}, {q})"), g2(k, hard, x, q)));
    }
    for &(x, q) in &[(0.0, k.b), (k.theta, r2), (1.0, r2)] {
        pts.push(point(format!("g2 easy at ({x}, {q})"), g2(k, easy, x, q)));
    }
    let q_coef = 2.0 * k.gamma / (k.beta + k.eps) + easy - r2;
    for x in [0.0, 1.0] {
        // g2 is affine in q; its limit is -inf iff the slope is negative
        let v = if q_coef < 0.0 {
            f64::NEG_INFINITY
        } else if q_coef == 0.0 {
            g2(k, easy, x, 0.0)
        } else {
            f64::INFINITY
        };
        pts.push(point(format!("g2 easy as q -> inf at x = {x}"), v));
    }
    for &(x, q) in &[
        (0.0, k.a),
        (0.0, r2),
        (k.theta, k.a),
        (k.theta, r2),
        (0.0, q_hat(k, 0.0, hard)),
        (k.theta, q_hat(k, k.theta, hard)),
    ] {
        pts.push(point(format!("g1 hard at ({x}, {q})"), g1(k, hard, x, q)));
    }
    for &(x, q) in &[(0.0, 0.0), (0.0, k.a), (k.theta, r2), (1.0, 0.0), (1.0, r2), (1.0, q_hat(k, 1.0, easy))] {
        pts.push(point(format!("g1 easy at ({x}, {q})"), g1(k, easy, x, q)));
    }
    let qh = q_hat(k, 0.0, easy);
    pts.push(NamedCheck {
        name: "g1 easy critical point at x = 0 outside its region".to_string(),
        value: qh,
        slack: qh - k.a,
        passed: qh > k.a,
    });

    let q_cap = k.b.max(r2) + 2.0;
    let regions = vec![
        sweep("R1", grid_step, &[(0.0, k.theta, k.a, r2)], |x, q| g1(k, hard, x, q)),
        sweep("R2", grid_step, &[(0.0, k.theta, r2, k.b)], |x, q| g2(k, hard, x, q)),
        sweep("R3", grid_step, &[(0.0, k.theta, 0.0, k.a), (k.theta, 1.0, 0.0, r2)], |x, q| g1(k, easy, x, q)),
        sweep("R4", grid_step, &[(0.0, k.theta, k.b, q_cap), (k.theta, 1.0, r2, q_cap)], |x, q| g2(k, easy, x, q)),
    ];
    let passed = inequalities.iter().all(|c| c.passed) && pts.iter().all(|c| c.passed) && regions.iter().all(|r| r.passed);
    ConstantsReport {
        constants: *k,
        grid_step,
        inequalities,
        boundary_points: pts,
        regions,
        passed,
    }
}

fn axis(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).ceil().max(1.0) as usize;
    (0..=n).map(|i| if i == n { hi } else { lo + i as f64 * step }).collect()
}

fn sweep(name: &str, step: f64, rects: &[(f64, f64, f64, f64)], g: impl Fn(f64, f64) -> f64 + Sync) -> RegionCheck {
    let mut best = (f64::NEG_INFINITY, (0.0, 0.0));
    let mut points = 0;
    for &(x0, x1, q0, q1) in rects {
        let xs = axis(x0, x1, step);
        let qs = axis(q0, q1, step);
        points += xs.len() * qs.len();
        let local = xs
            .par_iter()
            .map(|&x| {
                let mut b = (f64::NEG_INFINITY, (x, 0.0));
                for &q in &qs {
                    let v = g(x, q);
                    if v > b.0 {
                        b = (v, (x, q));
                    }
                }
                b
            })
            .reduce(
                || (f64::NEG_INFINITY, (0.0, 0.0)),
                |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a },
            );
        if local.0 > best.0 {
            best = local;
        }
    }
    RegionCheck {
        name: name.to_string(),
        max: best.0,
        argmax: best.1,
        points,
        passed: best.0 <= REGION_TOL,
    }
}

// --------------------------------------------------- objective guarantee

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GroupLemmaCheck {
    pub machine: MachineId,
    pub group: usize,
    pub start_nu: f64,
    /// `2γ Σ_{j∈G} w_ij (E[L^{(j−1)}] x_ij − E[L^{(j−1)} X_ij])`.
    pub lhs: Interval,
    /// `(λ²/2 + λ) ν^{(s)}²`.
    pub rhs: f64,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GuaranteeReport {
    pub objective: f64,
    pub gamma: f64,
    /// `Σ_i E[L_i²]` of independent rounding of the same fractional solution.
    pub independent: f64,
    /// `Σ_i E[L_i²]`, estimated as `independent + E[D]`; see
    /// [`check_objective_guarantee`].
    pub second_moment: Interval,
    /// Plain sample mean of `Σ_i L_i²`, for reference.
    pub plain_second_moment: Interval,
    pub verdict: Verdict,
    pub groups: Vec<GroupLemmaCheck>,
    pub trials: usize,
}

impl GuaranteeReport {
    /// Worst verdict over the main inequality and every group.
    pub fn overall(&self) -> Verdict {
        let all = std::iter::once(self.verdict).chain(self.groups.iter().map(|g| g.verdict));
        let mut out = Verdict::Holds;
        for v in all {
            match v {
                Verdict::Violated => return Verdict::Violated,
                Verdict::Inconclusive => out = Verdict::Inconclusive,
                Verdict::Holds => {}
            }
        }
        out
    }
}

#[derive(Clone)]
struct Accumulators {
    correction: Summary,
    plain: Summary,
    groups: Vec<Summary>,
}

fn shifted(ci: Interval, by: f64, scale: f64) -> Interval {
    Interval {
        mean: by + scale * ci.mean,
        lower: by + scale * ci.lower,
        upper: by + scale * ci.upper,
        ..ci
    }
}

/// Jobs linked through shared hard groups. The rounding draws fresh
/// randomness for everything else, so jobs in different components are
/// independent.
fn coupled_components(jobs: usize, grouping: &GroupingState) -> Vec<usize> {
    fn find(parent: &mut [usize], mut a: usize) -> usize {
        while parent[a] != a {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        a
    }
    let mut parent: Vec<usize> = (0..jobs).collect();
    for (_, g) in grouping.hard_groups() {
        for w in g.members.windows(2) {
            let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
            parent[a.max(b)] = a.min(b);
        }
    }
    (0..jobs).map(|j| find(&mut parent, j)).collect()
}

/// Per `(job, option)`: an accumulator slot keyed by `(machine, component)`
/// and the expected load already in that slot, or `None` for jobs alone in
/// their component.
type CoupledSlots = Vec<Vec<Option<(usize, f64)>>>;

fn coupled_slots(instance: &Instance, run: &CorrelatedRun) -> (CoupledSlots, usize) {
    let comp = coupled_components(instance.len(), &run.grouping);
    let mut size = vec![0usize; instance.len()];
    for &c in &comp {
        size[c] += 1;
    }
    let mut index = std::collections::HashMap::new();
    let mut expected: Vec<f64> = Vec::new();
    let mut out = Vec::with_capacity(instance.len());
    for (j, (job, row)) in instance.jobs().iter().zip(run.fractional.rows()).enumerate() {
        if size[comp[j]] < 2 {
            out.push(vec![None; job.options.len()]);
            continue;
        }
        let mut slots = Vec::with_capacity(job.options.len());
        for (opt, &x) in job.options.iter().zip(row) {
            let next = index.len();
            let k = *index.entry((opt.machine_id(), comp[j])).or_insert(next);
            if k == expected.len() {
                expected.push(0.0);
            }
            slots.push(Some((k, expected[k])));
            expected[k] += opt.weight() * x;
        }
        out.push(slots);
    }
    (out, index.len())
}

/// Checks `objective ≥ γ Σ_i E[L_i²]` with a 99% interval on the right-hand
/// side, and the per-group covariance bound for every full hard group.
///
/// Marginals are exact, so `Σ_i E[L_i²]` equals the independent-rounding
/// value plus `E[D]` with
/// `D = Σ_{i,j} 2 w_ij (X_ij − x_ij)(L_i^{(j−1)} − E[L_i^{(j−1)}])`.
/// Only pairs inside one component of jobs linked by hard groups have
/// nonzero covariance, so `D` is sampled with `L` restricted to the job's
/// own component. Without such pairs the second moment is exact.
pub fn check_objective_guarantee(instance: &Instance, run: &CorrelatedRun, trials: usize, seed: u64) -> Result<GuaranteeReport> {
    let k = &run.constants;
    let objective = run.dual.objective();
    let independent = crate::algorithms::independent_expected_cost(instance, &run.fractional);
    let full: Vec<(usize, &crate::algorithms::Group)> = run.grouping.hard_groups().filter(|(_, g)| g.full).collect();
    let mut slot_of = vec![usize::MAX; run.grouping.groups().len()];
    for (slot, (id, _)) in full.iter().enumerate() {
        slot_of[*id] = slot;
    }
    let groups_of: Vec<Vec<usize>> = (0..instance.len())
        .map(|j| {
            (0..instance.jobs()[j].options.len())
                .map(|o| slot_of[run.grouping.group_of(j, o)])
                .collect()
        })
        .collect();
    let (coupled, keys) = coupled_slots(instance, run);
    let sampled = keys > 0;
    let trials = if sampled { trials } else { 0 };
    let plan = run.plan()?;
    let chunks = trials.div_ceil(CHUNK);
    let empty = Accumulators {
        correction: Summary::new(),
        plain: Summary::new(),
        groups: vec![Summary::new(); full.len()],
    };
    let per_chunk: std::result::Result<Vec<Accumulators>, crate::error::RoundingError> = rng::with_pool(|| {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut rounder = OnlineRounder::new(&plan);
                let mut loads = vec![0.0; instance.machines()];
                let mut local = vec![0.0; keys];
                let mut group = vec![0.0; full.len()];
                let mut out = empty.clone();
                for t in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                    let mut r = rng::trial_stream(seed, t);
                    rounder.reset();
                    loads.fill(0.0);
                    local.fill(0.0);
                    group.fill(0.0);
                    let mut d = 0.0;
                    for (j, job) in instance.jobs().iter().enumerate() {
                        let choice = rounder.step(&mut r)?;
                        let row = run.fractional.row(j);
                        for (o, slot) in coupled[j].iter().enumerate() {
                            let Some((key, expected)) = *slot else { continue };
                            let hit = if o == choice { 1.0 } else { 0.0 };
                            let dev = job.options[o].weight() * (hit - row[o]) * (local[key] - expected);
                            d += 2.0 * dev;
                            if groups_of[j][o] != usize::MAX {
                                group[groups_of[j][o]] -= dev;
                            }
                        }
                        let opt = &job.options[choice];
                        loads[opt.machine_id()] += opt.weight();
                        if let Some((key, _)) = coupled[j][choice] {
                            local[key] += opt.weight();
                        }
                    }
                    out.correction.push(d);
                    out.plain.push(loads.iter().map(|l| l * l).sum());
                    for (g, v) in out.groups.iter_mut().zip(&group) {
                        g.push(*v);
                    }
                }
                Ok(out)
            })
            .collect()
    });
    let mut total = empty;
    for acc in &per_chunk? {
        total.correction.merge(&acc.correction);
        total.plain.merge(&acc.plain);
        for (a, b) in total.groups.iter_mut().zip(&acc.groups) {
            a.merge(b);
        }
    }
    let second_moment = if sampled {
        shifted(total.correction.ci99(), independent, 1.0)
    } else {
        Interval::exact(independent)
    };
    let plain_second_moment = if sampled { total.plain.ci99() } else { Interval::exact(independent) };
    let tol = FEASIBILITY_TOL * (1.0 + objective.abs());
    let verdict = Verdict::at_least_scaled(objective, k.gamma, &second_moment, tol);
    let coef = 0.5 * k.lambda * k.lambda + k.lambda;
    let group_checks = full
        .iter()
        .zip(&total.groups)
        .map(|((id, g), s)| {
            let lhs = shifted(s.ci99(), 0.0, 2.0 * k.gamma);
            let rhs = coef * g.start_nu * g.start_nu;
            GroupLemmaCheck {
                machine: g.machine,
                group: *id,
                start_nu: g.start_nu,
                verdict: Verdict::scaled_at_least(1.0, &lhs, rhs, FEASIBILITY_TOL * (1.0 + rhs)),
                lhs,
                rhs,
            }
        })
        .collect();
    Ok(GuaranteeReport {
        objective,
        gamma: k.gamma,
        independent,
        second_moment,
        plain_second_moment,
        verdict,
        groups: group_checks,
        trials,
    })
}

/// Whether the grouping contains any hard group.
pub fn has_hard_groups(grouping: &GroupingState) -> bool {
    grouping.groups().iter().any(|g| g.kind == GroupKind::Hard)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::{run_frac_balance, run_greedy};

    #[test]
    fn greedy_constants_give_the_ratio() {
        let (a, b) = greedy_constants();
        assert!((a * a - SQRT_2).abs() < 1e-15);
        assert!(((a * b - b * b) / 2.0 - greedy_ratio_factor()).abs() < 1e-15);
    }

    #[test]
    fn greedy_single_unit_job() {
        let inst = Instance::standard(1, vec![vec![(0, 1.0)]]).unwrap();
        let (_, t) = run_greedy(&inst).unwrap();
        let d = fit_greedy(&inst, &t);
        assert!((d.objective() - 0.171_572_875_253_809_9).abs() < 1e-15);
        assert!(check_feasibility(&inst, &d, FEASIBILITY_TOL).feasible());
    }

    #[test]
    fn empty_instance_has_zero_objective() {
        let inst = Instance::standard(2, vec![]).unwrap();
        let (_, t) = run_greedy(&inst).unwrap();
        assert_eq!(fit_greedy(&inst, &t).objective(), 0.0);
        let (_, t) = run_frac_balance(&inst).unwrap();
        assert_eq!(fit_frac_balance(&inst, &t).objective(), 0.0);
        assert_eq!(fit_balance(&inst, &t).objective(), 0.0);
    }

    #[test]
    fn frac_balance_two_machines() {
        let inst = Instance::standard(2, vec![vec![(0, 1.0), (1, 1.0)]]).unwrap();
        let (_, t) = run_frac_balance(&inst).unwrap();
        assert!((fit_frac_balance(&inst, &t).objective() - 0.125).abs() < 1e-15);
    }

    #[test]
    fn corrupted_y_is_reported() {
        let inst = Instance::standard(2, vec![vec![(0, 1.0), (1, 3.0)], vec![(1, 1.0)]]).unwrap();
        let (_, t) = run_greedy(&inst).unwrap();
        let mut d = fit_greedy(&inst, &t);
        assert!(check_feasibility(&inst, &d, FEASIBILITY_TOL).feasible());
        d.y[1] += 1.0;
        let r = check_feasibility(&inst, &d, FEASIBILITY_TOL);
        assert_eq!(r.violations.len(), 1);
        assert_eq!((r.violations[0].job, r.violations[0].option), (1, 0));
    }

    #[test]
    fn dual_update_examples() {
        let k = ConstantsBundle::paper();
        let mut d = DualState::new(1);
        d.nu[0] = 1.0;
        let upd = update_dual(
            &mut d,
            &k,
            &DualInput {
                machines: &[0],
                weights: &[1.0],
                x: &[1.0],
                potentials: &[0.0],
                phi: &[k.phi_easy()],
                closing_start_nu: &[None],
            },
        );
        assert!((upd.nu_hat[0] - 1.658_475_532_033_676).abs() < 1e-12);
        // closing a group with ν^{(s)} = 1 and ν̂ = 1.5
        let mut d = DualState::new(1);
        d.nu[0] = 1.5 - 0.1 * k.beta;
        let upd = update_dual(
            &mut d,
            &k,
            &DualInput {
                machines: &[0],
                weights: &[1.0],
                x: &[0.1],
                potentials: &[0.0],
                phi: &[k.beta],
                closing_start_nu: &[Some(1.0)],
            },
        );
        assert!((upd.nu_hat[0] - 1.5).abs() < 1e-15);
        assert!((upd.bonus[0] - 0.018_353_333_333_333_3).abs() < 1e-12);
    }

    #[test]
    fn zero_weight_alpha_is_flagged() {
        let k = ConstantsBundle::paper();
        let mut d = DualState::new(2);
        let upd = update_dual(
            &mut d,
            &k,
            &DualInput {
                machines: &[0, 1],
                weights: &[0.0, 1.0],
                x: &[1.0, 0.0],
                potentials: &[0.0, 0.2],
                phi: &[k.phi_easy(), k.phi_easy()],
                closing_start_nu: &[None, None],
            },
        );
        assert_eq!(upd.alpha[0], SQRT_2);
        assert_eq!(d.zero_weight, vec![(0, 0)]);
    }

    #[test]
    fn tight_point_without_slack_constants() {
        let k = ConstantsBundle {
            delta: 0.0,
            eps: 0.0,
            gamma: 0.2,
            ..ConstantsBundle::paper()
        };
        let q = 2.0 * (0.4f64).sqrt();
        assert!(g1(&k, k.beta, 0.0, q).abs() < 1e-9);
        assert!((q_hat(&k, 0.0, k.beta) - q).abs() < 1e-15);
    }

    #[test]
    fn paper_constants_pass() {
        let r = check_constants(&ConstantsBundle::paper(), DEFAULT_GRID_STEP);
        assert!(r.passed, "{:?}", r.failures());
    }

    #[test]
    fn raised_gamma_fails() {
        let r = check_constants(&ConstantsBundle::paper().with_gamma(1.0 / 4.5), DEFAULT_GRID_STEP);
        assert!(!r.passed);
        assert!(r.regions.iter().any(|g| !g.passed));
        assert!(ConstantsBundle::paper().with_gamma(1.0 / 4.5).validated().is_err());
    }
}
