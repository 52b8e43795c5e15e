//! Water-filling: raise a common level until one unit of the job is placed.
//!
//! Every feasible machine carries a nondecreasing potential `f(t)` over the
//! fraction `t ∈ [0, 1]` it receives. The solver returns the distribution in
//! which every supported machine sits at the common level `μ` and every
//! unsupported machine starts at or above it.
//!
//! Potentials are piecewise linear: a single line, or two lines with an
//! upward jump at `t = θ`. The inverse `μ ↦ x(μ)` of such a potential is
//! itself piecewise linear (flat across the jump), so the total `Σ x_i(μ)` is
//! piecewise linear and the level is found exactly by sweeping its
//! breakpoints. A machine whose level lands inside its jump gap is *pinned*
//! at `θ`; its potential is reported as `μ`.

use crate::error::WaterfillError;

/// Slack allowed when probing potentials for monotonicity.
pub const MONOTONE_TOL: f64 = 1e-12;
/// Tolerance of the post-hoc equilibrium check.
pub const EQUILIBRIUM_TOL: f64 = 1e-9;
/// Poured mass this close to 1 counts as complete.
const MASS_TOL: f64 = 1e-12;

/// `t ↦ base + slope·t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Linear {
    pub base: f64,
    pub slope: f64,
}

impl Linear {
    pub fn new(base: f64, slope: f64) -> Self {
        Linear { base, slope }
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        self.base + self.slope * t
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Potential {
    Linear(Linear),
    /// `below` on `[0, at]`, `above` on `(at, 1]`.
    Jump { at: f64, below: Linear, above: Linear },
}

impl Potential {
    pub fn linear(base: f64, slope: f64) -> Self {
        Potential::Linear(Linear::new(base, slope))
    }

    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Potential::Linear(l) => l.eval(t),
            Potential::Jump { at, below, above } => {
                if t <= at {
                    below.eval(t)
                } else {
                    above.eval(t)
                }
            }
        }
    }

    /// `f(0⁺)`.
    pub fn start(&self) -> f64 {
        self.eval(0.0)
    }

    fn validate(&self, index: usize) -> Result<(), WaterfillError> {
        let bad = |reason| Err(WaterfillError::InvalidPotential { index, reason });
        let lines: &[Linear] = match self {
            Potential::Linear(l) => std::slice::from_ref(l),
            Potential::Jump { at, below, above } => {
                if !(at.is_finite() && *at > 0.0 && *at < 1.0) {
                    return bad("jump point outside (0, 1)");
                }
                if above.eval(*at) < below.eval(*at) - MONOTONE_TOL * (1.0 + below.eval(*at).abs()) {
                    return bad("downward jump");
                }
                &[]
            }
        };
        let pieces: Vec<Linear> = match self {
            Potential::Jump { below, above, .. } => vec![*below, *above],
            _ => lines.to_vec(),
        };
        for p in pieces {
            if !(p.base.is_finite() && p.slope.is_finite()) {
                return bad("non-finite coefficients");
            }
            let (lo, hi) = (p.eval(0.0), p.eval(1.0));
            if hi < lo - MONOTONE_TOL * (1.0 + lo.abs()) {
                return bad("decreasing");
            }
        }
        Ok(())
    }

    /// Pieces of the inverse as `(level_from, level_to, x_from, x_to)`.
    /// A zero-slope piece yields `level_from == level_to`.
    fn inverse_pieces(&self, out: &mut Vec<(f64, f64, f64, f64)>) {
        match *self {
            Potential::Linear(l) => out.push((l.eval(0.0), l.eval(1.0), 0.0, 1.0)),
            Potential::Jump { at, below, above } => {
                out.push((below.eval(0.0), below.eval(at), 0.0, at));
                out.push((above.eval(at), above.eval(1.0), at, 1.0));
            }
        }
    }

    /// Fraction held at level `mu` ignoring zero-slope pieces that sit
    /// exactly at `mu` (those are resolved by the solver).
    fn held_at(&self, mu: f64) -> f64 {
        fn ramp(l: &Linear, lo: f64, hi: f64, mu: f64) -> f64 {
            if mu <= l.eval(lo) {
                lo
            } else if mu >= l.eval(hi) {
                hi
            } else {
                ((mu - l.base) / l.slope).clamp(lo, hi)
            }
        }
        match *self {
            Potential::Linear(l) => {
                if l.slope <= 0.0 {
                    if mu > l.base {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    ramp(&l, 0.0, 1.0, mu)
                }
            }
            Potential::Jump { at, below, above } => {
                if mu <= below.eval(at) {
                    if below.slope <= 0.0 {
                        0.0
                    } else {
                        ramp(&below, 0.0, at, mu)
                    }
                } else if mu <= above.eval(at) {
                    at
                } else if above.slope <= 0.0 {
                    1.0
                } else {
                    ramp(&above, at, 1.0, mu)
                }
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PotentialSpec {
    potentials: Vec<Potential>,
}

impl PotentialSpec {
    pub fn new(potentials: Vec<Potential>) -> Self {
        PotentialSpec { potentials }
    }

    pub fn potentials(&self) -> &[Potential] {
        &self.potentials
    }

    pub fn len(&self) -> usize {
        self.potentials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.potentials.is_empty()
    }

    /// `Σ_i x_i(μ)`, counting zero-slope pieces at `μ` as filled.
    pub fn total_at_level(&self, mu: f64) -> f64 {
        let mut scratch = Vec::new();
        let mut total = 0.0;
        for p in &self.potentials {
            scratch.clear();
            p.inverse_pieces(&mut scratch);
            for &(lo, hi, x0, x1) in &scratch {
                total += if mu >= hi {
                    x1 - x0
                } else if mu <= lo {
                    0.0
                } else {
                    (x1 - x0) * (mu - lo) / (hi - lo)
                };
            }
        }
        total
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquilibriumResult {
    pub x: Vec<f64>,
    /// The water level `μ`.
    pub level: f64,
    /// `f_i(x_i)`; for pinned machines this is `level`.
    pub potentials: Vec<f64>,
    /// Machines held at their jump point with the level inside the gap.
    pub pinned: Vec<bool>,
}

impl EquilibriumResult {
    /// `Σ_i x_i f_i(x_i)`.
    pub fn averaged_potential(&self) -> f64 {
        self.x.iter().zip(&self.potentials).map(|(x, f)| x * f).sum()
    }

    /// Checks the support condition and the averaged inequality.
    pub fn verify(&self, tol: f64) -> Result<(), String> {
        let sum: f64 = self.x.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(format!("fractions sum to {sum}"));
        }
        let min_f = self.potentials.iter().copied().fold(f64::INFINITY, f64::min);
        let scale = 1.0 + self.level.abs();
        for (i, (&x, &f)) in self.x.iter().zip(&self.potentials).enumerate() {
            if x > 0.0 && f > min_f + tol * scale {
                return Err(format!("machine {i} supported at {f} above minimum {min_f}"));
            }
        }
        let avg = self.averaged_potential();
        if avg > min_f + tol * scale {
            return Err(format!("averaged potential {avg} exceeds {min_f}"));
        }
        Ok(())
    }
}

/// Distributes one unit across the machines of `spec` at equilibrium.
///
/// Zero-slope (constant) potentials absorb any amount at their level; when
/// the level stops on such a step the remainder is split equally among the
/// constant machines at that level.
pub fn solve_equilibrium(spec: &PotentialSpec) -> Result<EquilibriumResult, WaterfillError> {
    if spec.is_empty() {
        return Err(WaterfillError::Empty);
    }
    for (i, p) in spec.potentials.iter().enumerate() {
        p.validate(i)?;
    }
    let k = spec.len();
    let first = spec.potentials[0];
    if spec.potentials.iter().all(|p| *p == first) {
        let share = 1.0 / k as f64;
        let f = first.eval(share);
        return Ok(EquilibriumResult {
            x: vec![share; k],
            level: f,
            potentials: vec![f; k],
            pinned: vec![false; k],
        });
    }

    // Events: (level, slope change, step mass).
    let mut pieces = Vec::with_capacity(2 * k);
    let mut events: Vec<(f64, f64, f64)> = Vec::with_capacity(4 * k);
    for p in &spec.potentials {
        pieces.clear();
        p.inverse_pieces(&mut pieces);
        for &(lo, hi, x0, x1) in &pieces {
            let dx = x1 - x0;
            if dx <= 0.0 {
                continue;
            }
            if hi > lo {
                let rate = dx / (hi - lo);
                events.push((lo, rate, 0.0));
                events.push((hi, -rate, 0.0));
            } else {
                events.push((lo, 0.0, dx));
            }
        }
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut level = events[0].0;
    let mut total = 0.0;
    let mut rate = 0.0;
    let mut step_level = None;
    let mut idx = 0;
    while idx < events.len() {
        let at = events[idx].0;
        if rate > 0.0 {
            let reach = total + rate * (at - level);
            if reach >= 1.0 - MASS_TOL {
                level += (1.0 - total) / rate;
                if level > at {
                    level = at;
                }
                break;
            }
            total = reach;
        }
        level = at;
        let mut steps = 0.0;
        while idx < events.len() && events[idx].0 == at {
            rate += events[idx].1;
            steps += events[idx].2;
            idx += 1;
        }
        if steps > 0.0 && total + steps >= 1.0 - MASS_TOL {
            step_level = Some(at);
            break;
        }
        total += steps;
        if rate < 0.0 && rate > -1e-9 {
            rate = 0.0;
        }
    }

    let mut x: Vec<f64> = spec.potentials.iter().map(|p| p.held_at(level)).collect();
    if let Some(at) = step_level {
        // Constant machines (or constant pieces) sitting exactly at the level.
        let flat: Vec<usize> = spec
            .potentials
            .iter()
            .enumerate()
            .filter(|(_, p)| has_step_at(p, at))
            .map(|(i, _)| i)
            .collect();
        let placed: f64 = x.iter().sum();
        let share = ((1.0 - placed) / flat.len() as f64).max(0.0);
        for &i in &flat {
            let cap = step_capacity(&spec.potentials[i]);
            x[i] += share.min(cap);
        }
    }
    // Rescale only machines not held inside a jump gap, so pinned ones
    // stay exactly at their jump point.
    let held: Vec<bool> = spec
        .potentials
        .iter()
        .zip(&x)
        .map(|(p, &xi)| match *p {
            Potential::Jump { at, below, above } => xi == at && level > below.eval(at) && level < above.eval(at),
            _ => false,
        })
        .collect();
    let sum: f64 = x.iter().sum();
    let fixed: f64 = x.iter().zip(&held).filter(|(_, &h)| h).map(|(v, _)| v).sum();
    if sum != 1.0 && sum - fixed > 0.0 {
        let scale = (1.0 - fixed) / (sum - fixed);
        for (v, &h) in x.iter_mut().zip(&held) {
            if !h {
                *v *= scale;
            }
        }
    }

    let mut potentials = Vec::with_capacity(k);
    let mut pinned = Vec::with_capacity(k);
    for (p, &xi) in spec.potentials.iter().zip(&x) {
        let mut is_pinned = false;
        let f = match *p {
            Potential::Jump { at, below, above } if xi == at || (xi - at).abs() <= 1e-15 => {
                if level > below.eval(at) && level < above.eval(at) {
                    is_pinned = true;
                    level
                } else {
                    p.eval(xi)
                }
            }
            _ => {
                if xi > 0.0 {
                    p.eval(xi)
                } else {
                    p.start()
                }
            }
        };
        potentials.push(f);
        pinned.push(is_pinned);
    }
    Ok(EquilibriumResult {
        x,
        level,
        potentials,
        pinned,
    })
}

fn has_step_at(p: &Potential, level: f64) -> bool {
    match *p {
        Potential::Linear(l) => l.slope <= 0.0 && l.base == level,
        Potential::Jump { at, below, above } => {
            (below.slope <= 0.0 && below.eval(0.0) == level) || (above.slope <= 0.0 && above.eval(at) == level)
        }
    }
}

fn step_capacity(p: &Potential) -> f64 {
    match *p {
        Potential::Linear(_) => 1.0,
        Potential::Jump { at, below, .. } => {
            if below.slope <= 0.0 {
                at
            } else {
                1.0 - at
            }
        }
    }
}
