use serde::Serialize;

use crate::model::{FractionalAssignment, Instance, MachineId};

pub type GroupId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupKind {
    Easy,
    Hard,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Group {
    pub machine: MachineId,
    pub kind: GroupKind,
    /// Member jobs in arrival order.
    pub members: Vec<usize>,
    /// `Σ_{j∈G} x_ij`.
    pub mass: f64,
    /// `ν(i)` just before the first member arrived.
    pub start_nu: f64,
    /// `E[L_i]` just before the first member arrived.
    pub start_load: f64,
    pub full: bool,
}

/// Where one option of an arriving job was placed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Placement {
    pub group: GroupId,
    /// The job filled its hard group past `1 − θ`.
    pub closes: bool,
}

/// Per-machine partition of the arrived jobs into singleton easy groups and
/// sequential hard groups.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GroupingState {
    theta: f64,
    groups: Vec<Group>,
    open_hard: Vec<Option<GroupId>>,
    membership: Vec<Vec<GroupId>>,
    last_jobs: Vec<Vec<usize>>,
}

impl GroupingState {
    pub fn new(machines: usize, theta: f64) -> Self {
        GroupingState {
            theta,
            groups: Vec::new(),
            open_hard: vec![None; machines],
            membership: Vec::new(),
            last_jobs: vec![Vec::new(); machines],
        }
    }

    /// Places option `(job, machine)` with fraction `x`. Jobs must be placed
    /// in arrival order, all options of a job before [`GroupingState::end_job`].
    pub fn place(&mut self, job: usize, machine: MachineId, x: f64, hard: bool, nu_before: f64, load_before: f64) -> Placement {
        if !hard {
            let id = self.groups.len();
            self.groups.push(Group {
                machine,
                kind: GroupKind::Easy,
                members: vec![job],
                mass: x,
                start_nu: nu_before,
                start_load: load_before,
                full: false,
            });
            self.record(job, id);
            return Placement { group: id, closes: false };
        }
        let id = match self.open_hard[machine] {
            Some(id) => id,
            None => {
                let id = self.groups.len();
                self.groups.push(Group {
                    machine,
                    kind: GroupKind::Hard,
                    members: Vec::new(),
                    mass: 0.0,
                    start_nu: nu_before,
                    start_load: load_before,
                    full: false,
                });
                self.open_hard[machine] = Some(id);
                id
            }
        };
        let g = &mut self.groups[id];
        g.members.push(job);
        g.mass += x;
        let closes = g.mass > 1.0 - self.theta;
        if closes {
            g.full = true;
            self.open_hard[machine] = None;
            self.last_jobs[machine].push(job);
        }
        self.record(job, id);
        Placement { group: id, closes }
    }

    fn record(&mut self, job: usize, id: GroupId) {
        while self.membership.len() <= job {
            self.membership.push(Vec::new());
        }
        self.membership[job].push(id);
    }

    /// Builds a grouping from explicit hard groups; every other
    /// `(job, option)` becomes a singleton easy group. Options are assumed
    /// to be single machines.
    pub fn from_hard_groups(instance: &Instance, x: &FractionalAssignment, theta: f64, hard: &[(MachineId, Vec<usize>)]) -> Result<Self, String> {
        let mut state = GroupingState::new(instance.machines(), theta);
        let mut hard_of = std::collections::HashMap::new();
        for (h, (m, members)) in hard.iter().enumerate() {
            for &j in members {
                if hard_of.insert((j, *m), h).is_some() {
                    return Err(format!("job {j} listed twice on machine {m}"));
                }
            }
        }
        let mut ids: Vec<Option<GroupId>> = vec![None; hard.len()];
        for (j, job) in instance.jobs().iter().enumerate() {
            for (o, opt) in job.options.iter().enumerate() {
                let m = opt.machine_id();
                let xv = x.row(j)[o];
                let id = match hard_of.get(&(j, m)) {
                    None => {
                        let id = state.groups.len();
                        state.groups.push(Group {
                            machine: m,
                            kind: GroupKind::Easy,
                            members: vec![j],
                            mass: xv,
                            start_nu: 0.0,
                            start_load: 0.0,
                            full: false,
                        });
                        id
                    }
                    Some(&h) => {
                        let id = *ids[h].get_or_insert_with(|| {
                            state.groups.push(Group {
                                machine: m,
                                kind: GroupKind::Hard,
                                members: Vec::new(),
                                mass: 0.0,
                                start_nu: 0.0,
                                start_load: 0.0,
                                full: false,
                            });
                            state.groups.len() - 1
                        });
                        let g = &mut state.groups[id];
                        g.members.push(j);
                        g.mass += xv;
                        id
                    }
                };
                state.record(j, id);
            }
        }
        for (h, id) in ids.iter().enumerate() {
            let Some(id) = *id else {
                return Err(format!("hard group {h} references no feasible option"));
            };
            let g = &mut state.groups[id];
            if g.mass > 1.0 + 1e-12 {
                return Err(format!("group mass exceeds 1 (group {h}, mass {})", g.mass));
            }
            g.full = g.mass > 1.0 - theta;
            if g.full {
                let last = *g.members.last().expect("nonempty");
                state.last_jobs[g.machine].push(last);
            }
        }
        Ok(state)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    pub fn group(&self, id: GroupId) -> &Group {
        &self.groups[id]
    }

    /// Group of option `option` of job `job`.
    pub fn group_of(&self, job: usize, option: usize) -> GroupId {
        self.membership[job][option]
    }

    pub fn jobs(&self) -> usize {
        self.membership.len()
    }

    /// The last jobs of full hard groups on `machine`.
    pub fn last_jobs(&self, machine: MachineId) -> &[usize] {
        &self.last_jobs[machine]
    }

    pub fn open_group(&self, machine: MachineId) -> Option<GroupId> {
        self.open_hard[machine]
    }

    pub fn hard_groups(&self) -> impl Iterator<Item = (GroupId, &Group)> {
        self.groups.iter().enumerate().filter(|(_, g)| g.kind == GroupKind::Hard)
    }

    /// Mass bound, fullness of all but the open group, and at most one open
    /// hard group per machine.
    pub fn check_invariants(&self) -> Result<(), String> {
        let mut open_seen = vec![false; self.open_hard.len()];
        for (id, g) in self.groups.iter().enumerate() {
            if g.mass > 1.0 + 1e-12 {
                return Err(format!("group mass exceeds 1 (group {id}, mass {})", g.mass));
            }
            if g.kind == GroupKind::Hard && !g.full {
                if open_seen[g.machine] {
                    return Err(format!("machine {} has two open hard groups", g.machine));
                }
                open_seen[g.machine] = true;
            }
            if g.kind == GroupKind::Easy && g.members.len() != 1 {
                return Err(format!("easy group {id} is not a singleton"));
            }
        }
        Ok(())
    }
}
