use l2b::algorithms::{correlation_factor, GroupingState};
use l2b::model::{FractionalAssignment, Instance};
use l2b::rng::{substream, trial_stream};
use l2b::rounding::*;
use proptest::prelude::*;

fn plan(m: usize, rows: &[&[(usize, f64)]], hard: &[(usize, Vec<usize>)]) -> RoundingPlan {
    let inst = Instance::standard(m, rows.iter().map(|r| r.iter().map(|&(i, _)| (i, 1.0)).collect()).collect()).unwrap();
    let x = FractionalAssignment::from_rows(rows.iter().map(|r| r.iter().map(|&(_, v)| v).collect()).collect()).unwrap();
    let g = GroupingState::from_hard_groups(&inst, &x, 0.0535, hard).unwrap();
    RoundingPlan::new(&x, &g).unwrap()
}

fn within(hits: usize, trials: usize, p: f64, sigmas: f64) -> bool {
    let est = hits as f64 / trials as f64;
    (est - p).abs() <= sigmas * (p * (1.0 - p) / trials as f64).sqrt() + 1e-12
}

#[test]
fn modified_poisson_empirical_pmf() {
    let p = 0.3;
    let draws = 1_000_000;
    let s = ModifiedPoissonSampler::new(p).unwrap();
    let mut r = substream(1, "pmf");
    let mut counts = vec![0usize; 12];
    for _ in 0..draws {
        let k = s.sample(&mut r) as usize;
        counts[k.min(11)] += 1;
    }
    for (k, &c) in counts.iter().enumerate().take(11) {
        assert!(within(c, draws, modified_poisson_pmf(p, k as u32), 4.0), "bucket {k}");
    }
}

#[test]
fn pmf_at_the_ends() {
    assert!((modified_poisson_pmf(1.0, 0) - 0.367_879_441_171_442_3).abs() < 1e-15);
    assert!((modified_poisson_pmf(0.25, 1) - (-0.25f64).exp()).abs() < 1e-16);
}

#[test]
fn certain_job_terminates() {
    let plan = plan(1, &[&[(0, 1.0)]], &[]);
    for t in 0..2000 {
        let out = round_offline(&plan, &mut trial_stream(5, t)).unwrap();
        assert_eq!(out.jobs[0].option, 0);
        assert!(out.jobs[0].round <= 10_000);
    }
}

#[test]
fn halves_have_half_marginals() {
    let plan = plan(2, &[&[(0, 0.5), (1, 0.5)]], &[]);
    let trials = 100_000;
    let mut on = 0;
    let mut off = 0;
    for t in 0..trials {
        on += round_online(&plan, &mut trial_stream(1, t)).unwrap().jobs[0].option;
        off += round_offline(&plan, &mut trial_stream(2, t)).unwrap().jobs[0].option;
    }
    assert!(within(on, trials, 0.5, 3.0));
    assert!(within(off, trials, 0.5, 3.0));
}

#[test]
fn grouped_pair_is_negatively_correlated() {
    let plan = plan(3, &[&[(0, 0.4), (1, 0.6)], &[(0, 0.4), (2, 0.6)]], &[(0, vec![0, 1])]);
    let trials = 100_000;
    let mut both = 0;
    let mut first = 0;
    for t in 0..trials {
        let a = round_online(&plan, &mut trial_stream(9, t)).unwrap().assignment();
        if a.choice(0) == 0 {
            first += 1;
            if a.choice(1) == 0 {
                both += 1;
            }
        }
    }
    let bound = correlation_factor(0.4, 0.4) * 0.16;
    let est = both as f64 / trials as f64;
    let sd = (est * (1.0 - est) / trials as f64).sqrt();
    assert!(est <= bound + 3.0 * sd, "{est} > {bound}");
    assert!(within(first, trials, 0.4, 3.0));
}

#[test]
fn group_recommends_each_member_with_its_fraction() {
    let plan = plan(
        4,
        &[&[(0, 0.3), (1, 0.7)], &[(0, 0.5), (2, 0.5)], &[(0, 0.2), (3, 0.8)]],
        &[(0, vec![0, 1, 2])],
    );
    let trials = 100_000;
    let mut hits = [0usize; 3];
    for t in 0..trials {
        let out = round_online(&plan, &mut trial_stream(4, t)).unwrap();
        for (j, job) in out.jobs.iter().enumerate() {
            if job.first_round.contains(&0) {
                hits[j] += 1;
            }
        }
    }
    for (h, x) in hits.iter().zip([0.3, 0.5, 0.2]) {
        assert!(within(*h, trials, x, 3.0), "{h} vs {x}");
    }
}

#[test]
fn group_overflow_is_rejected() {
    let inst = Instance::standard(2, vec![vec![(0, 1.0), (1, 1.0)]; 2]).unwrap();
    let x = FractionalAssignment::from_rows(vec![vec![0.6, 0.4], vec![0.6, 0.4]]).unwrap();
    assert!(GroupingState::from_hard_groups(&inst, &x, 0.0535, &[(0, vec![0, 1])]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn only_supported_options_are_chosen(seed in any::<u64>(), split in 0.05..0.95f64) {
        let plan = plan(3, &[&[(0, split), (1, 1.0 - split), (2, 0.0)], &[(2, 1.0)]], &[]);
        for t in 0..50 {
            let out = round_online(&plan, &mut trial_stream(seed, t)).unwrap();
            prop_assert!(out.jobs[0].option < 2);
            prop_assert_eq!(out.jobs[1].option, 0);
        }
    }
}
