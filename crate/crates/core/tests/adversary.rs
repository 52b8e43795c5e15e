use l2b::adversary::*;
use l2b::algorithms::{run_frac_balance, run_greedy};
use l2b::model::*;
use l2b::rng::substream;
use l2b::stats::Summary;
use proptest::prelude::*;
use rand::Rng;

#[test]
fn baselines_regression_at_65536() {
    let b = analytic_baselines(1 << 16);
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * b.abs();
    assert!(close(b.opt_upper, 792_353.498_002_825_2));
    assert!(close(b.frac_cost_lower, 1_862_789.992_011_300_8));
    assert!(close(b.variance_addend, 619_015.098_997_859_9));
    assert!(close(b.indep_cost_lower, b.frac_cost_lower + b.variance_addend));
    assert!(close(b.frac_cost_lower / b.opt_upper, 2.350_958_248_694_017_7));
}

#[test]
fn baselines_at_two_are_finite() {
    let b = analytic_baselines(2);
    assert!(b.opt_upper.is_finite() && b.frac_cost_lower.is_finite() && b.indep_cost_lower.is_finite());
}

#[test]
fn baseline_ratios_approach_four_and_five() {
    let mut prev = (0.0, 0.0);
    for k in (8..=62).step_by(2) {
        let n = 1usize << k;
        let b = analytic_baselines(n);
        let r4 = b.frac_cost_lower / b.opt_upper;
        let r5 = b.indep_cost_lower / b.opt_upper;
        assert!(r4 > prev.0 && r5 > prev.1 && r4 < 4.0 && r5 < 5.0);
        prev = (r4, r5);
        // gaps shrink like 1/(log n + 1) with these constants
        let lg = (n as f64).ln() + 1.0;
        let s = 16.0 / (n as f64).sqrt();
        assert!(((4.0 - r4) * lg - (20.0 - s)).abs() < 1e-6 * lg);
        let c5 = 21.0 + std::f64::consts::PI.powi(2) / 6.0 - s;
        assert!(((5.0 - r5) * lg - c5).abs() < 1e-6 * lg);
    }
}

#[test]
fn opt_cost_within_upper_bound() {
    for n in [2usize, 3, 10, 100, 1000, 1 << 14] {
        let harmonic: f64 = (1..=n).map(|k| 1.0 / k as f64).sum();
        let opt = lb_opt_cost(n);
        assert!((opt - n as f64 * harmonic).abs() <= 1e-9 * opt);
        assert!(opt <= analytic_baselines(n).opt_upper);
    }
}

#[test]
fn identity_assignment_is_optimal_on_small_instances() {
    for seed in 0..5 {
        let inst = gen_lb_instance(&AdversaryConfig::fractional(6, seed)).unwrap();
        let (opt, _) = bruteforce_opt(&inst, 1_000_000).unwrap();
        assert!((opt - lb_opt_cost(6)).abs() < 1e-9);
    }
}

#[test]
fn instance_shape() {
    let cfg = AdversaryConfig::fractional(2, 8);
    let inst = gen_lb_instance(&cfg).unwrap();
    let sigma = permutation(2, 8);
    assert_eq!(inst.jobs()[0].options.len(), 2);
    assert_eq!(inst.jobs()[1].options.len(), 1);
    assert_eq!(inst.jobs()[1].options[0].machine_id(), sigma[1]);
    assert!((inst.jobs()[1].options[0].weight() - std::f64::consts::SQRT_2).abs() < 1e-15);
    let s = gen_smith_lb_instance(&AdversaryConfig::smith(5, 1, 8)).unwrap();
    for (a, b) in s.jobs().iter().zip(gen_lb_instance(&AdversaryConfig::fractional(5, 8)).unwrap().jobs()) {
        let opts: Vec<_> = b.options.iter().map(|o| (o.machine_id(), o.weight())).collect();
        assert_eq!(a.options, opts);
    }
    assert!(AdversaryConfig::fractional(1, 0).validate().is_err());
}

#[test]
fn frac_balance_marginals_are_uniform_over_alive_machines() {
    let n = 64;
    for seed in 0..20 {
        let x = fracbalance_marginals(n, seed).unwrap();
        for (j, row) in x.iter().enumerate() {
            for &v in row {
                assert!((v - 1.0 / (n - j) as f64).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn streamed_sweeps_match_the_instance() {
    let n = 200;
    let inst = gen_lb_instance(&AdversaryConfig::fractional(n, 4)).unwrap();
    let (x, _) = run_frac_balance(&inst).unwrap();
    let frac = cost_quadratic(&x, &inst).unwrap();
    assert!((sweep_fracbalance(n, 4).unwrap() - frac).abs() <= 1e-9 * frac);
    let (a, _) = run_greedy(&inst).unwrap();
    assert_eq!(sweep_greedy(n, 4), cost_quadratic(&a, &inst).unwrap());
    let analytic = l2b::algorithms::independent_expected_cost(
        &inst,
        &l2b::algorithms::balance_fractional(&inst).unwrap().0,
    );
    let s = sweep_balance(n, 4, 4000).unwrap();
    let ci = s.ci99();
    assert!(ci.lower <= analytic && analytic <= ci.upper, "{analytic} vs {ci:?}");
}

#[test]
fn expected_load_grows_like_twice_the_weight() {
    let n = 1024;
    let mut avg = vec![0.0; n];
    let seeds = 4;
    for seed in 0..seeds {
        for (a, l) in avg.iter_mut().zip(fracbalance_position_loads(n, seed).unwrap()) {
            *a += l / seeds as f64;
        }
    }
    for (i, &l) in avg.iter().enumerate() {
        let f = lb_weight(n, i);
        let slack = 2.0 * f / n as f64 * f * f;
        assert!(l >= 2.0 * f - 2.0 - slack, "position {i}: {l} < {}", 2.0 * f - 2.0);
    }
}

#[test]
fn frac_balance_ratio_stays_below_four() {
    let mut prev = 0.0;
    for n in [64usize, 256, 1024] {
        let r = sweep_fracbalance(n, 1).unwrap() / analytic_baselines(n).opt_upper;
        assert!(r > prev && r < 4.0);
        prev = r;
    }
}

#[test]
fn correlated_sweep_is_capped() {
    assert!(sweep_correlated(CORRELATED_SWEEP_CAP + 1, 0, 1).is_err());
    let s: Summary = sweep_correlated(32, 0, 50).unwrap();
    assert_eq!(s.count(), 50);
    assert!(s.mean() >= lb_opt_cost(32));
}

fn random_rows(r: &mut impl Rng, len: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..len).map(|_| r.gen_range(0.0..1.0f64).powi(3)).collect();
    v[r.gen_range(0..len)] += 1e-3;
    let s: f64 = v.iter().sum();
    v.iter().map(|a| a / s).collect()
}

#[test]
fn smith_sandwich_for_copies() {
    let n = 12;
    for t in [1usize, 2, 5, 10] {
        for seed in 0..25u64 {
            let lb = gen_lb_instance(&AdversaryConfig::fractional(n, seed)).unwrap();
            let sr = gen_smith_lb_instance(&AdversaryConfig::smith(n, t, seed)).unwrap();
            let mut r = substream(seed, "sandwich");
            let mut y = FractionalAssignment::new();
            let mut x = FractionalAssignment::new();
            for job in lb.jobs() {
                let len = job.options.len();
                let copies: Vec<Vec<f64>> = (0..t).map(|_| random_rows(&mut r, len)).collect();
                let mean: Vec<f64> = (0..len).map(|o| copies.iter().map(|c| c[o]).sum::<f64>() / t as f64).collect();
                for c in copies {
                    y.push(c).unwrap();
                }
                x.push(mean).unwrap();
            }
            let half = 0.5 * cost_quadratic(&x, &lb).unwrap();
            let c = cost_smith(&y, &sr).unwrap();
            let extra: f64 = (0..n).map(|j| lb_weight(n, j).powi(2)).sum::<f64>() / t as f64;
            let tol = 1e-12 * (half + extra);
            assert!(half - tol <= c && c <= half + extra + tol, "t={t} seed={seed}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn smith_identity_on_uniform_ratios(seed in any::<u64>(), m in 1usize..=5, n in 1usize..=30) {
        let mut r = substream(seed, "smith");
        let jobs: Vec<SmithJob> = (0..n)
            .map(|_| {
                let w = r.gen_range(0.1..3.0);
                let k = r.gen_range(1..=m);
                let mut ms: Vec<usize> = (0..m).collect();
                ms.truncate(k);
                SmithJob { weight: w, options: ms.iter().map(|&i| (i, w)).collect() }
            })
            .collect();
        let inst = SmithInstance::new(m, jobs).unwrap();
        let x = FractionalAssignment::from_rows(inst.jobs().iter().map(|j| random_rows(&mut r, j.options.len())).collect()).unwrap();
        let lhs = cost_smith(&x, &inst).unwrap();
        let rhs = smith_uniform_identity_rhs(&x, &inst).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
    }

    #[test]
    fn permutation_is_a_bijection(n in 1usize..500, seed in any::<u64>()) {
        let mut p = permutation(n, seed);
        prop_assert_eq!(p.clone(), permutation(n, seed));
        p.sort_unstable();
        prop_assert_eq!(p, (0..n).collect::<Vec<_>>());
    }
}
