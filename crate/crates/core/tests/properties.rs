mod common;

use common::*;
use proptest::prelude::*;
use qaixi::agent::{
    entangled_distribution, qaixi_policy, root_q_values, run_episode, value, AgentState,
    JointState, PlanningConfig, Policy,
};
use qaixi::channel::{apply_channel, choi_state, instrument_distribution, KrausChannel, UnitaryAction, Validate};
use qaixi::env::{env_step, EnvironmentFile, Mode};
use qaixi::induction::mixture_init;
use qaixi::linalg::{
    eigendecompose_hermitian, partial_trace, relative_entropy, trace_distance, DensityOperator,
};
use qaixi::random::{haar_unitary, random_channel, random_density, random_hermitian, random_instrument};
use qaixi::reference::ClassicalAixi;
use qaixi::Error;

const CUTOFF: f64 = 1e-12;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tensor_traces_multiply_and_partial_trace_recovers_factors(
        seed in any::<u64>(), da in 1usize..4, db in 1usize..4, sa in 0.1f64..1.0, sb in 0.1f64..1.0,
    ) {
        let mut r = rng(seed);
        let a = semi_density(da, sa, &mut r);
        let b = semi_density(db, sb, &mut r);
        let t = a.tensor(&b);
        prop_assert_eq!(t.dims(), &[da, db][..]);
        prop_assert!((t.trace() - sa * sb).abs() < 1e-12);
        let ra = partial_trace(&t, &[0]).unwrap();
        let rb = partial_trace(&t, &[1]).unwrap();
        prop_assert!(max_abs_diff(ra.matrix(), &a.matrix().scale(sb)) < 1e-10);
        prop_assert!(max_abs_diff(rb.matrix(), &b.matrix().scale(sa)) < 1e-10);
    }

    #[test]
    fn eigendecomposition_reconstructs(seed in any::<u64>(), d in 1usize..9) {
        let m = random_hermitian(d, &mut rng(seed));
        let e = eigendecompose_hermitian(&m).unwrap();
        prop_assert!(max_abs_diff(&e.map(|x| x), &m) < 1e-8);
    }

    #[test]
    fn trace_distance_is_a_bounded_metric(seed in any::<u64>(), d in 1usize..6) {
        let mut r = rng(seed);
        let (x, y, z) = (random_density(d, &mut r), random_density(d, &mut r), random_density(d, &mut r));
        let xy = trace_distance(&x, &y).unwrap();
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&xy));
        prop_assert!((xy - trace_distance(&y, &x).unwrap()).abs() < 1e-12);
        prop_assert!(trace_distance(&x, &x).unwrap() < 1e-10);
        let via = trace_distance(&x, &z).unwrap() + trace_distance(&z, &y).unwrap();
        prop_assert!(xy <= via + 1e-10);
    }

    #[test]
    fn relative_entropy_klein_and_pinsker(seed in any::<u64>(), d in 1usize..6) {
        let mut r = rng(seed);
        let (x, y) = (random_density(d, &mut r), random_density(d, &mut r));
        let dxy = relative_entropy(&x, &y).unwrap();
        prop_assert!(dxy.is_finite());
        prop_assert!(dxy >= -1e-9);
        prop_assert!(relative_entropy(&x, &x).unwrap().abs() < 1e-8);
        prop_assert!(trace_distance(&x, &y).unwrap() <= (0.5 * dxy.max(0.0)).sqrt() + 1e-8);
    }

    #[test]
    fn data_processing(seed in any::<u64>(), d in 1usize..5, ancilla in 1usize..4) {
        let mut r = rng(seed);
        let (x, y) = (random_density(d, &mut r), random_density(d, &mut r));
        let ch = random_channel(d, ancilla, &mut r);
        let before = relative_entropy(&x, &y).unwrap();
        let after = relative_entropy(&apply_channel(&ch, &x).unwrap(), &apply_channel(&ch, &y).unwrap()).unwrap();
        prop_assert!(after <= before + 1e-8, "{} > {}", after, before);
    }

    #[test]
    fn channels_preserve_positivity_and_trace(
        seed in any::<u64>(), d in 1usize..5, ancilla in 1usize..5, s in 0.05f64..1.0,
    ) {
        let mut r = rng(seed);
        let ch = random_channel(d, ancilla, &mut r);
        prop_assert!(ch.validate_cptp().is_valid());
        let rho = semi_density(d, s, &mut r);
        let out = apply_channel(&ch, &rho).unwrap();
        prop_assert!((out.trace() - s).abs() < 1e-10);
        prop_assert!(out.eigenvalues()[0] >= -1e-10);
    }

    #[test]
    fn instrument_distribution_matches_kraus_sums(
        seed in any::<u64>(), d in 1usize..5, outcomes in 1usize..5, per in 1usize..3, s in 0.05f64..1.0,
    ) {
        let mut r = rng(seed);
        let instr = random_instrument(d, outcomes, per, &mut r);
        prop_assert!(instr.validate().is_valid());
        let rho = semi_density(d, s, &mut r);
        let probs = instrument_distribution(&instr, &rho).unwrap();
        for (p, b) in probs.iter().zip(instr.branches()) {
            prop_assert!((p - branch_trace(b, &rho)).abs() < 1e-12);
        }
        prop_assert!((probs.iter().sum::<f64>() - s).abs() < 1e-9);
    }

    #[test]
    fn unitary_choi_state_is_pure(seed in any::<u64>(), d in 1usize..5) {
        let u = UnitaryAction::new(haar_unitary(d, &mut rng(seed))).unwrap();
        let choi = choi_state(&KrausChannel::from_unitary(&u)).unwrap();
        prop_assert!((choi.trace() - 1.0).abs() < 1e-10);
        prop_assert!((choi.purity() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn product_states_match_the_separable_loop(seed in any::<u64>(), da in 1usize..4, de in 1usize..4) {
        let mut r = rng(seed);
        let class = random_quantum_class(1, de, 2, 3, &mut r);
        let rho_e = random_density(de, &mut r);
        let joint = JointState::product(&random_density(da, &mut r), &rho_e);
        for spec in class[0].actions() {
            let ent = entangled_distribution(&joint, spec).unwrap();
            let sep = spec.instrument_ref().unwrap().distribution(&rho_e).unwrap();
            for (x, y) in ent.iter().zip(&sep) {
                prop_assert!((x - y).abs() < 1e-10);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// Weights stay normalized, and each one moves by `p_Q(k)/ξ(k)`.
    #[test]
    fn mixture_updates_are_bayes_rule(seed in any::<u64>(), n in 1usize..5, d in 1usize..4) {
        let mut r = rng(seed);
        let mut mix = mixture_init(random_quantum_class(n, d, 2, 2, &mut r)).unwrap();
        for t in 0..12 {
            let action = format!("a{}", t % 2);
            let pred = mix.predictive_distribution(&action).unwrap();
            prop_assert!((pred.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            let k = qaixi::env::sample_index(&pred, &mut r);
            let branch = mix.branch_probabilities(&action).unwrap();
            let next = mix.update(&action, Some(k)).unwrap();
            prop_assert!((next.weights().iter().sum::<f64>() - 1.0).abs() < 1e-9);
            for q in 0..n {
                let p = if mix.weights()[q] > 0.0 { branch[q][k] } else { 0.0 };
                let expected = if p <= CUTOFF { 0.0 } else { mix.weights()[q] * p / pred[k] };
                prop_assert!((next.weights()[q] - expected).abs() < 1e-9);
                if p < pred[k] {
                    prop_assert!(next.weights()[q] <= mix.weights()[q] + 1e-12);
                }
            }
            mix = next;
        }
    }

    /// `ξ(h) ≥ w_Q Pr_Q(h)` on every history of length ≤ 4.
    #[test]
    fn mixture_dominates_each_hypothesis(seed in any::<u64>(), n in 1usize..4) {
        let mut r = rng(seed);
        let class = random_quantum_class(n, 2, 2, 2, &mut r);
        let mix0 = mixture_init(class.clone()).unwrap();
        for len in 1..=4 {
            for h in all_histories(2, 2, len) {
                let mut mix = mix0.clone();
                let mut xi = 1.0;
                let mut possible = true;
                for &(a, o) in &h {
                    let action = format!("a{a}");
                    let p = mix.predictive_distribution(&action).unwrap()[o];
                    xi *= p;
                    match mix.update(&action, Some(o)) {
                        Ok(next) => mix = next,
                        Err(Error::ImpossibleObservation { .. }) => {
                            possible = false;
                            break;
                        }
                        Err(e) => return Err(TestCaseError::fail(e.to_string())),
                    }
                }
                for (q, env) in class.iter().enumerate() {
                    let mut state = env.initial_state().clone();
                    let mut pr = 1.0;
                    for &(a, o) in &h {
                        let (p, next) = env.follow_branch(&state, &format!("a{a}"), o).unwrap();
                        pr *= p;
                        match next {
                            Some(s) => state = s,
                            None => {
                                pr = 0.0;
                                break;
                            }
                        }
                    }
                    let bound = mix0.prior()[q] * pr;
                    if possible {
                        prop_assert!(xi >= bound * (1.0 - 1e-9) - 1e-15, "{:?}: {} < {}", h, xi, bound);
                    } else {
                        prop_assert!(bound <= 1e-10);
                    }
                }
            }
        }
    }

    /// Diagonal classes reproduce a classical Bayes mixture and classical
    /// expectimax.
    #[test]
    fn commuting_classes_match_classical_bayes(
        seed in any::<u64>(), n in 1usize..4, horizon in 1usize..3, gamma in 0.0f64..0.95,
    ) {
        let mut r = rng(seed);
        let specs = random_classical_specs(n, 2, 2, &mut r);
        let reference = ClassicalAixi::new(specs.clone(), horizon, gamma).unwrap();
        let mix0 = mixture_init(embed(&specs)).unwrap();
        let cfg = PlanningConfig::new(horizon, gamma).unwrap();
        for len in 0..=3 {
            for h in all_histories(2, 2, len) {
                let mut mix = mix0.clone();
                for &(a, o) in &h {
                    mix = mix.update(&format!("a{a}"), Some(o)).unwrap();
                }
                for (w, v) in mix.weights().iter().zip(reference.posterior(&h)) {
                    prop_assert!((w - v).abs() < 1e-10);
                }
                for a in 0..2 {
                    let q = mix.predictive_distribution(&format!("a{a}")).unwrap();
                    for (x, y) in q.iter().zip(reference.predictive(&h, a)) {
                        prop_assert!((x - y).abs() < 1e-10);
                    }
                }
                let q: Vec<f64> = root_q_values(&mix, &cfg).unwrap().into_iter().map(|(_, v)| v).collect();
                for (x, y) in q.iter().zip(reference.q_values(&h)) {
                    prop_assert!((x - y).abs() < 1e-9);
                }
                prop_assert_eq!(qaixi_policy(&mix, &cfg).unwrap(), reference.action_id(&h));
            }
        }
    }

    /// `V(h, d) = max_a Σ_k ξ(k) [r(k) + γ V(hak, d − 1)]`.
    #[test]
    fn value_satisfies_bellman(seed in any::<u64>(), n in 1usize..4, depth in 1usize..4, gamma in 0.0f64..0.99) {
        let mut r = rng(seed);
        let class = random_quantum_class(n, 2, 2, 2, &mut r);
        let rewards: Vec<Vec<f64>> = class[0].actions().iter()
            .map(|a| (0..2).map(|k| a.reward(Some(k))).collect()).collect();
        let mix = mixture_init(class).unwrap();
        let cfg = PlanningConfig::new(depth, gamma).unwrap();
        let mut best = f64::NEG_INFINITY;
        for a in 0..2 {
            let action = format!("a{a}");
            let pred = mix.predictive_distribution(&action).unwrap();
            let mut q = 0.0;
            for k in 0..2 {
                if pred[k] <= CUTOFF {
                    continue;
                }
                let tail = value(&mix.update(&action, Some(k)).unwrap(), &cfg, depth - 1).unwrap();
                q += pred[k] * (rewards[a][k] + gamma * tail);
            }
            best = best.max(q);
        }
        prop_assert!((value(&mix, &cfg, depth).unwrap() - best).abs() < 1e-10);
    }

    /// Shifting every reward by `c` shifts values by `c(1 − γ^m)/(1 − γ)`
    /// and leaves the chosen action unchanged.
    #[test]
    fn reward_shift_keeps_the_policy(
        seed in any::<u64>(), n in 1usize..4, m in 1usize..4, gamma in 0.0f64..0.95, c in 0.0f64..0.5,
    ) {
        let mut r = rng(seed);
        let rewards = random_rewards(2, 2, 0.5, &mut r);
        let class: Vec<_> = (0..n)
            .map(|i| random_quantum_env(&format!("q{i}"), i as u32, 2, Mode::Persistent, &rewards, &mut r))
            .collect();
        let shifted: Vec<_> = class
            .iter()
            .map(|env| {
                let mut f = EnvironmentFile::from_model(env);
                for a in &mut f.actions {
                    for x in a.rewards.as_mut().unwrap() {
                        *x += c;
                    }
                }
                f.to_model().unwrap()
            })
            .collect();
        let cfg = PlanningConfig::new(m, gamma).unwrap();
        let (base, moved) = (mixture_init(class).unwrap(), mixture_init(shifted).unwrap());
        let offset = c * (1.0 - gamma.powi(m as i32)) / (1.0 - gamma);
        let v0 = value(&base, &cfg, m).unwrap();
        prop_assert!((value(&moved, &cfg, m).unwrap() - v0 - offset).abs() < 1e-9);
        prop_assert_eq!(qaixi_policy(&base, &cfg).unwrap(), qaixi_policy(&moved, &cfg).unwrap());
    }

    #[test]
    fn env_step_is_deterministic_given_the_seed(seed in any::<u64>(), d in 1usize..4) {
        let mut r = rng(seed);
        let env = random_quantum_class(1, d, 2, 3, &mut r).remove(0);
        let run = |s: u64| {
            let mut g = rng(s);
            let mut state = env.initial_state().clone();
            let mut trace = Vec::new();
            for t in 0..8 {
                let (p, next) = env_step(&env, state, &format!("a{}", t % 2), &mut g).unwrap();
                trace.push((p, next.matrix().clone()));
                state = next;
            }
            trace
        };
        prop_assert_eq!(run(seed), run(seed));
    }

    #[test]
    fn episodes_are_reproducible(seed in any::<u64>()) {
        let mut r = rng(seed);
        let class = random_quantum_class(3, 2, 2, 2, &mut r);
        let truth = class[1].clone();
        let cfg = PlanningConfig::new(2, 0.8).unwrap();
        let go = || {
            let agent = AgentState::new(mixture_init(class.clone()).unwrap());
            let e = run_episode(&truth, agent, &cfg, Policy::Qaixi, 6, seed).unwrap();
            serde_json::to_string(&e).unwrap()
        };
        prop_assert_eq!(go(), go());
    }
}

#[test]
fn semi_density_inputs_are_accepted() {
    let rho = semi_density(3, 0.4, &mut rng(7));
    assert!((rho.trace() - 0.4).abs() < 1e-12);
    assert!(DensityOperator::new(rho.matrix().scale(3.0)).is_err());
}
