use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trajsim::*;

/// Linear-scan reference for the event set.
#[derive(Default)]
struct NaiveSet {
    now: f64,
    seq: u64,
    events: Vec<(f64, u8, u64, u32)>,
}

impl NaiveSet {
    fn schedule(&mut self, delay: f64, p: u32, prio: EventPriority) {
        self.events.retain(|e| e.3 != p);
        self.events.push((self.now + delay, prio.rank(), self.seq, p));
        self.seq += 1;
    }

    fn unschedule(&mut self, p: u32) -> bool {
        let n = self.events.len();
        self.events.retain(|e| e.3 != p);
        n != self.events.len()
    }

    fn pop(&mut self) -> Option<(f64, u32)> {
        let mut best: Option<usize> = None;
        for (i, e) in self.events.iter().enumerate() {
            let better = match best {
                None => true,
                Some(b) => {
                    let o = self.events[b];
                    e.0 < o.0 || (e.0 == o.0 && (e.1 > o.1 || (e.1 == o.1 && e.2 < o.2)))
                }
            };
            if better {
                best = Some(i);
            }
        }
        let e = self.events.swap_remove(best?);
        self.now = e.0;
        Some((e.0, e.3))
    }
}

#[test]
fn event_set_agrees_with_linear_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut fast: EventSet<u32> = EventSet::new();
    let mut slow = NaiveSet::default();
    for _ in 0..100_000 {
        let p = rng.random_range(0..200u32);
        match rng.random_range(0..10) {
            0..=4 => {
                // coarse grid so that ties are frequent
                let d = rng.random_range(0..8) as f64 * 0.5;
                let prio = EventPriority::ALL[rng.random_range(0..7)];
                fast.schedule(d, p, prio).unwrap();
                slow.schedule(d, p, prio);
            }
            5 => assert_eq!(fast.unschedule(p), slow.unschedule(p)),
            _ => {
                let got = fast.pop().map(|(k, p)| (k.at, p));
                assert_eq!(got, slow.pop());
            }
        }
        assert_eq!(fast.len(), slow.events.len());
        assert_eq!(fast.now(), slow.now);
    }
}

fn mm1(seed: u64, lambda: f64, mu: f64, cap: u64) -> Environment {
    let mut env = Environment::with_seed(seed);
    env.add_resource(ResourceSpec::new("server").capacity(cap)).unwrap();
    let t = Trajectory::new()
        .seize("server", 1)
        .timeout(Param::dynamic(move |ctx| ctx.exponential(mu)))
        .release("server", 1);
    env.add_generator(GeneratorSpec::new("c", t, exponential(lambda))).unwrap();
    env
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn release_then_seize_at_same_instant(holds in prop::collection::vec(1u32..50, 1..8)) {
        // each arrival shows up exactly when the previous one releases; with
        // no queue, any ordering mistake turns into a rejection
        let mut env = Environment::new();
        env.add_resource(ResourceSpec::new("r").queue_size(0)).unwrap();
        let mut t = 0.0;
        for (i, h) in holds.iter().enumerate() {
            let h = *h as f64;
            let traj = Trajectory::new().seize("r", 1).timeout(h).release("r", 1);
            env.add_generator(GeneratorSpec::new(format!("a{i}_"), traj, at([t]))).unwrap();
            t += h;
        }
        env.run(f64::INFINITY).unwrap();
        let rows = get_mon_arrivals(&[&env], false);
        prop_assert_eq!(rows.len(), holds.len());
        prop_assert!(rows.iter().all(|r| r.finished));
        prop_assert_eq!(env.now(), t);
    }

    #[test]
    fn batched_gaps_create_same_times(m in 1usize..60, n in 1usize..200, c in 0.01f64..3.0) {
        let run = |d: Distribution| {
            let mut env = Environment::new();
            env.add_generator(GeneratorSpec::new("g", Trajectory::new(), d)).unwrap();
            env.run(n as f64 * c + c / 2.0).unwrap();
            get_mon_arrivals(&[&env], false).into_iter().map(|r| r.start_time).collect::<Vec<_>>()
        };
        let one = run(constant(c));
        let many = run(constant(c).batched(m));
        prop_assert_eq!(one, many);
    }

    #[test]
    fn monitor_invariants_hold(seed in 0u64..1000, cap in 1u64..4, lambda in 0.5f64..3.0) {
        let mut env = mm1(seed, lambda, 2.0, cap);
        env.run(60.0).unwrap();
        for r in get_mon_resources(&[&env]) {
            prop_assert_eq!(r.system, r.server + r.queue);
            prop_assert!(r.server <= cap);
        }
        for a in get_mon_arrivals(&[&env], false) {
            prop_assert!(a.end_time >= a.start_time);
            prop_assert!(a.activity_time <= a.end_time - a.start_time + 1e-9);
            prop_assert!(a.activity_time >= 0.0);
        }
    }

    #[test]
    fn seeded_runs_replay(seed in any::<u64>()) {
        let go = || {
            let mut env = mm1(seed, 1.0, 1.5, 1);
            env.run(40.0).unwrap();
            (get_mon_arrivals(&[&env], true), get_mon_resources(&[&env]))
        };
        prop_assert_eq!(go(), go());
    }

    #[test]
    fn step_and_run_agree(seed in 0u64..500) {
        let mut a = mm1(seed, 1.2, 1.5, 1);
        a.run(30.0).unwrap();
        let mut b = mm1(seed, 1.2, 1.5, 1);
        while b.next_time().is_some_and(|t| t < 30.0) {
            b.step().unwrap();
        }
        prop_assert_eq!(get_mon_arrivals(&[&a], true), get_mon_arrivals(&[&b], true));
    }
}
