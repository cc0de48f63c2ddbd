use trajsim::*;

fn traced(env: &mut Environment, until: f64) -> Vec<String> {
    let trace = MemoryTrace::new();
    env.set_trace(trace.clone());
    env.run(until).unwrap();
    trace.lines()
}

fn arrivals(env: &Environment) -> Vec<ArrivalRow> {
    get_mon_arrivals(&[env], false)
}

fn row<'a>(rows: &'a [ArrivalRow], name: &str) -> &'a ArrivalRow {
    rows.iter().find(|r| r.name == name).unwrap()
}

fn job(res: &str, d: f64) -> Trajectory {
    Trajectory::new().seize(res, 1).timeout(d).release(res, 1)
}

#[test]
fn preempted_arrival_resumes_remaining_time() {
    for (restart, low_end) in [(false, 13.0), (true, 15.0)] {
        let mut env = Environment::new();
        env.add_resource(ResourceSpec::new("m").preemptive(true)).unwrap();
        env.add_generator(
            GeneratorSpec::new("low", job("m", 10.0), at([0.0]))
                .prioritization(Prioritization::new(0, 0, restart).unwrap()),
        )
        .unwrap();
        env.add_generator(
            GeneratorSpec::new("high", job("m", 3.0), at([2.0]))
                .prioritization(Prioritization::priority(1)),
        )
        .unwrap();
        env.run(f64::INFINITY).unwrap();
        let rows = arrivals(&env);
        assert_eq!(row(&rows, "high0").end_time, 5.0);
        assert_eq!(row(&rows, "low0").end_time, low_end, "restart={restart}");
        let low = row(&rows, "low0");
        assert!(low.activity_time <= low.end_time - low.start_time + 1e-12);
    }
}

#[test]
fn preemption_requires_priority_above_preemptible() {
    let mut env = Environment::new();
    env.add_resource(ResourceSpec::new("m").preemptive(true)).unwrap();
    env.add_generator(
        GeneratorSpec::new("low", job("m", 10.0), at([0.0]))
            .prioritization(Prioritization::new(0, 1, false).unwrap()),
    )
    .unwrap();
    env.add_generator(
        GeneratorSpec::new("high", job("m", 3.0), at([2.0]))
            .prioritization(Prioritization::priority(1)),
    )
    .unwrap();
    env.run(f64::INFINITY).unwrap();
    let rows = arrivals(&env);
    assert_eq!(row(&rows, "low0").end_time, 10.0);
    assert_eq!(row(&rows, "high0").end_time, 13.0);
}

#[test]
fn preempted_queue_served_before_main_queue() {
    let mut env = Environment::new();
    env.add_resource(ResourceSpec::new("m").preemptive(true)).unwrap();
    let t = |d| {
        Trajectory::new()
            .seize("m", 1)
            .timeout(d)
            .release("m", 1)
            .log("done")
    };
    env.add_generator(GeneratorSpec::new("a", t(10.0), at([0.0]))).unwrap();
    env.add_generator(GeneratorSpec::new("b", t(1.0), at([1.0]))).unwrap();
    env.add_generator(
        GeneratorSpec::new("vip", t(2.0), at([2.0])).prioritization(Prioritization::priority(5)),
    )
    .unwrap();
    let out = traced(&mut env, f64::INFINITY);
    assert_eq!(out, vec!["4: vip0: done", "12: a0: done", "13: b0: done"]);
}

#[test]
fn queue_orders_by_priority_then_fifo() {
    let mut env = Environment::new();
    env.add_resource(ResourceSpec::new("r")).unwrap();
    let t = Trajectory::new().seize("r", 1).log("in").timeout(1.0).release("r", 1);
    env.add_generator(GeneratorSpec::new("first", t.clone(), at([0.0]))).unwrap();
    env.add_generator(GeneratorSpec::new("lo", t.clone(), at([0.1, 0.2]))).unwrap();
    env.add_generator(
        GeneratorSpec::new("hi", t, at([0.3])).prioritization(Prioritization::priority(2)),
    )
    .unwrap();
    let out = traced(&mut env, f64::INFINITY);
    assert_eq!(out, vec!["0: first0: in", "1: hi0: in", "2: lo0: in", "3: lo1: in"]);
}

#[test]
fn capacity_growth_serves_queue_immediately() {
    let mut env = Environment::new();
    env.add_resource(ResourceSpec::new("r")).unwrap();
    let t = Trajectory::new().seize("r", 1).log("in").timeout(10.0).release("r", 1);
    env.add_generator(GeneratorSpec::new("a", t, at([0.0, 0.0, 0.0, 0.0]))).unwrap();
    env.schedule_change(1.0, "r", Some(Limit::Finite(2)), None).unwrap();
    let out = traced(&mut env, f64::INFINITY);
    assert_eq!(&out[..3], ["0: a0: in", "1: a1: in", "10: a2: in"]);
}

#[test]
fn queue_shrink_rejects_lowest_priority_newest() {
    let mut env = Environment::new();
    env.add_resource(ResourceSpec::new("r").queue_size(5).queue_size_strict(true))
        .unwrap();
    let t = Trajectory::new()
        .seize_with("r", 1, SeizeOptions::new().reject(Trajectory::new().log("dropped")).continue_(true, false))
        .timeout(10.0)
        .release("r", 1);
    env.add_generator(GeneratorSpec::new("hold", t.clone(), at([0.0]))).unwrap();
    env.add_generator(
        GeneratorSpec::new("p", t.clone(), at([1.0, 2.0])).prioritization(Prioritization::priority(1)),
    )
    .unwrap();
    env.add_generator(GeneratorSpec::new("q", t, at([3.0, 4.0]))).unwrap();
    env.schedule_change(5.0, "r", None, Some(Limit::Finite(2))).unwrap();
    let out = traced(&mut env, 6.0);
    assert_eq!(out, vec!["5: q1: dropped", "5: q0: dropped"]);
    assert_eq!(env.get_queue_count("r").unwrap(), 2);
}

#[test]
fn manager_runs_before_simultaneous_seize() {
    let mut env = Environment::new();
    env.add_resource(ResourceSpec::new("r").capacity(0).queue_size(0)).unwrap();
    let t = Trajectory::new()
        .seize_with("r", 1, SeizeOptions::new().reject(Trajectory::new().log("rejected")).continue_(true, false))
        .log("served")
        .release("r", 1);
    env.add_generator(GeneratorSpec::new("a", t, at([5.0]))).unwrap();
    env.schedule_change(5.0, "r", Some(Limit::Finite(1)), None).unwrap();
    assert_eq!(traced(&mut env, f64::INFINITY), vec!["5: a0: served"]);
}

#[test]
fn set_capacity_from_trajectory_is_manager_priority() {
    let mut env = Environment::new();
    env.add_resource(ResourceSpec::new("r").capacity(0).queue_size(0)).unwrap();
    let opener = Trajectory::new().timeout(5.0).set_capacity("r", 1);
    let user = Trajectory::new()
        .seize_with("r", 1, SeizeOptions::new().reject(Trajectory::new().log("rejected")).continue_(true, false))
        .log("served")
        .release("r", 1);
    env.add_generator(GeneratorSpec::new("u", user, at([5.0]))).unwrap();
    env.add_generator(GeneratorSpec::new("o", opener, at([0.0]))).unwrap();
    assert_eq!(traced(&mut env, f64::INFINITY), vec!["5: u0: served"]);
    assert_eq!(env.get_capacity("r").unwrap(), Limit::Finite(1));
}

#[test]
fn infinite_capacity_serves_everyone() {
    let mut env = Environment::new();
    env.add_resource(ResourceSpec::new("r").capacity(Limit::Infinite)).unwrap();
    env.add_generator(GeneratorSpec::new("a", job("r", 1.0), at(vec![0.0; 7]))).unwrap();
    env.run(0.5).unwrap();
    assert_eq!(env.get_server_count("r").unwrap(), 7);
    assert_eq!(env.get_queue_count("r").unwrap(), 0);
}

#[test]
fn rollercoaster_batch_seizes_one_unit() {
    let roller = Trajectory::new()
        .batch(BatchSpec::new(10).timeout(5.0))
        .seize("rollercoaster", 1)
        .timeout(5.0)
        .release("rollercoaster", 1)
        .separate()
        .log("off");
    let mut env = Environment::new();
    env.add_resource(ResourceSpec::new("rollercoaster").capacity(10)).unwrap();
    env.add_generator(GeneratorSpec::new("p", roller, at(vec![0.0; 10]))).unwrap();
    let out = traced(&mut env, f64::INFINITY);
    assert_eq!(out.len(), 10);
    assert!(out.iter().all(|l| l.starts_with("5: p")));
    let res = get_mon_resources(&[&env]);
    assert_eq!(res.iter().map(|r| r.server).max(), Some(1));
    let per = get_mon_arrivals(&[&env], true);
    assert_eq!(per.len(), 1);
    assert_eq!(per[0].name, "batch_0");
    assert_eq!(per[0].activity_time, 5.0);
    let life = arrivals(&env);
    assert_eq!(life.len(), 10);
    assert!(life.iter().all(|r| r.activity_time == 5.0 && r.finished));
}

#[test]
fn batch_timeout_triggers_with_partial_batch() {
    let t = Trajectory::new()
        .batch(BatchSpec::new(10).timeout(5.0))
        .log("go")
        .separate()
        .log("alone");
    let mut env = Environment::new();
    env.add_generator(GeneratorSpec::new("p", t, at([1.0, 2.0, 3.0]))).unwrap();
    let out = traced(&mut env, f64::INFINITY);
    assert_eq!(
        out,
        vec!["6: batch_0: go", "6: p0: alone", "6: p1: alone", "6: p2: alone"]
    );
}

#[test]
fn batch_rule_lets_arrivals_bypass() {
    let t = Trajectory::new()
        .set_attribute("join", Param::dynamic(|ctx| if ctx.now() < 1.5 { 1.0 } else { 0.0 }))
        .batch(BatchSpec::new(2).rule(Param::dynamic(|ctx| ctx.get_attribute("join") == 1.0)))
        .log("after");
    let mut env = Environment::new();
    env.add_generator(GeneratorSpec::new("p", t, at([0.0, 1.0, 2.0]))).unwrap();
    let out = traced(&mut env, f64::INFINITY);
    assert_eq!(out, vec!["1: batch_0: after", "2: p2: after"]);
}

#[test]
fn permanent_batch_is_not_separated() {
    let t = Trajectory::new()
        .batch(BatchSpec::new(2).permanent(true))
        .separate()
        .log("still together");
    let mut env = Environment::new();
    env.add_generator(GeneratorSpec::new("p", t, at([0.0, 0.0]))).unwrap();
    assert_eq!(traced(&mut env, f64::INFINITY), vec!["0: batch_0: still together"]);
    assert_eq!(arrivals(&env).len(), 2);
}

#[test]
fn named_batches_are_shared_across_trajectories() {
    let a = Trajectory::new().batch(BatchSpec::new(2).name("shared")).log("go");
    let b = Trajectory::new().log("b").batch(BatchSpec::new(2).name("shared")).log("other");
    let mut env = Environment::new();
    env.add_generator(GeneratorSpec::new("a", a, at([0.0]))).unwrap();
    env.add_generator(GeneratorSpec::new("b", b, at([1.0]))).unwrap();
    assert_eq!(
        traced(&mut env, f64::INFINITY),
        vec!["1: b0: b", "1: batch_0: go"]
    );
}

#[test]
fn synchronize_first_passes_at_earliest_time() {
    let t = Trajectory::new()
        .clone_n(
            3,
            vec![
                Trajectory::new().timeout(4.0),
                Trajectory::new().timeout(1.5),
                Trajectory::new().timeout(3.0),
            ],
        )
        .synchronize(false)
        .log("first");
    let mut env = Environment::new();
    env.add_generator(GeneratorSpec::new("c", t, at([0.0]))).unwrap();
    assert_eq!(traced(&mut env, f64::INFINITY), vec!["1.5: c0: first"]);
    assert_eq!(arrivals(&env).len(), 1);
}

#[test]
fn clones_without_synchronize_all_continue() {
    let t = Trajectory::new()
        .set_attribute("x", 1.0)
        .clone_n(3, vec![Trajectory::new().set_attribute("x", 2.0)])
        .log(Param::dynamic(|ctx| format!("x={}", ctx.get_attribute("x"))));
    let mut env = Environment::new();
    env.add_generator(GeneratorSpec::new("c", t, at([0.0]))).unwrap();
    assert_eq!(
        traced(&mut env, f64::INFINITY),
        vec!["0: c0: x=2", "0: c0: x=1", "0: c0: x=1"]
    );
    assert_eq!(arrivals(&env).len(), 3);
}

#[test]
fn rollback_check_and_zero_times() {
    let never = Trajectory::new()
        .log("x")
        .rollback_if(1, Param::Const(false));
    let zero = Trajectory::new().log("y").rollback(1, Some(0));
    let mut env = Environment::new();
    env.add_generator(GeneratorSpec::new("n", never, at([0.0]))).unwrap();
    env.add_generator(GeneratorSpec::new("z", zero, at([1.0]))).unwrap();
    assert_eq!(traced(&mut env, f64::INFINITY), vec!["0: n0: x", "1: z0: y"]);

    let counted = Trajectory::new()
        .set_attribute("i", Param::dynamic(|ctx| {
            let i = ctx.get_attribute("i");
            if i.is_nan() { 1.0 } else { i + 1.0 }
        }))
        .rollback_if(1, Param::dynamic(|ctx| ctx.get_attribute("i") < 4.0))
        .log(Param::dynamic(|ctx| format!("i={}", ctx.get_attribute("i"))));
    let mut env = Environment::new();
    env.add_generator(GeneratorSpec::new("c", counted, at([0.0]))).unwrap();
    assert_eq!(traced(&mut env, f64::INFINITY), vec!["0: c0: i=4"]);
}

#[test]
fn rollback_inside_branch_counts_subtrajectory_nodes() {
    let t = Trajectory::new()
        .log("top")
        .branch(1, &[true], vec![Trajectory::new().timeout(1.0)])
        .rollback(3, Some(1));
    let mut env = Environment::new();
    env.add_generator(GeneratorSpec::new("r", t, at([0.0]))).unwrap();
    assert_eq!(traced(&mut env, f64::INFINITY), vec!["0: r0: top", "1: r0: top"]);
    assert_eq!(env.now(), 2.0);
}

#[test]
fn trap_interrupts_timeout_and_returns_after_it() {
    let worker = Trajectory::new()
        .trap("stop", Some(Trajectory::new().log("handler")), true)
        .timeout(10.0)
        .log("after");
    let boss = Trajectory::new().timeout(3.0).send("stop", 0.0);
    let mut env = Environment::new();
    env.add_generator(GeneratorSpec::new("w", worker, at([0.0]))).unwrap();
    env.add_generator(GeneratorSpec::new("b", boss, at([0.0]))).unwrap();
    assert_eq!(
        traced(&mut env, f64::INFINITY),
        vec!["3: w0: handler", "3: w0: after"]
    );
    let w = arrivals(&env).into_iter().find(|r| r.name == "w0").unwrap();
    assert_eq!(w.activity_time, 3.0);
}

#[test]
fn handler_restart_keeps_original_continuation() {
    let worker = Trajectory::new()
        .trap("s", Some(Trajectory::new().log("h").timeout(5.0).log("h done")), true)
        .timeout(100.0)
        .log("after");
    let sender = Trajectory::new().timeout(1.0).send("s", 0.0).timeout(2.0).send("s", 0.0);
    let mut env = Environment::new();
    env.add_generator(GeneratorSpec::new("w", worker, at([0.0]))).unwrap();
    env.add_generator(GeneratorSpec::new("s", sender, at([0.0]))).unwrap();
    assert_eq!(
        traced(&mut env, f64::INFINITY),
        vec!["1: w0: h", "3: w0: h", "8: w0: h done", "8: w0: after"]
    );
}

#[test]
fn uninterruptible_handler_ignores_signals() {
    let worker = Trajectory::new()
        .trap("s", Some(Trajectory::new().log("h").timeout(5.0).log("h done")), false)
        .wait()
        .log("after");
    let sender = Trajectory::new().timeout(1.0).send("s", 0.0).timeout(2.0).send("s", 0.0);
    let mut env = Environment::new();
    env.add_generator(GeneratorSpec::new("w", worker, at([0.0]))).unwrap();
    env.add_generator(GeneratorSpec::new("s", sender, at([0.0]))).unwrap();
    assert_eq!(
        traced(&mut env, f64::INFINITY),
        vec!["1: w0: h", "6: w0: h done", "6: w0: after"]
    );
}

#[test]
fn signals_ignored_while_queued_and_after_untrap() {
    let waiter = Trajectory::new()
        .trap("s", Some(Trajectory::new().log("interrupted")), true)
        .seize("r", 1)
        .log("served")
        .untrap("s")
        .timeout(5.0)
        .release("r", 1);
    let holder = Trajectory::new().seize("r", 1).timeout(2.0).release("r", 1);
    let sender = Trajectory::new().timeout(1.0).send("s", 0.0).timeout(3.0).send("s", 0.0);
    let mut env = Environment::new();
    env.add_resource(ResourceSpec::new("r")).unwrap();
    env.add_generator(GeneratorSpec::new("h", holder, at([0.0]))).unwrap();
    env.add_generator(GeneratorSpec::new("w", waiter, at([0.5]))).unwrap();
    env.add_generator(GeneratorSpec::new("s", sender, at([0.0]))).unwrap();
    assert_eq!(traced(&mut env, f64::INFINITY), vec!["2: w0: served"]);
    let w = arrivals(&env).into_iter().find(|r| r.name == "w0").unwrap();
    assert_eq!(w.end_time, 7.0);
    assert_eq!(w.activity_time, 5.0);
}

#[test]
fn delayed_send_and_no_subscribers() {
    let waiter = Trajectory::new().trap("go", None, true).wait().log("woke");
    let sender = Trajectory::new().send("go", 4.0).send("nobody", 0.0);
    let mut env = Environment::new();
    env.add_generator(GeneratorSpec::new("w", waiter, at([0.0]))).unwrap();
    env.add_generator(GeneratorSpec::new("s", sender, at([1.0]))).unwrap();
    assert_eq!(traced(&mut env, f64::INFINITY), vec!["5: w0: woke"]);
}

#[test]
fn renege_if_signal_removes_from_queue() {
    let customer = Trajectory::new()
        .renege_if("closing", Some(Trajectory::new().log("leaving")))
        .seize("clerk", 1)
        .timeout(10.0)
        .release("clerk", 1);
    let closer = Trajectory::new().timeout(3.0).send("closing", 0.0);
    let mut env = Environment::new();
    env.add_resource(ResourceSpec::new("clerk")).unwrap();
    env.add_generator(GeneratorSpec::new("c", customer, at([0.0, 1.0]))).unwrap();
    env.add_generator(GeneratorSpec::new("x", closer, at([0.0]))).unwrap();
    let out = traced(&mut env, f64::INFINITY);
    assert_eq!(out, vec!["3: c0: leaving", "3: c1: leaving"]);
    let rows = arrivals(&env);
    assert!(rows.iter().filter(|r| r.name.starts_with('c')).all(|r| !r.finished));
    assert_eq!(env.get_server_count("clerk").unwrap(), 0);
    assert_eq!(env.get_queue_count("clerk").unwrap(), 0);
}

#[test]
fn renege_while_holding_frees_unit_for_next() {
    let impatient = Trajectory::new()
        .seize("r", 1)
        .renege_in(2.0, None)
        .timeout(10.0)
        .release("r", 1);
    let next = Trajectory::new().seize("r", 1).log("got it").release("r", 1);
    let mut env = Environment::new();
    env.add_resource(ResourceSpec::new("r")).unwrap();
    env.add_generator(GeneratorSpec::new("i", impatient, at([0.0]))).unwrap();
    env.add_generator(GeneratorSpec::new("n", next, at([1.0]))).unwrap();
    assert_eq!(traced(&mut env, f64::INFINITY), vec!["2: n0: got it"]);
    let per = get_mon_arrivals(&[&env], true);
    let i0 = per.iter().find(|r| r.name == "i0").unwrap();
    assert_eq!((i0.end_time, i0.finished), (2.0, false));
}

#[test]
fn leave_probability_extremes() {
    let t = Trajectory::new().leave(0.0).log("stayed").leave(1.0).log("never");
    let mut env = Environment::new();
    env.add_generator(GeneratorSpec::new("l", t, at([0.0, 1.0]))).unwrap();
    assert_eq!(traced(&mut env, f64::INFINITY), vec!["0: l0: stayed", "1: l1: stayed"]);
    assert!(arrivals(&env).iter().all(|r| !r.finished));
}

#[test]
fn select_policies() {
    let mut env = Environment::new();
    for (name, q) in [("a", 3), ("b", 1), ("c", 2)] {
        env.add_resource(ResourceSpec::new(name)).unwrap();
        let hold = Trajectory::new().seize(name, 1).timeout(100.0).release(name, 1);
        env.add_generator(GeneratorSpec::new(format!("fill_{name}"), hold, at(vec![0.0; q + 1])))
            .unwrap();
    }
    let chooser = Trajectory::new()
        .select(["a", "b", "c"], SelectPolicy::ShortestQueue)
        .log(Param::dynamic(|ctx| ctx.selected(0).unwrap().to_string()));
    env.add_generator(GeneratorSpec::new("x", chooser, at([1.0]))).unwrap();
    assert_eq!(traced(&mut env, 2.0), vec!["1: x0: b"]);

    let rr = Trajectory::new()
        .select(["A", "B"], SelectPolicy::RoundRobin)
        .seize_selected(0, 1)
        .log(Param::dynamic(|ctx| ctx.selected(0).unwrap().to_string()))
        .release_selected(0, 1);
    let mut env = Environment::new();
    env.add_resource(ResourceSpec::new("A")).unwrap();
    env.add_resource(ResourceSpec::new("B")).unwrap();
    env.add_generator(GeneratorSpec::new("r", rr, at([0.0, 1.0, 2.0, 3.0]))).unwrap();
    assert_eq!(
        traced(&mut env, f64::INFINITY),
        vec!["0: r0: A", "1: r1: B", "2: r2: A", "3: r3: B"]
    );
}

#[test]
fn first_available_and_custom_policy() {
    let mut env = Environment::new();
    env.add_resource(ResourceSpec::new("busy").queue_size(0)).unwrap();
    env.add_resource(ResourceSpec::new("free")).unwrap();
    env.add_generator(GeneratorSpec::new("h", job("busy", 10.0), at([0.0]))).unwrap();
    let t = Trajectory::new()
        .select(["busy", "free"], SelectPolicy::FirstAvailable)
        .log(Param::dynamic(|ctx| ctx.selected(0).unwrap().to_string()))
        .select_id(["busy", "free"], SelectPolicy::Custom(std::sync::Arc::new(|_, names| names.len() - 2)), 1)
        .log(Param::dynamic(|ctx| ctx.selected(1).unwrap().to_string()));
    env.add_generator(GeneratorSpec::new("x", t, at([1.0]))).unwrap();
    assert_eq!(traced(&mut env, 2.0), vec!["1: x0: free", "1: x0: busy"]);
}

#[test]
fn random_selection_replays_with_seed() {
    let run = |seed| {
        let t = Trajectory::new()
            .select(["a", "b", "c"], SelectPolicy::Random)
            .log(Param::dynamic(|ctx| ctx.selected(0).unwrap().to_string()));
        let mut env = Environment::with_seed(seed);
        for n in ["a", "b", "c"] {
            env.add_resource(ResourceSpec::new(n)).unwrap();
        }
        env.add_generator(GeneratorSpec::new("x", t, constant(1.0))).unwrap();
        traced(&mut env, 30.0)
    };
    assert_eq!(run(5), run(5));
}

#[test]
fn monitoring_levels() {
    let t = Trajectory::new().set_attribute("k", 1.0).timeout(1.0);
    let mut env = Environment::new();
    env.add_generator(GeneratorSpec::new("m0", t.clone(), at([0.0])).mon(0)).unwrap();
    env.add_generator(GeneratorSpec::new("m1", t.clone(), at([0.0])).mon(1)).unwrap();
    env.add_generator(GeneratorSpec::new("m2", t, at([0.0])).mon(2)).unwrap();
    env.run(f64::INFINITY).unwrap();
    let names: Vec<String> = arrivals(&env).into_iter().map(|r| r.name).collect();
    assert_eq!(names, vec!["m10", "m20"]);
    let attrs = get_mon_attributes(&[&env]);
    assert_eq!(attrs.len(), 1);
    assert_eq!((attrs[0].name.as_str(), attrs[0].key.as_str(), attrs[0].value), ("m20", "k", 1.0));
}

#[test]
fn globals_are_shared_and_unset_is_nan() {
    let writer = Trajectory::new().set_global("g", 7.0);
    let reader = Trajectory::new()
        .log(Param::dynamic(|ctx| format!("{} {}", ctx.get_global("g"), ctx.get_attribute("nope").is_nan())));
    let mut env = Environment::new();
    env.add_generator(GeneratorSpec::new("w", writer, at([0.0]))).unwrap();
    env.add_generator(GeneratorSpec::new("r", reader, at([1.0]))).unwrap();
    assert_eq!(traced(&mut env, f64::INFINITY), vec!["1: r0: 7 true"]);
    env.set_global("outside", 1.0);
    let attrs = get_mon_attributes(&[&env]);
    assert_eq!(attrs.last().unwrap().name, "");
}

#[test]
fn set_prioritization_enables_preemption() {
    let holder = Trajectory::new().seize("m", 1).timeout(10.0).release("m", 1);
    let climber = Trajectory::new()
        .set_prioritization(Prioritization::new(3, 3, true).unwrap())
        .log(Param::dynamic(|ctx| format!("{:?}", ctx.prioritization().unwrap().priority)))
        .seize("m", 1)
        .log("in")
        .release("m", 1);
    let mut env = Environment::new();
    env.add_resource(ResourceSpec::new("m").preemptive(true)).unwrap();
    env.add_generator(GeneratorSpec::new("h", holder, at([0.0]))).unwrap();
    env.add_generator(GeneratorSpec::new("c", climber, at([1.0]))).unwrap();
    assert_eq!(traced(&mut env, f64::INFINITY), vec!["1: c0: 3", "1: c0: in"]);
}

#[test]
fn generator_control_from_trajectories() {
    let stopper = Trajectory::new().deactivate("g").deactivate("g");
    let mut env = Environment::new();
    env.add_generator(GeneratorSpec::new("g", Trajectory::new(), constant(1.0))).unwrap();
    env.add_generator(GeneratorSpec::new("s", stopper, at([2.5]))).unwrap();
    env.run(10.0).unwrap();
    // the arrival due at 3 was already created when the one at 2 entered
    assert_eq!(env.get_n_generated("g").unwrap(), 3);

    let swap = Trajectory::new().set_distribution("g", at([1.0, 2.0]));
    let mut env = Environment::new();
    env.add_generator(GeneratorSpec::new("g", Trajectory::new(), constant(10.0))).unwrap();
    env.add_generator(GeneratorSpec::new("s", swap, at([0.5]))).unwrap();
    env.run(100.0).unwrap();
    assert_eq!(env.get_n_generated("g").unwrap(), 3);

    let retarget = Trajectory::new().set_trajectory("g", Trajectory::new().log("new"));
    let mut env = Environment::new();
    env.add_generator(GeneratorSpec::new("g", Trajectory::new().log("old"), constant(1.0))).unwrap();
    env.add_generator(GeneratorSpec::new("s", retarget, at([1.5]))).unwrap();
    assert_eq!(traced(&mut env, 3.5), vec!["1: g0: old", "2: g1: old", "3: g2: new"]);
}

#[test]
fn negative_gap_stops_generator_after_prefix() {
    let d = Distribution::custom(|_| vec![1.0, 1.0, -1.0, 1.0]);
    let mut env = Environment::new();
    env.add_generator(GeneratorSpec::new("g", Trajectory::new(), d)).unwrap();
    env.run(f64::INFINITY).unwrap();
    assert_eq!(env.get_n_generated("g").unwrap(), 2);
    assert_eq!(env.now(), 2.0);
}

#[test]
fn from_distribution_starts_late() {
    let mut env = Environment::new();
    env.add_generator(GeneratorSpec::new("g", Trajectory::new().log("x"), from(3.0, constant(2.0))))
        .unwrap();
    assert_eq!(traced(&mut env, 8.0), vec!["3: g0: x", "5: g1: x", "7: g2: x"]);
}

#[test]
fn runtime_errors_name_the_culprit() {
    let mut env = Environment::new();
    env.add_generator(GeneratorSpec::new("n", Trajectory::new().timeout(-1.0), at([0.0])))
        .unwrap();
    let e = env.run(f64::INFINITY).unwrap_err();
    assert!(e.to_string().contains("negative delay"), "{e}");
    assert!(e.to_string().contains("n0"));

    let mut env = Environment::new();
    env.add_generator(GeneratorSpec::new(
        "b",
        Trajectory::new().branch(3, &[true], vec![Trajectory::new()]),
        at([0.0]),
    ))
    .unwrap();
    assert!(matches!(env.run(1.0), Err(SimError::BranchOutOfRange { .. })));

    let mut env = Environment::new();
    env.add_resource(ResourceSpec::new("r")).unwrap();
    env.add_generator(GeneratorSpec::new(
        "x",
        Trajectory::new().seize("r", 1).release("r", 2),
        at([0.0]),
    ))
    .unwrap();
    assert!(matches!(env.run(1.0), Err(SimError::ReleaseExceedsHeld { .. })));

    let mut env = Environment::new();
    env.add_generator(GeneratorSpec::new("x", Trajectory::new().seize("ghost", 1), at([0.0])))
        .unwrap();
    assert_eq!(env.run(1.0), Err(SimError::UnknownResource("ghost".into())));

    let mut env = Environment::new();
    env.add_generator(GeneratorSpec::new("x", Trajectory::new().activate("ghost"), at([0.0])))
        .unwrap();
    assert!(env.run(1.0).unwrap_err().to_string().contains("generator 'ghost' not found"));

    let mut env = Environment::new();
    env.add_resource(ResourceSpec::new("r")).unwrap();
    assert_eq!(
        env.add_resource(ResourceSpec::new("r")).unwrap_err(),
        SimError::DuplicateName("r".into())
    );
}

#[test]
fn run_horizon_semantics() {
    let mut env = Environment::new();
    env.add_generator(GeneratorSpec::new("g", Trajectory::new().log("x"), at([1.0])))
        .unwrap();
    let trace = MemoryTrace::new();
    env.set_trace(trace.clone());
    assert_eq!(env.run(0.0).unwrap(), 0.0);
    assert_eq!(env.run(1.0).unwrap(), 1.0);
    assert!(trace.lines().is_empty());
    env.run(f64::INFINITY).unwrap();
    assert_eq!(trace.lines(), vec!["1: g0: x"]);
    assert_eq!(env.now(), 1.0);
    assert!(!env.step().unwrap());
}

#[test]
fn peek_matches_steps() {
    let mut env = Environment::with_seed(11);
    env.add_resource(ResourceSpec::new("r")).unwrap();
    let t = Trajectory::new()
        .seize("r", 1)
        .timeout(Param::dynamic(|ctx| ctx.exponential(1.0)))
        .release("r", 1);
    env.add_generator(GeneratorSpec::new("a", t, exponential(1.5))).unwrap();
    env.run(20.0).unwrap();
    for _ in 0..50 {
        let peeked = env.peek(1);
        if peeked.is_empty() {
            break;
        }
        env.step().unwrap();
        assert_eq!(env.now(), peeked[0].0);
    }
    assert!(env.peek(0).is_empty());
}

#[test]
fn reset_replays_identically() {
    let mut env = Environment::with_seed(9);
    env.add_resource(ResourceSpec::new("r").capacity(2)).unwrap();
    let t = Trajectory::new()
        .seize("r", 1)
        .timeout(Param::dynamic(|ctx| ctx.exponential(1.0)))
        .release("r", 1);
    env.add_generator(GeneratorSpec::new("a", t, exponential(1.8))).unwrap();
    env.run(200.0).unwrap();
    let first = (get_mon_arrivals(&[&env], true), get_mon_resources(&[&env]));
    env.reset();
    assert_eq!(env.now(), 0.0);
    assert!(get_mon_resources(&[&env]).is_empty());
    env.run(200.0).unwrap();
    assert_eq!(first, (get_mon_arrivals(&[&env], true), get_mon_resources(&[&env])));
    env.reset_with_seed(10);
    env.run(200.0).unwrap();
    assert_ne!(first.1, get_mon_resources(&[&env]));
}

#[test]
fn custom_task_changes_state() {
    let mut env = Environment::new();
    env.add_resource(ResourceSpec::new("r")).unwrap();
    env.schedule(3.0, EventPriority::Manager, |ctx| {
        ctx.set_capacity("r", Limit::Finite(4)).unwrap();
        ctx.set_global("flag", 1.0);
    })
    .unwrap();
    env.run(5.0).unwrap();
    assert_eq!(env.get_capacity("r").unwrap(), Limit::Finite(4));
    assert_eq!(env.get_global("flag"), Some(1.0));
    let res = get_mon_resources(&[&env]);
    assert_eq!(res.len(), 1);
    assert_eq!(res[0].time, 3.0);
}

#[test]
fn empty_trajectory_finishes_immediately() {
    let mut env = Environment::new();
    env.add_generator(GeneratorSpec::new("e", Trajectory::new(), at([2.0]))).unwrap();
    env.run(f64::INFINITY).unwrap();
    let r = &arrivals(&env)[0];
    assert_eq!((r.start_time, r.end_time, r.activity_time, r.finished), (2.0, 2.0, 0.0, true));
}

#[test]
fn rejected_seize_emits_per_resource_row() {
    let mut env = Environment::new();
    env.add_resource(ResourceSpec::new("r").queue_size(0)).unwrap();
    env.add_generator(GeneratorSpec::new("a", job("r", 5.0), at([0.0, 1.0]))).unwrap();
    env.run(f64::INFINITY).unwrap();
    let per = get_mon_arrivals(&[&env], true);
    let a1 = per.iter().find(|r| r.name == "a1").unwrap();
    assert_eq!((a1.start_time, a1.end_time, a1.activity_time, a1.finished), (1.0, 1.0, 0.0, false));
    assert_eq!(a1.resource.as_deref(), Some("r"));
}
