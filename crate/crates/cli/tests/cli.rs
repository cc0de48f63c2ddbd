use std::path::{Path, PathBuf};
use std::process::Command;

use proptest::prelude::*;
use trajsim::*;
use trajsim_cli::bench::{run_suite, Suite};
use trajsim_cli::export::{export_csv, read_arrivals, read_table, FILES};
use trajsim_cli::model::{self, compile, parse_file, parse_str, print};
use trajsim_cli::report::{run_model, RunOptions};

fn models() -> Vec<PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../models");
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "model"))
        .collect();
    v.sort();
    v
}

fn model_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../models").join(name)
}

fn trajsim() -> Command {
    Command::new(env!("CARGO_BIN_EXE_trajsim"))
}

#[test]
fn every_example_model_compiles_and_round_trips() {
    let all = models();
    assert!(all.len() >= 6);
    for p in all {
        let ast = parse_file(&p).unwrap_or_else(|e| panic!("{e}"));
        let text = print(&ast);
        let again = parse_str(&text).unwrap_or_else(|e| panic!("{}: {e}\n{text}", p.display()));
        assert_eq!(ast, again, "{}", p.display());
        compile(again).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
    }
}

#[test]
fn job_shop_printout_is_stable() {
    let ast = parse_file(&model_path("job-shop.model")).unwrap();
    let once = print(&ast);
    let twice = print(&parse_str(&once).unwrap());
    assert_eq!(once, twice);
    assert!(once.contains("branch("));
}

#[test]
fn unknown_resource_is_located() {
    let src = "trajectory t {\n  timeout(1)\n  seize(b)\n}\ngenerator g { trajectory = t, distribution = at(0) }\n";
    let err = compile(parse_str(src).unwrap()).unwrap_err();
    assert_eq!((err.line, err.col), (3, 9));
    assert_eq!(err.message, "unknown resource 'b'");
}

fn opts(reps: usize, jobs: usize) -> RunOptions {
    RunOptions {
        seed: 77,
        reps,
        until: 300.0,
        jobs,
    }
}

#[test]
fn parallelism_does_not_change_results() {
    let m = model::load(&model_path("job-shop.model")).unwrap();
    let a = run_model(&m, opts(8, 1)).unwrap();
    let b = run_model(&m, opts(8, 8)).unwrap();
    assert_eq!(a.arrivals(true), b.arrivals(true));
    assert_eq!(a.resources(), b.resources());
    assert_eq!(a.replications, b.replications);
}

#[test]
fn single_replication_equals_library_run() {
    let m = model::load(&model_path("mm1.model")).unwrap();
    let report = run_model(&m, opts(1, 1)).unwrap();
    let mut env = m.environment(77, 0).unwrap();
    env.run(300.0).unwrap();
    assert_eq!(report.arrivals(false), get_mon_arrivals(&[&env], false));
    assert_eq!(report.resources(), get_mon_resources(&[&env]));
}

#[test]
fn replications_are_numbered_from_one() {
    let m = model::load(&model_path("mm1.model")).unwrap();
    let report = run_model(&m, opts(3, 0)).unwrap();
    let mut reps: Vec<u32> = report.arrivals(false).iter().map(|r| r.replication).collect();
    reps.dedup();
    assert_eq!(reps, vec![1, 2, 3]);
}

#[test]
fn csv_round_trip_and_empty_tables() {
    let dir = tempfile::tempdir().unwrap();
    let m = model::load(&model_path("deactivate-activate.model")).unwrap();
    let report = run_model(&m, RunOptions { until: 10.0, ..opts(1, 1) }).unwrap();
    let files = export_csv(&report, dir.path()).unwrap();
    assert_eq!(files.len(), FILES.len());

    let text = std::fs::read_to_string(dir.path().join("arrivals.csv")).unwrap();
    assert_eq!(
        text,
        "name,start_time,end_time,activity_time,finished,replication\r\n\
         dummy0,1,2,1,TRUE,1\r\n\
         dummy1,3,4,1,TRUE,1\r\n\
         dummy2,5,6,1,TRUE,1\r\n\
         dummy3,7,8,1,TRUE,1\r\n"
    );
    assert_eq!(read_arrivals(&dir.path().join("arrivals.csv")).unwrap(), report.arrivals(false));

    // no resources and no attributes
    for f in ["resources.csv", "attributes.csv", "arrivals_per_resource.csv"] {
        let (_, rows) = read_table(&dir.path().join(f)).unwrap();
        assert!(rows.is_empty(), "{f}");
    }
}

#[test]
fn infinite_limits_are_written_as_inf() {
    let dir = tempfile::tempdir().unwrap();
    let m = model::load(&model_path("mm1.model")).unwrap();
    let report = run_model(&m, RunOptions { until: 5.0, ..opts(1, 1) }).unwrap();
    export_csv(&report, dir.path()).unwrap();
    let (header, rows) = read_table(&dir.path().join("resources.csv")).unwrap();
    let qs = header.iter().position(|h| h == "queue_size").unwrap();
    let limit = header.iter().position(|h| h == "limit").unwrap();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r[qs] == "Inf" && r[limit] == "Inf"));
}

#[test]
fn fields_with_commas_and_quotes_are_quoted() {
    let dir = tempfile::tempdir().unwrap();
    let src = r#"trajectory t { set_attribute("a, \"b\"", 1) }
                 generator g { trajectory = t, distribution = at(0), mon = 2 }"#;
    let m = compile(parse_str(src).unwrap()).unwrap();
    let report = run_model(&m, RunOptions { until: 5.0, ..opts(1, 1) }).unwrap();
    export_csv(&report, dir.path()).unwrap();
    let text = std::fs::read_to_string(dir.path().join("attributes.csv")).unwrap();
    assert!(text.ends_with("0,g0,\"a, \"\"b\"\"\",1,1\r\n"), "{text}");
    assert_eq!(
        trajsim_cli::export::read_attributes(&dir.path().join("attributes.csv")).unwrap(),
        report.attributes()
    );
}

#[test]
fn zero_sized_bench_has_no_rows() {
    for s in Suite::ALL {
        assert!(run_suite(s, 0, 2).is_empty());
    }
}

#[test]
fn binary_run_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = trajsim()
        .args(["run", model_path("mm1.model").to_str().unwrap(), "--reps", "4", "--until", "50", "--out"])
        .arg(dir.path())
        .env("TRAJSIM_JOBS", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("replications: 4"), "{stdout}");
    assert!(stdout.contains("analytic M/M/1"), "{stdout}");
    for f in FILES {
        assert!(dir.path().join(f).exists());
    }
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.model");
    std::fs::write(&bad, "trajectory t {\n  seize(nope)\n}\n").unwrap();
    let out = trajsim().arg("validate").arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("bad.model:2:9: unknown resource 'nope'"), "{err}");

    let out = trajsim().args(["run", "/no/such/file.model"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));

    // fine to compile, fails when the arrival releases what it never seized
    let runtime = dir.path().join("runtime.model");
    std::fs::write(
        &runtime,
        "resource r\ntrajectory t { release(r) }\ngenerator g { trajectory = t, distribution = at(0) }\n",
    )
    .unwrap();
    let out = trajsim().arg("run").arg(&runtime).args(["--until", "5"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));

    // no horizon anywhere
    let out = trajsim().arg("run").arg(model_path("doctor-nurse.model")).output().unwrap();
    assert_eq!(out.status.code(), Some(1));

    let out = trajsim().args(["run", "--reps", "x"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn binary_analytic_and_bench() {
    let out = trajsim().args(["analytic", "mm1", "--lambda", "2", "--mu", "4"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        String::from_utf8(out.stdout).unwrap().trim(),
        "M/M/1 lambda = 2 mu = 4: rho = 0.5 | N = 1 | T = 0.5"
    );
    let out = trajsim().args(["analytic", "mm1", "--lambda", "3", "--mu", "3"]).output().unwrap();
    assert!(String::from_utf8(out.stdout).unwrap().contains("the system is unstable"));

    let out = trajsim().args(["bench", "batch_m_sweep", "--n", "0"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 2, "{text}");

    let out = trajsim().args(["bench", "nope"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn printed_expressions_reparse(a in -50i32..50, b in 1i32..20, c in 0i32..9) {
        let src = format!(
            "trajectory t {{ timeout(max(0, {a} - {b} * (now() + {c}) / {b})) }}\n\
             generator g {{ trajectory = t, distribution = at(0) }}\n"
        );
        let ast = parse_str(&src).unwrap();
        let text = print(&ast);
        prop_assert_eq!(parse_str(&text).unwrap(), ast);
    }

    #[test]
    fn replications_do_not_depend_on_jobs(seed in 0u64..1000, jobs in 1usize..6) {
        let m = model::load(&model_path("mm1.model")).unwrap();
        let o = RunOptions { seed, reps: 3, until: 40.0, jobs };
        let a = run_model(&m, o).unwrap();
        let b = run_model(&m, RunOptions { jobs: 1, ..o }).unwrap();
        prop_assert_eq!(a.arrivals(false), b.arrivals(false));
    }
}
