//! Acceptance suite. Each criterion prints one PASS/FAIL line; the test
//! fails if any criterion does.

mod common;

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use common::{
    enumerate_best, floyd_int, naive_coverage, naive_total, naive_worst, random_connected,
    reachable_without_link, sample_set, OracleObjective,
};
use ctrlplace::cli::SolveReport;
use ctrlplace::k_selection::{select_optimal_k, KCurve};
use ctrlplace::metrics::{
    assign_nearest, avg_latency, coverage_within_bound, worst_latency, DistanceMatrix, Placement,
};
use ctrlplace::reliability::{
    build_control_network, classify_paths, expected_failed_paths, reroute_after_failure,
    single_link_scenarios, Element, FailureScenario, NodeStatus,
};
use ctrlplace::solvers::{
    solve_brute_force, solve_kmedoids, solve_random_baseline, Objective, SolverKind,
    DEFAULT_EVALUATION_BUDGET,
};
use ctrlplace::topology::bundled_example;
use rand::Rng;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn objective_oracles() -> Outcome {
    let mut evaluations = 0;
    for seed in 0..100u64 {
        let n = 2 + (seed as usize * 13) % 29;
        let t = random_connected(seed, n, 0.1, 100);
        let d = DistanceMatrix::from_topology(&t).map_err(|e| e.to_string())?;
        let exact = floyd_int(&t);
        let mut r = common::rng(seed ^ 0xabc);
        for k in 1..=n.min(5) {
            let set = sample_set(&mut r, n, k);
            let p = Placement::new(set.clone(), n).unwrap();
            let want_avg = naive_total(&exact, &set) as f64 / n as f64;
            check((avg_latency(&d, &p) - want_avg).abs() <= 1e-12, || format!("avg seed {seed} k {k}"))?;
            check(
                (worst_latency(&d, &p) - naive_worst(&exact, &set) as f64).abs() <= 1e-12,
                || format!("worst seed {seed} k {k}"),
            )?;
            for bound in [0, 10, 37, 80, 250] {
                let got = coverage_within_bound(&d, &p, bound as f64).unwrap().len();
                check(got == naive_coverage(&exact, &set, bound), || {
                    format!("coverage seed {seed} k {k} bound {bound}")
                })?;
            }
            evaluations += 1;
        }
    }
    Ok(format!("{evaluations} placements on 100 graphs"))
}

fn exact_solver_equivalence() -> Outcome {
    let mut cases = 0;
    for seed in 0..20u64 {
        let n = 6 + seed as usize % 7;
        let t = random_connected(1000 + seed, n, 0.2, 15);
        let d = DistanceMatrix::from_topology(&t).unwrap();
        let exact = floyd_int(&t);
        for k in 1..=3 {
            for (obj, oracle) in [
                (Objective::AverageLatency, OracleObjective::Avg),
                (Objective::WorstLatency, OracleObjective::Worst),
                (Objective::CoverageWithinBound { bound: 12.0 }, OracleObjective::Coverage(12)),
            ] {
                let r = solve_brute_force(&d, k, obj, DEFAULT_EVALUATION_BUDGET).map_err(|e| e.to_string())?;
                let (want, _) = enumerate_best(&exact, k, oracle);
                check(r.placement.controllers() == want.as_slice(), || {
                    format!("seed {seed} k {k} {obj:?}: {:?} vs {want:?}", r.placement.controllers())
                })?;
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} instance/objective pairs agree"))
}

fn monotone_optimal_curve() -> Outcome {
    let d = DistanceMatrix::from_topology(&bundled_example().topology).unwrap();
    let values: Vec<f64> = (1..=5)
        .map(|k| {
            solve_brute_force(&d, k, Objective::AverageLatency, DEFAULT_EVALUATION_BUDGET)
                .map(|r| r.objective_value)
                .map_err(|e| e.to_string())
        })
        .collect::<Result<_, _>>()?;
    let drops: Vec<f64> = values.windows(2).map(|w| w[0] - w[1]).collect();
    check(drops.iter().all(|&x| x >= 0.0), || format!("curve rises: {values:?}"))?;
    check(drops[1..].iter().all(|&x| drops[0] > x), || format!("first drop not largest: {drops:?}"))?;
    Ok(format!("avg latency k=1..5 {:?}", values.iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>()))
}

fn clustering_beats_random() -> Outcome {
    let d = DistanceMatrix::from_topology(&bundled_example().topology).unwrap();
    let km = solve_kmedoids(&d, 4, 42, 100).map_err(|e| e.to_string())?;
    let rb = solve_random_baseline(&d, 4, Objective::AverageLatency, 100, 42).map_err(|e| e.to_string())?;
    check(km.objective_value <= rb.mean, || format!("{} > mean {}", km.objective_value, rb.mean))?;
    let strictly = rb.trials.iter().filter(|t| km.objective_value < t.objective_value).count();
    check(strictly >= 95, || format!("strictly lower in only {strictly}/100"))?;
    Ok(format!(
        "k-medoids {:.3} vs random mean {:.3}, strictly lower in {strictly}/100",
        km.objective_value, rb.mean
    ))
}

fn cluster_recovery() -> Outcome {
    let g = bundled_example();
    let d = DistanceMatrix::from_topology(&g.topology).unwrap();
    let r = solve_kmedoids(&d, 4, 42, 100).map_err(|e| e.to_string())?;
    let mut groups: Vec<usize> = r.placement.controllers().iter().map(|&c| g.cluster_of[c]).collect();
    groups.sort_unstable();
    check(groups == [0, 1, 2, 3], || format!("controller groups {groups:?}"))?;
    let report = SolveReport::new(&g.topology, &r, 42, None);
    let json: serde_json::Value = serde_json::to_value(&report).unwrap();
    let clusters = json["clusters"].as_array().ok_or("no cluster table")?;
    check(clusters.len() == 4, || "cluster count".into())?;
    let mut delays = Vec::new();
    for c in clusters {
        let v = c["total_delay_to_neighbors"].as_f64().ok_or("missing total delay to neighbors")?;
        delays.push(format!("{}={v}", c["controller"].as_str().unwrap_or("?")));
    }
    Ok(format!("one controller per group; {}", delays.join(" ")))
}

fn k_selection_rule() -> Outcome {
    let values = [1291.0, 389.0, 302.0, 188.0, 134.0, 48.0, 12.0, 7.0, 5.0, 5.0];
    let c = KCurve::from_values(&values, Objective::AverageLatency, SolverKind::RandomBaseline, 0);
    let chosen = select_optimal_k(&c, 0.05).map_err(|e| e.to_string())?.chosen_k;
    check(chosen == 9, || format!("chose {chosen}"))?;
    let mut ks = Vec::new();
    for tau in [0.01, 0.05, 0.2, 0.5] {
        ks.push(select_optimal_k(&c, tau).unwrap().chosen_k);
    }
    check(ks.windows(2).all(|w| w[1] <= w[0]), || format!("not monotone in tau: {ks:?}"))?;
    let mut r = common::rng(7);
    for _ in 0..200 {
        let len = r.gen_range(1..15);
        let mut v = vec![r.gen_range(1.0..1000.0)];
        for _ in 1..len {
            let last: f64 = *v.last().unwrap();
            v.push(last * r.gen_range(0.0..=1.0));
        }
        let c = KCurve::from_values(&v, Objective::AverageLatency, SolverKind::BruteForce, 0);
        let ks: Vec<usize> = [0.01, 0.05, 0.2, 0.5].iter().map(|&t| select_optimal_k(&c, t).unwrap().chosen_k).collect();
        check(ks.windows(2).all(|w| w[1] <= w[0]), || format!("{v:?} gives {ks:?}"))?;
    }
    Ok(format!("k=9 at tau 0.05; chosen k over tau {{0.01,0.05,0.2,0.5}} = {ks:?}"))
}

fn exhaustive_expectation(hit: usize, disjoint: usize, qs: f64) -> f64 {
    (0u32..(1 << disjoint))
        .map(|mask| {
            let f = mask.count_ones() as i32;
            qs.powi(f) * (1.0 - qs).powi(disjoint as i32 - f) * (hit as f64 + f as f64)
        })
        .sum()
}

fn expected_failed_path_count() -> Outcome {
    let mut cases = 0;
    for seed in 0..50u64 {
        let mut r = common::rng(seed + 4000);
        let n = 5 + seed as usize % 5;
        let t = random_connected(seed, n, 0.25, 10);
        let d = DistanceMatrix::from_topology(&t).unwrap();
        let k = 1 + seed as usize % 3;
        let p = Placement::new(sample_set(&mut r, n, k), n).unwrap();
        let net = build_control_network(&t, &p, &assign_nearest(&d, &p));
        let mut failed = std::collections::BTreeSet::new();
        let mut previous_sizes = Vec::new();
        for _ in 0..3 {
            let mut last = f64::NEG_INFINITY;
            for qs in [0.0, 0.25, 0.5, 1.0] {
                let s = FailureScenario::new("s", failed.clone(), qs).unwrap();
                let c = classify_paths(&net, &s);
                check(c.disjoint.len() <= 10, || "too many disjoint paths".into())?;
                let got = expected_failed_paths(&net, &s);
                let want = exhaustive_expectation(c.hit.len(), c.disjoint.len(), qs);
                check((got - want).abs() <= 1e-9, || format!("seed {seed} qs {qs}: {got} vs {want}"))?;
                check(got >= last, || format!("seed {seed}: not monotone in qs"))?;
                last = got;
            }
            previous_sizes.push(expected_failed_paths(&net, &FailureScenario::new("s", failed.clone(), 0.5).unwrap()));
            if r.gen_bool(0.3) {
                failed.insert(Element::Node(r.gen_range(0..n)));
            } else {
                failed.insert(Element::Link(r.gen_range(0..t.edge_count())));
            }
        }
        check(previous_sizes.windows(2).all(|w| w[1] >= w[0]), || {
            format!("seed {seed}: not monotone in the failed set")
        })?;
        cases += 1;
    }
    Ok(format!("{cases} seeded cases, 4 values of q_s, growing failure sets"))
}

fn rerouting_soundness() -> Outcome {
    let t = bundled_example().topology;
    let d = DistanceMatrix::from_topology(&t).unwrap();
    let mut placements = vec![solve_kmedoids(&d, 1, 42, 100).unwrap().placement];
    placements.push(solve_kmedoids(&d, 4, 42, 100).unwrap().placement);
    let mut r = common::rng(11);
    for k in [2, 3, 5] {
        placements.push(Placement::new(sample_set(&mut r, 23, k), 23).unwrap());
    }
    let mut disconnections = 0;
    for p in &placements {
        let base = assign_nearest(&d, p);
        for s in single_link_scenarios(&t, 0.0).unwrap() {
            let Some(&Element::Link(l)) = s.failed.iter().next() else {
                return Err("unexpected scenario".into());
            };
            let post = reroute_after_failure(&t, p, &s);
            let reach = reachable_without_link(&t, p.controllers(), Some(l));
            for v in 0..23 {
                match post.status[v] {
                    NodeStatus::Served { delay, .. } => {
                        check(delay >= base.entries[v].delay, || format!("{} shortened for {v}", s.name))?;
                        check(reach[v], || format!("{} served {v} without a path", s.name))?;
                    }
                    NodeStatus::Disconnected => {
                        check(!reach[v], || format!("{} flagged reachable {v}", s.name))?;
                        disconnections += 1;
                    }
                    NodeStatus::Failed => return Err("link scenario failed a node".into()),
                }
            }
        }
    }
    Ok(format!(
        "{} placements x {} link failures; {disconnections} disconnections all behind bridges",
        placements.len(),
        t.edge_count()
    ))
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn reproducibility() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let input = tmp.path().join("net.csv");
    fs::write(&input, bundled_example().topology.to_edge_list_csv()).unwrap();
    let scen = tmp.path().join("scenarios.json");
    fs::write(&scen, r#"[{"name":"a","failed_links":[["n0","n4"]],"qs":0.2}]"#).unwrap();
    let input = input.to_str().unwrap();
    let scen = scen.to_str().unwrap();
    let commands: Vec<Vec<&str>> = vec![
        vec!["solve", "--input", input, "--solver", "single"],
        vec!["solve", "--input", input, "--solver", "brute", "--k", "2", "--objective", "worst"],
        vec!["solve", "--input", input, "--solver", "local", "--k", "4", "--seed", "5"],
        vec!["solve", "--input", input, "--solver", "kmedoids", "--k", "4"],
        vec!["solve", "--input", input, "--solver", "random", "--k", "3", "--trials", "50"],
        vec!["sweep", "--input", input, "--solver", "random", "--k-max", "10", "--trials", "20"],
        vec!["sweep", "--input", input, "--solver", "brute", "--k-max", "3", "--objective", "coverage", "--bound", "30"],
        vec!["reliability", "--input", input, "--k", "1,2,4", "--scenarios", "single-link,single-node,file",
             "--scenario-file", scen, "--qs", "0.1", "--weighted-sum", "0.5"],
        vec!["gen-example", "--seed", "3"],
        vec!["convert", "--input", input, "--to", "json", "--output"],
    ];
    for (i, cmd) in commands.iter().enumerate() {
        let mut outputs = Vec::new();
        for run in 0..2 {
            let dir = tmp.path().join(format!("c{i}_{run}"));
            fs::create_dir_all(&dir).unwrap();
            let mut args = cmd.clone();
            let out_file = dir.join("out.json");
            let dir_str = dir.to_str().unwrap().to_string();
            let out_str = out_file.to_str().unwrap().to_string();
            if cmd[0] == "convert" {
                args.push(&out_str);
            } else {
                args.extend(["--out-dir", &dir_str]);
            }
            let status = Command::new(env!("CARGO_BIN_EXE_ctrlplace"))
                .args(&args)
                .output()
                .map_err(|e| e.to_string())?;
            check(status.status.success(), || {
                format!("{cmd:?}: {}", String::from_utf8_lossy(&status.stderr))
            })?;
            outputs.push(snapshot(&dir));
        }
        check(!outputs[0].is_empty(), || format!("{cmd:?} wrote nothing"))?;
        check(outputs[0] == outputs[1], || format!("{cmd:?} differs between runs"))?;
    }
    Ok(format!("{} commands produced byte-identical files", commands.len()))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome, Option<Duration>); 9] = [
        ("objective oracles", objective_oracles, Some(Duration::from_secs(5))),
        ("exact solver equivalence", exact_solver_equivalence, Some(Duration::from_secs(30))),
        ("monotone optimal curve", monotone_optimal_curve, Some(Duration::from_secs(60))),
        ("clustering beats random placement", clustering_beats_random, None),
        ("cluster recovery", cluster_recovery, None),
        ("k-selection rule", k_selection_rule, None),
        ("expected failed paths", expected_failed_path_count, None),
        ("rerouting soundness", rerouting_soundness, None),
        ("reproducibility", reproducibility, None),
    ];
    let mut failures = 0;
    for (name, f, limit) in criteria {
        let start = Instant::now();
        let mut outcome = f();
        let elapsed = start.elapsed();
        if let (Ok(_), Some(limit)) = (&outcome, limit) {
            if elapsed > limit {
                outcome = Err(format!("took {elapsed:.2?}, limit {limit:?}"));
            }
        }
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail} ({elapsed:.2?})"),
            Err(why) => {
                failures += 1;
                println!("FAIL  {name}: {why} ({elapsed:.2?})");
            }
        }
    }
    assert_eq!(failures, 0, "{failures} acceptance criteria failed");
}
