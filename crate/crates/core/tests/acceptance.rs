//! Acceptance criteria. Runs as a plain binary (no libtest harness) so each
//! criterion prints exactly one PASS/FAIL line; exits non-zero on any FAIL.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use modq::analysis::{run_analyze, run_rank, run_synth, AnalysisConfig, Report};
use modq::evolution::{
    delta_stats, delta_stats_from_q, q_series, RankKey, Snapshot, SnapshotSeries, SortOrder,
};
use modq::extract::extract_snapshot;
use modq::formats::read_edge_list;
use modq::graph::{build_graph, partition_from_names, DependencyGraph, ModulePartition};
use modq::rng::SeededRng;
use modq::synth::{brute_force_q, planted_partition, random_partition, PlantedPartitionSpec};
use modq::{modularity_q, Execution, GraphMode};

const ORACLE_TOL: f64 = 1e-12;
const FIXTURE_TOL: f64 = 1e-12;
const TELESCOPE_TOL: f64 = 1e-12;
const HAND_STD_TOL: f64 = 1e-6;
const ORACLE_TRIALS: usize = 1000;
const ORACLE_BUDGET: Duration = Duration::from_secs(10);
const FIGURE_BUDGET: Duration = Duration::from_secs(60);

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

/// Random directed graph on `n` nodes named `v0..`, edge probability `p`.
fn random_graph(rng: &mut SeededRng, n: usize, p: f64) -> DependencyGraph {
    let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u != v && rng.bernoulli(p) {
                edges.push((names[u].clone(), names[v].clone()));
            }
        }
    }
    build_graph(edges, &names).unwrap()
}

/// Every q produced by a randomized trial, for the range criterion.
#[derive(Default)]
struct RangeLog {
    count: usize,
    violations: Vec<f64>,
}

impl RangeLog {
    fn record(&mut self, q: f64) {
        self.count += 1;
        if !(-1.0..=1.0).contains(&q) || q.is_nan() {
            self.violations.push(q);
        }
    }
}

fn ac1_oracle(range: &mut RangeLog) -> Outcome {
    let start = Instant::now();
    let mut rng = SeededRng::new(0xAC1);
    let mut worst = 0.0f64;
    let mut nondegenerate = 0;
    for trial in 0..ORACLE_TRIALS {
        let n = 1 + rng.below(8) as usize;
        let p = rng.unit();
        let g = random_graph(&mut rng, n, p);
        let k = 1 + rng.below(4) as usize;
        let part = random_partition(&g, k, trial as u64).unwrap();
        let score = modularity_q(&g, &part, GraphMode::Directed).map_err(|e| e.to_string())?;
        let oracle = brute_force_q(&g, &part, GraphMode::Directed).map_err(|e| e.to_string())?;
        range.record(score.q);
        worst = worst.max((score.q - oracle).abs());
        nondegenerate += usize::from(!score.degenerate);
    }
    let elapsed = start.elapsed();
    check(worst <= ORACLE_TOL, format!("max |Q - oracle| = {worst:e}"))?;
    check(elapsed < ORACLE_BUDGET, format!("took {elapsed:?}"))?;
    Ok(format!(
        "{ORACLE_TRIALS} graphs ({nondegenerate} non-degenerate), max |Q - oracle| = {worst:e}, {elapsed:.2?}"
    ))
}

fn ac2_hand_fixtures() -> Outcome {
    let five = build_graph(
        [("1", "2"), ("2", "1"), ("1", "3"), ("3", "4"), ("4", "3")],
        std::iter::empty::<&str>(),
    )
    .unwrap();
    let five_p =
        ModulePartition::from_assignments([("1", "M1"), ("2", "M1"), ("3", "M2"), ("4", "M2")])
            .unwrap();
    let q5 = modularity_q(&five, &five_p, GraphMode::Directed).unwrap().q;
    check(
        (q5 - 8.0 / 13.0).abs() <= FIXTURE_TOL,
        format!("5-edge q = {q5}"),
    )?;

    let tri = build_graph(
        [
            ("a.T1", "a.T2"),
            ("a.T2", "a.T3"),
            ("a.T1", "a.T3"),
            ("b.T4", "b.T5"),
            ("b.T5", "b.T6"),
            ("b.T4", "b.T6"),
            ("a.T3", "b.T4"),
        ],
        std::iter::empty::<&str>(),
    )
    .unwrap();
    let qt = modularity_q(
        &tri,
        &partition_from_names(&tri, None),
        GraphMode::Undirected,
    )
    .unwrap()
    .q;
    check(
        (qt - 5.0 / 7.0).abs() <= FIXTURE_TOL,
        format!("two-triangle q = {qt}"),
    )?;

    let cross = build_graph([("a.A", "b.B")], std::iter::empty::<&str>()).unwrap();
    let qc = modularity_q(
        &cross,
        &partition_from_names(&cross, None),
        GraphMode::Directed,
    )
    .unwrap();
    check(
        qc.q == 0.0 && !qc.degenerate,
        format!("single cross edge q = {}", qc.q),
    )?;
    Ok(format!(
        "8/13 -> {q5:.12}, 5/7 -> {qt:.12}, cross edge -> {}",
        qc.q
    ))
}

fn ac3_degenerate(range: &mut RangeLog) -> Outcome {
    let mut rng = SeededRng::new(0xAC3);
    let mut nonempty = 0;
    for _ in 0..100 {
        let n = 2 + rng.below(15) as usize;
        let p = 0.05 + 0.95 * rng.unit();
        let g = random_graph(&mut rng, n, p);
        let part =
            ModulePartition::from_assignments(g.nodes().iter().map(|v| (v.as_str(), "only")))
                .unwrap();
        for mode in [GraphMode::Directed, GraphMode::Undirected] {
            let s = modularity_q(&g, &part, mode).unwrap();
            range.record(s.q);
            check(
                s.q == 0.0 && s.degenerate,
                format!("q = {} degenerate = {}", s.q, s.degenerate),
            )?;
        }
        nonempty += usize::from(g.edge_count() > 0);
    }
    Ok(format!(
        "100 single-module graphs ({nonempty} with edges): q = 0, degenerate"
    ))
}

fn ac5_figure_contrast(range: &mut RangeLog) -> Outcome {
    let start = Instant::now();
    let seeds: Vec<u64> = (0..100).collect();
    let modular = PlantedPartitionSpec {
        k: 4,
        s: 25,
        p_in: 0.3,
        p_out: 0.005,
        directed: true,
        seed: 0,
    };
    let modular_q: Vec<f64> = Execution::Parallel.map(&seeds, |&seed| {
        let (g, p) = planted_partition(&modular.with_seed(seed)).unwrap();
        modularity_q(&g, &p, GraphMode::Directed).unwrap().q
    });
    // homogeneous: 200 nodes, p = 0.05, four equal modules unrelated to the edges
    let homogeneous = PlantedPartitionSpec {
        k: 4,
        s: 50,
        p_in: 0.05,
        p_out: 0.05,
        directed: true,
        seed: 0,
    };
    let null_q: Vec<f64> = Execution::Parallel.map(&seeds, |&seed| {
        let (g, p) = planted_partition(&homogeneous.with_seed(1_000 + seed)).unwrap();
        modularity_q(&g, &p, GraphMode::Directed).unwrap().q
    });
    for &q in modular_q.iter().chain(&null_q) {
        range.record(q);
    }
    let above = modular_q.iter().filter(|&&q| q > 0.7).count();
    let mean_null = null_q.iter().sum::<f64>() / null_q.len() as f64;
    let min_mod = modular_q.iter().cloned().fold(f64::INFINITY, f64::min);
    let elapsed = start.elapsed();
    check(
        above >= 95,
        format!("only {above}/100 modular seeds have q > 0.7"),
    )?;
    check(
        mean_null.abs() <= 0.05,
        format!("null mean q = {mean_null}"),
    )?;
    check(elapsed < FIGURE_BUDGET, format!("took {elapsed:?}"))?;
    Ok(format!(
        "modular q > 0.7 in {above}/100 (min {min_mod:.4}); homogeneous mean q = {mean_null:.5}; {elapsed:.2?}"
    ))
}

fn ac6_telescoping() -> Outcome {
    let mut worst = 0.0f64;
    let mut series_count = 0;
    for project in 0..40u64 {
        let len = 2 + (project % 9) as usize;
        let entries: Vec<Snapshot> = (0..len)
            .map(|i| {
                let spec = PlantedPartitionSpec {
                    k: 3,
                    s: 6,
                    p_in: 0.5,
                    p_out: 0.02 * (1 + i) as f64,
                    directed: project % 2 == 0,
                    seed: project * 100 + i as u64,
                };
                let (graph, partition) = planted_partition(&spec).unwrap();
                Snapshot {
                    date: chrono::NaiveDate::from_ymd_opt(2000, 1, 1).unwrap()
                        + chrono::Months::new(i as u32),
                    graph,
                    partition,
                }
            })
            .collect();
        let series = SnapshotSeries::new(format!("p{project}"), entries).unwrap();
        let series = q_series(series, GraphMode::Directed, false, Execution::Parallel).unwrap();
        let stats = delta_stats(&series).unwrap();
        let gap =
            (stats.mean_dq * (stats.n_snapshots - 1) as f64 - (stats.last_q - stats.first_q)).abs();
        worst = worst.max(gap);
        series_count += 1;
    }
    check(worst <= TELESCOPE_TOL, format!("telescoping gap {worst:e}"))?;
    let hand = delta_stats_from_q("hand", &[0.1, 0.4, 0.3]).unwrap();
    check(
        (hand.mean_dq - 0.1).abs() <= TELESCOPE_TOL,
        format!("hand mean {}", hand.mean_dq),
    )?;
    check(
        (hand.std_dq - 0.2828427).abs() <= HAND_STD_TOL,
        format!("hand std {}", hand.std_dq),
    )?;
    Ok(format!(
        "{series_count} series, max gap {worst:e}; hand series mean {:.6} std {:.7}",
        hand.mean_dq, hand.std_dq
    ))
}

fn edge_set(g: &DependencyGraph) -> BTreeSet<(String, String)> {
    g.edges()
        .map(|(s, t)| (s.to_string(), t.to_string()))
        .collect()
}

fn ac7_extractor() -> Outcome {
    let root = fixtures().join("shop");
    let source_files = walk_count(&root);
    check(
        source_files >= 10,
        format!("fixture has only {source_files} files"),
    )?;
    let expected: BTreeSet<(String, String)> = read_edge_list(&fixtures().join("shop.edges"))
        .unwrap()
        .into_iter()
        .map(|r| (r.source, r.target))
        .collect();

    let snap = extract_snapshot(&root, Execution::Parallel).map_err(|e| e.to_string())?;
    let got = edge_set(&snap.graph);
    if got != expected {
        let missing: Vec<_> = expected.difference(&got).collect();
        let extra: Vec<_> = got.difference(&expected).collect();
        return Err(format!("missing {missing:?}, unexpected {extra:?}"));
    }
    check(
        snap.graph.node_count() == 15,
        format!("{} nodes", snap.graph.node_count()),
    )?;
    check(
        !snap
            .graph
            .contains_edge("com.shop.model.Order", "com.shop.model.Order")
            && !snap.graph.contains_edge("Main", "Main"),
        "self-loop emitted",
    )?;
    check(
        snap.graph
            .nodes()
            .iter()
            .all(|n| !n.as_str().starts_with("java.")),
        "external type became a node",
    )?;
    check(
        !snap
            .graph
            .contains_edge("com.shop.service.OrderService", "com.shop.pricing.Discount"),
        "string literal produced an edge",
    )?;
    check(
        !snap
            .graph
            .contains_edge("com.shop.service.OrderService", "com.shop.model.Currency"),
        "comment produced an edge",
    )?;
    check(
        snap.stats.files_skipped == 1,
        format!("{} files skipped", snap.stats.files_skipped),
    )?;
    check(
        snap.stats.ambiguous == 1,
        format!("{} ambiguous", snap.stats.ambiguous),
    )?;

    let again = extract_snapshot(&root, Execution::Sequential).map_err(|e| e.to_string())?;
    check(again == snap, "sequential and parallel extraction differ")?;
    Ok(format!(
        "{source_files} files, {} nodes, {} edges match; 1 unlexable file skipped",
        snap.graph.node_count(),
        got.len()
    ))
}

fn walk_count(dir: &Path) -> usize {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk_count(&p)
            } else {
                1
            }
        })
        .sum()
}

fn modq(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_modq"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!(
            "modq {args:?} exited {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        ))
    }
}

fn read_tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

fn ac8_determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let project = tmp.path().join("project");
    for (i, date) in ["2004-01-01", "2004-02-01", "2004-03-01", "2004-04-01"]
        .iter()
        .enumerate()
    {
        let spec = PlantedPartitionSpec {
            k: 5,
            s: 12,
            p_in: 0.25,
            p_out: 0.01 * (i + 1) as f64,
            directed: true,
            seed: 80 + i as u64,
        };
        run_synth(&spec, &project.join(date)).map_err(|e| e.to_string())?;
        fs::remove_file(project.join(date).join("modules.tsv")).unwrap();
    }

    let mut runs = Vec::new();
    for run in ["a", "b"] {
        let out = tmp.path().join(run);
        fs::create_dir(&out).unwrap();
        let json = out.join("report.json");
        let csv = out.join("series.csv");
        let graphml = out.join("graphml");
        let project_arg = project.to_str().unwrap();
        modq(&[
            "analyze",
            "--snapshots",
            project_arg,
            "--out",
            json.to_str().unwrap(),
            "--csv",
            csv.to_str().unwrap(),
            "--graphml",
            graphml.to_str().unwrap(),
        ])?;
        runs.push((
            fs::read(&json).unwrap(),
            fs::read(&csv).unwrap(),
            read_tree(&graphml),
        ));
    }
    check(runs[0].0 == runs[1].0, "JSON differs between runs")?;
    check(runs[0].1 == runs[1].1, "CSV differs between runs")?;
    check(runs[0].2 == runs[1].2, "GraphML differs between runs")?;
    check(
        runs[0].2.len() == 4,
        format!("{} GraphML files", runs[0].2.len()),
    )?;

    // Shuffle every edge-list's lines and re-analyze.
    let shuffled = tmp.path().join("shuffled");
    let mut rng = SeededRng::new(0xAC8);
    for entry in fs::read_dir(&project).unwrap() {
        let dir = entry.unwrap().path();
        let text = fs::read_to_string(dir.join("edges.tsv")).unwrap();
        let mut lines: Vec<&str> = text.lines().collect();
        for i in (1..lines.len()).rev() {
            lines.swap(i, rng.below(i as u64 + 1) as usize);
        }
        let target = shuffled.join(dir.file_name().unwrap());
        fs::create_dir_all(&target).unwrap();
        fs::write(target.join("edges.tsv"), lines.join("\n") + "\n").unwrap();
    }
    let analyze = |root: &Path| {
        run_analyze(
            &AnalysisConfig {
                snapshots: root.to_owned(),
                project: Some("p".into()),
                ..Default::default()
            },
            Execution::Parallel,
        )
        .unwrap()
    };
    let q_of = |r: &Report| r.snapshots.iter().map(|row| row.q).collect::<Vec<_>>();
    let (orig, shuf) = (analyze(&project), analyze(&shuffled));
    check(q_of(&orig) == q_of(&shuf), "shuffled lines changed q")?;

    // Source-tree input is deterministic too.
    let mut source_runs = Vec::new();
    for run in ["s1", "s2"] {
        let json = tmp.path().join(format!("{run}.json"));
        modq(&[
            "analyze",
            "--format",
            "source",
            "--snapshots",
            fixtures().join("two_file").to_str().unwrap(),
            "--out",
            json.to_str().unwrap(),
        ])?;
        source_runs.push(fs::read(&json).unwrap());
    }
    check(
        source_runs[0] == source_runs[1],
        "source-mode JSON differs between runs",
    )?;
    let report: Report = serde_json::from_slice(&source_runs[0]).map_err(|e| e.to_string())?;
    let row = &report.snapshots[0];
    check(
        (row.nodes, row.edges, row.modules, row.q) == (2, 1, 2, 0.0),
        format!("two-file fixture row {row:?}"),
    )?;
    Ok(format!(
        "JSON/CSV/{} GraphML byte-identical; shuffled q identical; two-file fixture q = 0",
        runs[0].2.len()
    ))
}

fn ac9_grouping() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut reports = Vec::new();
    for project in 0..28u64 {
        let root = tmp.path().join(format!("proj{project:02}"));
        for (i, date) in ["2005-01-01", "2005-02-01", "2005-03-01"]
            .iter()
            .enumerate()
        {
            let spec = PlantedPartitionSpec {
                k: 3,
                s: 8,
                p_in: 0.4,
                p_out: 0.01 + 0.002 * (project as f64) * i as f64,
                directed: true,
                seed: project * 10 + i as u64,
            };
            run_synth(&spec, &root.join(date)).map_err(|e| e.to_string())?;
        }
        let json = tmp.path().join(format!("proj{project:02}.json"));
        run_analyze(
            &AnalysisConfig {
                snapshots: root,
                json_out: Some(json.clone()),
                ..Default::default()
            },
            Execution::Parallel,
        )
        .map_err(|e| e.to_string())?;
        reports.push(json);
    }
    let out = run_rank(&reports, RankKey::Mean, SortOrder::Asc, 4).map_err(|e| e.to_string())?;
    let groups = out.groups.as_ref().ok_or("no groups formed")?;
    let sizes: Vec<usize> = groups.iter().map(Vec::len).collect();
    check(sizes == [7, 7, 7, 7], format!("group sizes {sizes:?}"))?;
    let flat: Vec<usize> = groups.iter().flatten().map(|e| e.rank).collect();
    check(
        flat == (1..=28).collect::<Vec<_>>(),
        "groups break rank order",
    )?;
    let means: Vec<f64> = out
        .ranking
        .entries
        .iter()
        .map(|e| e.stats.mean_dq)
        .collect();
    check(
        means.windows(2).all(|w| w[0] <= w[1]),
        "ranking not ascending",
    )?;
    Ok(format!("28 reports -> groups {sizes:?} in rank order"))
}

fn ac4_range(range: &RangeLog) -> Outcome {
    check(
        range.violations.is_empty(),
        format!(
            "{} of {} q values outside [-1, 1]: {:?}",
            range.violations.len(),
            range.count,
            range.violations
        ),
    )?;
    Ok(format!(
        "{} randomized q values within [-1, 1]",
        range.count
    ))
}

fn main() {
    let mut range = RangeLog::default();
    let ac1 = ac1_oracle(&mut range);
    let ac3 = ac3_degenerate(&mut range);
    let ac5 = ac5_figure_contrast(&mut range);
    let results: Vec<(&str, &str, Outcome)> = vec![
        ("AC1", "Q matches brute-force oracle", ac1),
        ("AC2", "hand fixtures", ac2_hand_fixtures()),
        ("AC3", "degenerate convention", ac3),
        ("AC4", "range property", ac4_range(&range)),
        ("AC5", "modular vs random contrast", ac5),
        ("AC6", "telescoping identity", ac6_telescoping()),
        ("AC7", "extractor ground truth", ac7_extractor()),
        ("AC8", "determinism", ac8_determinism()),
        ("AC9", "grouping", ac9_grouping()),
    ];

    let mut failed = 0;
    for (id, name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("PASS {id} {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {id} {name}: {why}");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        results.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
