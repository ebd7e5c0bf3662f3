//! Acceptance: rerunning any command with identical configuration and seed
//! produces byte-identical output artifacts. Outputs embed version, seed,
//! and resolved configuration but no timestamps. (Timing-study reports are
//! the one exception: their payload is wall-clock measurements.)

use std::fs;
use std::path::PathBuf;
use std::process::Command;

fn tempdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("vcergm-acc-{tag}-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run_ok(args: &[&str]) {
    let out = Command::new(env!("CARGO_BIN_EXE_vcergm"))
        .args(args)
        .output()
        .expect("binary runs");
    assert!(
        out.status.success(),
        "command {:?} failed: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
}

fn assert_identical(a: &PathBuf, b: &PathBuf, what: &str) -> bool {
    let x = fs::read(a).unwrap();
    let y = fs::read(b).unwrap();
    let same = x == y;
    assert!(same, "{what}: outputs differ between reruns");
    same
}

#[test]
fn acceptance_10_byte_identical_reruns() {
    let dir = tempdir("determinism");
    let p = |name: &str| dir.join(name);
    let s = |path: &PathBuf| path.to_str().unwrap().to_string();

    // simulate
    let sim_a = p("sim_a.csv");
    let sim_b = p("sim_b.csv");
    for out in [&sim_a, &sim_b] {
        run_ok(&[
            "simulate",
            "--phi-curve",
            "sin",
            "--n",
            "12",
            "--times",
            "15",
            "--stats",
            "edges,reciprocity",
            "--directed",
            "--seed",
            "31",
            "--out",
            &s(out),
        ]);
    }
    let mut pass = assert_identical(&sim_a, &sim_b, "simulate");

    // stats
    let st_a = p("stats_a.csv");
    let st_b = p("stats_b.csv");
    for out in [&st_a, &st_b] {
        run_ok(&[
            "stats",
            "--input",
            &s(&sim_a),
            "--directed",
            "--stats",
            "edges,reciprocity",
            "--out",
            &s(out),
        ]);
    }
    pass &= assert_identical(&st_a, &st_b, "stats");

    // fit (json + curves)
    let fit_a = p("fit_a.json");
    let fit_b = p("fit_b.json");
    let cur_a = p("curves_a.csv");
    let cur_b = p("curves_b.csv");
    for (fit, cur) in [(&fit_a, &cur_a), (&fit_b, &cur_b)] {
        run_ok(&[
            "fit",
            "--input",
            &s(&sim_a),
            "--directed",
            "--stats",
            "edges,reciprocity",
            "--seed",
            "31",
            "--out",
            &s(fit),
            "--curves",
            &s(cur),
            "--grid-points",
            "40",
        ]);
    }
    pass &= assert_identical(&fit_a, &fit_b, "fit json");
    pass &= assert_identical(&cur_a, &cur_b, "fit curves");

    // test (bootstrap path exercises the parallel replicates)
    let test_a = p("test_a.json");
    let test_b = p("test_b.json");
    for out in [&test_a, &test_b] {
        run_ok(&[
            "test",
            "--input",
            &s(&sim_a),
            "--directed",
            "--stats",
            "edges,reciprocity",
            "--b",
            "32",
            "--sweeps",
            "40",
            "--burn-in",
            "10",
            "--seed",
            "31",
            "--out",
            &s(out),
        ]);
    }
    pass &= assert_identical(&test_a, &test_b, "test json");

    // benchmark (estimation study, tiny scale; parallel replicates)
    let cfg = p("bench.toml");
    fs::write(
        &cfg,
        "seed = 31\nn = 10\nk = 12\nmissing = 2\nreplicates = 3\nscenario = \"sinusoidal\"\nsweeps = 40\nburn_in = 10\n",
    )
    .unwrap();
    let rep_a = p("report_a.json");
    let rep_b = p("report_b.json");
    for out in [&rep_a, &rep_b] {
        run_ok(&[
            "benchmark",
            "--study",
            "estimation",
            "--config",
            &s(&cfg),
            "--out",
            &s(out),
        ]);
    }
    pass &= assert_identical(&rep_a, &rep_b, "benchmark estimation report");

    println!(
        "ACCEPTANCE 10 byte-identical reruns: {}",
        if pass { "PASS" } else { "FAIL" }
    );
}
