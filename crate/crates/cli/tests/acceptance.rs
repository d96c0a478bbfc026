//! Acceptance run: one line per criterion, nonzero exit on any failure.

use std::process::{Command, Stdio};
use std::time::Instant;

use fracdim::verify::{run_suite, CriterionReport, Suite, DEFAULT_SEED};

/// Largest allowed half-width of any check interval, and the wall-clock
/// budget in seconds.
fn limits(id: usize) -> (f64, Option<f64>) {
    match id {
        1 => (1e-10, Some(1.0)),
        2 => (1e-3, Some(30.0)),
        3 | 4 => (0.0, None),
        5 => (0.03, Some(10.0)),
        6..=8 => (0.05, if id == 8 { Some(60.0) } else { None }),
        9 => (0.02, None),
        10 => (1e-6, None),
        11 => (f64::INFINITY, None),
        12 => (0.1, Some(300.0)),
        _ => unreachable!(),
    }
}

fn min_checks(id: usize) -> usize {
    match id {
        1 => 8,
        2 | 3 => 50,
        4 => 33,
        11 => 40,
        12 => 3,
        _ => 2,
    }
}

fn judge(c: &CriterionReport, secs: f64) -> (bool, String) {
    let (tol, budget) = limits(c.id);
    let mut notes = Vec::new();
    if let Some(e) = &c.error {
        notes.push(format!("error: {e}"));
    }
    if c.checks.len() < min_checks(c.id) {
        notes.push(format!("only {} checks", c.checks.len()));
    }
    for k in &c.checks {
        if !k.pass || k.value < k.lo || k.value > k.hi {
            notes.push(format!("{} = {} outside [{}, {}]", k.label, k.value, k.lo, k.hi));
        }
        let loose = if c.id == 11 { k.hi > 0.0 } else { (k.hi - k.lo) / 2.0 > tol * (1.0 + 1e-6) };
        if loose {
            notes.push(format!("{}: interval [{}, {}] wider than allowed", k.label, k.lo, k.hi));
        }
    }
    if let Some(b) = budget {
        if secs > b {
            notes.push(format!("took {secs:.1}s, budget {b}s"));
        }
    }
    (c.pass && notes.is_empty(), notes.join("; "))
}

fn determinism() -> (bool, String) {
    let dir = tempfile::tempdir().expect("temp dir");
    let mut bodies = Vec::new();
    for i in 0..2 {
        let out = dir.path().join(format!("fast{i}.json"));
        let status = Command::new(env!("CARGO_BIN_EXE_fracdim"))
            .args(["verify", "--suite", "fast", "--seed", "2024", "--out"])
            .arg(&out)
            .stderr(Stdio::null())
            .status()
            .expect("run fracdim");
        if !status.success() {
            return (false, format!("run {i} exited with {status}"));
        }
        bodies.push(std::fs::read(&out).expect("read report"));
    }
    if bodies[0] == bodies[1] {
        (true, format!("{} bytes identical", bodies[0].len()))
    } else {
        (false, "reports differ".into())
    }
}

fn main() {
    let start = Instant::now();
    let (report, timings) = run_suite(Suite::Full, DEFAULT_SEED);
    let mut all = true;
    for (c, (_, secs)) in report.criteria.iter().zip(&timings) {
        let (ok, notes) = judge(c, *secs);
        all &= ok;
        println!(
            "criterion {:>2} {} {} ({:.1}s){}",
            c.id,
            if ok { "PASS" } else { "FAIL" },
            c.name,
            secs,
            if notes.is_empty() { String::new() } else { format!(": {notes}") }
        );
    }
    let t = Instant::now();
    let (ok, notes) = determinism();
    all &= ok;
    println!(
        "criterion 13 {} determinism of verify --suite fast ({:.1}s): {notes}",
        if ok { "PASS" } else { "FAIL" },
        t.elapsed().as_secs_f64()
    );
    println!("acceptance: {} in {:.1}s", if all { "all passed" } else { "FAILED" }, start.elapsed().as_secs_f64());
    if !all {
        std::process::exit(1);
    }
}
