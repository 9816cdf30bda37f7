//! Runs the full verification suite through the binary and prints one
//! PASS/FAIL line per acceptance criterion. Takes roughly 15 minutes on a
//! single core (the suite runs twice for the determinism criterion).

use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

/// Wall-clock limits in seconds for the criteria that state one.
const TIME_LIMITS: [(u32, f64); 3] = [(1, 60.0), (8, 1200.0), (9, 600.0)];

struct Run {
    code: Option<i32>,
    bytes: Vec<u8>,
    /// Seconds per criterion, parsed from the progress lines on stderr.
    seconds: BTreeMap<u32, f64>,
    total: f64,
}

fn verify_all(out: &Path) -> Run {
    let start = Instant::now();
    let output = Command::new(env!("CARGO_BIN_EXE_robreg"))
        .args(["verify-all", "--seed", "1", "--out"])
        .arg(out)
        .env_remove("ROBREG_SEED")
        .output()
        .expect("spawn robreg");
    let total = start.elapsed().as_secs_f64();
    let stderr = String::from_utf8_lossy(&output.stderr);
    let mut seconds = BTreeMap::new();
    for line in stderr.lines() {
        // "check <id> <name>: <verdict> in <secs>s"
        let Some(rest) = line.strip_prefix("check ") else { continue };
        let id = rest.split_whitespace().next().and_then(|t| t.parse().ok());
        let secs = rest.rsplit(" in ").next().and_then(|t| t.trim_end_matches('s').parse().ok());
        if let (Some(id), Some(secs)) = (id, secs) {
            seconds.insert(id, secs);
        }
    }
    Run { code: output.status.code(), bytes: std::fs::read(out).unwrap_or_default(), seconds, total }
}

fn main() -> ExitCode {
    let dir = tempfile::tempdir().expect("temp dir");
    let first = verify_all(&dir.path().join("first.csv"));
    println!("verify-all --seed 1: exit {:?} in {:.1}s", first.code, first.total);

    let mut reader = csv::Reader::from_reader(first.bytes.as_slice());
    let mut rows = BTreeMap::new();
    for rec in reader.records().flatten() {
        if let Ok(id) = rec[0].parse::<u32>() {
            rows.insert(id, (rec[1].to_string(), &rec[2] == "true", rec[4].to_string()));
        }
    }

    let mut failures = 0;
    for id in 1..=10u32 {
        let Some((name, pass, detail)) = rows.get(&id) else {
            println!("criterion {id:>2}: FAIL (no output row)");
            failures += 1;
            continue;
        };
        let secs = first.seconds.get(&id).copied().unwrap_or(f64::NAN);
        let limit = TIME_LIMITS.iter().find(|l| l.0 == id).map(|l| l.1);
        let in_time = limit.is_none_or(|l| secs < l);
        let ok = *pass && in_time;
        failures += !ok as usize;
        let budget = limit.map(|l| format!(" (limit {l:.0}s)")).unwrap_or_default();
        println!("criterion {id:>2} {name}: {} [{secs:.1}s{budget}] {detail}", if ok { "PASS" } else { "FAIL" });
    }

    let second = verify_all(&dir.path().join("second.csv"));
    let same = !first.bytes.is_empty() && first.bytes == second.bytes && first.code == second.code;
    failures += !same as usize;
    println!(
        "criterion 11 determinism: {} ({} vs {} bytes, second run {:.1}s)",
        if same { "PASS" } else { "FAIL" },
        first.bytes.len(),
        second.bytes.len(),
        second.total
    );

    if failures == 0 && first.code == Some(0) {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}
