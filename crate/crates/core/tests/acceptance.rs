//! One PASS/FAIL line per criterion. The process fails on any outcome other
//! than the recorded one: every check passes except the square-window
//! intersection in criterion 9, which must fail with exactly one extra
//! dimension spanned by a·t^top.

use detgerbe::acceptance::{run_all, Config, KNOWN_FAILURE};

fn main() {
    let reports = run_all(&Config::default());
    let mut unexpected = Vec::new();
    for r in &reports {
        println!("{}", r.line());
        for c in &r.checks {
            println!("    [{}] {}: {}", if c.pass { "ok" } else { "FAIL" }, c.name, c.detail);
            let known = (r.id, c.name.as_str()) == KNOWN_FAILURE;
            if c.pass == known {
                unexpected.push(format!("criterion {} / {}", r.id, c.name));
            }
        }
        if r.elapsed > r.limit {
            unexpected.push(format!("criterion {} over its time limit", r.id));
        }
    }
    let nine = reports.iter().find(|r| r.id == KNOWN_FAILURE.0).unwrap();
    let obs = |k: &str| nine.observables.iter().find(|(n, _)| n == k).map(|(_, v)| v.as_str());
    if obs("intersection excess") != Some("1") || obs("excess is a·t^top") != Some("true") {
        unexpected.push("criterion 9 discrepancy is not the single a·t^top direction".into());
    }
    let passed = reports.iter().filter(|r| r.pass()).count();
    println!("{passed}/{} criteria pass", reports.len());
    if !unexpected.is_empty() {
        eprintln!("unexpected: {unexpected:?}");
        std::process::exit(1);
    }
}
