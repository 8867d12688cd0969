use characteristica::corpus::{load_corpus, run_fixture};
use characteristica::Oracle;

#[test]
fn every_fixture_replays() {
    let cfg = Oracle::default();
    let mut bad = Vec::new();
    for fx in load_corpus().unwrap() {
        let rep = run_fixture(&fx, &cfg);
        for c in rep.failures() {
            bad.push(format!("{}: {} ({})", rep.id, c.name, c.detail));
        }
        eprintln!("{} {} checks {:.2}s", rep.id, rep.checks.len(), rep.seconds);
    }
    assert!(bad.is_empty(), "failing checks:\n{}", bad.join("\n"));
}
