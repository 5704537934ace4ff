//! Hosting a metric in another process through the JSON line protocol.
//!
//! The child prints `{"ready": true}`, reads one request per line and answers
//! each with `{"id": ..., "score": ...}`. Here a small Python program scores
//! candidates by token overlap with the reference.

use std::time::Duration;

use dialectkit::conditions::request_id;
use dialectkit::metrics::{score_subprocess, MetricRequest, SubprocessConfig};
use dialectkit::Condition;

const SCORER: &str = r#"
import json, sys
print(json.dumps({"ready": True}), flush=True)
for line in sys.stdin:
    r = json.loads(line)
    c, ref = set(r["candidate"].split()), set((r.get("reference") or "").split())
    print(json.dumps({"id": r["id"], "score": len(c & ref) / max(len(c | ref), 1)}))
"#;

pub fn run_example() -> dialectkit::Result<()> {
    let dir = std::env::temp_dir().join(format!("dialectkit-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| dialectkit::Error::io(&dir, e))?;
    let script = dir.join("jaccard.py");
    std::fs::write(&script, SCORER).map_err(|e| dialectkit::Error::io(&script, e))?;

    let base = "she is working in the office since morning";
    let requests = vec![
        MetricRequest::new(request_id("ex1", &Condition::dialect()), "she has been working in the office since morning")
            .with_reference(base),
        MetricRequest::new(request_id("ex1", &Condition::perturb()), "she is working in the garden since morning")
            .with_reference(base),
    ];
    let config = SubprocessConfig {
        timeout: Duration::from_secs(30),
        shards: 2,
        ..SubprocessConfig::new(format!("python3 {}", script.display()))
    };
    let records = score_subprocess("jaccard", &requests, &config);
    let _ = std::fs::remove_dir_all(&dir);
    for r in records? {
        println!("{} {} {:.4}", r.example_id, r.condition, r.score);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> dialectkit::Result<()> {
    run_example()
}
