//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Run with `cargo test -p qad-core --test acceptance -- --nocapture`.

use std::time::{Duration, Instant};

use qad_core::suite::{run_groups, SuiteConfig};
use qad_core::TruncationSpec;

const SEED: u64 = 20_240_611;

struct Outcome {
    criterion: usize,
    title: &'static str,
    checks: usize,
    failed: Vec<String>,
    worst: f64,
    elapsed: Duration,
    budget: Option<Duration>,
}

impl Outcome {
    fn pass(&self) -> bool {
        self.checks > 0 && self.failed.is_empty() && self.budget.is_none_or(|b| self.elapsed < b)
    }

    fn line(&self) -> String {
        let verdict = if self.pass() { "PASS" } else { "FAIL" };
        let budget = match self.budget {
            Some(b) => format!(" (limit {:.0} s)", b.as_secs_f64()),
            None => String::new(),
        };
        let mut s = format!(
            "criterion {:>2} {verdict}: {} | {} checks, worst residual/tol {:.2e}, {:.2} s{budget}",
            self.criterion,
            self.title,
            self.checks,
            self.worst,
            self.elapsed.as_secs_f64(),
        );
        for f in &self.failed {
            s.push_str(&format!("\n    failed: {f}"));
        }
        s
    }
}

fn window(lo: i64, hi: i64) -> TruncationSpec {
    TruncationSpec::Window { jmin: lo, jmax: hi }
}

fn run(criterion: usize, title: &'static str, groups: &[&str], cfg: SuiteConfig, budget: Option<Duration>) -> Outcome {
    let start = Instant::now();
    let out = run_groups(groups, &cfg).expect("groups run");
    let elapsed = start.elapsed();
    let mut failed: Vec<String> = out
        .lines
        .iter()
        .filter(|l| !l.pass)
        .map(|l| l.identity.clone())
        .collect();
    failed.dedup();
    let worst = out
        .lines
        .iter()
        .map(|l| if l.tol > 0.0 { l.residual.relative / l.tol } else { 0.0 })
        .fold(0.0, f64::max);
    Outcome {
        criterion,
        title,
        checks: out.lines.len(),
        failed,
        worst,
        elapsed,
        budget,
    }
}

fn cfg(samples: usize, trunc: TruncationSpec) -> SuiteConfig {
    SuiteConfig {
        samples,
        seed: SEED,
        trunc,
        ..SuiteConfig::default()
    }
}

fn determinism() -> Outcome {
    let start = Instant::now();
    let c = cfg(2, window(-6, 6));
    let a = run_groups(&["all"], &c).expect("first run").to_json_lines();
    let b = run_groups(&["all"], &c).expect("second run").to_json_lines();
    let lines = a.lines().count();
    let failed = if a == b && lines > 0 {
        Vec::new()
    } else {
        vec!["reports differ".to_string()]
    };
    Outcome {
        criterion: 10,
        title: "verify all twice with one seed gives identical reports",
        checks: lines,
        failed,
        worst: 0.0,
        elapsed: start.elapsed(),
        budget: None,
    }
}

#[test]
fn acceptance_criteria() {
    let outcomes = vec![
        run(
            1,
            "oscillator, Borel and Serre relations on [-8,8]",
            &["relations"],
            cfg(20, window(-8, 8)),
            Some(Duration::from_secs(10)),
        ),
        run(
            2,
            "R-bar and L intertwining",
            &["rbar", "intertwining"],
            cfg(20, window(-6, 6)),
            None,
        ),
        run(
            3,
            "Yang-Baxter RLL = LLR and the degenerate case",
            &["yb"],
            cfg(20, window(-6, 6)),
            None,
        ),
        run(
            4,
            "inverse and crossing on [-4,4]",
            &["inverse", "crossing"],
            cfg(20, window(-4, 4)),
            None,
        ),
        run(
            5,
            "fusion exactness and fused L",
            &["fusion"],
            cfg(10, window(-6, 6)),
            None,
        ),
        run(
            6,
            "defect-defect series, functional equation and RLL",
            &["ddrll"],
            cfg(20, window(-6, 6)),
            None,
        ),
        run(
            7,
            "commuting transfer matrices and H vs log-derivative, N=4 on [-4,4]",
            &["commute", "hvslogt"],
            cfg(5, window(-4, 4)),
            Some(Duration::from_secs(60)),
        ),
        run(
            8,
            "sine-Gordon S, STT, finite truncation and UTT",
            &["smatrix", "stt", "utt", "sgfinite"],
            cfg(20, window(-6, 6)),
            None,
        ),
        run(
            9,
            "finite-spin truncations for n = 0, 1, 2",
            &["isomorphism"],
            cfg(20, window(-6, 6)),
            None,
        ),
        determinism(),
    ];
    println!();
    for o in &outcomes {
        println!("{}", o.line());
    }
    let failed: Vec<usize> = outcomes.iter().filter(|o| !o.pass()).map(|o| o.criterion).collect();
    assert!(failed.is_empty(), "criteria failed: {failed:?}");
}
