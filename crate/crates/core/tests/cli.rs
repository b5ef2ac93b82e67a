//! End-to-end runs of the command-line workflow on simulated samples.

use std::fs::File;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use pdshare::cli::run_from;
use pdshare::metrics::{read_daily_csv, DiscoveryShares};
use tempfile::TempDir;

fn cli(args: &[&str]) -> i32 {
    let mut argv = vec!["pdshare"];
    argv.extend_from_slice(args);
    run_from(argv)
}

/// Writes `scenario` and simulates it; returns the temp dir and the run config.
fn simulated(scenario: &str) -> (TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scenario.toml");
    std::fs::write(&path, scenario).unwrap();
    let data = dir.path().join("data");
    assert_eq!(cli(&["simulate", "--scenario", path.to_str().unwrap(), "--out", data.to_str().unwrap()]), 0);
    (dir, data.join("run.toml"))
}

fn shares(run: &Path) -> Vec<DiscoveryShares> {
    let path = run.parent().unwrap().join("results/daily_shares.csv");
    read_daily_csv(File::open(path).unwrap()).unwrap()
}

fn date(s: &str) -> NaiveDate {
    s.parse().unwrap()
}

#[test]
fn exit_codes() {
    assert_eq!(cli(&["analyze", "--config", "/nonexistent/run.toml"]), 2);
    assert_eq!(cli(&["analyze"]), 2);
    assert_eq!(cli(&["bogus"]), 2);
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "output_dir = 3\n").unwrap();
    assert_eq!(cli(&["analyze", "--config", bad.to_str().unwrap()]), 2);
    let invalid = dir.path().join("scenario.toml");
    std::fs::write(&invalid, "seed = 1\ncommodity = \"corn\"\nstart_date = \"2015-01-05\"\ndays = 0\n").unwrap();
    assert_eq!(cli(&["simulate", "--scenario", invalid.to_str().unwrap()]), 2);
}

#[test]
fn sample_of_250_days_gives_one_row_per_day_and_pair() {
    let (_dir, run) = simulated(
        "seed = 3\ncommodity = \"corn\"\nstart_date = \"2014-01-02\"\ndays = 250\ncontracts = 3\nsession_seconds = 900\n",
    );
    let run = run.to_str().unwrap();
    assert_eq!(cli(&["analyze", "--config", run, "--pairs", "1,2"]), 0);
    let rows = shares(Path::new(run));
    let excluded = std::fs::read_to_string(Path::new(run).parent().unwrap().join("results/excluded_days.csv")).unwrap();
    assert_eq!(rows.len() + excluded.lines().count() - 1, 500);
    for k in [1, 2] {
        assert!(rows.iter().filter(|r| r.pair_index == k).count() >= 240);
    }
}

#[test]
fn pairs_flag_and_json_output() {
    let (_dir, run) = simulated(
        "seed = 4\ncommodity = \"corn\"\nstart_date = \"2015-03-02\"\ndays = 40\ncontracts = 3\nsession_seconds = 1800\n",
    );
    let run_s = run.to_str().unwrap();
    assert_eq!(cli(&["analyze", "--config", run_s, "--pairs", "2"]), 0);
    assert!(shares(&run).iter().all(|r| r.pair_index == 2));
    assert_eq!(cli(&["analyze", "--config", run_s, "--pairs", "7"]), 2);
    let out = run.parent().unwrap().join("json");
    assert_eq!(cli(&["rollpoint", "--config", run_s, "--pairs", "2", "--format", "json", "--out", out.to_str().unwrap()]), 0);
    let text = std::fs::read_to_string(out.join("rollpoints.json")).unwrap();
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!(value.is_array() || value.is_object());
}

#[test]
fn backwardation_flag_round_trips() {
    let (_dir, run) = simulated(
        r#"
        seed = 5
        commodity = "corn"
        start_date = "2015-03-02"
        days = 30
        session_seconds = 900

        [[backwardation]]
        start = "2015-03-16"
        end = "2015-03-27"
        "#,
    );
    assert_eq!(cli(&["analyze", "--config", run.to_str().unwrap()]), 0);
    let rows = shares(&run);
    assert_eq!(rows.len(), 30);
    for r in rows {
        let inside = (date("2015-03-16")..=date("2015-03-27")).contains(&r.session_date);
        assert_eq!(r.backwardation, inside, "{}", r.session_date);
    }
}

#[test]
fn volume_migrates_to_the_deferred_contract() {
    let (_dir, run) = simulated(
        "seed = 6\ncommodity = \"corn\"\nstart_date = \"2015-01-05\"\ndays = 50\nsession_seconds = 900\n",
    );
    assert_eq!(cli(&["analyze", "--config", run.to_str().unwrap()]), 0);
    // The first nearby period (March contract) ends on its expiration.
    let rows: Vec<_> = shares(&run).into_iter().filter(|r| r.session_date <= date("2015-03-13")).collect();
    assert!(rows.len() > 40);
    assert!(rows.windows(2).all(|w| w[1].volume_share <= w[0].volume_share));
    assert!(rows.first().unwrap().volume_share > 0.5);
    assert!(rows.last().unwrap().volume_share < 0.5);
}

#[test]
fn cattle_template_drops_absent_cattle_on_feed() {
    let (_dir, run) = simulated(
        r#"
        seed = 7
        commodity = "live_cattle"
        start_date = "2015-01-05"
        days = 60
        session_seconds = 900
        "#,
    );
    let run = run.to_str().unwrap();
    assert_eq!(cli(&["analyze", "--config", run]), 0);
    assert_eq!(cli(&["regress", "--config", run]), 0);
    let results = Path::new(run).parent().unwrap().join("results");
    let log = std::fs::read_to_string(results.join("regression_log.txt")).unwrap();
    assert!(log.contains("LE pair 1: CF is constant over the sample and was dropped"), "{log}");
    let table = std::fs::read_to_string(results.join("regression.csv")).unwrap();
    assert!(table.lines().any(|l| l.starts_with("Volumeshare,")));
    assert!(!table.lines().any(|l| l.starts_with("CF,")));
}
