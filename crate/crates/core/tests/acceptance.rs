//! Acceptance criteria 1-10. Runs without the libtest harness so every
//! criterion prints exactly one `PASS`/`FAIL` line; exits non-zero on any FAIL.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{Duration, Instant};

use chrono::NaiveDate;
use pdshare::econ::RankCategory;
use pdshare::market_data::{BusinessCalendar, Commodity, RollCalendar};
use pdshare::metrics::{
    cholesky_2x2, component_share, daily_pipeline, estimate_day, gs_share, information_leadership_share,
    information_share, DiscoveryShares, PipelineConfig,
};
use pdshare::regression::{build_design, estimate, EventCalendar, Template};
use pdshare::synthetic::{simulate_day, ScenarioConfig, StructuralConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn random_sigma(rng: &mut ChaCha8Rng) -> [[f64; 2]; 2] {
    let s1: f64 = rng.random_range(0.01..2.0);
    let s2: f64 = rng.random_range(0.01..2.0);
    let rho: f64 = rng.random_range(-0.99..0.99);
    [[s1 * s1, rho * s1 * s2], [rho * s1 * s2, s2 * s2]]
}

fn share_identities() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst_sum = 0.0f64;
    let mut out_of_range = 0;
    for _ in 0..1000 {
        let alpha = [rng.random_range(-1.0..0.0), rng.random_range(1e-6..1.0)];
        let sigma = random_sigma(&mut rng);
        let cs = component_share(alpha).expect("distinct alphas");
        let is = information_share(sigma, cs).expect("positive definite");
        let ils = information_leadership_share([is.is1, is.is2], cs).expect("defined");
        for pair in [cs, [is.is1, is.is2], ils] {
            worst_sum = worst_sum.max((pair[0] + pair[1] - 1.0).abs());
            out_of_range += pair.iter().filter(|v| !(0.0..=1.0).contains(*v)).count();
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst_sum <= 1e-12 && out_of_range == 0 && elapsed < Duration::from_secs(1),
        format!("max |sum-1| = {worst_sum:.1e}, {out_of_range} out of [0,1], {elapsed:.2?}"),
    )
}

fn cholesky_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let sigma = random_sigma(&mut rng);
        let m = cholesky_2x2(sigma).expect("positive definite");
        for i in 0..2 {
            for j in 0..2 {
                let mmt = m[i][0] * m[j][0] + m[i][1] * m[j][1];
                worst = worst.max((mmt - sigma[i][j]).abs());
            }
        }
    }
    outcome(worst <= 1e-12, format!("max |MM'-S| = {worst:.1e}"))
}

fn structural(seed: u64, delays: [u32; 2], sigma_s: [f64; 2], t: u32) -> StructuralConfig {
    StructuralConfig { seed, delays, sigma_s, session_seconds: t, ..Default::default() }
}

fn leadership_recovery() -> Outcome {
    let start = Instant::now();
    let days: Vec<DiscoveryShares> = (0..100u64)
        .into_par_iter()
        .map(|seed| {
            let day = simulate_day(&structural(3_000 + seed, [0, 5], [0.05, 0.05], 23_400)).unwrap();
            daily_pipeline(&day.pair(), &PipelineConfig::default()).expect("estimable")
        })
        .collect();
    let elapsed = start.elapsed();
    let ils: Vec<f64> = days.iter().filter(|d| d.category == RankCategory::Cointegration).filter_map(|d| d.ils1).collect();
    let m = mean(&ils);
    outcome(
        ils.len() >= 90 && m >= 0.8 && elapsed < Duration::from_secs(120),
        format!("{} cointegrated days, mean ils1 = {m:.3}, {elapsed:.1?}", ils.len()),
    )
}

fn noise_robustness() -> Outcome {
    let sigma1 = 0.05;
    let rows: Vec<(f64, f64)> = (0..200u64)
        .into_par_iter()
        .filter_map(|seed| {
            let day = simulate_day(&structural(4_000 + seed, [0, 0], [sigma1, 3.0 * sigma1], 23_400)).unwrap();
            let (p1, p2) = day.pair().series();
            let est = estimate_day(&p1, &p2, &PipelineConfig::default()).ok()?;
            Some((est.ils?[0], est.is?.is1_first))
        })
        .collect();
    let ils = mean(&rows.iter().map(|r| r.0).collect::<Vec<_>>());
    let is_first = mean(&rows.iter().map(|r| r.1).collect::<Vec<_>>());
    outcome(
        (0.4..=0.6).contains(&ils) && is_first > 0.55,
        format!("{} days, mean ils1 = {ils:.3}, mean single-ordering is1 = {is_first:.3}", rows.len()),
    )
}

fn gs_oracle() -> Outcome {
    let beta = [0.1, 0.3];
    let fits: Vec<_> = (0..100u64)
        .into_par_iter()
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(5_000 + seed);
            let z = Normal::new(0.0, 1.0).unwrap();
            let (mut p1, mut p2) = (vec![100.0], vec![100.0]);
            for t in 1..20_000 {
                let (a, b) = (p1[t - 1], p2[t - 1]);
                p1.push((1.0 - beta[0]) * a + beta[0] * b + z.sample(&mut rng));
                p2.push(beta[1] * a + (1.0 - beta[1]) * b + z.sample(&mut rng));
            }
            gs_share(&p1, &p2).unwrap()
        })
        .collect();
    let gs: Vec<f64> = fits.iter().filter_map(|f| f.gs1().ok()).collect();
    let truncated = fits.iter().filter(|f| f.truncated.iter().any(|&t| t)).count();
    let m = mean(&gs);
    outcome(
        (m - 0.75).abs() <= 0.05 && gs.len() == 100 && truncated <= 5,
        format!("mean gs1 = {m:.4}, truncation in {truncated}/100"),
    )
}

fn johansen_calibration() -> Outcome {
    let t = 5_000;
    let cfg = PipelineConfig::default();
    let classify = |p1: &[f64], p2: &[f64]| estimate_day(p1, p2, &cfg).map(|e| e.category()).ok();
    let walk = |rng: &mut ChaCha8Rng| {
        let z = Normal::new(0.0, 1.0).unwrap();
        let mut level = 0.0;
        (0..t).map(|_| {
            level += z.sample(rng);
            level
        })
        .collect::<Vec<f64>>()
    };
    let white = |rng: &mut ChaCha8Rng| {
        let z = Normal::new(0.0, 1.0).unwrap();
        (0..t).map(|_| z.sample(rng)).collect::<Vec<f64>>()
    };
    let rate = |target: RankCategory, make: &(dyn Fn(u64) -> (Vec<f64>, Vec<f64>) + Sync)| {
        let hits = (0..500u64)
            .into_par_iter()
            .filter(|&seed| {
                let (p1, p2) = make(seed);
                classify(&p1, &p2) == Some(target)
            })
            .count();
        hits as f64 / 500.0
    };
    let walks = rate(RankCategory::NonCointegration, &|seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(6_000 + seed);
        (walk(&mut rng), walk(&mut rng))
    });
    let structural_pairs = rate(RankCategory::Cointegration, &|seed| {
        simulate_day(&structural(7_000 + seed, [0, 2], [0.05, 0.05], t as u32)).unwrap().pair().series()
    });
    let noise = rate(RankCategory::Stationarity, &|seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(8_000 + seed);
        (white(&mut rng), white(&mut rng))
    });
    outcome(
        walks >= 0.9 && structural_pairs >= 0.9 && noise >= 0.9,
        format!(
            "random walks -> NonCointegration {:.1}%, structural -> Cointegration {:.1}%, white noise -> Stationarity {:.1}%",
            100.0 * walks,
            100.0 * structural_pairs,
            100.0 * noise
        ),
    )
}

fn regression_recovery() -> Outcome {
    let scenario = ScenarioConfig::from_toml(
        r#"
        seed = 77
        commodity = "corn"
        start_date = "2008-01-02"
        days = 1900

        [volume]
        slope = 0.02
        share_noise_sd = 0.1

        [[backwardation]]
        start = "2009-03-02"
        end = "2009-06-30"

        [[crash]]
        start = "2008-07-03"
        end = "2008-12-08"
        "#,
    )
    .unwrap();
    let plans = scenario.plan().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7_700);
    let noise = Normal::new(0.0, 0.05).unwrap();
    let rows: Vec<DiscoveryShares> = plans
        .iter()
        .map(|p| {
            let ps = 0.1 + 0.7 * p.volume_share - if p.crash { 0.05 } else { 0.0 } + noise.sample(&mut rng);
            DiscoveryShares {
                session_date: p.date,
                commodity: "ZC".into(),
                pair_index: 1,
                category: RankCategory::Cointegration,
                gs1: None,
                cs1: None,
                is1: None,
                ils1: Some(ps),
                combined_ps: Some(ps),
                volume_share: p.volume_share,
                days_to_expiration: p.days_to_expiration,
                backwardation: p.backwardation,
                reasons: vec![],
            }
        })
        .collect();
    let mut calendar = EventCalendar::new(scenario.business_calendar());
    for c in &scenario.crash {
        calendar.add_crash_window(c.start, c.end);
    }
    let design = build_design(&rows, &calendar, &Template::Corn.regressors()).unwrap();
    let result = estimate(&design).unwrap();
    let vs = result.coefficient("Volumeshare").unwrap();
    let crash = result.coefficient("Crash").unwrap();
    let finite = result.coefficients.iter().all(|c| c.std_error.is_finite() && c.std_error > 0.0);
    outcome(
        (vs.estimate - 0.7).abs() <= 0.05 && (crash.estimate + 0.05).abs() <= 0.03 && finite && result.n_obs == 1900,
        format!(
            "Volumeshare {:.3}{} ({:.3}), Crash {:.3}{} ({:.3}), n = {}, bandwidth {}",
            vs.estimate, vs.stars, vs.std_error, crash.estimate, crash.stars, crash.std_error, result.n_obs, result.bandwidth
        ),
    )
}

const GRADIENT_SCENARIO: &str = r#"
seed = 2024
commodity = "corn"
start_date = "2015-01-05"
days = 30
contracts = 5
session_seconds = 7200

[legs]
delays = [0, 1, 2, 3, 4]
"#;

fn run_cli(args: &[&str]) -> i32 {
    let mut argv = vec!["pdshare"];
    argv.extend_from_slice(args);
    pdshare::cli::run_from(argv)
}

fn term_structure(dir: &Path) -> Outcome {
    let scenario = dir.join("gradient.toml");
    std::fs::write(&scenario, GRADIENT_SCENARIO).unwrap();
    let data = dir.join("data");
    let sim = run_cli(&["simulate", "--scenario", scenario.to_str().unwrap(), "--out", data.to_str().unwrap()]);
    let run = data.join("run.toml");
    let ana = run_cli(&["analyze", "--config", run.to_str().unwrap(), "--pairs", "1,2,3,4"]);
    if sim != 0 || ana != 0 {
        return outcome(false, format!("simulate exit {sim}, analyze exit {ana}"));
    }
    let text = std::fs::read_to_string(data.join("results/summary_pairs.csv")).unwrap();
    let means: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(7).unwrap().parse::<f64>().unwrap())
        .collect();
    let increasing = means.len() == 4 && means.windows(2).all(|w| w[0] < w[1]);
    let shown: Vec<String> = means.iter().map(|m| format!("{m:.3}")).collect();
    outcome(increasing, format!("mean combined PS by pair: {}", shown.join(" < ")))
}

fn roll_point(dir: &Path) -> Outcome {
    let business = BusinessCalendar::default();
    let start = NaiveDate::from_ymd_opt(2015, 1, 5).unwrap();
    let end = NaiveDate::from_ymd_opt(2015, 7, 14).unwrap();
    let days = business.business_days_between(start.pred_opt().unwrap(), end);
    let scenario = dir.join("roll.toml");
    std::fs::write(
        &scenario,
        format!(
            "seed = 15\ncommodity = \"corn\"\nstart_date = \"{start}\"\ndays = {days}\nsession_seconds = 1800\n\n[volume]\nroll_dte = 15\nslope = 0.03\n"
        ),
    )
    .unwrap();
    let data = dir.join("data");
    let run = data.join("run.toml");
    let codes = [
        run_cli(&["simulate", "--scenario", scenario.to_str().unwrap(), "--out", data.to_str().unwrap()]),
        run_cli(&["analyze", "--config", run.to_str().unwrap()]),
        run_cli(&["rollpoint", "--config", run.to_str().unwrap()]),
    ];
    if codes.iter().any(|&c| c != 0) {
        return outcome(false, format!("exit codes {codes:?}"));
    }
    let roll = RollCalendar::new(&Commodity::corn(), &business, start, end);
    let mut expected = BTreeMap::new();
    for d in business.business_days_from(start, days as usize) {
        if roll.days_to_expiration(d) == Some(15) {
            expected.insert(roll.nearby(d).unwrap().to_string(), d.to_string());
        }
    }
    let text = std::fs::read_to_string(data.join("results/rollpoints.csv")).unwrap();
    let mut matched = 0;
    let mut mismatches = Vec::new();
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        match expected.get(f[2]) {
            Some(date) if date == f[4] => matched += 1,
            other => mismatches.push(format!("{}: got {} expected {:?}", f[2], f[4], other)),
        }
    }
    outcome(
        mismatches.is_empty() && matched == expected.len() && matched >= 3,
        format!("{matched}/{} contract months rolled at 15 business days {}", expected.len(), mismatches.join("; ")),
    )
}

fn tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    out
}

fn determinism(dir: &Path) -> Outcome {
    let scenario = dir.join("desk.toml");
    std::fs::write(&scenario, GRADIENT_SCENARIO.replace("days = 30", "days = 12")).unwrap();
    let mut trees = Vec::new();
    for run in ["a", "b"] {
        let data = dir.join(run);
        let cfg = data.join("run.toml");
        let cfg = cfg.to_str().unwrap();
        let codes = [
            run_cli(&["simulate", "--scenario", scenario.to_str().unwrap(), "--out", data.to_str().unwrap()]),
            run_cli(&["analyze", "--config", cfg]),
            run_cli(&["regress", "--config", cfg, "--format", "json"]),
            run_cli(&["rollpoint", "--config", cfg]),
        ];
        if codes.iter().any(|&c| c != 0) {
            return outcome(false, format!("run {run} exit codes {codes:?}"));
        }
        trees.push(tree(&data));
    }
    let differing: Vec<&String> = trees[0].iter().filter(|(k, v)| trees[1].get(*k) != Some(v)).map(|(k, _)| k).collect();
    outcome(
        trees[0].len() == trees[1].len() && differing.is_empty(),
        format!("{} files compared, {} differ", trees[0].len(), differing.len()),
    )
}

fn main() {
    let tmp = tempfile::tempdir().expect("temp dir");
    let sub = |name: &str| {
        let p = tmp.path().join(name);
        std::fs::create_dir_all(&p).unwrap();
        p
    };
    let (d8, d9, d10) = (sub("ac8"), sub("ac9"), sub("ac10"));
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("share identities", Box::new(share_identities)),
        ("Cholesky correctness", Box::new(cholesky_correctness)),
        ("leadership recovery", Box::new(leadership_recovery)),
        ("noise robustness", Box::new(noise_robustness)),
        ("GS oracle", Box::new(gs_oracle)),
        ("Johansen calibration", Box::new(johansen_calibration)),
        ("regression recovery", Box::new(regression_recovery)),
        ("term-structure monotonicity", Box::new(move || term_structure(&d8))),
        ("roll-point detection", Box::new(move || roll_point(&d9))),
        ("determinism", Box::new(move || determinism(&d10))),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!(
            "{} criterion {:>2} {name}: {} [{:.1?}]",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail,
            started.elapsed()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
