use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::structural::{check_leg_common, simulate_legs, Leg, Session};
use super::SyntheticError;
use crate::market_data::{
    write_ticks, BusinessCalendar, Commodity, ContractId, Price, RollCalendar, SessionWindow,
};
use crate::regression::ReportType;

/// A preset name (`corn`, `live_cattle`) or a full commodity definition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CommoditySpec {
    Preset(String),
    Custom(Commodity),
}

impl CommoditySpec {
    pub fn resolve(&self) -> Result<Commodity, SyntheticError> {
        let commodity = match self {
            CommoditySpec::Preset(name) => match name.as_str() {
                "corn" | "ZC" => Commodity::corn(),
                "live_cattle" | "cattle" | "LE" => Commodity::live_cattle(),
                other => return Err(SyntheticError::Invalid(format!("unknown commodity preset `{other}`"))),
            },
            CommoditySpec::Custom(c) => c.clone(),
        };
        commodity.validate()?;
        Ok(commodity)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FundamentalSpec {
    pub sigma_mu: f64,
    pub base_price: f64,
    /// Day-to-day shock to the opening level, which reverts towards `base_price`.
    pub daily_sd: f64,
    pub price_decimals: u32,
}

impl Default for FundamentalSpec {
    fn default() -> Self {
        FundamentalSpec { sigma_mu: 0.02, base_price: 400.0, daily_sd: 0.5, price_decimals: 4 }
    }
}

/// Per-position leg parameters; position 0 is the nearby. Each list holds one
/// value for all positions or one value per simulated contract.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LegSchedule {
    pub delays: Vec<u32>,
    pub sigma_s: Vec<f64>,
    pub trade_probability: Vec<f64>,
    /// Price step between adjacent positions; negated inside backwardation windows.
    pub carry: f64,
}

impl Default for LegSchedule {
    fn default() -> Self {
        LegSchedule { delays: vec![0, 2, 3, 4, 5, 6], sigma_s: vec![0.05], trade_probability: vec![1.0], carry: 2.0 }
    }
}

/// Extra nearby delay in the last `within_days` business days before expiration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpiryRamp {
    pub within_days: u32,
    pub extra_delay: u32,
}

/// Nearby volume share against deferred-1 as a function of days to expiration:
/// `clamp(0.5 + slope * (dte - roll_dte - 0.5), min_share, max_share)`, so the
/// share first drops below one half exactly `roll_dte` business days before
/// expiration when `slope > 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VolumeSchedule {
    /// Nearby plus deferred-1 contracts per session.
    pub pair_total: u64,
    pub roll_dte: u32,
    pub slope: f64,
    pub min_share: f64,
    pub max_share: f64,
    /// Deferred-k volume is deferred-1 volume times `deferred_decay^(k-1)`.
    pub deferred_decay: f64,
    /// Day-specific Gaussian perturbation of the share before clamping.
    pub share_noise_sd: f64,
}

impl Default for VolumeSchedule {
    fn default() -> Self {
        VolumeSchedule {
            pair_total: 40_000,
            roll_dte: 15,
            slope: 0.02,
            min_share: 0.05,
            max_share: 0.95,
            deferred_decay: 0.5,
            share_noise_sd: 0.0,
        }
    }
}

impl VolumeSchedule {
    pub fn nearby_share(&self, days_to_expiration: u32) -> f64 {
        let x = f64::from(days_to_expiration) - f64::from(self.roll_dte) - 0.5;
        (0.5 + self.slope * x).clamp(self.min_share, self.max_share)
    }
}

/// Inclusive date range.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DateWindow {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl DateWindow {
    pub fn contains(&self, date: NaiveDate) -> bool {
        self.start <= date && date <= self.end
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrashWindow {
    pub start: NaiveDate,
    pub end: NaiveDate,
    /// Added to the nearby delay on crash days.
    #[serde(default)]
    pub extra_delay: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportEvent {
    pub date: NaiveDate,
    pub report_type: ReportType,
    /// Standard deviation of the fundamental jump at the release second.
    #[serde(default)]
    pub jump_sd: f64,
    /// Seconds after the open; defaults to a quarter into the session.
    #[serde(default)]
    pub at_second: Option<u32>,
}

/// A multi-day, multi-contract simulated sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub commodity: CommoditySpec,
    pub start_date: NaiveDate,
    /// Business days to simulate.
    pub days: usize,
    /// Contracts traded per day: the nearby plus `contracts - 1` deferreds.
    #[serde(default = "default_contracts")]
    pub contracts: usize,
    /// Overrides the commodity session length, keeping its opening time.
    #[serde(default)]
    pub session_seconds: Option<u32>,
    #[serde(default)]
    pub holidays: Vec<NaiveDate>,
    #[serde(default)]
    pub fundamental: FundamentalSpec,
    #[serde(default)]
    pub legs: LegSchedule,
    #[serde(default)]
    pub expiry_ramp: Option<ExpiryRamp>,
    #[serde(default)]
    pub volume: VolumeSchedule,
    #[serde(default)]
    pub backwardation: Vec<DateWindow>,
    #[serde(default)]
    pub crash: Vec<CrashWindow>,
    #[serde(default)]
    pub reports: Vec<ReportEvent>,
}

fn default_contracts() -> usize {
    2
}

/// Everything decided about one simulated day before any tick is drawn.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DayPlan {
    pub index: usize,
    pub date: NaiveDate,
    /// Contracts by position, nearby first.
    pub contracts: Vec<ContractId>,
    pub days_to_expiration: u32,
    pub delays: Vec<u32>,
    pub sigma_s: Vec<f64>,
    pub trade_probability: Vec<f64>,
    pub offsets: Vec<f64>,
    pub volumes: Vec<u64>,
    /// Designed nearby share against deferred-1.
    pub volume_share: f64,
    pub backwardation: bool,
    pub crash: bool,
    pub reports: Vec<ReportType>,
    pub open_level: f64,
    /// Per deferred-k pair: `nearby`, `deferred` or `tie`, from the delays.
    pub leaders: Vec<String>,
    /// Tick files relative to the sample directory, by position.
    pub tick_files: Vec<String>,
}

/// Ground truth written next to a simulated sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub commodity: Commodity,
    pub session: SessionWindow,
    pub holidays: Vec<NaiveDate>,
    pub contracts: usize,
    pub settlements: String,
    pub reports: String,
    pub crash_windows: Vec<CrashWindow>,
    pub days: Vec<DayPlan>,
}

fn pick<T: Copy>(list: &[T], position: usize) -> T {
    if list.len() == 1 {
        list[0]
    } else {
        list[position]
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, SyntheticError> {
        toml::from_str(text).map_err(|e| SyntheticError::Invalid(e.to_string()))
    }

    pub fn commodity(&self) -> Result<Commodity, SyntheticError> {
        let mut commodity = self.commodity.resolve()?;
        if let Some(seconds) = self.session_seconds {
            commodity.session = SessionWindow::with_length(commodity.session.start(), seconds)?;
        }
        Ok(commodity)
    }

    pub fn business_calendar(&self) -> BusinessCalendar {
        BusinessCalendar::new(self.holidays.iter().copied())
    }

    pub fn validate(&self) -> Result<(), SyntheticError> {
        let bad = |m: String| Err(SyntheticError::Invalid(m));
        let commodity = self.commodity()?;
        if self.days == 0 {
            return bad("days must be positive".into());
        }
        if !(2..=6).contains(&self.contracts) {
            return bad(format!("contracts {} must be between 2 and 6", self.contracts));
        }
        let n = self.contracts;
        let fits = |len: usize| len == 1 || len >= n;
        if !fits(self.legs.delays.len()) || !fits(self.legs.sigma_s.len()) || !fits(self.legs.trade_probability.len())
        {
            return bad(format!("leg lists must have one entry or at least {n}"));
        }
        if self.legs.sigma_s.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
            return bad("sigma_s must be finite and non-negative".into());
        }
        let f = &self.fundamental;
        if !(f.sigma_mu >= 0.0 && f.sigma_mu.is_finite() && f.daily_sd >= 0.0 && f.daily_sd.is_finite()) {
            return bad("fundamental standard deviations must be finite and non-negative".into());
        }
        check_leg_common(self.legs.trade_probability.iter().copied(), f.base_price, f.price_decimals)?;
        let v = &self.volume;
        if !(0.0 <= v.min_share && v.min_share <= v.max_share && v.max_share <= 1.0) {
            return bad("volume shares must satisfy 0 <= min_share <= max_share <= 1".into());
        }
        if !(v.slope.is_finite() && v.deferred_decay > 0.0 && v.deferred_decay.is_finite()) {
            return bad("volume slope must be finite and deferred_decay positive".into());
        }
        if !(v.share_noise_sd >= 0.0 && v.share_noise_sd.is_finite()) {
            return bad("share_noise_sd must be finite and non-negative".into());
        }
        let max_delay = (0..n).map(|k| pick(&self.legs.delays, k)).max().unwrap_or(0)
            + self.expiry_ramp.map_or(0, |r| r.extra_delay)
            + self.crash.iter().map(|c| c.extra_delay).max().unwrap_or(0);
        if commodity.session.seconds() <= max_delay + 100 {
            return bad(format!(
                "session of {}s must exceed the largest delay ({max_delay}s) by more than 100s",
                commodity.session.seconds()
            ));
        }
        for w in &self.backwardation {
            if w.end < w.start {
                return bad(format!("backwardation window {} > {}", w.start, w.end));
            }
        }
        for c in &self.crash {
            if c.end < c.start {
                return bad(format!("crash window {} > {}", c.start, c.end));
            }
        }
        for r in &self.reports {
            if r.jump_sd < 0.0 || !r.jump_sd.is_finite() {
                return bad(format!("report jump on {} must be non-negative", r.date));
            }
            if r.at_second.is_some_and(|s| s >= commodity.session.seconds()) {
                return bad(format!("report jump on {} falls after the close", r.date));
            }
        }
        Ok(())
    }

    /// Business days of the sample.
    pub fn dates(&self) -> Vec<NaiveDate> {
        self.business_calendar().business_days_from(self.start_date, self.days)
    }

    /// Lays out every day of the sample without drawing any ticks.
    pub fn plan(&self) -> Result<Vec<DayPlan>, SyntheticError> {
        self.validate()?;
        let commodity = self.commodity()?;
        let business = self.business_calendar();
        let dates = self.dates();
        let roll = RollCalendar::new(&commodity, &business, dates[0], *dates.last().unwrap());
        let f = &self.fundamental;
        let mut level_rng = ChaCha8Rng::seed_from_u64(self.seed);
        level_rng.set_stream(u64::MAX);
        let shock = Normal::new(0.0, f.daily_sd).expect("validated");
        let mut share_rng = ChaCha8Rng::seed_from_u64(self.seed);
        share_rng.set_stream(u64::MAX - 1);
        let share_noise = Normal::new(0.0, self.volume.share_noise_sd).expect("validated");
        let mut level = f.base_price;

        let mut out = Vec::with_capacity(dates.len());
        for (index, &date) in dates.iter().enumerate() {
            level = f.base_price + 0.98 * (level - f.base_price) + shock.sample(&mut level_rng);
            let contracts: Vec<ContractId> = (0..self.contracts)
                .map(|k| roll.contract_at(date, k).cloned())
                .collect::<Option<_>>()
                .ok_or_else(|| SyntheticError::Invalid(format!("no contract listing for {date}")))?;
            let dte = roll.days_to_expiration(date).unwrap_or(0);
            let backwardation = self.backwardation.iter().any(|w| w.contains(date));
            let crash: Vec<&CrashWindow> = self.crash.iter().filter(|c| c.start <= date && date <= c.end).collect();
            let mut delays: Vec<u32> = (0..self.contracts).map(|k| pick(&self.legs.delays, k)).collect();
            if let Some(ramp) = self.expiry_ramp {
                if dte <= ramp.within_days {
                    delays[0] += ramp.extra_delay;
                }
            }
            delays[0] += crash.iter().map(|c| c.extra_delay).max().unwrap_or(0);
            let sign = if backwardation { -1.0 } else { 1.0 };
            let offsets = (0..self.contracts).map(|k| sign * self.legs.carry * k as f64).collect();
            let v = &self.volume;
            let share = (v.nearby_share(dte) + share_noise.sample(&mut share_rng)).clamp(v.min_share, v.max_share);
            let nearby = (self.volume.pair_total as f64 * share).round() as u64;
            let first_deferred = self.volume.pair_total - nearby;
            let volumes = (0..self.contracts)
                .map(|k| match k {
                    0 => nearby,
                    1 => first_deferred,
                    _ => (first_deferred as f64 * self.volume.deferred_decay.powi(k as i32 - 1)).round() as u64,
                })
                .collect();
            let leaders = (1..self.contracts)
                .map(|k| match delays[0].cmp(&delays[k]) {
                    std::cmp::Ordering::Less => "nearby",
                    std::cmp::Ordering::Greater => "deferred",
                    std::cmp::Ordering::Equal => "tie",
                })
                .map(String::from)
                .collect();
            out.push(DayPlan {
                index,
                date,
                tick_files: contracts.iter().map(|c| format!("ticks/{date}/{c}.csv")).collect(),
                contracts,
                days_to_expiration: dte,
                delays,
                sigma_s: (0..self.contracts).map(|k| pick(&self.legs.sigma_s, k)).collect(),
                trade_probability: (0..self.contracts).map(|k| pick(&self.legs.trade_probability, k)).collect(),
                offsets,
                volumes,
                volume_share: crate::market_data::volume_share(nearby, first_deferred),
                backwardation,
                crash: !crash.is_empty(),
                leaders,
                reports: self.reports.iter().filter(|r| r.date == date).map(|r| r.report_type).collect(),
                open_level: level,
            });
        }
        Ok(out)
    }

    fn session(&self, plan: &DayPlan, window: SessionWindow) -> Session {
        let jump = self.reports.iter().find(|r| r.date == plan.date && r.jump_sd > 0.0).map(|r| {
            (r.at_second.unwrap_or(window.seconds() / 4), r.jump_sd)
        });
        Session {
            date: plan.date,
            window,
            sigma_mu: self.fundamental.sigma_mu,
            open_level: plan.open_level,
            price_decimals: self.fundamental.price_decimals,
            jump,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> SyntheticError + '_ {
    move |source| SyntheticError::Io { path: path.to_path_buf(), source }
}

/// Simulates every planned day into `out_dir`:
///
/// - `ticks/<date>/<contract>.csv` in the tick CSV format,
/// - `settlements.csv` (`date,contract,settle`, noise-free closing value),
/// - `reports.csv` (`date,report_type`),
/// - `manifest.json` with the day plans.
///
/// Day `i` draws from stream `i` of a ChaCha8 generator seeded with the
/// scenario seed, so days can be simulated in any order with identical output.
pub fn simulate_sample(cfg: &ScenarioConfig, out_dir: &Path) -> Result<Manifest, SyntheticError> {
    let plans = cfg.plan()?;
    let commodity = cfg.commodity()?;
    let window = commodity.session;
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;

    let settles: Vec<Vec<(ContractId, Price)>> = plans
        .par_iter()
        .map(|plan| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(plan.index as u64);
            let legs: Vec<Leg> = (0..plan.contracts.len())
                .map(|k| Leg {
                    contract: plan.contracts[k].clone(),
                    delay: plan.delays[k],
                    sigma_s: plan.sigma_s[k],
                    offset: plan.offsets[k],
                    trade_probability: plan.trade_probability[k],
                    volume: plan.volumes[k],
                })
                .collect();
            let outputs = simulate_legs(&cfg.session(plan, window), &legs, &mut rng);
            let day_dir = out_dir.join("ticks").join(plan.date.to_string());
            fs::create_dir_all(&day_dir).map_err(io_err(&day_dir))?;
            let mut settles = Vec::with_capacity(outputs.len());
            for (leg, output) in legs.iter().zip(outputs) {
                let path: PathBuf = day_dir.join(format!("{}.csv", leg.contract));
                let file = fs::File::create(&path).map_err(io_err(&path))?;
                let mut w = std::io::BufWriter::new(file);
                write_ticks(&mut w, &output.ticks).map_err(io_err(&path))?;
                std::io::Write::flush(&mut w).map_err(io_err(&path))?;
                settles.push((leg.contract.clone(), output.settle));
            }
            Ok(settles)
        })
        .collect::<Result<_, SyntheticError>>()?;

    let mut text = String::from("date,contract,settle\n");
    for (plan, day) in plans.iter().zip(&settles) {
        let sorted: BTreeMap<&ContractId, &Price> = day.iter().map(|(c, p)| (c, p)).collect();
        for (contract, price) in sorted {
            text.push_str(&format!("{},{contract},{price}\n", plan.date));
        }
    }
    let path = out_dir.join("settlements.csv");
    fs::write(&path, text).map_err(io_err(&path))?;

    let mut reports: Vec<(NaiveDate, &str)> = cfg.reports.iter().map(|r| (r.date, r.report_type.as_str())).collect();
    reports.sort();
    reports.dedup();
    let mut text = String::from("date,report_type\n");
    for (date, kind) in reports {
        text.push_str(&format!("{date},{kind}\n"));
    }
    let path = out_dir.join("reports.csv");
    fs::write(&path, text).map_err(io_err(&path))?;

    let manifest = Manifest {
        seed: cfg.seed,
        commodity,
        session: window,
        holidays: cfg.holidays.clone(),
        contracts: cfg.contracts,
        settlements: "settlements.csv".into(),
        reports: "reports.csv".into(),
        crash_windows: cfg.crash.clone(),
        days: plans,
    };
    let path = out_dir.join("manifest.json");
    let mut json = serde_json::to_string_pretty(&manifest)?;
    json.push('\n');
    fs::write(&path, json).map_err(io_err(&path))?;
    Ok(manifest)
}
