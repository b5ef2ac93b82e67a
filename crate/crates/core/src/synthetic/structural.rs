use chrono::{NaiveDate, NaiveTime};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::SyntheticError;
use crate::market_data::{
    build_second_grid, volume_share, CalendarFlags, ContractId, ContractPairDay, Price, SecondGrid, SessionWindow,
    TickRecord,
};

/// Parameters of one simulated two-contract session.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StructuralConfig {
    /// Standard deviation of the fundamental's one-second innovation.
    pub sigma_mu: f64,
    /// Seconds each contract lags the fundamental.
    pub delays: [u32; 2],
    /// Standard deviation of each contract's transitory noise.
    pub sigma_s: [f64; 2],
    pub session_seconds: u32,
    pub seed: u64,
    /// Probability that a contract trades in a given second (1 = every second).
    pub trade_probability: [f64; 2],
    /// Session volume per contract, split across its trades.
    pub volume: [u64; 2],
    pub base_price: f64,
    pub price_decimals: u32,
}

impl Default for StructuralConfig {
    fn default() -> Self {
        StructuralConfig {
            sigma_mu: 0.02,
            delays: [0, 0],
            sigma_s: [0.05, 0.05],
            session_seconds: 23_400,
            seed: 0,
            trade_probability: [1.0, 1.0],
            volume: [20_000, 20_000],
            base_price: 400.0,
            price_decimals: 4,
        }
    }
}

impl StructuralConfig {
    pub fn validate(&self) -> Result<(), SyntheticError> {
        let bad = |m: String| Err(SyntheticError::Invalid(m));
        if !(self.sigma_mu >= 0.0 && self.sigma_mu.is_finite()) {
            return bad(format!("sigma_mu {} must be finite and non-negative", self.sigma_mu));
        }
        if self.sigma_s.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
            return bad(format!("sigma_s {:?} must be finite and non-negative", self.sigma_s));
        }
        let max_delay = self.delays[0].max(self.delays[1]);
        if self.session_seconds <= max_delay + 100 {
            return bad(format!(
                "session of {}s must exceed the largest delay ({max_delay}s) by more than 100s",
                self.session_seconds
            ));
        }
        check_leg_common(self.trade_probability.iter().copied(), self.base_price, self.price_decimals)
    }
}

pub(super) fn check_leg_common(
    probabilities: impl IntoIterator<Item = f64>,
    base_price: f64,
    decimals: u32,
) -> Result<(), SyntheticError> {
    for q in probabilities {
        if !(q > 0.0 && q <= 1.0) {
            return Err(SyntheticError::Invalid(format!("trade probability {q} must be in (0, 1]")));
        }
    }
    if !(base_price > 0.0 && base_price.is_finite()) {
        return Err(SyntheticError::Invalid(format!("base price {base_price} must be positive")));
    }
    if decimals > Price::DECIMALS {
        return Err(SyntheticError::Invalid(format!("price_decimals {decimals} exceeds {}", Price::DECIMALS)));
    }
    Ok(())
}

/// What a simulated pair was built from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub delays: [u32; 2],
    pub sigma_s: [f64; 2],
    /// Index of the contract with the smaller delay; `None` when equal.
    pub leader: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct SimulatedDay {
    pub ticks: [Vec<TickRecord>; 2],
    pub grids: [SecondGrid; 2],
    pub truth: GroundTruth,
}

impl SimulatedDay {
    /// The two grids as an aligned pair over their common priced seconds.
    pub fn pair(&self) -> ContractPairDay {
        let [a, b] = &self.grids;
        let from = a.first_valid().unwrap_or(0).max(b.first_valid().unwrap_or(0));
        let to = a.len() - 1;
        ContractPairDay {
            session_date: a.session_date,
            commodity: a.contract.symbol.clone(),
            nearby_id: a.contract.clone(),
            deferred_id: b.contract.clone(),
            pair_index: 1,
            nearby_grid: a.slice(from, to),
            deferred_grid: b.slice(from, to),
            volume_share: volume_share(a.total_volume, b.total_volume),
            days_to_expiration: 0,
            backwardation: false,
            flags: CalendarFlags::default(),
        }
    }
}

/// One contract's part in a simulated session.
pub(super) struct Leg {
    pub contract: ContractId,
    pub delay: u32,
    pub sigma_s: f64,
    /// Constant added to the fundamental (carry).
    pub offset: f64,
    pub trade_probability: f64,
    pub volume: u64,
}

pub(super) struct Session {
    pub date: NaiveDate,
    pub window: SessionWindow,
    pub sigma_mu: f64,
    pub open_level: f64,
    pub price_decimals: u32,
    /// Fundamental jump `(second, standard deviation)`.
    pub jump: Option<(u32, f64)>,
}

pub(super) struct LegOutput {
    pub ticks: Vec<TickRecord>,
    /// Noise-free price at the close.
    pub settle: Price,
}

fn gaussian(sd: f64) -> Normal<f64> {
    Normal::new(0.0, sd).expect("validated standard deviation")
}

/// Simulates one session for every leg from one fundamental path.
///
/// Draw order is fixed (fundamental, jump, then each leg's trades, noise and
/// volume split) so output depends only on the RNG state and the inputs.
pub(super) fn simulate_legs(session: &Session, legs: &[Leg], rng: &mut ChaCha8Rng) -> Vec<LegOutput> {
    let t = session.window.seconds() as usize;
    let lead_in = legs.iter().map(|l| l.delay).max().unwrap_or(0) as usize;
    let innovation = gaussian(session.sigma_mu);
    let mut fundamental = Vec::with_capacity(t + lead_in);
    let mut w = session.open_level;
    for _ in 0..t + lead_in {
        w += innovation.sample(rng);
        fundamental.push(w);
    }
    if let Some((second, sd)) = session.jump {
        let size = gaussian(sd).sample(rng);
        for v in fundamental.iter_mut().skip(lead_in + second as usize) {
            *v += size;
        }
    }
    let start = session.date.and_time(session.window.start());
    let floor = 10f64.powi(-(session.price_decimals as i32));
    legs.iter()
        .map(|leg| {
            let noise = gaussian(leg.sigma_s);
            let shift = lead_in - leg.delay as usize;
            let mut ticks = Vec::new();
            for second in 0..t {
                let trades = leg.trade_probability >= 1.0 || rng.random_bool(leg.trade_probability);
                let price = fundamental[second + shift] + leg.offset + noise.sample(rng);
                if trades {
                    ticks.push((second, price));
                }
            }
            if ticks.is_empty() {
                ticks.push((0, fundamental[shift] + leg.offset));
            }
            let n = ticks.len();
            let base = leg.volume / n as u64;
            let mut volumes = vec![base; n];
            for i in sample(rng, n, (leg.volume % n as u64) as usize) {
                volumes[i] += 1;
            }
            let records = ticks
                .into_iter()
                .zip(volumes)
                .enumerate()
                .map(|(i, ((second, price), volume))| TickRecord {
                    timestamp: start + chrono::Duration::seconds(second as i64),
                    sequence: i as u64 + 1,
                    contract: leg.contract.clone(),
                    price: Price::from_f64_rounded(price.max(floor), session.price_decimals),
                    volume,
                })
                .collect();
            let close = fundamental[t - 1 + shift] + leg.offset;
            LegOutput { ticks: records, settle: Price::from_f64_rounded(close.max(floor), session.price_decimals) }
        })
        .collect()
}

/// Simulates one two-contract session with known leadership.
///
/// Prices are `p_i,t = w_{t - delay_i} + s_i,t` where `w` is a Gaussian random
/// walk and `s_i` independent Gaussian noise. Contract 0 is `SIM_2015N`,
/// contract 1 `SIM_2015U`; the session opens at 09:30 on 2015-06-01.
pub fn simulate_day(cfg: &StructuralConfig) -> Result<SimulatedDay, SyntheticError> {
    cfg.validate()?;
    let date = NaiveDate::from_ymd_opt(2015, 6, 1).unwrap();
    let window = SessionWindow::with_length(NaiveTime::from_hms_opt(9, 30, 0).unwrap(), cfg.session_seconds)?;
    let session = Session {
        date,
        window,
        sigma_mu: cfg.sigma_mu,
        open_level: cfg.base_price,
        price_decimals: cfg.price_decimals,
        jump: None,
    };
    let contracts = [ContractId::new("SIM", 2015, 7), ContractId::new("SIM", 2015, 9)];
    let legs: Vec<Leg> = (0..2)
        .map(|i| Leg {
            contract: contracts[i].clone(),
            delay: cfg.delays[i],
            sigma_s: cfg.sigma_s[i],
            offset: 0.0,
            trade_probability: cfg.trade_probability[i],
            volume: cfg.volume[i],
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = simulate_legs(&session, &legs, &mut rng).into_iter().map(|l| l.ticks);
    let ticks = [out.next().unwrap(), out.next().unwrap()];
    let grids = [
        build_second_grid(&ticks[0], date, &window)?,
        build_second_grid(&ticks[1], date, &window)?,
    ];
    let leader = match cfg.delays[0].cmp(&cfg.delays[1]) {
        std::cmp::Ordering::Less => Some(0),
        std::cmp::Ordering::Greater => Some(1),
        std::cmp::Ordering::Equal => None,
    };
    Ok(SimulatedDay { ticks, grids, truth: GroundTruth { delays: cfg.delays, sigma_s: cfg.sigma_s, leader } })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(seed: u64) -> StructuralConfig {
        StructuralConfig { seed, session_seconds: 5_000, ..Default::default() }
    }

    #[test]
    fn same_seed_same_ticks() {
        let a = simulate_day(&cfg(11)).unwrap();
        let b = simulate_day(&cfg(11)).unwrap();
        assert_eq!(a.ticks, b.ticks);
        assert_ne!(a.ticks, simulate_day(&cfg(12)).unwrap().ticks);
    }

    #[test]
    fn volumes_are_split_exactly() {
        let c = StructuralConfig { volume: [12_345, 7], trade_probability: [0.3, 1.0], ..cfg(3) };
        let day = simulate_day(&c).unwrap();
        assert_eq!(day.grids[0].total_volume, 12_345);
        assert_eq!(day.grids[1].total_volume, 7);
        let observed = day.grids[0].observed.iter().filter(|&&o| o).count() as f64;
        assert!((observed / 5_000.0 - 0.3).abs() < 0.03);
    }

    #[test]
    fn spread_variance_matches_structure() {
        // Var(p1 - p2) = s1^2 + s2^2 + |d1 - d2| sigma_mu^2.
        let c = StructuralConfig { delays: [0, 5], session_seconds: 23_400, ..cfg(5) };
        let (p1, p2) = simulate_day(&c).unwrap().pair().series();
        let spread: Vec<f64> = p1.iter().zip(&p2).map(|(a, b)| a - b).collect();
        let mean = spread.iter().sum::<f64>() / spread.len() as f64;
        let var = spread.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / spread.len() as f64;
        let expected = 2.0 * 0.05f64.powi(2) + 5.0 * 0.02f64.powi(2);
        assert!((var / expected - 1.0).abs() < 0.1, "{var} vs {expected}");
    }

    #[test]
    fn leader_and_validation() {
        let day = simulate_day(&StructuralConfig { delays: [3, 1], ..cfg(1) }).unwrap();
        assert_eq!(day.truth.leader, Some(1));
        assert!(simulate_day(&StructuralConfig { delays: [0, 4_950], ..cfg(1) }).is_err());
        assert!(simulate_day(&StructuralConfig { sigma_mu: -1.0, ..cfg(1) }).is_err());
    }

    #[test]
    fn emitted_ticks_rebuild_the_grid() {
        let day = simulate_day(&StructuralConfig { trade_probability: [0.5, 0.5], ..cfg(8) }).unwrap();
        let grid = &day.grids[0];
        let window = SessionWindow::with_length(NaiveTime::from_hms_opt(9, 30, 0).unwrap(), 5_000).unwrap();
        let rebuilt = build_second_grid(&grid.emit_ticks(), grid.session_date, &window).unwrap();
        assert_eq!(rebuilt.prices, grid.prices);
        assert_eq!(rebuilt.observed, grid.observed);
    }
}
