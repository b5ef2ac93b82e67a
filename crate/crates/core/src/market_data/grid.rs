use chrono::{NaiveDate, NaiveDateTime, Timelike};

use super::{ContractId, MarketDataError, Price, SessionWindow, TickRecord};

/// One contract's session aggregated to one price per second.
///
/// Each observed second holds the first trade of that second; unobserved
/// seconds carry the last observed price forward. Seconds before the first
/// trade hold `None` and are never back-filled.
#[derive(Clone, Debug, PartialEq)]
pub struct SecondGrid {
    pub session_date: NaiveDate,
    pub contract: ContractId,
    /// Seconds after midnight of the first and last grid entries (inclusive).
    pub start: u32,
    pub end: u32,
    pub prices: Vec<Option<Price>>,
    pub observed: Vec<bool>,
    pub total_volume: u64,
    /// Last trade of the session by `(timestamp, sequence)`.
    pub last_trade: Price,
}

impl SecondGrid {
    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }

    /// Index of the first second with a price.
    pub fn first_valid(&self) -> Option<usize> {
        self.prices.iter().position(Option::is_some)
    }

    /// Observed seconds whose price differs from the preceding second's price.
    pub fn price_updates(&self) -> usize {
        let mut updates = 0;
        let mut previous: Option<Price> = None;
        for (price, &observed) in self.prices.iter().zip(&self.observed) {
            if let (Some(p), Some(prev)) = (price, previous) {
                if observed && *p != prev {
                    updates += 1;
                }
            }
            if price.is_some() {
                previous = *price;
            }
        }
        updates
    }

    pub fn is_constant(&self) -> bool {
        let mut valid = self.prices.iter().flatten();
        match valid.next() {
            Some(first) => valid.all(|p| p == first),
            None => true,
        }
    }

    /// Copy covering grid indices `from..=to`.
    pub fn slice(&self, from: usize, to: usize) -> SecondGrid {
        SecondGrid {
            session_date: self.session_date,
            contract: self.contract.clone(),
            start: self.start + from as u32,
            end: self.start + to as u32,
            prices: self.prices[from..=to].to_vec(),
            observed: self.observed[from..=to].to_vec(),
            total_volume: self.total_volume,
            last_trade: self.last_trade,
        }
    }

    /// Prices as floats; `None` for seconds before the first trade.
    pub fn values(&self) -> Vec<Option<f64>> {
        self.prices.iter().map(|p| p.map(Price::to_f64)).collect()
    }

    /// One synthetic trade per observed second, carrying the whole session
    /// volume on the first one. Aggregating these reproduces the grid.
    pub fn emit_ticks(&self) -> Vec<TickRecord> {
        let mut volume = Some(self.total_volume);
        let mut out = Vec::new();
        for (i, (price, &observed)) in self.prices.iter().zip(&self.observed).enumerate() {
            if !observed {
                continue;
            }
            let second = self.start + i as u32;
            let time = chrono::NaiveTime::from_num_seconds_from_midnight_opt(second, 0)
                .expect("grid second within a day");
            out.push(TickRecord {
                timestamp: NaiveDateTime::new(self.session_date, time),
                sequence: 1,
                contract: self.contract.clone(),
                price: price.expect("observed seconds carry a price"),
                volume: volume.take().unwrap_or(0),
            });
        }
        if let (Some(v), Some(last)) = (volume, out.last_mut()) {
            last.volume += v;
        }
        // The last trade may differ from the last second's first trade.
        if let Some(last) = out.last_mut() {
            if last.price != self.last_trade {
                let extra = TickRecord { sequence: 2, price: self.last_trade, volume: 0, ..last.clone() };
                out.push(extra);
            }
        }
        out
    }
}

/// Aggregates one contract's trades for one session to a per-second grid.
///
/// Trades outside `session` are ignored. Returns
/// [`MarketDataError::EmptySession`] when no trade falls inside the session.
pub fn build_second_grid(
    ticks: &[TickRecord],
    session_date: NaiveDate,
    session: &SessionWindow,
) -> Result<SecondGrid, MarketDataError> {
    let contract = match ticks.first() {
        Some(t) => t.contract.clone(),
        None => {
            return Err(MarketDataError::EmptySession {
                contract: "<none>".to_string(),
                date: session_date,
            })
        }
    };
    if let Some(other) = ticks.iter().find(|t| t.contract != contract) {
        return Err(MarketDataError::MixedInput(format!(
            "contracts {contract} and {}",
            other.contract
        )));
    }
    let (start, end) = (session.start_second(), session.end_second());
    let n = (end - start + 1) as usize;
    let mut first_seq: Vec<Option<u64>> = vec![None; n];
    let mut prices: Vec<Option<Price>> = vec![None; n];
    let mut total_volume = 0u64;
    let mut last: Option<(NaiveDateTime, u64, Price)> = None;
    for t in ticks {
        if t.timestamp.date() != session_date {
            continue;
        }
        let second = t.timestamp.time().num_seconds_from_midnight();
        if second < start || second > end {
            continue;
        }
        let idx = (second - start) as usize;
        if first_seq[idx].is_none_or(|s| t.sequence < s) {
            first_seq[idx] = Some(t.sequence);
            prices[idx] = Some(t.price);
        }
        total_volume += t.volume;
        if last.is_none_or(|(ts, seq, _)| (t.timestamp, t.sequence) > (ts, seq)) {
            last = Some((t.timestamp, t.sequence, t.price));
        }
    }
    let Some((_, _, last_trade)) = last else {
        return Err(MarketDataError::EmptySession {
            contract: contract.to_string(),
            date: session_date,
        });
    };
    let observed: Vec<bool> = first_seq.iter().map(Option::is_some).collect();
    let mut carried: Option<Price> = None;
    for p in prices.iter_mut() {
        match p {
            Some(v) => carried = Some(*v),
            None => *p = carried,
        }
    }
    Ok(SecondGrid {
        session_date,
        contract,
        start,
        end,
        prices,
        observed,
        total_volume,
        last_trade,
    })
}
