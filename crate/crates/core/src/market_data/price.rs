use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::MarketDataError;

/// Exact decimal price stored as an integer count of micro-units.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Price(i64);

impl Price {
    pub const DECIMALS: u32 = 6;
    pub const SCALE: i64 = 1_000_000;

    pub const fn from_micros(micros: i64) -> Self {
        Price(micros)
    }

    pub const fn micros(self) -> i64 {
        self.0
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / Self::SCALE as f64
    }

    /// Rounds `value` to `decimals` places (at most six) and stores it exactly.
    pub fn from_f64_rounded(value: f64, decimals: u32) -> Self {
        let decimals = decimals.min(Self::DECIMALS);
        let step = 10i64.pow(Self::DECIMALS - decimals);
        let units = (value * 10f64.powi(decimals as i32)).round() as i64;
        Price(units * step)
    }
}

impl FromStr for Price {
    type Err = MarketDataError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || MarketDataError::Price(s.to_string());
        let t = s.trim();
        let (negative, body) = match t.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, t.strip_prefix('+').unwrap_or(t)),
        };
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad());
        }
        if !int_part.bytes().all(|b| b.is_ascii_digit())
            || !frac_part.bytes().all(|b| b.is_ascii_digit())
        {
            return Err(bad());
        }
        let frac_trimmed = frac_part.trim_end_matches('0');
        if frac_trimmed.len() > Self::DECIMALS as usize {
            return Err(bad());
        }
        let int_value: i64 = if int_part.is_empty() {
            0
        } else {
            int_part.parse().map_err(|_| bad())?
        };
        let mut frac_value: i64 = 0;
        for (i, b) in frac_trimmed.bytes().enumerate() {
            frac_value += i64::from(b - b'0') * 10i64.pow(Self::DECIMALS - 1 - i as u32);
        }
        let micros = int_value
            .checked_mul(Self::SCALE)
            .and_then(|v| v.checked_add(frac_value))
            .ok_or_else(bad)?;
        Ok(Price(if negative { -micros } else { micros }))
    }
}

impl fmt::Display for Price {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        let int_part = abs / Self::SCALE as u64;
        let frac = abs % Self::SCALE as u64;
        if frac == 0 {
            write!(f, "{sign}{int_part}")
        } else {
            let digits = format!("{frac:06}");
            write!(f, "{sign}{int_part}.{}", digits.trim_end_matches('0'))
        }
    }
}

impl Serialize for Price {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Price {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

const MONTH_CODES: [char; 12] = ['F', 'G', 'H', 'J', 'K', 'M', 'N', 'Q', 'U', 'V', 'X', 'Z'];

/// Futures contract identifier: `SYMBOL_YYYYM` with `M` the exchange month code,
/// e.g. `ZC_2015U` for September 2015 corn.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ContractId {
    pub symbol: String,
    pub year: i32,
    pub month: u32,
}

impl ContractId {
    pub fn new(symbol: impl Into<String>, year: i32, month: u32) -> Self {
        assert!((1..=12).contains(&month), "month out of range: {month}");
        ContractId { symbol: symbol.into(), year, month }
    }

    pub fn month_code(&self) -> char {
        MONTH_CODES[(self.month - 1) as usize]
    }

    /// Sort key by delivery date, ignoring the symbol.
    pub fn delivery_key(&self) -> (i32, u32) {
        (self.year, self.month)
    }
}

impl fmt::Display for ContractId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}{}", self.symbol, self.year, self.month_code())
    }
}

impl FromStr for ContractId {
    type Err = MarketDataError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || MarketDataError::Contract(s.to_string());
        let (symbol, rest) = s.trim().rsplit_once('_').ok_or_else(bad)?;
        if symbol.is_empty() || rest.len() != 5 {
            return Err(bad());
        }
        let (year, code) = rest.split_at(4);
        let year: i32 = year.parse().map_err(|_| bad())?;
        let code = code.chars().next().ok_or_else(bad)?;
        let month = MONTH_CODES.iter().position(|&c| c == code).ok_or_else(bad)? as u32 + 1;
        Ok(ContractId::new(symbol, year, month))
    }
}

impl Serialize for ContractId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ContractId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
