use std::io::{Read, Write};

use chrono::NaiveDate;
use serde::Serialize;

use super::ReasonCode;
use crate::econ::RankCategory;
use crate::error::{Error, Result};

pub const DAILY_HEADER: [&str; 12] = [
    "date",
    "commodity",
    "pair_index",
    "category",
    "gs1",
    "cs1",
    "is1",
    "ils1",
    "combined_ps",
    "volume_share",
    "days_to_expiration",
    "backwardation",
];

/// One day's shares for the nearby contract against deferred-`pair_index`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiscoveryShares {
    pub session_date: NaiveDate,
    pub commodity: String,
    pub pair_index: u8,
    pub category: RankCategory,
    pub gs1: Option<f64>,
    pub cs1: Option<f64>,
    pub is1: Option<f64>,
    pub ils1: Option<f64>,
    /// `gs1` on stationary days, `ils1` on cointegrated days.
    pub combined_ps: Option<f64>,
    pub volume_share: f64,
    pub days_to_expiration: u32,
    pub backwardation: bool,
    /// Not written to the daily CSV.
    #[serde(skip)]
    pub reasons: Vec<ReasonCode>,
}

/// A day-pair left out of estimation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Exclusion {
    pub session_date: NaiveDate,
    pub commodity: String,
    pub pair_index: u8,
    pub reason: String,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_daily_csv<W: Write>(sink: W, rows: &[DiscoveryShares]) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(DAILY_HEADER)?;
    for r in rows {
        w.write_record([
            r.session_date.to_string(),
            r.commodity.clone(),
            r.pair_index.to_string(),
            r.category.to_string(),
            opt(r.gs1),
            opt(r.cs1),
            opt(r.is1),
            opt(r.ils1),
            opt(r.combined_ps),
            r.volume_share.to_string(),
            r.days_to_expiration.to_string(),
            u8::from(r.backwardation).to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("writing daily shares", e))?;
    Ok(())
}

pub fn read_daily_csv<R: Read>(source: R) -> Result<Vec<DiscoveryShares>> {
    let mut reader = csv::Reader::from_reader(source);
    let headers = reader.headers()?.clone();
    if headers.iter().ne(DAILY_HEADER) {
        return Err(Error::Runtime(format!(
            "daily shares header mismatch: expected `{}`",
            DAILY_HEADER.join(",")
        )));
    }
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let bad = |field: &str| Error::Runtime(format!("daily shares line {line}: invalid {field}"));
        let float = |idx: usize, field: &str| -> Result<Option<f64>> {
            let s = &rec[idx];
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|_| bad(field))
            }
        };
        out.push(DiscoveryShares {
            session_date: rec[0].parse().map_err(|_| bad("date"))?,
            commodity: rec[1].to_string(),
            pair_index: rec[2].parse().map_err(|_| bad("pair_index"))?,
            category: rec[3].parse().map_err(|_| bad("category"))?,
            gs1: float(4, "gs1")?,
            cs1: float(5, "cs1")?,
            is1: float(6, "is1")?,
            ils1: float(7, "ils1")?,
            combined_ps: float(8, "combined_ps")?,
            volume_share: float(9, "volume_share")?.ok_or_else(|| bad("volume_share"))?,
            days_to_expiration: rec[10].parse().map_err(|_| bad("days_to_expiration"))?,
            backwardation: match &rec[11] {
                "1" => true,
                "0" => false,
                _ => return Err(bad("backwardation")),
            },
            reasons: Vec::new(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn absent_values_are_empty_fields() {
        let row = DiscoveryShares {
            session_date: NaiveDate::from_ymd_opt(2015, 1, 5).unwrap(),
            commodity: "ZC".into(),
            pair_index: 2,
            category: RankCategory::NonCointegration,
            gs1: None,
            cs1: None,
            is1: None,
            ils1: None,
            combined_ps: None,
            volume_share: 0.7,
            days_to_expiration: 12,
            backwardation: true,
            reasons: vec![],
        };
        let mut buf = Vec::new();
        write_daily_csv(&mut buf, std::slice::from_ref(&row)).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(
            text,
            "date,commodity,pair_index,category,gs1,cs1,is1,ils1,combined_ps,volume_share,days_to_expiration,backwardation\n\
             2015-01-05,ZC,2,NonCointegration,,,,,,0.7,12,1\n"
        );
        let back = read_daily_csv(buf.as_slice()).unwrap();
        assert_eq!(back, vec![row]);
    }

    #[test]
    fn header_is_checked() {
        assert!(read_daily_csv("a,b\n1,2\n".as_bytes()).is_err());
    }
}
