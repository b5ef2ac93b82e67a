use std::collections::HashSet;
use std::io::{Read, Write};

use chrono::NaiveDateTime;

use super::{ContractId, MarketDataError, Price};

pub const TICK_HEADER: &str = "timestamp,sequence,contract,price,volume";
const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M:%S";

/// One trade print.
#[derive(Clone, Debug, PartialEq)]
pub struct TickRecord {
    pub timestamp: NaiveDateTime,
    /// Orders trades sharing a timestamp.
    pub sequence: u64,
    pub contract: ContractId,
    pub price: Price,
    pub volume: u64,
}

fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    NaiveDateTime::parse_from_str(s, TIMESTAMP_FORMAT)
        .or_else(|_| NaiveDateTime::parse_from_str(s, "%Y-%m-%d %H:%M:%S"))
        .ok()
}

fn parse_row(fields: &csv::StringRecord) -> Result<TickRecord, String> {
    if fields.len() != 5 {
        return Err(format!("expected 5 fields, found {}", fields.len()));
    }
    let timestamp = parse_timestamp(&fields[0])
        .ok_or_else(|| format!("invalid timestamp `{}`", &fields[0]))?;
    let sequence = fields[1]
        .parse::<u64>()
        .map_err(|_| format!("invalid sequence `{}`", &fields[1]))?;
    let contract = fields[2].parse::<ContractId>().map_err(|e| e.to_string())?;
    let price = fields[3].parse::<Price>().map_err(|e| e.to_string())?;
    if price.micros() <= 0 {
        return Err("non-positive price".to_string());
    }
    let volume = fields[4]
        .parse::<i64>()
        .map_err(|_| format!("invalid volume `{}`", &fields[4]))?;
    if volume < 0 {
        return Err("negative volume".to_string());
    }
    Ok(TickRecord { timestamp, sequence, contract, price, volume: volume as u64 })
}

/// Reads a tick CSV (`timestamp,sequence,contract,price,volume`).
///
/// Output is sorted by `(timestamp, sequence)`. The first malformed row aborts
/// parsing with its 1-based line number. An empty input yields no records.
pub fn parse_ticks<R: Read>(source: R) -> Result<Vec<TickRecord>, MarketDataError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(source);
    let mut records = Vec::new();
    let mut seen = HashSet::new();
    let mut raw = csv::StringRecord::new();
    let mut first = true;
    loop {
        let more = reader.read_record(&mut raw).map_err(|e| MarketDataError::Row {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        if !more {
            break;
        }
        let line = raw.position().map_or(0, |p| p.line());
        if first {
            first = false;
            let found = raw.iter().collect::<Vec<_>>().join(",");
            let found = found.trim_start_matches('\u{feff}');
            if found != TICK_HEADER {
                return Err(MarketDataError::Header {
                    expected: TICK_HEADER.to_string(),
                    found: found.to_string(),
                });
            }
            continue;
        }
        if raw.iter().all(str::is_empty) {
            continue;
        }
        let tick = parse_row(&raw).map_err(|message| MarketDataError::Row { line, message })?;
        if !seen.insert((tick.contract.clone(), tick.timestamp, tick.sequence)) {
            return Err(MarketDataError::Row {
                line,
                message: format!(
                    "duplicate sequence {} for {} at {}",
                    tick.sequence, tick.contract, tick.timestamp
                ),
            });
        }
        records.push(tick);
    }
    records.sort_by(|a, b| (a.timestamp, a.sequence).cmp(&(b.timestamp, b.sequence)));
    Ok(records)
}

/// Writes ticks in the ingestion format, header included.
pub fn write_ticks<W: Write>(mut sink: W, ticks: &[TickRecord]) -> std::io::Result<()> {
    writeln!(sink, "{TICK_HEADER}")?;
    for t in ticks {
        writeln!(
            sink,
            "{},{},{},{},{}",
            t.timestamp.format(TIMESTAMP_FORMAT),
            t.sequence,
            t.contract,
            t.price,
            t.volume
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Vec<TickRecord>, MarketDataError> {
        parse_ticks(text.as_bytes())
    }

    #[test]
    fn maps_fields_directly() {
        let ticks = parse(&format!("{TICK_HEADER}\n2015-06-01T09:30:00,17,ZC_2015U,364.25,5\n"))
            .unwrap();
        assert_eq!(ticks.len(), 1);
        let t = &ticks[0];
        assert_eq!(t.timestamp.to_string(), "2015-06-01 09:30:00");
        assert_eq!(t.sequence, 17);
        assert_eq!(t.contract.to_string(), "ZC_2015U");
        assert_eq!(t.price, "364.25".parse().unwrap());
        assert_eq!(t.volume, 5);
    }

    #[test]
    fn orders_ties_by_sequence() {
        let text = format!(
            "{TICK_HEADER}\n2015-06-01T09:30:00,3,ZC_2015U,364.5,1\n2015-06-01T09:30:00,1,ZC_2015U,364.25,2\n"
        );
        let ticks = parse(&text).unwrap();
        assert_eq!(ticks.iter().map(|t| t.sequence).collect::<Vec<_>>(), vec![1, 3]);
    }

    #[test]
    fn rejects_non_positive_price_with_line() {
        let text = format!(
            "{TICK_HEADER}\n2015-06-01T09:30:00,1,ZC_2015U,364.25,2\n2015-06-01T09:30:01,2,ZC_2015U,-1.0,1\n"
        );
        let err = parse(&text).unwrap_err();
        assert_eq!(err.to_string(), "line 3: non-positive price");
    }

    #[test]
    fn empty_input_is_not_an_error() {
        assert!(parse("").unwrap().is_empty());
        assert!(parse(&format!("{TICK_HEADER}\n")).unwrap().is_empty());
    }

    #[test]
    fn rejects_duplicate_sequence_and_bad_header() {
        let text = format!(
            "{TICK_HEADER}\n2015-06-01T09:30:00,1,ZC_2015U,364.25,2\n2015-06-01T09:30:00,1,ZC_2015U,364.5,2\n"
        );
        assert!(matches!(parse(&text), Err(MarketDataError::Row { line: 3, .. })));
        assert!(matches!(parse("a,b,c\n"), Err(MarketDataError::Header { .. })));
        let short = format!("{TICK_HEADER}\n2015-06-01T09:30:00,1,ZC_2015U\n");
        assert!(matches!(parse(&short), Err(MarketDataError::Row { line: 2, .. })));
    }

    #[test]
    fn write_then_parse() {
        let text = format!(
            "{TICK_HEADER}\n2015-06-01T09:30:00,1,ZC_2015U,364.25,2\n2015-06-01T09:30:04,2,ZC_2015Z,370,0\n"
        );
        let ticks = parse(&text).unwrap();
        let mut out = Vec::new();
        write_ticks(&mut out, &ticks).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), text);
    }
}
