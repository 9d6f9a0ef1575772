//! Option-chain CSV files.
//!
//! Two layouts are accepted, chosen by the header:
//!
//! * `strike,maturity_days,bid,ask`: the mid is the average of bid and ask
//! * `strike,maturity_days,mid`

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use expou_core::{Error as CoreError, OptionQuote};

/// Columns shared by both layouts.
const KEY_COLUMNS: [&str; 2] = ["strike", "maturity_days"];

/// One rejected row.
#[derive(Debug, Clone, PartialEq)]
pub struct RowError {
    /// 1-based line number in the file, counting the header.
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, thiserror::Error)]
pub enum QuoteFileError {
    #[error("cannot read quote file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("quote file: missing column(s) {missing:?}; expected `strike,maturity_days,bid,ask` or `strike,maturity_days,mid`")]
    MissingColumns { missing: Vec<String> },
    #[error("quote file: {}", summary(.rows, *.total))]
    Rows { rows: Vec<RowError>, total: usize },
    #[error("quote file: {0}")]
    Csv(#[from] csv::Error),
}

fn summary(rows: &[RowError], total: usize) -> String {
    let mut s = format!("{} of {} row(s) rejected", rows.len(), total);
    for r in rows {
        s.push_str(&format!("\n  line {}: {}", r.line, r.reason));
    }
    s
}

enum Layout {
    BidAsk { bid: usize, ask: usize },
    Mid { mid: usize },
}

/// Reads and validates every quote of a file.
pub fn load_quotes(path: &Path) -> Result<Vec<OptionQuote>, QuoteFileError> {
    let file = std::fs::File::open(path).map_err(|source| QuoteFileError::Io {
        path: path.to_owned(),
        source,
    })?;
    read_quotes(file)
}

/// Reads quotes from CSV text. Bad rows do not stop the scan: all of them
/// are reported together.
pub fn read_quotes<R: Read>(input: R) -> Result<Vec<OptionQuote>, QuoteFileError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = reader.headers()?.clone();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let mut missing: Vec<String> = KEY_COLUMNS
        .iter()
        .filter(|c| find(c).is_none())
        .map(|c| c.to_string())
        .collect();
    let layout = match (find("bid"), find("ask"), find("mid")) {
        (Some(bid), Some(ask), _) => Layout::BidAsk { bid, ask },
        (_, _, Some(mid)) => Layout::Mid { mid },
        (bid, ask, None) => {
            if bid.is_none() {
                missing.push("bid".to_owned());
            }
            if ask.is_none() {
                missing.push("ask".to_owned());
            }
            Layout::Mid { mid: usize::MAX }
        }
    };
    if !missing.is_empty() {
        return Err(QuoteFileError::MissingColumns { missing });
    }
    let (strike, maturity) = (find("strike").unwrap(), find("maturity_days").unwrap());

    let mut quotes = Vec::new();
    let mut rows = Vec::new();
    let mut total = 0;
    for record in reader.records() {
        total += 1;
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                rows.push(RowError {
                    line,
                    reason: e.to_string(),
                });
                continue;
            }
        };
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize, name: &str| -> Result<f64, String> {
            let raw = record.get(i).unwrap_or("");
            raw.parse::<f64>().map_err(|_| format!("{name}: not a number: {raw:?}"))
        };
        let parsed = (|| -> Result<OptionQuote, String> {
            let (k, t) = (field(strike, "strike")?, field(maturity, "maturity_days")?);
            let quote = match layout {
                Layout::BidAsk { bid, ask } => {
                    OptionQuote::from_bid_ask(k, t, field(bid, "bid")?, field(ask, "ask")?)
                }
                Layout::Mid { mid } => OptionQuote::from_mid(k, t, field(mid, "mid")?),
            };
            quote.map_err(|e| match e {
                CoreError::Crossed { bid, ask } => format!("crossed: bid {bid} > ask {ask}"),
                CoreError::InvalidParameter { name, value, .. } | CoreError::Domain { name, value, .. } => {
                    let what = if matches!(name, "bid" | "ask" | "mid") { "non-positive price" } else { "must be positive" };
                    format!("{name}: {what}, got {value}")
                }
                other => other.to_string(),
            })
        })();
        match parsed {
            Ok(q) => quotes.push(q),
            Err(reason) => rows.push(RowError { line, reason }),
        }
    }
    if rows.is_empty() {
        Ok(quotes)
    } else {
        Err(QuoteFileError::Rows { rows, total })
    }
}

/// Writes quotes in the two-sided layout. Numbers use the shortest
/// representation that reads back to the same value.
pub fn write_quotes<W: Write>(out: W, quotes: &[OptionQuote]) -> Result<(), QuoteFileError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["strike", "maturity_days", "bid", "ask"])?;
    for q in quotes {
        w.write_record([q.strike(), q.maturity(), q.bid(), q.ask()].map(|v| v.to_string()))?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
