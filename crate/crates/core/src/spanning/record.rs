//! Flat text form of a [`HedgePortfolio`].
//!
//! ```text
//! # method=GQ2
//! # target_kind=call
//! # target_strike=100
//! # target_maturity=1
//! # spot=100
//! # target_value=13.592627730411967
//! # b0=0.000673108608
//! # order=15
//! # empty=false
//! maturity,strike,weight
//! 0.0833,60.52,0.00081
//! ```
//!
//! Header lines are `# key=value`; after the column line there is one leg
//! per row. Numbers use the shortest representation that parses back to the
//! same value.

use std::fmt::Write as _;

use super::{HedgeLeg, HedgePortfolio, MethodTag, SpanningError};
use crate::models::{OptionKind, OptionRef};
use crate::scalar::Real;

const COLUMNS: &str = "maturity,strike,weight";

pub fn write_record<T: Real>(p: &HedgePortfolio<T>) -> String {
    let kind = match p.target.kind {
        OptionKind::Call => "call",
        OptionKind::Put => "put",
    };
    let mut s = String::new();
    let _ = writeln!(s, "# method={}", p.method);
    let _ = writeln!(s, "# target_kind={kind}");
    let _ = writeln!(s, "# target_strike={}", p.target.strike);
    let _ = writeln!(s, "# target_maturity={}", p.target.maturity);
    let _ = writeln!(s, "# spot={}", p.spot);
    let _ = writeln!(s, "# target_value={}", p.target_value);
    let _ = writeln!(s, "# b0={}", p.b0);
    let _ = writeln!(s, "# order={}", p.order);
    let _ = writeln!(s, "# empty={}", p.empty);
    s.push_str(COLUMNS);
    s.push('\n');
    for leg in &p.legs {
        let _ = writeln!(s, "{},{},{}", leg.maturity, leg.strike, leg.weight);
    }
    s
}

fn bad(line: usize, message: impl Into<String>) -> SpanningError {
    SpanningError::Record {
        line,
        message: message.into(),
    }
}

fn num<T: Real>(line: usize, key: &str, v: &str) -> Result<T, SpanningError> {
    v.trim().parse::<T>().map_err(|_| bad(line, format!("{key}: not a number: '{v}'")))
}

pub fn parse_record<T: Real>(text: &str) -> Result<HedgePortfolio<T>, SpanningError> {
    let mut method = None;
    let mut kind = None;
    let mut strike = None;
    let mut maturity = None;
    let mut spot = None;
    let mut target_value = None;
    let mut b0 = None;
    let mut order = None;
    let mut empty = None;
    let mut legs = Vec::new();
    let mut in_body = false;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let raw = raw.trim();
        if raw.is_empty() {
            continue;
        }
        if let Some(h) = raw.strip_prefix('#') {
            if in_body {
                return Err(bad(line, "header line after leg rows"));
            }
            let (key, value) = h.trim().split_once('=').ok_or_else(|| bad(line, "expected key=value"))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "method" => method = Some(value.parse::<MethodTag>().map_err(|e| bad(line, e))?),
                "target_kind" => {
                    kind = Some(match value {
                        "call" => OptionKind::Call,
                        "put" => OptionKind::Put,
                        other => return Err(bad(line, format!("unknown option kind '{other}'"))),
                    })
                }
                "target_strike" => strike = Some(num::<T>(line, key, value)?),
                "target_maturity" => maturity = Some(num::<T>(line, key, value)?),
                "spot" => spot = Some(num::<T>(line, key, value)?),
                "target_value" => target_value = Some(num::<T>(line, key, value)?),
                "b0" => b0 = Some(num::<T>(line, key, value)?),
                "order" => order = Some(value.parse::<usize>().map_err(|_| bad(line, "order: not an integer"))?),
                "empty" => empty = Some(value.parse::<bool>().map_err(|_| bad(line, "empty: not a bool"))?),
                other => return Err(bad(line, format!("unknown header key '{other}'"))),
            }
            continue;
        }
        if !in_body {
            if raw != COLUMNS {
                return Err(bad(line, format!("expected column line '{COLUMNS}'")));
            }
            in_body = true;
            continue;
        }
        let fields: Vec<&str> = raw.split(',').collect();
        let [m, k, w] = fields[..] else {
            return Err(bad(line, "expected 3 fields"));
        };
        legs.push(HedgeLeg {
            maturity: num(line, "maturity", m)?,
            strike: num(line, "strike", k)?,
            weight: num(line, "weight", w)?,
        });
    }

    let missing = |key: &str| bad(0, format!("missing header '{key}'"));
    Ok(HedgePortfolio {
        method: method.ok_or_else(|| missing("method"))?,
        target: OptionRef {
            strike: strike.ok_or_else(|| missing("target_strike"))?,
            maturity: maturity.ok_or_else(|| missing("target_maturity"))?,
            kind: kind.ok_or_else(|| missing("target_kind"))?,
        },
        spot: spot.ok_or_else(|| missing("spot"))?,
        target_value: target_value.ok_or_else(|| missing("target_value"))?,
        legs,
        b0: b0.ok_or_else(|| missing("b0"))?,
        order: order.ok_or_else(|| missing("order"))?,
        empty: empty.ok_or_else(|| missing("empty"))?,
    })
}
