//! Mining-hardware catalog and per-coin network constants.
//!
//! All quantities use one unit system: hashes per second, watts and US
//! dollars. The catalog is read from two CSV documents (machines and coins)
//! and is immutable once parsed.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{check, Error, Result};

pub const MACHINES_HEADER: [&str; 5] = ["name", "coin", "hash_rate_hs", "power_w", "price_usd"];
pub const COINS_HEADER: [&str; 5] = [
    "coin",
    "block_rate_per_s",
    "total_hash_rate_hs",
    "block_reward_tokens",
    "token_price_usd",
];

const BUNDLED_MACHINES: &str = include_str!("../data/machines.csv");
const BUNDLED_COINS: &str = include_str!("../data/coins.csv");

/// One hardware option for mining a specific coin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Machine {
    pub name: String,
    pub coin: String,
    /// Hashes per second.
    pub hash_rate: f64,
    /// Watts drawn while mining.
    pub power: f64,
    /// Purchase price in USD.
    pub price: f64,
}

impl Machine {
    pub fn new(
        name: impl Into<String>,
        coin: impl Into<String>,
        hash_rate: f64,
        power: f64,
        price: f64,
    ) -> Result<Self> {
        let name = name.into();
        let coin = coin.into();
        validate_name("machine name", &name)?;
        validate_name("coin identifier", &coin)?;
        Ok(Self {
            name,
            coin,
            hash_rate: check("hash rate", hash_rate, |v| v > 0.0, "hash rate must be positive")?,
            power: check("power", power, |v| v >= 0.0, "power must be non-negative")?,
            price: check("price", price, |v| v > 0.0, "price must be positive")?,
        })
    }
}

/// Consensus and market constants of one coin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoinParams {
    pub coin: String,
    /// Blocks per second.
    pub block_rate: f64,
    /// Network hash rate, hashes per second.
    pub total_hash_rate: f64,
    /// Tokens minted per block.
    pub block_reward: f64,
    /// USD per token.
    pub token_price: f64,
}

impl CoinParams {
    pub fn new(
        coin: impl Into<String>,
        block_rate: f64,
        total_hash_rate: f64,
        block_reward: f64,
        token_price: f64,
    ) -> Result<Self> {
        let coin = coin.into();
        validate_name("coin identifier", &coin)?;
        let positive = |v: f64| v > 0.0;
        Ok(Self {
            coin,
            block_rate: check("block rate", block_rate, positive, "block rate must be positive")?,
            total_hash_rate: check(
                "total hash rate",
                total_hash_rate,
                positive,
                "total hash rate must be positive",
            )?,
            block_reward: check(
                "block reward",
                block_reward,
                positive,
                "block reward must be positive",
            )?,
            token_price: check(
                "token price",
                token_price,
                positive,
                "token price must be positive",
            )?,
        })
    }
}

/// Environment shared by every coin: electricity price and investment period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EconParams {
    /// USD per kWh.
    pub electricity_cost: f64,
    /// Investment period in hours.
    pub duration: f64,
}

impl EconParams {
    pub const DEFAULT_ELECTRICITY_COST: f64 = 0.08;
    pub const HOURS_PER_YEAR: f64 = 8760.0;

    pub fn new(electricity_cost: f64, duration: f64) -> Result<Self> {
        Ok(Self {
            electricity_cost: check(
                "electricity cost",
                electricity_cost,
                |v| v >= 0.0,
                "electricity cost must be non-negative",
            )?,
            duration: check("duration", duration, |v| v > 0.0, "duration must be positive")?,
        })
    }
}

impl Default for EconParams {
    fn default() -> Self {
        Self {
            electricity_cost: Self::DEFAULT_ELECTRICITY_COST,
            duration: Self::HOURS_PER_YEAR,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MachineCatalog {
    machines: Vec<Machine>,
    coins: BTreeMap<String, CoinParams>,
}

impl MachineCatalog {
    /// Builds a catalog from already-validated parts, checking cross-references.
    pub fn new(machines: Vec<Machine>, coins: Vec<CoinParams>) -> Result<Self> {
        let numbered = |i: usize| i as u64 + 1;
        assemble(
            machines.into_iter().enumerate().map(|(i, m)| (numbered(i), m)).collect(),
            coins.into_iter().enumerate().map(|(i, c)| (numbered(i), c)).collect(),
        )
    }

    /// The dataset shipped with the crate.
    pub fn bundled() -> Self {
        parse_catalog(BUNDLED_MACHINES, BUNDLED_COINS).expect("bundled dataset is valid")
    }

    pub fn bundled_sources() -> (&'static str, &'static str) {
        (BUNDLED_MACHINES, BUNDLED_COINS)
    }

    pub fn machines(&self) -> &[Machine] {
        &self.machines
    }

    pub fn coins(&self) -> &BTreeMap<String, CoinParams> {
        &self.coins
    }

    pub fn coin(&self, coin: &str) -> Result<&CoinParams> {
        self.coins.get(coin).ok_or_else(|| self.unknown_coin(coin))
    }

    pub fn filter_by_coin(&self, coin: &str) -> Result<Vec<Machine>> {
        filter_by_coin(self, coin)
    }

    fn unknown_coin(&self, coin: &str) -> Error {
        Error::UnknownCoin {
            coin: coin.to_string(),
            available: self.coins.keys().cloned().collect::<Vec<_>>().join(", "),
        }
    }

    pub fn machines_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(MACHINES_HEADER).expect("in-memory write");
        for m in &self.machines {
            w.write_record([
                m.name.clone(),
                m.coin.clone(),
                m.hash_rate.to_string(),
                m.power.to_string(),
                m.price.to_string(),
            ])
            .expect("in-memory write");
        }
        into_string(w)
    }

    pub fn coins_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(COINS_HEADER).expect("in-memory write");
        for c in self.coins.values() {
            w.write_record([
                c.coin.clone(),
                c.block_rate.to_string(),
                c.total_hash_rate.to_string(),
                c.block_reward.to_string(),
                c.token_price.to_string(),
            ])
            .expect("in-memory write");
        }
        into_string(w)
    }
}

fn into_string(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
}

fn validate_name(what: &'static str, s: &str) -> Result<()> {
    if s.trim().is_empty() {
        return Err(Error::invalid(what, "must be nonempty"));
    }
    if s.trim() != s {
        return Err(Error::invalid(what, format!("`{s}` has surrounding whitespace")));
    }
    if s.starts_with('#') {
        return Err(Error::invalid(what, format!("`{s}` starts with the comment marker")));
    }
    Ok(())
}

/// Parses a real literal: decimal, scientific, or a `num/den` rational.
///
/// Rationals are evaluated as one IEEE division of the two parsed operands,
/// so `1/600` is bit-identical to `1.0 / 600.0`.
pub fn parse_real(s: &str) -> std::result::Result<f64, String> {
    let s = s.trim();
    if s.is_empty() {
        return Err("empty value".into());
    }
    let value = match s.split_once('/') {
        Some((num, den)) => {
            let num = parse_plain(num)?;
            let den = parse_plain(den)?;
            if den == 0.0 {
                return Err(format!("`{s}` divides by zero"));
            }
            num / den
        }
        None => parse_plain(s)?,
    };
    if !value.is_finite() {
        return Err(format!("`{s}` is not finite"));
    }
    Ok(value)
}

fn parse_plain(s: &str) -> std::result::Result<f64, String> {
    let s = s.trim();
    // f64::from_str also accepts "inf" and "NaN"; catalog numbers are digits only.
    let numeric = !s.is_empty()
        && s
            .chars()
            .all(|ch| ch.is_ascii_digit() || matches!(ch, '.' | 'e' | 'E' | '+' | '-'));
    if !numeric {
        return Err(format!("`{s}` is not a number"));
    }
    s.parse::<f64>()
        .map_err(|_| format!("`{s}` is not a number"))
}

/// The document with `#` comment lines and blank lines removed, plus the
/// original line number of every kept line.
struct Source {
    text: String,
    lines: Vec<u64>,
}

impl Source {
    fn new(text: &str) -> Self {
        let mut kept = String::with_capacity(text.len());
        let mut lines = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            kept.push_str(line);
            kept.push('\n');
            lines.push(i as u64 + 1);
        }
        Self { text: kept, lines }
    }

    fn reader(&self) -> csv::Reader<&[u8]> {
        csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(self.text.as_bytes())
    }

    fn original_line(&self, record: &csv::StringRecord) -> u64 {
        let kept = record.position().map_or(1, |p| p.line()) as usize;
        self.lines.get(kept.saturating_sub(1)).copied().unwrap_or(0)
    }
}

fn check_header(table: &'static str, rdr: &mut csv::Reader<&[u8]>, expected: &[&str]) -> Result<()> {
    let header = rdr.headers()?.clone();
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Err(Error::MissingHeader { table });
    }
    if header.iter().ne(expected.iter().copied()) {
        return Err(Error::BadHeader {
            table,
            expected: expected.join(","),
            found: header.iter().collect::<Vec<_>>().join(","),
        });
    }
    Ok(())
}

struct Row<'a> {
    table: &'static str,
    line: u64,
    record: &'a csv::StringRecord,
}

impl Row<'_> {
    fn text(&self, idx: usize, field: &'static str) -> Result<String> {
        let v = &self.record[idx];
        if v.is_empty() {
            return Err(self.field_error(field, format!("{field} must be nonempty")));
        }
        Ok(v.to_string())
    }

    fn real(&self, idx: usize, field: &'static str) -> Result<f64> {
        parse_real(&self.record[idx]).map_err(|m| self.field_error(field, m))
    }

    fn field_error(&self, field: &'static str, message: String) -> Error {
        Error::Field {
            table: self.table,
            line: self.line,
            field,
            message,
        }
    }

    /// Maps a constructor's parameter error onto this row's field.
    fn located(&self, err: Error, field_for: impl Fn(&str) -> &'static str) -> Error {
        match err {
            Error::InvalidParameter { name, reason } => {
                let message = reason
                    .split_once(": ")
                    .map(|(_, r)| r.to_string())
                    .unwrap_or(reason);
                self.field_error(field_for(name), message)
            }
            other => other,
        }
    }
}

fn rows<'a>(
    table: &'static str,
    source: &'a Source,
    rdr: &'a mut csv::Reader<&'a [u8]>,
    width: usize,
) -> impl Iterator<Item = Result<(u64, csv::StringRecord)>> + 'a {
    rdr.records().map(move |r| {
        let record = r?;
        let line = source.original_line(&record);
        if record.len() != width {
            return Err(Error::Row {
                table,
                line,
                message: format!("expected {width} fields, found {}", record.len()),
            });
        }
        Ok((line, record))
    })
}

pub fn parse_machines(text: &str) -> Result<Vec<(u64, Machine)>> {
    const TABLE: &str = "machines";
    let source = Source::new(text);
    let mut rdr = source.reader();
    check_header(TABLE, &mut rdr, &MACHINES_HEADER)?;
    let mut out = Vec::new();
    for row in rows(TABLE, &source, &mut rdr, MACHINES_HEADER.len()) {
        let (line, record) = row?;
        let row = Row {
            table: TABLE,
            line,
            record: &record,
        };
        let machine = Machine::new(
            row.text(0, "name")?,
            row.text(1, "coin")?,
            row.real(2, "hash_rate_hs")?,
            row.real(3, "power_w")?,
            row.real(4, "price_usd")?,
        )
        .map_err(|e| {
            row.located(e, |name| match name {
                "hash rate" => "hash_rate_hs",
                "power" => "power_w",
                "price" => "price_usd",
                "coin identifier" => "coin",
                _ => "name",
            })
        })?;
        out.push((line, machine));
    }
    Ok(out)
}

pub fn parse_coins(text: &str) -> Result<Vec<(u64, CoinParams)>> {
    const TABLE: &str = "coins";
    let source = Source::new(text);
    let mut rdr = source.reader();
    check_header(TABLE, &mut rdr, &COINS_HEADER)?;
    let mut out = Vec::new();
    for row in rows(TABLE, &source, &mut rdr, COINS_HEADER.len()) {
        let (line, record) = row?;
        let row = Row {
            table: TABLE,
            line,
            record: &record,
        };
        let coin = CoinParams::new(
            row.text(0, "coin")?,
            row.real(1, "block_rate_per_s")?,
            row.real(2, "total_hash_rate_hs")?,
            row.real(3, "block_reward_tokens")?,
            row.real(4, "token_price_usd")?,
        )
        .map_err(|e| {
            row.located(e, |name| match name {
                "block rate" => "block_rate_per_s",
                "total hash rate" => "total_hash_rate_hs",
                "block reward" => "block_reward_tokens",
                "token price" => "token_price_usd",
                _ => "coin",
            })
        })?;
        out.push((line, coin));
    }
    Ok(out)
}

/// Parses the machines and coins CSV documents into a validated catalog.
pub fn parse_catalog(machines_csv: &str, coins_csv: &str) -> Result<MachineCatalog> {
    let coins = parse_coins(coins_csv)?;
    let machines = parse_machines(machines_csv)?;

    assemble(machines, coins)
}

fn assemble(machines: Vec<(u64, Machine)>, coins: Vec<(u64, CoinParams)>) -> Result<MachineCatalog> {
    let mut by_id = BTreeMap::new();
    for (line, c) in coins {
        if by_id.contains_key(&c.coin) {
            return Err(Error::DuplicateCoin { line, coin: c.coin });
        }
        by_id.insert(c.coin.clone(), c);
    }
    let mut seen = HashSet::new();
    for (line, m) in &machines {
        if !seen.insert((m.name.as_str(), m.coin.as_str())) {
            return Err(Error::DuplicateMachine {
                line: *line,
                name: m.name.clone(),
                coin: m.coin.clone(),
            });
        }
        if !by_id.contains_key(&m.coin) {
            return Err(Error::UnresolvedCoin {
                line: *line,
                name: m.name.clone(),
                coin: m.coin.clone(),
            });
        }
    }
    Ok(MachineCatalog {
        machines: machines.into_iter().map(|(_, m)| m).collect(),
        coins: by_id,
    })
}

/// Machines mining `coin`, in catalog order.
pub fn filter_by_coin(catalog: &MachineCatalog, coin: &str) -> Result<Vec<Machine>> {
    catalog.coin(coin)?;
    Ok(catalog
        .machines
        .iter()
        .filter(|m| m.coin == coin)
        .cloned()
        .collect())
}
