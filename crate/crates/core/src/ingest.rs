//! SURFRAD station archive parsing.
//!
//! Daily SURFRAD files are whitespace-delimited text: station name on line 1,
//! latitude / longitude / elevation on line 2, then one row per minute with a
//! fixed column order (time fields, decimal time, solar zenith angle, and
//! twenty measured variables each followed by a QC flag). Missing measurements
//! are recorded as a -9999.9-family sentinel; they are preserved verbatim here
//! and dealt with downstream.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use chrono::{NaiveDate, NaiveDateTime};
use thiserror::Error;

/// Values at or below this threshold are treated as missing-data sentinels.
/// Archives print `-9999.9`; comparing against a threshold instead of an
/// exact float keeps the check immune to formatting differences.
pub const SENTINEL_THRESHOLD: f64 = -9000.0;

/// True if `v` is a missing-data sentinel.
pub fn is_sentinel(v: f64) -> bool {
    v <= SENTINEL_THRESHOLD
}

/// Canonical sentinel used when synthesizing rows.
pub const SENTINEL: f64 = -9999.9;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("line {line}: expected {expected} tokens, found {found}")]
    RowArity {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}, column {col}: cannot parse token `{token}`")]
    BadNumber {
        line: usize,
        col: usize,
        token: String,
    },
    #[error("no data files for station `{station}`, year {year} under {root}")]
    MissingData {
        station: String,
        year: i32,
        root: PathBuf,
    },
    #[error("duplicate timestamp {ts}")]
    DuplicateTimestamp { ts: NaiveDateTime },
    #[error("{path}: {source}")]
    InFile {
        path: PathBuf,
        #[source]
        source: Box<IngestError>,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// The twenty measured variables of a SURFRAD row, in file column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    DwSolar,
    UwSolar,
    DirectN,
    Diffuse,
    DwIr,
    DwCasetemp,
    DwDometemp,
    UwIr,
    UwCasetemp,
    UwDometemp,
    Uvb,
    Par,
    Netsolar,
    Netir,
    Totalnet,
    Temp,
    Rh,
    Windspd,
    Winddir,
    Pressure,
}

impl Var {
    pub const COUNT: usize = 20;

    /// All measured variables in file column order.
    pub const ALL: [Var; Var::COUNT] = [
        Var::DwSolar,
        Var::UwSolar,
        Var::DirectN,
        Var::Diffuse,
        Var::DwIr,
        Var::DwCasetemp,
        Var::DwDometemp,
        Var::UwIr,
        Var::UwCasetemp,
        Var::UwDometemp,
        Var::Uvb,
        Var::Par,
        Var::Netsolar,
        Var::Netir,
        Var::Totalnet,
        Var::Temp,
        Var::Rh,
        Var::Windspd,
        Var::Winddir,
        Var::Pressure,
    ];

    pub fn index(self) -> usize {
        Var::ALL.iter().position(|v| *v == self).expect("member of ALL")
    }

    pub fn name(self) -> &'static str {
        match self {
            Var::DwSolar => "dw_solar",
            Var::UwSolar => "uw_solar",
            Var::DirectN => "direct_n",
            Var::Diffuse => "diffuse",
            Var::DwIr => "dw_ir",
            Var::DwCasetemp => "dw_casetemp",
            Var::DwDometemp => "dw_dometemp",
            Var::UwIr => "uw_ir",
            Var::UwCasetemp => "uw_casetemp",
            Var::UwDometemp => "uw_dometemp",
            Var::Uvb => "uvb",
            Var::Par => "par",
            Var::Netsolar => "netsolar",
            Var::Netir => "netir",
            Var::Totalnet => "totalnet",
            Var::Temp => "temp",
            Var::Rh => "rh",
            Var::Windspd => "windspd",
            Var::Winddir => "winddir",
            Var::Pressure => "pressure",
        }
    }

    pub fn from_name(name: &str) -> Option<Var> {
        Var::ALL.iter().copied().find(|v| v.name() == name)
    }
}

/// Station identity and position.
#[derive(Debug, Clone, PartialEq)]
pub struct StationMeta {
    pub name: String,
    pub latitude: f64,
    pub longitude: f64,
    pub elevation_m: f64,
}

/// One minute-resolution station record.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub year: i32,
    pub jday: u32,
    pub month: u32,
    pub day: u32,
    pub hour: u32,
    pub minute: u32,
    /// Decimal time of day in hours.
    pub dt: f64,
    /// Solar zenith angle in degrees.
    pub zen: f64,
    values: [f64; Var::COUNT],
    qc: [i32; Var::COUNT],
}

impl Observation {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        year: i32,
        jday: u32,
        month: u32,
        day: u32,
        hour: u32,
        minute: u32,
        dt: f64,
        zen: f64,
        values: [f64; Var::COUNT],
        qc: [i32; Var::COUNT],
    ) -> Observation {
        Observation {
            year,
            jday,
            month,
            day,
            hour,
            minute,
            dt,
            zen,
            values,
            qc,
        }
    }

    pub fn timestamp(&self) -> NaiveDateTime {
        NaiveDate::from_ymd_opt(self.year, self.month, self.day)
            .and_then(|d| d.and_hms_opt(self.hour, self.minute, 0))
            .expect("validated during parsing")
    }

    pub fn value(&self, var: Var) -> f64 {
        self.values[var.index()]
    }

    pub fn qc(&self, var: Var) -> i32 {
        self.qc[var.index()]
    }

    pub fn set_value(&mut self, var: Var, v: f64) {
        self.values[var.index()] = v;
    }

    pub fn set_qc(&mut self, var: Var, flag: i32) {
        self.qc[var.index()] = flag;
    }

    /// Look up a value by column name: a measured variable, `dt`, `zen`, or
    /// one of the derived time fields (`minute`, `hour`, `month`).
    pub fn value_by_name(&self, name: &str) -> Option<f64> {
        match name {
            "dt" => Some(self.dt),
            "zen" => Some(self.zen),
            "minute" => Some(self.minute as f64),
            "hour" => Some(self.hour as f64),
            "month" => Some(self.month as f64),
            _ => Var::from_name(name).map(|v| self.value(v)),
        }
    }

    /// Whether `name` carries a usable value in this row: present, not a
    /// sentinel, and not flagged bad by QC (for variables that carry a flag).
    pub fn is_valid(&self, name: &str) -> bool {
        match name {
            "dt" => !is_sentinel(self.dt),
            "zen" => !is_sentinel(self.zen),
            "minute" | "hour" | "month" => true,
            _ => match Var::from_name(name) {
                Some(v) => !is_sentinel(self.value(v)) && self.qc(v) == 0,
                None => false,
            },
        }
    }
}

/// Column layout of a data row. SURFRAD archives follow every measured value
/// with a QC flag; synthetic fixtures may omit the flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RowLayout {
    pub qc_flags: bool,
}

impl RowLayout {
    /// The archive layout: value + QC flag pairs.
    pub fn surfrad() -> RowLayout {
        RowLayout { qc_flags: true }
    }

    /// Values only, no QC columns.
    pub fn no_qc() -> RowLayout {
        RowLayout { qc_flags: false }
    }

    pub fn tokens_per_row(&self) -> usize {
        8 + Var::COUNT * if self.qc_flags { 2 } else { 1 }
    }
}

impl Default for RowLayout {
    fn default() -> Self {
        RowLayout::surfrad()
    }
}

/// A full station record set, strictly ordered by timestamp.
#[derive(Debug, Clone)]
pub struct StationDataset {
    pub meta: StationMeta,
    rows: Vec<Observation>,
}

impl StationDataset {
    /// Sorts `rows` by timestamp and rejects duplicate minutes.
    pub fn new(meta: StationMeta, mut rows: Vec<Observation>) -> Result<StationDataset, IngestError> {
        rows.sort_by_key(Observation::timestamp);
        for pair in rows.windows(2) {
            if pair[0].timestamp() == pair[1].timestamp() {
                return Err(IngestError::DuplicateTimestamp {
                    ts: pair[0].timestamp(),
                });
            }
        }
        Ok(StationDataset { meta, rows })
    }

    pub fn rows(&self) -> &[Observation] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Parse the two header lines of a daily file.
pub fn parse_header(line1: &str, line2: &str) -> Result<StationMeta, IngestError> {
    let name = line1.trim();
    if name.is_empty() {
        return Err(IngestError::MalformedHeader(
            "station name line is empty".to_string(),
        ));
    }
    let mut nums = Vec::with_capacity(3);
    for tok in line2.split_whitespace() {
        if nums.len() == 3 {
            break;
        }
        match tok.parse::<f64>() {
            Ok(v) => nums.push(v),
            Err(_) => break,
        }
    }
    if nums.len() != 3 {
        return Err(IngestError::MalformedHeader(format!(
            "expected three numeric tokens (lat lon elev), got `{}`",
            line2.trim()
        )));
    }
    let (latitude, longitude, elevation_m) = (nums[0], nums[1], nums[2]);
    if !(-90.0..=90.0).contains(&latitude) || !(-180.0..=180.0).contains(&longitude) {
        return Err(IngestError::MalformedHeader(format!(
            "lat/lon out of range: {latitude} {longitude}"
        )));
    }
    Ok(StationMeta {
        name: name.to_string(),
        latitude,
        longitude,
        elevation_m,
    })
}

struct RowCursor<'a> {
    tokens: Vec<&'a str>,
    line: usize,
    col: usize,
}

impl<'a> RowCursor<'a> {
    fn next_f64(&mut self) -> Result<f64, IngestError> {
        self.col += 1;
        let token = self.tokens[self.col - 1];
        let v: f64 = token.parse().map_err(|_| IngestError::BadNumber {
            line: self.line,
            col: self.col,
            token: token.to_string(),
        })?;
        if !v.is_finite() {
            return Err(IngestError::BadNumber {
                line: self.line,
                col: self.col,
                token: token.to_string(),
            });
        }
        Ok(v)
    }

    fn next_int(&mut self) -> Result<i64, IngestError> {
        self.col += 1;
        let token = self.tokens[self.col - 1];
        token.parse().map_err(|_| IngestError::BadNumber {
            line: self.line,
            col: self.col,
            token: token.to_string(),
        })
    }

    fn bad(&self, col: usize) -> IngestError {
        IngestError::BadNumber {
            line: self.line,
            col,
            token: self.tokens[col - 1].to_string(),
        }
    }
}

/// Parse the data body of a daily file. Sentinel values are kept verbatim.
/// Line numbers in errors are 1-based over `body`.
pub fn parse_rows(body: &str, layout: RowLayout) -> Result<Vec<Observation>, IngestError> {
    let expected = layout.tokens_per_row();
    let mut out = Vec::new();
    for (idx, raw) in body.lines().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        let line = idx + 1;
        let tokens: Vec<&str> = raw.split_whitespace().collect();
        if tokens.len() != expected {
            return Err(IngestError::RowArity {
                line,
                expected,
                found: tokens.len(),
            });
        }
        let mut cur = RowCursor { tokens, line, col: 0 };

        let year = cur.next_int()? as i32;
        let jday = cur.next_int()? as u32;
        let month_col = cur.col + 1;
        let month = cur.next_int()? as u32;
        let day = cur.next_int()? as u32;
        let hour = cur.next_int()? as u32;
        let minute_col = cur.col + 1;
        let minute = cur.next_int()? as u32;
        let dt = cur.next_f64()?;
        let zen_col = cur.col + 1;
        let zen = cur.next_f64()?;

        if NaiveDate::from_ymd_opt(year, month, day).is_none() {
            return Err(cur.bad(month_col));
        }
        if hour > 23 || minute > 59 {
            return Err(cur.bad(minute_col));
        }
        if !is_sentinel(zen) && !(0.0..=180.0).contains(&zen) {
            return Err(cur.bad(zen_col));
        }

        let mut values = [0.0; Var::COUNT];
        let mut qc = [0i32; Var::COUNT];
        for i in 0..Var::COUNT {
            values[i] = cur.next_f64()?;
            if layout.qc_flags {
                qc[i] = cur.next_int()? as i32;
            }
        }
        out.push(Observation {
            year,
            jday,
            month,
            day,
            hour,
            minute,
            dt,
            zen,
            values,
            qc,
        });
    }
    Ok(out)
}

/// Render an observation back to the layout's token order.
///
/// Canonical precisions: `dt` with 3 decimals, `zen` with 2, measured values
/// with 1, flags and time fields as integers. Golden fixtures are written
/// with the same precisions so a parse/serialize round trip is exact.
pub fn serialize_row(obs: &Observation, layout: RowLayout) -> String {
    let mut s = String::with_capacity(256);
    let _ = write!(
        s,
        "{} {} {} {} {} {} {:.3} {:.2}",
        obs.year, obs.jday, obs.month, obs.day, obs.hour, obs.minute, obs.dt, obs.zen
    );
    for var in Var::ALL {
        let _ = write!(s, " {:.1}", obs.value(var));
        if layout.qc_flags {
            let _ = write!(s, " {}", obs.qc(var));
        }
    }
    s
}

/// Write a full daily file (header plus rows).
pub fn serialize_day_file(meta: &StationMeta, rows: &[Observation], layout: RowLayout) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{}", meta.name);
    let _ = writeln!(
        s,
        " {:.3} {:.3} {} m",
        meta.latitude, meta.longitude, meta.elevation_m
    );
    for obs in rows {
        let _ = writeln!(s, "{}", serialize_row(obs, layout));
    }
    s
}

/// A known SURFRAD station: archive identifiers plus nominal position.
#[derive(Debug, Clone, Copy)]
pub struct StationInfo {
    /// Identifier used on the command line and in cache paths.
    pub id: &'static str,
    /// Three-letter file prefix, e.g. `bon` in `bon18001.dat`.
    pub file_prefix: &'static str,
    /// Directory name in the public archive.
    pub archive_dir: &'static str,
    pub latitude: f64,
    pub longitude: f64,
    pub elevation_m: f64,
}

impl StationInfo {
    pub fn meta(&self) -> StationMeta {
        StationMeta {
            name: self.id.to_string(),
            latitude: self.latitude,
            longitude: self.longitude,
            elevation_m: self.elevation_m,
        }
    }
}

/// The three stations this toolkit targets.
pub const STATIONS: [StationInfo; 3] = [
    StationInfo {
        id: "bondville",
        file_prefix: "bon",
        archive_dir: "Bondville_IL",
        latitude: 40.05,
        longitude: -88.37,
        elevation_m: 213.0,
    },
    StationInfo {
        id: "desertrock",
        file_prefix: "dra",
        archive_dir: "Desert_Rock_NV",
        latitude: 36.62,
        longitude: -116.02,
        elevation_m: 1007.0,
    },
    StationInfo {
        id: "pennstate",
        file_prefix: "psu",
        archive_dir: "Penn_State_PA",
        latitude: 40.72,
        longitude: -77.93,
        elevation_m: 376.0,
    },
];

pub fn station_by_id(id: &str) -> Option<&'static StationInfo> {
    STATIONS.iter().find(|s| s.id == id)
}

/// Deterministic sub-seed: FNV-1a of `tag` folded into `master`. Keeps
/// per-station randomness independent of processing order.
pub fn derive_seed(master: u64, tag: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in tag.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h ^ master
}

/// `bon18001.dat`-style name for a station/year/julian-day triple.
pub fn day_file_name(station: &StationInfo, year: i32, jday: u32) -> String {
    format!(
        "{}{:02}{:03}.dat",
        station.file_prefix,
        year.rem_euclid(100),
        jday
    )
}

fn matches_day_file(name: &str, prefix: &str, year: i32) -> bool {
    let Some(rest) = name.strip_prefix(prefix) else {
        return false;
    };
    let Some(digits) = rest.strip_suffix(".dat") else {
        return false;
    };
    if digits.len() != 5 || !digits.chars().all(|c| c.is_ascii_digit()) {
        return false;
    }
    digits[..2].parse::<i32>().unwrap() == year.rem_euclid(100)
}

fn parse_day_file(path: &Path) -> Result<(StationMeta, Vec<Observation>), IngestError> {
    let text = std::fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let in_file = |source: IngestError| IngestError::InFile {
        path: path.to_path_buf(),
        source: Box::new(source),
    };
    let mut lines = text.splitn(3, '\n');
    let line1 = lines.next().unwrap_or("");
    let line2 = lines.next().unwrap_or("");
    let body = lines.next().unwrap_or("");
    let meta = parse_header(line1, line2).map_err(in_file)?;
    let rows = parse_rows(body, RowLayout::surfrad()).map_err(in_file)?;
    Ok((meta, rows))
}

/// Load and merge all daily files for `station` over `years`.
///
/// Files are looked up under `root/<id>/<year>/`, then `root/<id>/`, then
/// `root` itself, so both the cache layout and flat fixture directories work.
/// The merged dataset is timestamp-sorted regardless of file order.
pub fn load_station(
    root: &Path,
    station: &StationInfo,
    years: &[i32],
) -> Result<StationDataset, IngestError> {
    let mut files: Vec<PathBuf> = Vec::new();
    for &year in years {
        let candidates = [
            root.join(station.id).join(year.to_string()),
            root.join(station.id),
            root.to_path_buf(),
        ];
        let mut matched = Vec::new();
        for dir in &candidates {
            if !dir.is_dir() {
                continue;
            }
            let entries = std::fs::read_dir(dir).map_err(|source| IngestError::Io {
                path: dir.clone(),
                source,
            })?;
            for entry in entries {
                let entry = entry.map_err(|source| IngestError::Io {
                    path: dir.clone(),
                    source,
                })?;
                let name = entry.file_name();
                let name = name.to_string_lossy();
                if matches_day_file(&name, station.file_prefix, year) {
                    matched.push(entry.path());
                }
            }
            if !matched.is_empty() {
                break;
            }
        }
        if matched.is_empty() {
            return Err(IngestError::MissingData {
                station: station.id.to_string(),
                year,
                root: root.to_path_buf(),
            });
        }
        files.extend(matched);
    }
    files.sort();
    files.dedup();

    let mut meta: Option<StationMeta> = None;
    let mut rows = Vec::new();
    let mut seen: HashSet<NaiveDateTime> = HashSet::new();
    for path in &files {
        let (file_meta, file_rows) = parse_day_file(path)?;
        meta.get_or_insert(file_meta);
        for obs in &file_rows {
            if !seen.insert(obs.timestamp()) {
                return Err(IngestError::InFile {
                    path: path.clone(),
                    source: Box::new(IngestError::DuplicateTimestamp {
                        ts: obs.timestamp(),
                    }),
                });
            }
        }
        rows.extend(file_rows);
    }
    StationDataset::new(meta.expect("at least one file parsed"), rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::Datelike;

    pub(crate) fn test_obs(year: i32, month: u32, day: u32, hour: u32, minute: u32) -> Observation {
        let date = NaiveDate::from_ymd_opt(year, month, day).unwrap();
        let mut values = [0.0; Var::COUNT];
        for (i, v) in values.iter_mut().enumerate() {
            *v = 10.0 + i as f64;
        }
        Observation::new(
            year,
            date.ordinal(),
            month,
            day,
            hour,
            minute,
            hour as f64 + minute as f64 / 60.0,
            45.5,
            values,
            [0; Var::COUNT],
        )
    }

    #[test]
    fn header_parses_name_and_coordinates() {
        let meta = parse_header("Bondville", " 40.05 -88.37 213 m version 1").unwrap();
        assert_eq!(meta.name, "Bondville");
        assert_eq!(meta.latitude, 40.05);
        assert_eq!(meta.longitude, -88.37);
        assert_eq!(meta.elevation_m, 213.0);
    }

    #[test]
    fn header_rejects_empty_name() {
        assert!(matches!(
            parse_header("", " 40.05 -88.37 213 m"),
            Err(IngestError::MalformedHeader(_))
        ));
    }

    #[test]
    fn header_rejects_non_numeric_tokens() {
        assert!(matches!(
            parse_header("X", "a b c"),
            Err(IngestError::MalformedHeader(_))
        ));
    }

    fn fixture_row(dw_solar: &str) -> String {
        let mut tokens = vec![
            "2018".to_string(),
            "1".to_string(),
            "1".to_string(),
            "1".to_string(),
            "12".to_string(),
            "30".to_string(),
            "12.500".to_string(),
            "65.23".to_string(),
        ];
        tokens.push(dw_solar.to_string());
        tokens.push("0".to_string());
        for i in 1..Var::COUNT {
            tokens.push(format!("{}.0", i));
            tokens.push("0".to_string());
        }
        tokens.join(" ")
    }

    #[test]
    fn rows_parse_values_in_order() {
        let rows = parse_rows(&fixture_row("356.7"), RowLayout::surfrad()).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].value(Var::DwSolar), 356.7);
        assert_eq!(rows[0].hour, 12);
        assert_eq!(rows[0].minute, 30);
        assert_eq!(rows[0].value(Var::Pressure), 19.0);
    }

    #[test]
    fn rows_preserve_sentinels_verbatim() {
        let rows = parse_rows(&fixture_row("-9999.9"), RowLayout::surfrad()).unwrap();
        assert!(is_sentinel(rows[0].value(Var::DwSolar)));
        assert_eq!(rows[0].value(Var::DwSolar), -9999.9);
    }

    #[test]
    fn empty_body_yields_no_rows() {
        assert!(parse_rows("", RowLayout::surfrad()).unwrap().is_empty());
        assert!(parse_rows("\n  \n", RowLayout::surfrad()).unwrap().is_empty());
    }

    #[test]
    fn row_arity_reports_line_number() {
        let body = format!("{}\n1 2 3", fixture_row("1.0"));
        match parse_rows(&body, RowLayout::surfrad()) {
            Err(IngestError::RowArity { line, found, .. }) => {
                assert_eq!(line, 2);
                assert_eq!(found, 3);
            }
            other => panic!("expected RowArity, got {other:?}"),
        }
    }

    #[test]
    fn bad_number_reports_column() {
        let row = fixture_row("oops");
        match parse_rows(&row, RowLayout::surfrad()) {
            Err(IngestError::BadNumber { line, col, token }) => {
                assert_eq!(line, 1);
                assert_eq!(col, 9);
                assert_eq!(token, "oops");
            }
            other => panic!("expected BadNumber, got {other:?}"),
        }
    }

    #[test]
    fn serialize_round_trips_parsed_tokens() {
        let row = fixture_row("356.7");
        let parsed = parse_rows(&row, RowLayout::surfrad()).unwrap();
        let out = serialize_row(&parsed[0], RowLayout::surfrad());
        let orig: Vec<&str> = row.split_whitespace().collect();
        let back: Vec<&str> = out.split_whitespace().collect();
        assert_eq!(orig.len(), back.len());
        for (a, b) in orig.iter().zip(&back) {
            assert_eq!(
                a.parse::<f64>().unwrap(),
                b.parse::<f64>().unwrap(),
                "token {a} vs {b}"
            );
        }
    }

    #[test]
    fn dataset_rejects_duplicate_minutes() {
        let meta = parse_header("X", "1 2 3").unwrap();
        let rows = vec![test_obs(2018, 1, 1, 7, 0), test_obs(2018, 1, 1, 7, 0)];
        assert!(matches!(
            StationDataset::new(meta, rows),
            Err(IngestError::DuplicateTimestamp { .. })
        ));
    }

    #[test]
    fn dataset_sorts_rows() {
        let meta = parse_header("X", "1 2 3").unwrap();
        let rows = vec![test_obs(2018, 1, 1, 8, 0), test_obs(2018, 1, 1, 7, 0)];
        let ds = StationDataset::new(meta, rows).unwrap();
        assert!(ds.rows()[0].timestamp() < ds.rows()[1].timestamp());
    }
}
