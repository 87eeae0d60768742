//! NORAD three-line element sets and two-body propagation.
//!
//! Element lines are parsed by fixed columns. Both lines of a record must
//! carry a valid modulo-10 checksum in column 69; records that fail it are
//! skipped and reported, everything else that is malformed is a hard error.
//!
//! Positions come from Keplerian two-body motion on the mean elements, not
//! SGP4. Over a few hours that drifts by kilometres from a perturbed
//! ephemeris, which is fine for building a link graph at one instant.

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::path::Path;

use chrono::{DateTime, Datelike, Duration, TimeZone, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Earth gravitational parameter, km^3/s^2.
pub const MU_EARTH: f64 = 398_600.441_8;
/// Equatorial radius, km.
pub const EARTH_RADIUS_KM: f64 = 6378.137;
pub const SECONDS_PER_DAY: f64 = 86_400.0;
/// Default propagation window around the element epoch.
pub const MAX_PROPAGATION_DAYS: f64 = 7.0;
pub const LINE_LEN: usize = 69;

const MICROS_PER_DAY: i64 = 86_400_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct TleRecord {
    pub name: String,
    pub catalog_number: u32,
    pub epoch: DateTime<Utc>,
    /// Radians.
    pub inclination: f64,
    /// Right ascension of the ascending node, radians.
    pub raan: f64,
    pub eccentricity: f64,
    /// Radians.
    pub arg_perigee: f64,
    /// Radians.
    pub mean_anomaly: f64,
    /// Revolutions per day.
    pub mean_motion: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SkippedRecord {
    /// 1-based line number of the first element line.
    pub line: usize,
    pub name: String,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParsedTle {
    pub records: Vec<TleRecord>,
    pub skipped: Vec<SkippedRecord>,
}

/// Modulo-10 checksum over columns 1-68: digits count their value, '-' counts 1.
pub fn checksum(line: &str) -> u8 {
    let sum: u32 = line
        .bytes()
        .take(LINE_LEN - 1)
        .map(|b| match b {
            b'0'..=b'9' => u32::from(b - b'0'),
            b'-' => 1,
            _ => 0,
        })
        .sum();
    (sum % 10) as u8
}

pub fn checksum_ok(line: &str) -> bool {
    line.len() == LINE_LEN
        && line
            .as_bytes()
            .get(LINE_LEN - 1)
            .is_some_and(|&b| b.is_ascii_digit() && b - b'0' == checksum(line))
}

fn col(line: &str, first: usize, last: usize) -> &str {
    &line[first - 1..last]
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn num<T: std::str::FromStr>(
    line: &str,
    lineno: usize,
    first: usize,
    last: usize,
    what: &str,
) -> Result<T> {
    let raw = col(line, first, last).trim();
    raw.parse().map_err(|_| {
        perr(
            lineno,
            format!("{what}: cannot parse {raw:?} (columns {first}-{last})"),
        )
    })
}

fn alpha5_digit(c: u8) -> Option<u32> {
    // A-Z without I and O, A = 10
    match c {
        b'0'..=b'9' => Some(u32::from(c - b'0')),
        b'A'..=b'H' => Some(u32::from(c - b'A') + 10),
        b'J'..=b'N' => Some(u32::from(c - b'J') + 18),
        b'P'..=b'Z' => Some(u32::from(c - b'P') + 23),
        _ => None,
    }
}

fn catalog_number(line: &str, lineno: usize) -> Result<u32> {
    let raw = col(line, 3, 7);
    let bytes = raw.trim_start().as_bytes();
    let bad = || perr(lineno, format!("catalog number: cannot parse {raw:?}"));
    let (&lead, rest) = bytes.split_first().ok_or_else(bad)?;
    let lead = alpha5_digit(lead).ok_or_else(bad)?;
    let rest_str = std::str::from_utf8(rest).map_err(|_| bad())?;
    let tail: u32 = if rest_str.is_empty() {
        0
    } else {
        rest_str.parse().map_err(|_| bad())?
    };
    Ok(lead * 10u32.pow(rest.len() as u32) + tail)
}

fn format_catalog(n: u32) -> String {
    if n < 100_000 {
        return format!("{n:05}");
    }
    let lead = n / 10_000;
    let letter = match lead {
        10..=17 => b'A' + (lead - 10) as u8,
        18..=22 => b'J' + (lead - 18) as u8,
        _ => b'P' + (lead - 23) as u8,
    };
    format!("{}{:04}", letter as char, n % 10_000)
}

fn parse_epoch(line: &str, lineno: usize) -> Result<DateTime<Utc>> {
    let yy: i32 = num(line, lineno, 19, 20, "epoch year")?;
    let year = if yy >= 57 { 1900 + yy } else { 2000 + yy };
    let raw = col(line, 21, 32).trim();
    let bad = || perr(lineno, format!("epoch day: cannot parse {raw:?}"));
    let (int_part, frac_part) = raw.split_once('.').unwrap_or((raw, ""));
    let day: i64 = int_part.parse().map_err(|_| bad())?;
    if !(1..=366).contains(&day) || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let frac_micros = if frac_part.is_empty() {
        0
    } else {
        let digits: u128 = frac_part.parse().map_err(|_| bad())?;
        let scale = 10u128.pow(frac_part.len() as u32);
        ((digits * MICROS_PER_DAY as u128 + scale / 2) / scale) as i64
    };
    let start = Utc
        .with_ymd_and_hms(year, 1, 1, 0, 0, 0)
        .single()
        .ok_or_else(bad)?;
    Ok(start + Duration::microseconds((day - 1) * MICROS_PER_DAY + frac_micros))
}

fn angle(line: &str, lineno: usize, first: usize, last: usize, what: &str) -> Result<f64> {
    let deg: f64 = num(line, lineno, first, last, what)?;
    if !deg.is_finite() {
        return Err(perr(lineno, format!("{what}: not finite")));
    }
    Ok(normalize_angle(deg.to_radians()))
}

/// Wraps an angle into `[0, 2pi)`.
pub fn normalize_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

fn element_line(raw: &str, lineno: usize, number: char) -> Result<&str> {
    let line = raw.trim_end();
    if !line.is_ascii() {
        return Err(perr(lineno, "non-ASCII characters in element line"));
    }
    if line.len() != LINE_LEN {
        return Err(perr(
            lineno,
            format!(
                "element line {number} has {} characters, expected {LINE_LEN}",
                line.len()
            ),
        ));
    }
    Ok(line)
}

fn is_element_line(line: &str, number: char) -> bool {
    let mut chars = line.chars();
    chars.next() == Some(number) && chars.next() == Some(' ')
}

fn parse_record(name: &str, l1: &str, n1: usize, l2: &str, n2: usize) -> Result<TleRecord> {
    let catalog = catalog_number(l1, n1)?;
    let catalog2 = catalog_number(l2, n2)?;
    if catalog != catalog2 {
        return Err(perr(
            n2,
            format!("catalog number {catalog2} does not match line 1 ({catalog})"),
        ));
    }
    let epoch = parse_epoch(l1, n1)?;
    let ecc_raw = col(l2, 27, 33);
    if !ecc_raw.bytes().all(|b| b.is_ascii_digit() || b == b' ') || ecc_raw.trim().is_empty() {
        return Err(perr(n2, format!("eccentricity: cannot parse {ecc_raw:?}")));
    }
    let eccentricity: f64 = format!("0.{}", ecc_raw.trim())
        .parse()
        .map_err(|_| perr(n2, "eccentricity"))?;
    let mean_motion: f64 = num(l2, n2, 53, 63, "mean motion")?;
    if !(mean_motion > 0.0 && mean_motion.is_finite()) {
        return Err(perr(
            n2,
            format!("mean motion must be positive, got {mean_motion}"),
        ));
    }
    Ok(TleRecord {
        name: name.to_string(),
        catalog_number: catalog,
        epoch,
        inclination: angle(l2, n2, 9, 16, "inclination")?,
        raan: angle(l2, n2, 18, 25, "right ascension")?,
        eccentricity,
        arg_perigee: angle(l2, n2, 35, 42, "argument of perigee")?,
        mean_anomaly: angle(l2, n2, 44, 51, "mean anomaly")?,
        mean_motion,
    })
}

/// Parses 3LE text (name line, line 1, line 2 per record). A record without
/// a name line is accepted and gets an empty name; a leading "0 " on the name
/// line is dropped. Blank lines are ignored.
pub fn parse_3le(text: &str) -> Result<ParsedTle> {
    let mut out = ParsedTle::default();
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty())
        .peekable();
    while let Some((lineno, line)) = lines.next() {
        let (name, (n1, raw1)) = if is_element_line(line, '1') {
            (String::new(), (lineno, line))
        } else if is_element_line(line, '2') {
            return Err(perr(lineno, "line 2 without preceding line 1"));
        } else {
            let name = line.trim();
            let name = name.strip_prefix("0 ").unwrap_or(name).trim().to_string();
            let next = lines
                .next()
                .ok_or_else(|| perr(lineno, format!("record {name:?} has no element lines")))?;
            (name, next)
        };
        let l1 = element_line(raw1, n1, '1')?;
        if !is_element_line(l1, '1') {
            return Err(perr(n1, "expected element line 1"));
        }
        let (n2, raw2) = lines
            .next()
            .ok_or_else(|| perr(n1, "element line 1 without line 2"))?;
        let l2 = element_line(raw2, n2, '2')?;
        if !is_element_line(l2, '2') {
            return Err(perr(n2, "expected element line 2"));
        }
        let bad: Vec<usize> = [(n1, l1), (n2, l2)]
            .iter()
            .filter(|(_, l)| !checksum_ok(l))
            .map(|&(n, _)| n)
            .collect();
        if !bad.is_empty() {
            out.skipped.push(SkippedRecord {
                line: n1,
                name,
                reason: format!("checksum mismatch on line(s) {bad:?}"),
            });
            continue;
        }
        out.records.push(parse_record(&name, l1, n1, l2, n2)?);
    }
    Ok(out)
}

pub fn read_3le(path: impl AsRef<Path>) -> Result<ParsedTle> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_3le(&text)
}

/// Downloads 3LE text from `url`.
#[cfg(feature = "fetch")]
pub fn fetch_3le(url: &str) -> Result<String> {
    let fail = |e: reqwest::Error| Error::arg(format!("fetching {url}: {e}"));
    reqwest::blocking::get(url)
        .map_err(fail)?
        .error_for_status()
        .map_err(fail)?
        .text()
        .map_err(fail)
}

fn with_checksum(mut body: String) -> String {
    let c = checksum(&body);
    body.push(char::from(b'0' + c));
    body
}

impl TleRecord {
    /// Formats the record as three lines with valid checksums. Fields the
    /// record does not carry (drag terms, designator, counters) are written
    /// as zeros or blanks.
    pub fn to_3le(&self) -> String {
        let start = Utc
            .with_ymd_and_hms(self.epoch.year(), 1, 1, 0, 0, 0)
            .unwrap();
        let micros = (self.epoch - start).num_microseconds().unwrap_or(0);
        let day = micros / MICROS_PER_DAY + 1;
        let frac = ((micros % MICROS_PER_DAY) as f64 / 864.0).round() as i64;
        let (day, frac) = if frac >= 100_000_000 {
            (day + 1, frac - 100_000_000)
        } else {
            (day, frac)
        };
        let sat = format_catalog(self.catalog_number);

        let mut l1 = String::with_capacity(LINE_LEN);
        write!(
            l1,
            "1 {sat}U {:<8} {:02}{:03}.{:08}  .00000000  00000-0  00000-0 0  999",
            "",
            self.epoch.year() % 100,
            day,
            frac,
        )
        .unwrap();
        let ecc = (self.eccentricity * 1e7).round() as u64;
        let mut l2 = String::with_capacity(LINE_LEN);
        write!(
            l2,
            "2 {sat} {:8.4} {:8.4} {:07} {:8.4} {:8.4} {:11.8}{:>5}",
            self.inclination.to_degrees(),
            self.raan.to_degrees(),
            ecc,
            self.arg_perigee.to_degrees(),
            self.mean_anomaly.to_degrees(),
            self.mean_motion,
            0
        )
        .unwrap();
        format!(
            "{}\n{}\n{}\n",
            self.name,
            with_checksum(l1),
            with_checksum(l2)
        )
    }

    pub fn mean_motion_rad_per_sec(&self) -> f64 {
        self.mean_motion * TAU / SECONDS_PER_DAY
    }

    /// Semi-major axis in km from the mean motion.
    pub fn semi_major_axis(&self) -> f64 {
        semi_major_axis_km(self.mean_motion)
    }

    pub fn period_seconds(&self) -> f64 {
        SECONDS_PER_DAY / self.mean_motion
    }
}

/// `a = (mu / n^2)^(1/3)` with `n` in rad/s.
pub fn semi_major_axis_km(mean_motion_rev_per_day: f64) -> f64 {
    let n = mean_motion_rev_per_day * TAU / SECONDS_PER_DAY;
    (MU_EARTH / (n * n)).cbrt()
}

/// Solves Kepler's equation `E - e sin E = M` by bracketed Newton iteration.
pub fn solve_kepler(mean_anomaly: f64, e: f64, tol: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&e) {
        return Err(Error::arg(format!("eccentricity {e} outside [0, 1)")));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::arg(format!("tolerance must be positive, got {tol}")));
    }
    if !mean_anomaly.is_finite() {
        return Err(Error::arg(format!(
            "mean anomaly must be finite, got {mean_anomaly}"
        )));
    }
    // Solve for M reduced into [-pi, pi] and shift the root back by the same
    // number of turns; f(E) = E - e sin E - M is increasing, so [-pi, pi]
    // brackets the root and Newton steps that leave the bracket bisect.
    let turns = (mean_anomaly / TAU).round();
    let m = mean_anomaly - turns * TAU;
    let f = |x: f64| x - e * x.sin() - m;
    let (mut lo, mut hi) = (-std::f64::consts::PI, std::f64::consts::PI);
    let mut big_e = if e > 0.8 {
        std::f64::consts::PI.copysign(m)
    } else {
        m
    };
    for _ in 0..100 {
        let fx = f(big_e);
        if fx.abs() < tol {
            return Ok(big_e + turns * TAU);
        }
        if fx < 0.0 {
            lo = big_e;
        } else {
            hi = big_e;
        }
        let next = big_e - fx / (1.0 - e * big_e.cos());
        big_e = if next > lo && next < hi {
            next
        } else {
            0.5 * (lo + hi)
        };
    }
    let residual = f(big_e);
    if residual.abs() < tol {
        Ok(big_e + turns * TAU)
    } else {
        Err(Error::Numeric(format!(
            "Kepler iteration did not converge for M={mean_anomaly}, e={e} (residual {residual:e})"
        )))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateVector {
    /// Earth-centred inertial position, km.
    pub position: [f64; 3],
    pub timestamp: DateTime<Utc>,
}

impl StateVector {
    pub fn radius(&self) -> f64 {
        norm(self.position)
    }

    pub fn distance_to(&self, other: &StateVector) -> f64 {
        norm([
            self.position[0] - other.position[0],
            self.position[1] - other.position[1],
            self.position[2] - other.position[2],
        ])
    }
}

fn norm(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Propagates to `t`, refusing targets more than [`MAX_PROPAGATION_DAYS`]
/// from the epoch.
pub fn propagate(rec: &TleRecord, t: DateTime<Utc>) -> Result<StateVector> {
    let days = seconds_between(rec.epoch, t) / SECONDS_PER_DAY;
    if days.abs() > MAX_PROPAGATION_DAYS {
        return Err(Error::OutOfWindow {
            days,
            limit_days: MAX_PROPAGATION_DAYS,
        });
    }
    Ok(propagate_unchecked(rec, t))
}

fn seconds_between(from: DateTime<Utc>, to: DateTime<Utc>) -> f64 {
    let d = to - from;
    match d.num_nanoseconds() {
        Some(ns) => ns as f64 * 1e-9,
        None => d.num_milliseconds() as f64 * 1e-3,
    }
}

/// Two-body propagation with no window check.
pub fn propagate_unchecked(rec: &TleRecord, t: DateTime<Utc>) -> StateVector {
    let n = rec.mean_motion_rad_per_sec();
    let a = (MU_EARTH / (n * n)).cbrt();
    let e = rec.eccentricity;
    let dt = seconds_between(rec.epoch, t);
    let m = normalize_angle(rec.mean_anomaly + n * dt);
    // unreachable failure for e < 1
    let big_e = solve_kepler(m, e, 1e-12).unwrap_or(m);
    let nu = 2.0
        * f64::atan2(
            (1.0 + e).sqrt() * (big_e / 2.0).sin(),
            (1.0 - e).sqrt() * (big_e / 2.0).cos(),
        );
    let r = a * (1.0 - e * big_e.cos());
    let u = rec.arg_perigee + nu;
    let (su, cu) = u.sin_cos();
    let (so, co) = rec.raan.sin_cos();
    let (si, ci) = rec.inclination.sin_cos();
    StateVector {
        position: [
            r * (co * cu - so * su * ci),
            r * (so * cu + co * su * ci),
            r * (su * si),
        ],
        timestamp: t,
    }
}

/// Symmetric matrix of Euclidean distances, km.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.n.max(1))
    }
}

/// All pairwise distances. Every state must share one timestamp.
pub fn pairwise_distances(states: &[StateVector]) -> Result<DistanceMatrix> {
    if let Some(first) = states.first() {
        if let Some(other) = states.iter().find(|s| s.timestamp != first.timestamp) {
            return Err(Error::arg(format!(
                "states mix timestamps {} and {}",
                first.timestamp, other.timestamp
            )));
        }
    }
    let n = states.len();
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let d = states[i].distance_to(&states[j]);
            data[i * n + j] = d;
            data[j * n + i] = d;
        }
    }
    Ok(DistanceMatrix { n, data })
}

/// One entry of the positions snapshot `[{"name", "id", "r": [x, y, z], "t"}]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositionRecord {
    pub name: String,
    pub id: u32,
    pub r: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<DateTime<Utc>>,
}

/// Propagates every record to `t`. With `allow_stale`, records outside the
/// window are propagated anyway.
pub fn snapshot(
    records: &[TleRecord],
    t: DateTime<Utc>,
    allow_stale: bool,
) -> Result<Vec<PositionRecord>> {
    records
        .iter()
        .map(|rec| {
            let sv = if allow_stale {
                propagate_unchecked(rec, t)
            } else {
                propagate(rec, t).map_err(|e| {
                    Error::arg(format!("{} ({}): {e}", rec.name, rec.catalog_number))
                })?
            };
            Ok(PositionRecord {
                name: rec.name.clone(),
                id: rec.catalog_number,
                r: sv.position,
                t: Some(t),
            })
        })
        .collect()
}

/// Latest epoch among the records.
pub fn latest_epoch(records: &[TleRecord]) -> Option<DateTime<Utc>> {
    records.iter().map(|r| r.epoch).max()
}
