//! Periodic time discretizations with optional day classes and custom subsets.
//!
//! A period is split into elementary slots. Each interval `t` is a slot or,
//! for the custom kind, a union of slots. Intervals are left-closed and
//! right-open. Periods are anchored at a fixed instant; by default the Monday
//! 00:00 at or before the start of the data.
//!
//! The class axis combines a day class `d` and a custom subset `s` into
//! `d * S + s`, where `S` is the number of subsets including the default
//! subset 0. An event inherits the key of the interval occurrence containing
//! it, and an occurrence's day class and subset are read at its first instant.

use std::collections::BTreeMap;

use chrono::{Datelike, Duration, NaiveDate, NaiveDateTime, NaiveTime, Weekday};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TimeError {
    #[error("invalid time discretization: {0}")]
    InvalidConfig(String),
    #[error("horizon end must be after its start")]
    EmptyHorizon,
    #[error("cannot parse timestamp {0:?}")]
    BadTimestamp(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeUnit {
    Second,
    Minute,
    Hour,
    Day,
    Week,
}

impl TimeUnit {
    pub fn seconds(self) -> i64 {
        match self {
            TimeUnit::Second => 1,
            TimeUnit::Minute => 60,
            TimeUnit::Hour => 3600,
            TimeUnit::Day => 86_400,
            TimeUnit::Week => 604_800,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeKind {
    PeriodicEqual,
    PeriodicUnequal,
    Custom,
}

/// A special date; `yearly` repeats it on the same month and day every year.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Holiday {
    pub date: NaiveDate,
    #[serde(default)]
    pub yearly: bool,
}

/// Half-open window `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub start: NaiveDateTime,
    pub end: NaiveDateTime,
    #[serde(default)]
    pub yearly: bool,
}

impl Window {
    fn contains(&self, ts: NaiveDateTime) -> bool {
        if !self.yearly {
            return self.start <= ts && ts < self.end;
        }
        let span = self.end.year() - self.start.year();
        // the window may have started in the previous year
        [ts.year(), ts.year() - 1].iter().any(|&y| {
            match (self.start.with_year(y), self.end.with_year(y + span)) {
                (Some(s), Some(e)) => s <= ts && ts < e,
                _ => false,
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CustomSubset {
    pub index: usize,
    pub windows: Vec<Window>,
}

/// Serializable description of a time discretization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeConfig {
    pub kind: TimeKind,
    pub time_unit: TimeUnit,
    /// Slot length for equal slots.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slot: Option<u64>,
    /// Successive slot lengths for unequal slots.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub durations: Option<Vec<u64>>,
    /// Period length; a multiple of the slot pattern length.
    pub period: u64,
    /// Custom kind: each interval as a list of slot indices.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intervals: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub groups: Option<Vec<Vec<usize>>>,
    /// Seven weekday classes (Monday = 0) instead of a single regular class.
    #[serde(default)]
    pub weekday_classes: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub holidays: Vec<Holiday>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub custom_subsets: Vec<CustomSubset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor: Option<NaiveDateTime>,
}

impl TimeConfig {
    /// Equal slots of `slot` units in a period of `period` units.
    pub fn periodic_equal(unit: TimeUnit, slot: u64, period: u64) -> Self {
        TimeConfig {
            kind: TimeKind::PeriodicEqual,
            time_unit: unit,
            slot: Some(slot),
            durations: None,
            period,
            intervals: None,
            groups: None,
            weekday_classes: false,
            holidays: Vec::new(),
            custom_subsets: Vec::new(),
            anchor: None,
        }
    }

    pub fn periodic_unequal(unit: TimeUnit, durations: Vec<u64>, period: u64) -> Self {
        TimeConfig {
            kind: TimeKind::PeriodicUnequal,
            slot: None,
            durations: Some(durations),
            ..TimeConfig::periodic_equal(unit, 1, period)
        }
    }
}

/// Interval, day class and custom subset of an instant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TimeKey {
    pub interval: usize,
    pub day_class: usize,
    pub subset: usize,
}

/// A validated time discretization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TimeConfig", into = "TimeConfig")]
pub struct TimeDiscretization {
    config: TimeConfig,
    period_s: i64,
    slot_start: Vec<i64>,
    slot_interval: Vec<usize>,
    durations: Vec<f64>,
    first_start: Vec<i64>,
    last_end: Vec<i64>,
    n_subsets: usize,
}

impl TryFrom<TimeConfig> for TimeDiscretization {
    type Error = TimeError;

    fn try_from(c: TimeConfig) -> Result<Self, TimeError> {
        TimeDiscretization::new(c)
    }
}

impl From<TimeDiscretization> for TimeConfig {
    fn from(t: TimeDiscretization) -> Self {
        t.config
    }
}

fn bad(msg: impl Into<String>) -> TimeError {
    TimeError::InvalidConfig(msg.into())
}

/// Monday 1970-01-05 00:00, used when no anchor is known.
fn epoch_monday() -> NaiveDateTime {
    NaiveDate::from_ymd_opt(1970, 1, 5).unwrap().and_time(NaiveTime::MIN)
}

/// The Monday 00:00 at or before `ts`.
pub fn monday_at_or_before(ts: NaiveDateTime) -> NaiveDateTime {
    let d = ts.date();
    let back = d.weekday().num_days_from_monday() as i64;
    (d - Duration::days(back)).and_time(NaiveTime::MIN)
}

/// Parses ISO-8601-like naive timestamps, with `T` or a space, optional fractional seconds.
pub fn parse_timestamp(s: &str) -> Result<NaiveDateTime, TimeError> {
    let s = s.trim();
    const FORMATS: [&str; 4] = ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"];
    for f in FORMATS {
        if let Ok(t) = NaiveDateTime::parse_from_str(s, f) {
            return Ok(t);
        }
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .map(|d| d.and_time(NaiveTime::MIN))
        .map_err(|_| TimeError::BadTimestamp(s.to_string()))
}

impl TimeDiscretization {
    pub fn new(config: TimeConfig) -> Result<Self, TimeError> {
        let unit = config.time_unit.seconds();
        let pattern: Vec<u64> = match (&config.slot, &config.durations) {
            (Some(s), None) => vec![*s],
            (None, Some(d)) => d.clone(),
            _ => return Err(bad("exactly one of slot and durations must be given")),
        };
        if pattern.is_empty() || pattern.contains(&0) {
            return Err(bad("slot durations must be positive"));
        }
        match config.kind {
            TimeKind::PeriodicEqual if config.slot.is_none() => {
                return Err(bad("periodic-equal needs a slot length"))
            }
            TimeKind::PeriodicUnequal if config.durations.is_none() => {
                return Err(bad("periodic-unequal needs durations"))
            }
            TimeKind::Custom if config.intervals.is_none() => return Err(bad("custom kind needs intervals")),
            TimeKind::PeriodicEqual | TimeKind::PeriodicUnequal if config.intervals.is_some() => {
                return Err(bad("intervals are only allowed for the custom kind"))
            }
            _ => {}
        }
        let plen: u64 = pattern.iter().sum();
        if config.period == 0 || config.period % plen != 0 {
            return Err(bad(format!("period {} is not a multiple of the slot pattern {plen}", config.period)));
        }
        let reps = config.period / plen;
        let mut slot_start = Vec::new();
        let mut slot_len = Vec::new();
        let mut at = 0i64;
        for _ in 0..reps {
            for &d in &pattern {
                slot_start.push(at);
                slot_len.push(d as i64 * unit);
                at += d as i64 * unit;
            }
        }
        let n_slots = slot_start.len();
        let slot_interval: Vec<usize> = match &config.intervals {
            None => (0..n_slots).collect(),
            Some(iv) => {
                let mut owner = vec![usize::MAX; n_slots];
                for (t, slots) in iv.iter().enumerate() {
                    if slots.is_empty() {
                        return Err(bad(format!("interval {t} has no slots")));
                    }
                    for &s in slots {
                        if s >= n_slots {
                            return Err(bad(format!("slot {s} out of range (period has {n_slots})")));
                        }
                        if owner[s] != usize::MAX {
                            return Err(bad(format!("slot {s} belongs to two intervals")));
                        }
                        owner[s] = t;
                    }
                }
                if let Some(s) = owner.iter().position(|&o| o == usize::MAX) {
                    return Err(bad(format!("slot {s} belongs to no interval")));
                }
                owner
            }
        };
        let n_t = slot_interval.iter().max().map_or(0, |m| m + 1);
        let mut durations = vec![0.0; n_t];
        let mut first_start = vec![i64::MAX; n_t];
        let mut last_end = vec![i64::MIN; n_t];
        for s in 0..n_slots {
            let t = slot_interval[s];
            durations[t] += slot_len[s] as f64 / unit as f64;
            first_start[t] = first_start[t].min(slot_start[s]);
            last_end[t] = last_end[t].max(slot_start[s] + slot_len[s]);
        }
        if let Some(groups) = &config.groups {
            let mut seen = vec![false; n_t];
            for g in groups {
                for &t in g {
                    if t >= n_t || std::mem::replace(&mut seen[t], true) {
                        return Err(bad(format!("groups do not partition the intervals (index {t})")));
                    }
                }
            }
            if seen.contains(&false) {
                return Err(bad("groups do not cover every interval"));
            }
        }
        let mut n_subsets = 1;
        for cs in &config.custom_subsets {
            if cs.index == 0 {
                return Err(bad("custom subset index 0 is reserved for uncovered time"));
            }
            n_subsets = n_subsets.max(cs.index + 1);
            for w in &cs.windows {
                if w.end <= w.start {
                    return Err(bad("custom window ends before it starts"));
                }
            }
            for (a, wa) in cs.windows.iter().enumerate() {
                for wb in &cs.windows[a + 1..] {
                    if wa.yearly == wb.yearly && wa.start < wb.end && wb.start < wa.end {
                        return Err(bad(format!("overlapping windows in custom subset {}", cs.index)));
                    }
                }
            }
        }
        Ok(TimeDiscretization {
            period_s: config.period as i64 * unit,
            config,
            slot_start,
            slot_interval,
            durations,
            first_start,
            last_end,
            n_subsets,
        })
    }

    pub fn config(&self) -> &TimeConfig {
        &self.config
    }

    pub fn n_intervals(&self) -> usize {
        self.durations.len()
    }

    /// Durations 𝒟_t in the configured time unit.
    pub fn durations(&self) -> &[f64] {
        &self.durations
    }

    /// Period length in the configured time unit.
    pub fn period_length(&self) -> f64 {
        self.config.period as f64
    }

    pub fn groups(&self) -> Option<&[Vec<usize>]> {
        self.config.groups.as_deref()
    }

    pub fn n_day_classes(&self) -> usize {
        let base = if self.config.weekday_classes { 7 } else { 1 };
        base + self.config.holidays.len()
    }

    pub fn n_subsets(&self) -> usize {
        self.n_subsets
    }

    /// Size of the combined class axis, `n_day_classes * n_subsets`.
    pub fn n_classes(&self) -> usize {
        self.n_day_classes() * self.n_subsets
    }

    pub fn class_index(&self, day_class: usize, subset: usize) -> usize {
        day_class * self.n_subsets + subset
    }

    /// Anchor used for a horizon starting at `data_start`.
    pub fn anchor_for(&self, data_start: Option<NaiveDateTime>) -> NaiveDateTime {
        self.config
            .anchor
            .or_else(|| data_start.map(monday_at_or_before))
            .unwrap_or_else(epoch_monday)
    }

    /// Calendar day class of `date`: holidays first, then weekday or the regular class.
    pub fn day_class_of(&self, date: NaiveDate) -> usize {
        let base = if self.config.weekday_classes { 7 } else { 1 };
        for (k, h) in self.config.holidays.iter().enumerate() {
            let hit = if h.yearly {
                h.date.month() == date.month() && h.date.day() == date.day()
            } else {
                h.date == date
            };
            if hit {
                return base + k;
            }
        }
        if self.config.weekday_classes {
            date.weekday().num_days_from_monday() as usize
        } else {
            0
        }
    }

    pub fn subset_of(&self, ts: NaiveDateTime) -> usize {
        self.config
            .custom_subsets
            .iter()
            .find(|cs| cs.windows.iter().any(|w| w.contains(ts)))
            .map_or(0, |cs| cs.index)
    }

    fn locate(&self, anchor: NaiveDateTime, ts: NaiveDateTime) -> (i64, usize) {
        let off = (ts - anchor).num_milliseconds();
        let pms = self.period_s * 1000;
        let p = off.div_euclid(pms);
        let within = off.rem_euclid(pms) / 1000;
        let s = self.slot_start.partition_point(|&x| x <= within) - 1;
        (p, self.slot_interval[s])
    }

    fn occurrence_start(&self, anchor: NaiveDateTime, p: i64, t: usize) -> NaiveDateTime {
        anchor + Duration::seconds(p * self.period_s + self.first_start[t])
    }

    fn key_at(&self, t: usize, start: NaiveDateTime, overrides: &BTreeMap<NaiveDate, usize>) -> TimeKey {
        let day_class = overrides.get(&start.date()).copied().unwrap_or_else(|| self.day_class_of(start.date()));
        TimeKey { interval: t, day_class, subset: self.subset_of(start) }
    }

    /// Key of `ts` using the default anchor.
    pub fn map_timestamp(&self, ts: NaiveDateTime) -> TimeKey {
        self.map_timestamp_at(self.anchor_for(None), ts, &BTreeMap::new())
    }

    pub fn map_timestamp_at(
        &self,
        anchor: NaiveDateTime,
        ts: NaiveDateTime,
        overrides: &BTreeMap<NaiveDate, usize>,
    ) -> TimeKey {
        let (p, t) = self.locate(anchor, ts);
        self.key_at(t, self.occurrence_start(anchor, p, t), overrides)
    }

    /// Complete occurrences of each interval within `[start, end)`.
    pub fn occurrences(
        &self,
        start: NaiveDateTime,
        end: NaiveDateTime,
        overrides: &BTreeMap<NaiveDate, usize>,
    ) -> Result<Occurrences, TimeError> {
        if end <= start {
            return Err(TimeError::EmptyHorizon);
        }
        let anchor = self.anchor_for(Some(start));
        let n_t = self.n_intervals();
        let (p0, _) = self.locate(anchor, start);
        let (p1, _) = self.locate(anchor, end);
        let n_periods = (p1 - p0 + 1) as usize;
        let mut counts = vec![vec![0u32; n_t]; self.n_classes()];
        let mut entries = vec![None; n_periods * n_t];
        for (k, p) in (p0..=p1).enumerate() {
            // occurrences in chronological order of their first instant
            let mut ts: Vec<usize> = (0..n_t).collect();
            ts.sort_by_key(|&t| self.first_start[t]);
            for t in ts {
                let base = anchor + Duration::seconds(p * self.period_s);
                let s = base + Duration::seconds(self.first_start[t]);
                let e = base + Duration::seconds(self.last_end[t]);
                if s < start || e > end {
                    continue;
                }
                let key = self.key_at(t, s, overrides);
                let class = self.class_index(key.day_class, key.subset);
                entries[k * n_t + t] = Some((class, counts[class][t]));
                counts[class][t] += 1;
            }
        }
        Ok(Occurrences { anchor, first_period: p0, n_t, entries, counts })
    }

    /// Observation counts `N[class][t]` over `[start, end)`.
    pub fn count_observations(&self, start: NaiveDateTime, end: NaiveDateTime) -> Result<Vec<Vec<u32>>, TimeError> {
        Ok(self.occurrences(start, end, &BTreeMap::new())?.counts)
    }
}

/// Complete interval occurrences over a horizon, indexed for event lookup.
#[derive(Debug, Clone)]
pub struct Occurrences {
    anchor: NaiveDateTime,
    first_period: i64,
    n_t: usize,
    entries: Vec<Option<(usize, u32)>>,
    counts: Vec<Vec<u32>>,
}

/// Cell coordinates of an event inside a complete occurrence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Slot {
    pub interval: usize,
    pub class: usize,
    pub observation: u32,
}

impl Occurrences {
    pub fn anchor(&self) -> NaiveDateTime {
        self.anchor
    }

    /// `N[class][t]`.
    pub fn counts(&self) -> &[Vec<u32>] {
        &self.counts
    }

    /// Slot of `ts`, or `None` when it lies outside every complete occurrence.
    pub fn lookup(&self, td: &TimeDiscretization, ts: NaiveDateTime) -> Option<Slot> {
        let (p, t) = td.locate(self.anchor, ts);
        let k = p - self.first_period;
        if k < 0 {
            return None;
        }
        let (class, n) = (*self.entries.get(k as usize * self.n_t + t)?)?;
        Some(Slot { interval: t, class, observation: n })
    }
}

/// Weekday of a class index when weekday classes are in use.
pub fn weekday_of_class(d: usize) -> Option<Weekday> {
    [Weekday::Mon, Weekday::Tue, Weekday::Wed, Weekday::Thu, Weekday::Fri, Weekday::Sat, Weekday::Sun]
        .get(d)
        .copied()
}
