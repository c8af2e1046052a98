use std::collections::BTreeMap;
use std::io::Read;

use chrono::{Datelike, NaiveDate, Weekday};

use crate::error::{Error, Result};
use crate::ingest::parse_date;

/// Japanese national holidays (including substitute and sandwiched days)
/// for 2024–2026.
const EMBEDDED_HOLIDAYS: &[(&str, &str)] = &[
    ("2024-01-01", "元日"),
    ("2024-01-08", "成人の日"),
    ("2024-02-11", "建国記念の日"),
    ("2024-02-12", "振替休日"),
    ("2024-02-23", "天皇誕生日"),
    ("2024-03-20", "春分の日"),
    ("2024-04-29", "昭和の日"),
    ("2024-05-03", "憲法記念日"),
    ("2024-05-04", "みどりの日"),
    ("2024-05-05", "こどもの日"),
    ("2024-05-06", "振替休日"),
    ("2024-07-15", "海の日"),
    ("2024-08-11", "山の日"),
    ("2024-08-12", "振替休日"),
    ("2024-09-16", "敬老の日"),
    ("2024-09-22", "秋分の日"),
    ("2024-09-23", "振替休日"),
    ("2024-10-14", "スポーツの日"),
    ("2024-11-03", "文化の日"),
    ("2024-11-04", "振替休日"),
    ("2024-11-23", "勤労感謝の日"),
    ("2025-01-01", "元日"),
    ("2025-01-13", "成人の日"),
    ("2025-02-11", "建国記念の日"),
    ("2025-02-23", "天皇誕生日"),
    ("2025-02-24", "振替休日"),
    ("2025-03-20", "春分の日"),
    ("2025-04-29", "昭和の日"),
    ("2025-05-03", "憲法記念日"),
    ("2025-05-04", "みどりの日"),
    ("2025-05-05", "こどもの日"),
    ("2025-05-06", "振替休日"),
    ("2025-07-21", "海の日"),
    ("2025-08-11", "山の日"),
    ("2025-09-15", "敬老の日"),
    ("2025-09-23", "秋分の日"),
    ("2025-10-13", "スポーツの日"),
    ("2025-11-03", "文化の日"),
    ("2025-11-23", "勤労感謝の日"),
    ("2025-11-24", "振替休日"),
    ("2026-01-01", "元日"),
    ("2026-01-12", "成人の日"),
    ("2026-02-11", "建国記念の日"),
    ("2026-02-23", "天皇誕生日"),
    ("2026-03-20", "春分の日"),
    ("2026-04-29", "昭和の日"),
    ("2026-05-03", "憲法記念日"),
    ("2026-05-04", "みどりの日"),
    ("2026-05-05", "こどもの日"),
    ("2026-05-06", "振替休日"),
    ("2026-07-20", "海の日"),
    ("2026-08-11", "山の日"),
    ("2026-09-21", "敬老の日"),
    ("2026-09-22", "国民の休日"),
    ("2026-09-23", "秋分の日"),
    ("2026-10-12", "スポーツの日"),
    ("2026-11-03", "文化の日"),
    ("2026-11-23", "勤労感謝の日"),
];

/// Holiday set with an explicit validity window; lookups outside it fail.
#[derive(Debug, Clone, PartialEq)]
pub struct HolidayTable {
    from: NaiveDate,
    to: NaiveDate,
    days: BTreeMap<NaiveDate, String>,
}

impl Default for HolidayTable {
    fn default() -> Self {
        HolidayTable::embedded()
    }
}

impl HolidayTable {
    pub fn embedded() -> Self {
        let days = EMBEDDED_HOLIDAYS
            .iter()
            .map(|(d, n)| (d.parse().expect("static date"), n.to_string()))
            .collect();
        HolidayTable {
            from: NaiveDate::from_ymd_opt(2024, 1, 1).unwrap(),
            to: NaiveDate::from_ymd_opt(2026, 12, 31).unwrap(),
            days,
        }
    }

    pub fn new(from: NaiveDate, to: NaiveDate, days: BTreeMap<NaiveDate, String>) -> Result<Self> {
        if from > to {
            return Err(Error::invalid("holiday table range is empty"));
        }
        if let Some(d) = days.keys().find(|d| **d < from || **d > to) {
            return Err(Error::invalid(format!("holiday {d} outside table range")));
        }
        Ok(HolidayTable { from, to, days })
    }

    /// Reads `date[,name]` lines. Lines starting with `#` are comments. The
    /// validity range covers every calendar year that has an entry.
    pub fn from_reader(r: impl Read) -> Result<Self> {
        let text = crate::ingest::read_text(r)?;
        let mut days = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with("date") {
                continue;
            }
            let (d, name) = line.split_once(',').unwrap_or((line, ""));
            let date = parse_date(d).ok_or_else(|| Error::Row {
                line: i as u64 + 1,
                message: format!("bad holiday date `{d}`"),
            })?;
            days.insert(date, name.trim().to_string());
        }
        let (first, last) = match (days.keys().next(), days.keys().next_back()) {
            (Some(a), Some(b)) => (*a, *b),
            _ => return Err(Error::insufficient("holiday file has no dates")),
        };
        HolidayTable::new(
            NaiveDate::from_ymd_opt(first.year(), 1, 1).unwrap(),
            NaiveDate::from_ymd_opt(last.year(), 12, 31).unwrap(),
            days,
        )
    }

    pub fn range(&self) -> (NaiveDate, NaiveDate) {
        (self.from, self.to)
    }

    fn check(&self, date: NaiveDate) -> Result<()> {
        if date < self.from || date > self.to {
            return Err(Error::OutOfCalendarRange {
                date,
                from: self.from,
                to: self.to,
            });
        }
        Ok(())
    }

    pub fn is_holiday(&self, date: NaiveDate) -> Result<bool> {
        self.check(date)?;
        Ok(self.days.contains_key(&date))
    }

    pub fn holiday_name(&self, date: NaiveDate) -> Option<&str> {
        self.days.get(&date).map(String::as_str)
    }
}

/// 1 on Saturdays, Sundays and listed holidays, else 0.
pub fn is_weekend_or_holiday(date: NaiveDate, table: &HolidayTable) -> Result<u8> {
    let holiday = table.is_holiday(date)?;
    let weekend = matches!(date.weekday(), Weekday::Sat | Weekday::Sun);
    Ok(u8::from(weekend || holiday))
}
