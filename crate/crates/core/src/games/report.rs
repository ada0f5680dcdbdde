//! Experiment reports: exact rational frequencies plus the line-oriented
//! `key=value` rendering used by the CLI and report files.

use std::cmp::Ordering;
use std::fmt;

use num_integer::Integer;

/// An event frequency as the exact fraction `count / total`.
///
/// Exhaustive experiments produce claims like "exactly 1/4" or "exactly
/// equal across two differently-sized enumeration spaces"; floats cannot
/// carry such claims, so frequencies keep their integer parts and compare by
/// cross-multiplication. `25/100` equals `1/4`.
#[derive(Debug, Clone, Copy)]
pub struct Frequency {
    count: u128,
    total: u128,
}

impl Frequency {
    /// Builds `count / total`; requires `total > 0` and `count ≤ total`.
    pub fn new(count: u128, total: u128) -> Self {
        assert!(total > 0, "frequency with zero total");
        assert!(count <= total, "frequency {count}/{total} above one");
        Self { count, total }
    }

    /// The zero frequency over a given trial count.
    pub fn zero(total: u128) -> Self {
        Self::new(0, total)
    }

    /// Number of occurrences.
    pub fn count(self) -> u128 {
        self.count
    }

    /// Number of opportunities.
    pub fn total(self) -> u128 {
        self.total
    }

    /// True iff the event never occurred.
    pub fn is_zero(self) -> bool {
        self.count == 0
    }

    /// Float approximation for thresholds and display.
    pub fn as_f64(self) -> f64 {
        self.count as f64 / self.total as f64
    }

    /// The same fraction in lowest terms.
    pub fn reduced(self) -> Self {
        let g = self.count.gcd(&self.total);
        Self {
            count: self.count / g,
            total: self.total / g,
        }
    }

    /// Exact absolute difference |self − other| as a fraction.
    pub fn abs_diff(self, other: Frequency) -> Frequency {
        let left = self.count * other.total;
        let right = other.count * self.total;
        Frequency::new(left.abs_diff(right), self.total * other.total).reduced()
    }
}

impl PartialEq for Frequency {
    fn eq(&self, other: &Self) -> bool {
        self.count * other.total == other.count * self.total
    }
}

impl Eq for Frequency {}

impl PartialOrd for Frequency {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Frequency {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.count * other.total).cmp(&(other.count * self.total))
    }
}

impl fmt::Display for Frequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.count, self.total)
    }
}

/// How an experiment's trials were produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportMode {
    /// Monte Carlo over a seeded trial schedule.
    Sampled,
    /// Full enumeration of the randomness space; all frequencies are exact.
    Exhaustive,
}

impl fmt::Display for ReportMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportMode::Sampled => "sampled",
            ReportMode::Exhaustive => "exhaustive",
        })
    }
}

#[derive(Debug, Clone)]
enum MetricValue {
    Rate(Frequency),
    Float(f64),
    Int(u128),
    Text(String),
}

/// The outcome of one experiment run: an ordered list of named metrics with
/// the bookkeeping (mode, trial count, seed) needed to reproduce it.
///
/// Reports render to UTF-8 `key=value` lines, one metric per line. Rates are
/// written as exact fractions with a `*_approx` float companion; the final
/// line is always `seed=<u64>`, which doubles as an end-of-report marker.
#[derive(Debug, Clone)]
pub struct ExperimentReport {
    experiment: String,
    mode: ReportMode,
    trials: u128,
    seed: u64,
    metrics: Vec<(String, MetricValue)>,
}

impl ExperimentReport {
    /// Starts a report for `experiment` covering `trials` trials (or
    /// enumerated configurations).
    pub fn new(experiment: impl Into<String>, mode: ReportMode, trials: u128, seed: u64) -> Self {
        Self {
            experiment: experiment.into(),
            mode,
            trials,
            seed,
            metrics: Vec::new(),
        }
    }

    /// The experiment name.
    pub fn experiment(&self) -> &str {
        &self.experiment
    }

    /// Sampled or exhaustive.
    pub fn mode(&self) -> ReportMode {
        self.mode
    }

    /// Trial or configuration count.
    pub fn trials(&self) -> u128 {
        self.trials
    }

    /// The master seed (0 by convention for exhaustive runs).
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Records an event frequency.
    pub fn push_rate(&mut self, key: &str, rate: Frequency) {
        self.metrics.push((key.into(), MetricValue::Rate(rate)));
    }

    /// Records a floating-point metric (bounds, confidence half-widths).
    pub fn push_float(&mut self, key: &str, value: f64) {
        self.metrics.push((key.into(), MetricValue::Float(value)));
    }

    /// Records an integer metric.
    pub fn push_int(&mut self, key: &str, value: u128) {
        self.metrics.push((key.into(), MetricValue::Int(value)));
    }

    /// Records a free-form text metric (single line, no '=' in the key).
    pub fn push_text(&mut self, key: &str, value: impl Into<String>) {
        self.metrics
            .push((key.into(), MetricValue::Text(value.into())));
    }

    /// Looks up a recorded frequency.
    pub fn rate(&self, key: &str) -> Option<Frequency> {
        self.metrics.iter().find_map(|(k, v)| match v {
            MetricValue::Rate(r) if k == key => Some(*r),
            _ => None,
        })
    }

    /// Looks up a recorded float.
    pub fn float(&self, key: &str) -> Option<f64> {
        self.metrics.iter().find_map(|(k, v)| match v {
            MetricValue::Float(x) if k == key => Some(*x),
            _ => None,
        })
    }

    /// Looks up a recorded text metric.
    pub fn text(&self, key: &str) -> Option<&str> {
        self.metrics.iter().find_map(|(k, v)| match v {
            MetricValue::Text(s) if k == key => Some(s.as_str()),
            _ => None,
        })
    }

    /// Renders the line-oriented `key=value` form, terminated by the seed.
    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("experiment={}\n", self.experiment));
        out.push_str(&format!("mode={}\n", self.mode));
        out.push_str(&format!("trials={}\n", self.trials));
        for (key, value) in &self.metrics {
            match value {
                MetricValue::Rate(r) => {
                    out.push_str(&format!("{key}={r}\n"));
                    out.push_str(&format!("{key}_approx={}\n", r.as_f64()));
                }
                MetricValue::Float(x) => out.push_str(&format!("{key}={x}\n")),
                MetricValue::Int(x) => out.push_str(&format!("{key}={x}\n")),
                MetricValue::Text(s) => out.push_str(&format!("{key}={s}\n")),
            }
        }
        out.push_str(&format!("seed={}\n", self.seed));
        out
    }
}

impl fmt::Display for ExperimentReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_kv())
    }
}
