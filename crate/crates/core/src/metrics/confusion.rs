use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    TP,
    FP,
    TN,
    FN,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn new(tp: u64, fp: u64, tn: u64, fn_: u64) -> Self {
        ConfusionCounts { tp, fp, tn, fn_ }
    }

    pub fn add(&mut self, o: Outcome) {
        match o {
            Outcome::TP => self.tp += 1,
            Outcome::FP => self.fp += 1,
            Outcome::TN => self.tn += 1,
            Outcome::FN => self.fn_ += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn precision(&self) -> Rate {
        Rate::new(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> Rate {
        Rate::new(self.tp, self.tp + self.fn_)
    }

    pub fn accuracy(&self) -> Rate {
        Rate::new(self.tp + self.tn, self.total())
    }
}

/// An exact ratio; undefined when the denominator is zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rate {
    pub num: u64,
    pub den: u64,
}

impl Rate {
    pub fn new(num: u64, den: u64) -> Self {
        Rate { num, den }
    }

    pub fn value(&self) -> Option<f64> {
        (self.den > 0).then(|| self.num as f64 / self.den as f64)
    }

    /// Whole percent, truncated (71.0% → "71%", 81.6% → "81%").
    pub fn percent_truncated(&self) -> Option<u64> {
        (self.den > 0).then(|| self.num * 100 / self.den)
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.percent_truncated() {
            Some(p) => write!(f, "{p}%"),
            None => f.write_str("undefined"),
        }
    }
}

/// Serialized as a number, or the string `"undefined"`.
impl Serialize for Rate {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.value() {
            Some(v) => s.serialize_f64(v),
            None => s.serialize_str("undefined"),
        }
    }
}

/// Counts plus derived rates. Serialized as
/// `{"tp","fp","tn","fn","precision","recall","accuracy"}`; on input the
/// rates are recomputed from the counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionReport {
    pub counts: ConfusionCounts,
}

impl ConfusionReport {
    pub fn precision(&self) -> Rate {
        self.counts.precision()
    }

    pub fn recall(&self) -> Rate {
        self.counts.recall()
    }

    pub fn accuracy(&self) -> Rate {
        self.counts.accuracy()
    }
}

impl Serialize for ConfusionReport {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let c = &self.counts;
        let mut m = s.serialize_map(Some(7))?;
        m.serialize_entry("tp", &c.tp)?;
        m.serialize_entry("fp", &c.fp)?;
        m.serialize_entry("tn", &c.tn)?;
        m.serialize_entry("fn", &c.fn_)?;
        m.serialize_entry("precision", &c.precision())?;
        m.serialize_entry("recall", &c.recall())?;
        m.serialize_entry("accuracy", &c.accuracy())?;
        m.end()
    }
}

impl<'de> Deserialize<'de> for ConfusionReport {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        ConfusionCounts::deserialize(d).map(|counts| ConfusionReport { counts })
    }
}

pub fn aggregate_confusion<I: IntoIterator<Item = Outcome>>(outcomes: I) -> ConfusionReport {
    let mut counts = ConfusionCounts::default();
    for o in outcomes {
        counts.add(o);
    }
    ConfusionReport { counts }
}
