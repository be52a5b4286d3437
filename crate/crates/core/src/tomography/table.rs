use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use crate::error::{FusionError, Result};
use crate::numfmt::fmt_sig;
use crate::quantum::{Basis, Pol};

pub type Pair = (Pol, Pol);
pub type Setting = (Basis, Basis);

pub const CSV_HEADER: [&str; 6] = ["prep_q1", "prep_q2", "proj_q1", "proj_q2", "counts", "duration_s"];

/// Input state assumed for state-tomography tables.
pub const STATE_PREP: Pair = (Pol::P, Pol::P);

/// Numeric type stored in an [`OutcomeTable`].
pub trait Tally: Copy + Default + PartialEq + std::fmt::Debug + Send + Sync {
    fn as_f64(self) -> f64;
    fn merge(self, other: Self) -> Self;
}

impl Tally for u64 {
    fn as_f64(self) -> f64 {
        self as f64
    }
    fn merge(self, other: Self) -> Self {
        self + other
    }
}

impl Tally for f64 {
    fn as_f64(self) -> f64 {
        self
    }
    fn merge(self, other: Self) -> Self {
        self + other
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Entry<V> {
    pub value: V,
    pub duration_s: f64,
}

/// Outcome tallies indexed by `(preparation, projection)`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct OutcomeTable<V> {
    rows: BTreeMap<(Pair, Pair), Entry<V>>,
}

/// Measured coincidence counts.
pub type CountTable = OutcomeTable<u64>;
/// Exact (or expected) outcome probabilities with the same layout.
pub type ProbabilityTable = OutcomeTable<f64>;

impl<V: Tally> OutcomeTable<V> {
    pub fn new() -> Self {
        Self { rows: BTreeMap::new() }
    }

    /// Adds a row. Returns `true` if the `(prep, proj)` key already existed,
    /// in which case values and durations are summed.
    pub fn insert(&mut self, prep: Pair, proj: Pair, value: V, duration_s: f64) -> bool {
        match self.rows.get_mut(&(prep, proj)) {
            Some(e) => {
                e.value = e.value.merge(value);
                e.duration_s += duration_s;
                true
            }
            None => {
                self.rows.insert((prep, proj), Entry { value, duration_s });
                false
            }
        }
    }

    pub fn get(&self, prep: Pair, proj: Pair) -> Option<V> {
        self.rows.get(&(prep, proj)).map(|e| e.value)
    }

    pub fn value(&self, prep: Pair, proj: Pair) -> f64 {
        self.get(prep, proj).map_or(0.0, Tally::as_f64)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Pair, Pair, &Entry<V>)> {
        self.rows.iter().map(|((a, b), e)| (*a, *b, e))
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.rows.values().map(|e| e.value.as_f64()).sum()
    }

    pub fn preps(&self) -> BTreeSet<Pair> {
        self.rows.keys().map(|(p, _)| *p).collect()
    }

    /// Settings measured for `prep` with all four outcome rows present.
    pub fn complete_settings(&self, prep: Pair) -> BTreeSet<Setting> {
        let mut seen: BTreeMap<Setting, usize> = BTreeMap::new();
        for (p, (a, b)) in self.rows.keys() {
            if *p == prep {
                *seen.entry((a.basis(), b.basis())).or_default() += 1;
            }
        }
        seen.into_iter().filter(|&(_, n)| n == 4).map(|(s, _)| s).collect()
    }

    /// The four outcome values of one setting, ordered `aa, ab, ba, bb`.
    pub fn setting_values(&self, prep: Pair, setting: Setting) -> [f64; 4] {
        let [a0, a1] = setting.0.outcomes();
        let [b0, b1] = setting.1.outcomes();
        [(a0, b0), (a0, b1), (a1, b0), (a1, b1)].map(|proj| self.value(prep, proj))
    }

    pub fn map_values<W: Tally>(&self, mut f: impl FnMut(V) -> W) -> OutcomeTable<W> {
        OutcomeTable {
            rows: self
                .rows
                .iter()
                .map(|(k, e)| {
                    (
                        *k,
                        Entry {
                            value: f(e.value),
                            duration_s: e.duration_s,
                        },
                    )
                })
                .collect(),
        }
    }

    pub fn to_probability(&self) -> ProbabilityTable {
        self.map_values(Tally::as_f64)
    }
}

/// Names of the nine two-qubit Pauli settings missing for `prep`.
pub fn missing_state_settings<V: Tally>(table: &OutcomeTable<V>, prep: Pair) -> Vec<String> {
    let have = table.complete_settings(prep);
    let mut missing = Vec::new();
    for a in Basis::ALL {
        for b in Basis::ALL {
            if !have.contains(&(a, b)) {
                missing.push(format!("{a}{b}"));
            }
        }
    }
    missing
}

/// Parsed table plus any non-fatal warnings.
#[derive(Clone, Debug, PartialEq)]
pub struct Ingested {
    pub table: CountTable,
    pub warnings: Vec<String>,
}

/// Reads a count CSV. Duplicate `(prep, proj)` rows are summed and reported.
pub fn ingest_counts<R: Read>(reader: R) -> Result<Ingested> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != CSV_HEADER {
        return Err(FusionError::Parse {
            line: 1,
            message: format!("expected header {}, got {}", CSV_HEADER.join(","), header.iter().collect::<Vec<_>>().join(",")),
        });
    }
    let mut table = CountTable::new();
    let mut warnings = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            FusionError::Parse {
                line,
                message: e.to_string(),
            }
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let err = |message: String| FusionError::Parse { line, message };
        if record.len() != CSV_HEADER.len() {
            return Err(err(format!("expected {} fields, got {}", CSV_HEADER.len(), record.len())));
        }
        let pol = |i: usize| -> Result<Pol> {
            record[i]
                .parse::<Pol>()
                .map_err(|_| err(format!("unknown label {:?} in {}", &record[i], CSV_HEADER[i])))
        };
        let prep = (pol(0)?, pol(1)?);
        let proj = (pol(2)?, pol(3)?);
        let counts: u64 = record[4]
            .parse()
            .map_err(|_| err(format!("counts {:?} is not a non-negative integer", &record[4])))?;
        let duration: f64 = record[5]
            .parse()
            .map_err(|_| err(format!("duration {:?} is not a number", &record[5])))?;
        if !(duration >= 0.0 && duration.is_finite()) {
            return Err(err(format!("duration {duration} must be finite and >= 0")));
        }
        if table.insert(prep, proj, counts, duration) {
            warnings.push(format!(
                "line {line}: duplicate row {}{} -> {}{} summed",
                prep.0, prep.1, proj.0, proj.1
            ));
        }
    }
    Ok(Ingested { table, warnings })
}

pub fn write_counts<W: Write>(table: &CountTable, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for (prep, proj, e) in table.iter() {
        w.write_record([
            prep.0.to_string(),
            prep.1.to_string(),
            proj.0.to_string(),
            proj.1.to_string(),
            e.value.to_string(),
            fmt_sig(e.duration_s),
        ])?;
    }
    w.flush()?;
    Ok(())
}
