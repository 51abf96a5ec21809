//! Categorical datasets and marginal configuration counts.
//!
//! A dataset is an `n × q` table of level codes. Column `j` takes values in
//! `0..levels[j]`, and the code of a level is its position in the sorted list
//! of distinct labels observed for that column (an optional missing-value
//! token is always appended as the last level).

use std::collections::BTreeSet;
use std::io::Read;
use std::path::Path;

use rustc_hash::FxHashMap;

use crate::{Error, Result};

/// Level code of a single cell.
pub type Code = u16;

/// Tables with at most this many cells are stored densely.
const DENSE_CELL_LIMIT: u64 = 1 << 12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoricalDataset {
    names: Vec<String>,
    labels: Vec<Vec<String>>,
    levels: Vec<usize>,
    codes: Vec<Code>,
    n: usize,
}

impl CategoricalDataset {
    /// Builds a dataset from already encoded rows.
    pub fn new(names: Vec<String>, labels: Vec<Vec<String>>, rows: Vec<Vec<Code>>) -> Result<Self> {
        let q = labels.len();
        if q == 0 {
            return Err(Error::Validation("dataset has no variables".into()));
        }
        if names.len() != q {
            return Err(Error::Validation(format!(
                "{} variable names for {} label sets",
                names.len(),
                q
            )));
        }
        if rows.is_empty() {
            return Err(Error::Validation("dataset has no rows".into()));
        }
        for (j, l) in labels.iter().enumerate() {
            let distinct: BTreeSet<&String> = l.iter().collect();
            if distinct.len() != l.len() {
                return Err(Error::Validation(format!(
                    "duplicate level labels in column '{}'",
                    names[j]
                )));
            }
            if l.len() < 2 {
                return Err(Error::Validation(format!(
                    "column '{}' has a single level",
                    names[j]
                )));
            }
            if l.len() > Code::MAX as usize {
                return Err(Error::Validation(format!(
                    "column '{}' has too many levels",
                    names[j]
                )));
            }
        }
        let levels: Vec<usize> = labels.iter().map(Vec::len).collect();
        let n = rows.len();
        let mut codes = Vec::with_capacity(n * q);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != q {
                return Err(Error::Validation(format!(
                    "row {i} has {} cells, expected {q}",
                    row.len()
                )));
            }
            for (j, &c) in row.iter().enumerate() {
                if c as usize >= levels[j] {
                    return Err(Error::Validation(format!(
                        "row {i}, column '{}': code {c} out of range 0..{}",
                        names[j], levels[j]
                    )));
                }
            }
            codes.extend(row);
        }
        Ok(Self {
            names,
            labels,
            levels,
            codes,
            n,
        })
    }

    /// Dataset with labels `"0"`, `"1"`, ... and names `X1`, `X2`, ...
    pub fn from_codes(levels: &[usize], rows: Vec<Vec<Code>>) -> Result<Self> {
        let names = (1..=levels.len()).map(|j| format!("X{j}")).collect();
        let labels = levels
            .iter()
            .map(|&l| (0..l).map(|v| v.to_string()).collect())
            .collect();
        Self::new(names, labels, rows)
    }

    pub fn load_csv(path: impl AsRef<Path>, missing_token: Option<&str>) -> Result<Self> {
        let file = std::fs::File::open(path.as_ref())?;
        Self::from_csv_reader(file, missing_token)
    }

    /// Reads a headed CSV table. Levels are the sorted distinct strings of each
    /// column; cells equal to `missing_token` get a dedicated last level.
    pub fn from_csv_reader<R: Read>(reader: R, missing_token: Option<&str>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .from_reader(reader);
        let names: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
        let q = names.len();
        let mut raw: Vec<Vec<String>> = Vec::new();
        for record in rdr.records() {
            let record = record?;
            let line = record.position().map_or(raw.len() + 2, |p| p.line() as usize);
            if record.len() != q {
                return Err(Error::Parse {
                    row: line,
                    msg: format!("expected {q} cells, found {}", record.len()),
                });
            }
            raw.push(record.iter().map(str::to_owned).collect());
        }
        if raw.is_empty() {
            return Err(Error::Validation("csv has a header but no data rows".into()));
        }

        let mut labels = Vec::with_capacity(q);
        for j in 0..q {
            let mut seen_missing = false;
            let mut distinct = BTreeSet::new();
            for row in &raw {
                let cell = row[j].as_str();
                if Some(cell) == missing_token {
                    seen_missing = true;
                } else {
                    distinct.insert(cell);
                }
            }
            let mut col: Vec<String> = distinct.into_iter().map(str::to_owned).collect();
            if seen_missing {
                col.push(missing_token.unwrap_or_default().to_owned());
            }
            labels.push(col);
        }

        let rows = raw
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .map(|(j, cell)| {
                        let pos = if Some(cell.as_str()) == missing_token {
                            labels[j].len() - 1
                        } else {
                            // The missing token, when present, sits after the sorted labels.
                            let sorted = match missing_token {
                                Some(m) if labels[j].last().is_some_and(|l| l == m) => {
                                    &labels[j][..labels[j].len() - 1]
                                }
                                _ => &labels[j][..],
                            };
                            sorted
                                .binary_search_by(|l: &String| l.as_str().cmp(cell))
                                .expect("label collected above")
                        };
                        pos as Code
                    })
                    .collect()
            })
            .collect();
        Self::new(names, labels, rows)
    }

    /// Writes the decoded table as CSV with a header row.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.names)?;
        for i in 0..self.n {
            w.write_record((0..self.q()).map(|j| self.decode(i, j)))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn labels(&self, j: usize) -> &[String] {
        &self.labels[j]
    }

    pub fn row(&self, i: usize) -> &[Code] {
        let q = self.q();
        &self.codes[i * q..(i + 1) * q]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Code]> {
        self.codes.chunks_exact(self.q())
    }

    pub fn code(&self, i: usize, j: usize) -> Code {
        self.codes[i * self.q() + j]
    }

    pub fn decode(&self, i: usize, j: usize) -> &str {
        &self.labels[j][self.code(i, j) as usize]
    }

    /// Keeps only the listed columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Result<Self> {
        if let Some(&bad) = cols.iter().find(|&&j| j >= self.q()) {
            return Err(Error::Bounds(format!("variable {bad} >= q = {}", self.q())));
        }
        let names = cols.iter().map(|&j| self.names[j].clone()).collect();
        let labels = cols.iter().map(|&j| self.labels[j].clone()).collect();
        let rows = self
            .rows()
            .map(|r| cols.iter().map(|&j| r[j]).collect())
            .collect();
        Self::new(names, labels, rows)
    }
}

/// A configuration `x_S` of the variables in `subset`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub subset: Vec<usize>,
    pub values: Vec<Code>,
}

impl Configuration {
    /// Restriction of a full row to `subset`.
    pub fn of_row(subset: &[usize], row: &[Code]) -> Self {
        Self {
            subset: subset.to_vec(),
            values: subset.iter().map(|&j| row[j]).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Cells {
    Dense(Vec<u32>),
    Sparse(FxHashMap<u64, u32>),
}

/// Counts `n^S_{x_S}` of each configuration of the variables in `S`.
///
/// Configurations are keyed by their mixed-radix index over the subset
/// (last variable fastest). Unobserved configurations read as zero. The
/// empty subset is a valid table with a single cell holding `total`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarginalCountTable {
    subset: Vec<usize>,
    strides: Vec<u64>,
    radices: Vec<usize>,
    cells: Cells,
    total: usize,
}

impl MarginalCountTable {
    /// An all-zero table over `subset`, which must be sorted and duplicate free.
    pub fn empty(subset: &[usize], levels: &[usize]) -> Result<Self> {
        if subset.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain(format!(
                "subset {subset:?} is not sorted and duplicate free"
            )));
        }
        if let Some(&bad) = subset.iter().find(|&&j| j >= levels.len()) {
            return Err(Error::Bounds(format!(
                "variable {bad} >= q = {}",
                levels.len()
            )));
        }
        let radices: Vec<usize> = subset.iter().map(|&j| levels[j]).collect();
        let mut strides = vec![0u64; subset.len()];
        let mut size: u64 = 1;
        for t in (0..subset.len()).rev() {
            strides[t] = size;
            size = size.checked_mul(radices[t] as u64).ok_or_else(|| {
                Error::Domain(format!("configuration space of {subset:?} overflows"))
            })?;
        }
        let cells = if size <= DENSE_CELL_LIMIT {
            Cells::Dense(vec![0; size as usize])
        } else {
            Cells::Sparse(FxHashMap::default())
        };
        Ok(Self {
            subset: subset.to_vec(),
            strides,
            radices,
            cells,
            total: 0,
        })
    }

    pub fn subset(&self) -> &[usize] {
        &self.subset
    }

    pub fn total(&self) -> usize {
        self.total
    }

    /// `|𝒳_S|`, the number of possible configurations.
    pub fn cell_count(&self) -> f64 {
        self.radices.iter().map(|&l| l as f64).product()
    }

    #[inline]
    fn row_key(&self, row: &[Code]) -> u64 {
        self.subset
            .iter()
            .zip(&self.strides)
            .map(|(&j, &s)| row[j] as u64 * s)
            .sum()
    }

    fn values_key(&self, values: &[Code]) -> u64 {
        values
            .iter()
            .zip(&self.strides)
            .map(|(&v, &s)| v as u64 * s)
            .sum()
    }

    fn key_values(&self, mut key: u64) -> Vec<Code> {
        self.strides
            .iter()
            .map(|&s| {
                let v = key / s;
                key %= s;
                v as Code
            })
            .collect()
    }

    #[inline]
    fn get_key(&self, key: u64) -> usize {
        match &self.cells {
            Cells::Dense(v) => v[key as usize] as usize,
            Cells::Sparse(m) => m.get(&key).copied().unwrap_or(0) as usize,
        }
    }

    /// Count of the configuration a full row takes on this subset.
    #[inline]
    pub fn count_row(&self, row: &[Code]) -> usize {
        self.get_key(self.row_key(row))
    }

    /// Count of a configuration given as values aligned with the subset.
    pub fn get(&self, values: &[Code]) -> usize {
        if values.len() != self.subset.len()
            || values.iter().zip(&self.radices).any(|(&v, &l)| v as usize >= l)
        {
            return 0;
        }
        self.get_key(self.values_key(values))
    }

    pub fn add_row(&mut self, row: &[Code]) {
        let key = self.row_key(row);
        match &mut self.cells {
            Cells::Dense(v) => v[key as usize] += 1,
            Cells::Sparse(m) => *m.entry(key).or_insert(0) += 1,
        }
        self.total += 1;
    }

    pub fn remove_row(&mut self, row: &[Code]) -> Result<()> {
        let key = self.row_key(row);
        let ok = match &mut self.cells {
            Cells::Dense(v) => {
                let c = &mut v[key as usize];
                if *c == 0 {
                    false
                } else {
                    *c -= 1;
                    true
                }
            }
            Cells::Sparse(m) => match m.get_mut(&key) {
                Some(c) if *c > 1 => {
                    *c -= 1;
                    true
                }
                Some(_) => {
                    m.remove(&key);
                    true
                }
                None => false,
            },
        };
        if !ok || self.total == 0 {
            return Err(Error::State(format!(
                "removing an uncounted row from table over {:?}",
                self.subset
            )));
        }
        self.total -= 1;
        Ok(())
    }

    /// Observed configurations with their counts, in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<Code>, usize)> + '_ {
        let mut keyed: Vec<(u64, usize)> = match &self.cells {
            Cells::Dense(v) => v
                .iter()
                .enumerate()
                .filter(|(_, &c)| c > 0)
                .map(|(k, &c)| (k as u64, c as usize))
                .collect(),
            Cells::Sparse(m) => m.iter().map(|(&k, &c)| (k, c as usize)).collect(),
        };
        keyed.sort_unstable();
        keyed.into_iter().map(|(k, c)| (self.key_values(k), c))
    }

    /// Observed configurations as [`Configuration`] values.
    pub fn configurations(&self) -> impl Iterator<Item = (Configuration, usize)> + '_ {
        self.iter().map(|(values, c)| {
            (
                Configuration {
                    subset: self.subset.clone(),
                    values,
                },
                c,
            )
        })
    }

    /// Observed counts only, in unspecified order.
    pub fn observed_counts(&self) -> Vec<usize> {
        match &self.cells {
            Cells::Dense(v) => v.iter().filter(|&&c| c > 0).map(|&c| c as usize).collect(),
            Cells::Sparse(m) => m.values().map(|&c| c as usize).collect(),
        }
    }

    /// Sums out the variables not in `keep` (which must be a subset of this table's subset).
    pub fn marginalize(&self, keep: &[usize], levels: &[usize]) -> Result<Self> {
        let pos: Vec<usize> = keep
            .iter()
            .map(|v| {
                self.subset.iter().position(|s| s == v).ok_or_else(|| {
                    Error::Domain(format!("variable {v} not in subset {:?}", self.subset))
                })
            })
            .collect::<Result<_>>()?;
        let mut out = Self::empty(keep, levels)?;
        for (values, c) in self.iter() {
            let sub: Vec<Code> = pos.iter().map(|&p| values[p]).collect();
            let key = out.values_key(&sub);
            match &mut out.cells {
                Cells::Dense(v) => v[key as usize] += c as u32,
                Cells::Sparse(m) => *m.entry(key).or_insert(0) += c as u32,
            }
            out.total += c;
        }
        Ok(out)
    }
}

/// Counts over the given rows of `dataset` restricted to `subset`.
pub fn marginal_counts(
    dataset: &CategoricalDataset,
    rows: &[usize],
    subset: &[usize],
) -> Result<MarginalCountTable> {
    let mut table = MarginalCountTable::empty(subset, dataset.levels())?;
    for &i in rows {
        if i >= dataset.n() {
            return Err(Error::Bounds(format!("row {i} >= n = {}", dataset.n())));
        }
        table.add_row(dataset.row(i));
    }
    Ok(table)
}
