//! ε-tables: Wynn's ε-algorithm, the multistep ε-algorithm, the cross
//! rule, Wynn's ascending-diagonal progressive storage, and tables filled
//! from the determinant formulas.
//!
//! A table with step `m` has columns `κ = -m, -m+1, ...`. The leftmost
//! columns are the initialization rows
//!
//! ```text
//! ε_{-m}^{(n)} = 0,   ε_{-m+i}^{(n)} = n (i = 1..m-1),   ε_0^{(n)} = S_n
//! ```
//!
//! and every further column follows the multistep rule
//!
//! ```text
//! ε_{κ+1}^{(n)} = ε_{κ-m}^{(n+1)} + 1 / Π_{i=1..m} (ε_{κ-m+i}^{(n+1)} - ε_{κ-m+i}^{(n)})
//! ```
//!
//! which is Wynn's rule for `m = 1`. Cell `(κ, n)` with `κ >= 1` reads
//! `S_n..S_{n+κ}`, so it exists when `κ + n <= N`.
//!
//! A zero factor in the product marks the cell as a breakdown, and every
//! cell computed from a breakdown inherits it.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::determinant::DetOracle;
use crate::error::{Error, Result};
use crate::numerics::{Mode, Scalar, SequencePrefix, ZeroPolicy};
use crate::transform::{epsilon_entry_det_with, multistep_shanks_linear_with};

/// State of one table cell.
#[derive(Clone, Debug, PartialEq)]
pub enum CellState {
    Valid(Scalar),
    /// Undefined because of a zero denominator at `origin = (κ, n)`, either
    /// here or in an ancestor.
    Breakdown { origin: (isize, usize) },
    /// The `ε_{-2} = ∞` column of the cross rule.
    Infinity,
    /// Not computed by this engine (odd columns of the cross rule).
    Unset,
}

impl CellState {
    pub fn value(&self) -> Option<&Scalar> {
        match self {
            CellState::Valid(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_valid(&self) -> bool {
        matches!(self, CellState::Valid(_))
    }

    pub fn status(&self) -> &'static str {
        match self {
            CellState::Valid(_) => "valid",
            CellState::Breakdown { .. } => "breakdown",
            CellState::Infinity => "infinity",
            CellState::Unset => "unset",
        }
    }
}

/// A two-index ε-array. Column `κ` holds the cells `(κ, n)` for
/// `n = 0..=N - max(κ, 0)`.
#[derive(Clone, Debug, PartialEq)]
pub struct EpsilonTable {
    m: usize,
    min_k: isize,
    columns: Vec<Vec<CellState>>,
    source: SequencePrefix,
    policy: ZeroPolicy,
}

impl EpsilonTable {
    /// A multistep table with no terms yet.
    pub fn empty(m: usize, mode: Mode) -> Self {
        Self::empty_with(m, mode, ZeroPolicy::for_mode(mode))
    }

    pub fn empty_with(m: usize, mode: Mode, policy: ZeroPolicy) -> Self {
        assert!(m >= 1, "step m must be at least 1");
        EpsilonTable {
            m,
            min_k: -(m as isize),
            columns: vec![Vec::new(); m + 1],
            source: SequencePrefix::empty("", mode),
            policy,
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn source(&self) -> &SequencePrefix {
        &self.source
    }

    pub fn policy(&self) -> &ZeroPolicy {
        &self.policy
    }

    /// Leftmost column: `-m`, or `-2` for a cross-rule table.
    pub fn min_k(&self) -> isize {
        self.min_k
    }

    /// Rightmost column holding at least one cell.
    pub fn max_k(&self) -> isize {
        self.min_k + self.columns.iter().rposition(|c| !c.is_empty()).map_or(-1, |p| p as isize)
    }

    /// `N`, the index of the last sequence term.
    pub fn last_index(&self) -> isize {
        self.source.last_index()
    }

    /// The cell `(κ, n)`, or `None` outside the table's domain.
    pub fn get(&self, k: isize, n: usize) -> Option<&CellState> {
        if k < self.min_k {
            return None;
        }
        self.columns.get((k - self.min_k) as usize)?.get(n)
    }

    /// The value of a valid cell.
    pub fn value(&self, k: isize, n: usize) -> Option<&Scalar> {
        self.get(k, n).and_then(CellState::value)
    }

    pub fn column(&self, k: isize) -> &[CellState] {
        if k < self.min_k {
            return &[];
        }
        self.columns.get((k - self.min_k) as usize).map_or(&[], Vec::as_slice)
    }

    /// All cells, column by column.
    pub fn cells(&self) -> impl Iterator<Item = (isize, usize, &CellState)> + '_ {
        self.columns
            .iter()
            .enumerate()
            .flat_map(move |(c, col)| col.iter().enumerate().map(move |(n, s)| (self.min_k + c as isize, n, s)))
    }

    /// Number of breakdown cells.
    pub fn breakdown_count(&self) -> usize {
        self.cells().filter(|(_, _, s)| matches!(s, CellState::Breakdown { .. })).count()
    }

    fn cell(&self, k: isize, n: usize) -> &CellState {
        self.get(k, n).unwrap_or(&CellState::Unset)
    }

    fn column_mut(&mut self, k: isize) -> &mut Vec<CellState> {
        let c = (k - self.min_k) as usize;
        if c >= self.columns.len() {
            self.columns.resize(c + 1, Vec::new());
        }
        &mut self.columns[c]
    }

    /// Snapshot for JSON/CSV output. With a `limit`, valid cells of the
    /// columns `κ = (m+1)k` also carry `|ε - limit|`.
    pub fn dump(&self, limit: Option<&Scalar>) -> TableDump {
        let p = (self.m + 1) as isize;
        let cells = self
            .cells()
            .map(|(k, n, state)| {
                let error = match (limit, state) {
                    (Some(l), CellState::Valid(v)) if k >= 0 && k % p == 0 => Some((v - l).abs().to_string()),
                    _ => None,
                };
                CellRecord {
                    k,
                    n,
                    status: state.status().to_string(),
                    value: match state {
                        CellState::Valid(v) => v.to_string(),
                        CellState::Infinity => "inf".to_string(),
                        _ => String::new(),
                    },
                    origin: match state {
                        CellState::Breakdown { origin } => Some(*origin),
                        _ => None,
                    },
                    error,
                }
            })
            .collect();
        TableDump { m: self.m, cells }
    }
}

/// `1/(a - b)` for the cross rule: `Some(None)` on a zero denominator,
/// `None` when `a` is not available.
fn reciprocal_difference(a: &CellState, b: &Scalar, policy: &ZeroPolicy) -> Option<Option<Scalar>> {
    match a {
        CellState::Infinity => Some(Some(b.mode().int(0))),
        CellState::Valid(a) => {
            let d = a - b;
            if policy.is_effectively_zero(&d, &Scalar::max_abs(a, b)) {
                Some(None)
            } else {
                Some(d.recip())
            }
        }
        _ => None,
    }
}

fn first_breakdown<'a>(cells: impl IntoIterator<Item = &'a CellState>) -> Option<CellState> {
    cells.into_iter().find(|c| matches!(c, CellState::Breakdown { .. })).cloned()
}

/// One application of the multistep rule, producing cell `(kappa, n)` with
/// `kappa >= 1` from its `2m + 1` parents.
fn lozenge<'b>(
    m: usize,
    policy: &ZeroPolicy,
    kappa: isize,
    n: usize,
    get: impl Fn(isize, usize) -> &'b CellState,
) -> CellState {
    let mi = m as isize;
    let k = kappa - 1;
    let base = get(k - mi, n + 1);
    let pairs: Vec<(&CellState, &CellState)> = (1..=mi).map(|i| (get(k - mi + i, n + 1), get(k - mi + i, n))).collect();
    if let Some(poisoned) = first_breakdown(std::iter::once(base).chain(pairs.iter().flat_map(|&(a, b)| [a, b]))) {
        return poisoned;
    }
    let Some(base) = base.value() else { return CellState::Unset };
    let mut product: Option<Scalar> = None;
    for (hi, lo) in pairs {
        let (Some(a), Some(b)) = (hi.value(), lo.value()) else { return CellState::Unset };
        let d = a - b;
        if policy.is_effectively_zero(&d, &Scalar::max_abs(a, b)) {
            return CellState::Breakdown { origin: (kappa, n) };
        }
        product = Some(match product {
            None => d,
            Some(p) => p * d,
        });
    }
    let product = product.expect("m >= 1");
    CellState::Valid(base + product.recip().expect("nonzero product"))
}

/// Initialization cells `(κ, n)` for `κ = -m..=0`.
fn initial_cells(m: usize, n: usize, term: &Scalar) -> Vec<CellState> {
    let mode = term.mode();
    let mut cells = vec![CellState::Valid(mode.int(0))];
    cells.extend((1..m).map(|_| CellState::Valid(mode.int(n as i64))));
    cells.push(CellState::Valid(term.clone()));
    cells
}

/// The multistep ε-table of `seq` with the default zero policy for its
/// mode.
pub fn multistep_epsilon(seq: &SequencePrefix, m: usize) -> EpsilonTable {
    multistep_epsilon_with(seq, m, ZeroPolicy::for_mode(seq.mode()))
}

/// Batch construction, column by column.
pub fn multistep_epsilon_with(seq: &SequencePrefix, m: usize, policy: ZeroPolicy) -> EpsilonTable {
    let mut table = EpsilonTable::empty_with(m, seq.mode(), policy);
    table.source = seq.clone();
    let len = seq.len();
    for (n, term) in seq.terms().iter().enumerate() {
        for (offset, cell) in initial_cells(m, n, term).into_iter().enumerate() {
            table.columns[offset].push(cell);
        }
    }
    for kappa in 1..len as isize {
        let column: Vec<CellState> = (0..len - kappa as usize)
            .map(|n| lozenge(m, &table.policy, kappa, n, |j, i| table.cell(j, i)))
            .collect();
        *table.column_mut(kappa) = column;
    }
    table
}

/// Wynn's ε-algorithm, coded directly:
/// `ε_{k+1}^{(n)} = ε_{k-1}^{(n+1)} + 1/(ε_k^{(n+1)} - ε_k^{(n)})`.
pub fn wynn_epsilon(seq: &SequencePrefix) -> EpsilonTable {
    let policy = ZeroPolicy::for_mode(seq.mode());
    let len = seq.len();
    let zero = seq.mode().int(0);
    let mut columns: Vec<Vec<CellState>> = vec![
        vec![CellState::Valid(zero); len],
        seq.terms().iter().cloned().map(CellState::Valid).collect(),
    ];
    for k in 0..len.saturating_sub(1) {
        let (prev, cur) = (&columns[k], &columns[k + 1]);
        let next = (0..len - k - 1)
            .map(|n| match (&prev[n + 1], &cur[n + 1], &cur[n]) {
                (CellState::Valid(base), CellState::Valid(a), CellState::Valid(b)) => {
                    let d = a - b;
                    if policy.is_effectively_zero(&d, &Scalar::max_abs(a, b)) {
                        CellState::Breakdown { origin: (k as isize + 1, n) }
                    } else {
                        CellState::Valid(base + d.recip().expect("nonzero"))
                    }
                }
                (p, a, b) => first_breakdown([p, a, b]).unwrap_or(CellState::Unset),
            })
            .collect();
        columns.push(next);
    }
    EpsilonTable { m: 1, min_k: -1, columns, source: seq.clone(), policy }
}

/// Even columns of Wynn's table from the cross rule
///
/// ```text
/// 1/(ε_{2k+4}^{(n)} - C) = 1/(ε_{2k+2}^{(n+2)} - C) + 1/(ε_{2k+2}^{(n)} - C) - 1/(ε_{2k}^{(n+2)} - C)
/// ```
///
/// with `C = ε_{2k+2}^{(n+1)}`, `ε_{-2} = ∞` and `ε_0 = S_n`. Odd columns
/// are left unset.
pub fn cross_rule_table(seq: &SequencePrefix) -> EpsilonTable {
    let policy = ZeroPolicy::for_mode(seq.mode());
    let len = seq.len();
    let mut table = EpsilonTable {
        m: 1,
        min_k: -2,
        columns: vec![vec![CellState::Infinity; len], vec![CellState::Unset; len]],
        source: seq.clone(),
        policy,
    };
    table.columns.push(seq.terms().iter().cloned().map(CellState::Valid).collect());
    let mut kappa = 2isize;
    while (kappa as usize) < len {
        let column: Vec<CellState> = (0..len - kappa as usize)
            .map(|n| cross_cell(&table, kappa, n))
            .collect();
        *table.column_mut(kappa - 1) = vec![CellState::Unset; len - kappa as usize + 1];
        *table.column_mut(kappa) = column;
        kappa += 2;
    }
    if len >= 2 && (len - 1) % 2 == 1 {
        *table.column_mut(len as isize - 1) = vec![CellState::Unset; 1];
    }
    table
}

fn cross_cell(table: &EpsilonTable, kappa: isize, n: usize) -> CellState {
    let centre = table.cell(kappa - 2, n + 1);
    let south = table.cell(kappa - 2, n + 2);
    let north = table.cell(kappa - 2, n);
    let west = table.cell(kappa - 4, n + 2);
    if let Some(poisoned) = first_breakdown([centre, south, north, west]) {
        return poisoned;
    }
    let Some(c) = centre.value() else { return CellState::Unset };
    let breakdown = CellState::Breakdown { origin: (kappa, n) };
    let mut sum = c.mode().int(0);
    for (cell, sign) in [(south, 1), (north, 1), (west, -1)] {
        match reciprocal_difference(cell, c, &table.policy) {
            None => return CellState::Unset,
            Some(None) => return breakdown,
            Some(Some(r)) => sum = if sign > 0 { sum + r } else { sum - r },
        }
    }
    let scale = Scalar::one().to_mode(c.mode());
    if table.policy.is_effectively_zero(&sum, &scale) || sum.is_zero() {
        return breakdown;
    }
    CellState::Valid(c + &sum.recip().expect("nonzero"))
}

/// Cells of the frontier reached when the term `S_d` arrives: the
/// initialization cells `(κ, d)` for `κ <= 0` and `(κ, d - κ)` for
/// `κ = 1..=d`, in that order. Earlier frontiers are read through `older`;
/// only the last `m` of them are ever touched.
fn next_frontier<'a>(
    m: usize,
    policy: &ZeroPolicy,
    term: &Scalar,
    d: usize,
    older: impl Fn(isize, usize) -> &'a CellState,
) -> Vec<CellState> {
    let mut frontier = initial_cells(m, d, term);
    for kappa in 1..=d as isize {
        let n = d - kappa as usize;
        let cell = {
            let fetch = |j: isize, i: usize| -> &CellState {
                if i + j.max(0) as usize == d {
                    &frontier[(j + m as isize) as usize]
                } else {
                    older(j, i)
                }
            };
            lozenge(m, policy, kappa, n, fetch)
        };
        frontier.push(cell);
    }
    frontier
}

/// Extend a multistep table by one term, computing only the new ascending
/// diagonal. The result equals [`multistep_epsilon`] on the extended
/// sequence.
pub fn progressive_append(mut table: EpsilonTable, next_term: Scalar) -> Result<EpsilonTable> {
    if table.min_k != -(table.m as isize) {
        return Err(Error::InvalidSpec("progressive append works on multistep tables only".into()));
    }
    table.source.push(next_term.clone())?;
    let d = table.source.len() - 1;
    let frontier = next_frontier(table.m, &table.policy, &next_term, d, |j, i| table.cell(j, i));
    for (offset, cell) in frontier.into_iter().enumerate() {
        table.column_mut(offset as isize - table.m as isize).push(cell);
    }
    Ok(table)
}

/// Wynn's ascending-diagonal storage: terms arrive one by one and only the
/// last `m + 1` frontiers are kept.
#[derive(Clone, Debug)]
pub struct EpsilonStream {
    m: usize,
    mode: Mode,
    policy: ZeroPolicy,
    count: usize,
    window: VecDeque<Vec<CellState>>,
}

impl EpsilonStream {
    pub fn new(m: usize, mode: Mode) -> Self {
        assert!(m >= 1, "step m must be at least 1");
        EpsilonStream { m, mode, policy: ZeroPolicy::for_mode(mode), count: 0, window: VecDeque::new() }
    }

    /// Number of terms consumed.
    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// Feed the next term and return the new frontier (see
    /// [`EpsilonStream::frontier`]).
    pub fn push(&mut self, term: Scalar) -> Result<&[CellState]> {
        if term.mode() != self.mode {
            return Err(Error::ModeMismatch(format!("stream is {} but the term is {}", self.mode, term.mode())));
        }
        let d = self.count;
        let m = self.m as isize;
        let window = &self.window;
        let frontier = next_frontier(self.m, &self.policy, &term, d, |j, i| {
            let age = d - (i + j.max(0) as usize);
            &window[window.len() - age][(j + m) as usize]
        });
        self.window.push_back(frontier);
        if self.window.len() > self.m + 1 {
            self.window.pop_front();
        }
        self.count += 1;
        Ok(self.frontier())
    }

    /// The latest frontier: cells `(κ, N)` for `κ = -m..=0`, then
    /// `(κ, N - κ)` for `κ = 1..=N`.
    pub fn frontier(&self) -> &[CellState] {
        self.window.back().map_or(&[], Vec::as_slice)
    }

    /// The valid frontier cell of largest column `κ = (m+1)k`, that is the
    /// highest-order transform `e_{k,m}` of the terms seen so far.
    pub fn best_estimate(&self) -> Option<(isize, &Scalar)> {
        let p = (self.m + 1) as isize;
        let m = self.m as isize;
        self.frontier()
            .iter()
            .enumerate()
            .map(|(c, s)| (c as isize - m, s))
            .rev()
            .filter(|(k, _)| *k >= 0 && k % p == 0)
            .find_map(|(k, s)| s.value().map(|v| (k, v)))
    }
}

fn initialized_table(seq: &SequencePrefix, m: usize, policy: ZeroPolicy) -> EpsilonTable {
    let mut table = EpsilonTable::empty_with(m, seq.mode(), policy);
    table.source = seq.clone();
    for (n, term) in seq.terms().iter().enumerate() {
        for (offset, cell) in initial_cells(m, n, term).into_iter().enumerate() {
            table.columns[offset].push(cell);
        }
    }
    table
}

/// Every cell of the multistep table from the determinant formulas.
pub fn determinant_table(seq: &SequencePrefix, m: usize) -> EpsilonTable {
    let mut table = initialized_table(seq, m, ZeroPolicy::for_mode(seq.mode()));
    let oracle = DetOracle::new(seq, m);
    let len = seq.len();
    for kappa in 1..len as isize {
        let column = (0..len - kappa as usize)
            .map(|n| match epsilon_entry_det_with(&oracle, &table.policy, kappa, n) {
                Ok(v) => CellState::Valid(v),
                Err(_) => CellState::Breakdown { origin: (kappa, n) },
            })
            .collect();
        *table.column_mut(kappa) = column;
    }
    table
}

/// The columns `κ = (m+1)k` from the linear-system realisation; the
/// intermediate columns are left unset.
pub fn linear_table(seq: &SequencePrefix, m: usize) -> EpsilonTable {
    let mut table = initialized_table(seq, m, ZeroPolicy::for_mode(seq.mode()));
    let oracle = DetOracle::new(seq, m);
    let len = seq.len();
    let p = m + 1;
    for kappa in 1..len {
        let column = (0..len - kappa)
            .map(|n| {
                if kappa % p != 0 {
                    return CellState::Unset;
                }
                match multistep_shanks_linear_with(&oracle, &table.policy, kappa / p, n) {
                    Ok(v) => CellState::Valid(v),
                    Err(_) => CellState::Breakdown { origin: (kappa as isize, n) },
                }
            })
            .collect();
        *table.column_mut(kappa as isize) = column;
    }
    table
}

/// One row of a table dump.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub k: isize,
    pub n: usize,
    pub status: String,
    pub value: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<(isize, usize)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Serializable table: `{"m": .., "cells": [{"k", "n", "status", "value"}]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableDump {
    pub m: usize,
    pub cells: Vec<CellRecord>,
}

impl TableDump {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<TableDump> {
        serde_json::from_str(text).map_err(|e| Error::Parse { line: e.line(), message: e.to_string() })
    }

    /// `k,n,status,value,origin,error` with a header line; `m` goes in a
    /// leading `# m=` comment and a breakdown origin is written `k:n`.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# m={}\nk,n,status,value,origin,error\n", self.m);
        for c in &self.cells {
            let origin = c.origin.map(|(k, n)| format!("{k}:{n}")).unwrap_or_default();
            let error = c.error.as_deref().unwrap_or("");
            out.push_str(&format!("{},{},{},{},{},{}\n", c.k, c.n, c.status, c.value, origin, error));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<TableDump> {
        let mut m = None;
        let mut cells = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let bad = |message: &str| Error::Parse { line: line_no, message: message.to_string() };
            if let Some(rest) = line.strip_prefix("# m=") {
                m = Some(rest.trim().parse().map_err(|_| bad("bad m"))?);
                continue;
            }
            if line.trim().is_empty() || line.starts_with('#') || line.starts_with("k,") {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 6 {
                return Err(bad("expected 6 fields"));
            }
            let origin = match fields[4].split_once(':') {
                Some((k, n)) => Some((k.parse().map_err(|_| bad("bad origin"))?, n.parse().map_err(|_| bad("bad origin"))?)),
                None if fields[4].is_empty() => None,
                None => return Err(bad("bad origin")),
            };
            cells.push(CellRecord {
                k: fields[0].parse().map_err(|_| bad("bad k"))?,
                n: fields[1].parse().map_err(|_| bad("bad n"))?,
                status: fields[2].to_string(),
                value: fields[3].to_string(),
                origin,
                error: (!fields[5].is_empty()).then(|| fields[5].to_string()),
            });
        }
        Ok(TableDump { m: m.ok_or(Error::Parse { line: 1, message: "missing '# m=' line".into() })?, cells })
    }

    /// Parsed value of a valid cell.
    pub fn value(&self, k: isize, n: usize, mode: Mode) -> Option<Scalar> {
        let cell = self.cells.iter().find(|c| c.k == k && c.n == n && c.status == "valid")?;
        Scalar::parse_in(&cell.value, mode).ok()
    }
}
