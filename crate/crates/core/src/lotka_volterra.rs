//! The extended discrete Lotka–Volterra lattice attached to the multistep
//! ε-algorithm.
//!
//! The lattice variable with physical index `j - (m-1)/2` is stored under
//! the integer `j`, and is tied to column `j` of the ε-table by the Miura
//! map
//!
//! ```text
//! a_j^{(n)} = 1 / (ε_j^{(n+1)} - ε_j^{(n)}),     j >= -m.
//! ```
//!
//! In this indexing the lattice equation reads
//!
//! ```text
//! Π_{i<m} a_{k+i}^{(n+1)} - Π_{i<m} a_{k+i}^{(n)} = 1/a_{k+m}^{(n)} - 1/a_{k-1}^{(n+1)}
//! ```
//!
//! with `1/∞ = 0`. Its solution is a ratio of determinants on each residue
//! class `j mod (m+1)`, see [`lv_closed_form`]. The left boundary is
//! `a_{-m} = ∞`, `a_j = 1` for `-m < j < 0` and `a_0 = 1/ΔS_n`.

use std::collections::BTreeMap;

use crate::determinant::DetOracle;
use crate::epsilon::{CellState, EpsilonTable};
use crate::error::{Error, Result};
use crate::numerics::{Scalar, SequencePrefix, ZeroPolicy};

/// One lattice value.
#[derive(Clone, Debug, PartialEq)]
pub enum LvEntry {
    Finite(Scalar),
    Infinity,
    /// A zero ε difference or determinant away from the left boundary, or
    /// a breakdown in the underlying table.
    Breakdown,
}

impl LvEntry {
    pub fn finite(&self) -> Option<&Scalar> {
        match self {
            LvEntry::Finite(v) => Some(v),
            _ => None,
        }
    }

    /// `1/a`, with `1/∞ = 0`.
    fn reciprocal(&self, zero: &Scalar) -> Option<Scalar> {
        match self {
            LvEntry::Finite(v) => v.recip(),
            LvEntry::Infinity => Some(zero.clone()),
            LvEntry::Breakdown => None,
        }
    }
}

/// Lattice values `a_j^{(n)}` keyed by `(j, n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LVLattice {
    m: usize,
    source: SequencePrefix,
    entries: BTreeMap<(isize, usize), LvEntry>,
}

impl LVLattice {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn source(&self) -> &SequencePrefix {
        &self.source
    }

    pub fn get(&self, j: isize, n: usize) -> Option<&LvEntry> {
        self.entries.get(&(j, n))
    }

    /// Replace one entry (for sensitivity experiments).
    pub fn set(&mut self, j: isize, n: usize, entry: LvEntry) {
        self.entries.insert((j, n), entry);
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(isize, usize), &LvEntry)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The physical index `j - (m-1)/2` as text (`"3"` or `"5/2"`).
    pub fn physical_index(&self, j: isize) -> String {
        Scalar::ratio(2 * j as i64 - self.m as i64 + 1, 2).to_string()
    }

    /// Sites `(j, n)` for which both ε cells `(j, n)` and `(j, n+1)` exist
    /// on a prefix with last index `last`.
    fn domain(m: usize, last: isize) -> impl Iterator<Item = (isize, usize)> {
        let min_j = -(m as isize);
        (min_j..last).flat_map(move |j| {
            let count = (last - j.max(0)).max(0) as usize;
            (0..count).map(move |n| (j, n))
        })
    }
}

/// The lattice obtained from an ε-table through the Miura map.
pub fn miura_from_epsilon(table: &EpsilonTable) -> Result<LVLattice> {
    if table.min_k() != -(table.m() as isize) {
        return Err(Error::Inadmissible("the Miura map needs a multistep ε-table".into()));
    }
    let m = table.m();
    let policy = table.policy();
    let mut entries = BTreeMap::new();
    for (j, n) in LVLattice::domain(m, table.last_index()) {
        let entry = match (table.get(j, n + 1), table.get(j, n)) {
            (Some(CellState::Valid(hi)), Some(CellState::Valid(lo))) => {
                let d = hi - lo;
                if !d.is_zero() && !policy.is_effectively_zero(&d, &Scalar::max_abs(hi, lo)) {
                    LvEntry::Finite(d.recip().expect("nonzero"))
                } else if j == -(m as isize) {
                    LvEntry::Infinity
                } else {
                    LvEntry::Breakdown
                }
            }
            _ => LvEntry::Breakdown,
        };
        entries.insert((j, n), entry);
    }
    Ok(LVLattice { m, source: table.source().clone(), entries })
}

/// Residue class of a lattice index `j = (m+1)k + r`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LvBranch {
    /// `r = 0`
    Base,
    /// `r = 1`
    Shifted,
    /// `r = j`, `2 <= j <= m`
    Interior(usize),
}

/// Split `j` into `(branch, k)`.
pub fn lv_branch(m: usize, j: isize) -> (LvBranch, isize) {
    let p = (m + 1) as isize;
    let k = j.div_euclid(p);
    let branch = match j.rem_euclid(p) {
        0 => LvBranch::Base,
        1 => LvBranch::Shifted,
        r => LvBranch::Interior(r as usize),
    };
    (branch, k)
}

/// The determinant form of `a^{(n)}` at `j = (m+1)k + r`:
///
/// * `Base`: `H_k(Δ^{m+1}S_n) H_k(Δ^{m+1}S_{n+1}) / (H_{k+1}(ΔS_n) H_k(Δ^m S_{n+1}))`
/// * `Shifted`: `-H_{k+1}(ΔS_n) H_{k+1}(ΔS_{n+1}) / (H_{k+1}(Δ²S_n) H_k(Δ^{m+1}S_{n+1}))`
/// * `Interior(r)`: `H_{k+1}(Δ^r S_n) H_{k+1}(Δ^r S_{n+1}) / (H_{k+1}(Δ^{r+1}S_n) H_{k+1}(Δ^{r-1}S_{n+1}))`
///
/// A zero denominator is reported as [`Error::Breakdown`] (with `k` set to
/// the lattice index `j`).
pub fn lv_closed_form(seq: &SequencePrefix, m: usize, branch: LvBranch, k: isize, n: usize) -> Result<Scalar> {
    closed_form_with(&DetOracle::new(seq, m), branch, k, n)
}

fn closed_form_with(oracle: &DetOracle, branch: LvBranch, k: isize, n: usize) -> Result<Scalar> {
    let m = oracle.m();
    let h = |s: usize, k: isize, n: usize| oracle.h(s, k, n);
    let p = (m + 1) as isize;
    let (num, den, j) = match branch {
        LvBranch::Base => {
            (h(m + 1, k, n)? * h(m + 1, k, n + 1)?, h(1, k + 1, n)? * h(m, k, n + 1)?, p * k)
        }
        LvBranch::Shifted => (
            -(h(1, k + 1, n)? * h(1, k + 1, n + 1)?),
            h(2, k + 1, n)? * h(m + 1, k, n + 1)?,
            p * k + 1,
        ),
        LvBranch::Interior(r) => {
            if !(2..=m).contains(&r) {
                return Err(Error::Inadmissible(format!("interior branch needs 2 <= r <= {m}, got {r}")));
            }
            (
                h(r, k + 1, n)? * h(r, k + 1, n + 1)?,
                h(r + 1, k + 1, n)? * h(r - 1, k + 1, n + 1)?,
                p * k + r as isize,
            )
        }
    };
    num.checked_div(&den).ok_or(Error::Breakdown { k: j, n })
}

/// The lattice filled from the determinant forms over the same sites as
/// [`miura_from_epsilon`]. A zero denominator gives `Infinity` on the
/// column `j = -m` and `Breakdown` elsewhere.
pub fn closed_form_lattice(seq: &SequencePrefix, m: usize) -> Result<LVLattice> {
    let oracle = DetOracle::new(seq, m);
    let policy = ZeroPolicy::for_mode(seq.mode());
    let mut entries = BTreeMap::new();
    for (j, n) in LVLattice::domain(m, seq.last_index()) {
        let (branch, k) = lv_branch(m, j);
        let entry = match closed_form_with(&oracle, branch, k, n) {
            Ok(v) if seq.mode().is_rational() || !policy.is_effectively_zero(&v.recip().unwrap_or_default(), &Scalar::one()) => {
                LvEntry::Finite(v)
            }
            Ok(_) => LvEntry::Breakdown,
            Err(Error::Breakdown { .. }) if j == -(m as isize) => LvEntry::Infinity,
            Err(Error::Breakdown { .. }) => LvEntry::Breakdown,
            Err(e) => return Err(e),
        };
        entries.insert((j, n), entry);
    }
    Ok(LVLattice { m, source: seq.clone(), entries })
}

/// The reference boundary checked by the acceptance run: `∞` at
/// `j = -m`, `n` for `-m < j < 0`, `1/ΔS_n` at `j = 0`.
pub fn reference_boundary(seq: &SequencePrefix, m: usize, j: isize, n: usize) -> Result<LvEntry> {
    let mi = m as isize;
    if j == -mi {
        Ok(LvEntry::Infinity)
    } else if -mi < j && j < 0 {
        Ok(LvEntry::Finite(seq.mode().int(n as i64)))
    } else if j == 0 {
        let d = seq.term(n + 1)? - seq.term(n)?;
        Ok(d.recip().map_or(LvEntry::Breakdown, LvEntry::Finite))
    } else {
        Err(Error::Inadmissible(format!("j={j} is not a boundary column")))
    }
}

/// Residuals of the lattice equation, site by site.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LVResidualReport {
    /// `((k, n), residual)` for every site whose entries are usable.
    pub residuals: Vec<((isize, usize), Scalar)>,
    /// Sites touching a breakdown entry.
    pub skipped: Vec<(isize, usize)>,
}

impl LVResidualReport {
    pub fn all_zero(&self) -> bool {
        self.residuals.iter().all(|(_, r)| r.is_zero())
    }

    pub fn nonzero_sites(&self) -> Vec<(isize, usize)> {
        self.residuals.iter().filter(|(_, r)| !r.is_zero()).map(|(s, _)| *s).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.residuals.iter().map(|(_, r)| r.abs().to_f64()).fold(0.0, f64::max)
    }
}

/// Evaluate the lattice equation at every site `(k, n)` whose `2m + 2`
/// entries are present. Product entries must be finite; the two
/// reciprocal entries may be infinite.
pub fn lv_residuals(lattice: &LVLattice) -> LVResidualReport {
    let m = lattice.m as isize;
    let zero = lattice.source.mode().int(0);
    let mut report = LVResidualReport::default();
    let sites: Vec<(isize, usize)> = lattice.entries.keys().copied().collect();
    for (k, n) in sites {
        let product_sites = (0..m).flat_map(|i| [(k + i, n + 1), (k + i, n)]);
        let all_sites: Vec<(isize, usize)> = product_sites.chain([(k + m, n), (k - 1, n + 1)]).collect();
        let Some(entries) = all_sites.iter().map(|s| lattice.entries.get(s)).collect::<Option<Vec<_>>>() else {
            continue;
        };
        if entries.iter().any(|e| matches!(e, LvEntry::Breakdown)) {
            report.skipped.push((k, n));
            continue;
        }
        let products: Option<(Scalar, Scalar)> = (0..m as usize).try_fold((Scalar::one(), Scalar::one()), |(up, down), i| {
            Some((up * entries[2 * i].finite()?, down * entries[2 * i + 1].finite()?))
        });
        let Some((up, down)) = products else { continue };
        let (Some(r_right), Some(r_left)) = (entries[2 * m as usize].reciprocal(&zero), entries[2 * m as usize + 1].reciprocal(&zero)) else {
            report.skipped.push((k, n));
            continue;
        };
        report.residuals.push(((k, n), up - down - (r_right - r_left)));
    }
    report
}

/// Value of `u_k^{(n)}` in the `m = 1` reduction.
#[derive(Clone, Debug, PartialEq)]
pub enum UEntry {
    Finite(Scalar),
    /// `1 + a_k a_{k+1} = 0`.
    Singular,
}

/// The `u` lattice of the `m = 1` reduction, keyed by `(k, n)`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct ULattice {
    pub entries: BTreeMap<(isize, usize), UEntry>,
}

impl ULattice {
    pub fn get(&self, k: isize, n: usize) -> Option<&Scalar> {
        match self.entries.get(&(k, n))? {
            UEntry::Finite(v) => Some(v),
            UEntry::Singular => None,
        }
    }
}

/// `u_k^{(n)} = -1 / (1 + a_k^{(n)} a_{k+1}^{(n)})`, and `u = 0` where
/// `a_k = ∞`. This choice satisfies the ratio constraint
/// `u_k^{(n)} / u_{k-1}^{(n+1)} = a_{k-1}^{(n+1)} / a_{k+1}^{(n)}` and fixes
/// the free normalisation of `u`.
pub fn u_gauge(lattice: &LVLattice) -> Result<ULattice> {
    if lattice.m != 1 {
        return Err(Error::Inadmissible(format!("the u-reduction needs m = 1, got m = {}", lattice.m)));
    }
    let zero = lattice.source.mode().int(0);
    let one = lattice.source.mode().int(1);
    let mut u = ULattice::default();
    for (&(k, n), a) in &lattice.entries {
        let entry = match (a, lattice.entries.get(&(k + 1, n))) {
            (LvEntry::Infinity, _) => UEntry::Finite(zero.clone()),
            (LvEntry::Finite(x), Some(LvEntry::Finite(y))) => {
                let d = &one + &(x * y);
                match d.recip() {
                    Some(r) => UEntry::Finite(-r),
                    None => UEntry::Singular,
                }
            }
            _ => continue,
        };
        u.entries.insert((k, n), entry);
    }
    Ok(u)
}

/// Result of the `m = 1` check.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct UCheckReport {
    pub u: ULattice,
    /// `u_k^{(n)} a_{k+1}^{(n)} - u_{k-1}^{(n+1)} a_{k-1}^{(n+1)}` at sites
    /// with finite entries.
    pub ratio_residuals: Vec<((isize, usize), Scalar)>,
    /// `u_k^{(n+1)} (1 + u_{k-1}^{(n+1)}) - u_k^{(n)} (1 + u_{k+1}^{(n)})`.
    pub equation_residuals: Vec<((isize, usize), Scalar)>,
    pub singular: Vec<(isize, usize)>,
}

impl UCheckReport {
    pub fn all_zero(&self) -> bool {
        self.ratio_residuals.iter().chain(&self.equation_residuals).all(|(_, r)| r.is_zero())
    }
}

/// Build `u` from an `m = 1` lattice and check both the ratio constraint
/// and the discrete Lotka–Volterra equation on it.
pub fn lv_m1_u_check(lattice: &LVLattice) -> Result<UCheckReport> {
    let u = u_gauge(lattice)?;
    Ok(u_residuals(&u, lattice))
}

/// Residuals of a given `u` lattice against `a`.
pub fn u_residuals(u: &ULattice, lattice: &LVLattice) -> UCheckReport {
    let one = lattice.source.mode().int(1);
    let mut report = UCheckReport { u: u.clone(), ..Default::default() };
    report.singular = u.entries.iter().filter(|(_, e)| **e == UEntry::Singular).map(|(s, _)| *s).collect();
    for &(k, n) in u.entries.keys() {
        let a = |j: isize, t: usize| lattice.get(j, t).and_then(LvEntry::finite);
        if let (Some(uk), Some(ul), Some(ar), Some(al)) = (u.get(k, n), u.get(k - 1, n + 1), a(k + 1, n), a(k - 1, n + 1)) {
            report.ratio_residuals.push(((k, n), uk * ar - ul * al));
        }
        if let (Some(a0), Some(a1), Some(b0), Some(b1)) = (u.get(k, n + 1), u.get(k - 1, n + 1), u.get(k, n), u.get(k + 1, n)) {
            report.equation_residuals.push(((k, n), a0 * &(&one + a1) - b0 * &(&one + b1)));
        }
    }
    report
}
