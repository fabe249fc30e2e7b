//! Determinantal and bilinear identities behind the multistep ε-algorithm,
//! evaluated exactly through the determinant oracle.
//!
//! Notation: `h(s, k, n) = H_k(Δ^s S_n)` and `φ(s, k, n) = Φ_k(Δ^s S_n)`.
//! Every identity takes an extra shift `i` and is applied to `Δ^i S`.
//!
//! | id | identity |
//! |----|----------|
//! | `L1_eq10` | `h(i+1,k+1,n) h(i+m,k,n+1) = h(i+m+1,k,n) h(i,k+1,n+1) - h(i+m+1,k,n+1) h(i,k+1,n)` |
//! | `L2_eq11` | `h(i+1,k,n) h(i,k-1,n+1) = h(i+1,k-1,n) h(i,k,n+1) - h(i+1,k-1,n+1) h(i,k,n)` |
//! | `L3_eq12` | `h(i+1,k,n) h(i+m,k,n+1) = h(i+m+1,k,n) h(i,k,n+1) - h(i,k+1,n) h(i+m+1,k-1,n+1)` |
//! | `L3a_eq13` | `L2_eq11` with `i` replaced by `i+m` |
//! | `L3b_eq14` | `h(i,k+1,n) h(i+m,k-1,n+1) = h(i,k,n) h(i+m,k,n+1) - h(i,k,n+1) h(i+m,k,n)` |
//! | `L4_eq15` | `h(i,k,n+1) h(i+2,k-1,n) = h(i+1,k,n) φ(i,k,n+1) - h(i+1,k-1,n+1) φ(i,k+1,n)`, `k >= 1` |
//! | `L4a_eq16` | `h(i+2,k,n) h(i,k,n+1) = h(i+1,k,n) φ(i,k+1,n+1) - h(i+1,k,n+1) φ(i,k+1,n)` |
//! | `L5_eq17` | `h(i+1,k,n) h(i+m+1,k-2,n+1) = h(i+m+1,k-1,n+1) h(i+1,k-1,n) - h(i+m+1,k-1,n) h(i+1,k-1,n+1)`, `k >= 1` |
//!
//! The bilinear identities are stated on the lattice functions `F_κ^n` and
//! `G_κ^n` with `ε_κ^{(n)} = G_κ^n / F_κ^n` (see [`IdentityLab::f`] and
//! [`IdentityLab::g`]). With `M = m + 1`:
//!
//! | id | identity |
//! |----|----------|
//! | `BIL_eq21` | `F(Mk+1,n) G(Mk+1,n+1) - F(Mk+1,n+1) G(Mk+1,n) = -F(Mk+2,n) F(Mk,n+1)` |
//! | `BIL_eq22` | `F(Mk+1,n) G(M(k-1)+1,n+1) - F(M(k-1)+1,n+1) G(Mk+1,n) = -F(M(k-1)+2,n) F(Mk,n+1)` |
//! | `BIL_eq23` | `F(Mk+i,n) G(Mk+i,n+1) - F(Mk+i,n+1) G(Mk+i,n) = F(Mk+i+1,n) F(Mk+i-1,n+1)`, `2 <= i <= M` |
//! | `BIL_eq24` | `F(Mk+i,n) G(M(k-1)+i,n+1) - F(M(k-1)+i,n+1) G(Mk+i,n) = F(M(k-1)+i+1,n) F(Mk+i-1,n+1)`, `2 <= i <= M` |
//! | `BIL_eq19` | the product relation at lattice index `ℓ = k >= -m`, see [`IdentityLab::bilinear19`] |
//! | `COR2` | `F(ℓ+m+1,n) F(ℓ-1,n+1) = F(ℓ,n) F(ℓ+m,n+1) - F(ℓ+m,n) F(ℓ,n+1)` at `ℓ = k >= -m` |

use std::collections::BTreeMap;
use std::fmt;

use crate::determinant::{determinant, DetOracle};
use crate::error::{Error, Result};
use crate::numerics::{Scalar, SequencePrefix};
use crate::transform::split_column;

/// Name of a checkable identity.
#[allow(non_camel_case_types)]
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IdentityId {
    L1_eq10,
    L2_eq11,
    L3_eq12,
    L3a_eq13,
    L3b_eq14,
    L4_eq15,
    L4a_eq16,
    L5_eq17,
    BIL_eq19,
    BIL_eq21,
    BIL_eq22,
    BIL_eq23,
    BIL_eq24,
    COR2,
}

impl IdentityId {
    pub const ALL: [IdentityId; 14] = [
        IdentityId::L1_eq10,
        IdentityId::L2_eq11,
        IdentityId::L3_eq12,
        IdentityId::L3a_eq13,
        IdentityId::L3b_eq14,
        IdentityId::L4_eq15,
        IdentityId::L4a_eq16,
        IdentityId::L5_eq17,
        IdentityId::BIL_eq19,
        IdentityId::BIL_eq21,
        IdentityId::BIL_eq22,
        IdentityId::BIL_eq23,
        IdentityId::BIL_eq24,
        IdentityId::COR2,
    ];

    /// Smallest admissible `k` (for `BIL_eq19` and `COR2`, the lattice
    /// index `ℓ`).
    pub fn min_k(self, m: usize) -> isize {
        match self {
            IdentityId::L4_eq15 | IdentityId::L5_eq17 => 1,
            IdentityId::BIL_eq19 | IdentityId::COR2 => -(m as isize),
            _ => 0,
        }
    }

    /// Admissible values of the shift `i`, given an upper bound.
    pub fn shifts(self, m: usize, max_shift: usize) -> std::ops::RangeInclusive<usize> {
        match self {
            IdentityId::BIL_eq23 | IdentityId::BIL_eq24 => 2..=m + 1,
            IdentityId::BIL_eq19 | IdentityId::BIL_eq21 | IdentityId::BIL_eq22 | IdentityId::COR2 => 0..=0,
            _ => 0..=max_shift,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            IdentityId::L1_eq10 => "L1_eq10",
            IdentityId::L2_eq11 => "L2_eq11",
            IdentityId::L3_eq12 => "L3_eq12",
            IdentityId::L3a_eq13 => "L3a_eq13",
            IdentityId::L3b_eq14 => "L3b_eq14",
            IdentityId::L4_eq15 => "L4_eq15",
            IdentityId::L4a_eq16 => "L4a_eq16",
            IdentityId::L5_eq17 => "L5_eq17",
            IdentityId::BIL_eq19 => "BIL_eq19",
            IdentityId::BIL_eq21 => "BIL_eq21",
            IdentityId::BIL_eq22 => "BIL_eq22",
            IdentityId::BIL_eq23 => "BIL_eq23",
            IdentityId::BIL_eq24 => "BIL_eq24",
            IdentityId::COR2 => "COR2",
        }
    }
}

impl fmt::Display for IdentityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for IdentityId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        IdentityId::ALL
            .into_iter()
            .find(|id| id.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidSpec(format!("unknown identity '{s}'")))
    }
}

/// One instance of an identity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IdentityCase {
    pub id: IdentityId,
    pub k: isize,
    pub n: usize,
    pub i: usize,
}

/// Identity evaluator for one sequence and one step `m`.
#[derive(Debug)]
pub struct IdentityLab {
    oracle: DetOracle,
}

impl IdentityLab {
    pub fn new(seq: &SequencePrefix, m: usize) -> Self {
        IdentityLab { oracle: DetOracle::new(seq, m) }
    }

    pub fn m(&self) -> usize {
        self.oracle.m()
    }

    pub fn oracle(&self) -> &DetOracle {
        &self.oracle
    }

    fn h(&self, s: usize, k: isize, n: usize) -> Result<Scalar> {
        self.oracle.h(s, k, n)
    }

    fn phi(&self, s: usize, k: isize, n: usize) -> Result<Scalar> {
        self.oracle.phi(s, k, n)
    }

    /// `F_κ^n = H_k(Δ^i S_n)` for `κ = (m+1)(k-1) + i`, `1 <= i <= m+1`.
    /// Defined for `κ >= -m-1`.
    pub fn f(&self, kappa: isize, n: usize) -> Result<Scalar> {
        self.check_lattice(kappa, -(self.m() as isize) - 1)?;
        let (k, i) = split_column(kappa, self.m());
        self.h(i, k, n)
    }

    /// `G_κ^n`: `H_{k+1}(S_n)` on `κ = (m+1)k`, `H_{k-1}(Δ^{m+2} S_n)` on
    /// `κ = (m+1)(k-1)+1`, `Φ_{k+1}(Δ^{i-1} S_n)` on `κ = (m+1)(k-1)+i`.
    /// Defined for `κ >= -m`.
    pub fn g(&self, kappa: isize, n: usize) -> Result<Scalar> {
        self.check_lattice(kappa, -(self.m() as isize))?;
        let m = self.m();
        let (k, i) = split_column(kappa, m);
        if i == m + 1 {
            self.h(0, k + 1, n)
        } else if i == 1 {
            self.h(m + 2, k - 1, n)
        } else {
            self.phi(i - 1, k + 1, n)
        }
    }

    fn check_lattice(&self, kappa: isize, min: isize) -> Result<()> {
        if kappa < min {
            Err(Error::InvalidSpec(format!("lattice index {kappa} is below {min}")))
        } else {
            Ok(())
        }
    }

    /// `F(a,n) G(b,n+1) - F(c,n+1) G(d,n)`.
    fn cross(&self, a: isize, b: isize, c: isize, d: isize, n: usize) -> Result<Scalar> {
        Ok(self.f(a, n)? * self.g(b, n + 1)? - self.f(c, n + 1)? * self.g(d, n)?)
    }

    /// Residual of the product relation at lattice index `ℓ >= -m`:
    ///
    /// ```text
    /// (F(ℓ+m+1,n) G(ℓ,n+1) - F(ℓ,n+1) G(ℓ+m+1,n)) Π_{j=1..m} (F(ℓ+j,n) G(ℓ+j,n+1) - F(ℓ+j,n+1) G(ℓ+j,n))
    ///     + F(ℓ+1,n) F(ℓ+m,n+1) Π_{j=1..m} F(ℓ+j+1,n) F(ℓ+j-1,n+1)
    /// ```
    pub fn bilinear19(&self, l: isize, n: usize) -> Result<Scalar> {
        let m = self.m() as isize;
        let mut lhs = self.cross(l + m + 1, l, l, l + m + 1, n)?;
        let mut rhs = self.f(l + 1, n)? * self.f(l + m, n + 1)?;
        for j in 1..=m {
            lhs = lhs * self.cross(l + j, l + j, l + j, l + j, n)?;
            rhs = rhs * self.f(l + j + 1, n)? * self.f(l + j - 1, n + 1)?;
        }
        Ok(lhs + rhs)
    }

    /// Residual `LHS - RHS` of one identity instance.
    pub fn check(&self, case: &IdentityCase) -> Result<Scalar> {
        let IdentityCase { id, k, n, i } = *case;
        let m = self.m();
        if k < id.min_k(m) {
            return Err(Error::Inadmissible(format!("{id} needs k >= {}", id.min_k(m))));
        }
        if matches!(id, IdentityId::BIL_eq23 | IdentityId::BIL_eq24) && !(2..=m + 1).contains(&i) {
            return Err(Error::Inadmissible(format!("{id} needs 2 <= i <= {}", m + 1)));
        }
        let h = |s, k, n| self.h(s, k, n);
        let phi = |s, k, n| self.phi(s, k, n);
        let big = (m + 1) as isize;
        let ii = i as isize;
        let residual = match id {
            IdentityId::L1_eq10 => {
                h(i + 1, k + 1, n)? * h(i + m, k, n + 1)?
                    - (h(i + m + 1, k, n)? * h(i, k + 1, n + 1)? - h(i + m + 1, k, n + 1)? * h(i, k + 1, n)?)
            }
            IdentityId::L2_eq11 => lemma2(&h, i, k, n)?,
            IdentityId::L3_eq12 => {
                h(i + 1, k, n)? * h(i + m, k, n + 1)?
                    - (h(i + m + 1, k, n)? * h(i, k, n + 1)? - h(i, k + 1, n)? * h(i + m + 1, k - 1, n + 1)?)
            }
            IdentityId::L3a_eq13 => lemma2(&h, i + m, k, n)?,
            IdentityId::L3b_eq14 => {
                h(i, k + 1, n)? * h(i + m, k - 1, n + 1)?
                    - (h(i, k, n)? * h(i + m, k, n + 1)? - h(i, k, n + 1)? * h(i + m, k, n)?)
            }
            IdentityId::L4_eq15 => {
                h(i, k, n + 1)? * h(i + 2, k - 1, n)?
                    - (h(i + 1, k, n)? * phi(i, k, n + 1)? - h(i + 1, k - 1, n + 1)? * phi(i, k + 1, n)?)
            }
            IdentityId::L4a_eq16 => {
                h(i + 2, k, n)? * h(i, k, n + 1)?
                    - (h(i + 1, k, n)? * phi(i, k + 1, n + 1)? - h(i + 1, k, n + 1)? * phi(i, k + 1, n)?)
            }
            IdentityId::L5_eq17 => {
                h(i + 1, k, n)? * h(i + m + 1, k - 2, n + 1)?
                    - (h(i + m + 1, k - 1, n + 1)? * h(i + 1, k - 1, n)?
                        - h(i + m + 1, k - 1, n)? * h(i + 1, k - 1, n + 1)?)
            }
            IdentityId::BIL_eq19 => self.bilinear19(k, n)?,
            IdentityId::BIL_eq21 => {
                let a = big * k + 1;
                self.cross(a, a, a, a, n)? + self.f(a + 1, n)? * self.f(big * k, n + 1)?
            }
            IdentityId::BIL_eq22 => {
                let (a, b) = (big * k + 1, big * (k - 1) + 1);
                self.cross(a, b, b, a, n)? + self.f(b + 1, n)? * self.f(big * k, n + 1)?
            }
            IdentityId::BIL_eq23 => {
                let a = big * k + ii;
                self.cross(a, a, a, a, n)? - self.f(a + 1, n)? * self.f(a - 1, n + 1)?
            }
            IdentityId::BIL_eq24 => {
                let (a, b) = (big * k + ii, big * (k - 1) + ii);
                self.cross(a, b, b, a, n)? - self.f(b + 1, n)? * self.f(a - 1, n + 1)?
            }
            IdentityId::COR2 => {
                let mi = m as isize;
                self.f(k + mi + 1, n)? * self.f(k - 1, n + 1)?
                    - (self.f(k, n)? * self.f(k + mi, n + 1)? - self.f(k + mi, n)? * self.f(k, n + 1)?)
            }
        };
        Ok(residual)
    }

    /// Residuals of `BIL_eq21..BIL_eq24` at `(k, n, i)` and of `BIL_eq19` at
    /// the lattice index `ℓ = (m+1)k + i - 1`.
    pub fn check_bilinear(&self, k: isize, n: usize, i: usize) -> Result<Vec<(IdentityId, Scalar)>> {
        let l = (self.m() as isize + 1) * k + i as isize - 1;
        [IdentityId::BIL_eq21, IdentityId::BIL_eq22, IdentityId::BIL_eq23, IdentityId::BIL_eq24]
            .into_iter()
            .map(|id| Ok((id, self.check(&IdentityCase { id, k, n, i })?)))
            .chain(std::iter::once(self.bilinear19(l, n).map(|r| (IdentityId::BIL_eq19, r))))
            .collect()
    }

    /// Residual of the G-free relation `COR2` at lattice index `ℓ`.
    pub fn check_corollary2(&self, l: isize, n: usize) -> Result<Scalar> {
        self.check(&IdentityCase { id: IdentityId::COR2, k: l, n, i: 0 })
    }
}

fn lemma2(h: &impl Fn(usize, isize, usize) -> Result<Scalar>, i: usize, k: isize, n: usize) -> Result<Scalar> {
    Ok(h(i + 1, k, n)? * h(i, k - 1, n + 1)? - (h(i + 1, k - 1, n)? * h(i, k, n + 1)? - h(i + 1, k - 1, n + 1)? * h(i, k, n)?))
}

/// Free-function form of [`IdentityLab::check`].
pub fn check_identity(seq: &SequencePrefix, m: usize, case: &IdentityCase) -> Result<Scalar> {
    IdentityLab::new(seq, m).check(case)
}

/// Free-function form of [`IdentityLab::check_bilinear`].
pub fn check_bilinear(seq: &SequencePrefix, m: usize, k: isize, n: usize, i: usize) -> Result<Vec<(IdentityId, Scalar)>> {
    IdentityLab::new(seq, m).check_bilinear(k, n, i)
}

/// Free-function form of [`IdentityLab::check_corollary2`].
pub fn check_corollary2(seq: &SequencePrefix, m: usize, l: isize, n: usize) -> Result<Scalar> {
    IdentityLab::new(seq, m).check_corollary2(l, n)
}

/// `|M| |A| - (|NW| |SE| - |NE| |SW|)` for the bordered splitting of a
/// square matrix `M` around its interior block `A`; the corner blocks drop
/// the last or first row and column.
pub fn check_sylvester(matrix: &[Vec<Scalar>]) -> Result<Scalar> {
    let d = matrix.len();
    if d < 3 {
        return Err(Error::DimensionTooSmall(d));
    }
    let block = |rows: std::ops::Range<usize>, cols: std::ops::Range<usize>| -> Vec<Vec<Scalar>> {
        matrix[rows].iter().map(|row| row[cols.clone()].to_vec()).collect()
    };
    let full = determinant(matrix);
    let inner = determinant(&block(1..d - 1, 1..d - 1));
    let nw = determinant(&block(0..d - 1, 0..d - 1));
    let se = determinant(&block(1..d, 1..d));
    let ne = determinant(&block(0..d - 1, 1..d));
    let sw = determinant(&block(1..d, 0..d - 1));
    Ok(full * inner - (nw * se - ne * sw))
}

/// Outcome of a sweep for one identity.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct IdentityTally {
    pub cases: usize,
    pub nonzero: usize,
    /// Largest `|residual|` seen, as `f64`.
    pub max_abs_residual: f64,
}

/// Per-identity results of [`sweep`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepSummary {
    pub tallies: BTreeMap<IdentityId, IdentityTally>,
}

impl SweepSummary {
    pub fn all_zero(&self) -> bool {
        self.tallies.values().all(|t| t.nonzero == 0)
    }

    pub fn total_cases(&self) -> usize {
        self.tallies.values().map(|t| t.cases).sum()
    }

    fn record(&mut self, id: IdentityId, residual: &Scalar) {
        let t = self.tallies.entry(id).or_default();
        t.cases += 1;
        if !residual.is_zero() {
            t.nonzero += 1;
            t.max_abs_residual = t.max_abs_residual.max(residual.abs().to_f64());
        }
    }

    pub fn merge(&mut self, other: &SweepSummary) {
        for (id, t) in &other.tallies {
            let mine = self.tallies.entry(*id).or_default();
            mine.cases += t.cases;
            mine.nonzero += t.nonzero;
            mine.max_abs_residual = mine.max_abs_residual.max(t.max_abs_residual);
        }
    }
}

/// Evaluate every identity at every admissible `(k, n, i)` that fits in
/// the prefix. Instances needing terms beyond the prefix are skipped.
pub fn sweep(seq: &SequencePrefix, m: usize) -> SweepSummary {
    let lab = IdentityLab::new(seq, m);
    let mut summary = SweepSummary::default();
    let last = seq.last_index().max(0) as usize;
    for id in IdentityId::ALL {
        summary.tallies.entry(id).or_default();
        for i in id.shifts(m, last) {
            let mut k = id.min_k(m);
            loop {
                let mut any = false;
                for n in 0..=last {
                    match lab.check(&IdentityCase { id, k, n, i }) {
                        Ok(r) => {
                            any = true;
                            summary.record(id, &r);
                        }
                        Err(Error::IndexOutOfRange { .. }) => break,
                        Err(e) => panic!("unexpected error in sweep of {id}: {e}"),
                    }
                }
                if !any {
                    break;
                }
                k += 1;
            }
        }
    }
    summary
}
