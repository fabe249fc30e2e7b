//! Exact determinants and the three determinant families built on a
//! sequence: the classic Hankel determinant `𝓗_k`, the extended `H_k`
//! and `Φ_k` that depend on the step `m`.
//!
//! Conventions: `𝓗_0 = H_0 = Φ_0 = 1` and `H_{-1} = Φ_{-1} = 0`.
//!
//! Rational determinants use fraction-free (Bareiss) elimination on an
//! integer matrix obtained by clearing each row's denominators; float
//! determinants use partially pivoted Gaussian elimination.

use std::collections::HashMap;
use std::sync::Mutex;

use dashu_base::Gcd;
use dashu_int::{IBig, UBig};
use dashu_ratio::RBig;

use crate::error::{Error, Result};
use crate::numerics::{DifferenceTable, Mode, Scalar, SequencePrefix};

fn mode_of(matrix: &[Vec<Scalar>]) -> Mode {
    matrix
        .iter()
        .flatten()
        .filter_map(|x| match x.mode() {
            Mode::Float { precision_bits } => Some(precision_bits),
            Mode::Rational => None,
        })
        .max()
        .map_or(Mode::Rational, |precision_bits| Mode::Float { precision_bits })
}

fn check_square(matrix: &[Vec<Scalar>]) {
    let n = matrix.len();
    assert!(matrix.iter().all(|row| row.len() == n), "matrix must be square");
}

/// Determinant of a square matrix. The empty matrix has determinant 1.
///
/// # Panics
/// If the rows do not all have the matrix's length.
pub fn determinant(matrix: &[Vec<Scalar>]) -> Scalar {
    check_square(matrix);
    if matrix.is_empty() {
        return Scalar::one();
    }
    match mode_of(matrix) {
        Mode::Rational => rational_determinant(matrix),
        mode => float_determinant(matrix, mode),
    }
}

fn lcm(a: &UBig, b: &UBig) -> UBig {
    let g = a.gcd(b);
    a / g * b
}

fn rational_determinant(matrix: &[Vec<Scalar>]) -> Scalar {
    let mut multiplier = UBig::ONE;
    let rows: Vec<Vec<IBig>> = matrix
        .iter()
        .map(|row| {
            let rats: Vec<&RBig> = row.iter().map(|x| x.as_rational().expect("rational entry")).collect();
            let den = rats.iter().fold(UBig::ONE, |acc, r| lcm(&acc, r.denominator()));
            multiplier = &multiplier * &den;
            rats.iter()
                .map(|r| r.numerator() * IBig::from(&den / r.denominator()))
                .collect()
        })
        .collect();
    Scalar::from(RBig::from(bareiss(rows)) / RBig::from(multiplier))
}

/// Fraction-free elimination. Every division is exact.
fn bareiss(mut a: Vec<Vec<IBig>>) -> IBig {
    let n = a.len();
    let mut negate = false;
    let mut prev = IBig::ONE;
    for k in 0..n.saturating_sub(1) {
        if a[k][k] == IBig::ZERO {
            match (k + 1..n).find(|&r| a[r][k] != IBig::ZERO) {
                Some(r) => {
                    a.swap(k, r);
                    negate = !negate;
                }
                None => return IBig::ZERO,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    let det = a[n - 1][n - 1].clone();
    if negate {
        -det
    } else {
        det
    }
}

fn float_determinant(matrix: &[Vec<Scalar>], mode: Mode) -> Scalar {
    let mut a: Vec<Vec<Scalar>> = matrix.iter().map(|row| row.iter().map(|x| x.to_mode(mode)).collect()).collect();
    let n = a.len();
    let mut det = Scalar::one().to_mode(mode);
    for k in 0..n {
        let pivot = (k..n)
            .max_by(|&i, &j| a[i][k].abs().partial_cmp(&a[j][k].abs()).expect("ordered"))
            .expect("nonempty");
        if a[pivot][k].is_zero() {
            return Scalar::zero().to_mode(mode);
        }
        if pivot != k {
            a.swap(pivot, k);
            det = -det;
        }
        det = &det * &a[k][k];
        let (top, bottom) = a.split_at_mut(k + 1);
        let pivot_row = &top[k];
        for row in bottom {
            let factor = &row[k] / &pivot_row[k];
            for (x, p) in row[k + 1..].iter_mut().zip(&pivot_row[k + 1..]) {
                *x = &*x - &(&factor * p);
            }
        }
    }
    det
}

/// Determinant by cofactor expansion along the first row. Exponential
/// cost; kept as an independent check for small matrices.
pub fn cofactor_det(matrix: &[Vec<Scalar>]) -> Scalar {
    check_square(matrix);
    let n = matrix.len();
    match n {
        0 => Scalar::one(),
        1 => matrix[0][0].clone(),
        _ => {
            let mut acc = Scalar::zero();
            for c in 0..n {
                let minor: Vec<Vec<Scalar>> = matrix[1..]
                    .iter()
                    .map(|row| row.iter().enumerate().filter(|&(j, _)| j != c).map(|(_, x)| x.clone()).collect())
                    .collect();
                let term = &matrix[0][c] * &cofactor_det(&minor);
                acc = if c % 2 == 0 { acc + term } else { acc - term };
            }
            acc
        }
    }
}

/// The three determinant families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DetFamily {
    ClassicHankel,
    ExtendedH,
    Phi,
}

/// A determinant request against a [`DetOracle`]: the family evaluated on
/// the shifted sequence `u = Δ^shift S` at index `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DetSpec {
    pub family: DetFamily,
    pub k: isize,
    pub n: usize,
    pub shift: usize,
}

/// Memoising evaluator of `𝓗_k(Δ^s S_n)`, `H_k(Δ^s S_n)` and `Φ_k(Δ^s S_n)`
/// for one sequence `S` and one step `m`.
///
/// The differences of `S` are computed once; determinant values are cached
/// behind a mutex, so an oracle can be shared between threads.
#[derive(Debug)]
pub struct DetOracle {
    seq: SequencePrefix,
    m: usize,
    diffs: DifferenceTable,
    cache: Mutex<HashMap<DetSpec, Scalar>>,
}

impl DetOracle {
    /// # Panics
    /// If `m` is zero.
    pub fn new(seq: &SequencePrefix, m: usize) -> Self {
        assert!(m >= 1, "step m must be at least 1");
        DetOracle { seq: seq.clone(), m, diffs: DifferenceTable::new(seq), cache: Mutex::new(HashMap::new()) }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn sequence(&self) -> &SequencePrefix {
        &self.seq
    }

    pub fn mode(&self) -> Mode {
        self.seq.mode()
    }

    /// `Δ^order S_start`.
    pub fn diff(&self, order: usize, start: usize) -> Result<&Scalar> {
        self.diffs.get(order, start)
    }

    fn out_of_range(&self, needed: usize) -> Error {
        Error::IndexOutOfRange { needed, last: self.seq.last_index() }
    }

    fn require(&self, needed: usize) -> Result<()> {
        if needed as isize > self.seq.last_index() {
            Err(self.out_of_range(needed))
        } else {
            Ok(())
        }
    }

    fn constant(&self, v: i64) -> Scalar {
        self.mode().int(v)
    }

    /// Evaluate a request, consulting the cache first.
    pub fn eval(&self, spec: DetSpec) -> Result<Scalar> {
        if spec.k < 0 {
            return match spec.family {
                DetFamily::ClassicHankel => {
                    Err(Error::InvalidSpec("the classic Hankel determinant is defined for k >= 0".into()))
                }
                _ if spec.k == -1 => Ok(self.constant(0)),
                _ => Err(Error::InvalidSpec(format!("determinant order {} is below -1", spec.k))),
            };
        }
        if spec.k == 0 {
            return Ok(self.constant(1));
        }
        if let Some(v) = self.cache.lock().expect("cache lock").get(&spec) {
            return Ok(v.clone());
        }
        let value = determinant(&self.matrix(spec)?);
        self.cache.lock().expect("cache lock").insert(spec, value.clone());
        Ok(value)
    }

    /// The matrix behind a request with `k >= 1`.
    pub fn matrix(&self, spec: DetSpec) -> Result<Vec<Vec<Scalar>>> {
        let DetSpec { family, k, n, shift } = spec;
        if k < 1 {
            return Ok(Vec::new());
        }
        let k = k as usize;
        let m = self.m;
        match family {
            DetFamily::ClassicHankel => {
                self.require(shift + n + 2 * k - 2)?;
                (0..k)
                    .map(|i| (0..k).map(|j| self.diff(shift, n + i + j).cloned()).collect())
                    .collect()
            }
            DetFamily::ExtendedH => {
                self.require(shift + (k - 1) * m + n + k - 1)?;
                (0..k)
                    .map(|r| (0..k).map(|c| self.diff(shift + r * m, n + c).cloned()).collect())
                    .collect()
            }
            DetFamily::Phi => {
                if k >= 2 {
                    self.require(shift + (k - 2) * m + n + k - 1)?;
                }
                let mut rows = vec![(0..k).map(|c| self.constant((n + c) as i64)).collect::<Vec<_>>()];
                for r in 0..k - 1 {
                    rows.push((0..k).map(|c| self.diff(shift + r * m, n + c).cloned()).collect::<Result<_>>()?);
                }
                Ok(rows)
            }
        }
    }

    /// `𝓗_k(Δ^shift S_n)`.
    pub fn hankel(&self, shift: usize, k: isize, n: usize) -> Result<Scalar> {
        self.eval(DetSpec { family: DetFamily::ClassicHankel, k, n, shift })
    }

    /// `H_k(Δ^shift S_n)`.
    pub fn h(&self, shift: usize, k: isize, n: usize) -> Result<Scalar> {
        self.eval(DetSpec { family: DetFamily::ExtendedH, k, n, shift })
    }

    /// `Φ_k(Δ^shift S_n)`.
    pub fn phi(&self, shift: usize, k: isize, n: usize) -> Result<Scalar> {
        self.eval(DetSpec { family: DetFamily::Phi, k, n, shift })
    }
}

/// `𝓗_k(u_n)`: the `k×k` determinant with entry `(i, j) = u_{n+i+j}`.
pub fn hankel(u: &SequencePrefix, n: usize, k: usize) -> Result<Scalar> {
    DetOracle::new(u, 1).hankel(0, k as isize, n)
}

/// `H_k(u_n)`: row `r` is `(Δ^{rm} u_n, ..., Δ^{rm} u_{n+k-1})`.
pub fn extended_h(u: &SequencePrefix, n: usize, k: isize, m: usize) -> Result<Scalar> {
    DetOracle::new(u, m).h(0, k, n)
}

/// `Φ_k(u_n)`: first row `(n, ..., n+k-1)`, then rows `Δ^{rm} u` for
/// `r = 0..k-2`.
pub fn phi(u: &SequencePrefix, n: usize, k: isize, m: usize) -> Result<Scalar> {
    DetOracle::new(u, m).phi(0, k, n)
}

/// The three equal ways of writing `𝓗_k(u_n)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HankelForm {
    /// Entry `(i, j) = u_{n+i+j}`.
    Plain,
    /// Entry `(i, j) = Δ^i u_{n+j}`.
    RowDifferences,
    /// Entry `(i, j) = Δ^{i+j} u_n`.
    FullDifferences,
}

/// `𝓗_k(u_n)` evaluated from the matrix of the given form.
pub fn hankel_form(u: &SequencePrefix, n: usize, k: usize, form: HankelForm) -> Result<Scalar> {
    if k == 0 {
        return Ok(Scalar::one().to_mode(u.mode()));
    }
    let last = n + 2 * k - 2;
    if last as isize > u.last_index() {
        return Err(Error::IndexOutOfRange { needed: last, last: u.last_index() });
    }
    let d = DifferenceTable::new(u);
    let matrix: Vec<Vec<Scalar>> = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| {
                    let (order, start) = match form {
                        HankelForm::Plain => (0, n + i + j),
                        HankelForm::RowDifferences => (i, n + j),
                        HankelForm::FullDifferences => (i + j, n),
                    };
                    d.get(order, start).cloned()
                })
                .collect::<Result<_>>()
        })
        .collect::<Result<_>>()?;
    Ok(determinant(&matrix))
}
