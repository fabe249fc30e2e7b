//! Transformations defined by determinant ratios: the Shanks transformation
//! `e_k`, its multistep generalisation `e_{k,m}`, every entry of the
//! multistep ε-array, and an independent linear-system realisation.
//!
//! With `m` the step, `e_{k,m}(S_n) = H_{k+1}(S_n) / H_k(Δ^{m+1} S_n)` and it
//! reads the terms `S_n ..= S_{n+(m+1)k}`. For `m = 1` it is the classic
//! `e_k(S_n) = 𝓗_{k+1}(S_n) / 𝓗_k(Δ² S_n)`.

use crate::determinant::{DetFamily, DetOracle, DetSpec};
use crate::error::{Error, Result};
use crate::numerics::{Mode, Scalar, SequencePrefix, ZeroPolicy};

fn check_terms(seq: &SequencePrefix, last: usize) -> Result<()> {
    if last as isize > seq.last_index() {
        Err(Error::IndexOutOfRange { needed: last, last: seq.last_index() })
    } else {
        Ok(())
    }
}

/// Product of the largest absolute entry of each row: a Hadamard-style
/// bound used as the scale for near-zero determinant tests.
fn det_scale(rows: &[Vec<Scalar>]) -> Scalar {
    rows.iter()
        .map(|row| row.iter().fold(Scalar::zero(), |acc, x| Scalar::max_abs(&acc, x)))
        .product()
}

fn ratio(
    oracle: &DetOracle,
    policy: &ZeroPolicy,
    num: Scalar,
    den: Scalar,
    den_rows: impl FnOnce() -> Result<Vec<Vec<Scalar>>>,
    kappa: isize,
    n: usize,
) -> Result<Scalar> {
    let breakdown = Error::Breakdown { k: kappa, n };
    if den.is_zero() {
        return Err(breakdown);
    }
    if !oracle.mode().is_rational() && policy.is_effectively_zero(&den, &det_scale(&den_rows()?)) {
        return Err(breakdown);
    }
    Ok(&num / &den)
}

/// `e_k(S_n)`. Needs `n + 2k <= N`.
pub fn shanks(seq: &SequencePrefix, k: usize, n: usize) -> Result<Scalar> {
    let oracle = DetOracle::new(seq, 1);
    shanks_with(&oracle, &ZeroPolicy::for_mode(seq.mode()), k, n)
}

pub fn shanks_with(oracle: &DetOracle, policy: &ZeroPolicy, k: usize, n: usize) -> Result<Scalar> {
    check_terms(oracle.sequence(), n + 2 * k)?;
    let k = k as isize;
    let num = oracle.hankel(0, k + 1, n)?;
    let den = oracle.hankel(2, k, n)?;
    let spec = DetSpec { family: DetFamily::ClassicHankel, k, n, shift: 2 };
    ratio(oracle, policy, num, den, || oracle.matrix(spec), 2 * k, n)
}

/// `e_{k,m}(S_n)`. Needs `n + (m+1)k <= N`.
pub fn multistep_shanks(seq: &SequencePrefix, m: usize, k: usize, n: usize) -> Result<Scalar> {
    let oracle = DetOracle::new(seq, m);
    multistep_shanks_with(&oracle, &ZeroPolicy::for_mode(seq.mode()), k, n)
}

pub fn multistep_shanks_with(oracle: &DetOracle, policy: &ZeroPolicy, k: usize, n: usize) -> Result<Scalar> {
    epsilon_entry_det_with(oracle, policy, ((oracle.m() + 1) * k) as isize, n)
}

/// Split a column index `κ >= -m` as `κ = (m+1)(k-1) + i` with
/// `i` in `1..=m+1`.
pub(crate) fn split_column(kappa: isize, m: usize) -> (isize, usize) {
    let p = (m + 1) as isize;
    let i = (kappa - 1).rem_euclid(p) + 1;
    let k = (kappa - i) / p + 1;
    (k, i as usize)
}

/// The multistep ε entry `ε_κ^{(n)}` as a determinant ratio:
///
/// * `κ = (m+1)k`: `H_{k+1}(S_n) / H_k(Δ^{m+1} S_n)`
/// * `κ = (m+1)(k-1) + 1`: `H_{k-1}(Δ^{m+2} S_n) / H_k(Δ S_n)`
/// * `κ = (m+1)(k-1) + i`, `2 <= i <= m`: `Φ_{k+1}(Δ^{i-1} S_n) / H_k(Δ^i S_n)`
///
/// Negative columns down to `κ = -m` are accepted and give the
/// initialization values `0, n, ..., n`. Needs `n + κ <= N`.
pub fn epsilon_entry_det(seq: &SequencePrefix, m: usize, kappa: isize, n: usize) -> Result<Scalar> {
    let oracle = DetOracle::new(seq, m);
    epsilon_entry_det_with(&oracle, &ZeroPolicy::for_mode(seq.mode()), kappa, n)
}

pub fn epsilon_entry_det_with(oracle: &DetOracle, policy: &ZeroPolicy, kappa: isize, n: usize) -> Result<Scalar> {
    let m = oracle.m();
    if kappa < -(m as isize) {
        return Err(Error::InvalidSpec(format!("column {kappa} is left of the table edge -{m}")));
    }
    if kappa == 0 {
        return Ok(oracle.sequence().term(n)?.clone());
    }
    check_terms(oracle.sequence(), (n as isize + kappa.max(0)) as usize)?;
    let (k, i) = split_column(kappa, m);
    let h = |shift: usize, k: isize| DetSpec { family: DetFamily::ExtendedH, k, n, shift };
    let (num, den) = if i == m + 1 {
        (h(0, k + 1), h(m + 1, k))
    } else if i == 1 {
        (h(m + 2, k - 1), h(1, k))
    } else {
        (DetSpec { family: DetFamily::Phi, k: k + 1, n, shift: i - 1 }, h(i, k))
    };
    ratio(oracle, policy, oracle.eval(num)?, oracle.eval(den)?, || oracle.matrix(den), kappa, n)
}

/// `e_{k,m}(S_n)` as the constant `c` of the linear system
/// `S_{n+j} = c + Σ_{i=1..k} a_i Δ^{im} S_{n+j}`, `j = 0..=k`, solved by
/// Gaussian elimination. A singular system is reported as
/// [`Error::SingularSystem`].
pub fn multistep_shanks_linear(seq: &SequencePrefix, m: usize, k: usize, n: usize) -> Result<Scalar> {
    let oracle = DetOracle::new(seq, m);
    multistep_shanks_linear_with(&oracle, &ZeroPolicy::for_mode(seq.mode()), k, n)
}

pub fn multistep_shanks_linear_with(oracle: &DetOracle, policy: &ZeroPolicy, k: usize, n: usize) -> Result<Scalar> {
    let m = oracle.m();
    check_terms(oracle.sequence(), n + (m + 1) * k)?;
    let mode = oracle.mode();
    let mut rows = Vec::with_capacity(k + 1);
    let mut rhs = Vec::with_capacity(k + 1);
    for j in 0..=k {
        let mut row = vec![mode.int(1)];
        for i in 1..=k {
            row.push(oracle.diff(i * m, n + j)?.clone());
        }
        rows.push(row);
        rhs.push(oracle.diff(0, n + j)?.clone());
    }
    let solution = solve(rows, rhs, mode, policy).ok_or(Error::SingularSystem { k, n })?;
    Ok(solution[0].clone())
}

/// Gauss-Jordan elimination with partial pivoting (largest magnitude in
/// float mode, first nonzero in rational mode).
fn solve(mut a: Vec<Vec<Scalar>>, mut b: Vec<Scalar>, mode: Mode, policy: &ZeroPolicy) -> Option<Vec<Scalar>> {
    let n = a.len();
    for col in 0..n {
        let pivot = if mode.is_rational() {
            (col..n).find(|&r| !a[r][col].is_zero())?
        } else {
            (col..n).max_by(|&x, &y| a[x][col].abs().partial_cmp(&a[y][col].abs()).expect("ordered"))?
        };
        let scale = a.iter().flat_map(|row| row.iter()).fold(Scalar::zero(), |acc, x| Scalar::max_abs(&acc, x));
        if a[pivot][col].is_zero() || policy.is_effectively_zero(&a[pivot][col], &scale) {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        let (pivot_row, pivot_b) = (a[col].clone(), b[col].clone());
        for (r, (row, rhs)) in a.iter_mut().zip(b.iter_mut()).enumerate() {
            if r == col || row[col].is_zero() {
                continue;
            }
            let factor = &row[col] / &pivot_row[col];
            for (x, p) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                *x = &*x - &(&factor * p);
            }
            *rhs = &*rhs - &(&factor * &pivot_b);
        }
    }
    Some((0..n).map(|i| &b[i] / &a[i][i]).collect())
}

/// Whether `e_{k,m}(a S + b) = a e_{k,m}(S) + b` at `(k, n)`: exactly in
/// rational mode, up to the mode's zero policy in float mode.
pub fn quasilinearity_check(
    seq: &SequencePrefix,
    m: usize,
    k: usize,
    n: usize,
    a: &Scalar,
    b: &Scalar,
) -> Result<bool> {
    if a.is_zero() {
        return Err(Error::InvalidSpec("quasilinearity needs a != 0".into()));
    }
    let transformed = multistep_shanks(&seq.affine(a, b), m, k, n)?;
    let expected = a * &multistep_shanks(seq, m, k, n)? + b;
    let diff = &transformed - &expected;
    if seq.mode().is_rational() && a.is_rational() && b.is_rational() {
        return Ok(diff.is_zero());
    }
    let policy = ZeroPolicy::for_mode(transformed.mode());
    Ok(policy.is_effectively_zero(&diff, &Scalar::max_abs(&transformed, &expected)))
}
