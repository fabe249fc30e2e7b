//! Scalar arithmetic, sequence prefixes, forward differences and the
//! near-zero policy used for breakdown detection.
//!
//! Every computation in the crate runs on [`Scalar`], which is either an
//! exact rational (always in lowest terms) or a binary floating-point value
//! with a configurable number of significand bits. Exact mode turns every
//! algebraic identity into an equality test; float mode is what one would
//! use on real data.
//!
//! Mixing the two modes in one operation is allowed: the rational operand
//! is rounded to the precision of the float operand. This is how integer
//! constants such as table indices enter a float computation.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use dashu_base::{Abs, BitTest, Sign};
use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;
use dashu_int::{IBig, UBig};
use dashu_ratio::RBig;

use crate::error::{Error, Result};

/// Binary floating-point value with round-half-to-even.
pub type Float = FBig<HalfEven, 2>;

/// Arithmetic mode of a computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Rational,
    Float { precision_bits: usize },
}

impl Mode {
    /// Smallest accepted float precision (IEEE double).
    pub const MIN_FLOAT_BITS: usize = 53;

    pub fn float(precision_bits: usize) -> Result<Mode> {
        if precision_bits < Self::MIN_FLOAT_BITS {
            return Err(Error::InvalidSpec(format!(
                "float precision must be at least {} bits, got {precision_bits}",
                Self::MIN_FLOAT_BITS
            )));
        }
        Ok(Mode::Float { precision_bits })
    }

    pub fn is_rational(self) -> bool {
        matches!(self, Mode::Rational)
    }

    /// The integer `v` as a scalar of this mode.
    pub fn int(self, v: i64) -> Scalar {
        Scalar::from(v).to_mode(self)
    }

    /// Number of significant decimal digits needed to print a value of
    /// this mode so that parsing it back recovers the same bits.
    pub(crate) fn decimal_digits(self) -> usize {
        match self {
            Mode::Rational => 0,
            // ceil(bits * log10(2)) + 1
            Mode::Float { precision_bits } => (precision_bits as f64 * std::f64::consts::LOG10_2).ceil() as usize + 1,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Rational => f.write_str("rational"),
            Mode::Float { precision_bits } => write!(f, "float@{precision_bits}"),
        }
    }
}

/// A number in one of the two arithmetic modes.
#[derive(Clone, Debug)]
pub enum Scalar {
    Rational(RBig),
    Float(Float),
}

fn rational_to_float(r: &RBig, precision: usize) -> Float {
    r.to_float::<HalfEven, 2>(precision).value()
}

fn float_to_rational(x: &Float) -> RBig {
    let repr = x.repr();
    let significand = RBig::from(repr.significand().clone());
    let exponent = repr.exponent();
    let power = RBig::from(UBig::ONE << exponent.unsigned_abs());
    if exponent >= 0 {
        significand * power
    } else {
        significand / power
    }
}

impl Scalar {
    pub fn zero() -> Scalar {
        Scalar::Rational(RBig::ZERO)
    }

    pub fn one() -> Scalar {
        Scalar::Rational(RBig::ONE)
    }

    /// The exact rational `num/den`.
    ///
    /// # Panics
    /// If `den` is zero.
    pub fn ratio(num: i64, den: i64) -> Scalar {
        assert!(den != 0, "zero denominator");
        Scalar::Rational(RBig::from(num) / RBig::from(den))
    }

    /// Round `value` to a float of the given precision.
    pub fn float(value: f64, precision_bits: usize) -> Scalar {
        let x = Float::try_from(value).expect("finite f64");
        Scalar::Float(x.with_precision(precision_bits).value())
    }

    pub fn mode(&self) -> Mode {
        match self {
            Scalar::Rational(_) => Mode::Rational,
            Scalar::Float(x) => Mode::Float { precision_bits: x.precision() },
        }
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, Scalar::Rational(_))
    }

    pub fn as_rational(&self) -> Option<&RBig> {
        match self {
            Scalar::Rational(r) => Some(r),
            Scalar::Float(_) => None,
        }
    }

    /// Exact zero test, in either mode.
    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rational(r) => r.is_zero(),
            Scalar::Float(x) => x.repr().significand().is_zero(),
        }
    }

    pub fn abs(&self) -> Scalar {
        match self {
            Scalar::Rational(r) => Scalar::Rational(r.clone().abs()),
            Scalar::Float(x) => Scalar::Float(x.clone().abs()),
        }
    }

    pub fn signum(&self) -> i32 {
        if self.is_zero() {
            return 0;
        }
        let sign = match self {
            Scalar::Rational(r) => r.sign(),
            Scalar::Float(x) => x.sign(),
        };
        match sign {
            Sign::Positive => 1,
            Sign::Negative => -1,
        }
    }

    /// `1/self`, or `None` for an exact zero.
    pub fn recip(&self) -> Option<Scalar> {
        Scalar::one().checked_div(self)
    }

    /// `self/rhs`, or `None` when `rhs` is exactly zero.
    pub fn checked_div(&self, rhs: &Scalar) -> Option<Scalar> {
        if rhs.is_zero() {
            None
        } else {
            Some(self / rhs)
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Rational(r) => r.to_f64().value(),
            Scalar::Float(x) => x.to_f64().value(),
        }
    }

    /// Convert to `mode`. Rational to float rounds; float to rational is
    /// exact (every binary float is a dyadic rational).
    pub fn to_mode(&self, mode: Mode) -> Scalar {
        match (self, mode) {
            (Scalar::Rational(_), Mode::Rational) => self.clone(),
            (Scalar::Rational(r), Mode::Float { precision_bits }) => {
                Scalar::Float(rational_to_float(r, precision_bits))
            }
            (Scalar::Float(x), Mode::Rational) => Scalar::Rational(float_to_rational(x)),
            (Scalar::Float(x), Mode::Float { precision_bits }) => {
                if x.precision() == precision_bits {
                    self.clone()
                } else {
                    Scalar::Float(x.clone().with_precision(precision_bits).value())
                }
            }
        }
    }

    /// The larger of `|a|` and `|b|`.
    pub fn max_abs(a: &Scalar, b: &Scalar) -> Scalar {
        let (a, b) = (a.abs(), b.abs());
        if a >= b {
            a
        } else {
            b
        }
    }

    /// Parse an exact rational: an optionally signed integer or `p/q`.
    pub fn parse_rational(text: &str) -> Option<Scalar> {
        let t = text.trim();
        let body = t.strip_prefix(['-', '+']).unwrap_or(t);
        let valid = !body.is_empty()
            && body.split('/').count() <= 2
            && body.split('/').all(|part| !part.is_empty() && part.bytes().all(|b| b.is_ascii_digit()));
        if !valid {
            return None;
        }
        let r = RBig::from_str(t.strip_prefix('+').unwrap_or(t)).ok()?;
        Some(Scalar::Rational(r))
    }

    /// Parse a decimal float literal (`0.5`, `-1.25e-3`, `7`) rounded to
    /// `precision_bits`.
    pub fn parse_float(text: &str, precision_bits: usize) -> Option<Scalar> {
        let t = text.trim();
        let t = t.strip_prefix('+').unwrap_or(t);
        if t.is_empty() || !t.bytes().all(|b| b.is_ascii_digit() || matches!(b, b'.' | b'-' | b'e' | b'E' | b'+')) {
            return None;
        }
        let decimal = FBig::<HalfEven, 10>::from_str(t).ok()?;
        let x: Float = decimal.with_base_and_precision::<2>(precision_bits).value();
        Some(Scalar::Float(x))
    }

    /// Parse a value for a computation in `mode`. In rational mode only
    /// exact rationals are accepted; in float mode both forms are.
    pub fn parse_in(text: &str, mode: Mode) -> Result<Scalar, String> {
        match mode {
            Mode::Rational => Scalar::parse_rational(text)
                .ok_or_else(|| format!("'{}' is not an exact rational (expected p or p/q)", text.trim())),
            Mode::Float { precision_bits } => Scalar::parse_rational(text)
                .map(|s| s.to_mode(mode))
                .or_else(|| Scalar::parse_float(text, precision_bits))
                .ok_or_else(|| format!("'{}' is not a number", text.trim())),
        }
    }
}

impl Default for Scalar {
    fn default() -> Self {
        Scalar::zero()
    }
}

impl From<i64> for Scalar {
    fn from(v: i64) -> Self {
        Scalar::Rational(RBig::from(v))
    }
}

impl From<i32> for Scalar {
    fn from(v: i32) -> Self {
        Scalar::from(v as i64)
    }
}

impl From<usize> for Scalar {
    fn from(v: usize) -> Self {
        Scalar::Rational(RBig::from(v))
    }
}

impl From<RBig> for Scalar {
    fn from(r: RBig) -> Self {
        Scalar::Rational(r)
    }
}

impl From<IBig> for Scalar {
    fn from(v: IBig) -> Self {
        Scalar::Rational(RBig::from(v))
    }
}

impl From<Float> for Scalar {
    fn from(x: Float) -> Self {
        Scalar::Float(x)
    }
}

impl fmt::Display for Scalar {
    /// Rationals print as `p` or `p/q`; floats print in decimal with enough
    /// digits to round-trip through [`Scalar::parse_float`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rational(r) => write!(f, "{r}"),
            Scalar::Float(x) => {
                let digits = self.mode().decimal_digits();
                let decimal = x.clone().with_base_and_precision::<10>(digits).value();
                write!(f, "{decimal}")
            }
        }
    }
}

/// Re-round a float whose significand came back wider than its precision
/// (dashu can return such values from `+`/`-` on operands of very
/// different magnitude).
fn normalized(x: Float) -> Float {
    let p = x.precision();
    if p == 0 || x.repr().significand().bit_len() <= p {
        return x;
    }
    let repr = x.repr();
    Float::from_parts(repr.significand().clone(), repr.exponent()).with_precision(p).value()
}

fn binary_op(
    a: &Scalar,
    b: &Scalar,
    rational: impl Fn(&RBig, &RBig) -> RBig,
    float: impl Fn(&Float, &Float) -> Float,
) -> Scalar {
    match (a, b) {
        (Scalar::Rational(x), Scalar::Rational(y)) => Scalar::Rational(rational(x, y)),
        (Scalar::Float(x), Scalar::Float(y)) => Scalar::Float(normalized(float(x, y))),
        (Scalar::Rational(x), Scalar::Float(y)) => {
            Scalar::Float(normalized(float(&rational_to_float(x, y.precision()), y)))
        }
        (Scalar::Float(x), Scalar::Rational(y)) => {
            Scalar::Float(normalized(float(x, &rational_to_float(y, x.precision()))))
        }
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl<'a> $trait<&'a Scalar> for &'a Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &'a Scalar) -> Scalar {
                binary_op(self, rhs, |x, y| x $op y, |x, y| x $op y)
            }
        }
        impl $trait<Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                (&self).$method(&rhs)
            }
        }
        impl<'a> $trait<&'a Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &'a Scalar) -> Scalar {
                (&self).$method(rhs)
            }
        }
        impl<'a> $trait<Scalar> for &'a Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                self.$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, +);
forward_binop!(Sub, sub, -);
forward_binop!(Mul, mul, *);

impl<'a> Div<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    /// # Panics
    /// On an exact zero divisor; use [`Scalar::checked_div`] when the
    /// divisor may vanish.
    fn div(self, rhs: &'a Scalar) -> Scalar {
        assert!(!rhs.is_zero(), "division by zero");
        binary_op(self, rhs, |x, y| x / y, |x, y| x / y)
    }
}

impl Div<Scalar> for Scalar {
    type Output = Scalar;
    fn div(self, rhs: Scalar) -> Scalar {
        &self / &rhs
    }
}

impl<'a> Div<&'a Scalar> for Scalar {
    type Output = Scalar;
    fn div(self, rhs: &'a Scalar) -> Scalar {
        &self / rhs
    }
}

impl Div<Scalar> for &Scalar {
    type Output = Scalar;
    fn div(self, rhs: Scalar) -> Scalar {
        self / &rhs
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Rational(r) => Scalar::Rational(-r),
            Scalar::Float(x) => Scalar::Float(-x),
        }
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -self.clone()
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        self.partial_cmp(other) == Some(Ordering::Equal)
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Scalar::Rational(x), Scalar::Rational(y)) => x.partial_cmp(y),
            (Scalar::Float(x), Scalar::Float(y)) => x.partial_cmp(y),
            // compare exactly: floats are dyadic rationals
            (Scalar::Rational(x), Scalar::Float(y)) => x.partial_cmp(&float_to_rational(y)),
            (Scalar::Float(x), Scalar::Rational(y)) => float_to_rational(x).partial_cmp(y),
        }
    }
}

impl std::iter::Sum for Scalar {
    fn sum<I: Iterator<Item = Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::zero(), |acc, x| acc + x)
    }
}

impl std::iter::Product for Scalar {
    fn product<I: Iterator<Item = Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::one(), |acc, x| acc * x)
    }
}

/// Binomial coefficient `C(n, k)`.
pub(crate) fn binomial(n: usize, k: usize) -> UBig {
    if k > n {
        return UBig::ZERO;
    }
    let k = k.min(n - k);
    let mut c = UBig::ONE;
    for j in 0..k {
        c = c * UBig::from(n - j) / UBig::from(j + 1);
    }
    c
}

/// A finite prefix `S_0..S_N` of a scalar sequence. All terms share one
/// mode; indexing is zero-based.
#[derive(Clone, Debug, PartialEq)]
pub struct SequencePrefix {
    label: String,
    mode: Mode,
    terms: Vec<Scalar>,
}

impl SequencePrefix {
    /// Build a prefix. The mode is taken from the first term (rational for
    /// an empty prefix) and every other term must match it.
    pub fn new(label: impl Into<String>, terms: Vec<Scalar>) -> Result<Self> {
        let mode = terms.first().map_or(Mode::Rational, Scalar::mode);
        if let Some((j, t)) = terms.iter().enumerate().find(|(_, t)| t.mode() != mode) {
            return Err(Error::ModeMismatch(format!("term {j} is {} but the sequence is {mode}", t.mode())));
        }
        Ok(SequencePrefix { label: label.into(), mode, terms })
    }

    pub fn empty(label: impl Into<String>, mode: Mode) -> Self {
        SequencePrefix { label: label.into(), mode, terms: Vec::new() }
    }

    /// Exact rational prefix from `(numerator, denominator)` pairs.
    pub fn from_ratios(label: impl Into<String>, ratios: &[(i64, i64)]) -> Self {
        let terms = ratios.iter().map(|&(p, q)| Scalar::ratio(p, q)).collect();
        SequencePrefix { label: label.into(), mode: Mode::Rational, terms }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn terms(&self) -> &[Scalar] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `N`, the index of the last term (`-1` when empty).
    pub fn last_index(&self) -> isize {
        self.terms.len() as isize - 1
    }

    pub fn get(&self, j: usize) -> Option<&Scalar> {
        self.terms.get(j)
    }

    pub fn term(&self, j: usize) -> Result<&Scalar> {
        self.terms.get(j).ok_or(Error::IndexOutOfRange { needed: j, last: self.last_index() })
    }

    pub fn push(&mut self, term: Scalar) -> Result<()> {
        if term.mode() != self.mode {
            return Err(Error::ModeMismatch(format!(
                "cannot append a {} term to a {} sequence",
                term.mode(),
                self.mode
            )));
        }
        self.terms.push(term);
        Ok(())
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// The same prefix converted to `mode`.
    pub fn to_mode(&self, mode: Mode) -> SequencePrefix {
        SequencePrefix {
            label: self.label.clone(),
            mode,
            terms: self.terms.iter().map(|t| t.to_mode(mode)).collect(),
        }
    }

    /// The prefix of `a * S_n + b`.
    pub fn affine(&self, a: &Scalar, b: &Scalar) -> SequencePrefix {
        SequencePrefix {
            label: format!("{}*({}) + {}", a, self.label, b),
            mode: self.mode,
            terms: self.terms.iter().map(|t| (a * t + b).to_mode(self.mode)).collect(),
        }
    }

    /// First `len` terms.
    pub fn truncated(&self, len: usize) -> SequencePrefix {
        SequencePrefix {
            label: self.label.clone(),
            mode: self.mode,
            terms: self.terms[..len.min(self.terms.len())].to_vec(),
        }
    }
}

/// `Δ^order S_start`, by the binomial expansion
/// `Σ_j (-1)^(order-j) C(order, j) S_(start+j)`.
pub fn forward_difference(seq: &SequencePrefix, order: usize, start: usize) -> Result<Scalar> {
    let last = start + order;
    seq.term(last)?;
    let mut acc = Scalar::zero().to_mode(seq.mode());
    for j in 0..=order {
        let c = Scalar::from(RBig::from(binomial(order, j)));
        let term = c * &seq.terms[start + j];
        if (order - j) % 2 == 0 {
            acc = acc + term;
        } else {
            acc = acc - term;
        }
    }
    Ok(acc)
}

/// The prefix `(Δ^order S_0, ..., Δ^order S_(N-order))`.
pub fn difference_sequence(seq: &SequencePrefix, order: usize) -> Result<SequencePrefix> {
    if order as isize > seq.last_index() {
        return Err(Error::IndexOutOfRange { needed: order, last: seq.last_index() });
    }
    let terms = (0..seq.len() - order)
        .map(|j| forward_difference(seq, order, j))
        .collect::<Result<Vec<_>>>()?;
    Ok(SequencePrefix { label: format!("Δ^{order} {}", seq.label), mode: seq.mode, terms })
}

/// All differences `Δ^i S_j` with `i + j <= N`, computed once.
#[derive(Clone, Debug)]
pub struct DifferenceTable {
    mode: Mode,
    rows: Vec<Vec<Scalar>>,
}

impl DifferenceTable {
    pub fn new(seq: &SequencePrefix) -> Self {
        let n = seq.len();
        let rows = (0..n)
            .map(|i| {
                (0..n - i)
                    .map(|j| forward_difference(seq, i, j).expect("index within prefix"))
                    .collect()
            })
            .collect();
        DifferenceTable { mode: seq.mode(), rows }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// `N` of the underlying prefix.
    pub fn last_index(&self) -> isize {
        self.rows.len() as isize - 1
    }

    /// `Δ^order S_start`.
    pub fn get(&self, order: usize, start: usize) -> Result<&Scalar> {
        self.rows
            .get(order)
            .and_then(|row| row.get(start))
            .ok_or(Error::IndexOutOfRange { needed: order + start, last: self.last_index() })
    }
}

/// Near-zero policy for breakdown detection.
#[derive(Clone, Debug, PartialEq)]
pub enum ZeroPolicy {
    /// Zero means exactly zero.
    Exact,
    /// `|x| <= absolute` or `|x| <= relative * |scale|`.
    Threshold { absolute: Scalar, relative: Scalar },
}

impl ZeroPolicy {
    /// Exact for rationals; `2^-(bits/2)` for both thresholds in float mode.
    pub fn for_mode(mode: Mode) -> ZeroPolicy {
        match mode {
            Mode::Rational => ZeroPolicy::Exact,
            Mode::Float { precision_bits } => {
                let exponent = -((precision_bits / 2) as isize);
                let t = Float::from_parts(IBig::ONE, exponent).with_precision(precision_bits).value();
                ZeroPolicy::Threshold { absolute: Scalar::Float(t.clone()), relative: Scalar::Float(t) }
            }
        }
    }

    pub fn threshold(absolute: Scalar, relative: Scalar) -> Result<ZeroPolicy> {
        if absolute.signum() <= 0 || relative.signum() <= 0 {
            return Err(Error::InvalidSpec("zero-policy thresholds must be positive".into()));
        }
        Ok(ZeroPolicy::Threshold { absolute, relative })
    }

    pub fn is_effectively_zero(&self, x: &Scalar, scale: &Scalar) -> bool {
        if x.is_rational() {
            return x.is_zero();
        }
        match self {
            ZeroPolicy::Exact => x.is_zero(),
            ZeroPolicy::Threshold { absolute, relative } => {
                let ax = x.abs();
                ax <= *absolute || ax <= relative * &scale.abs()
            }
        }
    }
}

/// Free-function form of [`ZeroPolicy::is_effectively_zero`].
pub fn is_effectively_zero(x: &Scalar, scale: &Scalar, policy: &ZeroPolicy) -> bool {
    policy.is_effectively_zero(x, scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ln2_prefix(len: usize) -> SequencePrefix {
        let mut acc = Scalar::zero();
        let terms = (1..=len as i64)
            .map(|j| {
                let sign = if j % 2 == 1 { 1 } else { -1 };
                acc = &acc + &Scalar::ratio(sign, j);
                acc.clone()
            })
            .collect();
        SequencePrefix::new("ln2", terms).unwrap()
    }

    #[test]
    fn zeroth_difference_is_the_term() {
        let s = SequencePrefix::from_ratios("s", &[(1, 1), (1, 2)]);
        assert_eq!(forward_difference(&s, 0, 0).unwrap(), Scalar::from(1));
    }

    #[test]
    fn first_and_third_differences() {
        let s = ln2_prefix(4);
        assert_eq!(forward_difference(&s, 1, 1).unwrap(), Scalar::ratio(1, 3));
        assert_eq!(forward_difference(&s, 3, 0).unwrap(), Scalar::ratio(-17, 12));
    }

    #[test]
    fn difference_out_of_range() {
        let s = ln2_prefix(3);
        assert!(matches!(forward_difference(&s, 2, 1), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(difference_sequence(&s, 3), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn difference_sequences() {
        let s = ln2_prefix(3);
        let d = difference_sequence(&s, 1).unwrap();
        assert_eq!(d.terms(), &[Scalar::ratio(-1, 2), Scalar::ratio(1, 3)]);

        let c = SequencePrefix::from_ratios("c", &[(3, 7), (3, 7), (3, 7)]);
        let d = difference_sequence(&c, 1).unwrap();
        assert!(d.terms().iter().all(Scalar::is_zero));
        assert_eq!(d.len(), 2);

        let s = ln2_prefix(5);
        let d = difference_sequence(&s, 2).unwrap();
        assert_eq!(d.terms(), &[Scalar::ratio(5, 6), Scalar::ratio(-7, 12), Scalar::ratio(9, 20)]);
    }

    #[test]
    fn zero_policy_modes() {
        let exact = ZeroPolicy::Exact;
        assert!(is_effectively_zero(&Scalar::zero(), &Scalar::one(), &exact));
        assert!(!is_effectively_zero(&Scalar::ratio(1, 7), &Scalar::from(1_000_000), &exact));

        let policy = ZeroPolicy::threshold(Scalar::float(1e-30, 53), Scalar::float(1e-20, 53)).unwrap();
        assert!(policy.is_effectively_zero(&Scalar::float(1e-40, 53), &Scalar::float(1.0, 53)));
        assert!(!policy.is_effectively_zero(&Scalar::float(1e-10, 53), &Scalar::float(1.0, 53)));
        // relative threshold
        assert!(policy.is_effectively_zero(&Scalar::float(1e-10, 53), &Scalar::float(1e12, 53)));
        // rationals ignore thresholds
        assert!(!policy.is_effectively_zero(&Scalar::ratio(1, 1_000_000_000), &Scalar::one()));

        assert!(ZeroPolicy::threshold(Scalar::zero(), Scalar::one()).is_err());
    }

    #[test]
    fn default_float_policy_is_sqrt_epsilon() {
        let policy = ZeroPolicy::for_mode(Mode::float(128).unwrap());
        let ZeroPolicy::Threshold { absolute, .. } = &policy else { panic!("expected thresholds") };
        assert_eq!(absolute.to_f64(), 2f64.powi(-64));
        assert_eq!(ZeroPolicy::for_mode(Mode::Rational), ZeroPolicy::Exact);
    }

    #[test]
    fn mixed_mode_promotes_to_float() {
        let x = Scalar::float(0.5, 128);
        let y = &x + &Scalar::ratio(1, 3);
        assert_eq!(y.mode(), Mode::Float { precision_bits: 128 });
        assert!((y.to_f64() - 5.0 / 6.0).abs() < 1e-15);
        assert!(Mode::float(52).is_err());
    }

    #[test]
    fn parsing_and_printing() {
        assert_eq!(Scalar::parse_rational("-10/4").unwrap(), Scalar::ratio(-5, 2));
        assert_eq!(Scalar::parse_rational("+7").unwrap(), Scalar::from(7));
        assert!(Scalar::parse_rational("0.5").is_none());
        assert!(Scalar::parse_rational("1/").is_none());
        assert!(Scalar::parse_rational("abc").is_none());
        assert_eq!(Scalar::ratio(-5, 2).to_string(), "-5/2");
        assert_eq!(Scalar::from(3).to_string(), "3");

        let x = Scalar::parse_float("1e-40", 53).unwrap();
        assert_eq!(x.to_f64(), 1e-40);
        assert!(Scalar::parse_in("0.5", Mode::Rational).is_err());
        assert_eq!(Scalar::parse_in("1/4", Mode::float(64).unwrap()).unwrap().to_f64(), 0.25);
    }

    #[test]
    fn float_to_rational_is_exact() {
        let x = Scalar::float(0.375, 53);
        assert_eq!(x.to_mode(Mode::Rational), Scalar::ratio(3, 8));
        assert_eq!(x, Scalar::ratio(3, 8));
    }

    #[test]
    fn mode_mismatch_rejected() {
        let err = SequencePrefix::new("mixed", vec![Scalar::one(), Scalar::float(1.0, 64)]).unwrap_err();
        assert!(matches!(err, Error::ModeMismatch(_)));
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), UBig::from(10u8));
        assert_eq!(binomial(40, 20), UBig::from(137_846_528_820u64));
        assert_eq!(binomial(3, 4), UBig::ZERO);
    }
}
