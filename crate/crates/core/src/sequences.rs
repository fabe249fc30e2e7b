//! Test sequences: series partial sums, kernel sequences of the multistep
//! transformation, random rational prefixes, and file input.

use std::path::Path;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{binomial, forward_difference, Mode, Scalar, SequencePrefix, ZeroPolicy};

/// A catalogued series.
#[derive(Clone, Debug, PartialEq)]
pub enum SeriesKind {
    /// Partial sums of `1 - 1/2 + 1/3 - ...`, converging to `ln 2`.
    AlternatingHarmonic,
    /// `S_n = S + c λ^n`.
    Geometric { limit: Scalar, c: Scalar, lambda: Scalar },
    /// `S_n = Σ_{j<=n} c_j x^j`.
    PowerSeriesPartialSums { coefficients: Vec<Scalar>, x: Scalar },
    Explicit(Vec<Scalar>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeriesSpec {
    pub kind: SeriesKind,
    /// Number of terms `N+1`.
    pub length: usize,
}

impl SeriesSpec {
    pub fn alternating_harmonic(length: usize) -> Self {
        SeriesSpec { kind: SeriesKind::AlternatingHarmonic, length }
    }

    pub fn geometric(limit: Scalar, c: Scalar, lambda: Scalar, length: usize) -> Self {
        SeriesSpec { kind: SeriesKind::Geometric { limit, c, lambda }, length }
    }

    pub fn power_series(coefficients: Vec<Scalar>, x: Scalar, length: usize) -> Self {
        SeriesSpec { kind: SeriesKind::PowerSeriesPartialSums { coefficients, x }, length }
    }

    pub fn explicit(terms: Vec<Scalar>) -> Self {
        let length = terms.len();
        SeriesSpec { kind: SeriesKind::Explicit(terms), length }
    }

    fn label(&self) -> String {
        match &self.kind {
            SeriesKind::AlternatingHarmonic => "ln2".into(),
            SeriesKind::Geometric { limit, c, lambda } => format!("geometric:{limit},{c},{lambda}"),
            SeriesKind::PowerSeriesPartialSums { coefficients, x } => {
                let cs: Vec<String> = coefficients.iter().map(Scalar::to_string).collect();
                format!("power:{x},{}", cs.join(","))
            }
            SeriesKind::Explicit(_) => "explicit".into(),
        }
    }
}

/// Bring a list of scalars to one mode: the widest float present, or
/// rational if there is none.
fn unify(terms: Vec<Scalar>) -> Vec<Scalar> {
    let bits = terms
        .iter()
        .filter_map(|t| match t.mode() {
            Mode::Float { precision_bits } => Some(precision_bits),
            Mode::Rational => None,
        })
        .max();
    match bits {
        None => terms,
        Some(precision_bits) => {
            let mode = Mode::Float { precision_bits };
            terms.iter().map(|t| t.to_mode(mode)).collect()
        }
    }
}

pub fn generate(spec: &SeriesSpec) -> Result<SequencePrefix> {
    if spec.length < 2 {
        return Err(Error::InvalidSpec(format!("a series needs at least 2 terms, got {}", spec.length)));
    }
    let terms = match &spec.kind {
        SeriesKind::AlternatingHarmonic => alternating_harmonic_terms(spec.length),
        SeriesKind::Geometric { limit, c, lambda } => {
            if *lambda == Scalar::one() {
                return Err(Error::InvalidSpec("geometric ratio λ must differ from 1".into()));
            }
            let mut power = Scalar::one();
            (0..spec.length)
                .map(|_| {
                    let term = limit + &(c * &power);
                    power = &power * lambda;
                    term
                })
                .collect()
        }
        SeriesKind::PowerSeriesPartialSums { coefficients, x } => {
            if coefficients.is_empty() {
                return Err(Error::InvalidSpec("power series needs at least one coefficient".into()));
            }
            if spec.length > coefficients.len() {
                return Err(Error::InvalidSpec(format!(
                    "{} terms requested from {} coefficients",
                    spec.length,
                    coefficients.len()
                )));
            }
            let mut power = Scalar::one();
            let mut sum = Scalar::zero();
            coefficients[..spec.length]
                .iter()
                .map(|c| {
                    sum = &sum + &(c * &power);
                    power = &power * x;
                    sum.clone()
                })
                .collect()
        }
        SeriesKind::Explicit(terms) => terms.clone(),
    };
    SequencePrefix::new(spec.label(), unify(terms))
}

fn alternating_harmonic_terms(length: usize) -> Vec<Scalar> {
    let mut sum = Scalar::zero();
    (1..=length as i64)
        .map(|j| {
            let sign = if j % 2 == 1 { 1 } else { -1 };
            sum = &sum + &Scalar::ratio(sign, j);
            sum.clone()
        })
        .collect()
}

/// The first `length` partial sums of the alternating harmonic series.
pub fn alternating_harmonic(length: usize) -> SequencePrefix {
    SequencePrefix::new("ln2", alternating_harmonic_terms(length)).expect("rational terms")
}

/// Parse a builtin series name: `ln2`, `geometric:S,c,lambda` or
/// `power:x,c0,c1,...`. Values are read in `mode`. `ln2` and `geometric`
/// need an explicit `length`; `power` defaults to one term per coefficient.
pub fn parse_builtin(text: &str, length: Option<usize>, mode: Mode) -> Result<SeriesSpec> {
    let (name, args) = text.split_once(':').unwrap_or((text, ""));
    let values = || -> Result<Vec<Scalar>> {
        args.split(',')
            .filter(|a| !a.trim().is_empty())
            .map(|a| Scalar::parse_in(a, mode).map_err(Error::InvalidSpec))
            .collect()
    };
    let need_length = || length.ok_or_else(|| Error::InvalidSpec(format!("builtin '{name}' needs a length")));
    match name.trim() {
        "ln2" => Ok(SeriesSpec::alternating_harmonic(need_length()?)),
        "geometric" => {
            let v = values()?;
            let [limit, c, lambda]: [Scalar; 3] = v
                .try_into()
                .map_err(|_| Error::InvalidSpec("geometric takes exactly three values S,c,lambda".into()))?;
            Ok(SeriesSpec::geometric(limit, c, lambda, need_length()?))
        }
        "power" => {
            let mut v = values()?;
            if v.len() < 2 {
                return Err(Error::InvalidSpec("power takes x followed by at least one coefficient".into()));
            }
            let x = v.remove(0);
            let length = length.unwrap_or(v.len());
            Ok(SeriesSpec::power_series(v, x, length))
        }
        other => Err(Error::InvalidSpec(format!("unknown builtin series '{other}'"))),
    }
}

/// A sequence in the kernel of the multistep transformation:
/// `S_n = S + Σ_{i=1..k} a_i Δ^{im} S_n` for every `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelSpec {
    pub m: usize,
    /// `a_1..a_k`; `k` is the length and `a_k` must be nonzero.
    pub coefficients: Vec<Scalar>,
    pub limit: Scalar,
    /// `S_0..S_{km-1}`.
    pub seeds: Vec<Scalar>,
}

impl KernelSpec {
    pub fn k(&self) -> usize {
        self.coefficients.len()
    }

    /// Coefficients `w_j` of `S_n = S + Σ_{j=0..km} w_j S_{n+j}`.
    fn expanded(&self) -> Vec<Scalar> {
        let m = self.m;
        let mut w = vec![Scalar::zero(); self.k() * m + 1];
        for (idx, a) in self.coefficients.iter().enumerate() {
            let order = (idx + 1) * m;
            for (j, wj) in w.iter_mut().enumerate().take(order + 1) {
                let c = Scalar::from(dashu_ratio::RBig::from(binomial(order, j)));
                let term = a * &c;
                *wj = if (order - j) % 2 == 0 { &*wj + &term } else { &*wj - &term };
            }
        }
        w
    }
}

/// Extend the seeds of `spec` to `length` terms by solving the kernel
/// relation forward for `S_{n+km}`. The result is re-checked against the
/// relation (through [`forward_difference`]) before it is returned.
pub fn generate_kernel(spec: &KernelSpec, length: usize) -> Result<SequencePrefix> {
    let (m, k) = (spec.m, spec.k());
    if m == 0 || k == 0 {
        return Err(Error::InvalidSpec("kernel needs m >= 1 and k >= 1".into()));
    }
    let depth = k * m;
    if spec.seeds.len() != depth {
        return Err(Error::SeedCountMismatch { expected: depth, got: spec.seeds.len() });
    }
    if length < depth {
        return Err(Error::InvalidSpec(format!("length {length} is shorter than the {depth} seeds")));
    }
    let a_k = &spec.coefficients[k - 1];
    if a_k.is_zero() {
        return Err(Error::DegenerateRecurrence("leading coefficient a_k is zero".into()));
    }

    let w = spec.expanded();
    let mut terms = unify(
        spec.seeds
            .iter()
            .chain(spec.coefficients.iter())
            .chain(std::iter::once(&spec.limit))
            .cloned()
            .collect(),
    );
    terms.truncate(depth);
    let mode = terms.first().map_or(Mode::Rational, Scalar::mode);
    let limit = spec.limit.to_mode(mode);
    for n in 0..length - depth {
        let mut rhs = &terms[n] - &limit;
        for (j, wj) in w.iter().enumerate().take(depth) {
            rhs = rhs - wj * &terms[n + j];
        }
        let next = rhs
            .checked_div(&w[depth])
            .ok_or_else(|| Error::DegenerateRecurrence(format!("zero pivot at n={n}")))?;
        terms.push(next.to_mode(mode));
    }

    let label = format!("kernel(m={m}, k={k})");
    let seq = SequencePrefix::new(label, terms)?;
    let policy = ZeroPolicy::for_mode(mode);
    for n in 0..length - depth {
        let mut rhs = limit.clone();
        for (i, a) in spec.coefficients.iter().enumerate() {
            rhs = rhs + a * &forward_difference(&seq, (i + 1) * m, n)?;
        }
        let s_n = seq.term(n)?;
        let residual = s_n - &rhs;
        if !policy.is_effectively_zero(&residual, s_n) {
            return Err(Error::DegenerateRecurrence(format!("kernel relation fails at n={n}")));
        }
    }
    Ok(seq)
}

/// A small random rational: numerator in `-9..=9`, denominator in `1..=5`.
pub fn random_small_rational<R: Rng>(rng: &mut R) -> Scalar {
    let num = rng.gen_range(-9i64..=9);
    let den = rng.gen_range(1i64..=5);
    Scalar::ratio(num, den)
}

/// A prefix of `length` small random rationals drawn from a ChaCha8
/// stream seeded with `seed`.
pub fn random_rational_sequence(seed: u64, length: usize) -> SequencePrefix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let terms = (0..length).map(|_| random_small_rational(&mut rng)).collect();
    SequencePrefix::new(format!("random(seed={seed})"), terms).expect("rational terms")
}

/// Input file format for [`load_sequence`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InputFormat {
    Csv,
    Json,
}

#[derive(Serialize, Deserialize)]
struct JsonSequence {
    #[serde(default)]
    label: String,
    terms: Vec<serde_json::Value>,
}

fn finish(label: String, raw: Vec<(usize, String)>, precision_bits: usize) -> Result<SequencePrefix> {
    if raw.is_empty() {
        return Err(Error::EmptyFile);
    }
    let mut terms = Vec::with_capacity(raw.len());
    let mut all_rational = true;
    for (line, text) in &raw {
        if let Some(r) = Scalar::parse_rational(text) {
            terms.push(r);
        } else if let Some(x) = Scalar::parse_float(text, precision_bits) {
            all_rational = false;
            terms.push(x);
        } else {
            return Err(Error::Parse { line: *line, message: format!("'{}' is not a number", text.trim()) });
        }
    }
    if !all_rational {
        let mode = Mode::float(precision_bits)?;
        terms = terms.iter().map(|t| t.to_mode(mode)).collect();
    }
    SequencePrefix::new(label, terms)
}

/// One value per line; blank lines and lines starting with `#` are skipped.
pub fn parse_csv(text: &str, label: &str, precision_bits: usize) -> Result<SequencePrefix> {
    let raw = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .map(|(i, l)| (i, l.trim_end_matches(',').to_string()))
        .collect();
    finish(label.to_string(), raw, precision_bits)
}

/// `{"label": "...", "terms": ["1", "1/2", ...]}`; bare JSON numbers are
/// accepted too. Parse errors report the term's position as the line.
pub fn parse_json(text: &str, precision_bits: usize) -> Result<SequencePrefix> {
    let doc: JsonSequence =
        serde_json::from_str(text).map_err(|e| Error::Parse { line: e.line(), message: e.to_string() })?;
    let raw = doc
        .terms
        .iter()
        .enumerate()
        .map(|(i, v)| match v {
            serde_json::Value::String(s) => (i + 1, s.clone()),
            other => (i + 1, other.to_string()),
        })
        .collect();
    finish(doc.label, raw, precision_bits)
}

/// Read a sequence file. Mode is inferred: all-rational input stays exact,
/// anything else becomes a float of `precision_bits` bits.
pub fn load_sequence(path: &Path, format: InputFormat, precision_bits: usize) -> Result<SequencePrefix> {
    let text = std::fs::read_to_string(path)?;
    let label = path.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
    match format {
        InputFormat::Csv => parse_csv(&text, &label, precision_bits),
        InputFormat::Json => parse_json(&text, precision_bits),
    }
}

/// JSON form of a prefix, readable by [`parse_json`].
pub fn sequence_to_json(seq: &SequencePrefix) -> String {
    let doc = JsonSequence {
        label: seq.label().to_string(),
        terms: seq.terms().iter().map(|t| serde_json::Value::String(t.to_string())).collect(),
    };
    serde_json::to_string_pretty(&doc).expect("serializable")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(p: i64, q: i64) -> Scalar {
        Scalar::ratio(p, q)
    }

    #[test]
    fn catalogue() {
        let s = generate(&SeriesSpec::alternating_harmonic(4)).unwrap();
        assert_eq!(s.terms(), &[r(1, 1), r(1, 2), r(5, 6), r(7, 12)]);

        let g = generate(&SeriesSpec::geometric(r(2, 1), r(3, 1), r(1, 2), 3)).unwrap();
        assert_eq!(g.terms(), &[r(5, 1), r(7, 2), r(11, 4)]);

        let e = generate(&SeriesSpec::explicit(vec![r(1, 1), r(2, 1), r(3, 1)])).unwrap();
        assert_eq!(e.terms(), &[r(1, 1), r(2, 1), r(3, 1)]);

        let p = generate(&SeriesSpec::power_series(vec![r(1, 1), r(1, 1), r(1, 2)], r(2, 1), 3)).unwrap();
        assert_eq!(p.terms(), &[r(1, 1), r(3, 1), r(5, 1)]);
    }

    #[test]
    fn catalogue_errors() {
        assert!(matches!(
            generate(&SeriesSpec::geometric(r(0, 1), r(1, 1), r(1, 1), 3)),
            Err(Error::InvalidSpec(_))
        ));
        assert!(matches!(generate(&SeriesSpec::power_series(vec![], r(1, 1), 2)), Err(Error::InvalidSpec(_))));
        assert!(matches!(generate(&SeriesSpec::alternating_harmonic(1)), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn float_parameters_give_a_float_sequence() {
        let spec = SeriesSpec::geometric(r(2, 1), r(3, 1), Scalar::float(0.5, 80), 3);
        let g = generate(&spec).unwrap();
        assert_eq!(g.mode(), Mode::Float { precision_bits: 80 });
        assert_eq!(g.terms()[2].to_f64(), 2.75);
    }

    #[test]
    fn builtins() {
        let spec = parse_builtin("geometric:2,3,1/2", Some(3), Mode::Rational).unwrap();
        assert_eq!(generate(&spec).unwrap().terms()[1], r(7, 2));
        let spec = parse_builtin("power:1/2,1,1,1", None, Mode::Rational).unwrap();
        assert_eq!(spec.length, 3);
        assert!(parse_builtin("ln2", None, Mode::Rational).is_err());
        assert!(parse_builtin("nope", Some(3), Mode::Rational).is_err());
        assert!(parse_builtin("geometric:1,2", Some(3), Mode::Rational).is_err());
        assert!(parse_builtin("geometric:0.5,1,2", Some(3), Mode::Rational).is_err());
    }

    #[test]
    fn geometric_kernel_seed() {
        let spec = KernelSpec { m: 1, coefficients: vec![r(-2, 1)], limit: r(2, 1), seeds: vec![r(5, 1)] };
        let s = generate_kernel(&spec, 4).unwrap();
        assert_eq!(s.terms(), &[r(5, 1), r(7, 2), r(11, 4), r(19, 8)]);
    }

    #[test]
    fn second_difference_kernel() {
        let spec = KernelSpec { m: 2, coefficients: vec![r(1, 1)], limit: r(0, 1), seeds: vec![r(1, 1), r(2, 1)] };
        let s = generate_kernel(&spec, 6).unwrap();
        for n in 0..=3 {
            assert_eq!(s.terms()[n], forward_difference(&s, 2, n).unwrap());
        }
    }

    #[test]
    fn kernel_errors() {
        let spec = KernelSpec { m: 2, coefficients: vec![r(1, 1)], limit: r(0, 1), seeds: vec![r(1, 1)] };
        assert_eq!(generate_kernel(&spec, 6).unwrap_err(), Error::SeedCountMismatch { expected: 2, got: 1 });
        let spec = KernelSpec { m: 1, coefficients: vec![r(1, 1), r(0, 1)], limit: r(0, 1), seeds: vec![r(1, 1); 2] };
        assert!(matches!(generate_kernel(&spec, 6), Err(Error::DegenerateRecurrence(_))));
    }

    #[test]
    fn csv_input() {
        let s = parse_csv("1\n1/2\n5/6\n", "t", 64).unwrap();
        assert_eq!(s.mode(), Mode::Rational);
        assert_eq!(s.terms(), &[r(1, 1), r(1, 2), r(5, 6)]);

        let s = parse_csv("# comment\n0.5\n0.25\n", "t", 64).unwrap();
        assert_eq!(s.mode(), Mode::Float { precision_bits: 64 });
        assert_eq!(s.terms()[1].to_f64(), 0.25);

        assert_eq!(parse_csv("abc\n", "t", 64).unwrap_err(), Error::Parse { line: 1, message: "'abc' is not a number".into() });
        assert_eq!(parse_csv("# only\n\n", "t", 64).unwrap_err(), Error::EmptyFile);
    }

    #[test]
    fn json_round_trip() {
        let s = alternating_harmonic(5);
        let back = parse_json(&sequence_to_json(&s), 64).unwrap();
        assert_eq!(back, s);
        assert!(matches!(parse_json("{", 64), Err(Error::Parse { .. })));
    }

    #[test]
    fn random_sequences_are_reproducible() {
        assert_eq!(random_rational_sequence(7, 13), random_rational_sequence(7, 13));
        assert_ne!(random_rational_sequence(7, 13), random_rational_sequence(8, 13));
    }
}
