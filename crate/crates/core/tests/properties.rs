use proptest::prelude::*;

use shanks::determinant::{extended_h, hankel, hankel_form, HankelForm};
use shanks::epsilon::{progressive_append, TableDump};
use shanks::numerics::{difference_sequence, forward_difference, Mode, Scalar, SequencePrefix};
use shanks::{generate_kernel, multistep_epsilon, multistep_shanks, quasilinearity_check, EpsilonTable, KernelSpec};

fn small_rational() -> impl Strategy<Value = Scalar> {
    (-9i64..=9, 1i64..=5).prop_map(|(p, q)| Scalar::ratio(p, q))
}

fn nonzero_rational() -> impl Strategy<Value = Scalar> {
    small_rational().prop_filter("nonzero", |v| !v.is_zero())
}

fn sequence(len: std::ops::Range<usize>) -> impl Strategy<Value = SequencePrefix> {
    prop::collection::vec(small_rational(), len).prop_map(|terms| SequencePrefix::new("p", terms).unwrap())
}

proptest! {
    #[test]
    fn difference_is_linear(s in sequence(8..9), t in sequence(8..9), a in small_rational(), order in 0usize..6) {
        let combo: Vec<Scalar> = s.terms().iter().zip(t.terms()).map(|(x, y)| &(&a * x) + y).collect();
        let combo = SequencePrefix::new("c", combo).unwrap();
        for start in 0..8 - order {
            let lhs = forward_difference(&combo, order, start).unwrap();
            let rhs = &a * &forward_difference(&s, order, start).unwrap() + forward_difference(&t, order, start).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn difference_of_difference(s in sequence(9..10), i in 0usize..4, j in 0usize..4) {
        let inner = difference_sequence(&s, i).unwrap();
        for start in 0..9 - i - j {
            prop_assert_eq!(forward_difference(&inner, j, start).unwrap(), forward_difference(&s, i + j, start).unwrap());
        }
    }

    #[test]
    fn polynomial_differences_vanish(coefs in prop::collection::vec(small_rational(), 1..5)) {
        let degree = coefs.len() - 1;
        let terms: Vec<Scalar> = (0..10i64)
            .map(|x| coefs.iter().rev().fold(Scalar::zero(), |acc, c| acc * Scalar::from(x) + c.clone()))
            .collect();
        let s = SequencePrefix::new("poly", terms).unwrap();
        for start in 0..10 - degree - 1 {
            prop_assert!(forward_difference(&s, degree + 1, start).unwrap().is_zero());
        }
    }

    #[test]
    fn rational_display_round_trips(v in small_rational(), w in nonzero_rational()) {
        let x = &v / &w;
        prop_assert_eq!(Scalar::parse_rational(&x.to_string()), Some(x));
    }

    #[test]
    fn float_display_round_trips(bits in 53usize..200, v in small_rational(), w in nonzero_rational()) {
        let x = (&v / &w).to_mode(Mode::float(bits).unwrap());
        prop_assert_eq!(Scalar::parse_float(&x.to_string(), bits), Some(x));
    }

    #[test]
    fn extended_h_with_unit_step_is_hankel(s in sequence(10..11), k in 1usize..5, n in 0usize..2) {
        // rows Δ^r S, columns shifted: row operations turn it into the Hankel matrix
        prop_assert_eq!(extended_h(&s, n, k as isize, 1).unwrap(), hankel(&s, n, k).unwrap());
    }

    #[test]
    fn hankel_forms_agree(s in sequence(9..10), k in 1usize..5, n in 0usize..2) {
        let plain = hankel_form(&s, n, k, HankelForm::Plain).unwrap();
        prop_assert_eq!(hankel_form(&s, n, k, HankelForm::RowDifferences).unwrap(), plain.clone());
        prop_assert_eq!(hankel_form(&s, n, k, HankelForm::FullDifferences).unwrap(), plain);
    }

    #[test]
    fn kernel_sequences_are_fixed(
        m in 1usize..4,
        k in 1usize..3,
        coefficients in prop::collection::vec(small_rational(), 2),
        last in nonzero_rational(),
        limit in small_rational(),
        seeds in prop::collection::vec(small_rational(), 6),
    ) {
        let mut coefficients = coefficients[..k].to_vec();
        coefficients[k - 1] = last;
        let spec = KernelSpec { m, coefficients, limit: limit.clone(), seeds: seeds[..k * m].to_vec() };
        let len = (m + 1) * k + 4;
        let s = match generate_kernel(&spec, len) {
            Ok(s) => s,
            // 1 - Σ a_i (-1)^.. can vanish for some coefficient draws
            Err(shanks::Error::DegenerateRecurrence(_)) => return Ok(()),
            Err(e) => panic!("{e}"),
        };
        for n in 0..len - (m + 1) * k {
            if let Ok(v) = multistep_shanks(&s, m, k, n) {
                prop_assert_eq!(v, limit.clone());
            }
        }
    }

    #[test]
    fn quasilinear(s in sequence(9..10), m in 1usize..4, a in nonzero_rational(), b in small_rational()) {
        for n in 0..9 - (m + 1) {
            if multistep_shanks(&s, m, 1, n).is_ok() {
                prop_assert!(quasilinearity_check(&s, m, 1, n, &a, &b).unwrap());
            }
        }
    }

    #[test]
    fn progressive_matches_batch(s in sequence(1..10), m in 1usize..4) {
        let mut table = EpsilonTable::empty(m, Mode::Rational);
        for term in s.terms() {
            table = progressive_append(table, term.clone()).unwrap();
        }
        prop_assert_eq!(table, multistep_epsilon(&s.with_label(""), m));
    }

    #[test]
    fn dumps_round_trip(s in sequence(2..10), m in 1usize..4) {
        let dump = multistep_epsilon(&s, m).dump(None);
        prop_assert_eq!(&TableDump::from_json(&dump.to_json()).unwrap(), &dump);
        prop_assert_eq!(&TableDump::from_csv(&dump.to_csv()).unwrap(), &dump);
    }
}
