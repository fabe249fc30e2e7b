//! Independent reference implementations checked against the library:
//! differences by recursion, determinants by cofactor expansion, and
//! transformation values from their defining linear systems.

use shanks::determinant::{hankel_form, DetOracle, HankelForm};
use shanks::numerics::{forward_difference, Scalar, SequencePrefix};
use shanks::{epsilon_entry_det, multistep_epsilon, multistep_shanks, random_rational_sequence, shanks};

fn recursive_difference(terms: &[Scalar], order: usize, start: usize) -> Scalar {
    if order == 0 {
        terms[start].clone()
    } else {
        recursive_difference(terms, order - 1, start + 1) - recursive_difference(terms, order - 1, start)
    }
}

fn laplace(matrix: &[Vec<Scalar>]) -> Scalar {
    match matrix.len() {
        0 => Scalar::one(),
        1 => matrix[0][0].clone(),
        size => (0..size)
            .map(|c| {
                let minor: Vec<Vec<Scalar>> = matrix[1..]
                    .iter()
                    .map(|row| row.iter().enumerate().filter(|(j, _)| *j != c).map(|(_, v)| v.clone()).collect())
                    .collect();
                let term = &matrix[0][c] * &laplace(&minor);
                if c % 2 == 0 { term } else { -term }
            })
            .sum(),
    }
}

fn extended_matrix(terms: &[Scalar], m: usize, shift: usize, k: usize, n: usize) -> Vec<Vec<Scalar>> {
    (0..k).map(|r| (0..k).map(|c| recursive_difference(terms, shift + r * m, n + c)).collect()).collect()
}

fn phi_matrix(terms: &[Scalar], m: usize, shift: usize, k: usize, n: usize) -> Vec<Vec<Scalar>> {
    let mut rows = vec![(0..k).map(|c| Scalar::from(n + c)).collect::<Vec<_>>()];
    rows.extend((0..k - 1).map(|r| (0..k).map(|c| recursive_difference(terms, shift + r * m, n + c)).collect()));
    rows
}

#[test]
fn differences_match_recursion() {
    for seed in 0..20 {
        let s = random_rational_sequence(seed, 10);
        for order in 0..10 {
            for start in 0..10 - order {
                assert_eq!(forward_difference(&s, order, start).unwrap(), recursive_difference(s.terms(), order, start));
            }
        }
    }
}

#[test]
fn extended_determinants_match_cofactor_expansion() {
    for seed in 0..12 {
        let s = random_rational_sequence(100 + seed, 14);
        let t = s.terms();
        for m in 1..=3 {
            let oracle = DetOracle::new(&s, m);
            for k in 1..=4usize {
                for shift in 0..=2 {
                    for n in 0..2 {
                        if let Ok(h) = oracle.h(shift, k as isize, n) {
                            assert_eq!(h, laplace(&extended_matrix(t, m, shift, k, n)));
                        }
                        if let Ok(p) = oracle.phi(shift, k as isize, n) {
                            assert_eq!(p, laplace(&phi_matrix(t, m, shift, k, n)));
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn hankel_matches_cofactor_expansion() {
    for seed in 0..12 {
        let s = random_rational_sequence(200 + seed, 10);
        let t = s.terms();
        for k in 1..=4usize {
            let matrix: Vec<Vec<Scalar>> = (0..k).map(|i| (0..k).map(|j| t[1 + i + j].clone()).collect()).collect();
            let expected = laplace(&matrix);
            for form in [HankelForm::Plain, HankelForm::RowDifferences, HankelForm::FullDifferences] {
                assert_eq!(hankel_form(&s, 1, k, form).unwrap(), expected, "{form:?}");
            }
        }
    }
}

#[test]
fn aitken_closed_form() {
    for seed in 0..30 {
        let s = random_rational_sequence(300 + seed, 5);
        let t = s.terms();
        for n in 0..3 {
            let d1 = &t[n + 1] - &t[n];
            let d2 = &(&t[n + 2] - &(&t[n + 1] * &Scalar::from(2))) + &t[n];
            match shanks(&s, 1, n) {
                Ok(v) => assert_eq!(v, &t[n] - &(&(&d1 * &d1) / &d2)),
                Err(_) => assert!(d2.is_zero()),
            }
        }
    }
}

/// `e_{k,m}(S_n)` by Cramer's rule on `S_{n+j} = c + Σ a_i Δ^{im} S_{n+j}`.
fn cramer(terms: &[Scalar], m: usize, k: usize, n: usize) -> Option<Scalar> {
    let system: Vec<Vec<Scalar>> = (0..=k)
        .map(|j| std::iter::once(Scalar::one()).chain((1..=k).map(|i| recursive_difference(terms, i * m, n + j))).collect())
        .collect();
    let den = laplace(&system);
    let mut replaced = system.clone();
    for (row, j) in replaced.iter_mut().zip(0..) {
        row[0] = terms[n + j].clone();
    }
    (!den.is_zero()).then(|| laplace(&replaced) / den)
}

#[test]
fn multistep_shanks_solves_its_linear_system() {
    for seed in 0..15 {
        let s = random_rational_sequence(400 + seed, 13);
        for m in 1..=3 {
            for k in 1..=2 {
                for n in 0..2 {
                    if let Some(expected) = cramer(s.terms(), m, k, n) {
                        assert_eq!(multistep_shanks(&s, m, k, n).unwrap(), expected);
                    }
                }
            }
        }
    }
}

#[test]
fn initialization_rows_from_determinants() {
    let s = SequencePrefix::from_ratios("s", &[(1, 1), (-1, 2), (1, 3), (2, 7), (5, 3)]);
    for m in 1..=3 {
        let table = multistep_epsilon(&s, m);
        for n in 0..4 {
            assert_eq!(epsilon_entry_det(&s, m, -(m as isize), n).unwrap(), Scalar::zero());
            for kappa in -(m as isize) + 1..0 {
                assert_eq!(epsilon_entry_det(&s, m, kappa, n).unwrap(), Scalar::from(n));
                assert_eq!(table.value(kappa, n), Some(&Scalar::from(n)));
            }
        }
    }
}
