use num_bigint::BigInt;
use num_traits::{Pow, Zero};

use mermin_lhv::exact::{rat, Rational};
use mermin_lhv::strategy::{
    class_conditional_prob, class_detection_prob, class_size_structural, classify, pow9, GlobalStrategy,
    InstructionClass,
};
use mermin_lhv::Observable;

mod common;
use common::{as_query, configurations, covered, members, queries};

#[test]
fn detection_probabilities_match_enumeration() {
    for n in 3..=7 {
        let configs = configurations(n);
        for class in InstructionClass::all(n) {
            let members = members(&configs, class);
            assert_eq!(
                BigInt::from(members.len()),
                BigInt::from(class_size_structural(n, class).unwrap()),
                "n={n} {class}"
            );
            for (qx, qz) in queries(n) {
                let hits = covered(&members, qx, qz);
                let expected = rat(hits as i64, members.len() as i64);
                let got = class_detection_prob(n, class, &as_query(n, qx, qz)).unwrap();
                assert_eq!(got, expected, "n={n} {class} query x={qx:b} z={qz:b}");
            }
        }
    }
}

#[test]
fn conditional_probabilities_match_enumeration() {
    for n in 3..=6 {
        let configs = configurations(n);
        for class in InstructionClass::all(n) {
            let members = members(&configs, class);
            for (qx, qz) in queries(n) {
                // first queried particle conditioned on the rest
                let Some(first) = (0..n).find(|&i| (qx | qz) >> i & 1 == 1) else {
                    continue;
                };
                let query = as_query(n, qx, qz);
                let (head, rest) = query.split_at(1);
                let (rx, rz) = (qx & !(1 << first), qz & !(1 << first));
                let given = covered(&members, rx, rz);
                let both = covered(&members, qx, qz);
                let expected = (given > 0).then(|| rat(both as i64, given as i64));
                let got = class_conditional_prob(n, class, head[0], rest).unwrap();
                assert_eq!(got, expected, "n={n} {class} query x={qx:b} z={qz:b}");
            }
        }
    }
}

#[test]
fn strategy_classes_match_structural_counts() {
    for n in 3..=5 {
        let mut counts = std::collections::BTreeMap::new();
        for code in 0..pow9(n) {
            *counts.entry(classify(GlobalStrategy(code), n)).or_insert(0u64) += 1;
        }
        let mut total = BigInt::zero();
        for class in InstructionClass::all(n) {
            let signs = BigInt::from(2).pow((2 * class.k + class.l) as u32);
            let expected = BigInt::from(class_size_structural(n, class).unwrap()) * signs;
            assert_eq!(BigInt::from(counts[&class]), expected, "n={n} {class}");
            total += expected;
        }
        assert_eq!(total, BigInt::from(9).pow(n as u32));
    }
}

#[test]
fn conditional_ratio_chain() {
    let c = InstructionClass::new;
    let x = |i: usize| (i, Observable::X);
    for n in 3..=7 {
        let two = c(2, n - 2, 0);
        let all: Vec<_> = (0..n).map(x).collect();
        let rest: Vec<_> = (1..n).map(x).collect();
        let p_all = class_detection_prob(n, two, &all).unwrap();
        let p_rest = class_detection_prob(n, two, &rest).unwrap();
        let pow2 = Rational::from_integer(BigInt::from(1u64 << (n - 2)));
        assert_eq!(p_all, Rational::from_integer(1.into()) / &pow2);
        assert_eq!(p_rest, rat(2 * n as i64 - 2, n as i64) / &pow2);
        assert_eq!(p_all.clone() / p_rest, rat(n as i64, 2 * n as i64 - 2));
        assert_eq!(
            class_conditional_prob(n, two, x(0), &rest).unwrap(),
            Some(rat(n as i64, 2 * n as i64 - 2))
        );
        assert_eq!(
            class_conditional_prob(n, c(1, n - 1, 0), x(0), &rest).unwrap(),
            Some(rat(n as i64, 2 * n as i64 - 1))
        );
        assert_eq!(
            class_conditional_prob(n, c(0, n, 0), x(0), &rest).unwrap(),
            Some(rat(1, 2))
        );
    }
}
