//! Deterministic enumeration of field elements by height.

use num_bigint::BigInt;
use num_integer::Integer;

use crate::field::{Field, NfElem};

/// All elements of height at most `bound`, ordered by height, then
/// denominator, then numerator coordinates.
pub fn enumerate_by_height(field: Field, bound: u64) -> Vec<NfElem> {
    let b = bound as i64;
    let mut keyed: Vec<((i64, i64, i64, i64), NfElem)> = Vec::new();
    let n1_range = if field == Field::Rational { 0..=0 } else { -b..=b };
    for den in 1..=b.max(1) {
        for n0 in -b..=b {
            for n1 in n1_range.clone() {
                if n0.gcd(&n1).gcd(&den) != 1 {
                    continue;
                }
                let h = n0.abs().max(n1.abs()).max(den);
                if h > b.max(1) {
                    continue;
                }
                let x = NfElem::from_parts(field, BigInt::from(n0), BigInt::from(n1), BigInt::from(den));
                keyed.push(((h, den, n0, n1), x));
            }
        }
    }
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    keyed.into_iter().map(|(_, x)| x).collect()
}

/// Integral elements `c0 + c1 w` with `|c0|, |c1| <= bound`, by max-norm.
pub fn small_integral(field: Field, bound: i64) -> Vec<NfElem> {
    let mut keyed = Vec::new();
    let c1_range = if field == Field::Rational { 0..=0 } else { -bound..=bound };
    for c0 in -bound..=bound {
        for c1 in c1_range.clone() {
            keyed.push(((c0.abs().max(c1.abs()), c1.abs(), c0.abs(), c1, c0), NfElem::from_ints(field, c0, c1)));
        }
    }
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    keyed.into_iter().map(|(_, x)| x).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn heights_are_respected_and_unique() {
        for field in [Field::Rational, Field::Quadratic(-5)] {
            let xs = enumerate_by_height(field, 6);
            let mut seen = HashSet::new();
            for x in &xs {
                assert!(x.height() <= BigInt::from(6));
                assert!(seen.insert(x.clone()));
            }
            let hs: Vec<BigInt> = xs.iter().map(|x| x.height()).collect();
            assert!(hs.windows(2).all(|w| w[0] <= w[1]));
        }
        let q = enumerate_by_height(Field::Rational, 2);
        let s: Vec<String> = q.iter().map(|x| x.to_string()).collect();
        assert_eq!(s, ["-1", "0", "1", "-2", "2", "-1/2", "1/2"]);
    }
}
