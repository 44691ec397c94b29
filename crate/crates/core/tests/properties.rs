use num_traits::Signed;
use proptest::prelude::*;

use intdef_core::ideal::Ideal;
use intdef_core::symbols::{delta_set, hilbert_symbol, reciprocity_audit};
use intdef_core::{Field, FieldCtx, NfElem, Sign};

const FIELDS: [&str; 4] = ["Q", "Q(sqrt,-1)", "Q(sqrt,-5)", "Q(sqrt,5)"];

fn elem(field: Field, c: (i64, i64, i64)) -> NfElem {
    let c1 = if field == Field::Rational { 0 } else { c.1 };
    let x = NfElem::from_ints(field, c.0, c1);
    x.scale(&num_rational::BigRational::new(1.into(), c.2.into()))
}

fn coords() -> impl Strategy<Value = (i64, i64, i64)> {
    (-20i64..=20, -20i64..=20, 1i64..=6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn field_operations_invert(f in 0usize..4, x in coords(), y in coords()) {
        let ctx = FieldCtx::parse(FIELDS[f]).unwrap();
        let (x, y) = (elem(ctx.field(), x), elem(ctx.field(), y));
        prop_assume!(!y.is_zero());
        let q = x.checked_div(&y).unwrap();
        prop_assert_eq!(&(&q * &y), &x);
        prop_assert_eq!(&(&(&x + &y) - &y), &x);
        prop_assert_eq!((&x * &y).norm(), x.norm() * y.norm());
    }

    #[test]
    fn ideal_norm_is_multiplicative(f in 0usize..4, x in coords(), y in coords()) {
        let ctx = FieldCtx::parse(FIELDS[f]).unwrap();
        let (x, y) = (elem(ctx.field(), x), elem(ctx.field(), y));
        prop_assume!(!x.is_zero() && !y.is_zero());
        let ix = Ideal::principal(&x).unwrap();
        let iy = Ideal::principal(&y).unwrap();
        prop_assert_eq!(ix.mul(&iy).norm(), (&x * &y).norm().abs());
        prop_assert_eq!(ix.mul(&ix.inverse()), Ideal::unit(ctx.field()));
    }

    #[test]
    fn hilbert_symbols_obey_reciprocity(f in 0usize..4, a in coords(), b in coords(), c in coords()) {
        let ctx = FieldCtx::parse(FIELDS[f]).unwrap();
        let (a, b, c) = (elem(ctx.field(), a), elem(ctx.field(), b), elem(ctx.field(), c));
        prop_assume!(!a.is_zero() && !b.is_zero() && !c.is_zero());
        reciprocity_audit(&ctx, &a, &b).unwrap();
        prop_assert_eq!(delta_set(&ctx, &a, &b).unwrap().len() % 2, 0);
        for (v, s) in reciprocity_audit(&ctx, &a, &(&b * &c)).unwrap() {
            let split = hilbert_symbol(&ctx, &a, &b, &v).unwrap() * hilbert_symbol(&ctx, &a, &c, &v).unwrap();
            prop_assert_eq!(s, split, "bilinearity at {}", v);
            prop_assert_eq!(hilbert_symbol(&ctx, &b, &c, &v).unwrap(), hilbert_symbol(&ctx, &c, &b, &v).unwrap());
        }
    }

    #[test]
    fn steinberg_relations(f in 0usize..4, a in coords()) {
        let ctx = FieldCtx::parse(FIELDS[f]).unwrap();
        let a = elem(ctx.field(), a);
        let one = NfElem::one(ctx.field());
        prop_assume!(!a.is_zero() && a != one);
        for (v, s) in reciprocity_audit(&ctx, &a, &(&one - &a)).unwrap() {
            prop_assert_eq!(s, Sign::Plus, "(a, 1 - a) at {}", v);
        }
        for (v, s) in reciprocity_audit(&ctx, &a, &(-a.clone())).unwrap() {
            prop_assert_eq!(s, Sign::Plus, "(a, -a) at {}", v);
        }
    }
}
