//! Coefficient tables: periodicity, the symplectic shift and the rational
//! collapse of the magnetic coefficients.

use magk::cli::input::{default_catalog_dir, load_catalog};
use magk::corep::{MagneticContext, TypeLabel};
use magk::groups::z2_time_reversal;
use magk::kcoeff::{
    bott_coefficients, magnetic_coefficients, orbit_ktheory, periodicity_check, rational_invariant_rank,
    AbelianGroupExpr,
};
use proptest::prelude::*;

fn label() -> impl Strategy<Value = TypeLabel> {
    prop::sample::select(vec![TypeLabel::R, TypeLabel::C, TypeLabel::H])
}

proptest! {
    #[test]
    fn bott_tables_are_periodic(l in label(), q in -200i64..200) {
        prop_assert_eq!(bott_coefficients(l, q), bott_coefficients(l, q + 8));
        let period = if l == TypeLabel::C { 2 } else { 8 };
        prop_assert_eq!(bott_coefficients(l, q), bott_coefficients(l, q - period));
    }

    #[test]
    fn symplectic_is_real_shifted_by_four(q in -200i64..200) {
        prop_assert_eq!(bott_coefficients(TypeLabel::H, q), bott_coefficients(TypeLabel::R, q - 4));
        prop_assert_eq!(bott_coefficients(TypeLabel::R, q), bott_coefficients(TypeLabel::H, q + 4));
    }

    #[test]
    fn group_expressions_are_canonical(r in 0usize..4, t in proptest::collection::vec(1u64..5, 0..4)) {
        let a = AbelianGroupExpr::new(r, t.clone());
        let mut rev = t.clone();
        rev.reverse();
        prop_assert_eq!(&a, &AbelianGroupExpr::new(r, rev));
        prop_assert_eq!(a.direct_sum(&AbelianGroupExpr::zero()), a.clone());
        prop_assert_eq!(a.times(2), a.direct_sum(&a));
    }
}

#[test]
fn rational_ranks_collapse_to_orbit_counts() {
    for e in load_catalog(&default_catalog_dir()).unwrap() {
        let mut ctxs = vec![MagneticContext::new(e.group.clone()).unwrap()];
        if let Some(ext) = e.extension() {
            ctxs.push(MagneticContext::twisted(&ext).unwrap());
        }
        for ctx in ctxs {
            let basis = ctx.corep_basis().unwrap();
            for q in -16..=16 {
                assert!(periodicity_check(&basis, q));
                assert_eq!(
                    magnetic_coefficients(&basis, q).free_rank,
                    rational_invariant_rank(&ctx, q),
                    "{} q={q}",
                    e.name
                );
            }
        }
    }
}

#[test]
fn orbit_types_of_time_reversal() {
    let g = z2_time_reversal();
    let whole: Vec<usize> = (0..2).collect();
    let id = vec![g.group().identity()];
    for q in -8..=0 {
        assert_eq!(
            orbit_ktheory(&g, &whole, q).unwrap(),
            bott_coefficients(TypeLabel::R, q)
        );
        // free orbit: complex K-theory of a point
        assert_eq!(orbit_ktheory(&g, &id, q).unwrap(), bott_coefficients(TypeLabel::C, q));
    }
}
