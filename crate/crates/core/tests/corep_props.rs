//! Corepresentation bookkeeping against brute-force recomputation.

use magk::chars::Cyclo;
use magk::cli::input::{default_catalog_dir, load_catalog};
use magk::corep::{MagneticContext, TypeLabel};
use magk::groups::{central_extension_z2, MagneticGroup, PhiRule};
use num_rational::Rational64;
use proptest::prelude::*;

fn catalog_contexts() -> Vec<(String, MagneticContext)> {
    let mut out = Vec::new();
    for e in load_catalog(&default_catalog_dir()).unwrap() {
        out.push((e.name.clone(), MagneticContext::new(e.group.clone()).unwrap()));
        if let Some(ext) = e.extension() {
            out.push((format!("{}/twisted", e.name), MagneticContext::twisted(&ext).unwrap()));
        }
    }
    out
}

/// Index into G₀ of an element of G known to be unitary.
fn g0_index(ctx: &MagneticContext, g: usize) -> usize {
    ctx.embedding().iter().position(|&x| x == g).expect("unitary element")
}

/// Dimmock sum (1/|G₀|) Σ_{a ∉ G₀} χ(a²), from the element tables alone.
fn indicator(ctx: &MagneticContext, i: usize) -> Cyclo {
    let g = ctx.group();
    let chi = ctx.table().row(i);
    let mut acc = Cyclo::zero(chi.value(0).order());
    for a in g.antiunitary_elements() {
        let sq = g.group().mul(a, a);
        acc = acc.add(chi.at_element(g0_index(ctx, sq)));
    }
    acc.scale(Rational64::new(1, ctx.g0().order() as i64))
}

/// Orbit partner found by scanning for the row equal to `g ↦ conj(χ(a g a⁻¹))`.
fn brute_partner(ctx: &MagneticContext, i: usize, a: usize) -> usize {
    let g = ctx.group().group();
    let chi = ctx.table().row(i);
    let values: Vec<Cyclo> = ctx
        .embedding()
        .iter()
        .map(|&x| chi.at_element(g0_index(ctx, g.conj(a, x))).conj())
        .collect();
    (0..ctx.table().len())
        .find(|&j| {
            let r = ctx.table().row(j);
            (0..values.len()).all(|x| r.at_element(x) == &values[x])
        })
        .expect("conjugate is irreducible")
}

#[test]
fn involution_is_an_involution_independent_of_a0() {
    for (name, ctx) in catalog_contexts() {
        let inv = ctx.involution();
        for &i in &ctx.active_irreps() {
            assert_eq!(inv[inv[i]], i, "{name}");
            assert!(
                ctx.active_irreps().contains(&inv[i]),
                "{name}: twisted sector not preserved"
            );
        }
        for a in ctx.group().antiunitary_elements() {
            assert_eq!(ctx.involution_with(a).unwrap(), inv, "{name} a={a}");
            for &i in &ctx.active_irreps() {
                assert_eq!(brute_partner(&ctx, i, a), inv[i], "{name} a={a} irrep {i}");
            }
        }
    }
}

#[test]
fn labels_match_brute_force_indicator() {
    for (name, ctx) in catalog_contexts() {
        for c in ctx.classify_irreps().unwrap() {
            let v = indicator(&ctx, c.index).as_integer().expect("integral indicator");
            let want = match v {
                1 => TypeLabel::R,
                -1 => TypeLabel::H,
                0 => TypeLabel::C,
                _ => panic!("{name}: indicator {v}"),
            };
            assert_eq!(c.label, want, "{name} irrep {}", c.index);
            assert_eq!(c.partner == c.index, want != TypeLabel::C, "{name}");
        }
    }
}

#[test]
fn every_active_irreducible_appears_in_exactly_one_generator() {
    for (name, ctx) in catalog_contexts() {
        let basis = ctx.corep_basis().unwrap();
        let mut seen = vec![0; ctx.table().len()];
        for g in &basis.generators {
            let want: Vec<i64> = match g.label {
                TypeLabel::R => vec![1],
                TypeLabel::H => vec![2],
                TypeLabel::C => vec![1, 1],
            };
            assert_eq!(g.constituents.iter().map(|c| c.1).collect::<Vec<_>>(), want, "{name}");
            let combined = ctx.table().combine(&{
                let mut m = vec![0; ctx.table().len()];
                for &(i, k) in &g.constituents {
                    m[i] = k;
                    seen[i] += 1;
                }
                m
            });
            assert_eq!(combined, g.restricted_char, "{name}");
        }
        let active = ctx.active_irreps();
        assert!(active.iter().all(|&i| seen[i] == 1), "{name}");
        assert_eq!(seen.iter().sum::<usize>(), active.len(), "{name}");
    }
}

#[test]
fn untwisted_c4t_sz_has_real_and_quaternionic_generators() {
    let g = MagneticGroup::build_semidirect(4, 2, 1, PhiRule::OnN).unwrap();
    let ctx = MagneticContext::new(g).unwrap();
    let b = ctx.corep_basis().unwrap();
    assert_eq!(
        (b.count(TypeLabel::R), b.count(TypeLabel::C), b.count(TypeLabel::H)),
        (2, 0, 2)
    );
    // abelian G with real G₀ characters: the involution fixes every irreducible
    assert_eq!(ctx.involution(), (0..4).collect::<Vec<_>>());
}

fn catalog_groups() -> Vec<MagneticGroup> {
    load_catalog(&default_catalog_dir())
        .unwrap()
        .into_iter()
        .map(|e| e.group)
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// A coboundary twist f(a)f(b)f(ab) splits, so twisted coreps match plain ones.
    #[test]
    fn coboundary_twists_change_nothing(idx in 0usize..64, bits in any::<u64>()) {
        let groups = catalog_groups();
        let g = &groups[idx % groups.len()];
        let n = g.order();
        let id = g.group().identity();
        let f: Vec<i8> = (0..n).map(|x| if x != id && (bits >> (x % 64)) & 1 == 1 { -1 } else { 1 }).collect();
        let c: Vec<Vec<i8>> = (0..n).map(|a| (0..n).map(|b| f[a] * f[b] * f[g.group().mul(a, b)]).collect()).collect();
        let ext = central_extension_z2(g, &c).unwrap();
        let tw = MagneticContext::twisted(&ext).unwrap().corep_basis().unwrap();
        let plain = MagneticContext::new(g.clone()).unwrap().corep_basis().unwrap();
        for l in [TypeLabel::R, TypeLabel::C, TypeLabel::H] {
            prop_assert_eq!(tw.count(l), plain.count(l));
        }
        let iso = MagneticContext::twisted(&ext).unwrap().verify_rational_iso().unwrap();
        prop_assert!(iso.image_invariant);
        prop_assert_eq!(iso.rank_magnetic, iso.rank_invariants);
    }

    #[test]
    fn semidirect_products_satisfy_the_rational_iso(
        (m, k, a) in prop::sample::select(vec![(2, 2, 1), (4, 2, 3), (4, 2, 1), (6, 2, 5), (8, 2, 3), (8, 2, 5), (8, 2, 7), (3, 2, 2), (4, 4, 1), (2, 4, 1)]),
        rule in prop::sample::select(vec![PhiRule::OnN, PhiRule::OnH, PhiRule::Both]),
    ) {
        if let Ok(g) = MagneticGroup::build_semidirect(m, k, a, rule) {
            let ctx = MagneticContext::new(g).unwrap();
            let iso = ctx.verify_rational_iso().unwrap();
            prop_assert!(iso.image_invariant);
            prop_assert_eq!(iso.rank_magnetic, iso.rank_invariants);
        }
    }
}
