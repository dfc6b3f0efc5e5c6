//! Acceptance gate: one PASS/FAIL line per criterion. Integer results are
//! compared exactly; runtime budgets are pinned below.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use magk::bloch::{builtin_c4t_model, invariants, random_symmetric_perturbation, ChernOptions, ChernResult};
use magk::cli::input::{default_catalog_dir, load_catalog, CatalogEntry};
use magk::corep::{MagneticContext, TypeLabel};
use magk::groups::{Group, MagneticGroup};
use magk::kcoeff::{
    bott_coefficients, conj_module_structure, magnetic_coefficients, periodicity_check, rational_invariant_rank,
    trivial_space_ktheory, AbelianGroupExpr, Z2Action,
};
use magk::linalg::rank;
use magk::torus::{c2_on_z2, delocalized_rank, magnetic_invariant_rank_spinsplit};

const THEOREM_BUDGET: Duration = Duration::from_secs(10);
const PIPELINE_BUDGET: Duration = Duration::from_secs(5);
const BLOCH_BUDGET: Duration = Duration::from_secs(60);
const PERTURBATIONS: u64 = 50;
const PERTURBATION_SCALE: f64 = 0.1;
const MIN_CATALOG: usize = 10;
const MAX_ORDER: usize = 16;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn contexts(entry: &CatalogEntry) -> Vec<(String, MagneticContext)> {
    let mut out = vec![(
        entry.name.clone(),
        MagneticContext::new(entry.group.clone()).expect("plain context"),
    )];
    if let Some(ext) = entry.extension() {
        out.push((
            format!("{}/twisted", entry.name),
            MagneticContext::twisted(&ext).expect("twisted context"),
        ));
    }
    out
}

/// Finds a, b with a⁸ = b² = 1, bab = a⁵, φ(a) = 1, φ(b) = 0, generating G.
fn has_c4t_presentation(g: &MagneticGroup) -> bool {
    let grp: &Group = g.group();
    let n = grp.order();
    (0..n).any(|a| {
        g.phi(a) == 1
            && grp.element_order(a) == 8
            && (0..n).any(|b| {
                g.phi(b) == 0
                    && grp.element_order(b) == 2
                    && grp.mul(grp.mul(b, a), b) == grp.pow(a, 5)
                    && grp.generated_by(&[a, b]).len() == n
            })
    })
}

fn criterion1(catalog: &[CatalogEntry], load: Duration) -> Outcome {
    let start = Instant::now();
    ensure(catalog.len() >= MIN_CATALOG, || {
        format!("catalog has {} groups", catalog.len())
    })?;
    let find = |name: &str| catalog.iter().find(|e| e.name == name).ok_or(format!("missing {name}"));
    let base = find("c4t-sz")?;
    let (gr, phi) = (base.group.group(), &base.group);
    ensure(gr.order() == 8 && gr.is_abelian(), || {
        "c4t-sz is not abelian of order 8".into()
    })?;
    let orders: Vec<usize> = (0..8).map(|g| gr.element_order(g)).collect();
    ensure(orders.iter().filter(|&&o| o == 4).count() == 4, || {
        "c4t-sz is not Z4×Z2".into()
    })?;
    ensure(
        (0..8).all(|g| phi.phi(g) as usize == (gr.element_order(g) == 4) as usize),
        || "φ must be odd exactly on the order 4 elements".into(),
    )?;
    ensure(has_c4t_presentation(&find("c4t-sz-ext")?.group), || {
        "c4t-sz-ext presentation".into()
    })?;
    let twisted = base.extension().ok_or("c4t-sz has no twist")?;
    ensure(has_c4t_presentation(&twisted.total), || {
        "twisted c4t-sz presentation".into()
    })?;

    let mut checked = 0;
    for entry in catalog {
        ensure(entry.group.order() <= MAX_ORDER, || {
            format!("{} has order > {MAX_ORDER}", entry.name)
        })?;
        for (name, ctx) in contexts(entry) {
            let iso = ctx.verify_rational_iso().map_err(|e| format!("{name}: {e}"))?;
            let m = ctx.restriction_matrix().map_err(|e| e.to_string())?;
            // independent recount: fixed rows under the column involution, orbits of the involution
            let invariant = m.rows.iter().all(|r| (0..r.len()).all(|j| r[m.involution[j]] == r[j]));
            let inv = ctx.involution();
            let active = ctx.active_irreps();
            let orbits = active.iter().filter(|&&i| inv[i] >= i).count();
            ensure(invariant && iso.image_invariant, || {
                format!("{name}: image not invariant")
            })?;
            ensure(
                rank(&m.rows) == orbits && iso.rank_magnetic == orbits && iso.rank_invariants == orbits,
                || format!("{name}: rank {} vs {orbits} orbits", rank(&m.rows)),
            )?;
            checked += 1;
        }
    }
    let t = start.elapsed() + load;
    ensure(t < THEOREM_BUDGET, || format!("took {t:?}"))?;
    Ok(format!(
        "{} groups, {checked} contexts, {:.2}s",
        catalog.len(),
        t.as_secs_f64()
    ))
}

fn criterion2(catalog: &[CatalogEntry]) -> Outcome {
    let mut compared = 0;
    for entry in catalog {
        for (name, ctx) in contexts(entry) {
            if ctx.g0().order() > MAX_ORDER {
                continue;
            }
            for c in ctx.classify_irreps().map_err(|e| e.to_string())? {
                let chi = ctx.table().row(c.index).clone();
                let self_conj = ctx.conjugate_character(&chi) == chi;
                let found = ctx.intertwiner_type(c.index).map_err(|e| e.to_string())?;
                let ind = ctx.dimmock_indicator(&chi).map_err(|e| e.to_string())?;
                let expected = match ind {
                    1 => Some(TypeLabel::R),
                    -1 => Some(TypeLabel::H),
                    _ => None,
                };
                ensure(self_conj == expected.is_some() && found == expected, || {
                    format!("{name} irreducible {}: indicator {ind}, intertwiner {found:?}", c.index)
                })?;
                compared += usize::from(self_conj);
            }
        }
    }
    Ok(format!("{compared} self-conjugate irreducibles agree"))
}

fn ko_column(entry: &CatalogEntry, twisted: bool) -> Result<magk::corep::CorepBasis, String> {
    let ctx = if twisted {
        MagneticContext::twisted(&entry.extension().ok_or("no twist")?)
    } else {
        MagneticContext::new(entry.group.clone())
    };
    ctx.and_then(|c| c.corep_basis()).map_err(|e| e.to_string())
}

fn criterion3(catalog: &[CatalogEntry]) -> Outcome {
    let kr = catalog.iter().find(|e| e.name == "kr").ok_or("missing kr")?;
    ensure(kr.group.order() == 2, || "kr is not Z2".into())?;
    let ext = kr.extension().ok_or("kr has no twist")?;
    let tg = ext.total.group();
    ensure(tg.order() == 4 && (0..4).any(|g| tg.element_order(g) == 4), || {
        "twisted kr is not Z4".into()
    })?;
    let plain = ko_column(kr, false)?;
    let twisted = ko_column(kr, true)?;
    let z = AbelianGroupExpr::free(1);
    let z2 = AbelianGroupExpr::cyclic(2);
    let o = AbelianGroupExpr::zero();
    // KO^0 .. KO^-7 of a point
    let ko = [z.clone(), z2.clone(), z2, o.clone(), z, o.clone(), o.clone(), o];
    for (i, want) in ko.iter().enumerate() {
        let q = -(i as i64);
        ensure(&magnetic_coefficients(&plain, q) == want, || format!("KO at q={q}"))?;
        ensure(&bott_coefficients(TypeLabel::R, q) == want, || {
            format!("Bott R at q={q}")
        })?;
    }
    for q in -24..=24 {
        ensure(
            magnetic_coefficients(&twisted, q) == magnetic_coefficients(&plain, q - 4),
            || format!("twisted shift at q={q}"),
        )?;
        ensure(
            magnetic_coefficients(&twisted, q) == bott_coefficients(TypeLabel::H, q),
            || format!("KSp q={q}"),
        )?;
    }
    let mut bases = 0;
    for entry in catalog {
        for tw in [false, true] {
            if tw && entry.twist.is_none() {
                continue;
            }
            let b = ko_column(entry, tw)?;
            ensure((-16..=16).all(|q| periodicity_check(&b, q)), || {
                format!("{} periodicity", entry.name)
            })?;
            bases += 1;
        }
    }
    Ok(format!("KO and KSp columns exact, period 8 on {bases} bases"))
}

fn criterion4(catalog: &[CatalogEntry]) -> Outcome {
    let kr = catalog.iter().find(|e| e.name == "kr").ok_or("missing kr")?;
    let ctx = MagneticContext::new(kr.group.clone()).map_err(|e| e.to_string())?;
    let plain = ko_column(kr, false)?;
    for q in -8..=8 {
        let m = conj_module_structure(q);
        let expect = match q.rem_euclid(4) {
            0 => vec![(AbelianGroupExpr::free(1), Z2Action::Trivial)],
            2 => vec![(AbelianGroupExpr::free(1), Z2Action::Sign)],
            _ => vec![],
        };
        ensure(m.summands == expect, || format!("module at q={q}: {:?}", m.summands))?;
    }
    let ranks: Vec<usize> = [0, -2, -1]
        .iter()
        .map(|&q| conj_module_structure(q).invariant_rank())
        .collect();
    let rational: Vec<usize> = [0, -2, -1].iter().map(|&q| rational_invariant_rank(&ctx, q)).collect();
    let ko: Vec<usize> = [0, -2, -1]
        .iter()
        .map(|&q| magnetic_coefficients(&plain, q).free_rank)
        .collect();
    ensure(ranks == [1, 0, 0] && ranks == rational && ranks == ko, || {
        format!("invariant {ranks:?}, rational {rational:?}, KO {ko:?}")
    })?;
    Ok(format!("invariant ranks {ranks:?} at q = 0, -2, -1"))
}

/// Ranks of the Mayer–Vietoris maps in docs/mayer_vietoris_c2.md.
fn mayer_vietoris_c2() -> (usize, usize) {
    // α⁰: four disc characters (trivial, sign) and the unit of V, to four circles
    let mut a0 = vec![vec![0i64; 9]; 4];
    for p in 0..4 {
        a0[p][2 * p] = 1;
        a0[p][2 * p + 1] = 1;
        a0[p][8] = 1;
    }
    // α¹: H¹ of the four-punctured sphere to the boundary circles
    let a1 = vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1], vec![-1, -1, -1]];
    let (r0, r1) = (rank(&a0), rank(&a1));
    let k0 = (9 - r0) + (4 - r1);
    let k1 = (4 - r0) + (3 - r1);
    (k0, k1)
}

fn criterion5(catalog: &[CatalogEntry]) -> Outcome {
    let start = Instant::now();
    let entry = catalog.iter().find(|e| e.name == "c4t-sz").ok_or("missing c4t-sz")?;
    let ext = entry.extension().ok_or("no twist")?;
    let action = entry.extension_action().ok_or("no action")?;
    let spin = entry.spin.ok_or("no spin")?;
    let ctx = MagneticContext::twisted(&ext).map_err(|e| e.to_string())?;
    let basis = ctx.corep_basis().map_err(|e| e.to_string())?;
    ensure(basis.len() == 2 && basis.count(TypeLabel::C) == 2, || {
        format!("basis {:?}", basis.generators)
    })?;
    let m = ctx.restriction_matrix().map_err(|e| e.to_string())?;
    ensure(rank(&m.rows) == 2, || "restriction rank".into())?;
    let pt = trivial_space_ktheory(
        &basis,
        &AbelianGroupExpr::free(6),
        &AbelianGroupExpr::free(6),
        &AbelianGroupExpr::free(6),
    );
    ensure(pt == AbelianGroupExpr::free(12), || format!("trivial space {pt}"))?;

    let lifted = ext.proj.iter().position(|&p| p == spin).ok_or("spin not in image")?;
    let r = magnetic_invariant_rank_spinsplit(&ext, &action, lifted).map_err(|e| e.to_string())?;
    ensure(r.total_even == 12 && r.total_odd == 0, || {
        format!("pre-invariant ({}, {})", r.total_even, r.total_odd)
    })?;
    ensure((r.invariant.rank_even, r.invariant.rank_odd) == (6, 0), || {
        "invariant rank".into()
    })?;

    let (g, a) = c2_on_z2();
    let c2 = delocalized_rank(&g, &a).map_err(|e| e.to_string())?;
    let mut sectors: Vec<usize> = c2.sectors.iter().map(|s| s.even).collect();
    sectors.sort_unstable();
    ensure(sectors == [2, 4] && c2.rank_odd == 0, || {
        format!("C2 sectors {sectors:?}")
    })?;
    let mv = mayer_vietoris_c2();
    ensure(mv == (6, 0), || format!("Mayer-Vietoris {mv:?}"))?;
    let t = start.elapsed();
    ensure(t < PIPELINE_BUDGET, || format!("took {t:?}"))?;
    Ok(format!(
        "2 C generators, rank 2, 12 -> (6, 0), C2 2+4, MV {mv:?}, {:.2}s",
        t.as_secs_f64()
    ))
}

fn criterion6() -> Outcome {
    let start = Instant::now();
    let key = |r: &ChernResult| (r.total, r.spin_up.abs(), r.spin_down.abs(), r.z2_parity);
    let mut reference = None;
    for (mass, want) in [(1.0, (0, 1, 1, 1)), (3.0, (0, 0, 0, 0))] {
        let (model, c4t, sz) = builtin_c4t_model(mass);
        let mut signs = Vec::new();
        for mesh in [24, 48, 96] {
            let r = invariants(
                &model,
                &c4t,
                &sz,
                &ChernOptions {
                    mesh,
                    ..Default::default()
                },
            )
            .map_err(|e| format!("mass {mass} mesh {mesh}: {e}"))?;
            ensure(key(&r) == want, || format!("mass {mass} mesh {mesh}: {r:?}"))?;
            signs.push(r.spin_up);
        }
        ensure(signs.iter().all(|&s| s == signs[0]), || format!("sign drift {signs:?}"))?;
        if mass == 1.0 {
            reference = Some((model, c4t, sz));
        }
    }
    let (model, c4t, sz) = reference.expect("set above");
    for seed in 0..PERTURBATIONS {
        let p = random_symmetric_perturbation(&model, &c4t, &sz, PERTURBATION_SCALE, seed);
        let r = invariants(&p, &c4t, &sz, &ChernOptions::default()).map_err(|e| format!("seed {seed}: {e}"))?;
        ensure(r.total == 0 && r.z2_parity == 1, || format!("seed {seed}: {r:?}"))?;
    }
    let t = start.elapsed();
    ensure(t < BLOCH_BUDGET, || format!("took {t:?}"))?;
    Ok(format!(
        "meshes 24/48/96 stable, {PERTURBATIONS} perturbations keep parity 1, {:.2}s",
        t.as_secs_f64()
    ))
}

fn criterion7() -> Outcome {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_magk"))
            .arg("verify-all")
            .output()
            .map_err(|e| e.to_string())
    };
    let (a, b) = (run()?, run()?);
    ensure(a.status.success(), || {
        format!("exit {:?}: {}", a.status.code(), String::from_utf8_lossy(&a.stderr))
    })?;
    ensure(a.stdout == b.stdout && b.status.success(), || "reports differ".into())?;
    Ok(format!("{} identical bytes", a.stdout.len()))
}

fn main() -> ExitCode {
    let start = Instant::now();
    let catalog = match load_catalog(&default_catalog_dir()) {
        Ok(c) => c,
        Err(e) => {
            println!("catalog: FAIL ({e:?})");
            return ExitCode::FAILURE;
        }
    };
    let load = start.elapsed();
    let results: [(&str, Outcome); 7] = [
        ("theorem machine-check", criterion1(&catalog, load)),
        ("type trichotomy cross-oracle", criterion2(&catalog)),
        ("coefficient identifications", criterion3(&catalog)),
        ("Z2-module coefficients", criterion4(&catalog)),
        ("C4T x Sz pipeline", criterion5(&catalog)),
        ("Bloch invariants", criterion6()),
        ("determinism", criterion7()),
    ];
    let mut ok = true;
    for (i, (name, r)) in results.iter().enumerate() {
        match r {
            Ok(detail) => println!("criterion {} ({name}): PASS - {detail}", i + 1),
            Err(e) => {
                ok = false;
                println!("criterion {} ({name}): FAIL - {e}", i + 1);
            }
        }
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
