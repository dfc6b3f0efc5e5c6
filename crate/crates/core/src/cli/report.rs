//! JSON result builders shared by the CLI and the Python bindings, and the
//! `verify-all` sweep.

use serde_json::{json, Value};

use super::input::CatalogEntry;
use crate::bloch::{builtin_c4t_model, invariants, ChernOptions, ChernResult};
use crate::corep::{CorepBasis, CorepError, MagneticContext, TypeLabel};
use crate::kcoeff::{
    bott_coefficients, conj_module_structure, magnetic_coefficients, periodicity_check, rational_invariant_rank,
};
use crate::torus::{c2_on_z2, delocalized_rank, magnetic_invariant_rank_spinsplit};

pub fn counts(basis: &CorepBasis) -> Value {
    json!({
        "R": basis.count(TypeLabel::R),
        "C": basis.count(TypeLabel::C),
        "H": basis.count(TypeLabel::H),
    })
}

pub fn classify_result(ctx: &MagneticContext) -> Result<Value, CorepError> {
    let irreps: Vec<Value> = ctx
        .classify_irreps()?
        .into_iter()
        .map(|c| {
            let row = ctx.table().row(c.index);
            json!({
                "index": c.index,
                "dim": row.degree(),
                "values": row,
                "type": c.label,
                "partner": c.partner,
            })
        })
        .collect();
    let basis = ctx.corep_basis()?;
    let iso = ctx.verify_rational_iso()?;
    Ok(json!({
        "group": {
            "order": ctx.group().order(),
            "g0_order": ctx.g0().order(),
            "twisted": ctx.is_twisted(),
            "class_sizes": ctx.table().class_sizes(),
        },
        "a0": ctx.a0(),
        "irreps": irreps,
        "basis": basis.generators,
        "counts": counts(&basis),
        "restriction_matrix": ctx.restriction_matrix()?,
        "ranks": { "magnetic": iso.rank_magnetic, "invariants": iso.rank_invariants },
        "image_invariant": iso.image_invariant,
        "cokernel": iso.cokernel_torsion,
    }))
}

pub fn restrict_result(ctx: &MagneticContext) -> Result<Value, CorepError> {
    let iso = ctx.verify_rational_iso()?;
    Ok(json!({
        "restriction_matrix": ctx.restriction_matrix()?,
        "ranks": { "magnetic": iso.rank_magnetic, "invariants": iso.rank_invariants },
        "image_invariant": iso.image_invariant,
        "cokernel": iso.cokernel_torsion,
    }))
}

pub fn ktable_result(basis: &CorepBasis, qmin: i64, qmax: i64) -> Value {
    let table: Vec<Value> = (qmin..=qmax)
        .rev()
        .map(|q| {
            let k = magnetic_coefficients(basis, q);
            json!({
                "q": q,
                "free_rank": k.free_rank,
                "torsion": k.torsion,
                "group": k.to_string(),
            })
        })
        .collect();
    json!({ "counts": counts(basis), "table": table })
}

struct Sweep {
    checks: Vec<Value>,
}

impl Sweep {
    fn record(&mut self, name: impl Into<String>, pass: bool, detail: Value) {
        self.checks
            .push(json!({ "name": name.into(), "pass": pass, "detail": detail }));
    }

    fn record_result(&mut self, name: impl Into<String>, r: Result<Value, String>) {
        match r {
            Ok(detail) => self.record(name, true, detail),
            Err(e) => self.record(name, false, json!({ "error": e })),
        }
    }
}

fn theorem_check(ctx: &MagneticContext) -> Result<Value, String> {
    let basis = ctx.corep_basis().map_err(|e| e.to_string())?;
    let iso = ctx.verify_rational_iso().map_err(|e| e.to_string())?;
    Ok(json!({
        "group_order": ctx.group().order(),
        "g0_order": ctx.g0().order(),
        "counts": counts(&basis),
        "iso": iso,
    }))
}

/// Indicator labels against the intertwiner search on every
/// self-conjugate active irreducible.
pub fn intertwiner_check(ctx: &MagneticContext) -> Result<Value, String> {
    let mut compared = 0;
    for c in ctx.classify_irreps().map_err(|e| e.to_string())? {
        let found = ctx.intertwiner_type(c.index).map_err(|e| e.to_string())?;
        let expected = (c.label != TypeLabel::C).then_some(c.label);
        if found != expected {
            return Err(format!(
                "irreducible {}: indicator {:?}, intertwiner {:?}",
                c.index, c.label, found
            ));
        }
        compared += usize::from(expected.is_some());
    }
    Ok(json!({ "self_conjugate_compared": compared }))
}

fn periodicity(basis: &CorepBasis) -> Result<Value, String> {
    match (-8..=8).find(|&q| !periodicity_check(basis, q)) {
        None => Ok(json!({ "q_range": [-8, 8] })),
        Some(q) => Err(format!("period 8 fails at q = {q}")),
    }
}

fn contexts(entry: &CatalogEntry) -> Vec<(String, Result<MagneticContext, CorepError>)> {
    let mut out = vec![(entry.name.clone(), MagneticContext::new(entry.group.clone()))];
    if let Some(ext) = entry.extension() {
        out.push((format!("{}/twisted", entry.name), MagneticContext::twisted(&ext)));
    }
    out
}

fn coefficient_checks(sweep: &mut Sweep, catalog: &[CatalogEntry]) {
    let Some(kr) = catalog.iter().find(|e| e.name == "kr") else {
        sweep.record("coefficients", false, json!({ "error": "catalog has no kr entry" }));
        return;
    };
    let plain = MagneticContext::new(kr.group.clone()).and_then(|c| c.corep_basis());
    let twisted = kr
        .extension()
        .ok_or_else(|| CorepError::TheoremViolated("kr has no twist".into()))
        .and_then(|e| MagneticContext::twisted(&e))
        .and_then(|c| c.corep_basis());
    let (plain, twisted) = match (plain, twisted) {
        (Ok(p), Ok(t)) => (p, t),
        (p, t) => {
            sweep.record(
                "coefficients",
                false,
                json!({ "error": format!("{:?} {:?}", p.err(), t.err()) }),
            );
            return;
        }
    };
    let ko: Vec<String> = (-7..=0)
        .rev()
        .map(|q| magnetic_coefficients(&plain, q).to_string())
        .collect();
    let ko_ok = (-7..=0).all(|q| magnetic_coefficients(&plain, q) == bott_coefficients(TypeLabel::R, q));
    sweep.record("coefficients/ko_table", ko_ok, json!({ "q_0_to_-7": ko }));
    let shift_ok = (-16..=16).all(|q| magnetic_coefficients(&twisted, q) == magnetic_coefficients(&plain, q - 4));
    let ksp: Vec<String> = (-7..=0)
        .rev()
        .map(|q| magnetic_coefficients(&twisted, q).to_string())
        .collect();
    sweep.record("coefficients/ksp_shift", shift_ok, json!({ "q_0_to_-7": ksp }));
    let ranks: Vec<usize> = [0, -2, -1]
        .iter()
        .map(|&q| conj_module_structure(q).invariant_rank())
        .collect();
    let kr_ctx = MagneticContext::new(kr.group.clone()).expect("built above");
    let rational: Vec<usize> = [0, -2, -1]
        .iter()
        .map(|&q| rational_invariant_rank(&kr_ctx, q))
        .collect();
    let ko_ranks: Vec<usize> = [0, -2, -1]
        .iter()
        .map(|&q| magnetic_coefficients(&plain, q).free_rank)
        .collect();
    sweep.record(
        "coefficients/conj_module",
        ranks == vec![1, 0, 0] && ranks == rational && ranks == ko_ranks,
        json!({ "invariant_ranks_q_0_-2_-1": ranks, "ko_free_ranks": ko_ranks }),
    );
}

fn torus_checks(sweep: &mut Sweep, catalog: &[CatalogEntry]) {
    let (g, a) = c2_on_z2();
    let r = delocalized_rank(&g, &a).map_err(|e| e.to_string()).map(|r| {
        let pass = (r.rank_even, r.rank_odd) == (6, 0);
        (pass, serde_json::to_value(&r).expect("serializable"))
    });
    match r {
        Ok((pass, detail)) => sweep.record("torus/c2", pass, detail),
        Err(e) => sweep.record("torus/c2", false, json!({ "error": e })),
    }
    let spin = catalog
        .iter()
        .find(|e| e.name == "c4t-sz")
        .and_then(|e| Some((e.extension()?, e.extension_action()?, e.spin?)));
    let Some((ext, action, spin)) = spin else {
        sweep.record(
            "torus/spin_split",
            false,
            json!({ "error": "c4t-sz entry lacks twist, action or spin" }),
        );
        return;
    };
    let lifted = ext.proj.iter().position(|&p| p == spin).expect("surjective");
    match magnetic_invariant_rank_spinsplit(&ext, &action, lifted) {
        Ok(r) => {
            let basis = MagneticContext::twisted(&ext).and_then(|c| c.corep_basis());
            let gens = basis
                .as_ref()
                .map(|b| (b.len(), b.count(TypeLabel::C)))
                .unwrap_or((0, 0));
            let pass = r.total_even == 12 && (r.invariant.rank_even, r.invariant.rank_odd) == (6, 0) && gens == (2, 2);
            sweep.record(
                "torus/spin_split",
                pass,
                serde_json::to_value(&r).expect("serializable"),
            );
        }
        Err(e) => sweep.record("torus/spin_split", false, json!({ "error": e.to_string() })),
    }
}

fn bloch_checks(sweep: &mut Sweep) {
    for (name, mass, expect_up) in [("bloch/topological", 1.0, 1), ("bloch/trivial", 3.0, 0)] {
        let (model, c4t, sz) = builtin_c4t_model(mass);
        let runs: Result<Vec<ChernResult>, _> = [24, 48, 96]
            .iter()
            .map(|&mesh| {
                invariants(
                    &model,
                    &c4t,
                    &sz,
                    &ChernOptions {
                        mesh,
                        ..Default::default()
                    },
                )
            })
            .collect();
        match runs {
            Ok(rs) => {
                let key = |r: &ChernResult| (r.total, r.spin_up, r.spin_down, r.z2_parity);
                let stable = rs.iter().all(|r| key(r) == key(&rs[0]));
                let r = &rs[0];
                let pass =
                    stable && r.total == 0 && r.spin_up.abs() == expect_up && i64::from(r.z2_parity) == expect_up;
                sweep.record(
                    name,
                    pass,
                    json!({ "mass": mass, "meshes": [24, 48, 96], "results": rs }),
                );
            }
            Err(e) => sweep.record(name, false, json!({ "error": e.to_string() })),
        }
    }
}

/// Theorem, type, periodicity, coefficient, torus and Bloch checks over
/// the catalog. Returns the report and whether everything passed.
pub fn verify_all(catalog: &[CatalogEntry]) -> (Value, bool) {
    let mut sweep = Sweep { checks: Vec::new() };
    for entry in catalog {
        for (name, ctx) in contexts(entry) {
            match ctx {
                Ok(ctx) => {
                    sweep.record_result(format!("theorem/{name}"), theorem_check(&ctx));
                    sweep.record_result(format!("types/{name}"), intertwiner_check(&ctx));
                    let basis = ctx.corep_basis().map_err(|e| e.to_string());
                    sweep.record_result(format!("periodicity/{name}"), basis.and_then(|b| periodicity(&b)));
                }
                Err(e) => sweep.record(format!("theorem/{name}"), false, json!({ "error": e.to_string() })),
            }
        }
    }
    coefficient_checks(&mut sweep, catalog);
    torus_checks(&mut sweep, catalog);
    bloch_checks(&mut sweep);
    let all_pass = sweep.checks.iter().all(|c| c["pass"] == json!(true));
    let failed: Vec<&Value> = sweep
        .checks
        .iter()
        .filter(|c| c["pass"] != json!(true))
        .map(|c| &c["name"])
        .collect();
    let report = json!({
        "catalog_size": catalog.len(),
        "catalog": catalog.iter().map(|e| &e.name).collect::<Vec<_>>(),
        "checks": sweep.checks,
        "failed": failed,
        "all_pass": all_pass,
    });
    (report, all_pass)
}
