//! Bloch models: Hamiltonian examples, symmetry contracts, gauge
//! invariance and mesh stability of the Chern numbers.

use std::f64::consts::PI;

use magk::bloch::{
    builtin_c4t_model, c4t_op, check_symmetry, chern_block, chern_number, invariants, spin_blocks, sz_op, BlochError,
    CMat, ChernOptions, ModelSpec, SymmetryOp, TightBindingModel,
};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn opts(mesh: usize) -> ChernOptions {
    ChernOptions {
        mesh,
        ..Default::default()
    }
}

/// A 2×2 unitary from Euler angles and a phase.
fn unitary2(a: f64, b: f64, g: f64, p: f64) -> CMat {
    let (ca, sa) = (a.cos(), a.sin());
    let e = |t: f64| Complex64::from_polar(1.0, t);
    DMatrix::from_row_slice(2, 2, &[e(p + b) * ca, e(p + g) * sa, -e(p - g) * sa, e(p - b) * ca])
}

fn block_diag(a: &CMat, b: &CMat) -> CMat {
    let mut m = CMat::zeros(4, 4);
    m.view_mut((0, 0), (2, 2)).copy_from(a);
    m.view_mut((2, 2), (2, 2)).copy_from(b);
    m
}

fn regauge(op: &SymmetryOp, v: &CMat) -> SymmetryOp {
    let u = if op.antiunitary {
        v * &op.u * v.transpose()
    } else {
        v * &op.u * v.adjoint()
    };
    SymmetryOp::new(u, op.antiunitary, op.kmap).unwrap()
}

#[test]
fn hamiltonian_examples() {
    let mut flat = TightBindingModel::new(2, 0.0);
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0, 0.0), c(-1.0, 0.0)]));
    flat.add_hopping((0, 0), d.clone()).unwrap();
    assert_eq!(flat.hamiltonian_at([0.3, 1.7]), d);
    assert_eq!(chern_number(&flat, &opts(12)).unwrap().0, 0);

    let mut nn = TightBindingModel::new(1, 0.0);
    nn.add_hopping((1, 0), CMat::from_element(1, 1, c(1.0, 0.0))).unwrap();
    nn.add_hopping((0, 1), CMat::from_element(1, 1, c(1.0, 0.0))).unwrap();
    for k in [[0.0, 0.0], [0.4, 2.1], [PI, 1.0]] {
        let h = nn.hamiltonian_at(k)[(0, 0)];
        assert!((h - c(2.0 * k[0].cos() + 2.0 * k[1].cos(), 0.0)).norm() < 1e-12);
    }

    for m in [1.0, -1.0, 3.0] {
        let (model, _, _) = builtin_c4t_model(m);
        let mut ev: Vec<f64> = model
            .hamiltonian_at([0.0, 0.0])
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        let e = m + 2.0;
        let want = {
            let mut w = vec![-e, -e, e, e];
            w.sort_by(f64::total_cmp);
            w
        };
        assert!(ev.iter().zip(&want).all(|(a, b)| (a - b).abs() < 1e-12), "{ev:?}");
    }
}

#[test]
fn builtin_symmetries_hold_and_breaking_is_detected() {
    let (model, c4t, sz) = builtin_c4t_model(1.0);
    assert!(check_symmetry(&model, &c4t) < 1e-10);
    assert!(check_symmetry(&model, &sz) < 1e-10);
    assert_eq!(check_symmetry(&model, &SymmetryOp::identity(4)), 0.0);

    let scale = 0.05;
    let mut broken = model.clone();
    let mut t = CMat::zeros(4, 4);
    t[(0, 2)] = c(scale, 0.0);
    t[(2, 0)] = c(scale, 0.0);
    broken.add_hopping((0, 0), t).unwrap();
    assert!(check_symmetry(&broken, &sz) >= scale);
    assert!(matches!(
        spin_blocks(&broken, &sz, 1e-8),
        Err(BlochError::NotSpinConserving { .. })
    ));
    assert!(invariants(&broken, &c4t, &sz, &opts(24)).is_err());
}

#[test]
fn spin_blocks_split_the_builtin_model() {
    let (model, _, sz) = builtin_c4t_model(1.0);
    let (up, down) = spin_blocks(&model, &sz, 1e-8).unwrap();
    assert_eq!((up.n, down.n), (2, 2));
    let block = chern_block(1.0);
    for k in [[0.2, 0.9], [1.3, -2.0]] {
        let h = up.hamiltonian_at(k);
        let w = block.hamiltonian_at(k);
        assert!((h.symmetric_eigenvalues().sum() - w.symmetric_eigenvalues().sum()).abs() < 1e-12);
    }
    let (whole, empty) = spin_blocks(&model, &SymmetryOp::identity(4), 1e-8).unwrap();
    assert_eq!((whole.n, empty.n), (4, 0));
}

#[test]
fn chern_block_phases() {
    let mut signs = Vec::new();
    for m in [-1.5, -1.0, -0.5, 0.5, 1.0, 1.5] {
        let (c24, _) = chern_number(&chern_block(m), &opts(24)).unwrap();
        let (c48, _) = chern_number(&chern_block(m), &opts(48)).unwrap();
        assert_eq!(c24, c48);
        assert_eq!(c24.abs(), 1, "m = {m}");
        signs.push(c24);
    }
    // the sign flips between the two topological phases
    assert_eq!(signs[0], -signs[5]);
    for m in [-3.0, -2.5, 2.5, 3.0] {
        assert_eq!(chern_number(&chern_block(m), &opts(24)).unwrap().0, 0, "m = {m}");
    }
    for m in [0.0, 2.0, -2.0] {
        assert!(matches!(
            chern_number(&chern_block(m), &opts(24)),
            Err(BlochError::GappedAssumptionFailed { .. })
        ));
    }
}

#[test]
fn model_json_round_trips() {
    let (model, c4t, sz) = builtin_c4t_model(1.0);
    let spec = ModelSpec::from_model(&model, &[("c4t", &c4t), ("sz", &sz)]);
    let text = serde_json::to_string(&spec).unwrap();
    let back: ModelSpec = serde_json::from_str(&text).unwrap();
    let m2 = back.to_model().unwrap();
    let k = [0.7, -1.1];
    assert!((m2.hamiltonian_at(k) - model.hamiltonian_at(k)).norm() < 1e-10);
    let r = invariants(
        &m2,
        &back.symmetry("c4t").unwrap().unwrap(),
        &back.symmetry("sz").unwrap().unwrap(),
        &opts(24),
    )
    .unwrap();
    assert_eq!((r.total, r.z2_parity), (0, 1));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// Changing basis by a spin-preserving unitary V leaves every invariant alone.
    #[test]
    fn invariants_are_gauge_invariant(
        angles in proptest::array::uniform8(-3.0f64..3.0),
        mass in prop::sample::select(vec![1.0, -1.0, 3.0]),
    ) {
        let (model, c4t, sz) = builtin_c4t_model(mass);
        let v = block_diag(
            &unitary2(angles[0], angles[1], angles[2], angles[3]),
            &unitary2(angles[4], angles[5], angles[6], angles[7]),
        );
        let moved = model.conjugated(&v);
        let (c2, s2) = (regauge(&c4t, &v), regauge(&sz, &v));
        prop_assert!(check_symmetry(&moved, &c2) < 1e-9);
        let a = invariants(&model, &c4t, &sz, &opts(24)).unwrap();
        let b = invariants(&moved, &c2, &s2, &opts(24)).unwrap();
        prop_assert_eq!((a.total, a.spin_up, a.spin_down, a.z2_parity), (b.total, b.spin_up, b.spin_down, b.z2_parity));
    }
}

#[test]
fn c4t_has_order_four_on_hamiltonians() {
    let op = c4t_op();
    let (model, _, _) = builtin_c4t_model(1.0);
    let twice = op.transform(&op.transform(&model));
    assert!(check_symmetry(&twice, &sz_op()) < 1e-10);
    let four = op.transform(&op.transform(&twice));
    let k = [0.3, 0.8];
    assert!((four.hamiltonian_at(k) - model.hamiltonian_at(k)).norm() < 1e-10);
}
