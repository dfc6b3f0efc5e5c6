//! Explicit unitary matrix realizations of irreducible characters.
//!
//! The isotypic block of the left regular representation is cut down to a
//! single irreducible copy by diagonalizing a random Hermitian element of
//! the commuting right regular action.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{CharError, ClassFunction};
use crate::groups::Group;

pub type CMat = DMatrix<Complex64>;

const TOL: f64 = 1e-8;

fn left_regular(group: &Group, g: usize) -> CMat {
    let n = group.order();
    let mut m = CMat::zeros(n, n);
    for h in 0..n {
        m[(group.mul(g, h), h)] = Complex64::new(1.0, 0.0);
    }
    m
}

/// `ρ(g)` for every element `g`, unitary, with `tr ρ(g) = χ(g)`.
pub fn realize_irreducible(group: &Group, chi: &ClassFunction, seed: u64) -> Result<Vec<CMat>, CharError> {
    let n = group.order();
    let d = chi
        .degree()
        .filter(|&d| d > 0)
        .ok_or_else(|| CharError::NotACharacter("degree is not a positive integer".into()))? as usize;
    let values: Vec<Complex64> = (0..n).map(|g| chi.at_element(g).to_complex()).collect();
    if d == 1 {
        return Ok(values.iter().map(|&v| CMat::from_element(1, 1, v)).collect());
    }

    // isotypic projector (d/|G|) Σ conj(χ(g)) L(g), Hermitian
    let mut proj = CMat::zeros(n, n);
    for (g, v) in values.iter().enumerate() {
        let c = v.conj() * (d as f64 / n as f64);
        for h in 0..n {
            proj[(group.mul(g, h), h)] += c;
        }
    }
    let pe = proj.clone().symmetric_eigen();
    let block: Vec<usize> = (0..n).filter(|&i| pe.eigenvalues[i] > 0.5).collect();
    if block.len() != d * d {
        return Err(CharError::NotACharacter(format!(
            "isotypic block has dimension {}, expected {}",
            block.len(),
            d * d
        )));
    }
    let q = CMat::from_fn(n, d * d, |r, c| pe.eigenvectors[(r, block[c])]);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..16 {
        // Hermitian element Σ c_x R(x) with c_{x⁻¹} = conj(c_x); R(x): e_h ↦ e_{h x⁻¹}
        let mut coef = vec![Complex64::new(0.0, 0.0); n];
        for x in 0..n {
            let xi = group.inv(x);
            if xi < x {
                continue;
            }
            let re = rng.random_range(-1.0..1.0);
            if xi == x {
                coef[x] = Complex64::new(re, 0.0);
            } else {
                coef[x] = Complex64::new(re, rng.random_range(-1.0..1.0));
                coef[xi] = coef[x].conj();
            }
        }
        let mut x_op = CMat::zeros(n, n);
        for (x, &c) in coef.iter().enumerate() {
            let xi = group.inv(x);
            for h in 0..n {
                x_op[(group.mul(h, xi), h)] += c;
            }
        }
        let y = q.adjoint() * &x_op * &q;
        let y = (&y + y.adjoint()) * Complex64::new(0.5, 0.0);
        let ye = y.symmetric_eigen();
        let mut idx: Vec<usize> = (0..d * d).collect();
        idx.sort_by(|&a, &b| ye.eigenvalues[a].partial_cmp(&ye.eigenvalues[b]).unwrap());
        let lowest: Vec<usize> = idx[..d].to_vec();
        let spread = ye.eigenvalues[idx[d - 1]] - ye.eigenvalues[idx[0]];
        let gap = ye.eigenvalues[idx[d]] - ye.eigenvalues[idx[d - 1]];
        if spread > 1e-7 || gap < 1e-6 {
            continue;
        }
        let e = CMat::from_fn(d * d, d, |r, c| ye.eigenvectors[(r, lowest[c])]);
        let w = &q * e;
        let rho: Vec<CMat> = (0..n).map(|g| w.adjoint() * left_regular(group, g) * &w).collect();
        if verify(group, &rho, &values) {
            return Ok(rho);
        }
    }
    Err(CharError::NumericalDegeneracy(
        "could not isolate an irreducible summand".into(),
    ))
}

fn verify(group: &Group, rho: &[CMat], values: &[Complex64]) -> bool {
    let n = group.order();
    for a in 0..n {
        if (rho[a].trace() - values[a]).norm() > TOL {
            return false;
        }
        for b in 0..n {
            if (&rho[a] * &rho[b] - &rho[group.mul(a, b)]).norm() > TOL {
                return false;
            }
        }
    }
    true
}
