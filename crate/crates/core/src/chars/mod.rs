//! Complex character theory of finite groups.
//!
//! Tables are computed numerically from the class-multiplication
//! coefficients (Burnside–Dixon) and then snapped to exact cyclotomic
//! values through the eigenvalue multiplicities of each class
//! representative, so every downstream comparison is exact.

pub mod cyclo;
pub mod realize;

use std::cmp::Ordering;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::groups::{ConjClasses, Group, GroupError};
pub use cyclo::Cyclo;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CharError {
    #[error("numerical degeneracy: {0}")]
    NumericalDegeneracy(String),
    #[error("class functions live on different groups")]
    GroupMismatch,
    #[error("not a subgroup embedding: {0}")]
    NotASubgroup(#[from] GroupError),
    #[error("class function has {got} values, expected {expected}")]
    WrongLength { got: usize, expected: usize },
    #[error("not a character: {0}")]
    NotACharacter(String),
}

/// Conjugacy-class data a class function needs to be evaluated and paired.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassInfo {
    pub group_order: usize,
    pub exponent: u32,
    pub classes: ConjClasses,
    pub sizes: Vec<usize>,
    pub identity_class: usize,
    /// Class of `g⁻¹` for `g` in class `c`.
    pub inverse_class: Vec<usize>,
}

impl ClassInfo {
    pub fn of(group: &Group) -> Arc<Self> {
        let classes = group.conjugacy_classes();
        let sizes = classes.sizes();
        let identity_class = classes.class_of[group.identity()];
        let inverse_class = classes.reps.iter().map(|&g| classes.class_of[group.inv(g)]).collect();
        Arc::new(Self {
            group_order: group.order(),
            exponent: group.exponent() as u32,
            classes,
            sizes,
            identity_class,
            inverse_class,
        })
    }

    pub fn num_classes(&self) -> usize {
        self.sizes.len()
    }
}

#[derive(Debug, Clone)]
pub struct ClassFunction {
    info: Arc<ClassInfo>,
    values: Vec<Cyclo>,
}

impl PartialEq for ClassFunction {
    fn eq(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.info, &other.info) || self.info == other.info) && self.values == other.values
    }
}

impl Eq for ClassFunction {}

impl serde::Serialize for ClassFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.values.serialize(s)
    }
}

impl ClassFunction {
    pub fn new(info: Arc<ClassInfo>, values: Vec<Cyclo>) -> Result<Self, CharError> {
        if values.len() != info.num_classes() {
            return Err(CharError::WrongLength {
                got: values.len(),
                expected: info.num_classes(),
            });
        }
        Ok(Self { info, values })
    }

    pub fn trivial(info: Arc<ClassInfo>) -> Self {
        let values = vec![Cyclo::from_int(info.exponent, 1); info.num_classes()];
        Self { info, values }
    }

    pub fn zero(info: Arc<ClassInfo>) -> Self {
        let values = vec![Cyclo::zero(info.exponent); info.num_classes()];
        Self { info, values }
    }

    /// Character of the regular representation.
    pub fn regular(info: Arc<ClassInfo>) -> Self {
        let mut f = Self::zero(info.clone());
        f.values[info.identity_class] = Cyclo::from_int(info.exponent, info.group_order as i64);
        f
    }

    pub fn info(&self) -> &Arc<ClassInfo> {
        &self.info
    }

    pub fn values(&self) -> &[Cyclo] {
        &self.values
    }

    pub fn value(&self, class: usize) -> &Cyclo {
        &self.values[class]
    }

    pub fn at_element(&self, g: usize) -> &Cyclo {
        &self.values[self.info.classes.class_of[g]]
    }

    /// Value at the identity, as an integer when it is one.
    pub fn degree(&self) -> Option<i64> {
        self.values[self.info.identity_class].as_integer()
    }

    fn same_group(&self, other: &Self) -> Result<(), CharError> {
        if Arc::ptr_eq(&self.info, &other.info) || self.info == other.info {
            Ok(())
        } else {
            Err(CharError::GroupMismatch)
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, CharError> {
        self.same_group(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a.add(b)).collect();
        Ok(Self {
            info: self.info.clone(),
            values,
        })
    }

    pub fn scale(&self, k: i64) -> Self {
        let s = Rational64::from_integer(k);
        Self {
            info: self.info.clone(),
            values: self.values.iter().map(|v| v.scale(s)).collect(),
        }
    }

    pub fn conj(&self) -> Self {
        Self {
            info: self.info.clone(),
            values: self.values.iter().map(Cyclo::conj).collect(),
        }
    }

    /// Pulls values back along a class permutation: `out[c] = self[perm[c]]`.
    pub fn permute_classes(&self, perm: &[usize]) -> Self {
        Self {
            info: self.info.clone(),
            values: perm.iter().map(|&c| self.values[c].clone()).collect(),
        }
    }

    pub fn to_complex(&self) -> Vec<Complex64> {
        self.values.iter().map(Cyclo::to_complex).collect()
    }
}

/// `(1/|G|) Σ_g f(g) conj(h(g))`, exactly.
pub fn inner_product(f: &ClassFunction, h: &ClassFunction) -> Result<Cyclo, CharError> {
    f.same_group(h)?;
    let info = &f.info;
    let mut acc = Cyclo::zero(info.exponent);
    for (c, (a, b)) in f.values.iter().zip(&h.values).enumerate() {
        acc = acc.add(&a.mul(&b.conj()).scale(Rational64::from_integer(info.sizes[c] as i64)));
    }
    Ok(acc.scale(Rational64::new(1, info.group_order as i64)))
}

/// Restricts a class function of `big` to the subgroup `sub`, embedded by
/// `embedding` (subgroup index -> `big` index).
pub fn restrict_character(
    big: &Group,
    sub: &Group,
    embedding: &[usize],
    chi: &ClassFunction,
) -> Result<ClassFunction, CharError> {
    if chi.info.group_order != big.order() {
        return Err(CharError::GroupMismatch);
    }
    sub.check_embedding(big, embedding)?;
    let info = ClassInfo::of(sub);
    let values = info
        .classes
        .reps
        .iter()
        .map(|&r| chi.at_element(embedding[r]).clone())
        .collect();
    Ok(ClassFunction { info, values })
}

#[derive(Debug, Clone)]
pub struct TableOptions {
    pub snap_tol: f64,
    pub seed: u64,
    pub max_attempts: usize,
}

impl Default for TableOptions {
    fn default() -> Self {
        Self {
            snap_tol: 1e-9,
            seed: 0x5eed_c1a5,
            max_attempts: 16,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CharacterTable {
    info: Arc<ClassInfo>,
    rows: Vec<ClassFunction>,
}

impl CharacterTable {
    pub fn info(&self) -> &Arc<ClassInfo> {
        &self.info
    }

    pub fn rows(&self) -> &[ClassFunction] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &ClassFunction {
        &self.rows[i]
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dims(&self) -> Vec<i64> {
        self.rows.iter().map(|r| r.degree().unwrap_or(0)).collect()
    }

    pub fn class_sizes(&self) -> &[usize] {
        &self.info.sizes
    }

    pub fn find_row(&self, f: &ClassFunction) -> Option<usize> {
        self.rows.iter().position(|r| r == f)
    }

    /// Multiplicities of the irreducibles in a character.
    pub fn decompose(&self, f: &ClassFunction) -> Result<Vec<i64>, CharError> {
        self.rows
            .iter()
            .map(|r| {
                let m = inner_product(f, r)?;
                m.as_integer()
                    .ok_or_else(|| CharError::NotACharacter(format!("multiplicity {m}")))
            })
            .collect()
    }

    /// A class function from a list of multiplicities.
    pub fn combine(&self, mult: &[i64]) -> ClassFunction {
        let mut acc = ClassFunction::zero(self.info.clone());
        for (r, &m) in self.rows.iter().zip(mult) {
            if m != 0 {
                acc = acc.add(&r.scale(m)).expect("same table");
            }
        }
        acc
    }
}

pub fn character_table(group: &Group) -> Result<CharacterTable, CharError> {
    character_table_with(group, &TableOptions::default())
}

pub fn character_table_with(group: &Group, opts: &TableOptions) -> Result<CharacterTable, CharError> {
    let info = ClassInfo::of(group);
    let k = info.num_classes();
    let consts = class_constants(group, &info);

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut last_err = None;
    for _ in 0..opts.max_attempts {
        match try_table(group, &info, &consts, &mut rng, opts.snap_tol) {
            Ok(mut rows) => {
                sort_rows(&mut rows);
                debug_assert_eq!(rows.len(), k);
                return Ok(CharacterTable { info, rows });
            }
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.unwrap_or_else(|| CharError::NumericalDegeneracy("no attempts".into())))
}

/// `a[r][s][t] = #{(x, y) ∈ C_r × C_s : x y = g_t}`.
fn class_constants(group: &Group, info: &ClassInfo) -> Vec<Vec<Vec<u32>>> {
    let k = info.num_classes();
    let mut a = vec![vec![vec![0u32; k]; k]; k];
    for (t, &gt) in info.classes.reps.iter().enumerate() {
        for x in 0..group.order() {
            let y = group.mul(group.inv(x), gt);
            let r = info.classes.class_of[x];
            let s = info.classes.class_of[y];
            a[r][s][t] += 1;
        }
    }
    a
}

fn try_table(
    group: &Group,
    info: &Arc<ClassInfo>,
    consts: &[Vec<Vec<u32>>],
    rng: &mut ChaCha8Rng,
    tol: f64,
) -> Result<Vec<ClassFunction>, CharError> {
    let k = info.num_classes();
    let sqrt_h: Vec<f64> = info.sizes.iter().map(|&h| (h as f64).sqrt()).collect();

    // Hermitian combination: c_{r'} = conj(c_r) where r' is the inverse class,
    // since D⁻¹A_rD has adjoint D⁻¹A_{r'}D with D = diag(√h).
    let mut coef = vec![Complex64::new(0.0, 0.0); k];
    for r in 0..k {
        let ri = info.inverse_class[r];
        if ri < r {
            continue;
        }
        let re = rng.random_range(-1.0..1.0);
        if ri == r {
            coef[r] = Complex64::new(re, 0.0);
        } else {
            let im = rng.random_range(-1.0..1.0);
            coef[r] = Complex64::new(re, im);
            coef[ri] = coef[r].conj();
        }
    }
    let mut h = DMatrix::<Complex64>::zeros(k, k);
    for (r, &c) in coef.iter().enumerate() {
        for s in 0..k {
            for t in 0..k {
                let a = consts[r][s][t];
                if a != 0 {
                    h[(s, t)] += c * (a as f64 * sqrt_h[t] / sqrt_h[s]);
                }
            }
        }
    }
    let h = (&h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = h.symmetric_eigen();

    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
    let scale = eig.eigenvalues.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    for w in order.windows(2) {
        if (eig.eigenvalues[w[1]] - eig.eigenvalues[w[0]]).abs() < 1e-7 * scale {
            return Err(CharError::NumericalDegeneracy(
                "random class-sum combination has a repeated eigenvalue".into(),
            ));
        }
    }

    let n = info.group_order as f64;
    let id = info.identity_class;
    let mut rows = Vec::with_capacity(k);
    for &i in &order {
        let u = eig.eigenvectors.column(i);
        let mut omega: Vec<Complex64> = (0..k).map(|s| u[s] * sqrt_h[s]).collect();
        let norm = omega[id];
        if norm.norm() < 1e-12 {
            return Err(CharError::NumericalDegeneracy(
                "eigenvector vanishes at identity".into(),
            ));
        }
        omega.iter_mut().for_each(|w| *w /= norm);
        let denom: f64 = (0..k).map(|s| omega[s].norm_sqr() / info.sizes[s] as f64).sum();
        let d = (n / denom).sqrt();
        let numeric: Vec<Complex64> = (0..k).map(|s| omega[s] * d / info.sizes[s] as f64).collect();
        rows.push(snap_row(group, info, &numeric, tol)?);
    }

    // exact validation
    let mut sum_sq = 0;
    for (i, a) in rows.iter().enumerate() {
        let d = a
            .degree()
            .ok_or_else(|| CharError::NumericalDegeneracy("non-integer degree".into()))?;
        sum_sq += d * d;
        for b in &rows[i..] {
            let ip = inner_product(a, b)?;
            let expect = i64::from(std::ptr::eq(a, b));
            if ip.as_integer() != Some(expect) {
                return Err(CharError::NumericalDegeneracy(format!(
                    "snapped rows fail orthonormality ({ip})"
                )));
            }
        }
    }
    if sum_sq != info.group_order as i64 {
        return Err(CharError::NumericalDegeneracy("sum of squared degrees".into()));
    }
    Ok(rows)
}

const MULTIPLICITY_TOL: f64 = 1e-6;

/// Snaps numeric character values via eigenvalue multiplicities of `ρ(g)`:
/// `m_k = (1/o) Σ_j χ(g^j) ζ_o^{−jk}` must be non-negative integers.
fn snap_row(group: &Group, info: &Arc<ClassInfo>, numeric: &[Complex64], tol: f64) -> Result<ClassFunction, CharError> {
    let e = info.exponent;
    let mut values = Vec::with_capacity(numeric.len());
    for (c, &g) in info.classes.reps.iter().enumerate() {
        let o = group.element_order(g);
        let mut counts = vec![0i64; e as usize];
        for kk in 0..o {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut x = group.identity();
            for j in 0..o {
                let cls = info.classes.class_of[x];
                let angle = -2.0 * std::f64::consts::PI * (j * kk) as f64 / o as f64;
                acc += numeric[cls] * Complex64::from_polar(1.0, angle);
                x = group.mul(x, g);
            }
            acc /= o as f64;
            let m = acc.re.round();
            if (acc - Complex64::new(m, 0.0)).norm() > MULTIPLICITY_TOL || m < 0.0 {
                return Err(CharError::NumericalDegeneracy(format!(
                    "eigenvalue multiplicity {acc} at class {c} is not a non-negative integer"
                )));
            }
            counts[kk * (e as usize / o)] = m as i64;
        }
        let exact = Cyclo::from_exponent_counts(e, &counts);
        if (exact.to_complex() - numeric[c]).norm() > tol {
            return Err(CharError::NumericalDegeneracy(format!(
                "class {c}: |snapped − numeric| exceeds {tol:e}"
            )));
        }
        values.push(exact);
    }
    Ok(ClassFunction {
        info: info.clone(),
        values,
    })
}

fn value_key(v: &Cyclo) -> (i64, i64) {
    let z = v.to_complex();
    ((-z.re * 1e9).round() as i64, (-z.im * 1e9).round() as i64)
}

/// Degree first, then values in class order with `1 < i < −i < −1`.
fn sort_rows(rows: &mut [ClassFunction]) {
    rows.sort_by(|a, b| {
        a.degree().cmp(&b.degree()).then_with(|| {
            for (x, y) in a.values.iter().zip(&b.values) {
                match value_key(x).cmp(&value_key(y)) {
                    Ordering::Equal => continue,
                    o => return o,
                }
            }
            Ordering::Equal
        })
    });
}
