//! Tight-binding models on the Brillouin torus, their symmetries, and
//! spin-resolved Chern numbers from discretized Berry flux.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type CMat = DMatrix<Complex64>;
pub type KMap = [[i64; 2]; 2];

const HERMITIAN_TOL: f64 = 1e-12;
const VALIDATION_MESH: usize = 12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BlochError {
    #[error("hopping at {0:?} is not the adjoint of the hopping at the opposite displacement")]
    NotHermitian([i32; 2]),
    #[error("matrix has shape {got:?}, expected {expected}x{expected}")]
    DimensionMismatch { expected: usize, got: (usize, usize) },
    #[error("symmetry matrix is not unitary (residual {0:.3e})")]
    NotUnitary(f64),
    #[error("kmap is not invertible over Z")]
    BadKmap,
    #[error("Sz does not square to the identity")]
    NotAnInvolution,
    #[error("Hamiltonian does not commute with Sz (residual {residual:.3e})")]
    NotSpinConserving { residual: f64 },
    #[error("gap {gap:.3e} at k = ({:.4}, {:.4}) is below tolerance", k[0], k[1])]
    GappedAssumptionFailed { k: [f64; 2], gap: f64 },
    #[error("Chern number {coarse} at mesh {mesh} but {fine} at mesh {}", 2 * mesh)]
    NonConvergent { mesh: usize, coarse: i64, fine: i64 },
    #[error("{op} symmetry violated (residual {residual:.3e})")]
    SymmetryViolated { op: String, residual: f64 },
    #[error("total Chern {total} but spin sectors give {spin_up} + {spin_down}")]
    InconsistentTotal { total: i64, spin_up: i64, spin_down: i64 },
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn check_square(m: &CMat, n: usize) -> Result<(), BlochError> {
    if m.shape() != (n, n) {
        return Err(BlochError::DimensionMismatch {
            expected: n,
            got: m.shape(),
        });
    }
    Ok(())
}

fn op_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().max()
}

/// `H(k) = Σ_d t_d e^{i k·d}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TightBindingModel {
    pub n: usize,
    pub hoppings: BTreeMap<(i32, i32), CMat>,
    pub fermi: f64,
}

impl TightBindingModel {
    pub fn new(n: usize, fermi: f64) -> Self {
        Self {
            n,
            hoppings: BTreeMap::new(),
            fermi,
        }
    }

    /// Adds `t` at `d` and `t†` at `−d`.
    pub fn add_hopping(&mut self, d: (i32, i32), t: CMat) -> Result<(), BlochError> {
        check_square(&t, self.n)?;
        let zero = || CMat::zeros(self.n, self.n);
        if d == (0, 0) {
            let h = (&t + t.adjoint()) * c(0.5, 0.0);
            *self.hoppings.entry(d).or_insert_with(zero) += h;
        } else {
            *self.hoppings.entry(d).or_insert_with(zero) += &t;
            *self.hoppings.entry((-d.0, -d.1)).or_insert_with(zero) += t.adjoint();
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), BlochError> {
        for (&(x, y), t) in &self.hoppings {
            check_square(t, self.n)?;
            let back = self
                .hoppings
                .get(&(-x, -y))
                .cloned()
                .unwrap_or_else(|| CMat::zeros(self.n, self.n));
            if (t - back.adjoint()).norm() > HERMITIAN_TOL * (1.0 + t.norm()) {
                return Err(BlochError::NotHermitian([x, y]));
            }
        }
        Ok(())
    }

    pub fn hamiltonian_at(&self, k: [f64; 2]) -> CMat {
        let mut h = CMat::zeros(self.n, self.n);
        for (&(x, y), t) in &self.hoppings {
            let phase = Complex64::from_polar(1.0, k[0] * x as f64 + k[1] * y as f64);
            h += t * phase;
        }
        (&h + h.adjoint()) * c(0.5, 0.0)
    }

    /// `U t U†` on every hopping, for a k-independent change of basis.
    pub fn conjugated(&self, u: &CMat) -> Self {
        Self {
            n: self.n,
            hoppings: self.hoppings.iter().map(|(&d, t)| (d, u * t * u.adjoint())).collect(),
            fermi: self.fermi,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&d, t) in &other.hoppings {
            *out.hoppings.entry(d).or_insert_with(|| CMat::zeros(self.n, self.n)) += t;
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            n: self.n,
            hoppings: self.hoppings.iter().map(|(&d, t)| (d, t * c(s, 0.0))).collect(),
            fermi: self.fermi,
        }
    }

    /// `Σ_d ‖t_d‖`, a bound on `sup_k ‖H(k)‖`.
    pub fn hopping_norm(&self) -> f64 {
        self.hoppings.values().map(op_norm).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryOp {
    pub u: CMat,
    pub antiunitary: bool,
    pub kmap: KMap,
}

fn kmap_det(m: &KMap) -> i64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

impl SymmetryOp {
    pub fn new(u: CMat, antiunitary: bool, kmap: KMap) -> Result<Self, BlochError> {
        let n = u.nrows();
        check_square(&u, n)?;
        let r = (u.adjoint() * &u - CMat::identity(n, n)).norm();
        if r > 1e-10 {
            return Err(BlochError::NotUnitary(r));
        }
        if kmap_det(&kmap).abs() != 1 {
            return Err(BlochError::BadKmap);
        }
        Ok(Self { u, antiunitary, kmap })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            u: CMat::identity(n, n),
            antiunitary: false,
            kmap: [[1, 0], [0, 1]],
        }
    }

    fn map_k(&self, k: [f64; 2]) -> [f64; 2] {
        let m = &self.kmap;
        [
            m[0][0] as f64 * k[0] + m[0][1] as f64 * k[1],
            m[1][0] as f64 * k[0] + m[1][1] as f64 * k[1],
        ]
    }

    /// `U·H(k)·U†` or `U·conj(H(k))·U†`.
    fn act(&self, h: &CMat) -> CMat {
        let h = if self.antiunitary {
            h.map(|z| z.conj())
        } else {
            h.clone()
        };
        &self.u * h * self.u.adjoint()
    }

    /// The model `k ↦ U·H(M⁻¹k)·U†` (conjugated for antiunitary ops), as
    /// hoppings: `t_d` moves to `±M⁻ᵀd`.
    pub fn transform(&self, model: &TightBindingModel) -> TightBindingModel {
        let m = &self.kmap;
        let det = kmap_det(m);
        // M⁻ᵀ for det ±1
        let mit = [[m[1][1] * det, -m[1][0] * det], [-m[0][1] * det, m[0][0] * det]];
        let s = if self.antiunitary { -1 } else { 1 };
        let hoppings = model
            .hoppings
            .iter()
            .map(|(&(x, y), t)| {
                let dx = s * (mit[0][0] * x as i64 + mit[0][1] * y as i64);
                let dy = s * (mit[1][0] * x as i64 + mit[1][1] * y as i64);
                ((dx as i32, dy as i32), self.act(t))
            })
            .collect();
        TightBindingModel {
            n: model.n,
            hoppings,
            fermi: model.fermi,
        }
    }
}

fn validation_points() -> Vec<[f64; 2]> {
    let n = VALIDATION_MESH;
    let mut pts = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            // offset avoids testing only high-symmetry points
            pts.push([
                2.0 * PI * (i as f64 + 0.29) / n as f64,
                2.0 * PI * (j as f64 + 0.577) / n as f64,
            ]);
        }
    }
    pts
}

/// `sup_k ‖act(H(k)) − H(Mk)‖` over a validation mesh.
pub fn check_symmetry(model: &TightBindingModel, op: &SymmetryOp) -> f64 {
    validation_points()
        .into_iter()
        .map(|k| op_norm(&(op.act(&model.hamiltonian_at(k)) - model.hamiltonian_at(op.map_k(k)))))
        .fold(0.0, f64::max)
}

/// Averages the model over the cyclic group generated by `op`, whose action
/// on Hamiltonians has the given order.
pub fn symmetrize(model: &TightBindingModel, op: &SymmetryOp, order: usize) -> TightBindingModel {
    let mut acc = model.clone();
    let mut cur = model.clone();
    for _ in 1..order {
        cur = op.transform(&cur);
        acc = acc.add(&cur);
    }
    acc.scale(1.0 / order as f64)
}

fn orthonormal_columns(p: &CMat) -> CMat {
    let mut cols: Vec<nalgebra::DVector<Complex64>> = Vec::new();
    for j in 0..p.ncols() {
        let mut v = p.column(j).into_owned();
        for q in &cols {
            let proj = q.dotc(&v);
            v -= q * proj;
        }
        let nv = v.norm();
        if nv > 1e-8 {
            cols.push(v / c(nv, 0.0));
        }
    }
    if cols.is_empty() {
        CMat::zeros(p.nrows(), 0)
    } else {
        CMat::from_columns(&cols)
    }
}

/// Blocks on the `+1` and `−1` eigenspaces of `sz.u`.
pub fn spin_blocks(
    model: &TightBindingModel,
    sz: &SymmetryOp,
    tol: f64,
) -> Result<(TightBindingModel, TightBindingModel), BlochError> {
    let n = model.n;
    check_square(&sz.u, n)?;
    let id = CMat::identity(n, n);
    if (&sz.u * &sz.u - &id).norm() > 1e-10 {
        return Err(BlochError::NotAnInvolution);
    }
    let residual = validation_points()
        .into_iter()
        .map(|k| {
            let h = model.hamiltonian_at(k);
            op_norm(&(&h * &sz.u - &sz.u * &h))
        })
        .fold(0.0, f64::max);
    if residual > tol {
        return Err(BlochError::NotSpinConserving { residual });
    }
    let block = |sign: f64| {
        let v = orthonormal_columns(&((&id + &sz.u * c(sign, 0.0)) * c(0.5, 0.0)));
        TightBindingModel {
            n: v.ncols(),
            hoppings: model.hoppings.iter().map(|(&d, t)| (d, v.adjoint() * t * &v)).collect(),
            fermi: model.fermi,
        }
    };
    Ok((block(1.0), block(-1.0)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChernOptions {
    pub mesh: usize,
    /// Gap tolerance relative to the spectral width.
    pub gap_rel_tol: f64,
    pub symmetry_tol: f64,
}

impl Default for ChernOptions {
    fn default() -> Self {
        Self {
            mesh: 48,
            gap_rel_tol: 1e-6,
            symmetry_tol: 1e-8,
        }
    }
}

struct Frames {
    frames: Vec<CMat>,
    gap_min: f64,
}

/// Valence frames on the `N×N` mesh, with gap bookkeeping.
fn valence_frames(model: &TightBindingModel, mesh: usize, gap_rel_tol: f64) -> Result<Frames, BlochError> {
    let n = model.n;
    let mut frames = Vec::with_capacity(mesh * mesh);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut worst = (f64::INFINITY, [0.0, 0.0]);
    let mut nval = None;
    for i in 0..mesh {
        for j in 0..mesh {
            let k = [2.0 * PI * i as f64 / mesh as f64, 2.0 * PI * j as f64 / mesh as f64];
            let e = model.hamiltonian_at(k).symmetric_eigen();
            let mut idx: Vec<usize> = (0..n).collect();
            idx.sort_by(|&a, &b| e.eigenvalues[a].total_cmp(&e.eigenvalues[b]));
            let occ: Vec<usize> = idx
                .iter()
                .copied()
                .filter(|&a| e.eigenvalues[a] < model.fermi)
                .collect();
            if let Some(&a) = idx.first() {
                lo = lo.min(e.eigenvalues[a]);
                hi = hi.max(e.eigenvalues[idx[n - 1]]);
            }
            let top_v = occ.last().map_or(f64::NEG_INFINITY, |&a| e.eigenvalues[a]);
            let bot_c = idx.get(occ.len()).map_or(f64::INFINITY, |&a| e.eigenvalues[a]);
            let gap = bot_c - top_v;
            if gap < worst.0 {
                worst = (gap, k);
            }
            if *nval.get_or_insert(occ.len()) != occ.len() {
                return Err(BlochError::GappedAssumptionFailed { k, gap: 0.0 });
            }
            frames.push(CMat::from_fn(n, occ.len(), |r, col| e.eigenvectors[(r, occ[col])]));
        }
    }
    let width = if hi > lo { hi - lo } else { 1.0 };
    if n > 0 && worst.0 <= gap_rel_tol * width {
        return Err(BlochError::GappedAssumptionFailed {
            k: worst.1,
            gap: worst.0,
        });
    }
    Ok(Frames {
        frames,
        gap_min: if n == 0 { 0.0 } else { worst.0 },
    })
}

fn link(a: &CMat, b: &CMat) -> Complex64 {
    if a.ncols() == 0 {
        return c(1.0, 0.0);
    }
    let d = (a.adjoint() * b).determinant();
    d / d.norm()
}

/// Flux sum over plaquettes `k → k+x̂ → k+x̂+ŷ → k+ŷ`, each taken on the
/// principal branch `(−π, π]`; returns the raw real value and the gap.
fn flux(model: &TightBindingModel, mesh: usize, gap_rel_tol: f64) -> Result<(f64, f64), BlochError> {
    let f = valence_frames(model, mesh, gap_rel_tol)?;
    let at = |i: usize, j: usize| &f.frames[(i % mesh) * mesh + (j % mesh)];
    let mut total = 0.0;
    for i in 0..mesh {
        for j in 0..mesh {
            let u1 = link(at(i, j), at(i + 1, j));
            let u2 = link(at(i + 1, j), at(i + 1, j + 1));
            let u3 = link(at(i, j + 1), at(i + 1, j + 1));
            let u4 = link(at(i, j), at(i, j + 1));
            total += (u1 * u2 * u3.conj() * u4.conj()).arg();
        }
    }
    Ok((total / (2.0 * PI), f.gap_min))
}

/// Chern number of the valence bundle at mesh `N`, confirmed at `2N`.
/// Returns the integer and the minimal gap at mesh `N`.
pub fn chern_number(model: &TightBindingModel, opts: &ChernOptions) -> Result<(i64, f64), BlochError> {
    let (coarse, gap) = flux(model, opts.mesh, opts.gap_rel_tol)?;
    let (fine, _) = flux(model, 2 * opts.mesh, opts.gap_rel_tol)?;
    let (a, b) = (coarse.round() as i64, fine.round() as i64);
    if a != b || (coarse - coarse.round()).abs() > 1e-6 {
        return Err(BlochError::NonConvergent {
            mesh: opts.mesh,
            coarse: a,
            fine: b,
        });
    }
    Ok((a, gap))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChernResult {
    pub total: i64,
    pub spin_up: i64,
    pub spin_down: i64,
    pub z2_parity: u8,
    pub gap_min: f64,
    pub mesh: usize,
}

pub fn invariants(
    model: &TightBindingModel,
    c4t: &SymmetryOp,
    sz: &SymmetryOp,
    opts: &ChernOptions,
) -> Result<ChernResult, BlochError> {
    model.validate()?;
    for (name, op) in [("C4T", c4t), ("Sz", sz)] {
        let r = check_symmetry(model, op);
        if r > opts.symmetry_tol {
            return Err(BlochError::SymmetryViolated {
                op: name.into(),
                residual: r,
            });
        }
    }
    let (up, down) = spin_blocks(model, sz, opts.symmetry_tol)?;
    let (total, gap) = chern_number(model, opts)?;
    let (spin_up, _) = chern_number(&up, opts)?;
    let (spin_down, _) = chern_number(&down, opts)?;
    if total != spin_up + spin_down || total != 0 {
        return Err(BlochError::InconsistentTotal {
            total,
            spin_up,
            spin_down,
        });
    }
    Ok(ChernResult {
        total,
        spin_up,
        spin_down,
        z2_parity: spin_up.rem_euclid(2) as u8,
        gap_min: (gap * 1e12).round() / 1e12,
        mesh: opts.mesh,
    })
}

fn pauli() -> [CMat; 4] {
    let m = |a: [Complex64; 4]| CMat::from_row_slice(2, 2, &a);
    let (o, l, i) = (c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0));
    [m([l, o, o, l]), m([o, l, l, o]), m([o, -i, i, o]), m([l, o, o, -l])]
}

fn block_diag(a: &CMat, b: &CMat) -> CMat {
    let (n, m) = (a.nrows(), b.nrows());
    let mut out = CMat::zeros(n + m, n + m);
    out.view_mut((0, 0), (n, n)).copy_from(a);
    out.view_mut((n, n), (m, m)).copy_from(b);
    out
}

/// `h(k) = sin kx σx + sin ky σy + (m + cos kx + cos ky) σz`
pub fn chern_block(mass: f64) -> TightBindingModel {
    let [_, sx, sy, sz] = pauli();
    let mut model = TightBindingModel::new(2, 0.0);
    let half = c(0.5, 0.0);
    let mi = c(0.0, -0.5);
    // sin k = (e^{ik} − e^{−ik})/2i, cos k = (e^{ik} + e^{−ik})/2
    model.add_hopping((0, 0), &sz * c(mass, 0.0)).unwrap();
    model.add_hopping((1, 0), &sx * mi + &sz * half).unwrap();
    model.add_hopping((0, 1), &sy * mi + &sz * half).unwrap();
    model
}

pub const C4T_KMAP: KMap = [[0, 1], [-1, 0]];

/// The C4T antiunitary on `C² ⊗ C²` (spin ⊗ orbital): `[[0, iσz], [I, 0]]`.
pub fn c4t_op() -> SymmetryOp {
    let [s0, _, _, sz] = pauli();
    let mut u = CMat::zeros(4, 4);
    u.view_mut((0, 2), (2, 2)).copy_from(&(&sz * c(0.0, 1.0)));
    u.view_mut((2, 0), (2, 2)).copy_from(&s0);
    SymmetryOp::new(u, true, C4T_KMAP).expect("unitary")
}

pub fn sz_op() -> SymmetryOp {
    let d = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![
        c(1.0, 0.0),
        c(1.0, 0.0),
        c(-1.0, 0.0),
        c(-1.0, 0.0),
    ]));
    SymmetryOp::new(d, false, [[1, 0], [0, 1]]).expect("unitary")
}

/// Four-band model whose spin-up block is `chern_block(mass)` and whose
/// spin-down block is forced by C4T: `h↓(Mk) = conj(h↑(k))`.
pub fn builtin_c4t_model(mass: f64) -> (TightBindingModel, SymmetryOp, SymmetryOp) {
    let up = chern_block(mass);
    let c4t = c4t_op();
    // the C4T image of the up block, read off in its lower-right corner
    let partner = SymmetryOp {
        u: CMat::identity(2, 2),
        antiunitary: true,
        kmap: C4T_KMAP,
    }
    .transform(&up);
    let mut model = TightBindingModel::new(4, 0.0);
    let zero = CMat::zeros(2, 2);
    let keys: std::collections::BTreeSet<_> = up.hoppings.keys().chain(partner.hoppings.keys()).copied().collect();
    for d in keys {
        let a = up.hoppings.get(&d).unwrap_or(&zero);
        let b = partner.hoppings.get(&d).unwrap_or(&zero);
        model.hoppings.insert(d, block_diag(a, b));
    }
    (model, c4t, sz_op())
}

/// Random hoppings of operator-norm sum `scale · model.hopping_norm()`,
/// averaged over C4T (order 4 on Hamiltonians) and Sz (order 2).
pub fn random_symmetric_perturbation(
    model: &TightBindingModel,
    c4t: &SymmetryOp,
    sz: &SymmetryOp,
    scale: f64,
    seed: u64,
) -> TightBindingModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = model.n;
    let mut p = TightBindingModel::new(n, model.fermi);
    for d in [(0, 0), (1, 0), (0, 1), (1, 1), (1, -1), (2, 0), (0, 2)] {
        let t = CMat::from_fn(n, n, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        p.add_hopping(d, t).expect("square");
    }
    let p = symmetrize(&symmetrize(&p, c4t, 4), sz, 2);
    let norm = p.hopping_norm();
    let target = scale * model.hopping_norm();
    model.add(&p.scale(if norm > 0.0 { target / norm } else { 0.0 }))
}

/// JSON form: `{"bands", "fermi", "hoppings": [{"d", "t"}], "symmetries"}`
/// with matrices as row-major lists of `[re, im]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub bands: usize,
    pub fermi: f64,
    pub hoppings: Vec<HoppingSpec>,
    #[serde(default)]
    pub symmetries: BTreeMap<String, SymmetrySpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HoppingSpec {
    pub d: [i32; 2],
    pub t: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymmetrySpec {
    #[serde(rename = "U")]
    pub u: Vec<[f64; 2]>,
    pub antiunitary: bool,
    pub kmap: KMap,
}

fn matrix_from(n: usize, entries: &[[f64; 2]]) -> Result<CMat, BlochError> {
    if entries.len() != n * n {
        return Err(BlochError::DimensionMismatch {
            expected: n,
            got: (entries.len(), 1),
        });
    }
    Ok(CMat::from_row_iterator(n, n, entries.iter().map(|&[re, im]| c(re, im))))
}

fn matrix_to(m: &CMat) -> Vec<[f64; 2]> {
    let r = |x: f64| {
        let y = (x * 1e12).round() / 1e12;
        if y == 0.0 {
            0.0
        } else {
            y
        }
    };
    (0..m.nrows())
        .flat_map(|i| (0..m.ncols()).map(move |j| (i, j)))
        .map(|(i, j)| [r(m[(i, j)].re), r(m[(i, j)].im)])
        .collect()
}

impl ModelSpec {
    pub fn to_model(&self) -> Result<TightBindingModel, BlochError> {
        let mut model = TightBindingModel::new(self.bands, self.fermi);
        for h in &self.hoppings {
            let t = matrix_from(self.bands, &h.t)?;
            *model
                .hoppings
                .entry((h.d[0], h.d[1]))
                .or_insert_with(|| CMat::zeros(self.bands, self.bands)) += t;
        }
        model.validate()?;
        Ok(model)
    }

    pub fn symmetry(&self, name: &str) -> Option<Result<SymmetryOp, BlochError>> {
        self.symmetries.get(name).map(|s| {
            let u = matrix_from(self.bands, &s.u)?;
            SymmetryOp::new(u, s.antiunitary, s.kmap)
        })
    }

    pub fn from_model(model: &TightBindingModel, symmetries: &[(&str, &SymmetryOp)]) -> Self {
        Self {
            bands: model.n,
            fermi: model.fermi,
            hoppings: model
                .hoppings
                .iter()
                .map(|(&(x, y), t)| HoppingSpec {
                    d: [x, y],
                    t: matrix_to(t),
                })
                .collect(),
            symmetries: symmetries
                .iter()
                .map(|(name, op)| {
                    (
                        name.to_string(),
                        SymmetrySpec {
                            u: matrix_to(&op.u),
                            antiunitary: op.antiunitary,
                            kmap: op.kmap,
                        },
                    )
                })
                .collect(),
        }
    }
}
