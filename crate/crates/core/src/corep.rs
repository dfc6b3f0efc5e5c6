//! The magnetic layer over a finite magnetic group `G`: the conjugation
//! involution `W ↦ a₀*W̄` on `R(G₀)`, the real/complex/quaternionic type of
//! each magnetic irreducible, the generators of the corepresentation ring,
//! and an exact check that restriction to `G₀` is a rational isomorphism
//! onto the involution-invariant part.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::chars::realize::realize_irreducible;
use crate::chars::{character_table, inner_product, CharError, CharacterTable, ClassFunction, Cyclo};
use crate::groups::{CentralExtensionZ2, Group, GroupError, MagneticGroup};
use crate::linalg;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CorepError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Char(#[from] CharError),
    #[error("not irreducible: <chi, chi> = {0}")]
    NotIrreducible(String),
    #[error("element {0} is not antiunitary")]
    NotAntiunitary(usize),
    #[error("theorem violated (implementation bug): {0}")]
    TheoremViolated(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum TypeLabel {
    R,
    C,
    H,
}

impl TypeLabel {
    pub fn from_indicator(v: i8) -> Self {
        match v {
            1 => TypeLabel::R,
            0 => TypeLabel::C,
            _ => TypeLabel::H,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IrrepClass {
    pub index: usize,
    pub label: TypeLabel,
    /// The conjugate irreducible; equals `index` for types R and H.
    pub partner: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Generator {
    pub label: TypeLabel,
    pub restricted_char: ClassFunction,
    /// `(irreducible index, multiplicity)`, ascending in index.
    pub constituents: Vec<(usize, i64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorepBasis {
    pub generators: Vec<Generator>,
}

impl CorepBasis {
    pub fn count(&self, label: TypeLabel) -> usize {
        self.generators.iter().filter(|g| g.label == label).count()
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RestrictionMatrix {
    /// One row per generator of the corepresentation ring.
    pub rows: Vec<Vec<i64>>,
    /// Irreducible index of each column, grouped by involution orbit.
    pub columns: Vec<usize>,
    /// The involution as a permutation of column positions.
    pub involution: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IsoReport {
    pub image_invariant: bool,
    pub rank_magnetic: usize,
    pub rank_invariants: usize,
    pub cokernel_torsion: Vec<i64>,
}

/// A magnetic group together with the character table of `G₀` and the
/// chosen antiunitary element `a₀`. For a twisted context only the
/// irreducibles on which the central element acts by `−1` are active.
#[derive(Debug, Clone)]
pub struct MagneticContext {
    group: MagneticGroup,
    g0: Group,
    embed: Vec<usize>,
    back: Vec<usize>,
    a0: usize,
    table: CharacterTable,
    central: Option<usize>,
}

impl MagneticContext {
    /// Uses the smallest antiunitary element index as `a₀`.
    pub fn new(group: MagneticGroup) -> Result<Self, CorepError> {
        let a0 = group.antiunitary_elements()[0];
        Self::build(group, a0, None)
    }

    pub fn with_a0(group: MagneticGroup, a0: usize) -> Result<Self, CorepError> {
        Self::build(group, a0, None)
    }

    /// Context of the total group of a central Z2-extension, restricted to
    /// the twisted sector.
    pub fn twisted(ext: &CentralExtensionZ2) -> Result<Self, CorepError> {
        let a0 = ext.total.antiunitary_elements()[0];
        Self::build(ext.total.clone(), a0, Some(ext.z))
    }

    fn build(group: MagneticGroup, a0: usize, z: Option<usize>) -> Result<Self, CorepError> {
        if a0 >= group.order() || group.phi(a0) != 1 {
            return Err(CorepError::NotAntiunitary(a0));
        }
        let (g0, embed) = group.kernel();
        let mut back = vec![usize::MAX; group.order()];
        for (i, &g) in embed.iter().enumerate() {
            back[g] = i;
        }
        let table = character_table(&g0)?;
        Ok(Self {
            central: z.map(|z| back[z]),
            group,
            g0,
            embed,
            back,
            a0,
            table,
        })
    }

    pub fn group(&self) -> &MagneticGroup {
        &self.group
    }

    pub fn g0(&self) -> &Group {
        &self.g0
    }

    /// `G₀` index -> `G` index.
    pub fn embedding(&self) -> &[usize] {
        &self.embed
    }

    pub fn a0(&self) -> usize {
        self.a0
    }

    pub fn table(&self) -> &CharacterTable {
        &self.table
    }

    pub fn is_twisted(&self) -> bool {
        self.central.is_some()
    }

    /// Irreducibles of `G₀` in play: all of them, or those with
    /// `χ(z) = −χ(e)` in a twisted context.
    pub fn active_irreps(&self) -> Vec<usize> {
        match self.central {
            None => (0..self.table.len()).collect(),
            Some(z) => (0..self.table.len())
                .filter(|&i| {
                    let r = self.table.row(i);
                    *r.at_element(z) == r.value(r.info().identity_class).neg()
                })
                .collect(),
        }
    }

    /// Class permutation induced by `g ↦ a g a⁻¹` on `G₀`.
    fn conjugation_classes(&self, a: usize) -> Vec<usize> {
        let info = self.table.info();
        let g = self.group.group();
        info.classes
            .reps
            .iter()
            .map(|&r| info.classes.class_of[self.back[g.conj(a, self.embed[r])]])
            .collect()
    }

    /// `χ̂(g) = conj(χ(a₀ g a₀⁻¹))`
    pub fn conjugate_character(&self, chi: &ClassFunction) -> ClassFunction {
        self.conjugate_with(self.a0, chi)
    }

    fn conjugate_with(&self, a: usize, chi: &ClassFunction) -> ClassFunction {
        chi.permute_classes(&self.conjugation_classes(a)).conj()
    }

    /// The involution on all irreducibles of `G₀` induced by `a₀`.
    pub fn involution(&self) -> Vec<usize> {
        self.involution_with(self.a0).expect("a0 is antiunitary")
    }

    /// The permutation of irreducibles induced by any antiunitary `a`.
    pub fn involution_with(&self, a: usize) -> Result<Vec<usize>, CorepError> {
        if self.group.phi(a) != 1 {
            return Err(CorepError::NotAntiunitary(a));
        }
        self.table
            .rows()
            .iter()
            .map(|r| {
                let c = self.conjugate_with(a, r);
                self.table
                    .find_row(&c)
                    .ok_or_else(|| CorepError::TheoremViolated("conjugate of an irreducible is not irreducible".into()))
            })
            .collect()
    }

    /// `(1/|G₀|) Σ_{a ∉ G₀} χ(a²)`, in `{+1, 0, −1}`.
    pub fn dimmock_indicator(&self, chi: &ClassFunction) -> Result<i8, CorepError> {
        let norm = inner_product(chi, chi)?;
        if norm.as_integer() != Some(1) {
            return Err(CorepError::NotIrreducible(norm.to_string()));
        }
        let g = self.group.group();
        let mut acc = Cyclo::zero(self.table.info().exponent);
        for a in self.group.antiunitary_elements() {
            acc = acc.add(chi.at_element(self.back[g.mul(a, a)]));
        }
        let v = acc
            .scale(num_rational::Rational64::new(1, self.g0.order() as i64))
            .as_integer()
            .filter(|v| (-1..=1).contains(v))
            .ok_or_else(|| CorepError::TheoremViolated(format!("indicator sum {acc} is not in {{-1,0,1}}")))?
            as i8;
        let self_conj = self.conjugate_character(chi) == *chi;
        if self_conj == (v == 0) {
            return Err(CorepError::TheoremViolated(format!(
                "indicator {v} inconsistent with self-conjugacy {self_conj}"
            )));
        }
        Ok(v)
    }

    pub fn classify_irreps(&self) -> Result<Vec<IrrepClass>, CorepError> {
        let inv = self.involution();
        self.active_irreps()
            .into_iter()
            .map(|i| {
                let v = self.dimmock_indicator(self.table.row(i))?;
                Ok(IrrepClass {
                    index: i,
                    label: TypeLabel::from_indicator(v),
                    partner: inv[i],
                })
            })
            .collect()
    }

    /// One generator per involution orbit, ordered by type then constituents.
    pub fn corep_basis(&self) -> Result<CorepBasis, CorepError> {
        let mut generators = Vec::new();
        for c in self.classify_irreps()? {
            let row = self.table.row(c.index);
            let (restricted_char, constituents) = match c.label {
                TypeLabel::R => (row.clone(), vec![(c.index, 1)]),
                TypeLabel::H => (row.scale(2), vec![(c.index, 2)]),
                TypeLabel::C => {
                    if c.partner < c.index {
                        continue;
                    }
                    let sum = row.add(self.table.row(c.partner))?;
                    (sum, vec![(c.index, 1), (c.partner, 1)])
                }
            };
            generators.push(Generator {
                label: c.label,
                restricted_char,
                constituents,
            });
        }
        generators.sort_by(|a, b| a.label.cmp(&b.label).then_with(|| a.constituents.cmp(&b.constituents)));
        Ok(CorepBasis { generators })
    }

    pub fn restriction_matrix(&self) -> Result<RestrictionMatrix, CorepError> {
        let basis = self.corep_basis()?;
        Ok(restriction_matrix_of(&basis, &self.involution()))
    }

    pub fn verify_rational_iso(&self) -> Result<IsoReport, CorepError> {
        let m = self.restriction_matrix()?;
        let report = iso_report(&m);
        if !report.image_invariant {
            return Err(CorepError::TheoremViolated("restriction image is not invariant".into()));
        }
        if report.rank_magnetic != report.rank_invariants || report.rank_magnetic != m.rows.len() {
            return Err(CorepError::TheoremViolated(format!(
                "rank {} of the corepresentation ring vs {} invariants",
                report.rank_magnetic, report.rank_invariants
            )));
        }
        Ok(report)
    }

    /// Type of a self-conjugate irreducible decided through an explicit
    /// intertwiner `T` with `ρ' = T⁻¹ρT`, `ρ'(h) = conj(ρ(a₀ h a₀⁻¹))`, by the
    /// sign in `ρ(a₀⁻²) = ±T T̄`. Returns `None` when no intertwiner exists.
    pub fn intertwiner_type(&self, index: usize) -> Result<Option<TypeLabel>, CorepError> {
        let chi = self.table.row(index);
        let rho = realize_irreducible(&self.g0, chi, 0x1f7e_2b00 + index as u64)?;
        let d = rho[0].nrows();
        let g = self.group.group();
        let n0 = self.g0.order();
        let one = DMatrix::<Complex64>::identity(d, d);
        let mut gram = DMatrix::<Complex64>::zeros(d * d, d * d);
        for h in 0..n0 {
            let hc = self.back[g.conj(self.a0, self.embed[h])];
            let rho_p = rho[hc].map(|z| z.conj());
            let k = one.kronecker(&rho[h]) - rho_p.transpose().kronecker(&one);
            gram += k.adjoint() * k;
        }
        let eig = gram.symmetric_eigen();
        let null: Vec<usize> = (0..d * d).filter(|&i| eig.eigenvalues[i].abs() < 1e-8).collect();
        match null.len() {
            0 => Ok(None),
            1 => {
                let v = eig.eigenvectors.column(null[0]);
                let t = DMatrix::from_fn(d, d, |r, c| v[c * d + r]);
                let tt = &t * t.map(|z| z.conj());
                let a0_sq_inv = self.back[g.inv(g.mul(self.a0, self.a0))];
                let target = &rho[a0_sq_inv];
                let c = (target.adjoint() * &tt).trace() / d as f64;
                if (&tt - target * c).norm() > 1e-7 || c.im.abs() > 1e-7 || c.re.abs() < 1e-9 {
                    return Err(CorepError::TheoremViolated(format!(
                        "T T̄ is not a real multiple of ρ(a₀⁻²) (c = {c})"
                    )));
                }
                Ok(Some(if c.re > 0.0 { TypeLabel::R } else { TypeLabel::H }))
            }
            k => Err(CorepError::NotIrreducible(format!("{k}-dimensional intertwiner space"))),
        }
    }
}

pub fn restriction_matrix_of(basis: &CorepBasis, involution: &[usize]) -> RestrictionMatrix {
    let columns: Vec<usize> = basis
        .generators
        .iter()
        .flat_map(|g| g.constituents.iter().map(|&(i, _)| i))
        .collect();
    let pos = |irr: usize| columns.iter().position(|&c| c == irr).expect("column present");
    let rows = basis
        .generators
        .iter()
        .map(|g| {
            let mut r = vec![0; columns.len()];
            for &(i, m) in &g.constituents {
                r[pos(i)] = m;
            }
            r
        })
        .collect();
    let involution = columns.iter().map(|&c| pos(involution[c])).collect();
    RestrictionMatrix {
        rows,
        columns,
        involution,
    }
}

/// Invariance, ranks and cokernel torsion of a restriction matrix, in
/// integer arithmetic.
pub fn iso_report(m: &RestrictionMatrix) -> IsoReport {
    let ncols = m.columns.len();
    let image_invariant = m.rows.iter().all(|r| (0..ncols).all(|c| r[c] == r[m.involution[c]]));
    let rank_magnetic = if m.rows.is_empty() { 0 } else { linalg::rank(&m.rows) };
    // orbit representatives give a basis of the invariant sublattice
    let orbit_reps: Vec<usize> = (0..ncols).filter(|&c| m.involution[c] >= c).collect();
    let rank_invariants = orbit_reps.len();
    let coords: Vec<Vec<i64>> = m
        .rows
        .iter()
        .map(|r| orbit_reps.iter().map(|&c| r[c]).collect())
        .collect();
    let cokernel_torsion = if coords.is_empty() || orbit_reps.is_empty() {
        vec![]
    } else {
        linalg::smith_normal_form(&coords)
            .invariant_factors()
            .into_iter()
            .filter(|&d| d > 1)
            .collect()
    };
    IsoReport {
        image_invariant,
        rank_magnetic,
        rank_invariants,
        cokernel_torsion,
    }
}

pub fn twisted_corep_basis(ext: &CentralExtensionZ2) -> Result<CorepBasis, CorepError> {
    MagneticContext::twisted(ext)?.corep_basis()
}
