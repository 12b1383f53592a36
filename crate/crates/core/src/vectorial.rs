//! Realizations of the vectorial apartment, vectorial facets, Tits-cone
//! location and the star order.
//!
//! A realization fixes a rational vector space V together with the simple
//! root forms and simple coroot vectors; everything downstream (walls,
//! facets, enclosures) evaluates these forms exactly.

use crate::kac::{BlockType, KacMoodyMatrix, RootGeneratingSystem, WeylElement};
use crate::lp;
use crate::rat::{rat_int, Rat};
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum VectorialError {
    #[error("this realization kind needs a free root generating system")]
    NotFreeRgs,
    #[error("point has dimension {got}, realization has dimension {expected}")]
    DimensionMismatch { got: usize, expected: usize },
    #[error("subspace basis is not inside V0")]
    NotInV0,
    #[error("facet {0:?} has empty relative interior in this realization")]
    EmptyFacet(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RealizationKind {
    Q,
    X,
    Xl,
    Quotient,
}

/// A concrete model of the vectorial apartment: rational forms and coroot
/// vectors on a coordinate space of dimension `dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct Realization {
    rgs: RootGeneratingSystem,
    kind: RealizationKind,
    dim: usize,
    /// Row i: the form alpha_i as coordinates on V.
    root_forms: Vec<Vec<Rat>>,
    /// Row i: the vector alpha_i^vee in V.
    coroot_vectors: Vec<Vec<Rat>>,
    /// Basis of V0, the common kernel of the simple root forms.
    v0_basis: Vec<Vec<Rat>>,
}

pub type Point = Vec<Rat>;

pub fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    a.iter()
        .zip(b)
        .map(|(x, y)| x * y)
        .fold(Rat::zero(), |acc, v| acc + v)
}

/// Exact kernel of a set of row forms on Q^dim, as a reduced basis.
pub fn kernel_basis(rows: &[Vec<Rat>], dim: usize) -> Vec<Vec<Rat>> {
    let mut a: Vec<Vec<Rat>> = rows.to_vec();
    let mut pivots: Vec<usize> = Vec::new();
    let mut r = 0usize;
    for c in 0..dim {
        let Some(p) = (r..a.len()).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let pv = a[r][c].clone();
        for x in a[r].iter_mut() {
            *x /= pv.clone();
        }
        for i in 0..a.len() {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in 0..dim {
                    let d = &f * &a[r][j];
                    a[i][j] -= d;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == a.len() {
            break;
        }
    }
    let mut basis = Vec::new();
    for free in (0..dim).filter(|c| !pivots.contains(c)) {
        let mut v = vec![Rat::zero(); dim];
        v[free] = rat_int(1);
        for (row, &pc) in pivots.iter().enumerate() {
            v[pc] = -a[row][free].clone();
        }
        basis.push(v);
    }
    basis
}

impl Realization {
    /// Builds the realization of the requested kind.
    ///
    /// - `Q`: coordinates are evaluations against the simple roots, so the
    ///   forms are the coordinate forms and the coroots are the rows of
    ///   the Kac-Moody matrix. Always essential (V0 = 0).
    /// - `X`: the space Y x R of the (free) system itself.
    /// - `Xl`: the extended system Y + Q^*, free for any input system.
    pub fn build(
        rgs: &RootGeneratingSystem,
        kind: RealizationKind,
    ) -> Result<Self, VectorialError> {
        match kind {
            RealizationKind::Q => {
                let min = RootGeneratingSystem::minimal_adjoint(rgs.matrix().clone());
                Ok(Self::from_rgs_coords(min, RealizationKind::Q))
            }
            RealizationKind::X => {
                if !rgs.is_free() {
                    return Err(VectorialError::NotFreeRgs);
                }
                Ok(Self::from_rgs_coords(rgs.clone(), RealizationKind::X))
            }
            RealizationKind::Xl => {
                Ok(Self::from_rgs_coords(rgs.extended(), RealizationKind::Xl))
            }
            RealizationKind::Quotient => {
                panic!("use Realization::quotient to build quotient realizations")
            }
        }
    }

    fn from_rgs_coords(rgs: RootGeneratingSystem, kind: RealizationKind) -> Self {
        let dim = rgs.rank_y();
        let root_forms: Vec<Vec<Rat>> = rgs.simple_root_forms().to_vec();
        let coroot_vectors: Vec<Vec<Rat>> = rgs
            .simple_coroots()
            .iter()
            .map(|c| c.iter().map(|&x| rat_int(x)).collect())
            .collect();
        let v0_basis = kernel_basis(&root_forms, dim);
        Realization {
            rgs,
            kind,
            dim,
            root_forms,
            coroot_vectors,
            v0_basis,
        }
    }

    /// Quotient of this realization by a subspace of V0 spanned by
    /// `v00_basis`. Coordinates are the non-pivot coordinates of the
    /// subspace, eliminated in echelon order.
    pub fn quotient(&self, v00_basis: &[Point]) -> Result<Realization, VectorialError> {
        for v in v00_basis {
            self.check_dim(v)?;
            if self.root_forms.iter().any(|f| !dot(f, v).is_zero()) {
                return Err(VectorialError::NotInV0);
            }
        }
        // Echelonize the subspace to find pivot coordinates.
        let mut a: Vec<Vec<Rat>> = v00_basis.to_vec();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.dim {
            let Some(p) = (r..a.len()).find(|&i| !a[i][c].is_zero()) else {
                continue;
            };
            a.swap(r, p);
            let pv = a[r][c].clone();
            for x in a[r].iter_mut() {
                *x /= pv.clone();
            }
            for i in 0..a.len() {
                if i != r && !a[i][c].is_zero() {
                    let f = a[i][c].clone();
                    for j in 0..self.dim {
                        let d = &f * &a[r][j];
                        a[i][j] -= d;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        let kept: Vec<usize> = (0..self.dim).filter(|c| !pivots.contains(c)).collect();
        // Representatives are rewritten to have zero pivot coordinates;
        // on representatives the projection is just restriction to the
        // kept coordinates.
        let project = |v: &[Rat]| -> Vec<Rat> {
            let mut w = v.to_vec();
            for (row, &pc) in pivots.iter().enumerate() {
                let f = w[pc].clone();
                if !f.is_zero() {
                    for j in 0..self.dim {
                        let d = &f * &a[row][j];
                        w[j] -= d;
                    }
                }
            }
            kept.iter().map(|&c| w[c].clone()).collect()
        };
        // Forms kill the subspace, so their value only depends on the
        // kept coordinates of the rewritten representative; and rewriting
        // leaves kept coordinates unchanged. Restriction is exact.
        let root_forms: Vec<Vec<Rat>> = self
            .root_forms
            .iter()
            .map(|f| kept.iter().map(|&c| f[c].clone()).collect())
            .collect();
        let coroot_vectors: Vec<Vec<Rat>> =
            self.coroot_vectors.iter().map(|c| project(c)).collect();
        let v0_basis = kernel_basis(&root_forms, kept.len());
        Ok(Realization {
            rgs: self.rgs.clone(),
            kind: RealizationKind::Quotient,
            dim: kept.len(),
            root_forms,
            coroot_vectors,
            v0_basis,
        })
    }

    pub fn rgs(&self) -> &RootGeneratingSystem {
        &self.rgs
    }

    pub fn matrix(&self) -> &KacMoodyMatrix {
        self.rgs.matrix()
    }

    pub fn kind(&self) -> &RealizationKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rgs.matrix().size()
    }

    pub fn v0_basis(&self) -> &[Point] {
        &self.v0_basis
    }

    pub fn simple_form(&self, i: usize) -> &[Rat] {
        &self.root_forms[i]
    }

    pub fn simple_coroot_vector(&self, i: usize) -> &[Rat] {
        &self.coroot_vectors[i]
    }

    pub fn check_dim(&self, v: &[Rat]) -> Result<(), VectorialError> {
        if v.len() != self.dim {
            return Err(VectorialError::DimensionMismatch {
                got: v.len(),
                expected: self.dim,
            });
        }
        Ok(())
    }

    /// The linear form of a root given by Q-coordinates.
    pub fn root_form(&self, coords: &[i64]) -> Vec<Rat> {
        let mut f = vec![Rat::zero(); self.dim];
        for (i, &c) in coords.iter().enumerate() {
            if c != 0 {
                for j in 0..self.dim {
                    f[j] += rat_int(c) * &self.root_forms[i][j];
                }
            }
        }
        f
    }

    /// The vector of a coroot given by coroot-lattice coordinates.
    pub fn coroot_vector(&self, coords: &[i64]) -> Vec<Rat> {
        let mut v = vec![Rat::zero(); self.dim];
        for (i, &c) in coords.iter().enumerate() {
            if c != 0 {
                for j in 0..self.dim {
                    v[j] += rat_int(c) * &self.coroot_vectors[i][j];
                }
            }
        }
        v
    }

    /// Evaluates the root with the given Q-coordinates at a point.
    pub fn eval_root(&self, coords: &[i64], v: &[Rat]) -> Rat {
        (0..self.rank())
            .map(|i| {
                if coords[i] == 0 {
                    Rat::zero()
                } else {
                    rat_int(coords[i]) * dot(&self.root_forms[i], v)
                }
            })
            .fold(Rat::zero(), |a, b| a + b)
    }

    pub fn eval_simple(&self, i: usize, v: &[Rat]) -> Rat {
        dot(&self.root_forms[i], v)
    }

    /// s_i acting on points: v - alpha_i(v) alpha_i^vee.
    pub fn reflect_point(&self, i: usize, v: &[Rat]) -> Point {
        let c = self.eval_simple(i, v);
        v.iter()
            .zip(&self.coroot_vectors[i])
            .map(|(x, a)| x - &c * a)
            .collect()
    }

    /// w acting on points through its canonical word.
    pub fn act_point(&self, w: &WeylElement, v: &[Rat]) -> Point {
        // word [i1,...,ik] means s_{i1} o ... o s_{ik}; apply right first.
        let mut out = v.to_vec();
        for &i in w.word().iter().rev() {
            out = self.reflect_point(i, &out);
        }
        out
    }

    /// The canonical essentialization map V -> V^q, v -> (alpha_i(v))_i.
    pub fn essentialize(&self, v: &[Rat]) -> Point {
        (0..self.rank()).map(|i| self.eval_simple(i, v)).collect()
    }

    /// A relative-interior point of the fundamental facet of type J.
    /// Errors when the facet is empty in this realization.
    pub fn fundamental_interior_point(&self, j_set: &[usize]) -> Result<Point, VectorialError> {
        let mut closed: Vec<(Vec<Rat>, Rat)> = Vec::new();
        let mut strict: Vec<(Vec<Rat>, Rat)> = Vec::new();
        for i in 0..self.rank() {
            let f = self.root_forms[i].clone();
            if j_set.contains(&i) {
                let neg: Vec<Rat> = f.iter().map(|x| -x).collect();
                closed.push((f, Rat::zero()));
                closed.push((neg, Rat::zero()));
            } else {
                // alpha_i(v) > 0  i.e.  -alpha_i(v) < 0.
                strict.push((f.iter().map(|x| -x).collect(), Rat::zero()));
            }
        }
        lp::strict_feasible_point(self.dim, &closed, &strict)
            .ok_or_else(|| VectorialError::EmptyFacet(format!("{j_set:?}")))
    }

    /// A relative-interior point of an arbitrary facet w F_sign(J).
    pub fn facet_interior_point(&self, facet: &VectorialFacet) -> Result<Point, VectorialError> {
        let base = self.fundamental_interior_point(facet.j_set())?;
        let base = match facet.sign() {
            Sign::Plus => base,
            Sign::Minus => base.iter().map(|x| -x).collect(),
        };
        Ok(self.act_point(facet.wrep(), &base))
    }
}

// ---------------------------------------------------------------------
// Vectorial facets
// ---------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

/// A vectorial facet w F_sign^v(J), stored with the ShortLex-minimal coset
/// representative modulo W(J).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct VectorialFacet {
    sign: Sign,
    j_set: Vec<usize>,
    wrep: WeylElement,
}

impl VectorialFacet {
    pub fn new(m: &KacMoodyMatrix, sign: Sign, w: &WeylElement, j_set: &[usize]) -> Self {
        let mut j: Vec<usize> = j_set.to_vec();
        j.sort_unstable();
        j.dedup();
        VectorialFacet {
            sign,
            wrep: w.min_coset_rep(m, &j),
            j_set: j,
        }
    }

    pub fn fundamental(m: &KacMoodyMatrix, sign: Sign, j_set: &[usize]) -> Self {
        Self::new(m, sign, &WeylElement::identity(m), j_set)
    }

    /// The chamber C^v_sign.
    pub fn chamber(m: &KacMoodyMatrix, sign: Sign) -> Self {
        Self::fundamental(m, sign, &[])
    }

    /// The trivial facet F^v_sign(I) = V0.
    pub fn trivial(m: &KacMoodyMatrix, sign: Sign) -> Self {
        let all: Vec<usize> = (0..m.size()).collect();
        Self::fundamental(m, sign, &all)
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn wrep(&self) -> &WeylElement {
        &self.wrep
    }

    pub fn j_set(&self) -> &[usize] {
        &self.j_set
    }

    pub fn is_trivial(&self, m: &KacMoodyMatrix) -> bool {
        self.j_set.len() == m.size()
    }

    pub fn is_chamber(&self) -> bool {
        self.j_set.is_empty()
    }

    pub fn is_spherical(&self, m: &KacMoodyMatrix) -> bool {
        m.is_spherical(&self.j_set)
    }

    pub fn opposite(&self, m: &KacMoodyMatrix) -> VectorialFacet {
        VectorialFacet::new(m, self.sign.flip(), &self.wrep, &self.j_set)
    }

    /// Is `other` in the star of `self`, i.e. self inside closure(other)?
    /// Holds iff signs match, J1 is contained in J and the coset
    /// representatives agree modulo W(J).
    pub fn star_contains(&self, m: &KacMoodyMatrix, other: &VectorialFacet) -> bool {
        if self.sign != other.sign {
            return false;
        }
        if !other.j_set.iter().all(|j| self.j_set.contains(j)) {
            return false;
        }
        let b = other.wrep.min_coset_rep(m, &self.j_set);
        self.wrep == b
    }

    /// Enumerates the star: all facets F1 with self inside closure(F1),
    /// with coset representatives drawn from wrep W(J) up to `length_cap`
    /// extra letters. Complete whenever W(J) is exhausted within the cap.
    pub fn star(&self, m: &KacMoodyMatrix, length_cap: usize) -> Vec<VectorialFacet> {
        let mut wj_elements = vec![WeylElement::identity(m)];
        let mut frontier = vec![WeylElement::identity(m)];
        for _ in 0..length_cap {
            let mut next = Vec::new();
            for w in &frontier {
                for &j in &self.j_set {
                    let s = WeylElement::generator(m, j).expect("J within rank");
                    let cand = w.compose(m, &s);
                    if cand.length() > w.length() && !wj_elements.contains(&cand) {
                        wj_elements.push(cand.clone());
                        next.push(cand);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
        let mut out: Vec<VectorialFacet> = Vec::new();
        for j1 in subsets(&self.j_set) {
            for v in &wj_elements {
                let w1 = self.wrep.compose(m, v);
                let f1 = VectorialFacet::new(m, self.sign, &w1, &j1);
                if !out.contains(&f1) {
                    debug_assert!(self.star_contains(m, &f1));
                    out.push(f1);
                }
            }
        }
        out.sort();
        out
    }
}

fn subsets(items: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &x in items {
        let mut more: Vec<Vec<usize>> = out
            .iter()
            .map(|s| {
                let mut t = s.clone();
                t.push(x);
                t
            })
            .collect();
        out.append(&mut more);
    }
    out
}

/// Serialization per the external interface: `{"sign": "+", "word": [..],
/// "J": [..]}`.
#[derive(Serialize, Deserialize)]
pub struct FacetJson {
    pub sign: Sign,
    pub word: Vec<usize>,
    #[serde(rename = "J")]
    pub j_set: Vec<usize>,
}

impl VectorialFacet {
    pub fn to_json(&self) -> FacetJson {
        FacetJson {
            sign: self.sign,
            word: self.wrep.word().to_vec(),
            j_set: self.j_set.clone(),
        }
    }

    pub fn from_json(m: &KacMoodyMatrix, j: &FacetJson) -> Result<Self, crate::kac::KacError> {
        let w = WeylElement::from_word(m, &j.word)?;
        Ok(VectorialFacet::new(m, j.sign, &w, &j.j_set))
    }
}

/// Membership in the fundamental facet F_sign(J): alpha_j = 0 on J and
/// strictly sign-positive off J, evaluated exactly.
pub fn fundamental_facet_membership(
    real: &Realization,
    sign: Sign,
    j_set: &[usize],
    v: &[Rat],
) -> Result<bool, VectorialError> {
    real.check_dim(v)?;
    for i in 0..real.rank() {
        let x = real.eval_simple(i, v);
        if j_set.contains(&i) {
            if !x.is_zero() {
                return Ok(false);
            }
        } else {
            let ok = match sign {
                Sign::Plus => x > Rat::zero(),
                Sign::Minus => x < Rat::zero(),
            };
            if !ok {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Membership in a general facet w F_sign(J): pull back by w.
pub fn facet_membership(
    real: &Realization,
    facet: &VectorialFacet,
    v: &[Rat],
) -> Result<bool, VectorialError> {
    let w_inv = facet.wrep().inverse(real.matrix());
    let pulled = real.act_point(&w_inv, v);
    fundamental_facet_membership(real, facet.sign(), facet.j_set(), &pulled)
}

// ---------------------------------------------------------------------
// Tits cone location
// ---------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
pub enum TitsVerdict {
    InPositive(VectorialFacet),
    InNegative(VectorialFacet),
    Outside,
    /// Indefinite type only: bounded descent exhausted.
    Unknown { steps_used: usize },
}

/// Locates v in the Tits cone by descent: repeatedly reflect at the least
/// index with a negative evaluation. Finite type always resolves; affine
/// type is made total by the delta test (in T+ iff delta(v) > 0, or v in
/// V0); indefinite type is a semidecision up to `step_cap`.
pub fn locate_in_tits_cone(real: &Realization, v: &[Rat], step_cap: usize) -> TitsVerdict {
    let m = real.matrix().clone();
    match overall_type(&m) {
        BlockType::Finite => {
            let f = descend(real, v, usize::MAX).expect("finite-type descent terminates");
            TitsVerdict::InPositive(f)
        }
        BlockType::Affine => match affine_side(real, &m, v) {
            Some(Sign::Plus) => {
                let f = descend(real, v, usize::MAX)
                    .expect("affine descent terminates when delta > 0 or v in V0");
                TitsVerdict::InPositive(f)
            }
            Some(Sign::Minus) => {
                let neg: Vec<Rat> = v.iter().map(|x| -x.clone()).collect();
                let f = descend(real, &neg, usize::MAX)
                    .expect("affine descent terminates when delta > 0 or v in V0");
                TitsVerdict::InNegative(f.opposite(&m))
            }
            None => TitsVerdict::Outside,
        },
        BlockType::Indefinite => {
            if let Some(f) = descend(real, v, step_cap) {
                return TitsVerdict::InPositive(f);
            }
            let neg: Vec<Rat> = v.iter().map(|x| -x.clone()).collect();
            if let Some(f) = descend(real, &neg, step_cap) {
                return TitsVerdict::InNegative(f.opposite(&m));
            }
            TitsVerdict::Unknown {
                steps_used: step_cap,
            }
        }
    }
}

fn overall_type(m: &KacMoodyMatrix) -> BlockType {
    let blocks = m.classify();
    if blocks.iter().all(|b| b.kind == BlockType::Finite) {
        BlockType::Finite
    } else if blocks
        .iter()
        .all(|b| matches!(b.kind, BlockType::Finite | BlockType::Affine))
    {
        BlockType::Affine
    } else {
        BlockType::Indefinite
    }
}

/// Decides the affine-type side: Plus when v is in T+, Minus when -v is,
/// None when outside both. The Tits cone of a reducible matrix is the
/// product of the block cones, so membership is decided per affine
/// block: inside iff the block delta is positive, or the block component
/// vanishes entirely (the block's degenerate boundary). Finite blocks
/// impose no condition.
fn affine_side(real: &Realization, m: &KacMoodyMatrix, v: &[Rat]) -> Option<Sign> {
    let mut plus_ok = true;
    let mut minus_ok = true;
    for b in m.classify() {
        if b.kind == BlockType::Finite {
            continue;
        }
        let sub = m.submatrix(&b.support);
        let d = sub.null_root().expect("affine block has a null root");
        let mut coords = vec![0i64; m.size()];
        for (k, &i) in b.support.iter().enumerate() {
            coords[i] = d[k];
        }
        let x = real.eval_root(&coords, v);
        match x.cmp(&Rat::zero()) {
            std::cmp::Ordering::Greater => minus_ok = false,
            std::cmp::Ordering::Less => plus_ok = false,
            std::cmp::Ordering::Equal => {
                // Zero delta: inside either cone only on the block's
                // degenerate boundary, where all block evaluations vanish.
                let in_v0 = b
                    .support
                    .iter()
                    .all(|&i| real.eval_simple(i, v).is_zero());
                if !in_v0 {
                    return None;
                }
            }
        }
    }
    if plus_ok {
        Some(Sign::Plus)
    } else if minus_ok {
        Some(Sign::Minus)
    } else {
        None
    }
}

/// Positive-side descent with least-index tie breaking: returns the
/// located facet (conjugated back), or None when the budget runs out.
fn descend(real: &Realization, v: &[Rat], step_cap: usize) -> Option<VectorialFacet> {
    let m = real.matrix();
    let mut cur = v.to_vec();
    let mut w_acc = WeylElement::identity(m);
    let mut steps = 0usize;
    loop {
        let neg = (0..real.rank()).find(|&i| real.eval_simple(i, &cur) < Rat::zero());
        match neg {
            None => {
                let j: Vec<usize> = (0..real.rank())
                    .filter(|&i| real.eval_simple(i, &cur).is_zero())
                    .collect();
                // cur = w_acc(v) is in the closed fundamental chamber, so
                // v lies in w_acc^{-1} F+(J).
                let w = w_acc.inverse(m);
                return Some(VectorialFacet::new(m, Sign::Plus, &w, &j));
            }
            Some(i) => {
                if steps >= step_cap {
                    return None;
                }
                cur = real.reflect_point(i, &cur);
                let s = WeylElement::generator(m, i).expect("index in range");
                w_acc = s.compose(m, &w_acc);
                steps += 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kac::named_matrix;
    use crate::rat::rat;
    use crate::sampler::Sampler;

    fn q_real(name: &str) -> Realization {
        let m = named_matrix(name).unwrap();
        let rgs = RootGeneratingSystem::minimal_adjoint(m);
        Realization::build(&rgs, RealizationKind::Q).unwrap()
    }

    #[test]
    fn kind_q_is_essential() {
        // In the q realization the simple forms are the coordinate forms,
        // so the common kernel is zero for every matrix, affine included;
        // the degenerate family there is the coroots.
        for name in ["a1", "a2", "aff_a1", "g2"] {
            let r = q_real(name);
            assert_eq!(r.dim(), r.rank());
            assert!(r.v0_basis().is_empty(), "V0 nonzero for {name}");
        }
        // Affine A1 coroot degeneracy: alpha_0^vee = -alpha_1^vee.
        let aff = q_real("aff_a1");
        let c0 = aff.simple_coroot_vector(0).to_vec();
        let c1: Vec<Rat> = aff.simple_coroot_vector(1).iter().map(|x| -x).collect();
        assert_eq!(c0, c1);
    }

    #[test]
    fn x_realization_and_v0() {
        // SL2-style free system: dim 1, V0 = 0.
        let a1 = named_matrix("a1").unwrap();
        let sl2 =
            RootGeneratingSystem::new(a1, 1, vec![vec![rat_int(2)]], vec![vec![1]]).unwrap();
        let r = Realization::build(&sl2, RealizationKind::X).unwrap();
        assert_eq!(r.dim(), 1);
        assert!(r.v0_basis().is_empty());
        // Extended realization of affine A1: dim 2 + 2 = 4 with V0 of
        // dimension 2 (the forms have rank 2).
        let aff = named_matrix("aff_a1").unwrap();
        let min = RootGeneratingSystem::minimal_adjoint(aff);
        let r = Realization::build(&min, RealizationKind::Xl).unwrap();
        assert_eq!(r.dim(), 4);
        assert_eq!(r.v0_basis().len(), 2);
        // Non-free input for kind X is refused.
        let aff = named_matrix("aff_a1").unwrap();
        let degenerate = RootGeneratingSystem::new(
            aff,
            1,
            vec![vec![rat_int(2)], vec![rat_int(-2)]],
            vec![vec![1], vec![-1]],
        )
        .unwrap();
        assert_eq!(
            Realization::build(&degenerate, RealizationKind::X).unwrap_err(),
            VectorialError::NotFreeRgs
        );
    }

    #[test]
    fn facet_membership_basics() {
        let r = q_real("a2");
        assert!(fundamental_facet_membership(
            &r,
            Sign::Plus,
            &[],
            &[rat_int(1), rat_int(1)]
        )
        .unwrap());
        assert!(fundamental_facet_membership(
            &r,
            Sign::Plus,
            &[0],
            &[rat_int(0), rat_int(1)]
        )
        .unwrap());
        // Zero fails the strict chamber condition.
        assert!(!fundamental_facet_membership(
            &r,
            Sign::Plus,
            &[],
            &[rat_int(0), rat_int(0)]
        )
        .unwrap());
        assert!(matches!(
            fundamental_facet_membership(&r, Sign::Plus, &[], &[rat_int(1)]),
            Err(VectorialError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn locate_finite_type() {
        let r = q_real("a2");
        let mut s = Sampler::new(7);
        for _ in 0..200 {
            let v = s.point(2, 6, 4);
            match locate_in_tits_cone(&r, &v, 10_000) {
                TitsVerdict::InPositive(f) => {
                    assert!(facet_membership(&r, &f, &v).unwrap());
                }
                other => panic!("finite type must locate positively, got {other:?}"),
            }
        }
        // Zero lands in the trivial facet.
        let v = vec![rat_int(0), rat_int(0)];
        match locate_in_tits_cone(&r, &v, 10) {
            TitsVerdict::InPositive(f) => {
                assert_eq!(f.j_set(), &[0, 1]);
                assert!(f.wrep().is_identity());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn locate_affine_delta_test() {
        let r = q_real("aff_a1");
        // delta = alpha_0 + alpha_1; q coordinates are evaluations, so
        // delta(v) = v0 + v1.
        let inside = vec![rat_int(2), rat_int(-1)];
        match locate_in_tits_cone(&r, &inside, 10_000) {
            TitsVerdict::InPositive(f) => {
                assert!(facet_membership(&r, &f, &inside).unwrap());
            }
            other => panic!("unexpected {other:?}"),
        }
        let outside = vec![rat_int(1), rat_int(-1)];
        assert_eq!(
            locate_in_tits_cone(&r, &outside, 10_000),
            TitsVerdict::Outside
        );
        let negative = vec![rat_int(-2), rat_int(1)];
        match locate_in_tits_cone(&r, &negative, 10_000) {
            TitsVerdict::InNegative(f) => {
                assert_eq!(f.sign(), Sign::Minus);
                assert!(facet_membership(&r, &f, &negative).unwrap());
            }
            other => panic!("unexpected {other:?}"),
        }
        // V0 is zero in the q realization: only the origin sits on the
        // degenerate boundary.
        let zero = vec![rat_int(0), rat_int(0)];
        assert!(matches!(
            locate_in_tits_cone(&r, &zero, 10),
            TitsVerdict::InPositive(_)
        ));
    }

    #[test]
    fn locate_affine_with_v0() {
        // In the extended realization V0 is 2-dimensional; points of V0
        // are inside the cone even though delta = 0 there.
        let aff = named_matrix("aff_a1").unwrap();
        let min = RootGeneratingSystem::minimal_adjoint(aff);
        let r = Realization::build(&min, RealizationKind::Xl).unwrap();
        let v0 = r.v0_basis()[0].clone();
        assert!(matches!(
            locate_in_tits_cone(&r, &v0, 10),
            TitsVerdict::InPositive(_)
        ));
    }

    #[test]
    fn locate_mixed_and_multi_affine_blocks() {
        // Finite block times affine block: the cone is the product.
        let mixed = crate::kac::KacMoodyMatrix::new(vec![
            vec![2, 0, 0],
            vec![0, 2, -2],
            vec![0, -2, 2],
        ])
        .unwrap();
        let rgs = RootGeneratingSystem::minimal_adjoint(mixed);
        let r = Realization::build(&rgs, RealizationKind::Q).unwrap();
        // Affine delta positive: inside regardless of the finite part.
        let v = vec![rat_int(-5), rat_int(2), rat_int(-1)];
        assert!(matches!(
            locate_in_tits_cone(&r, &v, 100_000),
            TitsVerdict::InPositive(_)
        ));
        // Affine delta zero with nonzero affine part: outside.
        let v = vec![rat_int(3), rat_int(1), rat_int(-1)];
        assert_eq!(locate_in_tits_cone(&r, &v, 100_000), TitsVerdict::Outside);
        // Affine part identically zero: inside through the finite block.
        let v = vec![rat_int(3), rat_int(0), rat_int(0)];
        assert!(matches!(
            locate_in_tits_cone(&r, &v, 100_000),
            TitsVerdict::InPositive(_)
        ));
        // Two affine blocks with opposite delta signs: outside both cones
        // (previously this could loop forever in descent).
        let double = crate::kac::KacMoodyMatrix::new(vec![
            vec![2, -2, 0, 0],
            vec![-2, 2, 0, 0],
            vec![0, 0, 2, -2],
            vec![0, 0, -2, 2],
        ])
        .unwrap();
        let rgs = RootGeneratingSystem::minimal_adjoint(double);
        let r = Realization::build(&rgs, RealizationKind::Q).unwrap();
        let v = vec![rat_int(2), rat_int(-1), rat_int(-2), rat_int(1)];
        assert_eq!(locate_in_tits_cone(&r, &v, 100_000), TitsVerdict::Outside);
        // One block positive, the other zero-but-nonvanishing: outside.
        let v = vec![rat_int(2), rat_int(-1), rat_int(1), rat_int(-1)];
        assert_eq!(locate_in_tits_cone(&r, &v, 100_000), TitsVerdict::Outside);
        // Both positive: inside.
        let v = vec![rat_int(2), rat_int(-1), rat_int(3), rat_int(-1)];
        assert!(matches!(
            locate_in_tits_cone(&r, &v, 100_000),
            TitsVerdict::InPositive(_)
        ));
    }

    #[test]
    fn locate_indefinite_semidecision() {
        let r = q_real("hyp_33");
        let v = vec![rat_int(1), rat_int(1)];
        assert!(matches!(
            locate_in_tits_cone(&r, &v, 100),
            TitsVerdict::InPositive(_)
        ));
        // A direction outside both cones: with a tiny cap we must get
        // Unknown rather than a wrong verdict.
        let v = vec![rat_int(1), rat_int(-1)];
        match locate_in_tits_cone(&r, &v, 3) {
            TitsVerdict::Unknown { steps_used } => assert_eq!(steps_used, 3),
            TitsVerdict::InPositive(f) | TitsVerdict::InNegative(f) => {
                assert!(facet_membership(&r, &f, &v).unwrap());
            }
            TitsVerdict::Outside => panic!("indefinite type cannot prove Outside"),
        }
    }

    #[test]
    fn descent_tie_breaking_invariance() {
        // The located facet does not depend on the order descents are
        // taken: randomize the choice and compare with the canonical run.
        let r = q_real("a2");
        let m = r.matrix().clone();
        let mut s = Sampler::new(42);
        for _ in 0..100 {
            let v = s.point(2, 5, 3);
            let canonical = match locate_in_tits_cone(&r, &v, 10_000) {
                TitsVerdict::InPositive(f) => f,
                other => panic!("unexpected {other:?}"),
            };
            let mut cur = v.clone();
            let mut w_acc = WeylElement::identity(&m);
            loop {
                let negs: Vec<usize> = (0..2)
                    .filter(|&i| r.eval_simple(i, &cur) < Rat::zero())
                    .collect();
                if negs.is_empty() {
                    break;
                }
                let i = *s.pick(&negs);
                cur = r.reflect_point(i, &cur);
                let g = WeylElement::generator(&m, i).unwrap();
                w_acc = g.compose(&m, &w_acc);
            }
            let j: Vec<usize> = (0..2)
                .filter(|&i| r.eval_simple(i, &cur).is_zero())
                .collect();
            let f = VectorialFacet::new(&m, Sign::Plus, &w_acc.inverse(&m), &j);
            assert_eq!(f, canonical);
        }
    }

    #[test]
    fn located_facets_partition() {
        let r = q_real("aff_a1");
        let mut s = Sampler::new(3);
        let mut found = 0;
        for _ in 0..1000 {
            let v = s.point(2, 6, 4);
            if let TitsVerdict::InPositive(f) = locate_in_tits_cone(&r, &v, 100_000) {
                found += 1;
                assert!(facet_membership(&r, &f, &v).unwrap());
                let other = VectorialFacet::fundamental(r.matrix(), Sign::Plus, &[]);
                if other != f {
                    assert!(!facet_membership(&r, &other, &v).unwrap());
                }
            }
        }
        assert!(found > 100);
    }

    #[test]
    fn interior_sphericity() {
        // Spherical located facets lie in the cone interior: a small
        // neighborhood sample stays InPositive.
        let r = q_real("aff_a1");
        let mut s = Sampler::new(11);
        let mut tested = 0;
        for _ in 0..300 {
            let v = s.point(2, 6, 3);
            if let TitsVerdict::InPositive(f) = locate_in_tits_cone(&r, &v, 100_000) {
                if f.is_spherical(r.matrix()) {
                    tested += 1;
                    for _ in 0..4 {
                        let eps = rat(1, 1000);
                        let nudge: Vec<Rat> =
                            v.iter().map(|x| x + &eps * s.rat_in(1, 1)).collect();
                        assert!(matches!(
                            locate_in_tits_cone(&r, &nudge, 100_000),
                            TitsVerdict::InPositive(_)
                        ));
                    }
                }
            }
        }
        assert!(tested > 20);
    }

    #[test]
    fn essentialization_reproduces_q_verdicts() {
        let aff = named_matrix("aff_a1").unwrap();
        let min = RootGeneratingSystem::minimal_adjoint(aff);
        let rq = Realization::build(&min, RealizationKind::Q).unwrap();
        let rxl = Realization::build(&min, RealizationKind::Xl).unwrap();
        let mut s = Sampler::new(19);
        for _ in 0..100 {
            let v = s.point(4, 5, 3);
            let vq = rxl.essentialize(&v);
            let a = locate_in_tits_cone(&rxl, &v, 100_000);
            let b = locate_in_tits_cone(&rq, &vq, 100_000);
            let same = matches!(
                (&a, &b),
                (TitsVerdict::InPositive(_), TitsVerdict::InPositive(_))
                    | (TitsVerdict::InNegative(_), TitsVerdict::InNegative(_))
                    | (TitsVerdict::Outside, TitsVerdict::Outside)
            );
            assert!(same, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn star_examples() {
        let m = named_matrix("a2").unwrap();
        // Chamber: star is itself.
        let chamber = VectorialFacet::chamber(&m, Sign::Plus);
        let star = chamber.star(&m, 6);
        assert_eq!(star.len(), 1);
        assert_eq!(star[0], chamber);
        // Wall facet {0}: itself plus exactly two adjacent chambers.
        let wall = VectorialFacet::fundamental(&m, Sign::Plus, &[0]);
        let star = wall.star(&m, 6);
        assert_eq!(star.len(), 3);
        let chambers = star.iter().filter(|f| f.is_chamber()).count();
        assert_eq!(chambers, 2);
        // Trivial facet: the star of V0 is every positive facet; in A2
        // that is 6 chambers + 6 walls + 1 trivial = 13.
        let trivial = VectorialFacet::trivial(&m, Sign::Plus);
        let star = trivial.star(&m, 10);
        assert_eq!(star.len(), 13);
        // Sign mismatch never in star.
        let neg = VectorialFacet::chamber(&m, Sign::Minus);
        assert!(!trivial.star_contains(&m, &neg));
    }

    #[test]
    fn quotient_realization() {
        let aff = named_matrix("aff_a1").unwrap();
        let min = RootGeneratingSystem::minimal_adjoint(aff);
        let rxl = Realization::build(&min, RealizationKind::Xl).unwrap();
        let v00 = vec![rxl.v0_basis()[0].clone()];
        let q = rxl.quotient(&v00).unwrap();
        assert_eq!(q.dim(), 3);
        assert_eq!(q.v0_basis().len(), 1);
        // Root evaluations are preserved on representatives.
        let mut s = Sampler::new(5);
        for _ in 0..50 {
            let v = s.point(4, 5, 3);
            let projected = {
                // Quotient representative: evaluation must agree.
                let before = rxl.eval_simple(0, &v);
                (before, v.clone())
            };
            let _ = projected;
            for i in 0..2 {
                let before = rxl.eval_simple(i, &v);
                // Build the representative the quotient uses.
                let after = q.eval_simple(i, &quotient_repr(&rxl, &v00, &v));
                assert_eq!(before, after);
            }
        }
        // Quotient by a non-V0 vector is refused.
        let mut bad = vec![Rat::zero(); 4];
        bad[0] = rat_int(1);
        assert!(matches!(rxl.quotient(&[bad]), Err(VectorialError::NotInV0)));
    }

    /// Test-side mirror of the representative used by `quotient`.
    fn quotient_repr(real: &Realization, v00: &[Point], v: &[Rat]) -> Vec<Rat> {
        let mut a = v00.to_vec();
        let dim = real.dim();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..dim {
            let Some(p) = (r..a.len()).find(|&i| !a[i][c].is_zero()) else {
                continue;
            };
            a.swap(r, p);
            let pv = a[r][c].clone();
            for x in a[r].iter_mut() {
                *x /= pv.clone();
            }
            for i in 0..a.len() {
                if i != r && !a[i][c].is_zero() {
                    let f = a[i][c].clone();
                    for j in 0..dim {
                        let d = &f * &a[r][j];
                        a[i][j] -= d;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        let mut w = v.to_vec();
        for (row, &pc) in pivots.iter().enumerate() {
            let f = w[pc].clone();
            if !f.is_zero() {
                for j in 0..dim {
                    let d = &f * &a[row][j];
                    w[j] -= d;
                }
            }
        }
        (0..dim)
            .filter(|c| !pivots.contains(c))
            .map(|c| w[c].clone())
            .collect()
    }

    #[test]
    fn facet_json_round_trip() {
        let m = named_matrix("a2").unwrap();
        let w = WeylElement::from_word(&m, &[0, 1]).unwrap();
        let f = VectorialFacet::new(&m, Sign::Plus, &w, &[1]);
        let j = serde_json::to_string(&f.to_json()).unwrap();
        assert!(j.contains("\"sign\":\"+\""));
        let parsed: FacetJson = serde_json::from_str(&j).unwrap();
        let back = VectorialFacet::from_json(&m, &parsed).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn fundamental_interior_points() {
        let r = q_real("a2");
        let p = r.fundamental_interior_point(&[0]).unwrap();
        assert!(r.eval_simple(0, &p).is_zero());
        assert!(r.eval_simple(1, &p) > Rat::zero());
        let p = r.fundamental_interior_point(&[]).unwrap();
        assert!(r.eval_simple(0, &p) > Rat::zero());
        assert!(r.eval_simple(1, &p) > Rat::zero());
        // And through a Weyl translate.
        let m = r.matrix().clone();
        let w = WeylElement::from_word(&m, &[0]).unwrap();
        let f = VectorialFacet::new(&m, Sign::Plus, &w, &[1]);
        let p = r.facet_interior_point(&f).unwrap();
        assert!(facet_membership(&r, &f, &p).unwrap());
    }
}
