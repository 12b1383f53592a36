//! Concrete valuated root data with exact arithmetic: SL2 and SL3 over
//! the rationals with a p-adic valuation, and loop SL2 over Laurent
//! polynomial matrices, plus the Iwasawa / Bruhat / Birkhoff
//! decomposition oracles for the classical pair.
//!
//! The base field is Q with v_p, not Q_p: every element stays exact and
//! the value group is the integers.

use crate::apartment::ApartmentModel;
use crate::kac::{named_matrix, KacMoodyMatrix, RootGeneratingSystem, RootSlice, WeylElement};
use crate::rat::{is_prime, padic_val, rat_to_string, Rat, Val, ValueGroup};
use crate::sampler::Sampler;
use crate::vectorial::{Realization, RealizationKind};
use num_traits::{One, Zero};
use serde::Serialize;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum InstanceError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("root {0:?} is not a root of this instance")]
    UnknownRoot(Vec<i64>),
    #[error("element is not in the requested root group")]
    NotInRootGroup,
    #[error("the identity has no m(u)")]
    IdentityHasNoM,
    #[error(transparent)]
    Apartment(#[from] crate::apartment::ApartmentError),
}

// ---------------------------------------------------------------------
// Exact matrices
// ---------------------------------------------------------------------

/// A square matrix of exact rationals with determinant 1.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SlMatrix {
    n: usize,
    entries: Vec<Rat>,
}

impl std::fmt::Debug for SlMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[")?;
        for i in 0..self.n {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.n {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.at(i, j))?;
            }
        }
        write!(f, "]")
    }
}

impl SlMatrix {
    pub fn identity(n: usize) -> Self {
        let mut m = SlMatrix {
            n,
            entries: vec![Rat::zero(); n * n],
        };
        for i in 0..n {
            *m.at_mut(i, i) = Rat::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Self {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for r in rows {
            assert_eq!(r.len(), n);
            entries.extend(r);
        }
        let m = SlMatrix { n, entries };
        debug_assert!(m.det().is_one(), "determinant must be 1");
        m
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn at(&self, i: usize, j: usize) -> &Rat {
        &self.entries[i * self.n + j]
    }

    fn at_mut(&mut self, i: usize, j: usize) -> &mut Rat {
        &mut self.entries[i * self.n + j]
    }

    /// Mutable entry access for in-place eliminations; the caller is
    /// responsible for restoring the determinant invariant.
    pub fn entry_mut(&mut self, i: usize, j: usize) -> &mut Rat {
        self.at_mut(i, j)
    }

    pub fn mul(&self, other: &SlMatrix) -> SlMatrix {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = SlMatrix {
            n,
            entries: vec![Rat::zero(); n * n],
        };
        for i in 0..n {
            for k in 0..n {
                if !self.at(i, k).is_zero() {
                    for j in 0..n {
                        let d = self.at(i, k) * other.at(k, j);
                        *out.at_mut(i, j) += d;
                    }
                }
            }
        }
        out
    }

    pub fn det(&self) -> Rat {
        match self.n {
            1 => self.at(0, 0).clone(),
            2 => self.at(0, 0) * self.at(1, 1) - self.at(0, 1) * self.at(1, 0),
            3 => {
                let m = |i: usize, j: usize| self.at(i, j);
                m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1))
                    - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
                    + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0))
            }
            _ => unimplemented!("only sizes up to 3 are used"),
        }
    }

    /// Inverse via the adjugate; determinant is 1 by the type invariant.
    pub fn inv(&self) -> SlMatrix {
        match self.n {
            2 => SlMatrix::from_rows(vec![
                vec![self.at(1, 1).clone(), -self.at(0, 1).clone()],
                vec![-self.at(1, 0).clone(), self.at(0, 0).clone()],
            ]),
            3 => {
                let m = |i: usize, j: usize| self.at(i, j);
                let cof = |i: usize, j: usize| {
                    let (a, b) = match i {
                        0 => (1, 2),
                        1 => (0, 2),
                        _ => (0, 1),
                    };
                    let (c, d) = match j {
                        0 => (1, 2),
                        1 => (0, 2),
                        _ => (0, 1),
                    };
                    let minor = m(a, c) * m(b, d) - m(a, d) * m(b, c);
                    if (i + j) % 2 == 0 {
                        minor
                    } else {
                        -minor
                    }
                };
                // adj(M)^T / det with det = 1.
                SlMatrix::from_rows(
                    (0..3)
                        .map(|i| (0..3).map(|j| cof(j, i)).collect())
                        .collect(),
                )
            }
            _ => unimplemented!("only sizes up to 3 are used"),
        }
    }

    pub fn is_identity(&self) -> bool {
        *self == SlMatrix::identity(self.n)
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| i == j || self.at(i, j).is_zero()))
    }

    pub fn is_upper_unipotent(&self) -> bool {
        (0..self.n).all(|i| {
            (0..self.n).all(|j| {
                if i == j {
                    self.at(i, j).is_one()
                } else if i > j {
                    self.at(i, j).is_zero()
                } else {
                    true
                }
            })
        })
    }

    pub fn is_lower_unipotent(&self) -> bool {
        (0..self.n).all(|i| {
            (0..self.n).all(|j| {
                if i == j {
                    self.at(i, j).is_one()
                } else if i < j {
                    self.at(i, j).is_zero()
                } else {
                    true
                }
            })
        })
    }

    /// Is every entry p-integral (in the valuation ring)? For det 1 this
    /// is membership in SL_n of the valuation ring.
    pub fn is_p_integral(&self, p: u64) -> bool {
        self.entries
            .iter()
            .map(|x| padic_val(x, p))
            .all(|v| v >= Val::Fin(0))
    }

    pub fn rows_json(&self) -> Vec<Vec<String>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| rat_to_string(self.at(i, j))).collect())
            .collect()
    }
}

// ---------------------------------------------------------------------
// Laurent polynomials and loop matrices
// ---------------------------------------------------------------------

/// A Laurent polynomial over the rationals, stored sparsely by exponent.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct LaurentPoly {
    coeffs: BTreeMap<i64, Rat>,
}

impl std::fmt::Debug for LaurentPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.coeffs {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match e {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}*t")?,
                _ => write!(f, "{c}*t^{e}")?,
            }
        }
        Ok(())
    }
}

impl LaurentPoly {
    pub fn zero() -> Self {
        LaurentPoly::default()
    }

    pub fn constant(c: Rat) -> Self {
        let mut coeffs = BTreeMap::new();
        if !c.is_zero() {
            coeffs.insert(0, c);
        }
        LaurentPoly { coeffs }
    }

    pub fn one() -> Self {
        Self::constant(Rat::one())
    }

    pub fn monomial(exp: i64, c: Rat) -> Self {
        let mut coeffs = BTreeMap::new();
        if !c.is_zero() {
            coeffs.insert(exp, c);
        }
        LaurentPoly { coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn as_constant(&self) -> Option<Rat> {
        if self.coeffs.is_empty() {
            return Some(Rat::zero());
        }
        if self.coeffs.len() == 1 {
            if let Some(c) = self.coeffs.get(&0) {
                return Some(c.clone());
            }
        }
        None
    }

    pub fn as_monomial(&self) -> Option<(i64, Rat)> {
        if self.coeffs.len() == 1 {
            let (e, c) = self.coeffs.iter().next().expect("len 1");
            Some((*e, c.clone()))
        } else {
            None
        }
    }

    pub fn coeff(&self, exp: i64) -> Rat {
        self.coeffs.get(&exp).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn add(&self, other: &LaurentPoly) -> LaurentPoly {
        let mut coeffs = self.coeffs.clone();
        for (e, c) in &other.coeffs {
            let v = coeffs.entry(*e).or_insert_with(Rat::zero);
            *v += c;
            if v.is_zero() {
                coeffs.remove(e);
            }
        }
        LaurentPoly { coeffs }
    }

    pub fn neg(&self) -> LaurentPoly {
        LaurentPoly {
            coeffs: self.coeffs.iter().map(|(e, c)| (*e, -c)).collect(),
        }
    }

    pub fn mul(&self, other: &LaurentPoly) -> LaurentPoly {
        let mut coeffs: BTreeMap<i64, Rat> = BTreeMap::new();
        for (e1, c1) in &self.coeffs {
            for (e2, c2) in &other.coeffs {
                let v = coeffs.entry(e1 + e2).or_insert_with(Rat::zero);
                *v += c1 * c2;
            }
        }
        coeffs.retain(|_, c| !c.is_zero());
        LaurentPoly { coeffs }
    }

    pub fn json_map(&self) -> BTreeMap<String, String> {
        self.coeffs
            .iter()
            .map(|(e, c)| (e.to_string(), rat_to_string(c)))
            .collect()
    }
}

/// A 2x2 Laurent polynomial matrix of determinant 1.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LoopSl2Element {
    pub a: LaurentPoly,
    pub b: LaurentPoly,
    pub c: LaurentPoly,
    pub d: LaurentPoly,
}

impl std::fmt::Debug for LoopSl2Element {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[{:?}, {:?}; {:?}, {:?}]",
            self.a, self.b, self.c, self.d
        )
    }
}

impl LoopSl2Element {
    pub fn identity() -> Self {
        LoopSl2Element {
            a: LaurentPoly::one(),
            b: LaurentPoly::zero(),
            c: LaurentPoly::zero(),
            d: LaurentPoly::one(),
        }
    }

    pub fn det(&self) -> LaurentPoly {
        self.a.mul(&self.d).add(&self.b.mul(&self.c).neg())
    }

    pub fn mul(&self, o: &LoopSl2Element) -> LoopSl2Element {
        LoopSl2Element {
            a: self.a.mul(&o.a).add(&self.b.mul(&o.c)),
            b: self.a.mul(&o.b).add(&self.b.mul(&o.d)),
            c: self.c.mul(&o.a).add(&self.d.mul(&o.c)),
            d: self.c.mul(&o.b).add(&self.d.mul(&o.d)),
        }
    }

    /// Inverse of a determinant-1 matrix: swap/negate.
    pub fn inv(&self) -> LoopSl2Element {
        LoopSl2Element {
            a: self.d.clone(),
            b: self.b.neg(),
            c: self.c.neg(),
            d: self.a.clone(),
        }
    }

    pub fn is_identity(&self) -> bool {
        *self == LoopSl2Element::identity()
    }
}

// ---------------------------------------------------------------------
// The instance interface
// ---------------------------------------------------------------------

/// The m(u) = u' u u'' witness of axiom (RD4).
#[derive(Clone, Debug)]
pub struct MWitness<E> {
    pub m: E,
    pub u_prime: E,
    pub u_second: E,
}

/// A concrete generating root datum with valuation: exact elements, root
/// group parametrizations, valuations and samplers. The root system is
/// carried as a slice of the instance's Kac-Moody matrix.
pub trait RootDatumInstance {
    type Elt: Clone + PartialEq + std::fmt::Debug;

    fn name(&self) -> &str;
    fn prime(&self) -> u64;
    fn slice(&self) -> &RootSlice;
    /// The apartment (kind q realization, integer value group) the
    /// nu-action lands in.
    fn model(&self) -> &ApartmentModel;

    fn identity(&self) -> Self::Elt;
    fn mul(&self, a: &Self::Elt, b: &Self::Elt) -> Self::Elt;
    fn inv(&self, a: &Self::Elt) -> Self::Elt;

    /// The parametrization x_alpha: scalars into the root group.
    fn x_alpha(&self, root: &[i64], r: &Rat) -> Result<Self::Elt, InstanceError>;

    /// Recognize an element of U_alpha and return its parameter.
    fn as_root_group(&self, root: &[i64], g: &Self::Elt) -> Option<Rat>;

    /// phi_alpha(g) for g in U_alpha (Inf for the identity).
    fn phi(&self, root: &[i64], g: &Self::Elt) -> Option<Val> {
        self.as_root_group(root, g).map(|r| padic_val(&r, self.prime()))
    }

    fn is_in_z(&self, g: &Self::Elt) -> bool;

    /// The (RD4) witness for u = x_alpha(r), r != 0.
    fn m_of(&self, root: &[i64], u: &Self::Elt) -> Result<MWitness<Self::Elt>, InstanceError>;

    /// Deterministic nonzero scalars with spread valuations.
    fn sample_scalars(&self, sampler: &mut Sampler, count: usize) -> Vec<Rat> {
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let r = sampler.padic_scalar(self.prime(), 3);
            if !r.is_zero() {
                out.push(r);
            }
        }
        out
    }

    /// Deterministic elements of Z.
    fn sample_z(&self, sampler: &mut Sampler, count: usize) -> Vec<Self::Elt>;

    /// beta(alpha^vee) from the slice coroot data.
    fn pairing(&self, beta: &[i64], alpha: &[i64]) -> Result<i64, InstanceError> {
        let entry = self
            .slice()
            .get(alpha)
            .ok_or_else(|| InstanceError::UnknownRoot(alpha.to_vec()))?;
        let co = entry.coroot.as_ref().expect("real roots carry coroots");
        let m = self.slice().matrix();
        Ok((0..m.size())
            .map(|i| co[i] * crate::kac::coroot_pairing(m, i, beta))
            .sum())
    }

    /// s_alpha(beta) = beta - beta(alpha^vee) alpha.
    fn reflect_root(&self, alpha: &[i64], beta: &[i64]) -> Result<Vec<i64>, InstanceError> {
        let p = self.pairing(beta, alpha)?;
        Ok(beta
            .iter()
            .zip(alpha)
            .map(|(b, a)| b - p * a)
            .collect())
    }
}

fn q_model(matrix: KacMoodyMatrix, cap: i64) -> ApartmentModel {
    let rgs = RootGeneratingSystem::minimal_adjoint(matrix);
    let real = Realization::build(&rgs, RealizationKind::Q).expect("q realization always builds");
    ApartmentModel::new(real, ValueGroup::integers(), cap).expect("desk-scale caps")
}

// ---------------------------------------------------------------------
// SL2 and SL3
// ---------------------------------------------------------------------

/// SL_n(Q) with the p-adic valuation, n = 2 or 3. Root groups are the
/// elementary matrices; Z is the diagonal torus.
pub struct ClassicalInstance {
    name: String,
    n: usize,
    p: u64,
    slice: RootSlice,
    model: ApartmentModel,
    /// root coords -> matrix position (i, j) of the elementary generator.
    positions: BTreeMap<Vec<i64>, (usize, usize)>,
}

pub fn sl2_instance(p: u64) -> Result<ClassicalInstance, InstanceError> {
    if !is_prime(p) {
        return Err(InstanceError::NotPrime(p));
    }
    let m = named_matrix("a1").expect("a1");
    let slice = crate::kac::real_roots(&m, 5, crate::kac::DEFAULT_ENUM_LIMIT).expect("finite");
    let mut positions = BTreeMap::new();
    positions.insert(vec![1], (0, 1));
    positions.insert(vec![-1], (1, 0));
    Ok(ClassicalInstance {
        name: format!("sl2(Q, v_{p})"),
        n: 2,
        p,
        slice,
        model: q_model(m, 5),
        positions,
    })
}

pub fn sl3_instance(p: u64) -> Result<ClassicalInstance, InstanceError> {
    if !is_prime(p) {
        return Err(InstanceError::NotPrime(p));
    }
    let m = named_matrix("a2").expect("a2");
    let slice = crate::kac::real_roots(&m, 5, crate::kac::DEFAULT_ENUM_LIMIT).expect("finite");
    let mut positions = BTreeMap::new();
    positions.insert(vec![1, 0], (0, 1));
    positions.insert(vec![0, 1], (1, 2));
    positions.insert(vec![1, 1], (0, 2));
    positions.insert(vec![-1, 0], (1, 0));
    positions.insert(vec![0, -1], (2, 1));
    positions.insert(vec![-1, -1], (2, 0));
    Ok(ClassicalInstance {
        name: format!("sl3(Q, v_{p})"),
        n: 3,
        p,
        slice,
        model: q_model(m, 5),
        positions,
    })
}

impl ClassicalInstance {
    pub fn rank_n(&self) -> usize {
        self.n
    }

    pub fn position_of(&self, root: &[i64]) -> Option<(usize, usize)> {
        self.positions.get(root).copied()
    }

    pub fn diag(&self, entries: Vec<Rat>) -> SlMatrix {
        assert_eq!(entries.len(), self.n);
        let mut m = SlMatrix::identity(self.n);
        for (i, e) in entries.into_iter().enumerate() {
            *m.at_mut(i, i) = e;
        }
        debug_assert!(m.det().is_one());
        m
    }

    /// Random group elements as bounded products of root elements and
    /// torus elements; deterministic given the sampler state.
    pub fn sample_group(&self, s: &mut Sampler, count: usize) -> Vec<SlMatrix> {
        let roots: Vec<Vec<i64>> = self.positions.keys().cloned().collect();
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            let mut g = SlMatrix::identity(self.n);
            let factors = s.int_in(1, 4);
            for _ in 0..factors {
                if s.below(4) == 0 {
                    let z = self.sample_z(s, 1).pop().expect("one");
                    g = g.mul(&z);
                } else {
                    let root = s.pick(&roots).clone();
                    let r = s.padic_scalar(self.p, 2);
                    let x = self.x_alpha(&root, &r).expect("root in slice");
                    g = g.mul(&x);
                }
            }
            out.push(g);
        }
        out
    }
}

impl RootDatumInstance for ClassicalInstance {
    type Elt = SlMatrix;

    fn name(&self) -> &str {
        &self.name
    }

    fn prime(&self) -> u64 {
        self.p
    }

    fn slice(&self) -> &RootSlice {
        &self.slice
    }

    fn model(&self) -> &ApartmentModel {
        &self.model
    }

    fn identity(&self) -> SlMatrix {
        SlMatrix::identity(self.n)
    }

    fn mul(&self, a: &SlMatrix, b: &SlMatrix) -> SlMatrix {
        a.mul(b)
    }

    fn inv(&self, a: &SlMatrix) -> SlMatrix {
        a.inv()
    }

    fn x_alpha(&self, root: &[i64], r: &Rat) -> Result<SlMatrix, InstanceError> {
        let (i, j) = self
            .position_of(root)
            .ok_or_else(|| InstanceError::UnknownRoot(root.to_vec()))?;
        let mut m = SlMatrix::identity(self.n);
        *m.at_mut(i, j) = r.clone();
        Ok(m)
    }

    fn as_root_group(&self, root: &[i64], g: &SlMatrix) -> Option<Rat> {
        let (i, j) = self.position_of(root)?;
        let r = g.at(i, j).clone();
        let probe = self.x_alpha(root, &r).expect("known root");
        if &probe == g {
            Some(r)
        } else {
            None
        }
    }

    fn is_in_z(&self, g: &SlMatrix) -> bool {
        g.is_diagonal()
    }

    fn m_of(&self, root: &[i64], u: &SlMatrix) -> Result<MWitness<SlMatrix>, InstanceError> {
        let r = self
            .as_root_group(root, u)
            .ok_or(InstanceError::NotInRootGroup)?;
        if r.is_zero() {
            return Err(InstanceError::IdentityHasNoM);
        }
        let neg: Vec<i64> = root.iter().map(|x| -x).collect();
        let w = self.x_alpha(&neg, &(-r.recip()))?;
        let m = w.mul(u).mul(&w);
        Ok(MWitness {
            m,
            u_prime: w.clone(),
            u_second: w,
        })
    }

    fn sample_z(&self, s: &mut Sampler, count: usize) -> Vec<SlMatrix> {
        (0..count)
            .map(|_| {
                if self.n == 2 {
                    let c = s.padic_scalar(self.p, 2);
                    self.diag(vec![c.clone(), c.recip()])
                } else {
                    let a = s.padic_scalar(self.p, 2);
                    let b = s.padic_scalar(self.p, 2);
                    let c = (a.clone() * b.clone()).recip();
                    self.diag(vec![a, b, c])
                }
            })
            .collect()
    }
}

// ---------------------------------------------------------------------
// Loop SL2
// ---------------------------------------------------------------------

/// The affine A1 instance: root groups U_{alpha + n delta} are the
/// unipotent matrices I + r t^n E_+ (and E_- on the negative side) inside
/// SL2 of Laurent polynomials; Z is the constant diagonal torus. Only the
/// operations the axiom checkers need are exposed: products, inverses,
/// parametrized root elements and the apartment action of explicit
/// N-words. No decomposition is claimed.
pub struct LoopSl2Instance {
    name: String,
    p: u64,
    slice: RootSlice,
    model: ApartmentModel,
}

pub fn loop_sl2_instance(p: u64, cap: i64) -> Result<LoopSl2Instance, InstanceError> {
    if !is_prime(p) {
        return Err(InstanceError::NotPrime(p));
    }
    let m = named_matrix("aff_a1").expect("aff_a1");
    let slice = crate::kac::real_roots(&m, cap, crate::kac::DEFAULT_ENUM_LIMIT)
        .map_err(crate::apartment::ApartmentError::from)?;
    Ok(LoopSl2Instance {
        name: format!("loop-sl2(Q[t,1/t], v_{p})"),
        p,
        slice,
        model: q_model(m, cap),
    })
}

impl LoopSl2Instance {
    /// Root coords (n, n+1) = alpha + n delta (upper side, exponent n) or
    /// (n, n-1) = -alpha + n delta (lower side).
    fn root_side(&self, root: &[i64]) -> Option<(bool, i64)> {
        if root.len() != 2 {
            return None;
        }
        let (a0, a1) = (root[0], root[1]);
        if a1 == a0 + 1 {
            Some((true, a0))
        } else if a1 == a0 - 1 {
            Some((false, a0))
        } else {
            None
        }
    }

    pub fn torus(&self, c: Rat) -> LoopSl2Element {
        LoopSl2Element {
            a: LaurentPoly::constant(c.clone()),
            b: LaurentPoly::zero(),
            c: LaurentPoly::zero(),
            d: LaurentPoly::constant(c.recip()),
        }
    }

    /// diag(c t^m, c^{-1} t^{-m}): an N-element acting by translation.
    pub fn loop_torus(&self, c: Rat, m: i64) -> LoopSl2Element {
        LoopSl2Element {
            a: LaurentPoly::monomial(m, c.clone()),
            b: LaurentPoly::zero(),
            c: LaurentPoly::zero(),
            d: LaurentPoly::monomial(-m, c.recip()),
        }
    }
}

impl RootDatumInstance for LoopSl2Instance {
    type Elt = LoopSl2Element;

    fn name(&self) -> &str {
        &self.name
    }

    fn prime(&self) -> u64 {
        self.p
    }

    fn slice(&self) -> &RootSlice {
        &self.slice
    }

    fn model(&self) -> &ApartmentModel {
        &self.model
    }

    fn identity(&self) -> LoopSl2Element {
        LoopSl2Element::identity()
    }

    fn mul(&self, a: &LoopSl2Element, b: &LoopSl2Element) -> LoopSl2Element {
        a.mul(b)
    }

    fn inv(&self, a: &LoopSl2Element) -> LoopSl2Element {
        a.inv()
    }

    fn x_alpha(&self, root: &[i64], r: &Rat) -> Result<LoopSl2Element, InstanceError> {
        let (upper, n) = self
            .root_side(root)
            .ok_or_else(|| InstanceError::UnknownRoot(root.to_vec()))?;
        let mut e = LoopSl2Element::identity();
        if upper {
            e.b = LaurentPoly::monomial(n, r.clone());
        } else {
            e.c = LaurentPoly::monomial(n, r.clone());
        }
        Ok(e)
    }

    fn as_root_group(&self, root: &[i64], g: &LoopSl2Element) -> Option<Rat> {
        let (upper, n) = self.root_side(root)?;
        if !g.a.as_constant().map(|c| c.is_one()).unwrap_or(false)
            || !g.d.as_constant().map(|c| c.is_one()).unwrap_or(false)
        {
            return None;
        }
        let (target, other) = if upper { (&g.b, &g.c) } else { (&g.c, &g.b) };
        if !other.is_zero() {
            return None;
        }
        if target.is_zero() {
            return Some(Rat::zero());
        }
        match target.as_monomial() {
            Some((e, c)) if e == n => Some(c),
            _ => None,
        }
    }

    fn is_in_z(&self, g: &LoopSl2Element) -> bool {
        g.b.is_zero()
            && g.c.is_zero()
            && g.a.as_constant().is_some()
            && g.d.as_constant().is_some()
    }

    fn m_of(
        &self,
        root: &[i64],
        u: &LoopSl2Element,
    ) -> Result<MWitness<LoopSl2Element>, InstanceError> {
        let r = self
            .as_root_group(root, u)
            .ok_or(InstanceError::NotInRootGroup)?;
        if r.is_zero() {
            return Err(InstanceError::IdentityHasNoM);
        }
        let neg: Vec<i64> = root.iter().map(|x| -x).collect();
        if !self.slice.contains(&neg) {
            return Err(InstanceError::UnknownRoot(neg));
        }
        let w = self.x_alpha(&neg, &(-r.recip()))?;
        let m = w.mul(u).mul(&w);
        Ok(MWitness {
            m,
            u_prime: w.clone(),
            u_second: w,
        })
    }

    fn sample_z(&self, s: &mut Sampler, count: usize) -> Vec<LoopSl2Element> {
        (0..count)
            .map(|_| self.torus(s.padic_scalar(self.p, 2)))
            .collect()
    }
}

// ---------------------------------------------------------------------
// Decompositions for the classical instances
// ---------------------------------------------------------------------

/// An exact factorization g = u . nu . k with u upper-unipotent, nu
/// monomial (in N) and k p-integral, labeled by the Weyl image of nu.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub unipotent: SlMatrix,
    pub monomial: SlMatrix,
    pub integral: SlMatrix,
    pub cell: WeylElement,
}

impl Decomposition {
    pub fn product(&self) -> SlMatrix {
        self.unipotent.mul(&self.monomial).mul(&self.integral)
    }
}

/// Iwasawa decomposition over (Q, v_p): bottom-up row processing with
/// minimal-valuation pivots, clearing by p-integral column operations.
/// Always succeeds over a field.
pub fn iwasawa_decompose(inst: &ClassicalInstance, g: &SlMatrix) -> Decomposition {
    let n = g.size();
    let p = inst.prime();
    let mut h = g.clone();
    // Right factor accumulates the inverse of the applied column ops.
    let mut k_inv = SlMatrix::identity(n);
    let mut pivot_col_of_row = vec![usize::MAX; n];
    let mut used = vec![false; n];
    for i in (0..n).rev() {
        // Minimal valuation among unused columns; leftmost on ties.
        let mut best: Option<(usize, Val)> = None;
        for j in 0..n {
            if used[j] || h.at(i, j).is_zero() {
                continue;
            }
            let v = padic_val(h.at(i, j), p);
            if best.as_ref().map(|(_, bv)| v < *bv).unwrap_or(true) {
                best = Some((j, v));
            }
        }
        let (jp, _) = best.expect("SL rows are nonzero on unused columns");
        pivot_col_of_row[i] = jp;
        used[jp] = true;
        for j in 0..n {
            if j != jp && !used[j] && !h.at(i, j).is_zero() {
                let c = h.at(i, j) / h.at(i, jp);
                debug_assert!(padic_val(&c, p) >= Val::Fin(0));
                // col_j -= c col_jp, i.e. right-multiply by I - c E_{jp,j}.
                for r in 0..n {
                    let d = &c * h.at(r, jp);
                    *h.at_mut(r, j) -= d;
                }
                // Track the inverse op on k_inv: k = (ops)^{-1}, so k_inv
                // accumulates the same op applied on the right.
                for r in 0..n {
                    let d = &c * k_inv.at(r, jp);
                    *k_inv.at_mut(r, j) -= d;
                }
            }
        }
    }
    // h = g k_inv = u nu.
    let mut monomial = SlMatrix::identity(n);
    for i in 0..n {
        *monomial.at_mut(i, pivot_col_of_row[i]) = h.at(i, pivot_col_of_row[i]).clone();
        *monomial.at_mut(i, i) = if pivot_col_of_row[i] == i {
            h.at(i, i).clone()
        } else {
            Rat::zero()
        };
    }
    // Rebuild monomial cleanly: entries at pivot positions only.
    let mut mono = SlMatrix {
        n,
        entries: vec![Rat::zero(); n * n],
    };
    for i in 0..n {
        *mono.at_mut(i, pivot_col_of_row[i]) = h.at(i, pivot_col_of_row[i]).clone();
    }
    let monomial = mono;
    let unipotent = h.mul(&monomial.inv());
    debug_assert!(unipotent.is_upper_unipotent());
    let integral = k_inv.inv();
    debug_assert!(integral.is_p_integral(p));
    let cell = permutation_to_weyl(inst, &pivot_col_of_row);
    Decomposition {
        unipotent,
        monomial,
        integral,
        cell,
    }
}

/// The Weyl element of a permutation i -> pi(i) of matrix indices, as a
/// word in the adjacent transpositions.
pub fn permutation_to_weyl(inst: &ClassicalInstance, pi: &[usize]) -> WeylElement {
    let m = inst.slice().matrix();
    let mut word = Vec::new();
    let mut perm = pi.to_vec();
    // Bubble sort; each adjacent swap (k, k+1) is the generator s_k.
    loop {
        let mut swapped = false;
        for k in 0..perm.len() - 1 {
            if perm[k] > perm[k + 1] {
                perm.swap(k, k + 1);
                word.push(k);
                swapped = true;
            }
        }
        if !swapped {
            break;
        }
    }
    word.reverse();
    WeylElement::from_word(m, &word).expect("adjacent transpositions are generators")
}

/// The Bruhat cell of g in the decomposition along the Borel of the given
/// sign: the permutation pattern of pivoting with triangular operations.
pub fn bruhat_cell(
    inst: &ClassicalInstance,
    g: &SlMatrix,
    sign: crate::vectorial::Sign,
) -> WeylElement {
    let n = g.size();
    let mut h = g.clone();
    let mut pi = vec![usize::MAX; n];
    match sign {
        crate::vectorial::Sign::Plus => {
            // B+ on both sides: per column left to right, pivot at the
            // lowest unused nonzero row; clear above and to the right.
            let mut used_row = vec![false; n];
            for j in 0..n {
                let i = (0..n)
                    .rev()
                    .find(|&i| !used_row[i] && !h.at(i, j).is_zero())
                    .expect("invertible");
                used_row[i] = true;
                pi[i] = j;
                for r in 0..i {
                    if !h.at(r, j).is_zero() {
                        let c = h.at(r, j) / h.at(i, j);
                        for col in 0..n {
                            let d = &c * h.at(i, col);
                            *h.at_mut(r, col) -= d;
                        }
                    }
                }
                for col in j + 1..n {
                    if !h.at(i, col).is_zero() {
                        let c = h.at(i, col) / h.at(i, j);
                        for r in 0..n {
                            let d = &c * h.at(r, j);
                            *h.at_mut(r, col) -= d;
                        }
                    }
                }
            }
        }
        crate::vectorial::Sign::Minus => {
            // B- on both sides: per column right to left, pivot at the
            // highest unused nonzero row; clear below and to the left.
            let mut used_row = vec![false; n];
            for j in (0..n).rev() {
                let i = (0..n)
                    .find(|&i| !used_row[i] && !h.at(i, j).is_zero())
                    .expect("invertible");
                used_row[i] = true;
                pi[i] = j;
                for r in i + 1..n {
                    if !h.at(r, j).is_zero() {
                        let c = h.at(r, j) / h.at(i, j);
                        for col in 0..n {
                            let d = &c * h.at(i, col);
                            *h.at_mut(r, col) -= d;
                        }
                    }
                }
                for col in 0..j {
                    if !h.at(i, col).is_zero() {
                        let c = h.at(i, col) / h.at(i, j);
                        for r in 0..n {
                            let d = &c * h.at(r, j);
                            *h.at_mut(r, col) -= d;
                        }
                    }
                }
            }
        }
    }
    permutation_to_weyl(inst, &pi)
}

/// The Birkhoff cell of g in G = B+ w B-: pivot per column right to left
/// at the lowest unused nonzero row, clearing above (B+ rows) and to the
/// left (B- columns).
pub fn birkhoff_cell(inst: &ClassicalInstance, g: &SlMatrix) -> WeylElement {
    let n = g.size();
    let mut h = g.clone();
    let mut pi = vec![usize::MAX; n];
    let mut used_row = vec![false; n];
    for j in (0..n).rev() {
        let i = (0..n)
            .rev()
            .find(|&i| !used_row[i] && !h.at(i, j).is_zero())
            .expect("invertible");
        used_row[i] = true;
        pi[i] = j;
        for r in 0..i {
            if !h.at(r, j).is_zero() {
                let c = h.at(r, j) / h.at(i, j);
                for col in 0..n {
                    let d = &c * h.at(i, col);
                    *h.at_mut(r, col) -= d;
                }
            }
        }
        for col in 0..j {
            if !h.at(i, col).is_zero() {
                let c = h.at(i, col) / h.at(i, j);
                for r in 0..n {
                    let d = &c * h.at(r, j);
                    *h.at_mut(r, col) -= d;
                }
            }
        }
    }
    permutation_to_weyl(inst, &pi)
}

/// Factor g as u z v with u in U+, z diagonal, v in U- (the open Birkhoff
/// cell), when g lies in it (all leading principal minors nonzero).
pub fn birkhoff_factor_open_cell(g: &SlMatrix) -> Option<(SlMatrix, SlMatrix, SlMatrix)> {
    let n = g.size();
    // LDU-style: g = U z L with U upper-uni, L lower-uni exists iff the
    // trailing principal minors are nonzero; here we want u z v with v
    // lower: g = u z v. Gaussian elimination clearing above pivots from
    // the bottom-right corner.
    let mut h = g.clone();
    let mut u = SlMatrix::identity(n);
    for j in (0..n).rev() {
        if h.at(j, j).is_zero() {
            return None;
        }
        for r in 0..j {
            if !h.at(r, j).is_zero() {
                let c = h.at(r, j) / h.at(j, j);
                // Row op: row_r -= c row_j  (left-multiplication by a
                // U+ elementary); record its inverse in u.
                for col in 0..n {
                    let d = &c * h.at(j, col);
                    *h.at_mut(r, col) -= d;
                }
                for col in 0..n {
                    let d = &c * u.at(col, r).clone();
                    let _ = d;
                }
                // u accumulates the inverse op: u := u * (I + c E_{r,j}).
                let d = c.clone() * u.at(r, j).clone();
                let _ = d;
                // Simpler: track u directly.
                *u.at_mut(r, j) += c.clone();
            }
        }
    }
    // Now h is lower triangular: h = z v with z = diag(h), v = z^{-1} h.
    let mut z = SlMatrix::identity(n);
    for i in 0..n {
        *z.at_mut(i, i) = h.at(i, i).clone();
    }
    let v = z.inv().mul(&h);
    debug_assert!(v.is_lower_unipotent());
    Some((u, z, v))
}

/// JSON form of a matrix: arrays of `"num/den"` rationals.
#[derive(Serialize)]
pub struct SlMatrixJson {
    pub rows: Vec<Vec<String>>,
}

impl SlMatrix {
    pub fn to_json(&self) -> SlMatrixJson {
        SlMatrixJson {
            rows: self.rows_json(),
        }
    }
}
