//! The affine apartment: walls and half-spaces, finitely described
//! filters (points, germs, sectors, chimneys), enclosure maps and the
//! affine Weyl group.
//!
//! Filters are never materialized as sets of sets. Each `Shape` variant
//! documents how the supremum of a linear form over it is computed; germ
//! variants use limit semantics, with an attainment flag deciding whether
//! a level has to dominate strictly.

use crate::kac::{KacMoodyMatrix, Root, RootSlice, RootTag, WeylElement};
use crate::lp::{self, LpResult};
use crate::rat::{rat_from_str, rat_to_string, serde_rat, Bound, Rat, ValueGroup};
use crate::vectorial::{dot, kernel_basis, Point, Realization, Sign, TitsVerdict, VectorialFacet};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ApartmentError {
    #[error("root {0:?} is not in the enumerated slice (height cap too low)")]
    RootOutsideSlice(Vec<i64>),
    #[error("level {level} is not in the value set of this root: ghost wall")]
    GhostWall { level: String },
    #[error("the totally imaginary family with discrete levels is uncountable; use real levels")]
    RefusedUncountableFamily,
    #[error("enclosure chain containment failed: {0}")]
    ChainViolation(String),
    #[error("shape not supported by this operation: {0}")]
    UnsupportedShape(String),
    #[error("dimension mismatch")]
    DimensionMismatch,
    #[error(transparent)]
    Kac(#[from] crate::kac::KacError),
    #[error(transparent)]
    Vectorial(#[from] crate::vectorial::VectorialError),
}

// ---------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------

/// The affine apartment: a realization, a value group Lambda (uniform
/// over all roots, as for a split group over a valued field) and root
/// slices at an explicit height cap.
#[derive(Clone, Debug)]
pub struct ApartmentModel {
    real: Realization,
    value_group: ValueGroup,
    height_cap: i64,
    real_slice: RootSlice,
    full_slice: RootSlice,
}

impl ApartmentModel {
    pub fn new(
        real: Realization,
        value_group: ValueGroup,
        height_cap: i64,
    ) -> Result<Self, ApartmentError> {
        let m = real.matrix().clone();
        let real_slice = crate::kac::real_roots(&m, height_cap, crate::kac::DEFAULT_ENUM_LIMIT)?;
        let full_slice = crate::kac::full_slice(&m, height_cap, crate::kac::DEFAULT_ENUM_LIMIT)?;
        Ok(ApartmentModel {
            real,
            value_group,
            height_cap,
            real_slice,
            full_slice,
        })
    }

    pub fn realization(&self) -> &Realization {
        &self.real
    }

    pub fn matrix(&self) -> &KacMoodyMatrix {
        self.real.matrix()
    }

    pub fn dim(&self) -> usize {
        self.real.dim()
    }

    pub fn height_cap(&self) -> i64 {
        self.height_cap
    }

    pub fn value_group(&self) -> &ValueGroup {
        &self.value_group
    }

    /// The value set Lambda_alpha. Uniform by default, which satisfies
    /// Lambda_alpha = -Lambda_{-alpha} automatically.
    pub fn lambda(&self, _root: &[i64]) -> &ValueGroup {
        &self.value_group
    }

    pub fn real_slice(&self) -> &RootSlice {
        &self.real_slice
    }

    pub fn full_slice(&self) -> &RootSlice {
        &self.full_slice
    }

    pub fn root_form(&self, coords: &[i64]) -> Vec<Rat> {
        self.real.root_form(coords)
    }

    /// The coroot vector of a real root in the slice.
    pub fn coroot_of(&self, coords: &[i64]) -> Result<Vec<Rat>, ApartmentError> {
        let entry = self
            .real_slice
            .get(coords)
            .ok_or_else(|| ApartmentError::RootOutsideSlice(coords.to_vec()))?;
        let co = entry
            .coroot
            .as_ref()
            .expect("real slice entries carry coroots");
        Ok(self.real.coroot_vector(co))
    }

    pub fn eval_root(&self, coords: &[i64], x: &[Rat]) -> Rat {
        self.real.eval_root(coords, x)
    }
}

// ---------------------------------------------------------------------
// Half-spaces and convex intersections
// ---------------------------------------------------------------------

/// D(alpha, lambda) = { x : alpha(x) + lambda >= 0 }.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct HalfSpace {
    pub root: Vec<i64>,
    pub level: Rat,
}

impl HalfSpace {
    pub fn contains(&self, model: &ApartmentModel, x: &[Rat]) -> bool {
        model.eval_root(&self.root, x) + &self.level >= Rat::zero()
    }

    pub fn contains_strictly(&self, model: &ApartmentModel, x: &[Rat]) -> bool {
        model.eval_root(&self.root, x) + &self.level > Rat::zero()
    }

    /// The wall M(alpha, lambda) is true when lambda lies in the value
    /// set of the root, a ghost wall otherwise.
    pub fn is_true_wall(&self, model: &ApartmentModel) -> bool {
        model.lambda(&self.root).contains(&self.level)
    }
}

/// A finite intersection of closed and open half-spaces.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ConvexIntersection {
    pub closed: Vec<HalfSpace>,
    pub open: Vec<HalfSpace>,
}

impl ConvexIntersection {
    pub fn whole() -> Self {
        ConvexIntersection::default()
    }

    pub fn contains(&self, model: &ApartmentModel, x: &[Rat]) -> bool {
        self.closed.iter().all(|h| h.contains(model, x))
            && self.open.iter().all(|h| h.contains_strictly(model, x))
    }

    fn closed_rows(&self, model: &ApartmentModel) -> Vec<(Vec<Rat>, Rat)> {
        // alpha(x) + lambda >= 0  <=>  -alpha(x) <= lambda.
        self.closed
            .iter()
            .chain(self.open.iter())
            .map(|h| {
                let f = model.root_form(&h.root);
                (f.iter().map(|v| -v).collect(), h.level.clone())
            })
            .collect()
    }

    /// Supremum of a linear form over the closure.
    pub fn sup_form(&self, model: &ApartmentModel, form: &[Rat]) -> Bound {
        let rows = self.closed_rows(model);
        match lp::maximize(form, &rows) {
            LpResult::Infeasible => Bound::NegInf,
            LpResult::Unbounded => Bound::PosInf,
            LpResult::Optimal { value, .. } => Bound::at(value),
        }
    }

    pub fn is_empty_closure(&self, model: &ApartmentModel) -> bool {
        let rows = self.closed_rows(model);
        lp::maximize(&vec![Rat::zero(); model.dim()], &rows) == LpResult::Infeasible
    }

    /// Is `hs` implied by this intersection (over closures)?
    fn implies(&self, model: &ApartmentModel, hs: &HalfSpace) -> bool {
        let f: Vec<Rat> = model.root_form(&hs.root).iter().map(|v| -v).collect();
        match self.sup_form(model, &f) {
            Bound::NegInf => true,
            Bound::PosInf => false,
            Bound::Fin { value, .. } => value <= hs.level,
        }
    }

    /// Canonical form: redundant half-spaces dropped in sorted order,
    /// result sorted by (root, level). Equal normalized values mean equal
    /// sets for nonempty bodies.
    pub fn normalize(&self, model: &ApartmentModel) -> ConvexIntersection {
        let mut closed = self.closed.clone();
        closed.sort();
        closed.dedup();
        let mut keep: Vec<HalfSpace> = Vec::new();
        for i in 0..closed.len() {
            let mut rest = ConvexIntersection {
                closed: Vec::new(),
                open: self.open.clone(),
            };
            rest.closed.extend_from_slice(&keep);
            rest.closed.extend_from_slice(&closed[i + 1..]);
            if !rest.implies(model, &closed[i]) {
                keep.push(closed[i].clone());
            }
        }
        let mut open = self.open.clone();
        open.sort();
        open.dedup();
        ConvexIntersection { closed: keep, open }
    }

    /// Does this body contain `other` (comparing closures, exactly)?
    pub fn contains_body(&self, model: &ApartmentModel, other: &ConvexIntersection) -> bool {
        if other.is_empty_closure(model) {
            return true;
        }
        self.closed
            .iter()
            .chain(self.open.iter())
            .all(|h| other.implies(model, h))
    }

    /// Set equality of closures. Minimal certificates of a degenerate set
    /// are not unique, so equality goes through mutual containment.
    pub fn same_set(&self, model: &ApartmentModel, other: &ConvexIntersection) -> bool {
        self.contains_body(model, other) && other.contains_body(model, self)
    }

    /// Affine hull dimension of the closure. `None` for an empty body.
    pub fn affine_hull_dim(&self, model: &ApartmentModel) -> Option<usize> {
        if self.is_empty_closure(model) {
            return None;
        }
        let mut equalities: Vec<Vec<Rat>> = Vec::new();
        for h in self.closed.iter().chain(self.open.iter()) {
            // Tight everywhere iff max of alpha(x) + lambda is 0.
            let f = model.root_form(&h.root);
            if let Bound::Fin { value, .. } = self.sup_form(model, &f) {
                if value + &h.level == Rat::zero() {
                    equalities.push(f);
                }
            }
        }
        let rank = model.dim() - kernel_basis(&equalities, model.dim()).len();
        Some(model.dim() - rank)
    }
}

// ---------------------------------------------------------------------
// Shapes (finitely described filters)
// ---------------------------------------------------------------------

/// Finitely described subsets and filters of the apartment.
///
/// Set variants: `Point`, `FiniteSet`, `Segment`, `Ray`, `SectorFace`,
/// `Convex`. Filter variants with germ semantics: `OpenSegmentGerm`
/// (germ at the first endpoint of the half-open segment), `RayGerm` and
/// `SectorFaceGerm` (germs at infinity), `LocalFacet` (germ at the base
/// point), `Chimney` (local facet plus direction cone, the filter whose
/// enclosure is the chimney of the base facet) and `ChimneyGerm` (its
/// germ at infinity).
#[derive(Clone, Debug, PartialEq)]
pub enum Shape {
    Point(Point),
    FiniteSet(Vec<Point>),
    Segment(Point, Point),
    OpenSegmentGerm(Point, Point),
    Ray(Point, Point),
    RayGerm(Point, Point),
    LocalFacet(Point, VectorialFacet),
    SectorFace(Point, VectorialFacet),
    SectorFaceGerm(Point, VectorialFacet),
    Chimney(Point, VectorialFacet, VectorialFacet),
    ChimneyGerm(Point, VectorialFacet, VectorialFacet),
    Convex(ConvexIntersection),
}

/// Sign profile of a linear form on a facet cone: positive somewhere,
/// identically zero, or strictly negative inside.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum ConeSign {
    SomewherePositive,
    IdenticallyZero,
    StrictlyNegative,
}

fn cone_sign(real: &Realization, facet: &VectorialFacet, form: &[Rat]) -> ConeSign {
    // Identically zero iff the form kills the span of the facet, i.e. the
    // w-image of the kernel of the J-forms.
    let j_forms: Vec<Vec<Rat>> = facet
        .j_set()
        .iter()
        .map(|&j| real.simple_form(j).to_vec())
        .collect();
    let span = kernel_basis(&j_forms, real.dim());
    let vanishes = span.iter().all(|k| {
        let img = real.act_point(facet.wrep(), k);
        dot(form, &img).is_zero()
    });
    if vanishes {
        return ConeSign::IdenticallyZero;
    }
    // Positive somewhere on the closed cone iff
    //   x in w(closed cone of sign/J), form(x) >= 1
    // is feasible; the cone constraints pull back through w to the forms
    // of the roots w(alpha_i).
    let mut rows: Vec<(Vec<Rat>, Rat)> = Vec::new();
    for i in 0..real.rank() {
        let mut e = vec![0i64; real.rank()];
        e[i] = 1;
        let moved = facet.wrep().apply_root(&e);
        let f = real.root_form(&moved);
        let signed: Vec<Rat> = match facet.sign() {
            Sign::Plus => f,
            Sign::Minus => f.iter().map(|v| -v).collect(),
        };
        if facet.j_set().contains(&i) {
            rows.push((signed.clone(), Rat::zero()));
            rows.push((signed.iter().map(|v| -v).collect(), Rat::zero()));
        } else {
            rows.push((signed.iter().map(|v| -v).collect(), Rat::zero()));
        }
    }
    rows.push((form.iter().map(|v| -v).collect(), -Rat::one()));
    if lp::maximize(&vec![Rat::zero(); real.dim()], &rows) != LpResult::Infeasible {
        ConeSign::SomewherePositive
    } else {
        ConeSign::StrictlyNegative
    }
}

impl Shape {
    /// Supremum of `form` over the shape, with germ/limit semantics for
    /// the filter variants.
    pub fn sup_form(&self, model: &ApartmentModel, form: &[Rat]) -> Bound {
        let real = model.realization();
        match self {
            Shape::Point(x) => Bound::at(dot(form, x)),
            Shape::FiniteSet(xs) => xs
                .iter()
                .map(|x| Bound::at(dot(form, x)))
                .fold(Bound::NegInf, Bound::join),
            Shape::Segment(x, y) => Bound::at(dot(form, x)).join(Bound::at(dot(form, y))),
            Shape::OpenSegmentGerm(x, y) => {
                let d: Vec<Rat> = y.iter().zip(x).map(|(a, b)| a - b).collect();
                let fd = dot(form, &d);
                Bound::Fin {
                    value: dot(form, x),
                    attained: fd <= Rat::zero(),
                }
            }
            Shape::Ray(x, d) => {
                if dot(form, d) > Rat::zero() {
                    Bound::PosInf
                } else {
                    Bound::at(dot(form, x))
                }
            }
            Shape::RayGerm(x, d) => {
                let fd = dot(form, d);
                if fd > Rat::zero() {
                    Bound::PosInf
                } else if fd.is_zero() {
                    Bound::at(dot(form, x))
                } else {
                    Bound::NegInf
                }
            }
            Shape::LocalFacet(x, f) => match cone_sign(real, f, form) {
                ConeSign::SomewherePositive => Bound::limit(dot(form, x)),
                _ => Bound::at(dot(form, x)),
            },
            Shape::SectorFace(x, f) => match cone_sign(real, f, form) {
                ConeSign::SomewherePositive => Bound::PosInf,
                _ => Bound::at(dot(form, x)),
            },
            Shape::SectorFaceGerm(x, f) => match cone_sign(real, f, form) {
                ConeSign::SomewherePositive => Bound::PosInf,
                ConeSign::IdenticallyZero => Bound::at(dot(form, x)),
                ConeSign::StrictlyNegative => Bound::NegInf,
            },
            Shape::Chimney(x, base, dir) => {
                let base_bound = Shape::LocalFacet(x.clone(), base.clone()).sup_form(model, form);
                match cone_sign(real, dir, form) {
                    ConeSign::SomewherePositive => Bound::PosInf,
                    _ => base_bound,
                }
            }
            Shape::ChimneyGerm(x, base, dir) => match cone_sign(real, dir, form) {
                ConeSign::SomewherePositive => Bound::PosInf,
                ConeSign::IdenticallyZero => {
                    Shape::LocalFacet(x.clone(), base.clone()).sup_form(model, form)
                }
                ConeSign::StrictlyNegative => Bound::NegInf,
            },
            Shape::Convex(ci) => ci.sup_form(model, form),
        }
    }

    /// Spanning points of the shape, where that makes sense (used by the
    /// convex-hull enclosure and the chain checks).
    pub fn hull_points(&self) -> Option<Vec<Point>> {
        match self {
            Shape::Point(x) => Some(vec![x.clone()]),
            Shape::FiniteSet(xs) => Some(xs.clone()),
            Shape::Segment(x, y) => Some(vec![x.clone(), y.clone()]),
            _ => None,
        }
    }

    pub fn base_point(&self) -> Option<&Point> {
        match self {
            Shape::Point(x)
            | Shape::Segment(x, _)
            | Shape::OpenSegmentGerm(x, _)
            | Shape::Ray(x, _)
            | Shape::RayGerm(x, _)
            | Shape::LocalFacet(x, _)
            | Shape::SectorFace(x, _)
            | Shape::SectorFaceGerm(x, _)
            | Shape::Chimney(x, _, _)
            | Shape::ChimneyGerm(x, _, _) => Some(x),
            Shape::FiniteSet(xs) => xs.first(),
            Shape::Convex(_) => None,
        }
    }

    /// Image under an affine Weyl element.
    pub fn apply(&self, model: &ApartmentModel, w: &AffineWeylElement) -> Shape {
        let mv = |x: &Point| w.apply(model, x);
        // Directions transform by the linear part only.
        let mvdir = |x: &Point| model.realization().act_point(w.linear(), x);
        let mvfacet = |f: &VectorialFacet| {
            let m = model.matrix();
            VectorialFacet::new(m, f.sign(), &w.linear().compose(m, f.wrep()), f.j_set())
        };
        match self {
            Shape::Point(x) => Shape::Point(mv(x)),
            Shape::FiniteSet(xs) => Shape::FiniteSet(xs.iter().map(mv).collect()),
            Shape::Segment(x, y) => Shape::Segment(mv(x), mv(y)),
            Shape::OpenSegmentGerm(x, y) => Shape::OpenSegmentGerm(mv(x), mv(y)),
            Shape::Ray(x, d) => Shape::Ray(mv(x), mvdir(d)),
            Shape::RayGerm(x, d) => Shape::RayGerm(mv(x), mvdir(d)),
            Shape::LocalFacet(x, f) => Shape::LocalFacet(mv(x), mvfacet(f)),
            Shape::SectorFace(x, f) => Shape::SectorFace(mv(x), mvfacet(f)),
            Shape::SectorFaceGerm(x, f) => Shape::SectorFaceGerm(mv(x), mvfacet(f)),
            Shape::Chimney(x, b, d) => Shape::Chimney(mv(x), mvfacet(b), mvfacet(d)),
            Shape::ChimneyGerm(x, b, d) => Shape::ChimneyGerm(mv(x), mvfacet(b), mvfacet(d)),
            Shape::Convex(ci) => Shape::Convex(ConvexIntersection {
                closed: ci
                    .closed
                    .iter()
                    .map(|h| w.apply_halfspace(model, h))
                    .collect(),
                open: ci
                    .open
                    .iter()
                    .map(|h| w.apply_halfspace(model, h))
                    .collect(),
            }),
        }
    }
}

// ---------------------------------------------------------------------
// Enclosures
// ---------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RootFamily {
    Phi,
    Delta,
    DeltaTi,
    Sharp,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LevelPolicy {
    Lambda,
    Real,
    /// Lambda on real roots, the full line on imaginary ones.
    MixedMa,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnclosureSpec {
    pub family: RootFamily,
    pub levels: LevelPolicy,
}

impl EnclosureSpec {
    pub const CL_PHI: EnclosureSpec = EnclosureSpec {
        family: RootFamily::Phi,
        levels: LevelPolicy::Lambda,
    };
    pub const CL_PHI_R: EnclosureSpec = EnclosureSpec {
        family: RootFamily::Phi,
        levels: LevelPolicy::Real,
    };
    pub const CL_DELTA: EnclosureSpec = EnclosureSpec {
        family: RootFamily::Delta,
        levels: LevelPolicy::Lambda,
    };
    pub const CL_DELTA_MA: EnclosureSpec = EnclosureSpec {
        family: RootFamily::Delta,
        levels: LevelPolicy::MixedMa,
    };
    pub const CL_DELTA_R: EnclosureSpec = EnclosureSpec {
        family: RootFamily::Delta,
        levels: LevelPolicy::Real,
    };
    pub const CL_SHARP: EnclosureSpec = EnclosureSpec {
        family: RootFamily::Sharp,
        levels: LevelPolicy::Lambda,
    };
    pub const CONV: EnclosureSpec = EnclosureSpec {
        family: RootFamily::DeltaTi,
        levels: LevelPolicy::Real,
    };

    pub fn parse(name: &str) -> Option<EnclosureSpec> {
        Some(match name {
            "cl_sharp" => Self::CL_SHARP,
            "cl_phi" => Self::CL_PHI,
            "cl_phi_r" => Self::CL_PHI_R,
            "cl_delta" => Self::CL_DELTA,
            "cl_delta_ma" => Self::CL_DELTA_MA,
            "cl_delta_r" => Self::CL_DELTA_R,
            "conv" => Self::CONV,
            _ => return None,
        })
    }
}

/// Level for one root: the least admissible level dominating the shape,
/// or no finite constraint.
#[derive(Clone, Debug, PartialEq)]
pub enum LevelOutcome {
    Level(Rat),
    NoConstraint,
}

/// Least element of the level set that dominates sup(-alpha) over the
/// shape. Germ semantics: an unattained supremum needs a strictly larger
/// level; over the full line this collapses to the limit value, which
/// encloses the closure of the germ (documented closure semantics).
pub fn level_for(
    model: &ApartmentModel,
    shape: &Shape,
    root: &Root,
    policy: LevelPolicy,
) -> Result<LevelOutcome, ApartmentError> {
    let coords = root.coords();
    if !model.full_slice.contains(coords) {
        return Err(ApartmentError::RootOutsideSlice(coords.to_vec()));
    }
    let neg_form: Vec<Rat> = model.root_form(coords).iter().map(|v| -v).collect();
    let bound = shape.sup_form(model, &neg_form);
    let group = match policy {
        LevelPolicy::Lambda => model.lambda(coords).clone(),
        LevelPolicy::Real => ValueGroup::FullLine,
        LevelPolicy::MixedMa => match root.tag() {
            RootTag::Real => model.lambda(coords).clone(),
            RootTag::Imaginary => ValueGroup::FullLine,
        },
    };
    Ok(match bound {
        Bound::PosInf => LevelOutcome::NoConstraint,
        Bound::NegInf => LevelOutcome::NoConstraint,
        Bound::Fin { value, attained } => match group.least_geq(&value, !attained) {
            Some(l) => LevelOutcome::Level(l),
            None => LevelOutcome::Level(value),
        },
    })
}

/// An enclosure: the spec and cap it was computed at, plus either a
/// half-space certificate or (for the totally imaginary family) a convex
/// hull given by its spanning points.
#[derive(Clone, Debug, PartialEq)]
pub struct Enclosure {
    pub spec: EnclosureSpec,
    pub cap: i64,
    pub body: EnclosureBody,
}

#[derive(Clone, Debug, PartialEq)]
pub enum EnclosureBody {
    Certificate(ConvexIntersection),
    Hull(Vec<Point>),
}

impl Enclosure {
    pub fn certificate(&self) -> Option<&ConvexIntersection> {
        match &self.body {
            EnclosureBody::Certificate(c) => Some(c),
            EnclosureBody::Hull(_) => None,
        }
    }

    pub fn contains_point(&self, model: &ApartmentModel, x: &[Rat]) -> bool {
        match &self.body {
            EnclosureBody::Certificate(c) => c.contains(model, x),
            EnclosureBody::Hull(pts) => hull_contains(pts, x),
        }
    }
}

fn hull_contains(pts: &[Point], x: &[Rat]) -> bool {
    if pts.is_empty() {
        return false;
    }
    let dim = x.len();
    // Feasibility of sum(c_i p_i) = x, sum c_i = 1, c >= 0.
    let n = pts.len();
    let mut rows: Vec<(Vec<Rat>, Rat)> = Vec::new();
    for d in 0..dim {
        let row: Vec<Rat> = pts.iter().map(|p| p[d].clone()).collect();
        rows.push((row.clone(), x[d].clone()));
        rows.push((row.iter().map(|v| -v).collect(), -x[d].clone()));
    }
    let ones = vec![Rat::one(); n];
    rows.push((ones.clone(), Rat::one()));
    rows.push((ones.iter().map(|v| -v).collect(), -Rat::one()));
    for i in 0..n {
        let mut r = vec![Rat::zero(); n];
        r[i] = -Rat::one();
        rows.push((r, Rat::zero()));
    }
    lp::maximize(&vec![Rat::zero(); n], &rows) != LpResult::Infeasible
}

/// The enclosure of a shape: the intersection over all roots of the
/// family (within the model's height cap) of the least dominating
/// half-spaces. Idempotent; the result records the spec and cap it was
/// computed at, since the Delta families over-approximate above the cap.
pub fn enclosure(
    model: &ApartmentModel,
    spec: EnclosureSpec,
    shape: &Shape,
) -> Result<Enclosure, ApartmentError> {
    if spec.family == RootFamily::DeltaTi {
        if spec.levels != LevelPolicy::Real {
            return Err(ApartmentError::RefusedUncountableFamily);
        }
        let pts = shape.hull_points().ok_or_else(|| {
            ApartmentError::UnsupportedShape(
                "convex-hull enclosure needs a point-listable shape".into(),
            )
        })?;
        return Ok(Enclosure {
            spec,
            cap: model.height_cap,
            body: EnclosureBody::Hull(pts),
        });
    }
    let slice = match spec.family {
        RootFamily::Phi | RootFamily::Sharp => &model.real_slice,
        RootFamily::Delta => &model.full_slice,
        RootFamily::DeltaTi => unreachable!(),
    };
    let mut closed = Vec::new();
    for entry in slice.roots() {
        match level_for(model, shape, &entry.root, spec.levels)? {
            LevelOutcome::Level(l) => closed.push(HalfSpace {
                root: entry.root.coords().to_vec(),
                level: l,
            }),
            LevelOutcome::NoConstraint => {}
        }
    }
    let mut body = ConvexIntersection {
        closed,
        open: vec![],
    };
    if spec.family == RootFamily::Sharp {
        // Finite minimal certificate: normalization prunes every implied
        // half-space in sorted order, picking the lexicographically least
        // surviving root set among minimal certificates.
        body = body.normalize(model);
    }
    Ok(Enclosure {
        spec,
        cap: model.height_cap,
        body: EnclosureBody::Certificate(body),
    })
}

/// Report for the containment chain
/// cl_sharp > cl_phi > cl_delta > cl_delta_ma > cl_delta_r > conv,
/// verified with exact certificates (plus hull points for the last step).
#[derive(Clone, Debug)]
pub struct ChainReport {
    pub stages: Vec<(&'static str, Enclosure)>,
}

pub fn enclosure_chain(
    model: &ApartmentModel,
    shape: &Shape,
) -> Result<ChainReport, ApartmentError> {
    let stages = vec![
        ("cl_sharp", enclosure(model, EnclosureSpec::CL_SHARP, shape)?),
        ("cl_phi", enclosure(model, EnclosureSpec::CL_PHI, shape)?),
        ("cl_delta", enclosure(model, EnclosureSpec::CL_DELTA, shape)?),
        (
            "cl_delta_ma",
            enclosure(model, EnclosureSpec::CL_DELTA_MA, shape)?,
        ),
        (
            "cl_delta_r",
            enclosure(model, EnclosureSpec::CL_DELTA_R, shape)?,
        ),
    ];
    for w in stages.windows(2) {
        let (bigname, big) = &w[0];
        let (smallname, small) = &w[1];
        let bc = big.certificate().expect("chain stages are certificates");
        let sc = small.certificate().expect("chain stages are certificates");
        if !bc.contains_body(model, sc) {
            return Err(ApartmentError::ChainViolation(format!(
                "{bigname} does not contain {smallname}"
            )));
        }
    }
    // conv: every spanning point of the shape must satisfy the cl_delta_r
    // certificate; by convexity the hull is then inside.
    if let Some(pts) = shape.hull_points() {
        let last = &stages.last().expect("nonempty").1;
        for p in &pts {
            if !last.contains_point(model, p) {
                return Err(ApartmentError::ChainViolation(
                    "cl_delta_r does not contain conv".into(),
                ));
            }
        }
    }
    Ok(ChainReport { stages })
}

// ---------------------------------------------------------------------
// Preorder
// ---------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PreorderVerdict {
    Yes,
    No,
    Unknown,
}

/// x <= y iff y - x lies in the positive Tits cone.
pub fn preorder_leq(
    model: &ApartmentModel,
    x: &[Rat],
    y: &[Rat],
    step_cap: usize,
) -> PreorderVerdict {
    let diff: Vec<Rat> = y.iter().zip(x).map(|(a, b)| a - b).collect();
    match crate::vectorial::locate_in_tits_cone(model.realization(), &diff, step_cap) {
        TitsVerdict::InPositive(_) => PreorderVerdict::Yes,
        TitsVerdict::InNegative(_) | TitsVerdict::Outside => PreorderVerdict::No,
        TitsVerdict::Unknown { .. } => PreorderVerdict::Unknown,
    }
}

// ---------------------------------------------------------------------
// Affine Weyl elements
// ---------------------------------------------------------------------

/// An affine transformation x -> linear(x) + translation whose linear
/// part lies in the vectorial Weyl group and whose translation lies in
/// the coroot span with value-group coefficients. Instances are only
/// built from true-wall reflections and lattice translations, so the wall
/// permutation property holds by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineWeylElement {
    linear: WeylElement,
    translation: Point,
}

impl AffineWeylElement {
    pub fn identity(model: &ApartmentModel) -> Self {
        AffineWeylElement {
            linear: WeylElement::identity(model.matrix()),
            translation: vec![Rat::zero(); model.dim()],
        }
    }

    /// The reflection s_{alpha,lambda} in the true wall M(alpha,lambda):
    /// x -> x - (alpha(x) + lambda) alpha^vee. Ghost walls are refused.
    pub fn reflection(
        model: &ApartmentModel,
        root: &[i64],
        level: &Rat,
    ) -> Result<Self, ApartmentError> {
        if !model.lambda(root).contains(level) {
            return Err(ApartmentError::GhostWall {
                level: rat_to_string(level),
            });
        }
        let entry = model
            .real_slice
            .get(root)
            .ok_or_else(|| ApartmentError::RootOutsideSlice(root.to_vec()))?;
        let coroot_coords = entry.coroot.clone().expect("real roots carry coroots");
        // Linear part on Q: q -> q - <q, alpha^vee> alpha.
        let m = model.matrix().clone();
        let n = m.size();
        let mut mat = vec![vec![0i64; n]; n];
        for j in 0..n {
            let mut e = vec![0i64; n];
            e[j] = 1;
            let pairing: i64 = (0..n)
                .map(|i| coroot_coords[i] * crate::kac::coroot_pairing(&m, i, &e))
                .sum();
            for r in 0..n {
                mat[r][j] = e[r] - pairing * root[r];
            }
        }
        let linear = WeylElement::from_action(&m, mat.clone(), mat);
        let coroot_vec = model.real.coroot_vector(&coroot_coords);
        let translation: Point = coroot_vec.iter().map(|c| -(level * c)).collect();
        Ok(AffineWeylElement {
            linear,
            translation,
        })
    }

    /// Translation by sum c_i alpha_i^vee with coefficients in the value
    /// group; coefficients outside it are refused.
    pub fn translation_by_coroots(
        model: &ApartmentModel,
        coeffs: &[Rat],
    ) -> Result<Self, ApartmentError> {
        for c in coeffs {
            if !model.value_group().contains(c) {
                return Err(ApartmentError::GhostWall {
                    level: rat_to_string(c),
                });
            }
        }
        let mut t = vec![Rat::zero(); model.dim()];
        for (i, c) in coeffs.iter().enumerate() {
            let v = model.real.simple_coroot_vector(i);
            for (d, vd) in v.iter().enumerate() {
                t[d] += c * vd;
            }
        }
        Ok(AffineWeylElement {
            linear: WeylElement::identity(model.matrix()),
            translation: t,
        })
    }

    pub fn linear(&self) -> &WeylElement {
        &self.linear
    }

    pub fn translation(&self) -> &Point {
        &self.translation
    }

    pub fn apply(&self, model: &ApartmentModel, x: &[Rat]) -> Point {
        let lx = model.realization().act_point(&self.linear, x);
        lx.iter()
            .zip(&self.translation)
            .map(|(a, b)| a + b)
            .collect()
    }

    pub fn compose(&self, model: &ApartmentModel, other: &AffineWeylElement) -> Self {
        // (u,s) o (v,t): x -> u(v(x) + t) + s.
        let m = model.matrix();
        let ut = model
            .realization()
            .act_point(&self.linear, &other.translation);
        AffineWeylElement {
            linear: self.linear.compose(m, &other.linear),
            translation: ut
                .iter()
                .zip(&self.translation)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn inverse(&self, model: &ApartmentModel) -> Self {
        let m = model.matrix();
        let li = self.linear.inverse(m);
        let ti = model.realization().act_point(&li, &self.translation);
        AffineWeylElement {
            linear: li,
            translation: ti.iter().map(|x| -x).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.linear.is_identity() && self.translation.iter().all(|x| x.is_zero())
    }

    /// Image of a half-space: w D(alpha, l) = D(w alpha, l - (w alpha)(t)).
    pub fn apply_halfspace(&self, model: &ApartmentModel, h: &HalfSpace) -> HalfSpace {
        let new_root = self.linear.apply_root(&h.root);
        let f = model.root_form(&new_root);
        let shift = dot(&f, &self.translation);
        HalfSpace {
            root: new_root,
            level: &h.level - shift,
        }
    }
}

// ---------------------------------------------------------------------
// Chimneys
// ---------------------------------------------------------------------

/// Classification flags of a chimney r(F(x, base), dir).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChimneyFlags {
    /// Direction facet spherical.
    pub splayed: bool,
    /// The generic facet of the support direction is spherical, so the
    /// support's pointwise fixator in the Weyl group is finite.
    pub solid: bool,
    /// Support is the whole apartment.
    pub full: bool,
}

/// Builds the chimney shape, its enclosure under `spec`, and the
/// splayed/solid/full flags.
pub fn chimney(
    model: &ApartmentModel,
    x: &Point,
    base: &VectorialFacet,
    dir: &VectorialFacet,
    spec: EnclosureSpec,
) -> Result<(Shape, Enclosure, ChimneyFlags), ApartmentError> {
    let shape = Shape::Chimney(x.clone(), base.clone(), dir.clone());
    let enc = enclosure(model, spec, &shape)?;
    let m = model.matrix();
    let real = model.realization();
    let splayed = dir.is_spherical(m);
    // Generic direction of the support: an interior point of base + dir.
    let pb = real.facet_interior_point(base)?;
    let pd = if dir.is_trivial(m) {
        vec![Rat::zero(); real.dim()]
    } else {
        real.facet_interior_point(dir)?
    };
    let generic: Point = pb.iter().zip(&pd).map(|(a, b)| a + b).collect();
    let solid = match crate::vectorial::locate_in_tits_cone(real, &generic, 100_000) {
        TitsVerdict::InPositive(f) | TitsVerdict::InNegative(f) => f.is_spherical(m),
        TitsVerdict::Outside => false,
        TitsVerdict::Unknown { .. } => {
            return Err(ApartmentError::UnsupportedShape(
                "solidity undecided in indefinite type".into(),
            ))
        }
    };
    let full = match &enc.body {
        EnclosureBody::Certificate(c) => c.affine_hull_dim(model) == Some(model.dim()),
        EnclosureBody::Hull(_) => false,
    };
    Ok((
        shape,
        enc,
        ChimneyFlags {
            splayed,
            solid,
            full,
        },
    ))
}

// ---------------------------------------------------------------------
// JSON forms
// ---------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
pub struct HalfSpaceJson {
    pub root: Vec<i64>,
    #[serde(with = "serde_rat")]
    pub level: Rat,
}

#[derive(Serialize, Deserialize)]
pub struct ConvexIntersectionJson {
    pub closed: Vec<HalfSpaceJson>,
    pub open: Vec<HalfSpaceJson>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShapeJson {
    Point {
        x: Vec<String>,
    },
    FiniteSet {
        points: Vec<Vec<String>>,
    },
    Segment {
        x: Vec<String>,
        y: Vec<String>,
    },
    OpenSegmentGerm {
        x: Vec<String>,
        y: Vec<String>,
    },
    Ray {
        x: Vec<String>,
        dir: Vec<String>,
    },
    RayGerm {
        x: Vec<String>,
        dir: Vec<String>,
    },
    LocalFacet {
        x: Vec<String>,
        facet: crate::vectorial::FacetJson,
    },
    SectorFace {
        x: Vec<String>,
        facet: crate::vectorial::FacetJson,
    },
    SectorFaceGerm {
        x: Vec<String>,
        facet: crate::vectorial::FacetJson,
    },
    Chimney {
        x: Vec<String>,
        base: crate::vectorial::FacetJson,
        dir: crate::vectorial::FacetJson,
    },
    ChimneyGerm {
        x: Vec<String>,
        base: crate::vectorial::FacetJson,
        dir: crate::vectorial::FacetJson,
    },
    Convex {
        body: ConvexIntersectionJson,
    },
}

fn pt_json(x: &[Rat]) -> Vec<String> {
    x.iter().map(rat_to_string).collect()
}

fn pt_from(x: &[String]) -> Result<Point, ApartmentError> {
    x.iter()
        .map(|s| rat_from_str(s).map_err(|_| ApartmentError::DimensionMismatch))
        .collect()
}

impl ConvexIntersection {
    pub fn to_json(&self) -> ConvexIntersectionJson {
        let conv = |h: &HalfSpace| HalfSpaceJson {
            root: h.root.clone(),
            level: h.level.clone(),
        };
        ConvexIntersectionJson {
            closed: self.closed.iter().map(conv).collect(),
            open: self.open.iter().map(conv).collect(),
        }
    }

    pub fn from_json(j: &ConvexIntersectionJson) -> Self {
        let conv = |h: &HalfSpaceJson| HalfSpace {
            root: h.root.clone(),
            level: h.level.clone(),
        };
        ConvexIntersection {
            closed: j.closed.iter().map(conv).collect(),
            open: j.open.iter().map(conv).collect(),
        }
    }
}

impl Shape {
    pub fn to_json(&self) -> ShapeJson {
        match self {
            Shape::Point(x) => ShapeJson::Point { x: pt_json(x) },
            Shape::FiniteSet(xs) => ShapeJson::FiniteSet {
                points: xs.iter().map(|p| pt_json(p)).collect(),
            },
            Shape::Segment(x, y) => ShapeJson::Segment {
                x: pt_json(x),
                y: pt_json(y),
            },
            Shape::OpenSegmentGerm(x, y) => ShapeJson::OpenSegmentGerm {
                x: pt_json(x),
                y: pt_json(y),
            },
            Shape::Ray(x, d) => ShapeJson::Ray {
                x: pt_json(x),
                dir: pt_json(d),
            },
            Shape::RayGerm(x, d) => ShapeJson::RayGerm {
                x: pt_json(x),
                dir: pt_json(d),
            },
            Shape::LocalFacet(x, f) => ShapeJson::LocalFacet {
                x: pt_json(x),
                facet: f.to_json(),
            },
            Shape::SectorFace(x, f) => ShapeJson::SectorFace {
                x: pt_json(x),
                facet: f.to_json(),
            },
            Shape::SectorFaceGerm(x, f) => ShapeJson::SectorFaceGerm {
                x: pt_json(x),
                facet: f.to_json(),
            },
            Shape::Chimney(x, b, d) => ShapeJson::Chimney {
                x: pt_json(x),
                base: b.to_json(),
                dir: d.to_json(),
            },
            Shape::ChimneyGerm(x, b, d) => ShapeJson::ChimneyGerm {
                x: pt_json(x),
                base: b.to_json(),
                dir: d.to_json(),
            },
            Shape::Convex(c) => ShapeJson::Convex { body: c.to_json() },
        }
    }

    pub fn from_json(m: &KacMoodyMatrix, j: &ShapeJson) -> Result<Shape, ApartmentError> {
        let facet = |f: &crate::vectorial::FacetJson| {
            VectorialFacet::from_json(m, f).map_err(ApartmentError::from)
        };
        Ok(match j {
            ShapeJson::Point { x } => Shape::Point(pt_from(x)?),
            ShapeJson::FiniteSet { points } => Shape::FiniteSet(
                points
                    .iter()
                    .map(|p| pt_from(p))
                    .collect::<Result<_, _>>()?,
            ),
            ShapeJson::Segment { x, y } => Shape::Segment(pt_from(x)?, pt_from(y)?),
            ShapeJson::OpenSegmentGerm { x, y } => {
                Shape::OpenSegmentGerm(pt_from(x)?, pt_from(y)?)
            }
            ShapeJson::Ray { x, dir } => Shape::Ray(pt_from(x)?, pt_from(dir)?),
            ShapeJson::RayGerm { x, dir } => Shape::RayGerm(pt_from(x)?, pt_from(dir)?),
            ShapeJson::LocalFacet { x, facet: f } => Shape::LocalFacet(pt_from(x)?, facet(f)?),
            ShapeJson::SectorFace { x, facet: f } => Shape::SectorFace(pt_from(x)?, facet(f)?),
            ShapeJson::SectorFaceGerm { x, facet: f } => {
                Shape::SectorFaceGerm(pt_from(x)?, facet(f)?)
            }
            ShapeJson::Chimney { x, base, dir } => {
                Shape::Chimney(pt_from(x)?, facet(base)?, facet(dir)?)
            }
            ShapeJson::ChimneyGerm { x, base, dir } => {
                Shape::ChimneyGerm(pt_from(x)?, facet(base)?, facet(dir)?)
            }
            ShapeJson::Convex { body } => Shape::Convex(ConvexIntersection::from_json(body)),
        })
    }
}
