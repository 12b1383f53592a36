//! Façades, the three bordered apartments, projections between façades
//! and the sector-face-germ correspondence.
//!
//! A façade in direction F^v carries the roots vanishing on F^v; in
//! essential mode its points are cosets modulo the span of F^v. The full
//! disjoint union over all direction facets is never materialized:
//! façades are built lazily per direction and cached.

use crate::apartment::{ApartmentModel, ApartmentError, HalfSpace, Shape};
use crate::kac::RootTag;
use crate::rat::{rat_to_string, Rat};
use crate::vectorial::{dot, kernel_basis, Point, VectorialFacet};
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::{Arc, RwLock};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum BorderedError {
    #[error("target facet is not in the star of the source direction")]
    NotInStar,
    #[error("this operation needs the essential flavor")]
    WrongFlavor,
    #[error("dimension mismatch")]
    DimensionMismatch,
    #[error(transparent)]
    Apartment(#[from] ApartmentError),
    #[error(transparent)]
    Vectorial(#[from] crate::vectorial::VectorialError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FacadeMode {
    /// Non-essential: points keep full apartment coordinates.
    Ne,
    /// Essential: points are cosets modulo span(F^v).
    E,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BorderedFlavor {
    /// Every façade non-essential.
    Strong,
    /// Every façade essential.
    Essential,
    /// Inessential main façade, essential proper façades.
    Injective,
}

/// The sign of a root on a facet: constant by facet convexity, decided on
/// a relative-interior point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RootFacetSign {
    Negative,
    Zero,
    Positive,
}

pub fn root_sign_on_facet(
    model: &ApartmentModel,
    coords: &[i64],
    facet: &VectorialFacet,
) -> Result<RootFacetSign, BorderedError> {
    let real = model.realization();
    let sample = if facet.is_trivial(model.matrix()) && real.v0_basis().is_empty() {
        vec![Rat::zero(); real.dim()]
    } else {
        real.facet_interior_point(facet)?
    };
    let v = model.eval_root(coords, &sample);
    Ok(match v.cmp(&Rat::zero()) {
        std::cmp::Ordering::Less => RootFacetSign::Negative,
        std::cmp::Ordering::Equal => RootFacetSign::Zero,
        std::cmp::Ordering::Greater => RootFacetSign::Positive,
    })
}

/// A façade of the apartment in a fixed direction facet.
#[derive(Clone, Debug)]
pub struct Facade {
    direction: VectorialFacet,
    mode: FacadeMode,
    /// Reduced echelon basis of span(direction), used to canonicalize
    /// coset representatives in essential mode.
    span_basis: Vec<Point>,
    span_pivots: Vec<usize>,
    /// Roots of the slice vanishing on the direction (the façade's own
    /// root system Phi^m / Delta^m, within the cap).
    vanishing_real: Vec<Vec<i64>>,
    vanishing_all: Vec<Vec<i64>>,
}

impl Facade {
    pub fn new(
        model: &ApartmentModel,
        direction: VectorialFacet,
        mode: FacadeMode,
    ) -> Result<Self, BorderedError> {
        let real = model.realization();
        // span(w F(J)) = w(kernel of the J-forms).
        let j_forms: Vec<Vec<Rat>> = direction
            .j_set()
            .iter()
            .map(|&j| real.simple_form(j).to_vec())
            .collect();
        let raw_span: Vec<Point> = kernel_basis(&j_forms, real.dim())
            .into_iter()
            .map(|k| real.act_point(direction.wrep(), &k))
            .collect();
        let (span_basis, span_pivots) = echelonize(&raw_span, real.dim());
        let mut vanishing_real = Vec::new();
        let mut vanishing_all = Vec::new();
        for entry in model.full_slice().roots() {
            let coords = entry.root.coords().to_vec();
            if root_sign_on_facet(model, &coords, &direction)? == RootFacetSign::Zero {
                // Zero on an interior point plus constancy of sign on the
                // facet means zero on the span for real roots; double
                // check by killing the span basis for safety.
                let form = model.root_form(&coords);
                let kills_span = span_basis.iter().all(|b| dot(&form, b).is_zero());
                if kills_span {
                    if entry.root.tag() == RootTag::Real {
                        vanishing_real.push(coords.clone());
                    }
                    vanishing_all.push(coords);
                }
            }
        }
        Ok(Facade {
            direction,
            mode,
            span_basis,
            span_pivots,
            vanishing_real,
            vanishing_all,
        })
    }

    pub fn direction(&self) -> &VectorialFacet {
        &self.direction
    }

    pub fn mode(&self) -> FacadeMode {
        self.mode
    }

    pub fn is_spherical(&self, model: &ApartmentModel) -> bool {
        self.direction.is_spherical(model.matrix())
    }

    /// Real roots of the façade root system Phi^m(F^v), within the cap.
    pub fn real_roots(&self) -> &[Vec<i64>] {
        &self.vanishing_real
    }

    pub fn all_roots(&self) -> &[Vec<i64>] {
        &self.vanishing_all
    }

    pub fn span_basis(&self) -> &[Point] {
        &self.span_basis
    }

    /// Canonical representative: in essential mode, pivot coordinates of
    /// the span are zeroed; in non-essential mode the point is kept.
    pub fn canonical_rep(&self, x: &[Rat]) -> Point {
        match self.mode {
            FacadeMode::Ne => x.to_vec(),
            FacadeMode::E => reduce_modulo(&self.span_basis, &self.span_pivots, x),
        }
    }

    /// Equality of representatives in this façade.
    pub fn same_point(&self, x: &[Rat], y: &[Rat]) -> bool {
        self.canonical_rep(x) == self.canonical_rep(y)
    }
}

fn echelonize(basis: &[Point], dim: usize) -> (Vec<Point>, Vec<usize>) {
    let mut a: Vec<Point> = basis.to_vec();
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
    a.truncate(pivots.len());
    (a, pivots)
}

fn reduce_modulo(basis: &[Point], pivots: &[usize], x: &[Rat]) -> Point {
    let mut w = x.to_vec();
    for (row, &pc) in pivots.iter().enumerate() {
        let f = w[pc].clone();
        if !f.is_zero() {
            for j in 0..w.len() {
                let d = &f * &basis[row][j];
                w[j] -= d;
            }
        }
    }
    w
}

/// A point of a façade, stored with its canonical representative.
#[derive(Clone, Debug)]
pub struct FacadePoint {
    facade: Arc<Facade>,
    rep: Point,
}

impl PartialEq for FacadePoint {
    fn eq(&self, other: &Self) -> bool {
        self.facade.direction == other.facade.direction
            && self.facade.mode == other.facade.mode
            && self.rep == other.rep
    }
}

impl FacadePoint {
    pub fn new(facade: Arc<Facade>, x: &[Rat]) -> Self {
        let rep = facade.canonical_rep(x);
        FacadePoint { facade, rep }
    }

    pub fn facade(&self) -> &Arc<Facade> {
        &self.facade
    }

    pub fn rep(&self) -> &Point {
        &self.rep
    }
}

/// A bordered apartment: the main model plus lazily built façades.
pub struct BorderedApartment {
    flavor: BorderedFlavor,
    model: ApartmentModel,
    cache: RwLock<BTreeMap<VectorialFacet, Arc<Facade>>>,
}

impl BorderedApartment {
    pub fn new(model: ApartmentModel, flavor: BorderedFlavor) -> Self {
        BorderedApartment {
            flavor,
            model,
            cache: RwLock::new(BTreeMap::new()),
        }
    }

    pub fn flavor(&self) -> BorderedFlavor {
        self.flavor
    }

    pub fn model(&self) -> &ApartmentModel {
        &self.model
    }

    fn mode_for(&self, direction: &VectorialFacet) -> FacadeMode {
        match self.flavor {
            BorderedFlavor::Strong => FacadeMode::Ne,
            BorderedFlavor::Essential => FacadeMode::E,
            BorderedFlavor::Injective => {
                if direction.is_trivial(self.model.matrix()) {
                    FacadeMode::Ne
                } else {
                    FacadeMode::E
                }
            }
        }
    }

    /// The façade in a given direction, built on first use. Safe for
    /// concurrent readers; the construction is deterministic so a race
    /// rebuilds the same value.
    pub fn facade(&self, direction: &VectorialFacet) -> Result<Arc<Facade>, BorderedError> {
        if let Some(f) = self.cache.read().expect("lock").get(direction) {
            return Ok(f.clone());
        }
        let built = Arc::new(Facade::new(
            &self.model,
            direction.clone(),
            self.mode_for(direction),
        )?);
        let mut w = self.cache.write().expect("lock");
        Ok(w.entry(direction.clone()).or_insert(built).clone())
    }

    pub fn main_facade(&self) -> Result<Arc<Facade>, BorderedError> {
        let trivial = VectorialFacet::trivial(self.model.matrix(), crate::vectorial::Sign::Plus);
        self.facade(&trivial)
    }

    /// Point of the façade in direction F^v represented by x.
    pub fn point(
        &self,
        direction: &VectorialFacet,
        x: &[Rat],
    ) -> Result<FacadePoint, BorderedError> {
        let f = self.facade(direction)?;
        Ok(FacadePoint::new(f, x))
    }
}

// ---------------------------------------------------------------------
// Projections
// ---------------------------------------------------------------------

/// pr_{F1}([x + F]) = [x + F1], defined when F1 is in the star of F.
pub fn project(
    bordered: &BorderedApartment,
    p: &FacadePoint,
    target: &VectorialFacet,
) -> Result<FacadePoint, BorderedError> {
    let m = bordered.model().matrix();
    if !p.facade().direction().star_contains(m, target) {
        return Err(BorderedError::NotInStar);
    }
    bordered.point(target, p.rep())
}

/// Trace of a wall or half-apartment on a façade.
#[derive(Clone, Debug, PartialEq)]
pub enum WallTrace {
    /// The root vanishes on the direction: the wall descends.
    Projected(HalfSpace),
    /// Strictly negative on the direction: empty trace.
    Empty,
    /// Strictly positive: the half-apartment covers the façade (and the
    /// wall itself has empty trace).
    Full,
}

pub fn wall_trace(
    model: &ApartmentModel,
    coords: &[i64],
    level: &Rat,
    facade: &Facade,
) -> Result<WallTrace, BorderedError> {
    Ok(match root_sign_on_facet(model, coords, facade.direction())? {
        RootFacetSign::Zero => WallTrace::Projected(HalfSpace {
            root: coords.to_vec(),
            level: level.clone(),
        }),
        RootFacetSign::Negative => WallTrace::Empty,
        RootFacetSign::Positive => WallTrace::Full,
    })
}

// ---------------------------------------------------------------------
// Sector-face germs and chimney germs
// ---------------------------------------------------------------------

/// germ_inf(x + F^v) corresponds to the essential façade point [x + F^v].
pub fn germ_to_point(
    bordered: &BorderedApartment,
    germ: &Shape,
) -> Result<FacadePoint, BorderedError> {
    let Shape::SectorFaceGerm(x, dir) = germ else {
        return Err(BorderedError::WrongFlavor);
    };
    let facade = bordered.facade(dir)?;
    if facade.mode() != FacadeMode::E {
        return Err(BorderedError::WrongFlavor);
    }
    Ok(FacadePoint::new(facade, x))
}

/// Inverse of `germ_to_point`: the canonical representative seeds the
/// sector-face germ.
pub fn point_to_germ(p: &FacadePoint) -> Result<Shape, BorderedError> {
    if p.facade().mode() != FacadeMode::E {
        return Err(BorderedError::WrongFlavor);
    }
    Ok(Shape::SectorFaceGerm(
        p.rep().clone(),
        p.facade().direction().clone(),
    ))
}

/// The closed facet of a façade corresponding to a chimney germ: the
/// façade point of the base vertex plus the residual direction, with the
/// classification dictionary (splayed iff the façade is spherical, solid
/// iff the facet is spherical inside its façade, full iff it is a
/// chamber there).
#[derive(Clone, Debug)]
pub struct FacadeClosedFacet {
    pub facade: Arc<Facade>,
    pub point: FacadePoint,
    /// Base facet of the chimney, viewed in the façade.
    pub residual: VectorialFacet,
    pub facade_spherical: bool,
    pub residual_spherical_in_facade: bool,
    pub chamber_in_facade: bool,
}

pub fn chimney_germ_to_closed_facet(
    bordered: &BorderedApartment,
    germ: &Shape,
) -> Result<FacadeClosedFacet, BorderedError> {
    let Shape::ChimneyGerm(x, base, dir) = germ else {
        return Err(BorderedError::WrongFlavor);
    };
    let model = bordered.model();
    let _m = model.matrix();
    let facade = bordered.facade(dir)?;
    let point = FacadePoint::new(facade.clone(), x);
    // Inside the façade the relevant roots are those of Phi^m(dir); the
    // residual facet of the base is classified by the roots of the façade
    // vanishing on it versus those positive on it.
    let vanishing: Vec<Vec<i64>> = facade
        .real_roots()
        .iter()
        .filter(|coords| {
            root_sign_on_facet(model, coords, base).map(|s| s == RootFacetSign::Zero) == Ok(true)
        })
        .cloned()
        .collect();
    // Spherical in the façade: the reflection subgroup generated by the
    // vanishing façade roots is finite. Checked by bounded enumeration of
    // its action on Q.
    let residual_spherical = reflection_subgroup_is_finite(model, &vanishing, 10_000);
    let chamber = vanishing.is_empty() && !facade.real_roots().is_empty()
        || facade.real_roots().is_empty();
    Ok(FacadeClosedFacet {
        facade: facade.clone(),
        point,
        residual: base.clone(),
        facade_spherical: facade.is_spherical(model),
        residual_spherical_in_facade: residual_spherical,
        chamber_in_facade: chamber,
    })
}

fn reflection_subgroup_is_finite(
    model: &ApartmentModel,
    roots: &[Vec<i64>],
    limit: usize,
) -> bool {
    use crate::kac::WeylElement;
    let m = model.matrix();
    let mut gens: Vec<WeylElement> = Vec::new();
    for coords in roots {
        if let Some(entry) = model.real_slice().get(coords) {
            let co = entry.coroot.as_ref().expect("real coroots");
            let n = m.size();
            let mut mat = vec![vec![0i64; n]; n];
            for j in 0..n {
                let mut e = vec![0i64; n];
                e[j] = 1;
                let pairing: i64 = (0..n)
                    .map(|i| co[i] * crate::kac::coroot_pairing(m, i, &e))
                    .sum();
                for r in 0..n {
                    mat[r][j] = e[r] - pairing * coords[r];
                }
            }
            gens.push(WeylElement::from_action(m, mat.clone(), mat));
        }
    }
    let mut seen = std::collections::BTreeSet::new();
    let id = WeylElement::identity(m);
    seen.insert(id.clone());
    let mut frontier = vec![id];
    loop {
        let mut next = Vec::new();
        for w in &frontier {
            for g in &gens {
                let c = w.compose(m, g);
                if seen.insert(c.clone()) {
                    if seen.len() > limit {
                        return false;
                    }
                    next.push(c);
                }
            }
        }
        if next.is_empty() {
            return true;
        }
        frontier = next;
    }
}

// ---------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
pub struct FacadePointJson {
    pub direction: crate::vectorial::FacetJson,
    pub mode: FacadeMode,
    pub rep: Vec<String>,
}

impl FacadePoint {
    pub fn to_json(&self) -> FacadePointJson {
        FacadePointJson {
            direction: self.facade.direction().to_json(),
            mode: self.facade.mode(),
            rep: self.rep.iter().map(rat_to_string).collect(),
        }
    }
}
