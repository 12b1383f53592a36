//! Computational Kac-Moody combinatorics and desk-scale hovels.
//!
//! The crate is organised bottom-up:
//!
//! - [`rat`]: exact rational scalars, p-adic valuations and level bounds.
//!   No floating point is used anywhere in the crate.
//! - [`lp`]: a small exact simplex over the rationals, used for half-space
//!   redundancy removal and suprema of linear forms over polyhedra.
//! - [`kac`]: Kac-Moody matrices, root generating systems, root slices
//!   (real and imaginary roots up to an explicit height cap) and the
//!   vectorial Weyl group with ShortLex-canonical words.
//! - [`vectorial`]: realizations of the vectorial apartment, vectorial
//!   facets, Tits-cone location and the star order.
//! - [`apartment`]: the affine apartment with walls, half-spaces, finitely
//!   described filters (points, germs, sectors, chimneys), enclosure maps
//!   and the affine Weyl group.
//! - [`bordered`]: façades, the three bordered apartments, projections and
//!   the sector-face-germ correspondence.
//! - [`valuation`]: the abstract valuated-root-datum interface together
//!   with executable checkers for the (RD) and (V) axiom families.
//! - [`instances`]: concrete instances with exact arithmetic: SL2 and SL3
//!   over the rationals with a p-adic valuation, and loop SL2 over Laurent
//!   polynomial matrices, plus Iwasawa/Bruhat/Birkhoff decompositions.
//! - [`hovel`]: parahoric families over the apartment, fixator oracles,
//!   the quotient hovel at desk scale, Bruhat-Tits trees, segment checks
//!   and residue root systems.
//!
//! Everything is deterministic: samplers are seeded and reports embed the
//! seed and budget they ran with.

pub mod apartment;
pub mod bordered;
pub mod hovel;
pub mod instances;
pub mod kac;
pub mod lp;
pub mod rat;
pub mod sampler;
pub mod valuation;
pub mod vectorial;
