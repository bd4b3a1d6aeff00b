//! Exact-arithmetic calculus on the extended Mukai lattice of an abelian
//! surface.
//!
//! The crate provides, with no floating point anywhere:
//!
//! * [`lattice`] - even Neron-Severi forms of signature `(1, rho-1)`,
//!   Mukai vectors and their pairing, ampleness and isotropy tests, and the
//!   moduli-readiness certificate (positive rank, ample class, rank coprime
//!   to Euler characteristic, isotropic);
//! * [`isometry`] - words in the generator isometries induced by shifts,
//!   line-bundle twists and the swap to the dual surface, with validation,
//!   composition, inversion and the filtered predicate;
//! * [`normalize`] - terminating searches that extend a word until its
//!   image of the point class is moduli-ready, including the two-prime,
//!   cover-pullback and supersingular variants, each emitting a
//!   machine-checkable certificate;
//! * [`product`] - the NS lattice of a product of elliptic curves as
//!   `Z^2 + Hom(F,E)` with degree form, separability functional and cover
//!   validation;
//! * [`ssgraph`] - supersingular j-invariants over `F_{p^2}`, their 2- and
//!   3-isogeny multigraphs via Velu's formulas, and shortest-path search.
//!
//! All integers are arbitrary precision, all values immutable, all
//! operations pure functions; concurrent reads need no synchronization.

pub mod error;
pub mod fixtures;
pub mod isometry;
pub mod jsonnum;
pub mod lattice;
pub mod mat;
pub mod normalize;
pub mod product;
pub mod ssgraph;

pub use error::{Error, Result};
pub use isometry::{
    compose, generator_matrix, is_filtered, random_isometry, validate_isometry, Generator,
    IsometryWord, WordData,
};
pub use lattice::{
    is_ample, is_isotropic, moduli_ready, mukai_pairing, validate_lattice, LatticeSpec,
    ModuliCertificate, MukaiVector, ValidationReport,
};
pub use normalize::{
    normalize_ample, normalize_coprime, normalize_full, normalize_positive_rank,
    normalize_prime_split, normalize_pullback, normalize_supersingular, CertEntry,
    NormalizationResult, SearchLimits,
};
pub use product::{
    complementary_degree, is_separable, product_pairing, separability_shift, to_lattice_spec,
    validate_cover, CoverDatum, HomLattice, ProductClass,
};
