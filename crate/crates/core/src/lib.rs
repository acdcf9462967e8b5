//! Classification of Borel orbits of quadratic forms in `n` variables over
//! characteristic-2 fields.
//!
//! The crate provides:
//!
//! - [`tower`]: exact arithmetic in the binary tower `F_2 ⊂ F_4 ⊂ F_16 ⊂ …`
//!   with square roots and Artin–Schreier root extraction, so that every
//!   computation that works over a quadratically closed field of
//!   characteristic 2 terminates at a finite level;
//! - [`form`]: sparse quadratic forms, parsing/printing, and the substitution
//!   action of invertible (in particular upper-triangular) matrices;
//! - [`normal`]: the canonical normal form of any quadratic form under the
//!   Borel group, computed together with an explicit witness matrix;
//! - [`census`]: enumeration of all normal forms and the Catalan /
//!   Catalan-triangle counting identities they satisfy;
//! - [`parabolic`]: decomposition of minimal-parabolic orbits into Borel
//!   orbits and the Brion graph built from those decompositions;
//! - [`covers`]: stabilizer presentations, orbit double covers, the subset
//!   encoding of covers, and the symmetric-group action on them;
//! - [`oracle`]: exhaustive finite-field ground truth (orbit enumeration,
//!   stabilizer solution sets, torus projections, degeneracy tests) used to
//!   cross-check every structural computation at small sizes.

pub mod census;
pub mod covers;
pub mod form;
pub mod normal;
pub mod oracle;
pub mod parabolic;
pub mod tower;

pub use form::{GroupElement, Permutation, QuadraticForm};
pub use normal::{is_normal, normalize, NormalComponent, NormalForm};
pub use tower::FieldElement;
