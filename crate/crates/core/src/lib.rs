//! Exact branching of the Steinberg representation for rank-one Galois
//! symmetric pairs `(G, H)` over finite fields.
//!
//! `G` is `PGL_2(q^2)` or `SL_2(q^2)`, `H` the corresponding group over `F_q`,
//! and `G` acts on the flag variety `X = P^1(F_{q^2})`. The crate decomposes
//! `X` into `H`-orbits, builds the character table of `H` modulo a suitable
//! prime, and checks the branching formula for `St_G|_H` row by row.

pub mod branch;
pub mod cache;
pub mod chars;
pub mod error;
pub mod fields;
pub mod groups;
pub mod modp;
pub mod pairs;
pub mod report;

pub use branch::{BranchReport, BranchRow};
pub use chars::{CharacterTable, ClassFunction, DixonContext};
pub use error::{Error, Result};
pub use fields::{Field, FieldTower, Fq2Elem, FqElem, Level};
pub use groups::{CanonElem, ClassMultTable, ConjData, Family, GroupTable, Subgroup};
pub use pairs::{ProjPoint, SplitOrbit, SymmetricPair};
