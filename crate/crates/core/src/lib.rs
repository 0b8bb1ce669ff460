//! Exact verification of lattice triples `(M, F, λ)` against the axioms
//! (M1)–(M5) for ordinary K3 surfaces over finite fields, together with a
//! search for ordinary `q²`-Weil polynomials.
//!
//! All arithmetic is exact (`BigInt` / `BigRational`); p-adic statements are
//! certified at explicit finite precision.

pub mod algebra;
pub mod ample_cone;
pub mod format;
pub mod lattice;
pub mod neron_severi;
pub mod padic;
pub mod search;
pub mod verifier;
pub mod weil;

pub use algebra::{IntMatrix, IntPoly, RatVector};
pub use format::{FormatError, LatticeDocument, TripleDocument, FORMAT_VERSION};
pub use lattice::{Lattice, Signature, Sublattice};
pub use neron_severi::NSLattice;
pub use padic::{NewtonPolygon, PadicPrecision, SplitCertificate};
pub use search::{CandidateRecord, SearchSpec, SearchStats};
pub use verifier::{TripleInput, Verdict, VerificationReport, VerifyOptions};
pub use weil::{FrobeniusData, WeilParams};

pub use num_bigint::BigInt;
pub use num_rational::BigRational;
