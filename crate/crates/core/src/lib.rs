//! Exact-arithmetic invariant theory of permutation groups `G ⊆ S_n`.
//!
//! The library builds the quotient boolean complex of the barycentrically
//! subdivided simplex boundary by a permutation group, transfers module bases
//! between the Stanley-Reisner ring of `B_n \ {∅}` and the polynomial ring
//! via the Garsia map, decomposes invariants over the symmetric subring
//! (Goebel's algorithm), and decides Cohen-Macaulayness of the invariant ring
//! both algebraically (minimal generator counts mod p) and topologically
//! (link homology over the integers).
//!
//! All arithmetic is exact: `ℤ` with arbitrary precision, `ℚ` as reduced
//! fractions, and `𝔽_p` for primes `p < 2^31`.

pub mod bases;
pub mod linalg;
pub mod permgrp;
pub mod polyring;
pub mod qcomplex;
pub mod srring;
pub mod survey;

pub use permgrp::{parse_group, Permutation, PermutationGroup};
pub use polyring::{parse_polynomial, Domain, Monomial, Polynomial, Shape};
pub use qcomplex::QuotientComplex;
