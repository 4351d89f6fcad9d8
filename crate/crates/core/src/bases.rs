//! Goebel decomposition onto special orbit monomials, shelling search and
//! shelling bases, greedy cell bases, representation of invariants on a
//! basis, and the algebraic Cohen-Macaulayness report.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::linalg::{int_determinant, mod_inverse, solve_rational, ModPMatrix};
use crate::permgrp::PermutationGroup;
use crate::polyring::{
    elementary_symmetric, is_prime, orbit_monomial, special_decompose, Coeff, Domain, Monomial,
    Polynomial,
};
use crate::qcomplex::{is_cm_complex, CmCoefficients, CmVerdict, QuotientComplex};
use crate::srring::{garsia_inverse, SPolynomial};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BasesError {
    #[error("polynomial is not invariant under the group")]
    NotInvariant,
    #[error("coefficient domains differ")]
    DomainMismatch,
    #[error("facet at position {at} does not extend a shelling")]
    InvalidShelling { at: usize },
    #[error("basis has {got} faces but the complex has {expected} facets")]
    SizeMismatch { expected: usize, got: usize },
    #[error("linear system has no solution over the domain")]
    SystemUnsolvable,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("face does not belong to this complex")]
    ForeignFace,
}

/// Outcome of an exhausted or aborted shelling search.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum ShellingSearch {
    #[error("the complex admits no shelling")]
    NotFound,
    #[error("search budget of {0} nodes exhausted before completion")]
    BudgetExceeded(usize),
}

pub const DEFAULT_SHELLING_BUDGET: usize = 1_000_000;

/// A facet order together with the unique minimal new face of each step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Shelling {
    pub facet_order: Vec<usize>,
    pub minimal_new_faces: Vec<usize>,
}

/// All faces below a facet, via the bijection with subsets of its rank set.
fn downset_of_facet(complex: &QuotientComplex, facet: usize) -> Vec<usize> {
    let n = complex.degree();
    let repr = &complex.face(facet).repr;
    let mut out = Vec::with_capacity(1 << (n - 1));
    for rank_mask in 0u32..(1 << (n - 1)) {
        let sub: Vec<u32> = repr
            .iter()
            .copied()
            .filter(|m| rank_mask & (1 << (m.count_ones() - 1)) != 0)
            .collect();
        out.push(
            complex
                .face_of_chain(&sub)
                .expect("subchains of a facet are faces"),
        );
    }
    out
}

/// If appending `facet` keeps the order a shelling, returns its unique
/// minimal new face and marks the new faces covered.
fn try_append_facet(
    complex: &QuotientComplex,
    covered: &mut [bool],
    facet: usize,
) -> Option<usize> {
    let down = downset_of_facet(complex, facet);
    let new_faces: Vec<usize> = down.iter().copied().filter(|&f| !covered[f]).collect();
    let minimal: Vec<usize> = new_faces
        .iter()
        .copied()
        .filter(|&f| {
            let rs = complex.face(f).rank_set;
            !new_faces.iter().any(|&g| {
                let gs = complex.face(g).rank_set;
                g != f && gs & rs == gs
            })
        })
        .collect();
    if minimal.len() != 1 {
        return None;
    }
    for &f in &new_faces {
        covered[f] = true;
    }
    Some(minimal[0])
}

/// Checks a prefix of a facet order for the unique-minimal-new-face
/// condition, returning the minimal faces added so far.
pub fn verify_shelling_prefix(
    complex: &QuotientComplex,
    prefix: &[usize],
) -> Result<Vec<usize>, BasesError> {
    for &f in prefix {
        if !complex.facets().contains(&f) {
            return Err(BasesError::ForeignFace);
        }
    }
    let mut covered = vec![false; complex.num_faces()];
    let mut alphas = Vec::with_capacity(prefix.len());
    for (at, &facet) in prefix.iter().enumerate() {
        match try_append_facet(complex, &mut covered, facet) {
            Some(alpha) => alphas.push(alpha),
            None => return Err(BasesError::InvalidShelling { at }),
        }
    }
    Ok(alphas)
}

/// Validates a complete facet order as a shelling.
pub fn verify_shelling(
    complex: &QuotientComplex,
    order: &[usize],
) -> Result<Shelling, BasesError> {
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    let mut expected = complex.facets().to_vec();
    expected.sort_unstable();
    if sorted != expected {
        return Err(BasesError::SizeMismatch {
            expected: complex.facets().len(),
            got: order.len(),
        });
    }
    let minimal_new_faces = verify_shelling_prefix(complex, order)?;
    Ok(Shelling {
        facet_order: order.to_vec(),
        minimal_new_faces,
    })
}

/// Backtracking search for a shelling, extending greedily in canonical
/// facet order. `NotFound` is only reported after full exhaustion.
pub fn find_shelling(
    complex: &QuotientComplex,
    budget: usize,
) -> Result<Shelling, ShellingSearch> {
    #[allow(clippy::too_many_arguments)]
    fn search(
        complex: &QuotientComplex,
        facets: &[usize],
        covered: &mut Vec<bool>,
        used: &mut Vec<bool>,
        order: &mut Vec<usize>,
        alphas: &mut Vec<usize>,
        nodes: &mut usize,
        budget: usize,
    ) -> Result<bool, ShellingSearch> {
        if order.len() == facets.len() {
            return Ok(true);
        }
        for i in 0..facets.len() {
            if used[i] {
                continue;
            }
            *nodes += 1;
            if *nodes > budget {
                return Err(ShellingSearch::BudgetExceeded(budget));
            }
            let snapshot = covered.clone();
            if let Some(alpha) = try_append_facet(complex, covered, facets[i]) {
                used[i] = true;
                order.push(facets[i]);
                alphas.push(alpha);
                if search(complex, facets, covered, used, order, alphas, nodes, budget)? {
                    return Ok(true);
                }
                used[i] = false;
                order.pop();
                alphas.pop();
            }
            *covered = snapshot;
        }
        Ok(false)
    }

    let facets = complex.facets().to_vec();
    let mut covered = vec![false; complex.num_faces()];
    let mut used = vec![false; facets.len()];
    let mut order = Vec::new();
    let mut alphas = Vec::new();
    let mut nodes = 0usize;
    if search(
        complex,
        &facets,
        &mut covered,
        &mut used,
        &mut order,
        &mut alphas,
        &mut nodes,
        budget,
    )? {
        Ok(Shelling {
            facet_order: order,
            minimal_new_faces: alphas,
        })
    } else {
        Err(ShellingSearch::NotFound)
    }
}

/// The minimal new faces of a shelling, checked to have a unitriangular
/// incidence matrix in the shelling's facet order.
pub fn shelling_basis(complex: &QuotientComplex, shelling: &Shelling) -> Vec<usize> {
    let matrix = complex.incidence_matrix(&shelling.minimal_new_faces, &shelling.facet_order);
    for (i, row) in matrix.iter().enumerate() {
        assert_eq!(row[i], 1, "diagonal of a shelling incidence matrix");
        for (j, &v) in row.iter().enumerate() {
            if j < i {
                assert_eq!(v, 0, "shelling incidence matrix is unitriangular");
            }
        }
    }
    shelling.minimal_new_faces.clone()
}

/// A candidate module basis made of faces, with its incidence determinant.
#[derive(Debug, Clone)]
pub struct CellBasis {
    pub faces: Vec<usize>,
    pub domain: Domain,
    pub determinant: BigInt,
}

/// Diagnostics for a failed greedy run or a failed verification.
#[derive(Debug, Clone)]
pub struct CellBasisFailure {
    pub selected: Vec<usize>,
    pub span_rank: usize,
    /// (face, basis face) pairs violating the rank-set support condition.
    pub support_violations: Vec<(usize, usize)>,
}

enum SpanTracker {
    Rational(Vec<Vec<BigRational>>),
    ModP(ModPMatrix),
}

impl SpanTracker {
    fn new(domain: Domain, ncols: usize) -> SpanTracker {
        match domain {
            Domain::Fp(p) => SpanTracker::ModP(ModPMatrix::new(p, ncols)),
            _ => SpanTracker::Rational(Vec::new()),
        }
    }

    fn rank(&self) -> usize {
        match self {
            SpanTracker::Rational(rows) => rows.len(),
            SpanTracker::ModP(m) => m.rank(),
        }
    }

    /// Returns true when the vector was outside the span (and absorbs it).
    fn insert(&mut self, vector: &[u8]) -> bool {
        match self {
            SpanTracker::ModP(m) => m.insert_row(vector.iter().map(|&v| u64::from(v)).collect()),
            SpanTracker::Rational(rows) => {
                let mut row: Vec<BigRational> = vector
                    .iter()
                    .map(|&v| BigRational::from_integer(BigInt::from(v)))
                    .collect();
                for basis_row in rows.iter() {
                    let lead = basis_row.iter().position(|v| !v.is_zero()).unwrap();
                    if !row[lead].is_zero() {
                        let factor = &row[lead] / &basis_row[lead];
                        for (r, b) in row.iter_mut().zip(basis_row) {
                            let delta = &factor * b;
                            *r -= delta;
                        }
                    }
                }
                if row.iter().all(|v| v.is_zero()) {
                    false
                } else {
                    rows.push(row);
                    // Keep rows ordered by leading position so reduction of
                    // later vectors stays a single sweep.
                    rows.sort_by_key(|r| r.iter().position(|v| !v.is_zero()).unwrap());
                    true
                }
            }
        }
    }
}

/// Greedy cell-basis search over a field: walk the faces in a fixed order
/// (rank-set cardinality, rank set, facet vector in descending colex, then
/// representative) and keep each face whose facet vector leaves the span of
/// those already kept. The result is verified before being returned.
pub fn greedy_cell_basis(
    complex: &QuotientComplex,
    domain: Domain,
) -> Result<CellBasis, CellBasisFailure> {
    assert!(
        !matches!(domain, Domain::Int),
        "greedy selection needs a field"
    );
    let r = complex.facets().len();
    let mut order: Vec<usize> = (0..complex.num_faces()).collect();
    order.sort_by(|&a, &b| {
        let (fa, fb) = (complex.face(a), complex.face(b));
        fa.rank()
            .cmp(&fb.rank())
            .then_with(|| fa.rank_list().cmp(&fb.rank_list()))
            .then_with(|| {
                let mut va = complex.facet_vector_canonical(a);
                let mut vb = complex.facet_vector_canonical(b);
                va.reverse();
                vb.reverse();
                vb.cmp(&va)
            })
            .then_with(|| fa.repr.cmp(&fb.repr))
    });
    let mut tracker = SpanTracker::new(domain, r);
    let mut selected = Vec::new();
    for f in order {
        if tracker.rank() == r {
            break;
        }
        if tracker.insert(&complex.facet_vector_canonical(f)) {
            selected.push(f);
        }
    }
    if selected.len() < r {
        return Err(CellBasisFailure {
            span_rank: tracker.rank(),
            selected,
            support_violations: vec![],
        });
    }
    match verify_cell_basis(complex, &selected, domain) {
        Ok(report) if report.is_basis => Ok(CellBasis {
            faces: selected,
            domain,
            determinant: report.determinant,
        }),
        Ok(report) => Err(CellBasisFailure {
            span_rank: r,
            selected,
            support_violations: report.support_violations,
        }),
        Err(_) => unreachable!("sizes match by construction"),
    }
}

/// Verification report for a candidate cell basis.
#[derive(Debug, Clone)]
pub struct CellBasisReport {
    pub is_basis: bool,
    pub determinant: BigInt,
    pub determinant_is_unit: bool,
    pub support_violations: Vec<(usize, usize)>,
}

fn coeff_is_unit(det: &BigInt, domain: Domain) -> bool {
    match domain {
        Domain::Int => det.abs().is_one(),
        Domain::Rat => !det.is_zero(),
        Domain::Fp(p) => !(det % BigInt::from(p)).is_zero(),
    }
}

/// Checks the two cell-basis conditions: the incidence determinant is a
/// unit of the domain, and every face's facet vector is supported only on
/// basis faces whose rank sets it contains.
pub fn verify_cell_basis(
    complex: &QuotientComplex,
    faces: &[usize],
    domain: Domain,
) -> Result<CellBasisReport, BasesError> {
    let r = complex.facets().len();
    if faces.len() != r {
        return Err(BasesError::SizeMismatch {
            expected: r,
            got: faces.len(),
        });
    }
    let matrix: Vec<Vec<i64>> = faces
        .iter()
        .map(|&f| {
            complex
                .facet_vector_canonical(f)
                .iter()
                .map(|&v| i64::from(v))
                .collect()
        })
        .collect();
    let determinant = int_determinant(&matrix);
    let determinant_is_unit = coeff_is_unit(&determinant, domain);
    let mut support_violations = Vec::new();
    if determinant_is_unit {
        let rows: Vec<Vec<BigRational>> = matrix
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&v| BigRational::from_integer(BigInt::from(v)))
                    .collect()
            })
            .collect();
        for alpha in 0..complex.num_faces() {
            let target: Vec<BigRational> = complex
                .facet_vector_canonical(alpha)
                .iter()
                .map(|&v| BigRational::from_integer(BigInt::from(v)))
                .collect();
            let solution = solve_rational(&rows, &target).expect("unit determinant");
            for (j, x) in solution.iter().enumerate() {
                let nonzero = match domain {
                    // Denominators divide the determinant, which is prime
                    // to p, so reduction mod p is defined.
                    Domain::Fp(p) => !x.is_zero() && !(x.numer() % BigInt::from(p)).is_zero(),
                    _ => !x.is_zero(),
                };
                if nonzero {
                    let basis_rank = complex.face(faces[j]).rank_set;
                    let alpha_rank = complex.face(alpha).rank_set;
                    if basis_rank & alpha_rank != basis_rank {
                        support_violations.push((alpha, faces[j]));
                    }
                }
            }
        }
    }
    Ok(CellBasisReport {
        is_basis: determinant_is_unit && support_violations.is_empty(),
        determinant,
        determinant_is_unit,
        support_violations,
    })
}

/// Exact decomposition of an invariant onto special orbit monomials, keyed
/// by the canonical chain naming each special orbit monomial's face.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoebelDecomposition {
    pub degree: usize,
    /// Canonical face chain → coefficient polynomial in `s_1..s_n`
    /// (placeholders for the elementary symmetric polynomials).
    pub entries: BTreeMap<Vec<u32>, Polynomial>,
}

impl GoebelDecomposition {
    /// Substitutes `σ_i` for `s_i` and sums against the orbit monomials.
    pub fn substitute_back(&self, group: &PermutationGroup, domain: Domain) -> Polynomial {
        let n = self.degree;
        let sigmas: Vec<Polynomial> = (1..=n)
            .map(|i| elementary_symmetric(n, i, domain).unwrap())
            .collect();
        let mut acc = Polynomial::zero(n, domain);
        for (chain, coeff) in &self.entries {
            let factors: Vec<(u32, u16)> = chain.iter().map(|&m| (m, 1)).collect();
            let chain_mono = crate::srring::ChainMonomial::new(n, &factors).unwrap();
            let special = crate::srring::garsia(&chain_mono);
            let orbit_poly = orbit_monomial(group, &special, domain).unwrap();
            acc = acc.add(&coeff.substitute(&sigmas).mul(&orbit_poly));
        }
        acc
    }

    /// Largest total degree of a special monomial carrying a nonzero
    /// coefficient.
    pub fn max_special_degree(&self) -> u32 {
        self.entries
            .keys()
            .map(|chain| chain.iter().map(|m| m.count_ones()).sum())
            .max()
            .unwrap_or(0)
    }

    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Entry {
            face: Vec<Vec<usize>>,
            coeff: String,
        }
        let entries: Vec<Entry> = self
            .entries
            .iter()
            .map(|(chain, coeff)| Entry {
                face: chain
                    .iter()
                    .map(|&m| crate::srring::subset_to_vec(m))
                    .collect(),
                coeff: coeff.to_string_with("s"),
            })
            .collect();
        serde_json::json!({ "degree": self.degree, "entries": entries })
    }
}

fn canonical_chain_of(group: &PermutationGroup, chain: &[u32]) -> Vec<u32> {
    let mut best: Option<Vec<u32>> = None;
    for g in group.elements() {
        let image: Vec<u32> = chain.iter().map(|&m| g.apply_mask(m)).collect();
        if best.as_ref().is_none_or(|b| image < *b) {
            best = Some(image);
        }
    }
    best.unwrap_or_default()
}

/// Goebel's algorithm: peels the deglex-greatest shape layer off the
/// invariant one orbit at a time, emitting a `σ`-multiplier times a special
/// orbit monomial per step. The result reproduces the input exactly under
/// substitution (checked before returning).
pub fn goebel_decompose(
    group: &PermutationGroup,
    f: &Polynomial,
) -> Result<GoebelDecomposition, BasesError> {
    let n = group.degree();
    if f.num_vars() != n {
        return Err(BasesError::DomainMismatch);
    }
    if !f.is_invariant_under(group) {
        return Err(BasesError::NotInvariant);
    }
    let domain = f.domain();
    let sigmas: Vec<Polynomial> = (1..=n)
        .map(|i| elementary_symmetric(n, i, domain).unwrap())
        .collect();
    let mut entries: BTreeMap<Vec<u32>, Polynomial> = BTreeMap::new();
    let mut remainder = f.clone();
    while !remainder.is_zero() {
        let shape = remainder.leading_shape().unwrap();
        // Graded-lex greatest monomial of the leading shape stratum; its
        // whole orbit shares one coefficient because f is invariant.
        let (m, c) = remainder
            .terms()
            .rev()
            .find(|(m, _)| m.shape() == shape)
            .map(|(m, c)| (m.clone(), c.clone()))
            .unwrap();
        let decomp = special_decompose(&m);
        let special = decomp.associated_special;
        let chain: Vec<u32> = garsia_inverse(&special)
            .factors()
            .iter()
            .map(|&(mask, _)| mask)
            .collect();
        let face = canonical_chain_of(group, &chain);
        let multiplier = Monomial(decomp.sigma_exponents.clone());
        entries
            .entry(face)
            .or_insert_with(|| Polynomial::zero(n, domain))
            .add_term(multiplier, c.clone());
        let mut sigma_product = Polynomial::one(n, domain);
        for (i, &e) in decomp.sigma_exponents.iter().enumerate() {
            if e > 0 {
                sigma_product = sigma_product.mul(&sigmas[i].pow(e as u32));
            }
        }
        let orbit_special = orbit_monomial(group, &special, domain).unwrap();
        remainder = remainder.sub(&sigma_product.mul(&orbit_special).scale(&c));
        let next_shape = remainder.leading_shape();
        assert!(
            next_shape.as_ref().is_none_or(|s| *s <= shape),
            "leading shape must not increase"
        );
    }
    entries.retain(|_, coeff| !coeff.is_zero());
    let decomposition = GoebelDecomposition { degree: n, entries };
    assert_eq!(
        decomposition.substitute_back(group, domain),
        *f,
        "Goebel round trip"
    );
    Ok(decomposition)
}

fn solve_over_domain(
    rows: &[Vec<u8>],
    target: &[Coeff],
    domain: Domain,
) -> Result<Vec<Coeff>, BasesError> {
    match domain {
        Domain::Fp(p) => {
            // Transpose to a standard A·x = b system and eliminate mod p.
            let nr = rows.len();
            let nc = target.len();
            let mut aug: Vec<Vec<u64>> = (0..nc)
                .map(|c| {
                    let mut row: Vec<u64> = (0..nr).map(|r| u64::from(rows[r][c])).collect();
                    row.push(match &target[c] {
                        Coeff::Fp(v) => *v,
                        _ => panic!("domain mismatch"),
                    });
                    row
                })
                .collect();
            let mut pivot_of_col: Vec<Option<usize>> = vec![None; nr];
            let mut used = vec![false; nc];
            for col in 0..nr {
                let pr = match (0..nc).find(|&r| !used[r] && !aug[r][col].is_multiple_of(p)) {
                    Some(r) => r,
                    None => continue,
                };
                used[pr] = true;
                pivot_of_col[col] = Some(pr);
                let inv = mod_inverse(aug[pr][col] % p, p);
                for v in aug[pr].iter_mut() {
                    *v = *v % p * inv % p;
                }
                for r in 0..nc {
                    if r != pr && !aug[r][col].is_multiple_of(p) {
                        let factor = aug[r][col] % p;
                        #[allow(clippy::needless_range_loop)]
                        for c in 0..=nr {
                            aug[r][c] = (aug[r][c] + (p - factor) * aug[pr][c]) % p;
                        }
                    }
                }
            }
            let mut solution = vec![0u64; nr];
            for (col, pivot) in pivot_of_col.iter().enumerate() {
                if let Some(pr) = pivot {
                    solution[col] = aug[*pr][nr] % p;
                }
            }
            for c in 0..nc {
                let mut acc = 0u64;
                for r in 0..nr {
                    acc = (acc + solution[r] * u64::from(rows[r][c])) % p;
                }
                let expect = match &target[c] {
                    Coeff::Fp(v) => *v % p,
                    _ => unreachable!(),
                };
                if acc != expect {
                    return Err(BasesError::SystemUnsolvable);
                }
            }
            Ok(solution.into_iter().map(Coeff::Fp).collect())
        }
        _ => {
            let rational_rows: Vec<Vec<BigRational>> = rows
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|&v| BigRational::from_integer(BigInt::from(v)))
                        .collect()
                })
                .collect();
            let rational_target: Vec<BigRational> = target
                .iter()
                .map(|c| match c {
                    Coeff::Int(v) => BigRational::from_integer(v.clone()),
                    Coeff::Rat(v) => v.clone(),
                    Coeff::Fp(_) => panic!("domain mismatch"),
                })
                .collect();
            let solution = solve_rational(&rational_rows, &rational_target)
                .ok_or(BasesError::SystemUnsolvable)?;
            solution
                .into_iter()
                .map(|x| match domain {
                    Domain::Int => {
                        if x.denom().is_one() {
                            Ok(Coeff::Int(x.numer().clone()))
                        } else {
                            Err(BasesError::SystemUnsolvable)
                        }
                    }
                    Domain::Rat => Ok(Coeff::Rat(x)),
                    Domain::Fp(_) => unreachable!(),
                })
                .collect()
        }
    }
}

/// Stratum systems for representing invariants: for each rank set, the
/// faces carrying it, matched against the basis faces inside it.
struct BasisSystems<'a> {
    complex: &'a QuotientComplex,
    basis: Vec<usize>,
    faces_by_rank_set: BTreeMap<u32, Vec<usize>>,
}

impl<'a> BasisSystems<'a> {
    fn new(complex: &'a QuotientComplex, basis: &[usize]) -> Result<Self, BasesError> {
        if basis.len() != complex.facets().len() {
            return Err(BasesError::SizeMismatch {
                expected: complex.facets().len(),
                got: basis.len(),
            });
        }
        let mut faces_by_rank_set: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for f in 0..complex.num_faces() {
            faces_by_rank_set
                .entry(complex.face(f).rank_set)
                .or_default()
                .push(f);
        }
        Ok(BasisSystems {
            complex,
            basis: basis.to_vec(),
            faces_by_rank_set,
        })
    }

    /// Solves one rank-set stratum: writes the coefficient vector over the
    /// faces with rank set `k_mask` as a combination of the rows produced
    /// by the basis faces lying inside the stratum. Returns (basis index,
    /// scalar, θ-exponents completing the rank set).
    fn solve_stratum(
        &self,
        k_mask: u32,
        coeffs: &BTreeMap<usize, Coeff>,
        prefactor: &[u16],
        domain: Domain,
    ) -> Result<Vec<(usize, Coeff, Vec<u16>)>, BasesError> {
        let n = self.complex.degree();
        let columns = match self.faces_by_rank_set.get(&k_mask) {
            Some(c) => c,
            None => return Err(BasesError::SystemUnsolvable),
        };
        let row_basis: Vec<usize> = (0..self.basis.len())
            .filter(|&j| {
                let rs = self.complex.face(self.basis[j]).rank_set;
                rs & k_mask == rs
            })
            .collect();
        let rows: Vec<Vec<u8>> = row_basis
            .iter()
            .map(|&j| {
                columns
                    .iter()
                    .map(|&tau| u8::from(self.complex.face_leq(self.basis[j], tau)))
                    .collect()
            })
            .collect();
        let target: Vec<Coeff> = columns
            .iter()
            .map(|tau| coeffs.get(tau).cloned().unwrap_or_else(|| domain.zero()))
            .collect();
        let solution = solve_over_domain(&rows, &target, domain)?;
        let mut out = Vec::new();
        for (pos, x) in solution.into_iter().enumerate() {
            if domain.is_zero(&x) {
                continue;
            }
            let j = row_basis[pos];
            let missing = k_mask & !self.complex.face(self.basis[j]).rank_set;
            let mut theta_exps = prefactor.to_vec();
            for (i, slot) in theta_exps.iter_mut().enumerate().take(n - 1) {
                if missing & (1 << i) != 0 {
                    *slot += 1;
                }
            }
            out.push((j, x, theta_exps));
        }
        Ok(out)
    }
}

/// Fine-grade data shared by all monomials of one shape stratum: the rank
/// set of the squarefree part and the θ-exponents absorbed by multiplicity.
fn stratum_profile(n: usize, shape_rep: &Monomial) -> (u32, Vec<u16>) {
    let grade = garsia_inverse(shape_rep).fine_grade().0;
    let mut k_mask = 0u32;
    let mut prefactor = vec![0u16; n];
    for i in 0..n {
        if grade[i] > 0 {
            if i + 1 < n {
                k_mask |= 1 << i;
                prefactor[i] = grade[i] - 1;
            } else {
                prefactor[i] = grade[i];
            }
        }
    }
    (k_mask, prefactor)
}

/// The squarefree monomial spanning the same chain support.
fn special_of(m: &Monomial) -> Monomial {
    special_decompose(m).associated_special
}

/// Writes an invariant polynomial exactly on the orbit monomials of a cell
/// or shelling basis, with coefficients in `s_1..s_n`.
///
/// Works down the shape layers: each layer is matched through the
/// Stanley-Reisner side, where rank-row-sum products act on faces exactly,
/// then subtracted on the polynomial side. A final substitution check
/// guards the result.
pub fn represent_on_basis(
    complex: &QuotientComplex,
    f: &Polynomial,
    basis: &[usize],
) -> Result<Vec<(usize, Polynomial)>, BasesError> {
    let group = complex.group();
    let n = complex.degree();
    if f.num_vars() != n {
        return Err(BasesError::DomainMismatch);
    }
    if !f.is_invariant_under(group) {
        return Err(BasesError::NotInvariant);
    }
    let domain = f.domain();
    let systems = BasisSystems::new(complex, basis)?;
    let sigmas: Vec<Polynomial> = (1..=n)
        .map(|i| elementary_symmetric(n, i, domain).unwrap())
        .collect();
    let mut coeffs: Vec<Polynomial> = vec![Polynomial::zero(n, domain); basis.len()];
    let mut remainder = f.clone();
    while !remainder.is_zero() {
        let shape = remainder.leading_shape().unwrap();
        let shape_rep = Monomial(shape.0.clone());
        let (k_mask, prefactor) = stratum_profile(n, &shape_rep);
        // One coefficient per orbit in the stratum, read off any member.
        let mut stratum: BTreeMap<usize, Coeff> = BTreeMap::new();
        for (m, c) in remainder.terms() {
            if m.shape() == shape {
                let chain: Vec<u32> = garsia_inverse(&special_of(m))
                    .factors()
                    .iter()
                    .map(|&(mask, _)| mask)
                    .collect();
                let face = complex
                    .face_of_chain(&chain)
                    .map_err(|_| BasesError::ForeignFace)?;
                stratum.entry(face).or_insert_with(|| c.clone());
            }
        }
        let contributions = systems.solve_stratum(k_mask, &stratum, &prefactor, domain)?;
        for (j, x, theta_exps) in contributions {
            coeffs[j].add_term(Monomial(theta_exps.clone()), x.clone());
            let mut product = Polynomial::one(n, domain);
            for (i, &e) in theta_exps.iter().enumerate() {
                if e > 0 {
                    product = product.mul(&sigmas[i].pow(e as u32));
                }
            }
            let basis_poly = complex.face_to_orbit_monomial(basis[j], domain);
            remainder = remainder.sub(&product.mul(&basis_poly).scale(&x));
        }
        let next = remainder.leading_shape();
        assert!(
            next.as_ref().is_none_or(|s| *s < shape),
            "stratum must cancel exactly"
        );
    }
    // Exact substitution check.
    let mut rebuilt = Polynomial::zero(n, domain);
    for (j, coeff) in coeffs.iter().enumerate() {
        let basis_poly = complex.face_to_orbit_monomial(basis[j], domain);
        rebuilt = rebuilt.add(&coeff.substitute(&sigmas).mul(&basis_poly));
    }
    if rebuilt != *f {
        return Err(BasesError::SystemUnsolvable);
    }
    Ok(basis
        .iter()
        .zip(coeffs)
        .map(|(&face, coeff)| (face, coeff))
        .collect())
}

/// Writes an invariant of the Stanley-Reisner ring exactly on the basis,
/// one fine-grade layer at a time; coefficients are polynomials in
/// `s_1..s_n` standing for `θ_1..θ_n`.
pub fn represent_on_basis_s(
    complex: &QuotientComplex,
    f: &SPolynomial,
    basis: &[usize],
) -> Result<Vec<(usize, Polynomial)>, BasesError> {
    let group = complex.group();
    let n = complex.degree();
    if !f.is_invariant_under(group) {
        return Err(BasesError::NotInvariant);
    }
    let domain = f.domain();
    let systems = BasisSystems::new(complex, basis)?;
    let mut coeffs: Vec<Polynomial> = vec![Polynomial::zero(n, domain); basis.len()];
    let mut remainder = f.clone();
    while !remainder.is_zero() {
        let grade = remainder.terms().next_back().unwrap().0.fine_grade().0;
        let mut k_mask = 0u32;
        let mut prefactor = vec![0u16; n];
        for i in 0..n {
            if grade[i] > 0 {
                if i + 1 < n {
                    k_mask |= 1 << i;
                    prefactor[i] = grade[i] - 1;
                } else {
                    prefactor[i] = grade[i];
                }
            }
        }
        let mut stratum: BTreeMap<usize, Coeff> = BTreeMap::new();
        for (m, c) in remainder.terms() {
            if m.fine_grade().0 == grade {
                let chain: Vec<u32> = m
                    .factors()
                    .iter()
                    .filter(|&&(mask, _)| (mask.count_ones() as usize) < n)
                    .map(|&(mask, _)| mask)
                    .collect();
                let face = complex
                    .face_of_chain(&chain)
                    .map_err(|_| BasesError::ForeignFace)?;
                stratum.entry(face).or_insert_with(|| c.clone());
            }
        }
        let contributions = systems.solve_stratum(k_mask, &stratum, &prefactor, domain)?;
        for (j, x, theta_exps) in contributions {
            coeffs[j].add_term(Monomial(theta_exps.clone()), x.clone());
            let product = crate::srring::theta_product(n, &theta_exps, domain);
            let basis_poly = complex.face_to_s_orbit_monomial(basis[j], domain);
            remainder = remainder.sub(&product.mul(&basis_poly).scale(&x));
        }
    }
    Ok(basis
        .iter()
        .zip(coeffs)
        .map(|(&face, coeff)| (face, coeff))
        .collect())
}

fn canonical_monomial(group: &PermutationGroup, m: &Monomial) -> Monomial {
    let mut best = m.clone();
    for g in group.elements() {
        let image = m.act(g);
        if image < best {
            best = image;
        }
    }
    best
}

fn monomials_of_degree(n: usize, d: u32) -> Vec<Monomial> {
    fn rec(current: &mut Vec<u16>, i: usize, left: u32, out: &mut Vec<Monomial>) {
        if i + 1 == current.len() {
            current[i] = left as u16;
            out.push(Monomial(current.clone()));
            return;
        }
        for v in 0..=left {
            current[i] = v as u16;
            rec(current, i + 1, left - v, out);
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let mut current = vec![0u16; n];
    rec(&mut current, 0, d, &mut out);
    out
}

/// Counts the minimal module generators of `R^G ⊗ 𝔽_p` over
/// `𝔽_p[σ_1..σ_n]`, degree by degree up to the special-monomial bound
/// `n(n-1)/2`, along with the count expected of a free module (the product
/// of the h.s.o.p. degrees divided by the group order).
pub fn minimal_generator_count(
    group: &PermutationGroup,
    p: u64,
) -> Result<(usize, usize), BasesError> {
    if !is_prime(p) {
        return Err(BasesError::NotPrime(p));
    }
    let n = group.degree();
    let bound = (n * (n - 1) / 2) as u32;
    let factorial: usize = (1..=n).product();
    let expected = factorial / group.order();

    // Orbit representatives and a full monomial → orbit index map per degree.
    let mut reps: Vec<Vec<Monomial>> = Vec::with_capacity(bound as usize + 1);
    let mut index: Vec<HashMap<Monomial, usize>> = Vec::with_capacity(bound as usize + 1);
    for d in 0..=bound {
        let mut rep_list: Vec<Monomial> = Vec::new();
        let mut idx: HashMap<Monomial, usize> = HashMap::new();
        for m in monomials_of_degree(n, d) {
            let canon = canonical_monomial(group, &m);
            let next = rep_list.len();
            let entry = *idx.entry(canon.clone()).or_insert(next);
            if entry == next {
                rep_list.push(canon);
            }
            idx.insert(m, entry);
        }
        reps.push(rep_list);
        index.push(idx);
    }

    let mut count = 0usize;
    for d in 0..=bound as usize {
        let cols = reps[d].len();
        let mut matrix = ModPMatrix::new(p, cols);
        for i in 1..=n {
            if d < i {
                continue;
            }
            let sigma = elementary_symmetric(n, i, Domain::Fp(p)).unwrap();
            for b in &reps[d - i] {
                let orbit_b = orbit_monomial(group, b, Domain::Fp(p)).unwrap();
                let product = sigma.mul(&orbit_b);
                let mut row = vec![0u64; cols];
                for (m, c) in product.terms() {
                    // Invariants are determined by their coefficients on
                    // the canonical representatives.
                    let col = index[d][m];
                    if reps[d][col] == *m {
                        row[col] = match c {
                            Coeff::Fp(v) => *v,
                            _ => unreachable!(),
                        };
                    }
                }
                matrix.insert_row(row);
            }
        }
        count += cols - matrix.rank();
    }
    Ok((count, expected))
}

fn prime_factors(mut k: usize) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2usize;
    while d * d <= k {
        if k.is_multiple_of(d) {
            out.push(d as u64);
            while k.is_multiple_of(d) {
                k /= d;
            }
        }
        d += 1;
    }
    if k > 1 {
        out.push(k as u64);
    }
    out
}

/// Per-prime verdict of the algebraic Cohen-Macaulayness test.
#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct PrimeVerdict {
    pub expected: usize,
    pub count: usize,
    pub cm: bool,
}

/// Full report: the reflection-rotation subgroup, the predicted verdict,
/// the per-prime generator counts, an optional topological verdict, and
/// whether everything agrees.
#[derive(Debug, Clone, Serialize)]
pub struct CmReport {
    pub group: String,
    pub degree: usize,
    pub order: usize,
    pub grr_generators: Vec<String>,
    pub grr_order: usize,
    pub grr_index: usize,
    pub primes: Vec<u64>,
    /// Predicted Cohen-Macaulay over ℤ: exactly when the group is generated
    /// by its transpositions, double transpositions, and 3-cycles.
    pub prediction: bool,
    pub algebraic: BTreeMap<u64, PrimeVerdict>,
    pub algebraic_cm: bool,
    pub topological: Option<CmVerdict>,
    pub agree: bool,
}

pub fn cm_report(group: &PermutationGroup, include_topology: bool) -> CmReport {
    let (grr, grr_index) = group.rr_subgroup();
    let primes = prime_factors(grr_index);
    let prediction = grr_index == 1;
    let mut algebraic = BTreeMap::new();
    let mut algebraic_cm = true;
    for &p in &primes {
        let (count, expected) = minimal_generator_count(group, p).expect("p is prime");
        let cm = count == expected;
        algebraic_cm &= cm;
        algebraic.insert(
            p,
            PrimeVerdict {
                expected,
                count,
                cm,
            },
        );
    }
    let topological = if include_topology {
        Some(is_cm_complex(
            &QuotientComplex::build(group).expect("complex within cap"),
            CmCoefficients::Integers,
        ))
    } else {
        None
    };
    let mut agree = algebraic_cm == prediction;
    if let Some(t) = &topological {
        agree &= t.is_cm == prediction;
    }
    CmReport {
        group: group.to_string(),
        degree: group.degree(),
        order: group.order(),
        grr_generators: grr.generators().iter().map(|g| g.to_string()).collect(),
        grr_order: grr.order(),
        grr_index,
        primes,
        prediction,
        algebraic,
        algebraic_cm,
        topological,
        agree,
    }
}

/// Sum of the `G`-images of a polynomial; handy for building invariants.
pub fn symmetrize(group: &PermutationGroup, f: &Polynomial) -> Polynomial {
    let mut acc = Polynomial::zero(f.num_vars(), f.domain());
    for g in group.elements() {
        acc = acc.add(&f.act(g).expect("degrees match"));
    }
    acc
}
