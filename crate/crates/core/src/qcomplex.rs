//! The quotient boolean complex `∂Δ/G`: orbits of chains in
//! `B_n \ {∅, [n]}`, their face poset, incidence data, order complexes,
//! links, and integer simplicial homology.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::BigUint;
use serde::Serialize;
use thiserror::Error;

use crate::linalg::SparseIntMatrix;
use crate::permgrp::{GroupError, Permutation, PermutationGroup};
use crate::polyring::{Domain, Monomial, Polynomial};
use crate::srring::{garsia_poly, s_orbit_monomial, subset_to_vec, ChainMonomial, SPolynomial};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ComplexError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("face does not belong to this complex")]
    ForeignFace,
    #[error("not a face of the complex")]
    NotAFace,
}

/// A `G`-orbit of strict chains in `B_n \ {∅, [n]}`, named by its
/// lexicographically minimal chain (masks, largest subset first).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Face {
    /// Canonical representative chain, largest subset first.
    pub repr: Vec<u32>,
    /// Bit `i-1` set iff the chain has a subset of cardinality `i`.
    pub rank_set: u32,
    pub orbit_size: usize,
    /// Monomial-style display label, e.g. `1^3 2^2 3`, read off the
    /// lexicographically greatest monomial of the orbit; `∅` when empty.
    label: String,
}

impl Face {
    pub fn rank(&self) -> usize {
        self.rank_set.count_ones() as usize
    }

    pub fn rank_list(&self) -> Vec<usize> {
        subset_to_vec(self.rank_set)
    }

    pub fn label(&self) -> String {
        self.label.clone()
    }
}

fn monomial_label(m: &Monomial) -> String {
    if m.is_one() {
        return "∅".to_string();
    }
    m.0.iter()
        .enumerate()
        .filter(|(_, &e)| e > 0)
        .map(|(i, &e)| {
            if e == 1 {
                (i + 1).to_string()
            } else {
                format!("{}^{e}", i + 1)
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Display monomial of a face orbit: the lexicographically greatest
/// exponent vector among the orbit's squarefree-chain images.
fn face_display_monomial(group: &PermutationGroup, chain: &[u32], n: usize) -> Monomial {
    let mut best: Option<Vec<u16>> = None;
    for g in group.elements() {
        let mut exps = vec![0u16; n];
        for &mask in chain {
            let image = g.apply_mask(mask);
            for p in subset_to_vec(image) {
                exps[p - 1] += 1;
            }
        }
        if best.as_ref().is_none_or(|b| exps > *b) {
            best = Some(exps);
        }
    }
    Monomial(best.unwrap_or_else(|| vec![0; n]))
}

/// The face poset of `∂Δ/G`, with the empty face included, faces in
/// canonical order (rank-set cardinality, rank set, representative).
#[derive(Debug, Clone)]
pub struct QuotientComplex {
    group: PermutationGroup,
    n: usize,
    faces: Vec<Face>,
    /// Indices into `faces` of the full-rank-set faces, in canonical order.
    facets: Vec<usize>,
    /// `incidence[f][j]` is true iff face `f` lies below facet `facets[j]`.
    incidence: Vec<Vec<bool>>,
    face_index: HashMap<Vec<u32>, usize>,
}

fn rank_list_of_mask(mask: u32) -> Vec<usize> {
    subset_to_vec(mask)
}

/// Canonical representative of the `G`-orbit of a chain (masks sorted by
/// decreasing cardinality): the lexicographically smallest image.
fn canonical_chain(group: &PermutationGroup, chain: &[u32]) -> Vec<u32> {
    let mut best: Option<Vec<u32>> = None;
    for g in group.elements() {
        let image: Vec<u32> = chain.iter().map(|&m| g.apply_mask(m)).collect();
        if best.as_ref().is_none_or(|b| image < *b) {
            best = Some(image);
        }
    }
    best.unwrap_or_else(|| chain.to_vec())
}

fn orbit_size_of_chain(group: &PermutationGroup, chain: &[u32]) -> usize {
    let mut seen: BTreeSet<Vec<u32>> = BTreeSet::new();
    for g in group.elements() {
        seen.insert(chain.iter().map(|&m| g.apply_mask(m)).collect());
    }
    seen.len()
}

/// All strict chains in `B_n \ {∅, [n]}`, largest subset first, including
/// the empty chain.
fn all_chains(n: usize) -> Vec<Vec<u32>> {
    let full: u32 = (1 << n) - 1;
    let mut out: Vec<Vec<u32>> = vec![vec![]];
    let mut stack: Vec<Vec<u32>> = (1..full).map(|m| vec![m]).collect();
    while let Some(chain) = stack.pop() {
        let last = *chain.last().unwrap();
        for sub in 1..last {
            if sub & last == sub && sub.count_ones() < last.count_ones() {
                let mut next = chain.clone();
                next.push(sub);
                stack.push(next);
            }
        }
        out.push(chain);
    }
    out
}

impl QuotientComplex {
    /// Builds the face poset of `∂Δ/G` by canonicalizing every chain orbit.
    pub fn build(group: &PermutationGroup) -> Result<QuotientComplex, ComplexError> {
        let n = group.degree();
        assert!(n >= 2, "complex needs degree at least 2");
        let mut canon: BTreeMap<Vec<u32>, usize> = BTreeMap::new();
        for chain in all_chains(n) {
            let rep = canonical_chain(group, &chain);
            canon
                .entry(rep.clone())
                .or_insert_with(|| orbit_size_of_chain(group, &rep));
        }
        let mut faces: Vec<Face> = canon
            .into_iter()
            .map(|(repr, orbit_size)| {
                let rank_set = repr
                    .iter()
                    .fold(0u32, |acc, m| acc | (1 << (m.count_ones() - 1)));
                let label = monomial_label(&face_display_monomial(group, &repr, n));
                Face {
                    repr,
                    rank_set,
                    orbit_size,
                    label,
                }
            })
            .collect();
        faces.sort_by(|a, b| {
            a.rank()
                .cmp(&b.rank())
                .then_with(|| rank_list_of_mask(a.rank_set).cmp(&rank_list_of_mask(b.rank_set)))
                .then_with(|| a.repr.cmp(&b.repr))
        });
        let face_index: HashMap<Vec<u32>, usize> = faces
            .iter()
            .enumerate()
            .map(|(i, f)| (f.repr.clone(), i))
            .collect();
        let full_rank: u32 = (1 << (n - 1)) - 1;
        let facets: Vec<usize> = faces
            .iter()
            .enumerate()
            .filter(|(_, f)| f.rank_set == full_rank)
            .map(|(i, _)| i)
            .collect();
        let mut complex = QuotientComplex {
            group: group.clone(),
            n,
            faces,
            facets,
            incidence: vec![],
            face_index,
        };
        let incidence: Vec<Vec<bool>> = (0..complex.faces.len())
            .map(|f| {
                complex
                    .facets
                    .iter()
                    .map(|&j| complex.face_leq(f, j))
                    .collect()
            })
            .collect();
        complex.incidence = incidence;
        Ok(complex)
    }

    pub fn group(&self) -> &PermutationGroup {
        &self.group
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    /// Indices of the facets within the face list.
    pub fn facets(&self) -> &[usize] {
        &self.facets
    }

    pub fn face(&self, id: usize) -> &Face {
        &self.faces[id]
    }

    /// Face id of the orbit of an arbitrary chain of this complex.
    pub fn face_of_chain(&self, chain: &[u32]) -> Result<usize, ComplexError> {
        let rep = canonical_chain(&self.group, chain);
        self.face_index
            .get(&rep)
            .copied()
            .ok_or(ComplexError::ForeignFace)
    }

    /// Quotient-poset order: `a ≤ b` iff some `G`-image of `a`'s chain is a
    /// subchain of `b`'s representative.
    pub fn face_leq(&self, a: usize, b: usize) -> bool {
        let fa = &self.faces[a];
        let fb = &self.faces[b];
        if fa.rank_set & fb.rank_set != fa.rank_set {
            return false;
        }
        let sub: Vec<u32> = fb
            .repr
            .iter()
            .copied()
            .filter(|m| fa.rank_set & (1 << (m.count_ones() - 1)) != 0)
            .collect();
        canonical_chain(&self.group, &sub) == fa.repr
    }

    /// 0/1 facet memberships of a face, ordered by the given facet sequence.
    pub fn facet_vector(&self, face: usize, facet_order: &[usize]) -> Vec<u8> {
        facet_order
            .iter()
            .map(|fj| {
                let pos = self
                    .facets
                    .iter()
                    .position(|x| x == fj)
                    .expect("a facet id");
                u8::from(self.incidence[face][pos])
            })
            .collect()
    }

    /// Facet vector in the complex's own canonical facet order.
    pub fn facet_vector_canonical(&self, face: usize) -> Vec<u8> {
        self.incidence[face].iter().map(|&b| u8::from(b)).collect()
    }

    /// Incidence matrix of the given faces: row `i`, column `j` is 1 iff
    /// `faces[i] ≤ facet_order[j]`.
    pub fn incidence_matrix(&self, face_ids: &[usize], facet_order: &[usize]) -> Vec<Vec<u8>> {
        face_ids
            .iter()
            .map(|&f| self.facet_vector(f, facet_order))
            .collect()
    }

    fn face_chain_monomial(&self, face: usize) -> ChainMonomial {
        ChainMonomial::new(
            self.n,
            &self.faces[face]
                .repr
                .iter()
                .map(|&m| (m, 1))
                .collect::<Vec<_>>(),
        )
        .expect("face representatives are chains")
    }

    /// The orbit monomial of a face on the Stanley-Reisner side.
    pub fn face_to_s_orbit_monomial(&self, face: usize, domain: Domain) -> SPolynomial {
        s_orbit_monomial(&self.group, &self.face_chain_monomial(face), domain)
    }

    /// The orbit monomial of a face on the polynomial side.
    pub fn face_to_orbit_monomial(&self, face: usize, domain: Domain) -> Polynomial {
        garsia_poly(&self.face_to_s_orbit_monomial(face, domain))
    }

    /// The special monomial generating the face's orbit on the `R` side.
    pub fn face_monomial(&self, face: usize) -> Monomial {
        crate::srring::garsia(&self.face_chain_monomial(face))
    }

    /// Order complex of the face poset without the empty face (the
    /// barycentric subdivision). Vertex `v` stands for face `v + 1`.
    pub fn order_complex(&self) -> SimplicialComplex {
        let mut facet_lists: Vec<Vec<usize>> = Vec::new();
        let ranks: Vec<usize> = (1..self.n).collect();
        for &facet in &self.facets {
            // Each order of accumulating the ranks is a maximal flag
            // through the boolean lower interval of the facet.
            let mut perm: Vec<usize> = ranks.clone();
            permute_all(&mut perm, 0, &mut |order| {
                let mut rank_mask = 0u32;
                let mut flag = Vec::with_capacity(order.len());
                for &r in order {
                    rank_mask |= 1 << (r - 1);
                    let sub: Vec<u32> = self.faces[facet]
                        .repr
                        .iter()
                        .copied()
                        .filter(|m| rank_mask & (1 << (m.count_ones() - 1)) != 0)
                        .collect();
                    let id = self
                        .face_of_chain(&sub)
                        .expect("subchains of a facet are faces");
                    flag.push(id - 1);
                }
                flag.sort_unstable();
                facet_lists.push(flag);
            });
        }
        SimplicialComplex::new(self.num_faces() - 1, facet_lists)
    }

    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct FaceJson {
            repr: Vec<Vec<usize>>,
            rank_set: Vec<usize>,
            facets: Vec<usize>,
        }
        let faces: Vec<FaceJson> = (0..self.num_faces())
            .map(|f| FaceJson {
                repr: self.faces[f]
                    .repr
                    .iter()
                    .map(|&m| subset_to_vec(m))
                    .collect(),
                rank_set: self.faces[f].rank_list(),
                facets: self.incidence[f]
                    .iter()
                    .enumerate()
                    .filter(|(_, &b)| b)
                    .map(|(j, _)| j)
                    .collect(),
            })
            .collect();
        serde_json::json!({
            "degree": self.n,
            "group": self.group.to_string(),
            "group_order": self.group.order(),
            "num_faces": self.num_faces(),
            "num_facets": self.facets.len(),
            "faces": faces,
        })
    }
}

fn permute_all<F: FnMut(&[usize])>(items: &mut Vec<usize>, k: usize, visit: &mut F) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute_all(items, k + 1, visit);
        items.swap(k, i);
    }
}

/// An abstract simplicial complex on vertices `0..num_vertices`, stored by
/// its facets; every face arises by downward closure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimplicialComplex {
    num_vertices: usize,
    facets: Vec<Vec<usize>>,
}

impl SimplicialComplex {
    /// Keeps only the inclusion-maximal faces of the given family.
    pub fn new(num_vertices: usize, faces: Vec<Vec<usize>>) -> Self {
        let mut sorted: Vec<Vec<usize>> = faces
            .into_iter()
            .map(|mut f| {
                f.sort_unstable();
                f.dedup();
                f
            })
            .collect();
        sorted.sort();
        sorted.dedup();
        let facets: Vec<Vec<usize>> = sorted
            .iter()
            .filter(|f| {
                !sorted
                    .iter()
                    .any(|g| g.len() > f.len() && f.iter().all(|v| g.binary_search(v).is_ok()))
            })
            .cloned()
            .collect();
        SimplicialComplex {
            num_vertices,
            facets,
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn facets(&self) -> &[Vec<usize>] {
        &self.facets
    }

    /// Dimension of the complex; the complex `{∅}` has dimension −1.
    pub fn dimension(&self) -> isize {
        self.facets
            .iter()
            .map(|f| f.len() as isize - 1)
            .max()
            .unwrap_or(-1)
    }

    pub fn is_face(&self, face: &[usize]) -> bool {
        if face.is_empty() {
            return true;
        }
        let mut sorted = face.to_vec();
        sorted.sort_unstable();
        self.facets
            .iter()
            .any(|f| sorted.iter().all(|v| f.binary_search(v).is_ok()))
    }

    /// Faces of each dimension `0..=dim`, sorted.
    pub fn faces_by_dim(&self) -> Vec<Vec<Vec<usize>>> {
        let dim = self.dimension();
        if dim < 0 {
            return vec![];
        }
        let mut by_dim: Vec<BTreeSet<Vec<usize>>> = vec![BTreeSet::new(); dim as usize + 1];
        for facet in &self.facets {
            let k = facet.len();
            for mask in 1u64..(1 << k) {
                let face: Vec<usize> = (0..k)
                    .filter(|&i| mask & (1 << i) != 0)
                    .map(|i| facet[i])
                    .collect();
                by_dim[face.len() - 1].insert(face);
            }
        }
        by_dim
            .into_iter()
            .map(|s| s.into_iter().collect())
            .collect()
    }

    /// All faces disjoint from `face` whose union with it is a face.
    pub fn link(&self, face: &[usize]) -> Result<SimplicialComplex, ComplexError> {
        if !self.is_face(face) {
            return Err(ComplexError::NotAFace);
        }
        let mut sorted = face.to_vec();
        sorted.sort_unstable();
        let link_facets: Vec<Vec<usize>> = self
            .facets
            .iter()
            .filter(|f| sorted.iter().all(|v| f.binary_search(v).is_ok()))
            .map(|f| {
                f.iter()
                    .copied()
                    .filter(|v| sorted.binary_search(v).is_err())
                    .collect()
            })
            .collect();
        Ok(SimplicialComplex::new(self.num_vertices, link_facets))
    }

    /// Reduced or unreduced integer simplicial homology, via Smith normal
    /// form of the boundary matrices with the ascending-vertex sign
    /// convention.
    pub fn homology(&self, reduced: bool) -> HomologySummary {
        let by_dim = self.faces_by_dim();
        let dim = self.dimension();
        if dim < 0 {
            // Only the empty face: reduced homology is ℤ in degree −1.
            return HomologySummary {
                groups: vec![HomologyGroup {
                    free_rank: usize::from(reduced),
                    torsion: vec![],
                }],
            };
        }
        let dim = dim as usize;
        let index_of: Vec<HashMap<&Vec<usize>, usize>> = by_dim
            .iter()
            .map(|faces| faces.iter().enumerate().map(|(i, f)| (f, i)).collect())
            .collect();
        // ranks[k] = rank of the boundary map C_k -> C_{k-1}; k = 0 is the
        // augmentation, used only for reduced homology.
        let mut ranks = vec![0usize; dim + 2];
        let mut torsions: Vec<Vec<BigUint>> = vec![vec![]; dim + 2];
        ranks[0] = usize::from(reduced && !by_dim[0].is_empty());
        for k in 1..=dim {
            let cols = by_dim[k].len();
            let rows = by_dim[k - 1].len();
            let mut matrix = SparseIntMatrix::new(rows, cols);
            for (c, face) in by_dim[k].iter().enumerate() {
                for omit in 0..face.len() {
                    let sub: Vec<usize> = face
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| *i != omit)
                        .map(|(_, &v)| v)
                        .collect();
                    let r = index_of[k - 1][&sub];
                    matrix.set(r, c, if omit % 2 == 0 { 1 } else { -1 });
                }
            }
            let result = matrix.smith_invariants();
            ranks[k] = result.rank;
            torsions[k] = result.torsion;
        }
        // groups[k+1] = H_k for k = -1..=dim.
        let mut groups = Vec::with_capacity(dim + 2);
        groups.push(HomologyGroup {
            free_rank: usize::from(reduced) - ranks[0],
            torsion: vec![],
        });
        for k in 0..=dim {
            let cycles = by_dim[k].len() - ranks[k];
            let boundaries = if k < dim { ranks[k + 1] } else { 0 };
            groups.push(HomologyGroup {
                free_rank: cycles - boundaries,
                torsion: if k < dim {
                    torsions[k + 1].clone()
                } else {
                    vec![]
                },
            });
        }
        HomologySummary { groups }
    }
}

/// Homology of one dimension: free rank plus invariant factors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HomologyGroup {
    pub free_rank: usize,
    pub torsion: Vec<BigUint>,
}

impl HomologyGroup {
    pub fn is_trivial(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }

    pub fn is_free_abelian_of_rank(&self, r: usize) -> bool {
        self.free_rank == r && self.torsion.is_empty()
    }
}

impl std::fmt::Display for HomologyGroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            r => parts.push(format!("Z^{r}")),
        }
        for t in &self.torsion {
            parts.push(format!("Z/{t}"));
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// Homology in dimensions `-1..=dim`; `groups[k+1]` holds `H̃_k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HomologySummary {
    pub groups: Vec<HomologyGroup>,
}

impl HomologySummary {
    pub fn group(&self, k: isize) -> Option<&HomologyGroup> {
        usize::try_from(k + 1).ok().and_then(|i| self.groups.get(i))
    }

    /// Betti number over `𝔽_p`, from the universal coefficient theorem.
    pub fn betti_mod_p(&self, k: isize, p: u64) -> usize {
        let divisible = |g: Option<&HomologyGroup>| -> usize {
            g.map_or(0, |g| {
                g.torsion
                    .iter()
                    .filter(|t| (*t % BigUint::from(p)) == BigUint::from(0u32))
                    .count()
            })
        };
        let current = self.group(k);
        current.map_or(0, |g| g.free_rank) + divisible(current) + divisible(self.group(k - 1))
    }

    pub fn betti_rational(&self, k: isize) -> usize {
        self.group(k).map_or(0, |g| g.free_rank)
    }
}

/// Coefficient choices for the topological Cohen-Macaulayness test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmCoefficients {
    Integers,
    Rationals,
    ModP(u64),
}

#[derive(Debug, Clone, Serialize)]
pub struct CmWitness {
    /// Labels of the poset elements spanning the failing link's base face.
    pub face: Vec<String>,
    pub homology_degree: isize,
    pub group: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct CmVerdict {
    pub is_cm: bool,
    pub witness: Option<CmWitness>,
}

/// Reisner's criterion on the order complex of the face poset: the complex
/// is Cohen-Macaulay iff every link has vanishing reduced homology below its
/// dimension. Returns the first failing link as a witness.
pub fn is_cm_complex(complex: &QuotientComplex, coefficients: CmCoefficients) -> CmVerdict {
    let oc = complex.order_complex();
    let mut all_faces: Vec<Vec<usize>> = vec![vec![]];
    for faces in oc.faces_by_dim() {
        all_faces.extend(faces);
    }
    for face in all_faces {
        let link = oc.link(&face).expect("enumerated faces are faces");
        let dim = link.dimension();
        let homology = link.homology(true);
        for k in -1..dim {
            let group = homology.group(k).cloned().unwrap_or(HomologyGroup {
                free_rank: 0,
                torsion: vec![],
            });
            let vanishes = match coefficients {
                CmCoefficients::Integers => group.is_trivial(),
                CmCoefficients::Rationals => homology.betti_rational(k) == 0,
                CmCoefficients::ModP(p) => homology.betti_mod_p(k, p) == 0,
            };
            if !vanishes {
                let labels = face
                    .iter()
                    .map(|&v| complex.face(v + 1).label())
                    .collect::<Vec<_>>();
                return CmVerdict {
                    is_cm: false,
                    witness: Some(CmWitness {
                        face: labels,
                        homology_degree: k,
                        group: group.to_string(),
                    }),
                };
            }
        }
    }
    CmVerdict {
        is_cm: true,
        witness: None,
    }
}

/// The double-coset model of the face poset: pairs `(G·w·W_J, J)` over all
/// subsets `J` of the Coxeter generators `(i, i+1)`, ordered by reverse
/// inclusion of both entries.
#[derive(Debug, Clone)]
pub struct SigmaPoset {
    n: usize,
    elements: Vec<SigmaElement>,
}

#[derive(Debug, Clone)]
pub struct SigmaElement {
    /// Bit `i-1` set iff the Coxeter generator `(i, i+1)` is in `J`.
    pub j_mask: u32,
    /// Sorted indices (into `S_n`'s element list) of the double coset.
    pub members: Vec<usize>,
}

fn uf_find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

fn uf_union(parent: &mut [usize], a: usize, b: usize) {
    let (ra, rb) = (uf_find(parent, a), uf_find(parent, b));
    if ra != rb {
        parent[ra] = rb;
    }
}

impl SigmaPoset {
    pub fn build(group: &PermutationGroup) -> SigmaPoset {
        let n = group.degree();
        let ambient = PermutationGroup::symmetric(n);
        let elems = ambient.elements();
        let index_of: HashMap<&Permutation, usize> =
            elems.iter().enumerate().map(|(i, p)| (p, i)).collect();
        let coxeter: Vec<Permutation> = (1..n)
            .map(|i| Permutation::from_cycles(n, &[vec![i, i + 1]]).unwrap())
            .collect();
        let mut elements = Vec::new();
        for j_mask in 0u32..(1 << (n - 1)) {
            // Union-find over S_n: merge x ~ g∘x (left by G) and x ~ x∘s
            // (right by the parabolic subgroup W_J).
            let mut parent: Vec<usize> = (0..elems.len()).collect();
            for (i, x) in elems.iter().enumerate() {
                for g in group.generators() {
                    uf_union(&mut parent, i, index_of[&g.compose(x)]);
                }
                for (s_idx, s) in coxeter.iter().enumerate() {
                    if j_mask & (1 << s_idx) != 0 {
                        uf_union(&mut parent, i, index_of[&x.compose(s)]);
                    }
                }
            }
            let mut by_root: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for i in 0..elems.len() {
                let root = uf_find(&mut parent, i);
                by_root.entry(root).or_default().push(i);
            }
            for (_, members) in by_root {
                elements.push(SigmaElement { j_mask, members });
            }
        }
        SigmaPoset { n, elements }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[SigmaElement] {
        &self.elements
    }

    /// `(GwW_J, J) ≤ (Gw'W_{J'}, J')` iff `J ⊇ J'` and `Gw'W_{J'} ⊆ GwW_J`.
    pub fn leq(&self, a: usize, b: usize) -> bool {
        let (ea, eb) = (&self.elements[a], &self.elements[b]);
        if ea.j_mask & eb.j_mask != eb.j_mask {
            return false;
        }
        ea.members.binary_search(&eb.members[0]).is_ok()
    }

    /// Maps each element to the face of the chain-orbit construction built
    /// from the standard flag through any double-coset representative.
    pub fn face_map(&self, complex: &QuotientComplex) -> Result<Vec<usize>, ComplexError> {
        let ambient = PermutationGroup::symmetric(self.n);
        let elems = ambient.elements();
        let mut out = Vec::with_capacity(self.elements.len());
        for e in &self.elements {
            let w = &elems[e.members[0]];
            let mut chain: Vec<u32> = Vec::new();
            for i in (1..self.n).rev() {
                if e.j_mask & (1 << (i - 1)) == 0 {
                    let standard: u32 = (1 << i) - 1;
                    chain.push(w.apply_mask(standard));
                }
            }
            out.push(complex.face_of_chain(&chain)?);
        }
        Ok(out)
    }
}

/// Verifies that the chain-orbit complex and the double-coset poset are
/// isomorphic as posets, via the canonical face map.
pub fn cross_check_constructions(complex: &QuotientComplex, sigma: &SigmaPoset) -> bool {
    if sigma.len() != complex.num_faces() {
        return false;
    }
    let map = match sigma.face_map(complex) {
        Ok(m) => m,
        Err(_) => return false,
    };
    let mut seen = vec![false; complex.num_faces()];
    for &f in &map {
        if seen[f] {
            return false;
        }
        seen[f] = true;
    }
    for a in 0..sigma.len() {
        for b in 0..sigma.len() {
            if sigma.leq(a, b) != complex.face_leq(map[a], map[b]) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::permgrp::parse_group;
    use crate::polyring::parse_polynomial;

    fn z() -> Domain {
        Domain::Int
    }

    fn d4() -> PermutationGroup {
        parse_group("(1,2,3,4)(1,3)", 4).unwrap()
    }

    #[test]
    fn full_symmetric_quotient() {
        let qc = QuotientComplex::build(&PermutationGroup::symmetric(4)).unwrap();
        assert_eq!(qc.num_faces(), 8);
        assert_eq!(qc.facets().len(), 1);
    }

    #[test]
    fn d4_quotient_counts() {
        let qc = QuotientComplex::build(&d4()).unwrap();
        assert_eq!(qc.num_faces(), 14);
        assert_eq!(qc.facets().len(), 3);
    }

    #[test]
    fn trivial_group_hexagon() {
        let trivial = PermutationGroup::trivial(3);
        let qc = QuotientComplex::build(&trivial).unwrap();
        assert_eq!(qc.num_faces(), 13);
        assert_eq!(qc.facets().len(), 6);
    }

    #[test]
    fn facet_count_identity() {
        for n in 3..=5usize {
            for spec in ["", "(1,2)", "(1,2,3)"] {
                let g = parse_group(spec, n).unwrap();
                let qc = QuotientComplex::build(&g).unwrap();
                let factorial: usize = (1..=n).product();
                assert_eq!(qc.facets().len(), factorial / g.order());
            }
        }
    }

    #[test]
    fn face_orbit_monomials() {
        let qc = QuotientComplex::build(&d4()).unwrap();
        assert_eq!(qc.face_to_orbit_monomial(0, z()), Polynomial::one(4, z()));
        let f13 = qc.face_of_chain(&[0b0101]).unwrap();
        assert_eq!(
            qc.face_to_orbit_monomial(f13, z()),
            parse_polynomial("x1*x3 + x2*x4", 4, z()).unwrap()
        );
        let f = qc.face_of_chain(&[0b1011, 0b0001]).unwrap();
        let expected = crate::polyring::orbit_monomial(
            &d4(),
            &crate::polyring::Monomial(vec![2, 1, 0, 1]),
            z(),
        )
        .unwrap();
        assert_eq!(qc.face_to_orbit_monomial(f, z()), expected);
    }

    #[test]
    fn facet_vectors() {
        let qc = QuotientComplex::build(&d4()).unwrap();
        assert_eq!(qc.facet_vector_canonical(0), vec![1, 1, 1]);
        for (j, &facet) in qc.facets().iter().enumerate() {
            let v = qc.facet_vector_canonical(facet);
            let mut expected = vec![0u8; qc.facets().len()];
            expected[j] = 1;
            assert_eq!(v, expected);
        }
    }

    #[test]
    fn links() {
        // Six tetrahedra joined along the common edge {0,1}: the link of
        // that edge is the hexagon cycle on the remaining vertices.
        let facets: Vec<Vec<usize>> = (0..6)
            .map(|i| vec![0, 1, 2 + i, 2 + (i + 1) % 6])
            .collect();
        let complex = SimplicialComplex::new(8, facets);
        let link = complex.link(&[0, 1]).unwrap();
        assert_eq!(link.dimension(), 1);
        assert_eq!(link.facets().len(), 6);
        assert_eq!(complex.link(&[]).unwrap(), complex);
        let facet_link = complex.link(&[0, 1, 2, 3]).unwrap();
        assert_eq!(facet_link.dimension(), -1);
        assert!(complex.link(&[2, 5]).is_err());
    }

    #[test]
    fn homology_of_hexagon() {
        let facets: Vec<Vec<usize>> = (0..6).map(|i| vec![i, (i + 1) % 6]).collect();
        let hexagon = SimplicialComplex::new(6, facets);
        let h = hexagon.homology(true);
        assert!(h.group(-1).unwrap().is_trivial());
        assert!(h.group(0).unwrap().is_trivial());
        assert!(h.group(1).unwrap().is_free_abelian_of_rank(1));

        let unreduced = hexagon.homology(false);
        assert!(unreduced.group(0).unwrap().is_free_abelian_of_rank(1));
    }

    #[test]
    fn homology_of_subdivided_triangle_boundary() {
        let trivial = PermutationGroup::trivial(3);
        let qc = QuotientComplex::build(&trivial).unwrap();
        let oc = qc.order_complex();
        let h = oc.homology(true);
        assert!(h.group(0).unwrap().is_trivial());
        assert!(h.group(1).unwrap().is_free_abelian_of_rank(1));
    }

    #[test]
    fn homology_of_c4_quotient_has_two_torsion() {
        let c4 = parse_group("(1,2,3,4)", 4).unwrap();
        let qc = QuotientComplex::build(&c4).unwrap();
        let h = qc.order_complex().homology(true);
        let h1 = h.group(1).unwrap();
        assert_eq!(h1.free_rank, 0);
        assert_eq!(h1.torsion, vec![BigUint::from(2u32)]);
    }

    #[test]
    fn cm_examples() {
        assert!(
            is_cm_complex(&QuotientComplex::build(&d4()).unwrap(), CmCoefficients::Integers).is_cm
        );
        assert!(
            is_cm_complex(
                &QuotientComplex::build(&PermutationGroup::symmetric(4)).unwrap(),
                CmCoefficients::Integers
            )
            .is_cm
        );
        let c4 = parse_group("(1,2,3,4)", 4).unwrap();
        let verdict =
            is_cm_complex(&QuotientComplex::build(&c4).unwrap(), CmCoefficients::Integers);
        assert!(!verdict.is_cm);
        let witness = verdict.witness.unwrap();
        assert!(witness.group.contains("Z/2"));
        // Torsion is invisible rationally but fatal mod 2.
        assert!(
            is_cm_complex(&QuotientComplex::build(&c4).unwrap(), CmCoefficients::Rationals).is_cm
        );
        assert!(
            !is_cm_complex(&QuotientComplex::build(&c4).unwrap(), CmCoefficients::ModP(2)).is_cm
        );
    }

    #[test]
    fn euler_characteristic_consistency() {
        for spec in ["", "(1,2)", "(1,2,3,4)", "(1,2,3,4)(1,3)"] {
            let g = parse_group(spec, 4).unwrap();
            let oc = QuotientComplex::build(&g).unwrap().order_complex();
            // Reduced Euler characteristic: Σ (−1)^k #C_k over k = −1..dim.
            let mut chi: i64 = -1;
            for (k, faces) in oc.faces_by_dim().iter().enumerate() {
                let sign = if k % 2 == 0 { 1 } else { -1 };
                chi += sign * faces.len() as i64;
            }
            let h = oc.homology(true);
            let mut homology_chi: i64 = 0;
            for k in -1..=oc.dimension() {
                let sign = if k.rem_euclid(2) == 0 { 1 } else { -1 };
                homology_chi += sign * h.group(k).unwrap().free_rank as i64;
            }
            assert_eq!(chi, homology_chi, "group {spec}");
        }
    }

    #[test]
    fn sigma_cross_check_small() {
        for spec in ["", "(1,2)", "(1,2,3)", "(1,2,3,4)", "(1,2,3,4)(1,3)"] {
            let g = parse_group(spec, 4).unwrap();
            let qc = QuotientComplex::build(&g).unwrap();
            let sigma = SigmaPoset::build(&g);
            assert!(cross_check_constructions(&qc, &sigma), "failed for {spec}");
        }
    }

    #[test]
    fn balancedness_and_rank_sets() {
        let qc = QuotientComplex::build(&d4()).unwrap();
        for (i, f) in qc.faces().iter().enumerate() {
            assert_eq!(f.rank(), f.repr.len());
            for (j, g) in qc.faces().iter().enumerate() {
                if qc.face_leq(i, j) {
                    assert_eq!(f.rank_set & g.rank_set, f.rank_set);
                }
            }
        }
        // Distinct faces with equal rank sets share no upper bound.
        for i in 0..qc.num_faces() {
            for j in 0..qc.num_faces() {
                if i != j && qc.faces()[i].rank_set == qc.faces()[j].rank_set {
                    for k in 0..qc.num_faces() {
                        assert!(!(qc.face_leq(i, k) && qc.face_leq(j, k)));
                    }
                }
            }
        }
    }

    #[test]
    fn json_export_is_deterministic() {
        let qc = QuotientComplex::build(&d4()).unwrap();
        let a = serde_json::to_string(&qc.to_json()).unwrap();
        let b = serde_json::to_string(&QuotientComplex::build(&d4()).unwrap().to_json()).unwrap();
        assert_eq!(a, b);
        assert!(a.contains("\"num_facets\":3"));
    }
}
