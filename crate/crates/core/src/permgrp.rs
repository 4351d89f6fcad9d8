//! Permutations of `[n]`, finitely generated subgroups of `S_n`, orbits,
//! coset transversals, double cosets, and the reflection-rotation subgroup.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

/// Default cap on the number of elements a group closure may enumerate.
pub const DEFAULT_GROUP_CAP: usize = 1_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GroupError {
    #[error("group closure exceeded the cap of {0} elements")]
    CapExceeded(usize),
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),
    #[error("not a subgroup of the ambient group")]
    NotASubgroup,
    #[error("invalid permutation images: {0}")]
    InvalidImages(String),
    #[error("parse error at position {pos}: {msg}")]
    ParseError { pos: usize, msg: String },
    #[error("point {0} out of range for degree {1}")]
    PointOutOfRange(usize, usize),
}

/// A permutation of the points `0..n` (displayed 1-based, in cycle notation).
///
/// `images[i]` is the image of point `i`. Composition follows function
/// application: `(a.compose(&b))(x) = a(b(x))`, i.e. `b` acts first.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Permutation {
    images: Vec<u8>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation {
            images: (0..n as u8).collect(),
        }
    }

    /// Builds a permutation from its image sequence (0-based).
    pub fn from_images(images: Vec<u8>) -> Result<Self, GroupError> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &v in &images {
            if (v as usize) >= n || seen[v as usize] {
                return Err(GroupError::InvalidImages(format!("{images:?}")));
            }
            seen[v as usize] = true;
        }
        Ok(Permutation { images })
    }

    /// Builds a permutation of degree `n` from disjoint cycles of 1-based points.
    pub fn from_cycles(n: usize, cycles: &[Vec<usize>]) -> Result<Self, GroupError> {
        let mut images: Vec<u8> = (0..n as u8).collect();
        let mut touched = vec![false; n];
        for cycle in cycles {
            for window in 0..cycle.len() {
                let from = cycle[window];
                let to = cycle[(window + 1) % cycle.len()];
                if from == 0 || from > n {
                    return Err(GroupError::PointOutOfRange(from, n));
                }
                if to == 0 || to > n {
                    return Err(GroupError::PointOutOfRange(to, n));
                }
                if touched[from - 1] {
                    return Err(GroupError::InvalidImages(format!(
                        "point {from} appears in two cycles of one generator"
                    )));
                }
                touched[from - 1] = true;
                images[from - 1] = (to - 1) as u8;
            }
        }
        Permutation::from_images(images)
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn apply(&self, point: usize) -> usize {
        self.images[point] as usize
    }

    pub fn images(&self) -> &[u8] {
        &self.images
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &v)| i == v as usize)
    }

    /// `self ∘ other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        debug_assert_eq!(self.degree(), other.degree());
        Permutation {
            images: other.images.iter().map(|&x| self.images[x as usize]).collect(),
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut images = vec![0u8; self.images.len()];
        for (i, &v) in self.images.iter().enumerate() {
            images[v as usize] = i as u8;
        }
        Permutation { images }
    }

    /// `self ∘ p ∘ self⁻¹`.
    pub fn conjugate(&self, p: &Permutation) -> Permutation {
        self.compose(p).compose(&self.inverse())
    }

    /// Image of a subset given as an n-bit mask.
    pub fn apply_mask(&self, mask: u32) -> u32 {
        let mut out = 0u32;
        let mut m = mask;
        while m != 0 {
            let i = m.trailing_zeros() as usize;
            out |= 1 << self.images[i];
            m &= m - 1;
        }
        out
    }

    /// Nontrivial cycles, each rotated to start at its smallest point (0-based).
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.degree();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] || self.apply(start) == start {
                seen[start] = true;
                continue;
            }
            let mut cycle = vec![start];
            seen[start] = true;
            let mut x = self.apply(start);
            while x != start {
                seen[x] = true;
                cycle.push(x);
                x = self.apply(x);
            }
            out.push(cycle);
        }
        out
    }

    pub fn cycle_structure(&self) -> CycleStructure {
        let mut counts: HashMap<usize, usize> = HashMap::new();
        for cycle in self.cycles() {
            *counts.entry(cycle.len()).or_insert(0) += 1;
        }
        let mut pairs: Vec<(usize, usize)> = counts.into_iter().collect();
        pairs.sort_unstable();
        CycleStructure(pairs)
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return write!(f, "()");
        }
        for cycle in cycles {
            write!(f, "(")?;
            for (i, p) in cycle.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", p + 1)?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

/// Multiset of nontrivial cycle lengths with multiplicities, sorted by length.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct CycleStructure(pub Vec<(usize, usize)>);

impl CycleStructure {
    pub fn is_transposition(&self) -> bool {
        self.0 == [(2, 1)]
    }
    pub fn is_double_transposition(&self) -> bool {
        self.0 == [(2, 2)]
    }
    pub fn is_three_cycle(&self) -> bool {
        self.0 == [(3, 1)]
    }
}

/// A subgroup of `S_n` with its element set enumerated eagerly.
///
/// Elements are stored sorted by image sequence, so iteration order,
/// membership tests, and every computation built on them are deterministic.
#[derive(Debug, Clone)]
pub struct PermutationGroup {
    degree: usize,
    generators: Vec<Permutation>,
    elements: Vec<Permutation>,
}

impl PermutationGroup {
    /// Generates the subgroup closure by breadth-first multiplication.
    pub fn new(
        degree: usize,
        generators: Vec<Permutation>,
        cap: usize,
    ) -> Result<Self, GroupError> {
        for g in &generators {
            if g.degree() != degree {
                return Err(GroupError::DegreeMismatch(g.degree(), degree));
            }
        }
        let mut gens: Vec<Permutation> = generators
            .into_iter()
            .filter(|g| !g.is_identity())
            .collect();
        gens.sort();
        gens.dedup();

        let id = Permutation::identity(degree);
        let mut set: HashSet<Permutation> = HashSet::new();
        set.insert(id.clone());
        let mut queue: VecDeque<Permutation> = VecDeque::new();
        queue.push_back(id);
        while let Some(p) = queue.pop_front() {
            for g in &gens {
                let q = g.compose(&p);
                if !set.contains(&q) {
                    if set.len() >= cap {
                        return Err(GroupError::CapExceeded(cap));
                    }
                    set.insert(q.clone());
                    queue.push_back(q);
                }
            }
        }
        let mut elements: Vec<Permutation> = set.into_iter().collect();
        elements.sort();
        Ok(PermutationGroup {
            degree,
            generators: gens,
            elements,
        })
    }

    pub fn trivial(degree: usize) -> Self {
        PermutationGroup::new(degree, vec![], DEFAULT_GROUP_CAP).unwrap()
    }

    pub fn symmetric(degree: usize) -> Self {
        let mut gens = Vec::new();
        if degree >= 2 {
            let mut tr = Permutation::identity(degree);
            tr.images.swap(0, 1);
            gens.push(tr);
        }
        if degree >= 3 {
            let mut images: Vec<u8> = (1..degree as u8).collect();
            images.push(0);
            gens.push(Permutation { images });
        }
        PermutationGroup::new(degree, gens, DEFAULT_GROUP_CAP).unwrap()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn generators(&self) -> &[Permutation] {
        &self.generators
    }

    /// All elements, sorted by image sequence.
    pub fn elements(&self) -> &[Permutation] {
        &self.elements
    }

    pub fn contains(&self, p: &Permutation) -> bool {
        p.degree() == self.degree && self.elements.binary_search(p).is_ok()
    }

    pub fn is_subgroup_of(&self, ambient: &PermutationGroup) -> bool {
        self.degree == ambient.degree && self.generators.iter().all(|g| ambient.contains(g))
    }

    pub fn is_transitive(&self) -> bool {
        orbit(self, 0usize, |g, &x| g.apply(x)).len() == self.degree
    }

    /// The subgroup generated by all transpositions, double transpositions,
    /// and 3-cycles of the group, together with its index.
    ///
    /// These are exactly the elements acting on `ℝ^n` as reflections or
    /// rotations (fixed space of codimension at most 2).
    pub fn rr_subgroup(&self) -> (PermutationGroup, usize) {
        let gens: Vec<Permutation> = self
            .elements
            .iter()
            .filter(|p| {
                let cs = p.cycle_structure();
                cs.is_transposition() || cs.is_double_transposition() || cs.is_three_cycle()
            })
            .cloned()
            .collect();
        let sub = PermutationGroup::new(self.degree, gens, self.order() + 1)
            .expect("subgroup closure stays within the parent order");
        let index = self.order() / sub.order();
        (sub, index)
    }

    /// Lexicographically lowest representatives of the right cosets
    /// `sub·g` inside this group, sorted, plus a map element → representative.
    pub fn lex_transversal(
        &self,
        sub: &PermutationGroup,
    ) -> Result<(Vec<Permutation>, HashMap<Permutation, Permutation>), GroupError> {
        if !sub.is_subgroup_of(self) {
            return Err(GroupError::NotASubgroup);
        }
        let mut reps = Vec::with_capacity(self.order() / sub.order());
        let mut rep_of: HashMap<Permutation, Permutation> = HashMap::with_capacity(self.order());
        // Elements are sorted, so the first unassigned element is the
        // lex-lowest member of its own coset.
        for g in &self.elements {
            if rep_of.contains_key(g) {
                continue;
            }
            reps.push(g.clone());
            for h in sub.elements() {
                rep_of.insert(h.compose(g), g.clone());
            }
        }
        Ok((reps, rep_of))
    }

    /// Partitions the lex transversal of `left` into double-coset blocks
    /// `left·b·right`. Blocks and their contents are sorted.
    pub fn double_cosets(
        &self,
        left: &PermutationGroup,
        right: &PermutationGroup,
    ) -> Result<Vec<Vec<Permutation>>, GroupError> {
        if !right.is_subgroup_of(self) {
            return Err(GroupError::NotASubgroup);
        }
        let (transversal, rep_of) = self.lex_transversal(left)?;
        let mut assigned: HashSet<Permutation> = HashSet::new();
        let mut blocks = Vec::new();
        for t in &transversal {
            if assigned.contains(t) {
                continue;
            }
            // Orbit of the coset representative under right multiplication
            // by `right`, canonicalizing back into the transversal.
            let mut block: BTreeSet<Permutation> = BTreeSet::new();
            let mut queue = VecDeque::new();
            block.insert(t.clone());
            queue.push_back(t.clone());
            while let Some(x) = queue.pop_front() {
                for r in right.generators().iter().chain(right.elements().iter().take(1)) {
                    let y = rep_of[&x.compose(r)].clone();
                    if block.insert(y.clone()) {
                        queue.push_back(y);
                    }
                }
            }
            for b in &block {
                assigned.insert(b.clone());
            }
            blocks.push(block.into_iter().collect());
        }
        Ok(blocks)
    }

    /// Canonical conjugate under relabeling: the conjugate `σGσ⁻¹` whose
    /// sorted element list is lexicographically smallest, `σ` over `S_n`.
    fn canonical_conjugacy_key(&self, ambient: &PermutationGroup) -> Vec<Permutation> {
        let mut best: Option<Vec<Permutation>> = None;
        for sigma in ambient.elements() {
            let mut conj: Vec<Permutation> =
                self.elements.iter().map(|h| sigma.conjugate(h)).collect();
            conj.sort();
            if best.as_ref().is_none_or(|b| conj < *b) {
                best = Some(conj);
            }
        }
        best.unwrap()
    }

    fn is_conjugate_to(&self, other: &PermutationGroup, ambient: &PermutationGroup) -> bool {
        if self.order() != other.order() {
            return false;
        }
        'outer: for sigma in ambient.elements() {
            for h in &self.elements {
                if !other.contains(&sigma.conjugate(h)) {
                    continue 'outer;
                }
            }
            return true;
        }
        false
    }

    /// Classifies a transitive group generated by its reflections and
    /// rotations, following the case split on which short cycle types occur.
    pub fn huffman_classify(&self) -> HuffmanClass {
        let n = self.degree;
        if !self.is_transitive() {
            return HuffmanClass::NotApplicable;
        }
        let (_, index) = self.rr_subgroup();
        if index != 1 {
            return HuffmanClass::NotApplicable;
        }
        if n == 1 {
            return HuffmanClass::Symmetric;
        }
        let has_transposition = self
            .elements
            .iter()
            .any(|p| p.cycle_structure().is_transposition());
        let has_three_cycle = self
            .elements
            .iter()
            .any(|p| p.cycle_structure().is_three_cycle());
        let factorial = |k: usize| (1..=k).product::<usize>();
        match (has_transposition, has_three_cycle) {
            (true, true) => {
                if self.order() == factorial(n) {
                    HuffmanClass::Symmetric
                } else {
                    HuffmanClass::Unclassifiable
                }
            }
            (false, true) => {
                if n >= 3 && self.order() == factorial(n) / 2 {
                    HuffmanClass::Alternating
                } else {
                    HuffmanClass::Unclassifiable
                }
            }
            (true, false) => {
                let m = n / 2;
                if n.is_multiple_of(2) && self.order() == (1 << m) * factorial(m) {
                    HuffmanClass::HyperoctahedralWreath
                } else {
                    HuffmanClass::Unclassifiable
                }
            }
            (false, false) => match (n, self.order()) {
                (5, 10) => HuffmanClass::Dihedral10Degree5,
                (6, 60) => HuffmanClass::Alternating5Degree6,
                (7, 168) => HuffmanClass::Psl27Degree7,
                (8, 1344) => HuffmanClass::Agl32Degree8,
                (_, order) => {
                    let m = n / 2;
                    if n.is_multiple_of(2) && order == (1 << m) * factorial(m) / 2 {
                        HuffmanClass::AlternatingIntersectWreath
                    } else {
                        HuffmanClass::Unclassifiable
                    }
                }
            },
        }
    }
}

impl PartialEq for PermutationGroup {
    fn eq(&self, other: &Self) -> bool {
        self.degree == other.degree && self.elements == other.elements
    }
}
impl Eq for PermutationGroup {}

impl fmt::Display for PermutationGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.generators.is_empty() {
            return write!(f, "<()>");
        }
        write!(f, "<")?;
        for (i, g) in self.generators.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{g}")?;
        }
        write!(f, ">")
    }
}

/// Labels of Huffman's classification of transitive groups generated by
/// reflections and rotations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum HuffmanClass {
    Symmetric,
    Alternating,
    HyperoctahedralWreath,
    AlternatingIntersectWreath,
    Dihedral10Degree5,
    Alternating5Degree6,
    Psl27Degree7,
    Agl32Degree8,
    NotApplicable,
    Unclassifiable,
}

/// Orbit of `item` under the group, for an arbitrary action. Sorted.
pub fn orbit<T, F>(group: &PermutationGroup, item: T, action: F) -> Vec<T>
where
    T: Ord + Clone,
    F: Fn(&Permutation, &T) -> T,
{
    let mut seen: BTreeSet<T> = BTreeSet::new();
    let mut queue = VecDeque::new();
    seen.insert(item.clone());
    queue.push_back(item);
    while let Some(x) = queue.pop_front() {
        for g in group.generators() {
            let y = action(g, &x);
            if seen.insert(y.clone()) {
                queue.push_back(y);
            }
        }
    }
    seen.into_iter().collect()
}

/// Parses generators in cycle notation, e.g. `"(1,2,3,4)(1,3)"` or
/// `"(1 2 3 4),(1 3)"`.
///
/// Generators are separated by `,` or `;` between cycle groups. Adjacent
/// cycles without a separator belong to the same generator while they are
/// disjoint; a cycle meeting the support accumulated so far starts a new
/// generator, so `"(1,2,3,4)(1,3)"` parses as the two generators
/// `(1,2,3,4)` and `(1,3)`. Fixed points may be omitted. The empty string
/// yields the trivial group.
pub fn parse_group(spec: &str, degree: usize) -> Result<PermutationGroup, GroupError> {
    parse_group_with_cap(spec, degree, DEFAULT_GROUP_CAP)
}

pub fn parse_group_with_cap(
    spec: &str,
    degree: usize,
    cap: usize,
) -> Result<PermutationGroup, GroupError> {
    let bytes = spec.as_bytes();
    let mut pos = 0usize;
    let mut generators: Vec<Permutation> = Vec::new();
    let mut current: Vec<Vec<usize>> = Vec::new();
    let mut support: HashSet<usize> = HashSet::new();

    let flush =
        |current: &mut Vec<Vec<usize>>, support: &mut HashSet<usize>, generators: &mut Vec<Permutation>| {
            if !current.is_empty() {
                let p = Permutation::from_cycles(degree, current)?;
                generators.push(p);
                current.clear();
                support.clear();
            }
            Ok::<(), GroupError>(())
        };

    while pos < bytes.len() {
        match bytes[pos] {
            b' ' | b'\t' | b'\n' => pos += 1,
            b',' | b';' => {
                flush(&mut current, &mut support, &mut generators)?;
                pos += 1;
            }
            b'(' => {
                let start = pos;
                pos += 1;
                let mut cycle: Vec<usize> = Vec::new();
                let mut num: Option<usize> = None;
                loop {
                    if pos >= bytes.len() {
                        return Err(GroupError::ParseError {
                            pos: start,
                            msg: "unclosed cycle".into(),
                        });
                    }
                    match bytes[pos] {
                        b'0'..=b'9' => {
                            let d = (bytes[pos] - b'0') as usize;
                            num = Some(num.unwrap_or(0) * 10 + d);
                            pos += 1;
                        }
                        b',' | b' ' | b'\t' => {
                            if let Some(v) = num.take() {
                                cycle.push(v);
                            }
                            pos += 1;
                        }
                        b')' => {
                            if let Some(v) = num.take() {
                                cycle.push(v);
                            }
                            pos += 1;
                            break;
                        }
                        c => {
                            return Err(GroupError::ParseError {
                                pos,
                                msg: format!("unexpected character '{}'", c as char),
                            })
                        }
                    }
                }
                if cycle.iter().any(|&v| v == 0 || v > degree) {
                    let bad = *cycle.iter().find(|&&v| v == 0 || v > degree).unwrap();
                    return Err(GroupError::PointOutOfRange(bad, degree));
                }
                if cycle.iter().any(|v| support.contains(v)) {
                    // Overlapping support: this cycle starts a new generator.
                    flush(&mut current, &mut support, &mut generators)?;
                }
                support.extend(cycle.iter().copied());
                current.push(cycle);
            }
            c => {
                return Err(GroupError::ParseError {
                    pos,
                    msg: format!("unexpected character '{}'", c as char),
                })
            }
        }
    }
    flush(&mut current, &mut support, &mut generators)?;
    PermutationGroup::new(degree, generators, cap)
}

/// Representatives of the conjugacy classes of subgroups of `S_n`, found by
/// closing class representatives under single-element extensions.
///
/// Output is sorted by (order, canonical conjugate element list), so it is
/// deterministic.
pub fn subgroup_classes(n: usize, cap: usize) -> Result<Vec<PermutationGroup>, GroupError> {
    let ambient = PermutationGroup::symmetric(n);
    if ambient.order() > cap {
        return Err(GroupError::CapExceeded(cap));
    }
    let trivial = PermutationGroup::trivial(n);
    let mut classes: Vec<PermutationGroup> = vec![trivial.clone()];
    // Bucket class indices by a cheap conjugacy invariant.
    let invariant = |g: &PermutationGroup| -> (usize, Vec<CycleStructure>) {
        let mut types: Vec<CycleStructure> =
            g.elements().iter().map(|p| p.cycle_structure()).collect();
        types.sort();
        (g.order(), types)
    };
    let mut buckets: HashMap<(usize, Vec<CycleStructure>), Vec<usize>> = HashMap::new();
    buckets.entry(invariant(&trivial)).or_default().push(0);
    let mut seen_exact: HashSet<Vec<Permutation>> = HashSet::new();
    seen_exact.insert(trivial.elements().to_vec());

    let mut queue: VecDeque<usize> = VecDeque::new();
    queue.push_back(0);
    while let Some(idx) = queue.pop_front() {
        let base = classes[idx].clone();
        for g in ambient.elements() {
            if base.contains(g) {
                continue;
            }
            let mut gens = base.generators().to_vec();
            gens.push(g.clone());
            let candidate = PermutationGroup::new(n, gens, cap)?;
            if !seen_exact.insert(candidate.elements().to_vec()) {
                continue;
            }
            let key = invariant(&candidate);
            let bucket = buckets.entry(key).or_default();
            if bucket
                .iter()
                .any(|&i| classes[i].is_conjugate_to(&candidate, &ambient))
            {
                continue;
            }
            classes.push(candidate);
            bucket.push(classes.len() - 1);
            queue.push_back(classes.len() - 1);
        }
    }

    let mut keyed: Vec<(usize, Vec<Permutation>, PermutationGroup)> = classes
        .into_iter()
        .map(|g| (g.order(), g.canonical_conjugacy_key(&ambient), g))
        .collect();
    keyed.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
    Ok(keyed.into_iter().map(|(_, _, g)| g).collect())
}
