//! The Stanley-Reisner ring `S` of the poset `B_n \ {∅}`: monomials supported
//! on chains of subsets, the fine grading, rank-row sums `θ_i`, and the
//! Garsia map between `S` and the polynomial ring.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::permgrp::{orbit, Permutation, PermutationGroup};
use crate::polyring::{Coeff, Domain, Monomial, Polynomial};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SrError {
    #[error("index {0} out of range 1..={1}")]
    IndexOutOfRange(usize, usize),
    #[error("input is not a full orbit monomial")]
    NotAnOrbitMonomial,
}

/// Writes the 1-based members of an n-bit subset mask.
pub fn subset_to_vec(mask: u32) -> Vec<usize> {
    let mut out = Vec::with_capacity(mask.count_ones() as usize);
    let mut m = mask;
    while m != 0 {
        out.push(m.trailing_zeros() as usize + 1);
        m &= m - 1;
    }
    out
}

fn format_subset(mask: u32) -> String {
    let parts: Vec<String> = subset_to_vec(mask).iter().map(|p| p.to_string()).collect();
    format!("{{{}}}", parts.join(","))
}

/// A monomial of `S`: a multiset of nonempty subsets of `[n]` forming a
/// chain under inclusion, stored largest subset first.
///
/// Chains have strictly decreasing cardinalities, so the factor list is
/// unique; products whose factors do not nest are the zero element and are
/// never stored.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ChainMonomial {
    n: usize,
    /// (subset mask, multiplicity), sorted by decreasing cardinality.
    factors: Vec<(u32, u16)>,
}

impl ChainMonomial {
    pub fn one(n: usize) -> Self {
        ChainMonomial { n, factors: vec![] }
    }

    /// Builds from a factor multiset; `None` when the subsets do not form a
    /// chain (the zero element of `S`).
    pub fn new(n: usize, factors: &[(u32, u16)]) -> Option<Self> {
        let full: u32 = if n == 32 { u32::MAX } else { (1 << n) - 1 };
        let mut merged: BTreeMap<u32, u16> = BTreeMap::new();
        for &(mask, exp) in factors {
            if exp == 0 {
                continue;
            }
            if mask == 0 || (mask & !full) != 0 {
                return None;
            }
            *merged.entry(mask).or_insert(0) += exp;
        }
        let mut list: Vec<(u32, u16)> = merged.into_iter().collect();
        list.sort_by(|a, b| {
            b.0.count_ones()
                .cmp(&a.0.count_ones())
                .then_with(|| a.0.cmp(&b.0))
        });
        for w in list.windows(2) {
            let (big, small) = (w[0].0, w[1].0);
            if big == small || (big & small) != small {
                return None;
            }
        }
        Some(ChainMonomial { n, factors: list })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn factors(&self) -> &[(u32, u16)] {
        &self.factors
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn total_degree(&self) -> u32 {
        self.factors
            .iter()
            .map(|&(m, e)| m.count_ones() * e as u32)
            .sum()
    }

    /// Relabels every subset through the permutation.
    pub fn act(&self, p: &Permutation) -> ChainMonomial {
        let mut factors: Vec<(u32, u16)> = self
            .factors
            .iter()
            .map(|&(m, e)| (p.apply_mask(m), e))
            .collect();
        factors.sort_by(|a, b| {
            b.0.count_ones()
                .cmp(&a.0.count_ones())
                .then_with(|| a.0.cmp(&b.0))
        });
        ChainMonomial {
            n: self.n,
            factors,
        }
    }

    /// Product in `S`; `None` is the zero element.
    pub fn multiply(&self, other: &ChainMonomial) -> Option<ChainMonomial> {
        debug_assert_eq!(self.n, other.n);
        let mut all = self.factors.clone();
        all.extend_from_slice(&other.factors);
        ChainMonomial::new(self.n, &all)
    }

    /// Multiplicity of each rank `1..n` among the factors.
    pub fn fine_grade(&self) -> FineGrade {
        let mut counts = vec![0u16; self.n];
        for &(mask, exp) in &self.factors {
            counts[mask.count_ones() as usize - 1] += exp;
        }
        FineGrade(counts)
    }
}

impl Ord for ChainMonomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| self.factors.cmp(&other.factors))
    }
}
impl PartialOrd for ChainMonomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ChainMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        // Smallest subset first, matching the y{2}*y{1,2}^2 text form.
        let mut first = true;
        for &(mask, exp) in self.factors.iter().rev() {
            if !first {
                write!(f, "*")?;
            }
            first = false;
            write!(f, "y{}", format_subset(mask))?;
            if exp > 1 {
                write!(f, "^{exp}")?;
            }
        }
        Ok(())
    }
}

impl Serialize for ChainMonomial {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Factor {
            subset: Vec<usize>,
            exp: u16,
        }
        let mut seq = serializer.serialize_seq(Some(self.factors.len()))?;
        for &(mask, exp) in self.factors.iter().rev() {
            seq.serialize_element(&Factor {
                subset: subset_to_vec(mask),
                exp,
            })?;
        }
        seq.end()
    }
}

/// Multiplicity vector of the ranks `1..n`; read as a partition it is the
/// conjugate of the shape of the Garsia image.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct FineGrade(pub Vec<u16>);

impl FineGrade {
    pub fn total_degree(&self) -> u32 {
        self.0
            .iter()
            .enumerate()
            .map(|(i, &e)| (i as u32 + 1) * e as u32)
            .sum()
    }
}

/// A sparse element of `S` with exact coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SPolynomial {
    n: usize,
    domain: Domain,
    terms: BTreeMap<ChainMonomial, Coeff>,
}

impl SPolynomial {
    pub fn zero(n: usize, domain: Domain) -> Self {
        SPolynomial {
            n,
            domain,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(n: usize, domain: Domain) -> Self {
        let mut p = SPolynomial::zero(n, domain);
        p.add_term(ChainMonomial::one(n), domain.one());
        p
    }

    pub fn from_monomial(m: ChainMonomial, domain: Domain) -> Self {
        let mut p = SPolynomial::zero(m.n(), domain);
        p.add_term(m, domain.one());
        p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&ChainMonomial, &Coeff)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &ChainMonomial) -> Coeff {
        self.terms.get(m).cloned().unwrap_or_else(|| self.domain.zero())
    }

    pub fn add_term(&mut self, m: ChainMonomial, c: Coeff) {
        let d = self.domain;
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                if !d.is_zero(&c) {
                    e.insert(c);
                }
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = d.add(e.get(), &c);
                if d.is_zero(&sum) {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &SPolynomial) -> SPolynomial {
        assert_eq!(self.domain, other.domain, "domain mismatch");
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> SPolynomial {
        let mut out = SPolynomial::zero(self.n, self.domain);
        for (m, c) in &self.terms {
            out.terms.insert(m.clone(), self.domain.neg(c));
        }
        out
    }

    pub fn sub(&self, other: &SPolynomial) -> SPolynomial {
        self.add(&other.neg())
    }

    /// Ring product; vanishing chain products are dropped silently.
    pub fn mul(&self, other: &SPolynomial) -> SPolynomial {
        assert_eq!(self.domain, other.domain, "domain mismatch");
        let mut out = SPolynomial::zero(self.n, self.domain);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                if let Some(m) = m1.multiply(m2) {
                    out.add_term(m, self.domain.mul(c1, c2));
                }
            }
        }
        out
    }

    pub fn scale(&self, c: &Coeff) -> SPolynomial {
        let mut out = SPolynomial::zero(self.n, self.domain);
        if self.domain.is_zero(c) {
            return out;
        }
        for (m, c1) in &self.terms {
            out.add_term(m.clone(), self.domain.mul(c1, c));
        }
        out
    }

    pub fn act(&self, p: &Permutation) -> SPolynomial {
        let mut out = SPolynomial::zero(self.n, self.domain);
        for (m, c) in &self.terms {
            out.terms.insert(m.act(p), c.clone());
        }
        out
    }

    pub fn is_invariant_under(&self, group: &PermutationGroup) -> bool {
        group.generators().iter().all(|g| self.act(g) == *self)
    }

    /// True when all terms share one fine grade.
    pub fn is_finely_homogeneous(&self) -> bool {
        let mut grades = self.terms.keys().map(|m| m.fine_grade());
        match grades.next() {
            None => true,
            Some(first) => grades.all(|g| g == first),
        }
    }
}

impl fmt::Display for SPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            let cs = c.to_string();
            let (sign, abs) = match cs.strip_prefix('-') {
                Some(rest) => ("-", rest.to_string()),
                None => ("+", cs),
            };
            if first {
                if sign == "-" {
                    write!(f, "-")?;
                }
                first = false;
            } else {
                write!(f, " {} ", if sign == "-" { "-" } else { "+" })?;
            }
            if m.is_one() {
                write!(f, "{abs}")?;
            } else {
                if abs != "1" {
                    write!(f, "{abs}*")?;
                }
                write!(f, "{m}")?;
            }
        }
        Ok(())
    }
}

/// The Garsia map on monomials: `y_U ↦ Π_{j∈U} x_j`, extended
/// multiplicatively.
pub fn garsia(m: &ChainMonomial) -> Monomial {
    let mut exps = vec![0u16; m.n()];
    for &(mask, exp) in m.factors() {
        let mut bits = mask;
        while bits != 0 {
            let i = bits.trailing_zeros() as usize;
            exps[i] += exp;
            bits &= bits - 1;
        }
    }
    Monomial(exps)
}

/// Inverse of the Garsia map: reads the exponent vector as a stack of
/// nested level sets `{i : e_i ≥ v}`, one factor per distinct positive
/// exponent value `v`, with multiplicity the gap to the level below.
pub fn garsia_inverse(m: &Monomial) -> ChainMonomial {
    let n = m.num_vars();
    let mut levels: Vec<u16> = m.0.iter().copied().filter(|&e| e > 0).collect();
    levels.sort_unstable();
    levels.dedup();
    let mut factors: Vec<(u32, u16)> = Vec::new();
    let mut below = 0u16;
    for &level in &levels {
        let mask: u32 = (0..n)
            .filter(|&i| m.0[i] >= level)
            .fold(0, |acc, i| acc | (1 << i));
        factors.push((mask, level - below));
        below = level;
    }
    ChainMonomial::new(n, &factors).expect("nested level sets always form a chain")
}

/// Linear extension of the Garsia map to `S → R`.
pub fn garsia_poly(f: &SPolynomial) -> Polynomial {
    let mut out = Polynomial::zero(f.n(), f.domain());
    for (m, c) in f.terms() {
        out.add_term(garsia(m), c.clone());
    }
    out
}

/// Linear extension of the inverse Garsia map to `R → S`.
pub fn garsia_inverse_poly(f: &Polynomial) -> SPolynomial {
    let mut out = SPolynomial::zero(f.num_vars(), f.domain());
    for (m, c) in f.terms() {
        out.add_term(garsia_inverse(m), c.clone());
    }
    out
}

/// The rank-row sum `θ_i = Σ_{|U|=i} y_U`.
pub fn theta(n: usize, i: usize, domain: Domain) -> Result<SPolynomial, SrError> {
    if i < 1 || i > n {
        return Err(SrError::IndexOutOfRange(i, n));
    }
    let mut out = SPolynomial::zero(n, domain);
    let full: u32 = if n == 32 { u32::MAX } else { (1 << n) - 1 };
    for mask in 1..=full {
        if mask.count_ones() as usize == i {
            out.add_term(
                ChainMonomial::new(n, &[(mask, 1)]).unwrap(),
                domain.one(),
            );
        }
    }
    Ok(out)
}

/// Product of `θ_i^{a_i}` for an exponent vector `a`.
pub fn theta_product(n: usize, exps: &[u16], domain: Domain) -> SPolynomial {
    let mut out = SPolynomial::one(n, domain);
    for (i, &e) in exps.iter().enumerate() {
        for _ in 0..e {
            out = out.mul(&theta(n, i + 1, domain).unwrap());
        }
    }
    out
}

/// Sum of the distinct chain monomials in the `G`-orbit of `m`.
pub fn s_orbit_monomial(group: &PermutationGroup, m: &ChainMonomial, domain: Domain) -> SPolynomial {
    let orb = orbit(group, m.clone(), |g, x| x.act(g));
    let mut out = SPolynomial::zero(m.n(), domain);
    for x in orb {
        out.add_term(x, domain.one());
    }
    out
}

/// Writes a full `S_n`-orbit monomial as a product of rank-row sums,
/// returning the exponent vector `(a_1,…,a_n)` with `Π θ_i^{a_i}` equal to
/// the input. Verified by expansion.
pub fn s_orbit_to_theta(f: &SPolynomial) -> Result<Vec<u16>, SrError> {
    let n = f.n();
    let exps = match f.terms().next() {
        None => return Err(SrError::NotAnOrbitMonomial),
        Some((m, _)) => m.fine_grade().0,
    };
    let expanded = theta_product(n, &exps, f.domain());
    if &expanded == f {
        Ok(exps)
    } else {
        Err(SrError::NotAnOrbitMonomial)
    }
}
