//! Sparse exact multivariate polynomials over `ℤ`, `ℚ`, and `𝔽_p`, with the
//! shape machinery (partitions of exponent vectors, deglex order, stacking
//! up), orbit monomials, elementary symmetric polynomials, special monomials,
//! and representation of symmetric polynomials in the elementary ones.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::permgrp::{orbit, Permutation, PermutationGroup};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PolyError {
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("index {0} out of range 1..={1}")]
    IndexOutOfRange(usize, usize),
    #[error("polynomial is not symmetric")]
    NotSymmetric,
    #[error("coefficient domains differ")]
    DomainMismatch,
    #[error("parse error at position {pos}: {msg}")]
    ParseError { pos: usize, msg: String },
    #[error("non-integer coefficient in integer mode")]
    NonIntegerCoefficientInZMode,
    #[error("{0} is not prime")]
    NotPrime(u64),
}

/// Coefficient domain tag: `ℤ`, `ℚ`, or `𝔽_p` with `p` prime below `2^31`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Int,
    Rat,
    Fp(u64),
}

impl Domain {
    pub fn fp(p: u64) -> Result<Domain, PolyError> {
        if !(2..(1 << 31)).contains(&p) || !is_prime(p) {
            return Err(PolyError::NotPrime(p));
        }
        Ok(Domain::Fp(p))
    }

    pub fn from_int(&self, v: i64) -> Coeff {
        match self {
            Domain::Int => Coeff::Int(BigInt::from(v)),
            Domain::Rat => Coeff::Rat(BigRational::from_integer(BigInt::from(v))),
            Domain::Fp(p) => Coeff::Fp(v.rem_euclid(*p as i64) as u64),
        }
    }

    pub fn from_bigint(&self, v: &BigInt) -> Coeff {
        match self {
            Domain::Int => Coeff::Int(v.clone()),
            Domain::Rat => Coeff::Rat(BigRational::from_integer(v.clone())),
            Domain::Fp(p) => {
                let m = v % BigInt::from(*p);
                let m = if m.is_negative() { m + BigInt::from(*p) } else { m };
                Coeff::Fp(u64::try_from(m).unwrap())
            }
        }
    }

    pub fn zero(&self) -> Coeff {
        self.from_int(0)
    }

    pub fn one(&self) -> Coeff {
        self.from_int(1)
    }

    pub fn add(&self, a: &Coeff, b: &Coeff) -> Coeff {
        match (self, a, b) {
            (Domain::Int, Coeff::Int(x), Coeff::Int(y)) => Coeff::Int(x + y),
            (Domain::Rat, Coeff::Rat(x), Coeff::Rat(y)) => Coeff::Rat(x + y),
            (Domain::Fp(p), Coeff::Fp(x), Coeff::Fp(y)) => Coeff::Fp((x + y) % p),
            _ => panic!("coefficient does not match domain"),
        }
    }

    pub fn mul(&self, a: &Coeff, b: &Coeff) -> Coeff {
        match (self, a, b) {
            (Domain::Int, Coeff::Int(x), Coeff::Int(y)) => Coeff::Int(x * y),
            (Domain::Rat, Coeff::Rat(x), Coeff::Rat(y)) => Coeff::Rat(x * y),
            (Domain::Fp(p), Coeff::Fp(x), Coeff::Fp(y)) => Coeff::Fp((x * y) % p),
            _ => panic!("coefficient does not match domain"),
        }
    }

    pub fn neg(&self, a: &Coeff) -> Coeff {
        match (self, a) {
            (Domain::Int, Coeff::Int(x)) => Coeff::Int(-x),
            (Domain::Rat, Coeff::Rat(x)) => Coeff::Rat(-x),
            (Domain::Fp(p), Coeff::Fp(x)) => Coeff::Fp(if *x == 0 { 0 } else { p - x }),
            _ => panic!("coefficient does not match domain"),
        }
    }

    pub fn is_zero(&self, a: &Coeff) -> bool {
        match a {
            Coeff::Int(x) => x.is_zero(),
            Coeff::Rat(x) => x.is_zero(),
            Coeff::Fp(x) => *x == 0,
        }
    }
}

/// An exact coefficient in one of the three supported domains.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Coeff {
    Int(BigInt),
    Rat(BigRational),
    Fp(u64),
}

impl fmt::Display for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coeff::Int(x) => write!(f, "{x}"),
            Coeff::Rat(x) => write!(f, "{x}"),
            Coeff::Fp(x) => write!(f, "{x}"),
        }
    }
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// An exponent vector; `exponents[i]` is the power of the `i`th variable.
///
/// Ordered by graded lexicographic comparison, so maps keyed by monomials
/// iterate deterministically.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<u16>);

impl Monomial {
    pub fn one(n: usize) -> Self {
        Monomial(vec![0; n])
    }

    pub fn variable(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        Monomial(e)
    }

    pub fn num_vars(&self) -> usize {
        self.0.len()
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    /// Sends `x_i` to `x_{p(i)}`.
    pub fn act(&self, p: &Permutation) -> Monomial {
        let mut e = vec![0u16; self.0.len()];
        for (i, &v) in self.0.iter().enumerate() {
            e[p.apply(i)] = v;
        }
        Monomial(e)
    }

    /// The partition of the total degree formed by the exponents.
    pub fn shape(&self) -> Shape {
        let mut parts = self.0.clone();
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Shape(parts)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}
impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A partition with weakly decreasing parts, kept at fixed length `n`
/// (trailing zeros included) so that addition and comparison are unambiguous.
///
/// The `Ord` instance is the degree lexicographic order: total degree first,
/// then leftmost differing part.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Shape(pub Vec<u16>);

impl Shape {
    pub fn total(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn add(&self, other: &Shape) -> Result<Shape, PolyError> {
        if self.0.len() != other.0.len() {
            return Err(PolyError::LengthMismatch(self.0.len(), other.0.len()));
        }
        Ok(Shape(
            self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect(),
        ))
    }

    /// The conjugate partition, also padded to length `new_len`.
    pub fn conjugate(&self, new_len: usize) -> Vec<u16> {
        let mut out = vec![0u16; new_len];
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = self.0.iter().filter(|&&p| p as usize > k).count() as u16;
        }
        out
    }
}

impl Ord for Shape {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total()
            .cmp(&other.total())
            .then_with(|| self.0.cmp(&other.0))
    }
}
impl PartialOrd for Shape {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Degree lexicographic comparison of equal-length shapes: total degree
/// first, then leftmost differing part.
pub fn deglex_compare(a: &Shape, b: &Shape) -> Result<Ordering, PolyError> {
    if a.0.len() != b.0.len() {
        return Err(PolyError::LengthMismatch(a.0.len(), b.0.len()));
    }
    Ok(a.cmp(b))
}

/// True when the shapes add under multiplication: there is a common index
/// maximizing both exponent vectors, a common index maximizing both among
/// the rest, and so on.
pub fn stacks_up(m: &Monomial, m2: &Monomial) -> bool {
    debug_assert_eq!(m.num_vars(), m2.num_vars());
    let product_shape = m.mul(m2).shape();
    let sum = m.shape().add(&m2.shape()).expect("equal lengths");
    product_shape == sum
}

/// A sparse polynomial with a coefficient domain tag.
///
/// Terms are kept in a map ordered graded-lexicographically by exponent
/// vector; no zero coefficients are stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial {
    domain: Domain,
    num_vars: usize,
    terms: BTreeMap<Monomial, Coeff>,
}

impl Polynomial {
    pub fn zero(n: usize, domain: Domain) -> Self {
        Polynomial {
            domain,
            num_vars: n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, domain: Domain, c: i64) -> Self {
        let mut p = Polynomial::zero(n, domain);
        p.add_term(Monomial::one(n), domain.from_int(c));
        p
    }

    pub fn one(n: usize, domain: Domain) -> Self {
        Polynomial::constant(n, domain, 1)
    }

    pub fn monomial(n: usize, domain: Domain, m: Monomial, c: i64) -> Self {
        let mut p = Polynomial::zero(n, domain);
        p.add_term(m, domain.from_int(c));
        p
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Coeff)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, m: &Monomial) -> Coeff {
        self.terms.get(m).cloned().unwrap_or_else(|| self.domain.zero())
    }

    pub fn add_term(&mut self, m: Monomial, c: Coeff) {
        debug_assert_eq!(m.num_vars(), self.num_vars);
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

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        assert_eq!(self.domain, other.domain, "domain mismatch");
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Polynomial {
        let mut out = Polynomial::zero(self.num_vars, self.domain);
        for (m, c) in &self.terms {
            out.terms.insert(m.clone(), self.domain.neg(c));
        }
        out
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        assert_eq!(self.domain, other.domain, "domain mismatch");
        let mut out = Polynomial::zero(self.num_vars, self.domain);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), self.domain.mul(c1, c2));
            }
        }
        out
    }

    pub fn scale(&self, c: &Coeff) -> Polynomial {
        let mut out = Polynomial::zero(self.num_vars, self.domain);
        if self.domain.is_zero(c) {
            return out;
        }
        for (m, c1) in &self.terms {
            out.add_term(m.clone(), self.domain.mul(c1, c));
        }
        out
    }

    pub fn pow(&self, e: u32) -> Polynomial {
        let mut out = Polynomial::one(self.num_vars, self.domain);
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// Permutes the variables: `x_i ↦ x_{p(i)}`.
    pub fn act(&self, p: &Permutation) -> Result<Polynomial, PolyError> {
        if p.degree() != self.num_vars {
            return Err(PolyError::DegreeMismatch(p.degree(), self.num_vars));
        }
        let mut out = Polynomial::zero(self.num_vars, self.domain);
        for (m, c) in &self.terms {
            out.terms.insert(m.act(p), c.clone());
        }
        Ok(out)
    }

    pub fn is_invariant_under(&self, group: &PermutationGroup) -> bool {
        group
            .generators()
            .iter()
            .all(|g| self.act(g).is_ok_and(|h| h == *self))
    }

    /// The deglex-greatest shape among the terms.
    pub fn leading_shape(&self) -> Option<Shape> {
        self.terms.keys().map(|m| m.shape()).max()
    }

    /// Substitutes the given polynomials for the variables.
    pub fn substitute(&self, values: &[Polynomial]) -> Polynomial {
        assert_eq!(values.len(), self.num_vars);
        let target_vars = values.first().map_or(self.num_vars, |p| p.num_vars);
        let mut out = Polynomial::zero(target_vars, self.domain);
        for (m, c) in &self.terms {
            let mut prod = Polynomial::one(target_vars, self.domain);
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    prod = prod.mul(&values[i].pow(e as u32));
                }
            }
            out = out.add(&prod.scale(c));
        }
        out
    }

    /// Renders with the given variable prefix, highest terms first.
    pub fn to_string_with(&self, var: &str) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (m, c) in self.terms.iter().rev() {
            let cs = c.to_string();
            let (sign, abs) = match cs.strip_prefix('-') {
                Some(rest) => ("-", rest.to_string()),
                None => ("+", cs),
            };
            if out.is_empty() {
                if sign == "-" {
                    out.push('-');
                }
            } else {
                out.push_str(if sign == "-" { " - " } else { " + " });
            }
            let vars: Vec<String> = m
                .0
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| {
                    if e == 1 {
                        format!("{var}{}", i + 1)
                    } else {
                        format!("{var}{}^{e}", i + 1)
                    }
                })
                .collect();
            if vars.is_empty() {
                out.push_str(&abs);
            } else {
                if abs != "1" {
                    out.push_str(&abs);
                    out.push('*');
                }
                out.push_str(&vars.join("*"));
            }
        }
        out
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_string_with("x"))
    }
}

/// Sum of the distinct monomials in the `G`-orbit of `m`, each with
/// coefficient 1.
pub fn orbit_monomial(
    group: &PermutationGroup,
    m: &Monomial,
    domain: Domain,
) -> Result<Polynomial, PolyError> {
    if group.degree() != m.num_vars() {
        return Err(PolyError::DegreeMismatch(group.degree(), m.num_vars()));
    }
    let orb = orbit(group, m.clone(), |g, x| x.act(g));
    let mut out = Polynomial::zero(m.num_vars(), domain);
    for x in orb {
        out.add_term(x, domain.one());
    }
    Ok(out)
}

/// The `i`th elementary symmetric polynomial in `n` variables.
pub fn elementary_symmetric(n: usize, i: usize, domain: Domain) -> Result<Polynomial, PolyError> {
    if i < 1 || i > n {
        return Err(PolyError::IndexOutOfRange(i, n));
    }
    let mut out = Polynomial::zero(n, domain);
    // All i-subsets of the variables.
    let mut subset: Vec<usize> = (0..i).collect();
    loop {
        let mut e = vec![0u16; n];
        for &j in &subset {
            e[j] = 1;
        }
        out.add_term(Monomial(e), domain.one());
        // Next combination.
        let mut k = i;
        loop {
            if k == 0 {
                return Ok(out);
            }
            k -= 1;
            if subset[k] != k + n - i {
                break;
            }
        }
        subset[k] += 1;
        for j in k + 1..i {
            subset[j] = subset[j - 1] + 1;
        }
    }
}

/// Result of splitting a monomial into an associated special monomial and
/// the elementary-symmetric multipliers needed to rebuild its shape.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecialDecomposition {
    pub is_special: bool,
    pub associated_special: Monomial,
    pub sigma_exponents: Vec<u16>,
}

/// A monomial is special when its shape `λ` has `λ_n = 0` and consecutive
/// differences at most 1. Otherwise the associated special monomial keeps
/// the same relative order of exponents while each `σ_i` multiplier absorbs
/// one full layer of the shape.
#[allow(clippy::needless_range_loop)]
pub fn special_decompose(m: &Monomial) -> SpecialDecomposition {
    let n = m.num_vars();
    let shape = m.shape();
    let mut sigma = vec![0u16; n];
    let mut special = true;
    for i in 0..n {
        let diff = if i + 1 < n {
            shape.0[i] - shape.0[i + 1]
        } else {
            shape.0[i]
        };
        let keep: u16 = if i + 1 < n && diff >= 1 { 1 } else { 0 };
        if diff > keep {
            special = false;
        }
        sigma[i] = diff - keep;
    }
    if special {
        return SpecialDecomposition {
            is_special: true,
            associated_special: m.clone(),
            sigma_exponents: vec![0; n],
        };
    }
    // Remove sigma[i] from the first i+1 largest exponents, preserving the
    // positions of the ranking.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| m.0[b].cmp(&m.0[a]).then(a.cmp(&b)));
    let mut removed = vec![0u16; n];
    let mut acc = 0u16;
    for i in (0..n).rev() {
        acc += sigma[i];
        removed[i] = acc;
    }
    let mut exps = vec![0u16; n];
    for (rank, &var) in order.iter().enumerate() {
        exps[var] = m.0[var] - removed[rank];
    }
    SpecialDecomposition {
        is_special: false,
        associated_special: Monomial(exps),
        sigma_exponents: sigma,
    }
}

/// Writes a symmetric polynomial as a polynomial in the elementary symmetric
/// polynomials, working down one shape layer at a time. The result is exact:
/// substituting `σ_1..σ_n` reproduces the input.
pub fn ftsp_represent(f: &Polynomial) -> Result<Polynomial, PolyError> {
    let n = f.num_vars();
    let sn = PermutationGroup::symmetric(n);
    if !f.is_invariant_under(&sn) {
        return Err(PolyError::NotSymmetric);
    }
    let domain = f.domain();
    let sigmas: Vec<Polynomial> = (1..=n)
        .map(|i| elementary_symmetric(n, i, domain).unwrap())
        .collect();
    let mut result = Polynomial::zero(n, domain);
    let mut remainder = f.clone();
    while let Some(shape) = remainder.leading_shape() {
        // The leading layer is a single S_n-orbit; read its coefficient off
        // the sorted representative.
        let rep = Monomial(shape.0.clone());
        let c = remainder.coefficient(&rep);
        debug_assert!(!domain.is_zero(&c));
        let mut theta_exps = vec![0u16; n];
        for (i, slot) in theta_exps.iter_mut().enumerate() {
            *slot = if i + 1 < n {
                shape.0[i] - shape.0[i + 1]
            } else {
                shape.0[i]
            };
        }
        result.add_term(Monomial(theta_exps.clone()), c.clone());
        let mut prod = Polynomial::one(n, domain);
        for (i, &e) in theta_exps.iter().enumerate() {
            if e > 0 {
                prod = prod.mul(&sigmas[i].pow(e as u32));
            }
        }
        let next = remainder.sub(&prod.scale(&c));
        debug_assert!(next.leading_shape().is_none_or(|s| s < shape));
        remainder = next;
    }
    Ok(result)
}

/// Parses expressions like `x1^2*x2 + 3*x2*x3 - x4` over the given domain.
/// Rational literals `a/b` are accepted only in `ℚ` mode.
pub fn parse_polynomial(expr: &str, degree: usize, domain: Domain) -> Result<Polynomial, PolyError> {
    Parser {
        bytes: expr.as_bytes(),
        pos: 0,
        degree,
        domain,
    }
    .parse()
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
    degree: usize,
    domain: Domain,
}

impl<'a> Parser<'a> {
    fn error(&self, msg: impl Into<String>) -> PolyError {
        PolyError::ParseError {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn parse(mut self) -> Result<Polynomial, PolyError> {
        let p = self.parse_expr()?;
        if self.peek().is_some() {
            return Err(self.error("trailing input"));
        }
        Ok(p)
    }

    fn parse_expr(&mut self) -> Result<Polynomial, PolyError> {
        let mut negated = false;
        if let Some(c) = self.peek() {
            if c == b'+' || c == b'-' {
                self.pos += 1;
                negated = c == b'-';
            }
        }
        let first = self.parse_term()?;
        let mut acc = if negated { first.neg() } else { first };
        while let Some(c) = self.peek() {
            match c {
                b'+' => {
                    self.pos += 1;
                    let t = self.parse_term()?;
                    acc = acc.add(&t);
                }
                b'-' => {
                    self.pos += 1;
                    let t = self.parse_term()?;
                    acc = acc.sub(&t);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn parse_term(&mut self) -> Result<Polynomial, PolyError> {
        let mut acc = self.parse_factor()?;
        while let Some(b'*') = self.peek() {
            self.pos += 1;
            let f = self.parse_factor()?;
            acc = acc.mul(&f);
        }
        Ok(acc)
    }

    fn parse_factor(&mut self) -> Result<Polynomial, PolyError> {
        let base = self.parse_atom()?;
        if let Some(b'^') = self.peek() {
            self.pos += 1;
            let e = self.parse_uint()?;
            return Ok(base.pow(e as u32));
        }
        Ok(base)
    }

    fn parse_uint(&mut self) -> Result<u64, PolyError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.error("expected a number"));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| self.error("number too large"))
    }

    fn parse_atom(&mut self) -> Result<Polynomial, PolyError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.parse_expr()?;
                match self.peek() {
                    Some(b')') => {
                        self.pos += 1;
                        Ok(inner)
                    }
                    _ => Err(self.error("expected ')'")),
                }
            }
            Some(b'x') => {
                self.pos += 1;
                let k = self.parse_uint()? as usize;
                if k < 1 || k > self.degree {
                    return Err(self.error(format!(
                        "variable x{k} out of range for degree {}",
                        self.degree
                    )));
                }
                Ok(Polynomial::monomial(
                    self.degree,
                    self.domain,
                    Monomial::variable(self.degree, k - 1),
                    1,
                ))
            }
            Some(b'-') => {
                self.pos += 1;
                Ok(self.parse_atom()?.neg())
            }
            Some(c) if c.is_ascii_digit() => {
                let num = self.parse_uint()?;
                let mut coeff = self.domain.from_bigint(&BigInt::from(num));
                if let Some(b'/') = self.peek() {
                    if self.domain != Domain::Rat {
                        return Err(PolyError::NonIntegerCoefficientInZMode);
                    }
                    self.pos += 1;
                    let den = self.parse_uint()?;
                    if den == 0 {
                        return Err(self.error("zero denominator"));
                    }
                    coeff = Coeff::Rat(BigRational::new(BigInt::from(num), BigInt::from(den)));
                }
                let mut p = Polynomial::zero(self.degree, self.domain);
                p.add_term(Monomial::one(self.degree), coeff);
                Ok(p)
            }
            Some(c) => Err(self.error(format!("unexpected character '{}'", c as char))),
            None => Err(self.error("unexpected end of input")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::permgrp::parse_group;

    fn z() -> Domain {
        Domain::Int
    }

    fn poly(s: &str, n: usize) -> Polynomial {
        parse_polynomial(s, n, z()).unwrap()
    }

    #[test]
    fn act_examples() {
        let swap = Permutation::from_cycles(2, &[vec![1, 2]]).unwrap();
        assert_eq!(poly("x1^2*x2", 2).act(&swap).unwrap(), poly("x1*x2^2", 2));

        let id = Permutation::identity(3);
        let f = poly("x1 + 2*x2", 3);
        assert_eq!(f.act(&id).unwrap(), f);

        let rot = Permutation::from_cycles(3, &[vec![1, 2, 3]]).unwrap();
        assert_eq!(f.act(&rot).unwrap(), poly("x2 + 2*x3", 3));
    }

    #[test]
    fn shape_examples() {
        assert_eq!(poly("x1^3*x2^4*x3", 3).leading_shape().unwrap().0, vec![4, 3, 1]);
        assert_eq!(Monomial::one(4).shape().0, vec![0, 0, 0, 0]);
        assert_eq!(Monomial(vec![0, 2, 0]).shape().0, vec![2, 0, 0]);
    }

    #[test]
    fn deglex_examples() {
        assert!(Shape(vec![2, 1, 0]) > Shape(vec![1, 1, 1]));
        assert!(Shape(vec![3, 0]) < Shape(vec![2, 2]));
        assert_eq!(Shape(vec![2, 1]).cmp(&Shape(vec![2, 1])), Ordering::Equal);
        assert_eq!(
            deglex_compare(&Shape(vec![2, 1, 0]), &Shape(vec![1, 1, 1])),
            Ok(Ordering::Greater)
        );
        assert_eq!(
            deglex_compare(&Shape(vec![2, 1]), &Shape(vec![1, 1, 1])),
            Err(PolyError::LengthMismatch(2, 3))
        );
    }

    #[test]
    fn stacking_examples() {
        let a = Monomial(vec![2, 3, 1]);
        assert!(stacks_up(&a, &Monomial(vec![1, 2, 0])));
        assert!(stacks_up(&a, &Monomial(vec![1, 1, 0])));
        assert!(!stacks_up(&a, &Monomial(vec![2, 1, 0])));
        assert!(stacks_up(&a, &Monomial(vec![0, 0, 0])));
    }

    /// Direct greedy test from the definition: repeatedly find a common
    /// index maximizing both exponent vectors among the remaining indices.
    fn stacks_up_by_definition(m: &Monomial, m2: &Monomial) -> bool {
        let mut remaining: Vec<usize> = (0..m.num_vars()).collect();
        while !remaining.is_empty() {
            let max_a = remaining.iter().map(|&i| m.0[i]).max().unwrap();
            let max_b = remaining.iter().map(|&i| m2.0[i]).max().unwrap();
            match remaining
                .iter()
                .position(|&i| m.0[i] == max_a && m2.0[i] == max_b)
            {
                Some(k) => {
                    remaining.remove(k);
                }
                None => return false,
            }
        }
        true
    }

    #[test]
    fn stacking_matches_definition_and_deglex_drop() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let n = rng.gen_range(1..=5);
            let rand_mono = |rng: &mut rand_chacha::ChaCha8Rng| {
                Monomial((0..n).map(|_| rng.gen_range(0..=3u16)).collect())
            };
            let a = rand_mono(&mut rng);
            let b = rand_mono(&mut rng);
            let stacked = stacks_up(&a, &b);
            assert_eq!(stacked, stacks_up_by_definition(&a, &b));
            let product = a.mul(&b).shape();
            let sum = a.shape().add(&b.shape()).unwrap();
            if stacked {
                assert_eq!(product, sum);
            } else {
                assert!(product < sum);
            }
        }
    }

    #[test]
    fn product_respects_shape_filtration() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        for _ in 0..200 {
            let n = rng.gen_range(2..=4usize);
            let rand_mono = |rng: &mut rand_chacha::ChaCha8Rng| {
                Monomial((0..n).map(|_| rng.gen_range(0..=3u16)).collect())
            };
            // f and g each span a single fixed shape.
            let a = rand_mono(&mut rng);
            let b = rand_mono(&mut rng);
            let bound = a.shape().add(&b.shape()).unwrap();
            let sn = PermutationGroup::symmetric(n);
            let f = orbit_monomial(&sn, &a, z()).unwrap();
            let g = orbit_monomial(&sn, &b, z()).unwrap();
            for (m, _) in f.mul(&g).terms() {
                assert!(m.shape() <= bound);
            }
        }
    }

    #[test]
    fn orbit_monomial_examples() {
        let c3 = parse_group("(1,2,3)", 3).unwrap();
        let f = orbit_monomial(&c3, &Monomial(vec![2, 1, 0]), z()).unwrap();
        assert_eq!(f, poly("x1^2*x2 + x2^2*x3 + x3^2*x1", 3));

        let s3 = PermutationGroup::symmetric(3);
        let f = orbit_monomial(&s3, &Monomial::variable(3, 0), z()).unwrap();
        assert_eq!(f, elementary_symmetric(3, 1, z()).unwrap());

        let c4 = parse_group("(1,2,3,4)", 4).unwrap();
        let f = orbit_monomial(&c4, &Monomial(vec![1, 1, 0, 0]), z()).unwrap();
        assert_eq!(f, poly("x1*x2 + x2*x3 + x3*x4 + x1*x4", 4));

        let d4 = parse_group("(1,2,3,4)(1,3)", 4).unwrap();
        let f = orbit_monomial(&d4, &Monomial(vec![1, 0, 1, 0]), z()).unwrap();
        assert_eq!(f, poly("x1*x3 + x2*x4", 4));
        for g in d4.generators() {
            assert_eq!(f.act(g).unwrap(), f);
        }
    }

    #[test]
    fn elementary_symmetric_examples() {
        assert_eq!(elementary_symmetric(3, 1, z()).unwrap(), poly("x1+x2+x3", 3));
        assert_eq!(elementary_symmetric(3, 3, z()).unwrap(), poly("x1*x2*x3", 3));
        assert_eq!(elementary_symmetric(4, 2, z()).unwrap().num_terms(), 6);
        assert!(elementary_symmetric(3, 4, z()).is_err());
    }

    #[test]
    fn special_decompose_examples() {
        let d = special_decompose(&Monomial(vec![2, 1, 0]));
        assert!(d.is_special);

        let d = special_decompose(&Monomial(vec![1, 1, 1]));
        assert!(!d.is_special);
        assert_eq!(d.associated_special, Monomial::one(3));
        assert_eq!(d.sigma_exponents, vec![0, 0, 1]);

        let d = special_decompose(&Monomial(vec![2, 0]));
        assert!(!d.is_special);
        assert_eq!(d.associated_special, Monomial(vec![1, 0]));
        assert_eq!(d.sigma_exponents, vec![1, 0]);
    }

    #[test]
    fn special_decompose_rebuilds_shape() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..500 {
            let n = rng.gen_range(1..=5usize);
            let m = Monomial((0..n).map(|_| rng.gen_range(0..=4u16)).collect());
            let d = special_decompose(&m);
            let mut rebuilt = d.associated_special.shape().0;
            for (i, &e) in d.sigma_exponents.iter().enumerate() {
                for slot in rebuilt.iter_mut().take(i + 1) {
                    *slot += e;
                }
            }
            assert_eq!(rebuilt, m.shape().0);
            // The associated special monomial keeps the exponent ranking.
            let dd = special_decompose(&d.associated_special);
            assert!(dd.is_special);
        }
    }

    #[test]
    fn ftsp_examples() {
        let f = poly("x1^2+x2^2+x3^2", 3);
        let rep = ftsp_represent(&f).unwrap();
        assert_eq!(rep.to_string_with("s"), "s1^2 - 2*s2");

        let sigma2 = elementary_symmetric(3, 2, z()).unwrap();
        assert_eq!(ftsp_represent(&sigma2).unwrap().to_string_with("s"), "s2");

        let f = poly("x1^2*x2^2", 2);
        assert_eq!(ftsp_represent(&f).unwrap().to_string_with("s"), "s2^2");

        assert_eq!(ftsp_represent(&poly("x1", 2)), Err(PolyError::NotSymmetric));
    }

    #[test]
    fn ftsp_round_trip_random() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(19);
        for trial in 0..200 {
            let n = rng.gen_range(1..=5usize);
            let domain = if trial % 2 == 0 { z() } else { Domain::Fp(2) };
            let sn = PermutationGroup::symmetric(n);
            let mut f = Polynomial::zero(n, domain);
            for _ in 0..rng.gen_range(1..=3) {
                let m = Monomial((0..n).map(|_| rng.gen_range(0..=3u16)).collect());
                let c = rng.gen_range(-3i64..=3);
                f = f.add(&orbit_monomial(&sn, &m, domain).unwrap().scale(&domain.from_int(c)));
            }
            let rep = ftsp_represent(&f).unwrap();
            let sigmas: Vec<Polynomial> = (1..=n)
                .map(|i| elementary_symmetric(n, i, domain).unwrap())
                .collect();
            assert_eq!(rep.substitute(&sigmas), f);
        }
    }

    #[test]
    fn parser_round_trip() {
        let f = poly("x1^2*x2 + 3*x2*x3 - x4", 4);
        assert_eq!(f.num_terms(), 3);
        let back = parse_polynomial(&f.to_string(), 4, z()).unwrap();
        assert_eq!(back, f);

        assert!(poly("0", 3).is_zero());
        assert_eq!(poly("x1*x3^4", 3).num_terms(), 1);
    }

    #[test]
    fn parser_rejects_rationals_over_z() {
        assert_eq!(
            parse_polynomial("1/2*x1", 2, Domain::Int),
            Err(PolyError::NonIntegerCoefficientInZMode)
        );
        assert!(parse_polynomial("1/2*x1", 2, Domain::Rat).is_ok());
    }

    #[test]
    fn fp_domain_checks_primality() {
        assert!(Domain::fp(7).is_ok());
        assert_eq!(Domain::fp(6), Err(PolyError::NotPrime(6)));
    }
}
