//! Acceptance suite: one test per release criterion, each printing a
//! PASS line (run with `cargo test --test acceptance -- --nocapture`).
//!
//! Everything here is exact arithmetic; there are no tolerances.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use num_bigint::BigUint;
use num_traits::Signed;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use permcm::bases::{
    find_shelling, goebel_decompose, greedy_cell_basis, minimal_generator_count,
    represent_on_basis, shelling_basis, symmetrize, verify_cell_basis, verify_shelling,
    verify_shelling_prefix, BasesError, DEFAULT_SHELLING_BUDGET,
};
use permcm::permgrp::{parse_group, subgroup_classes, PermutationGroup};
use permcm::polyring::{
    elementary_symmetric, orbit_monomial, parse_polynomial, stacks_up, Domain, Monomial,
    Polynomial,
};
use permcm::qcomplex::{
    cross_check_constructions, is_cm_complex, CmCoefficients, QuotientComplex, SigmaPoset,
};
use permcm::srring::{garsia, garsia_inverse, garsia_poly, SPolynomial};

fn z() -> Domain {
    Domain::Int
}

fn d4() -> PermutationGroup {
    parse_group("(1,2,3,4)(1,3)", 4).unwrap()
}

#[test]
fn criterion_1_goebel_golden() {
    let start = Instant::now();
    let a3 = parse_group("(1,2,3)", 3).unwrap();
    let f = symmetrize(&a3, &parse_polynomial("x1*x3^4", 3, z()).unwrap());
    assert_eq!(
        f,
        parse_polynomial("x1^4*x2 + x2^4*x3 + x1*x3^4", 3, z()).unwrap()
    );
    let decomposition = goebel_decompose(&a3, &f).unwrap();

    // Coefficients keyed by the expanded special orbit monomials.
    let by_orbit: BTreeMap<String, String> = decomposition
        .entries
        .iter()
        .map(|(chain, coeff)| {
            let factors: Vec<(u32, u16)> = chain.iter().map(|&m| (m, 1)).collect();
            let special = garsia(&permcm::srring::ChainMonomial::new(3, &factors).unwrap());
            let orbit = orbit_monomial(&a3, &special, z()).unwrap();
            (orbit.to_string(), coeff.to_string_with("s"))
        })
        .collect();
    let expected: BTreeMap<String, String> = [
        ("x1^2*x2 + x2^2*x3 + x1*x3^2", "s1^2 - 2*s2"),
        ("x1^2*x3 + x1*x2^2 + x2*x3^2", "-s2"),
        ("x1*x2 + x1*x3 + x2*x3", "-2*s3"),
        ("x1 + x2 + x3", "s1*s3"),
    ]
    .iter()
    .map(|(k, v)| {
        (
            parse_polynomial(k, 3, z()).unwrap().to_string(),
            v.to_string(),
        )
    })
    .collect();
    assert_eq!(by_orbit, expected);

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!("criterion 1 (Goebel golden decomposition): PASS in {elapsed:?}");
}

#[test]
fn criterion_2_d4_complex_golden() {
    let start = Instant::now();
    let complex = QuotientComplex::build(&d4()).unwrap();
    assert_eq!(complex.num_faces(), 14);
    assert_eq!(complex.facets().len(), 3);

    let by_label: BTreeMap<String, usize> = complex
        .facets()
        .iter()
        .map(|&f| (complex.face(f).label(), f))
        .collect();
    let order = [
        by_label["1^3 2 3^2"],
        by_label["1^3 2^2 3"],
        by_label["1^3 2^2 4"],
    ];
    // The stated facet order is a shelling; swapping the last two facets
    // breaks down immediately after the first.
    let shelling = verify_shelling(&complex, &order).unwrap();
    assert_eq!(
        verify_shelling_prefix(&complex, &[order[0], order[2]]),
        Err(BasesError::InvalidShelling { at: 1 })
    );

    let shelling_faces = shelling_basis(&complex, &shelling);
    let shelling_monomials: BTreeSet<String> = shelling_faces
        .iter()
        .map(|&f| complex.face_to_orbit_monomial(f, z()).to_string())
        .collect();
    let expected_shelling: BTreeSet<String> = [
        "1",
        "x1*x2 + x1*x4 + x2*x3 + x3*x4",
        "x1^2*x2*x4 + x1*x2^2*x3 + x1*x3*x4^2 + x2*x3^2*x4",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    assert_eq!(shelling_monomials, expected_shelling);

    let greedy = greedy_cell_basis(&complex, Domain::Rat).unwrap();
    let greedy_monomials: BTreeSet<String> = greedy
        .faces
        .iter()
        .map(|&f| complex.face_to_orbit_monomial(f, Domain::Rat).to_string())
        .collect();
    // The greedy rational basis is {1, G·x1x3, G·x1²x2x3}.
    let expected_greedy: BTreeSet<String> = [
        Polynomial::one(4, Domain::Rat),
        orbit_monomial(&d4(), &Monomial(vec![1, 0, 1, 0]), Domain::Rat).unwrap(),
        orbit_monomial(&d4(), &Monomial(vec![2, 1, 1, 0]), Domain::Rat).unwrap(),
    ]
    .iter()
    .map(|p| p.to_string())
    .collect();
    assert_eq!(greedy_monomials, expected_greedy);

    // Both incidence determinants are units of ℤ.
    let shelling_report = verify_cell_basis(&complex, &shelling_faces, z()).unwrap();
    assert!(shelling_report.determinant.abs() == num_bigint::BigInt::from(1));
    assert!(greedy.determinant.abs() == num_bigint::BigInt::from(1));

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!("criterion 2 (D4 complex golden values): PASS in {elapsed:?}");
}

#[test]
fn criterion_3_cm_survey_through_degree_5() {
    let start = Instant::now();
    let expected_classes = [1usize, 2, 4, 11, 19];
    for n in 1..=5usize {
        let classes = subgroup_classes(n, 1_000_000).unwrap();
        assert_eq!(classes.len(), expected_classes[n - 1], "degree {n}");
        for group in &classes {
            let report = permcm::bases::cm_report(group, false);
            assert_eq!(
                report.algebraic_cm, report.prediction,
                "degree {n}, group {}",
                group
            );
            assert!(report.agree);
        }
    }
    let elapsed = start.elapsed();
    println!("criterion 3 (CM survey, degrees 1-5): PASS in {elapsed:?}");
}

/// Degree-6 survey; slow, so opt-in.
#[test]
#[ignore]
fn criterion_3_cm_survey_degree_6() {
    let classes = subgroup_classes(6, 1_000_000).unwrap();
    assert_eq!(classes.len(), 56);
    for group in &classes {
        let report = permcm::bases::cm_report(group, false);
        assert!(report.agree, "group {}", group);
    }
    println!("criterion 3 long form (CM survey, degree 6): PASS");
}

#[test]
fn criterion_4_c4_modular_failure() {
    let start = Instant::now();
    let c4 = parse_group("(1,2,3,4)", 4).unwrap();
    let (count, expected) = minimal_generator_count(&c4, 2).unwrap();
    assert_eq!(expected, 6);
    assert!(count > 6, "count was {count}");

    // A six-element special-orbit-monomial basis exists over ℚ.
    let complex = QuotientComplex::build(&c4).unwrap();
    let basis = greedy_cell_basis(&complex, Domain::Rat).unwrap();
    assert_eq!(basis.faces.len(), 6);

    // The known rational basis {1, Gx1x3, Gx1²x2, Gx1²x2x3, Gx1x2²x3,
    // Gx1²x2²x3} also verifies as a cell basis over ℚ.
    let face_of = |m: &[u16]| {
        let chain: Vec<u32> = garsia_inverse(&Monomial(m.to_vec()))
            .factors()
            .iter()
            .map(|&(mask, _)| mask)
            .collect();
        complex.face_of_chain(&chain).unwrap()
    };
    let named_basis = vec![
        face_of(&[0, 0, 0, 0]),
        face_of(&[1, 0, 1, 0]),
        face_of(&[2, 1, 0, 0]),
        face_of(&[2, 1, 1, 0]),
        face_of(&[1, 2, 1, 0]),
        face_of(&[2, 2, 1, 0]),
    ];
    let report = verify_cell_basis(&complex, &named_basis, Domain::Rat).unwrap();
    assert!(report.is_basis);

    // The degree-6 relation among those basis elements, verified by exact
    // expansion: 2·G(x1³x2²x3) = σ3·g3 − σ2·g4b + σ1·g5. (The source that
    // states this relation prints the middle sign as +, which fails by
    // expansion; the − sign is forced, see the coefficient of x1²x2²x3².)
    let orbit = |m: &[u16]| orbit_monomial(&c4, &Monomial(m.to_vec()), z()).unwrap();
    let lhs = orbit(&[3, 2, 1, 0]).scale(&z().from_int(2));
    let sigma = |i: usize| elementary_symmetric(4, i, z()).unwrap();
    let g3 = orbit(&[2, 1, 0, 0]);
    let g4b = orbit(&[1, 2, 1, 0]);
    let g5 = orbit(&[2, 2, 1, 0]);
    let rhs = sigma(3)
        .mul(&g3)
        .sub(&sigma(2).mul(&g4b))
        .add(&sigma(1).mul(&g5));
    assert_eq!(lhs, rhs);
    let printed = sigma(3)
        .mul(&g3)
        .add(&sigma(2).mul(&g4b))
        .add(&sigma(1).mul(&g5));
    assert_ne!(lhs, printed);

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    println!("criterion 4 (C4 modular failure and rational relation): PASS in {elapsed:?}");
}

#[test]
fn criterion_5_topology_suite() {
    let start = Instant::now();

    // The D4 quotient is a disk: Cohen-Macaulay over ℤ, every link clean.
    let d4_complex = QuotientComplex::build(&d4()).unwrap();
    let verdict = is_cm_complex(&d4_complex, CmCoefficients::Integers);
    assert!(verdict.is_cm);
    assert!(verdict.witness.is_none());

    // The C4 quotient carries 2-torsion below top dimension.
    let c4 = parse_group("(1,2,3,4)", 4).unwrap();
    let c4_complex = QuotientComplex::build(&c4).unwrap();
    let homology = c4_complex.order_complex().homology(true);
    let h1 = homology.group(1).unwrap();
    assert!(h1.torsion.contains(&BigUint::from(2u32)));
    let verdict = is_cm_complex(&c4_complex, CmCoefficients::Integers);
    assert!(!verdict.is_cm);
    let witness = verdict.witness.unwrap();
    assert!(witness.group.contains("Z/2"));
    assert!(witness.homology_degree < 2);

    // The rotation quotient of the hexagon is a circle.
    let a3 = parse_group("(1,2,3)", 3).unwrap();
    let a3_complex = QuotientComplex::build(&a3).unwrap();
    let homology = a3_complex.order_complex().homology(true);
    assert!(homology.group(0).unwrap().is_trivial());
    assert!(homology.group(1).unwrap().is_free_abelian_of_rank(1));

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}");
    println!("criterion 5 (topology suite): PASS in {elapsed:?}");
}

/// Independent count of special orbit monomials: enumerate exponent vectors
/// directly, filter by the shape conditions, and group into orbits.
fn count_special_orbit_monomials(group: &PermutationGroup) -> usize {
    let n = group.degree();
    let mut seen: BTreeSet<Monomial> = BTreeSet::new();
    let mut stack = vec![vec![0u16; n]];
    let mut visited: BTreeSet<Vec<u16>> = BTreeSet::new();
    let mut count = 0usize;
    while let Some(exps) = stack.pop() {
        if !visited.insert(exps.clone()) {
            continue;
        }
        let m = Monomial(exps.clone());
        let shape = m.shape();
        let special = shape.0[n - 1] == 0
            && (0..n - 1).all(|i| shape.0[i] - shape.0[i + 1] <= 1);
        if special {
            let mut canon = m.clone();
            for g in group.elements() {
                let image = m.act(g);
                if image < canon {
                    canon = image;
                }
            }
            if seen.insert(canon) {
                count += 1;
            }
        }
        for i in 0..n {
            if exps[i] < (n - 1) as u16 {
                let mut next = exps.clone();
                next[i] += 1;
                stack.push(next);
            }
        }
    }
    count
}

#[test]
fn criterion_6_property_suites() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2026);

    // Garsia bijection: exhaustive on degree ≤ 8, n ≤ 5.
    for n in 1..=5usize {
        let mut stack = vec![vec![0u16; n]];
        let mut visited: BTreeSet<Vec<u16>> = BTreeSet::new();
        let mut images: BTreeSet<Vec<(u32, u16)>> = BTreeSet::new();
        while let Some(exps) = stack.pop() {
            let total: u32 = exps.iter().map(|&e| u32::from(e)).sum();
            if total > 8 || !visited.insert(exps.clone()) {
                continue;
            }
            let m = Monomial(exps.clone());
            let chain = garsia_inverse(&m);
            assert_eq!(garsia(&chain), m);
            assert!(images.insert(chain.factors().to_vec()));
            for i in 0..n {
                let mut next = exps.clone();
                next[i] += 1;
                stack.push(next);
            }
        }
    }

    // Equivariance of the Garsia map.
    for _ in 0..500 {
        let n = rng.gen_range(2..=5usize);
        let m = Monomial((0..n).map(|_| rng.gen_range(0..=4u16)).collect());
        let chain = garsia_inverse(&m);
        for g in PermutationGroup::symmetric(n).generators() {
            assert_eq!(garsia(&chain.act(g)), m.act(g));
        }
    }

    // Approximate homomorphism of the Garsia map.
    let mut tested = 0;
    while tested < 500 {
        let n = rng.gen_range(2..=5usize);
        let sn = PermutationGroup::symmetric(n);
        let random_layer = |rng: &mut ChaCha8Rng| -> SPolynomial {
            let m = Monomial((0..n).map(|_| rng.gen_range(0..=3u16)).collect());
            let mut f = SPolynomial::zero(n, z());
            for x in permcm::permgrp::orbit(&sn, garsia_inverse(&m), |g, c| c.act(g)) {
                if rng.gen_bool(0.6) {
                    f.add_term(x, z().from_int(rng.gen_range(-2i64..=2)));
                }
            }
            f
        };
        let f = random_layer(&mut rng);
        let g = random_layer(&mut rng);
        let h = f.mul(&g);
        if f.is_zero() || g.is_zero() || h.is_zero() {
            continue;
        }
        tested += 1;
        let lambda = garsia(h.terms().next().unwrap().0).shape();
        let difference = garsia_poly(&f).mul(&garsia_poly(&g)).sub(&garsia_poly(&h));
        for (m, _) in difference.terms() {
            assert!(m.shape() < lambda);
        }
    }

    // Stacking up is shape additivity, with a strict deglex drop otherwise.
    for _ in 0..1000 {
        let n = rng.gen_range(1..=5usize);
        let a = Monomial((0..n).map(|_| rng.gen_range(0..=4u16)).collect());
        let b = Monomial((0..n).map(|_| rng.gen_range(0..=4u16)).collect());
        let sum = a.shape().add(&b.shape()).unwrap();
        let product = a.mul(&b).shape();
        if stacks_up(&a, &b) {
            assert_eq!(product, sum);
        } else {
            assert!(product < sum);
        }
    }

    // FTSP round trips over ℤ and 𝔽_2.
    for trial in 0..200 {
        let n = rng.gen_range(1..=5usize);
        let domain = if trial % 2 == 0 { z() } else { Domain::Fp(2) };
        let sn = PermutationGroup::symmetric(n);
        let mut f = Polynomial::zero(n, domain);
        for _ in 0..rng.gen_range(1..=3) {
            let m = Monomial((0..n).map(|_| rng.gen_range(0..=3u16)).collect());
            let c = domain.from_int(rng.gen_range(-3i64..=3));
            f = f.add(&orbit_monomial(&sn, &m, domain).unwrap().scale(&c));
        }
        let rep = permcm::polyring::ftsp_represent(&f).unwrap();
        let sigmas: Vec<Polynomial> = (1..=n)
            .map(|i| elementary_symmetric(n, i, domain).unwrap())
            .collect();
        assert_eq!(rep.substitute(&sigmas), f);
    }

    // Face count equals the number of special orbit monomials, and the
    // facet count is n!/|G|, for every subgroup conjugacy class at n ≤ 5.
    for n in 2..=5usize {
        let factorial: usize = (1..=n).product();
        for group in subgroup_classes(n, 1_000_000).unwrap() {
            let complex = QuotientComplex::build(&group).unwrap();
            assert_eq!(complex.facets().len(), factorial / group.order());
            assert_eq!(
                complex.num_faces(),
                count_special_orbit_monomials(&group),
                "group {group}"
            );
            // The face-to-monomial map is injective.
            let monomials: BTreeSet<String> = (0..complex.num_faces())
                .map(|f| complex.face_to_orbit_monomial(f, z()).to_string())
                .collect();
            assert_eq!(monomials.len(), complex.num_faces());
        }
    }

    // Representation round trips on 100 random invariants per basis type.
    let complex = QuotientComplex::build(&d4()).unwrap();
    let shelling = find_shelling(&complex, DEFAULT_SHELLING_BUDGET).unwrap();
    let shelling_faces = shelling_basis(&complex, &shelling);
    let greedy = greedy_cell_basis(&complex, Domain::Rat).unwrap();
    for trial in 0..100 {
        let domain = if trial % 2 == 0 { z() } else { Domain::Rat };
        let mut f = Polynomial::zero(4, domain);
        for _ in 0..rng.gen_range(1..=2) {
            let m = Monomial((0..4).map(|_| rng.gen_range(0..=2u16)).collect());
            let c = rng.gen_range(-2i64..=2);
            f = f.add(&symmetrize(
                &d4(),
                &Polynomial::monomial(4, domain, m, c),
            ));
        }
        // represent_on_basis verifies the reconstruction internally and
        // errors if it is not exact.
        represent_on_basis(&complex, &f, &shelling_faces).unwrap();
        if domain == Domain::Rat {
            represent_on_basis(&complex, &f, &greedy.faces).unwrap();
        }
    }

    let elapsed = start.elapsed();
    println!("criterion 6 (property suites): PASS in {elapsed:?}");
}

#[test]
fn criterion_7_construction_cross_check() {
    let start = Instant::now();
    // All subgroup conjugacy classes of S_4.
    for group in subgroup_classes(4, 1_000_000).unwrap() {
        let complex = QuotientComplex::build(&group).unwrap();
        let sigma = SigmaPoset::build(&group);
        assert!(cross_check_constructions(&complex, &sigma), "group {group}");
    }
    // Deterministically sampled subgroups of S_5 and S_6.
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for n in [5usize, 6] {
        let ambient = PermutationGroup::symmetric(n);
        let mut sampled = 0;
        while sampled < 10 {
            let k = rng.gen_range(1..=2usize);
            let gens: Vec<_> = (0..k)
                .map(|_| ambient.elements().choose(&mut rng).unwrap().clone())
                .collect();
            let group = PermutationGroup::new(n, gens, 1_000_000).unwrap();
            if n == 6 && group.order() < 4 {
                continue; // keep the degree-6 posets modest
            }
            sampled += 1;
            let complex = QuotientComplex::build(&group).unwrap();
            let sigma = SigmaPoset::build(&group);
            assert!(cross_check_constructions(&complex, &sigma), "group {group}");
        }
    }
    let elapsed = start.elapsed();
    println!("criterion 7 (double-coset cross-check): PASS in {elapsed:?}");
}

/// Topological CM matches the reflection-rotation prediction for every
/// subgroup conjugacy class at low degree (the degree-5 run is long).
#[test]
fn topological_prediction_through_degree_4() {
    for n in 2..=4usize {
        for group in subgroup_classes(n, 1_000_000).unwrap() {
            let complex = QuotientComplex::build(&group).unwrap();
            let verdict = is_cm_complex(&complex, CmCoefficients::Integers);
            let (_, index) = group.rr_subgroup();
            assert_eq!(verdict.is_cm, index == 1, "group {group}");
        }
    }
}

#[test]
#[ignore]
fn topological_prediction_degree_5() {
    for group in subgroup_classes(5, 1_000_000).unwrap() {
        let complex = QuotientComplex::build(&group).unwrap();
        let verdict = is_cm_complex(&complex, CmCoefficients::Integers);
        let (_, index) = group.rr_subgroup();
        assert_eq!(verdict.is_cm, index == 1, "group {group}");
    }
}
