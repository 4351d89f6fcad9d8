use permcm::bases::*;
use permcm::polyring::*;
use permcm::permgrp::*;
use permcm::qcomplex::*;

fn main() {
    let c4 = parse_group("(1,2,3,4)", 4).unwrap();
    let z = Domain::Rat;
    let orbit = |m: &[u16]| orbit_monomial(&c4, &Monomial(m.to_vec()), z).unwrap();
    let sigma = |i: usize| elementary_symmetric(4, i, z).unwrap();
    let lhs = orbit(&[3,2,1,0]).scale(&z.from_int(2));
    let complex = QuotientComplex::build(&c4).unwrap();
    // paper basis faces: 1, 13, 1^2 2, 1^2 2 3, 1 2^2 3, 1^2 2^2 3
    let face_of = |m: &[u16]| {
        let chain: Vec<u32> = permcm::srring::garsia_inverse(&Monomial(m.to_vec())).factors().iter().map(|&(k,_)| k).collect();
        complex.face_of_chain(&chain).unwrap()
    };
    let basis = vec![
        face_of(&[0,0,0,0]),
        face_of(&[1,0,1,0]),
        face_of(&[2,1,0,0]),
        face_of(&[2,1,1,0]),
        face_of(&[1,2,1,0]),
        face_of(&[2,2,1,0]),
    ];
    println!("basis labels: {:?}", basis.iter().map(|&f| complex.face(f).label()).collect::<Vec<_>>());
    let report = verify_cell_basis(&complex, &basis, z).unwrap();
    println!("basis ok: {} det {}", report.is_basis, report.determinant);
    match represent_on_basis(&complex, &lhs, &basis) {
        Ok(rep) => {
            for (f, c) in rep {
                if !c.is_zero() {
                    println!("  {} : {}", complex.face(f).label(), c.to_string_with("s"));
                }
            }
        }
        Err(e) => println!("error: {e}"),
    }
    // also check the printed identity directly
    let g3 = orbit(&[2,1,0,0]);
    let g4b = orbit(&[1,2,1,0]);
    let g5 = orbit(&[2,2,1,0]);
    let rhs = sigma(3).mul(&g3).add(&sigma(2).mul(&g4b)).add(&sigma(1).mul(&g5));
    println!("printed identity holds: {}", lhs == rhs);
    let diff = rhs.sub(&lhs);
    println!("diff terms: {}", diff.num_terms());
}
