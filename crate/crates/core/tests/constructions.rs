//! Code constructions, file formats and lattice structure.

use ewsd::codes::{
    from_generator, hyperplane_exclusion, rho, subspace_exclusion, subspace_exclusion_of, to_generator,
    uniform_fraction, CodeDefinition,
};
use ewsd::gf2::GeneratorMatrix;
use ewsd::lattice::{hyperplanes, lattice, subspaces_of, superspace_count, Subspace};
use num_bigint::BigUint;
use proptest::prelude::*;

#[test]
fn simplex_and_augmented_hadamard_generators() {
    let simplex = to_generator(&uniform_fraction(3).unwrap(), 7).unwrap();
    assert_eq!(simplex.col_bits(), &[1, 2, 3, 4, 5, 6, 7]);
    assert_eq!(simplex.to_text(), "1010101\n0110011\n0001111\n");
    let hadamard = to_generator(&subspace_exclusion(3, 2).unwrap(), 4).unwrap();
    assert_eq!(hadamard.col_bits(), &[4, 5, 6, 7]);
    assert_eq!(uniform_fraction(3).unwrap().to_json(), subspace_exclusion(3, 0).unwrap().to_json());
}

#[test]
fn exclusion_codes_agree_across_constructors() {
    for kappa in 1..=6usize {
        for u in 0..kappa {
            let a = subspace_exclusion(kappa, u).unwrap();
            let b = subspace_exclusion_of(&Subspace::leading(kappa, u).unwrap()).unwrap();
            assert_eq!(a.q(), b.q());
            let (diff, mag) = rho(kappa, u).unwrap();
            let norm = diff.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((norm - mag).abs() < 1e-14);
        }
        let first = hyperplane_exclusion(kappa, 1).unwrap();
        assert_eq!(first.q(), subspace_exclusion(kappa, kappa - 1).unwrap().q());
    }
}

#[test]
fn unrealizable_q_reports_offending_entries() {
    let q = CodeDefinition::new(vec![0.0, 0.5, 0.25, 0.25]).unwrap();
    let r = q.realizability(3);
    assert!(!r.realizable);
    assert!(!r.offending.is_empty());
    assert!(q.realizability(4).realizable);
    assert!(to_generator(&q, 3).is_err());
}

#[test]
fn q_files_reject_bad_input() {
    assert!(CodeDefinition::from_json("{\"kappa\": 2, \"q\": [0.5, 0.5, 0.0]}").is_err());
    assert!(CodeDefinition::from_json("{\"kappa\": 3, \"q\": [0.5, 0.5, 0.0, 0.0]}").is_err());
    assert!(CodeDefinition::from_json("{\"kappa\": 2, \"q\": [0.5, 0.6, 0.0, -0.1]}").is_err());
    assert!(CodeDefinition::from_json("not json").is_err());
}

#[test]
fn hyperplanes_are_the_top_layer() {
    for kappa in 1..=6usize {
        let mut h = hyperplanes(kappa).unwrap();
        let mut top = lattice(kappa).unwrap().layer(kappa - 1).to_vec();
        h.sort();
        top.sort();
        assert_eq!(h, top);
    }
}

#[test]
fn superspace_counts_match_lattice() {
    let kappa = 5;
    let lat = lattice(kappa).unwrap();
    for dp in 0..=kappa {
        let fixed = &lat.layer(dp)[0];
        for d in dp..=kappa {
            let brute = lat.layer(d).iter().filter(|s| fixed.is_subspace_of(s)).count();
            assert_eq!(superspace_count(kappa, dp, d).unwrap(), BigUint::from(brute));
            let subs = subspaces_of(&lat.layer(d)[0], dp).unwrap().len();
            assert_eq!(BigUint::from(subs), ewsd::lattice::gaussian_binomial(d as i64, dp as i64));
        }
    }
}

proptest! {
    #[test]
    fn generator_q_round_trip(kappa in 1usize..=5, cols in prop::collection::vec(any::<u32>(), 1..=20)) {
        let cols: Vec<u32> = cols.into_iter().map(|c| c & ((1 << kappa) - 1)).collect();
        let g = GeneratorMatrix::new(kappa, cols.clone()).unwrap();
        let q = from_generator(&g).unwrap();
        let back = to_generator(&q, g.n()).unwrap();
        let mut sorted = cols;
        sorted.sort();
        prop_assert_eq!(back.col_bits(), sorted.as_slice());
        let reparsed = CodeDefinition::from_json(&q.to_json()).unwrap();
        prop_assert_eq!(reparsed.q(), q.q());
    }

    #[test]
    fn lattice_elements_are_closed_subspaces(kappa in 1usize..=5, pick in any::<prop::sample::Index>()) {
        let lat = lattice(kappa).unwrap();
        let all: Vec<&Subspace> = lat.layers().iter().flatten().collect();
        let s = all[pick.index(all.len())];
        prop_assert_eq!(s.elements().len(), 1usize << s.dim());
        for &a in s.elements() {
            for &b in s.elements() {
                prop_assert!(s.contains(a ^ b));
            }
        }
        prop_assert_eq!(lat.locate(s.basis()).map(|(d, _)| d), Some(s.dim()));
    }
}
