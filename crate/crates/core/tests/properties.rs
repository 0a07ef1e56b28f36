//! Property tests for the geometric and covering invariants.

use fraclt_core::covering::{self};
use fraclt_core::density::{Density, GaussianComponent};
use fraclt_core::geometry::Cube;
use fraclt_core::seminorm;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn children_tile_parent(
        cx in -5.0f64..5.0,
        cy in -5.0f64..5.0,
        side in 0.1f64..10.0,
        k in 2u32..4,
    ) {
        let q = Cube::new(vec![cx, cy], side).unwrap();
        let kids = q.subdivide(k).unwrap();
        prop_assert_eq!(kids.len(), (k as usize).pow(2));
        let total: f64 = kids.iter().map(|c| c.volume()).sum();
        prop_assert!((total - q.volume()).abs() < 1e-12 * q.volume());
        for kid in &kids {
            prop_assert!((kid.side - side / k as f64).abs() < 1e-12);
            prop_assert_eq!(kid.depth, 1);
        }
    }

    #[test]
    fn every_point_owned_by_exactly_one_child(
        px in 0.0f64..1.0,
        py in 0.0f64..1.0,
        k in 2u32..5,
    ) {
        let q = Cube::from_bounds(0.0, 1.0, 2).unwrap();
        let kids = q.subdivide(k).unwrap();
        let x = [px, py];
        let owners = kids.iter().filter(|c| c.contains(&x).unwrap()).count();
        prop_assert_eq!(owners, 1);
    }

    #[test]
    fn loss_identity_residual_is_algebraically_zero(
        chi_x in -1.0f64..1.0,
        chi_y in -1.0f64..1.0,
        ur in -2.0f64..2.0,
        ui in -2.0f64..2.0,
        vr in -2.0f64..2.0,
        vi in -2.0f64..2.0,
    ) {
        let r = seminorm::loss_identity_residual(chi_x, chi_y, (ur, ui), (vr, vi)).unwrap();
        prop_assert!(r.abs() < 1e-12, "residual {r}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn covering_guarantees_hold_for_random_mixtures(
        w1 in 0.5f64..2.5,
        w2 in 0.5f64..2.5,
        c1 in -2.5f64..2.5,
        c2 in -2.5f64..2.5,
        width1 in 0.05f64..0.9,
        width2 in 0.05f64..0.9,
        frac in 0.25f64..0.7,
        k in 2u32..4,
        s_idx in 0usize..3,
    ) {
        let d = 1usize;
        let rho = Density::gaussian_mixture(
            d,
            vec![
                GaussianComponent { weight: w1, center: vec![c1], width: width1 },
                GaussianComponent { weight: w2, center: vec![c2], width: width2 },
            ],
        )
        .unwrap();
        let lambda = frac * (w1 + w2);
        let q0 = Cube::from_bounds(-8.0, 8.0, d).unwrap();
        let p = covering::build_covering(&rho, &q0, lambda, k, 40).unwrap();
        for leaf in &p.leaves {
            prop_assert!(leaf.mass < lambda);
        }
        let s = [0.25, 0.5, 1.0][s_idx];
        let alpha = 2.0 * s / d as f64;
        let a = covering::covering_constant_a(k, d, alpha).unwrap();
        let rep = covering::exclusion_functional(&p, alpha, a).unwrap();
        prop_assert!(rep.satisfied, "exclusion {rep:?}");
        for q in [1.0, 2.0] {
            let b = covering::covering_constant_b(k, d, alpha, q, lambda).unwrap();
            let wrep = covering::weak_exclusion_functional(&p, alpha, q, b).unwrap();
            prop_assert!(wrep.satisfied, "weak exclusion {wrep:?}");
        }
        // leaves tile the root
        let vol: f64 = p.leaves.iter().map(|l| l.cube.volume()).sum();
        prop_assert!((vol - q0.volume()).abs() < 1e-9 * q0.volume());
    }
}
