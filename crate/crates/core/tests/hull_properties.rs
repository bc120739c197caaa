use proptest::prelude::*;
use randpoly::body::ConvexBodyModel;
use randpoly::geometry::Point;
use randpoly::hull::{
    brute_force_hull, count_k_faces, dehn_sommerville_check, euler_check, f_vector, incremental_hull,
};
use randpoly::rng::Stream;

fn gaussian_cloud(seed: u64, n: usize, d: usize) -> Vec<Point> {
    let mut rng = Stream::new(seed);
    (0..n)
        .map(|_| Point::new((0..d).map(|_| rng.gaussian()).collect()).unwrap())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn incremental_matches_brute_force(seed in any::<u64>(), d in 2usize..=4, extra in 1usize..10) {
        let pts = gaussian_cloud(seed, d + 1 + extra, d);
        let a = incremental_hull(&pts, d).unwrap();
        let b = brute_force_hull(&pts, d).unwrap();
        prop_assert_eq!(a.facet_set(), b.facet_set());
        a.check_pseudo_manifold().unwrap();
    }

    #[test]
    fn sphere_hulls_satisfy_face_identities(seed in any::<u64>(), d in 2usize..=5, n in 10usize..120) {
        let body = ConvexBodyModel::unit_ball(d);
        let pts = body.sample_points(&mut Stream::new(seed), n);
        let h = incremental_hull(&pts, d).unwrap();
        h.check_pseudo_manifold().unwrap();
        // Every sample on a sphere is extreme.
        prop_assert_eq!(h.hull_vertices().len(), n);
        let f = f_vector(&h);
        for k in 0..d {
            prop_assert_eq!(f[k], count_k_faces(&h, k).unwrap());
        }
        prop_assert!(euler_check(&f, d));
        prop_assert!(dehn_sommerville_check(&f, d));
    }

    #[test]
    fn hull_is_invariant_under_input_order(seed in any::<u64>(), n in 8usize..40) {
        let d = 3;
        let pts = gaussian_cloud(seed, n, d);
        let h = incremental_hull(&pts, d).unwrap();
        let rev: Vec<Point> = pts.iter().rev().cloned().collect();
        let r = incremental_hull(&rev, d).unwrap();
        let mapped: std::collections::BTreeSet<Vec<usize>> = r
            .facet_set()
            .into_iter()
            .map(|f| {
                let mut v: Vec<usize> = f.into_iter().map(|i| n - 1 - i).collect();
                v.sort_unstable();
                v
            })
            .collect();
        prop_assert_eq!(h.facet_set(), mapped);
    }
}

#[test]
fn large_hull_has_expected_facet_count_in_3d() {
    // Simplicial 3-polytope with all n points extreme: f_2 = 2n - 4.
    let body = ConvexBodyModel::unit_ball(3);
    let pts = body.sample_points(&mut Stream::new(1), 3000);
    let f = f_vector(&incremental_hull(&pts, 3).unwrap());
    assert_eq!(f.counts, vec![3000, 3 * 3000 - 6, 2 * 3000 - 4]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn flat_f_vector_matches_complex(seed in any::<u64>(), d in 2usize..=5, n in 8usize..200) {
        let body = ConvexBodyModel::ellipsoid((0..d).map(|i| 1.0 + 0.3 * i as f64).collect()).unwrap();
        let flat = body.sample_flat(&mut Stream::new(seed), n);
        let pts: Vec<Point> = flat.chunks(d).map(|c| Point::new(c.to_vec()).unwrap()).collect();
        let h = incremental_hull(&pts, d).unwrap();
        prop_assert_eq!(randpoly::hull::f_vector_of_points(&flat, d).unwrap(), f_vector(&h));
    }
}
