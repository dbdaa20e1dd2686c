mod common;

use proptest::prelude::*;
use topocausal::persistence::{h0_from_points, pairwise_distances};

fn cloud(max_m: usize, max_n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1..=max_n).prop_flat_map(move |n| {
        prop::collection::vec(prop::collection::vec(-1.0f64..1.0, n), 1..=max_m)
    })
}

#[test]
fn four_point_example() {
    let pts = vec![vec![1.0, 1.0], vec![1.5, 1.0], vec![1.5, 3.0], vec![4.0, 4.0]];
    let deaths = h0_from_points(&pts).unwrap().deaths();
    let expected = [0.5, 2.0, 7.25f64.sqrt()];
    assert_eq!(deaths.len(), 3);
    for (d, e) in deaths.iter().zip(expected) {
        assert!((d - e).abs() < 1e-9, "{d} vs {e}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn deaths_equal_mst_weights(pts in cloud(50, 20)) {
        let pd = h0_from_points(&pts).unwrap();
        prop_assert_eq!(pd.deaths(), common::mst_weights(&pts));
        prop_assert!(pd.points().iter().all(|p| p.birth == 0.0 && p.death >= p.birth));
    }

    #[test]
    fn permutation_invariant(pts in cloud(30, 5), seed in any::<u64>()) {
        let mut shuffled = pts.clone();
        let keys = common::lcg(seed, shuffled.len());
        let mut order: Vec<usize> = (0..shuffled.len()).collect();
        order.sort_by(|a, b| keys[*a].total_cmp(&keys[*b]));
        shuffled = order.iter().map(|&i| pts[i].clone()).collect();
        prop_assert_eq!(h0_from_points(&pts).unwrap(), h0_from_points(&shuffled).unwrap());
    }

    #[test]
    fn scaling_scales_deaths(pts in cloud(30, 5), k in -4i32..=4) {
        // powers of two keep every intermediate exact
        let c = 2f64.powi(k);
        let scaled: Vec<Vec<f64>> = pts.iter().map(|p| p.iter().map(|v| v * c).collect()).collect();
        let a = h0_from_points(&pts).unwrap().deaths();
        let b = h0_from_points(&scaled).unwrap().deaths();
        prop_assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            prop_assert_eq!(x * c, *y);
        }
    }

    #[test]
    fn scaling_by_any_constant(pts in cloud(30, 5), c in 0.01f64..100.0) {
        let scaled: Vec<Vec<f64>> = pts.iter().map(|p| p.iter().map(|v| v * c).collect()).collect();
        let a = h0_from_points(&pts).unwrap().deaths();
        let b = h0_from_points(&scaled).unwrap().deaths();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x * c - y).abs() <= 1e-12 * y.max(1.0));
        }
    }

    #[test]
    fn duplicate_adds_one_zero_death(pts in cloud(30, 5), pick in any::<prop::sample::Index>()) {
        let mut more = pts.clone();
        more.push(pts[pick.index(pts.len())].clone());
        let mut a = h0_from_points(&pts).unwrap().deaths();
        let b = h0_from_points(&more).unwrap().deaths();
        a.push(0.0);
        a.sort_by(f64::total_cmp);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn distance_matrix_is_a_metric(pts in cloud(12, 4)) {
        let d = pairwise_distances(&pts).unwrap();
        let m = d.size();
        for i in 0..m {
            prop_assert_eq!(d.get(i, i), 0.0);
            for j in 0..m {
                prop_assert_eq!(d.get(i, j), d.get(j, i));
                for k in 0..m {
                    prop_assert!(d.get(i, k) <= d.get(i, j) + d.get(j, k) + 1e-12);
                }
            }
        }
    }
}
