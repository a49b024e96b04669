use proptest::prelude::*;
use scds::affinity::distance_matrix;
use scds::{build_affinity, cosine_distance, local_scales, EmbeddingSet, Item};

fn set_from(vectors: &[Vec<f64>]) -> EmbeddingSet {
    let items = vectors
        .iter()
        .enumerate()
        .map(|(i, v)| Item {
            id: format!("x{i}"),
            label: None,
            vector: v.clone(),
        })
        .collect();
    EmbeddingSet::new(items).unwrap()
}

fn vectors(max_n: usize, dim: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-1.0f64..1.0, dim), 2..max_n).prop_filter(
        "nonzero rows",
        |vs| {
            vs.iter()
                .all(|v| v.iter().map(|x| x * x).sum::<f64>() > 1e-6)
        },
    )
}

#[test]
fn three_point_example() {
    let set = set_from(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, 0.0]]);
    let sigma = local_scales(&set, 1).unwrap();
    assert_eq!(sigma, vec![1.0, 1.0, 1.0]);
    let a = build_affinity(&set, 1).unwrap();
    assert!((a.get(0, 2) - (-2.0f64).exp()).abs() < 1e-15);
    assert!((a.get(0, 1) - (-1.0f64).exp()).abs() < 1e-15);
}

#[test]
fn knn_larger_than_available_uses_all_neighbors() {
    let set = set_from(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]);
    let all = local_scales(&set, 2).unwrap();
    let capped = local_scales(&set, 50).unwrap();
    assert_eq!(all, capped);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn affinity_is_a_valid_similarity(vs in vectors(12, 5), knn in 1usize..9) {
        let a = build_affinity(&set_from(&vs), knn).unwrap();
        let n = a.n();
        for i in 0..n {
            prop_assert_eq!(a.get(i, i), 0.0);
            for j in 0..n {
                prop_assert_eq!(a.get(i, j), a.get(j, i));
                if i != j {
                    prop_assert!((0.0..=1.0).contains(&a.get(i, j)));
                }
            }
        }
    }

    #[test]
    fn cosine_distance_is_bounded_and_symmetric(u in prop::collection::vec(-3.0f64..3.0, 4),
                                                v in prop::collection::vec(-3.0f64..3.0, 4)) {
        prop_assume!(u.iter().any(|x| x.abs() > 1e-3) && v.iter().any(|x| x.abs() > 1e-3));
        let d = cosine_distance(&u, &v).unwrap();
        prop_assert!((0.0..=2.0).contains(&d));
        prop_assert_eq!(d, cosine_distance(&v, &u).unwrap());
        prop_assert!(cosine_distance(&u, &u).unwrap().abs() < 1e-12);
    }

    #[test]
    fn invariant_to_vector_rescaling(vs in vectors(10, 4),
                                     scales in prop::collection::vec(0.01f64..100.0, 10)) {
        let scaled: Vec<Vec<f64>> = vs
            .iter()
            .zip(&scales)
            .map(|(v, s)| v.iter().map(|x| x * s).collect())
            .collect();
        let a = build_affinity(&set_from(&vs), 3).unwrap();
        let b = build_affinity(&set_from(&scaled), 3).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            prop_assert!((x - y).abs() < 1e-9, "{} vs {}", x, y);
        }
    }

    #[test]
    fn permuting_items_permutes_the_matrix(vs in vectors(10, 4), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let n = vs.len();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let permuted: Vec<Vec<f64>> = perm.iter().map(|&p| vs[p].clone()).collect();
        let a = build_affinity(&set_from(&vs), 3).unwrap();
        let b = build_affinity(&set_from(&permuted), 3).unwrap();
        for i in 0..n {
            for j in 0..n {
                prop_assert!((b.get(i, j) - a.get(perm[i], perm[j])).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sigma_is_the_mean_of_nearest_distances(vs in vectors(10, 3), knn in 1usize..6) {
        let set = set_from(&vs);
        let n = set.len();
        let d = distance_matrix(&set);
        let sigma = local_scales(&set, knn).unwrap();
        for i in 0..n {
            let mut row: Vec<f64> = (0..n).filter(|&j| j != i).map(|j| d[i * n + j]).collect();
            row.sort_by(f64::total_cmp);
            let k = knn.min(row.len());
            let expected = (row[..k].iter().sum::<f64>() / k as f64).max(1e-12);
            prop_assert!((sigma[i] - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn closer_pairs_are_more_similar_under_equal_scales(vs in vectors(8, 3)) {
        // For a fixed i and two neighbors with the same sigma, the nearer one wins.
        let set = set_from(&vs);
        let n = set.len();
        let d = distance_matrix(&set);
        let sigma = local_scales(&set, 3).unwrap();
        let a = build_affinity(&set, 3).unwrap();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if i != j && i != k && sigma[j] == sigma[k] && d[i * n + j] < d[i * n + k] {
                        prop_assert!(a.get(i, j) >= a.get(i, k));
                    }
                }
            }
        }
    }
}
