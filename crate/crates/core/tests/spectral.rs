use proptest::prelude::*;
use scds::baselines::{largest_gap, normalized_laplacian};
use scds::eigen::symmetric_eigen;
use scds::{eigengap_estimate, AffinityMatrix};

fn block_diagonal(sizes: &[usize], within: f64, between: f64) -> AffinityMatrix {
    let n: usize = sizes.iter().sum();
    let block: Vec<usize> = sizes
        .iter()
        .enumerate()
        .flat_map(|(b, &s)| std::iter::repeat_n(b, s))
        .collect();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                v[i * n + j] = if block[i] == block[j] {
                    within
                } else {
                    between
                };
            }
        }
    }
    AffinityMatrix::from_dense(n, v).unwrap()
}

#[test]
fn block_diagonal_component_count() {
    for sizes in [
        vec![3, 4],
        vec![2, 3, 4],
        vec![3, 3, 3, 3, 3],
        vec![2, 2, 3, 4, 5],
    ] {
        assert_eq!(
            eigengap_estimate(&block_diagonal(&sizes, 1.0, 0.0)).unwrap(),
            sizes.len()
        );
        assert_eq!(
            eigengap_estimate(&block_diagonal(&sizes, 0.9, 0.01)).unwrap(),
            sizes.len()
        );
    }
}

#[test]
fn isolated_vertex_is_not_a_zero_eigenvalue() {
    // Zero-degree rows get a unit diagonal, so a lone vertex sits at 1.
    let eig =
        symmetric_eigen(&normalized_laplacian(&block_diagonal(&[1, 3], 1.0, 0.0)), 4).unwrap();
    assert!(eig.values[0].abs() < 1e-12);
    assert!((eig.values[1] - 1.0).abs() < 1e-12);
}

#[test]
fn complete_graph_and_single_edge() {
    assert_eq!(
        eigengap_estimate(&block_diagonal(&[6], 1.0, 0.0)).unwrap(),
        1
    );
    assert_eq!(
        eigengap_estimate(&block_diagonal(&[2], 1.0, 0.0)).unwrap(),
        1
    );
}

#[test]
fn gap_ties_go_to_the_smaller_k() {
    assert_eq!(largest_gap(&[0.0, 1.0, 2.0]), 1);
    assert_eq!(largest_gap(&[0.0, 0.0, 1.0, 1.0, 2.0]), 2);
}

fn symmetric(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, n * n).prop_map(move |mut v| {
        for i in 0..n {
            for j in 0..i {
                v[i * n + j] = v[j * n + i];
            }
        }
        v
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn jacobi_reconstructs_the_matrix(m in (1usize..=64).prop_flat_map(|n| (Just(n), symmetric(n)))) {
        let (n, v) = m;
        let eig = symmetric_eigen(&v, n).unwrap();
        prop_assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
        for (x, y) in eig.reconstruct().iter().zip(&v) {
            prop_assert!((x - y).abs() <= 1e-8, "{} vs {}", x, y);
        }
        // Columns are orthonormal.
        for a in 0..n {
            for b in a..n {
                let dot: f64 = eig.vector(a).iter().zip(eig.vector(b)).map(|(x, y)| x * y).sum();
                let expected = if a == b { 1.0 } else { 0.0 };
                prop_assert!((dot - expected).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn laplacian_spectrum_lies_in_zero_two(weights in prop::collection::vec(0.0f64..1.0, 1..=45)) {
        // Pack the weights into the upper triangle of the largest fitting matrix.
        let mut n = 2;
        while (n + 1) * n / 2 <= weights.len() {
            n += 1;
        }
        let mut v = vec![0.0; n * n];
        let mut w = weights.iter();
        for i in 0..n {
            for j in i + 1..n {
                let x = *w.next().unwrap_or(&0.0);
                v[i * n + j] = x;
                v[j * n + i] = x;
            }
        }
        let a = AffinityMatrix::from_dense(n, v).unwrap();
        let eig = symmetric_eigen(&normalized_laplacian(&a), n).unwrap();
        prop_assert!(eig.values[0] > -1e-9);
        prop_assert!(*eig.values.last().unwrap() < 2.0 + 1e-9);
        let k = eigengap_estimate(&a).unwrap();
        prop_assert!((1..n).contains(&k));
    }
}
