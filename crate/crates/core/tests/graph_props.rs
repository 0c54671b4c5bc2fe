mod common;

use common::*;
use gwca_core::synth::{build_embedding_graph, EdgeRule, EmbeddingGraphConfig};
use gwca_core::{build_laplacian, pad_pair, GwcaError};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn padding_is_idempotent(seed in any::<u64>(), n1 in 1usize..15, n2 in 1usize..15, d in 1usize..3) {
        let mut r = rng(seed);
        let g1 = random_graph(&mut r, n1, d);
        let g2 = random_graph(&mut r, n2, d);
        let (p1, p2) = pad_pair(&g1, &g2);
        prop_assert_eq!(p1.n(), n1.max(n2));
        prop_assert_eq!(p2.n(), n1.max(n2));
        let (q1, q2) = pad_pair(&p1, &p2);
        prop_assert_eq!(&q1, &p1);
        prop_assert_eq!(&q2, &p2);
        prop_assert_eq!(p1.padded(p1.n()), p1.clone());
    }

    #[test]
    fn normalized_laplacian_matches_degree_form(seed in any::<u64>(), n in 1usize..20) {
        let g = random_graph(&mut rng(seed), n, 1);
        let l = build_laplacian(&g, true);
        let want = normalized_laplacian(&g);
        prop_assert!((l.matrix() - &want).abs().max() <= 1e-12);
        let eig = l.matrix().clone().symmetric_eigenvalues();
        prop_assert!(eig.iter().all(|&v| (-1e-9..=2.0 + 1e-9).contains(&v)));
    }

    #[test]
    fn similarity_graph_commutes_with_permutation(seed in any::<u64>(), n in 2usize..15, d in 1usize..5, m in 1usize..5, t in -0.5f64..0.9) {
        let mut r = rng(seed);
        let emb = DMatrix::from_fn(n, d, |_, _| normal(&mut r) + 0.1);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut r);
        let embp = DMatrix::from_fn(n, d, |i, c| emb[(perm[i], c)]);
        // TopM ties are broken by index, so only the threshold rule is exactly equivariant
        let cfg = EmbeddingGraphConfig { rule: EdgeRule::Threshold(t), dim: None };
        let g = build_embedding_graph(&emb, &cfg).unwrap();
        let gp = build_embedding_graph(&embp, &cfg).unwrap();
        prop_assert_eq!(gp, g.permuted(&perm).unwrap());
        let top = build_embedding_graph(&emb, &EmbeddingGraphConfig { rule: EdgeRule::TopM(m), dim: None }).unwrap();
        prop_assert_eq!(top, build_embedding_graph(&emb, &EmbeddingGraphConfig { rule: EdgeRule::TopM(m), dim: Some(d) }).unwrap());
    }
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

#[test]
fn similarity_edges_match_double_loop() {
    let mut r = rng(11);
    for _ in 0..40 {
        let n = r.random_range(2..25);
        let d = r.random_range(1..6);
        let emb = DMatrix::from_fn(n, d, |_, _| normal(&mut r));
        let rows: Vec<Vec<f64>> = emb.row_iter().map(|row| row.iter().copied().collect()).collect();
        let t = r.random_range(-0.2..0.8);
        let g = build_embedding_graph(&emb, &EmbeddingGraphConfig { rule: EdgeRule::Threshold(t), dim: None }).unwrap();
        let m = r.random_range(1..5);
        let top = build_embedding_graph(&emb, &EmbeddingGraphConfig { rule: EdgeRule::TopM(m), dim: None }).unwrap();
        let mut neighbours = vec![Vec::new(); n];
        for i in 0..n {
            let mut cand: Vec<(f64, usize)> =
                (0..n).filter(|&j| j != i).map(|j| (cosine(&rows[i], &rows[j]), j)).filter(|&(s, _)| s > 0.0).collect();
            cand.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
            neighbours[i] = cand.into_iter().take(m).map(|(_, j)| j).collect();
        }
        for i in 0..n {
            for j in 0..n {
                let s = cosine(&rows[i], &rows[j]);
                let want = if i != j && s > t && s > 0.0 { s.min(1.0) } else { 0.0 };
                assert!((g.adjacency()[(i, j)] - want).abs() < 1e-12, "threshold edge ({i},{j})");
                let linked = i != j && (neighbours[i].contains(&j) || neighbours[j].contains(&i));
                let want = if linked { s.min(1.0) } else { 0.0 };
                assert!((top.adjacency()[(i, j)] - want).abs() < 1e-12, "top-m edge ({i},{j})");
            }
        }
        assert_eq!(g.features(), &emb);
    }
}

#[test]
fn similarity_graph_rejects_zero_rows() {
    let mut emb = DMatrix::from_element(4, 3, 1.0);
    emb.row_mut(2).fill(0.0);
    let err = build_embedding_graph(&emb, &EmbeddingGraphConfig { rule: EdgeRule::TopM(2), dim: None }).unwrap_err();
    assert!(matches!(err, GwcaError::ZeroNormRow { row: 2 }));
}
