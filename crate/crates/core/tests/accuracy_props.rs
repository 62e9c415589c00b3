mod common;

use common::grid_oracle;
use credence_audit::accuracy::{
    brier_score, dominance_certificate, project_to_coherent, world_vectors, CredenceVector,
    ProjectionOptions, WorldVectorSet,
};
use credence_audit::logic::{AtomRegistry, Formula};
use proptest::prelude::*;

const EPS: f64 = 1e-7;

fn registry(n: usize) -> AtomRegistry {
    AtomRegistry::from_entries((0..n).map(|i| (format!("a{i}"), format!("statement {i} holds"))))
        .unwrap()
}

fn formula(n: usize) -> impl Strategy<Value = Formula> {
    let leaf = (0..n).prop_map(|i| Formula::atom(format!("a{i}"), format!("statement {i} holds")));
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Formula::or(a, b)),
        ]
    })
}

/// Up to four formulas over up to three atoms, with a credence per formula.
fn problem(max_formulas: usize) -> impl Strategy<Value = (AtomRegistry, WorldVectorSet, Vec<f64>)> {
    (1usize..=3, 1..=max_formulas).prop_flat_map(|(atoms, k)| {
        (
            prop::collection::vec(formula(atoms), k),
            prop::collection::vec(0.0f64..=1.0, k),
        )
            .prop_map(move |(fs, c)| {
                let reg = registry(atoms);
                let w = world_vectors(&fs, &reg).unwrap();
                (reg, w, c)
            })
    })
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn projection_is_idempotent((_r, w, c) in problem(4)) {
        let opts = ProjectionOptions::default();
        let (once, _) = project_to_coherent(&CredenceVector::for_set(&w, c).unwrap(), &w, &opts).unwrap();
        let (twice, p2) = project_to_coherent(&once, &w, &opts).unwrap();
        prop_assert!(dist(&once.values, &twice.values) <= 2.0 * EPS);
        prop_assert!(p2.hull_distance <= 2.0 * EPS);
    }

    #[test]
    fn hull_points_are_fixed((_r, w, weights) in problem(4)) {
        // Reuse the random numbers as mixture weights over the world vectors.
        let pts = w.points();
        let mut lambda: Vec<f64> = (0..pts.len()).map(|i| weights[i % weights.len()] + 0.01 * i as f64).collect();
        let total: f64 = lambda.iter().sum();
        lambda.iter_mut().for_each(|l| *l /= total);
        let c: Vec<f64> = (0..w.dim())
            .map(|j| pts.iter().zip(&lambda).map(|(v, l)| v[j] * l).sum())
            .collect();
        let cv = CredenceVector::for_set(&w, c.clone()).unwrap();
        let (proj, p) = project_to_coherent(&cv, &w, &ProjectionOptions::default()).unwrap();
        prop_assert!(p.hull_distance <= EPS);
        prop_assert_eq!(proj.values, c);
        let cert = dominance_certificate(&cv, &w, &ProjectionOptions::default()).unwrap();
        prop_assert!(!cert.strictly_dominates);
    }

    #[test]
    fn dominance_margin_is_at_least_squared_distance((_r, w, c) in problem(4)) {
        let cv = CredenceVector::for_set(&w, c).unwrap();
        let cert = dominance_certificate(&cv, &w, &ProjectionOptions::default()).unwrap();
        let d = cert.hull_distance;
        prop_assume!(d > 10.0 * EPS);
        prop_assert!(cert.strictly_dominates);
        for pair in &cert.pairs {
            let v: Vec<f64> = pair.vector.iter().map(|&b| f64::from(b)).collect();
            let original = brier_score(&cv.values, &v).unwrap();
            let projected = brier_score(&cert.projected.values, &v).unwrap();
            prop_assert_eq!(original, pair.original);
            prop_assert!(projected < original);
            prop_assert!(original - projected >= d * d - 2.0 * EPS);
        }
    }

    #[test]
    fn two_dimensional_projection_matches_grid_search(
        (fs, c) in (prop::collection::vec(formula(2), 2), (0.0f64..=1.0, 0.0f64..=1.0))
    ) {
        let reg = registry(2);
        let w = world_vectors(&fs, &reg).unwrap();
        let cv = CredenceVector::for_set(&w, vec![c.0, c.1]).unwrap();
        let (proj, _) = project_to_coherent(&cv, &w, &ProjectionOptions::default()).unwrap();
        let verts: Vec<[f64; 2]> = w.points().iter().map(|v| [v[0], v[1]]).collect();
        let oracle = grid_oracle([c.0, c.1], &verts);
        prop_assert!(dist(&proj.values, &oracle) <= 1e-3, "fw {:?} grid {:?}", proj.values, oracle);
    }

    #[test]
    fn brier_zero_exactly_at_the_vector(
        v in prop::collection::vec(0u8..=1, 1..6),
        c in prop::collection::vec(0.0f64..=1.0, 6),
    ) {
        let v: Vec<f64> = v.into_iter().map(f64::from).collect();
        let c = &c[..v.len()];
        prop_assert_eq!(brier_score(&v, &v).unwrap(), 0.0);
        let b = brier_score(c, &v).unwrap();
        prop_assert_eq!(b == 0.0, c == v.as_slice());
    }

    #[test]
    fn proposition_and_negation_vectors_sum_to_one(f in formula(3)) {
        let reg = registry(3);
        let w = world_vectors(&[f.clone(), Formula::not(f)], &reg).unwrap();
        prop_assert_eq!(w.multiplicity.iter().sum::<u64>(), 8);
        for v in &w.vectors {
            prop_assert_eq!(v[0] + v[1], 1);
        }
    }
}

#[test]
fn incoherent_negation_pair_projects_to_the_line() {
    let reg = registry(1);
    let p = reg.atom("a0").unwrap();
    let w = world_vectors(&[p.clone(), Formula::not(p)], &reg).unwrap();
    let cv = CredenceVector::for_set(&w, vec![0.6, 0.6]).unwrap();
    let cert = dominance_certificate(&cv, &w, &ProjectionOptions::default()).unwrap();
    assert!(cert.strictly_dominates);
    assert!((cert.projected.values[0] - 0.5).abs() < 1e-6);
    assert!((cert.projected.values[1] - 0.5).abs() < 1e-6);
    assert!((cert.hull_distance - 0.02f64.sqrt()).abs() < 1e-6);
}
