use klbss::semgen::{
    bipartite_layers, gen_bipartite, gen_er, gen_sf, make_motivating_example, sample_dataset, sem_covariance,
    GenParams,
};
use klbss::{DMatrix, IndexSet};

#[test]
fn er_edge_count_is_binomial() {
    // d = 8, k = 2: p = 16/28, so the count is Binomial(28, 4/7) with mean 16.
    let p = GenParams::default();
    let draws = 10_000;
    let total: usize = (0..draws).map(|seed| gen_er(8, 2, &p, seed).unwrap().dag().edges().len()).sum();
    let mean = total as f64 / draws as f64;
    let prob = 16.0 / 28.0;
    let se = (28.0 * prob * (1.0 - prob) / draws as f64).sqrt();
    assert!((mean - 16.0).abs() < 3.0 * se, "mean {mean}, se {se}");
}

#[test]
fn bipartite_recipe_constraints() {
    let p = GenParams::default();
    for seed in 0..1000 {
        let spec = gen_bipartite(10, 3, &p, seed).unwrap();
        let (v1, v2) = bipartite_layers(&spec).expect("two layers");
        for k in v2.iter() {
            let parents = spec.dag().parents(k);
            assert!(parents.is_subset(&v1));
            assert!((1..=3.min(v1.len())).contains(&parents.len()), "seed {seed}, node {k}");
        }
    }
}

#[test]
fn scale_free_edge_counts() {
    let p = GenParams::default();
    for attach in 1..4 {
        let spec = gen_sf(30, attach, &p, 5).unwrap();
        let expected: usize = 1 + (2..30).map(|v| attach.min(v)).sum::<usize>();
        assert_eq!(spec.dag().edges().len(), expected);
        assert!(spec.dag().is_acyclic());
    }
}

#[test]
fn sample_covariance_converges() {
    let (spec, model) = make_motivating_example(4, 2, 0.1, 0.8).unwrap();
    let model = model.with_noise_var(1.0).unwrap();
    let n = 100_000;
    let data = sample_dataset(&model, n, 99).unwrap();
    let sigma = sem_covariance(&spec);
    let emp: DMatrix<f64> = data.x.tr_mul(&data.x) / n as f64;
    for i in 0..4 {
        for j in 0..4 {
            // Var(X_i X_j) = Σ_ii Σ_jj + Σ_ij² for zero-mean Gaussians.
            let se = ((sigma.get(i, i) * sigma.get(j, j) + sigma.get(i, j).powi(2)) / n as f64).sqrt();
            assert!((emp[(i, j)] - sigma.get(i, j)).abs() < 5.0 * se, "entry ({i},{j})");
        }
    }
}

#[test]
fn response_variance_matches_model() {
    let (_, model) = make_motivating_example(4, 2, 0.5, 1.0).unwrap();
    let n = 200_000;
    let data = sample_dataset(&model, n, 7).unwrap();
    let want = model.sigma().quad_form(model.beta()) + model.noise_var();
    let got = data.y.norm_squared() / n as f64;
    let se = want * (2.0 / n as f64).sqrt();
    assert!((got - want).abs() < 5.0 * se);
}

#[test]
fn motivating_covariance_blocks() {
    let (spec, _) = make_motivating_example(10, 3, 0.1, 5.0).unwrap();
    let sigma = sem_covariance(&spec);
    for k in 3..10 {
        assert!((sigma.get(k, k) - 76.0).abs() < 1e-12);
        for j in 0..3 {
            assert!((sigma.get(j, k) - 5.0).abs() < 1e-12);
        }
    }
    let roots = sigma.principal(&IndexSet::range(0, 3));
    assert!((roots.matrix() - DMatrix::<f64>::identity(3, 3)).abs().max() < 1e-15);
    assert!(sigma.matrix().iter().all(|v| v.is_finite()));
}
