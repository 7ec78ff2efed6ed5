mod common;

use common::*;
use klbss::covkit::min_eigenvalue;
use klbss::semgen::{
    attach_target, gen_er, make_gpc_example, make_independent_design, make_indistinguishable_pair,
    make_motivating_example, GenParams, SemSpec,
};
use klbss::signals::{
    delta1, delta2, delta2_tilde, global_signal, global_signal_bss, irrepresentability_gamma, kl_decomposition,
    kl_linear_models, mutual_incoherence_mu, omega_param, proportional_property_ratio, signal_report,
};
use klbss::theta::{population_project, project_qp, tune_beta_min};
use klbss::{CandidateFamily, Dag, DMatrix, DVector, IndexSet, LinearModel, SymMatrix, ThetaSpec};
use rand::seq::IndexedRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

fn random_model(d: usize, s: usize, seed: u64) -> LinearModel {
    let spec = gen_er(d, 2, &GenParams::default(), seed).unwrap();
    let mut r = rng(seed ^ 0xabc);
    let support = IndexSet::new((0..d).collect::<Vec<_>>().choose_multiple(&mut r, s).copied());
    let beta: Vec<f64> = (0..s).map(|_| r.random_range(0.1..1.0) * if r.random_bool(0.5) { 1.0 } else { -1.0 }).collect();
    attach_target(&spec, &support, &beta, r.random_range(0.5..2.0)).unwrap()
}

fn random_alternative(d: usize, s: usize, truth: &IndexSet, r: &mut rand_chacha::ChaCha8Rng) -> IndexSet {
    loop {
        let t = IndexSet::new((0..d).collect::<Vec<_>>().choose_multiple(r, s).copied());
        if &t != truth {
            return t;
        }
    }
}

#[test]
fn qp_matches_grid_oracle() {
    let mut r = rng(21);
    for _ in 0..200 {
        let dim = r.random_range(1..=2);
        let m = random_pd(dim, 0.1, &mut r);
        let g = DVector::from_fn(dim, |_, _| r.random_range(-0.4..0.4));
        let b = r.random_range(0.05..0.3);
        let got = project_qp(&g, &m, &ThetaSpec::floor(b)).unwrap();
        let want = grid_qp(&g, m.matrix(), b, 1e-3);
        assert!((got.value - want).abs() < 1e-4, "got {}, grid {}", got.value, want);
        assert!(got.minimizer.iter().all(|v| v.abs() >= b - 1e-12));
    }
}

#[test]
fn qp_matches_orthant_descent_up_to_four() {
    let mut r = rng(22);
    for _ in 0..200 {
        let dim = r.random_range(1..=4);
        let m = random_pd(dim, 0.3, &mut r);
        let g = DVector::from_fn(dim, |_, _| r.random_range(-0.5..0.5));
        let b = r.random_range(0.05..0.3);
        let got = project_qp(&g, &m, &ThetaSpec::floor(b)).unwrap().value;
        let want = orthant_descent_qp(&g, m.matrix(), b);
        assert!((got - want).abs() < 1e-9 * (1.0 + want), "got {got}, oracle {want}");
    }
}

#[test]
fn scalar_qp_tie_breaks_positive() {
    let sol = project_qp(&DVector::from_vec(vec![0.0]), &SymMatrix::identity(1), &ThetaSpec::floor(0.1)).unwrap();
    assert!((sol.value - 0.01).abs() < 1e-15);
    assert_eq!(sol.minimizer[0], 0.1);
}

#[test]
fn population_projection_single_swap() {
    let (bmin, bmax) = (0.1, 5.0);
    let alpha_beta = bmax * bmin / (1.0 + bmax * bmax);
    let m = SymMatrix::new(DMatrix::from_element(1, 1, 1.0 + bmax * bmax)).unwrap();
    let sol = population_project(&DVector::from_vec(vec![alpha_beta]), &m, &ThetaSpec::floor(bmin)).unwrap();
    let want = (bmin - alpha_beta).powi(2) * 26.0;
    assert!((sol.value - want).abs() < 1e-12);
    assert!((sol.minimizer[0] - 0.1).abs() < 1e-15);
    assert!((grid_qp(&DVector::from_vec(vec![alpha_beta]), m.matrix(), bmin, 1e-4) - want).abs() < 1e-6);
    assert!(sol.value >= bmin * bmin / 4.0);
}

#[test]
fn tuning_rule_direct_arithmetic() {
    let got = tune_beta_min(100, 3, 1000, 0.05, 1.0, 1.0, 1.0).unwrap();
    let want = ((97.0_f64.ln() + 20.0_f64.ln()) / 997.0).sqrt();
    assert!((got - want).abs() < 1e-15);
    let a = tune_beta_min(10, 2, 102, 0.1, 0.5, 1.0, 2.0).unwrap();
    let b = tune_beta_min(10, 2, 202, 0.1, 0.5, 1.0, 2.0).unwrap();
    assert!((a * a / (b * b) - 2.0).abs() < 1e-12);
    assert_eq!(tune_beta_min(10, 2, 102, 0.1, 0.5, 1.0, 0.0).unwrap(), 0.0);
}

#[test]
fn delta1_matches_monte_carlo_residual_variance() {
    let model = random_model(5, 2, 3);
    let truth = model.support().clone();
    let alt = IndexSet::range(0, 5).difference(&truth).iter().take(2).collect::<IndexSet>();
    let s_only = truth.difference(&alt);
    let draws = 1_000_000;
    let chol = model.sigma().matrix().clone().cholesky().unwrap().l();
    let mut r = rng(31);
    let z = DMatrix::<f64>::from_fn(draws, 5, |_, _| StandardNormal.sample(&mut r));
    let x = z * chol.transpose();
    let target = columns(&x, s_only.as_slice()) * DVector::from_iterator(s_only.len(), s_only.iter().map(|j| model.beta()[j]));
    let resid = residual_svd(&columns(&x, alt.as_slice()), &target);
    let var = resid.norm_squared() / draws as f64;
    let want = delta1(&model, &truth, &alt).unwrap() * model.noise_var();
    let se = want * (2.0 / draws as f64).sqrt();
    assert!((var - want).abs() < 3.0 * se + 1e-12, "mc {var}, exact {want}");
}

#[test]
fn delta2_single_swap_matches_grid() {
    let mut r = rng(32);
    for seed in 0..40 {
        let model = random_model(6, 3, seed);
        let truth = model.support().clone();
        let out = IndexSet::range(0, 6).difference(&truth);
        let drop = truth.as_slice()[r.random_range(0..3)];
        let add = out.as_slice()[r.random_range(0..out.len())];
        let alt = truth.difference(&set(&[drop])).union(&set(&[add]));
        let theta = ThetaSpec::exact(6, 3, 0.2);
        let d2 = delta2(&model, &truth, &alt, &theta).unwrap();
        // Independent route: Schur complements by explicit inversion.
        let w = truth.intersection(&alt);
        let sig = model.sigma().matrix();
        let cond = schur_by_inverse(sig, &[add, drop], w.as_slice());
        let alpha_beta = cond[(0, 1)] / cond[(0, 0)] * model.beta()[drop];
        let m = DMatrix::from_element(1, 1, cond[(0, 0)]);
        let want = grid_qp(&DVector::from_vec(vec![alpha_beta]), &m, 0.2, 1e-4) / model.noise_var();
        assert!((d2.value - want).abs() < 1e-4, "seed {seed}: {} vs {want}", d2.value);
        assert!((d2.alpha_beta[0] - alpha_beta).abs() < 1e-9 * (1.0 + alpha_beta.abs()));
    }
}

#[test]
fn motivating_example_closed_forms() {
    let (bmin, bmax) = (0.1, 5.0);
    let (_, model) = make_motivating_example(6, 3, bmin, bmax).unwrap();
    let truth = IndexSet::range(0, 3);
    let theta = ThetaSpec::exact(6, 3, bmin);
    for r in 1..=3usize {
        let alt = IndexSet::range(r, 3).union(&IndexSet::range(3, 3 + r));
        let rf = r as f64;
        let d1 = delta1(&model, &truth, &alt).unwrap();
        assert!((d1 - rf * bmin * bmin / (1.0 + rf * rf * bmax * bmax)).abs() < 1e-10);
        let d2 = delta2(&model, &truth, &alt, &theta).unwrap().value;
        assert!(d2 >= rf * bmin * bmin / 4.0 - 1e-9);
    }
    let d1 = delta1(&model, &truth, &set(&[2, 3, 4])).unwrap();
    assert!((d1 - 0.02 / 101.0).abs() < 1e-12);
    assert!((irrepresentability_gamma(&model).unwrap() - 15.0 / 76f64.sqrt()).abs() < 1e-6);
    assert!((mutual_incoherence_mu(&model).unwrap() - 75.0 / 76.0).abs() < 1e-9);
}

#[test]
fn omega_matches_brute_force() {
    let model = random_model(8, 2, 8);
    let sig = model.sigma().matrix();
    let truth = model.support();
    let mut want = f64::INFINITY;
    for a in 0..8 {
        for b in (a + 1)..8 {
            let t = set(&[a, b]);
            if truth.is_subset(&t) {
                continue;
            }
            let cond = schur_by_inverse(sig, truth.difference(&t).as_slice(), t.as_slice());
            want = want.min(cond.symmetric_eigenvalues().min());
        }
    }
    assert!((omega_param(&model, 2).unwrap() - want).abs() < 1e-10);
    let (_, mot) = make_motivating_example(6, 3, 0.1, 1.0).unwrap();
    assert!(omega_param(&mot, 3).unwrap() <= 0.1 + 1e-12);
}

#[test]
fn irrepresentability_is_permutation_invariant() {
    let spec = gen_er(7, 2, &GenParams::default(), 4).unwrap();
    let model = attach_target(&spec, &set(&[1, 4]), &[0.3, -0.5], 1.0).unwrap();
    let perm = [3, 0, 6, 1, 5, 2, 4];
    let permuted = spec.relabel(&perm);
    let model_p = attach_target(&permuted, &set(&[perm[1], perm[4]]), &[0.3, -0.5], 1.0).unwrap();
    let (a, b) = (irrepresentability_gamma(&model).unwrap(), irrepresentability_gamma(&model_p).unwrap());
    assert!((a - b).abs() < 1e-10);
    let mu = mutual_incoherence_mu(&model).unwrap();
    assert!((0.0..1.0).contains(&mu));
}

#[test]
fn kl_matches_monte_carlo() {
    let model = random_model(5, 2, 9);
    let alpha = DVector::from_vec(vec![0.0, 0.4, -0.3, 0.0, 0.2]);
    let exact = kl_linear_models(model.beta(), &alpha, model.sigma(), model.noise_var()).unwrap();
    let draws = 400_000;
    let chol = model.sigma().matrix().clone().cholesky().unwrap().l();
    let mut r = rng(41);
    let diff = model.beta() - &alpha;
    let mut acc = 0.0;
    let mut acc_sq = 0.0;
    for _ in 0..draws {
        let z = DVector::from_fn(5, |_, _| StandardNormal.sample(&mut r));
        let v = (&chol * z).dot(&diff).powi(2) / (2.0 * model.noise_var());
        acc += v;
        acc_sq += v * v;
    }
    let mean = acc / draws as f64;
    let se = ((acc_sq / draws as f64 - mean * mean) / draws as f64).sqrt();
    assert!((mean - exact).abs() < 3.0 * se, "mc {mean}, exact {exact}, se {se}");
}

#[test]
fn kl_decomposition_sums() {
    let mut r = rng(42);
    for seed in 0..50 {
        let model = random_model(7, 3, 100 + seed);
        let truth = model.support().clone();
        let alt = random_alternative(7, 3, &truth, &mut r);
        let alpha = DVector::from_fn(7, |j, _| if alt.contains(j) { r.random_range(0.2..1.0) } else { 0.0 });
        let kl = kl_linear_models(model.beta(), &alpha, model.sigma(), 1.0).unwrap();
        let parts = kl_decomposition(model.beta(), &alpha, model.sigma(), 1.0).unwrap();
        assert!((parts.two_term_sum() - 2.0 * kl).abs() < 1e-9 * (1.0 + kl));
        assert!((parts.three_term_sum() - 2.0 * kl).abs() < 1e-9 * (1.0 + kl));
    }
    let model = random_model(6, 2, 7);
    let parts = kl_decomposition(model.beta(), model.beta(), model.sigma(), 1.0).unwrap();
    assert!(parts.delta1.abs() < 1e-12 && parts.delta2_tilde.abs() < 1e-12 && parts.delta3.abs() < 1e-12);
    let disjoint = IndexSet::range(0, 6).difference(model.support());
    let alpha = DVector::from_fn(6, |j, _| if disjoint.as_slice()[..2].contains(&j) { 0.5 } else { 0.0 });
    let parts = kl_decomposition(model.beta(), &alpha, model.sigma(), 1.0).unwrap();
    assert_eq!(parts.delta3, 0.0);
    assert!((parts.delta2 - parts.delta2_tilde).abs() < 1e-10);
}

#[test]
fn single_layer_swap_kl() {
    // Root 0 with noise 1, children 1..4 with weight 2 and noise 1.
    let edges: Vec<(usize, usize, f64)> = (1..4).map(|k| (0, k, 2.0)).collect();
    let spec = SemSpec::from_edges(4, &edges, vec![1.0; 4]).unwrap();
    let first = attach_target(&spec, &set(&[0, 1]), &[0.1, 0.1], 1.0).unwrap();
    let second = attach_target(&spec, &set(&[0, 2]), &[0.1, 0.1], 1.0).unwrap();
    let kl = kl_linear_models(first.beta(), second.beta(), first.sigma(), 1.0).unwrap();
    assert!((kl - 0.01).abs() < 1e-12);
}

#[test]
fn collider_pair_kl_is_quadratic() {
    let dag = Dag::new(5, [(0, 2), (1, 2), (2, 3), (3, 4)]).unwrap();
    let kl = |delta: f64| {
        let (a, b) = make_indistinguishable_pair(&dag, delta).unwrap();
        assert_eq!(a.support().symmetric_difference(b.support()).len(), 2);
        kl_linear_models(a.beta(), b.beta(), a.sigma(), a.noise_var()).unwrap()
    };
    for delta in [1e-1, 1e-2] {
        let ratio = kl(delta / 10.0) / kl(delta);
        assert!((0.008..=0.012).contains(&ratio), "ratio {ratio}");
    }
}

#[test]
fn gpc_signal_matches_monte_carlo_variance() {
    let ex = make_gpc_example(4, 2.0, 0.1, 0.5, &set(&[5])).unwrap();
    let truth = ex.model.support().clone();
    let exact = ex.model.sigma().quad_form(&(ex.model.beta() - &ex.alt_alpha)) / ex.model.noise_var();
    let theta = ThetaSpec::exact(6, 4, 0.1);
    let rep = signal_report(&ex.model, &truth, &ex.alt_support, &theta).unwrap();
    assert!(rep.max_delta() <= exact + 1e-12);
    let draws = 400_000;
    let chol = ex.model.sigma().matrix().clone().cholesky().unwrap().l();
    let diff = ex.model.beta() - &ex.alt_alpha;
    let mut r = rng(51);
    let (mut acc, mut acc_sq) = (0.0, 0.0);
    for _ in 0..draws {
        let z = DVector::from_fn(6, |_, _| StandardNormal.sample(&mut r));
        let v = (&chol * z).dot(&diff).powi(2);
        acc += v;
        acc_sq += v * v;
    }
    let mean = acc / draws as f64;
    let se = ((acc_sq / draws as f64 - mean * mean) / draws as f64).sqrt();
    assert!((mean - exact).abs() < 3.0 * se, "mc {mean}, exact {exact}");
    let bound = |b: f64| 0.01 * 0.25 / (b * b);
    assert!(rep.max_delta() <= bound(2.0) + 1e-9);
    assert!((bound(2.0) / bound(1.0) - 0.25).abs() < 1e-15);
}

#[test]
fn global_signal_identity_design() {
    let (_, model) = make_independent_design(2, 1, 1.0, 0.1).unwrap();
    let theta = ThetaSpec::exact(2, 1, 0.1);
    let (g, arg) = global_signal(&model, &theta, &CandidateFamily::ExactS).unwrap();
    assert!((g - 0.01).abs() < 1e-12);
    assert_eq!(arg, set(&[1]));
    let (_, model) = make_independent_design(6, 3, 1.0, 0.1).unwrap();
    assert!((global_signal_bss(&model, &CandidateFamily::ExactS).unwrap() - 0.01).abs() < 1e-12);
    let rep = proportional_property_ratio(&model, &ThetaSpec::exact(6, 3, 0.1), &CandidateFamily::ExactS).unwrap();
    assert!((rep.ratio - 1.0).abs() < 1e-9);
}

#[test]
fn global_signal_scales_quadratically() {
    let (_, model) = make_motivating_example(6, 2, 0.1, 2.0).unwrap();
    let scaled = LinearModel::new(model.beta() * 3.0, model.sigma().clone(), 1.0).unwrap();
    let a = global_signal(&model, &ThetaSpec::exact(6, 2, 0.1), &CandidateFamily::ExactS).unwrap().0;
    let b = global_signal(&scaled, &ThetaSpec::exact(6, 2, 0.3), &CandidateFamily::ExactS).unwrap().0;
    assert!((b / a - 9.0).abs() < 1e-8);
    let bss = global_signal_bss(&model, &CandidateFamily::ExactS).unwrap();
    assert!(bss <= a + 1e-15);
}

#[test]
fn motivating_bss_signal() {
    let (s, bmin, bmax) = (3usize, 0.1, 5.0);
    let (_, model) = make_motivating_example(6, s, bmin, bmax).unwrap();
    let g = global_signal_bss(&model, &CandidateFamily::ExactS).unwrap();
    let disjoint = s as f64 * bmin * bmin / (1.0 + (s * s) as f64 * bmax * bmax) / s as f64;
    assert!((g - disjoint).abs() < 1e-12);
}

#[test]
fn tilde_dominates_and_signals_nonnegative() {
    let mut r = rng(61);
    for seed in 0..100 {
        let model = random_model(7, 3, 500 + seed);
        let truth = model.support().clone();
        let alt = random_alternative(7, 3, &truth, &mut r);
        let theta = ThetaSpec::exact(7, 3, r.random_range(0.0..0.5));
        let d1 = delta1(&model, &truth, &alt).unwrap();
        let d2 = delta2(&model, &truth, &alt, &theta).unwrap().value;
        let dt = delta2_tilde(&model, &truth, &alt, &theta).unwrap();
        assert!(d1 >= 0.0 && d2 >= 0.0);
        assert!(d2 <= dt + 1e-9, "seed {seed}: {d2} > {dt}");
    }
    let model = random_model(7, 3, 1);
    let zero = ThetaSpec::exact(7, 3, 0.0);
    let alt = random_alternative(7, 3, model.support(), &mut r);
    assert_eq!(delta2(&model, model.support(), &alt, &zero).unwrap().value, 0.0);
    assert_eq!(delta2_tilde(&model, model.support(), &alt, &zero).unwrap(), 0.0);
    assert!(min_eigenvalue(model.sigma()) > 0.0);
}
