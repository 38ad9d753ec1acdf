mod common;

use common::{boosted_grid, random_boosted};
use num_complex::Complex64 as C64;
use trapwave::galilean::{galilean_fn, GalileanParams};
use trapwave::hermite::{synthesize, Analyzer};
use trapwave::observables::observables_grid;
use trapwave::oracle::{integrate, run, IntegrateOptions};
use trapwave::propagator::{phi_rate, spectral_evolve, ExactPropagator, Model};
use trapwave::{BasisSpec, GridSpec, GridState};

fn grid() -> GridSpec {
    GridSpec::new(1, 16.0, 1024, 2e-3).unwrap()
}

#[test]
fn exact_propagator_matches_oracle_both_models() {
    let g = grid();
    let (lambda, eta) = (0.4, 0.8);
    for (seed, model) in [(11u64, Model::H), (12, Model::HPrime)] {
        let (c, a, b) = random_boosted(seed, 12);
        let u0 = boosted_grid(&c, &a, &b, &g);
        let p = ExactPropagator::from_grid(model, &u0, lambda, eta, 64).unwrap();
        let traj = integrate(&u0, p.params.period(), 5, lambda, eta, model, IntegrateOptions::default()).unwrap();
        for (t, s) in traj.times.iter().zip(&traj.states) {
            let e = p.state_on_grid(*t, &g).unwrap().state.rel_l2_distance(s);
            assert!(e < 1e-6, "{model:?} t={t}: {e}");
        }
    }
}

#[test]
fn models_differ_by_a_gauge() {
    let g = grid();
    let (lambda, eta) = (0.5, 1.0);
    let (c, a, b) = random_boosted(21, 12);
    let u0 = boosted_grid(&c, &a, &b, &g);
    let h = ExactPropagator::from_grid(Model::H, &u0, lambda, eta, 64).unwrap();
    let hp = ExactPropagator::from_grid(Model::HPrime, &u0, lambda, eta, 64).unwrap();
    for t in [0.3, 1.7, 4.0] {
        let u = h.state_on_grid(t, &g).unwrap().state;
        let v = hp.state_on_grid(t, &g).unwrap().state;
        let amp = u.values.iter().zip(&v.values).map(|(x, y)| (x.norm() - y.norm()).abs()).fold(0.0, f64::max);
        assert!(amp < 1e-8);
        // ‖xu‖² = (2/η)(Ψ' - Φ')
        let rate = h.psi_closed_form().rate(t) - phi_rate(&h.params, t);
        let m2 = observables_grid(&u, lambda, eta).m2;
        assert!((m2 - 2.0 / eta * rate).abs() < 1e-8 * m2, "t={t}");
    }
}

#[test]
fn two_conjugation_orders_agree() {
    // G_κ(t)^{-1} U_κ(t) u₀ = U_κ(t) G_κ(0)^{-1} u₀, then G_λ(t) and the phase.
    let g = grid();
    let (lambda, eta) = (0.3, 1.0);
    let (c, a, b) = random_boosted(31, 10);
    let u0 = boosted_grid(&c, &a, &b, &g);
    let p = ExactPropagator::from_grid(Model::H, &u0, lambda, eta, 64).unwrap();
    let kappa = p.params.kappa;
    let an = Analyzer::new(BasisSpec::new(1, kappa, 96).unwrap()).unwrap();
    let direct = an.analyze_grid(&u0).unwrap();
    assert!(direct.truncation_loss < 1e-10);
    for t in [0.8, 2.6] {
        let evolved = spectral_evolve(&direct.state, t);
        let back = GalileanParams::new(t, kappa, p.params.a.clone(), p.params.b.clone()).inverse();
        let inner = galilean_fn(&back, |x| evolved.evaluate(x));
        let outer = galilean_fn(&p.params.transport(t), inner);
        let phase = C64::from_polar(1.0, -p.global_phase(t).unwrap());
        let first = GridState::from_fn(g, |x| phase * outer(x));
        let second = p.state_on_grid(t, &g).unwrap().state;
        assert!(first.rel_l2_distance(&second) < 1e-8, "t={t}");
    }
}

#[test]
fn lp_norms_match_linear_evolution() {
    let g = grid();
    let (lambda, eta) = (0.0, 1.0);
    let (c, a, b) = random_boosted(41, 10);
    let u0 = boosted_grid(&c, &a, &b, &g);
    let p = ExactPropagator::from_grid(Model::H, &u0, lambda, eta, 64).unwrap();
    let an = Analyzer::new(BasisSpec::new(1, p.params.kappa, 96).unwrap()).unwrap();
    let direct = an.analyze_grid(&u0).unwrap().state;
    for t in [0.5, 2.2, 5.0] {
        let u = p.state_on_grid(t, &g).unwrap().state;
        let lin = synthesize(&spectral_evolve(&direct, t), &g).unwrap();
        for q in [2.0, 4.0] {
            let (x, y) = (u.lp_norm(q), lin.lp_norm(q));
            assert!((x - y).abs() < 1e-6 * y, "p={q} t={t}");
        }
    }
}

#[test]
fn conservation_over_one_period() {
    let g = grid();
    let (lambda, eta) = (0.6, 0.9);
    let (c, a, b) = random_boosted(51, 10);
    let u0 = boosted_grid(&c, &a, &b, &g);
    let o0 = observables_grid(&u0, lambda, eta);
    for model in [Model::H, Model::HPrime] {
        let p = ExactPropagator::from_grid(model, &u0, lambda, eta, 64).unwrap();
        let traj = integrate(&u0, p.params.period(), 4, lambda, eta, model, IntegrateOptions::default()).unwrap();
        for (t, s) in traj.times.iter().zip(&traj.states) {
            let exact = p.state_on_grid(*t, &g).unwrap().state;
            for u in [&exact, s] {
                let o = observables_grid(u, lambda, eta);
                assert!((o.mass - o0.mass).abs() < 1e-9 * o0.mass);
                assert!((o.energy - o0.energy).abs() < 1e-7 * o0.energy.abs());
                assert!((o.x[0] - p.params.mass * p.center(*t)[0]).abs() < 1e-8);
            }
        }
    }
}

#[test]
fn strang_converges_at_second_order() {
    let g = GridSpec::new(1, 16.0, 512, 1e-3).unwrap();
    let (lambda, eta) = (0.5, 1.0);
    let (c, a, b) = random_boosted(61, 8);
    let u0 = boosted_grid(&c, &a, &b, &g);
    let p = ExactPropagator::from_grid(Model::H, &u0, lambda, eta, 64).unwrap();
    let t = 1.0;
    let exact = p.state_on_grid(t, &g).unwrap().state;
    let errs: Vec<f64> = [0.02, 0.002]
        .iter()
        .map(|&dt| run(&u0, &[0.0, t], dt, lambda, eta, Model::H).0[1].rel_l2_distance(&exact))
        .collect();
    let slope = (errs[0] / errs[1]).log10();
    assert!((1.8..=2.2).contains(&slope), "slope {slope}, errors {errs:?}");
}
