use contactdyn::expr::{Bindings, Expr};
use contactdyn::hamiltonian::ContactHamiltonianSystem;
use contactdyn::integrate::{integrate, observe, IntegratorConfig};
use contactdyn::sampling::residual_scale;
use proptest::prelude::*;

const FAMILY: &str = "a*p^2/2 + k*q^2/2 + c*sin(q)*s + gamma*s + d*q*p*s + e*s^2/2";

fn system() -> impl Strategy<Value = ContactHamiltonianSystem> {
    (0.5f64..2.0, -1.0f64..2.0, -1.0f64..1.0, -1.0f64..1.0, -0.5f64..0.5, -0.5f64..0.5).prop_map(|(a, k, c, gamma, d, e)| {
        let params = Bindings::new()
            .with("a", a)
            .with("k", k)
            .with("c", c)
            .with("gamma", gamma)
            .with("d", d)
            .with("e", e);
        ContactHamiltonianSystem::parse(&["q"], &["p"], "s", FAMILY, params).unwrap()
    })
}

fn state() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, 3)
}

/// `(H_p, -(H_q + p H_s), p H_p - H)` with hand-written partials.
fn hand_field(sys: &ContactHamiltonianSystem, x: &[f64]) -> [f64; 3] {
    let g = |n: &str| sys.params().get(n).unwrap();
    let (a, k, c, gamma, d, e) = (g("a"), g("k"), g("c"), g("gamma"), g("d"), g("e"));
    let (q, p, s) = (x[0], x[1], x[2]);
    let h = a * p * p / 2.0 + k * q * q / 2.0 + c * q.sin() * s + gamma * s + d * q * p * s + e * s * s / 2.0;
    let h_q = k * q + c * q.cos() * s + d * p * s;
    let h_p = a * p + d * q * s;
    let h_s = c * q.sin() + gamma + d * q * p + e * s;
    [h_p, -(h_q + p * h_s), p * h_p - h]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn vector_field_matches_hand_derivation(sys in system(), x in state()) {
        let xv = sys.hamiltonian_vector_field().eval(&sys.bind(&x)).unwrap();
        let oracle = hand_field(&sys, &x);
        for i in 0..3 {
            prop_assert!((xv.0[i] - oracle[i]).abs() <= 1e-12 * (1.0 + oracle[i].abs()));
        }
    }

    #[test]
    fn structural_identities(sys in system(), x in state()) {
        let b = sys.bind(&x);
        let h = sys.hamiltonian().eval(&b).unwrap();
        let scale = residual_scale(&x, h);
        let xh = sys.hamiltonian_vector_field();
        prop_assert!(sys.hamilton_equation_residuals(&xh, &b).unwrap().max() <= 1e-10 * scale);
        prop_assert!(sys.dissipation_rate_residual(&b).unwrap().abs() <= 1e-10 * scale);
        let (r1, r2) = sys.reeb_residuals(&b).unwrap();
        prop_assert!(r1 <= 1e-12 && r2.abs() <= 1e-12);
        // flat(X_H) = dH - (R(H) + H) eta
        let flat = sys.flat_map(&xh, &b).unwrap();
        let d_h: Vec<f64> = sys.coords().iter().map(|c| sys.hamiltonian().diff(c).eval(&b).unwrap()).collect();
        let rate = sys.reeb_rate().eval(&b).unwrap();
        let eta = [-x[1], 0.0, 1.0];
        for i in 0..3 {
            prop_assert!((flat[i] - (d_h[i] - (rate + h) * eta[i])).abs() <= 1e-10 * scale);
        }
        if h.abs() > 0.1 {
            let (o1, o2) = sys.omega_residuals(&xh, &b).unwrap();
            prop_assert!(o1 <= 1e-10 * scale && o2.abs() <= 1e-10 * scale, "{o1} {o2}");
        }
    }

    #[test]
    fn perturbed_field_is_rejected(sys in system(), x in state(), i in 0usize..3) {
        let b = sys.bind(&x);
        let mut comps = sys.hamiltonian_vector_field().components().to_vec();
        comps[i] = comps[i].clone() + Expr::constant(0.5);
        let bad = contactdyn::field::VectorFieldExpr::new(comps);
        prop_assert!(sys.hamilton_equation_residuals(&bad, &b).unwrap().max() >= 0.49);
    }
}

#[test]
fn omega_check_refuses_near_the_zero_level() {
    let sys = ContactHamiltonianSystem::parse(&["q"], &["p"], "s", "p^2/2 + q^2/2 + s", Bindings::new()).unwrap();
    let xh = sys.hamiltonian_vector_field();
    assert!(sys.omega_residuals(&xh, &sys.bind(&[0.0, 0.0, 1e-9])).is_err());
}

#[test]
fn constant_rate_gives_exponential_energy_decay() {
    let params = Bindings::new().with("m", 1.0).with("omega", 2.0).with("gamma", 0.3);
    let sys = ContactHamiltonianSystem::parse(&["q"], &["p"], "s", "p^2/(2*m) + m*omega^2*q^2/2 + gamma*s", params).unwrap();
    let flow = sys.dynamics("oscillator").compile().unwrap();
    let traj = integrate(&flow, &[1.0, 0.5, 0.2], &IntegratorConfig::rk4(1e-3, 5.0), "oscillator").unwrap();
    let h = observe(&traj, sys.hamiltonian(), sys.chart()).unwrap();
    for (t, hv) in traj.times.iter().zip(&h).step_by(250) {
        let expected = h[0] * (-0.3 * t).exp();
        assert!((hv - expected).abs() <= 1e-9 * expected.abs().max(1.0), "t = {t}");
    }
}
