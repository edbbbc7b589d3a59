use gardner_core::exact::{gardner_soliton, resolved_grid, BreatherParams, Phase, SolitonParams};
use gardner_core::exec::Execution;
use gardner_core::fields::{integrate, Field};
use gardner_core::identities::*;
use gardner_core::sweep;

fn opts() -> CheckOptions {
    CheckOptions::default()
}

#[test]
fn gated_identities_hold_on_the_standard_lattice() {
    let mut failures = Vec::new();
    for p in sweep::standard().points() {
        let (tp, _) = p.period();
        for t in [0.0, 0.25 * tp, 0.5 * tp] {
            for r in check_all(&p, t, &opts()).unwrap() {
                if r.gated && !r.pass {
                    failures.push(format!("{} at {:?} t={t}: {:.2e}", r.identity, p, r.relative()));
                }
            }
        }
    }
    assert!(failures.is_empty(), "{failures:#?}");
}

#[test]
fn residuals_do_not_depend_on_shifts() {
    let base = BreatherParams::at_mu_fraction(0.5, 2.0, 0.5).unwrap();
    for a in [-3.0, 0.0, 3.0] {
        for b in [-3.0, 0.0, 3.0] {
            let p = base.shifted(a, b);
            for r in check_all(&p, 0.2, &opts()).unwrap().into_iter().filter(|r| r.gated) {
                assert!(r.relative() < 1e-10, "{} at shifts ({a}, {b}): {:e}", r.identity, r.relative());
            }
        }
    }
}

#[test]
fn stationary_equation_holds_over_a_half_period() {
    let p = BreatherParams::at_mu_fraction(2.0, 1.0, 0.9).unwrap().shifted(1.0, -2.0);
    let (tp, _) = p.period();
    for t in [0.0, 0.25 * tp, 0.5 * tp] {
        let [canon, _, _] = check_elliptic_gardner(&p, t).unwrap();
        assert!(canon.relative() < 1e-12, "t = {t}: {:e}", canon.relative());
    }
}

#[test]
fn alternative_stationary_forms_are_visible() {
    let p = BreatherParams::at_mu_fraction(2.0, 0.5, 0.5).unwrap();
    let [canon, quad, grad] = check_elliptic_gardner(&p, 0.0).unwrap();
    assert!(canon.pass && canon.gated);
    assert!(!quad.pass && !quad.gated);
    assert!(!grad.pass && !grad.gated);
    assert!(quad.relative() > 1e-3 && grad.relative() > 1e-3);

    // At μ = 0 the quadratic variant collapses onto the canonical form, the
    // gradient variant does not.
    let p0 = BreatherParams::new(2.0, 0.5, 0.0).unwrap();
    let [c0, q0, g0] = check_elliptic_gardner(&p0, 0.0).unwrap();
    assert!(c0.relative() < 1e-8 && q0.relative() < 1e-8);
    assert_eq!(c0.sup_residual, q0.sup_residual);
    assert!(!g0.pass);
}

#[test]
fn mu_zero_reductions() {
    let p = BreatherParams::new(1.0, 1.5, 0.0).unwrap();
    for r in check_square_identity(&p, 0.3).unwrap() {
        assert!(r.relative() < 1e-10, "{}", r.identity);
    }
    let [g, nv] = check_second_order(&p, 0.3).unwrap();
    assert_eq!(g.sup_residual, nv.sup_residual);
    let [g, nv] = check_first_order(&p, 0.3).unwrap();
    assert_eq!(g.sup_residual, nv.sup_residual);
    assert!(check_mixed_identity(&p, 0.3).unwrap().relative() < 1e-10);
    assert_eq!(check_nvbc_reduction(&p, 0.3).unwrap().sup_residual, 0.0);
}

#[test]
fn reduction_is_pointwise_exact() {
    for (a, b, f) in [(0.5, 0.5, 0.1), (1.0, 1.0, 0.5), (2.0, 2.0, 0.9)] {
        let p = BreatherParams::at_mu_fraction(a, b, f).unwrap();
        let (tp, _) = p.period();
        for t in [0.0, tp] {
            let r = check_nvbc_reduction(&p, t).unwrap();
            assert!(r.sup_residual < 1e-12, "{r:?}");
        }
    }
}

#[test]
fn soliton_first_and_second_order_identities() {
    for (c, mu) in [(1.0, 0.5), (0.3, -0.4), (2.5, 1.0), (1.0, 0.0)] {
        let p = SolitonParams::new(c, mu).unwrap();
        let mut worst = (0.0f64, 0.0f64);
        for i in 0..400 {
            let s = -20.0 + 0.1 * i as f64;
            let q = gardner_soliton(&p, s);
            let (v, dq, ddq) = (q.value, q.dx[0], q.dx[1]);
            let second = ddq - c * v + 3.0 * mu * v * v + v.powi(3);
            let first = dq * dq - c * v * v + 2.0 * mu * v.powi(3) + 0.5 * v.powi(4);
            worst = (worst.0.max(second.abs()), worst.1.max(first.abs()));
        }
        assert!(worst.0 < 1e-10 && worst.1 < 1e-10, "c={c} mu={mu}: {worst:?}");
    }
}

/// Both sides of the Wronskian identity tend to zero at `+∞`: the integrand
/// has zero total and the right side decays.
#[test]
fn wronskian_integral_endpoints() {
    let p = BreatherParams::at_mu_fraction(1.0, 1.0, 0.5).unwrap().shifted(0.4, 0.7);
    let r = check_wronskian_integral(&p, 0.0).unwrap();
    assert!(r.relative() < 1e-10, "{:e}", r.relative());

    let g = resolved_grid(&p, 40.0).unwrap();
    let c = p.center(0.0);
    let k = 2.0 * 2f64.sqrt();
    let integrand = Field::from_fn(g, |x| {
        let ph = Phase::of(&p, 0.0, c + x, 3);
        let (b11, b12, b22) = (ph.theta(0, 0, 2, 0), ph.theta(0, 0, 1, 1), ph.theta(0, 0, 0, 2));
        k * k * (b12 * b12 - b11 * b22)
    });
    let scale = integrand.sup_norm();
    assert!(integrate(&integrand).abs() < 1e-10 * scale);

    let far = Phase::of(&p, 0.0, c + 30.0, 3);
    let rhs = -(p.mu + k * far.theta(1, 0, 0, 0)) * k * far.theta(0, 0, 2, 0) + far.log_density(1, 0, 2, 0);
    assert!(rhs.abs() < 1e-10, "{rhs:e}");
}

#[test]
fn sequential_and_parallel_reports_agree() {
    let p = BreatherParams::at_mu_fraction(1.0, 2.0, 0.5).unwrap();
    let seq = CheckOptions { execution: Execution::Sequential, ..opts() };
    let a = check_all(&p, 0.1, &seq).unwrap();
    let b = check_all(&p, 0.1, &opts()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn identity_names_round_trip() {
    for id in IdentityId::ALL {
        assert_eq!(id.name().parse::<IdentityId>().unwrap(), id);
    }
    assert!("nine".parse::<IdentityId>().is_err());
    assert_eq!(IdentityId::ALL.iter().filter(|id| id.gated()).count(), 11);
}
