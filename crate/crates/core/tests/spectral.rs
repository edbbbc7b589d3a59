use gardner_core::exact::{kernel_directions, scaling_directions, BreatherParams};
use gardner_core::fields::{h2_norm, inner_product, sobolev_norm_sq, Field, Grid};
use gardner_core::functionals::{closed_form, Profile, Quantity};
use gardner_core::spectral::*;
use gardner_core::sweep;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn p0() -> BreatherParams {
    BreatherParams::at_mu_fraction(1.0, 1.0, 0.5).unwrap()
}

fn noise(g: &Grid, rng: &mut ChaCha8Rng) -> Field {
    let w = band_limited_noise(g, 0.3, rng).unwrap();
    w.zip_with(&Field::from_fn(*g, |x| (-(x / 6.0).powi(2)).exp()), |a, b| a * b).unwrap()
}

#[test]
fn far_field_operator_bottoms_out_at_the_continuum_edge() {
    let g = Grid::new(40.0, 256).unwrap();
    for (a, b) in [(1.0, 2.0), (2.0, 1.0), (1.0, 1.0)] {
        let p = BreatherParams::new(a, b, 0.0).unwrap();
        let op = assemble_from(&p, 0.0, Potentials::free(&p, &g)).unwrap();
        let low = lowest_eigenpairs(&op, 1).unwrap().values[0];
        let edge = continuum_edge(&p);
        assert!(low >= edge - 1e-9 && low < edge * 1.01, "({a}, {b}): {low} vs {edge}");
    }
}

#[test]
fn matrix_is_symmetric_and_matches_the_form() {
    let p = p0();
    let g = Grid::new(40.0, 512).unwrap();
    let op = assemble(&p, 0.3, &g).unwrap();
    assert_eq!(op.symmetry_defect(), 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let (w, z) = (noise(&g, &mut rng), noise(&g, &mut rng));
        let a = inner_product(&w, &op.apply(&z).unwrap()).unwrap();
        let b = inner_product(&z, &op.apply(&w).unwrap()).unwrap();
        assert!((a - b).abs() < 1e-9 * a.abs().max(b.abs()), "{a} {b}");
    }
    for _ in 0..20 {
        let z = noise(&g, &mut rng);
        let q = quadratic_form(&z, &p, 0.3).unwrap();
        let m = inner_product(&z, &op.apply(&z).unwrap()).unwrap();
        assert!((q - m).abs() < 1e-8 * q.abs(), "{q} {m}");
        let free = apply_operator(&op.potentials, &z).unwrap();
        let mf = inner_product(&z, &free).unwrap();
        assert!((mf - m).abs() < 1e-8 * m.abs());
    }
}

#[test]
fn kernel_directions_are_annihilated() {
    for p in [p0(), BreatherParams::at_mu_fraction(2.0, 0.5, 0.9).unwrap().shifted(0.3, -1.0)] {
        let g = spectral_grid(&p, 0.2).unwrap();
        let op = assemble(&p, 0.2, &g).unwrap();
        let (b1, b2) = kernel_fields(&p, 0.2, &g).unwrap();
        for b in [&b1, &b2] {
            let lb = op.apply(b).unwrap();
            let rel = inner_product(&lb, &lb).unwrap().sqrt() / h2_norm(b);
            assert!(rel < 1e-6, "{rel:e}");
            let q = quadratic_form(b, &p, 0.2).unwrap();
            assert!(q.abs() < 1e-7 * sobolev_norm_sq(b, 2).unwrap(), "{q:e}");
        }
    }
}

#[test]
fn scaling_directions_match_closed_forms() {
    let p = p0();
    let g = spectral_grid(&p, 0.0).unwrap();
    let la = frame_sample(&p, 0.0, &g, 0, |x| scaling_directions(&p, 0.0, x).map(|d| d.0)).unwrap();
    let q = quadratic_form(&la, &p, 0.0).unwrap();
    assert!((q - 37.647_058_8).abs() < 1e-5 * 37.65, "{q}");

    for p in sweep::standard().points().into_iter().step_by(4) {
        let g = resolved_grid_for(&p);
        let (la, lb) = (
            frame_sample(&p, 0.0, &g, 0, |x| scaling_directions(&p, 0.0, x).map(|d| d.0)).unwrap(),
            frame_sample(&p, 0.0, &g, 0, |x| scaling_directions(&p, 0.0, x).map(|d| d.1)).unwrap(),
        );
        let qa = quadratic_form(&la, &p, 0.0).unwrap();
        let qb = quadratic_form(&lb, &p, 0.0).unwrap();
        let ca = closed_form(Quantity::QLambdaAlpha, Profile::Breather(p)).unwrap();
        let cb = closed_form(Quantity::QLambdaBeta, Profile::Breather(p)).unwrap();
        assert!(ca > 0.0 && cb < 0.0);
        assert!((qa - ca).abs() < 1e-5 * ca.abs(), "{p:?}: {qa} vs {ca}");
        assert!((qb - cb).abs() < 1e-5 * cb.abs(), "{p:?}: {qb} vs {cb}");
    }
}

fn resolved_grid_for(p: &BreatherParams) -> Grid {
    gardner_core::exact::resolved_grid(p, 40.0).unwrap()
}

#[test]
fn one_negative_direction_and_a_two_dimensional_kernel() {
    let p = p0();
    let tp = p.period().0;
    for t in [0.0, 0.25 * tp] {
        let g = spectral_grid(&p, t).unwrap();
        let op = assemble(&p, t, &g).unwrap();
        let sp = spectrum(&op, 8).unwrap();
        let r = &sp.report;
        assert!(r.structure_ok(), "{r:?}");
        assert!(r.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(negative_count_inertia(&op, r.tolerance).unwrap(), 1);

        let bm = b_minus_one(&sp, &p).unwrap();
        assert!((inner_product(&bm, &bm).unwrap() - 1.0).abs() < 1e-10);
        let (b1, b2) = kernel_fields(&p, t, &g).unwrap();
        for b in [&b1, &b2] {
            let c = inner_product(&bm, b).unwrap() / inner_product(b, b).unwrap().sqrt();
            assert!(c.abs() < 1e-6, "{c:e}");
        }
        let v = bm.values();
        assert!(v[0].abs().max(v[v.len() - 1].abs()) < 1e-5);
    }
}

#[test]
fn lambda0_moves_continuously_with_mu() {
    let mut prev: Option<f64> = None;
    for k in 1..=9 {
        let p = BreatherParams::at_mu_fraction(1.0, 1.0, 0.1 * k as f64).unwrap();
        let g = Grid::new(40.0, 1024).unwrap();
        let sp = spectrum(&assemble(&p, 0.0, &g).unwrap(), 4).unwrap();
        let l0 = sp.report.lambda0_sq.sqrt();
        if let Some(q) = prev {
            assert!((l0 - q).abs() < 0.5 * q.min(l0), "{q} -> {l0}");
        }
        prev = Some(l0);
    }
}

#[test]
fn b_zero_solves_the_inhomogeneous_equation() {
    for (a, b, f) in [(1.0, 1.0, 0.5), (0.5, 1.0, 0.9), (2.0, 0.5, 0.1)] {
        let p = BreatherParams::at_mu_fraction(a, b, f).unwrap();
        let g = spectral_grid(&p, 0.0).unwrap();
        let r = b_zero_check(&p, 0.0, &g).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(r.residual < 1e-7 && r.q_b0 < 0.0 && r.pairing_error() < 1e-7);
    }
}

#[test]
fn expanded_form_differs_from_the_pairing() {
    let p = p0();
    let g = spectral_grid(&p, 0.0).unwrap();
    let z = Field::from_fn(g, |x| (-(x * x) / 4.0).exp() * (x + 0.3).cos());
    let q = quadratic_form(&z, &p, 0.0).unwrap();
    let op = assemble(&p, 0.0, &g).unwrap();
    let m = inner_product(&z, &op.apply(&z).unwrap()).unwrap();
    let e = quadratic_form_expanded(&z, &p, 0.0).unwrap();
    assert!((q - m).abs() < 1e-8 * q.abs());
    assert!((e - m).abs() > 1e-2 * q.abs(), "{e} {m}");
}

#[test]
fn wronskian_closed_form_is_minus_the_determinant() {
    for p in sweep::standard().points() {
        let q = p.shifted(0.7, -0.4);
        for t in [0.0, 0.3] {
            let e = wronskian_max_rel_err(&q, t, 20.0, 801).unwrap();
            assert!(e < 1e-8, "{q:?} t={t}: {e:e}");
        }
    }
    let p = p0();
    let (b1, b2) = kernel_directions(&p, 0.1, 0.4).unwrap();
    let w = wronskian_numeric(&p, 0.1, 0.4).unwrap();
    let swapped = b2.value * b1.dx[0] - b1.value * b2.dx[0];
    assert_eq!(w, -swapped);
}

#[test]
fn mu_zero_wronskian_has_the_mkdv_structure() {
    let p = BreatherParams::new(1.0, 1.5, 0.0).unwrap();
    for x in [-3.0, -0.5, 0.0, 0.7, 2.0] {
        let f = (2.0 * p.beta * x).sinh() - p.beta / p.alpha * (2.0 * p.alpha * x).sin();
        assert!((f_mu(&p, 0.0, x) - f).abs() < 1e-12 * f.abs().max(1.0));
    }
}

#[test]
fn wronskian_prefactor_is_positive() {
    for p in sweep::standard().points() {
        assert!(wronskian_k(&p) > 0.0);
        let edge = p.with_mu(p.mu_max() * (1.0 - 1e-9)).unwrap();
        assert!(wronskian_k(&edge) > 0.0);
    }
}

#[test]
fn f_mu_has_one_root_and_it_is_the_wronskian_zero() {
    let p = p0();
    let s = f_mu_root_count(&p, 0.0, 0.0).unwrap();
    assert_eq!(s.count, 1);
    assert!(!s.degenerate);
    let z = wronskian_zeros(&p, 0.0, s.r0 + 2.0).unwrap();
    assert_eq!(z.len(), 1);
    assert!((z[0] - s.roots[0]).abs() < 1e-8, "{z:?} {:?}", s.roots);

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let tp = p.period().0;
    for _ in 0..20 {
        let (t, xt) = (rng.gen_range(0.0..tp), rng.gen_range(-5.0..5.0));
        assert_eq!(f_mu_root_count(&p, t, xt).unwrap().count, 1);
    }
    for f in [0.05, 0.95] {
        let q = BreatherParams::at_mu_fraction(1.0, 1.0, f).unwrap();
        let s = f_mu_root_count(&q, 0.0, 0.0).unwrap();
        assert_eq!(s.count, 1);
        assert!(s.slopes[0] > 0.0);
    }
}

#[test]
fn coercivity_on_the_complement() {
    let p = p0();
    let g = spectral_grid(&p, 0.0).unwrap();
    let op = assemble(&p, 0.0, &g).unwrap();
    let sp = spectrum(&op, 12).unwrap();
    let c = coercivity_estimate(&op, &sp, 60, 1).unwrap();
    assert!(c.pass(), "{c:?}");
    assert!(c.unprojected_negative < 0.0);
    assert!(c.nu_pairing_free > 0.0);
    assert_eq!(c, coercivity_estimate(&op, &sp, 60, 1).unwrap());
}

#[test]
fn negative_count_needs_one_eigenvalue() {
    let p = p0();
    let g = Grid::new(40.0, 256).unwrap();
    let op = assemble_from(&p, 0.0, Potentials::free(&p, &g)).unwrap();
    let sp = spectrum(&op, 4).unwrap();
    assert_eq!(sp.report.negative_count, 0);
    assert!(b_minus_one(&sp, &p).is_err());
    assert!(spectrum(&op, 3).is_err());
}
