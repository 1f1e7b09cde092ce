//! Jets and the curvature pipeline against plain finite differences.

use curvlab_core::catalog::{lookup_metric, sample_points, BUILTIN_NAMES};
use curvlab_core::exprlang::{parse_expr, ParamEnv};

mod common;
use common::{fd, fd_gamma, fd_riemann, rel_dev, spec};

fn close(a: f64, b: f64, rel: f64, floor: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(floor)
}

#[test]
fn jet_partials_match_finite_differences_on_catalog_components() {
    let mut checked = 0;
    for name in BUILTIN_NAMES {
        let s = spec(name);
        let coords: Vec<String> = s.coords.to_vec();
        let pnames: Vec<String> = s.params.names().map(str::to_string).collect();
        for p in sample_points(&s, 4, 7).unwrap() {
            for i in 0..4 {
                for j in i..4 {
                    let e = parse_expr(s.component_source(i, j), &coords, &pnames).unwrap();
                    let jet = e.eval_jet(&p, &s.params).unwrap();
                    let f = |q: &[f64; 4]| e.eval(q, &s.params).unwrap();
                    let scale = jet.max_abs().max(1.0);
                    assert!(close(jet.value(), f(&p), 1e-14, scale));
                    for a in 0..4 {
                        assert!(close(jet.d1(a), fd(&f, &p, &[a], 1e-3), 1e-5, scale), "{name} ({i},{j}) d{a}");
                        for b in a..4 {
                            assert!(close(jet.d2(a, b), fd(&f, &p, &[a, b], 1e-3), 1e-5, scale));
                            for c in b..4 {
                                let want = fd(&f, &p, &[a, b, c], 1e-3);
                                assert!(
                                    close(jet.d3(a, b, c), want, 1e-5, scale),
                                    "{name} ({i},{j}) d{a}{b}{c}: {} vs {want}",
                                    jet.d3(a, b, c)
                                );
                            }
                        }
                    }
                    checked += 1;
                }
            }
        }
    }
    assert!(checked > 0);
}

#[test]
fn mixed_partial_of_profile_product() {
    let coords: Vec<String> = ["t", "r", "theta", "phi"].map(String::from).to_vec();
    let e = parse_expr("(2+sin(r))*(2+sin(theta))", &coords, &[]).unwrap();
    let p = [0.0, std::f64::consts::FRAC_PI_6, std::f64::consts::FRAC_PI_3, 0.0];
    let jet = e.eval_jet(&p, &ParamEnv::new()).unwrap();
    let f = |q: &[f64; 4]| e.eval(q, &ParamEnv::new()).unwrap();
    let want = 3f64.sqrt() / 4.0;
    assert!((jet.d2(1, 2) - want).abs() < 1e-14);
    assert!(close(fd(&f, &p, &[1, 2], 1e-4), want, 1e-6, 1.0));
}

#[test]
fn christoffel_and_riemann_match_finite_difference_pipeline() {
    for name in BUILTIN_NAMES {
        let s = spec(name);
        for p in sample_points(&s, 3, 7).unwrap() {
            let b = s.bundle_at(&p).unwrap();
            let gam = fd_gamma(&s, &p, 1e-4);
            let dev = rel_dev(&b.gamma, &gam);
            assert!(dev < 1e-5 || b.gamma.max_abs() < 1e-12, "{name}: Γ deviation {dev}");
            let r = fd_riemann(&s, &p);
            if b.riemann.max_abs() < 1e-12 {
                assert!(r.max_abs() < 1e-5, "{name}: flat but FD Riemann {}", r.max_abs());
            } else {
                let dev = rel_dev(&b.riemann, &r);
                assert!(dev < 1e-5, "{name}: R deviation {dev}");
            }
        }
    }
}

#[test]
fn round_sphere_curvature_sign() {
    let s = lookup_metric("sphere_product", &ParamEnv::new(), None).unwrap();
    let r0 = s.params.get("r0").unwrap();
    for p in sample_points(&s, 4, 7).unwrap() {
        let b = s.bundle_at(&p).unwrap();
        assert!((b.kappa + 2.0 / (r0 * r0)).abs() < 1e-12, "kappa = {}", b.kappa);
    }
}
