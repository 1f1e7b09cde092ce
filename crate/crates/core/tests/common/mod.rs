//! Helpers shared by the integration test targets.
#![allow(dead_code)]

use curvlab_core::catalog::{lookup_metric, sample_points, MetricSpec};
use curvlab_core::curvature::CurvatureBundle;
use curvlab_core::exprlang::ParamEnv;
use curvlab_core::tensor::{Tensor, Valence, DIM};

pub const GENERIC_XI: &str = "2+sin(r)";
pub const GENERIC_H: &str = "2+sin(theta)";

/// Built-in metric with defaults; `cns_type` gets the generic profiles.
pub fn spec(name: &str) -> MetricSpec {
    let prof = (name == "cns_type").then_some((GENERIC_XI, GENERIC_H));
    lookup_metric(name, &ParamEnv::new(), prof).unwrap()
}

pub fn params(pairs: &[(&str, f64)]) -> ParamEnv {
    pairs.iter().fold(ParamEnv::new(), |e, (k, v)| e.with(k, *v))
}

pub fn bundles_of(spec: &MetricSpec, count: usize, seed: u64) -> Vec<CurvatureBundle> {
    sample_points(spec, count, seed)
        .unwrap()
        .iter()
        .map(|p| spec.bundle_at(p).unwrap())
        .collect()
}

pub fn cns(r0: f64, l0: f64) -> MetricSpec {
    lookup_metric("charged_nariai", &params(&[("r0", r0), ("L0", l0)]), None).unwrap()
}

pub fn shifted(p: &[f64; 4], axis: usize, h: f64) -> [f64; 4] {
    let mut q = *p;
    q[axis] += h;
    q
}

/// Central difference of `f` along each axis in `axes`, applied recursively.
pub fn fd(f: &dyn Fn(&[f64; 4]) -> f64, p: &[f64; 4], axes: &[usize], h: f64) -> f64 {
    match axes.split_first() {
        None => f(p),
        Some((&a, rest)) => (fd(f, &shifted(p, a, h), rest, h) - fd(f, &shifted(p, a, -h), rest, h)) / (2.0 * h),
    }
}

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs())
}

/// Christoffel symbols `Γ^a_bc` from finite-difference metric derivatives.
pub fn fd_gamma(s: &MetricSpec, p: &[f64; 4], h: f64) -> Tensor {
    let g = s.metric_values(p).unwrap();
    let ginv = Tensor::from_matrix(&g.to_matrix().try_inverse().unwrap());
    let plus: Vec<Tensor> = (0..DIM).map(|a| s.metric_values(&shifted(p, a, h)).unwrap()).collect();
    let minus: Vec<Tensor> = (0..DIM).map(|a| s.metric_values(&shifted(p, a, -h)).unwrap()).collect();
    let dg = |c: usize, a: usize, b: usize| (plus[c].get(&[a, b]) - minus[c].get(&[a, b])) / (2.0 * h);
    let mut out = Tensor::zeros(Valence::mixed(1, 2));
    for a in 0..DIM {
        for b in 0..DIM {
            for c in 0..DIM {
                let mut v = 0.0;
                for d in 0..DIM {
                    v += 0.5 * ginv.get(&[a, d]) * (dg(b, d, c) + dg(c, d, b) - dg(d, b, c));
                }
                out.set(&[a, b, c], v);
            }
        }
    }
    out
}

/// Riemann tensor in the engine orientation, built only from metric values.
pub fn fd_riemann(s: &MetricSpec, p: &[f64; 4]) -> Tensor {
    let (h, inner) = (1e-4, 1e-5);
    let gam = fd_gamma(s, p, inner);
    let plus: Vec<Tensor> = (0..DIM).map(|a| fd_gamma(s, &shifted(p, a, h), inner)).collect();
    let minus: Vec<Tensor> = (0..DIM).map(|a| fd_gamma(s, &shifted(p, a, -h), inner)).collect();
    let dgam = |c: usize, i: &[usize]| (plus[c].get(i) - minus[c].get(i)) / (2.0 * h);
    let g = s.metric_values(p).unwrap();
    // standard R^e_bcd = ∂_c Γ^e_db − ∂_d Γ^e_cb + Γ^e_cf Γ^f_db − Γ^e_df Γ^f_cb
    let mut rstd = [[[[0.0; DIM]; DIM]; DIM]; DIM];
    for e in 0..DIM {
        for b in 0..DIM {
            for c in 0..DIM {
                for d in 0..DIM {
                    let mut v = dgam(c, &[e, d, b]) - dgam(d, &[e, c, b]);
                    for f in 0..DIM {
                        v += gam.get(&[e, c, f]) * gam.get(&[f, d, b]) - gam.get(&[e, d, f]) * gam.get(&[f, c, b]);
                    }
                    rstd[e][b][c][d] = v;
                }
            }
        }
    }
    Tensor::from_fn(Valence::covariant(4), |i| {
        -(0..DIM).map(|e| g.get(&[i[0], e]) * rstd[e][i[1]][i[2]][i[3]]).sum::<f64>()
    })
}

pub fn rel_dev(a: &Tensor, b: &Tensor) -> f64 {
    let scale = a.max_abs().max(b.max_abs()).max(1e-300);
    a.axpy(-1.0, b).max_abs() / scale
}

