//! Levi-Civita curvature pipeline and the tensor operators built on it.
//!
//! # Sign convention
//!
//! The common (MTW) Riemann tensor is
//! `Rstd^a_bcd = ∂_c Γ^a_db − ∂_d Γ^a_cb + Γ^a_ce Γ^e_db − Γ^a_de Γ^e_cb`.
//! This engine uses its negative, `R_abcd = −g_ae Rstd^e_bcd`, with
//! `S_bd = g^ac R_abcd` and `κ = g^bd S_bd`. Under this orientation a round
//! 2-sphere of radius `r0` has `S = −g/r0²` and `κ = −2/r0²`.
//!
//! Index layouts: derivative indices come first, so `∇_a T_pqrs` is stored
//! at `[a][p][q][r][s]`; `Γ^a_bc` at `[a][b][c]`.

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::jets::Jet3;
use crate::tensor::{multi_index, Tensor, Valence, DIM};

pub const SIGN_CONVENTION: &str = "R_abcd = -g_ae (d_c G^e_db - d_d G^e_cb + G^e_cf G^f_db - G^e_df G^f_cb); \
S_bd = g^ac R_abcd; kappa = g^bd S_bd; round sphere of radius r0 has kappa = -2/r0^2";

#[derive(Debug, Clone, Error, PartialEq)]
pub enum CurvatureError {
    #[error("metric is singular (det = {det:e})")]
    Singular { det: f64 },
    #[error("non-finite value in {what}")]
    NonFinite { what: &'static str },
}

const N: usize = DIM;

#[inline]
fn i2(a: usize, b: usize) -> usize {
    a * N + b
}
#[inline]
fn i3(a: usize, b: usize, c: usize) -> usize {
    (a * N + b) * N + c
}
#[inline]
fn i4(a: usize, b: usize, c: usize, d: usize) -> usize {
    ((a * N + b) * N + c) * N + d
}
#[inline]
fn i5(a: usize, b: usize, c: usize, d: usize, e: usize) -> usize {
    (((a * N + b) * N + c) * N + d) * N + e
}

/// Metric components and their partials through third order at one point.
#[derive(Debug, Clone)]
pub struct MetricValue {
    pub g: Tensor,
    pub ginv: Tensor,
    pub det: f64,
    /// `∂_c g_ab` at `[c][a][b]`
    pub dg: Tensor,
    /// `∂_c ∂_d g_ab` at `[c][d][a][b]`
    pub d2g: Tensor,
    /// `∂_c ∂_d ∂_e g_ab` at `[c][d][e][a][b]`
    pub d3g: Tensor,
    /// `∂_c g^ab` at `[c][a][b]`
    pub dginv: Tensor,
}

impl MetricValue {
    pub fn from_jets(j: &[[Jet3; N]; N]) -> Result<Self, CurvatureError> {
        let g = Tensor::from_fn(Valence::covariant(2), |i| j[i[0]][i[1]].value());
        let dg = Tensor::from_fn(Valence::covariant(3), |i| j[i[1]][i[2]].d1(i[0]));
        let d2g = Tensor::from_fn(Valence::covariant(4), |i| j[i[2]][i[3]].d2(i[0], i[1]));
        let d3g = Tensor::from_fn(Valence::covariant(5), |i| {
            j[i[3]][i[4]].d3(i[0], i[1], i[2])
        });
        Self::from_parts(g, dg, d2g, d3g)
    }

    /// Builds from explicit partial arrays; missing orders may be passed as zeros.
    pub fn from_parts(g: Tensor, dg: Tensor, d2g: Tensor, d3g: Tensor) -> Result<Self, CurvatureError> {
        if !(g.is_finite() && dg.is_finite() && d2g.is_finite() && d3g.is_finite()) {
            return Err(CurvatureError::NonFinite { what: "metric" });
        }
        let m = g.to_matrix();
        let det = m.determinant();
        let scale = g.max_abs().max(1e-300);
        if det.abs() <= 1e-14 * scale.powi(4) {
            return Err(CurvatureError::Singular { det });
        }
        let inv: Matrix4<f64> = m.try_inverse().ok_or(CurvatureError::Singular { det })?;
        let inv = (inv + inv.transpose()) * 0.5;
        let ginv = Tensor::from_matrix(&inv);
        let mut dginv = Tensor::covariant(3);
        for c in 0..N {
            for a in 0..N {
                for b in 0..N {
                    let mut s = 0.0;
                    for m_ in 0..N {
                        for n_ in 0..N {
                            s += ginv[i2(a, m_)] * dg[i3(c, m_, n_)] * ginv[i2(n_, b)];
                        }
                    }
                    dginv[i3(c, a, b)] = -s;
                }
            }
        }
        Ok(MetricValue { g, ginv, det, dg, d2g, d3g, dginv })
    }

    /// Largest metric component magnitude, at least 1.
    pub fn scale(&self) -> f64 {
        self.g.max_abs().max(1.0)
    }
}

/// Christoffel symbols of the second kind and their first two partials.
#[derive(Debug, Clone)]
pub struct Christoffel {
    /// `Γ^a_bc` at `[a][b][c]`
    pub gamma: Tensor,
    /// `∂_d Γ^a_bc` at `[d][a][b][c]`
    pub dgamma: Tensor,
    /// `∂_e ∂_d Γ^a_bc` at `[e][d][a][b][c]`
    pub d2gamma: Tensor,
}

pub fn christoffel(m: &MetricValue) -> Christoffel {
    let (g1, dg1, d2g1) = {
        // first kind: Γ_dbc = ½(∂_b g_dc + ∂_c g_db − ∂_d g_bc)
        let mut g1 = vec![0.0; N.pow(3)];
        let mut dg1 = vec![0.0; N.pow(4)];
        let mut d2g1 = vec![0.0; N.pow(5)];
        for d in 0..N {
            for b in 0..N {
                for c in 0..N {
                    g1[i3(d, b, c)] =
                        0.5 * (m.dg[i3(b, d, c)] + m.dg[i3(c, d, b)] - m.dg[i3(d, b, c)]);
                    for e in 0..N {
                        dg1[i4(e, d, b, c)] = 0.5
                            * (m.d2g[i4(e, b, d, c)] + m.d2g[i4(e, c, d, b)]
                                - m.d2g[i4(e, d, b, c)]);
                        for f in 0..N {
                            d2g1[i5(f, e, d, b, c)] = 0.5
                                * (m.d3g[i5(f, e, b, d, c)] + m.d3g[i5(f, e, c, d, b)]
                                    - m.d3g[i5(f, e, d, b, c)]);
                        }
                    }
                }
            }
        }
        (g1, dg1, d2g1)
    };

    // ∂_f∂_e g^ad = −(∂_f g^am ∂_e g_mn g^nd + g^am ∂_f∂_e g_mn g^nd + g^am ∂_e g_mn ∂_f g^nd)
    let mut d2ginv = vec![0.0; N.pow(4)];
    for f in 0..N {
        for e in 0..N {
            for a in 0..N {
                for d in 0..N {
                    let mut s = 0.0;
                    for p in 0..N {
                        for q in 0..N {
                            s += m.dginv[i3(f, a, p)] * m.dg[i3(e, p, q)] * m.ginv[i2(q, d)]
                                + m.ginv[i2(a, p)] * m.d2g[i4(f, e, p, q)] * m.ginv[i2(q, d)]
                                + m.ginv[i2(a, p)] * m.dg[i3(e, p, q)] * m.dginv[i3(f, q, d)];
                        }
                    }
                    d2ginv[i4(f, e, a, d)] = -s;
                }
            }
        }
    }

    let mut gamma = Tensor::zeros(Valence::mixed(1, 2));
    let mut dgamma = Tensor::zeros(Valence::mixed(1, 3));
    let mut d2gamma = Tensor::zeros(Valence::mixed(1, 4));
    for a in 0..N {
        for b in 0..N {
            for c in 0..N {
                let mut s = 0.0;
                for d in 0..N {
                    s += m.ginv[i2(a, d)] * g1[i3(d, b, c)];
                }
                gamma[i3(a, b, c)] = s;
                for e in 0..N {
                    let mut s = 0.0;
                    for d in 0..N {
                        s += m.dginv[i3(e, a, d)] * g1[i3(d, b, c)]
                            + m.ginv[i2(a, d)] * dg1[i4(e, d, b, c)];
                    }
                    dgamma[i4(e, a, b, c)] = s;
                    for f in 0..N {
                        let mut s = 0.0;
                        for d in 0..N {
                            s += d2ginv[i4(f, e, a, d)] * g1[i3(d, b, c)]
                                + m.dginv[i3(e, a, d)] * dg1[i4(f, d, b, c)]
                                + m.dginv[i3(f, a, d)] * dg1[i4(e, d, b, c)]
                                + m.ginv[i2(a, d)] * d2g1[i5(f, e, d, b, c)];
                        }
                        d2gamma[i5(f, e, a, b, c)] = s;
                    }
                }
            }
        }
    }
    Christoffel { gamma, dgamma, d2gamma }
}

/// A covariant tensor together with its coordinate partials (`[f][...]`).
#[derive(Debug, Clone)]
pub struct Field {
    pub value: Tensor,
    pub partial: Tensor,
}

/// Riemann tensor in the engine orientation, with coordinate partials.
pub fn riemann(m: &MetricValue, chr: &Christoffel) -> Field {
    let (gm, dgm, d2gm) = (&chr.gamma, &chr.dgamma, &chr.d2gamma);
    let mut rs = vec![0.0; N.pow(4)];
    let mut drs = vec![0.0; N.pow(5)];
    for a in 0..N {
        for b in 0..N {
            for c in 0..N {
                for d in 0..N {
                    let mut v = dgm[i4(c, a, d, b)] - dgm[i4(d, a, c, b)];
                    for e in 0..N {
                        v += gm[i3(a, c, e)] * gm[i3(e, d, b)] - gm[i3(a, d, e)] * gm[i3(e, c, b)];
                    }
                    rs[i4(a, b, c, d)] = v;
                    for f in 0..N {
                        let mut w = d2gm[i5(f, c, a, d, b)] - d2gm[i5(f, d, a, c, b)];
                        for e in 0..N {
                            w += dgm[i4(f, a, c, e)] * gm[i3(e, d, b)]
                                + gm[i3(a, c, e)] * dgm[i4(f, e, d, b)]
                                - dgm[i4(f, a, d, e)] * gm[i3(e, c, b)]
                                - gm[i3(a, d, e)] * dgm[i4(f, e, c, b)];
                        }
                        drs[i5(f, a, b, c, d)] = w;
                    }
                }
            }
        }
    }
    let mut r = Tensor::covariant(4);
    let mut dr = Tensor::covariant(5);
    for a in 0..N {
        for b in 0..N {
            for c in 0..N {
                for d in 0..N {
                    let mut v = 0.0;
                    for e in 0..N {
                        v += m.g[i2(a, e)] * rs[i4(e, b, c, d)];
                    }
                    r[i4(a, b, c, d)] = -v;
                    for f in 0..N {
                        let mut w = 0.0;
                        for e in 0..N {
                            w += m.dg[i3(f, a, e)] * rs[i4(e, b, c, d)]
                                + m.g[i2(a, e)] * drs[i5(f, e, b, c, d)];
                        }
                        dr[i5(f, a, b, c, d)] = -w;
                    }
                }
            }
        }
    }
    Field { value: r, partial: dr }
}

/// `R^s_pqr = g^st R_pqrt`, stored at `[s][p][q][r]`.
pub fn raise_last(r: &Tensor, ginv: &Tensor) -> Tensor {
    let mut out = Tensor::zeros(Valence::mixed(1, 3));
    for s in 0..N {
        for p in 0..N {
            for q in 0..N {
                for rr in 0..N {
                    let mut v = 0.0;
                    for t in 0..N {
                        v += ginv[i2(s, t)] * r[i4(p, q, rr, t)];
                    }
                    out[i4(s, p, q, rr)] = v;
                }
            }
        }
    }
    out
}

/// `S_bd = g^ac R_abcd`, with partials by the product rule.
pub fn ricci(m: &MetricValue, r: &Field) -> Field {
    let mut s = Tensor::covariant(2);
    let mut ds = Tensor::covariant(3);
    for b in 0..N {
        for d in 0..N {
            let mut v = 0.0;
            for a in 0..N {
                for c in 0..N {
                    v += m.ginv[i2(a, c)] * r.value[i4(a, b, c, d)];
                }
            }
            s[i2(b, d)] = v;
            for f in 0..N {
                let mut w = 0.0;
                for a in 0..N {
                    for c in 0..N {
                        w += m.dginv[i3(f, a, c)] * r.value[i4(a, b, c, d)]
                            + m.ginv[i2(a, c)] * r.partial[i5(f, a, b, c, d)];
                    }
                }
                ds[i3(f, b, d)] = w;
            }
        }
    }
    Field { value: s, partial: ds }
}

/// Full contraction `g^ab T_ab`.
pub fn trace(t: &Tensor, ginv: &Tensor) -> f64 {
    t.dot(ginv)
}

/// `∇_a T_{i..} = ∂_a T_{i..} − Σ_slots Γ^e_{a i_k} T_{..e..}` for covariant `T`.
pub fn covariant_derivative(t: &Tensor, dt: &Tensor, gamma: &Tensor) -> Tensor {
    let k = t.rank();
    assert_eq!(dt.rank(), k + 1, "partial array must carry one extra leading index");
    let len = N.pow(k as u32);
    let strides: Vec<usize> = (0..k).map(|slot| N.pow((k - 1 - slot) as u32)).collect();
    let mut out = Tensor::covariant(k + 1);
    for a in 0..N {
        for flat in 0..len {
            let idx = multi_index(flat, k);
            let mut v = dt[a * len + flat];
            for slot in 0..k {
                let i = idx[slot];
                let base = flat - i * strides[slot];
                for e in 0..N {
                    v -= gamma[i3(e, a, i)] * t[base + e * strides[slot]];
                }
            }
            out[a * len + flat] = v;
        }
    }
    out
}

/// `(E∧A)_pqrs = E_ps A_qr − E_pr A_qs + E_qr A_ps − E_qs A_pr`
pub fn kulkarni_nomizu(e: &Tensor, a: &Tensor) -> Tensor {
    assert!(e.rank() == 2 && a.rank() == 2, "Kulkarni-Nomizu needs (0,2) factors");
    Tensor::from_fn(Valence::covariant(4), |i| {
        let (p, q, r, s) = (i[0], i[1], i[2], i[3]);
        e[i2(p, s)] * a[i2(q, r)] - e[i2(p, r)] * a[i2(q, s)] + e[i2(q, r)] * a[i2(p, s)]
            - e[i2(q, s)] * a[i2(p, r)]
    })
}

/// `H_pqrs = g_sp S_qr − g_sq S_pr`, the projective correction term.
pub fn projective_term(g: &Tensor, s: &Tensor) -> Tensor {
    Tensor::from_fn(Valence::covariant(4), |i| {
        let (p, q, r, ss) = (i[0], i[1], i[2], i[3]);
        g[i2(ss, p)] * s[i2(q, r)] - g[i2(ss, q)] * s[i2(p, r)]
    })
}

/// Conformal, projective, concircular and conharmonic (0,4) tensors.
#[derive(Debug, Clone)]
pub struct DerivedTensors {
    pub conf: Tensor,
    pub proj: Tensor,
    pub conc: Tensor,
    pub conh: Tensor,
}

/// Four-dimensional specialisations, written in the engine orientation:
///
/// * `C = R + ½ g∧S − (κ/6) G`
/// * `P = R + ⅓ H`
/// * `W = R + (κ/12) G`
/// * `K = R + ½ g∧S`
///
/// with `G = ½ g∧g` and `H` from [`projective_term`]. Each map is linear in
/// `(R, S, κ)` at fixed `g`, so the same call applied to `(∇_a R, ∇_a S, ∇_a κ)`
/// yields `∇_a` of each tensor.
pub fn derived_tensors(r: &Tensor, s: &Tensor, kappa: f64, g: &Tensor) -> DerivedTensors {
    let gg_half = kulkarni_nomizu(g, g).scaled(0.5);
    let gs = kulkarni_nomizu(g, s);
    let h = projective_term(g, s);
    let conh = r.axpy(0.5, &gs);
    let conf = conh.axpy(-kappa / 6.0, &gg_half);
    let proj = r.axpy(1.0 / 3.0, &h);
    let conc = r.axpy(kappa / 12.0, &gg_half);
    DerivedTensors { conf, proj, conc, conh }
}

fn check_rank(t: &Tensor, op: &'static str) -> Result<usize, TensorOpError> {
    match t.rank() {
        2 | 4 => Ok(t.rank()),
        k => Err(TensorOpError::UnsupportedRank { op, rank: k }),
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum TensorOpError {
    #[error("{op} is defined here for (0,2) and (0,4) tensors, got rank {rank}")]
    UnsupportedRank { op: &'static str, rank: usize },
}

/// `(U·T)_{p1..pk r s} = −g^αβ Σ_i U_{r s p_i β} T_{p1..α..pk}`
pub fn dot_action(u: &Tensor, t: &Tensor, ginv: &Tensor) -> Result<Tensor, TensorOpError> {
    let k = check_rank(t, "U·T")?;
    // ug[r][s][p][α] = U_{rspβ} g^{βα}
    let mut ug = vec![0.0; N.pow(4)];
    for r in 0..N {
        for s in 0..N {
            for p in 0..N {
                for al in 0..N {
                    let mut v = 0.0;
                    for be in 0..N {
                        v += u[i4(r, s, p, be)] * ginv[i2(be, al)];
                    }
                    ug[i4(r, s, p, al)] = v;
                }
            }
        }
    }
    let len = N.pow(k as u32);
    let strides: Vec<usize> = (0..k).map(|slot| N.pow((k - 1 - slot) as u32)).collect();
    let mut out = Tensor::covariant(k + 2);
    for flat in 0..len {
        let idx = multi_index(flat, k);
        for r in 0..N {
            for s in 0..N {
                let mut v = 0.0;
                for slot in 0..k {
                    let p = idx[slot];
                    let base = flat - p * strides[slot];
                    for al in 0..N {
                        v += ug[i4(r, s, p, al)] * t[base + al * strides[slot]];
                    }
                }
                out[(flat * N + r) * N + s] = -v;
            }
        }
    }
    Ok(out)
}

/// `Q(Z,T)_{p1..pk r s} = Σ_i (Z_{s p_i} T_{..r..} − Z_{r p_i} T_{..s..})`
pub fn q_operator(z: &Tensor, t: &Tensor) -> Result<Tensor, TensorOpError> {
    let k = check_rank(t, "Q(Z,T)")?;
    let len = N.pow(k as u32);
    let strides: Vec<usize> = (0..k).map(|slot| N.pow((k - 1 - slot) as u32)).collect();
    let mut out = Tensor::covariant(k + 2);
    for flat in 0..len {
        let idx = multi_index(flat, k);
        for r in 0..N {
            for s in 0..N {
                let mut v = 0.0;
                for slot in 0..k {
                    let p = idx[slot];
                    let base = flat - p * strides[slot];
                    v += z[i2(s, p)] * t[base + r * strides[slot]]
                        - z[i2(r, p)] * t[base + s * strides[slot]];
                }
                out[(flat * N + r) * N + s] = v;
            }
        }
    }
    Ok(out)
}

/// `Σ_cyc(p,q,r) A^t_p B_qrst` with `A^t_p = g^tu A_up`, indexed `[p][q][r][s]`.
pub fn compatibility_sum(a: &Tensor, b: &Tensor, ginv: &Tensor) -> Tensor {
    let mut amix = [[0.0; N]; N];
    for t in 0..N {
        for p in 0..N {
            amix[t][p] = (0..N).map(|u| ginv[i2(t, u)] * a[i2(u, p)]).sum();
        }
    }
    let term = |p: usize, q: usize, r: usize, s: usize| -> f64 {
        (0..N).map(|t| amix[t][p] * b[i4(q, r, s, t)]).sum()
    };
    Tensor::from_fn(Valence::covariant(4), |i| {
        let (p, q, r, s) = (i[0], i[1], i[2], i[3]);
        term(p, q, r, s) + term(q, r, p, s) + term(r, p, q, s)
    })
}

/// `g^ap ∇_a T_pqrs`
pub fn divergence(nabla_t: &Tensor, ginv: &Tensor) -> Tensor {
    assert_eq!(nabla_t.rank(), 5);
    Tensor::from_fn(Valence::covariant(3), |i| {
        let mut v = 0.0;
        for a in 0..N {
            for p in 0..N {
                v += ginv[i2(a, p)] * nabla_t[i5(a, p, i[0], i[1], i[2])];
            }
        }
        v
    })
}

/// Lowered operator powers: `S^{k+1}_pq = S^k_ps g^st S_tq`.
pub fn ricci_power(prev: &Tensor, s: &Tensor, ginv: &Tensor) -> Tensor {
    let m = prev.to_matrix() * ginv.to_matrix() * s.to_matrix();
    Tensor::from_matrix(&((m + m.transpose()) * 0.5))
}

/// The curvature-type tensors the classifier ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Curv {
    R,
    C,
    P,
    W,
    K,
}

impl Curv {
    pub const ALL: [Curv; 5] = [Curv::R, Curv::C, Curv::P, Curv::W, Curv::K];

    pub fn symbol(self) -> &'static str {
        match self {
            Curv::R => "R",
            Curv::C => "C",
            Curv::P => "P",
            Curv::W => "W",
            Curv::K => "K",
        }
    }
}

/// Everything evaluated at a single chart point.
#[derive(Debug, Clone)]
pub struct CurvatureBundle {
    pub point: [f64; N],
    pub metric: MetricValue,
    pub gamma: Tensor,
    pub dgamma: Tensor,
    pub riemann: Tensor,
    pub riemann_mixed: Tensor,
    pub nabla_riemann: Tensor,
    pub ricci: Tensor,
    /// `S^s_p` at `[s][p]`
    pub ricci_op: Tensor,
    pub ricci2: Tensor,
    pub ricci3: Tensor,
    pub kappa: f64,
    pub nabla_kappa: [f64; N],
    pub nabla_ricci: Tensor,
    pub derived: DerivedTensors,
    pub nabla_derived: DerivedTensors,
}

impl CurvatureBundle {
    pub fn from_metric(point: [f64; N], metric: MetricValue) -> Result<Self, CurvatureError> {
        let chr = christoffel(&metric);
        let r = riemann(&metric, &chr);
        let s = ricci(&metric, &r);
        let nabla_riemann = covariant_derivative(&r.value, &r.partial, &chr.gamma);
        let nabla_ricci = covariant_derivative(&s.value, &s.partial, &chr.gamma);
        let kappa = trace(&s.value, &metric.ginv);
        let mut nabla_kappa = [0.0; N];
        for (a, nk) in nabla_kappa.iter_mut().enumerate() {
            *nk = trace(&nabla_ricci.leading_slice(a), &metric.ginv);
        }
        let derived = derived_tensors(&r.value, &s.value, kappa, &metric.g);
        let slices: Vec<DerivedTensors> = (0..N)
            .map(|a| {
                derived_tensors(
                    &nabla_riemann.leading_slice(a),
                    &nabla_ricci.leading_slice(a),
                    nabla_kappa[a],
                    &metric.g,
                )
            })
            .collect();
        let stack = |f: fn(&DerivedTensors) -> &Tensor| {
            Tensor::stack(&slices.iter().map(|d| f(d).clone()).collect::<Vec<_>>())
        };
        let nabla_derived = DerivedTensors {
            conf: stack(|d| &d.conf),
            proj: stack(|d| &d.proj),
            conc: stack(|d| &d.conc),
            conh: stack(|d| &d.conh),
        };
        let sop = metric.ginv.to_matrix() * s.value.to_matrix();
        let ricci_op = Tensor::from_fn(Valence::mixed(1, 1), |i| sop[(i[0], i[1])]);
        let ricci2 = ricci_power(&s.value, &s.value, &metric.ginv);
        let ricci3 = ricci_power(&ricci2, &s.value, &metric.ginv);
        let riemann_mixed = raise_last(&r.value, &metric.ginv);
        let bundle = CurvatureBundle {
            point,
            gamma: chr.gamma,
            dgamma: chr.dgamma,
            riemann: r.value,
            riemann_mixed,
            nabla_riemann,
            ricci: s.value,
            ricci_op,
            ricci2,
            ricci3,
            kappa,
            nabla_kappa,
            nabla_ricci,
            derived,
            nabla_derived,
            metric,
        };
        if !bundle.is_finite() {
            return Err(CurvatureError::NonFinite { what: "curvature" });
        }
        Ok(bundle)
    }

    fn is_finite(&self) -> bool {
        self.riemann.is_finite()
            && self.nabla_riemann.is_finite()
            && self.kappa.is_finite()
            && self.nabla_ricci.is_finite()
    }

    pub fn g(&self) -> &Tensor {
        &self.metric.g
    }

    pub fn ginv(&self) -> &Tensor {
        &self.metric.ginv
    }

    pub fn curv(&self, c: Curv) -> &Tensor {
        match c {
            Curv::R => &self.riemann,
            Curv::C => &self.derived.conf,
            Curv::P => &self.derived.proj,
            Curv::W => &self.derived.conc,
            Curv::K => &self.derived.conh,
        }
    }

    pub fn nabla(&self, c: Curv) -> &Tensor {
        match c {
            Curv::R => &self.nabla_riemann,
            Curv::C => &self.nabla_derived.conf,
            Curv::P => &self.nabla_derived.proj,
            Curv::W => &self.nabla_derived.conc,
            Curv::K => &self.nabla_derived.conh,
        }
    }

    /// Magnitude reference for tolerance tests: `max(1, ‖g‖∞, ‖R‖∞)`.
    pub fn scale(&self) -> f64 {
        self.metric.scale().max(self.riemann.max_abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::Jet3;

    type Comp = fn(&[Jet3; 4]) -> Jet3;

    fn metric_from(diag: [Comp; 4], x: [f64; 4]) -> MetricValue {
        let axes = [0, 1, 2, 3].map(|k| Jet3::axis(k, &x));
        let zero = Jet3::constant(0.0);
        let mut j: [[Jet3; 4]; 4] = std::array::from_fn(|_| std::array::from_fn(|_| zero));
        for k in 0..4 {
            j[k][k] = diag[k](&axes);
        }
        MetricValue::from_jets(&j).unwrap()
    }

    fn sphere_product(x: [f64; 4]) -> MetricValue {
        // −dt² + dr² + 4(dθ² + sin²θ dφ²)
        metric_from(
            [
                |_| Jet3::constant(-1.0),
                |_| Jet3::constant(1.0),
                |_| Jet3::constant(4.0),
                |a| a[2].sin().powi(2).unwrap().scale(4.0),
            ],
            x,
        )
    }

    #[test]
    fn sphere_block_christoffel_and_sign() {
        let x = [0.3, 0.4, 1.1, 0.2];
        let m = sphere_product(x);
        let chr = christoffel(&m);
        let th = x[2];
        assert!((chr.gamma[i3(2, 3, 3)] + th.sin() * th.cos()).abs() < 1e-14);
        let b = CurvatureBundle::from_metric(x, m).unwrap();
        assert!((b.kappa + 2.0 / 4.0).abs() < 1e-13);
        assert!((b.ricci[i2(2, 2)] + 1.0).abs() < 1e-13);
        // engine orientation: R_θφθφ = −r0² sin²θ
        assert!((b.riemann[i4(2, 3, 2, 3)] + 4.0 * th.sin().powi(2)).abs() < 1e-12);
    }

    #[test]
    fn flat_metric_has_no_curvature() {
        let m = metric_from(
            [
                |_| Jet3::constant(-1.0),
                |_| Jet3::constant(1.0),
                |_| Jet3::constant(1.0),
                |_| Jet3::constant(1.0),
            ],
            [0.0; 4],
        );
        let b = CurvatureBundle::from_metric([0.0; 4], m).unwrap();
        assert_eq!(b.gamma.max_abs(), 0.0);
        assert_eq!(b.riemann.max_abs(), 0.0);
        assert_eq!(b.kappa, 0.0);
    }

    #[test]
    fn singular_metric_is_rejected() {
        let g = Tensor::covariant(2);
        let err = MetricValue::from_parts(g, Tensor::covariant(3), Tensor::covariant(4), Tensor::covariant(5));
        assert!(matches!(err, Err(CurvatureError::Singular { .. })));
    }

    #[test]
    fn kulkarni_nomizu_is_symmetric_in_factors() {
        let e = Tensor::from_fn(Valence::covariant(2), |i| (i[0] + i[1]) as f64 + 0.5);
        let a = Tensor::from_fn(Valence::covariant(2), |i| (i[0] * i[1]) as f64 - 1.0);
        assert!((&kulkarni_nomizu(&e, &a) - &kulkarni_nomizu(&a, &e)).max_abs() < 1e-15);
        assert_eq!(kulkarni_nomizu(&Tensor::covariant(2), &a).max_abs(), 0.0);
    }

    #[test]
    fn q_of_metric_on_itself_vanishes() {
        let m = sphere_product([0.0, 0.5, 0.9, 0.0]);
        let gg = kulkarni_nomizu(&m.g, &m.g);
        assert!(q_operator(&m.g, &gg).unwrap().max_abs() < 1e-13);
        assert!(q_operator(&m.g, &m.g).unwrap().max_abs() < 1e-13);
    }

    #[test]
    fn unsupported_rank_is_an_error() {
        let t = Tensor::covariant(3);
        assert!(dot_action(&Tensor::covariant(4), &t, &Tensor::covariant(2)).is_err());
        assert!(q_operator(&Tensor::covariant(2), &t).is_err());
    }

    #[test]
    fn metric_is_parallel() {
        let x = [0.1, 0.7, 1.2, 2.0];
        let m = sphere_product(x);
        let chr = christoffel(&m);
        let ng = covariant_derivative(&m.g, &m.dg, &chr.gamma);
        assert!(ng.max_abs() < 1e-13);
    }
}
