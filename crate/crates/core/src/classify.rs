//! Structure tests over a set of sampled curvature bundles.
//!
//! Every verdict is a conjunction over the sampled points. Fits are solved
//! per point; cross-point reductions (nullspace intersection, constancy) run
//! sequentially in point order.

use nalgebra::{DMatrix, DVector, Matrix4, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curvature::{
    compatibility_sum, divergence, dot_action, kulkarni_nomizu, q_operator, Curv, CurvatureBundle,
};
use crate::linalg::{self, lstsq};
use crate::tensor::{Tensor, Valence, DIM};

const N: usize = DIM;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceModel {
    pub eps_zero: f64,
    pub eps_fit: f64,
    pub eps_rank: f64,
    pub min_points: usize,
}

impl Default for ToleranceModel {
    fn default() -> Self {
        ToleranceModel {
            eps_zero: 1e-9,
            eps_fit: 1e-8,
            eps_rank: 1e-8,
            min_points: 8,
        }
    }
}

impl ToleranceModel {
    pub fn validate(&self) -> Result<(), ClassifyError> {
        let ok = self.eps_zero > 0.0
            && self.eps_fit > 0.0
            && self.eps_rank > 0.0
            && self.eps_rank < 1.0
            && self.min_points > 0;
        if ok {
            Ok(())
        } else {
            Err(ClassifyError::BadTolerance(*self))
        }
    }

    /// Relative spread below which per-point scalars count as one constant.
    pub fn constancy(&self) -> f64 {
        1e3 * self.eps_fit
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ClassifyError {
    #[error("need at least {need} sample points, have {have}")]
    InsufficientPoints { need: usize, have: usize },
    #[error("invalid tolerance model {0:?}")]
    BadTolerance(ToleranceModel),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Fails,
    /// The defining condition is empty on the sample (e.g. `Q(Z,T) = 0` everywhere).
    Vacuous,
    /// The linear system does not determine the structure (e.g. Einstein collapse).
    Degenerate,
}

impl Verdict {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Verdict::Holds
        } else {
            Verdict::Fails
        }
    }

    pub fn holds(self) -> bool {
        self == Verdict::Holds
    }
}

/// The tensors a structure test can range over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TensorKind {
    R,
    C,
    P,
    W,
    K,
    S,
}

impl TensorKind {
    pub const ALL: [TensorKind; 6] = [
        TensorKind::R,
        TensorKind::C,
        TensorKind::P,
        TensorKind::W,
        TensorKind::K,
        TensorKind::S,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            TensorKind::S => "S",
            k => k.curv().expect("curvature kind").symbol(),
        }
    }

    pub fn curv(self) -> Option<Curv> {
        match self {
            TensorKind::R => Some(Curv::R),
            TensorKind::C => Some(Curv::C),
            TensorKind::P => Some(Curv::P),
            TensorKind::W => Some(Curv::W),
            TensorKind::K => Some(Curv::K),
            TensorKind::S => None,
        }
    }

    pub fn of(self, b: &CurvatureBundle) -> &Tensor {
        match self.curv() {
            Some(c) => b.curv(c),
            None => &b.ricci,
        }
    }

    pub fn nabla_of(self, b: &CurvatureBundle) -> &Tensor {
        match self.curv() {
            Some(c) => b.nabla(c),
            None => &b.nabla_ricci,
        }
    }
}

impl From<Curv> for TensorKind {
    fn from(c: Curv) -> Self {
        match c {
            Curv::R => TensorKind::R,
            Curv::C => TensorKind::C,
            Curv::P => TensorKind::P,
            Curv::W => TensorKind::W,
            Curv::K => TensorKind::K,
        }
    }
}

/// The symmetric (0,2) tensor `Z` in `Q(Z,T)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ZKind {
    #[serde(rename = "g")]
    G,
    S,
}

impl ZKind {
    pub fn symbol(self) -> &'static str {
        match self {
            ZKind::G => "g",
            ZKind::S => "S",
        }
    }

    pub fn of(self, b: &CurvatureBundle) -> &Tensor {
        match self {
            ZKind::G => b.g(),
            ZKind::S => &b.ricci,
        }
    }
}

fn require_points(n: usize, tol: &ToleranceModel) -> Result<(), ClassifyError> {
    if n < tol.min_points {
        Err(ClassifyError::InsufficientPoints {
            need: tol.min_points,
            have: n,
        })
    } else {
        Ok(())
    }
}

/// Outcome of a "tensor vanishes" test: per-point `‖X‖∞ / scale`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroCheck {
    pub verdict: Verdict,
    pub max_ratio: f64,
    pub per_point: Vec<f64>,
}

impl ZeroCheck {
    pub fn from_ratios(per_point: Vec<f64>, eps: f64) -> Self {
        let max_ratio = per_point.iter().cloned().fold(0.0, f64::max);
        ZeroCheck {
            verdict: Verdict::from_bool(per_point.iter().all(|r| *r < eps)),
            max_ratio,
            per_point,
        }
    }
}

fn ratio(x: &Tensor, scale: f64) -> f64 {
    x.max_abs() / scale.max(1.0)
}

/// `‖∇T‖∞ < eps_zero · scale` at every point.
pub fn check_parallel(
    bundles: &[CurvatureBundle],
    kind: TensorKind,
    tol: &ToleranceModel,
) -> Result<ZeroCheck, ClassifyError> {
    require_points(bundles.len(), tol)?;
    let r = bundles
        .iter()
        .map(|b| ratio(kind.nabla_of(b), b.scale().max(kind.of(b).max_abs())))
        .collect();
    Ok(ZeroCheck::from_ratios(r, tol.eps_zero))
}

/// Generic vanishing test for per-point tensors with their own scales.
pub fn check_vanishing(
    values: &[(Tensor, f64)],
    tol: &ToleranceModel,
) -> Result<ZeroCheck, ClassifyError> {
    require_points(values.len(), tol)?;
    Ok(ZeroCheck::from_ratios(
        values.iter().map(|(t, s)| ratio(t, *s)).collect(),
        tol.eps_zero,
    ))
}

fn dot_scale(u: &Tensor, t: &Tensor, b: &CurvatureBundle) -> f64 {
    (u.max_abs() * t.max_abs() * b.ginv().max_abs()).max(1.0)
}

/// `U·T` at one point.
pub fn dot(b: &CurvatureBundle, u: Curv, t: TensorKind) -> Tensor {
    dot_action(b.curv(u), t.of(b), b.ginv()).expect("ranks 2 and 4 are supported")
}

/// `Q(Z,T)` at one point.
pub fn q_of(b: &CurvatureBundle, z: ZKind, t: TensorKind) -> Tensor {
    q_operator(z.of(b), t.of(b)).expect("ranks 2 and 4 are supported")
}

/// Semisymmetry `U·T = 0`.
pub fn check_semisym(
    bundles: &[CurvatureBundle],
    u: Curv,
    t: TensorKind,
    tol: &ToleranceModel,
) -> Result<ZeroCheck, ClassifyError> {
    require_points(bundles.len(), tol)?;
    let r = bundles
        .par_iter()
        .map(|b| ratio(&dot(b, u, t), dot_scale(b.curv(u), t.of(b), b)))
        .collect();
    Ok(ZeroCheck::from_ratios(r, tol.eps_zero))
}

/// A scalar function fitted point by point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarFit {
    pub verdict: Verdict,
    /// `None` where the fit is vacuous at that point.
    pub per_point: Vec<Option<f64>>,
    pub mean: Option<f64>,
    pub constant: bool,
    pub residual: f64,
    pub vacuous_points: usize,
}

/// Least-squares `J` in `A ≈ J·B`; returns `(J, ‖A − J B‖∞ / scale)` or `None` if `B ≈ 0`.
pub fn scalar_fit(a: &Tensor, bt: &Tensor, scale: f64, eps_zero: f64) -> Option<(f64, f64)> {
    let bb = bt.dot(bt);
    if bt.max_abs() < eps_zero * scale {
        return None;
    }
    let j = a.dot(bt) / bb;
    Some((j, ratio(&a.axpy(-j, bt), scale)))
}

fn summarize_scalars(fits: Vec<Option<(f64, f64)>>, tol: &ToleranceModel) -> ScalarFit {
    let vacuous_points = fits.iter().filter(|f| f.is_none()).count();
    let per_point: Vec<Option<f64>> = fits.iter().map(|f| f.map(|x| x.0)).collect();
    let residual = fits.iter().flatten().map(|f| f.1).fold(0.0, f64::max);
    let vals: Vec<f64> = per_point.iter().flatten().cloned().collect();
    if vals.is_empty() {
        return ScalarFit {
            verdict: Verdict::Vacuous,
            per_point,
            mean: None,
            constant: false,
            residual,
            vacuous_points,
        };
    }
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    let spread = vals.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
    ScalarFit {
        verdict: Verdict::from_bool(residual < tol.eps_fit),
        per_point,
        mean: Some(mean),
        constant: spread <= tol.constancy() * mean.abs().max(1.0),
        residual,
        vacuous_points,
    }
}

/// Pseudosymmetry `U·T = J Q(Z,T)` with `J` fitted per point.
pub fn fit_pseudosym(
    bundles: &[CurvatureBundle],
    u: Curv,
    t: TensorKind,
    z: ZKind,
    tol: &ToleranceModel,
) -> Result<ScalarFit, ClassifyError> {
    require_points(bundles.len(), tol)?;
    let fits = bundles
        .par_iter()
        .map(|b| {
            let a = dot(b, u, t);
            let q = q_of(b, z, t);
            let scale = dot_scale(b.curv(u), t.of(b), b).max(z.of(b).max_abs() * t.of(b).max_abs());
            scalar_fit(&a, &q, scale, tol.eps_zero)
        })
        .collect();
    Ok(summarize_scalars(fits, tol))
}

/// Proportionality `A = c·B` of two per-point tensors, e.g. `Q(S,R)` against `Q(g,R)`.
pub fn fit_proportional(
    pairs: &[(Tensor, Tensor)],
    tol: &ToleranceModel,
) -> Result<ScalarFit, ClassifyError> {
    require_points(pairs.len(), tol)?;
    let fits = pairs
        .iter()
        .map(|(a, b)| {
            let scale = a.max_abs().max(b.max_abs()).max(1.0);
            scalar_fit(a, b, scale, tol.eps_zero)
        })
        .collect();
    Ok(summarize_scalars(fits, tol))
}

/// Coefficients of a (generalized) Roter decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoterFit {
    pub verdict: Verdict,
    pub generalized: bool,
    /// Term labels, in coefficient order.
    pub terms: Vec<String>,
    pub per_point: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
    pub constant: bool,
    pub residual: f64,
    /// Smallest rank of the term matrix over the sample.
    pub rank: usize,
    pub unique: bool,
}

/// Kulkarni–Nomizu blocks `g∧g, g∧S, S∧S` (plus the `S²` blocks when generalized).
pub fn roter_terms(b: &CurvatureBundle, generalized: bool) -> Vec<(String, Tensor)> {
    let g = b.g();
    let s = &b.ricci;
    let mut out = vec![
        ("g∧g".to_string(), kulkarni_nomizu(g, g)),
        ("g∧S".to_string(), kulkarni_nomizu(g, s)),
        ("S∧S".to_string(), kulkarni_nomizu(s, s)),
    ];
    if generalized {
        let s2 = &b.ricci2;
        out.push(("g∧S²".into(), kulkarni_nomizu(g, s2)));
        out.push(("S∧S²".into(), kulkarni_nomizu(s, s2)));
        out.push(("S²∧S²".into(), kulkarni_nomizu(s2, s2)));
    }
    out
}

fn design(columns: &[&Tensor]) -> DMatrix<f64> {
    let rows = columns[0].data().len();
    DMatrix::from_fn(rows, columns.len(), |i, j| columns[j][i])
}

/// Least squares of `target ≈ Σ x_k columns_k`, returning `(x, residual/scale, rank)`.
pub fn fit_columns(
    target: &Tensor,
    columns: &[&Tensor],
    scale: f64,
    tol: &ToleranceModel,
) -> (Vec<f64>, f64, usize) {
    let a = design(columns);
    let rhs = DVector::from_column_slice(target.data());
    let mut sol = lstsq(&a, &rhs, tol.eps_rank);
    // truncation can only raise the residual; existence is judged on the
    // untruncated minimum, rank on the eps_rank cutoff
    if sol.residual > tol.eps_fit * scale.max(1.0) {
        let full = lstsq(&a, &rhs, f64::EPSILON);
        if full.residual < sol.residual {
            sol = full;
        }
    }
    let rank = linalg::rank_with_floor(&a, tol.eps_rank, scale);
    (sol.x.iter().cloned().collect(), sol.residual / scale.max(1.0), rank)
}

pub fn fit_roter(
    bundles: &[CurvatureBundle],
    generalized: bool,
    tol: &ToleranceModel,
) -> Result<RoterFit, ClassifyError> {
    require_points(bundles.len(), tol)?;
    // (labels, coefficients, residual, rank, flat)
    type PerPoint = (Vec<String>, Vec<f64>, f64, usize, bool);
    let per: Vec<PerPoint> = bundles
        .par_iter()
        .map(|b| {
            let terms = roter_terms(b, generalized);
            let labels = terms.iter().map(|t| t.0.clone()).collect();
            let cols: Vec<&Tensor> = terms.iter().map(|t| &t.1).collect();
            let scale = b.scale().max(cols.iter().map(|c| c.max_abs()).fold(0.0, f64::max));
            let flat = ratio(&b.riemann, scale) < tol.eps_zero;
            let (x, res, rank) = fit_columns(&b.riemann, &cols, scale, tol);
            (labels, x, res, rank, flat)
        })
        .collect();
    let terms = per[0].0.clone();
    let nterms = terms.len();
    let residual = per.iter().map(|p| p.2).fold(0.0, f64::max);
    let rank = per.iter().map(|p| p.3).min().unwrap_or(0);
    let per_point: Vec<Vec<f64>> = per.iter().map(|p| p.1.clone()).collect();
    let mean: Vec<f64> = (0..nterms)
        .map(|k| per_point.iter().map(|x| x[k]).sum::<f64>() / per_point.len() as f64)
        .collect();
    let constant = (0..nterms).all(|k| {
        per_point
            .iter()
            .all(|x| (x[k] - mean[k]).abs() <= tol.constancy() * mean[k].abs().max(1.0))
    });
    let unique = rank == nterms;
    let verdict = if per.iter().all(|p| p.4) {
        Verdict::Vacuous
    } else if residual < tol.eps_fit {
        Verdict::Holds
    } else if !unique {
        Verdict::Degenerate
    } else {
        Verdict::Fails
    };
    Ok(RoterFit {
        verdict,
        generalized,
        terms,
        per_point,
        mean,
        constant,
        residual,
        rank,
        unique,
    })
}

/// Per-point result of the `rank(S − αg)` search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasiEinsteinPoint {
    /// Real eigenvalues of `g⁻¹S`, ascending.
    pub candidates: Vec<f64>,
    pub ranks: Vec<usize>,
    pub min_rank: usize,
    pub minimizers: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasiEinsteinFit {
    /// Largest per-point minimal rank.
    pub m: usize,
    pub per_point: Vec<QuasiEinsteinPoint>,
    /// Holds iff `m == 1` (quasi-Einstein in the strict sense).
    pub verdict: Verdict,
}

/// Real eigenvalues of `g⁻¹S`, deduplicated.
pub fn generalized_eigenvalues(s: &Tensor, ginv: &Tensor, scale: f64) -> Vec<f64> {
    let m: Matrix4<f64> = ginv.to_matrix() * s.to_matrix();
    let ev = m.complex_eigenvalues();
    let tol = 1e-7 * scale.max(1.0);
    let mut real: Vec<f64> = ev.iter().filter(|z| z.im.abs() <= tol).map(|z| z.re).collect();
    real.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::new();
    for v in real {
        match out.last_mut() {
            Some(last) if (v - *last).abs() <= tol => *last = 0.5 * (*last + v),
            _ => out.push(v),
        }
    }
    out
}

pub fn quasi_einstein_point(b: &CurvatureBundle, tol: &ToleranceModel) -> QuasiEinsteinPoint {
    let s = &b.ricci;
    let g = b.g();
    let scale = s.max_abs().max(1.0);
    let candidates = generalized_eigenvalues(s, b.ginv(), scale);
    let ranks: Vec<usize> = candidates
        .iter()
        .map(|&al| {
            let m = s.axpy(-al, g).to_matrix();
            let floor = scale.max(al.abs() * g.max_abs());
            linalg::rank_with_floor(&DMatrix::from_column_slice(4, 4, m.as_slice()), tol.eps_rank.sqrt(), floor)
        })
        .collect();
    let min_rank = ranks.iter().cloned().min().unwrap_or(N);
    let minimizers = candidates
        .iter()
        .zip(&ranks)
        .filter(|(_, r)| **r == min_rank)
        .map(|(a, _)| *a)
        .collect();
    QuasiEinsteinPoint {
        candidates,
        ranks,
        min_rank,
        minimizers,
    }
}

pub fn quasi_einstein(
    bundles: &[CurvatureBundle],
    tol: &ToleranceModel,
) -> Result<QuasiEinsteinFit, ClassifyError> {
    require_points(bundles.len(), tol)?;
    let per_point: Vec<QuasiEinsteinPoint> =
        bundles.iter().map(|b| quasi_einstein_point(b, tol)).collect();
    let m = per_point.iter().map(|p| p.min_rank).max().unwrap_or(N);
    Ok(QuasiEinsteinFit {
        m,
        per_point,
        verdict: if m == 0 { Verdict::Degenerate } else { Verdict::from_bool(m == 1) },
    })
}

/// Lowest-degree polynomial identity in the Ricci operator at one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EinKPoint {
    pub k: usize,
    /// Coefficients of `S^k, …, S, g`, leading coefficient 1.
    pub coefficients: Vec<f64>,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EinKFit {
    pub k: usize,
    pub per_point: Vec<EinKPoint>,
    pub constant: bool,
}

pub fn ein_k_point(b: &CurvatureBundle, tol: &ToleranceModel) -> EinKPoint {
    let s4 = crate::curvature::ricci_power(&b.ricci3, &b.ricci, b.ginv());
    let powers = [b.g(), &b.ricci, &b.ricci2, &b.ricci3, &s4];
    let mut last = None;
    for k in 1..=4 {
        // columns ordered S^k, …, S, g
        let cols: Vec<&Tensor> = (0..=k).rev().map(|j| powers[j]).collect();
        let scale = cols.iter().map(|c| c.max_abs()).fold(1.0, f64::max);
        let target = cols[0].scaled(-1.0);
        let (x, res, _) = fit_columns(&target, &cols[1..], scale, tol);
        let mut coefficients = vec![1.0];
        coefficients.extend(x);
        let fit = EinKPoint {
            k,
            coefficients,
            residual: res,
        };
        if res < tol.eps_fit {
            return fit;
        }
        last = Some(fit);
    }
    // Cayley–Hamilton guarantees k ≤ 4; reaching here means round-off swamped the fit.
    last.expect("k ranges over 1..=4")
}

pub fn ein_k(bundles: &[CurvatureBundle], tol: &ToleranceModel) -> Result<EinKFit, ClassifyError> {
    require_points(bundles.len(), tol)?;
    let per_point: Vec<EinKPoint> = bundles.iter().map(|b| ein_k_point(b, tol)).collect();
    let k = per_point.iter().map(|p| p.k).max().unwrap_or(4);
    let first = &per_point[0];
    let constant = per_point.iter().all(|p| {
        p.k == first.k
            && p.coefficients
                .iter()
                .zip(&first.coefficients)
                .all(|(a, c)| (a - c).abs() <= tol.constancy() * c.abs().max(1.0))
    });
    Ok(EinKFit {
        k,
        per_point,
        constant,
    })
}

/// Named covectors fitted per point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovectorFit {
    pub verdict: Verdict,
    pub names: Vec<String>,
    /// `per_point[i][k]` is covector `names[k]` at point `i`.
    pub per_point: Vec<Vec<[f64; N]>>,
    pub residual: f64,
    pub per_point_residual: Vec<f64>,
    /// Largest dimension of the solution space over the sample.
    pub nullity: usize,
}

/// `∇_a T = Σ_k X^k_a B_k` solved independently for each derivative index `a`.
fn fit_gradient_family(
    nabla_t: &Tensor,
    basis: &[&Tensor],
    scale: f64,
    tol: &ToleranceModel,
) -> (Vec<[f64; N]>, f64, usize) {
    let mut covs = vec![[0.0; N]; basis.len()];
    let mut res = 0.0f64;
    let mut nullity = 0;
    for a in 0..N {
        let (x, r, rank) = fit_columns(&nabla_t.leading_slice(a), basis, scale, tol);
        for (k, v) in x.into_iter().enumerate() {
            covs[k][a] = v;
        }
        res = res.max(r);
        nullity += basis.len() - rank;
    }
    (covs, res, nullity)
}

/// The recurrence families for a (0,4) tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecurrenceFamily {
    /// `∇T = Π⊗T`
    Recurrent,
    /// `∇T = Π⊗T + Θ⊗(g∧g)`
    Generalized,
    /// `∇T = Π⊗T + Ψ⊗(g∧S)`
    HyperGeneralized,
    /// `∇T = Π⊗T + Φ⊗(S∧S)`
    WeaklyGeneralized,
    /// `∇T = Π⊗T + Φ⊗(S∧S) + Ψ⊗(g∧S) + Θ⊗(g∧g)`
    SuperGeneralized,
}

impl RecurrenceFamily {
    pub const ALL: [RecurrenceFamily; 5] = [
        RecurrenceFamily::Recurrent,
        RecurrenceFamily::Generalized,
        RecurrenceFamily::HyperGeneralized,
        RecurrenceFamily::WeaklyGeneralized,
        RecurrenceFamily::SuperGeneralized,
    ];

    pub fn label(self) -> &'static str {
        match self {
            RecurrenceFamily::Recurrent => "K4",
            RecurrenceFamily::Generalized => "GK4",
            RecurrenceFamily::HyperGeneralized => "HGK4",
            RecurrenceFamily::WeaklyGeneralized => "WGR4",
            RecurrenceFamily::SuperGeneralized => "SGK4",
        }
    }

    fn terms(self) -> &'static [&'static str] {
        match self {
            RecurrenceFamily::Recurrent => &["Pi"],
            RecurrenceFamily::Generalized => &["Pi", "Theta"],
            RecurrenceFamily::HyperGeneralized => &["Pi", "Psi"],
            RecurrenceFamily::WeaklyGeneralized => &["Pi", "Phi"],
            RecurrenceFamily::SuperGeneralized => &["Pi", "Phi", "Psi", "Theta"],
        }
    }
}

fn recurrence_verdict(
    parallel: &[bool],
    per_point_residual: &[f64],
    skip: &[bool],
    tol: &ToleranceModel,
) -> Verdict {
    let considered: Vec<usize> = (0..parallel.len()).filter(|&i| !skip[i]).collect();
    if considered.is_empty() || considered.iter().all(|&i| parallel[i]) {
        return Verdict::Vacuous;
    }
    Verdict::from_bool(considered.iter().all(|&i| per_point_residual[i] < tol.eps_fit))
}

/// Recurrence of a curvature tensor in the given family.
///
/// Points flagged in `skip` (e.g. outside the set where `T ≠ 0`) are left out.
pub fn fit_recurrence(
    bundles: &[CurvatureBundle],
    t: Curv,
    family: RecurrenceFamily,
    skip: Option<&[bool]>,
    tol: &ToleranceModel,
) -> Result<CovectorFit, ClassifyError> {
    require_points(bundles.len(), tol)?;
    let no_skip = vec![false; bundles.len()];
    let skip = skip.unwrap_or(&no_skip);
    let per: Vec<(Vec<[f64; N]>, f64, usize, bool)> = bundles
        .par_iter()
        .map(|b| {
            let blocks = roter_terms(b, false);
            let tt = b.curv(t);
            let mut cols: Vec<&Tensor> = vec![tt];
            for name in &family.terms()[1..] {
                let idx = match *name {
                    "Phi" => 2,
                    "Psi" => 1,
                    _ => 0,
                };
                cols.push(&blocks[idx].1);
            }
            let nt = b.nabla(t);
            let scale = b
                .scale()
                .max(tt.max_abs())
                .max(cols.iter().map(|c| c.max_abs()).fold(0.0, f64::max));
            let parallel = ratio(nt, scale) < tol.eps_zero;
            let (covs, res, nullity) = fit_gradient_family(nt, &cols, scale, tol);
            (covs, res, nullity, parallel)
        })
        .collect();
    let per_point_residual: Vec<f64> = per.iter().map(|p| p.1).collect();
    let parallel: Vec<bool> = per.iter().map(|p| p.3).collect();
    Ok(CovectorFit {
        verdict: recurrence_verdict(&parallel, &per_point_residual, skip, tol),
        names: family.terms().iter().map(|s| s.to_string()).collect(),
        residual: (0..per.len())
            .filter(|&i| !skip[i])
            .map(|i| per_point_residual[i])
            .fold(0.0, f64::max),
        per_point: per.iter().map(|p| p.0.clone()).collect(),
        per_point_residual,
        nullity: per.iter().map(|p| p.2).max().unwrap_or(0),
    })
}

/// Generalized Ricci recurrence `∇S = Π⊗S + Φ⊗g`.
pub fn fit_ricci_recurrence(
    bundles: &[CurvatureBundle],
    tol: &ToleranceModel,
) -> Result<CovectorFit, ClassifyError> {
    require_points(bundles.len(), tol)?;
    let per: Vec<(Vec<[f64; N]>, f64, usize, bool)> = bundles
        .iter()
        .map(|b| {
            let cols = [&b.ricci, b.g()];
            let scale = b.scale().max(b.ricci.max_abs());
            let parallel = ratio(&b.nabla_ricci, scale) < tol.eps_zero;
            let (covs, res, nullity) = fit_gradient_family(&b.nabla_ricci, &cols, scale, tol);
            (covs, res, nullity, parallel)
        })
        .collect();
    let per_point_residual: Vec<f64> = per.iter().map(|p| p.1).collect();
    let parallel: Vec<bool> = per.iter().map(|p| p.3).collect();
    let skip = vec![false; per.len()];
    Ok(CovectorFit {
        verdict: recurrence_verdict(&parallel, &per_point_residual, &skip, tol),
        names: vec!["Pi".into(), "Phi".into()],
        residual: per_point_residual.iter().cloned().fold(0.0, f64::max),
        per_point: per.iter().map(|p| p.0.clone()).collect(),
        per_point_residual,
        nullity: per.iter().map(|p| p.2).max().unwrap_or(0),
    })
}

/// `B`-compatibility of a symmetric (0,2) tensor.
pub fn check_compatibility(
    values: &[(Tensor, Tensor, Tensor)],
    tol: &ToleranceModel,
) -> Result<ZeroCheck, ClassifyError> {
    require_points(values.len(), tol)?;
    let r = values
        .iter()
        .map(|(a, b, ginv)| {
            let scale = (a.max_abs() * b.max_abs() * ginv.max_abs()).max(1.0);
            ratio(&compatibility_sum(a, b, ginv), scale)
        })
        .collect();
    Ok(ZeroCheck::from_ratios(r, tol.eps_zero))
}

/// A linear space of solutions intersected over the sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpanFit {
    pub dim: usize,
    /// Basis elements: symmetric 4×4 matrices for tensors, length-4 vectors for covectors.
    pub basis: Vec<Vec<f64>>,
}

const SYM_PAIRS: [(usize, usize); 10] = [
    (0, 0),
    (0, 1),
    (0, 2),
    (0, 3),
    (1, 1),
    (1, 2),
    (1, 3),
    (2, 2),
    (2, 3),
    (3, 3),
];

fn sym_unit(i: usize, j: usize) -> Tensor {
    let mut t = Tensor::covariant(2);
    t.set(&[i, j], 1.0);
    t.set(&[j, i], 1.0);
    t
}

fn intersect(
    systems: Vec<(DMatrix<f64>, f64)>,
    unknowns: usize,
    tol: &ToleranceModel,
) -> DMatrix<f64> {
    let mut basis = DMatrix::<f64>::identity(unknowns, unknowns);
    for (a, scale) in systems {
        basis = linalg::restrict_nullspace(&basis, &a, tol.eps_rank, scale);
        if basis.ncols() == 0 {
            break;
        }
    }
    basis
}

/// Symmetric `A` with `Σ_cyc A^t_p B_qrst = 0` at every sampled point.
pub fn solve_compatible_space(
    bundles: &[CurvatureBundle],
    bkind: Curv,
    tol: &ToleranceModel,
) -> Result<SpanFit, ClassifyError> {
    require_points(bundles.len(), tol)?;
    let systems: Vec<(DMatrix<f64>, f64)> = bundles
        .par_iter()
        .map(|b| {
            let bt = b.curv(bkind);
            let cols: Vec<Tensor> = SYM_PAIRS
                .iter()
                .map(|&(i, j)| compatibility_sum(&sym_unit(i, j), bt, b.ginv()))
                .collect();
            let refs: Vec<&Tensor> = cols.iter().collect();
            let scale = (bt.max_abs() * b.ginv().max_abs()).max(b.scale());
            (design(&refs), scale)
        })
        .collect();
    let basis = intersect(systems, SYM_PAIRS.len(), tol);
    Ok(SpanFit {
        dim: basis.ncols(),
        basis: basis
            .column_iter()
            .map(|c| {
                let mut m = vec![0.0; 16];
                for (k, &(i, j)) in SYM_PAIRS.iter().enumerate() {
                    m[i * N + j] = c[k];
                    m[j * N + i] = c[k];
                }
                m
            })
            .collect(),
    })
}

/// Covectors with `Σ_cyc(p,q,r) Φ_p B_qrst = 0` at every sampled point.
pub fn venzi_space(
    bundles: &[CurvatureBundle],
    bkind: Curv,
    tol: &ToleranceModel,
) -> Result<SpanFit, ClassifyError> {
    require_points(bundles.len(), tol)?;
    let systems: Vec<(DMatrix<f64>, f64)> = bundles
        .iter()
        .map(|b| {
            let bt = b.curv(bkind);
            let cols: Vec<Tensor> = (0..N).map(|k| cyclic_with_covector(k, bt)).collect();
            let refs: Vec<&Tensor> = cols.iter().collect();
            (design(&refs), b.scale().max(bt.max_abs()))
        })
        .collect();
    let basis = intersect(systems, N, tol);
    Ok(SpanFit {
        dim: basis.ncols(),
        basis: basis.column_iter().map(|c| c.iter().cloned().collect()).collect(),
    })
}

/// `Σ_cyc(p,q,r) e^k_p B_qrst` for the unit covector `e^k`, indexed `[p][q][r][s][t]`.
fn cyclic_with_covector(k: usize, b: &Tensor) -> Tensor {
    Tensor::from_fn(Valence::covariant(5), |i| {
        let (p, q, r, s, t) = (i[0], i[1], i[2], i[3], i[4]);
        let mut v = 0.0;
        if p == k {
            v += b.get(&[q, r, s, t]);
        }
        if q == k {
            v += b.get(&[r, p, s, t]);
        }
        if r == k {
            v += b.get(&[p, q, s, t]);
        }
        v
    })
}

/// Curvature 2-form recurrence `Σ_cyc ∇_p B_qrsα = Σ_cyc Π_p B_qrsα`.
pub fn two_form_recurrence(
    bundles: &[CurvatureBundle],
    bkind: Curv,
    tol: &ToleranceModel,
) -> Result<CovectorFit, ClassifyError> {
    require_points(bundles.len(), tol)?;
    // (covectors, residual, nullity, vacuous, lhs zero)
    type PerPoint = (Vec<[f64; N]>, f64, usize, bool, bool);
    let per: Vec<PerPoint> = bundles
        .par_iter()
        .map(|b| {
            let bt = b.curv(bkind);
            let nb = b.nabla(bkind);
            // lhs_pqrsα = ∇_p B_qrsα + ∇_q B_rpsα + ∇_r B_pqsα
            let lhs = Tensor::from_fn(Valence::covariant(5), |i| {
                let (p, q, r, s, al) = (i[0], i[1], i[2], i[3], i[4]);
                nb.get(&[p, q, r, s, al]) + nb.get(&[q, r, p, s, al]) + nb.get(&[r, p, q, s, al])
            });
            let cols: Vec<Tensor> = (0..N)
                .map(|k| {
                    Tensor::from_fn(Valence::covariant(5), |i| {
                        let (p, q, r, s, al) = (i[0], i[1], i[2], i[3], i[4]);
                        let mut v = 0.0;
                        if p == k {
                            v += bt.get(&[q, r, s, al]);
                        }
                        if q == k {
                            v += bt.get(&[r, p, s, al]);
                        }
                        if r == k {
                            v += bt.get(&[p, q, s, al]);
                        }
                        v
                    })
                })
                .collect();
            let refs: Vec<&Tensor> = cols.iter().collect();
            let scale = b.scale().max(bt.max_abs());
            let cyclic_zero = refs.iter().all(|c| ratio(c, scale) < tol.eps_zero);
            let lhs_zero = ratio(&lhs, scale) < tol.eps_zero;
            let (x, res, rank) = fit_columns(&lhs, &refs, scale, tol);
            let mut pi = [0.0; N];
            pi.copy_from_slice(&x);
            (vec![pi], res, N - rank, cyclic_zero && lhs_zero, lhs_zero)
        })
        .collect();
    let per_point_residual: Vec<f64> = per.iter().map(|p| p.1).collect();
    let verdict = if per.iter().all(|p| p.3) {
        Verdict::Vacuous
    } else {
        Verdict::from_bool(per_point_residual.iter().all(|r| *r < tol.eps_fit))
    };
    Ok(CovectorFit {
        verdict,
        names: vec!["Pi".into()],
        residual: per_point_residual.iter().cloned().fold(0.0, f64::max),
        per_point: per.iter().map(|p| p.0.clone()).collect(),
        per_point_residual,
        nullity: per.iter().map(|p| p.2).max().unwrap_or(0),
    })
}

/// Ricci 1-form recurrence `∇_p S_qr − ∇_q S_pr = Π_p S_qr − Π_q S_pr`.
pub fn one_form_recurrence(
    bundles: &[CurvatureBundle],
    tol: &ToleranceModel,
) -> Result<CovectorFit, ClassifyError> {
    require_points(bundles.len(), tol)?;
    let per: Vec<(Vec<[f64; N]>, f64, usize)> = bundles
        .iter()
        .map(|b| {
            let s = &b.ricci;
            let ns = &b.nabla_ricci;
            let lhs = Tensor::from_fn(Valence::covariant(3), |i| {
                ns.get(&[i[0], i[1], i[2]]) - ns.get(&[i[1], i[0], i[2]])
            });
            let cols: Vec<Tensor> = (0..N)
                .map(|k| {
                    Tensor::from_fn(Valence::covariant(3), |i| {
                        let (p, q, r) = (i[0], i[1], i[2]);
                        let mut v = 0.0;
                        if p == k {
                            v += s.get(&[q, r]);
                        }
                        if q == k {
                            v -= s.get(&[p, r]);
                        }
                        v
                    })
                })
                .collect();
            let refs: Vec<&Tensor> = cols.iter().collect();
            let scale = b.scale().max(s.max_abs());
            let (x, res, rank) = fit_columns(&lhs, &refs, scale, tol);
            let mut pi = [0.0; N];
            pi.copy_from_slice(&x);
            (vec![pi], res, N - rank)
        })
        .collect();
    let per_point_residual: Vec<f64> = per.iter().map(|p| p.1).collect();
    Ok(CovectorFit {
        verdict: Verdict::from_bool(per_point_residual.iter().all(|r| *r < tol.eps_fit)),
        names: vec!["Pi".into()],
        residual: per_point_residual.iter().cloned().fold(0.0, f64::max),
        per_point: per.iter().map(|p| p.0.clone()).collect(),
        per_point_residual,
        nullity: per.iter().map(|p| p.2).max().unwrap_or(0),
    })
}

/// Codazzi (`∇_p S_qr = ∇_q S_pr`) and cyclic-parallel (`Σ_cyc ∇_p S_qr = 0`) tests.
pub fn check_codazzi_cyclic(
    bundles: &[CurvatureBundle],
    tol: &ToleranceModel,
) -> Result<(ZeroCheck, ZeroCheck), ClassifyError> {
    require_points(bundles.len(), tol)?;
    let mut cod = Vec::new();
    let mut cyc = Vec::new();
    for b in bundles {
        let ns = &b.nabla_ricci;
        let scale = b.scale().max(b.ricci.max_abs());
        let c1 = Tensor::from_fn(Valence::covariant(3), |i| {
            ns.get(&[i[0], i[1], i[2]]) - ns.get(&[i[1], i[0], i[2]])
        });
        let c2 = Tensor::from_fn(Valence::covariant(3), |i| {
            ns.get(&[i[0], i[1], i[2]]) + ns.get(&[i[1], i[2], i[0]]) + ns.get(&[i[2], i[0], i[1]])
        });
        cod.push(ratio(&c1, scale));
        cyc.push(ratio(&c2, scale));
    }
    Ok((
        ZeroCheck::from_ratios(cod, tol.eps_zero),
        ZeroCheck::from_ratios(cyc, tol.eps_zero),
    ))
}

/// Weak symmetry and its Chaki specialisation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakSymmetryFit {
    pub weak: CovectorFit,
    pub chaki: CovectorFit,
}

/// `∇_α R_pqrs = Π_α R_pqrs + Φ_p R_αqrs + Φ̄_q R_pαrs + Ψ_r R_pqαs + Ψ̄_s R_pqrα`
pub fn weak_symmetry_solve(
    bundles: &[CurvatureBundle],
    tol: &ToleranceModel,
) -> Result<WeakSymmetryFit, ClassifyError> {
    require_points(bundles.len(), tol)?;
    let per: Vec<_> = bundles
        .par_iter()
        .map(|b| {
            let r = &b.riemann;
            let nr = &b.nabla_riemann;
            let scale = b.scale();
            // slot 0 = Π (derivative index), slots 1..=4 replace p,q,r,s
            let column = |slot: usize, k: usize| {
                Tensor::from_fn(Valence::covariant(5), |i| {
                    let al = i[0];
                    let mut idx = [i[1], i[2], i[3], i[4]];
                    if slot == 0 {
                        return if al == k { r.get(&idx) } else { 0.0 };
                    }
                    if idx[slot - 1] != k {
                        return 0.0;
                    }
                    idx[slot - 1] = al;
                    r.get(&idx)
                })
            };
            let cols: Vec<Tensor> = (0..5)
                .flat_map(|slot| (0..N).map(move |k| (slot, k)))
                .map(|(slot, k)| column(slot, k))
                .collect();
            let refs: Vec<&Tensor> = cols.iter().collect();
            let (x, res, rank) = fit_columns(nr, &refs, scale, tol);
            let covs: Vec<[f64; N]> = (0..5)
                .map(|slot| std::array::from_fn(|k| x[slot * N + k]))
                .collect();
            // Chaki: Π = 2Φ and all four slot covectors equal Φ
            let chaki_cols: Vec<Tensor> = (0..N)
                .map(|k| {
                    let mut c = cols[k].scaled(2.0);
                    for slot in 1..5 {
                        c = &c + &cols[slot * N + k];
                    }
                    c
                })
                .collect();
            let crefs: Vec<&Tensor> = chaki_cols.iter().collect();
            let (cx, cres, crank) = fit_columns(nr, &crefs, scale, tol);
            let flat = ratio(r, scale) < tol.eps_zero;
            (
                covs,
                res,
                5 * N - rank,
                vec![std::array::from_fn::<f64, N, _>(|k| cx[k])],
                cres,
                N - crank,
                flat,
            )
        })
        .collect();
    let all_flat = per.iter().all(|p| p.6);
    let mk = |names: Vec<String>, covs: Vec<Vec<[f64; N]>>, res: Vec<f64>, nullity: usize| {
        CovectorFit {
            verdict: if all_flat {
                Verdict::Vacuous
            } else {
                Verdict::from_bool(res.iter().all(|r| *r < tol.eps_fit))
            },
            names,
            residual: res.iter().cloned().fold(0.0, f64::max),
            per_point: covs,
            per_point_residual: res,
            nullity,
        }
    };
    let weak = mk(
        ["Pi", "Phi", "Phi_bar", "Psi", "Psi_bar"]
            .iter()
            .map(|s| s.to_string())
            .collect(),
        per.iter().map(|p| p.0.clone()).collect(),
        per.iter().map(|p| p.1).collect(),
        per.iter().map(|p| p.2).max().unwrap_or(0),
    );
    let chaki = mk(
        vec!["Phi".into()],
        per.iter().map(|p| p.3.clone()).collect(),
        per.iter().map(|p| p.4).collect(),
        per.iter().map(|p| p.5).max().unwrap_or(0),
    );
    Ok(WeakSymmetryFit { weak, chaki })
}

/// `S = αg + βΠ⊗Π + γ(Π⊗Φ + Φ⊗Π)` at one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GqeDecomposition {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub pi: [f64; N],
    pub phi: [f64; N],
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GqeFit {
    pub verdict: Verdict,
    pub per_point: Vec<Option<GqeDecomposition>>,
}

pub fn gqe_residual(s: &Tensor, g: &Tensor, d: &GqeDecomposition) -> f64 {
    let recon = Tensor::from_fn(Valence::covariant(2), |i| {
        let (a, b) = (i[0], i[1]);
        d.alpha * g.get(&[a, b])
            + d.beta * d.pi[a] * d.pi[b]
            + d.gamma * (d.pi[a] * d.phi[b] + d.phi[a] * d.pi[b])
    });
    ratio(&(s - &recon), s.max_abs().max(g.max_abs()))
}

/// Factor the rank-2 form `S − αg` with `β = −1`, `γ = 1`.
///
/// Requires the two nonzero eigenvalues of `S − αg` (as a symmetric matrix)
/// to have opposite signs; a definite residual admits no factorization with
/// `γ ≠ 0`.
pub fn chaki_gqe_decompose(s: &Tensor, g: &Tensor, alpha: f64, tol: &ToleranceModel) -> Option<GqeDecomposition> {
    let m = s.axpy(-alpha, g).to_matrix();
    let scale = s.max_abs().max(alpha.abs() * g.max_abs()).max(1.0);
    let eig = SymmetricEigen::new(m);
    let cut = tol.eps_rank.sqrt() * scale;
    let nonzero: Vec<usize> = (0..N).filter(|&i| eig.eigenvalues[i].abs() > cut).collect();
    if nonzero.len() != 2 {
        return None;
    }
    let (mut i1, mut i2) = (nonzero[0], nonzero[1]);
    if eig.eigenvalues[i1] < eig.eigenvalues[i2] {
        std::mem::swap(&mut i1, &mut i2);
    }
    let (l1, l2) = (eig.eigenvalues[i1], eig.eigenvalues[i2]);
    if !(l1 > 0.0 && l2 < 0.0) {
        return None;
    }
    let u1 = eig.eigenvectors.column(i1);
    let u2 = eig.eigenvectors.column(i2);
    let (a, bb) = (l1.sqrt(), (-l2).sqrt());
    let (c, d) = (l1 / (2.0 * a), l2 / (2.0 * bb));
    let pi: [f64; N] = std::array::from_fn(|k| a * u1[k] + bb * u2[k]);
    let psi: [f64; N] = std::array::from_fn(|k| c * u1[k] + d * u2[k]);
    let phi: [f64; N] = std::array::from_fn(|k| psi[k] + 0.5 * pi[k]);
    let mut out = GqeDecomposition {
        alpha,
        beta: -1.0,
        gamma: 1.0,
        pi,
        phi,
        residual: 0.0,
    };
    out.residual = gqe_residual(s, g, &out);
    Some(out)
}

/// Decompose at every point, trying each `α` minimizer of `rank(S − αg)` that gives rank 2.
pub fn gqe(
    bundles: &[CurvatureBundle],
    qe: &QuasiEinsteinFit,
    tol: &ToleranceModel,
) -> Result<GqeFit, ClassifyError> {
    require_points(bundles.len(), tol)?;
    let per_point: Vec<Option<GqeDecomposition>> = bundles
        .iter()
        .zip(&qe.per_point)
        .map(|(b, p)| {
            p.candidates
                .iter()
                .zip(&p.ranks)
                .filter(|(_, r)| **r == 2)
                .find_map(|(al, _)| chaki_gqe_decompose(&b.ricci, b.g(), *al, tol))
        })
        .collect();
    let ok = per_point
        .iter()
        .all(|d| d.as_ref().is_some_and(|d| d.residual < tol.eps_fit));
    let verdict = if ok {
        Verdict::Holds
    } else if per_point.iter().all(|d| d.is_none()) {
        Verdict::Degenerate
    } else {
        Verdict::Fails
    };
    Ok(GqeFit { verdict, per_point })
}

/// `‖div T‖∞ / scale` per point for a curvature tensor.
pub fn divergence_check(
    bundles: &[CurvatureBundle],
    t: Curv,
    tol: &ToleranceModel,
) -> Result<ZeroCheck, ClassifyError> {
    require_points(bundles.len(), tol)?;
    let r = bundles
        .iter()
        .map(|b| {
            let scale = b.scale().max(b.curv(t).max_abs());
            ratio(&divergence(b.nabla(t), b.ginv()), scale)
        })
        .collect();
    Ok(ZeroCheck::from_ratios(r, tol.eps_zero))
}

/// `R = 0`.
pub fn check_flat(bundles: &[CurvatureBundle], tol: &ToleranceModel) -> Result<ZeroCheck, ClassifyError> {
    require_points(bundles.len(), tol)?;
    let r = bundles.iter().map(|b| ratio(&b.riemann, b.metric.scale())).collect();
    Ok(ZeroCheck::from_ratios(r, tol.eps_zero))
}

/// `S = (κ/4) g`.
pub fn check_einstein(bundles: &[CurvatureBundle], tol: &ToleranceModel) -> Result<ZeroCheck, ClassifyError> {
    require_points(bundles.len(), tol)?;
    let r = bundles
        .iter()
        .map(|b| ratio(&b.ricci.axpy(-b.kappa / 4.0, b.g()), b.scale().max(b.ricci.max_abs())))
        .collect();
    Ok(ZeroCheck::from_ratios(r, tol.eps_zero))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rand_tensor(seed: u64, rank: usize) -> Tensor {
        let mut x = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        Tensor::from_fn(Valence::covariant(rank), |_| {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((x >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        })
    }

    #[test]
    fn scalar_fit_recovers_coefficient() {
        let b = rand_tensor(1, 4);
        let noise = rand_tensor(2, 4).scaled(1e-12);
        let a = &b.scaled(-0.37) + &noise;
        let (j, res) = scalar_fit(&a, &b, 1.0, 1e-9).unwrap();
        assert!((j + 0.37).abs() < 1e-9);
        assert!(res < 1e-11);
        assert!(scalar_fit(&a, &Tensor::covariant(4), 1.0, 1e-9).is_none());
    }

    #[test]
    fn column_fit_recovers_coefficients() {
        let cols: Vec<Tensor> = (0..4).map(|k| rand_tensor(10 + k, 4)).collect();
        let x = [0.5, -1.25, 3.0, 1e-3];
        let mut t = rand_tensor(99, 4).scaled(1e-12);
        for (c, v) in cols.iter().zip(x) {
            t = t.axpy(v, c);
        }
        let refs: Vec<&Tensor> = cols.iter().collect();
        let (got, res, rank) = fit_columns(&t, &refs, 1.0, &ToleranceModel::default());
        assert_eq!(rank, 4);
        assert!(res < 1e-11);
        for (g, w) in got.iter().zip(x) {
            assert!((g - w).abs() < 1e-9);
        }
    }

    #[test]
    fn gradient_family_recovers_covectors() {
        let cols: Vec<Tensor> = (0..3).map(|k| rand_tensor(20 + k, 4)).collect();
        let covs = [[0.1, -0.2, 0.3, 0.4], [1.0, 0.0, -1.0, 2.0], [0.0, 0.5, 0.25, -0.75]];
        let slices: Vec<Tensor> = (0..N)
            .map(|a| {
                let mut t = rand_tensor(50 + a as u64, 4).scaled(1e-12);
                for (c, cov) in cols.iter().zip(&covs) {
                    t = t.axpy(cov[a], c);
                }
                t
            })
            .collect();
        let nabla = Tensor::stack(&slices);
        let refs: Vec<&Tensor> = cols.iter().collect();
        let (got, res, nullity) = fit_gradient_family(&nabla, &refs, 1.0, &ToleranceModel::default());
        assert_eq!(nullity, 0);
        assert!(res < 1e-11);
        for (g, w) in got.iter().zip(&covs) {
            for k in 0..N {
                assert!((g[k] - w[k]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn gqe_factorisation_reconstructs() {
        let g = Tensor::from_fn(Valence::covariant(2), |i| if i[0] == i[1] { [-2.0, 2.0, 1.0, 1.0][i[0]] } else { 0.0 });
        // S − αg with eigenvalues of both signs
        let mut s = g.scaled(-1.0);
        s.set(&[0, 0], s.get(&[0, 0]) + 1.5);
        s.set(&[1, 1], s.get(&[1, 1]) - 0.75);
        s.set(&[0, 1], 0.3);
        s.set(&[1, 0], 0.3);
        let d = chaki_gqe_decompose(&s, &g, -1.0, &ToleranceModel::default()).unwrap();
        assert!(d.residual < 1e-12);
        // definite residual has no such factorisation
        let mut s2 = g.scaled(-1.0);
        s2.set(&[0, 0], s2.get(&[0, 0]) + 1.0);
        s2.set(&[1, 1], s2.get(&[1, 1]) + 2.0);
        assert!(chaki_gqe_decompose(&s2, &g, -1.0, &ToleranceModel::default()).is_none());
    }

    #[test]
    fn tolerance_validation() {
        assert!(ToleranceModel::default().validate().is_ok());
        let bad = ToleranceModel {
            eps_rank: 1.5,
            ..ToleranceModel::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn verdict_serialisation() {
        assert_eq!(serde_json::to_string(&Verdict::Degenerate).unwrap(), "\"degenerate\"");
        assert_eq!(serde_json::to_string(&ZKind::G).unwrap(), "\"g\"");
    }
}
