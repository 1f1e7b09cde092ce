//! The classification run: sampling, every structure test, audits, and report output.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audit::{run_audits, AuditEntry};
use crate::catalog::{energy_momentum, lookup_metric, sample_points, CatalogError, MetricFile, MetricSpec, PhysicalConstants};
use crate::classify::*;
use crate::curvature::{Curv, CurvatureBundle, SIGN_CONVENTION};
use crate::exprlang::ParamEnv;
use crate::jets::NVARS;
use crate::tensor::Tensor;

#[derive(Debug, Clone, PartialEq)]
pub enum MetricSource {
    Builtin(String),
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub source: MetricSource,
    pub params: ParamEnv,
    /// `(ξ, h)` expressions for `cns_type`.
    pub profiles: Option<(String, String)>,
    pub points: usize,
    pub seed: u64,
    pub tolerances: ToleranceModel,
    /// Structure ids or id prefixes; `None` selects everything.
    pub structures: Option<Vec<String>>,
}

impl RunConfig {
    pub fn builtin(name: &str) -> Self {
        RunConfig {
            source: MetricSource::Builtin(name.to_string()),
            params: ParamEnv::new(),
            profiles: None,
            points: 16,
            seed: 7,
            tolerances: ToleranceModel::default(),
            structures: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("unknown structure selector `{0}`")]
    UnknownStructure(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Json,
    Text,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileInfo {
    pub xi: String,
    pub h: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricInfo {
    pub name: String,
    pub coords: Vec<String>,
    /// Nonzero upper-triangle components keyed `"i,j"`.
    pub components: BTreeMap<String, String>,
    pub singular_locus: Vec<String>,
    pub profiles: Option<ProfileInfo>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Convention {
    pub sign: String,
    pub tolerances: ToleranceModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointDiagnostics {
    pub coords: [f64; NVARS],
    pub det_g: f64,
    pub kappa: f64,
    pub riemann_max: f64,
    pub ricci_max: f64,
    pub nabla_riemann_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSet {
    pub seed: u64,
    pub count: usize,
    pub samples: Vec<PointDiagnostics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Detail {
    Zero(ZeroCheck),
    Scalar(ScalarFit),
    Roter(RoterFit),
    QuasiEinstein(QuasiEinsteinFit),
    EinK(EinKFit),
    Covector(CovectorFit),
    Span(SpanFit),
    Gqe(GqeFit),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Structure {
    pub id: String,
    pub description: String,
    pub verdict: Verdict,
    /// Residual, zero-ratio or dimension, depending on the test.
    pub measure: f64,
    pub summary: String,
    pub detail: Detail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub metric: MetricInfo,
    pub params: ParamEnv,
    pub convention: Convention,
    pub points: PointSet,
    pub structures: Vec<Structure>,
    pub audits: Vec<AuditEntry>,
}

impl ClassificationReport {
    pub fn structure(&self, id: &str) -> Option<&Structure> {
        self.structures.iter().find(|s| s.id == id)
    }

    pub fn verdict(&self, id: &str) -> Option<Verdict> {
        self.structure(id).map(|s| s.verdict)
    }
}

pub fn load_metric_file(path: &Path, overrides: &ParamEnv) -> Result<MetricSpec, RunError> {
    let text = std::fs::read_to_string(path).map_err(|source| RunError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(MetricFile::from_json(&text)?.into_spec(overrides)?)
}

pub fn resolve_metric(cfg: &RunConfig) -> Result<MetricSpec, RunError> {
    match &cfg.source {
        MetricSource::Builtin(name) => {
            let prof = cfg.profiles.as_ref().map(|(x, h)| (x.as_str(), h.as_str()));
            Ok(lookup_metric(name, &cfg.params, prof)?)
        }
        MetricSource::File(path) => {
            if cfg.profiles.is_some() {
                return Err(CatalogError::UnexpectedProfile.into());
            }
            load_metric_file(path, &cfg.params)
        }
    }
}

/// Sample points and build one bundle per point, in point order.
pub fn sample_bundles(spec: &MetricSpec, count: usize, seed: u64) -> Result<Vec<CurvatureBundle>, RunError> {
    let pts = sample_points(spec, count, seed)?;
    let bundles: Result<Vec<_>, CatalogError> = pts.par_iter().map(|p| spec.bundle_at(p)).collect();
    Ok(bundles?)
}

fn metric_info(spec: &MetricSpec) -> MetricInfo {
    let mut components = BTreeMap::new();
    for i in 0..NVARS {
        for j in i..NVARS {
            let src = spec.component_source(i, j);
            if !src.trim().is_empty() && src.trim() != "0" {
                components.insert(format!("{i},{j}"), src.to_string());
            }
        }
    }
    MetricInfo {
        name: spec.name.clone(),
        coords: spec.coords.to_vec(),
        components,
        singular_locus: spec.singular_sources.clone(),
        profiles: spec.profiles.as_ref().map(|p| ProfileInfo {
            xi: p.xi_source.clone(),
            h: p.h_source.clone(),
        }),
    }
}

fn diagnostics(b: &CurvatureBundle) -> PointDiagnostics {
    PointDiagnostics {
        coords: b.point,
        det_g: b.metric.det,
        kappa: b.kappa,
        riemann_max: b.riemann.max_abs(),
        ricci_max: b.ricci.max_abs(),
        nabla_riemann_max: b.nabla_riemann.max_abs(),
    }
}

type Builder<'a> = Box<dyn Fn() -> Result<Structure, ClassifyError> + Send + Sync + 'a>;

struct Menu<'a> {
    items: Vec<(String, Builder<'a>)>,
}

impl<'a> Menu<'a> {
    fn add(&mut self, id: impl Into<String>, f: impl Fn() -> Result<Structure, ClassifyError> + Send + Sync + 'a) {
        self.items.push((id.into(), Box::new(f)));
    }
}

fn zero_structure(id: &str, description: String, z: ZeroCheck) -> Structure {
    Structure {
        id: id.into(),
        description,
        verdict: z.verdict,
        measure: z.max_ratio,
        summary: format!("max |X|/scale = {:.3e}", z.max_ratio),
        detail: Detail::Zero(z),
    }
}

/// Display value with round-off-level magnitudes shown as 0.
fn tidy(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        0.0
    } else {
        x
    }
}

fn scalar_summary(f: &ScalarFit) -> String {
    match f.mean.map(tidy) {
        Some(m) => format!(
            "J = {m:.10} ({}), residual {:.3e}",
            if f.constant { "constant" } else { "point-dependent" },
            f.residual
        ),
        None => "Q vanishes at every point".into(),
    }
}

fn covector_summary(f: &CovectorFit) -> String {
    let first: Vec<String> = f
        .names
        .iter()
        .zip(&f.per_point[0])
        .map(|(n, v)| {
            let c: Vec<String> = v.iter().map(|x| format!("{:.6}", tidy(*x))).collect();
            format!("{n}=({})", c.join(", "))
        })
        .collect();
    format!(
        "residual {:.3e}, nullity {}, at first point {}",
        f.residual,
        f.nullity,
        first.join(" ")
    )
}

fn covector_structure(id: &str, description: String, f: CovectorFit) -> Structure {
    Structure {
        id: id.into(),
        description,
        verdict: f.verdict,
        measure: f.residual,
        summary: covector_summary(&f),
        detail: Detail::Covector(f),
    }
}

fn span_structure(id: &str, description: String, f: SpanFit) -> Structure {
    Structure {
        id: id.into(),
        description,
        verdict: Verdict::from_bool(f.dim >= 1),
        measure: f.dim as f64,
        summary: format!("dimension {}", f.dim),
        detail: Detail::Span(f),
    }
}

/// Physical constants for metrics that carry the charged Nariai parameters.
fn physical_constants(spec: &MetricSpec) -> Option<PhysicalConstants> {
    if !matches!(spec.name.as_str(), "charged_nariai" | "nariai" | "cns_type") {
        return None;
    }
    let r0 = spec.params.get("r0")?;
    let l0 = spec.params.get("L0")?;
    Some(PhysicalConstants::for_cns(r0, l0, 1.0, 1.0))
}

const TENSORS: [Curv; 5] = [Curv::R, Curv::C, Curv::P, Curv::W, Curv::K];

fn build_menu<'a>(spec: &'a MetricSpec, b: &'a [CurvatureBundle], tol: &'a ToleranceModel) -> Menu<'a> {
    let mut m = Menu { items: Vec::new() };

    m.add("flat", move || Ok(zero_structure("flat", "R = 0".into(), check_flat(b, tol)?)));
    m.add("einstein", move || {
        Ok(zero_structure("einstein", "S = (kappa/4) g".into(), check_einstein(b, tol)?))
    });

    for (id, kind, what) in [
        ("locally_symmetric", TensorKind::R, "nabla R = 0"),
        ("ricci_symmetric", TensorKind::S, "nabla S = 0"),
        ("conformally_symmetric", TensorKind::C, "nabla C = 0"),
        ("projectively_symmetric", TensorKind::P, "nabla P = 0"),
        ("concircularly_symmetric", TensorKind::W, "nabla W = 0"),
        ("conharmonically_symmetric", TensorKind::K, "nabla K = 0"),
    ] {
        m.add(id, move || Ok(zero_structure(id, what.into(), check_parallel(b, kind, tol)?)));
    }

    for u in TENSORS {
        for t in TensorKind::ALL {
            let id = format!("semisym_{}_{}", u.symbol(), t.symbol());
            m.add(id.clone(), move || {
                Ok(zero_structure(
                    &id,
                    format!("{}.{} = 0", u.symbol(), t.symbol()),
                    check_semisym(b, u, t, tol)?,
                ))
            });
        }
    }

    for z in [ZKind::G, ZKind::S] {
        for u in TENSORS {
            let id = format!("pseudosym_{}_R_{}", u.symbol(), z.symbol());
            m.add(id.clone(), move || {
                let f = fit_pseudosym(b, u, TensorKind::R, z, tol)?;
                Ok(Structure {
                    id: id.clone(),
                    description: format!("{}.R = J Q({},R)", u.symbol(), z.symbol()),
                    verdict: f.verdict,
                    measure: f.residual,
                    summary: scalar_summary(&f),
                    detail: Detail::Scalar(f),
                })
            });
        }
    }

    m.add("q_proportional", move || {
        let pairs: Vec<(Tensor, Tensor)> = b
            .iter()
            .map(|x| (q_of(x, ZKind::S, TensorKind::R), q_of(x, ZKind::G, TensorKind::R)))
            .collect();
        let f = fit_proportional(&pairs, tol)?;
        Ok(Structure {
            id: "q_proportional".into(),
            description: "Q(S,R) = c Q(g,R)".into(),
            verdict: f.verdict,
            measure: f.residual,
            summary: scalar_summary(&f).replacen("J =", "c =", 1),
            detail: Detail::Scalar(f),
        })
    });

    for (id, generalized) in [("roter", false), ("generalized_roter", true)] {
        m.add(id, move || {
            let f = fit_roter(b, generalized, tol)?;
            let coeffs: Vec<String> = f
                .terms
                .iter()
                .zip(&f.mean)
                .map(|(t, c)| format!("{t}: {c:.10}"))
                .collect();
            Ok(Structure {
                id: id.into(),
                description: if generalized {
                    "R in span of g^g, g^S, S^S, g^S2, S^S2, S2^S2".into()
                } else {
                    "R in span of g^g, g^S, S^S".into()
                },
                verdict: f.verdict,
                measure: f.residual,
                summary: format!(
                    "{} ({}, rank {}{}), residual {:.3e}",
                    coeffs.join(", "),
                    if f.constant { "constant" } else { "point-dependent" },
                    f.rank,
                    if f.unique { "" } else { ", non-unique" },
                    f.residual
                ),
                detail: Detail::Roter(f),
            })
        });
    }

    for (id, target) in [("quasi_einstein", 1usize), ("two_quasi_einstein", 2)] {
        m.add(id, move || {
            let f = quasi_einstein(b, tol)?;
            let alphas: Vec<String> = f.per_point[0].minimizers.iter().map(|a| format!("{a:.10}")).collect();
            Ok(Structure {
                id: id.into(),
                description: format!("rank(S - alpha g) = {target}"),
                verdict: if f.m == 0 { Verdict::Degenerate } else { Verdict::from_bool(f.m == target) },
                measure: f.m as f64,
                summary: format!("m = {}, minimizing alpha at first point: [{}]", f.m, alphas.join(", ")),
                detail: Detail::QuasiEinstein(f),
            })
        });
    }

    m.add("gqe_chaki", move || {
        let qe = quasi_einstein(b, tol)?;
        let f = gqe(b, &qe, tol)?;
        let summary = match f.per_point.first().and_then(|d| d.as_ref()) {
            Some(d) => format!(
                "alpha = {:.10}, beta = {}, gamma = {}, residual {:.3e} at first point",
                d.alpha, d.beta, d.gamma, d.residual
            ),
            None => "no factorization with an indefinite rank-2 residual".into(),
        };
        Ok(Structure {
            id: "gqe_chaki".into(),
            description: "S = alpha g + beta Pi Pi + gamma (Pi Phi + Phi Pi)".into(),
            verdict: f.verdict,
            measure: f
                .per_point
                .iter()
                .map(|d| d.as_ref().map_or(0.0, |d| d.residual))
                .fold(0.0, f64::max),
            summary,
            detail: Detail::Gqe(f),
        })
    });

    m.add("ein_2", move || {
        let f = ein_k(b, tol)?;
        let c: Vec<String> = f.per_point[0].coefficients.iter().map(|x| format!("{x:.10}")).collect();
        Ok(Structure {
            id: "ein_2".into(),
            description: "S^2 + a S + b g = 0 (lowest degree is 2)".into(),
            verdict: if f.k <= 1 { Verdict::Degenerate } else { Verdict::from_bool(f.k == 2) },
            measure: f.k as f64,
            summary: format!(
                "k = {}, coefficients at first point [{}] ({})",
                f.k,
                c.join(", "),
                if f.constant { "constant" } else { "point-dependent" }
            ),
            detail: Detail::EinK(f),
        })
    });

    m.add("codazzi", move || {
        Ok(zero_structure("codazzi", "nabla_p S_qr = nabla_q S_pr".into(), check_codazzi_cyclic(b, tol)?.0))
    });
    m.add("cyclic_parallel", move || {
        Ok(zero_structure(
            "cyclic_parallel",
            "cyclic sum of nabla_p S_qr = 0".into(),
            check_codazzi_cyclic(b, tol)?.1,
        ))
    });
    m.add("ricci_generalized_recurrent", move || {
        Ok(covector_structure(
            "ricci_generalized_recurrent",
            "nabla S = Pi S + Phi g".into(),
            fit_ricci_recurrence(b, tol)?,
        ))
    });
    m.add("ricci_one_form_recurrent", move || {
        Ok(covector_structure(
            "ricci_one_form_recurrent",
            "nabla_p S_qr - nabla_q S_pr = Pi_p S_qr - Pi_q S_pr".into(),
            one_form_recurrence(b, tol)?,
        ))
    });

    for t in TENSORS {
        for fam in RecurrenceFamily::ALL {
            let id = format!("{}_{}", fam.label(), t.symbol());
            m.add(id.clone(), move || {
                // conformal and conharmonic recurrence are posed where the tensor is nonzero
                let skip: Vec<bool> = b
                    .iter()
                    .map(|x| x.curv(t).max_abs() < tol.eps_zero * x.scale())
                    .collect();
                let f = fit_recurrence(b, t, fam, Some(&skip), tol)?;
                Ok(covector_structure(&id, format!("{}-{} recurrence", t.symbol(), fam.label()), f))
            });
        }
    }

    for t in TENSORS {
        let sym = t.symbol();
        let id = format!("ricci_compatible_{sym}");
        m.add(id.clone(), move || {
            let vals: Vec<_> = b.iter().map(|x| (x.ricci.clone(), x.curv(t).clone(), x.ginv().clone())).collect();
            Ok(zero_structure(&id, format!("S is {sym}-compatible"), check_compatibility(&vals, tol)?))
        });
        let id = format!("compatible_space_{sym}");
        m.add(id.clone(), move || {
            Ok(span_structure(
                &id,
                format!("symmetric tensors compatible with {sym}"),
                solve_compatible_space(b, t, tol)?,
            ))
        });
        let id = format!("venzi_{sym}");
        m.add(id.clone(), move || {
            Ok(span_structure(&id, format!("{sym}-space (Venzi)"), venzi_space(b, t, tol)?))
        });
        let id = format!("two_form_recurrent_{sym}");
        m.add(id.clone(), move || {
            Ok(covector_structure(
                &id,
                format!("curvature 2-forms of {sym} recurrent"),
                two_form_recurrence(b, t, tol)?,
            ))
        });
        let id = format!("divergence_free_{sym}");
        m.add(id.clone(), move || {
            Ok(zero_structure(&id, format!("div {sym} = 0"), divergence_check(b, t, tol)?))
        });
    }

    m.add("weakly_symmetric", move || {
        Ok(covector_structure(
            "weakly_symmetric",
            "weakly symmetric (five covectors)".into(),
            weak_symmetry_solve(b, tol)?.weak,
        ))
    });
    m.add("chaki_pseudosymmetric", move || {
        Ok(covector_structure(
            "chaki_pseudosymmetric",
            "weakly symmetric with Pi = 2 Phi and all slot covectors equal".into(),
            weak_symmetry_solve(b, tol)?.chaki,
        ))
    });

    if let Some(k) = physical_constants(spec) {
        m.add("energy_momentum_parallel", move || {
            let vals: Vec<_> = b
                .iter()
                .map(|x| {
                    let (t, nt) = energy_momentum(x, &k);
                    let s = x.scale().max(t.max_abs());
                    (nt, s)
                })
                .collect();
            Ok(zero_structure("energy_momentum_parallel", "nabla T = 0".into(), check_vanishing(&vals, tol)?))
        });
        for t in TENSORS {
            let sym = t.symbol();
            let id = format!("energy_momentum_compatible_{sym}");
            m.add(id.clone(), move || {
                let vals: Vec<_> = b
                    .iter()
                    .map(|x| (energy_momentum(x, &k).0, x.curv(t).clone(), x.ginv().clone()))
                    .collect();
                Ok(zero_structure(&id, format!("T is {sym}-compatible"), check_compatibility(&vals, tol)?))
            });
        }
    }
    m
}

fn selected(id: &str, sel: &[String]) -> bool {
    sel.iter().any(|s| id == s || (s.ends_with('*') && id.starts_with(&s[..s.len() - 1])))
}

/// All structure ids the run would produce for `spec`, in report order.
pub fn structure_ids(spec: &MetricSpec) -> Vec<String> {
    const TOL: ToleranceModel = ToleranceModel {
        eps_zero: 1e-9,
        eps_fit: 1e-8,
        eps_rank: 1e-8,
        min_points: 8,
    };
    build_menu(spec, &[], &TOL).items.into_iter().map(|(id, _)| id).collect()
}

pub fn run_classify(cfg: &RunConfig) -> Result<ClassificationReport, RunError> {
    cfg.tolerances.validate()?;
    if cfg.points < cfg.tolerances.min_points {
        return Err(ClassifyError::InsufficientPoints {
            need: cfg.tolerances.min_points,
            have: cfg.points,
        }
        .into());
    }
    let spec = resolve_metric(cfg)?;
    let bundles = sample_bundles(&spec, cfg.points, cfg.seed)?;
    let tol = cfg.tolerances;
    let menu = build_menu(&spec, &bundles, &tol);
    if let Some(sel) = &cfg.structures {
        for s in sel {
            if !menu.items.iter().any(|(id, _)| selected(id, std::slice::from_ref(s))) {
                return Err(RunError::UnknownStructure(s.clone()));
            }
        }
    }
    let chosen: Vec<&(String, Builder)> = menu
        .items
        .iter()
        .filter(|(id, _)| cfg.structures.as_ref().is_none_or(|sel| selected(id, sel)))
        .collect();
    let structures = chosen
        .par_iter()
        .map(|(_, f)| f())
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ClassificationReport {
        metric: metric_info(&spec),
        params: spec.params.clone(),
        convention: Convention {
            sign: SIGN_CONVENTION.to_string(),
            tolerances: tol,
        },
        points: PointSet {
            seed: cfg.seed,
            count: bundles.len(),
            samples: bundles.iter().map(diagnostics).collect(),
        },
        structures,
        audits: run_audits(&spec, &bundles, &tol),
    })
}

fn verdict_word(v: Verdict) -> &'static str {
    match v {
        Verdict::Holds => "holds",
        Verdict::Fails => "fails",
        Verdict::Vacuous => "vacuous",
        Verdict::Degenerate => "degenerate",
    }
}

pub fn emit_report(report: &ClassificationReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report values are finite");
            s.push('\n');
            s
        }
        ReportFormat::Text => emit_text(report),
    }
}

fn emit_text(r: &ClassificationReport) -> String {
    let mut out = String::new();
    let params: Vec<String> = r.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
    let _ = writeln!(out, "metric      {} ({})", r.metric.name, params.join(", "));
    if let Some(p) = &r.metric.profiles {
        let _ = writeln!(out, "profiles    xi = {}, h = {}", p.xi, p.h);
    }
    let _ = writeln!(out, "points      {} (seed {})", r.points.count, r.points.seed);
    let _ = writeln!(out, "convention  {}", r.convention.sign);
    let t = &r.convention.tolerances;
    let _ = writeln!(
        out,
        "tolerances  zero {:e}, fit {:e}, rank {:e}",
        t.eps_zero, t.eps_fit, t.eps_rank
    );
    let _ = writeln!(out);
    let width = r.structures.iter().map(|s| s.id.len()).max().unwrap_or(10);
    let _ = writeln!(out, "{:<width$}  {:<10}  {:>10}  summary", "structure", "verdict", "measure");
    for s in &r.structures {
        let _ = writeln!(
            out,
            "{:<width$}  {:<10}  {:>10.3e}  {}",
            s.id,
            verdict_word(s.verdict),
            s.measure,
            s.summary
        );
    }
    if !r.audits.is_empty() {
        let _ = writeln!(out);
        let _ = writeln!(out, "audits");
        for a in &r.audits {
            let status = match a.status {
                crate::audit::AuditStatus::Confirmed => "confirmed",
                crate::audit::AuditStatus::Discrepancy => "DISCREPANCY",
                crate::audit::AuditStatus::Noted => "noted",
            };
            let _ = writeln!(out, "  {:<40} {:<11} {}", a.id, status, a.finding);
            let _ = writeln!(out, "  {:<40} {:<11} reference: {}", "", "", a.reference);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selectors_match_prefixes() {
        let sel = vec!["semisym_*".to_string(), "roter".to_string()];
        assert!(selected("semisym_R_R", &sel));
        assert!(selected("roter", &sel));
        assert!(!selected("generalized_roter", &sel));
    }

    #[test]
    fn menu_ids_are_unique() {
        let spec = lookup_metric("charged_nariai", &ParamEnv::new(), None).unwrap();
        let ids = structure_ids(&spec);
        let mut sorted = ids.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), ids.len());
        assert!(ids.iter().any(|i| i == "energy_momentum_parallel"));
        let mink = lookup_metric("minkowski", &ParamEnv::new(), None).unwrap();
        assert!(!structure_ids(&mink).iter().any(|i| i.starts_with("energy")));
    }
}
