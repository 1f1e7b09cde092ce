//! Built-in metrics, the metric file format, point sampling and physical relations.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curvature::{CurvatureBundle, CurvatureError, MetricValue};
use crate::exprlang::{parse_expr, EvalError, Expr, ParamEnv, ParseError};
use crate::jets::{Jet3, NVARS};
use crate::tensor::Tensor;

pub const BUILTIN_NAMES: [&str; 6] = [
    "minkowski",
    "sphere_product",
    "nariai",
    "charged_nariai",
    "cns_type",
    "anti_nariai",
];

/// Sampling margin: singular predicates must exceed this magnitude.
pub const SINGULAR_MARGIN: f64 = 0.05;
pub const MIN_ABS_DET: f64 = 1e-8;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum CatalogError {
    #[error("unknown metric `{0}` (built-ins: minkowski, sphere_product, nariai, charged_nariai, cns_type, anti_nariai)")]
    UnknownMetric(String),
    #[error("parameter `{name}` = {value} is outside {range}")]
    ParamOutOfRange {
        name: String,
        value: f64,
        range: &'static str,
    },
    #[error("unknown parameter `{name}` for metric `{metric}`")]
    UnknownParam { name: String, metric: String },
    #[error("in {context}: {source}")]
    Parse {
        context: String,
        #[source]
        source: ParseError,
    },
    #[error("profile `{name}` may depend only on `{coord}` and parameters")]
    ProfileDependence { name: &'static str, coord: &'static str },
    #[error("profiles are only accepted by cns_type")]
    UnexpectedProfile,
    #[error("metric `{0}` has no profile functions")]
    NotProfiled(String),
    #[error("evaluating {context} at {point:?}: {source}")]
    Eval {
        context: String,
        point: [f64; NVARS],
        #[source]
        source: EvalError,
    },
    #[error("at {point:?}: {source}")]
    Curvature {
        point: [f64; NVARS],
        #[source]
        source: CurvatureError,
    },
    #[error("component ({i},{j}) and ({j},{i}) differ: `{a}` vs `{b}`")]
    Asymmetric {
        i: usize,
        j: usize,
        a: String,
        b: String,
    },
    #[error("bad component key `{0}` (expected \"i,j\" with 0 <= i,j <= 3)")]
    BadComponentKey(String),
    #[error("metric file: {0}")]
    File(String),
    #[error("could not find {count} admissible points in {attempts} attempts")]
    RejectionExhausted { count: usize, attempts: usize },
}

/// Profile functions of the product family `ξ(r)`, `h(θ)`.
#[derive(Debug, Clone)]
pub struct Profiles {
    pub xi_source: String,
    pub h_source: String,
    xi: Expr,
    h: Expr,
}

/// A chart, parameters and symmetric component expressions.
#[derive(Debug, Clone)]
pub struct MetricSpec {
    pub name: String,
    pub coords: [String; NVARS],
    pub params: ParamEnv,
    sources: [[String; NVARS]; NVARS],
    components: [[Expr; NVARS]; NVARS],
    pub singular_sources: Vec<String>,
    singular: Vec<Expr>,
    pub profiles: Option<Profiles>,
}

fn parse_in(context: impl Into<String>, src: &str, coords: &[String], params: &[String]) -> Result<Expr, CatalogError> {
    parse_expr(src, coords, params).map_err(|source| CatalogError::Parse {
        context: context.into(),
        source,
    })
}

impl MetricSpec {
    /// Builds a spec from component sources keyed by `(i, j)`; missing entries are zero.
    pub fn new(
        name: &str,
        coords: &[&str],
        params: ParamEnv,
        components: &BTreeMap<(usize, usize), String>,
        singular: &[String],
    ) -> Result<Self, CatalogError> {
        let coords_v: Vec<String> = coords.iter().map(|s| s.to_string()).collect();
        let pnames: Vec<String> = params.names().map(str::to_string).collect();
        crate::exprlang::check_binding(&coords_v, &pnames).map_err(|source| CatalogError::Parse {
            context: format!("metric `{name}`"),
            source,
        })?;
        let mut sources: [[String; NVARS]; NVARS] = Default::default();
        for (&(i, j), src) in components {
            if i >= NVARS || j >= NVARS {
                return Err(CatalogError::BadComponentKey(format!("{i},{j}")));
            }
            if let Some((a, b)) = components.get(&(j, i)).map(|o| (src, o)) {
                if a.trim() != b.trim() {
                    return Err(CatalogError::Asymmetric {
                        i: i.min(j),
                        j: i.max(j),
                        a: components[&(i.min(j), i.max(j))].clone(),
                        b: components[&(i.max(j), i.min(j))].clone(),
                    });
                }
            }
            sources[i][j] = src.clone();
            sources[j][i] = src.clone();
        }
        let mut comps: Vec<Expr> = Vec::with_capacity(16);
        for (i, row) in sources.iter_mut().enumerate() {
            for (j, src) in row.iter_mut().enumerate() {
                if src.trim().is_empty() {
                    *src = "0".into();
                }
                comps.push(parse_in(format!("component ({i},{j})"), src, &coords_v, &pnames)?);
            }
        }
        let mut it = comps.into_iter();
        let components = std::array::from_fn(|_| std::array::from_fn(|_| it.next().expect("16")));
        let singular_exprs = singular
            .iter()
            .enumerate()
            .map(|(k, s)| parse_in(format!("singular_locus[{k}]"), s, &coords_v, &pnames))
            .collect::<Result<Vec<_>, _>>()?;
        let spec = MetricSpec {
            name: name.to_string(),
            coords: std::array::from_fn(|k| coords_v[k].clone()),
            params,
            sources,
            components,
            singular_sources: singular.to_vec(),
            singular: singular_exprs,
            profiles: None,
        };
        spec.check_params_bound()?;
        Ok(spec)
    }

    fn check_params_bound(&self) -> Result<(), CatalogError> {
        for row in &self.components {
            for e in row {
                for p in e.params() {
                    if !self.params.contains(&p) {
                        return Err(CatalogError::Eval {
                            context: format!("metric `{}`", self.name),
                            point: [0.0; NVARS],
                            source: EvalError::UnboundParameter(p),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn component_source(&self, i: usize, j: usize) -> &str {
        &self.sources[i][j]
    }

    /// Metric components and derivatives through third order.
    pub fn metric_at(&self, point: &[f64; NVARS]) -> Result<MetricValue, CatalogError> {
        let mut jets: [[Jet3; NVARS]; NVARS] = Default::default();
        for i in 0..NVARS {
            for j in i..NVARS {
                let v = self.components[i][j]
                    .eval_jet(point, &self.params)
                    .map_err(|source| CatalogError::Eval {
                        context: format!("component ({i},{j}) of `{}`", self.name),
                        point: *point,
                        source,
                    })?;
                jets[j][i] = v;
                jets[i][j] = v;
            }
        }
        MetricValue::from_jets(&jets).map_err(|source| CatalogError::Curvature { point: *point, source })
    }

    pub fn bundle_at(&self, point: &[f64; NVARS]) -> Result<CurvatureBundle, CatalogError> {
        let m = self.metric_at(point)?;
        CurvatureBundle::from_metric(*point, m)
            .map_err(|source| CatalogError::Curvature { point: *point, source })
    }

    /// Component values only (no derivatives).
    pub fn metric_values(&self, point: &[f64; NVARS]) -> Result<Tensor, CatalogError> {
        let mut out = Tensor::covariant(2);
        for i in 0..NVARS {
            for j in 0..NVARS {
                let v = self.components[i][j].eval(point, &self.params).map_err(|source| {
                    CatalogError::Eval {
                        context: format!("component ({i},{j}) of `{}`", self.name),
                        point: *point,
                        source,
                    }
                })?;
                out.set(&[i, j], v);
            }
        }
        Ok(out)
    }

    /// True when the point clears every singular predicate and the determinant bound.
    pub fn admissible(&self, point: &[f64; NVARS]) -> bool {
        for e in &self.singular {
            match e.eval(point, &self.params) {
                Ok(v) if v.is_finite() && v.abs() >= SINGULAR_MARGIN => {}
                _ => return false,
            }
        }
        match self.metric_values(point) {
            Ok(g) => {
                let det = g.to_matrix().determinant();
                det.is_finite() && det.abs() >= MIN_ABS_DET
            }
            Err(_) => false,
        }
    }

    pub fn is_cns_family(&self) -> bool {
        self.profiles.is_some()
    }
}

fn src_map(diag: [&str; NVARS]) -> BTreeMap<(usize, usize), String> {
    diag.iter()
        .enumerate()
        .map(|(k, s)| ((k, k), s.to_string()))
        .collect()
}

fn require_range(
    env: &ParamEnv,
    name: &str,
    ok: impl Fn(f64) -> bool,
    range: &'static str,
) -> Result<(), CatalogError> {
    let v = env.get(name).unwrap_or(f64::NAN);
    if v.is_finite() && ok(v) {
        Ok(())
    } else {
        Err(CatalogError::ParamOutOfRange {
            name: name.to_string(),
            value: v,
            range,
        })
    }
}

fn with_overrides(metric: &str, defaults: ParamEnv, overrides: &ParamEnv) -> Result<ParamEnv, CatalogError> {
    for name in overrides.names() {
        if !defaults.contains(name) {
            return Err(CatalogError::UnknownParam {
                name: name.to_string(),
                metric: metric.to_string(),
            });
        }
    }
    Ok(defaults.merged(overrides))
}

const CNS_COORDS: [&str; 4] = ["t", "r", "theta", "phi"];

fn cns_components(xi: &str, h: &str) -> BTreeMap<(usize, usize), String> {
    src_map([
        &format!("-(r0^2/L0)*({xi})^2"),
        "r0^2/L0",
        "r0^2",
        &format!("r0^2*({h})^2"),
    ])
}

fn check_cns_params(env: &ParamEnv) -> Result<(), CatalogError> {
    require_range(env, "r0", |v| v > 0.0, "(0, inf)")?;
    require_range(env, "L0", |v| v > 0.0 && v <= 1.0, "(0, 1]")
}

fn parse_profile(
    name: &'static str,
    src: &str,
    coord: &'static str,
    env: &ParamEnv,
) -> Result<Expr, CatalogError> {
    let coords: Vec<String> = CNS_COORDS.iter().map(|s| s.to_string()).collect();
    let pnames: Vec<String> = env.names().map(str::to_string).collect();
    let e = parse_in(format!("profile `{name}`"), src, &coords, &pnames)?;
    if !depends_only_on(&e, coord) {
        return Err(CatalogError::ProfileDependence { name, coord });
    }
    Ok(e)
}

fn depends_only_on(e: &Expr, coord: &str) -> bool {
    match e {
        Expr::Num(_) | Expr::Param(_) => true,
        Expr::Coord { name, .. } => name == coord,
        Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => depends_only_on(a, coord),
        Expr::Binary(_, a, b) => depends_only_on(a, coord) && depends_only_on(b, coord),
    }
}

/// Resolve a built-in metric with parameter overrides and optional profiles.
pub fn lookup_metric(
    name: &str,
    overrides: &ParamEnv,
    profiles: Option<(&str, &str)>,
) -> Result<MetricSpec, CatalogError> {
    if profiles.is_some() && name != "cns_type" {
        return Err(CatalogError::UnexpectedProfile);
    }
    match name {
        "minkowski" => {
            let env = with_overrides(name, ParamEnv::new(), overrides)?;
            MetricSpec::new(name, &["t", "x", "y", "z"], env, &src_map(["-1", "1", "1", "1"]), &[])
        }
        "sphere_product" => {
            let env = with_overrides(name, ParamEnv::new().with("r0", 1.0), overrides)?;
            require_range(&env, "r0", |v| v > 0.0, "(0, inf)")?;
            MetricSpec::new(
                name,
                &CNS_COORDS,
                env,
                &src_map(["-1", "1", "r0^2", "r0^2*sin(theta)^2"]),
                &["sin(theta)".into()],
            )
        }
        "charged_nariai" => {
            let env = with_overrides(name, ParamEnv::new().with("r0", 1.0).with("L0", 0.5), overrides)?;
            check_cns_params(&env)?;
            MetricSpec::new(
                name,
                &CNS_COORDS,
                env,
                &cns_components("sin(r)", "sin(theta)"),
                &["sin(r)".into(), "sin(theta)".into()],
            )
        }
        "nariai" => {
            let env = with_overrides(name, ParamEnv::new().with("Lambda", 1.0), overrides)?;
            require_range(&env, "Lambda", |v| v > 0.0, "(0, inf)")?;
            let lambda = env.get("Lambda").expect("checked");
            let env = env.with("r0", 1.0 / lambda.sqrt()).with("L0", 1.0);
            MetricSpec::new(
                name,
                &CNS_COORDS,
                env,
                &cns_components("sin(r)", "sin(theta)"),
                &["sin(r)".into(), "sin(theta)".into()],
            )
        }
        "cns_type" => {
            let env = with_overrides(name, ParamEnv::new().with("r0", 1.0).with("L0", 0.5), overrides)?;
            check_cns_params(&env)?;
            let (xi_src, h_src) = profiles.unwrap_or(("sin(r)", "sin(theta)"));
            let xi = parse_profile("xi", xi_src, "r", &env)?;
            let h = parse_profile("h", h_src, "theta", &env)?;
            let mut spec = MetricSpec::new(
                name,
                &CNS_COORDS,
                env,
                &cns_components(xi_src, h_src),
                &[xi_src.to_string(), h_src.to_string()],
            )?;
            spec.profiles = Some(Profiles {
                xi_source: xi_src.to_string(),
                h_source: h_src.to_string(),
                xi,
                h,
            });
            Ok(spec)
        }
        "anti_nariai" => {
            let env = with_overrides(name, ParamEnv::new().with("a0", 1.0).with("K0", 1.5), overrides)?;
            require_range(&env, "a0", |v| v > 0.0, "(0, inf)")?;
            require_range(&env, "K0", |v| (1.0..2.0).contains(&v), "[1, 2)")?;
            MetricSpec::new(
                name,
                &["tau", "rho", "omega", "psi"],
                env,
                &src_map([
                    "-(a0^2/K0)*sinh(rho)^2",
                    "a0^2/K0",
                    "a0^2",
                    "a0^2*sinh(omega)^2",
                ]),
                &["sinh(rho)".into(), "sinh(omega)".into()],
            )
        }
        other => Err(CatalogError::UnknownMetric(other.to_string())),
    }
}

/// On-disk metric description.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MetricFile {
    pub name: String,
    pub coords: Vec<String>,
    #[serde(default)]
    pub params: ParamEnv,
    pub components: BTreeMap<String, String>,
    #[serde(default)]
    pub singular_locus: Vec<String>,
}

fn parse_key(key: &str) -> Result<(usize, usize), CatalogError> {
    let bad = || CatalogError::BadComponentKey(key.to_string());
    let (a, b) = key.split_once(',').ok_or_else(bad)?;
    let i: usize = a.trim().parse().map_err(|_| bad())?;
    let j: usize = b.trim().parse().map_err(|_| bad())?;
    if i >= NVARS || j >= NVARS {
        return Err(bad());
    }
    Ok((i, j))
}

impl MetricFile {
    pub fn from_json(text: &str) -> Result<Self, CatalogError> {
        serde_json::from_str(text).map_err(|e| CatalogError::File(e.to_string()))
    }

    pub fn into_spec(self, overrides: &ParamEnv) -> Result<MetricSpec, CatalogError> {
        if self.coords.len() != NVARS {
            return Err(CatalogError::File(format!(
                "`coords` must list {NVARS} names, found {}",
                self.coords.len()
            )));
        }
        let env = with_overrides(&self.name, self.params.clone(), overrides)?;
        let mut comps = BTreeMap::new();
        for (k, v) in &self.components {
            let key = parse_key(k)?;
            if comps.insert(key, v.clone()).is_some() {
                return Err(CatalogError::File(format!("component `{k}` given twice")));
            }
        }
        let coords: Vec<&str> = self.coords.iter().map(String::as_str).collect();
        MetricSpec::new(&self.name, &coords, env, &comps, &self.singular_locus)
    }
}

/// Deterministic admissible points in the default chart box.
///
/// Axes 0 and 3 are drawn from `[0, 2π)`, axes 1 and 2 from `[0.2, π − 0.2]`.
pub fn sample_points(spec: &MetricSpec, count: usize, seed: u64) -> Result<Vec<[f64; NVARS]>, CatalogError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let attempts = 1000 * count.max(1);
    let mut out = Vec::with_capacity(count);
    for _ in 0..attempts {
        if out.len() == count {
            break;
        }
        let p = [
            rng.gen_range(0.0..2.0 * PI),
            rng.gen_range(0.2..PI - 0.2),
            rng.gen_range(0.2..PI - 0.2),
            rng.gen_range(0.0..2.0 * PI),
        ];
        if spec.admissible(&p) {
            out.push(p);
        }
    }
    if out.len() < count {
        return Err(CatalogError::RejectionExhausted { count, attempts });
    }
    Ok(out)
}

/// Cosmological constant, charge and unit constants for the charged family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    pub c: f64,
    pub g_newton: f64,
    pub lambda: f64,
    /// `q0² = (1 − L0) r0 / 2`, kept in the form it is usually quoted.
    pub q0_squared: f64,
}

impl PhysicalConstants {
    pub fn for_cns(r0: f64, l0: f64, c: f64, g_newton: f64) -> Self {
        PhysicalConstants {
            c,
            g_newton,
            lambda: (1.0 + l0) / (2.0 * r0 * r0),
            q0_squared: (1.0 - l0) * r0 / 2.0,
        }
    }

    /// `c⁴ / (8πG)`
    pub fn coupling(&self) -> f64 {
        self.c.powi(4) / (8.0 * PI * self.g_newton)
    }
}

/// Energy-momentum tensor `T = c⁴/(8πG) [S − (κ/2 − Λ) g]` and its covariant derivative.
pub fn energy_momentum(b: &CurvatureBundle, k: &PhysicalConstants) -> (Tensor, Tensor) {
    let coupling = k.coupling();
    let t = b.ricci.axpy(-(b.kappa / 2.0 - k.lambda), b.g()).scaled(coupling);
    let slices: Vec<Tensor> = (0..NVARS)
        .map(|a| {
            b.nabla_ricci
                .leading_slice(a)
                .axpy(-b.nabla_kappa[a] / 2.0, b.g())
                .scaled(coupling)
        })
        .collect();
    (t, Tensor::stack(&slices))
}

/// Profile derivatives and the combinations `ω₁`, `ω₂`, `Ω` at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CnsAuxiliaries {
    /// `ξ, ξ′, ξ″, ξ‴`
    pub xi: [f64; 4],
    /// `h, h′, h″, h‴`
    pub h: [f64; 4],
    /// `ξ′ξ″ − ξξ‴`
    pub omega1: f64,
    /// `h′h″ − hh‴`
    pub omega2: f64,
    /// `L0 h ξ″ − ξ h″`
    pub big_omega: f64,
    /// `L0 h ξ″ + ξ h″`; the conformal tensor vanishes where this does.
    pub u_c: f64,
}

pub fn cns_type_auxiliaries(spec: &MetricSpec, point: &[f64; NVARS]) -> Result<CnsAuxiliaries, CatalogError> {
    let prof = spec
        .profiles
        .as_ref()
        .ok_or_else(|| CatalogError::NotProfiled(spec.name.clone()))?;
    let eval = |e: &Expr, axis: usize, what: &str| -> Result<[f64; 4], CatalogError> {
        let j = e.eval_jet(point, &spec.params).map_err(|source| CatalogError::Eval {
            context: format!("profile `{what}`"),
            point: *point,
            source,
        })?;
        Ok([
            j.value(),
            j.d1(axis),
            j.d2(axis, axis),
            j.d3(axis, axis, axis),
        ])
    };
    let xi = eval(&prof.xi, 1, "xi")?;
    let h = eval(&prof.h, 2, "h")?;
    let l0 = spec.params.get("L0").unwrap_or(1.0);
    Ok(CnsAuxiliaries {
        xi,
        h,
        omega1: xi[1] * xi[2] - xi[0] * xi[3],
        omega2: h[1] * h[2] - h[0] * h[3],
        big_omega: l0 * h[0] * xi[2] - xi[0] * h[2],
        u_c: l0 * h[0] * xi[2] + xi[0] * h[2],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cns(r0: f64, l0: f64) -> MetricSpec {
        lookup_metric("charged_nariai", &ParamEnv::new().with("r0", r0).with("L0", l0), None).unwrap()
    }

    #[test]
    fn charged_nariai_components() {
        let g = cns(1.0, 0.5).metric_values(&[0.0, PI / 2.0, PI / 2.0, 0.0]).unwrap();
        let d = [-2.0, 2.0, 1.0, 1.0];
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { d[i] } else { 0.0 };
                assert!((g.get(&[i, j]) - want).abs() < 1e-15);
            }
        }
        let g = cns(1.0, 0.5).metric_values(&[0.0, PI / 6.0, PI / 3.0, 0.0]).unwrap();
        assert!((g.get(&[0, 0]) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn parameter_ranges() {
        let bad = |n: &str, env: ParamEnv| lookup_metric(n, &env, None).unwrap_err();
        assert!(matches!(bad("charged_nariai", ParamEnv::new().with("L0", 1.5)), CatalogError::ParamOutOfRange { .. }));
        assert!(matches!(bad("anti_nariai", ParamEnv::new().with("K0", 2.0)), CatalogError::ParamOutOfRange { .. }));
        assert!(matches!(bad("nariai", ParamEnv::new().with("q", 1.0)), CatalogError::UnknownParam { .. }));
        assert!(matches!(bad("no_such", ParamEnv::new()), CatalogError::UnknownMetric(_)));
        assert!(lookup_metric("anti_nariai", &ParamEnv::new().with("K0", 1.0), None).is_ok());
    }

    #[test]
    fn profiles_are_restricted() {
        let e = lookup_metric("cns_type", &ParamEnv::new(), Some(("sin(theta)", "sin(theta)"))).unwrap_err();
        assert!(matches!(e, CatalogError::ProfileDependence { name: "xi", .. }));
        let e = lookup_metric("nariai", &ParamEnv::new(), Some(("sin(r)", "sin(theta)"))).unwrap_err();
        assert_eq!(e, CatalogError::UnexpectedProfile);
    }

    #[test]
    fn sampling_is_deterministic_and_admissible() {
        let spec = cns(1.0, 0.5);
        let a = sample_points(&spec, 8, 42).unwrap();
        let b = sample_points(&spec, 8, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 8);
        for p in &a {
            assert!(p[1].sin().abs() >= SINGULAR_MARGIN && p[2].sin().abs() >= SINGULAR_MARGIN);
        }
        assert_ne!(a, sample_points(&spec, 8, 43).unwrap());
    }

    #[test]
    fn rejection_exhaustion() {
        let mut comps = BTreeMap::new();
        comps.insert((0, 0), "-1".to_string());
        comps.insert((1, 1), "1".to_string());
        comps.insert((2, 2), "1".to_string());
        comps.insert((3, 3), "1".to_string());
        let spec = MetricSpec::new("never", &["a", "b", "c", "d"], ParamEnv::new(), &comps, &["0.01".into()]).unwrap();
        assert!(matches!(sample_points(&spec, 2, 1), Err(CatalogError::RejectionExhausted { .. })));
    }

    #[test]
    fn auxiliaries_for_the_generic_profile() {
        let spec = lookup_metric("cns_type", &ParamEnv::new(), Some(("2+sin(r)", "2+sin(theta)"))).unwrap();
        let aux = cns_type_auxiliaries(&spec, &[0.0, PI / 6.0, PI / 3.0, 0.0]).unwrap();
        assert!((aux.omega1 - 3f64.sqrt()).abs() < 1e-12);
        assert!((aux.omega2 - 1.0).abs() < 1e-12);
        assert!((aux.big_omega - 1.448_557_158_514_987).abs() < 1e-9);
        let plain = lookup_metric("cns_type", &ParamEnv::new(), None).unwrap();
        for x in [0.3, 1.0, 2.2] {
            let aux = cns_type_auxiliaries(&plain, &[0.0, x, 1.0, 0.0]).unwrap();
            assert!(aux.omega1.abs() < 1e-14);
        }
        assert!(matches!(cns_type_auxiliaries(&cns(1.0, 0.5), &[0.0; 4]), Err(CatalogError::NotProfiled(_))));
    }

    #[test]
    fn metric_file_parsing() {
        let text = r#"{"name":"flat","coords":["t","x","y","z"],"components":{"0,0":"-1","1,1":"1","2,2":"1","3,3":"1"}}"#;
        let spec = MetricFile::from_json(text).unwrap().into_spec(&ParamEnv::new()).unwrap();
        let g = spec.metric_values(&[0.1, 0.2, 0.3, 0.4]).unwrap();
        assert_eq!(g.get(&[0, 0]), -1.0);
        assert_eq!(g.get(&[0, 1]), 0.0);

        let missing = r#"{"name":"x","components":{}}"#;
        let err = MetricFile::from_json(missing).unwrap_err().to_string();
        assert!(err.contains("coords"), "{err}");

        let asym = r#"{"name":"x","coords":["t","x","y","z"],"components":{"0,1":"t","1,0":"x","0,0":"-1"}}"#;
        let err = MetricFile::from_json(asym).unwrap().into_spec(&ParamEnv::new()).unwrap_err();
        assert!(matches!(err, CatalogError::Asymmetric { i: 0, j: 1, .. }));

        let bad_key = r#"{"name":"x","coords":["t","x","y","z"],"components":{"0;1":"t"}}"#;
        assert!(MetricFile::from_json(bad_key).unwrap().into_spec(&ParamEnv::new()).is_err());
    }

    #[test]
    fn energy_momentum_at_equator() {
        let spec = cns(1.0, 0.5);
        let b = spec.bundle_at(&[0.0, PI / 2.0, PI / 2.0, 0.0]).unwrap();
        let k = PhysicalConstants::for_cns(1.0, 0.5, 1.0, 1.0);
        let (t, nt) = energy_momentum(&b, &k);
        let unit = 1.0 / (16.0 * PI);
        let want = [-7.0, 7.0, 2.5, 2.5];
        for (i, w) in want.iter().enumerate() {
            assert!((t.get(&[i, i]) / unit - w).abs() < 1e-10, "T_{i}{i}");
        }
        assert!(nt.max_abs() < 1e-10);
    }
}
