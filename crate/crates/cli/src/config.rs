//! Run configuration: one JSON file per invocation.
//!
//! Parsing is strict. Unknown keys, malformed weights and out-of-range
//! numbers are rejected with the line and column of the offending value,
//! before any computation starts.

use std::fmt;
use std::path::{Path, PathBuf};

use pspect::nodal::Nonlinearity;
use pspect::pfuncs::Exponent;
use pspect::radial_ivp::{IvpOptions, Operator};
use pspect::spectrum::{Sign, SpectrumOptions};
use pspect::weight::Weight;
use serde::Deserialize;
use sha2::{Digest, Sha256};

/// A configuration problem; always exit code 1.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    pub task: Task,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub p: f64,
    #[serde(rename = "N")]
    pub dim: u32,
    #[serde(default)]
    pub weight: Option<WeightSpec>,
}

/// A weight, already validated while parsing.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSpec(pub Weight);

/// Deserializes `Raw` from a JSON object and converts it inside the
/// object's own scope, so a conversion error carries the object's position
/// rather than that of an enclosing one.
fn validated_map<'de, D, Raw, T>(d: D, what: &'static str) -> Result<T, D::Error>
where
    D: serde::Deserializer<'de>,
    Raw: Deserialize<'de>,
    T: TryFrom<Raw, Error = String>,
{
    struct V<Raw, T>(&'static str, std::marker::PhantomData<(Raw, T)>);
    impl<'de, Raw: Deserialize<'de>, T: TryFrom<Raw, Error = String>> serde::de::Visitor<'de>
        for V<Raw, T>
    {
        type Value = T;

        fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            write!(f, "a {} object", self.0)
        }

        fn visit_map<A: serde::de::MapAccess<'de>>(self, map: A) -> Result<T, A::Error> {
            let raw = Raw::deserialize(serde::de::value::MapAccessDeserializer::new(map))?;
            T::try_from(raw).map_err(serde::de::Error::custom)
        }
    }
    d.deserialize_map(V::<Raw, T>(what, std::marker::PhantomData))
}

impl<'de> Deserialize<'de> for WeightSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        validated_map::<D, RawWeight, WeightSpec>(d, "weight")
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWeight {
    expr: Option<String>,
    breakpoints: Option<Vec<f64>>,
    coeffs: Option<serde_json::Value>,
    k: Option<f64>,
    offset: Option<f64>,
    amplitude: Option<f64>,
    value: Option<f64>,
}

fn float_list(v: &serde_json::Value, what: &str) -> Result<Vec<f64>, String> {
    let arr = v
        .as_array()
        .ok_or_else(|| format!("{what} must be an array of numbers"))?;
    arr.iter()
        .map(|x| {
            x.as_f64()
                .ok_or_else(|| format!("{what} must be an array of numbers"))
        })
        .collect()
}

impl TryFrom<RawWeight> for WeightSpec {
    type Error = String;

    fn try_from(raw: RawWeight) -> Result<Self, String> {
        let bad = |e: pspect::Error| e.to_string();
        let only = |allowed: &[&str]| -> Result<(), String> {
            let present = [
                ("breakpoints", raw.breakpoints.is_some()),
                ("coeffs", raw.coeffs.is_some()),
                ("k", raw.k.is_some()),
                ("offset", raw.offset.is_some()),
                ("amplitude", raw.amplitude.is_some()),
                ("value", raw.value.is_some()),
            ];
            for (name, set) in present {
                if set && !allowed.contains(&name) {
                    return Err(format!(
                        "weight key `{name}` does not belong to this weight form"
                    ));
                }
            }
            Ok(())
        };
        let weight = match raw.expr.as_deref() {
            None => {
                only(&["breakpoints", "coeffs"])?;
                let breaks = raw
                    .breakpoints
                    .clone()
                    .ok_or("weight needs `breakpoints` and `coeffs`, or an `expr`")?;
                let coeffs = raw.coeffs.as_ref().ok_or("weight needs `coeffs`")?;
                let pieces = coeffs
                    .as_array()
                    .ok_or("`coeffs` must be an array of coefficient arrays")?
                    .iter()
                    .map(|c| float_list(c, "each piece of `coeffs`"))
                    .collect::<Result<Vec<_>, _>>()?;
                Weight::piecewise(breaks, pieces).map_err(bad)?
            }
            Some("poly") => {
                only(&["coeffs"])?;
                let coeffs = raw.coeffs.as_ref().ok_or("poly weight needs `coeffs`")?;
                Weight::polynomial(float_list(coeffs, "`coeffs`")?).map_err(bad)?
            }
            Some("const") => {
                only(&["value"])?;
                Weight::constant(raw.value.ok_or("const weight needs `value`")?).map_err(bad)?
            }
            Some("cos") => {
                only(&["k", "offset", "amplitude"])?;
                let k = raw.k.ok_or("cos weight needs `k`")?;
                Weight::cosine(
                    raw.offset.unwrap_or(0.0),
                    raw.amplitude.unwrap_or(1.0),
                    k * std::f64::consts::PI,
                )
                .map_err(bad)?
            }
            Some(other) => {
                return Err(format!(
                    "unknown weight expr `{other}` (expected poly, const or cos)"
                ))
            }
        };
        Ok(WeightSpec(weight))
    }
}

/// `"+"` or `"-"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(try_from = "String")]
pub struct SignSpec(pub Sign);

impl TryFrom<String> for SignSpec {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.parse::<Sign>()
            .map(SignSpec)
            .map_err(|_| format!("expected \"+\" or \"-\", got {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonlinearitySpec(pub Nonlinearity);

impl<'de> Deserialize<'de> for NonlinearitySpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        validated_map::<D, RawNonlinearity, NonlinearitySpec>(d, "nonlinearity")
    }
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawNonlinearity {
    Homogeneous { scale: f64 },
    Saturating { f0: f64, f_inf: f64, q: f64 },
    Reference,
}

impl TryFrom<RawNonlinearity> for NonlinearitySpec {
    type Error = String;

    fn try_from(raw: RawNonlinearity) -> Result<Self, String> {
        let f = match raw {
            RawNonlinearity::Homogeneous { scale } => Nonlinearity::homogeneous(scale),
            RawNonlinearity::Saturating { f0, f_inf, q } => Nonlinearity::saturating(f0, f_inf, q),
            RawNonlinearity::Reference => Ok(Nonlinearity::reference()),
        };
        f.map(NonlinearitySpec).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Eig(EigTask),
    Nodal(NodalTask),
    Branch(BranchTask),
    Verify(VerifyTask),
    Gp(GpTask),
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::Eig(_) => "eig",
            Task::Nodal(_) => "nodal",
            Task::Branch(_) => "branch",
            Task::Verify(_) => "verify",
            Task::Gp(_) => "gp",
        }
    }
}

fn both_signs() -> Vec<SignSpec> {
    vec![SignSpec(Sign::Plus), SignSpec(Sign::Minus)]
}

fn default_profile_points() -> usize {
    201
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigTask {
    #[serde(rename = "K")]
    pub k_max: usize,
    #[serde(default = "both_signs")]
    pub nu: Vec<SignSpec>,
    #[serde(default = "yes")]
    pub profiles: bool,
    #[serde(default = "default_profile_points")]
    pub profile_points: usize,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlphaRange {
    pub min: f64,
    pub max: f64,
    #[serde(default = "default_ratio")]
    pub ratio: f64,
}

fn default_ratio() -> f64 {
    1.25
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodalTask {
    pub k: usize,
    pub gamma: f64,
    #[serde(default = "both_signs")]
    pub sigma: Vec<SignSpec>,
    pub f: NonlinearitySpec,
    #[serde(default)]
    pub alpha: Option<AlphaRange>,
    #[serde(default = "default_profile_points")]
    pub profile_points: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchTask {
    pub k: usize,
    #[serde(default = "both_signs")]
    pub sigma: Vec<SignSpec>,
    pub nu: SignSpec,
    pub f: NonlinearitySpec,
    pub alpha: AlphaRange,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyTask {
    pub checks: Vec<Check>,
}

fn default_margin() -> f64 {
    1e-6
}

fn default_rayleigh_tol() -> f64 {
    1e-6
}

fn default_closed_form_tol() -> f64 {
    1e-6
}

fn default_locate_tol() -> f64 {
    0.01
}

fn default_bifurcation_amplitudes() -> Vec<f64> {
    vec![1e-1, 1e-2, 1e-3, 1e-4]
}

fn default_residual_tol() -> f64 {
    1e-6
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case", deny_unknown_fields)]
pub enum Check {
    /// Eigenfunction zero counts and simplicity for `k <= K`.
    NodalCount {
        #[serde(rename = "K")]
        k_max: usize,
    },
    /// `m1 <= m2` forces `μ_k^+(m2) < μ_k^+(m1)`.
    Monotonicity {
        m1: WeightSpec,
        m2: WeightSpec,
        #[serde(rename = "K")]
        k_max: usize,
        #[serde(default = "default_margin")]
        margin: f64,
    },
    /// `μ_k(p)` over a grid of exponents.
    Continuity {
        #[serde(rename = "K")]
        k_max: usize,
        p_min: f64,
        p_max: f64,
        p_step: f64,
        #[serde(default)]
        require_halving: bool,
        #[serde(default = "default_closed_form_tol")]
        closed_form_tol: f64,
    },
    /// Zero counts under `0 < b1 <= b2`.
    Sturm { b1: WeightSpec, b2: WeightSpec },
    /// Zero counts of `t m` on an interval where `m > 0`.
    Proliferation {
        interval: [f64; 2],
        multipliers: Vec<f64>,
    },
    /// Crossing index alternation across the first `K` eigenvalues.
    Index {
        #[serde(rename = "K")]
        k_max: usize,
    },
    /// `μ_1^±` against the Rayleigh quotient.
    Rayleigh {
        #[serde(default = "default_rayleigh_tol")]
        tol: f64,
    },
    /// Small-amplitude solutions under `g = c m |u|^(p-1+δ) sign u`.
    Bifurcation {
        k: Vec<usize>,
        #[serde(default = "yes_f64")]
        coefficient: f64,
        #[serde(default = "yes_f64")]
        delta: f64,
        #[serde(default = "default_bifurcation_amplitudes")]
        amplitudes: Vec<f64>,
        #[serde(default = "default_locate_tol")]
        tol: f64,
    },
    /// Nodal solutions exist for `γ` in the interval of index `k`.
    Intervals {
        f: NonlinearitySpec,
        k: usize,
        #[serde(default)]
        gammas: Option<Vec<f64>>,
        #[serde(default = "default_residual_tol")]
        residual_tol: f64,
    },
}

fn yes_f64() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GpTask {
    pub source: WeightSpec,
    #[serde(default = "default_gp_intervals")]
    pub intervals: usize,
}

fn default_gp_intervals() -> usize {
    400
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_ivp_rtol")]
    pub ivp_rtol: f64,
    #[serde(default = "default_ivp_atol")]
    pub ivp_atol: f64,
    #[serde(default = "default_root_rel")]
    pub root_rel: f64,
}

fn default_ivp_rtol() -> f64 {
    SpectrumOptions::default().ivp.rtol
}

fn default_ivp_atol() -> f64 {
    SpectrumOptions::default().ivp.atol
}

fn default_root_rel() -> f64 {
    SpectrumOptions::default().rel_tol
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            ivp_rtol: default_ivp_rtol(),
            ivp_atol: default_ivp_atol(),
            root_rel: default_root_rel(),
        }
    }
}

impl Tolerances {
    pub fn spectrum(&self) -> SpectrumOptions {
        let base = SpectrumOptions::default();
        SpectrumOptions {
            ivp: IvpOptions { ..base.ivp }.with_tolerances(self.ivp_rtol, self.ivp_atol),
            rel_tol: self.root_rel,
            ..base
        }
    }

    /// Header line recording the effective values.
    pub fn describe(&self) -> String {
        format!(
            "ivp_rtol={:e} ivp_atol={:e} root_rel={:e}",
            self.ivp_rtol, self.ivp_atol, self.root_rel
        )
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub dir: Option<PathBuf>,
}

/// A parsed config together with the digest of its bytes.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub config: RunConfig,
    pub sha256: String,
    pub path: PathBuf,
}

impl Loaded {
    pub fn exponent(&self) -> Result<Exponent, ConfigError> {
        Exponent::new(self.config.problem.p).map_err(|e| ConfigError(format!("problem.p: {e}")))
    }

    pub fn operator(&self) -> Result<Operator, ConfigError> {
        let w = self.config.problem.weight.clone().ok_or_else(|| {
            ConfigError(format!(
                "problem.weight is required for `{}`",
                self.config.task.name()
            ))
        })?;
        Operator::new(self.exponent()?, self.config.problem.dim, w.0)
            .map_err(|e| ConfigError(format!("problem: {e}")))
    }
}

pub fn parse(text: &str, origin: &Path) -> Result<RunConfig, ConfigError> {
    let cfg: RunConfig = serde_json::from_str(text).map_err(|e| {
        ConfigError(format!(
            "{}:{}:{}: {}",
            origin.display(),
            e.line(),
            e.column(),
            strip_position(&e.to_string())
        ))
    })?;
    check_ranges(&cfg).map_err(|m| ConfigError(format!("{}: {m}", origin.display())))?;
    Ok(cfg)
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

fn positive(name: &str, x: f64) -> Result<(), String> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(format!("{name} must be positive and finite, got {x}"))
    }
}

fn check_ranges(cfg: &RunConfig) -> Result<(), String> {
    if !(cfg.problem.p > 1.0 && cfg.problem.p.is_finite()) {
        return Err(format!("problem.p must exceed 1, got {}", cfg.problem.p));
    }
    if cfg.problem.dim < 1 {
        return Err("problem.N must be at least 1".into());
    }
    let t = &cfg.tolerances;
    positive("tolerances.ivp_rtol", t.ivp_rtol)?;
    positive("tolerances.ivp_atol", t.ivp_atol)?;
    positive("tolerances.root_rel", t.root_rel)?;
    let alpha = |a: &AlphaRange| -> Result<(), String> {
        positive("alpha.min", a.min)?;
        if !(a.max > a.min && a.max.is_finite()) {
            return Err(format!(
                "alpha.max must exceed alpha.min, got {} and {}",
                a.min, a.max
            ));
        }
        if !(a.ratio > 1.0 && a.ratio.is_finite()) {
            return Err(format!("alpha.ratio must exceed 1, got {}", a.ratio));
        }
        Ok(())
    };
    match &cfg.task {
        Task::Eig(e) => {
            if e.k_max == 0 {
                return Err("task.eig.K must be at least 1".into());
            }
            if e.nu.is_empty() {
                return Err("task.eig.nu must name at least one sign".into());
            }
            if e.profile_points < 2 {
                return Err("task.eig.profile_points must be at least 2".into());
            }
        }
        Task::Nodal(n) => {
            if n.k == 0 {
                return Err("task.nodal.k must be at least 1".into());
            }
            if !(n.gamma != 0.0 && n.gamma.is_finite()) {
                return Err("task.nodal.gamma must be nonzero and finite".into());
            }
            if let Some(a) = &n.alpha {
                alpha(a)?;
            }
        }
        Task::Branch(b) => {
            if b.k == 0 {
                return Err("task.branch.k must be at least 1".into());
            }
            alpha(&b.alpha)?;
        }
        Task::Verify(_) => {}
        Task::Gp(g) => {
            if g.intervals < 8 {
                return Err("task.gp.intervals must be at least 8".into());
            }
        }
    }
    Ok(())
}

pub fn load(path: &Path) -> Result<Loaded, ConfigError> {
    let bytes = std::fs::read(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| ConfigError(format!("{}: not valid UTF-8", path.display())))?;
    let config = parse(&text, path)?;
    let sha256 = Sha256::digest(&bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect();
    Ok(Loaded {
        config,
        sha256,
        path: path.to_path_buf(),
    })
}
