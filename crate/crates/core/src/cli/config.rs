//! JSON system configuration.

use serde::{Deserialize, Serialize};

use crate::boxcount::Counting;
use crate::error::{Error, Result};
use crate::exact::{self, Quadratic, Rational};
use crate::graphs::{DataSet, MarkovFif, Phi, SeriesSpec, VerticalScalings};
use crate::tentmap::TentSystem;

pub const CONFIG_VERSION: u32 = 1;

/// A number written either as a JSON number or as a string holding a
/// decimal or a fraction such as `"2/3"`. Strings and integers are exact.
#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(untagged)]
pub enum Number {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Number {
    fn exact(&self, path: &str) -> Result<Option<Rational>> {
        match self {
            Number::Int(n) => Ok(Some(exact::rational(*n, 1))),
            Number::Float(_) => Ok(None),
            Number::Text(s) => exact::parse_rational(s)
                .map(Some)
                .map_err(|e| Error::invalid(format!("{path}: {e}"))),
        }
    }

    fn value(&self, path: &str) -> Result<f64> {
        match self {
            Number::Float(v) => Ok(*v),
            _ => Ok(exact::to_f64(&self.exact(path)?.expect("exact variant"))),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub version: u32,
    pub system: SystemConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub sampling: Sampling,
    #[serde(default)]
    pub eval: EvalGrid,
    #[serde(default)]
    pub nbern: NbernConfig,
    #[serde(default)]
    pub tent: TentConfig,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SystemConfig {
    Series {
        phi: PhiConfig,
        alpha: Number,
        #[serde(default)]
        b: Option<u32>,
    },
    Fif {
        data: Vec<(Number, Number)>,
        alpha: Vec<Number>,
    },
    MarkovFif {
        data: Vec<(Number, Number)>,
        alpha: Vec<Number>,
        left: Vec<usize>,
        right: Vec<usize>,
    },
    Tent {
        alpha: Number,
        beta: BetaConfig,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum PhiConfig {
    Cosine,
    Tent,
    Data(Vec<(Number, Number)>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum BetaConfig {
    /// `"golden"` or any number.
    Named(NamedBeta),
    Value(Number),
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NamedBeta {
    Golden,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Truncation tolerance for function values.
    pub eval_eps: f64,
    /// Truncation tolerance for tent map samples.
    pub sample_eps: f64,
    /// Orbit comparison tolerance for Markov detection.
    pub markov_tol: f64,
    pub markov_steps: usize,
    pub assum_length: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            eval_eps: 1e-12,
            sample_eps: 1e-7,
            markov_tol: 1e-11,
            markov_steps: 60,
            assum_length: crate::dimension::DEFAULT_ASSUM_SEARCH,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Sampling {
    /// Word length for series and interpolation systems.
    pub depth: u32,
    /// Uniform grid size for tent systems.
    pub points: usize,
    /// Upper limit on the number of generated points.
    pub cap: u64,
    /// Box sizes `2^-k` for `k` in this inclusive range.
    pub scale_exponents: (i32, i32),
    pub counting: Counting,
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling {
            depth: 12,
            points: 1 << 20,
            cap: 1 << 25,
            scale_exponents: (6, 14),
            counting: Counting::Polyline,
        }
    }
}

impl Sampling {
    pub fn scales(&self) -> Result<Vec<f64>> {
        let (a, b) = self.scale_exponents;
        if a < 0 || b < a {
            return Err(Error::invalid(format!("sampling.scale_exponents: bad range [{a}, {b}]")));
        }
        Ok((a..=b).map(|k| 2f64.powi(-k)).collect())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalGrid {
    pub points: usize,
    /// Draw abscissae uniformly at random (seeded) instead of on a grid.
    pub random: bool,
}

impl Default for EvalGrid {
    fn default() -> Self {
        EvalGrid {
            points: 1025,
            random: false,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NbernConfig {
    pub n: Vec<usize>,
    /// Defaults to the first allowed transition.
    pub anchor: Option<(usize, usize)>,
}

impl Default for NbernConfig {
    fn default() -> Self {
        NbernConfig {
            n: vec![20, 40, 80],
            anchor: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TentConfig {
    /// Word lengths for the entropy estimate.
    pub entropy_n: Vec<usize>,
}

impl Default for TentConfig {
    fn default() -> Self {
        TentConfig {
            entropy_n: vec![8, 16, 24],
        }
    }
}

/// Parses a configuration, reporting the JSON path of the first error.
pub fn parse_config(text: &str) -> Result<Config> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: Config = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::invalid(format!("{path}: {}", e.into_inner()))
    })?;
    if cfg.version != CONFIG_VERSION {
        return Err(Error::invalid(format!(
            "version: unsupported value {}, expected {CONFIG_VERSION}",
            cfg.version
        )));
    }
    Ok(cfg)
}

/// A validated system, ready for computation.
#[derive(Debug, Clone)]
pub enum System {
    Series(SeriesSpec),
    Fif(MarkovFif),
    MarkovFif(MarkovFif),
    Tent { sys: TentSystem, exact_beta: Option<Quadratic> },
}

fn data_set(points: &[(Number, Number)], path: &str) -> Result<DataSet> {
    let mut exact = Vec::with_capacity(points.len());
    for (k, (x, y)) in points.iter().enumerate() {
        let p = format!("{path}[{k}]");
        match (x.exact(&p)?, y.exact(&p)?) {
            (Some(a), Some(b)) => exact.push((a, b)),
            _ => break,
        }
    }
    let res = if exact.len() == points.len() {
        DataSet::from_rationals(exact)
    } else {
        let pts = points
            .iter()
            .enumerate()
            .map(|(k, (x, y))| {
                let p = format!("{path}[{k}]");
                Ok((x.value(&p)?, y.value(&p)?))
            })
            .collect::<Result<Vec<_>>>()?;
        DataSet::new(pts)
    };
    res.map_err(|e| prefix(path, e))
}

fn scalings(values: &[Number], path: &str) -> Result<VerticalScalings> {
    let exact: Vec<Option<Rational>> = values
        .iter()
        .enumerate()
        .map(|(k, v)| v.exact(&format!("{path}[{k}]")))
        .collect::<Result<_>>()?;
    let res = if exact.iter().all(Option::is_some) {
        VerticalScalings::from_rationals(exact.into_iter().flatten().collect())
    } else {
        let vals = values
            .iter()
            .enumerate()
            .map(|(k, v)| v.value(&format!("{path}[{k}]")))
            .collect::<Result<Vec<_>>>()?;
        VerticalScalings::new(vals)
    };
    res.map_err(|e| prefix(path, e))
}

fn prefix(path: &str, e: Error) -> Error {
    match e {
        Error::InvalidInput(m) => Error::invalid(format!("{path}: {m}")),
        other => other,
    }
}

impl SystemConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            SystemConfig::Series { .. } => "series",
            SystemConfig::Fif { .. } => "fif",
            SystemConfig::MarkovFif { .. } => "markov-fif",
            SystemConfig::Tent { .. } => "tent",
        }
    }

    /// Builds the system, checking the owning module's preconditions.
    pub fn build(&self) -> Result<System> {
        match self {
            SystemConfig::Series { phi, alpha, b } => {
                let alpha = alpha.value("system.alpha")?;
                let spec = match phi {
                    PhiConfig::Data(points) => {
                        if b.is_some() {
                            return Err(Error::invalid("system.b: implied by the data set, leave it out"));
                        }
                        SeriesSpec::from_data(&data_set(points, "system.phi.data")?, alpha)
                    }
                    PhiConfig::Cosine => SeriesSpec::new(Phi::Cosine, alpha, b.unwrap_or(2)),
                    PhiConfig::Tent => SeriesSpec::new(Phi::Tent, alpha, b.unwrap_or(2)),
                };
                Ok(System::Series(spec.map_err(|e| prefix("system", e))?))
            }
            SystemConfig::Fif { data, alpha } => {
                let d = data_set(data, "system.data")?;
                let a = scalings(alpha, "system.alpha")?;
                Ok(System::Fif(MarkovFif::full_shift(d, a).map_err(|e| prefix("system", e))?))
            }
            SystemConfig::MarkovFif {
                data,
                alpha,
                left,
                right,
            } => {
                let d = data_set(data, "system.data")?;
                let a = scalings(alpha, "system.alpha")?;
                let sys = MarkovFif::new(d, a, left.clone(), right.clone()).map_err(|e| prefix("system", e))?;
                Ok(System::MarkovFif(sys))
            }
            SystemConfig::Tent { alpha, beta } => {
                let alpha = alpha.value("system.alpha")?;
                let (b, exact_beta) = match beta {
                    BetaConfig::Named(NamedBeta::Golden) => {
                        let g = Quadratic::golden();
                        (g.to_f64(), Some(g))
                    }
                    BetaConfig::Value(v) => (v.value("system.beta")?, None),
                };
                let sys = TentSystem::new(alpha, b).map_err(|e| prefix("system", e))?;
                Ok(System::Tent { sys, exact_beta })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rationals_and_defaults() {
        let cfg = parse_config(
            r#"{"version": 1, "system": {"kind": "fif",
                "data": [[0, 0], ["1/4", "2/3"], ["1/2", "1/4"], [1, 1]],
                "alpha": ["1/3", "-1/2", "1/2"]}}"#,
        )
        .unwrap();
        assert_eq!(cfg.sampling.scale_exponents, (6, 14));
        match cfg.system.build().unwrap() {
            System::Fif(sys) => {
                assert!(sys.data().exact().is_some());
                assert!(sys.alpha().exact().is_some());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn errors_carry_paths() {
        let err = parse_config(r#"{"version": 1, "system": {"kind": "tent", "alpha": 0.9, "beta": 1.78}, "sampling": {"dpeth": 3}}"#)
            .unwrap_err();
        assert!(err.to_string().contains("sampling"), "{err}");
        let err = parse_config(r#"{"version": 2, "system": {"kind": "tent", "alpha": 0.9, "beta": 1.78}}"#).unwrap_err();
        assert!(err.to_string().contains("version"));
        let cfg = parse_config(r#"{"version": 1, "system": {"kind": "tent", "alpha": 0.5, "beta": 1.78}}"#).unwrap();
        assert!(matches!(cfg.system.build(), Err(Error::InvalidInput(_))));
        let cfg = parse_config(r#"{"version": 1, "system": {"kind": "series", "phi": "cosine", "alpha": "x/2", "b": 3}}"#)
            .unwrap();
        let err = cfg.system.build().unwrap_err();
        assert!(err.to_string().contains("system.alpha"), "{err}");
    }

    #[test]
    fn golden_beta() {
        let cfg = parse_config(r#"{"version": 1, "system": {"kind": "tent", "alpha": 0.9, "beta": "golden"}}"#).unwrap();
        match cfg.system.build().unwrap() {
            System::Tent { sys, exact_beta } => {
                assert!(exact_beta.is_some());
                assert!((sys.beta - 1.618_033_988_749_895).abs() < 1e-15);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
