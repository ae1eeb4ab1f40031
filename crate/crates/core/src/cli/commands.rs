use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{Config, System};
use crate::boxcount::{estimate, BoxEstimate, SATURATION_TOL};
use crate::dimension::{theoretical_box_dim_with, Branch, DimensionReport};
use crate::error::{Error, Result};
use crate::graphs::{eval_series, sample_series, MarkovFif};
use crate::measures::{entropy, equilibrium_markov, ergodic_stats, ErgodicStats};
use crate::symbolic::{nbern_construct, nbern_cylinder_mass, nbern_entropy};
use crate::tentmap::{detect_markov, detect_markov_exact, entropy_estimate, markov_dim, MarkovDim, MarkovPartition};

/// A file produced by a command.
pub struct Artifact {
    pub name: &'static str,
    pub contents: String,
}

/// Artifacts plus an optional diagnostics failure raised after they were built.
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    pub failure: Option<Error>,
}

impl Outcome {
    fn ok(artifacts: Vec<Artifact>) -> Self {
        Outcome { artifacts, failure: None }
    }
}

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    command: &'static str,
    kind: &'static str,
    config_sha256: &'a str,
    seed: u64,
    tolerances: ToleranceReport,
    result: T,
}

#[derive(Serialize)]
struct ToleranceReport {
    #[serde(flatten)]
    config: super::config::Tolerances,
    saturation: f64,
}

pub struct Context<'a> {
    pub config: &'a Config,
    pub system: &'a System,
    pub hash: &'a str,
}

impl Context<'_> {
    fn json<T: Serialize>(&self, command: &'static str, result: T) -> Result<String> {
        let report = Report {
            command,
            kind: self.config.system.kind(),
            config_sha256: self.hash,
            seed: self.config.seed,
            tolerances: ToleranceReport {
                config: self.config.tolerances.clone(),
                saturation: SATURATION_TOL,
            },
            result,
        };
        let mut s = serde_json::to_string_pretty(&report).map_err(|e| Error::Diagnostics(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    fn domain(&self) -> (f64, f64) {
        match self.system {
            System::Fif(sys) | System::MarkovFif(sys) => {
                let d = sys.data();
                (d.x(0), d.x(d.m()))
            }
            _ => (0.0, 1.0),
        }
    }

    fn value(&self, x: f64) -> Result<f64> {
        let eps = self.config.tolerances.eval_eps;
        match self.system {
            System::Series(spec) => eval_series(spec, x, eps),
            System::Fif(sys) | System::MarkovFif(sys) => sys.graph_eval(x, eps),
            System::Tent { sys, .. } => sys.eval(x, eps),
        }
    }

    fn graph_points(&self) -> Result<Vec<(f64, f64)>> {
        let s = &self.config.sampling;
        let cap = u128::from(s.cap);
        match self.system {
            System::Series(spec) => sample_series(spec, s.depth, cap),
            System::Fif(sys) | System::MarkovFif(sys) => sys.sample_graph(s.depth as usize, cap),
            System::Tent { sys, .. } => {
                if s.points as u128 > cap {
                    return Err(Error::Budget {
                        what: "tent sample points",
                        needed: s.points as u128,
                        cap,
                    });
                }
                sys.sample_graph(s.points, self.config.tolerances.sample_eps)
            }
        }
    }

    fn theoretical(&self) -> Result<f64> {
        match self.system {
            System::Series(spec) => Ok(spec.theoretical_dimension()),
            System::Fif(sys) | System::MarkovFif(sys) => Ok(self.dimension_report(sys)?.theoretical_box),
            System::Tent { sys, .. } => Ok(sys.theoretical_dimension()),
        }
    }

    fn dimension_report(&self, sys: &MarkovFif) -> Result<DimensionReport> {
        theoretical_box_dim_with(sys, self.config.tolerances.assum_length)
    }
}

fn csv_points(points: &[(f64, f64)]) -> String {
    let mut s = String::with_capacity(points.len() * 40 + 4);
    s.push_str("x,y\n");
    for (x, y) in points {
        let _ = writeln!(s, "{x},{y}");
    }
    s
}

pub fn eval(ctx: &Context) -> Result<Outcome> {
    let n = ctx.config.eval.points;
    if n < 2 {
        return Err(Error::invalid("eval.points: need at least 2"));
    }
    let (a, b) = ctx.domain();
    let xs: Vec<f64> = if ctx.config.eval.random {
        let mut rng = ChaCha8Rng::seed_from_u64(ctx.config.seed);
        let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(a..=b)).collect();
        v.sort_by(f64::total_cmp);
        v
    } else {
        (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
    };
    let points = xs
        .par_iter()
        .map(|&x| Ok((x, ctx.value(x)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Outcome::ok(vec![Artifact {
        name: "eval.csv",
        contents: csv_points(&points),
    }]))
}

pub fn sample(ctx: &Context) -> Result<Outcome> {
    let points = ctx.graph_points()?;
    Ok(Outcome::ok(vec![Artifact {
        name: "sample.csv",
        contents: csv_points(&points),
    }]))
}

#[derive(Serialize)]
#[serde(untagged)]
enum DimResult {
    Closed {
        theoretical_box: f64,
    },
    Fif {
        #[serde(flatten)]
        report: DimensionReport,
        measure: Option<ErgodicStats>,
    },
}

pub fn dim(ctx: &Context) -> Result<Outcome> {
    let result = match ctx.system {
        System::Fif(sys) | System::MarkovFif(sys) => {
            let report = ctx.dimension_report(sys)?;
            let measure = if matches!(ctx.system, System::MarkovFif(_)) && report.branch == Branch::Spectral {
                let mm = equilibrium_markov(sys)?;
                Some(ergodic_stats(&mm, sys)?)
            } else {
                None
            };
            DimResult::Fif { report, measure }
        }
        _ => DimResult::Closed {
            theoretical_box: ctx.theoretical()?,
        },
    };
    Ok(Outcome::ok(vec![Artifact {
        name: "dim.json",
        contents: ctx.json("dim", result)?,
    }]))
}

#[derive(Serialize)]
struct BoxdimResult {
    theoretical: f64,
    points: usize,
    #[serde(flatten)]
    estimate: BoxEstimate,
}

pub fn boxdim(ctx: &Context) -> Result<Outcome> {
    let theoretical = ctx.theoretical()?;
    let points = ctx.graph_points()?;
    let est = estimate(&points, &ctx.config.sampling.scales()?, ctx.config.sampling.counting)?;
    let mut csv = String::from("log_inv_eps,log_n,used\n");
    for s in &est.saturation {
        let used = est.counts.iter().any(|c| c.eps == s.eps);
        let _ = writeln!(csv, "{},{},{}", -s.eps.ln(), (s.full as f64).ln(), u8::from(used));
    }
    let failure = if est.saturation.iter().any(|s| s.saturated) {
        None
    } else {
        Some(Error::Diagnostics(format!(
            "no scale saturated: halving the sample changed every count by more than {}%",
            SATURATION_TOL * 100.0
        )))
    };
    let json = ctx.json(
        "boxdim",
        BoxdimResult {
            theoretical,
            points: points.len(),
            estimate: est,
        },
    )?;
    Ok(Outcome {
        artifacts: vec![
            Artifact {
                name: "boxdim.json",
                contents: json,
            },
            Artifact {
                name: "boxdim.csv",
                contents: csv,
            },
        ],
        failure,
    })
}

pub fn nbern(ctx: &Context) -> Result<Outcome> {
    let sys = match ctx.system {
        System::Fif(sys) | System::MarkovFif(sys) => sys,
        _ => return Err(Error::invalid("system.kind: nbern needs a fif or markov-fif system")),
    };
    let mm = equilibrium_markov(sys)?;
    let h_mu = entropy(&mm);
    let sft = sys.sft();
    let m = sft.alphabet_size();
    let anchor = match ctx.config.nbern.anchor {
        Some(a) => a,
        None => (1..=m)
            .flat_map(|i| (1..=m).map(move |j| (i, j)))
            .find(|&(i, j)| sft.allows(i, j))
            .ok_or_else(|| Error::invalid("adjacency matrix has no allowed transition"))?,
    };
    let pairs = sft.admissible_words(2);
    let mut csv = String::from("n,entropy,entropy_gap,mass_gap\n");
    for &n in &ctx.config.nbern.n {
        let b = nbern_construct(sft, &mm, n, anchor).map_err(|e| match e {
            Error::InvalidInput(msg) => Error::invalid(format!("nbern.n: {msg}")),
            other => other,
        })?;
        let h = nbern_entropy(&b);
        let mut gap = 0.0f64;
        for w in &pairs {
            let w = w.symbols();
            gap = gap.max((nbern_cylinder_mass(&b, w)? - mm.cylinder(w)).abs());
        }
        let _ = writeln!(csv, "{n},{h},{},{gap}", (h - h_mu).abs());
    }
    Ok(Outcome::ok(vec![Artifact {
        name: "nbern.csv",
        contents: csv,
    }]))
}

#[derive(Serialize)]
struct EntropyRow {
    n: usize,
    estimate: f64,
    log_beta: f64,
}

#[derive(Serialize)]
struct TentResult {
    alpha: f64,
    beta: f64,
    theoretical: f64,
    entropy: Vec<EntropyRow>,
    markov: Option<MarkovPartition>,
    markov_dimension: Option<MarkovDim>,
    /// `|s_m - theoretical|` when a partition was found.
    markov_gap: Option<f64>,
}

pub fn tent(ctx: &Context) -> Result<Outcome> {
    let System::Tent { sys, exact_beta } = ctx.system else {
        return Err(Error::invalid("system.kind: tent command needs a tent system"));
    };
    let tol = &ctx.config.tolerances;
    let entropy = ctx
        .config
        .tent
        .entropy_n
        .iter()
        .map(|&n| {
            Ok(EntropyRow {
                n,
                estimate: entropy_estimate(sys.beta, n)?,
                log_beta: sys.beta.ln(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let markov = match exact_beta {
        Some(q) => detect_markov_exact(q, tol.markov_steps)?,
        None => detect_markov(sys.beta, tol.markov_steps, tol.markov_tol)?,
    };
    let markov_dimension = match &markov {
        Some(p) => Some(markov_dim(sys, p)?),
        None => None,
    };
    let theoretical = sys.theoretical_dimension();
    let result = TentResult {
        alpha: sys.alpha,
        beta: sys.beta,
        theoretical,
        entropy,
        markov_gap: markov_dimension.as_ref().map(|d| (d.s - theoretical).abs()),
        markov,
        markov_dimension,
    };
    Ok(Outcome::ok(vec![Artifact {
        name: "tent.json",
        contents: ctx.json("tent", result)?,
    }]))
}
