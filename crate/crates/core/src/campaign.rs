//! Seeded batches of Jensen checks driven by a JSON configuration.
//!
//! ```json
//! {
//!   "scenarios": [
//!     {
//!       "name": "hyperbolic-d2",
//!       "space": {"kind": "hyperbolic", "dim": 2, "kappa": -1},
//!       "measure": {"random": {"count": [2, 8], "radius": 1.0, "weights": "random"}},
//!       "field": {"kind": "squared_distance_to", "anchor": "random", "alpha": 2},
//!       "trials": 1000,
//!       "seed": 7
//!     }
//!   ]
//! }
//! ```
//!
//! See `docs/config.md` for every key.

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::barycenter::DiscreteMeasure;
use crate::error::{GeoError, Result};
use crate::jensen::{jensen_check, JensenOptions, JensenReport, Scenario, Verdict};
use crate::semiconcave::{FieldKind, ScalarField};
use crate::space::{ModelSpace, Point};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    pub scenarios: Vec<ScenarioConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub space: ModelSpace,
    pub measure: MeasureConfig,
    pub field: FieldConfig,
    #[serde(default = "one")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub options: JensenOptions,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum MeasureConfig {
    Random { random: RandomMeasure },
    Explicit {
        points: Vec<Vec<f64>>,
        #[serde(default)]
        weights: Option<Vec<f64>>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomMeasure {
    pub count: Count,
    /// Geodesic radius of the sampling ball.
    pub radius: f64,
    /// Ball center; the space's origin when absent.
    #[serde(default)]
    pub center: Option<Vec<f64>>,
    #[serde(default)]
    pub weights: WeightMode,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum Count {
    Fixed(usize),
    /// Inclusive range.
    Range([usize; 2]),
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightMode {
    #[default]
    Uniform,
    /// Independent uniform draws in `[0.1, 1]`, normalized.
    Random,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldConfig {
    pub kind: String,
    #[serde(default)]
    pub anchor: Option<AnchorConfig>,
    #[serde(default)]
    pub coefficients: Option<Vec<f64>>,
    pub alpha: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum AnchorConfig {
    Point(Vec<f64>),
    /// `"random"` (a point of the sampling ball) or `"center"`.
    Keyword(String),
}

impl ScenarioConfig {
    fn validate(&self, index: usize) -> Result<()> {
        let ctx = |m: String| GeoError::Parse(format!("scenario {index}: {m}"));
        match &self.measure {
            MeasureConfig::Random { random } => {
                let quarter = 0.25 * self.space.diameter();
                if !(random.radius >= 0.0 && random.radius.is_finite()) {
                    return Err(ctx(format!("bad radius {}", random.radius)));
                }
                if random.radius >= quarter {
                    return Err(ctx(format!(
                        "radius {} leaves the safe zone (must stay below {quarter})",
                        random.radius
                    )));
                }
                match random.count {
                    Count::Fixed(0) => return Err(ctx("count must be positive".into())),
                    Count::Range([lo, hi]) if lo == 0 || lo > hi => {
                        return Err(ctx(format!("bad count range [{lo}, {hi}]")))
                    }
                    _ => {}
                }
                if let Some(c) = &random.center {
                    self.space
                        .check_point(&Point::new(c.clone()))
                        .map_err(|e| ctx(e.to_string()))?;
                }
            }
            MeasureConfig::Explicit { points, weights } => {
                let pts = points.iter().cloned().map(Point::new).collect();
                match weights {
                    Some(w) => DiscreteMeasure::new(self.space, pts, w.clone()),
                    None => DiscreteMeasure::uniform(self.space, pts),
                }
                .map_err(|e| ctx(e.to_string()))?;
            }
        }
        match self.field.kind.as_str() {
            "squared_distance_to" | "distance_to" | "neg_squared_distance_to" => {}
            "linear" => {
                if !matches!(self.space, ModelSpace::Euclidean { .. }) {
                    return Err(ctx("linear fields need a Euclidean space".into()));
                }
            }
            other => return Err(ctx(format!("unknown field kind {other:?}"))),
        }
        if let Some(AnchorConfig::Keyword(k)) = &self.field.anchor {
            if k != "random" && k != "center" {
                return Err(ctx(format!("unknown anchor keyword {k:?}")));
            }
        }
        if self.trials == 0 {
            return Err(ctx("trials must be positive".into()));
        }
        Ok(())
    }

    /// Builds the scenario for one trial; all randomness comes from `seed`.
    pub fn instantiate(&self, seed: u64) -> Result<Scenario> {
        let space = self.space;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (measure, center, radius) = match &self.measure {
            MeasureConfig::Explicit { points, weights } => {
                let pts: Vec<Point> = points.iter().cloned().map(Point::new).collect();
                let mu = match weights {
                    Some(w) => DiscreteMeasure::new(space, pts, w.clone())?,
                    None => DiscreteMeasure::uniform(space, pts)?,
                };
                let c = mu.support()[0].clone();
                (mu, c, 0.0)
            }
            MeasureConfig::Random { random } => {
                let center = match &random.center {
                    Some(c) => space.point(c.clone())?,
                    None => space.origin(),
                };
                let n = match random.count {
                    Count::Fixed(n) => n,
                    Count::Range([lo, hi]) => rng.random_range(lo..=hi),
                };
                let pts = (0..n)
                    .map(|_| space.random_point_in_ball(&center, random.radius, &mut rng))
                    .collect::<Result<Vec<_>>>()?;
                let mu = match random.weights {
                    WeightMode::Uniform => DiscreteMeasure::uniform(space, pts)?,
                    WeightMode::Random => {
                        let w = (0..n).map(|_| rng.random_range(0.1..=1.0)).collect();
                        DiscreteMeasure::normalized(space, pts, w)?
                    }
                };
                (mu, center, random.radius)
            }
        };
        let anchor = match &self.field.anchor {
            Some(AnchorConfig::Point(c)) => space.point(c.clone())?,
            Some(AnchorConfig::Keyword(k)) if k == "random" => {
                space.random_point_in_ball(&center, radius, &mut rng)?
            }
            _ => center.clone(),
        };
        let kind = match self.field.kind.as_str() {
            "squared_distance_to" => FieldKind::SquaredDistanceTo { anchor },
            "distance_to" => FieldKind::DistanceTo { anchor },
            "neg_squared_distance_to" => FieldKind::NegSquaredDistanceTo { anchor },
            "linear" => FieldKind::Linear {
                coefficients: match &self.field.coefficients {
                    Some(c) => c.clone(),
                    None => (0..space.dim()).map(|_| rng.sample(StandardNormal)).collect(),
                },
            },
            other => return Err(GeoError::Parse(format!("unknown field kind {other:?}"))),
        };
        let field = ScalarField::new(space, kind, self.field.alpha)?;
        let mut options = self.options.clone();
        options.certify.seed = seed;
        Ok(Scenario {
            measure,
            field,
            options,
        })
    }
}

pub fn load_config(path: impl AsRef<Path>) -> Result<CampaignConfig> {
    let text = std::fs::read_to_string(path.as_ref())
        .map_err(|e| GeoError::Io(format!("{}: {e}", path.as_ref().display())))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<CampaignConfig> {
    let cfg: CampaignConfig = serde_json::from_str(text)?;
    for (i, s) in cfg.scenarios.iter().enumerate() {
        s.validate(i)?;
    }
    Ok(cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialReport {
    pub scenario: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub trial: usize,
    pub seed: u64,
    #[serde(flatten)]
    pub report: JensenReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignOutcome {
    pub reports: Vec<TrialReport>,
}

impl CampaignOutcome {
    pub fn count(&self, v: Verdict) -> usize {
        self.reports.iter().filter(|r| r.report.verdict == v).count()
    }

    /// 0 when every trial holds or has a refuted modulus, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.count(Verdict::Violated) + self.count(Verdict::Failed) > 0 {
            1
        } else {
            0
        }
    }

    pub fn min_gap(&self) -> Option<f64> {
        self.reports
            .iter()
            .filter_map(|r| r.report.gap)
            .reduce(f64::min)
    }
}

/// Seed of trial `trial` of a scenario seeded with `seed`.
pub fn trial_seed(seed: u64, trial: usize) -> u64 {
    seed.wrapping_add(trial as u64)
}

/// Runs every trial; `seed_override` replaces all scenario seeds and `jobs`
/// bounds the worker threads. Output order is (scenario, trial) regardless
/// of scheduling.
pub fn run_config(
    cfg: &CampaignConfig,
    seed_override: Option<u64>,
    jobs: usize,
) -> Result<CampaignOutcome> {
    let tasks: Vec<(usize, usize, u64)> = cfg
        .scenarios
        .iter()
        .enumerate()
        .flat_map(|(i, s)| {
            let base = seed_override.unwrap_or(s.seed);
            (0..s.trials).map(move |t| (i, t, trial_seed(base, t)))
        })
        .collect();
    let run = |&(i, t, seed): &(usize, usize, u64)| {
        let sc = &cfg.scenarios[i];
        let report = match sc.instantiate(seed) {
            Ok(s) => jensen_check(&s).unwrap_or_else(|e| JensenReport::failed(&s, &e)),
            Err(e) => failed_without_scenario(sc, &e),
        };
        TrialReport {
            scenario: i,
            name: sc.name.clone(),
            trial: t,
            seed,
            report,
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| GeoError::InvalidArgument(format!("thread pool: {e}")))?;
    let reports = pool.install(|| tasks.par_iter().map(run).collect());
    Ok(CampaignOutcome { reports })
}

fn failed_without_scenario(sc: &ScenarioConfig, e: &GeoError) -> JensenReport {
    JensenReport {
        space: sc.space.name().to_string(),
        kappa: sc.space.kappa(),
        dim: sc.space.dim(),
        field: sc.field.kind.clone(),
        alpha: sc.field.alpha,
        alpha_certified: false,
        certification: None,
        barycenter: None,
        f_at_barycenter: None,
        integral_f: None,
        variance_star: None,
        bound: None,
        gap: None,
        barycenter_iterations: None,
        first_order_audit: None,
        per_point_checks: None,
        verdict: Verdict::Failed,
        error: Some(e.to_string()),
    }
}

pub const CSV_HEADER: [&str; 13] = [
    "scenario",
    "trial",
    "seed",
    "space",
    "kappa",
    "dim",
    "field",
    "alpha",
    "f_star",
    "integral_f",
    "variance_star",
    "gap",
    "verdict",
];

/// Seventeen significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

pub fn write_csv<W: Write>(outcome: &CampaignOutcome, w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(CSV_HEADER)?;
    for t in &outcome.reports {
        let r = &t.report;
        let scenario = match &t.name {
            Some(n) => n.clone(),
            None => t.scenario.to_string(),
        };
        wtr.write_record([
            scenario,
            t.trial.to_string(),
            t.seed.to_string(),
            r.space.clone(),
            fmt_float(r.kappa),
            r.dim.to_string(),
            r.field.clone(),
            fmt_float(r.alpha),
            fmt_opt(r.f_at_barycenter),
            fmt_opt(r.integral_f),
            fmt_opt(r.variance_star),
            fmt_opt(r.gap),
            r.verdict.as_str().to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_json<W: Write>(outcome: &CampaignOutcome, mut w: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, &outcome.reports)?;
    w.write_all(b"\n")?;
    Ok(())
}

/// Loads, runs and writes a campaign. Errors are configuration or IO
/// problems; the verdicts are in the returned outcome.
pub fn run_campaign(
    config_path: impl AsRef<Path>,
    out_path: impl AsRef<Path>,
    csv_path: Option<&Path>,
    jobs: usize,
    seed_override: Option<u64>,
) -> Result<CampaignOutcome> {
    let cfg = load_config(config_path)?;
    let outcome = run_config(&cfg, seed_override, jobs)?;
    let out = std::fs::File::create(out_path.as_ref())
        .map_err(|e| GeoError::Io(format!("{}: {e}", out_path.as_ref().display())))?;
    write_json(&outcome, std::io::BufWriter::new(out))?;
    if let Some(p) = csv_path {
        let f = std::fs::File::create(p).map_err(|e| GeoError::Io(format!("{}: {e}", p.display())))?;
        write_csv(&outcome, std::io::BufWriter::new(f))?;
    }
    Ok(outcome)
}
