//! The analysis pipeline and its JSON report.
//!
//! A report measures the hyperbolicity constants of a space, scans ball
//! intersections, and checks that eccentricity and nearest-ball Hausdorff
//! distance stay within `2 δ + 2 slack`. Every check names both operands and
//! the slack it allows. Reports contain nothing that depends on thread count
//! or wall-clock time unless timestamps are requested.

use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Value};

use crate::balls::{scan_ball_pairs, BallPairScan, RadiusPolicy, ScanTargets};
use crate::divergence::{divergence_constants, estimate_e, estimate_f_d, DivergenceProfile};
use crate::hyperbolicity::{delta_four_point, delta_slim, DeltaEstimate, FourPoint};
use crate::metric::MetricSpace;
use crate::rational::{to_pq, Rational};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Everything needed to reproduce a report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AnalyzeParams {
    pub input: String,
    pub format: String,
    pub subdivide: u32,
    pub policy: String,
    pub samples: Option<usize>,
    pub seed: u64,
    /// Separation `D` for the divergence profiles; `None` skips them.
    #[serde(with = "crate::rational::serde_pq_opt")]
    pub divergence_d: Option<Rational>,
    pub r_max: u64,
    pub timestamps: bool,
}

impl AnalyzeParams {
    pub fn radius_policy(&self) -> RadiusPolicy {
        match self.policy.as_str() {
            "half-integral" => RadiusPolicy::HalfIntegral,
            "sampled" => RadiusPolicy::Sampled {
                samples: self.samples.unwrap_or(10_000),
                seed: self.seed,
            },
            _ => RadiusPolicy::AllRealized,
        }
    }
}

impl Default for AnalyzeParams {
    fn default() -> Self {
        AnalyzeParams {
            input: String::new(),
            format: "edgelist".to_string(),
            subdivide: 0,
            policy: "all-realized".to_string(),
            samples: None,
            seed: 0,
            divergence_d: None,
            r_max: 8,
            timestamps: false,
        }
    }
}

/// `lhs <= rhs + slack`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InequalityCheck {
    pub name: String,
    pub lhs_name: String,
    pub lhs: Rational,
    pub rhs_name: String,
    pub rhs: Rational,
    pub slack: Rational,
    pub passed: bool,
}

impl InequalityCheck {
    pub fn new(name: &str, lhs_name: &str, lhs: Rational, rhs_name: &str, rhs: Rational, slack: Rational) -> Self {
        InequalityCheck {
            name: name.to_string(),
            lhs_name: lhs_name.to_string(),
            lhs,
            rhs_name: rhs_name.to_string(),
            rhs,
            slack,
            passed: lhs <= rhs + slack,
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "lhs": { "name": self.lhs_name, "value": to_pq(&self.lhs) },
            "rhs": { "name": self.rhs_name, "value": to_pq(&self.rhs) },
            "slack": to_pq(&self.slack),
            "passed": self.passed,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DivergenceSummary {
    Profiles { f: DivergenceProfile, e: DivergenceProfile },
    Unavailable(String),
}

#[derive(Debug, Clone)]
pub struct AnalysisReport {
    pub params: AnalyzeParams,
    pub delta4: FourPoint,
    pub delta_slim: DeltaEstimate,
    pub scan: BallPairScan,
    pub checks: Vec<InequalityCheck>,
    pub divergence: Option<DivergenceSummary>,
    pub started: Option<u128>,
    pub finished: Option<u128>,
}

impl AnalysisReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_json(&self, space: &MetricSpace) -> Value {
        let mut out = json!({
            "tool": { "name": "curvlab", "version": VERSION },
            "params": self.params,
            "space": {
                "source": self.params.input,
                "origin": space.origin(),
                "points": space.len(),
                "edges": space.edges().len(),
                "unit": to_pq(&Rational::new(1, space.unit())),
                "slack": to_pq(&space.slack()),
                "diameter": to_pq(&space.diameter()),
            },
            "delta4": {
                "value": to_pq(&self.delta4.value),
                "witness": self.delta4.witness.map(|w| w.map(|p| space.label(p).clone())),
            },
            "delta_slim": self.delta_slim.to_json(space),
            "ecc_scan": self.scan.to_json(space),
            "checks": self.checks.iter().map(InequalityCheck::to_json).collect::<Vec<_>>(),
            "passed": self.passed(),
        });
        if let Some(div) = &self.divergence {
            out["divergence"] = match div {
                DivergenceSummary::Profiles { f, e } => json!({
                    "f": f.to_json(space),
                    "e": e.to_json(space),
                    "constants": divergence_constants(f).ok().map(|c| c.to_json()),
                }),
                DivergenceSummary::Unavailable(why) => json!({ "error": why }),
            };
        }
        if let (Some(s), Some(f)) = (self.started, self.finished) {
            out["timestamps"] = json!({ "started_unix_ms": s as u64, "finished_unix_ms": f as u64 });
        }
        out
    }
}

fn now_ms() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

/// Runs delta4, delta_slim, the ball-pair scan and (optionally) the
/// divergence profiles on an already loaded (and subdivided) space.
pub fn run_analysis(space: &MetricSpace, params: &AnalyzeParams) -> AnalysisReport {
    let started = params.timestamps.then(now_ms);
    let delta4 = delta_four_point(space);
    let slim = delta_slim(space);
    let scan = scan_ball_pairs(space, params.radius_policy(), ScanTargets::BOTH);

    let bound = slim.value * 2;
    let slack = space.slack() * 2;
    let checks = vec![
        InequalityCheck::new(
            "ball-pair eccentricity within twice the slim constant",
            "max_ball_pair_ecc",
            scan.max_ecc,
            "2*delta_slim",
            bound,
            slack,
        ),
        InequalityCheck::new(
            "nearest-ball Hausdorff distance within twice the slim constant",
            "max_nearest_ball_hausdorff",
            scan.max_hausdorff,
            "2*delta_slim",
            bound,
            slack,
        ),
    ];

    let divergence =
        params.divergence_d.map(
            |d| match (estimate_f_d(space, d, params.r_max), estimate_e(space, d, params.r_max)) {
                (Ok(f), Ok(e)) => DivergenceSummary::Profiles { f, e },
                (Err(err), _) | (_, Err(err)) => DivergenceSummary::Unavailable(err.to_string()),
            },
        );

    AnalysisReport {
        params: params.clone(),
        delta4,
        delta_slim: slim,
        scan,
        checks,
        divergence,
        started,
        finished: params.timestamps.then(now_ms),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c4_report() {
        let c4 = MetricSpace::from_unit_edges(&[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let report = run_analysis(&c4, &AnalyzeParams::default());
        assert_eq!(report.delta4.value, Rational::from_integer(1));
        assert!(report.passed());
        let v = report.to_json(&c4);
        assert_eq!(v["delta4"]["value"], "1/1");
        assert_eq!(v["checks"][0]["rhs"]["name"], "2*delta_slim");
        assert!(v.get("timestamps").is_none());
    }

    #[test]
    fn failing_checks_are_reported() {
        let c = InequalityCheck::new(
            "x",
            "a",
            Rational::from_integer(3),
            "b",
            Rational::from_integer(1),
            Rational::from_integer(1),
        );
        assert!(!c.passed);
        assert_eq!(c.to_json()["slack"], "1/1");
    }
}
