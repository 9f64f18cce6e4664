//! Built-in corpus of functions whose classification is forced analytically.
//!
//! Each case records the hand substitution that fixes its expected verdict.

use serde::{Deserialize, Serialize};

use crate::analyzer::{analyze, AnalyzerConfig, Verdict, VerdictKind};
use crate::error::Result;
use crate::expr::Expression;
use crate::geometry::Center;

/// Tolerance on the reported limit for `LIMIT_EXISTS` cases.
pub const LIMIT_TOL: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Expected {
    NoLimit,
    Limit(f64),
    /// Either `LIMIT_EXISTS` with this value or `INCONCLUSIVE`.
    LimitOrInconclusive(f64),
}

impl Expected {
    pub fn matches(&self, v: &Verdict) -> bool {
        let limit_ok = |l: f64| v.limit.is_some_and(|got| (got - l).abs() <= LIMIT_TOL);
        match *self {
            Expected::NoLimit => v.verdict == VerdictKind::NoLimit,
            Expected::Limit(l) => v.verdict == VerdictKind::LimitExists && limit_ok(l),
            Expected::LimitOrInconclusive(l) => {
                v.verdict == VerdictKind::Inconclusive
                    || (v.verdict == VerdictKind::LimitExists && limit_ok(l))
            }
        }
    }

    fn label(&self) -> String {
        match self {
            Expected::NoLimit => "NO_LIMIT".into(),
            Expected::Limit(l) => format!("LIMIT_EXISTS({l})"),
            Expected::LimitOrInconclusive(l) => format!("LIMIT_EXISTS({l})|INCONCLUSIVE"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusCase {
    pub name: &'static str,
    pub expr: &'static str,
    pub center: &'static [f64],
    pub rays_only: bool,
    pub expected: Expected,
    pub derivation: &'static str,
}

impl CorpusCase {
    pub fn config(&self, seed: u64) -> AnalyzerConfig {
        let base = if self.rays_only { AnalyzerConfig::rays_only() } else { AnalyzerConfig::default() };
        AnalyzerConfig { seed, ..base }
    }

    pub fn run(&self, seed: u64) -> Result<Verdict> {
        let f = Expression::parse(self.expr, self.center.len())?;
        let center = Center::new(self.center.to_vec())?;
        analyze(&f, &center, &self.config(seed))
    }
}

pub fn cases() -> Vec<CorpusCase> {
    vec![
        CorpusCase {
            name: "xy-over-r2",
            expr: "x*y/(x^2+y^2)",
            center: &[0.0, 0.0],
            rays_only: true,
            expected: Expected::NoLimit,
            derivation: "x = r cos t, y = r sin t gives f = cos t sin t: 0 on t = 0, 1/2 on t = pi/4",
        },
        CorpusCase {
            name: "saddle",
            expr: "(x^2-y^2)/(x^2+y^2)",
            center: &[0.0, 0.0],
            rays_only: false,
            expected: Expected::NoLimit,
            derivation: "f = cos 2t on the ray at angle t: 1 on t = 0, -1 on t = pi/2",
        },
        CorpusCase {
            name: "parabola",
            expr: "x^2*y/(x^4+y^2)",
            center: &[0.0, 0.0],
            rays_only: false,
            expected: Expected::NoLimit,
            derivation: "y = x^2 gives x^4/(2x^4) = 1/2; rays give r cos^2 t sin t/(r^2 cos^4 t + sin^2 t) -> 0",
        },
        CorpusCase {
            name: "parabola-rays-only",
            expr: "x^2*y/(x^4+y^2)",
            center: &[0.0, 0.0],
            rays_only: true,
            expected: Expected::LimitOrInconclusive(0.0),
            derivation: "every ray limit is 0 (see parabola); rays alone cannot see the y = x^2 limit 1/2",
        },
        CorpusCase {
            name: "x2y-over-r2",
            expr: "x^2*y/(x^2+y^2)",
            center: &[0.0, 0.0],
            rays_only: false,
            expected: Expected::Limit(0.0),
            derivation: "|f| = r cos^2 t |sin t| <= r/2 -> 0",
        },
        CorpusCase {
            name: "sinc-r2",
            expr: "sin(x^2+y^2)/(x^2+y^2)",
            center: &[0.0, 0.0],
            rays_only: false,
            expected: Expected::Limit(1.0),
            derivation: "s = x^2 + y^2 -> 0 and sin(s)/s -> 1",
        },
        CorpusCase {
            name: "xyz-over-r3",
            expr: "x*y*z/(x^2+y^2+z^2)^(3/2)",
            center: &[0.0, 0.0, 0.0],
            rays_only: false,
            expected: Expected::NoLimit,
            derivation: "along unit direction u, f = u1 u2 u3: 0 on the axes, 1/(3 sqrt 3) on the diagonal",
        },
        CorpusCase {
            name: "constant",
            expr: "0.7",
            center: &[3.0, 4.0],
            rays_only: false,
            expected: Expected::Limit(0.7),
            derivation: "f is identically 0.7",
        },
        CorpusCase {
            name: "sin-inverse-r2",
            expr: "sin(1/(x^2+y^2))",
            center: &[0.0, 0.0],
            rays_only: false,
            expected: Expected::NoLimit,
            derivation: "on any ray f = sin(1/r^2), which takes every value in [-1, 1] as r -> 0",
        },
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusRow {
    pub name: String,
    pub expr: String,
    pub expected: String,
    pub verdict: VerdictKind,
    pub limit: Option<f64>,
    pub matched: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusReport {
    pub seed: u64,
    pub rows: Vec<CorpusRow>,
    pub verdicts: Vec<Verdict>,
}

impl CorpusReport {
    pub fn all_matched(&self) -> bool {
        self.rows.iter().all(|r| r.matched)
    }

    pub fn render_table(&self) -> String {
        let mut out = format!("corpus seed {}\n", self.seed);
        out.push_str(&format!(
            "{:<20} {:<14} {:<30} {:<24} {}\n",
            "case", "verdict", "expected", "limit", "match"
        ));
        for r in &self.rows {
            let limit = r.limit.map_or_else(|| "-".to_string(), |l| format!("{l:?}"));
            out.push_str(&format!(
                "{:<20} {:<14} {:<30} {:<24} {}\n",
                r.name,
                r.verdict.as_str(),
                r.expected,
                limit,
                if r.matched { "ok" } else { "MISMATCH" }
            ));
        }
        let passed = self.rows.iter().filter(|r| r.matched).count();
        out.push_str(&format!("{passed}/{} cases match\n", self.rows.len()));
        out
    }
}

pub fn run_corpus(seed: u64) -> Result<CorpusReport> {
    let mut rows = Vec::new();
    let mut verdicts = Vec::new();
    for case in cases() {
        let v = case.run(seed)?;
        rows.push(CorpusRow {
            name: case.name.to_string(),
            expr: case.expr.to_string(),
            expected: case.expected.label(),
            verdict: v.verdict,
            limit: v.limit,
            matched: case.expected.matches(&v),
        });
        verdicts.push(v);
    }
    Ok(CorpusReport { seed, rows, verdicts })
}
