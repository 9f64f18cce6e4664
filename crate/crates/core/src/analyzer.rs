//! Verdict engine.
//!
//! A verdict is built in a fixed order: probe a grid of rays, then power
//! curves and spirals; two probes converging to different values, or one
//! probe that oscillates or blows up, settle `NO_LIMIT`. Otherwise the median
//! probe limit is attacked with a violation search. `NO_LIMIT` is always
//! backed by a witness; `LIMIT_EXISTS` only means no refutation was found.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::construction::{bisect_angles, bw_subsequence, BisectionWitness, BwSelection, PolarSample, ViolationOutcome, ViolationSearch, MAX_DEPTH};
use crate::error::{check_dim, Error, Result};
use crate::expr::Expression;
use crate::geometry::{direction_grid, distance, Center};
use crate::paths::{point_at, Branch, PathSpec};

/// Tail magnitudes beyond this count as divergence.
pub const DIVERGENCE_BOUND: f64 = 1e12;

/// A probe point whose distance to the center misses `r` by more than this
/// (relative) is below floating-point resolution and is skipped.
pub const RESOLUTION_REL_TOL: f64 = 1e-6;

/// Converged limits further apart than this many `tol` are distinct.
pub const DISAGREEMENT_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerCurveParams {
    pub c: f64,
    pub m: u32,
    pub n: u32,
    pub branch: Branch,
}

impl PowerCurveParams {
    pub fn path(&self) -> Result<PathSpec> {
        PathSpec::power(self.c, self.m, self.n, self.branch)
    }
}

/// `phi0` is the last angle; any leading hyperspherical angles are `pi/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpiralParams {
    pub phi0: f64,
    pub amplitude: f64,
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzerConfig {
    pub r1: f64,
    pub rho: f64,
    pub steps: usize,
    pub tol: f64,
    pub k: usize,
    pub ray_count: usize,
    pub power_curve_grid: Vec<PowerCurveParams>,
    pub spiral_grid: Vec<SpiralParams>,
    /// Defaults to `10 * tol` when absent.
    pub epsilon_refute: Option<f64>,
    /// Evaluations per shell of the violation search.
    pub budget: usize,
    /// Number of violation points the refutation asks for.
    pub refute_count: usize,
    pub seed: u64,
}

impl Default for AnalyzerConfig {
    fn default() -> Self {
        Self {
            r1: 1.0,
            rho: 0.5,
            steps: 60,
            tol: 1e-6,
            k: 8,
            ray_count: 64,
            power_curve_grid: default_power_grid(),
            spiral_grid: default_spiral_grid(),
            epsilon_refute: None,
            budget: 100_000,
            refute_count: MAX_DEPTH as usize,
            seed: 42,
        }
    }
}

impl AnalyzerConfig {
    /// Rays only: no power curves, no spirals.
    pub fn rays_only() -> Self {
        Self {
            power_curve_grid: Vec::new(),
            spiral_grid: Vec::new(),
            ..Self::default()
        }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon_refute.unwrap_or(self.tol * 10.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::usage("rho must lie in (0, 1)"));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::usage("tol must be positive"));
        }
        if !(self.r1 > 0.0 && self.r1.is_finite()) {
            return Err(Error::usage("r1 must be positive"));
        }
        if self.ray_count < 4 {
            return Err(Error::usage("ray_count must be at least 4"));
        }
        if self.k == 0 || self.k > self.steps + 1 {
            return Err(Error::usage("tail length k must be in 1..=steps+1"));
        }
        if !(self.epsilon() > 0.0 && self.epsilon().is_finite()) {
            return Err(Error::usage("epsilon_refute must be positive"));
        }
        if self.budget == 0 || self.refute_count == 0 {
            return Err(Error::usage("budget and refute_count must be positive"));
        }
        for p in &self.power_curve_grid {
            p.path()?;
        }
        for s in &self.spiral_grid {
            if !(s.q > 0.0 && s.q.is_finite() && s.phi0.is_finite() && s.amplitude.is_finite()) {
                return Err(Error::usage("spiral parameters must be finite with q > 0"));
            }
        }
        Ok(())
    }
}

/// c in {±1, ±2, ±1/2}, (m, n) in {(1,1),(2,1),(3,1),(1,2),(3,2),(1,3)}, both
/// branches where `x < 0` is admissible.
pub fn default_power_grid() -> Vec<PowerCurveParams> {
    let mut out = Vec::new();
    for (m, n) in [(1, 1), (2, 1), (3, 1), (1, 2), (3, 2), (1, 3)] {
        for c in [1.0, -1.0, 2.0, -2.0, 0.5, -0.5] {
            for branch in [Branch::Positive, Branch::Negative] {
                if branch == Branch::Negative && n % 2 == 0 {
                    continue;
                }
                out.push(PowerCurveParams { c, m, n, branch });
            }
        }
    }
    out
}

pub fn default_spiral_grid() -> Vec<SpiralParams> {
    let mut out = Vec::new();
    for q in [0.5, 1.0, 2.0] {
        for phi0 in [0.0, FRAC_PI_2, PI, 3.0 * FRAC_PI_2] {
            out.push(SpiralParams { phi0, amplitude: 1.0, q });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ProbeStatus {
    Converged { limit: f64 },
    Diverged,
    Oscillating,
    LeftDomain { at_r: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailEntry {
    pub r: f64,
    /// `None` where the function is undefined.
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub path: PathSpec,
    #[serde(flatten)]
    pub status: ProbeStatus,
    pub tail: Vec<TailEntry>,
}

impl ProbeResult {
    pub fn limit(&self) -> Option<f64> {
        match self.status {
            ProbeStatus::Converged { limit } => Some(limit),
            _ => None,
        }
    }
}

/// Evaluates `f` along `path` at `r_j = r1 * rho^j`, `j = 0..=steps`, and
/// classifies the last `k` resolvable values.
pub fn path_limit(f: &Expression, center: &Center, path: &PathSpec, config: &AnalyzerConfig) -> Result<ProbeResult> {
    config.validate()?;
    check_dim(center.dim(), f.arity())?;
    path.check_shape()?;
    if let Some(d) = path.dim() {
        check_dim(center.dim(), d)?;
    }

    let mut entries: Vec<TailEntry> = Vec::with_capacity(config.steps + 1);
    if let PathSpec::SampleSeq { points } = path {
        for p in points {
            let r = distance(center.coords(), p)?;
            if r > 0.0 {
                entries.push(TailEntry { r, value: f.eval_point(p).value() });
            }
        }
    } else {
        for j in 0..=config.steps {
            let r = config.r1 * config.rho.powi(j as i32);
            let point = match point_at(path, center, r) {
                Ok(p) => p,
                Err(Error::OutOfRange { .. }) => continue,
                Err(e) => return Err(e),
            };
            let actual = distance(center.coords(), &point)?;
            if actual == 0.0 || (actual - r).abs() > RESOLUTION_REL_TOL * r {
                continue;
            }
            entries.push(TailEntry { r, value: f.eval_point(&point).value() });
        }
    }

    let tail: Vec<TailEntry> = entries[entries.len().saturating_sub(config.k)..].to_vec();
    let status = classify_tail(&tail, config);
    Ok(ProbeResult { path: path.clone(), status, tail })
}

fn classify_tail(tail: &[TailEntry], config: &AnalyzerConfig) -> ProbeStatus {
    if tail.len() < config.k {
        let at_r = tail.first().map_or(config.r1, |e| e.r);
        return ProbeStatus::LeftDomain { at_r };
    }
    let undefined = tail.iter().filter(|e| e.value.is_none()).count();
    if undefined as f64 > 0.25 * tail.len() as f64 {
        let at_r = tail.iter().find(|e| e.value.is_none()).map_or(config.r1, |e| e.r);
        return ProbeStatus::LeftDomain { at_r };
    }
    let values: Vec<f64> = tail.iter().filter_map(|e| e.value).collect();
    if values.iter().any(|v| v.abs() > DIVERGENCE_BOUND) {
        return ProbeStatus::Diverged;
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // offset from the minimum keeps a constant tail exactly constant
    let mean = lo + values.iter().map(|v| v - lo).sum::<f64>() / values.len() as f64;
    if hi - lo <= config.tol && (hi - mean) <= config.tol && (mean - lo) <= config.tol {
        ProbeStatus::Converged { limit: mean }
    } else {
        ProbeStatus::Oscillating
    }
}

/// Probe paths in their fixed enumeration order: rays, power curves (2-D only), spirals.
pub fn probe_paths(dim: usize, config: &AnalyzerConfig) -> Result<Vec<PathSpec>> {
    let mut paths: Vec<PathSpec> = direction_grid(dim, config.ray_count)
        .into_iter()
        .map(|phi0| PathSpec::Ray { phi0 })
        .collect();
    if dim == 2 {
        for p in &config.power_curve_grid {
            paths.push(p.path()?);
        }
    }
    for s in &config.spiral_grid {
        let mut phi0 = vec![FRAC_PI_2; dim - 1];
        phi0[dim - 2] = s.phi0;
        paths.push(PathSpec::Spiral { phi0, amplitude: s.amplitude, q: s.q });
    }
    Ok(paths)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Refutation {
    pub target: f64,
    pub epsilon: f64,
    pub samples: Vec<PolarSample>,
    pub witness: BisectionWitness,
    /// For `n >= 3`: a subsequence on which every hyperspherical angle converges.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle_subsequence: Option<BwSelection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum RefuteOutcome {
    Refuted(Refutation),
    NotFound { shell: usize, evaluations: usize },
}

/// Tries to build a sequence approaching the center on which `f` stays at
/// least `epsilon_refute` away from `target`.
pub fn refute(f: &Expression, center: &Center, target: f64, config: &AnalyzerConfig) -> Result<RefuteOutcome> {
    config.validate()?;
    let search = ViolationSearch {
        target,
        epsilon: config.epsilon(),
        r1: config.r1,
        count: config.refute_count,
        budget: config.budget,
        seed: config.seed,
    };
    match search.run(f, center)? {
        ViolationOutcome::NotFound { shell, evaluations, .. } => Ok(RefuteOutcome::NotFound { shell, evaluations }),
        ViolationOutcome::Found(samples) => {
            let depth = samples.len().min(MAX_DEPTH as usize);
            let witness = bisect_angles(&samples, depth)?;
            let angle_subsequence = if center.dim() >= 3 {
                let angles: Vec<Vec<f64>> = samples.iter().map(|s| s.offset.angles.clone()).collect();
                let coords: Vec<usize> = (0..center.dim() - 1).collect();
                Some(bw_subsequence(&angles, &coords, (samples.len() / 4).max(1))?)
            } else {
                None
            };
            Ok(RefuteOutcome::Refuted(Refutation {
                target,
                epsilon: config.epsilon(),
                samples,
                witness,
                angle_subsequence,
            }))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerdictKind {
    #[serde(rename = "LIMIT_EXISTS")]
    LimitExists,
    #[serde(rename = "NO_LIMIT")]
    NoLimit,
    #[serde(rename = "INCONCLUSIVE")]
    Inconclusive,
}

impl VerdictKind {
    pub fn as_str(self) -> &'static str {
        match self {
            VerdictKind::LimitExists => "LIMIT_EXISTS",
            VerdictKind::NoLimit => "NO_LIMIT",
            VerdictKind::Inconclusive => "INCONCLUSIVE",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub verdict: VerdictKind,
    pub limit: Option<f64>,
    pub note: String,
    pub expression: String,
    pub center: Vec<f64>,
    pub witnesses: Vec<ProbeResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refutation: Option<Refutation>,
    pub probes: Vec<ProbeResult>,
    pub config: AnalyzerConfig,
}

pub fn analyze(f: &Expression, center: &Center, config: &AnalyzerConfig) -> Result<Verdict> {
    config.validate()?;
    check_dim(center.dim(), f.arity())?;

    let probes: Vec<ProbeResult> = probe_paths(center.dim(), config)?
        .iter()
        .map(|p| path_limit(f, center, p, config))
        .collect::<Result<_>>()?;

    let mut verdict = Verdict {
        verdict: VerdictKind::Inconclusive,
        limit: None,
        note: String::new(),
        expression: f.to_string(),
        center: center.coords().to_vec(),
        witnesses: Vec::new(),
        refutation: None,
        probes: Vec::new(),
        config: config.clone(),
    };

    let converged: Vec<(usize, f64)> = probes
        .iter()
        .enumerate()
        .filter_map(|(i, p)| p.limit().map(|l| (i, l)))
        .collect();

    // first occurrence wins on ties, so the pair is stable
    let lowest = converged.iter().copied().reduce(|a, b| if b.1 < a.1 { b } else { a });
    let highest = converged.iter().copied().reduce(|a, b| if b.1 > a.1 { b } else { a });
    if let (Some((i, lo)), Some((j, hi))) = (lowest, highest) {
        if hi - lo > DISAGREEMENT_FACTOR * config.tol {
            let (a, b) = (i.min(j), i.max(j));
            verdict.verdict = VerdictKind::NoLimit;
            verdict.note = format!("path limits disagree: {:?} vs {:?}", probes[a].limit().unwrap(), probes[b].limit().unwrap());
            verdict.witnesses = vec![probes[a].clone(), probes[b].clone()];
            verdict.probes = probes;
            return Ok(verdict);
        }
    }

    if let Some(bad) = probes
        .iter()
        .find(|p| matches!(p.status, ProbeStatus::Diverged | ProbeStatus::Oscillating))
    {
        verdict.verdict = VerdictKind::NoLimit;
        let what = if bad.status == ProbeStatus::Diverged { "diverges" } else { "oscillates" };
        verdict.note = format!("f {what} along a probe path");
        verdict.witnesses = vec![bad.clone()];
        verdict.probes = probes;
        return Ok(verdict);
    }

    if converged.is_empty() {
        verdict.note = "no probe path converged inside the domain".into();
        verdict.probes = probes;
        return Ok(verdict);
    }

    let mut limits: Vec<f64> = converged.iter().map(|c| c.1).collect();
    limits.sort_by(f64::total_cmp);
    let mid = limits.len() / 2;
    let candidate = if limits.len() % 2 == 1 {
        limits[mid]
    } else {
        (limits[mid - 1] + limits[mid]) / 2.0
    };

    match refute(f, center, candidate, config)? {
        RefuteOutcome::NotFound { shell, evaluations } => {
            verdict.verdict = VerdictKind::LimitExists;
            verdict.limit = Some(candidate);
            verdict.note = format!(
                "heuristic: {} probes agree and no refutation found at epsilon {:.3e}, budget {} per shell (search stopped at shell {shell} after {evaluations} evaluations)",
                converged.len(),
                config.epsilon(),
                config.budget
            );
        }
        RefuteOutcome::Refuted(r) => {
            verdict.verdict = VerdictKind::NoLimit;
            verdict.note = format!(
                "all probes agree on {candidate:?}, but {} points with |f - L| >= {:.3e} approach the center",
                r.samples.len(),
                r.epsilon
            );
            verdict.refutation = Some(r);
        }
    }
    verdict.probes = probes;
    Ok(verdict)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn parse(s: &str) -> Expression {
        Expression::parse(s, 2).unwrap()
    }

    fn origin() -> Center {
        Center::origin(2).unwrap()
    }

    #[test]
    fn ray_limit_is_cos_sin() {
        let cfg = AnalyzerConfig::default();
        let f = parse("x*y/(x^2+y^2)");
        let p = path_limit(&f, &origin(), &PathSpec::ray_2d(FRAC_PI_4), &cfg).unwrap();
        let l = p.limit().expect("converges");
        // brute force: the values along the ray are cos(pi/4) sin(pi/4)
        let direct: Vec<f64> = (0..20).map(|j| {
            let r = 0.5f64.powi(j);
            let (x, y) = (r * FRAC_PI_4.cos(), r * FRAC_PI_4.sin());
            x * y / (x * x + y * y)
        }).collect();
        assert!(direct.iter().all(|v| (v - 0.5).abs() < 1e-15));
        assert!((l - 0.5).abs() < 1e-12);
        assert_eq!(p.tail.len(), cfg.k);
    }

    #[test]
    fn parabola_limit() {
        let cfg = AnalyzerConfig::default();
        let f = parse("x^2*y/(x^4+y^2)");
        let path = PathSpec::power(1.0, 2, 1, Branch::Positive).unwrap();
        let p = path_limit(&f, &origin(), &path, &cfg).unwrap();
        assert!((p.limit().expect("converges") - 0.5).abs() < 1e-9, "{p:?}");
    }

    #[test]
    fn oscillation_is_detected() {
        let cfg = AnalyzerConfig::default();
        let f = parse("sin(1/(x^2+y^2))");
        let p = path_limit(&f, &origin(), &PathSpec::ray_2d(0.0), &cfg).unwrap();
        assert_eq!(p.status, ProbeStatus::Oscillating);
        let values: Vec<f64> = p.tail.iter().filter_map(|e| e.value).collect();
        let spread = values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            - values.iter().copied().fold(f64::INFINITY, f64::min);
        assert!(spread > cfg.tol);
    }

    #[test]
    fn divergence_and_domain_loss() {
        let cfg = AnalyzerConfig::default();
        let p = path_limit(&parse("1/(x^2+y^2)"), &origin(), &PathSpec::ray_2d(1.0), &cfg).unwrap();
        assert_eq!(p.status, ProbeStatus::Diverged);
        let p = path_limit(&parse("log(y)"), &origin(), &PathSpec::ray_2d(-1.0), &cfg).unwrap();
        assert!(matches!(p.status, ProbeStatus::LeftDomain { .. }));
    }

    #[test]
    fn sample_sequence_probe() {
        let cfg = AnalyzerConfig::default();
        let points: Vec<Vec<f64>> = (1..=30).map(|j| vec![0.5f64.powi(j), 0.0]).collect();
        let p = path_limit(&parse("x*y/(x^2+y^2)"), &origin(), &PathSpec::SampleSeq { points }, &cfg).unwrap();
        assert_eq!(p.limit(), Some(0.0));
    }

    #[test]
    fn constant_has_limit() {
        let cfg = AnalyzerConfig::default();
        let c = Center::new(vec![3.0, 4.0]).unwrap();
        let v = analyze(&parse("0.7"), &c, &cfg).unwrap();
        assert_eq!(v.verdict, VerdictKind::LimitExists);
        assert_eq!(v.limit, Some(0.7));
    }

    #[test]
    fn classic_counterexample_has_no_limit() {
        let v = analyze(&parse("x*y/(x^2+y^2)"), &origin(), &AnalyzerConfig::rays_only()).unwrap();
        assert_eq!(v.verdict, VerdictKind::NoLimit);
        assert_eq!(v.witnesses.len(), 2);
        let (a, b) = (v.witnesses[0].limit().unwrap(), v.witnesses[1].limit().unwrap());
        // ray limits are cos(phi) sin(phi): extremes are +-1/2
        assert!(((a - b).abs() - 1.0).abs() < 1e-9);
        assert!(v.witnesses.iter().all(|w| matches!(w.path, PathSpec::Ray { .. })));
    }

    #[test]
    fn parabola_needs_power_curves() {
        let f = parse("x^2*y/(x^4+y^2)");
        let v = analyze(&f, &origin(), &AnalyzerConfig::default()).unwrap();
        assert_eq!(v.verdict, VerdictKind::NoLimit);
        assert!(v.witnesses.iter().any(|w| matches!(w.path, PathSpec::PowerCurve { m: 2, n: 1, .. })));

        let rays = AnalyzerConfig::rays_only();
        let probes: Vec<ProbeResult> = probe_paths(2, &rays)
            .unwrap()
            .iter()
            .map(|p| path_limit(&f, &origin(), p, &rays).unwrap())
            .collect();
        assert!(probes.iter().all(|p| p.limit().is_some_and(|l| l.abs() < 1e-6)));
    }

    #[test]
    fn refute_saddle() {
        let cfg = AnalyzerConfig { epsilon_refute: Some(0.5), refute_count: 20, ..AnalyzerConfig::default() };
        let f = parse("(x^2-y^2)/(x^2+y^2)");
        let RefuteOutcome::Refuted(r) = refute(&f, &origin(), 0.0, &cfg).unwrap() else { panic!() };
        for s in r.samples.iter().chain(&r.witness.picked) {
            assert!(f.evaluate(&s.point).unwrap().value().unwrap().abs() >= 0.5);
        }
        let width = r.witness.intervals.last().unwrap().width();
        assert!((2.0 * r.witness.phi0).cos().abs() >= 0.5 - 2.0 * width);
    }

    #[test]
    fn refute_fails_where_limit_exists() {
        let cfg = AnalyzerConfig { epsilon_refute: Some(1e-5), ..AnalyzerConfig::default() };
        let out = refute(&parse("x^2*y/(x^2+y^2)"), &origin(), 0.0, &cfg).unwrap();
        let RefuteOutcome::NotFound { shell, .. } = out else { panic!("{out:?}") };
        // |f| <= r/2, so nothing below r = 2e-5 can violate
        assert!(0.5f64.powi(shell as i32 - 2) >= 2e-5);
        let out = refute(&parse("5"), &origin(), 5.0, &cfg).unwrap();
        assert!(matches!(out, RefuteOutcome::NotFound { shell: 1, .. }));
    }

    #[test]
    fn config_validation() {
        let bad = [
            AnalyzerConfig { rho: 1.0, ..Default::default() },
            AnalyzerConfig { tol: 0.0, ..Default::default() },
            AnalyzerConfig { ray_count: 3, ..Default::default() },
            AnalyzerConfig { k: 0, ..Default::default() },
            AnalyzerConfig { epsilon_refute: Some(-1.0), ..Default::default() },
        ];
        for cfg in bad {
            assert!(analyze(&parse("x"), &origin(), &cfg).is_err());
        }
    }

    #[test]
    fn default_grid_size() {
        // 6 (m, n) pairs x 6 values of c x 2 branches, minus the x < 0 branch of (1, 2) and (3, 2)
        assert_eq!(default_power_grid().len(), 60);
        assert_eq!(probe_paths(2, &AnalyzerConfig::default()).unwrap().len(), 64 + 60 + 12);
        assert_eq!(probe_paths(3, &AnalyzerConfig::default()).unwrap().len(), 64 + 12);
    }
}
