use std::fmt::Write;

use limitscout::analyzer::{ProbeResult, ProbeStatus, Verdict};
use limitscout::paths::{Branch, PathSpec};

fn list(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| format!("{x:?}")).collect();
    format!("[{}]", items.join(", "))
}

pub fn path(p: &PathSpec) -> String {
    match p {
        PathSpec::Ray { phi0 } => format!("ray phi0={}", list(phi0)),
        PathSpec::PowerCurve { c, m, n, branch } => {
            let side = if *branch == Branch::Positive { "x>0" } else { "x<0" };
            format!("power y={c:?}*x^({m}/{n}) {side}")
        }
        PathSpec::Spiral { phi0, amplitude, q } => {
            format!("spiral phi0={} amplitude={amplitude:?} q={q:?}", list(phi0))
        }
        PathSpec::Polyline { vertices } => format!("polyline with {} vertices", vertices.len()),
        PathSpec::SampleSeq { points } => format!("sample sequence of {} points", points.len()),
    }
}

pub fn status(s: &ProbeStatus) -> String {
    match s {
        ProbeStatus::Converged { limit } => format!("converged to {limit:?}"),
        ProbeStatus::Diverged => "diverged".into(),
        ProbeStatus::Oscillating => "oscillating".into(),
        ProbeStatus::LeftDomain { at_r } => format!("left the domain near r={at_r:?}"),
    }
}

pub fn probe(p: &ProbeResult) -> String {
    let mut out = String::new();
    writeln!(out, "path: {}", path(&p.path)).unwrap();
    writeln!(out, "status: {}", status(&p.status)).unwrap();
    for e in &p.tail {
        let v = e.value.map_or_else(|| "undefined".to_string(), |v| format!("{v:?}"));
        writeln!(out, "  r={:?} f={v}", e.r).unwrap();
    }
    out
}

pub fn verdict(v: &Verdict) -> String {
    let mut out = String::new();
    writeln!(out, "verdict: {}", v.verdict.as_str()).unwrap();
    if let Some(l) = v.limit {
        writeln!(out, "limit: {l:?}").unwrap();
    }
    writeln!(out, "expression: {}", v.expression).unwrap();
    writeln!(out, "center: {}", list(&v.center)).unwrap();
    writeln!(out, "note: {}", v.note).unwrap();
    for (i, w) in v.witnesses.iter().enumerate() {
        writeln!(out, "witness {}: {}, {}", i + 1, path(&w.path), status(&w.status)).unwrap();
    }
    if let Some(r) = &v.refutation {
        let last = r.samples.last().map_or(0.0, |s| s.offset.r);
        writeln!(
            out,
            "refutation: {} points with |f - {:?}| >= {:?}, down to r={last:?}, angles converge to {:?}",
            r.samples.len(),
            r.target,
            r.epsilon,
            r.witness.phi0
        )
        .unwrap();
    }
    let converged = v.probes.iter().filter(|p| p.limit().is_some()).count();
    writeln!(out, "probes: {} ({converged} converged)", v.probes.len()).unwrap();
    out
}
