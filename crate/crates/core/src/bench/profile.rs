//! Dolan-More performance profiles.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

/// Metric value of one solver on one problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRecord {
    /// Instance key; rows with equal keys are compared against each other.
    pub instance: String,
    pub solver: String,
    pub value: f64,
    pub solved: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfilePoint {
    pub solver: String,
    pub tau: f64,
    pub fraction: f64,
}

/// Reads `problem`, `n`, `seed`, `solver`, `status` and the metric column from a
/// rows file. The instance key is `problem/n/seed`.
pub fn read_metric_table(path: &Path, metric: &str) -> Result<Vec<MetricRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    let headers = r.headers()?.clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let value_col = col(metric)?;
    let [p, n, seed, solver, status] = ["problem", "n", "seed", "solver", "status"].map(col);
    let (p, n, seed, solver, status) = (p?, n?, seed?, solver?, status?);
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let field = |i: usize| rec.get(i).unwrap_or("");
        let value: f64 = field(value_col)
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("non-numeric {metric} value `{}`", field(value_col))))?;
        out.push(MetricRecord {
            instance: format!("{}/{}/{}", field(p), field(n), field(seed)),
            solver: field(solver).to_string(),
            value,
            solved: field(status) == "stationary",
        });
    }
    Ok(out)
}

/// Performance ratios `r[solver][instance]`; unsolved runs and missing
/// entries get `inf` and never define the per-instance best.
fn ratios(records: &[MetricRecord]) -> BTreeMap<String, Vec<f64>> {
    let instances: BTreeSet<&str> = records.iter().map(|r| r.instance.as_str()).collect();
    let solvers: BTreeSet<&str> = records.iter().map(|r| r.solver.as_str()).collect();
    let mut out = BTreeMap::new();
    for s in &solvers {
        out.insert(s.to_string(), Vec::with_capacity(instances.len()));
    }
    for inst in &instances {
        let here: Vec<&MetricRecord> = records.iter().filter(|r| r.instance == *inst).collect();
        let best = here
            .iter()
            .filter(|r| r.solved && r.value.is_finite())
            .map(|r| r.value)
            .fold(f64::INFINITY, f64::min);
        for s in &solvers {
            let rec = here.iter().find(|r| r.solver == *s && r.solved && r.value.is_finite());
            let ratio = match rec {
                None => f64::INFINITY,
                Some(r) if best > 0.0 => r.value / best,
                Some(r) if r.value == best => 1.0,
                Some(_) => f64::INFINITY,
            };
            out.get_mut(*s).expect("solver present").push(ratio);
        }
    }
    out
}

/// Fraction of instances each solver solves within a factor `tau` of the
/// best, sampled at every distinct finite ratio (always including 1).
pub fn performance_profile(records: &[MetricRecord]) -> Vec<ProfilePoint> {
    let r = ratios(records);
    let mut taus: Vec<f64> = r.values().flatten().copied().filter(|v| v.is_finite()).collect();
    taus.push(1.0);
    taus.sort_by(f64::total_cmp);
    taus.dedup();
    let mut out = Vec::new();
    for (solver, rs) in &r {
        let total = rs.len() as f64;
        for &tau in &taus {
            let within = rs.iter().filter(|&&v| v <= tau).count() as f64;
            out.push(ProfilePoint {
                solver: solver.clone(),
                tau,
                fraction: within / total,
            });
        }
    }
    out
}

pub fn write_profile_csv(path: &Path, points: &[ProfilePoint]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?;
    for p in points {
        w.serialize(p)?;
    }
    w.flush()?;
    Ok(())
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Minimal standalone SVG step chart of a profile.
pub fn profile_svg(points: &[ProfilePoint], metric: &str) -> String {
    let (w, h, left, right, top, bottom) = (640.0, 420.0, 60.0, 160.0, 30.0, 50.0);
    let tau_max = points.iter().map(|p| p.tau).fold(1.0, f64::max);
    let tau_hi = if tau_max > 1.0 { tau_max * 1.05 } else { 2.0 };
    let px = |tau: f64| left + (tau - 1.0) / (tau_hi - 1.0) * (w - left - right);
    let py = |frac: f64| top + (1.0 - frac) * (h - top - bottom);

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(svg, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let (x0, x1, y0, y1) = (px(1.0), px(tau_hi), py(0.0), py(1.0));
    let _ = writeln!(svg, r#"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>"#);
    let _ = writeln!(svg, r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>"#);
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="end">{f:.2}</text>"#, x0 - 6.0, py(f) + 4.0);
        let tau = 1.0 + f * (tau_hi - 1.0);
        let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">{tau:.3}</text>"#, px(tau), y0 + 18.0);
    }
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">tau ({metric})</text>"#, (x0 + x1) / 2.0, h - 8.0);

    let mut solvers: Vec<&str> = points.iter().map(|p| p.solver.as_str()).collect();
    solvers.dedup();
    for (i, s) in solvers.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut coords = Vec::new();
        let mut prev = 0.0;
        for p in points.iter().filter(|p| p.solver == *s) {
            coords.push(format!("{:.2},{:.2}", px(p.tau), py(prev)));
            coords.push(format!("{:.2},{:.2}", px(p.tau), py(p.fraction)));
            prev = p.fraction;
        }
        coords.push(format!("{:.2},{:.2}", x1, py(prev)));
        let _ = writeln!(svg, r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#, coords.join(" "));
        let ly = top + 20.0 * i as f64;
        let lx = w - right + 15.0;
        let _ = writeln!(svg, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, lx + 20.0);
        let _ = writeln!(svg, r#"<text x="{}" y="{}">{s}</text>"#, lx + 26.0, ly + 4.0);
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(instance: &str, solver: &str, value: f64, solved: bool) -> MetricRecord {
        MetricRecord {
            instance: instance.into(),
            solver: solver.into(),
            value,
            solved,
        }
    }

    fn fraction(points: &[ProfilePoint], solver: &str, tau: f64) -> f64 {
        points
            .iter()
            .rev()
            .find(|p| p.solver == solver && p.tau <= tau)
            .map_or(0.0, |p| p.fraction)
    }

    #[test]
    fn single_solver_has_unit_ratios() {
        let recs = vec![rec("p1", "A", 3.0, true), rec("p2", "A", 9.0, true)];
        let pts = performance_profile(&recs);
        assert_eq!(pts.len(), 1);
        assert_eq!((pts[0].tau, pts[0].fraction), (1.0, 1.0));
    }

    #[test]
    fn failures_never_define_the_best() {
        let recs = vec![rec("p1", "A", 1.0, false), rec("p1", "B", 5.0, true)];
        let pts = performance_profile(&recs);
        assert_eq!(fraction(&pts, "B", 1.0), 1.0);
        assert_eq!(fraction(&pts, "A", f64::MAX), 0.0);
    }

    #[test]
    fn fractions_are_monotone() {
        let recs: Vec<_> = (0..20)
            .flat_map(|i| {
                let inst = format!("p{i}");
                [rec(&inst, "A", 1.0 + i as f64, i % 7 != 0), rec(&inst, "B", 30.0 - i as f64, true)]
            })
            .collect();
        let pts = performance_profile(&recs);
        for s in ["A", "B"] {
            let f: Vec<f64> = pts.iter().filter(|p| p.solver == s).map(|p| p.fraction).collect();
            assert!(f.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn zero_metric_best() {
        let recs = vec![rec("p1", "A", 0.0, true), rec("p1", "B", 2.0, true)];
        let pts = performance_profile(&recs);
        assert_eq!(fraction(&pts, "A", 1.0), 1.0);
        assert_eq!(fraction(&pts, "B", 1e300), 0.0);
    }

    #[test]
    fn svg_is_self_contained() {
        let recs = vec![rec("p1", "A", 1.0, true), rec("p1", "B", 2.0, true)];
        let svg = profile_svg(&performance_profile(&recs), "n_i");
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(!svg.contains("href"));
    }
}
