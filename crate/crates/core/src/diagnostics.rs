//! Per-sample diagnostics along a trajectory and the offline bound checks
//! that run on a list of samples.

use std::fmt;

use crate::anisotropy::AnisotropyPhi;
use crate::convex::ConvexBody;
use crate::error::{Error, Result};
use crate::flow::unit_ball_volume_ratio;
use crate::sphere::dot;

/// One time sample of every tracked scalar. `centroid` has length `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub dt: f64,
    pub volume: f64,
    pub s_min: f64,
    pub s_max: f64,
    pub ratio: f64,
    pub osc: f64,
    pub grad_sup: f64,
    pub det_min: f64,
    pub det_max: f64,
    pub gauss_min: f64,
    pub gauss_max: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub kappa_min: f64,
    pub kappa_max: f64,
    pub mean_max: f64,
    pub width_minus: f64,
    pub width_plus: f64,
    pub width_ratio: f64,
    pub centroid: Vec<f64>,
    pub dev_unit: f64,
    pub tso_min: f64,
}

impl DiagnosticsRecord {
    /// CSV column names for dimension `n`.
    pub fn columns(n: usize) -> Vec<String> {
        let mut cols: Vec<String> = [
            "t", "dt", "V", "s_min", "s_max", "ratio", "osc", "grad_sup", "S_min", "S_max", "K_min",
            "K_max", "lambda_min", "lambda_max", "kappa_min", "kappa_max", "H_max", "width_minus",
            "width_plus", "width_ratio",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        cols.extend((1..=n).map(|i| format!("centroid_{i}")));
        cols.push("dev_unit".into());
        cols.push("tso_min".into());
        cols
    }

    pub fn dim(&self) -> usize {
        self.centroid.len()
    }

    /// Values in column order.
    pub fn values(&self) -> Vec<f64> {
        let mut v = vec![
            self.t,
            self.dt,
            self.volume,
            self.s_min,
            self.s_max,
            self.ratio,
            self.osc,
            self.grad_sup,
            self.det_min,
            self.det_max,
            self.gauss_min,
            self.gauss_max,
            self.lambda_min,
            self.lambda_max,
            self.kappa_min,
            self.kappa_max,
            self.mean_max,
            self.width_minus,
            self.width_plus,
            self.width_ratio,
        ];
        v.extend_from_slice(&self.centroid);
        v.push(self.dev_unit);
        v.push(self.tso_min);
        v
    }

    /// Inverse of [`values`](Self::values).
    pub fn from_values(n: usize, v: &[f64]) -> Result<Self> {
        if v.len() != 22 + n {
            return Err(Error::Parse(format!("expected {} values, got {}", 22 + n, v.len())));
        }
        Ok(DiagnosticsRecord {
            t: v[0],
            dt: v[1],
            volume: v[2],
            s_min: v[3],
            s_max: v[4],
            ratio: v[5],
            osc: v[6],
            grad_sup: v[7],
            det_min: v[8],
            det_max: v[9],
            gauss_min: v[10],
            gauss_max: v[11],
            lambda_min: v[12],
            lambda_max: v[13],
            kappa_min: v[14],
            kappa_max: v[15],
            mean_max: v[16],
            width_minus: v[17],
            width_plus: v[18],
            width_ratio: v[19],
            centroid: v[20..20 + n].to_vec(),
            dev_unit: v[20 + n],
            tso_min: v[21 + n],
        })
    }

    /// `(ω_n / V)^{1/n}`, the factor that rescales the body to unit-ball volume.
    pub fn unit_scale(&self) -> f64 {
        unit_ball_volume_ratio(self.volume, self.dim())
    }

    /// Largest deviation of the rescaled radii of curvature from 1.
    pub fn lambda_deviation(&self) -> f64 {
        let c = self.unit_scale();
        (c * self.lambda_min - 1.0).abs().max((c * self.lambda_max - 1.0).abs())
    }
}

/// Samples every diagnostic of a primal body at time `t`.
pub fn record(body: &ConvexBody, t: f64, dt: f64, phi: &AnisotropyPhi, p: f64) -> DiagnosticsRecord {
    let grid = body.grid();
    let n = body.dim();
    let radii = body.radii();
    let det = radii.s_det();
    let (mut det_min, mut det_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for &d in det {
        det_min = det_min.min(d);
        det_max = det_max.max(d);
    }
    let lambda_min = radii.min_lambda();
    let lambda_max = radii.max_lambda();
    let mean_max = (0..grid.len()).map(|k| radii.mean_curvature(k)).fold(f64::NEG_INFINITY, f64::max);
    let grad_sup = body.gradient_normsq().iter().fold(0.0f64, |m, g| m.max(*g)).sqrt();
    let (s_min, s_max) = (body.s_min(), body.s_max());
    let (w_lo, w_hi) = body.widths();
    let c = unit_ball_volume_ratio(body.volume(), n);
    let s = body.support().values();
    let dev_unit = s.iter().map(|v| (c * v - 1.0).abs()).fold(0.0, f64::max);
    let beta = p / (n - 1) as f64;
    let tso_min = grid
        .nodes()
        .iter()
        .enumerate()
        .map(|(k, z)| phi.eval(z) * det[k].powf(beta) / (2.0 * s_max - s[k]))
        .fold(f64::INFINITY, f64::min);
    DiagnosticsRecord {
        t,
        dt,
        volume: body.volume(),
        s_min,
        s_max,
        ratio: s_max / s_min,
        osc: s_max - s_min,
        grad_sup,
        det_min,
        det_max,
        gauss_min: 1.0 / det_max,
        gauss_max: 1.0 / det_min,
        lambda_min,
        lambda_max,
        kappa_min: 1.0 / lambda_max,
        kappa_max: 1.0 / lambda_min,
        mean_max,
        width_minus: w_lo,
        width_plus: w_hi,
        width_ratio: w_hi / w_lo,
        centroid: body.centroid()[..n].to_vec(),
        dev_unit,
        tso_min,
    }
}

/// One measured quantity compared with its limit.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub limit: f64,
    pub passed: bool,
    pub note: String,
}

impl Check {
    /// Passes when `measured ≤ limit`.
    pub fn at_most(name: &str, measured: f64, limit: f64) -> Self {
        Check {
            name: name.into(),
            measured,
            limit,
            passed: measured <= limit,
            note: String::new(),
        }
    }

    /// Passes when `measured ≥ limit`.
    pub fn at_least(name: &str, measured: f64, limit: f64) -> Self {
        Check {
            name: name.into(),
            measured,
            limit,
            passed: measured >= limit,
            note: String::new(),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{verdict} {}: measured {:.6e}, limit {:.6e}", self.name, self.measured, self.limit)?;
        if !self.note.is_empty() {
            write!(f, " ({})", self.note)?;
        }
        Ok(())
    }
}

/// A titled list of checks.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    pub title: String,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new(title: &str) -> Self {
        Report {
            title: title.into(),
            checks: Vec::new(),
        }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn merge(&mut self, other: Report) {
        self.checks.extend(other.checks);
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[{}] {}", if self.passed() { "PASS" } else { "FAIL" }, self.title)?;
        for c in &self.checks {
            writeln!(f, "  {c}")?;
        }
        Ok(())
    }
}

fn nonempty(records: &[DiagnosticsRecord]) -> Result<(&DiagnosticsRecord, &DiagnosticsRecord)> {
    match (records.first(), records.last()) {
        (Some(a), Some(b)) => Ok((a, b)),
        _ => Err(Error::Domain("empty trajectory".into())),
    }
}

fn sup_with_time(records: &[DiagnosticsRecord], f: impl Fn(&DiagnosticsRecord) -> f64) -> (f64, f64) {
    records
        .iter()
        .map(|r| (f(r), r.t))
        .fold((f64::NEG_INFINITY, 0.0), |a, b| if b.0 > a.0 { b } else { a })
}

/// Oscillation and gradient stay within `(1 + slack)` of their initial
/// values. When `min_growth` is given, also requires `s_min` to have grown by
/// that factor, so the bound was exercised over a meaningful stretch.
pub fn check_gradient_bound(records: &[DiagnosticsRecord], slack: f64, min_growth: Option<f64>) -> Result<Report> {
    let (first, last) = nonempty(records)?;
    let mut report = Report::new("gradient and oscillation bound");
    let scale_tol = 1e-8 * last.s_max;
    let (osc_sup, osc_t) = sup_with_time(records, |r| r.osc);
    report.push(
        Check::at_most("sup osc", osc_sup, first.osc * (1.0 + slack) + scale_tol)
            .with_note(format!("at t = {osc_t:.6}")),
    );
    let (grad_sup, grad_t) = sup_with_time(records, |r| r.grad_sup);
    report.push(
        Check::at_most("sup grad", grad_sup, first.grad_sup * (1.0 + slack) + scale_tol)
            .with_note(format!("at t = {grad_t:.6}")),
    );
    if let Some(g) = min_growth {
        report.push(Check::at_least("s_min growth", last.s_min / first.s_min, g));
    }
    Ok(report)
}

/// Largest change of `osc` over the run, relative to the final `s_max`.
pub fn osc_variation(records: &[DiagnosticsRecord]) -> Result<f64> {
    let (first, last) = nonempty(records)?;
    let dev = records.iter().map(|r| (r.osc - first.osc).abs()).fold(0.0, f64::max);
    Ok(dev / last.s_max)
}

/// Final `ratio − 1` below `tol`, and no increase over the last decade of
/// the run beyond `1e-10`.
pub fn check_ratio_convergence(records: &[DiagnosticsRecord], tol: f64) -> Result<Report> {
    let (_, last) = nonempty(records)?;
    let mut report = Report::new("max/min support ratio");
    report.push(Check::at_most("final ratio - 1", last.ratio - 1.0, tol));
    let start = last.t / 10.0;
    let rise = records
        .iter()
        .filter(|r| r.t >= start)
        .map(|r| last.ratio - r.ratio)
        .fold(f64::NEG_INFINITY, f64::max);
    report.push(Check::at_most("last-decade rise", rise, 1e-10));
    Ok(report)
}

/// Time at which `dev_unit` first drops below `threshold`.
pub fn burn_in_time(records: &[DiagnosticsRecord], threshold: f64) -> Option<f64> {
    records.iter().find(|r| r.dev_unit < threshold).map(|r| r.t)
}

/// Limits for [`check_curvature_bounds`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvatureBand {
    /// `None` uses the first time with `dev_unit < 0.2`.
    pub burn_in: Option<f64>,
    /// Rescaled curvatures must lie in `[1/c_band, c_band]`.
    pub c_band: f64,
    /// Cap on `t · κ_max`.
    pub t_kappa_cap: f64,
    /// Cap on `𝒦_max · t^{(n−1)/(1−p)}`.
    pub gauss_decay_cap: f64,
}

impl CurvatureBand {
    /// Regression caps: `t κ ≤ 2` and twice the ball's large-time limit
    /// `(1−p)^{−(n−1)/(1−p)}` for the Gauss curvature decay.
    pub fn regression(n: usize, p: f64) -> Self {
        CurvatureBand {
            burn_in: None,
            c_band: 4.0,
            t_kappa_cap: 2.0,
            gauss_decay_cap: 2.0 * (1.0 - p).powf(-((n - 1) as f64) / (1.0 - p)),
        }
    }
}

/// Curvature bounds after burn-in: rescaled principal curvatures in a fixed
/// band, `t·κ_max` bounded, and `𝒦_max` decaying like `t^{(n−1)/(p−1)}`.
pub fn check_curvature_bounds(records: &[DiagnosticsRecord], p: f64, band: CurvatureBand) -> Result<Report> {
    let (first, _) = nonempty(records)?;
    let n = first.dim();
    let mut report = Report::new("curvature bounds");
    let t0 = match band.burn_in.or_else(|| burn_in_time(records, 0.2)) {
        Some(t) => t,
        None => {
            report.push(Check::at_most("burn-in reached", f64::INFINITY, 0.2).with_note("dev_unit never < 0.2"));
            return Ok(report);
        }
    };
    let after: Vec<&DiagnosticsRecord> = records.iter().filter(|r| r.t >= t0 && r.t > 0.0).collect();
    let mut hi: f64 = 0.0;
    let mut lo = f64::INFINITY;
    for r in &after {
        let c = r.unit_scale();
        hi = hi.max(r.kappa_max / c);
        lo = lo.min(r.kappa_min / c);
    }
    report.push(
        Check::at_most("rescaled kappa band", hi.max(1.0 / lo), band.c_band)
            .with_note(format!("kappa in [{lo:.4}, {hi:.4}] after t = {t0:.4}")),
    );
    let (tk, tk_t) = after
        .iter()
        .map(|r| (r.t * r.kappa_max, r.t))
        .fold((0.0, 0.0), |a, b| if b.0 > a.0 { b } else { a });
    report.push(Check::at_most("sup t*kappa_max", tk, band.t_kappa_cap).with_note(format!("at t = {tk_t:.6}")));
    if p < 1.0 {
        let e = (n - 1) as f64 / (1.0 - p);
        let gk = after.iter().map(|r| r.gauss_max * r.t.powf(e)).fold(0.0, f64::max);
        report.push(Check::at_most("sup K_max*t^((n-1)/(1-p))", gk, band.gauss_decay_cap));
    }
    Ok(report)
}

/// `sup width_ratio ≤ width_ratio(0) · c_w`.
pub fn check_width_ratio(records: &[DiagnosticsRecord], c_w: f64) -> Result<Report> {
    let (first, _) = nonempty(records)?;
    let mut report = Report::new("width ratio");
    let (sup, at) = sup_with_time(records, |r| r.width_ratio);
    report.push(Check::at_most("sup width ratio", sup, first.width_ratio * c_w).with_note(format!("at t = {at:.6}")));
    Ok(report)
}

/// Final `dev_unit ≤ tol0` and rescaled radii of curvature within `tol2` of 1.
pub fn check_unit_ball_convergence(records: &[DiagnosticsRecord], tol0: f64, tol2: f64) -> Result<Report> {
    let (_, last) = nonempty(records)?;
    let mut report = Report::new("convergence to the unit ball");
    report.push(Check::at_most("dev_unit", last.dev_unit, tol0));
    report.push(Check::at_most("lambda deviation", last.lambda_deviation(), tol2));
    Ok(report)
}

/// Every check that applies to a saved trajectory.
///
/// Expanding runs get the gradient and curvature checks, and, once `s_min`
/// has grown tenfold, the ratio and unit-ball limits. Shrinking runs get the
/// width-ratio check. The Gauss-curvature decay check needs `p`, and the
/// gradient bound is only applied when `isotropic` says `Φ ≡ 1`.
pub fn trajectory_report(records: &[DiagnosticsRecord], p: Option<f64>, isotropic: bool) -> Result<Report> {
    let (first, last) = nonempty(records)?;
    let n = first.dim();
    let mut report = Report::new(&format!("trajectory of {} samples, t in [{}, {}]", records.len(), first.t, last.t));
    if last.volume >= first.volume {
        if isotropic {
            report.merge(check_gradient_bound(records, 0.05, None)?);
        }
        let band = match p {
            Some(p) if p < 1.0 => CurvatureBand::regression(n, p),
            _ => CurvatureBand {
                gauss_decay_cap: f64::INFINITY,
                ..CurvatureBand::regression(n, 0.5)
            },
        };
        let mut curv = check_curvature_bounds(records, p.unwrap_or(1.0), band)?;
        if curv.checks.iter().any(|c| c.name == "burn-in reached") {
            curv.checks.clear();
        }
        report.merge(curv);
        if last.s_min >= 10.0 * first.s_min {
            report.merge(check_ratio_convergence(records, 0.01)?);
            report.merge(check_unit_ball_convergence(records, 0.02, 0.05)?);
        }
    } else {
        report.merge(check_width_ratio(records, 1.1)?);
    }
    Ok(report)
}

/// Margins of the inclusion `(ω₋/(n+1)) 𝔹 ⊆ K − b ⊆ (n ω₊/(n+1)) 𝔹`, read
/// node-wise off the support function of `K − b`. Both are nonnegative when
/// the inclusion holds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InclusionMargins {
    pub inner: f64,
    pub outer: f64,
}

impl InclusionMargins {
    pub fn holds(&self) -> bool {
        self.inner >= 0.0 && self.outer >= 0.0
    }
}

pub fn minkowski_inclusion(body: &ConvexBody) -> InclusionMargins {
    let n = body.dim() as f64;
    let b = body.centroid();
    let (w_lo, w_hi) = body.widths();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (z, s) in body.grid().nodes().iter().zip(body.support().values()) {
        let v = s - dot(&b, z);
        lo = lo.min(v);
        hi = hi.max(v);
    }
    InclusionMargins {
        inner: lo - w_lo / (n + 1.0),
        outer: n * w_hi / (n + 1.0) - hi,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::ellipsoid_support;
    use crate::sphere::build_grid;

    #[test]
    fn ball_record() {
        let g = build_grid(3, &[16, 32]).unwrap();
        let b = ConvexBody::from_fn(g, |_| 2.0).unwrap();
        let r = record(&b, 0.0, 0.0, &AnisotropyPhi::isotropic(), 0.5);
        assert!((r.ratio - 1.0).abs() < 1e-15 && r.osc == 0.0 && r.grad_sup < 1e-12);
        assert!((r.gauss_min - 0.25).abs() < 1e-12 && (r.gauss_max - 0.25).abs() < 1e-12);
        assert!(r.dev_unit < 1e-12);
        assert!((r.width_minus - 4.0).abs() < 1e-12 && (r.width_plus - 4.0).abs() < 1e-12);
        assert_eq!(r.values().len(), DiagnosticsRecord::columns(3).len());
        assert_eq!(DiagnosticsRecord::from_values(3, &r.values()).unwrap(), r);
    }

    #[test]
    fn translated_ball_record() {
        let g = build_grid(2, &[128]).unwrap();
        let v = [0.3, 0.0, 0.0];
        let b = ConvexBody::from_fn(g, |z| 1.0 + dot(&v, z)).unwrap();
        let r = record(&b, 0.0, 0.0, &AnisotropyPhi::isotropic(), 0.5);
        assert!((r.osc - 0.6).abs() < 1e-12);
        assert!((r.ratio - 1.3 / 0.7).abs() < 1e-12);
        assert!((r.gauss_max - 1.0).abs() < 1e-10 && (r.gauss_min - 1.0).abs() < 1e-10);
        assert!((r.centroid[0] - 0.3).abs() < 1e-12);
    }

    #[test]
    fn ellipse_curvature_extrema() {
        let g = build_grid(2, &[256]).unwrap();
        let b = ConvexBody::from_fn(g, |z| ellipsoid_support(&[1.0, 2.0], z)).unwrap();
        let r = record(&b, 0.0, 0.0, &AnisotropyPhi::isotropic(), 0.5);
        assert!((r.kappa_max - 2.0).abs() < 1e-10);
        assert!((r.kappa_min - 0.25).abs() < 1e-10);
        // aggregate AM/GM consistency
        assert!(r.kappa_min * r.det_max <= 1.0 + 1e-12);
        assert!(r.kappa_max * r.det_min >= 1.0 - 1e-12);
        assert!(r.tso_min > 0.0);
    }

    #[test]
    fn minkowski_inclusion_on_ellipses() {
        let g = build_grid(2, &[128]).unwrap();
        for axes in [[1.0, 1.0], [1.0, 1.5], [0.4, 3.0]] {
            let b = ConvexBody::from_fn(g.clone(), |z| ellipsoid_support(&axes, z)).unwrap();
            let m = minkowski_inclusion(&b.translated(&[0.2, -0.1, 0.0]).unwrap());
            assert!(m.holds(), "{axes:?} {m:?}");
        }
    }

    #[test]
    fn reports_on_synthetic_ball_trajectory() {
        // unit ball, p = 1/2, n = 2: R(t) = (1 + t/2)²
        let g = build_grid(2, &[32]).unwrap();
        let records: Vec<DiagnosticsRecord> = (0..=400)
            .map(|i| {
                let t = i as f64 * 0.05;
                let r = (1.0 + 0.5 * t).powi(2);
                let b = ConvexBody::from_fn(g.clone(), move |_| r).unwrap();
                record(&b, t, 0.05, &AnisotropyPhi::isotropic(), 0.5)
            })
            .collect();
        assert!(check_gradient_bound(&records, 0.05, Some(10.0)).unwrap().passed());
        assert!(check_ratio_convergence(&records, 0.01).unwrap().passed());
        let c = check_curvature_bounds(&records, 0.5, CurvatureBand::regression(2, 0.5)).unwrap();
        assert!(c.passed(), "{c}");
        let tk = c.checks.iter().find(|c| c.name == "sup t*kappa_max").unwrap().measured;
        assert!((tk - 0.5).abs() < 1e-12);
        assert!(check_width_ratio(&records, 1.1).unwrap().passed());
        assert!(check_unit_ball_convergence(&records, 1e-12, 1e-12).unwrap().passed());
    }
}
