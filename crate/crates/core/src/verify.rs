//! Self-checking suites with analytic or self-consistency oracles. Each suite
//! returns a [`Report`]; the CLI prints it and the acceptance tests assert on it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::BodySpec;
use crate::convex::{ellipsoid_support, speed_g, ConvexBody};
use crate::diagnostics::{
    check_curvature_bounds, check_gradient_bound, check_ratio_convergence, check_unit_ball_convergence,
    check_width_ratio, minkowski_inclusion, osc_variation, record, Check, CurvatureBand, DiagnosticsRecord,
    Report,
};
use crate::duality::kaltenbach_check;
use crate::error::{Error, Result};
use crate::flow::{
    ball_extinction_time, ball_radius_expanding, ball_radius_shrinking, cross_check_dual, integrate,
    verify_rescaling_property, FlowConfig, FlowDirection, FlowState, RunOutcome, StopReason,
};
use crate::sphere::build_grid;

pub const SUITES: &[&str] = &[
    "ball-exact",
    "dual-crosscheck",
    "kaltenbach",
    "rescaling",
    "g-properties",
    "convergence",
    "shrinking-widths",
    "gradient-bound",
    "curvature",
];

/// Shared knobs for every suite. Unset values fall back to suite defaults.
#[derive(Clone, Debug, PartialEq)]
pub struct VerifyOptions {
    pub n: usize,
    pub p: Option<f64>,
    pub resolution: Option<Vec<usize>>,
    pub trials: usize,
    pub seed: u64,
    pub tol: Option<f64>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            n: 2,
            p: None,
            resolution: None,
            trials: 1000,
            seed: 7,
            tol: None,
        }
    }
}

impl VerifyOptions {
    pub fn new(n: usize) -> Self {
        VerifyOptions { n, ..Default::default() }
    }

    pub fn with_p(mut self, p: f64) -> Self {
        self.p = Some(p);
        self
    }

    pub fn with_resolution(mut self, r: &[usize]) -> Self {
        self.resolution = Some(r.to_vec());
        self
    }

    fn res_or(&self, n2: &[usize], n3: &[usize]) -> Vec<usize> {
        self.resolution
            .clone()
            .unwrap_or_else(|| if self.n == 2 { n2.to_vec() } else { n3.to_vec() })
    }

    fn p_or(&self, p: f64) -> f64 {
        self.p.unwrap_or(p)
    }

    fn tol_or(&self, t2: f64, t3: f64) -> f64 {
        self.tol.unwrap_or(if self.n == 2 { t2 } else { t3 })
    }

    fn check_dim(&self) -> Result<()> {
        if self.n == 2 || self.n == 3 {
            Ok(())
        } else {
            Err(Error::Config(format!("n must be 2 or 3, got {}", self.n)))
        }
    }
}

/// Runs the named suite.
pub fn run_suite(name: &str, opts: &VerifyOptions) -> Result<Report> {
    opts.check_dim()?;
    match name {
        "ball-exact" => ball_exact(opts),
        "dual-crosscheck" => dual_crosscheck(opts),
        "kaltenbach" => kaltenbach(opts),
        "rescaling" => rescaling(opts),
        "g-properties" => g_properties(opts),
        "convergence" => convergence(opts),
        "shrinking-widths" => shrinking_widths(opts),
        "gradient-bound" => gradient_bound(opts),
        "curvature" => curvature(opts),
        other => Err(Error::Config(format!("unknown suite '{other}'; known: {}", SUITES.join(", ")))),
    }
}

fn doubled(res: &[usize]) -> Vec<usize> {
    res.iter().map(|c| 2 * c).collect()
}

fn halved(res: &[usize]) -> Vec<usize> {
    res.iter().map(|c| c / 2).collect()
}

fn ellipsoid(n: usize) -> BodySpec {
    BodySpec::Ellipsoid {
        axes: if n == 2 { vec![1.0, 1.5] } else { vec![1.0, 1.2, 1.5] },
    }
}

fn body_on(spec: &BodySpec, n: usize, res: &[usize]) -> Result<ConvexBody> {
    spec.build(build_grid(n, res)?)
}

/// Integrates and samples diagnostics every `every` accepted steps, plus the
/// initial state, every checkpoint and the final state.
pub fn recorded_run(
    body: ConvexBody,
    cfg: &FlowConfig,
    checkpoints: &[f64],
    every: usize,
) -> Result<(Vec<DiagnosticsRecord>, RunOutcome)> {
    let mut records = Vec::new();
    let state = FlowState::new(body, cfg.direction)?;
    let mut last_step = usize::MAX;
    let out = integrate(state, cfg, checkpoints, |s, on_cp| {
        if on_cp || s.step_count % every.max(1) == 0 {
            let b = s.primal_body()?;
            records.push(record(&b, s.t, s.dt_last, &cfg.phi, cfg.p));
            last_step = s.step_count;
        }
        Ok(())
    })?;
    if last_step != out.state.step_count {
        let b = out.state.primal_body()?;
        records.push(record(&b, out.state.t, out.state.dt_last, &cfg.phi, cfg.p));
    }
    Ok((records, out))
}

fn sup_ball_error(
    n: usize,
    res: &[usize],
    cfg: &FlowConfig,
    exact: impl Fn(f64) -> f64,
) -> Result<f64> {
    let body = body_on(&BodySpec::Ball { radius: 1.0 }, n, res)?;
    let mut err: f64 = 0.0;
    integrate(FlowState::new(body, cfg.direction)?, cfg, &[], |s, _| {
        let r = exact(s.t);
        let values = s.variable.values();
        let e = match s.direction {
            FlowDirection::ExpandingDual => values.iter().map(|v| (v - 1.0 / r).abs() * r * r).fold(0.0, f64::max),
            _ => values.iter().map(|v| (v - r).abs()).fold(0.0, f64::max),
        };
        err = err.max(e);
        Ok(())
    })?;
    Ok(err)
}

/// Balls against the closed-form radius for every flow direction.
pub fn ball_exact(opts: &VerifyOptions) -> Result<Report> {
    let n = opts.n;
    let res = opts.res_or(&[256], &[64, 128]);
    let tol = opts.tol_or(1e-8, 1e-6);
    let ps = match opts.p {
        Some(p) => vec![p],
        None => vec![0.25, 0.5, 0.75],
    };
    let mut report = Report::new(&format!("ball-exact n={n} resolution={res:?}"));
    for p in ps {
        let cfg = FlowConfig::new(p, FlowDirection::ExpandingPrimal).with_t_end(5.0);
        let e = sup_ball_error(n, &res, &cfg, |t| ball_radius_expanding(1.0, p, t))?;
        report.push(Check::at_most(&format!("expanding p={p} t<=5"), e, tol));
        for dir in [FlowDirection::ExpandingDual, FlowDirection::ExpandingRadial] {
            let cfg = FlowConfig::new(p, dir).with_t_end(1.0);
            let e = sup_ball_error(n, &res, &cfg, |t| ball_radius_expanding(1.0, p, t))?;
            report.push(Check::at_most(&format!("{dir} p={p} t<=1"), e, tol));
        }
        let t_half = 0.5 * ball_extinction_time(1.0, p);
        let cfg = FlowConfig::new(p, FlowDirection::ShrinkingPrimal)
            .with_t_end(t_half)
            .with_v_stop(1e-12);
        let e = sup_ball_error(n, &res, &cfg, |t| ball_radius_shrinking(1.0, p, t))?;
        report.push(Check::at_most(&format!("shrinking p={p} t<=T/2"), e, tol));
    }
    Ok(report)
}

/// Defects of the primal-versus-dual cross-check at `res`, and at `res/2`.
pub fn dual_crosscheck(opts: &VerifyOptions) -> Result<Report> {
    let n = opts.n;
    let p = opts.p_or(0.5);
    let res = opts.res_or(&[512], &[32, 64]);
    let tol = opts.tol_or(1e-3, 1e-2);
    let cps = [0.25, 0.5];
    let cfg = FlowConfig::new(p, FlowDirection::ExpandingPrimal).with_t_end(0.5);
    let mut report = Report::new(&format!("dual-crosscheck n={n} p={p} resolution={res:?} horizon=0.5"));

    let ball = body_on(&BodySpec::Ball { radius: 1.0 }, n, &res)?;
    report.push(Check::at_most("ball", cross_check_dual(&cfg, &ball, &cps)?, 1e-9));
    let tb = BodySpec::TranslatedBall {
        radius: 1.0,
        offset: [0.3, 0.0, 0.0],
    };
    let tol_tb = if n == 2 { 1e-4 } else { tol };
    report.push(Check::at_most("translated ball", cross_check_dual(&cfg, &body_on(&tb, n, &res)?, &cps)?, tol_tb));

    let spec = ellipsoid(n);
    let fine = cross_check_dual(&cfg, &body_on(&spec, n, &res)?, &cps)?;
    let coarse = cross_check_dual(&cfg, &body_on(&spec, n, &halved(&res))?, &cps)?;
    report.push(Check::at_most(&format!("{spec}"), fine, tol));
    // the spherical grid is limited by its second-order quadrature
    let factor = if n == 2 { 3.0 } else { 2.0 };
    report.push(
        Check::at_least("refinement factor", coarse / fine, factor)
            .with_note(format!("defect {coarse:.3e} at {:?} -> {fine:.3e}", halved(&res))),
    );
    Ok(report)
}

/// The identity `(𝒦/s^{n+1})(x) · (𝒦°/s°^{n+1})(x°) = 1` on ellipses and
/// ellipsoids, at `res` and `2·res`.
pub fn kaltenbach(opts: &VerifyOptions) -> Result<Report> {
    let n = opts.n;
    let res = opts.res_or(&[512], &[64, 128]);
    let tol = opts.tol_or(1e-4, 1e-2);
    let spec = if n == 2 {
        BodySpec::Ellipsoid { axes: vec![1.0, 2.0] }
    } else {
        BodySpec::Ellipsoid { axes: vec![1.0, 1.2, 1.5] }
    };
    let mut report = Report::new(&format!("kaltenbach n={n} resolution={res:?}"));
    let k = kaltenbach_check(&body_on(&spec, n, &res)?)?;
    report.push(
        Check::at_most(&format!("{spec}"), k.max_defect, tol)
            .with_note(format!("pairing error {:.2e}", k.max_pairing_error)),
    );
    let fine = kaltenbach_check(&body_on(&spec, n, &doubled(&res))?)?;
    report.push(
        Check::at_least("refinement factor", k.max_defect / fine.max_defect, 2.0)
            .with_note(format!("defect {:.3e} at {:?}", fine.max_defect, doubled(&res))),
    );
    if n == 2 {
        let pert = BodySpec::Harmonic {
            radius: 1.0,
            modes: vec![crate::config::HarmonicMode { l: 2, m: 2, amp: 0.1 }],
        };
        let k = kaltenbach_check(&body_on(&pert, n, &res)?)?;
        report.push(Check::at_most(&format!("{pert}"), k.max_defect, 10.0 * tol));
    }
    Ok(report)
}

/// `s_a(t) = a^{1/n} s(a^{(p−1)/n} t)` with `a = 2`, plus the trivial `a = 1`.
pub fn rescaling(opts: &VerifyOptions) -> Result<Report> {
    let n = opts.n;
    let p = opts.p_or(0.5);
    let res = opts.res_or(&[512], &[32, 64]);
    let tol = opts.tol.unwrap_or(1e-5);
    let cps = [0.1, 0.5, 1.0];
    let cfg = FlowConfig::new(p, FlowDirection::ExpandingPrimal).with_t_end(1.0);
    let body = body_on(&ellipsoid(n), n, &res)?;
    let mut report = Report::new(&format!("rescaling n={n} p={p} resolution={res:?}"));
    report.push(Check::at_most("a=1", verify_rescaling_property(&cfg, &body, 1.0, &cps)?, 0.0));
    report.push(Check::at_most(
        &format!("{} a=2", ellipsoid(n)),
        verify_rescaling_property(&cfg, &body, 2.0, &cps)?,
        tol,
    ));
    let ball = body_on(&BodySpec::Ball { radius: 1.0 }, n, &res)?;
    report.push(Check::at_most("ball a=3", verify_rescaling_property(&cfg, &ball, 3.0, &cps)?, 1e-9));
    Ok(report)
}

/// Concavity, monotonicity, the inversion identity and Euler's relation for
/// `G(λ) = (Πλ)^{p/(n−1)}` on random positive `λ`.
pub fn g_properties(opts: &VerifyOptions) -> Result<Report> {
    let p = opts.p_or(0.5);
    let rank = opts.n - 1;
    let tol = opts.tol.unwrap_or(1e-8);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let sample = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        (0..rank).map(|_| 10f64.powf(rng.gen_range(-1.0..1.0))).collect()
    };
    let (mut concave, mut mono, mut inversion, mut euler) = (f64::NEG_INFINITY, f64::INFINITY, 0.0f64, 0.0f64);
    for _ in 0..opts.trials {
        let a = sample(&mut rng);
        let b = sample(&mut rng);
        let g = |l: &[f64]| speed_g(l, p);
        let ga = g(&a)?;

        // property 1: midpoint concavity, as a (negative when fine) shortfall
        let mid: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect();
        let avg = 0.5 * (ga + g(&b)?);
        concave = concave.max((avg - g(&mid)?) / avg);

        // properties 2 and 5 from central differences
        let mut euler_sum = 0.0;
        for i in 0..rank {
            let h = 1e-4 * a[i];
            let mut up = a.clone();
            let mut dn = a.clone();
            up[i] += h;
            dn[i] -= h;
            let d = (g(&up)? - g(&dn)?) / (2.0 * h);
            mono = mono.min(d);
            euler_sum += a[i] * d;
        }
        euler = euler.max((euler_sum - p * ga).abs() / ga);

        // property 4
        let inv: Vec<f64> = a.iter().map(|x| 1.0 / x).collect();
        inversion = inversion.max((ga * g(&inv)? - 1.0).abs());
    }
    let mut report = Report::new(&format!("g-properties n={} p={p} trials={} seed={}", opts.n, opts.trials, opts.seed));
    report.push(
        Check::at_most("1 concavity shortfall", concave, tol)
            .with_note(if p > 1.0 { "G is not concave for p > 1" } else { "" }),
    );
    report.push(Check::at_least("2 min dG/dlambda", mono, f64::MIN_POSITIVE));
    report.push(Check::at_most("4 |G(l)G(1/l) - 1|", inversion, tol));
    report.push(Check::at_most("5 |sum l dG/dl - pG|/G", euler, tol));
    Ok(report)
}

/// Volume-normalised convergence to the unit ball from an ellipse or
/// ellipsoid, run until the volume grows by `10⁴`.
pub fn convergence(opts: &VerifyOptions) -> Result<Report> {
    let n = opts.n;
    let p = opts.p_or(0.5);
    let res = opts.res_or(&[256], &[64, 128]);
    let records = convergence_records(n, p, &res)?;
    let mut report = Report::new(&format!("convergence n={n} p={p} resolution={res:?} until V x 1e4"));
    report.merge(check_unit_ball_convergence(&records, opts.tol.unwrap_or(0.02), 0.05)?);
    report.merge(check_ratio_convergence(&records, 0.01)?);
    report.merge(check_gradient_bound(&records, 0.05, Some(10.0))?);
    report.merge(check_curvature_bounds(&records, p, CurvatureBand::regression(n, p))?);
    Ok(report)
}

/// Trajectory behind [`convergence`].
pub fn convergence_records(n: usize, p: f64, res: &[usize]) -> Result<Vec<DiagnosticsRecord>> {
    let body = body_on(&ellipsoid(n), n, res)?;
    let cfg = FlowConfig::new(p, FlowDirection::ExpandingPrimal).with_volume_growth(1e4);
    Ok(recorded_run(body, &cfg, &[], 1)?.0)
}

/// Shrinking flow: ball extinction time, width-ratio bound and the Minkowski
/// inclusion at every step for the `(1, 1.5)` ellipse.
pub fn shrinking_widths(opts: &VerifyOptions) -> Result<Report> {
    let n = opts.n;
    let p = opts.p_or(0.9);
    let res = opts.res_or(&[256], &[32, 64]);
    let mut report = Report::new(&format!("shrinking-widths n={n} p={p} resolution={res:?}"));

    let (t_halt, t_exact) = shrinking_ball_halt(n, p)?;
    report.push(
        Check::at_most("ball |T - t_halt|", (t_exact - t_halt).abs(), opts.tol.unwrap_or(1e-4))
            .with_note(format!("T = {t_exact:.8}, halted at {t_halt:.8}")),
    );
    report.push(Check::at_least("ball halts before T", t_exact - t_halt, 0.0));

    let body = body_on(&ellipsoid(n), n, &res)?;
    let cfg = FlowConfig::new(p, FlowDirection::ShrinkingPrimal).with_v_stop(1e-3 * body.volume());
    let mut worst = f64::INFINITY;
    let mut records = Vec::new();
    let out = integrate(FlowState::new(body, cfg.direction)?, &cfg, &[], |s, _| {
        let m = minkowski_inclusion(&s.body);
        worst = worst.min(m.inner.min(m.outer) / s.body.s_max());
        records.push(record(&s.body, s.t, s.dt_last, &cfg.phi, p));
        Ok(())
    })?;
    report.merge(check_width_ratio(&records, 1.1)?);
    report.push(
        Check::at_least("Minkowski inclusion margin", worst, 0.0)
            .with_note(format!("{} steps, stop: {:?}", out.state.step_count, out.reason)),
    );
    Ok(report)
}

/// Volume floor used for the ball-extinction bracket: small enough that the
/// remaining time at the floor is far below `1e-4`.
pub fn extinction_floor(n: usize) -> f64 {
    if n == 2 {
        1e-6
    } else {
        1e-9
    }
}

/// Halting time of the shrinking unit ball and its exact extinction time.
pub fn shrinking_ball_halt(n: usize, p: f64) -> Result<(f64, f64)> {
    let res: &[usize] = if n == 2 { &[64] } else { &[16, 32] };
    let body = body_on(&BodySpec::Ball { radius: 1.0 }, n, res)?;
    let cfg = FlowConfig::new(p, FlowDirection::ShrinkingPrimal).with_v_stop(extinction_floor(n) * body.volume());
    let out = integrate(FlowState::new(body, cfg.direction)?, &cfg, &[], |_, _| Ok(()))?;
    if out.reason != StopReason::Extinction {
        return Err(Error::Domain(format!("shrinking ball stopped with {:?}", out.reason)));
    }
    Ok((out.state.t, ball_extinction_time(1.0, p)))
}

/// Oscillation and gradient bounds on every shipped expanding body while
/// `s_min` grows tenfold; the translated ball's oscillation must not move.
pub fn gradient_bound(opts: &VerifyOptions) -> Result<Report> {
    let n = opts.n;
    let p = opts.p_or(0.5);
    let res = opts.res_or(&[256], &[64, 128]);
    let mut report = Report::new(&format!("gradient-bound n={n} p={p} resolution={res:?}"));
    for spec in BodySpec::shipped(n) {
        let body = body_on(&spec, n, &res)?;
        // s_min grows tenfold once the inscribed ball about the origin has
        let r_target = 10.0 * body.s_min();
        let t_end = if (p - 1.0).abs() < 1e-12 {
            r_target.ln() - body.s_min().ln()
        } else {
            (r_target.powf(1.0 - p) - body.s_min().powf(1.0 - p)) / (1.0 - p)
        };
        let cfg = FlowConfig::new(p, FlowDirection::ExpandingPrimal).with_t_end(t_end * 1.02);
        let (records, _) = recorded_run(body, &cfg, &[], 1)?;
        for c in check_gradient_bound(&records, 0.05, Some(10.0))?.checks {
            report.push(Check { name: format!("{spec}: {}", c.name), ..c });
        }
        if let BodySpec::TranslatedBall { .. } = spec {
            report.push(Check::at_most(&format!("{spec}: osc variation"), osc_variation(&records)?, 1e-8));
        }
    }
    Ok(report)
}

/// The ball's `sup_t t κ(t)` reproduced by a run that lands on the
/// maximiser, plus the curvature band along the ellipse run.
pub fn curvature(opts: &VerifyOptions) -> Result<Report> {
    let n = opts.n;
    let p = opts.p_or(0.5);
    let res = opts.res_or(&[256], &[32, 64]);
    let mut report = Report::new(&format!("curvature n={n} p={p} resolution={res:?}"));
    let (measured, oracle) = ball_t_kappa_sup(n, p, &res)?;
    report.push(
        Check::at_most("ball sup t*kappa vs closed form", (measured - oracle).abs(), 1e-6)
            .with_note(format!("measured {measured:.12}, closed form {oracle:.12}")),
    );
    let records = convergence_records(n, p, &res)?;
    report.merge(check_curvature_bounds(&records, p, CurvatureBand::regression(n, p))?);
    Ok(report)
}

/// `(measured, closed form)` for `sup_t t κ(t)` of the expanding unit ball.
///
/// With `R(t) = (1 + (1−p)t)^{1/(1−p)}` the maximiser of `t / R(t)` is
/// `t* = 1/p` when `p < 1`.
pub fn ball_t_kappa_sup(n: usize, p: f64, res: &[usize]) -> Result<(f64, f64)> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("ball t*kappa maximum needs 0 < p < 1, got {p}")));
    }
    let t_star = 1.0 / p;
    let oracle = t_star / ball_radius_expanding(1.0, p, t_star);
    let body = body_on(&BodySpec::Ball { radius: 1.0 }, n, res)?;
    let cfg = FlowConfig::new(p, FlowDirection::ExpandingPrimal).with_t_end(2.0 * t_star);
    let (records, _) = recorded_run(body, &cfg, &[t_star], 1)?;
    let measured = records.iter().map(|r| r.t * r.kappa_max).fold(0.0, f64::max);
    Ok((measured, oracle))
}

/// Ellipse support used by examples: semi-axes `(a, b)` in the plane.
pub fn ellipse(a: f64, b: f64, res: usize) -> Result<ConvexBody> {
    ConvexBody::from_fn(build_grid(2, &[res])?, move |z| ellipsoid_support(&[a, b], z))
}
