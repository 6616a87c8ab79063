//! Time evolution of support, dual-support and radial functions under the
//! expanding and shrinking anisotropic Gauss curvature flows.
//!
//! All four directions share one explicit RK4 integrator. The step size is
//! `dt = c_safe · h_min² / D_max`, where `D = β |rhs| / λ_min` is the largest
//! eigenvalue of the linearised diffusion tensor at a node and `β = p/(n−1)`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::anisotropy::AnisotropyPhi;
use crate::convex::{radii_from, unit_ball_volume, ConvexBody};
use crate::duality::polar_dual;
use crate::error::{Error, Result};
use crate::sphere::{axpy, dot, scale, ScalarField, SphereGrid};

/// Maximum number of step halvings before giving up.
pub const MAX_HALVINGS: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlowDirection {
    /// `∂ₜs = Φ(z) S^β` on the support function.
    ExpandingPrimal,
    /// The same motion written for the polar dual's support function.
    ExpandingDual,
    /// The same motion written for the radial function.
    ExpandingRadial,
    /// `∂ₜs = −Φ(z) S^{−β}`.
    ShrinkingPrimal,
}

impl FlowDirection {
    pub fn is_expanding(self) -> bool {
        !matches!(self, FlowDirection::ShrinkingPrimal)
    }

    /// True when the integrated variable parametrises the polar dual.
    pub fn carries_dual(self) -> bool {
        matches!(self, FlowDirection::ExpandingDual | FlowDirection::ExpandingRadial)
    }

    pub fn name(self) -> &'static str {
        match self {
            FlowDirection::ExpandingPrimal => "expanding_primal",
            FlowDirection::ExpandingDual => "expanding_dual",
            FlowDirection::ExpandingRadial => "expanding_radial",
            FlowDirection::ShrinkingPrimal => "shrinking_primal",
        }
    }
}

impl fmt::Display for FlowDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FlowDirection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "expanding_primal" => Ok(FlowDirection::ExpandingPrimal),
            "expanding_dual" => Ok(FlowDirection::ExpandingDual),
            "expanding_radial" => Ok(FlowDirection::ExpandingRadial),
            "shrinking_primal" => Ok(FlowDirection::ShrinkingPrimal),
            other => Err(Error::Config(format!("unknown flow direction '{other}'"))),
        }
    }
}

/// Parameters of one integration.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowConfig {
    pub p: f64,
    pub direction: FlowDirection,
    pub phi: AnisotropyPhi,
    /// Final time; `None` leaves the run to the other stop rules.
    pub t_end: Option<f64>,
    /// Stop once the primal volume has grown by this factor.
    pub volume_growth: Option<f64>,
    /// Volume floor; required for shrinking runs.
    pub v_stop: Option<f64>,
    pub dt_safety: f64,
    /// Hard cap on accepted steps.
    pub max_steps: usize,
}

impl FlowConfig {
    pub fn new(p: f64, direction: FlowDirection) -> Self {
        FlowConfig {
            p,
            direction,
            phi: AnisotropyPhi::isotropic(),
            t_end: None,
            volume_growth: None,
            v_stop: None,
            dt_safety: 0.2,
            max_steps: 10_000_000,
        }
    }

    pub fn with_t_end(mut self, t_end: f64) -> Self {
        self.t_end = Some(t_end);
        self
    }

    pub fn with_phi(mut self, phi: AnisotropyPhi) -> Self {
        self.phi = phi;
        self
    }

    pub fn with_volume_growth(mut self, factor: f64) -> Self {
        self.volume_growth = Some(factor);
        self
    }

    pub fn with_v_stop(mut self, v_stop: f64) -> Self {
        self.v_stop = Some(v_stop);
        self
    }

    /// True for expanding runs with `p ≥ 1`, which the theory does not cover.
    pub fn outside_theory(&self) -> bool {
        self.direction.is_expanding() && self.p >= 1.0
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if !(self.p > 0.0 && self.p.is_finite()) {
            return Err(Error::Config(format!("p must be positive, got {}", self.p)));
        }
        if !(self.dt_safety > 0.0 && self.dt_safety <= 1.0) {
            return Err(Error::Config(format!("dt_safety must lie in (0, 1], got {}", self.dt_safety)));
        }
        if let Some(t) = self.t_end {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::Config(format!("t_end must be positive, got {t}")));
            }
        }
        if let Some(g) = self.volume_growth {
            if !(g > 1.0) || !self.direction.is_expanding() {
                return Err(Error::Config(format!(
                    "volume_growth must exceed 1 on an expanding run, got {g}"
                )));
            }
        }
        match self.direction {
            FlowDirection::ShrinkingPrimal => match self.v_stop {
                Some(v) if v > 0.0 => {}
                _ => return Err(Error::Config("shrinking runs need a positive v_stop".into())),
            },
            _ => {
                if self.t_end.is_none() && self.volume_growth.is_none() {
                    return Err(Error::Config("expanding runs need t_end or volume_growth".into()));
                }
            }
        }
        self.phi.validate(n)
    }
}

/// Integrator state.
///
/// `variable` is the integrated field: `s` for primal runs, `s°` for dual
/// runs and `r` for radial runs. `body` is the convex body that `variable`
/// describes directly, which is the polar dual for dual and radial runs.
#[derive(Clone, Debug)]
pub struct FlowState {
    pub t: f64,
    pub direction: FlowDirection,
    pub variable: ScalarField,
    pub body: ConvexBody,
    pub dt_last: f64,
    pub step_count: usize,
}

impl FlowState {
    /// Wraps a primal body for the requested direction, dualising if needed.
    pub fn new(primal: ConvexBody, direction: FlowDirection) -> Result<Self> {
        let (variable, body) = match direction {
            FlowDirection::ExpandingPrimal | FlowDirection::ShrinkingPrimal => {
                (primal.support().clone(), primal)
            }
            FlowDirection::ExpandingDual => {
                let dual = polar_dual(&primal)?;
                (dual.support().clone(), dual)
            }
            FlowDirection::ExpandingRadial => {
                let dual = polar_dual(&primal)?;
                (dual.support().map(|v| 1.0 / v)?, dual)
            }
        };
        Ok(FlowState {
            t: 0.0,
            direction,
            variable,
            body,
            dt_last: 0.0,
            step_count: 0,
        })
    }

    /// Starts a dual run directly from a dual body, with no reconstruction.
    pub fn from_dual(dual: ConvexBody) -> Self {
        FlowState {
            t: 0.0,
            direction: FlowDirection::ExpandingDual,
            variable: dual.support().clone(),
            body: dual,
            dt_last: 0.0,
            step_count: 0,
        }
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        self.variable.grid()
    }

    /// The primal body; reconstructs it through polar duality for dual and
    /// radial runs.
    pub fn primal_body(&self) -> Result<ConvexBody> {
        if self.direction.carries_dual() {
            polar_dual(&self.body)
        } else {
            Ok(self.body.clone())
        }
    }

    /// Primal volume. Dual runs use `V = (1/n)∫ r^n` with `r = 1/s°`.
    pub fn volume(&self) -> f64 {
        if self.direction.carries_dual() {
            let n = self.grid().ambient_dim() as i32;
            let rn: Vec<f64> = self.body.support().values().iter().map(|v| v.powi(-n)).collect();
            self.grid().integrate(&rn) / n as f64
        } else {
            self.body.volume()
        }
    }
}

/// Right-hand side together with the diffusion estimate `D_max`.
#[derive(Clone, Debug)]
pub struct Tendency {
    pub rhs: Vec<f64>,
    pub d_max: f64,
}

fn beta(grid: &SphereGrid, p: f64) -> f64 {
    p / (grid.ambient_dim() - 1) as f64
}

fn check_positive(values: &[f64], what: &str) -> Result<()> {
    if let Some(k) = values.iter().position(|v| !(*v > 0.0)) {
        return Err(Error::Domain(format!("{what} must be positive; got {} at node {k}", values[k])));
    }
    Ok(())
}

fn primal_tendency(
    grid: &SphereGrid,
    s: &[f64],
    phi: &AnisotropyPhi,
    p: f64,
    sign: f64,
) -> Result<Tendency> {
    check_positive(s, "support function")?;
    let d = grid.derivatives(s);
    let radii = radii_from(grid, s, &d);
    radii.check_strict_convexity()?;
    let b = beta(grid, p);
    let mut rhs = Vec::with_capacity(s.len());
    let mut d_max: f64 = 0.0;
    for (k, z) in grid.nodes().iter().enumerate() {
        let v = sign * phi.eval(z) * radii.s_det()[k].powf(sign * b);
        d_max = d_max.max(b * v.abs() / radii.lambda_min(k));
        rhs.push(v);
    }
    Ok(Tendency { rhs, d_max })
}

fn dual_tendency(grid: &SphereGrid, sd: &[f64], phi: &AnisotropyPhi, p: f64) -> Result<Tendency> {
    check_positive(sd, "dual support function")?;
    let d = grid.derivatives(sd);
    let radii = radii_from(grid, sd, &d);
    radii.check_strict_convexity()?;
    let grad = grid.lifted_gradient_from(&d);
    let n = grid.ambient_dim() as f64;
    let b = beta(grid, p);
    let qa = (n + 1.0) * p / (2.0 * (n - 1.0)) + 0.5;
    let sb = (n + 1.0) * p / (n - 1.0) - 1.0;
    let mut rhs = Vec::with_capacity(sd.len());
    let mut d_max: f64 = 0.0;
    for (k, z) in grid.nodes().iter().enumerate() {
        let x = axpy(sd[k], z, &grad[k]);
        let q = dot(&x, &x);
        let dir = scale(1.0 / q.sqrt(), &x);
        let v = -phi.eval(&dir) * q.powf(qa) / sd[k].powf(sb) * radii.s_det()[k].powf(-b);
        d_max = d_max.max(b * v.abs() / radii.lambda_min(k));
        rhs.push(v);
    }
    Ok(Tendency { rhs, d_max })
}

fn radial_tendency(grid: &SphereGrid, r: &[f64], phi: &AnisotropyPhi, p: f64) -> Result<Tendency> {
    check_positive(r, "radial function")?;
    let sd: Vec<f64> = r.iter().map(|v| 1.0 / v).collect();
    let mut t = dual_tendency(grid, &sd, phi, p)?;
    for (v, rk) in t.rhs.iter_mut().zip(r) {
        *v *= -rk * rk;
    }
    Ok(t)
}

/// Evaluates the tendency of `values` for the given direction.
pub fn tendency(
    direction: FlowDirection,
    grid: &SphereGrid,
    values: &[f64],
    phi: &AnisotropyPhi,
    p: f64,
) -> Result<Tendency> {
    match direction {
        FlowDirection::ExpandingPrimal => primal_tendency(grid, values, phi, p, 1.0),
        FlowDirection::ShrinkingPrimal => primal_tendency(grid, values, phi, p, -1.0),
        FlowDirection::ExpandingDual => dual_tendency(grid, values, phi, p),
        FlowDirection::ExpandingRadial => radial_tendency(grid, values, phi, p),
    }
}

fn as_field(grid: &Arc<SphereGrid>, t: Tendency) -> Result<ScalarField> {
    ScalarField::new(grid.clone(), t.rhs)
}

/// `Φ(z) S^β`.
pub fn rhs_expanding(s: &ScalarField, phi: &AnisotropyPhi, p: f64) -> Result<ScalarField> {
    as_field(s.grid(), primal_tendency(s.grid(), s.values(), phi, p, 1.0)?)
}

/// `−Φ(z) S^{−β}`.
pub fn rhs_shrinking(s: &ScalarField, phi: &AnisotropyPhi, p: f64) -> Result<ScalarField> {
    as_field(s.grid(), primal_tendency(s.grid(), s.values(), phi, p, -1.0)?)
}

/// Speed of the polar dual's support function under the expanding flow.
pub fn rhs_dual(s_dual: &ScalarField, phi: &AnisotropyPhi, p: f64) -> Result<ScalarField> {
    as_field(s_dual.grid(), dual_tendency(s_dual.grid(), s_dual.values(), phi, p)?)
}

/// Speed of the radial function, `−r² · rhs_dual(1/r)`.
pub fn rhs_radial(r: &ScalarField, phi: &AnisotropyPhi, p: f64) -> Result<ScalarField> {
    as_field(r.grid(), radial_tendency(r.grid(), r.values(), phi, p)?)
}

/// The explicit step size for a given diffusion estimate.
pub fn stable_dt(grid: &SphereGrid, d_max: f64, safety: f64) -> f64 {
    let h = grid.h_min();
    safety * h * h / d_max
}

fn evaluate(cfg: &FlowConfig, grid: &SphereGrid, values: &[f64]) -> Result<Tendency> {
    let mut t = tendency(cfg.direction, grid, values, &cfg.phi, cfg.p)?;
    if grid.ambient_dim() == 3 {
        grid.polar_filter(&mut t.rhs);
    }
    if t.rhs.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("non-finite tendency".into()));
    }
    Ok(t)
}

fn combine(base: &[f64], h: f64, k: &[f64]) -> Vec<f64> {
    base.iter().zip(k).map(|(b, k)| b + h * k).collect()
}

fn rk4_from(cfg: &FlowConfig, grid: &SphereGrid, y: &[f64], k1: &[f64], dt: f64) -> Result<Vec<f64>> {
    let k2 = evaluate(cfg, grid, &combine(y, 0.5 * dt, k1))?.rhs;
    let k3 = evaluate(cfg, grid, &combine(y, 0.5 * dt, &k2))?.rhs;
    let k4 = evaluate(cfg, grid, &combine(y, dt, &k3))?.rhs;
    let out: Vec<f64> = (0..y.len())
        .map(|i| y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect();
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("non-finite state".into()));
    }
    Ok(out)
}

fn carrier_body(direction: FlowDirection, variable: &ScalarField) -> Result<ConvexBody> {
    match direction {
        FlowDirection::ExpandingRadial => ConvexBody::new(variable.map(|v| 1.0 / v)?),
        _ => ConvexBody::new(variable.clone()),
    }
}

/// Advances by one accepted step of the stable size, never past `t_cap`.
pub fn step(state: &FlowState, cfg: &FlowConfig, t_cap: Option<f64>) -> Result<FlowState> {
    advance(state, cfg, t_cap, None)
}

/// One RK4 step of exactly `dt`, still subject to the rejection policy.
pub fn step_with_dt(state: &FlowState, cfg: &FlowConfig, dt: f64) -> Result<FlowState> {
    advance(state, cfg, Some(state.t + dt), Some(dt))
}

fn advance(
    state: &FlowState,
    cfg: &FlowConfig,
    t_cap: Option<f64>,
    fixed_dt: Option<f64>,
) -> Result<FlowState> {
    let grid = state.grid().clone();
    let y = state.variable.values();
    let k1 = evaluate(cfg, &grid, y)?;
    let mut dt = fixed_dt.unwrap_or_else(|| stable_dt(&grid, k1.d_max, cfg.dt_safety));
    let mut landed = false;
    if let Some(cap) = t_cap {
        let remaining = cap - state.t;
        if remaining <= dt {
            dt = remaining;
            landed = true;
        }
    }
    for attempt in 0..=MAX_HALVINGS {
        let trial = rk4_from(cfg, &grid, y, &k1.rhs, dt)
            .and_then(|v| ScalarField::new(grid.clone(), v))
            .and_then(|v| carrier_body(state.direction, &v).map(|b| (v, b)));
        match trial {
            Ok((variable, body)) => {
                let t = if landed && attempt == 0 { t_cap.unwrap_or(state.t + dt) } else { state.t + dt };
                return Ok(FlowState {
                    t,
                    direction: state.direction,
                    variable,
                    body,
                    dt_last: dt,
                    step_count: state.step_count + 1,
                });
            }
            Err(_) if attempt < MAX_HALVINGS => dt *= 0.5,
            Err(_) => break,
        }
    }
    Err(Error::StepRejected {
        t: state.t,
        dt,
        attempts: MAX_HALVINGS,
    })
}

/// Why a run stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    TimeReached,
    VolumeGrowthReached,
    /// Shrinking run fell below the volume floor.
    Extinction,
    MaxSteps,
}

/// The final state of a run and the rule that ended it.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub state: FlowState,
    pub reason: StopReason,
}

/// Integrates until a stop rule fires.
///
/// Steps are shortened to land exactly on each time in `checkpoints`
/// (ascending). `observer` sees the initial state and every accepted state
/// along with a flag telling whether that state sits on a checkpoint.
pub fn integrate(
    initial: FlowState,
    cfg: &FlowConfig,
    checkpoints: &[f64],
    mut observer: impl FnMut(&FlowState, bool) -> Result<()>,
) -> Result<RunOutcome> {
    cfg.validate(initial.grid().ambient_dim())?;
    if initial.direction != cfg.direction {
        return Err(Error::Config(format!(
            "state direction {} does not match config direction {}",
            initial.direction, cfg.direction
        )));
    }
    let v0 = initial.volume();
    let mut state = initial;
    let mut next_cp = checkpoints.iter().position(|&c| c > state.t).unwrap_or(checkpoints.len());
    observer(&state, checkpoints.contains(&state.t))?;
    loop {
        if let Some(t_end) = cfg.t_end {
            if state.t >= t_end {
                return Ok(RunOutcome { state, reason: StopReason::TimeReached });
            }
        }
        if state.step_count >= cfg.max_steps {
            return Ok(RunOutcome { state, reason: StopReason::MaxSteps });
        }
        let cp = checkpoints.get(next_cp).copied();
        let cap = match (cp, cfg.t_end) {
            (Some(c), Some(e)) => Some(c.min(e)),
            (c, e) => c.or(e),
        };
        state = step(&state, cfg, cap)?;
        let on_cp = cp == Some(state.t);
        if on_cp {
            next_cp += 1;
        }
        observer(&state, on_cp)?;
        let v = state.volume();
        if let Some(floor) = cfg.v_stop {
            if v < floor {
                return Ok(RunOutcome { state, reason: StopReason::Extinction });
            }
        }
        if let Some(g) = cfg.volume_growth {
            if v >= g * v0 {
                return Ok(RunOutcome { state, reason: StopReason::VolumeGrowthReached });
            }
        }
    }
}

/// `(ω_n / V)^{1/n} K`, the body rescaled to the unit ball's volume.
pub fn rescale_unit_volume(body: &ConvexBody) -> Result<ConvexBody> {
    let n = body.dim();
    body.scaled(unit_ball_volume_ratio(body.volume(), n))
}

/// `(ω_n / V)^{1/n}`.
pub fn unit_ball_volume_ratio(volume: f64, n: usize) -> f64 {
    (unit_ball_volume(n) / volume).powf(1.0 / n as f64)
}

/// Exact radius of a ball under the expanding flow with `Φ ≡ 1`.
pub fn ball_radius_expanding(r0: f64, p: f64, t: f64) -> f64 {
    if (p - 1.0).abs() < 1e-14 {
        r0 * t.exp()
    } else {
        (r0.powf(1.0 - p) + (1.0 - p) * t).powf(1.0 / (1.0 - p))
    }
}

/// Exact radius of a ball under the shrinking flow with `Φ ≡ 1`; zero after
/// extinction.
pub fn ball_radius_shrinking(r0: f64, p: f64, t: f64) -> f64 {
    let base = r0.powf(1.0 + p) - (1.0 + p) * t;
    if base <= 0.0 {
        0.0
    } else {
        base.powf(1.0 / (1.0 + p))
    }
}

/// Extinction time of a ball of radius `r0` under the shrinking flow.
pub fn ball_extinction_time(r0: f64, p: f64) -> f64 {
    r0.powf(1.0 + p) / (1.0 + p)
}

fn run_to_checkpoints(
    body: ConvexBody,
    cfg: &FlowConfig,
    times: &[f64],
) -> Result<Vec<FlowState>> {
    let mut cfg = cfg.clone();
    cfg.t_end = times.last().copied();
    cfg.volume_growth = None;
    let mut saved = Vec::with_capacity(times.len());
    integrate(FlowState::new(body, cfg.direction)?, &cfg, times, |s, on_cp| {
        if on_cp {
            saved.push(s.clone());
        }
        Ok(())
    })?;
    Ok(saved)
}

/// Compares the run from `a^{1/n}K` with the rescaled run from `K` at each
/// checkpoint: `s_a(t) = a^{1/n} s(a^{(p−1)/n} t)`. Returns the sup defect
/// divided by the sup of `s_a`.
pub fn verify_rescaling_property(
    cfg: &FlowConfig,
    body: &ConvexBody,
    a: f64,
    checkpoints: &[f64],
) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::Domain(format!("rescaling factor must be positive, got {a}")));
    }
    if !cfg.direction.is_expanding() || cfg.direction.carries_dual() {
        return Err(Error::Config("rescaling check runs on the expanding primal flow".into()));
    }
    let n = body.dim() as f64;
    let lam = a.powf(1.0 / n);
    let mu = a.powf((cfg.p - 1.0) / n);
    let base_times: Vec<f64> = checkpoints.iter().map(|t| mu * t).collect();
    let base = run_to_checkpoints(body.clone(), cfg, &base_times)?;
    let scaled = run_to_checkpoints(body.scaled(lam)?, cfg, checkpoints)?;
    let mut defect: f64 = 0.0;
    for (b, s) in base.iter().zip(&scaled) {
        let sup = s.variable.max();
        let d = b
            .variable
            .values()
            .iter()
            .zip(s.variable.values())
            .map(|(x, y)| (lam * x - y).abs())
            .fold(0.0, f64::max);
        defect = defect.max(d / sup);
    }
    Ok(defect)
}

/// Runs the primal flow and an independent dual-flow integration started
/// from `K°`, then compares `polar_dual(K_t)` with the dual state at every
/// checkpoint. Returns the sup-norm defect.
pub fn cross_check_dual(cfg: &FlowConfig, body: &ConvexBody, checkpoints: &[f64]) -> Result<f64> {
    let mut primal_cfg = cfg.clone();
    primal_cfg.direction = FlowDirection::ExpandingPrimal;
    let mut dual_cfg = cfg.clone();
    dual_cfg.direction = FlowDirection::ExpandingDual;
    let primal = run_to_checkpoints(body.clone(), &primal_cfg, checkpoints)?;
    let dual = run_to_checkpoints(body.clone(), &dual_cfg, checkpoints)?;
    let mut defect: f64 = 0.0;
    for (a, b) in primal.iter().zip(&dual) {
        let dualised = polar_dual(&a.body)?;
        defect = defect.max(dualised.support().sup_distance(&b.variable));
    }
    Ok(defect)
}
