//! Line-oriented run configuration and initial-body construction.
//!
//! ```text
//! # expanding ellipse
//! n = 2
//! resolution = 256          # N, or N_theta x N_phi on the sphere
//! p = 0.5
//! direction = expanding_primal
//! phi = constant 1
//! body = ellipsoid 1 1.5
//! volume_growth = 1e4
//! csv_every = 10            # accepted steps between trajectory rows
//! snapshot_every = 0        # 0 keeps only the first and last snapshot
//! ```

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use crate::anisotropy::AnisotropyPhi;
use crate::convex::{ellipsoid_support, ConvexBody};
use crate::error::{Error, Result};
use crate::flow::{FlowConfig, FlowDirection};
use crate::sphere::{build_grid, dot, norm, SphereGrid, Vec3};

/// One term `amp · Y_l^m` of a harmonic perturbation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HarmonicMode {
    pub l: usize,
    pub m: i64,
    pub amp: f64,
}

/// Initial body families.
#[derive(Clone, Debug, PartialEq)]
pub enum BodySpec {
    Ball { radius: f64 },
    TranslatedBall { radius: f64, offset: Vec3 },
    Ellipsoid { axes: Vec<f64> },
    Harmonic { radius: f64, modes: Vec<HarmonicMode> },
}

impl BodySpec {
    /// Support function of the body at a unit vector in R^n.
    pub fn support(&self, n: usize, z: &Vec3) -> f64 {
        match self {
            BodySpec::Ball { radius } => *radius,
            BodySpec::TranslatedBall { radius, offset } => radius + dot(offset, z),
            BodySpec::Ellipsoid { axes } => ellipsoid_support(axes, z),
            BodySpec::Harmonic { radius, modes } => {
                radius + modes.iter().map(|m| m.amp * real_harmonic(n, m.l, m.m, z)).sum::<f64>()
            }
        }
    }

    /// Samples the support function and validates strict convexity.
    pub fn build(&self, grid: Arc<SphereGrid>) -> Result<ConvexBody> {
        let n = grid.ambient_dim();
        self.validate(n)?;
        ConvexBody::from_fn(grid, |z| self.support(n, z))
            .map_err(|e| Error::Config(format!("initial body '{self}' is invalid: {e}")))
    }

    fn validate(&self, n: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        match self {
            BodySpec::Ball { radius } | BodySpec::Harmonic { radius, .. } if !(*radius > 0.0) => {
                bad(format!("radius must be positive in '{self}'"))
            }
            BodySpec::TranslatedBall { radius, offset } => {
                if !(*radius > 0.0) || (n == 2 && offset[2] != 0.0) {
                    bad(format!("invalid translated ball '{self}'"))
                } else if norm(offset) >= *radius {
                    bad(format!("translated ball '{self}' does not contain the origin"))
                } else {
                    Ok(())
                }
            }
            BodySpec::Ellipsoid { axes } if axes.len() != n || axes.iter().any(|a| !(*a > 0.0)) => {
                bad(format!("ellipsoid needs {n} positive semi-axes, got '{self}'"))
            }
            BodySpec::Harmonic { modes, .. } => {
                for m in modes {
                    let ok = if n == 2 { m.m.unsigned_abs() as usize == m.l || (m.m == 0 && m.l == 0) } else { m.m.unsigned_abs() as usize <= m.l };
                    if !ok || !m.amp.is_finite() {
                        return bad(format!("invalid harmonic mode l={} m={} in dimension {n}", m.l, m.m));
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// The expanding test bodies used by the property checks.
    pub fn shipped(n: usize) -> Vec<BodySpec> {
        let mut out = vec![
            BodySpec::Ball { radius: 1.0 },
            BodySpec::TranslatedBall {
                radius: 1.0,
                offset: [0.3, 0.0, 0.0],
            },
        ];
        if n == 2 {
            out.push(BodySpec::Ellipsoid { axes: vec![1.0, 1.5] });
            out.push(BodySpec::Ellipsoid { axes: vec![1.0, 2.0] });
            out.push(BodySpec::Harmonic {
                radius: 1.0,
                modes: vec![HarmonicMode { l: 2, m: 2, amp: 0.1 }, HarmonicMode { l: 3, m: -3, amp: 0.03 }],
            });
        } else {
            out.push(BodySpec::Ellipsoid { axes: vec![1.0, 1.2, 1.5] });
            out.push(BodySpec::Harmonic {
                radius: 1.0,
                modes: vec![HarmonicMode { l: 2, m: 0, amp: 0.05 }, HarmonicMode { l: 3, m: 2, amp: 0.02 }],
            });
        }
        out
    }
}

impl fmt::Display for BodySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BodySpec::Ball { radius } => write!(f, "ball {radius}"),
            BodySpec::TranslatedBall { radius, offset } => {
                write!(f, "translated_ball {radius} {} {} {}", offset[0], offset[1], offset[2])
            }
            BodySpec::Ellipsoid { axes } => {
                write!(f, "ellipsoid")?;
                for a in axes {
                    write!(f, " {a}")?;
                }
                Ok(())
            }
            BodySpec::Harmonic { radius, modes } => {
                write!(f, "harmonic {radius}")?;
                for m in modes {
                    write!(f, " {}:{}:{}", m.l, m.m, m.amp)?;
                }
                Ok(())
            }
        }
    }
}

/// Real harmonic of degree `l` and order `m`.
///
/// On the circle this is `cos(lθ)` for `m ≥ 0` and `sin(lθ)` for `m < 0`. On
/// the sphere it is the orthonormal real spherical harmonic built from the
/// associated Legendre function without the Condon–Shortley phase.
pub fn real_harmonic(n: usize, l: usize, m: i64, z: &Vec3) -> f64 {
    let phi = z[1].atan2(z[0]);
    if n == 2 {
        let lf = l as f64;
        return if m >= 0 { (lf * phi).cos() } else { (lf * phi).sin() };
    }
    let am = m.unsigned_abs() as usize;
    let x = z[2].clamp(-1.0, 1.0);
    let plm = assoc_legendre(l, am, x);
    let mut ratio = 1.0; // (l-m)!/(l+m)!
    for k in (l - am + 1)..=(l + am) {
        ratio /= k as f64;
    }
    let norm = ((2 * l + 1) as f64 / (4.0 * PI) * ratio).sqrt();
    match m {
        0 => norm * plm,
        m if m > 0 => 2f64.sqrt() * norm * plm * (am as f64 * phi).cos(),
        _ => 2f64.sqrt() * norm * plm * (am as f64 * phi).sin(),
    }
}

fn assoc_legendre(l: usize, m: usize, x: f64) -> f64 {
    let mut pmm = 1.0;
    let s = (1.0 - x * x).max(0.0).sqrt();
    for k in 0..m {
        pmm *= (2 * k + 1) as f64 * s;
    }
    if l == m {
        return pmm;
    }
    let mut pm1 = x * (2 * m + 1) as f64 * pmm;
    let mut pm0 = pmm;
    for ll in (m + 2)..=l {
        let next = ((2 * ll - 1) as f64 * x * pm1 - (ll + m - 1) as f64 * pm0) / (ll - m) as f64;
        pm0 = pm1;
        pm1 = next;
    }
    pm1
}

/// Everything needed to perform and record one run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub n: usize,
    pub resolution: Vec<usize>,
    pub flow: FlowConfig,
    pub body: BodySpec,
    /// Volume floor as a fraction of the initial volume; converted to an
    /// absolute floor once the body is built.
    pub v_stop_fraction: Option<f64>,
    pub csv_every: usize,
    pub snapshot_every: usize,
    pub seed: u64,
}

impl RunConfig {
    pub fn grid(&self) -> Result<Arc<SphereGrid>> {
        build_grid(self.n, &self.resolution).map_err(|e| Error::Config(e.to_string()))
    }

    /// Builds the initial body and the flow config with the absolute volume
    /// floor filled in.
    pub fn prepare(&self) -> Result<(ConvexBody, FlowConfig)> {
        let body = self.body.build(self.grid()?)?;
        let mut flow = self.flow.clone();
        if let Some(f) = self.v_stop_fraction {
            flow.v_stop = Some(f * body.volume());
        }
        flow.validate(self.n)?;
        Ok((body, flow))
    }

    /// Normalised `key = value` text, parseable by [`RunConfig::parse`].
    pub fn to_text(&self) -> String {
        let mut lines = vec![
            format!("n = {}", self.n),
            format!("resolution = {}", self.resolution.iter().map(|c| c.to_string()).collect::<Vec<_>>().join("x")),
            format!("p = {}", self.flow.p),
            format!("direction = {}", self.flow.direction),
            format!("phi = {}", self.flow.phi),
            format!("body = {}", self.body),
            format!("dt_safety = {}", self.flow.dt_safety),
        ];
        if let Some(t) = self.flow.t_end {
            lines.push(format!("t_end = {t}"));
        }
        if let Some(g) = self.flow.volume_growth {
            lines.push(format!("volume_growth = {g}"));
        }
        if let Some(v) = self.flow.v_stop {
            lines.push(format!("v_stop = {v}"));
        }
        if let Some(v) = self.v_stop_fraction {
            lines.push(format!("v_stop_fraction = {v}"));
        }
        lines.push(format!("max_steps = {}", self.flow.max_steps));
        lines.push(format!("csv_every = {}", self.csv_every));
        lines.push(format!("snapshot_every = {}", self.snapshot_every));
        lines.push(format!("seed = {}", self.seed));
        lines.join("\n") + "\n"
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Parses and validates, including construction of the initial body.
    pub fn parse(text: &str) -> Result<Self> {
        let mut n = None;
        let mut resolution = None;
        let mut p = None;
        let mut direction = FlowDirection::ExpandingPrimal;
        let mut phi_text = None;
        let mut body = None;
        let mut t_end = None;
        let mut volume_growth = None;
        let mut v_stop = None;
        let mut v_stop_fraction = None;
        let mut dt_safety = 0.2;
        let mut max_steps = None;
        let mut csv_every = 1;
        let mut snapshot_every = 0;
        let mut seed = 0;

        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value'", i + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            let at = |e: Error| Error::Config(format!("line {} ({key}): {e}", i + 1));
            match key {
                "n" => n = Some(parse_num::<usize>(value).map_err(at)?),
                "resolution" => resolution = Some(parse_resolution(value).map_err(at)?),
                "p" => p = Some(parse_num::<f64>(value).map_err(at)?),
                "direction" => direction = value.parse().map_err(at)?,
                "phi" => phi_text = Some(value.to_string()),
                "body" => body = Some(parse_body(value).map_err(at)?),
                "t_end" => t_end = Some(parse_num::<f64>(value).map_err(at)?),
                "volume_growth" => volume_growth = Some(parse_num::<f64>(value).map_err(at)?),
                "v_stop" => v_stop = Some(parse_num::<f64>(value).map_err(at)?),
                "v_stop_fraction" => v_stop_fraction = Some(parse_num::<f64>(value).map_err(at)?),
                "dt_safety" => dt_safety = parse_num::<f64>(value).map_err(at)?,
                "max_steps" => max_steps = Some(parse_num::<usize>(value).map_err(at)?),
                "csv_every" => csv_every = parse_num::<usize>(value).map_err(at)?,
                "snapshot_every" => snapshot_every = parse_num::<usize>(value).map_err(at)?,
                "seed" => seed = parse_num::<u64>(value).map_err(at)?,
                other => return Err(Error::Config(format!("line {}: unknown key '{other}'", i + 1))),
            }
        }

        let n = n.ok_or_else(|| Error::Config("missing key 'n'".into()))?;
        if n != 2 && n != 3 {
            return Err(Error::Config(format!("n must be 2 or 3, got {n}")));
        }
        let resolution = resolution.ok_or_else(|| Error::Config("missing key 'resolution'".into()))?;
        if resolution.len() != n - 1 {
            return Err(Error::Config(format!("resolution needs {} counts for n = {n}", n - 1)));
        }
        let p = p.ok_or_else(|| Error::Config("missing key 'p'".into()))?;
        let body = body.ok_or_else(|| Error::Config("missing key 'body'".into()))?;
        let phi = match phi_text {
            Some(t) => parse_phi(&t, n)?,
            None => AnisotropyPhi::isotropic(),
        };
        if csv_every == 0 {
            return Err(Error::Config("csv_every must be at least 1".into()));
        }
        let mut flow = FlowConfig::new(p, direction).with_phi(phi);
        flow.t_end = t_end;
        flow.volume_growth = volume_growth;
        flow.v_stop = v_stop;
        flow.dt_safety = dt_safety;
        if let Some(m) = max_steps {
            flow.max_steps = m;
        }
        let cfg = RunConfig {
            n,
            resolution,
            flow,
            body,
            v_stop_fraction,
            csv_every,
            snapshot_every,
            seed,
        };
        cfg.prepare()?;
        Ok(cfg)
    }
}

fn parse_num<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.trim().parse().map_err(|_| Error::Config(format!("cannot parse '{s}'")))
}

fn parse_resolution(s: &str) -> Result<Vec<usize>> {
    s.split(['x', 'X', ','])
        .map(parse_num::<usize>)
        .collect()
}

/// `ball R`, `translated_ball R v1 v2 [v3]`, `ellipsoid a1 .. an`,
/// `harmonic R l:m:amp ...`.
pub fn parse_body(s: &str) -> Result<BodySpec> {
    let mut it = s.split_whitespace();
    let tag = it.next().ok_or_else(|| Error::Config("empty body spec".into()))?;
    let rest: Vec<&str> = it.collect();
    let nums = || rest.iter().map(|t| parse_num::<f64>(t)).collect::<Result<Vec<f64>>>();
    match tag {
        "ball" => match nums()?.as_slice() {
            [r] => Ok(BodySpec::Ball { radius: *r }),
            _ => Err(Error::Config("ball takes one radius".into())),
        },
        "translated_ball" => {
            let v = nums()?;
            if !(3..=4).contains(&v.len()) {
                return Err(Error::Config("translated_ball takes R and a 2- or 3-vector".into()));
            }
            let mut offset = [0.0; 3];
            offset[..v.len() - 1].copy_from_slice(&v[1..]);
            Ok(BodySpec::TranslatedBall { radius: v[0], offset })
        }
        "ellipsoid" => Ok(BodySpec::Ellipsoid { axes: nums()? }),
        "harmonic" => {
            let radius = parse_num::<f64>(rest.first().ok_or_else(|| Error::Config("harmonic needs a base radius".into()))?)?;
            let modes = rest[1..]
                .iter()
                .map(|t| {
                    let parts: Vec<&str> = t.split(':').collect();
                    match parts.as_slice() {
                        [l, amp] => {
                            let l = parse_num::<usize>(l)?;
                            Ok(HarmonicMode { l, m: l as i64, amp: parse_num(amp)? })
                        }
                        [l, m, amp] => Ok(HarmonicMode {
                            l: parse_num(l)?,
                            m: parse_num(m)?,
                            amp: parse_num(amp)?,
                        }),
                        _ => Err(Error::Config(format!("bad harmonic mode '{t}', expected l:m:amp"))),
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(BodySpec::Harmonic { radius, modes })
        }
        other => Err(Error::Config(format!("unknown body family '{other}'"))),
    }
}

/// `constant c`, `dipole eps v1 v2 [v3]`, `quadrupole eps axis` with a
/// 1-based axis.
pub fn parse_phi(s: &str, n: usize) -> Result<AnisotropyPhi> {
    let mut it = s.split_whitespace();
    let tag = it.next().unwrap_or("");
    let nums = it.map(parse_num::<f64>).collect::<Result<Vec<f64>>>()?;
    let phi = match (tag, nums.as_slice()) {
        ("constant", [c]) => AnisotropyPhi::Constant(*c),
        ("dipole", [eps, v @ ..]) if v.len() == 2 || v.len() == 3 => {
            let mut vv = [0.0; 3];
            vv[..v.len()].copy_from_slice(v);
            AnisotropyPhi::Dipole { eps: *eps, v: vv }
        }
        ("quadrupole", [eps, axis]) if *axis >= 1.0 && axis.fract() == 0.0 => AnisotropyPhi::Quadrupole {
            eps: *eps,
            axis: *axis as usize - 1,
            n,
        },
        _ => return Err(Error::Config(format!("cannot parse anisotropy '{s}'"))),
    };
    phi.validate(n)?;
    Ok(phi)
}

#[cfg(test)]
mod tests {
    use super::*;

    const ELLIPSE: &str = "n = 2\nresolution = 128\np = 0.5\nbody = ellipsoid 1 1.5  # semi-axes\nt_end = 1\n";

    #[test]
    fn parse_and_echo() {
        let cfg = RunConfig::parse(ELLIPSE).unwrap();
        assert_eq!(cfg.resolution, vec![128]);
        assert_eq!(cfg.body, BodySpec::Ellipsoid { axes: vec![1.0, 1.5] });
        assert_eq!(RunConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn rejects_bad_configs() {
        for bad in [
            "n = 2\nresolution = 128\np = 0.5\nbody = ellipsoid 1\nt_end = 1\n",
            "n = 2\nresolution = 128\np = 0.5\nbody = translated_ball 1 1.2 0\nt_end = 1\n",
            "n = 2\nresolution = 128\np = 0.5\nbody = harmonic 1 2:2:0.5\nt_end = 1\n",
            "n = 2\nresolution = 128\np = 0.5\nbody = ball 1\n",
            "n = 2\nresolution = 12\np = 0.5\nbody = ball 1\nt_end = 1\n",
            "n = 2\nresolution = 128\np = 0.5\nbody = ball 1\nt_end = 1\ncolour = red\n",
            "n = 2\nresolution = 128\np = 0.5\nbody = ball 1\nt_end = 1\nphi = dipole 2 1 0\n",
            "n = 2\nresolution = 128\np = 0.5\nbody = ball 1\nshrink",
            "n = 3\nresolution = 32x64\np = 0.5\nbody = ball 1\ndirection = shrinking_primal\n",
        ] {
            assert!(matches!(RunConfig::parse(bad), Err(Error::Config(_))), "{bad}");
        }
    }

    #[test]
    fn real_harmonics_are_orthonormal_on_the_sphere() {
        let g = build_grid(3, &[64, 128]).unwrap();
        let modes = [(2usize, 0i64), (2, 1), (2, -2), (3, 2)];
        for (i, a) in modes.iter().enumerate() {
            for b in &modes[i..] {
                let v: Vec<f64> = g
                    .nodes()
                    .iter()
                    .map(|z| real_harmonic(3, a.0, a.1, z) * real_harmonic(3, b.0, b.1, z))
                    .collect();
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((g.integrate(&v) - expect).abs() < 2e-3, "{a:?} {b:?}");
            }
        }
        // Y_2^0 closed form
        let z = [0.6, 0.0, 0.8];
        let y20 = (5.0 / (16.0 * PI)).sqrt() * (3.0 * 0.64 - 1.0);
        assert!((real_harmonic(3, 2, 0, &z) - y20).abs() < 1e-14);
    }

    #[test]
    fn shipped_bodies_build() {
        for n in [2, 3] {
            let g = if n == 2 { build_grid(2, &[64]) } else { build_grid(3, &[16, 32]) }.unwrap();
            for b in BodySpec::shipped(n) {
                assert!(b.build(g.clone()).is_ok(), "{b}");
            }
        }
    }

    #[test]
    fn phi_parsing() {
        assert_eq!(parse_phi("quadrupole 0.3 3", 3).unwrap(), AnisotropyPhi::Quadrupole { eps: 0.3, axis: 2, n: 3 });
        assert!(parse_phi("quadrupole 0.3 3", 2).is_err());
        assert!(parse_phi("dipole 0.2 1 0", 2).is_ok());
    }
}
