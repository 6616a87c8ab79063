use std::fmt;

use crate::error::{Error, Result};
use crate::sphere::{dot, norm, Vec3};

/// Positive weight `Φ` on the sphere, kept in closed form so it can be
/// evaluated at any unit vector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AnisotropyPhi {
    /// `Φ ≡ c`.
    Constant(f64),
    /// `Φ(z) = 1 + ε⟨v, z⟩`.
    Dipole { eps: f64, v: Vec3 },
    /// `Φ(z) = 1 + ε(z_k² − 1/n)`, `k` is a 0-based axis index.
    Quadrupole { eps: f64, axis: usize, n: usize },
}

impl Default for AnisotropyPhi {
    fn default() -> Self {
        AnisotropyPhi::Constant(1.0)
    }
}

impl AnisotropyPhi {
    pub fn isotropic() -> Self {
        AnisotropyPhi::Constant(1.0)
    }

    pub fn eval(&self, z: &Vec3) -> f64 {
        match *self {
            AnisotropyPhi::Constant(c) => c,
            AnisotropyPhi::Dipole { eps, v } => 1.0 + eps * dot(&v, z),
            AnisotropyPhi::Quadrupole { eps, axis, n } => {
                1.0 + eps * (z[axis] * z[axis] - 1.0 / n as f64)
            }
        }
    }

    /// Exact infimum over S^{n-1}.
    pub fn infimum(&self) -> f64 {
        match *self {
            AnisotropyPhi::Constant(c) => c,
            AnisotropyPhi::Dipole { eps, v } => 1.0 - (eps * norm(&v)).abs(),
            AnisotropyPhi::Quadrupole { eps, n, .. } => {
                let nf = n as f64;
                if eps >= 0.0 {
                    1.0 - eps / nf
                } else {
                    1.0 + eps * (1.0 - 1.0 / nf)
                }
            }
        }
    }

    /// True when `Φ` is the constant 1.
    pub fn is_unit(&self) -> bool {
        matches!(*self, AnisotropyPhi::Constant(c) if c == 1.0)
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let params_ok = match *self {
            AnisotropyPhi::Constant(c) => c.is_finite(),
            AnisotropyPhi::Dipole { eps, v } => {
                eps.is_finite() && v.iter().all(|x| x.is_finite()) && (n == 3 || v[2] == 0.0)
            }
            AnisotropyPhi::Quadrupole { eps, axis, n: m } => eps.is_finite() && axis < n && m == n,
        };
        if !params_ok {
            return Err(Error::Config(format!("invalid anisotropy parameters {self} for n = {n}")));
        }
        if self.infimum() <= 0.0 {
            return Err(Error::Config(format!(
                "anisotropy {self} is not positive on the sphere (inf = {})",
                self.infimum()
            )));
        }
        Ok(())
    }
}

impl fmt::Display for AnisotropyPhi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnisotropyPhi::Constant(c) => write!(f, "constant {c}"),
            AnisotropyPhi::Dipole { eps, v } => {
                write!(f, "dipole {eps} {} {} {}", v[0], v[1], v[2])
            }
            AnisotropyPhi::Quadrupole { eps, axis, .. } => write!(f, "quadrupole {eps} {}", axis + 1),
        }
    }
}
