//! Numeric tolerances used by all rank, containment and exactness decisions.

use crate::error::{Error, Result};

/// Tolerance bundle threaded through every numeric decision.
///
/// `eps_rank` is relative: a singular value σ counts as zero when
/// σ ≤ eps_rank·σ_max. Ties resolve toward the lower rank, i.e. toward the
/// more degenerate configuration, since the geometric criteria test for
/// degeneracy. `eps_geom` is an absolute distance threshold for containment
/// and incidence checks, `eps_orth` bounds orthonormality residuals of stored
/// bases, and `eps_exact` bounds |log ∏ q| when testing 1-form exactness
/// (decoupled from `eps_rank` because cycle length amplifies per-edge error).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub eps_rank: f64,
    pub eps_orth: f64,
    pub eps_geom: f64,
    pub eps_exact: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            eps_rank: 1e-9,
            eps_orth: 1e-10,
            eps_geom: 1e-9,
            eps_exact: 1e-7,
        }
    }
}

impl Tolerances {
    /// Uniform scale override: keeps the default proportions but moves
    /// `eps_rank` (and the thresholds tied to it) to the given value.
    pub fn with_eps_rank(eps_rank: f64) -> Self {
        Self {
            eps_rank,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let floor = f64::EPSILON * 1e3;
        if self.eps_rank < floor || self.eps_rank.is_nan() {
            return Err(Error::Usage(format!(
                "eps_rank must be at least {floor:e}, got {:e}",
                self.eps_rank
            )));
        }
        for (name, v) in [
            ("eps_rank", self.eps_rank),
            ("eps_orth", self.eps_orth),
            ("eps_geom", self.eps_geom),
            ("eps_exact", self.eps_exact),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Usage(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}
