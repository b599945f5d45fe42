//! Scalar material laws: double well, interpolation, effective transport
//! coefficients and the cut-off Butler-Volmer forcing coefficient.

use crate::error::{Error, Result};

/// Double-well potential `s^2 (1 - s)^2 / 4` on `[0, 1]`, zero elsewhere.
#[inline]
pub fn g(s: f64) -> f64 {
    if (0.0..=1.0).contains(&s) {
        0.25 * s * s * (1.0 - s) * (1.0 - s)
    } else {
        0.0
    }
}

#[inline]
pub fn g_prime(s: f64) -> f64 {
    if (0.0..=1.0).contains(&s) {
        s * (s - 1.0) * (s - 0.5)
    } else {
        0.0
    }
}

/// Quintic interpolation, clamped to 0 below and 1 above the unit interval.
#[inline]
pub fn h(s: f64) -> f64 {
    if s < 0.0 {
        0.0
    } else if s > 1.0 {
        1.0
    } else {
        s * s * s * (6.0 * s * s - 15.0 * s + 10.0)
    }
}

#[inline]
pub fn h_prime(s: f64) -> f64 {
    if (0.0..=1.0).contains(&s) {
        30.0 * s * s * (s - 1.0) * (s - 1.0)
    } else {
        0.0
    }
}

/// `max |g'|` over the reals, attained at `s = (3 - sqrt 3) / 6`.
pub fn g_prime_max_abs() -> f64 {
    g_prime((3.0 - 3f64.sqrt()) / 6.0).abs()
}

/// `max h'`, attained at `s = 1/2`.
pub const H_PRIME_MAX: f64 = 1.875;

/// Forcing constants from the rate prefactor `kappa`, the symmetry factor
/// `alpha` and the overpotential group `b = nF|eta_a| / RT`.
pub fn compute_c1_c2(kappa: f64, alpha: f64, b: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::invalid(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    if !(kappa > 0.0) {
        return Err(Error::invalid(format!("kappa must be positive, got {kappa}")));
    }
    if !(b >= 0.0) {
        return Err(Error::invalid(format!("overpotential group must be >= 0, got {b}")));
    }
    Ok((kappa * (-(1.0 - alpha) * b).exp(), kappa * (alpha * b).exp()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaterialParams {
    pub gamma: f64,
    pub mu: f64,
    pub nu1: f64,
    pub phi_minus: f64,
    pub c1: f64,
    pub c2: f64,
    pub d_e: f64,
    pub d_s: f64,
    pub sigma_e: f64,
    pub sigma_s: f64,
    pub eps: f64,
}

impl Default for MaterialParams {
    fn default() -> Self {
        let (c1, c2) = compute_c1_c2(1.0, 0.5, 1.0).expect("valid defaults");
        MaterialParams {
            gamma: 1.0,
            mu: 1.0,
            nu1: 0.1,
            phi_minus: -1.0,
            c1,
            c2,
            d_e: 1e-4,
            d_s: 10.0,
            sigma_e: 1.0,
            sigma_s: 1e-2,
            eps: 0.9,
        }
    }
}

impl MaterialParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("gamma", self.gamma),
            ("C1", self.c1),
            ("C2", self.c2),
            ("D_e", self.d_e),
            ("D_s", self.d_s),
            ("sigma_e", self.sigma_e),
            ("sigma_s", self.sigma_s),
            ("eps", self.eps),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if !(-2.0..0.0).contains(&self.phi_minus) {
            return Err(Error::invalid(format!(
                "phi_minus must lie in [-2, 0), got {}",
                self.phi_minus
            )));
        }
        if !self.mu.is_finite() || !self.nu1.is_finite() {
            return Err(Error::invalid("mu and nu1 must be finite"));
        }
        Ok(())
    }

    /// Effective diffusivity, electrode value at `s = 1`.
    #[inline]
    pub fn diffusivity(&self, s: f64) -> f64 {
        let w = h(s);
        self.d_e * w + self.d_s * (1.0 - w)
    }

    #[inline]
    pub fn conductivity(&self, s: f64) -> f64 {
        let w = h(s);
        self.sigma_e * w + self.sigma_s * (1.0 - w)
    }

    #[inline]
    pub fn conductivity_prime(&self, s: f64) -> f64 {
        (self.sigma_e - self.sigma_s) * h_prime(s)
    }

    pub fn d_min(&self) -> f64 {
        self.d_e.min(self.d_s)
    }

    /// Electromigration coefficient, cut off outside `0 <= s <= 1`.
    /// Jumps at `s = 1` whenever `D(w) > D_min`.
    #[inline]
    pub fn transport(&self, w: f64, s: f64) -> f64 {
        if s < 0.0 {
            0.0
        } else if s > 1.0 {
            self.d_min()
        } else {
            self.diffusivity(w) * s
        }
    }

    /// Cut-off forcing coefficient `C1 - c C2`.
    #[inline]
    pub fn forcing(&self, c: f64) -> f64 {
        self.c1 - c.clamp(0.0, 1.0) * self.c2
    }

    /// `max |m|` over the reals.
    pub fn forcing_max_abs(&self) -> f64 {
        self.c1.max((self.c1 - self.c2).abs())
    }

    pub fn nu2(&self, l1: f64) -> f64 {
        self.phi_minus / l1
    }
}
