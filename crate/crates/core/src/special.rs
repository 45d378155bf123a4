//! Thin wrappers over `libm` and `statrs` special functions.

use statrs::function::gamma;

pub const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal cdf.
#[inline]
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
}

/// Standard normal density.
#[inline]
pub fn norm_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

#[inline]
pub fn ln_gamma(x: f64) -> f64 {
    gamma::ln_gamma(x)
}

#[inline]
pub fn gamma_fn(x: f64) -> f64 {
    gamma::gamma(x)
}

/// `p`-variate normal density with covariance `v I` at squared distance `d2`.
#[inline]
pub fn normal_density_iso(d2: f64, v: f64, p: usize) -> f64 {
    (2.0 * std::f64::consts::PI * v).powf(-(p as f64) / 2.0) * (-d2 / (2.0 * v)).exp()
}

/// Surface area of the unit sphere in `R^p`.
pub fn sphere_area(p: usize) -> f64 {
    let h = p as f64 / 2.0;
    2.0 * std::f64::consts::PI.powf(h) / gamma_fn(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn normal_cdf_reference_values() {
        assert_abs_diff_eq!(norm_cdf(0.0), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(norm_cdf(1.0), 0.841_344_746_068_542_9, epsilon = 1e-13);
        assert_abs_diff_eq!(norm_cdf(-2.0), 0.022_750_131_948_179_2, epsilon = 1e-13);
        assert_abs_diff_eq!(norm_cdf(0.5), 0.691_462_461_274_013_1, epsilon = 1e-13);
    }

    #[test]
    fn sphere_area_low_dims() {
        assert_abs_diff_eq!(sphere_area(1), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sphere_area(2), 2.0 * std::f64::consts::PI, epsilon = 1e-12);
        assert_abs_diff_eq!(sphere_area(3), 4.0 * std::f64::consts::PI, epsilon = 1e-12);
    }
}
