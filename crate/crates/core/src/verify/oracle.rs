//! Reference values computed without the FFT tables or the kernel rules:
//! either in closed form from the spectral profile or by plain composite
//! quadrature of the spatial mollifier.

use crate::mollifier::{Mollifier, SpectralProfile};
use crate::quadrature;

fn ramp_integral<F: Fn(f64) -> f64>(p: &SpectralProfile, f: F) -> f64 {
    let n = 256;
    let h = (p.r_out - p.r_in) / n as f64;
    let breaks: Vec<f64> = (0..=n).map(|i| p.r_in + i as f64 * h).collect();
    quadrature::integrate(&breaks, 16, |xi| f(p.chi(xi)))
}

/// `phi(0) = (2 pi)^-1 int chi`, for an even profile.
pub fn phi_at_zero(p: &SpectralProfile) -> f64 {
    (p.r_in + ramp_integral(p, |c| c)) / std::f64::consts::PI
}

/// `||phi||_2^2 = (2 pi)^-1 int chi^2` by Parseval, for an even profile.
pub fn phi_l2_squared(p: &SpectralProfile) -> f64 {
    (p.r_in + ramp_integral(p, |c| c * c)) / std::f64::consts::PI
}

/// `int chi^2 (chi - 1)`; only the ramp contributes.
pub fn chi_cubic_defect(p: &SpectralProfile) -> f64 {
    2.0 * ramp_integral(p, |c| c * c * (c - 1.0))
}

/// `int z^a phi(z)^2 dz` by composite Gauss-Legendre on panels of width 1/20
/// over the truncation range of the mollifier.
pub fn square_moment(phi: &Mollifier, a: u32) -> f64 {
    let r = phi.radius();
    let n = (40.0 * r).ceil() as usize;
    let h = 2.0 * r / n as f64;
    let breaks: Vec<f64> = (0..=n).map(|i| -r + i as f64 * h).collect();
    quadrature::integrate(&breaks, 20, |z| z.powi(a as i32) * phi.eval(z).powi(2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mollifier::MollifierParams;

    #[test]
    fn oracles_match_the_built_mollifier() {
        let phi = Mollifier::build(MollifierParams::default()).unwrap();
        let p = phi.profile();
        assert!((phi_at_zero(p) - phi.eval(0.0)).abs() < 1e-8);
        assert!((phi_l2_squared(p) - square_moment(&phi, 0)).abs() < 1e-7);
        assert!(chi_cubic_defect(p) < -1.0);
        assert!(square_moment(&phi, 1).abs() < 1e-10);
    }
}
