//! Flat asymptotic model geometries sampled over the half-plane, and their
//! torus matrices in the model polar chart (used by the flux integrands).

use crate::error::{Error, Result};
use crate::linalg::Sym2;

use super::BrillSample;

/// b_ALE torus matrix at (r, theta), theta in [0, pi/2].
pub fn ale_torus_matrix(p: f64, q: f64, r: f64, theta: f64) -> Sym2 {
    let (st, ct) = theta.sin_cos();
    let (s2, c2) = (st * st, ct * ct);
    let r2 = r * r;
    Sym2::new(r2 * (s2 + q * q * c2) / (p * p), q / p * r2 * c2, r2 * c2)
}

/// b_ALF torus matrix (phi-basis, twist beta) at (r, theta), theta in [0, pi].
pub fn alf_torus_matrix(k: f64, ell: f64, beta: f64, r: f64, theta: f64) -> Sym2 {
    let half2 = 0.5 * (1.0 + theta.cos());
    let s2 = theta.sin().powi(2);
    let g11 = ell * ell * k * k * half2 * half2 + r * r * s2;
    let g12 = ell * ell * k * half2;
    let g22 = ell * ell;
    shear(g11, g12, g22, beta * ell)
}

pub fn alf_torus_matrix_dr(_k: f64, ell: f64, beta: f64, r: f64, theta: f64) -> Sym2 {
    let d = 2.0 * r * theta.sin().powi(2);
    let bl = beta * ell;
    Sym2::new(d, bl * d, bl * bl * d)
}

/// b_AF torus matrix (phi-basis) at (r, theta), theta in [0, pi].
pub fn af_torus_matrix(beta: f64, ell: f64, r: f64, theta: f64) -> Sym2 {
    let s2 = (r * theta.sin()).powi(2);
    shear(s2, 0.0, ell * ell, beta * ell)
}

pub fn af_torus_matrix_dr(beta: f64, ell: f64, r: f64, theta: f64) -> Sym2 {
    let d = 2.0 * r * theta.sin().powi(2);
    let bl = beta * ell;
    Sym2::new(d, bl * d, bl * bl * d)
}

/// Push a matrix given on (d phi^1 + beta ell d phi^2, d phi^2) to the
/// plain (d phi^1, d phi^2) basis.
fn shear(g11: f64, g12: f64, g22: f64, bl: f64) -> Sym2 {
    Sym2::new(g11, bl * g11 + g12, bl * bl * g11 + 2.0 * bl * g12 + g22)
}

/// Flat cone over L(p, q) in half-plane coordinates.
///
/// With R = sqrt(rho^2 + z^2): G22 = p(R + z), G12 = q(R + z),
/// G11 = ((R - z) + q^2 (R + z))/p, e^{2 alpha} = p/(2R).
pub fn sample_ale(p: f64, q: f64, rho: f64, z: f64) -> Result<BrillSample> {
    let r_flat = rho.hypot(z);
    if r_flat == 0.0 {
        return Err(Error::OutsideDomain { rho, z, reason: "cone apex".into() });
    }
    let plus = r_flat + z;
    let minus = stable_r_minus_z(rho, z, r_flat);
    let g = Sym2::new((minus + q * q * plus) / p, q * plus, p * plus);
    let alpha = 0.5 * (p / (2.0 * r_flat)).ln();
    Ok(BrillSample::new(rho, z, alpha, g))
}

/// b_ALF in half-plane coordinates; the nut at the origin is excluded.
pub fn sample_alf(k: f64, ell: f64, beta: f64, rho: f64, z: f64) -> Result<BrillSample> {
    let r_flat = rho.hypot(z);
    if r_flat == 0.0 {
        return Err(Error::OutsideDomain { rho, z, reason: "model nut".into() });
    }
    let half2 = 0.5 * (1.0 + z / r_flat);
    let g11 = ell * ell * k * k * half2 * half2 + rho * rho / (ell * ell);
    let g12 = ell * ell * k * half2;
    let g = shear(g11, g12, ell * ell, beta * ell);
    Ok(BrillSample::new(rho, z, -ell.ln(), g))
}

/// b_AF in half-plane coordinates; globally defined.
pub fn sample_af(beta: f64, ell: f64, rho: f64, z: f64) -> Result<BrillSample> {
    let g = shear(rho * rho / (ell * ell), 0.0, ell * ell, beta * ell);
    Ok(BrillSample::new(rho, z, -ell.ln(), g))
}

/// R - z without cancellation for z > 0.
fn stable_r_minus_z(rho: f64, z: f64, r_flat: f64) -> f64 {
    if z > 0.0 {
        rho * rho / (r_flat + z)
    } else {
        r_flat - z
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclidean_at_unit_point() {
        let s = sample_ale(1.0, 0.0, 1.0, 0.0).unwrap();
        assert!((s.alpha.exp().powi(2) - 0.5).abs() < 1e-15);
        assert!((s.g.xx - 1.0).abs() < 1e-15);
        assert!((s.g.yy - 1.0).abs() < 1e-15);
        assert_eq!(s.g.xy, 0.0);
    }

    #[test]
    fn af_matches_spec_form() {
        // G11 = rho^2/ell^2, G22 = ell^2, G12 = 0 for beta = 0.
        let ell = 1.7;
        let s = sample_af(0.0, ell, 0.9, -2.3).unwrap();
        assert!((s.g.xx - 0.81 / (ell * ell)).abs() < 1e-15);
        assert!((s.g.yy - ell * ell).abs() < 1e-15);
        assert_eq!(s.g.xy, 0.0);
        assert!((s.alpha + ell.ln()).abs() < 1e-15);
    }

    #[test]
    fn flat_models_have_det_rho_squared() {
        for (rho, z) in [(0.5, 0.0), (1.0, 2.0), (3.0, -4.0), (1e-3, 0.7)] {
            let rho2 = rho * rho;
            let a = sample_ale(2.0, 1.0, rho, z).unwrap();
            assert!((a.g.det() - rho2).abs() < 1e-12 * rho2.max(1.0));
            let b = sample_alf(1.0, 2.0, 0.0, rho, z).unwrap();
            assert!((b.g.det() - rho2).abs() < 1e-12 * rho2.max(1.0));
            let c = sample_af(0.4, 1.3, rho, z).unwrap();
            assert!((c.g.det() - rho2).abs() < 1e-12 * rho2.max(1.0));
        }
    }

    #[test]
    fn chart_and_half_plane_samplers_agree() {
        let (k, ell, beta) = (1.0, 2.0, 0.3);
        let (r, theta): (f64, f64) = (7.0, 1.1);
        let rho = ell * r * theta.sin();
        let z = ell * r * theta.cos();
        let from_chart = alf_torus_matrix(k, ell, beta, r, theta);
        let from_plane = sample_alf(k, ell, beta, rho, z).unwrap().g;
        assert!(from_chart.sub(&from_plane).norm() < 1e-12 * from_chart.norm());
    }
}
