//! Prolate-spheroidal chart shared by the rod-type families, with a
//! cancellation-free inversion, plus a safeguarded Newton fallback for
//! charts without a closed-form inverse.

use crate::error::{Error, Result};

/// Chart rho = ell sqrt(u^2 - s^2) sin(theta), z = ell u cos(theta),
/// carrying a finite rod over z in [-ell s, ell s].
#[derive(Debug, Clone, Copy)]
pub struct Prolate {
    pub ell: f64,
    pub s: f64,
}

/// Inverted chart data at one half-plane point.
#[derive(Debug, Clone, Copy)]
pub struct ProlatePoint {
    pub u: f64,
    /// u^2 - s^2, computed without cancellation.
    pub f: f64,
    pub cos_theta: f64,
    pub sin_theta: f64,
    /// Distances to the rod ends (0, -ell s) and (0, +ell s).
    pub r1: f64,
    pub r2: f64,
    /// r1 + r2.
    pub sigma: f64,
}

impl Prolate {
    pub fn new(ell: f64, s: f64) -> Self {
        debug_assert!(ell > 0.0 && s > 0.0);
        Prolate { ell, s }
    }

    pub fn rod_half_length(&self) -> f64 {
        self.ell * self.s
    }

    pub fn forward(&self, u: f64, theta: f64) -> (f64, f64) {
        let f = (u - self.s) * (u + self.s);
        let (st, ct) = theta.sin_cos();
        (self.ell * f.max(0.0).sqrt() * st, self.ell * u * ct)
    }

    /// Invert at (rho, z) >= 0. Exact on the axis and across the rod; the
    /// near-rod cancellation in u - s is removed by rationalizing
    /// sigma^2 - L^2 through r1 r2 + (z - z1)(z - z2).
    pub fn invert(&self, rho: f64, z: f64) -> ProlatePoint {
        let z2 = self.ell * self.s;
        let z1 = -z2;
        let big_l = z2 - z1;
        let a = z - z1;
        let b = z - z2;
        let r1 = rho.hypot(a);
        let r2 = rho.hypot(b);
        let sigma = r1 + r2;

        // sigma^2 - L^2 = 2 (rho^2 + ab + r1 r2), stable for ab < 0.
        let p = a * b;
        let q = r1 * r2;
        let qp = if p >= 0.0 {
            q + p
        } else {
            rho * rho * (rho * rho + a * a + b * b) / (q - p)
        };
        let sigma2_minus_l2 = 2.0 * (rho * rho + qp);
        debug_assert!(sigma2_minus_l2 >= -1e-12 * big_l * big_l);

        let u = sigma / (2.0 * self.ell);
        let f = sigma2_minus_l2.max(0.0) / (4.0 * self.ell * self.ell);
        let cos_theta = (2.0 * z / sigma).clamp(-1.0, 1.0);
        // Near the axis outside the rod, 1 - cos^2 cancels; rho/(ell sqrt f)
        // is exact there. Inside the rod f ~ 0 and the complement is exact.
        let sin_theta = if f * self.ell * self.ell > rho * rho {
            (rho / (self.ell * f.sqrt())).min(1.0)
        } else {
            ((1.0 - cos_theta) * (1.0 + cos_theta)).max(0.0).sqrt()
        };
        ProlatePoint { u, f, cos_theta, sin_theta, r1, r2, sigma }
    }
}

/// Safeguarded 2D Newton inversion of a chart transform.
///
/// Solves T(r, theta) = (rho, z) with finite-difference Jacobian and step
/// halving; tolerance on the residual in half-plane units.
pub fn newton_invert_2d<F>(
    transform: F,
    rho: f64,
    z: f64,
    guess: (f64, f64),
    tol: f64,
    max_iters: usize,
) -> Result<(f64, f64)>
where
    F: Fn(f64, f64) -> (f64, f64),
{
    let mut r = guess.0;
    let mut theta = guess.1;
    let scale = rho.hypot(z).max(1.0);
    let mut best = f64::INFINITY;
    for _ in 0..max_iters {
        let (p, q) = transform(r, theta);
        let (fr, fz) = (p - rho, q - z);
        let res = fr.hypot(fz);
        if res <= tol * scale {
            return Ok((r, theta));
        }
        best = best.min(res);
        let hr = 1e-7 * r.abs().max(1.0);
        let ht = 1e-7;
        let (pr, qr) = transform(r + hr, theta);
        let (pt, qt) = transform(r, theta + ht);
        let j11 = (pr - p) / hr;
        let j21 = (qr - q) / hr;
        let j12 = (pt - p) / ht;
        let j22 = (qt - q) / ht;
        let det = j11 * j22 - j12 * j21;
        if det.abs() < 1e-300 {
            break;
        }
        let mut dr = -(fr * j22 - fz * j12) / det;
        let mut dt = -(j11 * fz - j21 * fr) / det;
        // Step halving keeps the residual from growing.
        for _ in 0..20 {
            let (np, nq) = transform(r + dr, theta + dt);
            if (np - rho).hypot(nq - z) < res {
                break;
            }
            dr *= 0.5;
            dt *= 0.5;
        }
        r += dr;
        theta += dt;
    }
    let (p, q) = transform(r, theta);
    if (p - rho).hypot(q - z) <= tol * scale {
        Ok((r, theta))
    } else {
        Err(Error::InversionFailure { rho, z, iters: max_iters })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prolate_roundtrip() {
        let pr = Prolate::new(2.4, 1.25);
        for &u in &[1.2500001, 1.3, 2.0, 50.0] {
            for &theta in &[0.01, 0.4, std::f64::consts::FRAC_PI_2, 2.9] {
                let (rho, z) = pr.forward(u, theta);
                let pt = pr.invert(rho, z);
                assert!((pt.u - u).abs() < 1e-12 * u, "u {} vs {}", pt.u, u);
                assert!((pt.cos_theta - theta.cos()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn prolate_near_rod_is_stable() {
        let pr = Prolate::new(0.5, 2.0);
        // Points hugging the finite rod probe the rationalized branch.
        for &rho in &[1e-2, 1e-4, 1e-6, 1e-8] {
            let pt = pr.invert(rho, 0.3);
            // f = rho^2 / (ell^2 sin^2 theta) to leading order.
            let expect = rho * rho / (pr.ell * pr.ell * pt.sin_theta * pt.sin_theta);
            assert!(
                ((pt.f - expect) / expect).abs() < 1e-9,
                "f {} vs {} at rho={}",
                pt.f,
                expect,
                rho
            );
        }
    }

    #[test]
    fn prolate_on_axis_outside_rod() {
        let pr = Prolate::new(1.0, 1.0);
        let pt = pr.invert(0.0, 3.0);
        assert!((pt.u - 3.0).abs() < 1e-14);
        assert!((pt.cos_theta - 1.0).abs() < 1e-15);
        assert_eq!(pt.sin_theta, 0.0);
    }

    #[test]
    fn newton_inverts_a_smooth_chart() {
        let t = |r: f64, th: f64| (r * r * th.sin(), r * r * th.cos() + 0.3 * r);
        let (rho, z) = t(2.0, 0.7);
        let (r, th) = newton_invert_2d(t, rho, z, (1.5, 1.0), 1e-12, 50).unwrap();
        assert!((r - 2.0).abs() < 1e-9);
        assert!((th - 0.7).abs() < 1e-9);
    }
}
