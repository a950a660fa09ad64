//! Explicit instanton samplers: Kerr, Reissner-Nordstrom (Schwarzschild at
//! c1 = 0), Taub-NUT, (charged) Taub-Bolt, and Eguchi-Hanson.
//!
//! Entries that vanish on a rod are written with the (r - r_bolt) factor
//! pulled out, so near-axis samples keep full relative accuracy; the defect
//! limits depend on this.

use crate::error::{Error, Result};
use crate::linalg::Sym2;

use super::prolate::Prolate;
use super::BrillSample;

/// Kerr instanton, parameterized by (r_plus, a) with r_plus > a >= 0.
#[derive(Debug, Clone, Copy)]
pub struct Kerr {
    pub r_plus: f64,
    pub a: f64,
    pub m: f64,
    /// r_plus - m = sqrt(m^2 + a^2); prolate half-separation.
    pub s: f64,
    pub beta: f64,
    pub ell: f64,
}

impl Kerr {
    pub fn new(r_plus: f64, a: f64) -> Self {
        let m = (r_plus * r_plus - a * a) / (2.0 * r_plus);
        let s = (r_plus * r_plus + a * a) / (2.0 * r_plus);
        let beta = if a == 0.0 { 0.0 } else { a / (r_plus * r_plus - a * a) };
        let ell = 2.0 * r_plus * (r_plus * r_plus - a * a) / (r_plus * r_plus + a * a);
        Kerr { r_plus, a, m, s, beta, ell }
    }

    pub fn sample(&self, rho: f64, z: f64) -> Result<BrillSample> {
        let (rp, a) = (self.r_plus, self.a);
        let pr = Prolate::new(self.ell, self.s);
        let pt = pr.invert(rho, z);
        let r = pt.u + self.m;
        let s2 = pt.sin_theta * pt.sin_theta;
        let c2 = pt.cos_theta * pt.cos_theta;
        let sigma_fn = r * r - a * a * c2;
        let f = pt.f;
        // r - r_plus without cancellation: f = (u - s)(u + s).
        let r_minus_rp = f / (pt.u + self.s);
        let rp2a2 = rp * rp - a * a;

        let g11 = s2 / sigma_fn * (f * a * a * s2 + (r * r - a * a).powi(2));
        let inner = (r + rp) * (r * r + rp * rp - 2.0 * a * a);
        let g12 = a * self.ell * s2 / (sigma_fn * rp2a2)
            * r_minus_rp
            * (a * a * s2 * (r + a * a / rp) + inner - rp2a2 * rp2a2 / rp);
        let g22 = self.ell * self.ell * r_minus_rp / sigma_fn
            * ((r + a * a / rp) * (1.0 + self.beta * self.beta * a * a * s2 * s2)
                + s2 * a * a / (rp2a2 * rp2a2) * (inner - 2.0 * rp2a2 * rp2a2 / rp));

        // e^{2 alpha} = Sigma / (ell^2 (f + (m^2 + a^2) sin^2 theta)).
        let denom = self.ell * self.ell * (f + self.s * self.s * s2);
        if denom <= 0.0 {
            return Err(Error::OutsideDomain { rho, z, reason: "on the axis set".into() });
        }
        let alpha = 0.5 * (sigma_fn / denom).ln();
        Ok(BrillSample::new(rho, z, alpha, Sym2::new(g11, g12, g22)))
    }
}

/// Reissner-Nordstrom instanton in (r_plus, c1); Schwarzschild at c1 = 0.
#[derive(Debug, Clone, Copy)]
pub struct ReissnerNordstrom {
    pub r_plus: f64,
    pub c1: f64,
    pub m: f64,
    /// sqrt(m^2 - c1) = (r_plus^2 - c1) / (2 r_plus).
    pub s: f64,
    pub ell: f64,
}

impl ReissnerNordstrom {
    pub fn new(r_plus: f64, c1: f64) -> Self {
        let m = (r_plus * r_plus + c1) / (2.0 * r_plus);
        let s = (r_plus * r_plus - c1) / (2.0 * r_plus);
        let ell = r_plus * r_plus / s;
        ReissnerNordstrom { r_plus, c1, m, s, ell }
    }

    pub fn sample(&self, rho: f64, z: f64) -> Result<BrillSample> {
        let pr = Prolate::new(self.ell, self.s);
        let pt = pr.invert(rho, z);
        let r = pt.u + self.m;
        if r <= 0.0 {
            return Err(Error::OutsideDomain { rho, z, reason: "behind the singularity".into() });
        }
        let s2 = pt.sin_theta * pt.sin_theta;
        let g11 = r * r * s2;
        let g22 = self.ell * self.ell * pt.f / (r * r);
        let denom = self.ell * self.ell * (pt.f + self.s * self.s * s2);
        if denom <= 0.0 {
            return Err(Error::OutsideDomain { rho, z, reason: "on the axis set".into() });
        }
        let alpha = 0.5 * (r * r / denom).ln();
        Ok(BrillSample::new(rho, z, alpha, Sym2::new(g11, 0.0, g22)))
    }
}

/// Taub-NUT with fiber size ell: H = 1 + ell/2r over flat R^3.
pub fn sample_taub_nut(ell: f64, rho: f64, z: f64) -> Result<BrillSample> {
    let r_flat = rho.hypot(z);
    if r_flat == 0.0 {
        return Err(Error::OutsideDomain { rho, z, reason: "nut point".into() });
    }
    let r = r_flat / ell;
    let h = 1.0 + ell / (2.0 * r);
    let half2 = 0.5 * (1.0 + z / r_flat);
    let g11 = ell * ell * half2 * half2 / h + h * rho * rho / (ell * ell);
    let g12 = ell * ell * half2 / h;
    let g22 = ell * ell / h;
    let alpha = 0.5 * (h / (ell * ell)).ln();
    Ok(BrillSample::new(rho, z, alpha, Sym2::new(g11, g12, g22)))
}

/// Shared sampler for Taub-Bolt and its charged generalization: a bolt of
/// prolate half-separation s around radial midpoint `mid`.
#[derive(Debug, Clone, Copy)]
pub struct ChargedTaubBolt {
    pub r_plus: f64,
    pub ell: f64,
    pub mid: f64,
    pub s: f64,
}

impl ChargedTaubBolt {
    pub fn new(r_plus: f64, ell: f64) -> Self {
        let mid = r_plus + ell / 16.0 - r_plus * r_plus / ell;
        let s = r_plus * r_plus / ell - ell / 16.0;
        ChargedTaubBolt { r_plus, ell, mid, s }
    }

    pub fn sample(&self, rho: f64, z: f64) -> Result<BrillSample> {
        let pr = Prolate::new(self.ell, self.s);
        let pt = pr.invert(rho, z);
        let r = pt.u + self.mid;
        let w2 = r * r - self.ell * self.ell / 16.0;
        if w2 <= 0.0 {
            return Err(Error::OutsideDomain { rho, z, reason: "inside the bolt".into() });
        }
        let capu = pt.f / w2;
        let half2 = 0.5 * (1.0 + pt.cos_theta);
        let s2 = pt.sin_theta * pt.sin_theta;
        let le2 = self.ell * self.ell;
        let g11 = capu * le2 * half2 * half2 + w2 * s2;
        let g12 = capu * le2 * half2;
        let g22 = capu * le2;
        let denom = le2 * (pt.f + self.s * self.s * s2);
        if denom <= 0.0 {
            return Err(Error::OutsideDomain { rho, z, reason: "on the axis set".into() });
        }
        let alpha = 0.5 * (w2 / denom).ln();
        Ok(BrillSample::new(rho, z, alpha, Sym2::new(g11, g12, g22)))
    }
}

/// Taub-Bolt: the charged family at r_plus = ell/2.
pub fn sample_taub_bolt(ell: f64, rho: f64, z: f64) -> Result<BrillSample> {
    ChargedTaubBolt::new(ell / 2.0, ell).sample(rho, z)
}

/// Eguchi-Hanson with bolt scale a.
///
/// Chart rho = sqrt(r^4 - a^4) sin(2 theta)/4, z = r^2 cos(2 theta)/4;
/// inverted through the quadratic for t = r^4 with rationalized branches.
pub fn sample_eguchi_hanson(a: f64, rho: f64, z: f64) -> Result<BrillSample> {
    let a4 = a.powi(4);
    let b = a4 + 16.0 * (rho * rho + z * z);
    // disc = b^2 - 64 a^4 z^2 = ((a^2-4z)^2 + 16 rho^2)((a^2+4z)^2 + 16 rho^2).
    let disc = ((a * a - 4.0 * z).powi(2) + 16.0 * rho * rho)
        * ((a * a + 4.0 * z).powi(2) + 16.0 * rho * rho);
    let sq = disc.sqrt();
    let t = 0.5 * (b + sq);
    let t_minus_a4 = if b >= 2.0 * a4 {
        0.5 * (b - 2.0 * a4 + sq)
    } else {
        32.0 * a4 * rho * rho / (sq + 2.0 * a4 - b)
    };
    let r2 = t.sqrt();

    // t - 16 z^2 via rationalization when 32 z^2 > b.
    let t_minus_16z2 = if 32.0 * z * z > b {
        512.0 * z * z * rho * rho / (sq + 32.0 * z * z - b)
    } else {
        0.5 * (b - 32.0 * z * z + sq)
    };
    // cos^2 theta = (r^2 + 4z) / (2 r^2), stabilized on each sign of z.
    let cos2t = if z >= 0.0 {
        (r2 + 4.0 * z) / (2.0 * r2)
    } else {
        t_minus_16z2 / ((r2 - 4.0 * z) * 2.0 * r2)
    };
    let sin2t = if z <= 0.0 {
        (r2 - 4.0 * z) / (2.0 * r2)
    } else {
        t_minus_16z2 / ((r2 + 4.0 * z) * 2.0 * r2)
    };

    let g11 = t_minus_a4 / (4.0 * r2);
    let g12 = t_minus_a4 * cos2t / (2.0 * r2);
    let g22 = r2 * cos2t * (t_minus_a4 / t * cos2t + sin2t);

    // sin(2 theta), stable both near the bolt and near the outer axes.
    let sin_2theta = if t_minus_a4 > 16.0 * rho * rho {
        4.0 * rho / t_minus_a4.sqrt()
    } else {
        (4.0 * sin2t.max(0.0) * cos2t.max(0.0)).sqrt()
    };
    let denom = t_minus_a4 + a4 * sin_2theta * sin_2theta;
    if denom <= 0.0 {
        return Err(Error::OutsideDomain { rho, z, reason: "corner of the bolt".into() });
    }
    let alpha = 0.5 * (4.0 * r2 / denom).ln();
    Ok(BrillSample::new(rho, z, alpha, Sym2::new(g11, g12, g22)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kerr_det_g_is_rho_squared() {
        let k = Kerr::new(2.0, 1.0);
        for (rho, z) in [(0.8, 0.3), (2.0, -1.5), (1e-3, 0.0), (1e-4, 2.0), (30.0, 40.0)] {
            let s = k.sample(rho, z).unwrap();
            let d = s.g.det();
            assert!(
                (d - rho * rho).abs() < 1e-11 * (rho * rho).max(1.0),
                "det {} vs {} at ({}, {})",
                d,
                rho * rho,
                rho,
                z
            );
        }
    }

    #[test]
    fn kerr_kernel_on_finite_rod() {
        // Rod structure (0, 1) on the bolt: G * (0,1) -> 0 as rho -> 0.
        let k = Kerr::new(2.0, 1.0);
        let mut prev = f64::INFINITY;
        for &rho in &[1e-2, 1e-3, 1e-4] {
            let s = k.sample(rho, 0.5).unwrap();
            let norm = s.g.xy.hypot(s.g.yy);
            assert!(norm < prev);
            prev = norm;
        }
        assert!(prev < 1e-6);
    }

    #[test]
    fn schwarzschild_g22_vanishes_on_rod() {
        let rn = ReissnerNordstrom::new(2.0, 0.0); // m = 1, ell = 4
        let s = rn.sample(1e-8, 0.0).unwrap();
        assert!(s.g.yy < 1e-10);
        assert!(s.g.yy > 0.0);
    }

    #[test]
    fn rn_negative_mass_parameters() {
        let rn = ReissnerNordstrom::new(1.0, -3.0);
        assert!((rn.m + 1.0).abs() < 1e-15);
        assert!((rn.ell - 0.5).abs() < 1e-15);
        assert!((rn.s - 2.0).abs() < 1e-15);
        let s = rn.sample(0.7, 0.2).unwrap();
        assert!((s.g.det() - 0.49).abs() < 1e-13);
        assert!(s.g.is_positive_definite());
    }

    #[test]
    fn taub_families_det_and_positivity() {
        for (rho, z) in [(0.5, 0.1), (3.0, -2.0), (1e-3, 0.2), (10.0, 10.0)] {
            for sample in [
                sample_taub_nut(2.0, rho, z).unwrap(),
                sample_taub_bolt(2.0, rho, z).unwrap(),
                ChargedTaubBolt::new(1.0, 2.0).sample(rho, z).unwrap(),
            ] {
                assert!((sample.g.det() - rho * rho).abs() < 1e-11 * (rho * rho).max(1.0));
                assert!(sample.g.is_positive_definite());
            }
        }
    }

    #[test]
    fn charged_taub_bolt_reduces_to_taub_bolt() {
        let ctb = ChargedTaubBolt::new(1.0, 2.0);
        let tb = sample_taub_bolt(2.0, 0.9, 0.4).unwrap();
        let also = ctb.sample(0.9, 0.4).unwrap();
        assert!((ctb.s - 3.0 * 2.0 / 16.0).abs() < 1e-15);
        assert!(tb.g.sub(&also.g).norm() < 1e-12 * tb.g.norm());
    }

    #[test]
    fn eguchi_hanson_det_everywhere() {
        for (rho, z) in [
            (0.5, 0.0),
            (1e-3, 0.1),   // near the bolt
            (1e-3, -5.0),  // near the (0,1) axis
            (1e-3, 5.0),   // near the (2,-1) axis
            (4.0, 3.0),
            (1e-6, 0.2),
        ] {
            let s = sample_eguchi_hanson(1.0, rho, z).unwrap();
            assert!(
                (s.g.det() - rho * rho).abs() < 1e-10 * (rho * rho).max(1.0),
                "det {} vs {} at ({}, {})",
                s.g.det(),
                rho * rho,
                rho,
                z
            );
        }
    }

    #[test]
    fn eguchi_hanson_chart_point() {
        // r = a, theta = pi/4 maps to the bolt edge (0, 0).
        let a = 1.0f64;
        let rho = 0.25 * (a.powi(4) - a.powi(4)).sqrt();
        assert_eq!(rho, 0.0);
        let s = sample_eguchi_hanson(a, 1e-14, 0.0).unwrap();
        assert!(s.g.is_positive_definite() || s.g.det() >= 0.0);
    }
}
