//! Weyl-form rod seeds: Schwarzschild data at arbitrary circle size ell
//! (the equilibrium partner for comparisons; conical on the bolt unless
//! ell = 4m) and the Reissner-Nordstrom comparison form written through
//! sigma = R1 + R2 with the +sqrt(z2^2 + ell^2 c1) convention.

use crate::error::{Error, Result};
use crate::linalg::Sym2;
use crate::rod::{RodDataSet, RodStructure};

use super::prolate::Prolate;
use super::{AsymptoticClass, BrillField, BrillSample};

/// Schwarzschild rod data of mass parameter m embedded at circle size ell.
///
/// Ricci-flat for every ell; the bolt carries the angle defect log(4m/ell),
/// vanishing exactly at the regular value ell = 4m.
#[derive(Debug, Clone, Copy)]
pub struct SchwarzschildWeyl {
    pub mass_param: f64,
    pub ell: f64,
}

impl SchwarzschildWeyl {
    pub fn new(mass_param: f64, ell: f64) -> Self {
        SchwarzschildWeyl { mass_param, ell }
    }

    pub fn rod_half_length(&self) -> f64 {
        self.ell * self.mass_param
    }

    /// Conical defect on the bolt.
    pub fn bolt_defect(&self) -> f64 {
        (4.0 * self.mass_param / self.ell).ln()
    }
}

impl BrillField for SchwarzschildWeyl {
    fn class(&self) -> AsymptoticClass {
        AsymptoticClass::af(0.0, self.ell, 0.5)
    }

    fn rod_data(&self) -> Result<RodDataSet> {
        let z2 = self.rod_half_length();
        Ok(RodDataSet::new(
            vec![-z2, z2],
            vec![RodStructure::new(1, 0), RodStructure::new(0, 1), RodStructure::new(1, 0)],
        ))
    }

    fn sample(&self, rho: f64, z: f64) -> Result<BrillSample> {
        let pr = Prolate::new(self.ell, self.mass_param);
        let pt = pr.invert(rho, z);
        let big_l = 2.0 * self.rod_half_length();
        let sigma = pt.sigma;
        // sigma - L = 4 ell^2 f / (sigma + L) via f = (sigma^2 - L^2)/(4 ell^2).
        let sig_minus = 4.0 * self.ell * self.ell * pt.f / (sigma + big_l);
        if sig_minus <= 0.0 {
            return Err(Error::OutsideDomain { rho, z, reason: "on the bolt".into() });
        }
        let le2 = self.ell * self.ell;
        let g22 = le2 * sig_minus / (sigma + big_l);
        let g11 = rho * rho * (sigma + big_l) / (le2 * sig_minus);
        let alpha = 0.5 * ((sigma + big_l).powi(2) / (4.0 * le2 * pt.r1 * pt.r2)).ln();
        Ok(BrillSample::new(rho, z, alpha, Sym2::new(g11, 0.0, g22)))
    }
}

/// Reissner-Nordstrom data in the Weyl form of the comparison lemma,
/// with 2 sqrt(z2^2 + ell^2 c1) (= 2 ell |m|) entering the conformal factor.
///
/// For m >= 0 this is the instanton itself; for m < 0 it differs from the
/// smooth negative-mass metric by the sign convention and carries the bolt
/// defect of the written formula.
#[derive(Debug, Clone, Copy)]
pub struct ReissnerNordstromWeyl {
    pub r_plus: f64,
    pub c1: f64,
    pub ell: f64,
    /// Rod half-length ell * sqrt(m^2 - c1) = r_plus^2.
    pub z2: f64,
    /// 2 sqrt(z2^2 + ell^2 c1).
    pub shift: f64,
}

impl ReissnerNordstromWeyl {
    pub fn new(r_plus: f64, c1: f64) -> Self {
        let s = (r_plus * r_plus - c1) / (2.0 * r_plus);
        let ell = r_plus * r_plus / s;
        let z2 = ell * s;
        let under = z2 * z2 + ell * ell * c1;
        debug_assert!(under >= -1e-12 * z2 * z2);
        let shift = 2.0 * under.max(0.0).sqrt();
        ReissnerNordstromWeyl { r_plus, c1, ell, z2, shift }
    }

    /// Bolt defect of this form:
    /// (1/2) log((L + shift)^4 / (4 ell^4 L^2)) with L the rod length.
    pub fn bolt_defect(&self) -> f64 {
        let big_l = 2.0 * self.z2;
        0.5 * ((big_l + self.shift).powi(4) / (4.0 * self.ell.powi(4) * big_l * big_l)).ln()
    }
}

impl BrillField for ReissnerNordstromWeyl {
    fn class(&self) -> AsymptoticClass {
        AsymptoticClass::af(0.0, self.ell, 0.5)
    }

    fn rod_data(&self) -> Result<RodDataSet> {
        Ok(RodDataSet::new(
            vec![-self.z2, self.z2],
            vec![RodStructure::new(1, 0), RodStructure::new(0, 1), RodStructure::new(1, 0)],
        ))
    }

    fn sample(&self, rho: f64, z: f64) -> Result<BrillSample> {
        let s = self.z2 / self.ell;
        let pr = Prolate::new(self.ell, s);
        let pt = pr.invert(rho, z);
        let big_l = 2.0 * self.z2;
        let sigma = pt.sigma;
        let sigma2_minus_l2 = 4.0 * self.ell * self.ell * pt.f;
        if sigma2_minus_l2 <= 0.0 {
            return Err(Error::OutsideDomain { rho, z, reason: "on the bolt".into() });
        }
        let le2 = self.ell * self.ell;
        let plus = sigma + self.shift;
        let g22 = le2 * sigma2_minus_l2 / (plus * plus);
        let g11 = rho * rho * plus * plus / (le2 * sigma2_minus_l2);
        let alpha = 0.5 * (plus * plus / (4.0 * le2 * pt.r1 * pt.r2)).ln();
        let _ = big_l;
        Ok(BrillSample::new(rho, z, alpha, Sym2::new(g11, 0.0, g22)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::FamilyParams;

    #[test]
    fn weyl_schwarzschild_matches_family_at_regular_ell() {
        let fam = FamilyParams::Schwarzschild { m: 1.0 };
        let weyl = SchwarzschildWeyl::new(1.0, 4.0);
        for (rho, z) in [(0.5, 0.2), (3.0, -6.0), (1e-3, 1.0), (20.0, 5.0)] {
            let a = fam.sample(rho, z).unwrap();
            let b = weyl.sample(rho, z).unwrap();
            assert!((a.alpha - b.alpha).abs() < 1e-11, "alpha at ({rho},{z})");
            assert!(a.g.sub(&b.g).norm() < 1e-10 * a.g.norm().max(1.0));
        }
    }

    #[test]
    fn weyl_rn_matches_family_for_positive_mass() {
        // m = 1, c1 = -3 corresponds to r_plus = 3 in the family chart.
        let weyl = ReissnerNordstromWeyl::new(3.0, -3.0);
        let fam = FamilyParams::ReissnerNordstrom { r_plus: 3.0, c1: -3.0 };
        for (rho, z) in [(1.0, 0.5), (5.0, -2.0), (1e-2, 3.0)] {
            let a = fam.sample(rho, z).unwrap();
            let b = weyl.sample(rho, z).unwrap();
            assert!((a.alpha - b.alpha).abs() < 1e-10);
            assert!(a.g.sub(&b.g).norm() < 1e-9 * a.g.norm().max(1.0));
        }
    }

    #[test]
    fn weyl_dets_are_rho_squared() {
        let w1 = SchwarzschildWeyl::new(2.0, 0.5);
        let w2 = ReissnerNordstromWeyl::new(1.0, -3.0);
        for (rho, z) in [(0.3, 0.1), (2.0, -1.0), (1e-4, 0.5), (50.0, 10.0)] {
            for s in [w1.sample(rho, z).unwrap(), w2.sample(rho, z).unwrap()] {
                assert!((s.g.det() - rho * rho).abs() < 1e-11 * (rho * rho).max(1.0));
            }
        }
    }

    #[test]
    fn bolt_defect_closed_forms() {
        // Regular ell has no defect.
        assert!(SchwarzschildWeyl::new(1.0, 4.0).bolt_defect().abs() < 1e-15);
        // ell = 1/2, m = 2 partner: log 16.
        let d = SchwarzschildWeyl::new(2.0, 0.5).bolt_defect();
        assert!((d - 16f64.ln()).abs() < 1e-14);
        // The comparison form at (1, -3): 2 log 3.
        let d = ReissnerNordstromWeyl::new(1.0, -3.0).bolt_defect();
        assert!((d - 2.0 * 3f64.ln()).abs() < 1e-13);
    }
}
