//! The assembled comparison inequality: flux masses minus the integrated
//! defect term, the closed-form Reissner-Nordstrom vs Schwarzschild check,
//! and the P(M, c1) gap function in its two algebraic forms.

use serde::{Deserialize, Serialize};

use crate::defects::{defect_profiles, defect_term, DefectOptions, DefectProfile};
use crate::error::{Error, Result};
use crate::families::{BrillField, FamilyParams, SchwarzschildWeyl};
use crate::mass::{estimate_mass, MassOptions};

/// Where theorem_gap takes its masses from.
#[derive(Debug, Clone)]
pub enum MassSource {
    /// Flux quadrature and extrapolation for both fields.
    Flux(MassOptions),
    /// Closed-form values supplied by the caller.
    Exact { mass_g: f64, mass_o: f64 },
}

#[derive(Debug, Clone)]
pub struct GapOptions {
    pub mass_source: MassSource,
    pub defect_points: usize,
    pub defect: DefectOptions,
    /// Combined numeric budget, relative to the mass scale.
    pub tol_rel: f64,
}

impl Default for GapOptions {
    fn default() -> Self {
        GapOptions {
            mass_source: MassSource::Flux(MassOptions::default()),
            defect_points: 32,
            defect: DefectOptions::default(),
            tol_rel: 2e-3,
        }
    }
}

/// Report of one comparison run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TheoremGapReport {
    pub mass_g: f64,
    pub mass_o: f64,
    pub defect_term: f64,
    /// (mass_g - mass_o) - defect_term; nonnegative on valid inputs.
    pub slack: f64,
    pub equality: bool,
    pub tol_abs: f64,
    pub mass_g_fit_residual: f64,
    pub mass_o_fit_residual: f64,
    pub defect_integrals_g: Vec<f64>,
    pub defect_integrals_o: Vec<f64>,
}

/// Mass gap minus defect term for two fields sharing rod data and class.
pub fn theorem_gap(
    g: &dyn BrillField,
    g_o: &dyn BrillField,
    opts: &GapOptions,
) -> Result<TheoremGapReport> {
    let rods_g = g.rod_data()?;
    let rods_o = g_o.rod_data()?;
    if rods_g.rods != rods_o.rods
        || rods_g.turning_points.len() != rods_o.turning_points.len()
        || rods_g
            .turning_points
            .iter()
            .zip(rods_o.turning_points.iter())
            .any(|(a, b)| (a - b).abs() > 1e-12 * (1.0 + a.abs()))
    {
        return Err(Error::RodMismatch(
            "comparison requires identical rod data sets".into(),
        ));
    }
    if !g.class().compatible(&g_o.class()) {
        return Err(Error::ClassMismatch(
            "comparison requires a shared asymptotic class".into(),
        ));
    }

    let (mass_g, mass_o, res_g, res_o) = match &opts.mass_source {
        MassSource::Flux(mopts) => {
            let eg = estimate_mass(g, &g.class(), mopts)?;
            let eo = estimate_mass(g_o, &g_o.class(), mopts)?;
            (eg.extrapolated, eo.extrapolated, eg.residual, eo.residual)
        }
        MassSource::Exact { mass_g, mass_o } => (*mass_g, *mass_o, 0.0, 0.0),
    };

    let pg = defect_profiles(g, &rods_g, opts.defect_points, &opts.defect)?;
    let po = defect_profiles(g_o, &rods_g, opts.defect_points, &opts.defect)?;
    let dterm = defect_term(&pg, &po)?;

    let slack = (mass_g - mass_o) - dterm;
    let scale = mass_g.abs().max(mass_o.abs()).max(1.0);
    let tol_abs = opts.tol_rel * scale;

    // Equality additionally needs pointwise agreement of the maps.
    let mut sup_dist = 0.0f64;
    if slack.abs() <= tol_abs {
        let bl = g.beta_ell();
        for (rho, z) in [(0.7, 0.0), (2.0, 1.0), (5.0, -3.0)] {
            let a = crate::mass::field_fermi(g, bl, rho, z)?;
            let b = crate::mass::field_fermi(g_o, bl, rho, z)?;
            let pa = crate::geometry::HyperbolicPoint::new(a.0, a.1);
            let pb = crate::geometry::HyperbolicPoint::new(b.0, b.1);
            sup_dist = sup_dist.max(crate::geometry::h2_distance(&pa, &pb));
        }
    }
    Ok(TheoremGapReport {
        mass_g,
        mass_o,
        defect_term: dterm,
        slack,
        equality: slack.abs() <= tol_abs && sup_dist <= 1e-6,
        tol_abs,
        mass_g_fit_residual: res_g,
        mass_o_fit_residual: res_o,
        defect_integrals_g: pg.iter().map(|p| p.integral).collect(),
        defect_integrals_o: po.iter().map(|p| p.integral).collect(),
    })
}

/// The refined mass: flux mass minus 2 pi times the total defect integral.
pub fn bold_mass(mass: f64, profiles: &[DefectProfile]) -> f64 {
    let total: f64 = profiles.iter().map(|p| p.integral).sum();
    mass - 2.0 * std::f64::consts::PI * total
}

/// P(M, c1) in both algebraic forms.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PValue {
    /// M - s + 2 s log(2s/(s + M)), s = sqrt(M^2 - c1).
    pub direct: f64,
    /// 2 e^{-x} s (1 - e^x + x e^x) at x = log(2s/(s + M)).
    pub x_form: f64,
}

impl PValue {
    /// The shared value after the dual-form consistency check.
    pub fn checked(&self) -> Result<f64> {
        let scale = self.direct.abs().max(self.x_form.abs()).max(1.0);
        if (self.direct - self.x_form).abs() > 1e-12 * scale {
            return Err(Error::BadDomain(format!(
                "P forms disagree: {} vs {}",
                self.direct, self.x_form
            )));
        }
        Ok(self.direct)
    }
}

/// The closed-form gap of the Reissner-Nordstrom vs Schwarzschild pair per
/// unit 4 pi ell. Requires c1 <= M^2 and r_plus = M + s > 0.
pub fn rn_vs_schwarzschild_p(m: f64, c1: f64) -> Result<PValue> {
    if !(c1 <= m * m) {
        return Err(Error::InvalidParams(format!("need c1 <= M^2, got M={m}, c1={c1}")));
    }
    let s = (m * m - c1).sqrt();
    if !(m + s > 0.0) {
        return Err(Error::InvalidParams(format!(
            "need r_plus = M + sqrt(M^2 - c1) > 0, got M={m}, c1={c1}"
        )));
    }
    if s == 0.0 {
        // c1 = M^2 limit: x -> -inf, both forms tend to M.
        return Ok(PValue { direct: m, x_form: m });
    }
    let x = (2.0 * s / (s + m)).ln();
    let direct = m - s + 2.0 * s * x;
    let x_form = 2.0 * (-x).exp() * s * (1.0 - x.exp() + x * x.exp());
    Ok(PValue { direct, x_form })
}

/// The comparison pair at mass parameter M and charge c1 < 0: the RN family
/// member (r_plus = M + s) and the Schwarzschild seed of mass parameter s
/// at the same ell, sharing the rod data set.
pub fn rn_comparison_pair(m: f64, c1: f64) -> Result<(FamilyParams, SchwarzschildWeyl)> {
    let s = (m * m - c1).sqrt();
    let r_plus = m + s;
    if !(r_plus > 0.0) {
        return Err(Error::InvalidParams("r_plus must be positive".into()));
    }
    let rn = FamilyParams::ReissnerNordstrom { r_plus, c1 };
    rn.validate()?;
    let ell = r_plus * r_plus / s;
    Ok((rn, SchwarzschildWeyl::new(s, ell)))
}

/// Closed-form slack of the pair: 4 pi ell P(M, c1).
pub fn closed_form_slack(m: f64, c1: f64) -> Result<f64> {
    let p = rn_vs_schwarzschild_p(m, c1)?.checked()?;
    let s = (m * m - c1).sqrt();
    let ell = (m + s) * (m + s) / s;
    Ok(4.0 * std::f64::consts::PI * ell * p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p_zero_on_schwarzschild_line() {
        for m in [0.25, 1.0, 2.0] {
            let p = rn_vs_schwarzschild_p(m, 0.0).unwrap();
            assert!(p.direct.abs() < 1e-12);
            assert!(p.checked().unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn p_closed_form_values() {
        // P(0, -1) = 2 log 2 - 1.
        let p = rn_vs_schwarzschild_p(0.0, -1.0).unwrap().checked().unwrap();
        assert!((p - (2.0 * std::f64::consts::LN_2 - 1.0)).abs() < 1e-13);
        // P(1, -3) = -1 + 4 log(4/3).
        let p = rn_vs_schwarzschild_p(1.0, -3.0).unwrap().checked().unwrap();
        let expect = -1.0 + 4.0 * (4f64 / 3.0).ln();
        assert!((p - expect).abs() < 1e-13);
        assert!((p - 0.150728).abs() < 1e-5);
    }

    #[test]
    fn p_forms_agree_broadly() {
        for i in 0..40 {
            let m = -2.0 + 4.0 * (i as f64) / 39.0;
            for j in 0..40 {
                let c1 = -4.0 + (m * m + 4.0) * (j as f64) / 39.0;
                if let Ok(p) = rn_vs_schwarzschild_p(m, c1) {
                    p.checked().unwrap();
                    assert!(p.direct >= -1e-12, "P({m}, {c1}) = {}", p.direct);
                }
            }
        }
    }

    #[test]
    fn p_domain_errors() {
        assert!(rn_vs_schwarzschild_p(1.0, 2.0).is_err());
        // M < 0 with c1 = 0 gives r_plus = 0.
        assert!(rn_vs_schwarzschild_p(-1.0, 0.0).is_err());
    }

    #[test]
    fn comparison_pair_shares_rod_data() {
        let (rn, sw) = rn_comparison_pair(1.0, -3.0).unwrap();
        let a = rn.rod_data().unwrap();
        let b = sw.rod_data().unwrap();
        assert_eq!(a.rods, b.rods);
        for (x, y) in a.turning_points.iter().zip(b.turning_points.iter()) {
            assert!((x - y).abs() < 1e-12 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn gap_of_identical_fields_is_zero_with_equality() {
        let fam = FamilyParams::Kerr { r_plus: 2.0, a: 1.0 };
        let opts = GapOptions {
            mass_source: MassSource::Exact {
                mass_g: fam.exact_mass(),
                mass_o: fam.exact_mass(),
            },
            ..GapOptions::default()
        };
        let rep = theorem_gap(&fam, &fam, &opts).unwrap();
        assert!(rep.slack.abs() < 1e-10);
        assert!(rep.equality);
    }

    #[test]
    fn gap_rejects_mismatched_rod_data() {
        let a = FamilyParams::Schwarzschild { m: 1.0 };
        let b = FamilyParams::Schwarzschild { m: 1.2 };
        let opts = GapOptions {
            mass_source: MassSource::Exact { mass_g: 0.0, mass_o: 0.0 },
            ..GapOptions::default()
        };
        assert!(matches!(theorem_gap(&a, &b, &opts), Err(Error::RodMismatch(_))));
    }

    #[test]
    fn slack_closed_form_bookkeeping() {
        // mass difference - 2 pi (defect difference) * length = 4 pi ell P.
        let m = 1.0;
        let c1 = -3.0;
        let (rn, sw) = rn_comparison_pair(m, c1).unwrap();
        let s = (m * m - c1).sqrt();
        let ell = sw.ell;
        let mass_diff = rn.exact_mass() - 4.0 * std::f64::consts::PI * s * ell;
        let defect = -sw.bolt_defect() * 2.0 * std::f64::consts::PI * (2.0 * ell * s);
        let slack = mass_diff - defect;
        let expect = closed_form_slack(m, c1).unwrap();
        assert!(
            (slack - expect).abs() < 1e-10 * expect.abs().max(1.0),
            "slack {slack} vs closed form {expect}"
        );
    }
}
