//! Chen-Teo asymptotic data: the moduli (ell, beta), the leading expansion
//! coefficients of e^{2 alpha} and V, and the closed-form mass. The full
//! metric functions live in external references and are not reproduced;
//! only this asymptotic layer ships.

/// Asymptotic data of the Chen-Teo family at (kappa, xi),
/// xi in (1/2, 1/sqrt 2), kappa > 0.
#[derive(Debug, Clone, Copy)]
pub struct ChenTeoData {
    pub kappa: f64,
    pub xi: f64,
    pub ell: f64,
    pub beta: f64,
}

impl ChenTeoData {
    pub fn new(kappa: f64, xi: f64) -> Self {
        let sq = (1.0 - 4.0 * xi.powi(4)).sqrt();
        let ell = 8.0 * kappa.sqrt() * xi.powi(4) / (sq * (2.0 * xi * xi - 2.0 * xi + 1.0).powi(2));
        let beta = (1.0 - xi).powi(2) * sq / (2.0 * kappa.sqrt() * xi * xi);
        ChenTeoData { kappa, xi, ell, beta }
    }

    /// Coefficient A of alpha - alpha_b = A/r + O(r^-2).
    pub fn alpha_coefficient(&self) -> f64 {
        let xi = self.xi;
        (1.0 + 2.0 * xi * xi) * (self.kappa * (1.0 - 4.0 * xi.powi(4))).sqrt()
            / (2.0 * (1.0 - 2.0 * xi * xi))
    }

    /// Coefficient C of V - V_b = C/r + O(r^-2).
    pub fn v_coefficient(&self) -> f64 {
        let xi = self.xi;
        self.kappa.sqrt() * (1.0 + 2.0 * xi * xi).powi(2) / (1.0 - 4.0 * xi.powi(4)).sqrt()
    }

    /// Mass through the resolved ell: 2 pi ell (1 + 2 xi^2)^2 sqrt(kappa) / sqrt(1 - 4 xi^4).
    pub fn mass_from_ell(&self) -> f64 {
        let xi = self.xi;
        2.0 * std::f64::consts::PI * self.ell * (1.0 + 2.0 * xi * xi).powi(2) * self.kappa.sqrt()
            / (1.0 - 4.0 * xi.powi(4)).sqrt()
    }

    /// Mass with ell substituted: 16 pi kappa xi^4 (1 + 2 xi^2)^2
    /// / ((1 - 4 xi^4)(2 xi^2 - 2 xi + 1)^2).
    pub fn mass_raw(&self) -> f64 {
        let xi = self.xi;
        16.0 * std::f64::consts::PI * self.kappa * xi.powi(4) * (1.0 + 2.0 * xi * xi).powi(2)
            / ((1.0 - 4.0 * xi.powi(4)) * (2.0 * xi * xi - 2.0 * xi + 1.0).powi(2))
    }

    /// Mass re-derived from the expansion coefficients: 2 pi ell (4A - C).
    pub fn mass_from_expansion(&self) -> f64 {
        2.0 * std::f64::consts::PI
            * self.ell
            * (4.0 * self.alpha_coefficient() - self.v_coefficient())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mass_forms_agree() {
        for &xi in &[0.51, 0.55, 0.6, 0.65, 0.7] {
            for &kappa in &[0.5, 1.0, 2.0] {
                let ct = ChenTeoData::new(kappa, xi);
                let a = ct.mass_from_ell();
                let b = ct.mass_raw();
                let c = ct.mass_from_expansion();
                assert!(((a - b) / a).abs() < 1e-13, "ell vs raw at xi={xi}");
                assert!(((a - c) / a).abs() < 1e-12, "ell vs expansion at xi={xi}");
                assert!(a > 0.0);
            }
        }
    }
}
