use crate::fespace::Coefficients;
use crate::{Error, Result};

const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
const BOLTZMANN: f64 = 1.380_649e-23;
const AVOGADRO: f64 = 6.022_140_76e23;

pub const DEFAULT_TEMPERATURE: f64 = 298.15;

/// `e_c^2 / (4 pi eps_0 k_B T)` in Angstrom at [`DEFAULT_TEMPERATURE`].
pub const DEFAULT_COULOMB_CONSTANT: f64 = 560.459_322_147_534_4;

/// Vacuum Bjerrum length `e_c^2 / (4 pi eps_0 k_B T)` in Angstrom.
pub fn coulomb_constant(temperature: f64) -> f64 {
    let e2 = ELEMENTARY_CHARGE * ELEMENTARY_CHARGE;
    e2 / (4.0 * std::f64::consts::PI * VACUUM_PERMITTIVITY * BOLTZMANN * temperature) * 1e10
}

/// `k_B T N_A` in kcal/mol.
pub fn kbt_kcal_per_mol(temperature: f64) -> f64 {
    BOLTZMANN * AVOGADRO * temperature / 4184.0
}

/// Outer boundary data on the truncated domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BcKind {
    /// `u_r = 0`.
    Zero,
    /// Screened Coulomb potential of the charges in the solvent, minus
    /// `u_c`.
    Screened,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PbeParameters {
    pub eps_m: f64,
    pub eps_s: f64,
    /// Modified Debye-Hueckel parameter in the solvent, 1/Angstrom.
    pub kappa_s: f64,
    /// Coulomb prefactor `C` in Angstrom.
    pub coulomb: f64,
    /// Temperature in K, used only to report energies in kcal/mol.
    pub temperature: f64,
    pub bc: BcKind,
}

impl Default for PbeParameters {
    fn default() -> Self {
        Self {
            eps_m: 2.0,
            eps_s: 80.0,
            kappa_s: 0.0,
            coulomb: DEFAULT_COULOMB_CONSTANT,
            temperature: DEFAULT_TEMPERATURE,
            bc: BcKind::Screened,
        }
    }
}

impl PbeParameters {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps_m > 0.0 && self.eps_m <= self.eps_s && self.eps_s.is_finite()) {
            return Err(Error::Parameter(format!(
                "need 0 < eps_m <= eps_s, got eps_m = {}, eps_s = {}",
                self.eps_m, self.eps_s
            )));
        }
        if !(self.kappa_s >= 0.0 && self.kappa_s.is_finite()) {
            return Err(Error::Parameter(format!("kappa_s = {} must be >= 0", self.kappa_s)));
        }
        if !(self.coulomb > 0.0 && self.coulomb.is_finite()) {
            return Err(Error::Parameter(format!("Coulomb constant {} must be > 0", self.coulomb)));
        }
        if !(self.temperature > 0.0) {
            return Err(Error::Parameter(format!("temperature {} must be > 0", self.temperature)));
        }
        Ok(())
    }

    /// Decay rate of the screened potential, `kappa_s / sqrt(eps_s)`.
    pub fn screening_length_inv(&self) -> f64 {
        self.kappa_s / self.eps_s.sqrt()
    }

    pub fn kappa2_solvent(&self) -> f64 {
        self.kappa_s * self.kappa_s
    }

    /// Coefficients of the linearized operator `a(u, v) + (kappa2 u, v)`.
    pub fn coefficients(&self) -> Coefficients {
        Coefficients {
            eps_solute: self.eps_m,
            eps_solvent: self.eps_s,
            kappa2_solute: 0.0,
            kappa2_solvent: self.kappa2_solvent(),
        }
    }

    /// Converts an energy in `k_B T` to kcal/mol.
    pub fn to_kcal_per_mol(&self, energy_kbt: f64) -> f64 {
        energy_kbt * kbt_kcal_per_mol(self.temperature)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_constant_matches_codata() {
        let c = coulomb_constant(DEFAULT_TEMPERATURE);
        assert!((c - DEFAULT_COULOMB_CONSTANT).abs() < 1e-10, "{c}");
        assert!((kbt_kcal_per_mol(DEFAULT_TEMPERATURE) - 0.592_484_949_7).abs() < 1e-9);
    }

    #[test]
    fn parameter_ranges() {
        assert!(PbeParameters::default().validate().is_ok());
        let p = PbeParameters { eps_m: 90.0, ..Default::default() };
        assert!(p.validate().is_err());
        let p = PbeParameters { kappa_s: -1.0, ..Default::default() };
        assert!(p.validate().is_err());
        let p = PbeParameters { coulomb: 0.0, ..Default::default() };
        assert!(p.validate().is_err());
    }
}
