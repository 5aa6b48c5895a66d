use crate::math;
use crate::model::EnergyParams;

use super::DeployError;

fn split(depth_abs: f64, d_max: f64) -> (f64, f64) {
    let x = depth_abs / (2.0 * d_max);
    let whole = math::floor(x);
    (whole, x - whole)
}

/// Buoyancy-engine energy for a dive to `depth_abs`.
pub fn energy_buoyancy(depth_abs: f64, p: &EnergyParams) -> Result<f64, DeployError> {
    if depth_abs > p.d_max {
        return Err(DeployError::DepthExceeded(depth_abs));
    }
    let (whole, frac) = split(depth_abs, p.d_max);
    Ok(2.0 * p.m_b / (p.eta_b * p.rho)
        * (whole * p.rho * p.g * p.d_max + p.rho * p.g * frac * p.d_max + whole * p.p0))
}

/// Movable-block energy; quartic in the horizontal travel `d_j0 · cos θ`.
pub fn energy_linear(d_j0: f64, cos_theta: f64, depth_abs: f64, p: &EnergyParams) -> f64 {
    let (whole, _) = split(depth_abs, p.d_max);
    let h = d_j0 * cos_theta;
    (2.0 * whole + 1.0) * p.m_l * p.a_l * p.a_l * (h * h) * (h * h) / p.eta_l
}

/// Heading-change energy.
pub fn energy_rotation(psi0: f64, psi1: f64, p: &EnergyParams) -> f64 {
    let d = psi1 - psi0;
    p.a_s * p.a_s * (d * d) * (d * d) / (2.0 * p.eta_s)
}

/// Hotel-load energy over a trip of `d_j0` at speed `v`.
pub fn energy_electronic(d_j0: f64, v: f64, p: &EnergyParams) -> Result<f64, DeployError> {
    if !(v > 0.0) {
        return Err(DeployError::ZeroVelocity);
    }
    Ok(p.a_e * d_j0 / v)
}

/// How the cruise speed is chosen from the energy budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum VelocityMode {
    /// `min{a_E d / (E_max − fixed), v_max}` as printed.
    Verbatim,
    /// The budget bounds the speed from below, so cruise at `v_max` whenever
    /// that bound is attainable.
    #[default]
    Corrected,
}

/// Cruise speed under the energy budget `e_max`, given the speed-independent
/// energy `fixed_energy`. Both modes check that the total fits the budget.
pub fn optimal_velocity(
    d_j0: f64,
    fixed_energy: f64,
    p: &EnergyParams,
    v_max: f64,
    e_max: f64,
    mode: VelocityMode,
) -> Result<f64, DeployError> {
    let headroom = e_max - fixed_energy;
    if !(headroom > 0.0) {
        return Err(DeployError::EnergyExhausted);
    }
    if d_j0 == 0.0 {
        return Ok(v_max);
    }
    let bound = p.a_e * d_j0 / headroom;
    let v = match mode {
        VelocityMode::Verbatim => bound.min(v_max),
        VelocityMode::Corrected => v_max,
    };
    let total = fixed_energy + energy_electronic(d_j0, v, p)?;
    if total > e_max * (1.0 + 1e-12) {
        return Err(DeployError::EnergyExhausted);
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> EnergyParams {
        EnergyParams::default()
    }

    #[test]
    fn buoyancy_examples() {
        assert_eq!(energy_buoyancy(0.0, &p()).unwrap(), 0.0);
        let e = energy_buoyancy(100.0, &p()).unwrap();
        assert!((e - 0.494 * 9.8 * 100.0 / 0.7).abs() < 1e-9);
        assert!((e - 691.6).abs() < 0.1);
        assert_eq!(energy_buoyancy(201.0, &p()), Err(DeployError::DepthExceeded(201.0)));
    }

    #[test]
    fn linear_examples() {
        assert_eq!(energy_linear(0.0, 1.0, 50.0, &p()), 0.0);
        let a = energy_linear(40.0, 1.0, 50.0, &p());
        assert!((energy_linear(80.0, 1.0, 50.0, &p()) / a - 16.0).abs() < 1e-12);
        let e = energy_linear(100.0, 1.0, 10.0, &p());
        assert!((e - 11.0 * 0.01 * 1e8 / 0.85).abs() < 1e-3);
        assert!((e - 1.294e7).abs() < 1e4);
    }

    #[test]
    fn rotation_examples() {
        assert_eq!(energy_rotation(0.7, 0.7, &p()), 0.0);
        assert!((energy_rotation(0.0, 1.0, &p()) - 0.588).abs() < 1e-3);
        assert_eq!(energy_rotation(0.2, 1.3, &p()), energy_rotation(1.3, 0.2, &p()));
    }

    #[test]
    fn electronic_examples() {
        assert_eq!(energy_electronic(200.0, 1.0, &p()).unwrap(), 300.0);
        assert_eq!(energy_electronic(0.0, 1.0, &p()).unwrap(), 0.0);
        assert_eq!(energy_electronic(200.0, 0.5, &p()).unwrap(), 600.0);
        assert_eq!(energy_electronic(200.0, 0.0, &p()), Err(DeployError::ZeroVelocity));
    }

    #[test]
    fn velocity_examples() {
        assert_eq!(optimal_velocity(200.0, 0.0, &p(), 1.0, 1e30, VelocityMode::Corrected), Ok(1.0));
        // As printed, a huge budget drives the speed towards zero.
        let slow = optimal_velocity(200.0, 0.0, &p(), 1.0, 1e30, VelocityMode::Verbatim).unwrap();
        assert!(slow < 1e-20);
        for mode in [VelocityMode::Verbatim, VelocityMode::Corrected] {
            assert_eq!(optimal_velocity(200.0, 700.0, &p(), 1.0, 1000.0, mode), Ok(1.0));
            assert_eq!(
                optimal_velocity(200.0, 850.0, &p(), 1.0, 1000.0, mode),
                Err(DeployError::EnergyExhausted)
            );
            assert_eq!(
                optimal_velocity(200.0, 1000.0, &p(), 1.0, 1000.0, mode),
                Err(DeployError::EnergyExhausted)
            );
        }
        let v = optimal_velocity(200.0, 0.0, &p(), 1.0, 600.0, VelocityMode::Verbatim).unwrap();
        assert_eq!(v, 0.5);
        assert_eq!(optimal_velocity(200.0, 0.0, &p(), 1.0, 600.0, VelocityMode::Corrected), Ok(1.0));
    }
}
