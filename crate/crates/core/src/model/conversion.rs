//! Photon/electron counting: optical power and photocurrent to quantum efficiency.
//!
//! QE is computed in its counting form, electrons per second over photons per
//! second: `QE = (I / e) / (P * lambda / (h * c))`. Writing it as `I / P` gives
//! a responsivity in A/W, which is the same quantity only up to the factor
//! `h * c / (e * lambda)`.

use super::units::{OpticalPower, Photocurrent, Wavelength, ELEMENTARY_CHARGE, PLANCK, SPEED_OF_LIGHT};
use super::ModelError;

/// Photons per second carried by `power` at `lambda`.
pub fn photon_rate(power: OpticalPower, lambda: Wavelength) -> Result<f64, ModelError> {
    lambda.ensure_in(super::units::ENGINE_RANGE_NM)?;
    Ok(power.watts() * lambda.meters() / (PLANCK * SPEED_OF_LIGHT))
}

/// Quantum efficiency of a detector delivering `current` when illuminated by `power_dut`.
///
/// The result is not clamped: noisy inputs can give values below zero or above one
/// and it is up to the caller to flag them.
pub fn quantum_efficiency(
    current: Photocurrent,
    power_dut: OpticalPower,
    lambda: Wavelength,
) -> Result<f64, ModelError> {
    if power_dut.watts() == 0.0 {
        return Err(ModelError::ZeroPower);
    }
    let photons = photon_rate(power_dut, lambda)?;
    Ok((current.amperes() / ELEMENTARY_CHARGE) / photons)
}

/// Photocurrent produced by `power` at `lambda` on a detector of quantum efficiency `qe`.
pub fn photocurrent_for(qe: f64, power: OpticalPower, lambda: Wavelength) -> Result<f64, ModelError> {
    Ok(qe * photon_rate(power, lambda)? * ELEMENTARY_CHARGE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Independent route: photon energy first, then divide.
    fn oracle_rate(watts: f64, nm: f64) -> f64 {
        let energy_j = 6.626_070_15e-34 * 299_792_458.0 / (nm * 1e-9);
        watts / energy_j
    }

    fn w(nm: f64) -> Wavelength {
        Wavelength::new(nm).unwrap()
    }

    fn p(watts: f64) -> OpticalPower {
        OpticalPower::new(watts).unwrap()
    }

    #[test]
    fn photon_rate_at_410nm() {
        let rate = photon_rate(p(1e-9), w(410.0)).unwrap();
        let expected = oracle_rate(1e-9, 410.0);
        assert!((expected - 2.0640e9).abs() / 2.0640e9 < 1e-4);
        assert!((rate - expected).abs() / expected < 1e-4);
    }

    #[test]
    fn photon_rate_zero_and_linear() {
        assert_eq!(photon_rate(p(0.0), w(500.0)).unwrap(), 0.0);
        let one = photon_rate(p(1e-9), w(410.0)).unwrap();
        let two = photon_rate(p(2e-9), w(410.0)).unwrap();
        assert_eq!(two, 2.0 * one);
    }

    #[test]
    fn photon_rate_rejects_out_of_range() {
        assert!(matches!(
            photon_rate(p(1e-9), w(200.0)),
            Err(ModelError::WavelengthOutOfRange { .. })
        ));
    }

    #[test]
    fn qe_quarter_at_410nm() {
        let qe = quantum_efficiency(Photocurrent::new(8.266e-11).unwrap(), p(1e-9), w(410.0)).unwrap();
        let oracle = (8.266e-11 / 1.602_176_634e-19) / oracle_rate(1e-9, 410.0);
        assert!((qe - oracle).abs() / oracle < 1e-12);
        assert!((qe - 0.25).abs() / 0.25 < 1e-3);
    }

    #[test]
    fn qe_zero_current_and_zero_power() {
        assert_eq!(
            quantum_efficiency(Photocurrent::new(0.0).unwrap(), p(1e-9), w(410.0)).unwrap(),
            0.0
        );
        assert!(matches!(
            quantum_efficiency(Photocurrent::new(1e-11).unwrap(), p(0.0), w(410.0)),
            Err(ModelError::ZeroPower)
        ));
    }

    #[test]
    fn photocurrent_for_inverts_qe() {
        let i = photocurrent_for(0.25, p(1e-9), w(410.0)).unwrap();
        assert!((i - 8.266e-11).abs() / 8.266e-11 < 1e-3);
        let back = quantum_efficiency(Photocurrent::new(i).unwrap(), p(1e-9), w(410.0)).unwrap();
        assert!((back - 0.25).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn qe_invariant_under_common_scaling(
            i in 1e-14f64..1e-8, pw in 1e-13f64..1e-6, nm in 250f64..1100.0, k in 1e-3f64..1e3
        ) {
            let a = quantum_efficiency(Photocurrent::new(i).unwrap(), p(pw), w(nm)).unwrap();
            let b = quantum_efficiency(Photocurrent::new(k * i).unwrap(), p(k * pw), w(nm)).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.abs());
        }

        #[test]
        fn qe_ratio_follows_inverse_wavelength(
            i in 1e-14f64..1e-8, pw in 1e-13f64..1e-6, l1 in 250f64..1100.0, l2 in 250f64..1100.0
        ) {
            let cur = Photocurrent::new(i).unwrap();
            let q1 = quantum_efficiency(cur, p(pw), w(l1)).unwrap();
            let q2 = quantum_efficiency(cur, p(pw), w(l2)).unwrap();
            prop_assert!((q1 / q2 - l2 / l1).abs() <= 1e-12 * (l2 / l1));
        }

        #[test]
        fn photon_rate_linear_in_power_and_wavelength(
            pw in 1e-13f64..1e-6, nm in 250f64..500.0, k in 1.0f64..2.0
        ) {
            let base = photon_rate(p(pw), w(nm)).unwrap();
            let scaled_p = photon_rate(p(k * pw), w(nm)).unwrap();
            let scaled_l = photon_rate(p(pw), w(k * nm)).unwrap();
            prop_assert!((scaled_p - k * base).abs() <= 1e-12 * k * base);
            prop_assert!((scaled_l - k * base).abs() <= 1e-12 * k * base);
        }
    }
}
