//! Classical driving pulse: laboratory parameters, unit conversion, sampling.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Envelope {
    #[default]
    SinSquared,
    /// Linear ramps of `ramp_cycles` optical cycles at each end.
    Trapezoid { ramp_cycles: f64 },
    Flat,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseParams {
    pub wavelength_nm: f64,
    pub intensity_w_cm2: f64,
    pub n_cycles: f64,
    #[serde(default)]
    pub envelope: Envelope,
    #[serde(default)]
    pub cep: f64,
}

impl PulseParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.wavelength_nm > 0.0) {
            return Err(Error::Parameter(format!("wavelength {} nm", self.wavelength_nm)));
        }
        if !(self.intensity_w_cm2 > 0.0) {
            return Err(Error::Parameter(format!("intensity {} W/cm2", self.intensity_w_cm2)));
        }
        if !(self.n_cycles >= 1.0) {
            return Err(Error::Parameter(format!("{} cycles < 1", self.n_cycles)));
        }
        if let Envelope::Trapezoid { ramp_cycles } = self.envelope {
            if !(ramp_cycles >= 0.0 && 2.0 * ramp_cycles <= self.n_cycles) {
                return Err(Error::Parameter(format!(
                    "trapezoid ramps of {ramp_cycles} cycles do not fit in {} cycles",
                    self.n_cycles
                )));
            }
        }
        Ok(())
    }

    /// Duration in a.u.
    pub fn duration(&self) -> f64 {
        let (omega, _) = to_atomic_units(self);
        self.n_cycles * 2.0 * PI / omega
    }

    /// Instantaneous force at time `t` (a.u.).
    pub fn force_at(&self, t: f64) -> f64 {
        let (omega, f0) = to_atomic_units(self);
        let total = self.n_cycles * 2.0 * PI / omega;
        let env = match self.envelope {
            Envelope::Flat => 1.0,
            Envelope::SinSquared => {
                if !(0.0..=total).contains(&t) {
                    0.0
                } else {
                    (PI * t / total).sin().powi(2)
                }
            }
            Envelope::Trapezoid { ramp_cycles } => {
                let ramp = ramp_cycles * 2.0 * PI / omega;
                if !(0.0..=total).contains(&t) {
                    0.0
                } else if ramp == 0.0 {
                    1.0
                } else if t < ramp {
                    t / ramp
                } else if t > total - ramp {
                    (total - t) / ramp
                } else {
                    1.0
                }
            }
        };
        f0 * env * (omega * t + self.cep).sin()
    }
}

/// Laser angular frequency and peak force, both in atomic units.
pub fn to_atomic_units(p: &PulseParams) -> (f64, f64) {
    (
        units::omega_from_wavelength_nm(p.wavelength_nm),
        units::field_from_intensity(p.intensity_w_cm2),
    )
}

/// Force samples `values[n] = F(n dt)` for n = 0..=steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledField {
    pub dt: f64,
    pub values: Vec<f64>,
    pub t_total: f64,
}

impl SampledField {
    /// Identically zero field of the given duration.
    pub fn zero(dt: f64, steps: usize) -> Self {
        Self {
            dt,
            values: vec![0.0; steps + 1],
            t_total: dt * steps as f64,
        }
    }

    /// Constant force, mainly for tests.
    pub fn constant(force: f64, dt: f64, steps: usize) -> Self {
        Self {
            dt,
            values: vec![force; steps + 1],
            t_total: dt * steps as f64,
        }
    }

    pub fn steps(&self) -> usize {
        self.values.len() - 1
    }

    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.dt
    }

    pub fn peak(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Fail unless `dt` resolves angular frequency `omega_max` with 40 samples per period.
pub fn check_resolution(dt: f64, omega_max: f64) -> Result<()> {
    let limit = 2.0 * PI / (40.0 * omega_max);
    if !(dt > 0.0) || dt >= limit {
        return Err(Error::Resolution(format!(
            "dt = {dt} must be below 2π/(40·{omega_max}) = {limit:.5}"
        )));
    }
    Ok(())
}

/// Sample the pulse on a uniform time grid. The step is shrunk so that an integer
/// number of steps spans the pulse exactly.
pub fn sample_pulse(p: &PulseParams, dt: f64) -> Result<SampledField> {
    p.validate()?;
    let (omega, _) = to_atomic_units(p);
    check_resolution(dt, omega)?;
    let total = p.duration();
    let steps = (total / dt - 1e-9).ceil().max(1.0) as usize;
    let dt = total / steps as f64;
    let values = (0..=steps).map(|n| p.force_at(n as f64 * dt)).collect();
    Ok(SampledField {
        dt,
        values,
        t_total: total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pulse(envelope: Envelope) -> PulseParams {
        PulseParams {
            wavelength_nm: 2227.0,
            intensity_w_cm2: 1e13,
            n_cycles: 6.0,
            envelope,
            cep: 0.0,
        }
    }

    #[test]
    fn atomic_unit_conversion() {
        let (w, f0) = to_atomic_units(&pulse(Envelope::Flat));
        assert!((w - 45.5633 / 2227.0).abs() < 1e-6);
        assert!((w - 0.02046).abs() < 1e-5);
        assert!((f0 - 0.01688).abs() < 1e-5);
        let p = PulseParams {
            wavelength_nm: 1945.0,
            intensity_w_cm2: 4e13,
            ..pulse(Envelope::Flat)
        };
        let (_, f0) = to_atomic_units(&p);
        assert!((f0 - 3.4e-2).abs() < 1e-3);
    }

    #[test]
    fn flat_pulse_is_a_sine() {
        let p = pulse(Envelope::Flat);
        let s = sample_pulse(&p, 0.1).unwrap();
        let (w, f0) = to_atomic_units(&p);
        for (n, v) in s.values.iter().enumerate() {
            assert!((*v - f0 * (w * n as f64 * s.dt).sin()).abs() < 1e-12 * f0);
        }
    }

    #[test]
    fn sin_squared_vanishes_at_ends_and_has_no_dc() {
        let p = pulse(Envelope::SinSquared);
        let s = sample_pulse(&p, 0.05).unwrap();
        assert!(s.values[0].abs() < 1e-14);
        assert!(s.values.last().unwrap().abs() < 1e-14);
        assert!((s.t_total - 1842.6).abs() < 1.0);
        let area: f64 = s.values.iter().sum::<f64>() * s.dt;
        let (_, f0) = to_atomic_units(&p);
        assert!(area.abs() < 1e-10 * f0 * s.t_total);
    }

    #[test]
    fn coarse_step_is_rejected() {
        assert!(matches!(
            sample_pulse(&pulse(Envelope::SinSquared), 10.0),
            Err(Error::Resolution(_))
        ));
    }
}
