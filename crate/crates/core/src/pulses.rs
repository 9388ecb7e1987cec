//! Analytic pulse envelopes and the two temporal scenarios.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::C64;

/// Gaussian pulse, `duration` being the FWHM of |Ω|².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSpec {
    /// Peak Rabi frequency, rad/s.
    pub peak: C64,
    /// Center time, s.
    pub center: f64,
    /// Intensity FWHM, s.
    pub duration: f64,
}

impl PulseSpec {
    pub fn off() -> Self {
        Self {
            peak: C64::default(),
            center: 0.0,
            duration: 1.0,
        }
    }

    pub fn is_off(&self) -> bool {
        self.peak.norm() == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::Config("pulse duration must be > 0".into()));
        }
        if !(self.peak.re.is_finite() && self.peak.im.is_finite() && self.center.is_finite()) {
            return Err(Error::Config("pulse peak and center must be finite".into()));
        }
        Ok(())
    }

    /// ∫|Ω(t)|² dt over the real line.
    pub fn intensity_integral(&self) -> f64 {
        self.peak.norm_sqr() * self.duration * (std::f64::consts::PI / (4.0 * LN_2)).sqrt()
    }
}

/// Ω(t) = Ω₀ exp(−2 ln2 (t−t₀)²/τ_p²).
pub fn gaussian_envelope(spec: &PulseSpec, t: f64) -> C64 {
    let x = (t - spec.center) / spec.duration;
    spec.peak * (-2.0 * LN_2 * x * x).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    /// Optical pair prepares the coherence, the IR probe follows.
    Sequential,
    /// Counter-intuitive ordering: Ω₂ precedes Ω₁.
    Stirap,
}

/// Boundary pulses at z = 0. Field 4 is generated in the medium and is
/// identically zero at the input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub pulses: [PulseSpec; 3],
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        for p in &self.pulses {
            p.validate()?;
        }
        let [p1, p2, p3] = &self.pulses;
        match self.kind {
            ScenarioKind::Sequential => {
                let latest = p1.center.max(p2.center);
                if !p3.is_off() && p3.center < latest {
                    return Err(Error::Config(format!(
                        "sequential ordering violated: probe center {:e} s precedes optical pulses at {:e} s",
                        p3.center, latest
                    )));
                }
            }
            ScenarioKind::Stirap => {
                if !(p2.center < p1.center) {
                    return Err(Error::Config(format!(
                        "stirap ordering violated: Ω₂ center ({:e} s) must precede Ω₁ center ({:e} s)",
                        p2.center, p1.center
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn shortest_duration(&self) -> Option<f64> {
        self.pulses
            .iter()
            .filter(|p| !p.is_off())
            .map(|p| p.duration)
            .reduce(f64::min)
    }
}

/// Rabi frequencies of all four fields at the cell input.
pub fn boundary_fields(scenario: &ScenarioSpec, t: f64) -> [C64; 4] {
    let [p1, p2, p3] = &scenario.pulses;
    [
        gaussian_envelope(p1, t),
        gaussian_envelope(p2, t),
        gaussian_envelope(p3, t),
        C64::default(),
    ]
}

/// FWHM of the dark-state |ρ_bc| for two equal-peak Gaussians of FWHM
/// `duration` separated by `delay`: |ρ_bc| = ½ sech(4 ln2 · delay · t / τ²).
pub fn stirap_coherence_window(duration: f64, delay: f64) -> f64 {
    2.0 * 2f64.acosh() * duration * duration / (4.0 * LN_2 * delay)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pulse(peak: f64, center: f64, duration: f64) -> PulseSpec {
        PulseSpec {
            peak: C64::new(peak, 0.0),
            center,
            duration,
        }
    }

    #[test]
    fn envelope_examples() {
        let p = pulse(2.0, 1.0, 0.5);
        assert_eq!(gaussian_envelope(&p, 1.0), C64::new(2.0, 0.0));
        for t in [0.75, 1.25] {
            let v = gaussian_envelope(&p, t).re;
            assert!((v - 2.0 / 2f64.sqrt()).abs() < 1e-15);
        }
        assert!(gaussian_envelope(&p, 1.0 + 10.1 * 0.5).norm() < 1e-30 * 2.0);
    }

    #[test]
    fn grid_integral_matches_closed_form() {
        let p = pulse(3.0e14, 0.0, 150e-15);
        let n = 4001;
        let (t0, t1) = (-1.5e-12, 1.5e-12);
        let dt = (t1 - t0) / (n - 1) as f64;
        let sum: f64 = (0..n)
            .map(|i| {
                let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
                w * gaussian_envelope(&p, t0 + i as f64 * dt).norm_sqr()
            })
            .sum::<f64>()
            * dt;
        let exact = p.intensity_integral();
        assert!(((sum - exact) / exact).abs() < 1e-6);
    }

    #[test]
    fn stirap_ordering_enforced() {
        let mut s = ScenarioSpec {
            kind: ScenarioKind::Stirap,
            pulses: [pulse(1.0, 1.0, 1.0), pulse(1.0, 0.0, 1.0), pulse(0.1, 0.5, 3.0)],
        };
        assert!(s.validate().is_ok());
        s.pulses.swap(0, 1);
        let err = s.validate().unwrap_err().to_string();
        assert!(err.contains("stirap ordering"), "{err}");
    }

    #[test]
    fn sequential_ordering_enforced() {
        let s = ScenarioSpec {
            kind: ScenarioKind::Sequential,
            pulses: [pulse(1.0, 0.0, 1.0), pulse(1.0, 0.0, 1.0), pulse(0.1, -1.0, 1.0)],
        };
        assert!(s.validate().is_err());
    }

    #[test]
    fn boundary_examples() {
        let tau = 150e-15;
        let stirap = ScenarioSpec {
            kind: ScenarioKind::Stirap,
            pulses: [pulse(3e14, tau, tau), pulse(3e14, 0.0, tau), pulse(1e12, 0.5 * tau, 3.0 * tau)],
        };
        assert!(boundary_fields(&stirap, -100.0 * tau).iter().all(|w| w.norm() == 0.0));
        let mid = boundary_fields(&stirap, 0.5 * tau);
        assert!((mid[0].norm() - mid[1].norm()).abs() < 1e-12 * mid[0].norm());
        assert_eq!(mid[3], C64::default());

        let seq = ScenarioSpec {
            kind: ScenarioKind::Sequential,
            pulses: [pulse(3e14, 0.0, tau), pulse(3e14, 0.0, tau), pulse(1e12, 20.0 * tau, tau)],
        };
        let at_probe = boundary_fields(&seq, 20.0 * tau);
        assert!(at_probe[0].norm() < 1e-100);
        assert_eq!(at_probe[2], C64::new(1e12, 0.0));
    }

    #[test]
    fn coherence_window_matches_dark_state() {
        let (tau, delay) = (1.0, 1.0);
        let w = stirap_coherence_window(tau, delay);
        let p1 = pulse(1.0, delay / 2.0, tau);
        let p2 = pulse(1.0, -delay / 2.0, tau);
        let r = crate::quantum::dark_state_coherence(gaussian_envelope(&p1, w / 2.0), gaussian_envelope(&p2, w / 2.0))
            .unwrap();
        assert!((r.norm() - 0.25).abs() < 1e-12);
    }
}
