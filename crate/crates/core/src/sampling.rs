//! Seeded parameter sampling away from the poles of the formulas.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::linalg::{C64, ONE};

/// Moduli of sampled complex parameters lie in this range.
pub const MODULUS_RANGE: (f64, f64) = (0.2, 0.9);
/// Minimum distance from every pole of the formulas in use.
pub const POLE_MARGIN: f64 = 0.05;
const MAX_ATTEMPTS: usize = 1_000;

/// Parameters of one sample. `zeta` holds three spectral parameters; the
/// checks use their ratios.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Sample {
    pub q: C64,
    pub zeta: [C64; 3],
    pub r: [C64; 3],
}

/// User-fixed values; `None` entries are drawn.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Fixed {
    pub q: Option<C64>,
    pub zeta: [Option<C64>; 3],
    pub r: Option<[C64; 3]>,
}

impl Sample {
    /// Smallest of `|1 - q^2|` and, for every ratio `z = zeta_a/zeta_b`,
    /// `|1 - z^2|`, `|1 - q^2 z^2|`, `|1 - z^2 r1 r2|`, `|1 - q^2 z^2 r1 r2|`.
    pub fn pole_distance(&self) -> f64 {
        let q2 = self.q * self.q;
        let rr = self.r[1] * self.r[2];
        let mut d = (ONE - q2).norm();
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            let z2 = (self.zeta[a] / self.zeta[b]).powi(2);
            for v in [z2, q2 * z2, z2 * rr, q2 * z2 * rr] {
                d = d.min((ONE - v).norm());
            }
        }
        d
    }
}

/// A deterministic stream of draws for one `(seed, stream)` pair.
pub struct Sampler {
    rng: ChaCha8Rng,
    pub warnings: Vec<String>,
}

impl Sampler {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Sampler {
            rng,
            warnings: Vec::new(),
        }
    }

    /// Modulus uniform in [`MODULUS_RANGE`], phase uniform.
    pub fn complex(&mut self) -> C64 {
        let m = self.rng.gen_range(MODULUS_RANGE.0..=MODULUS_RANGE.1);
        let phase = self.rng.gen_range(0.0..std::f64::consts::TAU);
        C64::from_polar(m, phase)
    }

    pub fn real(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.gen_range(lo..hi)
    }

    fn draw(&mut self, fixed: &Fixed) -> Sample {
        Sample {
            q: fixed.q.unwrap_or_else(|| self.complex()),
            zeta: [0, 1, 2].map(|k| fixed.zeta[k].unwrap_or_else(|| self.complex())),
            r: fixed
                .r
                .unwrap_or_else(|| [self.complex(), self.complex(), self.complex()]),
        }
    }

    /// Draws the free parameters, redrawing until every pole is at least
    /// [`POLE_MARGIN`] away. If no draw of the free parameters can get the
    /// fixed ones clear of a pole, a warning is recorded and the fixed
    /// values are drawn too.
    pub fn sample(&mut self, fixed: &Fixed) -> Sample {
        let mut fixed = *fixed;
        let mut attempts = 0;
        loop {
            let s = self.draw(&fixed);
            if s.pole_distance() > POLE_MARGIN {
                return s;
            }
            attempts += 1;
            if attempts == MAX_ATTEMPTS && fixed != Fixed::default() {
                self.warnings.push(format!(
                    "fixed parameters lie within {POLE_MARGIN} of a pole; resampling them"
                ));
                fixed = Fixed::default();
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn same_seed_same_draws() {
        let f = Fixed::default();
        let a: Vec<Sample> = (0..5).map(|_| Sampler::new(7, 3).sample(&f)).collect();
        assert!(a.windows(2).all(|w| w[0] == w[1]));
        assert_ne!(Sampler::new(7, 3).sample(&f), Sampler::new(7, 4).sample(&f));
    }

    #[test]
    fn near_pole_q_is_resampled_with_warning() {
        let fixed = Fixed {
            q: Some(C64::new(0.99, 0.0)),
            ..Fixed::default()
        };
        let mut s = Sampler::new(1, 0);
        let sample = s.sample(&fixed);
        assert_eq!(s.warnings.len(), 1);
        assert!(sample.q.norm() <= MODULUS_RANGE.1);
        assert!(sample.pole_distance() > POLE_MARGIN);
    }

    #[test]
    fn fixed_values_are_kept_when_safe() {
        let fixed = Fixed {
            q: Some(C64::new(0.5, 0.0)),
            r: Some([C64::new(1.2, 0.0), C64::new(0.3, 0.0), C64::new(0.15, 0.0)]),
            ..Fixed::default()
        };
        let mut s = Sampler::new(2, 0);
        let sample = s.sample(&fixed);
        assert!(s.warnings.is_empty());
        assert_eq!(sample.q, C64::new(0.5, 0.0));
        assert_eq!(sample.r[0], C64::new(1.2, 0.0));
    }

    proptest! {
        #[test]
        fn draws_respect_annulus_and_poles(seed in 0u64..1000, stream in 0u64..8) {
            let s = Sampler::new(seed, stream).sample(&Fixed::default());
            for z in [s.q, s.zeta[0], s.zeta[1], s.zeta[2], s.r[0]] {
                prop_assert!(z.norm() >= MODULUS_RANGE.0 - 1e-12 && z.norm() <= MODULUS_RANGE.1 + 1e-12);
            }
            prop_assert!(s.pole_distance() > POLE_MARGIN);
        }
    }
}
