use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::Serialize;

/// Marginal distribution of the noise coefficients (mean 0; variance `D²`
/// unless noted).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseDistribution {
    #[default]
    Gaussian,
    /// Uniform on `[-√3 D, √3 D]`.
    Uniform,
    /// Uniform on `[-D, D]`, i.e. variance `D²/3`. Not the default; kept to
    /// compare against runs that read `D` as a half-width.
    #[serde(rename = "uniform_d")]
    UniformHalfWidth,
}

impl NoiseDistribution {
    pub fn as_str(&self) -> &'static str {
        match self {
            NoiseDistribution::Gaussian => "gaussian",
            NoiseDistribution::Uniform => "uniform",
            NoiseDistribution::UniformHalfWidth => "uniform_d",
        }
    }
}

impl std::str::FromStr for NoiseDistribution {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gaussian" => Ok(Self::Gaussian),
            "uniform" => Ok(Self::Uniform),
            "uniform_d" => Ok(Self::UniformHalfWidth),
            _ => Err(format!("unknown noise distribution `{s}` (gaussian|uniform|uniform_d)")),
        }
    }
}

/// Piecewise-constant renewal noise: `ξ₁..ξ₄` are held for one correlation
/// time and redrawn independently at each epoch boundary.
///
/// Draws are consumed strictly in epoch order, so the realisation depends on
/// the seed only, not on the time step used to query it.
#[derive(Debug, Clone)]
pub struct NoiseState {
    xi: [f64; 4],
    epoch: u64,
    amplitude: f64,
    tau: f64,
    distribution: NoiseDistribution,
    rng: ChaCha8Rng,
}

impl NoiseState {
    pub fn new(amplitude: f64, tau: f64, distribution: NoiseDistribution, seed: u64) -> Self {
        let mut s = Self {
            xi: [0.0; 4],
            epoch: 0,
            amplitude,
            tau,
            distribution,
            rng: ChaCha8Rng::seed_from_u64(seed),
        };
        s.xi = s.draw();
        s
    }

    pub(crate) fn restore(
        amplitude: f64,
        tau: f64,
        distribution: NoiseDistribution,
        xi: [f64; 4],
        epoch: u64,
        rng: ChaCha8Rng,
    ) -> Self {
        Self {
            xi,
            epoch,
            amplitude,
            tau,
            distribution,
            rng,
        }
    }

    fn draw(&mut self) -> [f64; 4] {
        if self.amplitude == 0.0 {
            return [0.0; 4];
        }
        let mut xi = [0.0; 4];
        match self.distribution {
            NoiseDistribution::Gaussian => {
                let d = Normal::new(0.0, self.amplitude.abs()).expect("finite amplitude");
                for x in &mut xi {
                    *x = d.sample(&mut self.rng);
                }
            }
            NoiseDistribution::Uniform | NoiseDistribution::UniformHalfWidth => {
                let w = match self.distribution {
                    NoiseDistribution::Uniform => 3f64.sqrt() * self.amplitude.abs(),
                    _ => self.amplitude.abs(),
                };
                let d = Uniform::new_inclusive(-w, w).expect("finite amplitude");
                for x in &mut xi {
                    *x = d.sample(&mut self.rng);
                }
            }
        }
        xi
    }

    /// Epoch containing `t`.
    pub fn epoch_of(&self, t: f64) -> u64 {
        (t / self.tau).floor().max(0.0) as u64
    }

    /// Advances to the epoch containing `t` (monotone in `t`) and returns the
    /// coefficients there.
    pub fn advance_to(&mut self, t: f64) -> [f64; 4] {
        let target = self.epoch_of(t);
        while self.epoch < target {
            self.xi = self.draw();
            self.epoch += 1;
        }
        self.xi
    }

    pub fn xi(&self) -> [f64; 4] {
        self.xi
    }

    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub(crate) fn rng(&self) -> &ChaCha8Rng {
        &self.rng
    }

    /// `Ξ(r) = ξ₁ + ξ₂ r² + ξ₃ r³ + ξ₄ r⁴`.
    pub fn eval(&self, r: f64) -> f64 {
        eval_xi(&self.xi, r)
    }
}

impl PartialEq for NoiseState {
    fn eq(&self, other: &Self) -> bool {
        self.xi == other.xi
            && self.epoch == other.epoch
            && self.amplitude == other.amplitude
            && self.tau == other.tau
            && self.distribution == other.distribution
            && self.rng == other.rng
    }
}

#[inline]
pub fn eval_xi(xi: &[f64; 4], r: f64) -> f64 {
    let r2 = r * r;
    xi[0] + r2 * (xi[1] + r * (xi[2] + r * xi[3]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_amplitude_is_silent() {
        let mut n = NoiseState::new(0.0, 0.02, NoiseDistribution::Gaussian, 1);
        for k in 0..100 {
            assert_eq!(n.advance_to(k as f64 * 0.013), [0.0; 4]);
        }
    }

    #[test]
    fn constant_within_epoch_and_step_independent() {
        let mut a = NoiseState::new(2.0, 0.02, NoiseDistribution::Gaussian, 7);
        let x = a.advance_to(0.041);
        assert_eq!(a.advance_to(0.0599), x);
        assert_ne!(a.advance_to(0.06), x);

        let mut b = NoiseState::new(2.0, 0.02, NoiseDistribution::Gaussian, 7);
        let mut c = NoiseState::new(2.0, 0.02, NoiseDistribution::Gaussian, 7);
        let mut t = 0.0;
        while t < 1.0 {
            b.advance_to(t);
            t += 0.0007;
        }
        assert_eq!(b.advance_to(1.0), c.advance_to(1.0));
    }

    #[test]
    fn uniform_has_requested_variance() {
        let mut n = NoiseState::new(1.5, 1.0, NoiseDistribution::Uniform, 3);
        let m = 20_000;
        let mut s2 = 0.0;
        for e in 0..m {
            let xi = n.advance_to(e as f64);
            s2 += xi.iter().map(|x| x * x).sum::<f64>();
        }
        let var = s2 / (4 * m) as f64;
        assert!((var - 2.25).abs() < 0.06, "{var}");
    }

    #[test]
    fn polynomial_has_no_linear_term() {
        assert_eq!(eval_xi(&[1.0, 2.0, 3.0, 4.0], 0.0), 1.0);
        assert_eq!(eval_xi(&[0.0, 1.0, 0.0, 0.0], 0.5), 0.25);
        assert_eq!(eval_xi(&[1.0, 1.0, 1.0, 1.0], 1.0), 4.0);
    }
}
