//! Counter-based Gaussian noise streams.
//!
//! Every step of every trajectory draws its randomness from a fixed address
//! `(master_seed, trajectory_index, step_index)`: the master seed keys a
//! ChaCha12 generator, the trajectory index selects its stream, and the step
//! index selects the word position inside the stream. Each step consumes a
//! fixed budget of four 64-bit words, so increments can be produced
//! sequentially or by random access with identical results, independent of
//! scheduling or worker count.
//!
//! The four words become four standard Gaussians via Box-Muller (fixed
//! consumption; rejection samplers would break the counter alignment), and
//! the Gaussians become the joint increment pair per coordinate `k`:
//!
//! ```text
//! dW^k = U1^k sqrt(D),   dZ^k = D^{3/2} (U1^k + U2^k / sqrt(3)) / 2
//! ```
//!
//! which reproduces the exact joint law of the Brownian increment and its
//! time integral over one step: Var dW = D, Var dZ = D^3/3, Cov = D^2/2.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// Words of ChaCha output consumed per step (4 u64 = 8 32-bit words).
const WORDS_PER_STEP: u128 = 8;

/// Stream index reserved for auxiliary draws (starting points etc.) so they
/// can never collide with trajectory noise streams.
pub const AUX_STREAM_BASE: u64 = 1 << 62;

/// Brownian increment and time-integrated increment over one step.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NoiseIncrement {
    pub dw: [f64; 2],
    pub dz: [f64; 2],
}

impl NoiseIncrement {
    pub fn zero() -> Self {
        NoiseIncrement::default()
    }

    pub fn negated(self) -> Self {
        NoiseIncrement {
            dw: [-self.dw[0], -self.dw[1]],
            dz: [-self.dz[0], -self.dz[1]],
        }
    }

    /// Scales four standard Gaussians `[U1^1, U2^1, U1^2, U2^2]` into the
    /// joint increment for time step `delta`.
    pub fn from_gaussians(g: [f64; 4], delta: f64) -> Self {
        let sqrt_delta = delta.sqrt();
        let z_scale = 0.5 * delta * sqrt_delta;
        let inv_sqrt3 = 1.0 / 3.0_f64.sqrt();
        NoiseIncrement {
            dw: [g[0] * sqrt_delta, g[2] * sqrt_delta],
            dz: [
                z_scale * (g[0] + inv_sqrt3 * g[1]),
                z_scale * (g[2] + inv_sqrt3 * g[3]),
            ],
        }
    }
}

#[inline]
fn u64_to_open_unit(u: u64) -> f64 {
    // 53 significant bits, offset by half an ulp so the result is in (0, 1);
    // Box-Muller needs log of a strictly positive number.
    ((u >> 11) as f64 + 0.5) * (1.0 / 9007199254740992.0)
}

#[inline]
fn box_muller(u1: f64, u2: f64) -> (f64, f64) {
    let mag = (-2.0 * u1.ln()).sqrt();
    let ang = 2.0 * std::f64::consts::PI * u2;
    (mag * ang.cos(), mag * ang.sin())
}

/// A source of per-step noise increments. Implementations must be pure
/// functions of `step_index` (any internal state is a caching detail only).
pub trait NoiseSource {
    fn increment(&mut self, step_index: u64) -> NoiseIncrement;
}

/// The deterministic counter-based stream for one trajectory.
#[derive(Clone, Debug)]
pub struct CounterNoise {
    rng: ChaCha12Rng,
    delta: f64,
    next_step: u64,
}

/// Stream of the four standard Gaussians for trajectory `trajectory_index`
/// under `master_seed`, scaled for time step `delta`. Calling
/// [`NoiseSource::increment`] with the same step index always yields the
/// same increment, regardless of call order.
pub fn make_noise_stream(master_seed: u64, trajectory_index: u64, delta: f64) -> CounterNoise {
    let mut rng = ChaCha12Rng::seed_from_u64(master_seed);
    rng.set_stream(trajectory_index);
    rng.set_word_pos(0);
    CounterNoise { rng, delta, next_step: 0 }
}

impl CounterNoise {
    /// The four standard Gaussians addressed by `step_index`.
    pub fn gaussians(&mut self, step_index: u64) -> [f64; 4] {
        if step_index != self.next_step {
            self.rng.set_word_pos(u128::from(step_index) * WORDS_PER_STEP);
        }
        let u = [
            u64_to_open_unit(self.rng.next_u64()),
            u64_to_open_unit(self.rng.next_u64()),
            u64_to_open_unit(self.rng.next_u64()),
            u64_to_open_unit(self.rng.next_u64()),
        ];
        self.next_step = step_index + 1;
        let (g0, g1) = box_muller(u[0], u[1]);
        let (g2, g3) = box_muller(u[2], u[3]);
        [g0, g1, g2, g3]
    }
}

impl NoiseSource for CounterNoise {
    fn increment(&mut self, step_index: u64) -> NoiseIncrement {
        NoiseIncrement::from_gaussians(self.gaussians(step_index), self.delta)
    }
}

/// Identically-zero noise; reduces the integrator to the deterministic
/// drift flow (test hook).
#[derive(Clone, Copy, Debug, Default)]
pub struct ZeroNoise;

impl NoiseSource for ZeroNoise {
    fn increment(&mut self, _step_index: u64) -> NoiseIncrement {
        NoiseIncrement::zero()
    }
}

/// Sign-flipped view of another source; with an odd drift this maps each
/// path exactly onto its antipodal mirror.
#[derive(Clone, Debug)]
pub struct NegatedNoise<S>(pub S);

impl<S: NoiseSource> NoiseSource for NegatedNoise<S> {
    fn increment(&mut self, step_index: u64) -> NoiseIncrement {
        self.0.increment(step_index).negated()
    }
}

/// `n` points drawn uniformly from the axis-aligned box `[min, max]`,
/// deterministically from the master seed. Uses a reserved stream so the
/// draws are independent of every trajectory's noise.
pub fn uniform_box_samples(
    master_seed: u64,
    n: usize,
    min: [f64; 2],
    max: [f64; 2],
) -> Vec<[f64; 2]> {
    let mut rng = ChaCha12Rng::seed_from_u64(master_seed);
    rng.set_stream(AUX_STREAM_BASE);
    (0..n)
        .map(|_| {
            let u = u64_to_open_unit(rng.next_u64());
            let v = u64_to_open_unit(rng.next_u64());
            [min[0] + u * (max[0] - min[0]), min[1] + v * (max[1] - min[1])]
        })
        .collect()
}
