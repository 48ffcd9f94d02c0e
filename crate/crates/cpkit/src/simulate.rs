// SPDX-License-Identifier: MIT OR Apache-2.0

//! Synthetic piecewise-constant series with Gaussian or AR(1) noise.
//!
//! Signals place `n_bkps` changepoints at equally spaced intervals with
//! alternating segment levels (`baseline`, `baseline + effect_size * sigma`,
//! `baseline`, ...). Noise is either i.i.d. Gaussian or a stationary AR(1)
//! process whose innovations are scaled to keep the marginal variance at
//! `sigma^2` for every `phi`.

use crate::error::Error;
use crate::rng::{self, stream};
use crate::series::{TimeSeries, MIN_SEG_LEN};
use rand_distr::{Distribution, Normal};

/// Transition shape used by the early-warning-signal comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    /// Externally forced transition: a pure mean step.
    Step,
    /// Internally driven transition: the mean step is preceded by rising
    /// noise, the classic critical-slowing-down signature. The noise SD
    /// climbs linearly to [`RAMP_PEAK`]` * sigma` over the
    /// [`RAMP_STEPS`] observations before each changepoint.
    InternalRamp,
}

/// Number of observations before each changepoint over which the
/// internal-ramp scenario inflates the noise SD.
pub const RAMP_STEPS: usize = 4;

/// Peak noise-SD multiplier reached on the observation immediately before a
/// changepoint in the internal-ramp scenario.
pub const RAMP_PEAK: f64 = 2.5;

/// Generative recipe for one synthetic series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioSpec {
    pub n: usize,
    pub effect_size: f64,
    pub n_bkps: usize,
    pub sigma: f64,
    pub baseline: f64,
    pub phi: f64,
    pub scenario: Scenario,
}

impl ScenarioSpec {
    /// Paper-calibrated defaults: sigma 5, baseline 35, i.i.d. noise, step
    /// transitions.
    pub fn new(n: usize, effect_size: f64, n_bkps: usize) -> Self {
        ScenarioSpec {
            n,
            effect_size,
            n_bkps,
            sigma: 5.0,
            baseline: 35.0,
            phi: 0.0,
            scenario: Scenario::Step,
        }
    }

    pub fn with_phi(mut self, phi: f64) -> Self {
        self.phi = phi;
        self
    }

    pub fn with_scenario(mut self, scenario: Scenario) -> Self {
        self.scenario = scenario;
        self
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.n < 4 {
            return Err(Error::scenario(format!("n must be >= 4, got {}", self.n)));
        }
        if !(self.sigma > 0.0) {
            return Err(Error::scenario("sigma must be positive"));
        }
        if !(0.0..1.0).contains(&self.phi) {
            return Err(Error::scenario(format!(
                "phi must be in [0, 1), got {}",
                self.phi
            )));
        }
        if self.effect_size < 0.0 {
            return Err(Error::scenario("effect_size must be >= 0"));
        }
        if self.n_bkps + 1 > self.n / MIN_SEG_LEN {
            return Err(Error::scenario(format!(
                "{} breakpoints infeasible at n = {}",
                self.n_bkps, self.n
            )));
        }
        Ok(())
    }
}

/// Deterministic replicate identity: the full generation pipeline is a pure
/// function of this pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub replicate_index: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, replicate_index: u64) -> Self {
        SeedSpec {
            master_seed,
            replicate_index,
        }
    }
}

/// True changepoint locations: `b_i = round(n * i / (K + 1))`, half-up.
pub fn true_breakpoints(n: usize, n_bkps: usize) -> Vec<usize> {
    (1..=n_bkps)
        .map(|i| (n as f64 * i as f64 / (n_bkps + 1) as f64 + 0.5).floor() as usize)
        .collect()
}

/// Noiseless mean vector plus the true breakpoint list.
pub fn make_signal(spec: &ScenarioSpec) -> Result<(Vec<f64>, Vec<usize>), Error> {
    spec.validate()?;
    let bps = true_breakpoints(spec.n, spec.n_bkps);
    let mut prev = 0usize;
    for &b in bps.iter().chain(std::iter::once(&spec.n)) {
        if b - prev < MIN_SEG_LEN {
            return Err(Error::scenario(format!(
                "placed segment [{prev}, {b}) shorter than {MIN_SEG_LEN}"
            )));
        }
        prev = b;
    }
    let shift = spec.effect_size * spec.sigma;
    let mut signal = vec![spec.baseline; spec.n];
    let mut boundaries = vec![0usize];
    boundaries.extend_from_slice(&bps);
    boundaries.push(spec.n);
    for (seg_idx, w) in boundaries.windows(2).enumerate() {
        if seg_idx % 2 == 1 {
            for v in &mut signal[w[0]..w[1]] {
                *v = spec.baseline + shift;
            }
        }
    }
    Ok((signal, bps))
}

/// i.i.d. Gaussian noise, deterministic per seed.
pub fn gen_noise_iid(n: usize, sigma: f64, seed: SeedSpec) -> Result<Vec<f64>, Error> {
    if n == 0 {
        return Err(Error::argument("noise length must be >= 1"));
    }
    if sigma < 0.0 {
        return Err(Error::argument("sigma must be >= 0"));
    }
    let mut rng = rng::derive_rng(seed.master_seed, &[stream::NOISE, seed.replicate_index]);
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::argument(e.to_string()))?;
    Ok((0..n).map(|_| normal.sample(&mut rng)).collect())
}

/// Stationary AR(1) noise: `e_0 ~ N(0, sigma^2)` and
/// `e_t = phi * e_{t-1} + eta_t` with `eta_t ~ N(0, sigma^2 (1 - phi^2))`,
/// so the marginal variance is `sigma^2` at every t. For `phi = 0` the draw
/// sequence coincides with [`gen_noise_iid`].
pub fn gen_noise_ar1(n: usize, sigma: f64, phi: f64, seed: SeedSpec) -> Result<Vec<f64>, Error> {
    if n == 0 {
        return Err(Error::argument("noise length must be >= 1"));
    }
    if sigma < 0.0 {
        return Err(Error::argument("sigma must be >= 0"));
    }
    if !(0.0..1.0).contains(&phi) {
        return Err(Error::argument(format!("phi must be in [0, 1), got {phi}")));
    }
    let mut rng = rng::derive_rng(seed.master_seed, &[stream::NOISE, seed.replicate_index]);
    let marginal = Normal::new(0.0, sigma).map_err(|e| Error::argument(e.to_string()))?;
    let innovation = Normal::new(0.0, sigma * (1.0 - phi * phi).sqrt())
        .map_err(|e| Error::argument(e.to_string()))?;
    let mut out = Vec::with_capacity(n);
    let mut prev = marginal.sample(&mut rng);
    out.push(prev);
    for _ in 1..n {
        prev = phi * prev + innovation.sample(&mut rng);
        out.push(prev);
    }
    Ok(out)
}

/// Compose signal and noise into a series, returning the true breakpoints.
pub fn gen_series(spec: &ScenarioSpec, seed: SeedSpec) -> Result<(TimeSeries, Vec<usize>), Error> {
    let (signal, bps) = make_signal(spec)?;
    let mut noise = gen_noise_ar1(spec.n, spec.sigma, spec.phi, seed)?;
    if spec.scenario == Scenario::InternalRamp {
        for (e, m) in noise.iter_mut().zip(noise_multipliers(spec.n, &bps)) {
            *e *= m;
        }
    }
    let values: Vec<f64> = signal.iter().zip(&noise).map(|(s, e)| s + e).collect();
    Ok((TimeSeries::new(values)?, bps))
}

/// Per-observation noise-SD multipliers for the internal-ramp scenario.
pub fn noise_multipliers(n: usize, breakpoints: &[usize]) -> Vec<f64> {
    let mut mult: Vec<f64> = vec![1.0; n];
    for &b in breakpoints {
        for j in 0..RAMP_STEPS {
            let offset = RAMP_STEPS - j;
            if b >= offset {
                let t = b - offset;
                if t < n {
                    let m = 1.0 + (RAMP_PEAK - 1.0) * (j + 1) as f64 / RAMP_STEPS as f64;
                    mult[t] = mult[t].max(m);
                }
            }
        }
    }
    mult
}
