//! Monte Carlo capacity estimates from simulated channel draws.
//!
//! The sample set is cut into fixed-size batches. Batch j draws from the
//! ChaCha8 stream j of the configured seed, so (seed, batch) fixes every
//! draw whatever the number of worker threads. Batch statistics are merged
//! in batch order, which makes the result independent of `streams`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{ChannelParams, SnrSampler};
use crate::error::{NumError, Result};

/// Run configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    /// Total number of channel draws.
    pub samples: u64,
    pub seed: u64,
    /// Worker threads.
    pub streams: usize,
    /// Draws per batch; each batch has its own RNG stream.
    pub batch: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig { samples: 1_000_000, seed: 0x5eed, streams: 4, batch: 65_536 }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples < 1000 {
            return Err(NumError::InvalidParams(format!("need at least 1000 samples, got {}", self.samples)));
        }
        if self.streams == 0 {
            return Err(NumError::InvalidParams("streams must be at least 1".into()));
        }
        if self.batch == 0 {
            return Err(NumError::InvalidParams("batch must be at least 1".into()));
        }
        Ok(())
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McResult {
    pub mean: f64,
    /// Sample standard deviation over √samples_used.
    pub std_err: f64,
    pub samples_used: u64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, v: f64) {
        self.n += 1;
        let d = v - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (v - self.mean);
    }

    fn merge(self, o: Moments) -> Moments {
        if self.n == 0 {
            return o;
        }
        if o.n == 0 {
            return self;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        let w = o.n as f64 / n as f64;
        Moments { n, mean: self.mean + d * w, m2: self.m2 + o.m2 + d * d * self.n as f64 * w }
    }
}

/// Mean of `f(γ)` over `cfg.samples` draws of the instantaneous SNR.
pub fn mc_expect<F>(p: &ChannelParams, cfg: &McConfig, f: F) -> Result<McResult>
where
    F: Fn(f64) -> f64 + Sync,
{
    p.validate()?;
    cfg.validate()?;
    let sampler = SnrSampler::new(p)?;
    let batches = cfg.samples.div_ceil(cfg.batch);
    let run = |j: u64| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(j);
        let len = cfg.batch.min(cfg.samples - j * cfg.batch);
        let mut acc = Moments::default();
        for _ in 0..len {
            acc.push(f(sampler.sample(&mut rng)));
        }
        acc
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.streams)
        .build()
        .map_err(|e| NumError::InvalidParams(format!("cannot start worker pool: {e}")))?;
    let parts: Vec<Moments> = pool.install(|| (0..batches).into_par_iter().map(run).collect());
    let total = parts.into_iter().fold(Moments::default(), Moments::merge);
    if !total.mean.is_finite() {
        return Err(NumError::Overflow("Monte Carlo estimator is not finite".into()));
    }
    let var = if total.n > 1 { total.m2 / (total.n - 1) as f64 } else { 0.0 };
    Ok(McResult { mean: total.mean, std_err: (var / total.n as f64).sqrt(), samples_used: total.n })
}

/// E[log₂(1 + γ)].
pub fn mc_ora(p: &ChannelParams, cfg: &McConfig) -> Result<McResult> {
    mc_expect(p, cfg, |g| g.ln_1p() / std::f64::consts::LN_2)
}

fn check_cutoff(gamma0: f64) -> Result<()> {
    if !(gamma0 > 0.0) || !gamma0.is_finite() {
        return Err(NumError::InvalidParams(format!("cut-off must be > 0, got {gamma0}")));
    }
    Ok(())
}

/// E[log₂(γ/γ₀)·1{γ ≥ γ₀}].
pub fn mc_opra(p: &ChannelParams, gamma0: f64, cfg: &McConfig) -> Result<McResult> {
    check_cutoff(gamma0)?;
    mc_expect(p, cfg, |g| if g >= gamma0 { (g / gamma0).log2() } else { 0.0 })
}

/// E[(1/γ₀ − 1/γ)·1{γ ≥ γ₀}], which equals 1 at the optimal cut-off.
pub fn mc_opra_constraint(p: &ChannelParams, gamma0: f64, cfg: &McConfig) -> Result<McResult> {
    check_cutoff(gamma0)?;
    mc_expect(p, cfg, |g| if g >= gamma0 { 1.0 / gamma0 - 1.0 / g } else { 0.0 })
}
