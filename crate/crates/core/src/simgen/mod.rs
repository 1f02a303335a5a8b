//! Seeded generators for the simulation designs. A `(scenario, seed)` pair
//! fully determines the generated data.

mod covariates;
mod noise;
mod scenario;

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

pub use covariates::{
    exposure_correlation, exposure_mixing, gen_ar1_gaussian, gen_contaminated, gen_equicorrelated_uniform,
    gen_exposure_correlated, latent_correlation, Columns,
};
pub use noise::Noise;
pub use scenario::{ScenarioId, SimScenario};

use crate::dataset::Dataset;
use crate::error::{Result, ScreenError};
use crate::rng::stream_rng;

const STREAM_LATENT: u64 = 0;
const STREAM_CONTAMINATION: u64 = 1;
const STREAM_EXPOSURE: u64 = 2;
const STREAM_RESPONSE: u64 = 3;

/// Generated data together with the truth it was generated from.
#[derive(Debug, Clone, PartialEq)]
pub struct SimDataset {
    pub dataset: Dataset,
    /// 0-based active column indices.
    pub active_set: Vec<usize>,
    pub scenario: SimScenario,
}

fn g3(u: f64) -> f64 {
    let s = (2.0 * PI * u).sin();
    2.0 * s / (2.0 - s)
}

fn g4(u: f64) -> f64 {
    let (s, c) = (2.0 * PI * u).sin_cos();
    0.1 * s + 0.2 * c + 0.3 * s * s + 0.4 * c.powi(3) + 0.5 * s.powi(3)
}

/// `ln(1 + e^s)` without overflow.
fn ln1p_exp(s: f64) -> f64 {
    if s > 0.0 {
        s + (-s).exp().ln_1p()
    } else {
        s.exp().ln_1p()
    }
}

fn indicator(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

impl ScenarioId {
    /// Noise-free part of the model for one observation. `x(j)` returns the
    /// latent covariate with 0-based index `j`; `z` is ignored by designs
    /// without an exposure. E4's signal excludes the calibrated factor theta.
    pub fn signal(self, x: impl Fn(usize) -> f64, z: f64, beta: &[f64; 4]) -> f64 {
        match self {
            ScenarioId::E1 => 3.0 * x(0) + 3.0 * x(1) + 2.0 * x(2) + 2.0 * x(3) + 2.0 * x(4),
            ScenarioId::E2b1 => {
                5.0 * x(0) * indicator(x(0) < 0.0) + 5.0 * x(1) * indicator(x(1) > 0.0) + 5.0 * x(9).sin()
            }
            ScenarioId::E2b2 => 5.0 * (beta[0] * x(0) + beta[1] * x(1) + beta[2] * x(2) + beta[3] * x(3)),
            ScenarioId::E2b3 => {
                5.0 * beta[0] * x(0) * x(0) + 5.0 * beta[1] * x(1) * x(2) + 5.0 * beta[2] * indicator(x(3) > 0.0)
            }
            ScenarioId::E2b4 => {
                (3.0 * beta[0] * x(0).sin()).exp()
                    + 2.0 * beta[1] * x(1).exp()
                    + 3.0 * beta[2] * indicator(x(2) > 0.0)
                    + (4.0 * x(3).abs() + 0.5).ln()
            }
            ScenarioId::E3 => 6.0 * x(0) + 6.0 * (3.0 * x(1) - 1.0).powi(2) + 3.0 * g3(x(2)) + 6.0 * g4(x(3)),
            ScenarioId::E4 => {
                2.0 * z.exp() * x(0)
                    + 5.0 * (2.0 * z - 1.0).powi(2) * x(1).exp()
                    + 3.0 * (2.0 * PI * z).sin() * x(2) * x(2)
            }
            ScenarioId::E5d1 | ScenarioId::E5d2 => {
                2.0 * z * x(0) + 5.0 * (2.0 * z - 1.0).powi(2) * x(1) + 3.0 * (2.0 * PI * z).sin() * x(2)
            }
            ScenarioId::E5d3 => {
                2.0 * indicator(z > 0.4) * x(1)
                    + (1.0 + z) * x(99)
                    + (2.0 - 3.0 * z).powi(2) * x(399)
                    + (z / (1.0 + z)).exp() * x(599)
            }
            ScenarioId::E6 => {
                let s = (2.0 * PI * z).sin();
                3.0 * x(0) + 4.0 * (z + 0.5).sqrt() * x(1) + 2.0 * z.exp() * x(2) + 6.0 * s * x(3) / (2.0 - s)
            }
            ScenarioId::S1 | ScenarioId::S3 => 2.0 * x(0) + 1.5 * x(1) + 2.0 * x(99) + 2.0 * x(399),
            ScenarioId::S2 => {
                2.0 * x(0) + 2.0 * (x(1) + 0.5).powi(2) + 3.0 * (-x(99)).exp() + 6.0 * (PI * x(399)).sin()
            }
            ScenarioId::S4 => {
                1.5 * x(0) + 0.5 * (x(1) + 0.5).powi(2) + 1.5 * (x(99) * x(99)).exp() + 1.5 * (PI * x(399)).sin()
            }
        }
    }
}

/// Error variance used to calibrate E4's signal; heavy-tailed families
/// without a variance borrow the t(3) value.
fn calibration_error_variance(noise: &Noise) -> f64 {
    noise.variance().unwrap_or(3.0)
}

const PILOT_DRAWS: usize = 100_000;
const PILOT_SEED: u64 = 0x005E_EDE4;

/// Variance of E4's theta-free signal, estimated once per `rho0` on a fixed
/// pilot sample.
pub fn e4_signal_variance(rho0: f64) -> Result<f64> {
    static CACHE: OnceLock<Mutex<HashMap<u64, f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(&v) = cache.lock().expect("cache lock").get(&rho0.to_bits()) {
        return Ok(v);
    }
    let mut rng = stream_rng(PILOT_SEED, STREAM_LATENT);
    let x = gen_ar1_gaussian(PILOT_DRAWS, 3, rho0, &mut rng)?;
    let mut zrng = stream_rng(PILOT_SEED, STREAM_EXPOSURE);
    let mu: Vec<f64> = (0..PILOT_DRAWS)
        .map(|i| {
            let z: f64 = zrng.random();
            ScenarioId::E4.signal(|j| x[j][i], z, &[1.0; 4])
        })
        .collect();
    let m = mu.iter().sum::<f64>() / mu.len() as f64;
    let var = mu.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (mu.len() - 1) as f64;
    cache.lock().expect("cache lock").insert(rho0.to_bits(), var);
    Ok(var)
}

/// Signal scale giving `theta^2 var(mu) / (theta^2 var(mu) + var(eps)) = r2`.
pub fn e4_theta(scenario: &SimScenario) -> Result<f64> {
    let var_mu = e4_signal_variance(scenario.rho0)?;
    let var_eps = calibration_error_variance(&scenario.error);
    Ok((scenario.r2 * var_eps / ((1.0 - scenario.r2) * var_mu)).sqrt())
}

fn logistic(eta: f64) -> f64 {
    1.0 / (1.0 + (-eta).exp())
}

// Largest mean accepted by the Poisson sampler, with headroom.
const MAX_POISSON_MEAN: f64 = 1.0e18;

/// Response from the latent covariates and (if present) the exposure.
pub fn gen_response<R: Rng + ?Sized>(
    scenario: &SimScenario,
    latent: &[Vec<f64>],
    z: Option<&[f64]>,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let id = scenario.id;
    let n = latent.first().map_or(0, Vec::len);
    if id.has_exposure() && z.is_none() {
        return Err(ScreenError::invalid(format!("scenario {id} needs an exposure")));
    }
    let max_active = *id.active_one_based().iter().max().unwrap_or(&0);
    if latent.len() < max_active {
        return Err(ScreenError::invalid(format!("scenario {id} needs p >= {max_active}")));
    }
    let theta = if id == ScenarioId::E4 { e4_theta(scenario)? } else { 1.0 };
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let zi = z.map_or(0.0, |z| z[i]);
        let eta = theta * id.signal(|j| latent[j][i], zi, &scenario.beta);
        let yi = match id {
            ScenarioId::S1 | ScenarioId::S2 => indicator(rng.random::<f64>() < logistic(eta)),
            ScenarioId::S3 | ScenarioId::S4 => {
                let mean = eta.exp().min(MAX_POISSON_MEAN);
                if mean > 0.0 {
                    Poisson::new(mean).map_err(|e| ScreenError::invalid(format!("Poisson mean {mean}: {e}")))?.sample(rng)
                } else {
                    0.0
                }
            }
            ScenarioId::E5d2 => {
                // log(0.5 exp(1.25 Y) - 1) = eta + eps.
                let s = eta + scenario.error.sample(rng);
                (std::f64::consts::LN_2 + ln1p_exp(s)) / 1.25
            }
            _ => eta + scenario.error.sample(rng),
        };
        y.push(yi);
    }
    Ok(y)
}

fn contamination_noise(scenario: &SimScenario) -> Option<(f64, Noise)> {
    if scenario.id.is_discrete() {
        match scenario.case {
            2 => Some((0.95, Noise::T3)),
            3 => Some((0.95, Noise::CAUCHY_THIRD)),
            4 => Some((0.95, Noise::Normal { mean: 5.0, sd: 1.0 })),
            _ => None,
        }
    } else {
        match scenario.id {
            ScenarioId::E3 | ScenarioId::E4 => None,
            _ if scenario.w0 < 1.0 => Some((scenario.w0, Noise::CAUCHY)),
            _ => None,
        }
    }
}

/// Generates one dataset of the design.
pub fn generate(scenario: &SimScenario) -> Result<SimDataset> {
    scenario.validate()?;
    let (n, p, rho0, seed) = (scenario.n, scenario.p, scenario.rho0, scenario.seed);
    let mut latent_rng = stream_rng(seed, STREAM_LATENT);
    let mut exposure_rng = stream_rng(seed, STREAM_EXPOSURE);

    let (latent, z) = match scenario.id {
        ScenarioId::E3 | ScenarioId::S4 => (gen_equicorrelated_uniform(n, p, rho0, &mut latent_rng)?, None),
        ScenarioId::E6 => {
            let (x, z) = gen_exposure_correlated(n, p, rho0, 0.4, &mut latent_rng)?;
            (x, Some(z))
        }
        id => {
            let x = gen_ar1_gaussian(n, p, rho0, &mut latent_rng)?;
            let z = id.has_exposure().then(|| (0..n).map(|_| exposure_rng.random::<f64>()).collect());
            (x, z)
        }
    };

    let y = gen_response(scenario, &latent, z.as_deref(), &mut stream_rng(seed, STREAM_RESPONSE))?;

    let observed = match contamination_noise(scenario) {
        Some((w0, noise)) => gen_contaminated(&latent, w0, &noise, &mut stream_rng(seed, STREAM_CONTAMINATION)),
        None => latent,
    };

    let mut dataset = Dataset::new(y, observed, z)?;
    if dataset.exposure.is_some() {
        dataset.exposure_name = Some("z".to_string());
    }
    Ok(SimDataset { dataset, active_set: scenario.active_set(), scenario: scenario.clone() })
}

/// Summary of data generated for a design, for sanity checks and reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratedShape {
    pub n: usize,
    pub p: usize,
    pub has_exposure: bool,
}

impl SimDataset {
    pub fn shape(&self) -> GeneratedShape {
        GeneratedShape { n: self.dataset.n(), p: self.dataset.p(), has_exposure: self.dataset.exposure.is_some() }
    }
}
