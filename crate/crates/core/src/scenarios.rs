//! Seeded instance generators.
//!
//! Every generator uses [`ChaCha8Rng`] seeded with `seed_from_u64`, and draws
//! in a fixed order:
//!
//! 1. `u~` (m values), then `v~` (n values);
//! 2. the full m x n cost grid in row-major order, including cells that end
//!    up forbidden (their draws are discarded, so the pattern never shifts
//!    the cost stream);
//! 3. the zero pattern, when it is random.
//!
//! All continuous draws are uniform on the open interval (0, 1).

use ndarray::Array2;
use rand::distr::Open01;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::pattern::ZeroPattern;
use crate::problem::{validate_instance, ProblemInstance, RawInstance};

/// Attempts made by [`generate_random_instance`] before giving up.
pub const PATTERN_ATTEMPTS: usize = 1000;

/// Parameters of the EV-charging scenario: `m` vehicles, `n` providers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvScenarioConfig {
    pub m: usize,
    pub n: usize,
    pub seed: u64,
    pub gamma0: f64,
    pub gamma: f64,
}

impl Default for EvScenarioConfig {
    fn default() -> Self {
        Self {
            m: 10_000,
            n: 10,
            seed: 0,
            gamma0: 1.99,
            gamma: 1.005,
        }
    }
}

/// Vehicles and providers at odd 0-based positions (the 2nd, 4th, ... in
/// 1-based counting) are incompatible.
pub fn ev_zero_pattern(m: usize, n: usize) -> Vec<(usize, usize)> {
    (1..m)
        .step_by(2)
        .flat_map(|i| (1..n).step_by(2).map(move |j| (i, j)))
        .collect()
}

/// EV-charging instance with uniform demands, capacities and costs, a unit
/// ideal plan, and the pattern from [`ev_zero_pattern`]. Requires `m, n >= 2`.
///
/// Each seed re-draws demands, capacities and costs.
pub fn generate_ev_instance(cfg: &EvScenarioConfig) -> Result<ProblemInstance> {
    if cfg.m < 2 || cfg.n < 2 {
        return Err(Error::Domain(
            "generate_ev_instance: m and n must be at least 2",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (u_tilde, v_tilde, cost) = draw_marginals_and_costs(&mut rng, cfg.m, cfg.n);
    let raw = RawInstance {
        m: cfg.m,
        n: cfg.n,
        u_tilde,
        v_tilde,
        cost,
        zero_pattern: ev_zero_pattern(cfg.m, cfg.n),
        ideal_plan: None,
        gamma0: cfg.gamma0,
        gamma: cfg.gamma,
    };
    Ok(validate_instance(&raw)?)
}

/// Random instance with `round(zero_density * m * n)` forbidden pairs chosen
/// uniformly among patterns that leave every row and column an allowed entry
/// (rejection sampling). Uses `gamma0 = 1` and `gamma = 1`.
pub fn generate_random_instance(
    m: usize,
    n: usize,
    zero_density: f64,
    seed: u64,
) -> Result<ProblemInstance> {
    if m == 0 || n == 0 || !(0.0..=1.0).contains(&zero_density) {
        return Err(Error::Domain("generate_random_instance"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (u_tilde, v_tilde, cost) = draw_marginals_and_costs(&mut rng, m, n);
    let count = (zero_density * (m * n) as f64).round() as usize;
    let zero_pattern = (0..PATTERN_ATTEMPTS)
        .find_map(|_| {
            let pairs: Vec<(usize, usize)> = index::sample(&mut rng, m * n, count)
                .into_iter()
                .map(|c| (c / n, c % n))
                .collect();
            ZeroPattern::new(m, n, pairs.iter().copied())
                .ok()
                .map(|_| pairs)
        })
        .ok_or(Error::PatternSamplingFailed {
            attempts: PATTERN_ATTEMPTS,
        })?;
    let raw = RawInstance {
        m,
        n,
        u_tilde,
        v_tilde,
        cost,
        zero_pattern,
        ideal_plan: None,
        gamma0: 1.0,
        gamma: 1.0,
    };
    Ok(validate_instance(&raw)?)
}

fn draw_marginals_and_costs(
    rng: &mut ChaCha8Rng,
    m: usize,
    n: usize,
) -> (Vec<f64>, Vec<f64>, Array2<f64>) {
    let u: Vec<f64> = (0..m).map(|_| rng.sample(Open01)).collect();
    let v: Vec<f64> = (0..n).map(|_| rng.sample(Open01)).collect();
    let c = Array2::from_shape_simple_fn((m, n), || rng.sample(Open01));
    (u, v, c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ev_pattern_on_4x4() {
        let cfg = EvScenarioConfig {
            m: 4,
            n: 4,
            seed: 3,
            ..Default::default()
        };
        let inst = generate_ev_instance(&cfg).unwrap();
        assert_eq!(
            inst.pattern().forbidden(),
            &[(1, 1), (1, 3), (3, 1), (3, 3)]
        );
        assert!(inst.has_unit_ideal());
    }

    #[test]
    fn ev_pattern_count_is_about_a_quarter() {
        assert_eq!(ev_zero_pattern(10_000, 10).len(), 5000 * 5);
        assert_eq!(ev_zero_pattern(5, 3).len(), 2);
    }

    #[test]
    fn ev_is_deterministic_per_seed() {
        let cfg = EvScenarioConfig {
            m: 20,
            n: 6,
            seed: 42,
            ..Default::default()
        };
        let a = generate_ev_instance(&cfg).unwrap().to_raw();
        let b = generate_ev_instance(&cfg).unwrap().to_raw();
        assert_eq!(a, b);
        let c = generate_ev_instance(&EvScenarioConfig { seed: 43, ..cfg })
            .unwrap()
            .to_raw();
        assert_ne!(a.cost, c.cost);
    }

    #[test]
    fn ev_rejects_tiny_sizes() {
        let cfg = EvScenarioConfig {
            m: 1,
            n: 4,
            ..Default::default()
        };
        assert!(generate_ev_instance(&cfg).is_err());
    }

    #[test]
    fn zero_density_gives_empty_pattern() {
        let inst = generate_random_instance(4, 3, 0.0, 7).unwrap();
        assert!(inst.pattern().is_empty());
    }

    #[test]
    fn random_instance_is_reproducible() {
        let a = generate_random_instance(3, 3, 0.2, 11).unwrap().to_raw();
        let b = generate_random_instance(3, 3, 0.2, 11).unwrap().to_raw();
        assert_eq!(a, b);
        assert_eq!(a.zero_pattern.len(), 2);
    }

    #[test]
    fn dense_pattern_cannot_be_sampled() {
        let err = generate_random_instance(3, 3, 0.95, 1).unwrap_err();
        assert!(matches!(
            err,
            Error::PatternSamplingFailed { attempts: 1000 }
        ));
    }

    #[test]
    fn mean_of_draws_is_one_half() {
        let cfg = EvScenarioConfig {
            m: 100_000,
            n: 2,
            seed: 5,
            ..Default::default()
        };
        let inst = generate_ev_instance(&cfg).unwrap();
        let mean = inst.u_tilde().iter().sum::<f64>() / 1e5;
        assert!((mean - 0.5).abs() < 0.01, "{mean}");
        assert!(inst.u_tilde().iter().all(|&x| x > 0.0 && x < 1.0));
    }
}
