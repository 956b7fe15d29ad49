//! Synthetic additive-model data: compound-symmetry covariates, eight
//! fixed component functions in two groups of four, and Gaussian noise
//! calibrated to a signal-to-noise ratio of 3.

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use statrs::function::erf::erfc;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::groups::GroupStructure;

pub const DOMAIN: (f64, f64) = (-2.5, 2.5);
pub const N_COMPONENTS: usize = 8;

/// Reference variances of the eight components under `Uni(−2.5, 2.5)`.
pub const TABLE_VARIANCES: [f64; N_COMPONENTS] = [2.10, 3.47, 0.98, 8.98, 14.57, 2.08, 0.80, 3.76];

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Evaluates component `j` (1-based, `1..=8`) at `x`.
pub fn true_component(j: usize, x: f64) -> Result<f64> {
    let v = match j {
        1 => -2.0 * (2.0 * x).sin(),
        2 => x * x,
        3 => 2.0 * x.sin() / (2.0 - x.sin()),
        4 => (-x).exp(),
        5 => x.powi(3) + 1.5 * (x - 1.0).powi(2),
        6 => x,
        7 => 3.0 * (-0.5 * x).exp().sin(),
        8 => -5.0 * std_normal_cdf((x - 0.5) / 0.8),
        _ => return Err(Error::UnknownComponent(j)),
    };
    Ok(v)
}

/// Variance of component `j` for `x ~ Uni(−2.5, 2.5)`, by adaptive Simpson quadrature.
pub fn component_variance_oracle(j: usize) -> Result<f64> {
    true_component(j, 0.0)?;
    let f = |x: f64| true_component(j, x).expect("index checked");
    let (a, b) = DOMAIN;
    let width = b - a;
    let mean = adaptive_simpson(&f, a, b, 1e-9) / width;
    let second = adaptive_simpson(&|x| f(x).powi(2), a, b, 1e-9) / width;
    Ok(second - mean * mean)
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// `X_j = (W_j + tU)/(1 + t)` with `W_1..W_p, U` i.i.d. `Uni(−2.5, 2.5)`, fresh per row.
pub fn gen_covariates<R: Rng>(n: usize, p: usize, t: f64, rng: &mut R) -> DMatrix<f64> {
    let (lo, hi) = DOMAIN;
    let mut x = DMatrix::zeros(n, p);
    let mut w = vec![0.0; p];
    for i in 0..n {
        w.iter_mut().for_each(|v| *v = rng.random_range(lo..hi));
        let u = rng.random_range(lo..hi);
        for j in 0..p {
            x[(i, j)] = (w[j] + t * u) / (1.0 + t);
        }
    }
    x
}

/// `y_i = Σ_{j=1..8} f_j(x_ij) + σ ε_i`.
pub fn gen_response<R: Rng>(x: &DMatrix<f64>, sigma: f64, rng: &mut R) -> Result<Vec<f64>> {
    if x.ncols() < N_COMPONENTS {
        return Err(Error::InvalidDataset(format!(
            "response needs at least {N_COMPONENTS} covariates, got {}",
            x.ncols()
        )));
    }
    Ok((0..x.nrows())
        .map(|i| {
            let signal: f64 = (0..N_COMPONENTS)
                .map(|j| true_component(j + 1, x[(i, j)]).expect("j in 1..=8"))
                .sum();
            let eps: f64 = rng.sample(StandardNormal);
            signal + sigma * eps
        })
        .collect())
}

/// How the signal-to-noise ratio of 3 is turned into a noise level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SnrReading {
    /// `sqrt(Var m(X)) / σ = 3`.
    #[default]
    Standard,
    /// `sqrt(Var m(X)) / σ² = 3`.
    Literal,
}

impl SnrReading {
    /// Noise standard deviation from the independent-covariate signal variance.
    pub fn sigma(self) -> f64 {
        let var: f64 = (1..=N_COMPONENTS)
            .map(|j| component_variance_oracle(j).expect("j in 1..=8"))
            .sum();
        match self {
            SnrReading::Standard => var.sqrt() / 3.0,
            SnrReading::Literal => (var.sqrt() / 3.0).sqrt(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub n: usize,
    pub p: usize,
    pub t: f64,
    pub seed: u64,
    /// Replicate index; selects an independent RNG stream under the same seed.
    pub replicate: u64,
    pub block_size: usize,
    pub snr: SnrReading,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            n: 150,
            p: 200,
            t: 0.0,
            seed: 0,
            replicate: 0,
            block_size: 4,
            snr: SnrReading::Standard,
        }
    }
}

impl Scenario {
    pub fn sigma(&self) -> f64 {
        self.snr.sigma()
    }

    /// Population correlation between two distinct covariates.
    pub fn correlation(&self) -> f64 {
        self.t * self.t / (1.0 + self.t * self.t)
    }

    /// RNG for this scenario: ChaCha8 seeded with `seed`, stream `replicate`.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.replicate);
        rng
    }

    fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidConfig(format!("n must be at least 2, got {}", self.n)));
        }
        if self.p < N_COMPONENTS {
            return Err(Error::InvalidConfig(format!(
                "p must be at least {N_COMPONENTS}, got {}",
                self.p
            )));
        }
        if !(self.t >= 0.0 && self.t.is_finite()) {
            return Err(Error::InvalidConfig(format!("t must be nonnegative, got {}", self.t)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SimulatedData {
    pub train: Dataset,
    pub validation: Dataset,
    pub test: Dataset,
    /// Zero-based indices of the relevant covariates.
    pub true_support: Vec<usize>,
    pub groups: GroupStructure,
    pub sigma: f64,
}

/// Draws independent train, validation and test sets of `n` samples each.
pub fn make_scenario(scenario: &Scenario) -> Result<SimulatedData> {
    scenario.validate()?;
    let groups = GroupStructure::blocks(scenario.p, scenario.block_size)?;
    let sigma = scenario.sigma();
    let mut rng = scenario.rng();
    let mut draw = || -> Result<Dataset> {
        let x = gen_covariates(scenario.n, scenario.p, scenario.t, &mut rng);
        let y = gen_response(&x, sigma, &mut rng)?;
        Dataset::new(x, y)
    };
    let train = draw()?;
    let validation = draw()?;
    let test = draw()?;
    Ok(SimulatedData {
        train,
        validation,
        test,
        true_support: (0..N_COMPONENTS).collect(),
        groups,
        sigma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Independent reference values, computed offline with `scipy.integrate.quad`.
    const QUAD_VARIANCES: [f64; 8] = [
        2.108_804_222,
        3.472_222_222,
        0.980_567_319,
        8.983_846_234,
        14.564_732_143,
        2.083_333_333,
        0.802_031_183,
        3.752_900_339,
    ];

    #[test]
    fn component_values() {
        assert_eq!(true_component(1, 0.0).unwrap(), 0.0);
        assert_eq!(true_component(6, 0.0).unwrap(), 0.0);
        assert_eq!(true_component(4, 0.0).unwrap(), 1.0);
        assert_abs_diff_eq!(true_component(8, 0.5).unwrap(), -2.5, epsilon = 1e-15);
        assert_eq!(true_component(0, 0.0), Err(Error::UnknownComponent(0)));
        assert_eq!(true_component(9, 0.0), Err(Error::UnknownComponent(9)));
    }

    #[test]
    fn signal_at_origin() {
        // 0 + 0 + 0 + 1 + 1.5 + 0 + 3 sin(1) − 5 Φ(−0.625)
        let terms: Vec<f64> = (1..=8).map(|j| true_component(j, 0.0).unwrap()).collect();
        assert_abs_diff_eq!(terms[4], 1.5, epsilon = 1e-15);
        assert_abs_diff_eq!(terms[6], 3.0 * 1f64.sin(), epsilon = 1e-15);
        assert_abs_diff_eq!(terms[7], -1.329_927_645, epsilon = 1e-8);
        assert_abs_diff_eq!(terms.iter().sum::<f64>(), 3.694_485_309, epsilon = 1e-8);
    }

    #[test]
    fn variance_oracle_matches_quadrature_reference() {
        for (j, expect) in QUAD_VARIANCES.iter().enumerate() {
            assert_abs_diff_eq!(component_variance_oracle(j + 1).unwrap(), expect, epsilon = 1e-6);
        }
        // Closed forms for two of them.
        let v1 = 4.0 * (0.5 - 10f64.sin() / 20.0);
        assert_abs_diff_eq!(component_variance_oracle(1).unwrap(), v1, epsilon = 1e-8);
        assert_abs_diff_eq!(component_variance_oracle(6).unwrap(), 25.0 / 12.0, epsilon = 1e-8);
        assert!(component_variance_oracle(9).is_err());
    }

    #[test]
    fn noise_levels() {
        assert_abs_diff_eq!(SnrReading::Standard.sigma(), 2.020_682_97, epsilon = 1e-6);
        assert_abs_diff_eq!(SnrReading::Literal.sigma(), 1.421_507_29, epsilon = 1e-6);
    }

    #[test]
    fn noiseless_response_is_signal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = gen_covariates(20, 9, 1.0, &mut rng);
        let y = gen_response(&x, 0.0, &mut rng).unwrap();
        for i in 0..20 {
            let s: f64 = (0..8).map(|j| true_component(j + 1, x[(i, j)]).unwrap()).sum();
            assert_eq!(y[i], s);
        }
        let zeros = DMatrix::zeros(3, 8);
        for v in gen_response(&zeros, 0.0, &mut rng).unwrap() {
            assert_abs_diff_eq!(v, 3.694_485_309, epsilon = 1e-8);
        }
        assert!(gen_response(&DMatrix::zeros(3, 7), 1.0, &mut rng).is_err());
    }

    #[test]
    fn covariates_stay_in_domain() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for t in [0.0, 1.0, 2.0] {
            let x = gen_covariates(200, 12, t, &mut rng);
            assert!(x.iter().all(|v| (-2.5..=2.5).contains(v)));
        }
    }

    #[test]
    fn scenario_layout_and_determinism() {
        let sc = Scenario {
            n: 30,
            p: 16,
            seed: 5,
            ..Scenario::default()
        };
        let a = make_scenario(&sc).unwrap();
        let b = make_scenario(&sc).unwrap();
        assert_eq!(a.train, b.train);
        assert_eq!(a.test.y(), b.test.y());
        assert_ne!(a.train.x(), a.validation.x());
        assert_eq!(a.groups.len(), 4);
        assert_eq!(a.true_support, (0..8).collect::<Vec<_>>());
        assert_eq!(a.groups.groups()[0].members, vec![0, 1, 2, 3]);
        assert_eq!(a.groups.groups()[1].members, vec![4, 5, 6, 7]);

        let other = make_scenario(&Scenario { replicate: 1, ..sc }).unwrap();
        assert_ne!(a.train.y(), other.train.y());
        assert!(make_scenario(&Scenario { p: 10, ..sc }).is_err());
    }
}
