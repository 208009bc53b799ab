#![allow(dead_code)]

use std::sync::Arc;

use betachart_core::arl::{gen_covariates, PRESETS};
use betachart_core::betadist::{BetaSampler, MuSigma};
use betachart_core::fit::{Dataset, Design, ModelSpec, INTERCEPT};
use betachart_core::links::LinkKind;
use betachart_core::stream::StreamRng;
use nalgebra::DMatrix;

/// Tire manufacturing data: y, x1..x5.
pub const TIRE: [[f64; 6]; 18] = [
    [0.0140, -1.0, -1.0, -1.0, -1.0, 1.0],
    [0.0339, -1.0, 1.0, 1.0, 1.0, -1.0],
    [0.0719, 1.0, 1.0, 1.0, 1.0, 1.0],
    [0.0267, 1.0, 1.0, -1.0, 1.0, -1.0],
    [0.0167, -1.0, -1.0, 1.0, 1.0, 1.0],
    [0.0108, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.0532, -1.0, 1.0, -1.0, 1.0, 1.0],
    [0.0155, -1.0, -1.0, 1.0, -1.0, -1.0],
    [0.0311, 1.0, -1.0, 1.0, -1.0, 1.0],
    [0.0730, -1.0, 1.0, -1.0, -1.0, -1.0],
    [0.0828, 1.0, -1.0, 1.0, 1.0, -1.0],
    [0.0220, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.0464, 1.0, -1.0, -1.0, -1.0, -1.0],
    [0.0210, 1.0, 1.0, 1.0, -1.0, -1.0],
    [0.0362, -1.0, -1.0, -1.0, 1.0, -1.0],
    [0.0558, 1.0, -1.0, -1.0, 1.0, 1.0],
    [0.0337, 1.0, 1.0, -1.0, -1.0, 1.0],
    [0.0692, -1.0, 1.0, 1.0, -1.0, 1.0],
];

pub fn tire_y() -> Vec<f64> {
    TIRE.iter().map(|r| r[0]).collect()
}

/// Mean: 1, x1, x2, x1·x2, x1·x4, x2·x5. Dispersion: 1, x1, x1·x2.
pub fn tire_design() -> (DMatrix<f64>, DMatrix<f64>) {
    let x = DMatrix::from_fn(18, 6, |t, j| {
        let r = TIRE[t];
        match j {
            0 => 1.0,
            1 => r[1],
            2 => r[2],
            3 => r[1] * r[2],
            4 => r[1] * r[4],
            _ => r[2] * r[5],
        }
    });
    let z = DMatrix::from_fn(18, 3, |t, j| {
        let r = TIRE[t];
        match j {
            0 => 1.0,
            1 => r[1],
            _ => r[1] * r[2],
        }
    });
    (x, z)
}

pub fn tire_spec() -> ModelSpec {
    let names = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    ModelSpec::new(
        names(&[INTERCEPT, "x1", "x2", "x1*x2", "x1*x4", "x2*x5"]),
        names(&[INTERCEPT, "x1", "x1*x2"]),
    )
}

pub fn tire_dataset() -> Dataset {
    let (x, z) = tire_design();
    Dataset::new(tire_y(), x, z).unwrap()
}

pub fn tire_constant_dispersion() -> Dataset {
    let (x, _) = tire_design();
    Dataset::new(tire_y(), x, DMatrix::from_element(18, 1, 1.0)).unwrap()
}

/// Estimates printed in the paper's coefficient table (mean, dispersion).
pub const TABLE_BETA: [f64; 6] = [-3.5807, 0.4507, 0.4656, -0.6716, 0.3054, 0.2106];
pub const TABLE_GAMMA: [f64; 3] = [-3.0847, -0.8563, 0.8582];
pub const TABLE_GAMMA_SE: [f64; 3] = [0.2577, 0.3659, 0.3656];

/// Logit-logit model with two uniform covariates per submodel and known
/// coefficients, for Monte Carlo checks.
pub struct Sim {
    pub design: Arc<Design>,
    pub beta: [f64; 3],
    pub gamma: [f64; 3],
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
    samplers: Vec<BetaSampler>,
}

impl Sim {
    pub fn new(beta: [f64; 3], gamma: [f64; 3], n: usize, seed: u64) -> Self {
        let (x, z) = gen_covariates(n, seed);
        let lin = |m: &DMatrix<f64>, c: &[f64; 3], t: usize| (0..3).map(|i| m[(t, i)] * c[i]).sum::<f64>();
        let mu: Vec<f64> = (0..n).map(|t| LinkKind::Logit.inv(lin(&x, &beta, t))).collect();
        let sigma: Vec<f64> = (0..n).map(|t| LinkKind::Logit.inv(lin(&z, &gamma, t))).collect();
        let samplers = mu
            .iter()
            .zip(&sigma)
            .map(|(&m, &s)| BetaSampler::new(MuSigma::new(m, s).unwrap()))
            .collect();
        Self {
            design: Arc::new(Design::new(x, z).unwrap()),
            beta,
            gamma,
            mu,
            sigma,
            samplers,
        }
    }

    pub fn preset(id: u8, n: usize, seed: u64) -> Self {
        let p = PRESETS[id as usize - 1];
        Self::new(p.beta, p.gamma, n, seed)
    }

    pub fn draw(&self, rng: &mut StreamRng) -> Vec<f64> {
        self.samplers.iter().map(|s| s.draw(rng)).collect()
    }

    pub fn dataset(&self, rng: &mut StreamRng) -> Dataset {
        Dataset::with_design(self.draw(rng), self.design.clone()).unwrap()
    }

    pub fn constant_dispersion(&self, data: &Dataset) -> Dataset {
        Dataset::with_design(data.y().to_vec(), Arc::new(self.design.constant_dispersion().unwrap())).unwrap()
    }

    pub fn truth(&self) -> Vec<f64> {
        self.beta.iter().chain(&self.gamma).copied().collect()
    }
}

pub fn sim_spec() -> ModelSpec {
    let names = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    ModelSpec::new(names(&[INTERCEPT, "x1", "x2"]), names(&[INTERCEPT, "z1", "z2"]))
}
