//! Brownian driver generation and the strong Stratonovich solver.
//!
//! Drivers carry `X^0_t = t` plus `d` independent Brownian coordinates with
//! increments derived from the counter RNG, so a driver is a deterministic
//! function of `(seed, path_index)` regardless of worker count or call
//! order. The solver is the Heun predictor-corrector scheme, which is
//! Stratonovich-consistent without derivative terms.

use alloc::vec;
use alloc::vec::Vec;

use crate::derivation::VectorFieldSet;
use crate::error::domain_err;
use crate::integral::{Driver, DriverKind};
use crate::path::{Interpolation, SampledPath};
use crate::rng::standard_normal;
use crate::{Error, Result};

/// Dimensions, grid, and Monte Carlo controls for one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    /// Noise dimension `d`.
    pub noise_dim: usize,
    /// State dimension `e`.
    pub state_dim: usize,
    /// Horizon `T`.
    pub horizon: f64,
    /// Coarse step count.
    pub n_steps: usize,
    /// Inner refinement factor: drivers are sampled on
    /// `n_steps * substep_ratio` cells so SDE solve and iterated integrals
    /// share one realization.
    pub substep_ratio: usize,
    pub seed: u64,
    /// Monte Carlo path count.
    pub n_paths: usize,
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.noise_dim == 0 || self.state_dim == 0 {
            return Err(domain_err!("dimensions must be positive"));
        }
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return Err(domain_err!("horizon must be positive and finite"));
        }
        if self.n_steps == 0 || self.substep_ratio == 0 || self.n_paths == 0 {
            return Err(domain_err!(
                "n_steps, substep_ratio, and n_paths must be >= 1"
            ));
        }
        Ok(())
    }

    /// Total fine grid cells.
    pub fn fine_steps(&self) -> usize {
        self.n_steps * self.substep_ratio
    }

    /// The same configuration over a shorter horizon with the step size
    /// preserved (used by the scaling experiments).
    pub fn with_horizon_keeping_step(&self, horizon: f64) -> SimulationConfig {
        let steps = libm::ceil(self.n_steps as f64 * horizon / self.horizon).max(1.0) as usize;
        SimulationConfig {
            horizon,
            n_steps: steps,
            ..self.clone()
        }
    }
}

/// Samples the Brownian driver for `path_index`: coordinate 0 is the grid
/// time, coordinates `1..=d` accumulate `sqrt(dt) * N(0,1)` increments.
pub fn sample_driver(cfg: &SimulationConfig, path_index: u64) -> Result<Driver> {
    cfg.validate()?;
    let n = cfg.fine_steps();
    let dim = cfg.noise_dim + 1;
    let mut times = Vec::with_capacity(n + 1);
    let mut values = vec![0.0; (n + 1) * dim];
    for j in 0..=n {
        let t = cfg.horizon * j as f64 / n as f64;
        times.push(t);
        values[j * dim] = t;
    }
    for c in 1..dim {
        let mut acc = 0.0;
        for j in 0..n {
            let dt = times[j + 1] - times[j];
            acc += libm::sqrt(dt) * standard_normal(cfg.seed, path_index, j as u64, c as u64);
            values[(j + 1) * dim + c] = acc;
        }
    }
    let path = SampledPath::new(times, values, dim, Interpolation::Linear)?;
    Driver::new(path, DriverKind::Stratonovich)
}

/// Sums consecutive increments of a sampled driver, halving the resolution.
/// Refinement studies use this so that coarse and fine solves share one
/// Brownian realization.
pub fn coarsen_driver(drv: &Driver) -> Result<Driver> {
    let path = drv.path();
    let n = path.len();
    if n < 3 || n % 2 == 0 {
        return Err(domain_err!(
            "coarsening needs an odd node count (even cell count), got {n}"
        ));
    }
    let dim = path.dim();
    let mut times = Vec::with_capacity(n / 2 + 1);
    let mut values = Vec::with_capacity((n / 2 + 1) * dim);
    for j in (0..n).step_by(2) {
        times.push(path.times()[j]);
        values.extend_from_slice(path.row(j));
    }
    Driver::new(
        SampledPath::new(times, values, dim, path.interp())?,
        drv.kind(),
    )
}

/// Strong Stratonovich solve of `dY = Σ_i V_i(Y) ∘dX^i` by the Heun scheme:
/// predictor `ŷ = y + Σ V_i(y) ΔX^i`, corrector
/// `y⁺ = y + Σ ½(V_i(y) + V_i(ŷ)) ΔX^i`. Output lives on the driver grid.
pub fn solve_stratonovich(vf: &VectorFieldSet, y0: &[f64], drv: &Driver) -> Result<SampledPath> {
    let e = vf.state_dim();
    let d = vf.noise_dim();
    if y0.len() != e {
        return Err(domain_err!(
            "initial state has dimension {}, fields expect {e}",
            y0.len()
        ));
    }
    if drv.noise_dim() != d {
        return Err(domain_err!(
            "driver carries {} noise coordinates, fields expect {d}",
            drv.noise_dim()
        ));
    }
    let path = drv.path();
    let n = path.len();
    let mut values = Vec::with_capacity(n * e);
    values.extend_from_slice(y0);
    let mut y = y0.to_vec();
    let mut predictor = vec![0.0; e];
    let mut field_at_y = vec![0.0; e];
    let mut field_at_pred = vec![0.0; e];
    let mut dx = vec![0.0; d + 1];
    for step in 0..n - 1 {
        let (row0, row1) = (path.row(step), path.row(step + 1));
        for c in 0..=d {
            dx[c] = row1[c] - row0[c];
        }
        predictor.copy_from_slice(&y);
        for i in 0..=d {
            vf.field(i).eval_into(&y, &mut field_at_y);
            for k in 0..e {
                predictor[k] += field_at_y[k] * dx[i];
            }
        }
        for i in 0..=d {
            vf.field(i).eval_into(&y, &mut field_at_y);
            vf.field(i).eval_into(&predictor, &mut field_at_pred);
            for k in 0..e {
                y[k] += 0.5 * (field_at_y[k] + field_at_pred[k]) * dx[i];
            }
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Blowup { step });
        }
        values.extend_from_slice(&y);
    }
    Ok(SampledPath::from_parts(
        path.times().to_vec(),
        values,
        e,
        Interpolation::Linear,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::derivation::VectorField;
    use crate::scalar::{MultiFn, ScalarFn};

    fn cfg(n_steps: usize, n_paths: usize, seed: u64) -> SimulationConfig {
        SimulationConfig {
            noise_dim: 1,
            state_dim: 1,
            horizon: 1.0,
            n_steps,
            substep_ratio: 1,
            seed,
            n_paths,
        }
    }

    #[test]
    fn driver_time_coordinate_is_the_grid() {
        let drv = sample_driver(&cfg(64, 1, 9), 0).unwrap();
        for j in 0..drv.path().len() {
            assert_eq!(drv.path().row(j)[0], drv.path().times()[j]);
        }
    }

    #[test]
    fn terminal_brownian_moments() {
        let n_paths = 100_000;
        let config = cfg(16, n_paths, 2024);
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for p in 0..n_paths as u64 {
            let drv = sample_driver(&config, p).unwrap();
            let last = drv.path().row(drv.path().len() - 1)[1];
            sum += last;
            sum_sq += last * last;
        }
        let mean = sum / n_paths as f64;
        let var = sum_sq / n_paths as f64 - mean * mean;
        // CLT band: 4 sigma on the mean of Var-1 samples
        assert!(
            mean.abs() < 4.0 * (1.0 / n_paths as f64).sqrt(),
            "terminal mean {mean}"
        );
        assert!((var - 1.0).abs() < 0.05, "terminal variance {var}");
    }

    #[test]
    fn substep_ratio_refines_the_shared_grid() {
        let config = SimulationConfig {
            substep_ratio: 4,
            ..cfg(32, 1, 3)
        };
        let drv = sample_driver(&config, 0).unwrap();
        assert_eq!(drv.path().len(), 32 * 4 + 1);
        assert_eq!(drv.path().horizon(), 1.0);
    }

    #[test]
    fn drivers_are_deterministic_in_seed_and_path() {
        let a = sample_driver(&cfg(32, 1, 7), 3).unwrap();
        let b = sample_driver(&cfg(32, 1, 7), 3).unwrap();
        assert_eq!(a.path().values(), b.path().values());
        let c = sample_driver(&cfg(32, 1, 8), 3).unwrap();
        assert_ne!(a.path().values(), c.path().values());
    }

    #[test]
    fn zero_fields_keep_the_state_constant() {
        let vf = VectorFieldSet::new(vec![VectorField::zero(1), VectorField::zero(1)]).unwrap();
        let drv = sample_driver(&cfg(32, 1, 5), 0).unwrap();
        let y = solve_stratonovich(&vf, &[1.25], &drv).unwrap();
        for j in 0..y.len() {
            assert_eq!(y.row(j)[0], 1.25);
        }
    }

    #[test]
    fn additive_noise_is_exact_at_grid_nodes() {
        let vf = VectorFieldSet::new(vec![
            VectorField::zero(1),
            VectorField::componentwise(1, ScalarFn::constant(1.0)),
        ])
        .unwrap();
        let drv = sample_driver(&cfg(64, 1, 21), 4).unwrap();
        let y0 = 0.3;
        let y = solve_stratonovich(&vf, &[y0], &drv).unwrap();
        for j in 0..y.len() {
            let b = drv.path().row(j)[1];
            assert!((y.row(j)[0] - (y0 + b)).abs() < 1e-12);
        }
    }

    #[test]
    fn geometric_sde_matches_stratonovich_exponential() {
        // dY = Y ∘dB has solution y0 exp(B_t); strong error decays ~ O(h).
        let vf = VectorFieldSet::new(vec![
            VectorField::zero(1),
            VectorField::componentwise(1, ScalarFn::identity()),
        ])
        .unwrap();
        let y0 = 1.0;
        let mut errors = Vec::new();
        for &n_steps in &[256usize, 1024, 4096] {
            let config = cfg(n_steps, 1, 77);
            let mut err_acc = 0.0;
            let n_paths = 400;
            for p in 0..n_paths as u64 {
                let drv = sample_driver(
                    &SimulationConfig {
                        n_paths,
                        ..config.clone()
                    },
                    p,
                )
                .unwrap();
                let y = solve_stratonovich(&vf, &[y0], &drv).unwrap();
                let b_t = drv.path().row(drv.path().len() - 1)[1];
                let exact = y0 * libm::exp(b_t);
                let got = y.row(y.len() - 1)[0];
                err_acc += (got - exact).abs();
            }
            errors.push(err_acc / n_paths as f64);
        }
        // order ≈ 1 in step size across the quadruplings
        let order1 = libm::log2(errors[0] / errors[1]) / 2.0;
        let order2 = libm::log2(errors[1] / errors[2]) / 2.0;
        assert!(
            order1 > 0.7 && order2 > 0.7,
            "strong orders {order1}, {order2} from errors {errors:?}"
        );
        assert!(
            errors[2] < 1e-2,
            "absolute strong error at 2^12 steps: {}",
            errors[2]
        );
    }

    #[test]
    fn refinement_consistency_via_coarsening() {
        let vf = VectorFieldSet::new(vec![
            VectorField::zero(1),
            VectorField::componentwise(1, ScalarFn::identity()),
        ])
        .unwrap();
        let fine = sample_driver(&cfg(512, 1, 13), 1).unwrap();
        let coarse = coarsen_driver(&fine).unwrap();
        // shared realization: coarse terminal value equals fine terminal value
        let nf = fine.path().len() - 1;
        let nc = coarse.path().len() - 1;
        assert_eq!(fine.path().row(nf)[1], coarse.path().row(nc)[1]);

        let yf = solve_stratonovich(&vf, &[1.0], &fine).unwrap();
        let yc = solve_stratonovich(&vf, &[1.0], &coarse).unwrap();
        let mut sup = 0.0f64;
        for j in 0..yc.len() {
            let t = yc.times()[j];
            let diff = (yc.row(j)[0] - yf.eval(t).unwrap()[0]).abs();
            sup = sup.max(diff);
        }
        assert!(sup < 0.2, "sup difference between resolutions: {sup}");
    }

    #[test]
    fn blowup_reports_the_step() {
        // explosive drift: dY = Y^3 dt with huge step
        let vf = VectorFieldSet::new(vec![
            VectorField::new(vec![MultiFn::on_coord(
                1,
                0,
                ScalarFn::Poly(vec![0.0, 0.0, 0.0, 1.0]),
            )]),
            VectorField::zero(1),
        ])
        .unwrap();
        let config = SimulationConfig {
            horizon: 1e4,
            ..cfg(4, 1, 3)
        };
        let drv = sample_driver(&config, 0).unwrap();
        match solve_stratonovich(&vf, &[10.0], &drv) {
            Err(Error::Blowup { .. }) => {}
            other => panic!("expected blowup, got {other:?}"),
        }
    }
}
