//! The truncated functional expansion, its realized remainder, and the
//! Monte Carlo experiments that verify the L2 remainder scaling.
//!
//! For a truncation level `m`, the expansion reads
//!
//! `F_t(Y) - F_s(Y) = Σ_{I ∈ A(m)} V̄_I·F_s(Y) ∫_{Δ_{|I|}(s,t)} ∘dX^I + R^m`,
//!
//! and for Brownian drivers `E[|R^m|^2]^{1/2}` is bounded by powers
//! `|t-s|^{‖I‖/2}` over boundary words of weight `m+1` and `m+2`, so the
//! log-log slope of the RMS remainder against `t` approaches `(m+1)/2`.
//!
//! The remainder is measured pathwise as `lhs - truncation`; its
//! boundary-word integral form needs derivative depth `m+2` along the whole
//! path and is exercised separately in tests at small `m` through
//! [`iterated_integral_weighted`](crate::integral::iterated_integral_weighted).

use alloc::vec::Vec;

use crate::derivation::{apply_word, VectorFieldSet};
use crate::error::domain_err;
use crate::functional::FunctionalHandle;
use crate::integral::{iterated_integrals_for, Driver};
use crate::linalg::fit_line;
use crate::path::SampledPath;
use crate::sde::{sample_driver, solve_stratonovich, SimulationConfig};
use crate::word::{enumerate_a, MultiIndex};
use crate::Result;

/// Coefficient functionals `V̄_I·F` for all `I ∈ A(m)`, built once and
/// reused across Monte Carlo paths.
#[derive(Debug, Clone)]
pub struct ExpansionPlan {
    functional: FunctionalHandle,
    fields: VectorFieldSet,
    level: usize,
    words: Vec<MultiIndex>,
    coefficients: Vec<FunctionalHandle>,
}

impl ExpansionPlan {
    pub fn new(f: FunctionalHandle, fields: VectorFieldSet, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(domain_err!("truncation level must be >= 1"));
        }
        let words = enumerate_a(m, fields.noise_dim() as u8);
        let coefficients = words
            .iter()
            .map(|w| apply_word(&fields, w, &f))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            functional: f,
            fields,
            level: m,
            words,
            coefficients,
        })
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn words(&self) -> &[MultiIndex] {
        &self.words
    }

    pub fn fields(&self) -> &VectorFieldSet {
        &self.fields
    }

    pub fn functional(&self) -> &FunctionalHandle {
        &self.functional
    }

    /// Coefficient functional for `words()[k]`.
    pub fn coefficient(&self, k: usize) -> &FunctionalHandle {
        &self.coefficients[k]
    }

    /// Expands one realized driver: solves the SDE, evaluates coefficients
    /// at `(s, Y)` and integrals on `[s, t]` of the same realization.
    pub fn expand(&self, y0: &[f64], drv: &Driver, s: f64, t: f64) -> Result<ExpansionReport> {
        if s >= t {
            return Err(domain_err!("expansion needs s < t"));
        }
        let y = solve_stratonovich(&self.fields, y0, drv)?;
        self.expand_on_solution(&y, drv, s, t)
    }

    /// As [`expand`](Self::expand) when the solution path for this driver is
    /// already available.
    pub fn expand_on_solution(
        &self,
        y: &SampledPath,
        drv: &Driver,
        s: f64,
        t: f64,
    ) -> Result<ExpansionReport> {
        let lhs = self.functional.eval(t, y)? - self.functional.eval(s, y)?;
        let integral_map = iterated_integrals_for(drv, &self.words, s, t)?;
        let mut coefficients = Vec::with_capacity(self.words.len());
        let mut integrals = Vec::with_capacity(self.words.len());
        let mut truncation_value = 0.0;
        for (word, coeff_fn) in self.words.iter().zip(self.coefficients.iter()) {
            let c = coeff_fn.eval(s, y)?;
            let i = integral_map[word];
            coefficients.push(c);
            integrals.push(i);
            truncation_value += c * i;
        }
        Ok(ExpansionReport {
            level: self.level,
            words: self.words.clone(),
            coefficients,
            integrals,
            truncation_value,
            lhs,
            remainder: lhs - truncation_value,
        })
    }

    /// Realized remainder for one counter-indexed Monte Carlo path.
    pub fn remainder_for_path(
        &self,
        cfg: &SimulationConfig,
        y0: &[f64],
        s: f64,
        t: f64,
        path_index: u64,
    ) -> Result<f64> {
        let drv = sample_driver(cfg, path_index)?;
        Ok(self.expand(y0, &drv, s, t)?.remainder)
    }
}

/// Per-word outcome of one expansion together with the realized remainder.
#[derive(Debug, Clone)]
pub struct ExpansionReport {
    pub level: usize,
    pub words: Vec<MultiIndex>,
    pub coefficients: Vec<f64>,
    pub integrals: Vec<f64>,
    pub truncation_value: f64,
    pub lhs: f64,
    pub remainder: f64,
}

/// One-call convenience over [`ExpansionPlan`].
pub fn expand(
    f: &FunctionalHandle,
    fields: &VectorFieldSet,
    y0: &[f64],
    drv: &Driver,
    s: f64,
    t: f64,
    m: usize,
) -> Result<ExpansionReport> {
    ExpansionPlan::new(f.clone(), fields.clone(), m)?.expand(y0, drv, s, t)
}

/// RMS over Monte Carlo paths with a 95% half-width from the delta method
/// on the mean of squared remainders.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L2Stats {
    pub rms: f64,
    pub ci_halfwidth: f64,
    pub n_paths: usize,
}

/// Aggregates squared remainders into RMS and confidence half-width.
pub fn l2_from_squares(squares: &[f64]) -> L2Stats {
    let n = squares.len();
    assert!(n > 0);
    let mean = squares.iter().sum::<f64>() / n as f64;
    let rms = libm::sqrt(mean.max(0.0));
    let ci_halfwidth = if n > 1 && rms > 0.0 {
        let var = squares.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (n as f64 - 1.0);
        let sd_mean = libm::sqrt(var / n as f64);
        1.96 * sd_mean / (2.0 * rms)
    } else {
        0.0
    };
    L2Stats {
        rms,
        ci_halfwidth,
        n_paths: n,
    }
}

/// `E[|R^m_{s,t}|^2]^{1/2}` estimated over `cfg.n_paths` independent
/// drivers.
pub fn l2_remainder(
    f: &FunctionalHandle,
    fields: &VectorFieldSet,
    y0: &[f64],
    cfg: &SimulationConfig,
    s: f64,
    t: f64,
    m: usize,
) -> Result<L2Stats> {
    cfg.validate()?;
    if t > cfg.horizon {
        return Err(domain_err!("t = {t} beyond configured horizon"));
    }
    let plan = ExpansionPlan::new(f.clone(), fields.clone(), m)?;
    let mut squares = Vec::with_capacity(cfg.n_paths);
    for p in 0..cfg.n_paths as u64 {
        let r = plan.remainder_for_path(cfg, y0, s, t, p)?;
        squares.push(r * r);
    }
    Ok(l2_from_squares(&squares))
}

/// Outcome of the remainder-scaling regression over a `t` grid.
#[derive(Debug, Clone)]
pub struct ScalingReport {
    pub t_values: Vec<f64>,
    pub rms: Vec<f64>,
    pub ci_halfwidth: Vec<f64>,
    /// Log-log slope; absent when every RMS sits at the exact-expansion
    /// floor and no regression is meaningful.
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub theoretical_slope: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub exact_expansion: bool,
}

/// Floor below which a remainder is considered exactly zero up to grid
/// rounding.
pub const EXACTNESS_FLOOR: f64 = 1e-12;

/// Checks a scaling horizon grid: at least 4 positive values spanning a
/// factor of 8, and returns the smallest.
pub fn validate_scaling_grid(t_list: &[f64]) -> Result<f64> {
    if t_list.len() < 4 {
        return Err(domain_err!("scaling regression needs at least 4 horizons"));
    }
    let t_min = t_list.iter().cloned().fold(f64::INFINITY, f64::min);
    let t_max = t_list.iter().cloned().fold(0.0, f64::max);
    if !(t_min > 0.0) || t_max / t_min < 8.0 - 1e-9 {
        return Err(domain_err!(
            "scaling horizons must be positive and span at least a factor 8"
        ));
    }
    Ok(t_min)
}

/// The per-horizon configuration of a scaling run: horizon `t` with the cell
/// size pinned by `cfg.n_steps` at the smallest horizon `t_min`.
pub fn horizon_config(cfg: &SimulationConfig, t: f64, t_min: f64) -> SimulationConfig {
    SimulationConfig {
        horizon: t,
        n_steps: libm::ceil(cfg.n_steps as f64 * t / t_min).max(1.0) as usize,
        ..cfg.clone()
    }
}

/// Assembles the regression report from per-horizon RMS statistics.
pub fn scaling_report_from(
    t_list: &[f64],
    rms: Vec<f64>,
    ci: Vec<f64>,
    m: usize,
    tolerance: f64,
) -> Result<ScalingReport> {
    let theoretical_slope = (m as f64 + 1.0) / 2.0;
    if rms.iter().all(|&r| r < EXACTNESS_FLOOR) {
        return Ok(ScalingReport {
            t_values: t_list.to_vec(),
            rms,
            ci_halfwidth: ci,
            slope: None,
            intercept: None,
            theoretical_slope,
            tolerance,
            pass: true,
            exact_expansion: true,
        });
    }
    let log_t: Vec<f64> = t_list.iter().map(|&t| libm::log(t)).collect();
    let log_rms: Vec<f64> = rms.iter().map(|&r| libm::log(r.max(1e-300))).collect();
    let (slope, intercept) = fit_line(&log_t, &log_rms)?;
    Ok(ScalingReport {
        t_values: t_list.to_vec(),
        rms,
        ci_halfwidth: ci,
        slope: Some(slope),
        intercept: Some(intercept),
        theoretical_slope,
        tolerance,
        pass: libm::fabs(slope - theoretical_slope) <= tolerance,
        exact_expansion: false,
    })
}

/// Regresses `log rms` against `log t` over `t_list` and compares the slope
/// with the theoretical `(m+1)/2`. Each `t` runs over `[0, t]` with the step
/// size implied by `cfg` at the smallest `t` (so every horizon sees at least
/// `cfg.n_steps` cells).
pub fn scaling_regression(
    f: &FunctionalHandle,
    fields: &VectorFieldSet,
    y0: &[f64],
    cfg: &SimulationConfig,
    m: usize,
    t_list: &[f64],
    tolerance: f64,
) -> Result<ScalingReport> {
    cfg.validate()?;
    let t_min = validate_scaling_grid(t_list)?;
    let plan = ExpansionPlan::new(f.clone(), fields.clone(), m)?;
    let mut rms = Vec::with_capacity(t_list.len());
    let mut ci = Vec::with_capacity(t_list.len());
    for &t in t_list {
        let cfg_t = horizon_config(cfg, t, t_min);
        let mut squares = Vec::with_capacity(cfg_t.n_paths);
        for p in 0..cfg_t.n_paths as u64 {
            let r = plan.remainder_for_path(&cfg_t, y0, 0.0, t, p)?;
            squares.push(r * r);
        }
        let stats = l2_from_squares(&squares);
        rms.push(stats.rms);
        ci.push(stats.ci_halfwidth);
    }
    scaling_report_from(t_list, rms, ci, m, tolerance)
}

/// Which form of the change-of-variable identity to check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ItoMode {
    /// `ΔF = ∫∂0F dr + Σ ∫∂iF ∘dY^i` with midpoint (Stratonovich) weights.
    Stratonovich,
    /// `ΔF = ∫∂0F dr + Σ ∫∂iF dY^i + ½ Σ ∫∂i∂jF d[Y]^{ij}` with left-point
    /// weights and cellwise quadratic covariation.
    Ito,
}

/// Residual of the functional change-of-variable formula along one realized
/// solution path, discretized on the driver grid.
pub fn verify_functional_ito(
    f: &FunctionalHandle,
    fields: &VectorFieldSet,
    y0: &[f64],
    drv: &Driver,
    s: f64,
    t: f64,
    mode: ItoMode,
) -> Result<f64> {
    if s >= t {
        return Err(domain_err!("needs s < t"));
    }
    let y = solve_stratonovich(fields, y0, drv)?;
    let e = fields.state_dim();

    // node times in [s, t] with both endpoints present
    let mut nodes: Vec<f64> = Vec::new();
    nodes.push(s);
    for &u in y.times() {
        if u > s && u < t {
            nodes.push(u);
        }
    }
    nodes.push(t);

    let d0 = f
        .derivative(0)
        .ok_or_else(|| crate::error::contract_err!("needs the analytic time derivative"))?;
    let mut d_space = Vec::with_capacity(e);
    for i in 1..=e {
        d_space.push(f.derivative(i).ok_or_else(|| {
            crate::error::contract_err!("needs the analytic space derivative {i}")
        })?);
    }
    let mut d2_space = Vec::new();
    if mode == ItoMode::Ito {
        for i in 1..=e {
            let mut row = Vec::with_capacity(e);
            for j in 1..=e {
                row.push(d_space[i - 1].derivative(j).ok_or_else(|| {
                    crate::error::contract_err!("needs the second space derivative ({i},{j})")
                })?);
            }
            d2_space.push(row);
        }
    }

    let lhs = f.eval(t, &y)? - f.eval(s, &y)?;
    let mut integral = 0.0;
    let mut prev_time = nodes[0];
    let mut prev_d0 = d0.eval(prev_time, &y)?;
    let mut prev_di: Vec<f64> = d_space
        .iter()
        .map(|g| g.eval(prev_time, &y))
        .collect::<Result<_>>()?;
    let mut prev_y = y.eval(prev_time)?;
    for &u in &nodes[1..] {
        let cur_d0 = d0.eval(u, &y)?;
        let cur_y = y.eval(u)?;
        let dt = u - prev_time;
        match mode {
            ItoMode::Stratonovich => {
                integral += 0.5 * (prev_d0 + cur_d0) * dt;
                for i in 0..e {
                    let cur = d_space[i].eval(u, &y)?;
                    integral += 0.5 * (prev_di[i] + cur) * (cur_y[i] - prev_y[i]);
                    prev_di[i] = cur;
                }
            }
            ItoMode::Ito => {
                integral += prev_d0 * dt;
                for i in 0..e {
                    let dyi = cur_y[i] - prev_y[i];
                    integral += prev_di[i] * dyi;
                    for j in 0..e {
                        let dyj = cur_y[j] - prev_y[j];
                        integral += 0.5 * d2_space[i][j].eval(prev_time, &y)? * dyi * dyj;
                    }
                }
                for i in 0..e {
                    prev_di[i] = d_space[i].eval(u, &y)?;
                }
            }
        }
        prev_d0 = cur_d0;
        prev_y = cur_y;
        prev_time = u;
    }
    Ok(libm::fabs(lhs - integral))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::derivation::VectorField;
    use crate::functional::{make_cylinder, make_running_integral};
    use crate::integral::iterated_integral_weighted;
    use crate::scalar::{MultiFn, ScalarFn};
    use crate::word::boundary_set;
    use alloc::vec;

    fn sim(n_steps: usize, n_paths: usize, horizon: f64) -> SimulationConfig {
        SimulationConfig {
            noise_dim: 1,
            state_dim: 1,
            horizon,
            n_steps,
            substep_ratio: 1,
            seed: 4242,
            n_paths,
        }
    }

    fn additive_setup() -> (FunctionalHandle, VectorFieldSet) {
        let f = make_cylinder(MultiFn::coordinate(2, 1));
        let vf = VectorFieldSet::new(vec![
            VectorField::zero(1),
            VectorField::componentwise(1, ScalarFn::constant(1.0)),
        ])
        .unwrap();
        (f, vf)
    }

    fn example_setup() -> (FunctionalHandle, VectorFieldSet) {
        let f = make_running_integral(
            ScalarFn::Sin {
                amp: 1.0,
                freq: 1.0,
                phase: 0.0,
            },
            MultiFn::on_coord(1, 0, ScalarFn::logistic(1.0, 1.0, 0.0)),
        );
        let vf = VectorFieldSet::new(vec![
            VectorField::zero(1),
            VectorField::componentwise(
                1,
                ScalarFn::Sin {
                    amp: 0.8,
                    freq: 1.0,
                    phase: 0.3,
                },
            ),
        ])
        .unwrap();
        (f, vf)
    }

    #[test]
    fn additive_linear_functional_expands_exactly_at_m1() {
        let (f, vf) = additive_setup();
        let cfg = sim(256, 1, 1.0);
        let drv = sample_driver(&cfg, 0).unwrap();
        let report = expand(&f, &vf, &[0.0], &drv, 0.2, 0.9, 1).unwrap();
        assert_eq!(report.words, vec![MultiIndex::from([1u8])]);
        assert!((report.coefficients[0] - 1.0).abs() < 1e-15);
        let b = |time: f64| drv.path().eval(time).unwrap()[1];
        assert!((report.integrals[0] - (b(0.9) - b(0.2))).abs() < 1e-13);
        assert!(
            report.remainder.abs() < 1e-12,
            "remainder {}",
            report.remainder
        );
    }

    #[test]
    fn remainder_is_recomputable_bit_exactly() {
        let (f, vf) = example_setup();
        let cfg = sim(128, 1, 1.0);
        let drv = sample_driver(&cfg, 3).unwrap();
        let report = expand(&f, &vf, &[0.1], &drv, 0.0, 1.0, 2).unwrap();
        assert_eq!(
            report.remainder.to_bits(),
            (report.lhs - report.truncation_value).to_bits()
        );
        assert_eq!(report.words, enumerate_a(2, 1));
    }

    #[test]
    fn example_functional_m3_has_exactly_two_nonzero_words() {
        let (f, vf) = example_setup();
        let cfg = sim(256, 1, 1.0);
        let drv = sample_driver(&cfg, 11).unwrap();
        let report = expand(&f, &vf, &[0.2], &drv, 0.15, 0.85, 3).unwrap();
        let y = solve_stratonovich(&vf, &[0.2], &drv).unwrap();

        // analytic reference values at (s, Y)
        let s = 0.15;
        let ys = y.eval(s).unwrap()[0];
        let logistic = ScalarFn::logistic(1.0, 1.0, 0.0);
        let running = make_running_integral(
            ScalarFn::identity(),
            MultiFn::on_coord(1, 0, logistic.clone()),
        );
        let a_s = running.eval(s, &y).unwrap();
        let d0_expected = logistic.eval(ys) * libm::cos(a_s);
        let d1d0_expected = logistic.derivative().eval(ys) * libm::cos(a_s);
        let v1 = ScalarFn::Sin {
            amp: 0.8,
            freq: 1.0,
            phase: 0.3,
        };

        for (k, word) in report.words.iter().enumerate() {
            let c = report.coefficients[k];
            if word.letters() == [0] {
                assert!((c - d0_expected).abs() < 1e-12, "word (0): {c}");
            } else if word.letters() == [1, 0] {
                let expected = v1.eval(ys) * d1d0_expected;
                assert!((c - expected).abs() < 1e-12, "word (1,0): {c}");
            } else {
                assert_eq!(c, 0.0, "word {word} should have zero coefficient");
            }
        }
        // drift remark: a zero-containing word carries weight even though V0 = 0
        let zero_word_idx = report
            .words
            .iter()
            .position(|w| w.letters() == [0])
            .unwrap();
        assert!(report.coefficients[zero_word_idx].abs() > 0.0);
    }

    #[test]
    fn cylinder_collapse_reproduces_classical_taylor_coefficients() {
        // F(t,x) = f(x_t) with f = sin: zero-free words carry V1^k-type
        // classical coefficients; spot-check (1) and (1,1).
        let f_scalar = ScalarFn::Sin {
            amp: 1.0,
            freq: 1.0,
            phase: 0.0,
        };
        let v1 = ScalarFn::logistic(1.0, 1.0, 0.2);
        let f = make_cylinder(MultiFn::on_coord(2, 1, f_scalar.clone()));
        let vf = VectorFieldSet::new(vec![
            VectorField::zero(1),
            VectorField::componentwise(1, v1.clone()),
        ])
        .unwrap();
        let cfg = sim(128, 1, 1.0);
        let drv = sample_driver(&cfg, 5).unwrap();
        let report = expand(&f, &vf, &[0.4], &drv, 0.1, 0.9, 2).unwrap();
        let y = solve_stratonovich(&vf, &[0.4], &drv).unwrap();
        let ys = y.eval(0.1).unwrap()[0];
        for (k, word) in report.words.iter().enumerate() {
            match word.letters() {
                [1] => {
                    let expected = v1.eval(ys) * f_scalar.derivative().eval(ys);
                    assert!((report.coefficients[k] - expected).abs() < 1e-13);
                }
                [1, 1] => {
                    let fp = f_scalar.derivative();
                    let expected = v1.eval(ys)
                        * (v1.derivative().eval(ys) * fp.eval(ys)
                            + v1.eval(ys) * fp.derivative().eval(ys));
                    assert!((report.coefficients[k] - expected).abs() < 1e-13);
                }
                [0] => {
                    // cylinder functional has no explicit time dependence
                    assert_eq!(report.coefficients[k], 0.0);
                }
                other => panic!("unexpected word {other:?} in A(2)"),
            }
        }
    }

    #[test]
    fn l2_remainder_of_exact_expansion_sits_at_the_floor() {
        let (f, vf) = additive_setup();
        let cfg = sim(1024, 64, 1.0);
        let stats = l2_remainder(&f, &vf, &[0.0], &cfg, 0.0, 1.0, 1).unwrap();
        assert!(stats.rms < 1e-12, "rms {}", stats.rms);
    }

    #[test]
    fn ci_halfwidth_shrinks_like_sqrt_paths() {
        let (f, vf) = example_setup();
        let cfg_small = sim(64, 400, 0.5);
        let cfg_big = sim(64, 800, 0.5);
        let a = l2_remainder(&f, &vf, &[0.1], &cfg_small, 0.0, 0.5, 1).unwrap();
        let b = l2_remainder(&f, &vf, &[0.1], &cfg_big, 0.0, 0.5, 1).unwrap();
        let ratio = a.ci_halfwidth / b.ci_halfwidth;
        assert!(
            (1.1..1.8).contains(&ratio),
            "CI ratio {ratio} (expected ~sqrt(2))"
        );
    }

    #[test]
    fn rms_decreases_with_horizon_and_with_level() {
        let (f, vf) = example_setup();
        let mut previous = f64::INFINITY;
        for &t in &[0.4, 0.2, 0.1] {
            let cfg = sim(128, 300, t);
            let stats = l2_remainder(&f, &vf, &[0.1], &cfg, 0.0, t, 1).unwrap();
            assert!(stats.rms < previous, "rms not decreasing in t");
            previous = stats.rms;
        }
        // the empirical arbiter for the word-ordering convention: higher m,
        // smaller remainder at fixed t
        let cfg = sim(256, 300, 0.3);
        let m1 = l2_remainder(&f, &vf, &[0.1], &cfg, 0.0, 0.3, 1).unwrap();
        let m2 = l2_remainder(&f, &vf, &[0.1], &cfg, 0.0, 0.3, 2).unwrap();
        let m3 = l2_remainder(&f, &vf, &[0.1], &cfg, 0.0, 0.3, 3).unwrap();
        assert!(
            m2.rms < m1.rms && m3.rms <= m2.rms * 1.05,
            "m-monotonicity violated: {} {} {}",
            m1.rms,
            m2.rms,
            m3.rms
        );
    }

    #[test]
    fn polynomial_cylinder_remainder_halves_by_the_theoretical_factor() {
        // f(x_t) = x_t with affine V1: at m = 2 the remainder scales like t^{3/2},
        // so halving t divides the RMS by about 2^{3/2}.
        let f = make_cylinder(MultiFn::coordinate(2, 1));
        let vf = VectorFieldSet::new(vec![
            VectorField::zero(1),
            VectorField::affine(1, &[0.6], &[0.4]),
        ])
        .unwrap();
        let t_hi = 0.4;
        let t_lo = 0.2;
        let cfg_hi = sim(512, 2000, t_hi);
        let cfg_lo = sim(256, 2000, t_lo);
        let hi = l2_remainder(&f, &vf, &[1.0], &cfg_hi, 0.0, t_hi, 2).unwrap();
        let lo = l2_remainder(&f, &vf, &[1.0], &cfg_lo, 0.0, t_lo, 2).unwrap();
        let factor = hi.rms / lo.rms;
        let theory = libm::pow(2.0, 1.5);
        assert!(
            (factor - theory).abs() < 0.8,
            "decay factor {factor} vs theory {theory}"
        );
    }

    #[test]
    fn scaling_regression_flags_exact_expansions() {
        let (f, vf) = additive_setup();
        let cfg = sim(64, 50, 1.0);
        let report =
            scaling_regression(&f, &vf, &[0.0], &cfg, 1, &[0.02, 0.04, 0.08, 0.16], 0.25).unwrap();
        assert!(report.exact_expansion);
        assert!(report.pass);
        assert!(report.slope.is_none());
    }

    #[test]
    fn scaling_regression_validates_inputs() {
        let (f, vf) = example_setup();
        let cfg = sim(64, 10, 1.0);
        assert!(scaling_regression(&f, &vf, &[0.1], &cfg, 1, &[0.1, 0.2, 0.4], 0.25).is_err());
        assert!(scaling_regression(&f, &vf, &[0.1], &cfg, 1, &[0.1, 0.2, 0.3, 0.4], 0.25).is_err());
    }

    #[test]
    fn functional_ito_telescopes_for_the_endpoint() {
        let (f, vf) = additive_setup();
        let cfg = sim(512, 1, 1.0);
        let drv = sample_driver(&cfg, 2).unwrap();
        let res =
            verify_functional_ito(&f, &vf, &[0.3], &drv, 0.1, 0.9, ItoMode::Stratonovich).unwrap();
        assert!(res < 1e-12, "telescoping residual {res}");
    }

    #[test]
    fn functional_ito_is_exact_for_quadratic_endpoints() {
        // per cell, Δ(y²) - (y_j + y_{j+1})Δy vanishes identically, so the
        // quadratic cylinder satisfies both discrete identities to rounding
        let sq = MultiFn::on_coord(2, 1, ScalarFn::Poly(vec![0.0, 0.0, 1.0]));
        let f = make_cylinder(sq);
        let vf = VectorFieldSet::new(vec![
            VectorField::zero(1),
            VectorField::componentwise(1, ScalarFn::identity()),
        ])
        .unwrap();
        for mode in [ItoMode::Stratonovich, ItoMode::Ito] {
            for &n in &[128usize, 1024] {
                let cfg = sim(n, 1, 1.0);
                let drv = sample_driver(&cfg, 7).unwrap();
                let res = verify_functional_ito(&f, &vf, &[1.0], &drv, 0.0, 1.0, mode).unwrap();
                assert!(res < 1e-12, "{mode:?} at {n} steps: residual {res}");
            }
        }
    }

    #[test]
    fn functional_ito_residual_shrinks_under_refinement() {
        // time-weighted quadratic t*(x_t)^2 under the geometric SDE: the
        // discrete identity is no longer exact and converges at order ~1
        let quarter_sq = ScalarFn::Poly(vec![0.0, 0.0, 0.25]);
        let ty2 = MultiFn::new(
            2,
            0.0,
            vec![
                crate::scalar::Ridge {
                    weights: vec![1.0, 1.0],
                    profile: quarter_sq.clone(),
                },
                crate::scalar::Ridge {
                    weights: vec![1.0, -1.0],
                    profile: quarter_sq.scaled(-1.0),
                },
            ],
        );
        // t*y = ((t+y)^2-(t-y)^2)/4, then squared endpoint via product
        let t_times_y = make_cylinder(ty2);
        let y_lin = make_cylinder(MultiFn::coordinate(2, 1));
        let f = crate::functional::product(t_times_y, y_lin); // t * y^2
        let vf = VectorFieldSet::new(vec![
            VectorField::zero(1),
            VectorField::componentwise(1, ScalarFn::identity()),
        ])
        .unwrap();
        let (f_ex, vf_ex) = example_setup();
        for (f, vf, y0) in [(&f, &vf, 1.0), (&f_ex, &vf_ex, 0.2)] {
            // shared Brownian realization across resolutions: sample fine,
            // halve by summing increments
            let paths = 24u64;
            let mut acc = [0.0f64; 3];
            let cfg = sim(2048, 1, 1.0);
            for p in 0..paths {
                let fine = sample_driver(&cfg, p).unwrap();
                let mid = crate::sde::coarsen_driver(&crate::sde::coarsen_driver(&fine).unwrap())
                    .unwrap();
                let coarse =
                    crate::sde::coarsen_driver(&crate::sde::coarsen_driver(&mid).unwrap()).unwrap();
                for (k, drv) in [&coarse, &mid, &fine].iter().enumerate() {
                    let r =
                        verify_functional_ito(f, vf, &[y0], drv, 0.0, 1.0, ItoMode::Stratonovich)
                            .unwrap();
                    acc[k] += r * r;
                }
            }
            let residuals: Vec<f64> = acc.iter().map(|a| libm::sqrt(a / paths as f64)).collect();
            // n_steps 128 -> 2048 is 4 halvings
            let order = libm::log2(residuals[0] / residuals[2]) / 4.0;
            assert!(order > 0.8, "refinement order {order} from {residuals:?}");
        }
    }

    #[test]
    fn realized_remainder_matches_boundary_word_formula_at_m1() {
        // R^1 as the sum over boundary words of integrals whose innermost
        // integrand is the coefficient functional along the path.
        let f_scalar = ScalarFn::Sin {
            amp: 1.0,
            freq: 1.0,
            phase: 0.0,
        };
        let v1 = ScalarFn::logistic(1.0, 1.0, 0.2);
        let f = make_cylinder(MultiFn::on_coord(2, 1, f_scalar));
        let vf = VectorFieldSet::new(vec![
            VectorField::zero(1),
            VectorField::componentwise(1, v1),
        ])
        .unwrap();
        let cfg = sim(4096, 1, 1.0);
        let (s, t) = (0.0, 0.5);
        for path_index in [0u64, 1, 2] {
            let drv = sample_driver(&cfg, path_index).unwrap();
            let y = solve_stratonovich(&vf, &[0.3], &drv).unwrap();
            let report = expand(&f, &vf, &[0.3], &drv, s, t, 1).unwrap();
            let mut boundary_total = 0.0;
            for word in boundary_set(1, 1, 3) {
                let coeff = apply_word(&vf, &word, &f).unwrap();
                let value =
                    iterated_integral_weighted(&drv, &word, s, t, &mut |r| coeff.eval(r, &y))
                        .unwrap();
                boundary_total += value;
            }
            let defect = (report.remainder - boundary_total).abs();
            assert!(
                defect < 5e-3 * (1.0 + report.remainder.abs()),
                "path {path_index}: realized {} vs boundary form {}",
                report.remainder,
                boundary_total
            );
        }
    }
}
