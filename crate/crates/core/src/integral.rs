//! Iterated integrals over the simplex `s <= t_1 <= … <= t_k <= t`.
//!
//! For a word `I = (a_1, …, a_k)` the letter `a_1` pairs with the innermost
//! (earliest) integration variable and `a_k` with the outermost, so the
//! recursion integrates the `(k-1)`-prefix as a function of the outer
//! variable against `dX^{a_k}`.
//!
//! Discretization: each cell contributes `0.5 (f_j + f_{j+1}) dX_j` — the
//! trapezoidal rule on the integrand times exact grid increments. For
//! piecewise-linear bounded-variation drivers this is exact at level one and
//! for affine integrands, with O(h^2) cell error for higher words; for
//! sampled semimartingales the same weights are the midpoint (Stratonovich)
//! rule. Tests control the error by grid refinement.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::domain_err;
use crate::path::{Interpolation, SampledPath};
use crate::word::MultiIndex;
use crate::Result;

/// How a driver's sampled values are to be interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriverKind {
    /// A continuous bounded-variation path (piecewise linear between nodes).
    BoundedVariation,
    /// A sampled continuous semimartingale; integrals are Stratonovich.
    Stratonovich,
}

/// A `(d+1)`-dimensional driving path whose coordinate 0 is time itself.
#[derive(Debug, Clone)]
pub struct Driver {
    path: SampledPath,
    kind: DriverKind,
}

impl Driver {
    pub fn new(path: SampledPath, kind: DriverKind) -> Result<Self> {
        if path.dim() < 1 {
            return Err(domain_err!("driver needs at least the time coordinate"));
        }
        for j in 0..path.len() {
            if path.row(j)[0] != path.times()[j] {
                return Err(domain_err!(
                    "driver coordinate 0 must equal grid time at node {j}: {} vs {}",
                    path.row(j)[0],
                    path.times()[j]
                ));
            }
        }
        Ok(Self { path, kind })
    }

    /// Wraps a bounded-variation path by prepending the time coordinate.
    pub fn from_bv_path(path: &SampledPath) -> Self {
        let n = path.len();
        let dim = path.dim() + 1;
        let mut values = Vec::with_capacity(n * dim);
        for j in 0..n {
            values.push(path.times()[j]);
            values.extend_from_slice(path.row(j));
        }
        Self {
            path: SampledPath::from_parts(path.times().to_vec(), values, dim, path.interp()),
            kind: DriverKind::BoundedVariation,
        }
    }

    pub fn path(&self) -> &SampledPath {
        &self.path
    }

    pub fn kind(&self) -> DriverKind {
        self.kind
    }

    /// Number of non-time coordinates `d`.
    pub fn noise_dim(&self) -> usize {
        self.path.dim() - 1
    }

    pub fn horizon(&self) -> f64 {
        self.path.horizon()
    }
}

// Driver values restricted to [s, t]: interior grid nodes plus interpolated
// endpoints.
struct Window {
    times: Vec<f64>,
    values: Vec<f64>,
    dim: usize,
}

impl Window {
    fn build(drv: &Driver, s: f64, t: f64) -> Result<Self> {
        if !(0.0..=drv.horizon()).contains(&s) || !(0.0..=drv.horizon()).contains(&t) {
            return Err(domain_err!("window [{s}, {t}] escapes the driver horizon"));
        }
        if s > t {
            return Err(domain_err!("window start {s} exceeds end {t}"));
        }
        let path = &drv.path;
        let dim = path.dim();
        let grid = path.times();
        let lo = grid.partition_point(|&u| u <= s);
        let hi = grid.partition_point(|&u| u < t).max(lo);
        let mut times = Vec::with_capacity(hi - lo + 2);
        let mut values = Vec::with_capacity((hi - lo + 2) * dim);
        times.push(s);
        values.extend(path.eval(s)?);
        for j in lo..hi {
            times.push(grid[j]);
            values.extend_from_slice(path.row(j));
        }
        if t > s {
            times.push(t);
            values.extend(path.eval(t)?);
        }
        Ok(Self { times, values, dim })
    }

    fn len(&self) -> usize {
        self.times.len()
    }

    fn coord(&self, j: usize, c: usize) -> f64 {
        self.values[j * self.dim + c]
    }

    /// One integration sweep: cumulative integral of `integrand` against
    /// coordinate `letter`, midpoint/trapezoid weights per cell.
    fn sweep(&self, integrand: &[f64], letter: usize) -> Vec<f64> {
        let n = self.len();
        let mut out = vec![0.0; n];
        for j in 1..n {
            let dx = self.coord(j, letter) - self.coord(j - 1, letter);
            out[j] = out[j - 1] + 0.5 * (integrand[j - 1] + integrand[j]) * dx;
        }
        out
    }
}

fn check_word(drv: &Driver, word: &MultiIndex) -> Result<()> {
    if word.max_letter() as usize > drv.noise_dim() {
        return Err(domain_err!(
            "word {word} uses letters beyond driver dimension {}",
            drv.noise_dim()
        ));
    }
    Ok(())
}

/// The iterated integral of the driver over the simplex on `[s, t]` indexed
/// by `word`.
pub fn iterated_integral(drv: &Driver, word: &MultiIndex, s: f64, t: f64) -> Result<f64> {
    check_word(drv, word)?;
    let window = Window::build(drv, s, t)?;
    let mut cum = vec![1.0; window.len()];
    for &letter in word.letters() {
        cum = window.sweep(&cum, letter as usize);
    }
    Ok(*cum.last().unwrap())
}

/// Iterated integral with an extra integrand evaluated at the innermost
/// variable: `∫ h(r_1) dX^{a_1}_{r_1} … dX^{a_k}_{r_k}`. This is the shape
/// of the expansion's remainder terms, whose coefficient functional rides on
/// the innermost time.
pub fn iterated_integral_weighted(
    drv: &Driver,
    word: &MultiIndex,
    s: f64,
    t: f64,
    innermost: &mut dyn FnMut(f64) -> Result<f64>,
) -> Result<f64> {
    check_word(drv, word)?;
    let window = Window::build(drv, s, t)?;
    let mut cum = Vec::with_capacity(window.len());
    for &u in &window.times {
        cum.push(innermost(u)?);
    }
    for &letter in word.letters() {
        cum = window.sweep(&cum, letter as usize);
    }
    Ok(*cum.last().unwrap())
}

/// Iterated integrals for an arbitrary word list, sharing inner-integral
/// sweeps across common prefixes.
pub fn iterated_integrals_for(
    drv: &Driver,
    words: &[MultiIndex],
    s: f64,
    t: f64,
) -> Result<BTreeMap<MultiIndex, f64>> {
    for word in words {
        check_word(drv, word)?;
    }
    let window = Window::build(drv, s, t)?;

    // prefix closure, shortest first, so each sweep can reuse its prefix
    let mut closure: Vec<MultiIndex> = Vec::new();
    for word in words {
        let mut cur = Some(word.clone());
        while let Some(w) = cur {
            if !closure.contains(&w) {
                closure.push(w.clone());
            }
            cur = w.prefix();
        }
    }
    closure.sort_by_key(|w| w.degree());

    let base = vec![1.0; window.len()];
    let mut arrays: BTreeMap<MultiIndex, Vec<f64>> = BTreeMap::new();
    for word in &closure {
        let inner = match word.prefix() {
            None => &base,
            Some(p) => &arrays[&p],
        };
        let cum = window.sweep(inner, word.last() as usize);
        arrays.insert(word.clone(), cum);
    }

    Ok(words
        .iter()
        .map(|w| (w.clone(), *arrays[w].last().unwrap()))
        .collect())
}

/// All iterated integrals for words of weight `<= m`, keyed in the canonical
/// word order.
pub fn signature_up_to(
    drv: &Driver,
    m: usize,
    s: f64,
    t: f64,
) -> Result<BTreeMap<MultiIndex, f64>> {
    let words = crate::word::enumerate_a(m, drv.noise_dim() as u8);
    iterated_integrals_for(drv, &words, s, t)
}

/// Samples a smooth deterministic path as a bounded-variation driver
/// (piecewise linear, time prepended).
pub fn bv_driver_from_fn(
    horizon: f64,
    n_steps: usize,
    dim: usize,
    f: impl Fn(f64, &mut [f64]),
) -> Result<Driver> {
    if n_steps == 0 || !(horizon > 0.0) {
        return Err(domain_err!("need n_steps >= 1 and horizon > 0"));
    }
    let n = n_steps + 1;
    let mut times = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n * dim);
    let mut buf = vec![0.0; dim];
    for j in 0..n {
        let t = horizon * j as f64 / n_steps as f64;
        times.push(t);
        f(t, &mut buf);
        values.extend_from_slice(&buf);
    }
    let path = SampledPath::new(times, values, dim, Interpolation::Linear)?;
    Ok(Driver::from_bv_path(&path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::{enumerate_a, shuffles};

    fn w(letters: &[u8]) -> MultiIndex {
        MultiIndex::new(letters)
    }

    fn ramp_driver(n: usize) -> Driver {
        // scalar path b(r) = r
        bv_driver_from_fn(1.0, n, 1, |t, out| out[0] = t).unwrap()
    }

    #[test]
    fn time_word_gives_interval_length() {
        let drv = ramp_driver(64);
        let v = iterated_integral(&drv, &w(&[0]), 0.2, 0.9).unwrap();
        assert!((v - 0.7).abs() < 1e-14);
    }

    #[test]
    fn single_letter_gives_increment() {
        let drv = bv_driver_from_fn(1.0, 128, 1, |t, out| out[0] = t * t).unwrap();
        let v = iterated_integral(&drv, &w(&[1]), 0.25, 0.75).unwrap();
        assert!((v - (0.5625 - 0.0625)).abs() < 1e-14);
    }

    #[test]
    fn all_zero_word_gives_simplex_volume() {
        // trapezoid is exact through level 2; higher levels see O(h^2)
        let drv = ramp_driver(1024);
        for k in 1..=4usize {
            let word = MultiIndex::new(alloc::vec![0u8; k]);
            let v = iterated_integral(&drv, &word, 0.0, 1.0).unwrap();
            let factorial: f64 = (1..=k).product::<usize>() as f64;
            let tol = if k <= 2 { 1e-12 } else { 1e-6 };
            assert!(
                (v - 1.0 / factorial).abs() < tol,
                "k = {k}: {v} vs {}",
                1.0 / factorial
            );
        }
    }

    #[test]
    fn repeated_letter_squares_the_increment() {
        let drv = bv_driver_from_fn(1.0, 200, 1, |t, out| out[0] = libm::sin(2.0 * t)).unwrap();
        let (s, t) = (0.1, 0.8);
        let inc = libm::sin(2.0 * t) - libm::sin(2.0 * s);
        let v = iterated_integral(&drv, &w(&[1, 1]), s, t).unwrap();
        assert!((v - 0.5 * inc * inc).abs() < 1e-12);
    }

    #[test]
    fn zeros_then_letter_matches_closed_form() {
        // I = (0, 1) on b(r) = r^2 over [0,1]: ∫_0^1 r d(r^2) = ∫ 2r^2 dr = 2/3
        let drv = bv_driver_from_fn(1.0, 4096, 1, |t, out| out[0] = t * t).unwrap();
        let v = iterated_integral(&drv, &w(&[0, 1]), 0.0, 1.0).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-6, "{v}");
    }

    #[test]
    fn rejects_bad_windows_and_letters() {
        let drv = ramp_driver(16);
        assert!(iterated_integral(&drv, &w(&[1]), 0.8, 0.2).is_err());
        assert!(iterated_integral(&drv, &w(&[2]), 0.0, 1.0).is_err());
        assert!(iterated_integral(&drv, &w(&[1]), 0.0, 1.5).is_err());
    }

    #[test]
    fn signature_of_constant_driver_is_time_only() {
        let drv = bv_driver_from_fn(2.0, 32, 1, |_, out| out[0] = 1.5).unwrap();
        let sig = signature_up_to(&drv, 2, 0.0, 2.0).unwrap();
        assert_eq!(sig[&w(&[1])], 0.0);
        assert!((sig[&w(&[0])] - 2.0).abs() < 1e-14);
        assert_eq!(sig[&w(&[1, 1])], 0.0);
        assert_eq!(sig.len(), 3);
    }

    #[test]
    fn signature_of_linear_path() {
        let drv = ramp_driver(64);
        let sig = signature_up_to(&drv, 2, 0.0, 1.0).unwrap();
        assert!((sig[&w(&[1])] - 1.0).abs() < 1e-14);
        assert!((sig[&w(&[0])] - 1.0).abs() < 1e-14);
        assert!((sig[&w(&[1, 1])] - 0.5).abs() < 1e-13);
    }

    #[test]
    fn cached_signature_matches_uncached_recursion() {
        // oracle: plain per-word recursion without prefix sharing
        let drv = bv_driver_from_fn(1.0, 257, 2, |t, out| {
            out[0] = 0.4 * libm::sin(3.0 * t) - 0.1 * t;
            out[1] = 0.3 * libm::cos(5.0 * t);
        })
        .unwrap();
        let (s, t) = (0.13, 0.87);
        let sig = signature_up_to(&drv, 4, s, t).unwrap();
        assert_eq!(sig.len(), enumerate_a(4, 2).len());
        for (word, &value) in &sig {
            let direct = iterated_integral(&drv, word, s, t).unwrap();
            assert!(
                (value - direct).abs() < 1e-12,
                "word {word}: cached {value} vs direct {direct}"
            );
        }
    }

    #[test]
    fn additivity_in_time_for_single_letters() {
        let drv = bv_driver_from_fn(1.0, 100, 1, |t, out| out[0] = libm::exp(-t)).unwrap();
        for letter in [0u8, 1] {
            let word = w(&[letter]);
            let whole = iterated_integral(&drv, &word, 0.1, 0.9).unwrap();
            let left = iterated_integral(&drv, &word, 0.1, 0.4).unwrap();
            let right = iterated_integral(&drv, &word, 0.4, 0.9).unwrap();
            assert!((whole - (left + right)).abs() < 1e-13);
        }
    }

    #[test]
    fn shuffle_identity_on_smooth_bv_paths() {
        let drv = bv_driver_from_fn(1.0, 4096, 1, |t, out| {
            out[0] = 0.4 * libm::sin(1.3 * t) + 0.2 * t;
        })
        .unwrap();
        let (s, t) = (0.0, 1.0);
        let words = enumerate_a(3, 1);
        for a in &words {
            for b in &words {
                if a.weight() + b.weight() > 5 {
                    continue;
                }
                let lhs = iterated_integral(&drv, a, s, t).unwrap()
                    * iterated_integral(&drv, b, s, t).unwrap();
                let mut rhs = 0.0;
                for k in shuffles(a, b) {
                    rhs += iterated_integral(&drv, &k, s, t).unwrap();
                }
                assert!(
                    (lhs - rhs).abs() < 1e-8,
                    "shuffle defect for {a} ⧢ {b}: {lhs} vs {rhs}"
                );
            }
        }
    }

    #[test]
    fn shuffle_defect_on_brownian_drivers_shrinks_with_the_grid() {
        // midpoint discretization: the identity holds up to O(h) per path
        let cfg = crate::sde::SimulationConfig {
            noise_dim: 1,
            state_dim: 1,
            horizon: 1.0,
            n_steps: 4096,
            substep_ratio: 1,
            seed: 314,
            n_paths: 1,
        };
        let pairs = [
            (w(&[1]), w(&[1, 1])),
            (w(&[1]), w(&[0, 1])),
            (w(&[1, 0]), w(&[1])),
        ];
        for path_index in [0u64, 1] {
            let fine = crate::sde::sample_driver(&cfg, path_index).unwrap();
            let mid = crate::sde::coarsen_driver(&fine).unwrap();
            let coarse = crate::sde::coarsen_driver(&mid).unwrap();
            for (a, b) in &pairs {
                let defect = |drv: &Driver| {
                    let lhs = iterated_integral(drv, a, 0.0, 1.0).unwrap()
                        * iterated_integral(drv, b, 0.0, 1.0).unwrap();
                    let rhs: f64 = shuffles(a, b)
                        .iter()
                        .map(|k| iterated_integral(drv, k, 0.0, 1.0).unwrap())
                        .sum();
                    (lhs - rhs).abs()
                };
                let (dc, df) = (defect(&coarse), defect(&fine));
                assert!(
                    df < 0.5 * dc || df < 1e-10,
                    "path {path_index}, {a} ⧢ {b}: defect {dc} -> {df} did not shrink"
                );
            }
            // the repeated letter squares the increment exactly in the
            // midpoint discretization, even on Brownian grids
            let b_inc = fine.path().row(fine.path().len() - 1)[1] - fine.path().row(0)[1];
            let sq = iterated_integral(&fine, &w(&[1, 1]), 0.0, 1.0).unwrap();
            assert!((sq - 0.5 * b_inc * b_inc).abs() < 1e-12);
        }
    }

    #[test]
    fn cached_signature_matches_uncached_on_brownian_grids() {
        let cfg = crate::sde::SimulationConfig {
            noise_dim: 2,
            state_dim: 1,
            horizon: 1.0,
            n_steps: 512,
            substep_ratio: 1,
            seed: 2718,
            n_paths: 1,
        };
        for path_index in [0u64, 5] {
            let drv = crate::sde::sample_driver(&cfg, path_index).unwrap();
            let sig = signature_up_to(&drv, 4, 0.1, 0.9).unwrap();
            for (word, &value) in &sig {
                let direct = iterated_integral(&drv, word, 0.1, 0.9).unwrap();
                assert!(
                    (value - direct).abs() < 1e-12,
                    "word {word}: cached {value} vs direct {direct}"
                );
            }
        }
    }

    #[test]
    fn weighted_innermost_integrand_reduces_to_plain_when_one() {
        let drv = bv_driver_from_fn(1.0, 300, 1, |t, out| out[0] = t * t - 0.3 * t).unwrap();
        let word = w(&[1, 0]);
        let plain = iterated_integral(&drv, &word, 0.1, 0.9).unwrap();
        let weighted = iterated_integral_weighted(&drv, &word, 0.1, 0.9, &mut |_| Ok(1.0)).unwrap();
        assert!((plain - weighted).abs() < 1e-15);

        // against a closed form: ∫_{s<r1<r2<t} r1 db_{r1} dr2 with b = r^2/2…
        // use b(r) = r so ∫ r dr inner: inner(r2) = (r2^2 - s^2)/2, then dr2.
        let ramp = ramp_driver(2000);
        let got = iterated_integral_weighted(&ramp, &word, 0.0, 1.0, &mut |r| Ok(r)).unwrap();
        // ∫_0^1 (r2^2/2) dr2 = 1/6
        assert!((got - 1.0 / 6.0).abs() < 1e-6, "{got}");
    }
}
