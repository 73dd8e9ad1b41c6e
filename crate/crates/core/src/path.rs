//! Sampled paths, the stopping operator, path metrics, and the Dupire bump.
//!
//! Paths live on finite grids. A continuous bounded-variation path is
//! represented with the piecewise-linear tag, a cadlag path with the
//! piecewise-constant tag. Grids may carry a duplicated time node to encode
//! a genuine jump (the Dupire bump): evaluation at the jump time returns the
//! post-jump value, evaluation just before it sees the pre-jump branch.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::domain_err;
use crate::Result;

/// How values between grid nodes are defined.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interpolation {
    /// Linear between consecutive nodes; the stand-in for continuous
    /// bounded-variation paths.
    Linear,
    /// Right-continuous steps: the value at `t` is the value at the largest
    /// grid time `<= t`.
    ConstantCadlag,
}

/// A vector-valued path sampled on a finite grid over `[0, T]`.
///
/// `times` is non-decreasing with `times[0] = 0`; values are stored row-major
/// (`n` rows of `dim` entries). Construction through [`SampledPath::new`]
/// enforces strictly increasing times; duplicated nodes only arise through
/// [`bump`].
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPath {
    times: Vec<f64>,
    values: Vec<f64>,
    dim: usize,
    interp: Interpolation,
}

impl SampledPath {
    /// Builds a path from a strictly increasing grid starting at 0.
    pub fn new(
        times: Vec<f64>,
        values: Vec<f64>,
        dim: usize,
        interp: Interpolation,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(domain_err!("path dimension must be positive"));
        }
        if times.is_empty() {
            return Err(domain_err!("path needs at least one grid node"));
        }
        if times[0] != 0.0 {
            return Err(domain_err!("grid must start at 0, got {}", times[0]));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(domain_err!("grid times must be strictly increasing"));
        }
        if values.len() != times.len() * dim {
            return Err(domain_err!(
                "expected {} values ({} nodes x dim {}), got {}",
                times.len() * dim,
                times.len(),
                dim,
                values.len()
            ));
        }
        if values.iter().any(|v| !v.is_finite()) || times.iter().any(|t| !t.is_finite()) {
            return Err(domain_err!("path entries must be finite"));
        }
        Ok(Self {
            times,
            values,
            dim,
            interp,
        })
    }

    /// Constant path at `value` on `[0, horizon]`.
    pub fn constant(value: &[f64], horizon: f64, interp: Interpolation) -> Result<Self> {
        let mut vals = Vec::with_capacity(2 * value.len());
        vals.extend_from_slice(value);
        vals.extend_from_slice(value);
        Self::new(vec![0.0, horizon], vals, value.len(), interp)
    }

    /// Scalar path sampled from `f` on `n_steps + 1` uniform nodes.
    pub fn sample_scalar(horizon: f64, n_steps: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if n_steps == 0 || !(horizon > 0.0) {
            return Err(domain_err!("need n_steps >= 1 and horizon > 0"));
        }
        let n = n_steps + 1;
        let mut times = Vec::with_capacity(n);
        let mut values = Vec::with_capacity(n);
        for j in 0..n {
            let t = horizon * j as f64 / n_steps as f64;
            times.push(t);
            values.push(f(t));
        }
        Self::new(times, values, 1, Interpolation::Linear)
    }

    // Internal constructor for grids with duplicated jump nodes.
    pub(crate) fn from_parts(
        times: Vec<f64>,
        values: Vec<f64>,
        dim: usize,
        interp: Interpolation,
    ) -> Self {
        debug_assert!(times.windows(2).all(|w| w[1] >= w[0]));
        debug_assert_eq!(values.len(), times.len() * dim);
        Self {
            times,
            values,
            dim,
            interp,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn interp(&self) -> Interpolation {
        self.interp
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value vector at grid node `j`.
    pub fn row(&self, j: usize) -> &[f64] {
        &self.values[j * self.dim..(j + 1) * self.dim]
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !(0.0..=self.horizon()).contains(&t) {
            return Err(domain_err!(
                "time {t} outside [0, {horizon}]",
                horizon = self.horizon()
            ));
        }
        Ok(())
    }

    /// Index of the last grid node with time `<= t` (the later node for a
    /// duplicated jump time).
    fn node_at_or_before(&self, t: f64) -> usize {
        self.times.partition_point(|&u| u <= t).saturating_sub(1)
    }

    /// Evaluates coordinate `c` (0-based) at time `t`.
    pub fn eval_coord(&self, t: f64, c: usize) -> Result<f64> {
        self.check_time(t)?;
        if c >= self.dim {
            return Err(domain_err!(
                "coordinate {c} out of range for dim {}",
                self.dim
            ));
        }
        let k = self.node_at_or_before(t);
        if self.times[k] == t || k + 1 == self.times.len() {
            return Ok(self.row(k)[c]);
        }
        match self.interp {
            Interpolation::ConstantCadlag => Ok(self.row(k)[c]),
            Interpolation::Linear => {
                let (t0, t1) = (self.times[k], self.times[k + 1]);
                let w = (t - t0) / (t1 - t0);
                Ok(self.row(k)[c] + w * (self.row(k + 1)[c] - self.row(k)[c]))
            }
        }
    }

    /// Evaluates the full value vector at time `t` into `out`.
    pub fn eval_into(&self, t: f64, out: &mut [f64]) -> Result<()> {
        self.check_time(t)?;
        if out.len() != self.dim {
            return Err(domain_err!("output buffer has wrong dimension"));
        }
        let k = self.node_at_or_before(t);
        if self.times[k] == t || k + 1 == self.times.len() {
            out.copy_from_slice(self.row(k));
            return Ok(());
        }
        match self.interp {
            Interpolation::ConstantCadlag => out.copy_from_slice(self.row(k)),
            Interpolation::Linear => {
                let (t0, t1) = (self.times[k], self.times[k + 1]);
                let w = (t - t0) / (t1 - t0);
                let (a, b) = (self.row(k), self.row(k + 1));
                for (o, (x, y)) in out.iter_mut().zip(a.iter().zip(b.iter())) {
                    *o = x + w * (y - x);
                }
            }
        }
        Ok(())
    }

    /// Evaluates the full value vector at time `t`.
    pub fn eval(&self, t: f64) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim];
        self.eval_into(t, &mut out)?;
        Ok(out)
    }
}

/// A time-path pair, the point at which nonanticipative functionals act.
#[derive(Debug, Clone)]
pub struct StoppedPoint {
    pub t: f64,
    pub path: SampledPath,
}

impl StoppedPoint {
    pub fn new(t: f64, path: SampledPath) -> Result<Self> {
        if !(0.0..=path.horizon()).contains(&t) {
            return Err(domain_err!("stopping time {t} outside path horizon"));
        }
        Ok(Self { t, path })
    }
}

/// The stopping operator: agrees with `path` on `[0, t]`, frozen at
/// `path(t)` afterwards. The returned grid contains `t` as a node.
pub fn stop_at(path: &SampledPath, t: f64) -> Result<SampledPath> {
    path.check_time(t)?;
    let frozen = path.eval(t)?;
    let n = path.len();
    let mut times = Vec::with_capacity(n + 1);
    let mut values = Vec::with_capacity((n + 1) * path.dim);
    let mut seen_t = false;
    for j in 0..n {
        let u = path.times[j];
        if u > t && !seen_t {
            times.push(t);
            values.extend_from_slice(&frozen);
            seen_t = true;
        }
        if u == t {
            seen_t = true;
        }
        times.push(u);
        if u <= t {
            values.extend_from_slice(path.row(j));
        } else {
            values.extend_from_slice(&frozen);
        }
    }
    if !seen_t {
        // t beyond the last node cannot happen (t <= horizon = last node).
        times.push(t);
        values.extend_from_slice(&frozen);
    }
    Ok(SampledPath::from_parts(
        times,
        values,
        path.dim,
        path.interp,
    ))
}

/// 1-variation of a sampled path: the sum over grid cells of Euclidean
/// increment norms. Exact for piecewise-linear paths (the supremum over
/// dissections is attained on the grid); for cadlag step paths it counts
/// jump magnitudes.
pub fn one_var_norm(path: &SampledPath) -> f64 {
    let mut total = 0.0;
    for j in 0..path.len().saturating_sub(1) {
        let (a, b) = (path.row(j), path.row(j + 1));
        let mut s = 0.0;
        for (x, y) in a.iter().zip(b.iter()) {
            let d = y - x;
            s += d * d;
        }
        total += libm::sqrt(s);
    }
    total
}

/// Largest Euclidean node value over the grid; the sup norm for sampled
/// representations (attained at nodes for both interpolation tags).
pub fn sup_norm(path: &SampledPath) -> f64 {
    let mut best = 0.0;
    for j in 0..path.len() {
        let mut s = 0.0;
        for x in path.row(j) {
            s += x * x;
        }
        let s = libm::sqrt(s);
        if s > best {
            best = s;
        }
    }
    best
}

// Counts consecutive nodes sharing `times[start]`.
fn run_len(times: &[f64], start: usize) -> usize {
    let t = times[start];
    times[start..].iter().take_while(|&&u| u == t).count()
}

/// Pointwise difference `a - b` on the merged grid (union of time nodes,
/// keeping the larger jump multiplicity per time so pre/post-jump branches
/// survive). Both paths must share horizon and dimension.
pub fn merged_difference(a: &SampledPath, b: &SampledPath) -> Result<SampledPath> {
    if a.dim != b.dim {
        return Err(domain_err!("dimension mismatch: {} vs {}", a.dim, b.dim));
    }
    if a.horizon() != b.horizon() {
        return Err(domain_err!(
            "horizon mismatch: {} vs {}",
            a.horizon(),
            b.horizon()
        ));
    }
    let dim = a.dim;
    let mut times = Vec::new();
    let mut values = Vec::new();
    let (mut i, mut j) = (0usize, 0usize);
    let mut buf_a = vec![0.0; dim];
    let mut buf_b = vec![0.0; dim];
    while i < a.len() || j < b.len() {
        let ta = a.times.get(i).copied().unwrap_or(f64::INFINITY);
        let tb = b.times.get(j).copied().unwrap_or(f64::INFINITY);
        let t = ta.min(tb);
        let na = if ta == t { run_len(&a.times, i) } else { 0 };
        let nb = if tb == t { run_len(&b.times, j) } else { 0 };
        let occ = na.max(nb).max(1);
        for k in 0..occ {
            match na {
                0 => a.eval_into(t, &mut buf_a)?,
                _ => buf_a.copy_from_slice(a.row(i + k.min(na - 1))),
            }
            match nb {
                0 => b.eval_into(t, &mut buf_b)?,
                _ => buf_b.copy_from_slice(b.row(j + k.min(nb - 1))),
            }
            times.push(t);
            for c in 0..dim {
                values.push(buf_a[c] - buf_b[c]);
            }
        }
        i += na;
        j += nb;
    }
    let interp = if a.interp == Interpolation::Linear && b.interp == Interpolation::Linear {
        Interpolation::Linear
    } else {
        Interpolation::ConstantCadlag
    };
    Ok(SampledPath::from_parts(times, values, dim, interp))
}

fn check_compatible(a: &StoppedPoint, b: &StoppedPoint) -> Result<()> {
    if a.path.dim != b.path.dim {
        return Err(domain_err!("stopped points have mismatched dimensions"));
    }
    if a.path.horizon() != b.path.horizon() {
        return Err(domain_err!("stopped points have mismatched horizons"));
    }
    Ok(())
}

/// The 1-variation metric: `|t - s| + |a_t x - a_s y|_{1-var}`.
pub fn rho_one_var(a: &StoppedPoint, b: &StoppedPoint) -> Result<f64> {
    check_compatible(a, b)?;
    let diff = merged_difference(&stop_at(&a.path, a.t)?, &stop_at(&b.path, b.t)?)?;
    Ok(libm::fabs(a.t - b.t) + one_var_norm(&diff))
}

/// The sup metric: `|t - s| + |a_t x - a_s y|_{∞}`.
pub fn rho_infty(a: &StoppedPoint, b: &StoppedPoint) -> Result<f64> {
    check_compatible(a, b)?;
    let diff = merged_difference(&stop_at(&a.path, a.t)?, &stop_at(&b.path, b.t)?)?;
    Ok(libm::fabs(a.t - b.t) + sup_norm(&diff))
}

/// The Dupire space perturbation `x + eps * e_coord * 1_{. >= t}` with
/// `coord` 1-based. The jump at `t > 0` is encoded by a duplicated grid node
/// (pre-jump value first); evaluation at `t` returns the bumped value.
pub fn bump(path: &SampledPath, t: f64, coord: usize, eps: f64) -> Result<SampledPath> {
    path.check_time(t)?;
    if coord == 0 || coord > path.dim {
        return Err(domain_err!(
            "bump coordinate {coord} out of range 1..={}",
            path.dim
        ));
    }
    if eps == 0.0 {
        return Ok(path.clone());
    }
    let c = coord - 1;
    let dim = path.dim;
    if t == 0.0 {
        // The indicator covers the whole horizon: shift every node, no jump.
        let mut values = path.values.clone();
        for j in 0..path.len() {
            values[j * dim + c] += eps;
        }
        return Ok(SampledPath::from_parts(
            path.times.clone(),
            values,
            dim,
            path.interp,
        ));
    }
    let pre = path.eval(t)?;
    let n = path.len();
    let mut times = Vec::with_capacity(n + 2);
    let mut values = Vec::with_capacity((n + 2) * dim);
    let mut inserted = false;
    let push_post = |times: &mut Vec<f64>, values: &mut Vec<f64>| {
        times.push(t);
        for (k, v) in pre.iter().enumerate() {
            values.push(if k == c { v + eps } else { *v });
        }
    };
    for j in 0..n {
        let u = path.times[j];
        if u <= t {
            // everything up to and at t stays on the pre-jump branch
            times.push(u);
            values.extend_from_slice(path.row(j));
        } else {
            if !inserted {
                if times.last() != Some(&t) {
                    times.push(t);
                    values.extend_from_slice(&pre);
                }
                push_post(&mut times, &mut values);
                inserted = true;
            }
            times.push(u);
            for (k, v) in path.row(j).iter().enumerate() {
                values.push(if k == c { v + eps } else { *v });
            }
        }
    }
    if !inserted {
        // bump at the horizon: only the endpoint moves
        if times.last() != Some(&t) {
            times.push(t);
            values.extend_from_slice(&pre);
        }
        push_post(&mut times, &mut values);
    }
    Ok(SampledPath::from_parts(times, values, dim, path.interp))
}
