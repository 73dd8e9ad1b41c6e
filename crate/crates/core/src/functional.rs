//! Nonanticipative functionals `F(t, x)` with Dupire time/space derivatives.
//!
//! The time derivative freezes the path and advances the clock,
//! `lim (F(t+eps, a_t x) - F(t, x)) / eps`; the space derivative bumps the
//! path from `t` onward, `lim (F(t, x + eps e_i 1_{.>=t}) - F(t, x)) / eps`.
//!
//! Built-in functionals carry exact derivatives assembled from combinators
//! (cylinder, running integral, product, linear combination), so repeated
//! differentiation and derivation images stay analytic to any depth. Numeric
//! quotients are available as a cross-check and for functionals without
//! analytic derivatives; nesting numeric quotients deeper than two letters
//! is refused since the noise makes the result meaningless.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{contract_err, domain_err};
use crate::path::{bump, stop_at, sup_norm, SampledPath};
use crate::scalar::{MultiFn, Ridge, ScalarFn};
use crate::Result;

/// Declared differentiability: how many time and space derivatives exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Smoothness {
    /// At most `time` time letters and `space` space letters per word.
    Class {
        time: usize,
        space: usize,
    },
    Infinite,
}

impl Smoothness {
    /// Checks a derivative word (letters over `{0,…,e}`) against the class:
    /// the count of zero letters must not exceed the time order, nonzero
    /// letters the space order.
    pub fn admits(&self, word: &[u8]) -> bool {
        match self {
            Smoothness::Infinite => true,
            Smoothness::Class { time, space } => {
                let zeros = word.iter().filter(|&&a| a == 0).count();
                zeros <= *time && word.len() - zeros <= *space
            }
        }
    }
}

/// A nonanticipative functional of a sampled path.
pub trait Functional: core::fmt::Debug + Send + Sync {
    /// State dimension `e` of paths this functional acts on.
    fn space_dim(&self) -> usize;

    fn eval(&self, t: f64, x: &SampledPath) -> Result<f64>;

    /// Analytic Dupire derivative along `letter` (0 = time, `1..=e` =
    /// space), if the functional carries one.
    fn derivative(&self, letter: usize) -> Option<FunctionalHandle>;

    fn smoothness(&self) -> Smoothness {
        Smoothness::Infinite
    }

    /// Whether the functional and its derivatives are bounded (the `C_b`
    /// hypothesis under which the L2 remainder estimate holds).
    fn is_bounded(&self) -> bool;
}

pub type FunctionalHandle = Arc<dyn Functional>;

const STACK_DIM: usize = 8;

/// `F(t, x) = f(t, x_t)` for a smooth `f` on `R^{1+e}`; derivatives reduce
/// to classical partials of `f`.
#[derive(Debug, Clone)]
pub struct Cylinder {
    f: MultiFn,
}

impl Cylinder {
    pub fn new(f: MultiFn) -> Self {
        assert!(f.dim() >= 2, "cylinder function acts on (t, y1..ye)");
        Self { f }
    }
}

impl Functional for Cylinder {
    fn space_dim(&self) -> usize {
        self.f.dim() - 1
    }

    fn eval(&self, t: f64, x: &SampledPath) -> Result<f64> {
        check_dims(self, x)?;
        let mut args = [0.0f64; STACK_DIM + 1];
        if self.f.dim() <= STACK_DIM + 1 {
            args[0] = t;
            x.eval_into(t, &mut args[1..self.f.dim()])?;
            Ok(self.f.eval(&args[..self.f.dim()]))
        } else {
            let mut v = vec![t];
            v.extend(x.eval(t)?);
            Ok(self.f.eval(&v))
        }
    }

    fn derivative(&self, letter: usize) -> Option<FunctionalHandle> {
        if letter >= self.f.dim() {
            return None;
        }
        Some(Arc::new(Cylinder {
            f: self.f.partial(letter),
        }))
    }

    fn is_bounded(&self) -> bool {
        self.f.is_bounded()
    }
}

/// `F(t, x) = f( integral_0^t g(x_r) dr )` with trapezoidal quadrature on
/// the path grid. The space derivative vanishes (the bump acts on `[t, T]`,
/// a null set for the integral up to `t`); the time derivative is
/// `g(x_t) f'(integral)`.
#[derive(Debug, Clone)]
pub struct RunningIntegral {
    outer: ScalarFn,
    inner: MultiFn,
}

impl RunningIntegral {
    pub fn new(outer: ScalarFn, inner: MultiFn) -> Self {
        Self { outer, inner }
    }

    fn accumulate(&self, t: f64, x: &SampledPath) -> Result<f64> {
        let times = x.times();
        let mut acc = 0.0;
        let mut prev_g = self.inner.eval(x.row(0));
        let mut prev_t = times[0];
        for j in 1..x.len() {
            if times[j] > t {
                break;
            }
            let g = self.inner.eval(x.row(j));
            acc += 0.5 * (prev_g + g) * (times[j] - prev_t);
            prev_g = g;
            prev_t = times[j];
        }
        if t > prev_t {
            let state = x.eval(t)?;
            let g = self.inner.eval(&state);
            acc += 0.5 * (prev_g + g) * (t - prev_t);
        }
        Ok(acc)
    }
}

impl Functional for RunningIntegral {
    fn space_dim(&self) -> usize {
        self.inner.dim()
    }

    fn eval(&self, t: f64, x: &SampledPath) -> Result<f64> {
        check_dims(self, x)?;
        Ok(self.outer.eval(self.accumulate(t, x)?))
    }

    fn derivative(&self, letter: usize) -> Option<FunctionalHandle> {
        if letter == 0 {
            // g(x_t) * f'(A_t)
            let speed = Cylinder::new(lift_over_time(&self.inner));
            let outer_image = RunningIntegral {
                outer: self.outer.derivative(),
                inner: self.inner.clone(),
            };
            Some(product(Arc::new(speed), Arc::new(outer_image)))
        } else if letter <= self.inner.dim() {
            Some(constant(0.0, self.inner.dim()))
        } else {
            None
        }
    }

    fn is_bounded(&self) -> bool {
        self.outer.is_bounded() && self.inner.is_bounded()
    }
}

// Lifts g(y) on R^e to (t, y) on R^{1+e}, ignoring t.
fn lift_over_time(g: &MultiFn) -> MultiFn {
    let dim = g.dim() + 1;
    let terms = g
        .terms()
        .iter()
        .map(|r| {
            let mut weights = vec![0.0];
            weights.extend_from_slice(&r.weights);
            Ridge {
                weights,
                profile: r.profile.clone(),
            }
        })
        .collect();
    MultiFn::new(dim, g.constant_part(), terms)
}

/// Pointwise product with Leibniz-assembled derivatives.
#[derive(Debug, Clone)]
pub struct ProductFunctional {
    a: FunctionalHandle,
    b: FunctionalHandle,
}

impl Functional for ProductFunctional {
    fn space_dim(&self) -> usize {
        self.a.space_dim()
    }

    fn eval(&self, t: f64, x: &SampledPath) -> Result<f64> {
        Ok(self.a.eval(t, x)? * self.b.eval(t, x)?)
    }

    fn derivative(&self, letter: usize) -> Option<FunctionalHandle> {
        let da = self.a.derivative(letter)?;
        let db = self.b.derivative(letter)?;
        Some(lin_comb(alloc::vec![
            (1.0, product(da, self.b.clone())),
            (1.0, product(self.a.clone(), db)),
        ]))
    }

    fn is_bounded(&self) -> bool {
        self.a.is_bounded() && self.b.is_bounded()
    }
}

/// Linear combination of functionals.
#[derive(Debug, Clone)]
pub struct LinComb {
    terms: Vec<(f64, FunctionalHandle)>,
    space_dim: usize,
}

impl Functional for LinComb {
    fn space_dim(&self) -> usize {
        self.space_dim
    }

    fn eval(&self, t: f64, x: &SampledPath) -> Result<f64> {
        let mut acc = 0.0;
        for (c, f) in &self.terms {
            acc += c * f.eval(t, x)?;
        }
        Ok(acc)
    }

    fn derivative(&self, letter: usize) -> Option<FunctionalHandle> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for (c, f) in &self.terms {
            terms.push((*c, f.derivative(letter)?));
        }
        Some(Arc::new(LinComb {
            terms,
            space_dim: self.space_dim,
        }))
    }

    fn is_bounded(&self) -> bool {
        self.terms.iter().all(|(_, f)| f.is_bounded())
    }
}

#[derive(Debug, Clone)]
struct ConstFunctional {
    value: f64,
    space_dim: usize,
}

impl Functional for ConstFunctional {
    fn space_dim(&self) -> usize {
        self.space_dim
    }

    fn eval(&self, _t: f64, _x: &SampledPath) -> Result<f64> {
        Ok(self.value)
    }

    fn derivative(&self, _letter: usize) -> Option<FunctionalHandle> {
        Some(Arc::new(ConstFunctional {
            value: 0.0,
            space_dim: self.space_dim,
        }))
    }

    fn is_bounded(&self) -> bool {
        true
    }
}

/// A numeric Dupire derivative treated as a functional of its own; carries
/// no further analytic derivatives.
#[derive(Debug, Clone)]
pub struct NumericDerivative {
    inner: FunctionalHandle,
    letter: usize,
    steps: DerivativeSteps,
}

impl Functional for NumericDerivative {
    fn space_dim(&self) -> usize {
        self.inner.space_dim()
    }

    fn eval(&self, t: f64, x: &SampledPath) -> Result<f64> {
        if self.letter == 0 {
            time_derivative(&self.inner, t, x, self.steps.time)
        } else {
            space_derivative(&self.inner, self.letter, t, x, self.steps.space)
        }
    }

    fn derivative(&self, _letter: usize) -> Option<FunctionalHandle> {
        None
    }

    fn is_bounded(&self) -> bool {
        self.inner.is_bounded()
    }
}

fn check_dims(f: &dyn Functional, x: &SampledPath) -> Result<()> {
    if f.space_dim() != x.dim() {
        return Err(domain_err!(
            "functional acts on dimension {}, path has {}",
            f.space_dim(),
            x.dim()
        ));
    }
    Ok(())
}

/// Builds `F(t, x) = f(t, x_t)` from a smooth `f` on `R^{1+e}` with analytic
/// partials.
pub fn make_cylinder(f: MultiFn) -> FunctionalHandle {
    Arc::new(Cylinder::new(f))
}

/// Builds `F(t, x) = f( integral_0^t g(x_r) dr )`.
pub fn make_running_integral(f: ScalarFn, g: MultiFn) -> FunctionalHandle {
    Arc::new(RunningIntegral::new(f, g))
}

pub fn product(a: FunctionalHandle, b: FunctionalHandle) -> FunctionalHandle {
    assert_eq!(
        a.space_dim(),
        b.space_dim(),
        "product factors must share the state dimension"
    );
    Arc::new(ProductFunctional { a, b })
}

pub fn lin_comb(terms: Vec<(f64, FunctionalHandle)>) -> FunctionalHandle {
    assert!(!terms.is_empty());
    let space_dim = terms[0].1.space_dim();
    assert!(terms.iter().all(|(_, f)| f.space_dim() == space_dim));
    Arc::new(LinComb { terms, space_dim })
}

pub fn constant(value: f64, space_dim: usize) -> FunctionalHandle {
    Arc::new(ConstFunctional { value, space_dim })
}

/// Step sizes for numeric derivative quotients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeSteps {
    pub time: f64,
    pub space: f64,
}

impl DerivativeSteps {
    /// Defaults: time step `1e-3 * T`, space step `1e-4` scaled by the path
    /// magnitude.
    pub fn for_path(x: &SampledPath) -> Self {
        Self {
            time: 1e-3 * x.horizon(),
            space: 1e-4 * (1.0 + sup_norm(x)),
        }
    }
}

/// One-sided time quotient `(F(t+h, a_t x) - F(t, x)) / h` (the definition
/// is one-sided; no extension beyond the horizon exists).
pub fn time_quotient(f: &FunctionalHandle, t: f64, x: &SampledPath, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(domain_err!("time step must be positive"));
    }
    if t + h > x.horizon() {
        return Err(domain_err!(
            "time quotient would step past the horizon: {} + {} > {}",
            t,
            h,
            x.horizon()
        ));
    }
    let frozen = stop_at(x, t)?;
    Ok((f.eval(t + h, &frozen)? - f.eval(t, x)?) / h)
}

/// Time derivative by Richardson extrapolation over steps `h` and `h/2`:
/// `2 D(h/2) - D(h)` cancels the leading one-sided error term.
pub fn time_derivative(f: &FunctionalHandle, t: f64, x: &SampledPath, h: f64) -> Result<f64> {
    let coarse = time_quotient(f, t, x, h)?;
    let fine = time_quotient(f, t, x, 0.5 * h)?;
    Ok(2.0 * fine - coarse)
}

/// Central space quotient via the Dupire bump in coordinate `coord`
/// (1-based).
pub fn space_derivative(
    f: &FunctionalHandle,
    coord: usize,
    t: f64,
    x: &SampledPath,
    eps: f64,
) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(domain_err!("space step must be positive"));
    }
    let up = bump(x, t, coord, eps)?;
    let down = bump(x, t, coord, -eps)?;
    Ok((f.eval(t, &up)? - f.eval(t, &down)?) / (2.0 * eps))
}

/// Applies a derivative word (letters over `{0,…,e}`, innermost letter
/// last), preferring analytic derivatives and falling back to numeric
/// quotients for at most two letters.
pub fn derivative_word(
    f: &FunctionalHandle,
    word: &[u8],
    t: f64,
    x: &SampledPath,
    steps: DerivativeSteps,
) -> Result<f64> {
    if !f.smoothness().admits(word) {
        return Err(contract_err!(
            "derivative word {word:?} outside the functional's declared class"
        ));
    }
    for &letter in word {
        if letter as usize > f.space_dim() {
            return Err(domain_err!(
                "derivative letter {letter} out of range 0..={}",
                f.space_dim()
            ));
        }
    }
    let mut g = f.clone();
    let mut remaining = word;
    while let Some((&letter, rest)) = remaining.split_last() {
        match g.derivative(letter as usize) {
            Some(d) => {
                g = d;
                remaining = rest;
            }
            None => break,
        }
    }
    match remaining.len() {
        0 => g.eval(t, x),
        1 => numeric_apply(remaining[0] as usize, &g, t, x, steps),
        2 => {
            let inner: FunctionalHandle = Arc::new(NumericDerivative {
                inner: g,
                letter: remaining[1] as usize,
                steps,
            });
            numeric_apply(remaining[0] as usize, &inner, t, x, steps)
        }
        _ => Err(contract_err!(
            "word {word:?} needs {} nested numeric quotients; pure finite \
             differences beyond depth 2 are meaningless at f64 precision, \
             provide analytic derivatives",
            remaining.len()
        )),
    }
}

fn numeric_apply(
    letter: usize,
    f: &FunctionalHandle,
    t: f64,
    x: &SampledPath,
    steps: DerivativeSteps,
) -> Result<f64> {
    if letter == 0 {
        time_derivative(f, t, x, steps.time)
    } else {
        space_derivative(f, letter, t, x, steps.space)
    }
}
