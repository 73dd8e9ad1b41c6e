//! A catalog of smooth scalar functions closed under differentiation, and
//! ridge combinations of them on `R^n`.
//!
//! Derivation images and higher Dupire derivatives are assembled
//! symbolically, so every catalog family must return another catalog member
//! from [`ScalarFn::derivative`]. Boundedness (function and all derivatives)
//! is tracked so functionals can declare whether they satisfy the `C_b`
//! hypotheses.

use alloc::vec;
use alloc::vec::Vec;

fn poly_eval(coeffs: &[f64], y: f64) -> f64 {
    let mut acc = 0.0;
    for &c in coeffs.iter().rev() {
        acc = acc * y + c;
    }
    acc
}

fn poly_derivative(coeffs: &[f64]) -> Vec<f64> {
    if coeffs.len() <= 1 {
        return vec![0.0];
    }
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| k as f64 * c)
        .collect()
}

/// Smooth scalar functions with closed-form derivatives of every order.
#[derive(Debug, Clone, PartialEq)]
pub enum ScalarFn {
    /// `c0 + c1 y + c2 y^2 + …`
    Poly(Vec<f64>),
    /// `amp * sin(freq * y + phase)`; cosine is a phase shift.
    Sin { amp: f64, freq: f64, phase: f64 },
    /// `p(y) * exp(-rate * y^2)` with `rate > 0`.
    PolyExpNegSq { poly: Vec<f64>, rate: f64 },
    /// `q(sigma(scale * y + shift))` with `sigma` the logistic function and
    /// `q` a polynomial.
    LogisticPoly {
        outer: Vec<f64>,
        scale: f64,
        shift: f64,
    },
    /// `amp * exp(rate * y)`.
    Exp { amp: f64, rate: f64 },
}

impl ScalarFn {
    pub fn zero() -> Self {
        ScalarFn::Poly(vec![0.0])
    }

    pub fn constant(c: f64) -> Self {
        ScalarFn::Poly(vec![c])
    }

    pub fn identity() -> Self {
        ScalarFn::Poly(vec![0.0, 1.0])
    }

    /// `amp * cos(freq * y + phase)` via the sine family.
    pub fn cos(amp: f64, freq: f64, phase: f64) -> Self {
        ScalarFn::Sin {
            amp,
            freq,
            phase: phase + core::f64::consts::FRAC_PI_2,
        }
    }

    /// The plain logistic `1 / (1 + exp(-(scale*y + shift)))` scaled by `amp`.
    pub fn logistic(amp: f64, scale: f64, shift: f64) -> Self {
        ScalarFn::LogisticPoly {
            outer: vec![0.0, amp],
            scale,
            shift,
        }
    }

    pub fn eval(&self, y: f64) -> f64 {
        match self {
            ScalarFn::Poly(c) => poly_eval(c, y),
            ScalarFn::Sin { amp, freq, phase } => amp * libm::sin(freq * y + phase),
            ScalarFn::PolyExpNegSq { poly, rate } => poly_eval(poly, y) * libm::exp(-rate * y * y),
            ScalarFn::LogisticPoly {
                outer,
                scale,
                shift,
            } => {
                let u = 1.0 / (1.0 + libm::exp(-(scale * y + shift)));
                poly_eval(outer, u)
            }
            ScalarFn::Exp { amp, rate } => amp * libm::exp(rate * y),
        }
    }

    /// The exact derivative, again a catalog member.
    pub fn derivative(&self) -> ScalarFn {
        match self {
            ScalarFn::Poly(c) => ScalarFn::Poly(poly_derivative(c)),
            ScalarFn::Sin { amp, freq, phase } => ScalarFn::Sin {
                amp: amp * freq,
                freq: *freq,
                phase: phase + core::f64::consts::FRAC_PI_2,
            },
            ScalarFn::PolyExpNegSq { poly, rate } => {
                // (p' - 2 r y p) e^{-r y^2}
                let dp = poly_derivative(poly);
                let mut shifted = vec![0.0; poly.len() + 1];
                for (k, &c) in poly.iter().enumerate() {
                    shifted[k + 1] = -2.0 * rate * c;
                }
                let mut out = shifted;
                for (k, &c) in dp.iter().enumerate() {
                    out[k] += c;
                }
                ScalarFn::PolyExpNegSq {
                    poly: out,
                    rate: *rate,
                }
            }
            ScalarFn::LogisticPoly {
                outer,
                scale,
                shift,
            } => {
                // d/dy q(u) = scale * q'(u) * u * (1 - u)
                let dq = poly_derivative(outer);
                let mut out = vec![0.0; dq.len() + 2];
                for (k, &c) in dq.iter().enumerate() {
                    out[k + 1] += scale * c;
                    out[k + 2] -= scale * c;
                }
                ScalarFn::LogisticPoly {
                    outer: out,
                    scale: *scale,
                    shift: *shift,
                }
            }
            ScalarFn::Exp { amp, rate } => ScalarFn::Exp {
                amp: amp * rate,
                rate: *rate,
            },
        }
    }

    /// Multiplies the function by a constant.
    pub fn scaled(&self, factor: f64) -> ScalarFn {
        match self {
            ScalarFn::Poly(c) => ScalarFn::Poly(c.iter().map(|x| factor * x).collect()),
            ScalarFn::Sin { amp, freq, phase } => ScalarFn::Sin {
                amp: amp * factor,
                freq: *freq,
                phase: *phase,
            },
            ScalarFn::PolyExpNegSq { poly, rate } => ScalarFn::PolyExpNegSq {
                poly: poly.iter().map(|x| factor * x).collect(),
                rate: *rate,
            },
            ScalarFn::LogisticPoly {
                outer,
                scale,
                shift,
            } => ScalarFn::LogisticPoly {
                outer: outer.iter().map(|x| factor * x).collect(),
                scale: *scale,
                shift: *shift,
            },
            ScalarFn::Exp { amp, rate } => ScalarFn::Exp {
                amp: amp * factor,
                rate: *rate,
            },
        }
    }

    /// Whether the function and all its derivatives are bounded on `R`.
    pub fn is_bounded(&self) -> bool {
        match self {
            ScalarFn::Poly(c) => c.iter().skip(1).all(|&x| x == 0.0),
            ScalarFn::Sin { .. } => true,
            ScalarFn::PolyExpNegSq { rate, .. } => *rate > 0.0,
            ScalarFn::LogisticPoly { .. } => true,
            ScalarFn::Exp { amp, rate } => *amp == 0.0 || *rate == 0.0,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ScalarFn::Poly(c) if c.iter().all(|&x| x == 0.0))
    }
}

/// One ridge term `profile(w . x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ridge {
    pub weights: Vec<f64>,
    pub profile: ScalarFn,
}

/// A smooth function on `R^n` written as `constant + sum_k profile_k(w_k . x)`.
/// Closed under partial differentiation, which is what the symbolic
/// derivative assembly needs.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiFn {
    dim: usize,
    constant: f64,
    terms: Vec<Ridge>,
}

impl MultiFn {
    pub fn constant(dim: usize, c: f64) -> Self {
        Self {
            dim,
            constant: c,
            terms: Vec::new(),
        }
    }

    pub fn new(dim: usize, constant: f64, terms: Vec<Ridge>) -> Self {
        assert!(terms.iter().all(|t| t.weights.len() == dim));
        Self {
            dim,
            constant,
            terms,
        }
    }

    /// `profile(x_coord)` as a function on `R^dim`.
    pub fn on_coord(dim: usize, coord: usize, profile: ScalarFn) -> Self {
        assert!(coord < dim);
        let mut weights = vec![0.0; dim];
        weights[coord] = 1.0;
        Self {
            dim,
            constant: 0.0,
            terms: vec![Ridge { weights, profile }],
        }
    }

    /// The coordinate projection `x_coord`.
    pub fn coordinate(dim: usize, coord: usize) -> Self {
        Self::on_coord(dim, coord, ScalarFn::identity())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[Ridge] {
        &self.terms
    }

    pub fn constant_part(&self) -> f64 {
        self.constant
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        let mut acc = self.constant;
        for term in &self.terms {
            let mut u = 0.0;
            for (w, xi) in term.weights.iter().zip(x.iter()) {
                u += w * xi;
            }
            acc += term.profile.eval(u);
        }
        acc
    }

    /// The exact partial derivative in direction `coord`.
    pub fn partial(&self, coord: usize) -> MultiFn {
        assert!(coord < self.dim);
        let terms = self
            .terms
            .iter()
            .filter(|t| t.weights[coord] != 0.0)
            .map(|t| Ridge {
                weights: t.weights.clone(),
                profile: t.profile.derivative().scaled(t.weights[coord]),
            })
            .collect();
        MultiFn {
            dim: self.dim,
            constant: 0.0,
            terms,
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.terms.iter().all(|t| t.profile.is_bounded())
    }

    pub fn is_zero(&self) -> bool {
        self.constant == 0.0 && self.terms.iter().all(|t| t.profile.is_zero())
    }

    pub fn plus(&self, other: &MultiFn) -> MultiFn {
        assert_eq!(self.dim, other.dim);
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        MultiFn {
            dim: self.dim,
            constant: self.constant + other.constant,
            terms,
        }
    }

    pub fn scaled(&self, factor: f64) -> MultiFn {
        MultiFn {
            dim: self.dim,
            constant: factor * self.constant,
            terms: self
                .terms
                .iter()
                .map(|t| Ridge {
                    weights: t.weights.clone(),
                    profile: t.profile.scaled(factor),
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn numeric_derivative(f: &ScalarFn, y: f64) -> f64 {
        let h = 1e-6;
        (f.eval(y + h) - f.eval(y - h)) / (2.0 * h)
    }

    #[test]
    fn catalog_derivatives_match_finite_differences() {
        let fns = [
            ScalarFn::Poly(vec![1.0, -2.0, 0.5, 0.25]),
            ScalarFn::Sin {
                amp: 1.3,
                freq: 2.0,
                phase: 0.4,
            },
            ScalarFn::cos(0.7, 1.5, -0.2),
            ScalarFn::PolyExpNegSq {
                poly: vec![1.0, 0.5],
                rate: 0.8,
            },
            ScalarFn::logistic(1.0, 2.0, -0.5),
            ScalarFn::Exp {
                amp: 0.5,
                rate: -1.2,
            },
        ];
        for f in &fns {
            let df = f.derivative();
            for &y in &[-1.7, -0.3, 0.0, 0.9, 2.4] {
                let want = numeric_derivative(f, y);
                let got = df.eval(y);
                assert!(
                    (got - want).abs() < 1e-7 * (1.0 + want.abs()),
                    "{f:?} at {y}: analytic {got} vs numeric {want}"
                );
            }
        }
    }

    #[test]
    fn fourth_derivatives_stay_accurate() {
        // derivative closure must survive repeated application
        let f = ScalarFn::logistic(1.0, 1.0, 0.0);
        let d4 = f.derivative().derivative().derivative().derivative();
        // d^4/dy^4 sigma(y) at 0: sigma=1/2 -> known value 0
        assert!(d4.eval(0.0).abs() < 1e-14);
        let g = ScalarFn::Sin {
            amp: 1.0,
            freq: 1.0,
            phase: 0.0,
        };
        let g4 = g.derivative().derivative().derivative().derivative();
        for &y in &[-1.0, 0.5, 2.0] {
            assert!((g4.eval(y) - libm::sin(y)).abs() < 1e-12);
        }
    }

    #[test]
    fn boundedness_flags() {
        assert!(ScalarFn::Sin {
            amp: 2.0,
            freq: 1.0,
            phase: 0.0
        }
        .is_bounded());
        assert!(ScalarFn::logistic(1.0, 1.0, 0.0).is_bounded());
        assert!(ScalarFn::constant(3.0).is_bounded());
        assert!(!ScalarFn::identity().is_bounded());
        assert!(!ScalarFn::Exp {
            amp: 1.0,
            rate: 1.0
        }
        .is_bounded());
        assert!(ScalarFn::PolyExpNegSq {
            poly: vec![0.0, 1.0],
            rate: 0.5
        }
        .is_bounded());
    }

    #[test]
    fn ridge_partials_match_finite_differences() {
        let f = MultiFn::new(
            3,
            0.7,
            vec![
                Ridge {
                    weights: vec![1.0, -0.5, 0.0],
                    profile: ScalarFn::Sin {
                        amp: 1.0,
                        freq: 1.3,
                        phase: 0.2,
                    },
                },
                Ridge {
                    weights: vec![0.0, 2.0, 1.0],
                    profile: ScalarFn::logistic(0.8, 1.0, 0.1),
                },
            ],
        );
        let x = [0.3, -0.6, 1.1];
        let h = 1e-6;
        for c in 0..3 {
            let mut xp = x;
            let mut xm = x;
            xp[c] += h;
            xm[c] -= h;
            let want = (f.eval(&xp) - f.eval(&xm)) / (2.0 * h);
            let got = f.partial(c).eval(&x);
            assert!((got - want).abs() < 1e-7, "coord {c}: {got} vs {want}");
        }
    }
}
