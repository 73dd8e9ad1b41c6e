//! Polynomial functionals on bounded-variation paths, least-squares
//! approximation of continuous functionals by truncated iterated-integral
//! series, and the separating-word search behind the density argument.
//!
//! A polynomial functional is `P(t, b) = Σ_I p_I ∫_{Δ(0,t)} db^I` over words
//! of length `1..=N`. Continuous functionals on a compact path family can be
//! approximated uniformly by such functionals; the experiments here fit the
//! coefficients by linear least squares on signature features and report
//! train/holdout sup errors.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::domain_err;
use crate::functional::FunctionalHandle;
use crate::integral::{iterated_integral, iterated_integrals_for, Driver, DriverKind};
use crate::linalg::lstsq;
use crate::path::{SampledPath, StoppedPoint};
use crate::word::{words_up_to_degree, MultiIndex};
use crate::Result;

/// A finite linear combination of iterated integrals from time 0.
#[derive(Debug, Clone)]
pub struct PolynomialFunctional {
    coeffs: BTreeMap<MultiIndex, f64>,
    alphabet: u8,
}

impl PolynomialFunctional {
    pub fn new(coeffs: BTreeMap<MultiIndex, f64>, alphabet: u8) -> Result<Self> {
        for word in coeffs.keys() {
            if word.max_letter() > alphabet {
                return Err(domain_err!(
                    "word {word} uses letters beyond alphabet bound {alphabet}"
                ));
            }
        }
        Ok(Self { coeffs, alphabet })
    }

    pub fn coefficients(&self) -> &BTreeMap<MultiIndex, f64> {
        &self.coeffs
    }

    pub fn alphabet(&self) -> u8 {
        self.alphabet
    }

    /// Highest word length with a coefficient.
    pub fn level(&self) -> usize {
        self.coeffs.keys().map(|w| w.degree()).max().unwrap_or(0)
    }

    /// Evaluates `Σ p_I ∫_{Δ(0,t)} db^I` for a bounded-variation path `b`
    /// (time coordinate prepended internally).
    pub fn eval(&self, t: f64, b: &SampledPath) -> Result<f64> {
        if b.dim() != self.alphabet as usize {
            return Err(domain_err!(
                "polynomial over {} letters applied to path of dimension {}",
                self.alphabet,
                b.dim()
            ));
        }
        let drv = Driver::from_bv_path(b);
        let words: Vec<MultiIndex> = self.coeffs.keys().cloned().collect();
        let sig = iterated_integrals_for(&drv, &words, 0.0, t)?;
        Ok(self.coeffs.iter().map(|(word, p)| p * sig[word]).sum())
    }
}

/// Outcome of a least-squares fit on signature features.
#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub poly: PolynomialFunctional,
    /// Max absolute error over the training corpus.
    pub train_sup_error: f64,
    pub rank: usize,
    /// The feature matrix was rank deficient and the minimum-norm solution
    /// was taken.
    pub rank_deficient: bool,
}

/// Signature feature row for one `(t, b)` sample: integrals of every word of
/// length `1..=level` in canonical order.
pub fn signature_features(b: &SampledPath, t: f64, words: &[MultiIndex]) -> Result<Vec<f64>> {
    let drv = Driver::from_bv_path(b);
    debug_assert_eq!(drv.kind(), DriverKind::BoundedVariation);
    let sig = iterated_integrals_for(&drv, words, 0.0, t)?;
    Ok(words.iter().map(|w| sig[w]).collect())
}

/// Fits coefficients of a level-`level` polynomial functional to
/// `target` over the corpus by least squares (orthogonal factorization,
/// relative rank tolerance `1e-10`; rank-deficient systems fall back to the
/// minimum-norm solution and are flagged).
pub fn fit(
    target: &FunctionalHandle,
    corpus: &[(f64, SampledPath)],
    level: usize,
) -> Result<FitOutcome> {
    if corpus.is_empty() || level == 0 {
        return Err(domain_err!("fit needs a nonempty corpus and level >= 1"));
    }
    let d = corpus[0].1.dim() as u8;
    let words = words_up_to_degree(level, d);
    let rows = corpus.len();
    let cols = words.len();
    let mut matrix = Vec::with_capacity(rows * cols);
    let mut rhs = Vec::with_capacity(rows);
    for (t, b) in corpus {
        matrix.extend(signature_features(b, *t, &words)?);
        rhs.push(target.eval(*t, b)?);
    }
    let solved = lstsq(&matrix, rows, cols, &rhs, 1e-10)?;
    let mut train_sup_error = 0.0f64;
    for (k, _) in corpus.iter().enumerate() {
        let fitted: f64 = (0..cols)
            .map(|j| matrix[k * cols + j] * solved.solution[j])
            .sum();
        train_sup_error = train_sup_error.max(libm::fabs(fitted - rhs[k]));
    }
    let coeffs: BTreeMap<MultiIndex, f64> = words
        .into_iter()
        .zip(solved.solution.iter().copied())
        .collect();
    Ok(FitOutcome {
        poly: PolynomialFunctional::new(coeffs, d)?,
        train_sup_error,
        rank: solved.rank,
        rank_deficient: solved.rank_deficient,
    })
}

/// Max absolute deviation of the fitted polynomial from the target over a
/// corpus (used for held-out evaluation).
pub fn sup_error_on(
    target: &FunctionalHandle,
    poly: &PolynomialFunctional,
    corpus: &[(f64, SampledPath)],
) -> Result<f64> {
    let mut sup = 0.0f64;
    for (t, b) in corpus {
        sup = sup.max(libm::fabs(target.eval(*t, b)? - poly.eval(*t, b)?));
    }
    Ok(sup)
}

/// Searches the word family from the separation argument: the time word
/// `(0)` when the times differ, then `(0^k, i)` for `k = 0..=max_zeros` and
/// `i = 1..=d`, returning the first word whose iterated integrals at the two
/// stopped points differ by more than `tol`.
pub fn find_separating_word(
    a: &StoppedPoint,
    b: &StoppedPoint,
    max_zeros: usize,
    tol: f64,
) -> Result<Option<MultiIndex>> {
    if a.path.dim() != b.path.dim() {
        return Err(domain_err!("paths have different dimensions"));
    }
    let d = a.path.dim() as u8;
    if libm::fabs(a.t - b.t) > tol {
        return Ok(Some(MultiIndex::from([0u8])));
    }
    let drv_a = Driver::from_bv_path(&a.path);
    let drv_b = Driver::from_bv_path(&b.path);
    for zeros in 0..=max_zeros {
        for letter in 1..=d {
            let mut letters = alloc::vec![0u8; zeros];
            letters.push(letter);
            let word = MultiIndex::new(letters);
            let va = iterated_integral(&drv_a, &word, 0.0, a.t)?;
            let vb = iterated_integral(&drv_b, &word, 0.0, b.t)?;
            if libm::fabs(va - vb) > tol {
                return Ok(Some(word));
            }
        }
    }
    Ok(None)
}

/// Member of the compact test family: `b(r) = Σ_k amps[k] sin((k+1) π r / T)`
/// sampled piecewise-linearly.
pub fn sine_path(horizon: f64, n_steps: usize, amps: &[f64]) -> Result<SampledPath> {
    SampledPath::sample_scalar(horizon, n_steps, |r| {
        amps.iter()
            .enumerate()
            .map(|(k, &a)| a * libm::sin((k as f64 + 1.0) * core::f64::consts::PI * r / horizon))
            .sum()
    })
}
