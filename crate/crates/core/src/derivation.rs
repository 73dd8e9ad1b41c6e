//! Vector fields lifted to derivations on functionals.
//!
//! A field `V_i : R^e -> R^e` is lifted to `V̄_i = (δ_{0i}, V_i^1, …, V_i^e)`
//! and acts on a functional by `V̄_i·F(t,y) = Σ_j V̄_i^j(y_t) ∂_j F(t,y)`.
//! The zeroth coordinate channels the functional's time decay: only the
//! drift-lifted field `V̄_0` ever touches `∂_0`.
//!
//! Word compositions follow the operator-product convention: for
//! `I = (a_1, …, a_k)`, `V̄_I·F` applies `V̄_{a_k}` first and `V̄_{a_1}`
//! last, which pairs the leftmost letter with the innermost integration
//! variable of the matching iterated integral.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{contract_err, domain_err};
use crate::functional::{constant, lin_comb, product, Cylinder, FunctionalHandle};
use crate::scalar::{MultiFn, Ridge, ScalarFn};
use crate::word::MultiIndex;
use crate::Result;

/// A smooth map `R^e -> R^e` with analytic derivatives per component.
#[derive(Debug, Clone)]
pub struct VectorField {
    components: Vec<MultiFn>,
}

impl VectorField {
    pub fn new(components: Vec<MultiFn>) -> Self {
        assert!(!components.is_empty());
        let e = components.len();
        assert!(
            components.iter().all(|c| c.dim() == e),
            "field components must be functions on R^e"
        );
        Self { components }
    }

    pub fn zero(dim: usize) -> Self {
        Self::new(alloc::vec![MultiFn::constant(dim, 0.0); dim])
    }

    /// Componentwise profile field: `V^j(y) = profile(y_j)`.
    pub fn componentwise(dim: usize, profile: ScalarFn) -> Self {
        Self::new(
            (0..dim)
                .map(|j| MultiFn::on_coord(dim, j, profile.clone()))
                .collect(),
        )
    }

    /// Affine field `y -> A y + b`, `A` given row-major.
    pub fn affine(dim: usize, a: &[f64], b: &[f64]) -> Self {
        assert_eq!(a.len(), dim * dim);
        assert_eq!(b.len(), dim);
        Self::new(
            (0..dim)
                .map(|j| {
                    let weights = a[j * dim..(j + 1) * dim].to_vec();
                    MultiFn::new(
                        dim,
                        b[j],
                        alloc::vec![Ridge {
                            weights,
                            profile: ScalarFn::identity(),
                        }],
                    )
                })
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, j: usize) -> &MultiFn {
        &self.components[j]
    }

    pub fn eval_into(&self, y: &[f64], out: &mut [f64]) {
        for (o, c) in out.iter_mut().zip(self.components.iter()) {
            *o = c.eval(y);
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.components.iter().all(|c| c.is_bounded())
    }
}

/// The fields `V_0, …, V_d` driving `dY = Σ_i V_i(Y) ∘dX^i` together with
/// their lifts.
#[derive(Debug, Clone)]
pub struct VectorFieldSet {
    fields: Vec<VectorField>,
}

impl VectorFieldSet {
    /// `fields[i]` is `V_i`; index 0 is the drift field.
    pub fn new(fields: Vec<VectorField>) -> Result<Self> {
        if fields.len() < 2 {
            return Err(domain_err!("need the drift field V0 and at least V1"));
        }
        let e = fields[0].dim();
        if fields.iter().any(|f| f.dim() != e) {
            return Err(domain_err!("all fields must share the state dimension"));
        }
        Ok(Self { fields })
    }

    /// State dimension `e`.
    pub fn state_dim(&self) -> usize {
        self.fields[0].dim()
    }

    /// Number of noise coordinates `d`.
    pub fn noise_dim(&self) -> usize {
        self.fields.len() - 1
    }

    pub fn field(&self, i: usize) -> &VectorField {
        &self.fields[i]
    }

    pub fn is_bounded(&self) -> bool {
        self.fields.iter().all(|f| f.is_bounded())
    }
}

// V^j(y_t) as a cylinder functional on (t, y).
fn component_cylinder(component: &MultiFn) -> FunctionalHandle {
    let dim = component.dim() + 1;
    let terms = component
        .terms()
        .iter()
        .map(|r| {
            let mut weights = alloc::vec![0.0];
            weights.extend_from_slice(&r.weights);
            Ridge {
                weights,
                profile: r.profile.clone(),
            }
        })
        .collect();
    Arc::new(Cylinder::new(MultiFn::new(
        dim,
        component.constant_part(),
        terms,
    )))
}

/// The derivation image `V̄_i · F = Σ_j V̄_i^j(y_t) ∂_j F`. The result
/// carries analytic derivatives assembled through the product and sum rules,
/// so repeated application stays analytic.
pub fn apply_derivation(
    vf: &VectorFieldSet,
    i: usize,
    f: &FunctionalHandle,
) -> Result<FunctionalHandle> {
    if i > vf.noise_dim() {
        return Err(domain_err!(
            "field index {i} out of range 0..={}",
            vf.noise_dim()
        ));
    }
    if f.space_dim() != vf.state_dim() {
        return Err(domain_err!(
            "functional dimension {} does not match field dimension {}",
            f.space_dim(),
            vf.state_dim()
        ));
    }
    let e = vf.state_dim();
    let mut terms: Vec<(f64, FunctionalHandle)> = Vec::new();
    if i == 0 {
        let d0 = f
            .derivative(0)
            .ok_or_else(|| contract_err!("functional lacks the analytic time derivative"))?;
        terms.push((1.0, d0));
    }
    for j in 1..=e {
        let component = vf.field(i).component(j - 1);
        if component.is_zero() {
            continue;
        }
        let dj = f.derivative(j).ok_or_else(|| {
            contract_err!("functional lacks the analytic space derivative in coordinate {j}")
        })?;
        terms.push((1.0, product(component_cylinder(component), dj)));
    }
    if terms.is_empty() {
        return Ok(constant(0.0, e));
    }
    Ok(lin_comb(terms))
}

/// The word composition `V̄_I · F`, rightmost letter applied first.
pub fn apply_word(
    vf: &VectorFieldSet,
    word: &MultiIndex,
    f: &FunctionalHandle,
) -> Result<FunctionalHandle> {
    let mut g = f.clone();
    for &letter in word.letters().iter().rev() {
        g = apply_derivation(vf, letter as usize, &g)?;
    }
    Ok(g)
}
