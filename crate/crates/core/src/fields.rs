//! Tensor fields on a chart: vector fields, 1-forms, p-forms, endomorphisms.

use std::fmt;
use std::sync::Arc;

use crate::error::{GeometryError, Result};
use crate::metric::{ComponentFn, PointGeometry};
use crate::taylor::TaylorScalar;
use crate::tensor::{permutation_sign, Slot, Tensor};

/// A typed tensor field given by its coordinate components.
#[derive(Clone)]
pub struct TensorField {
    name: String,
    dim: usize,
    slots: Vec<Slot>,
    alternating: bool,
    eval: ComponentFn,
}

impl fmt::Debug for TensorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TensorField")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("slots", &self.slots)
            .field("alternating", &self.alternating)
            .finish()
    }
}

/// Strictly increasing index tuples of length `p` in lexicographic order.
pub fn increasing_tuples(dim: usize, p: usize) -> Vec<Vec<usize>> {
    fn rec(dim: usize, p: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == p {
            out.push(cur.clone());
            return;
        }
        for i in start..dim {
            cur.push(i);
            rec(dim, p, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(dim, p, 0, &mut Vec::new(), &mut out);
    out
}

impl TensorField {
    /// Field with arbitrary valence; `eval` returns the full row-major component array.
    pub fn general(
        name: impl Into<String>,
        dim: usize,
        slots: Vec<Slot>,
        eval: impl Fn(&[TaylorScalar]) -> Vec<TaylorScalar> + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            dim,
            slots,
            alternating: false,
            eval: Arc::new(eval),
        }
    }

    /// Vector field from its contravariant components.
    pub fn vector(
        name: impl Into<String>,
        dim: usize,
        eval: impl Fn(&[TaylorScalar]) -> Vec<TaylorScalar> + Send + Sync + 'static,
    ) -> Self {
        Self::general(name, dim, vec![Slot::Contra], eval)
    }

    /// Scalar function.
    pub fn scalar(
        name: impl Into<String>,
        dim: usize,
        eval: impl Fn(&[TaylorScalar]) -> TaylorScalar + Send + Sync + 'static,
    ) -> Self {
        Self::general(name, dim, Vec::new(), move |x| vec![eval(x)])
    }

    /// 1-form from its covariant components.
    pub fn one_form(
        name: impl Into<String>,
        dim: usize,
        eval: impl Fn(&[TaylorScalar]) -> Vec<TaylorScalar> + Send + Sync + 'static,
    ) -> Self {
        let mut f = Self::general(name, dim, vec![Slot::Co], eval);
        f.alternating = true;
        f
    }

    /// p-form from its components on strictly increasing index tuples (in the
    /// order of [`increasing_tuples`]); the remaining components are filled by
    /// antisymmetry, so the stored array is alternating by construction.
    pub fn form(
        name: impl Into<String>,
        dim: usize,
        p: usize,
        independent: impl Fn(&[TaylorScalar]) -> Vec<TaylorScalar> + Send + Sync + 'static,
    ) -> Self {
        let tuples = increasing_tuples(dim, p);
        let eval = move |x: &[TaylorScalar]| {
            let comps = independent(x);
            assert_eq!(comps.len(), tuples.len(), "independent form component count");
            let zero = x[0].zero_like();
            crate::tensor::multi_indices(dim, p)
                .map(|idx| {
                    let sign = permutation_sign(&idx);
                    if sign == 0.0 {
                        return zero.clone();
                    }
                    let mut sorted = idx.clone();
                    sorted.sort_unstable();
                    let k = tuples.iter().position(|t| *t == sorted).expect("tuple present");
                    &comps[k] * sign
                })
                .collect()
        };
        Self {
            name: name.into(),
            dim,
            slots: vec![Slot::Co; p],
            alternating: true,
            eval: Arc::new(eval),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn rank(&self) -> usize {
        self.slots.len()
    }

    pub fn is_alternating(&self) -> bool {
        self.alternating
    }

    /// Form degree, if the field is a form.
    pub fn form_degree(&self) -> Option<usize> {
        (self.alternating && self.slots.iter().all(|s| *s == Slot::Co)).then_some(self.slots.len())
    }

    /// Components at a point as Taylor jets at the geometry's order.
    pub fn evaluate(&self, geo: &PointGeometry) -> Result<Tensor<TaylorScalar>> {
        self.evaluate_at(geo.coords())
    }

    pub fn evaluate_at(&self, coords: &[TaylorScalar]) -> Result<Tensor<TaylorScalar>> {
        if coords.len() != self.dim {
            return Err(GeometryError::DimensionMismatch {
                expected: self.dim,
                got: coords.len(),
            });
        }
        let data = (self.eval)(coords);
        if data.len() != self.dim.pow(self.rank() as u32) {
            return Err(GeometryError::ValenceMismatch(format!(
                "field '{}' returned {} components for rank {}",
                self.name,
                data.len(),
                self.rank()
            )));
        }
        Ok(Tensor::from_vec(self.dim, self.slots.clone(), data))
    }

    /// Same field multiplied by a constant.
    pub fn scaled(&self, factor: f64) -> Self {
        let inner = self.eval.clone();
        Self {
            name: format!("{}*{factor}", self.name),
            dim: self.dim,
            slots: self.slots.clone(),
            alternating: self.alternating,
            eval: Arc::new(move |x| inner(x).into_iter().map(|c| c * factor).collect()),
        }
    }
}

/// Constant-coefficient vector field.
pub fn constant_vector(name: &str, components: Vec<f64>) -> TensorField {
    let dim = components.len();
    TensorField::vector(name, dim, move |x| {
        components.iter().map(|&c| x[0].constant_like(c)).collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tuples_are_lexicographic() {
        assert_eq!(
            increasing_tuples(3, 2),
            vec![vec![0, 1], vec![0, 2], vec![1, 2]]
        );
        assert_eq!(increasing_tuples(4, 4).len(), 1);
    }

    #[test]
    fn form_components_are_exactly_alternating() {
        let f = TensorField::form("w", 3, 2, |x| {
            vec![x[0].sin(), &x[0] * &x[1], x[2].exp()]
        });
        let coords = TaylorScalar::variables(&[0.3, -0.2, 0.9], 2);
        let t = f.evaluate_at(&coords).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let a = t.get(&[i, j]);
                let b = t.get(&[j, i]);
                assert_eq!(a.coefficients(), (-b).coefficients());
            }
        }
        assert_eq!(f.form_degree(), Some(2));
    }
}
