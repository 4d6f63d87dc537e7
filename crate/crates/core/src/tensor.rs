//! Dense tensors with per-slot valence, generic over the scalar type.
//!
//! Components are stored row-major over `dim^rank` entries. Slot 0 is the
//! slowest-varying index. For derivatives the new (differentiation) index is
//! always prepended, so `(∇T)[a, I] = (∇_a T)[I]`.

use crate::taylor::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Slot {
    /// Covariant (lower) index.
    Co,
    /// Contravariant (upper) index.
    Contra,
}

#[derive(Clone, Debug)]
pub struct Tensor<S> {
    dim: usize,
    slots: Vec<Slot>,
    data: Vec<S>,
}

impl<S: Scalar> Tensor<S> {
    pub fn filled(dim: usize, slots: Vec<Slot>, value: S) -> Self {
        let len = dim.pow(slots.len() as u32);
        Self {
            dim,
            slots,
            data: vec![value; len],
        }
    }

    pub fn from_vec(dim: usize, slots: Vec<Slot>, data: Vec<S>) -> Self {
        assert_eq!(data.len(), dim.pow(slots.len() as u32), "component count");
        Self { dim, slots, data }
    }

    pub fn from_fn(dim: usize, slots: Vec<Slot>, mut f: impl FnMut(&[usize]) -> S) -> Self {
        let rank = slots.len();
        let len = dim.pow(rank as u32);
        let mut idx = vec![0usize; rank];
        let mut data = Vec::with_capacity(len);
        for flat in 0..len {
            unflatten(flat, dim, &mut idx);
            data.push(f(&idx));
        }
        Self { dim, slots, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.slots.len()
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [S] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<S> {
        self.data
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank());
        idx.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    pub fn get(&self, idx: &[usize]) -> &S {
        &self.data[self.flat_index(idx)]
    }

    pub fn get_mut(&mut self, idx: &[usize]) -> &mut S {
        let f = self.flat_index(idx);
        &mut self.data[f]
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Tensor<T> {
        Tensor {
            dim: self.dim,
            slots: self.slots.clone(),
            data: self.data.iter().map(f).collect(),
        }
    }

    /// Plain values at the base point.
    pub fn values(&self) -> Tensor<f64> {
        self.map(|s| s.value())
    }

    pub fn scaled(&self, s: f64) -> Self {
        self.map(|x| x.scaled(s))
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(1.0, other)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(-1.0, other)
    }

    /// `self + s * other`.
    pub fn combine(&self, s: f64, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        assert_eq!(self.slots, other.slots, "slot layout mismatch");
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| {
                let mut out = a.clone();
                out.add_scaled(s, b);
                out
            })
            .collect();
        Self {
            dim: self.dim,
            slots: self.slots.clone(),
            data,
        }
    }

    /// Tensor product `self ⊗ other`.
    pub fn outer(&self, other: &Self) -> Self {
        let mut slots = self.slots.clone();
        slots.extend_from_slice(&other.slots);
        let mut data = Vec::with_capacity(self.data.len() * other.data.len());
        for a in &self.data {
            for b in &other.data {
                let mut out = a.zero_like();
                out.add_product(a, b);
                data.push(out);
            }
        }
        Self {
            dim: self.dim,
            slots,
            data,
        }
    }

    /// Contract slot `a` of `self` with slot `b` of `other`, placing the
    /// remaining slots of `self` first. No valence check: callers pair a lower
    /// index with an upper one, or work in an orthonormal frame.
    pub fn contract_with(&self, a: usize, other: &Self, b: usize) -> Self {
        let n = self.dim;
        let mut slots: Vec<Slot> = self.slots.clone();
        slots.remove(a);
        let mut oslots = other.slots.clone();
        oslots.remove(b);
        slots.extend_from_slice(&oslots);
        let r1 = self.rank() - 1;
        let template = self.data[0].zero_like();
        let mut ia = vec![0usize; self.rank()];
        let mut ib = vec![0usize; other.rank()];
        Tensor::from_fn(n, slots, |idx| {
            let mut acc = template.clone();
            for (k, v) in ia.iter_mut().enumerate() {
                *v = match k.cmp(&a) {
                    std::cmp::Ordering::Less => idx[k],
                    std::cmp::Ordering::Equal => 0,
                    std::cmp::Ordering::Greater => idx[k - 1],
                };
            }
            for (k, v) in ib.iter_mut().enumerate() {
                *v = match k.cmp(&b) {
                    std::cmp::Ordering::Less => idx[r1 + k],
                    std::cmp::Ordering::Equal => 0,
                    std::cmp::Ordering::Greater => idx[r1 + k - 1],
                };
            }
            for m in 0..n {
                ia[a] = m;
                ib[b] = m;
                acc.add_product(self.get(&ia), other.get(&ib));
            }
            acc
        })
    }

    /// Trace over two slots of the same tensor.
    pub fn trace(&self, a: usize, b: usize) -> Self {
        assert!(a != b);
        let n = self.dim;
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let mut slots = self.slots.clone();
        slots.remove(hi);
        slots.remove(lo);
        let template = self.data[0].zero_like();
        let mut full = vec![0usize; self.rank()];
        Tensor::from_fn(n, slots, |idx| {
            let mut k = 0;
            for (pos, v) in full.iter_mut().enumerate() {
                if pos != lo && pos != hi {
                    *v = idx[k];
                    k += 1;
                }
            }
            let mut acc = template.clone();
            for m in 0..n {
                full[lo] = m;
                full[hi] = m;
                acc.add_scaled(1.0, &self.data[self.flat_index(&full)]);
            }
            acc
        })
    }

    /// Reorder slots: result slot `k` is input slot `perm[k]`.
    pub fn permute(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.rank());
        let slots = perm.iter().map(|&p| self.slots[p]).collect();
        let mut src = vec![0usize; self.rank()];
        Tensor::from_fn(self.dim, slots, |idx| {
            for (k, &p) in perm.iter().enumerate() {
                src[p] = idx[k];
            }
            self.get(&src).clone()
        })
    }

    pub fn with_slots(mut self, slots: Vec<Slot>) -> Self {
        assert_eq!(slots.len(), self.slots.len());
        self.slots = slots;
        self
    }
}

impl Tensor<f64> {
    pub fn zeros(dim: usize, slots: Vec<Slot>) -> Self {
        Self::filled(dim, slots, 0.0)
    }

    pub fn scalar(dim: usize, value: f64) -> Self {
        Self::from_vec(dim, Vec::new(), vec![value])
    }

    /// Euclidean (Frobenius) norm of the component array. In an orthonormal
    /// frame this is the tensor norm.
    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

pub(crate) fn unflatten(mut flat: usize, dim: usize, idx: &mut [usize]) {
    for slot in idx.iter_mut().rev() {
        *slot = flat % dim;
        flat /= dim;
    }
}

/// Iterate all multi-indices of a given rank.
pub fn multi_indices(dim: usize, rank: usize) -> impl Iterator<Item = Vec<usize>> {
    let len = dim.pow(rank as u32);
    (0..len).map(move |flat| {
        let mut idx = vec![0; rank];
        unflatten(flat, dim, &mut idx);
        idx
    })
}

/// Sign of the permutation sorting `idx`, or 0 if an index repeats.
pub fn permutation_sign(idx: &[usize]) -> f64 {
    let mut v = idx.to_vec();
    let mut sign = 1.0;
    for i in 0..v.len() {
        for j in 0..v.len() - 1 - i {
            if v[j] == v[j + 1] {
                return 0.0;
            }
            if v[j] > v[j + 1] {
                v.swap(j, j + 1);
                sign = -sign;
            }
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        0.0
    } else {
        sign
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contraction_is_matrix_product() {
        let a = Tensor::from_vec(2, vec![Slot::Contra, Slot::Co], vec![1.0, 2.0, 3.0, 4.0]);
        let b = Tensor::from_vec(2, vec![Slot::Contra, Slot::Co], vec![0.0, 1.0, 1.0, 0.0]);
        let c = a.contract_with(1, &b, 0);
        assert_eq!(c.data(), &[2.0, 1.0, 4.0, 3.0]);
    }

    #[test]
    fn trace_and_permute() {
        let a = Tensor::from_vec(2, vec![Slot::Co, Slot::Co], vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(a.trace(0, 1).data(), &[5.0]);
        assert_eq!(a.permute(&[1, 0]).data(), &[1.0, 3.0, 2.0, 4.0]);
    }

    #[test]
    fn permutation_signs() {
        assert_eq!(permutation_sign(&[0, 1, 2]), 1.0);
        assert_eq!(permutation_sign(&[1, 0, 2]), -1.0);
        assert_eq!(permutation_sign(&[2, 0, 1]), 1.0);
        assert_eq!(permutation_sign(&[1, 1, 0]), 0.0);
    }
}
