//! Labeled finite-dimensional Hilbert-space factors and ordered tuples.
//!
//! All index bookkeeping for tensor products lives here: a [`SpaceTuple`] is
//! an ordered list of labeled factors, with the leftmost factor the most
//! significant tensor index (row-major). Label-set operations (intersection,
//! difference) are order-preserving on the left operand, which fixes the
//! output ordering of every derived operator in the crate.

use crate::QcombError;

/// One labeled finite-dimensional tensor factor.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabeledSpace {
    pub label: String,
    pub dim: usize,
}

impl LabeledSpace {
    pub fn new(label: impl Into<String>, dim: usize) -> Self {
        let label = label.into();
        assert!(dim >= 1, "space `{label}` must have dim >= 1");
        Self { label, dim }
    }
}

/// An ordered tuple of labeled spaces with pairwise-distinct labels.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SpaceTuple {
    spaces: Vec<LabeledSpace>,
}

impl SpaceTuple {
    /// Empty tuple; total dimension 1 (the trivial space of scalars).
    pub fn empty() -> Self {
        Self { spaces: Vec::new() }
    }

    pub fn new(spaces: Vec<LabeledSpace>) -> Result<Self, QcombError> {
        for (i, s) in spaces.iter().enumerate() {
            if spaces[..i].iter().any(|t| t.label == s.label) {
                return Err(QcombError::DuplicateLabel(s.label.clone()));
            }
        }
        Ok(Self { spaces })
    }

    /// Convenience constructor from `(label, dim)` pairs; panics on duplicates.
    pub fn of(pairs: &[(&str, usize)]) -> Self {
        Self::new(
            pairs
                .iter()
                .map(|(l, d)| LabeledSpace::new(*l, *d))
                .collect(),
        )
        .expect("duplicate label")
    }

    /// Single-space tuple.
    pub fn single(label: impl Into<String>, dim: usize) -> Self {
        Self {
            spaces: vec![LabeledSpace::new(label, dim)],
        }
    }

    pub fn spaces(&self) -> &[LabeledSpace] {
        &self.spaces
    }

    pub fn len(&self) -> usize {
        self.spaces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spaces.is_empty()
    }

    /// Product of member dimensions (1 for the empty tuple).
    pub fn total_dim(&self) -> usize {
        self.spaces.iter().map(|s| s.dim).product()
    }

    pub fn labels(&self) -> Vec<String> {
        self.spaces.iter().map(|s| s.label.clone()).collect()
    }

    pub fn contains(&self, label: &str) -> bool {
        self.spaces.iter().any(|s| s.label == label)
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.spaces.iter().position(|s| s.label == label)
    }

    pub fn dim_of(&self, label: &str) -> Option<usize> {
        self.spaces.iter().find(|s| s.label == label).map(|s| s.dim)
    }

    /// Spaces whose labels occur in both tuples, in `self`'s order.
    /// Dimensions of shared labels must agree.
    pub fn intersect(&self, other: &SpaceTuple) -> Result<SpaceTuple, QcombError> {
        let mut out = Vec::new();
        for s in &self.spaces {
            if let Some(d) = other.dim_of(&s.label) {
                if d != s.dim {
                    return Err(QcombError::DimMismatch {
                        label: s.label.clone(),
                        left: s.dim,
                        right: d,
                    });
                }
                out.push(s.clone());
            }
        }
        Ok(SpaceTuple { spaces: out })
    }

    /// Spaces of `self` whose labels do not occur in `other`, in `self`'s order.
    pub fn difference(&self, other: &SpaceTuple) -> SpaceTuple {
        SpaceTuple {
            spaces: self
                .spaces
                .iter()
                .filter(|s| !other.contains(&s.label))
                .cloned()
                .collect(),
        }
    }

    /// Spaces of `self` whose labels are not in the given list.
    pub fn without_labels(&self, labels: &[String]) -> SpaceTuple {
        SpaceTuple {
            spaces: self
                .spaces
                .iter()
                .filter(|s| !labels.contains(&s.label))
                .cloned()
                .collect(),
        }
    }

    /// Spaces of `self` restricted to the given labels, in `self`'s order.
    pub fn restricted_to(&self, labels: &[String]) -> SpaceTuple {
        SpaceTuple {
            spaces: self
                .spaces
                .iter()
                .filter(|s| labels.contains(&s.label))
                .cloned()
                .collect(),
        }
    }

    /// Concatenation; labels must stay pairwise distinct.
    pub fn concat(&self, other: &SpaceTuple) -> Result<SpaceTuple, QcombError> {
        let mut spaces = self.spaces.clone();
        spaces.extend(other.spaces.iter().cloned());
        SpaceTuple::new(spaces)
    }

    /// Member dimensions in tuple order.
    pub fn dims(&self) -> Vec<usize> {
        self.spaces.iter().map(|s| s.dim).collect()
    }

    /// Strides for row-major flat indexing: leftmost space most significant.
    pub fn strides(&self) -> Vec<usize> {
        let dims = self.dims();
        let mut strides = vec![1usize; dims.len()];
        for i in (0..dims.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * dims[i + 1];
        }
        strides
    }

    /// Decode a flat index into per-factor indices.
    pub fn unflatten(&self, mut idx: usize) -> Vec<usize> {
        let strides = self.strides();
        let mut out = Vec::with_capacity(strides.len());
        for s in strides {
            out.push(idx / s);
            idx %= s;
        }
        out
    }

    /// Encode per-factor indices into a flat index.
    pub fn flatten(&self, idxs: &[usize]) -> usize {
        self.strides()
            .iter()
            .zip(idxs)
            .map(|(s, i)| s * i)
            .sum()
    }
}
