//! Dense complex operators over labeled space tuples.
//!
//! A [`LabeledOperator`] is a square matrix over the tensor product of its
//! spaces, stored in the basis ordering induced by the tuple order: the
//! leftmost space is the most significant index (row-major). All transposes,
//! double-kets and Choi operators refer to this one fixed computational basis.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::linalg::{self, CMatrix};
use crate::spaces::SpaceTuple;
use crate::{QcombError, TOL_HERMITIAN, TOL_PSD, TOL_RANK};

/// Dense operator over an ordered tuple of labeled spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledOperator {
    spaces: SpaceTuple,
    matrix: CMatrix,
}

/// Vector (ket) over an ordered tuple of labeled spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledVector {
    pub spaces: SpaceTuple,
    pub vec: DVector<Complex64>,
}

impl LabeledVector {
    /// Rank-1 operator |v><v|.
    pub fn outer(&self) -> LabeledOperator {
        LabeledOperator {
            spaces: self.spaces.clone(),
            matrix: &self.vec * self.vec.adjoint(),
        }
    }
}

/// Offset table for embedding a sub-tuple's flat indices into a full tuple's
/// flat indices: `offsets[k]` is the contribution of sub-index `k` to the full
/// index, with all factors outside the sub-tuple at index 0.
fn embed_offsets(full: &SpaceTuple, sub: &SpaceTuple) -> Vec<usize> {
    let full_strides = full.strides();
    let positions: Vec<usize> = sub
        .spaces()
        .iter()
        .map(|s| full.position(&s.label).expect("sub-tuple not in full tuple"))
        .collect();
    (0..sub.total_dim())
        .map(|k| {
            sub.unflatten(k)
                .iter()
                .zip(&positions)
                .map(|(&idx, &p)| idx * full_strides[p])
                .sum()
        })
        .collect()
}

impl LabeledOperator {
    pub fn new(spaces: SpaceTuple, matrix: CMatrix) -> Result<Self, QcombError> {
        let d = spaces.total_dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(QcombError::ShapeMismatch {
                expected: format!("{d}x{d}"),
                got: format!("{}x{}", matrix.nrows(), matrix.ncols()),
            });
        }
        Ok(Self { spaces, matrix })
    }

    /// 1x1 operator on the empty tuple (a scalar).
    pub fn scalar(z: Complex64) -> Self {
        Self {
            spaces: SpaceTuple::empty(),
            matrix: CMatrix::from_element(1, 1, z),
        }
    }

    /// Identity operator on the given spaces.
    pub fn identity(spaces: SpaceTuple) -> Self {
        let d = spaces.total_dim();
        Self {
            spaces,
            matrix: linalg::ident(d),
        }
    }

    pub fn spaces(&self) -> &SpaceTuple {
        &self.spaces
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// Scalar value of a 1x1 operator.
    pub fn scalar_value(&self) -> Option<Complex64> {
        (self.dim() == 1).then(|| self.matrix[(0, 0)])
    }

    pub fn scale(&self, f: f64) -> Self {
        Self {
            spaces: self.spaces.clone(),
            matrix: self.matrix.scale(f),
        }
    }

    /// Entrywise sum; requires identical space tuples.
    pub fn add(&self, other: &Self) -> Result<Self, QcombError> {
        self.check_same_spaces(other)?;
        Ok(Self {
            spaces: self.spaces.clone(),
            matrix: &self.matrix + &other.matrix,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, QcombError> {
        self.check_same_spaces(other)?;
        Ok(Self {
            spaces: self.spaces.clone(),
            matrix: &self.matrix - &other.matrix,
        })
    }

    fn check_same_spaces(&self, other: &Self) -> Result<(), QcombError> {
        if self.spaces != other.spaces {
            return Err(QcombError::ShapeMismatch {
                expected: format!("{:?}", self.spaces.labels()),
                got: format!("{:?}", other.spaces.labels()),
            });
        }
        Ok(())
    }

    /// Same operator with `other`'s label ordering (permuting basis as needed).
    pub fn aligned_to(&self, other: &SpaceTuple) -> Result<Self, QcombError> {
        self.permute(&other.labels())
    }

    /// Rename one space label.
    pub fn relabel(&self, old: &str, new: &str) -> Result<Self, QcombError> {
        if !self.spaces.contains(old) {
            return Err(QcombError::UnknownLabel(old.to_string()));
        }
        let spaces = SpaceTuple::new(
            self.spaces
                .spaces()
                .iter()
                .map(|s| {
                    let mut s = s.clone();
                    if s.label == old {
                        s.label = new.to_string();
                    }
                    s
                })
                .collect(),
        )?;
        Ok(Self {
            spaces,
            matrix: self.matrix.clone(),
        })
    }

    /// Kronecker product with concatenated space tuple (self's spaces first).
    pub fn tensor(&self, other: &Self) -> Result<Self, QcombError> {
        let shared: Vec<String> = self
            .spaces
            .labels()
            .into_iter()
            .filter(|l| other.spaces.contains(l))
            .collect();
        if !shared.is_empty() {
            return Err(QcombError::OverlappingLabels(shared));
        }
        Ok(Self {
            spaces: self.spaces.concat(&other.spaces)?,
            matrix: self.matrix.kronecker(&other.matrix),
        })
    }

    /// Partial trace over the given labels; remaining spaces keep their order.
    pub fn partial_trace(&self, over: &[String]) -> Result<Self, QcombError> {
        for l in over {
            if !self.spaces.contains(l) {
                return Err(QcombError::UnknownLabel(l.clone()));
            }
        }
        let kept = self.spaces.without_labels(over);
        let traced = self.spaces.restricted_to(over);
        let kept_off = embed_offsets(&self.spaces, &kept);
        let tr_off = embed_offsets(&self.spaces, &traced);
        let dk = kept.total_dim();
        let mut out = CMatrix::zeros(dk, dk);
        for r in 0..dk {
            for c in 0..dk {
                let mut acc = Complex64::new(0.0, 0.0);
                for &t in &tr_off {
                    acc += self.matrix[(kept_off[r] + t, kept_off[c] + t)];
                }
                out[(r, c)] = acc;
            }
        }
        Ok(Self {
            spaces: kept,
            matrix: out,
        })
    }

    /// Transpose (in the fixed basis) of the selected factors only.
    pub fn partial_transpose(&self, on: &[String]) -> Result<Self, QcombError> {
        for l in on {
            if !self.spaces.contains(l) {
                return Err(QcombError::UnknownLabel(l.clone()));
            }
        }
        let sel = self.spaces.restricted_to(on);
        let rest = self.spaces.without_labels(on);
        let sel_off = embed_offsets(&self.spaces, &sel);
        let rest_off = embed_offsets(&self.spaces, &rest);
        let d = self.dim();
        let mut out = CMatrix::zeros(d, d);
        for (s1, &o1) in sel_off.iter().enumerate() {
            for (s2, &o2) in sel_off.iter().enumerate() {
                for &a1 in &rest_off {
                    for &a2 in &rest_off {
                        // M^{T_sel}[(s1,a1),(s2,a2)] = M[(s2,a1),(s1,a2)]
                        out[(o1 + a1, o2 + a2)] =
                            self.matrix[(sel_off[s2] + a1, sel_off[s1] + a2)];
                    }
                }
            }
        }
        Ok(Self {
            spaces: self.spaces.clone(),
            matrix: out,
        })
    }

    /// Full transpose in the fixed basis.
    pub fn transpose_full(&self) -> Self {
        Self {
            spaces: self.spaces.clone(),
            matrix: self.matrix.transpose(),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            spaces: self.spaces.clone(),
            matrix: self.matrix.adjoint(),
        }
    }

    /// Reorder the space tuple; the matrix is conjugated by the corresponding
    /// basis permutation (spectrum-preserving).
    pub fn permute(&self, new_order: &[String]) -> Result<Self, QcombError> {
        let labels = self.spaces.labels();
        if new_order.len() != labels.len()
            || !new_order.iter().all(|l| labels.contains(l))
            || {
                let mut seen = Vec::new();
                new_order.iter().any(|l| {
                    if seen.contains(&l) {
                        true
                    } else {
                        seen.push(l);
                        false
                    }
                })
            }
        {
            return Err(QcombError::NotAPermutation(new_order.to_vec()));
        }
        if new_order == labels.as_slice() {
            return Ok(self.clone());
        }
        let new_spaces = SpaceTuple::new(
            new_order
                .iter()
                .map(|l| {
                    self.spaces.spaces()[self.spaces.position(l).unwrap()].clone()
                })
                .collect(),
        )?;
        // map[r_new] = r_old
        let old_strides = self.spaces.strides();
        let old_pos: Vec<usize> = new_spaces
            .spaces()
            .iter()
            .map(|s| self.spaces.position(&s.label).unwrap())
            .collect();
        let d = self.dim();
        let map: Vec<usize> = (0..d)
            .map(|r| {
                new_spaces
                    .unflatten(r)
                    .iter()
                    .zip(&old_pos)
                    .map(|(&idx, &p)| idx * old_strides[p])
                    .sum()
            })
            .collect();
        let mut out = CMatrix::zeros(d, d);
        for r in 0..d {
            for c in 0..d {
                out[(r, c)] = self.matrix[(map[r], map[c])];
            }
        }
        Ok(Self {
            spaces: new_spaces,
            matrix: out,
        })
    }

    pub fn hermiticity_residual(&self) -> f64 {
        linalg::hermiticity_residual(&self.matrix)
    }

    /// Hermitian within `tol` in max-entry norm.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_residual() <= tol
    }

    /// PSD check: Hermitian within `tol` and min eigenvalue of the Hermitian
    /// part >= -tol * ||M||_max.
    pub fn is_psd(&self, tol: f64) -> bool {
        if !self.is_hermitian(tol.max(TOL_HERMITIAN)) {
            return false;
        }
        let scale = linalg::max_abs(&self.matrix).max(1.0);
        linalg::min_eig(&self.matrix) >= -tol * scale
    }

    /// Numerical rank at the crate-wide relative eigenvalue cutoff.
    pub fn rank(&self) -> usize {
        linalg::rank_psd(&self.matrix)
    }
}

/// |X>> = (X tensor I)|I>> for a matrix X mapping `input` to `output`;
/// the result lives on `output` then `input`.
pub fn double_ket(
    x: &CMatrix,
    output: &SpaceTuple,
    input: &SpaceTuple,
) -> Result<LabeledVector, QcombError> {
    let (d_out, di) = (output.total_dim(), input.total_dim());
    if x.nrows() != d_out || x.ncols() != di {
        return Err(QcombError::ShapeMismatch {
            expected: format!("{d_out}x{di}"),
            got: format!("{}x{}", x.nrows(), x.ncols()),
        });
    }
    let spaces = output.concat(input)?;
    let mut v = DVector::zeros(d_out * di);
    for m in 0..d_out {
        for n in 0..di {
            v[m * di + n] = x[(m, n)];
        }
    }
    Ok(LabeledVector { spaces, vec: v })
}

/// Inverse of [`double_ket`]: reshape a vector on output⊗input into a matrix.
pub fn undouble_ket(v: &DVector<Complex64>, d_out: usize, d_in: usize) -> CMatrix {
    assert_eq!(v.len(), d_out * d_in);
    CMatrix::from_fn(d_out, d_in, |m, n| v[m * d_in + n])
}

/// View of a linear map via its Choi operator on output ⊗ input.
#[derive(Debug, Clone)]
pub struct LinearMapView {
    pub input_spaces: SpaceTuple,
    pub output_spaces: SpaceTuple,
    pub choi: LabeledOperator,
}

impl LinearMapView {
    pub fn new(
        input_spaces: SpaceTuple,
        output_spaces: SpaceTuple,
        choi: LabeledOperator,
    ) -> Result<Self, QcombError> {
        let want = output_spaces.concat(&input_spaces)?;
        let choi = choi.aligned_to(&want)?;
        Ok(Self {
            input_spaces,
            output_spaces,
            choi,
        })
    }
}

/// Choi operator of a black-box linear map: sum_{mn} action(|m><n|) ⊗ |m><n|.
pub fn choi_of_map(
    action: impl Fn(&CMatrix) -> CMatrix,
    input: &SpaceTuple,
    output: &SpaceTuple,
) -> Result<LinearMapView, QcombError> {
    let (di, d_out) = (input.total_dim(), output.total_dim());
    let mut choi = CMatrix::zeros(d_out * di, d_out * di);
    for m in 0..di {
        for n in 0..di {
            let mut unit = CMatrix::zeros(di, di);
            unit[(m, n)] = Complex64::new(1.0, 0.0);
            let img = action(&unit);
            assert_eq!(
                (img.nrows(), img.ncols()),
                (d_out, d_out),
                "map image has wrong shape"
            );
            for a in 0..d_out {
                for b in 0..d_out {
                    choi[(a * di + m, b * di + n)] = img[(a, b)];
                }
            }
        }
    }
    let spaces = output.concat(input)?;
    Ok(LinearMapView {
        input_spaces: input.clone(),
        output_spaces: output.clone(),
        choi: LabeledOperator::new(spaces, choi)?,
    })
}

/// Choi operator of the map with the given Kraus operators.
pub fn choi_from_kraus(
    kraus: &[CMatrix],
    input: &SpaceTuple,
    output: &SpaceTuple,
) -> Result<LinearMapView, QcombError> {
    let spaces = output.concat(input)?;
    let d = spaces.total_dim();
    let mut m = CMatrix::zeros(d, d);
    for k in kraus {
        let kk = double_ket(k, output, input)?;
        m += &kk.vec * kk.vec.adjoint();
    }
    Ok(LinearMapView {
        input_spaces: input.clone(),
        output_spaces: output.clone(),
        choi: LabeledOperator::new(spaces, m)?,
    })
}

/// Apply a map through its Choi operator: Tr_in[(I ⊗ X^T) M].
pub fn apply_map(view: &LinearMapView, x: &LabeledOperator) -> Result<LabeledOperator, QcombError> {
    let x = x.aligned_to(&view.input_spaces)?;
    let (di, d_out) = (
        view.input_spaces.total_dim(),
        view.output_spaces.total_dim(),
    );
    let choi = view.choi.matrix();
    let mut out = CMatrix::zeros(d_out, d_out);
    for a in 0..d_out {
        for b in 0..d_out {
            let mut acc = Complex64::new(0.0, 0.0);
            for m in 0..di {
                for n in 0..di {
                    acc += choi[(a * di + m, b * di + n)] * x.matrix()[(m, n)];
                }
            }
            out[(a, b)] = acc;
        }
    }
    LabeledOperator::new(view.output_spaces.clone(), out)
}

/// Canonical Kraus operators from the eigendecomposition of the Choi operator.
/// Eigenvalues below the relative rank cutoff are dropped.
pub fn kraus_decompose(view: &LinearMapView, tol: f64) -> Result<Vec<CMatrix>, QcombError> {
    if !view.choi.is_psd(tol) {
        return Err(QcombError::NotCp(linalg::min_eig(view.choi.matrix())));
    }
    let (vals, vecs) = linalg::eigh(view.choi.matrix());
    let lmax = vals.iter().cloned().fold(0.0, f64::max);
    let cut = TOL_RANK * lmax;
    let (di, d_out) = (
        view.input_spaces.total_dim(),
        view.output_spaces.total_dim(),
    );
    let mut kraus = Vec::new();
    for (k, &l) in vals.iter().enumerate() {
        if l > cut {
            let v: DVector<Complex64> = vecs.column(k).into_owned().scale(l.sqrt());
            kraus.push(undouble_ket(&v, d_out, di));
        }
    }
    Ok(kraus)
}

/// Default-tolerance PSD predicate used across the crate.
pub fn is_psd_default(m: &LabeledOperator) -> bool {
    m.is_psd(TOL_PSD)
}
