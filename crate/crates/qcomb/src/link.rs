//! The link product: the single composition primitive of the calculus.
//!
//! `link(N, M)` contracts the shared labeled factors of two operators with a
//! partial transpose on one side; disjoint label sets reduce it to the tensor
//! product and identical label sets to the trace `Tr[N^T M]`. The output
//! carries the N-only labels followed by the M-only labels.

use num_complex::Complex64;

use crate::linalg::CMatrix;
use crate::operators::LabeledOperator;
use crate::QcombError;

/// Link product of two labeled operators.
///
/// The result lives on (N-only labels) followed by (M-only labels) and equals
/// `Tr_shared[(I ⊗ M^{T_shared})(N ⊗ I)]`, computed as a contraction without
/// materializing the padded product.
pub fn link(n: &LabeledOperator, m: &LabeledOperator) -> Result<LabeledOperator, QcombError> {
    // Shared labels in N's order; checks dimension agreement.
    let shared = n.spaces().intersect(m.spaces())?;
    let n_only = n.spaces().difference(m.spaces());
    let m_only = m.spaces().difference(n.spaces());

    let n_perm = n.aligned_to(&n_only.concat(&shared)?)?;
    let m_perm = m.aligned_to(&shared.concat(&m_only)?)?;

    let da = n_only.total_dim();
    let db = m_only.total_dim();
    let ds = shared.total_dim();

    // result[(a,b),(a',b')] = sum_{s,s'} N[(a,s),(a',s')] * M[(s,b),(s',b')].
    // Reshape into a single GEMM: N'[(a,a'),(s,s')] * M'[(s,s'),(b,b')].
    let mut n_rs = CMatrix::zeros(da * da, ds * ds);
    for a in 0..da {
        for ap in 0..da {
            for s in 0..ds {
                for sp in 0..ds {
                    n_rs[(a * da + ap, s * ds + sp)] =
                        n_perm.matrix()[(a * ds + s, ap * ds + sp)];
                }
            }
        }
    }
    let mut m_rs = CMatrix::zeros(ds * ds, db * db);
    for s in 0..ds {
        for sp in 0..ds {
            for b in 0..db {
                for bp in 0..db {
                    m_rs[(s * ds + sp, b * db + bp)] =
                        m_perm.matrix()[(s * db + b, sp * db + bp)];
                }
            }
        }
    }
    let prod = n_rs * m_rs;
    let mut out = CMatrix::zeros(da * db, da * db);
    for a in 0..da {
        for ap in 0..da {
            for b in 0..db {
                for bp in 0..db {
                    out[(a * db + b, ap * db + bp)] = prod[(a * da + ap, b * db + bp)];
                }
            }
        }
    }
    LabeledOperator::new(n_only.concat(&m_only)?, out)
}

/// Link product of an ordered chain, folded left to right.
///
/// Every label may occur in at most two operands (the saturation condition
/// that makes the fold order irrelevant); otherwise `LabelUsedThrice`.
pub fn link_chain(ops: &[LabeledOperator]) -> Result<LabeledOperator, QcombError> {
    let mut counts: Vec<(String, usize)> = Vec::new();
    for op in ops {
        for l in op.spaces().labels() {
            match counts.iter_mut().find(|(k, _)| *k == l) {
                Some((_, c)) => *c += 1,
                None => counts.push((l, 1)),
            }
        }
    }
    if let Some((l, _)) = counts.iter().find(|(_, c)| *c >= 3) {
        return Err(QcombError::LabelUsedThrice(l.clone()));
    }
    let mut it = ops.iter();
    let mut acc = match it.next() {
        Some(op) => op.clone(),
        None => LabeledOperator::scalar(Complex64::new(1.0, 0.0)),
    };
    for op in it {
        acc = link(&acc, op)?;
    }
    Ok(acc)
}
