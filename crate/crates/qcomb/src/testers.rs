//! Quantum testers: collections of positive operators that assign outcome
//! probabilities to combs through the generalized Born rule.
//!
//! A tester on combs with teeth (i_1 -> o_1), ..., (i_N -> o_N) is itself an
//! instrument whose total is a deterministic comb with the dual teeth
//! (∅ -> i_1), (o_1 -> i_2), ..., (o_N -> ∅); validation, projection and
//! normalization therefore reuse the comb machinery on that dual comb.

use num_complex::Complex64;

use crate::combs::{validate_deterministic, Comb, CombKind, Tooth};
use crate::linalg::{self, CMatrix};
use crate::link::link;
use crate::operators::LabeledOperator;
use crate::spaces::SpaceTuple;
use crate::QcombError;

/// A family of PSD operators on the 2N comb spaces, one per outcome.
#[derive(Debug, Clone)]
pub struct Tester {
    pub elements: Vec<LabeledOperator>,
    /// Teeth of the combs this tester measures.
    pub comb_teeth: Vec<Tooth>,
}

/// Teeth of the dual comb: the tester prepares each tooth input and absorbs
/// each tooth output.
pub fn dual_teeth(comb_teeth: &[Tooth]) -> Vec<Tooth> {
    let n = comb_teeth.len();
    let mut out = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let input = if j == 0 {
            SpaceTuple::empty()
        } else {
            comb_teeth[j - 1].output.clone()
        };
        let output = if j == n {
            SpaceTuple::empty()
        } else {
            comb_teeth[j].input.clone()
        };
        out.push(Tooth::new(input, output));
    }
    out
}

impl Tester {
    pub fn new(elements: Vec<LabeledOperator>, comb_teeth: Vec<Tooth>) -> Result<Self, QcombError> {
        if elements.is_empty() {
            return Err(QcombError::TesterViolation("no elements".into()));
        }
        let t = Tester {
            elements,
            comb_teeth,
        };
        let _ = t.total()?; // checks that labels agree across elements/teeth
        Ok(t)
    }

    /// T = sum_i P_i on the tester spaces.
    pub fn total(&self) -> Result<LabeledOperator, QcombError> {
        let mut sum = self.elements[0].clone();
        for e in &self.elements[1..] {
            sum = sum.add(&e.aligned_to(sum.spaces())?)?;
        }
        let expected: Vec<String> = self
            .comb_teeth
            .iter()
            .flat_map(|t| t.labels())
            .collect();
        let mut have = sum.spaces().labels();
        have.sort();
        let mut want = expected;
        want.sort();
        if have != want {
            return Err(QcombError::TesterViolation(format!(
                "element labels {have:?} do not match teeth labels {want:?}"
            )));
        }
        Ok(sum)
    }

    /// The dual comb whose determinism encodes the tester normalization.
    pub fn dual_comb(&self) -> Result<Comb, QcombError> {
        Comb::new(
            dual_teeth(&self.comb_teeth),
            self.total()?,
            CombKind::Deterministic,
        )
    }
}

/// Elementwise positivity plus the normalization hierarchy of the dual comb.
pub fn validate_tester(t: &Tester, tol: f64) -> Result<(), QcombError> {
    for (i, e) in t.elements.iter().enumerate() {
        if !e.is_psd(tol) {
            return Err(QcombError::TesterViolation(format!(
                "element {i} is not positive semidefinite"
            )));
        }
    }
    let dual = t.dual_comb()?;
    validate_deterministic(&dual, tol)
        .map(|_| ())
        .map_err(|e| QcombError::TesterViolation(e.to_string()))
}

/// Generalized Born rule: p = Tr[P_i^T R], evaluated as the link product.
pub fn born(element: &LabeledOperator, comb: &Comb) -> Result<f64, QcombError> {
    let p = link(element, &comb.op)?;
    let v = p.scalar_value().ok_or_else(|| QcombError::ShapeMismatch {
        expected: "scalar (tester spaces = comb spaces)".into(),
        got: format!("operator on {:?}", p.spaces().labels()),
    })?;
    Ok(v.re)
}

/// Outcome distribution of a full tester on a comb.
pub fn born_all(t: &Tester, comb: &Comb) -> Result<Vec<f64>, QcombError> {
    t.elements.iter().map(|e| born(e, comb)).collect()
}

/// A tester split into a comb-to-state coherent part and an ordinary POVM.
#[derive(Debug, Clone)]
pub struct TesterRealization {
    /// sqrt of T^T; the coherent part maps R to sqrt(T^T) R sqrt(T^T).
    pub sqrt_t_transpose: LabeledOperator,
    /// POVM elements measured on the output state of the coherent part.
    pub povm: Vec<LabeledOperator>,
}

fn sandwich(a: &LabeledOperator, x: &LabeledOperator) -> Result<LabeledOperator, QcombError> {
    let xa = x.aligned_to(a.spaces())?;
    LabeledOperator::new(a.spaces().clone(), a.matrix() * xa.matrix() * a.matrix())
}

impl TesterRealization {
    /// The state produced by feeding comb R through the coherent part.
    pub fn coherent_apply(&self, r: &LabeledOperator) -> Result<LabeledOperator, QcombError> {
        sandwich(&self.sqrt_t_transpose, r)
    }
}

/// Split a tester into its coherent part and a POVM: P~_i = sqrt(T‡) P_i
/// sqrt(T‡) + (I - Π)/k with T‡ the pseudo-inverse and Π the support
/// projector of T.
pub fn realize_tester(t: &Tester) -> Result<TesterRealization, QcombError> {
    let total = t.total()?;
    let d = total.matrix().nrows();
    let k = t.elements.len() as f64;
    let sqrt_pinv = linalg::pinv_sqrt_psd(total.matrix());
    let pi = linalg::support_projector(total.matrix());
    let q = (linalg::ident(d) - pi).scale(1.0 / k);
    let root = LabeledOperator::new(total.spaces().clone(), sqrt_pinv)?;
    let povm = t
        .elements
        .iter()
        .map(|e| {
            let core = sandwich(&root, e)?;
            LabeledOperator::new(
                core.spaces().clone(),
                linalg::hermitize(&(core.matrix() + &q)),
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    // Truncated at the same cutoff as the support projector: near-zero
    // eigenvalues of T would otherwise leak through the (I - Pi)/k term.
    let sqrt_tt = LabeledOperator::new(
        total.spaces().clone(),
        linalg::sqrt_psd_trunc(&total.matrix().transpose()),
    )?;
    Ok(TesterRealization {
        sqrt_t_transpose: sqrt_tt,
        povm,
    })
}

/// Columns are vec(P_i^T); QR gives an orthonormal basis of the span.
fn span_basis(elements: &[LabeledOperator], spaces: &SpaceTuple) -> Result<CMatrix, QcombError> {
    let d2 = spaces.total_dim() * spaces.total_dim();
    let mut cols = CMatrix::zeros(d2, elements.len());
    for (i, e) in elements.iter().enumerate() {
        let m = e.aligned_to(spaces)?;
        let mt = m.matrix().transpose();
        for (j, z) in mt.iter().enumerate() {
            cols[(j, i)] = *z;
        }
    }
    let svd = cols.svd(true, false);
    let u = svd.u.as_ref().unwrap();
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > 1e-10 * smax.max(1.0))
        .count();
    Ok(u.columns(0, rank).into_owned())
}

/// Spanning dimension of the tester elements.
pub fn span_rank(t: &Tester) -> Result<usize, QcombError> {
    let total = t.total()?;
    Ok(span_basis(&t.elements, total.spaces())?.ncols())
}

/// A tester is informationally complete iff its elements span the full
/// operator space.
pub fn is_info_complete(t: &Tester) -> Result<bool, QcombError> {
    let total = t.total()?;
    let d = total.spaces().total_dim();
    Ok(span_rank(t)? == d * d)
}

/// Informational completeness restricted to the span of deterministic combs:
/// the span of the elements must contain the kernel of the top-level
/// normalization constraint Tr_{o_N}[X] = I_{i_N} ⊗ Y.
pub fn is_info_complete_deterministic(t: &Tester, tol: f64) -> Result<bool, QcombError> {
    let total = t.total()?;
    let spaces = total.spaces().clone();
    let d = spaces.total_dim();
    let n = t.comb_teeth.len();
    let last = &t.comb_teeth[n - 1];
    let o_labels = last.output.labels();
    let i_labels = last.input.labels();
    let d_i = last.input.total_dim();

    // Constraint map L(X) = Tr_{o_N}[X] - I_{i_N} ⊗ Tr_{i_N, o_N}[X]/d_i as a
    // matrix acting on vec(X); its kernel is the span of deterministic combs.
    let d_rest = d / last.output.total_dim();
    let mut l = CMatrix::zeros(d_rest * d_rest, d * d);
    for col in 0..d * d {
        let mut x = CMatrix::zeros(d, d);
        x[(col % d, col / d)] = Complex64::new(1.0, 0.0);
        let xop = LabeledOperator::new(spaces.clone(), x)?;
        let tr_o = xop.partial_trace(&o_labels)?;
        let mut rep = tr_o.partial_trace(&i_labels)?.scale(1.0 / d_i as f64);
        rep = rep.tensor(&LabeledOperator::identity(last.input.clone()))?;
        let diff = tr_o.sub(&rep.aligned_to(tr_o.spaces())?)?;
        for (row, z) in diff.matrix().iter().enumerate() {
            l[(row, col)] = *z;
        }
    }
    let svd = l.svd(false, true);
    let vt = svd.v_t.as_ref().unwrap();
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > 1e-10 * smax.max(1.0))
        .count();
    // Projector onto ker L = I - V_r V_r^H with V_r the leading right
    // singular vectors (the thin SVD of a wide L carries no kernel basis).
    let v_r = vt.rows(0, rank).adjoint();
    let p_ker = linalg::ident(d * d) - &v_r * v_r.adjoint();
    let basis = span_basis(&t.elements, &spaces)?;
    let residual = &p_ker - &basis * (basis.adjoint() * &p_ker);
    let res_svd = residual.svd(false, false);
    let worst = res_svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    Ok(worst <= tol)
}

/// Build a tester from an informationally complete POVM on all comb spaces by
/// rescaling with the product of the output dimensions.
pub fn info_complete_tester(
    base_povm: &[LabeledOperator],
    comb_teeth: &[Tooth],
) -> Result<Tester, QcombError> {
    let t = Tester::new(base_povm.to_vec(), comb_teeth.to_vec())?;
    let total = t.total()?;
    let d = total.spaces().total_dim();
    let rank = span_rank(&t)?;
    if rank < d * d {
        return Err(QcombError::BaseNotComplete {
            rank,
            need: d * d,
        });
    }
    // Sum of the base POVM is I with trace D; a tester total must have trace
    // equal to the product of the measured combs' input dims.
    let d_in: usize = comb_teeth.iter().map(|th| th.input.total_dim()).product();
    let elements = base_povm
        .iter()
        .map(|p| p.scale(1.0 / d_in as f64))
        .collect();
    Tester::new(elements, comb_teeth.to_vec())
}

/// Factorization of an informationally complete tester as
/// P_i = (I ⊗ sqrt(Θ)) P~_i (I ⊗ sqrt(Θ)) with P~ a POVM.
#[derive(Debug, Clone)]
pub struct TesterFactorization {
    /// I_{o_N} ⊗ sqrt(Θ) on the tester spaces.
    pub theta_root: LabeledOperator,
    pub base_povm: Vec<LabeledOperator>,
}

/// Recover the base POVM by inverting the Θ factor of the normalization.
pub fn factorize_info_complete(t: &Tester) -> Result<TesterFactorization, QcombError> {
    let total = t.total()?;
    let n = t.comb_teeth.len();
    let last_out = &t.comb_teeth[n - 1].output;
    let d_o = last_out.total_dim();
    let theta = total
        .partial_trace(&last_out.labels())?
        .scale(1.0 / d_o as f64);
    let min = linalg::min_eig(theta.matrix());
    let scale = linalg::max_abs(theta.matrix()).max(1.0);
    if min < 1e-10 * scale {
        return Err(QcombError::ThetaSingular(min));
    }
    let root = LabeledOperator::new(theta.spaces().clone(), linalg::sqrt_psd(theta.matrix()))?
        .tensor(&LabeledOperator::identity(last_out.clone()))?;
    let inv_root = LabeledOperator::new(
        theta.spaces().clone(),
        linalg::pinv_sqrt_psd(theta.matrix()),
    )?
    .tensor(&LabeledOperator::identity(last_out.clone()))?;
    let base_povm = t
        .elements
        .iter()
        .map(|p| sandwich(&inv_root, p))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(TesterFactorization {
        theta_root: root,
        base_povm,
    })
}

/// A family of probabilistic combs whose sum is deterministic.
#[derive(Debug, Clone)]
pub struct GeneralizedInstrument {
    pub elements: Vec<Comb>,
}

impl GeneralizedInstrument {
    pub fn total(&self) -> Result<Comb, QcombError> {
        let mut sum = self.elements[0].op.clone();
        for e in &self.elements[1..] {
            sum = sum.add(&e.op.aligned_to(sum.spaces())?)?;
        }
        Comb::new(
            self.elements[0].teeth.clone(),
            sum,
            CombKind::Deterministic,
        )
    }

    /// Elementwise positivity plus determinism of the total.
    pub fn validate(&self, tol: f64) -> Result<(), QcombError> {
        for (i, e) in self.elements.iter().enumerate() {
            if !e.op.is_psd(tol) {
                return Err(QcombError::TesterViolation(format!(
                    "instrument element {i} is not positive semidefinite"
                )));
            }
        }
        validate_deterministic(&self.total()?, tol)
            .map(|_| ())
            .map_err(|e| QcombError::SumNotDeterministic(e.to_string()))
    }
}
