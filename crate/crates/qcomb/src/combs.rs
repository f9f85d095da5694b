//! Quantum N-combs: tooth structure, the deterministic normalization
//! hierarchy, probabilistic-comb feasibility, and tensor products of combs.
//!
//! A comb is a PSD labeled operator together with an ordered list of teeth,
//! each tooth an (input, output) pair of (possibly composite, possibly
//! trivial) space tuples. Deterministic combs satisfy the recursive hierarchy
//! obtained by peeling teeth from the last: tracing out the last output must
//! leave identity on the last input tensored with a valid comb on the
//! remaining teeth.

use num_complex::Complex64;

use crate::linalg::{self, CMatrix};
use crate::operators::LabeledOperator;
use crate::spaces::SpaceTuple;
use crate::{QcombError, TOL_PSD};

/// One input/output space pair of a comb (one time step).
#[derive(Debug, Clone, PartialEq)]
pub struct Tooth {
    pub input: SpaceTuple,
    pub output: SpaceTuple,
}

impl Tooth {
    pub fn new(input: SpaceTuple, output: SpaceTuple) -> Self {
        Self { input, output }
    }

    /// Single-space input and output.
    pub fn simple(in_label: &str, d_in: usize, out_label: &str, d_out: usize) -> Self {
        Self {
            input: SpaceTuple::single(in_label, d_in),
            output: SpaceTuple::single(out_label, d_out),
        }
    }

    pub fn labels(&self) -> Vec<String> {
        let mut l = self.input.labels();
        l.extend(self.output.labels());
        l
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CombKind {
    Deterministic,
    Probabilistic,
}

/// A labeled operator with tooth structure and a deterministic/probabilistic tag.
#[derive(Debug, Clone)]
pub struct Comb {
    pub teeth: Vec<Tooth>,
    pub op: LabeledOperator,
    pub kind: CombKind,
}

impl Comb {
    /// Construct, checking that the operator's labels are exactly the teeth's.
    pub fn new(teeth: Vec<Tooth>, op: LabeledOperator, kind: CombKind) -> Result<Self, QcombError> {
        let mut want: Vec<String> = Vec::new();
        for t in &teeth {
            for l in t.labels() {
                if want.contains(&l) {
                    return Err(QcombError::DuplicateLabel(l));
                }
                want.push(l);
            }
        }
        let mut have = op.spaces().labels();
        have.sort();
        want.sort();
        if have != want {
            return Err(QcombError::ShapeMismatch {
                expected: format!("{want:?}"),
                got: format!("{have:?}"),
            });
        }
        Ok(Self { teeth, op, kind })
    }

    pub fn n_teeth(&self) -> usize {
        self.teeth.len()
    }

    /// The maximally-uninformative deterministic comb J = I / (prod d_out):
    /// trace out every input, prepare maximally mixed on every output.
    pub fn uniform_deterministic(teeth: Vec<Tooth>) -> Result<Self, QcombError> {
        let mut spaces = SpaceTuple::empty();
        let mut d_out = 1usize;
        for t in &teeth {
            spaces = spaces.concat(&t.input)?.concat(&t.output)?;
            d_out *= t.output.total_dim();
        }
        let op = LabeledOperator::identity(spaces).scale(1.0 / d_out as f64);
        Self::new(teeth, op, CombKind::Deterministic)
    }

    /// Product of all input dims (the trace of any deterministic comb).
    pub fn input_dim_product(&self) -> usize {
        self.teeth.iter().map(|t| t.input.total_dim()).product()
    }
}

/// Report of a successful deterministic validation: the reduced combs
/// S^(1) .. S^(N-1) obtained while peeling the hierarchy.
#[derive(Debug, Clone)]
pub struct DeterministicReport {
    pub reduced_combs: Vec<LabeledOperator>,
}

/// Max-entry residual of the "is it I ⊗ X?" factorization test at one level:
/// X is extracted as the partial trace over the identity factor divided by its
/// dimension, and the residual is ||candidate - I ⊗ X||_max.
fn identity_factor_residual(
    t: &LabeledOperator,
    id_spaces: &SpaceTuple,
) -> Result<(f64, LabeledOperator), QcombError> {
    let d = id_spaces.total_dim();
    let x = t
        .partial_trace(&id_spaces.labels())?
        .scale(1.0 / d as f64);
    let cand = LabeledOperator::identity(id_spaces.clone())
        .tensor(&x)?
        .aligned_to(t.spaces())?;
    Ok((linalg::max_abs_diff(t.matrix(), cand.matrix()), x))
}

/// Validate the deterministic normalization hierarchy of a comb.
///
/// Peels teeth from the last: at level j the trace over the j-th output must
/// factorize as identity-on-the-j-th-input tensor the next reduced comb. The
/// final reduced scalar must be 1. Returns the reduced combs S^(1)..S^(N-1)
/// (ascending) on success, or the first violated level with its residual.
pub fn validate_deterministic(comb: &Comb, tol: f64) -> Result<DeterministicReport, QcombError> {
    if !comb.op.is_psd(TOL_PSD) {
        return Err(QcombError::NotPsd(linalg::min_eig(comb.op.matrix())));
    }
    let mut s = comb.op.clone();
    let mut reduced: Vec<LabeledOperator> = Vec::new();
    for j in (1..=comb.n_teeth()).rev() {
        let tooth = &comb.teeth[j - 1];
        let t = s.partial_trace(&tooth.output.labels())?;
        let (residual, x) = identity_factor_residual(&t, &tooth.input)?;
        if residual > tol {
            return Err(QcombError::LevelViolation { level: j, residual });
        }
        if j == 1 {
            let val = x.scalar_value().expect("level-1 reduction is a scalar");
            let res = (val - Complex64::new(1.0, 0.0)).norm();
            if res > tol {
                return Err(QcombError::LevelViolation {
                    level: 1,
                    residual: res,
                });
            }
        } else {
            reduced.push(x.clone());
        }
        s = x;
    }
    reduced.reverse();
    Ok(DeterministicReport {
        reduced_combs: reduced,
    })
}

/// All reduced combs S^(1) .. S^(N) (last entry the comb itself), without
/// validating residuals. Useful after a successful validation.
pub fn reduced_combs_all(comb: &Comb) -> Result<Vec<LabeledOperator>, QcombError> {
    let mut out = vec![comb.op.clone()];
    let mut s = comb.op.clone();
    for j in (2..=comb.n_teeth()).rev() {
        let tooth = &comb.teeth[j - 1];
        let t = s.partial_trace(&tooth.output.labels())?;
        let d = tooth.input.total_dim();
        let x = t.partial_trace(&tooth.input.labels())?.scale(1.0 / d as f64);
        out.push(x.clone());
        s = x;
    }
    out.reverse();
    Ok(out)
}

/// Max residual over all hierarchy levels (no PSD check).
pub fn hierarchy_residual(op: &LabeledOperator, teeth: &[Tooth]) -> f64 {
    let mut s = op.clone();
    let mut worst = 0.0f64;
    for j in (1..=teeth.len()).rev() {
        let tooth = &teeth[j - 1];
        let t = s.partial_trace(&tooth.output.labels()).expect("tooth labels");
        let (residual, x) = identity_factor_residual(&t, &tooth.input).expect("tooth labels");
        worst = worst.max(residual);
        if j == 1 {
            let val = x.scalar_value().expect("scalar");
            worst = worst.max((val - Complex64::new(1.0, 0.0)).norm());
        }
        s = x;
    }
    worst
}

/// Trace-and-replace superoperator on a label subset: Tr_x[S] ⊗ I_x / d_x,
/// returned in S's original space order. The identity map when `x` is empty.
fn trace_and_replace(s: &LabeledOperator, x: &SpaceTuple) -> LabeledOperator {
    if x.is_empty() {
        return s.clone();
    }
    let d = x.total_dim();
    let reduced = s.partial_trace(&x.labels()).expect("labels present");
    reduced
        .tensor(&LabeledOperator::identity(x.clone()).scale(1.0 / d as f64))
        .expect("disjoint")
        .aligned_to(s.spaces())
        .expect("permutation")
}

/// Orthogonal projection (in Hilbert-Schmidt geometry) onto the affine set of
/// operators satisfying the deterministic normalization hierarchy for the
/// given teeth.
///
/// The hierarchy is equivalent to the commuting projector constraints
/// Q_j(S) = 0 with Q_j = (1 - T_{i_j}) ∘ T_{o_j} ∘ T_{F_j}, where T_x is
/// trace-and-replace on x and F_j collects all spaces of teeth after j,
/// plus the trace value Tr S = prod d_in. Since the Q_j commute, the
/// projection is the product of (1 - Q_j) followed by a trace shift along I.
pub fn project_hierarchy_affine(op: &LabeledOperator, teeth: &[Tooth]) -> LabeledOperator {
    let n = teeth.len();
    let mut s = op.clone();
    // Hermitize first: the hierarchy set consists of Hermitian-compatible
    // constraints and every consumer wants Hermitian iterates.
    s = LabeledOperator::new(s.spaces().clone(), linalg::hermitize(s.matrix())).unwrap();
    for j in 1..=n {
        // F_j: spaces of teeth j+1..N.
        let mut fj = SpaceTuple::empty();
        for t in &teeth[j..] {
            fj = fj.concat(&t.input).unwrap().concat(&t.output).unwrap();
        }
        let oj_fj = teeth[j - 1].output.concat(&fj).unwrap();
        let a = trace_and_replace(&s, &oj_fj);
        let b = trace_and_replace(&a, &teeth[j - 1].input);
        // s <- s - Q_j(s) = s - a + b
        s = s.sub(&a).unwrap().add(&b).unwrap();
    }
    let d_total = s.dim() as f64;
    let want: usize = teeth.iter().map(|t| t.input.total_dim()).product();
    let shift = (want as f64 - s.trace().re) / d_total;
    let eye = LabeledOperator::identity(s.spaces().clone()).scale(shift);
    s.add(&eye).unwrap()
}

/// Outcome of a successful feasibility search: a deterministic witness S >= R.
#[derive(Debug, Clone)]
pub struct FeasibilityWitness {
    pub witness: LabeledOperator,
    pub iterations: usize,
}

/// Search for a deterministic comb S with S >= R by Dykstra's alternating
/// projections between the shifted-PSD cone {S : S - R >= 0} and the affine
/// normalization set. Certifies the witness by re-validation.
pub fn probabilistic_feasibility(
    r: &LabeledOperator,
    teeth: &[Tooth],
    tol: f64,
    max_iter: usize,
) -> Result<FeasibilityWitness, QcombError> {
    if !r.is_psd(TOL_PSD) {
        return Err(QcombError::NotPsd(linalg::min_eig(r.matrix())));
    }
    let spaces = r.spaces().clone();
    let rm = r.matrix().clone();
    let mut x = rm.clone();
    let mut p = CMatrix::zeros(x.nrows(), x.ncols());
    let mut q = CMatrix::zeros(x.nrows(), x.ncols());
    let scale = linalg::max_abs(&rm).max(1.0);
    let mut last_residual = f64::INFINITY;
    for it in 0..max_iter {
        // Project x + p onto {S : S - R >= 0}.
        let y = &rm + linalg::psd_part(&(&x + &p - &rm));
        p = &x + &p - &y;
        // Project y + q onto the affine hierarchy set.
        let yo = LabeledOperator::new(spaces.clone(), &y + &q).unwrap();
        let xo = project_hierarchy_affine(&yo, teeth);
        let x_new = xo.matrix().clone();
        q = &y + &q - &x_new;
        x = x_new;
        // Convergence: the affine iterate satisfies the hierarchy exactly;
        // check how far it is from the shifted cone.
        let neg = linalg::min_eig(&(&x - &rm));
        last_residual = (-neg).max(0.0) / scale;
        if last_residual <= tol {
            // The affine iterate satisfies the hierarchy exactly and
            // dominates R up to the certified tolerance.
            let witness = LabeledOperator::new(spaces, x).unwrap();
            return Ok(FeasibilityWitness {
                witness,
                iterations: it + 1,
            });
        }
    }
    Err(QcombError::FeasibilitySolverFailure {
        residual: last_residual,
        iters: max_iter,
    })
}

/// Which comb the next tooth of a merge schedule comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleSide {
    Left,
    Right,
}

/// Tensor product of two combs under a merge schedule.
///
/// `interleaving[k]` says which comb supplies the k-th tooth (each comb's
/// internal order is preserved); `merged_pairs` lists schedule positions i
/// such that teeth i and i+1 (which must come from different combs) are fused
/// into one tooth with tensored input and output spaces.
pub fn tensor_combs(
    s: &Comb,
    t: &Comb,
    interleaving: &[ScheduleSide],
    merged_pairs: &[usize],
) -> Result<Comb, QcombError> {
    let nl = interleaving
        .iter()
        .filter(|&&x| x == ScheduleSide::Left)
        .count();
    let nr = interleaving.len() - nl;
    if nl != s.n_teeth() || nr != t.n_teeth() {
        return Err(QcombError::InvalidInterleaving(format!(
            "schedule has {nl}+{nr} teeth, combs have {}+{}",
            s.n_teeth(),
            t.n_teeth()
        )));
    }
    // Check merges: adjacent, cross-comb, pairwise disjoint.
    let mut used: Vec<usize> = Vec::new();
    for &i in merged_pairs {
        if i + 1 >= interleaving.len() || interleaving[i] == interleaving[i + 1] {
            return Err(QcombError::NonAdjacentMerge(i, i + 1));
        }
        if used.contains(&i) || used.contains(&(i + 1)) {
            return Err(QcombError::NonAdjacentMerge(i, i + 1));
        }
        used.push(i);
        used.push(i + 1);
    }
    // Lay out the schedule's teeth.
    let mut li = 0usize;
    let mut ri = 0usize;
    let scheduled: Vec<Tooth> = interleaving
        .iter()
        .map(|side| match side {
            ScheduleSide::Left => {
                li += 1;
                s.teeth[li - 1].clone()
            }
            ScheduleSide::Right => {
                ri += 1;
                t.teeth[ri - 1].clone()
            }
        })
        .collect();
    // Fuse merged pairs.
    let mut teeth: Vec<Tooth> = Vec::new();
    let mut k = 0usize;
    while k < scheduled.len() {
        if merged_pairs.contains(&k) {
            teeth.push(Tooth::new(
                scheduled[k].input.concat(&scheduled[k + 1].input)?,
                scheduled[k].output.concat(&scheduled[k + 1].output)?,
            ));
            k += 2;
        } else {
            teeth.push(scheduled[k].clone());
            k += 1;
        }
    }
    let op = s.op.tensor(&t.op)?;
    let kind = if s.kind == CombKind::Deterministic && t.kind == CombKind::Deterministic {
        CombKind::Deterministic
    } else {
        CombKind::Probabilistic
    };
    Comb::new(teeth, op, kind)
}

/// Membership test for combs with independent teeth: the hierarchy must hold
/// under every tooth ordering obtained by swapping the listed independent
/// pairs (tooth indices, 0-based).
pub fn s_i_membership(
    r: &LabeledOperator,
    teeth: &[Tooth],
    independent_pairs: &[(usize, usize)],
    tol: f64,
) -> bool {
    if !r.is_psd(TOL_PSD) {
        return false;
    }
    // Enumerate all subsets of pairs to swap.
    let m = independent_pairs.len();
    for mask in 0..(1usize << m) {
        let mut order: Vec<usize> = (0..teeth.len()).collect();
        for (b, &(i, j)) in independent_pairs.iter().enumerate() {
            if mask & (1 << b) != 0 {
                order.swap(i, j);
            }
        }
        let perm_teeth: Vec<Tooth> = order.iter().map(|&i| teeth[i].clone()).collect();
        if hierarchy_residual(r, &perm_teeth) > tol {
            return false;
        }
    }
    true
}
