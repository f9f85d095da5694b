//! Physical realizations of combs: sequences of isometries sharing an
//! ancilla (memory channels), realization of instruments via an enlarged
//! last output plus a von Neumann measurement, and network complexity.
//!
//! The construction is inductive. The first isometry is the minimal
//! Stinespring dilation of the first reduced comb; each further step's
//! isometry is recovered from the linear relation between the canonical
//! Kraus representations of two consecutive reduced combs, solved in closed
//! form (the canonical Kraus operators are Hilbert-Schmidt orthogonal, so
//! the normal equations are diagonal) and then polar-projected onto the
//! isometry manifold.

use num_complex::Complex64;

use crate::combs::{reduced_combs_all, validate_deterministic, Comb, CombKind, Tooth};
use crate::linalg::{self, CMatrix};
use crate::link::link_chain;
use crate::operators::{choi_from_kraus, kraus_decompose, LabeledOperator, LinearMapView};
use crate::spaces::SpaceTuple;
use crate::QcombError;

/// Internal ancilla label for step `j`; kept out of the way of user labels.
fn anc_label(j: usize) -> String {
    format!("~anc{j}")
}

/// What happens to the last ancilla of a realization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FinalPolicy {
    /// Trace out the final ancilla (deterministic comb).
    TraceOut,
    /// Trace out the final ancilla and measure the outcome factor appended to
    /// the last output (instrument realization).
    Measure,
}

/// A memory channel: isometries V_j mapping (tooth input ⊗ ancilla_{j-1}) to
/// (tooth output ⊗ ancilla_j), with ancilla_0 trivial.
#[derive(Debug, Clone)]
pub struct IsometrySequence {
    /// V_j as matrices, row index (output, ancilla_j), column (input, ancilla_{j-1}).
    pub steps: Vec<CMatrix>,
    /// Tooth structure of the realized comb (inputs/outputs per step).
    pub teeth: Vec<Tooth>,
    /// Ancilla dimensions [A_0 = 1, A_1, ..., A_N].
    pub ancilla_dims: Vec<usize>,
    pub final_policy: FinalPolicy,
}

impl IsometrySequence {
    /// Max-entry deviation of every step from the isometry property.
    pub fn isometry_residual(&self) -> f64 {
        self.steps
            .iter()
            .map(|v| {
                let g = v.adjoint() * v;
                linalg::max_abs_diff(&g, &linalg::ident(g.nrows()))
            })
            .fold(0.0, f64::max)
    }

    /// Choi operator of step j as a channel (input_j ⊗ anc_{j-1}) -> (output_j ⊗ anc_j).
    fn step_choi(&self, j: usize) -> LabeledOperator {
        let mut input = self.teeth[j].input.clone();
        if self.ancilla_dims[j] > 1 {
            input = input
                .concat(&SpaceTuple::single(anc_label(j), self.ancilla_dims[j]))
                .expect("ancilla label free");
        }
        let mut output = self.teeth[j].output.clone();
        if self.ancilla_dims[j + 1] > 1 {
            output = output
                .concat(&SpaceTuple::single(anc_label(j + 1), self.ancilla_dims[j + 1]))
                .expect("ancilla label free");
        }
        choi_from_kraus(&[self.steps[j].clone()], &input, &output)
            .expect("step shapes consistent")
            .choi
    }

    /// Rebuild the comb operator by linking the steps' Choi operators and
    /// tracing out the final ancilla.
    pub fn recompose(&self) -> LabeledOperator {
        let chois: Vec<LabeledOperator> = (0..self.steps.len()).map(|j| self.step_choi(j)).collect();
        let chained = link_chain(&chois).expect("ancilla labels are shared pairwise");
        let last = anc_label(self.steps.len());
        if self.ancilla_dims[self.steps.len()] > 1 {
            chained.partial_trace(&[last]).expect("last ancilla present")
        } else {
            chained
        }
    }
}

/// Tuples (ascending tooth order) of all inputs / all outputs of teeth 0..j.
fn io_tuples(teeth: &[Tooth], upto: usize) -> Result<(SpaceTuple, SpaceTuple), QcombError> {
    let mut input = SpaceTuple::empty();
    let mut output = SpaceTuple::empty();
    for t in &teeth[..upto] {
        input = input.concat(&t.input)?;
        output = output.concat(&t.output)?;
    }
    Ok((input, output))
}

/// Canonical Kraus operators of a reduced comb S^(j) viewed as a channel from
/// all inputs to all outputs of its teeth.
fn comb_kraus(op: &LabeledOperator, teeth: &[Tooth], upto: usize) -> Result<Vec<CMatrix>, QcombError> {
    let (input, output) = io_tuples(teeth, upto)?;
    let choi = op.aligned_to(&output.concat(&input)?)?;
    let view = LinearMapView::new(input, output, choi)?;
    kraus_decompose(&view, 1e-7)
}

/// Minimal Stinespring isometry of a deterministic 1-comb: W = sum_a K_a ⊗ |a>
/// for the canonical Kraus set, with ancilla dimension equal to the rank.
///
/// Returns the matrix (rows indexed by (output, ancilla)) and the ancilla dim.
pub fn minimal_stinespring(c: &Comb) -> Result<(CMatrix, usize), QcombError> {
    if c.n_teeth() != 1 {
        return Err(QcombError::NotDeterministicComb(format!(
            "minimal_stinespring expects a 1-comb, got {} teeth",
            c.n_teeth()
        )));
    }
    validate_deterministic(c, 1e-7).map_err(|e| QcombError::NotDeterministicComb(e.to_string()))?;
    let kraus = comb_kraus(&c.op, &c.teeth, 1)?;
    let d_in = c.teeth[0].input.total_dim();
    let d_out = c.teeth[0].output.total_dim();
    let r = kraus.len();
    let mut w = CMatrix::zeros(d_out * r, d_in);
    for (a, k) in kraus.iter().enumerate() {
        for o in 0..d_out {
            for i in 0..d_in {
                w[(o * r + a, i)] = k[(o, i)];
            }
        }
    }
    Ok((w, r))
}

/// Extract a memory-channel realization of a deterministic N-comb.
///
/// The ancilla dimension after step j equals the numerical rank of the
/// reduced comb S^(j); the recomposition of the returned sequence reproduces
/// the source comb.
pub fn realize_comb(c: &Comb) -> Result<IsometrySequence, QcombError> {
    validate_deterministic(c, 1e-7).map_err(|e| QcombError::NotDeterministicComb(e.to_string()))?;
    let n = c.n_teeth();
    let reduced = reduced_combs_all(c)?; // S^(1)..S^(N)
    let kraus_sets: Vec<Vec<CMatrix>> = (1..=n)
        .map(|j| comb_kraus(&reduced[j - 1], &c.teeth, j))
        .collect::<Result<_, _>>()?;

    let mut ancilla_dims = vec![1usize];
    ancilla_dims.extend(kraus_sets.iter().map(|ks| ks.len()));

    let mut steps: Vec<CMatrix> = Vec::with_capacity(n);
    // Step 1: minimal Stinespring of S^(1).
    {
        let ks = &kraus_sets[0];
        let d_in = c.teeth[0].input.total_dim();
        let d_out = c.teeth[0].output.total_dim();
        let r = ks.len();
        let mut w = CMatrix::zeros(d_out * r, d_in);
        for (a, k) in ks.iter().enumerate() {
            for o in 0..d_out {
                for i in 0..d_in {
                    w[(o * r + a, i)] = k[(o, i)];
                }
            }
        }
        steps.push(w);
    }
    // Steps 2..N: connect consecutive canonical Kraus representations.
    for j in 1..n {
        let prev = &kraus_sets[j - 1]; // K^(j), channel on teeth 1..j
        let next = &kraus_sets[j]; // K^(j+1)
        let ra = prev.len();
        let rb = next.len();
        let d_i = c.teeth[j].input.total_dim();
        let d_o = c.teeth[j].output.total_dim();
        let lam: Vec<f64> = prev
            .iter()
            .map(|k| k.iter().map(|z| z.norm_sqr()).sum())
            .collect();
        let d_bigo = prev[0].nrows(); // all outputs of teeth 1..j
        let d_bigi = prev[0].ncols(); // all inputs of teeth 1..j
        // v[(o,b),(i,a)] = (1/lam_a) sum_{O,I} conj(K^(j)_a[O,I]) K^(j+1)_b[(O,o),(I,i)]
        let mut v = CMatrix::zeros(d_o * rb, d_i * ra);
        for (b, knext) in next.iter().enumerate() {
            for o in 0..d_o {
                for i in 0..d_i {
                    for (a, kprev) in prev.iter().enumerate() {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for bo in 0..d_bigo {
                            for bi in 0..d_bigi {
                                acc += kprev[(bo, bi)].conj()
                                    * knext[(bo * d_o + o, bi * d_i + i)];
                            }
                        }
                        v[(o * rb + b, i * ra + a)] = acc / lam[a];
                    }
                }
            }
        }
        if v.nrows() < v.ncols() {
            return Err(QcombError::NumericalRankFailure(f64::NAN));
        }
        let viso = linalg::polar_isometry(&v);
        // Residual of the Kraus relation after projection.
        let mut residual = 0.0f64;
        for (b, knext) in next.iter().enumerate() {
            for o in 0..d_o {
                for i in 0..d_i {
                    for bo in 0..d_bigo {
                        for bi in 0..d_bigi {
                            let mut acc = Complex64::new(0.0, 0.0);
                            for (a, kprev) in prev.iter().enumerate() {
                                acc += viso[(o * rb + b, i * ra + a)] * kprev[(bo, bi)];
                            }
                            let diff = (acc - knext[(bo * d_o + o, bi * d_i + i)]).norm();
                            residual = residual.max(diff);
                        }
                    }
                }
            }
        }
        if residual > 1e-7 {
            return Err(QcombError::NumericalRankFailure(residual));
        }
        steps.push(viso);
    }
    Ok(IsometrySequence {
        steps,
        teeth: c.teeth.clone(),
        ancilla_dims,
        final_policy: FinalPolicy::TraceOut,
    })
}

/// Network complexity figures of a deterministic comb.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Complexity {
    /// Maximum ancilla dimension: max_j rank S^(j).
    pub d_max: usize,
    /// Maximum dimension that must be coherently controlled.
    pub r: usize,
}

/// Compute the memory and coherent-control complexity bounds from the ranks
/// of the reduced combs.
pub fn complexity(c: &Comb) -> Result<Complexity, QcombError> {
    validate_deterministic(c, 1e-7).map_err(|e| QcombError::NotDeterministicComb(e.to_string()))?;
    let n = c.n_teeth();
    let reduced = reduced_combs_all(c)?;
    let ranks: Vec<usize> = reduced.iter().map(|s| s.rank()).collect(); // rank S^(1)..S^(N)
    let d_max = ranks.iter().cloned().max().unwrap_or(1);
    // r_j = rank(S^(j)) * max{d_out(tooth j+1), d_in(tooth j+2)} for j <= N-2,
    // with rank(S^(0)) := 1; r_{N-1} = rank(S^(N)) * d_out(tooth N).
    let rank_at = |j: usize| -> usize {
        if j == 0 {
            1
        } else {
            ranks[j - 1]
        }
    };
    let mut r = 0usize;
    for j in 0..n.saturating_sub(1) {
        let d1 = c.teeth[j].output.total_dim();
        let d2 = c.teeth[j + 1].input.total_dim();
        r = r.max(rank_at(j) * d1.max(d2));
    }
    r = r.max(ranks[n - 1] * c.teeth[n - 1].output.total_dim());
    Ok(Complexity { d_max, r })
}

/// Realization of a generalized instrument: a single memory channel with the
/// last output enlarged by an outcome register, followed by a von Neumann
/// measurement of that register.
#[derive(Debug, Clone)]
pub struct InstrumentRealization {
    pub sequence: IsometrySequence,
    /// Label and dimension of the outcome register appended to the last output.
    pub outcome_space: SpaceTuple,
    /// Projectors |i><i| on the outcome register.
    pub projectors: Vec<LabeledOperator>,
}

impl InstrumentRealization {
    /// Recompose outcome i: link the recomposed extended comb with M_i.
    pub fn outcome_comb(&self, i: usize) -> LabeledOperator {
        let full = self.sequence.recompose();
        crate::link::link(&full, &self.projectors[i]).expect("outcome register present")
    }
}

/// Label for the instrument outcome register.
const OUTCOME_LABEL: &str = "~outcome";

/// Realize a list of probabilistic combs summing to a deterministic comb.
pub fn realize_instrument(
    elements: &[LabeledOperator],
    teeth: &[Tooth],
) -> Result<InstrumentRealization, QcombError> {
    assert!(!elements.is_empty());
    let mut sum = elements[0].clone();
    for e in &elements[1..] {
        sum = sum.add(&e.aligned_to(sum.spaces())?)?;
    }
    let sum_comb = Comb::new(teeth.to_vec(), sum, CombKind::Deterministic)?;
    validate_deterministic(&sum_comb, 1e-7)
        .map_err(|e| QcombError::SumNotDeterministic(e.to_string()))?;

    let k = elements.len();
    let outcome_space = SpaceTuple::single(OUTCOME_LABEL, k);
    // R~ = sum_i R_i ⊗ |i><i| on the enlarged last output.
    let mut extended: Option<LabeledOperator> = None;
    for (i, e) in elements.iter().enumerate() {
        let mut proj = CMatrix::zeros(k, k);
        proj[(i, i)] = Complex64::new(1.0, 0.0);
        let pi = LabeledOperator::new(outcome_space.clone(), proj)?;
        let term = e.tensor(&pi)?;
        extended = Some(match extended {
            None => term,
            Some(acc) => acc.add(&term.aligned_to(acc.spaces())?)?,
        });
    }
    let mut ext_teeth = teeth.to_vec();
    let last = ext_teeth.len() - 1;
    ext_teeth[last].output = ext_teeth[last].output.concat(&outcome_space)?;
    let ext_comb = Comb::new(ext_teeth, extended.unwrap(), CombKind::Deterministic)?;
    let mut sequence = realize_comb(&ext_comb)?;
    sequence.final_policy = FinalPolicy::Measure;

    let projectors = (0..k)
        .map(|i| {
            let mut m = CMatrix::zeros(k, k);
            m[(i, i)] = Complex64::new(1.0, 0.0);
            LabeledOperator::new(outcome_space.clone(), m).unwrap()
        })
        .collect();
    Ok(InstrumentRealization {
        sequence,
        outcome_space,
        projectors,
    })
}
