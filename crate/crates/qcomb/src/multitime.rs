//! Multiple-time states (prepare / post-select sequences) and multiple-time
//! measurements as combs and generalized instruments.
//!
//! A multiple-time state prepares |Ψ_0> at t_0, post-selects <Φ_i| and
//! re-prepares |Ψ_i> at each intermediate time, and post-selects <Φ_N| at
//! t_N. Its comb is the tensor product of rank-1 factors, with the Φ factors
//! entered conjugated in the computational basis. A multiple-time measurement
//! is a quantum operation with one multipartite Kraus set per outcome; its
//! outcome operators R_i = Σ_j |K_j>><<K_j| form a generalized instrument
//! (after overall normalization) and probabilities follow from the
//! generalized Born rule with post-selection normalizer.

use num_complex::Complex64;

use crate::combs::{probabilistic_feasibility, Comb, CombKind, Tooth};
use crate::linalg::{self, CMatrix};
use crate::link::link;
use crate::operators::{choi_from_kraus, LabeledOperator};
use crate::spaces::SpaceTuple;
use crate::testers::GeneralizedInstrument;
use crate::QcombError;

/// Label of the system prepared at time t_i (fed into the measurement).
pub fn prep_label(i: usize) -> String {
    format!("p{i}")
}

/// Label of the system post-selected at time t_i (measurement output).
pub fn post_label(i: usize) -> String {
    format!("q{i}")
}

/// Preparation / post-selection data: |Ψ_0>, pairs (|Ψ_i>, |Φ_i>), |Φ_N>.
#[derive(Debug, Clone)]
pub struct MultiTimeState {
    pub psi0: CMatrix,
    pub middle: Vec<(CMatrix, CMatrix)>,
    pub phi_n: CMatrix,
}

fn check_unit(v: &CMatrix, what: &str) -> Result<(), QcombError> {
    if v.ncols() != 1 {
        return Err(QcombError::ShapeMismatch {
            expected: "column vector".into(),
            got: format!("{}x{} {what}", v.nrows(), v.ncols()),
        });
    }
    if (v.norm() - 1.0).abs() > 1e-9 {
        return Err(QcombError::Parse(format!(
            "{what} is not normalized: |v| = {}",
            v.norm()
        )));
    }
    Ok(())
}

impl MultiTimeState {
    pub fn new(
        psi0: CMatrix,
        middle: Vec<(CMatrix, CMatrix)>,
        phi_n: CMatrix,
    ) -> Result<Self, QcombError> {
        check_unit(&psi0, "psi0")?;
        for (i, (psi, phi)) in middle.iter().enumerate() {
            check_unit(psi, &format!("psi{}", i + 1))?;
            check_unit(phi, &format!("phi{}", i + 1))?;
        }
        check_unit(&phi_n, "phiN")?;
        Ok(MultiTimeState {
            psi0,
            middle,
            phi_n,
        })
    }

    /// Number of measurement slots N.
    pub fn n_times(&self) -> usize {
        self.middle.len() + 1
    }

    /// Dimensions of the prepared systems p_0 .. p_{N-1}.
    pub fn prep_dims(&self) -> Vec<usize> {
        let mut d = vec![self.psi0.nrows()];
        d.extend(self.middle.iter().map(|(psi, _)| psi.nrows()));
        d
    }

    /// Dimensions of the post-selected systems q_1 .. q_N.
    pub fn post_dims(&self) -> Vec<usize> {
        let mut d: Vec<usize> = self.middle.iter().map(|(_, phi)| phi.nrows()).collect();
        d.push(self.phi_n.nrows());
        d
    }
}

fn rank1(v: &CMatrix) -> CMatrix {
    v * v.adjoint()
}

/// The probabilistic comb S = ⊗_j S_j of a multiple-time state, with teeth
/// (∅ -> p_0), (q_1 -> p_1), ..., (q_N -> ∅).
pub fn state_comb(s: &MultiTimeState) -> Result<Comb, QcombError> {
    let n = s.n_times();
    let mut op = LabeledOperator::new(
        SpaceTuple::single(prep_label(0), s.psi0.nrows()),
        rank1(&s.psi0),
    )?;
    for (i, (psi, phi)) in s.middle.iter().enumerate() {
        let t = i + 1;
        let factor = LabeledOperator::new(
            SpaceTuple::single(prep_label(t), psi.nrows()),
            rank1(psi),
        )?
        .tensor(&LabeledOperator::new(
            SpaceTuple::single(post_label(t), phi.nrows()),
            rank1(&phi.map(|z| z.conj())),
        )?)?;
        op = op.tensor(&factor)?;
    }
    op = op.tensor(&LabeledOperator::new(
        SpaceTuple::single(post_label(n), s.phi_n.nrows()),
        rank1(&s.phi_n.map(|z| z.conj())),
    )?)?;

    let mut teeth = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let input = if j == 0 {
            SpaceTuple::empty()
        } else {
            SpaceTuple::single(post_label(j), s.post_dims()[j - 1])
        };
        let output = if j == n {
            SpaceTuple::empty()
        } else {
            SpaceTuple::single(prep_label(j), s.prep_dims()[j])
        };
        teeth.push(Tooth::new(input, output));
    }
    Comb::new(teeth, op, CombKind::Probabilistic)
}

/// One measurement outcome: a label and its multipartite Kraus operators
/// (matrices from ⊗ p-spaces to ⊗ q-spaces).
#[derive(Debug, Clone)]
pub struct MultiTimeOutcome {
    pub label: String,
    pub kraus: Vec<CMatrix>,
}

/// A multiple-time measurement with fixed slot dimensions.
#[derive(Debug, Clone)]
pub struct MultiTimeMeasurement {
    pub outcomes: Vec<MultiTimeOutcome>,
    /// Dimensions of p_0 .. p_{N-1}.
    pub in_dims: Vec<usize>,
    /// Dimensions of q_1 .. q_N.
    pub out_dims: Vec<usize>,
}

impl MultiTimeMeasurement {
    fn in_tuple(&self) -> SpaceTuple {
        let mut t = SpaceTuple::empty();
        for (i, &d) in self.in_dims.iter().enumerate() {
            t = t.concat(&SpaceTuple::single(prep_label(i), d)).unwrap();
        }
        t
    }

    fn out_tuple(&self) -> SpaceTuple {
        let mut t = SpaceTuple::empty();
        for (i, &d) in self.out_dims.iter().enumerate() {
            t = t
                .concat(&SpaceTuple::single(post_label(i + 1), d))
                .unwrap();
        }
        t
    }

    /// Comb operators R_i = Σ_j |K_j>><<K_j| per outcome.
    pub fn outcome_operators(&self) -> Result<Vec<LabeledOperator>, QcombError> {
        self.outcomes
            .iter()
            .map(|o| Ok(choi_from_kraus(&o.kraus, &self.in_tuple(), &self.out_tuple())?.choi))
            .collect()
    }

    /// Tooth structure of the outcome combs: (p_{j-1} -> q_j).
    pub fn teeth(&self) -> Vec<Tooth> {
        (0..self.in_dims.len())
            .map(|j| {
                Tooth::new(
                    SpaceTuple::single(prep_label(j), self.in_dims[j]),
                    SpaceTuple::single(post_label(j + 1), self.out_dims[j]),
                )
            })
            .collect()
    }
}

/// p(i|S) = Tr[S R_i^T] / Σ_l Tr[S R_l^T]; the denominator is the overall
/// post-selection probability.
pub fn history_probability(
    m: &MultiTimeMeasurement,
    s: &MultiTimeState,
    outcome: usize,
) -> Result<f64, QcombError> {
    let probs = history_distribution(m, s)?;
    Ok(probs[outcome])
}

/// Full normalized outcome distribution.
pub fn history_distribution(
    m: &MultiTimeMeasurement,
    s: &MultiTimeState,
) -> Result<Vec<f64>, QcombError> {
    let sc = state_comb(s)?;
    let ops = m.outcome_operators()?;
    let raw: Vec<f64> = ops
        .iter()
        .map(|r| {
            let v = link(r, &sc.op)?;
            Ok(v.scalar_value()
                .ok_or_else(|| QcombError::ShapeMismatch {
                    expected: "scalar".into(),
                    got: "operator".into(),
                })?
                .re)
        })
        .collect::<Result<_, QcombError>>()?;
    let total: f64 = raw.iter().sum();
    if total <= 1e-12 {
        return Err(QcombError::PostSelectionImpossible(total));
    }
    Ok(raw.iter().map(|p| (p / total).max(0.0)).collect())
}

/// The three-outcome measurement of sigma_x(t_1) - sigma_x(t_2) on a qubit:
/// outcomes +2 and -2 project onto opposite sigma_x eigenstates at the two
/// times; outcome 0 keeps the equal-eigenvalue branches coherent in a single
/// Kraus operator.
pub fn sigma_x_difference_instrument() -> MultiTimeMeasurement {
    let h = 0.5f64.sqrt();
    let plus = CMatrix::from_row_slice(2, 1, &[Complex64::new(h, 0.0), Complex64::new(h, 0.0)]);
    let minus = CMatrix::from_row_slice(2, 1, &[Complex64::new(h, 0.0), Complex64::new(-h, 0.0)]);
    let pp = rank1(&plus);
    let pm = rank1(&minus);
    // Joint Kraus on p0 ⊗ p1 -> q1 ⊗ q2: first factor acts p0 -> q1 (time
    // t1), second p1 -> q2 (time t2).
    let k_plus2 = pp.kronecker(&pm); // sigma_x: +1 at t1, -1 at t2
    let k_minus2 = pm.kronecker(&pp);
    let k_zero = pp.kronecker(&pp) + pm.kronecker(&pm);
    MultiTimeMeasurement {
        outcomes: vec![
            MultiTimeOutcome {
                label: "+2".into(),
                kraus: vec![k_plus2],
            },
            MultiTimeOutcome {
                label: "-2".into(),
                kraus: vec![k_minus2],
            },
            MultiTimeOutcome {
                label: "0".into(),
                kraus: vec![k_zero],
            },
        ],
        in_dims: vec![2, 2],
        out_dims: vec![2, 2],
    }
}

/// Any nonzero Kraus operator, suitably rescaled, is an outcome of some
/// measurement: scale |K>><<K| under the uniform deterministic comb and
/// complete it to a two-outcome instrument.
pub fn embed_kraus(
    k: &CMatrix,
    in_dims: &[usize],
    out_dims: &[usize],
) -> Result<GeneralizedInstrument, QcombError> {
    let m = MultiTimeMeasurement {
        outcomes: vec![MultiTimeOutcome {
            label: "k".into(),
            kraus: vec![k.clone()],
        }],
        in_dims: in_dims.to_vec(),
        out_dims: out_dims.to_vec(),
    };
    let teeth = m.teeth();
    let r = m.outcome_operators()?.pop().unwrap();
    let max_eig = linalg::eigh(r.matrix())
        .0
        .iter()
        .cloned()
        .fold(0.0f64, f64::max);
    if max_eig <= 1e-14 {
        return Err(QcombError::Parse("Kraus operator is zero".into()));
    }
    // c R <= J (uniform comb) guarantees feasibility of the scaled element.
    let d_out: usize = out_dims.iter().product();
    let scale = 0.5 / (d_out as f64 * max_eig);
    let scaled = r.scale(scale);
    let feas = probabilistic_feasibility(&scaled, &teeth, 1e-8, 5000)?;
    let rest = feas.witness.sub(&scaled.aligned_to(feas.witness.spaces())?)?;
    Ok(GeneralizedInstrument {
        elements: vec![
            Comb::new(teeth.clone(), scaled, CombKind::Probabilistic)?,
            Comb::new(teeth, rest, CombKind::Probabilistic)?,
        ],
    })
}
