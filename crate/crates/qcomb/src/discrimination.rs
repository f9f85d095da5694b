//! Minimum-error discrimination of memory channels: Helstrom measurement on
//! states and an alternating (seesaw) ascent over tester normalizations for
//! the operational distance between combs.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::combs::{project_hierarchy_affine, validate_deterministic, Comb, Tooth};
use crate::linalg::{self, CMatrix};
use crate::operators::LabeledOperator;
use crate::testers::{born, dual_teeth, validate_tester, Tester};
use crate::QcombError;

/// Two deterministic combs with identical tooth structure, plus priors.
#[derive(Debug, Clone)]
pub struct DiscriminationProblem {
    pub r0: Comb,
    pub r1: Comb,
    pub priors: (f64, f64),
}

impl DiscriminationProblem {
    pub fn new(r0: Comb, r1: Comb) -> Self {
        DiscriminationProblem {
            r0,
            r1,
            priors: (0.5, 0.5),
        }
    }

    pub fn with_priors(mut self, p0: f64, p1: f64) -> Self {
        self.priors = (p0, p1);
        self
    }

    fn validate(&self, tol: f64) -> Result<(), QcombError> {
        validate_deterministic(&self.r0, tol)?;
        validate_deterministic(&self.r1, tol)?;
        let (p0, p1) = self.priors;
        if p0 < 0.0 || p1 < 0.0 || (p0 + p1 - 1.0).abs() > 1e-12 {
            return Err(QcombError::Parse(format!(
                "priors ({p0}, {p1}) are not a probability pair"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SeesawConfig {
    pub max_iter: usize,
    pub restarts: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for SeesawConfig {
    fn default() -> Self {
        SeesawConfig {
            max_iter: 200,
            restarts: 8,
            tol: 1e-7,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DiscriminationResult {
    pub p_error: f64,
    pub distance: f64,
    /// Optimal two-outcome tester {P_0, P_1} certifying p_error.
    pub tester: Tester,
    /// Objective value per accepted seesaw iteration of the best restart.
    pub trace: Vec<f64>,
    /// False if the seesaw hit max_iter while still improving.
    pub converged: bool,
}

/// Helstrom measurement: projectors onto the positive / non-positive
/// eigenspaces of the weighted difference, and the resulting error
/// probability (1 - ||pi0 rho0 - pi1 rho1||_1)/2.
pub fn helstrom(
    rho0: &CMatrix,
    rho1: &CMatrix,
    priors: (f64, f64),
) -> (Vec<CMatrix>, f64) {
    let delta = linalg::hermitize(&(rho0.scale(priors.0) - rho1.scale(priors.1)));
    let (vals, vecs) = linalg::eigh(&delta);
    let d = delta.nrows();
    let mut e0 = CMatrix::zeros(d, d);
    let mut norm1 = 0.0;
    for (k, &l) in vals.iter().enumerate() {
        norm1 += l.abs();
        if l > 0.0 {
            let v = vecs.column(k);
            e0 += v * v.adjoint();
        }
    }
    let e1 = linalg::ident(d) - &e0;
    let p_error = 0.5 * (1.0 - norm1);
    (vec![e0, e1], p_error)
}

/// Project a Hermitian candidate onto (tester hierarchy) ∩ PSD by Dykstra.
fn dykstra_tester_set(
    seed_op: &LabeledOperator,
    teeth_dual: &[Tooth],
    tol: f64,
    max_iter: usize,
) -> LabeledOperator {
    let spaces = seed_op.spaces().clone();
    let mut x = linalg::hermitize(seed_op.matrix());
    let mut p = CMatrix::zeros(x.nrows(), x.ncols());
    let mut q = CMatrix::zeros(x.nrows(), x.ncols());
    let scale = linalg::max_abs(&x).max(1.0);
    let mut affine = x.clone();
    for _ in 0..max_iter {
        let y = linalg::psd_part(&(&x + &p));
        p = &x + &p - &y;
        let z = LabeledOperator::new(spaces.clone(), &y + &q).unwrap();
        let proj = project_hierarchy_affine(&z, teeth_dual);
        q = &y + &q - proj.matrix();
        x = proj.matrix().clone();
        affine = x.clone();
        if linalg::min_eig(&x) / scale >= -tol {
            break;
        }
    }
    LabeledOperator::new(spaces, linalg::psd_part(&affine)).unwrap()
}

struct SeesawRun {
    a: CMatrix,
    objective: f64,
    trace: Vec<f64>,
    converged: bool,
    e0: CMatrix,
}

/// Maximize ||sqrt(A) D sqrt(A)||_1 over transposed tester normalizations A.
fn seesaw(
    delta: &CMatrix,
    spaces: &crate::spaces::SpaceTuple,
    teeth_dual: &[Tooth],
    init: &CMatrix,
    max_iter: usize,
    tol: f64,
) -> SeesawRun {
    let objective_of = |a: &CMatrix| -> (f64, CMatrix) {
        let ra = linalg::sqrt_psd(a);
        let m = linalg::hermitize(&(&ra * delta * &ra));
        let (vals, vecs) = linalg::eigh(&m);
        let mut e0 = CMatrix::zeros(m.nrows(), m.ncols());
        let mut obj = 0.0;
        for (k, &l) in vals.iter().enumerate() {
            obj += l.abs();
            if l > 0.0 {
                let v = vecs.column(k);
                e0 += v * v.adjoint();
            }
        }
        (obj, e0)
    };

    let mut a = init.clone();
    let (mut obj, mut e0) = objective_of(&a);
    let mut trace = vec![obj];
    let mut converged = false;
    for _ in 0..max_iter {
        // Gradient of Tr[W sqrt(A) D sqrt(A)] at fixed W = 2 E0 - I, pulled
        // back through the Sylvester relation for the square-root derivative.
        let ra = linalg::sqrt_psd(&a);
        let w = e0.scale(2.0) - linalg::ident(a.nrows());
        let s = linalg::hermitize(&(delta * &ra * &w + &w * &ra * delta));
        let (vals, vecs) = linalg::eigh(&a);
        let sv = vecs.adjoint() * &s * &vecs;
        let d = a.nrows();
        let mut g = CMatrix::zeros(d, d);
        let floor = 1e-9 * vals.iter().cloned().fold(0.0f64, f64::max).max(1.0);
        for i in 0..d {
            for j in 0..d {
                let den = (vals[i].max(0.0).sqrt() + vals[j].max(0.0).sqrt()).max(floor.sqrt());
                g[(i, j)] = sv[(i, j)] / den;
            }
        }
        let g = &vecs * g * vecs.adjoint();
        let gnorm = linalg::max_abs(&g).max(1e-15);

        let mut improved = false;
        let mut step = 1.0 / gnorm;
        for _ in 0..12 {
            let cand_seed =
                LabeledOperator::new(spaces.clone(), &a + g.scale(step)).unwrap();
            let cand = dykstra_tester_set(&cand_seed, teeth_dual, 1e-9, 400);
            let (cand_obj, cand_e0) = objective_of(cand.matrix());
            if cand_obj > obj + 1e-14 {
                a = cand.matrix().clone();
                obj = cand_obj;
                e0 = cand_e0;
                trace.push(obj);
                improved = cand_obj > trace[trace.len() - 2] + tol;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            converged = true;
            break;
        }
    }
    SeesawRun {
        a,
        objective: obj,
        trace,
        converged,
        e0,
    }
}

/// The uniform dual-comb normalization and random feasible perturbations.
fn initial_points(
    teeth_dual: &[Tooth],
    spaces: &crate::spaces::SpaceTuple,
    restarts: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<CMatrix> {
    let j = Comb::uniform_deterministic(teeth_dual.to_vec()).unwrap();
    let j_aligned = j.op.aligned_to(spaces).unwrap();
    let mut out = vec![j_aligned.matrix().clone()];
    for _ in 1..restarts.max(1) {
        let noise = linalg::random_psd(rng, spaces.total_dim());
        let scale = linalg::max_abs(j_aligned.matrix()) / linalg::max_abs(&noise).max(1e-15);
        let seed = LabeledOperator::new(
            spaces.clone(),
            j_aligned.matrix() + noise.scale(scale),
        )
        .unwrap();
        out.push(
            dykstra_tester_set(&seed, teeth_dual, 1e-9, 400)
                .matrix()
                .clone(),
        );
    }
    out
}

fn best_seesaw(
    delta: &CMatrix,
    spaces: &crate::spaces::SpaceTuple,
    teeth_dual: &[Tooth],
    config: &SeesawConfig,
) -> SeesawRun {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let inits = initial_points(teeth_dual, spaces, config.restarts, &mut rng);
    let mut best: Option<SeesawRun> = None;
    for init in &inits {
        let run = seesaw(delta, spaces, teeth_dual, init, config.max_iter, config.tol);
        if best.as_ref().map_or(true, |b| run.objective > b.objective) {
            best = Some(run);
        }
    }
    best.unwrap()
}

/// Operational distance between two combs with an explicit optimal tester.
pub fn comb_distance(
    prob: &DiscriminationProblem,
    config: &SeesawConfig,
) -> Result<DiscriminationResult, QcombError> {
    prob.validate(config.tol.max(1e-7))?;
    let spaces = prob.r0.op.spaces().clone();
    let r1_op = prob.r1.op.aligned_to(&spaces)?;
    let teeth_dual = dual_teeth(&prob.r0.teeth);
    let (p0, p1) = prob.priors;

    // Transposing the whole set {T} is a bijection of the hierarchy set, so
    // the seesaw runs directly over A = T^T against the untransposed combs.
    let weighted = linalg::hermitize(
        &(prob.r0.op.matrix().scale(p0) - r1_op.matrix().scale(p1)),
    );
    let run = best_seesaw(&weighted, &spaces, &teeth_dual, config);
    let p_error = 0.5 * (1.0 - run.objective);

    let distance = if (p0 - p1).abs() <= 1e-12 {
        run.objective
    } else {
        let unweighted = linalg::hermitize(
            &(prob.r0.op.matrix() - r1_op.matrix()).scale(0.5),
        );
        best_seesaw(&unweighted, &spaces, &teeth_dual, config).objective
    };

    // P_0^T = sqrt(A) E_0 sqrt(A); P_1 = T - P_0.
    let ra = linalg::sqrt_psd(&run.a);
    let p0_t = linalg::hermitize(&(&ra * &run.e0 * &ra));
    let p0_op = LabeledOperator::new(spaces.clone(), p0_t.transpose())?;
    let t_op = LabeledOperator::new(spaces.clone(), run.a.transpose())?;
    let p1_op = t_op.sub(&p0_op)?;
    let clamp = |op: LabeledOperator| {
        LabeledOperator::new(spaces.clone(), linalg::psd_part(op.matrix())).unwrap()
    };
    let tester = Tester::new(vec![clamp(p0_op), clamp(p1_op)], prob.r0.teeth.clone())?;

    Ok(DiscriminationResult {
        p_error: p_error.max(0.0),
        distance: distance.clamp(0.0, 1.0 + 1e-9),
        tester,
        trace: run.trace,
        converged: run.converged,
    })
}

/// The N=1 channel distance: identical to comb_distance on 1-combs, where the
/// tester normalizations are exactly the operators I ⊗ sigma.
pub fn cb_distance_n1(
    o0: &Comb,
    o1: &Comb,
    config: &SeesawConfig,
) -> Result<f64, QcombError> {
    if o0.n_teeth() != 1 || o1.n_teeth() != 1 {
        return Err(QcombError::NotDeterministicComb(
            "cb distance is defined for 1-combs".into(),
        ));
    }
    let prob = DiscriminationProblem::new(o0.clone(), o1.clone());
    Ok(comb_distance(&prob, config)?.distance)
}

/// Distance certified by a fixed two-outcome tester: d_lb = 1 - 2 p_e at
/// equal priors, with p_e = pi0 p(1|R0) + pi1 p(0|R1).
pub fn distance_lower_bound(
    prob: &DiscriminationProblem,
    tester: &Tester,
) -> Result<f64, QcombError> {
    if tester.elements.len() != 2 {
        return Err(QcombError::TesterViolation(
            "lower bound needs a two-outcome tester".into(),
        ));
    }
    validate_tester(tester, 1e-6)?;
    let (p0, p1) = prob.priors;
    let p_e = p0 * born(&tester.elements[1], &prob.r0)?
        + p1 * born(&tester.elements[0], &prob.r1)?;
    Ok((1.0 - 2.0 * p_e).max(0.0))
}
