mod common;

use common::*;
use qcomb::combs::{
    hierarchy_residual, probabilistic_feasibility, s_i_membership, tensor_combs,
    validate_deterministic, Comb, CombKind, ScheduleSide, Tooth,
};
use qcomb::linalg;
use qcomb::operators::{double_ket, LabeledOperator};
use qcomb::spaces::SpaceTuple;
use qcomb::QcombError;

fn tooth_q(i: &str, o: &str) -> Tooth {
    Tooth::simple(i, 2, o, 2)
}

/// Teeth (i1,o1),(i2,o2) with qubit wires.
fn teeth_2() -> Vec<Tooth> {
    vec![tooth_q("i1", "o1"), tooth_q("i2", "o2")]
}

#[test]
fn channel_choi_is_deterministic_1_comb() {
    let mut r = rng(1);
    for _ in 0..5 {
        let choi = random_channel_choi(&mut r, "i1", 2, "o1", 3, 2);
        let comb = Comb::new(
            vec![Tooth::simple("i1", 2, "o1", 3)],
            choi,
            CombKind::Deterministic,
        )
        .unwrap();
        let rep = validate_deterministic(&comb, 1e-9).unwrap();
        assert!(rep.reduced_combs.is_empty());
    }
}

#[test]
fn uniform_comb_is_deterministic() {
    for teeth in [
        teeth_2(),
        vec![
            Tooth::simple("i1", 2, "o1", 3),
            Tooth::simple("i2", 1, "o2", 2),
            Tooth::simple("i3", 2, "o3", 1),
        ],
    ] {
        let j = Comb::uniform_deterministic(teeth).unwrap();
        assert!(validate_deterministic(&j, 1e-9).is_ok());
    }
}

#[test]
fn memory_combs_validate_and_reduced_combs_are_returned() {
    let mut r = rng(2);
    for n in 1..=4 {
        let comb = random_memory_comb(&mut r, n, 2, 2);
        let rep = validate_deterministic(&comb, 1e-8).unwrap();
        assert_eq!(rep.reduced_combs.len(), n.saturating_sub(1));
        // Each reduced comb is itself a valid deterministic comb on its teeth.
        for (k, red) in rep.reduced_combs.iter().enumerate() {
            let sub = Comb::new(
                comb.teeth[..=k].to_vec(),
                red.clone(),
                CombKind::Deterministic,
            )
            .unwrap();
            assert!(validate_deterministic(&sub, 1e-8).is_ok());
        }
    }
}

/// A wire carrying the second-tooth input back out of the first-tooth output:
/// the acausal direction, rejected at level 2.
fn acausal_fixture() -> Comb {
    let kk = double_ket(
        &linalg::ident(2),
        &SpaceTuple::single("o1", 2),
        &SpaceTuple::single("i2", 2),
    )
    .unwrap()
    .outer();
    let rest = LabeledOperator::identity(SpaceTuple::of(&[("o2", 2), ("i1", 2)])).scale(0.5);
    let op = kk.tensor(&rest).unwrap();
    Comb::new(teeth_2(), op, CombKind::Deterministic).unwrap()
}

#[test]
fn acausal_wire_rejected_at_level_2() {
    let comb = acausal_fixture();
    match validate_deterministic(&comb, 1e-9) {
        Err(QcombError::LevelViolation { level, residual }) => {
            assert_eq!(level, 2);
            assert!(residual > 0.1);
        }
        other => panic!("expected LevelViolation, got {other:?}"),
    }
}

#[test]
fn forward_memory_wire_is_a_valid_comb() {
    // The same construction with the causal wire (first-tooth input delayed
    // to the second-tooth output) is a legitimate quantum memory.
    let kk = double_ket(
        &linalg::ident(2),
        &SpaceTuple::single("o2", 2),
        &SpaceTuple::single("i1", 2),
    )
    .unwrap()
    .outer();
    let rest = LabeledOperator::identity(SpaceTuple::of(&[("o1", 2), ("i2", 2)])).scale(0.5);
    let op = kk.tensor(&rest).unwrap();
    let comb = Comb::new(teeth_2(), op, CombKind::Deterministic).unwrap();
    assert!(validate_deterministic(&comb, 1e-9).is_ok());
}

#[test]
fn asymmetric_perturbation_is_detected() {
    let mut r = rng(3);
    let comb = random_memory_comb(&mut r, 2, 2, 2);
    // eps * (traceless Hermitian on the last input) ⊗ (rank-deficient factor).
    let eps = 1e-3;
    let pert = LabeledOperator::new(SpaceTuple::single("i2", 2), sigma_z())
        .unwrap()
        .tensor(
            &LabeledOperator::new(
                SpaceTuple::of(&[("o2", 2), ("i1", 2), ("o1", 2)]),
                {
                    let mut m = linalg::CMatrix::zeros(8, 8);
                    m[(0, 0)] = c(1.0, 0.0);
                    m
                },
            )
            .unwrap(),
        )
        .unwrap();
    let perturbed = comb
        .op
        .add(&pert.scale(eps).aligned_to(comb.op.spaces()).unwrap())
        .unwrap();
    let bad = Comb {
        op: perturbed.clone(),
        ..comb.clone()
    };
    assert!(validate_deterministic(&bad, 1e-7).is_err());
    assert!(hierarchy_residual(&perturbed, &comb.teeth) >= eps / 2.0);
}

#[test]
fn feasibility_trivial_cases() {
    let mut r = rng(4);
    let comb = random_memory_comb(&mut r, 2, 2, 2);
    let w = probabilistic_feasibility(&comb.op, &comb.teeth, 1e-7, 5000).unwrap();
    // S - R PSD within tolerance and S deterministic.
    let diff = w.witness.sub(&comb.op.aligned_to(w.witness.spaces()).unwrap()).unwrap();
    assert!(linalg::min_eig(diff.matrix()) >= -1e-6);
    let s = Comb::new(comb.teeth.clone(), w.witness.clone(), CombKind::Deterministic).unwrap();
    assert!(validate_deterministic(&s, 1e-6).is_ok());

    let scaled = comb.op.scale(0.3);
    let w = probabilistic_feasibility(&scaled, &comb.teeth, 1e-7, 5000).unwrap();
    let diff = w.witness.sub(&scaled.aligned_to(w.witness.spaces()).unwrap()).unwrap();
    assert!(linalg::min_eig(diff.matrix()) >= -1e-6);
}

#[test]
fn any_small_psd_operator_is_a_probabilistic_comb() {
    let mut r = rng(5);
    let teeth = teeth_2();
    let spaces = SpaceTuple::of(&[("o2", 2), ("i2", 2), ("o1", 2), ("i1", 2)]);
    let p = random_psd_op(&mut r, spaces);
    // Rescale below the uniform comb's spectral floor: then J itself dominates.
    let top = linalg::eigh(p.matrix()).0.last().cloned().unwrap();
    let d_out = 4.0;
    let small = p.scale(1.0 / (top * d_out));
    let w = probabilistic_feasibility(&small, &teeth, 1e-7, 5000).unwrap();
    let diff = w.witness.sub(&small.aligned_to(w.witness.spaces()).unwrap()).unwrap();
    assert!(linalg::min_eig(diff.matrix()) >= -1e-6);
    let s = Comb::new(teeth, w.witness, CombKind::Deterministic).unwrap();
    assert!(validate_deterministic(&s, 1e-6).is_ok());
}

#[test]
fn feasibility_rejects_non_psd() {
    let op = LabeledOperator::new(SpaceTuple::of(&[("o1", 2), ("i1", 2)]), {
        let m = sigma_z().kronecker(&linalg::ident(2));
        m
    })
    .unwrap();
    assert!(matches!(
        probabilistic_feasibility(&op, &[tooth_q("i1", "o1")], 1e-7, 100),
        Err(QcombError::NotPsd(_))
    ));
}

#[test]
fn tensor_combs_all_schedules_of_two_2_combs_validate() {
    let mut r = rng(6);
    let a = random_memory_comb(&mut r, 2, 2, 2);
    let mut b = random_memory_comb(&mut r, 2, 2, 2);
    // Relabel b's spaces to keep them disjoint from a's.
    for l in ["i1", "o1", "i2", "o2"] {
        b.op = b.op.relabel(l, &format!("{l}'")).unwrap();
    }
    b.teeth = vec![tooth_q("i1'", "o1'"), tooth_q("i2'", "o2'")];
    use ScheduleSide::{Left, Right};
    let schedules = [
        vec![Left, Left, Right, Right],
        vec![Left, Right, Left, Right],
        vec![Left, Right, Right, Left],
        vec![Right, Left, Left, Right],
        vec![Right, Left, Right, Left],
        vec![Right, Right, Left, Left],
    ];
    for sched in &schedules {
        let merged = tensor_combs(&a, &b, sched, &[]).unwrap();
        assert_eq!(merged.n_teeth(), 4);
        assert!(validate_deterministic(&merged, 1e-8).is_ok());
    }
    // A fused cross pair gives a 3-tooth comb that still validates.
    let fused = tensor_combs(&a, &b, &[Left, Left, Right, Right], &[1]).unwrap();
    assert_eq!(fused.n_teeth(), 3);
    assert!(validate_deterministic(&fused, 1e-8).is_ok());
}

#[test]
fn parallel_1_combs_merge_into_one_tooth() {
    let mut r = rng(7);
    let a = Comb::new(
        vec![tooth_q("i", "o")],
        random_channel_choi(&mut r, "i", 2, "o", 2, 2),
        CombKind::Deterministic,
    )
    .unwrap();
    let b = Comb::new(
        vec![tooth_q("i'", "o'")],
        random_channel_choi(&mut r, "i'", 2, "o'", 2, 2),
        CombKind::Deterministic,
    )
    .unwrap();
    use ScheduleSide::{Left, Right};
    let merged = tensor_combs(&a, &b, &[Left, Right], &[0]).unwrap();
    assert_eq!(merged.n_teeth(), 1);
    assert_eq!(merged.teeth[0].input.total_dim(), 4);
    assert_eq!(merged.teeth[0].output.total_dim(), 4);
    assert!(validate_deterministic(&merged, 1e-8).is_ok());
}

#[test]
fn tensor_combs_schedule_errors() {
    let mut r = rng(8);
    let a = random_memory_comb(&mut r, 1, 2, 2);
    let mut b = random_memory_comb(&mut r, 1, 2, 2);
    b.op = b.op.relabel("i1", "i1'").unwrap().relabel("o1", "o1'").unwrap();
    b.teeth = vec![tooth_q("i1'", "o1'")];
    use ScheduleSide::{Left, Right};
    assert!(matches!(
        tensor_combs(&a, &b, &[Left, Left], &[]),
        Err(QcombError::InvalidInterleaving(_))
    ));
    assert!(matches!(
        tensor_combs(&a, &b, &[Left, Right], &[1]),
        Err(QcombError::NonAdjacentMerge(..))
    ));
}

#[test]
fn mixture_of_product_channels_has_independent_teeth() {
    let mut r = rng(9);
    let teeth = teeth_2();
    // sum_k p_k C_k ⊗ D_k over the two tooth slots.
    let mut op: Option<LabeledOperator> = None;
    let probs = [0.25, 0.35, 0.4];
    for &p in &probs {
        let ck = random_channel_choi(&mut r, "i1", 2, "o1", 2, 2);
        let dk = random_channel_choi(&mut r, "i2", 2, "o2", 2, 2);
        let term = ck.tensor(&dk).unwrap().scale(p);
        op = Some(match op {
            None => term,
            Some(acc) => acc.add(&term.aligned_to(acc.spaces()).unwrap()).unwrap(),
        });
    }
    let op = op.unwrap();
    assert!(s_i_membership(&op, &teeth, &[(0, 1)], 1e-8));
}

#[test]
fn signalling_comb_fails_swapped_ordering() {
    // Store the first input in memory, emit |0> first, release the memory at
    // the second output: valid in the nominal order, invalid when swapped.
    let wire = double_ket(
        &linalg::ident(2),
        &SpaceTuple::single("o2", 2),
        &SpaceTuple::single("i1", 2),
    )
    .unwrap()
    .outer();
    let fresh = LabeledOperator::new(SpaceTuple::single("o1", 2), &ket0() * ket0().adjoint()).unwrap();
    let sink = LabeledOperator::identity(SpaceTuple::single("i2", 2));
    let op = wire.tensor(&fresh).unwrap().tensor(&sink).unwrap();
    let teeth = teeth_2();
    let comb = Comb::new(teeth.clone(), op.clone(), CombKind::Deterministic).unwrap();
    assert!(validate_deterministic(&comb, 1e-9).is_ok());
    assert!(!s_i_membership(&op, &teeth, &[(0, 1)], 1e-8));
}

#[test]
fn independence_fixture_passes_both_orderings() {
    // R = 1/2 |I>><<I|_{o1,o2'} ⊗ (I-P)_{i1,i2} + 1/2 |sx>><<sx| ⊗ P,
    // P = |11><11| on the two inputs: in the independent-teeth set.
    let kk_i = double_ket(
        &linalg::ident(2),
        &SpaceTuple::single("o1", 2),
        &SpaceTuple::single("o2", 2),
    )
    .unwrap()
    .outer();
    let kk_x = double_ket(
        &sigma_x(),
        &SpaceTuple::single("o1", 2),
        &SpaceTuple::single("o2", 2),
    )
    .unwrap()
    .outer();
    let inputs = SpaceTuple::of(&[("i1", 2), ("i2", 2)]);
    let mut p11 = linalg::CMatrix::zeros(4, 4);
    p11[(3, 3)] = c(1.0, 0.0);
    let p = LabeledOperator::new(inputs.clone(), p11).unwrap();
    let not_p = LabeledOperator::identity(inputs).sub(&p).unwrap();
    let op = kk_i
        .tensor(&not_p)
        .unwrap()
        .scale(0.5)
        .add(&kk_x.tensor(&p).unwrap().scale(0.5))
        .unwrap();
    let teeth = teeth_2();
    assert!(s_i_membership(&op, &teeth, &[(0, 1)], 1e-8));
}
