mod common;

use common::*;
use nalgebra::DMatrix;
use qcomb::linalg::{self, CMatrix};
use qcomb::operators::{
    apply_map, choi_from_kraus, choi_of_map, double_ket, kraus_decompose, LabeledOperator,
};
use qcomb::spaces::SpaceTuple;

fn q(label: &str) -> SpaceTuple {
    SpaceTuple::single(label, 2)
}

#[test]
fn double_ket_examples() {
    let v = double_ket(&linalg::ident(2), &q("out"), &q("in")).unwrap();
    let expect = [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
    for (a, b) in v.vec.iter().zip(expect.iter()) {
        assert!((a - b).norm() < 1e-15);
    }

    let v = double_ket(&sigma_x(), &q("out"), &q("in")).unwrap();
    let expect = [0.0, 1.0, 1.0, 0.0];
    for (a, b) in v.vec.iter().zip(expect.iter()) {
        assert!((a - c(*b, 0.0)).norm() < 1e-15);
    }

    // |0><1| vectorizes to |0>|1>.
    let m = rmat(2, 2, &[0.0, 1.0, 0.0, 0.0]);
    let v = double_ket(&m, &q("out"), &q("in")).unwrap();
    let expect = [0.0, 1.0, 0.0, 0.0];
    for (a, b) in v.vec.iter().zip(expect.iter()) {
        assert!((a - c(*b, 0.0)).norm() < 1e-15);
    }
}

#[test]
fn choi_of_identity_map_is_double_ket_projector() {
    let view = choi_of_map(|x| x.clone(), &q("in"), &q("out")).unwrap();
    let kk = double_ket(&linalg::ident(2), &q("out"), &q("in")).unwrap().outer();
    assert!(linalg::max_abs_diff(view.choi.matrix(), kk.matrix()) < 1e-14);
    assert!((view.choi.trace().re - 2.0).abs() < 1e-14);
}

#[test]
fn choi_of_trace_map_is_identity_on_input() {
    let out = SpaceTuple::single("sink", 1);
    let view = choi_of_map(
        |x| DMatrix::from_element(1, 1, x.trace()),
        &q("in"),
        &out,
    )
    .unwrap();
    assert!(linalg::max_abs_diff(view.choi.matrix(), &linalg::ident(2)) < 1e-14);
}

#[test]
fn choi_of_depolarizing_is_maximally_mixed() {
    let view = choi_of_map(
        |x| linalg::ident(2).scale(0.5) * x.trace(),
        &q("in"),
        &q("out"),
    )
    .unwrap();
    assert!(linalg::max_abs_diff(view.choi.matrix(), &linalg::ident(4).scale(0.5)) < 1e-14);
}

#[test]
fn apply_map_examples() {
    let mut r = rng(11);
    let rho = LabeledOperator::new(q("in"), random_density(&mut r, 2)).unwrap();

    let id_view = choi_of_map(|x| x.clone(), &q("in"), &q("out")).unwrap();
    let out = apply_map(&id_view, &rho).unwrap();
    assert!(linalg::max_abs_diff(out.matrix(), rho.matrix()) < 1e-12);

    let tr_view = choi_of_map(
        |x| DMatrix::from_element(1, 1, x.trace()),
        &q("in"),
        &SpaceTuple::single("sink", 1),
    )
    .unwrap();
    let out = apply_map(&tr_view, &rho).unwrap();
    assert!((out.scalar_value().unwrap() - rho.trace()).norm() < 1e-12);

    let sx = sigma_x();
    let flip = choi_from_kraus(&[sx.clone()], &q("in"), &q("out")).unwrap();
    let zero = LabeledOperator::new(q("in"), &ket0() * ket0().adjoint()).unwrap();
    let one = apply_map(&flip, &zero).unwrap();
    assert!(linalg::max_abs_diff(one.matrix(), &(&ket1() * ket1().adjoint())) < 1e-12);
}

#[test]
fn choi_roundtrip_on_random_kraus_maps() {
    let mut r = rng(42);
    for _ in 0..20 {
        let kraus = random_tp_kraus(&mut r, 2, 3, 2);
        let view = choi_from_kraus(&kraus, &q("in"), &SpaceTuple::single("out", 3)).unwrap();
        // Compare against direct Kraus action on all basis matrix units.
        for m in 0..2 {
            for n in 0..2 {
                let mut unit = CMatrix::zeros(2, 2);
                unit[(m, n)] = c(1.0, 0.0);
                let direct: CMatrix = kraus
                    .iter()
                    .map(|k| k * &unit * k.adjoint())
                    .sum();
                let x = LabeledOperator::new(q("in"), unit).unwrap();
                let via_choi = apply_map(&view, &x).unwrap();
                assert!(linalg::max_abs_diff(via_choi.matrix(), &direct) < 1e-10);
            }
        }
    }
}

#[test]
fn trace_preserving_iff_partial_trace_identity() {
    let mut r = rng(7);
    // TP Kraus set -> Tr_out[choi] = I_in.
    let kraus = random_tp_kraus(&mut r, 3, 2, 3);
    let view = choi_from_kraus(&kraus, &SpaceTuple::single("in", 3), &q("out")).unwrap();
    let red = view.choi.partial_trace(&["out".into()]).unwrap();
    assert!(linalg::max_abs_diff(red.matrix(), &linalg::ident(3)) < 1e-10);

    // Non-TP map -> partial trace differs from identity.
    let half = choi_from_kraus(
        &[linalg::ident(2).scale(0.5)],
        &q("in"),
        &q("out"),
    )
    .unwrap();
    let red = half.choi.partial_trace(&["out".into()]).unwrap();
    assert!(linalg::max_abs_diff(red.matrix(), &linalg::ident(2)) > 0.5);
}

#[test]
fn partial_trace_examples() {
    let mut r = rng(3);
    let rho = LabeledOperator::new(q("A"), random_density(&mut r, 2)).unwrap();
    let sigma = LabeledOperator::new(q("B"), linalg::random_psd(&mut r, 2)).unwrap();
    let both = rho.tensor(&sigma).unwrap();
    let back = both.partial_trace(&["B".into()]).unwrap();
    assert!(
        linalg::max_abs_diff(back.matrix(), &rho.matrix().scale(sigma.trace().re)) < 1e-12
    );

    let kk = double_ket(&linalg::ident(2), &q("A"), &q("B")).unwrap().outer();
    let marg = kk.partial_trace(&["B".into()]).unwrap();
    assert!(linalg::max_abs_diff(marg.matrix(), &linalg::ident(2)) < 1e-14);

    let all = both.partial_trace(&["A".into(), "B".into()]).unwrap();
    assert!((all.scalar_value().unwrap() - both.trace()).norm() < 1e-12);
}

#[test]
fn partial_transpose_examples() {
    let mut r = rng(5);
    let h = random_herm_op(&mut r, SpaceTuple::of(&[("A", 2), ("B", 3)]));
    let full = h
        .partial_transpose(&["A".into(), "B".into()])
        .unwrap();
    // Full transpose of a Hermitian operator is its conjugate.
    assert!(
        linalg::max_abs_diff(full.matrix(), &h.matrix().map(|z| z.conj())) < 1e-14
    );

    // (|I>><<I|)^{T_B} = SWAP.
    let kk = double_ket(&linalg::ident(2), &q("A"), &q("B")).unwrap().outer();
    let pt = kk.partial_transpose(&["B".into()]).unwrap();
    let swap = rmat(
        4,
        4,
        &[
            1.0, 0.0, 0.0, 0.0, //
            0.0, 0.0, 1.0, 0.0, //
            0.0, 1.0, 0.0, 0.0, //
            0.0, 0.0, 0.0, 1.0,
        ],
    );
    assert!(linalg::max_abs_diff(pt.matrix(), &swap) < 1e-14);

    // Involutive.
    let twice = pt.partial_transpose(&["B".into()]).unwrap();
    assert!(linalg::max_abs_diff(twice.matrix(), kk.matrix()) < 1e-14);

    // Trace preserved.
    let g = random_op(&mut r, SpaceTuple::of(&[("A", 2), ("B", 3)]));
    let pt = g.partial_transpose(&["B".into()]).unwrap();
    assert!((pt.trace() - g.trace()).norm() < 1e-12);
}

#[test]
fn permute_preserves_spectrum_and_reorders_basis() {
    let mut r = rng(9);
    let h = random_herm_op(&mut r, SpaceTuple::of(&[("A", 2), ("B", 3), ("C", 2)]));
    let p = h.permute(&["C".into(), "A".into(), "B".into()]).unwrap();
    let (ev_a, _) = linalg::eigh(h.matrix());
    let (ev_b, _) = linalg::eigh(p.matrix());
    for (x, y) in ev_a.iter().zip(ev_b.iter()) {
        assert!((x - y).abs() < 1e-10);
    }
    // Round trip back to the original order.
    let back = p.aligned_to(h.spaces()).unwrap();
    assert!(linalg::max_abs_diff(back.matrix(), h.matrix()) < 1e-14);

    // Product states permute factor-wise.
    let rho = LabeledOperator::new(q("A"), random_density(&mut r, 2)).unwrap();
    let sig = LabeledOperator::new(q("B"), random_density(&mut r, 2)).unwrap();
    let ab = rho.tensor(&sig).unwrap();
    let ba = ab.permute(&["B".into(), "A".into()]).unwrap();
    let expect = sig.tensor(&rho).unwrap();
    assert!(linalg::max_abs_diff(ba.matrix(), expect.matrix()) < 1e-14);
}

#[test]
fn psd_and_hermitian_predicates() {
    let i2 = LabeledOperator::identity(q("A"));
    assert!(i2.is_psd(1e-9));

    let near = LabeledOperator::new(
        q("A"),
        rmat(2, 2, &[1.0, 0.0, 0.0, -1e-14]),
    )
    .unwrap();
    assert!(near.is_psd(1e-9));

    let sx = LabeledOperator::new(q("A"), sigma_x()).unwrap();
    assert!(sx.is_hermitian(1e-9));
    assert!(!sx.is_psd(1e-9));
}

#[test]
fn kraus_decompose_examples() {
    // Identity channel: one Kraus operator, equal to I up to phase.
    let view = choi_of_map(|x| x.clone(), &q("in"), &q("out")).unwrap();
    let ks = kraus_decompose(&view, 1e-9).unwrap();
    assert_eq!(ks.len(), 1);
    let k = &ks[0];
    let phase = k[(0, 0)] / k[(0, 0)].norm();
    assert!(linalg::max_abs_diff(&k.map(|z| z / phase), &linalg::ident(2)) < 1e-10);

    // Depolarizing channel: four Kraus, each with HS norm^2 = 1/2.
    let dep = choi_of_map(
        |x| linalg::ident(2).scale(0.5) * x.trace(),
        &q("in"),
        &q("out"),
    )
    .unwrap();
    let ks = kraus_decompose(&dep, 1e-9).unwrap();
    assert_eq!(ks.len(), 4);
    for k in &ks {
        let hs: f64 = k.iter().map(|z| z.norm_sqr()).sum();
        assert!((hs - 0.5).abs() < 1e-10);
    }

    // sigma_x conjugation: single Kraus sigma_x up to phase.
    let flip = choi_from_kraus(&[sigma_x()], &q("in"), &q("out")).unwrap();
    let ks = kraus_decompose(&flip, 1e-9).unwrap();
    assert_eq!(ks.len(), 1);
    let phase = ks[0][(0, 1)] / ks[0][(0, 1)].norm();
    assert!(linalg::max_abs_diff(&ks[0].map(|z| z / phase), &sigma_x()) < 1e-10);

    // Reconstruction: sum_j |K_j>><<K_j| = choi, for a random channel.
    let mut r = rng(21);
    let view = random_channel_view(&mut r, "in", 3, "out", 2, 4);
    let ks = kraus_decompose(&view, 1e-9).unwrap();
    assert!(ks.len() <= view.choi.rank());
    let rebuilt = choi_from_kraus(
        &ks,
        &SpaceTuple::single("in", 3),
        &SpaceTuple::single("out", 2),
    )
    .unwrap();
    assert!(linalg::max_abs_diff(rebuilt.choi.matrix(), view.choi.matrix()) < 1e-9);

    // Non-CP choi is rejected.
    let bad = qcomb::operators::LinearMapView::new(
        q("in"),
        q("out"),
        LabeledOperator::new(
            SpaceTuple::of(&[("out", 2), ("in", 2)]),
            sigma_z().kronecker(&linalg::ident(2)),
        )
        .unwrap(),
    )
    .unwrap();
    assert!(kraus_decompose(&bad, 1e-9).is_err());
}
