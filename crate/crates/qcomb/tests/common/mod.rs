//! Shared fixtures and random generators for integration tests.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qcomb::combs::{Comb, CombKind, Tooth};
use qcomb::linalg::{self, CMatrix};
use qcomb::link::link_chain;
use qcomb::operators::{choi_from_kraus, LabeledOperator, LinearMapView};
use qcomb::spaces::SpaceTuple;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn mat(rows: usize, cols: usize, entries: &[Complex64]) -> CMatrix {
    DMatrix::from_row_slice(rows, cols, entries)
}

pub fn rmat(rows: usize, cols: usize, entries: &[f64]) -> CMatrix {
    let v: Vec<Complex64> = entries.iter().map(|&x| c(x, 0.0)).collect();
    DMatrix::from_row_slice(rows, cols, &v)
}

pub fn sigma_x() -> CMatrix {
    rmat(2, 2, &[0.0, 1.0, 1.0, 0.0])
}

pub fn sigma_z() -> CMatrix {
    rmat(2, 2, &[1.0, 0.0, 0.0, -1.0])
}

pub fn ket0() -> CMatrix {
    rmat(2, 1, &[1.0, 0.0])
}

pub fn ket1() -> CMatrix {
    rmat(2, 1, &[0.0, 1.0])
}

pub fn ket_plus() -> CMatrix {
    rmat(2, 1, &[0.5f64.sqrt(), 0.5f64.sqrt()])
}

pub fn ket_minus() -> CMatrix {
    rmat(2, 1, &[0.5f64.sqrt(), -(0.5f64.sqrt())])
}

/// Random density matrix (PSD, unit trace).
pub fn random_density(rng: &mut ChaCha8Rng, d: usize) -> CMatrix {
    let p = linalg::random_psd(rng, d);
    let t = p.trace().re;
    p.scale(1.0 / t)
}

/// Random trace-preserving Kraus set: `k` operators d_in -> d_out obtained by
/// slicing a Haar-ish isometry V: d_in -> d_out ⊗ C^k along the ancilla.
pub fn random_tp_kraus(rng: &mut ChaCha8Rng, d_in: usize, d_out: usize, k: usize) -> Vec<CMatrix> {
    let v = linalg::random_isometry(rng, d_out * k, d_in);
    (0..k)
        .map(|j| CMatrix::from_fn(d_out, d_in, |a, b| v[(a * k + j, b)]))
        .collect()
}

/// Choi operator of a random channel on the given labels.
pub fn random_channel_view(
    rng: &mut ChaCha8Rng,
    in_label: &str,
    d_in: usize,
    out_label: &str,
    d_out: usize,
    k: usize,
) -> LinearMapView {
    let kraus = random_tp_kraus(rng, d_in, d_out, k);
    choi_from_kraus(
        &kraus,
        &SpaceTuple::single(in_label, d_in),
        &SpaceTuple::single(out_label, d_out),
    )
    .unwrap()
}

pub fn random_channel_choi(
    rng: &mut ChaCha8Rng,
    in_label: &str,
    d_in: usize,
    out_label: &str,
    d_out: usize,
    k: usize,
) -> LabeledOperator {
    random_channel_view(rng, in_label, d_in, out_label, d_out, k).choi
}

/// Random PSD labeled operator on the given spaces.
pub fn random_psd_op(rng: &mut ChaCha8Rng, spaces: SpaceTuple) -> LabeledOperator {
    let m = linalg::random_psd(rng, spaces.total_dim());
    LabeledOperator::new(spaces, m).unwrap()
}

/// Random Hermitian labeled operator.
pub fn random_herm_op(rng: &mut ChaCha8Rng, spaces: SpaceTuple) -> LabeledOperator {
    let g = linalg::random_ginibre(rng, spaces.total_dim(), spaces.total_dim());
    LabeledOperator::new(spaces, linalg::hermitize(&g)).unwrap()
}

/// Random deterministic N-comb on wires of dimension `d` with tooth labels
/// `i1,o1,...,iN,oN`, built as a memory channel: a chain of random isometries
/// sharing an ancilla of dimension `anc`, with the final ancilla traced out.
pub fn random_memory_comb(rng: &mut ChaCha8Rng, n: usize, d: usize, anc: usize) -> Comb {
    assert!(n >= 1 && anc >= 1);
    let mut step_chois = Vec::new();
    for j in 1..=n {
        let a_prev = if j == 1 { 1 } else { anc };
        let a_next = anc;
        let mut input = SpaceTuple::single(format!("i{j}"), d);
        if a_prev > 1 {
            input = input
                .concat(&SpaceTuple::single(format!("a{}", j - 1), a_prev))
                .unwrap();
        }
        let mut output = SpaceTuple::single(format!("o{j}"), d);
        if a_next > 1 {
            output = output
                .concat(&SpaceTuple::single(format!("a{j}"), a_next))
                .unwrap();
        }
        let v = linalg::random_isometry(rng, d * a_next, d * a_prev);
        step_chois.push(choi_from_kraus(&[v], &input, &output).unwrap().choi);
    }
    let chained = link_chain(&step_chois).unwrap();
    let op = if anc > 1 {
        chained.partial_trace(&[format!("a{n}")]).unwrap()
    } else {
        chained
    };
    let teeth: Vec<Tooth> = (1..=n)
        .map(|j| Tooth::simple(&format!("i{j}"), d, &format!("o{j}"), d))
        .collect();
    Comb::new(teeth, op, CombKind::Deterministic).unwrap()
}

/// Random general (non-Hermitian) labeled operator.
pub fn random_op(rng: &mut ChaCha8Rng, spaces: SpaceTuple) -> LabeledOperator {
    let g = linalg::random_ginibre(rng, spaces.total_dim(), spaces.total_dim());
    LabeledOperator::new(spaces, g).unwrap()
}
