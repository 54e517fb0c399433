//! Library transformations against the nested-loop references, including
//! degenerate shapes the acceptance run does not reach.

mod common;

use common::*;
use multiform_core::{Matrix, MultiForm, Permutation, Scalar, Q};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn dimension_one_forms() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let f = random_q_form(&mut rng, 4, 1);
    let m = Matrix::from_rows(vec![vec![Q::from_i64(-2)]]).unwrap();
    assert_eq!(f.contract_slot(2, &m).unwrap(), naive_contract(&f, 2, &m));
    assert_eq!(f.change_basis(&m).unwrap(), naive_change_basis(&f, &m));
    assert_eq!(f.change_basis(&m).unwrap().get(&[0, 0, 0, 0]), &(f.get(&[0, 0, 0, 0]).clone() * Q::from_i64(16)));
}

#[test]
fn every_permutation_of_four_slots() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let f = random_q_form(&mut rng, 4, 2);
    for sigma in Permutation::all(4) {
        assert_eq!(f.permute_slots(&sigma).unwrap(), naive_permute(&f, sigma.images()));
    }
}

#[test]
fn singular_change_of_basis() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let f = random_q_form(&mut rng, 3, 3);
    let mut m = random_q_matrix(&mut rng, 3);
    for r in 0..3 {
        m[(r, 2)] = m[(r, 0)].clone() + m[(r, 1)].clone();
    }
    assert_eq!(f.change_basis(&m).unwrap(), naive_change_basis(&f, &m));
}

#[test]
fn eval_is_multilinear() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let f = random_q_form(&mut rng, 3, 3);
    let x: Vec<Vec<Q>> = (0..4).map(|_| (0..3).map(|_| small_q(&mut rng, -5, 5)).collect()).collect();
    let sum: Vec<Q> = x[0].iter().zip(&x[3]).map(|(a, b)| a.clone() + b.clone()).collect();
    let lhs = f.eval(&[sum, x[1].clone(), x[2].clone()]).unwrap();
    let rhs = naive_eval(&f, &[x[0].clone(), x[1].clone(), x[2].clone()])
        + naive_eval(&f, &[x[3].clone(), x[1].clone(), x[2].clone()]);
    assert_eq!(lhs, rhs);
    assert_eq!(MultiForm::<Q>::zeros(3, 3).eval(&x[..3]).unwrap(), Q::zero());
}
