mod common;

use multiform_core::decompose::{split_radical, Decomposition};
use multiform_core::gen::{gen_decomposable, gen_selfadjoint_pair, random_form_seeded, random_matrix_seeded};
use multiform_core::matrix::same_span;
use multiform_core::selfadjoint::{is_selfadjoint, is_selfadjoint_pairwise};
use multiform_core::{EigenSpec, FieldKind, GenSpec, Matrix, MultiForm, Permutation, Scalar, TolerancePolicy, Q};
use proptest::prelude::*;

fn pol() -> TolerancePolicy {
    TolerancePolicy::default()
}

fn permutation(n: usize) -> impl Strategy<Value = Permutation> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle().prop_map(|v| Permutation::new(v).unwrap())
}

/// A seed-derived exact form of arity 2..=4 and dimension 1..=3.
fn form() -> impl Strategy<Value = MultiForm<Q>> {
    (2usize..=4, 1usize..=3, any::<u64>()).prop_map(|(n, d, seed)| random_form_seeded(seed, n, d))
}

fn invertible(dim: usize, seed: u64) -> Matrix<Q> {
    (0..).map(|k| random_matrix_seeded::<Q>(seed.wrapping_add(k), dim)).find(|m| !m.det().is_zero()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn slot_permutations_act_on_the_right(
        (f, sigma, pi) in form().prop_flat_map(|f| {
            let n = f.arity();
            (Just(f), permutation(n), permutation(n))
        })
    ) {
        let twice = f.permute_slots(&sigma).unwrap().permute_slots(&pi).unwrap();
        prop_assert_eq!(twice, f.permute_slots(&sigma.then(&pi)).unwrap());
        prop_assert_eq!(f.permute_slots(&Permutation::identity(f.arity())).unwrap(), f);
    }

    #[test]
    fn contractions_in_distinct_slots_commute(f in form(), sa in any::<u64>(), sb in any::<u64>(), slot in 0usize..4) {
        let n = f.arity();
        let (i, j) = (slot % n, (slot + 1) % n);
        let a = random_matrix_seeded::<Q>(sa, f.dim());
        let b = random_matrix_seeded::<Q>(sb, f.dim());
        let ab = f.contract_slot(i, &a).unwrap().contract_slot(j, &b).unwrap();
        let ba = f.contract_slot(j, &b).unwrap().contract_slot(i, &a).unwrap();
        prop_assert_eq!(ab, ba);
    }

    #[test]
    fn change_of_basis_is_a_monoid_action(f in form(), sa in any::<u64>(), sb in any::<u64>()) {
        let a = random_matrix_seeded::<Q>(sa, f.dim());
        let b = random_matrix_seeded::<Q>(sb, f.dim());
        let stepwise = f.change_basis(&a).unwrap().change_basis(&b).unwrap();
        prop_assert_eq!(stepwise, f.change_basis(&a.mul(&b)).unwrap());
        prop_assert_eq!(f.change_basis(&Matrix::identity(f.dim())).unwrap(), f);
    }

    #[test]
    fn change_of_basis_commutes_with_slot_permutation(f in form(), sa in any::<u64>()) {
        let a = random_matrix_seeded::<Q>(sa, f.dim());
        let sigma = Permutation::transposition(f.arity(), 0, f.arity() - 1);
        prop_assert_eq!(
            f.change_basis(&a).unwrap().permute_slots(&sigma).unwrap(),
            f.permute_slots(&sigma).unwrap().change_basis(&a).unwrap()
        );
    }

    #[test]
    fn radical_moves_with_the_basis(seed in any::<u64>(), n in 2usize..=3, d in 1usize..=2, k in 1usize..=2) {
        let f = random_form_seeded::<Q>(seed, n, d).direct_sum(&MultiForm::zeros(n, k)).unwrap();
        let c = invertible(d + k, seed ^ 0x5eed);
        let c_inv = c.inverse().unwrap();
        let moved = f.change_basis(&c).unwrap();
        let expected: Vec<Vec<Q>> = f.radical(&pol()).iter().map(|v| c_inv.mul_vec(v)).collect();
        prop_assert!(same_span(&moved.radical(&pol()), &expected, d + k, &pol()));
        let (_, rad) = split_radical(&moved, &pol());
        prop_assert!(rad.len() >= k);
    }

    #[test]
    fn selfadjointness_survives_change_of_basis(seed in any::<u64>(), n in 2usize..=4) {
        let mut spec = GenSpec::new(seed, n, vec![2, 1], FieldKind::ExactRational)
            .with_eigenvalues(&[EigenSpec::Value("3".into()), EigenSpec::Value("-1/2".into())]);
        spec.nilpotent = true;
        let p = gen_selfadjoint_pair::<Q>(&spec).unwrap();
        prop_assert!(is_selfadjoint(&p.form, &p.map, &pol()).unwrap().is_none());
        let c = invertible(3, seed);
        let g = p.form.change_basis(&c).unwrap();
        let t = c.inverse().unwrap().mul(&p.map).mul(&c);
        prop_assert!(is_selfadjoint(&g, &t, &pol()).unwrap().is_none());
        // powers and sums of selfadjoint maps stay selfadjoint
        let t2 = t.mul(&t).add(&t.scale(&Q::from_i64(5)));
        prop_assert!(is_selfadjoint(&g, &t2, &pol()).unwrap().is_none());
    }

    #[test]
    fn slot_zero_check_agrees_with_all_pairs(f in form(), seed in any::<u64>(), scalar_map in any::<bool>()) {
        let t = if scalar_map {
            Matrix::scalar(f.dim(), Q::from_i64(3))
        } else {
            random_matrix_seeded::<Q>(seed, f.dim())
        };
        let single = is_selfadjoint(&f, &t, &pol()).unwrap();
        let pairwise = is_selfadjoint_pairwise(&f, &t, &pol()).unwrap();
        prop_assert_eq!(single.is_none(), pairwise.is_none());
        if scalar_map {
            prop_assert!(single.is_none());
        }
    }

    #[test]
    fn generated_decompositions_are_valid(seed in any::<u64>(), n in 3usize..=4, rad in 0usize..=2) {
        let mut spec = GenSpec::new(seed, n, vec![1, 2], FieldKind::ExactRational).conjugated();
        spec.radical_dim = rad;
        let g = gen_decomposable::<Q>(&spec).unwrap();
        for d in [&g.first, &g.second] {
            prop_assert!(d.validate(&g.form, &pol()).is_ok());
        }
        // dropping a block leaves something that no longer spans
        let short = Decomposition::new(g.first.blocks[1..].to_vec(), g.first.radical.clone());
        prop_assert!(short.validate(&g.form, &pol()).is_err());
    }
}
