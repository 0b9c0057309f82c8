use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use zecap_core::capacity::{decompose_orthocomplement_state, trace_overlap};
use zecap_core::cj::{inverse_permutation, permute_vector, PermuteSubsystems};
use zecap_core::io::ChannelFile;
use zecap_core::linalg::{c, hs_inner, kron_vec, random_gaussian_matrix, random_unit_vector, CVec};
use zecap_core::product::{is_product, matrix_to_state, state_to_matrix, PRODUCT_TOL};
use zecap_core::{capacity_subspace, Channel, PureState, Subspace};

fn dims_strategy() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1usize..=3, 1..=4)
}

fn perm_of(len: usize, seed: u64) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut p: Vec<usize> = (0..len).collect();
    p.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn permutation_preserves_inner_products(dims in dims_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n: usize = dims.iter().product();
        let u = random_unit_vector(&mut rng, n);
        let v = random_unit_vector(&mut rng, n);
        let perm = perm_of(dims.len(), seed ^ 1);
        let (pu, new_dims) = permute_vector(&u, &dims, &perm).unwrap();
        let (pv, _) = permute_vector(&v, &dims, &perm).unwrap();
        prop_assert!((pu.dotc(&pv) - u.dotc(&v)).norm() < 1e-12);
        let (back, back_dims) = permute_vector(&pu, &new_dims, &inverse_permutation(&perm)).unwrap();
        prop_assert_eq!(back_dims, dims);
        prop_assert_eq!(back, u);
    }

    #[test]
    fn permuting_a_product_permutes_its_factors(dims in dims_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let factors: Vec<CVec> = dims.iter().map(|&d| random_unit_vector(&mut rng, d)).collect();
        let perm = perm_of(dims.len(), seed ^ 2);
        let tensor = |fs: &mut dyn Iterator<Item = &CVec>| {
            fs.fold(CVec::from_element(1, c(1.0, 0.0)), |acc, f| kron_vec(&acc, f))
        };
        let whole = PureState::new(tensor(&mut factors.iter()), dims.clone()).unwrap();
        let permuted = whole.permute_subsystems(&perm).unwrap();
        let expected = tensor(&mut perm.iter().map(|&j| &factors[j]));
        prop_assert!((permuted.amplitudes() - expected).norm() < 1e-12);
        prop_assert_eq!(permuted.dims().to_vec(), perm.iter().map(|&j| dims[j]).collect::<Vec<_>>());
    }

    #[test]
    fn state_matrix_round_trip(da in 1usize..=4, db in 1usize..=4, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = PureState::new(random_unit_vector(&mut rng, da * db), vec![da, db]).unwrap();
        let m = state_to_matrix(&v).unwrap();
        prop_assert_eq!(m.shape(), (da, db));
        let back = matrix_to_state(&m).unwrap();
        prop_assert_eq!(back.dims(), v.dims());
        // renormalisation may move the last bit
        prop_assert!((back.amplitudes() - v.amplitudes()).norm() < 1e-14);
    }

    #[test]
    fn products_are_detected(da in 1usize..=4, db in 1usize..=4, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_unit_vector(&mut rng, da);
        let b = random_unit_vector(&mut rng, db);
        let v = PureState::new(kron_vec(&a, &b), vec![da, db]).unwrap();
        let t = is_product(&v, PRODUCT_TOL).unwrap();
        prop_assert!(t.is_product);
        let (wa, wb) = t.witness.unwrap();
        prop_assert!((kron_vec(wa.amplitudes(), wb.amplitudes()).dotc(v.amplitudes()).norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn support_and_complement_partition_the_space(d in 2usize..=3, env in 1usize..=4, seed in any::<u64>()) {
        let ch = Channel::random(d, env, seed).unwrap();
        let s = capacity_subspace(&ch, 1e-10).unwrap().subspace;
        let comp = s.orthogonal_complement();
        prop_assert_eq!(s.dim() + comp.dim(), d * d);
        let total = s.projector() + comp.projector();
        prop_assert!((total - zecap_core::linalg::identity(d * d)).norm() < 1e-10);
    }

    #[test]
    fn dual_is_the_adjoint(d_in in 1usize..=3, env in 1usize..=3, seed in any::<u64>()) {
        let ch = Channel::random(d_in, env, seed).unwrap();
        let dual = ch.dual();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 3);
        let x = random_gaussian_matrix(&mut rng, ch.d_out(), ch.d_out());
        let y = random_gaussian_matrix(&mut rng, d_in, d_in);
        let lhs = hs_inner(&x, &ch.apply_matrix(&y).unwrap());
        let rhs = hs_inner(&dual.apply_matrix(&x).unwrap(), &y);
        prop_assert!((lhs - rhs).norm() <= 1e-10);
    }

    #[test]
    fn overlap_is_symmetric_and_bounded(d in 2usize..=3, env in 1usize..=4, seed in any::<u64>()) {
        let ch = Channel::random(d, env, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 4);
        let a = PureState::single(random_unit_vector(&mut rng, d)).unwrap();
        let b = PureState::single(random_unit_vector(&mut rng, d)).unwrap();
        let ab = trace_overlap(&ch, &a, &b).unwrap();
        prop_assert!((ab - trace_overlap(&ch, &b, &a).unwrap()).abs() <= 1e-12);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&ab));
    }

    #[test]
    fn channel_files_round_trip(d_in in 1usize..=3, env in 1usize..=3, seed in any::<u64>()) {
        let ch = Channel::random(d_in, env, seed).unwrap();
        let f = ChannelFile::from_channel("p", &ch);
        let text = serde_json::to_string(&f).unwrap();
        prop_assert_eq!(ChannelFile::parse(&text).unwrap().to_channel().unwrap(), ch);
    }

    #[test]
    fn complement_states_decompose_into_pairs(seed in any::<u64>()) {
        // S1 of dimension 3 in C^2 ⊗ C^2, so dim S1⊥ = 1
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s1 = Subspace::span(&(0..3).map(|_| random_unit_vector(&mut rng, 4)).collect::<Vec<_>>(), vec![2, 2]).unwrap();
        let s2 = Subspace::span(&(0..2).map(|_| random_unit_vector(&mut rng, 4)).collect::<Vec<_>>(), vec![2, 2]).unwrap();
        let joint = s1.tensor(&s2);
        let comp = joint.orthogonal_complement();
        let v = comp.basis().iter().fold(CVec::zeros(16), |acc, b| acc + b * c(rand::Rng::random::<f64>(&mut rng), 0.0));
        let v = PureState::normalized(v, vec![4, 4]).unwrap();
        let pairs = decompose_orthocomplement_state(&v, &s1, &s2).unwrap();
        let rebuilt = pairs.iter().fold(CVec::zeros(16), |acc, (a, b)| acc + kron_vec(a, b));
        prop_assert!((rebuilt - v.amplitudes()).norm() < 1e-10);
    }
}
