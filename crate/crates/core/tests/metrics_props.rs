mod common;

use elli::metrics::{accuracy, nmi};
use elli::Partition;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;

fn pair(seed: u64) -> (Partition, Partition, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..30);
    let k = rng.random_range(1..=n.min(5));
    let a = random_partition(n, k, &mut rng);
    let b = random_partition(n, k, &mut rng);
    (a, b, rng)
}

fn shuffled_labels(p: &Partition, rng: &mut ChaCha8Rng) -> Partition {
    let mut relabel: Vec<usize> = (0..p.k()).collect();
    for i in (1..p.k()).rev() {
        relabel.swap(i, rng.random_range(0..=i));
    }
    p.relabeled(&relabel)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn accuracy_matches_brute_force(seed in any::<u64>()) {
        let (a, b, _) = pair(seed);
        prop_assert!((accuracy(&a, &b).unwrap() - brute_force_accuracy(&a, &b)).abs() < 1e-12);
    }

    #[test]
    fn nmi_matches_brute_force(seed in any::<u64>()) {
        let (a, b, _) = pair(seed);
        let v = nmi(&a, &b).unwrap();
        prop_assert!((v - brute_force_nmi(&a, &b)).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&v));
        prop_assert!((v - nmi(&b, &a).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn label_permutations_do_not_matter(seed in any::<u64>()) {
        let (a, b, mut rng) = pair(seed);
        let a2 = shuffled_labels(&a, &mut rng);
        let b2 = shuffled_labels(&b, &mut rng);
        prop_assert_eq!(accuracy(&a, &b).unwrap(), accuracy(&a2, &b2).unwrap());
        prop_assert!((nmi(&a, &b).unwrap() - nmi(&a2, &b2).unwrap()).abs() < 1e-12);
        prop_assert_eq!(accuracy(&a, &a2).unwrap(), 1.0);
        prop_assert!((nmi(&a, &a2).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn accuracy_is_symmetric(seed in any::<u64>()) {
        let (a, b, _) = pair(seed);
        prop_assert_eq!(accuracy(&a, &b).unwrap(), accuracy(&b, &a).unwrap());
    }
}
