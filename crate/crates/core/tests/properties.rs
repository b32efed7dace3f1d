//! Randomized invariants across the word, bar and matrix layers.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use surfcheck::barcomplex::{boundary, coboundary_indices, BarChain, FreeGroupOracle, GroupOracle};
use surfcheck::freegroup::{fox_derivative, relator, FormalWordSum, Genus, Letter, Word};
use surfcheck::liegroup::{
    evaluate_word, moment_map, word_differential, CMatrix, CentralElement, Configuration, SpecialUnitary,
};
use surfcheck::surfacegroup::SurfacePresentation;

fn genus_of(n: usize) -> Genus {
    Genus::new(n).unwrap()
}

fn raw_letters(genus: usize, max_len: usize) -> impl Strategy<Value = Vec<Letter>> {
    prop::collection::vec((1..=2 * genus, any::<bool>()), 0..=max_len)
        .prop_map(|v| v.into_iter().map(|(i, inv)| Letter::new(i, if inv { -1 } else { 1 })).collect())
}

fn word(genus: usize, max_len: usize) -> impl Strategy<Value = Word> {
    raw_letters(genus, max_len).prop_map(move |l| Word::reduce(genus_of(genus), l).unwrap())
}

/// Genus with up to three words of that genus.
fn genus_and_words(max_genus: usize, max_len: usize) -> impl Strategy<Value = (usize, Word, Word, Word)> {
    (1..=max_genus).prop_flat_map(move |g| (Just(g), word(g, max_len), word(g, max_len), word(g, max_len)))
}

/// `s · x` in the group ring.
fn right_mul(s: &FormalWordSum, x: &Word) -> FormalWordSum {
    s.iter().map(|(w, c)| (w.multiply(x).unwrap(), c)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn reduce_is_idempotent((g, raw) in (1..=5usize).prop_flat_map(|g| (Just(g), raw_letters(g, 24)))) {
        let w = Word::reduce(genus_of(g), raw.clone()).unwrap();
        let again = Word::reduce(genus_of(g), w.letters().iter().copied()).unwrap();
        prop_assert_eq!(&again, &w);
        for pair in w.letters().windows(2) {
            prop_assert_ne!(pair[0], pair[1].inverted());
        }
        prop_assert!(w.len() <= raw.len());
        prop_assert_eq!(w.len() % 2, raw.len() % 2);
    }

    #[test]
    fn multiplication_is_associative((_, a, b, c) in genus_and_words(5, 12)) {
        let left = a.multiply(&b).unwrap().multiply(&c).unwrap();
        let right = a.multiply(&b.multiply(&c).unwrap()).unwrap();
        prop_assert_eq!(&left, &right);
        prop_assert!(a.multiply(&a.inverse()).unwrap().is_identity());
    }

    #[test]
    fn fox_product_rule((g, u, v, _) in genus_and_words(5, 10)) {
        let uv = u.multiply(&v).unwrap();
        for i in 1..=2 * g {
            let lhs = fox_derivative(&uv, i).unwrap();
            let rhs = fox_derivative(&u, i).unwrap() + fox_derivative(&v, i).unwrap().left_mul(&u);
            prop_assert_eq!(lhs, rhs);
        }
    }

    /// `Σ_i (∂w/∂x_i)(x_i - 1) = w - 1`.
    #[test]
    fn fox_fundamental_formula((g, w, _, _) in genus_and_words(5, 14)) {
        let genus = genus_of(g);
        let mut total = FormalWordSum::zero();
        for i in 1..=2 * g {
            let d = fox_derivative(&w, i).unwrap();
            total = total + right_mul(&d, &Word::generator(genus, i).unwrap()) - d;
        }
        let expected = FormalWordSum::single(w.clone(), 1) - FormalWordSum::single(Word::identity(genus), 1);
        prop_assert_eq!(total, expected);
    }

    #[test]
    fn boundary_squared_vanishes_in_free_group(
        (g, tuples) in (1..=3usize).prop_flat_map(|g| (
            Just(g),
            (2..=4usize).prop_flat_map(move |d| prop::collection::vec(
                (prop::collection::vec(word(g, 5), d), -3i64..=3), 1..=4)),
        ))
    ) {
        let oracle = FreeGroupOracle { genus: genus_of(g) };
        let degree = tuples[0].0.len();
        let c = BarChain::from_raw_terms(degree, tuples);
        let b = boundary(&oracle, &c).unwrap();
        prop_assert!(boundary(&oracle, &b).unwrap().is_zero());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn dehn_reduction_is_sound((g, w) in (2..=3usize).prop_flat_map(|g| (Just(g), word(g, 16)))) {
        let p = SurfacePresentation::new(genus_of(g));
        let r = p.dehn_reduce(&w).unwrap();
        prop_assert!(r.len() <= w.len());
        if r.is_identity() {
            prop_assert!(w.abelianization().iter().all(|&c| c == 0));
        }
        // reduction is stable
        prop_assert_eq!(p.dehn_reduce(&r).unwrap(), r);
    }

    #[test]
    fn relator_conjugates_are_trivial((g, u, v) in (2..=3usize).prop_flat_map(|g| (Just(g), word(g, 8), word(g, 8)))) {
        let genus = genus_of(g);
        let p = SurfacePresentation::new(genus);
        let r = relator(genus);
        let conj = |x: &Word, y: &Word| x.multiply(y).unwrap().multiply(&x.inverse()).unwrap();
        let same = conj(&u, &r).multiply(&conj(&u, &r.inverse())).unwrap();
        prop_assert!(p.is_trivial(&same).unwrap());
        let mixed = conj(&u, &r).multiply(&conj(&v, &r.inverse())).unwrap();
        prop_assert!(p.is_trivial(&mixed).unwrap());
        prop_assert!(p.is_trivial(&conj(&u, &r)).unwrap());
    }
}

fn scaled_defect(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn evaluation_is_a_homomorphism((g, u, v, _) in genus_and_words(3, 12), seed in any::<u64>(), n in 2..=3usize) {
        let group = SpecialUnitary::new(n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = Configuration::random(genus_of(g), group, &mut rng);
        let uv = evaluate_word(&u.multiply(&v).unwrap(), &c).unwrap();
        let prod = evaluate_word(&u, &c).unwrap().mul(&evaluate_word(&v, &c).unwrap());
        prop_assert!(uv.distance(&prod) <= 1e-12);
    }

    #[test]
    fn word_differential_cocycle((g, u, v, _) in genus_and_words(3, 10), seed in any::<u64>(), n in 2..=3usize) {
        let group = SpecialUnitary::new(n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = Configuration::random(genus_of(g), group, &mut rng);
        let t: Vec<CMatrix> = (0..2 * g).map(|_| group.random_algebra(&mut rng)).collect();
        let uv = u.multiply(&v).unwrap();
        let lhs = word_differential(&uv, &c, &t).unwrap();
        let ev_v = evaluate_word(&v, &c).unwrap();
        let rhs = ev_v.inverse().adjoint_action(&word_differential(&u, &c, &t).unwrap())
            + word_differential(&v, &c, &t).unwrap();
        prop_assert!(scaled_defect(&lhs, &rhs) <= 1e-12, "{}", scaled_defect(&lhs, &rhs));
    }

    #[test]
    fn fiber_is_conjugation_invariant(g in 1..=4usize, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let beta = CentralElement::minus_identity();
        let k = SpecialUnitary::su2().haar(&mut rng);
        let q = Configuration::quaternion_point(genus_of(g)).conjugate(&k);
        prop_assert!(moment_map(&q).distance(beta.point()) <= 1e-12);
        let c = Configuration::random(genus_of(g), SpecialUnitary::su2(), &mut rng);
        let lhs = moment_map(&c.conjugate(&k));
        let rhs = k.mul(&moment_map(&c)).mul(&k.inverse());
        prop_assert!(lhs.distance(&rhs) <= 1e-12);
    }
}

/// Symmetric group on three letters, `(a·b)(i) = a(b(i))`.
struct S3;

type Perm = [u8; 3];

const S3_ELEMENTS: [Perm; 6] = [[0, 1, 2], [1, 0, 2], [0, 2, 1], [2, 1, 0], [1, 2, 0], [2, 0, 1]];

impl GroupOracle for S3 {
    type Element = Perm;

    fn identity(&self) -> Perm {
        [0, 1, 2]
    }
    fn multiply(&self, a: &Perm, b: &Perm) -> Perm {
        [a[b[0] as usize], a[b[1] as usize], a[b[2] as usize]]
    }
    fn invert(&self, a: &Perm) -> Perm {
        let mut out = [0; 3];
        for (i, &x) in a.iter().enumerate() {
            out[x as usize] = i as u8;
        }
        out
    }
    fn equals(&self, a: &Perm, b: &Perm) -> bool {
        a == b
    }
}

fn index_of(p: &Perm) -> usize {
    S3_ELEMENTS.iter().position(|e| e == p).unwrap()
}

/// Face maps written out directly from the definition.
fn face_by_hand(i: usize, t: &[Perm]) -> Vec<Perm> {
    let m = t.len();
    let mut out = t.to_vec();
    if i == 0 {
        out.remove(0);
    } else if i == m {
        out.pop();
    } else {
        let merged = S3.multiply(&t[i - 1], &t[i]);
        out[i - 1] = merged;
        out.remove(i);
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    /// `<δf, c> = <f, ∂c>` for integer cochains on `S3^q`.
    #[test]
    fn coboundary_is_dual_to_boundary(q in 1..=3usize, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let table: Vec<i64> = (0..6usize.pow(q as u32)).map(|_| rng.random_range(-5..=5)).collect();
        let f = |t: &[Perm]| -> i64 {
            table[t.iter().fold(0, |acc, p| acc * 6 + index_of(p))]
        };
        let terms: Vec<(Vec<Perm>, i64)> = (0..rng.random_range(1..=5))
            .map(|_| {
                let t = (0..=q).map(|_| S3_ELEMENTS[rng.random_range(0..6)]).collect();
                (t, rng.random_range(-3..=3))
            })
            .collect();
        let c = BarChain::from_terms(&S3, q + 1, terms).unwrap();

        let pair_boundary: i64 = boundary(&S3, &c)
            .unwrap()
            .terms()
            .iter()
            .map(|(t, k)| k * f(t))
            .sum();
        let pair_coboundary: i64 = c
            .terms()
            .iter()
            .map(|(t, k)| {
                let delta_f: i64 = (0..=q + 1)
                    .map(|i| if i % 2 == 0 { 1 } else { -1 } * f(&face_by_hand(i, t)))
                    .sum();
                k * delta_f
            })
            .sum();
        prop_assert_eq!(pair_boundary, pair_coboundary);

        let signs: Vec<(i64, usize)> = (0..=q + 1).map(|i| (if i % 2 == 0 { 1 } else { -1 }, i)).collect();
        prop_assert_eq!(coboundary_indices(q), signs);
    }
}
