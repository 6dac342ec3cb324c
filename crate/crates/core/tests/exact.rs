use brunovsky::exact::{inverse, integer_matrix};
use brunovsky::parametrization::chain_products;
use brunovsky::{brunovsky_target, build_observation_matrix, IndexSummary, ParameterSet, Rational, RationalMatrix};
use nalgebra::DMatrix;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn int(v: i64) -> Rational {
    Rational::from_integer(v.into())
}

fn random_int(rng: &mut impl Rng, rows: usize, cols: usize) -> RationalMatrix {
    DMatrix::from_fn(rows, cols, |_, _| int(rng.random_range(-3..=3)))
}

/// Integer staircase pair with unimodular `B_1` and full-row-rank stair blocks.
fn integer_staircase(rng: &mut impl Rng, idx: &IndexSummary) -> (RationalMatrix, RationalMatrix) {
    let (n, m) = (idx.n, idx.m);
    let w = &idx.weyr;
    let offsets: Vec<usize> = w.iter().scan(0, |acc, &x| { let o = *acc; *acc += x; Some(o) }).collect();
    let mut a = random_int(rng, n, n);
    for (i, &oi) in offsets.iter().enumerate() {
        for (j, &oj) in offsets.iter().enumerate().take(i.saturating_sub(1)) {
            a.view_mut((oi, oj), (w[i], w[j])).fill(int(0));
        }
        if i > 0 {
            // Leading identity keeps the stair block full row rank.
            let mut stair = random_int(rng, w[i], w[i - 1]);
            for r in 0..w[i] {
                for c in 0..w[i - 1] {
                    stair[(r, c)] = if c == r { int(1) } else if c < w[i] { int(0) } else { stair[(r, c)].clone() };
                }
            }
            a.view_mut((oi, offsets[i - 1]), (w[i], w[i - 1])).copy_from(&stair);
        }
    }
    let mut b = DMatrix::from_element(n, m, int(0));
    for r in 0..m {
        b[(r, r)] = int(1);
        for c in r + 1..m {
            b[(r, c)] = int(rng.random_range(-2..=2));
        }
    }
    (a, b)
}

#[test]
fn composition_is_exact_over_rationals() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut verified = 0;
    for mu in [vec![3, 2, 2, 1], vec![2, 2], vec![4, 1], vec![3, 3, 1, 1, 1]] {
        let idx = IndexSummary::from_indices(&mu).unwrap();
        let target = brunovsky_target::<Rational>(&mu).unwrap();
        for _ in 0..6 {
            let (a, b) = integer_staircase(&mut rng, &idx);
            let zeros = ParameterSet::<Rational>::zeros(&idx);
            let values: Vec<Rational> = (0..zeros.len()).map(|_| int(rng.random_range(-2..=2))).collect();
            let params = ParameterSet::from_vec(&idx, &values).unwrap();
            let obs = build_observation_matrix(&params, &idx).unwrap();
            let prod = chain_products(&obs, &a, &b, &idx);
            let (Some(g), Some(_)) = (inverse(&prod.d), inverse(&prod.t)) else {
                continue;
            };
            let f = -(&g * &prod.c_star);
            let closed = &a + &b * &f;
            assert_eq!(&prod.t * closed, &target.a * &prod.t, "mu = {mu:?}");
            assert_eq!(&prod.t * &b * &g, target.b, "mu = {mu:?}");
            verified += 1;
        }
    }
    assert!(verified >= 12, "only {verified} invertible draws");
}

#[test]
fn singular_decoupling_matrix_is_detected_exactly() {
    let idx = IndexSummary::from_indices(&[2, 1]).unwrap();
    let mut a = DMatrix::from_element(3, 3, int(0));
    a[(2, 0)] = int(1);
    let b = integer_matrix(3, 2, &[1, 0, 0, 1, 0, 0]);
    // All-zero parameters give D = 0.
    let params = ParameterSet::<Rational>::zeros(&idx);
    let obs = build_observation_matrix(&params, &idx).unwrap();
    let prod = chain_products(&obs, &a, &b, &idx);
    assert!(prod.d.iter().all(Zero::is_zero));
    assert!(inverse(&prod.d).is_none());
}
