mod common;

use common::{env, int, mat, r, rank, specialize};
use ddgl2_core::error::MatError;
use ddgl2_core::expr::ParamEnv;
use ddgl2_core::matd::{rref, span, Mat};
use ddgl2_core::scalar::Scalar;

fn e(i: usize, j: usize) -> Mat {
    Mat::unit(4, i, j).unwrap()
}

fn q() -> Scalar {
    Scalar::q()
}

fn e2(i: usize, j: usize) -> Mat {
    Mat::unit(2, i, j).unwrap()
}

#[test]
fn unit_products() {
    assert_eq!(&e(1, 2) * &e(2, 3), e(1, 3));
    assert!((&e(2, 1) * &e(2, 3)).is_zero());
    assert_eq!(&e(2, 4) * &e(4, 3), e(2, 3));
    assert_eq!(Mat::unit(4, 0, 1), Err(MatError::IndexOutOfRange(0, 1, 4)));
}

#[test]
fn perturbation_products() {
    let env = env(&[("m", int(5))]);
    let c12 = mat("q*e(1,3) - m*e(2,4)", &env);
    let c21 = mat("-m*e(2,1) + e(4,3)", &env);
    assert_eq!(&c12 * &c21, e(2, 3).scale(&int(-5)));
    assert_eq!(&c21 * &c12, e(2, 3).scale(&(q() * int(-5))));
    // Oracle: plain rational multiplication at q = 7/2.
    let q0 = r(7, 2);
    let prod = common::rmul(&specialize(&c21, &q0), &specialize(&c12, &q0));
    assert_eq!(prod[1][2], r(-35, 2));
    assert_eq!(&Mat::identity(4) * &c12, c12);
}

#[test]
fn commutators() {
    let a = Mat::diag(vec![int(1), q(), int(3), q() * q()]);
    let b = Mat::diag(vec![int(2), int(5), q(), int(7)]);
    assert!(a.commutator(&b).unwrap().is_zero());
    assert!(Mat::identity(4).commutator(&a).unwrap().is_zero());

    let m = Scalar::from_ratio(3, 5);
    let env = ParamEnv::new().with("m", m.clone());
    let c11 = mat("e(1,1)+q^-1*e(2,2)+e(3,3)+q^-1*e(4,4)", &env);
    let c22 = mat("q^2*e(1,1)+q^2*e(2,2)+q*e(3,3)+q*e(4,4)-q*m*e(2,3)", &env);
    let want = e(2, 3).scale(&(m * (q() - int(1))));
    assert_eq!(c11.commutator(&c22).unwrap(), want);
}

#[test]
fn inverses() {
    let d = Mat::diag(vec![q() * q(), q(), int(1), int(1)]);
    let want = Mat::diag(vec![q().pow(-2).unwrap(), q().pow(-1).unwrap(), int(1), int(1)]);
    assert_eq!(d.inverse().unwrap(), want);
    let n = &Mat::identity(4) + &e(3, 4);
    assert_eq!(n.inverse().unwrap(), &Mat::identity(4) - &e(3, 4));
    assert_eq!(e(1, 2).inverse(), Err(MatError::Singular));
}

#[test]
fn kronecker_products() {
    let i2 = Mat::identity(2);
    assert!(Mat::kron(&i2, &i2).is_identity());
    assert_eq!(Mat::kron(&e2(1, 2), &e2(1, 1)), e(1, 3));
    let upper = [e2(1, 1), e2(1, 2), e2(2, 2)];
    let mut prods = Vec::new();
    for a in &upper {
        for b in &upper {
            prods.push(Mat::kron(a, b));
        }
    }
    assert_eq!(span(&prods, 4).rank(), 9);
}

#[test]
fn rref_ranks() {
    let v = mat("e(1,1) + q*e(2,3)", &ParamEnv::new()).vectorize();
    let v2: Vec<Scalar> = v.iter().map(|x| x * &int(2)).collect();
    assert_eq!(rref(&[v, v2], 16).rank(), 1);

    let units: Vec<_> = (1..=4).flat_map(|i| (1..=4).map(move |j| e(i, j).vectorize())).collect();
    let b = rref(&units, 16);
    assert_eq!(b.rank(), 16);
    assert_eq!(b.pivots(), (0..16).collect::<Vec<_>>().as_slice());
}

#[test]
fn upper_triangular_pairs_span_nine() {
    let upper = [e2(1, 1), e2(1, 2), e2(2, 2)];
    let rows: Vec<_> = upper.iter().flat_map(|a| upper.iter().map(move |b| Mat::kron(a, b).vectorize())).collect();
    assert_eq!(rref(&rows, 16).rank(), 9);
    // Oracle: brute-force elimination over plain rationals.
    let q0 = r(3, 1);
    let plain: Vec<_> =
        upper.iter().flat_map(|a| upper.iter().map(|b| common::flat(&specialize(&Mat::kron(a, b), &q0)))).collect();
    assert_eq!(rank(&plain), 9);
}

#[test]
fn vectorization_is_row_major_and_invertible() {
    let m = mat("e(1,2) + q*e(3,1)", &ParamEnv::new());
    let v = m.vectorize();
    assert_eq!(v.len(), 16);
    assert!(v[1].is_one());
    assert_eq!(v[8], q());
    assert_eq!(Mat::unvectorize(&v).unwrap(), m);
    assert_eq!(Mat::unvectorize(&v[..15]), Err(MatError::NotSquare(15)));
}

#[test]
fn basis_membership_and_nullspace() {
    let rows = vec![e(1, 1).vectorize(), (&e(1, 1) + &e(2, 2)).vectorize()];
    let mut b = rref(&rows, 16);
    assert!(b.contains(&e(2, 2).vectorize()));
    assert!(!b.contains(&e(3, 3).vectorize()));
    assert!(b.insert(&e(3, 3).vectorize()));
    assert!(!b.insert(&e(3, 3).vectorize()));
    assert_eq!(b.rank(), 3);
    assert_eq!(b.nullspace().rank(), 13);
    assert!(rref(&rows, 16).is_subspace_of(&b));
}
