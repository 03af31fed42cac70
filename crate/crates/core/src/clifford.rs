//! Gamma matrices for signature (1,3) and the rank-16 certificate that
//! their products span all 4×4 matrices.

use crate::error::CliffordError;
use crate::matd::{rref, Basis, Mat, VecK};
use crate::scalar::Scalar;

/// Metric diag(1, −1, −1, −1).
pub const METRIC: [i64; 4] = [1, -1, -1, -1];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GammaSet {
    pub gammas: [Mat; 4],
}

fn block(entries: [[Scalar; 4]; 4]) -> Mat {
    Mat::from_rows(entries.into_iter().map(|r| r.to_vec()).collect()).expect("4x4")
}

/// Dirac representation: γ⁰ = diag(1,1,−1,−1), γᵏ = [[0, σₖ], [−σₖ, 0]].
pub fn build_dirac() -> GammaSet {
    let z = Scalar::zero;
    let o = Scalar::one;
    let m = || Scalar::from_int(-1);
    let i = Scalar::i;
    let mi = || -&Scalar::i();
    let g0 = Mat::diag(vec![o(), o(), m(), m()]);
    let g1 = block([[z(), z(), z(), o()], [z(), z(), o(), z()], [z(), m(), z(), z()], [m(), z(), z(), z()]]);
    let g2 = block([[z(), z(), z(), mi()], [z(), z(), i(), z()], [z(), i(), z(), z()], [mi(), z(), z(), z()]]);
    let g3 = block([[z(), z(), o(), z()], [z(), z(), z(), m()], [m(), z(), z(), z()], [z(), o(), z(), z()]]);
    GammaSet { gammas: [g0, g1, g2, g3] }
}

/// {a, b} = ab + ba.
pub fn anticommutator(a: &Mat, b: &Mat) -> Mat {
    &(a * b) + &(b * a)
}

/// True iff {γμ, γν} = 2ημν·I for all 10 unordered pairs.
pub fn check_anticommutation(g: &GammaSet) -> bool {
    let id = Mat::identity(4);
    (0..4).all(|mu| {
        (mu..4).all(|nu| {
            let eta = if mu == nu { METRIC[mu] } else { 0 };
            anticommutator(&g.gammas[mu], &g.gammas[nu]) == id.scale(&Scalar::from_int(2 * eta))
        })
    })
}

/// The 16 ordered products γ^S for subsets S of {0,1,2,3}, in order of
/// increasing size then lexicographic.
pub fn canonical_products(g: &GammaSet) -> Vec<(Vec<usize>, Mat)> {
    let mut subsets: Vec<Vec<usize>> = (0u32..16).map(|m| (0..4).filter(|k| m & (1 << k) != 0).collect()).collect();
    subsets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    subsets
        .into_iter()
        .map(|s| {
            let mut p = Mat::identity(4);
            for &k in &s {
                p = &p * &g.gammas[k];
            }
            (s, p)
        })
        .collect()
}

/// RREF of the 16 products; errors unless the set is a Clifford system of
/// full rank.
pub fn clifford_basis(g: &GammaSet) -> Result<Basis, CliffordError> {
    if !check_anticommutation(g) {
        return Err(CliffordError::NotClifford);
    }
    product_span(g)
}

/// RREF of the 16 products without the anticommutation precondition.
pub fn product_span(g: &GammaSet) -> Result<Basis, CliffordError> {
    let rows: Vec<VecK> = canonical_products(g).iter().map(|(_, m)| m.vectorize()).collect();
    let b = rref(&rows, 16);
    if b.rank() < 16 {
        return Err(CliffordError::Degenerate(b.rank()));
    }
    Ok(b)
}

/// Coordinates of `target` in the product basis, by solving the 16×16 system.
pub fn expand_in_products(g: &GammaSet, target: &Mat) -> Option<Vec<Scalar>> {
    let prods = canonical_products(g);
    let cols: Vec<VecK> = prods.iter().map(|(_, m)| m.vectorize()).collect();
    // Rows of the transpose: A x = vec(target) with A's columns the products.
    let mut a = Mat::zeros(16);
    for (j, c) in cols.iter().enumerate() {
        for (i, v) in c.iter().enumerate() {
            a.set(i, j, v.clone());
        }
    }
    let inv = a.inverse().ok()?;
    let t = target.vectorize();
    Some(
        (0..16)
            .map(|i| {
                (0..16).fold(Scalar::zero(), |acc, k| {
                    let x = inv.get(i, k);
                    if x.is_zero() || t[k].is_zero() {
                        acc
                    } else {
                        &acc + &(x * &t[k])
                    }
                })
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn squares_follow_the_metric() {
        let g = build_dirac();
        let id = Mat::identity(4);
        assert_eq!(&g.gammas[0] * &g.gammas[0], id);
        for k in 1..4 {
            assert_eq!(&g.gammas[k] * &g.gammas[k], -&id);
        }
        assert!(anticommutator(&g.gammas[1], &g.gammas[2]).is_zero());
        assert_eq!(anticommutator(&g.gammas[0], &g.gammas[0]), id.scale(&Scalar::from_int(2)));
    }

    #[test]
    fn dirac_set_is_clifford() {
        let g = build_dirac();
        assert!(check_anticommutation(&g));
        assert_eq!(clifford_basis(&g).unwrap().rank(), 16);
    }

    #[test]
    fn broken_sets_fail() {
        let mut g = build_dirac();
        g.gammas[1] = g.gammas[0].clone();
        assert!(!check_anticommutation(&g));
        let mut g = build_dirac();
        g.gammas[1] = g.gammas[1].scale(&Scalar::from_int(2));
        assert!(!check_anticommutation(&g));
        let mut g = build_dirac();
        g.gammas[3] = g.gammas[2].clone();
        assert_eq!(clifford_basis(&g), Err(CliffordError::NotClifford));
        assert!(matches!(product_span(&g), Err(CliffordError::Degenerate(r)) if r < 16));
    }

    #[test]
    fn units_expand_exactly() {
        let g = build_dirac();
        let prods = canonical_products(&g);
        for i in 1..=4 {
            for j in 1..=4 {
                let e = Mat::unit(4, i, j).unwrap();
                let c = expand_in_products(&g, &e).unwrap();
                let mut acc = Mat::zeros(4);
                for (x, (_, p)) in c.iter().zip(&prods) {
                    acc = &acc + &p.scale(x);
                }
                assert_eq!(acc, e);
            }
        }
    }
}
