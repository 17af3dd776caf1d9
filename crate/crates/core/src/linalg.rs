//! Dense Hermitian helpers shared by the propagators and the displacement
//! operators.

use nalgebra::DVector;

use crate::{CMatrix, CVector, Error, Result, C64};

/// Frobenius norm of `H − H†` together with the norm of `H`.
pub fn hermiticity_defect(h: &CMatrix) -> (f64, f64) {
    (
        (h - h.adjoint()).norm(),
        h.norm(),
    )
}

pub fn ensure_hermitian(h: &CMatrix) -> Result<()> {
    if h.nrows() != h.ncols() {
        return Err(Error::DimensionMismatch { expected: h.nrows(), found: h.ncols() });
    }
    let (deviation, norm) = hermiticity_defect(h);
    if deviation > 1e-10 * norm.max(f64::MIN_POSITIVE) && deviation > 0.0 {
        return Err(Error::NotHermitian { deviation, norm });
    }
    Ok(())
}

/// Eigen-decomposition `H = V diag(E) V†` of a Hermitian matrix.
pub fn eigh(h: &CMatrix) -> (DVector<f64>, CMatrix) {
    let eig = h.clone().symmetric_eigen();
    (eig.eigenvalues, eig.eigenvectors)
}

/// `exp(−i H t)` for Hermitian `H`.
pub fn expm_hermitian(h: &CMatrix, t: f64) -> CMatrix {
    let (e, v) = eigh(h);
    let phases = CVector::from_iterator(e.len(), e.iter().map(|&ev| C64::from_polar(1.0, -ev * t)));
    let mut scaled = v.clone();
    for (mut col, ph) in scaled.column_iter_mut().zip(phases.iter()) {
        col *= *ph;
    }
    scaled * v.adjoint()
}

/// Connected components of the coupling graph of `h` (an edge wherever an
/// off-diagonal entry is non-zero). Components are sorted by smallest index
/// and each component's indices are ascending.
pub fn components(h: &CMatrix) -> Vec<Vec<usize>> {
    let n = h.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for j in 0..n {
        for i in 0..n {
            if i != j && h[(i, j)] != C64::new(0.0, 0.0) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let root = find(&mut parent, i);
        if slot[root] == usize::MAX {
            slot[root] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[root]].push(i);
    }
    groups
}

pub fn submatrix(h: &CMatrix, idx: &[usize]) -> CMatrix {
    CMatrix::from_fn(idx.len(), idx.len(), |i, j| h[(idx[i], idx[j])])
}

/// `exp(−i H dt) ψ` by a Taylor series on the vector, splitting `dt` so each
/// sub-step has `‖H dt‖₁ ≤ 1/2`. Terms are summed until they drop below
/// machine precision relative to `‖ψ‖`.
pub fn expm_apply(h: &CMatrix, dt: f64, psi: &CVector) -> CVector {
    let norm1 = h
        .column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let scale = norm1 * dt.abs();
    let substeps = if scale > 0.5 { (scale / 0.5).ceil() as usize } else { 1 };
    let h_step = dt / substeps as f64;
    let mut out = psi.clone();
    let psi_norm = psi.norm().max(f64::MIN_POSITIVE);
    for _ in 0..substeps {
        let mut term = out.clone();
        let mut acc = out.clone();
        for m in 1..60 {
            term = (h * &term) * C64::new(0.0, -h_step / m as f64);
            acc += &term;
            if term.norm() <= 1e-17 * psi_norm {
                break;
            }
        }
        out = acc;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_hermitian(n: usize, seed: u64) -> CMatrix {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let a = CMatrix::from_fn(n, n, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        (&a + a.adjoint()) * C64::new(0.5, 0.0)
    }

    #[test]
    fn expm_is_unitary_and_matches_taylor() {
        let h = random_hermitian(12, 3);
        let u = expm_hermitian(&h, 0.7);
        let id = CMatrix::identity(12, 12);
        assert!((&u * u.adjoint() - &id).norm() < 1e-12);

        let psi = CVector::from_fn(12, |i, _| C64::new(i as f64, 1.0)).normalize();
        let a = &u * &psi;
        let b = expm_apply(&h, 0.7, &psi);
        assert!((a - b).norm() < 1e-12);
    }

    #[test]
    fn components_split_block_diagonal() {
        let mut h = CMatrix::zeros(5, 5);
        h[(0, 3)] = C64::new(1.0, 0.0);
        h[(3, 0)] = C64::new(1.0, 0.0);
        h[(1, 4)] = C64::new(0.0, 1.0);
        h[(4, 1)] = C64::new(0.0, -1.0);
        h[(2, 2)] = C64::new(2.0, 0.0);
        assert_eq!(components(&h), vec![vec![0, 3], vec![1, 4], vec![2]]);
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut h = CMatrix::zeros(2, 2);
        h[(0, 1)] = C64::new(1.0, 0.0);
        assert!(matches!(ensure_hermitian(&h), Err(Error::NotHermitian { .. })));
    }
}
