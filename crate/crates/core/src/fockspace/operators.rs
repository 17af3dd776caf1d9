use crate::diag::{Diagnosed, Diagnostic};
use crate::linalg::expm_hermitian;
use crate::{CMatrix, C64};

use super::{Electronic, HilbertConfig, Mode};

/// Truncated single-mode annihilation operator, `a|n⟩ = √n |n−1⟩`.
pub fn annihilation(n_max: usize) -> CMatrix {
    let d = n_max + 1;
    CMatrix::from_fn(d, d, |i, j| {
        if j == i + 1 {
            C64::new((j as f64).sqrt(), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// `S₊` of ion `ion` (1 or 2) on the 4-dimensional electronic space.
pub fn electronic_raising(ion: usize) -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    for e in Electronic::ALL {
        if !e.is_up(ion) {
            let up = e as usize | if ion == 1 { 2 } else { 1 };
            m[(up, e as usize)] = C64::new(1.0, 0.0);
        }
    }
    m
}

pub fn electronic_lowering(ion: usize) -> CMatrix {
    electronic_raising(ion).adjoint()
}

/// Ladder and number operators of both modes, as dense matrices on the joint
/// space. Intended for small configurations; the Hamiltonian builders never
/// materialize these.
#[derive(Debug, Clone)]
pub struct ModeOperators {
    pub a: CMatrix,
    pub a_dag: CMatrix,
    pub n_c: CMatrix,
    pub b: CMatrix,
    pub b_dag: CMatrix,
    pub n_r: CMatrix,
}

pub fn mode_operators(config: HilbertConfig) -> ModeOperators {
    let id_e = CMatrix::identity(4, 4);
    let id_c = CMatrix::identity(config.n_max_c + 1, config.n_max_c + 1);
    let id_r = CMatrix::identity(config.n_max_r + 1, config.n_max_r + 1);
    let a1 = annihilation(config.n_max_c);
    let b1 = annihilation(config.n_max_r);
    let a = id_e.kronecker(&a1.kronecker(&id_r));
    let b = id_e.kronecker(&id_c.kronecker(&b1));
    let a_dag = a.adjoint();
    let b_dag = b.adjoint();
    let n_c = &a_dag * &a;
    let n_r = &b_dag * &b;
    ModeOperators { a, a_dag, n_c, b, b_dag, n_r }
}

/// Displacement `D(α) = exp(α a† − α* a)` on the truncated space of one mode,
/// computed as `exp(−iK)` with the Hermitian generator `K = i(α a† − α* a)`.
///
/// Raises a diagnostic when `|α|² > n_max/4`.
pub fn displacement(alpha: C64, mode: Mode, config: HilbertConfig) -> Diagnosed<CMatrix> {
    let n_max = config.n_max(mode);
    let a = annihilation(n_max);
    let gen = (a.adjoint() * alpha - &a * alpha.conj()) * C64::new(0.0, 1.0);
    let d = expm_hermitian(&gen, 1.0);
    let alpha_sq = alpha.norm_sqr();
    let mut diagnostics = Vec::new();
    if alpha_sq > n_max as f64 / 4.0 {
        diagnostics.push(Diagnostic::DisplacementRange { mode, alpha_sq, n_max });
    }
    Diagnosed::new(d, diagnostics)
}
