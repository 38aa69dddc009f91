//! Entanglement, mixedness and Bell-violation functionals of two-qubit states.

use crate::analytic::TwoQubitState;
use crate::error::Result;
use crate::linalg::{eigvals_general_4x4, herm_eig, pauli, singular_values, tensor, ComplexMatrix};

/// Roundoff-level negative eigenvalues of `ρρ̃` are clipped to zero.
const NEGATIVE_CLIP: f64 = 1e-10;

fn spin_flip_operator() -> ComplexMatrix {
    tensor(&pauli::y(), &pauli::y())
}

/// Spin-flipped state `ρ̃ = (σy⊗σy) ρ* (σy⊗σy)`.
pub fn spin_flip(s: &TwoQubitState) -> ComplexMatrix {
    let yy = spin_flip_operator();
    &(&yy * &s.matrix().conj()) * &yy
}

/// Square roots of the eigenvalues of `ρρ̃`, descending.
///
/// With `ρ = W W†` (`W = V sqrt(D)` from the eigendecomposition), these are
/// the singular values of the symmetric matrix `τ = Wᵀ (σy⊗σy) W`. Working
/// with `τ` keeps roundoff-level zero eigenvalues of `ρρ̃` from turning into
/// `sqrt(ε)`-sized spurious λ's.
pub fn wootters_lambdas(s: &TwoQubitState) -> Result<[f64; 4]> {
    let eig = herm_eig(s.matrix())?;
    let mut w = eig.vectors.clone();
    for (k, &p) in eig.values.iter().enumerate() {
        let root = p.max(0.0).sqrt();
        for i in 0..4 {
            w[(i, k)] *= root;
        }
    }
    let tau = &(&w.transpose() * &spin_flip_operator()) * &w;
    let sv = singular_values(&tau)?;
    Ok([sv[0], sv[1], sv[2], sv[3]])
}

/// The same λ's computed directly from the eigenvalues of the non-Hermitian
/// product `ρρ̃`. Accurate to about `sqrt(ε)` only; kept as a cross-check.
pub fn wootters_lambdas_spectral(s: &TwoQubitState) -> Result<[f64; 4]> {
    let r = s.matrix() * &spin_flip(s);
    let eig = eigvals_general_4x4(&r)?;
    let mut lambdas = [0.0; 4];
    for (l, z) in lambdas.iter_mut().zip(&eig) {
        let re = if z.re < 0.0 && z.re > -NEGATIVE_CLIP { 0.0 } else { z.re };
        *l = re.max(0.0).sqrt();
    }
    lambdas.sort_by(|a, b| b.total_cmp(a));
    Ok(lambdas)
}

/// Wootters concurrence `max(0, λ1 − λ2 − λ3 − λ4)`.
pub fn wootters_concurrence(s: &TwoQubitState) -> Result<f64> {
    let l = wootters_lambdas(s)?;
    Ok((l[0] - l[1] - l[2] - l[3]).clamp(0.0, 1.0))
}

/// `Tr ρ²`.
pub fn purity(s: &TwoQubitState) -> f64 {
    s.matrix().as_slice().iter().map(|z| z.norm_sqr()).sum()
}

/// `M = (4/3)(1 − Tr ρ²)`.
pub fn linear_entropy(s: &TwoQubitState) -> f64 {
    (4.0 / 3.0 * (1.0 - purity(s))).max(0.0)
}

/// `T_nm = Tr(ρ σ_n ⊗ σ_m)` with `σ_1, σ_2, σ_3 = σx, σy, σz`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationMatrix(pub [[f64; 3]; 3]);

impl CorrelationMatrix {
    /// `TᵀT`.
    pub fn gram(&self) -> [[f64; 3]; 3] {
        let t = &self.0;
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = (0..3).map(|k| t[k][i] * t[k][j]).sum();
            }
        }
        out
    }
}

pub fn correlation_matrix(s: &TwoQubitState) -> CorrelationMatrix {
    let paulis = pauli::all();
    let mut t = [[0.0; 3]; 3];
    for (n, sn) in paulis.iter().enumerate() {
        for (m, sm) in paulis.iter().enumerate() {
            t[n][m] = (s.matrix() * &tensor(sn, sm)).trace().re;
        }
    }
    CorrelationMatrix(t)
}

/// `2 sqrt(κ + κ̃)` with `κ, κ̃` the two largest eigenvalues of `TᵀT`.
pub fn bell_max_general(s: &TwoQubitState) -> Result<f64> {
    let gram = correlation_matrix(s).gram();
    let rows: Vec<Vec<f64>> = gram.iter().map(|r| r.to_vec()).collect();
    let eig = herm_eig(&ComplexMatrix::from_real_rows(&rows)?)?;
    Ok(2.0 * (eig.values[0] + eig.values[1]).max(0.0).sqrt())
}

/// Partial transpose on the second qubit.
pub fn partial_transpose(s: &TwoQubitState) -> ComplexMatrix {
    let m = s.matrix();
    let mut out = ComplexMatrix::zeros(4);
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                for d in 0..2 {
                    out[(2 * a + b, 2 * c + d)] = m[(2 * a + d, 2 * c + b)];
                }
            }
        }
    }
    out
}

/// Smallest eigenvalue of the partial transpose; negative iff entangled.
pub fn min_partial_transpose_eigenvalue(s: &TwoQubitState) -> Result<f64> {
    Ok(*herm_eig(&partial_transpose(s))?.values.last().unwrap())
}
