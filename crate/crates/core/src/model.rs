//! Two two-level atoms coupled symmetrically to one cavity mode.
//!
//! Basis conventions:
//! - single atom: `|e> = index 0`, `|g> = index 1`, so `σz = diag(1, -1)` and
//!   `σ+ = |e><g|`;
//! - two atoms: `|ee>, |eg>, |ge>, |gg>` at indices 0..3 (atom 1 major);
//! - full system: cavity-major, `|n> ⊗ |atom 1> ⊗ |atom 2>`, index `4n + atomic`.
//!
//! The Hamiltonian is represented in the frame rotating with the cavity
//! frequency, `H = Δ Σ σ+σ- + g Σ (a σ+ + a† σ-)`. The dropped term `ω N`
//! commutes with everything here and only shifts each excitation sector by a
//! phase, which never enters the reduced two-atom dynamics.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::linalg::{tensor_all, ComplexMatrix, C64};

pub const EE: usize = 0;
pub const EG: usize = 1;
pub const GE: usize = 2;
pub const GG: usize = 3;

/// Index of `|n, atomic>` in the full space.
#[inline]
pub fn full_index(n: usize, atomic: usize) -> usize {
    4 * n + atomic
}

/// `|B+> = (|eg> + |ge>)/√2` in the atomic basis.
pub fn bell_plus() -> [C64; 4] {
    let s = C64::new(FRAC_1_SQRT_2, 0.0);
    [C64::new(0.0, 0.0), s, s, C64::new(0.0, 0.0)]
}

/// `|B-> = (|eg> − |ge>)/√2` in the atomic basis.
pub fn bell_minus() -> [C64; 4] {
    let s = C64::new(FRAC_1_SQRT_2, 0.0);
    [C64::new(0.0, 0.0), s, -s, C64::new(0.0, 0.0)]
}

/// Computational basis vector of the two-atom space.
pub fn atomic_ket(index: usize) -> [C64; 4] {
    let mut v = [C64::new(0.0, 0.0); 4];
    v[index] = C64::new(1.0, 0.0);
    v
}

/// Physical parameters. Rates are in the same units as `g`; `gamma` has units
/// of time (it multiplies `H²` in the dephasing term).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    g: f64,
    delta: f64,
    lambda: f64,
    gamma: f64,
    n_max: usize,
}

impl SystemParams {
    pub fn new(g: f64, delta: f64, lambda: f64, gamma: f64) -> Result<Self> {
        let p = Self { g, delta, lambda, gamma, n_max: 1 };
        p.validate()?;
        Ok(p)
    }

    /// Parameters in units of `g = 1`: `delta` is Δ/g and `gamma` is γ·g.
    pub fn scaled(delta_over_g: f64, lambda: f64, gamma_times_g: f64) -> Result<Self> {
        Self::new(1.0, delta_over_g, lambda, gamma_times_g)
    }

    pub fn with_n_max(mut self, n_max: usize) -> Result<Self> {
        self.n_max = n_max;
        self.validate()?;
        Ok(self)
    }

    pub fn with_gamma(mut self, gamma: f64) -> Result<Self> {
        self.gamma = gamma;
        self.validate()?;
        Ok(self)
    }

    pub fn with_lambda(mut self, lambda: f64) -> Result<Self> {
        self.lambda = lambda;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.g.is_finite() && self.g > 0.0) {
            return bad(format!("coupling g must be positive and finite, got {}", self.g));
        }
        if !self.delta.is_finite() {
            return bad(format!("detuning must be finite, got {}", self.delta));
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return bad(format!("lambda must lie in [0, 1], got {}", self.lambda));
        }
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return bad(format!("gamma must be non-negative and finite, got {}", self.gamma));
        }
        if self.n_max < 1 {
            return bad("cavity cutoff n_max must be at least 1".into());
        }
        Ok(())
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Generalized Rabi frequency `Ω = sqrt(Δ² + 8g²)`.
    pub fn omega(&self) -> f64 {
        (self.delta * self.delta + 8.0 * self.g * self.g).sqrt()
    }

    /// Full Hilbert-space dimension, `4 (n_max + 1)`.
    pub fn full_dim(&self) -> usize {
        4 * (self.n_max + 1)
    }

    /// Converts scaled time `gt` into time.
    #[inline]
    pub fn time(&self, gt: f64) -> f64 {
        gt / self.g
    }
}

/// Cavity annihilation operator truncated at `n_max` photons.
pub fn annihilation(n_max: usize) -> ComplexMatrix {
    let mut a = ComplexMatrix::zeros(n_max + 1);
    for n in 1..=n_max {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    a
}

/// `σ+ = |e><g|`.
pub fn sigma_plus() -> ComplexMatrix {
    let mut s = ComplexMatrix::zeros(2);
    s[(0, 1)] = C64::new(1.0, 0.0);
    s
}

pub fn sigma_minus() -> ComplexMatrix {
    sigma_plus().adjoint()
}

fn excited_projector() -> ComplexMatrix {
    ComplexMatrix::from_real_diag(&[1.0, 0.0])
}

pub fn hamiltonian(p: &SystemParams) -> ComplexMatrix {
    let nc = p.n_max + 1;
    let ic = ComplexMatrix::identity(nc);
    let i2 = ComplexMatrix::identity(2);
    let a = annihilation(p.n_max);
    let ad = a.adjoint();
    let sp = sigma_plus();
    let sm = sigma_minus();
    let pe = excited_projector();

    let detuning = &tensor_all(&[&ic, &pe, &i2]) + &tensor_all(&[&ic, &i2, &pe]);
    let absorb = &tensor_all(&[&a, &sp, &i2]) + &tensor_all(&[&a, &i2, &sp]);
    let emit = &tensor_all(&[&ad, &sm, &i2]) + &tensor_all(&[&ad, &i2, &sm]);
    let coupling = &absorb + &emit;
    &detuning.scale_real(p.delta) + &coupling.scale_real(p.g)
}

/// `ρ(0) = |0><0| ⊗ (λ|e><e| + (1−λ)|g><g|) ⊗ |g><g|`.
pub fn initial_state(p: &SystemParams) -> ComplexMatrix {
    let mut rho = ComplexMatrix::zeros(p.full_dim());
    rho[(full_index(0, EG), full_index(0, EG))] = C64::new(p.lambda, 0.0);
    rho[(full_index(0, GG), full_index(0, GG))] = C64::new(1.0 - p.lambda, 0.0);
    rho
}

/// Total excitation number `a†a + Σ σ+σ-`.
pub fn excitation_number(p: &SystemParams) -> ComplexMatrix {
    let nc = p.n_max + 1;
    let ic = ComplexMatrix::identity(nc);
    let i2 = ComplexMatrix::identity(2);
    let a = annihilation(p.n_max);
    let number = &a.adjoint() * &a;
    let pe = excited_projector();
    let cavity = tensor_all(&[&number, &i2, &i2]);
    let atoms = &tensor_all(&[&ic, &pe, &i2]) + &tensor_all(&[&ic, &i2, &pe]);
    &cavity + &atoms
}

/// Full-space indices spanning the sector reachable from the initial state:
/// `|0,gg>, |0,eg>, |0,ge>, |1,gg>`.
pub fn reachable_subspace() -> [usize; 4] {
    [full_index(0, GG), full_index(0, EG), full_index(0, GE), full_index(1, GG)]
}

/// Population outside [`reachable_subspace`].
pub fn leakage(rho: &ComplexMatrix) -> f64 {
    let inside: f64 = reachable_subspace().iter().map(|&i| rho[(i, i)].re).sum();
    (rho.trace().re - inside).abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(delta: f64, lambda: f64) -> SystemParams {
        SystemParams::new(1.3, delta, lambda, 0.0).unwrap()
    }

    #[test]
    fn validation() {
        assert!(SystemParams::new(0.0, 0.0, 1.0, 0.0).is_err());
        assert!(SystemParams::new(1.0, 0.0, 1.5, 0.0).is_err());
        assert!(SystemParams::new(1.0, 0.0, -0.1, 0.0).is_err());
        assert!(SystemParams::new(1.0, 0.0, 1.0, -1e-3).is_err());
        assert!(SystemParams::new(1.0, f64::NAN, 1.0, 0.0).is_err());
        assert!(SystemParams::new(1.0, 0.0, 1.0, 0.0).unwrap().with_n_max(0).is_err());
        let p = SystemParams::scaled(1.0, 0.5, 0.01).unwrap();
        assert_eq!(p.omega(), 3.0);
    }

    #[test]
    fn coupling_matrix_element() {
        let p = params(0.7, 1.0);
        let h = hamiltonian(&p);
        assert_eq!(h[(full_index(0, EG), full_index(1, GG))].re, p.g());
        assert_eq!(h[(full_index(0, GE), full_index(1, GG))].re, p.g());
        assert_eq!(h[(full_index(0, EG), full_index(0, EG))].re, p.delta());
        assert_eq!(h[(full_index(0, EE), full_index(0, EE))].re, 2.0 * p.delta());
    }

    #[test]
    fn hamiltonian_is_exactly_hermitian_and_conserves_excitations() {
        for n_max in 1..=3 {
            let p = params(-0.4, 1.0).with_n_max(n_max).unwrap();
            let h = hamiltonian(&p);
            assert_eq!(h.hermiticity_error(), 0.0);
            let comm = h.commutator(&excitation_number(&p)).unwrap();
            assert!(comm.max_abs() <= 1e-12 * p.g());
        }
    }

    #[test]
    fn initial_state_cases() {
        let p1 = params(0.0, 1.0);
        let rho = initial_state(&p1);
        let mut pure = ComplexMatrix::zeros(8);
        pure[(full_index(0, EG), full_index(0, EG))] = C64::new(1.0, 0.0);
        assert_eq!(rho, pure);

        let rho0 = initial_state(&params(0.0, 0.0));
        assert_eq!(rho0[(full_index(0, GG), full_index(0, GG))].re, 1.0);
        assert_eq!(rho0.trace().re, 1.0);

        let half = initial_state(&params(0.0, 0.5));
        let diag: Vec<f64> = half.diag().iter().map(|z| z.re).collect();
        assert_eq!(diag.iter().filter(|&&d| d == 0.5).count(), 2);
        assert_eq!(half.trace().re, 1.0);
    }

    #[test]
    fn excitation_number_entries() {
        let p = params(0.0, 0.3);
        let n = excitation_number(&p);
        assert_eq!(n[(full_index(0, GG), full_index(0, GG))].re, 0.0);
        assert_eq!(n[(full_index(1, EG), full_index(1, EG))].re, 2.0);
        assert_eq!(n[(full_index(1, EE), full_index(1, EE))].re, 3.0);
        let mean = (&n * &initial_state(&p)).trace().re;
        assert!((mean - 0.3).abs() < 1e-15);
    }

    #[test]
    fn bell_state_vectors() {
        let bp = bell_plus();
        let bm = bell_minus();
        assert_eq!(bp[EG], bp[GE]);
        assert_eq!(bm[EG], -bm[GE]);
        assert_eq!(bp[EE].norm() + bp[GG].norm(), 0.0);
        let overlap: C64 = bp.iter().zip(&bm).map(|(a, b)| a.conj() * b).sum();
        assert!(overlap.norm() < 1e-16);
    }
}
