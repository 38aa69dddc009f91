//! Closed-form dynamics of the two-atom system started from
//! `|0> ⊗ (λ|e><e| + (1−λ)|g><g|) ⊗ |g>`.
//!
//! The published density-matrix expansions end in "+ h.c.". They are read as
//! `ρ = X + X†` over the whole term list, which doubles the diagonal terms.
//! That is the only reading with unit trace at `t = 0`; the spectral solver in
//! [`crate::evolution`] confirms it term by term.
//!
//! Every function takes the scaled time `gt`; division by `g` happens once,
//! through [`SystemParams::time`].

use crate::error::{Error, Result};
use crate::linalg::{herm_eig, ComplexMatrix, C64};
use crate::model::{bell_minus, bell_plus, full_index, SystemParams, GG};

/// Tolerances accepted by [`TwoQubitState::new`].
pub const STATE_HERMITIAN_TOL: f64 = 1e-10;
pub const STATE_TRACE_TOL: f64 = 1e-10;
pub const STATE_MIN_EIGENVALUE: f64 = -1e-9;

/// A validated two-atom density matrix in the `|ee>, |eg>, |ge>, |gg>` basis.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitState {
    matrix: ComplexMatrix,
}

impl TwoQubitState {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if matrix.dim() != 4 {
            return Err(Error::InvalidState(format!("expected 4x4 matrix, got {0}x{0}", matrix.dim())));
        }
        let herm = matrix.hermiticity_error();
        if herm > STATE_HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (error {herm:e})")));
        }
        let tr = matrix.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > STATE_TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min_eig = *herm_eig(&matrix)?.values.last().unwrap();
        if min_eig < STATE_MIN_EIGENVALUE {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_eig:e}")));
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// The maximally mixed state `I/4`.
    pub fn maximally_mixed() -> Self {
        Self { matrix: ComplexMatrix::identity(4).scale_real(0.25) }
    }

    /// `|ψ><ψ|` for a normalized vector.
    pub fn pure(psi: &[C64; 4]) -> Result<Self> {
        Self::new(ComplexMatrix::outer(psi))
    }
}

/// Scalar ingredients of the closed-form concurrence and Bell expressions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormTerms {
    pub a: f64,
    pub b: f64,
    pub a_gamma: f64,
    pub b_gamma: f64,
    /// ς
    pub sigma_var: f64,
    /// ζ
    pub zeta: f64,
}

pub fn closed_form_terms(p: &SystemParams, gt: f64) -> ClosedFormTerms {
    let t = p.time(gt);
    let (g, d, w, gamma) = (p.g(), p.delta(), p.omega(), p.gamma());
    let r = d / w;
    let r2 = r * r;
    let cos_wt = (w * t).cos();
    let sin_sum = ((w + d) * t / 2.0).sin();
    let sin_diff = ((w - d) * t / 2.0).sin();

    let a = r2 / 4.0 - 0.25 + 0.25 * (1.0 - r2) * cos_wt;
    let b = 0.5 * (1.0 - r) * sin_sum - 0.5 * (1.0 + r) * sin_diff;

    let damp_w = (-gamma * t * w * w / 2.0).exp();
    let damp_sum = (-gamma * t * (w + d).powi(2) / 8.0).exp();
    let damp_diff = (-gamma * t * (w - d).powi(2) / 8.0).exp();
    let a_gamma = r2 / 4.0 - 0.25 + 0.25 * (1.0 - r2) * cos_wt * damp_w;
    let b_gamma = 0.5 * (1.0 - r) * sin_sum * damp_sum - 0.5 * (1.0 + r) * sin_diff * damp_diff;

    let g2w2 = g * g / (w * w);
    let sigma_var = 4.0 * g2w2 * g2w2 * (1.0 - cos_wt).powi(2)
        + 0.25 * ((1.0 - r) * sin_sum - (1.0 + r) * sin_diff).powi(2);
    let zeta = ((d * d + 4.0 * g * g) / (w * w) + 4.0 * g2w2 * cos_wt).powi(2);

    ClosedFormTerms { a, b, a_gamma, b_gamma, sigma_var, zeta }
}

fn check_time(gt: f64) -> Result<()> {
    if gt.is_finite() && gt >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("scaled time must be finite and non-negative, got {gt}")))
    }
}

/// Coefficients of the reduced state in the `{B+, B-, gg}` frame.
///
/// `damped` applies the dephasing factors for the rate `p.gamma()`; with
/// `gamma = 0` both variants coincide.
struct ReducedTerms {
    /// Half of the `|B+><B+|` weight (the printed coefficient before closure).
    bp: f64,
    /// Half of the `|B-><B-|` weight.
    bm: f64,
    /// Half of the `|gg><gg|` weight.
    gg: f64,
    /// `|B+><B-|` coefficient (off-diagonal, not doubled).
    cross: C64,
}

fn reduced_terms(p: &SystemParams, gt: f64, damped: bool) -> ReducedTerms {
    let t = p.time(gt);
    let (g, d, w, lam) = (p.g(), p.delta(), p.omega(), p.lambda());
    let gamma = if damped { p.gamma() } else { 0.0 };
    let r = d / w;
    let damp_w = (-gamma * t * w * w / 2.0).exp();
    let damp_sum = (-gamma * t * (w + d).powi(2) / 8.0).exp();
    let damp_diff = (-gamma * t * (w - d).powi(2) / 8.0).exp();
    let cos_wt = (w * t).cos() * damp_w;

    let bp = lam / 8.0 * (1.0 + r * r + (1.0 - r * r) * cos_wt);
    let bm = lam / 4.0;
    // Population of |1,gg> before closure, g²λ/Ω² (1 − cos Ωt), with the same damping.
    let photon = g * g * lam / (w * w) * (1.0 - cos_wt);
    let gg = photon + (1.0 - lam) / 2.0;
    let cross = (C64::from_polar(1.0, (w + d) * t / 2.0) * ((1.0 - r) * damp_sum)
        + C64::from_polar(1.0, -(w - d) * t / 2.0) * ((1.0 + r) * damp_diff))
        * (lam / 4.0);
    ReducedTerms { bp, bm, gg, cross }
}

fn assemble_reduced(terms: &ReducedTerms) -> ComplexMatrix {
    let bp = bell_plus();
    let bm = bell_minus();
    let mut gg = [C64::new(0.0, 0.0); 4];
    gg[GG] = C64::new(1.0, 0.0);

    let mut x = ComplexMatrix::outer(&bp).scale_real(terms.bp);
    x = &x + &ComplexMatrix::outer(&bm).scale_real(terms.bm);
    x = &x + &ComplexMatrix::outer(&gg).scale_real(terms.gg);
    x = &x + &ComplexMatrix::outer_pair(&bp, &bm).scale(terms.cross);
    &x + &x.adjoint()
}

/// Reduced two-atom state at scaled time `gt` (unitary dynamics).
pub fn rho_s_analytic(p: &SystemParams, gt: f64) -> Result<TwoQubitState> {
    check_time(gt)?;
    TwoQubitState::new(assemble_reduced(&reduced_terms(p, gt, false)))
}

/// Reduced two-atom state under phase decoherence at rate `p.gamma()`.
///
/// Coherences between Hamiltonian eigenstates with energy gap `ω` decay as
/// `exp(−γ ω² t / 2)`; applied to the three dressed levels of the
/// single-excitation sector this damps the `cos Ωt` part of the populations
/// and each frequency component of the `|B+><B-|` coherence separately.
pub fn rho_s_dephased(p: &SystemParams, gt: f64) -> Result<TwoQubitState> {
    check_time(gt)?;
    TwoQubitState::new(assemble_reduced(&reduced_terms(p, gt, true)))
}

/// Full cavity-plus-atoms state at scaled time `gt` (unitary dynamics), in a
/// space with cutoff `p.n_max()`.
pub fn rho_full_analytic(p: &SystemParams, gt: f64) -> Result<ComplexMatrix> {
    check_time(gt)?;
    let t = p.time(gt);
    let (g, d, w, lam) = (p.g(), p.delta(), p.omega(), p.lambda());
    let r = d / w;
    let cos_wt = (w * t).cos();
    let sin_wt = (w * t).sin();
    let dim = p.full_dim();
    let terms = reduced_terms(p, gt, false);

    let bp = bell_plus();
    let bm = bell_minus();
    // Embeds an atomic-space operator |u><v| into |n><m| ⊗ |u><v|.
    let embed = |x: &mut ComplexMatrix, n: usize, m: usize, u: &[C64; 4], v: &[C64; 4], coeff: C64| {
        for i in 0..4 {
            for j in 0..4 {
                x[(full_index(n, i), full_index(m, j))] += coeff * u[i] * v[j].conj();
            }
        }
    };
    let mut gg = [C64::new(0.0, 0.0); 4];
    gg[GG] = C64::new(1.0, 0.0);

    let mut x = ComplexMatrix::zeros(dim);
    let real = |v: f64| C64::new(v, 0.0);
    embed(&mut x, 0, 0, &bp, &bp, real(terms.bp));
    embed(&mut x, 1, 1, &gg, &gg, real(g * g * lam / (w * w) * (1.0 - cos_wt)));
    embed(&mut x, 0, 0, &bm, &bm, real(terms.bm));
    let pref = std::f64::consts::SQRT_2 * g * lam / (2.0 * w);
    embed(&mut x, 0, 1, &bp, &gg, C64::new(r * (1.0 - cos_wt), sin_wt) * pref);
    let phase = C64::from_polar(1.0, (w - d) * t / 2.0) - C64::from_polar(1.0, (-w - d) * t / 2.0);
    embed(&mut x, 0, 1, &bm, &gg, phase * pref);
    embed(&mut x, 0, 0, &bp, &bm, terms.cross);
    embed(&mut x, 0, 0, &gg, &gg, real((1.0 - lam) / 2.0));
    Ok(&x + &x.adjoint())
}

/// Concurrence `λ sqrt(A² + B²)` of the reduced state.
pub fn concurrence_closed(p: &SystemParams, gt: f64) -> Result<f64> {
    check_time(gt)?;
    let c = closed_form_terms(p, gt);
    Ok(p.lambda() * c.a.hypot(c.b))
}

/// Concurrence `λ sqrt(A_γ² + B_γ²)` under phase decoherence.
pub fn concurrence_dephased(p: &SystemParams, gt: f64) -> Result<f64> {
    check_time(gt)?;
    let c = closed_form_terms(p, gt);
    Ok(p.lambda() * c.a_gamma.hypot(c.b_gamma))
}

fn require_full_excitation(p: &SystemParams) -> Result<()> {
    if (p.lambda() - 1.0).abs() > 1e-12 {
        Err(Error::RequiresPureExcitation(p.lambda()))
    } else {
        Ok(())
    }
}

/// `(ς, ζ)`, with `κ + κ̃ = ς + max(ς, ζ)`; only stated for `λ = 1`.
pub fn sigma_zeta(p: &SystemParams, gt: f64) -> Result<(f64, f64)> {
    require_full_excitation(p)?;
    check_time(gt)?;
    let c = closed_form_terms(p, gt);
    Ok((c.sigma_var, c.zeta))
}

/// Maximal CHSH violation `2 sqrt(ς + max(ς, ζ))`; only stated for `λ = 1`.
pub fn bell_max_closed(p: &SystemParams, gt: f64) -> Result<f64> {
    let (s, z) = sigma_zeta(p, gt)?;
    Ok(2.0 * (s + s.max(z)).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Recurrence {
    pub k: u64,
    /// Scaled time `g t_k = 2kπ g/Ω`.
    pub gt: f64,
    /// `|sin(Δkπ/Ω)|`.
    pub concurrence: f64,
}

/// Pure-state concurrences reached at `t_k = 2kπ/Ω` for `λ = 1`, `k = 1..=k_max`.
pub fn recurrence_concurrences(p: &SystemParams, k_max: u64) -> Result<Vec<Recurrence>> {
    if k_max < 1 {
        return Err(Error::InvalidParameter("k_max must be at least 1".into()));
    }
    let w = p.omega();
    let ratio = p.delta() / w;
    Ok((1..=k_max)
        .map(|k| {
            let kf = k as f64;
            Recurrence {
                k,
                gt: p.g() * 2.0 * kf * std::f64::consts::PI / w,
                concurrence: (ratio * kf * std::f64::consts::PI).sin().abs(),
            }
        })
        .collect())
}

/// Long-time concurrence under dephasing, `2λg²/Ω²`.
pub fn stationary_concurrence(p: &SystemParams) -> Result<f64> {
    if p.gamma() == 0.0 {
        return Err(Error::NoStationaryState);
    }
    let w = p.omega();
    Ok(2.0 * p.lambda() * p.g() * p.g() / (w * w))
}
