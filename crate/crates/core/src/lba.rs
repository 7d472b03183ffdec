//! Lindblad-based approach for a single system with a nondegenerate
//! spectrum.
//!
//! Jump operators are the off-diagonal dyads `|m⟩⟨n|` of the energy
//! eigenbasis. Their squared amplitudes obey detailed balance,
//! `|ℓ_{m,n}|² = C_{m,n} e^{−β(E_m−E_n)/2}` with `C` symmetric, and the
//! coefficients `C` are the blackbody dipole transition rates. Populations
//! then follow a Pauli master equation `dp/dt = −A p`, and every coherence
//! `ρ_{m,n}` decays independently at the complex rate `μ_{m,n}`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, RMatrix, SparseMatrix};
use crate::model::{DipoleData, EnergySpectrum};

/// Eigenvalues below this fraction of the largest one count as zero.
pub const ZERO_EIGENVALUE_REL_TOL: f64 = 1e-10;

const SERIES_THRESHOLD: f64 = 1e-8;
const LOG_SPACE_THRESHOLD: f64 = 700.0;

/// Symmetric part of the blackbody rate, `|ΔE|³ / (2 sinh(β|ΔE|/2))`.
pub fn symmetric_kernel(abs_gap: f64, beta: f64) -> f64 {
    let a = abs_gap.abs();
    if a == 0.0 {
        return 0.0;
    }
    let x = beta * a;
    if x < SERIES_THRESHOLD {
        // a³ (1/x − x/24 + 7x³/5760)
        a * a * a * (1.0 / x - x / 24.0 + 7.0 * x * x * x / 5760.0)
    } else if x > LOG_SPACE_THRESHOLD {
        (3.0 * a.ln() - 0.5 * x - (-(-x).exp()).ln_1p()).exp()
    } else {
        a * a * a / (2.0 * (0.5 * x).sinh())
    }
}

/// Transition weight `W̃_{m,k} = |E_m−E_k|³ e^{−β(E_m−E_k)/2} / (2 sinh(β|E_m−E_k|/2))`
/// for the jump `k → m`, given `gap = E_m − E_k`.
///
/// Downward jumps (`gap < 0`) carry the `n̄ + 1` emission factor, upward jumps
/// the `n̄` absorption factor.
pub fn spectral_weight(gap: f64, beta: f64) -> f64 {
    let a = gap.abs();
    if a == 0.0 {
        return 0.0;
    }
    let x = beta * a;
    let cube = a * a * a;
    if x < SERIES_THRESHOLD {
        return symmetric_kernel(a, beta) * (-0.5 * beta * gap).exp();
    }
    if gap < 0.0 {
        cube / -(-x).exp_m1()
    } else if x > LOG_SPACE_THRESHOLD {
        (3.0 * a.ln() - x).exp()
    } else {
        cube / x.exp_m1()
    }
}

/// Detailed-balance rates of the Lindblad jump operators.
#[derive(Debug, Clone, PartialEq)]
pub struct RateData {
    beta: f64,
    coupling: RMatrix,
    rates: RMatrix,
    escape: Vec<f64>,
}

impl RateData {
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Symmetric coefficients `C_{m,n}`.
    pub fn coupling(&self) -> &RMatrix {
        &self.coupling
    }

    /// `|ℓ_{m,n}|²`, the rate of the jump `n → m`.
    pub fn rates(&self) -> &RMatrix {
        &self.rates
    }

    /// Escape rates `B_m = Σ_j |ℓ_{j,m}|²`.
    pub fn escape(&self) -> &[f64] {
        &self.escape
    }

    pub fn dim(&self) -> usize {
        self.escape.len()
    }
}

/// Blackbody dipole rates for a nondegenerate spectrum at inverse
/// temperature `beta`.
pub fn thermal_rates(spec: &EnergySpectrum, dip: &DipoleData, beta: f64) -> Result<RateData> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::NonPositiveBeta(beta));
    }
    spec.check_nondegenerate()?;
    let m = spec.dim();
    if dip.dim() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: dip.dim(),
        });
    }
    let e = spec.energies();
    let d = dip.squared();
    let mut coupling = RMatrix::zeros(m, m);
    let mut rates = RMatrix::zeros(m, m);
    for r in 0..m {
        for c in 0..m {
            if r == c || d[(r, c)] == 0.0 {
                continue;
            }
            let gap = e[r] - e[c];
            coupling[(r, c)] = d[(r, c)] * symmetric_kernel(gap, beta);
            rates[(r, c)] = d[(r, c)] * spectral_weight(gap, beta);
        }
    }
    let escape = (0..m).map(|c| rates.column(c).iter().sum()).collect();
    Ok(RateData {
        beta,
        coupling,
        rates,
        escape,
    })
}

/// Boltzmann distribution `exp(−β(E_m − E_1)) / Z`. `beta = 0` gives the
/// uniform distribution; negative `beta` is accepted.
pub fn gibbs_state(energies: &[f64], beta: f64) -> Vec<f64> {
    if energies.is_empty() {
        return Vec::new();
    }
    let shift = if beta >= 0.0 {
        energies.iter().copied().fold(f64::INFINITY, f64::min)
    } else {
        energies.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    };
    let w: Vec<f64> = energies
        .iter()
        .map(|&x| (-beta * (x - shift)).exp())
        .collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|x| x / z).collect()
}

/// Pauli rate matrix `A_{m,n} = B_m δ_{m,n} − |ℓ_{m,n}|²` with the spectral
/// decomposition of its symmetrized form.
///
/// With `P = diag(e^{βE_m/2})`, `P A P⁻¹ = diag(B) − C` is real symmetric,
/// so `A` has a real spectrum. Eigenvalues are always computed from that
/// symmetric form.
#[derive(Debug, Clone)]
pub struct PauliMatrix {
    generator: RMatrix,
    symmetrized: RMatrix,
    energies: Vec<f64>,
    beta: f64,
    eigenvalues: Vec<f64>,
    eigenvectors: RMatrix,
    stationary: Vec<f64>,
}

impl PauliMatrix {
    pub(crate) fn from_parts(
        generator: RMatrix,
        symmetrized: RMatrix,
        energies: Vec<f64>,
        beta: f64,
    ) -> Self {
        let (eigenvalues, eigenvectors) = linalg::symmetric_eigen(&symmetrized);
        let stationary = gibbs_state(&energies, beta);
        Self {
            generator,
            symmetrized,
            energies,
            beta,
            eigenvalues,
            eigenvectors,
            stationary,
        }
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// The matrix `A`.
    pub fn generator(&self) -> &RMatrix {
        &self.generator
    }

    /// `diag(B) − C`.
    pub fn symmetrized(&self) -> &RMatrix {
        &self.symmetrized
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Ascending eigenvalues `μ_1 ≤ μ_2 ≤ …`.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Gibbs distribution, the imposed stationary state.
    pub fn stationary(&self) -> &[f64] {
        &self.stationary
    }

    /// Escape rates, the diagonal of `A`.
    pub fn escape_rates(&self) -> Vec<f64> {
        self.generator.diagonal().iter().copied().collect()
    }

    /// Diagonal of the similarity transform `P`, up to an overall constant.
    pub fn similarity_scale(&self) -> Vec<f64> {
        similarity_scale(&self.energies, self.beta)
    }

    /// Kernel vector of `A` recovered from the lowest eigenvector of the
    /// symmetrized form, normalized to unit sum.
    pub fn kernel_vector(&self) -> Vec<f64> {
        let p = self.similarity_scale();
        let v: Vec<f64> = (0..self.dim())
            .map(|i| self.eigenvectors[(i, 0)] / p[i])
            .collect();
        let s: f64 = v.iter().sum();
        v.into_iter().map(|x| x / s).collect()
    }

    /// `exp(−A t) p0` through the spectral decomposition of the symmetrized
    /// form.
    pub fn propagate(&self, p0: &[f64], t: f64) -> Vec<f64> {
        let p = self.similarity_scale();
        let y0 = linalg::rvec(&p0.iter().zip(&p).map(|(a, b)| a * b).collect::<Vec<_>>());
        let v = &self.eigenvectors;
        let mut coeff = v.transpose() * y0;
        for (k, c) in coeff.iter_mut().enumerate() {
            *c *= (-self.eigenvalues[k] * t).exp();
        }
        let y = v * coeff;
        y.iter().zip(&p).map(|(a, b)| a / b).collect()
    }
}

pub(crate) fn similarity_scale(energies: &[f64], beta: f64) -> Vec<f64> {
    let lo = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mid = 0.5 * (lo + hi);
    energies
        .iter()
        .map(|&e| (0.5 * beta * (e - mid)).exp())
        .collect()
}

pub fn pauli_matrix(rates: &RateData, spec: &EnergySpectrum) -> Result<PauliMatrix> {
    let m = rates.dim();
    if spec.dim() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: spec.dim(),
        });
    }
    let b = rates.escape();
    let generator = RMatrix::from_fn(
        m,
        m,
        |r, c| {
            if r == c {
                b[r]
            } else {
                -rates.rates()[(r, c)]
            }
        },
    );
    let symmetrized = RMatrix::from_fn(m, m, |r, c| {
        if r == c {
            b[r]
        } else {
            -rates.coupling()[(r, c)]
        }
    });
    Ok(PauliMatrix::from_parts(
        generator,
        symmetrized,
        spec.energies().to_vec(),
        rates.beta(),
    ))
}

/// Dissipation, decoherence and thermalization times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalizationTimes {
    /// `1/μ_2(A)`.
    pub tau_p: f64,
    /// `2/(B_(1) + B_(2))`.
    pub tau_q: f64,
    /// `max(tau_p, tau_q)`.
    pub tau: f64,
    pub mu2: f64,
    pub b1: f64,
    pub b2: f64,
}

/// Number of eigenvalues counted as zero, relative to the largest one.
pub fn zero_eigenvalue_count(eigenvalues: &[f64]) -> usize {
    let top = eigenvalues
        .iter()
        .copied()
        .fold(0.0f64, |m, x| m.max(x.abs()));
    let thr = ZERO_EIGENVALUE_REL_TOL * top;
    eigenvalues.iter().filter(|&&x| x <= thr).count()
}

/// Two smallest entries of a slice (with multiplicity).
pub(crate) fn two_smallest(values: &[f64]) -> (f64, f64) {
    let mut lo = (f64::INFINITY, f64::INFINITY);
    for &v in values {
        if v < lo.0 {
            lo = (v, lo.0);
        } else if v < lo.1 {
            lo.1 = v;
        }
    }
    lo
}

pub fn thermalization_times(pm: &PauliMatrix) -> Result<ThermalizationTimes> {
    if pm.dim() < 2 {
        return Err(Error::InvalidInput(
            "thermalization times need at least two levels".into(),
        ));
    }
    let zeros = zero_eigenvalue_count(pm.eigenvalues());
    if zeros != 1 {
        return Err(Error::ErgodicityViolation {
            multiplicity: zeros,
        });
    }
    let mu2 = pm.eigenvalues()[1];
    let (b1, b2) = two_smallest(&pm.escape_rates());
    let tau_p = 1.0 / mu2;
    let tau_q = 2.0 / (b1 + b2);
    Ok(ThermalizationTimes {
        tau_p,
        tau_q,
        tau: tau_p.max(tau_q),
        mu2,
        b1,
        b2,
    })
}

/// Coherence decay rates `μ_{m,n} = i(E'_m − E'_n) + (B_m + B_n)/2`, zero on
/// the diagonal.
pub fn decoherence_rates(rates: &RateData, eff_energies: &[f64]) -> Result<CMatrix> {
    let m = rates.dim();
    if eff_energies.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: eff_energies.len(),
        });
    }
    let b = rates.escape();
    Ok(CMatrix::from_fn(m, m, |r, c| {
        if r == c {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.5 * (b[r] + b[c]), eff_energies[r] - eff_energies[c])
        }
    }))
}

fn validate_density(rho: &CMatrix, m: usize) -> Result<()> {
    if rho.nrows() != m || rho.ncols() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: rho.nrows().max(rho.ncols()),
        });
    }
    let herm = linalg::hermiticity_defect(rho);
    if herm > 1e-10 {
        return Err(Error::InvalidDensityMatrix(format!(
            "not Hermitian (deviation {herm:.3e})"
        )));
    }
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
        return Err(Error::InvalidDensityMatrix(format!("trace {tr} != 1")));
    }
    let (ev, _) = linalg::hermitian_eigen(rho);
    if ev[0] < -1e-10 {
        return Err(Error::InvalidDensityMatrix(format!(
            "negative eigenvalue {:.3e}",
            ev[0]
        )));
    }
    Ok(())
}

/// Closed-form evolution of a density matrix in the energy eigenbasis:
/// populations by `exp(−A t)`, coherences by `exp(−μ_{m,n} t)`.
pub fn evolve(pm: &PauliMatrix, mu: &CMatrix, rho0: &CMatrix, t: f64) -> Result<CMatrix> {
    if !(t >= 0.0) {
        return Err(Error::NegativeTime(t));
    }
    let m = pm.dim();
    if mu.nrows() != m || mu.ncols() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: mu.nrows(),
        });
    }
    validate_density(rho0, m)?;
    let p0: Vec<f64> = (0..m).map(|i| rho0[(i, i)].re).collect();
    let p = pm.propagate(&p0, t);
    Ok(CMatrix::from_fn(m, m, |r, c| {
        if r == c {
            Complex64::new(p[r], 0.0)
        } else {
            (-mu[(r, c)] * t).exp() * rho0[(r, c)]
        }
    }))
}

/// Row-major vectorization index of `ρ_{m,n}`.
pub fn vec_index(m: usize, n: usize, dim: usize) -> usize {
    m * dim + n
}

/// The LBA master equation as an `M² × M²` generator acting on row-major
/// vectorized density matrices.
pub fn lba_liouvillian(rates: &RateData, eff_energies: &[f64]) -> Result<SparseMatrix<Complex64>> {
    let mu = decoherence_rates(rates, eff_energies)?;
    let m = rates.dim();
    let b = rates.escape();
    let mut out = SparseMatrix::new(m * m);
    for r in 0..m {
        for c in 0..m {
            let row = vec_index(r, c, m);
            if r == c {
                out.add(row, row, Complex64::new(-b[r], 0.0));
                for k in 0..m {
                    let w = rates.rates()[(r, k)];
                    if k != r && w != 0.0 {
                        out.add(row, vec_index(k, k, m), Complex64::new(w, 0.0));
                    }
                }
            } else {
                out.add(row, row, -mu[(r, c)]);
            }
        }
    }
    Ok(out)
}
