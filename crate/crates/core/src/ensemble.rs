//! Ensembles of noninteracting, distinguishable systems.
//!
//! In the product eigenbasis the ensemble rate matrix is the Kronecker sum of
//! the member rate matrices and every escape rate is a sum of member escape
//! rates. Two routes are provided: closed forms that scale to any `N`, and an
//! explicit product-space construction used for verification.

use crate::error::{Error, Result};
use crate::lba::{self, PauliMatrix};
use crate::linalg::{self, CMatrix, RMatrix, SparseMatrix};
use crate::model::{DipoleData, EnergySpectrum};

/// Largest product dimension for the dense Kronecker-sum construction.
pub const DEFAULT_DIMENSION_CAP: usize = 4096;

/// Largest product dimension for the two-system decoupling check.
pub const DECOUPLING_CAP: usize = 64;

/// One species of an ensemble: `count` identical copies of a system.
#[derive(Debug, Clone)]
pub struct EnsembleMember {
    pub spectrum: EnergySpectrum,
    pub dipoles: DipoleData,
    pub count: usize,
}

#[derive(Debug, Clone)]
pub struct EnsembleSpec {
    members: Vec<EnsembleMember>,
    beta: f64,
}

impl EnsembleSpec {
    pub fn new(members: Vec<EnsembleMember>, beta: f64) -> Result<Self> {
        if members.is_empty() || members.iter().all(|m| m.count == 0) {
            return Err(Error::EmptyEnsemble);
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::NonPositiveBeta(beta));
        }
        for m in &members {
            if m.count == 0 {
                return Err(Error::InvalidInput("member count must be positive".into()));
            }
            m.spectrum.check_nondegenerate()?;
            if m.spectrum.dim() < 2 {
                return Err(Error::InvalidInput(
                    "members need at least two levels".into(),
                ));
            }
        }
        Ok(Self { members, beta })
    }

    pub fn members(&self) -> &[EnsembleMember] {
        &self.members
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Total number of systems `N`.
    pub fn total_count(&self) -> usize {
        self.members.iter().map(|m| m.count).sum()
    }

    fn member_pauli(&self) -> Result<Vec<PauliMatrix>> {
        self.members
            .iter()
            .map(|m| {
                let rates = lba::thermal_rates(&m.spectrum, &m.dipoles, self.beta)?;
                lba::pauli_matrix(&rates, &m.spectrum)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleTimes {
    pub tau_p: f64,
    pub tau_q: f64,
    pub tau: f64,
    /// `μ_2` of each member species.
    pub per_member_mu2: Vec<f64>,
    /// Smallest ensemble escape rate, `Σ_i n_i B_min,i`.
    pub b_min_total: f64,
    /// Gap between the two smallest ensemble escape rates,
    /// `min_i (B_second,i − B_min,i)`.
    pub min_second_gap: f64,
}

/// Explicit Kronecker-sum rate matrix `Σ_i I⊗…⊗A_i⊗…⊗I` over the product
/// index set (first factor most significant).
pub fn compose_rate_matrix(parts: &[&PauliMatrix], cap: usize) -> Result<PauliMatrix> {
    match parts {
        [] => return Err(Error::EmptyEnsemble),
        [single] => return Ok((*single).clone()),
        _ => {}
    }
    let beta = parts[0].beta();
    if parts.iter().any(|p| p.beta() != beta) {
        return Err(Error::InvalidInput(
            "composed rate matrices must share the inverse temperature".into(),
        ));
    }
    let dim = parts
        .iter()
        .try_fold(1usize, |acc, p| acc.checked_mul(p.dim()))
        .unwrap_or(usize::MAX);
    if dim > cap {
        return Err(Error::DimensionCap { dim, cap });
    }
    let generators: Vec<&RMatrix> = parts.iter().map(|p| p.generator()).collect();
    let symmetrized: Vec<&RMatrix> = parts.iter().map(|p| p.symmetrized()).collect();
    let energies = product_energies(parts.iter().map(|p| p.energies()));
    Ok(PauliMatrix::from_parts(
        linalg::kronecker_sum(&generators),
        linalg::kronecker_sum(&symmetrized),
        energies,
        beta,
    ))
}

fn product_energies<'a>(factors: impl Iterator<Item = &'a [f64]>) -> Vec<f64> {
    factors.fold(vec![0.0], |acc, e| {
        acc.iter()
            .flat_map(|&a| e.iter().map(move |&b| a + b))
            .collect()
    })
}

/// Closed-form ensemble times for distinguishable members.
///
/// `τ^(P)` is the largest member `1/μ_2`. `τ^(Q) = 2/(B_α + B_α')` minimized
/// over distinct product states; since `B_α = Σ_i B_{m_i}` this equals
/// `2 / (2 Σ_i n_i B_min,i + min_i (B_second,i − B_min,i))`.
pub fn ensemble_times(spec: &EnsembleSpec) -> Result<EnsembleTimes> {
    let paulis = spec.member_pauli()?;
    let mut per_member_mu2 = Vec::with_capacity(paulis.len());
    let mut b_min_total = 0.0;
    let mut min_second_gap = f64::INFINITY;
    for (pm, member) in paulis.iter().zip(spec.members()) {
        let t = lba::thermalization_times(pm)?;
        per_member_mu2.push(t.mu2);
        b_min_total += member.count as f64 * t.b1;
        min_second_gap = min_second_gap.min(t.b2 - t.b1);
    }
    let mu2_min = per_member_mu2.iter().copied().fold(f64::INFINITY, f64::min);
    let tau_p = 1.0 / mu2_min;
    let tau_q = 2.0 / (2.0 * b_min_total + min_second_gap);
    Ok(EnsembleTimes {
        tau_p,
        tau_q,
        tau: tau_p.max(tau_q),
        per_member_mu2,
        b_min_total,
        min_second_gap,
    })
}

/// Free spins `H = −Σ_i Γ_i σ_i^x` in closed form:
/// `τ^(P) = max_i tanh(βΓ_i) / (2γ(2Γ_i)³)` and
/// `τ^(Q) = max_i [γ(2Γ_i)³ coth(βΓ_i) + Σ_{k≠i} γ(2Γ_k)³ e^{−βΓ_k}/sinh(βΓ_k)]⁻¹`.
pub fn free_spins_times(fields: &[f64], beta: f64, gamma: f64) -> Result<EnsembleTimes> {
    if fields.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    if let Some(&bad) = fields.iter().find(|&&g| !(g > 0.0 && g.is_finite())) {
        return Err(Error::NonPositiveField(bad));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::NonPositiveBeta(beta));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "coupling constant must be positive, got {gamma}"
        )));
    }
    // strength γ(2Γ)³ and ground escape rate γ(2Γ)³ e^{−βΓ}/sinh(βΓ) = γ(2Γ)³ · 2/(e^{2βΓ} − 1)
    let strength: Vec<f64> = fields.iter().map(|&g| gamma * (2.0 * g).powi(3)).collect();
    let ground: Vec<f64> = fields
        .iter()
        .zip(&strength)
        .map(|(&g, &s)| s * 2.0 / (2.0 * beta * g).exp_m1())
        .collect();
    let ground_total: f64 = ground.iter().sum();

    let mut tau_p = 0.0f64;
    let mut tau_q = 0.0f64;
    let mut per_member_mu2 = Vec::with_capacity(fields.len());
    for (i, &g) in fields.iter().enumerate() {
        let th = (beta * g).tanh();
        tau_p = tau_p.max(th / (2.0 * strength[i]));
        per_member_mu2.push(2.0 * strength[i] / th);
        let coth = 1.0 + 2.0 / (2.0 * beta * g).exp_m1();
        let rate = strength[i] * coth + (ground_total - ground[i]);
        tau_q = tau_q.max(1.0 / rate);
    }
    let min_second_gap = strength.iter().copied().fold(f64::INFINITY, f64::min) * 2.0;
    Ok(EnsembleTimes {
        tau_p,
        tau_q,
        tau: tau_p.max(tau_q),
        per_member_mu2,
        b_min_total: ground_total,
        min_second_gap,
    })
}

/// Options for the explicit product-space route.
#[derive(Debug, Clone, Copy)]
pub struct NumericOptions {
    /// Largest product dimension accepted.
    pub max_dim: usize,
    /// Product dimensions up to this size use a dense symmetric eigensolver;
    /// larger ones use Lanczos.
    pub dense_limit: usize,
    /// Relative Ritz-residual tolerance for Lanczos.
    pub lanczos_tol: f64,
}

impl Default for NumericOptions {
    fn default() -> Self {
        Self {
            max_dim: 1 << 16,
            dense_limit: 256,
            lanczos_tol: 1e-12,
        }
    }
}

/// Explicit symmetrized ensemble rate matrix over the product index set,
/// with the normalized kernel vector `⊗_i sqrt(p_i^eq)`.
pub struct ProductRateMatrix {
    pub matrix: SparseMatrix<f64>,
    pub kernel: Vec<f64>,
    pub escape: Vec<f64>,
}

/// Builds the sparse symmetrized rate matrix of the whole ensemble. Each row
/// couples a product state to the states reached by one member jump.
pub fn product_rate_matrix(systems: &[&PauliMatrix], max_dim: usize) -> Result<ProductRateMatrix> {
    if systems.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let dims: Vec<usize> = systems.iter().map(|p| p.dim()).collect();
    let dim = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .unwrap_or(usize::MAX);
    if dim > max_dim {
        return Err(Error::DimensionCap { dim, cap: max_dim });
    }
    // stride of factor i: product of the dimensions after it
    let mut strides = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    let roots: Vec<Vec<f64>> = systems
        .iter()
        .map(|p| p.stationary().iter().map(|x| x.sqrt()).collect())
        .collect();

    let mut matrix = SparseMatrix::new(dim);
    let mut escape = vec![0.0; dim];
    let mut kernel = vec![1.0; dim];
    for alpha in 0..dim {
        let mut diag = 0.0;
        for (i, p) in systems.iter().enumerate() {
            let s = p.symmetrized();
            let mi = (alpha / strides[i]) % dims[i];
            diag += s[(mi, mi)];
            kernel[alpha] *= roots[i][mi];
            for mj in 0..dims[i] {
                if mj == mi || s[(mj, mi)] == 0.0 {
                    continue;
                }
                let beta_idx = alpha - mi * strides[i] + mj * strides[i];
                matrix.add(beta_idx, alpha, s[(mj, mi)]);
            }
        }
        escape[alpha] = diag;
        matrix.add(alpha, alpha, diag);
    }
    let norm = kernel.iter().map(|x| x * x).sum::<f64>().sqrt();
    kernel.iter_mut().for_each(|x| *x /= norm);
    Ok(ProductRateMatrix {
        matrix,
        kernel,
        escape,
    })
}

/// Ensemble times from the explicit product-space rate matrix: `μ_2` from
/// the symmetrized matrix (kernel deflated), `τ^(Q)` from the two smallest
/// enumerated escape rates.
pub fn numeric_times(spec: &EnsembleSpec, opts: NumericOptions) -> Result<EnsembleTimes> {
    let paulis = spec.member_pauli()?;
    let mut systems: Vec<&PauliMatrix> = Vec::with_capacity(spec.total_count());
    for (pm, member) in paulis.iter().zip(spec.members()) {
        systems.extend(std::iter::repeat_n(pm, member.count));
    }
    let product = product_rate_matrix(&systems, opts.max_dim)?;
    let dim = product.matrix.dim();

    let mu2 = if dim <= opts.dense_limit {
        let (values, _) = linalg::symmetric_eigen(&product.matrix.to_dense());
        let zeros = lba::zero_eigenvalue_count(&values);
        if zeros != 1 {
            return Err(Error::ErgodicityViolation {
                multiplicity: zeros,
            });
        }
        values[1]
    } else {
        linalg::lanczos_smallest(
            |x, y| product.matrix.mul_vec_into(x, y),
            dim,
            std::slice::from_ref(&product.kernel),
            opts.lanczos_tol,
        )?
    };

    let (b1, b2) = lba::two_smallest(&product.escape);
    let per_member_mu2 = paulis
        .iter()
        .map(|p| lba::thermalization_times(p).map(|t| t.mu2))
        .collect::<Result<Vec<_>>>()?;
    let tau_p = 1.0 / mu2;
    let tau_q = 2.0 / (b1 + b2);
    Ok(EnsembleTimes {
        tau_p,
        tau_q,
        tau: tau_p.max(tau_q),
        per_member_mu2,
        b_min_total: b1,
        min_second_gap: b2 - b1,
    })
}

/// Eigenbasis used for a pair of systems.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairBasis {
    /// `|m⟩⊗|n⟩`.
    Product,
    /// `|m,m⟩` and `(|m,n⟩ ± |n,m⟩)/√2`; requires two identical systems.
    /// The symmetric state of `m < n` carries the label `(m, n)`, the
    /// antisymmetric one `(n, m)`.
    Bell,
}

#[derive(Debug, Clone)]
pub struct DecouplingCheck {
    /// Whether `C_{m,n;p,q} = C_{m,p}δ_{n,q} + C_{n,q}δ_{m,p}` and
    /// `B_{m,n} = B_m + B_n` hold to `1e-10` relative.
    pub holds: bool,
    /// Largest deviation of the coupling from the product form, relative to
    /// the largest coupling.
    pub max_deviation: f64,
    /// Largest deviation from the symmetrized form
    /// `(C_{m,p}δ_{n,q} + C_{n,q}δ_{m,p} + C_{m,q}δ_{n,p} + C_{n,p}δ_{m,q})/2`;
    /// only defined for systems of equal dimension.
    pub mixed_deviation: Option<f64>,
    /// Largest deviation of escape rates from `B_m + B_n`, relative.
    pub escape_deviation: f64,
    /// `(m, n)` label of each two-system basis state.
    pub labels: Vec<(usize, usize)>,
    /// Measured two-system coupling `C` in the chosen basis.
    pub coupling: RMatrix,
    /// Member couplings `C` of the first and second system.
    pub member_coupling: (RMatrix, RMatrix),
}

const DECOUPLING_REL_TOL: f64 = 1e-10;

/// Builds the two-system dipole elements
/// `D_{α,α'} = γ Σ_h (|⟨α|d_1^h|α'⟩|² + |⟨α|d_2^h|α'⟩|²)` in the chosen basis
/// and compares the resulting coupling and escape rates with the
/// system-index decoupled form.
pub fn verify_product_basis_decoupling(
    a: (&EnergySpectrum, &DipoleData),
    b: Option<(&EnergySpectrum, &DipoleData)>,
    beta: f64,
    basis: PairBasis,
) -> Result<DecouplingCheck> {
    let rates_a = lba::thermal_rates(a.0, a.1, beta)?;
    let Some(b) = b else {
        let m = a.0.dim();
        return Ok(DecouplingCheck {
            holds: true,
            max_deviation: 0.0,
            mixed_deviation: None,
            escape_deviation: 0.0,
            labels: (0..m).map(|i| (i, 0)).collect(),
            coupling: rates_a.coupling().clone(),
            member_coupling: (rates_a.coupling().clone(), RMatrix::zeros(1, 1)),
        });
    };
    let rates_b = lba::thermal_rates(b.0, b.1, beta)?;
    let (ma, mb) = (a.0.dim(), b.0.dim());
    let dim = ma * mb;
    if dim > DECOUPLING_CAP {
        return Err(Error::DimensionCap {
            dim,
            cap: DECOUPLING_CAP,
        });
    }

    let (u, labels) = match basis {
        PairBasis::Product => {
            let labels = (0..ma).flat_map(|m| (0..mb).map(move |n| (m, n))).collect();
            (CMatrix::identity(dim, dim), labels)
        }
        PairBasis::Bell => {
            if ma != mb || a.0.energies() != b.0.energies() {
                return Err(Error::InvalidInput(
                    "the Bell basis needs two identical systems".into(),
                ));
            }
            bell_basis(ma)
        }
    };

    let u_dag = u.adjoint();
    let first: Vec<CMatrix> =
        a.1.amplitudes()
            .iter()
            .map(|d| &u_dag * d.kronecker(&CMatrix::identity(mb, mb)) * &u)
            .collect();
    let second: Vec<CMatrix> =
        b.1.amplitudes()
            .iter()
            .map(|d| &u_dag * CMatrix::identity(ma, ma).kronecker(d) * &u)
            .collect();

    let (ea, eb) = (a.0.energies(), b.0.energies());
    let energy: Vec<f64> = labels.iter().map(|&(m, n)| ea[m] + eb[n]).collect();
    let mut coupling = RMatrix::zeros(dim, dim);
    let mut escape = vec![0.0; dim];
    for r in 0..dim {
        for c in 0..dim {
            if r == c {
                continue;
            }
            let d = a.1.gamma() * first.iter().map(|x| x[(r, c)].norm_sqr()).sum::<f64>()
                + b.1.gamma() * second.iter().map(|x| x[(r, c)].norm_sqr()).sum::<f64>();
            let gap = energy[r] - energy[c];
            coupling[(r, c)] = d * lba::symmetric_kernel(gap, beta);
            escape[c] += d * lba::spectral_weight(gap, beta);
        }
    }

    let (ca, cb) = (rates_a.coupling(), rates_b.coupling());
    let scale = coupling.amax().max(f64::MIN_POSITIVE);
    let delta = |x: usize, y: usize| if x == y { 1.0 } else { 0.0 };
    let mut max_deviation = 0.0f64;
    let mut mixed = (ma == mb).then_some(0.0f64);
    for (r, &(m, n)) in labels.iter().enumerate() {
        for (c, &(p, q)) in labels.iter().enumerate() {
            if r == c {
                continue;
            }
            let measured = coupling[(r, c)];
            let product = ca[(m, p)] * delta(n, q) + cb[(n, q)] * delta(m, p);
            max_deviation = max_deviation.max((measured - product).abs() / scale);
            if let Some(dev) = mixed.as_mut() {
                let crossed = ca[(m, q)] * delta(n, p) + cb[(n, p)] * delta(m, q);
                *dev = dev.max((measured - 0.5 * (product + crossed)).abs() / scale);
            }
        }
    }
    let escape_scale = escape.iter().copied().fold(f64::MIN_POSITIVE, f64::max);
    let escape_deviation = labels
        .iter()
        .enumerate()
        .map(|(i, &(m, n))| (escape[i] - rates_a.escape()[m] - rates_b.escape()[n]).abs())
        .fold(0.0f64, f64::max)
        / escape_scale;

    Ok(DecouplingCheck {
        holds: max_deviation <= DECOUPLING_REL_TOL && escape_deviation <= DECOUPLING_REL_TOL,
        max_deviation,
        mixed_deviation: mixed,
        escape_deviation,
        labels,
        coupling,
        member_coupling: (ca.clone(), cb.clone()),
    })
}

fn bell_basis(m: usize) -> (CMatrix, Vec<(usize, usize)>) {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let dim = m * m;
    let mut u = CMatrix::zeros(dim, dim);
    let mut labels = Vec::with_capacity(dim);
    let mut col = 0;
    for i in 0..m {
        u[(i * m + i, col)] = 1.0.into();
        labels.push((i, i));
        col += 1;
        for j in i + 1..m {
            u[(i * m + j, col)] = s.into();
            u[(j * m + i, col)] = s.into();
            labels.push((i, j));
            col += 1;
            u[(i * m + j, col)] = s.into();
            u[(j * m + i, col)] = (-s).into();
            labels.push((j, i));
            col += 1;
        }
    }
    (u, labels)
}
