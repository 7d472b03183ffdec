//! Quantum optical master equation for dipole coupling to blackbody
//! radiation, with the Lamb shift dropped.
//!
//! Density matrices are vectorized row-major: `ρ_{m,n}` sits at `m·M + n`.
//! The Kronecker deltas on energies and on gaps are evaluated on equality
//! classes, the same ones [`crate::model::degeneracy_report`] uses, so the
//! generator's structure and the degeneracy diagnosis always agree.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::ensemble::EnsembleTimes;
use crate::error::{Error, Result};
use crate::lba::{self, ThermalizationTimes};
use crate::linalg::{CMatrix, SparseMatrix};
use crate::model::{self, DegeneracyReport, DipoleData, EnergySpectrum, GapClass, QubitSystem};

/// Largest vectorized dimension `M²` accepted by default.
pub const DEFAULT_LIOUVILLIAN_CAP: usize = 4096;

/// Relative agreement required between LBA and QOME times.
pub const AGREEMENT_REL_TOL: f64 = 1e-6;

/// Relative spread above which a time ratio counts as `N`-dependent.
pub const SERIES_REL_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct Liouvillian {
    levels: usize,
    energies: Vec<f64>,
    matrix: SparseMatrix<Complex64>,
    energy_tol: f64,
}

impl Liouvillian {
    /// Vectorized dimension `M²`.
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn matrix(&self) -> &SparseMatrix<Complex64> {
        &self.matrix
    }

    pub fn energy_tol(&self) -> f64 {
        self.energy_tol
    }

    pub fn index(&self, m: usize, n: usize) -> usize {
        lba::vec_index(m, n, self.levels)
    }

    pub fn pair(&self, index: usize) -> (usize, usize) {
        (index / self.levels, index % self.levels)
    }

    pub fn to_dense(&self) -> CMatrix {
        self.matrix.to_dense()
    }

    /// Applies the generator to a density matrix.
    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let m = self.levels;
        let v: Vec<Complex64> = (0..m * m).map(|i| rho[self.pair(i)]).collect();
        let out = self.matrix.mul_vec(&v);
        CMatrix::from_fn(m, m, |r, c| out[self.index(r, c)])
    }
}

/// Class id of every value under the transitive `|x − y| ≤ tol` relation.
fn class_ids(values: &[f64], tol: f64) -> Vec<usize> {
    let mut ids = vec![0; values.len()];
    for (id, cls) in model::equality_classes(values, tol).into_iter().enumerate() {
        for i in cls {
            ids[i] = id;
        }
    }
    ids
}

/// Builds the QOME generator
///
/// ```text
/// L_{mn,kj} = −i(E_m−E_n)δ_{mk}δ_{nj}
///           − ½ δ_{nj} δ(E_k,E_m) γ Σ_{q,h} d_{qk} d*_{qm} W̃_{qm}
///           − ½ δ_{mk} δ(E_j,E_n) γ Σ_{q,h} d_{qn} d*_{qj} W̃_{qn}
///           + δ(E_k−E_m, E_j−E_n) γ Σ_h d_{mk} d*_{nj} W̃_{mk}
/// ```
///
/// with `d = d^(h)` and `W̃` from [`lba::spectral_weight`]. The spectrum may
/// be degenerate. `energy_tol` defaults to `1e-9 × (E_M − E_1)`.
pub fn build_liouvillian(
    spec: &EnergySpectrum,
    dip: &DipoleData,
    beta: f64,
    energy_tol: Option<f64>,
    cap: usize,
) -> Result<Liouvillian> {
    let m = spec.dim();
    if dip.dim() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: dip.dim(),
        });
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::NonPositiveBeta(beta));
    }
    let dim = m.saturating_mul(m);
    if dim > cap {
        return Err(Error::DimensionCap { dim, cap });
    }
    let e = spec.energies();
    let tol = energy_tol.unwrap_or_else(|| model::default_tolerance(e));
    let gamma = dip.gamma();

    let level_id = class_ids(e, tol);
    let all_gaps: Vec<f64> = (0..m)
        .flat_map(|k| (0..m).map(move |a| e[k] - e[a]))
        .collect();
    // gap_id[k·M + a] labels E_k − E_a
    let gap_id = class_ids(&all_gaps, tol);

    let weight = CMatrix::from_fn(m, m, |q, a| lba::spectral_weight(e[q] - e[a], beta).into());
    // escape[(a, k)] = γ Σ_{q,h} d_{qk} d*_{qa} W̃_{qa}
    let mut escape = CMatrix::zeros(m, m);
    for d in dip.amplitudes() {
        let weighted = d.component_mul(&weight);
        escape += weighted.adjoint() * d;
    }
    escape *= Complex64::from(gamma);

    let amps = dip.amplitudes();
    let rows: Vec<Vec<(usize, Complex64)>> = (0..dim)
        .into_par_iter()
        .map(|row| {
            let (a, n) = (row / m, row % m);
            let mut out = Vec::new();
            out.push((row, Complex64::new(0.0, -(e[a] - e[n]))));
            for k in 0..m {
                let v = escape[(a, k)];
                if level_id[k] == level_id[a] && v != Complex64::ZERO {
                    out.push((k * m + n, -0.5 * v));
                }
            }
            for j in 0..m {
                let v = escape[(n, j)].conj();
                if level_id[j] == level_id[n] && v != Complex64::ZERO {
                    out.push((a * m + j, -0.5 * v));
                }
            }
            for k in 0..m {
                let w = weight[(a, k)].re;
                if w == 0.0 {
                    continue;
                }
                let g = gap_id[k * m + a];
                for j in 0..m {
                    if gap_id[j * m + n] != g {
                        continue;
                    }
                    let s: Complex64 = amps.iter().map(|d| d[(a, k)] * d[(n, j)].conj()).sum();
                    if s != Complex64::ZERO {
                        out.push((k * m + j, s * (gamma * w)));
                    }
                }
            }
            out
        })
        .collect();

    Ok(Liouvillian {
        levels: m,
        energies: e.to_vec(),
        matrix: SparseMatrix::from_rows(rows),
        energy_tol: tol,
    })
}

/// Relative thresholds for classifying Liouvillian eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassificationTols {
    /// `|μ| < zero · scale` counts as a zero eigenvalue.
    pub zero: f64,
    /// `|Im μ| ≥ imag · scale` counts as oscillatory.
    pub imag: f64,
}

impl Default for ClassificationTols {
    fn default() -> Self {
        Self {
            zero: 1e-10,
            imag: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LiouvillianSpectrum {
    /// Sorted by decreasing real part, then increasing imaginary part.
    pub eigenvalues: Vec<Complex64>,
    pub zero_multiplicity: usize,
    /// `−1/μ` for the real nonzero eigenvalue of smallest modulus.
    pub tau_p: Option<f64>,
    /// How many real eigenvalues share that modulus.
    pub tau_p_multiplicity: usize,
    /// `−1/Re μ` for the oscillatory eigenvalue with the smallest `|Re μ|`.
    /// Absent when no oscillatory eigenvalue exists or the slowest one is
    /// undamped.
    pub tau_q: Option<f64>,
    pub tols: ClassificationTols,
    /// Largest eigenvalue modulus; all thresholds are relative to it.
    pub scale: f64,
}

impl LiouvillianSpectrum {
    pub fn tau(&self) -> Option<f64> {
        match (self.tau_p, self.tau_q) {
            (Some(p), Some(q)) => Some(p.max(q)),
            (p, q) => p.or(q),
        }
    }
}

/// Classifies a list of generator eigenvalues.
pub fn classify_spectrum(
    mut eigenvalues: Vec<Complex64>,
    tols: ClassificationTols,
) -> LiouvillianSpectrum {
    eigenvalues.sort_by(|a, b| b.re.total_cmp(&a.re).then(a.im.total_cmp(&b.im)));
    let scale = eigenvalues.iter().fold(0.0f64, |s, z| s.max(z.norm()));
    let zero_cut = tols.zero * scale;
    let imag_cut = tols.imag * scale;

    let zero_multiplicity = eigenvalues.iter().filter(|z| z.norm() <= zero_cut).count();
    let real: Vec<Complex64> = eigenvalues
        .iter()
        .copied()
        .filter(|z| z.im.abs() < imag_cut && z.norm() > zero_cut)
        .collect();
    let slowest_real = real
        .iter()
        .copied()
        .min_by(|a, b| a.norm().total_cmp(&b.norm()));
    let (tau_p, tau_p_multiplicity) = match slowest_real {
        Some(mu) => {
            let count = real
                .iter()
                .filter(|z| (z.norm() - mu.norm()).abs() <= imag_cut)
                .count();
            (Some(-1.0 / mu.re), count)
        }
        None => (None, 0),
    };
    let tau_q = eigenvalues
        .iter()
        .filter(|z| z.im.abs() >= imag_cut)
        .min_by(|a, b| a.re.abs().total_cmp(&b.re.abs()))
        .filter(|z| z.re.abs() > zero_cut)
        .map(|z| -1.0 / z.re);

    LiouvillianSpectrum {
        eigenvalues,
        zero_multiplicity,
        tau_p,
        tau_p_multiplicity,
        tau_q,
        tols,
        scale,
    }
}

/// Full spectrum of the generator, classified. Fails with
/// [`Error::NoDissipativeEigenvalue`] when no real nonzero eigenvalue exists.
pub fn qome_spectrum(l: &Liouvillian, tols: ClassificationTols) -> Result<LiouvillianSpectrum> {
    let spectrum = classify_spectrum(l.matrix().eigenvalues_by_blocks()?, tols);
    if spectrum.tau_p.is_none() {
        return Err(Error::NoDissipativeEigenvalue);
    }
    Ok(spectrum)
}

/// Groups ordered pairs `(m, n)`, `m ≠ n`, by `ω = E_n − E_m`. Each group is
/// one QOME jump operator `A(ω) = Σ A_{m,n}|m⟩⟨n|`.
pub fn jump_operator_groups(energies: &[f64], tol: f64) -> Vec<GapClass> {
    model::gap_classes(energies, tol)
}

/// QOME analysis of a qubit system, degenerate spectra allowed.
#[derive(Debug, Clone)]
pub struct QomeAnalysis {
    pub energies: Vec<f64>,
    pub degeneracy: DegeneracyReport,
    pub spectrum: LiouvillianSpectrum,
}

pub fn analyze_system(
    sys: &QubitSystem,
    beta: f64,
    energy_tol: Option<f64>,
    cap: usize,
    tols: ClassificationTols,
) -> Result<QomeAnalysis> {
    let dim = sys.dim().saturating_mul(sys.dim());
    if dim > cap {
        return Err(Error::DimensionCap { dim, cap });
    }
    let spec = model::diagonalize_allowing_degeneracy(sys, energy_tol)?;
    let dip = model::dipole_data(sys, &spec)?;
    let l = build_liouvillian(&spec, &dip, beta, energy_tol, cap)?;
    let spectrum = qome_spectrum(&l, tols)?;
    Ok(QomeAnalysis {
        degeneracy: model::degeneracy_report(spec.energies(), l.energy_tol()),
        energies: spec.energies().to_vec(),
        spectrum,
    })
}

/// Dissipation and decoherence times from the LBA side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimePair {
    pub tau_p: f64,
    pub tau_q: f64,
}

impl From<&EnsembleTimes> for TimePair {
    fn from(t: &EnsembleTimes) -> Self {
        Self {
            tau_p: t.tau_p,
            tau_q: t.tau_q,
        }
    }
}

impl From<&ThermalizationTimes> for TimePair {
    fn from(t: &ThermalizationTimes) -> Self {
        Self {
            tau_p: t.tau_p,
            tau_q: t.tau_q,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct PathologyFlags {
    pub multiple_steady_states: bool,
    /// Whether `τ^(P)_QOME / τ^(P)_LBA` varies with `N`; set by
    /// [`flag_series`].
    pub tau_p_depends_on_n: Option<bool>,
    /// Whether `τ^(Q)_QOME / τ^(Q)_LBA` varies with `N`, i.e. the QOME
    /// decoherence time does not follow the LBA `1/N` law; set by
    /// [`flag_series`].
    pub tau_q_not_one_over_n: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub lba: TimePair,
    pub qome_tau_p: Option<f64>,
    pub qome_tau_q: Option<f64>,
    pub zero_multiplicity: usize,
    pub degeneracy: DegeneracyReport,
    pub agree_p: bool,
    pub agree_q: bool,
    /// `|τ_QOME − τ_LBA| / τ_LBA`, absent when the QOME time is.
    pub deviation_p: Option<f64>,
    pub deviation_q: Option<f64>,
    pub flags: PathologyFlags,
}

fn relative_deviation(reference: f64, value: Option<f64>) -> Option<f64> {
    value.map(|v| (v - reference).abs() / reference.abs())
}

pub fn compare(
    lba: impl Into<TimePair>,
    qome: &LiouvillianSpectrum,
    deg: DegeneracyReport,
) -> ComparisonReport {
    let lba = lba.into();
    let deviation_p = relative_deviation(lba.tau_p, qome.tau_p);
    let deviation_q = relative_deviation(lba.tau_q, qome.tau_q);
    let agrees = |d: Option<f64>| d.is_some_and(|d| d <= AGREEMENT_REL_TOL);
    ComparisonReport {
        lba,
        qome_tau_p: qome.tau_p,
        qome_tau_q: qome.tau_q,
        zero_multiplicity: qome.zero_multiplicity,
        degeneracy: deg,
        agree_p: agrees(deviation_p),
        agree_q: agrees(deviation_q),
        deviation_p,
        deviation_q,
        flags: PathologyFlags {
            multiple_steady_states: qome.zero_multiplicity > 1,
            ..Default::default()
        },
    }
}

fn ratio_varies(ratios: &[Option<f64>]) -> bool {
    if ratios.iter().any(Option::is_none) {
        return true;
    }
    let r: Vec<f64> = ratios.iter().flatten().copied().collect();
    let lo = r.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    hi - lo > SERIES_REL_TOL * hi.abs()
}

/// Fills the `N`-scaling flags of reports computed for different `N`. With
/// fewer than two distinct `N` the flags stay unset.
pub fn flag_series(reports: &mut [(usize, ComparisonReport)]) {
    let mut ns: Vec<usize> = reports.iter().map(|(n, _)| *n).collect();
    ns.sort_unstable();
    ns.dedup();
    if ns.len() < 2 {
        return;
    }
    let ratio_p: Vec<Option<f64>> = reports
        .iter()
        .map(|(_, r)| r.qome_tau_p.map(|q| q / r.lba.tau_p))
        .collect();
    let ratio_q: Vec<Option<f64>> = reports
        .iter()
        .map(|(_, r)| r.qome_tau_q.map(|q| q / r.lba.tau_q))
        .collect();
    let (dp, dq) = (ratio_varies(&ratio_p), ratio_varies(&ratio_q));
    for (_, r) in reports.iter_mut() {
        r.flags.tau_p_depends_on_n = Some(dp);
        r.flags.tau_q_not_one_over_n = Some(dq);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::free_spin_system;

    fn spin_liouvillian(field: f64, beta: f64) -> Liouvillian {
        let (s, d) = free_spin_system(field, 1.0).unwrap();
        build_liouvillian(&s, &d, beta, None, DEFAULT_LIOUVILLIAN_CAP).unwrap()
    }

    fn modulated(n: usize) -> Vec<f64> {
        let step = std::f64::consts::PI / std::f64::consts::SQRT_2;
        (0..n)
            .map(|i| 1.0 + (i as f64 * step).sin() / 2.0)
            .collect()
    }

    fn spins(fields: &[f64]) -> (EnergySpectrum, DipoleData) {
        let sys = QubitSystem::transverse_field(fields, 1.0).unwrap();
        let spec = model::diagonalize_allowing_degeneracy(&sys, None).unwrap();
        let dip = model::dipole_data(&sys, &spec).unwrap();
        (spec, dip)
    }

    #[test]
    fn single_spin_times() {
        let sp = qome_spectrum(&spin_liouvillian(1.0, 1.0), Default::default()).unwrap();
        assert!((sp.tau_p.unwrap() - 1f64.tanh() / 16.0).abs() < 1e-12);
        assert!((sp.tau_q.unwrap() - 1f64.tanh() / 8.0).abs() < 1e-12);
        assert_eq!(sp.zero_multiplicity, 1);
    }

    #[test]
    fn cold_uniform_spins_converge() {
        // rates spanning e^{-16} made the unbalanced Schur iteration stall
        let sys = QubitSystem::transverse_field(&[1.0; 3], 1.0).unwrap();
        for beta in [2.0, 4.0, 8.0] {
            let a = analyze_system(
                &sys,
                beta,
                None,
                DEFAULT_LIOUVILLIAN_CAP,
                Default::default(),
            )
            .unwrap();
            let expected = f64::tanh(beta) / 16.0;
            assert!((a.spectrum.tau_p.unwrap() - expected).abs() < 1e-10 * expected);
            assert_eq!(a.spectrum.zero_multiplicity, 5);
        }
    }

    #[test]
    fn zero_coupling_is_closed_system() {
        let spec = EnergySpectrum::from_levels(vec![-1.0, 0.5, 2.0], None).unwrap();
        let dip = DipoleData::from_amplitudes(
            [
                CMatrix::zeros(3, 3),
                CMatrix::zeros(3, 3),
                CMatrix::zeros(3, 3),
            ],
            1.0,
        )
        .unwrap();
        let l = build_liouvillian(&spec, &dip, 1.0, None, DEFAULT_LIOUVILLIAN_CAP).unwrap();
        let e = spec.energies();
        for i in 0..9 {
            let (m, n) = l.pair(i);
            assert_eq!(
                l.matrix().row(i),
                &[(i, Complex64::new(0.0, -(e[m] - e[n])))]
            );
        }
        assert!(matches!(
            qome_spectrum(&l, Default::default()),
            Err(Error::NoDissipativeEigenvalue)
        ));
    }

    #[test]
    fn cap_and_dimension_checks() {
        let (s, d) = free_spin_system(1.0, 1.0).unwrap();
        assert!(matches!(
            build_liouvillian(&s, &d, 1.0, None, 3),
            Err(Error::DimensionCap { dim: 4, cap: 3 })
        ));
        let three = EnergySpectrum::from_levels(vec![0.0, 1.0, 2.5], None).unwrap();
        assert!(matches!(
            build_liouvillian(&three, &d, 1.0, None, 100),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn two_equal_spins_jump_groups() {
        let (spec, _) = spins(&[1.0, 1.0]);
        let groups = jump_operator_groups(spec.energies(), 1e-9);
        let at = |w: f64| {
            groups
                .iter()
                .find(|g| (g.gap - w).abs() < 1e-9)
                .map(|g| g.pairs.len())
        };
        assert_eq!(at(2.0), Some(4));
        assert_eq!(at(4.0), Some(1));
    }

    #[test]
    fn single_spin_groups_are_singletons() {
        let groups = jump_operator_groups(&[-1.0, 1.0], 1e-9);
        assert_eq!(groups.len(), 2);
        assert!(groups.iter().all(|g| g.pairs.len() == 1));
    }

    #[test]
    fn modulated_pair_has_parity_gap_degeneracy() {
        let g = modulated(2);
        let energies = [-g[0] - g[1], -g[0] + g[1], g[0] - g[1], g[0] + g[1]];
        let groups = jump_operator_groups(&energies, 1e-9);
        assert!(groups.iter().any(|c| c.pairs.len() > 1));
    }

    #[test]
    fn trace_and_gibbs_kernel() {
        for fields in [vec![1.0], vec![0.7, 1.2], vec![1.0, 1.0, 1.0]] {
            let (spec, dip) = spins(&fields);
            let beta = 0.8;
            let l = build_liouvillian(&spec, &dip, beta, None, DEFAULT_LIOUVILLIAN_CAP).unwrap();
            let m = spec.dim();
            let dense = l.to_dense();
            let scale = crate::linalg::max_abs(&dense);
            for c in 0..m * m {
                let s: Complex64 = (0..m).map(|a| dense[(l.index(a, a), c)]).sum();
                assert!(s.norm() <= 1e-9 * scale);
            }
            let p = lba::gibbs_state(spec.energies(), beta);
            let rho = CMatrix::from_fn(m, m, |r, c| if r == c { p[r].into() } else { 0.0.into() });
            assert!(crate::linalg::max_abs(&l.apply(&rho)) <= 1e-8 * scale);
        }
    }

    #[test]
    fn real_parts_are_nonpositive() {
        for fields in [vec![1.0, 1.0], modulated(3)] {
            let (spec, dip) = spins(&fields);
            let l = build_liouvillian(&spec, &dip, 1.0, None, DEFAULT_LIOUVILLIAN_CAP).unwrap();
            let sp = qome_spectrum(&l, Default::default()).unwrap();
            assert!(sp.eigenvalues.iter().all(|z| z.re <= 1e-9 * sp.scale));
            assert!(sp.zero_multiplicity >= 1);
        }
    }

    #[test]
    fn evolution_keeps_hermiticity_and_trace() {
        let (spec, dip) = spins(&[0.8, 1.3]);
        let l = build_liouvillian(&spec, &dip, 1.0, None, DEFAULT_LIOUVILLIAN_CAP).unwrap();
        let rho0 = CMatrix::from_fn(4, 4, |r, c| {
            let z = Complex64::new(0.1 * (r + c) as f64, 0.05 * (r as f64 - c as f64));
            if r == c {
                Complex64::new(0.25, 0.0)
            } else {
                z
            }
        });
        let v0 = nalgebra::DVector::from_fn(16, |i, _| rho0[l.pair(i)]);
        for t in [0.1, 1.0] {
            let prop = (l.to_dense() * Complex64::from(t)).exp();
            let v = &prop * &v0;
            let rho = CMatrix::from_fn(4, 4, |r, c| v[l.index(r, c)]);
            assert!(crate::linalg::hermiticity_defect(&rho) < 1e-8);
            assert!((rho.trace() - Complex64::from(1.0)).norm() < 1e-8);
        }
    }

    #[test]
    fn population_block_is_pauli_without_level_degeneracy() {
        // equally spaced: gap degenerate, levels distinct
        let spec = EnergySpectrum::from_levels(vec![0.0, 1.0, 2.0], None).unwrap();
        let x = CMatrix::from_fn(3, 3, |r, c| {
            if r != c {
                (0.5 + 0.1 * (r + c) as f64).into()
            } else {
                0.0.into()
            }
        });
        let dip = DipoleData::from_amplitudes([x, CMatrix::zeros(3, 3), CMatrix::zeros(3, 3)], 1.0)
            .unwrap();
        let l = build_liouvillian(&spec, &dip, 1.0, None, DEFAULT_LIOUVILLIAN_CAP).unwrap();
        let rates = lba::thermal_rates(&spec, &dip, 1.0).unwrap();
        let a = lba::pauli_matrix(&rates, &spec).unwrap();
        let dense = l.to_dense();
        for k in 0..3 {
            let col = l.index(k, k);
            for row in 0..9 {
                let (m, n) = l.pair(row);
                let v = dense[(row, col)];
                if m == n {
                    assert!((v.re + a.generator()[(m, k)]).abs() < 1e-10);
                    assert!(v.im.abs() < 1e-12);
                } else {
                    assert_eq!(v, Complex64::ZERO);
                }
            }
        }
    }

    #[test]
    fn matches_lba_without_any_degeneracy() {
        let spec = EnergySpectrum::from_levels(vec![0.0, 0.7, 1.9, 3.4], None).unwrap();
        let x = CMatrix::from_fn(4, 4, |r, c| {
            if r != c {
                (0.3 + 0.2 * (r * c) as f64).into()
            } else {
                0.0.into()
            }
        });
        let y = CMatrix::from_fn(4, 4, |r, c| match r.cmp(&c) {
            std::cmp::Ordering::Less => Complex64::new(0.0, 0.4),
            std::cmp::Ordering::Greater => Complex64::new(0.0, -0.4),
            _ => Complex64::ZERO,
        });
        let dip = DipoleData::from_amplitudes([x, y, CMatrix::zeros(4, 4)], 1.0).unwrap();
        let l = build_liouvillian(&spec, &dip, 1.3, None, DEFAULT_LIOUVILLIAN_CAP).unwrap();
        let rates = lba::thermal_rates(&spec, &dip, 1.3).unwrap();
        let reference = lba::lba_liouvillian(&rates, spec.energies()).unwrap();
        let diff = l.to_dense() - reference.to_dense();
        assert!(crate::linalg::max_abs(&diff) < 1e-10);
    }

    #[test]
    fn comparison_flags() {
        let (s, d) = free_spin_system(1.0, 1.0).unwrap();
        let l = build_liouvillian(&s, &d, 1.0, None, DEFAULT_LIOUVILLIAN_CAP).unwrap();
        let sp = qome_spectrum(&l, Default::default()).unwrap();
        let pm = lba::pauli_matrix(&lba::thermal_rates(&s, &d, 1.0).unwrap(), &s).unwrap();
        let t = lba::thermalization_times(&pm).unwrap();
        let deg = model::degeneracy_report(s.energies(), 1e-9);
        let report = compare(&t, &sp, deg);
        assert!(report.agree_p && report.agree_q);
        assert!(!report.flags.multiple_steady_states);
        assert_eq!(report.flags.tau_p_depends_on_n, None);

        let mut series = vec![(1, report.clone()), (1, report)];
        flag_series(&mut series);
        assert_eq!(series[0].1.flags.tau_q_not_one_over_n, None);
    }

    #[test]
    fn ratio_spread() {
        assert!(!ratio_varies(&[Some(1.0), Some(1.0 + 1e-9)]));
        assert!(ratio_varies(&[Some(1.0), Some(1.1)]));
        assert!(ratio_varies(&[Some(1.0), None]));
    }

    #[test]
    fn classification_of_synthetic_spectrum() {
        let eig = vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(-2.0, 0.0),
            Complex64::new(-2.0, 0.0),
            Complex64::new(-5.0, 0.0),
            Complex64::new(-3.0, 1.0),
            Complex64::new(-3.0, -1.0),
        ];
        let sp = classify_spectrum(eig, Default::default());
        assert_eq!(sp.zero_multiplicity, 1);
        assert_eq!(sp.tau_p, Some(0.5));
        assert_eq!(sp.tau_p_multiplicity, 2);
        assert!((sp.tau_q.unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(sp.eigenvalues[0], Complex64::ZERO);
    }
}
