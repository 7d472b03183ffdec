//! Qubit Hamiltonians, their spectra, dipole matrices and degeneracy
//! diagnostics.
//!
//! Units: ħ = k_B = 1. The coupling constant γ multiplies every squared
//! dipole element and defaults to 1.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Axis, CMatrix, RMatrix};

/// Relative tolerance used when no explicit degeneracy tolerance is given.
pub const DEFAULT_RELATIVE_TOL: f64 = 1e-9;

/// A system of `K` qubits with Hamiltonian `H` and dipole coupling `γ`.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitSystem {
    qubits: usize,
    hamiltonian: CMatrix,
    gamma: f64,
}

impl QubitSystem {
    pub fn new(qubits: usize, hamiltonian: CMatrix, gamma: f64) -> Result<Self> {
        if qubits == 0 || qubits >= usize::BITS as usize {
            return Err(Error::InvalidQubitCount(qubits));
        }
        let dim = 1usize << qubits;
        if hamiltonian.nrows() != dim || hamiltonian.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: hamiltonian.nrows().max(hamiltonian.ncols()),
            });
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "coupling constant must be positive, got {gamma}"
            )));
        }
        let scale = linalg::max_abs(&hamiltonian);
        let deviation = linalg::hermiticity_defect(&hamiltonian);
        if deviation > 1e-12 * scale {
            return Err(Error::NonHermitian { deviation });
        }
        Ok(Self {
            qubits,
            hamiltonian,
            gamma,
        })
    }

    /// `H = −Σ_i Γ_i σ_i^x`, one qubit per field strength.
    pub fn transverse_field(fields: &[f64], gamma: f64) -> Result<Self> {
        if fields.is_empty() {
            return Err(Error::InvalidQubitCount(0));
        }
        if let Some(&bad) = fields.iter().find(|&&g| !(g > 0.0 && g.is_finite())) {
            return Err(Error::NonPositiveField(bad));
        }
        let k = fields.len();
        let x = linalg::pauli(Axis::X);
        let dim = 1usize << k;
        let h = fields
            .iter()
            .enumerate()
            .fold(CMatrix::zeros(dim, dim), |acc, (i, &g)| {
                acc - linalg::embed(&x, i, k).map(|v| v * g)
            });
        Self::new(k, h, gamma)
    }

    pub fn from_json(spec: &HamiltonianJson, gamma: f64) -> Result<Self> {
        let h = spec.to_matrix()?;
        let dim = h.nrows();
        if !dim.is_power_of_two() || dim < 2 {
            return Err(Error::InvalidInput(format!(
                "Hamiltonian dimension {dim} is not 2^K with K >= 1"
            )));
        }
        Self::new(dim.trailing_zeros() as usize, h, gamma)
    }

    /// Hamiltonian of `copies` noninteracting replicas,
    /// `H⊗I⊗…⊗I + I⊗H⊗…⊗I + …`.
    pub fn replicate(&self, copies: usize) -> Result<Self> {
        if copies == 0 {
            return Err(Error::InvalidQubitCount(0));
        }
        let d = self.dim();
        let total = d.checked_pow(copies as u32).ok_or(Error::DimensionCap {
            dim: usize::MAX,
            cap: usize::MAX,
        })?;
        let mut h = CMatrix::zeros(total, total);
        for c in 0..copies {
            let left = d.pow(c as u32);
            let right = d.pow((copies - 1 - c) as u32);
            h += CMatrix::identity(left, left)
                .kronecker(&self.hamiltonian)
                .kronecker(&CMatrix::identity(right, right));
        }
        Self::new(self.qubits * copies, h, self.gamma)
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }

    pub fn hamiltonian(&self) -> &CMatrix {
        &self.hamiltonian
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

/// JSON form of a Hamiltonian: `{"dim": n, "re": [[...]], "im": [[...]]}`.
/// `im` may be omitted for real matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianJson {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    #[serde(default)]
    pub im: Option<Vec<Vec<f64>>>,
}

impl HamiltonianJson {
    pub fn to_matrix(&self) -> Result<CMatrix> {
        let n = self.dim;
        let check = |rows: &Vec<Vec<f64>>, part: &str| -> Result<()> {
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(Error::InvalidInput(format!(
                    "Hamiltonian '{part}' part must be {n}x{n}"
                )));
            }
            Ok(())
        };
        check(&self.re, "re")?;
        if let Some(im) = &self.im {
            check(im, "im")?;
        }
        Ok(CMatrix::from_fn(n, n, |r, c| {
            let im = self.im.as_ref().map_or(0.0, |m| m[r][c]);
            Complex64::new(self.re[r][c], im)
        }))
    }
}

/// Ascending energy levels together with the eigenbasis that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergySpectrum {
    energies: Vec<f64>,
    eigenbasis: CMatrix,
    degeneracy_tol: f64,
}

impl EnergySpectrum {
    /// Spectrum given directly in its own eigenbasis (identity basis).
    /// Levels must be sorted ascending; degeneracies are allowed here and
    /// checked by the consumers that need nondegeneracy.
    pub fn from_levels(energies: Vec<f64>, degeneracy_tol: Option<f64>) -> Result<Self> {
        if energies.is_empty() {
            return Err(Error::InvalidInput("empty spectrum".into()));
        }
        if energies.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidInput("non-finite energy level".into()));
        }
        if energies.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidInput(
                "energies must be sorted ascending".into(),
            ));
        }
        let tol = degeneracy_tol.unwrap_or_else(|| default_tolerance(&energies));
        let m = energies.len();
        Ok(Self {
            energies,
            eigenbasis: CMatrix::identity(m, m),
            degeneracy_tol: tol,
        })
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Columns are eigenvectors in the construction basis.
    pub fn eigenbasis(&self) -> &CMatrix {
        &self.eigenbasis
    }

    pub fn degeneracy_tol(&self) -> f64 {
        self.degeneracy_tol
    }

    pub fn check_nondegenerate(&self) -> Result<()> {
        for (i, w) in self.energies.windows(2).enumerate() {
            let gap = w[1] - w[0];
            if gap <= self.degeneracy_tol {
                return Err(Error::DegenerateSpectrum {
                    lower: i,
                    upper: i + 1,
                    gap,
                    tol: self.degeneracy_tol,
                });
            }
        }
        Ok(())
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.check_nondegenerate().is_ok()
    }
}

/// `1e-9 × (E_max − E_min)`.
pub fn default_tolerance(energies: &[f64]) -> f64 {
    let (lo, hi) = energies
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &e| {
            (lo.min(e), hi.max(e))
        });
    if energies.is_empty() {
        0.0
    } else {
        DEFAULT_RELATIVE_TOL * (hi - lo)
    }
}

/// Per-axis transition amplitudes `d^(h)_{m,n}` and squared dipole matrix
/// `D_{m,n} = γ Σ_h |d^(h)_{m,n}|²` (zero diagonal).
#[derive(Debug, Clone, PartialEq)]
pub struct DipoleData {
    amplitudes: [CMatrix; 3],
    squared: RMatrix,
    gamma: f64,
}

impl DipoleData {
    /// Builds dipole data from amplitudes already expressed in the energy
    /// eigenbasis.
    pub fn from_amplitudes(amplitudes: [CMatrix; 3], gamma: f64) -> Result<Self> {
        let m = amplitudes[0].nrows();
        for d in &amplitudes {
            if d.nrows() != m || d.ncols() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    found: d.nrows().max(d.ncols()),
                });
            }
            let deviation = linalg::hermiticity_defect(d);
            if deviation > 1e-10 * linalg::max_abs(d).max(1.0) {
                return Err(Error::NonHermitian { deviation });
            }
        }
        let squared = RMatrix::from_fn(m, m, |r, c| {
            if r == c {
                0.0
            } else {
                gamma * amplitudes.iter().map(|d| d[(r, c)].norm_sqr()).sum::<f64>()
            }
        });
        Ok(Self {
            amplitudes,
            squared,
            gamma,
        })
    }

    /// Squared dipole matrix without per-axis amplitudes; the amplitudes are
    /// set to zero. Only usable by the LBA path, which never reads them.
    pub fn from_squared(squared: RMatrix, gamma: f64) -> Result<Self> {
        let m = squared.nrows();
        if squared.ncols() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: squared.ncols(),
            });
        }
        for r in 0..m {
            for c in 0..m {
                let v = squared[(r, c)];
                if v < 0.0
                    || !v.is_finite()
                    || (v - squared[(c, r)]).abs() > 1e-12 * v.abs().max(1.0)
                {
                    return Err(Error::InvalidInput(
                        "squared dipole matrix must be symmetric, finite and nonnegative".into(),
                    ));
                }
            }
        }
        let mut squared = squared;
        squared.fill_diagonal(0.0);
        Ok(Self {
            amplitudes: std::array::from_fn(|_| CMatrix::zeros(m, m)),
            squared,
            gamma,
        })
    }

    pub fn dim(&self) -> usize {
        self.squared.nrows()
    }

    pub fn amplitude(&self, axis: Axis) -> &CMatrix {
        &self.amplitudes[axis.index()]
    }

    pub fn amplitudes(&self) -> &[CMatrix; 3] {
        &self.amplitudes
    }

    /// `D`, including the γ factor.
    pub fn squared(&self) -> &RMatrix {
        &self.squared
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

fn diagonalize_inner(sys: &QubitSystem, degeneracy_tol: Option<f64>) -> Result<EnergySpectrum> {
    if let Some(t) = degeneracy_tol {
        if !(t >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "negative degeneracy tolerance {t}"
            )));
        }
    }
    let (energies, eigenbasis) = linalg::hermitian_eigen(sys.hamiltonian());
    let tol = degeneracy_tol.unwrap_or_else(|| default_tolerance(&energies));
    Ok(EnergySpectrum {
        energies,
        eigenbasis,
        degeneracy_tol: tol,
    })
}

/// Diagonalizes `H`, requiring a nondegenerate spectrum: every adjacent gap
/// must exceed `degeneracy_tol` (default `1e-9 × (E_M − E_1)`).
pub fn diagonalize(sys: &QubitSystem, degeneracy_tol: Option<f64>) -> Result<EnergySpectrum> {
    let spec = diagonalize_inner(sys, degeneracy_tol)?;
    spec.check_nondegenerate()?;
    Ok(spec)
}

/// Like [`diagonalize`] but accepts degenerate spectra. The eigenbasis inside
/// a degenerate subspace is whatever the solver returns.
pub fn diagonalize_allowing_degeneracy(
    sys: &QubitSystem,
    degeneracy_tol: Option<f64>,
) -> Result<EnergySpectrum> {
    diagonalize_inner(sys, degeneracy_tol)
}

/// Transition amplitudes `⟨m| Σ_i σ_i^h |n⟩` in the eigenbasis of `spec`.
pub fn dipole_data(sys: &QubitSystem, spec: &EnergySpectrum) -> Result<DipoleData> {
    if spec.dim() != sys.dim() {
        return Err(Error::DimensionMismatch {
            expected: sys.dim(),
            found: spec.dim(),
        });
    }
    let u = spec.eigenbasis();
    let u_dag = u.adjoint();
    let amplitudes = Axis::ALL.map(|axis| &u_dag * linalg::spin_sum(axis, sys.qubits()) * u);
    DipoleData::from_amplitudes(amplitudes, sys.gamma())
}

/// Closed-form single spin `H = −Γσ^x`: levels `(−Γ, Γ)` with eigenvectors
/// `|+⟩`, `|−⟩`, and `D_{1,2} = 2γ`.
pub fn free_spin_system(field: f64, gamma: f64) -> Result<(EnergySpectrum, DipoleData)> {
    if !(field > 0.0 && field.is_finite()) {
        return Err(Error::NonPositiveField(field));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let eigenbasis = CMatrix::from_row_slice(2, 2, &[c(s, 0.), c(s, 0.), c(s, 0.), c(-s, 0.)]);
    let energies = vec![-field, field];
    let spectrum = EnergySpectrum {
        degeneracy_tol: default_tolerance(&energies),
        energies,
        eigenbasis,
    };
    let amplitudes = [
        CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]),
        CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., 1.), c(0., -1.), c(0., 0.)]),
        CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]),
    ];
    let dipoles = DipoleData::from_amplitudes(amplitudes, gamma)?;
    Ok((spectrum, dipoles))
}

/// Groups value indices into equality classes under `|x − y| ≤ tol`, closed
/// transitively. Classes are ordered by their smallest value.
pub(crate) fn equality_classes(values: &[f64], tol: f64) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut prev = f64::NAN;
    for &i in &order {
        let v = values[i];
        match classes.last_mut() {
            Some(cls) if v - prev <= tol => cls.push(i),
            _ => classes.push(vec![i]),
        }
        prev = v;
    }
    for cls in &mut classes {
        cls.sort_unstable();
    }
    classes
}

/// Ordered index pairs `(m, n)`, `m ≠ n`, sharing the gap `E_n − E_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct GapClass {
    /// Gap of the first pair in the class.
    pub gap: f64,
    pub pairs: Vec<(usize, usize)>,
}

/// Groups all ordered pairs `(m, n)` with `m ≠ n` by the gap `E_n − E_m`.
pub(crate) fn gap_classes(energies: &[f64], tol: f64) -> Vec<GapClass> {
    let m = energies.len();
    let pairs: Vec<(usize, usize)> = (0..m)
        .flat_map(|a| (0..m).filter(move |&b| b != a).map(move |b| (a, b)))
        .collect();
    let gaps: Vec<f64> = pairs
        .iter()
        .map(|&(a, b)| energies[b] - energies[a])
        .collect();
    equality_classes(&gaps, tol)
        .into_iter()
        .map(|cls| {
            let mut members: Vec<(usize, usize)> = cls.iter().map(|&i| pairs[i]).collect();
            members.sort_unstable();
            GapClass {
                gap: energies[members[0].1] - energies[members[0].0],
                pairs: members,
            }
        })
        .collect()
}

/// Level and gap degeneracy structure of a spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct DegeneracyReport {
    pub has_level_degeneracy: bool,
    pub has_gap_degeneracy: bool,
    /// Partition of level indices (0-based) into equal-energy classes.
    pub level_classes: Vec<Vec<usize>>,
    /// Partition of ordered pairs `(m, n)`, `m ≠ n`, by equal `E_n − E_m`.
    pub gap_classes: Vec<GapClass>,
    pub tol: f64,
}

pub fn degeneracy_report(energies: &[f64], tol: f64) -> DegeneracyReport {
    let level_classes = equality_classes(energies, tol);
    let gap_classes = gap_classes(energies, tol);
    DegeneracyReport {
        has_level_degeneracy: level_classes.iter().any(|c| c.len() > 1),
        has_gap_degeneracy: gap_classes.iter().any(|c| c.pairs.len() > 1),
        level_classes,
        gap_classes,
        tol,
    }
}
