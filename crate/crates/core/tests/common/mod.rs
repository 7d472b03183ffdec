#![allow(dead_code)]

use bbtherm::linalg::CMatrix;
use bbtherm::model::{self, DipoleData, EnergySpectrum};
use num_complex::Complex64;
use rand::Rng;

/// `Γ_i = 1 + sin((i−1)π/√2)/2` for `i = 1..n`.
pub fn modulated_fields(n: usize) -> Vec<f64> {
    let step = std::f64::consts::PI / std::f64::consts::SQRT_2;
    (0..n)
        .map(|i| 1.0 + (i as f64 * step).sin() / 2.0)
        .collect()
}

fn random_hermitian<R: Rng>(rng: &mut R, m: usize) -> CMatrix {
    let mut a = CMatrix::zeros(m, m);
    for r in 0..m {
        a[(r, r)] = rng.random_range(-1.0..1.0).into();
        for c in r + 1..m {
            let z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            a[(r, c)] = z;
            a[(c, r)] = z.conj();
        }
    }
    a
}

/// Random `m`-level system whose levels and gaps are all distinct.
pub fn random_system<R: Rng>(rng: &mut R, m: usize) -> (EnergySpectrum, DipoleData) {
    loop {
        let mut e: Vec<f64> = (0..m).map(|_| rng.random_range(-2.0..2.0)).collect();
        e.sort_by(f64::total_cmp);
        let tol = 1e-3 * (e[m - 1] - e[0]);
        let report = model::degeneracy_report(&e, tol);
        if report.has_level_degeneracy || report.has_gap_degeneracy {
            continue;
        }
        let spectrum = EnergySpectrum::from_levels(e, None).unwrap();
        let amps = [
            random_hermitian(rng, m),
            random_hermitian(rng, m),
            random_hermitian(rng, m),
        ];
        let gamma = rng.random_range(0.5..2.0);
        return (spectrum, DipoleData::from_amplitudes(amps, gamma).unwrap());
    }
}

/// Random full-rank density matrix `G G† / tr(G G†)`.
pub fn random_density<R: Rng>(rng: &mut R, m: usize) -> CMatrix {
    let g = CMatrix::from_fn(m, m, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    let rho = &g * g.adjoint();
    let tr = rho.trace();
    rho / tr
}

/// Absolute tolerance of one unit in the last digit of a printed decimal.
pub fn last_digit_unit(printed: &str) -> f64 {
    let decimals = printed.split('.').nth(1).map_or(0, str::len);
    10f64.powi(-(decimals as i32))
}

pub fn within_last_digit(value: f64, printed: &str) -> bool {
    let target: f64 = printed.parse().unwrap();
    (value - target).abs() <= last_digit_unit(printed) * (1.0 + 1e-9)
}
