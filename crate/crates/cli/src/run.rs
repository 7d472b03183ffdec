//! Orchestration of `analyze`, `table1` and `sweep`.

use std::time::Instant;

use bbtherm::ensemble::{self, EnsembleMember, EnsembleSpec, EnsembleTimes, NumericOptions};
use bbtherm::model::{self, free_spin_system, QubitSystem};
use bbtherm::qome::{self, ClassificationTols, QomeAnalysis};
use rayon::prelude::*;

use crate::config::{Family, GridKey, Method, RunConfig};
use crate::error::{CliError, Result};
use crate::report::{Record, Table1Row};

/// Runs `f`, returning its value and the elapsed wall-clock seconds.
fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let value = f();
    (value, start.elapsed().as_secs_f64())
}

fn spin_members(fields: &[f64], gamma: f64) -> Result<Vec<EnsembleMember>> {
    // equal fields share one member with a count
    let mut members: Vec<(f64, usize)> = Vec::new();
    for &g in fields {
        match members.iter_mut().find(|(f, _)| *f == g) {
            Some((_, count)) => *count += 1,
            None => members.push((g, 1)),
        }
    }
    members
        .into_iter()
        .map(|(g, count)| {
            let (spectrum, dipoles) = free_spin_system(g, gamma)?;
            Ok(EnsembleMember {
                spectrum,
                dipoles,
                count,
            })
        })
        .collect()
}

fn custom_member(
    sys: &QubitSystem,
    count: usize,
    energy_tol: Option<f64>,
) -> Result<EnsembleMember> {
    let spectrum = model::diagonalize(sys, energy_tol)?;
    let dipoles = model::dipole_data(sys, &spectrum)?;
    Ok(EnsembleMember {
        spectrum,
        dipoles,
        count,
    })
}

struct Outcome {
    tau_p: Option<f64>,
    tau_q: Option<f64>,
    tau: Option<f64>,
    zero_multiplicity: Option<usize>,
}

impl From<EnsembleTimes> for Outcome {
    fn from(t: EnsembleTimes) -> Self {
        Self {
            tau_p: Some(t.tau_p),
            tau_q: Some(t.tau_q),
            tau: Some(t.tau),
            zero_multiplicity: None,
        }
    }
}

impl From<QomeAnalysis> for Outcome {
    fn from(a: QomeAnalysis) -> Self {
        Self {
            tau_p: a.spectrum.tau_p,
            tau_q: a.spectrum.tau_q,
            tau: a.spectrum.tau(),
            zero_multiplicity: Some(a.spectrum.zero_multiplicity),
        }
    }
}

fn solve(
    cfg: &RunConfig,
    n: usize,
    method: Method,
    beta: f64,
    field: Option<f64>,
) -> Result<Outcome> {
    let gamma = cfg.gamma;
    let energy_tol = cfg.tolerances.energy;
    let context = format!("{} with N={n}", method.as_str());
    let wrap = |e: bbtherm::Error| CliError::from_compute(e, &context);
    let tols = ClassificationTols {
        zero: cfg.tolerances.zero,
        imag: cfg.tolerances.imag,
    };
    let numeric = NumericOptions {
        max_dim: cfg.caps.numeric,
        lanczos_tol: cfg.tolerances.lanczos,
        ..Default::default()
    };
    let outcome = match (cfg.family, method) {
        (Family::CustomHamiltonian, Method::Qome) => {
            let sys = cfg.custom_system()?.replicate(n).map_err(wrap)?;
            qome::analyze_system(&sys, beta, energy_tol, cfg.caps.qome, tols)
                .map_err(wrap)?
                .into()
        }
        (Family::CustomHamiltonian, lba) => {
            let member = custom_member(&cfg.custom_system()?, n, energy_tol)?;
            let spec = EnsembleSpec::new(vec![member], beta).map_err(wrap)?;
            match lba {
                Method::LbaAnalytic => ensemble::ensemble_times(&spec),
                _ => ensemble::numeric_times(&spec, numeric),
            }
            .map_err(wrap)?
            .into()
        }
        (_, Method::LbaAnalytic) => ensemble::free_spins_times(&cfg.fields(n, field), beta, gamma)
            .map_err(wrap)?
            .into(),
        (_, Method::LbaNumeric) => {
            let spec = EnsembleSpec::new(spin_members(&cfg.fields(n, field), gamma)?, beta)
                .map_err(wrap)?;
            ensemble::numeric_times(&spec, numeric)
                .map_err(wrap)?
                .into()
        }
        (_, Method::Qome) => {
            let sys = QubitSystem::transverse_field(&cfg.fields(n, field), gamma).map_err(wrap)?;
            qome::analyze_system(&sys, beta, energy_tol, cfg.caps.qome, tols)
                .map_err(wrap)?
                .into()
        }
    };
    Ok(outcome)
}

fn record(
    cfg: &RunConfig,
    n: usize,
    method: Method,
    beta: f64,
    field: Option<f64>,
) -> Result<Record> {
    let (outcome, secs) = timed(|| solve(cfg, n, method, beta, field));
    let o = outcome?;
    Ok(Record {
        n,
        method,
        beta,
        gamma: cfg.gamma,
        field: cfg.reported_field(field),
        tau_p: o.tau_p,
        tau_q: o.tau_q,
        tau: o.tau,
        zero_multiplicity: o.zero_multiplicity,
        wall_seconds: cfg.record_timing.then_some(secs),
    })
}

/// One record per `(N, method)` in configuration order.
pub fn analyze(cfg: &RunConfig) -> Result<Vec<Record>> {
    cfg.validate()?;
    let beta = cfg.beta.expect("validated");
    let jobs: Vec<(usize, Method)> = cfg
        .counts()
        .into_iter()
        .flat_map(|n| cfg.methods.iter().map(move |&m| (n, m)))
        .collect();
    jobs.par_iter()
        .map(|&(n, m)| record(cfg, n, m, beta, None))
        .collect()
}

/// One record per grid point, `N` and method, sorted by grid value.
pub fn sweep(cfg: &RunConfig) -> Result<(GridKey, Vec<Record>)> {
    let (key, mut values) = cfg.validate_sweep()?;
    values.sort_by(f64::total_cmp);
    let jobs: Vec<(f64, usize, Method)> = values
        .iter()
        .flat_map(|&v| {
            cfg.counts()
                .into_iter()
                .flat_map(move |n| cfg.methods.iter().map(move |&m| (v, n, m)))
        })
        .collect();
    let records = jobs
        .par_iter()
        .map(|&(v, n, m)| match key {
            GridKey::Beta => record(cfg, n, m, v, None),
            GridKey::Field => record(cfg, n, m, cfg.beta.expect("validated"), Some(v)),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((key, records))
}

#[derive(Debug, Clone)]
pub struct Table1Options {
    pub max_qome_n: usize,
    pub energy_tol: Option<f64>,
    pub qome_cap: usize,
    pub record_timing: bool,
}

impl Default for Table1Options {
    fn default() -> Self {
        Self {
            max_qome_n: 6,
            energy_tol: None,
            qome_cap: qome::DEFAULT_LIOUVILLIAN_CAP,
            record_timing: true,
        }
    }
}

pub const TABLE1_BETA: f64 = 1.0;
pub const TABLE1_GAMMA: f64 = 1.0;
pub const TABLE1_NUMERIC_MAX_N: usize = 13;
pub const TABLE1_LARGE_N: [usize; 4] = [100, 1000, 10000, 100000];

fn table1_fields(n: usize) -> Vec<f64> {
    crate::config::FieldLaw::default().fields(n)
}

fn show(x: Option<f64>) -> String {
    x.map(crate::report::sig5).unwrap_or_else(|| "-".into())
}

/// Describes how `tol` changes the degeneracy classes relative to the
/// default tolerance, or `None` when it does not.
fn tolerance_effect(energies: &[f64], tol: f64) -> Option<String> {
    let reference = model::degeneracy_report(energies, model::default_tolerance(energies));
    let current = model::degeneracy_report(energies, tol);
    let same_gaps = current.gap_classes.len() == reference.gap_classes.len()
        && current
            .gap_classes
            .iter()
            .zip(&reference.gap_classes)
            .all(|(a, b)| a.pairs == b.pairs);
    if current.level_classes == reference.level_classes && same_gaps {
        return None;
    }
    let merged_levels = reference
        .level_classes
        .len()
        .saturating_sub(current.level_classes.len());
    let merged_gaps = reference
        .gap_classes
        .len()
        .saturating_sub(current.gap_classes.len());
    Some(format!(
        "energy tolerance {tol} merges {merged_levels} level classes and {merged_gaps} gap classes"
    ))
}

fn qome_columns(n: usize, opts: &Table1Options, row: &mut Table1Row) -> Result<()> {
    let dim = 1usize << (2 * n);
    if dim > opts.qome_cap {
        row.warnings.push(format!(
            "qome skipped: dimension {dim} exceeds cap {}",
            opts.qome_cap
        ));
        return Ok(());
    }
    let sys = QubitSystem::transverse_field(&table1_fields(n), TABLE1_GAMMA)?;
    let tols = ClassificationTols::default();
    let solve =
        |tol: Option<f64>| qome::analyze_system(&sys, TABLE1_BETA, tol, opts.qome_cap, tols);

    let mut altered = false;
    if let Some(tol) = opts.energy_tol {
        let energies = model::diagonalize_allowing_degeneracy(&sys, None)?
            .energies()
            .to_vec();
        if let Some(note) = tolerance_effect(&energies, tol) {
            row.warnings.push(note);
            altered = true;
        }
    }

    let (analysis, secs) = timed(|| solve(opts.energy_tol));
    row.qome_cpu_s = opts.record_timing.then_some(secs);
    let analysis = match analysis {
        Ok(a) => Some(a),
        Err(bbtherm::Error::NoDissipativeEigenvalue) => {
            row.warnings
                .push("qome spectrum has no dissipative eigenvalue".into());
            None
        }
        Err(e) => return Err(CliError::from_compute(e, "table1 qome")),
    };
    if let Some(a) = &analysis {
        row.qome_tau_p = a.spectrum.tau_p;
        row.qome_tau_q = a.spectrum.tau_q;
        if a.spectrum.zero_multiplicity > 1 {
            row.warnings.push(format!(
                "qome zero eigenvalue multiplicity {}",
                a.spectrum.zero_multiplicity
            ));
        }
    }

    if altered {
        let baseline = solve(None).map_err(|e| CliError::from_compute(e, "table1 qome"))?;
        let (p, q) = (baseline.spectrum.tau_p, baseline.spectrum.tau_q);
        if (p, q) != (row.qome_tau_p, row.qome_tau_q) {
            row.warnings.push(format!(
                "qome times differ from default tolerance: tauP {} -> {}, tauQ {} -> {}",
                show(p),
                show(row.qome_tau_p),
                show(q),
                show(row.qome_tau_q),
            ));
        }
    }
    Ok(())
}

fn table1_row(n: usize, opts: &Table1Options) -> Result<Table1Row> {
    let fields = table1_fields(n);
    let analytic = ensemble::free_spins_times(&fields, TABLE1_BETA, TABLE1_GAMMA)?;
    let mut row = Table1Row {
        n,
        lba_tau_p: analytic.tau_p,
        lba_tau_q: analytic.tau_q,
        ..Default::default()
    };
    if n <= TABLE1_NUMERIC_MAX_N {
        let spec = EnsembleSpec::new(spin_members(&fields, TABLE1_GAMMA)?, TABLE1_BETA)?;
        let (numeric, secs) = timed(|| ensemble::numeric_times(&spec, NumericOptions::default()));
        let numeric = numeric.map_err(|e| CliError::from_compute(e, "table1 numeric"))?;
        row.lba_num_tau_p = Some(numeric.tau_p);
        row.lba_num_tau_q = Some(numeric.tau_q);
        row.lba_cpu_s = opts.record_timing.then_some(secs);
    }
    if n <= opts.max_qome_n {
        qome_columns(n, opts, &mut row)?;
    }
    Ok(row)
}

/// Rows `N = 1..13` with every column that applies, then the analytic rows
/// for `N ∈ {100, 1000, 10000, 100000}`.
pub fn table1(opts: &Table1Options) -> Result<Vec<Table1Row>> {
    if let Some(tol) = opts.energy_tol {
        if !(tol >= 0.0 && tol.is_finite()) {
            return Err(CliError::Config(format!(
                "energy tolerance must be nonnegative, got {tol}"
            )));
        }
    }
    let ns: Vec<usize> = (1..=TABLE1_NUMERIC_MAX_N.max(opts.max_qome_n))
        .chain(TABLE1_LARGE_N)
        .collect();
    ns.par_iter().map(|&n| table1_row(n, opts)).collect()
}
