use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::{format_sig, usage, CliError, Command, RunConfig, THREADS_ENV};
use crate::dynamics::{commutant_dimension, diagnose, kernel_report, propagate, steady_state_from};
use crate::entanglement::{concurrence, concurrence_series, partial_trace, sudden_birth, BirthClass};
use crate::error::Error;
use crate::model::{
    basis_label, basis_projector, devectorize, link_operator, liouvillian, Boundary, ChainSpec,
};
use crate::oracle::{self, THREE_SITE_LABELS};

pub const EVOLVE_COLUMNS_TAIL: &str = "trace_err,min_eig,excitation";
pub const SWEEP_HEADER: &str = "gamma,init,C_numeric,C_oracle,abs_err";
pub const CHECK_HEADER: &str = "boundary,rates,kernel_dim,commutant_dim,steady_state";

/// Executes a resolved configuration, writing its CSV output.
pub fn run(config: &RunConfig) -> Result<(), CliError> {
    let pool = thread_pool()?;
    pool.install(|| match config.command {
        Command::Evolve => run_evolve(config),
        Command::Steady => run_steady(config),
        Command::Sweep => run_sweep(config),
        Command::Check => run_check(config),
        Command::Reproduce => run_reproduce(config),
    })
}

fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var(THREADS_ENV) {
        let threads: usize = raw
            .trim()
            .parse()
            .ok()
            .filter(|&t| t > 0)
            .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
        builder = builder.num_threads(threads);
    }
    builder.build().map_err(usage)
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => {
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(p, text)?;
        }
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn rates_field(rates: &[f64]) -> String {
    rates.iter().map(|&r| format_sig(r)).collect::<Vec<_>>().join(";")
}

/// Uniform grid `0, dt, 2dt, …` up to `t_max`.
pub fn time_grid(t_max: f64, dt: f64) -> Vec<f64> {
    let steps = (t_max / dt + 1e-9).floor() as usize;
    (0..=steps).map(|k| k as f64 * dt).collect()
}

/// All site pairs, nearest neighbours first, then by first site.
pub fn ordered_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut pairs: Vec<(usize, usize)> =
        (1..=n).flat_map(|i| (i + 1..=n).map(move |j| (i, j))).collect();
    pairs.sort_by_key(|&(i, j)| (j - i, i));
    pairs
}

fn default_init(config: &RunConfig) -> String {
    config.initial_state.clone().unwrap_or_else(|| "e".repeat(config.n_sites))
}

fn numerical_or_usage(e: Error) -> CliError {
    match e {
        Error::GridTooCoarse(_) | Error::InvalidArgument(_) | Error::UnknownLabel(_) => usage(e),
        other => CliError::Numerical(other),
    }
}

/// Pair-concurrence time series with physicality diagnostics.
pub struct EvolveTable {
    pub pairs: Vec<(usize, usize)>,
    /// One CSV line per time, without trailing newline.
    pub rows: Vec<String>,
    pub births: Vec<((usize, usize), BirthClass)>,
}

impl EvolveTable {
    pub fn header(&self) -> String {
        let mut h = String::from("time");
        for (i, j) in &self.pairs {
            write!(h, ",C_{i}_{j}").unwrap();
        }
        write!(h, ",{EVOLVE_COLUMNS_TAIL}").unwrap();
        h
    }
}

pub fn evolve_table(
    spec: &ChainSpec,
    init: &str,
    t_max: f64,
    dt: f64,
    tol: f64,
    window: usize,
) -> Result<EvolveTable, CliError> {
    let gen = liouvillian(spec)?;
    let rho0 = basis_projector(init).map_err(usage)?;
    let times = time_grid(t_max, dt);
    let traj = propagate(&gen, &rho0, &times)?;
    let pairs = ordered_pairs(spec.n_sites());
    let series = concurrence_series(&traj, &pairs)?;
    let diags = (0..traj.len())
        .into_par_iter()
        .map(|k| diagnose(&traj.density_matrix(k)))
        .collect::<Result<Vec<_>, _>>()?;

    let rows = (0..traj.len())
        .map(|k| {
            let mut line = format_sig(times[k]);
            for &c in &series.values[k] {
                line.push(',');
                line.push_str(&format_sig(c));
            }
            let d = &diags[k];
            write!(
                line,
                ",{},{},{}",
                format_sig(d.trace_err),
                format_sig(d.min_eigenvalue),
                format_sig(d.excitation)
            )
            .unwrap();
            line
        })
        .collect();

    let births = pairs
        .iter()
        .map(|&p| Ok((p, sudden_birth(&series, p, tol, window).map_err(numerical_or_usage)?)))
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(EvolveTable { pairs, rows, births })
}

fn birth_summary(init: &str, births: &[((usize, usize), BirthClass)], tol: f64, window: usize) -> String {
    let mut out = String::new();
    for ((i, j), class) in births {
        let detail = match class {
            BirthClass::Sudden(t) => format!(" t*={}", format_sig(*t)),
            _ => String::new(),
        };
        writeln!(out, "{init} pair ({i},{j}): {}{detail} [tol={}, window={window}]", class.name(), format_sig(tol))
            .unwrap();
    }
    out
}

fn run_evolve(config: &RunConfig) -> Result<(), CliError> {
    let spec = config.chain()?;
    let init = default_init(config);
    let table = evolve_table(&spec, &init, config.t_max, config.dt, config.tol, config.window)?;
    let mut csv = table.header();
    csv.push('\n');
    for r in &table.rows {
        csv.push_str(r);
        csv.push('\n');
    }
    emit(config.output_path.as_deref(), &csv)?;
    let summary = birth_summary(&init, &table.births, config.tol, config.window);
    if config.output_path.is_some() {
        print!("{summary}");
    } else {
        eprint!("{summary}");
    }
    Ok(())
}

fn run_steady(config: &RunConfig) -> Result<(), CliError> {
    let spec = config.chain()?;
    let init = default_init(config);
    let gen = liouvillian(&spec)?;
    let report = steady_state_from(&gen, &basis_projector(&init).map_err(usage)?)?;
    let pairs = ordered_pairs(spec.n_sites());

    let mut header = String::from("init,boundary,rates,f_fit");
    let mut row = format!(
        "{init},{},{},{}",
        spec.boundary(),
        rates_field(spec.link_rates()),
        report.f_fit.map(format_sig).unwrap_or_default()
    );
    for &(i, j) in &pairs {
        write!(header, ",C_{i}_{j}").unwrap();
        let c = concurrence(&partial_trace(&report.steady_state, (i, j), spec.n_sites())?)?;
        write!(row, ",{}", format_sig(c)).unwrap();
    }
    header.push_str(",residual,kernel_dim,elapsed_T");
    write!(
        row,
        ",{},{},{}",
        format_sig(report.residual),
        report.kernel_dimension,
        format_sig(report.elapsed_t)
    )
    .unwrap();
    emit(config.output_path.as_deref(), &format!("{header}\n{row}\n"))
}

/// One `(init, γ)` cell of a steady-concurrence sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub gamma: f64,
    pub init: String,
    pub c_numeric: f64,
    pub c_oracle: f64,
}

impl SweepRow {
    pub fn abs_err(&self) -> f64 {
        (self.c_numeric - self.c_oracle).abs()
    }

    fn csv(&self) -> String {
        format!(
            "{},{},{},{},{}",
            format_sig(self.gamma),
            self.init,
            format_sig(self.c_numeric),
            format_sig(self.c_oracle),
            format_sig(self.abs_err())
        )
    }
}

/// Steady concurrence of pair (1,2) from each label at each γ, three-site
/// open chain, sorted by `(init, γ)`.
pub fn sweep_rows(labels: &[String], gammas: &[f64]) -> Result<Vec<SweepRow>, CliError> {
    let mut sorted: Vec<String> = labels.to_vec();
    sorted.sort();
    sorted.dedup();
    let cells: Vec<(String, f64)> = sorted
        .iter()
        .flat_map(|l| gammas.iter().map(move |&g| (l.clone(), g)))
        .collect();
    cells
        .into_par_iter()
        .map(|(init, gamma)| {
            let gen = liouvillian(&ChainSpec::open_three(gamma).map_err(usage)?)?;
            let report = steady_state_from(&gen, &basis_projector(&init).map_err(usage)?)?;
            let c_numeric = concurrence(&partial_trace(&report.steady_state, (1, 2), 3)?)?;
            let c_oracle = oracle::steady_concurrence(oracle::f_closed_form(&init, gamma).map_err(usage)?)?;
            Ok(SweepRow { gamma, init, c_numeric, c_oracle })
        })
        .collect()
}

fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut csv = format!("{SWEEP_HEADER}\n");
    for r in rows {
        csv.push_str(&r.csv());
        csv.push('\n');
    }
    csv
}

fn run_sweep(config: &RunConfig) -> Result<(), CliError> {
    if config.n_sites != 3 || config.boundary != Boundary::Open {
        return Err(CliError::Usage("sweep runs on the three-site open chain".into()));
    }
    let labels: Vec<String> = match &config.initial_state {
        Some(l) => vec![l.clone()],
        None => THREE_SITE_LABELS.iter().map(|s| s.to_string()).collect(),
    };
    let rows = sweep_rows(&labels, &config.gamma_grid.points())?;
    emit(config.output_path.as_deref(), &sweep_csv(&rows))
}

/// Kernel and commutant dimensions of a chain.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub kernel_dim: usize,
    pub commutant_dim: usize,
    /// Basis label of the unique steady state, `unique` if it is not a
    /// product state, `non-unique` if the kernel is degenerate.
    pub steady_state: String,
}

pub fn check_chain(spec: &ChainSpec) -> Result<CheckOutcome, CliError> {
    let gen = liouvillian(spec)?;
    let kernel = kernel_report(&gen)?;
    let links = (1..=spec.n_links())
        .map(|k| link_operator(k, spec))
        .collect::<Result<Vec<_>, _>>()?;
    let commutant_dim = commutant_dimension(&links)?;
    let steady_state = if kernel.dimension == 1 {
        let rho = devectorize(&kernel.basis[0])?;
        let rho = rho.scale(rho.trace().inv());
        let n = spec.n_sites();
        (0..spec.hilbert_dim())
            .find(|&k| {
                let mut proj = crate::linalg::ComplexMatrix::zeros(rho.rows(), rho.cols());
                proj[(k, k)] = num_complex::Complex64::new(1.0, 0.0);
                (&rho - &proj).max_abs() <= 1e-10
            })
            .map(|k| basis_label(k, n))
            .unwrap_or_else(|| "unique".to_string())
    } else {
        "non-unique".to_string()
    };
    Ok(CheckOutcome { kernel_dim: kernel.dimension, commutant_dim, steady_state })
}

fn run_check(config: &RunConfig) -> Result<(), CliError> {
    let spec = config.chain()?;
    let outcome = check_chain(&spec)?;
    let csv = format!(
        "{CHECK_HEADER}\n{},{},{},{},{}\n",
        spec.boundary(),
        rates_field(spec.link_rates()),
        outcome.kernel_dim,
        outcome.commutant_dim,
        outcome.steady_state
    );
    emit(config.output_path.as_deref(), &csv)
}

/// Initial states of each time-series figure.
pub const FIGURE_PANELS: [(&str, &[&str]); 3] =
    [("fig2.csv", &["eee"]), ("fig3.csv", &["eeg", "ege"]), ("fig4.csv", &["egg", "geg"])];
pub const SWEEP_FIGURE: &str = "fig5.csv";

fn run_reproduce(config: &RunConfig) -> Result<(), CliError> {
    let spec = config.chain()?;
    if spec.n_sites() != 3 || spec.boundary() != Boundary::Open {
        return Err(CliError::Usage("reproduce runs on the three-site open chain".into()));
    }
    let dir = config.output_path.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)?;

    for (file, inits) in FIGURE_PANELS {
        let mut csv = String::new();
        for (k, init) in inits.iter().enumerate() {
            let table = evolve_table(&spec, init, config.t_max, config.dt, config.tol, config.window)?;
            if k == 0 {
                writeln!(csv, "init,{}", table.header()).unwrap();
            }
            for r in &table.rows {
                writeln!(csv, "{init},{r}").unwrap();
            }
            print!("{}", birth_summary(init, &table.births, config.tol, config.window));
        }
        emit(Some(&dir.join(file)), &csv)?;
    }

    let labels: Vec<String> = THREE_SITE_LABELS.iter().map(|s| s.to_string()).collect();
    let rows = sweep_rows(&labels, &config.gamma_grid.points())?;
    emit(Some(&dir.join(SWEEP_FIGURE)), &sweep_csv(&rows))?;
    println!("wrote {} figure files to {}", FIGURE_PANELS.len() + 1, dir.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_order() {
        assert_eq!(ordered_pairs(3), vec![(1, 2), (2, 3), (1, 3)]);
        assert_eq!(ordered_pairs(4), vec![(1, 2), (2, 3), (3, 4), (1, 3), (2, 4), (1, 4)]);
    }

    #[test]
    fn grid() {
        let g = time_grid(20.0, 0.01);
        assert_eq!(g.len(), 2001);
        assert_eq!(g[0], 0.0);
        assert!((g[2000] - 20.0).abs() < 1e-12);
        assert_eq!(time_grid(0.3, 0.1).len(), 4);
    }

    #[test]
    fn evolve_header_three_sites() {
        let spec = ChainSpec::open_three(0.5).unwrap();
        let t = evolve_table(&spec, "ege", 0.2, 0.01, 1e-6, 5).unwrap();
        assert_eq!(t.header(), "time,C_1_2,C_2_3,C_1_3,trace_err,min_eig,excitation");
        assert_eq!(t.rows.len(), 21);
        assert!(t.rows[0].starts_with("0,0,0,0,0,"));
    }

    #[test]
    fn closed_chain_check() {
        let outcome = check_chain(&ChainSpec::closed_three(0.3, 0.5, 0.2).unwrap()).unwrap();
        assert_eq!(outcome.kernel_dim, 1);
        assert_eq!(outcome.steady_state, "ggg");
        assert!(outcome.commutant_dim >= 4);

        let open = check_chain(&ChainSpec::open_three(0.5).unwrap()).unwrap();
        assert_eq!(open.steady_state, "non-unique");
    }
}
