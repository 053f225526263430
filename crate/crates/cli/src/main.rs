//! Command-line front end: parses interchange matrices, wraps the library
//! operations as subcommands, runs seeded ensemble audits, and emits
//! deterministic reports in table, csv, or json-lines form.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use qim::audit::{run_audit, AuditConfig};
use qim::expansional::{
    dyson_series, perturbed_state, perturbed_weight, relative_hamiltonian, sandwich_bounds,
    form_bound_margin, Perturbation,
};
use qim::geometry::{
    geodesic, kullback_inequality_check, relative_entropy, separation_demo,
    symmetrized_entropy_identity, trace_norm_bound_check, Connection, GeodesicSpec,
};
use qim::norms::{araki_norm, operator_norm, trace_norm, NormReport};
use qim::operator::{parse_matrix, write_matrix, HermitianOperator};
use qim::weight::{
    certified_constant, nearby_constant, p_nearby_margin, DensityState, FiniteWeight,
    NearbyCertificate,
};
use qim::{Error, Result};

const EXIT_OK: u8 = 0;
const EXIT_AUDIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(
    name = "qim",
    version,
    about = "Norms, perturbations, entropies, and audits for faithful finite-dimensional states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Seed for the audit ensembles.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Tolerance for order comparisons and identity checks.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,

    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,

    /// Series truncation order.
    #[arg(long, global = true, default_value_t = 20)]
    order: usize,

    /// Inclusive dimension range audit instances are drawn from, as `lo..hi`.
    #[arg(long, global = true, default_value = "2..8", value_parser = parse_dims)]
    dims: (usize, usize),

    /// Instances per audit section.
    #[arg(long, global = true, default_value_t = 500)]
    instances: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Csv,
    JsonLines,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ConnectionArg {
    Plus,
    Minus,
}

#[derive(Subcommand)]
enum Command {
    /// Norms of a Hermitian matrix relative to a faithful base weight.
    Norms {
        /// Matrix file for X.
        x_file: PathBuf,
        /// Matrix file for the base weight.
        base_file: PathBuf,
        /// Exponent of the relative-boundedness norm, in [0, 1/2].
        #[arg(long, default_value_t = 0.25)]
        epsilon: f64,
        /// Exponent of the Schatten norm.
        #[arg(long, default_value_t = 2.0)]
        schatten_p: f64,
    },
    /// Minimal nearby constant and certified order bounds for a state pair.
    Nearby {
        rho_file: PathBuf,
        sigma_file: PathBuf,
        /// Certificate exponent to verify, in [0, 1).
        #[arg(long, default_value_t = 0.0)]
        p: f64,
    },
    /// Perturbed state exp(log rho - X) with free energy and bound verdicts.
    Perturb {
        base_file: PathBuf,
        x_file: PathBuf,
    },
    /// Truncated expansion of the perturbed weight with its tail bound.
    Expand {
        base_file: PathBuf,
        x_file: PathBuf,
    },
    /// Relative entropies, trace distance, and the entropy inequalities.
    Entropy {
        rho_file: PathBuf,
        sigma_file: PathBuf,
    },
    /// Point on the mixture or exponential geodesic between two states.
    Geodesic {
        rho0_file: PathBuf,
        rho1_file: PathBuf,
        /// Curve parameter in [0, 1].
        #[arg(long)]
        lambda: f64,
        #[arg(long, value_enum, default_value_t = ConnectionArg::Minus)]
        connection: ConnectionArg,
    },
    /// Seeded ensemble audit of every inequality and identity.
    Audit,
    /// Trace-distance versus relative-entropy separation table.
    Separation {
        /// Largest dimension; rows run over powers of two from 4.
        #[arg(long, default_value_t = 1024)]
        nmax: usize,
    },
}

fn parse_dims(text: &str) -> std::result::Result<(usize, usize), String> {
    let part = |s: &str| {
        s.trim()
            .parse::<usize>()
            .map_err(|e| format!("bad dimension {s:?}: {e}"))
    };
    let (lo, hi) = match text.split_once("..") {
        Some((lo, hi)) => (part(lo)?, part(hi)?),
        None => {
            let v = part(text)?;
            (v, v)
        }
    };
    if lo < 2 || lo > hi {
        return Err(format!("need 2 <= lo <= hi, got {lo}..{hi}"));
    }
    Ok((lo, hi))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{err}");
            return ExitCode::from(EXIT_OK);
        }
        Err(err) => {
            eprint!("{err}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    match run(&cli) {
        Ok((output, code)) => {
            print!("{output}");
            ExitCode::from(code)
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

/// Dispatches after global validation; every command accumulates its whole
/// report before anything is printed, so a failed parse emits no partial
/// output.
fn run(cli: &Cli) -> Result<(String, u8)> {
    if !cli.tol.is_finite() || cli.tol <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "tol",
            reason: format!("must be finite and positive, got {}", cli.tol),
        });
    }
    match &cli.command {
        Command::Norms { x_file, base_file, epsilon, schatten_p } => {
            cmd_norms(cli, x_file, base_file, *epsilon, *schatten_p)
        }
        Command::Nearby { rho_file, sigma_file, p } => cmd_nearby(cli, rho_file, sigma_file, *p),
        Command::Perturb { base_file, x_file } => cmd_perturb(cli, base_file, x_file),
        Command::Expand { base_file, x_file } => cmd_expand(cli, base_file, x_file),
        Command::Entropy { rho_file, sigma_file } => cmd_entropy(cli, rho_file, sigma_file),
        Command::Geodesic { rho0_file, rho1_file, lambda, connection } => {
            cmd_geodesic(cli, rho0_file, rho1_file, *lambda, *connection)
        }
        Command::Audit => cmd_audit(cli),
        Command::Separation { nmax } => cmd_separation(cli, *nmax),
    }
}

fn load_operator(path: &Path) -> Result<HermitianOperator> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    parse_matrix(&text).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

fn load_weight(path: &Path) -> Result<FiniteWeight> {
    FiniteWeight::new(load_operator(path)?)
}

fn load_state(path: &Path) -> Result<DensityState> {
    DensityState::from_operator(load_operator(path)?)
}

/// Fixed-width scientific rendering keeps reports byte-stable across runs.
fn fnum(value: f64) -> String {
    format!("{value:.12e}")
}

fn push_matrix(out: &mut String, role: &str, op: &HermitianOperator) {
    out.push_str(role);
    out.push(' ');
    out.push_str(&write_matrix(op));
    out.push('\n');
}

/// Tabular report with one emission path per format.
struct Table {
    headers: &'static [&'static str],
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(headers: &'static [&'static str]) -> Self {
        Self { headers, rows: Vec::new() }
    }

    fn kv(&mut self, key: &str, value: String) {
        self.push(vec![key.to_string(), value]);
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    fn emit(&self, format: Format, out: &mut String) {
        match format {
            Format::Table => self.emit_table(out),
            Format::Csv => self.emit_csv(out),
            Format::JsonLines => self.emit_json_lines(out),
        }
    }

    fn emit_table(&self, out: &mut String) {
        let mut widths: Vec<usize> = self.headers.iter().map(|h| h.len()).collect();
        for row in &self.rows {
            for (width, cell) in widths.iter_mut().zip(row) {
                *width = (*width).max(cell.len());
            }
        }
        let header: Vec<String> = self.headers.iter().map(|h| h.to_string()).collect();
        write_aligned(out, &header, &widths);
        for row in &self.rows {
            write_aligned(out, row, &widths);
        }
    }

    fn emit_csv(&self, out: &mut String) {
        let join = |cells: &[String]| {
            cells.iter().map(|c| csv_field(c)).collect::<Vec<_>>().join(",")
        };
        let header: Vec<String> = self.headers.iter().map(|h| h.to_string()).collect();
        out.push_str(&join(&header));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&join(row));
            out.push('\n');
        }
    }

    fn emit_json_lines(&self, out: &mut String) {
        for row in &self.rows {
            let fields: Vec<String> = self
                .headers
                .iter()
                .zip(row)
                .map(|(header, value)| format!("{}:{}", json_string(header), json_string(value)))
                .collect();
            out.push('{');
            out.push_str(&fields.join(","));
            out.push_str("}\n");
        }
    }
}

fn write_aligned(out: &mut String, cells: &[String], widths: &[usize]) {
    for (idx, cell) in cells.iter().enumerate() {
        if idx > 0 {
            out.push_str("  ");
        }
        out.push_str(cell);
        if idx + 1 < cells.len() {
            for _ in cell.len()..widths[idx] {
                out.push(' ');
            }
        }
    }
    out.push('\n');
}

fn csv_field(text: &str) -> String {
    if text.contains([',', '"', '\n']) {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_string()
    }
}

fn json_string(text: &str) -> String {
    let mut quoted = String::with_capacity(text.len() + 2);
    quoted.push('"');
    for ch in text.chars() {
        match ch {
            '"' => quoted.push_str("\\\""),
            '\\' => quoted.push_str("\\\\"),
            '\n' => quoted.push_str("\\n"),
            '\r' => quoted.push_str("\\r"),
            '\t' => quoted.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                quoted.push_str(&format!("\\u{:04x}", c as u32));
            }
            c => quoted.push(c),
        }
    }
    quoted.push('"');
    quoted
}

fn cmd_norms(
    cli: &Cli,
    x_file: &Path,
    base_file: &Path,
    epsilon: f64,
    schatten_p: f64,
) -> Result<(String, u8)> {
    let x = load_operator(x_file)?;
    let base = load_weight(base_file)?;
    let report = NormReport::compute(&x, &base, epsilon, schatten_p)?;
    let mut table = Table::new(&["quantity", "value"]);
    for (name, value) in report.rows() {
        table.kv(name, fnum(value));
    }
    // Same chain rule as the audit's norm_chain section.
    let slack = 1e-12 * report.araki_norm.max(1.0);
    let chain = report.operator_norm <= report.araki_norm + slack
        && report.bkm_norm <= report.araki_norm + slack;
    table.kv("norm_chain_holds", chain.to_string());
    let mut out = String::new();
    table.emit(cli.format, &mut out);
    Ok((out, EXIT_OK))
}

fn cmd_nearby(cli: &Cli, rho_file: &Path, sigma_file: &Path, p: f64) -> Result<(String, u8)> {
    let rho = load_state(rho_file)?;
    let sigma = load_state(sigma_file)?;
    let c_star = nearby_constant(&rho, &sigma)?;
    let cert = NearbyCertificate::new(certified_constant(c_star), p)?;
    let nearby_margin = p_nearby_margin(&rho, &sigma, &cert)?;
    let hamiltonian = relative_hamiltonian(rho.weight(), sigma.weight())?;
    let log_norm = operator_norm(&hamiltonian)?;
    // Same rules as the audit's hamiltonian_bound and form_bound sections.
    let log_margin = c_star.ln() + cli.tol - log_norm;
    let form_margin = form_bound_margin(&rho, &sigma, &cert)?;

    let mut table = Table::new(&["quantity", "value"]);
    table.kv("minimal_constant", fnum(c_star));
    table.kv("certificate_constant", fnum(cert.constant()));
    table.kv("exponent_p", fnum(p));
    table.kv("nearby_margin", fnum(nearby_margin));
    table.kv("nearby_holds", (nearby_margin >= -cli.tol).to_string());
    table.kv("hamiltonian_norm", fnum(log_norm));
    table.kv("hamiltonian_margin", fnum(log_margin));
    table.kv("hamiltonian_holds", (log_margin >= 0.0).to_string());
    table.kv("form_bound_margin", fnum(form_margin));
    table.kv("form_bound_holds", (form_margin >= -cli.tol).to_string());
    let mut out = String::new();
    table.emit(cli.format, &mut out);
    Ok((out, EXIT_OK))
}

fn cmd_perturb(cli: &Cli, base_file: &Path, x_file: &Path) -> Result<(String, u8)> {
    let base = load_weight(base_file)?;
    let x = load_operator(x_file)?;
    let pert = Perturbation::new(base.clone(), x)?;
    let (state, free_energy) = perturbed_state(&pert)?;
    let sandwich = sandwich_bounds(&pert, cli.tol)?;
    let araki_m = araki_norm(pert.x(), &base)?;

    let mut table = Table::new(&["quantity", "value"]);
    table.kv("psi", fnum(free_energy.psi));
    table.kv("z", fnum(free_energy.z));
    table.kv("araki_m", fnum(araki_m));
    table.kv("sandwich_lower", fnum(sandwich.lower));
    table.kv("sandwich_upper", fnum(sandwich.upper));
    table.kv("sandwich_lower_margin", fnum(sandwich.lower_margin));
    table.kv("sandwich_upper_margin", fnum(sandwich.upper_margin));
    table.kv("sandwich_holds", sandwich.holds.to_string());

    // Over a unit-trace base the entropy verdicts replay audit artifacts
    // under the same rules the audit applied.
    if (base.trace() - 1.0).abs() <= qim::TRACE_TOL {
        let rho = DensityState::new(base.clone())?;
        let (lhs, rhs) = symmetrized_entropy_identity(&rho, &pert)?;
        let err = (lhs - rhs).abs();
        let identity_margin = cli.tol * lhs.abs().max(1.0) - err;
        table.kv("identity_lhs", fnum(lhs));
        table.kv("identity_rhs", fnum(rhs));
        table.kv("identity_margin", fnum(identity_margin));
        table.kv("identity_holds", (identity_margin >= 0.0).to_string());
        let bound = trace_norm_bound_check(&rho, &pert)?;
        table.kv("trace_bound_lhs", fnum(bound.lhs));
        table.kv("trace_bound_rhs", fnum(bound.rhs));
        table.kv("trace_bound_holds", bound.holds.to_string());
    }

    let mut out = String::new();
    table.emit(cli.format, &mut out);
    push_matrix(&mut out, "state", state.op());
    Ok((out, EXIT_OK))
}

fn cmd_expand(cli: &Cli, base_file: &Path, x_file: &Path) -> Result<(String, u8)> {
    let base = load_weight(base_file)?;
    let x = load_operator(x_file)?;
    let pert = Perturbation::new(base, x)?;
    let expansion = dyson_series(&pert, cli.order)?;
    let exact = perturbed_weight(&pert)?;
    let achieved = operator_norm(&expansion.partial_sum.sub(exact.op())?)?;

    let mut table = Table::new(&["quantity", "value"]);
    table.kv("order", expansion.truncation_order.to_string());
    table.kv("araki_m", fnum(expansion.araki_m));
    table.kv("remainder_bound", fnum(expansion.remainder_bound));
    table.kv("achieved_error", fnum(achieved));
    table.kv(
        "within_bound",
        (achieved <= expansion.remainder_bound + cli.tol).to_string(),
    );
    let mut out = String::new();
    table.emit(cli.format, &mut out);
    push_matrix(&mut out, "partial_sum", &expansion.partial_sum);
    Ok((out, EXIT_OK))
}

fn cmd_entropy(cli: &Cli, rho_file: &Path, sigma_file: &Path) -> Result<(String, u8)> {
    let rho = load_state(rho_file)?;
    let sigma = load_state(sigma_file)?;
    let forward = relative_entropy(&rho, &sigma)?;
    let backward = relative_entropy(&sigma, &rho)?;
    let distance = trace_norm(&rho.op().sub(sigma.op())?)?;
    let kullback = kullback_inequality_check(&rho, &sigma)?;
    let hamiltonian = relative_hamiltonian(rho.weight(), sigma.weight())?;
    let pert = Perturbation::new(rho.weight().clone(), hamiltonian)?;
    let trace_bound = trace_norm_bound_check(&rho, &pert)?;

    let mut table = Table::new(&["quantity", "value"]);
    table.kv("rel_entropy_forward", fnum(forward));
    table.kv("rel_entropy_backward", fnum(backward));
    table.kv("symmetrized_sum", fnum(forward + backward));
    table.kv("trace_distance", fnum(distance));
    table.kv("kullback_lhs", fnum(kullback.lhs));
    table.kv("kullback_rhs", fnum(kullback.rhs));
    table.kv("kullback_holds", kullback.holds.to_string());
    table.kv("trace_bound_lhs", fnum(trace_bound.lhs));
    table.kv("trace_bound_rhs", fnum(trace_bound.rhs));
    table.kv("trace_bound_holds", trace_bound.holds.to_string());
    let mut out = String::new();
    table.emit(cli.format, &mut out);
    Ok((out, EXIT_OK))
}

fn cmd_geodesic(
    cli: &Cli,
    rho0_file: &Path,
    rho1_file: &Path,
    lambda: f64,
    connection: ConnectionArg,
) -> Result<(String, u8)> {
    let rho0 = load_state(rho0_file)?;
    let rho1 = load_state(rho1_file)?;
    let connection = match connection {
        ConnectionArg::Plus => Connection::Plus,
        ConnectionArg::Minus => Connection::Minus,
    };
    let spec = GeodesicSpec::new(&rho0, &rho1, connection, lambda)?;
    let point = geodesic(&spec)?;

    let mut table = Table::new(&["quantity", "value"]);
    table.kv("lambda", fnum(lambda));
    table.kv(
        "connection",
        match connection {
            Connection::Plus => "plus".to_string(),
            Connection::Minus => "minus".to_string(),
        },
    );
    table.kv("trace", fnum(point.trace()));
    let mut out = String::new();
    table.emit(cli.format, &mut out);
    push_matrix(&mut out, "point", point.op());
    Ok((out, EXIT_OK))
}

fn cmd_audit(cli: &Cli) -> Result<(String, u8)> {
    let cfg = AuditConfig {
        seed: cli.seed,
        instances: cli.instances,
        dims: cli.dims,
        tol: cli.tol,
        order: cli.order,
    };
    let report = run_audit(&cfg)?;

    let mut checks = Table::new(&["check", "instances", "failures", "worst_margin"]);
    for check in &report.checks {
        checks.push(vec![
            check.name.to_string(),
            check.instances.to_string(),
            check.failures.to_string(),
            fnum(check.worst_margin),
        ]);
    }
    let mut out = String::new();
    checks.emit(cli.format, &mut out);

    if !report.failures.is_empty() {
        let mut failures = Table::new(&["check", "instance", "detail", "replay"]);
        for failure in &report.failures {
            let mut files = Vec::new();
            for (role, json) in &failure.artifacts {
                let name =
                    format!("qim-audit-{}-{}-{}.json", failure.check, failure.instance, role);
                fs::write(&name, json).map_err(|e| Error::Parse(format!("{name}: {e}")))?;
                files.push(name);
            }
            failures.push(vec![
                failure.check.to_string(),
                failure.instance.to_string(),
                failure.detail.clone(),
                replay_hint(failure.check, cli.tol, &files),
            ]);
        }
        failures.emit(cli.format, &mut out);
    }

    let mut verdict = Table::new(&["result"]);
    let passed = report.passed();
    verdict.push(vec![if passed { "PASS" } else { "FAIL" }.to_string()]);
    verdict.emit(cli.format, &mut out);
    Ok((out, if passed { EXIT_OK } else { EXIT_AUDIT_FAILURE }))
}

/// Command that recomputes a dumped failure's verdict from its artifact
/// files at the tolerance the audit ran with.
fn replay_hint(check: &str, tol: f64, files: &[String]) -> String {
    if files.len() < 2 {
        return String::new();
    }
    let two = |cmd: &str| format!("qim --tol {tol:e} {cmd} {} {}", files[0], files[1]);
    match check {
        "sandwich" | "trace_norm_bound" | "symmetrized_identity" => two("perturb"),
        "hamiltonian_bound" | "form_bound" | "mixture_closure" => two("nearby"),
        "kullback" => two("entropy"),
        _ => format!("qim --tol {tol:e} norms {} {}", files[1], files[0]),
    }
}

fn cmd_separation(cli: &Cli, nmax: usize) -> Result<(String, u8)> {
    let rows = separation_demo(nmax)?;
    let mut table = Table::new(&["n", "trace_dist", "rel_entropy"]);
    for point in &rows {
        table.push(vec![point.n.to_string(), fnum(point.trace_dist), fnum(point.rel_entropy)]);
    }
    let decreasing = rows.windows(2).all(|w| w[1].trace_dist < w[0].trace_dist);
    let increasing = rows
        .windows(2)
        .all(|w| w[0].n < 16 || w[1].rel_entropy > w[0].rel_entropy);

    let mut verdict = Table::new(&["quantity", "value"]);
    verdict.kv("trace_dist_strictly_decreasing", decreasing.to_string());
    verdict.kv("rel_entropy_increasing_beyond_16", increasing.to_string());
    let mut out = String::new();
    table.emit(cli.format, &mut out);
    verdict.emit(cli.format, &mut out);
    Ok((out, EXIT_OK))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dims_parse_accepts_ranges_and_single_values() {
        assert_eq!(parse_dims("2..8").unwrap(), (2, 8));
        assert_eq!(parse_dims("4").unwrap(), (4, 4));
        assert_eq!(parse_dims(" 3 .. 5 ").unwrap(), (3, 5));
        assert!(parse_dims("1..4").is_err());
        assert!(parse_dims("5..4").is_err());
        assert!(parse_dims("x..4").is_err());
    }

    #[test]
    fn csv_fields_quote_only_when_needed() {
        assert_eq!(csv_field("plain"), "plain");
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
    }

    #[test]
    fn json_strings_escape_controls_and_quotes() {
        assert_eq!(json_string("a"), "\"a\"");
        assert_eq!(json_string("a\"b\\c"), "\"a\\\"b\\\\c\"");
        assert_eq!(json_string("line\nbreak"), "\"line\\nbreak\"");
    }

    #[test]
    fn table_emission_is_aligned_and_stable() {
        let mut table = Table::new(&["key", "value"]);
        table.kv("short", "1".into());
        table.kv("a_longer_key", "2".into());
        let mut out = String::new();
        table.emit(Format::Table, &mut out);
        assert_eq!(out, "key           value\nshort         1\na_longer_key  2\n");

        let mut csv = String::new();
        table.emit(Format::Csv, &mut csv);
        assert_eq!(csv, "key,value\nshort,1\na_longer_key,2\n");

        let mut json = String::new();
        table.emit(Format::JsonLines, &mut json);
        assert_eq!(json, "{\"key\":\"short\",\"value\":\"1\"}\n{\"key\":\"a_longer_key\",\"value\":\"2\"}\n");
    }

    #[test]
    fn scientific_rendering_is_fixed_width() {
        assert_eq!(fnum(2.5), "2.500000000000e0");
        assert_eq!(fnum(-0.125), "-1.250000000000e-1");
        assert_eq!(fnum(0.0), "0.000000000000e0");
    }
}
