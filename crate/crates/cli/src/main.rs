//! `octonahm`: subcommands over `octonahm-core`.
//!
//! JSON goes to stdout unless `--out` names a file. Exit codes: 0 on
//! success, 1 on bad input (flags, schema, preconditions), 2 on numerical
//! failure or a failed check.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use octonahm_core::config::{self, RunConfig, Tolerances};
use octonahm_core::io::{self, InitJson, JsonMatrix, JsonVector, QuadrupleJson, QuadrupleReportJson, ResidueJson, TripleJson};
use octonahm_core::kempf_ness::{self, SolverOptions};
use octonahm_core::lie::Flavor;
use octonahm_core::linalg::{self, frob};
use octonahm_core::nahm::{self, Integration};
use octonahm_core::octonion::{self, ComplexStructureIndex, BASE_TRIPLES};
use octonahm_core::{moment, poles, selftest, Error, Grid, Result};

#[derive(Parser, Debug)]
#[command(name = "octonahm", version, about = "Octonionic Nahm equations: integration, moment maps, Kempf-Ness solves and quadruples")]
struct Cli {
    /// Override every tolerance with this value.
    #[arg(long, global = true, value_name = "REAL")]
    tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the cross-product triples, f_ijk and the complex structures I_1..I_7.
    Tables {
        #[arg(long, value_name = "FILE.json")]
        out: Option<PathBuf>,
    },
    /// Integrate the reduced flow from {"xi": [7 matrices]} and write the path as CSV.
    Integrate {
        /// su2, u(k) (anti-Hermitian data) or gl(k) (any complex data).
        #[arg(long, default_value = "u(k)")]
        group: String,
        /// Expected matrix size; checked against the init file.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, value_name = "FILE.json")]
        init: PathBuf,
        /// Integration length.
        #[arg(long = "T", value_name = "REAL", default_value_t = 1.0)]
        t_end: f64,
        #[arg(long, default_value_t = 1000)]
        grid: usize,
        #[arg(long, value_name = "FILE.csv")]
        out: PathBuf,
    },
    /// Per-row sup norms of the octonionic residual of a CSV path.
    Residual {
        #[arg(long = "in", value_name = "FILE.csv")]
        input: PathBuf,
    },
    /// Sup norms of the seven moment maps of a CSV path.
    Moment {
        #[arg(long = "in", value_name = "FILE.csv")]
        input: PathBuf,
        #[arg(long, value_name = "FILE.json")]
        out: Option<PathBuf>,
    },
    /// Witness that I_i does not preserve the slice (su(2) instance unless --seed is given).
    /// Fails when the witness norm is not above --tol.
    Witness {
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Solve the real equation for a commuting triple and write the solution as CSV.
    KempfNess {
        #[arg(long, value_name = "FILE.json")]
        triple: PathBuf,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 400)]
        grid: usize,
        /// Path CSV; the report goes next to it with a .json extension.
        #[arg(long, value_name = "FILE.csv")]
        out: PathBuf,
    },
    /// Build the Nahm complex of a quadruple and recover its rational maps.
    Classify {
        #[arg(long, value_name = "FILE.json")]
        quadruple: PathBuf,
        #[arg(long, default_value_t = 1e-2)]
        eps: f64,
        #[arg(long, default_value_t = 4000)]
        grid: usize,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Rational map w^T (z - B)^-1 w as ascending coefficient lists.
    Ratmap {
        /// Matrix JSON file.
        #[arg(long = "B", value_name = "FILE.json")]
        b: PathBuf,
        /// Vector JSON file.
        #[arg(long, value_name = "FILE.json")]
        w: PathBuf,
    },
    /// Run the acceptance suite; --tol replaces only the Kempf-Ness solver target.
    Selftest {
        /// Comma-separated criterion ids (default: all).
        #[arg(long, value_delimiter = ',')]
        only: Vec<usize>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind::*;
            if matches!(e.kind(), DisplayHelp | DisplayVersion | DisplayHelpOnMissingArgumentOrSubcommand) {
                let _ = e.print();
                let code = if e.kind() == DisplayHelpOnMissingArgumentOrSubcommand { 1 } else { 0 };
                return ExitCode::from(code);
            }
            let msg = e.render().to_string();
            let first = msg.lines().next().unwrap_or("error: invalid arguments").trim_start_matches("error: ");
            eprintln!("error: {first} (see `octonahm --help`)");
            return ExitCode::from(1);
        }
    };
    config::init_threads();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", one_line(&e.to_string()));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn tolerances(tol: Option<f64>) -> Result<Tolerances> {
    let t = tol.map(Tolerances::uniform).unwrap_or_default();
    RunConfig { tol: t.clone(), ..RunConfig::default() }.validate()?;
    Ok(t)
}

fn check_grid(n: usize) -> Result<()> {
    RunConfig { n, ..RunConfig::default() }.validate()
}

fn emit(value: &Value, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => io::write_json(p, value),
        None => {
            print!("{}", io::to_json_string(value)?);
            Ok(())
        }
    }
}

fn domain(msg: String) -> Error {
    Error::Domain(msg)
}

/// Numerical failure of a check the command was asked to meet.
fn check_failed(msg: String) -> Error {
    Error::Numerical(msg)
}

fn run(cli: Cli) -> Result<u8> {
    let tol = tolerances(cli.tol)?;
    match cli.command {
        Command::Tables { out } => tables(out.as_deref()),
        Command::Integrate { group, k, init, t_end, grid, out } => integrate(&group, k, &init, t_end, grid, &out, &tol),
        Command::Residual { input } => residual(&input, &tol),
        Command::Moment { input, out } => moment_cmd(&input, out.as_deref(), &tol),
        Command::Witness { k, seed } => witness(k, seed, &tol),
        Command::KempfNess { triple, k, grid, out } => kempf_ness_cmd(&triple, k, grid, &out, &tol),
        Command::Classify { quadruple, eps, grid, out } => classify(&quadruple, eps, grid, &out, &tol),
        Command::Ratmap { b, w } => ratmap(&b, &w),
        Command::Selftest { only } => selftest_cmd(&only, cli.tol),
    }
}

fn tables(out: Option<&Path>) -> Result<u8> {
    let triples: Vec<Value> = BASE_TRIPLES
        .iter()
        .map(|&(i, j, k, s)| {
            let label = format!("{}{i}{j}{k}", if s < 0 { "-" } else { "" });
            json!({ "label": label, "indices": [i, j, k], "sign": s })
        })
        .collect();
    let table = octonion::cross_table();
    let f: Vec<Vec<Vec<i8>>> =
        (1..=7).map(|i| (1..=7).map(|j| (1..=7).map(|k| table.f(i, j, k)).collect()).collect()).collect();
    let structures: Vec<Value> = ComplexStructureIndex::all()
        .map(|i| json!({ "index": i.get(), "matrix": octonion::complex_structure(i).matrix() }))
        .collect();
    emit(&json!({ "triples": triples, "f": f, "complex_structures": structures }), out)?;
    Ok(0)
}

fn integrate(group: &str, k: Option<usize>, init: &Path, t_end: f64, n: usize, out: &Path, tol: &Tolerances) -> Result<u8> {
    check_grid(n)?;
    let xi = io::read_json::<InitJson>(init)?.to_init()?;
    let size = xi[0].nrows();
    if let Some(k) = k {
        if k != size {
            return Err(domain(format!("--k {k} does not match the {size}x{size} matrices in {}", init.display())));
        }
    }
    let anti = |m: &linalg::CMat| linalg::is_anti_hermitian(m, tol.residual * frob(m).max(1.0));
    match group {
        "su2" => {
            let traceless = xi.iter().all(|m| m.trace().norm() <= tol.residual * frob(m).max(1.0));
            if size != 2 || !xi.iter().all(anti) || !traceless {
                return Err(domain("--group su2 needs traceless anti-Hermitian 2x2 matrices".into()));
            }
        }
        "u(k)" | "u" => {
            if !xi.iter().all(anti) {
                return Err(domain("--group u(k) needs anti-Hermitian matrices; use --group gl(k) for complex data".into()));
            }
        }
        "gl(k)" | "gl" => {}
        other => return Err(domain(format!("unknown --group {other:?}; expected su2, u(k) or gl(k)"))),
    }
    let result = nahm::integrate_reduced(&xi, t_end, n)?;
    let summary = match &result {
        Integration::Complete(p) => {
            io::save_nahm_csv(out, p)?;
            json!({ "status": "complete", "k": size, "samples": p.grid.len(), "t_end": t_end, "sup_norm": p.sup_norm() })
        }
        Integration::BlowUp(r) => {
            io::save_nahm_csv(out, &r.truncated_path)?;
            json!({
                "status": "blow_up",
                "k": size,
                "samples": r.truncated_path.grid.len(),
                "t_star": r.t_star,
                "max_norm": r.max_norm,
            })
        }
    };
    emit(&summary, None)?;
    Ok(0)
}

/// CSV paths are read without a flavor constraint.
fn load_path(input: &Path) -> Result<nahm::NahmPath> {
    io::load_nahm_csv(input, Flavor::Complexified)
}

fn residual(input: &Path, tol: &Tolerances) -> Result<u8> {
    let p = load_path(input)?;
    let rows = nahm::residual(&p)?;
    let max = rows.iter().cloned().fold(0.0, f64::max);
    emit(&json!({ "rows": rows, "max": max, "within_tol": max <= tol.residual, "tol": tol.residual }), None)?;
    Ok(0)
}

fn moment_cmd(input: &Path, out: Option<&Path>, tol: &Tolerances) -> Result<u8> {
    let p = load_path(input)?;
    let mu = moment::moment_sup_norms(&p)?;
    let max = mu.iter().cloned().fold(0.0, f64::max);
    emit(&json!({ "sup_norms": mu, "max": max, "within_tol": max <= tol.residual, "tol": tol.residual }), out)?;
    Ok(0)
}

fn witness(k: usize, seed: Option<u64>, tol: &Tolerances) -> Result<u8> {
    let report = match seed {
        None if k == 2 => moment::nonpreservation_witness_su2()?,
        None => moment::nonpreservation_witness(k, 0)?,
        Some(s) => moment::nonpreservation_witness(k, s)?,
    };
    emit(&serde_json::to_value(&report)?, None)?;
    if !(report.witness_norm > tol.residual) {
        return Err(check_failed(format!(
            "witness norm {:e} is not above --tol {:e}; no nonpreservation detected",
            report.witness_norm, tol.residual
        )));
    }
    Ok(0)
}

fn kempf_ness_cmd(triple: &Path, k: Option<usize>, n: usize, out: &Path, tol: &Tolerances) -> Result<u8> {
    check_grid(n)?;
    let q = io::read_json::<TripleJson>(triple)?.to_point(tol.rank)?;
    if let Some(k) = k {
        if k != q.k() {
            return Err(domain(format!("--k {k} does not match the {0}x{0} matrices in {1}", q.k(), triple.display())));
        }
    }
    let opts = SolverOptions { tol: tol.real_equation, ..Default::default() };
    let inv = kempf_ness::theta_inverse(&q, &Grid::unit(n), &opts)?;
    io::save_decoupled_csv(out, &inv.path)?;
    let back = kempf_ness::theta(&inv.path, 1e-4 * (1.0 + q.t.iter().map(frob).fold(0.0, f64::max)))?;
    let gg = frob(&(q.g.adjoint() * &q.g - back.point.g.adjoint() * &back.point.g));
    let report = json!({
        "lagrangian": kempf_ness::lagrangian(&inv.path),
        "iterations": inv.report.iterations,
        "residuals": {
            "f_hat_sup": inv.report.f_hat_sup,
            "real_residual_sup": kempf_ness::real_residual_sup(&inv.path)?,
            "complex": kempf_ness::complex_residual(&inv.path)?,
        },
        "theta_round_trip": { "g_star_g": gg, "constancy": back.constancy },
        "grid": n,
        "tol": tol.real_equation,
    });
    io::write_json(&out.with_extension("json"), &report)?;
    Ok(0)
}

fn classify(quadruple: &Path, eps: f64, n: usize, out: &Path, tol: &Tolerances) -> Result<u8> {
    RunConfig { n, epsilon: eps, tol: tol.clone(), ..RunConfig::default() }.validate()?;
    let q = io::read_json::<QuadrupleJson>(quadruple)?.to_quadruple()?;
    let validation = poles::validate_quadruple(&q, poles::RANK_TOL);
    if !validation.is_valid() {
        return Err(domain(format!("{} is not a Nahm quadruple: {}", quadruple.display(), validation.failures.join("; "))));
    }
    std::fs::create_dir_all(out).map_err(|e| domain(format!("cannot create {}: {e}", out.display())))?;
    let c = poles::quadruple_to_complex(&q, eps, n, tol.residual)?;
    io::save_decoupled_csv(&out.join("complex.csv"), &c.path)?;
    let res = poles::extract_residues(&c.path, tol.residual)?;
    io::write_json(&out.join("residues.json"), &ResidueJson::from(&res))?;
    let back = poles::complex_to_quadruple(&c, tol.residual)?;
    let input_maps = poles::rational_maps(&q)?;
    let recovered = poles::rational_maps(&back)?;
    let distance = input_maps.iter().zip(&recovered).map(|(a, b)| a.distance(b)).fold(0.0, f64::max);
    io::write_json(
        &out.join("maps.json"),
        &json!({ "input": input_maps, "recovered": recovered, "max_distance": distance }),
    )?;
    let report = json!({
        "quadruple": QuadrupleReportJson { valid: true, report: &validation },
        "epsilon": eps,
        "grid": n,
        "complex_residual": kempf_ness::complex_residual(&c.path)?,
        "reflection": poles::check_reflection(&c.path)?,
        "trace_drift": poles::trace_drift(&c.path),
        "maps_max_distance": distance,
    });
    io::write_json(&out.join("report.json"), &report)?;
    if distance > tol.residual {
        return Err(check_failed(format!(
            "recovered rational maps differ by {distance:e} (> {:e}); refine --grid or loosen --tol",
            tol.residual
        )));
    }
    Ok(0)
}

fn ratmap(b: &Path, w: &Path) -> Result<u8> {
    let bm = io::mat_from_json(&io::read_json::<JsonMatrix>(b)?, "B")?;
    let wv = io::vec_from_json(&io::read_json::<JsonVector>(w)?, "w")?;
    if wv.len() != bm.nrows() {
        return Err(Error::Dimension(format!("B is {0}x{0} but w has {1} entries", bm.nrows(), wv.len())));
    }
    emit(&serde_json::to_value(poles::rational_map(&bm, &wv)?)?, None)?;
    Ok(0)
}

fn selftest_cmd(only: &[usize], tol: Option<f64>) -> Result<u8> {
    let mut pins = selftest::Pins::default();
    if let Some(t) = tol {
        pins.kn_f_hat = t;
        println!("note: Kempf-Ness solver target set to {t:e}; pinned suite modified");
    }
    let ids: Vec<usize> = if only.is_empty() { (1..=12).collect() } else { only.to_vec() };
    if let Some(bad) = ids.iter().find(|&&i| !(1..=12).contains(&i)) {
        return Err(domain(format!("--only {bad}: criterion ids run from 1 to 12")));
    }
    let results = selftest::run(&pins, &ids);
    for r in &results {
        println!("[{}] {:>2}. {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.id, r.name, r.detail);
    }
    let passed = results.iter().filter(|r| r.passed).count();
    println!("{passed} of {} criteria passed", results.len());
    Ok(if passed == results.len() { 0 } else { 2 })
}
