use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use toricgw::compactify::{validate_compactification, Disk};
use toricgw::invariants::{compare_with_oracle, disk_potential, extract_invariants};
use toricgw::mirror::toric_mirror_map;
use toricgw::rational::{format_q, parse_q};
use toricgw::syz::{emit_lg_model, syz_mirror, GaugeChoice};
use toricgw::toric::SemiFano;
use toricgw::{box_elements, kernel_data, parse_stacky_fan, verify_semi_fano, Error, ErrorKind, StackyFan, Q};

mod text;

const THREADS_VAR: &str = "TORICGW_THREADS";

#[derive(Parser, Debug)]
#[command(name = "toricgw", version, about = "Exact mirror maps and disk potentials for toric CY orbifolds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate a fan and report box elements, kernel data and certificates.
    Analyze { fan: PathBuf },
    /// Forward and inverse mirror maps.
    MirrorMap {
        fan: PathBuf,
        #[arg(long, value_parser = parse_order)]
        order: Q,
    },
    /// Disk potential and its invariant table.
    Invariants {
        fan: PathBuf,
        #[arg(long, value_parser = parse_disk)]
        disk: Disk,
        #[arg(long, value_parser = parse_order)]
        order: Q,
    },
    /// SYZ mirror potential in Landau-Ginzburg form.
    Syz {
        fan: PathBuf,
        /// Optional; every disk enters G, this only checks the selector.
        #[arg(long, value_parser = parse_disk)]
        disk: Option<Disk>,
        #[arg(long, value_parser = parse_order)]
        order: Q,
        /// Maximal cone whose coefficients are fixed to 1.
        #[arg(long, default_value_t = 0)]
        gauge: usize,
    },
    /// Compare the disk potential with the relative I-function derivation.
    Oracle {
        fan: PathBuf,
        #[arg(long)]
        bar: PathBuf,
        #[arg(long, value_parser = parse_disk)]
        disk: Disk,
        #[arg(long, value_parser = parse_order)]
        order: Q,
    },
}

fn parse_order(s: &str) -> Result<Q, String> {
    let q = parse_q(s).ok_or_else(|| format!("not a rational number: {s}"))?;
    if q <= Q::from_integer(0.into()) {
        return Err("order must be positive".into());
    }
    Ok(q)
}

fn parse_disk(s: &str) -> Result<Disk, String> {
    s.parse::<Disk>().map_err(|e| e.to_string())
}

/// Rendered report plus the exit status it implies.
struct Report {
    json: Value,
    text: String,
    status: u8,
}

fn read_fan(path: &Path) -> toricgw::Result<StackyFan> {
    let doc = std::fs::read_to_string(path).map_err(|e| {
        Error::validation("cli", "read_fan", format!("cannot read fan file: {e}")).with_datum(path.display())
    })?;
    parse_stacky_fan(&doc)
}

fn qs(xs: &[Q]) -> Vec<String> {
    xs.iter().map(format_q).collect()
}

fn analyze(path: &Path) -> toricgw::Result<Report> {
    let fan = read_fan(path)?;
    let boxes = box_elements(&fan);
    let data = kernel_data(&fan)?;
    let semi_fano = match verify_semi_fano(&data) {
        SemiFano::Holds(w) => json!({
            "holds": true,
            "multipliers": w.iter().map(|(a, l)| json!({"anticone": a, "lambda": qs(l)})).collect::<Vec<_>>(),
        }),
        SemiFano::Violated(a) => json!({"holds": false, "anticone": a}),
    };
    let json = json!({
        "command": "analyze",
        "fan": fan.to_document(),
        "n": data.n(),
        "m": data.m(),
        "m_ext": data.m_ext(),
        "r": data.r(),
        "r_h2": data.r_h2,
        "box_elements": boxes.elements,
        "kernel_basis": data.kernel_basis.iter().map(|g| qs(g)).collect::<Vec<_>>(),
        "p_functionals": data.p_functionals.iter().map(|p| qs(p)).collect::<Vec<_>>(),
        "anticones": data.anticones,
        "calabi_yau": data.cy_covector,
        "semi_fano": semi_fano,
    });
    let text = text::analyze(&fan, &boxes, &data);
    Ok(Report { json, text, status: 0 })
}

fn mirror_map(path: &Path, order: &Q) -> toricgw::Result<Report> {
    let data = kernel_data(&read_fan(path)?)?;
    let mut mm = toric_mirror_map(&data, order)?;
    mm.invert()?;
    mm.check_round_trip()?;
    let doc = mm.to_doc()?;
    let text = text::mirror_map(&mm);
    Ok(Report { json: json!({"command": "mirror-map", "mirror_map": doc}), text, status: 0 })
}

fn invariants(path: &Path, disk: Disk, order: &Q) -> toricgw::Result<Report> {
    let data = kernel_data(&read_fan(path)?)?;
    let dp = disk_potential(&data, disk, order)?;
    let table = extract_invariants(&dp)?;
    let json = json!({
        "command": "invariants",
        "potential": dp.to_doc(),
        "invariants": table.to_doc(),
    });
    let text = text::invariants(&dp, &table);
    Ok(Report { json, text, status: 0 })
}

fn syz(path: &Path, disk: Option<Disk>, order: &Q, gauge: usize) -> toricgw::Result<Report> {
    let data = kernel_data(&read_fan(path)?)?;
    if let Some(d) = disk {
        d.check(data.m(), data.m_ext())?;
    }
    let gauge = GaugeChoice::new(&data, gauge)?;
    let mp = syz_mirror(&data, &gauge, order)?;
    let doc = emit_lg_model(&mp);
    let text = text::syz(&mp);
    Ok(Report { json: json!({"command": "syz", "lg_model": doc}), text, status: 0 })
}

fn oracle(path: &Path, bar: &Path, disk: Disk, order: &Q) -> toricgw::Result<Report> {
    let data = kernel_data(&read_fan(path)?)?;
    let cd = validate_compactification(&data, &read_fan(bar)?, disk)?;
    let report = compare_with_oracle(&cd, order)?;
    let verdict = if report.matches() { "MATCH" } else { "MISMATCH" };
    let diff = report.first_difference.as_ref().map(|(m, a, b)| {
        json!({"monomial": m.to_string(), "disk_potential": format_q(a), "oracle_potential": format_q(b)})
    });
    let json = json!({
        "command": "oracle",
        "disk": disk.to_string(),
        "order": format_q(order),
        "result": verdict,
        "disk_potential": report.disk_potential.to_doc(),
        "oracle_potential": report.oracle_potential.to_doc(),
        "first_difference": diff,
    });
    let text = text::oracle(verdict, &report);
    Ok(Report { json, text, status: if report.matches() { 0 } else { 3 } })
}

fn run(cli: &Cli) -> toricgw::Result<Report> {
    match &cli.command {
        Command::Analyze { fan } => analyze(fan),
        Command::MirrorMap { fan, order } => mirror_map(fan, order),
        Command::Invariants { fan, disk, order } => invariants(fan, *disk, order),
        Command::Syz { fan, disk, order, gauge } => syz(fan, *disk, order, *gauge),
        Command::Oracle { fan, bar, disk, order } => oracle(fan, bar, *disk, order),
    }
}

fn error_json(e: &Error) -> Value {
    let kind = match e.kind {
        ErrorKind::Validation => "validation",
        ErrorKind::Consistency => "consistency",
    };
    json!({"error": {
        "kind": kind,
        "module": e.module,
        "operation": e.operation,
        "message": e.message,
        "datum": e.datum,
    }})
}

fn exit_code(e: &Error) -> u8 {
    match e.kind {
        ErrorKind::Validation => 2,
        ErrorKind::Consistency => 3,
    }
}

/// Writes via a sibling temp file and rename so readers never see a partial report.
fn emit(body: &str, output: Option<&Path>) -> std::io::Result<()> {
    match output {
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(body.as_bytes())?;
            out.flush()
        }
        Some(path) => {
            let mut tmp = path.as_os_str().to_owned();
            tmp.push(".tmp");
            let tmp = PathBuf::from(tmp);
            std::fs::write(&tmp, body)?;
            std::fs::rename(&tmp, path)
        }
    }
}

fn configure_threads() -> Result<(), Error> {
    let Ok(raw) = std::env::var(THREADS_VAR) else { return Ok(()) };
    let n: usize = raw
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Error::validation("cli", "configure_threads", "thread count must be a positive integer").with_datum(&raw))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::validation("cli", "configure_threads", e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|_| run(&cli));
    match result {
        Ok(report) => {
            let body = match cli.format {
                Format::Json => serde_json::to_string_pretty(&report.json).expect("report serializes") + "\n",
                Format::Text => report.text,
            };
            if let Err(e) = emit(&body, cli.output.as_deref()) {
                eprintln!("{}", error_json(&Error::validation("cli", "write_output", e.to_string())));
                return ExitCode::from(2);
            }
            ExitCode::from(report.status)
        }
        Err(e) => {
            eprintln!("{}", serde_json::to_string(&error_json(&e)).expect("error serializes"));
            ExitCode::from(exit_code(&e))
        }
    }
}
