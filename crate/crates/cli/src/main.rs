//! Batch front end: normalization with witnesses, census and counting
//! tables, Brion/Weyl graph emission, cover tables, and the verification
//! suites. Every command is deterministic: identical inputs and flags
//! produce byte-identical output.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use borel_orbits::census;
use borel_orbits::covers;
use borel_orbits::form::QuadraticForm;
use borel_orbits::normal::{normalize, NormalForm};
use borel_orbits::parabolic;

mod verify;

#[derive(Parser)]
#[command(
    name = "borel-orbits",
    version,
    about = "Borel orbits of quadratic forms over characteristic-2 fields: normal forms, censuses, Brion graphs, orbit covers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Dot,
    Tikz,
    #[value(name = "json-lines")]
    JsonLines,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the normal form of a quadratic form and print the Borel
    /// witness carrying the input onto it
    Normalize {
        #[arg(short)]
        n: usize,
        /// Form text, e.g. "x1^2 + x1*x2 + x2^2"
        form: String,
    },
    /// List every normal form in n variables with its statistics
    Census {
        #[arg(short)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the orbit-counting identities at one n
    Counts {
        #[arg(short)]
        n: usize,
    },
    /// Emit the Brion graph of minimal-parabolic orbit decompositions
    Brion {
        #[arg(short)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit the cover table of every maximal-rank nondegenerate orbit
    Covers {
        #[arg(short)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit the symmetric-group action graph on cover labels
    Weyl {
        #[arg(short)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run verification suites against the exhaustive oracle
    Verify {
        /// Suites to run (repeatable); defaults to all
        #[arg(long = "suite", value_enum)]
        suites: Vec<verify::Suite>,
        #[arg(short)]
        n: usize,
        /// Tower level of the oracle coefficient field (0 = F_2, 1 = F_4)
        #[arg(long, default_value_t = 1)]
        field_level: u8,
    },
}

fn emit(out: &Option<PathBuf>, content: &str) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, content),
        None => std::io::stdout().write_all(content.as_bytes()),
    }
}

fn fail(message: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(1)
}

/// Census rows in the fixed output order: B-rank descending, then canonical
/// text.
fn sorted_census(n: usize) -> Result<Vec<census::CensusRow>, census::CensusError> {
    let mut rows = census::census(n)?;
    rows.sort_by(|a, b| b.brank.cmp(&a.brank).then_with(|| a.nf.to_string().cmp(&b.nf.to_string())));
    Ok(rows)
}

fn cmd_normalize(n: usize, form_text: &str) -> ExitCode {
    let form = match QuadraticForm::parse(form_text, n) {
        Ok(f) => f,
        Err(e) => return fail(e),
    };
    let result = match normalize(&form) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    println!("normal form: {}", result.nf);
    println!("witness (tower level {}):", result.witness.max_level());
    println!("{}", result.witness);
    let ok = form.act(&result.witness) == result.nf.as_form();
    println!("act(witness, input) == normal form: {}", if ok { "OK" } else { "MISMATCH" });
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

fn cmd_census(n: usize, format: Format, out: &Option<PathBuf>) -> ExitCode {
    if n > 12 {
        return fail("census guard: n <= 12");
    }
    let rows = match sorted_census(n) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    let mut content = String::new();
    match format {
        Format::Text => {
            content.push_str("form\tbrank\tnondegenerate\tcc\n");
            for row in &rows {
                content.push_str(&format!(
                    "{}\t{}\t{}\t{}\n",
                    row.nf,
                    row.brank,
                    row.nondegenerate,
                    row.cc.map_or("-".into(), |c| c.to_string())
                ));
            }
        }
        Format::JsonLines => {
            for row in &rows {
                let value = serde_json::json!({
                    "form": row.nf.to_string(),
                    "brank": row.brank,
                    "nondegenerate": row.nondegenerate,
                    "cc": row.cc,
                });
                content.push_str(&value.to_string());
                content.push('\n');
            }
        }
        _ => return fail("census supports --format text or json-lines"),
    }
    match emit(out, &content) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e),
    }
}

fn cmd_counts(n: usize) -> ExitCode {
    if n > 12 {
        return fail("counts guard: n <= 12");
    }
    let mut ok = true;
    let max_rank = census::max_rank_count(n).expect("guarded");
    let catalan = census::catalan((n + 1) / 2);
    let agree = max_rank == catalan;
    ok &= agree;
    println!(
        "max-rank count: {max_rank}  C_{} = {catalan}  [{}]",
        (n + 1) / 2,
        if agree { "ok" } else { "MISMATCH" }
    );
    let r = n / 2;
    for f in 1..=r.max(1) {
        if n < 2 {
            break;
        }
        let direct = census::b_count_direct(n, f);
        let recursive = census::b_count_recursive(n, f);
        let triangle = if n % 2 == 0 {
            census::catalan_triangle(r as i64 - 1, (r - f) as i64)
        } else {
            census::catalan_triangle(r as i64, (r + 1 - f) as i64)
        };
        let agree = direct == recursive && direct == triangle;
        ok &= agree;
        println!(
            "b({n},{f}): direct {direct}  recursive {recursive}  triangle {triangle}  [{}]",
            if agree { "ok" } else { "MISMATCH" }
        );
    }
    if n % 2 == 1 {
        for f in 1..=(n / 2 + 1) {
            let odd = census::b_count_direct(n, f);
            let even = census::b_count_direct(n + 1, f);
            let agree = odd == even;
            ok &= agree;
            println!(
                "b({n},{f}) = b({},{f}): {odd} vs {even}  [{}]",
                n + 1,
                if agree { "ok" } else { "MISMATCH" }
            );
        }
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn cmd_brion(n: usize, format: Format, out: &Option<PathBuf>) -> ExitCode {
    let graph = match parabolic::brion_graph(n) {
        Ok(g) => g,
        Err(e) => return fail(e),
    };
    let content = match format {
        Format::Text => graph.to_text(),
        Format::Dot => graph.to_dot(),
        Format::Tikz => graph.to_tikz(),
        Format::JsonLines => {
            let mut s = String::new();
            for (k, v) in graph.vertices.iter().enumerate() {
                let value = serde_json::json!({
                    "vertex": k,
                    "form": v.text,
                    "brank": v.brank,
                    "orbit_dim": v.orbit_dim,
                });
                s.push_str(&value.to_string());
                s.push('\n');
            }
            for e in &graph.edges {
                let value = serde_json::json!({
                    "edge": [graph.vertices[e.u].text, graph.vertices[e.v].text],
                    "label": e.label,
                    "multiplicity": e.multiplicity,
                });
                s.push_str(&value.to_string());
                s.push('\n');
            }
            s
        }
    };
    match emit(out, &content) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e),
    }
}

fn max_rank_sorted(n: usize) -> Vec<NormalForm> {
    let mut forms = census::enumerate_max_rank(n);
    forms.sort_by_key(|q| q.to_string());
    forms
}

fn cmd_covers(n: usize, format: Format, out: &Option<PathBuf>) -> ExitCode {
    if n > 12 {
        return fail("covers guard: n <= 12");
    }
    let mut content = String::new();
    for q in max_rank_sorted(n) {
        let presentation = covers::stabilizer_presentation(&q).expect("max-rank form");
        let labels = covers::covers(&q).expect("max-rank form");
        match format {
            Format::Text => {
                content.push_str(&format!("q = {q}\n"));
                content.push_str(&format!("  stabilizer: {presentation}\n"));
                let tags = presentation.tags().len();
                for (bits, label) in labels.iter().enumerate() {
                    let eps: Vec<String> =
                        (0..tags).map(|k| ((bits >> k) & 1).to_string()).collect();
                    content.push_str(&format!("  eps=({})  m={label}\n", eps.join(",")));
                }
            }
            Format::JsonLines => {
                let tags = presentation.tags().len();
                for (bits, label) in labels.iter().enumerate() {
                    let eps: Vec<u8> = (0..tags).map(|k| ((bits >> k) & 1) as u8).collect();
                    let value = serde_json::json!({
                        "form": q.to_string(),
                        "eps": eps,
                        "m": label.m.iter().copied().collect::<Vec<usize>>(),
                        "constraints": presentation.to_string(),
                    });
                    content.push_str(&value.to_string());
                    content.push('\n');
                }
            }
            _ => return fail("covers supports --format text or json-lines"),
        }
    }
    match emit(out, &content) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e),
    }
}

fn cmd_weyl(n: usize, format: Format, out: &Option<PathBuf>) -> ExitCode {
    if n > 12 {
        return fail("weyl guard: n <= 12");
    }
    let graph = covers::weyl_orbit_graph(n);
    let content = match format {
        Format::Text => graph.to_text(),
        Format::Dot => graph.to_dot(),
        Format::Tikz => graph.to_tikz(),
        Format::JsonLines => {
            let mut s = String::new();
            for label in &graph.labels {
                let z = covers::pi_inv(label).expect("labels decode");
                let value = serde_json::json!({
                    "m": label.m.iter().copied().collect::<Vec<usize>>(),
                    "form": z.q.to_string(),
                });
                s.push_str(&value.to_string());
                s.push('\n');
            }
            for &(u, v, i) in &graph.edges {
                let value = serde_json::json!({
                    "edge": [graph.labels[u].to_string(), graph.labels[v].to_string()],
                    "reflection": i,
                });
                s.push_str(&value.to_string());
                s.push('\n');
            }
            s
        }
    };
    match emit(out, &content) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Normalize { n, form } => cmd_normalize(n, &form),
        Command::Census { n, format, out } => cmd_census(n, format, &out),
        Command::Counts { n } => cmd_counts(n),
        Command::Brion { n, format, out } => cmd_brion(n, format, &out),
        Command::Covers { n, format, out } => cmd_covers(n, format, &out),
        Command::Weyl { n, format, out } => cmd_weyl(n, format, &out),
        Command::Verify { suites, n, field_level } => verify::run(&suites, n, field_level),
    }
}
