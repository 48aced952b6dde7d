//! Batch front end: bounds, verification, construction pipelines, search, and
//! matrix export. No interactive mode - determinism and scriptability are the
//! contract. Exit codes are the machine interface: 0 success/valid, 1 invalid
//! input, 2 verification failure, 3 search ended without reaching the target.
//! Stdout carries JSON (except `export-matrix`, which emits the plain matrix
//! text); stderr is human-readable.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use oospc_core::bounds;
use oospc_core::constructions::{self, IngredientSet, K0Ingredient, ProductOutput};
use oospc_core::data;
use oospc_core::error::Error;
use oospc_core::model::{
    matrix_text, read_design, write_design, write_design_str, DesignFile, DesignKind,
};
use oospc_core::searcher::{self, SearchConstraint, SearchProblem};
use oospc_core::verifier::{self, report_to_json};

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match run(&args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::FailedVerification { .. } => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

const USAGE: &str = "usage:
  oospc bound M N [W LAMBDA]
  oospc verify FILE [--kind KIND] [--jobs N]
  oospc construct NAME [--in FILE]... [--out FILE] [--out2 FILE]
                  [--g G] [--n N] [--p P] [--m M] [--no-verify]
      NAME: semicyclic-h4 | fill | csqs-g-product | gstar-cols | gstar-rows |
            cyclic-gstar | g-to-1fg | fan-product | rosqs-to-1fg |
            leave-to-1fg | inversive | transpose | crt
  oospc search --m M --n N --k K --t T --target SIZE [--constraint C] [--e E]
               [--steiner] [--allow-short] [--budget SECS] [--out FILE]
      C: packing | g-design | g-star | cyclic-g-star | s-cyclic
  oospc export-matrix FILE
  oospc data KEY --out FILE";

struct Flags {
    inputs: Vec<PathBuf>,
    out: Option<PathBuf>,
    out2: Option<PathBuf>,
    g: Option<u32>,
    n: Option<u32>,
    p: Option<u32>,
    e: Option<u32>,
    m: Option<u32>,
    k: Option<u32>,
    t: Option<u32>,
    target: Option<usize>,
    kind: Option<String>,
    constraint: Option<String>,
    jobs: usize,
    budget: Option<u64>,
    verify: bool,
    steiner: bool,
    allow_short: bool,
    positional: Vec<String>,
}

fn parse_flags(args: &[String]) -> Result<Flags, Error> {
    let mut f = Flags {
        inputs: Vec::new(),
        out: None,
        out2: None,
        g: None,
        n: None,
        p: None,
        e: None,
        m: None,
        k: None,
        t: None,
        target: None,
        kind: None,
        constraint: None,
        jobs: 1,
        budget: None,
        verify: true,
        steiner: false,
        allow_short: false,
        positional: Vec::new(),
    };
    let mut i = 0;
    let need = |i: usize, args: &[String], name: &str| -> Result<String, Error> {
        args.get(i + 1)
            .cloned()
            .ok_or_else(|| Error::Parameter(format!("flag {name} needs a value")))
    };
    let int = |s: &str, name: &str| -> Result<u64, Error> {
        s.parse::<u64>()
            .map_err(|_| Error::Parameter(format!("flag {name}: `{s}` is not an integer")))
    };
    while i < args.len() {
        let a = &args[i];
        match a.as_str() {
            "--in" => {
                f.inputs.push(PathBuf::from(need(i, args, a)?));
                i += 1;
            }
            "--out" => {
                f.out = Some(PathBuf::from(need(i, args, a)?));
                i += 1;
            }
            "--out2" => {
                f.out2 = Some(PathBuf::from(need(i, args, a)?));
                i += 1;
            }
            "--g" | "--n" | "--p" | "--e" | "--m" | "--k" | "--t" | "--jobs" | "--budget"
            | "--target" => {
                let v = int(&need(i, args, a)?, a)?;
                match a.as_str() {
                    "--g" => f.g = Some(v as u32),
                    "--n" => f.n = Some(v as u32),
                    "--p" => f.p = Some(v as u32),
                    "--e" => f.e = Some(v as u32),
                    "--m" => f.m = Some(v as u32),
                    "--k" => f.k = Some(v as u32),
                    "--t" => f.t = Some(v as u32),
                    "--jobs" => f.jobs = (v as usize).max(1),
                    "--budget" => f.budget = Some(v),
                    "--target" => f.target = Some(v as usize),
                    _ => unreachable!(),
                }
                i += 1;
            }
            "--kind" => {
                f.kind = Some(need(i, args, a)?);
                i += 1;
            }
            "--constraint" => {
                f.constraint = Some(need(i, args, a)?);
                i += 1;
            }
            "--no-verify" => f.verify = false,
            "--steiner" => f.steiner = true,
            "--allow-short" => f.allow_short = true,
            other if other.starts_with("--") => {
                return Err(Error::Parameter(format!("unknown flag {other}")));
            }
            _ => f.positional.push(a.clone()),
        }
        i += 1;
    }
    Ok(f)
}

fn run(args: &[String]) -> Result<ExitCode, Error> {
    let Some(cmd) = args.first() else {
        eprintln!("{USAGE}");
        return Ok(ExitCode::from(1));
    };
    let flags = parse_flags(&args[1..])?;
    match cmd.as_str() {
        "bound" => cmd_bound(&flags),
        "verify" => cmd_verify(&flags),
        "construct" => cmd_construct(&flags),
        "search" => cmd_search(&flags),
        "export-matrix" => cmd_export(&flags),
        "data" => cmd_data(&flags),
        other => {
            eprintln!("unknown subcommand `{other}`\n{USAGE}");
            Ok(ExitCode::from(1))
        }
    }
}

fn cmd_bound(f: &Flags) -> Result<ExitCode, Error> {
    let vals: Vec<u64> = f
        .positional
        .iter()
        .map(|s| {
            s.parse::<u64>()
                .map_err(|_| Error::Parameter(format!("`{s}` is not an integer")))
        })
        .collect::<Result<_, _>>()?;
    let (m, n, w, lambda) = match vals.as_slice() {
        [m, n] => (*m, *n, 4, 2),
        [m, n, w, l] => (*m, *n, *w, *l),
        _ => return Err(Error::Parameter("bound takes M N or M N W LAMBDA".into())),
    };
    if (w, lambda) == (4, 2) {
        let b = bounds::oospc_upper_bound(m, n)?;
        println!(
            "{{\"johnson\":{},\"improved\":{},\"rule\":\"{}\"}}",
            b.johnson,
            b.improved,
            b.rule.as_str()
        );
    } else {
        let j = bounds::johnson_bound(m, n, w, lambda)?;
        println!("{{\"johnson\":{j},\"improved\":{j},\"rule\":\"johnson\"}}");
    }
    Ok(ExitCode::SUCCESS)
}

fn load(path: &Path) -> Result<DesignFile, Error> {
    read_design(path)
}

fn cmd_verify(f: &Flags) -> Result<ExitCode, Error> {
    let [path] = f.positional.as_slice() else {
        return Err(Error::Parameter("verify takes exactly one FILE".into()));
    };
    let mut file = load(Path::new(path))?;
    if let Some(kind) = &f.kind {
        file = match (file, kind.as_str()) {
            (DesignFile::Design(d), k) => {
                DesignFile::Design(d.with_kind(DesignKind::from_str(k)?)?)
            }
            (DesignFile::Oospc(c), "packing") => DesignFile::Design(c.to_packing()?),
            (other, k) => {
                let _ = other;
                return Err(Error::Parameter(format!(
                    "cannot reinterpret this file as `{k}`"
                )));
            }
        };
    }
    let report = match &file {
        DesignFile::Oospc(c) => verifier::verify_oospc_jobs(c, f.jobs)?,
        other => verifier::verify_file(other)?,
    };
    println!("{}", report_to_json(&report));
    Ok(if report.valid {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

fn design_of(file: DesignFile, what: &str) -> Result<oospc_core::DesignInstance, Error> {
    match file {
        DesignFile::Design(d) => Ok(d),
        DesignFile::Oospc(c) => Ok(c.to_packing()?),
        DesignFile::Fan(_) => Err(Error::Parameter(format!(
            "{what}: expected a design, found a fan file"
        ))),
    }
}

fn write_out(file: &DesignFile, out: &Option<PathBuf>) -> Result<(), Error> {
    match out {
        Some(path) => write_design(file, path),
        None => {
            print!("{}", write_design_str(file));
            Ok(())
        }
    }
}

/// Report printed after a construction: the output's own verification when it
/// fits under the exhaustive-scan ceiling. Scans beyond the ceiling are noted,
/// not faked.
fn emit_report(file: &DesignFile, verify: bool) -> Result<(), Error> {
    if !verify {
        println!("{{\"verified\":false}}");
        return Ok(());
    }
    match verifier::verify_file(file) {
        Ok(report) => {
            println!("{}", report_to_json(&report));
            if !report.valid {
                return Err(Error::FailedVerification {
                    stage: "output".into(),
                    summary: report.summary(),
                });
            }
            Ok(())
        }
        Err(Error::TooLarge { points, ceiling }) => {
            println!("{{\"verified\":false,\"note\":\"scan refused: {points} points over ceiling {ceiling}\"}}");
            Ok(())
        }
        Err(e) => Err(e),
    }
}

fn cmd_construct(f: &Flags) -> Result<ExitCode, Error> {
    let [name] = f.positional.as_slice() else {
        return Err(Error::Parameter("construct takes exactly one NAME".into()));
    };
    let verify = f.verify;
    let input = |i: usize| -> Result<DesignFile, Error> {
        f.inputs
            .get(i)
            .ok_or_else(|| {
                Error::Parameter(format!("construct {name}: missing --in file #{}", i + 1))
            })
            .and_then(|p| load(p))
    };
    let out_file: DesignFile = match name.as_str() {
        "semicyclic-h4" => {
            let n =
                f.n.ok_or_else(|| Error::Parameter("semicyclic-h4 needs --n".into()))?;
            DesignFile::Design(constructions::semicyclic_h4(n)?)
        }
        "fill" => {
            let g = design_of(input(0)?, "fill G input")?;
            let sub = design_of(input(1)?, "fill sub input")?;
            DesignFile::Design(constructions::fill(&g, &sub, verify)?)
        }
        "csqs-g-product" => {
            let sqs = design_of(input(0)?, "cyclic SQS input")?;
            let g2n = design_of(input(1)?, "semi-cyclic G(2,n,4,3) input")?;
            DesignFile::Design(constructions::csqs_g_product(&sqs, &g2n, verify)?)
        }
        "gstar-cols" | "gstar-rows" | "cyclic-gstar" => {
            let d = design_of(input(0)?, "G* input")?;
            let g =
                f.g.ok_or_else(|| Error::Parameter(format!("{name} needs --g")))?;
            let out = match name.as_str() {
                "gstar-cols" => constructions::gstar_expand_cols(&d, g, verify)?,
                "gstar-rows" => constructions::gstar_expand_rows(&d, g, verify)?,
                _ => constructions::cyclic_gstar_expand(&d, g, verify)?,
            };
            DesignFile::Design(out)
        }
        "g-to-1fg" => {
            let d = design_of(input(0)?, "G-design input")?;
            DesignFile::Fan(constructions::gdesign_to_1fg(&d, verify)?)
        }
        "fan-product" => {
            let DesignFile::Fan(master) = input(0)? else {
                return Err(Error::Parameter(
                    "fan-product: the first --in must be a fan file".into(),
                ));
            };
            let g =
                f.g.ok_or_else(|| Error::Parameter("fan-product needs --g".into()))?;
            let mut ing = IngredientSet::default();
            for i in 1..f.inputs.len() {
                match input(i)? {
                    DesignFile::Fan(fan) => {
                        ing.k0.insert(fan.ambient().rows, K0Ingredient::Fan(fan));
                    }
                    DesignFile::Design(d) if d.kind == DesignKind::HDesign => {
                        ing.k1.insert(d.ambient().rows, d);
                    }
                    DesignFile::Design(d) => {
                        ing.k0.insert(d.ambient().rows, K0Ingredient::Design(d));
                    }
                    DesignFile::Oospc(_) => {
                        return Err(Error::Parameter(
                            "fan-product: oospc files are not ingredients".into(),
                        ))
                    }
                }
            }
            let (tau, phi) = constructions::fan_product(&master, g, &ing, verify)?;
            let tau = match tau {
                ProductOutput::Design(d) => DesignFile::Design(d),
                ProductOutput::Fan(fan) => DesignFile::Fan(fan),
            };
            let phi = match phi {
                ProductOutput::Design(d) => DesignFile::Design(d),
                ProductOutput::Fan(fan) => DesignFile::Fan(fan),
            };
            if let Some(p2) = &f.out2 {
                write_design(&phi, p2)?;
            }
            write_out(&tau, &f.out)?;
            emit_report(&tau, verify)?;
            if f.out2.is_some() {
                emit_report(&phi, verify)?;
            }
            return Ok(ExitCode::SUCCESS);
        }
        "rosqs-to-1fg" => {
            let d = design_of(input(0)?, "rotational SQS input")?;
            DesignFile::Fan(constructions::rosqs_to_1fg(&d, verify)?)
        }
        "leave-to-1fg" => {
            let d = design_of(input(0)?, "packing input")?;
            DesignFile::Fan(constructions::leave_to_1fg(&d, verify)?)
        }
        "inversive" => {
            let p =
                f.p.ok_or_else(|| Error::Parameter("inversive needs --p".into()))?;
            let (design, _) = oospc_core::galois::inversive_to_oospc(p)?;
            DesignFile::Design(design)
        }
        "transpose" => {
            let d = design_of(input(0)?, "transpose input")?;
            DesignFile::Design(d.transposed()?)
        }
        "crt" => {
            let d = design_of(input(0)?, "crt input")?;
            let m =
                f.m.ok_or_else(|| Error::Parameter("crt needs --m".into()))?;
            DesignFile::Design(constructions::crt_split(&d, m)?)
        }
        other => return Err(Error::Parameter(format!("unknown construction `{other}`"))),
    };
    write_out(&out_file, &f.out)?;
    emit_report(&out_file, verify)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_search(f: &Flags) -> Result<ExitCode, Error> {
    let m =
        f.m.ok_or_else(|| Error::Parameter("search needs --m".into()))?;
    let n =
        f.n.ok_or_else(|| Error::Parameter("search needs --n".into()))?;
    let k =
        f.k.ok_or_else(|| Error::Parameter("search needs --k".into()))?;
    let t = f.t.unwrap_or(3);
    let target = f
        .target
        .ok_or_else(|| Error::Parameter("search needs --target".into()))?;
    let constraint = match f.constraint.as_deref() {
        None | Some("packing") => SearchConstraint::Packing,
        Some("g-design") => SearchConstraint::GDesign {
            e: f.e
                .ok_or_else(|| Error::Parameter("g-design constraint needs --e".into()))?,
        },
        Some("g-star") => SearchConstraint::GStar {
            e: f.e
                .ok_or_else(|| Error::Parameter("g-star constraint needs --e".into()))?,
        },
        Some("cyclic-g-star") => SearchConstraint::CyclicGStar {
            spacing: f
                .e
                .ok_or_else(|| Error::Parameter("cyclic-g-star constraint needs --e".into()))?,
        },
        Some("s-cyclic") => SearchConstraint::SCyclic,
        Some(other) => return Err(Error::Parameter(format!("unknown constraint `{other}`"))),
    };
    let default_budget = std::env::var("OOSPC_SEARCH_BUDGET")
        .ok()
        .and_then(|s| s.parse::<u64>().ok())
        .unwrap_or(60);
    let mut problem = SearchProblem::packing(m, n, k, t, target);
    problem.constraint = constraint;
    problem.steiner = f.steiner;
    problem.strict = !f.allow_short;
    problem.budget = Duration::from_secs(f.budget.unwrap_or(default_budget));
    let outcome = searcher::search(&problem)?;
    if let Some(out) = &f.out {
        write_design(&DesignFile::Design(outcome.design.clone()), out)?;
    }
    println!(
        "{{\"best\":{},\"reached_target\":{},\"exhausted\":{}}}",
        outcome.best, outcome.reached_target, outcome.exhausted
    );
    Ok(if outcome.reached_target {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    })
}

fn cmd_export(f: &Flags) -> Result<ExitCode, Error> {
    let [path] = f.positional.as_slice() else {
        return Err(Error::Parameter(
            "export-matrix takes exactly one FILE".into(),
        ));
    };
    let file = load(Path::new(path))?;
    let text = match &file {
        DesignFile::Design(d) => matrix_text(d.base_blocks()),
        DesignFile::Oospc(c) => matrix_text(c.codewords()),
        DesignFile::Fan(_) => {
            return Err(Error::Parameter(
                "matrix export works on designs and codes, not fans".into(),
            ))
        }
    };
    print!("{text}");
    Ok(ExitCode::SUCCESS)
}

fn cmd_data(f: &Flags) -> Result<ExitCode, Error> {
    let [key] = f.positional.as_slice() else {
        return Err(Error::Parameter(format!(
            "data takes exactly one KEY (available: {})",
            data::builtin_keys().join(", ")
        )));
    };
    let bytes = data::builtin_bytes(key)?;
    let ds = data::load_builtin(key)?;
    match &f.out {
        Some(path) => std::fs::write(path, bytes).map_err(|e| Error::Io(e.to_string()))?,
        None => print!("{bytes}"),
    }
    eprintln!(
        "{}: kind {}, {} base blocks",
        ds.key, ds.expected.kind, ds.expected.base_blocks
    );
    Ok(ExitCode::SUCCESS)
}
