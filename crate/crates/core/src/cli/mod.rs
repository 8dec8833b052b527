//! Command-line front end. `run` takes the full argument vector and returns
//! the exit code with captured output, so it is testable without a process.
//!
//! Exit codes: 0 success, 1 domain error (or a failed oracle check),
//! 2 syntax or usage error.

pub mod parse;

use std::io::Read;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::field::FieldConfig;
use crate::mellin::{transform, TransformKind, TransformOptions};
use crate::objects::{iso_witness, order_report, ConnectionObject, DiffOpObject, Object, ObjectJson, OrderExpr, Point};
use crate::oracle::{self, OracleReport};
use crate::puiseux::Var;
use crate::weyl::{global_mellin, parse_domain};

pub use parse::parse_series;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Parser, Debug)]
#[command(name = "lmellin", version, about = "Local Mellin transforms of formal connections")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "text")]
    format: Format,
    /// Coefficient field: qq (exact rationals) or cc (complex, fixed precision).
    /// Overrides MELLIN_FIELD.
    #[arg(long, global = true)]
    field: Option<String>,
    /// Extra exponent units of working precision.
    #[arg(long, global = true, default_value_t = 2)]
    margin: u32,
    /// Root branch for fractional powers.
    #[arg(long, global = true, default_value_t = 0, allow_hyphen_values = true)]
    branch: i64,
    /// Mantissa bits in the complex field.
    #[arg(long, global = true)]
    prec: Option<u32>,
    /// Relative tolerance in the complex field.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug, Default)]
struct Input {
    /// Single-component series (connection side).
    #[arg(long, allow_hyphen_values = true)]
    f: Option<String>,
    /// Single-component series (difference side).
    #[arg(long, allow_hyphen_values = true)]
    g: Option<String>,
    /// Jordan size for --f / --g.
    #[arg(long, default_value_t = 1)]
    jordan: u32,
    /// Object JSON file, `-` for stdin.
    #[arg(long)]
    input: Option<String>,
    /// File with one object JSON per line.
    #[arg(long)]
    batch: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Parse a series and print its canonical text.
    Parse {
        #[arg(allow_hyphen_values = true)]
        expr: String,
        /// Variable for constant-only input.
        #[arg(long, default_value = "z")]
        var: String,
    },
    /// Forward transform of a connection at 0, x=<coef> or inf.
    Transform {
        #[arg(long)]
        from: Option<String>,
        #[command(flatten)]
        input: Input,
    },
    /// Inverse transform of a difference operator to 0, x=<coef> or inf.
    Inverse {
        #[arg(long)]
        to: String,
        #[command(flatten)]
        input: Input,
    },
    /// Canonical class of an object.
    Canon {
        #[arg(long)]
        point: Option<String>,
        #[command(flatten)]
        input: Input,
    },
    /// Isomorphism test between two object JSON files.
    Equiv { a: String, b: String },
    /// Operator orders (and norms for --eps).
    Ord {
        /// nabla, znabla, znabla-inv, phi or thetaphi-inv.
        #[arg(long)]
        expr: String,
        #[arg(long)]
        eps: Option<String>,
        #[arg(long)]
        point: Option<String>,
        #[command(flatten)]
        input: Input,
    },
    /// Global Mellin image of an expression in z and D.
    Global {
        #[arg(long, allow_hyphen_values = true)]
        expr: String,
    },
    /// Window-operator oracle checks.
    Oracle {
        /// lemma51, lemma51-root, commutation, exp103, class or roundtrip.
        #[arg(long)]
        check: String,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        n: i64,
        #[arg(long, default_value_t = 2)]
        m: u32,
        #[arg(long, default_value_t = 2)]
        p: u32,
        #[arg(long, default_value_t = 1)]
        q: i64,
        #[arg(long)]
        point: Option<String>,
        #[command(flatten)]
        input: Input,
    },
}

/// Captured result of one invocation.
#[derive(Clone, Debug, PartialEq)]
pub struct CliOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

struct Ctx {
    cfg: FieldConfig,
    opts: TransformOptions,
    format: Format,
}

/// Runs the command line with `MELLIN_FIELD` taken from the environment.
pub fn run(argv: &[String]) -> CliOutput {
    run_with_env(argv, std::env::var("MELLIN_FIELD").ok())
}

pub fn run_with_env(argv: &[String], env_field: Option<String>) -> CliOutput {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => CliOutput {
                    code: 0,
                    stdout: text,
                    stderr: String::new(),
                },
                _ => CliOutput {
                    code: 2,
                    stdout: String::new(),
                    stderr: text,
                },
            };
        }
    };
    let format = cli.format;
    match dispatch(cli, env_field) {
        Ok((code, out)) => CliOutput {
            code,
            stdout: out,
            stderr: String::new(),
        },
        Err(e) => error_output(&e, format),
    }
}

fn error_kind(e: &Error) -> String {
    format!("{:?}", e).chars().take_while(|c| c.is_ascii_alphanumeric()).collect()
}

fn error_json(e: &Error) -> Value {
    json!({"error": {"kind": error_kind(e), "message": e.to_string(), "exit_code": e.exit_code()}})
}

fn error_output(e: &Error, format: Format) -> CliOutput {
    match format {
        Format::Json => CliOutput {
            code: e.exit_code(),
            stdout: format!("{}\n", error_json(e)),
            stderr: String::new(),
        },
        Format::Text => CliOutput {
            code: e.exit_code(),
            stdout: String::new(),
            stderr: format!("error: {}\n", e),
        },
    }
}

fn field_config(cli: &Cli, env_field: Option<String>) -> Result<FieldConfig> {
    let name = cli.field.clone().or(env_field).unwrap_or_else(|| "qq".into());
    match name.as_str() {
        "qq" => Ok(FieldConfig::exact()),
        "cc" => {
            let d = FieldConfig::approx();
            FieldConfig::approx_with(cli.prec.unwrap_or(d.precision_bits), cli.tol.unwrap_or(d.tolerance))
        }
        other => Err(Error::InvalidConfig(format!("unknown field '{}' (expected qq or cc)", other))),
    }
}

fn read_source(path: &str) -> Result<String> {
    if path == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| Error::Io(e.to_string()))?;
        return Ok(s);
    }
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {}", path, e)))
}

fn object_from_json_text(text: &str, cfg: &FieldConfig) -> Result<Object> {
    let j: ObjectJson = serde_json::from_str(text).map_err(|e| Error::syntax(e.column(), format!("invalid object JSON: {}", e)))?;
    Object::from_json(&j, cfg)
}

fn point_or(tag: Option<&str>, cfg: &FieldConfig) -> Result<Option<Point>> {
    tag.map(|t| Point::parse(t, cfg)).transpose()
}

/// The object described by `--input`, `--f` (needs a point) or `--g`.
fn single_object(input: &Input, point: Option<&Point>, cfg: &FieldConfig) -> Result<Object> {
    if let Some(path) = &input.input {
        return object_from_json_text(&read_source(path)?, cfg);
    }
    if input.jordan == 0 {
        return Err(Error::syntax(0, "jordan size must be positive"));
    }
    if let Some(text) = &input.f {
        let point = point.ok_or_else(|| Error::UnsupportedPoint("--f needs a point (--from / --point)".into()))?;
        let f = parse_series(text, cfg, point.var())?;
        let comp = crate::objects::Component::new(f, input.jordan);
        return Ok(Object::Connection(ConnectionObject::new(point.clone(), vec![comp])));
    }
    if let Some(text) = &input.g {
        let g = parse_series(text, cfg, Var::Theta)?;
        let comp = crate::objects::Component::new(g, input.jordan);
        return Ok(Object::DiffOp(DiffOpObject::new(vec![comp])));
    }
    Err(Error::syntax(0, "no input: pass --f, --g, --input or --batch"))
}

/// Objects from `--batch` (one JSON per line) or the single input.
fn objects(input: &Input, point: Option<&Point>, cfg: &FieldConfig) -> Result<Vec<Result<Object>>> {
    match &input.batch {
        Some(path) => Ok(read_source(path)?
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| object_from_json_text(l, cfg))
            .collect()),
        None => Ok(vec![single_object(input, point, cfg)]),
    }
}

fn render_object(o: &Object, format: Format) -> String {
    match format {
        Format::Text => format!("{}\n", o),
        Format::Json => format!("{}\n", serde_json::to_string(&o.to_json()).expect("object JSON serializes")),
    }
}

/// Applies `f` to every input object. A single input propagates its
/// error; batch mode renders errors inline and returns the worst code.
fn for_each_object(ctx: &Ctx, batch: bool, objs: Vec<Result<Object>>, f: impl Fn(&Object) -> Result<Object>) -> Result<(i32, String)> {
    if !batch {
        let o = objs.into_iter().next().expect("one input")?;
        return Ok((0, render_object(&f(&o)?, ctx.format)));
    }
    let mut code = 0;
    let mut out = String::new();
    for o in objs {
        match o.and_then(|o| f(&o)) {
            Ok(r) => out.push_str(&render_object(&r, ctx.format).replace('\n', if ctx.format == Format::Text { "; " } else { "" }).trim_end_matches("; ").to_string()),
            Err(e) => {
                code = code.max(e.exit_code());
                match ctx.format {
                    Format::Json => out.push_str(&error_json(&e).to_string()),
                    Format::Text => out.push_str(&format!("error: {}", e)),
                }
            }
        }
        out.push('\n');
    }
    Ok((code, out))
}

fn forward_kind(p: &Point) -> TransformKind {
    match p {
        Point::Zero => TransformKind::M0Inf,
        Point::Finite(_) => TransformKind::MxInf,
        Point::Infinity => TransformKind::MinfInf,
    }
}

fn dispatch(cli: Cli, env_field: Option<String>) -> Result<(i32, String)> {
    let cfg = field_config(&cli, env_field)?;
    let ctx = Ctx {
        cfg,
        opts: TransformOptions {
            margin: cli.margin,
            branch: cli.branch,
        },
        format: cli.format,
    };
    let cfg = &ctx.cfg;
    match &cli.cmd {
        Cmd::Parse { expr, var } => {
            let v = Var::from_name(var).ok_or_else(|| Error::syntax(0, format!("unknown variable '{}'", var)))?;
            let s = parse_series(expr, cfg, v)?;
            Ok((0, match ctx.format {
                Format::Text => format!("{}\n", s),
                Format::Json => format!("{}\n", serde_json::to_string(&s.to_json()).expect("series JSON serializes")),
            }))
        }
        Cmd::Transform { from, input } => {
            let from = point_or(from.as_deref(), cfg)?;
            let objs = objects(input, from.as_ref(), cfg)?;
            for_each_object(&ctx, input.batch.is_some(), objs, |o| {
                let Object::Connection(e) = o else { return Err(Error::KindMismatch) };
                if let Some(p) = &from {
                    if *p != e.point {
                        return Err(Error::UnsupportedPoint(format!("--from {} but the object is at {}", p.tag(), e.point.tag())));
                    }
                }
                let x = match &e.point {
                    Point::Finite(x) => Some(x.clone()),
                    _ => None,
                };
                transform(forward_kind(&e.point), o, x.as_ref(), &ctx.opts)
            })
        }
        Cmd::Inverse { to, input } => {
            let to = Point::parse(to, cfg)?;
            let input = Input {
                g: input.g.clone().or_else(|| input.f.clone()),
                f: None,
                jordan: input.jordan,
                input: input.input.clone(),
                batch: input.batch.clone(),
            };
            let objs = objects(&input, None, cfg)?;
            let (kind, x) = match &to {
                Point::Zero => (TransformKind::InvM0Inf, None),
                Point::Finite(x) => (TransformKind::InvMxInf, Some(x.clone())),
                Point::Infinity => (TransformKind::InvMinfInf, None),
            };
            for_each_object(&ctx, input.batch.is_some(), objs, |o| transform(kind, o, x.as_ref(), &ctx.opts))
        }
        Cmd::Canon { point, input } => {
            let point = point_or(point.as_deref(), cfg)?;
            let objs = objects(input, point.as_ref(), cfg)?;
            for_each_object(&ctx, input.batch.is_some(), objs, |o| o.canonicalize())
        }
        Cmd::Equiv { a, b } => {
            let oa = object_from_json_text(&read_source(a)?, cfg)?;
            let ob = object_from_json_text(&read_source(b)?, cfg)?;
            let w = iso_witness(&oa, &ob)?;
            Ok((0, match ctx.format {
                Format::Json => format!(
                    "{}\n",
                    json!({"equivalent": w.is_some(), "witness": w.clone().unwrap_or_default()})
                ),
                Format::Text => {
                    let mut s = format!("{}\n", w.is_some());
                    for (i, k, j) in w.unwrap_or_default() {
                        s.push_str(&format!("component {} ~ component {} (galois shift {})\n", i, k, j));
                    }
                    s
                }
            }))
        }
        Cmd::Ord { expr, eps, point, input } => {
            let expr = OrderExpr::parse(expr)?;
            let eps = eps
                .as_deref()
                .map(|t| {
                    t.trim()
                        .parse::<BigRational>()
                        .map_err(|_| Error::syntax(0, format!("invalid epsilon '{}'", t)))
                })
                .transpose()?;
            let point = point_or(point.as_deref(), cfg)?;
            let o = single_object(input, point.as_ref(), cfg)?;
            let rep = order_report(&o, expr, eps.as_ref())?;
            let orders: Vec<String> = rep.orders.iter().map(|o| o.to_string()).collect();
            let norms: Option<Vec<String>> = rep.norms.as_ref().map(|ns| {
                ns.iter()
                    .map(|n| match n.exact_value() {
                        Some(v) => v.to_string(),
                        None => format!("({})^({})", n.eps, n.order),
                    })
                    .collect()
            });
            Ok((0, match ctx.format {
                Format::Json => format!("{}\n", json!({"orders": orders, "norms": norms})),
                Format::Text => {
                    let mut s = String::new();
                    for (i, o) in orders.iter().enumerate() {
                        s.push_str(&format!("component {}: order {}", i, o));
                        if let Some(ns) = &norms {
                            s.push_str(&format!(", norm {}", ns[i]));
                        }
                        s.push('\n');
                    }
                    s
                }
            }))
        }
        Cmd::Global { expr } => {
            let e = parse_domain(expr)?;
            let img = global_mellin(&e);
            Ok((0, match ctx.format {
                Format::Json => format!("{}\n", json!({"input": e.to_string(), "image": img.to_string()})),
                Format::Text => format!("{}\n", img),
            }))
        }
        Cmd::Oracle { check, n, m, p, q, point, input } => {
            let point = point_or(point.as_deref(), cfg)?;
            let rep = run_oracle(&ctx, check, *n, *m, *p, *q, point.as_ref(), input)?;
            let code = if rep.pass { 0 } else { 1 };
            Ok((code, match ctx.format {
                Format::Json => format!("{}\n", rep.to_json()),
                Format::Text => format!("{}\n", rep),
            }))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn run_oracle(ctx: &Ctx, check: &str, n: i64, m: u32, p: u32, q: i64, point: Option<&Point>, input: &Input) -> Result<OracleReport> {
    let cfg = &ctx.cfg;
    let f_at = |var: Var| -> Result<crate::puiseux::PuiseuxSeries> {
        let text = input.f.as_deref().ok_or_else(|| Error::syntax(0, "this check needs --f"))?;
        parse_series(text, cfg, var)
    };
    match check {
        "lemma51" => oracle::check_operator_root_integer(&f_at(Var::Z)?, n, q, m, None),
        "lemma51-root" => oracle::check_operator_root_fractional(&f_at(Var::Z)?, n, q, p, None),
        "commutation" => oracle::check_commutation(&f_at(Var::Z)?, None),
        "exp103" => oracle::check_expansion_10_3(&f_at(Var::Z)?, None),
        "class" => {
            let point = point.cloned().unwrap_or(Point::Zero);
            let f = f_at(point.var())?.with_var(point.var());
            oracle::check_transform_class(&point, &f, &ctx.opts)
        }
        "roundtrip" => {
            let point = point.cloned().unwrap_or(Point::Zero);
            let o = single_object(input, Some(&point), cfg)?;
            oracle::check_roundtrip(&o, &ctx.opts)
        }
        other => Err(Error::syntax(0, format!("unknown check '{}'", other))),
    }
}
