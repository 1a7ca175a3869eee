//! `slicefn` — batch front end for slice-function analysis.
//!
//! Reads a rational expression (JSON expression tree), runs the requested
//! analysis over the chosen coefficient algebra, and writes a deterministic
//! JSON report (plus a CSV coefficient table for `expand`).  Exit codes:
//! 0 success, 2 invalid input, 3 numerical failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use serde_json::{json, Map, Value};

use slicefn::{
    classify_rational, default_laurent_radius, default_spherical_radius, laurent_coeffs,
    spherical_numbers, tol, Algebra, AlgebraName, Elem, Expr, RationalExpr, ShellSpec, SphereId,
};

#[derive(Copy, Clone, ValueEnum)]
enum AlgebraArg {
    #[value(name = "C")]
    C,
    #[value(name = "H")]
    H,
    #[value(name = "O")]
    O,
    #[value(name = "CL3")]
    Cl3,
    #[value(name = "BC")]
    Bc,
}

impl AlgebraArg {
    fn name(self) -> AlgebraName {
        match self {
            AlgebraArg::C => AlgebraName::C,
            AlgebraArg::H => AlgebraName::H,
            AlgebraArg::O => AlgebraName::O,
            AlgebraArg::Cl3 => AlgebraName::Cl3,
            AlgebraArg::Bc => AlgebraName::Bc,
        }
    }
}

#[derive(Copy, Clone, PartialEq, ValueEnum)]
enum TaskArg {
    /// Classify every singular sphere of the expression
    ClassifyAll,
    /// Compute a coefficient table around a center (JSON metadata + CSV)
    Expand,
    /// Evaluate the expression at given points
    Evaluate,
    /// Sample the algebra's norm constants
    Constants,
    /// Rasterize shell membership over the distinguished slice plane
    MembershipGrid,
}

impl TaskArg {
    fn label(self) -> &'static str {
        match self {
            TaskArg::ClassifyAll => "classify-all",
            TaskArg::Expand => "expand",
            TaskArg::Evaluate => "evaluate",
            TaskArg::Constants => "constants",
            TaskArg::MembershipGrid => "membership-grid",
        }
    }
}

#[derive(Copy, Clone, PartialEq, ValueEnum)]
enum ExpansionArg {
    /// Classical two-sided series on the slice plane
    Laurent,
    /// Spherical series in the symmetrized variables
    Spherical,
}

#[derive(Parser)]
#[command(
    name = "slicefn",
    version,
    about = "Slice-function analysis over real alternative *-algebras"
)]
struct Cli {
    /// Coefficient algebra
    #[arg(long, value_enum)]
    algebra: AlgebraArg,

    /// Analysis to run
    #[arg(long, value_enum)]
    task: TaskArg,

    /// Expression file: JSON tree of poly/add/mul/conj/inv nodes
    #[arg(long)]
    expr: Option<PathBuf>,

    /// Report file (JSON); `expand` writes the coefficient CSV next to it
    #[arg(long)]
    out: PathBuf,

    /// Seed for all randomized sampling
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Truncation index for expansions (1 ..= 64)
    #[arg(long = "K", default_value_t = tol::DEFAULT_K)]
    k: i64,

    /// Contour samples per circle, or sample count for `constants` (1 ..= 8192)
    #[arg(long = "N", default_value_t = tol::DEFAULT_N)]
    n: usize,

    /// Expansion center as comma-separated wire coordinates (`expand`)
    #[arg(long)]
    center: Option<String>,

    /// Series family for `expand`
    #[arg(long, value_enum, default_value_t = ExpansionArg::Laurent)]
    expansion: ExpansionArg,

    /// Contour radius for `expand`; derived from the singular spheres if absent
    #[arg(long)]
    radius: Option<f64>,

    /// Points file for `evaluate`: JSON array of wire-coordinate rows
    #[arg(long)]
    points: Option<PathBuf>,

    /// Shell file for `membership-grid`: a shell description JSON
    #[arg(long)]
    shell: Option<PathBuf>,

    /// Grid resolution per axis for `membership-grid` (2 ..= 1024)
    #[arg(long, default_value_t = 64)]
    resolution: usize,
}

enum Failure {
    Input(String),
    Numeric(String),
}

impl Failure {
    fn exit_code(&self) -> ExitCode {
        match self {
            Failure::Input(_) => ExitCode::from(2),
            Failure::Numeric(_) => ExitCode::from(3),
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Numeric(m) => m,
        }
    }
}

fn input<S: Into<String>>(msg: S) -> Failure {
    Failure::Input(msg.into())
}

fn numeric<S: Into<String>>(msg: S) -> Failure {
    Failure::Numeric(msg.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            f.exit_code()
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    if !(1..=tol::MAX_K).contains(&cli.k) {
        return Err(input(format!("--K must lie in 1 ..= {}", tol::MAX_K)));
    }
    if !(1..=tol::MAX_N).contains(&cli.n) {
        return Err(input(format!("--N must lie in 1 ..= {}", tol::MAX_N)));
    }

    let alg = Algebra::new(cli.algebra.name());
    let (parameters, result) = match cli.task {
        TaskArg::ClassifyAll => classify_all(cli, &alg)?,
        TaskArg::Expand => expand(cli, &alg)?,
        TaskArg::Evaluate => evaluate(cli, &alg)?,
        TaskArg::Constants => constants(cli, &alg)?,
        TaskArg::MembershipGrid => membership_grid(cli, &alg)?,
    };

    let report = json!({
        "tool": "slicefn",
        "version": env!("CARGO_PKG_VERSION"),
        "algebra": alg.name().to_string(),
        "task": cli.task.label(),
        "seed": cli.seed,
        "parameters": parameters,
        "tolerances": tolerance_table(),
        "result": result,
    });
    let mut body = serde_json::to_string_pretty(&report).expect("report serializes");
    body.push('\n');
    write_atomic(&cli.out, body.as_bytes())
        .map_err(|e| input(format!("cannot write {}: {e}", cli.out.display())))?;
    Ok(())
}

/// Every fixed numerical threshold in force, so reports are self-describing.
fn tolerance_table() -> Value {
    json!({
        "realness": tol::REALNESS,
        "cone_reconstruct": tol::CONE_RECONSTRUCT,
        "sphere_member": tol::SPHERE_MEMBER,
        "same_slice": tol::SAME_SLICE,
        "zero_coeff": tol::ZERO_COEFF,
        "normal_poly_imag": tol::NPOLY_IMAG,
        "poly_trim_rel": tol::TRIM_REL,
        "root_cluster": tol::ROOT_CLUSTER,
        "svd_truncate": tol::SVD_TRUNCATE,
        "singular_guard": tol::SINGULAR_GUARD,
        "radius_floor": tol::RADIUS_FLOOR,
    })
}

fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}

fn load_expression(cli: &Cli, alg: &Algebra) -> Result<(RationalExpr, Value), Failure> {
    let path = cli
        .expr
        .as_ref()
        .ok_or_else(|| input(format!("--task {} requires --expr", cli.task.label())))?;
    let text = fs::read_to_string(path)
        .map_err(|e| input(format!("cannot read {}: {e}", path.display())))?;
    let echo: Value = serde_json::from_str(&text)
        .map_err(|e| input(format!("{}: invalid JSON: {e}", path.display())))?;
    let expr: Expr = serde_json::from_value(echo.clone())
        .map_err(|e| input(format!("{}: not an expression tree: {e}", path.display())))?;
    let rational = RationalExpr::from_expr(alg, &expr)
        .map_err(|e| input(format!("{}: {e}", path.display())))?;
    Ok((rational, echo))
}

fn wire_row(alg: &Algebra, a: &Elem) -> Value {
    Value::Array(
        alg.to_wire(a)
            .into_iter()
            .map(|v| json!(v))
            .collect::<Vec<Value>>(),
    )
}

fn finite_or_unbounded(r: f64) -> Value {
    if r.is_finite() {
        json!(r)
    } else {
        json!("unbounded")
    }
}

fn classify_all(cli: &Cli, alg: &Algebra) -> Result<(Value, Value), Failure> {
    let (rational, echo) = load_expression(cli, alg)?;
    let mut spheres = Vec::new();
    for (s, mult) in rational.singular_spheres() {
        let report = classify_rational(&rational, s, cli.seed).map_err(|e| {
            numeric(format!(
                "classification failed at sphere (alpha={}, beta={}): {e}",
                s.alpha, s.beta
            ))
        })?;
        spheres.push(json!({
            "alpha": s.alpha,
            "beta": s.beta,
            "denominator_multiplicity": mult,
            "report": serde_json::to_value(&report).expect("report serializes"),
        }));
    }
    Ok((
        json!({ "expression": echo }),
        json!({ "singular_spheres": spheres }),
    ))
}

fn parse_center(cli: &Cli, alg: &Algebra) -> Result<Elem, Failure> {
    let raw = cli
        .center
        .as_ref()
        .ok_or_else(|| input("--task expand requires --center"))?;
    let coords: Vec<f64> = raw
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| input(format!("--center: {e}")))?;
    alg.from_wire(&coords).map_err(|e| input(format!("--center: {e}")))
}

fn expand(cli: &Cli, alg: &Algebra) -> Result<(Value, Value), Failure> {
    let (rational, echo) = load_expression(cli, alg)?;
    let center = parse_center(cli, alg)?;
    let spheres: Vec<SphereId> = rational.singular_spheres().iter().map(|t| t.0).collect();
    let sf = rational.to_slice_fn();
    let csv_path = cli.out.with_extension("csv");
    let csv_name = csv_path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "coefficients.csv".into());

    let (kind, radius, table, meta): (&str, f64, Vec<(i64, Elem)>, Value) = match cli.expansion {
        ExpansionArg::Laurent => {
            let radius = cli
                .radius
                .unwrap_or_else(|| default_laurent_radius(alg, &center, &spheres));
            let data = laurent_coeffs(&sf, &center, radius, cli.k, cli.n)
                .map_err(|e| numeric(format!("classical expansion quadrature failed: {e}")))?;
            let (r1, r2) = data.est_radii();
            let meta = json!({
                "slice_unit": wire_row(alg, data.slice_unit()),
                "zero_threshold": data.zero_threshold(),
                "estimated_inner_radius": finite_or_unbounded(r1),
                "estimated_outer_radius": finite_or_unbounded(r2),
                "principal_truncated": data.principal_truncated(),
            });
            let table = data.coeffs().iter().map(|(n, a)| (*n, a.clone())).collect();
            ("laurent", data.radius_used(), table, meta)
        }
        ExpansionArg::Spherical => {
            let radius = cli
                .radius
                .unwrap_or_else(|| default_spherical_radius(alg, &center, &spheres));
            let data = spherical_numbers(&sf, &center, radius, cli.k, cli.n)
                .map_err(|e| numeric(format!("spherical expansion quadrature failed: {e}")))?;
            let (s1, s2) = data.est_shell();
            let meta = json!({
                "slice_unit": wire_row(alg, data.slice_unit()),
                "zero_threshold": data.zero_threshold(),
                "estimated_inner_extent": finite_or_unbounded(s1),
                "estimated_outer_extent": finite_or_unbounded(s2),
            });
            let table = data.numbers().iter().map(|(n, a)| (*n, a.clone())).collect();
            ("spherical", data.radius_used(), table, meta)
        }
    };

    let mut csv = String::from("n");
    for i in 0..alg.dim() {
        csv.push_str(&format!(",w{i}"));
    }
    csv.push('\n');
    for (n, a) in &table {
        csv.push_str(&n.to_string());
        for v in alg.to_wire(a) {
            csv.push(',');
            csv.push_str(&format!("{v}"));
        }
        csv.push('\n');
    }
    write_atomic(&csv_path, csv.as_bytes())
        .map_err(|e| input(format!("cannot write {}: {e}", csv_path.display())))?;

    let parameters = json!({
        "expression": echo,
        "center": wire_row(alg, &center),
        "expansion": kind,
        "radius": radius,
        "k_max": cli.k,
        "samples": cli.n,
    });
    let result = json!({
        "csv": csv_name,
        "rows": table.len(),
        "metadata": meta,
    });
    Ok((parameters, result))
}

fn evaluate(cli: &Cli, alg: &Algebra) -> Result<(Value, Value), Failure> {
    let (rational, echo) = load_expression(cli, alg)?;
    let path = cli
        .points
        .as_ref()
        .ok_or_else(|| input("--task evaluate requires --points"))?;
    let text = fs::read_to_string(path)
        .map_err(|e| input(format!("cannot read {}: {e}", path.display())))?;
    let rows: Vec<Vec<f64>> = serde_json::from_str(&text)
        .map_err(|e| input(format!("{}: expected an array of coordinate rows: {e}", path.display())))?;

    let mut points = Vec::new();
    let mut values = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        let x = alg
            .from_wire(row)
            .map_err(|e| input(format!("{}: point {i}: {e}", path.display())))?;
        let v = rational
            .eval(&x)
            .map_err(|e| numeric(format!("evaluation failed at point {i}: {e}")))?;
        points.push(wire_row(alg, &x));
        values.push(wire_row(alg, &v));
    }
    Ok((
        json!({ "expression": echo, "count": rows.len() }),
        json!({ "points": points, "values": values }),
    ))
}

fn constants(cli: &Cli, alg: &Algebra) -> Result<(Value, Value), Failure> {
    let (submultiplicativity_lower, cone_product_upper) =
        alg.estimate_constants(cli.n, cli.seed);
    Ok((
        json!({ "samples": cli.n }),
        json!({
            "submultiplicativity_lower": submultiplicativity_lower,
            "cone_product_upper": cone_product_upper,
        }),
    ))
}

fn membership_grid(cli: &Cli, alg: &Algebra) -> Result<(Value, Value), Failure> {
    let path = cli
        .shell
        .as_ref()
        .ok_or_else(|| input("--task membership-grid requires --shell"))?;
    if !(2..=1024).contains(&cli.resolution) {
        return Err(input("--resolution must lie in 2 ..= 1024"));
    }
    let text = fs::read_to_string(path)
        .map_err(|e| input(format!("cannot read {}: {e}", path.display())))?;
    let spec: ShellSpec = serde_json::from_str(&text)
        .map_err(|e| input(format!("{}: not a shell description: {e}", path.display())))?;
    let center = alg
        .from_wire(&spec.center)
        .map_err(|e| input(format!("{}: shell center: {e}", path.display())))?;

    // Window the distinguished slice plane around the shell center, wide
    // enough to show the outer boundary (or the inner one when unbounded).
    let r2 = spec.r2.as_f64();
    let half_width = if r2.is_finite() {
        1.5 * r2.max(tol::RADIUS_FLOOR)
    } else {
        2.0 * (spec.r1 + 1.0)
    };
    let zc = alg.cone_decompose(&center);
    if !zc.in_cone {
        return Err(input(format!(
            "{}: shell center lies outside the quadratic cone",
            path.display()
        )));
    }
    let (alpha0, beta0) = (zc.alpha, zc.beta);

    let j = alg.imag_unit();
    let res = cli.resolution;
    let coord = |lo: f64, i: usize| lo + (2.0 * half_width) * (i as f64) / ((res - 1) as f64);
    let (alpha_lo, beta_lo) = (alpha0 - half_width, beta0 - half_width);
    let mut rows = Vec::with_capacity(res);
    let mut inside = 0_usize;
    for bi in 0..res {
        let beta = coord(beta_lo, bi);
        let mut row = String::with_capacity(res);
        for ai in 0..res {
            let alpha = coord(alpha_lo, ai);
            let x = &alg.real(alpha) + &j.scale(beta);
            if spec.contains(alg, &x) {
                row.push('1');
                inside += 1;
            } else {
                row.push('0');
            }
        }
        rows.push(Value::String(row));
    }

    let mut shell_echo = Map::new();
    shell_echo.insert(
        "center".into(),
        Value::Array(spec.center.iter().map(|v| json!(v)).collect()),
    );
    shell_echo.insert("kind".into(), serde_json::to_value(spec.kind).expect("kind"));
    shell_echo.insert("r1".into(), json!(spec.r1));
    shell_echo.insert("r2".into(), finite_or_unbounded(r2));

    Ok((
        json!({ "shell": Value::Object(shell_echo), "resolution": res }),
        json!({
            "alpha_range": [alpha_lo, alpha_lo + 2.0 * half_width],
            "beta_range": [beta_lo, beta_lo + 2.0 * half_width],
            "inside_count": inside,
            "rows": rows,
        }),
    ))
}
