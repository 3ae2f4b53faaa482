//! `atop`: command-line front end for the a-Toeplitz library.
//!
//! Exit status: 0 when the run's check passes, 1 on a tolerance failure or a
//! numerical error, 2 on a usage error.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use atoeplitz::a_toeplitz::{roundtrip_report, ATopQuantizer};
use atoeplitz::frame::{building_vector_scaled_with, cn_table, frame_gram, FrameContext};
use atoeplitz::io::write_matrix_json;
use atoeplitz::quadrature::QuadratureRule;
use atoeplitz::sphere::{
    eval_basis, husimi, sphere_quadrature, toeplitz_quantize, Basis, CMatrix, QuantParams, SpherePoint, StateVector,
};
use atoeplitz::symbol::{compose_symbols, star_c, symbol_of_matrix};
use atoeplitz::tqft::{curve_operator, symbol_trace_error, Curve, CurveSpec};
use atoeplitz::trig_matrix::{act_on_frame_scaled, constant, matrix_commutator, real_profile, BandMatrix};
use atoeplitz::window::WindowSpec;
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

#[derive(Parser)]
#[command(name = "atop", version, about = "a-Toeplitz quantization of the sphere: checks and tables")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Orthonormality of the monomial basis under the sphere quadrature.
    BasisCheck(BasisCheck),
    /// Frame coefficients as CSV `n,C_n,C_n-1,N*(C_n-1)`.
    CnTable(CnTable),
    /// Products and commutator of the shift matrices M1+ and M1-.
    ToyDemo(ToyDemo),
    /// Resolution of identity and frame action of M1.
    FrameCheck(FrameCheck),
    /// Symbol of a product against the composition of symbols.
    SymbolCompose(SymbolCompose),
    /// Quantize the symbol of a matrix and compare with the matrix.
    AtoeplitzRoundtrip(Roundtrip),
    /// Curve operator of the once-punctured torus.
    CurveOp(CurveOp),
    /// Operator symbol of a curve operator against its trace function.
    SymbolVsTrace(SymbolVsTrace),
    /// First-order Husimi correction of the Toeplitz operator of tau.
    HusimiRate(HusimiRate),
    /// Dense rendering of a named matrix.
    Matrix(MatrixCmd),
    /// Band multipliers of the symbol of a named matrix at one point.
    Symbol(SymbolCmd),
}

#[derive(Args)]
struct ToyDemo {
    #[arg(long = "N")]
    n: usize,
}

#[derive(Args)]
struct Output {
    /// Write the artifact here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BasisCheck {
    #[arg(long = "N")]
    n: usize,
    /// Gauss-Legendre nodes in tau [default: N].
    #[arg(long)]
    tau_nodes: Option<usize>,
    /// Uniform nodes in theta [default: 2N+1].
    #[arg(long)]
    theta_nodes: Option<usize>,
    /// Also write the quadrature rule as CSV `tau,theta,weight` to this path.
    #[arg(long)]
    rule_out: Option<PathBuf>,
}

#[derive(Args)]
struct CnTable {
    #[arg(long = "N")]
    n: usize,
    #[arg(long, default_value = "gaussian:0.5,0.2")]
    window: WindowSpec,
    /// Fail when N*max|C_n - 1| over 0.2 <= n/N <= 0.8 exceeds this.
    #[arg(long)]
    max_c: Option<f64>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct FrameCheck {
    #[arg(long = "N")]
    n: usize,
    #[arg(long, default_value = "gaussian:0.5,0.2")]
    window: WindowSpec,
}

#[derive(Clone, Copy, ValueEnum)]
enum MatrixName {
    Identity,
    M1,
    M1Plus,
    M1Minus,
    M1Alpha,
    M2Beta,
    Diag,
}

#[derive(Args)]
struct SymbolCompose {
    #[arg(long = "N")]
    n: usize,
    #[arg(long, value_enum)]
    left: MatrixName,
    #[arg(long, value_enum)]
    right: MatrixName,
}

#[derive(Args)]
struct Roundtrip {
    #[arg(long = "N")]
    n: usize,
    #[arg(long, value_enum)]
    matrix: MatrixName,
    #[arg(long, default_value = "gaussian:0.5,0.2")]
    window: WindowSpec,
    /// Gauss-Legendre nodes per unit tau panel.
    #[arg(long, default_value_t = 40)]
    tau_panels: usize,
    /// Uniform nodes in theta [default: 4N].
    #[arg(long)]
    theta_nodes: Option<usize>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct CurveOp {
    #[arg(long)]
    curve: Curve,
    #[arg(long = "N")]
    n: usize,
    #[arg(long, default_value_t = 1)]
    color: u32,
    /// Quantum level, hbar = pi/level [default: N + color].
    #[arg(long)]
    level: Option<f64>,
    /// Emit the matrix as JSON.
    #[arg(long)]
    dump: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Clone, Copy, ValueEnum)]
enum Emit {
    Csv,
    Json,
}

#[derive(Args)]
struct SymbolVsTrace {
    #[arg(long)]
    curve: Curve,
    #[arg(long, default_value_t = 1)]
    color: u32,
    #[arg(long = "Ns", value_delimiter = ',', default_value = "32,64,128,256")]
    ns: Vec<usize>,
    /// Band of parallels `lo,hi` in tau.
    #[arg(long, default_value = "0.3,0.7")]
    window: String,
    /// Smallest accepted rate exponent [default: 0.9 for gamma, 0.4 otherwise].
    #[arg(long)]
    min_p: Option<f64>,
    #[arg(long, value_enum, default_value = "csv")]
    emit: Emit,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct HusimiRate {
    #[arg(long = "Ns", value_delimiter = ',', default_value = "64,128,256")]
    ns: Vec<usize>,
    /// Largest accepted relative deviation of N(H - tau) from 1 - 2tau.
    #[arg(long, default_value_t = 0.1)]
    tol: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct MatrixCmd {
    #[arg(long = "N")]
    n: usize,
    #[arg(long, value_enum)]
    name: MatrixName,
    /// Emit the matrix as JSON.
    #[arg(long)]
    dump: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct SymbolCmd {
    #[arg(long = "N")]
    n: usize,
    #[arg(long, value_enum)]
    matrix: MatrixName,
    /// Evaluation point `tau,theta`.
    #[arg(long, default_value = "0.5,0")]
    z: String,
    /// Emit CSV with one row per grid index and re/im columns per band.
    #[arg(long)]
    dump_grid: bool,
    #[command(flatten)]
    output: Output,
}

enum Failure {
    Usage(String),
    Check(String),
}

impl From<atoeplitz::Error> for Failure {
    fn from(e: atoeplitz::Error) -> Self {
        Failure::Check(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Check(format!("i/o: {e}"))
    }
}

type Run = std::result::Result<String, Failure>;

fn usage(flag: &str, msg: impl std::fmt::Display) -> Failure {
    Failure::Usage(format!("invalid value for {flag}: {msg}"))
}

fn need_n(n: usize, min: usize) -> std::result::Result<(), Failure> {
    if n < min {
        return Err(usage("--N", format!("must be at least {min}, got {n}")));
    }
    Ok(())
}

fn verdict(ok: bool, summary: String) -> Run {
    if ok {
        Ok(summary)
    } else {
        Err(Failure::Check(summary))
    }
}

fn emit(out: &Output, body: &[u8]) -> io::Result<()> {
    match &out.out {
        Some(path) => fs::write(path, body),
        None => io::stdout().write_all(body),
    }
}

fn parse_pair(flag: &str, s: &str) -> std::result::Result<(f64, f64), Failure> {
    let bad = || usage(flag, format!("expected two comma-separated numbers, got `{s}`"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

fn frame_ctx(n: usize, window: &WindowSpec) -> std::result::Result<FrameContext, Failure> {
    let p = QuantParams::frame(n)?;
    let w = window.build(&p).map_err(|e| usage("--window", e))?;
    Ok(FrameContext::new(&p, w)?)
}

fn named_matrix(name: MatrixName, n: usize) -> atoeplitz::Result<BandMatrix> {
    let one = Complex64::new(1.0, 0.0);
    match name {
        MatrixName::Identity => BandMatrix::diagonal(n, constant(one)),
        MatrixName::M1 => BandMatrix::m1(n),
        MatrixName::M1Plus => BandMatrix::m1_plus(n),
        MatrixName::M1Minus => BandMatrix::m1_minus(n),
        MatrixName::M1Alpha => BandMatrix::m1_alpha(n, real_profile(|t| t * (1.0 - t))),
        MatrixName::M2Beta => BandMatrix::m2_beta(n, real_profile(|t| 1.0 + t)),
        MatrixName::Diag => BandMatrix::diagonal(n, real_profile(|t| t)),
    }
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

fn diag_line(m: &CMatrix) -> String {
    (0..m.nrows()).map(|i| format!("{}", m[(i, i)].re)).collect::<Vec<_>>().join(",")
}

fn basis_check(a: BasisCheck) -> Run {
    need_n(a.n, 1)?;
    let p = QuantParams::frame(a.n)?;
    let n_tau = a.tau_nodes.unwrap_or(a.n);
    let n_theta = a.theta_nodes.unwrap_or(2 * a.n + 1);
    let rule = sphere_quadrature(&p, n_tau, n_theta).map_err(|e| usage("--tau-nodes/--theta-nodes", e))?;
    let mut g = CMatrix::zeros(a.n, a.n);
    for node in rule.nodes() {
        let v = (0..a.n as i64).map(|k| eval_basis(&p, k, &node.point)).collect::<atoeplitz::Result<Vec<_>>>()?;
        for i in 0..a.n {
            for j in 0..a.n {
                g[(i, j)] += v[i].conj() * v[j] * node.weight;
            }
        }
    }
    let dev = max_abs(&(g - CMatrix::identity(a.n, a.n)));
    if let Some(path) = &a.rule_out {
        let mut buf = Vec::new();
        rule.write_csv(&mut buf)?;
        fs::write(path, buf)?;
    }
    verdict(dev < 1e-12, format!("N={} nodes={}x{} max Gram deviation {dev:e} (tolerance 1e-12)", a.n, n_tau, n_theta))
}

fn cn_table_cmd(a: CnTable) -> Run {
    need_n(a.n, 1)?;
    let ctx = frame_ctx(a.n, &a.window)?;
    let rows = cn_table(&ctx);
    let mut csv = String::from("n,C_n,C_n-1,N*(C_n-1)\n");
    for (k, c, d, s) in &rows {
        writeln!(csv, "{k},{c},{d},{s}").unwrap();
    }
    emit(&a.output, csv.as_bytes())?;
    let c = rows
        .iter()
        .filter(|r| (0.2..=0.8).contains(&(r.0 as f64 / a.n as f64)))
        .map(|r| r.3.abs())
        .fold(0.0, f64::max);
    if rows.iter().any(|r| !r.1.is_finite() || r.1 <= 0.0) {
        return Err(Failure::Check("non-positive or non-finite C_n".into()));
    }
    match a.max_c {
        Some(limit) => verdict(c <= limit, format!("interior N*max|C_n-1| = {c} (limit {limit})")),
        None => Ok(format!("interior N*max|C_n-1| = {c}")),
    }
}

fn toy_demo(a: ToyDemo) -> Run {
    need_n(a.n, 2)?;
    let p = BandMatrix::m1_plus(a.n)?.dense();
    let q = BandMatrix::m1_minus(a.n)?.dense();
    let pq = &p * &q;
    let comm = matrix_commutator(&p, &q)?;
    print!("M1+M1- diag: {}\n[M1+,M1-] diag: {}\n", diag_line(&pq), diag_line(&comm));
    let mut want_pq = CMatrix::identity(a.n, a.n);
    want_pq[(0, 0)] = Complex64::new(0.0, 0.0);
    let mut want_comm = CMatrix::zeros(a.n, a.n);
    want_comm[(0, 0)] = Complex64::new(-1.0, 0.0);
    want_comm[(a.n - 1, a.n - 1)] = Complex64::new(1.0, 0.0);
    let ok = pq == want_pq && comm == want_comm;
    verdict(ok, format!("N={} toy identities {}", a.n, if ok { "exact" } else { "violated" }))
}

fn frame_check(a: FrameCheck) -> Run {
    need_n(a.n, 2)?;
    let ctx = frame_ctx(a.n, &a.window)?;
    let g = frame_gram(&ctx, ctx.rule())?;
    let (mut off, mut diag) = (0.0f64, 0.0f64);
    for i in 0..a.n {
        for j in 0..a.n {
            if i == j {
                diag = diag.max((g[(i, i)] - ctx.cn()[i]).norm() / ctx.cn()[i]);
            } else {
                off = off.max(g[(i, j)].norm());
            }
        }
    }
    let p = ctx.params().clone();
    let m = BandMatrix::m1(a.n)?;
    let sc = star_c(&symbol_of_matrix(&m, &p)?, &ctx)?;
    let mut action = 0.0f64;
    for i in 0..20 {
        let z = SpherePoint::new((i as f64 + 0.5) / 20.0, 0.3 + 1.7 * i as f64)?;
        let lhs = act_on_frame_scaled(&m, &ctx, &z)?;
        let w = sc.at(&z)?.apply(ctx.window());
        let rhs = StateVector::new(building_vector_scaled_with(&p, &w, &z), Basis::Phi)?.to_psi(&ctx)?;
        let err: f64 = lhs.coeffs.iter().zip(&rhs.coeffs).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
        action = action.max(err / lhs.norm().max(f64::MIN_POSITIVE));
    }
    verdict(
        off < 1e-10 && diag < 1e-8 && action < 1e-10,
        format!(
            "N={} off-diagonal {off:e} (1e-10), diagonal vs C_n {diag:e} (1e-8), M1 frame action {action:e} (1e-10)",
            a.n
        ),
    )
}

fn symbol_compose(a: SymbolCompose) -> Run {
    need_n(a.n, 3)?;
    let p = QuantParams::frame(a.n)?;
    let l = named_matrix(a.left, a.n)?;
    let r = named_matrix(a.right, a.n)?;
    let composed = compose_symbols(&symbol_of_matrix(&l, &p)?, &symbol_of_matrix(&r, &p)?)?;
    let product = symbol_of_matrix(&l.mul(&r)?, &p)?;
    let mut worst = 0.0f64;
    for tau in [0.05, 0.25, 0.5, 0.75, 0.95] {
        let z = SpherePoint::new(tau, 1.3)?;
        let g1 = composed.at(&z)?.grid_matrix();
        let g2 = product.at(&z)?.grid_matrix();
        worst = worst.max((&g1 - &g2).norm() / g2.norm().max(1.0));
    }
    verdict(worst < 1e-12, format!("N={} composition vs product symbol {worst:e} (tolerance 1e-12)", a.n))
}

fn roundtrip(a: Roundtrip) -> Run {
    need_n(a.n, 2)?;
    if a.tau_panels == 0 {
        return Err(usage("--tau-panels", "must be positive"));
    }
    let n_theta = a.theta_nodes.unwrap_or(4 * a.n);
    if n_theta == 0 {
        return Err(usage("--theta-nodes", "must be positive"));
    }
    let ctx = frame_ctx(a.n, &a.window)?;
    let q = ATopQuantizer::unvalidated(&ctx, a.tau_panels, n_theta)?;
    let report = roundtrip_report(&q, &named_matrix(a.matrix, a.n)?)?;
    let mut json = serde_json::to_vec_pretty(&report).map_err(|e| Failure::Check(e.to_string()))?;
    json.push(b'\n');
    emit(&a.output, &json)?;
    verdict(report.rel_frobenius < 1e-6, format!("relative Frobenius residual {:e} (tolerance 1e-6)", report.rel_frobenius))
}

fn dump_matrix(m: &CMatrix, out: &Output) -> std::result::Result<(), Failure> {
    let mut buf = Vec::new();
    write_matrix_json(m, &mut buf)?;
    emit(out, &buf)?;
    Ok(())
}

fn curve_op(a: CurveOp) -> Run {
    need_n(a.n, 1)?;
    let spec = match a.level {
        Some(level) => CurveSpec::with_level(a.curve, a.n, a.color, level).map_err(|e| usage("--level", e))?,
        None => CurveSpec::new(a.curve, a.n, a.color).map_err(|e| usage("--color", e))?,
    };
    let m = curve_operator(&spec)?.dense();
    if a.dump {
        dump_matrix(&m, &a.output)?;
    }
    let herm = max_abs(&(&m - m.adjoint()));
    verdict(herm < 1e-14, format!("{} N={} color={} hbar={} hermiticity defect {herm:e}", a.curve, a.n, a.color, spec.hbar()))
}

fn symbol_vs_trace(a: SymbolVsTrace) -> Run {
    if a.ns.len() < 2 {
        return Err(usage("--Ns", "need at least two sizes for a rate fit"));
    }
    if let Some(&n) = a.ns.iter().find(|&&n| n < 4) {
        return Err(usage("--Ns", format!("sizes must be at least 4, got {n}")));
    }
    let win = parse_pair("--window", &a.window)?;
    if !(0.0 < win.0 && win.0 < win.1 && win.1 < 1.0) {
        return Err(usage("--window", "need 0 < lo < hi < 1"));
    }
    let report = symbol_trace_error(a.curve, a.color, &a.ns, win).map_err(|e| match e {
        atoeplitz::Error::InvalidParam { .. } => usage("--color", e),
        other => other.into(),
    })?;
    let body = match a.emit {
        Emit::Csv => {
            let mut csv = String::from("N,hbar,err,fitted_p\n");
            for r in &report.rows {
                writeln!(csv, "{},{},{},{}", r.n, r.hbar, r.err, report.fit.p).unwrap();
            }
            csv.into_bytes()
        }
        Emit::Json => {
            let mut v = serde_json::to_vec_pretty(&report).map_err(|e| Failure::Check(e.to_string()))?;
            v.push(b'\n');
            v
        }
    };
    emit(&a.output, &body)?;
    let min_p = a.min_p.unwrap_or(if a.curve == Curve::Gamma { 0.9 } else { 0.4 });
    verdict(report.fit.p >= min_p, format!("{} color={} fitted p {} (minimum {min_p})", a.curve, a.color, report.fit.p))
}

fn husimi_rate(a: HusimiRate) -> Run {
    if let Some(&n) = a.ns.iter().find(|&&n| n < 2) {
        return Err(usage("--Ns", format!("sizes must be at least 2, got {n}")));
    }
    let mut csv = String::from("N,tau,husimi,N*(husimi-tau),1-2tau\n");
    let mut worst = 0.0f64;
    for &n in &a.ns {
        let p = QuantParams::frame(n)?;
        let rule: QuadratureRule = sphere_quadrature(&p, n, 2 * n + 1)?;
        let t = toeplitz_quantize(&p, |z| Complex64::new(z.tau(), 0.0), &rule)?;
        for tau in [0.1, 0.25, 0.4, 0.65, 0.85] {
            let h = husimi(&p, &t, &SpherePoint::new(tau, 0.7 * tau)?)?.re;
            let first = n as f64 * (h - tau);
            let target = 1.0 - 2.0 * tau;
            worst = worst.max(((first - target) / target).abs());
            writeln!(csv, "{n},{tau},{h},{first},{target}").unwrap();
        }
    }
    emit(&a.output, csv.as_bytes())?;
    verdict(worst <= a.tol, format!("max relative deviation of N(H-tau) from 1-2tau {worst:e} (tolerance {})", a.tol))
}

fn matrix_cmd(a: MatrixCmd) -> Run {
    need_n(a.n, 1)?;
    let m = named_matrix(a.name, a.n)?;
    if a.dump {
        dump_matrix(&m.dense(), &a.output)?;
    }
    Ok(format!("N={} bands {:?}", a.n, m.band_indices()))
}

fn symbol_cmd(a: SymbolCmd) -> Run {
    need_n(a.n, 1)?;
    let (tau, theta) = parse_pair("--z", &a.z)?;
    let z = SpherePoint::new(tau, theta).map_err(|e| usage("--z", e))?;
    let p = QuantParams::frame(a.n)?;
    let s = symbol_of_matrix(&named_matrix(a.matrix, a.n)?, &p)?;
    let at = s.at(&z)?;
    let terms: Vec<_> = at.terms().collect();
    if a.dump_grid {
        let mut csv = String::from("n");
        for (k, _, _) in &terms {
            write!(csv, ",re[k={k}],im[k={k}]").unwrap();
        }
        csv.push('\n');
        for n in 0..a.n {
            write!(csv, "{n}").unwrap();
            for (_, c, m) in &terms {
                let v = c * m(n as f64);
                write!(csv, ",{},{}", v.re, v.im).unwrap();
            }
            csv.push('\n');
        }
        emit(&a.output, csv.as_bytes())?;
    }
    let shifts: Vec<i64> = terms.iter().map(|t| t.0).collect();
    Ok(format!("N={} z=({tau},{theta}) bands {shifts:?}", a.n))
}

fn configure_threads() -> std::result::Result<(), Failure> {
    let Ok(raw) = std::env::var("ATOP_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| usage("ATOP_THREADS", format!("expected a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Failure::Check(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match cli.cmd {
        Cmd::BasisCheck(a) => basis_check(a),
        Cmd::CnTable(a) => cn_table_cmd(a),
        Cmd::ToyDemo(a) => toy_demo(a),
        Cmd::FrameCheck(a) => frame_check(a),
        Cmd::SymbolCompose(a) => symbol_compose(a),
        Cmd::AtoeplitzRoundtrip(a) => roundtrip(a),
        Cmd::CurveOp(a) => curve_op(a),
        Cmd::SymbolVsTrace(a) => symbol_vs_trace(a),
        Cmd::HusimiRate(a) => husimi_rate(a),
        Cmd::Matrix(a) => matrix_cmd(a),
        Cmd::Symbol(a) => symbol_cmd(a),
    });
    match result {
        Ok(summary) => {
            eprintln!("PASS {summary}");
            ExitCode::SUCCESS
        }
        Err(Failure::Check(msg)) => {
            eprintln!("FAIL {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
