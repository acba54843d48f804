mod render;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kq_core::bonacci::{self, BonacciError, C2Outcome};
use kq_core::certificate::{self, Certificate};
use kq_core::dimension::{self, DimError, MEstimate};
use kq_core::dynamics::{self, enumerate_orbits, DynSystem, SystemKind};
use kq_core::numeric::{field_from_literal, parse_element, Field, FieldElement};
use kq_core::slice::{self, interval_strings, plain, CardinalityClaim, SliceError};
use kq_core::thickness::{self, FamilySpec, ThickError};
use kq_core::words::{parse_tail, Alphabet};
use render::{Overlay, RenderSpec};
use serde_json::{json, Value};
use std::io::Write;
use std::process::ExitCode;
use std::sync::Arc;

/// Digits printed for interval bounds.
const DIGITS: usize = 12;

#[derive(Parser, Debug)]
#[command(name = "kq", version, about = "Exact slices of Okamoto's self-affine curves K_q")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug)]
struct Common {
    /// Base q in (1, 2): p/q, a decimal, bonacci:k or algebraic:c0,..,cn:lo:hi.
    #[arg(long)]
    q: String,
    /// JSON-lines output (the only format; kept for scripts that pass it).
    #[arg(long, default_value_t = true)]
    json: bool,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Cylinders and cardinality of the horizontal slice at height y.
    Slice {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        y: String,
        #[arg(long)]
        depth: usize,
        /// Also compare with the geometric IFS oracle at depth min(depth, 12).
        #[arg(long)]
        oracle: bool,
    },
    /// The E_q orbit tree of x (or of x = y/(q-1)).
    OrbitTree {
        #[command(flatten)]
        common: Common,
        #[arg(long, conflicts_with = "y", required_unless_present = "y")]
        x: Option<String>,
        #[arg(long)]
        y: Option<String>,
        #[arg(long)]
        depth: usize,
    },
    /// Gap structure and thickness bound of aq, sk:<k> or scaled-sk:<k>.
    Thickness {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        set: String,
        #[arg(long)]
        level: usize,
    },
    /// Finds a height whose slice has exactly three points.
    CertifySlice3 {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        depth: usize,
    },
    /// Odd-cardinality, null-infinite and two-orbit probes at k-Bonacci bases.
    Bonacci {
        #[command(subcommand)]
        cmd: BonacciCmd,
    },
    /// Lower bound or box-counting estimate for the slice dimension.
    Dimension {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        y: String,
        #[arg(long, value_enum)]
        method: Method,
        /// R-tree levels for mass, largest box depth for box.
        #[arg(long)]
        levels: usize,
        #[arg(long, default_value_t = 10)]
        max_len: usize,
        #[arg(long, default_value_t = dimension::DEFAULT_GRID)]
        grid: usize,
    },
    /// SVG of the n-th piecewise-linear iterate of K_q.
    Render {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        iterations: usize,
        /// Output path; the SVG goes to stdout when omitted.
        #[arg(long)]
        svg: Option<String>,
        #[arg(long, default_value_t = 600)]
        width: u32,
        #[arg(long, default_value_t = 600)]
        height: u32,
        /// Slice heights to draw; repeatable.
        #[arg(long)]
        y: Vec<String>,
        #[arg(long, default_value_t = 24)]
        slice_depth: usize,
        /// Gap family drawn as a band at heights v(q-1)/q.
        #[arg(long)]
        gaps: Option<String>,
        #[arg(long, default_value_t = 8)]
        gap_level: usize,
    },
}

#[derive(Subcommand, Debug)]
enum BonacciCmd {
    /// Certifies that x_m has exactly 2m+1 orbits at q_k.
    Verify {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        delta: String,
        #[arg(long)]
        depth: usize,
    },
    /// Checks the null-infinite branching of 1/q_k.
    NullInfinite {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        depth: usize,
    },
    /// Decides whether 1/q has exactly two orbits.
    C2 {
        #[arg(long)]
        q: String,
        #[arg(long)]
        depth: usize,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Method {
    Mass,
    Box,
}

enum Failure {
    Input(String),
    Uncertified,
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Input(e.to_string())
    }
}

type Run = Result<bool, Failure>;

fn diagnostic(kind: &str, message: &str) {
    let v = json!({"error": kind, "message": message.trim_end()});
    eprintln!("{v}");
}

fn emit(out: &mut impl Write, v: &Value) {
    // serde_json maps are sorted, so output bytes depend only on the inputs
    let _ = writeln!(out, "{v}");
}

fn base(lit: &str) -> Result<Arc<Field>, Failure> {
    let f = field_from_literal(lit)?;
    dynamics::check_base(&f)?;
    Ok(f)
}

fn element(f: &Arc<Field>, s: &str) -> Result<FieldElement, Failure> {
    Ok(parse_element(f, s)?)
}

fn float_interval(v: f64) -> [String; 2] {
    [format!("{:.6}", v - 1e-6), format!("{:.6}", v + 1e-6)]
}

fn run_slice(out: &mut impl Write, c: &Common, y: &str, depth: usize, oracle: bool) -> Run {
    let f = base(&c.q)?;
    let y = element(&f, y)?;
    let res = slice::compute_slice(&f, &y, depth).map_err(|e| match e {
        SliceError::Dynamics(_) => Failure::Uncertified,
        other => Failure::from(other),
    })?;
    let mut v = res.to_json();
    let mut ok = matches!(res.claim, CardinalityClaim::ExactlyN { certified: true, .. });
    if oracle {
        let d = depth.min(slice::ORACLE_DEPTH);
        let geo: Vec<String> = slice::geometric_slice_oracle(&f, &y, d).iter().map(plain).collect();
        let dyn_words: Vec<String> = slice::compute_slice(&f, &y, d)
            .map(|r| {
                let mut w: Vec<String> = r.cylinders.iter().map(plain).collect();
                w.sort();
                w
            })
            .unwrap_or_default();
        let agrees = geo == dyn_words;
        ok &= agrees;
        v["oracle"] = json!({"depth": d, "agrees": agrees, "cylinders": geo});
    }
    emit(out, &v);
    Ok(ok)
}

fn run_orbit_tree(out: &mut impl Write, c: &Common, x: Option<&str>, y: Option<&str>, depth: usize) -> Run {
    let f = base(&c.q)?;
    let x = match (x, y) {
        (Some(x), _) => element(&f, x)?,
        (None, Some(y)) => {
            let y = element(&f, y)?;
            y.div(&FieldElement::q(&f).add_int(-1))?
        }
        (None, None) => return Err(Failure::Input("one of --x or --y is required".into())),
    };
    let sys = DynSystem::new(SystemKind::Eq, &f)?;
    if !sys.contains(&x) {
        return Err(Failure::Input("x lies outside I_q".into()));
    }
    let tree = enumerate_orbits(&sys, &x, depth);
    let mut v = tree.to_json(DIGITS);
    v["q"] = json!(f.label());
    v["x"] = json!(interval_strings(&x, DIGITS));
    emit(out, &v);
    Ok(true)
}

fn thick_failure(e: ThickError) -> Failure {
    match e {
        ThickError::BaseTooSmall
        | ThickError::BelowBonacci(_)
        | ThickError::BaseOutOfRange
        | ThickError::TooMany(..) => Failure::Input(e.to_string()),
        _ => Failure::Uncertified,
    }
}

fn run_thickness(out: &mut impl Write, c: &Common, set: &str, level: usize) -> Run {
    let f = base(&c.q)?;
    let spec = FamilySpec::parse(set).ok_or_else(|| Failure::Input(format!("unknown set `{set}`")))?;
    let gs = thickness::enumerate_gaps(&f, spec, level).map_err(thick_failure)?;
    let has_gaps = !gs.classes.is_empty();
    emit(out, &gs.to_json(DIGITS));
    Ok(has_gaps)
}

fn round_trip(cert: &Certificate) -> bool {
    let text = serde_json::to_string(&cert.to_json()).expect("certificate serializes");
    Certificate::from_json(&text).and_then(|c| certificate::check(&c)).is_ok()
}

fn run_slice3(out: &mut impl Write, c: &Common, depth: usize) -> Run {
    let f = base(&c.q)?;
    let w = thickness::find_slice3_witness(&f, depth).map_err(thick_failure)?;
    let checked = round_trip(&w.certificate);
    emit(
        out,
        &json!({
            "q": f.label(),
            "y": interval_strings(&w.y, DIGITS),
            "height": interval_strings(&w.height, DIGITS),
            "slice": w.slice.to_json(),
            "refinements": w.refinements,
            "certificate": w.certificate.to_json(),
            "check": checked,
        }),
    );
    Ok(checked)
}

fn bonacci_failure(e: BonacciError) -> Failure {
    match e {
        BonacciError::CertificationFailed(_) => Failure::Uncertified,
        other => Failure::from(other),
    }
}

fn run_bonacci(out: &mut impl Write, cmd: &BonacciCmd) -> Run {
    match cmd {
        BonacciCmd::Verify { k, m, delta, depth } => {
            let delta = parse_tail(delta, Alphabet::Binary01)?;
            let r = bonacci::verify_odd_cardinality(*k, *m, &delta, *depth).map_err(bonacci_failure)?;
            let checked = round_trip(&r.certificate);
            let mut v = r.to_json();
            v["check"] = json!(checked);
            emit(out, &v);
            Ok(checked)
        }
        BonacciCmd::NullInfinite { k, depth } => {
            let r = bonacci::null_infinite_probe(*k, *depth).map_err(bonacci_failure)?;
            let checked = round_trip(&r.certificate);
            let mut v = r.to_json();
            v["check"] = json!(checked);
            emit(out, &v);
            Ok(checked)
        }
        BonacciCmd::C2 { q, depth } => {
            let f = base(q)?;
            let r = bonacci::c2_probe(&f, *depth).map_err(bonacci_failure)?;
            let mut v = r.to_json();
            v["q"] = json!(f.label());
            emit(out, &v);
            Ok(!matches!(r, C2Outcome::Unknown { .. }))
        }
    }
}

fn dim_failure(e: DimError) -> Failure {
    match e {
        DimError::NotInSwitchRegion | DimError::Dynamics(_) => Failure::Input(e.to_string()),
        _ => Failure::Uncertified,
    }
}

fn run_dimension(
    out: &mut impl Write,
    c: &Common,
    y: &str,
    method: Method,
    levels: usize,
    max_len: usize,
    grid: usize,
) -> Run {
    let f = base(&c.q)?;
    let y = element(&f, y)?;
    let x = y.div(&FieldElement::q(&f).add_int(-1))?;
    let mut v = json!({
        "q": f.label(),
        "y": interval_strings(&y, DIGITS),
        "method": format!("{method:?}").to_lowercase(),
        "s_lower": null,
        "M": null,
        "box_estimate": null,
        "residual": null,
    });
    let ok = match method {
        Method::Mass => {
            let est = dimension::estimate_m(&f, grid, max_len).map_err(dim_failure)?;
            match est {
                MEstimate::Finite { m, .. } => {
                    v["M"] = json!(m);
                    v["s_lower"] = json!(float_interval(dimension::dimension_lower_bound(m).map_err(dim_failure)?));
                    let tree = dimension::build_r_tree(&f, &x, levels, max_len).map_err(dim_failure)?;
                    v["r_tree"] = tree.to_json();
                    tree.checks.all()
                }
                MEstimate::Unknown { cell, max_len } => {
                    v["unknown_cell"] =
                        json!([interval_strings(&cell.0, DIGITS)[0], interval_strings(&cell.1, DIGITS)[1]]);
                    v["max_len"] = json!(max_len);
                    false
                }
            }
        }
        Method::Box => {
            let lo = (levels / 2).max(1);
            let depths: Vec<usize> = (lo..=levels).collect();
            let sets = dimension::slice_cylinder_sets(&f, &y, &depths, 1 << 20).map_err(dim_failure)?;
            let b = dimension::box_dimension_estimate(&sets).map_err(dim_failure)?;
            v["box_estimate"] = json!(float_interval(b.slope));
            v["residual"] = json!(float_interval(b.residual));
            v["counts"] = json!(b.counts);
            v["heuristic"] = json!(true);
            true
        }
    };
    emit(out, &v);
    Ok(ok)
}

#[allow(clippy::too_many_arguments)]
fn run_render(
    out: &mut impl Write,
    c: &Common,
    iterations: usize,
    svg: Option<&str>,
    width: u32,
    height: u32,
    ys: &[String],
    slice_depth: usize,
    gaps: Option<&str>,
    gap_level: usize,
) -> Run {
    let f = base(&c.q)?;
    if width == 0 || height == 0 {
        return Err(Failure::Input("width and height must be positive".into()));
    }
    let mut overlays = Vec::new();
    let mut marks = Vec::new();
    for s in ys {
        let y = element(&f, s)?;
        if y.sign().is_lt() || y > FieldElement::one(&f) {
            return Err(Failure::Input(format!("overlay height {s} outside [0, 1]")));
        }
        overlays.push(Overlay::SliceLine { y: y.to_f64() });
        let res = slice::compute_slice(&f, &y, slice_depth).map_err(|_| Failure::Uncertified)?;
        for x in res.x_left_ends() {
            let xf = FieldElement::from_rational(&f, x.clone()).to_f64();
            overlays.push(Overlay::Point { x: xf, y: y.to_f64() });
            marks.push(json!({"y": s, "x": kq_core::numeric::format_rational(&x)}));
        }
    }
    if let Some(set) = gaps {
        let spec = FamilySpec::parse(set).ok_or_else(|| Failure::Input(format!("unknown set `{set}`")))?;
        let gs = thickness::enumerate_gaps(&f, spec, gap_level).map_err(thick_failure)?;
        let scale = FieldElement::q(&f).add_int(-1).div(&FieldElement::q(&f))?.to_f64();
        let band = gs.gaps.iter().map(|g| (g.lo.hi.to_f64() * scale, g.hi.lo.to_f64() * scale)).collect();
        overlays.push(Overlay::GapBand { gaps: band });
    }
    let spec = RenderSpec { width, height, iterations, overlays };
    let doc = render::render_kq(&f, &spec);
    match svg {
        Some(path) => {
            std::fs::write(path, &doc)?;
            emit(
                out,
                &json!({
                    "q": f.label(),
                    "svg": path,
                    "iterations": iterations,
                    "resolution": iterations.min(render::MAX_RESOLUTION),
                    "marks": marks,
                }),
            );
        }
        None => {
            let _ = out.write_all(doc.as_bytes());
        }
    }
    Ok(true)
}

fn dispatch(cli: &Cli, out: &mut impl Write) -> Run {
    match &cli.cmd {
        Cmd::Slice { common, y, depth, oracle } => run_slice(out, common, y, *depth, *oracle),
        Cmd::OrbitTree { common, x, y, depth } => run_orbit_tree(out, common, x.as_deref(), y.as_deref(), *depth),
        Cmd::Thickness { common, set, level } => run_thickness(out, common, set, *level),
        Cmd::CertifySlice3 { common, depth } => run_slice3(out, common, *depth),
        Cmd::Bonacci { cmd } => run_bonacci(out, cmd),
        Cmd::Dimension { common, y, method, levels, max_len, grid } => {
            run_dimension(out, common, y, *method, *levels, *max_len, *grid)
        }
        Cmd::Render { common, iterations, svg, width, height, y, slice_depth, gaps, gap_level } => run_render(
            out,
            common,
            *iterations,
            svg.as_deref(),
            *width,
            *height,
            y,
            *slice_depth,
            gaps.as_deref(),
            *gap_level,
        ),
    }
}

fn configure_workers() -> Result<(), String> {
    let Ok(s) = std::env::var("KQ_WORKERS") else {
        return Ok(());
    };
    let n: usize = s.trim().parse().map_err(|_| format!("KQ_WORKERS must be a positive integer, got `{s}`"))?;
    if n == 0 {
        return Err("KQ_WORKERS must be a positive integer, got `0`".into());
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            diagnostic("usage", &e.to_string());
            return ExitCode::from(1);
        }
    };
    if let Err(msg) = configure_workers() {
        diagnostic("environment", &msg);
        return ExitCode::from(1);
    }
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match dispatch(&cli, &mut out) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) | Err(Failure::Uncertified) => ExitCode::from(2),
        Err(Failure::Input(msg)) => {
            diagnostic("input", &msg);
            ExitCode::from(1)
        }
    }
}
