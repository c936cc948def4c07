use std::path::{Path, PathBuf};

use clap::Args;
use kframe_core::controlled::{controlled_kframe_check, make_controller, Controller};
use kframe_core::frames::{frame_bounds, frame_operator, FrameBounds};
use kframe_core::json::{frame_to_json, operator_to_json, vector_to_json};
use kframe_core::kframes::{
    associated_frame, bessel_dual_check, counterexample_k, interchange_dual, kframe_check,
};
use kframe_core::opcore::{gl_plus_check, range_basis};
use kframe_core::recon::{
    cg_solve, controlled_richardson_solve, generate_instance, richardson_solve, run_benchmark,
    write_csv, BenchConfig, ControllerChoice, InstanceKind, Relaxation, Solve, SolverConfig,
};
use kframe_core::{sampling, Error, FrameSequence, Operator, Tolerances, Vector};
use serde_json::{json, Value};

use crate::io::{expect_dim, read_frame, read_operator, read_vector, write_json};
use crate::{Ctx, Failure, GlobalArgs, Outcome};

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn input_err(e: Error) -> Failure {
    Failure::input(e.to_string())
}

fn witness_value(w: &Option<Vector>) -> Option<Value> {
    w.as_ref()
        .map(|v| json!({ "witness": to_value(&vector_to_json(v)) }))
}

fn load_controller(path: &Path, dim: usize, tol: &Tolerances) -> Result<Controller, Failure> {
    let c = read_operator(path)?;
    expect_dim(path, dim, c.dim())?;
    make_controller(&c, tol).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn load_k(path: Option<&Path>, dim: usize, ctx: &mut Ctx) -> Result<Operator, Failure> {
    match path {
        Some(p) => {
            ctx.input(p);
            let k = read_operator(p)?;
            expect_dim(p, dim, k.dim())?;
            Ok(k)
        }
        None => Ok(Operator::identity(dim)),
    }
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    /// Frame file ({"dim", "vectors"}).
    #[arg(long)]
    pub frame: PathBuf,
    /// Operator K; enables the K-frame check.
    #[arg(long)]
    pub k: Option<PathBuf>,
    /// Controller C; enables the controlled K-frame check (K defaults to I).
    #[arg(long)]
    pub c: Option<PathBuf>,
}

pub fn check(
    a: &CheckArgs,
    _g: &GlobalArgs,
    tol: &Tolerances,
    ctx: &mut Ctx,
) -> Result<Outcome, Failure> {
    ctx.input(&a.frame);
    let frame = read_frame(&a.frame)?;
    let d = frame.dim();
    let fb = frame_bounds(&frame, tol);
    let mut lines = vec![match fb {
        FrameBounds::Frame(b) => format!("frame: yes, optimal bounds ({}, {})", b.lower, b.upper),
        FrameBounds::BesselOnly { upper } => format!("frame: no (Bessel bound {upper})"),
    }];
    let mut report = json!({ "frame_bounds": to_value(&fb) });
    let mut holds = fb.is_frame();

    let k = match &a.k {
        Some(_) => {
            let k = load_k(a.k.as_deref(), d, ctx)?;
            let r = kframe_check(&frame, &k, tol).map_err(input_err)?;
            lines.push(if r.vacuous {
                "K-frame: yes (K = 0, vacuous)".to_string()
            } else if r.is_kframe {
                format!(
                    "K-frame: yes, optimal bounds ({}, {})",
                    r.lower_opt, r.upper_opt
                )
            } else {
                format!(
                    "K-frame: no (lower constant {}, upper {})",
                    r.lower_opt, r.upper_opt
                )
            });
            holds = r.is_kframe;
            report["kframe"] = to_value(&r);
            Some(k)
        }
        None => None,
    };

    if let Some(cp) = &a.c {
        ctx.input(cp);
        let ctrl = load_controller(cp, d, tol)?;
        let k = k.unwrap_or_else(|| Operator::identity(d));
        match controlled_kframe_check(&frame, &k, &ctrl, tol) {
            Ok(r) => {
                lines.push(if r.is_controlled_kframe {
                    format!(
                        "controlled K-frame: yes, optimal bounds ({}, {})",
                        r.lower_opt, r.upper_opt
                    )
                } else {
                    format!("controlled K-frame: no (lower constant {})", r.lower_opt)
                });
                holds = r.is_controlled_kframe;
                report["controlled"] = to_value(&r);
            }
            Err(e @ (Error::CommutationFailure { .. } | Error::NonRealForm { .. })) => {
                lines.push(format!("controlled K-frame: not applicable ({e})"));
                holds = false;
                report["controlled"] = json!({ "error": e.to_string() });
            }
            Err(e) => return Err(input_err(e)),
        }
    }
    report["holds"] = json!(holds);
    Ok(Outcome {
        code: if holds { 0 } else { 2 },
        lines,
        report,
        raw: None,
    })
}

#[derive(Args, Debug)]
pub struct DualArgs {
    /// The frame G.
    #[arg(long)]
    pub g: PathBuf,
    /// The operator K.
    #[arg(long)]
    pub k: PathBuf,
    /// Use this F instead of deriving F = {K S_G^+ g_n}; must satisfy K = sum <., g_n> f_n.
    #[arg(long)]
    pub f: Option<PathBuf>,
    /// Where to write the dual family H.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Where to write F when it is derived.
    #[arg(long)]
    pub out_f: Option<PathBuf>,
    /// Random vectors of R(K) used to measure reconstruction.
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
}

fn frame_op(f: &FrameSequence, h: &FrameSequence) -> kframe_core::Matrix {
    f.synthesis_matrix() * h.synthesis_matrix().adjoint()
}

pub fn dual(
    a: &DualArgs,
    g_args: &GlobalArgs,
    tol: &Tolerances,
    ctx: &mut Ctx,
) -> Result<Outcome, Failure> {
    ctx.input(&a.g);
    let g = read_frame(&a.g)?;
    let k = load_k(Some(&a.k), g.dim(), ctx)?;
    let f = match &a.f {
        Some(p) => {
            ctx.input(p);
            let f = read_frame(p)?;
            expect_dim(p, g.dim(), f.dim())?;
            f
        }
        None => associated_frame(&g, &k, tol).map_err(input_err)?,
    };
    if f.count() != g.count() {
        return Err(Failure::input(format!(
            "F has {} vectors but G has {}",
            f.count(),
            g.count()
        )));
    }
    let one_sided = bessel_dual_check(&f, &g, &k, tol).map_err(input_err)?;
    let h = match interchange_dual(&f, &g, &k, tol) {
        Ok(h) => h,
        Err(Error::PreconditionFailed { reason, witness }) => {
            return Err(Failure::property(reason, witness_value(&witness)))
        }
        Err(e) => return Err(input_err(e)),
    };

    // reconstruction on R(K): f = sum <f, h_n> f_n = sum <f, f_n> h_n
    let q = range_basis(&k, tol);
    let fh = frame_op(&f, &h);
    let hf = frame_op(&h, &f);
    let mut rng = sampling::rng(g_args.seed);
    let (mut r1, mut r2) = (0.0f64, 0.0f64);
    if q.ncols() > 0 {
        for _ in 0..a.samples {
            let x = sampling::random_unit_in_span(&mut rng, &q);
            r1 = r1.max((&x - &fh * &x).norm());
            r2 = r2.max((&x - &hf * &x).norm());
        }
    }
    let bound = tol.rel_eq;
    let holds = one_sided && r1 <= bound && r2 <= bound;

    if let Some(p) = &a.out {
        write_json(p, &frame_to_json(&h))?;
        ctx.output(p);
    }
    if let (Some(p), None) = (&a.out_f, &a.f) {
        write_json(p, &frame_to_json(&f))?;
        ctx.output(p);
    }
    let report = json!({
        "one_sided_dual": one_sided,
        "rank_k": q.ncols(),
        "samples": a.samples,
        "residual_synthesis_f": r1,
        "residual_synthesis_h": r2,
        "holds": holds,
        "h": to_value(&frame_to_json(&h)),
    });
    let lines = vec![
        format!("K = sum <., g_n> f_n: {one_sided}"),
        format!("max ||f - sum <f, h_n> f_n|| on R(K): {r1:e}"),
        format!("max ||f - sum <f, f_n> h_n|| on R(K): {r2:e}"),
        format!(
            "dual reconstruction: {}",
            if holds { "holds" } else { "fails" }
        ),
    ];
    Ok(Outcome {
        code: if holds { 0 } else { 2 },
        lines,
        report,
        raw: None,
    })
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[arg(long)]
    pub frame: PathBuf,
    /// Right-hand side g ({"dim", "entries"}).
    #[arg(long)]
    pub rhs: PathBuf,
    /// Controller C used as preconditioner.
    #[arg(long)]
    pub c: Option<PathBuf>,
    /// K used to validate the controlled instance [default: I].
    #[arg(long)]
    pub k: Option<PathBuf>,
    /// richardson or cg (cg ignores --c).
    #[arg(long, default_value = "richardson")]
    pub method: String,
    /// Step size, or "auto" for 2/(A+B).
    #[arg(long, default_value = "auto")]
    pub relaxation: String,
    #[arg(long, default_value_t = 1e-8)]
    pub residual_tol: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_iter: usize,
    /// Where to write the solution vector.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Where to write the convergence trace.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

pub fn solve(
    a: &SolveArgs,
    g_args: &GlobalArgs,
    tol: &Tolerances,
    ctx: &mut Ctx,
) -> Result<Outcome, Failure> {
    let relaxation = match a.relaxation.as_str() {
        "auto" => Relaxation::Auto,
        s => Relaxation::Fixed(s.parse().map_err(|_| {
            Failure::input(format!("--relaxation: '{s}' is neither auto nor a number"))
        })?),
    };
    let cfg = SolverConfig {
        relaxation,
        residual_tol: a.residual_tol,
        max_iter: a.max_iter,
        seed: g_args.seed,
    };
    cfg.validate().map_err(input_err)?;
    ctx.input(&a.frame);
    let frame = read_frame(&a.frame)?;
    ctx.input(&a.rhs);
    let rhs = read_vector(&a.rhs)?;
    expect_dim(&a.rhs, frame.dim(), rhs.len())?;
    let s = frame_operator(&frame);

    let result = match (a.method.as_str(), &a.c) {
        ("cg", _) => cg_solve(&s, &rhs, &cfg),
        ("richardson", None) => {
            let bounds = gl_plus_check(&s, tol).map_err(|e| {
                Failure::property(format!("frame operator is not invertible: {e}"), None)
            })?;
            richardson_solve(&s, &rhs, bounds, &cfg)
        }
        ("richardson", Some(cp)) => {
            ctx.input(cp);
            let ctrl = load_controller(cp, frame.dim(), tol)?;
            let k = load_k(a.k.as_deref(), frame.dim(), ctx)?;
            controlled_richardson_solve(&frame, &ctrl, &k, &rhs, &cfg)
        }
        (m, _) => return Err(Failure::input(format!("--method: unknown solver '{m}'"))),
    };
    let (solve, code): (Solve, u8) = match result {
        Ok(s) => (s, 0),
        Err(Error::NotConverged(s)) => (*s, 3),
        Err(e @ (Error::CommutationFailure { .. } | Error::NonRealForm { .. })) => {
            return Err(Failure::property(e.to_string(), None))
        }
        Err(e @ (Error::IndefiniteOperator { .. } | Error::NotPositiveDefinite { .. })) => {
            return Err(Failure::property(e.to_string(), None))
        }
        Err(e) => return Err(input_err(e)),
    };
    if let Some(p) = &a.out {
        write_json(p, &vector_to_json(&solve.solution))?;
        ctx.output(p);
    }
    if let Some(p) = &a.trace {
        write_json(p, &solve.trace)?;
        ctx.output(p);
    }
    let t = &solve.trace;
    let lines = vec![
        format!(
            "{} after {} iterations, relative residual {:e}",
            if t.converged {
                "converged"
            } else {
                "NOT converged"
            },
            t.iterations,
            t.residuals.last().copied().unwrap_or(0.0)
        ),
        format!("empirical contraction rate {}", t.empirical_rate),
    ];
    Ok(Outcome {
        code,
        lines,
        report: to_value(&solve),
        raw: None,
    })
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Comma-separated kinds: random-frame, ill-conditioned, commuting-family, paper-c3.
    #[arg(long, value_delimiter = ',', default_value = "ill-conditioned")]
    pub kinds: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "16")]
    pub dims: Vec<usize>,
    /// Target condition numbers of S.
    #[arg(long, value_delimiter = ',', default_value = "100")]
    pub conds: Vec<f64>,
    #[arg(long, default_value_t = 5)]
    pub trials: usize,
    /// Frame size as a multiple of the dimension.
    #[arg(long, default_value_t = 2)]
    pub oversampling: usize,
    /// instance, identity, exact-inverse or diagonal.
    #[arg(long, default_value = "instance")]
    pub controller: String,
    #[arg(long, default_value_t = 1e-8)]
    pub residual_tol: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_iter: usize,
    /// Run grid cells one after another.
    #[arg(long)]
    pub serial: bool,
    /// CSV destination [default: stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn bench(
    a: &BenchArgs,
    g_args: &GlobalArgs,
    _tol: &Tolerances,
    ctx: &mut Ctx,
) -> Result<Outcome, Failure> {
    let kinds = a
        .kinds
        .iter()
        .map(|k| k.parse::<InstanceKind>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(input_err)?;
    let controller: ControllerChoice = a.controller.parse().map_err(input_err)?;
    let cfg = BenchConfig {
        kinds,
        dims: a.dims.clone(),
        cond_targets: a.conds.clone(),
        trials: a.trials,
        oversampling: a.oversampling,
        controller,
        solver: SolverConfig {
            residual_tol: a.residual_tol,
            max_iter: a.max_iter,
            seed: g_args.seed,
            ..SolverConfig::default()
        },
        parallel: !a.serial,
    };
    let rows = run_benchmark(&cfg).map_err(input_err)?;
    let mut csv = Vec::new();
    write_csv(&rows, &mut csv).expect("writing to memory");
    let csv = String::from_utf8(csv).expect("CSV is ASCII");
    let mut speedups: Vec<f64> = rows.iter().filter_map(|r| r.speedup).collect();
    speedups.sort_by(f64::total_cmp);
    let median = (!speedups.is_empty()).then(|| speedups[speedups.len() / 2]);
    let mut report = json!({
        "rows": rows.len(),
        "converged_plain": rows.iter().filter(|r| r.converged_plain).count(),
        "converged_controlled": rows.iter().filter(|r| r.converged_controlled).count(),
        "median_speedup": median,
    });
    let raw = match &a.out {
        Some(p) => {
            std::fs::write(p, &csv).map_err(|e| Failure::input(format!("{}: {e}", p.display())))?;
            ctx.output(p);
            None
        }
        None => {
            report["csv"] = json!(csv);
            Some(csv)
        }
    };
    let lines = vec![
        format!("{} rows", rows.len()),
        match median {
            Some(m) => format!("median speedup {m}"),
            None => "no row converged in both solves".into(),
        },
    ];
    Ok(Outcome {
        code: 0,
        lines,
        report,
        raw,
    })
}

pub fn paper_example(tol: &Tolerances) -> Result<Outcome, Failure> {
    let k = counterexample_k();
    let g = FrameSequence::standard_basis(3);
    let f = g.mapped(&k).map_err(input_err)?;
    let basis: Vec<Vector> = g.vectors();
    let sum = |x: &Vector, a: &FrameSequence, b: &FrameSequence| {
        // sum_n <x, a_n> b_n
        b.synthesis_matrix() * (a.synthesis_matrix().adjoint() * x)
    };

    let reconstruction = basis
        .iter()
        .map(|e| (k.apply(e) - sum(e, &g, &f)).norm())
        .fold(0.0, f64::max);
    let e3 = &basis[2];
    let k_e3 = k.apply(e3);
    let swapped = sum(e3, &f, &g);
    let difference = (&k_e3 - &swapped).norm();
    let r = kframe_check(&f, &k, tol).map_err(input_err)?;

    let checks = [
        (
            "K f = sum <f, g_n> f_n on the basis",
            reconstruction <= tol.rel_eq,
        ),
        ("K e3 = e2", (&k_e3 - &basis[1]).norm() <= tol.rel_eq),
        ("sum <e3, f_n> g_n = 0", swapped.norm() <= tol.rel_eq),
        (
            "||K e3 - sum <e3, f_n> g_n|| = 1",
            (difference - 1.0).abs() <= tol.rel_eq,
        ),
        (
            "optimal K-frame bounds (1, 2)",
            r.is_kframe
                && (r.lower_opt - 1.0).abs() <= tol.rel_eq
                && (r.upper_opt - 2.0).abs() <= tol.rel_eq,
        ),
    ];
    let ok = checks.iter().all(|c| c.1);
    let mut lines = vec![
        "F = {e1, e1, e2}, G = {e1, e2, e3}, K e1 = K e2 = e1, K e3 = e2 on C^3".to_string(),
        format!("max_j ||K e_j - sum <e_j, g_n> f_n|| = {reconstruction}"),
        format!("K e3 = e2, but sum <e3, f_n> g_n = 0, difference norm {difference}"),
        "so G is a K-dual of F while F is not a K-dual of G".to_string(),
        format!(
            "F is a K-frame with optimal bounds ({}, {})",
            r.lower_opt, r.upper_opt
        ),
    ];
    for (name, pass) in &checks {
        lines.push(format!("[{}] {name}", if *pass { "ok" } else { "FAIL" }));
    }
    let report = json!({
        "reconstruction_defect": reconstruction,
        "k_e3": to_value(&vector_to_json(&k_e3)),
        "swapped_sum_e3": to_value(&vector_to_json(&swapped)),
        "difference_norm": difference,
        "kframe": to_value(&r),
        "checks": checks.iter().map(|(n, p)| json!({ "check": n, "pass": p })).collect::<Vec<_>>(),
        "holds": ok,
    });
    Ok(Outcome {
        code: if ok { 0 } else { 2 },
        lines,
        report,
        raw: None,
    })
}

#[derive(Args, Debug)]
pub struct GenArgs {
    /// random-frame, ill-conditioned, commuting-family or paper-c3.
    #[arg(long)]
    pub kind: String,
    #[arg(long, default_value_t = 4)]
    pub dim: usize,
    /// Number of frame vectors [default: 2 * dim].
    #[arg(long)]
    pub n: Option<usize>,
    /// Target condition number of S (ill-conditioned kind).
    #[arg(long, default_value_t = 1.0)]
    pub cond: f64,
    /// Directory receiving frame.json, k.json, c.json and rhs.json.
    #[arg(long)]
    pub out_dir: PathBuf,
}

pub fn gen(
    a: &GenArgs,
    g_args: &GlobalArgs,
    _tol: &Tolerances,
    ctx: &mut Ctx,
) -> Result<Outcome, Failure> {
    let kind: InstanceKind = a.kind.parse().map_err(input_err)?;
    let inst = generate_instance(kind, a.dim, a.n.unwrap_or(2 * a.dim), a.cond, g_args.seed)
        .map_err(input_err)?;
    std::fs::create_dir_all(&a.out_dir)
        .map_err(|e| Failure::input(format!("{}: {e}", a.out_dir.display())))?;
    let rhs = sampling::random_vector(&mut sampling::rng(g_args.seed), inst.frame.dim());
    let files = [
        ("frame.json", to_value(&frame_to_json(&inst.frame))),
        ("k.json", to_value(&operator_to_json(&inst.k))),
        (
            "c.json",
            to_value(&operator_to_json(inst.controller.operator())),
        ),
        ("rhs.json", to_value(&vector_to_json(&rhs))),
    ];
    let mut lines = Vec::new();
    for (name, value) in &files {
        let p = a.out_dir.join(name);
        write_json(&p, value)?;
        ctx.output(&p);
        lines.push(format!("wrote {}", p.display()));
    }
    let report = json!({
        "kind": kind.name(),
        "dim": inst.frame.dim(),
        "n": inst.frame.count(),
        "files": ctx.outputs.clone(),
    });
    Ok(Outcome {
        code: 0,
        lines,
        report,
        raw: None,
    })
}
