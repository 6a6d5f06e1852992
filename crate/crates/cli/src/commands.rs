use std::fmt::Write as _;
use std::path::PathBuf;

use quadwalk::branch::{find_branch_points, genus};
use quadwalk::bvp::{
    assemble_vector_bvp, derive_unchecked, identity_residual, solve_small_steps, vector_identity_residual,
    BoundaryCondition, SolutionBundle, SolveOptions,
};
use quadwalk::curve::{analyse_plane, curves_to_svg, BoundaryCurve, PlaneAnalysis};
use quadwalk::model::{validate_model_with, FunctionalEquation};
use quadwalk::oracle::{monte_carlo, sweep_branch_points, truncated_stationary};
use quadwalk::{assemble_functional_equation, fixtures, Error, Plane, Stage, StepModel, Tolerances, C64};
use serde_json::json;
use thiserror::Error;

use crate::output::{self, csv_text, json_text, num, Sink};
use crate::{Cli, Command, OracleCommand};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("cannot write {0}: {1}")]
    Io(String, std::io::Error),
    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// 1 for model and usage errors, 2 for numerical failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if !e.is_model_error() => 2,
            _ => 1,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// Resolved settings of one invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model_path: Option<String>,
    pub command: &'static str,
    pub tolerances: Tolerances,
    pub output_dir: Option<PathBuf>,
    pub seed: u64,
    pub n_samples: usize,
    pub truncation: usize,
}

impl RunConfig {
    pub fn from_cli(cli: &Cli) -> Result<RunConfig> {
        let mut tolerances = Tolerances::default();
        for t in &cli.global.tol {
            tolerances.apply_assignment(t)?;
        }
        if cli.global.n_samples < 16 || !cli.global.n_samples.is_multiple_of(2) {
            return Err(CliError::Usage("--n-samples must be an even number of at least 16".into()));
        }
        Ok(RunConfig {
            model_path: cli.global.model.clone(),
            command: command_name(&cli.command),
            tolerances,
            output_dir: cli.global.out.clone(),
            seed: cli.global.seed,
            n_samples: cli.global.n_samples,
            truncation: cli.global.truncation,
        })
    }

    fn model(&self) -> Result<StepModel> {
        let path = self
            .model_path
            .as_deref()
            .ok_or_else(|| CliError::Usage(format!("`{}` needs --model PATH", self.command)))?;
        if let Some(name) = path.strip_prefix('@') {
            return fixtures::by_name(name)
                .ok_or_else(|| CliError::Usage(format!("no built-in fixture named `{name}`")));
        }
        Ok(StepModel::load(path)?)
    }

    fn equation(&self) -> Result<(StepModel, FunctionalEquation)> {
        let m = self.model()?;
        let rep = validate_model_with(&m, &self.tolerances);
        if !rep.is_ok() {
            return Err(Error::InvalidModel(rep.errors.join("; ")).into());
        }
        let fe = assemble_functional_equation(&m)?;
        Ok((m, fe))
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Validate => "validate",
        Command::BranchPoints => "branch-points",
        Command::Genus => "genus",
        Command::TraceCurve { .. } => "trace-curve",
        Command::BoundaryCondition => "boundary-condition",
        Command::Solve { .. } => "solve",
        Command::Oracle(_) => "oracle",
        Command::Compare { .. } => "compare",
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    let cfg = RunConfig::from_cli(cli)?;
    let sink = Sink::new(cfg.output_dir.as_deref())?;
    match &cli.command {
        Command::Validate => validate(&cfg, &sink),
        Command::BranchPoints => branch_points(&cfg, &sink),
        Command::Genus => genus_cmd(&cfg, &sink),
        Command::TraceCurve { cut_plane } => trace(&cfg, &sink, (*cut_plane).into()),
        Command::BoundaryCondition => boundary(&cfg, &sink),
        Command::Solve { order } => solve(&cfg, &sink, *order),
        Command::Oracle(o) => oracle(&cfg, &sink, o),
        Command::Compare { order } => compare(&cfg, &sink, *order),
    }
}

fn validate(cfg: &RunConfig, sink: &Sink) -> Result<()> {
    let m = cfg.model()?;
    let rep = validate_model_with(&m, &cfg.tolerances);
    print!("{rep}");
    sink.emit("validation.json", &json_text(&rep), false)?;
    if rep.is_ok() {
        Ok(())
    } else {
        Err(Error::InvalidModel(rep.errors.join("; ")).into())
    }
}

fn plane_label(p: Plane) -> &'static str {
    match p {
        Plane::X => "x",
        Plane::Y => "y",
    }
}

fn branch_points(cfg: &RunConfig, sink: &Sink) -> Result<()> {
    let (_, fe) = cfg.equation()?;
    let mut rows = Vec::new();
    for plane in [Plane::X, Plane::Y] {
        let set = find_branch_points(&fe.interior_gen, plane, &cfg.tolerances)?;
        eprintln!(
            "{}-plane: {} branch points (bound {}), {} interior",
            plane_label(plane),
            set.finite_count(),
            set.bound,
            set.interior_count()
        );
        for b in &set.points {
            rows.push(vec![
                plane_label(plane).to_string(),
                num(b.location.re),
                num(b.location.im),
                b.multiplicity.to_string(),
                num(b.location.norm()),
                b.position.name().to_string(),
            ]);
        }
    }
    sink.emit("branch_points.csv", &csv_text(output::BRANCH_HEADER, rows)?, true)
}

fn genus_cmd(cfg: &RunConfig, sink: &Sink) -> Result<()> {
    let (_, fe) = cfg.equation()?;
    let rep = genus(&fe.interior_gen, &cfg.tolerances)?;
    println!("genus {}", rep.genus);
    sink.emit("genus.json", &json_text(&rep), false)
}

fn curve_rows(c: &BoundaryCurve) -> Vec<Vec<String>> {
    c.samples()
        .into_iter()
        .map(|(s, t, a)| vec![num(s), num(t.re), num(t.im), num(a.re), num(a.im)])
        .collect()
}

fn curve_report(a: &PlaneAnalysis) -> serde_json::Value {
    let cuts: Vec<_> = a
        .cuts
        .iter()
        .map(|c| {
            let metrics = c.curve.as_ref().map(|k| {
                json!({
                    "chart": format!("{:?}", k.chart),
                    "closure_defect": k.closure_defect,
                    "endpoint_gaps": k.endpoint_gaps,
                    "involution_defect": k.involution_defect,
                    "conjugation_defect": k.conjugation_defect,
                    "kernel_residual": k.kernel_residual,
                    "self_intersecting": k.self_intersecting,
                })
            });
            json!({
                "start": [c.cut.start.location.re, c.cut.start.location.im],
                "end": [c.cut.end.location.re, c.cut.end.location.im],
                "kind": format!("{:?}", c.cut.kind),
                "suitable": c.is_suitable(),
                "problems": c.problems,
                "curve": metrics,
            })
        })
        .collect();
    json!({
        "cut_plane": plane_label(a.plane),
        "interior_branch_points": a.interior.len(),
        "validated": a.validated_count(),
        "cuts": cuts,
    })
}

fn trace(cfg: &RunConfig, sink: &Sink, plane: Plane) -> Result<()> {
    let (_, fe) = cfg.equation()?;
    let a = analyse_plane(&fe.interior_gen, plane, cfg.n_samples, &cfg.tolerances)?;
    let curves: Vec<&BoundaryCurve> = a.suitable().filter_map(|c| c.curve.as_ref()).collect();
    for c in &a.cuts {
        eprintln!(
            "cut {:.6} .. {:.6}: {}",
            c.cut.start.location,
            c.cut.end.location,
            if c.is_suitable() { "ok".to_string() } else { c.problems.join("; ") }
        );
    }
    if curves.is_empty() {
        return Err(Error::numerical(Stage::Curve, "no interior cut yields a valid curve").into());
    }
    for (k, c) in curves.iter().enumerate() {
        let name = if k == 0 { "curve.csv".to_string() } else { format!("curve_{k}.csv") };
        sink.emit(&name, &csv_text(output::CURVE_HEADER, curve_rows(c))?, k == 0)?;
    }
    sink.emit("curves.svg", &curves_to_svg(&curves, 10.0), false)?;
    sink.emit("curve_report.json", &json_text(&curve_report(&a)), false)
}

fn condition_header(bc: &BoundaryCondition) -> Vec<String> {
    let mut h: Vec<String> = output::CONDITION_HEADER.iter().map(|s| s.to_string()).collect();
    for (k, l) in &bc.scalars {
        h.push(format!("re_g_{k}_{l}"));
        h.push(format!("im_g_{k}_{l}"));
    }
    h
}

fn condition_rows(bc: &BoundaryCondition) -> Vec<Vec<String>> {
    let chart = bc.curve.chart;
    (0..bc.len())
        .map(|k| {
            let p = &bc.points[k];
            let (t, a) = (chart.from_chart(p.t), chart.from_chart(p.alpha));
            let mut r = vec![
                num(p.theta / (2.0 * std::f64::consts::PI)),
                num(t.re),
                num(t.im),
                num(a.re),
                num(a.im),
                num(bc.a_t[k].re),
                num(bc.a_t[k].im),
                num(bc.a_alpha[k].re),
                num(bc.a_alpha[k].im),
            ];
            for g in &bc.g {
                r.push(num(g[k].re));
                r.push(num(g[k].im));
            }
            r
        })
        .collect()
}

fn condition_csv(bc: &BoundaryCondition) -> Result<String> {
    let h = condition_header(bc);
    let h: Vec<&str> = h.iter().map(String::as_str).collect();
    csv_text(&h, condition_rows(bc))
}

fn boundary(cfg: &RunConfig, sink: &Sink) -> Result<()> {
    let (_, fe) = cfg.equation()?;
    let b = fe.bounds;
    let tol = &cfg.tolerances;
    if b.i_minus == 1 && b.j_minus == 1 {
        let mut meta = Vec::new();
        for (label, eq) in [("x", fe.clone()), ("y", fe.transposed())] {
            let a = analyse_plane(&eq.interior_gen, Plane::Y, cfg.n_samples, tol)?;
            let curve = a.unique_curve()?;
            let bc = derive_unchecked(&eq, curve)?;
            let resid = identity_residual(&eq, &bc);
            eprintln!(
                "{label}-axis unknown: index {}, min |A| {:.2e}, identity residual {:.2e}",
                bc.index, bc.min_relative_a, resid
            );
            meta.push(json!({
                "unknown": label,
                "samples": bc.len(),
                "index": bc.index,
                "min_relative_a": bc.min_relative_a,
                "singular_at": bc.singular_at.map(|z| [z.re, z.im]),
                "identity_residual": resid,
                "antisymmetry_defect": bc.antisymmetry_defect(),
                "scalars": bc.scalars,
            }));
            let name = if label == "x" {
                "boundary_condition.csv"
            } else {
                "boundary_condition_y.csv"
            };
            sink.emit(name, &condition_csv(&bc)?, label == "x")?;
        }
        return sink.emit("boundary_condition.json", &json_text(&meta), false);
    }
    let cut_plane = match (b.i_minus > 1, b.j_minus > 1) {
        (true, false) => Plane::X,
        (false, true) => Plane::Y,
        _ => {
            return Err(Error::Unsupported(
                "vector assembly needs one axis with a unit negative jump".into(),
            )
            .into())
        }
    };
    let a = analyse_plane(&fe.interior_gen, cut_plane, cfg.n_samples, tol)?;
    let curves: Vec<&BoundaryCurve> = a.suitable().filter_map(|c| c.curve.as_ref()).collect();
    let sys = assemble_vector_bvp(&fe, &curves)?;
    let resid = vector_identity_residual(&fe, &curves, &sys);
    eprintln!(
        "vector problem of size {} on {} curves, identity residual {:.2e}",
        sys.size(),
        curves.len(),
        resid
    );
    let text = json_text(&json!({ "identity_residual": resid, "system": sys }));
    sink.emit("vector_system.json", &text, true)
}

fn solve_bundle(cfg: &RunConfig, order: usize) -> Result<(StepModel, SolutionBundle)> {
    let (m, fe) = cfg.equation()?;
    let opts = SolveOptions {
        order,
        tol: cfg.tolerances.clone(),
    };
    Ok((m, solve_small_steps(&fe, &opts)?))
}

fn coefficient_rows(s: &SolutionBundle) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for (i, r) in s.coefficients.iter().enumerate() {
        for (j, v) in r.iter().enumerate() {
            rows.push(vec![i.to_string(), j.to_string(), num(*v)]);
        }
    }
    rows
}

fn solve(cfg: &RunConfig, sink: &Sink, order: usize) -> Result<()> {
    let (m, s) = solve_bundle(cfg, order)?;
    let probe = s.perturbed_residual(1e-3)?;
    let report = json!({
        "residual": s.residual,
        "perturbed_residual": probe,
        "pi00": s.pi00,
        "samples": s.n_samples,
        "refinement": s.refinement,
        "torus_radius": s.torus_radius,
        "interior_mass": s.interior_mass,
        "pinning_singular_values": s.pinning_singular_values,
        "conformal_accuracy": [s.x_axis.gluing.accuracy, s.y_axis.gluing.accuracy],
        "charts": [format!("{:?}", s.x_axis.curve.chart), format!("{:?}", s.y_axis.curve.chart)],
    });
    sink.emit("coefficients.csv", &csv_text(output::COEFFICIENT_HEADER, coefficient_rows(&s))?, true)?;
    sink.emit("residuals.json", &json_text(&report), false)?;
    sink.emit("curve.csv", &condition_csv(&s.x_axis.condition)?, false)?;
    let mut summary = String::new();
    let _ = writeln!(summary, "model: {}", m.label());
    let _ = writeln!(summary, "pi(0,0) = {:.12}", s.pi00);
    let _ = writeln!(summary, "boundary samples: {}", s.n_samples);
    let _ = writeln!(
        summary,
        "functional equation residual: {:.2e} (grid), {:.2e} (kernel points)",
        s.residual.grid_max_relative, s.residual.kernel_max_relative
    );
    let _ = writeln!(summary, "residual after perturbing the solution: {probe:.2e}");
    let _ = writeln!(
        summary,
        "coefficients 0..={order}: sum {:.10}, min {:.3e}",
        s.residual.window_sum, s.residual.min_coefficient
    );
    eprint!("{summary}");
    sink.emit("summary.txt", &summary, false)
}

fn oracle(cfg: &RunConfig, sink: &Sink, cmd: &OracleCommand) -> Result<()> {
    match cmd {
        OracleCommand::Stationary => {
            let m = cfg.model()?;
            let sol = truncated_stationary(&m, cfg.truncation, &cfg.tolerances)?;
            eprintln!(
                "N = {}: pi(0,0) = {:.15}, tail mass {:.3e}",
                sol.size,
                sol.get(0, 0),
                sol.tail_mass
            );
            let rows = (0..sol.size)
                .flat_map(|i| (0..sol.size).map(move |j| (i, j)))
                .map(|(i, j)| vec![i.to_string(), j.to_string(), num(sol.get(i, j))]);
            sink.emit("stationary.csv", &csv_text(output::COEFFICIENT_HEADER, rows)?, true)
        }
        OracleCommand::MonteCarlo { steps } => {
            let m = cfg.model()?;
            let f = monte_carlo(&m, *steps, cfg.seed)?;
            eprintln!(
                "{} steps (burn-in {}), pi(0,0) = {:.6} ± {:.1e}",
                f.steps,
                f.burn_in,
                f.frequency(0, 0),
                f.origin_standard_error
            );
            let rows = f.counts.iter().map(|(&(i, j), &c)| {
                vec![i.to_string(), j.to_string(), c.to_string(), num(f.frequency(i, j))]
            });
            sink.emit("frequencies.csv", &csv_text(output::FREQUENCY_HEADER, rows)?, true)
        }
        OracleCommand::Sweep { radius, step } => {
            let (_, fe) = cfg.equation()?;
            if !(*radius > 0.0 && *step > 0.0) {
                return Err(CliError::Usage("--radius and --step must be positive".into()));
            }
            let mut rows = Vec::new();
            for plane in [Plane::X, Plane::Y] {
                let pts = sweep_branch_points(&fe.interior_gen, plane, *radius, *step, &cfg.tolerances);
                eprintln!("{}-plane: {} branch points", plane_label(plane), pts.len());
                rows.extend(
                    pts.iter()
                        .map(|z: &C64| vec![plane_label(plane).to_string(), num(z.re), num(z.im)]),
                );
            }
            sink.emit("sweep.csv", &csv_text(output::SWEEP_HEADER, rows)?, true)
        }
    }
}

fn compare(cfg: &RunConfig, sink: &Sink, order: usize) -> Result<()> {
    let (m, s) = solve_bundle(cfg, order)?;
    let orc = truncated_stationary(&m, cfg.truncation, &cfg.tolerances)?;
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for i in 0..=order {
        for j in 0..=order {
            let a = s.coefficient(i, j).unwrap_or(f64::NAN);
            let o = orc.get(i, j);
            let d = (a - o).abs();
            worst = worst.max(d);
            rows.push(vec![i.to_string(), j.to_string(), num(a), num(o), num(d)]);
        }
    }
    let line = format!("max-abs-diff {}\n", num(worst));
    sink.emit("compare.csv", &csv_text(output::COMPARE_HEADER, rows)?, true)?;
    if sink.has_dir() {
        sink.emit("summary.txt", &line, false)?;
    }
    print!("{line}");
    Ok(())
}
