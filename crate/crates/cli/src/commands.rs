use num_complex::Complex64;
use polyharm::expansion::{extract_coeffs, synthesize};
use polyharm::fatou::{fatou_sweep, rnt_limit, FatouOptions};
use polyharm::geometry::{PolyPoint, TorusGrid, TorusPoint};
use polyharm::kernel::{poisson_kernel, Params};
use polyharm::maximal::{level_set_report, maximal_on_grid, MaximalOptions};
use polyharm::poisson::{boundary_convergence, Extension, FunctionExtension, MeasureExtension, Route};
use polyharm::verify::{run_verify_with_workers, VerifyConfig};
use polyharm::Error;

use crate::config::{EvalTarget, Query, RunConfig, ScanKind};
use crate::output::{heat_script, OutDir, Plot, Table};

#[derive(Debug)]
pub enum Failure {
    /// Exit 1: failing suite names.
    Verify(Vec<String>),
    /// Exit 2.
    Config(String),
    /// Exit 3.
    Numerical(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Verify(_) => 1,
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Verify(names) => write!(f, "verify failed: {}", names.join(", ")),
            Failure::Config(m) => write!(f, "invalid config: {m}"),
            Failure::Numerical(m) => write!(f, "numerical guard: {m}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::GammaPole(_)
            | Error::Divergent(_)
            | Error::SlowConvergence(_)
            | Error::NearBoundary { .. }
            | Error::Aliasing(_)
            | Error::BoundViolated(_) => Failure::Numerical(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Config(format!("output: {e}"))
    }
}

pub type Outcome = Result<(), Failure>;

pub struct Context {
    pub cfg: RunConfig,
    pub params: Params,
    pub workers: usize,
    pub out: OutDir,
}

impl Context {
    fn points(&self, queries: &[Query]) -> Result<Vec<PolyPoint>, Failure> {
        queries
            .iter()
            .map(|q| {
                let z = q.point()?;
                if z.dim() != self.params.dim() {
                    return Err(Error::DimensionMismatch { expected: self.params.dim(), got: z.dim() }.into());
                }
                Ok(z)
            })
            .collect()
    }

    fn source(&self) -> Result<Box<dyn Extension + Sync>, Failure> {
        let data = &self.cfg.data;
        if data.is_measure() {
            let mu = data.measure(self.params.dim(), self.cfg.seed)?;
            Ok(Box::new(MeasureExtension { params: self.params.clone(), mu }))
        } else {
            let f = data.function(&self.cfg.boundary_grid()?)?;
            Ok(Box::new(FunctionExtension::new(self.params.clone(), f, Route::Auto)?))
        }
    }

    fn grid_of(&self, sizes: &[usize]) -> Result<TorusGrid, Failure> {
        let n = self.params.dim();
        let sizes = match sizes.len() {
            1 => vec![sizes[0]; n],
            k if k == n => sizes.to_vec(),
            k => return Err(Error::DimensionMismatch { expected: n, got: k }.into()),
        };
        Ok(TorusGrid::new(sizes)?)
    }

    fn angle_columns(&self, prefix: &str) -> Vec<String> {
        (1..=self.params.dim()).map(|j| format!("{prefix}{j}")).collect()
    }
}

fn complex_row(mut head: Vec<f64>, v: Complex64) -> Vec<f64> {
    head.push(v.re);
    head.push(v.im);
    head
}

pub fn eval(ctx: &mut Context) -> Outcome {
    let points = ctx.points(&ctx.cfg.eval.queries)?;
    let values: Vec<Complex64> = match ctx.cfg.eval.target {
        EvalTarget::Kernel => {
            let zeta = match &ctx.cfg.eval.zeta {
                Some(a) => TorusPoint::new(a.clone()),
                None => TorusPoint::one(ctx.params.dim()),
            };
            points
                .iter()
                .map(|z| poisson_kernel(&ctx.params, z, &zeta))
                .collect::<polyharm::Result<_>>()?
        }
        EvalTarget::Poisson => {
            let src = ctx.source()?;
            points.iter().map(|z| src.eval(z)).collect::<polyharm::Result<_>>()?
        }
        EvalTarget::Expansion => {
            let f = ctx.cfg.data.function(&ctx.cfg.boundary_grid()?)?;
            let coeffs = extract_coeffs(&ctx.params, &f, ctx.cfg.expand.max_order)?;
            points
                .iter()
                .map(|z| synthesize(&ctx.params, &coeffs, z).map(|s| s.value))
                .collect::<polyharm::Result<_>>()?
        }
    };
    let mut t = Table::new(&["query", "re", "im"]);
    for (k, v) in values.iter().enumerate() {
        t.push(complex_row(vec![k as f64], *v));
    }
    ctx.out.write_table("eval", &t, None)?;
    print!("{}", t.render(&ctx.out.hash));
    Ok(())
}

pub fn verify(ctx: &mut Context) -> Outcome {
    let vc = VerifyConfig {
        seed: ctx.cfg.seed,
        cases: ctx.cfg.verify.cases,
        tolerances: ctx.cfg.tolerances,
    };
    let report = run_verify_with_workers(&vc, ctx.workers)?;
    let json = report.to_json()?;
    ctx.out.write_text("verify.json", &json)?;
    println!("{json}");
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Verify(report.failing().iter().map(|s| s.to_string()).collect()))
    }
}

fn weak11_table(ctx: &mut Context, stem: &str) -> Outcome {
    let mu = ctx.cfg.data.measure(ctx.params.dim(), ctx.cfg.seed)?;
    let grid = ctx.grid_of(&ctx.cfg.maximal.grid)?;
    let kind = &ctx.cfg.maximal.kind;
    let report = level_set_report(kind, &mu, &ctx.cfg.maximal.lambdas, &grid, &MaximalOptions::default())?;
    let mut t = Table::new(&["lambda", "measured", "bound"]);
    for k in 0..report.lambdas.len() {
        t.push(vec![report.lambdas[k], report.measures[k], report.bounds[k]]);
    }
    let title = format!("level sets of {}", kind.label());
    ctx.out.write_table(stem, &t, Some(Plot { title: &title, x: 1, ys: vec![2, 3], logx: true, logy: true }))?;
    ctx.out.write_text(&format!("{stem}.json"), &report.to_json()?)?;
    if report.violations() > 0 {
        return Err(Error::BoundViolated(format!("{} levels of {}", report.violations(), kind.label())).into());
    }
    Ok(())
}

pub fn scan(ctx: &mut Context) -> Outcome {
    match ctx.cfg.scan.kind {
        ScanKind::Weak11 => weak11_table(ctx, "weak11"),
        ScanKind::Convergence => {
            let f = ctx.cfg.data.function(&ctx.cfg.boundary_grid()?)?;
            let ladder = ctx.cfg.scan.ladder.clone();
            let cols: Vec<Vec<f64>> = [1.0, 2.0, f64::INFINITY]
                .iter()
                .map(|&p| boundary_convergence(&ctx.params, &f, p, &ladder))
                .collect::<polyharm::Result<_>>()?;
            let mut t = Table::new(&["r", "L1", "L2", "Linf"]);
            for (k, &r) in ladder.iter().enumerate() {
                t.push(vec![r, cols[0][k], cols[1][k], cols[2][k]]);
            }
            let plot = Plot { title: "boundary convergence", x: 1, ys: vec![2, 3, 4], logx: false, logy: true };
            ctx.out.write_table("convergence", &t, Some(plot))?;
            Ok(())
        }
        ScanKind::Fatou => {
            let f = ctx.cfg.data.function(&ctx.cfg.boundary_grid()?)?;
            let fc = ctx.cfg.fatou.clone();
            let vertices = ctx.grid_of(&fc.vertices)?;
            let opts = FatouOptions { paths: fc.paths, steps: fc.steps, ..Default::default() };
            let summary = fatou_sweep(
                &ctx.params,
                &f,
                &vertices,
                fc.aperture,
                fc.restriction,
                fc.tolerance,
                |_| false,
                &opts,
            )?;
            let mut cols = ctx.angle_columns("theta");
            cols.extend(["error", "estimate_re", "estimate_im", "oscillation"].map(String::from));
            let mut t = Table::new(&cols);
            for r in &summary.records {
                let mut row = r.vertex.angles().to_vec();
                row.extend([r.error, r.estimate.re, r.estimate.im, r.oscillation]);
                t.push(row);
            }
            let n = ctx.params.dim();
            if n == 2 {
                ctx.out.write_table("fatou", &t, None)?;
                ctx.out.write_text("fatou.gp", &heat_script("fatou.csv", "limit error", 3))?;
            } else {
                let plot = Plot { title: "limit error", x: 1, ys: vec![n + 1], logx: false, logy: false };
                ctx.out.write_table("fatou", &t, Some(plot))?;
            }
            ctx.out.write_text("fatou_summary.json", &summary.to_json()?)?;
            println!("fraction {}", summary.fraction);
            Ok(())
        }
    }
}

pub fn expand(ctx: &mut Context) -> Outcome {
    let f = ctx.cfg.data.function(&ctx.cfg.boundary_grid()?)?;
    let coeffs = extract_coeffs(&ctx.params, &f, ctx.cfg.expand.max_order)?;
    let mut cols = ctx.angle_columns("p");
    cols.extend(ctx.angle_columns("q"));
    cols.extend(["re", "im"].map(String::from));
    let mut t = Table::new(&cols);
    for (idx, c) in &coeffs.terms {
        let mut row: Vec<f64> = idx.p().iter().chain(idx.q()).map(|&k| k as f64).collect();
        row.extend([c.re, c.im]);
        t.push(row);
    }
    ctx.out.write_table("coeffs", &t, None)?;
    ctx.out.write_text("coeffs.json", &coeffs.to_json()?)?;
    let points = ctx.points(&ctx.cfg.expand.queries)?;
    if !points.is_empty() {
        let mut s = Table::new(&["query", "re", "im", "dropped_bound"]);
        for (k, z) in points.iter().enumerate() {
            let syn = synthesize(&ctx.params, &coeffs, z)?;
            s.push(vec![k as f64, syn.value.re, syn.value.im, syn.dropped_bound]);
        }
        ctx.out.write_table("synthesis", &s, None)?;
    }
    println!("{} terms, dropped {}", coeffs.terms.len(), coeffs.dropped);
    Ok(())
}

pub fn dirichlet(ctx: &mut Context) -> Outcome {
    let src = ctx.source()?;
    let grid = ctx.cfg.boundary_grid()?;
    let mut points = ctx.points(&ctx.cfg.dirichlet.queries)?;
    for &r in &ctx.cfg.dirichlet.radii {
        for node in grid.nodes() {
            points.push(PolyPoint::dilate(&vec![r; ctx.params.dim()], &node)?);
        }
    }
    use rayon::prelude::*;
    let values = points.par_iter().map(|z| src.eval(z)).collect::<polyharm::Result<Vec<_>>>()?;
    let mut cols = ctx.angle_columns("r");
    cols.extend(ctx.angle_columns("theta"));
    cols.extend(["re", "im"].map(String::from));
    let mut t = Table::new(&cols);
    for (z, v) in points.iter().zip(&values) {
        let head: Vec<f64> = z.radii().iter().chain(z.angles()).copied().collect();
        t.push(complex_row(head, *v));
    }
    let n = ctx.params.dim();
    let plot = (n == 1).then(|| Plot { title: "extension", x: 2, ys: vec![3, 4], logx: false, logy: false });
    ctx.out.write_table("dirichlet", &t, plot)?;
    Ok(())
}

pub fn maximal(ctx: &mut Context) -> Outcome {
    let mu = ctx.cfg.data.measure(ctx.params.dim(), ctx.cfg.seed)?;
    let grid = ctx.grid_of(&ctx.cfg.maximal.grid)?;
    let values = maximal_on_grid(&ctx.cfg.maximal.kind, &mu, &grid, &MaximalOptions::default())?;
    let mut cols = ctx.angle_columns("theta");
    cols.push("value".into());
    let mut t = Table::new(&cols);
    for (k, v) in values.iter().enumerate() {
        let mut row = grid.node(k).angles().to_vec();
        row.push(*v);
        t.push(row);
    }
    let n = ctx.params.dim();
    if n == 2 {
        ctx.out.write_table("maximal", &t, None)?;
        ctx.out.write_text("maximal.gp", &heat_script("maximal.csv", "maximal function", 3))?;
    } else {
        let plot = Plot { title: "maximal function", x: 1, ys: vec![n + 1], logx: false, logy: true };
        ctx.out.write_table("maximal", &t, Some(plot))?;
    }
    weak11_table(ctx, "maximal_levels")
}

pub fn fatou(ctx: &mut Context) -> Outcome {
    let src = ctx.source()?;
    let fc = ctx.cfg.fatou.clone();
    let vertices = ctx.grid_of(&fc.vertices)?;
    let opts = FatouOptions { paths: fc.paths, steps: fc.steps, threshold: fc.tolerance, ..Default::default() };
    use rayon::prelude::*;
    let scans = (0..vertices.len())
        .into_par_iter()
        .map(|k| rnt_limit(src.as_ref(), &vertices.node(k), fc.aperture, fc.restriction, &opts))
        .collect::<polyharm::Result<Vec<_>>>()?;
    let mut cols = ctx.angle_columns("theta");
    cols.extend(["estimate_re", "estimate_im", "oscillation", "converged"].map(String::from));
    let mut t = Table::new(&cols);
    let mut traces = Table::new(&["vertex", "path", "gap", "re", "im"]);
    for (k, s) in scans.iter().enumerate() {
        let mut row = s.vertex.angles().to_vec();
        row.extend([s.estimate.re, s.estimate.im, s.oscillation, if s.converged { 1.0 } else { 0.0 }]);
        t.push(row);
        for (p, tr) in s.traces.iter().enumerate() {
            for (g, v) in tr.gaps.iter().zip(&tr.values) {
                traces.push(vec![k as f64, p as f64, *g, v.re, v.im]);
            }
        }
    }
    ctx.out.write_table("fatou_vertices", &t, None)?;
    let plot = Plot { title: "approach traces", x: 3, ys: vec![4], logx: true, logy: false };
    ctx.out.write_table("fatou_traces", &traces, Some(plot))?;
    if let Some(note) = scans.first().and_then(|s| s.note.clone()) {
        eprintln!("note: {note}");
    }
    let unconverged = scans.iter().filter(|s| !s.converged).count();
    println!("{} vertices, {} not converged", scans.len(), unconverged);
    Ok(())
}
