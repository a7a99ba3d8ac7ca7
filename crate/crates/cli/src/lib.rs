//! Command-line driver for the `ncphi4` library.

pub mod config;
pub mod report;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use ncphi4::dimreg::{self, DimregError, FactorizationInput, HeppSector, TaylorParams};
use ncphi4::direct::{self, DirectError, PhaseForm};
use ncphi4::exact::Rational;
use ncphi4::moyal::{self, BoundShape, FunctionSpec, MatrixBaseParams, MoyalError, OscillatorParams, ThetaParam};
use ncphi4::parametric::{self, Amplitude, AmplitudeInput, ParametricError};
use ncphi4::ribbon::{self, RibbonError, RibbonGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use config::{Format, RunConfig, Settings, CONFIG_ENV};
use report::*;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad input data or a mathematical domain violation.
    #[error("{0}")]
    Domain(String),
    #[error("{0}")]
    Usage(String),
    #[error("internal invariant failed: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Domain(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

impl From<RibbonError> for CliError {
    fn from(e: RibbonError) -> Self {
        match e {
            RibbonError::ClassMismatch { .. } => CliError::Internal(e.to_string()),
            _ => CliError::Domain(e.to_string()),
        }
    }
}

impl From<DirectError> for CliError {
    fn from(e: DirectError) -> Self {
        match e {
            DirectError::Invariant(_) => CliError::Internal(e.to_string()),
            _ => CliError::Domain(e.to_string()),
        }
    }
}

impl From<ParametricError> for CliError {
    fn from(e: ParametricError) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl From<MoyalError> for CliError {
    fn from(e: MoyalError) -> Self {
        match e {
            MoyalError::Invariant(_) => CliError::Internal(e.to_string()),
            _ => CliError::Domain(e.to_string()),
        }
    }
}

impl From<DimregError> for CliError {
    fn from(e: DimregError) -> Self {
        match e {
            DimregError::Ribbon(r) => r.into(),
            DimregError::Parametric(p) => p.into(),
            _ => CliError::Domain(e.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "ncphi4", version, about = "Ribbon graphs, parametric amplitudes and dimensional regularization for φ⁴ on Moyal space")]
pub struct Cli {
    /// Configuration file (TOML); defaults to $NCPHI4_CONFIG.
    #[arg(long, global = true, env = CONFIG_ENV)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub theta: Option<f64>,
    #[arg(long, global = true)]
    pub omega: Option<f64>,
    #[arg(long, global = true)]
    pub mu2: Option<f64>,
    /// Must equal 1/Ω when given.
    #[arg(long, global = true)]
    pub s: Option<f64>,
    /// Relative quadrature tolerance.
    #[arg(long, global = true)]
    pub rel: Option<f64>,
    #[arg(long, global = true)]
    pub cutoff: Option<usize>,
    #[arg(long, global = true)]
    pub dimension: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Worker threads; never changes the output.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

impl Cli {
    fn flags(&self) -> Settings {
        Settings {
            theta: self.theta,
            omega: self.omega,
            mu2: self.mu2,
            s: self.s,
            rel: self.rel,
            cutoff: self.cutoff,
            dimension: self.dimension,
            seed: self.seed,
            format: self.format,
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Topology and power counting of a graph.
    Analyze { graph: PathBuf },
    /// Filk reduction along a spanning tree.
    Rosette {
        graph: PathBuf,
        /// Tree lines, 1-based, comma separated; defaults to the first spanning tree.
        #[arg(long, value_delimiter = ',')]
        tree: Option<Vec<usize>>,
        /// Also print the u → 0 limit of the planar vertex form.
        #[arg(long)]
        moyality: bool,
    },
    /// The HU polynomial.
    Hu {
        graph: PathBuf,
        #[arg(long, value_enum, default_value = "amputated")]
        variant: Variant,
    },
    /// Parametric amplitude: integrand at `--t`, or the integral.
    Amplitude {
        graph: PathBuf,
        /// One external position per leg, `a,b,c,d`; zero when omitted.
        #[arg(long = "x", value_parser = parse_vec4)]
        x_e: Vec<[f64; 4]>,
        #[arg(long = "p", value_parser = parse_vec4)]
        p_root: Option<[f64; 4]>,
        #[arg(long, value_delimiter = ',')]
        t: Option<Vec<f64>>,
    },
    /// Dimensional regularization in D.
    Dimreg {
        #[command(subcommand)]
        command: DimregCommand,
    },
    /// Numerics on Moyal space.
    Moyal {
        #[command(subcommand)]
        command: MoyalCommand,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Variant {
    Amputated,
    Smeared,
}

#[derive(Subcommand, Debug)]
pub enum DimregCommand {
    /// Poles in D over all Hepp sectors.
    Poles {
        graph: PathBuf,
        /// Print the nested chain of every sector.
        #[arg(long)]
        sectors: bool,
    },
    /// Factorization under rescaling of a subgraph.
    Factcheck {
        graph: PathBuf,
        /// Subgraph lines, 1-based.
        #[arg(long, value_delimiter = ',', required = true)]
        subgraph: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.05, 0.025, 0.0125])]
        rho: Vec<f64>,
        /// External positions; drawn from the seed when omitted.
        #[arg(long = "x", value_parser = parse_vec4)]
        x_e: Vec<[f64; 4]>,
    },
    /// Single-pole subtraction at D = 4 at zero external data.
    Subtract {
        graph: PathBuf,
        /// The divergent subgraph, 1-based; empty for a convergent graph.
        #[arg(long, value_delimiter = ',')]
        subgraph: Vec<usize>,
    },
}

#[derive(Subcommand, Debug)]
pub enum MoyalCommand {
    /// `(f ⋆ g)(x)` for two functions given as TOML files.
    Star {
        f: PathBuf,
        g: PathBuf,
        #[arg(long, value_parser = parse_vec4, default_value = "0,0,0,0")]
        at: [f64; 4],
    },
    /// Mehler propagator between two points, optionally with the slice bound scan.
    Propagator {
        #[arg(long, value_parser = parse_vec4)]
        x: [f64; 4],
        #[arg(long, value_parser = parse_vec4)]
        y: [f64; 4],
        /// Scan slices `0..=i`.
        #[arg(long)]
        slices: Option<u32>,
        #[arg(long, default_value_t = 2.0)]
        m: f64,
    },
    /// Truncated matrix-base propagator.
    Matrixbase,
}

fn parse_vec4(s: &str) -> Result<[f64; 4], String> {
    let v: Vec<f64> = s.split(',').map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}"))).collect::<Result<_, _>>()?;
    v.try_into().map_err(|v: Vec<f64>| format!("expected 4 components, got {}", v.len()))
}

fn read_graph(path: &Path) -> Result<RibbonGraph, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    RibbonGraph::parse(&text).map_err(|e| match e {
        RibbonError::Parse(msg) => CliError::Domain(format!("{}: {msg}", path.display())),
        e => CliError::from(e),
    })
}

/// 1-based user lines to 0-based indices.
fn zero_based(g: &RibbonGraph, lines: &[usize]) -> Result<Vec<usize>, CliError> {
    lines
        .iter()
        .map(|&l| {
            if l == 0 || l > g.n_lines() {
                Err(CliError::Usage(format!("line {l} out of range 1..={}", g.n_lines())))
            } else {
                Ok(l - 1)
            }
        })
        .collect()
}

fn one_based(lines: &[usize]) -> Vec<usize> {
    lines.iter().map(|l| l + 1).collect()
}

fn rational(r: &Rational) -> String {
    r.to_string()
}

fn phase_table(p: &PhaseForm) -> PhaseTable {
    let mut entries = Vec::new();
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            let c = &p.matrix[i][j];
            if *c != Rational::from_integer(0.into()) {
                entries.push((p.vars[i].name.clone(), p.vars[j].name.clone(), rational(c)));
            }
        }
    }
    PhaseTable {
        vars: p.vars.iter().map(|v| v.name.clone()).collect(),
        delta: p.delta.clone(),
        lines: p
            .lines
            .iter()
            .map(|l| PhaseLine { line: l.line + 1, tree: l.tree, head: l.head.clone(), tail: l.tail.clone(), epsilon: l.epsilon })
            .collect(),
        entries,
    }
}

fn envelope<T: Render>(command: &str, config: &RunConfig, report: T) -> String {
    Envelope { command: command.into(), seed: config.seed, config: config.clone(), report }.emit()
}

fn analyze(g: &RibbonGraph) -> Result<AnalyzeReport, CliError> {
    let t = ribbon::topology(g);
    // power counting speaks about amplitudes with external legs only
    let class = if t.ne == 0 { "vacuum".to_string() } else { ribbon::classify(&t)?.to_string() };
    Ok(AnalyzeReport { n: t.n, l: t.l, ne: t.ne, f: t.f, b: t.b, g: t.g, omega: t.omega, class })
}

fn rosette(g: &RibbonGraph, tree: Option<Vec<usize>>, moyality: bool) -> Result<RosetteReport, CliError> {
    let trees = ribbon::spanning_structures(g).direct;
    let tree = match tree {
        Some(t) => zero_based(g, &t)?,
        None => trees.first().cloned().ok_or_else(|| CliError::Domain("graph has no spanning tree".into()))?,
    };
    let form = direct::filk_reduce(g, &tree)?;
    let moyality = if moyality {
        Some(phase_table(&direct::moyality_limit(&direct::planar_vertex_contribution(g, &tree)?)))
    } else {
        None
    };
    Ok(RosetteReport { tree: one_based(&tree), spanning_trees: trees.len(), form: phase_table(&form), moyality })
}

fn hu(g: &RibbonGraph, variant: Variant) -> Result<HuReport, CliError> {
    let poly = match variant {
        Variant::Amputated => parametric::hu_extract(g)?,
        Variant::Smeared => dimreg::pole_hu(g),
    };
    Ok(HuReport {
        variant: format!("{variant:?}").to_lowercase(),
        n_lines: g.n_lines(),
        terms: poly.terms.iter().map(|(m, c)| HuTerm { coefficient: rational(c), s: m.s, t: m.t.iter().map(|&e| e as u32).collect() }).collect(),
    })
}

fn amplitude(g: &RibbonGraph, c: &RunConfig, x_e: Vec<[f64; 4]>, p_root: Option<[f64; 4]>, t: Option<Vec<f64>>) -> Result<AmplitudeReport, CliError> {
    let x_e = if x_e.is_empty() { vec![[0.0; 4]; g.n_externals()] } else { x_e };
    let input = AmplitudeInput { x_e, p_root: p_root.unwrap_or([0.0; 4]), dimension: c.dimension, theta: c.theta, omega: c.omega };
    let amp = Amplitude::new(g)?;
    let mut r = AmplitudeReport {
        dimension: c.dimension,
        x_e: input.x_e.clone(),
        p_root: input.p_root,
        t: None,
        hu: None,
        hv_over_hu: None,
        value: [0.0; 2],
        error: None,
    };
    match t {
        Some(t) => {
            let e = amp.eval(&input, &t)?;
            r.t = Some(t);
            r.hu = Some(e.hu);
            r.hv_over_hu = Some([e.hv_over_hu.re, e.hv_over_hu.im]);
            r.value = [e.integrand.re, e.integrand.im];
        }
        None => {
            let qv = amp.quadrature(&input, c.rel)?;
            r.value = [qv.value.re, qv.value.im];
            r.error = Some(qv.error);
        }
    }
    Ok(r)
}

fn poles(g: &RibbonGraph, c: &RunConfig, sectors: bool) -> Result<PolesReport, CliError> {
    let four = Rational::from_integer(4.into());
    let report = dimreg::locate_poles(g)?;
    let class = if g.n_externals() > 0 { Some(ribbon::classify(&ribbon::topology(g))?.to_string()) } else { None };
    let sectors = if sectors {
        let hu = dimreg::pole_hu(g);
        let rows = HeppSector::all(g.n_lines())
            .iter()
            .map(|sigma| {
                let e = dimreg::sector_exponents(g, &hu, sigma)?;
                Ok(SectorRow {
                    order: one_based(&sigma.order),
                    steps: e
                        .steps
                        .iter()
                        .map(|st| StepRow {
                            i: st.i,
                            lines: one_based(&st.lines),
                            n: st.slice.n,
                            g: st.slice.g,
                            b: st.slice.b,
                            b_prime: st.b_prime,
                            bound: st.bound.bound,
                            exact: st.bound.exact,
                            exponent: num(st.exponent(c.dimension)),
                            first_pole: st.first_pole.as_ref().map(rational),
                        })
                        .collect(),
                })
            })
            .collect::<Result<Vec<_>, DimregError>>()?;
        Some(rows)
    } else {
        None
    };
    Ok(PolesReport {
        n_lines: report.n_lines,
        class,
        superficial: report.superficial.as_ref().map(rational),
        superficially_divergent_at_4: report.superficially_divergent_at(&four),
        diverges_at_4: report.diverges_at(&four),
        poles: report
            .poles
            .iter()
            .map(|p| PoleRow { dimension: rational(&p.dimension), slice: one_based(&p.slice), b_prime: p.b_prime, multiplicity: p.multiplicity })
            .collect(),
        sectors,
    })
}

fn factcheck(g: &RibbonGraph, c: &RunConfig, subgraph: &[usize], rho: Vec<f64>, x_e: Vec<[f64; 4]>) -> Result<FactcheckReport, CliError> {
    let s = zero_based(g, subgraph)?;
    let quotient = dimreg::quotient_graph(g, &s)?;
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    let x_e = if x_e.is_empty() {
        (0..g.n_externals()).map(|_| std::array::from_fn(|_| rng.gen_range(-0.5..0.5))).collect()
    } else {
        x_e
    };
    let t_s: Vec<f64> = (0..s.len()).map(|_| rng.gen_range(0.2..0.8)).collect();
    let t_rest: Vec<f64> = (0..g.n_lines() - s.len()).map(|_| rng.gen_range(0.2..0.8)).collect();
    let input = FactorizationInput {
        dimension: c.dimension,
        theta: c.theta,
        omega: c.omega,
        x_e: x_e.clone(),
        t_s: t_s.clone(),
        t_rest: t_rest.clone(),
        rhos: rho,
    };
    let r = dimreg::factorization_check(g, &s, &quotient, &input)?;
    Ok(FactcheckReport {
        subgraph: subgraph.to_vec(),
        dimension: c.dimension,
        quotient: quotient.serialize(),
        constant: rational(&r.leading.constant),
        b_prime: r.leading.b_prime,
        x_e,
        t_s,
        t_rest,
        rows: r
            .rows
            .iter()
            .map(|row| FactRow { rho: row.rho, lhs: [row.lhs.re, row.lhs.im], rhs: [row.rhs.re, row.rhs.im], deviation: row.deviation })
            .collect(),
        slope: r.slope,
        diagnostic: r.diagnostic,
    })
}

fn subtract(g: &RibbonGraph, c: &RunConfig, subgraph: &[usize]) -> Result<SubtractReport, CliError> {
    let s = zero_based(g, subgraph)?;
    let r = dimreg::taylor_subtract(g, &s, &TaylorParams { theta: c.theta, omega: c.omega, rel: c.rel })?;
    Ok(SubtractReport {
        subgraph: subgraph.to_vec(),
        points: r.points,
        c_minus1: r.fit.c_minus1,
        c0: r.fit.c0,
        c1: r.fit.c1,
        fit_residual: r.fit.residual,
        subtracted: r.subtracted,
        residue: r.residue,
        sector_poles: r
            .sector_poles
            .iter()
            .map(|p| SectorPoleRow { order: one_based(&p.sector.order), step: p.step, residue: p.residue })
            .collect(),
    })
}

fn read_function(path: &Path) -> Result<FunctionSpec, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    FunctionSpec::parse(&text).map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))
}

fn star(c: &RunConfig, f: &Path, g: &Path, at: [f64; 4]) -> Result<StarReport, CliError> {
    let (f, g) = (read_function(f)?.build()?, read_function(g)?.build()?);
    let v = moyal::star_product_at(&f, &g, &ThetaParam::new(c.theta)?, &at, c.rel)?;
    Ok(StarReport { at, value: [v.value.re, v.value.im], error: v.error, closed_form: v.closed_form })
}

fn propagator(c: &RunConfig, x: [f64; 4], y: [f64; 4], slices: Option<u32>, m: f64) -> Result<PropagatorReport, CliError> {
    let p = OscillatorParams::new(c.omega, c.theta, c.mu2)?;
    let v = moyal::propagator(&x, &y, &p, c.rel)?;
    let mut r = PropagatorReport { x, y, value: v.value, error: v.error, m, slices: Vec::new(), uniform: None };
    if let Some(i) = slices {
        let b = moyal::slice_bound_check(i, m, &p, BoundShape::KERNEL)?;
        r.slices = b.slices.iter().map(|s| SliceRow { slice: s.slice, constant: s.constant, rate: s.rate }).collect();
        r.uniform = Some(b.ok);
    }
    Ok(r)
}

fn matrixbase(c: &RunConfig) -> Result<MatrixbaseReport, CliError> {
    let params = MatrixBaseParams { omega: c.omega, theta: c.theta, mu2: c.mu2 };
    let form = moyal::matrix_base_form(c.cutoff, &params)?;
    let prop = moyal::truncated_propagator(c.cutoff, &params)?;
    let low = c.cutoff.min(2);
    let mut entries = Vec::new();
    for m0 in 0..low {
        for m1 in 0..low {
            for n0 in 0..low {
                for n1 in 0..low {
                    let (m, n) = ([m0, m1], [n0, n1]);
                    entries.push(EntryRow { m, n, value: prop.entry(m, n, n, m) });
                }
            }
        }
    }
    Ok(MatrixbaseReport { cutoff: c.cutoff, dim: form.dim(), residual: prop.residual(&form), condition: prop.condition, lowest: prop.lowest, entries })
}

fn dispatch(cli: Cli, c: &RunConfig) -> Result<String, CliError> {
    Ok(match cli.command {
        Command::Analyze { graph } => envelope("analyze", c, analyze(&read_graph(&graph)?)?),
        Command::Rosette { graph, tree, moyality } => envelope("rosette", c, rosette(&read_graph(&graph)?, tree, moyality)?),
        Command::Hu { graph, variant } => envelope("hu", c, hu(&read_graph(&graph)?, variant)?),
        Command::Amplitude { graph, x_e, p_root, t } => envelope("amplitude", c, amplitude(&read_graph(&graph)?, c, x_e, p_root, t)?),
        Command::Dimreg { command } => match command {
            DimregCommand::Poles { graph, sectors } => envelope("dimreg poles", c, poles(&read_graph(&graph)?, c, sectors)?),
            DimregCommand::Factcheck { graph, subgraph, rho, x_e } => {
                envelope("dimreg factcheck", c, factcheck(&read_graph(&graph)?, c, &subgraph, rho, x_e)?)
            }
            DimregCommand::Subtract { graph, subgraph } => envelope("dimreg subtract", c, subtract(&read_graph(&graph)?, c, &subgraph)?),
        },
        Command::Moyal { command } => match command {
            MoyalCommand::Star { f, g, at } => envelope("moyal star", c, star(c, &f, &g, at)?),
            MoyalCommand::Propagator { x, y, slices, m } => envelope("moyal propagator", c, propagator(c, x, y, slices, m)?),
            MoyalCommand::Matrixbase => envelope("moyal matrixbase", c, matrixbase(c)?),
        },
    })
}

/// Parses `args` (program name first) and produces the report text, or the
/// help and version text when asked for.
pub fn run<I, T>(args: I) -> Result<String, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => return Ok(e.to_string()),
        Err(e) => {
            let msg = e.to_string();
            return Err(CliError::Usage(msg.strip_prefix("error: ").unwrap_or(&msg).trim_end().to_string()));
        }
    };
    let file = match &cli.config {
        Some(p) => Settings::load(p)?,
        None => Settings::default(),
    };
    let config = RunConfig::resolve(&file.overridden_by(&cli.flags()))?;
    let threads = cli.threads.unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(|e| CliError::Internal(e.to_string()))?;
    pool.install(|| dispatch(cli, &config))
}
