//! Command-line front end.
//!
//! Experiment commands write a JSON report (`--out`, or stdout) and print one
//! line per verdict on stderr. They exit with status 2 when a verdict does not
//! come out as expected, and 1 on errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde_json::json;

use rieszlab::experiments::{free_product, gaffney, hardy, heat, identities, lemmas, maximal, pseudo, sweep};
use rieszlab::io;
use rieszlab::report::{loglog_svg, Report, Series};
use rieszlab::spec::{describe, parse_family};
use rieszlab_core::builders::build;
use rieszlab_core::calculus::{riesz_transform, Calculus};
use rieszlab_core::functionals::{lp_functional_g, lp_functional_l, maximal_function, tent_a, tent_c};
use rieszlab_core::hardy::{check_molecule, molecular_decompose, MolecularOptions};
use rieszlab_core::markov::MarkovOperator;
use rieszlab_core::spectral::SpectralDecomposition;
use rieszlab_core::{QuasiMetric, Space};

/// Dense eigendecomposition is used up to this size; the series route beyond.
const SPECTRAL_MAX_N: usize = 1500;

#[derive(Parser)]
#[command(name = "rieszlab", version, about = "Markov chains, Riesz transforms and Hardy spaces on graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct GraphArgs {
    /// Graph file with an optional `<graph>.json` sidecar.
    #[arg(long)]
    graph: PathBuf,
    /// Redeclare the exponent of the quasi-metric `rho = d^beta` (negative controls).
    #[arg(long)]
    declare_beta: Option<f64>,
}

impl GraphArgs {
    fn load(&self) -> Result<(Space, String)> {
        let space = io::load_space(&self.graph)?;
        let mut name = self.graph.display().to_string();
        let space = match self.declare_beta {
            Some(beta) => {
                name.push_str(&format!(" (declared beta {beta})"));
                let metric = QuasiMetric::power(space.graph(), beta)?;
                Space::new(space.graph().clone(), metric, space.boundary().to_vec())?
            }
            None => space,
        };
        Ok((space, name))
    }
}

#[derive(clap::Args)]
struct ExperimentArgs {
    /// JSON object overriding parameter defaults; absent fields keep their default.
    #[arg(long)]
    params: Option<PathBuf>,
    /// Report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl ExperimentArgs {
    fn params<T: DeserializeOwned + Default>(&self) -> Result<T> {
        match &self.params {
            Some(path) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                Ok(serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?)
            }
            None => Ok(T::default()),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FunctionalKind {
    /// Area functional of the Littlewood-Paley field (function input).
    L,
    /// Vertical square function (function input).
    G,
    /// Tent-space area functional (tent-field input).
    A,
    /// Tent-space Carleson functional (tent-field input).
    C,
    /// Maximal function (function input).
    M,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepFamily {
    Gasket,
    Lattice,
}

#[derive(Subcommand)]
enum Command {
    /// Build a graph from a recipe such as `lattice:2:31` or `sierpinski:5`.
    Build {
        #[arg(long)]
        family: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Heat kernel rows `p_k(x, .)` for `k = 0..=steps`.
    Kernel {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        source: usize,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Riesz transform `d Delta^{-1/2} f` as directed-edge rows.
    Riesz {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Relative tail tolerance of the series route.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Evaluate a functional; output rows are `vertex,value`.
    Functional {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, value_enum)]
        kind: FunctionalKind,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        /// Time truncation for L and g.
        #[arg(long, default_value_t = 64)]
        k_max: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Molecular decomposition of a function.
    Decompose {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, default_value_t = 1.0)]
        eps: f64,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Upper Gaussian-type bound constants across scales.
    VerifyUe {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        run: ExperimentArgs,
        #[arg(long)]
        negative_control: bool,
    },
    /// Off-diagonal (Gaffney) constants of time-difference and gradient operators.
    VerifyGaffney {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        run: ExperimentArgs,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        negative_control: bool,
    },
    /// On-diagonal exponent fit.
    FitDiagonal {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        run: ExperimentArgs,
        /// Expected slope.
        #[arg(long, allow_hyphen_values = true)]
        target: Option<f64>,
    },
    /// Riesz transform `L^p` ratios across graph sizes.
    RieszSweep {
        #[arg(long, value_enum)]
        family: Option<SweepFamily>,
        #[command(flatten)]
        run: ExperimentArgs,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Free product of two graphs with different walk dimensions.
    FreeProduct {
        #[arg(long)]
        first: Option<String>,
        #[arg(long)]
        second: Option<String>,
        #[command(flatten)]
        run: ExperimentArgs,
    },
    /// Kernel stochasticity and symmetry.
    VerifyKernel {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        run: ExperimentArgs,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Calculus identities and series/spectral agreement.
    VerifyCalculus {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        run: ExperimentArgs,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Pseudo-gradient positivity and gradient domination.
    VerifyPseudo {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        run: ExperimentArgs,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Local sup bound of `P^k h` by the maximal function.
    VerifyMaximal {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        run: ExperimentArgs,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Tent atomic decomposition round trip on random fields.
    VerifyTent {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        run: ExperimentArgs,
    },
    /// Molecular pipeline on random mean-zero inputs.
    VerifyMolecular {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        run: ExperimentArgs,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Grid constants of the two scalar inequalities.
    LemmaGrids {
        #[command(flatten)]
        run: ExperimentArgs,
    },
    /// Summarize a report; optionally export its tables and plot one.
    Report {
        #[arg(long)]
        input: PathBuf,
        /// Directory receiving one CSV per table.
        #[arg(long)]
        csv_dir: Option<PathBuf>,
        /// Log-log SVG plot of `--y` against `--x` from `--table`.
        #[arg(long, requires_all = ["x", "y"])]
        svg: Option<PathBuf>,
        /// Table to plot; the first one by default.
        #[arg(long)]
        table: Option<String>,
        #[arg(long)]
        x: Option<String>,
        #[arg(long)]
        y: Option<String>,
        /// Column splitting the rows into series.
        #[arg(long)]
        group: Option<String>,
    },
}

fn main() -> ExitCode {
    rieszlab::parallel::init_from_env();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn with_spectral<T>(space: &Space, tol: f64, body: impl FnOnce(&Calculus) -> Result<T>) -> Result<T> {
    if space.vertex_count() <= SPECTRAL_MAX_N {
        let sd = SpectralDecomposition::new(space.graph())?;
        body(&Calculus::Spectral(&sd))
    } else {
        body(&Calculus::series_for(space.graph(), tol))
    }
}

/// Writes the report and prints its verdicts; `true` when all came out as expected.
fn emit(report: &Report, out: Option<&Path>) -> Result<bool> {
    match out {
        Some(path) => report.write(path)?,
        None => print!("{}", report.to_json()?),
    }
    for v in &report.verdicts {
        let status = if v.passed { "PASS" } else { "FAIL" };
        let control = if v.expect_pass { "" } else { " (negative control)" };
        eprintln!("{status} {}{control}: {:.6e} vs {:.6e}", v.name, v.value, v.threshold);
    }
    Ok(report.all_as_expected())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Build { family, out } => {
            let spec = parse_family(&family)?;
            let space = build(&spec)?;
            io::save_space(&out, &space, Some(describe(&spec)))?;
            eprintln!(
                "{} vertices, {} edges -> {}",
                space.vertex_count(),
                space.graph().edge_count(),
                out.display()
            );
            Ok(true)
        }
        Command::Kernel {
            graph,
            source,
            steps,
            out,
        } => {
            let (space, _) = graph.load()?;
            if source >= space.vertex_count() {
                bail!("source {source} out of range 0..{}", space.vertex_count());
            }
            let field = MarkovOperator::new(space.graph()).kernel_rows(source, steps);
            io::write_kernel(&out, &field, space.measure())?;
            Ok(true)
        }
        Command::Riesz { graph, input, out, tol } => {
            let (space, _) = graph.load()?;
            let f = io::read_function(&input, space.vertex_count())?;
            let r = with_spectral(&space, tol, |calc| Ok(riesz_transform(space.graph(), calc, &f)?))?;
            io::write_form(&out, space.graph(), &r.form)?;
            eprintln!("removed mean {:.6e}", r.removed_mean);
            Ok(true)
        }
        Command::Functional {
            graph,
            kind,
            input,
            out,
            beta,
            k_max,
            tol,
        } => {
            let (space, _) = graph.load()?;
            let n = space.vertex_count();
            let values = match kind {
                FunctionalKind::L | FunctionalKind::G => {
                    let f = io::read_function(&input, n)?;
                    let q = with_spectral(&space, tol, |calc| {
                        Ok(match kind {
                            FunctionalKind::L => lp_functional_l(&space, calc, beta, &f, k_max)?,
                            _ => lp_functional_g(space.graph(), calc, beta, &f, k_max)?,
                        })
                    })?;
                    if q.tail_increment > 0.01 {
                        eprintln!(
                            "warning: tail increment {:.3e} between K and K/2; raise --k-max",
                            q.tail_increment
                        );
                    }
                    q.values
                }
                FunctionalKind::A => tent_a(&space, &io::read_tent_field(&input, n)?)?,
                FunctionalKind::C => tent_c(&space, &space.rho_table(), &io::read_tent_field(&input, n)?)?,
                FunctionalKind::M => maximal_function(&space, &io::read_function(&input, n)?)?,
            };
            io::write_function(&out, &values)?;
            Ok(true)
        }
        Command::Decompose {
            graph,
            input,
            beta,
            eps,
            tol,
            out,
        } => {
            let (space, _) = graph.load()?;
            let f = io::read_function(&input, space.vertex_count())?;
            let table = space.rho_table();
            let sd = SpectralDecomposition::new(space.graph())?;
            let dec = molecular_decompose(&space, &table, &sd, &f, &MolecularOptions::new(beta, eps, tol))?;
            let pieces: Vec<_> = dec
                .molecules
                .iter()
                .zip(&dec.coefficients)
                .map(|(mol, lambda)| {
                    let check = check_molecule(&space, mol);
                    json!({
                        "ball": { "center": mol.center, "radius": mol.k },
                        "lambda": lambda,
                        "certificate": {
                            "worst_margin": check.worst_margin,
                            "worst_annulus": check.worst_j,
                            "l1_norm": check.l1_norm,
                            "valid": check.is_valid(),
                        },
                    })
                })
                .collect();
            let doc = json!({
                "graph": graph.graph.display().to_string(),
                "beta": beta,
                "eps": eps,
                "eta": dec.eta,
                "k_max": dec.k_max,
                "removed_mean": dec.removed_mean,
                "relative_residual": dec.relative_residual,
                "closed_loop_error": dec.closed_loop_error,
                "lambda_sum": dec.lambda_sum(),
                "tent_atoms": dec.tent.atoms,
                "pieces": pieces,
            });
            std::fs::write(&out, serde_json::to_string_pretty(&doc)? + "\n")?;
            eprintln!(
                "{} molecules, relative residual {:.3e}",
                dec.molecules.len(),
                dec.relative_residual
            );
            Ok(dec.relative_residual <= tol)
        }
        Command::VerifyUe {
            graph,
            run,
            negative_control,
        } => {
            let (space, name) = graph.load()?;
            let mut p: heat::UeParams = run.params()?;
            p.negative_control |= negative_control;
            emit(&heat::verify_ue(&space, &name, &p), run.out.as_deref())
        }
        Command::VerifyGaffney {
            graph,
            run,
            seed,
            negative_control,
        } => {
            let (space, name) = graph.load()?;
            let mut p: gaffney::GaffneyParams = run.params()?;
            p.negative_control |= negative_control;
            p.seed = seed.unwrap_or(p.seed);
            emit(&gaffney::verify_gaffney(&space, &name, &p), run.out.as_deref())
        }
        Command::FitDiagonal { graph, run, target } => {
            let (space, name) = graph.load()?;
            let mut p: heat::DiagonalParams = run.params()?;
            p.target = target.or(p.target);
            emit(&heat::fit_on_diagonal(&space, &name, &p), run.out.as_deref())
        }
        Command::RieszSweep { family, run, seed } => {
            let mut p: sweep::SweepParams = run.params()?;
            p.seed = seed.unwrap_or(p.seed);
            let name = match family {
                Some(SweepFamily::Gasket) => {
                    p.graphs = (3..=6).map(|l| format!("sierpinski:{l}")).collect();
                    "gasket"
                }
                Some(SweepFamily::Lattice) => {
                    p.graphs = [15, 23, 31, 43, 61].iter().map(|s| format!("lattice:2:{s}")).collect();
                    "lattice"
                }
                None => "custom",
            };
            emit(&sweep::riesz_lp_sweep(name, &p)?, run.out.as_deref())
        }
        Command::FreeProduct { first, second, run } => {
            let mut p: free_product::FreeProductParams = run.params()?;
            if let Some(f) = first {
                p.first = f;
            }
            if let Some(s) = second {
                p.second = s;
            }
            emit(&free_product::free_product_experiment(&p)?, run.out.as_deref())
        }
        Command::VerifyKernel { graph, run, seed } => {
            let (space, name) = graph.load()?;
            let mut p: heat::ExactnessParams = run.params()?;
            p.seed = seed.unwrap_or(p.seed);
            emit(&heat::kernel_exactness(&space, &name, &p), run.out.as_deref())
        }
        Command::VerifyCalculus { graph, run, seed } => {
            let (space, name) = graph.load()?;
            let mut p: identities::IdentityParams = run.params()?;
            p.seed = seed.unwrap_or(p.seed);
            let mut report = identities::calculus_identities(&space, &name, &p);
            let q = identities::AgreementParams {
                seed: p.seed,
                ..Default::default()
            };
            let agreement = identities::spectral_series_agreement(&space, &name, &q);
            report.tables.extend(agreement.tables);
            report.verdicts.extend(agreement.verdicts);
            report.notes.extend(agreement.notes);
            emit(&report, run.out.as_deref())
        }
        Command::VerifyPseudo { graph, run, seed } => {
            let (space, name) = graph.load()?;
            let mut p: pseudo::PseudoParams = run.params()?;
            p.seed = seed.unwrap_or(p.seed);
            emit(&pseudo::verify_pseudo_gradient(&space, &name, &p), run.out.as_deref())
        }
        Command::VerifyMaximal { graph, run, seed } => {
            let (space, name) = graph.load()?;
            let mut p: maximal::MaximalParams = run.params()?;
            p.seed = seed.unwrap_or(p.seed);
            emit(&maximal::verify_pk_maximal_bound(&space, &name, &p), run.out.as_deref())
        }
        Command::VerifyTent { graph, run } => {
            let (space, name) = graph.load()?;
            let p: hardy::TentParams = run.params()?;
            emit(&hardy::tent_round_trip(&space, &name, &p)?, run.out.as_deref())
        }
        Command::VerifyMolecular { graph, run, seed } => {
            let (space, name) = graph.load()?;
            let mut p: hardy::MolecularParams = run.params()?;
            p.seed = seed.unwrap_or(p.seed);
            emit(&hardy::molecular_pipeline(&space, &name, &p)?, run.out.as_deref())
        }
        Command::LemmaGrids { run } => {
            let p: lemmas::LemmaParams = run.params()?;
            emit(&lemmas::lemma_grids(&p), run.out.as_deref())
        }
        Command::Report {
            input,
            csv_dir,
            svg,
            table,
            x,
            y,
            group,
        } => {
            let report = Report::read(&input)?;
            summarize(&report);
            if let Some(dir) = csv_dir {
                std::fs::create_dir_all(&dir)?;
                for t in &report.tables {
                    io::write_table(&dir.join(format!("{}.csv", t.name)), &t.columns, &t.rows)?;
                }
            }
            if let (Some(path), Some(x), Some(y)) = (svg, x, y) {
                plot(&report, &path, table.as_deref(), &x, &y, group.as_deref())?;
            }
            Ok(report.all_as_expected())
        }
    }
}

fn summarize(report: &Report) {
    println!(
        "{} on {} (seed {})",
        report.experiment,
        report.graph.as_deref().unwrap_or("-"),
        report.seed.map_or("-".to_string(), |s| s.to_string())
    );
    for fit in &report.fits {
        let target = fit.target.map_or(String::new(), |t| format!(", target {t:.4}"));
        println!(
            "  fit {}: slope {:.4} (rse {:.3e}, {} points{target})",
            fit.name, fit.slope, fit.residual_std_error, fit.points
        );
    }
    for v in &report.verdicts {
        let status = if v.passed { "PASS" } else { "FAIL" };
        let control = if v.expect_pass { "" } else { " (negative control)" };
        println!("  {status} {}{control}: {:.6e} vs {:.6e}", v.name, v.value, v.threshold);
    }
    for note in &report.notes {
        println!("  note: {note}");
    }
}

fn plot(report: &Report, path: &Path, table: Option<&str>, x: &str, y: &str, group: Option<&str>) -> Result<()> {
    let t = match table {
        Some(name) => report.table(name).with_context(|| format!("no table `{name}`"))?,
        None => report.tables.first().context("report has no tables")?,
    };
    let column = |name: &str| {
        t.columns
            .iter()
            .position(|c| c == name)
            .with_context(|| format!("table `{}` has no column `{name}`", t.name))
    };
    let (xi, yi) = (column(x)?, column(y)?);
    let gi = group.map(column).transpose()?;
    let mut keys: Vec<f64> = Vec::new();
    let mut points: Vec<Vec<(f64, f64)>> = Vec::new();
    for row in &t.rows {
        let key = gi.map_or(0.0, |g| row[g]);
        let slot = match keys.iter().position(|k| *k == key) {
            Some(i) => i,
            None => {
                keys.push(key);
                points.push(Vec::new());
                keys.len() - 1
            }
        };
        points[slot].push((row[xi], row[yi]));
    }
    let names: Vec<String> = keys
        .iter()
        .map(|k| match group {
            Some(g) => format!("{g} = {k}"),
            None => y.to_string(),
        })
        .collect();
    let series: Vec<Series> = names
        .iter()
        .zip(points)
        .map(|(name, points)| Series { name, points })
        .collect();
    let title = format!("{}: {}", report.experiment, t.name);
    std::fs::write(path, loglog_svg(&title, x, y, &series))?;
    Ok(())
}
