use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use sdl_core::convex::{numrange_boundary, ConvexRegion, DEFAULT_ANGLES};
use sdl_core::decomposition::{
    auto_contours, decompose_operator, idempotent_system, orthogonalize, verify_block_ranges,
};
use sdl_core::gleason::{GleasonConfig, GleasonSearch, ModelDomain};
use sdl_core::kspectral::estimate_K;
use sdl_core::linalg::{eigenvalues, spectral_norm};
use sdl_core::np::{reconstruct, BoundaryGrid, DirichletSolver, NpOperator, SemispectralDensity};
use sdl_core::sampler::RegionSampler;
use sdl_core::{ComplexMatrix, C64};

use crate::error::{Result, SdlError};
use crate::io::{
    catalog, grid_csv, pair, read_json, read_matrix, ContoursFile, CurveJson, DistanceReport, MatrixFile, OutputSet,
    Pair, RationalJson, RegionFile, SearchConfigJson, Svg,
};
use crate::scenario::{self, parallel_runs, reconstruction_battery, Scenario};

#[derive(Debug, Parser)]
#[command(name = "sdl", version, about = "Spectral sets, double layers and Gleason parts")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Overwrite existing output files.
    #[arg(long, global = true)]
    pub force: bool,
    /// Formats to write; defaults to every format the command produces.
    #[arg(long, global = true, value_delimiter = ',')]
    pub format: Vec<Format>,
    /// Overrides every configured seed.
    #[arg(long, global = true, env = "SDL_SEED")]
    pub seed: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Numerical range boundary of a matrix.
    Numrange {
        matrix: PathBuf,
        #[arg(long, default_value_t = DEFAULT_ANGLES)]
        m: usize,
    },
    /// Lower bound on the spectral constant of a region.
    Kbound {
        matrix: PathBuf,
        /// Boundary curve of X; defaults to W(T) inflated by --margin.
        #[arg(long)]
        curve: Option<PathBuf>,
        #[arg(long, default_value_t = 0.05)]
        margin: f64,
        /// Search configuration JSON.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 256)]
        samples: usize,
    },
    /// Semispectral density of a matrix on a boundary curve.
    Dilation {
        matrix: PathBuf,
        #[arg(long)]
        curve: PathBuf,
        /// Boundary nodes M.
        #[arg(long = "nodes", short = 'M', default_value_t = 256)]
        nodes: usize,
    },
    /// Riesz decomposition along spectral contours.
    Decompose {
        matrix: PathBuf,
        /// Contours JSON; chosen from the spectrum when absent.
        #[arg(long)]
        contours: Option<PathBuf>,
        #[arg(long, default_value_t = 256)]
        nodes: usize,
    },
    /// Lower bound on the distance between two point evaluations.
    Gleason {
        #[arg(long, default_value = "disc")]
        domain: String,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        x1: Option<C64>,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        x2: Option<C64>,
        #[arg(long)]
        degree: Option<usize>,
        #[arg(long)]
        restarts: Option<usize>,
        #[arg(long)]
        iterations: Option<usize>,
        /// Also write the domain catalog.
        #[arg(long)]
        catalog: bool,
    },
    /// Runs a scenario file and writes its report.
    Scenario {
        file: PathBuf,
        /// Parameter to vary for a convergence study.
        #[arg(long, requires = "ladder")]
        study: Option<String>,
        #[arg(long, value_delimiter = ',', requires = "study")]
        ladder: Vec<f64>,
    },
}

fn parse_complex(s: &str) -> std::result::Result<C64, String> {
    let (re, im) = s.split_once(',').unwrap_or((s, "0"));
    let p = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    Ok(C64::new(p(re)?, p(im)?))
}

impl Common {
    fn wants(&self, f: Format) -> bool {
        self.format.is_empty() || self.format.contains(&f)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

/// Runs a command and returns the files it wrote.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>> {
    let c = &cli.common;
    let mut out = OutputSet::new();
    let mut verdict = Ok(());
    match &cli.command {
        Command::Numrange { matrix, m } => numrange(c, &mut out, &read_matrix(matrix)?, *m)?,
        Command::Kbound {
            matrix,
            curve,
            margin,
            config,
            samples,
        } => kbound(c, &mut out, &read_matrix(matrix)?, curve.as_deref(), *margin, config.as_deref(), *samples)?,
        Command::Dilation { matrix, curve, nodes } => dilation(c, &mut out, &read_matrix(matrix)?, curve, *nodes)?,
        Command::Decompose {
            matrix,
            contours,
            nodes,
        } => decompose(c, &mut out, &read_matrix(matrix)?, contours.as_deref(), *nodes)?,
        Command::Gleason {
            domain,
            x1,
            x2,
            degree,
            restarts,
            iterations,
            catalog: with_catalog,
        } => {
            if *with_catalog {
                out.add_json(c.path("domains.json"), &catalog())?;
            }
            match (x1, x2) {
                (Some(a), Some(b)) => {
                    let d = ModelDomain::catalog(domain).map_err(|_| SdlError::Input(format!("unknown domain {domain:?}")))?;
                    let base = GleasonConfig::default();
                    let cfg = GleasonConfig {
                        degree: degree.unwrap_or(base.degree),
                        restarts: restarts.unwrap_or(base.restarts),
                        iterations: iterations.unwrap_or(base.iterations),
                        seed: c.seed.unwrap_or(base.seed),
                        ..base
                    };
                    let search = GleasonSearch::new(*a, *b, &d, &cfg, None)?;
                    let e = search.finish(parallel_runs(&search))?;
                    out.add_json(c.path("distance.json"), &DistanceReport::new(domain, *a, *b, &e))?;
                }
                (None, None) if *with_catalog => {}
                _ => return Err(SdlError::Input("gleason needs both --x1 and --x2 (or --catalog)".into())),
            }
        }
        Command::Scenario { file, study, ladder } => {
            let mut s = Scenario::load(file)?;
            if let Some(seed) = c.seed {
                s.seed = seed;
            }
            let report = match study {
                Some(param) => scenario::convergence_study(&s, param, ladder)?,
                None => scenario::run(&s)?,
            };
            let stem = file.file_stem().and_then(|x| x.to_str()).unwrap_or("scenario");
            if c.wants(Format::Json) {
                out.add(c.path(&format!("{stem}.report.json")), report.to_json()?);
            }
            if c.wants(Format::Csv) {
                out.add(c.path(&format!("{stem}.trials.csv")), report.trials_csv()?);
            }
            if !report.passed {
                verdict = Err(SdlError::Threshold);
            }
        }
    }
    let written = out.commit(c.force)?;
    verdict.map(|_| written)
}

fn region_svg(regions: &[&ConvexRegion]) -> String {
    regions
        .iter()
        .fold(Svg::default(), |svg, r| svg.polyline(r.witness(), true))
        .render()
}

fn numrange(c: &Common, out: &mut OutputSet, t: &ComplexMatrix, m: usize) -> Result<()> {
    let w = numrange_boundary(t, m)?;
    if c.wants(Format::Json) {
        out.add_json(c.path("numrange.json"), &RegionFile::from_region(&w))?;
    }
    if c.wants(Format::Svg) {
        out.add(c.path("numrange.svg"), region_svg(&[&w]));
    }
    Ok(())
}

#[derive(Serialize)]
struct KboundReport {
    k_hat: f64,
    flagged: usize,
    ratios: Vec<f64>,
    certificate: RationalJson,
}

fn kbound(
    c: &Common,
    out: &mut OutputSet,
    t: &ComplexMatrix,
    curve: Option<&Path>,
    margin: f64,
    config: Option<&Path>,
    samples: usize,
) -> Result<()> {
    let sampler = match curve {
        Some(p) => RegionSampler::curve(read_json::<CurveJson>(p)?.to_curve()?, samples)?,
        None => RegionSampler::from_region(&numrange_boundary(t, DEFAULT_ANGLES)?.inflate(margin), samples)?,
    };
    let mut cfg = match config {
        Some(p) => read_json::<SearchConfigJson>(p)?.to_config(),
        None => SearchConfigJson::default().to_config(),
    };
    if let Some(seed) = c.seed {
        cfg.seed = seed;
    }
    let est = estimate_K(t, &sampler, &cfg)?;
    if c.wants(Format::Json) {
        out.add_json(
            c.path("kbound.json"),
            &KboundReport {
                k_hat: est.k_hat,
                flagged: est.flagged,
                ratios: est.ratios.clone(),
                certificate: RationalJson::from_rational(&est.certificate),
            },
        )?;
    }
    if c.wants(Format::Csv) {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["restart", "ratio"])?;
        for (i, r) in est.ratios.iter().enumerate() {
            w.serialize((i, r))?;
        }
        out.add(c.path("kbound.csv"), crate::io::finish_csv(w)?);
    }
    Ok(())
}

#[derive(Serialize)]
struct DilationReport {
    nodes: usize,
    margin: f64,
    clearance: f64,
    min_eigenvalue: f64,
    hermitian_defect: f64,
    sum_error: f64,
    /// Reconstruction errors for `1, z, z², z³, 1/(z − 3)`.
    reconstruction_errors: Vec<f64>,
}

fn dilation(c: &Common, out: &mut OutputSet, t: &ComplexMatrix, curve: &Path, nodes: usize) -> Result<()> {
    let curve = read_json::<CurveJson>(curve)?.to_curve()?;
    let grid = BoundaryGrid::discretize(&curve, nodes)?;
    let density = SemispectralDensity::new(&grid, t)?;
    let solver = DirichletSolver::new(&NpOperator::new(&grid)?)?;
    let reconstruction_errors = reconstruction_battery()
        .iter()
        .map(|u| Ok(spectral_norm(&(&reconstruct(u, &grid, &solver, &density)? - &u.eval_matrix_unchecked(t)?))))
        .collect::<Result<Vec<_>>>()?;
    let report = DilationReport {
        nodes,
        margin: grid.margin(),
        clearance: grid.range_clearance(t)?,
        min_eigenvalue: density.min_eigenvalue()?,
        hermitian_defect: density.hermitian_defect(),
        sum_error: density.total().distance(&ComplexMatrix::identity(t.dim())),
        reconstruction_errors,
    };
    if c.wants(Format::Json) {
        out.add_json(c.path("dilation.json"), &report)?;
    }
    if c.wants(Format::Csv) {
        out.add(c.path("grid.csv"), grid_csv(&grid)?);
    }
    if c.wants(Format::Svg) {
        let w = numrange_boundary(t, DEFAULT_ANGLES)?;
        let svg = Svg::default().polyline(grid.nodes(), true).polyline(w.witness(), true);
        out.add(c.path("dilation.svg"), svg.render());
    }
    Ok(())
}

#[derive(Serialize)]
struct SystemReport {
    idempotent_residuals: f64,
    cross_residuals: f64,
    commutation_residuals: f64,
    similarity_identity_residual: f64,
    projection_residual: f64,
    similarity_condition_number: f64,
    off_block_residual: f64,
    block_hull_residual: f64,
    block_spectra: Vec<Vec<Pair>>,
    remainder_rank: usize,
}

fn decompose(c: &Common, out: &mut OutputSet, t: &ComplexMatrix, contours: Option<&Path>, nodes: usize) -> Result<()> {
    let contours = match contours {
        Some(p) => read_json::<ContoursFile>(p)?.to_contours()?,
        None => auto_contours(t, nodes)?,
    };
    let sys = idempotent_system(t, &contours)?;
    let o = orthogonalize(&sys)?;
    let d = decompose_operator(t, &o)?;
    let block_spectra = d
        .blocks
        .iter()
        .map(|b| Ok(eigenvalues(b)?.into_iter().map(pair).collect()))
        .collect::<Result<Vec<Vec<Pair>>>>()?;
    let report = SystemReport {
        idempotent_residuals: sys.residuals.idempotent,
        cross_residuals: sys.residuals.cross,
        commutation_residuals: sys.residuals.commutation,
        similarity_identity_residual: o.similarity_identity_residual(&sys),
        projection_residual: o.projection_residual(),
        similarity_condition_number: o.condition_number(),
        off_block_residual: d.residual,
        block_hull_residual: verify_block_ranges(&d.blocks)?,
        block_spectra,
        remainder_rank: sys.remainder_rank(),
    };
    if c.wants(Format::Json) {
        out.add_json(c.path("system.json"), &report)?;
        out.add_json(c.path("similarity.json"), &MatrixFile::from_matrix(&o.similarity))?;
        let blocks: Vec<MatrixFile> = d.blocks.iter().map(MatrixFile::from_matrix).collect();
        out.add_json(c.path("blocks.json"), &blocks)?;
    }
    if c.wants(Format::Svg) {
        let regions = d
            .blocks
            .iter()
            .map(|b| numrange_boundary(b, DEFAULT_ANGLES))
            .collect::<sdl_core::Result<Vec<_>>>()?;
        let mut svg = regions.iter().fold(Svg::default(), |s, r| s.polyline(r.witness(), true));
        for z in report.block_spectra.iter().flatten() {
            svg = svg.marker(C64::new(z[0], z[1]));
        }
        out.add(c.path("hull.svg"), svg.render());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_arguments() {
        assert_eq!(parse_complex("0.5,-1").unwrap(), C64::new(0.5, -1.0));
        assert_eq!(parse_complex("5").unwrap(), C64::new(5.0, 0.0));
        assert!(parse_complex("a,b").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
