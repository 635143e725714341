//! Command-line front end for the wigner-lab phase-space toolkit.

use wigner_lab_cli::formats;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use formats::{read_field, write_field, Field, Format};
use wigner_lab::coarse::{
    coarse_grain_2d, convolve_mu, convolve_x, limit_check_mu, limit_check_x, min_grain_size,
    positivity_report, Axis, CoarseGrainSpec,
};
use wigner_lab::fisher::{
    check_i_zero, fisher_closed_form, fisher_cross_term, fisher_monte_carlo, fisher_quadrature,
};
use wigner_lab::hologram::{
    hologram_from_pdf, hologram_from_state, intensity, phase_profile, reconstruct_pdf,
    sample_positions, wave_equation_residual,
};
use wigner_lab::states::{effective_extent, momentum_evaluator, position_evaluator, Psi};
use wigner_lab::wigner::{cross_wigner, marginals, wigner_momentum, wigner_transform, Extension};
use wigner_lab::{
    integrate_1d, make_conjugate_pair, pair_for_reciprocal, sample_momentum, sample_position,
    standard_pair, ComplexField1D, ConjugatePair, Grid1D, StateSpec,
};

#[derive(Parser)]
#[command(
    name = "wigner-lab",
    version,
    about = "Phase-space numerics: Wigner distributions, phase holograms, 1D coarse graining, Fisher diagnostics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct GridArgs {
    /// Points per axis.
    #[arg(long, default_value_t = 256)]
    n: usize,
    /// Half extent of the position grid (the grid spans [-extent, extent)).
    #[arg(long, default_value_t = 8.0)]
    extent: f64,
    /// Points on the transform (z) axis; defaults to --n.
    #[arg(long)]
    z_n: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    hbar: f64,
}

#[derive(Args, Clone)]
struct StateArgs {
    /// Inline JSON state description, e.g. '{"Gaussian":{"center":0,"width":1}}'.
    #[arg(long, conflicts_with = "state_file")]
    state: Option<String>,
    /// Path to a JSON state description.
    #[arg(long)]
    state_file: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct OutArgs {
    #[arg(long)]
    out: PathBuf,
    /// csv, json, or bin.
    #[arg(long, default_value = "csv")]
    format: String,
}

#[derive(Subcommand)]
enum Command {
    /// Sampled moments and extents of a state.
    StateInfo {
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Wigner distribution over (x, mu).
    Wigner {
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        output: OutArgs,
    },
    /// Cross-Wigner transform of two states (the second conjugated unless
    /// --no-conjugate-b is given).
    CrossWigner {
        #[arg(long)]
        state_a: String,
        #[arg(long)]
        state_b: String,
        #[arg(long)]
        no_conjugate_b: bool,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        output: OutArgs,
    },
    /// Momentum-representation Wigner distribution.
    WignerMomentum {
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        output: OutArgs,
    },
    /// Position and momentum marginals of the Wigner distribution.
    Marginals {
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        out_x: PathBuf,
        #[arg(long)]
        out_mu: PathBuf,
        #[arg(long, default_value = "csv")]
        format: String,
    },
    /// Complex hologram Z(x,z) of a state, or of a stored density with --input.
    Hologram {
        #[command(flatten)]
        state: StateArgs,
        /// Build from a stored (x, mu) density instead of a state.
        #[arg(long)]
        input: Option<PathBuf>,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        output: OutArgs,
    },
    /// Phase profile Psi(x,z) with node masking; prints a JSON summary.
    Phase {
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        output: OutArgs,
    },
    /// Intensity PDF P = |Psi|^2 of the phase profile.
    Intensity {
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        output: OutArgs,
    },
    /// Draw measurement positions from the intensity PDF.
    Sample {
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = 10000)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recover the density p(x,mu) from a stored complex hologram.
    Reconstruct {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        hbar: f64,
        #[command(flatten)]
        output: OutArgs,
    },
    /// One-dimensional (mu or x) or separable 2D coarse graining.
    Coarse {
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        grid: GridArgs,
        /// mu, x, or 2d.
        #[arg(long)]
        axis: String,
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long)]
        sigma_x: Option<f64>,
        #[arg(long)]
        sigma_mu: Option<f64>,
        /// Magnitude profile samples, one value per line, matching the
        /// weighting axis count.
        #[arg(long)]
        profile_file: Option<PathBuf>,
        #[command(flatten)]
        output: OutArgs,
    },
    /// Large-sigma limit check: rescaled densities against the limit profile.
    LimitCheck {
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        grid: GridArgs,
        /// mu or x.
        #[arg(long)]
        axis: String,
        /// Multiples of the state extent to sweep.
        #[arg(long, default_value = "10,30,100", value_delimiter = ',')]
        sigma_factors: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Positivity report of a stored density.
    Positivity {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1e-3)]
        epsilon: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Minimum grain size achieving epsilon-positivity, by bisection.
    SigmaMin {
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        grid: GridArgs,
        /// mu or x.
        #[arg(long)]
        axis: String,
        #[arg(long, default_value_t = 1e-3)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.05)]
        lo: f64,
        #[arg(long, default_value_t = 240.0)]
        hi: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fisher information: quadrature, closed-form, cross-term, or monte-carlo.
    Fisher {
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        grid: GridArgs,
        /// quadrature, closed-form, cross-term, or monte-carlo.
        #[arg(long)]
        mode: String,
        /// Half extent of the x rectangle (quadrature, monte-carlo).
        #[arg(long, default_value_t = 1.0)]
        x0: f64,
        /// Boundary for the closed form (defaults to 2 * x0).
        #[arg(long)]
        boundary: Option<f64>,
        /// Interval for the cross term.
        #[arg(long, default_value_t = -2.0, allow_hyphen_values = true)]
        wa: f64,
        #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
        wb: f64,
        #[arg(long, default_value_t = 100000)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// I = 0 self-consistency check on the matched rectangle.
    FisherCheck {
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        grid: GridArgs,
        /// Half extent of the x rectangle; defaults to 0.45 times the
        /// state's effective extent so box modes stay inside their support.
        #[arg(long)]
        x0: Option<f64>,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Hologram -> reconstruction consistency against the Wigner transform.
    Roundtrip {
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    wigner_lab::init_thread_pool_from_env();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

type AnyError = Box<dyn std::error::Error>;

fn load_state(args: &StateArgs) -> Result<StateSpec, AnyError> {
    let text = match (&args.state, &args.state_file) {
        (Some(inline), None) => inline.clone(),
        (None, Some(path)) => std::fs::read_to_string(path)?,
        _ => return Err("exactly one of --state or --state-file is required".into()),
    };
    let spec: StateSpec = serde_json::from_str(&text)?;
    spec.validate()?;
    Ok(spec)
}

fn parse_state(text: &str) -> Result<StateSpec, AnyError> {
    let spec: StateSpec = serde_json::from_str(text)?;
    spec.validate()?;
    Ok(spec)
}

struct Pipeline {
    x: Grid1D,
    pair: ConjugatePair,
    hbar: f64,
}

fn pipeline(grid: &GridArgs) -> Result<Pipeline, AnyError> {
    let x = Grid1D::symmetric(0.0, 2.0 * grid.extent / grid.n as f64, grid.n)?;
    let pair = match grid.z_n {
        None => standard_pair(&x, grid.hbar)?,
        Some(z_n) => {
            // keep the z span of the aligned pair, refine the step
            let span = 2.0 * x.step() / grid.hbar * grid.n as f64;
            let z = Grid1D::symmetric(0.0, span / z_n as f64, z_n)?;
            make_conjugate_pair(z, grid.hbar)?
        }
    };
    Ok(Pipeline {
        x,
        pair,
        hbar: grid.hbar,
    })
}

fn evaluator(spec: &StateSpec, x: &Grid1D) -> Result<Psi, AnyError> {
    Ok(position_evaluator(spec, x)?)
}

fn parse_format(s: &str) -> Result<Format, AnyError> {
    Format::parse(s).map_err(AnyError::from)
}

fn parse_axis(s: &str) -> Result<Axis, AnyError> {
    match s {
        "mu" | "momentum" => Ok(Axis::Momentum),
        "x" | "position" => Ok(Axis::Position),
        other => Err(format!("unknown axis '{other}' (expected mu or x)").into()),
    }
}

fn emit_report<T: Serialize>(report: &T, out: Option<&Path>) -> Result<(), AnyError> {
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn run(command: Command) -> Result<(), AnyError> {
    match command {
        Command::StateInfo { state, grid, out } => {
            let spec = load_state(&state)?;
            let pipe = pipeline(&grid)?;
            let psi = sample_position(&spec, &pipe.x)?;
            let phi = sample_momentum(&spec, &pipe.pair)?;
            #[derive(Serialize)]
            struct Info {
                schema_version: u32,
                norm: f64,
                mean_x: f64,
                std_x: f64,
                effective_extent_x: f64,
                mean_mu: f64,
                std_mu: f64,
                effective_extent_mu: f64,
            }
            let moments = |f: &ComplexField1D| {
                let g = f.grid();
                let dens: Vec<f64> = f.values().iter().map(|v| v.norm_sqr()).collect();
                let mass = integrate_1d(&dens, g);
                let mean: f64 = dens
                    .iter()
                    .enumerate()
                    .map(|(k, d)| g.point(k) * d)
                    .sum::<f64>()
                    * g.step()
                    / mass;
                let var: f64 = dens
                    .iter()
                    .enumerate()
                    .map(|(k, d)| (g.point(k) - mean).powi(2) * d)
                    .sum::<f64>()
                    * g.step()
                    / mass;
                (mean, var.sqrt())
            };
            let (mean_x, std_x) = moments(&psi);
            let (mean_mu, std_mu) = moments(&phi);
            let info = Info {
                schema_version: 1,
                norm: psi.norm_squared(),
                mean_x,
                std_x,
                effective_extent_x: effective_extent(&psi, 1e-6),
                mean_mu,
                std_mu,
                effective_extent_mu: effective_extent(&phi, 1e-6),
            };
            emit_report(&info, out.as_deref())
        }

        Command::Wigner {
            state,
            grid,
            output,
        } => {
            let spec = load_state(&state)?;
            let pipe = pipeline(&grid)?;
            let w = wigner_transform(&spec, &pipe.x, &pipe.pair)?;
            write_field(
                &output.out,
                &Field::Real2D(w.into_base()),
                parse_format(&output.format)?,
            )?;
            Ok(())
        }

        Command::CrossWigner {
            state_a,
            state_b,
            no_conjugate_b,
            grid,
            output,
        } => {
            let spec_a = parse_state(&state_a)?;
            let spec_b = parse_state(&state_b)?;
            let pipe = pipeline(&grid)?;
            let f1 = sample_position(&spec_a, &pipe.x)?;
            let f2 = sample_position(&spec_b, &pipe.x)?;
            let f2 = if no_conjugate_b {
                f2
            } else {
                ComplexField1D::new(*f2.grid(), f2.values().iter().map(|v| v.conj()).collect())?
            };
            let cw = cross_wigner(&f1, &f2, &pipe.pair, Extension::Zero)?;
            write_field(
                &output.out,
                &Field::Complex2D(cw),
                parse_format(&output.format)?,
            )?;
            Ok(())
        }

        Command::WignerMomentum {
            state,
            grid,
            output,
        } => {
            let spec = load_state(&state)?;
            let pipe = pipeline(&grid)?;
            let w = wigner_momentum(&spec, &pipe.x, &pipe.pair)?;
            write_field(
                &output.out,
                &Field::Real2D(w.into_base()),
                parse_format(&output.format)?,
            )?;
            Ok(())
        }

        Command::Marginals {
            state,
            grid,
            out_x,
            out_mu,
            format,
        } => {
            let spec = load_state(&state)?;
            let pipe = pipeline(&grid)?;
            let w = wigner_transform(&spec, &pipe.x, &pipe.pair)?;
            let (mx, mmu) = marginals(&w);
            let fmt = parse_format(&format)?;
            write_field(&out_x, &Field::Real1D(mx), fmt)?;
            write_field(&out_mu, &Field::Real1D(mmu), fmt)?;
            Ok(())
        }

        Command::Hologram {
            state,
            input,
            grid,
            output,
        } => {
            let z = match input {
                Some(path) => {
                    let field = read_field(&path)?;
                    let p = field.as_real2d()?;
                    // the stored density fixes the mu axis; derive its pair
                    let pair = pair_for_reciprocal(*p.grid_y(), grid.hbar)?;
                    hologram_from_pdf(p, &pair)?
                }
                None => {
                    let pipe = pipeline(&grid)?;
                    let spec = load_state(&state)?;
                    let psi = evaluator(&spec, &pipe.x)?;
                    hologram_from_state(&psi, &pipe.x, &pipe.pair)?
                }
            };
            write_field(
                &output.out,
                &Field::Complex2D(z),
                parse_format(&output.format)?,
            )?;
            Ok(())
        }

        Command::Phase {
            state,
            grid,
            output,
        } => {
            let spec = load_state(&state)?;
            let pipe = pipeline(&grid)?;
            let psi = evaluator(&spec, &pipe.x)?;
            let field = phase_profile(&psi, &pipe.x, pipe.pair.direct(), pipe.hbar)?;
            #[derive(Serialize)]
            struct Summary {
                schema_version: u32,
                masked_fraction: f64,
                wave_equation_residual: f64,
            }
            let summary = Summary {
                schema_version: 1,
                masked_fraction: field.masked_fraction(),
                wave_equation_residual: wave_equation_residual(&field),
            };
            write_field(
                &output.out,
                &Field::Complex2D(field.phase().clone()),
                parse_format(&output.format)?,
            )?;
            emit_report(&summary, None)
        }

        Command::Intensity {
            state,
            grid,
            output,
        } => {
            let spec = load_state(&state)?;
            let pipe = pipeline(&grid)?;
            let psi = evaluator(&spec, &pipe.x)?;
            let field = phase_profile(&psi, &pipe.x, pipe.pair.direct(), pipe.hbar)?;
            let p = intensity(&field)?;
            write_field(
                &output.out,
                &Field::Real2D(p),
                parse_format(&output.format)?,
            )?;
            Ok(())
        }

        Command::Sample {
            state,
            grid,
            count,
            seed,
            out,
        } => {
            let spec = load_state(&state)?;
            let pipe = pipeline(&grid)?;
            let psi = evaluator(&spec, &pipe.x)?;
            let field = phase_profile(&psi, &pipe.x, pipe.pair.direct(), pipe.hbar)?;
            let p = intensity(&field)?;
            let draws = sample_positions(&p, count, seed)?;
            let mut text = format!("# samples {count} seed {seed}\n");
            for (x, z) in draws {
                text.push_str(&format!("{x:.16e},{z:.16e}\n"));
            }
            std::fs::write(out, text)?;
            Ok(())
        }

        Command::Reconstruct {
            input,
            hbar,
            output,
        } => {
            let field = read_field(&input)?;
            let z = field.as_complex2d()?;
            let pair = make_conjugate_pair(*z.grid_y(), hbar)?;
            let p = reconstruct_pdf(z, &pair)?;
            write_field(
                &output.out,
                &Field::Real2D(p),
                parse_format(&output.format)?,
            )?;
            Ok(())
        }

        Command::Coarse {
            state,
            grid,
            axis,
            sigma,
            sigma_x,
            sigma_mu,
            profile_file,
            output,
        } => {
            let spec = load_state(&state)?;
            let pipe = pipeline(&grid)?;
            let w = wigner_transform(&spec, &pipe.x, &pipe.pair)?;
            let profile = match &profile_file {
                Some(path) => Some(
                    std::fs::read_to_string(path)?
                        .lines()
                        .filter(|l| !l.trim().is_empty())
                        .map(|l| l.trim().parse::<f64>())
                        .collect::<Result<Vec<f64>, _>>()?,
                ),
                None => None,
            };
            let out_field = match axis.as_str() {
                "2d" => {
                    let sx = sigma_x.ok_or("--sigma-x required for axis 2d")?;
                    let smu = sigma_mu.ok_or("--sigma-mu required for axis 2d")?;
                    coarse_grain_2d(w.base(), sx, smu)?
                }
                other => {
                    let axis = parse_axis(other)?;
                    let sigma = sigma.ok_or("--sigma required")?;
                    let mut cg = CoarseGrainSpec::gaussian(axis, sigma);
                    cg.magnitude_profile = profile;
                    match axis {
                        Axis::Momentum => convolve_mu(w.base(), &cg)?,
                        Axis::Position => convolve_x(w.base(), &cg, pipe.hbar)?,
                    }
                }
            };
            write_field(
                &output.out,
                &Field::Real2D(out_field),
                parse_format(&output.format)?,
            )?;
            Ok(())
        }

        Command::LimitCheck {
            state,
            grid,
            axis,
            sigma_factors,
            out,
        } => {
            let spec = load_state(&state)?;
            let pipe = pipeline(&grid)?;
            let axis = parse_axis(&axis)?;
            let mut deviations = Vec::new();
            let mut sigmas = Vec::new();
            let extent;
            match axis {
                Axis::Momentum => {
                    let psi = evaluator(&spec, &pipe.x)?;
                    let phi_field = sample_momentum(&spec, &pipe.pair)?;
                    extent = effective_extent(&phi_field, 1e-6);
                    let mu_eval = Grid1D::symmetric(0.0, 2.0 * extent / 64.0, 64)?;
                    let f_x = vec![1.0; pipe.x.count()];
                    for factor in &sigma_factors {
                        let sigma = factor * extent;
                        sigmas.push(sigma);
                        deviations.push(limit_check_mu(
                            &psi, &f_x, &pipe.x, &mu_eval, sigma, pipe.hbar,
                        )?);
                    }
                }
                Axis::Position => {
                    let phi = momentum_evaluator(&spec, &pipe.pair)?;
                    let psi_field = sample_position(&spec, &pipe.x)?;
                    extent = effective_extent(&psi_field, 1e-6);
                    let x_eval = Grid1D::symmetric(0.0, 2.0 * extent / 64.0, 64)?;
                    let mu_grid = *pipe.pair.reciprocal();
                    let f_m = vec![1.0; mu_grid.count()];
                    for factor in &sigma_factors {
                        let sigma = factor * extent;
                        sigmas.push(sigma);
                        deviations.push(limit_check_x(
                            &phi, &f_m, &mu_grid, &x_eval, sigma, pipe.hbar,
                        )?);
                    }
                }
            }
            #[derive(Serialize)]
            struct LimitReport {
                schema_version: u32,
                state_extent: f64,
                sigmas: Vec<f64>,
                deviations: Vec<f64>,
                monotone_decreasing: bool,
                final_deviation: f64,
            }
            let monotone = deviations.windows(2).all(|w| w[1] < w[0]);
            let report = LimitReport {
                schema_version: 1,
                state_extent: extent,
                sigmas,
                monotone_decreasing: monotone,
                final_deviation: *deviations.last().unwrap_or(&f64::NAN),
                deviations,
            };
            emit_report(&report, out.as_deref())
        }

        Command::Positivity {
            input,
            epsilon,
            out,
        } => {
            let field = read_field(&input)?;
            let report = positivity_report(field.as_real2d()?, epsilon)?;
            #[derive(Serialize)]
            struct Wrapped {
                schema_version: u32,
                #[serde(flatten)]
                report: wigner_lab::coarse::PositivityReport,
            }
            emit_report(
                &Wrapped {
                    schema_version: 1,
                    report,
                },
                out.as_deref(),
            )
        }

        Command::SigmaMin {
            state,
            grid,
            axis,
            epsilon,
            lo,
            hi,
            out,
        } => {
            let spec = load_state(&state)?;
            let pipe = pipeline(&grid)?;
            let axis = parse_axis(&axis)?;
            let w = wigner_transform(&spec, &pipe.x, &pipe.pair)?;
            let result = min_grain_size(w.base(), axis, epsilon, (lo, hi), pipe.hbar)?;
            #[derive(Serialize)]
            struct SigmaReport {
                schema_version: u32,
                sigma_min: f64,
                monotone: bool,
                degenerate_bracket: bool,
                epsilon: f64,
                grid_n: usize,
                evaluations: Vec<(f64, bool)>,
            }
            emit_report(
                &SigmaReport {
                    schema_version: 1,
                    sigma_min: result.sigma_min,
                    monotone: result.monotone,
                    degenerate_bracket: result.degenerate_bracket,
                    epsilon,
                    grid_n: grid.n,
                    evaluations: result.evaluations,
                },
                out.as_deref(),
            )
        }

        Command::Fisher {
            state,
            grid,
            mode,
            x0,
            boundary,
            wa,
            wb,
            count,
            seed,
            out,
        } => {
            let spec = load_state(&state)?;
            let pipe = pipeline(&grid)?;
            let psi = evaluator(&spec, &pipe.x)?;
            #[derive(Serialize)]
            struct FisherReport {
                schema_version: u32,
                mode: String,
                value: f64,
                #[serde(skip_serializing_if = "Option::is_none")]
                std_error: Option<f64>,
            }
            let (value, std_error) = match mode.as_str() {
                "quadrature" => {
                    let z0 = 2.0 * x0 / pipe.hbar;
                    let gx = Grid1D::inclusive(-x0, x0, grid.n)?;
                    let gz = Grid1D::inclusive(-z0, z0, grid.n)?;
                    let field = phase_profile(&psi, &gx, &gz, pipe.hbar)?;
                    (fisher_quadrature(&field)?, None)
                }
                "closed-form" => {
                    let b = boundary.unwrap_or(2.0 * x0);
                    (fisher_closed_form(&psi, b)?, None)
                }
                "cross-term" => (fisher_cross_term(&psi, wa, wb, 2048)?, None),
                "monte-carlo" => {
                    let z0 = 2.0 * x0 / pipe.hbar;
                    let gx = Grid1D::inclusive(-x0, x0, grid.n)?;
                    let gz = Grid1D::inclusive(-z0, z0, grid.n)?;
                    let field = phase_profile(&psi, &gx, &gz, pipe.hbar)?;
                    let (est, se) = fisher_monte_carlo(&field, count, seed)?;
                    (est, Some(se))
                }
                other => return Err(format!("unknown fisher mode '{other}'").into()),
            };
            emit_report(
                &FisherReport {
                    schema_version: 1,
                    mode,
                    value,
                    std_error,
                },
                out.as_deref(),
            )
        }

        Command::FisherCheck {
            state,
            grid,
            x0,
            tol,
            out,
        } => {
            let spec = load_state(&state)?;
            let pipe = pipeline(&grid)?;
            let psi = evaluator(&spec, &pipe.x)?;
            let x0 = match x0 {
                Some(v) => v,
                None => {
                    let sampled = match &spec {
                        StateSpec::BoxMode { halfwidth, .. } => {
                            let g = Grid1D::symmetric(0.0, 2.0 * halfwidth / 256.0, 256)?;
                            sample_position(&spec, &g)?
                        }
                        _ => sample_position(&spec, &pipe.x)?,
                    };
                    0.45 * effective_extent(&sampled, 1e-6)
                }
            };
            let n = grid.n.min(128);
            let (verdict, result) = check_i_zero(&psi, x0, pipe.hbar, tol, n)?;
            #[derive(Serialize)]
            struct CheckReport {
                schema_version: u32,
                verdict: bool,
                tol: f64,
                #[serde(flatten)]
                result: wigner_lab::fisher::FisherResult,
            }
            emit_report(
                &CheckReport {
                    schema_version: 1,
                    verdict,
                    tol,
                    result,
                },
                out.as_deref(),
            )
        }

        Command::Roundtrip { state, grid, out } => {
            let spec = load_state(&state)?;
            let pipe = pipeline(&grid)?;
            let w = wigner_transform(&spec, &pipe.x, &pipe.pair)?;
            let psi = evaluator(&spec, &pipe.x)?;
            let z_state = hologram_from_state(&psi, &pipe.x, &pipe.pair)?;
            let from_state = reconstruct_pdf(&z_state, &pipe.pair)?;
            let z_pdf = hologram_from_pdf(w.base(), &pipe.pair)?;
            let from_pdf = reconstruct_pdf(&z_pdf, &pipe.pair)?;
            #[derive(Serialize)]
            struct RoundtripReport {
                schema_version: u32,
                state_path_sup_diff: f64,
                pdf_roundtrip_sup_diff: f64,
                state_path_ok: bool,
                pdf_roundtrip_ok: bool,
            }
            let d1 = sup_diff(from_state.values(), w.base().values());
            let d2 = sup_diff(from_pdf.values(), w.base().values());
            emit_report(
                &RoundtripReport {
                    schema_version: 1,
                    state_path_sup_diff: d1,
                    pdf_roundtrip_sup_diff: d2,
                    state_path_ok: d1 < 1e-7,
                    pdf_roundtrip_ok: d2 < 1e-9,
                },
                out.as_deref(),
            )
        }
    }
}
