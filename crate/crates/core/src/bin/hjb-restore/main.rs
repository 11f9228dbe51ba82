mod plot;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hjb_restore::config::RunConfig;
use hjb_restore::control::{write_control_csv, ControlLaw};
use hjb_restore::image_pipeline::{
    center_scale, load_image, restore, save_image, to_float, uncenter,
};
use hjb_restore::radial::{interp_clamped, solve_radial};
use hjb_restore::sde::{mc_value_estimate, simulate_exit, write_trajectory_csv};
use hjb_restore::tuning::{best_index, config_seed, grid_search, run_config, write_records_csv};
use hjb_restore::{fmt_f64, metrics, Convention, Error, RadialSolution, Result};

#[derive(Parser)]
#[command(
    name = "hjb-restore",
    version,
    about = "Radial HJB solver, exit-time diffusion simulation and controlled-diffusion image restoration",
    after_help = after_help()
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

fn after_help() -> String {
    format!(
        "Config files are flat `key = value` text. Keys and their defaults:\n\n{}\n\
         Exit codes: 0 ok, 2 config error, 3 solver error, 4 I/O error, 5 simulation diverged.",
        RunConfig::default().render()
    )
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// Config file (key = value per line); defaults apply to missing keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one config key, e.g. --set sigma=0.5 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Sign convention of the radial ODE [default: code, or the config value].
    #[arg(long, value_parser = ["code", "derived"])]
    convention: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the radial ODE and write `r,u,du,v,p_unit,rate_magnitude`.
    Solve {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, default_value = "solution.csv")]
        out: PathBuf,
        /// Directory for line-chart PNGs of u, u' and the restoration rates.
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Simulate one controlled path and write `t,y1,...,yN`.
    Simulate {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, default_value = "trajectory.csv")]
        out: PathBuf,
        /// Noise seed [default: config `seed`, 0].
        #[arg(long)]
        seed: Option<u64>,
        /// Initial state, comma separated [default: config `y0`, all ones].
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        y0: Option<Vec<f64>>,
        /// PNG line chart of the components against time.
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Monte Carlo estimate of the cost to exit, compared with u(|y0|) - g.
    ///
    /// Prints `mean_cost,std_error,n_paths,n_exited,u_at_y0_minus_g`.
    #[command(name = "mc-validate")]
    McValidate {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Number of paths [default: config `paths`, 10000].
        #[arg(long)]
        paths: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        y0: Option<Vec<f64>>,
        /// Also write the report (with header) to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Restore an image with config keys restore_sigma, restore_T, restore_dt.
    Restore {
        #[arg(long)]
        image: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        seed: Option<u64>,
        /// Reference image; when given, metrics against it are printed.
        #[arg(long = "ref")]
        reference: Option<PathBuf>,
    },
    /// Grid search over sigma_values x T_values x dt_values, best by PSNR.
    Tune {
        #[arg(long)]
        image: PathBuf,
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, default_value = "results.csv")]
        out: PathBuf,
        #[arg(long, default_value = "best.png")]
        best_out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Reference image for the metrics [default: the input image].
        #[arg(long = "ref")]
        reference: Option<PathBuf>,
    },
    /// Print MSE, PSNR and SSIM between two images.
    Metrics {
        #[arg(long = "ref")]
        reference: PathBuf,
        #[arg(long)]
        test: PathBuf,
    },
}

impl Command {
    fn stage(&self) -> &'static str {
        match self {
            Command::Solve { .. } => "solve",
            Command::Simulate { .. } => "simulate",
            Command::McValidate { .. } => "mc-validate",
            Command::Restore { .. } => "restore",
            Command::Tune { .. } => "tune",
            Command::Metrics { .. } => "metrics",
        }
    }
}

fn load_config(args: &ConfigArgs) -> Result<RunConfig> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    for kv in &args.overrides {
        cfg.apply_override(kv)?;
    }
    if let Some(c) = &args.convention {
        cfg.params.convention = c.parse()?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn solve(cfg: &RunConfig) -> Result<RadialSolution> {
    solve_radial(&cfg.params, &cfg.state_cost()?)
}

fn cmd_solve(cfg: &RunConfig, out: &Path, plot_dir: Option<&Path>) -> Result<()> {
    let sol = solve(cfg)?;
    println!(
        "Computed boundary condition g (from integral): {}",
        sol.g_integral
    );
    println!(
        "Computed boundary condition g (from ODE solution): {}",
        sol.g_at_r_end
    );
    let law = ControlLaw::new(&sol, cfg.params.alpha)?;
    write_control_csv(&law, out)?;
    if let Some(dir) = plot_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io {
            path: dir.into(),
            source: e,
        })?;
        let p_unit = sol
            .r
            .iter()
            .map(|&r| law.p_unit(r))
            .collect::<Result<Vec<_>>>()?;
        let magnitude = sol
            .r
            .iter()
            .map(|&r| law.rate_magnitude(r))
            .collect::<Result<Vec<_>>>()?;
        plot::render(
            &plot::Chart {
                title: "Shooting Method: u(r) and u'(r)",
                x_label: "r (Image State Norm)",
                y_label: "u(r) and u'(r)",
                series: vec![
                    plot::Series {
                        label: "Value Function u(r)".into(),
                        x: &sol.r,
                        y: &sol.u,
                    },
                    plot::Series {
                        label: "Derivative u'(r)".into(),
                        x: &sol.r,
                        y: &sol.du,
                    },
                ],
                hline: Some((
                    sol.g_at_r_end,
                    format!("Boundary: u(R) = {:.4}", sol.g_at_r_end),
                )),
            },
            &dir.join("value_function.png"),
        )?;
        plot::render(
            &plot::Chart {
                title: "Net Restoration Rate per Unit Deviation vs. r",
                x_label: "r (Image State Norm)",
                y_label: "Rate",
                series: vec![plot::Series {
                    label: "Net Restoration Rate per Unit Deviation".into(),
                    x: &sol.r,
                    y: &p_unit,
                }],
                hline: None,
            },
            &dir.join("rate_per_unit.png"),
        )?;
        plot::render(
            &plot::Chart {
                title: "Magnitude of the Net Restoration Rate vs. r",
                x_label: "r (Image State Norm)",
                y_label: "Magnitude",
                series: vec![plot::Series {
                    label: "Magnitude of Net Restoration Rate".into(),
                    x: &sol.r,
                    y: &magnitude,
                }],
                hline: None,
            },
            &dir.join("rate_magnitude.png"),
        )?;
    }
    Ok(())
}

fn initial_state(cfg: &RunConfig, y0: Option<Vec<f64>>) -> Result<Vec<f64>> {
    let y0 = y0.unwrap_or_else(|| cfg.initial_state());
    if y0.len() != cfg.params.n_dim {
        return Err(Error::Config(format!(
            "y0 has {} components but n_dim = {}",
            y0.len(),
            cfg.params.n_dim
        )));
    }
    Ok(y0)
}

fn cmd_simulate(
    cfg: &RunConfig,
    out: &Path,
    seed: u64,
    y0: Option<Vec<f64>>,
    plot_path: Option<&Path>,
) -> Result<()> {
    let y0 = initial_state(cfg, y0)?;
    let sol = solve(cfg)?;
    let traj = simulate_exit(&y0, &cfg.params, &sol, &cfg.state_cost()?, seed)?;
    write_trajectory_csv(&traj, out)?;
    match traj.exit_time {
        Some(t) => println!("exited at t = {t} after {} steps", traj.times.len() - 1),
        None => println!("did not exit within T = {}", cfg.params.t_total),
    }
    println!("running cost = {}", traj.running_cost);
    if let Some(path) = plot_path {
        let columns: Vec<Vec<f64>> = (0..y0.len().min(6))
            .map(|i| traj.states.iter().map(|s| s[i]).collect())
            .collect();
        let series = columns
            .iter()
            .enumerate()
            .map(|(i, y)| plot::Series {
                label: format!("Component {}", i + 1),
                x: &traj.times,
                y,
            })
            .collect();
        plot::render(
            &plot::Chart {
                title: "Image Dynamics Trajectories (Euler-Maruyama Simulation)",
                x_label: "Time",
                y_label: "Image State Deviation",
                series,
                hline: None,
            },
            path,
        )?;
    }
    Ok(())
}

fn cmd_mc_validate(
    cfg: &RunConfig,
    paths: usize,
    seed: u64,
    y0: Option<Vec<f64>>,
    out: Option<&Path>,
) -> Result<()> {
    let y0 = initial_state(cfg, y0)?;
    if cfg.params.convention == Convention::Derived {
        eprintln!(
            "note: the identity E[cost] = u(|y0|) - g holds for the code convention; \
             the derived convention is reported for comparison only"
        );
    }
    let sol = solve(cfg)?;
    let est = mc_value_estimate(&y0, &cfg.params, &sol, &cfg.state_cost()?, paths, seed)?;
    let r = y0.iter().map(|v| v * v).sum::<f64>().sqrt();
    let target = interp_clamped(&sol.r, &sol.u, r) - sol.g_at_r_end;
    let line = format!(
        "{},{},{},{},{}",
        fmt_f64(est.mean_cost),
        fmt_f64(est.std_error),
        est.n_paths,
        est.n_exited,
        fmt_f64(target)
    );
    println!("{line}");
    if let Some(path) = out {
        std::fs::write(
            path,
            format!("mean_cost,std_error,n_paths,n_exited,u_at_y0_minus_g\n{line}\n"),
        )
        .map_err(|e| Error::Io {
            path: path.into(),
            source: e,
        })?;
    }
    Ok(())
}

fn cmd_restore(
    cfg: &RunConfig,
    image: &Path,
    out: &Path,
    seed: u64,
    reference: Option<&Path>,
) -> Result<()> {
    let img = to_float(&load_image(image)?);
    let sol = solve(cfg)?;
    let state = center_scale(&img, cfg.params.big_r);
    let restored = restore(
        &state,
        &sol,
        cfg.params.alpha,
        cfg.restore_sigma,
        cfg.restore_dt,
        cfg.restore_t,
        seed,
    )?;
    let result = uncenter(&restored);
    save_image(&result, out)?;
    if let Some(path) = reference {
        let reference = to_float(&load_image(path)?);
        println!("{}", metrics::evaluate(&result, &reference)?);
    }
    Ok(())
}

fn cmd_tune(
    cfg: &RunConfig,
    image: &Path,
    out: &Path,
    best_out: &Path,
    seed: u64,
    reference: Option<&Path>,
) -> Result<()> {
    let img = to_float(&load_image(image)?);
    let reference = match reference {
        Some(p) => to_float(&load_image(p)?),
        None => img.clone(),
    };
    let sol = solve(cfg)?;
    let state = center_scale(&img, cfg.params.big_r);
    let alpha = cfg.params.alpha;
    let records = grid_search(
        &state,
        &sol,
        alpha,
        &cfg.sigma_values,
        &cfg.t_values,
        &cfg.dt_values,
        &reference,
        seed,
    )?;
    println!("Parameter Tuning Results:");
    for r in &records {
        println!(
            "Config: sigma = {}, T = {}, dt = {}",
            r.sigma, r.t_total, r.dt
        );
        println!(
            "   MSE: {:.4}, PSNR: {:.4} dB, SSIM: {:.4}",
            r.mse, r.psnr_db, r.ssim
        );
    }
    write_records_csv(&records, out)?;
    let k = best_index(&records)?;
    let best = records[k];
    println!(
        "Best configuration based on PSNR: sigma = {}, T = {}, dt = {}, MSE = {:.4}, PSNR = {:.4}, SSIM = {:.4}",
        best.sigma, best.t_total, best.dt, best.mse, best.psnr_db, best.ssim
    );
    let (_, best_img) = run_config(
        &state,
        &sol,
        alpha,
        best.sigma,
        best.t_total,
        best.dt,
        &reference,
        config_seed(seed, k),
    )?;
    save_image(&best_img, best_out)
}

fn cmd_metrics(reference: &Path, test: &Path) -> Result<()> {
    let a = to_float(&load_image(reference)?);
    let b = to_float(&load_image(test)?);
    println!("{}", metrics::evaluate(&b, &a)?);
    Ok(())
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Solve { cfg, out, plot } => cmd_solve(&load_config(&cfg)?, &out, plot.as_deref()),
        Command::Simulate {
            cfg,
            out,
            seed,
            y0,
            plot,
        } => {
            let cfg = load_config(&cfg)?;
            cmd_simulate(&cfg, &out, seed.unwrap_or(cfg.seed), y0, plot.as_deref())
        }
        Command::McValidate {
            cfg,
            paths,
            seed,
            y0,
            out,
        } => {
            let cfg = load_config(&cfg)?;
            let paths = paths.unwrap_or(cfg.paths);
            if paths == 0 {
                return Err(Error::Config("--paths must be at least 1".into()));
            }
            cmd_mc_validate(&cfg, paths, seed.unwrap_or(cfg.seed), y0, out.as_deref())
        }
        Command::Restore {
            image,
            out,
            cfg,
            seed,
            reference,
        } => {
            let cfg = load_config(&cfg)?;
            cmd_restore(
                &cfg,
                &image,
                &out,
                seed.unwrap_or(cfg.seed),
                reference.as_deref(),
            )
        }
        Command::Tune {
            image,
            cfg,
            out,
            best_out,
            seed,
            reference,
        } => {
            let cfg = load_config(&cfg)?;
            cmd_tune(
                &cfg,
                &image,
                &out,
                &best_out,
                seed.unwrap_or(cfg.seed),
                reference.as_deref(),
            )
        }
        Command::Metrics { reference, test } => cmd_metrics(&reference, &test),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stage = cli.command.stage();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hjb-restore {stage}: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
