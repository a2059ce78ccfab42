use std::fs;
use std::path::Path;
use std::time::Instant;

use ibp::dunkl::{
    gen_bessel_b, kernel_e_beta_limit, kernel_e_nu_limit, weyl_b_order, ModelParams, SeriesControl,
};
use ibp::orthopoly::{hermite_zeros, laguerre_zeros, sqrt_laguerre_zeros};
use ibp::sde::{run_ensemble, Model, ParticleConfig, SimulationConfig};
use ibp::stats::{
    exact_density_beta2, pooled_marginal, ChamberDensity, Histogram, MarginalOptions, SteadyKind,
};

use crate::io::{parse_grid, parse_list, read_pairs, write_table};
use crate::manifest::Manifest;
use crate::{
    CliError, CliResult, CompareArgs, DensityArgs, DensityKind, FamilyArg, KernelArgs, LimitArg,
    ModelArg, NormArg, ScaleArg, SimulateArgs, ZerosArgs,
};

fn value_name(v: impl clap::ValueEnum) -> String {
    v.to_possible_value()
        .expect("no skipped variants")
        .get_name()
        .to_string()
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| format!("{v:?}"))
        .collect::<Vec<_>>()
        .join(",")
}

fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(CliError::io(dir))
}

/// Resolves `--init` into explicit positions.
fn initial_positions(spec: Option<&str>, model: ModelArg, n: usize) -> CliResult<Vec<f64>> {
    let spec = spec.unwrap_or(match model {
        ModelArg::BesselB => "step:0.01",
        ModelArg::DysonA => "centered:0.01",
    });
    let spacing = |s: &str| {
        s.parse::<f64>()
            .map_err(|_| CliError::Invalid(format!("bad spacing in --init {spec:?}")))
    };
    let positions = if let Some(s) = spec.strip_prefix("step:") {
        let s = spacing(s)?;
        (1..=n).map(|i| i as f64 * s).collect()
    } else if let Some(s) = spec.strip_prefix("centered:") {
        let s = spacing(s)?;
        let mid = (n as f64 + 1.0) / 2.0;
        (1..=n).map(|i| (i as f64 - mid) * s).collect()
    } else {
        parse_list(spec)?
    };
    if positions.len() != n {
        return Err(CliError::Invalid(format!(
            "--init gives {} positions but --n is {n}",
            positions.len()
        )));
    }
    Ok(positions)
}

pub fn simulate(a: &SimulateArgs) -> CliResult<()> {
    let started = Instant::now();
    let model = match a.model {
        ModelArg::BesselB => Model::BesselB,
        ModelArg::DysonA => Model::DysonA,
    };
    let params = ModelParams::new(a.beta, a.nu, a.n)?;
    let positions = initial_positions(a.init.as_deref(), a.model, a.n)?;
    let config = SimulationConfig {
        model,
        params,
        dt: a.dt,
        t_final: a.t,
        n_paths: a.paths,
        seed: a.seed,
        initial: ParticleConfig::new(positions.clone(), model)?,
    };
    config.validate()?;
    let scale = a.scale.factor(a.beta, a.nu, a.t);
    let result = run_ensemble(&config)?;
    let hist = Histogram::from_ensemble(&result, a.bin_width, scale)?;

    ensure_dir(&a.out)?;
    let hist_path = a.out.join("hist.csv");
    let mut w = crate::io::create(&hist_path)?;
    hist.write_csv(&mut w)
        .and_then(|_| std::io::Write::flush(&mut w))
        .map_err(CliError::io(&hist_path))?;
    let header: Vec<String> = (1..=a.n).map(|i| format!("x{i}")).collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    write_table(
        &a.out.join("finals.csv"),
        &header,
        result.rows().map(<[f64]>::to_vec),
    )?;

    let mut m = Manifest::new("simulate");
    m.set("model", value_name(a.model));
    m.set("n", a.n);
    m.set_real("beta", a.beta);
    m.set_real("nu", a.nu);
    m.set_real("dt", a.dt);
    m.set_real("t", a.t);
    m.set("paths", a.paths);
    m.set("seed", a.seed);
    m.set("init", join(&positions));
    m.set("scale", value_name(a.scale));
    m.set_real("bin_width", a.bin_width);
    m.set("out", a.out.display());
    m.set("result.completed_paths", result.n_completed());
    m.set("result.stuck_paths", result.stuck_paths.len());
    m.set("result.rejected_steps", result.rejected_steps);
    m.set("result.total_steps", result.total_steps);
    m.set_real("result.scale_applied", scale);
    m.set_wall_time(started.elapsed());
    m.write(&a.out.join("manifest.txt"))?;

    println!(
        "{} paths completed, {} stuck, rejection fraction {:.3e}",
        result.n_completed(),
        result.stuck_paths.len(),
        result.rejection_fraction()
    );
    if result.rejection_flagged() {
        eprintln!("WARN rejection fraction above 1%: consider a smaller --dt");
    }
    Ok(())
}

pub fn zeros(a: &ZerosArgs) -> CliResult<()> {
    let set = match a.family {
        FamilyArg::Laguerre => laguerre_zeros(a.n, a.alpha)?,
        FamilyArg::SqrtLaguerre => sqrt_laguerre_zeros(a.n, a.alpha)?,
        FamilyArg::Hermite => hermite_zeros(a.n)?,
    };
    for v in &set.values {
        println!("{v:.16e}");
    }
    Ok(())
}

/// Native length unit of each density kind, in units of y.
fn native_unit(kind: DensityKind, beta: f64, nu: f64, t: f64) -> f64 {
    match kind {
        DensityKind::ExactBeta2 | DensityKind::LaguerreEnsemble => 1.0,
        DensityKind::SteadyBeta => (beta * t).sqrt(),
        DensityKind::SteadyNu => (nu * t).sqrt(),
    }
}

pub fn density(a: &DensityArgs) -> CliResult<()> {
    let started = Instant::now();
    let grid = parse_grid(&a.grid)?;
    if !(a.t > 0.0) {
        return Err(CliError::Invalid(format!(
            "--t must be positive, got {}",
            a.t
        )));
    }
    let scale = a.scale.unwrap_or(match a.kind {
        DensityKind::LaguerreEnsemble => ScaleArg::None,
        DensityKind::ExactBeta2 | DensityKind::SteadyBeta => ScaleArg::SqrtBetaT,
        DensityKind::SteadyNu => ScaleArg::SqrtBetaNuT,
    });
    if a.kind == DensityKind::LaguerreEnsemble && scale != ScaleArg::None {
        return Err(CliError::Invalid(
            "the laguerre-ensemble density is tabulated in λ; use --scale none".into(),
        ));
    }
    if a.kind == DensityKind::ExactBeta2 && a.beta != 2.0 {
        return Err(CliError::Invalid(format!(
            "exact-beta2 needs --beta 2, got {}",
            a.beta
        )));
    }
    let params = ModelParams::new(a.beta, a.nu, a.n)?;
    // density of v = y/target from the density of w = y/native
    let ratio = scale.factor(a.beta, a.nu, a.t) / native_unit(a.kind, a.beta, a.nu, a.t);
    let centers = grid.centers();
    let values: Vec<f64> = match a.kind {
        DensityKind::ExactBeta2 => centers
            .iter()
            .map(|&v| Ok(ratio * exact_density_beta2(ratio * v, a.t, a.n, a.nu)? / a.n as f64))
            .collect::<CliResult<_>>()?,
        kind => {
            let steady = match kind {
                DensityKind::SteadyBeta => SteadyKind::Beta,
                DensityKind::SteadyNu => SteadyKind::Nu,
                _ => SteadyKind::LaguerreEnsemble,
            };
            let native =
                ibp::stats::UniformGrid::new(grid.lo * ratio, grid.hi * ratio, grid.count)?;
            let opts = MarginalOptions {
                seed: a.seed,
                samples: a.samples,
            };
            pooled_marginal(&ChamberDensity::new(steady, params), &native, &opts)?
                .into_iter()
                .map(|f| ratio * f)
                .collect()
        }
    };

    ensure_dir(&a.out)?;
    write_table(
        &a.out.join("density.csv"),
        &["y", "density"],
        centers.iter().zip(&values).map(|(c, f)| vec![*c, *f]),
    )?;
    let mut m = Manifest::new("density");
    m.set("kind", value_name(a.kind));
    m.set("n", a.n);
    m.set_real("beta", a.beta);
    m.set_real("nu", a.nu);
    m.set_real("t", a.t);
    m.set("grid", &a.grid);
    m.set("scale", value_name(scale));
    m.set("seed", a.seed);
    m.set("samples", a.samples);
    m.set("out", a.out.display());
    m.set_wall_time(started.elapsed());
    m.write(&a.out.join("manifest.txt"))?;
    Ok(())
}

/// Distance between a histogram and a tabulated density that shares its bin
/// centers. Density rows outside the histogram's range count against a zero
/// histogram.
pub fn compare(a: &CompareArgs) -> CliResult<bool> {
    let hist = read_pairs(&a.hist, "bin_center", "density")?;
    let dens = read_pairs(&a.density, "y", "density")?;
    let spacing = |rows: &[(f64, f64)]| (rows.len() > 1).then(|| rows[1].0 - rows[0].0);
    let width = spacing(&hist).or_else(|| spacing(&dens)).ok_or_else(|| {
        CliError::Invalid("cannot infer the bin width from single-row files".into())
    })?;
    let tol = 1e-6 * width;
    for rows in [&hist, &dens] {
        for (k, (c, _)) in rows.iter().enumerate() {
            if (c - (rows[0].0 + k as f64 * width)).abs() > tol {
                return Err(CliError::Invalid(format!(
                    "bin centers are not evenly spaced by {width}"
                )));
            }
        }
    }
    let offset = (hist[0].0 - dens[0].0) / width;
    if (offset - offset.round()).abs() * width > tol {
        return Err(CliError::Invalid(format!(
            "histogram centers are not on the density grid (offset {:.3e} bins)",
            offset - offset.round()
        )));
    }
    let offset = offset.round() as i64;
    let first = offset.min(0);
    let last = (offset + hist.len() as i64).max(dens.len() as i64);
    let lookup = |rows: &[(f64, f64)], k: i64| {
        usize::try_from(k)
            .ok()
            .and_then(|k| rows.get(k))
            .map_or(0.0, |r| r.1)
    };
    let diffs = (first..last).map(|k| (lookup(&hist, k - offset) - lookup(&dens, k)).abs());
    let distance = match a.norm {
        NormArg::L1 => diffs.sum::<f64>() * width,
        NormArg::Sup => diffs.fold(0.0, f64::max),
    };
    println!("norm = {}", value_name(a.norm));
    println!("distance = {distance:.16e}");
    Ok(match a.tol {
        Some(tol) => {
            let pass = distance <= tol;
            println!("tol = {tol:?}");
            println!("{}", if pass { "PASS" } else { "FAIL" });
            pass
        }
        None => true,
    })
}

pub fn kernel(a: &KernelArgs) -> CliResult<()> {
    let x = parse_list(&a.x)?;
    let y = parse_list(&a.y)?;
    let n = a.n.unwrap_or(x.len());
    if x.len() != n || y.len() != n {
        return Err(CliError::Invalid(format!(
            "--x has {} and --y has {} coordinates, expected {n}",
            x.len(),
            y.len()
        )));
    }
    let params = ModelParams::new(a.beta, a.nu, n)?;
    let ctrl = SeriesControl::new(a.max_degree, SeriesControl::default().rel_term_tol)?;
    let warn = |converged: bool, what: &str| {
        if !converged {
            println!(
                "WARN {what} series not converged at degree {}",
                a.max_degree
            );
        }
    };
    let series = gen_bessel_b(&x, &y, &params, &ctrl)?;
    println!("value = {:.16e}", series.value);
    println!("last_term_ratio = {:.16e}", series.last_term_ratio);
    warn(series.converged, "kernel");
    if let Some(limit) = a.limit {
        let stretch = match limit {
            LimitArg::Beta => a.beta,
            LimitArg::Nu => a.nu,
        }
        .sqrt();
        let xs: Vec<f64> = x.iter().map(|v| stretch * v).collect();
        let scaled = gen_bessel_b(&xs, &y, &params, &ctrl)?;
        warn(scaled.converged, "scaled kernel");
        let scaled = scaled.value / weyl_b_order(n);
        let limit_value = match limit {
            LimitArg::Beta => kernel_e_beta_limit(&x, &y, &params)?,
            LimitArg::Nu => {
                let l = kernel_e_nu_limit(&x, &y, a.beta, &ctrl)?;
                warn(l.converged, "limit");
                l.value
            }
        };
        println!("scaled_value = {scaled:.16e}");
        println!("limit_value = {limit_value:.16e}");
        println!(
            "relative_gap = {:.16e}",
            ((scaled - limit_value) / limit_value).abs()
        );
    }
    Ok(())
}
