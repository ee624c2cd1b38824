//! The six stages: scattering, coefficients, limit, verify, sweep and report.

use std::path::{Path, PathBuf};

use bogoliubov_core::coefficients::{shell_spread, ModeCoefficients};
use bogoliubov_core::lattice::{ModeSet, Momentum};
use bogoliubov_core::limitlaw::{
    covariance, excited_char_fn, excited_density_closed_form, expectation_of_products, gaussian_density,
    gaussian_density_1d, interval_probability, invert_char_fn, kolmogorov_distance, limit_char_fn, CovMatrix,
    Density1D, SGrid, TestFunction, UniformGrid,
};
use bogoliubov_core::observables::{dressed_vector, NuVector, ObservableSpec};
use bogoliubov_core::quadrature::simpson;
use bogoliubov_core::scattering::{cache, scattering_length, solve_neumann, RadialGrid, ScatteringSolution};
use bogoliubov_core::Complex64;
use bogoliubov_fock::checks::Status;
use bogoliubov_fock::run_suite;
use rayon::prelude::*;
use serde_json::json;

use crate::bundle::{Cell, Check, Provenance, ReportBundle, Table};
use crate::config::RunConfig;
use crate::error::CliError;

/// Environment variable naming the scattering-solution cache directory.
pub const CACHE_ENV: &str = "BOGOLIUBOV_CACHE_DIR";

/// Stages in pipeline order.
pub const STAGES: [&str; 5] = ["scattering", "coefficients", "limit", "verify", "sweep"];

const CLAIM_A0: &str = "a0 = lim_{r->inf} (r - u(r)/u'(r)) for -u'' + (1/2) V u = 0";
const CLAIM_NEUMANN: &str = "-Laplace f + (1/2) V f = lambda f on |x| <= N ell, d_r f = 0 at N ell, f(N ell) = 1";
const CLAIM_VF_RATE: &str = "|int V f_ell - 8 pi a0| <= C / N";
const CLAIM_ETA: &str = "eta_p = -N^{-2} w_hat(p/N), |eta_p| <= C |p|^{-2}";
const CLAIM_TAU: &str = "tanh(2 tau_p) = -G_p / F_p, |tau_p| <= C |p|^{-4}";
const CLAIM_MU: &str = "mu_p = (1/4) log(p^2 / (p^2 + 16 pi a0))";
const CLAIM_CLOSED: &str = "eta_p + tau_p = (1/4) log(p^2 / (p^2 + 2 (V f_ell)^(p/N)))";
const CLAIM_GAP_RATE: &str = "max_p |eta_p + tau_p - mu_p| <= C / N";
const CLAIM_NU: &str = "nu(p) = f_hat(p) cosh(mu_p) + conj(f_hat(-p)) sinh(mu_p), Sigma_ij = <nu_i, nu_j>";
const CLAIM_CF: &str = "phi(s) = exp(-(1/2) sum_ij s_i s_j Sigma_ij)";
const CLAIM_INVERSION: &str = "rho(lambda) = (2 pi)^{-1} int phi(s) exp(-i s lambda) ds";
const CLAIM_EXCITED: &str = "phi_p(s) = phi(s) (1 - |sum_j s_j nu_j(p)|^2)";
const CLAIM_EXCITED_DENSITY: &str = "rho_p(lambda) = rho(lambda) [1 + |nu(p)|^2 (lambda^2 - sigma^2) / sigma^4]";
const CLAIM_BUDGET: &str =
    "nominal rates: N^{-1/4} for the norm approximation, N^{-1/8} for the Kolmogorov distance";

/// Where scattering solutions are cached, if anywhere.
#[derive(Clone, Debug, Default)]
pub struct Context {
    pub cache_dir: Option<PathBuf>,
}

impl Context {
    pub fn from_env() -> Self {
        Self {
            cache_dir: std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()).map(PathBuf::from),
        }
    }
}

fn solve(cfg: &RunConfig, ctx: &Context, particles: u64) -> Result<ScatteringSolution, CliError> {
    let v = cfg.potential.build()?;
    let grid: RadialGrid = cfg.grid.into();
    let sol = match &ctx.cache_dir {
        Some(dir) => cache::load_or_solve(dir, &v, particles, cfg.ell, &grid)?,
        None => solve_neumann(&v, particles, cfg.ell, &grid)?,
    };
    Ok(sol)
}

fn solve_all(cfg: &RunConfig, ctx: &Context, particles: &[u64]) -> Result<Vec<ScatteringSolution>, CliError> {
    particles.par_iter().map(|&n| solve(cfg, ctx, n)).collect()
}

fn start(cfg: &RunConfig, stage: &str) -> Result<ReportBundle, CliError> {
    cfg.validate()?;
    Ok(ReportBundle::new(Provenance::new(stage, &cfg.hash(), cfg.verify.seed)))
}

fn out_dir(cfg: &RunConfig) -> &Path {
    &cfg.output.dir
}

/// Least-squares slope of `log y` against `log x`; NaN when any value is not positive.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    if xs.len() != ys.len() || xs.len() < 2 || xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return f64::NAN;
    }
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    num / den
}

/// Zero-energy scattering length and the Neumann solutions for every configured `N`.
pub fn run_scattering(cfg: &RunConfig, ctx: &Context) -> Result<ReportBundle, CliError> {
    let mut bundle = start(cfg, "scattering")?;
    let out = out_dir(cfg);
    let v = cfg.potential.build()?;
    let a0 = scattering_length(&v, 2.0 * v.support_radius().max(0.5), &cfg.grid.into())?;
    let sols = solve_all(cfg, ctx, &cfg.particles)?;

    let mut table = Table::new(
        "summary",
        "Neumann ground states, one row per particle number",
        &["particles", "ell", "domain_radius", "eigenvalue", "a0", "integral_vf", "vf_deviation"],
    )
    .claim(CLAIM_A0)
    .claim(CLAIM_NEUMANN)
    .claim(CLAIM_VF_RATE);
    let mut rows = Vec::new();
    for sol in &sols {
        table.push(vec![
            sol.particles.into(),
            sol.ell.into(),
            sol.domain_radius.into(),
            sol.eigenvalue.into(),
            sol.a0.into(),
            sol.integral_vf.into(),
            sol.vf_deviation().into(),
        ]);
        rows.push(json!({
            "particles": sol.particles,
            "eigenvalue": sol.eigenvalue,
            "integral_vf": sol.integral_vf,
            "vf_deviation": sol.vf_deviation(),
        }));
    }
    bundle.write_table(out, cfg.output.format, &table)?;

    for sol in &sols {
        let mut profile = Table::new(
            &format!("profile_N{}", sol.particles),
            &format!("radial profile f_ell(r) for N = {}, at most 513 points per region", sol.particles),
            &["r", "f"],
        )
        .claim(CLAIM_NEUMANN);
        let inner: Vec<(f64, f64)> = sol.inner_radii().zip(sol.inner_f.iter().copied()).collect();
        let outer: Vec<(f64, f64)> = sol.outer_radii().zip(sol.outer_f.iter().copied()).skip(1).collect();
        for region in [inner, outer] {
            let step = (region.len() / 512).max(1);
            let last = region.len() - 1;
            for (i, (r, f)) in region.into_iter().enumerate() {
                if i % step == 0 || i == last {
                    profile.push(vec![r.into(), f.into()]);
                }
            }
        }
        bundle.write_table(out, cfg.output.format, &profile)?;
    }

    bundle.summary = json!({ "a0": a0, "solutions": rows });
    bundle.finish(out)?;
    Ok(bundle)
}

fn coefficients_for(
    cfg: &RunConfig,
    ctx: &Context,
    particles: u64,
    cutoff: u32,
) -> Result<(ScatteringSolution, ModeSet, ModeCoefficients), CliError> {
    let sol = solve(cfg, ctx, particles)?;
    let modes = ModeSet::build(cutoff, particles);
    let coeffs = ModeCoefficients::compute(&sol, &modes)?;
    Ok((sol, modes, coeffs))
}

/// Per-mode coefficient tables and their dyadic-shell decay for every configured `N`.
pub fn run_coefficients(cfg: &RunConfig, ctx: &Context) -> Result<ReportBundle, CliError> {
    let mut bundle = start(cfg, "coefficients")?;
    let out = out_dir(cfg);
    let mut summary = Vec::new();
    let mut shells = Table::new(
        "shells",
        "dyadic shell maxima |p| in [2^j, 2^{j+1})",
        &["particles", "j", "modes", "eta_p2_max", "tau_p4_max"],
    )
    .claim(CLAIM_ETA)
    .claim(CLAIM_TAU);
    for &n in &cfg.particles {
        let (_, modes, coeffs) = coefficients_for(cfg, ctx, n, cfg.cutoff)?;
        let mut table = Table::new(
            &format!("coefficients_N{n}"),
            &format!("Bogoliubov coefficients for N = {n}, cutoff {}", cfg.cutoff),
            &["n1", "n2", "n3", "p_abs", "eta", "sinh_eta", "cosh_eta", "F", "G", "tau", "mu", "eta_plus_tau_closed"],
        )
        .claim(CLAIM_ETA)
        .claim(CLAIM_TAU)
        .claim(CLAIM_MU)
        .claim(CLAIM_CLOSED);
        for r in coeffs.rows() {
            table.push(vec![
                r.n[0].into(),
                r.n[1].into(),
                r.n[2].into(),
                r.p_abs.into(),
                r.eta.into(),
                r.sigma.into(),
                r.gamma.into(),
                r.f.into(),
                r.g.into(),
                r.tau.into(),
                r.mu.into(),
                r.eta_plus_tau_closed.into(),
            ]);
        }
        bundle.write_table(out, cfg.output.format, &table)?;

        let eta_stats = coeffs.shell_max(&modes, |r| r.eta.abs() * r.p_abs.powi(2));
        let tau_stats = coeffs.shell_max(&modes, |r| r.tau.abs() * r.p_abs.powi(4));
        for (e, t) in eta_stats.iter().zip(&tau_stats) {
            shells.push(vec![n.into(), e.j.into(), e.modes.into(), e.max.into(), t.max.into()]);
        }
        let closed_gap = coeffs.max_closed_form_gap();
        bundle.check(Check::at_most(
            &format!("closed_form_consistency_N{n}"),
            CLAIM_CLOSED,
            closed_gap,
            cfg.sweep.closed_form_tolerance,
        ));
        summary.push(json!({
            "particles": n,
            "modes": modes.len(),
            "max_eta_tau_mu_gap": coeffs.max_eta_tau_mu_gap(),
            "max_closed_form_gap": closed_gap,
            "eta_shell_spread": shell_spread(&eta_stats),
            "tau_shell_spread": shell_spread(&tau_stats),
        }));
    }
    bundle.write_table(out, cfg.output.format, &shells)?;
    bundle.summary = json!({ "cutoff": cfg.cutoff, "per_particle_number": summary });
    bundle.finish(out)?;
    Ok(bundle)
}

/// The selected observables with their configured names.
fn selected_observables(cfg: &RunConfig) -> Result<Vec<(String, ObservableSpec)>, CliError> {
    if cfg.observables.is_empty() {
        return Err(CliError::Config("observables: the limit stage needs at least one observable".into()));
    }
    let names: Vec<&str> = if cfg.limit.select.is_empty() {
        cfg.observables.iter().map(|o| o.name.as_str()).collect()
    } else {
        cfg.limit.select.iter().map(String::as_str).collect()
    };
    names
        .into_iter()
        .enumerate()
        .map(|(i, name)| {
            let (j, o) = cfg
                .observables
                .iter()
                .enumerate()
                .find(|(_, o)| o.name == name)
                .ok_or_else(|| CliError::Config(format!("limit.select[{i}]: unknown observable '{name}'")))?;
            Ok((name.to_string(), o.build(&format!("observables[{j}]"))?))
        })
        .collect()
}

/// `E g(X)` for `g(λ) = e^{-λ²/2}/√(2π)` computed from `ĝ` against `Σ` and
/// by quadrature against a density.
fn route_equivalence(sigma: &CovMatrix, density: &Density1D) -> Result<(f64, f64), CliError> {
    let ghat = TestFunction::Transform {
        ghat: Box::new(|s: f64| Complex64::new((-0.5 * s * s).exp() / (2.0 * std::f64::consts::PI), 0.0)),
        s_grid: SGrid {
            s_max: 12.0,
            intervals: 4800,
        },
    };
    let fourier = expectation_of_products(&[ghat], sigma)?.value.re;
    let g: Vec<f64> = density
        .grid
        .points()
        .iter()
        .zip(&density.values)
        .map(|(&x, &rho)| rho * (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt())
        .collect();
    let direct = simpson(&g, density.grid.step());
    Ok((fourier, direct))
}

/// Fourier data → `ν` → `Σ` → characteristic functions → densities, for every configured `N`.
pub fn run_limit(cfg: &RunConfig, ctx: &Context) -> Result<ReportBundle, CliError> {
    let mut bundle = start(cfg, "limit")?;
    let out = out_dir(cfg);
    let fmt = cfg.output.format;
    let observables = selected_observables(cfg)?;
    let k = observables.len();
    let names: Vec<&str> = observables.iter().map(|(n, _)| n.as_str()).collect();
    if cfg.limit.excited_mode.is_some() && k != 1 {
        return Err(CliError::Config("limit.excited_mode: only available for a single observable".into()));
    }
    let excited = match cfg.limit.excited_mode {
        Some(n) => Some(
            Momentum::new(n).ok_or_else(|| CliError::Config("limit.excited_mode: must be nonzero".into()))?,
        ),
        None => None,
    };
    let lam = cfg.limit.lambda;
    let lambda_grid = UniformGrid::new(lam.lo, lam.hi, lam.intervals)
        .map_err(|e| CliError::Config(format!("limit.lambda: {e}")))?;

    let mut budget = Table::new(
        "error_budget",
        "nominal convergence rates next to the computed discretization errors",
        &["particles", "nominal_norm_rate", "nominal_kolmogorov_rate", "eta_tau_mu_gap", "max_truncation_tail"],
    )
    .claim(CLAIM_BUDGET)
    .claim(CLAIM_GAP_RATE);
    let mut summary = Vec::new();

    for &n in &cfg.particles {
        let (_, modes, coeffs) = coefficients_for(cfg, ctx, n, cfg.cutoff)?;
        let mus = coeffs.mus();
        let nus: Vec<NuVector> = observables
            .iter()
            .map(|(_, spec)| dressed_vector(spec, modes.modes(), &mus))
            .collect::<Result<_, _>>()?;
        let tails: Vec<f64> = observables.iter().map(|(_, spec)| spec.truncation_tail(&modes)).collect();
        let sigma = covariance(&nus)?;

        let mut sigma_table = Table::new(
            &format!("sigma_N{n}"),
            &format!("limit covariance for N = {n}, observables {}", names.join(" ")),
            &["i", "j", "re", "im"],
        )
        .claim(CLAIM_NU);
        for i in 0..k {
            for j in 0..k {
                let c = sigma.get(i, j);
                sigma_table.push(vec![i.into(), j.into(), c.re.into(), c.im.into()]);
            }
        }
        bundle.write_table(out, fmt, &sigma_table)?;

        let mut entry = json!({
            "particles": n,
            "observables": names,
            "sigma": (0..k).map(|i| (0..k).map(|j| [sigma.get(i, j).re, sigma.get(i, j).im]).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "is_real": sigma.is_real(),
            "truncation_tail": tails,
        });

        if k == 1 {
            let var = sigma.get(0, 0).re;
            let cf = |s: f64| limit_char_fn(&sigma, &[s]);
            let sgrid = SGrid::auto(cf, cfg.limit.s_intervals)?;
            let inverted = invert_char_fn(cf, lambda_grid, sgrid)?;
            let gauss = gaussian_density_1d(&sigma, lambda_grid)?;
            let mut table = Table::new(
                &format!("density_N{n}"),
                &format!("limit density of {} for N = {n}", names[0]),
                &["lambda", "inverted", "inverted_imag", "gaussian"],
            )
            .claim(CLAIM_CF)
            .claim(CLAIM_INVERSION);
            for (i, x) in lambda_grid.points().into_iter().enumerate() {
                table.push(vec![x.into(), inverted.values[i].into(), inverted.imag[i].into(), gauss.values[i].into()]);
            }
            bundle.write_table(out, fmt, &table)?;

            let sup = inverted.sup_distance(&gauss)?;
            let sd = var.sqrt();
            let prob = interval_probability(&inverted, -1.96 * sd, 1.96 * sd)?;
            let (fourier, direct) = route_equivalence(&sigma, &inverted)?;
            bundle.check(Check::at_most(
                &format!("inversion_vs_gaussian_N{n}"),
                CLAIM_INVERSION,
                sup,
                1e-6,
            ));
            bundle.check(Check::within(
                &format!("interval_probability_N{n}"),
                "P(|X| <= 1.96 sigma) = 0.95",
                prob,
                0.95,
                5e-4,
            ));
            bundle.check(Check::at_most(
                &format!("expectation_routes_N{n}"),
                "int g_hat(s) phi(s) ds = int g(lambda) rho(lambda) d lambda",
                (fourier - direct).abs(),
                1e-8,
            ));
            entry["variance"] = json!(var);
            entry["s_max"] = json!(sgrid.s_max);
            entry["density_integral"] = json!(inverted.integral);
            entry["sup_inversion_gap"] = json!(sup);
            entry["kolmogorov_inversion_gap"] = json!(kolmogorov_distance(&inverted, &gauss)?);
            entry["interval_probability"] = json!(prob);

            if let Some(p) = excited {
                let nu_p = nus[0]
                    .get(p)
                    .ok_or_else(|| CliError::Config(format!("limit.excited_mode: {p} is outside the lattice cutoff")))?;
                let cf = |s: f64| excited_char_fn(&sigma, &nus, p, &[s]).expect("dimensions checked");
                let sgrid = SGrid::auto(cf, cfg.limit.s_intervals)?;
                let inverted = invert_char_fn(cf, lambda_grid, sgrid)?;
                let closed: Vec<f64> = lambda_grid
                    .points()
                    .iter()
                    .map(|&x| excited_density_closed_form(var, nu_p.norm_sqr(), x))
                    .collect();
                let closed = Density1D::from_values(lambda_grid, closed);
                let mut table = Table::new(
                    &format!("excited_density_N{n}"),
                    &format!("limit density of {} in the state a*_p Omega, p = 2 pi {p}, N = {n}", names[0]),
                    &["lambda", "inverted", "closed_form"],
                )
                .claim(CLAIM_EXCITED)
                .claim(CLAIM_EXCITED_DENSITY);
                for (i, x) in lambda_grid.points().into_iter().enumerate() {
                    table.push(vec![x.into(), inverted.values[i].into(), closed.values[i].into()]);
                }
                bundle.write_table(out, fmt, &table)?;
                bundle.check(Check::within(
                    &format!("excited_normalization_N{n}"),
                    "int rho_p = 1",
                    inverted.integral,
                    1.0,
                    1e-8,
                ));
                bundle.check(Check::at_most(
                    &format!("excited_closed_form_N{n}"),
                    CLAIM_EXCITED_DENSITY,
                    inverted.sup_distance(&closed)?,
                    1e-6,
                ));
                entry["excited_nu_p_sq"] = json!(nu_p.norm_sqr());
            }
        } else if k <= 3 {
            write_multivariate(&mut bundle, cfg, n, &sigma, k)?;
        }
        entry["det"] = json!(sigma.det());
        entry["condition_number"] = json!(sigma.condition_number());

        let nf = n as f64;
        let max_tail = tails.iter().copied().fold(0.0, f64::max);
        budget.push(vec![
            n.into(),
            nf.powf(-0.25).into(),
            nf.powf(-0.125).into(),
            coeffs.max_eta_tau_mu_gap().into(),
            max_tail.into(),
        ]);
        summary.push(entry);
    }
    bundle.write_table(out, fmt, &budget)?;
    bundle.summary = json!({ "k": k, "per_particle_number": summary });
    bundle.finish(out)?;
    Ok(bundle)
}

/// Characteristic-function samples and, for a real invertible `Σ`, the gridded density.
fn write_multivariate(
    bundle: &mut ReportBundle,
    cfg: &RunConfig,
    n: u64,
    sigma: &CovMatrix,
    k: usize,
) -> Result<(), CliError> {
    const CF_POINTS: usize = 17;
    let out = out_dir(cfg);
    let fmt = cfg.output.format;
    let axes: Vec<Vec<f64>> = (0..k)
        .map(|j| {
            let s_max = 4.0 / sigma.get(j, j).re.max(f64::MIN_POSITIVE).sqrt();
            (0..CF_POINTS)
                .map(|i| -s_max + 2.0 * s_max * i as f64 / (CF_POINTS - 1) as f64)
                .collect()
        })
        .collect();
    let mut columns: Vec<String> = (1..=k).map(|j| format!("s{j}")).collect();
    columns.extend(["re".to_string(), "im".to_string()]);
    let cols: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut cf_table = Table::new(
        &format!("char_fn_N{n}"),
        &format!("limit characteristic function for N = {n} on a product grid"),
        &cols,
    )
    .claim(CLAIM_CF);
    for s in product(&axes) {
        let c = limit_char_fn(sigma, &s);
        let mut row: Vec<Cell> = s.into_iter().map(Cell::from).collect();
        row.extend([Cell::from(c.re), Cell::from(c.im)]);
        cf_table.push(row);
    }
    bundle.write_table(out, fmt, &cf_table)?;

    if sigma.is_real() {
        let lam = cfg.limit.lambda;
        let m = cfg.limit.grid_intervals;
        let axis: Vec<f64> = (0..=m).map(|i| lam.lo + (lam.hi - lam.lo) * i as f64 / m as f64).collect();
        let points = product(&vec![axis; k]);
        let values = gaussian_density(sigma, &points)?;
        let mut columns: Vec<String> = (1..=k).map(|j| format!("lambda{j}")).collect();
        columns.push("density".into());
        let cols: Vec<&str> = columns.iter().map(String::as_str).collect();
        let mut table = Table::new(
            &format!("density_N{n}"),
            &format!("Gaussian limit density for N = {n} on a product grid"),
            &cols,
        )
        .claim(CLAIM_CF);
        for (x, v) in points.into_iter().zip(values) {
            let mut row: Vec<Cell> = x.into_iter().map(Cell::from).collect();
            row.push(v.into());
            table.push(row);
        }
        bundle.write_table(out, fmt, &table)?;
    }
    Ok(())
}

/// Cartesian product in row-major order, last axis fastest.
fn product(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    axes.iter().fold(vec![Vec::new()], |acc, axis| {
        acc.into_iter()
            .flat_map(|prefix| {
                axis.iter().map(move |&x| {
                    let mut p = prefix.clone();
                    p.push(x);
                    p
                })
            })
            .collect()
    })
}

/// Runs the Fock-space verification suite and records every identity and bound as a check.
pub fn run_verify(cfg: &RunConfig) -> Result<ReportBundle, CliError> {
    let mut bundle = start(cfg, "verify")?;
    let out = out_dir(cfg);
    let report = run_suite(&cfg.verify)?;
    for r in &report.identities {
        bundle.check(Check {
            name: r.name.clone(),
            claim: r.statement.clone(),
            value: r.deviation,
            threshold: format!("<= {:e}", r.tolerance),
            passed: r.status == Status::Pass,
        });
    }
    for b in &report.bounds {
        bundle.check(Check {
            name: b.name.clone(),
            claim: b.statement.clone(),
            value: b.drift,
            threshold: format!("drift < {}", b.max_drift),
            passed: b.status == Status::Pass,
        });
    }
    let claims = report
        .identities
        .iter()
        .map(|r| r.statement.clone())
        .chain(report.bounds.iter().map(|b| b.statement.clone()))
        .collect();
    bundle.write_json(out, "suite", "identity residuals and fitted bound constants", claims, &report)?;
    bundle.summary = json!({
        "seed": report.seed,
        "samples": report.samples,
        "identities": report.identities.len(),
        "bounds": report.bounds.len(),
    });
    bundle.finish(out)?;
    Ok(bundle)
}

/// Particle-number and shell sweeps with log-log slope fits.
pub fn run_sweep(cfg: &RunConfig, ctx: &Context) -> Result<ReportBundle, CliError> {
    let mut bundle = start(cfg, "sweep")?;
    let out = out_dir(cfg);
    let fmt = cfg.output.format;
    let sw = &cfg.sweep;

    let sols = solve_all(cfg, ctx, &sw.scattering_particles)?;
    let mut vf = Table::new(
        "vf_rate",
        &format!("int V f_ell - 8 pi a0 against N at ell = {}", cfg.ell),
        &["particles", "integral_vf", "a0", "abs_deviation"],
    )
    .claim(CLAIM_VF_RATE);
    for s in &sols {
        vf.push(vec![s.particles.into(), s.integral_vf.into(), s.a0.into(), s.vf_deviation().abs().into()]);
    }
    bundle.write_table(out, fmt, &vf)?;
    let xs: Vec<f64> = sw.scattering_particles.iter().map(|&n| n as f64).collect();
    let ys: Vec<f64> = sols.iter().map(|s| s.vf_deviation().abs()).collect();
    let vf_slope = loglog_slope(&xs, &ys);
    bundle.check(Check::within("vf_rate_slope", CLAIM_VF_RATE, vf_slope, -1.0, sw.vf_slope_tolerance));

    let gaps: Vec<(usize, f64, f64)> = sw
        .rate_particles
        .par_iter()
        .map(|&n| {
            let (_, modes, c) = coefficients_for(cfg, ctx, n, sw.rate_cutoff)?;
            Ok((modes.len(), c.max_eta_tau_mu_gap(), c.max_closed_form_gap()))
        })
        .collect::<Result<_, CliError>>()?;
    let mut rate = Table::new(
        "eta_tau_mu_rate",
        &format!("max_p |eta_p + tau_p - mu_p| against N at cutoff {}", sw.rate_cutoff),
        &["particles", "modes", "eta_tau_mu_gap", "closed_form_gap"],
    )
    .claim(CLAIM_GAP_RATE)
    .claim(CLAIM_CLOSED);
    for (&n, &(m, g, c)) in sw.rate_particles.iter().zip(&gaps) {
        rate.push(vec![n.into(), m.into(), g.into(), c.into()]);
    }
    bundle.write_table(out, fmt, &rate)?;
    let xs: Vec<f64> = sw.rate_particles.iter().map(|&n| n as f64).collect();
    let ys: Vec<f64> = gaps.iter().map(|g| g.1).collect();
    let gap_slope = loglog_slope(&xs, &ys);
    bundle.check(Check::within("eta_tau_mu_slope", CLAIM_GAP_RATE, gap_slope, -1.0, sw.rate_slope_tolerance));
    let closed = gaps.iter().map(|g| g.2).fold(0.0, f64::max);
    bundle.check(Check::at_most("closed_form_consistency", CLAIM_CLOSED, closed, sw.closed_form_tolerance));

    let (_, modes, coeffs) = coefficients_for(cfg, ctx, sw.shell_particles, sw.shell_cutoff)?;
    let eta_stats = coeffs.shell_max(&modes, |r| r.eta.abs() * r.p_abs.powi(2));
    let tau_stats = coeffs.shell_max(&modes, |r| r.tau.abs() * r.p_abs.powi(4));
    let mut shells = Table::new(
        "shells",
        &format!("dyadic shell maxima at N = {}, cutoff {}", sw.shell_particles, sw.shell_cutoff),
        &["j", "modes", "eta_p2_max", "tau_p4_max"],
    )
    .claim(CLAIM_ETA)
    .claim(CLAIM_TAU);
    for (e, t) in eta_stats.iter().zip(&tau_stats) {
        shells.push(vec![e.j.into(), e.modes.into(), e.max.into(), t.max.into()]);
    }
    bundle.write_table(out, fmt, &shells)?;
    let (eta_spread, tau_spread) = (shell_spread(&eta_stats), shell_spread(&tau_stats));
    bundle.check(Check::below("eta_shell_spread", CLAIM_ETA, eta_spread, sw.max_shell_spread));
    bundle.check(Check::below("tau_shell_spread", CLAIM_TAU, tau_spread, sw.max_shell_spread));

    bundle.summary = json!({
        "vf_rate_slope": vf_slope,
        "eta_tau_mu_slope": gap_slope,
        "max_closed_form_gap": closed,
        "eta_shell_spread": eta_spread,
        "tau_shell_spread": tau_spread,
        "shells": eta_stats.len(),
    });
    bundle.finish(out)?;
    Ok(bundle)
}

/// Collates the checks of every stage bundle found in the output directory.
pub fn run_report(cfg: &RunConfig) -> Result<ReportBundle, CliError> {
    let mut bundle = start(cfg, "report")?;
    let out = out_dir(cfg);
    let mut table = Table::new(
        "summary",
        "every check of every stage found in the output directory",
        &["stage", "check", "value", "threshold", "status", "config_hash"],
    );
    let mut stages = Vec::new();
    for stage in STAGES {
        let path = ReportBundle::bundle_path(out, stage);
        if !path.exists() {
            continue;
        }
        let b = ReportBundle::load(&path)?;
        for c in &b.checks {
            table.push(vec![
                stage.into(),
                c.name.as_str().into(),
                c.value.into(),
                c.threshold.as_str().into(),
                c.passed.into(),
                b.provenance.config_hash.as_str().into(),
            ]);
            bundle.check(Check {
                name: format!("{stage}/{}", c.name),
                ..c.clone()
            });
        }
        stages.push(json!({
            "stage": stage,
            "passed": b.passed,
            "checks": b.checks.len(),
            "config_hash": b.provenance.config_hash,
        }));
    }
    if stages.is_empty() {
        return Err(CliError::Config(format!(
            "output.dir: no stage results found in {}",
            out.display()
        )));
    }
    bundle.write_table(out, cfg.output.format, &table)?;
    bundle.summary = json!({ "stages": stages });
    bundle.finish(out)?;
    Ok(bundle)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let xs = [1.0, 2.0, 4.0, 8.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(-1.5)).collect();
        assert!((loglog_slope(&xs, &ys) + 1.5).abs() < 1e-12);
        assert!(loglog_slope(&xs, &[1.0, 0.0, 1.0, 1.0]).is_nan());
    }

    #[test]
    fn product_order() {
        let p = product(&[vec![0.0, 1.0], vec![2.0, 3.0]]);
        assert_eq!(p, vec![vec![0.0, 2.0], vec![0.0, 3.0], vec![1.0, 2.0], vec![1.0, 3.0]]);
    }
}
