//! One pass/fail line per acceptance criterion; exits nonzero if any fails.

use std::path::Path;
use std::time::Instant;

use bogoliubov_cli::pipeline::loglog_slope;
use bogoliubov_cli::{run_limit, run_verify, Context, RunConfig};
use bogoliubov_core::coefficients::{shell_spread, ModeCoefficients};
use bogoliubov_core::lattice::{ModeSet, Momentum};
use bogoliubov_core::limitlaw::{
    covariance, excited_char_fn, excited_density_closed_form, invert_char_fn, Density1D, SGrid, UniformGrid,
};
use bogoliubov_core::observables::NuVector;
use bogoliubov_core::scattering::{scattering_length, solve_neumann, RadialGrid, RadialPotential};
use bogoliubov_fock::checks::{
    check_ccr, check_excited_cf, check_vacuum_cf, check_weyl_relation, s_samples, triad, ExcitedForm, Status,
};
use bogoliubov_fock::FockBasis;
use num_complex::Complex64;

const ELL: f64 = 0.49;
const A0_TOL: f64 = 1e-8;
const A0_SECONDS: f64 = 1.0;
const VF_NS: [u64; 4] = [100, 1_000, 10_000, 100_000];
const VF_SLOPE_TOL: f64 = 0.15;
const VF_SECONDS: f64 = 30.0;
const SHELL_N: u64 = 1000;
const SHELL_CUTOFF: u32 = 8;
const SHELL_SPREAD: f64 = 3.0;
const RATE_NS: [u64; 4] = [500, 1000, 2000, 4000];
const RATE_CUTOFF: u32 = 4;
const RATE_SLOPE_TOL: f64 = 0.2;
const CLOSED_FORM_TOL: f64 = 1e-6;
const CF_N_MAX: usize = 20;
const CF_PARTICLES: u64 = 40;
const CF_TOL: f64 = 1e-6;
const CF_SECONDS: f64 = 60.0;
const DENSITY_INTEGRAL_TOL: f64 = 1e-8;
const DENSITY_SUP_TOL: f64 = 1e-6;
const CCR_TOL: f64 = 1e-12;
const WEYL_TOL: f64 = 1e-8;
const SWEEP: [u64; 4] = [10, 20, 40, 80];
const MAX_DRIFT: f64 = 2.0;
const MIN_SAMPLES: u64 = 200;
const INVERSION_TOL: f64 = 1e-6;
const PROBABILITY_TOL: f64 = 5e-4;
const ROUTE_TOL: f64 = 1e-8;

type Outcome = (bool, String);

fn soft() -> RadialPotential {
    RadialPotential::soft_sphere(2.0, 0.5).unwrap()
}

fn m(n: [i32; 3]) -> Momentum {
    Momentum::new(n).unwrap()
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn pair() -> Vec<Momentum> {
    vec![m([1, 0, 0]), m([-1, 0, 0])]
}

/// Two vectors on the pair `{e1, -e1}` with `Im⟨ν₁, ν₂⟩ ≠ 0`.
fn complex_pair() -> Vec<NuVector> {
    let i = Complex64::i();
    vec![
        NuVector::new(pair(), vec![c(0.6), 0.3 * i]).unwrap(),
        NuVector::new(pair(), vec![c(0.2) - 0.4 * i, c(0.5)]).unwrap(),
    ]
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let a0 = scattering_length(&soft(), 1.0, &RadialGrid::default()).unwrap();
    let secs = t.elapsed().as_secs_f64();
    let exact = 0.5 - 0.5f64.tanh();
    let dev = (a0 - exact).abs();
    (
        dev <= A0_TOL && secs < A0_SECONDS,
        format!("|a0 - (0.5 - tanh 0.5)| = {dev:.2e} (<= {A0_TOL:e}), {secs:.2} s (< {A0_SECONDS} s)"),
    )
}

fn criterion_2() -> Outcome {
    let t = Instant::now();
    let devs: Vec<f64> = VF_NS
        .iter()
        .map(|&n| solve_neumann(&soft(), n, ELL, &RadialGrid::default()).unwrap().vf_deviation().abs())
        .collect();
    let secs = t.elapsed().as_secs_f64();
    let xs: Vec<f64> = VF_NS.iter().map(|&n| n as f64).collect();
    let slope = loglog_slope(&xs, &devs);
    (
        (slope + 1.0).abs() <= VF_SLOPE_TOL && secs < VF_SECONDS,
        format!("slope {slope:.4} (-1 +- {VF_SLOPE_TOL}), {secs:.2} s (< {VF_SECONDS} s)"),
    )
}

fn criterion_3() -> Outcome {
    let sol = solve_neumann(&soft(), SHELL_N, ELL, &RadialGrid::default()).unwrap();
    let modes = ModeSet::build(SHELL_CUTOFF, SHELL_N);
    let coeffs = ModeCoefficients::compute(&sol, &modes).unwrap();
    let eta = shell_spread(&coeffs.shell_max(&modes, |r| r.eta.abs() * r.p_abs.powi(2)));
    let tau = shell_spread(&coeffs.shell_max(&modes, |r| r.tau.abs() * r.p_abs.powi(4)));
    let shells = modes.dyadic_shells().len();
    (
        eta < SHELL_SPREAD && tau < SHELL_SPREAD,
        format!("{shells} shells, spread |eta|p^2 {eta:.3}, |tau|p^4 {tau:.3} (< {SHELL_SPREAD})"),
    )
}

fn criterion_4() -> Outcome {
    let (gaps, closed): (Vec<f64>, Vec<f64>) = RATE_NS
        .iter()
        .map(|&n| {
            let sol = solve_neumann(&soft(), n, ELL, &RadialGrid::default()).unwrap();
            let c = ModeCoefficients::compute(&sol, &ModeSet::build(RATE_CUTOFF, n)).unwrap();
            (c.max_eta_tau_mu_gap(), c.max_closed_form_gap())
        })
        .unzip();
    let xs: Vec<f64> = RATE_NS.iter().map(|&n| n as f64).collect();
    let slope = loglog_slope(&xs, &gaps);
    let worst = closed.iter().copied().fold(0.0, f64::max);
    (
        (slope + 1.0).abs() <= RATE_SLOPE_TOL && worst <= CLOSED_FORM_TOL,
        format!("slope {slope:.4} (-1 +- {RATE_SLOPE_TOL}), closed-form gap {worst:.2e} (<= {CLOSED_FORM_TOL:e})"),
    )
}

fn criterion_5() -> Outcome {
    let t = Instant::now();
    let basis = FockBasis::build(pair(), CF_N_MAX, CF_PARTICLES).unwrap();
    let single = vec![NuVector::new(pair(), vec![c(1.0), c(0.0)]).unwrap()];
    let complex = complex_pair();
    let overlap = complex[0].inner(&complex[1]).unwrap();
    let mut worst: f64 = 0.0;
    let mut ok = overlap.im.abs() > 0.0;
    for nus in [single, complex] {
        let r = check_vacuum_cf(&basis, &nus, &s_samples(&nus, 4, 12), CF_TOL).unwrap();
        worst = worst.max(r.deviation);
        ok &= r.status == Status::Pass;
    }
    let secs = t.elapsed().as_secs_f64();
    (
        ok && worst <= CF_TOL && secs < CF_SECONDS,
        format!(
            "max deviation {worst:.2e} (<= {CF_TOL:e}), Im<nu1,nu2> = {:.3}, {secs:.2} s (< {CF_SECONDS} s)",
            overlap.im
        ),
    )
}

fn criterion_6() -> Outcome {
    let basis = FockBasis::build(pair(), CF_N_MAX, CF_PARTICLES).unwrap();
    let p = m([1, 0, 0]);
    let nus = complex_pair();
    let s = s_samples(&nus, 4, 12);
    let printed = check_excited_cf(&basis, &nus, p, &s, ExcitedForm::Plus, CF_TOL).unwrap();
    let corrected = check_excited_cf(&basis, &nus, p, &s, ExcitedForm::Minus, CF_TOL).unwrap();

    let nu = vec![nus[0].clone()];
    let sigma = covariance(&nu).unwrap();
    let var = sigma.get(0, 0).re;
    let nu_p_sq = nu[0].get(p).unwrap().norm_sqr();
    let cf = |x: f64| excited_char_fn(&sigma, &nu, p, &[x]).unwrap();
    let grid = UniformGrid::new(-8.0, 8.0, 1600).unwrap();
    let density = invert_char_fn(cf, grid, SGrid::auto(cf, 4096).unwrap()).unwrap();
    let closed: Vec<f64> = grid.points().iter().map(|&x| excited_density_closed_form(var, nu_p_sq, x)).collect();
    let sup = density.sup_distance(&Density1D::from_values(grid, closed)).unwrap();
    let integral = (density.integral - 1.0).abs();

    (
        printed.deviation <= CF_TOL && integral <= DENSITY_INTEGRAL_TOL && sup <= DENSITY_SUP_TOL,
        format!(
            "1 + |s.nu(p)|^2 form: deviation {:.3e} (<= {CF_TOL:e}); 1 - |s.nu(p)|^2 form: {:.2e}; \
             density |integral - 1| {integral:.2e} (<= {DENSITY_INTEGRAL_TOL:e}), closed-form sup {sup:.2e} (<= {DENSITY_SUP_TOL:e})",
            printed.deviation, corrected.deviation
        ),
    )
}

fn all_bases() -> Vec<FockBasis> {
    let (triad_modes, _) = triad(m([1, 0, 0]), m([0, 2, 0])).unwrap();
    let mut bases = vec![
        FockBasis::build(pair(), 16, 40).unwrap(),
        FockBasis::build(pair(), CF_N_MAX, CF_PARTICLES).unwrap(),
        FockBasis::build(pair(), 30, 30).unwrap(),
        FockBasis::build(vec![m([1, 0, 0])], CF_N_MAX, CF_PARTICLES).unwrap(),
    ];
    for &n in &SWEEP {
        bases.push(FockBasis::build(pair(), n as usize, n).unwrap());
        bases.push(FockBasis::build(triad_modes.clone(), 4, n).unwrap());
    }
    bases
}

fn criterion_7() -> Outcome {
    let bases = all_bases();
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for b in &bases {
        let r = check_ccr(b, CCR_TOL).unwrap();
        worst = worst.max(r.deviation);
        ok &= r.status == Status::Pass;
    }
    (
        ok && worst <= CCR_TOL,
        format!("{} bases, max commutator residual {worst:.2e} (<= {CCR_TOL:e})", bases.len()),
    )
}

fn criterion_8() -> Outcome {
    let basis = FockBasis::build(pair(), 30, 30).unwrap();
    let nus = complex_pair();
    let r = check_weyl_relation(&basis, &nus[0], &nus[1], 30 / 4, WEYL_TOL).unwrap();
    (
        r.deviation <= WEYL_TOL,
        format!("residual {:.2e} (<= {WEYL_TOL:e}) on the margin of n_max = 30", r.deviation),
    )
}

fn verify_config(dir: &Path) -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.output.dir = dir.to_path_buf();
    cfg
}

fn criterion_9(suite: &serde_json::Value) -> Outcome {
    let bounds = suite["bounds"].as_array().unwrap();
    let mut ok = true;
    let mut names = Vec::new();
    let mut worst: f64 = 0.0;
    for b in bounds {
        let name = b["name"].as_str().unwrap();
        names.push(name.to_string());
        let drift = b["drift"].as_f64().unwrap_or(f64::INFINITY);
        worst = worst.max(drift);
        let fits = b["fits"].as_array().unwrap();
        let sweep: Vec<u64> = fits.iter().map(|f| f["particles"].as_u64().unwrap()).collect();
        ok &= drift < MAX_DRIFT && sweep == SWEEP;
        for f in fits {
            ok &= f["constant"].as_f64().is_some_and(f64::is_finite);
            ok &= f["samples"].as_u64().is_some_and(|s| s >= MIN_SAMPLES);
            ok &= f["seed"].as_u64().is_some();
        }
    }
    let required = [
        "bogoliubov_number_growth_k1",
        "bogoliubov_number_growth_k2",
        "bogoliubov_residual",
        "cubic_commutator",
        "cubic_number_growth_k1_kappa1",
        "cubic_number_growth_k1_kappa-1",
        "cubic_number_growth_k1_kappa0.5",
        "cubic_number_growth_k1_kappa-0.5",
        "weyl_number_growth_j1",
    ];
    ok &= required.iter().all(|r| names.iter().any(|n| n == r));
    (
        ok,
        format!("{} bound fits, max drift {worst:.3} (< {MAX_DRIFT}), N in {SWEEP:?}, >= {MIN_SAMPLES} samples each", bounds.len()),
    )
}

fn criterion_10(dir: &Path) -> Outcome {
    let text = r#"
        particles = [1000]

        [[observables]]
        name = "cos_e1"
        preset = "cos"
        n0 = [1, 0, 0]

        [limit]
        lambda = { lo = -10.0, hi = 10.0, intervals = 4000 }
    "#;
    let mut cfg = RunConfig::from_toml(text).unwrap();
    cfg.output.dir = dir.to_path_buf();
    let bundle = run_limit(&cfg, &Context::default()).unwrap();
    let value = |prefix: &str| {
        bundle
            .checks
            .iter()
            .find(|c| c.name.starts_with(prefix))
            .map(|c| c.value)
            .unwrap_or(f64::NAN)
    };
    let sup = value("inversion_vs_gaussian");
    let prob = value("interval_probability");
    let route = value("expectation_routes");
    (
        sup <= INVERSION_TOL && (prob - 0.95).abs() <= PROBABILITY_TOL && route <= ROUTE_TOL,
        format!(
            "inversion sup {sup:.2e} (<= {INVERSION_TOL:e}), P(|X| <= 1.96 sigma) = {prob:.6} (0.95 +- {PROBABILITY_TOL:e}), route gap {route:.2e} (<= {ROUTE_TOL:e})"
        ),
    )
}

fn main() {
    let tmp = tempfile::tempdir().unwrap();
    let (dir_a, dir_b) = (tmp.path().join("a"), tmp.path().join("b"));
    run_verify(&verify_config(&dir_a)).unwrap();
    run_verify(&verify_config(&dir_b)).unwrap();
    let read = |d: &Path, f: &str| std::fs::read(d.join(f)).unwrap();
    let suite: serde_json::Value = serde_json::from_slice(&read(&dir_a, "verify/suite.json")).unwrap();
    let identical = ["verify.json", "verify/suite.json"]
        .iter()
        .all(|f| read(&dir_a, f) == read(&dir_b, f));
    let criterion_11 = (
        identical,
        format!("two runs with seed {} give byte-identical verify.json and suite.json", suite["seed"]),
    );

    let results = [
        ("scattering length", criterion_1()),
        ("integral of V f_ell rate", criterion_2()),
        ("coefficient shell decay", criterion_3()),
        ("eta + tau - mu rate", criterion_4()),
        ("vacuum characteristic function", criterion_5()),
        ("excited characteristic function as printed", criterion_6()),
        ("commutation relations", criterion_7()),
        ("Weyl relation", criterion_8()),
        ("bound suite", criterion_9(&suite)),
        ("limit-law pipeline closure", criterion_10(&tmp.path().join("limit"))),
        ("determinism", criterion_11),
    ];
    let mut failed = 0;
    for (i, (name, (ok, detail))) in results.iter().enumerate() {
        println!("criterion {:>2} {} {name}: {detail}", i + 1, if *ok { "PASS" } else { "FAIL" });
        failed += usize::from(!ok);
    }
    println!("{} of {} criteria pass", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
