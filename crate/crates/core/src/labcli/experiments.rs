//! The named sweeps behind the CLI subcommands.

use std::path::Path;

use crate::arcintegral::{self, kernel_integral, l2_error_integral, tolev_f, QuadratureSpec};
use crate::arcsum::{a_factor, gamma_const, gamma_kj, main_term, plan_truncation, TruncationPlan};
use crate::error::{Error, Result};
use crate::labcli::config::ExperimentConfig;
use crate::labcli::report::Report;
use crate::mangoldt::MangoldtTable;
use crate::repcount::{rep_convolve, required_limit};

/// Loads the configured sieve cache when it covers `limit`, otherwise sieves
/// (and refreshes the cache file when one is configured).
pub fn prepare_table(cfg: &ExperimentConfig, limit: u64) -> Result<MangoldtTable> {
    MangoldtTable::load_or_build(cfg.output.sieve_cache.as_deref(), limit.max(2))
}

/// Builds a table to `limit` and writes it to `out`.
pub fn sieve_to_file(limit: u64, out: &Path) -> Result<MangoldtTable> {
    let t = MangoldtTable::build(limit)?;
    t.save_cache(out)?;
    Ok(t)
}

fn at_n(base: u64, e: Error) -> Error {
    match e {
        Error::Precondition(s) => Error::Precondition(format!("N = {base}: {s}")),
        Error::Domain(s) => Error::Domain(format!("N = {base}: {s}")),
        Error::Overflow(s) => Error::Overflow(format!("N = {base}: {s}")),
        Error::Tolerance { what, estimate, tol } => Error::Tolerance {
            what: format!("N = {base}: {what}"),
            estimate,
            tol,
        },
        other => other,
    }
}

fn spread(v: &[f64]) -> f64 {
    let (lo, hi) = v
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    hi / lo
}

/// Exact `Σ R(n)` over `[N+1, N+H]` against the main term, per `N`.
pub fn run_average(cfg: &ExperimentConfig) -> Result<Report> {
    let mut report = Report::new(
        "avg",
        &["N", "H", "sum", "main", "ratio", "abs_dev", "a_ref", "main_unscaled", "ratio_unscaled"],
    );
    let e = &cfg.experiment;
    if e.n_grid.is_empty() {
        return Ok(report);
    }
    let k = cfg.k();
    if e.j < k {
        return Err(Error::Config(format!("the average experiment needs j >= k, got j = {}, k = {k}", e.j)));
    }
    let mut limit = 2;
    for &n in &e.n_grid {
        limit = limit.max(required_limit(&e.phi, e.j, n + cfg.h_for(n)).map_err(|x| at_n(n, x))?);
    }
    let table = prepare_table(cfg, limit)?;
    let lead = e.phi.lead();
    for &n in &e.n_grid {
        let h = cfg.h_for(n);
        let sum = rep_convolve(&e.phi, e.j, n, h, &table)
            .map_err(|x| at_n(n, x))?
            .interval_sum();
        let main = main_term(n, h, e.j, k, lead);
        let plain = main_term(n, h, e.j, k, 1);
        let ratio = sum / main;
        report.push(vec![
            n as f64,
            h as f64,
            sum,
            main,
            ratio,
            (ratio - 1.0).abs(),
            a_factor(n, -1.0)?,
            plain,
            sum / plain,
        ]);
    }
    let dev = report.column("abs_dev").unwrap();
    let (first, last) = (dev[0], dev[dev.len() - 1]);
    report.note("abs_dev_first", first);
    report.note("abs_dev_last", last);
    report.note(
        "trend",
        if dev.len() < 2 {
            "single point"
        } else if last < first {
            "improving"
        } else {
            "not improving"
        },
    );
    Ok(report)
}

/// `γ_k^j I₁`, `I₂`, `I₃` at one `N` against the exact circle sum and the
/// weighted interval sum.
pub fn run_decomposition(cfg: &ExperimentConfig, base: u64) -> Result<Report> {
    let e = &cfg.experiment;
    let k = cfg.k();
    let h = cfg.h_for(base);
    let b = (base as f64).powf(cfg.b_exponent());
    let tau = b / h as f64;
    if !(tau < 0.5) {
        return Err(Error::Precondition(format!("N = {base}: τ = B/H = {tau} is not below 1/2")));
    }
    let plan = plan_truncation(&e.phi, base, cfg.numerics.truncation_tol)?;
    let limit = plan.radius.max(required_limit(&e.phi, e.j, base + h)?);
    let table = prepare_table(cfg, limit)?;
    let d = arcintegral::decompose(&e.phi, e.j, base, h, tau, plan, cfg.numerics.abs_tol, &table)
        .map_err(|x| at_n(base, x))?;
    let weighted = rep_convolve(&e.phi, e.j, base, h, &table)?.weighted_interval_sum();
    let sum = d.sum();
    let weighted_main = main_term(base, h, e.j, k, e.phi.lead()) * (-1f64).exp();
    let mut report = Report::new(
        "decomp",
        &[
            "N", "H", "tau", "major_re", "major_im", "i2_re", "i2_im", "i3_re", "i3_im", "sum_re",
            "sum_im", "full_circle", "weighted_sum", "residual_decomp", "residual_circle",
            "quad_tol", "weighted_main",
        ],
    );
    report.push(vec![
        base as f64,
        h as f64,
        tau,
        d.major_model.re,
        d.major_model.im,
        d.i2.value.re,
        d.i2.value.im,
        d.i3.value.re,
        d.i3.value.im,
        sum.re,
        sum.im,
        d.full_circle,
        weighted,
        d.residual(),
        (d.full_circle - weighted).abs(),
        d.tolerance(),
        weighted_main,
    ]);
    report.note("grid", d.grid);
    report.note("truncation_radius", plan.radius);
    report.note("relative_residual", d.residual() / d.full_circle.abs().max(f64::MIN_POSITIVE));
    Ok(report)
}

fn series_spec(cfg: &ExperimentConfig, plan: TruncationPlan) -> Result<QuadratureSpec> {
    let top = cfg.experiment.phi.eval(plan.radius)? as f64;
    Ok(QuadratureSpec::for_frequency(top, cfg.numerics.abs_tol).with_nodes(cfg.numerics.nodes_per_panel))
}

/// `∫_{−ξ}^{ξ} |S̃_φ − γ_k(a_k z)^{−1/k}|²` with `ξ = N^{−1+13/(15k)−ε}`,
/// scaled by `N^{2/k−1}`.
pub fn run_l2_scaling(cfg: &ExperimentConfig) -> Result<Report> {
    let mut report = Report::new("l2", &["N", "xi", "value", "shape", "ratio"]);
    let e = &cfg.experiment;
    let k = cfg.k() as f64;
    for &n in &e.n_grid {
        let plan = plan_truncation(&e.phi, n, cfg.numerics.truncation_tol)?;
        let table = prepare_table(cfg, plan.radius)?;
        let nf = n as f64;
        let xi = nf.powf(-1.0 + 13.0 / (15.0 * k) - e.epsilon).min(0.5);
        let v = l2_error_integral(&e.phi, n, xi, plan, &series_spec(cfg, plan)?, &table)
            .map_err(|x| at_n(n, x))?;
        let shape = nf.powf(2.0 / k - 1.0);
        report.push(vec![nf, xi, v.value.re, shape, v.value.re / shape]);
    }
    if !report.is_empty() {
        report.note("ratio_spread", spread(&report.column("ratio").unwrap()));
    }
    Ok(report)
}

/// `F(τ)` with `τ = N^{−tau_exponent}`, scaled by `(τN^{1/k} + N^{2/k−1}) log⁴N`.
pub fn run_tolev_scaling(cfg: &ExperimentConfig) -> Result<Report> {
    let mut report = Report::new("tolev", &["N", "tau", "value", "shape", "ratio"]);
    let e = &cfg.experiment;
    let k = cfg.k() as f64;
    for &n in &e.n_grid {
        let plan = plan_truncation(&e.phi, n, cfg.numerics.truncation_tol)?;
        let table = prepare_table(cfg, plan.radius)?;
        let nf = n as f64;
        let tau = nf.powf(-cfg.sweep.tau_exponent).min(0.5);
        let v = tolev_f(&e.phi, n, tau, plan, &series_spec(cfg, plan)?, &table).map_err(|x| at_n(n, x))?;
        let shape = (tau * nf.powf(1.0 / k) + nf.powf(2.0 / k - 1.0)) * nf.ln().powi(4);
        report.push(vec![nf, tau, v.value.re, shape, v.value.re / shape]);
    }
    if !report.is_empty() {
        report.note("ratio_spread", spread(&report.column("ratio").unwrap()));
    }
    Ok(report)
}

/// `|∫_{−X}^{X} z^{−μ} e(−nα) dα − e^{−n/N} n^{μ−1}/Γ(μ)|` against `1/(n X^μ)`
/// over `μ`, `n ∈ {N, N+H}` and `X`.
pub fn run_kernel_check(cfg: &ExperimentConfig) -> Result<Report> {
    let mut report = Report::new(
        "kernel",
        &["N", "mu", "n", "X", "integral_re", "integral_im", "main", "error", "bound", "ratio"],
    );
    for &base in &cfg.experiment.n_grid {
        let h = cfg.h_for(base);
        for &mu in &cfg.sweep.kernel_mu {
            for n in [base, base + h] {
                for &x in &cfg.sweep.kernel_x {
                    let spec = QuadratureSpec::for_frequency(n as f64, cfg.numerics.abs_tol)
                        .with_nodes(cfg.numerics.nodes_per_panel);
                    let v = kernel_integral(base, mu, n, x, &spec).map_err(|e| at_n(base, e))?;
                    let err = (v.integral - v.main).norm();
                    let bound = 1.0 / (n as f64 * x.powf(mu));
                    report.push(vec![
                        base as f64,
                        mu,
                        n as f64,
                        x,
                        v.integral.re,
                        v.integral.im,
                        v.main,
                        err,
                        bound,
                        err / bound,
                    ]);
                }
            }
        }
    }
    if let Some(r) = report.column("ratio").filter(|r| !r.is_empty()) {
        report.note("max_ratio", r.iter().cloned().fold(0.0, f64::max));
    }
    Ok(report)
}

/// `γ_k^j / γ_{k,j}` for the configured polynomial.
pub fn main_constant(cfg: &ExperimentConfig) -> f64 {
    let k = cfg.k();
    gamma_const(k).powi(cfg.experiment.j as i32) / gamma_kj(k, cfg.experiment.j)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(extra: &str) -> ExperimentConfig {
        ExperimentConfig::from_toml(&format!(
            "[experiment]\nphi = \"0,1\"\nj = 2\nepsilon = 0.05\nh_exponent = 0.8\n{extra}"
        ))
        .unwrap()
    }

    #[test]
    fn empty_grid_gives_empty_reports() {
        let c = cfg("n_grid = []");
        assert!(run_average(&c).unwrap().is_empty());
        assert!(run_l2_scaling(&c).unwrap().is_empty());
        assert!(run_tolev_scaling(&c).unwrap().is_empty());
        assert!(run_kernel_check(&c).unwrap().is_empty());
    }

    #[test]
    fn average_ratio_is_finite_and_positive() {
        let r = run_average(&cfg("n_grid = [1000, 5000]")).unwrap();
        for v in r.column("ratio").unwrap() {
            assert!(v.is_finite() && v > 0.0);
        }
        assert_eq!(r.column("H").unwrap(), vec![251.0, 910.0]);
    }

    #[test]
    fn average_is_deterministic_across_threads() {
        let c = cfg("n_grid = [2000]");
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| run_average(&c)).unwrap().to_csv_string();
        let b = four.install(|| run_average(&c)).unwrap().to_csv_string();
        assert_eq!(a, b);
    }

    #[test]
    fn decomposition_residuals() {
        let r = run_decomposition(&cfg(""), 1000).unwrap();
        let get = |c: &str| r.column(c).unwrap()[0];
        assert!(get("residual_decomp") <= get("quad_tol").max(1e-6 * get("full_circle")));
        assert!(get("residual_circle") <= 1e-8 * get("full_circle"));
    }

    #[test]
    fn kernel_check_is_bounded() {
        let c = cfg("n_grid = [100]");
        let r = run_kernel_check(&c).unwrap();
        assert_eq!(r.rows.len(), 16);
        assert!(r.column("ratio").unwrap().iter().all(|&v| v.is_finite() && v <= 10.0));
    }

    #[test]
    fn cache_is_written_and_reused() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.bin");
        let c = cfg(&format!("n_grid = [1000]\n[output]\nsieve_cache = {:?}", path.to_str().unwrap()));
        let first = run_average(&c).unwrap();
        assert!(path.exists());
        let second = run_average(&c).unwrap();
        assert_eq!(first.to_csv_string(), second.to_csv_string());
    }
}
