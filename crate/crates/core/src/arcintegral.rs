//! Integrals over the circle `α ∈ [−1/2, 1/2]`.
//!
//! Two regimes. Full-circle integrals of trigonometric polynomials are taken
//! on a uniform grid of `M` points, which is exact once `M` exceeds the
//! frequency span of the integrand. Everything else uses composite
//! Gauss–Legendre on panels of width `1/M` aligned with the grid `c/M`, with
//! `M ≥ 4·max_frequency`, so each oscillation gets at least four panels.
//!
//! Aligning panels with the grid lets the integrals involving `S̃_φ` take
//! their node values from one shifted inverse DFT per node offset instead of
//! evaluating the series point by point: for a node at relative position `u`
//! in every cell, `S̃((c + u)/M)` for all `c` is a single transform.
//!
//! Reductions run over fixed-size chunks summed in order, so results do not
//! depend on the thread count.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::arcsum::{self, e_int, gamma, gamma_const, gamma_kj, u_sum, z_of, DampedSeries, TruncationPlan};
use crate::error::{Error, Result};
use crate::mangoldt::MangoldtTable;
use crate::polyring::IntPolynomial;

const CHUNK: usize = 512;
const FFT_MAX_GRID: usize = 1 << 24;
const ORIGIN_REFINE: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureSpec {
    /// Panels per unit length; a power of two.
    pub panel_count: usize,
    /// Gauss–Legendre order on each panel.
    pub nodes_per_panel: usize,
    pub max_frequency: f64,
    pub abs_tol: f64,
    /// Panels within `8·origin_scale` of `α = 0` are split 8 ways; used for
    /// integrands carrying `z^{−μ}`, whose branch point sits at distance
    /// `1/(2πN)` from the real axis.
    pub origin_scale: f64,
}

impl QuadratureSpec {
    pub fn for_frequency(max_frequency: f64, abs_tol: f64) -> Self {
        let panel_count = ((4.0 * max_frequency.max(1.0)).ceil() as usize).next_power_of_two();
        Self {
            panel_count,
            nodes_per_panel: 12,
            max_frequency,
            abs_tol,
            origin_scale: 0.0,
        }
    }

    pub fn panel_width(&self) -> f64 {
        1.0 / self.panel_count as f64
    }

    pub fn with_nodes(mut self, nodes: usize) -> Self {
        self.nodes_per_panel = nodes;
        self
    }

    pub fn with_origin_scale(mut self, scale: f64) -> Self {
        self.origin_scale = scale;
        self
    }

    /// Same rule on panels of half the width.
    pub fn halved(mut self) -> Self {
        self.panel_count *= 2;
        self
    }

    fn validate(&self) -> Result<()> {
        if !self.panel_count.is_power_of_two() {
            return Err(Error::Precondition(format!(
                "panel count {} is not a power of two",
                self.panel_count
            )));
        }
        if self.max_frequency > 0.0 && self.panel_width() > 1.0 / (4.0 * self.max_frequency) {
            return Err(Error::Precondition(format!(
                "panel width 1/{} exceeds 1/(4·{})",
                self.panel_count, self.max_frequency
            )));
        }
        if self.nodes_per_panel < 2 {
            return Err(Error::Precondition("need at least 2 nodes per panel".into()));
        }
        Ok(())
    }
}

/// Gauss–Legendre rule on `[0, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p1, mut p2) = (1.0, 0.0);
                for j in 1..=n {
                    let p3 = p2;
                    p2 = p1;
                    p1 = ((2 * j - 1) as f64 * x * p2 - (j - 1) as f64 * p3) / j as f64;
                }
                dp = nf * (x * p1 - p2) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 1.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = 0.5 * (1.0 - x);
            nodes[n - 1 - i] = 0.5 * (1.0 + x);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }
}

/// Quadrature value with an error estimate from a lower-order companion rule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadValue {
    pub value: Complex64,
    pub error_estimate: f64,
}

impl QuadValue {
    fn zero() -> Self {
        Self {
            value: Complex64::new(0.0, 0.0),
            error_estimate: 0.0,
        }
    }

    fn check(self, what: &str, tol: f64) -> Result<Self> {
        if self.error_estimate > tol || !self.value.is_finite() {
            return Err(Error::Tolerance {
                what: what.to_string(),
                estimate: self.error_estimate,
                tol,
            });
        }
        Ok(self)
    }
}

#[derive(Clone, Copy, Debug)]
struct Panel {
    lo: f64,
    hi: f64,
    /// Grid cell `[c/M, (c+1)/M]` when the panel is the whole cell.
    cell: Option<i64>,
}

fn build_panels(segments: &[(f64, f64)], spec: &QuadratureSpec) -> Vec<Panel> {
    let m = spec.panel_count as f64;
    let near = ORIGIN_REFINE as f64 * spec.origin_scale;
    let mut out = Vec::new();
    for &(a, b) in segments {
        if b <= a {
            continue;
        }
        let first = (a * m).floor() as i64;
        let last = (b * m).ceil() as i64;
        for c in first..last {
            let lo = (c as f64 / m).max(a);
            let hi = ((c + 1) as f64 / m).min(b);
            if hi <= lo {
                continue;
            }
            let refine = spec.origin_scale > 0.0 && hi > -near && lo < near;
            if refine {
                let h = (hi - lo) / ORIGIN_REFINE as f64;
                for s in 0..ORIGIN_REFINE {
                    let l = lo + s as f64 * h;
                    let r = if s + 1 == ORIGIN_REFINE { hi } else { l + h };
                    out.push(Panel { lo: l, hi: r, cell: None });
                }
            } else {
                let full = lo == c as f64 / m && hi == (c + 1) as f64 / m;
                out.push(Panel {
                    lo,
                    hi,
                    cell: full.then_some(c),
                });
            }
        }
    }
    out
}

fn rules(spec: &QuadratureSpec) -> (GaussLegendre, GaussLegendre) {
    let n = spec.nodes_per_panel;
    (GaussLegendre::new(n), GaussLegendre::new(n.saturating_sub(4).max(2)))
}

fn panel_sum<F: Fn(f64) -> Complex64>(p: &Panel, rule: &GaussLegendre, f: &F) -> Complex64 {
    let h = p.hi - p.lo;
    rule.nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&u, &w)| w * f(p.lo + u * h))
        .sum::<Complex64>()
        * h
}

fn direct<F>(panels: &[Panel], hi: &GaussLegendre, lo: &GaussLegendre, f: &F) -> (Complex64, Complex64)
where
    F: Fn(f64) -> Complex64 + Sync,
{
    let parts: Vec<(Complex64, Complex64)> = panels
        .par_chunks(CHUNK)
        .map(|chunk| {
            chunk.iter().fold(Default::default(), |(a, b): (Complex64, Complex64), p| {
                (a + panel_sum(p, hi, f), b + panel_sum(p, lo, f))
            })
        })
        .collect();
    parts
        .into_iter()
        .fold(Default::default(), |(a, b), (x, y)| (a + x, b + y))
}

/// Composite Gauss–Legendre over a union of segments.
pub fn integrate<F>(segments: &[(f64, f64)], spec: &QuadratureSpec, f: F) -> Result<QuadValue>
where
    F: Fn(f64) -> Complex64 + Sync,
{
    spec.validate()?;
    let panels = build_panels(segments, spec);
    let (hi, lo) = rules(spec);
    let (a, b) = direct(&panels, &hi, &lo, &f);
    Ok(QuadValue {
        value: a,
        error_estimate: (a - b).norm(),
    })
}

/// Composite Gauss–Legendre of `g(α, S(α))` over segments of `[−1/2, 1/2]`.
pub fn integrate_series<G>(
    series: &DampedSeries,
    segments: &[(f64, f64)],
    spec: &QuadratureSpec,
    g: G,
) -> Result<QuadValue>
where
    G: Fn(f64, Complex64) -> Complex64 + Sync,
{
    integrate_series_with(series, segments, spec, g, None)
}

fn integrate_series_with<G>(
    series: &DampedSeries,
    segments: &[(f64, f64)],
    spec: &QuadratureSpec,
    g: G,
    force_grid: Option<bool>,
) -> Result<QuadValue>
where
    G: Fn(f64, Complex64) -> Complex64 + Sync,
{
    spec.validate()?;
    let panels = build_panels(segments, spec);
    let (hi, lo) = rules(spec);
    let m = spec.panel_count;
    let inside = segments.iter().all(|&(a, b)| a >= -0.5 && b <= 0.5);
    let full: Vec<Panel> = panels.iter().copied().filter(|p| p.cell.is_some()).collect();
    let nodes = (hi.nodes.len() + lo.nodes.len()) as f64;
    let cost_direct = full.len() as f64 * nodes * series.terms.len() as f64;
    let cost_grid = nodes * m as f64 * ((m as f64).log2() * 2.0 + 20.0);
    let use_grid = inside
        && m <= FFT_MAX_GRID
        && (m as i128) > series.bandwidth()
        && force_grid.unwrap_or(cost_grid < cost_direct);
    let pointwise = |a: f64| g(a, series.eval(a));
    if !use_grid {
        let (a, b) = direct(&panels, &hi, &lo, &pointwise);
        return Ok(QuadValue {
            value: a,
            error_estimate: (a - b).norm(),
        });
    }
    let partial: Vec<Panel> = panels.iter().copied().filter(|p| p.cell.is_none()).collect();
    let (mut a, mut b) = direct(&partial, &hi, &lo, &pointwise);
    let h = 1.0 / m as f64;
    for (rule, acc) in [(&hi, &mut a), (&lo, &mut b)] {
        for (&u, &w) in rule.nodes.iter().zip(&rule.weights) {
            let vals = series.grid_eval_shifted(m, u * h)?;
            let parts: Vec<Complex64> = full
                .par_chunks(CHUNK)
                .map(|chunk| {
                    chunk
                        .iter()
                        .map(|p| {
                            let c = p.cell.unwrap();
                            let s = vals[c.rem_euclid(m as i64) as usize];
                            g((c as f64 + u) * h, s)
                        })
                        .sum::<Complex64>()
                })
                .collect();
            *acc += parts.into_iter().sum::<Complex64>() * (w * h);
        }
    }
    Ok(QuadValue {
        value: a,
        error_estimate: (a - b).norm(),
    })
}

/// `∫_{−X}^{X} z^{−μ} e(−nα) dα` together with `e^{−n/N} n^{μ−1}/Γ(μ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelValue {
    pub integral: Complex64,
    pub main: f64,
    pub error_estimate: f64,
}

pub fn kernel_integral(base: u64, mu: f64, n: u64, x: f64, spec: &QuadratureSpec) -> Result<KernelValue> {
    if !(mu > 0.0) || !(x > 0.0) || n == 0 || base == 0 {
        return Err(Error::Precondition(format!(
            "kernel integral needs μ > 0, X > 0, n >= 1, N >= 1 (μ = {mu}, X = {x}, n = {n}, N = {base})"
        )));
    }
    if spec.max_frequency < n as f64 {
        return Err(Error::Precondition(format!(
            "max_frequency {} below the kernel frequency {n}",
            spec.max_frequency
        )));
    }
    let spec = origin_refined(spec, base);
    let f = |a: f64| z_of(base, a).powf(-mu) * e_int(-(n as i128), a);
    let q = integrate(&[(-x, x)], &spec, f)?.check("kernel integral", spec.abs_tol)?;
    let nf = n as f64;
    Ok(KernelValue {
        integral: q.value,
        main: (-nf / base as f64).exp() * nf.powf(mu - 1.0) / gamma(mu),
        error_estimate: q.error_estimate,
    })
}

fn origin_refined(spec: &QuadratureSpec, base: u64) -> QuadratureSpec {
    if spec.origin_scale > 0.0 {
        *spec
    } else {
        spec.with_origin_scale(1.0 / (2.0 * PI * base as f64))
    }
}

/// `∫_{−ξ}^{ξ} |S̃_φ(α) − γ_k (a_k z)^{−1/k}|² dα`.
pub fn l2_error_integral(
    phi: &IntPolynomial,
    base: u64,
    xi: f64,
    plan: TruncationPlan,
    spec: &QuadratureSpec,
    table: &MangoldtTable,
) -> Result<QuadValue> {
    if !(0.0..=0.5).contains(&xi) {
        return Err(Error::Precondition(format!("ξ = {xi} outside [0, 1/2]")));
    }
    if xi == 0.0 {
        return Ok(QuadValue::zero());
    }
    let series = DampedSeries::s_tilde_phi(phi, base, plan, table)?;
    let (k, lead) = (phi.degree(), phi.lead());
    let spec = origin_refined(spec, base);
    let q = integrate_series(&series, &[(-xi, xi)], &spec, |a, s| {
        let d = s - arcsum::major_approx(k, lead, base, a);
        Complex64::new(d.norm_sqr(), 0.0)
    })?;
    q.check("L² major-arc error", spec.abs_tol)
}

/// `F(τ) = ∫_0^τ |S̃_φ(α)|² dα`.
pub fn tolev_f(
    phi: &IntPolynomial,
    base: u64,
    tau: f64,
    plan: TruncationPlan,
    spec: &QuadratureSpec,
    table: &MangoldtTable,
) -> Result<QuadValue> {
    if !(tau > 0.0 && tau <= 0.5) {
        return Err(Error::Precondition(format!("τ = {tau} outside (0, 1/2]")));
    }
    let series = DampedSeries::s_tilde_phi(phi, base, plan, table)?;
    integrate_series(&series, &[(0.0, tau)], spec, |_, s| Complex64::new(s.norm_sqr(), 0.0))?
        .check("F(τ)", spec.abs_tol)
}

/// `I₁` by quadrature and its companion `a_k^{−j/k} γ_{k,j}^{−1} Σ e^{−n/N} n^{(j−k)/k}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct I1Value {
    pub quad: Complex64,
    pub companion: f64,
    pub error_estimate: f64,
}

/// `∫_{−τ}^{τ} (a_k z)^{−j/k} U(−α, H) e(−Nα) dα`.
pub fn i1(
    base: u64,
    len: u64,
    j: usize,
    k: usize,
    lead: i64,
    tau: f64,
    spec: &QuadratureSpec,
) -> Result<I1Value> {
    if !(0.0..=0.5).contains(&tau) {
        return Err(Error::Precondition(format!("τ = {tau} outside [0, 1/2]")));
    }
    if j == 0 || k == 0 {
        return Err(Error::Precondition("j and k must be >= 1".into()));
    }
    let mu = j as f64 / k as f64;
    let spec = origin_refined(spec, base);
    let nb = base as i128;
    let q = integrate(&[(-tau, tau)], &spec, |a| {
        (lead as f64 * z_of(base, a)).powf(-mu) * u_sum(-a, len) * e_int(-nb, a)
    })?
    .check("I1", spec.abs_tol)?;
    let lam = (j as f64 - k as f64) / k as f64;
    let companion = (lead as f64).powf(-mu) / gamma_kj(k, j)
        * damped_power_sum(base, len, lam)?.exact;
    Ok(I1Value {
        quad: q.value,
        companion,
        error_estimate: q.error_estimate,
    })
}

/// `∫_{−τ}^{τ} (S̃_φ^j − γ_k^j (a_k z)^{−j/k}) U(−α, H) e(−Nα) dα`.
#[allow(clippy::too_many_arguments)]
pub fn i2(
    phi: &IntPolynomial,
    j: usize,
    base: u64,
    len: u64,
    tau: f64,
    plan: TruncationPlan,
    spec: &QuadratureSpec,
    table: &MangoldtTable,
) -> Result<QuadValue> {
    check_arc(j, tau)?;
    let series = DampedSeries::s_tilde_phi(phi, base, plan, table)?;
    i2_with(&series, phi, j, base, len, tau, spec)
}

fn i2_with(
    series: &DampedSeries,
    phi: &IntPolynomial,
    j: usize,
    base: u64,
    len: u64,
    tau: f64,
    spec: &QuadratureSpec,
) -> Result<QuadValue> {
    let (k, lead) = (phi.degree(), phi.lead());
    let mu = j as f64 / k as f64;
    let gj = gamma_const(k).powi(j as i32);
    let spec = origin_refined(spec, base);
    let nb = base as i128;
    integrate_series(series, &[(-tau, tau)], &spec, |a, s| {
        let model = gj * (lead as f64 * z_of(base, a)).powf(-mu);
        (s.powu(j as u32) - model) * u_sum(-a, len) * e_int(-nb, a)
    })?
    .check("I2", spec.abs_tol)
}

/// `∫_𝒞 S̃_φ^j U(−α, H) e(−Nα) dα`, `𝒞 = [−1/2, −τ] ∪ [τ, 1/2]`.
#[allow(clippy::too_many_arguments)]
pub fn i3(
    phi: &IntPolynomial,
    j: usize,
    base: u64,
    len: u64,
    tau: f64,
    plan: TruncationPlan,
    spec: &QuadratureSpec,
    table: &MangoldtTable,
) -> Result<QuadValue> {
    check_arc(j, tau)?;
    let series = DampedSeries::s_tilde_phi(phi, base, plan, table)?;
    i3_with(&series, j, base, len, tau, spec)
}

fn i3_with(
    series: &DampedSeries,
    j: usize,
    base: u64,
    len: u64,
    tau: f64,
    spec: &QuadratureSpec,
) -> Result<QuadValue> {
    let nb = base as i128;
    integrate_series(series, &[(-0.5, -tau), (tau, 0.5)], spec, |a, s| {
        s.powu(j as u32) * u_sum(-a, len) * e_int(-nb, a)
    })?
    .check("I3", spec.abs_tol)
}

fn check_arc(j: usize, tau: f64) -> Result<()> {
    if j == 0 {
        return Err(Error::Precondition("j must be >= 1".into()));
    }
    if !(tau > 0.0 && tau < 0.5) {
        return Err(Error::Precondition(format!("τ = {tau} outside (0, 1/2)")));
    }
    Ok(())
}

/// Smallest power of two `M` with `M > j·B + N + H`, `B` the series bandwidth.
pub fn exact_grid_size(series: &DampedSeries, j: usize, base: u64, len: u64) -> usize {
    let need = j as i128 * series.bandwidth() + base as i128 + len as i128;
    ((need + 1) as usize).next_power_of_two()
}

fn check_bandwidth(series: &DampedSeries, j: usize, base: u64, len: u64, grid: usize) -> Result<()> {
    let need = j as i128 * series.bandwidth() + base as i128 + len as i128;
    if (grid as i128) <= need {
        return Err(Error::Precondition(format!(
            "grid size {grid} must exceed j·bandwidth + N + H = {need}"
        )));
    }
    Ok(())
}

/// `(1/M) Σ_m S̃(m/M)^j U(−m/M, H) e(−Nm/M)`, which equals
/// `Σ_{n=N+1}^{N+H} e^{−n/N} R(n)` for the truncated series.
pub fn full_circle_sum(
    phi: &IntPolynomial,
    j: usize,
    base: u64,
    len: u64,
    plan: TruncationPlan,
    grid: usize,
    table: &MangoldtTable,
) -> Result<f64> {
    let series = DampedSeries::s_tilde_phi(phi, base, plan, table)?;
    full_circle_with(&series, j, base, len, grid)
}

pub fn full_circle_with(series: &DampedSeries, j: usize, base: u64, len: u64, grid: usize) -> Result<f64> {
    if j == 0 {
        return Err(Error::Precondition("j must be >= 1".into()));
    }
    check_bandwidth(series, j, base, len, grid)?;
    let vals = series.grid_eval(grid)?;
    let m = grid as i128;
    let nb = base as i128;
    let inv = 1.0 / grid as f64;
    let parts: Vec<Complex64> = vals
        .par_chunks(CHUNK)
        .enumerate()
        .map(|(ci, chunk)| {
            chunk
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    let mi = (ci * CHUNK + i) as i128;
                    let a = mi as f64 * inv;
                    let shift = arcsum::e((-nb * mi).rem_euclid(m) as f64 * inv);
                    s.powu(j as u32) * u_sum(-a, len) * shift
                })
                .sum()
        })
        .collect();
    let total = parts.into_iter().sum::<Complex64>() * inv;
    if total.im.abs() > 1e-8 * total.re.abs().max(1.0) {
        return Err(Error::Tolerance {
            what: "full-circle sum imaginary part".into(),
            estimate: total.im.abs(),
            tol: 1e-8 * total.re.abs().max(1.0),
        });
    }
    Ok(total.re)
}

/// `(1/M) Σ_m S̃(m/M)^j e(−nm/M)` for `n = 0..M`: the coefficients
/// `e^{−n/N} R_{φ,j}(n)` of the truncated series, all at once.
pub fn power_coefficients(series: &DampedSeries, j: usize, grid: usize) -> Result<Vec<f64>> {
    if (grid as i128) <= j as i128 * series.bandwidth() {
        return Err(Error::Precondition(format!(
            "grid size {grid} must exceed j·bandwidth = {}",
            j as i128 * series.bandwidth()
        )));
    }
    let mut vals = series.grid_eval(grid)?;
    vals.iter_mut().for_each(|v| *v = v.powu(j as u32));
    rustfft::FftPlanner::new().plan_fft_forward(grid).process(&mut vals);
    let inv = 1.0 / grid as f64;
    Ok(vals.into_iter().map(|v| v.re * inv).collect())
}

/// `Σ_{n=N+1}^{N+H} e^{−n/N} n^λ` and the model `e^{−1} H N^λ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DampedPowerSum {
    pub exact: f64,
    pub asymptotic: f64,
}

pub fn damped_power_sum(base: u64, len: u64, lambda: f64) -> Result<DampedPowerSum> {
    if len > base {
        return Err(Error::Precondition(format!("H = {len} exceeds N = {base}")));
    }
    let nb = base as f64;
    let exact = (base + 1..=base + len)
        .map(|n| {
            let nf = n as f64;
            (-nf / nb).exp() * nf.powf(lambda)
        })
        .sum();
    Ok(DampedPowerSum {
        exact,
        asymptotic: (-1f64).exp() * len as f64 * nb.powf(lambda),
    })
}

/// The three-way split of the circle integral at `τ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Decomposition {
    pub i1: I1Value,
    /// `γ_k^j · I₁`.
    pub major_model: Complex64,
    pub i2: QuadValue,
    pub i3: QuadValue,
    pub full_circle: f64,
    pub grid: usize,
}

impl Decomposition {
    pub fn sum(&self) -> Complex64 {
        self.major_model + self.i2.value + self.i3.value
    }

    pub fn residual(&self) -> f64 {
        (self.sum() - self.full_circle).norm()
    }

    /// Combined quadrature error estimates of the three pieces.
    pub fn tolerance(&self) -> f64 {
        let k_gamma = (self.major_model.norm() / self.i1.quad.norm().max(f64::MIN_POSITIVE)).abs();
        k_gamma * self.i1.error_estimate + self.i2.error_estimate + self.i3.error_estimate
    }
}

/// `γ_k^j I₁ + I₂ + I₃` and the bandwidth-exact full-circle sum, sharing one
/// truncated series. The quadrature spec is sized for the product integrand.
#[allow(clippy::too_many_arguments)]
pub fn decompose(
    phi: &IntPolynomial,
    j: usize,
    base: u64,
    len: u64,
    tau: f64,
    plan: TruncationPlan,
    abs_tol: f64,
    table: &MangoldtTable,
) -> Result<Decomposition> {
    check_arc(j, tau)?;
    let series = DampedSeries::s_tilde_phi(phi, base, plan, table)?;
    let freq = j as f64 * series.bandwidth() as f64 + (base + len) as f64;
    let spec = QuadratureSpec::for_frequency(freq, abs_tol);
    let (k, lead) = (phi.degree(), phi.lead());
    let one = i1(base, len, j, k, lead, tau, &spec)?;
    let major_model = gamma_const(k).powi(j as i32) * one.quad;
    let two = i2_with(&series, phi, j, base, len, tau, &spec)?;
    let three = i3_with(&series, j, base, len, tau, &spec)?;
    let grid = exact_grid_size(&series, j, base, len);
    let full_circle = full_circle_with(&series, j, base, len, grid)?;
    Ok(Decomposition {
        i1: one,
        major_model,
        i2: two,
        i3: three,
        full_circle,
        grid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arcsum::plan_truncation;
    use crate::repcount::{rep_brute, required_limit};
    use approx::assert_relative_eq;

    fn p(s: &str) -> IntPolynomial {
        s.parse().unwrap()
    }

    struct Setup {
        phi: IntPolynomial,
        plan: TruncationPlan,
        table: MangoldtTable,
    }

    fn setup(s: &str, base: u64, j: usize, top: u64) -> Setup {
        let phi = p(s);
        let plan = plan_truncation(&phi, base, 1e-12).unwrap();
        let limit = plan.radius.max(required_limit(&phi, j, top).unwrap());
        Setup {
            phi,
            plan,
            table: MangoldtTable::build(limit).unwrap(),
        }
    }

    #[test]
    fn gauss_legendre_exactness() {
        for n in [2usize, 5, 8, 12, 20] {
            let r = GaussLegendre::new(n);
            assert_relative_eq!(r.weights.iter().sum::<f64>(), 1.0, max_relative = 1e-14);
            // exact for degree 2n-1 on [0,1]
            let d = 2 * n - 1;
            let q: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.powi(d as i32)).sum();
            assert_relative_eq!(q, 1.0 / (d as f64 + 1.0), max_relative = 1e-13);
        }
    }

    #[test]
    fn oscillatory_integral_and_self_consistency() {
        // ∫_{-0.3}^{0.41} e(57α) dα
        let spec = QuadratureSpec::for_frequency(57.0, 1e-10);
        let q = integrate(&[(-0.3, 0.41)], &spec, |a| e_int(57, a)).unwrap();
        let exact = (e_int(57, 0.41) - e_int(57, -0.3)) / Complex64::new(0.0, 2.0 * PI * 57.0);
        assert!((q.value - exact).norm() < 1e-13);
        let q2 = integrate(&[(-0.3, 0.41)], &spec.halved(), |a| e_int(57, a)).unwrap();
        assert!((q.value - q2.value).norm() < spec.abs_tol);
    }

    #[test]
    fn spec_rejects_coarse_panels() {
        let mut spec = QuadratureSpec::for_frequency(100.0, 1e-8);
        spec.panel_count = 128;
        assert!(matches!(integrate(&[(0.0, 0.1)], &spec, |_| Complex64::new(1.0, 0.0)), Err(Error::Precondition(_))));
    }

    #[test]
    fn kernel_examples() {
        let spec = QuadratureSpec::for_frequency(200.0, 1e-9);
        let v = kernel_integral(100, 1.0, 100, 0.5, &spec).unwrap();
        assert_relative_eq!(v.main, (-1f64).exp(), max_relative = 1e-14);
        assert!((v.integral - v.main).norm() <= 2.0 / (100.0 * 0.5));
        let w = kernel_integral(200, 2.0, 200, 0.5, &QuadratureSpec::for_frequency(200.0, 1e-9)).unwrap();
        assert_relative_eq!(w.main, (-1f64).exp() * 200.0, max_relative = 1e-13);
        let quarter = kernel_integral(200, 2.0, 200, 0.25, &QuadratureSpec::for_frequency(200.0, 1e-9)).unwrap();
        let err_half = (w.integral - w.main).norm();
        let err_quarter = (quarter.integral - quarter.main).norm();
        // X^{-2} predicts a factor 4 between X = 1/4 and X = 1/2.
        assert!(err_quarter / err_half >= 4.0 / 4.0, "{err_quarter} / {err_half}");
        assert!(kernel_integral(100, 1.0, 500, 0.5, &spec).is_err());
    }

    #[test]
    fn damped_power_sum_examples() {
        let d = damped_power_sum(1000, 1, 0.0).unwrap();
        assert_relative_eq!(d.exact, (-1001.0f64 / 1000.0).exp(), max_relative = 1e-15);
        assert_relative_eq!(d.asymptotic, (-1f64).exp(), max_relative = 1e-15);
        assert!((d.exact - d.asymptotic).abs() <= (-1f64).exp() / 1000.0 * 1.01);
        for lam in [0.0, 0.5, 1.0] {
            let d = damped_power_sum(100_000, 1000, lam).unwrap();
            assert!((d.exact - d.asymptotic).abs() <= 3.0 * 1e6 * 1e5f64.powf(lam - 1.0));
        }
        assert_eq!(
            damped_power_sum(10, 0, 0.5).unwrap(),
            DampedPowerSum { exact: 0.0, asymptotic: 0.0 }
        );
        assert!(damped_power_sum(10, 11, 0.5).is_err());
    }

    #[test]
    fn full_circle_matches_brute_force() {
        for (s, base, len) in [("0,1", 200u64, 20u64), ("1,1", 300, 30)] {
            let st = setup(s, base, 2, base + len);
            let series = DampedSeries::s_tilde_phi(&st.phi, base, st.plan, &st.table).unwrap();
            let grid = exact_grid_size(&series, 2, base, len);
            let fc = full_circle_sum(&st.phi, 2, base, len, st.plan, grid, &st.table).unwrap();
            let w = rep_brute(&st.phi, 2, base, len, &st.table).unwrap().weighted_interval_sum();
            assert_relative_eq!(fc, w, max_relative = 1e-8);
            assert!(full_circle_sum(&st.phi, 2, base, len, st.plan, grid / 4, &st.table).is_err());
        }
    }

    #[test]
    fn full_circle_single_fold() {
        let st = setup("0,1", 1000, 1, 1100);
        let series = DampedSeries::s_tilde_phi(&st.phi, 1000, st.plan, &st.table).unwrap();
        let grid = exact_grid_size(&series, 1, 1000, 100);
        let fc = full_circle_with(&series, 1, 1000, 100, grid).unwrap();
        let direct: f64 = st
            .table
            .prime_powers(st.table.limit())
            .filter(|&(n, _)| (1001..=1100).contains(&(n * n)))
            .map(|(n, l)| l * (-((n * n) as f64) / 1000.0).exp())
            .sum();
        assert_relative_eq!(fc, direct, max_relative = 1e-8);
    }

    #[test]
    fn orthogonality_at_single_n() {
        let base = 400;
        let st = setup("1,0,1", base, 3, 600);
        let series = DampedSeries::s_tilde_phi(&st.phi, base, st.plan, &st.table).unwrap();
        let grid = (3 * series.bandwidth() as usize + 1).next_power_of_two();
        let coeffs = power_coefficients(&series, 3, grid).unwrap();
        let r = rep_brute(&st.phi, 3, base, 200, &st.table).unwrap();
        let scale = r.values.iter().fold(1.0f64, |m, v| m.max(*v));
        for (n, v) in r.iter() {
            let expect = (-(n as f64) / base as f64).exp() * v;
            assert!((coeffs[n as usize] - expect).abs() <= 1e-8 * scale, "n = {n}");
        }
    }

    #[test]
    fn parseval_for_f() {
        let base = 300;
        let st = setup("1,1", base, 1, base);
        let spec = QuadratureSpec::for_frequency(st.plan.radius.pow(2) as f64 * 1.1, 1e-8);
        let f_half = tolev_f(&st.phi, base, 0.5, st.plan, &spec, &st.table).unwrap();
        let series = DampedSeries::s_tilde_phi(&st.phi, base, st.plan, &st.table).unwrap();
        let mut by_freq = std::collections::BTreeMap::new();
        for &(f, c) in &series.terms {
            *by_freq.entry(f).or_insert(0.0) += c;
        }
        let parseval: f64 = by_freq.values().map(|c| c * c).sum();
        assert_relative_eq!(2.0 * f_half.value.re, parseval, max_relative = 1e-8);

        let mut prev = 0.0;
        for tau in [0.001, 0.01, 0.1, 0.3, 0.5] {
            let v = tolev_f(&st.phi, base, tau, st.plan, &spec, &st.table).unwrap().value.re;
            assert!(v >= prev && v <= f_half.value.re * (1.0 + 1e-12));
            prev = v;
        }
    }

    #[test]
    fn grid_and_pointwise_paths_agree() {
        let base = 400;
        let st = setup("0,1", base, 2, base);
        let series = DampedSeries::s_tilde_phi(&st.phi, base, st.plan, &st.table).unwrap();
        let spec = QuadratureSpec::for_frequency(series.bandwidth() as f64, 1.0);
        let g = |a: f64, s: Complex64| s * s * u_sum(-a, 50) * e_int(-400, a);
        let segs = [(-0.5, -0.013), (0.0131, 0.5)];
        let fast = integrate_series_with(&series, &segs, &spec, g, Some(true)).unwrap();
        let panels = build_panels(&segs, &spec);
        let (hi, lo) = rules(&spec);
        let (slow, _) = direct(&panels, &hi, &lo, &|a| g(a, series.eval(a)));
        assert!((fast.value - slow).norm() <= 1e-9 * slow.norm().max(1.0), "{} vs {}", fast.value, slow);
    }

    #[test]
    fn l2_error_examples() {
        let base = 10_000;
        let st = setup("0,1", base, 1, base);
        let spec = QuadratureSpec::for_frequency(st.plan.radius.pow(2) as f64, 1e-6);
        assert_eq!(l2_error_integral(&st.phi, base, 0.0, st.plan, &spec, &st.table).unwrap().value, Complex64::new(0.0, 0.0));
        let series = DampedSeries::s_tilde_phi(&st.phi, base, st.plan, &st.table).unwrap();
        let at0 = (series.eval(0.0) - gamma_const(2) * (base as f64).sqrt()).norm_sqr();
        let tiny = 1e-7;
        let v = l2_error_integral(&st.phi, base, tiny, st.plan, &spec, &st.table).unwrap();
        assert_relative_eq!(v.value.re / (2.0 * tiny), at0, max_relative = 1e-3);
        let xi = (base as f64).powf(-1.0 + 13.0 / 30.0 - 0.05);
        let big = l2_error_integral(&st.phi, base, xi, st.plan, &spec, &st.table).unwrap();
        assert!(big.value.re > 0.0 && big.value.re.is_finite());
    }

    #[test]
    fn i1_against_companion() {
        let (base, len, j, k) = (10_000u64, 1000u64, 3usize, 2usize);
        let b = (base as f64).powf(0.1);
        let tau = b / len as f64;
        let spec = QuadratureSpec::for_frequency((base + len) as f64, 1e-8);
        let v = i1(base, len, j, k, 1, tau, &spec).unwrap();
        let budget = 10.0 * (len as f64 / base as f64) * (len as f64 / b).powf(j as f64 / k as f64);
        assert!((v.quad - v.companion).norm() <= budget);

        let eq = i1(base, len, 2, 2, 1, tau, &spec).unwrap();
        let direct: f64 = (base + 1..=base + len).map(|n| (-(n as f64) / base as f64).exp()).sum();
        assert_relative_eq!(eq.companion, direct, max_relative = 1e-12);

        // |z^{-1}| <= N and |U| <= H on the arc.
        let small = i1(base, len, 2, 2, 1, 1e-9, &spec).unwrap();
        assert!(small.quad.norm() <= 2e-9 * base as f64 * len as f64);
    }

    #[test]
    fn decomposition_recombines() {
        let (base, len, tau) = (600u64, 100u64, 0.05);
        let st = setup("0,1", base, 2, base + len);
        let d = decompose(&st.phi, 2, base, len, tau, st.plan, 1e-6, &st.table).unwrap();
        assert!(d.residual() <= 1e-7 * d.full_circle.abs(), "{}", d.residual());
        let w = rep_brute(&st.phi, 2, base, len, &st.table).unwrap().weighted_interval_sum();
        assert_relative_eq!(d.full_circle, w, max_relative = 1e-8);

        // Crude bound for the minor arcs from F and sup scans.
        let series = DampedSeries::s_tilde_phi(&st.phi, base, st.plan, &st.table).unwrap();
        let spec = QuadratureSpec::for_frequency(series.bandwidth() as f64, 1e-6);
        let f_half = tolev_f(&st.phi, base, 0.5, st.plan, &spec, &st.table).unwrap().value.re;
        let f_tau = tolev_f(&st.phi, base, tau, st.plan, &spec, &st.table).unwrap().value.re;
        let max_u = (0..=1000)
            .map(|i| tau + (0.5 - tau) * i as f64 / 1000.0)
            .map(|a| u_sum(-a, len).norm())
            .fold(0.0, f64::max);
        let bound = (2.0 * f_half - 2.0 * f_tau) * max_u;
        assert!(d.i3.value.norm() <= bound, "{} > {bound}", d.i3.value.norm());
        assert!(matches!(i2(&st.phi, 0, base, len, tau, st.plan, &spec, &st.table), Err(Error::Precondition(_))));
    }
}
