//! Damped exponential sums over prime powers and the quantities that model
//! them near `α = 0`.
//!
//! With `z = 1/N − 2πiα` (so `Re z > 0` and every power `z^s` is taken on the
//! principal branch):
//!
//! - `S̃_φ(α) = Σ Λ(n) e^{−φ(n)/N} e(φ(n)α)`,
//! - `S̃_k(α)`, the same with `φ = n^k`,
//! - `S̃_{k,φ}(α) = Σ Λ(n) e^{−n^k/N} e(φ(n)α)`,
//!
//! each truncated at a certified radius, and the major-arc model
//! `γ_k (a_k z)^{−1/k}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::mangoldt::MangoldtTable;
use crate::polyring::IntPolynomial;

const TWO_POW_53: i128 = 1 << 53;

/// Splits `m·α` into `K + f` with `K` an integer and `f ∈ [−1/2, 1/2]`,
/// keeping `f` accurate to a few ulps even when `m·α` is huge.
pub fn phase_split(m: i128, alpha: f64) -> (i128, f64) {
    if m.abs() < TWO_POW_53 {
        let mf = m as f64;
        let p = mf * alpha;
        let e = mf.mul_add(alpha, -p);
        let kp = p.round();
        let ke = e.round();
        let mut f = (p - kp) + (e - ke);
        let r = f.round();
        f -= r;
        return (kp as i128 + ke as i128 + r as i128, f);
    }
    let hi = m >> 32;
    let lo = m - (hi << 32);
    let (k1, f1) = phase_split(hi, alpha * 4_294_967_296.0);
    let (k2, f2) = phase_split(lo, alpha);
    let mut f = f1 + f2;
    let r = f.round();
    f -= r;
    (k1 + k2 + r as i128, f)
}

/// `m·α mod 1`, in `[−1/2, 1/2]`.
#[inline]
pub fn phase_frac(m: i128, alpha: f64) -> f64 {
    if m.abs() < TWO_POW_53 {
        let mf = m as f64;
        let p = mf * alpha;
        let e = mf.mul_add(alpha, -p);
        let f = (p - p.round()) + (e - e.round());
        f - f.round()
    } else {
        phase_split(m, alpha).1
    }
}

/// `e(x) = exp(2πix)`.
#[inline]
pub fn e(x: f64) -> Complex64 {
    let (s, c) = (2.0 * PI * x).sin_cos();
    Complex64::new(c, s)
}

/// `e(mα)` with the product reduced mod 1 first.
#[inline]
pub fn e_int(m: i128, alpha: f64) -> Complex64 {
    e(phase_frac(m, alpha))
}

/// A point `α` on the circle with `z = 1/N − 2πiα`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArcPoint {
    pub alpha: f64,
    pub base: u64,
    pub z: Complex64,
}

impl ArcPoint {
    pub fn new(alpha: f64, base: u64) -> Result<Self> {
        if !(-0.5..=0.5).contains(&alpha) {
            return Err(Error::Domain(format!("α = {alpha} outside [-1/2, 1/2]")));
        }
        if base == 0 {
            return Err(Error::Domain("N must be >= 1".into()));
        }
        Ok(Self {
            alpha,
            base,
            z: z_of(base, alpha),
        })
    }
}

#[inline]
pub fn z_of(base: u64, alpha: f64) -> Complex64 {
    Complex64::new(1.0 / base as f64, -2.0 * PI * alpha)
}

/// A cutoff radius for a damped series and a certified bound on
/// `Σ_{n > R} Λ(n) e^{−d(n)/N}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncationPlan {
    pub radius: u64,
    pub tail_bound: f64,
}

/// Upper envelope `Σ_{n > R} log(n) e^{−d(n)/N}`; needs `R` past the point
/// where all forward differences of `d` are nonnegative, so that consecutive
/// term ratios are non-increasing.
fn envelope_tail(damping: &IntPolynomial, base: u64, radius: u64) -> Result<f64> {
    let nb = base as f64;
    let term = |n: u64| -> Result<f64> {
        Ok((n as f64).ln() * (-(damping.eval(n)? as f64) / nb).exp())
    };
    let explicit = radius.max(1000);
    let mut sum = 0.0;
    let mut n = radius + 1;
    let mut t = term(n)?;
    loop {
        let t_next = term(n + 1)?;
        let ratio = if t > 0.0 { t_next / t } else { 0.0 };
        if n > radius + explicit && ratio < 1.0 {
            return Ok(sum + t / (1.0 - ratio));
        }
        sum += t;
        if t == 0.0 {
            return Ok(sum);
        }
        t = t_next;
        n += 1;
    }
}

/// Smallest `R ≥ N^{1/k}` with `2R e^{−d(R)/(2N)} ≤ tol`, raised further
/// until the summed tail envelope is also `≤ tol`.
pub fn plan_truncation(damping: &IntPolynomial, base: u64, tol: f64) -> Result<TruncationPlan> {
    if !(tol > 0.0) {
        return Err(Error::Precondition(format!("truncation tolerance {tol} must be > 0")));
    }
    if base == 0 {
        return Err(Error::Precondition("N must be >= 1".into()));
    }
    let k = damping.degree() as f64;
    let (_, convex_from) = damping.certified_table();
    let start = ((base as f64).powf(1.0 / k).ceil() as u64).max(convex_from).max(2);
    let nb = base as f64;
    let quick = |r: u64| -> Result<bool> {
        Ok(2.0 * r as f64 * (-(damping.eval(r)? as f64) / (2.0 * nb)).exp() <= tol)
    };
    let mut hi = start;
    let mut lo = start;
    while !quick(hi)? {
        lo = hi;
        hi = hi.saturating_mul(2);
    }
    if hi > start {
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if quick(mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }
    let mut radius = hi;
    loop {
        let tail = envelope_tail(damping, base, radius)?;
        if tail <= tol {
            return Ok(TruncationPlan {
                radius,
                tail_bound: tail,
            });
        }
        radius += radius / 16 + 1;
    }
}

/// A truncated damped series `Σ_{n ≤ R} c_n e(f_n α)` with real `c_n ≥ 0`.
#[derive(Clone, Debug)]
pub struct DampedSeries {
    /// `(f_n, c_n)` for prime powers `n ≤ R`.
    pub terms: Vec<(i128, f64)>,
    pub plan: TruncationPlan,
}

impl DampedSeries {
    /// `Σ_{n ≤ R} Λ(n) e^{−d(n)/N} e(φ(n)α)` for phase `φ` and damping `d`.
    pub fn new(
        phase: &IntPolynomial,
        damping: &IntPolynomial,
        base: u64,
        plan: TruncationPlan,
        table: &MangoldtTable,
    ) -> Result<Self> {
        table.require(plan.radius)?;
        let nb = base as f64;
        let terms = table
            .prime_powers(plan.radius)
            .map(|(n, l)| {
                let f = phase.eval(n)?;
                let d = damping.eval(n)? as f64;
                Ok((f, l * (-d / nb).exp()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { terms, plan })
    }

    /// `S̃_φ`: phase and damping both `φ`.
    pub fn s_tilde_phi(
        phi: &IntPolynomial,
        base: u64,
        plan: TruncationPlan,
        table: &MangoldtTable,
    ) -> Result<Self> {
        Self::new(phi, phi, base, plan, table)
    }

    pub fn eval(&self, alpha: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|&(f, c)| c * e_int(f, alpha))
            .sum()
    }

    pub fn at_zero(&self) -> f64 {
        self.terms.iter().map(|t| t.1).sum()
    }

    pub fn max_frequency(&self) -> i128 {
        self.terms.iter().map(|t| t.0).max().unwrap_or(0)
    }

    pub fn min_frequency(&self) -> i128 {
        self.terms.iter().map(|t| t.0).min().unwrap_or(0)
    }

    /// Width of the frequency support, counting 0.
    pub fn bandwidth(&self) -> i128 {
        self.max_frequency().max(0) - self.min_frequency().min(0)
    }

    /// Values at `m/M`, `m = 0..M`, by one inverse DFT.
    pub fn grid_eval(&self, grid: usize) -> Result<Vec<Complex64>> {
        self.grid_eval_shifted(grid, 0.0)
    }

    /// Values at `shift + m/M`, `m = 0..M`.
    pub fn grid_eval_shifted(&self, grid: usize, shift: f64) -> Result<Vec<Complex64>> {
        if (grid as i128) <= self.bandwidth() {
            return Err(Error::Precondition(format!(
                "grid size {grid} must exceed the series bandwidth {}",
                self.bandwidth()
            )));
        }
        let mut buf = vec![Complex64::new(0.0, 0.0); grid];
        let m = grid as i128;
        for &(f, c) in &self.terms {
            let w = if shift == 0.0 { Complex64::new(c, 0.0) } else { c * e_int(f, shift) };
            buf[f.rem_euclid(m) as usize] += w;
        }
        FftPlanner::new().plan_fft_inverse(grid).process(&mut buf);
        Ok(buf)
    }
}

/// `S̃_φ(α)` truncated at `plan.radius`.
pub fn s_tilde_phi(
    phi: &IntPolynomial,
    base: u64,
    alpha: f64,
    plan: TruncationPlan,
    table: &MangoldtTable,
) -> Result<Complex64> {
    Ok(DampedSeries::s_tilde_phi(phi, base, plan, table)?.eval(alpha))
}

/// `S̃_k(α) = Σ Λ(n) e^{−n^k/N} e(n^k α)`.
pub fn s_tilde_k(
    k: usize,
    base: u64,
    alpha: f64,
    plan: TruncationPlan,
    table: &MangoldtTable,
) -> Result<Complex64> {
    let mono = IntPolynomial::monomial(k, 1)?;
    s_tilde_phi(&mono, base, alpha, plan, table)
}

/// `S̃_{k,φ}(α) = Σ Λ(n) e^{−n^k/N} e(φ(n)α)` with `k = deg φ`.
pub fn s_tilde_k_phi(
    phi: &IntPolynomial,
    base: u64,
    alpha: f64,
    plan: TruncationPlan,
    table: &MangoldtTable,
) -> Result<Complex64> {
    let mono = IntPolynomial::monomial(phi.degree(), 1)?;
    Ok(DampedSeries::new(phi, &mono, base, plan, table)?.eval(alpha))
}

/// `γ_k (a_k z)^{−1/k}`.
pub fn major_approx(k: usize, lead: i64, base: u64, alpha: f64) -> Complex64 {
    major_approx_z(k, lead, z_of(base, alpha))
}

#[inline]
pub fn major_approx_z(k: usize, lead: i64, z: Complex64) -> Complex64 {
    gamma_const(k) * (lead as f64 * z).powf(-1.0 / k as f64)
}

/// `U(α, H) = Σ_{m=1}^{H} e(mα)`.
pub fn u_sum(alpha: f64, len: u64) -> Complex64 {
    let r = alpha - alpha.round();
    if r == 0.0 {
        return Complex64::new(len as f64, 0.0);
    }
    let h = len as i128;
    // U = e((H+1)α/2) sin(πHα) / sin(πα)
    let (k_num, f_num) = phase_split(h, r);
    let num = if k_num % 2 == 0 { 1.0 } else { -1.0 } * (PI * f_num).sin();
    let (k_ph, f_ph) = phase_split(h + 1, r);
    let ph = if k_ph % 2 == 0 { 1.0 } else { -1.0 } * e(0.5 * f_ph);
    ph * (num / (PI * r).sin())
}

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `Γ(x)` by the Lanczos approximation (`g = 7`, nine terms), with the
/// reflection formula below `1/2`.
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
}

/// `γ_k = Γ(1 + 1/k)`.
pub fn gamma_const(k: usize) -> f64 {
    gamma(1.0 + 1.0 / k as f64)
}

/// `γ_{k,j} = Γ(j/k)`.
pub fn gamma_kj(k: usize, j: usize) -> f64 {
    gamma(j as f64 / k as f64)
}

/// `A(N; C) = exp(C (log N / log log N)^{1/3})`.
pub fn a_factor(base: u64, c: f64) -> Result<f64> {
    if base < 16 {
        return Err(Error::Domain(format!("A(N; C) needs N >= 16, got {base}")));
    }
    let l = (base as f64).ln();
    Ok((c * (l / l.ln()).cbrt()).exp())
}

/// `(γ_k^j / γ_{k,j}) a_k^{−j/k} H N^{(j−k)/k}`.
pub fn main_term(base: u64, len: u64, j: usize, k: usize, lead: i64) -> f64 {
    let (jf, kf) = (j as f64, k as f64);
    gamma_const(k).powi(j as i32) / gamma_kj(k, j)
        * (lead as f64).powf(-jf / kf)
        * len as f64
        * (base as f64).powf((jf - kf) / kf)
}

/// `|x^j − y^j − ((x−y)² Σ_{ℓ=1}^{j−1} ℓ x^{j−1−ℓ} y^{ℓ−1} + j(x−y)y^{j−1})|`.
pub fn telescope_residual(x: Complex64, y: Complex64, j: u32) -> f64 {
    assert!(j >= 2, "identity needs j >= 2");
    let d = x - y;
    let inner: Complex64 = (1..j)
        .map(|l| l as f64 * x.powu(j - 1 - l) * y.powu(l - 1))
        .sum();
    let rhs = d * d * inner + j as f64 * d * y.powu(j - 1);
    (x.powu(j) - y.powu(j) - rhs).norm()
}
