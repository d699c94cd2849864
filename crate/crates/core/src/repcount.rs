//! Exact `R_{φ,j}(n)` on a window `[N+1, N+H]`.
//!
//! `R_{φ,j}(n)` sums `Λ(n_1)⋯Λ(n_j)` over ordered tuples of prime powers with
//! `φ(n_1) + ⋯ + φ(n_j) = n`. [`rep_brute`] enumerates the tuples and is the
//! oracle; [`rep_convolve`] forms the `j`-fold convolution of the weight
//! vector `w[m] = Σ_{φ(p) = m} Λ(p)`, capped at `N + H`.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::mangoldt::MangoldtTable;
use crate::polyring::IntPolynomial;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RepMethod {
    Brute,
    Convolution,
    Fft,
}

impl fmt::Display for RepMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RepMethod::Brute => "brute",
            RepMethod::Convolution => "convolution",
            RepMethod::Fft => "fft",
        })
    }
}

/// `R_{φ,j}(n)` for `n = N+1, …, N+H`.
#[derive(Clone, Debug)]
pub struct RepSeries {
    pub base: u64,
    pub len: u64,
    pub j: usize,
    pub phi: IntPolynomial,
    pub values: Vec<f64>,
    pub method: RepMethod,
}

impl RepSeries {
    /// `(n, R(n))` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &v)| (self.base + 1 + i as u64, v))
    }

    pub fn interval_sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// `Σ R(n) e^{−n/N}`.
    pub fn weighted_interval_sum(&self) -> f64 {
        let nb = self.base as f64;
        self.iter().map(|(n, v)| v * (-(n as f64) / nb).exp()).sum()
    }

    /// Sub-window of `len` entries starting at `N + 1 + start`.
    pub fn slice(&self, start: u64, len: u64) -> RepSeries {
        let s = start as usize;
        RepSeries {
            base: self.base + start,
            len,
            values: self.values[s..s + len as usize].to_vec(),
            ..self.clone()
        }
    }

    /// `n,R` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "n,R")?;
        for (n, v) in self.iter() {
            writeln!(w, "{n},{v:.16e}")?;
        }
        Ok(())
    }
}

/// Prime-power terms `(φ(p), Λ(p))` that can occur in a `j`-fold sum `≤ top`.
#[derive(Clone, Debug)]
pub(crate) struct Support {
    /// Sorted by `φ(p)`.
    pub terms: Vec<(i128, f64)>,
    /// `min(0, min_{n ≥ 2} φ(n))`.
    pub floor: i128,
}

/// Table limit needed for windows ending at `top` with `j` summands.
pub fn required_limit(phi: &IntPolynomial, j: usize, top: u64) -> Result<u64> {
    let (_, cap) = term_cap(phi, j, top)?;
    Ok(phi.first_above(cap)?.saturating_sub(1).max(1))
}

fn term_cap(phi: &IntPolynomial, j: usize, top: u64) -> Result<(i128, i128)> {
    let n0 = phi.monotone_threshold().max(2);
    let mut floor = 0i128;
    for n in 2..=n0 {
        floor = floor.min(phi.eval(n)?);
    }
    let cap = top as i128 - (j as i128 - 1) * floor;
    Ok((floor, cap))
}

pub(crate) fn support(
    phi: &IntPolynomial,
    j: usize,
    top: u64,
    table: &MangoldtTable,
) -> Result<Support> {
    let (floor, cap) = term_cap(phi, j, top)?;
    let need = phi.first_above(cap)?.saturating_sub(1).max(1);
    table.require(need)?;
    let mut terms = Vec::new();
    for (p, l) in table.prime_powers(need) {
        let v = phi.eval(p)?;
        if v <= cap {
            terms.push((v, l));
        }
    }
    terms.sort_by_key(|t| t.0);
    Ok(Support { terms, floor })
}

fn check_window(j: usize, base: u64, len: u64) -> Result<()> {
    if j == 0 {
        return Err(Error::Precondition("j must be >= 1".into()));
    }
    if len == 0 {
        return Err(Error::Precondition("window length H must be >= 1".into()));
    }
    if base == 0 {
        return Err(Error::Precondition("base point N must be >= 1".into()));
    }
    Ok(())
}

/// `R_{φ,j}(n)` on `[N+1, N+H]` by enumerating ordered tuples.
pub fn rep_brute(
    phi: &IntPolynomial,
    j: usize,
    base: u64,
    len: u64,
    table: &MangoldtTable,
) -> Result<RepSeries> {
    check_window(j, base, len)?;
    let lo = base as i128 + 1;
    let hi = base as i128 + len as i128;
    let sup = support(phi, j, base + len, table)?;
    let terms = &sup.terms;
    let min_v = terms.first().map_or(0, |t| t.0);

    fn rec(
        terms: &[(i128, f64)],
        left: usize,
        partial: i128,
        prod: f64,
        (lo, hi, min_v): (i128, i128, i128),
        out: &mut [f64],
    ) {
        if left == 0 {
            if partial >= lo && partial <= hi {
                out[(partial - lo) as usize] += prod;
            }
            return;
        }
        for &(v, l) in terms {
            let s = partial + v;
            if s + (left as i128 - 1) * min_v > hi {
                break;
            }
            rec(terms, left - 1, s, prod * l, (lo, hi, min_v), out);
        }
    }

    let partials: Vec<Vec<f64>> = terms
        .par_iter()
        .map(|&(v, l)| {
            let mut out = vec![0.0; len as usize];
            if v + (j as i128 - 1) * min_v <= hi {
                rec(terms, j - 1, v, l, (lo, hi, min_v), &mut out);
            }
            out
        })
        .collect();
    let mut values = vec![0.0; len as usize];
    for p in &partials {
        for (a, b) in values.iter_mut().zip(p) {
            *a += b;
        }
    }
    Ok(RepSeries {
        base,
        len,
        j,
        phi: phi.clone(),
        values,
        method: RepMethod::Brute,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConvolveMode {
    Direct,
    /// FFT folds where the round-off bound allows; direct otherwise.
    Fft,
    /// FFT only for windows ending past `10⁶` where it is also cheaper.
    Auto,
}

const FFT_AUTO_TOP: u64 = 1_000_000;
const CHUNK: usize = 4096;

/// `R_{φ,j}(n)` on `[N+1, N+H]` by `j`-fold truncated convolution.
pub fn rep_convolve(
    phi: &IntPolynomial,
    j: usize,
    base: u64,
    len: u64,
    table: &MangoldtTable,
) -> Result<RepSeries> {
    rep_convolve_with(phi, j, base, len, table, ConvolveMode::Auto)
}

pub fn rep_convolve_with(
    phi: &IntPolynomial,
    j: usize,
    base: u64,
    len: u64,
    table: &MangoldtTable,
    mode: ConvolveMode,
) -> Result<RepSeries> {
    check_window(j, base, len)?;
    let top = base + len;
    let sup = support(phi, j, top, table)?;
    // Index i holds the value i + off; every partial sum of at most j terms
    // that can still land in the window lies in [off, top - off].
    let off = j as i128 * sup.floor;
    let dense_len = (top as i128 - off + 1) as usize;
    let mut acc = vec![0.0; dense_len];
    for &(v, l) in &sup.terms {
        acc[(v - off) as usize] += l;
    }
    let shifted: Vec<(usize, f64)> = sup
        .terms
        .iter()
        .map(|&(v, l)| ((v - sup.floor) as usize, l))
        .collect();
    let shift = (-sup.floor) as usize;
    let window_start = (base as i128 + 1 - off) as usize;

    let fft_allowed = sup.floor == 0
        && match mode {
            ConvolveMode::Direct => false,
            ConvolveMode::Fft => true,
            ConvolveMode::Auto => {
                let p = (2 * dense_len).next_power_of_two() as f64;
                top >= FFT_AUTO_TOP && (dense_len * sup.terms.len()) as f64 > 20.0 * p * p.log2()
            }
        };
    let mut all_fft = j > 1 && fft_allowed;
    let mut planner = FftPlanner::new();
    let weights_dense = fft_allowed.then(|| {
        let mut w = vec![0.0; dense_len];
        for &(v, l) in &sup.terms {
            w[v as usize] += l;
        }
        w
    });

    for fold in 2..=j {
        let last = fold == j;
        let mut next = None;
        if let Some(w) = &weights_dense {
            let (c, bound) = fft_convolve_truncated(&mut planner, &acc, w, dense_len);
            let peak = c.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
            if bound <= 1e-9 * peak {
                // Nonzero entries are at least (log 2)^fold, far above the bound.
                next = Some(c.into_iter().map(|x| if x <= bound { 0.0 } else { x }).collect::<Vec<_>>());
            }
        }
        let next = match next {
            Some(n) => n,
            None => {
                all_fft = false;
                let range = if last { window_start..dense_len } else { 0..dense_len };
                direct_fold(&acc, &shifted, shift, range, dense_len)
            }
        };
        acc = next;
    }

    let values = acc[window_start..window_start + len as usize].to_vec();
    Ok(RepSeries {
        base,
        len,
        j,
        phi: phi.clone(),
        values,
        method: if all_fft {
            RepMethod::Fft
        } else {
            RepMethod::Convolution
        },
    })
}

/// `out[i] = Σ acc[i + shift − s]·l` over `(s, l)`, for `i` in `range`;
/// entries outside `range` are zero.
fn direct_fold(
    acc: &[f64],
    terms: &[(usize, f64)],
    shift: usize,
    range: std::ops::Range<usize>,
    dense_len: usize,
) -> Vec<f64> {
    let mut out = vec![0.0; dense_len];
    let start = range.start;
    out[range]
        .par_chunks_mut(CHUNK)
        .enumerate()
        .for_each(|(c, chunk)| {
            let first = start + c * CHUNK;
            for (k, slot) in chunk.iter_mut().enumerate() {
                let i = first + k + shift;
                let mut s = 0.0;
                for &(v, l) in terms {
                    if v > i {
                        break;
                    }
                    if let Some(a) = acc.get(i - v) {
                        s += a * l;
                    }
                }
                *slot = s;
            }
        });
    out
}

/// Linear convolution of `a` and `b` truncated to `len`, with an a-priori
/// bound on the floating-point error of any entry.
fn fft_convolve_truncated(
    planner: &mut FftPlanner<f64>,
    a: &[f64],
    b: &[f64],
    len: usize,
) -> (Vec<f64>, f64) {
    let p = (2 * len).next_power_of_two();
    let fwd: Arc<dyn rustfft::Fft<f64>> = planner.plan_fft_forward(p);
    let inv = planner.plan_fft_inverse(p);
    let mut fa: Vec<Complex64> = a.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fa.resize(p, Complex64::new(0.0, 0.0));
    let mut fb: Vec<Complex64> = b.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fb.resize(p, Complex64::new(0.0, 0.0));
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    inv.process(&mut fa);
    let scale = 1.0 / p as f64;
    let out = fa[..len].iter().map(|c| c.re * scale).collect();
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let bound = 8.0 * f64::EPSILON * (p as f64).log2() * norm(a) * norm(b);
    (out, bound)
}
