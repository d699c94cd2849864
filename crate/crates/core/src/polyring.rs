//! Integer polynomials `φ(n) = a_1 n + … + a_k n^k` with `a_k ≥ 1`.
//!
//! The constant term is always zero. Coefficients below the lead may be
//! negative, so `φ` need not be increasing on small `n`; see
//! [`IntPolynomial::monotone_threshold`].

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntPolynomial {
    /// `coeffs[h - 1] = a_h`.
    coeffs: Vec<i64>,
}

/// `η = φ − a_k n^k`, the part of `φ` below the leading monomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Eta {
    /// `φ` is the pure monomial `a_k n^k`.
    Zero,
    Poly { coeffs: Vec<i64>, degree: usize },
}

impl Eta {
    pub fn degree(&self) -> Option<usize> {
        match self {
            Eta::Zero => None,
            Eta::Poly { degree, .. } => Some(*degree),
        }
    }

    pub fn eval(&self, n: u64) -> Result<i128> {
        match self {
            Eta::Zero => Ok(0),
            Eta::Poly { coeffs, .. } => horner(coeffs, n),
        }
    }
}

fn horner(coeffs: &[i64], n: u64) -> Result<i128> {
    let x = n as i128;
    let mut acc: i128 = 0;
    for &a in coeffs.iter().rev() {
        acc = acc
            .checked_add(a as i128)
            .and_then(|v| v.checked_mul(x))
            .ok_or_else(|| Error::Overflow(format!("polynomial at n = {n}")))?;
    }
    Ok(acc)
}

impl IntPolynomial {
    pub fn new(coeffs: Vec<i64>) -> Result<Self> {
        match coeffs.last() {
            None => Err(Error::parse("polynomial", "no coefficients")),
            Some(&lead) if lead < 1 => Err(Error::parse(
                "polynomial",
                format!("leading coefficient must be >= 1, got {lead}"),
            )),
            Some(_) => Ok(Self { coeffs }),
        }
    }

    /// `lead · n^k`.
    pub fn monomial(k: usize, lead: i64) -> Result<Self> {
        if k == 0 {
            return Err(Error::parse("polynomial", "degree must be >= 1"));
        }
        let mut coeffs = vec![0; k];
        coeffs[k - 1] = lead;
        Self::new(coeffs)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    pub fn lead(&self) -> i64 {
        self.coeffs[self.coeffs.len() - 1]
    }

    /// Coefficients `a_1..a_k`, low degree first.
    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn is_monomial(&self) -> bool {
        self.coeffs[..self.coeffs.len() - 1].iter().all(|&a| a == 0)
    }

    /// Exact `φ(n)`; overflow of `i128` is reported rather than wrapped.
    pub fn eval(&self, n: u64) -> Result<i128> {
        horner(&self.coeffs, n)
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &a| (acc + a as f64) * x)
    }

    pub fn eta(&self) -> Eta {
        let lower = &self.coeffs[..self.coeffs.len() - 1];
        match lower.iter().rposition(|&a| a != 0) {
            None => Eta::Zero,
            Some(i) => Eta::Poly {
                coeffs: lower[..=i].to_vec(),
                degree: i + 1,
            },
        }
    }

    /// Smallest `n₀` with `φ(n+1) > φ(n)` for every `n ≥ n₀`.
    ///
    /// Scans the finite-difference table upward. Once every difference
    /// `Δ^i φ(n)`, `1 ≤ i < k`, is nonnegative with `Δφ(n) > 0`, all of them
    /// stay so (the `k`-th difference is the constant `k!·a_k > 0`), which
    /// certifies monotonicity from there on.
    pub fn monotone_threshold(&self) -> u64 {
        self.certified_table().0
    }

    /// `(n₀, c)`: the monotone threshold and the point `c ≥ n₀` from which all
    /// forward differences are certified nonnegative (so `φ` is also convex
    /// on integers past `c`).
    pub(crate) fn certified_table(&self) -> (u64, u64) {
        let k = self.degree();
        // diffs[i] = Δ^i φ(n), starting at n = 0.
        let mut diffs: Vec<i128> = (0..=k)
            .map(|i| {
                (0..=i)
                    .map(|t| {
                        let sign = if (i - t) % 2 == 0 { 1 } else { -1 };
                        sign * binom(i, t) * self.eval(t as u64).expect("small n")
                    })
                    .sum()
            })
            .collect();
        let mut last_bad: Option<u64> = None;
        let mut n: u64 = 0;
        loop {
            if diffs[1] <= 0 {
                last_bad = Some(n);
            } else if diffs.get(2..k).is_none_or(|d| d.iter().all(|&d| d >= 0)) {
                return (last_bad.map_or(0, |b| b + 1), n);
            }
            for i in 0..k {
                diffs[i] += diffs[i + 1];
            }
            n += 1;
        }
    }

    /// The real `x ≥ n₀` with `φ(x) = y`, by bisection.
    pub fn inverse_at(&self, y: f64) -> Result<f64> {
        let n0 = self.monotone_threshold() as f64;
        let floor = self.eval_f64(n0);
        if !(y >= floor) {
            return Err(Error::Domain(format!(
                "inverse of {self} at {y}: below φ(n₀) = {floor}"
            )));
        }
        let k = self.degree() as f64;
        let seed = (y.max(0.0) / self.lead() as f64).powf(1.0 / k);
        let mut lo = n0;
        let mut hi = seed.max(n0 + 1.0);
        while self.eval_f64(hi) < y {
            lo = hi;
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.eval_f64(mid) < y {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi.abs().max(1.0) {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Smallest integer `x ≥ n₀` with `φ(x) > y`: every `n ≥ x` has `φ(n) > y`.
    pub fn first_above(&self, y: i128) -> Result<u64> {
        let n0 = self.monotone_threshold();
        let mut x = if (y as f64) < self.eval_f64(n0 as f64) {
            n0
        } else {
            self.inverse_at(y as f64)?.floor().max(n0 as f64) as u64
        };
        while x > n0 && self.eval(x - 1)? > y {
            x -= 1;
        }
        while self.eval(x)? <= y {
            x += 1;
        }
        Ok(x)
    }
}

fn binom(n: usize, r: usize) -> i128 {
    (0..r).fold(1i128, |acc, i| acc * (n - i) as i128 / (i + 1) as i128)
}

impl fmt::Display for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coeffs.iter().map(i64::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for IntPolynomial {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let coeffs = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<i64>()
                    .map_err(|e| Error::parse("polynomial", format!("{t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(coeffs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p(s: &str) -> IntPolynomial {
        s.parse().unwrap()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(p("0,1").eval(3).unwrap(), 9);
        assert_eq!(p("1,1").eval(4).unwrap(), 20);
        assert_eq!(p("-2,0,1").eval(5).unwrap(), 115);
    }

    #[test]
    fn eval_reports_overflow() {
        let big = IntPolynomial::monomial(5, i64::MAX).unwrap();
        assert!(matches!(big.eval(u64::MAX), Err(Error::Overflow(_))));
    }

    #[test]
    fn eta_examples() {
        assert_eq!(
            p("1,1").eta(),
            Eta::Poly {
                coeffs: vec![1],
                degree: 1
            }
        );
        assert_eq!(p("0,0,1").eta(), Eta::Zero);
        assert_eq!(p("0,1,2").eta().degree(), Some(2));
    }

    #[test]
    fn monotone_threshold_examples() {
        assert_eq!(p("0,1").monotone_threshold(), 0);
        assert_eq!(p("0,0,1").monotone_threshold(), 0);
        // φ(1) = φ(2) = -2, φ(3) = 0: increasing from n = 2 on.
        assert_eq!(p("-3,1").monotone_threshold(), 2);
        assert_eq!(p("-10,0,1").monotone_threshold(), 2);
    }

    #[test]
    fn inverse_examples() {
        assert_relative_eq!(p("0,1").inverse_at(49.0).unwrap(), 7.0, max_relative = 1e-12);
        assert_relative_eq!(p("1,1").inverse_at(20.0).unwrap(), 4.0, max_relative = 1e-12);
        assert_relative_eq!(
            p("0,0,1").inverse_at(10.0).unwrap(),
            10f64.cbrt(),
            max_relative = 1e-12
        );
        assert!(matches!(p("-3,1").inverse_at(-5.0), Err(Error::Domain(_))));
    }

    #[test]
    fn first_above_brackets() {
        let phi = p("1,1");
        assert_eq!(phi.first_above(20).unwrap(), 5);
        assert_eq!(phi.first_above(19).unwrap(), 4);
        assert_eq!(p("-3,1").first_above(-100).unwrap(), 2);
    }

    #[test]
    fn parse_rejects_bad_lead() {
        assert!("1,0".parse::<IntPolynomial>().is_err());
        assert!("".parse::<IntPolynomial>().is_err());
        assert!("1,x".parse::<IntPolynomial>().is_err());
        assert_eq!(p(" 2, -1 ,3").to_string(), "2,-1,3");
    }

    #[test]
    fn strictly_increasing_past_threshold() {
        for s in ["0,1", "1,1", "-3,1", "5,-7,0,1", "0,-9,1", "-40,2"] {
            let phi = p(s);
            let n0 = phi.monotone_threshold();
            let mut prev = phi.eval(n0).unwrap();
            for n in n0 + 1..=n0 + 10_000 {
                let v = phi.eval(n).unwrap();
                assert!(v > prev, "{s} at {n}");
                prev = v;
            }
            if n0 > 0 {
                assert!(phi.eval(n0).unwrap() <= phi.eval(n0 - 1).unwrap());
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn poly() -> impl Strategy<Value = IntPolynomial> {
            (prop::collection::vec(-20i64..20, 0..4), 1i64..5).prop_map(|(mut c, lead)| {
                c.push(lead);
                IntPolynomial::new(c).unwrap()
            })
        }

        proptest! {
            #[test]
            fn inverse_round_trip(phi in poly(), dn in 0u64..2000) {
                let n = phi.monotone_threshold() + dn;
                let y = phi.eval(n).unwrap() as f64;
                let x = phi.inverse_at(y).unwrap();
                prop_assert!((x - n as f64).abs() <= 1e-9 * (n as f64).max(1.0));
            }

            #[test]
            fn eta_consistency(phi in poly(), n in 0u64..10_000) {
                let k = phi.degree() as u32;
                let lead_part = phi.lead() as i128 * (n as i128).pow(k);
                prop_assert_eq!(phi.eval(n).unwrap(), lead_part + phi.eta().eval(n).unwrap());
            }

            #[test]
            fn text_round_trip(phi in poly()) {
                prop_assert_eq!(phi.to_string().parse::<IntPolynomial>().unwrap(), phi);
            }
        }
    }
}
