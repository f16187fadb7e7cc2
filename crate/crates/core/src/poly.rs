//! Dense integer polynomials in one variable.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// Coefficients in ascending degree order, with trailing zeros trimmed.
#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct IntPolynomial {
    coeffs: Vec<i64>,
}

impl IntPolynomial {
    pub fn new(mut coeffs: Vec<i64>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        IntPolynomial { coeffs }
    }

    pub fn zero() -> Self {
        IntPolynomial { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::monomial(1, 0)
    }

    pub fn monomial(c: i64, degree: usize) -> Self {
        let mut coeffs = vec![0; degree + 1];
        coeffs[degree] = c;
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn coeff(&self, d: usize) -> i64 {
        self.coeffs.get(d).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, t: i128) -> i128 {
        self.coeffs
            .iter()
            .rev()
            .fold(0i128, |acc, &c| acc * t + c as i128)
    }

    pub fn sum_coeffs(&self) -> i128 {
        self.coeffs.iter().map(|&c| c as i128).sum()
    }

    /// Multiplies by `t^k`.
    pub fn shift(&self, k: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![0; k];
        coeffs.extend_from_slice(&self.coeffs);
        IntPolynomial { coeffs }
    }

    /// `t^d * p(1/t)`; requires `d >= deg p`.
    pub fn reflect(&self, d: usize) -> Self {
        assert!(self.degree().map_or(true, |g| g <= d));
        let coeffs = (0..=d).map(|k| self.coeff(d - k)).collect();
        Self::new(coeffs)
    }

    /// `t (t-1) ... (t-k+1)`.
    pub fn falling_factorial(k: usize) -> Self {
        (0..k).fold(Self::one(), |acc, r| {
            acc * IntPolynomial::new(vec![-(r as i64), 1])
        })
    }

    pub fn is_palindromic(&self) -> bool {
        let c = &self.coeffs;
        let lo = c.iter().position(|&x| x != 0).unwrap_or(0);
        let core = &c[lo..];
        core.iter().eq(core.iter().rev())
    }

    pub fn is_unimodal(&self) -> bool {
        let c = &self.coeffs;
        let mut k = 0;
        while k + 1 < c.len() && c[k] <= c[k + 1] {
            k += 1;
        }
        while k + 1 < c.len() && c[k] >= c[k + 1] {
            k += 1;
        }
        k + 1 >= c.len()
    }
}

impl Add for &IntPolynomial {
    type Output = IntPolynomial;

    fn add(self, rhs: &IntPolynomial) -> IntPolynomial {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        IntPolynomial::new((0..len).map(|d| self.coeff(d) + rhs.coeff(d)).collect())
    }
}

impl Sub for &IntPolynomial {
    type Output = IntPolynomial;

    fn sub(self, rhs: &IntPolynomial) -> IntPolynomial {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        IntPolynomial::new((0..len).map(|d| self.coeff(d) - rhs.coeff(d)).collect())
    }
}

impl Mul for &IntPolynomial {
    type Output = IntPolynomial;

    fn mul(self, rhs: &IntPolynomial) -> IntPolynomial {
        if self.is_zero() || rhs.is_zero() {
            return IntPolynomial::zero();
        }
        let mut out = vec![0i64; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (a, &x) in self.coeffs.iter().enumerate() {
            for (b, &y) in rhs.coeffs.iter().enumerate() {
                out[a + b] += x * y;
            }
        }
        IntPolynomial::new(out)
    }
}

impl Neg for &IntPolynomial {
    type Output = IntPolynomial;

    fn neg(self) -> IntPolynomial {
        IntPolynomial::new(self.coeffs.iter().map(|&c| -c).collect())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for IntPolynomial {
            type Output = IntPolynomial;
            fn $m(self, rhs: IntPolynomial) -> IntPolynomial {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl fmt::Display for IntPolynomial {
    /// Bracketed ascending coefficient list, e.g. `[1,3,5,4,1]`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coeffs.iter().map(i64::to_string).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

impl fmt::Debug for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic() {
        let a = IntPolynomial::new(vec![1, 1]);
        let sq = &a * &a;
        assert_eq!(sq.coeffs(), &[1, 2, 1]);
        assert!((&sq - &sq).is_zero());
        assert_eq!(sq.eval(3), 16);
        assert_eq!(IntPolynomial::new(vec![0, 0]).degree(), None);
        assert_eq!(a.shift(2).coeffs(), &[0, 0, 1, 1]);
        assert_eq!(IntPolynomial::new(vec![1, 2]).reflect(3).coeffs(), &[0, 0, 2, 1]);
    }

    #[test]
    fn falling_factorials() {
        let f3 = IntPolynomial::falling_factorial(3);
        assert_eq!(f3.coeffs(), &[0, 2, -3, 1]);
        for t in 0..6 {
            assert_eq!(f3.eval(t), t * (t - 1) * (t - 2));
        }
    }

    #[test]
    fn shape_predicates() {
        assert!(IntPolynomial::new(vec![1, 3, 5, 4, 1]).is_unimodal());
        assert!(!IntPolynomial::new(vec![1, 3, 5, 4, 1]).is_palindromic());
        assert!(IntPolynomial::new(vec![0, 1, 2, 1]).is_palindromic());
        assert!(!IntPolynomial::new(vec![2, 1, 2]).is_unimodal());
    }

    #[test]
    fn display_and_serde() {
        let p = IntPolynomial::new(vec![1, 2, 1]);
        assert_eq!(p.to_string(), "[1,2,1]");
        let js = serde_json::to_string(&p).unwrap();
        assert_eq!(js, r#"{"coeffs":[1,2,1]}"#);
        let back: IntPolynomial = serde_json::from_str(&js).unwrap();
        assert_eq!(back, p);
    }
}
