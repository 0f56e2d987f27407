//! Truncated power series over any [`Scalar`].

use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Coefficients of `z^0 .. z^N`; everything beyond is dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSeries<T> {
    coeffs: Vec<T>,
}

impl<T: Scalar> PowerSeries<T> {
    pub fn new(mut coeffs: Vec<T>, order: usize) -> Self {
        coeffs.resize(order + 1, T::zero());
        PowerSeries { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        Self::new(Vec::new(), order)
    }

    pub fn constant(c: T, order: usize) -> Self {
        Self::new(vec![c], order)
    }

    /// Highest retained power.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    pub fn coeff(&self, k: usize) -> T {
        self.coeffs.get(k).cloned().unwrap_or_else(T::zero)
    }

    /// `(1 + a z)^alpha` by the generalized binomial theorem.
    pub fn binomial(a: T, alpha: T, order: usize) -> Self {
        let mut coeffs = Vec::with_capacity(order + 1);
        // binom(alpha, k) * a^k, built term to term
        let mut term = T::one();
        coeffs.push(term.clone());
        for k in 1..=order {
            let kk = T::from_usize(k).expect("index as scalar");
            term = term * (alpha.clone() - (kk.clone() - T::one())) * a.clone() / kk;
            coeffs.push(term.clone());
        }
        PowerSeries { coeffs }
    }

    pub fn scale(&self, c: &T) -> Self {
        PowerSeries { coeffs: self.coeffs.iter().map(|x| x.clone() * c.clone()).collect() }
    }

    /// Divides by `z^k`; the dropped low coefficients must be zero.
    pub fn shift_down(&self, k: usize) -> Result<Self> {
        if self.coeffs[..k.min(self.coeffs.len())].iter().any(|c| !c.is_zero()) {
            return Err(Error::Series(format!("cannot divide by z^{k}: low coefficients are nonzero")));
        }
        let order = self.order().saturating_sub(k);
        let rest = self.coeffs.get(k..).map(<[T]>::to_vec).unwrap_or_default();
        Ok(Self::new(rest, order))
    }

    /// `z^k` times the series, still truncated at the same order.
    pub fn shift_up(&self, k: usize) -> Self {
        let mut coeffs = vec![T::zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        coeffs.truncate(self.coeffs.len());
        PowerSeries { coeffs }
    }

    /// Multiplicative inverse; needs a nonzero constant term.
    pub fn reciprocal(&self) -> Result<Self> {
        let c0 = self.coeffs[0].clone();
        if c0.is_zero() {
            return Err(Error::Series("reciprocal of a series with zero constant term".into()));
        }
        let n = self.order();
        let mut inv: Vec<T> = Vec::with_capacity(n + 1);
        inv.push(T::one() / c0.clone());
        for k in 1..=n {
            let mut acc = T::zero();
            for j in 1..=k {
                acc = acc + self.coeffs[j].clone() * inv[k - j].clone();
            }
            inv.push(-acc / c0.clone());
        }
        Ok(PowerSeries { coeffs: inv })
    }

    pub fn truncate(&self, order: usize) -> Self {
        Self::new(self.coeffs.iter().take(order + 1).cloned().collect(), order)
    }
}

impl<T: Scalar> Add for &PowerSeries<T> {
    type Output = PowerSeries<T>;

    fn add(self, rhs: &PowerSeries<T>) -> PowerSeries<T> {
        let order = self.order().min(rhs.order());
        let coeffs = (0..=order).map(|k| self.coeffs[k].clone() + rhs.coeffs[k].clone()).collect();
        PowerSeries { coeffs }
    }
}

impl<T: Scalar> Sub for &PowerSeries<T> {
    type Output = PowerSeries<T>;

    fn sub(self, rhs: &PowerSeries<T>) -> PowerSeries<T> {
        let order = self.order().min(rhs.order());
        let coeffs = (0..=order).map(|k| self.coeffs[k].clone() - rhs.coeffs[k].clone()).collect();
        PowerSeries { coeffs }
    }
}

impl<T: Scalar> Mul for &PowerSeries<T> {
    type Output = PowerSeries<T>;

    fn mul(self, rhs: &PowerSeries<T>) -> PowerSeries<T> {
        let order = self.order().min(rhs.order());
        let coeffs = (0..=order)
            .map(|k| {
                (0..=k).fold(T::zero(), |acc, j| acc + self.coeffs[j].clone() * rhs.coeffs[k - j].clone())
            })
            .collect();
        PowerSeries { coeffs }
    }
}
