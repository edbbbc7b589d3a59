//! Forward-mode differentiation.
//!
//! Two layers nest:
//!
//! * [`Dual`] carries one directional derivative, used for derivatives in the
//!   breather parameters (`α`, `β`).
//! * [`Series2`] is a truncated complex Taylor expansion in two phase
//!   variables `(y₁, y₂)` with coefficients of any [`Real`] scalar. Every
//!   breather quantity depends on `(t, x, x₁, x₂)` only through
//!   `y₁ = x + δt + x₁` and `y₂ = x + γt + x₂`, so one expansion yields all
//!   mixed derivatives in those four variables.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

pub trait Real:
    Copy
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn cst(v: f64) -> Self;
    /// Primal value.
    fn val(self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn sinh(self) -> Self;
    fn cosh(self) -> Self;
    fn exp(self) -> Self;
    fn sqrt(self) -> Self;
    fn ln(self) -> Self;
    fn atan2(self, x: Self) -> Self;

    fn scale(self, s: f64) -> Self {
        self * Self::cst(s)
    }
}

impl Real for f64 {
    fn cst(v: f64) -> Self {
        v
    }
    fn val(self) -> f64 {
        self
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn sinh(self) -> Self {
        f64::sinh(self)
    }
    fn cosh(self) -> Self {
        f64::cosh(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn atan2(self, x: Self) -> Self {
        f64::atan2(self, x)
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
}

/// `v + d ε` with `ε² = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Dual {
    pub v: f64,
    pub d: f64,
}

impl Dual {
    pub fn new(v: f64, d: f64) -> Self {
        Self { v, d }
    }

    pub fn variable(v: f64) -> Self {
        Self { v, d: 1.0 }
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, o: Dual) -> Dual {
        Dual::new(self.v + o.v, self.d + o.d)
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, o: Dual) -> Dual {
        Dual::new(self.v - o.v, self.d - o.d)
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        Dual::new(self.v * o.v, self.d * o.v + self.v * o.d)
    }
}

impl Div for Dual {
    type Output = Dual;
    fn div(self, o: Dual) -> Dual {
        let q = self.v / o.v;
        Dual::new(q, (self.d - q * o.d) / o.v)
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual::new(-self.v, -self.d)
    }
}

impl Real for Dual {
    fn cst(v: f64) -> Self {
        Dual::new(v, 0.0)
    }
    fn val(self) -> f64 {
        self.v
    }
    fn sin(self) -> Self {
        Dual::new(self.v.sin(), self.d * self.v.cos())
    }
    fn cos(self) -> Self {
        Dual::new(self.v.cos(), -self.d * self.v.sin())
    }
    fn sinh(self) -> Self {
        Dual::new(self.v.sinh(), self.d * self.v.cosh())
    }
    fn cosh(self) -> Self {
        Dual::new(self.v.cosh(), self.d * self.v.sinh())
    }
    fn exp(self) -> Self {
        let e = self.v.exp();
        Dual::new(e, self.d * e)
    }
    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        Dual::new(s, self.d / (2.0 * s))
    }
    fn ln(self) -> Self {
        Dual::new(self.v.ln(), self.d / self.v)
    }
    fn atan2(self, x: Self) -> Self {
        let r2 = self.v * self.v + x.v * x.v;
        Dual::new(self.v.atan2(x.v), (x.v * self.d - self.v * x.d) / r2)
    }
    fn scale(self, s: f64) -> Self {
        Dual::new(self.v * s, self.d * s)
    }
}

pub const MAX_ORDER: usize = 7;
const STRIDE: usize = MAX_ORDER + 1;
const SLOTS: usize = STRIDE * STRIDE;

/// Truncated complex Taylor series in `(y₁, y₂)` about a base point.
///
/// Slot `(i, j)` holds the coefficient of `h₁ⁱ h₂ʲ` (not the derivative);
/// only `i + j ≤ order` is meaningful.
#[derive(Debug, Clone, Copy)]
pub struct Series2<T: Real> {
    order: usize,
    re: [T; SLOTS],
    im: [T; SLOTS],
}

#[inline]
fn slot(i: usize, j: usize) -> usize {
    i * STRIDE + j
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |a, k| a * k as f64)
}

impl<T: Real> Series2<T> {
    pub fn zero(order: usize) -> Self {
        assert!(order <= MAX_ORDER, "series order {order} exceeds {MAX_ORDER}");
        Self { order, re: [T::cst(0.0); SLOTS], im: [T::cst(0.0); SLOTS] }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeff(&self, i: usize, j: usize) -> (T, T) {
        (self.re[slot(i, j)], self.im[slot(i, j)])
    }

    pub fn set(&mut self, i: usize, j: usize, re: T, im: T) {
        if i + j <= self.order {
            self.re[slot(i, j)] = re;
            self.im[slot(i, j)] = im;
        }
    }

    pub fn add_real(&mut self, i: usize, j: usize, v: T) {
        if i + j <= self.order {
            let k = slot(i, j);
            self.re[k] = self.re[k] + v;
        }
    }

    pub fn add_imag(&mut self, i: usize, j: usize, v: T) {
        if i + j <= self.order {
            let k = slot(i, j);
            self.im[k] = self.im[k] + v;
        }
    }

    /// Degree-by-degree solve of `s · Φ' = s'` using the Euler operator:
    /// `m s₀ Φ_m = m s_m − Σ_{k=1}^{m-1} k Φ_k s_{m−k}` on homogeneous parts.
    /// The constant term is the principal complex logarithm.
    pub fn ln(&self) -> Self {
        let n = self.order;
        let mut out = Self::zero(n);
        let (a, b) = (self.re[0], self.im[0]);
        let r2 = a * a + b * b;
        out.re[0] = r2.ln().scale(0.5);
        out.im[0] = b.atan2(a);
        // 1/s₀
        let (ia, ib) = (a / r2, -b / r2);
        for m in 1..=n {
            for i in 0..=m {
                let j = m - i;
                let (mut acc_re, mut acc_im) =
                    (self.re[slot(i, j)].scale(m as f64), self.im[slot(i, j)].scale(m as f64));
                for k in 1..m {
                    // homogeneous parts: Φ_k (degree k) times s_{m−k}
                    let lo = i.saturating_sub(m - k);
                    let hi = i.min(k);
                    for i1 in lo..=hi {
                        let j1 = k - i1;
                        let i2 = i - i1;
                        let j2 = (m - k) - i2;
                        let (pr, pi) = (out.re[slot(i1, j1)], out.im[slot(i1, j1)]);
                        let (sr, si) = (self.re[slot(i2, j2)], self.im[slot(i2, j2)]);
                        let kk = k as f64;
                        acc_re = acc_re - (pr * sr - pi * si).scale(kk);
                        acc_im = acc_im - (pr * si + pi * sr).scale(kk);
                    }
                }
                let inv_m = 1.0 / m as f64;
                out.re[slot(i, j)] = (acc_re * ia - acc_im * ib).scale(inv_m);
                out.im[slot(i, j)] = (acc_re * ib + acc_im * ia).scale(inv_m);
            }
        }
        out
    }

    /// `1/s` from `s₀ r_m = −Σ_{k=1}^{m} s_k r_{m−k}`.
    pub fn recip(&self) -> Self {
        let n = self.order;
        let mut out = Self::zero(n);
        let (a, b) = (self.re[0], self.im[0]);
        let r2 = a * a + b * b;
        let (ia, ib) = (a / r2, -b / r2);
        out.re[0] = ia;
        out.im[0] = ib;
        for m in 1..=n {
            for i in 0..=m {
                let j = m - i;
                let (mut acc_re, mut acc_im) = (T::cst(0.0), T::cst(0.0));
                for k in 1..=m {
                    let lo = i.saturating_sub(m - k);
                    let hi = i.min(k);
                    for i1 in lo..=hi {
                        let j1 = k - i1;
                        let i2 = i - i1;
                        let j2 = (m - k) - i2;
                        let (sr, si) = (self.re[slot(i1, j1)], self.im[slot(i1, j1)]);
                        let (rr, ri) = (out.re[slot(i2, j2)], out.im[slot(i2, j2)]);
                        acc_re = acc_re - (sr * rr - si * ri);
                        acc_im = acc_im - (sr * ri + si * rr);
                    }
                }
                out.re[slot(i, j)] = acc_re * ia - acc_im * ib;
                out.im[slot(i, j)] = acc_re * ib + acc_im * ia;
            }
        }
        out
    }

    pub fn mul(&self, o: &Self) -> Self {
        let n = self.order.min(o.order);
        let mut out = Self::zero(n);
        for i1 in 0..=n {
            for j1 in 0..=(n - i1) {
                let (ar, ai) = (self.re[slot(i1, j1)], self.im[slot(i1, j1)]);
                for i2 in 0..=(n - i1 - j1) {
                    for j2 in 0..=(n - i1 - j1 - i2) {
                        let (br, bi) = (o.re[slot(i2, j2)], o.im[slot(i2, j2)]);
                        let k = slot(i1 + i2, j1 + j2);
                        out.re[k] = out.re[k] + (ar * br - ai * bi);
                        out.im[k] = out.im[k] + (ar * bi + ai * br);
                    }
                }
            }
        }
        out
    }

    /// Mixed partial `∂₁ⁱ ∂₂ʲ` at the base point.
    pub fn partial(&self, i: usize, j: usize) -> (T, T) {
        assert!(i + j <= self.order, "partial of order {} from a series of order {}", i + j, self.order);
        let f = factorial(i) * factorial(j);
        (self.re[slot(i, j)].scale(f), self.im[slot(i, j)].scale(f))
    }

    /// Applies a constant-coefficient operator `Σ c_ij ∂₁ⁱ∂₂ʲ`.
    pub fn apply(&self, op: &PhaseOperator<T>) -> (T, T) {
        let (mut r, mut im) = (T::cst(0.0), T::cst(0.0));
        for &(i, j, c) in &op.terms {
            let (a, b) = self.partial(i, j);
            r = r + c * a;
            im = im + c * b;
        }
        (r, im)
    }
}

/// A polynomial in `(∂₁, ∂₂)`, the image of `∂ₓᵃ ∂ₜᵇ ∂_{x₁}ᶜ ∂_{x₂}ᵈ`
/// under `∂ₓ = ∂₁ + ∂₂`, `∂ₜ = δ∂₁ + γ∂₂`, `∂_{x₁} = ∂₁`, `∂_{x₂} = ∂₂`.
#[derive(Debug, Clone)]
pub struct PhaseOperator<T: Real> {
    terms: Vec<(usize, usize, T)>,
}

impl<T: Real> PhaseOperator<T> {
    pub fn new(dx: usize, dt: usize, d1: usize, d2: usize, delta: T, gamma: T) -> Self {
        // dense coefficient table indexed by (i, j)
        let total = dx + dt + d1 + d2;
        let mut table = vec![vec![T::cst(0.0); total + 1]; total + 1];
        table[0][0] = T::cst(1.0);
        let mut deg = 0;
        let mul_by = |table: &mut Vec<Vec<T>>, deg: &mut usize, a: T, b: T| {
            let mut next = vec![vec![T::cst(0.0); total + 1]; total + 1];
            for i in 0..=*deg {
                for j in 0..=(*deg - i) {
                    let c = table[i][j];
                    next[i + 1][j] = next[i + 1][j] + c * a;
                    next[i][j + 1] = next[i][j + 1] + c * b;
                }
            }
            *table = next;
            *deg += 1;
        };
        for _ in 0..dx {
            mul_by(&mut table, &mut deg, T::cst(1.0), T::cst(1.0));
        }
        for _ in 0..dt {
            mul_by(&mut table, &mut deg, delta, gamma);
        }
        for _ in 0..d1 {
            mul_by(&mut table, &mut deg, T::cst(1.0), T::cst(0.0));
        }
        for _ in 0..d2 {
            mul_by(&mut table, &mut deg, T::cst(0.0), T::cst(1.0));
        }
        let mut terms = Vec::new();
        for i in 0..=total {
            terms.push((i, total - i, table[i][total - i]));
        }
        Self { terms }
    }
}
