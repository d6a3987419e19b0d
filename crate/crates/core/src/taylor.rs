//! Truncated bivariate Taylor polynomials.
//!
//! A [`Taylor`] stores the coefficients `c[i][j]` of
//! `f(u0 + du, v0 + dv) = Σ c[i][j] du^i dv^j` for `i + j <= order`.
//! Arithmetic truncates at the smaller operand order, so evaluating a
//! closed-form chart on two seeded variables produces its exact partial
//! derivatives (forward-mode differentiation to high order).

use core::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

/// Highest total degree a [`Taylor`] can carry.
pub const MAX_ORDER: usize = 6;

const CAPACITY: usize = coeff_count(MAX_ORDER);

const FACTORIAL: [f64; MAX_ORDER + 1] = [1.0, 1.0, 2.0, 6.0, 24.0, 120.0, 720.0];

/// Number of coefficients of total degree at most `order`.
#[inline]
pub const fn coeff_count(order: usize) -> usize {
    (order + 1) * (order + 2) / 2
}

/// Storage slot of the monomial `du^i dv^j`.
#[inline]
pub const fn index(i: usize, j: usize) -> usize {
    let d = i + j;
    d * (d + 1) / 2 + j
}

#[inline]
pub(crate) fn factorial(n: usize) -> f64 {
    FACTORIAL[n]
}

/// Truncated Taylor expansion of a scalar function of two parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Taylor {
    order: usize,
    c: [f64; CAPACITY],
}

/// A 3-vector whose components are Taylor expansions.
pub type TVec3 = [Taylor; 3];

impl Taylor {
    pub fn zero(order: usize) -> Self {
        assert!(order <= MAX_ORDER, "Taylor order {order} exceeds {MAX_ORDER}");
        Self {
            order,
            c: [0.0; CAPACITY],
        }
    }

    pub fn constant(value: f64, order: usize) -> Self {
        let mut t = Self::zero(order);
        t.c[0] = value;
        t
    }

    /// The first parameter, seeded at `u0`.
    pub fn var_u(u0: f64, order: usize) -> Self {
        let mut t = Self::constant(u0, order);
        if order >= 1 {
            t.c[index(1, 0)] = 1.0;
        }
        t
    }

    /// The second parameter, seeded at `v0`.
    pub fn var_v(v0: f64, order: usize) -> Self {
        let mut t = Self::constant(v0, order);
        if order >= 1 {
            t.c[index(0, 1)] = 1.0;
        }
        t
    }

    /// Builds an expansion from partial derivatives `∂u^i ∂v^j f`.
    pub fn from_partials(order: usize, mut partial: impl FnMut(usize, usize) -> f64) -> Self {
        let mut t = Self::zero(order);
        for d in 0..=order {
            for j in 0..=d {
                let i = d - j;
                t.c[index(i, j)] = partial(i, j) / (factorial(i) * factorial(j));
            }
        }
        t
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// Coefficient of `du^i dv^j`; zero beyond the stored order.
    #[inline]
    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        if i + j > self.order {
            0.0
        } else {
            self.c[index(i, j)]
        }
    }

    /// Partial derivative `∂u^i ∂v^j` at the expansion point.
    #[inline]
    pub fn partial(&self, i: usize, j: usize) -> f64 {
        self.coeff(i, j) * factorial(i) * factorial(j)
    }

    pub fn is_finite(&self) -> bool {
        self.c[..coeff_count(self.order)].iter().all(|x| x.is_finite())
    }

    pub fn truncate(&self, order: usize) -> Self {
        let order = order.min(self.order);
        let mut t = Self::zero(order);
        let n = coeff_count(order);
        t.c[..n].copy_from_slice(&self.c[..n]);
        t
    }

    pub fn with_value(mut self, value: f64) -> Self {
        self.c[0] = value;
        self
    }

    /// Derivative in the first parameter. Loses one order; an order-0
    /// input yields an order-0 zero.
    pub fn d_du(&self) -> Self {
        let order = self.order.saturating_sub(1);
        let mut t = Self::zero(order);
        if self.order == 0 {
            return t;
        }
        for d in 0..=order {
            for j in 0..=d {
                let i = d - j;
                t.c[index(i, j)] = (i + 1) as f64 * self.c[index(i + 1, j)];
            }
        }
        t
    }

    /// Derivative in the second parameter.
    pub fn d_dv(&self) -> Self {
        let order = self.order.saturating_sub(1);
        let mut t = Self::zero(order);
        if self.order == 0 {
            return t;
        }
        for d in 0..=order {
            for j in 0..=d {
                let i = d - j;
                t.c[index(i, j)] = (j + 1) as f64 * self.c[index(i, j + 1)];
            }
        }
        t
    }

    pub fn scale(mut self, s: f64) -> Self {
        for x in &mut self.c[..coeff_count(self.order)] {
            *x *= s;
        }
        self
    }

    /// `g ∘ self` where `g_coeffs[k] = g^(k)(self.value()) / k!`.
    ///
    /// `g_coeffs` must cover at least `self.order() + 1` terms.
    pub fn compose(&self, g_coeffs: &[f64]) -> Self {
        let n = self.order;
        debug_assert!(g_coeffs.len() > n);
        let delta = self.with_value(0.0);
        let mut r = Self::constant(g_coeffs[n], n);
        for k in (0..n).rev() {
            r = r * delta;
            r.c[0] += g_coeffs[k];
        }
        r
    }

    pub fn recip(&self) -> Self {
        let x0 = self.value();
        let mut g = [0.0; MAX_ORDER + 1];
        let inv = 1.0 / x0;
        let mut p = inv;
        for (k, gk) in g.iter_mut().enumerate().take(self.order + 1) {
            *gk = if k % 2 == 0 { p } else { -p };
            p *= inv;
        }
        self.compose(&g)
    }

    fn power_series(&self, p: f64, g0: f64) -> Self {
        let x0 = self.value();
        let mut g = [0.0; MAX_ORDER + 1];
        g[0] = g0;
        for k in 1..=self.order {
            g[k] = g[k - 1] * (p - (k - 1) as f64) / (k as f64 * x0);
        }
        self.compose(&g)
    }

    /// Real power; the expansion point must be positive unless `p` is a
    /// non-negative integer.
    pub fn powf(&self, p: f64) -> Self {
        if p == 0.0 {
            return Self::constant(1.0, self.order);
        }
        if libm::trunc(p) == p && libm::fabs(p) <= 64.0 {
            return self.powi(p as i32);
        }
        self.power_series(p, libm::pow(self.value(), p))
    }

    pub fn powi(&self, n: i32) -> Self {
        if n < 0 {
            return self.powi(-n).recip();
        }
        let mut base = *self;
        let mut acc = Self::constant(1.0, self.order);
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            e >>= 1;
            if e > 0 {
                base = base * base;
            }
        }
        acc
    }

    pub fn sqrt(&self) -> Self {
        self.power_series(0.5, libm::sqrt(self.value()))
    }

    pub fn exp(&self) -> Self {
        let e = libm::exp(self.value());
        let mut g = [0.0; MAX_ORDER + 1];
        for (k, gk) in g.iter_mut().enumerate().take(self.order + 1) {
            *gk = e / factorial(k);
        }
        self.compose(&g)
    }

    pub fn ln(&self) -> Self {
        let x0 = self.value();
        let mut g = [0.0; MAX_ORDER + 1];
        g[0] = libm::log(x0);
        let mut p = 1.0;
        for (k, gk) in g.iter_mut().enumerate().take(self.order + 1).skip(1) {
            p /= x0;
            let s = if k % 2 == 1 { 1.0 } else { -1.0 };
            *gk = s * p / k as f64;
        }
        self.compose(&g)
    }

    pub fn sin(&self) -> Self {
        let (s, c) = (libm::sin(self.value()), libm::cos(self.value()));
        let cycle = [s, c, -s, -c];
        let mut g = [0.0; MAX_ORDER + 1];
        for (k, gk) in g.iter_mut().enumerate().take(self.order + 1) {
            *gk = cycle[k % 4] / factorial(k);
        }
        self.compose(&g)
    }

    pub fn cos(&self) -> Self {
        let (s, c) = (libm::sin(self.value()), libm::cos(self.value()));
        let cycle = [c, -s, -c, s];
        let mut g = [0.0; MAX_ORDER + 1];
        for (k, gk) in g.iter_mut().enumerate().take(self.order + 1) {
            *gk = cycle[k % 4] / factorial(k);
        }
        self.compose(&g)
    }

    /// `|self|`, valid away from a zero of the expansion point.
    pub fn abs(&self) -> Self {
        if self.value() < 0.0 {
            -*self
        } else {
            *self
        }
    }

    /// Treats `self` as a polynomial in two displacements and substitutes
    /// `(a - a0, b - b0)`, i.e. evaluates the expansion of some `g(x, y)`
    /// about `(a0, b0)` along the expansions `a` and `b`.
    ///
    /// The result is exact to order `min(self.order, a.order, b.order)`.
    pub fn substitute(&self, a: &Taylor, b: &Taylor) -> Self {
        let m = a.order.min(b.order).min(self.order);
        let da = a.truncate(m).with_value(0.0);
        let db = b.truncate(m).with_value(0.0);
        let mut pa = [Self::constant(1.0, m); MAX_ORDER + 1];
        let mut pb = [Self::constant(1.0, m); MAX_ORDER + 1];
        for k in 1..=m {
            pa[k] = pa[k - 1] * da;
            pb[k] = pb[k - 1] * db;
        }
        let mut out = Self::zero(m);
        for d in 0..=m {
            for j in 0..=d {
                let i = d - j;
                let c = self.c[index(i, j)];
                if c != 0.0 {
                    out += (pa[i] * pb[j]).scale(c);
                }
            }
        }
        out
    }
}

impl Add for Taylor {
    type Output = Taylor;
    fn add(self, rhs: Taylor) -> Taylor {
        let order = self.order.min(rhs.order);
        let mut t = self.truncate(order);
        for k in 0..coeff_count(order) {
            t.c[k] += rhs.c[k];
        }
        t
    }
}

impl Sub for Taylor {
    type Output = Taylor;
    fn sub(self, rhs: Taylor) -> Taylor {
        let order = self.order.min(rhs.order);
        let mut t = self.truncate(order);
        for k in 0..coeff_count(order) {
            t.c[k] -= rhs.c[k];
        }
        t
    }
}

impl AddAssign for Taylor {
    fn add_assign(&mut self, rhs: Taylor) {
        *self = *self + rhs;
    }
}

impl SubAssign for Taylor {
    fn sub_assign(&mut self, rhs: Taylor) {
        *self = *self - rhs;
    }
}

impl Mul for Taylor {
    type Output = Taylor;
    fn mul(self, rhs: Taylor) -> Taylor {
        let order = self.order.min(rhs.order);
        let mut t = Taylor::zero(order);
        for d in 0..=order {
            for j in 0..=d {
                let i = d - j;
                let mut s = 0.0;
                for a in 0..=i {
                    for b in 0..=j {
                        s += self.c[index(a, b)] * rhs.c[index(i - a, j - b)];
                    }
                }
                t.c[index(i, j)] = s;
            }
        }
        t
    }
}

impl Div for Taylor {
    type Output = Taylor;
    fn div(self, rhs: Taylor) -> Taylor {
        self * rhs.recip()
    }
}

impl Neg for Taylor {
    type Output = Taylor;
    fn neg(self) -> Taylor {
        self.scale(-1.0)
    }
}

impl Add<f64> for Taylor {
    type Output = Taylor;
    fn add(mut self, rhs: f64) -> Taylor {
        self.c[0] += rhs;
        self
    }
}

impl Sub<f64> for Taylor {
    type Output = Taylor;
    fn sub(mut self, rhs: f64) -> Taylor {
        self.c[0] -= rhs;
        self
    }
}

impl Mul<f64> for Taylor {
    type Output = Taylor;
    fn mul(self, rhs: f64) -> Taylor {
        self.scale(rhs)
    }
}

impl Div<f64> for Taylor {
    type Output = Taylor;
    fn div(self, rhs: f64) -> Taylor {
        self.scale(1.0 / rhs)
    }
}

pub fn tdot(a: &TVec3, b: &TVec3) -> Taylor {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn tcross(a: &TVec3, b: &TVec3) -> TVec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn tscale(a: &TVec3, s: &Taylor) -> TVec3 {
    [a[0] * *s, a[1] * *s, a[2] * *s]
}

pub fn tadd(a: &TVec3, b: &TVec3) -> TVec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn tsub(a: &TVec3, b: &TVec3) -> TVec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn tvalue(a: &TVec3) -> [f64; 3] {
    [a[0].value(), a[1].value(), a[2].value()]
}

pub fn ttruncate(a: &TVec3, order: usize) -> TVec3 {
    [a[0].truncate(order), a[1].truncate(order), a[2].truncate(order)]
}

pub fn td_du(a: &TVec3) -> TVec3 {
    [a[0].d_du(), a[1].d_du(), a[2].d_du()]
}

pub fn td_dv(a: &TVec3) -> TVec3 {
    [a[0].d_dv(), a[1].d_dv(), a[2].d_dv()]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn product_of_variables() {
        let u = Taylor::var_u(2.0, 4);
        let v = Taylor::var_v(3.0, 4);
        let p = u * u * v;
        assert_eq!(p.value(), 12.0);
        assert_eq!(p.partial(1, 0), 12.0);
        assert_eq!(p.partial(0, 1), 4.0);
        assert_eq!(p.partial(2, 0), 6.0);
        assert_eq!(p.partial(1, 1), 4.0);
        assert_eq!(p.partial(2, 1), 2.0);
        assert_eq!(p.partial(3, 0), 0.0);
    }

    #[test]
    fn elementary_functions_match_closed_forms() {
        let x = 0.7;
        let u = Taylor::var_u(x, 5);
        let e = u.exp();
        for k in 0..=5 {
            assert!(close(e.partial(k, 0), libm::exp(x), 1e-14));
        }
        let s = u.sin();
        assert!(close(s.partial(3, 0), -libm::cos(x), 1e-14));
        assert!(close(s.partial(4, 0), libm::sin(x), 1e-14));
        let l = u.ln();
        // d^4/dx^4 ln x = -6 / x^4
        assert!(close(l.partial(4, 0), -6.0 / x.powi(4), 1e-13));
        let r = u.sqrt();
        // d^3/dx^3 sqrt x = 3/8 x^(-5/2)
        assert!(close(r.partial(3, 0), 0.375 * x.powf(-2.5), 1e-13));
        let q = u.recip();
        assert!(close(q.partial(2, 0), 2.0 / x.powi(3), 1e-13));
        let p = u.powf(-1.5);
        assert!(close(p.partial(2, 0), -1.5 * -2.5 * x.powf(-3.5), 1e-13));
    }

    #[test]
    fn derivative_lowers_order() {
        let u = Taylor::var_u(1.0, 3);
        let v = Taylor::var_v(-2.0, 3);
        let f = (u * v).sin();
        let fu = f.d_du();
        assert_eq!(fu.order(), 2);
        assert!(close(fu.value(), f.partial(1, 0), 1e-15));
        assert!(close(fu.partial(1, 1), f.partial(2, 1), 1e-14));
        assert!(close(f.d_dv().partial(0, 2), f.partial(0, 3), 1e-14));
    }

    #[test]
    fn substitute_reproduces_composition() {
        // g(x, y) = x^2 y expanded about (a0, b0), then substituted along a, b.
        let (a0, b0) = (1.3, -0.4);
        let gx = Taylor::var_u(a0, 3);
        let gy = Taylor::var_v(b0, 3);
        let g = gx * gx * gy;
        let u = Taylor::var_u(0.2, 3);
        let v = Taylor::var_v(0.5, 3);
        let a = (u * v).exp().scale(a0 / libm::exp(0.1));
        let b = (u - v).scale(b0 / (0.2 - 0.5));
        let direct = a * a * b;
        let via = g.substitute(&a, &b);
        for d in 0..=3 {
            for j in 0..=d {
                assert!(close(via.coeff(d - j, j), direct.coeff(d - j, j), 1e-13));
            }
        }
    }

    #[test]
    fn division_inverts_multiplication() {
        let u = Taylor::var_u(0.3, 6);
        let v = Taylor::var_v(0.9, 6);
        let a = u.cos() + v * v;
        let b = (u * v).exp() + 1.0;
        let q = (a * b) / b;
        for k in 0..coeff_count(6) {
            assert!((q.c[k] - a.c[k]).abs() < 1e-13);
        }
    }
}
