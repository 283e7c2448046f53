//! Prime-field arithmetic, roots of unity, and the finite-field Fourier
//! transform over GF(p).
//!
//! Moduli are restricted to primes below 2^31 so every product fits in a u64
//! without widening. Transforms of power-of-two order take the radix-2
//! recursion; every other order falls back to the definitional O(n^2) sum,
//! which doubles as an independent check path (`naive_dft`).

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("modulus {0} is not below 2^31")]
    ModulusTooLarge(u64),
    #[error("elements of GF({left}) and GF({right}) mixed in one expression")]
    MixedFields { left: u64, right: u64 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("GF({p}) has no root of unity of order {n}")]
    NoSuchRoot { n: u64, p: u64 },
    #[error("expected a vector of {expected} elements, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("duplicate interpolation point x = {x}")]
    DuplicatePoint { x: u64 },
}

const MAX_MODULUS: u64 = 1 << 31;

/// GF(p) for a prime p < 2^31, verified by trial division at construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self, FieldError> {
        if p >= MAX_MODULUS {
            return Err(FieldError::ModulusTooLarge(p));
        }
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        Ok(Self { p })
    }

    pub fn modulus(self) -> u64 {
        self.p
    }

    /// Bits needed to store one residue: ceil(log2 p).
    pub fn element_bits(self) -> usize {
        (64 - (self.p - 1).leading_zeros()) as usize
    }

    pub fn element(self, value: u64) -> FieldElement {
        FieldElement { value: value % self.p, field: self }
    }

    pub fn zero(self) -> FieldElement {
        self.element(0)
    }

    pub fn one(self) -> FieldElement {
        self.element(1)
    }

    // Raw residue arithmetic; operands must already be reduced.

    pub fn add(self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p { s - self.p } else { s }
    }

    pub fn sub(self, a: u64, b: u64) -> u64 {
        if a >= b { a - b } else { a + self.p - b }
    }

    pub fn mul(self, a: u64, b: u64) -> u64 {
        // a, b < 2^31, so the product fits in a u64.
        (a * b) % self.p
    }

    pub fn pow(self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1u64;
        base %= self.p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    pub fn inv(self, a: u64) -> Result<u64, FieldError> {
        if a % self.p == 0 {
            return Err(FieldError::DivisionByZero);
        }
        Ok(self.pow(a, self.p - 2))
    }

    /// Smallest generator of the multiplicative group, by residue value.
    pub fn smallest_generator(self) -> u64 {
        if self.p == 2 {
            return 1;
        }
        let factors = distinct_prime_factors(self.p - 1);
        (2..self.p)
            .find(|&g| factors.iter().all(|&q| self.pow(g, (self.p - 1) / q) != 1))
            .expect("every prime field has a generator")
    }
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    if p % 2 == 0 {
        return p == 2;
    }
    let mut d = 3;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

fn distinct_prime_factors(mut m: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= m {
        if m % d == 0 {
            out.push(d);
            while m % d == 0 {
                m /= d;
            }
        }
        d += 1;
    }
    if m > 1 {
        out.push(m);
    }
    out
}

/// A residue tagged with its field, so cross-field arithmetic is rejected
/// instead of silently wrapping with the wrong modulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: u64,
    field: PrimeField,
}

impl FieldElement {
    pub fn value(self) -> u64 {
        self.value
    }

    pub fn field(self) -> PrimeField {
        self.field
    }

    fn same_field(self, rhs: FieldElement) -> Result<PrimeField, FieldError> {
        if self.field != rhs.field {
            return Err(FieldError::MixedFields {
                left: self.field.p,
                right: rhs.field.p,
            });
        }
        Ok(self.field)
    }

    pub fn add(self, rhs: FieldElement) -> Result<FieldElement, FieldError> {
        let f = self.same_field(rhs)?;
        Ok(f.element(f.add(self.value, rhs.value)))
    }

    pub fn sub(self, rhs: FieldElement) -> Result<FieldElement, FieldError> {
        let f = self.same_field(rhs)?;
        Ok(f.element(f.sub(self.value, rhs.value)))
    }

    pub fn mul(self, rhs: FieldElement) -> Result<FieldElement, FieldError> {
        let f = self.same_field(rhs)?;
        Ok(f.element(f.mul(self.value, rhs.value)))
    }

    pub fn div(self, rhs: FieldElement) -> Result<FieldElement, FieldError> {
        let f = self.same_field(rhs)?;
        Ok(f.element(f.mul(self.value, f.inv(rhs.value)?)))
    }

    pub fn pow(self, exp: u64) -> FieldElement {
        self.field.element(self.field.pow(self.value, exp))
    }

    pub fn inv(self) -> Result<FieldElement, FieldError> {
        Ok(self.field.element(self.field.inv(self.value)?))
    }
}

/// A verified primitive n-th root of unity in a prime field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RootOfUnity {
    sigma: FieldElement,
    order: u64,
}

impl RootOfUnity {
    /// Deterministic choice: sigma = g^((p-1)/n) for the smallest generator g.
    /// Requires n | p - 1.
    pub fn find(field: PrimeField, n: u64) -> Result<Self, FieldError> {
        let p = field.modulus();
        if n == 0 || (p - 1) % n != 0 {
            return Err(FieldError::NoSuchRoot { n, p });
        }
        let g = field.smallest_generator();
        let sigma = field.element(field.pow(g, (p - 1) / n));
        Self::from_element(sigma, n)
    }

    /// Validates the order: sigma^n = 1 and sigma^(n/q) != 1 for every prime
    /// q | n, which together pin the multiplicative order to exactly n.
    pub fn from_element(sigma: FieldElement, n: u64) -> Result<Self, FieldError> {
        let field = sigma.field();
        let p = field.modulus();
        if n == 0 || sigma.pow(n).value() != 1 {
            return Err(FieldError::NoSuchRoot { n, p });
        }
        for q in distinct_prime_factors(n) {
            if sigma.pow(n / q).value() == 1 {
                return Err(FieldError::NoSuchRoot { n, p });
            }
        }
        Ok(Self { sigma, order: n })
    }

    pub fn sigma(&self) -> FieldElement {
        self.sigma
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn field(&self) -> PrimeField {
        self.sigma.field()
    }

    /// sigma^-1, itself a primitive root of the same order.
    pub fn inverse(&self) -> RootOfUnity {
        let inv = self.sigma.inv().expect("roots of unity are nonzero");
        RootOfUnity { sigma: inv, order: self.order }
    }

    /// sigma^k with k reduced modulo the order, so negative exponents work.
    pub fn pow_signed(&self, k: i64) -> FieldElement {
        let n = self.order as i64;
        let k = k.rem_euclid(n) as u64;
        self.sigma.pow(k)
    }
}

fn check_vector(input: &[FieldElement], root: &RootOfUnity) -> Result<(), FieldError> {
    let n = root.order() as usize;
    if input.len() != n {
        return Err(FieldError::LengthMismatch { expected: n, got: input.len() });
    }
    let p = root.field().modulus();
    for a in input {
        if a.field() != root.field() {
            return Err(FieldError::MixedFields { left: p, right: a.field().modulus() });
        }
    }
    Ok(())
}

/// beta_i = sum_j alpha_j sigma^(i j); radix-2 recursion for power-of-two
/// order, the definitional sum otherwise.
pub fn ffft(coeffs: &[FieldElement], root: &RootOfUnity) -> Result<Vec<FieldElement>, FieldError> {
    check_vector(coeffs, root)?;
    let field = root.field();
    let raw: Vec<u64> = coeffs.iter().map(|a| a.value()).collect();
    let n = raw.len();
    let out = if n.is_power_of_two() {
        radix2(&raw, root.sigma().value(), field)
    } else {
        definitional(&raw, root.sigma().value(), field)
    };
    Ok(out.into_iter().map(|v| field.element(v)).collect())
}

/// alpha_i = (1/n) sum_j beta_j sigma^(-i j).
pub fn ffft_inverse(
    values: &[FieldElement],
    root: &RootOfUnity,
) -> Result<Vec<FieldElement>, FieldError> {
    check_vector(values, root)?;
    let field = root.field();
    let n = root.order();
    // n | p - 1 forces n < p, so this cannot trip for a validated root; the
    // guard stays for elements constructed through other paths.
    let n_inv = field.inv(n % field.modulus())?;
    let forward = ffft(values, &root.inverse())?;
    Ok(forward.into_iter().map(|v| field.element(field.mul(v.value(), n_inv))).collect())
}

/// The O(n^2) definitional transform, kept free of the radix-2 path so the
/// two can be played against each other.
pub fn naive_dft(
    coeffs: &[FieldElement],
    root: &RootOfUnity,
) -> Result<Vec<FieldElement>, FieldError> {
    check_vector(coeffs, root)?;
    let field = root.field();
    let raw: Vec<u64> = coeffs.iter().map(|a| a.value()).collect();
    Ok(definitional(&raw, root.sigma().value(), field)
        .into_iter()
        .map(|v| field.element(v))
        .collect())
}

fn definitional(coeffs: &[u64], sigma: u64, field: PrimeField) -> Vec<u64> {
    let n = coeffs.len();
    let mut out = vec![0u64; n];
    for (i, slot) in out.iter_mut().enumerate() {
        let step = field.pow(sigma, i as u64);
        let mut x = 1u64;
        let mut acc = 0u64;
        for &c in coeffs {
            acc = field.add(acc, field.mul(c, x));
            x = field.mul(x, step);
        }
        *slot = acc;
    }
    out
}

fn radix2(coeffs: &[u64], sigma: u64, field: PrimeField) -> Vec<u64> {
    let n = coeffs.len();
    if n == 1 {
        return coeffs.to_vec();
    }
    let half = n / 2;
    let even: Vec<u64> = coeffs.iter().copied().step_by(2).collect();
    let odd: Vec<u64> = coeffs.iter().copied().skip(1).step_by(2).collect();
    let sigma_sq = field.mul(sigma, sigma);
    let e = radix2(&even, sigma_sq, field);
    let o = radix2(&odd, sigma_sq, field);
    let mut out = vec![0u64; n];
    let mut tw = 1u64;
    for i in 0..half {
        let t = field.mul(tw, o[i]);
        out[i] = field.add(e[i], t);
        out[i + half] = field.sub(e[i], t);
        tw = field.mul(tw, sigma);
    }
    out
}

/// Horner evaluation of sum_i coeffs[i] x^i.
pub fn poly_eval(coeffs: &[FieldElement], x: FieldElement) -> Result<FieldElement, FieldError> {
    let field = x.field();
    let mut acc = field.zero();
    for c in coeffs.iter().rev() {
        acc = acc.mul(x)?.add(*c)?;
    }
    Ok(acc)
}

/// Coefficients of the unique polynomial of degree < points.len() through the
/// given points. O(n^2) via synthetic division of the master product.
pub fn lagrange_interpolate(
    points: &[(FieldElement, FieldElement)],
) -> Result<Vec<FieldElement>, FieldError> {
    let n = points.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let field = points[0].0.field();
    for (x, y) in points {
        if x.field() != field || y.field() != field {
            return Err(FieldError::MixedFields {
                left: field.modulus(),
                right: if x.field() != field { x.field().modulus() } else { y.field().modulus() },
            });
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            if points[i].0 == points[j].0 {
                return Err(FieldError::DuplicatePoint { x: points[i].0.value() });
            }
        }
    }

    // master(X) = prod_i (X - x_i), degree n, built incrementally.
    let mut master = vec![0u64; n + 1];
    master[0] = 1;
    let mut deg = 0;
    for (x, _) in points {
        let xv = x.value();
        deg += 1;
        for k in (0..=deg).rev() {
            let lower = if k == 0 { 0 } else { master[k - 1] };
            master[k] = field.sub(lower, field.mul(master[k], xv));
        }
    }

    let mut result = vec![0u64; n];
    let mut quotient = vec![0u64; n];
    for (x, y) in points {
        let xv = x.value();
        // quotient = master / (X - x), by synthetic division; remainder is 0.
        let mut carry = 0u64;
        for k in (0..n).rev() {
            carry = field.add(master[k + 1], field.mul(carry, xv));
            quotient[k] = carry;
        }
        // denominator = prod_{j != i} (x_i - x_j) = quotient(x_i).
        let mut denom = 0u64;
        let mut xp = 1u64;
        for &qk in quotient.iter() {
            denom = field.add(denom, field.mul(qk, xp));
            xp = field.mul(xp, xv);
        }
        let scale = field.mul(y.value(), field.inv(denom)?);
        for k in 0..n {
            result[k] = field.add(result[k], field.mul(scale, quotient[k]));
        }
    }
    Ok(result.into_iter().map(|v| field.element(v)).collect())
}
