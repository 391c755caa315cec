//! Imaginary quadratic fields `Q(sqrt(-d))` with exact arithmetic.
//!
//! Elements are written `a + b*omega` where `omega = (1 + sqrt(-d))/2` when
//! `d = 3 (mod 4)` and `omega = sqrt(-d)` otherwise, so `{1, omega}` is an
//! integral basis of the maximal order.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{is_fundamental_abs, is_prime, pow_mod, squarefree_kernel};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Field {
    d: u64,
    disc: i64,
    omega_half: bool,
    /// The caller's `d` when it was not square-free.
    reduced_from: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SplittingType {
    Split,
    Inert,
    Ramified,
}

impl Field {
    /// Build `Q(sqrt(-d))`. A non-square-free `d` is replaced by its
    /// square-free kernel and the original value is kept in
    /// [`Field::reduced_from`].
    pub fn new(d: i64) -> Result<Field> {
        if d <= 0 {
            return Err(Error::InvalidD(d));
        }
        let input = d as u64;
        let kernel = squarefree_kernel(input);
        let d = kernel;
        let omega_half = d % 4 == 3;
        let disc = if omega_half {
            -(d as i64)
        } else {
            -4 * d as i64
        };
        Ok(Field {
            d,
            disc,
            omega_half,
            reduced_from: (kernel != input).then_some(input),
        })
    }

    /// The field with fundamental discriminant `disc` (sign ignored).
    pub fn from_disc(disc: i64) -> Result<Field> {
        let abs = disc.unsigned_abs();
        if disc >= 0 {
            return Err(Error::NonNegativeDiscriminant(disc));
        }
        if !is_fundamental_abs(abs) {
            return Err(Error::NonFundamentalDiscriminant(disc));
        }
        let d = if abs % 4 == 3 { abs } else { abs / 4 };
        Field::new(d as i64)
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn disc(&self) -> i64 {
        self.disc
    }

    pub fn omega_half(&self) -> bool {
        self.omega_half
    }

    pub fn reduced_from(&self) -> Option<u64> {
        self.reduced_from
    }

    /// `Tr(omega)`.
    pub fn omega_trace(&self) -> i64 {
        i64::from(self.omega_half)
    }

    /// `N(omega)`.
    pub fn omega_norm(&self) -> i64 {
        if self.omega_half {
            (1 + self.d as i64) / 4
        } else {
            self.d as i64
        }
    }

    pub fn splitting_type(&self, p: u64) -> Result<SplittingType> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        let disc = self.disc;
        if disc.rem_euclid(p as i64) == 0 {
            return Ok(SplittingType::Ramified);
        }
        let symbol = if p == 2 {
            // disc is odd here, so disc = 1 (mod 4)
            if disc.rem_euclid(8) == 1 {
                1
            } else {
                -1
            }
        } else {
            let r = disc.rem_euclid(p as i64) as u64;
            if pow_mod(r, (p - 1) / 2, p) == 1 {
                1
            } else {
                -1
            }
        };
        Ok(if symbol == 1 {
            SplittingType::Split
        } else {
            SplittingType::Inert
        })
    }

    /// Roots of unity in the maximal order.
    pub fn units(&self) -> Vec<Integral> {
        let mut units = vec![Integral::new(1, 0), Integral::new(-1, 0)];
        match self.d {
            1 => {
                units.push(Integral::new(0, 1));
                units.push(Integral::new(0, -1));
            }
            3 => {
                // omega is a primitive sixth root of unity here
                for u in [(0, 1), (0, -1), (-1, 1), (1, -1)] {
                    units.push(Integral::new(u.0, u.1));
                }
            }
            _ => {}
        }
        units
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement::from_ints(*self, 0, 0)
    }

    pub fn one(&self) -> FieldElement {
        FieldElement::from_ints(*self, 1, 0)
    }

    pub fn omega(&self) -> FieldElement {
        FieldElement::from_ints(*self, 0, 1)
    }

    // Integral arithmetic in coordinates (x, y) meaning x + y*omega.

    pub fn int_mul(&self, u: Integral, v: Integral) -> Integral {
        let (t, n) = (self.omega_trace(), self.omega_norm());
        Integral {
            x: u.x * v.x - u.y * v.y * n,
            y: u.x * v.y + u.y * v.x + u.y * v.y * t,
        }
    }

    pub fn int_conj(&self, u: Integral) -> Integral {
        Integral {
            x: u.x + u.y * self.omega_trace(),
            y: -u.y,
        }
    }

    pub fn int_norm(&self, u: Integral) -> i64 {
        u.x * u.x + u.x * u.y * self.omega_trace() + u.y * u.y * self.omega_norm()
    }

    pub fn int_trace(&self, u: Integral) -> i64 {
        2 * u.x + u.y * self.omega_trace()
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q(sqrt(-{}))", self.d)
    }
}

/// An element of the maximal order in `(x, y)` coordinates.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize,
)]
pub struct Integral {
    pub x: i64,
    pub y: i64,
}

impl Integral {
    pub const ZERO: Integral = Integral { x: 0, y: 0 };
    pub const ONE: Integral = Integral { x: 1, y: 0 };

    pub const fn new(x: i64, y: i64) -> Self {
        Integral { x, y }
    }

    pub fn is_zero(&self) -> bool {
        self.x == 0 && self.y == 0
    }
}

impl Add for Integral {
    type Output = Integral;
    fn add(self, o: Integral) -> Integral {
        Integral::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Integral {
    type Output = Integral;
    fn sub(self, o: Integral) -> Integral {
        Integral::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Integral {
    type Output = Integral;
    fn neg(self) -> Integral {
        Integral::new(-self.x, -self.y)
    }
}

/// `a + b*omega` with exact rational coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FieldElement {
    field: Field,
    a: BigRational,
    b: BigRational,
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl FieldElement {
    pub fn new(field: Field, a: BigRational, b: BigRational) -> Self {
        FieldElement { field, a, b }
    }

    pub fn from_ints(field: Field, a: i64, b: i64) -> Self {
        FieldElement::new(field, rat(a), rat(b))
    }

    pub fn from_integral(field: Field, u: Integral) -> Self {
        FieldElement::from_ints(field, u.x, u.y)
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn a(&self) -> &BigRational {
        &self.a
    }

    pub fn b(&self) -> &BigRational {
        &self.b
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_integral(&self) -> bool {
        self.a.is_integer() && self.b.is_integer()
    }

    /// The integral coordinates, when the element is integral and they fit.
    pub fn to_integral(&self) -> Option<Integral> {
        use num_traits::ToPrimitive;
        if !self.is_integral() {
            return None;
        }
        Some(Integral::new(
            self.a.to_integer().to_i64()?,
            self.b.to_integer().to_i64()?,
        ))
    }

    fn check(&self, other: &FieldElement) -> Result<()> {
        if self.field != other.field {
            return Err(Error::MixedFields(self.field.disc, other.field.disc));
        }
        Ok(())
    }

    pub fn conj(&self) -> FieldElement {
        let t = rat(self.field.omega_trace());
        FieldElement::new(self.field, &self.a + &self.b * t, -&self.b)
    }

    pub fn norm(&self) -> BigRational {
        let t = rat(self.field.omega_trace());
        let n = rat(self.field.omega_norm());
        &self.a * &self.a + &self.a * &self.b * t + &self.b * &self.b * n
    }

    pub fn trace(&self) -> BigRational {
        let t = rat(self.field.omega_trace());
        &self.a * rat(2) + &self.b * t
    }

    pub fn checked_add(&self, other: &FieldElement) -> Result<FieldElement> {
        self.check(other)?;
        Ok(FieldElement::new(
            self.field,
            &self.a + &other.a,
            &self.b + &other.b,
        ))
    }

    pub fn checked_sub(&self, other: &FieldElement) -> Result<FieldElement> {
        self.check(other)?;
        Ok(FieldElement::new(
            self.field,
            &self.a - &other.a,
            &self.b - &other.b,
        ))
    }

    pub fn checked_mul(&self, other: &FieldElement) -> Result<FieldElement> {
        self.check(other)?;
        let t = rat(self.field.omega_trace());
        let n = rat(self.field.omega_norm());
        let bb = &self.b * &other.b;
        let a = &self.a * &other.a - &bb * n;
        let b = &self.a * &other.b + &self.b * &other.a + bb * t;
        Ok(FieldElement::new(self.field, a, b))
    }

    pub fn inverse(&self) -> Result<FieldElement> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let n = self.norm();
        let c = self.conj();
        Ok(FieldElement::new(self.field, c.a / &n, c.b / n))
    }

    pub fn checked_div(&self, other: &FieldElement) -> Result<FieldElement> {
        self.check(other)?;
        self.checked_mul(&other.inverse()?)
    }

    pub fn scale(&self, r: &BigRational) -> FieldElement {
        FieldElement::new(self.field, &self.a * r, &self.b * r)
    }
}

impl<'a> Add<&'a FieldElement> for &'a FieldElement {
    type Output = FieldElement;
    /// Panics on mixed fields; use [`FieldElement::checked_add`] otherwise.
    fn add(self, o: &FieldElement) -> FieldElement {
        self.checked_add(o).expect("mixed-field addition")
    }
}

impl<'a> Sub<&'a FieldElement> for &'a FieldElement {
    type Output = FieldElement;
    fn sub(self, o: &FieldElement) -> FieldElement {
        self.checked_sub(o).expect("mixed-field subtraction")
    }
}

impl<'a> Mul<&'a FieldElement> for &'a FieldElement {
    type Output = FieldElement;
    fn mul(self, o: &FieldElement) -> FieldElement {
        self.checked_mul(o).expect("mixed-field multiplication")
    }
}

impl Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        FieldElement::new(self.field, -&self.a, -&self.b)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", self.a);
        }
        let w = if self.b.is_one() {
            "w".to_string()
        } else if (-&self.b).is_one() {
            "-w".to_string()
        } else {
            format!("{}*w", self.b)
        };
        if self.a.is_zero() {
            write!(f, "{w}")
        } else if self.b.is_negative() {
            write!(f, "{}{}", self.a, w)
        } else {
            write!(f, "{}+{}", self.a, w)
        }
    }
}
