//! Fractional ideals of the maximal order, stored as a positive rational
//! scale times a primitive integral ideal `Z a + Z (b + omega)`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::classgroup::{reduce, reduce_with_transform, FormClass, QuadraticForm};
use crate::error::{Error, Result};
use crate::quadfield::{Field, FieldElement, Integral};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FractionalIdeal {
    field: Field,
    scale: BigRational,
    a: BigInt,
    b: BigInt,
}

/// Hermite normal form of the Z-span of integer vectors `(x, y)` standing
/// for `x + y*omega`. Returns `(n1, m, n2)` with basis `{n1, m + n2*omega}`,
/// `0 <= m < n1`, or `None` when the span has rank below two.
fn hnf(vectors: &[(BigInt, BigInt)]) -> Option<(BigInt, BigInt, BigInt)> {
    let mut n1 = BigInt::zero();
    let mut top: Option<(BigInt, BigInt)> = None;
    for (wx, wy) in vectors {
        if wy.is_zero() {
            n1 = n1.gcd(wx);
            continue;
        }
        match top.take() {
            None => top = Some((wx.clone(), wy.clone())),
            Some((tx, ty)) => {
                let e = ty.extended_gcd(wy);
                let g = e.gcd;
                let new_x = &e.x * &tx + &e.y * wx;
                let new_y = &e.x * &ty + &e.y * wy;
                // the complementary combination has zero omega-coordinate
                let rest = (wy / &g) * &tx - (&ty / &g) * wx;
                n1 = n1.gcd(&rest);
                top = Some((new_x, new_y));
            }
        }
    }
    let (mut tx, mut ty) = top?;
    if n1.is_zero() {
        return None;
    }
    if ty.is_negative() {
        tx = -tx;
        ty = -ty;
    }
    Some((n1.clone(), tx.mod_floor(&n1), ty))
}

fn denom_lcm(elems: &[FieldElement]) -> BigInt {
    elems.iter().fold(BigInt::one(), |acc, e| {
        acc.lcm(e.a().denom()).lcm(e.b().denom())
    })
}

impl FractionalIdeal {
    /// Canonical ideal from a Z-spanning set of the ideal (not merely
    /// O_k-generators).
    fn from_z_span(field: Field, elems: &[FieldElement]) -> Result<FractionalIdeal> {
        let den = denom_lcm(elems);
        let denr = BigRational::from_integer(den.clone());
        let vecs: Vec<(BigInt, BigInt)> = elems
            .iter()
            .map(|e| ((e.a() * &denr).to_integer(), (e.b() * &denr).to_integer()))
            .collect();
        let (n1, m, n2) = hnf(&vecs).ok_or(Error::ZeroIdeal)?;
        if !(n1.is_multiple_of(&n2) && m.is_multiple_of(&n2)) {
            return Err(Error::Invariant("Z-span is not an O_k-module".into()));
        }
        let ideal = FractionalIdeal {
            field,
            scale: BigRational::new(n2.clone(), den),
            a: &n1 / &n2,
            b: &m / &n2,
        };
        let beta_norm = ideal.beta_norm();
        if !beta_norm.is_multiple_of(&ideal.a) {
            return Err(Error::Invariant("HNF basis is not an ideal".into()));
        }
        Ok(ideal)
    }

    /// The O_k-module generated by `gens`.
    pub fn from_generators(field: Field, gens: &[FieldElement]) -> Result<FractionalIdeal> {
        let mut span = Vec::with_capacity(2 * gens.len());
        let omega = field.omega();
        for g in gens {
            if g.field() != field {
                return Err(Error::MixedFields(field.disc(), g.field().disc()));
            }
            if g.is_zero() {
                continue;
            }
            span.push(g.clone());
            span.push(g * &omega);
        }
        if span.is_empty() {
            return Err(Error::ZeroIdeal);
        }
        FractionalIdeal::from_z_span(field, &span)
    }

    pub fn from_integrals(field: Field, gens: &[Integral]) -> Result<FractionalIdeal> {
        let elems: Vec<FieldElement> = gens
            .iter()
            .map(|&u| FieldElement::from_integral(field, u))
            .collect();
        FractionalIdeal::from_generators(field, &elems)
    }

    pub fn unit(field: Field) -> FractionalIdeal {
        FractionalIdeal {
            field,
            scale: BigRational::one(),
            a: BigInt::one(),
            b: BigInt::zero(),
        }
    }

    pub fn principal(x: &FieldElement) -> Result<FractionalIdeal> {
        FractionalIdeal::from_generators(x.field(), std::slice::from_ref(x))
    }

    /// A prime ideal above the rational prime `p`: the ideal `(p)` when `p`
    /// is inert, otherwise one of the degree-one primes.
    pub fn prime_above(field: Field, p: u64) -> Result<FractionalIdeal> {
        use crate::quadfield::SplittingType;
        if field.splitting_type(p)? == SplittingType::Inert {
            return FractionalIdeal::principal(&FieldElement::from_ints(field, p as i64, 0));
        }
        let pi = p as i64;
        let b = (0..pi)
            .find(|&b| field.int_norm(Integral::new(b, 1)) % pi == 0)
            .ok_or_else(|| Error::Invariant(format!("no prime of degree one above {p}")))?;
        FractionalIdeal::from_integrals(field, &[Integral::new(pi, 0), Integral::new(b, 1)])
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn scale(&self) -> &BigRational {
        &self.scale
    }

    /// `(a, b)` of the primitive part `Z a + Z (b + omega)`.
    pub fn hnf_basis(&self) -> (&BigInt, &BigInt) {
        (&self.a, &self.b)
    }

    fn beta(&self) -> FieldElement {
        FieldElement::new(
            self.field,
            BigRational::from_integer(self.b.clone()),
            BigRational::one(),
        )
    }

    fn beta_norm(&self) -> BigInt {
        let t = BigInt::from(self.field.omega_trace());
        let n = BigInt::from(self.field.omega_norm());
        &self.b * &self.b + &self.b * t + n
    }

    /// Z-basis of the ideal itself.
    pub fn z_basis(&self) -> [FieldElement; 2] {
        let a = FieldElement::new(
            self.field,
            BigRational::from_integer(self.a.clone()),
            BigRational::zero(),
        );
        [a.scale(&self.scale), self.beta().scale(&self.scale)]
    }

    pub fn norm(&self) -> BigRational {
        &self.scale * &self.scale * BigRational::from_integer(self.a.clone())
    }

    pub fn is_integral(&self) -> bool {
        self.scale.is_integer()
    }

    pub fn mul(&self, other: &FractionalIdeal) -> Result<FractionalIdeal> {
        if self.field != other.field {
            return Err(Error::MixedFields(self.field.disc(), other.field.disc()));
        }
        let x = self.z_basis();
        let y = other.z_basis();
        let prods: Vec<FieldElement> = x
            .iter()
            .flat_map(|u| y.iter().map(move |v| u * v))
            .collect();
        FractionalIdeal::from_z_span(self.field, &prods)
    }

    /// `I^{-1} = conj(I) / N(I)`.
    pub fn inverse(&self) -> Result<FractionalIdeal> {
        let n = self.norm();
        let inv_n = BigRational::one() / n;
        let conj: Vec<FieldElement> = self
            .z_basis()
            .iter()
            .map(|e| e.conj().scale(&inv_n))
            .collect();
        FractionalIdeal::from_z_span(self.field, &conj)
    }

    /// Whether `x` lies in the ideal.
    pub fn contains(&self, x: &FieldElement) -> bool {
        if x.field() != self.field {
            return false;
        }
        // x / scale = u*a + v*(b + omega) with u, v integers
        let y = x.scale(&(BigRational::one() / &self.scale));
        if !y.b().is_integer() {
            return false;
        }
        let v = y.b().clone();
        let rest = y.a() - &v * BigRational::from_integer(self.b.clone());
        (rest / BigRational::from_integer(self.a.clone())).is_integer()
    }

    /// The reduced form attached to the primitive part, of discriminant
    /// `disc(k)`. The map is a homomorphism onto the form class group.
    pub fn to_form_class(&self) -> Result<FormClass> {
        let f = self.raw_form()?;
        reduce(f)
    }

    fn raw_form(&self) -> Result<QuadraticForm> {
        let t = BigInt::from(self.field.omega_trace());
        let trace = BigInt::from(2) * &self.b + t;
        let c = self.beta_norm() / &self.a;
        let conv = |x: &BigInt| {
            x.to_i64()
                .ok_or_else(|| Error::Invariant("form coefficient overflows i64".into()))
        };
        Ok(QuadraticForm::new(
            conv(&self.a)?,
            -conv(&trace)?,
            conv(&c)?,
        ))
    }

    /// A generator when the ideal is principal.
    pub fn principal_generator(&self) -> Result<Option<FieldElement>> {
        let (g, m) = reduce_with_transform(self.raw_form()?)?;
        if !g.is_principal() {
            return Ok(None);
        }
        // The form is N(x a - y conj(beta)) / a, so the first reduced basis
        // vector (p, r) gives the element p a - r beta of norm N(I).
        let p = BigRational::from_integer(BigInt::from(m[0][0]));
        let r = BigRational::from_integer(BigInt::from(m[1][0]));
        let a = BigRational::from_integer(self.a.clone());
        let beta = self.beta();
        let gen = FieldElement::new(self.field, a * p, BigRational::zero())
            .checked_sub(&beta.scale(&r))?
            .scale(&self.scale);
        Ok(Some(gen))
    }

    pub fn is_principal(&self) -> Result<bool> {
        Ok(self.to_form_class()?.is_principal())
    }
}

impl fmt::Display for FractionalIdeal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.scale.is_one() {
            write!(f, "{}*", self.scale)?;
        }
        write!(f, "[{}, {}+w]", self.a, self.b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classgroup::reduced_forms;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn int(f: Field, x: i64, y: i64) -> FieldElement {
        FieldElement::from_ints(f, x, y)
    }

    fn rat(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn random_ideal(f: Field, rng: &mut ChaCha8Rng) -> FractionalIdeal {
        loop {
            let n = rng.gen_range(1..=2);
            let gens: Vec<FieldElement> = (0..n)
                .map(|_| {
                    let den = rng.gen_range(1..=3);
                    FieldElement::new(
                        f,
                        BigRational::new(rng.gen_range(-9i64..=9).into(), BigInt::from(den)),
                        BigRational::new(rng.gen_range(-9i64..=9).into(), BigInt::from(den)),
                    )
                })
                .collect();
            if let Ok(i) = FractionalIdeal::from_generators(f, &gens) {
                return i;
            }
        }
    }

    #[test]
    fn generator_examples() {
        let f = Field::new(5).unwrap();
        let unit = FractionalIdeal::from_generators(f, &[f.one()]).unwrap();
        assert_eq!(unit, FractionalIdeal::unit(f));
        assert_eq!(unit.norm(), rat(1));
        let p2 = FractionalIdeal::from_generators(f, &[int(f, 2, 0), int(f, 1, 1)]).unwrap();
        assert_eq!(p2.norm(), rat(2));
        let x = int(f, 3, -2);
        assert_eq!(FractionalIdeal::principal(&x).unwrap().norm(), x.norm());
        assert_eq!(
            FractionalIdeal::from_generators(f, &[f.zero()]),
            Err(Error::ZeroIdeal)
        );
        assert_eq!(
            FractionalIdeal::from_generators(f, &[]),
            Err(Error::ZeroIdeal)
        );
    }

    #[test]
    fn hnf_by_hand() {
        // (2, 1+sqrt(-5)) has Z-basis {2, 1 + w}
        let f = Field::new(5).unwrap();
        let p2 = FractionalIdeal::from_generators(f, &[int(f, 2, 0), int(f, 1, 1)]).unwrap();
        assert_eq!(p2.hnf_basis(), (&BigInt::from(2), &BigInt::from(1)));
        assert!(p2.is_integral());
        let half = FractionalIdeal::principal(&FieldElement::new(
            f,
            BigRational::new(1.into(), 2.into()),
            rat(0),
        ))
        .unwrap();
        assert_eq!(half.scale(), &BigRational::new(1.into(), 2.into()));
        assert_eq!(half.hnf_basis(), (&BigInt::from(1), &BigInt::from(0)));
    }

    #[test]
    fn product_and_principality_examples() {
        let f = Field::new(5).unwrap();
        let p2 = FractionalIdeal::from_generators(f, &[int(f, 2, 0), int(f, 1, 1)]).unwrap();
        assert_eq!(p2.mul(&FractionalIdeal::unit(f)).unwrap(), p2);
        let sq = p2.mul(&p2).unwrap();
        assert_eq!(sq, FractionalIdeal::principal(&int(f, 2, 0)).unwrap());
        assert!(!p2.is_principal().unwrap());
        assert_eq!(p2.principal_generator().unwrap(), None);
        // no element of norm 2 in Z[sqrt(-5)]
        for x in -3i64..=3 {
            for y in -3i64..=3 {
                assert_ne!(f.int_norm(Integral::new(x, y)), 2);
            }
        }
        assert_eq!(
            p2.to_form_class().unwrap().form(),
            QuadraticForm::new(2, 2, 3)
        );
        let unit = FractionalIdeal::unit(f);
        assert!(unit.is_principal().unwrap());
        assert_eq!(unit.principal_generator().unwrap().unwrap().norm(), rat(1));
    }

    #[test]
    fn witness_generates() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for d in [1, 2, 3, 5, 6, 7, 10, 23, 47] {
            let f = Field::new(d).unwrap();
            for _ in 0..50 {
                let x =
                    FieldElement::from_ints(f, rng.gen_range(-20..=20), rng.gen_range(-20..=20));
                let y =
                    FieldElement::from_ints(f, rng.gen_range(-20..=20), rng.gen_range(-20..=20));
                if x.is_zero() || y.is_zero() {
                    continue;
                }
                let xy = FractionalIdeal::principal(&x)
                    .unwrap()
                    .mul(&FractionalIdeal::principal(&y).unwrap())
                    .unwrap();
                let w = xy
                    .principal_generator()
                    .unwrap()
                    .expect("product of principals");
                assert_eq!(FractionalIdeal::principal(&w).unwrap(), xy);
                // the witness agrees with xy up to a unit
                assert_eq!(w.norm(), (&x * &y).norm());
            }
        }
    }

    #[test]
    fn group_laws_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in [1, 2, 3, 5, 6, 14, 17, 23, 47, 65] {
            let f = Field::new(d).unwrap();
            let one = FractionalIdeal::unit(f);
            for _ in 0..200 {
                let i = random_ideal(f, &mut rng);
                let j = random_ideal(f, &mut rng);
                let k = random_ideal(f, &mut rng);
                let ij = i.mul(&j).unwrap();
                assert_eq!(ij, j.mul(&i).unwrap());
                assert_eq!(ij.mul(&k).unwrap(), i.mul(&j.mul(&k).unwrap()).unwrap());
                assert_eq!(i.mul(&one).unwrap(), i);
                assert_eq!(i.mul(&i.inverse().unwrap()).unwrap(), one);
                assert_eq!(i.inverse().unwrap().inverse().unwrap(), i);
                assert_eq!(ij.norm(), i.norm() * j.norm());
                let ci = i.to_form_class().unwrap();
                let cj = j.to_form_class().unwrap();
                assert_eq!(ij.to_form_class().unwrap(), ci.compose(&cj).unwrap());
            }
        }
    }

    #[test]
    fn class_is_invariant_under_principal_multipliers() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = Field::new(5).unwrap();
        let p2 = FractionalIdeal::from_generators(f, &[int(f, 2, 0), int(f, 1, 1)]).unwrap();
        for _ in 0..100 {
            let x = FieldElement::new(
                f,
                BigRational::new(
                    rng.gen_range(1i64..30).into(),
                    BigInt::from(rng.gen_range(1..5)),
                ),
                rat(rng.gen_range(-10..10)),
            );
            let xi = FractionalIdeal::principal(&x).unwrap().mul(&p2).unwrap();
            assert_eq!(xi.to_form_class().unwrap(), p2.to_form_class().unwrap());
        }
        assert!(FractionalIdeal::unit(f)
            .to_form_class()
            .unwrap()
            .is_principal());
    }

    /// All integral ideals of norm <= bound via HNF bases [a, b + w] scaled
    /// by integers.
    fn small_integral_ideals(f: Field, bound: i64) -> Vec<FractionalIdeal> {
        let mut out = Vec::new();
        for a in 1..=bound {
            for b in 0..a {
                if f.int_norm(Integral::new(b, 1)) % a != 0 {
                    continue;
                }
                for s in 1..=bound {
                    if s * s * a > bound {
                        break;
                    }
                    let gens = [int(f, s * a, 0), int(f, s * b, s)];
                    out.push(FractionalIdeal::from_generators(f, &gens).unwrap());
                }
            }
        }
        out
    }

    #[test]
    fn principal_iff_principal_form() {
        for abs in 3..=200u64 {
            if !crate::arith::is_fundamental_abs(abs) {
                continue;
            }
            let f = Field::from_disc(-(abs as i64)).unwrap();
            let h = reduced_forms(f.disc()).unwrap().len();
            for i in small_integral_ideals(f, 50) {
                let by_form = i.to_form_class().unwrap().is_principal();
                // independent check: search for an element of norm N(I) in I
                let n = i.norm().to_integer().to_i64().unwrap();
                let by_search = small_elements(f, n)
                    .into_iter()
                    .any(|u| f.int_norm(u) == n && i.contains(&FieldElement::from_integral(f, u)));
                assert_eq!(by_form, by_search, "disc -{abs} ideal {i}");
                if h == 1 {
                    assert!(by_form);
                }
            }
        }
    }

    fn small_elements(f: Field, n: i64) -> Vec<Integral> {
        // |y| sqrt(d)/2 <= sqrt(n) bounds the search box
        let ymax = ((4 * n) as f64 / f.d() as f64).sqrt() as i64 + 1;
        let xmax = (n as f64).sqrt() as i64 + ymax + 1;
        let mut out = Vec::new();
        for y in -ymax..=ymax {
            for x in -xmax..=xmax {
                let u = Integral::new(x, y);
                if f.int_norm(u) == n {
                    out.push(u);
                }
            }
        }
        out
    }

    #[test]
    fn primes_above() {
        let f = Field::new(5).unwrap();
        assert_eq!(FractionalIdeal::prime_above(f, 2).unwrap().norm(), rat(2));
        assert_eq!(FractionalIdeal::prime_above(f, 3).unwrap().norm(), rat(3));
        assert_eq!(
            FractionalIdeal::prime_above(f, 11).unwrap().norm(),
            rat(121)
        );
    }

    #[test]
    fn contains_basis() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = Field::new(7).unwrap();
        for _ in 0..50 {
            let i = random_ideal(f, &mut rng);
            for e in i.z_basis() {
                assert!(i.contains(&e));
            }
            let [x, _] = i.z_basis();
            assert!(!i.contains(&x.scale(&BigRational::new(1.into(), 2.into()))));
        }
    }
}
