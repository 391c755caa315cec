//! The class group of an imaginary quadratic field, modelled by reduced
//! positive definite binary quadratic forms under Gauss composition.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::arith::{factor, gcd, is_fundamental_abs, isqrt, xgcd};
use crate::error::{Error, Result};

/// `a x^2 + b x y + c y^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QuadraticForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl QuadraticForm {
    pub const fn new(a: i64, b: i64, c: i64) -> Self {
        QuadraticForm { a, b, c }
    }

    pub fn disc(&self) -> i64 {
        let d = (self.b as i128) * (self.b as i128) - 4 * (self.a as i128) * (self.c as i128);
        d as i64
    }

    pub fn is_primitive(&self) -> bool {
        gcd(gcd(self.a, self.b), self.c) == 1
    }

    pub fn is_positive_definite(&self) -> bool {
        self.a > 0 && self.disc() < 0
    }

    pub fn is_reduced(&self) -> bool {
        let (a, b, c) = (self.a, self.b, self.c);
        b.abs() <= a && a <= c && !(b < 0 && (b.abs() == a || a == c))
    }

    pub fn eval(&self, x: i64, y: i64) -> i128 {
        let (a, b, c) = (self.a as i128, self.b as i128, self.c as i128);
        let (x, y) = (x as i128, y as i128);
        a * x * x + b * x * y + c * y * y
    }

    /// The form `f(p x + q y, r x + s y)` for the matrix `[[p, q], [r, s]]`.
    pub fn transform(&self, m: [[i64; 2]; 2]) -> QuadraticForm {
        let [[p, q], [r, s]] = m;
        let (a, b, c) = (self.a, self.b, self.c);
        QuadraticForm {
            a: a * p * p + b * p * r + c * r * r,
            b: 2 * a * p * q + b * (p * s + q * r) + 2 * c * r * s,
            c: a * q * q + b * q * s + c * s * s,
        }
    }
}

impl fmt::Display for QuadraticForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.a, self.b, self.c)
    }
}

/// A class of forms, held as its unique reduced representative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FormClass(QuadraticForm);

fn mat_mul(x: [[i64; 2]; 2], y: [[i64; 2]; 2]) -> [[i64; 2]; 2] {
    [
        [
            x[0][0] * y[0][0] + x[0][1] * y[1][0],
            x[0][0] * y[0][1] + x[0][1] * y[1][1],
        ],
        [
            x[1][0] * y[0][0] + x[1][1] * y[1][0],
            x[1][0] * y[0][1] + x[1][1] * y[1][1],
        ],
    ]
}

/// Reduce without validation, tracking the `SL_2(Z)` transform `m` with
/// `f.transform(m) == reduced`.
fn reduce_tracked(f: QuadraticForm) -> (QuadraticForm, [[i64; 2]; 2]) {
    let (mut a, mut b, mut c) = (f.a as i128, f.b as i128, f.c as i128);
    let mut m = [[1i64, 0], [0, 1]];
    loop {
        // normalize b into (-a, a]
        if !(-a < b && b <= a) {
            let r = (a - b).div_euclid(2 * a);
            c += r * (a * r + b);
            b += 2 * r * a;
            m = mat_mul(m, [[1, r as i64], [0, 1]]);
        }
        if a > c || (a == c && b < 0) {
            (a, b, c) = (c, -b, a);
            m = mat_mul(m, [[0, -1], [1, 0]]);
            continue;
        }
        break;
    }
    (QuadraticForm::new(a as i64, b as i64, c as i64), m)
}

fn validate(f: &QuadraticForm) -> Result<()> {
    if !f.is_positive_definite() {
        return Err(Error::IndefiniteForm(f.a, f.b, f.c));
    }
    if !f.is_primitive() {
        return Err(Error::ImprimitiveForm(f.a, f.b, f.c));
    }
    Ok(())
}

/// Reduce a primitive positive definite form to its class representative.
pub fn reduce(f: QuadraticForm) -> Result<FormClass> {
    validate(&f)?;
    Ok(FormClass(reduce_tracked(f).0))
}

/// Like [`reduce`], also returning the transform carrying `f` to the
/// reduced form.
pub fn reduce_with_transform(f: QuadraticForm) -> Result<(FormClass, [[i64; 2]; 2])> {
    validate(&f)?;
    let (g, m) = reduce_tracked(f);
    Ok((FormClass(g), m))
}

impl FormClass {
    /// The identity class of discriminant `disc`.
    pub fn principal(disc: i64) -> FormClass {
        if disc.rem_euclid(4) == 0 {
            FormClass(QuadraticForm::new(1, 0, -disc / 4))
        } else {
            FormClass(QuadraticForm::new(1, 1, (1 - disc) / 4))
        }
    }

    pub fn form(&self) -> QuadraticForm {
        self.0
    }

    pub fn disc(&self) -> i64 {
        self.0.disc()
    }

    pub fn is_principal(&self) -> bool {
        self.0.a == 1
    }

    pub fn inverse(&self) -> FormClass {
        let f = self.0;
        FormClass(reduce_tracked(QuadraticForm::new(f.a, -f.b, f.c)).0)
    }

    pub fn compose(&self, other: &FormClass) -> Result<FormClass> {
        if self.disc() != other.disc() {
            return Err(Error::DiscriminantMismatch(self.disc(), other.disc()));
        }
        Ok(compose_raw(self.0, other.0))
    }

    pub fn pow(&self, mut n: u64) -> FormClass {
        let mut acc = FormClass::principal(self.disc());
        let mut base = *self;
        while n > 0 {
            if n & 1 == 1 {
                acc = compose_raw(acc.0, base.0);
            }
            n >>= 1;
            if n > 0 {
                base = compose_raw(base.0, base.0);
            }
        }
        acc
    }

    /// Order of the class in the group.
    pub fn order(&self) -> u64 {
        let mut x = *self;
        let mut n = 1;
        while !x.is_principal() {
            x = compose_raw(x.0, self.0);
            n += 1;
        }
        n
    }
}

impl fmt::Display for FormClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Gauss composition followed by reduction (Shanks' arrangement).
fn compose_raw(f1: QuadraticForm, f2: QuadraticForm) -> FormClass {
    let (f1, f2) = if f1.a > f2.a { (f2, f1) } else { (f1, f2) };
    let (a1, b1) = (f1.a as i128, f1.b as i128);
    let (a2, b2, c2) = (f2.a as i128, f2.b as i128, f2.c as i128);
    let s = (b1 + b2) / 2;
    let n = b2 - s;
    let (y1, d) = if a2 % a1 == 0 {
        (0, a1)
    } else {
        let (d, u, _) = xgcd(a2, a1);
        (u, d)
    };
    let (x2, y2, d1) = if s % d == 0 {
        (0, -1, d)
    } else {
        let (d1, x2, y2) = xgcd(s, d);
        (x2, -y2, d1)
    };
    let v1 = a1 / d1;
    let v2 = a2 / d1;
    let r = (y1 * y2 * n - x2 * c2).rem_euclid(v1);
    let b3 = b2 + 2 * v2 * r;
    let a3 = v1 * v2;
    let c3 = (c2 * d1 + r * (b2 + v2 * r)) / v1;
    let raw = QuadraticForm::new(a3 as i64, b3 as i64, c3 as i64);
    debug_assert_eq!(raw.disc(), f1.disc());
    FormClass(reduce_tracked(raw).0)
}

/// Check that `disc` is a negative fundamental discriminant.
pub fn check_disc(disc: i64) -> Result<()> {
    if disc >= 0 {
        return Err(Error::NonNegativeDiscriminant(disc));
    }
    if !is_fundamental_abs(disc.unsigned_abs()) {
        return Err(Error::NonFundamentalDiscriminant(disc));
    }
    Ok(())
}

/// All reduced forms of discriminant `disc`, in canonical order: by `a`,
/// then `|b|`, positive `b` first.
pub fn reduced_forms(disc: i64) -> Result<Vec<FormClass>> {
    check_disc(disc)?;
    let abs = disc.unsigned_abs();
    let amax = isqrt(abs / 3) as i64;
    let mut out = Vec::new();
    let parity = (abs % 2) as i64;
    for a in 1..=amax {
        let mut b = -a + 1;
        if b.rem_euclid(2) != parity {
            b += 1;
        }
        while b <= a {
            let num = b * b + abs as i64;
            if num % (4 * a) == 0 {
                let c = num / (4 * a);
                let f = QuadraticForm::new(a, b, c);
                if c >= a && f.is_reduced() && f.is_primitive() {
                    out.push(FormClass(f));
                }
            }
            b += 2;
        }
    }
    out.sort_by_key(|f| (f.0.a, f.0.b.abs(), -f.0.b));
    Ok(out)
}

/// `Cl(k)` for the field of discriminant `disc`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassGroup {
    pub disc: i64,
    pub forms: Vec<FormClass>,
    /// Invariant factors `d1 | d2 | ...`; empty for the trivial group.
    pub structure: Vec<u64>,
    /// One generator per invariant factor.
    pub generators: Vec<FormClass>,
}

impl ClassGroup {
    pub fn new(disc: i64) -> Result<ClassGroup> {
        let forms = reduced_forms(disc)?;
        let (structure, generators) = decompose(disc, &forms)?;
        Ok(ClassGroup {
            disc,
            forms,
            structure,
            generators,
        })
    }

    pub fn h(&self) -> u64 {
        self.forms.len() as u64
    }

    pub fn principal(&self) -> FormClass {
        FormClass::principal(self.disc)
    }

    /// `#{c : c^q = 1}`.
    pub fn torsion_order(&self, q: u64) -> Result<u64> {
        if q < 2 {
            return Err(Error::InvalidTorsionExponent(q));
        }
        Ok(self
            .forms
            .iter()
            .filter(|c| c.pow(q).is_principal())
            .count() as u64)
    }

    /// Order of the subgroup of elements whose order involves only primes
    /// dividing `q` (the `q`-Sylow subgroup when `q` is prime).
    pub fn primary_order(&self, q: u64) -> Result<u64> {
        if q < 2 {
            return Err(Error::InvalidTorsionExponent(q));
        }
        Ok(primary_part(self.h(), q))
    }

    /// Structure string such as `3x3`, or `1` for the trivial group.
    pub fn structure_label(&self) -> String {
        structure_label(&self.structure)
    }

    pub fn contains(&self, c: &FormClass) -> bool {
        c.disc() == self.disc
    }
}

pub fn structure_label(structure: &[u64]) -> String {
    if structure.is_empty() {
        "1".to_string()
    } else {
        structure
            .iter()
            .map(u64::to_string)
            .collect::<Vec<_>>()
            .join("x")
    }
}

pub fn parse_structure_label(s: &str) -> Option<Vec<u64>> {
    if s == "1" {
        return Some(Vec::new());
    }
    s.split('x').map(|t| t.parse().ok()).collect()
}

/// Largest divisor of `h` built from primes dividing `q`.
pub fn primary_part(h: u64, q: u64) -> u64 {
    let qp: BTreeSet<u64> = factor(q).into_iter().map(|(p, _)| p).collect();
    factor(h)
        .into_iter()
        .filter(|(p, _)| qp.contains(p))
        .map(|(p, e)| p.pow(e))
        .product()
}

pub fn h(disc: i64) -> Result<u64> {
    Ok(reduced_forms(disc)?.len() as u64)
}

pub fn torsion_order(disc: i64, q: u64) -> Result<u64> {
    if q < 2 {
        return Err(Error::InvalidTorsionExponent(q));
    }
    let forms = reduced_forms(disc)?;
    Ok(forms.iter().filter(|c| c.pow(q).is_principal()).count() as u64)
}

pub fn primary_order(disc: i64, q: u64) -> Result<u64> {
    if q < 2 {
        return Err(Error::InvalidTorsionExponent(q));
    }
    Ok(primary_part(h(disc)?, q))
}

/// The permutation `c -> t^{-1} c` of classes induced by a torsion class
/// `t`. When `torsion_bound` is given, `t^q` must be principal.
pub fn class_action(c: &FormClass, t: &FormClass, torsion_bound: Option<u64>) -> Result<FormClass> {
    if c.disc() != t.disc() {
        return Err(Error::DiscriminantMismatch(c.disc(), t.disc()));
    }
    if let Some(q) = torsion_bound {
        if q < 2 {
            return Err(Error::InvalidTorsionExponent(q));
        }
        if !t.pow(q).is_principal() {
            let f = t.form();
            return Err(Error::NotTorsion(f.a, f.b, f.c, q));
        }
    }
    t.inverse().compose(c)
}

/// Basis of a finite abelian `p`-group given as a list of classes.
fn p_group_basis(disc: i64, p: u64, sylow: &[FormClass]) -> Result<Vec<(FormClass, u64)>> {
    let one = FormClass::principal(disc);
    let mut span: HashMap<FormClass, Vec<u64>> = HashMap::from([(one, Vec::new())]);
    let mut basis: Vec<(FormClass, u64)> = Vec::new();
    while span.len() < sylow.len() {
        // element of maximal order modulo the current span
        let mut best: Option<(FormClass, u64, FormClass)> = None;
        for &y in sylow {
            let mut m = 1u64;
            let mut z = y;
            while !span.contains_key(&z) {
                z = z.pow(p);
                m *= p;
            }
            if best.as_ref().is_none_or(|b| m > b.1) {
                best = Some((y, m, z));
            }
        }
        let (y, m, z) = best.expect("sylow list is nonempty");
        let exps = span[&z].clone();
        let mut lifted = y;
        for (i, &s) in exps.iter().enumerate() {
            if s % m != 0 {
                return Err(Error::Invariant(format!(
                    "basis lift failed for disc {disc}, p = {p}"
                )));
            }
            let g = basis[i];
            lifted = compose_raw(lifted.0, g.0.pow(g.1 - (s / m) % g.1).0);
        }
        if !lifted.pow(m).is_principal() {
            return Err(Error::Invariant(format!(
                "lifted generator has wrong order, disc {disc}"
            )));
        }
        let mut next = HashMap::with_capacity(span.len() * m as usize);
        for (x, e) in &span {
            let mut cur = *x;
            for j in 0..m {
                let mut ev = e.clone();
                ev.push(j);
                next.insert(cur, ev);
                cur = compose_raw(cur.0, lifted.0);
            }
        }
        span = next;
        basis.push((lifted, m));
    }
    Ok(basis)
}

/// Invariant factors and matching generators.
fn decompose(disc: i64, forms: &[FormClass]) -> Result<(Vec<u64>, Vec<FormClass>)> {
    let h = forms.len() as u64;
    let one = FormClass::principal(disc);
    // per prime: cyclic factors sorted by decreasing order
    let mut per_prime: Vec<Vec<(FormClass, u64)>> = Vec::new();
    for (p, e) in factor(h) {
        let cofactor = h / p.pow(e);
        let mut sylow: Vec<FormClass> = forms
            .iter()
            .map(|c| c.pow(cofactor))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        sylow.sort();
        if sylow.len() as u64 != p.pow(e) {
            return Err(Error::Invariant(format!(
                "{p}-Sylow subgroup of disc {disc} has {} elements",
                sylow.len()
            )));
        }
        let mut b = p_group_basis(disc, p, &sylow)?;
        b.sort_by_key(|x| std::cmp::Reverse(x.1));
        per_prime.push(b);
    }
    let rank = per_prime.iter().map(Vec::len).max().unwrap_or(0);
    // largest invariant factor first, then reverse to d1 | d2 | ...
    let mut structure = Vec::with_capacity(rank);
    let mut gens = Vec::with_capacity(rank);
    for i in 0..rank {
        let mut d = 1u64;
        let mut g = one;
        for b in &per_prime {
            if let Some(&(x, m)) = b.get(i) {
                d *= m;
                g = compose_raw(g.0, x.0);
            }
        }
        structure.push(d);
        gens.push(g);
    }
    structure.reverse();
    gens.reverse();
    Ok((structure, gens))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qf(a: i64, b: i64, c: i64) -> QuadraticForm {
        QuadraticForm::new(a, b, c)
    }

    fn fc(a: i64, b: i64, c: i64) -> FormClass {
        reduce(qf(a, b, c)).unwrap()
    }

    /// Brute-force proper equivalence: search SL2(Z) matrices with small
    /// entries for one carrying `f` to `g`.
    fn equivalent_by_search(f: QuadraticForm, g: QuadraticForm, bound: i64) -> bool {
        for p in -bound..=bound {
            for q in -bound..=bound {
                for r in -bound..=bound {
                    for s in -bound..=bound {
                        if p * s - q * r == 1 && f.transform([[p, q], [r, s]]) == g {
                            return true;
                        }
                    }
                }
            }
        }
        false
    }

    /// Independent enumeration of reduced forms by scanning (a, b, c).
    fn scan_reduced(disc: i64) -> BTreeSet<QuadraticForm> {
        let abs = -disc;
        let mut out = BTreeSet::new();
        for a in 1..=abs {
            for b in -a..=a {
                let num = b * b - disc;
                if num % (4 * a) == 0 {
                    let c = num / (4 * a);
                    let f = qf(a, b, c);
                    if f.is_reduced() && f.is_primitive() {
                        out.insert(f);
                    }
                }
            }
        }
        out
    }

    #[test]
    fn reduce_examples() {
        assert_eq!(fc(1, 1, 6).form(), qf(1, 1, 6));
        assert_eq!(fc(6, 1, 1).form(), qf(1, 1, 6));
        assert!(equivalent_by_search(qf(6, 1, 1), qf(1, 1, 6), 2));
        assert_eq!(fc(2, -1, 3).form(), qf(2, -1, 3));
        assert_eq!(reduce(qf(2, 0, 2)), Err(Error::ImprimitiveForm(2, 0, 2)));
        assert_eq!(reduce(qf(1, 3, 1)), Err(Error::IndefiniteForm(1, 3, 1)));
        assert_eq!(reduce(qf(-1, 1, -6)), Err(Error::IndefiniteForm(-1, 1, -6)));
    }

    #[test]
    fn reduce_transform_is_tracked() {
        for f in [
            qf(6, 1, 1),
            qf(17, 23, 8),
            qf(3, 10, 9),
            qf(101, 73, 14),
            qf(2, -2, 3),
        ] {
            let (g, m) = reduce_with_transform(f).unwrap();
            assert_eq!(f.transform(m), g.form());
            assert_eq!(m[0][0] * m[1][1] - m[0][1] * m[1][0], 1);
            assert_eq!(reduce(g.form()).unwrap(), g, "idempotent");
        }
    }

    #[test]
    fn enumerate_examples() {
        let g = ClassGroup::new(-23).unwrap();
        assert_eq!(
            g.forms.iter().map(|f| f.form()).collect::<Vec<_>>(),
            vec![qf(1, 1, 6), qf(2, 1, 3), qf(2, -1, 3)]
        );
        assert_eq!(g.h(), 3);
        let g = ClassGroup::new(-4).unwrap();
        assert_eq!(
            g.forms.iter().map(|f| f.form()).collect::<Vec<_>>(),
            vec![qf(1, 0, 1)]
        );
        let g = ClassGroup::new(-20).unwrap();
        assert_eq!(
            g.forms.iter().map(|f| f.form()).collect::<Vec<_>>(),
            vec![qf(1, 0, 5), qf(2, 2, 3)]
        );
        assert_eq!(
            ClassGroup::new(-12),
            Err(Error::NonFundamentalDiscriminant(-12))
        );
        assert_eq!(ClassGroup::new(5), Err(Error::NonNegativeDiscriminant(5)));
    }

    #[test]
    fn enumeration_matches_scan() {
        for abs in 3..=400i64 {
            if !is_fundamental_abs(abs as u64) {
                continue;
            }
            let fast: BTreeSet<_> = reduced_forms(-abs)
                .unwrap()
                .into_iter()
                .map(|f| f.form())
                .collect();
            assert_eq!(fast, scan_reduced(-abs), "disc -{abs}");
        }
    }

    #[test]
    fn compose_examples() {
        let p = FormClass::principal(-23);
        let f = fc(2, 1, 3);
        assert_eq!(p.compose(&f).unwrap(), f);
        assert_eq!(f.compose(&f).unwrap().form(), qf(2, -1, 3));
        assert_eq!(f.pow(3), p);
        assert_eq!(
            f.compose(&FormClass::principal(-20)),
            Err(Error::DiscriminantMismatch(-23, -20))
        );
    }

    #[test]
    fn inverse_law_up_to_500() {
        for abs in 3..=500u64 {
            if !is_fundamental_abs(abs) {
                continue;
            }
            let disc = -(abs as i64);
            for f in reduced_forms(disc).unwrap() {
                let g = fc(f.form().a, -f.form().b, f.form().c);
                assert!(f.compose(&g).unwrap().is_principal(), "disc {disc} f {f}");
            }
        }
    }

    #[test]
    fn torsion_examples() {
        assert_eq!(torsion_order(-23, 3).unwrap(), 3);
        assert_eq!(torsion_order(-20, 3).unwrap(), 1);
        assert_eq!(torsion_order(-4, 5).unwrap(), 1);
        assert_eq!(torsion_order(-4, 1), Err(Error::InvalidTorsionExponent(1)));
        assert_eq!(primary_order(-4, 0), Err(Error::InvalidTorsionExponent(0)));
    }

    #[test]
    fn structure_of_known_groups() {
        // Cl(-4027) = (3,3); Cl(-199) cyclic of order 9; Cl(-56) cyclic of order 4
        let g = ClassGroup::new(-4027).unwrap();
        assert_eq!(g.structure, vec![3, 3]);
        assert_eq!(g.torsion_order(3).unwrap(), 9);
        let g = ClassGroup::new(-199).unwrap();
        assert_eq!(g.structure, vec![9]);
        assert_eq!(g.torsion_order(3).unwrap(), 3);
        assert_eq!(g.primary_order(3).unwrap(), 9);
        assert_eq!(ClassGroup::new(-56).unwrap().structure, vec![4]);
        assert_eq!(ClassGroup::new(-84).unwrap().structure, vec![2, 2]);
        assert!(ClassGroup::new(-3).unwrap().structure.is_empty());
    }

    #[test]
    fn generators_generate() {
        for abs in (3..=3000u64).step_by(7) {
            if !is_fundamental_abs(abs) {
                continue;
            }
            let g = ClassGroup::new(-(abs as i64)).unwrap();
            assert_eq!(g.structure.iter().product::<u64>(), g.h());
            for w in g.structure.windows(2) {
                assert_eq!(w[1] % w[0], 0);
            }
            for (x, &d) in g.generators.iter().zip(&g.structure) {
                assert_eq!(x.order(), d);
            }
            // the subgroup spanned by the generators is everything
            let mut span: BTreeSet<FormClass> = BTreeSet::from([g.principal()]);
            for x in &g.generators {
                let cur: Vec<FormClass> = span.iter().copied().collect();
                for y in cur {
                    let mut z = y;
                    for _ in 0..x.order() {
                        z = z.compose(x).unwrap();
                        span.insert(z);
                    }
                }
            }
            assert_eq!(span.len() as u64, g.h(), "disc -{abs}");
        }
    }

    #[test]
    fn class_action_examples() {
        let p = FormClass::principal(-23);
        let t = fc(2, 1, 3);
        for c in reduced_forms(-23).unwrap() {
            assert_eq!(class_action(&c, &p, Some(3)).unwrap(), c);
            assert_ne!(class_action(&c, &t, Some(3)).unwrap(), c);
        }
        assert_eq!(class_action(&p, &t, Some(3)).unwrap().form(), qf(2, -1, 3));
        let t20 = fc(2, 2, 3);
        assert_eq!(
            class_action(&FormClass::principal(-20), &t20, Some(3)),
            Err(Error::NotTorsion(2, 2, 3, 3))
        );
    }
}
