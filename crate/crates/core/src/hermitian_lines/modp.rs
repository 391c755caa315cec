//! Orbits of isotropic points modulo an odd prime `p`.
//!
//! The finite models, by splitting type of `p`:
//!
//! - split: all of `P^2(F_p)` under `SL_3(F_p)`;
//! - inert: the `h0`-isotropic points of `P^2(F_{p^2})`, with
//!   `F_{p^2} = O_k / p`, under `SU(3)` of `h0`;
//! - ramified: the conic `2 x1 x3 - x2^2 = 0` over `F_p` under `SO(3)`.
//!
//! Orbits are computed by closing the point set under explicit generators
//! of each subgroup. Every generator is checked against the defining
//! predicate of its subgroup before use.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::arith::{is_prime, primitive_root};
use crate::error::{Error, Result};
use crate::quadfield::{Field, SplittingType};

pub const DEFAULT_PRIME_BOUND: u64 = 97;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subgroup {
    Full,
    /// Stabilizer of the plane `<e1, e2>`: zero (3,1) and (3,2) entries.
    P1,
    /// Stabilizer of the point `e1`: zero (2,1) and (3,1) entries.
    P2,
    /// Upper triangular.
    Borel,
}

impl fmt::Display for Subgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Subgroup::Full => "full",
            Subgroup::P1 => "p1",
            Subgroup::P2 => "p2",
            Subgroup::Borel => "borel",
        })
    }
}

impl FromStr for Subgroup {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "full" => Ok(Subgroup::Full),
            "p1" => Ok(Subgroup::P1),
            "p2" => Ok(Subgroup::P2),
            "borel" => Ok(Subgroup::Borel),
            _ => Err(Error::InvalidArgument(format!("unknown subgroup {s:?}"))),
        }
    }
}

/// `F_p` (when `ext` is `None`) or `F_p[w]/(w^2 - t w + n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Residue {
    p: u64,
    ext: Option<(u64, u64)>,
}

/// `x + y w`; `y = 0` in the prime field.
pub type Elem = (u64, u64);
pub type Point = [Elem; 3];
pub type Mat = [[Elem; 3]; 3];

impl Residue {
    pub fn prime(p: u64) -> Residue {
        Residue { p, ext: None }
    }

    /// `O_k / p` for an inert `p`.
    pub fn quadratic(field: Field, p: u64) -> Residue {
        let t = field.omega_trace().rem_euclid(p as i64) as u64;
        let n = field.omega_norm().rem_euclid(p as i64) as u64;
        Residue {
            p,
            ext: Some((t, n)),
        }
    }

    pub fn order(&self) -> u64 {
        if self.ext.is_some() {
            self.p * self.p
        } else {
            self.p
        }
    }

    pub fn elements(&self) -> Vec<Elem> {
        let ys = if self.ext.is_some() { self.p } else { 1 };
        (0..ys)
            .flat_map(|y| (0..self.p).map(move |x| (x, y)))
            .collect()
    }

    pub fn zero(&self) -> Elem {
        (0, 0)
    }

    pub fn one(&self) -> Elem {
        (1, 0)
    }

    pub fn from_int(&self, v: i64) -> Elem {
        (v.rem_euclid(self.p as i64) as u64, 0)
    }

    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        ((a.0 + b.0) % self.p, (a.1 + b.1) % self.p)
    }

    pub fn neg(&self, a: Elem) -> Elem {
        ((self.p - a.0) % self.p, (self.p - a.1) % self.p)
    }

    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        let p = self.p;
        match self.ext {
            None => (a.0 * b.0 % p, 0),
            Some((t, n)) => {
                // w^2 = t w - n
                let yy = a.1 * b.1 % p;
                let x = (a.0 * b.0 % p + (p - n) * yy % p) % p;
                let y = (a.0 * b.1 % p + a.1 * b.0 % p + t * yy % p) % p;
                (x, y)
            }
        }
    }

    /// The nontrivial automorphism (Frobenius) in the quadratic case,
    /// identity otherwise.
    pub fn conj(&self, a: Elem) -> Elem {
        match self.ext {
            None => a,
            Some((t, _)) => ((a.0 + a.1 * t) % self.p, (self.p - a.1) % self.p),
        }
    }

    pub fn pow(&self, a: Elem, mut e: u64) -> Elem {
        let mut acc = self.one();
        let mut b = a;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: Elem) -> Elem {
        assert!(a != self.zero(), "inverse of zero");
        self.pow(a, self.order() - 2)
    }

    /// A generator of the multiplicative group.
    pub fn primitive(&self) -> Elem {
        match self.ext {
            None => (primitive_root(self.p), 0),
            Some(_) => {
                let q1 = self.order() - 1;
                let fs: Vec<u64> = crate::arith::factor(q1)
                    .into_iter()
                    .map(|(f, _)| f)
                    .collect();
                self.elements()
                    .into_iter()
                    .filter(|&a| a != self.zero())
                    .find(|&a| fs.iter().all(|&f| self.pow(a, q1 / f) != self.one()))
                    .expect("finite fields are cyclic")
            }
        }
    }

    pub fn mat_mul(&self, a: &Mat, b: &Mat) -> Mat {
        std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                (0..3).fold(self.zero(), |acc, k| {
                    self.add(acc, self.mul(a[i][k], b[k][j]))
                })
            })
        })
    }

    pub fn apply(&self, m: &Mat, x: &Point) -> Point {
        std::array::from_fn(|i| {
            (0..3).fold(self.zero(), |acc, k| self.add(acc, self.mul(m[i][k], x[k])))
        })
    }

    pub fn det(&self, m: &Mat) -> Elem {
        let minor = |i1: usize, i2: usize, j1: usize, j2: usize| {
            self.sub(
                self.mul(m[i1][j1], m[i2][j2]),
                self.mul(m[i1][j2], m[i2][j1]),
            )
        };
        let t0 = self.mul(m[0][0], minor(1, 2, 1, 2));
        let t1 = self.mul(m[0][1], minor(1, 2, 0, 2));
        let t2 = self.mul(m[0][2], minor(1, 2, 0, 1));
        self.add(self.sub(t0, t1), t2)
    }

    /// Scale so the first nonzero coordinate is 1.
    pub fn normalize(&self, x: &Point) -> Option<Point> {
        let lead = *x.iter().find(|&&c| c != self.zero())?;
        let inv = self.inv(lead);
        Some(x.map(|c| self.mul(c, inv)))
    }

    pub fn projective_points(&self) -> Vec<Point> {
        let els = self.elements();
        let (z, o) = (self.zero(), self.one());
        let mut pts = Vec::new();
        for &a in &els {
            for &b in &els {
                pts.push([o, a, b]);
            }
        }
        for &b in &els {
            pts.push([z, o, b]);
        }
        pts.push([z, z, o]);
        pts
    }

    fn identity(&self) -> Mat {
        let (z, o) = (self.zero(), self.one());
        [[o, z, z], [z, o, z], [z, z, o]]
    }

    fn elementary(&self, i: usize, j: usize, t: Elem) -> Mat {
        let mut m = self.identity();
        m[i][j] = t;
        m
    }

    fn diag(&self, a: Elem, b: Elem, c: Elem) -> Mat {
        let z = self.zero();
        [[a, z, z], [z, b, z], [z, z, c]]
    }

    fn h0(&self) -> Mat {
        let (z, o) = (self.zero(), self.one());
        [[z, z, o], [z, self.neg(o), z], [o, z, z]]
    }

    /// `conj(g)^t h0 g == h0`; for the prime field this is the orthogonal
    /// condition for `2 x1 x3 - x2^2`.
    pub fn preserves_h0(&self, g: &Mat) -> bool {
        let gt: Mat = std::array::from_fn(|i| std::array::from_fn(|j| self.conj(g[j][i])));
        self.mat_mul(&self.mat_mul(&gt, &self.h0()), g) == self.h0()
    }

    /// `h0(x, x)`.
    pub fn h0_value(&self, x: &Point) -> Elem {
        let t = self.mul(x[0], self.conj(x[2]));
        let cross = self.add(t, self.conj(t));
        self.sub(cross, self.mul(x[1], self.conj(x[1])))
    }
}

/// The finite incidence data at one prime.
#[derive(Debug, Clone)]
pub struct ModPModel {
    pub p: u64,
    pub splitting: SplittingType,
    residue: Residue,
    pub points: Vec<Point>,
}

impl ModPModel {
    pub fn new(field: Field, p: u64) -> Result<ModPModel> {
        ModPModel::with_bound(field, p, DEFAULT_PRIME_BOUND)
    }

    pub fn with_bound(field: Field, p: u64, bound: u64) -> Result<ModPModel> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if p == 2 {
            return Err(Error::InvalidArgument(
                "p = 2 is excluded from the orbit oracle".into(),
            ));
        }
        if p > bound {
            return Err(Error::InvalidArgument(format!(
                "p = {p} exceeds the oracle bound {bound}"
            )));
        }
        let splitting = field.splitting_type(p)?;
        let residue = match splitting {
            SplittingType::Inert => Residue::quadratic(field, p),
            _ => Residue::prime(p),
        };
        let all = residue.projective_points();
        let points = match splitting {
            SplittingType::Split => all,
            _ => all
                .into_iter()
                .filter(|x| residue.h0_value(x) == residue.zero())
                .collect(),
        };
        Ok(ModPModel {
            p,
            splitting,
            residue,
            points,
        })
    }

    pub fn residue(&self) -> Residue {
        self.residue
    }

    /// Generators of the subgroup, each checked against its predicate.
    pub fn generators(&self, subgroup: Subgroup) -> Result<Vec<Mat>> {
        let r = &self.residue;
        let one = r.one();
        let g = r.primitive();
        let gi = r.inv(g);
        let mut gens: Vec<Mat> = Vec::new();
        match self.splitting {
            SplittingType::Split => {
                gens.push(r.elementary(0, 1, one));
                gens.push(r.elementary(0, 2, one));
                gens.push(r.elementary(1, 2, one));
                gens.push(r.diag(g, gi, one));
                gens.push(r.diag(one, g, gi));
                match subgroup {
                    Subgroup::Full => {
                        gens.push(r.elementary(1, 0, one));
                        gens.push(r.elementary(2, 1, one));
                    }
                    Subgroup::P1 => gens.push(r.elementary(1, 0, one)),
                    Subgroup::P2 => gens.push(r.elementary(2, 1, one)),
                    Subgroup::Borel => {}
                }
            }
            SplittingType::Inert | SplittingType::Ramified => {
                if matches!(subgroup, Subgroup::P1 | Subgroup::P2) {
                    return Err(Error::InvalidArgument(format!(
                        "parabolic {subgroup} exists only at split primes; {} is {:?}",
                        self.p, self.splitting
                    )));
                }
                if self.splitting == SplittingType::Inert {
                    // all unipotents [[1, conj(t), s], [0, 1, t], [0, 0, 1]]
                    for t in r.elements() {
                        let nt = r.mul(t, r.conj(t));
                        for s in r.elements() {
                            if r.add(s, r.conj(s)) == nt {
                                gens.push([
                                    [one, r.conj(t), s],
                                    [r.zero(), one, t],
                                    [r.zero(), r.zero(), one],
                                ]);
                            }
                        }
                    }
                    let gb = r.conj(g);
                    gens.push(r.diag(g, r.mul(gb, gi), r.inv(gb)));
                } else {
                    let half = r.inv(r.from_int(2));
                    gens.push([
                        [one, one, half],
                        [r.zero(), one, one],
                        [r.zero(), r.zero(), one],
                    ]);
                    gens.push(r.diag(g, one, gi));
                }
                if subgroup == Subgroup::Full {
                    gens.push(r.h0());
                }
            }
        }
        for m in &gens {
            if !self.in_subgroup(m, subgroup) {
                return Err(Error::Invariant(format!(
                    "generator {m:?} is not in {subgroup} at p = {}",
                    self.p
                )));
            }
        }
        Ok(gens)
    }

    /// Defining predicate of each subgroup of the reduction.
    pub fn in_subgroup(&self, m: &Mat, subgroup: Subgroup) -> bool {
        let r = &self.residue;
        let z = r.zero();
        if r.det(m) != r.one() {
            return false;
        }
        if self.splitting != SplittingType::Split && !r.preserves_h0(m) {
            return false;
        }
        match subgroup {
            Subgroup::Full => true,
            Subgroup::P1 => m[2][0] == z && m[2][1] == z,
            Subgroup::P2 => m[1][0] == z && m[2][0] == z,
            Subgroup::Borel => m[1][0] == z && m[2][0] == z && m[2][1] == z,
        }
    }

    pub fn point_count(&self) -> usize {
        self.points.len()
    }

    /// Orbits of the subgroup on the point set, each a sorted list of point
    /// indices, ordered by smallest member.
    pub fn orbits(&self, subgroup: Subgroup) -> Result<Vec<Vec<usize>>> {
        let gens = self.generators(subgroup)?;
        let index: HashMap<Point, usize> = self
            .points
            .iter()
            .enumerate()
            .map(|(i, &x)| (x, i))
            .collect();
        let n = self.points.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for (i, x) in self.points.iter().enumerate() {
            for g in &gens {
                let y = self
                    .residue
                    .normalize(&self.residue.apply(g, x))
                    .ok_or_else(|| Error::Invariant("group element killed a point".into()))?;
                let j = *index
                    .get(&y)
                    .ok_or_else(|| Error::Invariant("group element left the point set".into()))?;
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
        let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
        for i in 0..n {
            let root = find(&mut parent, i);
            groups.entry(root).or_default().push(i);
        }
        let mut out: Vec<Vec<usize>> = groups.into_values().collect();
        out.sort();
        Ok(out)
    }
}

pub fn modp_isotropic_count(field: Field, p: u64) -> Result<usize> {
    Ok(ModPModel::new(field, p)?.point_count())
}

pub fn modp_parabolic_orbits(field: Field, p: u64, subgroup: Subgroup) -> Result<usize> {
    Ok(ModPModel::new(field, p)?.orbits(subgroup)?.len())
}
