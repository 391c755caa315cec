//! Isotropic lines for the hermitian form
//!
//! ```text
//! h0 = [[0, 0, 1], [0, -1, 0], [1, 0, 0]],   h0(x, x) = 2 Re(x1 conj(x3)) - |x2|^2
//! ```
//!
//! on `k^3`, the ideal class `cl(l)` of `I_x = {a in k : a x in O_k^3}`,
//! sample elements of the integral special unitary group of `h0`, and
//! search oracles that realize and compare classes of lines.
//!
//! Heights: an integral vector `x` has height `max_i N(x_i)`. Searches
//! visit vectors in increasing height, then lexicographically on the
//! `(x, y)` coordinates, so every result here is deterministic.

pub mod fixtures;
pub mod modp;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::classgroup::{reduced_forms, FormClass};
use crate::error::{Error, Result};
use crate::ideals::FractionalIdeal;
use crate::quadfield::{Field, FieldElement, Integral};

pub type Vector = [FieldElement; 3];
pub type IntVector = [Integral; 3];
pub type IntMatrix = [[Integral; 3]; 3];

/// Matrix of `h0`.
pub const H0: [[i64; 3]; 3] = [[0, 0, 1], [0, -1, 0], [1, 0, 0]];

/// `h0(x, x)`, exactly.
pub fn h0_value(x: &Vector) -> BigRational {
    (&x[0] * &x[2].conj()).trace() - x[1].norm()
}

pub fn is_isotropic(x: &Vector) -> Result<bool> {
    if x.iter().all(FieldElement::is_zero) {
        return Err(Error::ZeroVector);
    }
    Ok(h0_value(x).is_zero())
}

fn int_h0_value(field: Field, x: &IntVector) -> i64 {
    field.int_trace(field.int_mul(x[0], field.int_conj(x[2]))) - field.int_norm(x[1])
}

pub fn height(field: Field, x: &IntVector) -> i64 {
    x.iter().map(|&u| field.int_norm(u)).max().unwrap_or(0)
}

fn to_vector(field: Field, x: &IntVector) -> Vector {
    x.map(|u| FieldElement::from_integral(field, u))
}

/// `I_x`, computed as the intersection of the `x_i^{-1} O_k` over nonzero
/// coordinates, which is the inverse of the ideal the coordinates generate.
pub fn coordinate_ideal(field: Field, x: &Vector) -> Result<FractionalIdeal> {
    let gens: Vec<FieldElement> = x.iter().filter(|e| !e.is_zero()).cloned().collect();
    FractionalIdeal::from_generators(field, &gens)?.inverse()
}

/// `cl(I_x)` for an integral vector without building `I_x` itself.
fn int_class(field: Field, x: &IntVector) -> Result<FormClass> {
    let gens: Vec<Integral> = x.iter().copied().filter(|u| !u.is_zero()).collect();
    Ok(FractionalIdeal::from_integrals(field, &gens)?
        .to_form_class()?
        .inverse())
}

fn lex_key(x: &IntVector) -> [i64; 6] {
    [x[0].x, x[0].y, x[1].x, x[1].y, x[2].x, x[2].y]
}

/// An `h0`-isotropic line in `k^3`.
#[derive(Debug, Clone)]
pub struct IsotropicLine {
    field: Field,
    /// Scaled so that the first nonzero coordinate is 1.
    normalized: Vector,
    /// Integral representative with denominators cleared, divided by the
    /// content ideal when that is principal, then unit-normalized.
    integral: IntVector,
}

impl PartialEq for IsotropicLine {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.normalized == other.normalized
    }
}

impl Eq for IsotropicLine {}

impl Hash for IsotropicLine {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.field.hash(state);
        self.normalized.hash(state);
    }
}

impl IsotropicLine {
    pub fn new(field: Field, x: &Vector) -> Result<IsotropicLine> {
        for e in x {
            if e.field() != field {
                return Err(Error::MixedFields(field.disc(), e.field().disc()));
            }
        }
        if !is_isotropic(x)? {
            return Err(Error::NotIsotropic);
        }
        let normalized = normalize(x)?;
        let integral = canonical_integral(field, x)?;
        Ok(IsotropicLine {
            field,
            normalized,
            integral,
        })
    }

    pub fn from_integral(field: Field, x: IntVector) -> Result<IsotropicLine> {
        IsotropicLine::new(field, &to_vector(field, &x))
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn normalized(&self) -> &Vector {
        &self.normalized
    }

    pub fn integral(&self) -> IntVector {
        self.integral
    }

    pub fn height(&self) -> i64 {
        height(self.field, &self.integral)
    }

    pub fn ideal(&self) -> Result<FractionalIdeal> {
        coordinate_ideal(self.field, &self.normalized)
    }

    pub fn class(&self) -> Result<FormClass> {
        self.ideal()?.to_form_class()
    }
}

impl fmt::Display for IsotropicLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = &self.normalized;
        write!(f, "[{a} : {b} : {c}]")
    }
}

fn normalize(x: &Vector) -> Result<Vector> {
    let lead = x
        .iter()
        .find(|e| !e.is_zero())
        .ok_or(Error::ZeroVector)?
        .inverse()?;
    Ok([&x[0] * &lead, &x[1] * &lead, &x[2] * &lead])
}

fn canonical_integral(field: Field, x: &Vector) -> Result<IntVector> {
    let den = x.iter().fold(BigInt::one(), |acc, e| {
        acc.lcm(e.a().denom()).lcm(e.b().denom())
    });
    let den = BigRational::from_integer(den);
    let mut y: Vector = [x[0].scale(&den), x[1].scale(&den), x[2].scale(&den)];
    let content = FractionalIdeal::from_generators(
        field,
        &y.iter()
            .filter(|e| !e.is_zero())
            .cloned()
            .collect::<Vec<_>>(),
    )?;
    if let Some(g) = content.principal_generator()? {
        let ginv = g.inverse()?;
        y = [&y[0] * &ginv, &y[1] * &ginv, &y[2] * &ginv];
    } else {
        // at least remove the rational content
        let g = y.iter().fold(BigInt::zero(), |acc, e| {
            acc.gcd(&e.a().to_integer()).gcd(&e.b().to_integer())
        });
        let inv = BigRational::new(BigInt::one(), g);
        y = [y[0].scale(&inv), y[1].scale(&inv), y[2].scale(&inv)];
    }
    let mut v = [Integral::ZERO; 3];
    for (slot, e) in v.iter_mut().zip(&y) {
        *slot = e
            .to_integral()
            .ok_or_else(|| Error::Invariant("line representative is not integral".into()))?;
    }
    Ok(normalize_unit(field, v))
}

/// Multiply by the unit making the vector lexicographically largest.
fn normalize_unit(field: Field, v: IntVector) -> IntVector {
    field
        .units()
        .into_iter()
        .map(|u| v.map(|c| field.int_mul(u, c)))
        .max_by_key(lex_key)
        .expect("units are nonempty")
}

/// `cl(l)` as a reduced form.
pub fn ideal_class_of_line(line: &IsotropicLine) -> Result<FormClass> {
    line.class()
}

/// Integral elements of norm at most `bound`, ordered by norm then
/// coordinates.
pub fn elements_up_to_norm(field: Field, bound: i64) -> Vec<Integral> {
    let d = field.d() as f64;
    let ymax = if field.omega_half() {
        (2.0 * (bound as f64 / d).sqrt()) as i64 + 1
    } else {
        (bound as f64 / d).sqrt() as i64 + 1
    };
    let xmax = (bound as f64).sqrt() as i64 + ymax + 1;
    let mut out = Vec::new();
    for y in -ymax..=ymax {
        for x in -xmax..=xmax {
            let u = Integral::new(x, y);
            if field.int_norm(u) <= bound {
                out.push(u);
            }
        }
    }
    out.sort_by_key(|&u| (field.int_norm(u), u.x, u.y));
    out
}

/// Nonzero isotropic integral vectors of height at most `bound` whose six
/// integer coordinates are coprime, in search order.
pub fn isotropic_vectors(field: Field, bound: i64) -> Vec<IntVector> {
    let elems = elements_up_to_norm(field, bound);
    let mut by_norm: BTreeMap<i64, Vec<Integral>> = BTreeMap::new();
    for &u in &elems {
        by_norm.entry(field.int_norm(u)).or_default().push(u);
    }
    let mut out = Vec::new();
    for &x1 in &elems {
        for &x3 in &elems {
            let t = field.int_trace(field.int_mul(x1, field.int_conj(x3)));
            let Some(mids) = by_norm.get(&t) else {
                continue;
            };
            for &x2 in mids {
                let v = [x1, x2, x3];
                if v.iter().all(Integral::is_zero) {
                    continue;
                }
                let g = lex_key(&v)
                    .iter()
                    .fold(0, |acc, &c| crate::arith::gcd(acc, c));
                if g == 1 {
                    debug_assert_eq!(int_h0_value(field, &v), 0);
                    out.push(v);
                }
            }
        }
    }
    out.sort_by_key(|v| (height(field, v), lex_key(v)));
    out
}

/// First line (in search order) of height at most `height_bound` with
/// class `c`. `None` only means no such line within the bound.
pub fn find_line_with_class(
    field: Field,
    c: &FormClass,
    height_bound: i64,
) -> Result<Option<IsotropicLine>> {
    if c.disc() != field.disc() {
        return Err(Error::DiscriminantMismatch(field.disc(), c.disc()));
    }
    if height_bound < 1 {
        return Err(Error::InvalidArgument(
            "height bound must be at least 1".into(),
        ));
    }
    for v in isotropic_vectors(field, height_bound) {
        if int_class(field, &v)? == *c {
            return IsotropicLine::from_integral(field, v).map(Some);
        }
    }
    Ok(None)
}

/// One pass of the search that records, for every class, the first line
/// realizing it and that line's height. Stops as soon as all classes are
/// hit.
pub fn realize_classes(
    field: Field,
    height_bound: i64,
) -> Result<BTreeMap<FormClass, (IsotropicLine, i64)>> {
    let h = reduced_forms(field.disc())?.len();
    let mut found: BTreeMap<FormClass, (IsotropicLine, i64)> = BTreeMap::new();
    for v in isotropic_vectors(field, height_bound) {
        let c = int_class(field, &v)?;
        if let std::collections::btree_map::Entry::Vacant(e) = found.entry(c) {
            e.insert((IsotropicLine::from_integral(field, v)?, height(field, &v)));
            if found.len() == h {
                break;
            }
        }
    }
    Ok(found)
}

/// A 3x3 matrix over `k` with its unitary-group membership flags.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitaryMatrix {
    field: Field,
    entries: [[FieldElement; 3]; 3],
    preserves_h0: bool,
    integral: bool,
    det_one: bool,
}

fn mat_mul(
    a: &[[FieldElement; 3]; 3],
    b: &[[FieldElement; 3]; 3],
    field: Field,
) -> [[FieldElement; 3]; 3] {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| (0..3).fold(field.zero(), |acc, k| &acc + &(&a[i][k] * &b[k][j])))
    })
}

fn det3(m: &[[FieldElement; 3]; 3]) -> FieldElement {
    let minor = |i1: usize, i2: usize, j1: usize, j2: usize| {
        &(&m[i1][j1] * &m[i2][j2]) - &(&m[i1][j2] * &m[i2][j1])
    };
    let t0 = &m[0][0] * &minor(1, 2, 1, 2);
    let t1 = &m[0][1] * &minor(1, 2, 0, 2);
    let t2 = &m[0][2] * &minor(1, 2, 0, 1);
    &(&t0 - &t1) + &t2
}

fn h0_matrix(field: Field) -> [[FieldElement; 3]; 3] {
    H0.map(|row| row.map(|v| FieldElement::from_ints(field, v, 0)))
}

fn conj_transpose(m: &[[FieldElement; 3]; 3]) -> [[FieldElement; 3]; 3] {
    std::array::from_fn(|i| std::array::from_fn(|j| m[j][i].conj()))
}

impl UnitaryMatrix {
    pub fn new(field: Field, entries: [[FieldElement; 3]; 3]) -> Result<UnitaryMatrix> {
        for e in entries.iter().flatten() {
            if e.field() != field {
                return Err(Error::MixedFields(field.disc(), e.field().disc()));
            }
        }
        let h0 = h0_matrix(field);
        let lhs = mat_mul(
            &mat_mul(&conj_transpose(&entries), &h0, field),
            &entries,
            field,
        );
        let preserves_h0 = lhs == h0;
        let integral = entries.iter().flatten().all(FieldElement::is_integral);
        let det_one = det3(&entries) == field.one();
        Ok(UnitaryMatrix {
            field,
            entries,
            preserves_h0,
            integral,
            det_one,
        })
    }

    pub fn from_integral(field: Field, m: IntMatrix) -> Result<UnitaryMatrix> {
        UnitaryMatrix::new(
            field,
            m.map(|row| row.map(|u| FieldElement::from_integral(field, u))),
        )
    }

    pub fn identity(field: Field) -> UnitaryMatrix {
        let o = Integral::ONE;
        let z = Integral::ZERO;
        UnitaryMatrix::from_integral(field, [[o, z, z], [z, o, z], [z, z, o]])
            .expect("identity is well formed")
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn entries(&self) -> &[[FieldElement; 3]; 3] {
        &self.entries
    }

    pub fn preserves_h0(&self) -> bool {
        self.preserves_h0
    }

    pub fn is_integral(&self) -> bool {
        self.integral
    }

    pub fn det_one(&self) -> bool {
        self.det_one
    }

    /// Membership in the integral special unitary group of `h0`.
    pub fn in_gamma_std(&self) -> bool {
        self.preserves_h0 && self.integral && self.det_one
    }

    pub fn apply(&self, x: &Vector) -> Vector {
        std::array::from_fn(|i| {
            (0..3).fold(self.field.zero(), |acc, k| {
                &acc + &(&self.entries[i][k] * &x[k])
            })
        })
    }

    pub fn mul(&self, other: &UnitaryMatrix) -> Result<UnitaryMatrix> {
        if self.field != other.field {
            return Err(Error::MixedFields(self.field.disc(), other.field.disc()));
        }
        UnitaryMatrix::new(
            self.field,
            mat_mul(&self.entries, &other.entries, self.field),
        )
    }

    /// `h0 * conj(g)^t * h0`, the inverse of any `h0`-preserving matrix.
    pub fn unitary_inverse(&self) -> Result<UnitaryMatrix> {
        if !self.preserves_h0 {
            return Err(Error::InvalidArgument("matrix does not preserve h0".into()));
        }
        let h0 = h0_matrix(self.field);
        let inv = mat_mul(
            &mat_mul(&h0, &conj_transpose(&self.entries), self.field),
            &h0,
            self.field,
        );
        UnitaryMatrix::new(self.field, inv)
    }

    pub fn integral_entries(&self) -> Option<IntMatrix> {
        let mut out = [[Integral::ZERO; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = self.entries[i][j].to_integral()?;
            }
        }
        Some(out)
    }
}

fn int_apply(field: Field, m: &IntMatrix, x: &IntVector) -> IntVector {
    std::array::from_fn(|i| {
        (0..3).fold(Integral::ZERO, |acc, k| acc + field.int_mul(m[i][k], x[k]))
    })
}

/// The Heisenberg element `[[1, conj(t), s], [0, 1, t], [0, 0, 1]]`, which
/// preserves `h0` exactly when `s + conj(s) = N(t)`.
pub fn heisenberg(field: Field, t: Integral, s: Integral) -> Result<UnitaryMatrix> {
    let o = Integral::ONE;
    let z = Integral::ZERO;
    UnitaryMatrix::from_integral(field, [[o, field.int_conj(t), s], [z, o, t], [z, z, o]])
}

/// The Weyl involution, which is `h0` itself.
pub fn weyl(field: Field) -> UnitaryMatrix {
    let m = H0.map(|row| row.map(|v| Integral::new(v, 0)));
    UnitaryMatrix::from_integral(field, m).expect("well formed")
}

/// `diag(u, conj(u)^2, u)` for a root of unity `u`.
pub fn unit_diagonal(field: Field, u: Integral) -> Result<UnitaryMatrix> {
    let ub = field.int_conj(u);
    let z = Integral::ZERO;
    UnitaryMatrix::from_integral(field, [[u, z, z], [z, field.int_mul(ub, ub), z], [z, z, u]])
}

/// Elements of the integral special unitary group of `h0`: the identity,
/// the Weyl involution, unit diagonals and Heisenberg elements `N(t, s)`
/// with `N(t), N(s) <= bound`. Every element is verified; the sample is not
/// claimed to generate the group.
pub fn gamma_std_sample(field: Field, bound: i64) -> Result<Vec<UnitaryMatrix>> {
    let mut out = vec![UnitaryMatrix::identity(field), weyl(field)];
    for u in field.units() {
        if u != Integral::ONE {
            out.push(unit_diagonal(field, u)?);
        }
    }
    let elems = elements_up_to_norm(field, bound);
    for &t in &elems {
        let nt = field.int_norm(t);
        for &s in &elems {
            if field.int_trace(s) != nt || (t.is_zero() && s.is_zero()) {
                continue;
            }
            out.push(heisenberg(field, t, s)?);
        }
    }
    for g in &out {
        if !g.in_gamma_std() {
            return Err(Error::Invariant(format!(
                "sample element fails membership: {g:?}"
            )));
        }
    }
    Ok(out)
}

/// Smallest-bound sample with at least `min_len` elements.
pub fn gamma_std_sample_at_least(field: Field, min_len: usize) -> Result<Vec<UnitaryMatrix>> {
    let mut bound = 1;
    loop {
        let s = gamma_std_sample(field, bound)?;
        if s.len() >= min_len {
            return Ok(s);
        }
        bound += 1;
    }
}

fn integral_sample(sample: &[UnitaryMatrix]) -> Result<Vec<IntMatrix>> {
    sample
        .iter()
        .map(|g| {
            g.integral_entries()
                .ok_or_else(|| Error::InvalidArgument("sample element is not integral".into()))
        })
        .collect()
}

/// Checks `cl(g l) = cl(l)` for every word `g` of length at most
/// `word_length` in the sample. A `false` means a bug in the class
/// machinery.
pub fn class_invariance_check(
    line: &IsotropicLine,
    sample: &[UnitaryMatrix],
    word_length: usize,
) -> Result<bool> {
    let field = line.field;
    let mats = integral_sample(sample)?;
    let target = int_class(field, &line.integral)?;
    let mut stack: Vec<(IntVector, usize)> = vec![(line.integral, 0)];
    while let Some((v, depth)) = stack.pop() {
        if depth == word_length {
            continue;
        }
        for m in &mats {
            let w = int_apply(field, m, &v);
            if int_class(field, &w)? != target {
                return Ok(false);
            }
            stack.push((w, depth + 1));
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchOutcome {
    /// Sample indices, applied left to right, carrying the first line to
    /// the second.
    Found(Vec<usize>),
    /// The classes differ, so no element of the group can relate the lines.
    NotEquivalent,
    /// Nothing within the word bound; inconclusive.
    NotFound,
}

/// Meet-in-the-middle search for a word in the sample mapping `from` to
/// `to`. Best effort: `NotFound` says nothing about equivalence.
pub fn equivalence_search(
    from: &IsotropicLine,
    to: &IsotropicLine,
    sample: &[UnitaryMatrix],
    word_length: usize,
) -> Result<SearchOutcome> {
    let field = from.field;
    if to.field != field {
        return Err(Error::MixedFields(field.disc(), to.field.disc()));
    }
    if from.class()? != to.class()? {
        return Ok(SearchOutcome::NotEquivalent);
    }
    if from == to {
        return Ok(SearchOutcome::Found(Vec::new()));
    }
    let mats = integral_sample(sample)?;
    let inverses: Vec<IntMatrix> = sample
        .iter()
        .map(|g| g.unitary_inverse().map(|i| i.integral_entries()))
        .collect::<Result<Option<Vec<_>>>>()?
        .ok_or_else(|| Error::InvalidArgument("sample inverse is not integral".into()))?;

    let key = |v: &IntVector| normalize(&to_vector(field, v));
    let forward_depth = word_length.div_ceil(2);
    let backward_depth = word_length / 2;

    let layers =
        |start: IntVector, ms: &[IntMatrix], depth: usize| -> Result<HashMap<Vector, Vec<usize>>> {
            let mut seen: HashMap<Vector, Vec<usize>> = HashMap::from([(key(&start)?, Vec::new())]);
            let mut frontier = vec![(start, Vec::new())];
            for _ in 0..depth {
                let mut next = Vec::new();
                for (v, word) in &frontier {
                    for (i, m) in ms.iter().enumerate() {
                        let w = int_apply(field, m, v);
                        let k = key(&w)?;
                        if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(k) {
                            let mut wd: Vec<usize> = word.clone();
                            wd.push(i);
                            e.insert(wd.clone());
                            next.push((w, wd));
                        }
                    }
                }
                frontier = next;
            }
            Ok(seen)
        };

    let fwd = layers(from.integral, &mats, forward_depth)?;
    let bwd = layers(to.integral, &inverses, backward_depth)?;
    let mut best: Option<Vec<usize>> = None;
    for (k, fw) in &fwd {
        if let Some(bw) = bwd.get(k) {
            let mut word = fw.clone();
            word.extend(bw.iter().rev());
            if best
                .as_ref()
                .is_none_or(|b| (word.len(), &word) < (b.len(), b))
            {
                best = Some(word);
            }
        }
    }
    let Some(word) = best else {
        return Ok(SearchOutcome::NotFound);
    };
    // re-verify the witness
    let mut v = from.integral;
    for &i in &word {
        v = int_apply(field, &mats[i], &v);
    }
    if key(&v)? != to.normalized {
        return Err(Error::Invariant(
            "equivalence witness does not verify".into(),
        ));
    }
    Ok(SearchOutcome::Found(word))
}
