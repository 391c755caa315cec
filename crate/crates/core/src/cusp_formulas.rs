//! Closed-form cusp counts and normalizer indices for Picard modular
//! groups and their higher-rank analogues.
//!
//! Every evaluator returns a [`CuspResult`] carrying the value together with
//! its inputs, a reference string, and flags for conventions or caveats that
//! apply to the value.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::arith::is_prime;
use crate::classgroup;
use crate::error::{Error, Result};
use crate::quadfield::{Field, SplittingType};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Vertex {
    V1,
    V2,
}

/// Local type of the level at one prime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LocalType {
    HyperspecialV0,
    OtherVertex(Vertex),
    Iwahori,
}

/// How `h_{k,q}` is read off the class group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TorsionConvention {
    /// `#{c : c^q = 1}`.
    #[default]
    Torsion,
    /// Order of the `q`-primary part.
    Primary,
}

impl fmt::Display for TorsionConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TorsionConvention::Torsion => "torsion",
            TorsionConvention::Primary => "primary",
        })
    }
}

impl FromStr for TorsionConvention {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "torsion" => Ok(TorsionConvention::Torsion),
            "primary" => Ok(TorsionConvention::Primary),
            _ => Err(Error::InvalidArgument(format!(
                "unknown torsion convention {s:?} (expected torsion or primary)"
            ))),
        }
    }
}

/// `h_{k,q}` under the chosen convention.
pub fn h_q(disc: i64, q: u64, convention: TorsionConvention) -> Result<u64> {
    match convention {
        TorsionConvention::Torsion => classgroup::torsion_order(disc, q),
        TorsionConvention::Primary => classgroup::primary_order(disc, q),
    }
}

/// Level data `K_f` for a maximal lattice: a local type per prime (unlisted
/// primes are hyperspecial) and the subset `xi` of Iwahori primes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KfConfig {
    pub field: Field,
    pub local_type: BTreeMap<u64, LocalType>,
    pub xi: BTreeSet<u64>,
}

impl KfConfig {
    pub fn new(
        field: Field,
        local_type: BTreeMap<u64, LocalType>,
        xi: BTreeSet<u64>,
    ) -> Result<KfConfig> {
        let config = KfConfig {
            field,
            local_type,
            xi,
        };
        config.validate()?;
        Ok(config)
    }

    /// All primes hyperspecial.
    pub fn standard(field: Field) -> KfConfig {
        KfConfig {
            field,
            local_type: BTreeMap::new(),
            xi: BTreeSet::new(),
        }
    }

    /// Iwahori at every prime of `iwahori`, with the given `xi`.
    pub fn with_iwahori(field: Field, iwahori: &[u64], xi: &[u64]) -> Result<KfConfig> {
        KfConfig::new(
            field,
            iwahori.iter().map(|&p| (p, LocalType::Iwahori)).collect(),
            xi.iter().copied().collect(),
        )
    }

    pub fn validate(&self) -> Result<()> {
        for (&p, &t) in &self.local_type {
            if !is_prime(p) {
                return Err(Error::InvalidLevel(format!("level prime {p} is not prime")));
            }
            let split = self.field.splitting_type(p)? == SplittingType::Split;
            match t {
                LocalType::Iwahori if !split => {
                    return Err(Error::InvalidLevel(format!(
                        "Iwahori level at {p}, which does not split in {}",
                        self.field
                    )))
                }
                LocalType::OtherVertex(Vertex::V2) if !split => {
                    return Err(Error::InvalidLevel(format!(
                        "vertex v2 at {p}, which does not split in {}",
                        self.field
                    )))
                }
                _ => {}
            }
        }
        let iwahori = self.iwahori();
        if let Some(p) = self.xi.iter().find(|p| !iwahori.contains(p)) {
            return Err(Error::InvalidLevel(format!(
                "xi contains {p}, which is not an Iwahori prime"
            )));
        }
        Ok(())
    }

    /// The set `I` of Iwahori primes.
    pub fn iwahori(&self) -> BTreeSet<u64> {
        self.local_type
            .iter()
            .filter(|(_, &t)| t == LocalType::Iwahori)
            .map(|(&p, _)| p)
            .collect()
    }

    /// `m = |I \ xi|`.
    pub fn m(&self) -> u32 {
        self.iwahori().difference(&self.xi).count() as u32
    }

    fn describe(&self, inputs: &mut BTreeMap<String, String>) {
        inputs.insert("disc".into(), self.field.disc().to_string());
        let mut put = |key: &str, t: LocalType| {
            let ps: Vec<u64> = self
                .local_type
                .iter()
                .filter(|(_, &u)| u == t)
                .map(|(&p, _)| p)
                .collect();
            inputs.insert(key.into(), join(&ps));
        };
        put("iwahori", LocalType::Iwahori);
        put("v1", LocalType::OtherVertex(Vertex::V1));
        put("v2", LocalType::OtherVertex(Vertex::V2));
        inputs.insert(
            "xi".into(),
            join(&self.xi.iter().copied().collect::<Vec<_>>()),
        );
    }
}

fn join(ps: &[u64]) -> String {
    ps.iter().map(u64::to_string).collect::<Vec<_>>().join(",")
}

/// Level of the congruence subgroup `Gamma(P1, P2, B)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CongruenceLevel {
    pub field: Field,
    pub p1: BTreeSet<u64>,
    pub p2: BTreeSet<u64>,
    pub b: BTreeSet<u64>,
}

impl CongruenceLevel {
    pub fn new(
        field: Field,
        p1: BTreeSet<u64>,
        p2: BTreeSet<u64>,
        b: BTreeSet<u64>,
    ) -> Result<CongruenceLevel> {
        let level = CongruenceLevel { field, p1, p2, b };
        level.validate()?;
        Ok(level)
    }

    pub fn empty(field: Field) -> CongruenceLevel {
        CongruenceLevel {
            field,
            p1: BTreeSet::new(),
            p2: BTreeSet::new(),
            b: BTreeSet::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for p in self.p1.iter().chain(&self.p2).chain(&self.b) {
            if !is_prime(*p) {
                return Err(Error::InvalidLevel(format!("level prime {p} is not prime")));
            }
        }
        for (name, set) in [("P1", &self.p1), ("P2", &self.p2)] {
            for &p in set {
                if self.field.splitting_type(p)? != SplittingType::Split {
                    return Err(Error::InvalidLevel(format!(
                        "{name} contains {p}, which does not split in {}",
                        self.field
                    )));
                }
            }
        }
        let pairs = [
            ("P1", &self.p1, "P2", &self.p2),
            ("P1", &self.p1, "B", &self.b),
            ("P2", &self.p2, "B", &self.b),
        ];
        for (na, a, nb, b) in pairs {
            if let Some(p) = a.intersection(b).next() {
                return Err(Error::InvalidLevel(format!(
                    "{p} lies in both {na} and {nb}"
                )));
            }
        }
        Ok(())
    }

    /// The part of `B` of the given splitting type.
    pub fn b_part(&self, t: SplittingType) -> Result<BTreeSet<u64>> {
        let mut out = BTreeSet::new();
        for &p in &self.b {
            if self.field.splitting_type(p)? == t {
                out.insert(p);
            }
        }
        Ok(out)
    }

    fn describe(&self, inputs: &mut BTreeMap<String, String>) {
        inputs.insert("disc".into(), self.field.disc().to_string());
        for (k, s) in [("p1", &self.p1), ("p2", &self.p2), ("b", &self.b)] {
            inputs.insert(k.into(), join(&s.iter().copied().collect::<Vec<_>>()));
        }
    }
}

/// A formula value with its provenance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CuspResult {
    pub formula: String,
    pub inputs: BTreeMap<String, String>,
    pub value: u64,
    pub flags: Vec<String>,
    pub citation: String,
}

impl CuspResult {
    fn new(formula: &str, citation: &str, value: u64) -> CuspResult {
        CuspResult {
            formula: formula.into(),
            inputs: BTreeMap::new(),
            value,
            flags: Vec::new(),
            citation: citation.into(),
        }
    }

    fn input(mut self, k: &str, v: impl ToString) -> CuspResult {
        self.inputs.insert(k.into(), v.to_string());
        self
    }

    fn flag(mut self, f: impl Into<String>) -> CuspResult {
        self.flags.push(f.into());
        self
    }
}

pub const FLAG_PRIMARY: &str = "h_q uses the q-primary convention";
pub const FLAG_XI_GIVEN: &str = "xi taken as given; realizability not checked";
pub const FLAG_BOUND: &str = "upper bound, not an equality";
pub const FLAG_Q_COMPOSITE: &str =
    "q = 2r+1 is not prime: simple type only, not exhaustive over commensurability classes";
pub const FLAG_UNIT_CAVEAT: &str =
    "d = 3 with q = 3 (mod 4): not every unit is a q-th power; formula applied as stated";

fn overflow() -> Error {
    Error::Invariant("cusp count overflows u64".into())
}

fn checked_pow(base: u64, exp: u32) -> Result<u64> {
    base.checked_pow(exp).ok_or_else(overflow)
}

fn exact_div(num: u64, den: u64, what: &str) -> Result<u64> {
    if den == 0 || !num.is_multiple_of(den) {
        return Err(Error::Invariant(format!(
            "{what}: {den} does not divide {num}"
        )));
    }
    Ok(num / den)
}

pub fn cusps_std(field: Field) -> Result<CuspResult> {
    let h = classgroup::h(field.disc())?;
    Ok(CuspResult::new("cusps_std", "Cor 4.3", h).input("disc", field.disc()))
}

pub fn cusps_congruence(level: &CongruenceLevel) -> Result<CuspResult> {
    level.validate()?;
    let h = classgroup::h(level.field.disc())?;
    let bs = level.b_part(SplittingType::Split)?.len() as u32;
    let bi = level.b_part(SplittingType::Inert)?.len() as u32;
    let br = level.b_part(SplittingType::Ramified)?.len() as u32;
    let twos = level.p1.len() as u32 + level.p2.len() as u32 + bi + br;
    let value = checked_pow(2, twos)?
        .checked_mul(checked_pow(3, bs)?)
        .and_then(|v| v.checked_mul(h))
        .ok_or_else(overflow)?;
    let mut r = CuspResult::new("cusps_congruence", "Prop 4.4", value);
    level.describe(&mut r.inputs);
    Ok(r)
}

/// The congruence subgroup contained in the lattice of level `config`.
pub fn congruence_from_config(config: &KfConfig) -> Result<CongruenceLevel> {
    config.validate()?;
    let mut level = CongruenceLevel::empty(config.field);
    for (&p, &t) in &config.local_type {
        let split = config.field.splitting_type(p)? == SplittingType::Split;
        match t {
            LocalType::HyperspecialV0 => {}
            LocalType::Iwahori => {
                level.b.insert(p);
            }
            LocalType::OtherVertex(Vertex::V1) if split => {
                level.p1.insert(p);
            }
            LocalType::OtherVertex(Vertex::V2) => {
                level.p2.insert(p);
            }
            LocalType::OtherVertex(Vertex::V1) => {
                level.b.insert(p);
            }
        }
    }
    level.validate()?;
    Ok(level)
}

fn tag_config(mut r: CuspResult, config: &KfConfig, convention: TorsionConvention) -> CuspResult {
    config.describe(&mut r.inputs);
    if !config.xi.is_empty() {
        r = r.flag(FLAG_XI_GIVEN);
    }
    if convention == TorsionConvention::Primary {
        r = r.flag(FLAG_PRIMARY);
    }
    r
}

/// `3^m h / h_{k,3}` for the maximal lattice normalizing level `config`.
pub fn cusps_maximal(config: &KfConfig, convention: TorsionConvention) -> Result<CuspResult> {
    config.validate()?;
    let disc = config.field.disc();
    let h = classgroup::h(disc)?;
    let h3 = h_q(disc, 3, convention)?;
    let num = checked_pow(3, config.m())?
        .checked_mul(h)
        .ok_or_else(overflow)?;
    let value = exact_div(num, h3, "cusps_maximal")?;
    Ok(tag_config(
        CuspResult::new("cusps_maximal", "Thm 4.8", value),
        config,
        convention,
    ))
}

/// `[normalizer : Gamma_std] = 3 h_{k,3}`.
pub fn normalizer_index_std(field: Field, convention: TorsionConvention) -> Result<CuspResult> {
    let h3 = h_q(field.disc(), 3, convention)?;
    let mut r =
        CuspResult::new("normalizer_index_std", "Prop 4.6", 3 * h3).input("disc", field.disc());
    if convention == TorsionConvention::Primary {
        r = r.flag(FLAG_PRIMARY);
    }
    Ok(r)
}

/// `3^{1+|I|} h_{k,3}`, an upper bound for the normalizer index.
pub fn normalizer_index_bound(
    config: &KfConfig,
    convention: TorsionConvention,
) -> Result<CuspResult> {
    config.validate()?;
    let h3 = h_q(config.field.disc(), 3, convention)?;
    let value = checked_pow(3, 1 + config.iwahori().len() as u32)?
        .checked_mul(h3)
        .ok_or_else(overflow)?;
    let r = CuspResult::new("normalizer_index_bound", "Prop 3.1", value).flag(FLAG_BOUND);
    Ok(tag_config(r, config, convention))
}

fn check_rank(r: u32) -> Result<()> {
    if r == 0 {
        return Err(Error::InvalidArgument("r must be at least 1".into()));
    }
    Ok(())
}

/// `h^r` cusps of the standard lattice in `SU(r+1, r)`.
pub fn cusps_std_higher(field: Field, r: u32) -> Result<CuspResult> {
    check_rank(r)?;
    let h = classgroup::h(field.disc())?;
    Ok(
        CuspResult::new("cusps_std_higher", "Thm 5.2", checked_pow(h, r)?)
            .input("disc", field.disc())
            .input("r", r),
    )
}

/// `q^m h^r / h_{k,q}` with `q = 2r + 1`.
pub fn cusps_higher(
    config: &KfConfig,
    r: u32,
    convention: TorsionConvention,
) -> Result<CuspResult> {
    check_rank(r)?;
    config.validate()?;
    let disc = config.field.disc();
    let q = 2 * r as u64 + 1;
    let h = classgroup::h(disc)?;
    let hq = h_q(disc, q, convention)?;
    let num = checked_pow(q, config.m())?
        .checked_mul(checked_pow(h, r)?)
        .ok_or_else(overflow)?;
    let value = exact_div(num, hq, "cusps_higher")?;
    let mut res = CuspResult::new("cusps_higher", "Thm 5.3", value)
        .input("r", r)
        .input("q", q);
    if !is_prime(q) {
        res = res.flag(FLAG_Q_COMPOSITE);
    }
    if disc == -3 && q % 4 == 3 {
        res = res.flag(FLAG_UNIT_CAVEAT);
    }
    Ok(tag_config(res, config, convention))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermitian_lines::modp::{modp_parabolic_orbits, Subgroup};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const T: TorsionConvention = TorsionConvention::Torsion;

    fn fd(disc: i64) -> Field {
        Field::from_disc(disc).unwrap()
    }

    fn split_primes(f: Field, n: usize) -> Vec<u64> {
        (3..)
            .filter(|&p| is_prime(p) && f.splitting_type(p).unwrap() == SplittingType::Split)
            .take(n)
            .collect()
    }

    #[test]
    fn std_examples() {
        assert_eq!(cusps_std(fd(-4)).unwrap().value, 1);
        assert_eq!(cusps_std(fd(-23)).unwrap().value, 3);
        assert_eq!(cusps_std(fd(-4027)).unwrap().value, 9);
    }

    #[test]
    fn congruence_examples() {
        let f = fd(-4);
        assert_eq!(
            cusps_congruence(&CongruenceLevel::empty(f)).unwrap().value,
            1
        );
        let s = |v: &[u64]| v.iter().copied().collect::<BTreeSet<u64>>();
        let l = CongruenceLevel::new(f, s(&[]), s(&[]), s(&[5])).unwrap();
        assert_eq!(cusps_congruence(&l).unwrap().value, 3);
        assert_eq!(modp_parabolic_orbits(f, 5, Subgroup::Borel).unwrap(), 3);
        let l = CongruenceLevel::new(f, s(&[5]), s(&[]), s(&[3])).unwrap();
        assert_eq!(cusps_congruence(&l).unwrap().value, 4);
        assert_eq!(modp_parabolic_orbits(f, 5, Subgroup::P1).unwrap(), 2);
        assert_eq!(modp_parabolic_orbits(f, 3, Subgroup::Borel).unwrap(), 2);
        // ramified 2 in B contributes a factor 2
        let l = CongruenceLevel::new(f, s(&[]), s(&[]), s(&[2])).unwrap();
        assert_eq!(cusps_congruence(&l).unwrap().value, 2);
    }

    #[test]
    fn congruence_validation() {
        let f = fd(-4);
        let s = |v: &[u64]| v.iter().copied().collect::<BTreeSet<u64>>();
        assert!(CongruenceLevel::new(f, s(&[3]), s(&[]), s(&[])).is_err());
        assert!(CongruenceLevel::new(f, s(&[5]), s(&[5]), s(&[])).is_err());
        assert!(CongruenceLevel::new(f, s(&[]), s(&[13]), s(&[13])).is_err());
        assert!(CongruenceLevel::new(f, s(&[]), s(&[]), s(&[9])).is_err());
    }

    #[test]
    fn config_validation() {
        let f = fd(-4);
        assert!(KfConfig::with_iwahori(f, &[3], &[]).is_err());
        assert!(KfConfig::with_iwahori(f, &[5], &[13]).is_err());
        assert!(KfConfig::with_iwahori(f, &[5, 13], &[13]).is_ok());
        let v2_inert = BTreeMap::from([(3, LocalType::OtherVertex(Vertex::V2))]);
        assert!(KfConfig::new(f, v2_inert, BTreeSet::new()).is_err());
        let v1_inert = BTreeMap::from([(3, LocalType::OtherVertex(Vertex::V1))]);
        assert!(KfConfig::new(f, v1_inert, BTreeSet::new()).is_ok());
    }

    #[test]
    fn congruence_from_config_examples() {
        let f = fd(-4);
        let c = KfConfig::standard(f);
        assert_eq!(
            congruence_from_config(&c).unwrap(),
            CongruenceLevel::empty(f)
        );
        let c = KfConfig::with_iwahori(f, &[5], &[]).unwrap();
        let l = congruence_from_config(&c).unwrap();
        assert_eq!(l.b_part(SplittingType::Split).unwrap(), BTreeSet::from([5]));
        let c = KfConfig::new(
            f,
            BTreeMap::from([
                (3, LocalType::OtherVertex(Vertex::V1)),
                (5, LocalType::OtherVertex(Vertex::V1)),
                (13, LocalType::OtherVertex(Vertex::V2)),
            ]),
            BTreeSet::new(),
        )
        .unwrap();
        let l = congruence_from_config(&c).unwrap();
        assert_eq!(l.b_part(SplittingType::Inert).unwrap(), BTreeSet::from([3]));
        assert_eq!(l.p1, BTreeSet::from([5]));
        assert_eq!(l.p2, BTreeSet::from([13]));
    }

    #[test]
    fn maximal_examples() {
        let f = fd(-23);
        assert_eq!(cusps_maximal(&KfConfig::standard(f), T).unwrap().value, 1);
        let ps = split_primes(f, 2);
        let c = KfConfig::with_iwahori(f, &ps, &[]).unwrap();
        assert_eq!(cusps_maximal(&c, T).unwrap().value, 9);
        let f = fd(-20);
        let p = split_primes(f, 1);
        let c = KfConfig::with_iwahori(f, &p, &p).unwrap();
        let r = cusps_maximal(&c, T).unwrap();
        assert_eq!(r.value, 2);
        assert_eq!(r.citation, "Thm 4.8");
        assert!(r.flags.contains(&FLAG_XI_GIVEN.to_string()));
    }

    #[test]
    fn normalizer_examples() {
        assert_eq!(normalizer_index_std(fd(-4), T).unwrap().value, 3);
        assert_eq!(normalizer_index_std(fd(-23), T).unwrap().value, 9);
        assert_eq!(normalizer_index_std(fd(-3), T).unwrap().value, 3);
        assert_eq!(
            normalizer_index_bound(&KfConfig::standard(fd(-4)), T)
                .unwrap()
                .value,
            3
        );
        let f = fd(-23);
        let c = KfConfig::with_iwahori(f, &split_primes(f, 1), &[]).unwrap();
        assert_eq!(normalizer_index_bound(&c, T).unwrap().value, 27);
        for disc in [-3, -4, -23, -199, -4027] {
            let f = fd(disc);
            assert!(
                normalizer_index_bound(&KfConfig::standard(f), T)
                    .unwrap()
                    .value
                    >= normalizer_index_std(f, T).unwrap().value
            );
        }
    }

    #[test]
    fn higher_examples() {
        let f = fd(-23);
        assert_eq!(
            cusps_std_higher(f, 1).unwrap().value,
            cusps_std(f).unwrap().value
        );
        assert_eq!(cusps_std_higher(f, 2).unwrap().value, 9);
        assert_eq!(cusps_std_higher(fd(-4), 4).unwrap().value, 1);
        assert_eq!(cusps_higher(&KfConfig::standard(f), 2, T).unwrap().value, 9);
        let g = fd(-4);
        let ps = split_primes(g, 2);
        let c = KfConfig::with_iwahori(g, &ps, &ps).unwrap();
        assert_eq!(cusps_higher(&c, 3, T).unwrap().value, 1);
        let r = cusps_higher(&KfConfig::standard(f), 4, T).unwrap();
        assert!(r.flags.contains(&FLAG_Q_COMPOSITE.to_string()));
        let r = cusps_higher(&KfConfig::standard(fd(-3)), 1, T).unwrap();
        assert!(r.flags.contains(&FLAG_UNIT_CAVEAT.to_string()));
        assert!(cusps_higher(&KfConfig::standard(f), 0, T).is_err());
    }

    #[test]
    fn primary_convention_is_tagged() {
        let f = fd(-199);
        let t = cusps_maximal(&KfConfig::standard(f), T).unwrap();
        let p = cusps_maximal(&KfConfig::standard(f), TorsionConvention::Primary).unwrap();
        assert_eq!(t.value, 3);
        assert_eq!(p.value, 1);
        assert!(p.flags.contains(&FLAG_PRIMARY.to_string()));
        assert!(!t.flags.contains(&FLAG_PRIMARY.to_string()));
    }

    fn random_config(rng: &mut ChaCha8Rng, discs: &[i64]) -> KfConfig {
        let f = fd(discs[rng.gen_range(0..discs.len())]);
        let mut local = BTreeMap::new();
        let mut xi = BTreeSet::new();
        for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31] {
            let split = f.splitting_type(p).unwrap() == SplittingType::Split;
            let choice = rng.gen_range(0..4);
            let t = match choice {
                0 => continue,
                1 if split => LocalType::Iwahori,
                2 if split && rng.gen_bool(0.5) => LocalType::OtherVertex(Vertex::V2),
                _ => LocalType::OtherVertex(Vertex::V1),
            };
            if t == LocalType::Iwahori && rng.gen_bool(0.4) {
                xi.insert(p);
            }
            local.insert(p, t);
        }
        KfConfig::new(f, local, xi).unwrap()
    }

    #[test]
    fn congruence_to_maximal_ratio() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let discs = [
            -3, -4, -7, -8, -15, -20, -23, -39, -56, -84, -87, -199, -4027,
        ];
        for _ in 0..200 {
            let c = random_config(&mut rng, &discs);
            let level = congruence_from_config(&c).unwrap();
            let cong = cusps_congruence(&level).unwrap().value;
            let max = cusps_maximal(&c, T).unwrap().value;
            let h3 = torsion(c.field.disc());
            let twos = level.p1.len()
                + level.p2.len()
                + level.b_part(SplittingType::Inert).unwrap().len()
                + level.b_part(SplittingType::Ramified).unwrap().len();
            let expected = 2u64.pow(twos as u32) * 3u64.pow(c.xi.len() as u32) * h3;
            assert_eq!(cong, max * expected, "{c:?}");
        }
    }

    fn torsion(disc: i64) -> u64 {
        classgroup::torsion_order(disc, 3).unwrap()
    }

    #[test]
    fn maximal_minimized_at_i_equals_xi() {
        for disc in [-4, -23, -87, -4027] {
            let f = fd(disc);
            let ps = split_primes(f, 3);
            let floor = classgroup::h(disc).unwrap() / torsion(disc);
            let mut last = 0;
            for k in 0..=3 {
                let c = KfConfig::with_iwahori(f, &ps, &ps[k..]).unwrap();
                let v = cusps_maximal(&c, T).unwrap().value;
                assert!(v >= floor && v >= last);
                if k == 0 {
                    assert_eq!(v, floor);
                }
                last = v;
            }
        }
    }

    #[test]
    fn higher_one_iff_class_number_one() {
        for disc in [-3i64, -4, -7, -8, -15, -20, -23, -24, -163, -199] {
            let f = fd(disc);
            for r in 2..=5 {
                let v = cusps_higher(&KfConfig::standard(f), r, T).unwrap().value;
                assert_eq!(v == 1, classgroup::h(disc).unwrap() == 1, "{disc} r={r}");
            }
        }
    }
}
