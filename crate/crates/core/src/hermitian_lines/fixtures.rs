//! Plain-text witness records used as regression fixtures.
//!
//! A line record is
//!
//! ```text
//! line <disc> <x1.x> <x1.y> <x2.x> <x2.y> <x3.x> <x3.y> <a> <b> <c> <height>
//! ```
//!
//! and an orbit record is
//!
//! ```text
//! orbits <disc> <p> <split|inert|ramified> <subgroup> <points> <orbits>
//! ```

use std::fmt;
use std::str::FromStr;

use crate::classgroup::{reduce, FormClass, QuadraticForm};
use crate::error::{Error, Result};
use crate::quadfield::{Field, Integral, SplittingType};

use super::modp::{ModPModel, Subgroup};
use super::{IntVector, IsotropicLine};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineWitness {
    pub disc: i64,
    pub vector: IntVector,
    pub class: FormClass,
    pub height: i64,
}

impl LineWitness {
    pub fn from_line(line: &IsotropicLine) -> Result<LineWitness> {
        Ok(LineWitness {
            disc: line.field().disc(),
            vector: line.integral(),
            class: line.class()?,
            height: line.height(),
        })
    }

    /// Rebuild the line and confirm the recorded class.
    pub fn verify(&self) -> Result<IsotropicLine> {
        let field = Field::from_disc(self.disc)?;
        let line = IsotropicLine::from_integral(field, self.vector)?;
        if line.class()? != self.class {
            return Err(Error::Invariant(format!("witness class mismatch: {self}")));
        }
        Ok(line)
    }
}

impl fmt::Display for LineWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let q = self.class.form();
        write!(f, "line {}", self.disc)?;
        for u in &self.vector {
            write!(f, " {} {}", u.x, u.y)?;
        }
        write!(f, " {} {} {} {}", q.a, q.b, q.c, self.height)
    }
}

fn parse_fields(s: &str, tag: &str, n: usize) -> Result<Vec<String>> {
    let parts: Vec<&str> = s.split_whitespace().collect();
    if parts.first() != Some(&tag) || parts.len() != n + 1 {
        return Err(Error::InvalidArgument(format!(
            "malformed {tag} record: {s:?}"
        )));
    }
    Ok(parts[1..].iter().map(|p| p.to_string()).collect())
}

fn int(s: &str) -> Result<i64> {
    s.parse()
        .map_err(|_| Error::InvalidArgument(format!("not an integer: {s:?}")))
}

impl FromStr for LineWitness {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let v = parse_fields(s, "line", 11)?;
        let n: Vec<i64> = v.iter().map(|t| int(t)).collect::<Result<_>>()?;
        Ok(LineWitness {
            disc: n[0],
            vector: [
                Integral::new(n[1], n[2]),
                Integral::new(n[3], n[4]),
                Integral::new(n[5], n[6]),
            ],
            class: reduce(QuadraticForm::new(n[7], n[8], n[9]))?,
            height: n[10],
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitRecord {
    pub disc: i64,
    pub p: u64,
    pub splitting: SplittingType,
    pub subgroup: Subgroup,
    pub points: usize,
    pub orbits: usize,
}

impl OrbitRecord {
    pub fn measure(field: Field, p: u64, subgroup: Subgroup) -> Result<OrbitRecord> {
        let m = ModPModel::new(field, p)?;
        Ok(OrbitRecord {
            disc: field.disc(),
            p,
            splitting: m.splitting,
            subgroup,
            points: m.point_count(),
            orbits: m.orbits(subgroup)?.len(),
        })
    }
}

pub fn splitting_label(t: SplittingType) -> &'static str {
    match t {
        SplittingType::Split => "split",
        SplittingType::Inert => "inert",
        SplittingType::Ramified => "ramified",
    }
}

impl fmt::Display for OrbitRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "orbits {} {} {} {} {} {}",
            self.disc,
            self.p,
            splitting_label(self.splitting),
            self.subgroup,
            self.points,
            self.orbits
        )
    }
}

impl FromStr for OrbitRecord {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let v = parse_fields(s, "orbits", 6)?;
        let splitting = match v[2].as_str() {
            "split" => SplittingType::Split,
            "inert" => SplittingType::Inert,
            "ramified" => SplittingType::Ramified,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown splitting {other:?}"
                )))
            }
        };
        Ok(OrbitRecord {
            disc: int(&v[0])?,
            p: int(&v[1])? as u64,
            splitting,
            subgroup: v[3].parse()?,
            points: int(&v[4])? as usize,
            orbits: int(&v[5])? as usize,
        })
    }
}
