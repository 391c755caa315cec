//! Scans over fundamental discriminants, the on-disk cache, and report
//! rendering.

use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{gcd, is_fundamental_abs};
use crate::classgroup::{parse_structure_label, primary_part, structure_label, ClassGroup};
use crate::cusp_formulas::TorsionConvention;
use crate::error::{Error, Result};

/// Class group data of one field, as stored in the cache.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldInvariants {
    pub abs_disc: u64,
    pub d: u64,
    pub h: u64,
    /// Invariant factors `d1 | d2 | ...`.
    pub structure: Vec<u64>,
}

impl FieldInvariants {
    pub fn compute(abs_disc: u64) -> Result<FieldInvariants> {
        let g = ClassGroup::new(-(abs_disc as i64))?;
        Ok(FieldInvariants {
            abs_disc,
            d: if abs_disc.is_multiple_of(4) {
                abs_disc / 4
            } else {
                abs_disc
            },
            h: g.h(),
            structure: g.structure,
        })
    }

    /// `#{c : c^q = 1}` read off the invariant factors.
    pub fn torsion(&self, q: u64) -> u64 {
        self.structure
            .iter()
            .map(|&n| gcd(n as i64, q as i64) as u64)
            .product()
    }

    pub fn primary(&self, q: u64) -> u64 {
        primary_part(self.h, q)
    }

    pub fn h_q(&self, q: u64, convention: TorsionConvention) -> u64 {
        match convention {
            TorsionConvention::Torsion => self.torsion(q),
            TorsionConvention::Primary => self.primary(q),
        }
    }

    fn to_line(&self) -> String {
        format!(
            "{} {} {} {}",
            self.abs_disc,
            self.d,
            self.h,
            structure_label(&self.structure)
        )
    }

    fn parse_line(line: &str) -> Result<FieldInvariants> {
        let bad = || Error::InvalidArgument(format!("malformed cache line {line:?}"));
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 4 {
            return Err(bad());
        }
        let num = |s: &str| s.parse::<u64>().map_err(|_| bad());
        let inv = FieldInvariants {
            abs_disc: num(parts[0])?,
            d: num(parts[1])?,
            h: num(parts[2])?,
            structure: parse_structure_label(parts[3]).ok_or_else(bad)?,
        };
        if inv.structure.iter().product::<u64>() != inv.h || !is_fundamental_abs(inv.abs_disc) {
            return Err(bad());
        }
        Ok(inv)
    }
}

/// One row of a scan report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanRecord {
    pub abs_disc: u64,
    pub d: u64,
    pub h: u64,
    pub h3: u64,
    pub h3_primary: u64,
    pub structure: String,
    pub min_cusps: u64,
    pub one_cusped: bool,
    pub convention_mismatch: bool,
}

impl ScanRecord {
    pub fn new(inv: &FieldInvariants, convention: TorsionConvention) -> Result<ScanRecord> {
        let h3 = inv.torsion(3);
        let h3_primary = inv.primary(3);
        let used = inv.h_q(3, convention);
        if !inv.h.is_multiple_of(used) {
            return Err(Error::Invariant(format!(
                "h_3 = {used} does not divide h = {} at |disc| {}",
                inv.h, inv.abs_disc
            )));
        }
        let min_cusps = inv.h / used;
        Ok(ScanRecord {
            abs_disc: inv.abs_disc,
            d: inv.d,
            h: inv.h,
            h3,
            h3_primary,
            structure: structure_label(&inv.structure),
            min_cusps,
            one_cusped: min_cusps == 1,
            convention_mismatch: h3 != h3_primary,
        })
    }
}

pub const CACHE_HEADER: &str = "# picard field cache: |disc| d h structure";
pub const CACHE_ENV: &str = "PICARD_CACHE";

/// Append-only store of [`FieldInvariants`] keyed by `|disc|`.
#[derive(Debug, Default)]
pub struct Cache {
    path: Option<PathBuf>,
    records: BTreeMap<u64, FieldInvariants>,
}

impl Cache {
    /// A cache that lives only in memory.
    pub fn in_memory() -> Cache {
        Cache::default()
    }

    /// Open (or start) the cache file at `path`.
    pub fn open(path: impl AsRef<Path>) -> Result<Cache> {
        let path = path.as_ref().to_path_buf();
        let mut records = BTreeMap::new();
        if path.exists() {
            for line in fs::read_to_string(&path)?.lines() {
                if line.trim().is_empty() || line.starts_with('#') {
                    continue;
                }
                let inv = FieldInvariants::parse_line(line)?;
                records.insert(inv.abs_disc, inv);
            }
        }
        Ok(Cache {
            path: Some(path),
            records,
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, abs_disc: u64) -> Option<&FieldInvariants> {
        self.records.get(&abs_disc)
    }

    /// Invariants of every fundamental `|disc|` in `lo..=hi`, computing and
    /// appending the missing ones.
    pub fn range(&mut self, lo: u64, hi: u64) -> Result<Vec<FieldInvariants>> {
        let discs = fundamental_discs(lo, hi);
        let missing: Vec<u64> = discs
            .iter()
            .copied()
            .filter(|a| !self.records.contains_key(a))
            .collect();
        if !missing.is_empty() {
            let fresh = compute_blocks(&missing)?;
            self.append(&fresh)?;
            for inv in fresh {
                self.records.insert(inv.abs_disc, inv);
            }
        }
        Ok(discs.iter().map(|a| self.records[a].clone()).collect())
    }

    fn append(&self, fresh: &[FieldInvariants]) -> Result<()> {
        let Some(path) = &self.path else {
            return Ok(());
        };
        let new_file = !path.exists() || fs::metadata(path)?.len() == 0;
        let mut buf = String::new();
        if new_file {
            buf.push_str(CACHE_HEADER);
            buf.push('\n');
        }
        for inv in fresh {
            buf.push_str(&inv.to_line());
            buf.push('\n');
        }
        let mut f = OpenOptions::new().create(true).append(true).open(path)?;
        f.write_all(buf.as_bytes())?;
        Ok(())
    }
}

const BLOCK: usize = 512;

/// Compute in parallel over blocks; output is in input order.
fn compute_blocks(discs: &[u64]) -> Result<Vec<FieldInvariants>> {
    let blocks: Vec<Result<Vec<FieldInvariants>>> = discs
        .par_chunks(BLOCK)
        .map(|chunk| chunk.iter().map(|&a| FieldInvariants::compute(a)).collect())
        .collect();
    let mut out = Vec::with_capacity(discs.len());
    for b in blocks {
        out.extend(b?);
    }
    Ok(out)
}

/// Fundamental `|disc|` in `lo..=hi`, ascending.
pub fn fundamental_discs(lo: u64, hi: u64) -> Vec<u64> {
    (lo.max(3)..=hi)
        .filter(|&a| is_fundamental_abs(a))
        .collect()
}

fn check_max(max_abs_disc: u64) -> Result<()> {
    if max_abs_disc < 3 {
        return Err(Error::InvalidArgument(format!(
            "max |disc| must be at least 3, got {max_abs_disc}"
        )));
    }
    Ok(())
}

pub fn scan_all(
    cache: &mut Cache,
    max_abs_disc: u64,
    convention: TorsionConvention,
) -> Result<Vec<ScanRecord>> {
    check_max(max_abs_disc)?;
    cache
        .range(3, max_abs_disc)?
        .iter()
        .map(|inv| ScanRecord::new(inv, convention))
        .collect()
}

/// Fields with `h = h_{k,3}`.
pub fn scan_one_cusped(
    cache: &mut Cache,
    max_abs_disc: u64,
    convention: TorsionConvention,
) -> Result<Vec<ScanRecord>> {
    Ok(scan_n_cusped(cache, 1, max_abs_disc, convention)?.records)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NCuspedReport {
    pub n: u64,
    pub max_abs_disc: u64,
    pub records: Vec<ScanRecord>,
    /// Largest `|disc|` in range with `h / h_{k,3} <= n`.
    pub largest_abs_disc: Option<u64>,
}

/// Fields with `h / h_{k,3} <= n`.
pub fn scan_n_cusped(
    cache: &mut Cache,
    n: u64,
    max_abs_disc: u64,
    convention: TorsionConvention,
) -> Result<NCuspedReport> {
    if n == 0 {
        return Err(Error::InvalidArgument("N must be at least 1".into()));
    }
    let records: Vec<ScanRecord> = scan_all(cache, max_abs_disc, convention)?
        .into_iter()
        .filter(|r| r.min_cusps <= n)
        .collect();
    Ok(NCuspedReport {
        n,
        max_abs_disc,
        largest_abs_disc: records.last().map(|r| r.abs_disc),
        records,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrowthRow {
    pub lo: u64,
    pub hi: u64,
    pub fields: usize,
    pub min_ratio: u64,
    pub argmin_abs_disc: u64,
    /// Whether the minimum is at least the previous range's minimum.
    pub nondecreasing: Option<bool>,
}

/// Per-range minimum of `h / h_{k,3}`.
pub fn growth_report(
    cache: &mut Cache,
    ranges: &[(u64, u64)],
    convention: TorsionConvention,
) -> Result<Vec<GrowthRow>> {
    let mut out: Vec<GrowthRow> = Vec::new();
    let mut prev_hi = 0;
    for &(lo, hi) in ranges {
        if lo > hi || hi < 3 {
            return Err(Error::InvalidArgument(format!("empty range [{lo}, {hi}]")));
        }
        if !out.is_empty() && lo < prev_hi {
            return Err(Error::InvalidArgument(format!(
                "range [{lo}, {hi}] overlaps or precedes the previous one"
            )));
        }
        prev_hi = hi;
        let mut best: Option<(u64, u64)> = None;
        let invs = cache.range(lo, hi)?;
        for inv in &invs {
            let ratio = ScanRecord::new(inv, convention)?.min_cusps;
            if best.is_none_or(|(m, _)| ratio < m) {
                best = Some((ratio, inv.abs_disc));
            }
        }
        let (min_ratio, argmin) = best.ok_or_else(|| {
            Error::InvalidArgument(format!("no fundamental discriminant in [{lo}, {hi}]"))
        })?;
        let nondecreasing = out.last().map(|p| min_ratio >= p.min_ratio);
        out.push(GrowthRow {
            lo,
            hi,
            fields: invs.len(),
            min_ratio,
            argmin_abs_disc: argmin,
            nondecreasing,
        });
    }
    Ok(out)
}

/// Decade ranges `[10^a, 10^(a+1)]` for `a` in `from..to`.
pub fn decades(from: u32, to: u32) -> Vec<(u64, u64)> {
    (from..to)
        .map(|a| (10u64.pow(a), 10u64.pow(a + 1)))
        .collect()
}

/// Fields whose standard-level lattice in `SU(r+1, r)` has one cusp:
/// `h^r = h_{k,q}` with `q = 2r + 1`.
pub fn higher_one_cusped(
    cache: &mut Cache,
    r: u32,
    max_abs_disc: u64,
    convention: TorsionConvention,
) -> Result<Vec<ScanRecord>> {
    if r < 2 {
        return Err(Error::InvalidArgument("r must be at least 2".into()));
    }
    check_max(max_abs_disc)?;
    let q = 2 * r as u64 + 1;
    let mut out = Vec::new();
    for inv in cache.range(3, max_abs_disc)? {
        let hq = inv.h_q(q, convention);
        let one = match inv.h.checked_pow(r) {
            Some(hr) => {
                if hr % hq != 0 {
                    return Err(Error::Invariant(format!(
                        "h_q = {hq} does not divide h^r at |disc| {}",
                        inv.abs_disc
                    )));
                }
                hr == hq
            }
            None => false,
        };
        if one {
            out.push(ScanRecord::new(&inv, convention)?);
        }
    }
    Ok(out)
}

/// Rendering of record lists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Json,
    Csv,
    Md,
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "md" => Ok(Format::Md),
            _ => Err(Error::InvalidArgument(format!("unknown format {s:?}"))),
        }
    }
}

pub const CSV_HEADER: &str =
    "abs_disc,d,h,h3,h3_primary,structure,min_cusps,one_cusped,convention_mismatch";

pub fn render_records(records: &[ScanRecord], format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Json => {
            for r in records {
                out.push_str(&serde_json::to_string(r).expect("records serialize"));
                out.push('\n');
            }
        }
        Format::Csv => {
            out.push_str(CSV_HEADER);
            out.push('\n');
            for r in records {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{}\n",
                    r.abs_disc,
                    r.d,
                    r.h,
                    r.h3,
                    r.h3_primary,
                    r.structure,
                    r.min_cusps,
                    r.one_cusped,
                    r.convention_mismatch
                ));
            }
        }
        Format::Md => {
            // grouped by h, as in a table of class numbers
            out.push_str("| h | \\|disc\\| |\n|---|---|\n");
            let mut by_h: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
            for r in records {
                by_h.entry(r.h).or_default().push(r.abs_disc);
            }
            for (h, discs) in by_h {
                let list: Vec<String> = discs.iter().map(u64::to_string).collect();
                out.push_str(&format!("| {h} | {} |\n", list.join(", ")));
            }
        }
    }
    out
}

pub fn render_growth(rows: &[GrowthRow], format: Format) -> String {
    let mut out = String::new();
    let flag = |r: &GrowthRow| match r.nondecreasing {
        None => "-".to_string(),
        Some(b) => b.to_string(),
    };
    match format {
        Format::Json => {
            for r in rows {
                out.push_str(&serde_json::to_string(r).expect("rows serialize"));
                out.push('\n');
            }
        }
        Format::Csv => {
            out.push_str("lo,hi,fields,min_ratio,argmin_abs_disc,nondecreasing\n");
            for r in rows {
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    r.lo,
                    r.hi,
                    r.fields,
                    r.min_ratio,
                    r.argmin_abs_disc,
                    flag(r)
                ));
            }
        }
        Format::Md => {
            out.push_str("| range | fields | min h/h3 | at \\|disc\\| | nondecreasing |\n");
            out.push_str("|---|---|---|---|---|\n");
            for r in rows {
                out.push_str(&format!(
                    "| [{}, {}] | {} | {} | {} | {} |\n",
                    r.lo,
                    r.hi,
                    r.fields,
                    r.min_ratio,
                    r.argmin_abs_disc,
                    flag(r)
                ));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classgroup;

    const T: TorsionConvention = TorsionConvention::Torsion;

    fn discs(rs: &[ScanRecord]) -> Vec<u64> {
        rs.iter().map(|r| r.abs_disc).collect()
    }

    #[test]
    fn fundamental_list_start() {
        assert_eq!(
            fundamental_discs(1, 40),
            vec![3, 4, 7, 8, 11, 15, 19, 20, 23, 24, 31, 35, 39, 40]
        );
    }

    #[test]
    fn one_cusped_up_to_200() {
        let mut c = Cache::in_memory();
        let rs = scan_one_cusped(&mut c, 200, T).unwrap();
        assert_eq!(
            discs(&rs),
            vec![3, 4, 7, 8, 11, 19, 23, 31, 43, 59, 67, 83, 107, 139, 163]
        );
    }

    #[test]
    fn invariants_match_direct_computation() {
        let mut c = Cache::in_memory();
        for inv in c.range(3, 1500).unwrap() {
            let disc = -(inv.abs_disc as i64);
            assert_eq!(inv.h, classgroup::h(disc).unwrap());
            for q in [3, 5, 7, 9] {
                assert_eq!(inv.torsion(q), classgroup::torsion_order(disc, q).unwrap());
                assert_eq!(inv.primary(q), classgroup::primary_order(disc, q).unwrap());
            }
        }
    }

    #[test]
    fn n_cusped_two() {
        let mut c = Cache::in_memory();
        let rep = scan_n_cusped(&mut c, 2, 500, T).unwrap();
        for r in scan_all(&mut c, 500, T).unwrap() {
            let disc = -(r.abs_disc as i64);
            let keep =
                classgroup::h(disc).unwrap() / classgroup::torsion_order(disc, 3).unwrap() <= 2;
            assert_eq!(rep.records.contains(&r), keep, "{r:?}");
        }
        assert_eq!(rep.largest_abs_disc, rep.records.last().map(|r| r.abs_disc));
        let one = scan_n_cusped(&mut c, 1, 500, T).unwrap().records;
        assert_eq!(one, scan_one_cusped(&mut c, 500, T).unwrap());
    }

    #[test]
    fn growth_examples() {
        let mut c = Cache::in_memory();
        let rows = growth_report(&mut c, &[(3, 200), (201, 2000)], T).unwrap();
        assert_eq!(rows[0].min_ratio, 1);
        assert_eq!(rows[0].nondecreasing, None);
        assert_eq!(rows[1].nondecreasing, Some(true));
        assert!(growth_report(&mut c, &[(10, 5)], T).is_err());
        assert!(growth_report(&mut c, &[(100, 200), (150, 300)], T).is_err());
    }

    #[test]
    fn higher_examples() {
        let mut c = Cache::in_memory();
        let nine = vec![3, 4, 7, 8, 11, 19, 43, 67, 163];
        assert_eq!(discs(&higher_one_cusped(&mut c, 2, 200, T).unwrap()), nine);
        assert_eq!(discs(&higher_one_cusped(&mut c, 5, 200, T).unwrap()), nine);
        assert_eq!(
            discs(&higher_one_cusped(&mut c, 2, 30, T).unwrap()),
            vec![3, 4, 7, 8, 11, 19]
        );
        assert!(higher_one_cusped(&mut c, 1, 30, T).is_err());
    }

    #[test]
    fn conventions_differ_at_199() {
        let mut c = Cache::in_memory();
        let all = scan_all(&mut c, 300, T).unwrap();
        let flagged: Vec<u64> = all
            .iter()
            .filter(|r| r.convention_mismatch)
            .map(|r| r.abs_disc)
            .collect();
        assert_eq!(flagged.first(), Some(&199));
        let primary = scan_one_cusped(&mut c, 300, TorsionConvention::Primary).unwrap();
        assert!(discs(&primary).contains(&199));
        assert!(!discs(&scan_one_cusped(&mut c, 300, T).unwrap()).contains(&199));
    }

    #[test]
    fn cache_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.txt");
        let mut cold = Cache::open(&path).unwrap();
        let a = scan_all(&mut cold, 600, T).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with(CACHE_HEADER));
        let mut warm = Cache::open(&path).unwrap();
        assert_eq!(warm.len(), a.len());
        let b = scan_all(&mut warm, 600, T).unwrap();
        assert_eq!(a, b);
        assert_eq!(fs::read_to_string(&path).unwrap(), text);
        // extending appends only the new range
        scan_all(&mut warm, 700, T).unwrap();
        let longer = fs::read_to_string(&path).unwrap();
        assert!(longer.starts_with(&text));
        assert_eq!(
            Cache::open(&path).unwrap().len(),
            fundamental_discs(3, 700).len()
        );
    }

    #[test]
    fn corrupt_cache_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.txt");
        fs::write(&path, "23 23 4 3\n").unwrap();
        assert!(Cache::open(&path).is_err());
        fs::write(&path, "24 6 2 2\n").unwrap();
        assert!(Cache::open(&path).is_ok());
    }

    #[test]
    fn renderings() {
        let mut c = Cache::in_memory();
        let rs = scan_one_cusped(&mut c, 30, T).unwrap();
        let csv = render_records(&rs, Format::Csv);
        assert_eq!(csv.lines().count(), 1 + rs.len());
        assert_eq!(csv.lines().next().unwrap(), CSV_HEADER);
        let json = render_records(&rs, Format::Json);
        let back: ScanRecord = serde_json::from_str(json.lines().next().unwrap()).unwrap();
        assert_eq!(back, rs[0]);
        let md = render_records(&rs, Format::Md);
        assert!(md.contains("| 1 | 3, 4, 7, 8, 11, 19 |"));
        assert!(md.contains("| 3 | 23 |"));
    }
}
