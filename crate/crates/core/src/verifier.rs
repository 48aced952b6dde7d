//! Exhaustive certification of every design kind and of OOSPC correlation
//! properties, leave computation, and orbit classification for cyclic inputs.
//!
//! Coverage is certified by brute force: all `t`-subsets of the point set are
//! enumerated and compared against the developed block multiset. The scan is the
//! oracle of the whole crate - constructions are never trusted, they are checked.
//! The enumeration refuses point counts above [`SCAN_CEILING`].
//!
//! Validity conventions:
//! * packings/Steiner systems: coverage decides validity; non-full orbits only
//!   clear the `strict` flag (a cyclic SQS may legitimately have short orbits);
//! * G/H/G*-designs: the definitions in scope are the strictly invariant ones,
//!   so a short orbit is a violation;
//! * fan designs: coverage decides validity, strictness is reported (the two
//!   components may legitimately carry short orbits, e.g. leaves).

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::bounds;
use crate::error::Error;
use crate::group::{develop, orbit_blocks, orbit_under, Action, Ambient, Block, Point};
use crate::model::{
    DesignFile, DesignInstance, DesignKind, FanDesign, GroupPartition, Invariance, Oospc,
};
use crate::Result;

/// Largest point count the exhaustive subset scan will touch.
pub const SCAN_CEILING: u64 = 400;
/// Violation lists are truncated at this many witnesses; counts stay exact.
pub const MAX_WITNESSES: usize = 32;

/// A single witness of a broken property.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// A `t`-subset covered more than once (or at all, where forbidden).
    OverCovered { subset: Vec<Point>, count: u32 },
    /// A `t`-subset a Steiner/G/H-design must cover but does not.
    Uncovered { subset: Vec<Point> },
    /// A within-group `t`-subset occurring in a block.
    WithinGroupCovered { subset: Vec<Point>, count: u32 },
    /// An H-design block meeting some group twice.
    NonTransversalBlock { block: Block },
    /// The same block developed from two different base blocks.
    DuplicateBlock { block: Block },
    /// A base block with a non-trivial stabilizer where strictness is required.
    ShortOrbit { block: Block, length: usize },
    /// Correlation above λ between codewords `a` and `b` (equal for auto).
    Correlation {
        a: usize,
        b: usize,
        shift: Point,
        overlap: u32,
    },
    /// A symmetric-shape triple whose covering block is not of the required form.
    Shape { triple: Vec<Point>, block: Block },
}

/// Optimality verdict against the bound module.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OptimalityVerdict {
    pub size: u64,
    pub bound: u64,
    pub meets_bound: bool,
}

/// Outcome of a verification run. `valid` holds exactly when no violation was
/// found; `violations` is truncated at [`MAX_WITNESSES`] while `violation_count`
/// stays exact.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub valid: bool,
    pub strict: bool,
    pub base_block_count: usize,
    pub developed_block_count: usize,
    pub orbit_lengths: BTreeMap<usize, usize>,
    pub violation_count: usize,
    pub violations: Vec<Violation>,
    pub max_correlation: Option<u32>,
    pub optimal: Option<OptimalityVerdict>,
}

impl VerificationReport {
    fn new() -> Self {
        VerificationReport {
            valid: true,
            strict: true,
            base_block_count: 0,
            developed_block_count: 0,
            orbit_lengths: BTreeMap::new(),
            violation_count: 0,
            violations: Vec::new(),
            max_correlation: None,
            optimal: None,
        }
    }

    fn push(&mut self, v: Violation) {
        self.valid = false;
        self.violation_count += 1;
        if self.violations.len() < MAX_WITNESSES {
            self.violations.push(v);
        }
    }

    /// One-line human summary, used in construction failure errors.
    pub fn summary(&self) -> String {
        if self.valid {
            format!(
                "valid, {} base blocks, strict={}",
                self.base_block_count, self.strict
            )
        } else {
            format!(
                "{} violations, first: {:?}",
                self.violation_count,
                self.violations.first()
            )
        }
    }
}

fn points_json(pts: &[Point]) -> String {
    let mut s = String::from("[");
    for (i, p) in pts.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        let _ = write!(s, "[{},{}]", p.row, p.col);
    }
    s.push(']');
    s
}

impl Violation {
    pub fn to_json(&self) -> String {
        match self {
            Violation::OverCovered { subset, count } => format!(
                "{{\"kind\":\"over-covered\",\"subset\":{},\"count\":{count}}}",
                points_json(subset)
            ),
            Violation::Uncovered { subset } => {
                format!("{{\"kind\":\"uncovered\",\"subset\":{}}}", points_json(subset))
            }
            Violation::WithinGroupCovered { subset, count } => format!(
                "{{\"kind\":\"within-group-covered\",\"subset\":{},\"count\":{count}}}",
                points_json(subset)
            ),
            Violation::NonTransversalBlock { block } => format!(
                "{{\"kind\":\"non-transversal-block\",\"block\":{}}}",
                points_json(block.points())
            ),
            Violation::DuplicateBlock { block } => format!(
                "{{\"kind\":\"duplicate-block\",\"block\":{}}}",
                points_json(block.points())
            ),
            Violation::ShortOrbit { block, length } => format!(
                "{{\"kind\":\"short-orbit\",\"block\":{},\"length\":{length}}}",
                points_json(block.points())
            ),
            Violation::Correlation { a, b, shift, overlap } => format!(
                "{{\"kind\":\"correlation\",\"codewords\":[{a},{b}],\"shift\":[{},{}],\"overlap\":{overlap}}}",
                shift.row, shift.col
            ),
            Violation::Shape { triple, block } => format!(
                "{{\"kind\":\"shape\",\"triple\":{},\"block\":{}}}",
                points_json(triple),
                points_json(block.points())
            ),
        }
    }
}

/// Serializes a report as a single-line JSON object.
pub fn report_to_json(r: &VerificationReport) -> String {
    let mut s = String::from("{");
    let _ = write!(
        s,
        "\"valid\":{},\"strict\":{},\"base_block_count\":{},\"developed_block_count\":{}",
        r.valid, r.strict, r.base_block_count, r.developed_block_count
    );
    s.push_str(",\"orbit_lengths\":{");
    for (i, (len, count)) in r.orbit_lengths.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        let _ = write!(s, "\"{len}\":{count}");
    }
    s.push('}');
    let _ = write!(s, ",\"violation_count\":{}", r.violation_count);
    s.push_str(",\"violations\":[");
    for (i, v) in r.violations.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        s.push_str(&v.to_json());
    }
    s.push(']');
    if let Some(mc) = r.max_correlation {
        let _ = write!(s, ",\"max_correlation\":{mc}");
    }
    if let Some(o) = r.optimal {
        let _ = write!(
            s,
            ",\"optimal\":{{\"size\":{},\"bound\":{},\"meets_bound\":{}}}",
            o.size, o.bound, o.meets_bound
        );
    }
    s.push('}');
    s
}

// ---------------------------------------------------------------------------
// development with orbit statistics
// ---------------------------------------------------------------------------

struct Developed {
    blocks: Vec<Block>,
    orbit_lengths: BTreeMap<usize, usize>,
    strict: bool,
    short_orbits: Vec<(Block, usize)>,
    duplicates: Vec<Block>,
}

fn develop_with_stats(base: &[Block], action: Action) -> Result<Developed> {
    let blocks = develop(base, action)?;
    let mut orbit_lengths = BTreeMap::new();
    let mut short_orbits = Vec::new();
    let mut strict = true;
    for b in base {
        let o = orbit_under(b, action);
        *orbit_lengths.entry(o.length).or_insert(0usize) += 1;
        if o.length != action.order(b.ambient()) {
            strict = false;
            short_orbits.push((b.clone(), o.length));
        }
    }
    let mut sorted = blocks.clone();
    sorted.sort();
    let mut duplicates = Vec::new();
    for w in sorted.windows(2) {
        if w[0] == w[1] && duplicates.last() != Some(&w[0]) {
            duplicates.push(w[0].clone());
        }
    }
    Ok(Developed {
        blocks,
        orbit_lengths,
        strict,
        short_orbits,
        duplicates,
    })
}

// ---------------------------------------------------------------------------
// subset ranking and coverage counts
// ---------------------------------------------------------------------------

fn check_ceiling(ambient: Ambient) -> Result<()> {
    let p = ambient.order() as u64;
    if p > SCAN_CEILING {
        Err(Error::TooLarge {
            points: p,
            ceiling: SCAN_CEILING,
        })
    } else {
        Ok(())
    }
}

fn rank2(a: usize, b: usize) -> usize {
    debug_assert!(a < b);
    b * (b - 1) / 2 + a
}

fn rank3(a: usize, b: usize, c: usize) -> usize {
    debug_assert!(a < b && b < c);
    c * (c - 1) * (c - 2) / 6 + b * (b - 1) / 2 + a
}

fn n_subsets(p: usize, t: u32) -> usize {
    match t {
        2 => p * (p - 1) / 2,
        3 => p * (p - 1) * (p - 2) / 6,
        _ => unreachable!("only t in {{2, 3}} is scanned"),
    }
}

/// Saturating per-subset coverage counts of the developed block list.
fn coverage_counts(ambient: Ambient, blocks: &[Block], t: u32) -> Vec<u8> {
    let mut counts = vec![0u8; n_subsets(ambient.order(), t)];
    for b in blocks {
        let idx: Vec<usize> = b.points().iter().map(|&p| ambient.index_of(p)).collect();
        let w = idx.len();
        match t {
            2 => {
                for i in 0..w {
                    for j in (i + 1)..w {
                        let r = rank2(idx[i], idx[j]);
                        counts[r] = counts[r].saturating_add(1);
                    }
                }
            }
            3 => {
                for i in 0..w {
                    for j in (i + 1)..w {
                        for k in (j + 1)..w {
                            let r = rank3(idx[i], idx[j], idx[k]);
                            counts[r] = counts[r].saturating_add(1);
                        }
                    }
                }
            }
            _ => unreachable!(),
        }
    }
    counts
}

fn subset_points(ambient: Ambient, idx: &[usize]) -> Vec<Point> {
    idx.iter().map(|&i| ambient.point_at(i)).collect()
}

/// Walks every t-subset in rank order and hands `(rank, indices)` to `f`.
fn for_each_subset(p: usize, t: u32, mut f: impl FnMut(usize, &[usize])) {
    match t {
        2 => {
            let mut r = 0;
            for b in 1..p {
                for a in 0..b {
                    f(r, &[a, b]);
                    r += 1;
                }
            }
        }
        3 => {
            let mut r = 0;
            for c in 2..p {
                for b in 1..c {
                    for a in 0..b {
                        f(r, &[a, b, c]);
                        r += 1;
                    }
                }
            }
        }
        _ => unreachable!(),
    }
}

// ---------------------------------------------------------------------------
// packing verification
// ---------------------------------------------------------------------------

/// Certifies a packing (or Steiner system): every `t`-subset covered at most
/// (exactly, for Steiner) once by the developed blocks. Attaches an optimality
/// verdict for fully invariant quadruple packings of strength 3.
pub fn verify_packing(d: &DesignInstance) -> Result<VerificationReport> {
    if !matches!(d.kind, DesignKind::Packing | DesignKind::Steiner) {
        return Err(Error::Parameter(format!(
            "verify_packing expects a packing/steiner design, got {}",
            d.kind.as_str()
        )));
    }
    if !matches!(d.t, 2 | 3) {
        return Err(Error::Parameter(format!("unsupported strength t={}", d.t)));
    }
    check_ceiling(d.ambient())?;
    let ambient = d.ambient();
    let dev = develop_with_stats(d.base_blocks(), d.action())?;
    let mut report = VerificationReport::new();
    report.base_block_count = d.base_blocks().len();
    report.developed_block_count = dev.blocks.len();
    report.orbit_lengths = dev.orbit_lengths.clone();
    report.strict = dev.strict;
    for b in &dev.duplicates {
        report.push(Violation::DuplicateBlock { block: b.clone() });
    }
    let counts = coverage_counts(ambient, &dev.blocks, d.t);
    let steiner = d.kind == DesignKind::Steiner;
    for_each_subset(ambient.order(), d.t, |r, idx| {
        let c = counts[r] as u32;
        if c > 1 {
            report.push(Violation::OverCovered {
                subset: subset_points(ambient, idx),
                count: c,
            });
        } else if steiner && c == 0 {
            report.push(Violation::Uncovered {
                subset: subset_points(ambient, idx),
            });
        }
    });
    if d.t == 3 && d.block_sizes == [4] && d.invariance == Invariance::Full && ambient.order() > 4 {
        let b = bounds::oospc_upper_bound(ambient.rows as u64, ambient.cols as u64)?;
        let size = report.base_block_count as u64;
        report.optimal = Some(OptimalityVerdict {
            size,
            bound: b.improved,
            meets_bound: size == b.improved,
        });
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// group-design verification
// ---------------------------------------------------------------------------

/// Coverage rules for one partition-aware scan.
#[derive(Clone, Copy, PartialEq)]
enum GroupRule {
    /// Cross-group subsets exactly once, within-group never.
    GDesign,
    /// Transversal subsets exactly once, everything else never; blocks transversal.
    HDesign,
}

fn group_scan(
    report: &mut VerificationReport,
    ambient: Ambient,
    partition: GroupPartition,
    blocks: &[Block],
    t: u32,
    rule: GroupRule,
) {
    if rule == GroupRule::HDesign {
        for b in blocks {
            let mut groups: Vec<usize> = b
                .points()
                .iter()
                .map(|&p| partition.group_of(ambient, p))
                .collect();
            groups.sort();
            if groups.windows(2).any(|w| w[0] == w[1]) {
                report.push(Violation::NonTransversalBlock { block: b.clone() });
                if report.violation_count > 10_000 {
                    return;
                }
            }
        }
    }
    let counts = coverage_counts(ambient, blocks, t);
    let group_of_index: Vec<usize> = (0..ambient.order())
        .map(|i| partition.group_of(ambient, ambient.point_at(i)))
        .collect();
    for_each_subset(ambient.order(), t, |r, idx| {
        let c = counts[r] as u32;
        let g0 = group_of_index[idx[0]];
        let g1 = group_of_index[idx[1]];
        let (all_same, all_distinct) = if idx.len() == 2 {
            (g0 == g1, g0 != g1)
        } else {
            let g2 = group_of_index[idx[2]];
            (g0 == g1 && g1 == g2, g0 != g1 && g0 != g2 && g1 != g2)
        };
        let expected: u32 = match rule {
            GroupRule::GDesign => {
                if all_same {
                    0
                } else {
                    1
                }
            }
            GroupRule::HDesign => {
                if all_distinct {
                    1
                } else {
                    0
                }
            }
        };
        if c != expected {
            if expected == 0 && all_same {
                report.push(Violation::WithinGroupCovered {
                    subset: subset_points(ambient, idx),
                    count: c,
                });
            } else if c == 0 {
                report.push(Violation::Uncovered {
                    subset: subset_points(ambient, idx),
                });
            } else {
                report.push(Violation::OverCovered {
                    subset: subset_points(ambient, idx),
                    count: c,
                });
            }
        }
    });
}

/// Certifies a G- or H-design (also accepts the G* kinds, checking only the
/// group-design conditions): cross-group `t`-subsets exactly once, within-group
/// never, transversality for H-designs, and strictness - the designs in scope
/// are the strictly invariant ones, so a short orbit is a violation.
pub fn verify_group_design(d: &DesignInstance) -> Result<VerificationReport> {
    if !d.kind.is_group_kind() {
        return Err(Error::Parameter(format!(
            "verify_group_design expects a group-design kind, got {}",
            d.kind.as_str()
        )));
    }
    if !matches!(d.t, 2 | 3) {
        return Err(Error::Parameter(format!("unsupported strength t={}", d.t)));
    }
    check_ceiling(d.ambient())?;
    let ambient = d.ambient();
    let partition = d.partition()?;
    let dev = develop_with_stats(d.base_blocks(), d.action())?;
    let mut report = VerificationReport::new();
    report.base_block_count = d.base_blocks().len();
    report.developed_block_count = dev.blocks.len();
    report.orbit_lengths = dev.orbit_lengths.clone();
    report.strict = dev.strict;
    for (b, len) in &dev.short_orbits {
        report.push(Violation::ShortOrbit {
            block: b.clone(),
            length: *len,
        });
    }
    for b in &dev.duplicates {
        report.push(Violation::DuplicateBlock { block: b.clone() });
    }
    let rule = if d.kind == DesignKind::HDesign {
        GroupRule::HDesign
    } else {
        GroupRule::GDesign
    };
    group_scan(&mut report, ambient, partition, &dev.blocks, d.t, rule);
    Ok(report)
}

// ---------------------------------------------------------------------------
// G* verification
// ---------------------------------------------------------------------------

/// Row set `I = {k : 1 ≤ k ≤ ⌊m/2⌋, k ≢ 0 (mod r)}` where `r` is the group count.
fn symmetric_rows(m: u32, r: u32) -> Vec<u32> {
    (1..=m / 2).filter(|k| k % r != 0).collect()
}

/// Does the block have the form `{y, y+a, y−a, y+(0, n/2)}` with `row(a) ∈ I`
/// and `0 ≤ col(a) < n/2`?
fn product_symmetric_form(block: &Block, rows_in_i: &[u32], half: Point) -> bool {
    let amb = block.ambient();
    for &c in block.points() {
        let c2 = amb.add(c, half);
        if !block.contains(c2) || c2 == c {
            continue;
        }
        let rest: Vec<Point> = block
            .points()
            .iter()
            .copied()
            .filter(|&p| p != c && p != c2)
            .collect();
        if rest.len() != 2 {
            continue;
        }
        let (p, q) = (rest[0], rest[1]);
        if amb.add(p, q) != amb.add(c, c) {
            continue;
        }
        for a in [amb.sub(p, c), amb.sub(q, c)] {
            if rows_in_i.contains(&a.row) && a.col < amb.cols / 2 {
                return true;
            }
        }
    }
    false
}

/// Cyclic analogue: `{j, j+a, j−a, j+v/2}` with `1 ≤ a ≤ ⌊v/4⌋`, `a ≢ 0 (mod M)`.
fn cyclic_symmetric_form(block: &Block, v: u32, spacing: u32) -> bool {
    let amb = block.ambient();
    let half = Point::new(0, v / 2);
    for &c in block.points() {
        let c2 = amb.add(c, half);
        if !block.contains(c2) || c2 == c {
            continue;
        }
        let rest: Vec<Point> = block
            .points()
            .iter()
            .copied()
            .filter(|&p| p != c && p != c2)
            .collect();
        if rest.len() != 2 {
            continue;
        }
        let (p, q) = (rest[0], rest[1]);
        if amb.add(p, q) != amb.add(c, c) {
            continue;
        }
        for a in [amb.sub(p, c).col, amb.sub(q, c).col] {
            if a >= 1 && a <= v / 4 && a % spacing != 0 {
                return true;
            }
        }
    }
    false
}

/// Certifies a G*-design: the group-design conditions plus the requirement that
/// every symmetric-shape triple is covered by a block of the symmetric form.
pub fn verify_g_star(d: &DesignInstance) -> Result<VerificationReport> {
    if !matches!(
        d.kind,
        DesignKind::GStar | DesignKind::CyclicGStar | DesignKind::GDesign
    ) {
        return Err(Error::Parameter(format!(
            "verify_g_star expects a g-star/cyclic-g-star/g-design kind, got {}",
            d.kind.as_str()
        )));
    }
    let ambient = d.ambient();
    let cyclic = ambient.rows == 1;
    let partition = d.partition()?;

    // Parity hypotheses of the respective definition.
    if cyclic {
        let v = ambient.cols;
        let spacing = match partition {
            GroupPartition::ColClasses { count } => count,
            _ => {
                return Err(Error::Parameter(
                    "cyclic G* needs column-coset groups".into(),
                ))
            }
        };
        let group_size = v / spacing;
        if !group_size.is_multiple_of(2) || v % 4 != group_size % 4 {
            return Err(Error::Hypothesis(format!(
                "cyclic G* needs n even and mn ≡ n (mod 4); got m={spacing}, n={group_size}"
            )));
        }
    } else {
        let r = match partition {
            GroupPartition::RowClasses { count } => count,
            _ => return Err(Error::Parameter("G* needs row-coset groups".into())),
        };
        let group_rows = ambient.rows / r;
        if !ambient.cols.is_multiple_of(2) || !(ambient.rows - group_rows).is_multiple_of(2) {
            return Err(Error::Hypothesis(format!(
                "G* needs n even and m−e even; got m={}, n={}, e={group_rows}",
                ambient.rows, ambient.cols
            )));
        }
    }

    let mut report = verify_group_design(d)?;
    if !report.valid {
        return Ok(report);
    }

    // Collect the ranks of every symmetric-shape triple.
    let p = ambient.order();
    let mut is_shape = vec![false; n_subsets(p, 3)];
    let mut mark = |pts: [Point; 3]| {
        let mut idx = [
            ambient.index_of(pts[0]),
            ambient.index_of(pts[1]),
            ambient.index_of(pts[2]),
        ];
        idx.sort();
        if idx[0] != idx[1] && idx[1] != idx[2] {
            is_shape[rank3(idx[0], idx[1], idx[2])] = true;
        }
    };
    if cyclic {
        let v = ambient.cols;
        let spacing = match partition {
            GroupPartition::ColClasses { count } => count,
            _ => unreachable!(),
        };
        for j in 0..v {
            for i in 1..=v / 2 {
                if i % spacing == 0 {
                    continue;
                }
                let y = Point::new(0, j);
                let a = Point::new(0, i);
                mark([y, ambient.add(y, a), ambient.add(ambient.add(y, a), a)]);
                mark([y, ambient.add(y, a), ambient.add(y, Point::new(0, v / 2))]);
            }
        }
    } else {
        let r = match partition {
            GroupPartition::RowClasses { count } => count,
            _ => unreachable!(),
        };
        let rows_i = symmetric_rows(ambient.rows, r);
        let half = Point::new(0, ambient.cols / 2);
        for y in ambient.elements() {
            for &i in &rows_i {
                for j in 0..ambient.cols {
                    let x = Point::new(i, j);
                    mark([y, ambient.add(y, x), ambient.sub(y, x)]);
                }
            }
            for zr in 1..ambient.rows {
                if zr % r == 0 {
                    continue;
                }
                for zc in 0..ambient.cols {
                    let z = Point::new(zr, zc);
                    mark([y, ambient.add(y, z), ambient.add(y, half)]);
                }
            }
        }
    }

    // Every shape triple's unique covering block must have the symmetric form.
    let dev = develop(d.base_blocks(), d.action())?;
    let v = ambient.cols;
    let spacing_or_r = match partition {
        GroupPartition::ColClasses { count } | GroupPartition::RowClasses { count } => count,
        _ => unreachable!(),
    };
    let rows_i = if cyclic {
        Vec::new()
    } else {
        symmetric_rows(ambient.rows, spacing_or_r)
    };
    let half = Point::new(0, ambient.cols / 2);
    let mut seen = vec![false; is_shape.len()];
    for b in &dev {
        let ok = if cyclic {
            cyclic_symmetric_form(b, v, spacing_or_r)
        } else {
            product_symmetric_form(b, &rows_i, half)
        };
        let idx: Vec<usize> = b.points().iter().map(|&p| ambient.index_of(p)).collect();
        let w = idx.len();
        for i in 0..w {
            for j in (i + 1)..w {
                for k in (j + 1)..w {
                    let r = rank3(idx[i], idx[j], idx[k]);
                    if is_shape[r] {
                        seen[r] = true;
                        if !ok {
                            report.push(Violation::Shape {
                                triple: vec![
                                    ambient.point_at(idx[i]),
                                    ambient.point_at(idx[j]),
                                    ambient.point_at(idx[k]),
                                ],
                                block: b.clone(),
                            });
                        }
                    }
                }
            }
        }
        if report.violation_count > 10_000 {
            break;
        }
    }
    for_each_subset(p, 3, |r, idx| {
        if is_shape[r] && !seen[r] {
            report.push(Violation::Uncovered {
                subset: subset_points(ambient, idx),
            });
        }
    });
    Ok(report)
}

// ---------------------------------------------------------------------------
// fan verification
// ---------------------------------------------------------------------------

/// Certifies a 1-fan design: `B₀` is a strength-2 H-design on the partition and
/// `B₀ ∪ B₁` is a strength-3 G-design. Validity is coverage; strictness of the
/// two components is reported in `strict` (short orbits are legitimate for some
/// fan designs, e.g. packing leaves).
pub fn verify_fan(f: &FanDesign) -> Result<VerificationReport> {
    check_ceiling(f.ambient())?;
    let ambient = f.ambient();
    let partition = f.partition()?;
    let dev0 = develop_with_stats(f.b0(), f.action())?;
    let dev1 = develop_with_stats(f.b1(), f.action())?;
    let mut report = VerificationReport::new();
    report.base_block_count = f.b0().len() + f.b1().len();
    report.developed_block_count = dev0.blocks.len() + dev1.blocks.len();
    for (len, count) in dev0.orbit_lengths.iter().chain(dev1.orbit_lengths.iter()) {
        *report.orbit_lengths.entry(*len).or_insert(0) += count;
    }
    report.strict = dev0.strict && dev1.strict;
    for b in dev0.duplicates.iter().chain(dev1.duplicates.iter()) {
        report.push(Violation::DuplicateBlock { block: b.clone() });
    }
    // The B₀ component is a strength-2 H-design.
    group_scan(
        &mut report,
        ambient,
        partition,
        &dev0.blocks,
        2,
        GroupRule::HDesign,
    );
    // The union is a strength-3 G-design.
    let mut union = dev0.blocks;
    union.extend(dev1.blocks);
    group_scan(
        &mut report,
        ambient,
        partition,
        &union,
        3,
        GroupRule::GDesign,
    );
    Ok(report)
}

// ---------------------------------------------------------------------------
// OOSPC correlation verification
// ---------------------------------------------------------------------------

/// Correlation buckets of an ordered pair: `buckets[δ] = |X ∩ (Y + δ)|`.
fn correlation_buckets(ambient: Ambient, x: &Block, y: &Block) -> Vec<u32> {
    let mut buckets = vec![0u32; ambient.order()];
    for &a in x.points() {
        for &b in y.points() {
            buckets[ambient.index_of(ambient.sub(a, b))] += 1;
        }
    }
    buckets
}

/// Certifies the auto- and cross-correlation properties of an OOSPC and reports
/// the maximum attained correlation.
pub fn verify_oospc(c: &Oospc) -> Result<VerificationReport> {
    verify_oospc_jobs(c, 1)
}

/// Like [`verify_oospc`] but with the pair scan split over `jobs` workers;
/// results are merged in index order so the report is deterministic.
pub fn verify_oospc_jobs(c: &Oospc, jobs: usize) -> Result<VerificationReport> {
    let ambient = c.ambient();
    let words = c.codewords();
    let lambda = c.lambda;
    let scan_one = |i: usize| -> (u32, Vec<Violation>) {
        let mut max_corr = 0u32;
        let mut violations = Vec::new();
        // Auto-correlation of codeword i at every nonzero shift.
        let auto = correlation_buckets(ambient, &words[i], &words[i]);
        for (d, &overlap) in auto.iter().enumerate() {
            if d == 0 {
                continue;
            }
            max_corr = max_corr.max(overlap);
            if overlap > lambda {
                violations.push(Violation::Correlation {
                    a: i,
                    b: i,
                    shift: ambient.point_at(d),
                    overlap,
                });
            }
        }
        // Cross-correlation against every later codeword at every shift.
        for j in (i + 1)..words.len() {
            let cross = correlation_buckets(ambient, &words[i], &words[j]);
            for (d, &overlap) in cross.iter().enumerate() {
                max_corr = max_corr.max(overlap);
                if overlap > lambda {
                    violations.push(Violation::Correlation {
                        a: i,
                        b: j,
                        shift: ambient.point_at(d),
                        overlap,
                    });
                }
            }
        }
        (max_corr, violations)
    };

    let jobs = jobs.max(1).min(words.len().max(1));
    let results: Vec<(u32, Vec<Violation>)> = if jobs <= 1 || words.len() < 2 {
        (0..words.len()).map(scan_one).collect()
    } else {
        let mut results: Vec<Option<(u32, Vec<Violation>)>> = vec![None; words.len()];
        let next = std::sync::atomic::AtomicUsize::new(0);
        let slots = std::sync::Mutex::new(&mut results);
        std::thread::scope(|scope| {
            for _ in 0..jobs {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                    if i >= words.len() {
                        break;
                    }
                    let r = scan_one(i);
                    slots.lock().unwrap()[i] = Some(r);
                });
            }
        });
        results.into_iter().map(|r| r.unwrap()).collect()
    };

    let mut report = VerificationReport::new();
    report.base_block_count = words.len();
    report.developed_block_count = words.len();
    let mut max_corr = 0;
    for (mc, violations) in results {
        max_corr = max_corr.max(mc);
        for v in violations {
            report.push(v);
        }
    }
    report.max_correlation = Some(max_corr);
    // Orbit statistics of the codeword supports under the full group.
    let mut strict = true;
    for w in words {
        let o = orbit_under(w, Action::Full);
        *report.orbit_lengths.entry(o.length).or_insert(0) += 1;
        strict &= o.length == ambient.order();
    }
    report.strict = strict;
    Ok(report)
}

// ---------------------------------------------------------------------------
// leave computation
// ---------------------------------------------------------------------------

/// The triples of the ambient covered by no developed block, closed under
/// translation and stored as orbit representatives with lengths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeaveSet {
    /// `(representative, orbit length)` per triple orbit.
    pub orbits: Vec<(Block, usize)>,
    /// Exact number of leave triples.
    pub total: usize,
}

/// Leave of a quadruple packing of strength 3.
pub fn compute_leave(d: &DesignInstance) -> Result<LeaveSet> {
    if d.t != 3 || d.block_sizes != [4] {
        return Err(Error::Parameter(
            "leave computation expects a 3-(v,4,1) packing".into(),
        ));
    }
    check_ceiling(d.ambient())?;
    let ambient = d.ambient();
    let dev = develop(d.base_blocks(), d.action())?;
    let counts = coverage_counts(ambient, &dev, 3);
    let p = ambient.order();
    let mut uncovered: Vec<bool> = counts.iter().map(|&c| c == 0).collect();
    let total = uncovered.iter().filter(|&&u| u).count();
    let mut orbits = Vec::new();
    for_each_subset(p, 3, |r, idx| {
        if !uncovered[r] {
            return;
        }
        let block = Block::new(ambient, subset_points(ambient, idx)).unwrap();
        let translates = orbit_blocks(&block, Action::Full);
        let len = translates.len();
        for t in &translates {
            let ti: Vec<usize> = t.points().iter().map(|&q| ambient.index_of(q)).collect();
            uncovered[rank3(ti[0], ti[1], ti[2])] = false;
        }
        let rep = translates.into_iter().min().unwrap();
        orbits.push((rep, len));
    });
    Ok(LeaveSet { orbits, total })
}

// ---------------------------------------------------------------------------
// cyclic orbit classification
// ---------------------------------------------------------------------------

/// Orbit class of a quadruple over `Z_v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrbitClass {
    Full,
    Half,
    Quarter,
}

/// Classifies a quadruple's orbit over `Z_1 × Z_v`: quarter iff the orbit
/// contains `{0, v/4, v/2, 3v/4}`, half iff it contains some
/// `{0, i, v/2, v/2+i}` with `0 < i < v/4`, full otherwise.
pub fn classify_orbit(block: &Block) -> Result<OrbitClass> {
    let amb = block.ambient();
    if amb.rows != 1 {
        return Err(Error::Parameter(
            "orbit classification works over Z_v, i.e. m = 1".into(),
        ));
    }
    if block.len() != 4 {
        return Err(Error::Parameter(
            "orbit classification expects quadruples".into(),
        ));
    }
    let v = amb.cols;
    let rep = orbit_under(block, Action::Full).representative;
    if v.is_multiple_of(4) {
        let quarter = Block::from_pairs(amb, &[(0, 0), (0, v / 4), (0, v / 2), (0, 3 * v / 4)])?;
        if orbit_under(&quarter, Action::Full).representative == rep {
            return Ok(OrbitClass::Quarter);
        }
    }
    if v.is_multiple_of(2) {
        for i in 1..v.div_ceil(4) {
            let half = Block::from_pairs(amb, &[(0, 0), (0, i), (0, v / 2), (0, v / 2 + i)])?;
            if orbit_under(&half, Action::Full).representative == rep {
                return Ok(OrbitClass::Half);
            }
        }
    }
    Ok(OrbitClass::Full)
}

/// Dispatches a parsed design file to the verifier for its kind.
pub fn verify_file(f: &DesignFile) -> Result<VerificationReport> {
    match f {
        DesignFile::Design(d) => match d.kind {
            DesignKind::Packing | DesignKind::Steiner => verify_packing(d),
            DesignKind::GDesign | DesignKind::HDesign => verify_group_design(d),
            DesignKind::GStar | DesignKind::CyclicGStar => verify_g_star(d),
        },
        DesignFile::Fan(fan) => verify_fan(fan),
        DesignFile::Oospc(c) => verify_oospc(c),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blk(m: u32, n: u32, pts: &[(u32, u32)]) -> Block {
        Block::from_pairs(Ambient::new(m, n).unwrap(), pts).unwrap()
    }

    fn packing(m: u32, n: u32, t: u32, k: u32, blocks: Vec<Block>) -> DesignInstance {
        DesignInstance::new(
            Ambient::new(m, n).unwrap(),
            DesignKind::Packing,
            t,
            vec![k],
            None,
            None,
            Invariance::Full,
            blocks,
        )
        .unwrap()
    }

    #[test]
    fn empty_design_leave_is_everything() {
        let d = packing(2, 2, 3, 4, vec![]);
        let leave = compute_leave(&d).unwrap();
        assert_eq!(leave.total, 4);
    }

    #[test]
    fn trivial_sqs4_verifies_non_strict() {
        let d = DesignInstance::new(
            Ambient::new(1, 4).unwrap(),
            DesignKind::Steiner,
            3,
            vec![4],
            None,
            None,
            Invariance::Full,
            vec![blk(1, 4, &[(0, 0), (0, 1), (0, 2), (0, 3)])],
        )
        .unwrap();
        let r = verify_packing(&d).unwrap();
        assert!(r.valid);
        assert!(!r.strict);
        assert_eq!(r.developed_block_count, 1);
        assert_eq!(r.orbit_lengths.get(&1), Some(&1));
    }

    #[test]
    fn overcovered_triple_is_flagged() {
        // Two base blocks sharing three points in their developments.
        let d = packing(
            1,
            8,
            3,
            4,
            vec![
                blk(1, 8, &[(0, 0), (0, 1), (0, 2), (0, 3)]),
                blk(1, 8, &[(0, 0), (0, 1), (0, 2), (0, 5)]),
            ],
        );
        let r = verify_packing(&d).unwrap();
        assert!(!r.valid);
        assert!(r
            .violations
            .iter()
            .any(|v| matches!(v, Violation::OverCovered { .. })));
    }

    #[test]
    fn group_design_requires_full_orbits() {
        // Whole space as one block over Z_4 x Z_1 with e=2: coverage is fine
        // but the orbit is short, which the strict definitions reject.
        let d = DesignInstance::new(
            Ambient::new(4, 1).unwrap(),
            DesignKind::GDesign,
            3,
            vec![4],
            Some(2),
            None,
            Invariance::Full,
            vec![blk(4, 1, &[(0, 0), (1, 0), (2, 0), (3, 0)])],
        )
        .unwrap();
        let r = verify_group_design(&d).unwrap();
        assert!(!r.valid);
        assert!(r
            .violations
            .iter()
            .any(|v| matches!(v, Violation::ShortOrbit { .. })));
    }

    #[test]
    fn oospc_single_codeword() {
        let c = Oospc::new(
            Ambient::new(1, 4).unwrap(),
            2,
            1,
            vec![blk(1, 4, &[(0, 0), (0, 1)])],
        )
        .unwrap();
        let r = verify_oospc(&c).unwrap();
        assert!(r.valid);
        assert_eq!(r.max_correlation, Some(1));
    }

    #[test]
    fn duplicate_codewords_collide_at_zero_shift() {
        let a = blk(2, 4, &[(0, 0), (0, 1), (1, 0), (1, 2)]);
        let c = Oospc::new(Ambient::new(2, 4).unwrap(), 4, 2, vec![a.clone(), a]).unwrap();
        let r = verify_oospc(&c).unwrap();
        assert!(!r.valid);
        assert!(r.violations.iter().any(|v| matches!(
            v,
            Violation::Correlation {
                shift: Point { row: 0, col: 0 },
                overlap: 4,
                ..
            }
        )));
    }

    #[test]
    fn orbit_classes() {
        assert_eq!(
            classify_orbit(&blk(1, 4, &[(0, 0), (0, 1), (0, 2), (0, 3)])).unwrap(),
            OrbitClass::Quarter
        );
        assert_eq!(
            classify_orbit(&blk(1, 8, &[(0, 0), (0, 1), (0, 4), (0, 5)])).unwrap(),
            OrbitClass::Half
        );
        assert_eq!(
            classify_orbit(&blk(1, 8, &[(0, 0), (0, 1), (0, 2), (0, 4)])).unwrap(),
            OrbitClass::Full
        );
        // Classification agrees with the orbit length on the templates.
        let half = blk(1, 8, &[(0, 0), (0, 1), (0, 4), (0, 5)]);
        assert_eq!(orbit_under(&half, Action::Full).length, 4);
        let quarter = blk(1, 4, &[(0, 0), (0, 1), (0, 2), (0, 3)]);
        assert_eq!(orbit_under(&quarter, Action::Full).length, 1);
    }

    #[test]
    fn coverage_counts_match_naive_containment() {
        // Independent oracle for the rank-based scan: count, for every triple,
        // the developed blocks containing it by direct subset tests.
        let ds = crate::data::load_builtin("ex-3.1").unwrap();
        let crate::model::DesignFile::Design(d) = ds.design else { panic!() };
        let amb = d.ambient();
        let dev = develop(d.base_blocks(), Action::Full).unwrap();
        let fast = coverage_counts(amb, &dev, 3);
        for_each_subset(amb.order(), 3, |r, idx| {
            let pts = subset_points(amb, idx);
            let naive = dev
                .iter()
                .filter(|b| pts.iter().all(|&p| b.contains(p)))
                .count() as u8;
            assert_eq!(fast[r], naive, "triple {pts:?}");
        });
    }

    #[test]
    fn scan_ceiling_enforced() {
        let d = packing(25, 25, 3, 4, vec![]);
        assert!(matches!(verify_packing(&d), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn report_json_shape() {
        let d = packing(2, 2, 3, 4, vec![]);
        let r = verify_packing(&d).unwrap();
        let j = report_to_json(&r);
        assert!(j.starts_with("{\"valid\":true"));
        assert!(j.contains("\"violation_count\":0"));
    }
}
