//! The constructive theorems as composable operations. Every operation verifies
//! its own inputs and outputs by default (pass `verify = false` to skip for
//! speed); a failed output verification is a bug surface, not a user error, and
//! aborts with a stage-tagged report.

use std::collections::BTreeMap;

use crate::bounds;
use crate::error::Error;
use crate::group::{orbit_blocks, orbit_under, Action, Ambient, Block, Point};
use crate::model::{DesignInstance, DesignKind, FanDesign, GroupPartition, Invariance};
use crate::verifier::{self, OrbitClass, VerificationReport};
use crate::Result;

fn require_valid(report: VerificationReport, stage: &str) -> Result<VerificationReport> {
    if report.valid {
        Ok(report)
    } else {
        Err(Error::FailedVerification {
            stage: stage.into(),
            summary: report.summary(),
        })
    }
}

fn require_strict(report: VerificationReport, stage: &str) -> Result<VerificationReport> {
    let report = require_valid(report, stage)?;
    if report.strict {
        Ok(report)
    } else {
        Err(Error::FailedVerification {
            stage: stage.into(),
            summary: "design is valid but not strictly invariant".into(),
        })
    }
}

/// Verification that tolerates point counts beyond the exhaustive-scan ceiling:
/// outputs too large to certify are passed through unchecked.
fn verify_if_scannable(
    result: Result<VerificationReport>,
    stage: &str,
    strict: bool,
) -> Result<()> {
    match result {
        Ok(report) => {
            if strict {
                require_strict(report, stage)?;
            } else {
                require_valid(report, stage)?;
            }
            Ok(())
        }
        Err(Error::TooLarge { .. }) => Ok(()),
        Err(e) => Err(e),
    }
}

// ---------------------------------------------------------------------------
// semi-cyclic H(4, n, 4, 3)
// ---------------------------------------------------------------------------

/// The semi-cyclic `H(4, n, 4, 3)` design on `I₄ × Z_n` with singleton-row
/// groups: base blocks `{(0,0), (1,y), (2,z), (3,y+z)}` for `y, z ∈ Z_n`,
/// developed by the column shift.
pub fn semicyclic_h4(n: u32) -> Result<DesignInstance> {
    if n == 0 {
        return Err(Error::Parameter("n must be positive".into()));
    }
    let ambient = Ambient::new(4, n)?;
    let mut base = Vec::with_capacity((n * n) as usize);
    for y in 0..n {
        for z in 0..n {
            base.push(Block::new(
                ambient,
                vec![
                    Point::new(0, 0),
                    Point::new(1, y),
                    Point::new(2, z),
                    Point::new(3, (y + z) % n),
                ],
            )?);
        }
    }
    DesignInstance::new(
        ambient,
        DesignKind::HDesign,
        3,
        vec![4],
        Some(4),
        None,
        Invariance::SemiCyclic,
        base,
    )
}

// ---------------------------------------------------------------------------
// filling
// ---------------------------------------------------------------------------

/// Fills the group of a strictly invariant `G(m/e, en, k, 3)` design with a
/// strictly invariant `3-(en, k, 1)` packing, yielding a strictly invariant
/// `3-(mn, k, 1)` packing with `b + ((mn−1)(mn−2) − (en−1)(en−2))/(k(k−1)(k−2))`
/// base blocks.
pub fn fill(g: &DesignInstance, sub: &DesignInstance, verify: bool) -> Result<DesignInstance> {
    if !g.kind.is_group_kind() {
        return Err(Error::Parameter(
            "fill expects a group-divisible design".into(),
        ));
    }
    if g.invariance != Invariance::Full {
        return Err(Error::Parameter(
            "fill expects a fully invariant design".into(),
        ));
    }
    let ambient = g.ambient();
    let partition = g.partition()?;
    if verify {
        require_strict(verifier::verify_group_design(g)?, "fill-input-g")?;
        require_strict(verifier::verify_packing(sub)?, "fill-input-sub")?;
    }
    if !matches!(sub.kind, DesignKind::Packing | DesignKind::Steiner) || sub.t != 3 {
        return Err(Error::Parameter(
            "fill expects a strength-3 packing as the sub-design".into(),
        ));
    }

    // Embed the sub-design on the subgroup carrying group 0.
    let embedded: Vec<Block> = match partition {
        GroupPartition::RowClasses { count: r } => {
            let e_rows = ambient.rows / r;
            if sub.ambient() != Ambient::new(e_rows, ambient.cols)? {
                return Err(Error::AmbientMismatch {
                    expected: (e_rows, ambient.cols),
                    found: (sub.ambient().rows, sub.ambient().cols),
                });
            }
            sub.base_blocks()
                .iter()
                .map(|b| {
                    Block::new(
                        ambient,
                        b.points()
                            .iter()
                            .map(|p| Point::new(p.row * r, p.col))
                            .collect(),
                    )
                })
                .collect::<Result<_>>()?
        }
        GroupPartition::ColClasses { count: spacing } => {
            let group_size = ambient.cols / spacing;
            if sub.ambient() != Ambient::new(1, group_size)? {
                return Err(Error::AmbientMismatch {
                    expected: (1, group_size),
                    found: (sub.ambient().rows, sub.ambient().cols),
                });
            }
            sub.base_blocks()
                .iter()
                .map(|b| {
                    Block::new(
                        ambient,
                        b.points()
                            .iter()
                            .map(|p| Point::new(0, p.col * spacing))
                            .collect(),
                    )
                })
                .collect::<Result<_>>()?
        }
        GroupPartition::Singletons => {
            return Err(Error::Parameter("fill needs a non-trivial group".into()))
        }
    };

    let mut base = g.base_blocks().to_vec();
    base.extend(embedded);
    let mut sizes = g.block_sizes.clone();
    sizes.extend(sub.block_sizes.iter().copied());
    let kind = if sub.kind == DesignKind::Steiner {
        DesignKind::Steiner
    } else {
        DesignKind::Packing
    };
    let out = DesignInstance::new(
        ambient,
        kind,
        3,
        sizes,
        None,
        Some(2),
        Invariance::Full,
        base,
    )
    .map_err(|e| Error::FailedVerification {
        stage: "fill-embedding".into(),
        summary: e.to_string(),
    })?;

    // The G-design part must contribute exactly the closed-form count.
    if g.block_sizes.len() == 1 {
        let k = g.block_sizes[0] as u64;
        let group_size = partition.group_size(ambient) as u64;
        let expect = bounds::expected_g_base_count(
            ambient.rows as u64 * ambient.cols as u64 / group_size,
            group_size,
            1,
            k,
        );
        if let Ok(expect) = expect {
            if g.base_blocks().len() as u64 != expect {
                return Err(Error::FailedVerification {
                    stage: "fill-count".into(),
                    summary: format!(
                        "G-design has {} base blocks, closed form expects {expect}",
                        g.base_blocks().len()
                    ),
                });
            }
        }
    }

    if verify {
        require_strict(verifier::verify_packing(&out)?, "fill-output")?;
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// cyclic SQS x semi-cyclic G(2, n, 4, 3) product
// ---------------------------------------------------------------------------

/// The three-step product: a cyclic `SQS(m)` and a strictly semi-cyclic
/// `G(2, n, 4, 3)` design combine into a strictly `Z_m × Z_n`-invariant
/// `G(m/2, 2n, 4, 3)` design relative to `(m/2)Z_m × Z_n`.
///
/// Step 1 turns the SQS into a strictly invariant `H(m, 2, 4, 3)` by lifting
/// one point of each base block to the second column - four lifts for a full
/// orbit, two for a half orbit, one for the quarter orbit (taken in the
/// normal-form labeling found by translation search). Step 2 inflates columns
/// by a semi-cyclic `H(4, n/2, 4, 3)` through the interleaving `(i, ℓ, k) ↦
/// (i, ℓ + 2k)`. Step 3 adjoins copies of the `G(2, n, 4, 3)` on `{0, i} × Z_n`.
pub fn csqs_g_product(
    sqs: &DesignInstance,
    g2n: &DesignInstance,
    verify: bool,
) -> Result<DesignInstance> {
    if sqs.ambient().rows != 1 {
        return Err(Error::Parameter(
            "the SQS ingredient lives over Z_m, stored with m = 1".into(),
        ));
    }
    let m = sqs.ambient().cols;
    if !m.is_multiple_of(2) {
        return Err(Error::Hypothesis(
            "cyclic SQS(m) needs m ≡ 2, 4 (mod 6), in particular even".into(),
        ));
    }
    let n = g2n.ambient().cols;
    if g2n.ambient().rows != 2 || n < 2 || !n.is_multiple_of(2) {
        return Err(Error::Parameter(
            "the second ingredient must be a semi-cyclic G(2, n, 4, 3) with n even, n > 1".into(),
        ));
    }
    if g2n.invariance != Invariance::SemiCyclic {
        return Err(Error::Parameter(
            "the G(2, n, 4, 3) ingredient must be semi-cyclic".into(),
        ));
    }
    if verify {
        require_valid(verifier::verify_packing(sqs)?, "csqs-input-sqs")?;
        if sqs.kind != DesignKind::Steiner {
            return Err(Error::Parameter(
                "the first ingredient must be a Steiner quadruple system".into(),
            ));
        }
        require_strict(verifier::verify_group_design(g2n)?, "csqs-input-g2n")?;
    }

    // Step 1: strictly Z_m x Z_2-invariant H(m, 2, 4, 3).
    let step1 = csqs_to_h_step(sqs)?;
    if verify {
        require_strict(verifier::verify_group_design(&step1)?, "csqs-step1")?;
    }

    // Step 2: inflate to a strictly Z_m x Z_n-invariant H(m, n, 4, 3).
    let step2 = if n == 2 {
        step1
    } else {
        let np = n / 2;
        let amb = Ambient::new(m, n)?;
        let mut base = Vec::with_capacity(step1.base_blocks().len() * (np * np) as usize);
        for a in step1.base_blocks() {
            let pts = a.points();
            for y in 0..np {
                for z in 0..np {
                    let cols = [0, y, z, (y + z) % np];
                    let block: Vec<Point> = pts
                        .iter()
                        .zip(cols.iter())
                        .map(|(p, &k)| Point::new(p.row, (p.col + 2 * k) % n))
                        .collect();
                    base.push(Block::new(amb, block)?);
                }
            }
        }
        let h = DesignInstance::new(
            amb,
            DesignKind::HDesign,
            3,
            vec![4],
            Some(m),
            None,
            Invariance::Full,
            base,
        )?;
        if verify {
            verify_if_scannable(verifier::verify_group_design(&h), "csqs-step2", true)?;
        }
        h
    };

    // Step 3: adjoin the G(2, n, 4, 3) on {0, i} x Z_n for 1 <= i < m/2.
    let amb = Ambient::new(m, n)?;
    let mut base = step2.base_blocks().to_vec();
    for i in 1..m / 2 {
        for b in g2n.base_blocks() {
            let pts: Vec<Point> = b
                .points()
                .iter()
                .map(|p| Point::new(if p.row == 0 { 0 } else { i }, p.col))
                .collect();
            base.push(Block::new(amb, pts)?);
        }
    }
    let out = DesignInstance::new(
        amb,
        DesignKind::GDesign,
        3,
        vec![4],
        Some(2),
        None,
        Invariance::Full,
        base,
    )?;
    if verify {
        verify_if_scannable(verifier::verify_group_design(&out), "csqs-output", true)?;
    }
    Ok(out)
}

/// Step 1 of the product, exposed for inspection: the `H(m, 2, 4, 3)` built
/// from the orbit classification of the cyclic SQS base blocks.
pub fn csqs_to_h_step(sqs: &DesignInstance) -> Result<DesignInstance> {
    let m = sqs.ambient().cols;
    let amb = Ambient::new(m, 2)?;
    let mut base = Vec::new();
    for b in sqs.base_blocks() {
        if b.len() != 4 {
            return Err(Error::Parameter(
                "SQS base blocks must be quadruples".into(),
            ));
        }
        let class = verifier::classify_orbit(b)?;
        let lifts: &[usize] = match class {
            OrbitClass::Full => &[0, 1, 2, 3],
            OrbitClass::Half => &[3, 2],
            OrbitClass::Quarter => &[3],
        };
        // For half/quarter orbits the lifted points are fixed by the
        // normal-form labeling {0, i, m/2, m/2+i} / {0, m/4, m/2, 3m/4};
        // any normal-form translate yields the same orbits.
        let labeled: Vec<u32> = match class {
            OrbitClass::Full => b.points().iter().map(|p| p.col).collect(),
            OrbitClass::Half => normal_form_translate(b, |cols| {
                cols[0] == 0
                    && cols[2] == m / 2
                    && cols[3] == m / 2 + cols[1]
                    && cols[1] > 0
                    && cols[1] < m.div_ceil(4)
            })?,
            OrbitClass::Quarter => {
                normal_form_translate(b, |cols| cols == [0, m / 4, m / 2, 3 * m / 4])?
            }
        };
        for &lift in lifts {
            let pts: Vec<Point> = labeled
                .iter()
                .enumerate()
                .map(|(i, &col)| Point::new(col, if i == lift { 1 } else { 0 }))
                .collect();
            base.push(Block::new(amb, pts)?);
        }
    }
    DesignInstance::new(
        amb,
        DesignKind::HDesign,
        3,
        vec![4],
        Some(m),
        None,
        Invariance::Full,
        base,
    )
}

fn normal_form_translate(b: &Block, matches: impl Fn([u32; 4]) -> bool) -> Result<Vec<u32>> {
    let v = b.ambient().cols;
    for d in 0..v {
        let t = b.translate(Point::new(0, d))?;
        let cols: Vec<u32> = t.points().iter().map(|p| p.col).collect();
        let cols4 = [cols[0], cols[1], cols[2], cols[3]];
        if matches(cols4) {
            return Ok(cols);
        }
    }
    Err(Error::FailedVerification {
        stage: "csqs-normal-form".into(),
        summary: format!("no normal-form translate for {:?}", b.points()),
    })
}

// ---------------------------------------------------------------------------
// G* inflation (columns and rows)
// ---------------------------------------------------------------------------

struct GStarSplit {
    /// Base blocks other than the symmetric `{(0,0), (0,n/2), x, −x}` family;
    /// that family is regenerated wholesale by the C2/D2 emission.
    f2: Vec<Block>,
    /// Group count.
    r: u32,
    rows_i: Vec<u32>,
}

fn split_g_star(d: &DesignInstance, verify: bool) -> Result<GStarSplit> {
    if !matches!(d.kind, DesignKind::GDesign | DesignKind::GStar) {
        return Err(Error::Parameter(
            "expected a (product-form) G*-design".into(),
        ));
    }
    if d.block_sizes != [4] || d.t != 3 {
        return Err(Error::Parameter(
            "G* inflation expects block size 4, strength 3".into(),
        ));
    }
    if verify {
        require_strict(verifier::verify_g_star(d)?, "gstar-input")?;
    }
    let ambient = d.ambient();
    let r = match d.partition()? {
        GroupPartition::RowClasses { count } => count,
        _ => {
            return Err(Error::Parameter(
                "G* inflation needs row-coset groups".into(),
            ))
        }
    };
    let (m, n) = (ambient.rows, ambient.cols);
    let e_rows = m / r;
    if n % 2 != 0 || (m - e_rows) % 2 != 0 {
        return Err(Error::Hypothesis(format!(
            "G* needs n even and m−e even; got m={m}, n={n}, e={e_rows}"
        )));
    }
    let rows_i: Vec<u32> = (1..=m / 2).filter(|k| k % r != 0).collect();
    let half = Point::new(0, n / 2);
    let mut f1 = Vec::new();
    let mut f2 = Vec::new();
    for b in d.base_blocks() {
        if symmetric_orbit_product(b, &rows_i, half) {
            f1.push(b.clone());
        } else {
            f2.push(b.clone());
        }
    }
    let expect_f1 = (n as u64 * (m - e_rows) as u64) / 4;
    if f1.len() as u64 != expect_f1 {
        return Err(Error::Parameter(format!(
            "input shape: {} symmetric base blocks, expected {expect_f1}",
            f1.len()
        )));
    }
    Ok(GStarSplit { f2, r, rows_i })
}

/// Orbit-level test for the `{y, y+a, y−a, y+(0,n/2)}` family: some rooting of
/// the block matches, regardless of which translate is stored.
fn symmetric_orbit_product(block: &Block, rows_i: &[u32], half: Point) -> bool {
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
        if amb.add(rest[0], rest[1]) == amb.add(c, c) {
            let a = amb.sub(rest[0], c);
            let neg = amb.sub(rest[1], c);
            if rows_i.contains(&a.row) || rows_i.contains(&neg.row) {
                return true;
            }
        }
    }
    false
}

/// Column inflation: a strictly invariant `G*(m/e, en, 4, 3)` over `Z_m × Z_n`
/// becomes one over `Z_m × Z_{ng}` for any odd `g ≥ 3`, through the four block
/// families built on the split `F₁ ∪ F₂` of the base blocks.
pub fn gstar_expand_cols(d: &DesignInstance, g: u32, verify: bool) -> Result<DesignInstance> {
    if g < 3 || g.is_multiple_of(2) {
        return Err(Error::Hypothesis(format!(
            "g must be odd and at least 3, got {g}"
        )));
    }
    let split = split_g_star(d, verify)?;
    let ambient = d.ambient();
    let (m, n) = (ambient.rows, ambient.cols);
    let out_amb = Ambient::new(m, n * g)?;
    let ng = n * g;
    let mut base: Vec<Block> = Vec::new();

    // C1: inflate every non-symmetric base block by the semi-cyclic H(4, g, 4, 3)
    // pattern along the new column levels.
    for b in &split.f2 {
        let pts = b.points();
        for k1 in 0..g {
            for k2 in 0..g {
                let ks = [0, k1, k2, (k1 + k2) % g];
                let block: Vec<Point> = pts
                    .iter()
                    .zip(ks.iter())
                    .map(|(p, &k)| Point::new(p.row, (p.col + k * n) % ng))
                    .collect();
                base.push(Block::new(out_amb, block)?);
            }
        }
    }
    let c1 = base.len();
    // C2: the symmetric family on the inflated column range.
    for &i in &split.rows_i {
        for j in 0..ng / 2 {
            base.push(Block::new(
                out_amb,
                vec![
                    Point::new(0, 0),
                    Point::new(i, j),
                    Point::new(m - i, (ng - j) % ng),
                    Point::new(0, ng / 2),
                ],
            )?);
        }
    }
    let c2 = base.len() - c1;
    // C3: same row twice at distinct levels.
    for &i in &split.rows_i {
        for j in 0..n {
            for l in 0..g {
                for lp in (l + 1)..g {
                    base.push(Block::new(
                        out_amb,
                        vec![
                            Point::new(0, 0),
                            Point::new(i, (j + l * n) % ng),
                            Point::new(i, (j + lp * n) % ng),
                            Point::new((2 * i) % m, (2 * j + l * n + lp * n) % ng),
                        ],
                    )?);
                }
            }
        }
    }
    let c3 = base.len() - c1 - c2;
    // C4: half-period column offsets across levels.
    for &i in &split.rows_i {
        for j in 0..n / 2 {
            for l in 0..(g - 1) / 2 {
                for lp in 0..g {
                    base.push(Block::new(
                        out_amb,
                        vec![
                            Point::new(0, 0),
                            Point::new(0, (n / 2 + l * n) % ng),
                            Point::new(i, (j + lp * n) % ng),
                            Point::new(i, (j + n / 2 + l * n + lp * n) % ng),
                        ],
                    )?);
                }
            }
        }
    }
    let c4 = base.len() - c1 - c2 - c3;

    // Family-size identities from the counting argument.
    let e_rows = (m / split.r) as u64;
    let (m64, n64, g64) = (m as u64, n as u64, g as u64);
    debug_assert_eq!(c1 as u64, g64 * g64 * split.f2.len() as u64);
    let expect_c2 = n64 * g64 * (m64 - e_rows) / 4;
    let expect_c3 = n64 * g64 * (g64 - 1) * (m64 - e_rows) / 4;
    let expect_c4 = n64 * g64 * (m64 - e_rows) * (g64 - 1) / 8;
    if c2 as u64 != expect_c2 || c3 as u64 != expect_c3 || c4 as u64 != expect_c4 {
        return Err(Error::FailedVerification {
            stage: "gstar-cols-count".into(),
            summary: format!(
                "family sizes ({c2}, {c3}, {c4}) != ({expect_c2}, {expect_c3}, {expect_c4})"
            ),
        });
    }
    let total = base.len() as u64;
    let expect_total = n64 * g64 * (m64 - e_rows) * (m64 * n64 * g64 + e_rows * n64 * g64 - 3) / 24;
    if total != expect_total {
        return Err(Error::FailedVerification {
            stage: "gstar-cols-count".into(),
            summary: format!("{total} base blocks, counting argument expects {expect_total}"),
        });
    }

    let out = DesignInstance::new(
        out_amb,
        DesignKind::GStar,
        3,
        vec![4],
        d.e,
        None,
        Invariance::Full,
        base,
    )?;
    if verify {
        verify_if_scannable(verifier::verify_g_star(&out), "gstar-cols-output", true)?;
    }
    Ok(out)
}

/// Row inflation: the same split produces a strictly invariant
/// `G*(m/e, egn, 4, 3)` over `Z_{mg} × Z_n`.
pub fn gstar_expand_rows(d: &DesignInstance, g: u32, verify: bool) -> Result<DesignInstance> {
    if g < 3 || g.is_multiple_of(2) {
        return Err(Error::Hypothesis(format!(
            "g must be odd and at least 3, got {g}"
        )));
    }
    let split = split_g_star(d, verify)?;
    let ambient = d.ambient();
    let (m, n) = (ambient.rows, ambient.cols);
    let out_amb = Ambient::new(m * g, n)?;
    let mg = m * g;
    let mut base: Vec<Block> = Vec::new();

    // D1: inflate F2 along the new row levels.
    for b in &split.f2 {
        let pts = b.points();
        for k1 in 0..g {
            for k2 in 0..g {
                let ks = [0, k1, k2, (k1 + k2) % g];
                let block: Vec<Point> = pts
                    .iter()
                    .zip(ks.iter())
                    .map(|(p, &k)| Point::new((p.row + k * m) % mg, p.col))
                    .collect();
                base.push(Block::new(out_amb, block)?);
            }
        }
    }
    // D2: symmetric family over all row levels.
    for &i in &split.rows_i {
        for j in 0..n / 2 {
            for l in 0..g {
                let row = (i + l * m) % mg;
                base.push(Block::new(
                    out_amb,
                    vec![
                        Point::new(0, 0),
                        Point::new(row, j),
                        Point::new((mg - row) % mg, (n - j) % n),
                        Point::new(0, n / 2),
                    ],
                )?);
            }
        }
    }
    // D3: same base row at two distinct levels.
    for &i in &split.rows_i {
        for j in 0..n {
            for l in 0..g {
                for lp in (l + 1)..g {
                    base.push(Block::new(
                        out_amb,
                        vec![
                            Point::new(0, 0),
                            Point::new((i + l * m) % mg, j),
                            Point::new((i + lp * m) % mg, j),
                            Point::new((2 * i + l * m + lp * m) % mg, (2 * j) % n),
                        ],
                    )?);
                }
            }
        }
    }
    // D4: half-period column step across row levels.
    for &i in &split.rows_i {
        for j in 0..n / 2 {
            for l in 1..=(g - 1) / 2 {
                for lp in 0..g {
                    base.push(Block::new(
                        out_amb,
                        vec![
                            Point::new(0, 0),
                            Point::new((l * m) % mg, n / 2),
                            Point::new((i + lp * m) % mg, j),
                            Point::new((i + l * m + lp * m) % mg, (n / 2 + j) % n),
                        ],
                    )?);
                }
            }
        }
    }

    let e_rows = (m / split.r) as u64;
    let (m64, n64, g64) = (m as u64, n as u64, g as u64);
    let total = base.len() as u64;
    let expect_total = n64 * g64 * (m64 - e_rows) * (m64 * n64 * g64 + e_rows * n64 * g64 - 3) / 24;
    if total != expect_total {
        return Err(Error::FailedVerification {
            stage: "gstar-rows-count".into(),
            summary: format!("{total} base blocks, counting argument expects {expect_total}"),
        });
    }

    let e_out = GroupPartition::RowClasses { count: split.r }.to_e(out_amb);
    let out = DesignInstance::new(
        out_amb,
        DesignKind::GStar,
        3,
        vec![4],
        Some(e_out),
        None,
        Invariance::Full,
        base,
    )?;
    if verify {
        verify_if_scannable(verifier::verify_g_star(&out), "gstar-rows-output", true)?;
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// cyclic G* inflation
// ---------------------------------------------------------------------------

/// Inflates a cyclic `G*(m, n, 4, 3)` on `Z_{mn}` to a cyclic `G*(m, ng, 4, 3)`
/// on `Z_{mng}` for odd `g ≥ 3`.
pub fn cyclic_gstar_expand(d: &DesignInstance, g: u32, verify: bool) -> Result<DesignInstance> {
    if g < 3 || g.is_multiple_of(2) {
        return Err(Error::Hypothesis(format!(
            "g must be odd and at least 3, got {g}"
        )));
    }
    if d.kind != DesignKind::CyclicGStar || d.ambient().rows != 1 {
        return Err(Error::Parameter(
            "expected a cyclic G*-design over Z_v".into(),
        ));
    }
    if verify {
        require_strict(verifier::verify_g_star(d)?, "cyclic-gstar-input")?;
    }
    let v = d.ambient().cols;
    let spacing = match d.partition()? {
        GroupPartition::ColClasses { count } => count,
        _ => {
            return Err(Error::Parameter(
                "cyclic G* needs column-coset groups".into(),
            ))
        }
    };
    let group_size = v / spacing;

    // Split into the symmetric family and the rest.
    let mut f1 = Vec::new();
    let mut f2 = Vec::new();
    for b in d.base_blocks() {
        if cyclic_symmetric_orbit(b, v, spacing) {
            f1.push(b.clone());
        } else {
            f2.push(b.clone());
        }
    }
    let expect_f1 = (group_size as u64 * (spacing as u64 - 1)) / 4;
    if f1.len() as u64 != expect_f1 {
        return Err(Error::Parameter(format!(
            "input shape: {} symmetric base blocks, expected {expect_f1}",
            f1.len()
        )));
    }

    let out_amb = Ambient::new(1, v * g)?;
    let vg = v * g;
    let mut base: Vec<Block> = Vec::new();
    for b in &f2 {
        let cols: Vec<u32> = b.points().iter().map(|p| p.col).collect();
        for k1 in 0..g {
            for k2 in 0..g {
                let ks = [0, k1, k2, (k1 + k2) % g];
                let pts: Vec<Point> = cols
                    .iter()
                    .zip(ks.iter())
                    .map(|(&c, &k)| Point::new(0, (c + k * v) % vg))
                    .collect();
                base.push(Block::new(out_amb, pts)?);
            }
        }
    }
    for i in 1..=vg / 4 {
        if i % spacing == 0 {
            continue;
        }
        base.push(Block::new(
            out_amb,
            vec![
                Point::new(0, 0),
                Point::new(0, i),
                Point::new(0, (vg - i) % vg),
                Point::new(0, vg / 2),
            ],
        )?);
    }
    for i in 1..=v / 2 {
        if i % spacing == 0 {
            continue;
        }
        for l in 0..g {
            for lp in (l + 1)..g {
                base.push(Block::new(
                    out_amb,
                    vec![
                        Point::new(0, 0),
                        Point::new(0, (i + l * v) % vg),
                        Point::new(0, (i + lp * v) % vg),
                        Point::new(0, (2 * i + l * v + lp * v) % vg),
                    ],
                )?);
            }
        }
    }
    for i in 1..=v / 4 {
        if i % spacing == 0 {
            continue;
        }
        for l in 0..(g - 1) / 2 {
            for lp in 0..g {
                base.push(Block::new(
                    out_amb,
                    vec![
                        Point::new(0, 0),
                        Point::new(0, (v / 2 + l * v) % vg),
                        Point::new(0, (i + lp * v) % vg),
                        Point::new(0, (i + v / 2 + l * v + lp * v) % vg),
                    ],
                )?);
            }
        }
    }

    let expect_total =
        bounds::expected_g_base_count(spacing as u64, (group_size * g) as u64, 1, 4)?;
    if base.len() as u64 != expect_total {
        return Err(Error::FailedVerification {
            stage: "cyclic-gstar-count".into(),
            summary: format!(
                "{} base blocks, counting argument expects {expect_total}",
                base.len()
            ),
        });
    }

    let out = DesignInstance::new(
        out_amb,
        DesignKind::CyclicGStar,
        3,
        vec![4],
        Some(spacing),
        None,
        Invariance::Full,
        base,
    )?;
    if verify {
        verify_if_scannable(verifier::verify_g_star(&out), "cyclic-gstar-output", true)?;
    }
    Ok(out)
}

fn cyclic_symmetric_orbit(block: &Block, v: u32, spacing: u32) -> bool {
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
        if amb.add(rest[0], rest[1]) == amb.add(c, c) {
            let a = amb.sub(rest[0], c).col;
            if !a.is_multiple_of(spacing) {
                return true;
            }
        }
    }
    false
}

// ---------------------------------------------------------------------------
// G-design -> 1-fan design
// ---------------------------------------------------------------------------

/// Views a strictly invariant `G(m/e, en, 4, 3)` design as a 1-fan design of
/// type `(en)^{m/e}` by adjoining the pair orbits
/// `{(0,0), (i,j)} : 1 ≤ i ≤ ⌊m/2⌋, i ≢ 0 (mod m/e), j ∈ Z_n` as the strength-2
/// component. Requires every element of order 2 to lie in the subgroup
/// `(m/e)Z_m × Z_n`.
pub fn gdesign_to_1fg(d: &DesignInstance, verify: bool) -> Result<FanDesign> {
    if !matches!(d.kind, DesignKind::GDesign | DesignKind::GStar) {
        return Err(Error::Parameter(
            "expected a (product-form) G-design".into(),
        ));
    }
    let ambient = d.ambient();
    let r = match d.partition()? {
        GroupPartition::RowClasses { count } => count,
        _ => {
            return Err(Error::Parameter(
                "fan extension needs row-coset groups".into(),
            ))
        }
    };
    let (m, n) = (ambient.rows, ambient.cols);
    // Every order-2 element must lie in the subgroup rZ_m x Z_n.
    for x in 0..m {
        for y in 0..n {
            if (2 * x) % m == 0 && (2 * y) % n == 0 && x % r != 0 {
                return Err(Error::Hypothesis(format!(
                    "element ({x}, {y}) has order 2 but is outside the subgroup"
                )));
            }
        }
    }
    if verify {
        require_strict(verifier::verify_group_design(d)?, "g-to-1fg-input")?;
    }
    let mut b0 = Vec::new();
    for i in 1..=m / 2 {
        if i % r == 0 {
            continue;
        }
        for j in 0..n {
            b0.push(Block::new(
                ambient,
                vec![Point::new(0, 0), Point::new(i, j)],
            )?);
        }
    }
    let fan = FanDesign::new(
        ambient,
        d.e.unwrap(),
        Invariance::Full,
        b0,
        d.base_blocks().to_vec(),
    )?;
    if verify {
        require_strict(verifier::verify_fan(&fan)?, "g-to-1fg-output")?;
    }
    Ok(fan)
}

// ---------------------------------------------------------------------------
// fan product (master design inflation)
// ---------------------------------------------------------------------------

/// A `K₀` ingredient: a strictly semi-cyclic `s`-fan of type `g^k` - a plain
/// group design for `s = 0`, a fan design for `s = 1`.
#[derive(Debug, Clone)]
pub enum K0Ingredient {
    Design(DesignInstance),
    Fan(FanDesign),
}

/// Named ingredient slots for the fan product: one strictly semi-cyclic
/// `s`-fan of type `g^k` per block size `k ∈ K₀` of the master, one semi-cyclic
/// `H(k, g, ·, 3)` per `k ∈ K₁` (the `k = 4` slot is auto-filled).
#[derive(Debug, Clone, Default)]
pub struct IngredientSet {
    pub k0: BTreeMap<u32, K0Ingredient>,
    pub k1: BTreeMap<u32, DesignInstance>,
}

/// One output of the fan product.
#[derive(Debug, Clone)]
pub enum ProductOutput {
    Design(DesignInstance),
    Fan(FanDesign),
}

impl ProductOutput {
    pub fn base_block_count(&self) -> usize {
        match self {
            ProductOutput::Design(d) => d.base_blocks().len(),
            ProductOutput::Fan(f) => f.b0().len() + f.b1().len(),
        }
    }
}

/// The master-design product: inflates a strictly invariant 1-fan of type
/// `(en)^{m/e}` by `Z_g` through the two coordinate embeddings
/// `τ(x, y, z) = (x, y + zn)` and `φ(x, y, z) = (x + zm, y)`, returning both
/// the `Z_m × Z_{ng}`-invariant and the `Z_{mg} × Z_n`-invariant results.
pub fn fan_product(
    master: &FanDesign,
    g: u32,
    ingredients: &IngredientSet,
    verify: bool,
) -> Result<(ProductOutput, ProductOutput)> {
    if g == 0 {
        return Err(Error::Parameter("g must be positive".into()));
    }
    // Masters over a single cyclic group are viewed as Z_m x Z_1.
    let master_t;
    let master = if master.ambient().rows == 1 && master.ambient().cols > 1 {
        master_t = transpose_fan(master)?;
        &master_t
    } else {
        master
    };
    let ambient = master.ambient();
    let r = match master.partition()? {
        GroupPartition::RowClasses { count } => count,
        // Type 1^m masters are tolerated only in the Z_m x Z_1 view.
        GroupPartition::Singletons if ambient.cols == 1 => ambient.rows,
        _ => {
            return Err(Error::Parameter(
                "fan product needs row-coset groups".into(),
            ))
        }
    };
    if verify {
        require_strict(verifier::verify_fan(master)?, "fan-product-master")?;
    }
    let (m, n) = (ambient.rows, ambient.cols);

    // Resolve ingredient slots; k = 4 in K1 defaults to the semi-cyclic H(4,g,4,3).
    let mut k1 = ingredients.k1.clone();
    for &k in &master.k1() {
        if !k1.contains_key(&k) {
            if k == 4 {
                k1.insert(4, semicyclic_h4(g)?);
            } else {
                return Err(Error::Ingredient(format!(
                    "no H({k}, {g}, ·, 3) ingredient supplied"
                )));
            }
        }
    }
    let mut s: Option<usize> = None;
    for &k in &master.k0() {
        let ing = ingredients
            .k0
            .get(&k)
            .ok_or_else(|| Error::Ingredient(format!("no type g^{k} fan ingredient supplied")))?;
        let this_s = match ing {
            K0Ingredient::Design(_) => 0,
            K0Ingredient::Fan(_) => 1,
        };
        if *s.get_or_insert(this_s) != this_s {
            return Err(Error::Ingredient(
                "mixed fan depths among K0 ingredients".into(),
            ));
        }
    }
    let s = s.unwrap_or(0);

    // Validate ingredient shapes.
    let check_ing_ambient = |amb: Ambient, k: u32, what: &str| -> Result<()> {
        if amb != Ambient::new(k, g)? {
            return Err(Error::Ingredient(format!(
                "{what} ingredient must live on I_{k} × Z_{g}, found Z_{}xZ_{}",
                amb.rows, amb.cols
            )));
        }
        Ok(())
    };
    for (&k, ing) in &ingredients.k0 {
        match ing {
            K0Ingredient::Design(d) => {
                check_ing_ambient(d.ambient(), k, "K0")?;
                if d.invariance != Invariance::SemiCyclic {
                    return Err(Error::Ingredient(
                        "K0 ingredient must be semi-cyclic".into(),
                    ));
                }
                if verify {
                    require_strict(
                        verifier::verify_group_design(d)?,
                        "fan-product-ingredient-k0",
                    )?;
                }
            }
            K0Ingredient::Fan(f) => {
                check_ing_ambient(f.ambient(), k, "K0")?;
                if f.invariance != Invariance::SemiCyclic {
                    return Err(Error::Ingredient(
                        "K0 ingredient must be semi-cyclic".into(),
                    ));
                }
                if verify {
                    require_strict(verifier::verify_fan(f)?, "fan-product-ingredient-k0")?;
                }
            }
        }
    }
    for (&k, d) in &k1 {
        check_ing_ambient(d.ambient(), k, "K1")?;
        if d.invariance != Invariance::SemiCyclic {
            return Err(Error::Ingredient(
                "K1 ingredient must be semi-cyclic".into(),
            ));
        }
        if verify && d.kind != DesignKind::HDesign {
            return Err(Error::Ingredient(
                "K1 ingredient must be an H-design".into(),
            ));
        }
        if verify {
            require_strict(
                verifier::verify_group_design(d)?,
                "fan-product-ingredient-k1",
            )?;
        }
    }

    // Assemble the lifted base blocks, tagged by output component 0..=s.
    // A lifted point is (master point, level in Z_g).
    let mut lifted: Vec<Vec<(Point, u32)>> = Vec::new(); // component s
    let mut lifted0: Vec<Vec<(Point, u32)>> = Vec::new(); // component 0 when s = 1
    let place = |master_block: &Block, ing_block: &Block| -> Vec<(Point, u32)> {
        // Ingredient row i stands for the i-th point of the master block
        // in canonical order.
        ing_block
            .points()
            .iter()
            .map(|q| (master_block.points()[q.row as usize], q.col))
            .collect()
    };
    for b in master.b0() {
        let k = b.len() as u32;
        match ingredients.k0.get(&k).unwrap() {
            K0Ingredient::Design(d) => {
                for c in d.base_blocks() {
                    lifted.push(place(b, c));
                }
            }
            K0Ingredient::Fan(f) => {
                for c in f.b0() {
                    lifted0.push(place(b, c));
                }
                for c in f.b1() {
                    lifted.push(place(b, c));
                }
            }
        }
    }
    for b in master.b1() {
        let k = b.len() as u32;
        let d = k1.get(&k).unwrap();
        for c in d.base_blocks() {
            lifted.push(place(b, c));
        }
    }

    // τ: (x, y, z) -> (x, y + z n); φ: (x, y, z) -> (x + z m, y).
    let tau_amb = Ambient::new(m, n * g)?;
    let phi_amb = Ambient::new(m * g, n)?;
    let tau = |pts: &[(Point, u32)]| -> Result<Block> {
        Block::new(
            tau_amb,
            pts.iter()
                .map(|&(p, z)| Point::new(p.row, p.col + z * n))
                .collect(),
        )
    };
    let phi = |pts: &[(Point, u32)]| -> Result<Block> {
        Block::new(
            phi_amb,
            pts.iter()
                .map(|&(p, z)| Point::new(p.row + z * m, p.col))
                .collect(),
        )
    };
    let tau_s: Vec<Block> = lifted.iter().map(|p| tau(p)).collect::<Result<_>>()?;
    let phi_s: Vec<Block> = lifted.iter().map(|p| phi(p)).collect::<Result<_>>()?;

    let build = |amb: Ambient,
                 blocks_s: Vec<Block>,
                 blocks_0: Vec<Block>,
                 stage: &str|
     -> Result<ProductOutput> {
        let e_out = GroupPartition::RowClasses { count: r }.to_e(amb);
        if s == 0 {
            let sizes: Vec<u32> = {
                let mut v: Vec<u32> = blocks_s.iter().map(|b| b.len() as u32).collect();
                v.sort();
                v.dedup();
                v
            };
            let d = DesignInstance::new(
                amb,
                DesignKind::GDesign,
                3,
                sizes,
                Some(e_out),
                None,
                Invariance::Full,
                blocks_s,
            )?;
            if verify {
                verify_if_scannable(verifier::verify_group_design(&d), stage, true)?;
            }
            Ok(ProductOutput::Design(d))
        } else {
            let f = FanDesign::new(amb, e_out, Invariance::Full, blocks_0, blocks_s)?;
            if verify {
                verify_if_scannable(verifier::verify_fan(&f), stage, true)?;
            }
            Ok(ProductOutput::Fan(f))
        }
    };

    let tau_0: Vec<Block> = lifted0.iter().map(|p| tau(p)).collect::<Result<_>>()?;
    let phi_0: Vec<Block> = lifted0.iter().map(|p| phi(p)).collect::<Result<_>>()?;
    let out_tau = build(tau_amb, tau_s, tau_0, "fan-product-tau")?;
    let out_phi = build(phi_amb, phi_s, phi_0, "fan-product-phi")?;
    Ok((out_tau, out_phi))
}

fn transpose_fan(f: &FanDesign) -> Result<FanDesign> {
    let amb = Ambient::new(f.ambient().cols, f.ambient().rows)?;
    let flip = |blocks: &[Block]| -> Result<Vec<Block>> {
        blocks
            .iter()
            .map(|b| {
                Block::new(
                    amb,
                    b.points()
                        .iter()
                        .map(|p| Point::new(p.col, p.row))
                        .collect(),
                )
            })
            .collect()
    };
    let e = match f.partition()? {
        GroupPartition::ColClasses { count } => GroupPartition::RowClasses { count }.to_e(amb),
        GroupPartition::RowClasses { count } => GroupPartition::ColClasses { count }.to_e(amb),
        GroupPartition::Singletons => 0,
    };
    FanDesign::new(amb, e, f.invariance, flip(f.b0())?, flip(f.b1())?)
}

// ---------------------------------------------------------------------------
// CRT re-coordinatization
// ---------------------------------------------------------------------------

/// Re-coordinatizes a design over `Z_v` (stored with `m = 1`) onto
/// `Z_m × Z_{v/m}` through `x ↦ (x mod m, x mod n)`; needs `gcd(m, n) = 1`.
/// For cyclic G*-designs the group spacing must equal `m`, so the groups become
/// the singleton-row groups `{i} × Z_n`.
pub fn crt_split(d: &DesignInstance, m: u32) -> Result<DesignInstance> {
    if d.ambient().rows != 1 {
        return Err(Error::Parameter(
            "CRT split starts from a design over Z_v (m = 1)".into(),
        ));
    }
    let v = d.ambient().cols;
    if m == 0 || !v.is_multiple_of(m) {
        return Err(Error::Parameter(format!("m={m} does not divide v={v}")));
    }
    let n = v / m;
    if gcd(m, n) != 1 {
        return Err(Error::Parameter(format!(
            "Z_{v} ≅ Z_{m}xZ_{n} needs gcd({m}, {n}) = 1"
        )));
    }
    let (kind, e) = match d.kind {
        DesignKind::Packing | DesignKind::Steiner => (d.kind, None),
        DesignKind::CyclicGStar | DesignKind::GDesign | DesignKind::GStar => {
            let spacing = match d.partition()? {
                GroupPartition::ColClasses { count } => count,
                _ => {
                    return Err(Error::Parameter(
                        "cyclic design with non-coset groups".into(),
                    ))
                }
            };
            if spacing != m {
                return Err(Error::Parameter(format!(
                    "group spacing {spacing} must equal the row modulus {m}"
                )));
            }
            let kind = if d.kind == DesignKind::CyclicGStar {
                DesignKind::GStar
            } else {
                d.kind
            };
            (kind, Some(m))
        }
        DesignKind::HDesign => {
            return Err(Error::Parameter("unsupported kind for CRT split".into()))
        }
    };
    let amb = Ambient::new(m, n)?;
    let blocks = d
        .base_blocks()
        .iter()
        .map(|b| {
            Block::new(
                amb,
                b.points()
                    .iter()
                    .map(|p| Point::new(p.col % m, p.col % n))
                    .collect(),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    DesignInstance::new(
        amb,
        kind,
        d.t,
        d.block_sizes.clone(),
        e,
        d.lambda,
        d.invariance,
        blocks,
    )
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

// ---------------------------------------------------------------------------
// rotational SQS -> 1-fan design
// ---------------------------------------------------------------------------

/// Transforms a rotational `SQS(v+1)` into a strictly cyclic 1-fan design:
/// `B₀` collects the blocks through the fixed point with that point removed,
/// `B₁` the blocks avoiding it. Type `1^v` for `v ≡ 1 (mod 6)`, type `3^{v/3}`
/// for `v ≡ 3 (mod 6)`.
///
/// Input convention: a `steiner` design over `Z_1 × Z_{v+1}` whose base block
/// list is the FULL block set, with the residue `v` standing for the fixed
/// point; the rotational automorphism `x ↦ x + 1 (mod v)` is checked here.
pub fn rosqs_to_1fg(rosqs: &DesignInstance, verify: bool) -> Result<FanDesign> {
    if rosqs.ambient().rows != 1 {
        return Err(Error::Parameter(
            "rotational SQS files live over Z_{v+1} with m = 1".into(),
        ));
    }
    let vp1 = rosqs.ambient().cols;
    if vp1 < 2 {
        return Err(Error::Parameter("degenerate point count".into()));
    }
    let v = vp1 - 1;
    if v % 6 != 1 && v % 6 != 3 {
        return Err(Error::Hypothesis(format!(
            "the transform needs v ≡ 1 or 3 (mod 6), got v = {v}"
        )));
    }
    let blocks = rosqs.base_blocks();

    // Rotational automorphism: x -> x+1 on Z_v, the point v fixed.
    let rotate = |b: &Block| -> Block {
        let pts: Vec<Point> = b
            .points()
            .iter()
            .map(|p| {
                if p.col == v {
                    *p
                } else {
                    Point::new(0, (p.col + 1) % v)
                }
            })
            .collect();
        Block::new(rosqs.ambient(), pts).unwrap()
    };
    let set: std::collections::BTreeSet<&Block> = blocks.iter().collect();
    for b in blocks {
        let img = rotate(b);
        if !set.contains(&img) {
            return Err(Error::Parameter(format!(
                "block {:?} is not preserved by the rotational automorphism",
                b.points()
            )));
        }
    }
    if verify {
        // Exact triple coverage over all points: the input is an SQS(v+1).
        let n = vp1 as usize;
        let mut counts = vec![0u8; n * (n - 1) * (n - 2) / 6];
        let rank = |a: usize, b: usize, c: usize| c * (c - 1) * (c - 2) / 6 + b * (b - 1) / 2 + a;
        for b in blocks {
            let idx: Vec<usize> = b.points().iter().map(|p| p.col as usize).collect();
            for i in 0..idx.len() {
                for j in (i + 1)..idx.len() {
                    for k in (j + 1)..idx.len() {
                        let r = rank(idx[i], idx[j], idx[k]);
                        counts[r] = counts[r].saturating_add(1);
                    }
                }
            }
        }
        if counts.iter().any(|&c| c != 1) {
            return Err(Error::FailedVerification {
                stage: "rosqs-input".into(),
                summary: "triple coverage of the SQS(v+1) is not exactly 1".into(),
            });
        }
    }

    // Split on the fixed point and reduce to orbit representatives over Z_v.
    let amb_v = Ambient::new(1, v)?;
    let strip = |b: &Block| -> Result<Block> {
        Block::new(
            amb_v,
            b.points()
                .iter()
                .filter(|p| p.col != v)
                .map(|p| Point::new(0, p.col))
                .collect(),
        )
    };
    let mut b0_reps: std::collections::BTreeSet<Block> = std::collections::BTreeSet::new();
    let mut b1_reps: std::collections::BTreeSet<Block> = std::collections::BTreeSet::new();
    for b in blocks {
        let has_inf = b.points().iter().any(|p| p.col == v);
        let stripped = strip(b)?;
        let rep = orbit_under(&stripped, Action::Full).representative;
        if has_inf {
            b0_reps.insert(rep);
        } else {
            b1_reps.insert(rep);
        }
    }
    let e = if v % 6 == 1 { v } else { v / 3 };
    let fan = FanDesign::new(
        amb_v,
        e,
        Invariance::Full,
        b0_reps.into_iter().collect(),
        b1_reps.into_iter().collect(),
    )?;
    if verify {
        require_strict(verifier::verify_fan(&fan)?, "rosqs-output")?;
    }
    Ok(fan)
}

/// Develops the standard rotational `SQS(8)` on `Z_7 ∪ {∞}` (orbits of
/// `{∞, 0, 1, 3}` and `{2, 4, 5, 6}`), in the file convention of
/// [`rosqs_to_1fg`]. Useful as a test ingredient and CLI example.
pub fn rosqs8() -> Result<DesignInstance> {
    let amb = Ambient::new(1, 8)?;
    let mut blocks = Vec::new();
    for j in 0..7u32 {
        blocks.push(Block::from_pairs(
            amb,
            &[(0, 7), (0, j), (0, (1 + j) % 7), (0, (3 + j) % 7)],
        )?);
        blocks.push(Block::from_pairs(
            amb,
            &[
                (0, (2 + j) % 7),
                (0, (4 + j) % 7),
                (0, (5 + j) % 7),
                (0, (6 + j) % 7),
            ],
        )?);
    }
    DesignInstance::new(
        amb,
        DesignKind::Steiner,
        3,
        vec![4],
        None,
        None,
        Invariance::Full,
        blocks,
    )
}

// ---------------------------------------------------------------------------
// leave extraction -> 1-fan design
// ---------------------------------------------------------------------------

/// For `mn ≡ 1, 3 (mod 6)`, a strictly invariant quadruple packing meeting the
/// Johnson bound has a leave forming a Steiner triple system; packing plus
/// leave is then a 1-fan design of type `1^{mn}`.
pub fn leave_to_1fg(p: &DesignInstance, verify: bool) -> Result<FanDesign> {
    let ambient = p.ambient();
    let v = ambient.order() as u64;
    if v % 6 != 1 && v % 6 != 3 {
        return Err(Error::Hypothesis(format!(
            "needs mn ≡ 1 or 3 (mod 6), got mn = {v}"
        )));
    }
    let report = verifier::verify_packing(p)?;
    require_strict(report, "leave-input")?;
    let johnson = bounds::johnson_bound(ambient.rows as u64, ambient.cols as u64, 4, 2)?;
    if p.base_blocks().len() as u64 != johnson {
        return Err(Error::Parameter(format!(
            "packing has {} base blocks, the bound {johnson} must be met",
            p.base_blocks().len()
        )));
    }
    let leave = verifier::compute_leave(p)?;
    // The leave must be a Steiner triple system: every pair exactly once.
    let leave_blocks: Vec<Block> = leave
        .orbits
        .iter()
        .flat_map(|(rep, _)| orbit_blocks(rep, Action::Full))
        .collect();
    let np = ambient.order();
    let mut pair_counts = vec![0u32; np * (np - 1) / 2];
    for b in &leave_blocks {
        let idx: Vec<usize> = b.points().iter().map(|&q| ambient.index_of(q)).collect();
        for i in 0..idx.len() {
            for j in (i + 1)..idx.len() {
                let (a, bb) = (idx[i].min(idx[j]), idx[i].max(idx[j]));
                pair_counts[bb * (bb - 1) / 2 + a] += 1;
            }
        }
    }
    if pair_counts.iter().any(|&c| c != 1) {
        return Err(Error::FailedVerification {
            stage: "leave-sts".into(),
            summary: "the leave is not a Steiner triple system".into(),
        });
    }
    let e = if ambient.rows == 1 { ambient.cols } else { 0 };
    let fan = FanDesign::new(
        ambient,
        e,
        Invariance::Full,
        leave.orbits.iter().map(|(rep, _)| rep.clone()).collect(),
        p.base_blocks().to_vec(),
    )?;
    if verify {
        require_valid(verifier::verify_fan(&fan)?, "leave-output")?;
    }
    Ok(fan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::load_builtin;
    use crate::model::DesignFile;

    fn builtin_design(key: &str) -> DesignInstance {
        match load_builtin(key).unwrap().design {
            DesignFile::Design(d) => d,
            _ => panic!("{key} is not a plain design"),
        }
    }

    fn trivial_sqs4() -> DesignInstance {
        let amb = Ambient::new(1, 4).unwrap();
        DesignInstance::new(
            amb,
            DesignKind::Steiner,
            3,
            vec![4],
            None,
            None,
            Invariance::Full,
            vec![Block::from_pairs(amb, &[(0, 0), (0, 1), (0, 2), (0, 3)]).unwrap()],
        )
        .unwrap()
    }

    #[test]
    fn h4_small_cases() {
        let h1 = semicyclic_h4(1).unwrap();
        assert_eq!(h1.base_blocks().len(), 1);
        assert_eq!(
            h1.base_blocks()[0],
            Block::from_pairs(
                Ambient::new(4, 1).unwrap(),
                &[(0, 0), (1, 0), (2, 0), (3, 0)]
            )
            .unwrap()
        );

        let h2 = semicyclic_h4(2).unwrap();
        assert_eq!(h2.base_blocks().len(), 4);
        let r = verifier::verify_group_design(&h2).unwrap();
        assert!(r.valid && r.strict);
        assert_eq!(r.developed_block_count, 8);

        let h4 = semicyclic_h4(4).unwrap();
        assert_eq!(h4.base_blocks().len(), 16);
        let r = verifier::verify_group_design(&h4).unwrap();
        assert!(r.valid && r.strict);
    }

    #[test]
    fn csqs_step1_matches_worked_example() {
        let step1 = csqs_to_h_step(&trivial_sqs4()).unwrap();
        assert_eq!(step1.base_blocks().len(), 1);
        assert_eq!(
            step1.base_blocks()[0],
            Block::from_pairs(
                Ambient::new(4, 2).unwrap(),
                &[(0, 0), (1, 0), (2, 0), (3, 1)]
            )
            .unwrap()
        );
        let r = verifier::verify_group_design(&step1).unwrap();
        assert!(r.valid && r.strict);
    }

    #[test]
    fn csqs_product_reproduces_g2_16() {
        let out = csqs_g_product(&trivial_sqs4(), &builtin_design("ex-3.5-g28"), true).unwrap();
        assert_eq!(out.base_blocks().len(), 30);
        assert_eq!((out.ambient().rows, out.ambient().cols), (4, 8));
        assert_eq!(out.e, Some(2));
        assert_eq!(bounds::expected_g_base_count(4, 8, 2, 4).unwrap(), 30);
    }

    #[test]
    fn fill_empty_sub_keeps_g_blocks() {
        let g = csqs_g_product(&trivial_sqs4(), &builtin_design("ex-3.5-g28"), false).unwrap();
        let empty = DesignInstance::new(
            Ambient::new(2, 8).unwrap(),
            DesignKind::Packing,
            3,
            vec![4],
            None,
            None,
            Invariance::Full,
            vec![],
        )
        .unwrap();
        let out = fill(&g, &empty, true).unwrap();
        assert_eq!(out.base_blocks().len(), 30);
    }

    #[test]
    fn gstar_cols_g3_count() {
        let out = gstar_expand_cols(&builtin_design("ex-3.1"), 3, true).unwrap();
        assert_eq!(out.base_blocks().len(), 138);
        assert_eq!(bounds::expected_g_base_count(10, 6, 2, 4).unwrap(), 138);
        assert_eq!((out.ambient().rows, out.ambient().cols), (10, 6));
    }

    #[test]
    fn gstar_rejects_bad_g() {
        let d = builtin_design("ex-3.1");
        assert!(gstar_expand_cols(&d, 1, false).is_err());
        assert!(gstar_expand_cols(&d, 4, false).is_err());
        assert!(gstar_expand_rows(&d, 2, false).is_err());
        assert!(cyclic_gstar_expand(&d, 3, false).is_err());
    }

    #[test]
    fn g_to_1fg_on_z10z2() {
        let fan = gdesign_to_1fg(&builtin_design("ex-3.1"), true).unwrap();
        assert_eq!(fan.b0().len(), 8);
        assert_eq!(fan.b1().len(), 14);
        assert_eq!(fan.k0(), vec![2]);
        assert_eq!(fan.k1(), vec![4]);
    }

    #[test]
    fn g_to_1fg_rejects_stray_involution() {
        // Z_6 x Z_2 with e = 3 (two groups {0,2,4} x Z_2 and {1,3,5} x Z_2):
        // (3, 0) has order 2 but row 3 ≢ 0 (mod 2), so it lies outside 2Z_6 x Z_2.
        let amb = Ambient::new(6, 2).unwrap();
        let d = DesignInstance::new(
            amb,
            DesignKind::GDesign,
            3,
            vec![4],
            Some(3),
            None,
            Invariance::Full,
            vec![],
        )
        .unwrap();
        assert!(matches!(
            gdesign_to_1fg(&d, false),
            Err(Error::Hypothesis(_))
        ));
    }

    #[test]
    fn rosqs8_transforms_and_round_trips() {
        let rosqs = rosqs8().unwrap();
        let fan = rosqs_to_1fg(&rosqs, true).unwrap();
        assert_eq!(fan.ambient(), Ambient::new(1, 7).unwrap());
        assert_eq!(fan.e, 7);
        assert_eq!(fan.b0().len(), 1);
        assert_eq!(fan.b1().len(), 1);
        let b0 = &fan.b0()[0];
        assert_eq!(
            b0,
            &Block::from_pairs(Ambient::new(1, 7).unwrap(), &[(0, 0), (0, 1), (0, 3)]).unwrap()
        );
        // The quadruple component is the orbit of {2, 4, 5, 6}.
        let gen = Block::from_pairs(
            Ambient::new(1, 7).unwrap(),
            &[(0, 2), (0, 4), (0, 5), (0, 6)],
        )
        .unwrap();
        assert_eq!(orbit_under(&gen, Action::Full).representative, fan.b1()[0]);
    }

    #[test]
    fn rosqs_rejects_wrong_residue() {
        // v = 11 ≡ 5 (mod 6).
        let amb = Ambient::new(1, 12).unwrap();
        let d = DesignInstance::new(
            amb,
            DesignKind::Steiner,
            3,
            vec![4],
            None,
            None,
            Invariance::Full,
            vec![],
        )
        .unwrap();
        assert!(matches!(rosqs_to_1fg(&d, false), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn leave_of_inversive_p3_is_sts9() {
        let (design, _) = crate::galois::inversive_to_oospc(3).unwrap();
        let fan = leave_to_1fg(&design, true).unwrap();
        assert_eq!(fan.e, 0);
        assert_eq!(fan.b1().len(), 2);
        // 12 leave triples in 4 short orbits of length 3.
        let total: usize = fan
            .b0()
            .iter()
            .map(|b| orbit_under(b, Action::Full).length)
            .sum();
        assert_eq!(total, 12);
        // B1 of the output equals the input base blocks.
        assert_eq!(fan.b1(), design.base_blocks());
    }

    #[test]
    fn leave_to_1fg_needs_bound_met() {
        // A single-orbit packing over Z_3 x Z_3 is strict and valid but far
        // below the bound of 2... actually J(3,3,4,2) = 2, so one block misses it.
        let amb = Ambient::new(3, 3).unwrap();
        let d = DesignInstance::new(
            amb,
            DesignKind::Packing,
            3,
            vec![4],
            None,
            None,
            Invariance::Full,
            vec![Block::from_pairs(amb, &[(0, 0), (0, 1), (1, 0), (2, 2)]).unwrap()],
        )
        .unwrap();
        assert!(leave_to_1fg(&d, false).is_err());
    }
}
