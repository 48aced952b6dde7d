//! Backtracking search over canonical orbit representatives for small optimal
//! strictly invariant packings and small cyclic ingredients.
//!
//! Symmetry reduction: every block orbit has a unique lexicographically minimal
//! representative, and that representative contains `(0, 0)`; candidate blocks
//! are restricted to such representatives and branched in lexicographic order,
//! so the search is complete over orbits and fully deterministic. Covered
//! triple sets are kept as flat bitmaps indexed by the combinatorial rank of
//! the triple, giving O(words) conflict checks.
//!
//! Two modes:
//! * packing mode - maximize the number of base blocks, stopping at `target`;
//! * Steiner mode - exact-cover the coverage domain (all triples, or all
//!   cross-group triples under a group constraint), branching on the first
//!   uncovered triple.

use std::time::{Duration, Instant};

use crate::error::Error;
use crate::group::{orbit_blocks, orbit_under, Action, Ambient, Block};
use crate::model::{DesignInstance, DesignKind, GroupPartition, Invariance};
use crate::Result;

/// Hard ceiling on the point count.
pub const SEARCH_CEILING: u64 = 64;

/// Structural constraint on the searched design.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchConstraint {
    /// Plain packing.
    Packing,
    /// Group-divisible: no within-group triple may be covered.
    GDesign { e: u32 },
    /// Group-divisible with the symmetric-form condition; solutions failing the
    /// shape check are rejected and the search continues (exact-cover mode).
    GStar { e: u32 },
    /// Cyclic (`m = 1`) variant of the shape-constrained search.
    CyclicGStar { spacing: u32 },
    /// Every block orbit satisfies `−B = B + a` for some translation `a`.
    SCyclic,
}

impl SearchConstraint {
    fn partition_e(&self) -> Option<u32> {
        match self {
            SearchConstraint::GDesign { e } | SearchConstraint::GStar { e } => Some(*e),
            SearchConstraint::CyclicGStar { spacing } => Some(*spacing),
            _ => None,
        }
    }

    fn shape_checked(&self) -> bool {
        matches!(
            self,
            SearchConstraint::GStar { .. } | SearchConstraint::CyclicGStar { .. }
        )
    }
}

/// A search request.
#[derive(Debug, Clone)]
pub struct SearchProblem {
    pub m: u32,
    pub n: u32,
    pub k: u32,
    pub t: u32,
    /// Base blocks wanted; must not exceed the Johnson bound.
    pub target: usize,
    pub constraint: SearchConstraint,
    /// Restrict candidates to full orbits (trivial stabilizers).
    pub strict: bool,
    /// Exact-cover mode: every domain triple covered exactly once.
    pub steiner: bool,
    pub budget: Duration,
    /// Blocks forced into the solution before the search starts.
    pub initial: Vec<Block>,
    /// Orbit representatives barred from the candidate list (counterexample hunts).
    pub exclude: Vec<Block>,
}

impl SearchProblem {
    pub fn packing(m: u32, n: u32, k: u32, t: u32, target: usize) -> SearchProblem {
        SearchProblem {
            m,
            n,
            k,
            t,
            target,
            constraint: SearchConstraint::Packing,
            strict: true,
            steiner: false,
            budget: Duration::from_secs(60),
            initial: Vec::new(),
            exclude: Vec::new(),
        }
    }
}

/// Search result: the best design found (possibly smaller than the target),
/// whether the target was reached, and whether the candidate space was
/// exhausted (only then do completeness claims attach).
#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub design: DesignInstance,
    pub best: usize,
    pub reached_target: bool,
    pub exhausted: bool,
}

fn rank3(a: usize, b: usize, c: usize) -> usize {
    c * (c - 1) * (c - 2) / 6 + b * (b - 1) / 2 + a
}

struct Candidate {
    block: Block,
    mask: Vec<u64>,
    ranks: Vec<u32>,
}

fn block_orbit_ranks(ambient: Ambient, block: &Block) -> Option<Vec<u32>> {
    let mut ranks = Vec::new();
    for t in orbit_blocks(block, Action::Full) {
        let idx: Vec<usize> = t.points().iter().map(|&p| ambient.index_of(p)).collect();
        for i in 0..idx.len() {
            for j in (i + 1)..idx.len() {
                for l in (j + 1)..idx.len() {
                    ranks.push(rank3(idx[i], idx[j], idx[l]) as u32);
                }
            }
        }
    }
    ranks.sort();
    // A triple covered twice within one orbit disqualifies the block outright.
    if ranks.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some(ranks)
}

/// The bitmap of triple ranks a Steiner-mode search must cover exactly: all
/// triples, or all cross-group triples under a group constraint.
fn steiner_domain(ambient: Ambient, constraint: SearchConstraint) -> Result<Vec<u64>> {
    let npoints = ambient.order();
    let words = (npoints * (npoints - 1) * (npoints - 2) / 6).div_ceil(64);
    let mut mask = vec![0u64; words];
    let groups: Option<Vec<usize>> = match constraint.partition_e() {
        Some(e) => {
            let part = GroupPartition::from_e(ambient, e)?;
            Some(
                (0..npoints)
                    .map(|i| part.group_of(ambient, ambient.point_at(i)))
                    .collect(),
            )
        }
        None => None,
    };
    for c in 2..npoints {
        for b in 1..c {
            for a in 0..b {
                let within = groups
                    .as_ref()
                    .is_some_and(|g| g[a] == g[b] && g[b] == g[c]);
                if !within {
                    let r = rank3(a, b, c);
                    mask[r / 64] |= 1 << (r % 64);
                }
            }
        }
    }
    Ok(mask)
}

fn ranks_to_mask(ranks: &[u32], words: usize) -> Vec<u64> {
    let mut mask = vec![0u64; words];
    for &r in ranks {
        mask[r as usize / 64] |= 1 << (r % 64);
    }
    mask
}

fn conflicts(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).any(|(x, y)| x & y != 0)
}

fn or_into(acc: &mut [u64], b: &[u64]) {
    for (x, y) in acc.iter_mut().zip(b) {
        *x |= y;
    }
}

fn xor_out(acc: &mut [u64], b: &[u64]) {
    for (x, y) in acc.iter_mut().zip(b) {
        *x ^= y;
    }
}

/// Enumerates candidate blocks: canonical orbit representatives containing
/// `(0, 0)`, filtered by strictness, self-compatibility and the constraint.
fn candidates(p: &SearchProblem, ambient: Ambient) -> Result<Vec<Candidate>> {
    let np = ambient.order();
    let words = (np * (np - 1) * (np - 2) / 6).div_ceil(64);
    let partition = match p.constraint.partition_e() {
        Some(e) => Some(GroupPartition::from_e(ambient, e)?),
        None => None,
    };
    let k = p.k as usize;
    let mut out = Vec::new();
    // k-subsets of point indices containing 0, in lexicographic order.
    let mut chosen = vec![0usize; k];
    fn rec(
        ambient: Ambient,
        p: &SearchProblem,
        partition: &Option<GroupPartition>,
        chosen: &mut Vec<usize>,
        depth: usize,
        start: usize,
        words: usize,
        out: &mut Vec<Candidate>,
    ) {
        let k = p.k as usize;
        if depth == k {
            let points = chosen
                .iter()
                .map(|&i| ambient.point_at(i))
                .collect::<Vec<_>>();
            let block = Block::new(ambient, points).unwrap();
            let orbit = orbit_under(&block, Action::Full);
            if orbit.representative != block {
                return;
            }
            if p.strict && orbit.length != ambient.order() {
                return;
            }
            if let Some(part) = partition {
                // No within-group triple may appear in a block.
                let pts = block.points();
                for i in 0..k {
                    for j in (i + 1)..k {
                        for l in (j + 1)..k {
                            let g0 = part.group_of(ambient, pts[i]);
                            if g0 == part.group_of(ambient, pts[j])
                                && g0 == part.group_of(ambient, pts[l])
                            {
                                return;
                            }
                        }
                    }
                }
            }
            if p.constraint == SearchConstraint::SCyclic {
                let neg = block.negate();
                if orbit_under(&neg, Action::Full).representative != block {
                    return;
                }
            }
            if p.exclude.contains(&block) {
                return;
            }
            if let Some(ranks) = block_orbit_ranks(ambient, &block) {
                let mask = ranks_to_mask(&ranks, words);
                out.push(Candidate { block, mask, ranks });
            }
            return;
        }
        for i in start..ambient.order() {
            chosen[depth] = i;
            rec(ambient, p, partition, chosen, depth + 1, i + 1, words, out);
        }
    }
    chosen[0] = 0;
    rec(ambient, p, &partition, &mut chosen, 1, 1, words, &mut out);
    Ok(out)
}

/// Depth-first search over canonical orbit representatives.
///
/// Returns a verified design of the target size when one exists within budget,
/// otherwise the best found together with the exhaustion flag.
pub fn search(p: &SearchProblem) -> Result<SearchOutcome> {
    let ambient = Ambient::new(p.m, p.n)?;
    let np = ambient.order() as u64;
    if np > SEARCH_CEILING {
        return Err(Error::TooLarge {
            points: np,
            ceiling: SEARCH_CEILING,
        });
    }
    if p.t != 3 {
        return Err(Error::Parameter(
            "the searcher covers strength t = 3 only".into(),
        ));
    }
    if p.k < 3 || (p.k as u64) >= np {
        return Err(Error::Parameter(format!(
            "block size k={} out of range",
            p.k
        )));
    }
    let johnson = crate::bounds::johnson_bound(p.m as u64, p.n as u64, p.k as u64, 2)?;
    if p.target as u64 > johnson {
        return Err(Error::Parameter(format!(
            "target {} exceeds the Johnson bound {johnson}",
            p.target
        )));
    }

    let cands = candidates(p, ambient)?;
    let npoints = ambient.order();
    let words = (npoints * (npoints - 1) * (npoints - 2) / 6).div_ceil(64);

    // Shape-checked constraints are exact covers by nature; they always run in
    // Steiner mode so rejected solutions can be enumerated past.
    let steiner = p.steiner || p.constraint.shape_checked();
    let domain: Option<Vec<u64>> = if steiner {
        Some(steiner_domain(ambient, p.constraint)?)
    } else {
        None
    };

    // Seed with the forced initial blocks.
    let mut covered = vec![0u64; words];
    let mut forced: Vec<Block> = Vec::new();
    for b in &p.initial {
        if b.ambient() != ambient {
            return Err(Error::AmbientMismatch {
                expected: (ambient.rows, ambient.cols),
                found: (b.ambient().rows, b.ambient().cols),
            });
        }
        let rep = orbit_under(b, Action::Full).representative;
        let ranks = block_orbit_ranks(ambient, &rep)
            .ok_or_else(|| Error::Parameter("initial block conflicts with itself".into()))?;
        let mask = ranks_to_mask(&ranks, words);
        if conflicts(&covered, &mask) {
            return Err(Error::Parameter("initial blocks conflict".into()));
        }
        or_into(&mut covered, &mask);
        forced.push(rep);
    }

    struct Dfs<'a> {
        cands: &'a [Candidate],
        budget: Instant,
        limit: Duration,
        target: usize,
        best: Vec<Block>,
        exhausted: bool,
        nodes: u64,
    }

    let mut dfs = Dfs {
        cands: &cands,
        budget: Instant::now(),
        limit: p.budget,
        target: p.target,
        best: forced.clone(),
        exhausted: true,
        nodes: 0,
    };

    // Packing mode: maximize, stop at target. Returns true when target reached.
    fn go_packing(d: &mut Dfs, covered: &mut Vec<u64>, cur: &mut Vec<Block>, start: usize) -> bool {
        d.nodes += 1;
        if d.nodes.is_multiple_of(4096) && d.budget.elapsed() > d.limit {
            d.exhausted = false;
            return false;
        }
        if cur.len() > d.best.len() {
            d.best = cur.clone();
        }
        if cur.len() >= d.target {
            return true;
        }
        for i in start..d.cands.len() {
            if cur.len() + (d.cands.len() - i) < d.best.len() + 1
                && cur.len() + (d.cands.len() - i) < d.target
            {
                break;
            }
            let c = &d.cands[i];
            if conflicts(covered, &c.mask) {
                continue;
            }
            or_into(covered, &c.mask);
            cur.push(c.block.clone());
            if go_packing(d, covered, cur, i + 1) {
                return true;
            }
            cur.pop();
            xor_out(covered, &c.mask);
            if !d.exhausted {
                return false;
            }
        }
        false
    }

    // Steiner mode: exact-cover the domain, branching on the first uncovered
    // triple; a completed cover must also pass the acceptance filter.
    fn go_steiner(
        d: &mut Dfs,
        domain: &[u64],
        by_rank: &std::collections::HashMap<u32, Vec<usize>>,
        covered: &mut Vec<u64>,
        cur: &mut Vec<Block>,
        accept: &dyn Fn(&[Block]) -> bool,
    ) -> bool {
        d.nodes += 1;
        if d.nodes.is_multiple_of(4096) && d.budget.elapsed() > d.limit {
            d.exhausted = false;
            return false;
        }
        // First domain rank not yet covered.
        let mut first: Option<u32> = None;
        'outer: for (w, (&dom, &cov)) in domain.iter().zip(covered.iter()).enumerate() {
            let missing = dom & !cov;
            if missing != 0 {
                first = Some((w * 64 + missing.trailing_zeros() as usize) as u32);
                break 'outer;
            }
        }
        let Some(first) = first else {
            if cur.len() > d.best.len() {
                d.best = cur.clone();
            }
            return accept(cur);
        };
        let Some(options) = by_rank.get(&first) else {
            return false;
        };
        for &i in options {
            let c = &d.cands[i];
            if conflicts(covered, &c.mask) {
                continue;
            }
            or_into(covered, &c.mask);
            cur.push(c.block.clone());
            if go_steiner(d, domain, by_rank, covered, cur, accept) {
                return true;
            }
            cur.pop();
            xor_out(covered, &c.mask);
            if !d.exhausted {
                return false;
            }
        }
        false
    }

    // Turns a complete block list into the design the constraint promises.
    let constraint = p.constraint;
    let k = p.k;
    let make_design = move |blocks: Vec<Block>, complete: bool| -> Result<DesignInstance> {
        let (kind, e) = if !complete {
            (DesignKind::Packing, None)
        } else {
            match constraint {
                SearchConstraint::GDesign { e } => (DesignKind::GDesign, Some(e)),
                SearchConstraint::GStar { e } => (DesignKind::GStar, Some(e)),
                SearchConstraint::CyclicGStar { spacing } => {
                    (DesignKind::CyclicGStar, Some(spacing))
                }
                _ if steiner => (DesignKind::Steiner, None),
                _ => (DesignKind::Packing, None),
            }
        };
        DesignInstance::new(
            ambient,
            kind,
            3,
            vec![k],
            e,
            Some(2),
            Invariance::Full,
            blocks,
        )
    };
    let accept = |blocks: &[Block]| -> bool {
        if !p.constraint.shape_checked() {
            return true;
        }
        make_design(blocks.to_vec(), true)
            .and_then(|d| crate::verifier::verify_g_star(&d))
            .map(|r| r.valid && r.strict)
            .unwrap_or(false)
    };

    let mut cur = forced.clone();
    let reached = if let Some(domain) = &domain {
        let mut by_rank: std::collections::HashMap<u32, Vec<usize>> =
            std::collections::HashMap::new();
        for (i, c) in cands.iter().enumerate() {
            for &r in &c.ranks {
                by_rank.entry(r).or_default().push(i);
            }
        }
        go_steiner(&mut dfs, domain, &by_rank, &mut covered, &mut cur, &accept)
    } else {
        go_packing(&mut dfs, &mut covered, &mut cur, 0)
    };

    // On success `cur` holds the accepted solution; otherwise fall back to the
    // best partial packing seen.
    let best = if reached { cur } else { dfs.best.clone() };
    let design = make_design(best.clone(), reached)?;
    // Any returned design must pass the corresponding verifier.
    let report = match design.kind {
        DesignKind::GStar | DesignKind::CyclicGStar => crate::verifier::verify_g_star(&design)?,
        DesignKind::GDesign => crate::verifier::verify_group_design(&design)?,
        _ => crate::verifier::verify_packing(&design)?,
    };
    if !report.valid {
        return Err(Error::FailedVerification {
            stage: "search-result".into(),
            summary: report.summary(),
        });
    }
    let reached_target = reached && best.len() >= p.target;
    Ok(SearchOutcome {
        best: best.len(),
        reached_target,
        // Only meaningful when the target was missed: it then certifies that
        // the whole canonical-representative space was explored.
        exhausted: !reached_target && dfs.exhausted,
        design,
    })
}

/// Enumerates every exact-cover solution of a Steiner-mode problem, up to
/// `limit`, in deterministic branch order. Returns the base-block lists; the
/// caller decides how to interpret them.
pub fn search_all(p: &SearchProblem, limit: usize) -> Result<Vec<Vec<Block>>> {
    if !p.steiner {
        return Err(Error::Parameter(
            "solution enumeration is a Steiner-mode feature".into(),
        ));
    }
    let ambient = Ambient::new(p.m, p.n)?;
    if ambient.order() as u64 > SEARCH_CEILING {
        return Err(Error::TooLarge {
            points: ambient.order() as u64,
            ceiling: SEARCH_CEILING,
        });
    }
    if p.t != 3 {
        return Err(Error::Parameter(
            "the searcher covers strength t = 3 only".into(),
        ));
    }
    let cands = candidates(p, ambient)?;
    let npoints = ambient.order();
    let words = (npoints * (npoints - 1) * (npoints - 2) / 6).div_ceil(64);
    let domain = steiner_domain(ambient, p.constraint)?;
    let mut by_rank: std::collections::HashMap<u32, Vec<usize>> = std::collections::HashMap::new();
    for (i, c) in cands.iter().enumerate() {
        for &r in &c.ranks {
            by_rank.entry(r).or_default().push(i);
        }
    }
    let mut covered = vec![0u64; words];
    let mut cur: Vec<Block> = Vec::new();
    for b in &p.initial {
        let rep = orbit_under(b, Action::Full).representative;
        let ranks = block_orbit_ranks(ambient, &rep)
            .ok_or_else(|| Error::Parameter("initial block conflicts with itself".into()))?;
        let mask = ranks_to_mask(&ranks, words);
        if conflicts(&covered, &mask) {
            return Err(Error::Parameter("initial blocks conflict".into()));
        }
        or_into(&mut covered, &mask);
        cur.push(rep);
    }
    let mut solutions = Vec::new();
    let deadline = Instant::now();
    fn enumerate(
        cands: &[Candidate],
        by_rank: &std::collections::HashMap<u32, Vec<usize>>,
        domain: &[u64],
        covered: &mut Vec<u64>,
        cur: &mut Vec<Block>,
        solutions: &mut Vec<Vec<Block>>,
        limit: usize,
        deadline: &Instant,
        budget: Duration,
    ) {
        if solutions.len() >= limit || deadline.elapsed() > budget {
            return;
        }
        let mut first: Option<u32> = None;
        for (w, (&dom, &cov)) in domain.iter().zip(covered.iter()).enumerate() {
            let missing = dom & !cov;
            if missing != 0 {
                first = Some((w * 64 + missing.trailing_zeros() as usize) as u32);
                break;
            }
        }
        let Some(first) = first else {
            solutions.push(cur.clone());
            return;
        };
        let Some(options) = by_rank.get(&first) else {
            return;
        };
        for &i in options {
            let c = &cands[i];
            if conflicts(covered, &c.mask) {
                continue;
            }
            or_into(covered, &c.mask);
            cur.push(c.block.clone());
            enumerate(
                cands, by_rank, domain, covered, cur, solutions, limit, deadline, budget,
            );
            cur.pop();
            xor_out(covered, &c.mask);
            if solutions.len() >= limit {
                return;
            }
        }
    }
    enumerate(
        &cands,
        &by_rank,
        &domain,
        &mut covered,
        &mut cur,
        &mut solutions,
        limit,
        &deadline,
        p.budget,
    );
    Ok(solutions)
}

/// Reinterprets a searched cyclic SQS over `Z_v` as a cyclic G*-design with the
/// given group spacing (groups = cosets of `spacing·Z_v`).
pub fn as_cyclic_g_star(d: &DesignInstance, spacing: u32) -> Result<DesignInstance> {
    if d.ambient().rows != 1 {
        return Err(Error::Parameter(
            "cyclic reinterpretation needs m = 1".into(),
        ));
    }
    DesignInstance::new(
        d.ambient(),
        DesignKind::CyclicGStar,
        d.t,
        d.block_sizes.clone(),
        Some(spacing),
        d.lambda,
        d.invariance,
        d.base_blocks().to_vec(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn searches_z2z8_optimal_packing() {
        let p = SearchProblem::packing(2, 8, 4, 3, 8);
        let out = search(&p).unwrap();
        assert!(out.reached_target, "best found: {}", out.best);
        assert_eq!(out.design.base_blocks().len(), 8);
        let r = crate::verifier::verify_packing(&out.design).unwrap();
        assert!(r.valid && r.strict);
        // Determinism: a second run returns the identical witness.
        let again = search(&p).unwrap();
        assert_eq!(again.design, out.design);
    }

    #[test]
    fn zero_budget_returns_best_effort() {
        // A large space with no time: the search must hand back whatever
        // partial packing it reached, flagged as not exhausted.
        let mut p = SearchProblem::packing(1, 63, 4, 3, 155);
        p.budget = Duration::from_millis(0);
        let out = search(&p).unwrap();
        assert!(!out.reached_target);
        assert!(!out.exhausted);
        let r = crate::verifier::verify_packing(&out.design).unwrap();
        assert!(r.valid);
    }

    #[test]
    fn z9_target_two_is_impossible() {
        let mut p = SearchProblem::packing(1, 9, 4, 3, 2);
        p.budget = Duration::from_secs(30);
        let out = search(&p).unwrap();
        assert!(!out.reached_target);
        assert!(out.exhausted, "search must exhaust the space");
        assert_eq!(out.best, 1);
    }

    #[test]
    fn shape_constrained_searches() {
        // The cyclic quadruple system over Z_10 with the symmetric-form
        // condition, searched directly as a cyclic G*(5, 2, 4, 3).
        let mut p = SearchProblem::packing(1, 10, 4, 3, 3);
        p.constraint = SearchConstraint::CyclicGStar { spacing: 5 };
        let out = search(&p).unwrap();
        assert!(out.reached_target);
        assert_eq!(out.design.kind, crate::model::DesignKind::CyclicGStar);
        assert_eq!(out.design.e, Some(5));

        // Product-form shape-constrained search over Z_10 x Z_2 recovers a
        // strictly invariant G*(5, 4, 4, 3).
        let mut p = SearchProblem::packing(10, 2, 4, 3, 14);
        p.constraint = SearchConstraint::GStar { e: 2 };
        let out = search(&p).unwrap();
        assert!(out.reached_target);
        assert_eq!(out.design.kind, crate::model::DesignKind::GStar);
        let r = crate::verifier::verify_g_star(&out.design).unwrap();
        assert!(r.valid && r.strict);
    }

    #[test]
    fn s_cyclic_sqs10() {
        let mut p = SearchProblem::packing(1, 10, 4, 3, 3);
        p.constraint = SearchConstraint::SCyclic;
        p.steiner = true;
        let out = search(&p).unwrap();
        assert!(out.reached_target);
        assert_eq!(out.best, 3);
        let r = crate::verifier::verify_packing(&out.design).unwrap();
        assert!(r.valid && r.strict);
        // Steiner: the 30 developed blocks cover all 120 triples exactly once.
        assert_eq!(r.developed_block_count, 30);
        // S-cyclic: every base block orbit contains its own negative.
        for b in out.design.base_blocks() {
            let neg = b.negate();
            assert_eq!(
                orbit_under(&neg, Action::Full).representative,
                orbit_under(b, Action::Full).representative
            );
        }
        // Reinterpretation as a cyclic G*-design with spacing 5 verifies.
        let g = as_cyclic_g_star(&out.design, 5).unwrap();
        let r = crate::verifier::verify_g_star(&g).unwrap();
        assert!(r.valid, "{:?}", r.violations.first());
    }
}
