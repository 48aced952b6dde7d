//! GF(p²) arithmetic, PGL(2, p²) enumeration, the inversive plane, and the
//! derived optimal `(p, p, p+1, 2)`-OOSPCs.
//!
//! GF(p²) is realized as `a + bθ` with `θ² = r`, `r` the smallest positive
//! quadratic non-residue mod `p`. The projective line `GF(p²) ∪ {∞}` carries the
//! sharply 3-transitive action of PGL(2, p²) by linear fractional maps; the
//! orbit of the base circle `GF(p) ∪ {∞}` is an `S(3, p+1, p²+1)` (an inversive
//! plane). Deleting `∞` and every circle through it leaves a `3-(p², p+1, 1)`
//! packing on which the additive group of GF(p²) ≅ `Z_p × Z_p` acts
//! point-regularly with trivial block stabilizers - an optimal
//! `(p, p, p+1, 2)`-OOSPC of size `p − 1`.

use crate::error::Error;
use crate::group::{Ambient, Block, Point};
use crate::model::{DesignInstance, DesignKind, Invariance, Oospc};
use crate::verifier;
use crate::Result;

/// An element `a + bθ` of GF(p²), coefficients mod `p`.
pub type FieldElem = (u32, u32);

/// GF(p²) with `θ² = r`.
#[derive(Debug, Clone, Copy)]
pub struct GfP2 {
    pub p: u32,
    /// The fixed quadratic non-residue.
    pub r: u32,
}

impl GfP2 {
    pub fn new(p: u32) -> Result<GfP2> {
        if p < 3 || !is_prime(p) {
            return Err(Error::Parameter(format!("p={p} must be an odd prime >= 3")));
        }
        let r = (2..p)
            .find(|&x| !is_quadratic_residue(x, p))
            .ok_or_else(|| Error::Parameter(format!("no quadratic non-residue mod {p}?")))?;
        Ok(GfP2 { p, r })
    }

    pub fn zero(&self) -> FieldElem {
        (0, 0)
    }

    pub fn one(&self) -> FieldElem {
        (1, 0)
    }

    pub fn add(&self, x: FieldElem, y: FieldElem) -> FieldElem {
        ((x.0 + y.0) % self.p, (x.1 + y.1) % self.p)
    }

    pub fn neg(&self, x: FieldElem) -> FieldElem {
        ((self.p - x.0) % self.p, (self.p - x.1) % self.p)
    }

    pub fn sub(&self, x: FieldElem, y: FieldElem) -> FieldElem {
        self.add(x, self.neg(y))
    }

    pub fn mul(&self, x: FieldElem, y: FieldElem) -> FieldElem {
        let p = self.p as u64;
        let (a, b) = (x.0 as u64, x.1 as u64);
        let (c, d) = (y.0 as u64, y.1 as u64);
        let re = (a * c + self.r as u64 % p * (b * d % p)) % p;
        let im = (a * d + b * c) % p;
        (re as u32, im as u32)
    }

    /// Multiplicative inverse via the conjugate: `(a+bθ)⁻¹ = (a−bθ)/(a²−rb²)`.
    pub fn inv(&self, x: FieldElem) -> Result<FieldElem> {
        if x == (0, 0) {
            return Err(Error::Parameter("inverse of zero".into()));
        }
        let p = self.p as u64;
        let norm = ((x.0 as u64 * x.0 as u64) % p + p
            - (self.r as u64 * ((x.1 as u64 * x.1 as u64) % p)) % p)
            % p;
        let ninv = mod_inverse(norm as u32, self.p);
        let conj = (x.0, (self.p - x.1) % self.p);
        Ok(self.mul(conj, (ninv, 0)))
    }

    pub fn is_zero(&self, x: FieldElem) -> bool {
        x == (0, 0)
    }

    /// All q = p² field elements, in (a, b) lexicographic order.
    pub fn elements(&self) -> Vec<FieldElem> {
        let mut out = Vec::with_capacity((self.p * self.p) as usize);
        for a in 0..self.p {
            for b in 0..self.p {
                out.push((a, b));
            }
        }
        out
    }
}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn is_quadratic_residue(x: u32, p: u32) -> bool {
    (0..p).any(|y| (y as u64 * y as u64) % p as u64 == x as u64)
}

fn mod_inverse(a: u32, p: u32) -> u32 {
    // Fermat: a^(p-2) mod p.
    let mut base = a as u64 % p as u64;
    let mut exp = p as u64 - 2;
    let mut acc = 1u64;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p as u64;
        }
        base = base * base % p as u64;
        exp >>= 1;
    }
    acc as u32
}

/// A point of the projective line `GF(p²) ∪ {∞}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ProjPoint {
    Fin(FieldElem),
    Inf,
}

/// A linear fractional map `x ↦ (ax+b)/(cx+d)` with `ad − bc ≠ 0`, stored with
/// the first nonzero coordinate scaled to 1 so each PGL class appears once.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LinearFractional {
    pub a: FieldElem,
    pub b: FieldElem,
    pub c: FieldElem,
    pub d: FieldElem,
}

/// Applies the four-case definition, including the `∞` handling.
pub fn apply(gf: &GfP2, f: &LinearFractional, x: ProjPoint) -> ProjPoint {
    match x {
        ProjPoint::Fin(x) => {
            let num = gf.add(gf.mul(f.a, x), f.b);
            let den = gf.add(gf.mul(f.c, x), f.d);
            if gf.is_zero(den) {
                ProjPoint::Inf
            } else {
                ProjPoint::Fin(gf.mul(num, gf.inv(den).unwrap()))
            }
        }
        ProjPoint::Inf => {
            if gf.is_zero(f.c) {
                ProjPoint::Inf
            } else {
                ProjPoint::Fin(gf.mul(f.a, gf.inv(f.c).unwrap()))
            }
        }
    }
}

/// All q³ − q canonical maps: `a = 1` with `d ≠ bc`, plus `a = 0, b = 1, c ≠ 0`.
pub fn canonical_maps(gf: &GfP2) -> Vec<LinearFractional> {
    let elems = gf.elements();
    let q = elems.len();
    let mut out = Vec::with_capacity(q * q * q);
    let one = gf.one();
    for &b in &elems {
        for &c in &elems {
            let bc = gf.mul(b, c);
            for &d in &elems {
                if d != bc {
                    out.push(LinearFractional { a: one, b, c, d });
                }
            }
        }
    }
    for &c in &elems[1..] {
        for &d in &elems {
            out.push(LinearFractional {
                a: gf.zero(),
                b: one,
                c,
                d,
            });
        }
    }
    out
}

/// The inversive plane `S(3, p+1, p²+1)`: the PGL(2, p²) orbit of the base
/// circle `GF(p) ∪ {∞}`, as sorted circles. `p³ + p` circles, certified as a
/// Steiner system by exhaustive 3-subset coverage.
pub fn inversive_plane(p: u32) -> Result<Vec<Vec<ProjPoint>>> {
    if p > 13 {
        return Err(Error::TooLarge {
            points: p as u64,
            ceiling: 13,
        });
    }
    let gf = GfP2::new(p)?;
    let base: Vec<ProjPoint> = (0..p)
        .map(|a| ProjPoint::Fin((a, 0)))
        .chain(std::iter::once(ProjPoint::Inf))
        .collect();
    let mut circles: std::collections::BTreeSet<Vec<ProjPoint>> = std::collections::BTreeSet::new();
    for f in canonical_maps(&gf) {
        let mut image: Vec<ProjPoint> = base.iter().map(|&x| apply(&gf, &f, x)).collect();
        image.sort();
        circles.insert(image);
    }
    let circles: Vec<Vec<ProjPoint>> = circles.into_iter().collect();
    let expected = (p as usize).pow(3) + p as usize;
    if circles.len() != expected {
        return Err(Error::FailedVerification {
            stage: "inversive-plane".into(),
            summary: format!("{} circles, expected {expected}", circles.len()),
        });
    }
    // Steiner certification: every 3-subset of the q²+1 points in exactly one circle.
    let mut points: Vec<ProjPoint> = gf.elements().into_iter().map(ProjPoint::Fin).collect();
    points.push(ProjPoint::Inf);
    points.sort();
    let index_of = |x: &ProjPoint| points.binary_search(x).unwrap();
    let np = points.len();
    let mut counts = vec![0u8; np * (np - 1) * (np - 2) / 6];
    let rank = |mut t: [usize; 3]| {
        t.sort();
        t[2] * (t[2] - 1) * (t[2] - 2) / 6 + t[1] * (t[1] - 1) / 2 + t[0]
    };
    for circle in &circles {
        let idx: Vec<usize> = circle.iter().map(index_of).collect();
        for i in 0..idx.len() {
            for j in (i + 1)..idx.len() {
                for k in (j + 1)..idx.len() {
                    let r = rank([idx[i], idx[j], idx[k]]);
                    counts[r] = counts[r].saturating_add(1);
                }
            }
        }
    }
    if counts.iter().any(|&c| c != 1) {
        return Err(Error::FailedVerification {
            stage: "inversive-plane".into(),
            summary: "3-subset coverage is not exactly 1".into(),
        });
    }
    Ok(circles)
}

/// Deletes `∞` and all circles through it, re-coordinatizes GF(p²) ≅ Z_p × Z_p
/// via the basis `{1, θ}` (row = a, col = b), and returns the strictly invariant
/// `3-(p², p+1, 1)` packing together with its codeword view - an optimal
/// `(p, p, p+1, 2)`-OOSPC of size `p − 1`.
pub fn inversive_to_oospc(p: u32) -> Result<(DesignInstance, Oospc)> {
    let circles = inversive_plane(p)?;
    let ambient = Ambient::new(p, p)?;
    let mut blocks = Vec::new();
    for circle in &circles {
        if circle.contains(&ProjPoint::Inf) {
            continue;
        }
        let pts: Vec<Point> = circle
            .iter()
            .map(|x| match x {
                ProjPoint::Fin((a, b)) => Point::new(*a, *b),
                ProjPoint::Inf => unreachable!(),
            })
            .collect();
        blocks.push(Block::new(ambient, pts)?);
    }
    let expected_blocks = (p * p * (p - 1)) as usize;
    if blocks.len() != expected_blocks {
        return Err(Error::FailedVerification {
            stage: "inversive-delete".into(),
            summary: format!(
                "{} finite circles, expected {expected_blocks}",
                blocks.len()
            ),
        });
    }
    // The block set is invariant under translations; keep one representative
    // per orbit as base blocks.
    blocks.sort();
    let mut base = Vec::new();
    let mut seen: std::collections::BTreeSet<Block> = std::collections::BTreeSet::new();
    for b in &blocks {
        if seen.contains(b) {
            continue;
        }
        let orbit = crate::group::orbit_blocks(b, crate::group::Action::Full);
        if orbit.len() != ambient.order() {
            return Err(Error::FailedVerification {
                stage: "inversive-delete".into(),
                summary: "short orbit in the deleted design".into(),
            });
        }
        for t in orbit {
            seen.insert(t);
        }
        base.push(crate::group::orbit_under(b, crate::group::Action::Full).representative);
    }
    if seen.len() != blocks.len() {
        return Err(Error::FailedVerification {
            stage: "inversive-delete".into(),
            summary: "orbit union does not reproduce the deleted block set".into(),
        });
    }
    let design = DesignInstance::new(
        ambient,
        DesignKind::Packing,
        3,
        vec![p + 1],
        None,
        Some(2),
        Invariance::Full,
        base,
    )?;
    let report = verifier::verify_packing(&design)?;
    if !report.valid || !report.strict {
        return Err(Error::FailedVerification {
            stage: "inversive-packing".into(),
            summary: report.summary(),
        });
    }
    let oospc = design.to_oospc()?;
    Ok((design, oospc))
}
