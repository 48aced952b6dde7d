//! Arithmetic of the translation group `Z_m × Z_n` acting on points and blocks.
//!
//! Points are residue pairs, blocks are sorted duplicate-free point sets, and the
//! group acts by componentwise modular addition. Every block carries its ambient
//! `(m, n)`; mixing ambients is a hard error, never a silent coercion.
//!
//! Designs that are only *semi-cyclic* (invariant under the column shift but not
//! under row translations) reuse the same machinery through [`Action::ColumnShift`],
//! which restricts the acting group to `{0} × Z_n`.

use crate::error::Error;
use crate::Result;

/// The ambient product group `Z_m × Z_n` (rows mod `m`, columns mod `n`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ambient {
    pub rows: u32,
    pub cols: u32,
}

impl Ambient {
    pub fn new(rows: u32, cols: u32) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Parameter(format!(
                "ambient moduli must be positive, got ({rows}, {cols})"
            )));
        }
        Ok(Ambient { rows, cols })
    }

    /// Number of points `m·n`.
    pub fn order(&self) -> usize {
        self.rows as usize * self.cols as usize
    }

    /// Flat index of a point, row-major.
    pub fn index_of(&self, p: Point) -> usize {
        p.row as usize * self.cols as usize + p.col as usize
    }

    pub fn point_at(&self, index: usize) -> Point {
        Point {
            row: (index / self.cols as usize) as u32,
            col: (index % self.cols as usize) as u32,
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        p.row < self.rows && p.col < self.cols
    }

    fn check(&self, p: Point) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(Error::AmbientMismatch {
                expected: (self.rows, self.cols),
                found: (p.row + 1, p.col + 1),
            })
        }
    }

    pub fn add(&self, a: Point, b: Point) -> Point {
        Point {
            row: (a.row + b.row) % self.rows,
            col: (a.col + b.col) % self.cols,
        }
    }

    pub fn neg(&self, a: Point) -> Point {
        Point {
            row: (self.rows - a.row % self.rows) % self.rows,
            col: (self.cols - a.col % self.cols) % self.cols,
        }
    }

    pub fn sub(&self, a: Point, b: Point) -> Point {
        self.add(a, self.neg(b))
    }

    /// All group elements in lexicographic order.
    pub fn elements(&self) -> impl Iterator<Item = Point> + '_ {
        let n = self.cols;
        (0..self.rows).flat_map(move |r| (0..n).map(move |c| Point { row: r, col: c }))
    }
}

/// An element of `Z_m × Z_n`; doubles as a translation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Point {
    pub row: u32,
    pub col: u32,
}

impl Point {
    pub fn new(row: u32, col: u32) -> Self {
        Point { row, col }
    }
}

/// Which translations act on a block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    /// The full translation group `Z_m × Z_n`.
    Full,
    /// Only the column shift `{0} × Z_n` (semi-cyclic designs).
    ColumnShift,
}

impl Action {
    pub fn order(&self, ambient: Ambient) -> usize {
        match self {
            Action::Full => ambient.order(),
            Action::ColumnShift => ambient.cols as usize,
        }
    }

    pub fn elements(&self, ambient: Ambient) -> Vec<Point> {
        match self {
            Action::Full => ambient.elements().collect(),
            Action::ColumnShift => (0..ambient.cols).map(|c| Point::new(0, c)).collect(),
        }
    }
}

/// A canonical fixed-size set of distinct points: sorted lexicographically by
/// `(row, col)`, all over one ambient.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Block {
    ambient: Ambient,
    points: Vec<Point>,
}

impl Block {
    /// Builds a block, sorting the points and rejecting duplicates or residues
    /// outside the ambient.
    pub fn new(ambient: Ambient, mut points: Vec<Point>) -> Result<Self> {
        for &p in &points {
            ambient.check(p)?;
        }
        points.sort();
        if points.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Parameter(format!(
                "duplicate point in block over Z_{}xZ_{}",
                ambient.rows, ambient.cols
            )));
        }
        Ok(Block { ambient, points })
    }

    pub fn from_pairs(ambient: Ambient, pairs: &[(u32, u32)]) -> Result<Self> {
        Block::new(
            ambient,
            pairs.iter().map(|&(r, c)| Point::new(r, c)).collect(),
        )
    }

    pub fn ambient(&self) -> Ambient {
        self.ambient
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, p: Point) -> bool {
        self.points.binary_search(&p).is_ok()
    }

    /// The translate `{p + delta : p ∈ self}`, re-sorted into canonical order.
    pub fn translate(&self, delta: Point) -> Result<Block> {
        self.ambient.check(delta)?;
        let mut points: Vec<Point> = self
            .points
            .iter()
            .map(|&p| self.ambient.add(p, delta))
            .collect();
        points.sort();
        Ok(Block {
            ambient: self.ambient,
            points,
        })
    }

    /// The pointwise negation `{-p : p ∈ self}`.
    pub fn negate(&self) -> Block {
        let mut points: Vec<Point> = self.points.iter().map(|&p| self.ambient.neg(p)).collect();
        points.sort();
        Block {
            ambient: self.ambient,
            points,
        }
    }
}

/// A block orbit under the acting translations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Orbit {
    /// Lexicographically minimal translate.
    pub representative: Block,
    /// Number of distinct translates; divides the group order.
    pub length: usize,
    /// Translations fixing the block setwise; always contains the identity and
    /// forms a subgroup, so `length × |stabilizer| = |group|`.
    pub stabilizer: Vec<Point>,
}

/// Exactly the translations `δ` with `translate(block, δ) = block`.
pub fn stabilizer(block: &Block) -> Vec<Point> {
    stabilizer_under(block, Action::Full)
}

pub fn stabilizer_under(block: &Block, action: Action) -> Vec<Point> {
    assert!(!block.is_empty(), "stabilizer of an empty block");
    action
        .elements(block.ambient())
        .into_iter()
        .filter(|&d| block.translate(d).expect("delta in ambient") == *block)
        .collect()
}

/// Orbit of a block under the full translation group.
///
/// The length is derived from the stabilizer (`|G| / |stab|`); translate
/// enumeration is kept as an independent oracle in the tests.
pub fn orbit_of(block: &Block) -> Orbit {
    orbit_under(block, Action::Full)
}

pub fn orbit_under(block: &Block, action: Action) -> Orbit {
    let stab = stabilizer_under(block, action);
    let length = action.order(block.ambient()) / stab.len();
    // The lex-min translate puts its least point at the least reachable value,
    // so under the full group it suffices to root each point at the origin.
    let representative = match action {
        Action::Full => block
            .points()
            .iter()
            .map(|&p| block.translate(block.ambient().neg(p)).unwrap())
            .min()
            .unwrap(),
        Action::ColumnShift => (0..block.ambient().cols)
            .map(|c| block.translate(Point::new(0, c)).unwrap())
            .min()
            .unwrap(),
    };
    Orbit {
        representative,
        length,
        stabilizer: stab,
    }
}

/// All distinct translates of a block, in sorted order.
pub fn orbit_blocks(block: &Block, action: Action) -> Vec<Block> {
    let mut set: Vec<Block> = action
        .elements(block.ambient())
        .into_iter()
        .map(|d| block.translate(d).unwrap())
        .collect();
    set.sort();
    set.dedup();
    set
}

/// Develops base blocks: each orbit is contributed once per base block, and
/// duplicates *across* orbits are preserved so the verifier can flag them.
pub fn develop(base_blocks: &[Block], action: Action) -> Result<Vec<Block>> {
    let mut out = Vec::new();
    let mut ambient: Option<Ambient> = None;
    for b in base_blocks {
        if let Some(a) = ambient {
            if a != b.ambient() {
                return Err(Error::AmbientMismatch {
                    expected: (a.rows, a.cols),
                    found: (b.ambient().rows, b.ambient().cols),
                });
            }
        } else {
            ambient = Some(b.ambient());
        }
        out.extend(orbit_blocks(b, action));
    }
    Ok(out)
}
