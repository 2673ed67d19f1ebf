//! Square tilings of an `n × n` grid under horizontal and vertical
//! compatibility relations.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type TileId = usize;

/// Tiles `t0..tk`, the relations `H, V ⊆ T × T`, and the grid side `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TilingInstance {
    tiles: Vec<String>,
    horizontal: BTreeSet<(TileId, TileId)>,
    vertical: BTreeSet<(TileId, TileId)>,
    n: u64,
}

impl TilingInstance {
    pub fn new(
        tiles: Vec<String>,
        horizontal: impl IntoIterator<Item = (TileId, TileId)>,
        vertical: impl IntoIterator<Item = (TileId, TileId)>,
        n: u64,
    ) -> Result<Self> {
        if tiles.is_empty() {
            return Err(Error::InvalidInstance("at least one tile is required".into()));
        }
        let distinct: BTreeSet<_> = tiles.iter().collect();
        if distinct.len() != tiles.len() {
            return Err(Error::InvalidInstance("tile names must be distinct".into()));
        }
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::InvalidInstance(format!("n = {n} is not a power of two of at least 2")));
        }
        let k = tiles.len();
        let check = |rel: BTreeSet<(TileId, TileId)>, name: &str| {
            match rel.iter().find(|(a, b)| *a >= k || *b >= k) {
                Some(pair) => Err(Error::InvalidInstance(format!("{name} mentions an undeclared tile in {pair:?}"))),
                None => Ok(rel),
            }
        };
        let horizontal = check(horizontal.into_iter().collect(), "H")?;
        let vertical = check(vertical.into_iter().collect(), "V")?;
        Ok(TilingInstance { tiles, horizontal, vertical, n })
    }

    pub fn tiles(&self) -> &[String] {
        &self.tiles
    }

    pub fn num_tiles(&self) -> usize {
        self.tiles.len()
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// `log2 n`.
    pub fn bits(&self) -> usize {
        self.n.trailing_zeros() as usize
    }

    pub fn horizontal(&self) -> &BTreeSet<(TileId, TileId)> {
        &self.horizontal
    }

    pub fn vertical(&self) -> &BTreeSet<(TileId, TileId)> {
        &self.vertical
    }

    pub fn h_allows(&self, left: TileId, right: TileId) -> bool {
        self.horizontal.contains(&(left, right))
    }

    pub fn v_allows(&self, upper: TileId, lower: TileId) -> bool {
        self.vertical.contains(&(upper, lower))
    }

    /// Grid side as a `usize`, refusing grids that cannot be stored.
    fn side(&self) -> Result<usize> {
        usize::try_from(self.n)
            .ok()
            .filter(|n| n.checked_mul(*n).is_some())
            .ok_or_else(|| Error::InvalidInstance(format!("an {0} × {0} grid does not fit in memory", self.n)))
    }
}

/// A total assignment `f(i, j)`, `i` the column and `j` the row, stored row by row.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Tiling {
    n: usize,
    cells: Vec<TileId>,
}

impl Tiling {
    pub fn new(n: usize, cells: Vec<TileId>) -> Result<Self> {
        if cells.len() != n * n {
            return Err(Error::InvalidInstance(format!("{} cells given for an {n} × {n} grid", cells.len())));
        }
        Ok(Tiling { n, cells })
    }

    pub fn constant(n: usize, tile: TileId) -> Self {
        Tiling { n, cells: vec![tile; n * n] }
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> TileId) -> Self {
        let mut cells = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                cells.push(f(i, j));
            }
        }
        Tiling { n, cells }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> TileId {
        self.cells[j * self.n + i]
    }

    pub fn cells(&self) -> &[TileId] {
        &self.cells
    }

    pub fn display<'a>(&'a self, instance: &'a TilingInstance) -> TilingDisplay<'a> {
        TilingDisplay { tiling: self, instance }
    }
}

/// One row per line, tile names separated by spaces.
pub struct TilingDisplay<'a> {
    tiling: &'a Tiling,
    instance: &'a TilingInstance,
}

impl fmt::Display for TilingDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.tiling.n;
        for j in 0..n {
            let row: Vec<&str> = (0..n).map(|i| self.instance.tiles[self.tiling.get(i, j)].as_str()).collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TilingViolation {
    Origin { found: TileId },
    Horizontal { from: (usize, usize), to: (usize, usize) },
    Vertical { from: (usize, usize), to: (usize, usize) },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ConsistencyReport {
    pub violations: Vec<TilingViolation>,
}

impl ConsistencyReport {
    pub fn is_consistent(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Every violated constraint. Edges stop at the grid boundary; nothing wraps.
pub fn check_tiling(instance: &TilingInstance, f: &Tiling) -> Result<ConsistencyReport> {
    let n = instance.side()?;
    if f.n != n {
        return Err(Error::InvalidInstance(format!("tiling is {0} × {0}, instance wants {n} × {n}", f.n)));
    }
    if let Some(&bad) = f.cells.iter().find(|&&t| t >= instance.num_tiles()) {
        return Err(Error::InvalidInstance(format!("tiling uses undeclared tile index {bad}")));
    }
    let mut violations = Vec::new();
    if f.get(0, 0) != 0 {
        violations.push(TilingViolation::Origin { found: f.get(0, 0) });
    }
    for j in 0..n {
        for i in 0..n {
            if i + 1 < n && !instance.h_allows(f.get(i, j), f.get(i + 1, j)) {
                violations.push(TilingViolation::Horizontal { from: (i, j), to: (i + 1, j) });
            }
            if j + 1 < n && !instance.v_allows(f.get(i, j), f.get(i, j + 1)) {
                violations.push(TilingViolation::Vertical { from: (i, j), to: (i, j + 1) });
            }
        }
    }
    Ok(ConsistencyReport { violations })
}

/// Backtracking over cells in row-major order, trying tiles in declaration
/// order, so the witness is the lexicographically first consistent tiling.
/// `budget` caps the number of cell assignments tried.
pub fn solve_tiling_bruteforce(instance: &TilingInstance, budget: u64) -> Result<Option<Tiling>> {
    let n = instance.side()?;
    let k = instance.num_tiles();
    let total = n * n;
    let fits = |cells: &[TileId], c: usize, t: TileId| {
        let (i, j) = (c % n, c / n);
        (c != 0 || t == 0)
            && (i == 0 || instance.h_allows(cells[c - 1], t))
            && (j == 0 || instance.v_allows(cells[c - n], t))
    };
    let mut cells: Vec<TileId> = Vec::with_capacity(total);
    // next tile to try at the current cell
    let mut next = 0;
    let mut steps = 0u64;
    loop {
        let c = cells.len();
        if c == total {
            return Ok(Some(Tiling { n, cells }));
        }
        match (next..k).find(|&t| fits(&cells, c, t)) {
            Some(t) => {
                steps += 1;
                if steps > budget {
                    return Err(Error::SearchBudgetExceeded { budget });
                }
                cells.push(t);
                next = 0;
            }
            None => match cells.pop() {
                Some(prev) => next = prev + 1,
                None => return Ok(None),
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TilingFile {
    pub n: u64,
    pub tiles: Vec<String>,
    #[serde(rename = "H")]
    pub horizontal: Vec<(String, String)>,
    #[serde(rename = "V")]
    pub vertical: Vec<(String, String)>,
}

impl TilingFile {
    pub fn into_instance(self) -> Result<TilingInstance> {
        let index = |name: &str, field: String| {
            self.tiles
                .iter()
                .position(|t| t == name)
                .ok_or_else(|| Error::parse(field, format!("unknown tile `{name}`")))
        };
        let relation = |pairs: &[(String, String)], key: &str| {
            pairs
                .iter()
                .enumerate()
                .map(|(k, (a, b))| Ok((index(a, format!("{key}[{k}][0]"))?, index(b, format!("{key}[{k}][1]"))?)))
                .collect::<Result<Vec<_>>>()
        };
        let h = relation(&self.horizontal, "H")?;
        let v = relation(&self.vertical, "V")?;
        TilingInstance::new(self.tiles.clone(), h, v, self.n)
    }

    pub fn from_instance(instance: &TilingInstance) -> Self {
        let names = |rel: &BTreeSet<(TileId, TileId)>| {
            rel.iter()
                .map(|&(a, b)| (instance.tiles[a].clone(), instance.tiles[b].clone()))
                .collect()
        };
        TilingFile {
            n: instance.n,
            tiles: instance.tiles.clone(),
            horizontal: names(&instance.horizontal),
            vertical: names(&instance.vertical),
        }
    }
}

pub fn parse_tiling_instance(text: &str) -> Result<TilingInstance> {
    let file: TilingFile = serde_json::from_str(text).map_err(|e| Error::parse("tiling", e))?;
    file.into_instance()
}

pub fn tiling_instance_to_json(instance: &TilingInstance) -> String {
    serde_json::to_string_pretty(&TilingFile::from_instance(instance)).expect("instance serializes")
}
