//! Minimal number of von Neumann measurements for rank-`r` states on C^{r+l}.

use serde::Serialize;

use crate::certify::threshold_settings;
use crate::error::{Error, Result};

/// Published `(l, r, lower, upper)` cells. Lower bounds are reference constants only.
pub const TABLE1_GOLDEN: [(usize, usize, usize, usize); 12] = [
    (5, 2, 6, 7),
    (6, 2, 6, 7),
    (7, 2, 7, 7),
    (7, 3, 9, 10),
    (8, 2, 7, 7),
    (8, 3, 9, 10),
    (9, 2, 7, 8),
    (9, 3, 9, 10),
    (9, 4, 12, 12),
    (10, 2, 7, 8),
    (10, 3, 10, 10),
    (10, 4, 12, 13),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Table1Cell {
    pub l: usize,
    pub rank: usize,
    pub n: usize,
    pub lower: usize,
    pub upper: usize,
    pub expected_upper: usize,
}

impl Table1Cell {
    pub fn matches(&self) -> bool {
        self.upper == self.expected_upper
    }
}

/// Recomputes `⌈(4r(n−r) − 1)/(n − 1)⌉` with `n = r + l` for every golden cell.
pub fn table1_reproduce() -> Result<Vec<Table1Cell>> {
    TABLE1_GOLDEN
        .iter()
        .map(|&(l, rank, lower, expected_upper)| {
            let n = rank + l;
            let upper = threshold_settings(n, rank, n)?;
            Ok(Table1Cell { l, rank, n, lower, upper, expected_upper })
        })
        .collect()
}

/// Like [`table1_reproduce`] but fails on the first mismatching cell.
pub fn table1_checked() -> Result<Vec<Table1Cell>> {
    let cells = table1_reproduce()?;
    if let Some(c) = cells.iter().find(|c| !c.matches()) {
        return Err(Error::Contract(format!(
            "cell (l={}, rank {}) computed {} but the table lists {}",
            c.l, c.rank, c.upper, c.expected_upper
        )));
    }
    Ok(cells)
}

/// Aligned text rendering with `lower/upper` cells; mismatches are starred.
pub fn render_table1(cells: &[Table1Cell]) -> String {
    let ranks = [2, 3, 4];
    let mut out = format!("{:>4}", "l");
    for r in ranks {
        out.push_str(&format!("{:>10}", format!("rank {r}")));
    }
    out.push('\n');
    for l in 5..=10 {
        out.push_str(&format!("{l:>4}"));
        for r in ranks {
            let text = cells
                .iter()
                .find(|c| c.l == l && c.rank == r)
                .map_or(String::new(), |c| format!("{}/{}{}", c.lower, c.upper, if c.matches() { "" } else { "*" }));
            out.push_str(&format!("{text:>10}"));
        }
        out.push('\n');
    }
    out
}
