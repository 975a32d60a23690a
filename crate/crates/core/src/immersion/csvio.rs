//! CSV persistence: one row per node with the grid multi-index and chart coordinates.
//!
//! Columns: `node,i0,…,i{n-1},re_z0,im_z0,…`. Grid dimensions are recovered from
//! the largest multi-index; chart and twists are supplied on load.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read, Write};
use std::sync::Arc;

use super::{Grid, GridImmersion};
use crate::error::{GeomError, Result};
use crate::kahler::KahlerChart;
use crate::{CVec, C64};

pub fn save_csv(imm: &GridImmersion, mut out: impl Write) -> Result<()> {
    let n = imm.dim();
    let m = imm.chart().dim();
    let mut s = String::from("node");
    for a in 0..n {
        write!(s, ",i{a}").unwrap();
    }
    for k in 0..m {
        write!(s, ",re_z{k},im_z{k}").unwrap();
    }
    s.push('\n');
    for (node, p) in imm.points().iter().enumerate() {
        write!(s, "{node}").unwrap();
        for i in imm.grid().multi_index(node) {
            write!(s, ",{i}").unwrap();
        }
        for z in p.iter() {
            write!(s, ",{:e},{:e}", z.re, z.im).unwrap();
        }
        s.push('\n');
    }
    out.write_all(s.as_bytes())?;
    Ok(())
}

pub fn load_csv(input: impl Read, chart: Arc<KahlerChart>, twists: Vec<Option<usize>>) -> Result<GridImmersion> {
    let bad = |line: usize, msg: &str| GeomError::Config { line, key: "csv".into(), message: msg.into() };
    let mut lines = BufReader::new(input).lines();
    let header = lines.next().ok_or_else(|| bad(1, "empty file"))??;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    let n = cols.iter().filter(|c| c.starts_with('i') && c[1..].parse::<usize>().is_ok()).count();
    let m = cols.iter().filter(|c| c.starts_with("re_z")).count();
    if cols.first() != Some(&"node") || cols.len() != 1 + n + 2 * m {
        return Err(bad(1, "unexpected header"));
    }
    let mut rows: Vec<(Vec<usize>, CVec)> = Vec::new();
    for (k, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != cols.len() {
            return Err(bad(k + 2, "wrong number of fields"));
        }
        let idx = f[1..=n].iter().map(|x| x.parse::<usize>()).collect::<std::result::Result<Vec<_>, _>>();
        let idx = idx.map_err(|_| bad(k + 2, "bad index"))?;
        let vals = f[1 + n..].iter().map(|x| x.parse::<f64>()).collect::<std::result::Result<Vec<_>, _>>();
        let vals = vals.map_err(|_| bad(k + 2, "bad coordinate"))?;
        let p = CVec::from_fn(m, |j, _| C64::new(vals[2 * j], vals[2 * j + 1]));
        rows.push((idx, p));
    }
    let dims: Vec<usize> = (0..n).map(|a| rows.iter().map(|r| r.0[a] + 1).max().unwrap_or(0)).collect();
    let grid = Grid::new(&dims);
    if rows.len() != grid.len() {
        return Err(bad(0, "rows do not fill the grid"));
    }
    let mut points = vec![CVec::zeros(m); grid.len()];
    for (idx, p) in rows {
        points[grid.index(&idx)] = p;
    }
    GridImmersion::new(chart, &dims, points, twists)
}
