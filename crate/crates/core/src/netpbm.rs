//! Plain-text PBM (P1) and PGM (P2) images of matrices and grid sets.
//!
//! A matrix becomes a P1 bitmap, one pixel per entry, `1` drawn black.
//! A [`DyadicSet`] becomes one pixel per grid cell with the top image row
//! holding the highest band. When every cell is full or empty (`K = 0`) the
//! set is written as P1; otherwise as P2 with grey level
//! `round(255 · w / 2^K)`. A `# xsection N=.. K=..` comment records the grid
//! so the set can be read back; grey levels only invert exactly for
//! `K ≤ 7`.

use thiserror::Error;

use crate::discrete::BinaryMatrix;
use crate::plane::{DyadicSet, GridParams};

pub const PGM_MAXVAL: u32 = 255;

/// Largest `K` whose grey levels decode to a unique fill width.
pub const MAX_INVERTIBLE_SUB: u32 = 7;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetpbmError {
    #[error("malformed image: {0}")]
    Malformed(String),
    #[error("unsupported image: {0}")]
    Unsupported(String),
    #[error("image does not describe a grid set: {0}")]
    NotAGrid(String),
}

fn malformed(msg: impl Into<String>) -> NetpbmError {
    NetpbmError::Malformed(msg.into())
}

struct Header {
    magic: String,
    width: usize,
    height: usize,
    maxval: u32,
    comments: Vec<String>,
    raster: Vec<String>,
}

/// Splits an image into header fields, comments and raster tokens.
fn parse(text: &str) -> Result<Header, NetpbmError> {
    let mut comments = Vec::new();
    let mut tokens = Vec::new();
    for line in text.lines() {
        let (body, comment) = match line.find('#') {
            Some(i) => (&line[..i], Some(line[i + 1..].trim())),
            None => (line, None),
        };
        tokens.extend(body.split_whitespace().map(str::to_string));
        if let Some(c) = comment {
            comments.push(c.to_string());
        }
    }
    let mut it = tokens.into_iter();
    let magic = it.next().ok_or_else(|| malformed("empty file"))?;
    let mut number = |what: &str| -> Result<usize, NetpbmError> {
        it.next()
            .ok_or_else(|| malformed(format!("missing {what}")))?
            .parse()
            .map_err(|_| malformed(format!("bad {what}")))
    };
    let width = number("width")?;
    let height = number("height")?;
    let maxval = match magic.as_str() {
        "P1" => 1,
        "P2" => {
            let m = number("maxval")?;
            if m == 0 || m > 65535 {
                return Err(malformed(format!("maxval {m}")));
            }
            m as u32
        }
        other => return Err(NetpbmError::Unsupported(format!("magic `{other}`"))),
    };
    Ok(Header { magic, width, height, maxval, comments, raster: it.collect() })
}

/// Raster samples in reading order. P1 digits need not be separated.
fn samples(h: &Header) -> Result<Vec<u32>, NetpbmError> {
    let expected = h.width * h.height;
    let out: Vec<u32> = if h.magic == "P1" {
        h.raster
            .iter()
            .flat_map(|t| t.chars())
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(malformed(format!("bad bit `{c}`"))),
            })
            .collect::<Result<_, _>>()?
    } else {
        h.raster
            .iter()
            .map(|t| t.parse::<u32>().map_err(|_| malformed(format!("bad sample `{t}`"))))
            .collect::<Result<_, _>>()?
    };
    if out.len() != expected {
        return Err(malformed(format!("expected {expected} samples, found {}", out.len())));
    }
    if let Some(s) = out.iter().find(|&&s| s > h.maxval) {
        return Err(malformed(format!("sample {s} exceeds maxval {}", h.maxval)));
    }
    Ok(out)
}

fn write_rows(out: &mut String, rows: impl Iterator<Item = Vec<String>>) {
    for row in rows {
        out.push_str(&row.join(" "));
        out.push('\n');
    }
}

pub fn matrix_to_pbm(m: &BinaryMatrix) -> String {
    let mut out = format!("P1\n{} {}\n", m.cols(), m.rows());
    write_rows(
        &mut out,
        (0..m.rows()).map(|r| (0..m.cols()).map(|c| if m.get(r, c) { "1" } else { "0" }.to_string()).collect()),
    );
    out
}

pub fn matrix_from_pbm(text: &str) -> Result<BinaryMatrix, NetpbmError> {
    let h = parse(text)?;
    if h.magic != "P1" {
        return Err(NetpbmError::Unsupported("matrices are stored as P1".into()));
    }
    let bits = samples(&h)?;
    let mut m = BinaryMatrix::zeros(h.height, h.width);
    for (i, &b) in bits.iter().enumerate() {
        m.set(i / h.width.max(1), i % h.width.max(1), b == 1);
    }
    Ok(m)
}

/// `round(255 · w / 2^K)` with halves rounded up.
pub fn grey_level(fill: u32, sub: u32) -> u32 {
    let scaled = 2 * PGM_MAXVAL as u64 * fill as u64;
    let den = 1u64 << (sub + 1);
    ((scaled + den / 2) / den) as u32
}

fn grid_comment(params: GridParams) -> String {
    format!("# xsection N={} K={}\n", params.depth(), params.sub())
}

pub fn set_to_netpbm(set: &DyadicSet) -> String {
    let params = set.params();
    let side = params.side();
    let rows = (0..side).rev();
    if params.sub() == 0 {
        let mut out = format!("P1\n{}{side} {side}\n", grid_comment(params));
        write_rows(&mut out, rows.map(|r| (0..side).map(|c| set.fill(r, c).to_string()).collect()));
        out
    } else {
        let mut out = format!("P2\n{}{side} {side}\n{PGM_MAXVAL}\n", grid_comment(params));
        write_rows(
            &mut out,
            rows.map(|r| (0..side).map(|c| grey_level(set.fill(r, c), params.sub()).to_string()).collect()),
        );
        out
    }
}

fn grid_from_comments(comments: &[String]) -> Option<(u32, u32)> {
    comments.iter().find_map(|c| {
        let rest = c.strip_prefix("xsection")?;
        let mut depth = None;
        let mut sub = None;
        for field in rest.split_whitespace() {
            match field.split_once('=')? {
                ("N", v) => depth = v.parse().ok(),
                ("K", v) => sub = v.parse().ok(),
                _ => {}
            }
        }
        Some((depth?, sub?))
    })
}

/// Reads a set written by [`set_to_netpbm`]. A P1 image without the grid
/// comment is taken as `K = 0` with `N` from its side length.
pub fn set_from_netpbm(text: &str) -> Result<DyadicSet, NetpbmError> {
    let h = parse(text)?;
    if h.width != h.height || !h.width.is_power_of_two() {
        return Err(NetpbmError::NotAGrid(format!("{}x{} is not a square of side 2^N", h.width, h.height)));
    }
    let side_exp = h.width.trailing_zeros();
    let (depth, sub) = match (grid_from_comments(&h.comments), h.magic.as_str()) {
        (Some(grid), _) => grid,
        (None, "P1") => (side_exp, 0),
        (None, _) => return Err(NetpbmError::NotAGrid("missing `xsection N=.. K=..` comment".into())),
    };
    if depth != side_exp {
        return Err(NetpbmError::NotAGrid(format!("N={depth} but side is {}", h.width)));
    }
    let params = GridParams::new(depth, sub).map_err(|e| NetpbmError::NotAGrid(e.to_string()))?;
    let pixels = samples(&h)?;
    let decode: Box<dyn Fn(u32) -> Result<u32, NetpbmError>> = match h.magic.as_str() {
        "P1" if sub == 0 => Box::new(Ok),
        "P2" if sub <= MAX_INVERTIBLE_SUB => {
            if h.maxval != PGM_MAXVAL {
                return Err(NetpbmError::NotAGrid(format!("maxval {} (expected {PGM_MAXVAL})", h.maxval)));
            }
            let table: Vec<u32> = (0..=params.capacity()).map(|w| grey_level(w, sub)).collect();
            Box::new(move |p| {
                table
                    .iter()
                    .position(|&g| g == p)
                    .map(|w| w as u32)
                    .ok_or_else(|| NetpbmError::NotAGrid(format!("grey level {p} is not a fill of K={sub}")))
            })
        }
        "P2" => {
            return Err(NetpbmError::Unsupported(format!(
                "grey levels cannot encode K={sub} exactly (at most K={MAX_INVERTIBLE_SUB})"
            )))
        }
        _ => return Err(NetpbmError::NotAGrid(format!("{} image for K={sub}", h.magic))),
    };
    let side = params.side();
    let mut fills = vec![0; side * side];
    for (i, &p) in pixels.iter().enumerate() {
        // image rows run top-down, set rows bottom-up
        let row = side - 1 - i / side;
        fills[row * side + i % side] = decode(p)?;
    }
    DyadicSet::from_fills(params, fills).map_err(|e| NetpbmError::NotAGrid(e.to_string()))
}
