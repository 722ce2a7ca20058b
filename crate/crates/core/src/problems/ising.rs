use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Problem;
use crate::error::{Error, Result};

/// Row-major `height x width` grid of 0/1 pixels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinaryImage {
    pub height: usize,
    pub width: usize,
    pub pixels: Vec<u8>,
}

impl BinaryImage {
    pub fn new(height: usize, width: usize, pixels: Vec<u8>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidProblem("image must be non-empty".into()));
        }
        if pixels.len() != height * width {
            return Err(Error::DimensionMismatch { expected: height * width, got: pixels.len() });
        }
        if pixels.iter().any(|&p| p > 1) {
            return Err(Error::InvalidProblem("pixels must be 0 or 1".into()));
        }
        Ok(Self { height, width, pixels })
    }
}

/// Parse whitespace-separated PGM tokens, skipping `#` comments.
fn pgm_header(bytes: &[u8]) -> Result<(Vec<String>, usize)> {
    let mut tokens = Vec::new();
    let mut i = 0;
    while tokens.len() < 4 && i < bytes.len() {
        let c = bytes[i];
        if c == b'#' {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
        } else if c.is_ascii_whitespace() {
            i += 1;
        } else {
            let start = i;
            while i < bytes.len() && !bytes[i].is_ascii_whitespace() && bytes[i] != b'#' {
                i += 1;
            }
            tokens.push(String::from_utf8_lossy(&bytes[start..i]).into_owned());
        }
    }
    // exactly one whitespace byte separates the header from binary data
    Ok((tokens, i + 1))
}

/// Load an 8-bit grayscale PGM (`P2` or `P5`), mapping values `>= threshold`
/// to 1 and the rest to 0.
pub fn load_pgm(path: impl AsRef<Path>, threshold: u8) -> Result<BinaryImage> {
    let bytes = std::fs::read(path)?;
    let bad = |msg: &str| Error::InvalidProblem(format!("PGM: {msg}"));
    let (tokens, data_start) = pgm_header(&bytes)?;
    if tokens.len() < 4 {
        return Err(bad("truncated header"));
    }
    let magic = tokens[0].as_str();
    let parse = |s: &str| s.parse::<usize>().map_err(|_| bad("malformed header number"));
    let (width, height, maxval) = (parse(&tokens[1])?, parse(&tokens[2])?, parse(&tokens[3])?);
    if maxval == 0 || maxval > 255 {
        return Err(bad("only 8-bit images are supported"));
    }
    let n = width * height;
    let values: Vec<u8> = match magic {
        "P5" => {
            let data = bytes.get(data_start..data_start + n).ok_or_else(|| bad("truncated data"))?;
            data.to_vec()
        }
        "P2" => {
            let text = String::from_utf8_lossy(&bytes[data_start.min(bytes.len())..]);
            let vals: std::result::Result<Vec<u8>, _> = text
                .lines()
                .map(|l| l.split('#').next().unwrap_or(""))
                .flat_map(str::split_whitespace)
                .map(str::parse::<u8>)
                .collect();
            let vals = vals.map_err(|_| bad("malformed pixel value"))?;
            if vals.len() < n {
                return Err(bad("truncated data"));
            }
            vals[..n].to_vec()
        }
        _ => return Err(bad("unsupported magic number")),
    };
    let pixels = values.into_iter().map(|v| u8::from(v >= threshold)).collect();
    BinaryImage::new(height, width, pixels)
}

/// Load a plain-text grid of `0`/`1` characters, one row per line. Spaces
/// and commas between pixels are ignored.
pub fn load_text_grid(path: impl AsRef<Path>) -> Result<BinaryImage> {
    parse_text_grid(&std::fs::read_to_string(path)?)
}

pub(crate) fn parse_text_grid(text: &str) -> Result<BinaryImage> {
    let mut rows: Vec<Vec<u8>> = Vec::new();
    for line in text.lines() {
        let row: Vec<u8> = line
            .chars()
            .filter(|c| !c.is_whitespace() && *c != ',')
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::InvalidProblem(format!("unexpected character {other:?} in grid"))),
            })
            .collect::<Result<_>>()?;
        if !row.is_empty() {
            rows.push(row);
        }
    }
    let width = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != width) {
        return Err(Error::InvalidProblem("grid rows have different lengths".into()));
    }
    let height = rows.len();
    BinaryImage::new(height, width, rows.concat())
}

/// Integer sufficient statistics of the restoration posterior.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IsingStats {
    /// `#{i : x_i = y_i}`.
    pub matches: i64,
    /// Unordered 8-neighbour pairs with equal values.
    pub equal_pairs: i64,
}

/// Binary image restoration: `U(x) = -(a #{x_i = y_i} + b #{i~j : x_i = x_j})`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingRestoration {
    observed: BinaryImage,
    a: f64,
    b: f64,
    pair_weight: f64,
}

const OFFSETS: [(isize, isize); 8] =
    [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)];

impl IsingRestoration {
    /// `count_pairs_twice` counts each neighbouring pair once from each side,
    /// which doubles the effective `b`.
    pub fn new(observed: BinaryImage, a: f64, b: f64, count_pairs_twice: bool) -> Result<Self> {
        if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidProblem(format!("a and b must be positive, got a={a}, b={b}")));
        }
        let pair_weight = if count_pairs_twice { 2.0 * b } else { b };
        Ok(Self { observed, a, b, pair_weight })
    }

    pub fn observed(&self) -> &BinaryImage {
        &self.observed
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    fn neighbours(&self, site: usize) -> impl Iterator<Item = usize> + '_ {
        let (h, w) = (self.observed.height as isize, self.observed.width as isize);
        let (r, c) = ((site / self.observed.width) as isize, (site % self.observed.width) as isize);
        OFFSETS.iter().filter_map(move |&(dr, dc)| {
            let (rr, cc) = (r + dr, c + dc);
            (rr >= 0 && rr < h && cc >= 0 && cc < w).then(|| (rr * w + cc) as usize)
        })
    }

    pub fn neighbour_count(&self, site: usize) -> usize {
        self.neighbours(site).count()
    }

    pub fn stats(&self, x: &[u8]) -> IsingStats {
        let (h, w) = (self.observed.height, self.observed.width);
        let matches = x.iter().zip(&self.observed.pixels).filter(|(a, b)| a == b).count() as i64;
        let mut equal_pairs = 0i64;
        for r in 0..h {
            for c in 0..w {
                let v = x[r * w + c];
                // forward half of the neighbourhood: E, S, SE, SW
                if c + 1 < w && x[r * w + c + 1] == v {
                    equal_pairs += 1;
                }
                if r + 1 < h {
                    if x[(r + 1) * w + c] == v {
                        equal_pairs += 1;
                    }
                    if c + 1 < w && x[(r + 1) * w + c + 1] == v {
                        equal_pairs += 1;
                    }
                    if c > 0 && x[(r + 1) * w + c - 1] == v {
                        equal_pairs += 1;
                    }
                }
            }
        }
        IsingStats { matches, equal_pairs }
    }

    pub fn energy_from_stats(&self, s: IsingStats) -> f64 {
        -(self.a * s.matches as f64 + self.pair_weight * s.equal_pairs as f64)
    }

    /// Change of the statistics when pixel `site` is flipped.
    pub fn flip_stats_delta(&self, x: &[u8], site: usize) -> IsingStats {
        let v = x[site];
        let matches = if v == self.observed.pixels[site] { -1 } else { 1 };
        let equal_pairs = self.neighbours(site).map(|n| if x[n] == v { -1 } else { 1 }).sum();
        IsingStats { matches, equal_pairs }
    }
}

impl Problem for IsingRestoration {
    type Gene = u8;

    fn dim(&self) -> usize {
        self.observed.pixels.len()
    }

    fn energy(&self, x: &[u8]) -> f64 {
        self.energy_from_stats(self.stats(x))
    }

    fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<u8> {
        (0..self.dim()).map(|_| u8::from(rng.random::<bool>())).collect()
    }

    fn flip_delta(&self, x: &[u8], site: usize) -> Option<f64> {
        Some(self.energy_from_stats(self.flip_stats_delta(x, site)))
    }
}
