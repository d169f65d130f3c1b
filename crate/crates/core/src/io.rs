//! Layout documents, best-known radius tables and layout verification.
//!
//! A layout document is line-oriented UTF-8 text:
//!
//! ```text
//! # circlepack layout
//! n=2
//! radius=2.000000000000
//! energy=0.000000000000
//! feasible=true
//! seed=1
//! producer=circlepack solve
//! -1.000000000000 0.000000000000
//! 1.000000000000 0.000000000000
//! ```
//!
//! Numbers are written in plain decimal notation with at least twelve
//! digits after the point, and with as many more as needed to read back the
//! exact same `f64`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::energy::{container_depth, pair_depth, total_energy};
use crate::error::IoError;
use crate::layout::{Centers, Layout};

pub const DEFAULT_VERIFY_TOLERANCE: f64 = 1e-9;

/// Formats `v` in non-scientific decimal that parses back to the same bits.
pub fn format_decimal(v: f64) -> String {
    let fixed = format!("{v:.12}");
    if fixed.parse::<f64>().ok() == Some(v) {
        fixed
    } else {
        // Rust's `Display` for floats is the shortest round-trip form and
        // never switches to exponent notation.
        let s = format!("{v}");
        if s.contains('.') {
            s
        } else {
            format!("{s}.0")
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayoutDocument {
    /// Circle count declared in the header.
    pub n: usize,
    pub radius: f64,
    pub centers: Vec<[f64; 2]>,
    pub energy: f64,
    pub feasible: bool,
    pub seed: Option<u64>,
    pub producer: String,
}

impl LayoutDocument {
    pub fn from_layout(layout: &Layout, seed: Option<u64>, producer: impl Into<String>) -> Self {
        let energy = total_energy(layout);
        Self {
            n: layout.n(),
            radius: layout.radius(),
            centers: layout.centers().points().collect(),
            energy: energy.total,
            feasible: energy.is_feasible(),
            seed,
            producer: producer.into(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("# circlepack layout\n");
        let _ = writeln!(out, "n={}", self.n);
        let _ = writeln!(out, "radius={}", format_decimal(self.radius));
        let _ = writeln!(out, "energy={}", format_decimal(self.energy));
        let _ = writeln!(out, "feasible={}", self.feasible);
        if let Some(seed) = self.seed {
            let _ = writeln!(out, "seed={seed}");
        }
        let _ = writeln!(out, "producer={}", self.producer.replace('\n', " "));
        for [x, y] in &self.centers {
            let _ = writeln!(out, "{} {}", format_decimal(*x), format_decimal(*y));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, IoError> {
        let mut n = None;
        let mut radius = None;
        let mut energy = None;
        let mut feasible = None;
        let mut seed = None;
        let mut producer = String::new();
        let mut centers = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some((key, value)) = line.split_once('=') {
                if !centers.is_empty() {
                    return Err(IoError::parse(line_no, "header line after coordinates"));
                }
                let value = value.trim();
                match key.trim() {
                    "n" => n = Some(parse_num::<usize>(value, line_no, "n")?),
                    "radius" => radius = Some(parse_num::<f64>(value, line_no, "radius")?),
                    "energy" => energy = Some(parse_num::<f64>(value, line_no, "energy")?),
                    "feasible" => feasible = Some(parse_num::<bool>(value, line_no, "feasible")?),
                    "seed" => seed = Some(parse_num::<u64>(value, line_no, "seed")?),
                    "producer" => producer = value.to_string(),
                    other => return Err(IoError::parse(line_no, format!("unknown header `{other}`"))),
                }
                continue;
            }
            let mut fields = line.split_whitespace();
            let (Some(x), Some(y), None) = (fields.next(), fields.next(), fields.next()) else {
                return Err(IoError::parse(line_no, "expected `x y`"));
            };
            let x = parse_num::<f64>(x, line_no, "x")?;
            let y = parse_num::<f64>(y, line_no, "y")?;
            if !x.is_finite() || !y.is_finite() {
                return Err(IoError::parse(line_no, "non-finite coordinate"));
            }
            centers.push([x, y]);
        }

        let missing = |what: &str| IoError::Structure(format!("missing `{what}` header"));
        Ok(Self {
            n: n.ok_or_else(|| missing("n"))?,
            radius: radius.ok_or_else(|| missing("radius"))?,
            centers,
            energy: energy.ok_or_else(|| missing("energy"))?,
            feasible: feasible.ok_or_else(|| missing("feasible"))?,
            seed,
            producer,
        })
    }

    /// Builds the layout, rejecting a header/body count mismatch.
    pub fn to_layout(&self) -> Result<Layout, IoError> {
        self.check_structure()?;
        Ok(Layout::new(Centers::from_points(&self.centers)?, self.radius)?)
    }

    fn check_structure(&self) -> Result<(), IoError> {
        if self.n != self.centers.len() {
            return Err(IoError::Structure(format!(
                "header declares n={} but {} centers follow",
                self.n,
                self.centers.len()
            )));
        }
        if self.n == 0 {
            return Err(IoError::Structure("no circles".into()));
        }
        Ok(())
    }

    pub fn read_from(path: &Path) -> Result<Self, IoError> {
        let text = std::fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn write_to(&self, path: &Path) -> Result<(), IoError> {
        std::fs::write(path, self.to_text()).map_err(|e| IoError::io(path, e))
    }
}

fn parse_num<T: std::str::FromStr>(s: &str, line: usize, what: &str) -> Result<T, IoError> {
    s.parse()
        .map_err(|_| IoError::parse(line, format!("invalid {what} `{s}`")))
}

/// Writes `layout` to `path` and returns the document that was written.
pub fn write_layout(
    layout: &Layout,
    seed: Option<u64>,
    producer: &str,
    path: &Path,
) -> Result<LayoutDocument, IoError> {
    let doc = LayoutDocument::from_layout(layout, seed, producer);
    doc.write_to(path)?;
    Ok(doc)
}

/// Best-known container radius per circle count.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BestKnownTable {
    entries: BTreeMap<usize, f64>,
}

const VENDORED_BEST_KNOWN: &str = include_str!("../data/best_known.csv");

impl BestKnownTable {
    /// Parses CSV with the header `n,radius`. Rows may come in any order;
    /// duplicate `n` and radii that decrease with `n` are rejected.
    pub fn parse(text: &str) -> Result<Self, IoError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        match lines.next() {
            Some((_, header)) if header.trim().replace(' ', "") == "n,radius" => {}
            Some((i, _)) => return Err(IoError::parse(i + 1, "expected header `n,radius`")),
            None => return Err(IoError::parse(1, "empty table")),
        }
        let mut entries = BTreeMap::new();
        for (idx, line) in lines {
            let line_no = idx + 1;
            let mut fields = line.split(',').map(str::trim);
            let (Some(n), Some(r), None) = (fields.next(), fields.next(), fields.next()) else {
                return Err(IoError::parse(line_no, "expected `n,radius`"));
            };
            let n: usize = parse_num(n, line_no, "n")?;
            let r: f64 = parse_num(r, line_no, "radius")?;
            if n == 0 {
                return Err(IoError::parse(line_no, "n must be positive"));
            }
            if !r.is_finite() || r < 1.0 {
                return Err(IoError::parse(line_no, format!("radius {r} is below 1")));
            }
            if entries.insert(n, r).is_some() {
                return Err(IoError::Validation(format!("duplicate entry for n={n}")));
            }
        }
        let table = Self { entries };
        table.validate()?;
        Ok(table)
    }

    fn validate(&self) -> Result<(), IoError> {
        // Best-known radii can tie (n = 6, 7 and n = 18, 19 share optima),
        // so the order is non-decreasing rather than strict.
        for ((n0, r0), (n1, r1)) in self.entries.iter().zip(self.entries.iter().skip(1)) {
            if r1 < r0 {
                return Err(IoError::Validation(format!(
                    "radius for n={n1} ({r1}) is smaller than for n={n0} ({r0})"
                )));
            }
        }
        Ok(())
    }

    pub fn read_from(path: &Path) -> Result<Self, IoError> {
        let text = std::fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
        Self::parse(&text)
    }

    /// The table shipped with the crate (n = 1..=100).
    pub fn vendored() -> Self {
        Self::parse(VENDORED_BEST_KNOWN).expect("vendored table is valid")
    }

    pub fn get(&self, n: usize) -> Option<f64> {
        self.entries.get(&n).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries.iter().map(|(&n, &r)| (n, r))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// A previously best-known radius and the improved radius that replaced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImprovedRadius {
    pub n: usize,
    pub previous: f64,
    pub improved: f64,
    /// Printed order of magnitude of the improvement, as a power of ten.
    pub magnitude_exponent: i32,
}

impl ImprovedRadius {
    pub fn improvement(&self) -> f64 {
        self.previous - self.improved
    }
}

const VENDORED_IMPROVED: &str = include_str!("../data/improved_radii.csv");

/// Parses CSV `n,previous,improved,magnitude_exponent`.
pub fn parse_improved_radii(text: &str) -> Result<Vec<ImprovedRadius>, IoError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == "n,previous,improved,magnitude_exponent" => {}
        Some((i, _)) => {
            return Err(IoError::parse(
                i + 1,
                "expected header `n,previous,improved,magnitude_exponent`",
            ))
        }
        None => return Err(IoError::parse(1, "empty table")),
    }
    lines
        .map(|(idx, line)| {
            let line_no = idx + 1;
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if f.len() != 4 {
                return Err(IoError::parse(line_no, "expected four fields"));
            }
            Ok(ImprovedRadius {
                n: parse_num(f[0], line_no, "n")?,
                previous: parse_num(f[1], line_no, "previous")?,
                improved: parse_num(f[2], line_no, "improved")?,
                magnitude_exponent: parse_num(f[3], line_no, "magnitude_exponent")?,
            })
        })
        .collect()
}

pub fn vendored_improved_radii() -> Vec<ImprovedRadius> {
    parse_improved_radii(VENDORED_IMPROVED).expect("vendored improvements are valid")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Violation {
    Container { circle: usize, depth: f64 },
    Pair { a: usize, b: usize, depth: f64 },
}

impl Violation {
    pub fn depth(&self) -> f64 {
        match *self {
            Violation::Container { depth, .. } | Violation::Pair { depth, .. } => depth,
        }
    }
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::Container { circle, depth } => {
                write!(f, "container: circle {circle} protrudes by {depth:.3e}")
            }
            Violation::Pair { a, b, depth } => {
                write!(f, "pair: circles {a} and {b} overlap by {depth:.3e}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    /// Every positive overlap, whether or not it exceeds the tolerance.
    pub violations: Vec<Violation>,
    pub max_depth: f64,
    pub tolerance: f64,
}

impl Verdict {
    pub fn pass(&self) -> bool {
        self.max_depth <= self.tolerance
    }

    /// Violations deeper than the tolerance.
    pub fn failing(&self) -> impl Iterator<Item = &Violation> {
        self.violations.iter().filter(move |v| v.depth() > self.tolerance)
    }
}

/// Checks every container and pair constraint of `doc` directly.
pub fn verify_layout(doc: &LayoutDocument, tolerance: f64) -> Result<Verdict, IoError> {
    doc.check_structure()?;
    let mut violations = Vec::new();
    for (i, &c) in doc.centers.iter().enumerate() {
        let depth = container_depth(c, doc.radius);
        if depth > 0.0 {
            violations.push(Violation::Container { circle: i, depth });
        }
    }
    for (a, &ca) in doc.centers.iter().enumerate() {
        for (b, &cb) in doc.centers.iter().enumerate().skip(a + 1) {
            let depth = pair_depth(ca, cb);
            if depth > 0.0 {
                violations.push(Violation::Pair { a, b, depth });
            }
        }
    }
    let max_depth = violations.iter().map(Violation::depth).fold(0.0, f64::max);
    Ok(Verdict {
        violations,
        max_depth,
        tolerance,
    })
}
