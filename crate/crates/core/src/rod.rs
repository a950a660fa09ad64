//! Rod data sets: the orbit-space boundary data of a toric 4-manifold.
//!
//! The z-axis of the half-plane orbit space splits into closed intervals
//! (axis rods), each carrying an integer pair (the rod structure) that spans
//! the kernel of the torus fiber metric there. The ordered collection of
//! rods and structures encodes the topology of the total space.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Integer pair spanning the degenerating torus direction on one rod.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RodStructure {
    pub v1: i64,
    pub v2: i64,
}

impl RodStructure {
    pub fn new(v1: i64, v2: i64) -> Self {
        RodStructure { v1, v2 }
    }

    /// Components relatively prime and not both zero.
    pub fn is_valid(&self) -> bool {
        !(self.v1 == 0 && self.v2 == 0) && gcd(self.v1.unsigned_abs(), self.v2.unsigned_abs()) == 1
    }

    /// Same kernel direction (equal up to overall sign).
    pub fn parallel_to(&self, other: &RodStructure) -> bool {
        self.v1 * other.v2 - self.v2 * other.v1 == 0
    }

    /// Sign-normalized representative: first nonzero component positive.
    pub fn normalized_sign(&self) -> RodStructure {
        if self.v1 < 0 || (self.v1 == 0 && self.v2 < 0) {
            RodStructure { v1: -self.v1, v2: -self.v2 }
        } else {
            *self
        }
    }

    /// Image under a basis change B acting on column vectors.
    pub fn transform(&self, b: &BasisChange) -> RodStructure {
        RodStructure {
            v1: b.m[0][0] * self.v1 + b.m[0][1] * self.v2,
            v2: b.m[1][0] * self.v1 + b.m[1][1] * self.v2,
        }
    }
}

impl fmt::Display for RodStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.v1, self.v2)
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Integer 2x2 matrix with determinant +-1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BasisChange {
    pub m: [[i64; 2]; 2],
}

impl BasisChange {
    pub fn new(m: [[i64; 2]; 2]) -> Result<Self> {
        let d = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        if d.abs() != 1 {
            return Err(Error::InvalidRodData(format!("basis change has det {d}, need +-1")));
        }
        Ok(BasisChange { m })
    }

    pub fn det(&self) -> i64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// Unimodular matrix sending the coprime pair v to (1, 0).
    pub fn normalizing(v: &RodStructure) -> Result<Self> {
        if !v.is_valid() {
            return Err(Error::InvalidRodData(format!("cannot normalize non-coprime {v}")));
        }
        let (x, y) = bezout(v.v1, v.v2);
        // [[x, y], [-v2, v1]] maps (v1, v2) to (x v1 + y v2, 0) = (1, 0).
        BasisChange::new([[x, y], [-v.v2, v.v1]])
    }
}

/// (x, y) with a x + b y = gcd(a, b), for gcd = 1 inputs.
fn bezout(a: i64, b: i64) -> (i64, i64) {
    let (mut r0, mut r1) = (a, b);
    let (mut s0, mut s1) = (1i64, 0i64);
    let (mut t0, mut t1) = (0i64, 1i64);
    while r1 != 0 {
        let q = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 < 0 {
        (-s0, -t0)
    } else {
        (s0, t0)
    }
}

/// Admissibility at a corner: |det of the adjacent structures| = 1.
pub fn corner_admissible(a: &RodStructure, b: &RodStructure) -> bool {
    (a.v1 * b.v2 - a.v2 * b.v1).abs() == 1
}

/// Ordered axis rods with their structures.
///
/// Rod n covers [z_{n-1}, z_n] with z_0 = -inf and z_{N+1} = +inf; there is
/// always one more rod than turning points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RodDataSet {
    pub turning_points: Vec<f64>,
    pub rods: Vec<RodStructure>,
}

impl RodDataSet {
    pub fn new(turning_points: Vec<f64>, rods: Vec<RodStructure>) -> Self {
        RodDataSet { turning_points, rods }
    }

    pub fn rod_count(&self) -> usize {
        self.rods.len()
    }

    /// Interval covered by rod `n`, with symbolic infinite endpoints.
    pub fn rod_interval(&self, n: usize) -> (f64, f64) {
        let lo = if n == 0 { f64::NEG_INFINITY } else { self.turning_points[n - 1] };
        let hi = if n == self.turning_points.len() {
            f64::INFINITY
        } else {
            self.turning_points[n]
        };
        (lo, hi)
    }

    /// Indices of rods with finite extent.
    pub fn finite_rods(&self) -> Vec<usize> {
        (1..self.rods.len().saturating_sub(1)).collect()
    }

    pub fn first_structure(&self) -> &RodStructure {
        &self.rods[0]
    }

    pub fn last_structure(&self) -> &RodStructure {
        self.rods.last().unwrap()
    }

    /// Apply one unimodular basis change to every rod structure.
    pub fn transform(&self, b: &BasisChange) -> RodDataSet {
        RodDataSet {
            turning_points: self.turning_points.clone(),
            rods: self.rods.iter().map(|v| v.transform(b)).collect(),
        }
    }

    pub fn validate(&self) -> ValidationReport {
        validate_rod_data(self)
    }

    /// Write as `v1 v2 z_end` lines, `inf` on the final rod.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (n, rod) in self.rods.iter().enumerate() {
            if n < self.turning_points.len() {
                out.push_str(&format!("{} {} {}\n", rod.v1, rod.v2, self.turning_points[n]));
            } else {
                out.push_str(&format!("{} {} inf\n", rod.v1, rod.v2));
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut rods = Vec::new();
        let mut turning_points = Vec::new();
        let mut saw_inf = false;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(Error::Parse(format!(
                    "rod file line {}: expected `v1 v2 z_end`, got {:?}",
                    lineno + 1,
                    raw
                )));
            }
            let v1: i64 = parts[0]
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: bad v1 {:?}", lineno + 1, parts[0])))?;
            let v2: i64 = parts[1]
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: bad v2 {:?}", lineno + 1, parts[1])))?;
            rods.push(RodStructure::new(v1, v2));
            if parts[2] == "inf" {
                saw_inf = true;
            } else {
                if saw_inf {
                    return Err(Error::Parse(format!(
                        "line {}: rod after the final (inf) rod",
                        lineno + 1
                    )));
                }
                let z: f64 = parts[2].parse().map_err(|_| {
                    Error::Parse(format!("line {}: bad z_end {:?}", lineno + 1, parts[2]))
                })?;
                turning_points.push(z);
            }
        }
        if rods.is_empty() {
            return Err(Error::Parse("rod file has no rods".into()));
        }
        if !saw_inf {
            return Err(Error::Parse("final rod must end at inf".into()));
        }
        Ok(RodDataSet { turning_points, rods })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        Ok(std::fs::write(path, self.to_text())?)
    }
}

/// A single invariant violation, tagged with the offending rod or corner.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum RodViolation {
    /// Rod structure components not coprime or both zero.
    BadStructure { rod: usize },
    /// Turning points not strictly increasing at this corner.
    Ordering { corner: usize },
    /// Adjacent structures proportional (no genuine corner).
    NotDistinct { corner: usize },
    /// Corner determinant not +-1.
    NotAdmissible { corner: usize },
    /// Rod count does not match turning-point count.
    CountMismatch { rods: usize, turning_points: usize },
}

impl fmt::Display for RodViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RodViolation::BadStructure { rod } => {
                write!(f, "rod {rod}: components must be coprime and not both zero")
            }
            RodViolation::Ordering { corner } => {
                write!(f, "corner {corner}: turning points must be strictly increasing")
            }
            RodViolation::NotDistinct { corner } => {
                write!(f, "corner {corner}: adjacent rod structures are proportional")
            }
            RodViolation::NotAdmissible { corner } => {
                write!(f, "corner {corner}: determinant condition |det| = 1 fails")
            }
            RodViolation::CountMismatch { rods, turning_points } => {
                write!(f, "{rods} rods require {} turning points, found {turning_points}", rods - 1)
            }
        }
    }
}

/// Full list of violated invariants; empty iff the data set is valid.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<RodViolation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check every invariant of a rod data set; report-style, never errors.
pub fn validate_rod_data(r: &RodDataSet) -> ValidationReport {
    let mut violations = Vec::new();
    if r.rods.is_empty() || r.rods.len() != r.turning_points.len() + 1 {
        violations.push(RodViolation::CountMismatch {
            rods: r.rods.len(),
            turning_points: r.turning_points.len(),
        });
    }
    for (n, rod) in r.rods.iter().enumerate() {
        if !rod.is_valid() {
            violations.push(RodViolation::BadStructure { rod: n });
        }
    }
    for c in 1..r.turning_points.len() {
        if !(r.turning_points[c - 1] < r.turning_points[c]) {
            violations.push(RodViolation::Ordering { corner: c });
        }
    }
    let corners = r.rods.len().saturating_sub(1).min(r.turning_points.len());
    for c in 0..corners {
        let (a, b) = (&r.rods[c], &r.rods[c + 1]);
        if a.parallel_to(b) {
            violations.push(RodViolation::NotDistinct { corner: c });
        } else if !corner_admissible(a, b) {
            violations.push(RodViolation::NotAdmissible { corner: c });
        }
    }
    ValidationReport { violations }
}

/// Topology of the radial cross-section at infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CrossSection {
    /// S^1 x S^2 (asymptotically flat ends).
    S1xS2,
    /// Lens space L(p, q); L(1, 1) is the 3-sphere.
    Lens { p: u64, q: u64 },
}

impl fmt::Display for CrossSection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CrossSection::S1xS2 => write!(f, "S1xS2"),
            CrossSection::Lens { p, q } => write!(f, "L({p},{q})"),
        }
    }
}

/// Classify the asymptotic cross-section from the semi-infinite structures.
///
/// The first structure is brought to (1, 0) by a unimodular change of torus
/// basis; the image (x, y) of the last structure then decides between
/// S^1 x S^2 (y = 0) and the lens space L(|y|, x mod |y|).
pub fn asymptotic_topology(r: &RodDataSet) -> Result<CrossSection> {
    if r.rods.len() < 2 {
        return Err(Error::InvalidRodData("need two semi-infinite rods".into()));
    }
    let first = r.first_structure();
    let last = r.last_structure();
    if !first.is_valid() || !last.is_valid() {
        return Err(Error::InvalidRodData(
            "semi-infinite structures must be coprime pairs".into(),
        ));
    }
    let b = BasisChange::normalizing(first)?;
    let image = last.transform(&b).normalized_sign();
    let (x, y) = (image.v1, image.v2);
    if y == 0 {
        // Coprimality forces x = +-1.
        Ok(CrossSection::S1xS2)
    } else {
        let p = y.unsigned_abs();
        let q = if p == 1 {
            1
        } else {
            (x.rem_euclid(y.abs())) as u64
        };
        Ok(CrossSection::Lens { p, q })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eguchi_hanson_set() -> RodDataSet {
        RodDataSet::new(
            vec![-0.25, 0.25],
            vec![RodStructure::new(0, 1), RodStructure::new(1, 0), RodStructure::new(2, -1)],
        )
    }

    #[test]
    fn admissibility_examples() {
        // Eguchi-Hanson corner.
        assert!(corner_admissible(&RodStructure::new(0, 1), &RodStructure::new(1, 0)));
        // Degenerate determinant.
        assert!(!corner_admissible(&RodStructure::new(1, 0), &RodStructure::new(1, 0)));
        // det = -1.
        assert!(corner_admissible(&RodStructure::new(1, 0), &RodStructure::new(2, -1)));
    }

    #[test]
    fn admissibility_is_symmetric() {
        let pairs = [((0, 1), (1, 0)), ((1, 0), (2, -1)), ((3, 2), (1, 1)), ((1, 0), (5, 2))];
        for ((a1, a2), (b1, b2)) in pairs {
            let a = RodStructure::new(a1, a2);
            let b = RodStructure::new(b1, b2);
            assert_eq!(corner_admissible(&a, &b), corner_admissible(&b, &a));
        }
    }

    #[test]
    fn validates_eguchi_hanson() {
        assert!(eguchi_hanson_set().validate().is_valid());
    }

    #[test]
    fn validates_reissner_nordstrom() {
        let r = RodDataSet::new(
            vec![-1.0, 1.0],
            vec![RodStructure::new(1, 0), RodStructure::new(0, 1), RodStructure::new(1, 0)],
        );
        assert!(r.validate().is_valid());
    }

    #[test]
    fn reports_ordering_violation() {
        let r = RodDataSet::new(
            vec![1.0, 1.0],
            vec![RodStructure::new(1, 0), RodStructure::new(0, 1), RodStructure::new(1, 0)],
        );
        let report = r.validate();
        assert!(report.violations.contains(&RodViolation::Ordering { corner: 1 }));
    }

    #[test]
    fn reports_coprimality_violation() {
        let r = RodDataSet::new(vec![0.0], vec![RodStructure::new(2, 4), RodStructure::new(1, 0)]);
        let report = r.validate();
        assert!(report.violations.contains(&RodViolation::BadStructure { rod: 0 }));
    }

    #[test]
    fn validation_depends_only_on_content() {
        let r = eguchi_hanson_set();
        assert_eq!(r.validate(), r.validate());
        assert_eq!(r.clone().validate(), r.validate());
    }

    #[test]
    fn topology_s1xs2() {
        let r = RodDataSet::new(
            vec![-1.0, 1.0],
            vec![RodStructure::new(1, 0), RodStructure::new(0, 1), RodStructure::new(1, 0)],
        );
        assert_eq!(asymptotic_topology(&r).unwrap(), CrossSection::S1xS2);
    }

    #[test]
    fn topology_lens_space() {
        let r = RodDataSet::new(
            vec![0.0],
            vec![RodStructure::new(1, 0), RodStructure::new(2, 5)],
        );
        assert_eq!(asymptotic_topology(&r).unwrap(), CrossSection::Lens { p: 5, q: 2 });
    }

    #[test]
    fn topology_three_sphere() {
        let r = RodDataSet::new(
            vec![0.0],
            vec![RodStructure::new(1, 0), RodStructure::new(-1, 1)],
        );
        assert_eq!(asymptotic_topology(&r).unwrap(), CrossSection::Lens { p: 1, q: 1 });
    }

    #[test]
    fn topology_eguchi_hanson_is_l21() {
        assert_eq!(
            asymptotic_topology(&eguchi_hanson_set()).unwrap(),
            CrossSection::Lens { p: 2, q: 1 }
        );
    }

    #[test]
    fn topology_invariant_under_basis_change() {
        let r = eguchi_hanson_set();
        let before = asymptotic_topology(&r).unwrap();
        for m in [[[1, 1], [0, 1]], [[2, 1], [1, 1]], [[0, 1], [-1, 0]], [[1, 0], [-3, 1]]] {
            let b = BasisChange::new(m).unwrap();
            assert_eq!(asymptotic_topology(&r.transform(&b)).unwrap(), before);
        }
    }

    #[test]
    fn topology_rejects_non_coprime() {
        let r = RodDataSet::new(vec![0.0], vec![RodStructure::new(2, 4), RodStructure::new(1, 0)]);
        assert!(asymptotic_topology(&r).is_err());
    }

    #[test]
    fn text_roundtrip_is_exact() {
        let r = RodDataSet::new(
            vec![-0.1 + 0.2 * f64::EPSILON, 0.7231892737219873],
            vec![RodStructure::new(1, 0), RodStructure::new(0, 1), RodStructure::new(1, -1)],
        );
        let text = r.to_text();
        let back = RodDataSet::from_text(&text).unwrap();
        assert_eq!(back, r);
        // Bit-exact turning points.
        for (a, b) in r.turning_points.iter().zip(back.turning_points.iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn normalizing_basis_change() {
        for (a, b) in [(3, 5), (-2, 7), (0, 1), (1, 0), (-5, -8), (17, -6)] {
            let v = RodStructure::new(a, b);
            let bc = BasisChange::normalizing(&v).unwrap();
            assert_eq!(v.transform(&bc), RodStructure::new(1, 0));
        }
    }
}
