//! One Kraus component of an eavesdropper's attack on a block.
//!
//! Entry `a(row, col)` sends `|D_col⟩ ↦ Σ_row a(row, col) |D_row⟩`, the usual
//! matrix-on-column-vector convention. Indices in the public API are 1-based.
//!
//! # File format
//!
//! Attack matrices are stored as JSON documents:
//!
//! ```json
//! {
//!   "n": 2,
//!   "entries": [
//!     [0.0, 0.0], [1.0, 0.0],
//!     [1.0, 0.0], [0.0, 0.0]
//!   ]
//! }
//! ```
//!
//! `entries` lists the n² matrix entries row-major as `[re, im]` pairs, so the
//! 1-based entry `a(r, c)` is pair number `(r − 1)·n + (c − 1)`. Unknown
//! fields, a wrong entry count and non-finite numbers are rejected.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{domain, Error, Result};
use crate::state::{LinearOperator, ModeBasis, C64};

/// Tolerance on the largest singular value for a matrix to count as a
/// physical (trace non-increasing) Kraus component.
pub const PHYSICAL_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct AttackMatrix {
    entries: DMatrix<C64>,
}

impl AttackMatrix {
    pub fn new(entries: DMatrix<C64>) -> Result<Self> {
        let n = entries.nrows();
        if entries.ncols() != n {
            return Err(domain(format!(
                "attack matrix must be square, got {}x{}",
                n,
                entries.ncols()
            )));
        }
        if n < 2 {
            return Err(domain(format!("attack matrix dimension must be at least 2, got {n}")));
        }
        if entries.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(domain("attack matrix contains non-finite entries"));
        }
        Ok(Self { entries })
    }

    /// Builds from a function of 1-based `(row, col)`.
    ///
    /// # Panics
    /// Panics if `n < 2` or `f` returns a non-finite value.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        Self::new(DMatrix::from_fn(n, n, |r, c| f(r + 1, c + 1))).expect("valid attack matrix")
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |r, c| if r == c { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
    }

    pub fn zeros(n: usize) -> Self {
        Self::from_fn(n, |_, _| C64::new(0.0, 0.0))
    }

    /// Permutation exchanging pulses `D_a` and `D_b`, all others fixed.
    pub fn swap(n: usize, a: usize, b: usize) -> Result<Self> {
        if n < 2 || !(1..=n).contains(&a) || !(1..=n).contains(&b) {
            return Err(domain(format!("cannot swap pulses {a} and {b} in a block of {n}")));
        }
        let perm = |k: usize| if k == a { b } else if k == b { a } else { k };
        Ok(Self::from_fn(n, |r, c| {
            if r == perm(c) {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        }))
    }

    pub fn diagonal(values: &[C64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(values)))
    }

    /// Unpacks `2n²` reals laid out row-major as interleaved `(re, im)`.
    pub fn from_params(n: usize, params: &[f64]) -> Result<Self> {
        if params.len() != 2 * n * n {
            return Err(domain(format!(
                "expected {} parameters for n={n}, got {}",
                2 * n * n,
                params.len()
            )));
        }
        Self::new(DMatrix::from_fn(n, n, |r, c| {
            let i = 2 * (r * n + c);
            C64::new(params[i], params[i + 1])
        }))
    }

    /// Inverse of [`AttackMatrix::from_params`].
    pub fn to_params(&self) -> Vec<f64> {
        let n = self.n();
        let mut out = Vec::with_capacity(2 * n * n);
        for r in 0..n {
            for c in 0..n {
                let z = self.entries[(r, c)];
                out.push(z.re);
                out.push(z.im);
            }
        }
        out
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    /// Entry `a(row, col)` with 1-based indices.
    #[inline]
    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[(row - 1, col - 1)]
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn frobenius_norm_sqr(&self) -> f64 {
        self.entries.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn scaled(&self, c: C64) -> Self {
        Self {
            entries: &self.entries * c,
        }
    }

    /// Rescaled to unit Frobenius norm; `None` for the zero matrix.
    pub fn normalized(&self) -> Option<Self> {
        let norm = self.frobenius_norm_sqr().sqrt();
        (norm > 0.0).then(|| self.scaled(C64::new(1.0 / norm, 0.0)))
    }

    pub fn largest_singular_value(&self) -> f64 {
        self.entries
            .singular_values()
            .iter()
            .copied()
            .fold(0.0, f64::max)
    }

    /// Largest singular value ≤ 1 + [`PHYSICAL_TOL`].
    pub fn is_physical(&self) -> bool {
        self.largest_singular_value() <= 1.0 + PHYSICAL_TOL
    }

    pub fn require_physical(&self) -> Result<()> {
        let s = self.largest_singular_value();
        if s > 1.0 + PHYSICAL_TOL {
            return Err(Error::Config(format!(
                "attack matrix is not a contraction (largest singular value {s})"
            )));
        }
        Ok(())
    }

    /// The matrix as an operator on the input mode basis.
    pub fn as_operator(&self) -> Result<LinearOperator> {
        let basis = ModeBasis::input(self.n())?;
        LinearOperator::new(basis, basis, self.entries.clone())
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Document {
            n: usize,
            entries: Vec<[f64; 2]>,
        }

        let doc: Document = serde_json::from_str(text).map_err(|e| Error::Parse {
            location: format!("line {}, column {}", e.line(), e.column()),
            message: e.to_string(),
        })?;
        let field_err = |message: String| Error::Parse {
            location: "field `entries`".into(),
            message,
        };
        if doc.n < 2 {
            return Err(Error::Parse {
                location: "field `n`".into(),
                message: format!("block length must be at least 2, got {}", doc.n),
            });
        }
        if doc.entries.len() != doc.n * doc.n {
            return Err(field_err(format!(
                "expected {} [re, im] pairs for a square {}x{} matrix, found {}",
                doc.n * doc.n,
                doc.n,
                doc.n,
                doc.entries.len()
            )));
        }
        if let Some(i) = doc
            .entries
            .iter()
            .position(|[re, im]| !re.is_finite() || !im.is_finite())
        {
            return Err(field_err(format!(
                "entry ({}, {}) is not finite",
                i / doc.n + 1,
                i % doc.n + 1
            )));
        }
        let flat: Vec<f64> = doc.entries.iter().flatten().copied().collect();
        Self::from_params(doc.n, &flat)
    }

    /// Canonical JSON rendering, one matrix row per line. Floats use the
    /// shortest representation that round-trips.
    pub fn to_json_string(&self) -> String {
        self.to_json_indented(0)
    }

    pub(crate) fn to_json_indented(&self, indent: usize) -> String {
        let pad = " ".repeat(indent);
        let n = self.n();
        let mut s = String::new();
        let _ = writeln!(s, "{{");
        let _ = writeln!(s, "{pad}  \"n\": {n},");
        let _ = writeln!(s, "{pad}  \"entries\": [");
        for r in 1..=n {
            let row: Vec<String> = (1..=n)
                .map(|c| {
                    let z = self.get(r, c);
                    format!("[{:?}, {:?}]", z.re, z.im)
                })
                .collect();
            let sep = if r < n { "," } else { "" };
            let _ = writeln!(s, "{pad}    {}{sep}", row.join(", "));
        }
        let _ = writeln!(s, "{pad}  ]");
        let _ = write!(s, "{pad}}}");
        s
    }

    pub fn read_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn write_file(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = self.to_json_string();
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }
}

/// Serializes to the same schema as the attack file format.
impl Serialize for AttackMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let params = self.to_params();
        let entries: Vec<[f64; 2]> = params.chunks(2).map(|p| [p[0], p[1]]).collect();
        let mut s = serializer.serialize_struct("AttackMatrix", 2)?;
        s.serialize_field("n", &self.n())?;
        s.serialize_field("entries", &entries)?;
        s.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn swap_follows_column_convention() {
        let s = AttackMatrix::swap(3, 1, 2).unwrap();
        assert_eq!(s.get(2, 1), C64::new(1.0, 0.0));
        assert_eq!(s.get(1, 2), C64::new(1.0, 0.0));
        assert_eq!(s.get(3, 3), C64::new(1.0, 0.0));
        assert_eq!(s.get(1, 1), C64::new(0.0, 0.0));
    }

    #[test]
    fn rejects_non_square_and_non_finite() {
        assert!(AttackMatrix::new(DMatrix::zeros(2, 3)).is_err());
        let mut m = DMatrix::<C64>::identity(3, 3);
        m[(1, 2)] = C64::new(f64::NAN, 0.0);
        assert!(AttackMatrix::new(m).is_err());
    }

    #[test]
    fn physicality() {
        assert!(AttackMatrix::identity(4).is_physical());
        assert!(AttackMatrix::swap(4, 1, 3).unwrap().is_physical());
        assert!(!AttackMatrix::identity(3).scaled(C64::new(1.1, 0.0)).is_physical());
        let s = AttackMatrix::from_fn(2, |r, c| C64::new((r * c) as f64, 0.0)).largest_singular_value();
        // [[1,2],[2,4]] has rank one with singular value 5.
        assert!((s - 5.0).abs() < 1e-12);
    }

    #[test]
    fn parse_rejects_nan_literal() {
        let text = "{\"n\": 2, \"entries\": [[1, 0], [0, 0], [0, 0], [NaN, 0]]}";
        match AttackMatrix::from_json_str(text) {
            Err(Error::Parse { location, .. }) => assert!(location.starts_with("line 1")),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn parse_rejects_wrong_entry_count() {
        let text = "{\"n\": 3, \"entries\": [[1, 0], [0, 0], [0, 0], [1, 0]]}";
        match AttackMatrix::from_json_str(text) {
            Err(Error::Parse { location, message }) => {
                assert_eq!(location, "field `entries`");
                assert!(message.contains("expected 9"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn parse_rejects_unknown_fields_and_overflow() {
        assert!(AttackMatrix::from_json_str("{\"n\": 2, \"entries\": [], \"x\": 1}").is_err());
        let text = "{\"n\": 2, \"entries\": [[1e999, 0], [0, 0], [0, 0], [1, 0]]}";
        assert!(matches!(AttackMatrix::from_json_str(text), Err(Error::Parse { .. })));
    }

    #[test]
    fn parse_reads_row_major() {
        let text = r#"{
            "n": 2,
            "entries": [[0.0, 0.0], [2.0, -1.0],
                        [3.0, 0.5], [0.0, 0.0]]
        }"#;
        let e = AttackMatrix::from_json_str(text).unwrap();
        assert_eq!(e.get(1, 2), C64::new(2.0, -1.0));
        assert_eq!(e.get(2, 1), C64::new(3.0, 0.5));
    }

    proptest! {
        #[test]
        fn json_round_trip_is_exact(
            n in 2usize..6,
            seed in proptest::collection::vec(-1e3f64..1e3, 72),
        ) {
            let e = AttackMatrix::from_params(n, &seed[..2 * n * n]).unwrap();
            let back = AttackMatrix::from_json_str(&e.to_json_string()).unwrap();
            prop_assert_eq!(back, e);
        }
    }
}
