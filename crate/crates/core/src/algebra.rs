//! Cayley-Dickson algebras up to the sedenions, with the octonions (level 3) as
//! the working algebra of every geometric module.
//!
//! The product is the doubling formula
//! `(x₁,x₂)·(y₁,y₂) = (x₁y₁ − ȳ₂x₂, y₂x₁ + x₂ȳ₁)` with real multiplication at
//! level 0 and `conj(x₁,x₂) = (x̄₁, −x₂)`. The 8×8 basis product table is
//! generated from the recursion at first use — never transcribed by hand — and
//! the fast `[f64; 8]` path multiplies through that table.

use std::fmt;
use std::sync::OnceLock;

use serde::de::{SeqAccess, Visitor};
use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

/// Highest supported Cayley-Dickson level. Level 4 (sedenions) is included as a
/// negative-control algebra where the norm law fails; geometry uses level 3 only.
pub const MAX_LEVEL: u32 = 4;

/// Tolerance used by unit/imaginary preconditions of the algebra operations.
const PRE_TOL: f64 = 1e-9;

/// An element of the Cayley-Dickson algebra at some level n, stored as its
/// 2ⁿ real coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct CDElement {
    level: u32,
    coords: Vec<f64>,
}

impl CDElement {
    pub fn new(level: u32, coords: Vec<f64>) -> Result<Self> {
        if level > MAX_LEVEL {
            return Err(Error::LevelTooLarge(level));
        }
        if coords.len() != 1usize << level {
            return Err(Error::BadCoordinateLength { len: coords.len() });
        }
        Ok(CDElement { level, coords })
    }

    /// Rebuild from a flat coordinate vector; the level is inferred from the length.
    pub fn from_coords(coords: Vec<f64>) -> Result<Self> {
        let len = coords.len();
        if !len.is_power_of_two() {
            return Err(Error::BadCoordinateLength { len });
        }
        let level = len.trailing_zeros();
        Self::new(level, coords)
    }

    pub fn zero(level: u32) -> Self {
        CDElement {
            level,
            coords: vec![0.0; 1 << level],
        }
    }

    pub fn one(level: u32) -> Self {
        let mut e = Self::zero(level);
        e.coords[0] = 1.0;
        e
    }

    /// The basis unit e_i at the given level (e_0 is the neutral element).
    pub fn basis(level: u32, i: usize) -> Self {
        let mut e = Self::zero(level);
        e.coords[i] = 1.0;
        e
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Scalar (real) part of the element.
    pub fn re(&self) -> f64 {
        self.coords[0]
    }

    /// Imaginary part: the element with its real coordinate removed.
    pub fn im(&self) -> Self {
        let mut c = self.coords.clone();
        c[0] = 0.0;
        CDElement {
            level: self.level,
            coords: c,
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        CDElement {
            level: self.level,
            coords: self.coords.iter().map(|c| c * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_level(other)?;
        Ok(CDElement {
            level: self.level,
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_level(other)?;
        Ok(CDElement {
            level: self.level,
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn inner(&self, other: &Self) -> Result<f64> {
        self.check_level(other)?;
        Ok(self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a * b)
            .sum())
    }

    fn check_level(&self, other: &Self) -> Result<()> {
        if self.level != other.level {
            return Err(Error::LevelMismatch {
                left: self.level,
                right: other.level,
            });
        }
        Ok(())
    }
}

impl fmt::Display for CDElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CD{}{:?}", self.level, self.coords)
    }
}

impl Serialize for CDElement {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.coords.len()))?;
        for c in &self.coords {
            seq.serialize_element(c)?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for CDElement {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct CoordsVisitor;
        impl<'de> Visitor<'de> for CoordsVisitor {
            type Value = CDElement;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                write!(f, "a flat array of 2^n numbers")
            }
            fn visit_seq<A: SeqAccess<'de>>(
                self,
                mut seq: A,
            ) -> std::result::Result<CDElement, A::Error> {
                let mut coords = Vec::new();
                while let Some(c) = seq.next_element::<f64>()? {
                    coords.push(c);
                }
                CDElement::from_coords(coords).map_err(serde::de::Error::custom)
            }
        }
        deserializer.deserialize_seq(CoordsVisitor)
    }
}

fn mul_rec(x: &[f64], y: &[f64], out: &mut [f64]) {
    let n = x.len();
    if n == 1 {
        out[0] = x[0] * y[0];
        return;
    }
    let h = n / 2;
    let (x1, x2) = x.split_at(h);
    let (y1, y2) = y.split_at(h);
    let conj = |v: &[f64]| -> Vec<f64> {
        let mut c = v.to_vec();
        for item in c.iter_mut().skip(1) {
            *item = -*item;
        }
        c
    };
    let mut t = vec![0.0; h];

    // first half: x₁y₁ − ȳ₂x₂
    mul_rec(x1, y1, &mut out[..h]);
    mul_rec(&conj(y2), x2, &mut t);
    for i in 0..h {
        out[i] -= t[i];
    }
    // second half: y₂x₁ + x₂ȳ₁
    mul_rec(y2, x1, &mut out[h..]);
    mul_rec(x2, &conj(y1), &mut t);
    for i in 0..h {
        out[h + i] += t[i];
    }
}

/// Cayley-Dickson product of two elements of the same level.
pub fn cd_multiply(x: &CDElement, y: &CDElement) -> Result<CDElement> {
    x.check_level(y)?;
    let mut out = vec![0.0; x.coords.len()];
    mul_rec(&x.coords, &y.coords, &mut out);
    Ok(CDElement {
        level: x.level,
        coords: out,
    })
}

/// Conjugation: fixes the real coordinate, negates every other one.
pub fn cd_conjugate(x: &CDElement) -> CDElement {
    let mut c = x.coords.clone();
    for item in c.iter_mut().skip(1) {
        *item = -*item;
    }
    CDElement {
        level: x.level,
        coords: c,
    }
}

/// Multiplicative inverse `conj(x)/‖x‖²`; fails on (numerically) zero elements.
pub fn cd_inverse(x: &CDElement) -> Result<CDElement> {
    let n = x.norm();
    if n < 1e-300 {
        return Err(Error::ZeroInverse { norm: n });
    }
    Ok(cd_conjugate(x).scale(1.0 / (n * n)))
}

/// Translation of a tangent vector of the 7-sphere to the tangent space at the
/// neutral element: `Γ_x(v) = x⁻¹·v` for unit x (so `x⁻¹ = conj(x)`).
pub fn gamma_map(x: &CDElement, v: &CDElement) -> Result<CDElement> {
    let n = x.norm();
    if (n - 1.0).abs() > PRE_TOL {
        return Err(Error::NotUnit { norm: n });
    }
    cd_multiply(&cd_conjugate(x), v)
}

/// The rotational vector field `V(x) = x·v` attached to a purely imaginary v;
/// tangent to the unit sphere at every unit x.
pub fn killing_field(v: &CDElement, x: &CDElement) -> Result<CDElement> {
    if v.re().abs() > PRE_TOL {
        return Err(Error::NotImaginary { re: v.re() });
    }
    let n = x.norm();
    if (n - 1.0).abs() > PRE_TOL {
        return Err(Error::NotUnit { norm: n });
    }
    cd_multiply(x, v)
}

// ---------------------------------------------------------------------------
// Generated octonion basis table and the fast fixed-size path
// ---------------------------------------------------------------------------

/// Structure constants of the octonions: `e_i·e_j = sign[i][j]·e_{index[i][j]}`.
#[derive(Debug)]
pub struct BasisTable {
    pub sign: [[i8; 8]; 8],
    pub index: [[u8; 8]; 8],
}

static BASIS_TABLE: OnceLock<BasisTable> = OnceLock::new();

/// The level-3 basis product table, generated from the recursion on first use.
pub fn basis_table() -> &'static BasisTable {
    BASIS_TABLE.get_or_init(|| {
        let mut sign = [[0i8; 8]; 8];
        let mut index = [[0u8; 8]; 8];
        for i in 0..8 {
            for j in 0..8 {
                let p = cd_multiply(&CDElement::basis(3, i), &CDElement::basis(3, j))
                    .expect("levels match");
                let mut hits = 0;
                for (c, &v) in p.coords().iter().enumerate() {
                    if v != 0.0 {
                        hits += 1;
                        sign[i][j] = if v > 0.0 { 1 } else { -1 };
                        index[i][j] = c as u8;
                    }
                }
                assert_eq!(hits, 1, "basis product e_{i}·e_{j} is not a signed unit");
            }
        }
        BasisTable { sign, index }
    })
}

/// Gather form of the basis table: for an output component c and a left index
/// i there is exactly one right index j with e_i·e_j ∝ e_c, so the product is
/// `out[c] = Σ_i gather_sign[c][i]·a[i]·b[gather_j[c][i]]` — a branch-free
/// inner loop for the fixed-size path.
struct GatherTable {
    sign: [[f64; 8]; 8],
    j: [[u8; 8]; 8],
}

static GATHER_TABLE: OnceLock<GatherTable> = OnceLock::new();

fn gather_table() -> &'static GatherTable {
    GATHER_TABLE.get_or_init(|| {
        let t = basis_table();
        let mut sign = [[0.0f64; 8]; 8];
        let mut j = [[0u8; 8]; 8];
        for i in 0..8 {
            for jj in 0..8 {
                let c = t.index[i][jj] as usize;
                sign[c][i] = t.sign[i][jj] as f64;
                j[c][i] = jj as u8;
            }
        }
        GatherTable { sign, j }
    })
}

/// Octonion product on fixed-size arrays via the generated table.
pub fn oct_mul(a: &[f64; 8], b: &[f64; 8]) -> [f64; 8] {
    let t = gather_table();
    let mut out = [0.0; 8];
    for c in 0..8 {
        let signs = &t.sign[c];
        let js = &t.j[c];
        let mut acc = 0.0;
        for i in 0..8 {
            acc += signs[i] * a[i] * b[(js[i] & 7) as usize];
        }
        out[c] = acc;
    }
    out
}

pub fn oct_conj(a: &[f64; 8]) -> [f64; 8] {
    let mut c = *a;
    for item in c.iter_mut().skip(1) {
        *item = -*item;
    }
    c
}

/// 8×8 matrix of a left or right octonion translation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TranslationKind {
    Left,
    Right,
}

#[derive(Debug, Clone)]
pub struct TranslationMatrix {
    pub kind: TranslationKind,
    pub base: CDElement,
    /// Row-major matrix with `entries·v = base·v` (left) or `v·base` (right).
    pub entries: [[f64; 8]; 8],
}

impl TranslationMatrix {
    pub fn new(kind: TranslationKind, base: &CDElement) -> Result<Self> {
        if base.level() != 3 {
            return Err(Error::Domain(format!(
                "translation matrices are defined for level 3, got level {}",
                base.level()
            )));
        }
        let mut entries = [[0.0; 8]; 8];
        for c in 0..8 {
            let ec = CDElement::basis(3, c);
            let col = match kind {
                TranslationKind::Left => cd_multiply(base, &ec)?,
                TranslationKind::Right => cd_multiply(&ec, base)?,
            };
            for r in 0..8 {
                entries[r][c] = col.coords()[r];
            }
        }
        Ok(TranslationMatrix {
            kind,
            base: base.clone(),
            entries,
        })
    }

    pub fn left(base: &CDElement) -> Result<Self> {
        Self::new(TranslationKind::Left, base)
    }

    pub fn right(base: &CDElement) -> Result<Self> {
        Self::new(TranslationKind::Right, base)
    }

    pub fn apply(&self, v: &[f64; 8]) -> [f64; 8] {
        let mut out = [0.0; 8];
        for r in 0..8 {
            for c in 0..8 {
                out[r] += self.entries[r][c] * v[c];
            }
        }
        out
    }
}

/// Search the sedenions for a zero divisor of the shape `(e_a+e_b)·(e_c−e_d) = 0`.
/// Returns the first witness in lexicographic order.
pub fn sedenion_zero_divisor() -> Option<(usize, usize, usize, usize)> {
    for a in 1..16 {
        for b in (a + 1)..16 {
            let x = CDElement::basis(4, a).add(&CDElement::basis(4, b)).unwrap();
            for c in 1..16 {
                for d in (c + 1)..16 {
                    let y = CDElement::basis(4, c).sub(&CDElement::basis(4, d)).unwrap();
                    let p = cd_multiply(&x, &y).unwrap();
                    if p.norm() < 1e-12 {
                        return Some((a, b, c, d));
                    }
                }
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_element(rng: &mut ChaCha8Rng, level: u32) -> CDElement {
        let coords = (0..1usize << level)
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        CDElement::from_coords(coords).unwrap()
    }

    #[test]
    fn neutral_element_all_levels() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for level in 0..=MAX_LEVEL {
            let x = random_element(&mut rng, level);
            let one = CDElement::one(level);
            assert_eq!(cd_multiply(&one, &x).unwrap(), x);
            assert_eq!(cd_multiply(&x, &one).unwrap(), x);
        }
    }

    #[test]
    fn complex_unit_squares_to_minus_one() {
        // one recursion step of the doubling formula
        let i = CDElement::basis(1, 1);
        let p = cd_multiply(&i, &i).unwrap();
        assert_eq!(p.coords(), &[-1.0, 0.0]);
    }

    #[test]
    fn level_mismatch_rejected() {
        let x = CDElement::one(2);
        let y = CDElement::one(3);
        assert!(matches!(
            cd_multiply(&x, &y),
            Err(Error::LevelMismatch { left: 2, right: 3 })
        ));
    }

    #[test]
    fn norm_multiplicative_on_octonions() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10_000 {
            let x = random_element(&mut rng, 3);
            let y = random_element(&mut rng, 3);
            let p = cd_multiply(&x, &y).unwrap();
            assert!((p.norm() - x.norm() * y.norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn non_associativity_witness() {
        // (e₁·e₂)·e₄ vs e₁·(e₂·e₄), both sides evaluated by the recursion
        let e1 = CDElement::basis(3, 1);
        let e2 = CDElement::basis(3, 2);
        let e4 = CDElement::basis(3, 4);
        let lhs = cd_multiply(&cd_multiply(&e1, &e2).unwrap(), &e4).unwrap();
        let rhs = cd_multiply(&e1, &cd_multiply(&e2, &e4).unwrap()).unwrap();
        assert!(lhs.sub(&rhs).unwrap().norm() > 1.0);
        assert_eq!(lhs.coords(), CDElement::basis(3, 7).coords());
        assert_eq!(rhs.coords(), CDElement::basis(3, 7).scale(-1.0).coords());
    }

    #[test]
    fn conjugation_examples() {
        assert_eq!(cd_conjugate(&CDElement::one(3)), CDElement::one(3));
        for i in 1..8 {
            let e = CDElement::basis(3, i);
            assert_eq!(cd_conjugate(&e), e.scale(-1.0));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = random_element(&mut rng, 3);
        let p = cd_multiply(&x, &cd_conjugate(&x)).unwrap();
        assert!((p.coords()[0] - x.norm() * x.norm()).abs() < 1e-12);
        for &c in &p.coords()[1..] {
            assert!(c.abs() < 1e-12);
        }
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(cd_inverse(&CDElement::one(3)).unwrap(), CDElement::one(3));

        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut u = random_element(&mut rng, 3);
        u = u.scale(1.0 / u.norm());
        let inv = cd_inverse(&u).unwrap();
        assert!(inv.sub(&cd_conjugate(&u)).unwrap().norm() < 1e-12);

        let x = u.scale(2.0);
        assert!((cd_inverse(&x).unwrap().norm() - 0.5).abs() < 1e-12);

        assert!(matches!(
            cd_inverse(&CDElement::zero(3)),
            Err(Error::ZeroInverse { .. })
        ));
    }

    #[test]
    fn gamma_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let v = random_element(&mut rng, 3);
        assert!(
            gamma_map(&CDElement::one(3), &v)
                .unwrap()
                .sub(&v)
                .unwrap()
                .norm()
                .abs()
                < 1e-15
        );

        // Γ_x(x) = 1 for unit x
        let e1 = CDElement::basis(3, 1);
        let g = gamma_map(&e1, &e1).unwrap();
        assert!(g.sub(&CDElement::one(3)).unwrap().norm() < 1e-15);

        // v ⊥ x, both unit ⇒ Γ_x(v) has no real part
        for _ in 0..100 {
            let mut x = random_element(&mut rng, 3);
            x = x.scale(1.0 / x.norm());
            let mut v = random_element(&mut rng, 3);
            let proj = v.inner(&x).unwrap();
            v = v.sub(&x.scale(proj)).unwrap();
            v = v.scale(1.0 / v.norm());
            let g = gamma_map(&x, &v).unwrap();
            assert!(g.re().abs() < 1e-12);
            assert!((g.norm() - 1.0).abs() < 1e-12);
        }

        assert!(matches!(
            gamma_map(&CDElement::basis(3, 1).scale(2.0), &v),
            Err(Error::NotUnit { .. })
        ));
    }

    #[test]
    fn killing_field_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let v = random_element(&mut rng, 3).im();
        assert_eq!(killing_field(&v, &CDElement::one(3)).unwrap(), v);

        for _ in 0..100 {
            let mut x = random_element(&mut rng, 3);
            x = x.scale(1.0 / x.norm());
            let val = killing_field(&v, &x).unwrap();
            assert!((val.norm() - v.norm()).abs() < 1e-12);
            assert!(val.inner(&x).unwrap().abs() < 1e-12);
        }

        assert!(matches!(
            killing_field(&CDElement::one(3), &CDElement::one(3)),
            Err(Error::NotImaginary { .. })
        ));
    }

    #[test]
    fn division_laws_on_octonions() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let x = random_element(&mut rng, 3);
            if x.norm() < 1e-3 {
                continue;
            }
            let y = random_element(&mut rng, 3);
            let xinv = cd_inverse(&x).unwrap();
            let a = cd_multiply(&xinv, &y).unwrap();
            let b = cd_multiply(&y, &xinv).unwrap();
            assert!(cd_multiply(&x, &a).unwrap().sub(&y).unwrap().norm() < 1e-10);
            assert!(cd_multiply(&b, &x).unwrap().sub(&y).unwrap().norm() < 1e-10);
        }
    }

    #[test]
    fn alternativity_holds_at_level_3() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..1000 {
            let x = random_element(&mut rng, 3);
            let y = random_element(&mut rng, 3);
            let xx = cd_multiply(&x, &x).unwrap();
            let left = cd_multiply(&x, &cd_multiply(&x, &y).unwrap()).unwrap();
            assert!(left.sub(&cd_multiply(&xx, &y).unwrap()).unwrap().norm() < 1e-12);
            let right = cd_multiply(&cd_multiply(&y, &x).unwrap(), &x).unwrap();
            assert!(right.sub(&cd_multiply(&y, &xx).unwrap()).unwrap().norm() < 1e-12);
        }
    }

    #[test]
    fn alternativity_fails_at_level_4() {
        // documented non-invariant of the sedenions; find a basis witness
        let mut worst = 0.0f64;
        'outer: for a in 1..16 {
            for b in (a + 1)..16 {
                for c in 1..16 {
                    let x = CDElement::basis(4, a).add(&CDElement::basis(4, b)).unwrap();
                    let y = CDElement::basis(4, c);
                    let xx = cd_multiply(&x, &x).unwrap();
                    let lhs = cd_multiply(&x, &cd_multiply(&x, &y).unwrap()).unwrap();
                    let rhs = cd_multiply(&xx, &y).unwrap();
                    worst = worst.max(lhs.sub(&rhs).unwrap().norm());
                    if worst > 0.5 {
                        break 'outer;
                    }
                }
            }
        }
        assert!(worst > 0.5, "sedenions unexpectedly alternative");
    }

    #[test]
    fn sedenion_zero_divisor_exists() {
        let (a, b, c, d) = sedenion_zero_divisor().expect("sedenions have zero divisors");
        let x = CDElement::basis(4, a).add(&CDElement::basis(4, b)).unwrap();
        let y = CDElement::basis(4, c).sub(&CDElement::basis(4, d)).unwrap();
        let p = cd_multiply(&x, &y).unwrap();
        assert!(p.norm() < 1e-12);
        // both factors have norm √2, so the norm law fails here
        assert!((x.norm() * y.norm() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn basis_table_matches_recursion() {
        let t = basis_table();
        for i in 0..8 {
            for j in 0..8 {
                let p = cd_multiply(&CDElement::basis(3, i), &CDElement::basis(3, j)).unwrap();
                let mut expect = [0.0f64; 8];
                expect[t.index[i][j] as usize] = t.sign[i][j] as f64;
                assert_eq!(p.coords(), &expect);
            }
        }
    }

    #[test]
    fn fast_octonion_product_matches_recursion() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let x = random_element(&mut rng, 3);
            let y = random_element(&mut rng, 3);
            let slow = cd_multiply(&x, &y).unwrap();
            let mut a = [0.0; 8];
            let mut b = [0.0; 8];
            a.copy_from_slice(x.coords());
            b.copy_from_slice(y.coords());
            let fast = oct_mul(&a, &b);
            for i in 0..8 {
                assert!((fast[i] - slow.coords()[i]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn translation_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let mut x = random_element(&mut rng, 3);
        x = x.scale(1.0 / x.norm());

        let l = TranslationMatrix::left(&x).unwrap();
        let r = TranslationMatrix::right(&x).unwrap();
        // entries·v = x·v / v·x
        for _ in 0..20 {
            let v = random_element(&mut rng, 3);
            let mut va = [0.0; 8];
            va.copy_from_slice(v.coords());
            let lv = l.apply(&va);
            let rv = r.apply(&va);
            let lref = cd_multiply(&x, &v).unwrap();
            let rref = cd_multiply(&v, &x).unwrap();
            for i in 0..8 {
                assert!((lv[i] - lref.coords()[i]).abs() < 1e-12);
                assert!((rv[i] - rref.coords()[i]).abs() < 1e-12);
            }
        }
        // orthogonal for unit base: MᵀM = I
        for m in [&l, &r] {
            for i in 0..8 {
                for j in 0..8 {
                    let mut s = 0.0;
                    for k in 0..8 {
                        s += m.entries[k][i] * m.entries[k][j];
                    }
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((s - expect).abs() < 1e-12);
                }
            }
        }
        // skew-symmetric for purely imaginary base
        let mut v = random_element(&mut rng, 3).im();
        v = v.scale(1.0 / v.norm());
        for m in [
            TranslationMatrix::left(&v).unwrap(),
            TranslationMatrix::right(&v).unwrap(),
        ] {
            for i in 0..8 {
                for j in 0..8 {
                    assert!((m.entries[i][j] + m.entries[j][i]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn imaginary_part_projector_characterization() {
        // Re(x) = 0 exactly when the first coordinate vanishes
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = random_element(&mut rng, 3);
        let im = x.im();
        assert_eq!(im.re(), 0.0);
        assert_eq!(im.coords()[1..], x.coords()[1..]);
        let re_part = x.add(&cd_conjugate(&x)).unwrap().scale(0.5);
        assert_eq!(re_part.coords()[0], x.coords()[0]);
        for &c in &re_part.coords()[1..] {
            assert_eq!(c, 0.0);
        }
        // Re(x) + Im(x) = x
        assert!(re_part.add(&im).unwrap().sub(&x).unwrap().norm() < 1e-15);
    }

    #[test]
    fn json_fixture_roundtrip() {
        let x = CDElement::new(2, vec![1.0, -0.5, 0.25, 3.0]).unwrap();
        let json = serde_json::to_string(&x).unwrap();
        assert_eq!(json, "[1.0,-0.5,0.25,3.0]");
        let back: CDElement = serde_json::from_str(&json).unwrap();
        assert_eq!(back, x);
        assert!(serde_json::from_str::<CDElement>("[1.0,2.0,3.0]").is_err());
    }

    #[test]
    fn level_cap_enforced() {
        assert!(matches!(
            CDElement::new(5, vec![0.0; 32]),
            Err(Error::LevelTooLarge(5))
        ));
    }

    proptest! {
        #[test]
        fn conjugation_is_an_involution(seed in 0u64..200) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let level = rng.random_range(0..=MAX_LEVEL);
            let x = random_element(&mut rng, level);
            prop_assert_eq!(cd_conjugate(&cd_conjugate(&x)), x);
        }

        #[test]
        fn norm_law_up_to_level_3(seed in 0u64..200) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let level = rng.random_range(0..=3);
            let x = random_element(&mut rng, level);
            let y = random_element(&mut rng, level);
            let p = cd_multiply(&x, &y).unwrap();
            prop_assert!((p.norm() - x.norm() * y.norm()).abs() < 1e-12);
        }
    }
}
