//! Exact arithmetic in a prime field Z_p and univariate polynomial utilities.
//!
//! Every protocol value — database entries, query shares, answers, tags —
//! lives in one of these fields. The modulus is capped below 2^62 so that a
//! product of two canonical residues plus a carry fits comfortably in a
//! `u128`; within that range all arithmetic here is exact, with no modulo
//! bias anywhere (uniform sampling uses rejection underneath).
//!
//! Elements remember their field, and mixing elements of different fields in
//! one operation is a programming error that panics. Fallible conditions that
//! depend on runtime data (inverting zero, duplicate interpolation points)
//! return [`Error`] instead.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rand::Rng;

use crate::error::{Error, Result};

/// Moduli must stay below `2^MAX_MODULUS_BITS`.
///
/// With p < 2^62, `value * value` is below 2^124 and sums of a few such
/// products still fit in a `u128`, keeping every intermediate overflow-free.
pub const MAX_MODULUS_BITS: u32 = 62;

/// Size of the canonical little-endian encoding of one element.
///
/// Only the residue is serialized; the modulus travels in message and file
/// headers.
pub const ELEMENT_BYTES: usize = 8;

/// A prime field Z_p, identified by its modulus.
///
/// Construction verifies primality with a deterministic Miller–Rabin test
/// (exact for all 64-bit inputs), so a `PrimeField` value is a proof that its
/// modulus is prime. The type is `Copy` and two fields are the same field
/// exactly when their moduli are equal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimeField {
    modulus: u64,
}

impl PrimeField {
    /// Builds the field Z_p, checking that `modulus` is prime and small
    /// enough for overflow-free arithmetic.
    pub fn new(modulus: u64) -> Result<Self> {
        if modulus >= 1 << MAX_MODULUS_BITS {
            return Err(Error::ModulusTooLarge(modulus));
        }
        if !is_prime_u64(modulus) {
            return Err(Error::NotPrime(modulus));
        }
        Ok(Self { modulus })
    }

    /// The prime modulus p.
    pub fn modulus(self) -> u64 {
        self.modulus
    }

    /// Embeds an arbitrary integer, reducing it modulo p.
    pub fn element(self, value: u64) -> FieldElement {
        FieldElement {
            value: value % self.modulus,
            field: self,
        }
    }

    /// Accepts only canonical residues (`value < p`); used when decoding
    /// untrusted bytes, where silent reduction would mask corruption.
    pub fn try_element(self, value: u64) -> Result<FieldElement> {
        if value >= self.modulus {
            return Err(Error::ValueOutOfRange {
                value,
                modulus: self.modulus,
            });
        }
        Ok(FieldElement { value, field: self })
    }

    /// Decodes the canonical 8-byte little-endian encoding.
    pub fn element_from_le_bytes(self, bytes: [u8; ELEMENT_BYTES]) -> Result<FieldElement> {
        self.try_element(u64::from_le_bytes(bytes))
    }

    /// The additive identity.
    pub fn zero(self) -> FieldElement {
        self.element(0)
    }

    /// The multiplicative identity.
    pub fn one(self) -> FieldElement {
        self.element(1)
    }

    /// Draws an element uniformly from Z_p.
    ///
    /// `gen_range` rejects out-of-range draws internally, so the result is
    /// exactly uniform — the privacy arguments need truly uniform shares, and
    /// any modulo bias would show up as nonzero statistical distance in the
    /// exact enumeration tests.
    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> FieldElement {
        FieldElement {
            value: rng.gen_range(0..self.modulus),
            field: self,
        }
    }

    /// Draws an element uniformly from Z_p \ {0}.
    pub fn sample_nonzero<R: Rng + ?Sized>(self, rng: &mut R) -> FieldElement {
        FieldElement {
            value: rng.gen_range(1..self.modulus),
            field: self,
        }
    }
}

/// A residue modulo the prime of its field.
///
/// Arithmetic is provided through the standard operator traits; all results
/// are canonical residues in `[0, p)`. Operating on elements of different
/// fields panics.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: u64,
    field: PrimeField,
}

impl FieldElement {
    /// The canonical residue in `[0, p)`.
    pub fn value(self) -> u64 {
        self.value
    }

    /// The field this element belongs to.
    pub fn field(self) -> PrimeField {
        self.field
    }

    /// True for the additive identity.
    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    /// Canonical 8-byte little-endian encoding of the residue.
    pub fn to_le_bytes(self) -> [u8; ELEMENT_BYTES] {
        self.value.to_le_bytes()
    }

    /// Raises the element to an arbitrary power by square-and-multiply.
    pub fn pow(self, mut exp: u64) -> FieldElement {
        let p = self.field.modulus as u128;
        let mut base = self.value as u128;
        let mut acc: u128 = 1;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base % p;
            }
            base = base * base % p;
            exp >>= 1;
        }
        FieldElement {
            value: acc as u64,
            field: self.field,
        }
    }

    /// Multiplicative inverse via Fermat's little theorem (a^(p−2)).
    ///
    /// The exponentiation route is branch-free and valid because the modulus
    /// is always prime; only zero is rejected.
    pub fn inverse(self) -> Result<FieldElement> {
        if self.value == 0 {
            return Err(Error::ZeroInverse);
        }
        Ok(self.pow(self.field.modulus - 2))
    }

    fn assert_same_field(self, other: FieldElement, op: &str) {
        assert_eq!(
            self.field, other.field,
            "cannot {op} elements of Z_{} and Z_{}",
            self.field.modulus, other.field.modulus
        );
    }
}

impl Add for FieldElement {
    type Output = FieldElement;

    fn add(self, rhs: FieldElement) -> FieldElement {
        self.assert_same_field(rhs, "add");
        let p = self.field.modulus as u128;
        FieldElement {
            value: ((self.value as u128 + rhs.value as u128) % p) as u64,
            field: self.field,
        }
    }
}

impl Sub for FieldElement {
    type Output = FieldElement;

    fn sub(self, rhs: FieldElement) -> FieldElement {
        self.assert_same_field(rhs, "subtract");
        let p = self.field.modulus;
        let value = if self.value >= rhs.value {
            self.value - rhs.value
        } else {
            self.value + (p - rhs.value)
        };
        FieldElement {
            value,
            field: self.field,
        }
    }
}

impl Mul for FieldElement {
    type Output = FieldElement;

    fn mul(self, rhs: FieldElement) -> FieldElement {
        self.assert_same_field(rhs, "multiply");
        let p = self.field.modulus as u128;
        FieldElement {
            value: ((self.value as u128 * rhs.value as u128) % p) as u64,
            field: self.field,
        }
    }
}

impl Neg for FieldElement {
    type Output = FieldElement;

    fn neg(self) -> FieldElement {
        FieldElement {
            value: if self.value == 0 {
                0
            } else {
                self.field.modulus - self.value
            },
            field: self.field,
        }
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod {}", self.value, self.field.modulus)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// A univariate polynomial with coefficients in one field, constant term
/// first.
///
/// The coefficient vector never stores trailing zeros, so the zero polynomial
/// is the empty vector and `degree` returns `None` for it.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Polynomial {
    field: PrimeField,
    coeffs: Vec<FieldElement>,
}

impl Polynomial {
    /// Builds a polynomial from coefficients (constant term first), trimming
    /// trailing zeros. All coefficients must belong to `field`.
    pub fn new(field: PrimeField, mut coeffs: Vec<FieldElement>) -> Self {
        for c in &coeffs {
            assert_eq!(
                c.field, field,
                "coefficient from Z_{} in a polynomial over Z_{}",
                c.field.modulus, field.modulus
            );
        }
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { field, coeffs }
    }

    /// Convenience constructor reducing raw integers into the field.
    pub fn from_values(field: PrimeField, values: &[u64]) -> Self {
        Self::new(field, values.iter().map(|&v| field.element(v)).collect())
    }

    /// The zero polynomial.
    pub fn zero(field: PrimeField) -> Self {
        Self {
            field,
            coeffs: Vec::new(),
        }
    }

    /// The coefficient field.
    pub fn field(&self) -> PrimeField {
        self.field
    }

    /// Coefficients, constant term first, without trailing zeros.
    pub fn coeffs(&self) -> &[FieldElement] {
        &self.coeffs
    }

    /// Coefficient of X^i, zero beyond the stored length.
    pub fn coeff(&self, i: usize) -> FieldElement {
        self.coeffs
            .get(i)
            .copied()
            .unwrap_or_else(|| self.field.zero())
    }

    /// Degree of the polynomial; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Evaluates at `x` by Horner's rule.
    pub fn eval(&self, x: FieldElement) -> FieldElement {
        assert_eq!(
            x.field, self.field,
            "evaluating a polynomial over Z_{} at a point of Z_{}",
            self.field.modulus, x.field.modulus
        );
        let mut acc = self.field.zero();
        for &c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }
}

/// Interpolates the unique polynomial of degree < `points.len()` through the
/// given points (Lagrange form, accumulated coefficientwise).
///
/// Requires at least one point and pairwise distinct x-coordinates.
pub fn interpolate(points: &[(FieldElement, FieldElement)]) -> Result<Polynomial> {
    let field = check_distinct_xs(points.iter().map(|&(x, _)| x), "interpolation points", 1)?;

    // Accumulate sum_j y_j * L_j(X) where L_j is the basis polynomial that is
    // 1 at x_j and 0 at every other x_k.
    let mut acc = vec![field.zero(); points.len()];
    for (j, &(xj, yj)) in points.iter().enumerate() {
        // numerator prod_{k != j} (X − x_k), built up one linear factor at a time
        let mut num = vec![field.one()];
        let mut denom = field.one();
        for (k, &(xk, _)) in points.iter().enumerate() {
            if k == j {
                continue;
            }
            num = mul_by_linear(field, &num, -xk);
            denom = denom * (xj - xk);
        }
        let scale = yj
            * denom
                .inverse()
                .expect("distinct points give nonzero denominators");
        for (a, n) in acc.iter_mut().zip(num) {
            *a = *a + n * scale;
        }
    }
    Ok(Polynomial::new(field, acc))
}

/// Multiplies `poly` (dense coefficient vector) by the linear factor
/// `(X + shift)`.
fn mul_by_linear(
    field: PrimeField,
    poly: &[FieldElement],
    shift: FieldElement,
) -> Vec<FieldElement> {
    let mut out = vec![field.zero(); poly.len() + 1];
    for (i, &c) in poly.iter().enumerate() {
        out[i] = out[i] + c * shift;
        out[i + 1] = out[i + 1] + c;
    }
    out
}

/// Checks whether a single polynomial of degree ≤ `degree` passes through
/// every point.
///
/// The check is order-normalized: points are sorted by ascending x, the first
/// `degree + 1` define a candidate polynomial, and the remainder are verified
/// against it. With fewer than `degree + 2` points the check would be vacuous
/// and the call is rejected as a usage error.
pub fn consistent_with_degree(
    points: &[(FieldElement, FieldElement)],
    degree: usize,
) -> Result<bool> {
    if points.len() <= degree + 1 {
        return Err(Error::InsufficientPoints {
            what: "degree consistency check",
            needed: degree + 2,
            got: points.len(),
        });
    }
    let mut sorted = points.to_vec();
    sorted.sort_by_key(|&(x, _)| x.value());
    check_distinct_xs(sorted.iter().map(|&(x, _)| x), "consistency points", 1)?;

    let candidate = interpolate(&sorted[..degree + 1])?;
    Ok(sorted[degree + 1..]
        .iter()
        .all(|&(x, y)| candidate.eval(x) == y))
}

/// Lagrange weights λ_j with Σ_j λ_j·f(x_j) = f(0) for every polynomial f of
/// degree ≤ |xs|−1.
///
/// The weights depend only on the evaluation points:
/// λ_j = Π_{k≠j} x_k / (x_k − x_j). All points must be distinct and nonzero
/// (zero is the position being reconstructed).
pub fn weights_at_zero(xs: &[FieldElement]) -> Result<Vec<FieldElement>> {
    check_distinct_xs(xs.iter().copied(), "weight points", 1)?;
    if xs.iter().any(|x| x.is_zero()) {
        return Err(Error::ZeroPoint);
    }
    let mut weights = Vec::with_capacity(xs.len());
    for (j, &xj) in xs.iter().enumerate() {
        let mut num = xj.field().one();
        let mut denom = xj.field().one();
        for (k, &xk) in xs.iter().enumerate() {
            if k == j {
                continue;
            }
            num = num * xk;
            denom = denom * (xk - xj);
        }
        weights.push(
            num * denom
                .inverse()
                .expect("distinct points give nonzero denominators"),
        );
    }
    Ok(weights)
}

/// Validates that the x-coordinates are pairwise distinct and that at least
/// `needed` of them exist; returns their common field.
fn check_distinct_xs(
    xs: impl Iterator<Item = FieldElement>,
    what: &'static str,
    needed: usize,
) -> Result<PrimeField> {
    let xs: Vec<FieldElement> = xs.collect();
    if xs.len() < needed {
        return Err(Error::InsufficientPoints {
            what,
            needed,
            got: xs.len(),
        });
    }
    let mut values: Vec<u64> = xs.iter().map(|x| x.value()).collect();
    values.sort_unstable();
    if let Some(dup) = values.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::DuplicatePoint(dup[0]));
    }
    Ok(xs[0].field())
}

/// Deterministic Miller–Rabin primality test, exact for all `u64` inputs.
///
/// The witness set {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37} is known to
/// be sound for every integer below 3.3·10^24, which covers the full 64-bit
/// range.
fn is_prime_u64(n: u64) -> bool {
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &q in &WITNESSES {
        if n.is_multiple_of(q) {
            return n == q;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = (x as u128 * x as u128 % n as u128) as u64;
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn pow_mod(base: u64, mut exp: u64, modulus: u64) -> u64 {
    let m = modulus as u128;
    let mut acc: u128 = 1;
    let mut b = base as u128 % m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    acc as u64
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn f7() -> PrimeField {
        PrimeField::new(7).unwrap()
    }

    #[test]
    fn primality_screen_accepts_primes_and_rejects_composites() {
        for p in [2u64, 3, 5, 7, 257, 65_537, (1 << 61) - 1] {
            assert!(PrimeField::new(p).is_ok(), "{p} should be accepted");
        }
        for n in [0u64, 1, 4, 6, 9, 256, 1 << 32, (1 << 61) + 1] {
            assert_eq!(PrimeField::new(n), Err(Error::NotPrime(n)), "{n}");
        }
        assert_eq!(
            PrimeField::new(1 << 62),
            Err(Error::ModulusTooLarge(1 << 62))
        );
    }

    #[test]
    fn addition_wraps_into_canonical_range() {
        let f = f7();
        assert_eq!((f.element(3) + f.element(5)).value(), 1);
    }

    #[test]
    fn inverse_matches_brute_force_search() {
        // Independent oracle: scan all residues for the product that lands on 1.
        for p in [7u64, 11, 101, 257] {
            let f = PrimeField::new(p).unwrap();
            for v in 1..p {
                let expected = (1..p).find(|&w| v * w % p == 1).unwrap();
                assert_eq!(f.element(v).inverse().unwrap().value(), expected);
            }
        }
    }

    #[test]
    fn inverse_of_three_mod_seven_is_five() {
        assert_eq!(f7().element(3).inverse().unwrap().value(), 5);
    }

    #[test]
    fn zero_has_no_inverse() {
        assert_eq!(f7().zero().inverse(), Err(Error::ZeroInverse));
    }

    #[test]
    #[should_panic(expected = "cannot add")]
    fn mixing_fields_panics() {
        let a = f7().element(1);
        let b = PrimeField::new(11).unwrap().element(1);
        let _ = a + b;
    }

    #[test]
    fn try_element_rejects_non_canonical_residues() {
        assert_eq!(
            f7().try_element(7),
            Err(Error::ValueOutOfRange {
                value: 7,
                modulus: 7
            })
        );
        assert_eq!(f7().try_element(6).unwrap().value(), 6);
    }

    #[test]
    fn element_bytes_round_trip() {
        let f = PrimeField::new(257).unwrap();
        let x = f.element(200);
        assert_eq!(f.element_from_le_bytes(x.to_le_bytes()).unwrap(), x);
        let mut too_big = [0u8; ELEMENT_BYTES];
        too_big[2] = 1; // 65536 >= 257
        assert!(f.element_from_le_bytes(too_big).is_err());
    }

    #[test]
    fn sampling_is_uniform_within_binomial_bounds() {
        // 10^5 draws at p=5: each residue within 4 sigma of 1/5, and
        // sample_nonzero never produces 0.
        let f = PrimeField::new(5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let trials = 100_000u64;
        let mut counts = [0u64; 5];
        for _ in 0..trials {
            counts[f.sample(&mut rng).value() as usize] += 1;
        }
        let expected = trials as f64 / 5.0;
        let sigma = (trials as f64 * 0.2 * 0.8).sqrt();
        for (v, &c) in counts.iter().enumerate() {
            assert!(
                (c as f64 - expected).abs() < 4.0 * sigma,
                "residue {v} drawn {c} times, expected {expected}"
            );
        }
        for _ in 0..trials {
            assert_ne!(f.sample_nonzero(&mut rng).value(), 0);
        }
    }

    #[test]
    fn sample_nonzero_at_p_two_is_always_one() {
        let f = PrimeField::new(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..32 {
            assert_eq!(f.sample_nonzero(&mut rng).value(), 1);
        }
    }

    #[test]
    fn horner_evaluation_matches_monomial_sum_oracle() {
        // Independent oracle: evaluate as an explicit sum of monomials.
        let f = PrimeField::new(101).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let coeffs: Vec<FieldElement> = (0..4).map(|_| f.sample(&mut rng)).collect();
            let poly = Polynomial::new(f, coeffs.clone());
            for x in 0..101 {
                let x = f.element(x);
                let mut expected = f.zero();
                for (i, &c) in coeffs.iter().enumerate() {
                    expected = expected + c * x.pow(i as u64);
                }
                assert_eq!(poly.eval(x), expected);
            }
        }
    }

    #[test]
    fn polynomial_normalizes_trailing_zeros() {
        let f = f7();
        let poly = Polynomial::from_values(f, &[3, 1, 0, 0]);
        assert_eq!(poly.coeffs().len(), 2);
        assert_eq!(poly.degree(), Some(1));
        assert_eq!(Polynomial::from_values(f, &[0, 0]).degree(), None);
        assert_eq!(Polynomial::zero(f).eval(f.element(4)).value(), 0);
    }

    #[test]
    fn linear_example_evaluates_to_zero_at_three() {
        // 1 + 2x at x=3 is 7 ≡ 0 (mod 7).
        let poly = Polynomial::from_values(f7(), &[1, 2]);
        assert_eq!(poly.eval(f7().element(3)).value(), 0);
    }

    #[test]
    fn interpolation_solves_the_two_point_system() {
        // Through (1,3) and (2,5) over Z_7: solving the 2x2 linear system by
        // hand gives 1 + 2x.
        let f = f7();
        let poly =
            interpolate(&[(f.element(1), f.element(3)), (f.element(2), f.element(5))]).unwrap();
        assert_eq!(poly, Polynomial::from_values(f, &[1, 2]));
    }

    #[test]
    fn interpolation_through_single_point_is_constant() {
        let f = f7();
        let poly = interpolate(&[(f.element(4), f.element(6))]).unwrap();
        assert_eq!(poly, Polynomial::from_values(f, &[6]));
    }

    #[test]
    fn interpolation_rejects_duplicates_and_empty_input() {
        let f = f7();
        assert_eq!(
            interpolate(&[(f.element(2), f.element(1)), (f.element(2), f.element(3)),]),
            Err(Error::DuplicatePoint(2))
        );
        assert!(matches!(
            interpolate(&[]),
            Err(Error::InsufficientPoints { .. })
        ));
    }

    #[test]
    fn interpolation_round_trips_random_polynomials() {
        // d+1 samples of a random degree-d polynomial recover it exactly.
        let f = PrimeField::new(101).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for degree in 0..6usize {
            for _ in 0..20 {
                let coeffs: Vec<FieldElement> = (0..=degree).map(|_| f.sample(&mut rng)).collect();
                let poly = Polynomial::new(f, coeffs);
                let points: Vec<(FieldElement, FieldElement)> = (1..=degree as u64 + 1)
                    .map(|x| (f.element(x), poly.eval(f.element(x))))
                    .collect();
                assert_eq!(interpolate(&points).unwrap(), poly);
            }
        }
    }

    #[test]
    fn consistency_check_flags_the_off_line_point() {
        let f = f7();
        let on_line = [
            (f.element(1), f.element(1)),
            (f.element(2), f.element(2)),
            (f.element(3), f.element(3)),
        ];
        assert!(consistent_with_degree(&on_line, 1).unwrap());
        let off_line = [
            (f.element(1), f.element(1)),
            (f.element(2), f.element(2)),
            (f.element(3), f.element(4)),
        ];
        assert!(!consistent_with_degree(&off_line, 1).unwrap());
    }

    #[test]
    fn consistency_check_is_order_independent() {
        let f = f7();
        let mut points = vec![
            (f.element(3), f.element(4)),
            (f.element(1), f.element(1)),
            (f.element(2), f.element(2)),
        ];
        let expected = consistent_with_degree(&points, 1).unwrap();
        points.rotate_left(1);
        assert_eq!(consistent_with_degree(&points, 1).unwrap(), expected);
    }

    #[test]
    fn consistency_check_rejects_vacuous_point_counts() {
        let f = f7();
        let points = [(f.element(1), f.element(1)), (f.element(2), f.element(2))];
        assert!(matches!(
            consistent_with_degree(&points, 1),
            Err(Error::InsufficientPoints { .. })
        ));
    }

    #[test]
    fn weights_for_points_one_two_mod_seven() {
        // lambda_1 = 2/(2-1) = 2, lambda_2 = -1/(2-1) = 6 over Z_7.
        let f = f7();
        let weights = weights_at_zero(&[f.element(1), f.element(2)]).unwrap();
        assert_eq!(
            weights.iter().map(|w| w.value()).collect::<Vec<_>>(),
            vec![2, 6]
        );
    }

    #[test]
    fn weights_reject_zero_points_and_single_point_is_trivial() {
        let f = f7();
        assert_eq!(
            weights_at_zero(&[f.element(0), f.element(1)]),
            Err(Error::ZeroPoint)
        );
        assert_eq!(weights_at_zero(&[f.element(1)]).unwrap()[0].value(), 1);
    }

    #[test]
    fn weights_recombine_polynomial_evaluations_to_the_constant_term() {
        let f = PrimeField::new(101).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let coeffs: Vec<FieldElement> = (0..4).map(|_| f.sample(&mut rng)).collect();
            let poly = Polynomial::new(f, coeffs);
            let xs: Vec<FieldElement> = [5u64, 17, 42, 99].iter().map(|&x| f.element(x)).collect();
            let weights = weights_at_zero(&xs).unwrap();
            let mut acc = f.zero();
            for (x, w) in xs.iter().zip(&weights) {
                acc = acc + *w * poly.eval(*x);
            }
            assert_eq!(acc, poly.eval(f.zero()));
            // The weights interpolate the constant-1 polynomial as well, so
            // they always sum to 1.
            let mut sum = f.zero();
            for w in weights {
                sum = sum + w;
            }
            assert_eq!(sum, f.one());
        }
    }

    proptest! {
        #[test]
        fn field_axioms(p in prop::sample::select(vec![5u64, 7, 257, 65_537]),
                        a in 0u64..65_536,
                        b in 0u64..65_536,
                        c in 0u64..65_536) {
            let f = PrimeField::new(p).unwrap();
            let (a, b, c) = (f.element(a), f.element(b), f.element(c));
            prop_assert_eq!((a + b) + c, a + (b + c));
            prop_assert_eq!(a + b, b + a);
            prop_assert_eq!((a * b) * c, a * (b * c));
            prop_assert_eq!(a * b, b * a);
            prop_assert_eq!(a * (b + c), a * b + a * c);
            prop_assert_eq!(a + (-a), f.zero());
            prop_assert_eq!(a - b, a + (-b));
            if !a.is_zero() {
                prop_assert_eq!(a * a.inverse().unwrap(), f.one());
            }
        }

        #[test]
        fn interpolation_is_an_inverse_of_evaluation(
            p in prop::sample::select(vec![11u64, 101, 257]),
            raw in prop::collection::vec(0u64..257, 1..6),
        ) {
            let f = PrimeField::new(p).unwrap();
            let poly = Polynomial::new(f, raw.iter().map(|&v| f.element(v)).collect());
            let k = raw.len() as u64;
            let points: Vec<_> = (1..=k).map(|x| (f.element(x), poly.eval(f.element(x)))).collect();
            prop_assert_eq!(interpolate(&points).unwrap(), poly);
        }
    }
}
