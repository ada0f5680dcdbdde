//! Degree-d Shamir secret sharing of vectors over a prime field.
//!
//! This is the randomness substrate of the querying algorithm: a secret
//! vector is hidden coordinatewise as the constant terms of independent
//! uniformly random polynomials of degree ≤ d, and each server receives the
//! evaluations at its own nonzero point. Any d evaluations of such a
//! polynomial are jointly uniform and therefore carry no information about
//! the constant term; the exact enumeration tests below check that property
//! literally, by walking every coefficient choice at tiny parameters.

use rand::Rng;

use crate::error::{Error, Result};
use crate::field::{weights_at_zero, FieldElement, Polynomial, PrimeField};

/// One server's view of a shared vector: its evaluation point and the
/// per-coordinate polynomial evaluations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShareVector {
    server_point: FieldElement,
    values: Vec<FieldElement>,
}

impl ShareVector {
    /// The nonzero evaluation point this share was produced at
    /// (canonically the server index).
    pub fn server_point(&self) -> FieldElement {
        self.server_point
    }

    /// Evaluations, one per coordinate of the shared vector.
    pub fn values(&self) -> &[FieldElement] {
        &self.values
    }
}

/// Shares `secret` coordinatewise with fresh uniform polynomials of degree
/// ≤ `degree`, evaluated at the given distinct nonzero `points`.
///
/// Exactly `secret.len() * degree` field elements are drawn from `rng`, in
/// coordinate-major order; the deterministic remainder lives in
/// [`share_vector_with_coefficients`] so enumeration oracles can drive it
/// with explicit coefficient choices.
pub fn share_vector<R: Rng + ?Sized>(
    secret: &[FieldElement],
    degree: usize,
    points: &[FieldElement],
    rng: &mut R,
) -> Result<Vec<ShareVector>> {
    let field = sharing_field(secret, points)?;
    let coefficients: Vec<Vec<FieldElement>> = (0..secret.len())
        .map(|_| (0..degree).map(|_| field.sample(rng)).collect())
        .collect();
    share_vector_with_coefficients(secret, degree, points, &coefficients)
}

/// Deterministic core of [`share_vector`]: shares `secret` using the given
/// non-constant coefficients (`coefficients[i][k]` is the X^(k+1)
/// coefficient of coordinate i's polynomial).
pub fn share_vector_with_coefficients(
    secret: &[FieldElement],
    degree: usize,
    points: &[FieldElement],
    coefficients: &[Vec<FieldElement>],
) -> Result<Vec<ShareVector>> {
    let field = sharing_field(secret, points)?;
    if degree >= points.len() {
        // A sharing nobody could ever reconstruct is always a caller bug.
        return Err(Error::DegreeTooHigh {
            degree,
            points: points.len(),
        });
    }
    if coefficients.len() != secret.len() || coefficients.iter().any(|c| c.len() != degree) {
        return Err(Error::ShapeMismatch(format!(
            "sharing coefficients must be {}x{}",
            secret.len(),
            degree
        )));
    }

    let polys: Vec<Polynomial> = secret
        .iter()
        .zip(coefficients)
        .map(|(&s, extra)| {
            let mut coeffs = Vec::with_capacity(degree + 1);
            coeffs.push(s);
            coeffs.extend_from_slice(extra);
            Polynomial::new(field, coeffs)
        })
        .collect();

    Ok(points
        .iter()
        .map(|&point| ShareVector {
            server_point: point,
            values: polys.iter().map(|f| f.eval(point)).collect(),
        })
        .collect())
}

/// Recovers the secret (the polynomial value at 0) from the first
/// `degree + 1` shares of one coordinate.
///
/// Taking a fixed prefix rather than an arbitrary subset keeps the behavior
/// deterministic; callers that want error detection compare against the
/// remaining shares separately (see the scheme's consistency check).
pub fn reconstruct_at_zero(
    shares: &[(FieldElement, FieldElement)],
    degree: usize,
) -> Result<FieldElement> {
    if shares.len() < degree + 1 {
        return Err(Error::InsufficientPoints {
            what: "share reconstruction",
            needed: degree + 1,
            got: shares.len(),
        });
    }
    let used = &shares[..degree + 1];
    let xs: Vec<FieldElement> = used.iter().map(|&(x, _)| x).collect();
    let weights = weights_at_zero(&xs)?;
    let mut acc = xs[0].field().zero();
    for (&(_, y), w) in used.iter().zip(weights) {
        acc = acc + w * y;
    }
    Ok(acc)
}

/// Validates the secret/points shapes shared by both sharing entry points
/// and returns the common field.
fn sharing_field(secret: &[FieldElement], points: &[FieldElement]) -> Result<PrimeField> {
    let first = secret.first().ok_or(Error::InsufficientPoints {
        what: "secret coordinates",
        needed: 1,
        got: 0,
    })?;
    let field = first.field();
    if points.is_empty() {
        return Err(Error::InsufficientPoints {
            what: "share points",
            needed: 1,
            got: 0,
        });
    }
    if points.iter().any(|p| p.is_zero()) {
        return Err(Error::ZeroPoint);
    }
    let mut values: Vec<u64> = points.iter().map(|p| p.value()).collect();
    values.sort_unstable();
    if let Some(dup) = values.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::DuplicatePoint(dup[0]));
    }
    Ok(field)
}
