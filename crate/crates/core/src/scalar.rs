use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point element type used by embeddings, the vector index and the
/// re-ranking scores.
///
/// `Display`/`FromStr` round-trip exactly for `f32` and `f64`, which the text
/// model format relies on.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Display + Debug + FromStr + Default + Send + Sync + 'static
{
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("f64 is representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

pub(crate) fn dot<F: Scalar>(a: &[F], b: &[F]) -> F {
    a.iter()
        .zip(b)
        .fold(F::zero(), |acc, (&x, &y)| acc + x * y)
}

pub(crate) fn norm<F: Scalar>(a: &[F]) -> F {
    dot(a, a).sqrt()
}

/// Elementwise mean of equally sized vectors; `None` for an empty input.
pub(crate) fn mean_of<F: Scalar>(vectors: &[&[F]]) -> Option<Vec<F>> {
    let first = vectors.first()?;
    let mut acc = vec![F::zero(); first.len()];
    for v in vectors {
        for (a, &x) in acc.iter_mut().zip(v.iter()) {
            *a = *a + x;
        }
    }
    let n = F::of(vectors.len() as f64);
    acc.iter_mut().for_each(|a| *a = *a / n);
    Some(acc)
}
