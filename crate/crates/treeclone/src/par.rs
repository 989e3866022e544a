//! Thin switch between rayon-backed and sequential execution.
//!
//! All results are deterministic: searches return the first hit in index
//! order, so the parallel and sequential paths agree bit for bit.

use crate::error::Result;

#[cfg(feature = "parallel")]
pub(crate) fn map_collect<T, R>(
    items: &[T],
    f: impl Fn(&T) -> Result<R> + Sync + Send,
) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_collect<T, R>(items: &[T], f: impl Fn(&T) -> Result<R>) -> Result<Vec<R>> {
    items.iter().map(f).collect()
}

/// Fallible search: the first `Ok(Some(_))` in index order, or the first
/// error encountered.
#[cfg(feature = "parallel")]
pub(crate) fn try_find_first_indexed<R>(
    n: usize,
    f: impl Fn(usize) -> Result<Option<R>> + Sync + Send,
) -> Result<Option<R>>
where
    R: Send,
{
    use rayon::prelude::*;
    match (0..n).into_par_iter().find_map_first(|i| f(i).transpose()) {
        Some(Ok(r)) => Ok(Some(r)),
        Some(Err(e)) => Err(e),
        None => Ok(None),
    }
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn try_find_first_indexed<R>(
    n: usize,
    f: impl Fn(usize) -> Result<Option<R>>,
) -> Result<Option<R>> {
    for i in 0..n {
        if let Some(r) = f(i)? {
            return Ok(Some(r));
        }
    }
    Ok(None)
}
