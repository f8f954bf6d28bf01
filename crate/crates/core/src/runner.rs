//! Replica farming. Each replica is a pure function of its index, results
//! come back in index order, so the thread count never changes output.

use crate::error::Result;
use rayon::prelude::*;

/// Runs `f(0..replicas)` in parallel; the error of the lowest failing
/// index wins.
pub fn replicate<T: Send>(replicas: usize, f: impl Fn(usize) -> Result<T> + Sync) -> Result<Vec<T>> {
    let out: Vec<Result<T>> = (0..replicas).into_par_iter().map(&f).collect();
    out.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn ordered_and_first_error() {
        let v = replicate(100, |i| Ok(i * 2)).unwrap();
        assert_eq!(v, (0..100).map(|i| i * 2).collect::<Vec<_>>());
        let e = replicate(100, |i| if i % 7 == 3 { Err(Error::Numeric(i.to_string())) } else { Ok(i) });
        assert_eq!(e, Err(Error::Numeric("3".into())));
    }
}
