use rand::seq::{index, SliceRandom};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::rng;

/// Keeps every minority-class row and a uniform sample (without replacement)
/// of `round(majority_per_minority * minority)` majority rows. The result is
/// shuffled. With equal class sizes the negatives are treated as majority.
pub fn random_undersample(
    data: &Dataset,
    majority_per_minority: f64,
    seed: u64,
) -> Result<Dataset> {
    if !(majority_per_minority > 0.0 && majority_per_minority.is_finite()) {
        return Err(Error::Config(format!(
            "undersample ratio must be a positive number, got {majority_per_minority}"
        )));
    }
    let negatives = data.indices_of(0);
    let positives = data.indices_of(1);
    if negatives.is_empty() || positives.is_empty() {
        return Err(Error::Data(
            "undersampling needs rows of both classes".into(),
        ));
    }
    let (majority, minority) = if negatives.len() >= positives.len() {
        (negatives, positives)
    } else {
        (positives, negatives)
    };
    let target = (majority_per_minority * minority.len() as f64).round() as usize;
    if target == 0 || target > majority.len() {
        return Err(Error::Config(format!(
            "ratio {majority_per_minority}:1 needs {target} majority rows but {} are available",
            majority.len()
        )));
    }

    let mut rng = rng::seeded(seed);
    let mut keep: Vec<usize> = index::sample(&mut rng, majority.len(), target)
        .into_iter()
        .map(|k| majority[k])
        .collect();
    keep.extend_from_slice(&minority);
    keep.shuffle(&mut rng);
    Ok(data.select(&keep))
}
