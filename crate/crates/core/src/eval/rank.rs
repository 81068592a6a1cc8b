use crate::error::{check_bounds, Error, Result};
use crate::kg::EntityId;

/// Rank of `target` against every entity outside `filter`, counting half of the ties.
pub fn filtered_rank(scores: &[f64], target: EntityId, filter: &[EntityId]) -> Result<usize> {
    check_bounds("entity", target as usize, scores.len())?;
    let mut mask = vec![false; scores.len()];
    for &e in filter {
        check_bounds("entity", e as usize, scores.len())?;
        mask[e as usize] = true;
    }
    if mask[target as usize] {
        return Err(Error::Contract(format!("target {target} is in its own filter set")));
    }
    Ok(masked_rank(scores, target, &mask))
}

/// `mask` marks filtered entities; `target` must be unmasked.
pub(crate) fn masked_rank(scores: &[f64], target: EntityId, mask: &[bool]) -> usize {
    let s = scores[target as usize];
    let (mut above, mut ties) = (0usize, 0usize);
    for (e, (&v, &skip)) in scores.iter().zip(mask).enumerate() {
        if skip || e == target as usize {
            continue;
        }
        if v > s {
            above += 1;
        } else if v == s {
            ties += 1;
        }
    }
    1 + above + ties / 2
}
