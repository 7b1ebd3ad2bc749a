//! Fan-out of the core engines over index ranges. Partial results are
//! merged by exact addition in index order, so values never depend on
//! scheduling.

use std::ops::Range;

use ffcubes_core::counting::{CountReport, CubeSumEngine, Method};
use ffcubes_core::dualform::{dual_box_size, dual_count_range, DualCount};
use ffcubes_core::expsums::DiagonalForm;
use ffcubes_core::{Error, Result};
use rayon::prelude::*;

const CHUNKS: u64 = 256;

/// Splits `0..total` into at most [`CHUNKS`] contiguous ranges.
pub fn chunks(total: u64) -> Vec<Range<u64>> {
    let step = total.div_ceil(CHUNKS).max(1);
    (0..total.div_ceil(step))
        .map(|i| i * step..((i + 1) * step).min(total))
        .collect()
}

pub fn count(engine: &CubeSumEngine, method: Method, budget: u64) -> Result<CountReport> {
    let need = match method {
        Method::Exhaustive => engine.exhaustive_work(),
        Method::MeetInMiddle => {
            let (a, b) = engine.mitm_work();
            a.max(b)
        }
    };
    if need > budget {
        return Err(Error::Budget(format!(
            "{method:?} needs about {need} steps, budget is {budget}"
        )));
    }
    let value = match method {
        Method::Exhaustive => chunks(engine.exhaustive_work())
            .into_par_iter()
            .map(|r| engine.count_exhaustive_range(r))
            .sum(),
        Method::MeetInMiddle => {
            let table = engine.left_table();
            chunks(engine.probe_count())
                .into_par_iter()
                .map(|r| engine.count_probe_range(&table, r))
                .sum()
        }
    };
    Ok(CountReport { value, method })
}

pub fn dual_count(form: &DiagonalForm, c_deg: u32, budget: u64) -> Result<DualCount> {
    let total = dual_box_size(form, c_deg);
    if total > budget {
        return Err(Error::Budget(format!(
            "dual box has {total} vectors, budget is {budget}"
        )));
    }
    let parts: Vec<DualCount> = chunks(total)
        .into_par_iter()
        .map(|r| dual_count_range(form, c_deg, r))
        .collect::<Result<_>>()?;
    Ok(parts
        .into_iter()
        .fold(DualCount::default(), DualCount::merge))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunk_cover() {
        for total in [0u64, 1, 7, 256, 257, 10_000] {
            let c = chunks(total);
            assert_eq!(c.iter().map(|r| r.end - r.start).sum::<u64>(), total);
            assert!(c.windows(2).all(|w| w[0].end == w[1].start));
        }
    }
}
