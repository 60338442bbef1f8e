//! Shared fixtures for the criterion benchmarks.

use fwlab_core::grid::{InitialData, PeriodicGrid, StateField};

pub fn data1_field(n: usize) -> StateField {
    InitialData::Data1
        .sample(PeriodicGrid::new(n).expect("n >= 4"))
        .expect("finite preset")
}
