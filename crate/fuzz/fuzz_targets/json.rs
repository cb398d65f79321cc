#![no_main]

use energylab::orlicz::DistributionFunction;
use energylab::radial::{RadialMeasure, RadialProfile};
use energylab::weights::Weight;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = serde_json::from_slice::<RadialProfile>(data);
    let _ = serde_json::from_slice::<Weight>(data);
    let _ = serde_json::from_slice::<DistributionFunction>(data);
    let _ = serde_json::from_slice::<RadialMeasure>(data);
});
