#![no_main]

use libfuzzer_sys::fuzz_target;
use rsm_core::setfn::SetFunction;
use rsm_core::subset::Subset;
use rsm_core::water::{parse_instance, serialize_instance};

fuzz_target!(|text: &str| {
    let Ok(inst) = parse_instance(text) else {
        return;
    };
    inst.validate().expect("parsed instances are valid");
    let again = parse_instance(&serialize_instance(&inst)).expect("serialized instances parse");
    assert_eq!(again, inst);

    // small networks also exercise the shortest-path oracle
    if inst.node_count() <= 64 && inst.network.edges.len() <= 512 && inst.scenario_count() <= 8 {
        for f in inst.oracles() {
            let all = f.value(&Subset::full(inst.node_count()));
            assert!(all <= f.ceiling() + 1e-9);
        }
    }
});
