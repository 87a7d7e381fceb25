#![no_main]
use libfuzzer_sys::fuzz_target;
use pulse_cns::checkpoint::{decode, encode};
use pulse_cns::PulseParams;

fuzz_target!(|data: &[u8]| {
    if let Ok(ck) = decode(data) {
        let params = PulseParams { gamma: ck.gamma, mu: ck.mu, lambda: ck.lambda, ..Default::default() };
        if params.validate().is_ok() {
            assert_eq!(encode(&ck.state, &params), data);
        }
    }
});
