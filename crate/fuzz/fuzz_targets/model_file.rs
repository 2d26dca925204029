#![no_main]

use fplr::cliio::ModelFile;
use fplr::Curve;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(file) = ModelFile::from_json_str(text) else {
        return;
    };
    // Validation must reject anything the predictor cannot handle.
    if let Ok(model) = file.to_model() {
        let x = Curve::zeros(*model.b_hat.grid());
        let t = model.t_train[0].clone();
        let _ = model.predict(&x, &t);
    }
});
