use rmt_entangle::export::{write_binary, write_csv, MatrixHeader};

use crate::bundle::Bundle;
use crate::config::{ExportFormat, Params, Settings};
use crate::error::CliError;

pub fn run(settings: &Settings, bundle: &mut Bundle) -> Result<(), CliError> {
    let Params::Export { spec, format } = &settings.params else {
        unreachable!("settings resolved for another experiment");
    };
    for index in 0..settings.samples as u64 {
        let u = spec.sample(index)?;
        let header = MatrixHeader {
            dim: spec.dim,
            kind: spec.kind.name().to_string(),
            params: spec.params(),
            seed: spec.seed,
            sample_index: index,
        };
        match format {
            ExportFormat::Binary => bundle.write(&format!("sample_{index:05}.rmtmat"), |w| {
                Ok(write_binary(w, &header, u.matrix())?)
            })?,
            ExportFormat::Csv => bundle.write(&format!("sample_{index:05}.csv"), |w| {
                Ok(write_csv(w, &header, u.matrix())?)
            })?,
        }
    }
    Ok(())
}
