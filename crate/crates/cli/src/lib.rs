//! Command-line front end for `netcascade-core`: scenario files, reports,
//! sweeps, lever targets, simulations and SIR runs, with CSV output.

pub mod edgelist;
pub mod epidemic;
pub mod error;
pub mod fmt;
pub mod graphcmd;
pub mod presets;
pub mod report;
pub mod scenario;
pub mod simulate;
pub mod sweep;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

pub use error::{CliError, CliResult};

use scenario::{parse_scenario, ScenarioSpec};

/// Reads a scenario from a file or from `preset:NAME`. The second value is
/// the directory relative graph paths resolve against.
pub fn load_scenario(arg: &str) -> CliResult<(ScenarioSpec, Option<PathBuf>)> {
    if let Some(name) = arg.strip_prefix(presets::PREFIX) {
        let preset = presets::find(name).ok_or_else(|| {
            let names: Vec<&str> = presets::PRESETS.iter().map(|p| p.name).collect();
            CliError::Usage(format!("no preset `{name}`; available: {}", names.join(", ")))
        })?;
        return Ok((parse_scenario(preset.text)?, None));
    }
    let path = Path::new(arg);
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let spec = parse_scenario(&text)?;
    Ok((spec, path.parent().map(Path::to_path_buf)))
}

/// Writes `header` and `rows` as CSV to `path`, or stdout for `-`.
pub fn write_csv<H, R>(path: &Path, header: H, rows: &[R]) -> CliResult<()>
where
    H: IntoIterator,
    H::Item: AsRef<[u8]>,
    R: AsRef<[String]>,
{
    let sink: Box<dyn Write> = if path == Path::new("-") {
        Box::new(io::stdout().lock())
    } else {
        Box::new(io::BufWriter::new(fs::File::create(path).map_err(|e| CliError::io(path, e))?))
    };
    let mut wtr = csv::Writer::from_writer(sink);
    wtr.write_record(header)?;
    for r in rows {
        wtr.write_record(r.as_ref())?;
    }
    wtr.flush().map_err(|e| CliError::io(path, e))
}
