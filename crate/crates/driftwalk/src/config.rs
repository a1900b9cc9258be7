//! `--config <file.json>`: keys mirror flags and are spliced in ahead of the
//! command-line flags, so anything given on the command line wins.

use std::ffi::OsString;
use std::path::PathBuf;

use serde_json::Value;

use crate::error::CliError;
use crate::record::flags_from;

/// Path named by `--config`, if any, among the arguments after the
/// subcommand.
fn config_path(args: &[OsString]) -> Result<Option<PathBuf>, CliError> {
    let mut found = None;
    let mut iter = args.iter();
    while let Some(arg) = iter.next() {
        let text = arg.to_string_lossy();
        if text == "--config" {
            let value = iter.next().ok_or_else(|| CliError::Usage("--config needs a path".into()))?;
            found = Some(PathBuf::from(value));
        } else if let Some(rest) = text.strip_prefix("--config=") {
            found = Some(PathBuf::from(rest));
        } else if text == "--" {
            break;
        }
    }
    Ok(found)
}

/// Flags encoded by a config file. A run record is accepted too: its
/// `params` object is used.
pub fn load_flags(path: &PathBuf) -> Result<Vec<String>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let doc: Value =
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{} is not valid JSON: {e}", path.display())))?;
    let object = match doc.get("params").and_then(Value::as_object) {
        Some(params) if doc.get("command").is_some() => params,
        _ => doc
            .as_object()
            .ok_or_else(|| CliError::Usage(format!("{} must hold a JSON object", path.display())))?,
    };
    let mut object = object.clone();
    // a config naming another config would recurse
    object.remove("config");
    flags_from(&object)
}

/// `[program, subcommand, <config flags>, <given flags>]`.
pub fn expand(argv: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    if argv.len() < 3 || argv[1].to_string_lossy().starts_with('-') {
        return Ok(argv);
    }
    let Some(path) = config_path(&argv[2..])? else {
        return Ok(argv);
    };
    let mut out = argv[..2].to_vec();
    out.extend(load_flags(&path)?.into_iter().map(OsString::from));
    out.extend(argv[2..].iter().cloned());
    Ok(out)
}
