use std::fs;
use std::path::Path;

use kframe_core::json::{
    frame_from_json, operator_from_json, vector_from_json, EntriesJson, FrameJson,
};
use kframe_core::{FrameSequence, Operator, Vector};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::Failure;

fn parse<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text =
        fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        let msg = e.to_string();
        let msg = msg
            .rsplit_once(" at line ")
            .map_or(msg.as_str(), |(m, _)| m);
        Failure::input(format!(
            "{}:{}:{}: {msg}",
            path.display(),
            e.line(),
            e.column()
        ))
    })
}

fn context(path: &Path) -> impl Fn(kframe_core::Error) -> Failure + '_ {
    move |e| Failure::input(format!("{}: {e}", path.display()))
}

pub fn read_frame(path: &Path) -> Result<FrameSequence, Failure> {
    frame_from_json(&parse::<FrameJson>(path)?).map_err(context(path))
}

pub fn read_operator(path: &Path) -> Result<Operator, Failure> {
    operator_from_json(&parse::<EntriesJson>(path)?).map_err(context(path))
}

pub fn read_vector(path: &Path) -> Result<Vector, Failure> {
    vector_from_json(&parse::<EntriesJson>(path)?).map_err(context(path))
}

/// Fails with the file name when `found` does not match the frame dimension.
pub fn expect_dim(path: &Path, expected: usize, found: usize) -> Result<(), Failure> {
    if expected == found {
        Ok(())
    } else {
        Err(Failure::input(format!(
            "{}: dimension mismatch: expected {expected}, found {found}",
            path.display()
        )))
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).expect("report types serialize");
    text.push('\n');
    fs::write(path, text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}
